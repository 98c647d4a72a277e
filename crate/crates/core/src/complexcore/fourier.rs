//! Unitary DFT and circular convolution.
//!
//! `dft` is scaled by `1/√m`, so `‖dft(v)‖ = ‖v‖`. Under this scaling the
//! convolution theorem reads `dft(h ⊛ v) = √m · dft(h) ⊙ dft(v)`.

use std::cell::RefCell;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use super::linalg::{CVec, C64, ZERO};
use crate::error::{dim_err, Result};

/// Below this length the direct O(m²) sum beats planning + FFT.
const DIRECT_CONV_MAX: usize = 16;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(len)
        } else {
            p.plan_fft_forward(len)
        }
    })
}

/// In-place unnormalized forward transform, `V_k = Σ_j v_j e^{-2πijk/m}`.
pub fn fft_in_place(buf: &mut [C64]) {
    if buf.len() > 1 {
        plan(buf.len(), false).process(buf);
    }
}

/// In-place unnormalized inverse transform (no `1/m` factor).
pub fn ifft_in_place(buf: &mut [C64]) {
    if buf.len() > 1 {
        plan(buf.len(), true).process(buf);
    }
}

pub fn dft(v: &CVec) -> CVec {
    let mut buf = v.as_slice().to_vec();
    fft_in_place(&mut buf);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
    CVec::from_raw(buf)
}

pub fn idft(v: &CVec) -> CVec {
    let mut buf = v.as_slice().to_vec();
    ifft_in_place(&mut buf);
    let s = 1.0 / (buf.len() as f64).sqrt();
    buf.iter_mut().for_each(|z| *z *= s);
    CVec::from_raw(buf)
}

/// `y_j = Σ_i h_i · v_{(j−i) mod m}`.
pub fn circ_conv(h: &CVec, v: &CVec) -> Result<CVec> {
    if h.len() != v.len() {
        return dim_err(format!(
            "circ_conv: filter length {} differs from signal length {}",
            h.len(),
            v.len()
        ));
    }
    Ok(CVec::from_raw(circ_conv_slices(h.as_slice(), v.as_slice())))
}

pub(crate) fn circ_conv_slices(h: &[C64], v: &[C64]) -> Vec<C64> {
    let m = h.len();
    if m <= DIRECT_CONV_MAX {
        let mut y = vec![ZERO; m];
        for (i, hi) in h.iter().enumerate() {
            if *hi == ZERO {
                continue;
            }
            for (j, yj) in y.iter_mut().enumerate() {
                *yj += hi * v[(j + m - i) % m];
            }
        }
        return y;
    }
    let mut hf = h.to_vec();
    let mut vf = v.to_vec();
    fft_in_place(&mut hf);
    fft_in_place(&mut vf);
    for (a, b) in hf.iter_mut().zip(&vf) {
        *a *= b;
    }
    ifft_in_place(&mut hf);
    let s = 1.0 / m as f64;
    hf.iter_mut().for_each(|z| *z *= s);
    hf
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexcore::linalg::ONE;

    fn cv(v: &[(f64, f64)]) -> CVec {
        CVec::new(v.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap()
    }

    fn close(a: &CVec, b: &CVec, tol: f64) -> bool {
        a.sub(b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn impulse_transforms_to_flat() {
        let out = dft(&CVec::basis(4, 0));
        assert!(close(&out, &cv(&[(0.5, 0.0); 4]), 1e-15));
    }

    #[test]
    fn constant_transforms_to_impulse() {
        let out = dft(&cv(&[(1.0, 0.0); 4]));
        assert!(close(&out, &cv(&[(2.0, 0.0), (0.0, 0.0), (0.0, 0.0), (0.0, 0.0)]), 1e-15));
    }

    #[test]
    fn identity_and_shift_filters() {
        let v = cv(&[(1.0, 2.0), (3.0, -1.0), (0.5, 0.0), (-2.0, 4.0), (0.0, 1.0)]);
        assert!(close(&circ_conv(&CVec::basis(5, 0), &v).unwrap(), &v, 1e-15));
        let shifted = circ_conv(&CVec::basis(5, 1), &v).unwrap();
        for j in 0..5 {
            assert_eq!(shifted[j], v[(j + 4) % 5]);
        }
    }

    #[test]
    fn length_one_is_scalar_product() {
        let h = cv(&[(2.0, 1.0)]);
        let v = cv(&[(0.0, 3.0)]);
        assert_eq!(circ_conv(&h, &v).unwrap()[0], C64::new(2.0, 1.0) * C64::new(0.0, 3.0));
        assert_eq!(dft(&CVec::basis(1, 0))[0], ONE);
    }

    #[test]
    fn mismatched_lengths_rejected() {
        assert!(circ_conv(&CVec::zeros(3), &CVec::zeros(4)).is_err());
    }
}
