//! Independent reference implementations used as test oracles. Everything
//! here is the textbook O(m²)-style formula, deliberately sharing no code
//! with the library kernels.
#![allow(dead_code)]

use std::f64::consts::PI;

use bcs_core::attack::{loss, AttackInstance};
use bcs_core::complexcore::{CMat, CVec, Rng, C64};

pub fn random_vec(rng: &mut Rng, len: usize) -> CVec {
    CVec::new((0..len).map(|_| rng.complex_gaussian()).collect()).unwrap()
}

pub fn random_mat(rng: &mut Rng, rows: usize, cols: usize) -> CMat {
    CMat::new(rows, cols, (0..rows * cols).map(|_| rng.complex_gaussian()).collect()).unwrap()
}

/// `(1/√m) Σ_k v_k e^{-2πi jk/m}`.
pub fn naive_dft(v: &[C64]) -> Vec<C64> {
    let m = v.len();
    let scale = 1.0 / (m as f64).sqrt();
    (0..m)
        .map(|j| {
            v.iter().enumerate().fold(C64::new(0.0, 0.0), |acc, (k, x)| {
                let ang = -2.0 * PI * ((j * k) % m) as f64 / m as f64;
                acc + x * C64::from_polar(1.0, ang)
            }) * scale
        })
        .collect()
}

/// `y_j = Σ_i h_i v_{(j−i) mod m}`.
pub fn direct_conv(h: &[C64], v: &[C64]) -> Vec<C64> {
    let m = h.len();
    (0..m)
        .map(|j| (0..m).fold(C64::new(0.0, 0.0), |acc, i| acc + h[i] * v[(j + m - i) % m]))
        .collect()
}

/// `A(X)_j = Σ_{i,l} X_{il} Q_{(j−i) mod m, l}`.
pub fn direct_lifted(q: &CMat, x: &CMat) -> Vec<C64> {
    let (m, n) = (q.rows(), q.cols());
    (0..m)
        .map(|j| {
            let mut acc = C64::new(0.0, 0.0);
            for i in 0..m {
                for l in 0..n {
                    acc += x[(i, l)] * q[((j + m - i) % m, l)];
                }
            }
            acc
        })
        .collect()
}

/// `A*(z)_{il} = Σ_j z_j conj(Q_{(j−i) mod m, l})`.
pub fn direct_adjoint(q: &CMat, z: &[C64]) -> Vec<C64> {
    let (m, n) = (q.rows(), q.cols());
    let mut out = vec![C64::new(0.0, 0.0); m * n];
    for i in 0..m {
        for l in 0..n {
            out[i * n + l] = (0..m).fold(C64::new(0.0, 0.0), |acc, j| acc + z[j] * q[((j + m - i) % m, l)].conj());
        }
    }
    out
}

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn max_abs(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm()).fold(0.0, f64::max)
}

/// Central finite difference of the attack loss with respect to the real
/// and imaginary part of entry `(i, l)`.
pub fn fd_loss_partials(q: &CMat, inst: &AttackInstance, i: usize, l: usize, h: f64) -> (f64, f64) {
    let eval = |delta: C64| {
        let mut p = q.clone();
        p.as_mut_slice()[i * q.cols() + l] += delta;
        loss(&p, inst).unwrap()
    };
    let re = (eval(C64::new(h, 0.0)) - eval(C64::new(-h, 0.0))) / (2.0 * h);
    let im = (eval(C64::new(0.0, h)) - eval(C64::new(0.0, -h))) / (2.0 * h);
    (re, im)
}

/// Smallest `|⟨b_k, Q x_k⟩|` over the instance; the loss is nonsmooth
/// where this vanishes.
pub fn min_correlation(q: &CMat, inst: &AttackInstance) -> f64 {
    inst.plaintexts()
        .iter()
        .zip(inst.observations())
        .map(|(x, b)| {
            let u = q.matvec(&x.to_dense()).unwrap();
            dot(b.representative().as_slice(), u.as_slice()).norm()
        })
        .fold(f64::INFINITY, f64::min)
}
