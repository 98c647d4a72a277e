//! Security certificates.
//!
//! A plaintext set cannot retrieve the key when it cannot do phase
//! retrieval, and it cannot do phase retrieval when some non-zero Hermitian
//! `H` of rank at most two satisfies `x_k^* H x_k = 0` for every `k`. Two
//! constructive families of such `H` are implemented here:
//!
//! * all plaintexts 1-sparse: every zero-diagonal Hermitian matrix works;
//! * an index pair `(i, j)` that no plaintext support contains jointly:
//!   `H = e_i e_jᵀ + e_j e_iᵀ` works.
//!
//! The second family exists whenever `M·s(s−1) < n(n−1)` by counting.
//! Independently, no set with `M ≤ 4n − 3 − 2 log₂(n−1)` does phase retrieval.
//!
//! The module also hosts the moment test showing that Gaussian filters hide
//! row phases of the key in the Fourier domain.

use std::collections::BTreeSet;
use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::complexcore::fourier::circ_conv_slices;
use crate::complexcore::{dft, idft, CMat, CVec, Rng, C64, ONE, ZERO};
use crate::error::{arg_err, dim_err, Result};
use crate::scheme::{Key, SparseVector};

/// `4n − 3 − 2 log₂(n − 1)`: at or below this many measurements no vector
/// set in `C^n` does phase retrieval.
pub fn phase_retrieval_bound(n: usize) -> f64 {
    if n < 2 {
        return f64::NEG_INFINITY;
    }
    4.0 * n as f64 - 3.0 - 2.0 * ((n - 1) as f64).log2()
}

/// `max(n(n−1)/(s(s−1)), 4n − 3 − 2 log₂(n−1))` for `s ≥ 2`.
pub fn retrieval_bound(n: usize, s: usize) -> Result<f64> {
    if s < 2 {
        return arg_err("retrieval bound requires s >= 2 (s = 1 is never retrievable)");
    }
    if n < 2 {
        return arg_err("retrieval bound requires n >= 2");
    }
    let pairs = (n * (n - 1)) as f64 / (s * (s - 1)) as f64;
    Ok(pairs.max(phase_retrieval_bound(n)))
}

/// Symmetric set of off-diagonal index pairs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairSet {
    n: usize,
    pairs: BTreeSet<(usize, usize)>,
}

impl PairSet {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.contains(&(i, j))
    }

    /// Pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn first(&self) -> Option<(usize, usize)> {
        self.pairs.first().copied()
    }

    pub fn is_symmetric(&self) -> bool {
        self.pairs.iter().all(|&(i, j)| self.pairs.contains(&(j, i)))
    }
}

/// Off-diagonal pairs `(i, j)` not jointly contained in any plaintext
/// support.
pub fn build_e_set(n: usize, plaintexts: &[SparseVector]) -> Result<PairSet> {
    if let Some(k) = plaintexts.iter().position(|x| x.len() != n) {
        return dim_err(format!("plaintext {k} does not have length {n}"));
    }
    let mut covered = vec![false; n * n];
    for x in plaintexts {
        let supp = x.support();
        for &i in supp {
            for &j in supp {
                covered[i * n + j] = true;
            }
        }
    }
    let pairs = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j && !covered[i * n + j])
        .collect();
    Ok(PairSet { n, pairs })
}

/// A Hermitian matrix of rank at most two orthogonal to every `x_k x_k^*`.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianCertificate {
    h: CMat,
}

impl HermitianCertificate {
    /// `e_i e_jᵀ + e_j e_iᵀ`.
    pub fn pair(n: usize, i: usize, j: usize) -> Result<Self> {
        if i == j || i >= n || j >= n {
            return arg_err(format!("invalid certificate pair ({i}, {j}) for n = {n}"));
        }
        let mut h = CMat::zeros(n, n);
        h[(i, j)] = ONE;
        h[(j, i)] = ONE;
        Ok(Self { h })
    }

    /// Wraps an arbitrary square matrix; [`validate_certificate`] checks the
    /// invariants.
    pub fn from_matrix(h: CMat) -> Result<Self> {
        if h.rows() != h.cols() {
            return dim_err("certificate must be square");
        }
        Ok(Self { h })
    }

    pub fn matrix(&self) -> &CMat {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.rows()
    }

    /// The index pair, when the certificate is a pair construction.
    pub fn as_pair(&self) -> Option<(usize, usize)> {
        let nz: Vec<(usize, usize)> = (0..self.n())
            .flat_map(|i| (0..self.n()).map(move |j| (i, j)))
            .filter(|&e| self.h[e] != ZERO)
            .collect();
        match nz[..] {
            [(i, j), (k, l)] if i == l && j == k && self.h[(i, j)] == ONE && self.h[(k, l)] == ONE => {
                Some((i, j))
            }
            _ => None,
        }
    }
}

/// First certificate from the constructive families, if any applies.
pub fn noninjectivity_certificate(n: usize, plaintexts: &[SparseVector]) -> Result<Option<HermitianCertificate>> {
    if n < 2 {
        return Ok(None);
    }
    if plaintexts.iter().all(|x| x.nnz() == 1) {
        if let Some(k) = plaintexts.iter().position(|x| x.len() != n) {
            return dim_err(format!("plaintext {k} does not have length {n}"));
        }
        return HermitianCertificate::pair(n, 0, 1).map(Some);
    }
    match build_e_set(n, plaintexts)?.first() {
        Some((i, j)) => HermitianCertificate::pair(n, i, j).map(Some),
        None => Ok(None),
    }
}

/// `x^* H x`, summed over the support of `x`.
fn quadratic_form(h: &CMat, x: &SparseVector) -> C64 {
    let (supp, vals) = (x.support(), x.values());
    let mut acc = ZERO;
    for (&i, xi) in supp.iter().zip(vals) {
        for (&j, xj) in supp.iter().zip(vals) {
            acc += xi.conj() * h[(i, j)] * xj;
        }
    }
    acc
}

/// Eigenvalue magnitudes of a Hermitian matrix, descending.
fn hermitian_spectrum(h: &CMat) -> Vec<f64> {
    let n = h.rows();
    let dm = DMatrix::from_fn(n, n, |i, j| {
        // symmetrize so the solver sees an exactly Hermitian input
        0.5 * (h[(i, j)] + h[(j, i)].conj())
    });
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().map(|v| v.abs()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn validate_certificate(cert: &HermitianCertificate, plaintexts: &[SparseVector]) -> bool {
    let h = cert.matrix();
    let n = h.rows();
    if plaintexts.iter().any(|x| x.len() != n) {
        return false;
    }
    let norm = h.frobenius();
    if norm == 0.0 {
        return false;
    }
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| (h[(i, j)] - h[(j, i)].conj()).norm())
        .fold(0.0, f64::max);
    if asym > 1e-12 * norm {
        return false;
    }
    let spectrum = hermitian_spectrum(h);
    if spectrum.get(2).is_some_and(|&third| third >= 1e-10 * norm) {
        return false;
    }
    let max_x = plaintexts.iter().map(SparseVector::norm_sqr).fold(0.0, f64::max);
    let worst = plaintexts.iter().map(|x| quadratic_form(h, x).norm()).fold(0.0, f64::max);
    plaintexts.is_empty() || worst < 1e-10 * norm * max_x
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    ProvablyNonRetrievable,
    NoCertificateFound,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ProvablyNonRetrievable => "provably non-retrievable",
            Verdict::NoCertificateFound => "no certificate found",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CertReport {
    pub n: usize,
    pub s: usize,
    pub count: usize,
    /// `retrieval_bound(n, s)`; absent for `s < 2`.
    pub retrieval_bound: Option<f64>,
    pub phase_retrieval_bound: f64,
    pub below_phase_retrieval_bound: bool,
    pub all_one_sparse: bool,
    pub e_set_size: usize,
    pub certificate_pair: Option<(usize, usize)>,
    pub certificate_valid: bool,
    pub verdict: Verdict,
}

impl CertReport {
    pub fn non_retrievable(&self) -> bool {
        self.verdict == Verdict::ProvablyNonRetrievable
    }
}

impl fmt::Display for CertReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n)?;
        writeln!(f, "s {}", self.s)?;
        writeln!(f, "M {}", self.count)?;
        match self.retrieval_bound {
            Some(b) => writeln!(f, "retrieval_bound {b}")?,
            None => writeln!(f, "retrieval_bound none")?,
        }
        writeln!(f, "phase_retrieval_bound {}", self.phase_retrieval_bound)?;
        writeln!(f, "below_phase_retrieval_bound {}", self.below_phase_retrieval_bound)?;
        writeln!(f, "all_one_sparse {}", self.all_one_sparse)?;
        writeln!(f, "e_set_size {}", self.e_set_size)?;
        match self.certificate_pair {
            Some((i, j)) => writeln!(f, "certificate pair {i} {j}")?,
            None => writeln!(f, "certificate none")?,
        }
        writeln!(f, "certificate_valid {}", self.certificate_valid)?;
        writeln!(f, "verdict {}", self.verdict)
    }
}

pub fn certify_instance(plaintexts: &[SparseVector], n: usize, s: usize) -> Result<CertReport> {
    let count = plaintexts.len();
    let e_set = build_e_set(n, plaintexts)?;
    let cert = noninjectivity_certificate(n, plaintexts)?;
    let certificate_valid = cert.as_ref().is_some_and(|c| validate_certificate(c, plaintexts));
    let pr_bound = phase_retrieval_bound(n);
    let below = n >= 2 && (count as f64) <= pr_bound;
    let verdict = if certificate_valid || below {
        Verdict::ProvablyNonRetrievable
    } else {
        Verdict::NoCertificateFound
    };
    Ok(CertReport {
        n,
        s,
        count,
        retrieval_bound: retrieval_bound(n, s).ok(),
        phase_retrieval_bound: pr_bound,
        below_phase_retrieval_bound: below,
        all_one_sparse: count > 0 && plaintexts.iter().all(|x| x.nnz() == 1),
        e_set_size: e_set.len(),
        certificate_pair: cert.as_ref().and_then(HermitianCertificate::as_pair),
        certificate_valid,
        verdict,
    })
}

/// `F⁻¹ diag(phases) F Q` with `F` the unitary DFT applied column-wise.
pub fn fourier_row_phase_key(key: &Key, phases: &CVec) -> Result<Key> {
    let q = key.matrix();
    if phases.len() != q.rows() {
        return dim_err(format!("{} phases for a key with {} rows", phases.len(), q.rows()));
    }
    if let Some(i) = phases.iter().position(|p| (p.norm() - 1.0).abs() > 1e-12) {
        return arg_err(format!("phase {i} is not a unit scalar"));
    }
    let cols: Vec<CVec> = (0..q.cols())
        .map(|l| {
            let mut f = dft(&q.column(l));
            for (z, p) in f.as_mut_slice().iter_mut().zip(phases.iter()) {
                *z *= p;
            }
            idft(&f)
        })
        .collect();
    Ok(Key::new(CMat::from_columns(&cols)?))
}

#[derive(Clone, Debug)]
pub struct IndistReport {
    pub samples: usize,
    /// Max entrywise gap between the empirical means (2m real coordinates).
    pub mean_gap: f64,
    /// Max entrywise gap between the empirical covariance matrices.
    pub cov_gap: f64,
    /// `6/√N`.
    pub threshold: f64,
    pub pass: bool,
}

impl IndistReport {
    pub fn discrepancy(&self) -> f64 {
        self.mean_gap.max(self.cov_gap)
    }
}

impl fmt::Display for IndistReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "samples {}", self.samples)?;
        writeln!(f, "mean_gap {}", self.mean_gap)?;
        writeln!(f, "cov_gap {}", self.cov_gap)?;
        writeln!(f, "threshold {}", self.threshold)?;
        writeln!(f, "result {}", if self.pass { "indistinguishable" } else { "distinguishable" })
    }
}

const CHUNK: usize = 4096;

/// First and second raw moments of the real coordinates of `scale·(h ⊛ v)`
/// over `count` dense Gaussian filters.
fn raw_moments(v: &[C64], scale: f64, count: usize, rng: &Rng) -> (Vec<f64>, Vec<f64>) {
    let m = v.len();
    let d = 2 * m;
    let chunks = count.div_ceil(CHUNK);
    let partial: Vec<(Vec<f64>, Vec<f64>)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut r = rng.child(c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            let mut s1 = vec![0.0; d];
            let mut s2 = vec![0.0; d * d];
            let mut coords = vec![0.0; d];
            for _ in 0..len {
                let h: Vec<C64> = (0..m).map(|_| r.complex_gaussian()).collect();
                let y = circ_conv_slices(&h, v);
                for (j, z) in y.iter().enumerate() {
                    coords[j] = z.re * scale;
                    coords[m + j] = z.im * scale;
                }
                for a in 0..d {
                    s1[a] += coords[a];
                    for b in 0..d {
                        s2[a * d + b] += coords[a] * coords[b];
                    }
                }
            }
            (s1, s2)
        })
        .collect();
    let mut s1 = vec![0.0; d];
    let mut s2 = vec![0.0; d * d];
    for (a, b) in partial {
        s1.iter_mut().zip(a).for_each(|(x, y)| *x += y);
        s2.iter_mut().zip(b).for_each(|(x, y)| *x += y);
    }
    let inv = 1.0 / count as f64;
    s1.iter_mut().for_each(|x| *x *= inv);
    s2.iter_mut().for_each(|x| *x *= inv);
    (s1, s2)
}

fn covariance(mean: &[f64], second: &[f64]) -> Vec<f64> {
    let d = mean.len();
    (0..d * d).map(|k| second[k] - mean[k / d] * mean[k % d]).collect()
}

/// Moment comparison of cyphertexts under two keys with dense Gaussian
/// filters. Both samples are normalized by `‖Q_ref x‖` so entries have unit
/// variance under the reference key.
pub fn compare_cyphertext_laws(
    reference: &Key,
    other: &Key,
    x: &SparseVector,
    samples: usize,
    rng: &mut Rng,
) -> Result<IndistReport> {
    if reference.matrix().rows() != other.matrix().rows() || reference.matrix().cols() != other.matrix().cols() {
        return dim_err("keys differ in shape");
    }
    if x.len() != reference.n() {
        return dim_err("plaintext length does not match key");
    }
    if samples == 0 {
        return arg_err("sample count must be positive");
    }
    let v_ref = reference.apply(x);
    let v_other = other.apply(x);
    let scale = 1.0 / v_ref.norm();
    let base = Rng::new(rng.next_u64());
    let (m1, s1) = raw_moments(v_ref.as_slice(), scale, samples, &base.child(0));
    let (m2, s2) = raw_moments(v_other.as_slice(), scale, samples, &base.child(1));
    let mean_gap = m1.iter().zip(&m2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let c1 = covariance(&m1, &s1);
    let c2 = covariance(&m2, &s2);
    let cov_gap = c1.iter().zip(&c2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let threshold = 6.0 / (samples as f64).sqrt();
    Ok(IndistReport { samples, mean_gap, cov_gap, threshold, pass: mean_gap.max(cov_gap) <= threshold })
}

/// Checks that cyphertexts under `Q` and under its Fourier row-phase
/// modification have the same law for dense Gaussian filters.
pub fn gaussian_indistinguishability_test(
    key: &Key,
    x: &SparseVector,
    phases: &CVec,
    samples: usize,
    rng: &mut Rng,
) -> Result<IndistReport> {
    let modified = fourier_row_phase_key(key, phases)?;
    compare_cyphertext_laws(key, &modified, x, samples, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheme::{keygen, sample_plaintext};

    fn sv(n: usize, supp: &[usize]) -> SparseVector {
        SparseVector::new(n, supp.to_vec(), supp.iter().map(|&i| C64::new(1.0 + i as f64, 0.5)).collect()).unwrap()
    }

    #[test]
    fn bound_arithmetic() {
        let b = retrieval_bound(100, 2).unwrap();
        assert_eq!(b, 4950.0);
        let b = retrieval_bound(100, 10).unwrap();
        assert!((b - (397.0 - 2.0 * 99f64.log2())).abs() < 1e-12);
        assert!((b - 383.74).abs() < 0.01);
        let b = retrieval_bound(50, 7).unwrap();
        assert!((b - 185.77).abs() < 0.01, "{b}");
        assert!(retrieval_bound(100, 1).is_err());
    }

    #[test]
    fn bound_branch_crossover_at_n100() {
        for s in 2..=5 {
            assert!(9900.0 / (s * (s - 1)) as f64 > phase_retrieval_bound(100), "s={s}");
        }
        for s in 6..=100 {
            assert!(9900.0 / (s * (s - 1)) as f64 <= phase_retrieval_bound(100), "s={s}");
        }
    }

    #[test]
    fn e_set_examples() {
        let e = build_e_set(3, &[sv(3, &[0, 1])]).unwrap();
        assert_eq!(e.iter().collect::<Vec<_>>(), vec![(0, 2), (1, 2), (2, 0), (2, 1)]);
        let spikes: Vec<_> = (0..5).map(|i| sv(5, &[i])).collect();
        assert_eq!(build_e_set(5, &spikes).unwrap().len(), 20);
        let cover: Vec<_> = [[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]].iter().map(|p| sv(4, p)).collect();
        assert!(build_e_set(4, &cover).unwrap().is_empty());
        assert!(noninjectivity_certificate(4, &cover).unwrap().is_none());
        assert!(build_e_set(4, &[sv(5, &[0])]).is_err());
    }

    #[test]
    fn one_sparse_certificate() {
        let spikes: Vec<_> = (0..5).map(|i| sv(5, &[i])).collect();
        let c = noninjectivity_certificate(5, &spikes).unwrap().unwrap();
        assert_eq!(c.as_pair(), Some((0, 1)));
        assert!(validate_certificate(&c, &spikes));
        for x in &spikes {
            assert_eq!(quadratic_form(c.matrix(), x), ZERO);
        }
    }

    #[test]
    fn counting_regime_yields_certificate() {
        let mut rng = Rng::new(1);
        let xs: Vec<_> = (0..5).map(|_| sample_plaintext(10, 3, &mut rng).unwrap()).collect();
        let c = noninjectivity_certificate(10, &xs).unwrap().expect("M s(s-1) < n(n-1)");
        assert!(validate_certificate(&c, &xs));
    }

    #[test]
    fn invalid_certificates_rejected() {
        let mut rng = Rng::new(2);
        let xs: Vec<_> = (0..3).map(|_| sample_plaintext(6, 2, &mut rng).unwrap()).collect();
        let id = HermitianCertificate::from_matrix(CMat::identity(6)).unwrap();
        assert!(!validate_certificate(&id, &xs));
        let x1 = xs[0].to_dense();
        let mut outer = CMat::zeros(6, 6);
        for i in 0..6 {
            for j in 0..6 {
                outer[(i, j)] = x1[i] * x1[j].conj();
            }
        }
        assert!(!validate_certificate(&HermitianCertificate::from_matrix(outer).unwrap(), &xs));
        let zero = HermitianCertificate::from_matrix(CMat::zeros(6, 6)).unwrap();
        assert!(!validate_certificate(&zero, &xs));
        let mut skew = CMat::zeros(6, 6);
        skew[(0, 1)] = ONE;
        assert!(!validate_certificate(&HermitianCertificate::from_matrix(skew).unwrap(), &[]));
    }

    #[test]
    fn certify_examples() {
        let mut rng = Rng::new(3);
        let spikes: Vec<_> = (0..2000).map(|_| sample_plaintext(100, 1, &mut rng).unwrap()).collect();
        let r = certify_instance(&spikes, 100, 1).unwrap();
        assert!(r.non_retrievable() && r.all_one_sparse && r.retrieval_bound.is_none());

        let xs: Vec<_> = (0..100).map(|_| sample_plaintext(100, 5, &mut rng).unwrap()).collect();
        let r = certify_instance(&xs, 100, 5).unwrap();
        assert!(r.non_retrievable() && r.below_phase_retrieval_bound && r.certificate_valid);

        let xs: Vec<_> = (0..500).map(|_| sample_plaintext(50, 10, &mut rng).unwrap()).collect();
        let r = certify_instance(&xs, 50, 10).unwrap();
        assert_eq!(r.verdict, Verdict::NoCertificateFound);
        assert!(r.to_string().contains("verdict no certificate found"));
    }

    #[test]
    fn trivial_phases_leave_key_unchanged() {
        let key = keygen(4, 8, &mut Rng::new(4)).unwrap();
        let same = fourier_row_phase_key(&key, &CVec::new(vec![ONE; 4]).unwrap()).unwrap();
        assert!(same.matrix().sub(key.matrix()).frobenius() < 1e-14);
        assert!(fourier_row_phase_key(&key, &CVec::new(vec![C64::new(2.0, 0.0); 4]).unwrap()).is_err());
        assert!(fourier_row_phase_key(&key, &CVec::new(vec![ONE; 3]).unwrap()).is_err());
    }

    #[test]
    fn row_phase_key_preserves_fourier_amplitudes() {
        let mut rng = Rng::new(5);
        let key = keygen(4, 8, &mut rng).unwrap();
        let phases = CVec::new((0..4).map(|_| rng.unit_phase()).collect()).unwrap();
        let modified = fourier_row_phase_key(&key, &phases).unwrap();
        let x = sample_plaintext(8, 3, &mut rng).unwrap();
        let a = dft(&key.apply(&x));
        let b = dft(&modified.apply(&x));
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((u.norm() - v.norm()).abs() < 1e-12);
        }
    }
}
