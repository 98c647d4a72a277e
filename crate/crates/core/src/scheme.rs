//! Sender side of the scheme: keys, filter laws, sparse plaintexts and
//! encryption `y = h ⊛ (Q x)`.

use std::fmt;
use std::str::FromStr;

use crate::complexcore::fourier::circ_conv_slices;
use crate::complexcore::{sample_complex_gaussian, CMat, CVec, Rng, C64, ZERO};
use crate::error::{arg_err, dim_err, Error, Result};

/// The shared secret `Q ∈ C^{m×n}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Key {
    q: CMat,
}

impl Key {
    pub fn new(q: CMat) -> Self {
        Self { q }
    }

    pub fn matrix(&self) -> &CMat {
        &self.q
    }

    pub fn into_matrix(self) -> CMat {
        self.q
    }

    /// Filter / cyphertext length.
    pub fn m(&self) -> usize {
        self.q.rows()
    }

    /// Plaintext length.
    pub fn n(&self) -> usize {
        self.q.cols()
    }

    pub fn apply(&self, x: &SparseVector) -> CVec {
        CVec::from_raw(self.q.matvec_sparse(x.support(), x.values()))
    }
}

/// I.i.d. CN(0,1) key.
pub fn keygen(m: usize, n: usize, rng: &mut Rng) -> Result<Key> {
    if m == 0 || n == 0 {
        return arg_err("keygen: m and n must be positive");
    }
    let data = (0..m * n).map(|_| rng.complex_gaussian()).collect();
    Ok(Key::new(CMat::from_raw(m, n, data)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FilterKind {
    DenseGaussian,
    /// Uniform random support of the given size filled with CN(0,1).
    SparseGaussian(usize),
    /// `e^{iφ} e_0`.
    UnitPhaseIdentity,
}

/// Public filter law. All variants are phase-symmetric.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FilterDistribution {
    kind: FilterKind,
    len: usize,
}

impl FilterDistribution {
    pub fn new(kind: FilterKind, len: usize) -> Result<Self> {
        if len == 0 {
            return arg_err("filter length must be positive");
        }
        if let FilterKind::SparseGaussian(sigma) = kind {
            if sigma == 0 || sigma > len {
                return arg_err(format!("filter sparsity {sigma} outside 1..={len}"));
            }
        }
        Ok(Self { kind, len })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample(&self, rng: &mut Rng) -> CVec {
        sample_filter(self, rng)
    }
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterKind::DenseGaussian => write!(f, "dense"),
            FilterKind::SparseGaussian(s) => write!(f, "sparse:{s}"),
            FilterKind::UnitPhaseIdentity => write!(f, "unitphase"),
        }
    }
}

/// Parses `dense`, `sparse:σ` or `unitphase`.
impl FromStr for FilterKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(FilterKind::DenseGaussian),
            "unitphase" => Ok(FilterKind::UnitPhaseIdentity),
            _ => match s.strip_prefix("sparse:").map(str::parse::<usize>) {
                Some(Ok(sigma)) => Ok(FilterKind::SparseGaussian(sigma)),
                _ => arg_err(format!("unknown filter distribution {s:?}")),
            },
        }
    }
}

pub fn sample_filter(d: &FilterDistribution, rng: &mut Rng) -> CVec {
    let m = d.len;
    match d.kind {
        FilterKind::DenseGaussian => sample_complex_gaussian(rng, m),
        FilterKind::SparseGaussian(sigma) => {
            let mut h = CVec::zeros(m);
            for i in rng.subset(m, sigma) {
                h[i] = nonzero_gaussian(rng);
            }
            h
        }
        FilterKind::UnitPhaseIdentity => {
            let mut h = CVec::zeros(m);
            h[0] = rng.unit_phase();
            h
        }
    }
}

fn nonzero_gaussian(rng: &mut Rng) -> C64 {
    loop {
        let z = rng.complex_gaussian();
        if z != ZERO {
            return z;
        }
    }
}

/// A length-`n` vector with an explicit sorted support of non-zero values.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseVector {
    len: usize,
    support: Vec<usize>,
    values: Vec<C64>,
}

impl SparseVector {
    pub fn new(len: usize, support: Vec<usize>, values: Vec<C64>) -> Result<Self> {
        if support.len() != values.len() {
            return dim_err("support and values differ in length");
        }
        if support.is_empty() {
            return arg_err("sparse vector must have at least one non-zero");
        }
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return arg_err("support must be strictly increasing");
        }
        if support.last().is_some_and(|&i| i >= len) {
            return arg_err(format!("support index out of range for length {len}"));
        }
        if let Some(k) = values.iter().position(|z| *z == ZERO) {
            return arg_err(format!("value at support position {k} is zero"));
        }
        if let Some(k) = values.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(k));
        }
        Ok(Self { len, support, values })
    }

    /// Support = indices of the non-zero entries.
    pub fn from_dense(v: &CVec) -> Result<Self> {
        let (support, values) = v
            .iter()
            .enumerate()
            .filter(|(_, z)| **z != ZERO)
            .map(|(i, z)| (i, *z))
            .unzip();
        Self::new(v.len(), support, values)
    }

    pub fn spike(len: usize, index: usize, value: C64) -> Result<Self> {
        Self::new(len, vec![index], vec![value])
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sparsity `s`.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn scale(&self, alpha: C64) -> Result<Self> {
        Self::new(self.len, self.support.clone(), self.values.iter().map(|v| v * alpha).collect())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn to_dense(&self) -> CVec {
        let mut v = CVec::zeros(self.len);
        for (&i, &z) in self.support.iter().zip(&self.values) {
            v[i] = z;
        }
        v
    }
}

/// Uniform `s`-subset support with CN(0,1) values (exact zeros resampled).
pub fn sample_plaintext(n: usize, s: usize, rng: &mut Rng) -> Result<SparseVector> {
    if s == 0 || s > n {
        return arg_err(format!("sparsity {s} outside 1..={n}"));
    }
    let support = rng.subset(n, s);
    let values = (0..s).map(|_| nonzero_gaussian(rng)).collect();
    Ok(SparseVector { len: n, support, values })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cyphertext(pub CVec);

impl Cyphertext {
    pub fn as_vec(&self) -> &CVec {
        &self.0
    }
}

/// Encrypts with a freshly sampled filter. The filter is returned for test
/// harnesses only; protocol-level callers drop it.
pub fn encrypt(
    key: &Key,
    x: &SparseVector,
    d: &FilterDistribution,
    rng: &mut Rng,
) -> Result<(Cyphertext, CVec)> {
    if d.len() != key.m() {
        return dim_err(format!("filter length {} but key has {} rows", d.len(), key.m()));
    }
    if x.len() != key.n() {
        return dim_err(format!("plaintext length {} but key has {} columns", x.len(), key.n()));
    }
    let h = d.sample(rng);
    let y = encrypt_with_filter(key, x, &h)?;
    Ok((y, h))
}

/// `y = h ⊛ (Q x)` for a given filter realization.
pub fn encrypt_with_filter(key: &Key, x: &SparseVector, h: &CVec) -> Result<Cyphertext> {
    if h.len() != key.m() || x.len() != key.n() {
        return dim_err("encrypt: filter or plaintext does not match key dimensions");
    }
    let qx = key.apply(x);
    Ok(Cyphertext(CVec::from_raw(circ_conv_slices(h.as_slice(), qx.as_slice()))))
}
