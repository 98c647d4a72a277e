//! Eavesdropper's known-plaintext key recovery.
//!
//! Eve knows plaintexts `x_k` and the images `Q x_k` only modulo a unit
//! scalar each. She fits a key by minimizing
//!
//! ```text
//! L(Q) = Σ_k min_{|θ_k|=1} ‖Q x_k − θ_k b_k‖²
//!      = Σ_k ‖Q x_k‖² + ‖b_k‖² − 2|⟨b_k, Q x_k⟩|
//! ```
//!
//! over the `2mn` real coordinates of `Q` with L-BFGS, and declares success
//! when the recovered key is within relative error 0.1 of the truth modulo
//! a global unit scalar.

pub mod lbfgs;

use std::io::{BufRead, Write};

use crate::complexcore::textfmt::{write_cvec, TextReader};
use crate::complexcore::{CMat, CVec, Rng, C64, ONE, ZERO};
use crate::error::{arg_err, dim_err, Error, Result};
use crate::scheme::{Key, SparseVector};

pub use lbfgs::{lbfgs_minimize, LbfgsOptions, LbfgsReport, Termination};

/// Relative error (mod unit scalar) below which key recovery counts as a
/// success.
pub const SUCCESS_THRESHOLD: f64 = 0.1;

/// A vector known only up to a global unit scalar.
#[derive(Clone, Debug)]
pub struct ProjectiveVector {
    rep: CVec,
}

impl ProjectiveVector {
    pub fn new(representative: CVec) -> Self {
        Self { rep: representative }
    }

    pub fn representative(&self) -> &CVec {
        &self.rep
    }

    pub fn len(&self) -> usize {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `min_{|θ|=1} ‖u − θ v‖`.
    pub fn distance(&self, other: &ProjectiveVector) -> f64 {
        let c = other.rep.inner(&self.rep).norm();
        (self.rep.norm_sqr() + other.rep.norm_sqr() - 2.0 * c).max(0.0).sqrt()
    }

    pub fn equivalent(&self, other: &ProjectiveVector, tol: f64) -> bool {
        self.distance(other) <= tol * self.rep.norm()
    }
}

/// Plaintexts and the matching projective observations of `Q x_k`.
#[derive(Clone, Debug)]
pub struct AttackInstance {
    n: usize,
    m: usize,
    plaintexts: Vec<SparseVector>,
    observations: Vec<ProjectiveVector>,
}

impl AttackInstance {
    pub fn new(
        n: usize,
        m: usize,
        plaintexts: Vec<SparseVector>,
        observations: Vec<ProjectiveVector>,
    ) -> Result<Self> {
        if plaintexts.len() != observations.len() {
            return dim_err(format!(
                "{} plaintexts but {} observations",
                plaintexts.len(),
                observations.len()
            ));
        }
        if let Some(k) = plaintexts.iter().position(|x| x.len() != n) {
            return dim_err(format!("plaintext {k} does not have length {n}"));
        }
        if let Some(k) = observations.iter().position(|b| b.len() != m) {
            return dim_err(format!("observation {k} does not have length {m}"));
        }
        Ok(Self { n, m, plaintexts, observations })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of plaintext/observation pairs `M`.
    pub fn len(&self) -> usize {
        self.plaintexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.plaintexts.is_empty()
    }

    pub fn plaintexts(&self) -> &[SparseVector] {
        &self.plaintexts
    }

    pub fn observations(&self) -> &[ProjectiveVector] {
        &self.observations
    }

    fn check_key_shape(&self, q: &CMat) -> Result<()> {
        if q.rows() != self.m || q.cols() != self.n {
            return dim_err(format!(
                "key is {}x{}, instance expects {}x{}",
                q.rows(),
                q.cols(),
                self.m,
                self.n
            ));
        }
        Ok(())
    }

    /// Writes the instance in the text format:
    /// `instance M n m`, then M `cvec n` plaintexts, then M `cvec m`
    /// observations.
    pub fn write<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "instance {} {} {}", self.len(), self.n, self.m)?;
        for x in &self.plaintexts {
            write_cvec(w, &x.to_dense())?;
        }
        for b in &self.observations {
            write_cvec(w, &b.rep)?;
        }
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self> {
        let mut reader = TextReader::new(r);
        let header = reader.next_line()?.unwrap_or_default();
        let dims: Vec<usize> = header.iter().skip(1).filter_map(|t| t.parse().ok()).collect();
        if header.first().map(String::as_str) != Some("instance") || dims.len() != 3 {
            return Err(Error::Parse {
                line: reader.line_no(),
                msg: "expected header `instance M n m`".into(),
            });
        }
        let (count, n, m) = (dims[0], dims[1], dims[2]);
        let mut plaintexts = Vec::with_capacity(count);
        for _ in 0..count {
            plaintexts.push(SparseVector::from_dense(&reader.read_cvec()?)?);
        }
        let mut observations = Vec::with_capacity(count);
        for _ in 0..count {
            observations.push(ProjectiveVector::new(reader.read_cvec()?));
        }
        Self::new(n, m, plaintexts, observations)
    }
}

/// Builds Eve's view: each `Q x_k` scrambled by an independent uniform unit
/// phase that is then forgotten.
pub fn make_instance(key: &Key, plaintexts: Vec<SparseVector>, rng: &mut Rng) -> Result<AttackInstance> {
    let observations = plaintexts
        .iter()
        .map(|x| {
            if x.len() != key.n() {
                return dim_err(format!("plaintext length {} but key has {} columns", x.len(), key.n()));
            }
            let phase = rng.unit_phase();
            Ok(ProjectiveVector::new(key.apply(x).scale(phase)))
        })
        .collect::<Result<Vec<_>>>()?;
    AttackInstance::new(key.n(), key.m(), plaintexts, observations)
}

/// Optimal per-term phase `θ* = c/|c|`, or 1 when `c = 0`.
fn optimal_phase(c: C64) -> C64 {
    let a = c.norm();
    if a == 0.0 {
        ONE
    } else {
        c / a
    }
}

/// Loss and (optionally) its real gradient, evaluated directly on the
/// stacked parameter vector `[Re Q (row-major), Im Q (row-major)]`.
fn loss_and_grad(params: &[f64], inst: &AttackInstance, grad: Option<&mut [f64]>) -> f64 {
    let (m, n) = (inst.m, inst.n);
    let mn = m * n;
    let (re, im) = params.split_at(mn);
    let mut grad = grad;
    if let Some(g) = grad.as_deref_mut() {
        g.iter_mut().for_each(|v| *v = 0.0);
    }
    let mut u = vec![ZERO; m];
    let mut total = 0.0;
    for (x, b) in inst.plaintexts.iter().zip(&inst.observations) {
        let b = b.rep.as_slice();
        for (i, ui) in u.iter_mut().enumerate() {
            let row = i * n;
            *ui = x.support().iter().zip(x.values()).fold(ZERO, |acc, (&l, v)| {
                acc + C64::new(re[row + l], im[row + l]) * v
            });
        }
        let c = b.iter().zip(&u).fold(ZERO, |acc, (bi, ui)| acc + bi.conj() * ui);
        let theta = optimal_phase(c);
        for (ui, bi) in u.iter_mut().zip(b) {
            *ui -= theta * bi;
        }
        total += u.iter().map(|r| r.norm_sqr()).sum::<f64>();
        if let Some(g) = grad.as_deref_mut() {
            // G += r x^*, real gradient is (2 Re G, 2 Im G)
            let (gre, gim) = g.split_at_mut(mn);
            for (i, ri) in u.iter().enumerate() {
                let row = i * n;
                for (&l, v) in x.support().iter().zip(x.values()) {
                    let e = ri * v.conj();
                    gre[row + l] += 2.0 * e.re;
                    gim[row + l] += 2.0 * e.im;
                }
            }
        }
    }
    total
}

fn pack(q: &CMat) -> Vec<f64> {
    let mut p: Vec<f64> = q.as_slice().iter().map(|z| z.re).collect();
    p.extend(q.as_slice().iter().map(|z| z.im));
    p
}

fn unpack(p: &[f64], m: usize, n: usize) -> CMat {
    let (re, im) = p.split_at(m * n);
    CMat::from_raw(m, n, re.iter().zip(im).map(|(&a, &b)| C64::new(a, b)).collect())
}

/// `L(Q)`, computed per term as `‖Q x_k − θ_k* b_k‖²`.
pub fn loss(q: &CMat, inst: &AttackInstance) -> Result<f64> {
    inst.check_key_shape(q)?;
    Ok(loss_and_grad(&pack(q), inst, None))
}

/// Danskin/Wirtinger gradient `G = Σ_k (Q x_k − θ_k* b_k) x_k^*`.
///
/// The real-parameter gradient is `(2 Re G, 2 Im G)`.
pub fn loss_gradient(q: &CMat, inst: &AttackInstance) -> Result<CMat> {
    inst.check_key_shape(q)?;
    let (m, n) = (inst.m, inst.n);
    let mut g = vec![0.0; 2 * m * n];
    loss_and_grad(&pack(q), inst, Some(&mut g));
    let half = unpack(&g, m, n);
    Ok(half.scale(C64::new(0.5, 0.0)))
}

/// Minimizes `L` from `init`, returning the optimizer report with the
/// minimizer unpacked.
pub fn minimize_loss(inst: &AttackInstance, init: &CMat, opts: &LbfgsOptions) -> Result<(CMat, LbfgsReport)> {
    inst.check_key_shape(init)?;
    let report = lbfgs_minimize(|p, g| loss_and_grad(p, inst, Some(g)), pack(init), opts);
    Ok((unpack(&report.x, inst.m, inst.n), report))
}

/// `min_{|θ|=1} ‖Q − θ Q_hat‖_F / ‖Q‖_F`. Magnitude is not modded out.
pub fn rel_error_mod_phase(q: &CMat, q_hat: &CMat) -> Result<f64> {
    if q.rows() != q_hat.rows() || q.cols() != q_hat.cols() {
        return dim_err("rel_error_mod_phase: shapes differ");
    }
    let norm = q.frobenius();
    if norm == 0.0 {
        return arg_err("rel_error_mod_phase: ground truth has zero norm");
    }
    let theta = optimal_phase(q_hat.inner(q));
    Ok(q.sub(&q_hat.scale(theta)).frobenius() / norm)
}

#[derive(Clone, Debug)]
pub struct RecoverOptions {
    pub restarts: usize,
    pub lbfgs: LbfgsOptions,
    /// A restart whose loss is below this multiple of `Σ‖b_k‖²` is treated
    /// as an exact fit and ends the restart loop.
    pub exact_fit: f64,
}

impl Default for RecoverOptions {
    fn default() -> Self {
        Self { restarts: 3, lbfgs: LbfgsOptions::default(), exact_fit: 1e-12 }
    }
}

#[derive(Clone, Debug)]
pub struct AttackResult {
    pub q_hat: CMat,
    pub final_loss: f64,
    /// Present when the ground truth was supplied.
    pub rel_error_mod_phase: Option<f64>,
    pub success: Option<bool>,
    pub restarts_used: usize,
    /// Optimizer iterations summed over restarts.
    pub iterations: usize,
    /// Termination reason of the restart that produced `q_hat`.
    pub termination: Termination,
}

/// Best-of-`restarts` L-BFGS from independent CN(0,1) initializations.
pub fn recover_key(
    inst: &AttackInstance,
    opts: &RecoverOptions,
    rng: &mut Rng,
    truth: Option<&Key>,
) -> Result<AttackResult> {
    if opts.restarts == 0 {
        return arg_err("restarts must be at least 1");
    }
    if let Some(t) = truth {
        inst.check_key_shape(t.matrix())?;
    }
    let (m, n) = (inst.m, inst.n);
    let scale: f64 = inst.observations.iter().map(|b| b.rep.norm_sqr()).sum();
    let mut best: Option<(CMat, LbfgsReport)> = None;
    let mut iterations = 0;
    let mut restarts_used = 0;
    for _ in 0..opts.restarts {
        restarts_used += 1;
        let init = crate::scheme::keygen(m, n, rng)?.into_matrix();
        let (q_hat, report) = minimize_loss(inst, &init, &opts.lbfgs)?;
        iterations += report.iterations;
        let exact = report.value <= opts.exact_fit * scale;
        if best.as_ref().is_none_or(|(_, b)| report.value < b.value) {
            best = Some((q_hat, report));
        }
        if exact {
            break;
        }
    }
    let (q_hat, report) = best.expect("at least one restart");
    let rel = truth.map(|t| rel_error_mod_phase(t.matrix(), &q_hat)).transpose()?;
    Ok(AttackResult {
        final_loss: report.value,
        rel_error_mod_phase: rel,
        success: rel.map(|e| e < SUCCESS_THRESHOLD),
        restarts_used,
        iterations,
        termination: report.termination,
        q_hat,
    })
}
