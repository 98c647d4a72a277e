//! C ABI over `bcs-core`.
//!
//! Conventions:
//! - every fallible call returns a [`BcsStatus`]; `BCS_STATUS_OK` is zero;
//! - complex arrays are interleaved `(re, im)` doubles, so a length-`k`
//!   vector occupies `2k` doubles; matrices are row-major;
//! - keys are opaque [`BcsKey`] handles released with [`bcs_key_free`];
//! - the message of the last failure on the calling thread is available
//!   through [`bcs_last_error`].
//!
//! Panics never cross the boundary; they surface as `BCS_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bcs_core::certs::{certify_instance, retrieval_bound, Verdict};
use bcs_core::complexcore::{CMat, CVec, Rng, C64};
use bcs_core::deconv::{hihtp_decrypt, BisparsePattern, HihtpOptions};
use bcs_core::harness::{run_trial, TrialConfig};
use bcs_core::scheme::{encrypt, keygen, Cyphertext, FilterDistribution, FilterKind, Key, SparseVector};
use bcs_core::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcsStatus {
    Ok = 0,
    NullPointer = 1,
    Dimension = 2,
    InvalidArgument = 3,
    NonFinite = 4,
    Parse = 5,
    Io = 6,
    Sentinel = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcsFilterKind {
    Dense = 0,
    /// Uses the `sigma` argument as the number of nonzero taps.
    Sparse = 1,
    UnitPhase = 2,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BcsDecryptInfo {
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BcsCertSummary {
    /// True when provably non-retrievable.
    pub non_retrievable: bool,
    pub all_one_sparse: bool,
    pub below_phase_retrieval_bound: bool,
    pub e_set_size: usize,
    pub has_certificate: bool,
    pub certificate_valid: bool,
    pub pair_i: usize,
    pub pair_j: usize,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BcsTrialRecord {
    pub final_loss: f64,
    pub rel_error: f64,
    pub success: bool,
    pub iterations: usize,
    pub wall_s: f64,
}

/// Opaque key handle.
pub struct BcsKey {
    key: Key,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> BcsStatus {
    match err {
        Error::Dimension(_) => BcsStatus::Dimension,
        Error::InvalidArgument(_) => BcsStatus::InvalidArgument,
        Error::NonFinite(_) => BcsStatus::NonFinite,
        Error::Parse { .. } | Error::Csv(_) => BcsStatus::Parse,
        Error::Io(_) => BcsStatus::Io,
        Error::Sentinel(_) => BcsStatus::Sentinel,
    }
}

/// Runs `f`, mapping errors and panics to a status and recording the message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> BcsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BcsStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            BcsStatus::Panic
        }
    }
}

struct Failure(BcsStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(BcsStatus::NullPointer, format!("{what} is null"))
}

unsafe fn complex_slice(ptr: *const f64, len: usize, what: &str) -> Result<Vec<C64>, Failure> {
    if ptr.is_null() {
        return Err(null(what));
    }
    let raw = std::slice::from_raw_parts(ptr, 2 * len);
    Ok(raw.chunks_exact(2).map(|p| C64::new(p[0], p[1])).collect())
}

unsafe fn write_complex(out: *mut f64, values: &[C64], what: &str) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    let raw = std::slice::from_raw_parts_mut(out, 2 * values.len());
    for (dst, z) in raw.chunks_exact_mut(2).zip(values) {
        dst[0] = z.re;
        dst[1] = z.im;
    }
    Ok(())
}

unsafe fn key_ref<'a>(key: *const BcsKey) -> Result<&'a Key, Failure> {
    key.as_ref().map(|k| &k.key).ok_or_else(|| null("key"))
}

fn dimension(msg: String) -> Failure {
    Failure(BcsStatus::Dimension, msg)
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn bcs_status_message(status: BcsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        BcsStatus::Ok => b"ok\0",
        BcsStatus::NullPointer => b"null pointer argument\0",
        BcsStatus::Dimension => b"dimension mismatch\0",
        BcsStatus::InvalidArgument => b"invalid argument\0",
        BcsStatus::NonFinite => b"non-finite value\0",
        BcsStatus::Parse => b"parse error\0",
        BcsStatus::Io => b"i/o error\0",
        BcsStatus::Sentinel => b"certified-cell sentinel tripped\0",
        BcsStatus::Panic => b"internal panic\0",
    };
    s.as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `cap`). Returns the full message length excluding the NUL;
/// 0 when no error was recorded.
///
/// # Safety
/// `buf` must be null or point to `cap` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn bcs_last_error(buf: *mut c_char, cap: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let Some(msg) = e.as_ref() else { return 0 };
        let bytes = msg.as_bytes();
        if !buf.is_null() && cap > 0 {
            let n = bytes.len().min(cap - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr().cast(), buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Samples an `m x n` Gaussian key.
///
/// # Safety
/// `out` must be a valid pointer to a `BcsKey*`.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_generate(m: usize, n: usize, seed: u64, out: *mut *mut BcsKey) -> BcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let key = keygen(m, n, &mut Rng::new(seed))?;
        *out = Box::into_raw(Box::new(BcsKey { key }));
        Ok(())
    })
}

/// Builds a key from `m * n` interleaved complex entries, row-major.
///
/// # Safety
/// `data` must point to `2 * m * n` doubles; `out` to a `BcsKey*`.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_from_data(
    m: usize,
    n: usize,
    data: *const f64,
    out: *mut *mut BcsKey,
) -> BcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let entries = complex_slice(data, m * n, "data")?;
        let key = Key::new(CMat::new(m, n, entries)?);
        *out = Box::into_raw(Box::new(BcsKey { key }));
        Ok(())
    })
}

/// # Safety
/// `key` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_rows(key: *const BcsKey) -> usize {
    key.as_ref().map_or(0, |k| k.key.m())
}

/// # Safety
/// `key` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_cols(key: *const BcsKey) -> usize {
    key.as_ref().map_or(0, |k| k.key.n())
}

/// Copies the key entries (row-major, interleaved) into `out`, which must
/// hold `2 * rows * cols` doubles; `len` is that capacity in doubles.
///
/// # Safety
/// `key` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_copy_data(key: *const BcsKey, out: *mut f64, len: usize) -> BcsStatus {
    guard(|| {
        let q = key_ref(key)?.matrix();
        let need = 2 * q.rows() * q.cols();
        if len < need {
            return Err(dimension(format!("output holds {len} doubles, need {need}")));
        }
        write_complex(out, q.as_slice(), "out")
    })
}

/// Releases a key. Null is ignored.
///
/// # Safety
/// `key` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bcs_key_free(key: *mut BcsKey) {
    if !key.is_null() {
        drop(Box::from_raw(key));
    }
}

/// `y = h * (Q x)` with a filter drawn from `kind`. `x` has `n` complex
/// entries, `y_out` receives `m`.
///
/// # Safety
/// Pointers must reference arrays of the stated complex lengths.
#[no_mangle]
pub unsafe extern "C" fn bcs_encrypt(
    key: *const BcsKey,
    x: *const f64,
    n: usize,
    kind: BcsFilterKind,
    sigma: usize,
    seed: u64,
    y_out: *mut f64,
    m: usize,
) -> BcsStatus {
    guard(|| {
        let key = key_ref(key)?;
        if n != key.n() || m != key.m() {
            return Err(dimension(format!("key is {}x{}, buffers are {m} and {n}", key.m(), key.n())));
        }
        let x = SparseVector::from_dense(&CVec::new(complex_slice(x, n, "x")?)?)?;
        let kind = match kind {
            BcsFilterKind::Dense => FilterKind::DenseGaussian,
            BcsFilterKind::Sparse => FilterKind::SparseGaussian(sigma),
            BcsFilterKind::UnitPhase => FilterKind::UnitPhaseIdentity,
        };
        let d = FilterDistribution::new(kind, m)?;
        let (y, _) = encrypt(key, &x, &d, &mut Rng::new(seed))?;
        write_complex(y_out, y.as_vec().as_slice(), "y_out")
    })
}

/// Blind deconvolution of `y` (length `m`). Writes `h_hat` (length `m`)
/// and `x_hat` (length `key cols`). A non-converged run still returns
/// `BCS_STATUS_OK`; check `info->converged`.
///
/// # Safety
/// Pointers must reference arrays of the stated complex lengths.
#[no_mangle]
pub unsafe extern "C" fn bcs_decrypt(
    key: *const BcsKey,
    y: *const f64,
    m: usize,
    sigma: usize,
    s: usize,
    max_iters: usize,
    h_out: *mut f64,
    x_out: *mut f64,
    info: *mut BcsDecryptInfo,
) -> BcsStatus {
    guard(|| {
        let key = key_ref(key)?;
        if info.is_null() {
            return Err(null("info"));
        }
        let y = Cyphertext(CVec::new(complex_slice(y, m, "y")?)?);
        let opts = HihtpOptions { max_iters, ..Default::default() };
        let r = hihtp_decrypt(&y, key, BisparsePattern::new(sigma, s)?, &opts)?;
        write_complex(h_out, r.h_hat.as_slice(), "h_out")?;
        write_complex(x_out, r.x_hat.as_slice(), "x_out")?;
        *info = BcsDecryptInfo { residual: r.residual, iterations: r.iterations, converged: r.converged };
        Ok(())
    })
}

/// `max(n(n-1)/(s(s-1)), 4n-3-2 log2(n-1))`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bcs_retrieval_bound(n: usize, s: usize, out: *mut f64) -> BcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = retrieval_bound(n, s)?;
        Ok(())
    })
}

/// Certificate report for `count` dense plaintexts of length `n`, stored
/// back to back (`2 * n * count` doubles).
///
/// # Safety
/// `plaintexts` must hold `2 * n * count` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn bcs_certify(
    plaintexts: *const f64,
    count: usize,
    n: usize,
    s: usize,
    out: *mut BcsCertSummary,
) -> BcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let flat = complex_slice(plaintexts, n * count, "plaintexts")?;
        let xs = flat
            .chunks_exact(n.max(1))
            .map(|c| SparseVector::from_dense(&CVec::new(c.to_vec())?))
            .collect::<bcs_core::Result<Vec<_>>>()?;
        let r = certify_instance(&xs, n, s)?;
        let (pair_i, pair_j) = r.certificate_pair.unwrap_or((0, 0));
        *out = BcsCertSummary {
            non_retrievable: r.verdict == Verdict::ProvablyNonRetrievable,
            all_one_sparse: r.all_one_sparse,
            below_phase_retrieval_bound: r.below_phase_retrieval_bound,
            e_set_size: r.e_set_size,
            has_certificate: r.certificate_pair.is_some(),
            certificate_valid: r.certificate_valid,
            pair_i,
            pair_j,
        };
        Ok(())
    })
}

/// One Monte-Carlo key-recovery trial, fully determined by `seed`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bcs_run_trial(
    n: usize,
    m: usize,
    count: usize,
    s: usize,
    seed: u64,
    restarts: usize,
    out: *mut BcsTrialRecord,
) -> BcsStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let mut cfg = TrialConfig::default();
        cfg.recover.restarts = restarts;
        let r = run_trial(n, m, count, s, 0, seed, &cfg)?;
        *out = BcsTrialRecord {
            final_loss: r.final_loss,
            rel_error: r.rel_error,
            success: r.success,
            iterations: r.iters,
            wall_s: r.wall_s,
        };
        Ok(())
    })
}
