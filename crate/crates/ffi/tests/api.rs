use std::ffi::CStr;
use std::ptr;

use bcs_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as std::ffi::c_char; 512];
    let n = unsafe { bcs_last_error(buf.as_mut_ptr(), buf.len()) };
    assert!(n > 0);
    unsafe { CStr::from_ptr(buf.as_ptr()) }.to_string_lossy().into_owned()
}

fn new_key(m: usize, n: usize, seed: u64) -> *mut BcsKey {
    let mut key = ptr::null_mut();
    assert_eq!(unsafe { bcs_key_generate(m, n, seed, &mut key) }, BcsStatus::Ok);
    key
}

#[test]
fn key_round_trips_through_raw_data() {
    let key = new_key(3, 5, 1);
    let mut data = vec![0.0; 30];
    unsafe {
        assert_eq!(bcs_key_copy_data(key, data.as_mut_ptr(), data.len()), BcsStatus::Ok);
        assert_eq!(bcs_key_copy_data(key, data.as_mut_ptr(), 29), BcsStatus::Dimension);
        let mut copy = ptr::null_mut();
        assert_eq!(bcs_key_from_data(3, 5, data.as_ptr(), &mut copy), BcsStatus::Ok);
        let mut again = vec![0.0; 30];
        bcs_key_copy_data(copy, again.as_mut_ptr(), 30);
        assert_eq!(data, again);
        assert_eq!((bcs_key_rows(copy), bcs_key_cols(copy)), (3, 5));
        bcs_key_free(copy);
        bcs_key_free(key);
        assert_eq!(bcs_key_rows(ptr::null()), 0);
    }
}

#[test]
fn non_finite_key_rejected() {
    let mut data = vec![0.5; 8];
    data[3] = f64::NAN;
    let mut key = ptr::null_mut();
    assert_eq!(unsafe { bcs_key_from_data(2, 2, data.as_ptr(), &mut key) }, BcsStatus::NonFinite);
    assert!(key.is_null());
}

#[test]
fn encrypt_then_decrypt() {
    let (m, n) = (64, 30);
    let key = new_key(m, n, 2);
    let mut x = vec![0.0; 2 * n];
    x[2 * 4] = 1.5;
    x[2 * 20 + 1] = 0.7;
    let mut y = vec![0.0; 2 * m];
    let (mut h, mut xh) = (vec![0.0; 2 * m], vec![0.0; 2 * n]);
    let mut info = BcsDecryptInfo::default();
    unsafe {
        assert_eq!(bcs_encrypt(key, x.as_ptr(), n, BcsFilterKind::Sparse, 2, 3, y.as_mut_ptr(), m), BcsStatus::Ok);
        let st = bcs_decrypt(key, y.as_ptr(), m, 2, 2, 200, h.as_mut_ptr(), xh.as_mut_ptr(), &mut info);
        assert_eq!(st, BcsStatus::Ok);
        bcs_key_free(key);
    }
    assert!(info.converged);
    assert!(info.residual < 1e-8);
    let support: Vec<usize> = (0..n).filter(|&l| xh[2 * l].hypot(xh[2 * l + 1]) > 1e-8).collect();
    assert_eq!(support, vec![4, 20]);
}

#[test]
fn errors_carry_status_and_message() {
    let key = new_key(4, 6, 3);
    let x = vec![1.0; 12];
    let mut y = vec![0.0; 8];
    unsafe {
        assert_eq!(bcs_encrypt(key, x.as_ptr(), 6, BcsFilterKind::Sparse, 9, 0, y.as_mut_ptr(), 4), BcsStatus::InvalidArgument);
        assert!(last_error().contains("invalid argument"));
        assert_eq!(bcs_encrypt(key, ptr::null(), 6, BcsFilterKind::Dense, 0, 0, y.as_mut_ptr(), 4), BcsStatus::NullPointer);
        assert_eq!(last_error(), "x is null");
        assert_eq!(bcs_encrypt(ptr::null(), x.as_ptr(), 6, BcsFilterKind::Dense, 0, 0, y.as_mut_ptr(), 4), BcsStatus::NullPointer);
        let msg = CStr::from_ptr(bcs_status_message(BcsStatus::Dimension));
        assert_eq!(msg.to_str().unwrap(), "dimension mismatch");
        bcs_key_free(key);
    }
}

#[test]
fn certify_and_bounds() {
    // two 1-sparse plaintexts in C^4
    let mut xs = vec![0.0; 16];
    xs[0] = 1.0;
    xs[8 + 2 * 2 + 1] = 1.0;
    let mut out = BcsCertSummary::default();
    let mut bound = 0.0;
    unsafe {
        assert_eq!(bcs_certify(xs.as_ptr(), 2, 4, 1, &mut out), BcsStatus::Ok);
        assert_eq!(bcs_retrieval_bound(50, 7, &mut bound), BcsStatus::Ok);
        assert_eq!(bcs_retrieval_bound(50, 7, ptr::null_mut()), BcsStatus::NullPointer);
    }
    assert!(out.non_retrievable && out.all_one_sparse && out.has_certificate && out.certificate_valid);
    assert_eq!((out.pair_i, out.pair_j), (0, 1));
    assert!((bound - 185.771).abs() < 1e-3);
}

#[test]
fn trial_is_deterministic() {
    let (mut a, mut b) = (BcsTrialRecord::default(), BcsTrialRecord::default());
    unsafe {
        assert_eq!(bcs_run_trial(12, 3, 40, 6, 9, 2, &mut a), BcsStatus::Ok);
        assert_eq!(bcs_run_trial(12, 3, 40, 6, 9, 2, &mut b), BcsStatus::Ok);
        assert_eq!(bcs_run_trial(12, 3, 40, 6, 9, 0, &mut b), BcsStatus::InvalidArgument);
    }
    assert_eq!(a.final_loss.to_bits(), b.final_loss.to_bits());
    assert_eq!(a.success, a.rel_error < 0.1);
}
