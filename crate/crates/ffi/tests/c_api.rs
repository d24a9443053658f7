use std::ffi::CStr;
use std::ptr;

use skewmat_ffi::*;

fn matrix(rows: usize, cols: usize, values: &[f64]) -> *mut SkmMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { skm_matrix_new(rows, cols, values.as_ptr(), &mut m) }, SkmStatus::Ok);
    m
}

fn last_error() -> String {
    let p = skm_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn multiply_and_norm() {
    let a = matrix(2, 2, &[1.0, -2.0, 3.0, -4.0]);
    let id = matrix(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let mut c = ptr::null_mut();
    unsafe {
        assert_eq!(skm_matrix_multiply(a, id, &mut c), SkmStatus::Ok);
        let mut x = 0.0;
        assert_eq!(skm_matrix_get(c, 1, 0, &mut x), SkmStatus::Ok);
        assert_eq!(x, 3.0);
        let (mut r, mut k) = (0, 0);
        assert_eq!(skm_matrix_shape(c, &mut r, &mut k), SkmStatus::Ok);
        assert_eq!((r, k), (2, 2));
        assert_eq!(skm_matrix_norm(c, 2, 1, &mut x), SkmStatus::Ok);
        assert!((x - 14f64.sqrt()).abs() < 1e-12);
        assert_eq!(skm_matrix_get(c, 2, 0, &mut x), SkmStatus::OutOfRange);
        skm_matrix_free(a);
        skm_matrix_free(id);
        skm_matrix_free(c);
    }
}

#[test]
fn summary_round_trip() {
    let id = matrix(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    let mut s = ptr::null_mut();
    unsafe {
        assert_eq!(skm_summary_compute(id, id, 3, &mut s), SkmStatus::Ok);
        assert_eq!(skm_summary_len(s), 3);
        let (mut i, mut j, mut w) = (0, 0, 0.0);
        assert_eq!(skm_summary_entry(s, 2, &mut i, &mut j, &mut w), SkmStatus::Ok);
        assert_eq!((i, j, w), (2, 2, 1.0));
        assert_eq!(skm_summary_entry(s, 3, &mut i, &mut j, &mut w), SkmStatus::OutOfRange);
        let mut est = -1.0;
        assert_eq!(skm_summary_estimate(s, 0, 1, &mut est), SkmStatus::Ok);
        assert_eq!(est, 0.0);
        skm_summary_free(s);
        skm_matrix_free(id);
    }
}

#[test]
fn negative_input_is_rejected_with_message() {
    let a = matrix(1, 1, &[-1.0]);
    let mut s = ptr::null_mut();
    let status = unsafe { skm_summary_compute(a, a, 1, &mut s) };
    assert_eq!(status, SkmStatus::NegativeValue);
    assert!(s.is_null());
    assert!(last_error().contains("negative"));
    unsafe { skm_matrix_free(a) };
}

#[test]
fn null_pointers_and_bad_shapes() {
    let mut m = ptr::null_mut();
    unsafe {
        assert_eq!(skm_matrix_new(2, 2, ptr::null(), &mut m), SkmStatus::NullPointer);
        assert_eq!(skm_matrix_new(0, 0, ptr::null(), &mut m), SkmStatus::Ok);
        skm_matrix_free(m);
        let a = matrix(2, 3, &[0.0; 6]);
        let mut c = ptr::null_mut();
        assert_eq!(skm_matrix_multiply(a, a, &mut c), SkmStatus::DimensionMismatch);
        assert_eq!(skm_matrix_multiply(a, ptr::null(), &mut c), SkmStatus::NullPointer);
        let nan = [f64::NAN];
        assert_eq!(skm_matrix_new(1, 1, nan.as_ptr(), &mut m), SkmStatus::NonFinite);
        skm_matrix_free(a);
        skm_matrix_free(ptr::null_mut());
        assert_eq!(skm_summary_len(ptr::null()), 0);
    }
}

#[test]
fn recovery_through_the_boundary() {
    // C = A B has nonzeros (0, 3) = 5 and (2, 1) = -7
    let mut a = [0.0; 16];
    let mut b = [0.0; 16];
    a[0] = 1.0; // A[0][0]
    b[3] = 5.0; // B[0][3]
    a[2 * 4 + 1] = -1.0; // A[2][1]
    b[4 + 1] = 7.0; // B[1][1]
    let (a, b) = (matrix(4, 4, &a), matrix(4, 4, &b));
    let mut opts = skm_group_options_default();
    for conv in [SkmConvolution::Naive, SkmConvolution::Fft] {
        opts.convolution = conv;
        let mut list = ptr::null_mut();
        unsafe {
            assert_eq!(skm_recover_heavy(a, b, 2, &opts, &mut list), SkmStatus::Ok);
            assert_eq!(skm_entry_list_len(list), 2);
            let mut e = SkmEntry {
                row: 0,
                col: 0,
                weight: 0.0,
                prime: 0,
                residue: 0,
            };
            assert_eq!(skm_entry_list_get(list, 0, &mut e), SkmStatus::Ok);
            assert_eq!((e.row, e.col, e.weight), (2, 1, -7.0));
            assert_eq!((e.row * 4 + e.col) % e.prime, e.residue);
            assert_eq!(skm_entry_list_get(list, 1, &mut e), SkmStatus::Ok);
            assert_eq!((e.row, e.col, e.weight), (0, 3, 5.0));
            assert_eq!(skm_entry_list_get(list, 2, &mut e), SkmStatus::OutOfRange);
            skm_entry_list_free(list);
        }
    }
    let mut list = ptr::null_mut();
    unsafe {
        assert_eq!(skm_multi_pass_topk(a, b, 1, 2, 2.0, ptr::null(), &mut list), SkmStatus::Ok);
        assert_eq!(skm_entry_list_len(list), 2);
        skm_entry_list_free(list);
        assert_eq!(skm_multi_pass_topk(a, b, 1, 0, 2.0, ptr::null(), &mut list), SkmStatus::InvalidParameter);
        skm_matrix_free(a);
        skm_matrix_free(b);
    }
}
