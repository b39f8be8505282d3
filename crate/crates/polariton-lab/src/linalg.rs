//! Thin wrappers over LAPACK routines not exposed by ndarray-linalg.

use ndarray::Array2;
use num_complex::Complex64 as C64;

extern "C" {
    fn openblas_set_num_threads(num: core::ffi::c_int);
    fn zgees_(
        jobvs: *const u8,
        sort: *const u8,
        select: *const core::ffi::c_void,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        sdim: *mut i32,
        w: *mut C64,
        vs: *mut C64,
        ldvs: *const i32,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        bwork: *mut i32,
        info: *mut i32,
    );
}

/// Name of the environment variable capping BLAS/LAPACK worker threads.
pub const THREAD_CAP_ENV: &str = "POLARITON_LAB_THREADS";

/// Cap the number of threads the linked BLAS/LAPACK uses.
pub fn set_blas_threads(n: usize) {
    unsafe { openblas_set_num_threads(n.max(1) as core::ffi::c_int) }
}

/// Apply the thread cap from `POLARITON_LAB_THREADS` if set. Returns the
/// applied cap, or an error naming the variable when its value is not a
/// positive integer.
pub fn apply_thread_cap_from_env() -> Result<Option<usize>, String> {
    let Ok(raw) = std::env::var(THREAD_CAP_ENV) else {
        return Ok(None);
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => {
            set_blas_threads(n);
            Ok(Some(n))
        }
        _ => Err(format!(
            "{THREAD_CAP_ENV} must be a positive integer, got `{raw}`"
        )),
    }
}

/// Complex Schur decomposition `a = q t q^H` with `t` upper triangular.
///
/// Returns `(q, t, eigenvalues)`; eigenvalues are the diagonal of `t` in
/// LAPACK order. Fails if the QR iteration does not converge.
pub fn schur(a: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>, Vec<C64>), String> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "schur: matrix must be square");
    let ni = n as i32;
    // LAPACK is column-major; feed the transpose and transpose the results back.
    let mut at: Vec<C64> = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            at.push(a[[i, j]]);
        }
    }
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut vs = vec![C64::new(0.0, 0.0); n * n];
    let mut sdim = 0i32;
    let mut info = 0i32;
    let mut rwork = vec![0.0f64; n];
    let mut bwork = vec![0i32; 1];
    // workspace query
    let mut work_query = [C64::new(0.0, 0.0)];
    let lwork_query = -1i32;
    unsafe {
        zgees_(
            b"V".as_ptr(), b"N".as_ptr(), core::ptr::null(), &ni,
            at.as_mut_ptr(), &ni, &mut sdim, w.as_mut_ptr(),
            vs.as_mut_ptr(), &ni, work_query.as_mut_ptr(), &lwork_query,
            rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(format!("zgees workspace query failed: info = {info}"));
    }
    let lwork = work_query[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        zgees_(
            b"V".as_ptr(), b"N".as_ptr(), core::ptr::null(), &ni,
            at.as_mut_ptr(), &ni, &mut sdim, w.as_mut_ptr(),
            vs.as_mut_ptr(), &ni, work.as_mut_ptr(), &lwork,
            rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(format!("zgees failed: info = {info}"));
    }
    let t = Array2::from_shape_fn((n, n), |(i, j)| at[i + j * n]);
    let q = Array2::from_shape_fn((n, n), |(i, j)| vs[i + j * n]);
    Ok((q, t, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn schur_reconstructs_small_matrix() {
        let a = array![
            [C64::new(1.0, 0.5), C64::new(2.0, -1.0), C64::new(0.0, 0.3)],
            [C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(1.5, 0.0)],
            [C64::new(0.2, 0.0), C64::new(0.0, 0.0), C64::new(0.5, -2.0)],
        ];
        let (q, t, w) = schur(&a).unwrap();
        // t upper triangular with eigenvalues on the diagonal
        for i in 0..3 {
            for j in 0..i {
                assert!(t[[i, j]].norm() < 1e-12, "t not triangular at ({i},{j})");
            }
            assert!((t[[i, i]] - w[i]).norm() < 1e-12);
        }
        // unitary q and a = q t q^H
        let qh = q.t().mapv(|z| z.conj());
        let recon = q.dot(&t).dot(&qh);
        for i in 0..3 {
            for j in 0..3 {
                assert!((recon[[i, j]] - a[[i, j]]).norm() < 1e-10);
            }
        }
        // trace preserved by similarity
        let tr_a: C64 = (0..3).map(|i| a[[i, i]]).sum();
        let tr_w: C64 = w.iter().sum();
        assert!((tr_a - tr_w).norm() < 1e-10);
    }
}
