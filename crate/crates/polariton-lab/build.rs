fn main() {
    // ndarray-linalg is used without a bundled backend; link the system
    // OpenBLAS (which provides both BLAS and LAPACK symbols) instead.
    println!("cargo:rustc-link-lib=dylib=openblas");
}
