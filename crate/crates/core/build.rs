// Links system OpenBLAS (Debian: libopenblas-dev), which bundles BLAS,
// CBLAS, and LAPACK in one shared object. ndarray-linalg is used
// backend-less; its LAPACK symbols and ndarray's CBLAS calls both resolve
// against this library.
fn main() {
    println!("cargo:rustc-link-lib=dylib=openblas");
}
