//! Dense eigen-decomposition helpers shared by the propagators, the Dicke
//! multiplet construction and the disorder scans.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

/// Eigenpairs of a real symmetric matrix, eigenvalues ascending and
/// eigenvectors as matching columns.
pub(crate) fn sym_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Eigenpairs of a complex Hermitian matrix, ascending.
pub(crate) fn herm_eigen(m: DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(eig.eigenvectors.nrows(), order.len(), |r, c| {
        eig.eigenvectors[(r, order[c])]
    });
    (values, vectors)
}

/// Group sorted eigenvalues into runs closer than `tol` to the first member.
pub(crate) fn degenerate_clusters(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[start]).abs() <= tol {
            end += 1;
        }
        out.push(start..end);
        start = end;
    }
    out
}

/// `exp(-i H dt)` from a real symmetric `H`.
pub(crate) fn real_propagator(h: &DMatrix<f64>, dt: f64) -> DMatrix<Complex64> {
    let (values, vectors) = sym_eigen(h.clone());
    let n = values.len();
    let v = vectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, -values[r] * dt)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &v * phases * v.transpose()
}

/// `exp(-i H dt)` from a complex Hermitian `H`.
pub(crate) fn herm_propagator(h: &DMatrix<Complex64>, dt: f64) -> DMatrix<Complex64> {
    let (values, vectors) = herm_eigen(h.clone());
    let n = values.len();
    let phases = DMatrix::from_fn(n, n, |r, c| {
        if r == c {
            Complex64::from_polar(1.0, -values[r] * dt)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &vectors * phases * vectors.adjoint()
}

/// In-place `psi <- exp(-i H dt) psi` for real symmetric `H`, without
/// forming the propagator.
pub(crate) fn propagate_real_in_place(h: DMatrix<f64>, dt: f64, psi: &mut [Complex64]) {
    let eig = SymmetricEigen::new(h);
    let v = &eig.eigenvectors;
    let n = psi.len();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    for (k, coeff) in coeffs.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, p) in psi.iter().enumerate() {
            acc += *p * v[(i, k)];
        }
        *coeff = acc * Complex64::from_polar(1.0, -eig.eigenvalues[k] * dt);
    }
    for (i, p) in psi.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, coeff) in coeffs.iter().enumerate() {
            acc += *coeff * v[(i, k)];
        }
        *p = acc;
    }
}

/// Deterministic orthonormal basis of the column span of `basis`.
///
/// The span's projector is applied to the unit vectors `e_0, e_1, ...` in
/// order and the images are Gram-Schmidt orthogonalised, so the result
/// depends only on the subspace and not on the rotation the eigensolver
/// happened to return. Each vector's first significant entry is positive.
pub(crate) fn canonical_span_basis(basis: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let (d, k) = basis.shape();
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(k);
    for i in 0..d {
        if out.len() == k {
            break;
        }
        let row = basis.row(i).transpose();
        let mut v = basis * row;
        for _ in 0..2 {
            for u in &out {
                let overlap = u.dot(&v);
                v.axpy(-overlap, u, 1.0);
            }
        }
        let norm = v.norm();
        if norm > 1e-8 {
            v /= norm;
            if let Some(first) = v.iter().find(|x| x.abs() > 1e-12) {
                if *first < 0.0 {
                    v.neg_mut();
                }
            }
            out.push(v);
        }
    }
    out
}
