//! Small dense linear-algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// A vector of conserved quantities (or entropy variables).
pub type State = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn state(values: &[f64]) -> State {
    DVector::from_column_slice(values)
}

pub fn inf_norm(v: &State) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

pub fn mat_inf_norm(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn all_finite(v: &State) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Smallest eigenvalue of the symmetric part of `m`.
pub fn min_eigenvalue(m: &Matrix) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn eigenvalues_sorted(m: &Matrix) -> Vec<f64> {
    let sym = (m + m.transpose()) * 0.5;
    let mut e: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// Orthonormal basis of the numerical nullspace of `m` (as columns).
///
/// Singular values below `rel_tol * sigma_max` count as zero. The matrix is
/// zero-padded to square so that the full right-singular basis is available.
pub fn nullspace(m: &Matrix, rel_tol: f64) -> (Matrix, Vec<f64>) {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return (Matrix::identity(cols, cols), Vec::new());
    }
    let rows = m.nrows().max(cols);
    let mut padded = Matrix::zeros(rows, cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let sigma_max = sigma.iter().copied().fold(0.0_f64, f64::max);
    let cut = rel_tol * sigma_max;
    let basis: Vec<DVector<f64>> = sigma
        .iter()
        .enumerate()
        .filter(|(_, s)| sigma_max == 0.0 || **s <= cut)
        .map(|(i, _)| v_t.row(i).transpose())
        .collect();
    let mut sorted = sigma;
    sorted.sort_by(|a, b| b.total_cmp(a));
    if basis.is_empty() {
        (Matrix::zeros(cols, 0), sorted)
    } else {
        (Matrix::from_columns(&basis), sorted)
    }
}

/// Row-major vectorization of the upper triangle of a symmetric matrix.
pub fn sym_index(n: usize) -> Vec<(usize, usize)> {
    let mut idx = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            idx.push((a, b));
        }
    }
    idx
}

pub fn sym_from_coords(n: usize, coords: &[f64]) -> Matrix {
    let mut h = Matrix::zeros(n, n);
    for (k, &(a, b)) in sym_index(n).iter().enumerate() {
        h[(a, b)] = coords[k];
        h[(b, a)] = coords[k];
    }
    h
}

pub fn to_vec(v: &State) -> Vec<f64> {
    v.iter().copied().collect()
}
