//! Small dense linear algebra over jets and plain floats.
//!
//! Matrices here are tiny (ambient dimension <= 5), so everything is
//! row-major `Vec` storage with straightforward elimination.

use crate::jet::Jet;

/// Determinant of an n x n f64 matrix (row-major) by Gaussian elimination
/// with partial pivoting.
pub fn det_f64(n: usize, m: &[f64]) -> f64 {
    let mut a = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].abs() > a[piv * n + col].abs() {
                piv = r;
            }
        }
        if a[piv * n + col] == 0.0 {
            return 0.0;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
            }
            det = -det;
        }
        det *= a[col * n + col];
        for r in (col + 1)..n {
            let f = a[r * n + col] / a[col * n + col];
            for k in col..n {
                a[r * n + k] -= f * a[col * n + k];
            }
        }
    }
    det
}

/// Leading principal minors are all positive (Sylvester's criterion).
pub fn positive_definite(n: usize, m: &[f64]) -> bool {
    for k in 1..=n {
        let sub: Vec<f64> = (0..k)
            .flat_map(|r| (0..k).map(move |c| (r, c)))
            .map(|(r, c)| m[r * n + c])
            .collect();
        if det_f64(k, &sub) <= 0.0 {
            return false;
        }
    }
    true
}

/// Invert an n x n matrix of jets by Gauss-Jordan elimination, pivoting on
/// the magnitude of constant terms. Returns `None` when a pivot's constant
/// term vanishes (the matrix is singular at the base point).
pub fn invert_jet_matrix(n: usize, m: &[Jet]) -> Option<Vec<Jet>> {
    assert_eq!(m.len(), n * n);
    let order = m[0].order();
    let base = m[0].base();
    let mut a: Vec<Jet> = m.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|i| Jet::constant(if i % (n + 1) == 0 { 1.0 } else { 0.0 }, order, base))
        .collect();

    for col in 0..n {
        let mut piv = col;
        for r in (col + 1)..n {
            if a[r * n + col].value().abs() > a[piv * n + col].value().abs() {
                piv = r;
            }
        }
        if a[piv * n + col].value() == 0.0 {
            return None;
        }
        if piv != col {
            for k in 0..n {
                a.swap(col * n + k, piv * n + k);
                inv.swap(col * n + k, piv * n + k);
            }
        }
        let pivot_inv = a[col * n + col].recip().ok()?;
        for k in 0..n {
            a[col * n + k] = &a[col * n + k] * &pivot_inv;
            inv[col * n + k] = &inv[col * n + k] * &pivot_inv;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            if f.max_abs_coeff() == 0.0 {
                continue;
            }
            for k in 0..n {
                a[r * n + k] = &a[r * n + k] - &(&f * &a[col * n + k]);
                inv[r * n + k] = &inv[r * n + k] - &(&f * &inv[col * n + k]);
            }
        }
    }
    Some(inv)
}
