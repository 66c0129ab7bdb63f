//! Small dense helpers shared by the models.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Result, TaeError};
use crate::rng::SeededRng;

/// Orthonormalize the rows of `m` with modified Gram–Schmidt.
///
/// Fails with [`TaeError::RankDeficient`] when a row is (numerically) in the
/// span of the ones before it.
pub fn orthonormalize_rows(m: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let mut q = m.to_owned();
    let scale = m
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
        .max(1e-300);
    for i in 0..q.nrows() {
        // Two passes keep the rows orthogonal to machine precision.
        for _ in 0..2 {
            for p in 0..i {
                let proj = q.row(i).dot(&q.row(p));
                let prev = q.row(p).to_owned();
                q.row_mut(i).scaled_add(-proj, &prev);
            }
        }
        let norm = q.row(i).dot(&q.row(i)).sqrt();
        if !(norm > 1e-12 * scale) {
            return Err(TaeError::RankDeficient {
                expected: m.nrows(),
            });
        }
        q.row_mut(i).mapv_inplace(|v| v / norm);
    }
    Ok(q)
}

/// An `rows × cols` matrix with orthonormal rows drawn from a Gaussian.
pub fn random_orthonormal_rows(rows: usize, cols: usize, rng: &mut SeededRng) -> Array2<f64> {
    assert!(
        rows <= cols,
        "cannot fit {rows} orthonormal rows in R^{cols}"
    );
    loop {
        let g = Array2::from_shape_fn((rows, cols), |_| rng.normal());
        if let Ok(q) = orthonormalize_rows(g.view()) {
            return q;
        }
    }
}

/// Frobenius norm.
pub fn frobenius(m: ArrayView2<'_, f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn squared_norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v)
}

/// `‖M Mᵀ − I‖_F` for a matrix with orthonormal rows expected.
pub fn orthonormality_residual(m: ArrayView2<'_, f64>) -> f64 {
    let mut gram = m.dot(&m.t());
    for i in 0..gram.nrows() {
        gram[[i, i]] -= 1.0;
    }
    frobenius(gram.view())
}

/// Weighted mean of the rows of `x` with weights `w`; `None` when the mass is zero.
pub fn weighted_mean(x: ArrayView2<'_, f64>, w: ArrayView1<'_, f64>) -> Option<Array1<f64>> {
    let mass = w.sum();
    if !(mass > 0.0) {
        return None;
    }
    let mut acc = Array1::zeros(x.ncols());
    for (row, &wi) in x.axis_iter(Axis(0)).zip(w.iter()) {
        if wi != 0.0 {
            acc.scaled_add(wi, &row);
        }
    }
    Some(acc / mass)
}
