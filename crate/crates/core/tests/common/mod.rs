#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// min ‖x‖₁ s.t. Ax = y by enumerating basic solutions: every vertex of the
/// split LP is A_S⁻¹y on a column subset S with |S| = rank(A) = rows.
pub fn lp_oracle(a: &DMatrix<f64>, y: &[f64]) -> f64 {
    let (m, n) = a.shape();
    let yv = DVector::from_column_slice(y);
    let mut best = f64::INFINITY;
    let mut idx: Vec<usize> = (0..m).collect();
    loop {
        let sub = a.select_columns(&idx);
        if let Some(lu) = Some(sub.clone().lu()).filter(|lu| lu.determinant().abs() > 1e-12) {
            if let Some(x) = lu.solve(&yv) {
                if (&sub * &x - &yv).amax() < 1e-9 {
                    best = best.min(x.iter().map(|v| v.abs()).sum());
                }
            }
        }
        // next combination
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < n - m + i {
                idx[i] += 1;
                for j in i + 1..m {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

pub fn random_signs<R: Rng>(r: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|j| if (j + r.random_range(0..2)) % 2 == 0 { 1.0 } else { -1.0 }).collect()
}
