//! Schur-complement solve of the mixed system
//!
//! ```text
//! G ψ + B u = F
//! Bᵀ ψ      = 0
//! ```
//!
//! `u = (Bᵀ G⁻¹ B)⁻¹ Bᵀ G⁻¹ F` and `ψ = G⁻¹ (F - B u)`, with dense Cholesky
//! factorizations of `G` and of the Schur complement.

use faer::linalg::solvers::Solve;
use faer::{Mat, Side};

use crate::assembly::MixedSystem;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SolveDiagnostics {
    /// `‖G ψ + B u - F‖ / ‖F‖` (zero when `F = 0`).
    pub primal_residual: f64,
    /// `‖Bᵀ ψ‖ / (‖B‖_F ‖ψ‖)` (zero when `ψ = 0`).
    pub constraint_residual: f64,
    /// `(max L_ii / min L_ii)²` of the Schur Cholesky factor, a cheap lower
    /// bound on its condition number.
    pub schur_condition_estimate: f64,
}

#[derive(Debug, Clone)]
pub struct MixedSolution {
    /// Free trial coefficients.
    pub u: Vec<f64>,
    /// Free test coefficients of the residual representer.
    pub psi: Vec<f64>,
    pub diagnostics: SolveDiagnostics,
}

fn column(v: &[f64]) -> Mat<f64> {
    Mat::from_fn(v.len(), 1, |r, _| v[r])
}

fn to_vec(m: &Mat<f64>) -> Vec<f64> {
    (0..m.nrows()).map(|r| m[(r, 0)]).collect()
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn solve_mixed(sys: &MixedSystem) -> Result<MixedSolution> {
    let gram_llt = sys.gram.llt(Side::Lower).map_err(|_| Error::IndefiniteGram)?;
    let b = &sys.bilinear;
    let f = column(&sys.load);

    let g_inv_b = gram_llt.solve(b);
    let mut schur = b.transpose() * &g_inv_b;
    let n = schur.nrows();
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (schur[(r, c)] + schur[(c, r)]);
            schur[(r, c)] = avg;
            schur[(c, r)] = avg;
        }
    }
    let schur_llt = schur.llt(Side::Lower).map_err(|_| Error::InfSupFailure)?;
    let diag: Vec<f64> = (0..n).map(|k| schur_llt.L()[(k, k)]).collect();
    let (dmax, dmin) = diag
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &d| (hi.max(d), lo.min(d)));
    if n > 0 && !(dmin > 0.0 && dmin > dmax * 1e-7) {
        return Err(Error::InfSupFailure);
    }

    let rhs = g_inv_b.transpose() * &f;
    let u = schur_llt.solve(&rhs);
    let residual = &f - b * &u;
    let psi = gram_llt.solve(&residual);

    let primal = &sys.gram * &psi + b * &u - &f;
    let constraint = b.transpose() * &psi;
    let (u, psi) = (to_vec(&u), to_vec(&psi));
    let f_norm = norm2(&sys.load);
    let psi_norm = norm2(&psi);
    let b_norm = b.norm_l2();
    let diagnostics = SolveDiagnostics {
        primal_residual: if f_norm > 0.0 { norm2(&to_vec(&primal)) / f_norm } else { 0.0 },
        constraint_residual: if psi_norm > 0.0 && b_norm > 0.0 {
            norm2(&to_vec(&constraint)) / (b_norm * psi_norm)
        } else {
            0.0
        },
        schur_condition_estimate: if n > 0 { (dmax / dmin).powi(2) } else { 1.0 },
    };
    Ok(MixedSolution { u, psi, diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::TestNorm;

    fn system(gram: Mat<f64>, bilinear: Mat<f64>, load: Vec<f64>) -> MixedSystem {
        MixedSystem {
            gram,
            bilinear,
            load,
            eps: 0.01,
            delta: 0.1,
            norm: TestNorm::App,
            trial_order: 1,
            test_order: 2,
        }
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let g = Mat::from_fn(3, 3, |r, c| if r == c { 2.0 } else { 0.5 });
        let b = Mat::from_fn(3, 2, |r, c| (r + 2 * c) as f64 + 1.0);
        let sol = solve_mixed(&system(g, b, vec![0.0; 3])).unwrap();
        assert!(sol.u.iter().chain(&sol.psi).all(|&v| v == 0.0));
    }

    #[test]
    fn small_dense_system_satisfies_both_equations() {
        let g = Mat::from_fn(4, 4, |r, c| if r == c { 3.0 } else { 0.25 });
        let b = Mat::from_fn(4, 2, |r, c| ((r * 3 + c * 5) % 7) as f64 - 2.5);
        let f = vec![1.0, -2.0, 0.5, 4.0];
        let sol = solve_mixed(&system(g, b, f)).unwrap();
        assert!(sol.diagnostics.primal_residual < 1e-13);
        assert!(sol.diagnostics.constraint_residual < 1e-13);
    }

    #[test]
    fn indefinite_gram_is_reported() {
        let g = Mat::from_fn(2, 2, |r, c| if r == c { -1.0 } else { 0.0 });
        let b = Mat::from_fn(2, 1, |_, _| 1.0);
        assert!(matches!(solve_mixed(&system(g, b, vec![1.0, 1.0])), Err(Error::IndefiniteGram)));
    }

    #[test]
    fn rank_deficient_coupling_is_reported() {
        let g = Mat::<f64>::identity(3, 3);
        let b = Mat::from_fn(3, 2, |r, _| r as f64 + 1.0);
        assert!(matches!(
            solve_mixed(&system(g, b, vec![1.0, 0.0, 0.0])),
            Err(Error::InfSupFailure)
        ));
    }
}
