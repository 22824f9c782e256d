//! Discrete operators of the mixed Petrov–Galerkin system.
//!
//! Rows are always the free DOFs of a test space (test functions vanish on
//! the collars, so the outer integral runs over `Ω` only). Columns of the
//! operator matrices cover *all* DOFs of the column space so the collar data
//! can be moved to the right-hand side.
//!
//! Both nonlocal forms are assembled in operator form:
//!
//! ```text
//! A[v, u] = ∫_Ω φ_v(x) (-L_δ φ_u)(x) dx,   -L_δ u(x) = -2 ∫ γ_diff_δ(|y-x|) (u(y) - u(x)) dy
//! C[v, u] = ∫_Ω φ_v(x) (G_δ φ_u)(x) dx,    G_δ u(x)  =  ∫ sign(y-x) γ_conv_δ(|y-x|) (u(y) - u(x)) dy
//! ```

use std::fmt;
use std::str::FromStr;

use faer::Mat;

use crate::error::{Error, Result};
use crate::kernel::KernelPair;
use crate::quadrature::HorizonQuadrature;
use crate::space::{BoundaryLift, DofKind, Space};

/// Norm placed on the test space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestNorm {
    /// `ε² |v|²_S + ‖v - v̄‖²_{L²(Ω)}`
    App,
    /// `|v|²_S`
    Eng,
}

impl fmt::Display for TestNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TestNorm::App => "app",
            TestNorm::Eng => "eng",
        })
    }
}

impl FromStr for TestNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "app" => Ok(TestNorm::App),
            "eng" => Ok(TestNorm::Eng),
            other => Err(Error::config("norm", format!("expected `app` or `eng`, got `{other}`"))),
        }
    }
}

/// Measure of `Ω = (0, 1)`.
pub const DOMAIN_MEASURE: f64 = 1.0;

/// Assembled saddle-point system `[G B; Bᵀ 0] [ψ; u] = [F; 0]`.
#[derive(Debug, Clone)]
pub struct MixedSystem {
    /// Test-norm Gram matrix on the free test DOFs.
    pub gram: Mat<f64>,
    /// `b(φ_u, φ_v)` with rows = free test, cols = free trial.
    pub bilinear: Mat<f64>,
    /// `(f, φ_v) - b(g_lift, φ_v)`.
    pub load: Vec<f64>,
    pub eps: f64,
    pub delta: f64,
    pub norm: TestNorm,
    pub trial_order: usize,
    pub test_order: usize,
}

impl MixedSystem {
    pub fn num_test(&self) -> usize {
        self.gram.nrows()
    }

    pub fn num_trial(&self) -> usize {
        self.bilinear.ncols()
    }
}

struct Operators {
    diffusion: Mat<f64>,
    convection: Option<Mat<f64>>,
}

/// One sweep of the nested horizon quadrature, accumulating the diffusion
/// operator (and optionally the convection operator) for `cols` against the
/// free DOFs of `test`.
fn assemble_operators(
    test: &Space,
    cols: &Space,
    kernel: &KernelPair,
    quad: &HorizonQuadrature,
    with_convection: bool,
) -> Result<Operators> {
    if !test.same_mesh(cols) {
        return Err(Error::MeshMismatch);
    }
    let mesh = test.mesh();
    let n_rows = test.num_free();
    let n_cols = cols.num_dofs();
    let mut diffusion = Mat::<f64>::zeros(n_rows, n_cols);
    let mut convection = with_convection.then(|| Mat::<f64>::zeros(n_rows, n_cols));

    let n_test_local = test.order() + 1;
    let n_col_local = cols.order() + 1;
    let mut phi_test = vec![0.0; n_test_local];
    let mut phi_col_x = vec![0.0; n_col_local];
    let mut phi_col_y = vec![0.0; n_col_local];
    let mut moment_d = vec![0.0; n_col_local];
    let mut moment_c = vec![0.0; n_col_local];
    let mut rows: Vec<(usize, f64)> = Vec::with_capacity(n_test_local);

    for i in mesh.interior_elements() {
        let neighbors = mesh.horizon_neighbors(i);
        let test_dofs = test.element_dofs(i);
        let col_dofs_i = cols.element_dofs(i);
        for (x, w) in quad.outer_points(mesh, i) {
            test.eval_local(i, x, &mut phi_test);
            rows.clear();
            for (k, &d) in test_dofs.iter().enumerate() {
                if let DofKind::Free(r) = test.kind(d) {
                    rows.push((r, w * phi_test[k]));
                }
            }
            if rows.is_empty() {
                continue;
            }
            let mut total_d = 0.0;
            let mut total_c = 0.0;
            for &j in &neighbors {
                moment_d.fill(0.0);
                moment_c.fill(0.0);
                let mut touched = false;
                quad.for_each_inner_point(mesh, &[j], x, |_, y, wy| {
                    touched = true;
                    let s = y - x;
                    let kd = wy * kernel.diffusion(s);
                    let kc = wy * kernel.directed_convection(s);
                    total_d += kd;
                    total_c += kc;
                    cols.eval_local(j, y, &mut phi_col_y);
                    for a in 0..n_col_local {
                        moment_d[a] += kd * phi_col_y[a];
                        moment_c[a] += kc * phi_col_y[a];
                    }
                });
                if !touched {
                    continue;
                }
                let col_dofs_j = cols.element_dofs(j);
                for &(r, cv) in &rows {
                    for a in 0..n_col_local {
                        diffusion[(r, col_dofs_j[a])] -= 2.0 * cv * moment_d[a];
                    }
                    if let Some(c) = convection.as_mut() {
                        for a in 0..n_col_local {
                            c[(r, col_dofs_j[a])] += cv * moment_c[a];
                        }
                    }
                }
            }
            cols.eval_local(i, x, &mut phi_col_x);
            for &(r, cv) in &rows {
                for b in 0..n_col_local {
                    diffusion[(r, col_dofs_i[b])] += 2.0 * cv * phi_col_x[b] * total_d;
                }
                if let Some(c) = convection.as_mut() {
                    for b in 0..n_col_local {
                        c[(r, col_dofs_i[b])] -= cv * phi_col_x[b] * total_c;
                    }
                }
            }
        }
    }
    Ok(Operators {
        diffusion,
        convection,
    })
}

/// `A[v, u] = a(φ_u, φ_v)`, rows = free test DOFs, cols = all trial DOFs.
pub fn assemble_diffusion(
    trial: &Space,
    test: &Space,
    kernel: &KernelPair,
    quad: &HorizonQuadrature,
) -> Result<Mat<f64>> {
    Ok(assemble_operators(test, trial, kernel, quad, false)?.diffusion)
}

/// `C[v, u] = (G_δ φ_u, φ_v)` for unit velocity, rows = free test DOFs,
/// cols = all trial DOFs.
pub fn assemble_convection(
    trial: &Space,
    test: &Space,
    kernel: &KernelPair,
    quad: &HorizonQuadrature,
) -> Result<Mat<f64>> {
    Ok(assemble_operators(test, trial, kernel, quad, true)?
        .convection
        .expect("requested"))
}

/// Both nonlocal operators from a single quadrature sweep.
pub fn assemble_diffusion_convection(
    trial: &Space,
    test: &Space,
    kernel: &KernelPair,
    quad: &HorizonQuadrature,
) -> Result<(Mat<f64>, Mat<f64>)> {
    let ops = assemble_operators(test, trial, kernel, quad, true)?;
    Ok((ops.diffusion, ops.convection.expect("requested")))
}

/// Free-by-free block of an operator whose columns span all DOFs of `space`.
pub fn free_columns(space: &Space, full: &Mat<f64>) -> Mat<f64> {
    let free = space.free_dofs();
    Mat::from_fn(full.nrows(), free.len(), |r, c| full[(r, free[c])])
}

/// Columns of the constrained DOFs of `space`.
pub fn constrained_columns(space: &Space, full: &Mat<f64>) -> Mat<f64> {
    let cons = space.constrained_dofs();
    Mat::from_fn(full.nrows(), cons.len(), |r, c| full[(r, cons[c])])
}

/// `L²(Ω)` mass matrix and mean vector `m_v = ∫_Ω φ_v` on the free DOFs.
pub fn assemble_mass(space: &Space, quad: &HorizonQuadrature) -> (Mat<f64>, Vec<f64>) {
    let n = space.num_free();
    let mut mass = Mat::<f64>::zeros(n, n);
    let mut mean = vec![0.0; n];
    let mut phi = vec![0.0; space.order() + 1];
    let mesh = space.mesh();
    for i in mesh.interior_elements() {
        let (a, b) = mesh.element(i);
        let dofs = space.element_dofs(i);
        for (x, w) in quad.outer_rule().mapped(a, b) {
            space.eval_local(i, x, &mut phi);
            for (k, &dk) in dofs.iter().enumerate() {
                let DofKind::Free(r) = space.kind(dk) else { continue };
                mean[r] += w * phi[k];
                for (l, &dl) in dofs.iter().enumerate() {
                    if let DofKind::Free(c) = space.kind(dl) {
                        mass[(r, c)] += w * phi[k] * phi[l];
                    }
                }
            }
        }
    }
    (mass, mean)
}

fn symmetrize(m: &mut Mat<f64>) {
    let n = m.nrows();
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (m[(r, c)] + m[(c, r)]);
            m[(r, c)] = avg;
            m[(c, r)] = avg;
        }
    }
}

/// Gram matrix of the chosen test norm on the free test DOFs.
pub fn assemble_gram(
    test: &Space,
    kernel: &KernelPair,
    eps: f64,
    norm: TestNorm,
    quad: &HorizonQuadrature,
) -> Result<Mat<f64>> {
    let a_full = assemble_diffusion(test, test, kernel, quad)?;
    let a_vv = free_columns(test, &a_full);
    Ok(gram_from_parts(test, a_vv, eps, norm, quad))
}

fn gram_from_parts(
    test: &Space,
    a_vv: Mat<f64>,
    eps: f64,
    norm: TestNorm,
    quad: &HorizonQuadrature,
) -> Mat<f64> {
    let mut gram = match norm {
        TestNorm::Eng => a_vv,
        TestNorm::App => {
            let (mass, mean) = assemble_mass(test, quad);
            let n = mass.nrows();
            Mat::from_fn(n, n, |r, c| {
                eps * eps * a_vv[(r, c)] + mass[(r, c)] - mean[r] * mean[c] / DOMAIN_MEASURE
            })
        }
    };
    symmetrize(&mut gram);
    gram
}

/// `F_v = (f, φ_v)_Ω - Σ_c B_full[v, c] g_c` over the constrained trial DOFs,
/// where `B_full = ε A + C`.
pub fn assemble_load(
    test: &Space,
    forcing: impl Fn(f64) -> f64,
    lift_block: &Mat<f64>,
    lift: &BoundaryLift,
    quad: &HorizonQuadrature,
) -> Vec<f64> {
    let mut load = vec![0.0; test.num_free()];
    let mut phi = vec![0.0; test.order() + 1];
    let mesh = test.mesh();
    for i in mesh.interior_elements() {
        let (a, b) = mesh.element(i);
        let dofs = test.element_dofs(i);
        for (x, w) in quad.outer_rule().mapped(a, b) {
            let fx = forcing(x);
            test.eval_local(i, x, &mut phi);
            for (k, &d) in dofs.iter().enumerate() {
                if let DofKind::Free(r) = test.kind(d) {
                    load[r] += w * fx * phi[k];
                }
            }
        }
    }
    for (r, l) in load.iter_mut().enumerate() {
        let lifted: f64 = (0..lift_block.ncols())
            .map(|c| lift_block[(r, c)] * lift.values[c])
            .sum();
        *l -= lifted;
    }
    load
}

/// `b(c, φ_v)` for a function `c` supported on the two collars, given by
/// `correction(x)` there. Subtracting it from the load replaces the collar
/// interpolant of the data by the data itself.
pub fn assemble_collar_correction(
    test: &Space,
    kernel: &KernelPair,
    eps: f64,
    correction: impl Fn(f64) -> f64,
    quad: &HorizonQuadrature,
) -> Vec<f64> {
    let mesh = test.mesh();
    let collars = [0, mesh.num_elements() - 1];
    let mut out = vec![0.0; test.num_free()];
    let mut phi = vec![0.0; test.order() + 1];
    for i in mesh.interior_elements() {
        let neighbors: Vec<usize> = mesh
            .horizon_neighbors(i)
            .into_iter()
            .filter(|j| collars.contains(j))
            .collect();
        if neighbors.is_empty() {
            continue;
        }
        let dofs = test.element_dofs(i);
        for (x, w) in quad.outer_points(mesh, i) {
            // c(x) = 0 for x in Ω, so only the c(y) terms survive
            let mut value = 0.0;
            quad.for_each_inner_point(mesh, &neighbors, x, |_, y, wy| {
                let s = y - x;
                value += wy
                    * (-2.0 * eps * kernel.diffusion(s) + kernel.directed_convection(s))
                    * correction(y);
            });
            if value == 0.0 {
                continue;
            }
            test.eval_local(i, x, &mut phi);
            for (k, &d) in dofs.iter().enumerate() {
                if let DofKind::Free(r) = test.kind(d) {
                    out[r] += w * phi[k] * value;
                }
            }
        }
    }
    out
}

/// Everything the mixed solve needs, from two quadrature sweeps (trial
/// operators and test-test diffusion).
#[allow(clippy::too_many_arguments)]
pub fn assemble_system(
    trial: &Space,
    test: &Space,
    kernel: &KernelPair,
    eps: f64,
    norm: TestNorm,
    forcing: impl Fn(f64) -> f64,
    lift: &BoundaryLift,
    quad: &HorizonQuadrature,
) -> Result<MixedSystem> {
    let (a_full, c_full) = assemble_diffusion_convection(trial, test, kernel, quad)?;
    let b_full = Mat::from_fn(a_full.nrows(), a_full.ncols(), |r, c| {
        eps * a_full[(r, c)] + c_full[(r, c)]
    });
    let bilinear = free_columns(trial, &b_full);
    let lift_block = constrained_columns(trial, &b_full);
    let load = assemble_load(test, forcing, &lift_block, lift, quad);
    let gram = assemble_gram(test, kernel, eps, norm, quad)?;
    Ok(MixedSystem {
        gram,
        bilinear,
        load,
        eps,
        delta: kernel.delta(),
        norm,
        trial_order: trial.order(),
        test_order: test.order(),
    })
}
