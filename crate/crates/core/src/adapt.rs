//! Element indicators from the residual representer, Dörfler marking and the
//! adaptive refinement loop.

use std::sync::Arc;

use crate::analysis::{element_energy_density, fill_rates, ExperimentRecord};
use crate::assembly::TestNorm;
use crate::error::Result;
use crate::experiments::Problem;
use crate::kernel::KernelPair;
use crate::mesh::Mesh1d;
use crate::quadrature::HorizonQuadrature;
use crate::space::Space;

/// Squared indicators `η_K²` of the interior elements.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorSet {
    /// Mesh element index of each entry.
    pub elements: Vec<usize>,
    pub values_sq: Vec<f64>,
}

impl IndicatorSet {
    /// `(Σ η_K²)^{1/2}`
    pub fn total(&self) -> f64 {
        self.values_sq.iter().sum::<f64>().sqrt()
    }
}

/// Splits the test-norm energy of `ψ` into interior-element contributions.
///
/// The seminorm part of element `K` collects the double integral over outer
/// points `x ∈ K`, plus the mirrored collar term `∫_K ψ(x)² ∫_{collars ∩ B_δ(x)} γ dy dx`
/// (`ψ` vanishes on the collars, so their outer points only see `ψ(y)²`).
/// The `L²` part of the app norm uses the global mean of `ψ`. Summing over
/// `K` reproduces `ψᵀ G ψ`.
pub fn localize_indicator(
    psi: &[f64],
    test: &Space,
    kernel: &KernelPair,
    eps: f64,
    norm: TestNorm,
    quad: &HorizonQuadrature,
) -> IndicatorSet {
    let mesh = test.mesh();
    let full = test.extend_free(psi);
    let value = |j: usize, x: f64| test.evaluate_in(j, &full, x);
    let collars = [0, mesh.num_elements() - 1];

    let mean = match norm {
        TestNorm::App => mesh
            .interior_elements()
            .map(|i| {
                let (a, b) = mesh.element(i);
                quad.outer_rule().integrate(a, b, |x| value(i, x))
            })
            .sum::<f64>(),
        TestNorm::Eng => 0.0,
    };

    let mut elements = Vec::new();
    let mut values_sq = Vec::new();
    for i in mesh.interior_elements() {
        let mut seminorm = element_energy_density(mesh, kernel, quad, i, &value);
        let neighbors: Vec<usize> = mesh
            .horizon_neighbors(i)
            .into_iter()
            .filter(|j| collars.contains(j))
            .collect();
        if !neighbors.is_empty() {
            for (x, w) in quad.outer_points(mesh, i) {
                let mut reach = 0.0;
                quad.for_each_inner_point(mesh, &neighbors, x, |_, y, wy| {
                    reach += wy * kernel.diffusion(y - x);
                });
                let v = value(i, x);
                seminorm += w * v * v * reach;
            }
        }
        let eta_sq = match norm {
            TestNorm::Eng => seminorm,
            TestNorm::App => {
                let (a, b) = mesh.element(i);
                let l2 = quad.outer_rule().integrate(a, b, |x| {
                    let d = value(i, x) - mean;
                    d * d
                });
                eps * eps * seminorm + l2
            }
        };
        elements.push(i);
        values_sq.push(eta_sq);
    }
    IndicatorSet {
        elements,
        values_sq,
    }
}

/// Smallest set of elements, taken by decreasing `η_K²` (ties by lower
/// index), carrying at least `theta` of the total squared indicator.
pub fn dorfler_mark(ind: &IndicatorSet, theta: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..ind.values_sq.len())
        .filter(|&k| ind.values_sq[k] > 0.0)
        .collect();
    order.sort_by(|&a, &b| {
        ind.values_sq[b]
            .total_cmp(&ind.values_sq[a])
            .then(ind.elements[a].cmp(&ind.elements[b]))
    });
    if theta >= 1.0 {
        return order.into_iter().map(|k| ind.elements[k]).collect();
    }
    let total: f64 = order.iter().map(|&k| ind.values_sq[k]).sum();
    let target = theta * total;
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for k in order {
        if acc >= target {
            break;
        }
        acc += ind.values_sq[k];
        marked.push(ind.elements[k]);
    }
    marked
}

/// Settings of [`adaptive_loop`].
#[derive(Debug, Clone)]
pub struct AdaptiveConfig {
    pub steps: usize,
    pub theta: f64,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            steps: 50,
            theta: 0.1,
        }
    }
}

/// Records of every step and the last mesh that was solved on.
#[derive(Debug, Clone)]
pub struct AdaptiveRun {
    pub records: Vec<ExperimentRecord>,
    pub final_mesh: Arc<Mesh1d>,
}

/// `solve → record → localize → mark → refine`, `steps` refinements after
/// the initial solve.
pub fn adaptive_loop(
    problem: &Problem,
    initial: Mesh1d,
    config: &AdaptiveConfig,
) -> Result<AdaptiveRun> {
    let mut mesh = Arc::new(initial);
    let mut records = Vec::with_capacity(config.steps + 1);
    for step in 0..=config.steps {
        let solved = problem.solve(mesh.clone())?;
        records.push(solved.record(step)?);
        if step == config.steps {
            break;
        }
        let ind = localize_indicator(
            &solved.solution.psi,
            &solved.test,
            &solved.kernel,
            problem.eps,
            problem.norm,
            &solved.quad,
        );
        let marked = dorfler_mark(&ind, config.theta);
        if marked.is_empty() {
            break;
        }
        mesh = Arc::new(mesh.refine_marked(&marked)?);
    }
    fill_rates(&mut records);
    Ok(AdaptiveRun {
        records,
        final_mesh: mesh,
    })
}
