//! Continuous piecewise-polynomial spaces with constrained collar DOFs.
//!
//! Each element carries a Lagrange basis on its Gauss–Lobatto nodes. Global
//! numbering puts all vertex DOFs first (left to right), then the interior
//! nodes of each element in element order. A DOF is *constrained* when its
//! basis function touches a collar element; the remaining *free* DOFs span
//! functions vanishing on `[-δ, 0] ∪ [1, 1 + δ]`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::Mesh1d;

/// Lagrange basis on the Gauss–Lobatto nodes of `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct LobattoBasis {
    nodes: Vec<f64>,
    bary: Vec<f64>,
}

impl LobattoBasis {
    pub fn new(order: usize) -> Self {
        let nodes = gauss_lobatto_nodes(order);
        let bary = nodes
            .iter()
            .enumerate()
            .map(|(k, &xk)| {
                let prod: f64 = nodes
                    .iter()
                    .enumerate()
                    .filter(|&(m, _)| m != k)
                    .map(|(_, &xm)| xk - xm)
                    .product();
                1.0 / prod
            })
            .collect();
        Self { nodes, bary }
    }

    pub fn order(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// All basis values at reference coordinate `r`.
    #[inline]
    pub fn eval(&self, r: f64, out: &mut [f64]) {
        let n = self.nodes.len();
        debug_assert_eq!(out.len(), n);
        if let Some(k) = self.nodes.iter().position(|&xk| xk == r) {
            out.fill(0.0);
            out[k] = 1.0;
            return;
        }
        // first barycentric form: l(r) Σ w_k / (r - x_k)
        let mut ell = 1.0;
        for k in 0..n {
            let d = r - self.nodes[k];
            ell *= d;
            out[k] = self.bary[k] / d;
        }
        for v in out.iter_mut() {
            *v *= ell;
        }
    }
}

/// Gauss–Lobatto nodes: `±1` and the roots of `P_p'`, ascending.
pub fn gauss_lobatto_nodes(order: usize) -> Vec<f64> {
    assert!(order >= 1);
    let n = order;
    let mut x: Vec<f64> = (0..=n)
        .map(|k| -(std::f64::consts::PI * k as f64 / n as f64).cos())
        .collect();
    // Newton on (1 - x²) P_n'(x) via the Vandermonde recurrence
    for _ in 0..100 {
        let mut max_dx: f64 = 0.0;
        for xi in x.iter_mut().take(n).skip(1) {
            let (p_prev, p) = legendre_pair(n, *xi);
            // (1-x²)P_n' = n (P_{n-1} - x P_n); Newton step for P_{n-1} - x P_n
            let f = p_prev - *xi * p;
            let df = -(n as f64 + 1.0) * p;
            let dx = f / df;
            *xi -= dx;
            max_dx = max_dx.max(dx.abs());
        }
        if max_dx < 1e-16 {
            break;
        }
    }
    x[0] = -1.0;
    x[n] = 1.0;
    // symmetrize to remove roundoff asymmetry
    for k in 0..=n / 2 {
        let s = 0.5 * (x[n - k] - x[k]);
        x[k] = -s;
        x[n - k] = s;
    }
    if n % 2 == 0 {
        x[n / 2] = 0.0;
    }
    x
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p0, p1)
}

/// Role of a global DOF.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DofKind {
    Free(usize),
    Constrained(usize),
}

#[derive(Debug, Clone)]
pub struct Space {
    mesh: Arc<Mesh1d>,
    basis: LobattoBasis,
    elem_dofs: Vec<Vec<usize>>,
    kinds: Vec<DofKind>,
    coords: Vec<f64>,
    free: Vec<usize>,
    constrained: Vec<usize>,
}

impl Space {
    pub fn new(mesh: Arc<Mesh1d>, order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::InvalidOrder(order));
        }
        let basis = LobattoBasis::new(order);
        let n_el = mesh.num_elements();
        let n_vertices = n_el + 1;
        let n_dofs = n_vertices + n_el * (order - 1);
        let mut elem_dofs = Vec::with_capacity(n_el);
        let mut coords = vec![0.0; n_dofs];
        for (v, c) in coords.iter_mut().enumerate().take(n_vertices) {
            *c = mesh.nodes()[v];
        }
        for i in 0..n_el {
            let (a, b) = mesh.element(i);
            let mut dofs = Vec::with_capacity(order + 1);
            dofs.push(i);
            for k in 1..order {
                let g = n_vertices + i * (order - 1) + (k - 1);
                coords[g] = a + 0.5 * (b - a) * (basis.nodes()[k] + 1.0);
                dofs.push(g);
            }
            dofs.push(i + 1);
            elem_dofs.push(dofs);
        }
        let mut is_constrained = vec![false; n_dofs];
        for &i in &[0, n_el - 1] {
            for &g in &elem_dofs[i] {
                is_constrained[g] = true;
            }
        }
        let mut kinds = Vec::with_capacity(n_dofs);
        let (mut free, mut constrained) = (Vec::new(), Vec::new());
        for (g, &c) in is_constrained.iter().enumerate() {
            if c {
                kinds.push(DofKind::Constrained(constrained.len()));
                constrained.push(g);
            } else {
                kinds.push(DofKind::Free(free.len()));
                free.push(g);
            }
        }
        Ok(Self {
            mesh,
            basis,
            elem_dofs,
            kinds,
            coords,
            free,
            constrained,
        })
    }

    pub fn mesh(&self) -> &Mesh1d {
        &self.mesh
    }

    pub fn mesh_arc(&self) -> &Arc<Mesh1d> {
        &self.mesh
    }

    pub fn order(&self) -> usize {
        self.basis.order()
    }

    pub fn basis(&self) -> &LobattoBasis {
        &self.basis
    }

    pub fn num_dofs(&self) -> usize {
        self.kinds.len()
    }

    pub fn num_free(&self) -> usize {
        self.free.len()
    }

    pub fn num_constrained(&self) -> usize {
        self.constrained.len()
    }

    /// Global DOFs of element `i`, in local (left-to-right node) order.
    pub fn element_dofs(&self, i: usize) -> &[usize] {
        &self.elem_dofs[i]
    }

    pub fn kind(&self, dof: usize) -> DofKind {
        self.kinds[dof]
    }

    pub fn free_dofs(&self) -> &[usize] {
        &self.free
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.constrained
    }

    /// Interpolation node of each global DOF.
    pub fn dof_coords(&self) -> &[f64] {
        &self.coords
    }

    /// Local basis values of element `i` at physical `x`.
    #[inline]
    pub fn eval_local(&self, i: usize, x: f64, out: &mut [f64]) {
        let (a, b) = self.mesh.element(i);
        let r = (2.0 * x - a - b) / (b - a);
        self.basis.eval(r, out);
    }

    /// Nodal interpolant of `f` (all DOFs).
    pub fn interpolate(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.coords.iter().map(|&x| f(x)).collect()
    }

    /// Collar data `g` at the constrained DOFs.
    pub fn lift(&self, g: impl Fn(f64) -> f64) -> BoundaryLift {
        BoundaryLift {
            values: self.constrained.iter().map(|&d| g(self.coords[d])).collect(),
        }
    }

    /// Scatters free coefficients and a lift into a full coefficient vector.
    pub fn combine(&self, free: &[f64], lift: &BoundaryLift) -> Vec<f64> {
        assert_eq!(free.len(), self.num_free());
        assert_eq!(lift.values.len(), self.num_constrained());
        let mut full = vec![0.0; self.num_dofs()];
        for (&d, &v) in self.free.iter().zip(free) {
            full[d] = v;
        }
        for (&d, &v) in self.constrained.iter().zip(&lift.values) {
            full[d] = v;
        }
        full
    }

    /// Free entries of a full coefficient vector.
    pub fn restrict_free(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&d| full[d]).collect()
    }

    /// Zero-extends free coefficients.
    pub fn extend_free(&self, free: &[f64]) -> Vec<f64> {
        let mut full = vec![0.0; self.num_dofs()];
        for (&d, &v) in self.free.iter().zip(free) {
            full[d] = v;
        }
        full
    }

    /// Value of the function with full coefficients `coeffs` at `x`.
    pub fn evaluate(&self, coeffs: &[f64], x: f64) -> Result<f64> {
        let i = self.mesh.locate(x).ok_or(Error::OutOfDomain {
            x,
            lo: self.mesh.nodes()[0],
            hi: *self.mesh.nodes().last().unwrap(),
        })?;
        Ok(self.evaluate_in(i, coeffs, x))
    }

    /// Value at `x` using element `i`'s polynomial (no location search).
    #[inline]
    pub fn evaluate_in(&self, i: usize, coeffs: &[f64], x: f64) -> f64 {
        let mut phi = [0.0; 32];
        let phi = &mut phi[..self.order() + 1];
        self.eval_local(i, x, phi);
        self.elem_dofs[i].iter().zip(phi.iter()).map(|(&d, &p)| coeffs[d] * p).sum()
    }

    pub fn same_mesh(&self, other: &Space) -> bool {
        Arc::ptr_eq(&self.mesh, &other.mesh) || *self.mesh == *other.mesh
    }
}

/// Prescribed values on the constrained DOFs.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryLift {
    pub values: Vec<f64>,
}

impl BoundaryLift {
    pub fn zero(space: &Space) -> Self {
        Self {
            values: vec![0.0; space.num_constrained()],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn initial(order: usize) -> Space {
        Space::new(Arc::new(Mesh1d::initial(0.1).unwrap()), order).unwrap()
    }

    #[test]
    fn lobatto_nodes_low_orders() {
        assert_eq!(gauss_lobatto_nodes(1), vec![-1.0, 1.0]);
        assert_eq!(gauss_lobatto_nodes(2), vec![-1.0, 0.0, 1.0]);
        let n3 = gauss_lobatto_nodes(3);
        assert!((n3[2] - 1.0 / 5f64.sqrt()).abs() < 1e-15);
        let n4 = gauss_lobatto_nodes(4);
        assert!((n4[3] - (3.0f64 / 7.0).sqrt()).abs() < 1e-15);
        for p in 1..=12 {
            let n = gauss_lobatto_nodes(p);
            assert!(n.windows(2).all(|w| w[0] < w[1]), "order {p}");
        }
    }

    #[test]
    fn dof_counts() {
        let s = initial(1);
        assert_eq!((s.num_dofs(), s.num_free()), (8, 4));
        let free: Vec<f64> = s.free_dofs().iter().map(|&d| s.dof_coords()[d]).collect();
        assert!(free.iter().zip([0.2, 0.4, 0.6, 0.8]).all(|(a, b)| (a - b).abs() < 1e-15));
        let s = initial(2);
        assert_eq!((s.num_dofs(), s.num_free()), (15, 9));
        let refined = Arc::new(Mesh1d::initial(0.1).unwrap().refine_uniform());
        assert_eq!(Space::new(refined, 1).unwrap().num_free(), 9);
        assert!(matches!(
            Space::new(Arc::new(Mesh1d::initial(0.1).unwrap()), 0),
            Err(Error::InvalidOrder(0))
        ));
    }

    #[test]
    fn interpolation_reproduces_polynomials_of_the_space_order() {
        let s = initial(1);
        let c = s.interpolate(|x| x);
        let s5 = initial(5);
        let c5 = s5.interpolate(|x| x.powi(5));
        for k in 0..=120 {
            let x = -0.1 + 1.2 * k as f64 / 120.0;
            assert!((s.evaluate(&c, x).unwrap() - x).abs() < 1e-14);
            assert!((s5.evaluate(&c5, x).unwrap() - x.powi(5)).abs() < 1e-13);
        }
    }

    #[test]
    fn linear_interpolant_error_bound() {
        // |u - I u| ≤ h²/8 max|u''| per element with u'' = 20x³
        let s = initial(1);
        let c = s.interpolate(|x| x.powi(5));
        let mesh = s.mesh();
        for i in mesh.interior_elements() {
            let (a, b) = mesh.element(i);
            let bound = (b - a).powi(2) / 8.0 * 20.0 * b.powi(3);
            for k in 0..=200 {
                let x = a + (b - a) * k as f64 / 200.0;
                let err = (s.evaluate_in(i, &c, x) - x.powi(5)).abs();
                assert!(err <= bound * (1.0 + 1e-12), "x = {x}: {err} > {bound}");
            }
        }
    }

    #[test]
    fn evaluation_basics() {
        let s = initial(3);
        let ones = vec![1.0; s.num_dofs()];
        assert!((s.evaluate(&ones, 0.33).unwrap() - 1.0).abs() < 1e-14);
        let mut hat = vec![0.0; s.num_dofs()];
        hat[3] = 1.0; // vertex at x = 0.4
        assert!((s.evaluate(&hat, 0.4).unwrap() - 1.0).abs() < 1e-15);
        let c = s.interpolate(|x| (3.0 * x).sin());
        for &node in &s.mesh().nodes()[1..7] {
            let (l, r) = (s.mesh().locate(node).unwrap(), s.mesh().locate(node).unwrap() - 1);
            let jump = s.evaluate_in(l, &c, node) - s.evaluate_in(r, &c, node);
            assert!(jump.abs() < 1e-14);
        }
        assert!(matches!(s.evaluate(&c, 1.2), Err(Error::OutOfDomain { .. })));
    }

    #[test]
    fn partition_of_unity() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        for order in 1..=10 {
            let s = initial(order);
            let mut phi = vec![0.0; order + 1];
            for i in 0..s.mesh().num_elements() {
                let (a, b) = s.mesh().element(i);
                for _ in 0..100 {
                    let x = rng.random_range(a..b);
                    s.eval_local(i, x, &mut phi);
                    let sum: f64 = phi.iter().sum();
                    assert!((sum - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn free_functions_vanish_on_the_collars() {
        let s = initial(4);
        for (k, &d) in s.free_dofs().iter().enumerate() {
            let c = s.extend_free(&{
                let mut v = vec![0.0; s.num_free()];
                v[k] = 1.0;
                v
            });
            assert_eq!(c[d], 1.0);
            for m in 0..=50 {
                let t = m as f64 / 50.0;
                for x in [-0.1 + 0.1 * t, 1.0 + 0.1 * t] {
                    assert_eq!(s.evaluate(&c, x).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn lift_matches_data_at_constrained_nodes() {
        let s = initial(2);
        let lift = s.lift(|x| x.exp());
        for (&d, &v) in s.constrained_dofs().iter().zip(&lift.values) {
            assert_eq!(v, s.dof_coords()[d].exp());
        }
        let full = s.combine(&vec![0.0; s.num_free()], &lift);
        assert_eq!(s.restrict_free(&full), vec![0.0; s.num_free()]);
    }
}
