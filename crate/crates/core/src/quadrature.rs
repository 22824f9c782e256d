//! Gauss–Legendre rules and the nested horizon integration driver.
//!
//! Integrals of the form `∫_{K_i} F(x, ∫_{K_j ∩ B_δ(x)} G(x, y) dy) dx` are
//! evaluated by visiting every horizon neighbor `K_j` of `K_i`, clipping it to
//! the ball around each outer point and mapping an inner rule onto the clipped
//! interval. Two splits keep both integrands piecewise smooth:
//!
//! * the outer element is cut at every translate `x_k ± δ` of a mesh node,
//!   where the clipped inner intervals change shape;
//! * an inner interval containing the outer point is cut there, because
//!   directed kernels jump at `y = x`.

use crate::mesh::Mesh1d;

/// Points and weights on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadRule {
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadRule {
    /// `n`-point Gauss–Legendre rule, exact to polynomial degree `2n - 1`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "a quadrature rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, refined by Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        Self { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Rule mapped onto `[a, b]`, as `(x, w)` pairs.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&r, &w)| (mid + half * r, half * w))
    }

    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }

    /// Composite rule over `panels` equal subintervals.
    pub fn integrate_composite(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: impl FnMut(f64) -> f64,
    ) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + k as f64 * h;
                let hi = if k + 1 == panels { b } else { lo + h };
                self.integrate(lo, hi, &mut f)
            })
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `(a, b) ∩ (center - delta, center + delta)`, or `None` when degenerate.
pub fn intersect(element: (f64, f64), center: f64, delta: f64) -> Option<(f64, f64)> {
    let lo = element.0.max(center - delta);
    let hi = element.1.min(center + delta);
    (hi > lo).then_some((lo, hi))
}

/// Default number of extra quadrature points on top of the polynomial order.
pub const DEFAULT_N_OVER: usize = 13;

/// Outer and inner rules for horizon integrals.
#[derive(Debug, Clone)]
pub struct HorizonQuadrature {
    outer: QuadRule,
    inner: QuadRule,
}

impl HorizonQuadrature {
    pub fn new(outer_points: usize, inner_points: usize) -> Self {
        Self {
            outer: QuadRule::gauss_legendre(outer_points),
            inner: QuadRule::gauss_legendre(inner_points),
        }
    }

    /// `order + n_over` points for both levels.
    pub fn for_order(order: usize, n_over: usize) -> Self {
        Self::new(order + n_over, order + n_over)
    }

    pub fn outer_rule(&self) -> &QuadRule {
        &self.outer
    }

    pub fn inner_rule(&self) -> &QuadRule {
        &self.inner
    }

    /// Outer quadrature points on element `i`, split at node translates by
    /// `±delta`.
    pub fn outer_points(&self, mesh: &Mesh1d, i: usize) -> Vec<(f64, f64)> {
        let pieces = outer_pieces(mesh, i);
        let mut out = Vec::with_capacity(pieces.len().saturating_sub(1) * self.outer.len());
        for w in pieces.windows(2) {
            out.extend(self.outer.mapped(w[0], w[1]));
        }
        out
    }

    /// Visits every inner quadrature point `(j, y, w)` of
    /// `∪_{j ∈ neighbors} K_j ∩ B_δ(x)`.
    pub fn for_each_inner_point(
        &self,
        mesh: &Mesh1d,
        neighbors: &[usize],
        x: f64,
        mut visit: impl FnMut(usize, f64, f64),
    ) {
        let delta = mesh.delta();
        for &j in neighbors {
            let Some((lo, hi)) = intersect(mesh.element(j), x, delta) else {
                continue;
            };
            if lo < x && x < hi {
                for (y, w) in self.inner.mapped(lo, x) {
                    visit(j, y, w);
                }
                for (y, w) in self.inner.mapped(x, hi) {
                    visit(j, y, w);
                }
            } else {
                for (y, w) in self.inner.mapped(lo, hi) {
                    visit(j, y, w);
                }
            }
        }
    }

    /// `∫_{K_i} outer(x, Σ_j ∫_{K_j ∩ B_δ(x)} inner(x, y) dy) dx` over the
    /// horizon neighbors of `K_i`.
    pub fn nested_integrate(
        &self,
        mesh: &Mesh1d,
        i: usize,
        inner: impl Fn(f64, f64) -> f64,
        outer: impl Fn(f64, f64) -> f64,
    ) -> f64 {
        let neighbors = mesh.horizon_neighbors(i);
        self.outer_points(mesh, i)
            .into_iter()
            .map(|(x, w)| {
                let mut value = 0.0;
                self.for_each_inner_point(mesh, &neighbors, x, |_, y, wy| value += wy * inner(x, y));
                w * outer(x, value)
            })
            .sum()
    }
}

/// Breakpoints of element `i`: its endpoints plus every `x_k ± δ` strictly
/// inside, sorted, with near-duplicates merged.
fn outer_pieces(mesh: &Mesh1d, i: usize) -> Vec<f64> {
    let (a, b) = mesh.element(i);
    let delta = mesh.delta();
    let nodes = mesh.nodes();
    let tol = 1e-12 * (b - a).max(delta);
    let mut cuts = vec![a, b];
    for shift in [delta, -delta] {
        // nodes with a < x_k + shift < b
        let start = nodes.partition_point(|&x| x + shift <= a + tol);
        for &x in &nodes[start..] {
            let c = x + shift;
            if c >= b - tol {
                break;
            }
            cuts.push(c);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|next, prev| *next - *prev <= tol);
    // dedup keeps the first of a run; pin the right endpoint exactly
    if let Some(last) = cuts.last_mut() {
        *last = b;
    }
    cuts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..=30 {
            let rule = QuadRule::gauss_legendre(n);
            let wsum: f64 = rule.weights().iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "n = {n}");
            for deg in 0..2 * n {
                let approx = rule.integrate(-1.0, 1.0, |x| x.powi(deg as i32));
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n = {n}, degree {deg}");
            }
        }
    }

    #[test]
    fn gauss_points_are_sorted_and_interior() {
        let rule = QuadRule::gauss_legendre(17);
        assert!(rule.points().windows(2).all(|w| w[0] < w[1]));
        assert!(rule.points().iter().all(|x| x.abs() < 1.0));
    }

    #[test]
    fn intersect_cases() {
        let (lo, hi) = intersect((0.4, 0.6), 0.5, 0.05).unwrap();
        assert!((lo - 0.45).abs() < 1e-15 && (hi - 0.55).abs() < 1e-15);
        assert!(intersect((0.8, 1.0), 0.5, 0.05).is_none());
        let (lo, hi) = intersect((0.4, 0.6), 0.41, 0.05).unwrap();
        assert!((lo - 0.40).abs() < 1e-15 && (hi - 0.46).abs() < 1e-15);
    }

    #[test]
    fn outer_pieces_include_node_translates() {
        let mesh = Mesh1d::initial(0.1).unwrap();
        // element 3 is (0.4, 0.6); translates 0.5 (from 0.4 + 0.1 and 0.6 - 0.1)
        let cuts = outer_pieces(&mesh, 3);
        assert_eq!(cuts.len(), 3);
        assert!((cuts[1] - 0.5).abs() < 1e-14);
        assert_eq!(cuts[0], 0.4);
        assert_eq!(cuts[2], 0.6);
    }

    #[test]
    fn constant_inner_integrand_measures_ball() {
        let mesh = Mesh1d::initial(0.05).unwrap();
        let quad = HorizonQuadrature::new(4, 4);
        let value = quad.nested_integrate(&mesh, 3, |_, _| 1.0, |_, v| v);
        assert!((value - 2.0 * 0.05 * 0.2).abs() < 1e-13);
    }
}
