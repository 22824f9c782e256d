mod common;

use common::{hat, horizon_double, simpson};
use nlpg_core::quadrature::QuadRule;
use nlpg_core::{HorizonQuadrature, KernelPair, Mesh1d};

#[test]
fn rules_match_adaptive_oracle_on_polynomials() {
    for n in [4usize, 9, 16, 23] {
        let rule = QuadRule::gauss_legendre(n);
        let deg = 2 * n - 1;
        let f = |x: f64| (0..=deg).map(|k| x.powi(k as i32) * (-1f64).powi(k as i32) / (k + 1) as f64).sum::<f64>();
        let q = rule.integrate(-0.3, 1.7, f);
        let oracle = simpson(&f, -0.3, 1.7, 1e-14);
        assert!((q - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "n {n}: {q} vs {oracle}");
    }
}

#[test]
fn nested_polynomial_integrand_matches_oracle() {
    let delta = 0.13;
    let mesh = Mesh1d::uniform(delta, 7).unwrap();
    let quad = HorizonQuadrature::new(10, 10);
    let g = |x: f64, y: f64| (y - x).powi(2) * (1.0 + x * y.powi(3)) - 0.5 * x.powi(4) * y;
    let breaks: Vec<f64> = mesh.nodes().to_vec();
    for i in mesh.interior_elements() {
        let value = quad.nested_integrate(&mesh, i, g, |_, v| v);
        let oracle = horizon_double(&g, mesh.element(i), (-delta, 1.0 + delta), delta, &breaks, 1e-14);
        assert!((value - oracle).abs() <= 1e-12 * oracle.abs().max(1.0), "element {i}: {value} vs {oracle}");
    }
}

#[test]
fn nested_diffusion_of_quintic_against_hat() {
    let delta = 0.1;
    let mesh = Mesh1d::initial(delta).unwrap();
    let k = KernelPair::constant(delta).unwrap();
    let quad = HorizonQuadrature::for_order(3, 13);
    let phi = hat(0.2, 0.4, 0.6);
    let mut value = 0.0;
    for i in [2, 3] {
        value += quad.nested_integrate(
            &mesh,
            i,
            |x, y| 2.0 * k.diffusion(y - x) * (y.powi(5) - x.powi(5)),
            |x, v| v * phi(x),
        );
    }
    let oracle = simpson(&|x| phi(x) * (20.0 * x.powi(3) + 6.0 * delta * delta * x), 0.2, 0.4, 1e-15)
        + simpson(&|x| phi(x) * (20.0 * x.powi(3) + 6.0 * delta * delta * x), 0.4, 0.6, 1e-15);
    assert!((value - oracle).abs() <= 1e-10 * oracle.abs(), "{value} vs {oracle}");
}

#[test]
fn nested_convection_of_linear_recovers_unit_gradient() {
    let delta = 0.07;
    let mesh = Mesh1d::initial(delta).unwrap();
    let k = KernelPair::constant(delta).unwrap();
    let quad = HorizonQuadrature::for_order(2, 13);
    let phi = hat(0.4, 0.6, 0.8);
    let value: f64 = [3, 4]
        .iter()
        .map(|&i| quad.nested_integrate(&mesh, i, |x, y| k.directed_convection(y - x) * (y - x), |x, v| v * phi(x)))
        .sum();
    // G_δ x = 1, so the result is ∫ φ = 0.2
    assert!((value - 0.2).abs() <= 1e-13, "{value}");
}

#[test]
fn convection_integrand_is_insensitive_to_inner_order() {
    let delta = 0.1;
    let mesh = Mesh1d::initial(delta).unwrap();
    let k = KernelPair::constant(delta).unwrap();
    let u = |x: f64| x.powi(3) - 0.4 * x;
    let integrate = |n_in: usize| -> f64 {
        let quad = HorizonQuadrature::new(16, n_in);
        mesh.interior_elements()
            .map(|i| quad.nested_integrate(&mesh, i, |x, y| k.directed_convection(y - x) * (u(y) - u(x)), |x, v| v * x.sin()))
            .sum()
    };
    let (a, b) = (integrate(8), integrate(16));
    assert!((a - b).abs() < 1e-12, "{a} vs {b}");
}

#[test]
fn constant_integrand_measures_the_ball() {
    let delta = 0.01;
    let mesh = Mesh1d::initial(delta).unwrap();
    let quad = HorizonQuadrature::for_order(1, 13);
    for i in mesh.interior_elements() {
        let v = quad.nested_integrate(&mesh, i, |_, _| 1.0, |_, v| v);
        assert!((v - 2.0 * delta * mesh.width(i)).abs() <= 1e-13);
    }
}
