//! Nonlocal diffusion/convection kernel pair and the manufactured data used
//! by the benchmark problems.
//!
//! Kernels are radial with support in the closed ball of radius `delta`. In one
//! dimension the scaled kernels are
//!
//! ```text
//! γ_diff_δ(|s|) = δ^-3 γ_diff(|s|/δ),    γ_conv_δ(|s|) = δ^-2 γ_conv(|s|/δ)
//! ```
//!
//! and the reference profiles satisfy `∫ γ_diff(|s|) s² ds = 1` and
//! `∫ γ_conv(|s|) |s| ds = 1/η` over `[-1, 1]`.

use crate::error::{Error, Result};
use crate::quadrature::QuadRule;

/// Reference profile on `[0, 1]`.
pub type Profile = fn(f64) -> f64;

fn constant_diffusion_profile(_r: f64) -> f64 {
    1.5
}

fn linear_convection_profile(r: f64) -> f64 {
    1.5 * r
}

/// Diffusion/convection kernel pair sharing a horizon.
#[derive(Clone, Copy)]
pub struct KernelPair {
    delta: f64,
    eta: f64,
    diff_profile: Profile,
    conv_profile: Profile,
}

impl std::fmt::Debug for KernelPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KernelPair")
            .field("delta", &self.delta)
            .field("eta", &self.eta)
            .finish_non_exhaustive()
    }
}

impl KernelPair {
    /// The piecewise-constant diffusion kernel `3/(2δ³)` paired with the
    /// convection kernel `3|s|/(2δ³)`, full-ball influence region.
    pub fn constant(delta: f64) -> Result<Self> {
        check_horizon(delta)?;
        Ok(Self {
            delta,
            eta: 1.0,
            diff_profile: constant_diffusion_profile,
            conv_profile: linear_convection_profile,
        })
    }

    /// Custom profiles. The moment normalizations and the sign/monotonicity
    /// requirements are checked on a sample grid.
    pub fn with_profiles(delta: f64, eta: f64, diff: Profile, conv: Profile) -> Result<Self> {
        check_horizon(delta)?;
        if !(eta > 0.0 && eta <= 1.0) {
            return Err(Error::InvalidKernel(format!("sector fraction {eta} not in (0, 1]")));
        }
        let samples = 512;
        let mut prev = f64::INFINITY;
        for k in 0..=samples {
            let r = k as f64 / samples as f64;
            let (d, c) = (diff(r), conv(r));
            if !(d >= 0.0 && c >= 0.0) {
                return Err(Error::InvalidKernel(format!("negative profile value at r = {r}")));
            }
            if d > prev * (1.0 + 1e-12) {
                return Err(Error::InvalidKernel(format!(
                    "diffusion profile increases at r = {r}"
                )));
            }
            prev = d;
        }
        let rule = QuadRule::gauss_legendre(24);
        let panels = 64;
        let second = 2.0 * rule.integrate_composite(0.0, 1.0, panels, |r| diff(r) * r * r);
        let first = 2.0 * rule.integrate_composite(0.0, 1.0, panels, |r| conv(r) * r);
        if (second - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidKernel(format!(
                "second moment of the diffusion profile is {second}, expected 1"
            )));
        }
        if (first - 1.0 / eta).abs() > 1e-8 {
            return Err(Error::InvalidKernel(format!(
                "first moment of the convection profile is {first}, expected {}",
                1.0 / eta
            )));
        }
        Ok(Self {
            delta,
            eta,
            diff_profile: diff,
            conv_profile: conv,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// Same profiles, different horizon.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        check_horizon(delta)?;
        Ok(Self { delta, ..*self })
    }

    /// `γ_diff_δ(|s|)`; zero outside the closed ball.
    #[inline]
    pub fn diffusion(&self, s: f64) -> f64 {
        let r = s.abs() / self.delta;
        if r > 1.0 {
            0.0
        } else {
            (self.diff_profile)(r) / (self.delta * self.delta * self.delta)
        }
    }

    /// `γ_conv_δ(|s|)`, without the direction factor.
    #[inline]
    pub fn convection(&self, s: f64) -> f64 {
        let r = s.abs() / self.delta;
        if r > 1.0 {
            0.0
        } else {
            (self.conv_profile)(r) / (self.delta * self.delta)
        }
    }

    /// `sign(s) γ_conv_δ(|s|)`, the integrand weight of the nonlocal gradient
    /// for unit velocity. `sign(0) = 0`.
    #[inline]
    pub fn directed_convection(&self, s: f64) -> f64 {
        if s == 0.0 {
            0.0
        } else {
            s.signum() * self.convection(s)
        }
    }
}

fn check_horizon(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidHorizon(delta))
    }
}

/// Smooth manufactured solution `u(x) = x⁵`.
pub fn exact_smooth(x: f64) -> f64 {
    x.powi(5)
}

/// `(-ε L_δ + G_δ) x⁵` for the constant kernel pair.
pub fn forcing_smooth_nonlocal(x: f64, eps: f64, delta: f64) -> f64 {
    let d2 = delta * delta;
    -eps * (20.0 * x.powi(3) + 6.0 * d2 * x) + 5.0 * x.powi(4) + 6.0 * d2 * x * x + 3.0 / 7.0 * d2 * d2
}

/// Local forcing `-ε u'' + u'` for `u = x⁵`.
pub fn forcing_smooth_local(x: f64, eps: f64) -> f64 {
    -20.0 * eps * x.powi(3) + 5.0 * x.powi(4)
}

/// Boundary-layer solution `(e^{(x-1)/ε} - 1) / (e^{-1/ε} - 1)`.
pub fn exact_sharp(x: f64, eps: f64) -> f64 {
    ((x - 1.0) / eps).exp_m1() / (-1.0 / eps).exp_m1()
}

/// `(-ε L_δ + G_δ)` applied to [`exact_sharp`] for the constant kernel pair.
///
/// The bracket `3(2 + cosh a)/a² - 9 sinh a / a³` with `a = δ/ε` cancels to
/// `O(a²)` for small `a`, so it is summed as a power series there. For larger
/// `a` the hyperbolic terms are merged with `e^{(x-1)/ε}` before
/// exponentiation so `e^{δ/ε}` is never formed on its own.
pub fn forcing_sharp(x: f64, eps: f64, delta: f64) -> f64 {
    let a = delta / eps;
    let t = (x - 1.0) / eps;
    let scale = 1.0 / (eps * (-1.0 / eps).exp_m1());
    if a < 2.0 {
        scale * sharp_bracket_series(a) * t.exp()
    } else {
        let cosh_e = 0.5 * ((t + a).exp() + (t - a).exp());
        let sinh_e = 0.5 * ((t + a).exp() - (t - a).exp());
        let a2 = a * a;
        scale * (3.0 * (2.0 * t.exp() + cosh_e) / a2 - 9.0 * sinh_e / (a2 * a))
    }
}

/// `Σ_{k≥2} 6(k-1)/(2k+1)! a^{2k-2}`.
fn sharp_bracket_series(a: f64) -> f64 {
    let a2 = a * a;
    // term_k = a^{2k-2} / (2k+1)!
    let mut term = a2 / 120.0;
    let mut sum = 0.0;
    for k in 2..60 {
        let contrib = 6.0 * (k as f64 - 1.0) * term;
        sum += contrib;
        if contrib.abs() <= f64::EPSILON * sum.abs() {
            break;
        }
        let next = 2.0 * k as f64 + 2.0;
        term *= a2 / (next * (next + 1.0));
    }
    sum
}
