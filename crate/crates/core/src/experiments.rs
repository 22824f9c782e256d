//! Problem definitions, run configuration and the convergence-study driver.

use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use crate::adapt::{adaptive_loop, AdaptiveConfig};
use crate::analysis::{error_l2, fill_rates, relative_energy_error, EnergyDomain, ExperimentRecord};
use crate::assembly::{assemble_collar_correction, assemble_system, MixedSystem, TestNorm};
use crate::error::{Error, Result};
use crate::kernel::{
    exact_sharp, exact_smooth, forcing_sharp, forcing_smooth_local, forcing_smooth_nonlocal,
    KernelPair,
};
use crate::mesh::Mesh1d;
use crate::quadrature::{HorizonQuadrature, DEFAULT_N_OVER};
use crate::solver::{solve_mixed, MixedSolution};
use crate::space::Space;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    /// `u = x⁵` with the nonlocal forcing.
    SmoothNonlocal,
    /// `u = x⁵` data but the forcing of the local limit.
    SmoothLocalForcing,
    /// Boundary layer of width `ε` at `x = 1`.
    Sharp,
    /// `u = x`, `f = 1`; reproduced exactly by every discretization.
    Linear,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::SmoothNonlocal => "smooth-nonlocal",
            ProblemKind::SmoothLocalForcing => "smooth-local-forcing",
            ProblemKind::Sharp => "sharp",
            ProblemKind::Linear => "linear",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "smooth-nonlocal" => Ok(ProblemKind::SmoothNonlocal),
            "smooth-local-forcing" => Ok(ProblemKind::SmoothLocalForcing),
            "sharp" => Ok(ProblemKind::Sharp),
            "linear" => Ok(ProblemKind::Linear),
            other => Err(Error::config("problem", format!("unknown problem `{other}`"))),
        }
    }
}

/// How the prescribed data enters on the two collars.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorData {
    /// The exact data; the collars are never refined, so an interpolant there
    /// would freeze an `O(δ^{p+1})` consistency error.
    Exact,
    /// The trial-space nodal interpolant of the data.
    Interpolated,
}

impl FromStr for ExteriorData {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ExteriorData::Exact),
            "interpolated" => Ok(ExteriorData::Interpolated),
            other => Err(Error::config("exterior", format!("unknown exterior data `{other}`"))),
        }
    }
}

/// A manufactured problem plus the discretization choices that do not
/// depend on the mesh.
#[derive(Debug, Clone)]
pub struct Problem {
    pub kind: ProblemKind,
    pub eps: f64,
    pub p: usize,
    pub dp: usize,
    pub norm: TestNorm,
    pub n_over: usize,
    pub exterior: ExteriorData,
    /// Region of the recorded `S_δ` error.
    pub error_domain: EnergyDomain,
}

impl Problem {
    pub fn new(kind: ProblemKind, p: usize, dp: usize, norm: TestNorm) -> Self {
        Self {
            kind,
            eps: 0.01,
            p,
            dp,
            norm,
            n_over: DEFAULT_N_OVER,
            exterior: ExteriorData::Exact,
            error_domain: EnergyDomain::Interior,
        }
    }

    pub fn exact(&self, x: f64) -> f64 {
        match self.kind {
            ProblemKind::SmoothNonlocal | ProblemKind::SmoothLocalForcing => exact_smooth(x),
            ProblemKind::Sharp => exact_sharp(x, self.eps),
            ProblemKind::Linear => x,
        }
    }

    pub fn forcing(&self, x: f64, delta: f64) -> f64 {
        match self.kind {
            ProblemKind::SmoothNonlocal => forcing_smooth_nonlocal(x, self.eps, delta),
            ProblemKind::SmoothLocalForcing => forcing_smooth_local(x, self.eps),
            ProblemKind::Sharp => forcing_sharp(x, self.eps, delta),
            ProblemKind::Linear => 1.0,
        }
    }

    /// Assembles and solves on `mesh`, with collar data from the exact solution.
    pub fn solve(&self, mesh: Arc<Mesh1d>) -> Result<Solved> {
        if self.dp == 0 {
            return Err(Error::config("dp", "test enrichment must be at least 1"));
        }
        let delta = mesh.delta();
        let kernel = KernelPair::constant(delta)?;
        let trial = Space::new(mesh.clone(), self.p)?;
        let test = Space::new(mesh, self.p + self.dp)?;
        let quad = HorizonQuadrature::for_order(self.p + self.dp, self.n_over);
        let lift = trial.lift(|x| self.exact(x));
        let mut system = assemble_system(
            &trial,
            &test,
            &kernel,
            self.eps,
            self.norm,
            |x| self.forcing(x, delta),
            &lift,
            &quad,
        )?;
        if self.exterior == ExteriorData::Exact {
            let lifted = trial.combine(&vec![0.0; trial.num_free()], &lift);
            let last = trial.mesh().num_elements() - 1;
            let correction = |y: f64| {
                let j = if y < 0.0 { 0 } else { last };
                self.exact(y) - trial.evaluate_in(j, &lifted, y)
            };
            let c = assemble_collar_correction(&test, &kernel, self.eps, correction, &quad);
            for (f, c) in system.load.iter_mut().zip(c) {
                *f -= c;
            }
        }
        let solution = solve_mixed(&system)?;
        let coeffs = trial.combine(&solution.u, &lift);
        Ok(Solved {
            problem: self.clone(),
            trial,
            test,
            kernel,
            quad,
            system,
            solution,
            coeffs,
        })
    }
}

/// Output of [`Problem::solve`].
pub struct Solved {
    pub problem: Problem,
    pub trial: Space,
    pub test: Space,
    pub kernel: KernelPair,
    pub quad: HorizonQuadrature,
    pub system: MixedSystem,
    pub solution: MixedSolution,
    /// Full trial coefficients, collar data included.
    pub coeffs: Vec<f64>,
}

impl Solved {
    /// `u_h` on element `i`; on the collars this is the prescribed data.
    pub fn value_in(&self, i: usize, x: f64) -> f64 {
        if self.problem.exterior == ExteriorData::Exact && self.trial.mesh().is_exterior(i) {
            self.problem.exact(x)
        } else {
            self.trial.evaluate_in(i, &self.coeffs, x)
        }
    }

    /// Error row without rates.
    pub fn record(&self, step: usize) -> Result<ExperimentRecord> {
        let exact = |x: f64| self.problem.exact(x);
        let mesh = self.trial.mesh();
        Ok(ExperimentRecord {
            step,
            h_min: mesh.h_min(),
            h_max: mesh.h_max(),
            delta: mesh.delta(),
            n_trial: self.trial.num_free(),
            n_test: self.test.num_free(),
            err_energy: relative_energy_error(
                mesh,
                |i, x| self.value_in(i, x),
                exact,
                &self.kernel,
                &self.quad,
                self.problem.error_domain,
            )?,
            rate_energy: None,
            err_l2: error_l2(&self.trial, &self.coeffs, exact, &self.quad)?,
            rate_l2: None,
        })
    }

    /// `u_h(x)` for `x` in the extended domain.
    pub fn value(&self, x: f64) -> Result<f64> {
        let mesh = self.trial.mesh();
        let i = mesh.locate(x).ok_or(Error::OutOfDomain {
            x,
            lo: -mesh.delta(),
            hi: 1.0 + mesh.delta(),
        })?;
        Ok(self.value_in(i, x))
    }
}

/// Largest excursion of `u_h` outside `[0, 1]` over `Ω`, sampled at
/// `samples` equispaced points per interior element (endpoints included).
pub fn overshoot_metric(space: &Space, coeffs: &[f64], samples: usize) -> f64 {
    let mesh = space.mesh();
    let samples = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in mesh.interior_elements() {
        let (a, b) = mesh.element(i);
        for k in 0..samples {
            let x = a + (b - a) * k as f64 / (samples - 1) as f64;
            let u = space.evaluate_in(i, coeffs, x);
            worst = worst.max(u - 1.0).max(-u);
        }
    }
    worst + 0.0
}

/// `max |u_h - I_h u|` over `Ω`, sampled like [`overshoot_metric`], where
/// `I_h u` is the trial-space nodal interpolant of the exact solution.
/// Unlike the overshoot it also sees oscillations that stay inside `[0, 1]`.
pub fn interpolant_deviation(
    space: &Space,
    coeffs: &[f64],
    exact: impl Fn(f64) -> f64,
    samples: usize,
) -> f64 {
    let interp = space.interpolate(exact);
    let mesh = space.mesh();
    let samples = samples.max(2);
    let mut worst: f64 = 0.0;
    for i in mesh.interior_elements() {
        let (a, b) = mesh.element(i);
        for k in 0..samples {
            let x = a + (b - a) * k as f64 / (samples - 1) as f64;
            let d = space.evaluate_in(i, coeffs, x) - space.evaluate_in(i, &interp, x);
            worst = worst.max(d.abs());
        }
    }
    worst
}

pub const DEFAULT_OVERSHOOT_SAMPLES: usize = 1000;

/// How `δ` follows the interior mesh width `h` in uniform-h studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coupling {
    H,
    TwoH,
    HSquared,
    SqrtH,
}

impl Coupling {
    pub fn delta(&self, h: f64) -> f64 {
        match self {
            Coupling::H => h,
            Coupling::TwoH => 2.0 * h,
            Coupling::HSquared => h * h,
            Coupling::SqrtH => h.sqrt(),
        }
    }
}

impl fmt::Display for Coupling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coupling::H => "h",
            Coupling::TwoH => "2h",
            Coupling::HSquared => "h^2",
            Coupling::SqrtH => "sqrt(h)",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    UniformH,
    UniformP,
    Adaptive,
}

impl FromStr for Refinement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-h" => Ok(Refinement::UniformH),
            "uniform-p" => Ok(Refinement::UniformP),
            "adaptive" => Ok(Refinement::Adaptive),
            other => Err(Error::config("refinement", format!("unknown refinement `{other}`"))),
        }
    }
}

/// Flat run description; see [`RunConfig::set`] for the recognized keys.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: ProblemKind,
    pub eps: f64,
    pub delta: f64,
    /// `None` keeps `delta` fixed.
    pub coupling: Option<Coupling>,
    pub p: usize,
    pub dp: usize,
    pub norm: TestNorm,
    pub refinement: Refinement,
    /// Refinements after the initial solve; ignored by uniform-p.
    pub steps: usize,
    pub theta: f64,
    pub n_over: usize,
    pub exterior: ExteriorData,
    pub error_domain: EnergyDomain,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            problem: ProblemKind::SmoothNonlocal,
            eps: 0.01,
            delta: 0.1,
            coupling: None,
            p: 1,
            dp: 2,
            norm: TestNorm::App,
            refinement: Refinement::UniformH,
            steps: 8,
            theta: 0.1,
            n_over: DEFAULT_N_OVER,
            exterior: ExteriorData::Exact,
            error_domain: EnergyDomain::Interior,
            output: None,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

impl RunConfig {
    /// Parses `key = value` lines; blank lines and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}", lineno + 1), "expected `key = value`")
            })?;
            cfg.set(key.trim(), value.trim())?;
        }
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "problem" => self.problem = value.parse()?,
            "eps" => self.eps = parse_num(key, value)?,
            "delta" => self.delta = parse_num(key, value)?,
            "coupling" => {
                self.coupling = match value {
                    "fixed" => None,
                    "h" => Some(Coupling::H),
                    "2h" => Some(Coupling::TwoH),
                    "h^2" => Some(Coupling::HSquared),
                    "sqrt(h)" => Some(Coupling::SqrtH),
                    other => {
                        return Err(Error::config(key, format!("unknown coupling `{other}`")))
                    }
                }
            }
            "p" => self.p = parse_num(key, value)?,
            "dp" => self.dp = parse_num(key, value)?,
            "norm" => self.norm = value.parse()?,
            "refinement" => self.refinement = value.parse()?,
            "steps" => self.steps = parse_num(key, value)?,
            "theta" => self.theta = parse_num(key, value)?,
            "n_over" => self.n_over = parse_num(key, value)?,
            "exterior" => self.exterior = value.parse()?,
            "error_domain" => self.error_domain = value.parse()?,
            "output" => self.output = Some(PathBuf::from(value)),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.coupling.is_some() && self.refinement != Refinement::UniformH {
            return Err(Error::config("coupling", "only valid with refinement = uniform-h"));
        }
        if self.dp < 1 {
            return Err(Error::config("dp", "must be at least 1"));
        }
        if self.p < 1 {
            return Err(Error::config("p", "must be at least 1"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(Error::config("eps", "must be positive"));
        }
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::config("delta", "must be positive"));
        }
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::config("theta", "must lie in (0, 1]"));
        }
        if self.n_over == 0 {
            return Err(Error::config("n_over", "must be positive"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Problem {
        Problem {
            kind: self.problem,
            eps: self.eps,
            p: self.p,
            dp: self.dp,
            norm: self.norm,
            n_over: self.n_over,
            exterior: self.exterior,
            error_domain: self.error_domain,
        }
    }
}

/// Executes the study described by `config`; rates are filled in.
pub fn run(config: &RunConfig) -> Result<Vec<ExperimentRecord>> {
    config.validate()?;
    let problem = config.problem();
    let mut records = match config.refinement {
        Refinement::UniformH => {
            let mut records = Vec::with_capacity(config.steps + 1);
            let mut mesh = Mesh1d::initial(config.delta)?;
            for step in 0..=config.steps {
                let n_interior = 5usize << step;
                if let Some(c) = config.coupling {
                    mesh = Mesh1d::uniform(c.delta(1.0 / n_interior as f64), n_interior)?;
                } else if step > 0 {
                    mesh = mesh.refine_uniform();
                }
                let solved = problem.solve(Arc::new(mesh.clone()))?;
                records.push(solved.record(step)?);
            }
            records
        }
        Refinement::UniformP => {
            let mesh = Arc::new(Mesh1d::initial(config.delta)?);
            (1..=4)
                .map(|p| {
                    let problem = Problem { p, ..problem.clone() };
                    problem.solve(mesh.clone())?.record(p - 1)
                })
                .collect::<Result<Vec<_>>>()?
        }
        Refinement::Adaptive => {
            let adapt = AdaptiveConfig {
                steps: config.steps,
                theta: config.theta,
            };
            adaptive_loop(&problem, Mesh1d::initial(config.delta)?, &adapt)?.records
        }
    };
    fill_rates(&mut records);
    Ok(records)
}

pub fn write_csv(records: &[ExperimentRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", ExperimentRecord::CSV_HEADER)?;
    for r in records {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

/// Several labelled runs in one table, with a leading `series` column.
pub fn write_series_csv(
    series: &[(String, Vec<ExperimentRecord>)],
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(out, "series,{}", ExperimentRecord::CSV_HEADER)?;
    for (label, records) in series {
        for r in records {
            writeln!(out, "{label},{}", r.csv_row())?;
        }
    }
    Ok(())
}

pub const HORIZONS: [f64; 4] = [0.1, 0.01, 0.001, 0.0001];

/// Uniform h-refinement, `p = 1`, `δp = 2`, one series per horizon.
pub fn preset_table1(norm: TestNorm) -> Result<Vec<(String, Vec<ExperimentRecord>)>> {
    HORIZONS
        .iter()
        .map(|&delta| {
            let cfg = RunConfig {
                delta,
                norm,
                ..RunConfig::default()
            };
            Ok((format!("delta={delta}"), run(&cfg)?))
        })
        .collect()
}

/// Uniform p-refinement on the initial mesh, one series per horizon.
pub fn preset_table3(norm: TestNorm, dp: usize) -> Result<Vec<(String, Vec<ExperimentRecord>)>> {
    HORIZONS
        .iter()
        .map(|&delta| {
            let cfg = RunConfig {
                delta,
                dp,
                norm,
                refinement: Refinement::UniformP,
                ..RunConfig::default()
            };
            Ok((format!("delta={delta}"), run(&cfg)?))
        })
        .collect()
}

/// Local-forcing runs with `δ` tied to `h`, one series per coupling.
pub fn preset_table7(norm: TestNorm) -> Result<Vec<(String, Vec<ExperimentRecord>)>> {
    [Coupling::H, Coupling::TwoH, Coupling::HSquared, Coupling::SqrtH]
        .iter()
        .map(|&c| {
            let cfg = RunConfig {
                problem: ProblemKind::SmoothLocalForcing,
                coupling: Some(c),
                norm,
                ..RunConfig::default()
            };
            Ok((format!("delta={c}"), run(&cfg)?))
        })
        .collect()
}

/// Overshoot and interpolant deviation of the coarse sharp-layer solution
/// for both test norms.
#[derive(Debug, Clone, Copy)]
pub struct SharpComparison {
    pub delta: f64,
    pub app: f64,
    pub eng: f64,
    pub app_deviation: f64,
    pub eng_deviation: f64,
}

/// Initial mesh, `p = 1`, `δp = 6`.
pub fn sharp_demo(delta: f64, samples: usize) -> Result<SharpComparison> {
    let mesh = Arc::new(Mesh1d::initial(delta)?);
    let metrics = |norm| -> Result<(f64, f64)> {
        let solved = Problem::new(ProblemKind::Sharp, 1, 6, norm).solve(mesh.clone())?;
        let exact = |x: f64| solved.problem.exact(x);
        Ok((
            overshoot_metric(&solved.trial, &solved.coeffs, samples),
            interpolant_deviation(&solved.trial, &solved.coeffs, exact, samples),
        ))
    };
    let (app, app_deviation) = metrics(TestNorm::App)?;
    let (eng, eng_deviation) = metrics(TestNorm::Eng)?;
    Ok(SharpComparison {
        delta,
        app,
        eng,
        app_deviation,
        eng_deviation,
    })
}
