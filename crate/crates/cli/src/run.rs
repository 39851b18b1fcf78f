use poincare_korn::constants::{paper_bound, paper_norm_estimate};
use poincare_korn::geometry::{affine_hull_dim, diameter, l_shape, measure, unit_square};
use poincare_korn::verify::{bound_inputs, counterexample_flat, injectivity_report, PreparedCase};
use poincare_korn::{BoundaryPortion, CaseKind, CertifySetup, Domain, NullKind, PolySpace, Region};
use rayon::prelude::*;

use crate::config::{build_region, RegionSpec, RunConfig, Scenario};
use crate::report::{
    BoundsSummary, CaseResult, Document, FlatCheck, GeometrySummary, ScenarioReport, Status, SweepRow,
};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Bounds,
    Certify,
    CheckFlat,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bounds => "bounds",
            Command::Certify => "certify",
            Command::CheckFlat => "check-flat",
        }
    }
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_pool<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

pub fn geometry_summary(setup: &CertifySetup) -> GeometrySummary {
    let d = &setup.domain;
    GeometrySummary {
        kind: if d.as_ball().is_some() { "ball" } else { "mesh" }.to_string(),
        dim: d.dim(),
        measure: measure(d).unwrap_or(f64::NAN),
        diameter: diameter(d),
        triangles: d.as_mesh().map(|m| m.triangles.len()),
        region_measure: setup.region.as_ref().and_then(|r| measure(r).ok()),
        portion_measure: setup.portion.as_ref().and_then(|p| measure(p).ok()),
        portion_flat: setup.portion.as_ref().and_then(|p| affine_hull_dim(p).ok()).map(|h| h.flat),
    }
}

pub fn bounds_case(setup: &CertifySetup, case: CaseKind) -> CaseResult {
    let summary = bound_inputs(setup, case).and_then(
        |PreparedCase {
             bound_case,
             inputs,
             constants,
             degree,
             ..
         }| {
            Ok(BoundsSummary {
                paper_norm_estimate: paper_norm_estimate(bound_case, &inputs)?,
                paper_bound: paper_bound(bound_case, &inputs)?,
                bound_case,
                degree,
                inputs,
                constants,
            })
        },
    );
    match summary {
        Ok(b) => CaseResult {
            case: case.name().to_string(),
            status: if b.paper_bound.is_finite() { Status::Pass } else { Status::Fail },
            error: None,
            bounds: Some(b),
            report: None,
        },
        Err(e) => CaseResult::error(case.name(), e),
    }
}

pub fn certify_case(setup: &CertifySetup, case: CaseKind) -> CaseResult {
    match setup.certify(case) {
        Ok(r) => CaseResult {
            case: case.name().to_string(),
            status: if r.passed { Status::Pass } else { Status::Fail },
            error: None,
            bounds: None,
            report: Some(r),
        },
        Err(e) => CaseResult::error(case.name(), e),
    }
}

pub fn flat_check(setup: &CertifySetup) -> Result<FlatCheck, poincare_korn::Error> {
    let portion = setup
        .portion
        .as_ref()
        .ok_or(poincare_korn::Error::MissingInput("boundary portion"))?;
    let hull = affine_hull_dim(portion)?;
    let scalar = PolySpace::build(&setup.domain, setup.scalar_degree, 1)?;
    let vector = PolySpace::build(&setup.domain, setup.vector_degree, 2)?;
    let counterexample = if hull.flat {
        Some(counterexample_flat(&scalar, portion)?)
    } else {
        None
    };
    let affine = injectivity_report(&scalar, portion, NullKind::Affine)?;
    let rigid = injectivity_report(&vector, portion, NullKind::Rigid)?;
    let consistent = match &counterexample {
        Some(c) => c.passed && !affine.injective,
        None => affine.injective,
    } && rigid.injective;
    Ok(FlatCheck {
        hull_dim: hull.dim,
        flat: hull.flat,
        hull_eigenvalues: hull.eigenvalues,
        counterexample,
        affine_injectivity: affine,
        rigid_injectivity: rigid,
        consistent,
    })
}

/// Runs every case of a scenario on a pool of `scenario.workers` threads.
pub fn run_scenario(scenario: &Scenario, command: Command) -> ScenarioReport {
    let setup = &scenario.setup;
    let mut report = ScenarioReport {
        name: scenario.name.clone(),
        geometry: geometry_summary(setup),
        scalar_degree: setup.scalar_degree,
        vector_degree: setup.vector_degree,
        trials: setup.trials,
        seed: setup.seed,
        cases: Vec::new(),
        flat_check: None,
        passed: true,
    };
    match command {
        Command::CheckFlat => match flat_check(setup) {
            Ok(c) => {
                report.passed = c.consistent;
                report.flat_check = Some(c);
            }
            Err(e) => {
                report.passed = false;
                report.cases.push(CaseResult::error("check-flat", e));
            }
        },
        Command::Bounds | Command::Certify => {
            report.cases = with_pool(scenario.workers, || {
                scenario
                    .cases
                    .par_iter()
                    .map(|&case| match command {
                        Command::Bounds => bounds_case(setup, case),
                        _ => certify_case(setup, case),
                    })
                    .collect()
            });
            report.passed = report.cases.iter().all(CaseResult::passed);
        }
    }
    report
}

pub fn run_scenarios(scenarios: &[Scenario], command: Command) -> Document {
    let reports = scenarios.iter().map(|s| run_scenario(s, command)).collect();
    Document::new(command.name(), reports, Vec::new())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Rho,
    Degree,
    RegionFraction,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Rho => "rho",
            SweepParam::Degree => "degree",
            SweepParam::RegionFraction => "region_fraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

impl SweepSpec {
    /// Parses `param=start:stop:count`, with `count` evenly spaced values
    /// including both ends.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let bad = || CliError::ConfigInvalid(format!("sweep '{text}' is not of the form param=start:stop:count"));
        let (name, range) = text.split_once('=').ok_or_else(bad)?;
        let param = match name.trim() {
            "rho" => SweepParam::Rho,
            "degree" => SweepParam::Degree,
            "region_fraction" | "fraction" => SweepParam::RegionFraction,
            other => return Err(CliError::ConfigInvalid(format!("unknown sweep parameter '{other}'"))),
        };
        let parts: Vec<&str> = range.split(':').map(str::trim).collect();
        let [start, stop, count] = parts[..] else {
            return Err(bad());
        };
        let start: f64 = start.parse().map_err(|_| bad())?;
        let stop: f64 = stop.parse().map_err(|_| bad())?;
        let count: usize = count.parse().map_err(|_| bad())?;
        if count == 0 || !start.is_finite() || !stop.is_finite() {
            return Err(bad());
        }
        let values = if count == 1 {
            vec![start]
        } else {
            (0..count)
                .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
                .collect()
        };
        Ok(Self { param, values })
    }

    fn check(&self, scenario: &Scenario) -> Result<(), CliError> {
        let mismatch = |m: String| Err(CliError::ParameterMismatch(m));
        if scenario.cases.is_empty() {
            return mismatch("no cases to sweep".into());
        }
        match self.param {
            SweepParam::Rho => {
                if scenario.setup.domain.as_ball().is_none() {
                    return mismatch("rho needs a ball domain".into());
                }
                if let Some(v) = self.values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
                    return mismatch(format!("rho = {v} is outside (0, 1)"));
                }
            }
            SweepParam::RegionFraction => {
                if let Some(v) = self.values.iter().find(|v| !(**v > 0.0 && **v <= 1.0)) {
                    return mismatch(format!("region fraction {v} is outside (0, 1]"));
                }
            }
            SweepParam::Degree => {
                if let Some(v) = self.values.iter().find(|v| v.fract() != 0.0 || **v < 1.0) {
                    return mismatch(format!("degree {v} is not a positive integer"));
                }
                return Ok(());
            }
        }
        match scenario.cases.iter().find(|c| !c.needs_region()) {
            Some(c) => mismatch(format!("{} is parametrized by a boundary portion, not a region", c.name())),
            None => Ok(()),
        }
    }

    fn apply(&self, base: &CertifySetup, value: f64) -> Result<CertifySetup, CliError> {
        let mut setup = base.clone();
        match self.param {
            SweepParam::Degree => {
                setup.scalar_degree = value as usize;
                setup.vector_degree = value as usize;
            }
            SweepParam::Rho => {
                let radius = setup.domain.as_ball().expect("checked").radius;
                setup.region = Some(
                    Region::concentric_ball(&setup.domain, value * radius)
                        .map_err(|e| CliError::ParameterMismatch(e.to_string()))?,
                );
            }
            SweepParam::RegionFraction => {
                let spec = RegionSpec {
                    fraction: Some(value),
                    ..Default::default()
                };
                setup.region = Some(build_region(&spec, &setup.domain)?);
            }
        }
        Ok(setup)
    }
}

fn sweep_row(param: SweepParam, value: f64, setup: Result<CertifySetup, CliError>, case: CaseKind) -> SweepRow {
    let mut row = SweepRow {
        parameter: param.name().to_string(),
        value,
        case: case.name().to_string(),
        status: Status::Error,
        error: None,
        degree: None,
        q: None,
        norm_t: None,
        paper_norm_estimate: None,
        ratio: None,
        sup_ratio: None,
        composed_bound: None,
        paper_bound: None,
    };
    let report = setup.and_then(|s| s.certify(case).map_err(|e| CliError::Report(e.to_string())));
    match report {
        Ok(r) => {
            row.status = if r.passed { Status::Pass } else { Status::Fail };
            row.degree = Some(r.degree);
            row.q = r.inputs.q;
            row.norm_t = Some(r.norm_t);
            row.paper_norm_estimate = Some(r.paper_norm_estimate);
            row.ratio = Some(r.norm_t / r.paper_norm_estimate);
            row.sup_ratio = Some(r.sup_ratio);
            row.composed_bound = Some(r.composed_bound);
            row.paper_bound = Some(r.paper_bound);
        }
        Err(CliError::Report(e)) => row.error = Some(e),
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// One row per (value, case), in input order.
pub fn run_sweep(scenario: &Scenario, spec: &SweepSpec) -> Result<Document, CliError> {
    spec.check(scenario)?;
    let points: Vec<(f64, CaseKind)> = spec
        .values
        .iter()
        .flat_map(|&v| scenario.cases.iter().map(move |&c| (v, c)))
        .collect();
    let rows: Vec<SweepRow> = with_pool(scenario.workers, || {
        points
            .par_iter()
            .map(|&(v, c)| sweep_row(spec.param, v, spec.apply(&scenario.setup, v), c))
            .collect()
    });
    let summary = ScenarioReport {
        name: scenario.name.clone(),
        geometry: geometry_summary(&scenario.setup),
        scalar_degree: scenario.setup.scalar_degree,
        vector_degree: scenario.setup.vector_degree,
        trials: scenario.setup.trials,
        seed: scenario.setup.seed,
        cases: Vec::new(),
        flat_check: None,
        passed: true,
    };
    Ok(Document::new("sweep", vec![summary], rows))
}

/// Loads a config and applies the command line overrides.
pub fn load_scenario(
    config: &RunConfig,
    cases: &[String],
    degree: Option<usize>,
    seed: Option<u64>,
    trials: Option<usize>,
    workers: Option<usize>,
    need_trials: bool,
) -> Result<Scenario, CliError> {
    let mut config = config.clone();
    if !cases.is_empty() {
        config.cases = cases.to_vec();
    }
    if let Some(d) = degree {
        config.degrees.scalar = d;
        config.degrees.vector = d;
    }
    if let Some(n) = trials {
        let t = config.trials.get_or_insert(crate::config::Trials { count: n, seed: None });
        t.count = n;
    }
    if let Some(w) = workers {
        config.workers = Some(w);
    }
    config.scenario(seed, need_trials)
}

fn demo_setup(domain: Domain, trials: usize, seed: u64) -> CertifySetup {
    let mut s = CertifySetup::new(domain);
    s.trials = trials;
    s.seed = seed;
    s
}

/// The built-in scenarios: square with a quarter region, square with one
/// and two edges, balls in balls for `n = 2, 3`, and the L-shape.
pub fn demo_scenarios(trials: usize, seed: u64, workers: usize) -> Result<Vec<Scenario>, poincare_korn::Error> {
    let square = Domain::mesh(unit_square(4))?;
    let lsh = Domain::mesh(l_shape(2))?;
    let mut out = Vec::new();
    let mut push = |name: &str, setup: CertifySetup, cases: Vec<CaseKind>| {
        out.push(Scenario {
            name: name.to_string(),
            setup,
            cases,
            workers,
        })
    };

    let quarter = Region::centroid_box(&square, [0.0, 0.0], [0.5, 0.5])?;
    push(
        "square_quarter",
        demo_setup(square.clone(), trials, seed).with_region(quarter),
        vec![CaseKind::PoincareE, CaseKind::H2E, CaseKind::KornE],
    );
    let bottom = BoundaryPortion::from_tags(&square, &["bottom"])?;
    push(
        "square_edge",
        demo_setup(square.clone(), trials, seed).with_portion(bottom),
        vec![CaseKind::PoincareGamma, CaseKind::H2AffineTrace, CaseKind::KornRhoTrace],
    );
    let corner = BoundaryPortion::from_tags(&square, &["bottom", "left"])?;
    push(
        "square_two_edges",
        demo_setup(square, trials, seed).with_portion(corner),
        vec![CaseKind::H2TauTrace],
    );
    for n in [2, 3] {
        let ball = Domain::unit_ball(n)?;
        let inner = Region::concentric_ball(&ball, 0.5)?;
        let s = demo_setup(ball, trials, seed).with_region(inner);
        push(&format!("ball{n}_rho_0.5"), s, vec![CaseKind::H2Balls, CaseKind::KornBalls]);
    }
    let inner_corner = BoundaryPortion::from_tags(&lsh, &["top_low", "right_high"])?;
    let lower = Region::centroid_box(&lsh, [0.0, 0.0], [1.0, 1.0])?;
    push(
        "l_shape",
        demo_setup(lsh, trials, seed).with_region(lower).with_portion(inner_corner),
        vec![CaseKind::PoincareE, CaseKind::H2TauTrace, CaseKind::KornE, CaseKind::KornRhoTrace],
    );
    Ok(out)
}
