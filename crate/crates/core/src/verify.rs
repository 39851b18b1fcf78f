//! Certification of the composed bounds on the trial space.
//!
//! For a constraint operator `T` with null space `X_0`, the worst case
//! `sup ||u - Tu||_X / ||Lu||` over the trial space is a generalized
//! eigenvalue. It is compared against random samples from below and against
//! the Meyers composition and the explicit formula from above.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constants::{
    base_constant, corollary_constants, meyers_compose, paper_bound, paper_norm_estimate, sharp_constant, BoundCase,
    BoundInputs, ConstantEstimate, ConstantKind,
};
use crate::error::{Error, Result};
use crate::geometry::{
    affine_hull_dim, centroid, diameter, measure, quadrature_points, BoundaryPortion, Domain, Region, RegionKind,
};
use crate::linalg::{complement_basis, numerical_kernel_dim, pencil_max_deflated, symmetrize, KERNEL_TOLERANCE};
use crate::operators::{
    build_projection, centered_affine_basis, centered_rigid_basis, matrix_operator_norm, op_subtract, operator_norm,
    NormKind, ProjKind, ProjectionOp,
};
use crate::polyspace::{Form, NullKind, PolySpace, DEFAULT_SCALAR_DEGREE, DEFAULT_VECTOR_DEGREE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub relative: f64,
    pub absolute: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            relative: 1e-8,
            absolute: 1e-12,
        }
    }
}

impl Tolerances {
    /// `lhs <= rhs` up to the relative slack with an absolute floor.
    pub fn le(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + (self.relative * rhs.abs()).max(self.absolute)
    }
}

struct RatioPencil {
    numerator: DMatrix<f64>,
    denominator: DMatrix<f64>,
    kernel: DMatrix<f64>,
}

fn ratio_pencil(space: &PolySpace, op: &ProjectionOp, x_norm: NormKind, l_form: Form<'_>) -> Result<RatioPencil> {
    if !matches!(l_form, Form::Grad | Form::Hessian | Form::SymGrad) {
        return Err(Error::InvalidArgument(format!("{:?} is not a seminorm form", l_form.kind())));
    }
    if !op.compatible_with(space) {
        return Err(Error::SpaceMismatch);
    }
    let gl = space.assemble_gram(l_form)?.matrix;
    let expected = op.null_kind.dimension(space.spatial_dim());
    let found = numerical_kernel_dim(&gl);
    let kernel = space.nullspace_basis(op.null_kind)?.vectors;
    let leak = (kernel.transpose() * &gl * &kernel).amax();
    if found != expected || leak > KERNEL_TOLERANCE * gl.amax() {
        return Err(Error::KernelMismatch { expected, found });
    }
    let residual = DMatrix::identity(space.dim(), space.dim()) - &op.matrix;
    let gx = space.assemble_gram(x_norm.form())?.matrix;
    Ok(RatioPencil {
        numerator: symmetrize(&(residual.transpose() * gx * &residual)),
        denominator: gl,
        kernel,
    })
}

/// `max ||u - Tu||_X / ||Lu||` over the trial space, with `X_0` deflated.
pub fn sup_ratio(space: &PolySpace, op: &ProjectionOp, x_norm: NormKind, l_form: Form<'_>) -> Result<f64> {
    let p = ratio_pencil(space, op, x_norm, l_form)?;
    let (lambda, _) = pencil_max_deflated(&p.numerator, &p.denominator, &p.kernel)?;
    Ok(lambda.max(0.0).sqrt())
}

/// Generator for trial `index` of a run seeded with `seed`; independent of
/// scheduling.
fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn normal_vector(rng: &mut ChaCha8Rng, len: usize) -> DVector<f64> {
    DVector::from_fn(len, |_, _| rng.sample(StandardNormal))
}

/// Largest ratio over `count` standard normal coefficient vectors with the
/// `X_0` component removed.
pub fn random_trials(
    space: &PolySpace,
    op: &ProjectionOp,
    x_norm: NormKind,
    l_form: Form<'_>,
    count: usize,
    seed: u64,
) -> Result<f64> {
    if count == 0 {
        return Err(Error::InvalidArgument("random trial count must be at least 1".into()));
    }
    let p = ratio_pencil(space, op, x_norm, l_form)?;
    let complement = complement_basis(&p.kernel);
    let projector = &complement * complement.transpose();
    let dim = space.dim();
    let max = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let u = &projector * normal_vector(&mut rng, dim);
            let num = p.numerator.dot(&(&u * u.transpose()));
            let den = p.denominator.dot(&(&u * u.transpose()));
            if den > 0.0 {
                (num.max(0.0) / den).sqrt()
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(max)
}

/// Outcome of the flat-portion demonstration: an affine function vanishing
/// on the portion, with zero Hessian, that is not small in `W22`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatCounterexample {
    /// `u(x) = normal . x - offset`.
    pub normal: [f64; 2],
    pub offset: f64,
    pub trace_norm: f64,
    pub hessian_norm: f64,
    pub w22_norm: f64,
    pub tau_trace_rejected: bool,
    pub passed: bool,
}

pub fn counterexample_flat(space: &PolySpace, portion: &BoundaryPortion) -> Result<FlatCounterexample> {
    if space.is_vector() {
        return Err(Error::KindMismatch("the flat counterexample needs a scalar space".into()));
    }
    if space.domain().as_mesh().is_none() {
        return Err(Error::UnsupportedTrace);
    }
    if !portion.belongs_to(space.domain()) {
        return Err(Error::SpaceMismatch);
    }
    let hull = affine_hull_dim(portion)?;
    let mut normal = match (hull.flat, hull.normal) {
        (true, Some(nu)) => nu,
        _ => return Err(Error::NotFlat),
    };
    let c = centroid(portion)?;
    let mut u = space.affine_coefficients(-(normal[0] * c[0] + normal[1] * c[1]), &normal);
    let whole = Region::whole(space.domain());
    if space.mean_functional(&whole, 0)?.dot(&u) < 0.0 {
        normal = [-normal[0], -normal[1]];
        u = -u;
    }
    let offset = normal[0] * c[0] + normal[1] * c[1];

    let degree = 2 * space.degree();
    let trace_sq: f64 = quadrature_points(portion, degree)?
        .iter()
        .map(|(x, w)| w * space.eval_function(&u, 0, x).0.powi(2))
        .sum();
    let hessian_sq: f64 = quadrature_points(&whole, degree)?
        .iter()
        .map(|(x, w)| w * space.eval_function(&u, 0, x).2.iter().map(|h| h * h).sum::<f64>())
        .sum();
    let w22 = space.assemble_gram(Form::W22)?.quadratic_form(&u).max(0.0).sqrt();
    let tau_trace_rejected = matches!(
        build_projection(space, ProjKind::TauTrace, portion),
        Err(Error::FlatPortion)
    );
    let trace_norm = trace_sq.max(0.0).sqrt();
    let hessian_norm = hessian_sq.max(0.0).sqrt();
    Ok(FlatCounterexample {
        normal,
        offset,
        trace_norm,
        hessian_norm,
        w22_norm: w22,
        tau_trace_rejected,
        passed: trace_norm <= 1e-12 && hessian_norm <= 1e-12 && w22 >= 0.5 && tau_trace_rejected,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InjectivityReport {
    pub kind: NullKind,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub injective: bool,
}

/// Extreme eigenvalues of the trace Gram restricted to `X_0`, in the basis
/// centered at the portion centroid and scaled by the domain diameter.
pub fn injectivity_report(space: &PolySpace, portion: &BoundaryPortion, kind: NullKind) -> Result<InjectivityReport> {
    let c = centroid(portion)?;
    let s = diameter(space.domain());
    let z = match kind {
        NullKind::Affine | NullKind::Constants if space.is_vector() => {
            return Err(Error::KindMismatch(format!("{kind:?} needs a scalar space")))
        }
        NullKind::Affine => centered_affine_basis(space, &c, s),
        NullKind::Constants => space.nullspace_basis(NullKind::Constants)?.vectors,
        NullKind::Rigid => centered_rigid_basis(space, &c, s)?,
    };
    let g = space.assemble_gram(Form::L2Trace(portion))?.matrix;
    let eig = SymmetricEigen::new(symmetrize(&(z.transpose() * g * &z)));
    let min = eig.eigenvalues.min();
    let max = eig.eigenvalues.max();
    Ok(InjectivityReport {
        kind,
        min_eigenvalue: min,
        max_eigenvalue: max,
        injective: min > KERNEL_TOLERANCE * max,
    })
}

/// The certifiable scenarios. Each pairs a constraint operator with the norm
/// `X`, the seminorm `L`, the reference projection `P` and a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CaseKind {
    PoincareE,
    PoincareGamma,
    H2E,
    H2Balls,
    H2AffineTrace,
    H2TauTrace,
    KornE,
    KornBalls,
    KornRhoTrace,
}

impl CaseKind {
    pub const ALL: [CaseKind; 9] = [
        CaseKind::PoincareE,
        CaseKind::PoincareGamma,
        CaseKind::H2E,
        CaseKind::H2Balls,
        CaseKind::H2AffineTrace,
        CaseKind::H2TauTrace,
        CaseKind::KornE,
        CaseKind::KornBalls,
        CaseKind::KornRhoTrace,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CaseKind::PoincareE => "PoincareE",
            CaseKind::PoincareGamma => "PoincareGamma",
            CaseKind::H2E => "H2E",
            CaseKind::H2Balls => "H2Balls",
            CaseKind::H2AffineTrace => "H2AffineTrace",
            CaseKind::H2TauTrace => "H2TauTrace",
            CaseKind::KornE => "KornE",
            CaseKind::KornBalls => "KornBalls",
            CaseKind::KornRhoTrace => "KornRhoTrace",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name().eq_ignore_ascii_case(name))
    }

    pub fn is_korn(&self) -> bool {
        matches!(self, CaseKind::KornE | CaseKind::KornBalls | CaseKind::KornRhoTrace)
    }

    pub fn needs_region(&self) -> bool {
        matches!(
            self,
            CaseKind::PoincareE | CaseKind::H2E | CaseKind::H2Balls | CaseKind::KornE | CaseKind::KornBalls
        )
    }

    pub fn needs_portion(&self) -> bool {
        !self.needs_region()
    }

    fn projection(&self) -> ProjKind {
        match self {
            CaseKind::PoincareE => ProjKind::AvgRegion,
            CaseKind::PoincareGamma => ProjKind::TraceAvg,
            CaseKind::H2E | CaseKind::H2Balls => ProjKind::AffineRegion,
            CaseKind::H2AffineTrace => ProjKind::AffineTrace,
            CaseKind::H2TauTrace => ProjKind::TauTrace,
            CaseKind::KornE | CaseKind::KornBalls => ProjKind::RigidRegion,
            CaseKind::KornRhoTrace => ProjKind::RhoTrace,
        }
    }

    /// The reference projection whose base constant is known.
    fn reference(&self) -> ProjKind {
        match self {
            CaseKind::PoincareE | CaseKind::PoincareGamma => ProjKind::AvgRegion,
            CaseKind::KornE | CaseKind::KornBalls | CaseKind::KornRhoTrace => ProjKind::RigidRegion,
            _ => ProjKind::AffineRegion,
        }
    }

    fn norms(&self) -> (NormKind, Form<'static>) {
        match self {
            CaseKind::PoincareE | CaseKind::PoincareGamma => (NormKind::W12, Form::Grad),
            c if c.is_korn() => (NormKind::W12, Form::SymGrad),
            _ => (NormKind::W22, Form::Hessian),
        }
    }
}

/// Everything a certification run needs besides the case.
#[derive(Debug, Clone)]
pub struct CertifySetup {
    pub domain: Domain,
    pub region: Option<Region>,
    pub portion: Option<BoundaryPortion>,
    pub scalar_degree: usize,
    pub vector_degree: usize,
    pub trials: usize,
    pub seed: u64,
    pub tolerances: Tolerances,
}

impl CertifySetup {
    pub fn new(domain: Domain) -> Self {
        Self {
            domain,
            region: None,
            portion: None,
            scalar_degree: DEFAULT_SCALAR_DEGREE,
            vector_degree: DEFAULT_VECTOR_DEGREE,
            trials: 1000,
            seed: 0,
            tolerances: Tolerances::default(),
        }
    }

    pub fn with_region(mut self, region: Region) -> Self {
        self.region = Some(region);
        self
    }

    pub fn with_portion(mut self, portion: BoundaryPortion) -> Self {
        self.portion = Some(portion);
        self
    }

    pub fn certify(&self, case: CaseKind) -> Result<BoundReport> {
        certify(self, case)
    }
}

/// One comparison `lhs <= rhs` of the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub passed: bool,
}

/// Random check of `||u||_X <= C_1 ||Lu|| + C_2 ||gamma u||_{L2(Gamma)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorollaryCheck {
    pub c1: f64,
    pub c2: f64,
    pub trials: usize,
    /// Largest `||u||_X / (C_1 ||Lu|| + C_2 ||gamma u||)` seen.
    pub max_ratio: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub case: CaseKind,
    pub bound_case: BoundCase,
    pub degree: usize,
    pub inputs: BoundInputs,
    pub constants: Vec<ConstantEstimate>,
    pub norm_t: f64,
    pub norm_t_minus_p: f64,
    pub paper_norm_estimate: f64,
    pub random_max: f64,
    pub sup_ratio: f64,
    pub refined_bound: f64,
    pub composed_bound: f64,
    pub paper_bound: f64,
    pub corollary: Option<CorollaryCheck>,
    pub checks: Vec<Check>,
    pub passed: bool,
    pub tolerances: Tolerances,
    pub runtime_seconds: f64,
}

impl BoundReport {
    /// Equality of every recorded value except the runtime.
    pub fn same_values(&self, other: &Self) -> bool {
        let mut a = self.clone();
        a.runtime_seconds = other.runtime_seconds;
        &a == other
    }
}

fn ball_ratio(setup: &CertifySetup) -> Result<(usize, f64)> {
    let ball = setup
        .domain
        .as_ball()
        .ok_or_else(|| Error::KindMismatch("ball cases need an analytic ball domain".into()))?;
    if (ball.radius - 1.0).abs() > 1e-14 || ball.center.iter().any(|c| *c != 0.0) {
        return Err(Error::InvalidArgument("ball cases need the unit ball centered at the origin".into()));
    }
    let region = setup.region.as_ref().ok_or(Error::MissingInput("region"))?;
    match region.kind() {
        RegionKind::ConcentricBall { radius } => Ok((ball.dim, *radius)),
        _ => Err(Error::KindMismatch("ball cases need a concentric ball region".into())),
    }
}

fn estimate(space: &PolySpace, kind: ConstantKind, portion: Option<&BoundaryPortion>) -> Result<ConstantEstimate> {
    sharp_constant(space, kind, portion)
}

/// Spaces, constants and formula inputs shared by [`certify`] and callers
/// that only need the explicit bounds.
pub struct PreparedCase {
    pub bound_case: BoundCase,
    pub inputs: BoundInputs,
    pub constants: Vec<ConstantEstimate>,
    pub degree: usize,
    pub space: PolySpace,
}

pub fn bound_inputs(setup: &CertifySetup, case: CaseKind) -> Result<PreparedCase> {
    let domain = &setup.domain;
    let n = domain.dim();
    let degree = if case.is_korn() {
        setup.vector_degree
    } else {
        setup.scalar_degree
    };
    let region = setup.region.as_ref();
    let portion = setup.portion.as_ref();
    if case.needs_region() && region.is_none() {
        return Err(Error::MissingInput("region"));
    }
    if case.needs_portion() && portion.is_none() {
        return Err(Error::MissingInput("boundary portion"));
    }
    let scalar = PolySpace::build(domain, degree, 1)?;
    let space = if case.is_korn() {
        PolySpace::build(domain, degree, n)?
    } else {
        scalar.clone()
    };

    let mut constants = vec![estimate(&scalar, ConstantKind::PoincareQ, None)?];
    let mut inputs = BoundInputs {
        omega_measure: Some(measure(domain)?),
        diameter: Some(diameter(domain)),
        q: Some(constants[0].value),
        ..Default::default()
    };
    if let Some(r) = region.filter(|_| case.needs_region()) {
        inputs.region_measure = Some(measure(r)?);
    }
    if let Some(p) = portion.filter(|_| case.needs_portion()) {
        inputs.portion_measure = Some(measure(p)?);
        let c = estimate(&scalar, ConstantKind::TraceC, Some(p))?;
        inputs.trace_c = Some(c.value);
        constants.push(c);
    }
    if case.is_korn() {
        let k = estimate(&space, ConstantKind::KornK, None)?;
        inputs.korn_k = Some(k.value);
        constants.push(k);
    }
    match case {
        CaseKind::H2TauTrace => {
            let e = estimate(&scalar, ConstantKind::ENormAffine, portion)?;
            inputs.e_norm_affine = Some(e.value);
            constants.push(e);
        }
        CaseKind::KornRhoTrace => {
            let e = estimate(&space, ConstantKind::ENormRigid, portion)?;
            inputs.e_norm_rigid = Some(e.value);
            constants.push(e);
        }
        _ => {}
    }

    let bound_case = match case {
        CaseKind::PoincareE => BoundCase::PoincareE,
        CaseKind::PoincareGamma => BoundCase::PoincareGamma,
        CaseKind::H2E => BoundCase::H2E,
        CaseKind::H2Balls => {
            let (n, rho) = ball_ratio(setup)?;
            BoundCase::H2Balls { n, rho }
        }
        CaseKind::H2AffineTrace => BoundCase::H2AffineTrace,
        CaseKind::H2TauTrace => BoundCase::H2TauTrace,
        CaseKind::KornE => BoundCase::KornE,
        CaseKind::KornBalls => {
            let (n, rho) = ball_ratio(setup)?;
            BoundCase::KornBalls { n, rho }
        }
        CaseKind::KornRhoTrace => BoundCase::KornRhoTrace,
    };
    Ok(PreparedCase {
        bound_case,
        inputs,
        constants,
        degree,
        space,
    })
}

pub fn certify(setup: &CertifySetup, case: CaseKind) -> Result<BoundReport> {
    let start = Instant::now();
    let tol = setup.tolerances;
    let PreparedCase {
        bound_case,
        inputs,
        constants,
        degree,
        space,
    } = bound_inputs(setup, case)?;
    let domain = &setup.domain;
    let region = setup.region.as_ref();
    let portion = setup.portion.as_ref();

    let t = if case.needs_region() {
        build_projection(&space, case.projection(), region.expect("checked"))?
    } else {
        build_projection(&space, case.projection(), portion.expect("checked"))?
    };
    let whole = Region::whole(domain);
    let p = build_projection(&space, case.reference(), &whole)?;
    let (x_norm, l_form) = case.norms();

    let norm_t = operator_norm(&t, x_norm, &space)?;
    let norm_t_minus_p = matrix_operator_norm(&op_subtract(&t, &p)?, x_norm, &space)?;
    let sup = sup_ratio(&space, &t, x_norm, l_form)?;
    let random_max = random_trials(&space, &t, x_norm, l_form, setup.trials.max(1), setup.seed)?;
    let base = base_constant(bound_case.family(), &inputs)?;
    let composed = meyers_compose(base, norm_t, None);
    let refined = meyers_compose(base, norm_t, Some(norm_t_minus_p));
    let explicit = paper_bound(bound_case, &inputs)?;
    let estimate_t = paper_norm_estimate(bound_case, &inputs)?;

    let check = |name: &str, lhs: f64, rhs: f64| Check {
        name: name.to_string(),
        lhs,
        rhs,
        passed: tol.le(lhs, rhs),
    };
    let mut checks = vec![
        check("random_le_sup", random_max, sup),
        check("sup_le_refined", sup, refined),
        check("refined_le_composed", refined, composed),
        check("composed_le_explicit", composed, explicit),
        check("norm_le_estimate", norm_t, estimate_t),
    ];

    let corollary = match case {
        CaseKind::H2TauTrace | CaseKind::KornRhoTrace => {
            let (c1, c2) = corollary_constants(bound_case, &inputs)?;
            let c = corollary_check(&space, portion.expect("checked"), x_norm, l_form, c1, c2, setup, tol)?;
            checks.push(check("corollary", c.max_ratio, 1.0));
            Some(c)
        }
        _ => None,
    };
    let passed = checks.iter().all(|c| c.passed);

    Ok(BoundReport {
        case,
        bound_case,
        degree,
        inputs,
        constants,
        norm_t,
        norm_t_minus_p,
        paper_norm_estimate: estimate_t,
        random_max,
        sup_ratio: sup,
        refined_bound: refined,
        composed_bound: composed,
        paper_bound: explicit,
        corollary,
        checks,
        passed,
        tolerances: tol,
        runtime_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Offset separating the corollary sample streams from the ratio samples.
const COROLLARY_STREAM: u64 = 1 << 32;

#[allow(clippy::too_many_arguments)]
fn corollary_check(
    space: &PolySpace,
    portion: &BoundaryPortion,
    x_norm: NormKind,
    l_form: Form<'_>,
    c1: f64,
    c2: f64,
    setup: &CertifySetup,
    tol: Tolerances,
) -> Result<CorollaryCheck> {
    let gx = space.assemble_gram(x_norm.form())?.matrix;
    let gl = space.assemble_gram(l_form)?.matrix;
    let gt = space.assemble_gram(Form::L2Trace(portion))?.matrix;
    let count = setup.trials.max(1);
    let dim = space.dim();
    let norm = |g: &DMatrix<f64>, u: &DVector<f64>| g.dot(&(u * u.transpose())).max(0.0).sqrt();
    let max_ratio = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(setup.seed, COROLLARY_STREAM + i);
            let u = normal_vector(&mut rng, dim);
            let rhs = c1 * norm(&gl, &u) + c2 * norm(&gt, &u);
            if rhs > 0.0 {
                norm(&gx, &u) / rhs
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 0.0, f64::max);
    Ok(CorollaryCheck {
        c1,
        c2,
        trials: count,
        max_ratio,
        passed: tol.le(max_ratio, 1.0),
    })
}
