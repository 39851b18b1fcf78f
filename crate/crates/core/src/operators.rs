//! Constraint operators `T : X -> X_0` as matrices on space coefficients.
//!
//! Every operator is assembled as `T = sum_g z_g f_g^T`, where `z_g` runs over
//! a basis of the null space (constants, affine functions or rigid
//! displacements) and `f_g` is the linear functional producing the matching
//! coefficient of `Tu`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::geometry::{centroid, diameter, BoundaryPortion, Region, Target};
use crate::linalg::{pencil_max, symmetrize, KERNEL_TOLERANCE};
use crate::polyspace::{rigid_generators, Form, NullKind, PolySpace, RigidMotion};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum ProjKind {
    /// `u -> u_E`
    AvgRegion,
    /// `u -> (gamma u)_Gamma`
    TraceAvg,
    /// `u -> u_E + (grad u)_E . (x - x_E)`
    AffineRegion,
    /// `u -> (gamma u)_Gamma + (gamma grad u)_Gamma . (x - x_Gamma)`
    AffineTrace,
    /// Least-squares affine fit of the trace, `tau o gamma`.
    TauTrace,
    /// `u -> u_E + skew((grad u)_E) (x - x_E)`
    RigidRegion,
    /// Least-squares rigid fit of the trace, `rho o gamma`.
    RhoTrace,
    /// `u -> phi(u)` for a user functional with `phi(1) = 1`.
    Custom,
}

impl ProjKind {
    pub fn null_kind(&self) -> NullKind {
        match self {
            ProjKind::AvgRegion | ProjKind::TraceAvg | ProjKind::Custom => NullKind::Constants,
            ProjKind::AffineRegion | ProjKind::AffineTrace | ProjKind::TauTrace => NullKind::Affine,
            ProjKind::RigidRegion | ProjKind::RhoTrace => NullKind::Rigid,
        }
    }
}

/// What the operator reads from `u`.
#[derive(Debug, Clone, Copy)]
pub enum ProjTarget<'a> {
    Region(&'a Region),
    Portion(&'a BoundaryPortion),
    /// Coefficients of `phi` restricted to the space: `phi(u) = f . c`.
    Functional(&'a DVector<f64>),
}

impl<'a> From<&'a Region> for ProjTarget<'a> {
    fn from(r: &'a Region) -> Self {
        ProjTarget::Region(r)
    }
}

impl<'a> From<&'a BoundaryPortion> for ProjTarget<'a> {
    fn from(p: &'a BoundaryPortion) -> Self {
        ProjTarget::Portion(p)
    }
}

impl<'a> From<&'a DVector<f64>> for ProjTarget<'a> {
    fn from(f: &'a DVector<f64>) -> Self {
        ProjTarget::Functional(f)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum NormKind {
    L2,
    W12,
    W22,
}

impl NormKind {
    pub fn form(&self) -> Form<'static> {
        match self {
            NormKind::L2 => Form::L2Omega,
            NormKind::W12 => Form::W12,
            NormKind::W22 => Form::W22,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProjectionOp {
    pub kind: ProjKind,
    pub null_kind: NullKind,
    pub matrix: DMatrix<f64>,
    /// Short description of the region, portion or functional used.
    pub label: String,
    degree: usize,
    codim: usize,
}

impl ProjectionOp {
    pub fn apply(&self, coeffs: &DVector<f64>) -> DVector<f64> {
        &self.matrix * coeffs
    }

    pub(crate) fn compatible_with(&self, space: &PolySpace) -> bool {
        self.degree == space.degree() && self.codim == space.codim() && self.matrix.nrows() == space.dim()
    }
}

fn scalar_only(space: &PolySpace, kind: ProjKind) -> Result<()> {
    if space.is_vector() {
        Err(Error::KindMismatch(format!("{kind:?} needs a scalar space")))
    } else {
        Ok(())
    }
}

fn vector_only(space: &PolySpace, kind: ProjKind) -> Result<()> {
    if space.is_vector() {
        Ok(())
    } else {
        Err(Error::KindMismatch(format!("{kind:?} needs a vector space with m = n")))
    }
}

fn unit_vector(n: usize, i: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[i] = 1.0;
    e
}

/// Affine basis `1, (x_i - center_i) / scale`; spans the same space as
/// `1, x_1, ..., x_n` but is better conditioned on displaced geometry.
pub(crate) fn centered_affine_basis(space: &PolySpace, center: &[f64], scale: f64) -> DMatrix<f64> {
    let n = space.spatial_dim();
    let mut cols = vec![space.affine_coefficients(1.0, &vec![0.0; n])];
    for i in 0..n {
        cols.push(space.affine_coefficients(-center[i] / scale, &unit_vector(n, i).iter().map(|b| b / scale).collect::<Vec<_>>()));
    }
    DMatrix::from_columns(&cols)
}

pub(crate) fn centered_rigid_basis(space: &PolySpace, center: &[f64], scale: f64) -> Result<DMatrix<f64>> {
    let cols = rigid_generators(space.spatial_dim())
        .into_iter()
        .map(|g| {
            let m = &g.rotation / scale;
            let shift = &m * DVector::from_column_slice(center);
            let translation = g.translation.iter().zip(shift.iter()).map(|(b, s)| b - s).collect();
            space.rigid_coefficients(&RigidMotion { translation, rotation: m })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DMatrix::from_columns(&cols))
}

/// `(Z^T G Z)^{-1}` by eigendecomposition, or `None` when the Gram has a
/// numerical kernel.
fn least_squares_inverse(zgz: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    crate::linalg::spd_inverse_checked(zgz)
}

fn trace_target_check(space: &PolySpace, portion: &BoundaryPortion) -> Result<()> {
    if space.domain().as_mesh().is_none() {
        return Err(Error::UnsupportedTrace);
    }
    if !portion.belongs_to(space.domain()) {
        return Err(Error::SpaceMismatch);
    }
    Ok(())
}

/// Builds the matrix of a constraint operator.
pub fn build_projection<'a>(space: &PolySpace, kind: ProjKind, target: impl Into<ProjTarget<'a>>) -> Result<ProjectionOp> {
    let target = target.into();
    let n = space.spatial_dim();
    let (matrix, label) = match (kind, target) {
        (ProjKind::AvgRegion, ProjTarget::Region(r)) => {
            scalar_only(space, kind)?;
            let one = space.affine_coefficients(1.0, &vec![0.0; n]);
            (&one * space.mean_functional(r, 0)?.transpose(), "region".to_string())
        }
        (ProjKind::TraceAvg, ProjTarget::Portion(p)) => {
            scalar_only(space, kind)?;
            trace_target_check(space, p)?;
            let one = space.affine_coefficients(1.0, &vec![0.0; n]);
            (&one * space.mean_functional(p, 0)?.transpose(), "portion".to_string())
        }
        (ProjKind::AffineRegion, ProjTarget::Region(r)) => {
            scalar_only(space, kind)?;
            (affine_average_operator(space, Target::Region(r))?, "region".to_string())
        }
        (ProjKind::AffineTrace, ProjTarget::Portion(p)) => {
            scalar_only(space, kind)?;
            trace_target_check(space, p)?;
            (affine_average_operator(space, Target::Portion(p))?, "portion".to_string())
        }
        (ProjKind::RigidRegion, ProjTarget::Region(r)) => {
            vector_only(space, kind)?;
            (rigid_average_operator(space, Target::Region(r))?, "region".to_string())
        }
        (ProjKind::TauTrace, ProjTarget::Portion(p)) => {
            scalar_only(space, kind)?;
            trace_target_check(space, p)?;
            let z = centered_affine_basis(space, &centroid(p)?, diameter(space.domain()));
            (trace_least_squares(space, p, &z).ok_or(Error::FlatPortion)?, "portion".to_string())
        }
        (ProjKind::RhoTrace, ProjTarget::Portion(p)) => {
            vector_only(space, kind)?;
            trace_target_check(space, p)?;
            let z = centered_rigid_basis(space, &centroid(p)?, diameter(space.domain()))?;
            let m = trace_least_squares(space, p, &z).ok_or(Error::DegenerateKernel {
                expected: 0,
                found: 1,
            })?;
            (m, "portion".to_string())
        }
        (ProjKind::Custom, ProjTarget::Functional(f)) => {
            scalar_only(space, kind)?;
            if f.len() != space.dim() {
                return Err(Error::SpaceMismatch);
            }
            let one = space.affine_coefficients(1.0, &vec![0.0; n]);
            let value = f.dot(&one);
            if (value - 1.0).abs() > 1e-12 {
                return Err(Error::NotNormalized { value });
            }
            (&one * f.transpose(), "functional".to_string())
        }
        (kind, _) => {
            return Err(Error::KindMismatch(format!(
                "{kind:?} does not accept this kind of target"
            )))
        }
    };
    Ok(ProjectionOp {
        kind,
        null_kind: kind.null_kind(),
        matrix,
        label,
        degree: space.degree(),
        codim: space.codim(),
    })
}

/// `u -> u_S + (grad u)_S . (x - x_S)` for a region or portion `S`.
fn affine_average_operator(space: &PolySpace, target: Target<'_>) -> Result<DMatrix<f64>> {
    let n = space.spatial_dim();
    let center = centroid(target)?;
    let one = space.affine_coefficients(1.0, &vec![0.0; n]);
    let mut constant_part = space.mean_functional(target, 0)?;
    let mut t = DMatrix::zeros(space.dim(), space.dim());
    for i in 0..n {
        let g = space.mean_derivative_functional(target, 0, i)?;
        constant_part -= &g * center[i];
        t += space.affine_coefficients(0.0, &unit_vector(n, i)) * g.transpose();
    }
    t += one * constant_part.transpose();
    Ok(t)
}

/// `u -> u_S + W_S (x - x_S)` with `W_S` the skew part of `(grad u)_S`.
fn rigid_average_operator(space: &PolySpace, target: Target<'_>) -> Result<DMatrix<f64>> {
    let n = space.spatial_dim();
    let center = centroid(target)?;
    // skew[k][j] is the functional u -> W_kj.
    let mut mean_grad = vec![vec![DVector::zeros(space.dim()); n]; n];
    for (k, row) in mean_grad.iter_mut().enumerate() {
        for (j, g) in row.iter_mut().enumerate() {
            *g = space.mean_derivative_functional(target, k, j)?;
        }
    }
    let skew = |k: usize, j: usize| (&mean_grad[k][j] - &mean_grad[j][k]) * 0.5;

    let mut t = DMatrix::zeros(space.dim(), space.dim());
    for (g, motion) in rigid_generators(n).iter().enumerate() {
        let coeff = space.rigid_coefficients(motion)?;
        let functional = if g < n {
            let k = g;
            let mut f = space.mean_functional(target, k)?;
            for j in 0..n {
                f -= skew(k, j) * center[j];
            }
            f
        } else {
            let (i, j) = rotation_indices(motion);
            skew(i, j)
        };
        t += coeff * functional.transpose();
    }
    Ok(t)
}

fn rotation_indices(motion: &RigidMotion) -> (usize, usize) {
    let n = motion.rotation.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if motion.rotation[(i, j)] == 1.0 {
                return (i, j);
            }
        }
    }
    unreachable!("rotation generator")
}

/// `Z (Z^T G Z)^{-1} Z^T G` with `G` the trace Gram on the portion.
fn trace_least_squares(space: &PolySpace, portion: &BoundaryPortion, z: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let g = space.assemble_gram(Form::L2Trace(portion)).ok()?.matrix;
    let zgz = symmetrize(&(z.transpose() * &g * z));
    let inv = least_squares_inverse(&zgz)?;
    Some(z * inv * z.transpose() * g)
}

/// `max ||M u||_X / ||u||_X` over the space.
pub fn matrix_operator_norm(matrix: &DMatrix<f64>, norm: NormKind, space: &PolySpace) -> Result<f64> {
    let g = space.assemble_gram(norm.form())?.matrix;
    let a = matrix.transpose() * &g * matrix;
    let (lambda, _) = pencil_max(&a, &g)?;
    Ok(lambda.max(0.0).sqrt())
}

/// Operator norm of `T` on the space: a lower bound for the norm on the full
/// Sobolev space.
pub fn operator_norm(op: &ProjectionOp, norm: NormKind, space: &PolySpace) -> Result<f64> {
    if !op.compatible_with(space) {
        return Err(Error::SpaceMismatch);
    }
    matrix_operator_norm(&op.matrix, norm, space)
}

/// Matrix of `T1 - T2`; both must map into the same null space.
pub fn op_subtract(t1: &ProjectionOp, t2: &ProjectionOp) -> Result<DMatrix<f64>> {
    if t1.null_kind != t2.null_kind
        || t1.matrix.shape() != t2.matrix.shape()
        || t1.degree != t2.degree
        || t1.codim != t2.codim
    {
        return Err(Error::SpaceMismatch);
    }
    Ok(&t1.matrix - &t2.matrix)
}

/// Largest `sqrt(lambda)` of `a v = lambda b v`, failing when `b` is singular.
pub fn e_norm_from_grams(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<f64> {
    let eig = SymmetricEigen::new(symmetrize(b));
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l.abs()));
    if top == 0.0 || eig.eigenvalues.iter().any(|&l| l <= KERNEL_TOLERANCE * top) {
        return None;
    }
    pencil_max(a, b).ok().map(|(l, _)| l.max(0.0).sqrt())
}

/// Norm of the inverse of the trace restricted to `X_0`: `||e||` for affine
/// functions (target norm `W^{2,2}`) or `||E||` for rigid displacements
/// (target norm `W^{1,2}`). Exact: `X_0` is finite dimensional.
pub fn e_inverse_norm(space: &PolySpace, portion: &BoundaryPortion, kind: NullKind) -> Result<f64> {
    trace_target_check(space, portion)?;
    let center = centroid(portion)?;
    let scale = diameter(space.domain());
    let (z, norm) = match kind {
        NullKind::Affine => {
            scalar_only(space, ProjKind::TauTrace)?;
            (centered_affine_basis(space, &center, scale), Form::W22)
        }
        NullKind::Rigid => {
            vector_only(space, ProjKind::RhoTrace)?;
            (centered_rigid_basis(space, &center, scale)?, Form::W12)
        }
        NullKind::Constants => {
            return Err(Error::KindMismatch("inverse trace norm is defined for affine or rigid spaces".into()))
        }
    };
    let x = space.assemble_gram(norm)?.matrix;
    let g = space.assemble_gram(Form::L2Trace(portion))?.matrix;
    let a = z.transpose() * x * &z;
    let b = z.transpose() * g * &z;
    e_norm_from_grams(&a, &b).ok_or(match kind {
        NullKind::Affine => Error::FlatPortion,
        _ => Error::DegenerateKernel {
            expected: 0,
            found: 1,
        },
    })
}
