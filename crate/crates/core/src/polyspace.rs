//! Polynomial trial spaces and the Gram matrices of the bilinear forms used by
//! the inequalities.
//!
//! The scalar basis is the set of tensor Legendre polynomials on the bounding
//! box of the domain, in graded order, orthonormalized in `L^2(Omega)` by an
//! unpivoted Cholesky factorization of their exact Gram matrix. Because the
//! factorization is triangular in graded order, the first `C(n + k, k)`
//! functions always span the polynomials of degree at most `k`; in particular
//! constants and affine functions have coefficient vectors supported on the
//! first `1` and `n + 1` entries, and the degree-`d` basis is a prefix of the
//! degree-`d'` basis for `d <= d'`.
//!
//! Vector-valued spaces (`codim = n`) stack `n` copies of the scalar space;
//! coefficient `k * N_s + p` multiplies `phi_p e_k`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{measure, moments_in_frame, Domain, Frame, Target};
use crate::geometry::{BoundaryPortion, Region};
use crate::poly::{tensor_legendre_matrix, MonomialSet};

/// Orthonormalization is refused beyond this condition estimate.
pub const MAX_CONDITION: f64 = 1e12;

/// Default degree for scalar problems.
pub const DEFAULT_SCALAR_DEGREE: usize = 8;
/// Default degree for vector (Korn) problems.
pub const DEFAULT_VECTOR_DEGREE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum FormKind {
    L2Omega,
    L2Region,
    L2Trace,
    Grad,
    Hessian,
    SymGrad,
    W12,
    W22,
}

/// A bilinear form, carrying its integration target where it needs one.
#[derive(Debug, Clone, Copy)]
pub enum Form<'a> {
    L2Omega,
    L2Region(&'a Region),
    L2Trace(&'a BoundaryPortion),
    Grad,
    Hessian,
    SymGrad,
    W12,
    W22,
}

impl Form<'_> {
    pub fn kind(&self) -> FormKind {
        match self {
            Form::L2Omega => FormKind::L2Omega,
            Form::L2Region(_) => FormKind::L2Region,
            Form::L2Trace(_) => FormKind::L2Trace,
            Form::Grad => FormKind::Grad,
            Form::Hessian => FormKind::Hessian,
            Form::SymGrad => FormKind::SymGrad,
            Form::W12 => FormKind::W12,
            Form::W22 => FormKind::W22,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GramMatrix {
    pub kind: FormKind,
    pub matrix: DMatrix<f64>,
}

impl GramMatrix {
    pub fn quadratic_form(&self, v: &DVector<f64>) -> f64 {
        (v.transpose() * &self.matrix * v)[(0, 0)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum NullKind {
    Constants,
    Affine,
    Rigid,
}

impl NullKind {
    pub fn dimension(&self, n: usize) -> usize {
        match self {
            NullKind::Constants => 1,
            NullKind::Affine => n + 1,
            NullKind::Rigid => n * (n + 1) / 2,
        }
    }
}

/// Basis of a null space `X_0` as coefficient columns in a [`PolySpace`].
#[derive(Debug, Clone)]
pub struct NullSpaceBasis {
    pub kind: NullKind,
    pub vectors: DMatrix<f64>,
}

impl NullSpaceBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }
}

/// An infinitesimal rigid displacement `x -> b + M x` with `M` skew.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidMotion {
    pub translation: Vec<f64>,
    pub rotation: DMatrix<f64>,
}

/// The generators `e_k` and `(E_ij - E_ji) x` for `i < j`.
pub fn rigid_generators(n: usize) -> Vec<RigidMotion> {
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for k in 0..n {
        let mut b = vec![0.0; n];
        b[k] = 1.0;
        out.push(RigidMotion {
            translation: b,
            rotation: DMatrix::zeros(n, n),
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let mut m = DMatrix::zeros(n, n);
            m[(i, j)] = 1.0;
            m[(j, i)] = -1.0;
            out.push(RigidMotion {
                translation: vec![0.0; n],
                rotation: m,
            });
        }
    }
    out
}

/// Values and derivatives of every scalar basis function at one point.
#[derive(Debug, Clone)]
pub struct BasisValues {
    pub values: DVector<f64>,
    /// `gradients[i][p]` is `d phi_p / d x_i`.
    pub gradients: Vec<DVector<f64>>,
    /// `hessians[i * n + j][p]` is `d^2 phi_p / d x_i d x_j`.
    pub hessians: Vec<DVector<f64>>,
}

/// Finite-dimensional polynomial trial space on a domain.
#[derive(Debug, Clone)]
pub struct PolySpace {
    domain: Domain,
    degree: usize,
    codim: usize,
    frame: Frame,
    monomials: MonomialSet,
    moment_set: MonomialSet,
    /// `product[a * len + b]` is the index of monomial `a + b` in `moment_set`.
    product: Vec<usize>,
    /// Monomial coefficients (in local coordinates) of the orthonormal basis.
    basis: DMatrix<f64>,
    /// Cholesky factor of the Legendre Gram; orthonormal coefficients of a
    /// Legendre combination `a` are `L^T a`.
    legendre_factor: DMatrix<f64>,
    /// Monomial coefficients of first derivatives of the basis, per axis.
    first: Vec<DMatrix<f64>>,
    /// Monomial coefficients of second derivatives, `i * n + j`.
    second: Vec<DMatrix<f64>>,
    omega_moments: DMatrix<f64>,
    condition: f64,
}

impl PolySpace {
    pub fn build(domain: &Domain, degree: usize, codim: usize) -> Result<Self> {
        let n = domain.dim();
        if degree < 1 {
            return Err(Error::InvalidArgument("degree must be at least 1".into()));
        }
        if codim != 1 && codim != n {
            return Err(Error::InvalidArgument(format!(
                "codomain dimension must be 1 or {n}, got {codim}"
            )));
        }
        let frame = Frame::bounding_box(domain);
        let monomials = MonomialSet::new(n, degree);
        let moment_set = MonomialSet::new(n, 2 * degree);
        let len = monomials.len();
        let mut product = Vec::with_capacity(len * len);
        for a in monomials.exponents() {
            for b in monomials.exponents() {
                product.push(moment_set.product_index(a, b).expect("product within 2d"));
            }
        }

        let mut space = Self {
            domain: domain.clone(),
            degree,
            codim,
            frame,
            monomials,
            moment_set,
            product,
            basis: DMatrix::zeros(0, 0),
            legendre_factor: DMatrix::zeros(0, 0),
            first: Vec::new(),
            second: Vec::new(),
            omega_moments: DMatrix::zeros(0, 0),
            condition: 0.0,
        };
        space.omega_moments = space.moment_matrix(Target::Domain(domain))?;

        let legendre = tensor_legendre_matrix(&space.monomials);
        let g0 = legendre.transpose() * &space.omega_moments * &legendre;
        let g0 = (&g0 + g0.transpose()) * 0.5;
        let chol = g0
            .cholesky()
            .ok_or(Error::IllConditioned { condition: f64::INFINITY })?;
        let l = chol.l();
        let diag = l.diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
        let condition = (hi / lo).powi(2);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::IllConditioned { condition });
        }
        let l_inv = l
            .solve_lower_triangular(&DMatrix::identity(len, len))
            .ok_or(Error::IllConditioned { condition })?;
        space.basis = legendre * l_inv.transpose();
        space.legendre_factor = l;
        space.condition = condition;

        let derivs: Vec<DMatrix<f64>> = (0..n)
            .map(|i| space.monomials.derivative_matrix(i, 1.0 / space.frame.scale[i]))
            .collect();
        space.first = derivs.iter().map(|d| d * &space.basis).collect();
        space.second = (0..n * n)
            .map(|ij| &derivs[ij / n] * &space.first[ij % n])
            .collect();
        Ok(space)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Codomain dimension `m` (1 for scalar fields, `n` for vector fields).
    pub fn codim(&self) -> usize {
        self.codim
    }

    /// Spatial dimension `n`.
    pub fn spatial_dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn scalar_dim(&self) -> usize {
        self.monomials.len()
    }

    /// Total number of coefficients `N = m * C(n + d, d)`.
    pub fn dim(&self) -> usize {
        self.codim * self.scalar_dim()
    }

    pub fn is_vector(&self) -> bool {
        self.codim > 1
    }

    /// Condition estimate of the Legendre Gram that was orthonormalized.
    pub fn condition(&self) -> f64 {
        self.condition
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// Moment matrix `M[a, b] = int_target xi^{a + b}` over the degree-`d`
    /// monomials.
    fn moment_matrix(&self, target: Target<'_>) -> Result<DMatrix<f64>> {
        if !self.owns(target) {
            return Err(Error::SpaceMismatch);
        }
        let m = moments_in_frame(target, &self.moment_set, &self.frame)?;
        let len = self.monomials.len();
        Ok(DMatrix::from_fn(len, len, |a, b| m[self.product[a * len + b]]))
    }

    fn owns(&self, target: Target<'_>) -> bool {
        match target {
            Target::Domain(d) => *d == self.domain,
            Target::Region(r) => r.belongs_to(&self.domain),
            Target::Portion(p) => p.belongs_to(&self.domain),
        }
    }

    fn target_moments(&self, target: Target<'_>) -> Result<DMatrix<f64>> {
        match target {
            Target::Domain(_) if self.owns(target) => Ok(self.omega_moments.clone()),
            _ => self.moment_matrix(target),
        }
    }

    fn pair(a: &DMatrix<f64>, mom: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        a.transpose() * mom * b
    }

    /// `int phi_p phi_q` over the target, scalar basis.
    fn scalar_mass(&self, mom: &DMatrix<f64>) -> DMatrix<f64> {
        Self::pair(&self.basis, mom, &self.basis)
    }

    /// `int d_a phi_p d_b phi_q` over the domain, scalar basis.
    fn scalar_cross(&self, a: usize, b: usize) -> DMatrix<f64> {
        Self::pair(&self.first[a], &self.omega_moments, &self.first[b])
    }

    fn scalar_grad(&self) -> DMatrix<f64> {
        let n = self.spatial_dim();
        let mut g = DMatrix::zeros(self.scalar_dim(), self.scalar_dim());
        for i in 0..n {
            g += self.scalar_cross(i, i);
        }
        g
    }

    fn scalar_hessian(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.scalar_dim(), self.scalar_dim());
        for d2 in &self.second {
            g += Self::pair(d2, &self.omega_moments, d2);
        }
        g
    }

    fn block_diagonal(&self, scalar: &DMatrix<f64>) -> DMatrix<f64> {
        let ns = self.scalar_dim();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for k in 0..self.codim {
            out.view_mut((k * ns, k * ns), (ns, ns)).copy_from(scalar);
        }
        out
    }

    /// Gram matrix of a bilinear form on this space.
    pub fn assemble_gram(&self, form: Form<'_>) -> Result<GramMatrix> {
        let scalar = match form {
            Form::L2Omega => self.scalar_mass(&self.omega_moments),
            Form::L2Region(r) => self.scalar_mass(&self.target_moments(Target::Region(r))?),
            Form::L2Trace(p) => {
                if self.domain.as_mesh().is_none() {
                    return Err(Error::UnsupportedTrace);
                }
                self.scalar_mass(&self.target_moments(Target::Portion(p))?)
            }
            Form::Grad => self.scalar_grad(),
            Form::Hessian => self.scalar_hessian(),
            Form::W12 => self.scalar_mass(&self.omega_moments) + self.scalar_grad(),
            Form::W22 => {
                self.scalar_mass(&self.omega_moments) + self.scalar_grad() + self.scalar_hessian()
            }
            Form::SymGrad => {
                if !self.is_vector() {
                    return Err(Error::KindMismatch(
                        "the symmetric gradient form needs a vector-valued space".into(),
                    ));
                }
                return Ok(GramMatrix {
                    kind: FormKind::SymGrad,
                    matrix: self.sym_grad(),
                });
            }
        };
        let matrix = if self.is_vector() {
            self.block_diagonal(&scalar)
        } else {
            scalar
        };
        Ok(GramMatrix {
            kind: form.kind(),
            matrix: (&matrix + matrix.transpose()) * 0.5,
        })
    }

    /// `int |sym grad u|^2`: block `(i, j)` is
    /// `1/2 delta_ij sum_k S_kk + 1/2 S_ji` with `S_ab = int d_a phi d_b phi`.
    fn sym_grad(&self) -> DMatrix<f64> {
        let n = self.spatial_dim();
        let ns = self.scalar_dim();
        let grad = self.scalar_grad();
        let mut out = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..n {
            for j in 0..n {
                let mut block = self.scalar_cross(j, i) * 0.5;
                if i == j {
                    block += &grad * 0.5;
                }
                out.view_mut((i * ns, j * ns), (ns, ns)).copy_from(&block);
            }
        }
        (&out + out.transpose()) * 0.5
    }

    /// Row functional `u -> (1/|T|) int_T u_k` for component `k`.
    pub fn mean_functional<'a>(&self, target: impl Into<Target<'a>>, component: usize) -> Result<DVector<f64>> {
        let target = target.into();
        let mom = self.target_moments(target)?;
        let mu = measure(target)?;
        let row = self.basis.transpose() * mom.row(0).transpose() / mu;
        Ok(self.embed(component, &row))
    }

    /// Row functional `u -> (1/|T|) int_T d u_k / d x_axis`.
    pub fn mean_derivative_functional<'a>(
        &self,
        target: impl Into<Target<'a>>,
        component: usize,
        axis: usize,
    ) -> Result<DVector<f64>> {
        let target = target.into();
        let mom = self.target_moments(target)?;
        let mu = measure(target)?;
        let row = self.first[axis].transpose() * mom.row(0).transpose() / mu;
        Ok(self.embed(component, &row))
    }

    /// Places scalar coefficients into component `k` of the full coefficient
    /// vector (identity for scalar spaces).
    pub fn embed(&self, component: usize, scalar: &DVector<f64>) -> DVector<f64> {
        let ns = self.scalar_dim();
        let mut out = DVector::zeros(self.dim());
        out.rows_mut(component * ns, ns).copy_from(scalar);
        out
    }

    /// Scalar coefficients of the affine function `a + b . x`.
    pub fn affine_coefficients(&self, a: f64, b: &[f64]) -> DVector<f64> {
        let n = self.spatial_dim();
        let mut leg = DVector::zeros(self.scalar_dim());
        leg[0] = a + b.iter().zip(&self.frame.center).map(|(b, c)| b * c).sum::<f64>();
        for i in 0..n {
            leg[1 + i] = b[i] * self.frame.scale[i];
        }
        // Only the leading (n+1) x (n+1) block of L^T touches `leg`.
        let mut out = DVector::zeros(self.scalar_dim());
        for r in 0..=n {
            out[r] = (r..=n).map(|c| self.legendre_factor[(c, r)] * leg[c]).sum();
        }
        out
    }

    /// Full coefficients of the rigid displacement `b + M x`.
    pub fn rigid_coefficients(&self, motion: &RigidMotion) -> Result<DVector<f64>> {
        let n = self.spatial_dim();
        if !self.is_vector() {
            return Err(Error::KindMismatch("rigid displacements need a vector space".into()));
        }
        let mut out = DVector::zeros(self.dim());
        for k in 0..n {
            let row: Vec<f64> = (0..n).map(|j| motion.rotation[(k, j)]).collect();
            out += self.embed(k, &self.affine_coefficients(motion.translation[k], &row));
        }
        Ok(out)
    }

    /// Coefficient basis of the null space `X_0` of the given kind.
    pub fn nullspace_basis(&self, kind: NullKind) -> Result<NullSpaceBasis> {
        let n = self.spatial_dim();
        let cols: Vec<DVector<f64>> = match kind {
            NullKind::Constants | NullKind::Affine if self.is_vector() => {
                return Err(Error::KindMismatch(format!("{kind:?} null space needs a scalar space")))
            }
            NullKind::Constants => vec![self.affine_coefficients(1.0, &vec![0.0; n])],
            NullKind::Affine => {
                let mut v = vec![self.affine_coefficients(1.0, &vec![0.0; n])];
                for i in 0..n {
                    let mut b = vec![0.0; n];
                    b[i] = 1.0;
                    v.push(self.affine_coefficients(0.0, &b));
                }
                v
            }
            NullKind::Rigid => {
                if !self.is_vector() {
                    return Err(Error::KindMismatch("rigid null space needs a vector space".into()));
                }
                rigid_generators(n)
                    .iter()
                    .map(|g| self.rigid_coefficients(g))
                    .collect::<Result<_>>()?
            }
        };
        Ok(NullSpaceBasis {
            kind,
            vectors: DMatrix::from_columns(&cols),
        })
    }

    /// Basis values with first and second derivatives at a global point.
    pub fn eval_basis(&self, point: &[f64]) -> BasisValues {
        let xi = self.frame.local(point);
        let mono = DVector::from_vec(self.monomials.eval(&xi));
        BasisValues {
            values: self.basis.transpose() * &mono,
            gradients: self.first.iter().map(|d| d.transpose() * &mono).collect(),
            hessians: self.second.iter().map(|d| d.transpose() * &mono).collect(),
        }
    }

    /// Value, gradient and Hessian (row-major `n x n`) of component `k` of the
    /// function with coefficients `coeffs` at `point`.
    pub fn eval_function(&self, coeffs: &DVector<f64>, component: usize, point: &[f64]) -> (f64, Vec<f64>, Vec<f64>) {
        let ns = self.scalar_dim();
        let c = coeffs.rows(component * ns, ns);
        let b = self.eval_basis(point);
        (
            b.values.dot(&c),
            b.gradients.iter().map(|g| g.dot(&c)).collect(),
            b.hessians.iter().map(|h| h.dot(&c)).collect(),
        )
    }

    /// `L^2(Omega)` projection of a polynomial given by monomial coefficients
    /// in the local coordinates of [`PolySpace::frame`] (scalar spaces).
    pub fn project_local_polynomial(&self, monomial_coeffs: &DVector<f64>) -> DVector<f64> {
        self.basis.transpose() * &self.omega_moments * monomial_coeffs
    }

    pub fn monomials(&self) -> &MonomialSet {
        &self.monomials
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{unit_square, l_shape};
    use crate::linalg::{numerical_kernel_dim, sorted_eigenvalues};

    fn square() -> Domain {
        Domain::mesh(unit_square(4)).unwrap()
    }

    #[test]
    fn dimension_counts() {
        assert_eq!(PolySpace::build(&square(), 1, 1).unwrap().dim(), 3);
        assert_eq!(PolySpace::build(&square(), 2, 2).unwrap().dim(), 12);
        let ball = Domain::unit_ball(3).unwrap();
        assert_eq!(PolySpace::build(&ball, 2, 1).unwrap().dim(), 10);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(PolySpace::build(&square(), 0, 1).is_err());
        assert!(PolySpace::build(&square(), 2, 3).is_err());
    }

    #[test]
    fn l2_gram_is_identity() {
        for d in [square(), Domain::unit_ball(2).unwrap(), Domain::mesh(l_shape(2)).unwrap()] {
            let s = PolySpace::build(&d, 8, 1).unwrap();
            let g = s.assemble_gram(Form::L2Omega).unwrap().matrix;
            let err = (g - DMatrix::identity(s.dim(), s.dim())).amax();
            assert!(err < 1e-10, "L2 gram deviates by {err}");
        }
    }

    #[test]
    fn hessian_of_linear_space_is_zero() {
        let s = PolySpace::build(&square(), 1, 1).unwrap();
        let h = s.assemble_gram(Form::Hessian).unwrap();
        assert_eq!(h.matrix.amax(), 0.0);
    }

    #[test]
    fn kernel_dimensions_of_seminorms() {
        let s = PolySpace::build(&square(), 4, 1).unwrap();
        assert_eq!(numerical_kernel_dim(&s.assemble_gram(Form::Grad).unwrap().matrix), 1);
        assert_eq!(numerical_kernel_dim(&s.assemble_gram(Form::Hessian).unwrap().matrix), 3);
        let v = PolySpace::build(&square(), 3, 2).unwrap();
        assert_eq!(numerical_kernel_dim(&v.assemble_gram(Form::SymGrad).unwrap().matrix), 3);
        let b = Domain::unit_ball(3).unwrap();
        let v3 = PolySpace::build(&b, 2, 3).unwrap();
        assert_eq!(numerical_kernel_dim(&v3.assemble_gram(Form::SymGrad).unwrap().matrix), 6);
    }

    #[test]
    fn nullspace_vectors_are_in_kernels() {
        let s = PolySpace::build(&square(), 5, 1).unwrap();
        let grad = s.assemble_gram(Form::Grad).unwrap();
        let hess = s.assemble_gram(Form::Hessian).unwrap();
        let c = s.nullspace_basis(NullKind::Constants).unwrap();
        assert_eq!(c.dim(), 1);
        assert!(grad.quadratic_form(&c.vectors.column(0).into_owned()).abs() < 1e-10);
        let a = s.nullspace_basis(NullKind::Affine).unwrap();
        assert_eq!(a.dim(), 3);
        for col in a.vectors.column_iter() {
            let v = col.into_owned();
            assert!(hess.quadratic_form(&v).abs() <= 1e-10 * v.norm_squared());
        }
        let v = PolySpace::build(&square(), 3, 2).unwrap();
        let sym = v.assemble_gram(Form::SymGrad).unwrap();
        let r = v.nullspace_basis(NullKind::Rigid).unwrap();
        assert_eq!(r.dim(), 3);
        for col in r.vectors.column_iter() {
            let v = col.into_owned();
            assert!(sym.quadratic_form(&v).abs() <= 1e-10 * v.norm_squared());
        }
    }

    #[test]
    fn rigid_generators_are_skew() {
        for n in 1..=4 {
            let g = rigid_generators(n);
            assert_eq!(g.len(), n * (n + 1) / 2);
            for m in &g {
                assert_eq!(&m.rotation.transpose(), &(-&m.rotation));
            }
        }
    }

    #[test]
    fn kind_mismatches() {
        let s = PolySpace::build(&square(), 2, 1).unwrap();
        assert!(matches!(s.nullspace_basis(NullKind::Rigid), Err(Error::KindMismatch(_))));
        assert!(matches!(s.assemble_gram(Form::SymGrad), Err(Error::KindMismatch(_))));
        let v = PolySpace::build(&square(), 2, 2).unwrap();
        assert!(matches!(v.nullspace_basis(NullKind::Affine), Err(Error::KindMismatch(_))));
    }

    #[test]
    fn affine_coefficients_reproduce_values() {
        let s = PolySpace::build(&square(), 6, 1).unwrap();
        let c = s.affine_coefficients(0.3, &[-1.2, 2.5]);
        assert!(c.rows(3, c.len() - 3).iter().all(|&x| x == 0.0));
        for p in [[0.1, 0.2], [0.7, 0.9], [0.5, 0.5]] {
            let (v, g, h) = s.eval_function(&c, 0, &p);
            assert!((v - (0.3 - 1.2 * p[0] + 2.5 * p[1])).abs() < 1e-12);
            assert!((g[0] + 1.2).abs() < 1e-12 && (g[1] - 2.5).abs() < 1e-12);
            assert!(h.iter().all(|x| x.abs() < 1e-12));
        }
    }

    #[test]
    fn lower_degree_basis_is_prefix() {
        let d = square();
        let lo = PolySpace::build(&d, 3, 1).unwrap();
        let hi = PolySpace::build(&d, 6, 1).unwrap();
        for p in [[0.2, 0.3], [0.9, 0.1]] {
            let a = lo.eval_basis(&p).values;
            let b = hi.eval_basis(&p).values;
            assert!((a - b.rows(0, lo.dim())).amax() < 1e-10);
        }
    }

    #[test]
    fn trace_gram_needs_own_portion() {
        let d = square();
        let s = PolySpace::build(&d, 2, 1).unwrap();
        let moved = d.rigidly_moved(0.0, &[5.0, 0.0]).unwrap();
        let q = BoundaryPortion::from_tags(&moved, &["bottom"]).unwrap();
        assert!(matches!(s.assemble_gram(Form::L2Trace(&q)), Err(Error::SpaceMismatch)));
    }

    #[test]
    fn w22_splits_into_w12_plus_hessian() {
        let s = PolySpace::build(&square(), 5, 1).unwrap();
        let w22 = s.assemble_gram(Form::W22).unwrap().matrix;
        let w12 = s.assemble_gram(Form::W12).unwrap().matrix;
        let h = s.assemble_gram(Form::Hessian).unwrap().matrix;
        assert!((w22 - w12 - h).amax() < 1e-12 * s.dim() as f64);
    }

    #[test]
    fn grams_are_symmetric_psd() {
        let s = PolySpace::build(&square(), 6, 2).unwrap();
        for form in [Form::L2Omega, Form::Grad, Form::Hessian, Form::SymGrad, Form::W12, Form::W22] {
            let g = s.assemble_gram(form).unwrap().matrix;
            assert!((&g - g.transpose()).amax() <= 1e-12 * g.amax());
            let ev = sorted_eigenvalues(&g);
            assert!(ev[0] >= -1e-10 * ev[ev.len() - 1], "{:?}", form.kind());
        }
    }
}
