//! Domains, measurable regions and boundary portions.
//!
//! Two backends are supported: analytic balls in any dimension (regions are
//! concentric balls, no boundary portions) and triangulated polygons in the
//! plane (regions are element sets, portions are sets of tagged boundary
//! edges). All moments are exact for polynomial integrands up to
//! [`MAX_QUADRATURE_DEGREE`].

mod generators;
mod mesh;
pub mod quadrature;

use std::sync::Arc;

use nalgebra::{Matrix2, SymmetricEigen};

use crate::error::{Error, Result};
use crate::poly::MonomialSet;

pub use generators::{disk_polygon, l_shape, rectangle, unit_square};
pub use mesh::{parse_mesh, write_mesh, BoundaryEdge, Mesh2D};

/// Largest total degree of monomials that the integration backbone accepts.
pub const MAX_QUADRATURE_DEGREE: usize = 64;

/// Eigenvalues of the second-moment matrix below this fraction of its trace
/// count as zero when deciding flatness.
pub const FLATNESS_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub dim: usize,
    pub radius: f64,
    pub center: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    AnalyticBall(Ball),
    PolygonMesh(Mesh2D),
}

/// A bounded domain. Cheap to clone; the geometry itself is shared.
#[derive(Debug, Clone)]
pub struct Domain {
    inner: Arc<DomainKind>,
}

impl PartialEq for Domain {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner) || self.inner == other.inner
    }
}

impl Domain {
    pub fn ball(dim: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("ball dimension must be at least 1".into()));
        }
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidArgument(format!("ball radius must be positive, got {radius}")));
        }
        if center.len() != dim {
            return Err(Error::InvalidArgument(format!(
                "ball center has {} coordinates, expected {dim}",
                center.len()
            )));
        }
        Ok(Self {
            inner: Arc::new(DomainKind::AnalyticBall(Ball { dim, radius, center })),
        })
    }

    /// Unit-radius ball centered at the origin.
    pub fn unit_ball(dim: usize) -> Result<Self> {
        Self::ball(dim, 1.0, vec![0.0; dim])
    }

    pub fn mesh(mesh: Mesh2D) -> Result<Self> {
        mesh.validate()?;
        Ok(Self {
            inner: Arc::new(DomainKind::PolygonMesh(mesh)),
        })
    }

    pub fn kind(&self) -> &DomainKind {
        &self.inner
    }

    pub fn dim(&self) -> usize {
        match self.kind() {
            DomainKind::AnalyticBall(b) => b.dim,
            DomainKind::PolygonMesh(_) => 2,
        }
    }

    pub fn as_mesh(&self) -> Option<&Mesh2D> {
        match self.kind() {
            DomainKind::PolygonMesh(m) => Some(m),
            DomainKind::AnalyticBall(_) => None,
        }
    }

    pub fn as_ball(&self) -> Option<&Ball> {
        match self.kind() {
            DomainKind::AnalyticBall(b) => Some(b),
            DomainKind::PolygonMesh(_) => None,
        }
    }

    /// Axis-aligned bounding box as `(min, max)` corners.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match self.kind() {
            DomainKind::AnalyticBall(b) => (
                b.center.iter().map(|c| c - b.radius).collect(),
                b.center.iter().map(|c| c + b.radius).collect(),
            ),
            DomainKind::PolygonMesh(m) => {
                let mut lo = vec![f64::INFINITY; 2];
                let mut hi = vec![f64::NEG_INFINITY; 2];
                for v in &m.vertices {
                    for k in 0..2 {
                        lo[k] = lo[k].min(v[k]);
                        hi[k] = hi[k].max(v[k]);
                    }
                }
                (lo, hi)
            }
        }
    }

    /// Applies `x -> rotation * x + shift` to the geometry (2D meshes) or the
    /// center (balls; the rotation is ignored there).
    pub fn rigidly_moved(&self, angle: f64, shift: &[f64]) -> Result<Self> {
        match self.kind() {
            DomainKind::AnalyticBall(b) => {
                let center = b.center.iter().zip(shift).map(|(c, s)| c + s).collect();
                Self::ball(b.dim, b.radius, center)
            }
            DomainKind::PolygonMesh(m) => {
                let (s, c) = angle.sin_cos();
                let mut moved = m.clone();
                for v in &mut moved.vertices {
                    let x = c * v[0] - s * v[1] + shift[0];
                    let y = s * v[0] + c * v[1] + shift[1];
                    *v = [x, y];
                }
                Self::mesh(moved)
            }
        }
    }

    /// Uniform scaling about the origin.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        match self.kind() {
            DomainKind::AnalyticBall(b) => Self::ball(
                b.dim,
                b.radius * factor,
                b.center.iter().map(|c| c * factor).collect(),
            ),
            DomainKind::PolygonMesh(m) => {
                let mut moved = m.clone();
                for v in &mut moved.vertices {
                    *v = [v[0] * factor, v[1] * factor];
                }
                Self::mesh(moved)
            }
        }
    }

    fn same_as(&self, other: &Domain) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RegionKind {
    /// Ball of the given radius sharing the center of the parent ball.
    ConcentricBall { radius: f64 },
    /// Union of mesh triangles.
    ElementSet { triangles: Vec<usize> },
}

/// A measurable subset `E` of the domain with positive measure.
#[derive(Debug, Clone)]
pub struct Region {
    domain: Domain,
    kind: RegionKind,
}

impl Region {
    pub fn concentric_ball(domain: &Domain, radius: f64) -> Result<Self> {
        let ball = domain
            .as_ball()
            .ok_or_else(|| Error::KindMismatch("concentric ball regions need a ball domain".into()))?;
        if !(radius > 0.0) {
            return Err(Error::EmptyTarget);
        }
        if radius > ball.radius {
            return Err(Error::InvalidArgument(format!(
                "region radius {radius} exceeds domain radius {}",
                ball.radius
            )));
        }
        Ok(Self {
            domain: domain.clone(),
            kind: RegionKind::ConcentricBall { radius },
        })
    }

    pub fn elements(domain: &Domain, triangles: Vec<usize>) -> Result<Self> {
        let mesh = domain
            .as_mesh()
            .ok_or_else(|| Error::KindMismatch("element-set regions need a mesh domain".into()))?;
        let mut triangles = triangles;
        triangles.sort_unstable();
        triangles.dedup();
        if triangles.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if let Some(&bad) = triangles.iter().find(|&&t| t >= mesh.triangles.len()) {
            return Err(Error::InvalidArgument(format!("triangle index {bad} out of range")));
        }
        Ok(Self {
            domain: domain.clone(),
            kind: RegionKind::ElementSet { triangles },
        })
    }

    /// Triangles whose centroid lies in the closed box `[lo, hi]`.
    pub fn centroid_box(domain: &Domain, lo: [f64; 2], hi: [f64; 2]) -> Result<Self> {
        let mesh = domain
            .as_mesh()
            .ok_or_else(|| Error::KindMismatch("element-set regions need a mesh domain".into()))?;
        let tris = (0..mesh.triangles.len())
            .filter(|&t| {
                let c = mesh.triangle_centroid(t);
                (0..2).all(|k| c[k] >= lo[k] && c[k] <= hi[k])
            })
            .collect();
        Self::elements(domain, tris)
    }

    /// The whole domain viewed as a region.
    pub fn whole(domain: &Domain) -> Self {
        let kind = match domain.kind() {
            DomainKind::AnalyticBall(b) => RegionKind::ConcentricBall { radius: b.radius },
            DomainKind::PolygonMesh(m) => RegionKind::ElementSet {
                triangles: (0..m.triangles.len()).collect(),
            },
        };
        Self {
            domain: domain.clone(),
            kind,
        }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn kind(&self) -> &RegionKind {
        &self.kind
    }

    pub fn belongs_to(&self, domain: &Domain) -> bool {
        self.domain.same_as(domain) || self.domain == *domain
    }
}

/// A nonempty set of boundary edges of a mesh domain.
#[derive(Debug, Clone)]
pub struct BoundaryPortion {
    domain: Domain,
    edges: Vec<usize>,
}

impl BoundaryPortion {
    /// Every boundary edge carrying one of `tags`.
    pub fn from_tags<S: AsRef<str>>(domain: &Domain, tags: &[S]) -> Result<Self> {
        let mesh = domain.as_mesh().ok_or(Error::UnsupportedTrace)?;
        for t in tags {
            if !mesh.boundary_edges.iter().any(|e| e.tag == t.as_ref()) {
                return Err(Error::InvalidArgument(format!("unknown edge tag '{}'", t.as_ref())));
            }
        }
        let edges = mesh
            .boundary_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| tags.iter().any(|t| e.tag == t.as_ref()))
            .map(|(i, _)| i)
            .collect();
        Self::from_edges(domain, edges)
    }

    /// Boundary edges selected by index into the mesh's boundary edge list.
    pub fn from_edges(domain: &Domain, edges: Vec<usize>) -> Result<Self> {
        let mesh = domain.as_mesh().ok_or(Error::UnsupportedTrace)?;
        let mut edges = edges;
        edges.sort_unstable();
        edges.dedup();
        if edges.is_empty() {
            return Err(Error::EmptyTarget);
        }
        if let Some(&bad) = edges.iter().find(|&&e| e >= mesh.boundary_edges.len()) {
            return Err(Error::InvalidArgument(format!("boundary edge index {bad} out of range")));
        }
        Ok(Self {
            domain: domain.clone(),
            edges,
        })
    }

    /// The entire boundary.
    pub fn whole_boundary(domain: &Domain) -> Result<Self> {
        let mesh = domain.as_mesh().ok_or(Error::UnsupportedTrace)?;
        Self::from_edges(domain, (0..mesh.boundary_edges.len()).collect())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn belongs_to(&self, domain: &Domain) -> bool {
        self.domain.same_as(domain) || self.domain == *domain
    }

    fn segments(&self) -> impl Iterator<Item = ([f64; 2], [f64; 2])> + '_ {
        let mesh = self.domain.as_mesh().expect("portion on mesh");
        self.edges.iter().map(move |&e| {
            let [a, b] = mesh.boundary_edges[e].vertices;
            (mesh.vertices[a], mesh.vertices[b])
        })
    }
}

/// Anything that can be integrated over.
#[derive(Debug, Clone, Copy)]
pub enum Target<'a> {
    Domain(&'a Domain),
    Region(&'a Region),
    Portion(&'a BoundaryPortion),
}

impl<'a> From<&'a Domain> for Target<'a> {
    fn from(d: &'a Domain) -> Self {
        Target::Domain(d)
    }
}

impl<'a> From<&'a Region> for Target<'a> {
    fn from(r: &'a Region) -> Self {
        Target::Region(r)
    }
}

impl<'a> From<&'a BoundaryPortion> for Target<'a> {
    fn from(p: &'a BoundaryPortion) -> Self {
        Target::Portion(p)
    }
}

impl Target<'_> {
    pub fn domain(&self) -> &Domain {
        match self {
            Target::Domain(d) => d,
            Target::Region(r) => &r.domain,
            Target::Portion(p) => &p.domain,
        }
    }
}

/// Affine change of variables `xi = (x - center) / scale`, componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub center: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Frame {
    pub fn identity(dim: usize) -> Self {
        Self {
            center: vec![0.0; dim],
            scale: vec![1.0; dim],
        }
    }

    /// Maps the bounding box of `domain` onto `[-1, 1]^n`.
    pub fn bounding_box(domain: &Domain) -> Self {
        let (lo, hi) = domain.bounding_box();
        Self {
            center: lo.iter().zip(&hi).map(|(a, b)| 0.5 * (a + b)).collect(),
            scale: lo.iter().zip(&hi).map(|(a, b)| 0.5 * (b - a)).collect(),
        }
    }

    pub fn local(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.center)
            .zip(&self.scale)
            .map(|((x, c), s)| (x - c) / s)
            .collect()
    }
}

/// Lebesgue measure (volume, area or length) of the target.
pub fn measure<'a>(target: impl Into<Target<'a>>) -> Result<f64> {
    let target = target.into();
    let m = match target {
        Target::Domain(d) => match d.kind() {
            DomainKind::AnalyticBall(b) => ball_volume(b.dim, b.radius),
            DomainKind::PolygonMesh(m) => (0..m.triangles.len()).map(|t| m.triangle_area(t)).sum(),
        },
        Target::Region(r) => match (&r.kind, r.domain.kind()) {
            (RegionKind::ConcentricBall { radius }, DomainKind::AnalyticBall(b)) => {
                ball_volume(b.dim, *radius)
            }
            (RegionKind::ElementSet { triangles }, DomainKind::PolygonMesh(m)) => {
                triangles.iter().map(|&t| m.triangle_area(t)).sum()
            }
            _ => unreachable!("region kind always matches its domain"),
        },
        Target::Portion(p) => p.segments().map(|(a, b)| dist(&a, &b)).sum(),
    };
    if m > 0.0 {
        Ok(m)
    } else {
        Err(Error::EmptyTarget)
    }
}

/// Center of mass of the target.
pub fn centroid<'a>(target: impl Into<Target<'a>>) -> Result<Vec<f64>> {
    let target = target.into();
    if let Some(b) = target.domain().as_ball() {
        measure(target)?;
        return Ok(b.center.clone());
    }
    let mesh = target.domain().as_mesh().expect("mesh");
    let tri_centroid = |tris: &mut dyn Iterator<Item = usize>| -> Result<Vec<f64>> {
        let mut total = 0.0;
        let mut acc = [0.0; 2];
        for t in tris {
            let a = mesh.triangle_area(t);
            let c = mesh.triangle_centroid(t);
            total += a;
            acc[0] += a * c[0];
            acc[1] += a * c[1];
        }
        if total > 0.0 {
            Ok(vec![acc[0] / total, acc[1] / total])
        } else {
            Err(Error::EmptyTarget)
        }
    };
    match target {
        Target::Domain(_) => tri_centroid(&mut (0..mesh.triangles.len())),
        Target::Region(r) => match &r.kind {
            RegionKind::ElementSet { triangles } => tri_centroid(&mut triangles.iter().copied()),
            RegionKind::ConcentricBall { .. } => unreachable!(),
        },
        Target::Portion(p) => {
            let mut total = 0.0;
            let mut acc = [0.0; 2];
            for (a, b) in p.segments() {
                let l = dist(&a, &b);
                total += l;
                acc[0] += l * 0.5 * (a[0] + b[0]);
                acc[1] += l * 0.5 * (a[1] + b[1]);
            }
            if total > 0.0 {
                Ok(vec![acc[0] / total, acc[1] / total])
            } else {
                Err(Error::EmptyTarget)
            }
        }
    }
}

/// Exact diameter of the domain.
pub fn diameter(domain: &Domain) -> f64 {
    match domain.kind() {
        DomainKind::AnalyticBall(b) => 2.0 * b.radius,
        DomainKind::PolygonMesh(m) => {
            let hull = convex_hull(&m.vertices);
            let mut best = 0.0f64;
            for i in 0..hull.len() {
                for j in (i + 1)..hull.len() {
                    best = best.max(dist(&hull[i], &hull[j]));
                }
            }
            best
        }
    }
}

/// Integral of `x^alpha` over the target in global coordinates.
pub fn moment<'a>(target: impl Into<Target<'a>>, alpha: &[u32]) -> Result<f64> {
    let target = target.into();
    let dim = target.domain().dim();
    if alpha.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "multi-index has {} entries, domain dimension is {dim}",
            alpha.len()
        )));
    }
    let degree = alpha.iter().sum::<u32>() as usize;
    let set = MonomialSet::new(dim, degree);
    let values = moments_in_frame(target, &set, &Frame::identity(dim))?;
    Ok(values[set.index_of(alpha).expect("alpha within set")])
}

/// Integrals of every monomial of `set`, in the local coordinates of `frame`,
/// over the target. Entry `i` is `int_target xi^{e_i} dmu` where `mu` is the
/// volume measure (domains, regions) or the length measure (portions).
pub fn moments_in_frame<'a>(target: impl Into<Target<'a>>, set: &MonomialSet, frame: &Frame) -> Result<Vec<f64>> {
    let target = target.into();
    if set.degree() > MAX_QUADRATURE_DEGREE {
        return Err(Error::DegreeExceeded {
            requested: set.degree(),
            max: MAX_QUADRATURE_DEGREE,
        });
    }
    measure(target)?;
    match target.domain().kind() {
        DomainKind::AnalyticBall(b) => {
            let radius = match target {
                Target::Domain(_) => b.radius,
                Target::Region(r) => match r.kind {
                    RegionKind::ConcentricBall { radius } => radius,
                    RegionKind::ElementSet { .. } => unreachable!(),
                },
                Target::Portion(_) => return Err(Error::UnsupportedTrace),
            };
            Ok(ball_moments(&b.center, radius, set, frame))
        }
        DomainKind::PolygonMesh(m) => {
            let mut out = vec![0.0; set.len()];
            let mut accumulate = |x: [f64; 2], w: f64| {
                let xi = frame.local(&x);
                for (o, v) in out.iter_mut().zip(set.eval(&xi)) {
                    *o += w * v;
                }
            };
            match target {
                Target::Portion(p) => {
                    let rule = quadrature::interval_rule(set.degree());
                    for (a, b) in p.segments() {
                        let l = dist(&a, &b);
                        for &(t, w) in &rule {
                            accumulate([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * l);
                        }
                    }
                }
                _ => {
                    let rule = quadrature::triangle_rule(set.degree());
                    let tris: Vec<usize> = match target {
                        Target::Domain(_) => (0..m.triangles.len()).collect(),
                        Target::Region(r) => match &r.kind {
                            RegionKind::ElementSet { triangles } => triangles.clone(),
                            RegionKind::ConcentricBall { .. } => unreachable!(),
                        },
                        Target::Portion(_) => unreachable!(),
                    };
                    for t in tris {
                        let [p0, p1, p2] = m.triangle_vertices(t);
                        let jac = 2.0 * m.triangle_area(t);
                        for &(st, w) in &rule {
                            let x = [
                                p0[0] + st[0] * (p1[0] - p0[0]) + st[1] * (p2[0] - p0[0]),
                                p0[1] + st[0] * (p1[1] - p0[1]) + st[1] * (p2[1] - p0[1]),
                            ];
                            accumulate(x, w * jac);
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Quadrature points and weights over a mesh target, exact to `degree`.
pub fn quadrature_points<'a>(target: impl Into<Target<'a>>, degree: usize) -> Result<Vec<([f64; 2], f64)>> {
    let target = target.into();
    let m = target.domain().as_mesh().ok_or_else(|| {
        Error::KindMismatch("pointwise quadrature is only available on mesh domains".into())
    })?;
    let mut pts = Vec::new();
    match target {
        Target::Portion(p) => {
            let rule = quadrature::interval_rule(degree);
            for (a, b) in p.segments() {
                let l = dist(&a, &b);
                for &(t, w) in &rule {
                    pts.push(([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])], w * l));
                }
            }
        }
        _ => {
            let tris: Vec<usize> = match target {
                Target::Region(r) => match &r.kind {
                    RegionKind::ElementSet { triangles } => triangles.clone(),
                    RegionKind::ConcentricBall { .. } => unreachable!(),
                },
                _ => (0..m.triangles.len()).collect(),
            };
            let rule = quadrature::triangle_rule(degree);
            for t in tris {
                let [p0, p1, p2] = m.triangle_vertices(t);
                let jac = 2.0 * m.triangle_area(t);
                for &(st, w) in &rule {
                    pts.push((
                        [
                            p0[0] + st[0] * (p1[0] - p0[0]) + st[1] * (p2[0] - p0[0]),
                            p0[1] + st[0] * (p1[1] - p0[1]) + st[1] * (p2[1] - p0[1]),
                        ],
                        w * jac,
                    ));
                }
            }
        }
    }
    Ok(pts)
}

/// Dimension of the affine hull of a boundary portion and its flatness.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineHull {
    pub dim: usize,
    pub flat: bool,
    /// Eigenvalues of the centered second-moment matrix, ascending.
    pub eigenvalues: Vec<f64>,
    /// Unit normal of the supporting line when flat.
    pub normal: Option<[f64; 2]>,
}

pub fn affine_hull_dim(portion: &BoundaryPortion) -> Result<AffineHull> {
    let c = centroid(portion)?;
    let mut m = Matrix2::zeros();
    let rule = quadrature::interval_rule(2);
    for (a, b) in portion.segments() {
        let l = dist(&a, &b);
        for &(t, w) in &rule {
            let d = [
                a[0] + t * (b[0] - a[0]) - c[0],
                a[1] + t * (b[1] - a[1]) - c[1],
            ];
            for i in 0..2 {
                for j in 0..2 {
                    m[(i, j)] += w * l * d[i] * d[j];
                }
            }
        }
    }
    let trace = m.trace();
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, [f64; 2])> = (0..2)
        .map(|k| (eig.eigenvalues[k], [eig.eigenvectors[(0, k)], eig.eigenvectors[(1, k)]]))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dim = pairs.iter().filter(|(l, _)| *l > FLATNESS_TOLERANCE * trace).count();
    let flat = dim < 2;
    Ok(AffineHull {
        dim,
        flat,
        eigenvalues: pairs.iter().map(|p| p.0).collect(),
        normal: flat.then_some(pairs[0].1),
    })
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Gamma(m / 2) for a positive integer `m`.
fn gamma_half(m: u32) -> f64 {
    let mut g = if m % 2 == 0 { 1.0 } else { std::f64::consts::PI.sqrt() };
    let mut x = if m % 2 == 0 { 1.0 } else { 0.5 };
    while x < m as f64 / 2.0 - 0.25 {
        g *= x;
        x += 1.0;
    }
    g
}

pub(crate) fn ball_volume(dim: usize, radius: f64) -> f64 {
    std::f64::consts::PI.powf(dim as f64 / 2.0) * radius.powi(dim as i32) / gamma_half(dim as u32 + 2)
}

/// `int_{B_r(0)} y^beta dy`.
fn centered_ball_moment(beta: &[u32], radius: f64) -> f64 {
    if beta.iter().any(|b| b % 2 == 1) {
        return 0.0;
    }
    let n = beta.len() as u32;
    let total: u32 = beta.iter().sum();
    let sphere = 2.0 * beta.iter().map(|&b| gamma_half(b + 1)).product::<f64>() / gamma_half(total + n);
    radius.powi((total + n) as i32) / (total + n) as f64 * sphere
}

fn ball_moments(center: &[f64], radius: f64, set: &MonomialSet, frame: &Frame) -> Vec<f64> {
    let delta: Vec<f64> = center.iter().zip(&frame.center).map(|(c, f)| c - f).collect();
    set.exponents()
        .iter()
        .map(|alpha| {
            // Binomial expansion of prod ((y_i + delta_i) / s_i)^{alpha_i}.
            let mut terms: Vec<(Vec<u32>, f64)> = vec![(Vec::new(), 1.0)];
            for (i, &a) in alpha.iter().enumerate() {
                let mut next = Vec::new();
                for (beta, coeff) in &terms {
                    for b in 0..=a {
                        let shift = a - b;
                        if shift > 0 && delta[i] == 0.0 {
                            continue;
                        }
                        let c = coeff
                            * crate::poly::binomial(a as usize, b as usize) as f64
                            * delta[i].powi(shift as i32)
                            / frame.scale[i].powi(a as i32);
                        let mut nb = beta.clone();
                        nb.push(b);
                        next.push((nb, c));
                    }
                }
                terms = next;
            }
            terms
                .iter()
                .map(|(beta, c)| c * centered_ball_moment(beta, radius))
                .sum()
        })
        .collect()
}

fn convex_hull(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64; 2], a: &[f64; 2], b: &[f64; 2]| {
        (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
    };
    let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
    for p in pts.iter().chain(pts.iter().rev().skip(1)) {
        while hull.len() >= 2 && cross(&hull[hull.len() - 2], &hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(*p);
    }
    hull.pop();
    hull
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn square() -> Domain {
        Domain::mesh(unit_square(4)).unwrap()
    }

    #[test]
    fn unit_square_measure_and_centroid() {
        let d = square();
        assert!((measure(&d).unwrap() - 1.0).abs() < 1e-14);
        let c = centroid(&d).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-14 && (c[1] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn unit_disk_measure_is_pi() {
        let d = Domain::unit_ball(2).unwrap();
        assert!((measure(&d).unwrap() - PI).abs() < 1e-14);
        let b3 = Domain::unit_ball(3).unwrap();
        assert!((measure(&b3).unwrap() - 4.0 * PI / 3.0).abs() < 1e-14);
        let b1 = Domain::ball(1, 2.0, vec![5.0]).unwrap();
        assert!((measure(&b1).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn bottom_edge_length_and_centroid() {
        let d = square();
        let g = BoundaryPortion::from_tags(&d, &["bottom"]).unwrap();
        assert!((measure(&g).unwrap() - 1.0).abs() < 1e-14);
        let c = centroid(&g).unwrap();
        assert!((c[0] - 0.5).abs() < 1e-14 && c[1].abs() < 1e-14);
    }

    #[test]
    fn ball_centroid_is_center() {
        let d = Domain::ball(3, 0.7, vec![1.0, -2.0, 0.5]).unwrap();
        assert_eq!(centroid(&d).unwrap(), vec![1.0, -2.0, 0.5]);
    }

    #[test]
    fn diameters() {
        assert!((diameter(&square()) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(diameter(&Domain::unit_ball(2).unwrap()), 2.0);
        let r = Domain::mesh(rectangle(2.0, 1.0, 4, 2)).unwrap();
        assert!((diameter(&r) - 5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn disk_second_moment_polar_oracle() {
        // int_{B_1} x^2 = int_0^1 int_0^{2pi} r^2 cos^2 t r dt dr = pi/4
        let d = Domain::unit_ball(2).unwrap();
        assert!((moment(&d, &[2, 0]).unwrap() - PI / 4.0).abs() < 1e-14);
        assert!((moment(&d, &[2, 2]).unwrap() - PI / 24.0).abs() < 1e-14);
    }

    #[test]
    fn square_product_moment() {
        assert!((moment(&square(), &[1, 1]).unwrap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn odd_ball_moments_vanish() {
        let d = Domain::unit_ball(3).unwrap();
        for alpha in [[1, 0, 0], [3, 2, 0], [2, 2, 1], [1, 1, 1]] {
            assert_eq!(moment(&d, &alpha).unwrap(), 0.0);
        }
    }

    #[test]
    fn shifted_ball_moments_use_binomial_expansion() {
        // int_{B_1(c)} x_1 = c_1 |B_1|, int x_1^2 = c_1^2 |B| + pi/4
        let d = Domain::ball(2, 1.0, vec![2.0, -1.0]).unwrap();
        assert!((moment(&d, &[1, 0]).unwrap() - 2.0 * PI).abs() < 1e-13);
        assert!((moment(&d, &[2, 0]).unwrap() - (4.0 * PI + PI / 4.0)).abs() < 1e-12);
        assert!((moment(&d, &[1, 1]).unwrap() - (-2.0 * PI)).abs() < 1e-13);
    }

    #[test]
    fn degree_limit_is_enforced() {
        let set = MonomialSet::new(2, MAX_QUADRATURE_DEGREE + 1);
        let err = moments_in_frame(&square(), &set, &Frame::identity(2)).unwrap_err();
        assert!(matches!(err, Error::DegreeExceeded { .. }));
    }

    #[test]
    fn flatness_verdicts() {
        let d = square();
        let bottom = BoundaryPortion::from_tags(&d, &["bottom"]).unwrap();
        let h = affine_hull_dim(&bottom).unwrap();
        assert_eq!((h.dim, h.flat), (1, true));
        let n = h.normal.unwrap();
        assert!(n[0].abs() < 1e-12 && (n[1].abs() - 1.0).abs() < 1e-12);

        let corner = BoundaryPortion::from_tags(&d, &["bottom", "left"]).unwrap();
        let h = affine_hull_dim(&corner).unwrap();
        assert_eq!((h.dim, h.flat), (2, false));
    }

    #[test]
    fn disjoint_collinear_pieces_are_flat() {
        let d = square();
        let mesh = d.as_mesh().unwrap();
        let bottom: Vec<usize> = mesh
            .boundary_edges
            .iter()
            .enumerate()
            .filter(|(_, e)| e.tag == "bottom")
            .map(|(i, _)| i)
            .collect();
        let pieces = BoundaryPortion::from_edges(&d, vec![bottom[0], bottom[3]]).unwrap();
        let h = affine_hull_dim(&pieces).unwrap();
        assert_eq!((h.dim, h.flat), (1, true));
    }

    #[test]
    fn empty_selections_are_rejected() {
        let d = square();
        assert_eq!(BoundaryPortion::from_edges(&d, vec![]).unwrap_err(), Error::EmptyTarget);
        assert_eq!(Region::elements(&d, vec![]).unwrap_err(), Error::EmptyTarget);
    }

    #[test]
    fn trace_needs_mesh() {
        let b = Domain::unit_ball(2).unwrap();
        assert_eq!(BoundaryPortion::whole_boundary(&b).unwrap_err(), Error::UnsupportedTrace);
    }

    #[test]
    fn gamma_half_values() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(2), 1.0);
        assert!((gamma_half(5) - 0.75 * PI.sqrt()).abs() < 1e-15);
        assert_eq!(gamma_half(8), 6.0);
    }
}
