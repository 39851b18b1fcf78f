//! TOML run configuration. See `docs/config.md` for the schema.

use std::path::{Path, PathBuf};

use poincare_korn::geometry::{disk_polygon, l_shape, parse_mesh, rectangle, unit_square};
use poincare_korn::verify::Tolerances;
use poincare_korn::{BoundaryPortion, CaseKind, CertifySetup, Domain, Region};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_name")]
    pub name: String,
    pub domain: DomainSpec,
    #[serde(default)]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub portion: Option<PortionSpec>,
    #[serde(default)]
    pub degrees: Degrees,
    #[serde(default)]
    pub cases: Vec<String>,
    #[serde(default)]
    pub trials: Option<Trials>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub tolerances: ToleranceSpec,
    #[serde(default)]
    pub output: OutputSpec,
    /// Directory that relative mesh paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_name() -> String {
    "run".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    UnitSquare {
        #[serde(default = "default_cells")]
        cells: usize,
    },
    Rectangle {
        width: f64,
        height: f64,
        #[serde(default = "default_cells")]
        cells_x: usize,
        #[serde(default = "default_cells")]
        cells_y: usize,
    },
    LShape {
        #[serde(default = "default_cells")]
        cells: usize,
    },
    DiskPolygon {
        #[serde(default = "one")]
        radius: f64,
        sides: usize,
    },
    Ball {
        dim: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    MeshFile {
        path: PathBuf,
    },
}

fn default_cells() -> usize {
    4
}

fn one() -> f64 {
    1.0
}

/// Exactly one selector must be set.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionSpec {
    /// Triangles with centroid in `[lo, hi]`.
    #[serde(rename = "box")]
    pub bbox: Option<[[f64; 2]; 2]>,
    pub elements: Option<Vec<usize>>,
    /// Concentric ball radius (ball domains).
    pub radius: Option<f64>,
    /// Fraction of the domain: a corner box of relative area `f` on meshes,
    /// a concentric ball of relative volume `f` on balls.
    pub fraction: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PortionSpec {
    pub tags: Option<Vec<String>>,
    pub edges: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Degrees {
    #[serde(default = "default_scalar")]
    pub scalar: usize,
    #[serde(default = "default_vector")]
    pub vector: usize,
}

fn default_scalar() -> usize {
    poincare_korn::polyspace::DEFAULT_SCALAR_DEGREE
}

fn default_vector() -> usize {
    poincare_korn::polyspace::DEFAULT_VECTOR_DEGREE
}

impl Default for Degrees {
    fn default() -> Self {
        Self {
            scalar: default_scalar(),
            vector: default_vector(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trials {
    #[serde(default = "default_count")]
    pub count: usize,
    pub seed: Option<u64>,
}

fn default_count() -> usize {
    1000
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceSpec {
    pub relative: Option<f64>,
    pub absolute: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

/// A validated configuration with its geometry built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub setup: CertifySetup,
    pub cases: Vec<CaseKind>,
    pub workers: usize,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigInvalid(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let mut config = Self::from_toml(&text)?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    pub fn parsed_cases(&self) -> Result<Vec<CaseKind>, CliError> {
        self.cases
            .iter()
            .map(|c| CaseKind::parse(c).ok_or_else(|| CliError::ConfigInvalid(format!("unknown case '{c}'"))))
            .collect()
    }

    pub fn build_domain(&self) -> Result<Domain, CliError> {
        let positive = |n: usize, what: &str| {
            if n == 0 {
                Err(CliError::ConfigInvalid(format!("{what} must be at least 1")))
            } else {
                Ok(n)
            }
        };
        let domain = match &self.domain {
            DomainSpec::UnitSquare { cells } => Domain::mesh(unit_square(positive(*cells, "cells")?)),
            DomainSpec::Rectangle {
                width,
                height,
                cells_x,
                cells_y,
            } => {
                if !(*width > 0.0 && *height > 0.0) {
                    return Err(CliError::ConfigInvalid("rectangle sides must be positive".into()));
                }
                Domain::mesh(rectangle(*width, *height, positive(*cells_x, "cells_x")?, positive(*cells_y, "cells_y")?))
            }
            DomainSpec::LShape { cells } => Domain::mesh(l_shape(positive(*cells, "cells")?)),
            DomainSpec::DiskPolygon { radius, sides } => {
                if *sides < 3 || !(*radius > 0.0) {
                    return Err(CliError::ConfigInvalid("disk_polygon needs sides >= 3 and radius > 0".into()));
                }
                Domain::mesh(disk_polygon(*radius, *sides))
            }
            DomainSpec::Ball { dim, radius, center } => {
                Domain::ball(*dim, *radius, center.clone().unwrap_or_else(|| vec![0.0; *dim]))
            }
            DomainSpec::MeshFile { path } => {
                let full = self.base_dir.join(path);
                let text = std::fs::read_to_string(&full).map_err(|e| CliError::Io(format!("{}: {e}", full.display())))?;
                let mesh = parse_mesh(&text).map_err(CliError::Mesh)?;
                Domain::mesh(mesh)
            }
        };
        domain.map_err(|e| CliError::ConfigInvalid(format!("domain: {e}")))
    }

    pub fn build_region(&self, domain: &Domain) -> Result<Option<Region>, CliError> {
        let Some(spec) = &self.region else {
            return Ok(None);
        };
        build_region(spec, domain).map(Some)
    }

    pub fn build_portion(&self, domain: &Domain) -> Result<Option<BoundaryPortion>, CliError> {
        let Some(spec) = &self.portion else {
            return Ok(None);
        };
        let portion = match (&spec.tags, &spec.edges) {
            (Some(tags), None) => BoundaryPortion::from_tags(domain, tags),
            (None, Some(edges)) => BoundaryPortion::from_edges(domain, edges.clone()),
            _ => return Err(CliError::ConfigInvalid("portion needs exactly one of 'tags' or 'edges'".into())),
        };
        portion.map(Some).map_err(|e| CliError::ConfigInvalid(format!("portion: {e}")))
    }

    pub fn tolerances(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            relative: self.tolerances.relative.unwrap_or(d.relative),
            absolute: self.tolerances.absolute.unwrap_or(d.absolute),
        }
    }

    /// Validates the configuration and builds the geometry. `seed` overrides
    /// the configured seed; one of the two must be present when trials run.
    pub fn scenario(&self, seed: Option<u64>, need_trials: bool) -> Result<Scenario, CliError> {
        if self.degrees.scalar < 1 || self.degrees.vector < 1 {
            return Err(CliError::ConfigInvalid("degrees must be at least 1".into()));
        }
        let tol = self.tolerances();
        if !(tol.relative >= 0.0 && tol.absolute >= 0.0) {
            return Err(CliError::ConfigInvalid("tolerances must be nonnegative".into()));
        }
        let cases = self.parsed_cases()?;
        let trials = self.trials.unwrap_or(Trials {
            count: default_count(),
            seed: None,
        });
        let seed = seed.or(trials.seed);
        if need_trials && !cases.is_empty() {
            if trials.count == 0 {
                return Err(CliError::ConfigInvalid("trials.count must be at least 1".into()));
            }
            if seed.is_none() {
                return Err(CliError::ConfigInvalid("a seed is required when random trials run".into()));
            }
        }
        let domain = self.build_domain()?;
        let region = self.build_region(&domain)?;
        let portion = self.build_portion(&domain)?;
        let mut setup = CertifySetup::new(domain);
        setup.region = region;
        setup.portion = portion;
        setup.scalar_degree = self.degrees.scalar;
        setup.vector_degree = self.degrees.vector;
        setup.trials = trials.count;
        setup.seed = seed.unwrap_or(0);
        setup.tolerances = tol;
        Ok(Scenario {
            name: self.name.clone(),
            setup,
            cases,
            workers: self.workers.unwrap_or(1).max(1),
        })
    }
}

pub fn build_region(spec: &RegionSpec, domain: &Domain) -> Result<Region, CliError> {
    let set = [spec.bbox.is_some(), spec.elements.is_some(), spec.radius.is_some(), spec.fraction.is_some()]
        .iter()
        .filter(|b| **b)
        .count();
    if set != 1 {
        return Err(CliError::ConfigInvalid(
            "region needs exactly one of 'box', 'elements', 'radius' or 'fraction'".into(),
        ));
    }
    let region = if let Some([lo, hi]) = spec.bbox {
        Region::centroid_box(domain, lo, hi)
    } else if let Some(el) = &spec.elements {
        Region::elements(domain, el.clone())
    } else if let Some(r) = spec.radius {
        Region::concentric_ball(domain, r)
    } else {
        let f = spec.fraction.expect("one selector set");
        if !(f > 0.0 && f <= 1.0) {
            return Err(CliError::ConfigInvalid(format!("region fraction must lie in (0, 1], got {f}")));
        }
        match domain.as_ball() {
            Some(b) => Region::concentric_ball(domain, b.radius * f.powf(1.0 / b.dim as f64)),
            None => {
                let (lo, hi) = domain.bounding_box();
                let side = f.sqrt();
                Region::centroid_box(
                    domain,
                    [lo[0], lo[1]],
                    [lo[0] + side * (hi[0] - lo[0]), lo[1] + side * (hi[1] - lo[1])],
                )
            }
        }
    };
    region.map_err(|e| CliError::ConfigInvalid(format!("region: {e}")))
}
