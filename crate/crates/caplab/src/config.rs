//! Scenario files (TOML).
//!
//! ```toml
//! name = "cassini"
//! [geometry]
//! fixture = "cassini"
//! params = { r = 0.8, R = 2.0 }
//! [grid]
//! n = 257
//! [analyses.vanishing]
//! [analyses.dendrite]
//! seed = "auto"
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use caplab_core::fixtures::Fixture;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub analyses: Analyses,
}

/// Either a named fixture or a geometry JSON file (relative to the config).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_n")]
    pub n: usize,
    /// Half-width of the square grid; fixtures and files pick their own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub half: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
}

fn default_n() -> usize {
    129
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { n: default_n(), half: None, center: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Harmonic,
    PHarmonic,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SolverKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
    #[serde(default = "default_tol_outer")]
    pub tol_outer: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_reg: Option<f64>,
}

fn default_tol() -> f64 {
    caplab_core::laplace::DEFAULT_TOL
}
fn default_tol_outer() -> f64 {
    caplab_core::plaplace::DEFAULT_TOL_OUTER
}
fn default_max_outer() -> usize {
    caplab_core::plaplace::DEFAULT_MAX_OUTER
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            kind: None,
            p: None,
            tol: default_tol(),
            max_iter: None,
            tol_outer: default_tol_outer(),
            max_outer: default_max_outer(),
            eps_reg: None,
        }
    }
}

/// Enabled analyses; a present table enables the analysis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Analyses {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonvanishing: Option<NonVanishing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vanishing: Option<Vanishing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub critical: Option<CriticalAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jacobian: Option<JacobianAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dendrite: Option<DendriteAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<EnergyAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub starlike: Option<StarlikeAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone: Option<MonotoneAnalysis>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beltrami: Option<BeltramiAnalysis>,
}

/// Max error against the closed-form solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleAnalysis {
    #[serde(default = "default_oracle_tol")]
    pub tolerance: f64,
}

fn default_oracle_tol() -> f64 {
    1e-2
}

/// Lower bound on the gradient away from the boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonVanishing {
    #[serde(default = "default_margin4")]
    pub margin: u32,
    /// Absolute lower bound (default: strictly positive).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    /// Lower bound as a fraction of the closed-form minimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_fraction_of_oracle: Option<f64>,
    /// Relative distance allowed from the closed-form minimum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_rel_tol: Option<f64>,
}

fn default_margin4() -> u32 {
    4
}

/// The gradient at the node nearest `center` is small.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Vanishing {
    #[serde(default)]
    pub center: [f64; 2],
    /// Bound as a fraction of the data range.
    #[serde(default = "default_vanishing_rel")]
    pub relative_threshold: f64,
}

fn default_vanishing_rel() -> f64 {
    5e-3
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CriticalAnalysis {
    #[serde(default = "default_margin2")]
    pub margin: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_rank_zero: Option<usize>,
    #[serde(default)]
    pub expect_no_rank_one: bool,
    /// Expected rank-one locus: circle `[cx, cy, radius]` within the domain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_one_circle: Option<[f64; 3]>,
    #[serde(default = "default_hausdorff_cells")]
    pub hausdorff_cells: f64,
}

fn default_margin2() -> u32 {
    caplab_core::analysis::DEFAULT_MARGIN
}
fn default_hausdorff_cells() -> f64 {
    2.0
}

/// Positive Jacobian at every interior node with the given margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JacobianAnalysis {
    #[serde(default = "default_margin4")]
    pub margin: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seed {
    Point([f64; 2]),
    Keyword(String),
}

impl Default for Seed {
    fn default() -> Self {
        Seed::Keyword("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DendriteAnalysis {
    /// `"auto"` (first rank-zero critical point) or `[x, y]`.
    #[serde(default)]
    pub seed: Seed,
    /// Defaults to the field value at the seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_node_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect_bounded_faces: Option<usize>,
    /// Apply the face checks of a two-constant capacitor dendrone; defaults
    /// to true for two-constant data seeded at a critical point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacitor_dendrone: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyAnalysis {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<f64>,
    #[serde(default = "default_energy_rel")]
    pub rel_tol: f64,
}

fn default_energy_rel() -> f64 {
    0.03
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarlikeAnalysis {
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_directions() -> usize {
    720
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MonotoneAnalysis {}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeltramiAnalysis {
    /// Allowed excess over `(K - 1)/(K + 1)`.
    #[serde(default = "default_slack")]
    pub slack: f64,
}

fn default_slack() -> f64 {
    0.1
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let sc: Scenario = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut sc = Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            e => e,
        })?;
        if let Some(f) = &sc.geometry.file {
            if f.is_relative() {
                sc.geometry.file = Some(path.parent().unwrap_or(Path::new(".")).join(f));
            }
        }
        Ok(sc)
    }

    /// The named fixture, with every parameter spelled out.
    pub fn fixture(&self) -> Result<Option<Fixture>> {
        let Some(name) = &self.geometry.fixture else { return Ok(None) };
        let params: Vec<(&str, f64)> = self.geometry.params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        Ok(Some(Fixture::with_params(name, &params)?))
    }

    /// Fills defaults (fixture parameters, solver kind and exponent) and
    /// checks that the analyses fit the solver and data.
    pub fn resolve(mut self) -> Result<Self> {
        let bad = |m: String| Err(Error::Config(format!("scenario '{}': {m}", self.name)));
        match (&self.geometry.fixture, &self.geometry.file) {
            (Some(_), Some(_)) => return bad("geometry takes either a fixture or a file, not both".into()),
            (None, None) => return bad("geometry needs a fixture or a file".into()),
            (None, Some(_)) if !self.geometry.params.is_empty() => {
                return bad("params only apply to fixtures".into())
            }
            _ => {}
        }
        let fixture = self.fixture()?;
        if let Some(f) = fixture {
            self.geometry.params = f.params().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        }
        let fixture_p = fixture.and_then(|f| f.p());
        let kind = self.solver.kind.unwrap_or(if fixture_p.is_some() { SolverKind::PHarmonic } else { SolverKind::Harmonic });
        self.solver.kind = Some(kind);
        match kind {
            SolverKind::Harmonic => {
                if self.solver.p.is_some() {
                    return bad("p is only used by the p-harmonic solver".into());
                }
                if fixture_p.is_some() {
                    return bad("a p-harmonic fixture needs the p-harmonic solver".into());
                }
                if self.analyses.beltrami.is_some() {
                    return bad("the beltrami analysis needs the p-harmonic solver".into());
                }
            }
            SolverKind::PHarmonic => {
                let p = match (self.solver.p, fixture_p) {
                    (Some(a), Some(b)) if a != b => return bad(format!("solver p = {a} but fixture p = {b}")),
                    (Some(a), _) | (None, Some(a)) => a,
                    (None, None) => return bad("the p-harmonic solver needs p".into()),
                };
                self.solver.p = Some(p);
                if fixture.is_some_and(|f| !f.is_real()) {
                    return bad("the p-harmonic solver needs real two-constant data".into());
                }
                if self.analyses.jacobian.is_some() || self.analyses.energy.is_some() {
                    return bad("jacobian and energy analyses need the harmonic solver".into());
                }
            }
        }
        if self.analyses.oracle.is_some() && fixture.and_then(|f| f.analytic()).is_none() {
            return bad("the oracle analysis needs a fixture with a closed-form solution".into());
        }
        if self.analyses.jacobian.is_some() && fixture.is_some_and(|f| f.is_real()) {
            return bad("the jacobian analysis needs complex data".into());
        }
        if let Some(d) = &self.analyses.dendrite {
            if let Seed::Keyword(k) = &d.seed {
                if k != "auto" {
                    return bad(format!("dendrite seed must be \"auto\" or [x, y], got \"{k}\""));
                }
            }
        }
        if self.grid.n < caplab_core::GridSpec::MIN_NODES {
            return bad(format!("grid.n must be at least {}", caplab_core::GridSpec::MIN_NODES));
        }
        Ok(self)
    }
}
