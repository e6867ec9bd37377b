use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use warped::profile::Spacing;
use warped::verifier::{FamilyMember, SuiteConfig};
use warped::{make_preset, ManifoldSpec};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridSpacing {
    Geometric,
    Uniform,
}

impl From<GridSpacing> for Spacing {
    fn from(s: GridSpacing) -> Self {
        match s {
            GridSpacing::Geometric => Spacing::Geometric,
            GridSpacing::Uniform => Spacing::Uniform,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldConfig {
    pub dimension: usize,
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub r_min: f64,
    pub r_max: f64,
    pub n_points: usize,
    pub spacing: GridSpacing,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_min: 1e-3,
            r_max: 30.0,
            n_points: 400,
            spacing: GridSpacing::Geometric,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralConfig {
    pub r_max: f64,
    pub n: usize,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self { r_max: 40.0, n: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BallConfig {
    pub r: f64,
}

impl Default for BallConfig {
    fn default() -> Self {
        Self { r: 1.0 }
    }
}

/// `u = radius (1 + eps Y)`. In the plane `Y` is a Fourier series, above it
/// is the polynomial `linear · x + x^T quadratic x` restricted to the sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GraphConfig {
    pub radius: f64,
    pub eps: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
    pub linear: Vec<f64>,
    pub quadratic: Vec<Vec<f64>>,
    pub per_angle: Option<usize>,
    pub mc_samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            radius: 1.0,
            eps: 0.0,
            cos: Vec::new(),
            sin: Vec::new(),
            linear: Vec::new(),
            quadratic: Vec::new(),
            per_angle: None,
            mc_samples: None,
            seed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub family: Option<PathBuf>,
    pub r_max: f64,
    pub grid_points: usize,
    pub spectral_n: usize,
    pub seed: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        let s = SuiteConfig::default();
        Self {
            family: None,
            r_max: s.r_max,
            grid_points: s.grid_points,
            spectral_n: s.spectral_n,
            seed: s.seed,
        }
    }
}

impl VerifyConfig {
    pub fn suite(&self) -> SuiteConfig {
        SuiteConfig {
            r_max: self.r_max,
            grid_points: self.grid_points,
            spectral_n: self.spectral_n,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub format: Option<Format>,
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub manifold: Option<ManifoldConfig>,
    pub grid: GridConfig,
    pub spectral: SpectralConfig,
    pub ball: BallConfig,
    pub graph: GraphConfig,
    pub verify: VerifyConfig,
    pub output: OutputConfig,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub r: Option<f64>,
    pub rmax: Option<f64>,
    pub n: Option<usize>,
    pub cells: Option<usize>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
    pub family: Option<PathBuf>,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::ConfigParse(m) => CliError::ConfigParse(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::ConfigParse(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(r) = o.r {
            self.ball.r = r;
            self.graph.radius = r;
        }
        if let Some(r) = o.rmax {
            self.grid.r_max = r;
            self.spectral.r_max = r;
        }
        if let (Some(n), Some(m)) = (o.n, self.manifold.as_mut()) {
            m.dimension = n;
        }
        if let Some(n) = o.cells {
            self.spectral.n = n;
        }
        if o.format.is_some() {
            self.output.format = o.format;
        }
        if o.out.is_some() {
            self.output.path = o.out.clone();
        }
        if o.family.is_some() {
            self.verify.family = o.family.clone();
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let g = &self.grid;
        if !(g.r_min > 0.0 && g.r_min.is_finite()) {
            return Err(invalid(format!("grid.r_min must be positive, got {}", g.r_min)));
        }
        if !(g.r_max > g.r_min && g.r_max.is_finite()) {
            return Err(invalid(format!("grid.r_max must exceed r_min, got {}", g.r_max)));
        }
        if g.n_points < 3 {
            return Err(invalid(format!("grid.n_points must be at least 3, got {}", g.n_points)));
        }
        if self.spectral.n < 100 {
            return Err(invalid(format!("spectral.n must be at least 100, got {}", self.spectral.n)));
        }
        if !(self.spectral.r_max > 0.0 && self.spectral.r_max.is_finite()) {
            return Err(invalid(format!("spectral.r_max must be positive, got {}", self.spectral.r_max)));
        }
        if !(self.ball.r > 0.0 && self.ball.r.is_finite()) {
            return Err(invalid(format!("ball.r must be positive, got {}", self.ball.r)));
        }
        if let Some(m) = &self.manifold {
            if m.dimension < 2 {
                return Err(invalid(format!("manifold.dimension must be at least 2, got {}", m.dimension)));
            }
        }
        Ok(())
    }

    pub fn manifold(&self) -> Result<ManifoldSpec, CliError> {
        let m = self
            .manifold
            .as_ref()
            .ok_or_else(|| invalid("config has no [manifold] section"))?;
        build_manifold(m)
    }

    pub fn format(&self) -> Format {
        match (self.output.format, &self.output.path) {
            (Some(f), _) => f,
            (None, Some(p)) if p.extension().is_some_and(|e| e == "json") => Format::Json,
            _ => Format::Csv,
        }
    }
}

pub fn build_manifold(m: &ManifoldConfig) -> Result<ManifoldSpec, CliError> {
    let psi = make_preset(&m.kind, &m.params).map_err(|e| invalid(e.to_string()))?;
    let spec = ManifoldSpec::new(m.dimension, psi).map_err(|e| invalid(e.to_string()))?;
    Ok(spec.with_default_scan()?)
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyEntry {
    dimension: usize,
    kind: String,
    #[serde(default)]
    params: Vec<f64>,
    known_cii: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    manifold: Vec<FamilyEntry>,
}

/// A family file is a list of `[[manifold]]` tables.
pub fn load_family(path: &Path) -> Result<Vec<FamilyMember>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let file: FamilyFile =
        toml::from_str(&text).map_err(|e| CliError::ConfigParse(format!("{}: {e}", path.display())))?;
    if file.manifold.is_empty() {
        return Err(invalid("family file lists no manifolds"));
    }
    file.manifold
        .iter()
        .map(|e| {
            let spec = build_manifold(&ManifoldConfig {
                dimension: e.dimension,
                kind: e.kind.clone(),
                params: e.params.clone(),
            })?;
            let member = FamilyMember::new(spec)?;
            Ok(match e.known_cii {
                Some(k) => member.with_known_cii(k),
                None => member,
            })
        })
        .collect()
}
