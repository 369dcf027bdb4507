//! JSON run configuration.

use serde::{Deserialize, Serialize};

use crate::bounds::ConstantMode;
use crate::error::{Error, Result};
use crate::lightcone::exponents;
use crate::quantum::DEFAULT_DIM_CAP;
use crate::bounds::DEFAULT_CHAIN_LIMIT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub lattice: LatticeConfig,
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub observables: ObservablesConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub bound: BoundConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub limits: LimitsConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LatticeConfig {
    Chain { length: usize },
    Grid { dimension: usize, side: usize },
    /// Full distance table; `dimension` is the growth exponent `D`.
    Custom { distances: Vec<Vec<f64>>, dimension: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InteractionConfig {
    PowerLawTwoBody {
        #[serde(rename = "C1")]
        c1: f64,
        alpha: f64,
        #[serde(default)]
        pattern: PatternName,
        /// Overrides the lattice's `D` in the coupling exponent `α + D`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        dimension: Option<f64>,
    },
    Explicit {
        terms: Vec<TermConfig>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternName {
    Ising,
    #[default]
    Xy,
    Heisenberg,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    pub sites: Vec<usize>,
    /// Rows of `[re, im]` pairs; qubit sites, so `2^|sites|` square.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesConfig {
    #[serde(rename = "A", default = "default_a")]
    pub a: OperatorConfig,
    #[serde(rename = "B", default = "default_b")]
    pub b: OperatorConfig,
}

impl Default for ObservablesConfig {
    fn default() -> Self {
        Self {
            a: default_a(),
            b: default_b(),
        }
    }
}

fn default_a() -> OperatorConfig {
    OperatorConfig::Pauli {
        op: PauliName::X,
        site: Some(0),
    }
}

fn default_b() -> OperatorConfig {
    OperatorConfig::Pauli {
        op: PauliName::Z,
        site: None,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OperatorConfig {
    /// A single-site Pauli. For `B` a missing site means "sweep over sites".
    Pauli {
        op: PauliName,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        site: Option<usize>,
    },
    Matrix {
        sites: Vec<usize>,
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PauliName {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    /// Grid points; a range includes `stop` when it lies on the lattice
    /// `start + k step` up to `1e-9 step`.
    pub fn values(&self) -> Vec<f64> {
        match self {
            GridSpec::Values(v) => v.clone(),
            GridSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Vec::new();
                }
                let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
                (0..n).map(|k| start + k as f64 * step).collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_t_grid")]
    pub t_grid: GridSpec,
    /// Sites for a single-site `B`; default is every site outside `supp A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_sites: Option<Vec<usize>>,
    /// Alternatively, every site at one of these distances from `supp A`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_grid: Option<Vec<f64>>,
    #[serde(default = "default_policies")]
    pub r_policies: Vec<RPolicy>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            t_grid: default_t_grid(),
            b_sites: None,
            r_grid: None,
            r_policies: default_policies(),
        }
    }
}

fn default_t_grid() -> GridSpec {
    GridSpec::Range {
        start: 0.0,
        stop: 2.0,
        step: 0.1,
    }
}

fn default_policies() -> Vec<RPolicy> {
    vec![RPolicy::Fixed { value: 1.5 }]
}

/// How the cutoff `R` is chosen for a row at distance `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RPolicy {
    Fixed { value: f64 },
    /// `R = max(1, r^κ)` with `κ = (D+1)/(α+1)`.
    KappaRule,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSelection {
    PaperForm,
    #[default]
    NumericTight,
    Both,
}

impl ModeSelection {
    pub fn modes(self) -> Vec<ConstantMode> {
        match self {
            ModeSelection::PaperForm => vec![ConstantMode::PaperForm],
            ModeSelection::NumericTight => vec![ConstantMode::NumericTight],
            ModeSelection::Both => vec![ConstantMode::PaperForm, ConstantMode::NumericTight],
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "paper_form" => Some(ModeSelection::PaperForm),
            "numeric_tight" => Some(ModeSelection::NumericTight),
            "both" => Some(ModeSelection::Both),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileChoice {
    /// Exact tail of the configured family.
    #[default]
    Empirical,
    /// `C' (1+R)^{-α}` with the smallest dominating `C'`; power-law families only.
    PowerLawFit,
}

/// Which family `C0` (hence `v`) is computed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum C0Source {
    #[default]
    Full,
    Truncated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundConfig {
    #[serde(default)]
    pub mode: ModeSelection,
    #[serde(default)]
    pub profile: ProfileChoice,
    #[serde(default = "default_lambda")]
    pub lambda: f64,
    #[serde(default)]
    pub refined_exponent: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c2_override: Option<f64>,
    #[serde(default)]
    pub c0_source: C0Source,
    #[serde(default)]
    pub integrated_time: bool,
}

impl Default for BoundConfig {
    fn default() -> Self {
        Self {
            mode: ModeSelection::default(),
            profile: ProfileChoice::default(),
            lambda: default_lambda(),
            refined_exponent: false,
            c2_override: None,
            c0_source: C0Source::default(),
            integrated_time: false,
        }
    }
}

fn default_lambda() -> f64 {
    4.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
    Plotdata,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_out_dir")]
    pub dir: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_out_dir(),
            formats: default_formats(),
        }
    }
}

fn default_out_dir() -> String {
    "lrcone-out".into()
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitsConfig {
    #[serde(default = "default_dim_cap")]
    pub dim_cap: usize,
    #[serde(default = "default_chain_limit")]
    pub chain_limit: u64,
}

impl Default for LimitsConfig {
    fn default() -> Self {
        Self {
            dim_cap: default_dim_cap(),
            chain_limit: default_chain_limit(),
        }
    }
}

fn default_dim_cap() -> usize {
    DEFAULT_DIM_CAP
}

fn default_chain_limit() -> u64 {
    DEFAULT_CHAIN_LIMIT
}

/// Knobs of `verify_all` beyond the sweep itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_identity_cutoffs")]
    pub identity_cutoffs: Vec<f64>,
    #[serde(default = "default_identity_times")]
    pub identity_times: Vec<f64>,
    #[serde(default = "default_identity_tol")]
    pub identity_tolerance: f64,
    #[serde(default = "default_lemma_cutoffs")]
    pub lemma_cutoffs: Vec<f64>,
    #[serde(default = "default_lemma_radii")]
    pub lemma_radii: Vec<f64>,
    #[serde(default = "default_lemma_times")]
    pub lemma_times: Vec<f64>,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tolerance: f64,
    #[serde(default = "default_lemma_slack")]
    pub lemma_slack: f64,
    #[serde(default = "default_series_cutoffs")]
    pub series_cutoffs: Vec<f64>,
    #[serde(default = "default_series_max_n")]
    pub series_max_n: usize,
    #[serde(default = "default_true")]
    pub lightcone: bool,
    #[serde(default = "default_true")]
    pub determinism: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            identity_cutoffs: default_identity_cutoffs(),
            identity_times: default_identity_times(),
            identity_tolerance: default_identity_tol(),
            lemma_cutoffs: default_lemma_cutoffs(),
            lemma_radii: default_lemma_radii(),
            lemma_times: default_lemma_times(),
            quadrature_tolerance: default_quadrature_tol(),
            lemma_slack: default_lemma_slack(),
            series_cutoffs: default_series_cutoffs(),
            series_max_n: default_series_max_n(),
            lightcone: true,
            determinism: true,
        }
    }
}

fn default_identity_cutoffs() -> Vec<f64> {
    vec![1.5, 2.5]
}
fn default_identity_times() -> Vec<f64> {
    vec![0.25, 0.5, 1.0, 2.0]
}
fn default_identity_tol() -> f64 {
    1e-9
}
fn default_lemma_cutoffs() -> Vec<f64> {
    vec![1.5]
}
fn default_lemma_radii() -> Vec<f64> {
    vec![1.0, 2.0]
}
fn default_lemma_times() -> Vec<f64> {
    vec![0.5, 1.0]
}
fn default_quadrature_tol() -> f64 {
    1e-6
}
fn default_lemma_slack() -> f64 {
    1e-5
}
fn default_series_cutoffs() -> Vec<f64> {
    vec![1.5, 2.5, 3.5]
}
fn default_series_max_n() -> usize {
    3
}
fn default_true() -> bool {
    true
}

/// Parse and validate a JSON configuration.
///
/// Syntax errors become [`Error::Parse`]; schema mismatches (unknown keys,
/// wrong types) and constraint violations become [`Error::Validation`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        match inner.classify() {
            serde_json::error::Category::Data => Error::validation(path, inner.to_string()),
            _ => Error::Parse {
                line: inner.line(),
                column: inner.column(),
                message: inner.to_string(),
            },
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] < w[1])
}

fn check_grid(field: &str, v: &[f64], min: f64) -> Result<()> {
    if v.is_empty() {
        return Err(Error::validation(field, "grid must be nonempty"));
    }
    if !strictly_increasing(v) {
        return Err(Error::validation(field, "grid must be strictly increasing"));
    }
    if v.iter().any(|x| !x.is_finite() || *x < min) {
        return Err(Error::validation(field, format!("grid values must be finite and >= {min}")));
    }
    Ok(())
}

impl RunConfig {
    /// Canonical JSON form; `parse_config` of it returns an equal config.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configuration serialises")
    }

    pub fn num_sites(&self) -> usize {
        match &self.lattice {
            LatticeConfig::Chain { length } => *length,
            LatticeConfig::Grid { dimension, side } => side.saturating_pow(*dimension as u32),
            LatticeConfig::Custom { distances, .. } => distances.len(),
        }
    }

    /// Growth exponent `D` of the lattice.
    pub fn lattice_dimension(&self) -> f64 {
        match &self.lattice {
            LatticeConfig::Chain { .. } => 1.0,
            LatticeConfig::Grid { dimension, .. } => *dimension as f64,
            LatticeConfig::Custom { dimension, .. } => *dimension,
        }
    }

    /// `D` entering the coupling exponent and growth certificate.
    pub fn dimension(&self) -> f64 {
        match &self.interaction {
            InteractionConfig::PowerLawTwoBody { dimension: Some(d), .. } => *d,
            _ => self.lattice_dimension(),
        }
    }

    pub fn alpha(&self) -> Option<f64> {
        match &self.interaction {
            InteractionConfig::PowerLawTwoBody { alpha, .. } => Some(*alpha),
            InteractionConfig::Explicit { .. } => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match &self.lattice {
            LatticeConfig::Chain { length } if *length == 0 => {
                return Err(Error::validation("lattice.length", "chain needs at least one site"));
            }
            LatticeConfig::Grid { dimension, side } if *dimension == 0 || *side == 0 => {
                return Err(Error::validation("lattice", "grid dimension and side must be positive"));
            }
            LatticeConfig::Custom { distances, dimension } => {
                if distances.is_empty() {
                    return Err(Error::validation("lattice.distances", "distance table is empty"));
                }
                if !(*dimension > 0.0 && dimension.is_finite()) {
                    return Err(Error::validation("lattice.dimension", "must be positive"));
                }
            }
            _ => {}
        }
        let n = self.num_sites();
        match &self.interaction {
            InteractionConfig::PowerLawTwoBody { c1, alpha, dimension, .. } => {
                if !(*c1 > 0.0 && c1.is_finite()) {
                    return Err(Error::validation("interaction.C1", "must be positive"));
                }
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::validation("interaction.alpha", "must be positive"));
                }
                if let Some(d) = dimension {
                    if !(*d > 0.0 && d.is_finite()) {
                        return Err(Error::validation("interaction.dimension", "must be positive"));
                    }
                }
            }
            InteractionConfig::Explicit { terms } => {
                for (k, term) in terms.iter().enumerate() {
                    if term.sites.iter().any(|&s| s >= n) {
                        return Err(Error::validation(format!("interaction.terms[{k}].sites"), "site out of range"));
                    }
                }
            }
        }
        self.validate_operator("observables.A", &self.observables.a, n)?;
        self.validate_operator("observables.B", &self.observables.b, n)?;
        if let OperatorConfig::Pauli { site: None, .. } = self.observables.a {
            return Err(Error::validation("observables.A.site", "A needs a site"));
        }

        let ts = self.sweep.t_grid.values();
        check_grid("sweep.t_grid", &ts, 0.0)?;
        if let Some(sites) = &self.sweep.b_sites {
            if sites.is_empty() || sites.iter().any(|&s| s >= n) {
                return Err(Error::validation("sweep.b_sites", "sites must be nonempty and in range"));
            }
            if self.sweep.r_grid.is_some() {
                return Err(Error::validation("sweep", "give either b_sites or r_grid, not both"));
            }
        }
        if let Some(rs) = &self.sweep.r_grid {
            check_grid("sweep.r_grid", rs, 0.0)?;
        }
        if self.sweep.r_policies.is_empty() {
            return Err(Error::validation("sweep.r_policies", "at least one R policy is needed"));
        }
        for policy in &self.sweep.r_policies {
            match policy {
                RPolicy::Fixed { value } if !(*value >= 1.0 && value.is_finite()) => {
                    return Err(Error::validation(
                        "sweep.r_policies.value",
                        format!("fixed R = {value} violates R >= 1"),
                    ));
                }
                RPolicy::KappaRule => {
                    let alpha = self.alpha().ok_or_else(|| {
                        Error::validation("sweep.r_policies", "kappa_rule needs a power-law interaction")
                    })?;
                    let d = self.dimension();
                    if exponents(d, alpha).is_err() {
                        return Err(Error::validation(
                            "sweep.r_policies",
                            format!("kappa_rule needs alpha > D, got alpha = {alpha}, D = {d}"),
                        ));
                    }
                }
                _ => {}
            }
        }

        let b = &self.bound;
        if !(b.lambda > 1.0 && b.lambda.is_finite()) {
            return Err(Error::validation("bound.lambda", "must exceed 1"));
        }
        if let Some(c2) = b.c2_override {
            if !(c2 >= 0.0 && c2.is_finite()) {
                return Err(Error::validation("bound.c2_override", "must be finite and nonnegative"));
            }
        }
        if b.refined_exponent && self.dimension() < 1.0 {
            return Err(Error::validation("bound.refined_exponent", "needs D >= 1"));
        }
        if b.profile == ProfileChoice::PowerLawFit && self.alpha().is_none() {
            return Err(Error::validation("bound.profile", "power_law_fit needs a power-law interaction"));
        }
        if self.output.formats.is_empty() {
            return Err(Error::validation("output.formats", "at least one format is needed"));
        }
        if self.limits.dim_cap == 0 {
            return Err(Error::validation("limits.dim_cap", "must be positive"));
        }

        let v = &self.verify;
        check_grid("verify.identity_cutoffs", &v.identity_cutoffs, 0.0)?;
        check_grid("verify.identity_times", &v.identity_times, 0.0)?;
        check_grid("verify.lemma_cutoffs", &v.lemma_cutoffs, 1.0)?;
        check_grid("verify.lemma_radii", &v.lemma_radii, 0.0)?;
        if v.lemma_radii[0] <= 0.0 {
            return Err(Error::validation("verify.lemma_radii", "radii must be positive"));
        }
        check_grid("verify.lemma_times", &v.lemma_times, 0.0)?;
        check_grid("verify.series_cutoffs", &v.series_cutoffs, 0.0)?;
        for (field, tol) in [
            ("verify.identity_tolerance", v.identity_tolerance),
            ("verify.quadrature_tolerance", v.quadrature_tolerance),
        ] {
            if !(tol > 0.0) {
                return Err(Error::validation(field, "must be positive"));
            }
        }
        if !(v.lemma_slack >= 0.0) {
            return Err(Error::validation("verify.lemma_slack", "must be nonnegative"));
        }
        if v.series_max_n == 0 {
            return Err(Error::validation("verify.series_max_n", "must be at least 1"));
        }
        Ok(())
    }

    fn validate_operator(&self, field: &str, op: &OperatorConfig, n: usize) -> Result<()> {
        match op {
            OperatorConfig::Pauli { site: Some(s), .. } if *s >= n => {
                Err(Error::validation(format!("{field}.site"), format!("site {s} out of range for {n} sites")))
            }
            OperatorConfig::Matrix { sites, matrix } => {
                if sites.is_empty() || sites.iter().any(|&s| s >= n) {
                    return Err(Error::validation(format!("{field}.sites"), "sites must be nonempty and in range"));
                }
                if !strictly_increasing(&sites.iter().map(|&s| s as f64).collect::<Vec<_>>()) {
                    return Err(Error::validation(format!("{field}.sites"), "sites must be strictly increasing"));
                }
                let dim = 1usize << sites.len().min(30);
                if matrix.len() != dim || matrix.iter().any(|r| r.len() != dim) {
                    return Err(Error::validation(
                        format!("{field}.matrix"),
                        format!("expected a {dim}x{dim} matrix"),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}
