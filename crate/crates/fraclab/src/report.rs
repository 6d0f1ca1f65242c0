//! Run configuration and machine-readable reports.
//!
//! A run is described by a single JSON document; results are emitted as a
//! JSON report with a fixed key order (deterministic given config and
//! seed, except for the single timing field) plus flat CSV tables: one row
//! per check per mesh level, and a per-theorem table with the empirical
//! constants.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{DomainKind, DomainSpec, FaceSelection};
use crate::error::{Error, Result};
use crate::fractional::ConstantsReport;

/// Names of all runnable checks; `verify` runs this whole suite.
pub const ALL_CHECKS: &[&str] = &[
    "constants",
    "eigs",
    "s1_consistency",
    "max_principle",
    "duality",
    "hopf",
    "ratio",
    "stampacchia",
    "hardy",
    "cd",
    "trace",
    "weighted_sobolev",
    "sobolev",
    "extension_oracle",
    "isometry",
    "flux",
    "torsion",
    "superharmonic",
];

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DomainConfig {
    pub kind: DomainKind,
    pub extents: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl DomainConfig {
    pub fn to_spec(&self) -> DomainSpec {
        DomainSpec {
            kind: self.kind,
            extents: self.extents.clone(),
            resolution: self.resolution.clone(),
        }
    }

    pub fn with_resolution(&self, res: &[usize]) -> DomainSpec {
        DomainSpec {
            kind: self.kind,
            extents: self.extents.clone(),
            resolution: res.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BumpConfig {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhsConfig {
    /// Smooth bump sources for the maximum-principle families.
    #[serde(default)]
    pub bumps: Vec<BumpConfig>,
    /// Constant datum for the auxiliary problem.
    #[serde(default = "default_constant")]
    pub constant: f64,
}

fn default_constant() -> f64 {
    1.0
}

impl Default for RhsConfig {
    fn default() -> Self {
        RhsConfig {
            bumps: Vec::new(),
            constant: 1.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LadderConfig {
    /// Base resolutions per level, coarse to fine.
    pub resolutions: Vec<Vec<usize>>,
    /// Cylinder levels per ladder step (same length as `resolutions`).
    pub cylinder_levels: Vec<usize>,
    /// Truncation height; default six decay lengths of the first mode.
    #[serde(default)]
    pub y_max: Option<f64>,
    /// Grading exponent; default `3/(2s)`.
    #[serde(default)]
    pub beta: Option<f64>,
}

impl Default for LadderConfig {
    fn default() -> Self {
        LadderConfig {
            resolutions: vec![vec![17, 17], vec![25, 25], vec![33, 33]],
            cylinder_levels: vec![12, 24, 48],
            y_max: None,
            beta: None,
        }
    }
}

/// Tolerances used by the hard checks, all defaulted to the values the
/// verification contract states.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub eigen_residual: f64,
    pub gram_deviation: f64,
    pub s1_consistency: f64,
    pub max_principle: f64,
    pub duality: f64,
    pub homogeneity: f64,
    pub hardy_slack: f64,
    pub cd_bound_slack: f64,
    pub cd_monotone_slack: f64,
    pub trace_tightness: f64,
    pub extension_trace_rel: f64,
    pub isometry_rel: f64,
    pub stampacchia_convexity: f64,
    pub torsion_linearity: f64,
    pub family_spread: f64,
    pub ladder_stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen_residual: 1e-8,
            gram_deviation: 1e-10,
            s1_consistency: 1e-10,
            max_principle: 1e-8,
            duality: 1e-10,
            homogeneity: 1e-12,
            hardy_slack: 1e-6,
            cd_bound_slack: 1e-6,
            cd_monotone_slack: 1e-8,
            trace_tightness: 1e-6,
            extension_trace_rel: 0.02,
            isometry_rel: 0.05,
            stampacchia_convexity: 1e-10,
            torsion_linearity: 1e-10,
            family_spread: 2.0,
            ladder_stability: 0.2,
        }
    }
}

/// The run specification: domain, boundary partition, exponents, requested
/// checks, sources, mesh ladder, tolerances, seed and worker count.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainConfig,
    /// Dirichlet faces, e.g. `["left", "bottom:0.5"]`.
    pub dirichlet: Vec<String>,
    pub s_values: Vec<f64>,
    #[serde(default = "default_p")]
    pub p: f64,
    /// Interior weight exponent for the weighted Sobolev regimes;
    /// default is the midpoint of `(0, 2*_s)`.
    #[serde(default)]
    pub r_interior: Option<f64>,
    /// Check names; empty means the full suite.
    #[serde(default)]
    pub checks: Vec<String>,
    #[serde(default)]
    pub rhs: RhsConfig,
    #[serde(default)]
    pub ladder: LadderConfig,
    /// Spectral truncation; `None` keeps the full basis.
    #[serde(default)]
    pub modes: Option<usize>,
    /// Dirichlet selections of the alpha ladder for the trace-constant
    /// monotonicity trend, smallest to largest.
    #[serde(default = "default_alpha_ladder")]
    pub alpha_ladder: Vec<Vec<String>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Worker threads; 0 lets the pool decide.
    #[serde(default)]
    pub jobs: usize,
}

fn default_p() -> f64 {
    4.0
}

fn default_seed() -> u64 {
    42
}

// Nested Dirichlet sets, strictly mixed (the trace constant is a mixed
// notion: the Dirichlet measure stays inside (0, |boundary|)), every step
// keeping a Neumann-Neumann corner so the concentration bound has slack.
// The first step is a single boundary edge: only there does lambda_1(alpha)
// fall low enough for the vanishing trend to show at desk resolution.
fn default_alpha_ladder() -> Vec<Vec<String>> {
    vec![
        vec!["left:0.01".into()],
        vec!["left:0.25".into()],
        vec!["left".into()],
        vec!["left".into(), "bottom:0.5".into()],
    ]
}

impl RunConfig {
    /// A small default 2D configuration exercising every check.
    pub fn default_2d() -> Self {
        RunConfig {
            domain: DomainConfig {
                kind: DomainKind::Rectangle,
                extents: vec![1.0, 1.0],
                resolution: vec![33, 33],
            },
            dirichlet: vec!["left".into(), "bottom".into()],
            s_values: vec![0.6, 0.75, 0.9],
            p: 4.0,
            r_interior: None,
            checks: Vec::new(),
            rhs: RhsConfig {
                bumps: vec![BumpConfig {
                    center: vec![0.55, 0.55],
                    radius: 0.2,
                }],
                constant: 1.0,
            },
            ladder: LadderConfig::default(),
            modes: None,
            alpha_ladder: default_alpha_ladder(),
            tolerances: Tolerances::default(),
            seed: 42,
            jobs: 0,
        }
    }

    /// A fast 1D configuration; the 2D-only checks are skipped.
    pub fn default_1d(n: usize) -> Self {
        RunConfig {
            domain: DomainConfig {
                kind: DomainKind::Interval,
                extents: vec![1.0],
                resolution: vec![n],
            },
            dirichlet: vec!["left".into()],
            s_values: vec![0.6, 0.75, 0.9],
            p: 4.0,
            r_interior: None,
            checks: Vec::new(),
            rhs: RhsConfig {
                bumps: vec![BumpConfig {
                    center: vec![0.5],
                    radius: 0.2,
                }],
                constant: 1.0,
            },
            ladder: LadderConfig {
                resolutions: vec![vec![n / 4 * 2 + 1], vec![n / 2 + 1], vec![n]],
                cylinder_levels: vec![12, 24, 48],
                y_max: None,
                beta: None,
            },
            modes: None,
            alpha_ladder: default_alpha_ladder(),
            tolerances: Tolerances::default(),
            seed: 42,
            jobs: 0,
        }
    }

    pub fn parse(text: &str) -> Result<RunConfig> {
        let config: RunConfig = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("cannot parse run config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Validates ranges and cross-field consistency.
    pub fn validate(&self) -> Result<()> {
        self.domain.to_spec().validate()?;
        if self.dirichlet.is_empty() {
            return Err(Error::Config("dirichlet face list must not be empty".into()));
        }
        for face in &self.dirichlet {
            FaceSelection::parse(face)?;
        }
        for ladder_step in &self.alpha_ladder {
            for face in ladder_step {
                FaceSelection::parse(face)?;
            }
        }
        if self.s_values.is_empty() {
            return Err(Error::Config("need at least one s value".into()));
        }
        let dim = self.domain.to_spec().dim();
        for &s in &self.s_values {
            if !(s > 0.5 && s < 1.0) {
                return Err(Error::Config(format!(
                    "s must lie in (1/2, 1), got {s}"
                )));
            }
            if self.p <= dim as f64 / s {
                return Err(Error::Config(format!(
                    "p = {} <= N/s = {:.6} at s = {s}: gamma = 2 - 1/p - 2/q must \
                     exceed 1, so p > N/s is required",
                    self.p,
                    dim as f64 / s
                )));
            }
        }
        for name in &self.checks {
            if !ALL_CHECKS.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown check '{name}'; known checks: {}",
                    ALL_CHECKS.join(", ")
                )));
            }
        }
        if self.ladder.resolutions.len() != self.ladder.cylinder_levels.len() {
            return Err(Error::Config(
                "ladder resolutions and cylinder_levels must have the same length".into(),
            ));
        }
        if self.ladder.resolutions.is_empty() {
            return Err(Error::Config("mesh ladder must not be empty".into()));
        }
        Ok(())
    }

    /// The checks to run: the explicit list, or the full suite.
    pub fn effective_checks(&self) -> Vec<String> {
        if self.checks.is_empty() {
            ALL_CHECKS.iter().map(|s| s.to_string()).collect()
        } else {
            self.checks.clone()
        }
    }

    pub fn parse_dirichlet(&self) -> Result<Vec<FaceSelection>> {
        self.dirichlet.iter().map(|f| FaceSelection::parse(f)).collect()
    }
}

/// One verified statement (or sub-case) inside a run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    /// Name of the owning check, e.g. `hardy`.
    pub check: String,
    /// Sub-case label, e.g. `bump[3]` or `s=0.75/level=1`.
    pub case: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mesh_level: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rhs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical_constant: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theoretical_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// `None` for informational records.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub passed: Option<bool>,
    #[serde(default)]
    pub skipped: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Extra named scalars (empirical constants of the theorem checks).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub details: BTreeMap<String, f64>,
}

impl CheckRecord {
    pub fn new(check: &str, case: &str) -> Self {
        CheckRecord {
            check: check.to_string(),
            case: case.to_string(),
            s: None,
            alpha: None,
            mesh_level: None,
            lhs: None,
            rhs: None,
            empirical_constant: None,
            theoretical_bound: None,
            tol: None,
            passed: None,
            skipped: false,
            error: None,
            details: BTreeMap::new(),
        }
    }

    pub fn from_inequality(check: &str, case: &str, iq: &crate::inequalities::InequalityCheck) -> Self {
        let mut rec = CheckRecord::new(check, case);
        rec.lhs = Some(iq.lhs);
        rec.rhs = Some(iq.rhs);
        rec.empirical_constant = Some(iq.empirical_constant);
        rec.theoretical_bound = iq.theoretical_bound;
        rec.tol = Some(iq.tol);
        rec.skipped = iq.skipped;
        rec.passed = if iq.informational || iq.skipped {
            None
        } else {
            Some(iq.pass)
        };
        if iq.informational && !iq.pass {
            // Violation flags on informational checks still fail the run.
            rec.passed = Some(false);
        }
        rec
    }

    pub fn failed(check: &str, case: &str, err: &Error) -> Self {
        let mut rec = CheckRecord::new(check, case);
        rec.passed = Some(false);
        rec.error = Some(err.to_string());
        rec
    }

    pub fn hard_failure(&self) -> bool {
        self.passed == Some(false)
    }
}

/// Pass/fail totals over the records.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
    pub informational: usize,
}

/// The full report: config echo, constants, per-check records, summary,
/// and the only nondeterministic field, the timing.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub constants: Vec<ConstantsReport>,
    pub checks: Vec<CheckRecord>,
    pub summary: Summary,
    pub timing_seconds: f64,
}

impl RunReport {
    pub fn summarize(records: &[CheckRecord]) -> Summary {
        let mut s = Summary {
            total: records.len(),
            ..Summary::default()
        };
        for r in records {
            if r.skipped {
                s.skipped += 1;
            } else {
                match r.passed {
                    Some(true) => s.passed += 1,
                    Some(false) => s.failed += 1,
                    None => s.informational += 1,
                }
            }
        }
        s
    }

    pub fn any_failure(&self) -> bool {
        self.summary.failed > 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes `report.json`, `checks.csv` and `theorems.csv` under `dir`.
    pub fn emit(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json()?)?;

        let mut checks = std::io::BufWriter::new(std::fs::File::create(dir.join("checks.csv"))?);
        writeln!(
            checks,
            "check,case,s,alpha,mesh_level,lhs,rhs,empirical_constant,theoretical_bound,tol,passed,skipped,error"
        )?;
        for r in &self.checks {
            writeln!(
                checks,
                "{},{},{},{},{},{},{},{},{},{},{},{},{}",
                r.check,
                r.case,
                opt(r.s),
                opt(r.alpha),
                r.mesh_level.map(|v| v.to_string()).unwrap_or_default(),
                opt(r.lhs),
                opt(r.rhs),
                opt(r.empirical_constant),
                opt(r.theoretical_bound),
                opt(r.tol),
                r.passed.map(|p| p.to_string()).unwrap_or_default(),
                r.skipped,
                r.error.as_deref().unwrap_or("").replace(',', ";"),
            )?;
        }

        // Per-theorem table: empirical constants of the Hopf/ratio checks.
        let mut theorems =
            std::io::BufWriter::new(std::fs::File::create(dir.join("theorems.csv"))?);
        writeln!(theorems, "case,s,alpha,mesh_level,C_emp,K_emp,lambda_emp,sup_w,I")?;
        for r in &self.checks {
            if r.check != "hopf" && r.check != "ratio" {
                continue;
            }
            let get = |k: &str| {
                r.details
                    .get(k)
                    .map(|v| v.to_string())
                    .unwrap_or_default()
            };
            writeln!(
                theorems,
                "{},{},{},{},{},{},{},{},{}",
                r.case,
                opt(r.s),
                opt(r.alpha),
                r.mesh_level.map(|v| v.to_string()).unwrap_or_default(),
                get("c_emp"),
                get("k_emp"),
                get("lambda_emp"),
                get("sup_w"),
                get("source_mass"),
            )?;
        }
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_configs_validate() {
        RunConfig::default_2d().validate().unwrap();
        RunConfig::default_1d(129).validate().unwrap();
    }

    #[test]
    fn config_round_trips_through_json() {
        let config = RunConfig::default_2d();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = RunConfig::parse(&text).unwrap();
        assert_eq!(back.s_values, config.s_values);
        assert_eq!(back.dirichlet, config.dirichlet);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut config = RunConfig::default_2d();
        config.checks = vec!["no_such_check".into()];
        assert!(config.validate().is_err());

        let mut config = RunConfig::default_2d();
        config.p = 2.0; // below N/s for every s in the list
        let err = config.validate().unwrap_err().to_string();
        assert!(err.contains("gamma"), "{err}");

        let mut config = RunConfig::default_2d();
        config.s_values = vec![0.4];
        assert!(config.validate().is_err());

        let mut config = RunConfig::default_2d();
        config.dirichlet = vec!["diagonal".into()];
        assert!(config.validate().is_err());
    }

    #[test]
    fn parse_reports_json_diagnostics() {
        let err = RunConfig::parse("{ not json").unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn summary_counts() {
        let mut ok = CheckRecord::new("a", "1");
        ok.passed = Some(true);
        let mut bad = CheckRecord::new("a", "2");
        bad.passed = Some(false);
        let mut skip = CheckRecord::new("a", "3");
        skip.skipped = true;
        let info = CheckRecord::new("a", "4");
        let s = RunReport::summarize(&[ok, bad, skip, info]);
        assert_eq!(s.total, 4);
        assert_eq!(s.passed, 1);
        assert_eq!(s.failed, 1);
        assert_eq!(s.skipped, 1);
        assert_eq!(s.informational, 1);
    }
}
