//! Scenarios: build a modulus and a map, compute the growth sequence once,
//! run the listed checks and collect verdicts into a report.

mod checks;
pub mod config;
pub mod report;

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

pub use checks::{
    check_group_closure, check_sharpness, check_sharpness_in, SharpnessKind, CLOSURE_DECADES, CLOSURE_GRID,
};
pub use config::RawConfig;
pub use report::{csv_float, Provenance, ScenarioReport};

use crate::diffeo::{Block, Diffeo, PastedSpec, Sign};
use crate::dynamics::GridSpec;
use crate::error::{Error, Result};
use crate::modulus::{Modulus, ModulusKind, Table};

/// Verdict margins, in one place.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Allowed shortfall of a fitted exponent below its target.
    pub exponent_margin: f64,
    /// Allowed drift of a fitted constant between the two dyadic windows.
    pub stability_factor: f64,
    /// Relative error allowed against closed-form oracles.
    pub oracle_rel: f64,
    /// Largest accepted final `Γₙ^{1/n}` for tangential maps.
    pub gamma_final: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            exponent_margin: 0.05,
            stability_factor: 1.5,
            oracle_rel: 0.01,
            gamma_final: 1.05,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckId {
    Thm2,
    Thm3,
    Thm4,
    Thm5,
    Cor5,
    Thm6Sharp,
    Thm7Sharp,
    Claim1,
    Claim2,
    Claim9,
    Lemma3,
    Submultiplicative,
    GroupClosure,
    GammaCharacterization,
    MoebiusOracle,
    OrbitIdentity,
}

impl CheckId {
    pub const ALL: [CheckId; 16] = [
        CheckId::Thm2,
        CheckId::Thm3,
        CheckId::Thm4,
        CheckId::Thm5,
        CheckId::Cor5,
        CheckId::Thm6Sharp,
        CheckId::Thm7Sharp,
        CheckId::Claim1,
        CheckId::Claim2,
        CheckId::Claim9,
        CheckId::Lemma3,
        CheckId::Submultiplicative,
        CheckId::GroupClosure,
        CheckId::GammaCharacterization,
        CheckId::MoebiusOracle,
        CheckId::OrbitIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::Thm2 => "thm2",
            CheckId::Thm3 => "thm3",
            CheckId::Thm4 => "thm4",
            CheckId::Thm5 => "thm5",
            CheckId::Cor5 => "cor5",
            CheckId::Thm6Sharp => "thm6_sharp",
            CheckId::Thm7Sharp => "thm7_sharp",
            CheckId::Claim1 => "claim1",
            CheckId::Claim2 => "claim2",
            CheckId::Claim9 => "claim9",
            CheckId::Lemma3 => "lemma3",
            CheckId::Submultiplicative => "submultiplicative",
            CheckId::GroupClosure => "group_closure",
            CheckId::GammaCharacterization => "gamma_characterization",
            CheckId::MoebiusOracle => "moebius_oracle",
            CheckId::OrbitIdentity => "orbit_identity",
        }
    }

    /// Whether the check reads the scenario's growth records.
    pub fn needs_growth(self) -> bool {
        matches!(
            self,
            CheckId::Thm2
                | CheckId::Thm3
                | CheckId::Thm4
                | CheckId::Thm5
                | CheckId::Cor5
                | CheckId::Thm6Sharp
                | CheckId::Thm7Sharp
                | CheckId::Submultiplicative
                | CheckId::GammaCharacterization
                | CheckId::MoebiusOracle
        )
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown check '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusConfig {
    pub kind: String,
    pub alpha: Option<f64>,
    pub scale: f64,
    pub domain_end: Option<f64>,
    /// Two-column CSV for the tabulated kind.
    pub path: Option<PathBuf>,
}

impl ModulusConfig {
    pub fn build(&self) -> Result<Modulus> {
        let kind = match self.kind.as_str() {
            "holder" => ModulusKind::Holder {
                alpha: self
                    .alpha
                    .ok_or_else(|| Error::Config("holder modulus needs modulus.alpha".into()))?,
            },
            "lipschitz" => ModulusKind::Lipschitz,
            "xlog" => ModulusKind::XLog,
            "sqrtlog" => ModulusKind::SqrtLog,
            "invlog" => ModulusKind::InvLog,
            "tabulated" => {
                let path = self
                    .path
                    .as_ref()
                    .ok_or_else(|| Error::Config("tabulated modulus needs modulus.path".into()))?;
                let table = Table::from_csv(path)?;
                let end = self.domain_end.unwrap_or(table.end());
                return Modulus::new(ModulusKind::Tabulated(table.into()), end, self.scale);
            }
            other => return Err(Error::Config(format!("unknown modulus kind '{other}'"))),
        };
        Modulus::new(kind, self.domain_end.unwrap_or(1.0), self.scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffeoKind {
    FromModulus,
    Sharpness,
    Pasted,
    Identity,
    MoebiusTest,
}

impl DiffeoKind {
    pub fn name(self) -> &'static str {
        match self {
            DiffeoKind::FromModulus => "from_modulus",
            DiffeoKind::Sharpness => "sharpness",
            DiffeoKind::Pasted => "pasted",
            DiffeoKind::Identity => "identity",
            DiffeoKind::MoebiusTest => "moebius_test",
        }
    }
}

impl FromStr for DiffeoKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [
            DiffeoKind::FromModulus,
            DiffeoKind::Sharpness,
            DiffeoKind::Pasted,
            DiffeoKind::Identity,
            DiffeoKind::MoebiusTest,
        ]
        .into_iter()
        .find(|k| k.name() == s)
        .ok_or_else(|| Error::Config(format!("unknown diffeo kind '{s}'")))
    }
}

impl fmt::Display for DiffeoKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffeoConfig {
    pub kind: DiffeoKind,
    pub epsilon: Option<f64>,
    pub sign: Sign,
    pub k_min: u64,
    /// `(a, b, epsilon)` per pasted block.
    pub blocks: Vec<(f64, f64, f64)>,
}

impl DiffeoConfig {
    pub fn build(&self, m: &Modulus) -> Result<Diffeo> {
        let eps = || {
            self.epsilon
                .ok_or_else(|| Error::Config(format!("{} needs diffeo.epsilon", self.kind)))
        };
        match self.kind {
            DiffeoKind::Identity => Ok(Diffeo::identity()),
            DiffeoKind::MoebiusTest => Ok(Diffeo::moebius_test()),
            DiffeoKind::FromModulus => Diffeo::from_modulus(m, eps()?, self.sign),
            DiffeoKind::Sharpness => Diffeo::sharpness_family(m, eps()?, self.k_min),
            DiffeoKind::Pasted => {
                let blocks = self
                    .blocks
                    .iter()
                    .map(|&(a, b, e)| {
                        Ok(Block {
                            a,
                            b,
                            base: Diffeo::sharpness_family(m, e, self.k_min)?,
                        })
                    })
                    .collect::<Result<_>>()?;
                Diffeo::paste(PastedSpec { blocks })
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthConfig {
    pub n_max: usize,
    pub grid: GridSpec,
    /// Seed for randomized checks (pair sampling).
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Text,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(OutputFormat::Text),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::Config(format!("unknown output format '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: OutputFormat,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub modulus: ModulusConfig,
    pub diffeo: DiffeoConfig,
    pub growth: GrowthConfig,
    pub checks: Vec<CheckId>,
    /// `ε` in the Theorem 6 lower bound `(1−ε)·log(n/ω⁻¹(c/n))`.
    pub thm6_epsilon: f64,
    /// Second map for `group_closure`: `self`, `identity`,
    /// `from_modulus:<eps>[:<sign>]` or `sharpness:<eps>[:<k_min>]`.
    pub closure_partner: String,
    pub tolerances: Tolerances,
    pub output: OutputConfig,
    /// sha256 of the sorted `key = value` lines.
    pub config_hash: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One check's outcome. `value` is the measured quantity, `target` the
/// reference it is compared with and `tolerance` the slack in the check's
/// own terms; unused fields are NaN.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub check: CheckId,
    pub verdict: Verdict,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub window: Option<(usize, usize)>,
    pub fitted: Option<f64>,
    pub detail: String,
}

impl CheckResult {
    pub(crate) fn new(check: CheckId, pass: bool) -> Self {
        Self {
            check,
            verdict: if pass { Verdict::Pass } else { Verdict::Fail },
            value: f64::NAN,
            target: f64::NAN,
            tolerance: f64::NAN,
            window: None,
            fitted: None,
            detail: String::new(),
        }
    }

    pub(crate) fn skipped(check: CheckId, why: impl Into<String>) -> Self {
        Self {
            verdict: Verdict::Skipped,
            detail: why.into(),
            ..Self::new(check, false)
        }
    }

    pub(crate) fn measured(mut self, value: f64, target: f64, tolerance: f64) -> Self {
        self.value = value;
        self.target = target;
        self.tolerance = tolerance;
        self
    }

    pub(crate) fn window(mut self, w: (usize, usize)) -> Self {
        self.window = Some(w);
        self
    }

    pub(crate) fn fitted(mut self, c: f64) -> Self {
        self.fitted = Some(c);
        self
    }

    pub(crate) fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = d.into();
        self
    }
}

/// Builds the map, computes the growth sequence if any check needs it and
/// runs every listed check. Check failures are recorded; only modulus,
/// construction and growth errors abort the scenario.
pub fn run(s: &Scenario) -> Result<ScenarioReport> {
    let m = s.modulus.build()?;
    let f = s.diffeo.build(&m)?;
    let records = if s.checks.iter().any(|c| c.needs_growth()) {
        Some(crate::dynamics::growth_sequence(&f, s.growth.n_max, s.growth.grid)?)
    } else {
        None
    };
    let ctx = checks::Context::new(s, &m, &f, records.as_deref());
    let results = s.checks.iter().map(|&c| ctx.run(c)).collect();
    Ok(ScenarioReport {
        name: s.name.clone(),
        provenance: Provenance {
            config_hash: s.config_hash.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            modulus: m.to_string(),
            diffeo: f.description().to_string(),
            n_max: s.growth.n_max,
            grid: s.growth.grid,
            seed: s.growth.seed,
        },
        checks: results,
    })
}
