use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::covering::MAP_MAX_LENGTH;
use crate::error::{Error, Result};
use crate::gapset::GapSet;
use crate::jacobi::{HeadOverride, JacobiOperator, Tail};
use crate::szego::NODES_PER_ARC;

/// What an experiment computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Equilibrium,
    CoveringFit,
    SzegoReport,
    SumRule,
    Asymptotics,
    CharacterMatch,
    BeardonDecay,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Equilibrium,
        ExperimentKind::CoveringFit,
        ExperimentKind::SzegoReport,
        ExperimentKind::SumRule,
        ExperimentKind::Asymptotics,
        ExperimentKind::CharacterMatch,
        ExperimentKind::BeardonDecay,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Equilibrium => "equilibrium",
            ExperimentKind::CoveringFit => "covering_fit",
            ExperimentKind::SzegoReport => "szego_report",
            ExperimentKind::SumRule => "sum_rule",
            ExperimentKind::Asymptotics => "asymptotics",
            ExperimentKind::CharacterMatch => "character_match",
            ExperimentKind::BeardonDecay => "beardon_decay",
        }
    }

    /// Does the experiment need an operator?
    pub fn needs_operator(self) -> bool {
        matches!(
            self,
            ExperimentKind::SzegoReport
                | ExperimentKind::SumRule
                | ExperimentKind::Asymptotics
                | ExperimentKind::CharacterMatch
        )
    }
}

/// Background plus head overrides.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    pub tail: Tail,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub head: Vec<HeadOverride>,
}

impl OperatorSpec {
    pub fn build(&self) -> Result<JacobiOperator> {
        JacobiOperator::from_tail(self.tail.clone())?.with_head(&self.head)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Knobs {
    /// Gauss–Legendre order of the equilibrium computation.
    pub quad_order: usize,
    /// Word length of the Blaschke products; `None` picks it from the
    /// orbit budget.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_length: Option<usize>,
    /// Number of coefficients (or steps) in sequence outputs.
    pub horizon: usize,
    pub nodes_per_arc: usize,
    /// Samples per torus cycle.
    pub walk_steps: usize,
    /// Random probes for pointwise identities.
    pub probes: usize,
    /// Point `[re, im]` at which polynomial ratios are taken.
    pub probe_x: [f64; 2],
    /// Disk point `[re, im]` for the Jost solution.
    pub probe_z: [f64; 2],
    /// Largest level in the decay fit of `|ℛ_m|`.
    pub max_level: usize,
    /// Grid size of the density and Green function tables.
    pub samples: usize,
}

impl Default for Knobs {
    fn default() -> Self {
        Knobs {
            quad_order: 64,
            word_length: None,
            horizon: 100,
            nodes_per_arc: NODES_PER_ARC,
            walk_steps: 16,
            probes: 20,
            probe_x: [3.0, 0.5],
            probe_z: [0.4, 0.0],
            max_level: 8,
            samples: 201,
        }
    }
}

/// Pass/fail thresholds, all absolute unless noted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub capacity: f64,
    pub mass: f64,
    pub green_identity: f64,
    pub pushforward: f64,
    pub ratio: f64,
    pub recurrence: f64,
    pub stripping: f64,
    /// Relative error of the decay rate.
    pub decay_slope: f64,
    pub cauchy_tail: f64,
    pub character_identity: f64,
    pub character_match: f64,
    pub min_r_squared: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            capacity: 1e-10,
            mass: 1e-10,
            green_identity: 1e-4,
            pushforward: 1e-4,
            ratio: 1e-6,
            recurrence: 1e-8,
            stripping: 1e-6,
            decay_slope: 1e-2,
            cauchy_tail: 1e-6,
            character_identity: 1e-6,
            character_match: 1e-4,
            min_r_squared: 0.99,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSpec {
    /// Directory for report files; the command line and the environment
    /// can supply it instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File stem; defaults to the experiment name.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

/// One experiment, as read from a TOML file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub endpoints: Vec<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<OperatorSpec>,
    #[serde(default)]
    pub knobs: Knobs,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is always representable")
    }

    /// SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn gapset(&self) -> Result<GapSet> {
        GapSet::new(&self.endpoints)
    }

    pub fn operator(&self) -> Result<JacobiOperator> {
        match &self.operator {
            Some(spec) => spec.build(),
            None => Err(Error::Config(format!(
                "{} needs an [operator] section",
                self.kind.name()
            ))),
        }
    }

    pub fn stem(&self) -> String {
        self.output
            .stem
            .clone()
            .unwrap_or_else(|| self.kind.name().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        self.gapset()?;
        let k = &self.knobs;
        check_range("quad_order", k.quad_order, 8, 1024)?;
        if let Some(l) = k.word_length {
            check_range("word_length", l, 1, MAP_MAX_LENGTH)?;
        }
        check_range("horizon", k.horizon, 2, 100_000)?;
        check_range("nodes_per_arc", k.nodes_per_arc, 8, 1024)?;
        check_range("walk_steps", k.walk_steps, 2, 1024)?;
        check_range("probes", k.probes, 1, 10_000)?;
        check_range("max_level", k.max_level, 2, 20)?;
        check_range("samples", k.samples, 2, 1_000_000)?;
        let z = k.probe_z[0].hypot(k.probe_z[1]);
        if !(z < 1.0) {
            return Err(Error::Config(
                "probe_z must lie inside the unit disk".into(),
            ));
        }
        if !k.probe_x.iter().all(|v| v.is_finite()) {
            return Err(Error::Config("probe_x must be finite".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("capacity", t.capacity),
            ("mass", t.mass),
            ("green_identity", t.green_identity),
            ("pushforward", t.pushforward),
            ("ratio", t.ratio),
            ("recurrence", t.recurrence),
            ("stripping", t.stripping),
            ("decay_slope", t.decay_slope),
            ("cauchy_tail", t.cauchy_tail),
            ("character_identity", t.character_identity),
            ("character_match", t.character_match),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance {name} must be positive")));
            }
        }
        if !(t.min_r_squared > 0.0 && t.min_r_squared <= 1.0) {
            return Err(Error::Config("min_r_squared must lie in (0, 1]".into()));
        }
        if self.kind.needs_operator() {
            self.operator()?;
        }
        if self.kind == ExperimentKind::CharacterMatch
            && !matches!(
                self.operator.as_ref().map(|o| &o.tail),
                Some(Tail::Periodic { .. })
            )
        {
            return Err(Error::Config(
                "character_match needs a periodic tail on the set".into(),
            ));
        }
        Ok(())
    }

    /// A ready-to-run configuration for each kind.
    pub fn example(kind: ExperimentKind) -> ExperimentConfig {
        let two_band = vec![-2.0, -1.0, 1.0, 2.0];
        let period_two = Tail::Periodic {
            a: vec![1.5, 0.5],
            b: vec![0.0, 0.0],
        };
        let (endpoints, operator) = match kind {
            ExperimentKind::Equilibrium => (vec![-2.0, 2.0], None),
            ExperimentKind::CoveringFit | ExperimentKind::BeardonDecay => (two_band, None),
            ExperimentKind::SzegoReport | ExperimentKind::SumRule => (
                vec![-2.0, 2.0],
                Some(OperatorSpec {
                    tail: Tail::Free,
                    head: vec![HeadOverride {
                        n: 1,
                        a: 2.0,
                        b: 0.0,
                    }],
                }),
            ),
            ExperimentKind::Asymptotics => (
                two_band,
                Some(OperatorSpec {
                    tail: period_two,
                    head: vec![HeadOverride {
                        n: 1,
                        a: 1.0,
                        b: 0.0,
                    }],
                }),
            ),
            ExperimentKind::CharacterMatch => (
                two_band,
                Some(OperatorSpec {
                    tail: period_two,
                    head: vec![HeadOverride {
                        n: 1,
                        a: 1.0,
                        b: 0.3,
                    }],
                }),
            ),
        };
        ExperimentConfig {
            kind,
            endpoints,
            seed: 0,
            operator,
            knobs: Knobs::default(),
            tolerances: Tolerances::default(),
            output: OutputSpec::default(),
        }
    }
}

fn check_range(name: &str, v: usize, lo: usize, hi: usize) -> Result<()> {
    if v < lo || v > hi {
        return Err(Error::Config(format!(
            "{name} = {v} is outside [{lo}, {hi}]"
        )));
    }
    Ok(())
}
