//! Experiment and sweep configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mexlab_core::attacks::StopRule;
use mexlab_core::nonlinear::{IwalConfig, SvmParams};
use mexlab_core::oracle::{DefensePolicy, Dollars};

use crate::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Halfspace,
    LinearRegression,
    KernelSvm,
    DecisionTree,
    RandomForest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKind {
    /// Noise-free query-synthesis bisection.
    Qs,
    /// Query synthesis with majority-voted labels.
    NoisyQs,
    Average,
    LowdMeek,
    EquationSolving,
    Eat,
    /// Uniform-query SVM baseline for EAT.
    UniformSvm,
    Iwal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QsBlock {
    pub stop: StopRule,
}

impl Default for QsBlock {
    fn default() -> Self {
        QsBlock { stop: StopRule::FixedDepth }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowdMeekBlock {
    /// Line-search precision; `eps` when absent.
    pub eps_ls: Option<f64>,
}

/// How synthetic server models are built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerBlock {
    pub tree_depth: usize,
    pub n_classes: usize,
    pub forest_trees: usize,
    /// Training-set size for synthetic SVM and forest servers.
    pub teacher_size: usize,
    pub perceptron_epochs: usize,
}

impl Default for ServerBlock {
    fn default() -> Self {
        ServerBlock { tree_depth: 3, n_classes: 2, forest_trees: 5, teacher_size: 200, perceptron_epochs: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EatBlock {
    pub r_init: Option<usize>,
    pub k: usize,
    pub svm: SvmParams,
    pub test_size: usize,
}

impl Default for EatBlock {
    fn default() -> Self {
        EatBlock { r_init: None, k: 100, svm: SvmParams::default(), test_size: 2000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IwalBlock {
    pub learner: IwalConfig,
    pub pool_size: usize,
    pub test_size: usize,
}

impl Default for IwalBlock {
    fn default() -> Self {
        IwalBlock { learner: IwalConfig::default(), pool_size: 5000, test_size: 2000 }
    }
}

fn default_eps() -> f64 {
    1e-3
}

fn default_delta() -> f64 {
    0.05
}

fn default_trials() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub model_kind: ModelKind,
    pub attack_kind: AttackKind,
    #[serde(default = "no_defense")]
    pub defense: DefensePolicy,
    pub d: usize,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// Flip probability assumed by the noisy attack; defaults to the defense's.
    #[serde(default)]
    pub rho: Option<f64>,
    /// Variance bound for the averaging attack; defaults to `1/sqrt(d)`.
    #[serde(default)]
    pub sigma_hat: Option<f64>,
    /// Oracle query budget.
    #[serde(default)]
    pub budget: Option<u64>,
    #[serde(default)]
    pub price_per_query: Dollars,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub dataset_path: Option<PathBuf>,
    #[serde(default)]
    pub qs: QsBlock,
    #[serde(default)]
    pub lowd_meek: LowdMeekBlock,
    #[serde(default)]
    pub server: ServerBlock,
    #[serde(default)]
    pub eat: EatBlock,
    #[serde(default)]
    pub iwal: IwalBlock,
}

fn no_defense() -> DefensePolicy {
    DefensePolicy::NoDefense
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

impl ExperimentConfig {
    /// Minimal config for `attack` against `model` in dimension `d`.
    pub fn new(model_kind: ModelKind, attack_kind: AttackKind, d: usize) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            model_kind,
            attack_kind,
            defense: DefensePolicy::NoDefense,
            d,
            eps: default_eps(),
            delta: default_delta(),
            rho: None,
            sigma_hat: None,
            budget: None,
            price_per_query: Dollars::default(),
            trials: 1,
            seed: 0,
            dataset_path: None,
            qs: QsBlock::default(),
            lowd_meek: LowdMeekBlock::default(),
            server: ServerBlock::default(),
            eat: EatBlock::default(),
            iwal: IwalBlock::default(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| bad(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn attack_rho(&self) -> f64 {
        self.rho.unwrap_or(match self.defense {
            DefensePolicy::ConstantFlip { rho } => rho,
            _ => 0.0,
        })
    }

    pub fn attack_sigma_hat(&self) -> f64 {
        self.sigma_hat.unwrap_or(1.0 / (self.d as f64).sqrt())
    }

    /// Rejects configs that could not run, before any oracle exists.
    pub fn validate(&self) -> Result<(), HarnessError> {
        use AttackKind as A;
        use ModelKind as M;
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if self.d == 0 {
            return Err(bad("d must be >= 1"));
        }
        if self.trials == 0 {
            return Err(bad("trials must be >= 1"));
        }
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(bad("eps must be positive"));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(bad("delta must lie in (0, 1)"));
        }
        self.defense.validate().map_err(|e| bad(e.to_string()))?;
        let model_ok = match self.attack_kind {
            A::Qs | A::NoisyQs | A::Average | A::LowdMeek => self.model_kind == M::Halfspace,
            A::EquationSolving => self.model_kind == M::LinearRegression,
            A::Eat | A::UniformSvm => self.model_kind == M::KernelSvm,
            A::Iwal => matches!(self.model_kind, M::DecisionTree | M::RandomForest),
        };
        if !model_ok {
            return Err(bad(format!("attack {:?} cannot target a {:?} server", self.attack_kind, self.model_kind)));
        }
        match (self.defense, self.model_kind) {
            (DefensePolicy::ModelRandomization { .. }, m) if m != M::Halfspace => {
                return Err(bad("model randomization requires a halfspace server"));
            }
            (DefensePolicy::NoDefense, _) => {}
            (_, M::LinearRegression) => return Err(bad("the leaky regression server is undefended")),
            (DefensePolicy::ConstantFlip { .. }, M::DecisionTree) if self.server.n_classes != 2 => {
                return Err(bad("constant flip requires a binary-label server"));
            }
            _ => {}
        }
        match self.attack_kind {
            A::NoisyQs => {
                let rho = self.attack_rho();
                if !(0.0..0.5).contains(&rho) {
                    return Err(bad(format!("rho = {rho} must lie in [0, 1/2)")));
                }
            }
            A::Average => {
                let s = self.attack_sigma_hat();
                if !(s * (self.d as f64).sqrt() >= 1.0 - 1e-12) {
                    return Err(bad(format!("sigma_hat = {s} is below 1/sqrt(d)")));
                }
            }
            A::Eat | A::UniformSvm => {
                let seed = self.eat.r_init.unwrap_or(20.max(self.d + 1)) as u64;
                match self.budget {
                    Some(b) if b > seed => {}
                    _ => return Err(bad(format!("EAT needs a budget above the seed-set size {seed}"))),
                }
                if self.eat.k == 0 || self.eat.test_size == 0 {
                    return Err(bad("eat.k and eat.test_size must be >= 1"));
                }
            }
            A::Iwal => {
                if self.model_kind == M::RandomForest && self.server.n_classes != 2 {
                    return Err(bad("forest servers are binary"));
                }
                if let mexlab_core::nonlinear::Learner::Forest { trees } = self.iwal.learner.learner {
                    if trees % 2 == 0 {
                        return Err(bad("iwal forest size must be odd"));
                    }
                }
                if self.iwal.pool_size == 0 && self.dataset_path.is_none() {
                    return Err(bad("iwal.pool_size must be >= 1"));
                }
            }
            _ => {}
        }
        if self.model_kind == M::RandomForest && self.server.forest_trees % 2 == 0 {
            return Err(bad("server.forest_trees must be odd"));
        }
        if matches!(self.model_kind, M::DecisionTree | M::RandomForest)
            && (self.server.tree_depth == 0 || self.server.n_classes < 2)
        {
            return Err(bad("server trees need depth >= 1 and at least 2 classes"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Eps,
    D,
    Rho,
    Sigma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub schema_version: u32,
    pub base: ExperimentConfig,
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| bad(format!("sweep spec: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// The base config with the swept parameter set to `value`.
    pub fn cell(&self, value: f64) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::Eps => cfg.eps = value,
            SweepAxis::D => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(bad(format!("d = {value} is not a positive integer")));
                }
                cfg.d = value as usize;
            }
            SweepAxis::Rho => {
                cfg.defense = DefensePolicy::ConstantFlip { rho: value };
                cfg.rho = None;
            }
            SweepAxis::Sigma => cfg.defense = DefensePolicy::ModelRandomization { sigma: value },
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {}", self.schema_version)));
        }
        if self.values.is_empty() {
            return Err(bad("sweep needs at least one value"));
        }
        for &v in &self.values {
            self.cell(v)?;
        }
        Ok(())
    }
}
