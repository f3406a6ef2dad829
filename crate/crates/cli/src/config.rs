//! Run configuration as read from JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use qkdv_core::generators::{cosine, random_hermitian};
use qkdv_core::lattice::{FieldDocument, FieldEntry};
use qkdv_core::picard::SolverConfig;
use qkdv_core::spectral::LAX_SCALE;
use qkdv_core::{CoeffField, Envelope, FrequencyVector};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default)]
    pub verify: Verify,
    #[serde(default)]
    pub chain: Chain,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub nu: usize,
    pub omega: Vec<f64>,
    pub kappa: f64,
    pub b0: f64,
    pub initial: Initial,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    /// `amplitude · cos(ω_component x)`, component 0-based.
    Cosine { component: usize, amplitude: f64 },
    /// Seeded by the run seed.
    RandomHermitian,
    Coefficients { entries: Vec<FieldEntry> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Solver {
    pub radius: u32,
    pub t_request: f64,
    pub k_max: u32,
    pub target_tol: f64,
    pub prune_floor: f64,
    pub max_terms: Option<usize>,
    pub c0: Option<f64>,
    pub sup_samples: usize,
}

impl Default for Solver {
    fn default() -> Self {
        Solver {
            radius: 8,
            t_request: 0.01,
            k_max: 12,
            target_tol: 1e-10,
            prune_floor: 1e-30,
            max_terms: None,
            c0: None,
            sup_samples: 33,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    TreeOracle,
    Combinatorics,
    Uniqueness,
    Spectrum,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::TreeOracle => "tree-oracle",
            Suite::Combinatorics => "combinatorics",
            Suite::Uniqueness => "uniqueness",
            Suite::Spectrum => "spectrum",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Verify {
    pub suite: Option<Suite>,
    /// Tree oracle: depths `1..=k_max` at time `oracle_t`.
    pub k_max: u32,
    pub oracle_t: f64,
    pub oracle_tol: f64,
    /// Combinatorics: `N, ℓ <= n_max`.
    pub n_max: u32,
    pub rk4_dt: f64,
    pub samples: usize,
    pub spectrum: SpectrumParams,
    pub drift_tol: f64,
}

impl Default for Verify {
    fn default() -> Self {
        Verify {
            suite: None,
            k_max: 3,
            oracle_t: 0.05,
            oracle_tol: 1e-10,
            n_max: 6,
            rk4_dt: 1e-4,
            samples: 5,
            spectrum: SpectrumParams::default(),
            drift_tol: 1e-4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumParams {
    pub scale: f64,
    pub e_max: f64,
    pub max_edges: usize,
    pub basis_radius: u32,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        SpectrumParams {
            scale: LAX_SCALE,
            e_max: 3.0,
            max_edges: 6,
            basis_radius: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Chain {
    pub segments: usize,
    /// Stop once the measured envelope exceeds this multiple of `B0`.
    pub budget_multiple: f64,
    pub spectrum: SpectrumParams,
}

impl Default for Chain {
    fn default() -> Self {
        Chain {
            segments: 1,
            budget_multiple: 4.0,
            spectrum: SpectrumParams::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
    pub t_samples: usize,
    pub x_samples: usize,
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: PathBuf::from("qkdv-out"),
            t_samples: 5,
            x_samples: 16,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("[config] cannot read {}: {e}", path.display()))?;
        let cfg: RunConfig =
            serde_json::from_str(&text).map_err(|e| format!("[config] schema violation in {}: {e}", path.display()))?;
        cfg.check()?;
        Ok(cfg)
    }

    fn check(&self) -> Result<(), String> {
        let p = &self.problem;
        if p.omega.len() != p.nu {
            return Err(format!("[config] omega has {} entries but nu = {}", p.omega.len(), p.nu));
        }
        if self.output.t_samples < 2 || self.output.x_samples < 1 {
            return Err("[config] output needs t_samples >= 2 and x_samples >= 1".into());
        }
        if self.verify.samples < 2 {
            return Err("[config] verify.samples must be >= 2".into());
        }
        Ok(())
    }

    pub fn omega(&self) -> qkdv_core::Result<FrequencyVector> {
        FrequencyVector::new(self.problem.omega.clone())
    }

    pub fn initial_data(&self) -> qkdv_core::Result<CoeffField> {
        let p = &self.problem;
        let r = self.solver.radius;
        let env = Envelope::new(p.b0, p.kappa)?;
        match &p.initial {
            Initial::Cosine { component, amplitude } => cosine(p.nu, r, *component, *amplitude, env),
            Initial::RandomHermitian => random_hermitian(p.nu, r, p.b0, p.kappa, self.seed),
            Initial::Coefficients { entries } => {
                let doc = FieldDocument {
                    nu: p.nu,
                    omega: p.omega.clone(),
                    radius: r,
                    entries: entries.clone(),
                };
                CoeffField::from_document(&doc)?.0.with_envelope(env)
            }
        }
    }

    pub fn solver_config(&self) -> SolverConfig {
        let s = &self.solver;
        let mut cfg = SolverConfig::new(s.radius, s.t_request);
        cfg.max_iterations = s.k_max;
        cfg.target_tol = s.target_tol;
        cfg.prune_floor = s.prune_floor;
        if let Some(m) = s.max_terms {
            cfg.max_terms = m;
        }
        cfg.c0 = s.c0;
        cfg.sup_samples = s.sup_samples;
        cfg
    }
}
