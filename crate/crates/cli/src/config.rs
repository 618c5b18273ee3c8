//! Run configuration: one declarative TOML file, flag overrides win.

use anyhow::{bail, Context, Result};
use diracflow::clifford::SpinStructure;
use diracflow::dirac::SolverMode;
use diracflow::profile::CollapseProfile;
use diracflow::sfl::SflControls;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const UNTWISTED_GAP: f64 = 5.441398092702653; // pi * sqrt(3)

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ProfileConfig {
    pub radius: f64,
    pub sharpness: f64,
    pub flatness_power: f64,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            radius: 0.45,
            sharpness: 1.0,
            flatness_power: 1.0,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ControlConfig {
    pub max_steps: usize,
    pub safety: f64,
    pub band: f64,
    pub zero_tol: f64,
    pub min_step: f64,
}

impl Default for ControlConfig {
    fn default() -> Self {
        let c = SflControls::<f64>::default();
        ControlConfig {
            max_steps: c.max_steps,
            safety: c.safety,
            band: c.band,
            zero_tol: c.zero_tol,
            min_step: c.min_step,
        }
    }
}

/// Full run configuration; the `verify` defaults reproduce the standard
/// suite `k in {-2..2}` on the 8-grid with the dense solver.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub k_list: Vec<i64>,
    pub grid: usize,
    /// Grid for the two topological quadratures (degree and winding); they
    /// are cheap and need more resolution than the operator grid.
    pub topo_grid: usize,
    pub rank: usize,
    pub delta: [u8; 3],
    pub window: f64,
    pub solver: SolverChoice,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub seed: u64,
    pub cache: bool,
    pub profile: ProfileConfig,
    pub controls: ControlConfig,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SolverChoice {
    Dense,
    Iterative,
}

impl From<SolverChoice> for SolverMode {
    fn from(c: SolverChoice) -> SolverMode {
        match c {
            SolverChoice::Dense => SolverMode::Dense,
            SolverChoice::Iterative => SolverMode::Iterative,
        }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            k_list: vec![-2, -1, 0, 1, 2],
            grid: 8,
            topo_grid: 32,
            rank: 2,
            delta: [1, 1, 1],
            window: 3.0,
            solver: SolverChoice::Dense,
            out_dir: PathBuf::from("out"),
            workers: 2,
            seed: 7,
            cache: true,
            profile: ProfileConfig::default(),
            controls: ControlConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: RunConfig = toml::from_str(&text).context("parsing config")?;
        Ok(cfg)
    }

    /// The theorem hypotheses and numeric sanity, enforced before any work.
    pub fn validate(&self) -> Result<()> {
        if self.k_list.is_empty() {
            bail!("k_list must not be empty");
        }
        if self.rank < 2 {
            bail!("rank N = {} rejected: the construction needs N >= 2", self.rank);
        }
        if self.delta == [0, 0, 0] {
            bail!("trivial spin structure rejected: the untwisted operator must be invertible");
        }
        if self.delta.iter().any(|&d| d > 1) {
            bail!("spin structure entries must be 0 or 1");
        }
        if self.grid < 2 {
            bail!("grid must be at least 2");
        }
        if self.topo_grid < 2 {
            bail!("topo_grid must be at least 2");
        }
        if !(self.window > 0.0 && self.window < UNTWISTED_GAP) {
            bail!(
                "window {} must lie in (0, {:.4}) so the untwisted spectrum stays outside",
                self.window,
                UNTWISTED_GAP
            );
        }
        if !(self.controls.safety > 0.0 && self.controls.safety < 1.0) {
            bail!("safety must lie in (0,1)");
        }
        if self.workers == 0 {
            bail!("workers must be positive");
        }
        self.collapse_profile()
            .map_err(|e| anyhow::anyhow!("profile: {e}"))?;
        Ok(())
    }

    pub fn spin_structure(&self) -> SpinStructure {
        SpinStructure(self.delta)
    }

    pub fn collapse_profile(&self) -> diracflow::Result<CollapseProfile<f64>> {
        CollapseProfile::with_power(
            self.profile.radius,
            self.profile.sharpness,
            self.profile.flatness_power,
        )
    }

    pub fn sfl_controls(&self) -> SflControls<f64> {
        SflControls {
            max_steps: self.controls.max_steps,
            safety: self.controls.safety,
            band: self.controls.band,
            zero_tol: self.controls.zero_tol,
            min_step: self.controls.min_step,
            seed: self.seed,
        }
    }
}
