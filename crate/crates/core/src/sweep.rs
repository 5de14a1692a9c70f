//! Initial-condition sets, run configuration and the `(α, δ)` plane sweep.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractors::{classify_regime_with, RegimeLabel};
use crate::equilibria::{find_equilibria, EquilibriumKind};
use crate::error::{Error, Result};
use crate::integrator::{integrate, IntegratorSettings};
use crate::model::{swap, Parameters, State};

/// Generator behind the random initial conditions, recorded in output metadata.
pub const RNG_NAME: &str = "ChaCha8Rng";
pub const RANDOM_RADIUS: f64 = 0.3;
pub const RANDOM_COUNT: usize = 4;
/// Environment variable overriding the sweep worker count.
pub const THREADS_ENV: &str = "FHN_PAIR_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialCondition {
    pub name: String,
    pub state: State,
}

impl InitialCondition {
    fn new(name: impl Into<String>, state: State) -> Self {
        Self {
            name: name.into(),
            state,
        }
    }
}

/// The lowest symmetric equilibrium, the anchor of every initial-condition set.
pub fn anchor_equilibrium(p: &Parameters) -> Result<State> {
    find_equilibria(p)?
        .into_iter()
        .find(|e| e.kind == EquilibriumKind::Symmetric)
        .map(|e| e.state)
        .ok_or_else(|| Error::InvalidParameter("no symmetric equilibrium".into()))
}

/// `sym`, `anti`, `kick1`, `kick2` and four seeded random perturbations.
///
/// All are offsets from the anchor equilibrium: `(0.3, 0, 0.3, 0)`,
/// `(0.3, 0, −0.3, 0)`, `(0.5, 0, 0, 0)`, its swap, and uniformly random
/// directions of radius 0.3 drawn from [`RNG_NAME`] seeded with `seed`.
pub fn standard_ic_set(p: &Parameters, seed: u64) -> Result<Vec<InitialCondition>> {
    let e = anchor_equilibrium(p)?;
    let kick1 = e.offset([0.5, 0.0, 0.0, 0.0]);
    let mut set = vec![
        InitialCondition::new("sym", e.offset([0.3, 0.0, 0.3, 0.0])),
        InitialCondition::new("anti", e.offset([0.3, 0.0, -0.3, 0.0])),
        InitialCondition::new("kick1", kick1),
        InitialCondition::new("kick2", swap(kick1)),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..RANDOM_COUNT {
        let d: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        let n = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        set.push(InitialCondition::new(
            format!("random{i}"),
            e.offset(d.map(|v| RANDOM_RADIUS * v / n)),
        ));
    }
    Ok(set)
}

/// Looks up one member of the standard set by name.
pub fn named_ic(name: &str, p: &Parameters, seed: u64) -> Result<State> {
    standard_ic_set(p, seed)?
        .into_iter()
        .find(|ic| ic.name == name)
        .map(|ic| ic.state)
        .ok_or_else(|| Error::InvalidParameter(format!("unknown initial condition {name:?}")))
}

/// Model constants with the sector in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParameterConfig {
    pub a: f64,
    pub eps: f64,
    pub k: f64,
    pub g: f64,
    pub alpha_deg: f64,
    pub delta_deg: f64,
}

impl Default for ParameterConfig {
    fn default() -> Self {
        let p = Parameters::default();
        Self {
            a: p.a,
            eps: p.eps,
            k: p.k,
            g: p.g,
            alpha_deg: 210.0,
            delta_deg: 50.0,
        }
    }
}

impl ParameterConfig {
    pub fn to_parameters(&self) -> Result<Parameters> {
        Parameters::new(self.a, self.eps, self.k, self.g, 0.0, 1.0)?.with_sector_deg(self.alpha_deg, self.delta_deg)
    }
}

/// Sweep grid in degrees.
///
/// `α` samples are `start + i·(end − start)/points`, end excluded, so a
/// full turn has no duplicate column. `δ` samples are
/// `start + (j + 1)·(end − start)/points`, start excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub alpha_start_deg: f64,
    pub alpha_end_deg: f64,
    pub alpha_points: usize,
    pub delta_start_deg: f64,
    pub delta_end_deg: f64,
    pub delta_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            alpha_start_deg: 0.0,
            alpha_end_deg: 360.0,
            alpha_points: 360,
            delta_start_deg: 0.0,
            delta_end_deg: 90.0,
            delta_points: 90,
        }
    }
}

impl GridConfig {
    pub fn alphas(&self) -> Vec<f64> {
        let step = (self.alpha_end_deg - self.alpha_start_deg) / self.alpha_points as f64;
        (0..self.alpha_points).map(|i| self.alpha_start_deg + i as f64 * step).collect()
    }

    pub fn deltas(&self) -> Vec<f64> {
        let step = (self.delta_end_deg - self.delta_start_deg) / self.delta_points as f64;
        (0..self.delta_points).map(|j| self.delta_start_deg + (j + 1) as f64 * step).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_points < 2 || self.delta_points < 2 {
            return Err(Error::Config("grid resolutions must be at least 2".into()));
        }
        let d = self.deltas();
        if d.iter().any(|&v| !(v > 0.0 && v < 360.0)) {
            return Err(Error::Config("grid delta values must lie in (0°, 360°)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcConfig {
    /// Only `"standard"` is defined.
    pub set: String,
    pub seed: u64,
}

impl Default for IcConfig {
    fn default() -> Self {
        Self {
            set: "standard".into(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Destination file; standard output when absent.
    pub path: Option<PathBuf>,
}

/// Everything a run needs, read from TOML with one table per field.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub parameters: ParameterConfig,
    pub integrator: IntegratorSettings,
    pub grid: GridConfig,
    pub initial_conditions: IcConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        toml::from_str(s).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn params(&self) -> Result<Parameters> {
        self.parameters.to_parameters()
    }

    pub fn validate(&self) -> Result<()> {
        self.params()?;
        self.integrator.validate()?;
        self.grid.validate()?;
        if self.initial_conditions.set != "standard" {
            return Err(Error::Config(format!(
                "unknown initial-condition set {:?}",
                self.initial_conditions.set
            )));
        }
        Ok(())
    }
}

/// Regime reached from one named initial condition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IcOutcome {
    pub ic: String,
    pub label: RegimeLabel,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCell {
    pub alpha_deg: f64,
    pub delta_deg: f64,
    pub outcomes: Vec<IcOutcome>,
    /// Distinct labels, sorted.
    pub inventory: Vec<RegimeLabel>,
    pub multistable: bool,
}

impl SweepCell {
    pub fn contains(&self, label: &RegimeLabel) -> bool {
        self.inventory.contains(label)
    }
}

/// Integrates and labels; any failure becomes `Unclassified`.
pub fn classify_ic(s0: State, p: &Parameters, cfg: &IntegratorSettings) -> RegimeLabel {
    integrate(s0, p, cfg)
        .and_then(|traj| classify_regime_with(&traj, p, cfg))
        .unwrap_or(RegimeLabel::Unclassified)
}

/// Distinct labels; `Unclassified` is dropped when anything else was found.
pub fn inventory(labels: &[RegimeLabel]) -> Vec<RegimeLabel> {
    let mut set: BTreeSet<RegimeLabel> = labels.iter().cloned().collect();
    if set.len() > 1 {
        set.remove(&RegimeLabel::Unclassified);
    }
    set.into_iter().collect()
}

/// Labels every member of the standard set at one `(α, δ)`.
pub fn sweep_cell(alpha_deg: f64, delta_deg: f64, base: &Parameters, cfg: &IntegratorSettings, seed: u64) -> SweepCell {
    let outcomes: Vec<IcOutcome> = match base
        .with_sector_deg(alpha_deg, delta_deg)
        .and_then(|p| Ok((standard_ic_set(&p, seed)?, p)))
    {
        Ok((ics, p)) => ics
            .into_iter()
            .map(|ic| IcOutcome {
                label: classify_ic(ic.state, &p, cfg),
                ic: ic.name,
            })
            .collect(),
        Err(_) => vec![IcOutcome {
            ic: "none".into(),
            label: RegimeLabel::Unclassified,
        }],
    };
    let labels: Vec<RegimeLabel> = outcomes.iter().map(|o| o.label.clone()).collect();
    let inventory = inventory(&labels);
    SweepCell {
        alpha_deg,
        delta_deg,
        multistable: inventory.len() >= 2,
        outcomes,
        inventory,
    }
}

fn worker_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| Error::Config(e.to_string()))
}

/// Sweeps `cells` (pairs of degrees) in parallel; results keep the input order.
pub fn sweep_cells(cells: &[(f64, f64)], base: &Parameters, cfg: &IntegratorSettings, seed: u64) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let pool = worker_pool()?;
    Ok(pool.install(|| {
        cells
            .par_iter()
            .map(|&(a, d)| sweep_cell(a, d, base, cfg, seed))
            .collect()
    }))
}

/// The configured grid, rows of constant `δ` with `α` ascending.
pub fn sweep_plane(cfg: &RunConfig) -> Result<Vec<SweepCell>> {
    cfg.validate()?;
    let cells: Vec<(f64, f64)> = cfg
        .grid
        .deltas()
        .into_iter()
        .flat_map(|d| cfg.grid.alphas().into_iter().map(move |a| (a, d)))
        .collect();
    sweep_cells(&cells, &cfg.params()?, &cfg.integrator, cfg.initial_conditions.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ic_set_structure() {
        let p = Parameters::with_angles_deg(157.0, 50.0).unwrap();
        let set = standard_ic_set(&p, 0).unwrap();
        assert_eq!(set.len(), 8);
        let by = |n: &str| set.iter().find(|ic| ic.name == n).unwrap().state;
        assert_eq!(by("kick2"), swap(by("kick1")));
        let e = anchor_equilibrium(&p).unwrap();
        assert_eq!(by("sym").x1 - e.x1, by("sym").x2 - e.x2);
        for i in 0..RANDOM_COUNT {
            let r = by(&format!("random{i}"));
            assert!((r.distance(&e) - RANDOM_RADIUS).abs() < 1e-12);
        }
        assert_eq!(set, standard_ic_set(&p, 0).unwrap());
        assert_ne!(set[4], standard_ic_set(&p, 1).unwrap()[4]);
    }

    #[test]
    fn config_round_trip_and_defaults() {
        let cfg = RunConfig::from_toml_str(
            "[parameters]\nalpha_deg = 157.0\n[grid]\nalpha_points = 4\ndelta_points = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.parameters.alpha_deg, 157.0);
        assert_eq!(cfg.parameters.g, 0.1);
        assert_eq!(cfg.integrator, IntegratorSettings::default());
        assert_eq!(cfg.grid.alphas(), vec![0.0, 90.0, 180.0, 270.0]);
        assert_eq!(cfg.grid.deltas(), vec![30.0, 60.0, 90.0]);
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), cfg);
    }

    #[test]
    fn config_errors() {
        assert!(matches!(RunConfig::from_toml_str("[parameters]\nalpha = 3\n"), Err(Error::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.grid.alpha_points = 1;
        assert!(cfg.validate().is_err());
        cfg = RunConfig::default();
        cfg.initial_conditions.set = "custom".into();
        assert!(cfg.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn inventory_rules() {
        let w = |b: &[u8]| RegimeLabel::Sequential(crate::attractors::Word::from_bursts(&[b.to_vec()]).unwrap());
        let inv = inventory(&[w(&[1, 2]), w(&[2, 1]), RegimeLabel::Unclassified, w(&[1, 2])]);
        assert_eq!(inv, vec![w(&[1, 2]), w(&[2, 1])]);
        assert_eq!(inventory(&[RegimeLabel::Unclassified]), vec![RegimeLabel::Unclassified]);
    }
}
