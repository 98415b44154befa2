//! System-level free energy of an ensemble of independent dyads.
//!
//! Each agent becomes a point at its offset from its run's reference cell.
//! The histogram of the `2M` offsets is compared, by KL divergence, with a
//! discretized Gaussian centred on offset zero.

use serde::{Deserialize, Serialize};

use crate::beliefmath::{discretized_gaussian, kl, ProbDist};
use crate::dyad::RunRecord;
use crate::environment::WorldConfig;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// The run's randomized shared target.
    #[default]
    SharedTarget,
    Beacon,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub sigma: f64,
    pub reference: Reference,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            sigma: 3.0,
            reference: Reference::SharedTarget,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.sigma.is_finite() || self.sigma <= 0.0 {
            return Err(Error::Config(format!(
                "system.sigma = {} must be positive",
                self.sigma
            )));
        }
        Ok(())
    }

    pub fn reference_cell(&self, run: &RunRecord, world: &WorldConfig) -> usize {
        match self.reference {
            Reference::SharedTarget => run.layout.shared,
            Reference::Beacon => world.beacon,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSeries {
    pub empirical: Vec<ProbDist>,
    pub free_energy: Vec<f64>,
}

/// Histogram of `positions[i] - references[i / 2]` mod N, normalized.
///
/// Positions come in run order, two per run.
pub fn empirical_distribution(
    positions: &[usize],
    references: &[usize],
    world: &WorldConfig,
) -> Result<ProbDist> {
    if positions.is_empty() || positions.len() != 2 * references.len() {
        return Err(Error::Input(format!(
            "{} positions do not pair up with {} references",
            positions.len(),
            references.len()
        )));
    }
    let n = world.n_cells;
    let mut counts = vec![0usize; n];
    for (i, &pos) in positions.iter().enumerate() {
        let reference = references[i / 2];
        if pos >= n || reference >= n {
            return Err(Error::Input(format!("cell outside the {n}-cell world")));
        }
        counts[(pos + n - reference) % n] += 1;
    }
    let total = positions.len() as f64;
    Ok(ProbDist::from_normalized_unchecked(
        counts.into_iter().map(|c| c as f64 / total).collect(),
    ))
}

/// The system's expected offset distribution.
pub fn system_prior(config: &SystemConfig, n: usize) -> Result<ProbDist> {
    discretized_gaussian(0, config.sigma, n)
}

/// `KL(q_emp || gaussian(0, sigma))`, with empty cells contributing zero.
pub fn system_free_energy(q_emp: &ProbDist, config: &SystemConfig) -> Result<f64> {
    let prior = system_prior(config, q_emp.len())?;
    Ok(kl(q_emp.as_slice(), prior.as_slice()))
}

/// Offset histogram and system free energy at every epoch.
pub fn series_over_epochs(
    runs: &[RunRecord],
    config: &SystemConfig,
    world: &WorldConfig,
) -> Result<SystemSeries> {
    let first = runs
        .first()
        .ok_or_else(|| Error::Input("no runs to aggregate".into()))?;
    let epochs = first.epochs.len();
    if let Some(r) = runs.iter().find(|r| r.epochs.len() != epochs) {
        return Err(Error::Input(format!(
            "run {} has {} epochs, expected {epochs}",
            r.run_index,
            r.epochs.len()
        )));
    }
    let prior = system_prior(config, world.n_cells)?;
    let references: Vec<usize> = runs
        .iter()
        .map(|r| config.reference_cell(r, world))
        .collect();
    let mut empirical = Vec::with_capacity(epochs);
    let mut free_energy = Vec::with_capacity(epochs);
    let mut positions = Vec::with_capacity(2 * runs.len());
    for t in 0..epochs {
        positions.clear();
        for r in runs {
            positions.push(r.epochs[t].pos_a);
            positions.push(r.epochs[t].pos_b);
        }
        let q = empirical_distribution(&positions, &references, world)?;
        free_energy.push(kl(q.as_slice(), prior.as_slice()));
        empirical.push(q);
    }
    Ok(SystemSeries {
        empirical,
        free_energy,
    })
}
