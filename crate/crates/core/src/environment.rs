//! The circular world: target layout, the chemical beacon and the one-bit
//! sensor.

use serde::{Deserialize, Serialize};

use crate::beliefmath::circular_distance;
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldConfig {
    pub n_cells: usize,
    /// Cell around which the sensor fires most often.
    pub beacon: usize,
    /// Per-cell decay rate of the sensor probability.
    pub omega: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        WorldConfig {
            n_cells: 60,
            beacon: 30,
            omega: 0.1,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_cells < 3 {
            return Err(Error::Config(format!(
                "world.n_cells = {} is below the minimum of 3",
                self.n_cells
            )));
        }
        if self.beacon >= self.n_cells {
            return Err(Error::Config(format!(
                "world.beacon = {} outside [0, {}]",
                self.beacon,
                self.n_cells - 1
            )));
        }
        if !self.omega.is_finite() || self.omega < 0.0 {
            return Err(Error::Config(format!(
                "world.omega = {} must be a finite non-negative number",
                self.omega
            )));
        }
        Ok(())
    }

    /// `(cell + step) mod N` for a signed step.
    pub fn wrap(&self, cell: usize, step: i64) -> usize {
        (cell as i64 + step).rem_euclid(self.n_cells as i64) as usize
    }

    pub fn distance(&self, x: usize, y: usize) -> usize {
        circular_distance(x, y, self.n_cells)
    }
}

/// One shared target and one private target per agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetLayout {
    pub shared: usize,
    pub private_a: usize,
    pub private_b: usize,
}

impl Default for TargetLayout {
    fn default() -> Self {
        TargetLayout {
            shared: 30,
            private_a: 15,
            private_b: 45,
        }
    }
}

impl TargetLayout {
    pub fn validate(&self, world: &WorldConfig) -> Result<()> {
        for (name, cell) in [
            ("layout.shared", self.shared),
            ("layout.private_a", self.private_a),
            ("layout.private_b", self.private_b),
        ] {
            if cell >= world.n_cells {
                return Err(Error::Config(format!(
                    "{name} = {cell} outside [0, {}]",
                    world.n_cells - 1
                )));
            }
        }
        Ok(())
    }

    /// Offsets `(private_a - shared, private_b - shared)` reduced into
    /// `(-N/2, N/2]`.
    pub fn offsets(&self, n: usize) -> (i64, i64) {
        let centred = |cell: usize| {
            let d = (cell as i64 - self.shared as i64).rem_euclid(n as i64);
            if d > n as i64 / 2 {
                d - n as i64
            } else {
                d
            }
        };
        (centred(self.private_a), centred(self.private_b))
    }

    /// Same relative layout with the shared target moved to `shared`.
    pub fn relocated(&self, shared: usize, world: &WorldConfig) -> TargetLayout {
        let (off_a, off_b) = self.offsets(world.n_cells);
        TargetLayout {
            shared,
            private_a: world.wrap(shared, off_a),
            private_b: world.wrap(shared, off_b),
        }
    }
}

/// Probability that the sensor fires at `psi`: `k exp(-omega d(psi, beacon))`.
pub fn sensor_probability(psi: usize, k: f64, world: &WorldConfig) -> Result<f64> {
    if !(0.0..=1.0).contains(&k) {
        return Err(Error::Parameter(format!(
            "perceptiveness {k} outside [0, 1]"
        )));
    }
    if psi >= world.n_cells {
        return Err(Error::Parameter(format!("cell {psi} outside the world")));
    }
    Ok(firing_probability(psi, k, world))
}

pub(crate) fn firing_probability(psi: usize, k: f64, world: &WorldConfig) -> f64 {
    k * (-world.omega * world.distance(psi, world.beacon) as f64).exp()
}

/// Likelihood of observing bit `s` at `psi`.
pub(crate) fn sensor_likelihood(s: bool, psi: usize, k: f64, world: &WorldConfig) -> f64 {
    let p = firing_probability(psi, k, world);
    if s {
        p
    } else {
        1.0 - p
    }
}

/// Samples the sensor bit; consumes exactly one draw.
pub fn sense(psi: usize, k: f64, world: &WorldConfig, rng: &mut RngStream) -> Result<bool> {
    let p = sensor_probability(psi, k, world)?;
    Ok(sense_with(p, rng.next_u64()))
}

pub(crate) fn sense_with(p: f64, bits: u64) -> bool {
    crate::rng::unit_f64(bits) < p
}

/// Draws a uniform shared target and carries the private targets along at
/// their fixed offsets.
pub fn randomize_layout(
    base: &TargetLayout,
    world: &WorldConfig,
    rng: &mut RngStream,
) -> TargetLayout {
    let shared = rng.next_below(world.n_cells as u64) as usize;
    base.relocated(shared, world)
}

/// Two independent uniform cells.
pub fn random_start_positions(world: &WorldConfig, rng: &mut RngStream) -> (usize, usize) {
    let n = world.n_cells as u64;
    let a = rng.next_below(n) as usize;
    let b = rng.next_below(n) as usize;
    (a, b)
}
