//! Browser bindings: step a single dyad epoch by epoch, or run a small
//! ensemble of one model and get its system free-energy series.

use dyad_core::dyad::{self, AgentId, DyadState, SnapshotPolicy};
use dyad_core::environment::{TargetLayout, WorldConfig};
use dyad_core::experiments::{run_model, ModelSpec, Protocol};
use dyad_core::rng::RngStream;
use wasm_bindgen::prelude::*;

fn agent_id(agent: u8) -> Result<AgentId, JsError> {
    match agent {
        0 => Ok(AgentId::A),
        1 => Ok(AgentId::B),
        other => Err(JsError::new(&format!(
            "agent {other} is not 0 (A) or 1 (B)"
        ))),
    }
}

/// One seeded run of a model preset.
#[wasm_bindgen]
pub struct Dyad {
    spec: ModelSpec,
    world: WorldConfig,
    rng: RngStream,
    state: DyadState,
    free_energy: [f64; 2],
}

#[wasm_bindgen]
impl Dyad {
    #[wasm_bindgen(constructor)]
    pub fn new(model: u8, seed: u32) -> Result<Dyad, JsError> {
        let spec = ModelSpec::preset(model).map_err(|e| JsError::new(&e.to_string()))?;
        let world = WorldConfig::default();
        let mut rng = RngStream::for_run(u64::from(seed), 0);
        let state = dyad::init_run(
            &world,
            &TargetLayout::default(),
            &spec.params_a,
            &spec.params_b,
            &mut rng,
        );
        Ok(Dyad {
            spec,
            world,
            rng,
            state,
            free_energy: [f64::NAN; 2],
        })
    }

    /// Advances `epochs` epochs.
    pub fn step(&mut self, epochs: u32) {
        for _ in 0..epochs {
            let (next, record) = dyad::step(
                &self.state,
                &self.world,
                &self.spec.params_a,
                &self.spec.params_b,
                &mut self.rng,
                false,
            );
            self.free_energy = [record.f_a, record.f_b];
            self.state = next;
        }
    }

    pub fn epoch(&self) -> u32 {
        self.state.epoch as u32
    }

    #[wasm_bindgen(js_name = nCells)]
    pub fn n_cells(&self) -> u32 {
        self.world.n_cells as u32
    }

    /// `[pos_a, pos_b]`.
    pub fn positions(&self) -> Vec<u32> {
        vec![self.state.pos_a as u32, self.state.pos_b as u32]
    }

    /// `[shared, private_a, private_b, beacon]`.
    pub fn landmarks(&self) -> Vec<u32> {
        let l = &self.state.layout;
        vec![
            l.shared as u32,
            l.private_a as u32,
            l.private_b as u32,
            self.world.beacon as u32,
        ]
    }

    /// Where `agent` believes it is.
    #[wasm_bindgen(js_name = ownBelief)]
    pub fn own_belief(&self, agent: u8) -> Result<Vec<f64>, JsError> {
        Ok(self
            .state
            .beliefs(agent_id(agent)?)
            .own
            .distribution()
            .into_inner())
    }

    /// Where `agent` believes its partner is.
    #[wasm_bindgen(js_name = partnerBelief)]
    pub fn partner_belief(&self, agent: u8) -> Result<Vec<f64>, JsError> {
        Ok(self
            .state
            .beliefs(agent_id(agent)?)
            .partner
            .distribution()
            .into_inner())
    }

    /// Free energies of A and B after the last epoch, NaN before the first.
    #[wasm_bindgen(js_name = freeEnergy)]
    pub fn free_energy(&self) -> Vec<f64> {
        self.free_energy.to_vec()
    }
}

/// Per-epoch system free energy of `runs` runs of `model`.
#[wasm_bindgen(js_name = systemFreeEnergy)]
pub fn system_free_energy(
    model: u8,
    runs: u32,
    epochs: u32,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    let mut spec = ModelSpec::preset(model).map_err(|e| JsError::new(&e.to_string()))?;
    spec.runs = runs as usize;
    spec.epochs = epochs as usize;
    let protocol = Protocol {
        master_seed: u64::from(seed),
        snapshots: SnapshotPolicy::None,
        ..Protocol::default()
    };
    let (_, summary) = run_model(&spec, &protocol).map_err(|e| JsError::new(&e.to_string()))?;
    Ok(summary.system_free_energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stepping_moves_the_clock() {
        let mut d = Dyad::new(4, 1).ok().unwrap();
        assert_eq!(d.epoch(), 0);
        assert!(d.free_energy().iter().all(|f| f.is_nan()));
        d.step(5);
        assert_eq!(d.epoch(), 5);
        assert!(d.free_energy().iter().all(|f| f.is_finite()));
        assert!(d.positions().iter().all(|p| *p < 60));
        let q = d.own_belief(0).ok().unwrap();
        assert!((q.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(d.landmarks()[3], 30);
    }

    #[test]
    fn ensemble_series_has_one_value_per_epoch() {
        let series = system_free_energy(3, 4, 12, 0).ok().unwrap();
        assert_eq!(series.len(), 12);
    }
}
