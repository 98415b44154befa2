//! The lockstep two-agent loop.
//!
//! Every epoch both agents sense, pick an action pair from their current
//! beliefs, optimise their beliefs for the chosen actions, and move. The
//! relative offset and the partner's executed action are then observed
//! exactly for the next epoch.

use serde::{Deserialize, Serialize};

use crate::agent::{
    compose_desires, optimize, select_action_with, Action, ActionPair, AgentBeliefs, AgentParams,
    DesireSpec, Percept,
};
use crate::beliefmath::ProbDist;
use crate::environment::{
    firing_probability, random_start_positions, randomize_layout, sense_with, TargetLayout,
    WorldConfig,
};
use crate::rng::RngStream;
use crate::{Error, Result};

/// Draws used before the first epoch: layout, then two start cells.
const INIT_DRAWS: u64 = 3;
/// Draw slots per epoch: A sense, B sense, A tie-break, B tie-break.
const EPOCH_DRAWS: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentId {
    A,
    B,
}

impl AgentId {
    pub fn other(self) -> AgentId {
        match self {
            AgentId::A => AgentId::B,
            AgentId::B => AgentId::A,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DyadState {
    pub pos_a: usize,
    pub pos_b: usize,
    pub beliefs_a: AgentBeliefs,
    pub beliefs_b: AgentBeliefs,
    pub last_action_a: Action,
    pub last_action_b: Action,
    pub layout: TargetLayout,
    pub epoch: usize,
}

impl DyadState {
    pub fn position(&self, agent: AgentId) -> usize {
        match agent {
            AgentId::A => self.pos_a,
            AgentId::B => self.pos_b,
        }
    }

    pub fn beliefs(&self, agent: AgentId) -> &AgentBeliefs {
        match agent {
            AgentId::A => &self.beliefs_a,
            AgentId::B => &self.beliefs_b,
        }
    }

    /// What `agent` observes about its partner, given its own sensor bit.
    pub fn percept(&self, agent: AgentId, s_own: bool, n: usize) -> Percept {
        let (own, partner, a_pp) = match agent {
            AgentId::A => (self.pos_a, self.pos_b, self.last_action_b),
            AgentId::B => (self.pos_b, self.pos_a, self.last_action_a),
        };
        Percept {
            s_own,
            delta: (partner + n - own) % n,
            a_pp,
        }
    }
}

/// Own and partner belief distributions of both agents after an epoch's
/// optimisation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefSnapshot {
    pub own_a: ProbDist,
    pub partner_a: ProbDist,
    pub own_b: ProbDist,
    pub partner_b: ProbDist,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Positions at which the agents sensed, before moving.
    pub pos_a: usize,
    pub pos_b: usize,
    pub s_a: bool,
    pub s_b: bool,
    pub pair_a: ActionPair,
    pub pair_b: ActionPair,
    pub f_a: f64,
    pub f_b: f64,
    /// Whether the floor bound in an agent's own-term target.
    pub floor_a: bool,
    pub floor_b: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<BeliefSnapshot>,
}

impl EpochRecord {
    pub fn position(&self, agent: AgentId) -> usize {
        match agent {
            AgentId::A => self.pos_a,
            AgentId::B => self.pos_b,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub run_index: u64,
    pub seed: u64,
    pub layout: TargetLayout,
    pub epochs: Vec<EpochRecord>,
    pub final_state: DyadState,
}

/// Which epochs keep a [`BeliefSnapshot`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotPolicy {
    #[default]
    All,
    None,
    Every(usize),
}

impl SnapshotPolicy {
    pub fn keeps(&self, epoch: usize) -> bool {
        match *self {
            SnapshotPolicy::All => true,
            SnapshotPolicy::None => false,
            SnapshotPolicy::Every(k) => k > 0 && epoch.is_multiple_of(k),
        }
    }
}

impl std::str::FromStr for SnapshotPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SnapshotPolicy::All),
            "none" => Ok(SnapshotPolicy::None),
            other => other
                .strip_prefix("every-")
                .and_then(|k| k.parse::<usize>().ok())
                .filter(|k| *k > 0)
                .map(SnapshotPolicy::Every)
                .ok_or_else(|| {
                    Error::Config(format!(
                        "snapshot policy `{other}` is not one of all, none, every-<k>"
                    ))
                }),
        }
    }
}

impl std::fmt::Display for SnapshotPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SnapshotPolicy::All => f.write_str("all"),
            SnapshotPolicy::None => f.write_str("none"),
            SnapshotPolicy::Every(k) => write!(f, "every-{k}"),
        }
    }
}

/// Raw draws for one epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EpochDraws {
    pub sense_a: u64,
    pub sense_b: u64,
    pub tie_a: u64,
    pub tie_b: u64,
}

impl EpochDraws {
    /// Reads the fixed slots of `epoch` from the run stream.
    pub fn for_epoch(rng: &mut RngStream, epoch: usize) -> Self {
        rng.seek(INIT_DRAWS + EPOCH_DRAWS * epoch as u64);
        EpochDraws {
            sense_a: rng.next_u64(),
            sense_b: rng.next_u64(),
            tie_a: rng.next_u64(),
            tie_b: rng.next_u64(),
        }
    }
}

fn agent_desires(layout: &TargetLayout, agent: AgentId, gamma: f64, n: usize) -> AgentBeliefs {
    let (own_private, partner_private) = match agent {
        AgentId::A => (layout.private_a, layout.private_b),
        AgentId::B => (layout.private_b, layout.private_a),
    };
    let own = compose_desires(
        &DesireSpec::for_targets(layout.shared, own_private, n),
        gamma,
    );
    let partner = compose_desires(
        &DesireSpec::for_targets(layout.shared, partner_private, n),
        gamma,
    );
    AgentBeliefs::uninformed(own, partner)
}

/// Initial state with explicit layout and start cells.
pub fn initial_state(
    world: &WorldConfig,
    layout: TargetLayout,
    start: (usize, usize),
    params_a: &AgentParams,
    params_b: &AgentParams,
) -> DyadState {
    let n = world.n_cells;
    DyadState {
        pos_a: start.0,
        pos_b: start.1,
        beliefs_a: agent_desires(&layout, AgentId::A, params_a.gamma, n),
        beliefs_b: agent_desires(&layout, AgentId::B, params_b.gamma, n),
        last_action_a: Action::Stay,
        last_action_b: Action::Stay,
        layout,
        epoch: 0,
    }
}

/// Randomized layout and start cells, flat beliefs, composed desires.
pub fn init_run(
    world: &WorldConfig,
    base_layout: &TargetLayout,
    params_a: &AgentParams,
    params_b: &AgentParams,
    rng: &mut RngStream,
) -> DyadState {
    rng.seek(0);
    let layout = randomize_layout(base_layout, world, rng);
    let start = random_start_positions(world, rng);
    initial_state(world, layout, start, params_a, params_b)
}

/// One epoch with the draws taken from `rng`.
pub fn step(
    state: &DyadState,
    world: &WorldConfig,
    params_a: &AgentParams,
    params_b: &AgentParams,
    rng: &mut RngStream,
    snapshot: bool,
) -> (DyadState, EpochRecord) {
    let draws = EpochDraws::for_epoch(rng, state.epoch);
    step_with_draws(state, world, params_a, params_b, draws, snapshot)
}

/// One epoch with explicit draws.
pub fn step_with_draws(
    state: &DyadState,
    world: &WorldConfig,
    params_a: &AgentParams,
    params_b: &AgentParams,
    draws: EpochDraws,
    snapshot: bool,
) -> (DyadState, EpochRecord) {
    let n = world.n_cells;
    let s_a = sense_with(
        firing_probability(state.pos_a, params_a.k, world),
        draws.sense_a,
    );
    let s_b = sense_with(
        firing_probability(state.pos_b, params_b.k, world),
        draws.sense_b,
    );
    let percept_a = state.percept(AgentId::A, s_a, n);
    let percept_b = state.percept(AgentId::B, s_b, n);

    let (pair_a, _) =
        select_action_with(&state.beliefs_a, &percept_a, params_a, world, draws.tie_a);
    let (pair_b, _) =
        select_action_with(&state.beliefs_b, &percept_b, params_b, world, draws.tie_b);

    let opt_a = optimize(&state.beliefs_a, &percept_a, &pair_a, params_a, world);
    let opt_b = optimize(&state.beliefs_b, &percept_b, &pair_b, params_b, world);

    let snapshot = snapshot.then(|| BeliefSnapshot {
        own_a: opt_a.beliefs.own.distribution(),
        partner_a: opt_a.beliefs.partner.distribution(),
        own_b: opt_b.beliefs.own.distribution(),
        partner_b: opt_b.beliefs.partner.distribution(),
    });
    let record = EpochRecord {
        epoch: state.epoch,
        pos_a: state.pos_a,
        pos_b: state.pos_b,
        s_a,
        s_b,
        pair_a,
        pair_b,
        f_a: opt_a.free_energy,
        f_b: opt_b.free_energy,
        floor_a: opt_a.own_floored,
        floor_b: opt_b.own_floored,
        snapshot,
    };
    let next = DyadState {
        pos_a: world.wrap(state.pos_a, pair_a.own.step()),
        pos_b: world.wrap(state.pos_b, pair_b.own.step()),
        beliefs_a: opt_a.beliefs,
        beliefs_b: opt_b.beliefs,
        last_action_a: pair_a.own,
        last_action_b: pair_b.own,
        layout: state.layout,
        epoch: state.epoch + 1,
    };
    (next, record)
}

/// Runs a full fixed-horizon simulation.
pub fn run(
    epochs: usize,
    world: &WorldConfig,
    base_layout: &TargetLayout,
    params_a: &AgentParams,
    params_b: &AgentParams,
    rng: &mut RngStream,
    snapshots: SnapshotPolicy,
) -> Result<RunRecord> {
    if epochs == 0 {
        return Err(Error::Config("a run needs at least one epoch".into()));
    }
    let mut state = init_run(world, base_layout, params_a, params_b, rng);
    let layout = state.layout;
    let mut records = Vec::with_capacity(epochs);
    for epoch in 0..epochs {
        let (next, record) = step(
            &state,
            world,
            params_a,
            params_b,
            rng,
            snapshots.keeps(epoch),
        );
        records.push(record);
        state = next;
    }
    Ok(RunRecord {
        run_index: rng.stream(),
        seed: rng.seed(),
        layout,
        epochs: records,
        final_state: state,
    })
}
