//! A single active-inference agent.
//!
//! The agent carries four log-space beliefs: where it is, where it wants to
//! be, where its partner is and where its partner wants to be. Two generative
//! densities explain its observations:
//!
//! * the sensory density, built from the one-bit beacon sensor and the prior
//!   over its own position, pushed through its own action;
//! * the partner density, built from the observed offset to the partner, the
//!   partner's last move (scored against the partner's desires) and the prior
//!   over the partner's position, pushed through the expected partner action.
//!
//! The free energy couples the two. Own beliefs are scored against the
//! sensory density times the re-ranged partner density (weight `alpha`), and
//! partner beliefs against the partner density times the re-ranged sensory
//! density (weight `alpha^2`). Products are floored at `e^-10` of their
//! maximum before the KL divergence.

use serde::{Deserialize, Serialize};

use crate::beliefmath::{
    circular_shift, kl, rerange_slice, softmax, BeliefVector, ProbDist, UnnormalizedDensity,
    BELIEF_MAX, BELIEF_MIN, DENSITY_FLOOR,
};
use crate::environment::{sensor_likelihood, WorldConfig};
use crate::rng::{pick, RngStream};
use crate::{Error, Result};

/// Free energies (in nats) closer than this to the minimum count as ties.
pub const TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "i8", try_from = "i8")]
pub enum Action {
    Left,
    Stay,
    Right,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Left, Action::Stay, Action::Right];

    pub fn step(self) -> i64 {
        match self {
            Action::Left => -1,
            Action::Stay => 0,
            Action::Right => 1,
        }
    }

    pub(crate) fn index(self) -> usize {
        (self.step() + 1) as usize
    }
}

impl From<Action> for i8 {
    fn from(a: Action) -> i8 {
        a.step() as i8
    }
}

impl TryFrom<i8> for Action {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(Action::Left),
            0 => Ok(Action::Stay),
            1 => Ok(Action::Right),
            other => Err(Error::Input(format!("action {other} not in {{-1, 0, 1}}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    /// Physical perceptiveness: peak firing probability of the sensor.
    pub k: f64,
    /// Alterity: weight of the partner model in the agent's own beliefs.
    pub alpha: f64,
    /// Goal alignment: suppression of private desires.
    pub gamma: f64,
    /// Probability that the partner stays put at its most desired cell.
    pub xi: f64,
    /// Gradient step size for belief optimisation.
    pub eta: f64,
    /// Gradient iterations per epoch.
    pub grad_steps: usize,
}

impl Default for AgentParams {
    fn default() -> Self {
        AgentParams {
            k: 0.99,
            alpha: 0.0,
            gamma: 0.0,
            xi: 0.9,
            eta: 0.1,
            grad_steps: 20,
        }
    }
}

impl AgentParams {
    pub fn with_abilities(k: f64, alpha: f64, gamma: f64) -> Self {
        AgentParams {
            k,
            alpha,
            gamma,
            ..AgentParams::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |name: &str, v: f64, ok: bool| {
            if ok && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} = {v} out of range")))
            }
        };
        check("k", self.k, (0.01..=0.99).contains(&self.k))?;
        check("alpha", self.alpha, (0.0..=0.99).contains(&self.alpha))?;
        check("gamma", self.gamma, (0.0..=1.0).contains(&self.gamma))?;
        check("xi", self.xi, self.xi > 0.0 && self.xi <= 1.0)?;
        check("eta", self.eta, self.eta > 0.0)?;
        Ok(())
    }
}

/// Desire ingredients: a shared component and a bump at a private target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesireSpec {
    pub shared_component: BeliefVector,
    pub private_bump: Vec<f64>,
}

impl DesireSpec {
    /// `0` at the shared target and `-10` elsewhere, plus a `+10` bump at the
    /// private target.
    pub fn for_targets(shared: usize, private: usize, n: usize) -> Self {
        let mut shared_component = vec![BELIEF_MIN; n];
        shared_component[shared] = BELIEF_MAX;
        let mut private_bump = vec![0.0; n];
        private_bump[private] = BELIEF_MAX - BELIEF_MIN;
        DesireSpec {
            shared_component: BeliefVector::new(shared_component),
            private_bump,
        }
    }
}

/// `shared + (1 - gamma) * private`, clipped into the belief range.
pub fn compose_desires(spec: &DesireSpec, gamma: f64) -> BeliefVector {
    let values = spec
        .shared_component
        .as_slice()
        .iter()
        .zip(&spec.private_bump)
        .map(|(s, p)| s + (1.0 - gamma) * p)
        .collect();
    BeliefVector::new(values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBeliefs {
    pub own: BeliefVector,
    pub own_desired: BeliefVector,
    pub partner: BeliefVector,
    pub partner_desired: BeliefVector,
}

impl AgentBeliefs {
    /// Flat own and partner beliefs with the given desires.
    pub fn uninformed(own_desired: BeliefVector, partner_desired: BeliefVector) -> Self {
        let n = own_desired.len();
        AgentBeliefs {
            own: BeliefVector::zeros(n),
            own_desired,
            partner: BeliefVector::zeros(n),
            partner_desired,
        }
    }

    pub fn n(&self) -> usize {
        self.own.len()
    }
}

/// What the agent observes at the start of an epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Percept {
    pub s_own: bool,
    /// Partner position minus own position, mod N.
    pub delta: usize,
    /// The partner's last executed action.
    pub a_pp: Action,
}

/// An own action together with the action expected from the partner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ActionPair {
    pub own: Action,
    pub partner: Action,
}

impl ActionPair {
    /// All nine pairs, own action major.
    pub fn all() -> impl Iterator<Item = ActionPair> {
        Action::ALL.into_iter().flat_map(|own| {
            Action::ALL
                .into_iter()
                .map(move |partner| ActionPair { own, partner })
        })
    }
}

/// Sensory density over the post-action position `psi'`:
/// `P(s | psi' - a) q_own(psi' - a)`, clamped to `[e^-10, 1]`.
pub fn sensory_density(
    beliefs: &AgentBeliefs,
    s_own: bool,
    a_own: Action,
    params: &AgentParams,
    world: &WorldConfig,
) -> UnnormalizedDensity {
    let base = sensory_base(&softmax(beliefs.own.as_slice()), s_own, params.k, world);
    UnnormalizedDensity::from_raw(clamp_in_place(circular_shift(&base, -a_own.step())))
}

fn sensory_base(q_own: &[f64], s_own: bool, k: f64, world: &WorldConfig) -> Vec<f64> {
    q_own
        .iter()
        .enumerate()
        .map(|(psi, q)| sensor_likelihood(s_own, psi, k, world) * q)
        .collect()
}

/// Probability that a partner at `phi` takes `a_partner`, given its desires.
///
/// Staying has probability `xi * desired[phi] / max(desired)`; the remaining
/// mass goes to the two neighbours in proportion to their desirability, or is
/// split evenly when both neighbours have zero desirability.
pub fn partner_action_probability(
    phi: usize,
    a_partner: Action,
    desired: &ProbDist,
    xi: f64,
) -> f64 {
    let d = desired.as_slice();
    partner_action_probability_raw(phi, a_partner, d, max_of(d), xi)
}

fn partner_action_probability_raw(phi: usize, a: Action, d: &[f64], d_max: f64, xi: f64) -> f64 {
    let n = d.len();
    let stay = if d_max > 0.0 { xi * d[phi] / d_max } else { xi };
    match a {
        Action::Stay => stay,
        Action::Left | Action::Right => {
            let left = d[(phi + n - 1) % n];
            let right = d[(phi + 1) % n];
            let toward = if a == Action::Left { left } else { right };
            let total = left + right;
            if total > 0.0 {
                (1.0 - stay) * toward / total
            } else {
                (1.0 - stay) / 2.0
            }
        }
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

/// Partner density over the partner's post-action position `phi'`.
///
/// With `phi = phi' - a_partner` the partner's current position, the density
/// is `q_own(phi - delta) * P(a_pp | phi - a_pp) * q_partner(phi)`: the
/// offset ties the partner's position to the agent's own, and the observed
/// last move is scored at the cell the partner made it from.
pub fn partner_density(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    pair: &ActionPair,
    params: &AgentParams,
) -> UnnormalizedDensity {
    let q_own = softmax(beliefs.own.as_slice());
    let q_partner = softmax(beliefs.partner.as_slice());
    let desired = softmax(beliefs.partner_desired.as_slice());
    let base = partner_base(&q_own, &q_partner, &desired, percept, params.xi);
    UnnormalizedDensity::from_raw(clamp_in_place(circular_shift(&base, -pair.partner.step())))
}

fn partner_base(
    q_own: &[f64],
    q_partner: &[f64],
    desired: &[f64],
    percept: &Percept,
    xi: f64,
) -> Vec<f64> {
    let n = q_own.len();
    let d_max = max_of(desired);
    let a_pp = percept.a_pp;
    (0..n)
        .map(|phi| {
            let own_cell = (phi + n - percept.delta % n) % n;
            let prev = (phi as i64 - a_pp.step()).rem_euclid(n as i64) as usize;
            q_own[own_cell]
                * partner_action_probability_raw(prev, a_pp, desired, d_max, xi)
                * q_partner[phi]
        })
        .collect()
}

fn clamp_in_place(mut v: Vec<f64>) -> Vec<f64> {
    for x in &mut v {
        *x = x.clamp(DENSITY_FLOOR, 1.0);
    }
    v
}

/// Floors an entrywise product of generative densities at `e^-10` times its
/// maximum, so the optimal log-belief spans at most the belief range.
/// Reports whether the floor bound.
fn floor_product(mut v: Vec<f64>) -> (Vec<f64>, bool) {
    let floor = DENSITY_FLOOR * max_of(&v);
    let mut bound = false;
    for x in &mut v {
        if *x < floor {
            *x = floor;
            bound = true;
        }
        *x = x.min(1.0);
    }
    (v, bound)
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let total: f64 = v.iter().sum();
    v.iter().map(|x| x / total).collect()
}

/// Fixed right-hand sides of the two KL terms for one action pair.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerativeTargets {
    pub own: UnnormalizedDensity,
    pub partner: UnnormalizedDensity,
    /// Whether the floor raised any entry of the own-term product.
    pub own_floored: bool,
    pub partner_floored: bool,
}

impl GenerativeTargets {
    pub fn floor_active(&self) -> bool {
        self.own_floored || self.partner_floored
    }
}

/// Per-action generative densities, normalized, for one agent and percept.
struct DensityCache {
    own: [Vec<f64>; 3],
    partner: [Vec<f64>; 3],
    delta: i64,
    alpha: f64,
}

impl DensityCache {
    fn new(
        beliefs: &AgentBeliefs,
        percept: &Percept,
        params: &AgentParams,
        world: &WorldConfig,
    ) -> Self {
        let q_own = softmax(beliefs.own.as_slice());
        let q_partner = softmax(beliefs.partner.as_slice());
        let desired = softmax(beliefs.partner_desired.as_slice());
        let own_base = sensory_base(&q_own, percept.s_own, params.k, world);
        let partner_base = partner_base(&q_own, &q_partner, &desired, percept, params.xi);
        let per_action =
            |base: &[f64], a: Action| normalized(&clamp_in_place(circular_shift(base, -a.step())));
        DensityCache {
            own: Action::ALL.map(|a| per_action(&own_base, a)),
            partner: Action::ALL.map(|a| per_action(&partner_base, a)),
            delta: percept.delta as i64,
            alpha: params.alpha,
        }
    }

    fn targets(&self, pair: &ActionPair) -> ((Vec<f64>, bool), (Vec<f64>, bool)) {
        let p_own = &self.own[pair.own.index()];
        let p_partner = &self.partner[pair.partner.index()];
        // predicted partner-minus-own offset after both moves
        let delta_next = self.delta + pair.partner.step() - pair.own.step();
        let partner_at_own = circular_shift(&rerange_slice(p_partner, self.alpha), delta_next);
        let own_at_partner =
            circular_shift(&rerange_slice(p_own, self.alpha * self.alpha), -delta_next);
        let own = floor_product(
            p_own
                .iter()
                .zip(&partner_at_own)
                .map(|(a, b)| a * b)
                .collect(),
        );
        let partner = floor_product(
            p_partner
                .iter()
                .zip(&own_at_partner)
                .map(|(a, b)| a * b)
                .collect(),
        );
        (own, partner)
    }
}

/// Both KL right-hand sides for `pair`, computed from the current beliefs.
pub fn generative_targets(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    pair: &ActionPair,
    params: &AgentParams,
    world: &WorldConfig,
) -> GenerativeTargets {
    let ((own, own_floored), (partner, partner_floored)) =
        DensityCache::new(beliefs, percept, params, world).targets(pair);
    GenerativeTargets {
        own: UnnormalizedDensity::from_raw(own),
        partner: UnnormalizedDensity::from_raw(partner),
        own_floored,
        partner_floored,
    }
}

/// Agent free energy of the candidate distributions `q_own_new` and
/// `q_partner_new` under the generative model of `pair`.
pub fn free_energy(
    q_own_new: &ProbDist,
    q_partner_new: &ProbDist,
    beliefs: &AgentBeliefs,
    percept: &Percept,
    pair: &ActionPair,
    params: &AgentParams,
    world: &WorldConfig,
) -> f64 {
    let t = generative_targets(beliefs, percept, pair, params, world);
    kl(q_own_new.as_slice(), t.own.as_slice()) + kl(q_partner_new.as_slice(), t.partner.as_slice())
}

/// Free energy of the desired distributions for each of the nine action
/// pairs, in [`ActionPair::all`] order.
pub fn action_energies(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    params: &AgentParams,
    world: &WorldConfig,
) -> Vec<(ActionPair, f64)> {
    let cache = DensityCache::new(beliefs, percept, params, world);
    let q_own_star = softmax(beliefs.own_desired.as_slice());
    let q_partner_star = softmax(beliefs.partner_desired.as_slice());
    ActionPair::all()
        .map(|pair| {
            let ((own, _), (partner, _)) = cache.targets(&pair);
            (pair, kl(&q_own_star, &own) + kl(&q_partner_star, &partner))
        })
        .collect()
}

/// Minimizing pairs of `energies`, in input order.
pub fn minimizers(energies: &[(ActionPair, f64)]) -> Vec<ActionPair> {
    let best = energies
        .iter()
        .map(|(_, f)| *f)
        .fold(f64::INFINITY, f64::min);
    energies
        .iter()
        .filter(|(_, f)| *f - best <= TIE_TOLERANCE)
        .map(|(p, _)| *p)
        .collect()
}

/// Picks the action pair whose generative model brings the desired beliefs
/// closest. `tie_bits` is only looked at when several pairs tie; the return
/// flag reports whether it was used.
pub fn select_action_with(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    params: &AgentParams,
    world: &WorldConfig,
    tie_bits: u64,
) -> (ActionPair, bool) {
    let best = minimizers(&action_energies(beliefs, percept, params, world));
    match best.len() {
        1 => (best[0], false),
        n => (best[pick(tie_bits, n)], true),
    }
}

/// As [`select_action_with`], drawing from `rng` only when there is a tie.
pub fn select_action(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    params: &AgentParams,
    world: &WorldConfig,
    rng: &mut RngStream,
) -> ActionPair {
    let best = minimizers(&action_energies(beliefs, percept, params, world));
    if best.len() == 1 {
        best[0]
    } else {
        best[pick(rng.next_u64(), best.len())]
    }
}

/// Gradient of `KL(softmax(b) || target)` with respect to `b`, evaluated at
/// `q_new = softmax(b)`: `q_j (ln(q_j / r_j) - KL)`.
pub fn gradient(q_new: &ProbDist, target: &UnnormalizedDensity) -> Vec<f64> {
    kl_gradient(q_new.as_slice(), target.as_slice())
}

fn kl_gradient(q: &[f64], r: &[f64]) -> Vec<f64> {
    let logs: Vec<f64> = q
        .iter()
        .zip(r)
        .map(|(qi, ri)| if *qi > 0.0 { (qi / ri).ln() } else { 0.0 })
        .collect();
    let total: f64 = q.iter().zip(&logs).map(|(qi, l)| qi * l).sum();
    q.iter()
        .zip(&logs)
        .map(|(qi, l)| qi * (l - total))
        .collect()
}

fn descend(start: &[f64], target: &[f64], eta: f64, steps: usize) -> Vec<f64> {
    let mut b = start.to_vec();
    for _ in 0..steps {
        let q = softmax(&b);
        let g = kl_gradient(&q, target);
        for (bi, gi) in b.iter_mut().zip(&g) {
            *bi -= eta * gi;
        }
    }
    b
}

/// Result of one epoch of belief optimisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Optimized {
    pub beliefs: AgentBeliefs,
    /// Free energy of the optimized beliefs against the epoch's targets.
    pub free_energy: f64,
    /// Whether the floor bound in the own-term target.
    pub own_floored: bool,
    pub partner_floored: bool,
}

/// Gradient descent on own and partner beliefs against targets fixed from
/// the previous beliefs. Desires pass through unchanged.
pub fn optimize_beliefs(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    pair: &ActionPair,
    params: &AgentParams,
    world: &WorldConfig,
) -> AgentBeliefs {
    optimize(beliefs, percept, pair, params, world).beliefs
}

pub fn optimize(
    beliefs: &AgentBeliefs,
    percept: &Percept,
    pair: &ActionPair,
    params: &AgentParams,
    world: &WorldConfig,
) -> Optimized {
    let t = generative_targets(beliefs, percept, pair, params, world);
    if params.grad_steps == 0 {
        let f = kl(&softmax(beliefs.own.as_slice()), t.own.as_slice())
            + kl(&softmax(beliefs.partner.as_slice()), t.partner.as_slice());
        return Optimized {
            beliefs: beliefs.clone(),
            free_energy: f,
            own_floored: t.own_floored,
            partner_floored: t.partner_floored,
        };
    }
    // the previous beliefs, carried through the chosen actions
    let own_start = circular_shift(beliefs.own.as_slice(), -pair.own.step());
    let partner_start = circular_shift(beliefs.partner.as_slice(), -pair.partner.step());
    let own = BeliefVector::from_unconstrained(descend(
        &own_start,
        t.own.as_slice(),
        params.eta,
        params.grad_steps,
    ));
    let partner = BeliefVector::from_unconstrained(descend(
        &partner_start,
        t.partner.as_slice(),
        params.eta,
        params.grad_steps,
    ));
    let f = kl(&softmax(own.as_slice()), t.own.as_slice())
        + kl(&softmax(partner.as_slice()), t.partner.as_slice());
    Optimized {
        beliefs: AgentBeliefs {
            own,
            own_desired: beliefs.own_desired.clone(),
            partner,
            partner_desired: beliefs.partner_desired.clone(),
        },
        free_energy: f,
        own_floored: t.own_floored,
        partner_floored: t.partner_floored,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::sensor_probability;

    fn world6() -> WorldConfig {
        WorldConfig {
            n_cells: 6,
            beacon: 3,
            omega: 0.1,
        }
    }

    fn sharp(n: usize, cell: usize) -> BeliefVector {
        let mut v = vec![BELIEF_MIN; n];
        v[cell] = 0.0;
        BeliefVector::new(v)
    }

    fn flat_agent(n: usize) -> AgentBeliefs {
        AgentBeliefs::uninformed(BeliefVector::zeros(n), BeliefVector::zeros(n))
    }

    #[test]
    fn desire_composition_examples() {
        let spec = DesireSpec::for_targets(30, 15, 60);
        let aligned = compose_desires(&spec, 1.0);
        assert_eq!(aligned, spec.shared_component);
        let both = compose_desires(&spec, 0.0);
        assert_eq!(both.as_slice()[30], 0.0);
        assert_eq!(both.as_slice()[15], 0.0);
        assert!(both
            .as_slice()
            .iter()
            .enumerate()
            .all(|(i, v)| i == 15 || i == 30 || *v == BELIEF_MIN));
        let half = compose_desires(&spec, 0.5);
        assert_eq!(half.as_slice()[15], -5.0);
        assert_eq!(half.as_slice()[30], 0.0);
    }

    #[test]
    fn uninformative_sensor_keeps_prior_shape() {
        let world = WorldConfig {
            omega: 0.0,
            ..WorldConfig::default()
        };
        let params = AgentParams {
            k: 0.5,
            ..AgentParams::default()
        };
        let mut beliefs = flat_agent(60);
        beliefs.own = BeliefVector::new((0..60).map(|i| -(i as f64) / 10.0).collect());
        let q = beliefs.own.distribution();
        for s in [false, true] {
            let d = sensory_density(&beliefs, s, Action::Stay, &params, &world);
            for (x, qi) in d.as_slice().iter().zip(q.as_slice()) {
                assert!((x - 0.5 * qi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn flat_prior_density_follows_sensor_profile() {
        let world = WorldConfig::default();
        let params = AgentParams::default();
        let d = sensory_density(&flat_agent(60), true, Action::Stay, &params, &world);
        for (psi, x) in d.as_slice().iter().enumerate() {
            let expected = sensor_probability(psi, 0.99, &world).unwrap() / 60.0;
            assert!((x - expected.max(DENSITY_FLOOR)).abs() < 1e-15);
        }
        assert_eq!(
            d.as_slice().iter().copied().fold(0.0, f64::max),
            d.as_slice()[30]
        );
    }

    #[test]
    fn moving_right_shifts_the_density_right() {
        let world = WorldConfig::default();
        let params = AgentParams::default();
        let mut beliefs = flat_agent(60);
        beliefs.own = BeliefVector::new((0..60).map(|i| -((i * 7) % 11) as f64 / 3.0).collect());
        let stay = sensory_density(&beliefs, true, Action::Stay, &params, &world);
        let right = sensory_density(&beliefs, true, Action::Right, &params, &world);
        for i in 0..60 {
            assert_eq!(right.as_slice()[(i + 1) % 60], stay.as_slice()[i]);
        }
    }

    #[test]
    fn partner_action_examples() {
        let desired = compose_desires(&DesireSpec::for_targets(10, 40, 60), 1.0).distribution();
        assert!((partner_action_probability(10, Action::Stay, &desired, 0.9) - 0.9).abs() < 1e-15);
        let uniform = ProbDist::uniform(60);
        assert!((partner_action_probability(5, Action::Stay, &uniform, 0.7) - 0.7).abs() < 1e-15);
        assert!((partner_action_probability(5, Action::Left, &uniform, 0.7) - 0.15).abs() < 1e-15);
        assert!((partner_action_probability(5, Action::Right, &uniform, 0.7) - 0.15).abs() < 1e-15);
    }

    #[test]
    fn zero_neighbours_split_evenly() {
        let desired = ProbDist::new(vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        let stay = partner_action_probability(1, Action::Stay, &desired, 0.6);
        let left = partner_action_probability(1, Action::Left, &desired, 0.6);
        let right = partner_action_probability(1, Action::Right, &desired, 0.6);
        assert!((stay - 0.6).abs() < 1e-15);
        assert!((left - 0.2).abs() < 1e-15 && (right - 0.2).abs() < 1e-15);
    }

    #[test]
    fn partner_density_is_flat_when_everything_is() {
        let percept = Percept {
            s_own: true,
            delta: 4,
            a_pp: Action::Left,
        };
        let d = partner_density(
            &flat_agent(60),
            &percept,
            &ActionPair::all().next().unwrap(),
            &AgentParams::default(),
        );
        let first = d.as_slice()[0];
        assert!(d.as_slice().iter().all(|x| (x - first).abs() < 1e-18));
    }

    #[test]
    fn partner_is_placed_at_own_cell_plus_offset() {
        let world = world6();
        let mut beliefs = flat_agent(world.n_cells);
        beliefs.own = sharp(6, 1);
        let percept = Percept {
            s_own: false,
            delta: 2,
            a_pp: Action::Stay,
        };
        let pair = ActionPair {
            own: Action::Stay,
            partner: Action::Stay,
        };
        let d = partner_density(&beliefs, &percept, &pair, &AgentParams::default());
        let argmax = (0..6)
            .max_by(|a, b| d.as_slice()[*a].total_cmp(&d.as_slice()[*b]))
            .unwrap();
        assert_eq!(argmax, 3);
        assert!(d
            .as_slice()
            .iter()
            .all(|x| (DENSITY_FLOOR..=1.0).contains(x)));
    }

    #[test]
    fn uniform_world_free_energy_is_two_log_n() {
        let world = WorldConfig {
            omega: 0.0,
            ..WorldConfig::default()
        };
        let params = AgentParams {
            k: 0.5,
            ..AgentParams::default()
        };
        let percept = Percept {
            s_own: true,
            delta: 11,
            a_pp: Action::Right,
        };
        let q = ProbDist::uniform(60);
        for pair in ActionPair::all() {
            let f = free_energy(&q, &q, &flat_agent(60), &percept, &pair, &params, &world);
            assert!((f - 2.0 * 60f64.ln()).abs() < 1e-12, "{pair:?}: {f}");
        }
    }

    #[test]
    fn staying_at_the_desired_cell_wins() {
        let world = world6();
        let mut beliefs = flat_agent(6);
        beliefs.own = sharp(6, 2);
        beliefs.own_desired = compose_desires(&DesireSpec::for_targets(2, 5, 6), 1.0);
        let percept = Percept {
            s_own: false,
            delta: 3,
            a_pp: Action::Stay,
        };
        let best = minimizers(&action_energies(
            &beliefs,
            &percept,
            &AgentParams::default(),
            &world,
        ));
        assert!(!best.is_empty());
        assert!(best.iter().all(|p| p.own == Action::Stay), "{best:?}");
    }

    #[test]
    fn symmetric_ties_consume_one_draw() {
        let world = WorldConfig {
            omega: 0.0,
            ..WorldConfig::default()
        };
        let mut beliefs = flat_agent(60);
        beliefs.own = BeliefVector::new(
            (0..60)
                .map(|i| -2.0 * (i as f64 - 20.0).abs().sqrt())
                .collect(),
        );
        let mut desired = vec![BELIEF_MIN; 60];
        desired[10] = 0.0;
        desired[30] = 0.0;
        beliefs.own_desired = BeliefVector::new(desired);
        let percept = Percept {
            s_own: true,
            delta: 0,
            a_pp: Action::Stay,
        };
        let params = AgentParams::default();
        let e = action_energies(&beliefs, &percept, &params, &world);
        let f = |own| {
            e.iter()
                .find(|(p, _)| p.own == own && p.partner == Action::Stay)
                .unwrap()
                .1
        };
        assert_eq!(f(Action::Left), f(Action::Right));
        let mut rng = RngStream::new(3);
        let before = rng.position();
        let pair = select_action(&beliefs, &percept, &params, &world, &mut rng);
        assert_eq!(rng.position(), before + 1);
        assert_ne!(pair.own, Action::Stay);
    }

    #[test]
    fn moves_toward_a_desired_neighbour() {
        let world = world6();
        let mut beliefs = flat_agent(6);
        beliefs.own = sharp(6, 2);
        beliefs.own_desired = compose_desires(&DesireSpec::for_targets(3, 3, 6), 1.0);
        beliefs.partner_desired = compose_desires(&DesireSpec::for_targets(0, 0, 6), 1.0);
        beliefs.partner = sharp(6, 5);
        let percept = Percept {
            s_own: true,
            delta: 3,
            a_pp: Action::Stay,
        };
        let best = minimizers(&action_energies(
            &beliefs,
            &percept,
            &AgentParams::default(),
            &world,
        ));
        assert!(best.iter().all(|p| p.own == Action::Right), "{best:?}");
        let (pair, _) = select_action_with(&beliefs, &percept, &AgentParams::default(), &world, 0);
        assert_eq!(pair.own, Action::Right);
    }

    #[test]
    fn zero_steps_leave_beliefs_alone() {
        let world = WorldConfig::default();
        let mut beliefs = flat_agent(60);
        beliefs.own = sharp(60, 7);
        let params = AgentParams {
            grad_steps: 0,
            ..AgentParams::default()
        };
        let percept = Percept {
            s_own: true,
            delta: 5,
            a_pp: Action::Left,
        };
        let pair = ActionPair {
            own: Action::Right,
            partner: Action::Left,
        };
        assert_eq!(
            optimize_beliefs(&beliefs, &percept, &pair, &params, &world),
            beliefs
        );
    }

    #[test]
    fn gradient_vanishes_at_the_normalized_target() {
        let r: Vec<f64> = (0..60)
            .map(|i| 0.01 + ((i * 13) % 7) as f64 / 100.0)
            .collect();
        let q = ProbDist::from_weights(r.clone()).unwrap();
        let g = gradient(&q, &UnnormalizedDensity::from_raw(r));
        assert!(g.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn gradient_sums_to_zero_and_matches_differences() {
        let b: Vec<f64> = (0..60).map(|i| -(((i * 17) % 23) as f64) / 2.5).collect();
        let r: Vec<f64> = (0..60).map(|i| (-(((i * 5) % 9) as f64)).exp()).collect();
        let q = ProbDist::from_normalized_unchecked(softmax(&b));
        let g = gradient(&q, &UnnormalizedDensity::from_raw(r.clone()));
        assert!(g.iter().sum::<f64>().abs() < 1e-15);
        let h = 1e-5;
        for j in 0..60 {
            let (mut up, mut down) = (b.clone(), b.clone());
            up[j] += h;
            down[j] -= h;
            let fd = (kl(&softmax(&up), &r) - kl(&softmax(&down), &r)) / (2.0 * h);
            assert!((fd - g[j]).abs() < 1e-8, "cell {j}: {fd} vs {}", g[j]);
        }
    }

    #[test]
    fn actions_round_trip_through_integers() {
        for a in Action::ALL {
            assert_eq!(Action::try_from(i8::from(a)).unwrap(), a);
        }
        assert!(Action::try_from(2).is_err());
        assert_eq!(ActionPair::all().count(), 9);
    }
}
