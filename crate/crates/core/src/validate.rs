//! Built-in property and oracle suites, run by `dyad validate`.
//!
//! Each check draws its random instances from a fixed seed and reports one
//! line: pass or fail, plus the worst deviation it saw.

use crate::agent::{
    action_energies, compose_desires, free_energy, gradient, minimizers, optimize,
    partner_action_probability, sensory_density, Action, ActionPair, AgentBeliefs, AgentParams,
    DesireSpec, Percept, TIE_TOLERANCE,
};
use crate::beliefmath::{
    circular_shift, from_distribution, kl, kl_divergence, rerange, softmax, BeliefVector, ProbDist,
    UnnormalizedDensity, BELIEF_MIN,
};
use crate::dyad::{self, AgentId, EpochDraws, SnapshotPolicy};
use crate::environment::{firing_probability, sense_with, TargetLayout, WorldConfig};
use crate::experiments::{run_model, ModelSpec, Protocol};
use crate::rng::{pick, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {}: {}", self.name, self.detail)
    }
}

fn check(name: &'static str, worst: f64, tol: f64, cases: usize) -> Check {
    Check {
        name,
        passed: worst <= tol,
        detail: format!("{cases} cases, worst {worst:.3e} (tolerance {tol:.0e})"),
    }
}

fn random_belief(rng: &mut RngStream, n: usize) -> BeliefVector {
    BeliefVector::new((0..n).map(|_| BELIEF_MIN * rng.next_f64()).collect())
}

fn random_dist(rng: &mut RngStream, n: usize) -> ProbDist {
    ProbDist::from_weights((0..n).map(|_| rng.next_f64() + 1e-6).collect())
        .expect("positive weights")
}

fn random_percept(rng: &mut RngStream, n: usize) -> Percept {
    Percept {
        s_own: rng.next_below(2) == 1,
        delta: rng.next_below(n as u64) as usize,
        a_pp: Action::ALL[rng.next_below(3) as usize],
    }
}

fn random_beliefs(rng: &mut RngStream, n: usize) -> AgentBeliefs {
    let spec = DesireSpec::for_targets(
        rng.next_below(n as u64) as usize,
        rng.next_below(n as u64) as usize,
        n,
    );
    let desire = compose_desires(&spec, rng.next_f64());
    AgentBeliefs {
        own: random_belief(rng, n),
        own_desired: desire.clone(),
        partner: random_belief(rng, n),
        partner_desired: desire,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn softmax_laws(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(80) as usize;
        let b = random_belief(&mut rng, n);
        let q = softmax(b.as_slice());
        worst = worst.max((q.iter().sum::<f64>() - 1.0).abs());
        let c = 20.0 * rng.next_f64() - 10.0;
        let shifted: Vec<f64> = b.as_slice().iter().map(|v| v + c).collect();
        worst = worst.max(max_abs_diff(&q, &softmax(&shifted)));
        let back =
            from_distribution(&ProbDist::from_normalized_unchecked(q.clone())).expect("positive");
        worst = worst.max(max_abs_diff(&softmax(back.as_slice()), &q));
    }
    check(
        "softmax normalization and shift invariance",
        worst,
        1e-9,
        1000,
    )
}

pub fn rerange_laws(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(80) as usize;
        let q = random_dist(&mut rng, n);
        let a = rng.next_f64();
        let once = rerange(&q, 1.0).expect("valid weight");
        worst = worst.max(max_abs_diff(once.as_slice(), q.as_slice()));
        let flat = rerange(&q, 0.0).expect("valid weight");
        worst = worst.max(max_abs_diff(
            flat.as_slice(),
            ProbDist::uniform(n).as_slice(),
        ));
        let twice = rerange(&rerange(&q, a).expect("valid"), a).expect("valid");
        let squared = rerange(&q, a * a).expect("valid");
        worst = worst.max(max_abs_diff(twice.as_slice(), squared.as_slice()));
    }
    check("re-ranging endpoints and composition", worst, 1e-12, 1000)
}

pub fn kl_laws(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 2 + rng.next_below(80) as usize;
        let q = random_dist(&mut rng, n);
        let r = random_dist(&mut rng, n);
        let d =
            kl_divergence(&q, &UnnormalizedDensity::from_raw(r.into_inner())).expect("positive");
        worst = worst.max((-d).max(0.0));
        let same = kl_divergence(&q, &UnnormalizedDensity::from_raw(q.as_slice().to_vec()))
            .expect("positive");
        worst = worst.max(same.abs());
    }
    check("KL non-negativity and identity", worst, 1e-12, 1000)
}

pub fn shift_laws(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut failures = 0usize;
    for _ in 0..1000 {
        let n = 1 + rng.next_below(80) as usize;
        let v: Vec<u64> = (0..n).map(|_| rng.next_u64()).collect();
        let x = rng.next_below(400) as i64 - 200;
        let y = rng.next_below(400) as i64 - 200;
        let composed = circular_shift(&circular_shift(&v, x), y);
        if composed != circular_shift(&v, x + y)
            || circular_shift(&circular_shift(&v, x), -x) != v
            || circular_shift(&v, n as i64) != v
        {
            failures += 1;
        }
    }
    check("circular shift group laws", failures as f64, 0.0, 1000)
}

pub fn partner_action_normalization(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 3 + rng.next_below(80) as usize;
        let desired = random_dist(&mut rng, n);
        let phi = rng.next_below(n as u64) as usize;
        let xi = 1.0 - rng.next_f64();
        let total: f64 = Action::ALL
            .iter()
            .map(|a| partner_action_probability(phi, *a, &desired, xi))
            .sum();
        worst = worst.max((total - 1.0).abs());
    }
    check(
        "partner action probabilities sum to one",
        worst,
        1e-12,
        1000,
    )
}

pub fn uniform_free_energy() -> Check {
    let world = WorldConfig {
        omega: 0.0,
        ..WorldConfig::default()
    };
    let params = AgentParams {
        k: 0.5,
        ..AgentParams::default()
    };
    let flat = BeliefVector::zeros(60);
    let beliefs = AgentBeliefs::uninformed(flat.clone(), flat);
    let percept = Percept {
        s_own: true,
        delta: 7,
        a_pp: Action::Stay,
    };
    let q = ProbDist::uniform(60);
    let pair = ActionPair {
        own: Action::Stay,
        partner: Action::Stay,
    };
    let f = free_energy(&q, &q, &beliefs, &percept, &pair, &params, &world);
    check(
        "free energy of the uniform case is 2 ln 60",
        (f - 2.0 * 60f64.ln()).abs(),
        1e-12,
        1,
    )
}

/// Central finite differences of each KL term against the analytic gradient.
pub fn gradient_oracle(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let n = 60;
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let b = random_belief(&mut rng, n).into_inner();
        let target: Vec<f64> = (0..n)
            .map(|_| (BELIEF_MIN * rng.next_f64()).exp())
            .collect();
        let q = ProbDist::from_normalized_unchecked(softmax(&b));
        let g = gradient(&q, &UnnormalizedDensity::from_raw(target.clone()));
        let scale = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for j in 0..n {
            let mut up = b.clone();
            let mut down = b.clone();
            up[j] += h;
            down[j] -= h;
            let fd = (kl(&softmax(&up), &target) - kl(&softmax(&down), &target)) / (2.0 * h);
            worst = worst.max((fd - g[j]).abs() / scale.max(1e-12));
        }
    }
    check("analytic gradient vs central differences", worst, 1e-5, 100)
}

/// Long descent lands on the normalized target when the floor is idle.
pub fn optimizer_oracle(seed: u64) -> Check {
    let mut rng = RngStream::new(seed);
    let world = WorldConfig::default();
    let params = AgentParams {
        eta: 0.5,
        grad_steps: 500,
        ..AgentParams::default()
    };
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    while cases < 50 {
        let beliefs = AgentBeliefs {
            own: BeliefVector::new((0..60).map(|_| -2.0 * rng.next_f64()).collect()),
            partner: BeliefVector::new((0..60).map(|_| -2.0 * rng.next_f64()).collect()),
            ..random_beliefs(&mut rng, 60)
        };
        let percept = random_percept(&mut rng, 60);
        let pair = ActionPair {
            own: Action::ALL[rng.next_below(3) as usize],
            partner: Action::ALL[rng.next_below(3) as usize],
        };
        let t = crate::agent::generative_targets(&beliefs, &percept, &pair, &params, &world);
        if t.own_floored {
            continue;
        }
        cases += 1;
        let out = optimize(&beliefs, &percept, &pair, &params, &world);
        let total: f64 = t.own.as_slice().iter().sum();
        let target: Vec<f64> = t.own.as_slice().iter().map(|v| v / total).collect();
        let q = out.beliefs.own.distribution();
        let l1: f64 = q
            .as_slice()
            .iter()
            .zip(&target)
            .map(|(a, b)| (a - b).abs())
            .sum();
        worst = worst.max(l1);
    }
    check(
        "optimized own belief vs normalized target (L1)",
        worst,
        1e-3,
        50,
    )
}

/// Epochs of a partner-free agent replay compared with the dyad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReductionTally {
    pub epochs: usize,
    pub mismatches: usize,
    /// Mismatches on epochs where the own-term floor did not bind.
    pub unexplained: usize,
    pub floor_epochs: usize,
}

/// Minimal single-agent model: sense, pick the own action against the
/// desire, descend on the own belief against the sensory density alone.
struct SoloAgent<'a> {
    pos: usize,
    own: Vec<f64>,
    desired: Vec<f64>,
    params: &'a AgentParams,
}

impl SoloAgent<'_> {
    fn step(&mut self, world: &WorldConfig, sense_bits: u64, tie_bits: u64) -> Action {
        let s = sense_with(
            firing_probability(self.pos, self.params.k, world),
            sense_bits,
        );
        let beliefs = AgentBeliefs {
            own: BeliefVector::new(self.own.clone()),
            own_desired: BeliefVector::new(self.desired.clone()),
            partner: BeliefVector::zeros(self.own.len()),
            partner_desired: BeliefVector::zeros(self.own.len()),
        };
        let n = self.own.len() as f64;
        let q_star = softmax(&self.desired);
        let targets: Vec<Vec<f64>> = Action::ALL
            .iter()
            .map(|a| {
                let p = sensory_density(&beliefs, s, *a, self.params, world).into_inner();
                let total: f64 = p.iter().sum();
                p.iter().map(|v| v / total / n).collect()
            })
            .collect();
        let energies: Vec<(Action, f64)> = Action::ALL
            .iter()
            .zip(&targets)
            .map(|(a, t)| (*a, kl(&q_star, t)))
            .collect();
        let best = energies.iter().map(|e| e.1).fold(f64::INFINITY, f64::min);
        let ties: Vec<Action> = energies
            .iter()
            .filter(|e| e.1 - best <= TIE_TOLERANCE)
            .map(|e| e.0)
            .collect();
        let action = if ties.len() == 1 {
            ties[0]
        } else {
            ties[pick(tie_bits, ties.len())]
        };
        let target = UnnormalizedDensity::from_raw(targets[action.index()].clone());
        let mut b = circular_shift(&self.own, -action.step());
        for _ in 0..self.params.grad_steps {
            let q = ProbDist::from_normalized_unchecked(softmax(&b));
            for (bi, gi) in b.iter_mut().zip(gradient(&q, &target)) {
                *bi -= self.params.eta * gi;
            }
        }
        self.own = BeliefVector::from_unconstrained(b).into_inner();
        self.pos = world.wrap(self.pos, action.step());
        action
    }
}

/// Replays `runs` Model 1 dyads (no Theory of Mind) next to partner-free
/// agents fed the same draws. After a mismatch the solo agent is re-synced to
/// the dyad.
pub fn single_agent_reduction(runs: usize, epochs: usize, seed: u64) -> ReductionTally {
    let world = WorldConfig::default();
    let spec = ModelSpec::preset(1).expect("preset");
    let mut tally = ReductionTally::default();
    for run in 0..runs as u64 {
        let mut rng = RngStream::for_run(seed, run);
        let record = dyad::run(
            epochs,
            &world,
            &TargetLayout::default(),
            &spec.params_a,
            &spec.params_b,
            &mut rng,
            SnapshotPolicy::None,
        )
        .expect("valid run");
        let start = dyad::init_run(
            &world,
            &TargetLayout::default(),
            &spec.params_a,
            &spec.params_b,
            &mut rng,
        );
        for agent in [AgentId::A, AgentId::B] {
            let beliefs = start.beliefs(agent);
            let mut solo = SoloAgent {
                pos: start.position(agent),
                own: beliefs.own.as_slice().to_vec(),
                desired: beliefs.own_desired.as_slice().to_vec(),
                params: spec.params(agent),
            };
            let mut state = start.clone();
            for e in &record.epochs {
                let draws = EpochDraws::for_epoch(&mut rng, e.epoch);
                let (sense_bits, tie_bits, pair, floor) = match agent {
                    AgentId::A => (draws.sense_a, draws.tie_a, e.pair_a, e.floor_a),
                    AgentId::B => (draws.sense_b, draws.tie_b, e.pair_b, e.floor_b),
                };
                let action = solo.step(&world, sense_bits, tie_bits);
                let (next, _) = dyad::step_with_draws(
                    &state,
                    &world,
                    &spec.params_a,
                    &spec.params_b,
                    draws,
                    false,
                );
                let dyad_own = next.beliefs(agent).own.as_slice();
                tally.epochs += 1;
                tally.floor_epochs += usize::from(floor);
                if action != pair.own || max_abs_diff(&solo.own, dyad_own) > 1e-9 {
                    tally.mismatches += 1;
                    tally.unexplained += usize::from(!floor);
                    solo.own = dyad_own.to_vec();
                    solo.pos = next.position(agent);
                }
                state = next;
            }
        }
    }
    tally
}

pub fn reduction_check(seed: u64) -> Check {
    let t = single_agent_reduction(4, 200, seed);
    let share = t.mismatches as f64 / t.epochs as f64;
    Check {
        name: "single-agent reduction at alpha = 0",
        passed: t.unexplained == 0 && share < 0.05,
        detail: format!(
            "{} agent-epochs, {} mismatches ({} without floor activation), floor bound on {}",
            t.epochs, t.mismatches, t.unexplained, t.floor_epochs
        ),
    }
}

/// The uniform-desire symmetry: with mirrored beliefs, left and right tie.
pub fn action_symmetry() -> Check {
    let n = 60;
    let mut own = vec![-6.0; n];
    own[20] = 0.0;
    let mut desired = vec![BELIEF_MIN; n];
    desired[10] = 0.0;
    desired[30] = 0.0;
    let beliefs = AgentBeliefs {
        own: BeliefVector::new(own),
        own_desired: BeliefVector::new(desired),
        partner: BeliefVector::zeros(n),
        partner_desired: BeliefVector::zeros(n),
    };
    let world = WorldConfig {
        omega: 0.0,
        ..WorldConfig::default()
    };
    let percept = Percept {
        s_own: false,
        delta: 0,
        a_pp: Action::Stay,
    };
    let e = action_energies(&beliefs, &percept, &AgentParams::default(), &world);
    let left = e
        .iter()
        .find(|(p, _)| p.own == Action::Left && p.partner == Action::Stay)
        .expect("pair")
        .1;
    let right = e
        .iter()
        .find(|(p, _)| p.own == Action::Right && p.partner == Action::Stay)
        .expect("pair")
        .1;
    let best = minimizers(&e);
    let tied =
        best.iter().any(|p| p.own == Action::Left) && best.iter().any(|p| p.own == Action::Right);
    Check {
        name: "mirror-symmetric beliefs tie left and right",
        passed: (left - right).abs() <= 1e-12 && tied,
        detail: format!("|F(left) - F(right)| = {:.3e}", (left - right).abs()),
    }
}

pub fn determinism(seed: u64) -> Check {
    let mut spec = ModelSpec::preset(4).expect("preset");
    spec.runs = 6;
    spec.epochs = 40;
    let protocol = Protocol {
        master_seed: seed,
        ..Protocol::default()
    };
    let a = run_model(&spec, &protocol).expect("valid model");
    let b = run_model(&spec, &protocol).expect("valid model");
    Check {
        name: "repeated model runs are identical",
        passed: a == b,
        detail: format!("{} runs x {} epochs", spec.runs, spec.epochs),
    }
}

/// Every built-in check, in a fixed order.
pub fn run_all(seed: u64) -> Vec<Check> {
    vec![
        softmax_laws(seed),
        rerange_laws(seed.wrapping_add(1)),
        kl_laws(seed.wrapping_add(2)),
        shift_laws(seed.wrapping_add(3)),
        partner_action_normalization(seed.wrapping_add(4)),
        uniform_free_energy(),
        action_symmetry(),
        gradient_oracle(seed.wrapping_add(5)),
        optimizer_oracle(seed.wrapping_add(6)),
        reduction_check(seed),
        determinism(seed),
    ]
}
