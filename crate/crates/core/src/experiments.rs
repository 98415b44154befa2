//! The four-model protocol: Theory of Mind crossed with Goal Alignment.
//!
//! Agent A is the strong sensor (`k = .99`) and agent B the weak one
//! (`k = .05`). Theory of Mind gives B an alterity of `.20`; Goal Alignment
//! sets `gamma = 1` for both. Every model runs the same seeds, so run `i`
//! starts from the same layout and start cells in all four.

use serde::{Deserialize, Serialize};

use crate::agent::AgentParams;
use crate::beliefmath::{circular_shift, ProbDist, BELIEF_MIN};
use crate::dyad::{self, AgentId, RunRecord, SnapshotPolicy};
use crate::ensemble::{
    empirical_distribution, series_over_epochs, system_free_energy, SystemConfig,
};
use crate::environment::{TargetLayout, WorldConfig};
use crate::rng::RngStream;
use crate::stats::{bootstrap, median, Interval};
use crate::{Error, Result};

pub const STRONG_K: f64 = 0.99;
pub const WEAK_K: f64 = 0.05;
pub const TOM_ALPHA: f64 = 0.20;
pub const DEFAULT_RUNS: usize = 180;
pub const DEFAULT_EPOCHS: usize = 200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: String,
    pub params_a: AgentParams,
    pub params_b: AgentParams,
    pub runs: usize,
    pub epochs: usize,
}

impl ModelSpec {
    /// Models 1 to 4 at the default protocol size.
    pub fn preset(model: u8) -> Result<ModelSpec> {
        let (tom, aligned, name) = match model {
            1 => (false, false, "model_1"),
            2 => (true, false, "model_2"),
            3 => (false, true, "model_3"),
            4 => (true, true, "model_4"),
            other => {
                return Err(Error::Config(format!(
                    "unknown model {other}; expected 1-4"
                )))
            }
        };
        let gamma = if aligned { 1.0 } else { 0.0 };
        let base = AgentParams::default();
        let alpha_b = if tom { TOM_ALPHA } else { 0.0 };
        Ok(ModelSpec {
            name: name.to_string(),
            params_a: AgentParams {
                k: STRONG_K,
                alpha: 0.0,
                gamma,
                ..base
            },
            params_b: AgentParams {
                k: WEAK_K,
                alpha: alpha_b,
                gamma,
                ..base
            },
            runs: DEFAULT_RUNS,
            epochs: DEFAULT_EPOCHS,
        })
    }

    pub fn params(&self, agent: AgentId) -> &AgentParams {
        match agent {
            AgentId::A => &self.params_a,
            AgentId::B => &self.params_b,
        }
    }
}

/// Thresholds of the per-run metrics.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MetricsConfig {
    /// Circular distance that counts as having reached a target.
    pub reach_radius: usize,
    /// Final distances beyond this classify a run as pursuing neither target.
    /// `None` means `N / 8`.
    pub pursuit_radius: Option<usize>,
    /// Cell onto which each run's shared target is rotated when averaging
    /// end-state beliefs. `None` uses the base layout's shared target.
    pub canonical_cell: Option<usize>,
}

impl MetricsConfig {
    pub fn pursuit_radius(&self, n: usize) -> usize {
        self.pursuit_radius.unwrap_or(n / 8)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pursuit {
    Shared,
    Private,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PursuitCounts {
    pub shared: usize,
    pub private: usize,
    pub neither: usize,
}

impl PursuitCounts {
    pub fn total(&self) -> usize {
        self.shared + self.private + self.neither
    }

    pub fn shared_fraction(&self) -> f64 {
        self.shared as f64 / self.total() as f64
    }

    fn add(&mut self, p: Pursuit) {
        match p {
            Pursuit::Shared => self.shared += 1,
            Pursuit::Private => self.private += 1,
            Pursuit::Neither => self.neither += 1,
        }
    }
}

/// Targets an agent actually desires: the shared one always, its private one
/// only while goal alignment leaves it above the belief floor.
pub fn active_targets(record: &RunRecord, agent: AgentId) -> Vec<(usize, Pursuit)> {
    let layout = &record.layout;
    let private = match agent {
        AgentId::A => layout.private_a,
        AgentId::B => layout.private_b,
    };
    let desired = &record.final_state.beliefs(agent).own_desired;
    let mut targets = vec![(layout.shared, Pursuit::Shared)];
    if private != layout.shared && desired.as_slice()[private] > BELIEF_MIN {
        targets.push((private, Pursuit::Private));
    }
    targets
}

fn nearest_target(record: &RunRecord, agent: AgentId, pos: usize, n: usize) -> (usize, Pursuit) {
    active_targets(record, agent)
        .into_iter()
        .map(|(cell, kind)| (crate::beliefmath::circular_distance(pos, cell, n), kind))
        // shared comes first, so it wins ties
        .min_by_key(|(d, _)| *d)
        .expect("shared target is always active")
}

/// First epoch at which `agent` stands within `radius` of an active target.
pub fn time_to_target(
    record: &RunRecord,
    agent: AgentId,
    radius: usize,
    n: usize,
) -> Option<usize> {
    record
        .epochs
        .iter()
        .find(|e| nearest_target(record, agent, e.position(agent), n).0 <= radius)
        .map(|e| e.epoch)
}

/// Which target the final position points at.
pub fn classify_pursuit(record: &RunRecord, agent: AgentId, radius: usize, n: usize) -> Pursuit {
    let pos = record
        .epochs
        .last()
        .map(|e| e.position(agent))
        .unwrap_or_else(|| record.final_state.position(agent));
    let (d, kind) = nearest_target(record, agent, pos, n);
    if d > radius {
        Pursuit::Neither
    } else {
        kind
    }
}

/// Distance from the final position to the nearest active target.
pub fn final_distance(record: &RunRecord, agent: AgentId, n: usize) -> usize {
    let pos = record
        .epochs
        .last()
        .map(|e| e.position(agent))
        .unwrap_or_else(|| record.final_state.position(agent));
    nearest_target(record, agent, pos, n).0
}

/// Average final own-position belief, each run rotated so that its shared
/// target lands on `canonical`.
pub fn end_state_beliefs(
    records: &[RunRecord],
    agent: AgentId,
    canonical: usize,
) -> Result<ProbDist> {
    let first = records
        .first()
        .ok_or_else(|| Error::Input("no runs to average".into()))?;
    let n = first.final_state.beliefs(agent).n();
    let mut acc = vec![0.0; n];
    for r in records {
        let q = r.final_state.beliefs(agent).own.distribution();
        if q.len() != n {
            return Err(Error::Input("runs disagree on world size".into()));
        }
        let rotated = circular_shift(q.as_slice(), r.layout.shared as i64 - canonical as i64);
        for (a, v) in acc.iter_mut().zip(rotated) {
            *a += v;
        }
    }
    ProbDist::from_weights(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentMetrics {
    /// Per run; `None` when no active target was reached.
    pub time_to_target: Vec<Option<usize>>,
    pub final_distance: Vec<usize>,
    pub pursuit: Vec<Pursuit>,
    pub pursuit_counts: PursuitCounts,
    pub end_state_belief: ProbDist,
}

impl AgentMetrics {
    /// Times with "never" mapped to the horizon, so medians stay defined.
    pub fn censored_times(&self, horizon: usize) -> Vec<f64> {
        self.time_to_target
            .iter()
            .map(|t| t.unwrap_or(horizon) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub model: String,
    pub runs: usize,
    pub epochs: usize,
    pub agent_a: AgentMetrics,
    pub agent_b: AgentMetrics,
    pub system_free_energy: Vec<f64>,
    /// Per-run `(a, b)` offsets from the reference cell, first and last epoch.
    pub initial_offsets: Vec<(usize, usize)>,
    pub final_offsets: Vec<(usize, usize)>,
    pub final_histogram: ProbDist,
}

impl MetricsSummary {
    pub fn agent(&self, agent: AgentId) -> &AgentMetrics {
        match agent {
            AgentId::A => &self.agent_a,
            AgentId::B => &self.agent_b,
        }
    }
}

/// Settings shared by every model of an experiment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Protocol {
    pub world: WorldConfig,
    pub base_layout: TargetLayout,
    pub master_seed: u64,
    pub system: SystemConfig,
    pub metrics: MetricsConfig,
    pub snapshots: SnapshotPolicy,
}

impl Default for Protocol {
    fn default() -> Self {
        Protocol {
            world: WorldConfig::default(),
            base_layout: TargetLayout::default(),
            master_seed: 0,
            system: SystemConfig::default(),
            metrics: MetricsConfig::default(),
            snapshots: SnapshotPolicy::All,
        }
    }
}

fn simulate_runs(spec: &ModelSpec, protocol: &Protocol) -> Result<Vec<RunRecord>> {
    let one = |i: usize| {
        let mut rng = RngStream::for_run(protocol.master_seed, i as u64);
        dyad::run(
            spec.epochs,
            &protocol.world,
            &protocol.base_layout,
            &spec.params_a,
            &spec.params_b,
            &mut rng,
            protocol.snapshots,
        )
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..spec.runs).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..spec.runs).map(one).collect()
    }
}

/// Executes `spec.runs` independent dyads and summarizes them.
pub fn run_model(
    spec: &ModelSpec,
    protocol: &Protocol,
) -> Result<(Vec<RunRecord>, MetricsSummary)> {
    if spec.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    protocol.world.validate()?;
    protocol.base_layout.validate(&protocol.world)?;
    protocol.system.validate()?;
    spec.params_a.validate()?;
    spec.params_b.validate()?;
    let records = simulate_runs(spec, protocol)?;
    let summary = summarize(spec, protocol, &records)?;
    Ok((records, summary))
}

pub fn summarize(
    spec: &ModelSpec,
    protocol: &Protocol,
    records: &[RunRecord],
) -> Result<MetricsSummary> {
    let world = &protocol.world;
    let n = world.n_cells;
    let canonical = protocol
        .metrics
        .canonical_cell
        .unwrap_or(protocol.base_layout.shared);
    let radius = protocol.metrics.pursuit_radius(n);
    let agent_metrics = |agent: AgentId| -> Result<AgentMetrics> {
        let pursuit: Vec<Pursuit> = records
            .iter()
            .map(|r| classify_pursuit(r, agent, radius, n))
            .collect();
        let mut pursuit_counts = PursuitCounts::default();
        pursuit.iter().for_each(|p| pursuit_counts.add(*p));
        Ok(AgentMetrics {
            time_to_target: records
                .iter()
                .map(|r| time_to_target(r, agent, protocol.metrics.reach_radius, n))
                .collect(),
            final_distance: records
                .iter()
                .map(|r| final_distance(r, agent, n))
                .collect(),
            pursuit,
            pursuit_counts,
            end_state_belief: end_state_beliefs(records, agent, canonical)?,
        })
    };
    let series = series_over_epochs(records, &protocol.system, world)?;
    let offsets = |t: usize| -> Vec<(usize, usize)> {
        records
            .iter()
            .map(|r| {
                let reference = protocol.system.reference_cell(r, world);
                let e = &r.epochs[t];
                ((e.pos_a + n - reference) % n, (e.pos_b + n - reference) % n)
            })
            .collect()
    };
    let last = spec.epochs - 1;
    Ok(MetricsSummary {
        model: spec.name.clone(),
        runs: records.len(),
        epochs: spec.epochs,
        agent_a: agent_metrics(AgentId::A)?,
        agent_b: agent_metrics(AgentId::B)?,
        final_histogram: series.empirical[last].clone(),
        system_free_energy: series.free_energy,
        initial_offsets: offsets(0),
        final_offsets: offsets(last),
    })
}

/// System free energy of the offsets of the selected runs.
pub fn offsets_free_energy(
    offsets: &[(usize, usize)],
    runs: &[usize],
    system: &SystemConfig,
    n: usize,
) -> Result<f64> {
    let positions: Vec<usize> = runs
        .iter()
        .flat_map(|&i| [offsets[i].0, offsets[i].1])
        .collect();
    let references = vec![0; runs.len()];
    let world = WorldConfig {
        n_cells: n,
        beacon: 0,
        omega: 0.0,
    };
    system_free_energy(
        &empirical_distribution(&positions, &references, &world)?,
        system,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelReport {
    pub model: String,
    pub median_time_to_target_a: Interval,
    pub median_time_to_target_b: Interval,
    pub shared_fraction_a: f64,
    pub shared_fraction_b: f64,
    pub pursuit_a: PursuitCounts,
    pub pursuit_b: PursuitCounts,
    pub mean_final_distance_a: f64,
    pub mean_final_distance_b: f64,
    pub initial_system_free_energy: f64,
    pub final_system_free_energy: Interval,
}

/// `lhs - rhs < 0`, judged by whether the whole interval of the paired
/// difference lies below zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingClaim {
    pub claim: String,
    pub lhs: String,
    pub rhs: String,
    pub difference: Interval,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub resamples: usize,
    pub confidence: f64,
    pub models: Vec<ModelReport>,
    pub claims: Vec<OrderingClaim>,
    /// Final-epoch system free energy is below the first epoch's, per model.
    pub descent: Vec<(String, bool)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub resamples: usize,
    pub confidence: f64,
    pub seed: u64,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig {
            resamples: 10_000,
            confidence: 0.95,
            seed: 0,
        }
    }
}

/// Bootstrap stream ids, kept far away from run indices.
const BOOTSTRAP_STREAM: u64 = 1 << 48;

fn weak_median(summary: &MetricsSummary, idx: &[usize]) -> f64 {
    let times = summary.agent_b.censored_times(summary.epochs);
    median(&idx.iter().map(|&i| times[i]).collect::<Vec<_>>())
}

/// Compares four model summaries produced with the same seeds and protocol.
///
/// Expects the summaries in model order 1-4.
pub fn compare_models(
    summaries: &[MetricsSummary],
    system: &SystemConfig,
    n: usize,
    boot: &BootstrapConfig,
) -> Result<ComparisonReport> {
    if summaries.len() != 4 {
        return Err(Error::Input(format!(
            "expected 4 model summaries, got {}",
            summaries.len()
        )));
    }
    let runs = summaries[0].runs;
    if summaries.iter().any(|s| s.runs != runs) {
        return Err(Error::Input("models differ in run count".into()));
    }
    let mut stream = 0u64;
    let mut next_rng = || {
        stream += 1;
        RngStream::for_run(boot.seed, BOOTSTRAP_STREAM + stream)
    };
    let final_fe = |s: &MetricsSummary, idx: &[usize]| {
        offsets_free_energy(&s.final_offsets, idx, system, n).expect("offsets are in range")
    };

    let mut models = Vec::with_capacity(4);
    for s in summaries {
        let times_a = s.agent_a.censored_times(s.epochs);
        let times_b = s.agent_b.censored_times(s.epochs);
        let pick =
            |t: &[f64], idx: &[usize]| median(&idx.iter().map(|&i| t[i]).collect::<Vec<_>>());
        let mean_dist = |m: &AgentMetrics| {
            m.final_distance.iter().sum::<usize>() as f64 / m.final_distance.len() as f64
        };
        models.push(ModelReport {
            model: s.model.clone(),
            median_time_to_target_a: bootstrap(
                runs,
                boot.resamples,
                boot.confidence,
                &mut next_rng(),
                |idx| pick(&times_a, idx),
            ),
            median_time_to_target_b: bootstrap(
                runs,
                boot.resamples,
                boot.confidence,
                &mut next_rng(),
                |idx| pick(&times_b, idx),
            ),
            shared_fraction_a: s.agent_a.pursuit_counts.shared_fraction(),
            shared_fraction_b: s.agent_b.pursuit_counts.shared_fraction(),
            pursuit_a: s.agent_a.pursuit_counts,
            pursuit_b: s.agent_b.pursuit_counts,
            mean_final_distance_a: mean_dist(&s.agent_a),
            mean_final_distance_b: mean_dist(&s.agent_b),
            initial_system_free_energy: s.system_free_energy[0],
            final_system_free_energy: bootstrap(
                runs,
                boot.resamples,
                boot.confidence,
                &mut next_rng(),
                |idx| final_fe(s, idx),
            ),
        });
    }

    let mut claims = Vec::new();
    {
        let (m1, m2) = (&summaries[0], &summaries[1]);
        let difference = bootstrap(
            runs,
            boot.resamples,
            boot.confidence,
            &mut next_rng(),
            |idx| weak_median(m2, idx) - weak_median(m1, idx),
        );
        claims.push(OrderingClaim {
            claim: "weak agent median time to target".into(),
            lhs: m2.model.clone(),
            rhs: m1.model.clone(),
            holds: difference.high < 0.0,
            difference,
        });
    }
    for (lhs, rhs) in [(2, 0), (2, 1), (3, 2), (3, 0), (3, 1)] {
        let (l, r) = (&summaries[lhs], &summaries[rhs]);
        let difference = bootstrap(
            runs,
            boot.resamples,
            boot.confidence,
            &mut next_rng(),
            |idx| final_fe(l, idx) - final_fe(r, idx),
        );
        claims.push(OrderingClaim {
            claim: "final system free energy".into(),
            lhs: l.model.clone(),
            rhs: r.model.clone(),
            holds: difference.high < 0.0,
            difference,
        });
    }
    let descent = summaries
        .iter()
        .map(|s| {
            let fe = &s.system_free_energy;
            (s.model.clone(), fe[fe.len() - 1] < fe[0])
        })
        .collect();
    Ok(ComparisonReport {
        resamples: boot.resamples,
        confidence: boot.confidence,
        models,
        claims,
        descent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyad::{initial_state, step_with_draws, EpochDraws, RunRecord};
    use crate::environment::TargetLayout;

    fn record_from(start: (usize, usize), params: &AgentParams, epochs: usize) -> RunRecord {
        let world = WorldConfig::default();
        let layout = TargetLayout::default();
        let mut state = initial_state(&world, layout, start, params, params);
        let mut rng = RngStream::new(11);
        let mut out = Vec::new();
        for _ in 0..epochs {
            let draws = EpochDraws {
                sense_a: rng.next_u64(),
                sense_b: rng.next_u64(),
                tie_a: rng.next_u64(),
                tie_b: rng.next_u64(),
            };
            let (next, rec) = step_with_draws(&state, &world, params, params, draws, false);
            out.push(rec);
            state = next;
        }
        RunRecord {
            run_index: 0,
            seed: 11,
            layout,
            epochs: out,
            final_state: state,
        }
    }

    #[test]
    fn presets_carry_the_ability_table() {
        let expect = [
            (0.0, 0.0, 0.0),
            (0.0, 0.2, 0.0),
            (0.0, 0.0, 1.0),
            (0.0, 0.2, 1.0),
        ];
        for (m, (alpha_a, alpha_b, gamma)) in (1..=4).zip(expect) {
            let s = ModelSpec::preset(m).unwrap();
            assert_eq!((s.params_a.k, s.params_b.k), (0.99, 0.05));
            assert_eq!((s.params_a.alpha, s.params_b.alpha), (alpha_a, alpha_b));
            assert_eq!((s.params_a.gamma, s.params_b.gamma), (gamma, gamma));
            assert_eq!((s.runs, s.epochs), (180, 200));
        }
        assert!(ModelSpec::preset(5).is_err());
    }

    #[test]
    fn starting_on_the_shared_target_counts_at_once() {
        let r = record_from((30, 45), &AgentParams::with_abilities(0.99, 0.0, 0.0), 5);
        assert_eq!(time_to_target(&r, AgentId::A, 0, 60), Some(0));
        assert_eq!(time_to_target(&r, AgentId::B, 0, 60), Some(0));
        let far = record_from((0, 1), &AgentParams::with_abilities(0.99, 0.0, 1.0), 3);
        assert_eq!(time_to_target(&far, AgentId::A, 0, 60), None);
    }

    #[test]
    fn alignment_removes_private_targets() {
        let free = record_from((30, 45), &AgentParams::with_abilities(0.99, 0.0, 0.0), 1);
        assert_eq!(
            active_targets(&free, AgentId::A),
            vec![(30, Pursuit::Shared), (15, Pursuit::Private)]
        );
        let aligned = record_from((15, 45), &AgentParams::with_abilities(0.99, 0.0, 1.0), 1);
        assert_eq!(
            active_targets(&aligned, AgentId::B),
            vec![(30, Pursuit::Shared)]
        );
        assert_ne!(
            classify_pursuit(&aligned, AgentId::A, 7, 60),
            Pursuit::Private
        );
    }

    #[test]
    fn classification_uses_the_final_position() {
        let params = AgentParams {
            grad_steps: 0,
            ..AgentParams::with_abilities(0.99, 0.0, 0.0)
        };
        let r = record_from((30, 45), &params, 1);
        let pos = r.epochs[0].pos_a;
        assert_eq!(classify_pursuit(&r, AgentId::A, 7, 60), Pursuit::Shared);
        assert_eq!(final_distance(&r, AgentId::A, 60), pos.abs_diff(30));
        assert_eq!(classify_pursuit(&r, AgentId::B, 7, 60), Pursuit::Private);
    }

    #[test]
    fn end_state_rotation_lands_on_the_canonical_cell() {
        let mut records = Vec::new();
        for shared in [3usize, 17, 59] {
            let mut r = record_from((0, 0), &AgentParams::default(), 1);
            r.layout.shared = shared;
            let mut own = vec![crate::beliefmath::BELIEF_MIN; 60];
            own[shared] = 0.0;
            r.final_state.beliefs_a.own = crate::beliefmath::BeliefVector::new(own);
            records.push(r);
        }
        let q = end_state_beliefs(&records, AgentId::A, 30).unwrap();
        let argmax = (0..60)
            .max_by(|a, b| q.as_slice()[*a].total_cmp(&q.as_slice()[*b]))
            .unwrap();
        assert_eq!(argmax, 30);
        assert!(end_state_beliefs(&[], AgentId::A, 30).is_err());
    }

    #[test]
    fn summaries_partition_runs_and_repeat() {
        let mut spec = ModelSpec::preset(1).unwrap();
        spec.runs = 40;
        let protocol = Protocol {
            master_seed: 3,
            snapshots: SnapshotPolicy::None,
            ..Protocol::default()
        };
        let (records, summary) = run_model(&spec, &protocol).unwrap();
        assert_eq!(records.len(), 40);
        for m in [&summary.agent_a, &summary.agent_b] {
            assert_eq!(m.pursuit_counts.total(), 40);
        }
        assert_eq!(summary.system_free_energy.len(), 200);
        let reached = summary.agent_a.time_to_target.iter().flatten().count();
        assert!(
            reached > 20,
            "strong agent reached a target in {reached} of 40 runs"
        );
        assert_eq!(run_model(&spec, &protocol).unwrap().1, summary);
    }

    #[test]
    fn aligned_theory_of_mind_lowers_system_free_energy() {
        let mut spec = ModelSpec::preset(4).unwrap();
        spec.runs = 60;
        let protocol = Protocol {
            snapshots: SnapshotPolicy::None,
            ..Protocol::default()
        };
        let (_, summary) = run_model(&spec, &protocol).unwrap();
        let fe = &summary.system_free_energy;
        assert!(fe[fe.len() - 1] < fe[0]);
    }

    #[test]
    fn comparison_needs_four_models() {
        let err = compare_models(
            &[],
            &SystemConfig::default(),
            60,
            &BootstrapConfig::default(),
        );
        assert!(err.is_err());
    }
}
