use dyad_core::agent::{
    action_energies, compose_desires, free_energy, partner_action_probability, Action, ActionPair,
    AgentBeliefs, AgentParams, DesireSpec, Percept,
};
use dyad_core::beliefmath::{
    circular_shift, from_distribution, rerange, BeliefVector, ProbDist, BELIEF_MAX, BELIEF_MIN,
};
use dyad_core::ensemble::{empirical_distribution, system_free_energy, SystemConfig};
use dyad_core::environment::{randomize_layout, sensor_probability, TargetLayout, WorldConfig};
use dyad_core::rng::RngStream;
use proptest::prelude::*;

const N: usize = 60;

fn belief(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(BELIEF_MIN..=BELIEF_MAX, n)
}

fn dist(n: usize) -> impl Strategy<Value = ProbDist> {
    prop::collection::vec(1e-6f64..1.0, n).prop_map(|w| ProbDist::from_weights(w).unwrap())
}

fn action() -> impl Strategy<Value = Action> {
    prop::sample::select(Action::ALL.to_vec())
}

fn agent() -> impl Strategy<Value = AgentBeliefs> {
    (belief(N), belief(N), 0..N, 0..N, 0.0f64..=1.0).prop_map(
        |(own, partner, shared, private, gamma)| {
            let desire = compose_desires(&DesireSpec::for_targets(shared, private, N), gamma);
            AgentBeliefs {
                own: BeliefVector::new(own),
                own_desired: desire.clone(),
                partner: BeliefVector::new(partner),
                partner_desired: desire,
            }
        },
    )
}

fn percept() -> impl Strategy<Value = Percept> {
    (any::<bool>(), 0..N, action()).prop_map(|(s_own, delta, a_pp)| Percept { s_own, delta, a_pp })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn distributions_are_normalized(b in belief(N)) {
        let q = BeliefVector::new(b).distribution();
        prop_assert!((q.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(q.as_slice().iter().all(|v| *v > 0.0));
    }

    #[test]
    fn beliefs_round_trip_through_distributions(b in belief(N)) {
        let q = BeliefVector::new(b).distribution();
        let back = from_distribution(&q).unwrap();
        prop_assert!(back.as_slice().iter().all(|v| (BELIEF_MIN..=BELIEF_MAX).contains(v)));
        let q2 = back.distribution();
        let err = q.as_slice().iter().zip(q2.as_slice()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
    }

    #[test]
    fn desires_stay_in_range(shared in 0..N, private in 0..N, gamma in 0.0f64..=1.0) {
        let d = compose_desires(&DesireSpec::for_targets(shared, private, N), gamma);
        prop_assert!(d.as_slice().iter().all(|v| (BELIEF_MIN..=BELIEF_MAX).contains(v)));
        prop_assert_eq!(d.as_slice()[shared], 0.0);
    }

    #[test]
    fn full_alignment_leaves_one_peak(shared in 0..N, private in 0..N) {
        let d = compose_desires(&DesireSpec::for_targets(shared, private, N), 1.0);
        let peaks = d.as_slice().iter().filter(|v| **v == BELIEF_MAX).count();
        prop_assert_eq!(peaks, 1);
    }

    #[test]
    fn partner_actions_sum_to_one(phi in 0..N, desired in dist(N), xi in 1e-6f64..=1.0) {
        let total: f64 = Action::ALL.iter().map(|a| partner_action_probability(phi, *a, &desired, xi)).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn second_order_reranging_composes(q in dist(N), a in 0.0f64..=1.0) {
        let twice = rerange(&rerange(&q, a).unwrap(), a).unwrap();
        let once = rerange(&q, a * a).unwrap();
        for (x, y) in twice.as_slice().iter().zip(once.as_slice()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn shifting_permutes(v in prop::collection::vec(-5i64..5, 1..80), x in -200i64..200) {
        let mut a = circular_shift(&v, x);
        let mut b = v.clone();
        a.sort_unstable();
        b.sort_unstable();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn sensor_falls_off_with_distance(k in 0.01f64..=0.99, omega in 0.0f64..1.0) {
        let world = WorldConfig { omega, ..WorldConfig::default() };
        let mut by_distance: Vec<(usize, f64)> = (0..N)
            .map(|psi| (world.distance(psi, world.beacon), sensor_probability(psi, k, &world).unwrap()))
            .collect();
        by_distance.sort_by_key(|(d, _)| *d);
        for w in by_distance.windows(2) {
            prop_assert!(w[1].1 <= w[0].1);
        }
    }

    #[test]
    fn layouts_keep_their_offsets(seed in any::<u64>()) {
        let world = WorldConfig::default();
        let base = TargetLayout::default();
        let mut rng = RngStream::new(seed);
        let l = randomize_layout(&base, &world, &mut rng);
        prop_assert_eq!(l.offsets(N), base.offsets(N));
    }

    #[test]
    fn free_energy_bounded_below(a in agent(), p in percept(), own in action(), partner in action(), alpha in 0.0f64..0.99) {
        let params = AgentParams { alpha, ..AgentParams::default() };
        let world = WorldConfig::default();
        let pair = ActionPair { own, partner };
        let f = free_energy(&a.own.distribution(), &a.partner.distribution(), &a, &p, &pair, &params, &world);
        prop_assert!(f >= -(N as f64) * 10.0);
        prop_assert!(f.is_finite());
    }

    #[test]
    fn free_energy_ignores_belief_offsets(a in agent(), p in percept(), own in prop::collection::vec(-5.0f64..=0.0, N), c in -5.0f64..0.0) {
        let params = AgentParams::default();
        let world = WorldConfig::default();
        let pair = ActionPair { own: Action::Left, partner: Action::Right };
        let a = AgentBeliefs { own: BeliefVector::new(own.clone()), ..a };
        let moved = BeliefVector::new(own.iter().map(|v| v + c).collect());
        let q = a.partner.distribution();
        let f1 = free_energy(&a.own.distribution(), &q, &a, &p, &pair, &params, &world);
        let f2 = free_energy(&moved.distribution(), &q, &a, &p, &pair, &params, &world);
        prop_assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn without_alterity_partner_beliefs_do_not_move_the_agent(a in agent(), p in percept(), other in belief(N)) {
        let params = AgentParams::default();
        let world = WorldConfig::default();
        let mut b = a.clone();
        b.partner = BeliefVector::new(other);
        let own_best = |x: &AgentBeliefs| {
            let e = action_energies(x, &p, &params, &world);
            Action::ALL
                .iter()
                .map(|act| e.iter().filter(|(pair, _)| pair.own == *act).map(|(_, f)| *f).fold(f64::INFINITY, f64::min))
                .collect::<Vec<_>>()
        };
        let (fa, fb) = (own_best(&a), own_best(&b));
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!(((fa[i] - fa[j]) - (fb[i] - fb[j])).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn system_free_energy_is_rotation_invariant(
        pos in prop::collection::vec(0..N, 20),
        refs in prop::collection::vec(0..N, 10),
        rot in 0..N,
    ) {
        let world = WorldConfig::default();
        let config = SystemConfig::default();
        let q = empirical_distribution(&pos, &refs, &world).unwrap();
        prop_assert!((q.as_slice().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let turn = |v: &[usize]| v.iter().map(|x| (x + rot) % N).collect::<Vec<_>>();
        let r = empirical_distribution(&turn(&pos), &turn(&refs), &world).unwrap();
        let (f1, f2) = (system_free_energy(&q, &config).unwrap(), system_free_energy(&r, &config).unwrap());
        prop_assert!(f1 >= 0.0);
        prop_assert!((f1 - f2).abs() < 1e-12);
    }

    #[test]
    fn run_order_does_not_matter(pos in prop::collection::vec(0..N, 20), refs in prop::collection::vec(0..N, 10)) {
        let world = WorldConfig::default();
        let q = empirical_distribution(&pos, &refs, &world).unwrap();
        let mut rp: Vec<usize> = pos.chunks(2).rev().flatten().copied().collect();
        let rr: Vec<usize> = refs.iter().rev().copied().collect();
        let r = empirical_distribution(&rp, &rr, &world).unwrap();
        prop_assert_eq!(q, r);
        rp.pop();
        prop_assert!(empirical_distribution(&rp, &rr, &world).is_err());
    }
}
