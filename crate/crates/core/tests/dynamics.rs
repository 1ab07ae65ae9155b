mod common;

use common::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simulcap::analysis::rate_constant;
use simulcap::dynamics::{defender_velocity, intruder_stopped, step, Integrator, OutcomeClass};
use simulcap::{build_capture_matrices, simulate, AgentState, Outcome, Point};

fn direction_oracle(i: usize, state: &AgentState, graph: &simulcap::CommGraph) -> Point {
    let xi = state.defenders[i];
    let mut d = Point::ORIGIN;
    for (j, &xj) in state.defenders.iter().enumerate() {
        d += graph.weight(i, j) * (xj - xi);
    }
    if graph.sensing()[i] {
        d += state.intruder - xi;
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn defenders_move_at_full_speed_along_consensus_direction(seed in any::<u64>(), n in 1usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, n);
        let cm = build_capture_matrices(&graph).unwrap();
        let state = AgentState::new((0..n).map(|_| random_point(&mut rng, 10.0)).collect(), random_point(&mut rng, 10.0));
        for i in 0..n {
            let speed = rng.gen_range(0.1..3.0);
            let v = defender_velocity(i, &state, &cm, speed, 1e-9);
            let d = direction_oracle(i, &state, &graph);
            if d.norm() <= 1e-9 {
                prop_assert_eq!(v, Point::ORIGIN);
            } else {
                prop_assert!((v.norm() - speed).abs() <= 1e-12 * speed);
                let cross = v.x * d.y - v.y * d.x;
                prop_assert!(cross.abs() <= 1e-9 * d.norm() * speed);
                prop_assert!(v.dot(d) > 0.0);
            }
        }
    }

    #[test]
    fn stopped_intruder_stays_put(seed in any::<u64>(), n in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_scenario(&mut rng, n);
        let x = s.initial_state.intruder;
        let eps = s.numerics.eps_capture;
        s.initial_state.defenders = (0..n)
            .map(|_| x + Point::new(rng.gen_range(-0.5..0.5) * eps, rng.gen_range(-0.5..0.5) * eps))
            .collect();
        let cm = build_capture_matrices(&s.graph).unwrap();
        prop_assert!(intruder_stopped(&s.initial_state.defenders, x, eps));
        let next = step(&s.initial_state, &s, &cm);
        prop_assert_eq!(next.intruder, x);
        let trace = simulate(&s).unwrap();
        prop_assert_eq!(trace.outcome, Outcome::SimultaneousCapture(0.0));
    }
}

#[test]
fn lyapunov_value_decreases_at_the_certified_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 40 {
        let n = rng.gen_range(2..=6);
        let mut s = random_scenario(&mut rng, n);
        let cm = build_capture_matrices(&s.graph).unwrap();
        if rate_constant(&s, &cm) <= 0.0 {
            continue;
        }
        s.numerics.sample_stride = 1;
        let c = rate_constant(&s, &cm);
        let tau = s.numerics.rate_slack(c);
        let trace = simulate(&s).unwrap();
        let cutoff = trace.outcome.capture_time().unwrap_or(f64::INFINITY);
        let before: Vec<_> = trace.samples.iter().filter(|x| x.time < cutoff).collect();
        for w in before.windows(2) {
            let (a, b) = (w[0].lyapunov.sqrt(), w[1].lyapunov.sqrt());
            assert!(
                b <= a - c * (w[1].time - w[0].time) + tau,
                "√V rose from {a} to {b} at t = {}",
                w[1].time
            );
        }
        checked += 1;
    }
}

#[test]
fn simulation_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let s = random_scenario(&mut rng, 4);
        assert_eq!(simulate(&s).unwrap(), simulate(&s).unwrap());
    }
}

#[test]
fn translation_moves_trajectories_rigidly() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(2..=5);
        let s = random_scenario(&mut rng, n);
        let by = Point::new(rng.gen_range(-20..20) as f64, rng.gen_range(-20..20) as f64);
        let a = simulate(&s).unwrap();
        let b = simulate(&s.translated(by)).unwrap();
        assert_eq!(a.outcome.class(), b.outcome.class());
        let dt = s.numerics.dt;
        assert!(
            (a.outcome.time() - b.outcome.time()).abs() <= 10.0 * dt,
            "{:?} vs {:?}",
            a.outcome,
            b.outcome
        );
        // sliding along a short consensus direction chatters with amplitude O(v·dt)
        let tol = 10.0
            * dt
            * s.defender_speeds
                .iter()
                .fold(s.intruder_speed, |a, &b| a.max(b));
        for (p, q) in a.samples.iter().zip(&b.samples).take(200) {
            assert!((p.intruder + by).distance(q.intruder) < tol);
            for (x, y) in p.defenders.iter().zip(&q.defenders) {
                assert!((*x + by).distance(*y) < tol, "t = {}", p.time);
            }
        }
    }
}

#[test]
fn euler_and_rk4_agree_on_the_homogeneous_engagement() {
    let graph = simulcap::CommGraph::complete(vec![true; 4]).unwrap();
    let defenders = vec![
        Point::new(5.0, 5.0),
        Point::new(-5.0, -5.0),
        Point::new(-5.0, 5.0),
        Point::new(5.0, -5.0),
    ];
    let mut s = scenario(graph, vec![1.0; 4], defenders, Point::new(-5.0, 10.0), 0.1);
    let euler = simulate(&s).unwrap();
    s.numerics.integrator = Integrator::Rk4;
    let rk4 = simulate(&s).unwrap();
    assert_eq!(euler.outcome.class(), OutcomeClass::Capture);
    assert_eq!(rk4.outcome.class(), OutcomeClass::Capture);
    assert!((euler.outcome.time() - rk4.outcome.time()).abs() < 0.05);
}

#[test]
fn timeouts_stop_at_the_horizon() {
    let graph = simulcap::CommGraph::complete(vec![true; 2]).unwrap();
    let mut s = scenario(
        graph,
        vec![0.01; 2],
        vec![Point::new(50.0, 0.0), Point::new(-50.0, 0.0)],
        Point::new(0.0, 40.0),
        0.001,
    );
    s.numerics.t_max = 1.0;
    let trace = simulate(&s).unwrap();
    assert_eq!(trace.outcome.class(), OutcomeClass::Timeout);
    assert!((trace.final_sample().time - 1.0).abs() < 1e-9);
}
