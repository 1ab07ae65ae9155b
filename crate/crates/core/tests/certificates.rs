mod common;

use common::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simulcap::analysis::{rate_constant, sufficient_condition_capture, verify_consensus_rate};
use simulcap::dynamics::{HeadingSchedule, HeadingSegment, Scenario};
use simulcap::{build_capture_matrices, certify, simulate, IntruderPolicy};

/// Random scenario with the intruder speed drawn so that `c > 0`.
fn feasible(rng: &mut ChaCha8Rng) -> Scenario {
    let n = rng.gen_range(2..=8);
    let mut s = random_scenario(rng, n);
    let cm = build_capture_matrices(&s.graph).unwrap();
    let v_min = s.min_defender_speed();
    let ceiling = v_min * cm.lambda_min_w.sqrt() / (cm.m as f64).sqrt();
    s.intruder_speed = ceiling * rng.gen_range(0.05..0.9);
    s
}

#[test]
fn capture_never_comes_later_than_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..100 {
        let mut s = feasible(&mut rng);
        let cm = build_capture_matrices(&s.graph).unwrap();
        let cert = certify(&s, &cm);
        let bound = cert.t_star_bound.expect("c > 0");
        s.numerics.t_max = 1.5 * bound + 1.0;
        let trace = simulate(&s).unwrap();
        if let Some(t) = trace.outcome.capture_time() {
            assert!(t <= bound, "capture at {t} after bound {bound}");
        }
    }
}

#[test]
fn time_and_ratio_forms_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut holds = 0;
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let s = random_scenario(&mut rng, n);
        let cm = build_capture_matrices(&s.graph).unwrap();
        let cond = sufficient_condition_capture(&s, &cm).unwrap();
        if cond.time_form.slack.abs() > 1e-12 {
            assert_eq!(cond.time_form.holds, cond.ratio_form.holds, "{cond:?}");
        }
        holds += cond.time_form.holds as usize;
    }
    assert!(holds > 20 && holds < 480, "{holds} of 500 hold");
}

#[test]
fn stricter_conditions_imply_weaker_ones() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..500 {
        let n = rng.gen_range(1..=8);
        let s = random_scenario(&mut rng, n);
        let cm = build_capture_matrices(&s.graph).unwrap();
        let cert = certify(&s, &cm);
        let ratio = cert.speed_ratio_ok.unwrap();
        if cert.lemma_speed_ok.unwrap().holds {
            assert!(ratio.holds, "{cert:?}");
        }
        if cert.sufficient_capture.unwrap().holds {
            assert!(cert.c > 0.0 && cert.is_feasible());
        }
        assert_eq!(cert.is_feasible(), cert.c > 0.0);
    }
}

#[test]
fn scaling_all_speeds_rescales_the_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..100 {
        let s = feasible(&mut rng);
        let k = rng.gen_range(0.2..5.0);
        let mut fast = s.clone();
        fast.intruder_speed *= k;
        fast.defender_speeds.iter_mut().for_each(|v| *v *= k);
        let cm = build_capture_matrices(&s.graph).unwrap();
        let (a, b) = (certify(&s, &cm), certify(&fast, &cm));
        assert!((b.c - k * a.c).abs() < 1e-9 * a.c.abs().max(1.0));
        let (ta, tb) = (a.t_star_bound.unwrap(), b.t_star_bound.unwrap());
        assert!((tb * k - ta).abs() < 1e-9 * ta);
        let (ra, rb) = (a.speed_ratio_ok.unwrap(), b.speed_ratio_ok.unwrap());
        if ra.slack.abs() > 1e-9 {
            assert_eq!(ra.holds, rb.holds);
        }
    }
}

#[test]
fn scripted_intruders_respect_the_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut done = 0;
    while done < 5 {
        let mut s = feasible(&mut rng);
        let cm = build_capture_matrices(&s.graph).unwrap();
        let bound = certify(&s, &cm).t_star_bound.unwrap();
        s.numerics.t_max = bound + 1.0;
        let pieces = rng.gen_range(1..=6);
        let mut cuts: Vec<f64> = (0..pieces - 1)
            .map(|_| rng.gen_range(0.0..s.numerics.t_max))
            .collect();
        cuts.sort_by(f64::total_cmp);
        let mut start = 0.0;
        let mut segments = Vec::new();
        for end in cuts.into_iter().chain([f64::INFINITY]) {
            if end > start {
                segments.push(HeadingSegment {
                    start,
                    end,
                    heading: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
                });
                start = end;
            }
        }
        s.policy = IntruderPolicy::Scripted(HeadingSchedule::new(segments).unwrap());
        s.numerics.sample_stride = 1;
        let trace = simulate(&s).unwrap();
        let cert = certify(&s, &cm);
        let report =
            verify_consensus_rate(&trace, &cert, s.numerics.rate_slack(rate_constant(&s, &cm)));
        assert!(report.applicable && report.pass, "{report:?}");
        assert!(
            trace.outcome.capture_time().is_some(),
            "{:?}",
            trace.outcome
        );
        done += 1;
    }
}
