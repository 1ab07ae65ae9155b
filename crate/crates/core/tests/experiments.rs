mod common;

use common::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use simulcap::experiments::{
    capture_map, capture_map_in_order, extract_boundary, run_sweep, GridSpec, SweepParameter,
    SweepSpec,
};
use simulcap::{CommGraph, Edge, Point, Scenario};

fn square(vi: f64) -> Scenario {
    let defenders = vec![
        Point::new(5.0, 5.0),
        Point::new(-5.0, -5.0),
        Point::new(-5.0, 5.0),
        Point::new(5.0, -5.0),
    ];
    scenario(
        CommGraph::complete(vec![true; 4]).unwrap(),
        vec![1.0; 4],
        defenders,
        Point::new(-5.0, 10.0),
        vi,
    )
}

#[test]
fn map_does_not_depend_on_cell_order() {
    let base = square(0.5);
    let grid = GridSpec {
        t_max: 60.0,
        ..GridSpec::square(15.0, 13)
    };
    let parallel = capture_map(&base, &grid).unwrap();
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(3));
    let shuffled = capture_map_in_order(&base, &grid, &order).unwrap();
    assert_eq!(parallel, shuffled);
    order.reverse();
    assert_eq!(
        parallel,
        capture_map_in_order(&base, &grid, &order).unwrap()
    );
}

#[test]
fn sweep_entries_equal_individual_maps() {
    let base = square(0.1);
    let grid = GridSpec {
        t_max: 100.0,
        ..GridSpec::square(15.0, 9)
    };
    let ring: Vec<Edge> = [(0, 1), (1, 2), (2, 3), (3, 0)]
        .map(|(i, j)| Edge::unit(i, j))
        .to_vec();
    let parameters = [
        SweepParameter::DefenderSpeed {
            defender: 3,
            values: vec![0.2, 0.6, 1.0],
        },
        SweepParameter::Sensing {
            values: vec![vec![true, false, false, false], vec![true; 4]],
        },
        SweepParameter::CommEdges {
            values: vec![ring.clone(), base.graph.edges()],
        },
    ];
    for parameter in parameters {
        let spec = SweepSpec {
            base_scenario: base.clone(),
            parameter,
        };
        let entries = run_sweep(&spec, &grid).unwrap();
        assert_eq!(entries.len(), spec.parameter.len());
        for (k, entry) in entries.iter().enumerate() {
            let out = entry.result.as_ref().unwrap();
            let map = capture_map(&spec.scenario(k).unwrap(), &grid).unwrap();
            assert_eq!(out.map, map);
            assert_eq!(out.boundary, extract_boundary(&map));
        }
    }
}

#[test]
fn failing_setting_does_not_stop_the_sweep() {
    let base = square(0.1);
    let grid = GridSpec {
        t_max: 50.0,
        ..GridSpec::square(15.0, 5)
    };
    let spec = SweepSpec {
        base_scenario: base,
        parameter: SweepParameter::Sensing {
            values: vec![vec![false; 4], vec![true; 4]],
        },
    };
    let entries = run_sweep(&spec, &grid).unwrap();
    assert!(entries[0].result.is_err());
    assert!(entries[1].result.is_ok());
}

#[test]
fn faster_fourth_defender_never_enlarges_breach_region() {
    let base = square(0.1);
    let grid = GridSpec {
        t_max: 200.0,
        ..GridSpec::square(15.0, 21)
    };
    let spec = SweepSpec {
        base_scenario: base,
        parameter: SweepParameter::DefenderSpeed {
            defender: 3,
            values: vec![0.2, 0.6, 1.0],
        },
    };
    let counts: Vec<usize> = run_sweep(&spec, &grid)
        .unwrap()
        .iter()
        .map(|e| e.result.as_ref().unwrap().map.breach_count())
        .collect();
    assert!(counts.windows(2).all(|w| w[1] <= w[0]), "{counts:?}");
}
