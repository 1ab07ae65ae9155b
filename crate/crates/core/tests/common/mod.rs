#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use simulcap::dynamics::{AgentState, IntruderPolicy, Numerics, Scenario};
use simulcap::{CommGraph, Edge, Point};

/// Random spanning tree plus extra edges, weights in `[0.1, 3)`.
pub fn random_connected_edges(rng: &mut ChaCha8Rng, n: usize) -> Vec<Edge> {
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = rng.gen_range(0..k);
        edges.push(Edge {
            i: parent,
            j: k,
            weight: rng.gen_range(0.1..3.0),
        });
    }
    for i in 0..n {
        for j in i + 1..n {
            let present = edges
                .iter()
                .any(|e| (e.i, e.j) == (i, j) || (e.i, e.j) == (j, i));
            if !present && rng.gen_bool(0.35) {
                edges.push(Edge {
                    i,
                    j,
                    weight: rng.gen_range(0.1..3.0),
                });
            }
        }
    }
    edges
}

/// Random sensing vector with at least one sensing defender.
pub fn random_sensing(rng: &mut ChaCha8Rng, n: usize) -> Vec<bool> {
    let mut b: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
    if !b.iter().any(|&x| x) {
        b[rng.gen_range(0..n)] = true;
    }
    b
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize) -> CommGraph {
    let edges = random_connected_edges(rng, n);
    let sensing = random_sensing(rng, n);
    CommGraph::from_edges(n, &edges, sensing).unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, half_width: f64) -> Point {
    Point::new(
        rng.gen_range(-half_width..half_width),
        rng.gen_range(-half_width..half_width),
    )
}

/// Interaction matrix assembled straight from its definition.
#[allow(clippy::needless_range_loop)]
pub fn interaction_matrix(graph: &CommGraph) -> Vec<Vec<f64>> {
    let n = graph.n_defenders();
    let mut w = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[i][j] = -graph.weight(i, j);
                w[i][i] += graph.weight(i, j);
            }
        }
        if graph.sensing()[i] {
            w[i][i] += 1.0;
        }
    }
    w
}

pub fn laplacian(graph: &CommGraph) -> Vec<Vec<f64>> {
    let mut w = interaction_matrix(graph);
    for (i, row) in w.iter_mut().enumerate() {
        if graph.sensing()[i] {
            row[i] -= 1.0;
        }
    }
    w
}

pub fn nalgebra_eigenvalues(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]);
    let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn scenario(
    graph: CommGraph,
    speeds: Vec<f64>,
    defenders: Vec<Point>,
    intruder: Point,
    vi: f64,
) -> Scenario {
    Scenario {
        graph,
        defender_speeds: speeds,
        intruder_speed: vi,
        initial_state: AgentState::new(defenders, intruder),
        policy: IntruderPolicy::Direct,
        target: Point::ORIGIN,
        numerics: Numerics::default(),
    }
}

/// Random scenario on a connected graph; positions in `[-10, 10]²`, intruder at
/// least 2 away from the target.
pub fn random_scenario(rng: &mut ChaCha8Rng, n: usize) -> Scenario {
    let graph = random_graph(rng, n);
    let speeds = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
    let defenders = (0..n).map(|_| random_point(rng, 10.0)).collect();
    let intruder = loop {
        let p = random_point(rng, 10.0);
        if p.norm() > 2.0 {
            break p;
        }
    };
    scenario(graph, speeds, defenders, intruder, rng.gen_range(0.01..0.5))
}
