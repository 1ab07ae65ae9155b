//! Communication/sensing structure of the defender team and the spectra of the
//! interaction matrices built from it.
//!
//! For `N` defenders with symmetric communication weights `w_ij` and sensing
//! flags `b_i`, the interaction matrix is
//!
//! ```text
//! W_ij = -w_ij             (i != j)
//! W_ii = Σ_j w_ij + b_i
//! ```
//!
//! which splits as `W = W₁ + W₂` with `W₁` the weighted graph Laplacian and
//! `W₂ = diag(b)`. `W` is positive definite when the graph is connected and at
//! least one defender senses the intruder.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{BoundError, GraphError};
use crate::linalg::{symmetric_eigenvalues, Matrix, SYMMETRY_TOLERANCE};

/// Threshold on λ₂(W₁) used only to cross-check the traversal-based connectivity.
pub const SPECTRAL_CONNECTIVITY_TOLERANCE: f64 = 1e-9;

/// Weighted undirected edge between defenders `i` and `j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub weight: f64,
}

impl Edge {
    pub fn unit(i: usize, j: usize) -> Self {
        Self { i, j, weight: 1.0 }
    }
}

/// Communication weights and sensing flags for `N` defenders.
#[derive(Debug, Clone, PartialEq)]
pub struct CommGraph {
    weights: Matrix,
    sensing: Vec<bool>,
}

impl CommGraph {
    /// Checks shape and that every weight is finite and nonnegative.
    ///
    /// Symmetry and the zero diagonal are checked by [`build_capture_matrices`],
    /// and [`validate_assumptions`] reports on them, so that graphs violating
    /// them can still be represented and diagnosed.
    pub fn new(weights: Matrix, sensing: Vec<bool>) -> Result<Self, GraphError> {
        let n = sensing.len();
        if n == 0 {
            return Err(GraphError::Empty);
        }
        if weights.dim() != n {
            return Err(GraphError::DimensionMismatch {
                rows: weights.dim(),
                cols: weights.dim(),
                sensing: n,
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights.get(i, j);
                if !w.is_finite() || w < 0.0 {
                    return Err(GraphError::InvalidWeight { i, j, value: w });
                }
            }
        }
        Ok(Self { weights, sensing })
    }

    /// Symmetric graph from an undirected edge list. Repeated edges overwrite.
    pub fn from_edges(n: usize, edges: &[Edge], sensing: Vec<bool>) -> Result<Self, GraphError> {
        if sensing.len() != n {
            return Err(GraphError::DimensionMismatch {
                rows: n,
                cols: n,
                sensing: sensing.len(),
            });
        }
        let mut w = Matrix::zeros(n);
        for e in edges {
            if e.i >= n || e.j >= n {
                return Err(GraphError::EdgeOutOfRange { i: e.i, j: e.j, n });
            }
            if e.i == e.j {
                return Err(GraphError::SelfLoop { i: e.i });
            }
            w.set(e.i, e.j, e.weight);
            w.set(e.j, e.i, e.weight);
        }
        Self::new(w, sensing)
    }

    /// Complete graph with unit weights.
    pub fn complete(sensing: Vec<bool>) -> Result<Self, GraphError> {
        let n = sensing.len();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                edges.push(Edge::unit(i, j));
            }
        }
        Self::from_edges(n, &edges, sensing)
    }

    pub fn n_defenders(&self) -> usize {
        self.sensing.len()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights.get(i, j)
    }

    pub fn sensing(&self) -> &[bool] {
        &self.sensing
    }

    /// Number of sensing defenders, `m = Σ b_i`.
    pub fn sensing_count(&self) -> usize {
        self.sensing.iter().filter(|&&b| b).count()
    }

    /// Undirected edges with positive weight, `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<Edge> {
        let n = self.n_defenders();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.weight(i, j);
                if w > 0.0 {
                    out.push(Edge { i, j, weight: w });
                }
            }
        }
        out
    }

    /// Same graph with every weight multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Result<Self, GraphError> {
        Self::new(self.weights.scaled(k), self.sensing.clone())
    }

    /// Connectivity of the positive-weight support, decided by breadth-first search.
    #[allow(clippy::needless_range_loop)]
    pub fn is_connected(&self) -> bool {
        let n = self.n_defenders();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = queue.pop_front() {
            for j in 0..n {
                if !seen[j] && (self.weight(i, j) > 0.0 || self.weight(j, i) > 0.0) {
                    seen[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == n
    }

    fn check_structure(&self) -> Result<(), GraphError> {
        let n = self.n_defenders();
        for i in 0..n {
            let d = self.weight(i, i);
            if d != 0.0 {
                return Err(GraphError::NonzeroDiagonal { i, value: d });
            }
        }
        if let Some((i, j)) = self.weights.first_asymmetry(SYMMETRY_TOLERANCE) {
            return Err(GraphError::Asymmetric {
                i,
                j,
                wij: self.weight(i, j),
                wji: self.weight(j, i),
            });
        }
        Ok(())
    }
}

/// `W`, its split into communication and sensing parts, and cached spectra.
#[derive(Debug, Clone)]
pub struct CaptureMatrixSet {
    pub w_full: Matrix,
    pub w_comm: Matrix,
    pub w_sense: Matrix,
    pub m: usize,
    pub n: usize,
    pub lambda_min_w: f64,
    /// Second-smallest eigenvalue of `W₁`; `None` for a single defender.
    pub lambda2_w1: Option<f64>,
    pub eigenvalues_w: Vec<f64>,
    pub eigenvalues_w1: Vec<f64>,
    /// Connectivity by graph traversal.
    pub connected: bool,
    sensing: Vec<bool>,
}

impl CaptureMatrixSet {
    pub fn sensing(&self) -> &[bool] {
        &self.sensing
    }

    /// Communication weight `w_ij`, read back from the off-diagonal of `W₁`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        if i == j {
            0.0
        } else {
            -self.w_comm.get(i, j)
        }
    }

    /// `𝟙ᵀ W 𝟙`, which equals `m` for any valid graph.
    pub fn ones_quadratic_form(&self) -> f64 {
        self.w_full.quadratic_form(&vec![1.0; self.n])
    }
}

/// Builds `W`, `W₁`, `W₂` and their spectra.
pub fn build_capture_matrices(graph: &CommGraph) -> Result<CaptureMatrixSet, GraphError> {
    graph.check_structure()?;
    let n = graph.n_defenders();
    let mut w_comm = Matrix::zeros(n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            if i != j {
                let w = graph.weight(i, j);
                w_comm.set(i, j, -w);
                degree += w;
            }
        }
        w_comm.set(i, i, degree);
    }
    let sense: Vec<f64> = graph
        .sensing()
        .iter()
        .map(|&b| if b { 1.0 } else { 0.0 })
        .collect();
    let w_sense = Matrix::diagonal(&sense);
    let w_full = w_comm.add(&w_sense);

    let eigenvalues_w = symmetric_eigenvalues(&w_full)?;
    let eigenvalues_w1 = symmetric_eigenvalues(&w_comm)?;
    Ok(CaptureMatrixSet {
        lambda_min_w: eigenvalues_w[0],
        lambda2_w1: eigenvalues_w1.get(1).copied(),
        eigenvalues_w,
        eigenvalues_w1,
        w_full,
        w_comm,
        w_sense,
        m: graph.sensing_count(),
        n,
        connected: graph.is_connected(),
        sensing: graph.sensing().to_vec(),
    })
}

/// Per-check outcome of the symmetry, connectivity and sensing assumptions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub symmetric: bool,
    pub zero_diagonal: bool,
    /// Decided by traversal of the positive-weight support.
    pub connected: bool,
    /// λ₂(W₁) when it could be computed (needs N ≥ 2 and symmetric weights).
    pub lambda2_w1: Option<f64>,
    /// `true` when λ₂(W₁) disagrees with the traversal verdict.
    pub spectral_mismatch: bool,
    pub sensing_count: usize,
    pub sensing_ok: bool,
}

impl AssumptionReport {
    pub fn all_pass(&self) -> bool {
        self.symmetric && self.zero_diagonal && self.connected && self.sensing_ok
    }

    /// Human-readable list of failed checks.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.symmetric {
            out.push("communication weights are not symmetric");
        }
        if !self.zero_diagonal {
            out.push("communication weights have a nonzero diagonal");
        }
        if !self.connected {
            out.push("communication graph is disconnected");
        }
        if !self.sensing_ok {
            out.push("no defender senses the intruder");
        }
        out
    }
}

pub fn validate_assumptions(graph: &CommGraph) -> AssumptionReport {
    let n = graph.n_defenders();
    let symmetric = graph.weights.is_symmetric(SYMMETRY_TOLERANCE);
    let zero_diagonal = (0..n).all(|i| graph.weight(i, i) == 0.0);
    let connected = graph.is_connected();
    let lambda2_w1 = if symmetric && zero_diagonal && n >= 2 {
        build_capture_matrices(graph)
            .ok()
            .and_then(|cm| cm.lambda2_w1)
    } else {
        None
    };
    let spectral_mismatch = lambda2_w1
        .map(|l2| (l2 > SPECTRAL_CONNECTIVITY_TOLERANCE) != connected)
        .unwrap_or(false);
    let sensing_count = graph.sensing_count();
    AssumptionReport {
        symmetric,
        zero_diagonal,
        connected,
        lambda2_w1,
        spectral_mismatch,
        sensing_count,
        sensing_ok: sensing_count >= 1,
    }
}

/// Minimum of `f(γ) = (a + c(|γ| - d)²) / (γ² + 1)` over γ ∈ ℝ, including the γ → ∞ limit `c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaMinimum {
    pub value: f64,
    /// Nonnegative stationary point of `f` on γ ≥ 0.
    pub gamma_star: f64,
    pub at_stationary: f64,
    pub at_zero: f64,
    pub limit: f64,
}

/// Evaluates `f(γ) = (a + c(|γ| - d)²) / (γ² + 1)`.
pub fn gamma_objective(a: f64, c: f64, d: f64, gamma: f64) -> f64 {
    let g = gamma.abs() - d;
    (a + c * g * g) / (gamma * gamma + 1.0)
}

/// Closed-form minimization of [`gamma_objective`].
///
/// For γ ≥ 0 the stationary points solve `c·d·γ² + (c - c·d² - a)·γ - c·d = 0`,
/// whose roots have product -1, so exactly one is nonnegative. Negative γ never
/// does better than `|γ|`. The infimum is the smallest of `f(0)`, `f(γ*)` and
/// the limit `c`.
pub fn minimize_gamma(a: f64, c: f64, d: f64) -> GammaMinimum {
    let qa = c * d;
    let qb = c - c * d * d - a;
    let gamma_star = if qa == 0.0 {
        0.0
    } else {
        let qc = -c * d;
        let disc = (qb * qb - 4.0 * qa * qc).sqrt();
        // stable root pair: q/qa and qc/q
        let q = -0.5 * (qb + qb.signum() * disc);
        let q = if q == 0.0 { -0.5 * disc } else { q };
        let r1 = q / qa;
        let r2 = qc / q;
        r1.max(r2).max(0.0)
    };
    let at_stationary = gamma_objective(a, c, d, gamma_star);
    let at_zero = gamma_objective(a, c, d, 0.0);
    let limit = c;
    GammaMinimum {
        value: at_stationary.min(at_zero).min(limit),
        gamma_star,
        at_stationary,
        at_zero,
        limit,
    }
}

/// Lower bound on λ_min(W) from the algebraic connectivity λ₂(W₁) and the sensing ratio `m/N`.
///
/// With `a = λ₂(W₁)`, `c = m/N`, `d = √((N-m)/m)` the bound is `min_γ f(γ)`.
/// When every defender senses, `d = 0` and the bound reduces to `min(λ₂(W₁), m/N)`.
/// A single defender has no λ₂; the bound is then `λ_min(W) = b₁` itself.
pub fn lemma1_lower_bound(cm: &CaptureMatrixSet) -> Result<f64, BoundError> {
    if cm.m == 0 {
        return Err(BoundError::NoSensing);
    }
    if cm.n == 1 {
        return Ok(cm.lambda_min_w);
    }
    if !cm.connected {
        return Err(BoundError::Disconnected);
    }
    let (a, c, d) = lemma_coefficients(cm);
    Ok(minimize_gamma(a, c, d).value)
}

/// `(λ₂(W₁), m/N, √((N-m)/m))`.
pub(crate) fn lemma_coefficients(cm: &CaptureMatrixSet) -> (f64, f64, f64) {
    let n = cm.n as f64;
    let m = cm.m as f64;
    let a = cm.lambda2_w1.unwrap_or(0.0);
    (a, m / n, ((n - m) / m).sqrt())
}
