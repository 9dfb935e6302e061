//! Directed communication graphs and the matrices derived from them.
//!
//! `weights[i][j] = a_ij > 0` means player `i` hears player `j` (an edge
//! from `j` to `i`). The augmented matrix `L ⊗ I_n + B₀` drives the estimate
//! dynamics; for a strongly connected graph it is a non-singular M-matrix and
//! admits a Lyapunov pair `(P, Q)` with `AᵀP + PA = Q`.

use std::collections::VecDeque;

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Row-major `n × n` adjacency of nonnegative weights with a zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphSpec<T>", into = "GraphSpec<T>")]
#[serde(bound = "T: Scalar")]
pub struct DirectedGraph<T> {
    n: usize,
    weights: Vec<T>,
}

/// JSON form of a graph: `{"adjacency": [[...], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphSpec<T> {
    pub adjacency: Vec<Vec<T>>,
}

impl<T: Scalar> TryFrom<GraphSpec<T>> for DirectedGraph<T> {
    type Error = Error;

    fn try_from(spec: GraphSpec<T>) -> Result<Self> {
        Self::from_rows(spec.adjacency)
    }
}

impl<T: Scalar> From<DirectedGraph<T>> for GraphSpec<T> {
    fn from(g: DirectedGraph<T>) -> Self {
        GraphSpec {
            adjacency: (0..g.n).map(|i| g.row(i).to_vec()).collect(),
        }
    }
}

impl<T: Scalar> DirectedGraph<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let n = rows.len();
        if n < 2 {
            return Err(Error::Validation(format!(
                "graph needs at least 2 players, got {n}"
            )));
        }
        let mut weights = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(Error::Validation(format!(
                    "adjacency row {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            for (j, w) in row.into_iter().enumerate() {
                if !w.is_finite() || w < T::zero() {
                    return Err(Error::Validation(format!(
                        "adjacency[{i}][{j}] = {w} must be a finite nonnegative weight"
                    )));
                }
                if i == j && w != T::zero() {
                    return Err(Error::Validation(format!(
                        "adjacency[{i}][{i}] = {w}: self-loops are not allowed"
                    )));
                }
                weights.push(w);
            }
        }
        Ok(Self { n, weights })
    }

    /// Unit-weight graph from `(listener, speaker)` pairs.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut rows = vec![vec![T::zero(); n]; n];
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::Validation(format!(
                    "edge ({i}, {j}) out of range for {n} players"
                )));
            }
            rows[i][j] = T::one();
        }
        Self::from_rows(rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> T {
        self.weights[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.weights[i * self.n..(i + 1) * self.n]
    }

    pub fn in_degree(&self, i: usize) -> T {
        self.row(i).iter().fold(T::zero(), |acc, &w| acc + w)
    }

    pub fn edge_count(&self) -> usize {
        self.weights.iter().filter(|&&w| w > T::zero()).count()
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Self {
        Self {
            n: self.n,
            weights: self.weights.iter().map(|&w| w * factor).collect(),
        }
    }

    pub fn to_f64(&self) -> DirectedGraph<f64> {
        DirectedGraph {
            n: self.n,
            weights: self.weights.iter().map(|&w| w.as_f64()).collect(),
        }
    }

    /// `L = D − A` with `D` the diagonal of in-degrees.
    pub fn laplacian(&self) -> DMatrix<T> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.in_degree(i)
            } else {
                -self.weight(i, j)
            }
        })
    }

    /// `B₀ = diag(a₁₁, …, a₁ₙ, a₂₁, …, aₙₙ)`.
    pub fn b0_matrix(&self) -> DMatrix<T> {
        let m = self.n * self.n;
        let mut b0 = DMatrix::zeros(m, m);
        for (k, &w) in self.weights.iter().enumerate() {
            b0[(k, k)] = w;
        }
        b0
    }

    /// `L ⊗ I_n + B₀`.
    pub fn augmented_matrix(&self) -> DMatrix<T> {
        let n = self.n;
        let lap = self.laplacian();
        let mut m = self.b0_matrix();
        for i in 0..n {
            for k in 0..n {
                let l = lap[(i, k)];
                if l == T::zero() {
                    continue;
                }
                for j in 0..n {
                    m[(i * n + j, k * n + j)] += l;
                }
            }
        }
        m
    }

    /// Two breadth-first passes from node 0: along edges and against them.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n;
        // forward: j -> i whenever a_ij > 0
        let forward = self.reach(|v, i| self.weight(i, v) > T::zero());
        let backward = self.reach(|v, j| self.weight(v, j) > T::zero());
        forward == n && backward == n
    }

    fn reach(&self, edge: impl Fn(usize, usize) -> bool) -> usize {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for u in 0..self.n {
                if !seen[u] && edge(v, u) {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count
    }
}

/// Solution of `AᵀP + PA = Q` for the augmented matrix `A`.
#[derive(Debug, Clone)]
pub struct LyapunovPair {
    pub p: DMatrix<f64>,
    pub q: DMatrix<f64>,
    /// Operator 2-norm of `AᵀP + PA − Q`.
    pub residual: f64,
}

impl LyapunovPair {
    pub fn lambda_min_q(&self) -> f64 {
        self.q.clone().symmetric_eigen().eigenvalues.min()
    }

    pub fn lambda_max_p(&self) -> f64 {
        self.p.clone().symmetric_eigen().eigenvalues.max()
    }
}

const LYAP_RELATIVE_TOL: f64 = 1e-8;
const SIGN_MAX_ITERS: usize = 100;

/// Lyapunov pair for the augmented matrix of a strongly connected graph.
/// `q` defaults to the identity.
pub fn lyapunov_pair<T: Scalar>(
    g: &DirectedGraph<T>,
    q: Option<&DMatrix<f64>>,
) -> Result<LyapunovPair> {
    if !g.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }
    let a = g.to_f64().augmented_matrix();
    let m = a.nrows();
    let q = match q {
        Some(q) => q.clone(),
        None => DMatrix::identity(m, m),
    };
    if q.nrows() != m || q.ncols() != m {
        return Err(Error::ShapeMismatch(format!(
            "Q is {}x{}, expected {m}x{m}",
            q.nrows(),
            q.ncols()
        )));
    }
    if (&q - q.transpose()).amax() > 1e-12 * q.amax().max(1.0) {
        return Err(Error::Validation("Q must be symmetric".into()));
    }
    if q.clone().cholesky().is_none() {
        return Err(Error::Validation("Q must be positive definite".into()));
    }

    let (p, residual) = solve_continuous_lyapunov(&a, &q)?;
    Ok(LyapunovPair { p, q, residual })
}

/// Solves `AᵀP + PA = Q` for `A` with spectrum in the open right
/// half-plane and symmetric positive definite `Q`. Returns `P` and the
/// operator-norm residual.
///
/// Matrix-sign Newton iteration: with `M₀ = Aᵀ`, `Q₀ = Q`, the updates
/// `M ← (M + M⁻¹)/2` and `Q ← (Q + M⁻¹QM⁻ᵀ)/2` keep `MP + PMᵀ = Q`
/// invariant while `M → I`, so `P = Q_∞ / 2`.
pub fn solve_continuous_lyapunov(
    a: &DMatrix<f64>,
    q: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, f64)> {
    let m = a.nrows();
    let identity = DMatrix::<f64>::identity(m, m);
    let mut sign = a.transpose();
    let mut rhs = q.clone();
    let mut converged = false;
    for _ in 0..SIGN_MAX_ITERS {
        let inv = sign
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SolverFailure("singular iterate in sign iteration".into()))?;
        rhs = (&rhs + &inv * &rhs * inv.transpose()) * 0.5;
        sign = (&sign + &inv) * 0.5;
        if (&sign - &identity).norm() <= 1e-13 * (m as f64).sqrt() {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::SolverFailure(
            "sign iteration did not converge (spectrum not in the right half-plane?)".into(),
        ));
    }
    let p = &rhs * 0.5;
    let p = (&p + p.transpose()) * 0.5;

    let residual = operator_norm(&(a.transpose() * &p + &p * a - q));
    let q_norm = operator_norm(q);
    if !(residual <= LYAP_RELATIVE_TOL * q_norm) {
        return Err(Error::SolverFailure(format!(
            "residual {residual:e} exceeds tolerance relative to |Q| = {q_norm}"
        )));
    }
    if p.clone().cholesky().is_none() {
        return Err(Error::SolverFailure("P is not positive definite".into()));
    }
    Ok((p, residual))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().singular_values().max()
}

/// `‖L‖₂` of the graph Laplacian.
pub fn laplacian_norm<T: Scalar>(g: &DirectedGraph<T>) -> f64 {
    operator_norm(&g.to_f64().laplacian())
}

/// Eigenvalues of `L ⊗ I_n + B₀`.
pub fn augmented_spectrum<T: Scalar>(g: &DirectedGraph<T>) -> Vec<Complex<f64>> {
    g.to_f64()
        .augmented_matrix()
        .complex_eigenvalues()
        .iter()
        .copied()
        .collect()
}
