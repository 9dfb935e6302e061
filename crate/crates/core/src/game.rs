//! Games with scalar actions: costs, partial gradients and action sets.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Closed interval `[lo, hi]`; serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(T, T)", into = "(T, T)")]
#[serde(bound = "T: Scalar")]
pub struct ActionInterval<T> {
    lo: T,
    hi: T,
}

impl<T: Scalar> ActionInterval<T> {
    pub fn new(lo: T, hi: T) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Validation(format!(
                "action interval [{lo}, {hi}] needs lo <= hi"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> T {
        self.lo
    }

    pub fn hi(&self) -> T {
        self.hi
    }

    pub fn midpoint(&self) -> T {
        if self.lo.is_infinite() || self.hi.is_infinite() {
            return match (self.lo.is_infinite(), self.hi.is_infinite()) {
                (true, true) => T::zero(),
                (true, false) => self.hi,
                _ => self.lo,
            };
        }
        (self.lo + self.hi) / T::lit(2.0)
    }

    pub fn contains(&self, v: T) -> bool {
        v >= self.lo && v <= self.hi
    }

    /// Euclidean projection onto the interval.
    #[inline]
    pub fn project(&self, v: T) -> T {
        v.max(self.lo).min(self.hi)
    }
}

impl<T: Scalar> TryFrom<(T, T)> for ActionInterval<T> {
    type Error = Error;

    fn try_from((lo, hi): (T, T)) -> Result<Self> {
        Self::new(lo, hi)
    }
}

impl<T> From<ActionInterval<T>> for (T, T) {
    fn from(iv: ActionInterval<T>) -> Self {
        (iv.lo, iv.hi)
    }
}

/// A per-player parameter given either once for everybody or as a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PerPlayer<V> {
    Uniform(V),
    Each(Vec<V>),
}

impl<V: Clone> PerPlayer<V> {
    pub fn resolve(&self, n: usize, field: &str) -> Result<Vec<V>> {
        match self {
            PerPlayer::Uniform(v) => Ok(vec![v.clone(); n]),
            PerPlayer::Each(vs) if vs.len() == n => Ok(vs.clone()),
            PerPlayer::Each(vs) => Err(Error::Validation(format!(
                "{field} has {} entries, expected {n}",
                vs.len()
            ))),
        }
    }
}

impl<V> From<Vec<V>> for PerPlayer<V> {
    fn from(v: Vec<V>) -> Self {
        PerPlayer::Each(v)
    }
}

/// Scalar-action game. `y_i` arguments are player `i`'s estimate of the
/// full action profile, so `partial_gradient(i, x)` at the true profile is
/// component `i` of the pseudo-gradient.
pub trait Game<T: Scalar> {
    fn n(&self) -> usize;

    fn interval(&self, i: usize) -> ActionInterval<T>;

    fn cost(&self, i: usize, x: &[T]) -> T;

    /// `∂f_i/∂x_i` evaluated at `y_i`.
    fn partial_gradient(&self, i: usize, y_i: &[T]) -> Result<T>;

    /// Jacobian of the pseudo-gradient when it is affine in the actions.
    fn affine_jacobian(&self) -> Option<DMatrix<f64>> {
        None
    }

    fn pseudo_gradient(&self, x: &[T]) -> Result<Vec<T>> {
        (0..self.n()).map(|i| self.partial_gradient(i, x)).collect()
    }

    fn intervals(&self) -> Vec<ActionInterval<T>> {
        (0..self.n()).map(|i| self.interval(i)).collect()
    }

    /// Projects a profile onto the product of action sets.
    fn project_profile(&self, v: &[T]) -> Vec<T> {
        v.iter()
            .enumerate()
            .map(|(i, &vi)| self.interval(i).project(vi))
            .collect()
    }
}

/// Spectral efficiency (bits/s/Hz) of uncoded square QAM at received SNR
/// `s_db` (dB) and target bit-error rate `ber_target`.
pub fn spectral_efficiency<T: Scalar>(s_db: T, ber_target: T) -> Result<T> {
    if !(ber_target > T::zero() && ber_target < T::lit(0.2)) {
        return Err(Error::Domain(format!(
            "target BER {ber_target} must lie in (0, 0.2)"
        )));
    }
    let s_lin = T::lit(10.0).powf(s_db / T::lit(10.0));
    let gap = (T::lit(0.2) / ber_target).ln();
    Ok((T::one() + T::lit(1.5) * s_lin / gap).log2())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct SpectrumGameParams<T> {
    pub n: usize,
    pub m_c: PerPlayer<T>,
    pub q: PerPlayer<T>,
    pub r: PerPlayer<T>,
    pub s_db: PerPlayer<T>,
    pub ber_target: PerPlayer<T>,
    #[serde(default = "one")]
    pub tau: T,
    pub intervals: PerPlayer<ActionInterval<T>>,
}

fn one<T: Scalar>() -> T {
    T::one()
}

/// Spectrum access oligopoly: player `i` leases `x_i` units at price
/// `p_i(x) = m_i + q_i (Σ x_j)^τ` and earns `r_i u_i` per unit, so
/// `f_i(x) = x_i p_i(x) − r_i u_i x_i`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "SpectrumGameParams<T>", into = "SpectrumGameParams<T>")]
#[serde(bound = "T: Scalar")]
pub struct SpectrumGame<T> {
    m_c: Vec<T>,
    q: Vec<T>,
    r: Vec<T>,
    s_db: Vec<T>,
    ber_target: Vec<T>,
    tau: T,
    intervals: Vec<ActionInterval<T>>,
    efficiency: Vec<T>,
}

impl<T: Scalar> TryFrom<SpectrumGameParams<T>> for SpectrumGame<T> {
    type Error = Error;

    fn try_from(p: SpectrumGameParams<T>) -> Result<Self> {
        Self::new(p)
    }
}

impl<T: Scalar> From<SpectrumGame<T>> for SpectrumGameParams<T> {
    fn from(g: SpectrumGame<T>) -> Self {
        SpectrumGameParams {
            n: g.m_c.len(),
            m_c: g.m_c.into(),
            q: g.q.into(),
            r: g.r.into(),
            s_db: g.s_db.into(),
            ber_target: g.ber_target.into(),
            tau: g.tau,
            intervals: g.intervals.into(),
        }
    }
}

impl<T: Scalar> SpectrumGame<T> {
    pub fn new(p: SpectrumGameParams<T>) -> Result<Self> {
        let n = p.n;
        if n < 2 {
            return Err(Error::Validation("spectrum game needs n >= 2".into()));
        }
        let m_c = p.m_c.resolve(n, "m_c")?;
        let q = p.q.resolve(n, "q")?;
        let r = p.r.resolve(n, "r")?;
        let s_db = p.s_db.resolve(n, "s_db")?;
        let ber_target = p.ber_target.resolve(n, "ber_target")?;
        let intervals = p.intervals.resolve(n, "intervals")?;
        if let Some(i) = q.iter().position(|&v| !(v > T::zero())) {
            return Err(Error::Validation(format!("q[{i}] must be positive")));
        }
        if let Some(i) = r.iter().position(|&v| !(v >= T::zero())) {
            return Err(Error::Validation(format!("r[{i}] must be nonnegative")));
        }
        if !(p.tau >= T::one()) {
            return Err(Error::Validation(format!("tau = {} must be >= 1", p.tau)));
        }
        if p.tau > T::one() {
            if let Some(i) = intervals.iter().position(|iv| iv.lo() < T::zero()) {
                return Err(Error::Validation(format!(
                    "tau > 1 requires nonnegative action sets; interval {i} starts below 0"
                )));
            }
        }
        let efficiency = s_db
            .iter()
            .zip(&ber_target)
            .map(|(&s, &b)| spectral_efficiency(s, b))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Validation(e.to_string()))?;
        Ok(Self {
            m_c,
            q,
            r,
            s_db,
            ber_target,
            tau: p.tau,
            intervals,
            efficiency,
        })
    }

    /// Spectral efficiency `u_i` of each player.
    pub fn efficiency(&self) -> &[T] {
        &self.efficiency
    }

    pub fn tau(&self) -> T {
        self.tau
    }

    pub fn price(&self, i: usize, x: &[T]) -> T {
        let total = x.iter().fold(T::zero(), |a, &v| a + v);
        self.m_c[i] + self.q[i] * total.powf(self.tau)
    }
}

impl<T: Scalar> Game<T> for SpectrumGame<T> {
    fn n(&self) -> usize {
        self.m_c.len()
    }

    fn interval(&self, i: usize) -> ActionInterval<T> {
        self.intervals[i]
    }

    fn cost(&self, i: usize, x: &[T]) -> T {
        x[i] * self.price(i, x) - self.r[i] * self.efficiency[i] * x[i]
    }

    fn partial_gradient(&self, i: usize, y_i: &[T]) -> Result<T> {
        let total = y_i.iter().fold(T::zero(), |a, &v| a + v);
        let revenue = self.r[i] * self.efficiency[i];
        if self.tau == T::one() {
            return Ok(self.m_c[i] + self.q[i] * total + self.q[i] * y_i[i] - revenue);
        }
        if total < T::zero() {
            return Err(Error::Domain(format!(
                "estimated total spectrum {total} < 0 with tau = {}",
                self.tau
            )));
        }
        let marginal = self.q[i] * self.tau * total.powf(self.tau - T::one());
        Ok(self.m_c[i] + self.q[i] * total.powf(self.tau) + y_i[i] * marginal - revenue)
    }

    fn affine_jacobian(&self) -> Option<DMatrix<f64>> {
        if self.tau != T::one() {
            return None;
        }
        let n = self.n();
        Some(DMatrix::from_fn(n, n, |i, j| {
            let q = self.q[i].as_f64();
            if i == j {
                2.0 * q
            } else {
                q
            }
        }))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, bound = "T: Scalar")]
pub struct QuadraticGameParams<T> {
    pub n: usize,
    pub diag_a: PerPlayer<T>,
    /// `n × n`, zero diagonal. Omitted means decoupled.
    #[serde(default)]
    pub cross: Option<Vec<Vec<T>>>,
    pub offset: PerPlayer<T>,
    pub intervals: PerPlayer<ActionInterval<T>>,
}

/// `f_i(x) = ½ a_i x_i² + x_i Σ_{j≠i} C_ij x_j + b_i x_i`, whose
/// pseudo-gradient is `(diag(a) + C) x + b`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "QuadraticGameParams<T>", into = "QuadraticGameParams<T>")]
#[serde(bound = "T: Scalar")]
pub struct QuadraticGame<T> {
    diag_a: Vec<T>,
    cross: Vec<Vec<T>>,
    offset: Vec<T>,
    intervals: Vec<ActionInterval<T>>,
}

impl<T: Scalar> TryFrom<QuadraticGameParams<T>> for QuadraticGame<T> {
    type Error = Error;

    fn try_from(p: QuadraticGameParams<T>) -> Result<Self> {
        Self::new(p)
    }
}

impl<T: Scalar> From<QuadraticGame<T>> for QuadraticGameParams<T> {
    fn from(g: QuadraticGame<T>) -> Self {
        QuadraticGameParams {
            n: g.diag_a.len(),
            diag_a: g.diag_a.into(),
            cross: Some(g.cross),
            offset: g.offset.into(),
            intervals: g.intervals.into(),
        }
    }
}

impl<T: Scalar> QuadraticGame<T> {
    pub fn new(p: QuadraticGameParams<T>) -> Result<Self> {
        let n = p.n;
        if n < 2 {
            return Err(Error::Validation("quadratic game needs n >= 2".into()));
        }
        let diag_a = p.diag_a.resolve(n, "diag_a")?;
        if let Some(i) = diag_a.iter().position(|&v| !(v > T::zero())) {
            return Err(Error::Validation(format!("diag_a[{i}] must be positive")));
        }
        let cross = p.cross.unwrap_or_else(|| vec![vec![T::zero(); n]; n]);
        if cross.len() != n || cross.iter().any(|row| row.len() != n) {
            return Err(Error::Validation(format!("cross must be {n}x{n}")));
        }
        if let Some(i) = (0..n).find(|&i| cross[i][i] != T::zero()) {
            return Err(Error::Validation(format!(
                "cross[{i}][{i}] must be zero (own curvature lives in diag_a)"
            )));
        }
        Ok(Self {
            diag_a,
            cross,
            offset: p.offset.resolve(n, "offset")?,
            intervals: p.intervals.resolve(n, "intervals")?,
        })
    }

    /// Convenience constructor with one interval shared by all players.
    pub fn with_box(diag_a: Vec<T>, cross: Vec<Vec<T>>, offset: Vec<T>, interval: ActionInterval<T>) -> Result<Self> {
        Self::new(QuadraticGameParams {
            n: diag_a.len(),
            diag_a: diag_a.into(),
            cross: Some(cross),
            offset: offset.into(),
            intervals: PerPlayer::Uniform(interval),
        })
    }
}

impl<T: Scalar> Game<T> for QuadraticGame<T> {
    fn n(&self) -> usize {
        self.diag_a.len()
    }

    fn interval(&self, i: usize) -> ActionInterval<T> {
        self.intervals[i]
    }

    fn cost(&self, i: usize, x: &[T]) -> T {
        let coupling = (0..self.n())
            .filter(|&j| j != i)
            .fold(T::zero(), |a, j| a + self.cross[i][j] * x[j]);
        T::lit(0.5) * self.diag_a[i] * x[i] * x[i] + x[i] * coupling + self.offset[i] * x[i]
    }

    fn partial_gradient(&self, i: usize, y_i: &[T]) -> Result<T> {
        let coupling = (0..self.n())
            .filter(|&j| j != i)
            .fold(T::zero(), |a, j| a + self.cross[i][j] * y_i[j]);
        Ok(self.diag_a[i] * y_i[i] + coupling + self.offset[i])
    }

    fn affine_jacobian(&self) -> Option<DMatrix<f64>> {
        let n = self.n();
        Some(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.diag_a[i].as_f64()
            } else {
                self.cross[i][j].as_f64()
            }
        }))
    }
}

/// Game definition as it appears in a scenario: `{"kind": "spectrum", ...}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
#[serde(bound = "T: Scalar")]
pub enum GameSpec<T> {
    Spectrum(SpectrumGame<T>),
    Quadratic(QuadraticGame<T>),
}

impl<T: Scalar> GameSpec<T> {
    fn inner(&self) -> &dyn Game<T> {
        match self {
            GameSpec::Spectrum(g) => g,
            GameSpec::Quadratic(g) => g,
        }
    }
}

impl<T: Scalar> Game<T> for GameSpec<T> {
    fn n(&self) -> usize {
        self.inner().n()
    }

    fn interval(&self, i: usize) -> ActionInterval<T> {
        self.inner().interval(i)
    }

    fn cost(&self, i: usize, x: &[T]) -> T {
        self.inner().cost(i, x)
    }

    fn partial_gradient(&self, i: usize, y_i: &[T]) -> Result<T> {
        self.inner().partial_gradient(i, y_i)
    }

    fn affine_jacobian(&self) -> Option<DMatrix<f64>> {
        self.inner().affine_jacobian()
    }
}

/// Strong-monotonicity and Lipschitz constants of a game's pseudo-gradient.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GameConstants {
    pub mu: f64,
    pub lbar: f64,
    pub l: Vec<f64>,
    /// `false` when the values are Monte-Carlo estimates rather than exact.
    pub exact: bool,
}

const CONSTANTS_SEED: u64 = 0x5eed_c0de;

/// Exact constants for affine pseudo-gradients; otherwise sampled
/// estimates over `probe_box` (a lower estimate of `μ`'s witness ratio and
/// upper estimates of each `l_i`).
pub fn estimate_constants<T: Scalar, G: Game<T> + ?Sized>(
    game: &G,
    probe_box: &[ActionInterval<T>],
    samples: usize,
) -> Result<GameConstants> {
    let n = game.n();
    let constants = match game.affine_jacobian() {
        Some(j) => {
            let sym = (&j + j.transpose()) * 0.5;
            let mu = sym.symmetric_eigen().eigenvalues.min();
            let l: Vec<f64> = (0..n).map(|i| j.row(i).norm()).collect();
            let lbar = l.iter().copied().fold(0.0, f64::max);
            GameConstants {
                mu,
                lbar,
                l,
                exact: true,
            }
        }
        None => {
            if samples < 2 {
                return Err(Error::Validation("need at least 2 samples".into()));
            }
            if probe_box.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "probe box has {} intervals for {n} players",
                    probe_box.len()
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(CONSTANTS_SEED);
            let draw = |rng: &mut ChaCha8Rng| -> Vec<T> {
                probe_box
                    .iter()
                    .map(|iv| {
                        let u = T::lit(rng.random::<f64>());
                        iv.lo() + u * (iv.hi() - iv.lo())
                    })
                    .collect()
            };
            let mut mu = f64::INFINITY;
            let mut l = vec![0.0f64; n];
            for _ in 0..samples {
                let x = draw(&mut rng);
                let y = draw(&mut rng);
                let fx = game.pseudo_gradient(&x)?;
                let fy = game.pseudo_gradient(&y)?;
                let dist_sq: f64 = x.iter().zip(&y).map(|(a, b)| (*a - *b).as_f64().powi(2)).sum();
                if dist_sq == 0.0 {
                    continue;
                }
                let inner: f64 = (0..n)
                    .map(|i| (x[i] - y[i]).as_f64() * (fx[i] - fy[i]).as_f64())
                    .sum();
                mu = mu.min(inner / dist_sq);
                for i in 0..n {
                    l[i] = l[i].max((fx[i] - fy[i]).as_f64().abs() / dist_sq.sqrt());
                }
            }
            let lbar = l.iter().copied().fold(0.0, f64::max);
            GameConstants {
                mu,
                lbar,
                l,
                exact: false,
            }
        }
    };
    if !(constants.mu > 0.0) {
        return Err(Error::NonMonotone { mu: constants.mu });
    }
    Ok(constants)
}
