//! Brute-force ground truth on small instances.
//!
//! Dense generators are solved with Grassmann–Taksar–Heyman style
//! elimination: every pivot is recomputed as a sum of off-diagonal rates
//! instead of by subtraction, so the stationary masses and passage-time
//! moments keep full relative accuracy even when they span hundreds of
//! orders of magnitude.

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::model::{enumerate_rates, ColumnState, MatrixParams, SingleColumnParams};

/// Largest state space accepted by the dense solvers.
pub const MAX_DENSE_STATES: usize = 1 << 16;

/// Largest matrix-chain state space built by [`DenseGenerator::matrix_model`];
/// the solvers are cubic in the state count.
pub const MAX_MATRIX_CELLS: usize = 12;

/// Generator matrix of a finite chain, row-major, with diagonal equal to
/// minus the off-diagonal row sum.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseGenerator {
    n: usize,
    rates: Vec<f64>,
}

impl DenseGenerator {
    /// Builds a generator from off-diagonal rates; diagonal input is ignored.
    pub fn from_rates(n: usize, mut rates: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_DENSE_STATES {
            return Err(Error::TooLarge(format!("{n} states (limit {MAX_DENSE_STATES})")));
        }
        if rates.len() != n * n {
            return Err(Error::InvalidParameter(format!("{} rates for {n} states", rates.len())));
        }
        for i in 0..n {
            let mut out = 0.0;
            for j in 0..n {
                if i == j {
                    continue;
                }
                let r = rates[i * n + j];
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(Error::InvalidParameter(format!("rate ({i},{j}) = {r}")));
                }
                out += r;
            }
            rates[i * n + i] = -out;
        }
        Ok(Self { n, rates })
    }

    /// Single-column chain on `{0, …, M}`; state index equals the count.
    pub fn single_column(params: &SingleColumnParams) -> Result<Self> {
        let n = params.m() + 1;
        let mut rates = vec![0.0; n * n];
        for k in 0..n {
            for (target, r) in enumerate_rates(ColumnState(k), params) {
                rates[k * n + target.count()] += r;
            }
        }
        Self::from_rates(n, rates)
    }

    /// Full matrix chain on all `2^{MN}` binary matrices; state index is the
    /// bitmask with bit `i·N + j` for entry `(i, j)`.
    pub fn matrix_model(params: &MatrixParams) -> Result<Self> {
        let (m, n) = (params.m(), params.n());
        let cells = m * n;
        if cells > MAX_MATRIX_CELLS {
            return Err(Error::TooLarge(format!("M·N = {cells} (limit {MAX_MATRIX_CELLS})")));
        }
        let size = 1usize << cells;
        let row_mask = |i: usize| ((1usize << n) - 1) << (i * n);
        let col_mask = |j: usize| (0..m).fold(0usize, |acc, i| acc | 1 << (i * n + j));
        let mut rates = vec![0.0; size * size];
        let row_rate = params.q() / m as f64;
        let col_rate = params.p() / n as f64;
        let entry_rate = params.lambda_m() / m as f64;
        for s in 0..size {
            let mut add = |t: usize, r: f64| {
                if t != s && r > 0.0 {
                    rates[s * size + t] += r;
                }
            };
            for i in 0..m {
                add(s | row_mask(i), row_rate);
            }
            for j in 0..n {
                add(s & !col_mask(j), col_rate);
            }
            for b in 0..cells {
                add(s | 1 << b, entry_rate);
            }
        }
        Self::from_rates(size, rates)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[from * self.n + to]
    }

    /// `max_j |(πQ)_j|`.
    pub fn residual(&self, pi: &[f64]) -> f64 {
        (0..self.n)
            .map(|j| (0..self.n).map(|i| pi[i] * self.rates[i * self.n + j]).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }
}

/// Solves `πQ = 0`, `Σπ = 1`.
pub fn stationary_solve(generator: &DenseGenerator) -> Result<Vec<f64>> {
    let n = generator.n;
    let mut a = generator.rates.clone();
    // Censor states n-1, n-2, …, 1 in turn.
    for k in (1..n).rev() {
        let s: f64 = (0..k).map(|j| a[k * n + j]).sum();
        if !(s > 0.0) {
            return Err(Error::Reducible(format!("state {k} cannot reach lower-indexed states")));
        }
        for i in 0..k {
            let f = a[i * n + k] / s;
            if f == 0.0 {
                continue;
            }
            for j in 0..k {
                if i != j {
                    a[i * n + j] += f * a[k * n + j];
                }
            }
        }
    }
    let mut pi = vec![0.0; n];
    pi[0] = 1.0;
    for k in 1..n {
        let s: f64 = (0..k).map(|j| a[k * n + j]).sum();
        pi[k] = (0..k).map(|i| pi[i] * a[i * n + k]).sum::<f64>() / s;
    }
    let total: f64 = pi.iter().sum();
    pi.iter_mut().for_each(|x| *x /= total);
    Ok(pi)
}

/// First and second moments of the time to hit `targets`, for every start.
pub fn hitting_moments(generator: &DenseGenerator, targets: &[usize]) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = generator.n;
    let mut is_target = vec![false; n];
    for &t in targets {
        if t >= n {
            return Err(Error::IndexOutOfRange { what: "target state", index: t, limit: n });
        }
        is_target[t] = true;
    }
    let transient: Vec<usize> = (0..n).filter(|&i| !is_target[i]).collect();
    let tn = transient.len();
    // off-diagonal rates among transient states and exit rates into targets
    let mut a = vec![0.0; tn * tn];
    let mut exit = vec![0.0; tn];
    for (ri, &i) in transient.iter().enumerate() {
        for (rj, &j) in transient.iter().enumerate() {
            if i != j {
                a[ri * tn + rj] = generator.rate(i, j);
            }
        }
        exit[ri] = (0..n).filter(|&j| is_target[j]).map(|j| generator.rate(i, j)).sum();
    }
    let elim = eliminate(a, exit, tn)?;
    let mut mean_t = elim.solve(&vec![1.0; tn]);
    let rhs: Vec<f64> = mean_t.iter().map(|m| 2.0 * m).collect();
    let mut second_t = elim.solve(&rhs);

    let mut mean = vec![0.0; n];
    let mut second = vec![0.0; n];
    for (ri, &i) in transient.iter().enumerate() {
        mean[i] = std::mem::take(&mut mean_t[ri]);
        second[i] = std::mem::take(&mut second_t[ri]);
    }
    Ok((mean, second))
}

struct Elimination {
    n: usize,
    // eliminated off-diagonal rates (upper part used in back substitution,
    // lower part as multipliers)
    a: Vec<f64>,
    pivots: Vec<f64>,
}

fn eliminate(mut a: Vec<f64>, mut exit: Vec<f64>, n: usize) -> Result<Elimination> {
    let mut pivots = vec![0.0; n];
    for k in 0..n {
        let d: f64 = ((k + 1)..n).map(|j| a[k * n + j]).sum::<f64>() + exit[k];
        if !(d > 0.0) {
            return Err(Error::Singular(format!("transient state {k} cannot reach the target")));
        }
        pivots[k] = d;
        for i in (k + 1)..n {
            let f = a[i * n + k] / d;
            if f == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                if j != i {
                    a[i * n + j] += f * a[k * n + j];
                }
            }
            exit[i] += f * exit[k];
        }
    }
    Ok(Elimination { n, a, pivots })
}

impl Elimination {
    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut b = rhs.to_vec();
        for k in 0..n {
            let bk = b[k] / self.pivots[k];
            for i in (k + 1)..n {
                b[i] += self.a[i * n + k] * bk;
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let s: f64 = ((k + 1)..n).map(|j| self.a[k * n + j] * x[j]).sum();
            x[k] = (b[k] + s) / self.pivots[k];
        }
        x
    }
}

/// Largest `2^N · N · k` work accepted by [`coupon_enumerate`].
pub const COUPON_WORK_CAP: u128 = 100_000_000;

/// Exact probability that `k` uniform draws from `N` coupons see all of
/// them.
///
/// All `N^k` draw sequences are enumerated, aggregated by the set of
/// coupons seen so far, with exact integer counts.
pub fn coupon_enumerate(n: usize, k: usize) -> Result<Ratio<BigUint>> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one coupon".into()));
    }
    let work = (1u128 << n.min(127)) * n as u128 * k.max(1) as u128;
    if n > 30 || work > COUPON_WORK_CAP {
        return Err(Error::TooLarge(format!("coupon enumeration with N={n}, k={k}")));
    }
    let full = (1usize << n) - 1;
    let mut counts = vec![BigUint::zero(); 1 << n];
    counts[0] = BigUint::one();
    for _ in 0..k {
        let mut next = vec![BigUint::zero(); 1 << n];
        for (mask, c) in counts.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for coupon in 0..n {
                next[mask | 1 << coupon] += c;
            }
        }
        counts = next;
    }
    let total = BigUint::from(n).pow(k as u32);
    Ok(Ratio::new(std::mem::take(&mut counts[full]), total))
}

/// Nearest `f64` to an exact ratio.
pub fn ratio_to_f64(r: &Ratio<BigUint>) -> f64 {
    // scale to keep 64 significant bits before dividing
    let (num, den) = (r.numer(), r.denom());
    if num.is_zero() {
        return 0.0;
    }
    let shift = den.bits().saturating_sub(num.bits()) + 64;
    let scaled = (num << shift) / den;
    scaled.to_f64().unwrap_or(f64::NAN) / 2f64.powi(shift as i32)
}
