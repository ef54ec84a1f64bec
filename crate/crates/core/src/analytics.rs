//! Closed-form and asymptotic quantities for both chains.
//!
//! Exact values are Gamma-function ratios evaluated through
//! [`ln_gamma_ratio_diff`](crate::gamma::ln_gamma_ratio_diff); asymptotic values are
//! the leading-order expressions and are tagged as such in
//! [`ClosedFormReport`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gamma::{gamma, ln_gamma_ratio_diff};
use crate::model::{ColumnState, MatrixParams, SingleColumnParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Exact,
    Asymptotic,
}

/// Which formula produced a reported value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaId {
    /// Invariant pmf of the single column as a Gamma ratio.
    InvariantPmf,
    /// Ratio of invariant masses with `k` zeros and with none.
    ZeroCountRatio,
    /// `k^{a-1}/Γ(a)` growth of the zero-count ratio.
    ZeroCountPowerLaw,
    /// Mean hitting time of `M` from the telescoped recursion.
    HittingMeanRecursion,
    /// `M^{a+1}/(Γ(a+1)·a)`.
    HittingMeanLeadingOrder,
    /// Variance of the hitting time from the second-moment recursion.
    HittingVarianceRecursion,
    /// Laplace transform of the continuous-time coupon collection time.
    CollectionLaplace,
    /// Steady-state probability that a fixed column is all ones.
    SteadyColumnGammaRatio,
    /// `N·Γ(1+b̃)·M^{-b̃}`, the Stirling form of the exact ratio.
    SteadyCountStirling,
    /// `N·Γ(1+b̃)·(M/q̃)^{-b̃}`, the scaling stated with the phase-transition result.
    SteadyCountRescaled,
    /// `M·ln(M)/q̃`.
    TransitionTime,
    /// Probability that a fixed column is all ones at a finite time from
    /// the all-zero start, by quadrature over the column's fill time.
    TransientColumnIntegral,
}

/// A computed value with its provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosedFormReport {
    pub value: f64,
    pub method: Method,
    pub formula_id: FormulaId,
}

impl ClosedFormReport {
    fn exact(value: f64, formula_id: FormulaId) -> Self {
        Self { value, method: Method::Exact, formula_id }
    }

    fn asymptotic(value: f64, formula_id: FormulaId) -> Self {
        Self { value, method: Method::Asymptotic, formula_id }
    }
}

/// Invariant law of the single-column chain over `{0, …, M}`.
///
/// `π_k = Γ(M+1)/Γ(M+1−k) · Γ(β+M−k)/Γ(β+M) · p/(p+αq)` with `β = pM/(αq)`.
pub fn invariant_pmf(params: &SingleColumnParams) -> Vec<f64> {
    let m = params.m() as f64;
    let beta = params.a();
    let pi0 = params.p() / (params.p() + params.alpha() * params.q());
    let mut pmf: Vec<f64> = (0..=params.m())
        .map(|k| {
            let k = k as f64;
            // [lnΓ(M+1) − lnΓ(M+1−k)] − [lnΓ(β+M) − lnΓ(β+M−k)]
            pi0 * ln_gamma_ratio_diff(beta + m - k, 1.0 - beta, k).exp()
        })
        .collect();
    // the formula sums to one analytically; fold rounding drift back in
    let total: f64 = pmf.iter().sum();
    if (total - 1.0).abs() > 1e-15 {
        pmf.iter_mut().for_each(|x| *x /= total);
    }
    pmf
}

/// `π_{M−k}/π_M = Γ(β+k)/(Γ(k+1)·Γ(β))`.
pub fn zero_count_ratio(params: &SingleColumnParams, k: usize) -> Result<ClosedFormReport> {
    if k > params.m() {
        return Err(Error::IndexOutOfRange { what: "zero count", index: k, limit: params.m() });
    }
    let beta = params.a();
    let k = k as f64;
    let v = ln_gamma_ratio_diff(1.0, beta - 1.0, k).exp();
    Ok(ClosedFormReport::exact(v, FormulaId::ZeroCountRatio))
}

/// Leading-order growth `k^{a−1}/Γ(a)` of [`zero_count_ratio`].
pub fn zero_count_ratio_asymptotic(params: &SingleColumnParams, k: usize) -> ClosedFormReport {
    let a = params.a();
    ClosedFormReport::asymptotic((k as f64).powf(a - 1.0) / gamma(a), FormulaId::ZeroCountPowerLaw)
}

/// Uniformized jump chain of the single column: `(p′, q′, Λ)` with
/// `p′ = p/Λ`, `q′ = αq/Λ`, `Λ = αq + p`.
///
/// In one step the chain resets with probability `p′`, moves up with
/// probability `q′(1 − k/M)` and otherwise stays put.
pub fn uniformized(params: &SingleColumnParams) -> (f64, f64, f64) {
    let rate = params.uniformization_rate();
    (params.p() / rate, params.alpha() * params.q() / rate, rate)
}

/// Expected number of uniformized steps to reach `M`, for every start.
fn hitting_steps(params: &SingleColumnParams) -> Vec<f64> {
    let m = params.m();
    let mf = m as f64;
    let (p1, q1, _) = uniformized(params);
    let a = params.a();
    // 1 + p′f(0) = Γ(M+1+a)/(Γ(a+1)Γ(M+1))
    let ln_g = ln_gamma_ratio_diff(1.0, a, mf);
    let g = ln_g.exp();
    let mut f = vec![0.0; m + 1];
    // f(M−i) = (M·G + q′i·f(M−i+1)) / (p′M + q′i), from the top down
    for i in 1..=m {
        let fi = i as f64;
        f[m - i] = (mf * g + q1 * fi * f[m - i + 1]) / (p1 * mf + q1 * fi);
    }
    // the top-down pass ends at f(0); prefer the expm1 form there since
    // G − 1 cancels when a is small
    f[0] = ln_g.exp_m1() / p1;
    f
}

/// Mean continuous-time hitting time of `M` from `start`.
pub fn hitting_time_mean_exact(params: &SingleColumnParams, start: ColumnState) -> Result<ClosedFormReport> {
    let start = ColumnState::new(start.count(), params)?;
    let steps = hitting_steps(params);
    let (_, _, rate) = uniformized(params);
    Ok(ClosedFormReport::exact(steps[start.count()] / rate, FormulaId::HittingMeanRecursion))
}

/// `M^{a+1}/(Γ(a+1)·a)`.
///
/// Leading order as `M → ∞` with `a` fixed. At `α ≠ 1` the continuous-time
/// mean carries an extra factor `1/α`; [`hitting_time_mean_exact`] is the
/// reference there.
pub fn hitting_time_mean_asymptotic(params: &SingleColumnParams) -> ClosedFormReport {
    let a = params.a();
    let m = params.m() as f64;
    ClosedFormReport::asymptotic(m.powf(a + 1.0) / (gamma(a + 1.0) * a), FormulaId::HittingMeanLeadingOrder)
}

/// Variance of the continuous-time hitting time of `M` from `start`.
///
/// Solves the second-moment recursion
/// `g(i) = 2f(i) − 1 + p′g(0) + q′(i/M)g(i) + q′(1 − i/M)g(i+1)` on the
/// uniformized chain, writing `g(i) = u_i + v_i·g(0)` from the top down and
/// tracking `1 − v_i` directly so that no step subtracts nearly equal
/// numbers. Steps convert to time through `Var T = (Var S + E S)/Λ²`.
pub fn hitting_time_variance_exact(params: &SingleColumnParams, start: ColumnState) -> Result<ClosedFormReport> {
    let start = ColumnState::new(start.count(), params)?;
    let m = params.m();
    let mf = m as f64;
    let (_, q1, rate) = uniformized(params);
    let f = hitting_steps(params);
    let mut u = vec![0.0; m + 1];
    let mut w = vec![1.0; m + 1]; // w_i = 1 − v_i
    for i in (0..m).rev() {
        let fi = i as f64;
        let stay = 1.0 - q1 * fi / mf;
        let up = q1 * (1.0 - fi / mf);
        u[i] = (2.0 * f[i] - 1.0 + up * u[i + 1]) / stay;
        w[i] = up * w[i + 1] / stay;
    }
    let g0 = u[0] / w[0];
    let g = u[start.count()] + (1.0 - w[start.count()]) * g0;
    let fs = f[start.count()];
    let var_steps = if start.count() == m { 0.0 } else { g - fs * fs };
    Ok(ClosedFormReport::exact((var_steps + fs) / (rate * rate), FormulaId::HittingVarianceRecursion))
}

/// Probability that `k` uniform draws from `N` coupons see every coupon,
/// by inclusion–exclusion. Zero for `k < N`.
pub fn coupon_done_by_draws(n: usize, k: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one coupon".into()));
    }
    if k < n {
        return Ok(0.0);
    }
    let nf = n as f64;
    let mut binom = 1.0; // C(N, i), built up from i = 0
    let mut sum = 0.0;
    for i in 1..=n {
        binom *= (n - i + 1) as f64 / i as f64;
        let sign = if (n - i).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binom * (i as f64 / nf).powi(k as i32);
    }
    Ok(sum.clamp(0.0, 1.0))
}

/// Probability that all `N` coupons are collected by time `t` when draws
/// arrive at total rate `rate`: `(1 − e^{−rate·t/N})^N`.
pub fn coupon_done_by_time(n: usize, t: f64, rate: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one coupon".into()));
    }
    if !(rate > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("need rate > 0 and t >= 0, got rate={rate}, t={t}")));
    }
    let single = -(-rate * t / n as f64).exp_m1();
    Ok(single.powi(n as i32))
}

/// Smallest `c` accepted by [`coupon_tail_bounds`].
pub const COUPON_TAIL_MIN_C: f64 = 1.0;

/// Tail bounds for the number of draws `σ` to collect `n` coupons:
/// `P(σ < n ln n − cn) ≤ e^{−3c²/π²}` and `P(σ > n ln n + cn) ≤ e^{−c}`.
///
/// Returns `(lower_tail_bound, upper_tail_bound)`. The bounds are stated
/// for `c` beyond a fixed constant; inputs below [`COUPON_TAIL_MIN_C`] are
/// rejected.
pub fn coupon_tail_bounds(n: usize, c: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::InvalidParameter("need at least one coupon".into()));
    }
    if !(c >= COUPON_TAIL_MIN_C) {
        return Err(Error::InvalidParameter(format!("tail bounds need c >= {COUPON_TAIL_MIN_C}, got {c}")));
    }
    let pi2 = std::f64::consts::PI * std::f64::consts::PI;
    Ok(((-3.0 * c * c / pi2).exp(), (-c).exp()))
}

/// `E[e^{−αT}]` for the time `T` to collect `M` coupons drawn at total
/// rate `q`: `Γ(M+1)·Γ(1+Mα/q)/Γ(M+1+Mα/q)`.
pub fn collection_time_laplace(m: usize, q: f64, alpha: f64) -> Result<ClosedFormReport> {
    if m == 0 || !(q > 0.0) || !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("need M >= 1, q > 0, alpha >= 0 (M={m}, q={q}, alpha={alpha})")));
    }
    let mf = m as f64;
    let x = mf * alpha / q;
    let v = (-ln_gamma_ratio_diff(1.0, x, mf)).exp();
    Ok(ClosedFormReport::exact(v, FormulaId::CollectionLaplace))
}

/// Steady-state probability that a fixed column of the matrix chain is all
/// ones.
///
/// Every entry of the column is refilled at rate `q̃/M` and the column is
/// wiped at rate `p/N`, so the answer is the coupon Laplace transform
/// evaluated at `p/N` with draw rate `q̃`.
pub fn steady_allones_probability(params: &MatrixParams) -> ClosedFormReport {
    let v = collection_time_laplace(params.m(), params.q_tilde(), params.p() / params.n() as f64)
        .expect("validated parameters")
        .value;
    ClosedFormReport::exact(v, FormulaId::SteadyColumnGammaRatio)
}

/// Probability that a fixed column is all ones at time `t` when the chain
/// starts from the all-zero matrix.
///
/// Looking backwards from `t`, each entry of the column was last refilled
/// after an independent `Exp(q̃/M)` time and the column was last wiped after
/// an independent `Exp(p/N)` time. The column is full iff the slowest refill
/// `T` is younger than the wipe and happened after time 0, so the answer is
/// `E[e^{−(p/N)T}; T ≤ t]` with `P(T ≤ s) = (1 − e^{−q̃s/M})^M`. As
/// `t → ∞` this tends to [`steady_allones_probability`].
pub fn transient_allones_probability(params: &MatrixParams, t: f64) -> Result<ClosedFormReport> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidParameter(format!("time must be finite and >= 0, got {t}")));
    }
    let m = params.m() as i32;
    let r = params.q_tilde() / params.m() as f64;
    let c = params.p() / params.n() as f64;
    let cdf = |s: f64| (-(-r * s).exp_m1()).powi(m);
    // Integration by parts: e^{-ct}F(t) + c ∫_0^t e^{-cs} F(s) ds.
    const PANELS: usize = 20_000;
    let h = t / PANELS as f64;
    let f = |s: f64| (-c * s).exp() * cdf(s);
    let mut acc = f(0.0) + f(t);
    for i in 1..PANELS {
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    let v = (-c * t).exp() * cdf(t) + c * acc * h / 3.0;
    Ok(ClosedFormReport::exact(v, FormulaId::TransientColumnIntegral))
}

/// Which expression to use for the steady-state all-ones column count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMethod {
    /// `N` times the exact Gamma ratio.
    Exact,
    /// `N·Γ(1+b̃)/M^{b̃}`.
    Asymptotic,
    /// `N·Γ(1+b̃)/(M/q̃)^{b̃}`.
    AsymptoticRescaled,
}

/// Expected number of all-ones columns under the invariant law.
pub fn steady_allones_count(params: &MatrixParams, method: CountMethod) -> ClosedFormReport {
    let n = params.n() as f64;
    let m = params.m() as f64;
    let bt = params.b_tilde();
    match method {
        CountMethod::Exact => {
            ClosedFormReport::exact(n * steady_allones_probability(params).value, FormulaId::SteadyColumnGammaRatio)
        }
        CountMethod::Asymptotic => {
            ClosedFormReport::asymptotic(n * gamma(1.0 + bt) * m.powf(-bt), FormulaId::SteadyCountStirling)
        }
        CountMethod::AsymptoticRescaled => ClosedFormReport::asymptotic(
            n * gamma(1.0 + bt) * (m / params.q_tilde()).powf(-bt),
            FormulaId::SteadyCountRescaled,
        ),
    }
}

/// Predicted location `M·ln(M)/q̃` of the first full column.
pub fn transition_time_prediction(params: &MatrixParams) -> ClosedFormReport {
    let m = params.m() as f64;
    ClosedFormReport::asymptotic(m * m.ln() / params.q_tilde(), FormulaId::TransitionTime)
}

/// Maps the discrete-model parameters `(p_d, N, p_m, M)` onto the two
/// continuous chains.
///
/// Single column: `p = p_d/N`, `α = 1 + λ_m`. Matrix: `p = p_d`,
/// `λ_m = p_m·M`.
pub fn identify_parameters(p_d: f64, n: usize, p_m: f64, m: usize) -> Result<(SingleColumnParams, MatrixParams)> {
    if !(p_d > 0.0 && p_d < 1.0) {
        return Err(Error::InvalidParameter(format!("p_d must lie in (0,1), got {p_d}")));
    }
    if !(p_m >= 0.0 && p_m.is_finite()) {
        return Err(Error::InvalidParameter(format!("p_m must be >= 0, got {p_m}")));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let lambda_m = p_m * m as f64;
    let single = SingleColumnParams::new(m, 1.0 + lambda_m, p_d / n as f64)?;
    let matrix = MatrixParams::new(m, n, p_d, lambda_m)?;
    Ok((single, matrix))
}
