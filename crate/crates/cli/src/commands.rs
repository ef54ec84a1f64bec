//! The subcommands. Each turns a resolved [`RunConfig`] into an [`Output`];
//! nothing here writes to disk.

use immunolearn_core::analytics::{
    collection_time_laplace, coupon_done_by_draws, hitting_time_mean_asymptotic, hitting_time_mean_exact,
    hitting_time_variance_exact, invariant_pmf, steady_allones_count, steady_allones_probability,
    transient_allones_probability, transition_time_prediction, CountMethod, FormulaId,
};
use immunolearn_core::engine::{simulate_matrix, simulate_single_column, SimulationConfig, StopCondition};
use immunolearn_core::oracle::{coupon_enumerate, hitting_moments, ratio_to_f64, stationary_solve, DenseGenerator};
use immunolearn_core::sampler::{sample_invariant_batch, steady_state_histogram};
use immunolearn_core::stats::{empirical_distribution, empirical_tv, estimate_mean, sample_sd, transition_window};
use immunolearn_core::{ColumnState, MatrixParams, MatrixState, SingleColumnParams};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ModelKind, RunConfig};
use crate::error::CliError;
use crate::output::{num, Output, Table};

const CONFIDENCE: f64 = 0.95;

/// Refuse single-column runs whose expected work exceeds this many events.
const MAX_EXPECTED_EVENTS: f64 = 1e10;

fn header(command: &str, cfg: &RunConfig) -> serde_json::Map<String, Value> {
    let mut m = serde_json::Map::new();
    m.insert("command".into(), json!(command));
    m.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
    m.insert("config".into(), serde_json::to_value(cfg.effective()).expect("config serializes"));
    m
}

fn matrix_params_json(p: &MatrixParams) -> Value {
    json!({
        "M": p.m(), "N": p.n(), "p": p.p(), "q": p.q(), "lambda_m": p.lambda_m(),
        "q_tilde": p.q_tilde(), "b": p.b(), "b_tilde": p.b_tilde(),
    })
}

fn single_params_json(p: &SingleColumnParams) -> Value {
    json!({ "M": p.m(), "alpha": p.alpha(), "p": p.p(), "q": p.q(), "a": p.a() })
}

fn matrix_predictions(p: &MatrixParams) -> Value {
    json!({
        "steady_allones_probability": steady_allones_probability(p),
        "steady_allones_count_exact": steady_allones_count(p, CountMethod::Exact),
        "steady_allones_count_asymptotic": steady_allones_count(p, CountMethod::Asymptotic),
        "steady_allones_count_rescaled": steady_allones_count(p, CountMethod::AsymptoticRescaled),
        "transition_time": transition_time_prediction(p),
    })
}

fn estimate_json(samples: &[f64], seed: u64) -> Value {
    match estimate_mean(samples, CONFIDENCE, seed) {
        Ok(e) => serde_json::to_value(e).expect("estimate serializes"),
        Err(_) => Value::Null,
    }
}

fn require_matrix(cfg: &RunConfig, command: &str) -> Result<MatrixParams, CliError> {
    match cfg.model() {
        ModelKind::Matrix => cfg.matrix(),
        ModelKind::SingleColumn => Err(CliError::Config(format!("{command} needs --model matrix"))),
    }
}

pub fn simulate(cfg: &RunConfig) -> Result<Output, CliError> {
    match cfg.model() {
        ModelKind::Matrix => simulate_matrix_runs(cfg),
        ModelKind::SingleColumn => simulate_column_runs(cfg),
    }
}

fn simulate_matrix_runs(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.matrix()?;
    let reps = cfg.replicates()?;
    let seed = cfg.seed();
    let horizon = cfg.horizon()?.unwrap_or(1.5 * transition_time_prediction(&params).value);
    let trajs = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let sc = SimulationConfig::until_time(seed, r, horizon).with_series();
            simulate_matrix(&params, &sc, MatrixState::for_params(&params))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("trajectories", vec!["time", "all_ones_count", "replicate"]);
    for (r, t) in trajs.iter().enumerate() {
        for &(time, count) in &t.series {
            table.push(vec![num(time), count.to_string(), r.to_string()]);
        }
    }
    let finals: Vec<f64> = trajs.iter().map(|t| t.final_state.full_columns() as f64).collect();
    let hits: Vec<Option<f64>> = trajs.iter().map(|t| t.first_hit).collect();
    let mut predictions = matrix_predictions(&params);
    let transient = transient_allones_probability(&params, horizon)?;
    predictions["allones_count_at_horizon"] = json!({ "value": transient.value * params.n() as f64, "method": transient.method, "formula_id": transient.formula_id });

    let mut s = header("simulate", cfg);
    s.insert("params".into(), matrix_params_json(&params));
    s.insert("horizon".into(), json!(horizon));
    s.insert("predictions".into(), predictions);
    s.insert(
        "estimates".into(),
        json!({
            "allones_count_at_horizon": estimate_json(&finals, seed),
            "first_full_column": transition_window(&hits).ok(),
            "mean_events_per_replicate": trajs.iter().map(|t| t.n_events as f64).sum::<f64>() / reps as f64,
        }),
    );
    Ok(Output { summary: Value::Object(s), tables: vec![table], oracle_failures: Vec::new() })
}

fn simulate_column_runs(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = cfg.single_column()?;
    let reps = cfg.replicates()?;
    let seed = cfg.seed();
    let horizon = cfg.horizon()?;
    let mean = hitting_time_mean_exact(&params, ColumnState(0))?;
    if horizon.is_none() {
        let expected_events = mean.value * params.uniformization_rate() * reps as f64;
        if expected_events > MAX_EXPECTED_EVENTS {
            return Err(CliError::Config(format!(
                "expected hitting time {:.3e} is too long to simulate {reps} replicates; set a horizon",
                mean.value
            )));
        }
    }
    let trajs = (0..reps as u64)
        .into_par_iter()
        .map(|r| {
            let mut sc = match horizon {
                Some(h) => SimulationConfig::until_time(seed, r, h),
                None => SimulationConfig::until_hit(seed, r),
            };
            if horizon.is_none() {
                sc.stop = StopCondition::ColumnReachesM;
            }
            simulate_single_column(&params, &sc.with_series(), ColumnState(0))
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut table = Table::new("trajectories_single_column", vec!["time", "ones_count", "replicate"]);
    for (r, t) in trajs.iter().enumerate() {
        for &(time, count) in &t.series {
            table.push(vec![num(time), count.to_string(), r.to_string()]);
        }
    }
    let mut s = header("simulate", cfg);
    s.insert("params".into(), single_params_json(&params));
    s.insert(
        "predictions".into(),
        json!({
            "hitting_time_mean_exact": mean,
            "hitting_time_mean_asymptotic": hitting_time_mean_asymptotic(&params),
            "hitting_time_variance_exact": hitting_time_variance_exact(&params, ColumnState(0))?,
        }),
    );
    let estimates = match horizon {
        None => {
            let times: Vec<f64> = trajs.iter().filter_map(|t| t.first_hit).collect();
            json!({
                "hitting_time": estimate_json(&times, seed),
                "hitting_time_sd": if times.len() > 1 { json!(sample_sd(&times)) } else { Value::Null },
            })
        }
        Some(h) => {
            let mut occ = vec![0.0; params.m() + 1];
            for t in &trajs {
                occ.iter_mut().zip(&t.occupation).for_each(|(a, b)| *a += b);
            }
            let occ: Vec<f64> = occ.iter().map(|x| x / (h * reps as f64)).collect();
            let hits = trajs.iter().filter(|t| t.first_hit.is_some()).count();
            json!({
                "occupation_tv_to_invariant": empirical_tv(&occ, &invariant_pmf(&params))?,
                "fraction_hit_within_horizon": hits as f64 / reps as f64,
            })
        }
    };
    s.insert("estimates".into(), estimates);
    Ok(Output { summary: Value::Object(s), tables: vec![table], oracle_failures: Vec::new() })
}

pub fn sample_steady(cfg: &RunConfig) -> Result<Output, CliError> {
    let params = require_matrix(cfg, "sample-steady")?;
    let reps = cfg.replicates()?;
    let seed = cfg.seed();
    let draws = sample_invariant_batch(&params, reps, seed)?;
    let mut table = Table::new("steady_draws", vec!["replicate", "all_ones_count", "ones_count"]);
    for (r, d) in draws.iter().enumerate() {
        table.push(vec![r.to_string(), d.full_columns().to_string(), d.count_ones().to_string()]);
    }
    let counts: Vec<f64> = draws.iter().map(|d| d.full_columns() as f64).collect();
    let exact = steady_allones_count(&params, CountMethod::Exact).value;
    let mut s = header("sample-steady", cfg);
    s.insert("params".into(), matrix_params_json(&params));
    s.insert("predictions".into(), matrix_predictions(&params));
    let est = estimate_mean(&counts, CONFIDENCE, seed).ok();
    s.insert(
        "estimates".into(),
        json!({
            "allones_count": est,
            "z_score_vs_exact": est.map(|e| e.z_score(exact)),
        }),
    );
    Ok(Output { summary: Value::Object(s), tables: vec![table], oracle_failures: Vec::new() })
}

pub fn analyze(cfg: &RunConfig) -> Result<Output, CliError> {
    let mut s = header("analyze", cfg);
    let mut tables = Vec::new();
    match cfg.model() {
        ModelKind::Matrix => {
            let params = cfg.matrix()?;
            s.insert("params".into(), matrix_params_json(&params));
            s.insert("predictions".into(), matrix_predictions(&params));
        }
        ModelKind::SingleColumn => {
            let params = cfg.single_column()?;
            s.insert("params".into(), single_params_json(&params));
            s.insert(
                "predictions".into(),
                json!({
                    "hitting_time_mean_exact": hitting_time_mean_exact(&params, ColumnState(0))?,
                    "hitting_time_mean_asymptotic": hitting_time_mean_asymptotic(&params),
                    "hitting_time_variance_exact": hitting_time_variance_exact(&params, ColumnState(0))?,
                }),
            );
            let mut t = Table::new("invariant_pmf", vec!["k", "probability"]);
            for (k, pk) in invariant_pmf(&params).into_iter().enumerate() {
                t.push(vec![k.to_string(), num(pk)]);
            }
            tables.push(t);
        }
    }
    Ok(Output { summary: Value::Object(s), tables, oracle_failures: Vec::new() })
}

/// One oracle comparison.
struct Check {
    name: String,
    max_error: f64,
    tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, tolerance: f64) -> Self {
        Self { name: name.into(), max_error: 0.0, tolerance }
    }

    fn record(&mut self, err: f64) {
        // NaN must fail the check, so do not use f64::max here
        if err.is_nan() || err > self.max_error {
            self.max_error = err;
        }
    }

    fn passed(&self) -> bool {
        self.max_error <= self.tolerance
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }
}

/// Cross-checks the closed forms and the sampler against the dense oracle.
/// `small` restricts every grid so the whole run takes about a second.
pub fn verify(cfg: &RunConfig, small: bool) -> Result<Output, CliError> {
    let seed = cfg.seed();
    let max_m = if small { 5 } else { 8 };
    let alphas = [0.5, 1.0, 2.0];
    let ps = [0.1, 0.5, 0.9];
    let mut checks = Vec::new();

    let mut pmf = Check::new("invariant_pmf_vs_stationary_solve", 1e-10);
    let mut mean = Check::new("hitting_mean_vs_first_passage_solve", 1e-9);
    let mut var = Check::new("hitting_variance_vs_first_passage_solve", 1e-8);
    for m in 1..=max_m {
        for &alpha in &alphas {
            for &p in &ps {
                let params = SingleColumnParams::new(m, alpha, p)?;
                let gen = DenseGenerator::single_column(&params)?;
                let pi = stationary_solve(&gen)?;
                for (a, b) in invariant_pmf(&params).iter().zip(&pi) {
                    pmf.record(rel(*a, *b));
                }
                let (mom1, mom2) = hitting_moments(&gen, &[m])?;
                let e = hitting_time_mean_exact(&params, ColumnState(0))?.value;
                let v = hitting_time_variance_exact(&params, ColumnState(0))?.value;
                mean.record(rel(e, mom1[0]));
                var.record(rel(v, mom2[0] - mom1[0] * mom1[0]));
            }
        }
    }
    checks.extend([pmf, mean, var]);

    let mut coupons = Check::new("coupon_inclusion_exclusion_vs_enumeration", 1e-12);
    let (max_n, max_k) = if small { (4, 8) } else { (5, 12) };
    for n in 1..=max_n {
        for k in 0..=max_k {
            let exact = ratio_to_f64(&coupon_enumerate(n, k)?);
            coupons.record((coupon_done_by_draws(n, k)? - exact).abs());
        }
    }
    checks.push(coupons);

    let mut laplace = Check::new("collection_laplace_vs_product", 1e-12);
    for m in [1, 2, 5, 10, 50, 100] {
        for (q, alpha) in [(1.0, 0.01), (0.9, 0.5), (2.0, 3.0)] {
            let product: f64 = (1..=m).map(|j| j as f64 * q / m as f64).map(|r| r / (r + alpha)).product();
            laplace.record(rel(collection_time_laplace(m, q, alpha)?.value, product));
        }
    }
    checks.push(laplace);

    let shapes: &[(usize, usize)] =
        if small { &[(1, 1), (2, 1), (1, 2), (2, 2)] } else { &[(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)] };
    let mut steady = Check::new("steady_column_probability_vs_stationary_solve", 1e-10);
    let mut sampler = Check::new("reversal_sampler_tv_to_stationary_solve", if small { 0.02 } else { 0.01 });
    let draws = if small { 50_000 } else { 400_000 };
    for &(m, n) in shapes {
        for (p, l) in [(0.5, 0.0), (0.3, 0.2)] {
            let params = MatrixParams::new(m, n, p, l)?;
            let pi = stationary_solve(&DenseGenerator::matrix_model(&params)?)?;
            let col0 = (0..m).fold(0usize, |acc, i| acc | 1 << (i * n));
            let full: f64 = pi.iter().enumerate().filter(|(s, _)| s & col0 == col0).map(|(_, x)| x).sum();
            steady.record(rel(steady_allones_probability(&params).value, full));
            if m * n <= 4 {
                let hist = steady_state_histogram(&params, draws, seed)?;
                sampler.record(empirical_tv(&empirical_distribution(&hist), &pi)?);
            }
        }
    }
    checks.extend([steady, sampler]);

    let failures: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| format!("{}: error {:e} > tolerance {:e}", c.name, c.max_error, c.tolerance))
        .collect();
    let mut table = Table::new("verify", vec!["check", "max_error", "tolerance", "passed"]);
    for c in &checks {
        table.push(vec![c.name.clone(), num(c.max_error), num(c.tolerance), c.passed().to_string()]);
    }
    let mut s = header("verify", cfg);
    s.insert("small".into(), json!(small));
    s.insert(
        "checks".into(),
        Value::Array(
            checks
                .iter()
                .map(|c| json!({ "name": c.name, "max_error": c.max_error, "tolerance": c.tolerance, "passed": c.passed() }))
                .collect(),
        ),
    );
    s.insert("passed".into(), json!(failures.is_empty()));
    Ok(Output { summary: Value::Object(s), tables: vec![table], oracle_failures: failures })
}

/// Values of `p_m` swept for the count-versus-time curves unless `--pm`
/// picks one.
pub const FIGURE_PM_VALUES: [f64; 2] = [0.0, 0.005];
/// Log-spaced `p_m` grid for the transition-time curve.
pub const PM_GRID: (f64, f64, usize) = (1e-4, 1e-1, 61);

/// Data behind the two standard plots: mean all-ones column count over
/// time for each `p_m`, and the predicted transition time against `p_m`.
pub fn figure_data(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.model() != ModelKind::Matrix {
        return Err(CliError::Config("figure-data needs --model matrix".into()));
    }
    if cfg.lambda_m.is_some() || cfg.alpha.is_some() {
        return Err(CliError::Config("figure-data sweeps pm; lambda_m and alpha are not accepted".into()));
    }
    if cfg.p.is_some() && cfg.pd.is_some() {
        return Err(CliError::Config("give pd or p, not both".into()));
    }
    let m = cfg.m.unwrap_or(crate::config::DEFAULT_M);
    let n = cfg.n.unwrap_or(crate::config::DEFAULT_N);
    let pd = cfg.pd.or(cfg.p).unwrap_or(crate::config::DEFAULT_P);
    let reps = cfg.replicates()?;
    let points = cfg.grid_points()?;
    let seed = cfg.seed();
    let pms: Vec<f64> = match cfg.pm {
        Some(pm) => vec![pm],
        None => FIGURE_PM_VALUES.to_vec(),
    };
    let params: Vec<MatrixParams> =
        pms.iter().map(|&pm| MatrixParams::new(m, n, pd, pm * m as f64)).collect::<Result<_, _>>()?;
    let horizon = match cfg.horizon()? {
        Some(h) => h,
        None => params.iter().map(|p| 1.5 * transition_time_prediction(p).value).fold(0.0, f64::max),
    };
    let times: Vec<f64> = (0..points).map(|i| horizon * i as f64 / (points - 1) as f64).collect();

    let mut curve = Table::new(
        "count_vs_time",
        vec![
            "p_m",
            "time",
            "mean_all_ones_count",
            "std_error",
            "transient_expected_count",
            "steady_count_exact",
            "steady_count_asymptotic",
            "predicted_transition_time",
        ],
    );
    let mut per_pm = Vec::new();
    for (&pm, p) in pms.iter().zip(&params) {
        let runs = (0..reps as u64)
            .into_par_iter()
            .map(|r| {
                let sc = SimulationConfig::until_time(seed, r, horizon).with_series();
                let tr = simulate_matrix(p, &sc, MatrixState::for_params(p))?;
                let grid: Vec<f64> = times.iter().map(|&t| tr.value_at(t).unwrap_or(0) as f64).collect();
                Ok((grid, tr.first_hit))
            })
            .collect::<Result<Vec<_>, immunolearn_core::Error>>()?;
        let steady = steady_allones_count(p, CountMethod::Exact);
        let asym = steady_allones_count(p, CountMethod::Asymptotic);
        let tau = transition_time_prediction(p);
        for (i, &t) in times.iter().enumerate() {
            let column: Vec<f64> = runs.iter().map(|(g, _)| g[i]).collect();
            let mean = column.iter().sum::<f64>() / reps as f64;
            let se = if reps > 1 { sample_sd(&column) / (reps as f64).sqrt() } else { f64::NAN };
            let transient = transient_allones_probability(p, t)?.value * n as f64;
            curve.push(vec![
                num(pm),
                num(t),
                num(mean),
                num(se),
                num(transient),
                num(steady.value),
                num(asym.value),
                num(tau.value),
            ]);
        }
        let hits: Vec<Option<f64>> = runs.iter().map(|(_, h)| *h).collect();
        per_pm.push(json!({
            "p_m": pm,
            "params": matrix_params_json(p),
            "predictions": matrix_predictions(p),
            "first_full_column": transition_window(&hits).ok(),
        }));
    }

    let (lo, hi, k) = PM_GRID;
    let mut sweep = Table::new(
        "transition_vs_pm",
        vec!["p_m", "lambda_m", "q_tilde", "predicted_transition_time", "steady_count_exact"],
    );
    for i in 0..k {
        let pm = lo * (hi / lo).powf(i as f64 / (k - 1) as f64);
        let p = MatrixParams::new(m, n, pd, pm * m as f64)?;
        sweep.push(vec![
            num(pm),
            num(p.lambda_m()),
            num(p.q_tilde()),
            num(transition_time_prediction(&p).value),
            num(steady_allones_count(&p, CountMethod::Exact).value),
        ]);
    }

    // echo the sweep in discrete form so it can be replayed as is
    let echo = RunConfig { pd: Some(pd), p: None, ..cfg.clone() };
    let mut s = header("figure-data", &echo);
    s.insert("horizon".into(), json!(horizon));
    s.insert("curves".into(), Value::Array(per_pm));
    s.insert(
        "sweep".into(),
        json!({ "p_m_min": lo, "p_m_max": hi, "points": k, "formula_id": FormulaId::TransitionTime }),
    );
    Ok(Output { summary: Value::Object(s), tables: vec![curve, sweep], oracle_failures: Vec::new() })
}
