//! Exact event-driven (Gillespie) simulation of both chains.
//!
//! Holding times are drawn from the total-rate exponential. For the matrix
//! chain the event class (row, column, entry) is drawn by aggregate rate and
//! the index uniformly inside the class, so each step costs O(1) to choose
//! plus the O(N) or O(M) cost of applying a row or column event.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    enumerate_rates, ColumnEvent, ColumnState, MatrixEvent, MatrixParams, MatrixState, SingleColumnParams,
};
use crate::rng::{stream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopCondition {
    /// Stop once some column of the matrix is all ones.
    FirstFullColumn,
    /// Stop once the single column reaches `M`.
    ColumnReachesM,
    /// Run until the horizon regardless of hits.
    TimeHorizon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub master_seed: u64,
    pub replicate_index: u64,
    /// `None` means unbounded.
    pub horizon: Option<f64>,
    pub stop: StopCondition,
    /// Keep every event; off by default so long runs use O(1) memory.
    pub record_events: bool,
    /// Keep the change points of the observable.
    pub record_series: bool,
}

impl SimulationConfig {
    pub fn until_hit(master_seed: u64, replicate_index: u64) -> Self {
        Self {
            master_seed,
            replicate_index,
            horizon: None,
            stop: StopCondition::FirstFullColumn,
            record_events: false,
            record_series: false,
        }
    }

    pub fn until_time(master_seed: u64, replicate_index: u64, horizon: f64) -> Self {
        Self {
            master_seed,
            replicate_index,
            horizon: Some(horizon),
            stop: StopCondition::TimeHorizon,
            record_events: false,
            record_series: false,
        }
    }

    pub fn with_events(mut self) -> Self {
        self.record_events = true;
        self
    }

    pub fn with_series(mut self) -> Self {
        self.record_series = true;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.horizon {
            Some(h) if !(h > 0.0) => Err(Error::InvalidParameter(format!("horizon must be positive, got {h}"))),
            None if self.stop == StopCondition::TimeHorizon => {
                Err(Error::InvalidParameter("TimeHorizon needs a finite horizon".into()))
            }
            _ => Ok(()),
        }
    }

    fn stops_at_hit(&self) -> bool {
        self.stop != StopCondition::TimeHorizon
    }

    fn rng(&self) -> SimRng {
        stream(self.master_seed, self.replicate_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedEvent<E> {
    pub time: f64,
    pub event: E,
}

/// Output of one run.
///
/// `series` holds the change points `(time, value)` of the run's observable,
/// starting at time 0: the one-count for the single column, the number of
/// all-ones columns for the matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<E, S> {
    pub events: Vec<TimedEvent<E>>,
    pub first_hit: Option<f64>,
    pub series: Vec<(f64, usize)>,
    pub end_time: f64,
    pub n_events: u64,
    pub final_state: S,
    /// Time spent in each state (single column only, empty otherwise).
    pub occupation: Vec<f64>,
}

pub type ColumnTrajectory = Trajectory<ColumnEvent, ColumnState>;
pub type MatrixTrajectory = Trajectory<MatrixEvent, MatrixState>;

impl<E, S> Trajectory<E, S> {
    /// Observable value at time `t` (right-continuous), from the series.
    pub fn value_at(&self, t: f64) -> Option<usize> {
        let idx = self.series.partition_point(|&(s, _)| s <= t);
        idx.checked_sub(1).map(|i| self.series[i].1)
    }
}

#[inline]
fn exp_draw(rng: &mut SimRng, rate: f64) -> f64 {
    let e: f64 = Exp1.sample(rng);
    e / rate
}

/// Simulates the single-column chain from `start`.
pub fn simulate_single_column(
    params: &SingleColumnParams,
    config: &SimulationConfig,
    start: ColumnState,
) -> Result<ColumnTrajectory> {
    config.validate()?;
    let m = params.m();
    let start = ColumnState::new(start.count(), params)?;
    let mut rng = config.rng();
    let horizon = config.horizon.unwrap_or(f64::INFINITY);
    let mut state = start;
    let mut t = 0.0;
    let mut traj = Trajectory {
        events: Vec::new(),
        first_hit: (state.count() == m).then_some(0.0),
        series: if config.record_series { vec![(0.0, state.count())] } else { Vec::new() },
        end_time: 0.0,
        n_events: 0,
        final_state: state,
        occupation: if config.stop == StopCondition::TimeHorizon { vec![0.0; m + 1] } else { Vec::new() },
    };

    loop {
        if traj.first_hit.is_some() && config.stops_at_hit() {
            break;
        }
        let rates = enumerate_rates(state, params);
        let total: f64 = rates.iter().map(|r| r.1).sum();
        let dt = exp_draw(&mut rng, total);
        if t + dt > horizon {
            if let Some(o) = traj.occupation.get_mut(state.count()) {
                *o += horizon - t;
            }
            t = horizon;
            break;
        }
        if let Some(o) = traj.occupation.get_mut(state.count()) {
            *o += dt;
        }
        t += dt;
        let u = rng.random::<f64>() * total;
        let (next, event) = if u < rates[0].1 || rates.len() == 1 {
            (rates[0].0, if rates[0].0.count() > state.count() { ColumnEvent::Up } else { ColumnEvent::Reset })
        } else {
            (rates[1].0, ColumnEvent::Reset)
        };
        state = next;
        traj.n_events += 1;
        if config.record_events {
            traj.events.push(TimedEvent { time: t, event });
        }
        if config.record_series {
            traj.series.push((t, state.count()));
        }
        if state.count() == m && traj.first_hit.is_none() {
            traj.first_hit = Some(t);
        }
    }
    traj.end_time = t;
    traj.final_state = state;
    Ok(traj)
}

fn draw_matrix_event(rng: &mut SimRng, params: &MatrixParams) -> MatrixEvent {
    let (row_rate, col_rate, entry_rate) = params.class_rates();
    let u = rng.random::<f64>() * (row_rate + col_rate + entry_rate);
    if u < row_rate {
        MatrixEvent::RowSet(rng.random_range(0..params.m()))
    } else if u < row_rate + col_rate || entry_rate == 0.0 {
        MatrixEvent::ColumnZero(rng.random_range(0..params.n()))
    } else {
        MatrixEvent::EntrySet { row: rng.random_range(0..params.m()), col: rng.random_range(0..params.n()) }
    }
}

/// Simulates the matrix chain from `start`.
pub fn simulate_matrix(
    params: &MatrixParams,
    config: &SimulationConfig,
    start: MatrixState,
) -> Result<MatrixTrajectory> {
    config.validate()?;
    if start.rows() != params.m() || start.cols() != params.n() {
        return Err(Error::InvalidParameter(format!(
            "start state is {}x{}, parameters are {}x{}",
            start.rows(),
            start.cols(),
            params.m(),
            params.n()
        )));
    }
    let mut rng = config.rng();
    let horizon = config.horizon.unwrap_or(f64::INFINITY);
    let total = params.total_rate();
    let mut state = start;
    let mut t = 0.0;
    let mut traj = Trajectory {
        events: Vec::new(),
        first_hit: (state.full_columns() > 0).then_some(0.0),
        series: if config.record_series { vec![(0.0, state.full_columns())] } else { Vec::new() },
        end_time: 0.0,
        n_events: 0,
        final_state: MatrixState::zeros(0, 0),
        occupation: Vec::new(),
    };

    loop {
        if traj.first_hit.is_some() && config.stops_at_hit() {
            break;
        }
        let dt = exp_draw(&mut rng, total);
        if t + dt > horizon {
            t = horizon;
            break;
        }
        t += dt;
        let event = draw_matrix_event(&mut rng, params);
        let delta = state.apply(event)?;
        traj.n_events += 1;
        if config.record_events {
            traj.events.push(TimedEvent { time: t, event });
        }
        if delta != 0 {
            if config.record_series {
                traj.series.push((t, state.full_columns()));
            }
            if traj.first_hit.is_none() && state.full_columns() > 0 {
                traj.first_hit = Some(t);
            }
        }
    }
    traj.end_time = t;
    traj.final_state = state;
    Ok(traj)
}

/// A chain whose first-hit time can be sampled from the all-zero start.
pub trait HittingTimeModel: Sync {
    fn sample_hitting_time(&self, master_seed: u64, replicate: u64) -> Result<f64>;
}

impl HittingTimeModel for SingleColumnParams {
    fn sample_hitting_time(&self, master_seed: u64, replicate: u64) -> Result<f64> {
        let mut cfg = SimulationConfig::until_hit(master_seed, replicate);
        cfg.stop = StopCondition::ColumnReachesM;
        let tr = simulate_single_column(self, &cfg, ColumnState(0))?;
        Ok(tr.first_hit.expect("unbounded run ends at a hit"))
    }
}

impl HittingTimeModel for MatrixParams {
    fn sample_hitting_time(&self, master_seed: u64, replicate: u64) -> Result<f64> {
        let cfg = SimulationConfig::until_hit(master_seed, replicate);
        let tr = simulate_matrix(self, &cfg, MatrixState::for_params(self))?;
        Ok(tr.first_hit.expect("unbounded run ends at a hit"))
    }
}

/// `n_replicates` independent first-hit times from the zero state.
///
/// Replicate `r` uses stream `(master_seed, r)`; the result does not depend
/// on the thread count.
pub fn hitting_time_batch<P: HittingTimeModel>(params: &P, n_replicates: usize, master_seed: u64) -> Result<Vec<f64>> {
    if n_replicates == 0 {
        return Err(Error::InvalidParameter("need at least one replicate".into()));
    }
    (0..n_replicates as u64).into_par_iter().map(|r| params.sample_hitting_time(master_seed, r)).collect()
}

/// Number of uniform draws from `n` coupons until all have been seen.
pub fn coupon_collection_draws(n: usize, rng: &mut SimRng) -> u64 {
    let mut seen = vec![false; n];
    let mut distinct = 0;
    let mut draws = 0u64;
    while distinct < n {
        draws += 1;
        let c = rng.random_range(0..n);
        if !seen[c] {
            seen[c] = true;
            distinct += 1;
        }
    }
    draws
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sc(m: usize, alpha: f64, p: f64) -> SingleColumnParams {
        SingleColumnParams::new(m, alpha, p).unwrap()
    }

    #[test]
    fn start_at_top_hits_immediately() {
        let params = sc(5, 1.0, 0.3);
        let cfg = SimulationConfig { stop: StopCondition::ColumnReachesM, ..SimulationConfig::until_hit(1, 0) };
        let tr = simulate_single_column(&params, &cfg, ColumnState(5)).unwrap();
        assert_eq!(tr.first_hit, Some(0.0));
        assert_eq!(tr.n_events, 0);
    }

    #[test]
    fn single_column_mean_hitting_times() {
        let m1 = hitting_time_batch(&sc(1, 1.0, 0.5), 40_000, 11).unwrap();
        let mean1 = m1.iter().sum::<f64>() / m1.len() as f64;
        // sd of the exponential(0.5) mean over 4e4 draws is 0.01
        assert!((mean1 - 2.0).abs() < 0.04, "{mean1}");

        let m2 = hitting_time_batch(&sc(2, 1.0, 0.5), 40_000, 12).unwrap();
        let mean2 = m2.iter().sum::<f64>() / m2.len() as f64;
        assert!((mean2 - 10.0).abs() < 0.3, "{mean2}");
    }

    #[test]
    fn batch_of_one_equals_replicate_zero() {
        let params = sc(4, 1.0, 0.2);
        let batch = hitting_time_batch(&params, 1, 99).unwrap();
        assert_eq!(batch, vec![params.sample_hitting_time(99, 0).unwrap()]);
    }

    #[test]
    fn batches_are_deterministic_across_pools() {
        let params = MatrixParams::new(6, 4, 0.3, 0.2).unwrap();
        let a = hitting_time_batch(&params, 64, 5).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| hitting_time_batch(&params, 64, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn event_times_increase_and_hit_is_last_event() {
        let params = MatrixParams::new(5, 3, 0.4, 0.3).unwrap();
        let cfg = SimulationConfig::until_hit(3, 7).with_events().with_series();
        let tr = simulate_matrix(&params, &cfg, MatrixState::for_params(&params)).unwrap();
        assert!(tr.events.windows(2).all(|w| w[0].time < w[1].time));
        assert_eq!(tr.first_hit, Some(tr.events.last().unwrap().time));
        assert!(tr.final_state.full_columns() > 0);
        assert!(tr.final_state.counts_consistent());
        assert_eq!(tr.series.last().unwrap().0, tr.first_hit.unwrap());
    }

    #[test]
    fn pai_off_never_sets_entries() {
        let params = MatrixParams::new(4, 4, 0.5, 0.0).unwrap();
        let cfg = SimulationConfig::until_time(8, 0, 500.0).with_events();
        let tr = simulate_matrix(&params, &cfg, MatrixState::for_params(&params)).unwrap();
        assert!(tr.n_events > 100);
        assert!(tr.events.iter().all(|e| !matches!(e.event, MatrixEvent::EntrySet { .. })));
    }

    #[test]
    fn horizon_run_ends_at_horizon() {
        let params = sc(3, 1.0, 0.5);
        let cfg = SimulationConfig::until_time(1, 2, 50.0);
        let tr = simulate_single_column(&params, &cfg, ColumnState(0)).unwrap();
        assert_eq!(tr.end_time, 50.0);
        let occ: f64 = tr.occupation.iter().sum();
        assert!((occ - 50.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_configs() {
        let params = sc(3, 1.0, 0.5);
        let mut cfg = SimulationConfig::until_time(1, 0, 10.0);
        cfg.horizon = None;
        assert!(simulate_single_column(&params, &cfg, ColumnState(0)).is_err());
        cfg.horizon = Some(-1.0);
        assert!(simulate_single_column(&params, &cfg, ColumnState(0)).is_err());
        let mp = MatrixParams::new(2, 2, 0.5, 0.0).unwrap();
        assert!(simulate_matrix(&mp, &SimulationConfig::until_hit(0, 0), MatrixState::zeros(3, 2)).is_err());
        assert!(hitting_time_batch(&params, 0, 1).is_err());
    }

    #[test]
    fn value_at_reads_series() {
        let tr: Trajectory<(), ()> = Trajectory {
            events: vec![],
            first_hit: None,
            series: vec![(0.0, 0), (1.0, 2), (3.0, 1)],
            end_time: 4.0,
            n_events: 2,
            final_state: (),
            occupation: vec![],
        };
        assert_eq!(tr.value_at(0.5), Some(0));
        assert_eq!(tr.value_at(1.0), Some(2));
        assert_eq!(tr.value_at(10.0), Some(1));
    }

    #[test]
    fn coupon_draws_at_least_n() {
        let mut rng = stream(1, 0);
        for _ in 0..100 {
            assert!(coupon_collection_draws(10, &mut rng) >= 10);
        }
        assert_eq!(coupon_collection_draws(1, &mut rng), 1);
    }
}
