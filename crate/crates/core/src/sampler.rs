//! Perfect sampling of the matrix chain's invariant law by time reversal.
//!
//! Looking backwards from a stationary time point, the value of entry
//! `(i, j)` is fixed by the most recent event that touched it: a row fill
//! of row `i` or an entry fill of `(i, j)` leaves a one, a wipe of column
//! `j` leaves a zero. Walking the jump chain backwards and recording each
//! entry's first touch therefore yields an exact draw. Later steps of the
//! walk are earlier in forward time, so values are write-once.

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{MatrixEvent, MatrixParams, MatrixState};
use crate::rng::{stream, SimRng};

/// Hard cap on backward steps for a single draw.
pub const MAX_ITERATIONS: u64 = 1_000_000_000;

/// Bookkeeping of one backward walk.
#[derive(Debug, Clone)]
pub struct ReversalState {
    forbidden_columns: Vec<bool>,
    set_rows: Vec<bool>,
    set_entries: Vec<bool>,
    determined: Vec<bool>,
    undetermined: usize,
    emitted: MatrixState,
}

impl ReversalState {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            forbidden_columns: vec![false; cols],
            set_rows: vec![false; rows],
            set_entries: vec![false; rows * cols],
            determined: vec![false; rows * cols],
            undetermined: rows * cols,
            emitted: MatrixState::zeros(rows, cols),
        }
    }

    fn cols(&self) -> usize {
        self.forbidden_columns.len()
    }

    fn rows(&self) -> usize {
        self.set_rows.len()
    }

    pub fn is_complete(&self) -> bool {
        self.undetermined == 0
    }

    pub fn is_determined(&self, row: usize, col: usize) -> bool {
        self.determined[row * self.cols() + col]
    }

    pub fn forbidden_columns(&self) -> &[bool] {
        &self.forbidden_columns
    }

    pub fn set_rows(&self) -> &[bool] {
        &self.set_rows
    }

    pub fn set_entries(&self) -> &[bool] {
        &self.set_entries
    }

    pub fn emitted(&self) -> &MatrixState {
        &self.emitted
    }

    fn determine(&mut self, row: usize, col: usize, one: bool) {
        let idx = row * self.cols() + col;
        if self.determined[idx] {
            return;
        }
        self.determined[idx] = true;
        self.undetermined -= 1;
        if one {
            self.emitted.set_entry(row, col);
        }
    }

    /// Processes one backward step. Events are interpreted in reverse time:
    /// they only fix entries that no later-processed (forward-earlier)
    /// event could override.
    pub fn step(&mut self, event: MatrixEvent) -> Result<()> {
        match event {
            MatrixEvent::ColumnZero(j) => {
                if j >= self.cols() {
                    return Err(Error::IndexOutOfRange { what: "column", index: j, limit: self.cols() });
                }
                if !self.forbidden_columns[j] {
                    self.forbidden_columns[j] = true;
                    for i in 0..self.rows() {
                        self.determine(i, j, false);
                    }
                }
            }
            MatrixEvent::RowSet(i) => {
                if i >= self.rows() {
                    return Err(Error::IndexOutOfRange { what: "row", index: i, limit: self.rows() });
                }
                if !self.set_rows[i] {
                    self.set_rows[i] = true;
                    for j in 0..self.cols() {
                        self.determine(i, j, true);
                    }
                }
            }
            MatrixEvent::EntrySet { row, col } => {
                if row >= self.rows() || col >= self.cols() {
                    return Err(Error::IndexOutOfRange {
                        what: "entry",
                        index: row * self.cols() + col,
                        limit: self.rows() * self.cols(),
                    });
                }
                let idx = row * self.cols() + col;
                self.set_entries[idx] = true;
                self.determine(row, col, true);
            }
        }
        Ok(())
    }

    pub fn into_matrix(self) -> MatrixState {
        self.emitted
    }
}

/// Runs a backward walk over `events` until every entry is determined.
pub fn sample_from_events<I>(rows: usize, cols: usize, events: I) -> Result<MatrixState>
where
    I: IntoIterator<Item = MatrixEvent>,
{
    let mut state = ReversalState::new(rows, cols);
    let mut steps = 0u64;
    for e in events {
        if state.is_complete() {
            break;
        }
        steps += 1;
        if steps > MAX_ITERATIONS {
            return Err(Error::IterationCap(MAX_ITERATIONS));
        }
        state.step(e)?;
    }
    if !state.is_complete() {
        return Err(Error::InvalidParameter("event stream ended before every entry was determined".into()));
    }
    Ok(state.into_matrix())
}

/// One backward step of the jump chain: a column with probability
/// `p/(1+Nλ_m)`, a row with probability `q/(1+Nλ_m)`, otherwise an entry.
fn draw_backward_event(rng: &mut SimRng, params: &MatrixParams) -> MatrixEvent {
    let (row_rate, col_rate, entry_rate) = params.class_rates();
    let u = rng.random::<f64>() * (row_rate + col_rate + entry_rate);
    if u < col_rate {
        MatrixEvent::ColumnZero(rng.random_range(0..params.n()))
    } else if u < col_rate + row_rate || entry_rate == 0.0 {
        MatrixEvent::RowSet(rng.random_range(0..params.m()))
    } else {
        MatrixEvent::EntrySet { row: rng.random_range(0..params.m()), col: rng.random_range(0..params.n()) }
    }
}

/// Exact draw from the invariant law using `rng`.
pub fn draw_invariant(params: &MatrixParams, rng: &mut SimRng) -> Result<MatrixState> {
    let events = std::iter::repeat_with(|| draw_backward_event(rng, params));
    sample_from_events(params.m(), params.n(), events)
}

/// Exact draw from the invariant law with PAI off (`λ_m = 0`).
pub fn sample_invariant_pai_off(params: &MatrixParams, seed: u64) -> Result<MatrixState> {
    if params.lambda_m() != 0.0 {
        return Err(Error::InvalidParameter(format!("PAI-off sampler needs lambda_m = 0, got {}", params.lambda_m())));
    }
    draw_invariant(params, &mut stream(seed, 0))
}

/// Exact draw from the invariant law for any `λ_m ≥ 0`.
pub fn sample_invariant_pai_on(params: &MatrixParams, seed: u64) -> Result<MatrixState> {
    draw_invariant(params, &mut stream(seed, 0))
}

/// `n` independent draws; draw `r` uses stream `(master_seed, r)`.
pub fn sample_invariant_batch(params: &MatrixParams, n: usize, master_seed: u64) -> Result<Vec<MatrixState>> {
    (0..n as u64).into_par_iter().map(|r| draw_invariant(params, &mut stream(master_seed, r))).collect()
}

const HISTOGRAM_CHUNK: u64 = 4096;

/// Counts of each matrix state (bitmask index, bit `i·N + j` for entry
/// `(i, j)`) over `n_draws` draws. Needs `M·N ≤ 20`.
pub fn steady_state_histogram(params: &MatrixParams, n_draws: u64, master_seed: u64) -> Result<Vec<u64>> {
    let cells = params.m() * params.n();
    if cells > 20 {
        return Err(Error::TooLarge(format!("histogram over 2^{cells} states")));
    }
    let n_chunks = n_draws.div_ceil(HISTOGRAM_CHUNK);
    let partials: Result<Vec<Vec<u64>>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(master_seed, c);
            let mut hist = vec![0u64; 1 << cells];
            let todo = HISTOGRAM_CHUNK.min(n_draws - c * HISTOGRAM_CHUNK);
            for _ in 0..todo {
                hist[draw_invariant(params, &mut rng)?.to_bitmask() as usize] += 1;
            }
            Ok(hist)
        })
        .collect();
    let mut total = vec![0u64; 1 << cells];
    for h in partials? {
        total.iter_mut().zip(h).for_each(|(t, x)| *t += x);
    }
    Ok(total)
}

/// Draws that share one backward event stream across several `λ_m`.
///
/// Entry events are generated at the largest rate and thinned with a
/// shared uniform mark, so the outputs are coupled: a larger `λ_m` sees a
/// superset of fill events and its matrix dominates entrywise.
pub fn sample_invariant_coupled(params: &MatrixParams, lambdas: &[f64], seed: u64) -> Result<Vec<MatrixState>> {
    let lambda_max = lambdas.iter().copied().fold(0.0, f64::max);
    let top = params.with_lambda_m(lambda_max)?;
    let mut rng = stream(seed, 0);
    let mut walkers: Vec<(f64, ReversalState)> =
        lambdas.iter().map(|&l| (l, ReversalState::new(params.m(), params.n()))).collect();
    let mut steps = 0u64;
    while walkers.iter().any(|(_, w)| !w.is_complete()) {
        steps += 1;
        if steps > MAX_ITERATIONS {
            return Err(Error::IterationCap(MAX_ITERATIONS));
        }
        let event = draw_backward_event(&mut rng, &top);
        let mark: f64 = rng.random();
        for (l, w) in walkers.iter_mut() {
            let keep = match event {
                MatrixEvent::EntrySet { .. } => mark * lambda_max < *l,
                _ => true,
            };
            if keep && !w.is_complete() {
                w.step(event)?;
            }
        }
    }
    Ok(walkers.into_iter().map(|(_, w)| w.into_matrix()).collect())
}
