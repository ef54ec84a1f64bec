//! Parameter and state types for the two chains, their transition rates,
//! and the row/column operator algebra behind the reversal sampler.
//!
//! Indices are zero-based throughout: rows run over `0..m`, columns over
//! `0..n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the single-column chain on `{0, …, M}`.
///
/// From state `k` the chain moves to `k + 1` at rate `α·q·(1 − k/M)` and
/// resets to `0` at rate `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingleColumnParams {
    m: usize,
    alpha: f64,
    p: f64,
}

impl SingleColumnParams {
    pub fn new(m: usize, alpha: f64, p: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("M must be at least 1".into()));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
        }
        Ok(Self { m, alpha, p })
    }

    /// Parameters whose shape constant `a = pM/(αq)` equals `a`.
    pub fn with_shape(m: usize, alpha: f64, a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::InvalidParameter(format!("a must be positive, got {a}")));
        }
        // p / (1 - p) = a·α / M
        let ratio = a * alpha / m as f64;
        Self::new(m, alpha, ratio / (1.0 + ratio))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    /// Shape constant `a = pM/(αq)`; equals `β` in the invariant law.
    pub fn a(&self) -> f64 {
        self.p * self.m as f64 / (self.alpha * self.q())
    }

    pub fn up_rate(&self, k: usize) -> f64 {
        if k >= self.m {
            0.0
        } else {
            self.alpha * self.q() * (1.0 - k as f64 / self.m as f64)
        }
    }

    /// Common rate used to uniformize the chain: `αq + p`.
    pub fn uniformization_rate(&self) -> f64 {
        self.alpha * self.q() + self.p
    }
}

/// Number of ones in a single column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ColumnState(pub usize);

impl ColumnState {
    pub fn new(k: usize, params: &SingleColumnParams) -> Result<Self> {
        if k > params.m() {
            return Err(Error::IndexOutOfRange { what: "column state", index: k, limit: params.m() });
        }
        Ok(Self(k))
    }

    pub fn count(self) -> usize {
        self.0
    }
}

/// Jump of the single-column chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnEvent {
    Up,
    Reset,
}

/// Outgoing transitions from `state` with their rates.
///
/// The reset from `0` is a self-loop and is left out.
pub fn enumerate_rates(state: ColumnState, params: &SingleColumnParams) -> Vec<(ColumnState, f64)> {
    let k = state.0;
    let mut out = Vec::with_capacity(2);
    if k < params.m() {
        out.push((ColumnState(k + 1), params.up_rate(k)));
    }
    if k > 0 {
        out.push((ColumnState(0), params.p()));
    }
    out
}

/// Parameters of the `M × N` matrix chain.
///
/// Each row is set to ones at rate `q/M`, each column is zeroed at rate
/// `p/N`, and each single entry is set to one at rate `λ_m/M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatrixParams {
    m: usize,
    n: usize,
    p: f64,
    lambda_m: f64,
}

impl MatrixParams {
    pub fn new(m: usize, n: usize, p: f64, lambda_m: f64) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidParameter(format!("M and N must be at least 1, got {m}x{n}")));
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::InvalidParameter(format!("p must lie in (0,1), got {p}")));
        }
        if !(lambda_m.is_finite() && lambda_m >= 0.0) {
            return Err(Error::InvalidParameter(format!("lambda_m must be >= 0, got {lambda_m}")));
        }
        Ok(Self { m, n, p, lambda_m })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        1.0 - self.p
    }

    pub fn lambda_m(&self) -> f64 {
        self.lambda_m
    }

    /// Effective per-row fill rate `q̃ = q + λ_m`.
    pub fn q_tilde(&self) -> f64 {
        self.q() + self.lambda_m
    }

    /// `b = pM/(qN)`.
    pub fn b(&self) -> f64 {
        self.p * self.m as f64 / (self.q() * self.n as f64)
    }

    /// `b̃ = pM/(q̃N)`.
    pub fn b_tilde(&self) -> f64 {
        self.p * self.m as f64 / (self.q_tilde() * self.n as f64)
    }

    /// Aggregate rates of the three event classes: (rows, columns, entries).
    pub fn class_rates(&self) -> (f64, f64, f64) {
        (self.q(), self.p, self.n as f64 * self.lambda_m)
    }

    /// Total event rate `q + p + Nλ_m`.
    pub fn total_rate(&self) -> f64 {
        let (r, c, e) = self.class_rates();
        r + c + e
    }

    pub fn with_lambda_m(&self, lambda_m: f64) -> Result<Self> {
        Self::new(self.m, self.n, self.p, lambda_m)
    }
}

/// Transition of the matrix chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixEvent {
    /// Every entry of the row becomes one.
    RowSet(usize),
    /// Every entry of the column becomes zero.
    ColumnZero(usize),
    /// A single entry becomes one.
    EntrySet { row: usize, col: usize },
}

/// Binary `M × N` matrix with cached per-column one-counts.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatrixState {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
    col_counts: Vec<usize>,
    full_cols: usize,
}

impl MatrixState {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
            col_counts: vec![0; cols],
            full_cols: if rows == 0 { cols } else { 0 },
        }
    }

    pub fn ones(rows: usize, cols: usize) -> Self {
        let mut s = Self::zeros(rows, cols);
        for i in 0..rows {
            s.set_row(i);
        }
        s
    }

    pub fn for_params(params: &MatrixParams) -> Self {
        Self::zeros(params.m(), params.n())
    }

    /// Builds a matrix from nested rows; nonzero entries count as ones.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, |r| r.as_ref().len());
        let mut s = Self::zeros(m, n);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != n {
                return Err(Error::InvalidParameter(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            for (j, &v) in r.iter().enumerate() {
                if v != 0 {
                    s.set_entry(i, j);
                }
            }
        }
        Ok(s)
    }

    /// Decodes a matrix from a bitmask where bit `i·N + j` is entry `(i, j)`.
    pub fn from_bitmask(rows: usize, cols: usize, mask: u64) -> Self {
        assert!(rows * cols <= 64, "bitmask encoding needs M·N <= 64");
        let mut s = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                if mask >> (i * cols + j) & 1 == 1 {
                    s.set_entry(i, j);
                }
            }
        }
        s
    }

    pub fn to_bitmask(&self) -> u64 {
        assert!(self.rows * self.cols <= 64, "bitmask encoding needs M·N <= 64");
        let mut mask = 0u64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if self.get(i, j) {
                    mask |= 1 << (i * self.cols + j);
                }
            }
        }
        mask
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.bits[row * self.words_per_row + col / 64] >> (col % 64) & 1 == 1
    }

    pub fn column_count(&self, col: usize) -> usize {
        self.col_counts[col]
    }

    pub fn column_counts(&self) -> &[usize] {
        &self.col_counts
    }

    /// Number of columns that are entirely ones.
    pub fn full_columns(&self) -> usize {
        self.full_cols
    }

    pub fn is_column_full(&self, col: usize) -> bool {
        self.col_counts[col] == self.rows
    }

    pub fn count_ones(&self) -> usize {
        self.col_counts.iter().sum()
    }

    pub fn to_rows(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| u8::from(self.get(i, j))).collect()).collect()
    }

    /// Recounts every column from the bits and compares with the caches.
    pub fn counts_consistent(&self) -> bool {
        let mut full = 0;
        for j in 0..self.cols {
            let c = (0..self.rows).filter(|&i| self.get(i, j)).count();
            if c != self.col_counts[j] {
                return false;
            }
            if c == self.rows {
                full += 1;
            }
        }
        full == self.full_cols
    }

    fn check_row(&self, row: usize) -> Result<()> {
        if row >= self.rows {
            return Err(Error::IndexOutOfRange { what: "row", index: row, limit: self.rows });
        }
        Ok(())
    }

    fn check_col(&self, col: usize) -> Result<()> {
        if col >= self.cols {
            return Err(Error::IndexOutOfRange { what: "column", index: col, limit: self.cols });
        }
        Ok(())
    }

    /// Applies `event` in place. Returns the change in the number of full
    /// columns.
    pub fn apply(&mut self, event: MatrixEvent) -> Result<isize> {
        let before = self.full_cols as isize;
        match event {
            MatrixEvent::RowSet(i) => {
                self.check_row(i)?;
                self.set_row(i);
            }
            MatrixEvent::ColumnZero(j) => {
                self.check_col(j)?;
                self.clear_column(j);
            }
            MatrixEvent::EntrySet { row, col } => {
                self.check_row(row)?;
                self.check_col(col)?;
                self.set_entry(row, col);
            }
        }
        Ok(self.full_cols as isize - before)
    }

    pub(crate) fn set_entry(&mut self, row: usize, col: usize) -> bool {
        let w = &mut self.bits[row * self.words_per_row + col / 64];
        let mask = 1u64 << (col % 64);
        if *w & mask != 0 {
            return false;
        }
        *w |= mask;
        self.col_counts[col] += 1;
        if self.col_counts[col] == self.rows {
            self.full_cols += 1;
        }
        true
    }

    pub(crate) fn set_row(&mut self, row: usize) {
        let base = row * self.words_per_row;
        for w in 0..self.words_per_row {
            let width = (self.cols - w * 64).min(64);
            let valid = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
            let mut fresh = !self.bits[base + w] & valid;
            self.bits[base + w] |= valid;
            while fresh != 0 {
                let j = w * 64 + fresh.trailing_zeros() as usize;
                fresh &= fresh - 1;
                self.col_counts[j] += 1;
                if self.col_counts[j] == self.rows {
                    self.full_cols += 1;
                }
            }
        }
    }

    pub(crate) fn clear_column(&mut self, col: usize) {
        if self.col_counts[col] == 0 {
            return;
        }
        if self.col_counts[col] == self.rows {
            self.full_cols -= 1;
        }
        let mask = !(1u64 << (col % 64));
        for i in 0..self.rows {
            self.bits[i * self.words_per_row + col / 64] &= mask;
        }
        self.col_counts[col] = 0;
    }
}

/// Pure form of [`MatrixState::apply`].
pub fn apply_event(state: &MatrixState, event: MatrixEvent) -> Result<MatrixState> {
    let mut next = state.clone();
    next.apply(event)?;
    Ok(next)
}

/// `H_S`: sets every row in `rows` to ones.
pub fn fill_rows(state: &MatrixState, rows: &[usize]) -> Result<MatrixState> {
    let mut next = state.clone();
    for &i in rows {
        next.apply(MatrixEvent::RowSet(i))?;
    }
    Ok(next)
}

/// `W_R`: zeroes every column in `cols`.
pub fn delete_columns(state: &MatrixState, cols: &[usize]) -> Result<MatrixState> {
    let mut next = state.clone();
    for &j in cols {
        next.apply(MatrixEvent::ColumnZero(j))?;
    }
    Ok(next)
}

/// Evaluates `W_{R_T} ∘ H_{S_T} ∘ … ∘ W_{R_1} ∘ H_{S_1}(A)` entrywise
/// without replaying the steps.
///
/// Entry `(i, j)` of the result is one iff either row `i` is in no `S_t`,
/// column `j` is in no `R_t` and `A` had a one there, or there is a step
/// `t` whose `S_t` is the last one containing `i` and column `j` is not
/// deleted at step `t` or later.
pub fn compose_closed_form(
    initial: &MatrixState,
    additions: &[Vec<usize>],
    deletions: &[Vec<usize>],
) -> Result<MatrixState> {
    if additions.len() != deletions.len() {
        return Err(Error::InvalidParameter(format!(
            "{} addition steps but {} deletion steps",
            additions.len(),
            deletions.len()
        )));
    }
    let (m, n) = (initial.rows(), initial.cols());
    // last step that fills row i, and first step index from which column j
    // stays untouched (deleted_from[j] = last deletion step + 1).
    let mut last_fill: Vec<Option<usize>> = vec![None; m];
    let mut last_delete: Vec<Option<usize>> = vec![None; n];
    for (t, (s, r)) in additions.iter().zip(deletions).enumerate() {
        for &i in s {
            initial.check_row(i)?;
            last_fill[i] = Some(t);
        }
        for &j in r {
            initial.check_col(j)?;
            last_delete[j] = Some(t);
        }
    }
    let mut out = MatrixState::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            let one = match (last_fill[i], last_delete[j]) {
                (None, None) => initial.get(i, j),
                (None, Some(_)) => false,
                (Some(_), None) => true,
                // within a step the fill precedes the deletion
                (Some(f), Some(d)) => f > d,
            };
            if one {
                out.set_entry(i, j);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sc(m: usize, alpha: f64, p: f64) -> SingleColumnParams {
        SingleColumnParams::new(m, alpha, p).unwrap()
    }

    #[test]
    fn rates_at_zero_omit_self_loop() {
        let r = enumerate_rates(ColumnState(0), &sc(2, 1.0, 0.5));
        assert_eq!(r, vec![(ColumnState(1), 0.5)]);
    }

    #[test]
    fn rates_in_the_interior() {
        let r = enumerate_rates(ColumnState(1), &sc(2, 1.0, 0.5));
        assert_eq!(r, vec![(ColumnState(2), 0.25), (ColumnState(0), 0.5)]);
    }

    #[test]
    fn rates_at_top_only_reset() {
        for &(m, alpha, p) in &[(1, 1.0, 0.5), (7, 0.3, 0.9), (50, 2.0, 0.01)] {
            let r = enumerate_rates(ColumnState(m), &sc(m, alpha, p));
            assert_eq!(r, vec![(ColumnState(0), p)]);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SingleColumnParams::new(0, 1.0, 0.5).is_err());
        assert!(SingleColumnParams::new(3, 0.0, 0.5).is_err());
        assert!(SingleColumnParams::new(3, 1.0, 1.0).is_err());
        assert!(SingleColumnParams::new(3, 1.0, 0.0).is_err());
        assert!(MatrixParams::new(2, 2, 0.5, -0.1).is_err());
        assert!(MatrixParams::new(0, 2, 0.5, 0.0).is_err());
        assert!(ColumnState::new(4, &sc(3, 1.0, 0.5)).is_err());
    }

    #[test]
    fn shape_constructor_recovers_a() {
        let s = SingleColumnParams::with_shape(64, 1.0, 1.0).unwrap();
        assert!((s.a() - 1.0).abs() < 1e-12);
        assert!((s.p() + s.q() - 1.0).abs() == 0.0);
    }

    #[test]
    fn derived_matrix_constants() {
        let mp = MatrixParams::new(200, 100, 0.1, 1.0).unwrap();
        assert!((mp.q_tilde() - 1.9).abs() < 1e-15);
        assert!((mp.b() - 0.2 / 0.9).abs() < 1e-15);
        assert!((mp.b_tilde() - 0.2 / 1.9).abs() < 1e-15);
        assert!((mp.total_rate() - 101.0).abs() < 1e-12);
    }

    #[test]
    fn apply_event_examples() {
        let a = MatrixState::zeros(2, 2);
        let b = apply_event(&a, MatrixEvent::RowSet(0)).unwrap();
        assert_eq!(b.to_rows(), vec![vec![1, 1], vec![0, 0]]);
        let c = apply_event(&b, MatrixEvent::ColumnZero(1)).unwrap();
        assert_eq!(c.to_rows(), vec![vec![1, 0], vec![0, 0]]);
        let d = apply_event(&a, MatrixEvent::EntrySet { row: 1, col: 0 }).unwrap();
        assert_eq!(d.to_rows(), vec![vec![0, 0], vec![1, 0]]);
    }

    #[test]
    fn apply_event_rejects_out_of_range() {
        let a = MatrixState::zeros(2, 3);
        assert!(apply_event(&a, MatrixEvent::RowSet(2)).is_err());
        assert!(apply_event(&a, MatrixEvent::ColumnZero(3)).is_err());
        assert!(apply_event(&a, MatrixEvent::EntrySet { row: 0, col: 3 }).is_err());
    }

    #[test]
    fn wide_rows_cross_word_boundaries() {
        let mut a = MatrixState::zeros(3, 130);
        a.apply(MatrixEvent::RowSet(1)).unwrap();
        assert_eq!(a.count_ones(), 130);
        a.apply(MatrixEvent::RowSet(0)).unwrap();
        a.apply(MatrixEvent::RowSet(2)).unwrap();
        assert_eq!(a.full_columns(), 130);
        a.apply(MatrixEvent::ColumnZero(129)).unwrap();
        a.apply(MatrixEvent::ColumnZero(64)).unwrap();
        assert_eq!(a.full_columns(), 128);
        assert!(a.counts_consistent());
    }

    #[test]
    fn bitmask_round_trip() {
        let a = MatrixState::from_rows(&[[1u8, 0, 1], [0, 1, 1]]).unwrap();
        let mask = a.to_bitmask();
        assert_eq!(MatrixState::from_bitmask(2, 3, mask), a);
    }

    #[test]
    fn closed_form_examples() {
        let zero = MatrixState::zeros(2, 2);
        let r = compose_closed_form(&zero, &[vec![0]], &[vec![1]]).unwrap();
        assert_eq!(r.to_rows(), vec![vec![1, 0], vec![0, 0]]);

        let a = MatrixState::from_rows(&[[1u8, 0], [1, 1]]).unwrap();
        assert_eq!(compose_closed_form(&a, &[vec![]], &[vec![]]).unwrap(), a);

        let ones = MatrixState::ones(2, 2);
        let r = compose_closed_form(&ones, &[vec![], vec![]], &[vec![0], vec![1]]).unwrap();
        assert_eq!(r, MatrixState::zeros(2, 2));
    }

    #[test]
    fn closed_form_rejects_ragged_steps() {
        let a = MatrixState::zeros(2, 2);
        assert!(compose_closed_form(&a, &[vec![0]], &[]).is_err());
        assert!(compose_closed_form(&a, &[vec![5]], &[vec![]]).is_err());
    }

    fn event_strategy(m: usize, n: usize) -> impl Strategy<Value = MatrixEvent> {
        prop_oneof![
            (0..m).prop_map(MatrixEvent::RowSet),
            (0..n).prop_map(MatrixEvent::ColumnZero),
            (0..m, 0..n).prop_map(|(row, col)| MatrixEvent::EntrySet { row, col }),
        ]
    }

    fn scenario() -> impl Strategy<Value = (usize, usize, u64, Vec<MatrixEvent>)> {
        (1usize..=6, 1usize..=6).prop_flat_map(|(m, n)| {
            (Just(m), Just(n), any::<u64>(), prop::collection::vec(event_strategy(m, n), 0..50))
        })
    }

    fn to_steps(events: &[MatrixEvent]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
        // one (H, W) pair per event, the unused side empty
        let mut adds = Vec::new();
        let mut dels = Vec::new();
        for e in events {
            match *e {
                MatrixEvent::RowSet(i) => {
                    adds.push(vec![i]);
                    dels.push(vec![]);
                }
                MatrixEvent::ColumnZero(j) => {
                    adds.push(vec![]);
                    dels.push(vec![j]);
                }
                MatrixEvent::EntrySet { .. } => unreachable!(),
            }
        }
        (adds, dels)
    }

    proptest! {
        #[test]
        fn closed_form_matches_replay((m, n, seed, events) in scenario()) {
            let mask = if m * n == 64 { seed } else { seed & ((1u64 << (m * n)) - 1) };
            let start = MatrixState::from_bitmask(m, n, mask);
            let events: Vec<_> = events.into_iter()
                .filter(|e| !matches!(e, MatrixEvent::EntrySet { .. }))
                .collect();
            let mut replay = start.clone();
            for &e in &events {
                replay.apply(e).unwrap();
            }
            let (adds, dels) = to_steps(&events);
            prop_assert_eq!(compose_closed_form(&start, &adds, &dels).unwrap(), replay);
        }

        #[test]
        fn grouped_steps_match_h_then_w(
            (m, n) in (1usize..=6, 1usize..=6),
            steps in prop::collection::vec(
                (prop::collection::vec(0usize..6, 0..4), prop::collection::vec(0usize..6, 0..4)), 0..12),
            seed in any::<u64>(),
        ) {
            let steps: Vec<(Vec<usize>, Vec<usize>)> = steps.into_iter()
                .map(|(s, r)| (s.into_iter().filter(|&i| i < m).collect(), r.into_iter().filter(|&j| j < n).collect()))
                .collect();
            let start = MatrixState::from_bitmask(m, n, seed & ((1u64 << (m * n)) - 1));
            let mut replay = start.clone();
            for (s, r) in &steps {
                replay = delete_columns(&fill_rows(&replay, s).unwrap(), r).unwrap();
            }
            let adds: Vec<_> = steps.iter().map(|(s, _)| s.clone()).collect();
            let dels: Vec<_> = steps.iter().map(|(_, r)| r.clone()).collect();
            prop_assert_eq!(compose_closed_form(&start, &adds, &dels).unwrap(), replay);
        }

        #[test]
        fn caches_stay_consistent((m, n, seed, events) in scenario()) {
            let mask = if m * n == 64 { seed } else { seed & ((1u64 << (m * n)) - 1) };
            let mut s = MatrixState::from_bitmask(m, n, mask);
            for e in events {
                s.apply(e).unwrap();
                prop_assert!(s.counts_consistent());
            }
        }

        #[test]
        fn row_and_column_events_are_idempotent((m, n, seed, events) in scenario()) {
            let mask = if m * n == 64 { seed } else { seed & ((1u64 << (m * n)) - 1) };
            let s = MatrixState::from_bitmask(m, n, mask);
            for e in events {
                if matches!(e, MatrixEvent::EntrySet { .. }) { continue; }
                let once = apply_event(&s, e).unwrap();
                prop_assert_eq!(apply_event(&once, e).unwrap(), once);
            }
        }

        #[test]
        fn total_rate_matches_table(m in 1usize..40, k_frac in 0.0f64..=1.0, alpha in 0.01f64..10.0, p in 0.001f64..0.999) {
            let params = SingleColumnParams::new(m, alpha, p).unwrap();
            let k = ((m as f64) * k_frac).round() as usize;
            let total: f64 = enumerate_rates(ColumnState(k), &params).iter().map(|r| r.1).sum();
            let up = if k < m { alpha * (1.0 - p) * (1.0 - k as f64 / m as f64) } else { 0.0 };
            let reset = if k > 0 { p } else { 0.0 };
            prop_assert_eq!(total, up + reset);
        }
    }
}
