//! Holds the `acceptance` test target (see `tests/acceptance.rs`); the
//! library itself is empty.
