//! Acceptance checks for `catwell` live in `tests/acceptance.rs`.
//!
//! They are kept in their own package so that `cargo test --workspace` runs them
//! after every other test target.
