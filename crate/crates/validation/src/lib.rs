//! End-to-end acceptance checks for the workspace. The checks live in
//! `tests/acceptance.rs` and run with `cargo test -p shmod-validation`.
