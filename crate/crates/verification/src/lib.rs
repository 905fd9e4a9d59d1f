//! Acceptance checks of the reference circulator designs.
//!
//! Everything lives in `tests/acceptance.rs`, a plain binary that prints one
//! line per criterion:
//!
//! ```text
//! cargo test -p verification --test acceptance           # all criteria
//! cargo test -p verification --test acceptance -- 4 6    # a subset
//! ```
