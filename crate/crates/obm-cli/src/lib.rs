//! Library side of the CLI: CSV helpers and the published-table checks,
//! shared between the binary and its integration tests.

pub mod csvio;
pub mod tables;
