//! Parsing and reporting layers of the `certify` binary, exposed as a library
//! so integration tests can exercise them directly.

pub mod format;
pub mod report;
