//! File formats, retrieval simulation, converse reports and the `wpir`
//! command line, on top of `wpir-core`.

pub mod cli;
pub mod database_io;
pub mod format;
pub mod kind;
pub mod scheme_json;
pub mod sim;
pub mod tables;
pub mod verify;

pub use database_io::{decode_database, encode_database, generate_database, read_database, write_database};
pub use scheme_json::{scheme_from_json, scheme_to_json};
pub use sim::{audit_leakage, run_trials, AuditVerdict, Requests, SimReport};
pub use verify::{verify, verify_point, VerifyOptions, VerifyReport};
