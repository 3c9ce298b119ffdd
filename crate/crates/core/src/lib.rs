//! Exact and approximate CNF encodings of at-most-k cardinality
//! constraints, with exact (big-integer) coverage analysis and model
//! search.
//!
//! - [`cnf`]: clause/formula representation, DIMACS I/O
//! - [`encoders`]: binomial and sequential-counter at-most-k encodings
//! - [`approx`]: approximate tree models and their CNF construction
//! - [`oracle`]: acceptance counting (structural recursion + brute force)
//! - [`metrics`]: literal rates, coverage efficiency, best-model search

pub mod approx;
pub mod cnf;
pub mod encoders;
pub mod metrics;
pub mod oracle;

pub use approx::{
    approx_literal_count, encode_approx, enumerate_shapes, EncodingResult, ModelShape,
    ShapeBounds, ShapeError, ShapeParseError, TreeLayout,
};
pub use cnf::{parse_dimacs, Clause, Cnf, CnfError, CnfStats, DimacsError, Lit, Var, VarRole};
pub use encoders::{at_most_binomial, at_most_counter, counter_literal_count, EncodeError};
pub use metrics::{
    best_model, efficiency, find_probability, literal_rate, rank_models, shape_literal_rate,
    EfficiencyReport, MetricsError,
};
pub use oracle::{
    accepts, count_accepted_bruteforce, count_accepted_cnf, count_accepted_dp, coverage,
    min_required_trues, sat_extend, AcceptHistogram, CoverageReport, OracleError,
};
