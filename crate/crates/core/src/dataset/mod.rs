//! Synthetic data, file formats and result writers.
//!
//! Joint distributions are stored as CSV: a `K_X,K` header line, then `K_X`
//! rows of `K` probabilities. Branch and curve outputs are CSV with fixed
//! columns ([`BRANCH_COLUMNS`], [`CURVE_COLUMNS`]); events, verification
//! results and run metadata go to a JSON [`Summary`]. Every number is
//! printed with 17 significant digits so files reproduce memory exactly.

mod generator;
mod io;

pub use generator::{binary_symmetric, gen_four_gaussian, GaussianComponent, GaussianMixtureSpec};
pub use io::{
    format_f64, load_joint, read_summary, save_joint, write_branches, write_branches_csv,
    write_curve, write_curve_csv, write_summary, CheckRecord, EventRecord, Summary, Unit,
    BRANCH_COLUMNS, CURVE_COLUMNS,
};
