//! Command-line front end for `nashseek`: scenario loading, equilibrium and
//! bound reports, seeded single runs, and Monte-Carlo law comparisons with
//! CSV/JSON/SVG output.

pub mod commands;
pub mod output;
pub mod plot;

pub use commands::{bounds, compare, ensemble, load, simulate, solve_ne, LawComparison};
