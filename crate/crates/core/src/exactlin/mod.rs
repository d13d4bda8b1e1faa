//! Exact linear algebra and sequence analysis.

pub mod charpoly;
pub mod expsum;
pub mod matrix;
pub mod modp;
pub mod poly;
pub mod recurrence;
pub mod roots;
pub mod series;
pub mod spectrum;

pub use charpoly::{charpoly, CharPoly};
pub use expsum::{exp_sum_decompose, ExpSumDecomposition, ExpSumTerm};
pub use matrix::{det_int, parse_rat, rat_inverse, rat_to_string, solve_dixon, IntMatrix, RatMatrix};
pub use poly::RatPoly;
pub use recurrence::{
    berlekamp_massey, holdout_check, table_recurrences_rat, BmOutcome, Holdout, Recurrence, RecurrenceJson,
    TableRecurrences,
};
pub use roots::{numeric_roots, root_clusters, RootCluster};
pub use series::{pade, zeta_from_traces, PowerSeries};
pub use spectrum::{Spectrum, SpectrumSummary};
