//! Alphabets, OPE structures, pointwise correlation systems, the multilinear
//! `V_n` calculus (concatenation, OPE-like and CZ-like elements) and the
//! factorized nearest-neighbor bound templates as checkable predicates.

mod bounds;
mod config;
mod label;
mod structure;
mod system;
mod velement;

pub use bounds::{check_bound, BoundEntry, BoundFormat, BoundReport, BoundTemplate, FormatFactor};
pub use config::{distance, japanese, PointConfiguration};
pub use label::{Label, Parity, IDENTITY};
pub use structure::{wick_label, wick_power, BoundParams, CoeffEntry, Kernel, OpeStructure};
pub use system::{eval_correlation, mixed_wick_correlation, CorrelationSystem, FreeFieldCorrelations};
pub use velement::{cz_element, ope_element, CoeffFactor, VElement, VTerm};
