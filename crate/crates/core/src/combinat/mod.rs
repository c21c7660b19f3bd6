//! Combinatorics of the pin-and-sum bounds: fixed-point-free endofunctions and
//! their hairy-cycle decompositions, leaf-first integration schedules, the
//! expansion of a moment difference into decomposition terms, the vertex
//! block table of a term, the two-scale `(τ, σ)` graph with its integration
//! plan, and exact power counting of the resulting `L^r` exponents.
//!
//! Vertices are 0-based throughout; [`Endofunction::from_one_based`] accepts
//! the 1-based notation used in worked examples.

mod blocks;
mod decomp;
mod endo;
mod graph;
mod hairy;
mod power;

pub use blocks::{Block, BlockTable, FactorClass, FactorDims, Side, TermShape, Vertex, Q};
pub use decomp::{enumerate_decompositions, nontrivial_triples, Decomposition};
pub use endo::{
    enumerate_ffe, nn_endofunction, nn_indicator, pin_and_sum_count, Endofunction, MAX_ENUMERATION_SIZE,
};
pub use graph::{
    check_two_scale_plan, construct_tau_sigma, support_violation, two_scale_schedule, verify_claim, ClaimCheck,
    PlanStep, TauSigmaGraph, TwoScalePlan, DEFAULT_DELTA,
};
pub use hairy::{
    check_component_schedule, check_schedule, full_schedule, hairy_decompose, integration_schedule,
    HairyComponent, HairyCycleDecomposition, Rule, ScheduleStep,
};
pub use power::{
    alpha_total, exhaustive_power_count, nu, ExhaustiveReport, NuResult, PowerCountLedger, PowerParams,
    TermReport,
};
