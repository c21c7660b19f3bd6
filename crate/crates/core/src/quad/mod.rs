//! Quadrature for power-law singular integrands and the elementary integral
//! lemmas (global and local `L^1` and beta-function type bounds).

mod gauss;
mod lemmas;
mod singular;

pub use gauss::{gauss_legendre, GaussRule};
pub use lemmas::{
    lemma_constant, lemma_integral, local_beta_branches, sphere_area, verify_lemma, LemmaId,
    LemmaParams,
};
pub use singular::{integrate_singular, Domain, Estimate, Factor, SingularIntegrand, SmoothFn};
