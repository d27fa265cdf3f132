//! Error norms, convergence rates, the computable triple-norm surrogate,
//! discrete inf-sup constants and inequality probes.

mod infsup;
mod norms;
mod probes;
mod rates;
mod residuals;

pub use infsup::{infsup_from_matrices, infsup_gamma, norm_gram, DENSE_DOF_CAP};
pub use norms::{
    broken_h1_error, l2_error, l2_norm_fn, triple_norm_surrogate, NormWeights, TripleNormTerms,
};
pub use probes::{inequality_probes, ProbeReport, MIN_PROBE_SAMPLES};
pub use rates::{
    convergence_rate, convergence_rates, ErrorReport, LevelErrors, LevelRates, EXACTNESS_FLOOR,
};
pub use residuals::{
    apply_form, coercivity_check, galerkin_orthogonality_defect, local_conservation_residuals,
    CoercivityCheck,
};
