//! Step-size and inertia certificates, and checkers that hold recorded
//! trajectories against the guarantees those certificates promise.
//!
//! - [`certificate`]: admissible `α₀`, inertia bounds and rate `ρ` for the
//!   general scheme and for its heavy-ball-only and extrapolation-only forms.
//! - [`lemmas`]: verifiers for the two linear-recurrence lemmas behind the rates.
//! - [`verify`]: Lyapunov evaluation, envelope checks on traces and the
//!   per-iteration descent inequality.

pub mod certificate;
pub mod lemmas;
pub mod verify;

pub use certificate::{
    alpha0_proof_tight, alpha0_stated, corollary1_at, corollary1_params, corollary2_at, corollary2_params,
    eta2_upper_bound, inertia_for, theorem1_at, theorem1_params, CertificateKind, RateCertificate, RateInputs,
};
pub use lemmas::{
    lemma1_verify, lemma2_condition, lemma2_split, lemma2_verify, Lemma1Params, Lemma2Params, Lemma2Split,
    LemmaReport, Verdict,
};
pub use verify::{
    lyapunov, lyapunov_from_parts, verify_descent_lemma, verify_theorem1_bound, BoundReport, DescentReport,
};
