//! Blow-up laboratory: the test weight `φ_1`, the functionals `F` and `F_1`,
//! the ODE engine for the blow-up lemma, a finite-difference radial solver
//! and the three-dimensional Radon transform.

pub mod diagnostics;
pub mod fd;
pub mod functionals;
pub mod ode;
pub mod phi;
pub mod radon;

pub use diagnostics::{growth_exponent, BlowupDiagnostics, GrowthFit, Verdict};
pub use fd::{fd_blowup_diagnostics, radial_fd_solve, FdGrid, FdOutcome, OVERFLOW_GUARD};
pub use functionals::{f1_lower_bound, glassey_functionals, holder_constant, measured_t0, HolderReport};
pub use ode::{critical_k0_sweep, ode_blowup_integrate, LemmaBranch, OdeBlowupInstance, OdeConfig};
pub use phi::{log_phi1, phi1, sphere_area};
pub use radon::{radon_growth, radon_n3, C3};
