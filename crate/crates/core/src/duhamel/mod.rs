//! The nonlinear Duhamel operator, the Picard iteration for global radial
//! solutions in three dimensions, and checks of the integral estimates.

pub mod estimates;
pub mod kappa;
pub mod nonlinearity;
pub mod operator;
pub mod picard;

pub use estimates::{verify_i, verify_i0_i1, BoundReport, Quantity, XiSample, Zone, ZoneCeiling};
pub use kappa::{kappa_range, lemma_kappa_range, KappaRange};
pub use nonlinearity::{Nonlinearity, NonlinearityKind};
pub use operator::{apply_l, apply_l_characteristic, dr_rlu, CharacteristicL};
pub use picard::{decay_fit, picard_solve, IterationReport, PicardGrid};
