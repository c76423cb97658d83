//! Empirical `ℓ^p → ℓ^q` norm estimates, exponent fits and closed-form bounds.

pub mod bounds;
pub mod experiment;
pub mod fit;
pub mod power;
pub mod probe;
pub mod symmetric;
pub mod weak;

pub use bounds::{
    birch_parameters, eta, interpolation_bound, theorem_exponent, trivial_bound_exponent,
    young_baseline, BirchParameters,
};
pub use experiment::{fit_exponent, Manifest, Method, NormRow};
pub use fit::ExponentFit;
pub use power::{power_iteration_lower_bound, Domain, PositiveOperator, PowerConfig};
pub use probe::{probe_ratio, Probe};
pub use weak::restricted_weak_probe;
