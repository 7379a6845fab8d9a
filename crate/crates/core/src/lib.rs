//! Certification of contraction classes for single- and multivalued
//! self-mappings on finite metric spaces, multivalued Picard iteration
//! with a priori error bounds, and empirical validation of the
//! associated fixed-point and periodic-point statements against
//! independent brute-force oracles.
//!
//! The core is generic over the scalar type carrying distances: `f64`
//! for everyday use and [`Exact`] (arbitrary-precision rationals) when
//! comparisons must be exact. Concrete aliases live at the crate root.

#![forbid(unsafe_code)]

pub mod certify;
pub mod generate;
pub mod instance;
pub mod iterate;
pub mod mapping;
pub mod metric;
pub mod oracle;
pub mod scalar;

pub use certify::{
    certify, certify_banach, certify_chatterjea, certify_kannan, certify_orbital,
    certify_perimeter, certify_total_pairwise, certify_total_pairwise_multisets, condition_i,
    no_period2, Certificate, CertifyError, ChatterjeaDomain, ClassId, MultisetCheck, Parallelism,
};
pub use generate::{
    derive_seed, hub_map, line_space, metric_closure, random_euclidean_space, random_metric_space,
    random_multimap, random_single_map, GenConfig, GenError, GeneratedMap, MapFlavor, SpaceFlavor,
};
pub use instance::{instance_from_config, Instance, InstanceError, InstanceFile, MapKind};
pub use iterate::{
    a_priori_bound, bound_domination, chain_rate, effective_rate, initial_quantity_p,
    picard_iterate, rate_law_checks, required_steps, IterateError, OrbitTrace, Outcome,
    RateLawCheck, SelectionPolicy,
};
pub use mapping::{MapError, MultiMap, SingleMap};
pub use metric::{MetricError, MetricSpace, PointSet, PointSetError, SpaceSpec};
pub use oracle::{
    brute_fixed_points, brute_periodic, sweep, validate, Evidence, SweepOutcome, TheoremId,
    ValidateError, ValidationReport, Verdict,
};
pub use scalar::{Scalar, Tolerance};

/// Exact scalar for tolerance-free comparisons.
pub type Exact = num_rational::BigRational;

pub type Space64 = MetricSpace<f64>;
pub type SpaceExact = MetricSpace<Exact>;
pub type Certificate64 = Certificate<f64>;
pub type Trace64 = OrbitTrace<f64>;
