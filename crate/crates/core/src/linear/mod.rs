//! Stationary and coupling tools for affine and sublinear activations.

pub mod backward;
pub mod cesaro;
pub mod coupling;
pub mod domination;

pub use backward::{backward_sample, stationary_intensity, BackwardSample};
pub use cesaro::{cesaro_diagnostic, decade_checkpoints, wasserstein1, CesaroPoint, CesaroReport};
pub use coupling::{
    couple_clocks, coupling_bound_estimate, renewal_constants, ClockPair, Common, CouplingOptions, CouplingReport,
    Excess, PiecewiseConstant, RateFn,
};
pub use domination::{dominated_pair, DominatedPair};
