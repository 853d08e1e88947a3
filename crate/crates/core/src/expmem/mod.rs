//! Fast path for the exponential kernel `h(t) = e^{-t/α}`, where the whole
//! past collapses to one number.

pub mod transient;
pub mod zchain;

pub use transient::{transient_experiment, TransientReport};
pub use zchain::{
    g_phi, gap_mean, increment_from_z, lyapunov_f, palm_gaps_from_z, simulate_z, stationary_z, steps_to_blow_up,
    z_from_state, z_step, StationaryZ, ZIntensity, ZPath,
};
