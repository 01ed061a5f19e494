//! Model definition: parameters, quenched disorder, configurations and energies.

mod disorder;
pub(crate) mod energy;
mod params;
mod spins;

pub use disorder::DisorderSample;
pub use energy::{
    bias_term, energy, in_sector, is_local_maximum, map_to_ising, recolor_delta, sk_energy,
    Couplings,
};
pub use params::ModelParams;
pub use spins::{ColorProfile, SpinConfiguration, PROFILE_SUM_TOLERANCE};
