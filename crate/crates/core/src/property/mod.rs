//! Property likelihood, force-to-friction conversion and prior initialisation
//! from a class-property table.

mod force;
mod init;
mod table;

pub use force::{
    friction_from_forces, friction_from_forces_with, lowpass, read_force_stream, write_force_stream,
    ForceSample, FrictionReading, LowPassState, DEFAULT_PSI_MAX,
};
pub use init::{
    build_likelihood, init_product_prior, init_with_policy, nearest_class, InitPolicy, InitializedPrior,
    DEFAULT_C_CONST,
};
pub use table::{PropertyEntry, PropertyTable, SpreadKind};
