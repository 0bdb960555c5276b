//! Function tables and the seeded samplers for every function distribution
//! the laboratory works with.

mod hybrid;
mod sample;
mod table;

pub use hybrid::{compose, find_component_collision, ComponentCollision, HybridChain, Stage};
pub use sample::{
    dr_table, hybrid_sample, injective_table, sample, sample_table, set_equality_sample, small_range_table,
    uniform_table, DistributionKind, DistributionSpec, RParam, Sample, SetEqualityInstance,
};
pub use table::{collision_profile, CollisionProfile, FunctionTable};
pub(crate) use table::first_collision;
