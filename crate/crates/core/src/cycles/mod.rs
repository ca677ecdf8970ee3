//! Cycle candidates in base matrices and protographs, and their activeness
//! under a partitioning or lifting.

mod activeness;
mod candidate;
mod index;
mod objective;

pub use activeness::{
    compile_lift, compile_partition, compile_uts, is_active_lift, is_active_partition, is_uts_active,
    CompiledObject, LinearForm, Modulus, ObjectClass,
};
pub use candidate::{enumerate_candidates, enumerate_protograph_candidates, CandidateList, CycleCandidate};
pub use index::{ActiveCounter, EntryIndex};
pub use objective::{count_active, ObjectSet, ObjectiveSpec, ObjectiveValue};
