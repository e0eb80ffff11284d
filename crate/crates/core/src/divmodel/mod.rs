//! Big rings O_{K,W}, the Diophantine model of (Z, +, |) carried by the
//! multiples of a point, and the integer-subset equation system over Q.

mod model;
mod ring;
mod subset;

pub use model::{check_exclusions, decode, encode, model_add, model_divides, DivisibilityVerdict, ModelElement, ModelError, ModelValue};
pub use ring::{BaseField, PrimeRule, RingError, RingSpec};
pub use subset::{
    estimate_bounds_constant, inequality_chain, subset_check, subset_construct, ChainAudit, ChainInputs,
    EquationCheck, ExponentMode, NeededIndex, SubsetAudit, SubsetBudget, SubsetError,
    SubsetSystemConfig, SubsetWitness,
};
