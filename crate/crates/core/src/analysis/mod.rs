//! Abstract domain, storage model, aliasing and MOD summaries.

pub mod alias;
pub mod domain;
pub mod eval;
pub mod fold;
pub mod modsum;

pub use alias::{apply_call_effect, assign, bind_call, AliasPartition, CallBinding};
pub use domain::{AbstractEnv, AbstractValue, Location};
pub use eval::{eval_abstract, var_value};
pub use modsum::{cell_location, mod_summaries, ModSummary, Slot};
