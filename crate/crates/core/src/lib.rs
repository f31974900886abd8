//! Interpretable tree policies: lexical decision trees, their differentiable
//! relaxations, PPO training, and explanations rendered back to text.
//!
//! The numeric core is generic over [`scalar::Scalar`]; the aliases below fix
//! the common choices.

pub mod corpus;
pub mod ddt;
pub mod envs;
pub mod explain;
pub mod rl;
pub mod scalar;
pub mod tree;

pub use ddt::{Ddt, DdtError, DdtGrad, InitConfig, LeafMode};
pub use tree::{Domain, LexicalTree, Node, PredicateDictionary};

pub type Ddt64 = Ddt<f64>;
pub type Ddt32 = Ddt<f32>;
pub type DdtGrad64 = DdtGrad<f64>;
