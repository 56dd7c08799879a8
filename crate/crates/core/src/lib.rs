//! Single Policy Updating for limited memory influence diagrams, solved over
//! junction trees in three architectures: Shafer-Shenoy, HUGIN and Lazy
//! Propagation. Every arithmetic operation is counted so the architectures
//! can be compared; a brute-force oracle provides ground truth.

pub mod arch;
pub mod compile;
pub mod error;
pub mod format;
pub mod generate;
pub mod model;
pub mod oracle;
pub mod report;
pub mod spu;
pub mod table;

pub use arch::Arch;
pub use error::{Error, Result};
pub use model::{Limid, LimidBuilder, Policy, Strategy, VarId};
pub use table::{OpCounter, Table};
