pub mod atoms;
pub mod error;
pub mod kit;
pub mod layout;
pub mod measure;
pub mod paths;
pub mod report;
pub mod symbolic;

pub use atoms::{AtomId, AtomTriple, EdgeRank};
pub use error::{Error, Result};
pub use measure::{DyadicMass, EntropyBits};
pub use paths::{CountReport, PathSpec};
pub use report::{CheckRecord, Outcome, VerificationReport};
pub use symbolic::{PointCode, RefinementRule};
