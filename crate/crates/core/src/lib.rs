//! Classification of partially separable data.
//!
//! Only some subgroups of the positive class are distinguishable from the
//! negative class; the rest of the positives look exactly like negatives.
//! [`ssi::fit`] finds those subgroups by iterative clustering, trains one
//! detector per subgroup and OR-combines them, so a subject is called positive
//! as soon as any of its instances hits any detector.

pub mod classify;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod infotheory;
pub mod model_io;
mod par;
pub mod plot;
pub mod rng;
pub mod ssi;
pub mod synth;

pub use dataset::{Dataset, Instance, Label};
pub use error::{Error, Result};
pub use ssi::{EnsembleModel, FitOutcome, SsiConfig};
