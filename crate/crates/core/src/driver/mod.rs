//! The classification loop and its certificates.

pub mod classify;
pub mod gates;

pub use classify::{classify, Classification, ClassifyError, ClassifyOptions, MoveRecord, Outcome};
pub use gates::{
    certify_train_track, gates, has_back_tracking, periodic_order, BackTrack, Certificate,
    GateStructure,
};
