//! Global-path dynamic-programming tracking of a single moving object in
//! grayscale image sequences.
//!
//! The pipeline is: optional gray-level replication (a triangular membership
//! function), difference images summed over a detecting area, a forward pass
//! computing best cumulative scores and backpointers, and a traceback from
//! either the best final position or a seed pixel picked by two-stage Otsu
//! segmentation of the last frame. A bounding-box baseline, the TER/ATD
//! metrics and a synthetic scene generator with an exhaustive path oracle are
//! included for evaluation.

pub mod dp;
pub mod error;
pub mod frame;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod replication;
pub mod scoring;
pub mod segmentation;
pub mod synth;

pub use dp::{
    baseline_bbox_track, forward_pass, forward_pass_pruned, run_forward, traceback_argmax,
    traceback_seeded, BackpointerTable, PenaltyKernel, ScoreTable, TrackPath, TrackerConfig,
};
pub use error::{Error, Result};
pub use frame::{FrameSequence, GrayFrame, Grid, GroundTruth, PixelPos, RealFrame};
pub use metrics::{atd, ter, EvalReport};
pub use replication::{ReplicatedFrame, ReplicationFunction};
pub use scoring::{diff, local_score_field, motion_scores, DiffFrame, ScoreField};
pub use segmentation::{BinaryMask, Component, OtsuThreshold};
