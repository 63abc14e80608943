//! Reset-based evaluation protocol, expected average overlap, hyperparameter
//! search and the ablation report.

pub mod ablation;
pub mod eao;
pub mod protocol;
pub mod results;
pub mod runner;
pub mod search;

pub use ablation::{ablation_report, AblationRow};
pub use eao::{eao, expected_overlap_curve};
pub use protocol::{
    run_protocol, FrameStatus, FrameTracker, OverlapMode, ProtocolConfig, Segment, SequenceResult,
};
pub use runner::{
    evaluate, run_scene, track_without_resets, EvalSummary, RunSettings, SyntheticTracker,
};
pub use search::{random_search, SearchRanges, SearchResult, Trial};
