//! Cognitive Program engine: program graphs, the strategy library, part
//! decomposition and the trial executive.

pub mod executive;
pub mod library;
pub mod parts;
pub mod program;

pub use executive::{
    deploy_strategy, run_trial, DeployOutcome, Deployment, EngineError, ExecutiveState, TrialOutcome, TrialRun,
};
pub use library::{parse_library, write_library, StrategyLibrary, DEFAULT_LIBRARY};
pub use program::{instantiate, sample_choice, CognitiveProgram, OperationKind};
