//! The randomized request distribution used for the lower bound, with the
//! bookkeeping needed to amortize costs per top-level call.

mod experiment;
mod set_system;
mod stream;

pub use experiment::{
    engine_seed, evaluate_stream, lower_bound_predictions, run_lower_bound_experiment, CallCost,
    LowerBoundStats,
};
pub use set_system::{build_set_system, verify_set_system, SetSystem, Violation};
pub use stream::{
    adversary_stream, check_stream, constructive_labeling, emissions_per_call, span_pattern_cost,
    strategy_stream, CallSpan, Emission, EmissionStream, MarkState, StreamSink, StreamViolation,
    TopCall,
};
