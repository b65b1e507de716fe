//! Cloud controller inference: partitions, rule firing, consequent
//! generation and reverse-cloud aggregation.

mod canonical;
mod general;
mod partition;

pub use canonical::{
    aggregate, consequent_singletons, controller_step, controller_step_traced, fire_corner_weights, infer,
    sample_denominator, scale_and_clamp, CloudController, ControllerConfig, ControllerState, DeltaMode, Mode,
    OutputMode, Shape, TraceRow, DENOMINATOR_FLOOR,
};
pub use general::{general_controller_step, GeneralController, GeneralRule, RuleGrid};
pub use partition::{build_partition, ConsequentFamily, Partition, RuleBase};
