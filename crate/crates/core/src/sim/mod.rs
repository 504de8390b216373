//! Time-domain simulation of the delayed closed loop.

pub mod closed_loop;
pub mod dde;
pub mod delay_line;
pub mod laws;
pub mod realization;
pub mod reference;

pub use closed_loop::{
    integrate_closed_loop, unforced_envelope, EnvelopeReport, Outcome, Sample, SimScenario,
    StepCommand, Trajectory,
};
pub use dde::{DdeRk4, LinearDelayDecay, RetardedSystem};
pub use delay_line::{DelayLine, Prehistory};
pub use laws::{
    layer1_voltages, layer2_command, layer3_command, measurement_map, output_estimates,
    OutputEstimates, PlantConfig, ReducedState,
};
pub use realization::{realize_g, GRealization};
pub use reference::{analytic_reference, second_order_step};
