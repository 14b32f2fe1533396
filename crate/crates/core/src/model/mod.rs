//! Domain types, attitude and maneuver arithmetic, and schedule validation.

mod attitude;
mod instance;
mod schedule;
mod transition;
mod validate;

pub use attitude::{transition_angle, Attitude, AttitudeProfile};
pub use instance::{AttitudeBounds, EnvironmentRealization, Instance, Task, SCHEMA_VERSION};
pub use schedule::{expected_total_profit, Observation, Schedule, ScheduleStatus};
pub use transition::{TransitionModel, TransitionSegment};
pub use validate::{validate_schedule, ConstraintTag, ValidationReport, Violation};
