//! End-to-end flows: control signals from annotated video (training) and from
//! user trajectories on a single image (inference).

mod config;
mod inference;
mod place;
mod training;
mod trajectory;

pub use config::{SessionConfig, DEFAULT_FRAMES, DEFAULT_HEIGHT, DEFAULT_WIDTH};
pub use inference::{frame_translations, synthesize_inference_signals, InferenceOutput};
pub use training::{extract_training_signals, extract_training_signals_for, TrainingOutput};
pub use trajectory::{interpolate_trajectory, FieldError, TrajectoryDocument, TrajectorySpec, Waypoint};
