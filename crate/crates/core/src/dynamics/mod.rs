//! Spreading speed, front tracking and the pulsating-wave check.

pub mod front;
pub mod pulsating;
pub mod speed;

pub use front::{level_crossings, measure_front_speed, FrontTrace, InitialProfile, SimParams, FRONT_TRACE_HEADER};
pub use pulsating::{pulsating_wave_check, DefectSample, PulsatingOptions, PulsatingReport};
pub use speed::{is_quasiconvex, spreading_speed, spreading_speed_with, SpeedOptions, SpeedResult, SpeedSample};
