//! Labeled registers, density operators, Choi operators and the built-in
//! states and channels.

mod choi;
mod density;
pub mod factory;
mod json;
mod register;

pub use choi::{ChoiOperator, TP_TOL};
pub use density::{DensityOperator, PSD_FLOOR, TRACE_TOL};
pub use factory::{make_channel_choi, make_state, BuiltinChannel, BuiltinState};
pub use json::StateFile;
pub use register::QubitRegister;

pub(crate) use register::{block_raw, partial_trace_raw, project_raw};
