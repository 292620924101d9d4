//! One module per subcommand; each exposes `run(&Context, &Args)`.

pub mod detect;
pub mod encode;
pub mod eval;
pub mod fetch;
pub mod online;
pub mod pipeline;
pub mod sweep;
pub mod train;
