//! H2 analysis and projection-based model reduction of linear time-periodic systems.
//!
//! Systems are handled in Floquet–Fourier form with the `e^{+i k w0 t}`
//! convention. The main entry points are [`ltp::FloquetFourierSystem`],
//! the three LTP H2 paths in [`ltp`], and the reduction driver
//! [`mor::reduce_ltp_algorithm1`].

pub mod bench;
pub mod error;
pub mod floquet;
pub mod fourier;
pub mod io;
pub mod linalg;
pub mod lti;
pub mod ltp;
pub mod lyapunov;
pub mod mor;
pub mod sim;

pub use error::{Error, ErrorCategory, Result};
pub use lti::LtiSystem;
pub use ltp::FloquetFourierSystem;
