//! Regular LDPC ensembles: density evolution, finite-length code sampling,
//! message-passing decoders, and frame-error-rate scans.

mod bp;
mod code;
mod de;
mod fer;

pub use bp::{bp_decode, transmit, Channel, DecodeOutcome, Received};
pub use code::{build_code, girth_up_to, LdpcCode};
pub use de::{
    bla_shift, bla_tangency_check, de_converges, de_map, de_map_deriv, de_threshold,
    tangency_point, DeThreshold, LdpcEnsemble, TangencyReport, DE_CONVERGENCE_EPS, DE_MAX_ITERS,
};
pub use fer::{fer_scan, wilson_interval, FerPoint, FerTable};
