//! Experiment runner, report emitter and acceptance suite for `commlab`.

pub mod experiments;
pub mod report;
pub mod suite;

use commlab::Error;

/// Process exit status for an error: 2 input, 3 verification, 4 resource,
/// 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) => 2,
        Error::Verification(_) => 3,
        Error::Resource(_) => 4,
        _ => 1,
    }
}

/// Caps the global rayon pool at `COMMLAB_THREADS` when set. Later calls
/// are no-ops.
pub fn init_threads() {
    if let Some(n) = std::env::var("COMMLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}
