//! The numbered studies: transport fidelities, parameter sweeps, the diode
//! and transistor figures of merit and jitter robustness.
//!
//! Every study starts from one [`RunConfig`]; studies only vary the
//! interaction, the exchange symmetry, the starting site or the swept
//! parameters. Grid points run on a bounded worker pool and rows come back
//! in grid order whatever the completion order.

mod studies;
mod table;
mod transport;

pub use studies::{
    diode_fidelity, diode_scan, jitter_robustness, sweep_fidelity, transistor_eval,
    transistor_fidelity, GridAxis, TransistorRecord,
};
pub use table::{Column, Table};
pub use transport::{run_transport, transport, RunReport, TransportRun};

use crate::error::{Error, Result};

/// Runs `f` over `items` on at most `workers` threads, keeping input order.
pub(crate) fn map_ordered<T, R, F>(items: &[T], workers: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::precondition(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}
