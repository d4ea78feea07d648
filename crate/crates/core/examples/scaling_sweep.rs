//! Diagnostics of the main and correction terms over a small grid of N,
//! printed as per-cell medians and written as CSV.
//!
//!     cargo run --example scaling_sweep > sweep.csv

use sksos::diagnostics::{scaling_sweep, write_sweep_csv, DiagnosticsOptions, SweepGrid};

fn main() -> sksos::Result<()> {
    let grid = SweepGrid {
        ns: vec![30, 45, 60],
        deltas: vec![0.5],
        alphas: vec![0.2],
        trials: 4,
    };
    let table = scaling_sweep(&grid, 2024, &DiagnosticsOptions::default())?;
    for c in &table.cells {
        eprintln!(
            "N={:>3}  |Delta|_op {:.4}  neg lambda(Z1a) {:.2e}  gram dist {:.4}  max|M_ij| {:.4}",
            c.n, c.median_delta_op_norm, c.median_z1a_negativity, c.median_gram_dist, c.median_max_offdiag_m
        );
    }
    for m in &table.monotone {
        eprintln!(
            "non-increasing in N: Delta {} Z1a {} gram {}",
            m.delta_op_norm, m.z1a_negativity, m.gram_dist
        );
    }
    write_sweep_csv(&table.rows, std::io::stdout())
}
