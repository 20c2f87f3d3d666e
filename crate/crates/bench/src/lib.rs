//! Shared fixtures for the kernel benchmarks.

use nematic_core::{ExteriorGrid, MaterialParams, QTensor};

/// Default material `(a, b, c) = (1, 2, 1)` at the given `L` and `W`.
pub fn material(l: f64, w: f64) -> MaterialParams {
    MaterialParams::new(1.0, 2.0, 1.0, l, w).expect("valid constants")
}

/// A spread of tensors with distinct, repeated and near-repeated eigenvalues.
pub fn sample_tensors() -> Vec<QTensor> {
    (0..64)
        .map(|k| {
            let t = k as f64 * 0.37;
            QTensor::new([
                t.sin(),
                (2.0 * t).cos(),
                0.3 * t.sin() * t.cos(),
                1e-9 * (k % 3) as f64,
                (0.5 * t).sin(),
            ])
        })
        .collect()
}

pub fn grid(r_out: f64, n_s: usize, n_phi: usize) -> ExteriorGrid {
    ExteriorGrid::new(r_out, n_s, n_phi).expect("valid grid")
}
