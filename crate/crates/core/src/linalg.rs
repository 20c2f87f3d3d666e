//! Banded symmetric positive definite storage and Cholesky factorisation.

use crate::error::{NematicError, Result};

/// Lower band of a symmetric matrix: `band[i * (bw + 1) + d] = A(i, i − d)`.
#[derive(Debug, Clone)]
pub(crate) struct BandMatrix {
    pub n: usize,
    pub bw: usize,
    pub band: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, bw: usize) -> Self {
        Self {
            n,
            bw,
            band: vec![0.0; n * (bw + 1)],
        }
    }

    /// Adds `v` to `A(i, j)` (and implicitly `A(j, i)`), `|i − j| ≤ bw`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        debug_assert!(hi - lo <= self.bw);
        self.band[hi * (self.bw + 1) + (hi - lo)] += v;
    }

    /// Couples unknowns `i` and `j` through the edge energy `k/2 (x_i − x_j)²`.
    pub fn add_edge(&mut self, i: usize, j: usize, k: f64) {
        self.add(i, i, k);
        self.add(j, j, k);
        self.add(i, j, -k);
    }

    pub fn cholesky(mut self) -> Result<BandCholesky> {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let l = &mut self.band;
        for i in 0..n {
            let jlo = i.saturating_sub(bw);
            for j in jlo..=i {
                let klo = jlo.max(j.saturating_sub(bw));
                let mut sum = l[i * w + (i - j)];
                for k in klo..j {
                    sum -= l[i * w + (i - k)] * l[j * w + (j - k)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(NematicError::domain(format!(
                            "preconditioner is not positive definite at row {i}"
                        )));
                    }
                    l[i * w] = sum.sqrt();
                } else {
                    l[i * w + (i - j)] = sum / l[j * w];
                }
            }
        }
        Ok(BandCholesky { n, bw, l: self.band })
    }
}

#[derive(Debug, Clone)]
pub(crate) struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// Solves `A x = b` in place.
    pub fn solve(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        let w = bw + 1;
        let l = &self.l;
        for i in 0..n {
            let mut sum = x[i];
            for k in i.saturating_sub(bw)..i {
                sum -= l[i * w + (i - k)] * x[k];
            }
            x[i] = sum / l[i * w];
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in i + 1..(i + bw + 1).min(n) {
                sum -= l[k * w + (k - i)] * x[k];
            }
            x[i] = sum / l[i * w];
        }
    }
}
