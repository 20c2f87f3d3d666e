//! Mapped exterior grid for the truncated domain `1 ≤ r ≤ R_out`.
//!
//! The radial coordinate is `s = 1/r`, sampled uniformly on `[1/R_out, 1]`; row 0 is
//! the particle surface and the last row the outer boundary. The polar angle is
//! uniform on `[0, π]`, both axis directions included. Quadrature weights are exact
//! cell integrals, so integrating 1 against the volume weights reproduces the shell
//! volume `(R_out³ − 1)/3 · 2` per radian of azimuth.

use serde::{Deserialize, Serialize};

use crate::error::{NematicError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ExteriorGrid {
    pub r_out: f64,
    pub n_s: usize,
    pub n_phi: usize,
    pub hs: f64,
    pub hphi: f64,
    /// `s_i = 1 − i·hs`.
    pub s: Vec<f64>,
    pub r: Vec<f64>,
    pub phi: Vec<f64>,
    /// `sin φ_j`, exactly mirror-symmetric.
    pub sin_phi: Vec<f64>,
    /// `cos φ_j`, exactly mirror-antisymmetric.
    pub cos_phi: Vec<f64>,
    /// `sin φ_{j+½}` on the `n_phi − 1` polar edges.
    pub sin_edge: Vec<f64>,
    /// `∫ sin φ dφ` over the polar cell of node `j`.
    pub m_phi: Vec<f64>,
    /// `∫ s⁻⁴ ds` over the radial cell of row `i` (equals `∫ r² dr`).
    pub w4: Vec<f64>,
    /// `∫ s⁻² ds` over the radial cell of row `i` (equals `∫ dr`).
    pub w2: Vec<f64>,
}

/// Plain-data description used in configs and reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub r_out: f64,
    pub n_s: usize,
    pub n_phi: usize,
}

impl ExteriorGrid {
    pub fn new(r_out: f64, n_s: usize, n_phi: usize) -> Result<Self> {
        if !(r_out > 1.0 && r_out.is_finite()) {
            return Err(NematicError::domain(format!("outer radius must exceed 1, got {r_out}")));
        }
        if n_s < 4 {
            return Err(NematicError::domain(format!("need at least 4 radial nodes, got {n_s}")));
        }
        if n_phi < 8 {
            return Err(NematicError::domain(format!(
                "need at least 8 polar nodes, got {n_phi}"
            )));
        }
        let s_min = 1.0 / r_out;
        let hs = (1.0 - s_min) / (n_s - 1) as f64;
        let s: Vec<f64> = (0..n_s)
            .map(|i| if i == n_s - 1 { s_min } else { 1.0 - i as f64 * hs })
            .collect();
        let r: Vec<f64> = s
            .iter()
            .enumerate()
            .map(|(i, &si)| if i == n_s - 1 { r_out } else { 1.0 / si })
            .collect();
        let mut w4 = Vec::with_capacity(n_s);
        let mut w2 = Vec::with_capacity(n_s);
        for (i, &si) in s.iter().enumerate() {
            let hi = if i == 0 { 1.0 } else { si + 0.5 * hs };
            let lo = if i == n_s - 1 { s_min } else { si - 0.5 * hs };
            w4.push((lo.powi(-3) - hi.powi(-3)) / 3.0);
            w2.push(1.0 / lo - 1.0 / hi);
        }

        let pi = std::f64::consts::PI;
        let hphi = pi / (n_phi - 1) as f64;
        let phi: Vec<f64> = (0..n_phi)
            .map(|j| if j == n_phi - 1 { pi } else { j as f64 * hphi })
            .collect();
        let mut sin_phi = vec![0.0; n_phi];
        let mut cos_phi = vec![0.0; n_phi];
        let mut m_phi = vec![0.0; n_phi];
        for j in 0..n_phi {
            let k = j.min(n_phi - 1 - j);
            let pk = k as f64 * hphi;
            let sign = if j == k { 1.0 } else { -1.0 };
            sin_phi[j] = if k == 0 { 0.0 } else { pk.sin() };
            cos_phi[j] = if 2 * k == n_phi - 1 { 0.0 } else { sign * pk.cos() };
            let a = (pk - 0.5 * hphi).max(0.0);
            let b = pk + 0.5 * hphi;
            m_phi[j] = if 2 * k == n_phi - 1 {
                2.0 * (0.5 * hphi).sin()
            } else {
                a.cos() - b.cos()
            };
        }
        let sin_edge: Vec<f64> = (0..n_phi - 1)
            .map(|j| {
                let k = j.min(n_phi - 2 - j);
                ((k as f64 + 0.5) * hphi).sin()
            })
            .collect();
        Ok(Self {
            r_out,
            n_s,
            n_phi,
            hs,
            hphi,
            s,
            r,
            phi,
            sin_phi,
            cos_phi,
            sin_edge,
            m_phi,
            w4,
            w2,
        })
    }

    pub fn from_spec(spec: &GridSpec) -> Result<Self> {
        Self::new(spec.r_out, spec.n_s, spec.n_phi)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            r_out: self.r_out,
            n_s: self.n_s,
            n_phi: self.n_phi,
        }
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_phi
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_phi + j
    }

    /// Volume weight `∫ r² sin φ dr dφ` of node `(i, j)`.
    pub fn volume(&self, i: usize, j: usize) -> f64 {
        self.w4[i] * self.m_phi[j]
    }

    pub fn is_axis(&self, j: usize) -> bool {
        j == 0 || j == self.n_phi - 1
    }

    /// Cylindrical coordinates `(ρ, z)` of node `(i, j)`.
    pub fn rho_z(&self, i: usize, j: usize) -> (f64, f64) {
        (self.r[i] * self.sin_phi[j], self.r[i] * self.cos_phi[j])
    }

    /// Row index `i` and weight `t ∈ [0, 1]` such that `s(r) = (1−t)s_i + t s_{i+1}`.
    pub fn locate(&self, r: f64) -> Option<(usize, f64)> {
        if !(r >= 1.0 && r <= self.r_out) {
            return None;
        }
        let t = (1.0 - 1.0 / r) / self.hs;
        let i = (t.floor() as usize).min(self.n_s - 2);
        Some((i, (t - i as f64).clamp(0.0, 1.0)))
    }

    /// Index of the polar node nearest the equator from above (`φ ≤ π/2`).
    pub fn equator_lower(&self) -> usize {
        (self.n_phi - 1) / 2
    }
}
