//! Axisymmetric tensors in the cylindrical frame `(e_ρ, e_θ, e_z)`.
//!
//! An axisymmetric Q with `e_θ` as eigenvector is the matrix
//! `[[rr, 0, rz], [0, tt, 0], [rz, 0, −rr−tt]]` in that frame. The solvers work in
//! the orthonormal coordinates
//!
//! ```text
//! x1 = (rr − tt)/√2,   x2 = √(3/2)·zz,   x3 = √2·rz
//! ```
//!
//! in which `|Q|² = x1² + x2² + x3²` and the azimuthal part of `|∇Q|²` is
//! `(4 x1² + x3²)/ρ²`.

use serde::{Deserialize, Serialize};

use crate::qtensor::QTensor;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT3_2: f64 = 1.224_744_871_391_589;

/// Weight of each orthonormal coordinate in the azimuthal elastic term.
pub const AZIMUTHAL_WEIGHT: [f64; 3] = [4.0, 0.0, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct AxiTensor {
    pub rr: f64,
    pub tt: f64,
    pub rz: f64,
}

impl AxiTensor {
    pub fn new(rr: f64, tt: f64, rz: f64) -> Self {
        Self { rr, tt, rz }
    }

    pub fn zz(&self) -> f64 {
        -self.rr - self.tt
    }

    pub fn to_x(&self) -> [f64; 3] {
        [(self.rr - self.tt) / SQRT2, SQRT3_2 * self.zz(), SQRT2 * self.rz]
    }

    pub fn from_x(x: [f64; 3]) -> Self {
        let zz = x[1] / SQRT3_2;
        let diff = x[0] * SQRT2;
        // rr + tt = −zz, rr − tt = diff
        Self {
            rr: 0.5 * (-zz + diff),
            tt: 0.5 * (-zz - diff),
            rz: x[2] / SQRT2,
        }
    }

    pub fn norm(&self) -> f64 {
        let x = self.to_x();
        (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt()
    }

    /// Cartesian tensor at azimuth `theta`.
    pub fn to_qtensor(&self, theta: f64) -> QTensor {
        let (s, c) = theta.sin_cos();
        let e_rho = [c, s, 0.0];
        let e_th = [-s, c, 0.0];
        let e_z = [0.0, 0.0, 1.0];
        let mut m = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.rr * e_rho[i] * e_rho[j]
                    + self.tt * e_th[i] * e_th[j]
                    + self.zz() * e_z[i] * e_z[j]
                    + self.rz * (e_rho[i] * e_z[j] + e_z[i] * e_rho[j]);
            }
        }
        QTensor::from_matrix(&m)
    }

    /// Uniaxial `s(n⊗n − I/3)` with `n = sinψ e_ρ + cosψ e_z`.
    pub fn from_angle(psi: f64, s: f64) -> Self {
        let (sp, cp) = psi.sin_cos();
        Self {
            rr: s * (sp * sp - 1.0 / 3.0),
            tt: -s / 3.0,
            rz: s * sp * cp,
        }
    }

    /// Radial anchoring tensor `Q_s` at polar angle `phi`.
    pub fn radial(phi: f64, s_star: f64) -> Self {
        let (sp, cp) = phi.sin_cos();
        Self::radial_sc(sp, cp, s_star)
    }

    /// As [`Self::radial`], from precomputed `sin φ` and `cos φ`.
    pub fn radial_sc(sp: f64, cp: f64, s_star: f64) -> Self {
        Self {
            rr: s_star * (sp * sp - 1.0 / 3.0),
            tt: -s_star / 3.0,
            rz: s_star * sp * cp,
        }
    }

    /// `Q∞ = s*(e_z⊗e_z − I/3)`.
    pub fn far_field(s_star: f64) -> Self {
        Self::from_angle(0.0, s_star)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip_and_norm() {
        let t = AxiTensor::new(0.3, -0.7, 0.25);
        let back = AxiTensor::from_x(t.to_x());
        assert!((back.rr - t.rr).abs() < 1e-15);
        assert!((back.tt - t.tt).abs() < 1e-15);
        assert!((back.rz - t.rz).abs() < 1e-15);
        let q = t.to_qtensor(0.4);
        assert!((q.norm() - t.norm()).abs() < 1e-14);
    }

    #[test]
    fn far_field_matches_q_infinity() {
        let q = AxiTensor::far_field(1.5).to_qtensor(1.1);
        let expect = QTensor::from_director([0.0, 0.0, 1.0], 1.5).unwrap();
        assert!(q.sub(&expect).norm() < 1e-15);
    }
}
