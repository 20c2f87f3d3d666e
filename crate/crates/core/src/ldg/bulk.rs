//! Bulk potential, gradient and Hessian action for axisymmetric tensors in the
//! orthonormal `x` coordinates (see [`crate::axi`]).

use crate::axi::AxiTensor;
use crate::qtensor::MaterialParams;

const SQRT2: f64 = std::f64::consts::SQRT_2;
const SQRT3_2: f64 = 1.224_744_871_391_589;

#[inline]
fn project(g00: f64, g11: f64, g22: f64, g02: f64) -> [f64; 3] {
    [(g00 - g11) / SQRT2, SQRT3_2 * g22, SQRT2 * g02]
}

#[inline]
pub(crate) fn potential(x: &[f64; 3], p: &MaterialParams) -> f64 {
    let q = AxiTensor::from_x(*x);
    let (rr, tt, zz, rz) = (q.rr, q.tt, q.zz(), q.rz);
    let t2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let t3 = tt * tt * tt + rr * rr * rr + zz * zz * zz + 3.0 * rz * rz * (rr + zz);
    -0.5 * p.a * t2 - p.b / 3.0 * t3 + 0.25 * p.c * t2 * t2 + p.c0
}

/// `f(x + d) − f(x)` without forming either value.
pub(crate) fn potential_change(x: &[f64; 3], d: &[f64; 3], p: &MaterialParams) -> f64 {
    let q = AxiTensor::from_x(*x);
    let e = AxiTensor::from_x(*d);
    let t2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let dt2 = d[0] * (2.0 * x[0] + d[0]) + d[1] * (2.0 * x[1] + d[1]) + d[2] * (2.0 * x[2] + d[2]);
    // a³ − b³ with a = b + h
    let cube = |b: f64, h: f64| h * (3.0 * b * b + 3.0 * b * h + h * h);
    let (rr, tt, zz, rz) = (q.rr, q.tt, q.zz(), q.rz);
    let (drr, dtt, dzz, drz) = (e.rr, e.tt, e.zz(), e.rz);
    let sum = rr + zz;
    let dsum = drr + dzz;
    let drz2 = drz * (2.0 * rz + drz);
    let dt3 = cube(tt, dtt) + cube(rr, drr) + cube(zz, dzz) + 3.0 * (drz2 * (sum + dsum) + rz * rz * dsum);
    -0.5 * p.a * dt2 - p.b / 3.0 * dt3 + 0.25 * p.c * dt2 * (2.0 * t2 + dt2)
}

#[inline]
pub(crate) fn gradient(x: &[f64; 3], p: &MaterialParams) -> [f64; 3] {
    let q = AxiTensor::from_x(*x);
    let (rr, tt, zz, rz) = (q.rr, q.tt, q.zz(), q.rz);
    let t2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let lin = -p.a + p.c * t2;
    let g00 = lin * rr - p.b * (rr * rr + rz * rz - t2 / 3.0);
    let g11 = lin * tt - p.b * (tt * tt - t2 / 3.0);
    let g22 = lin * zz - p.b * (rz * rz + zz * zz - t2 / 3.0);
    let g02 = lin * rz - p.b * rz * (rr + zz);
    project(g00, g11, g22, g02)
}

#[inline]
pub(crate) fn hessian_apply(x: &[f64; 3], d: &[f64; 3], p: &MaterialParams) -> [f64; 3] {
    let q = AxiTensor::from_x(*x);
    let e = AxiTensor::from_x(*d);
    let (rr, tt, zz, rz) = (q.rr, q.tt, q.zz(), q.rz);
    let (drr, dtt, dzz, drz) = (e.rr, e.tt, e.zz(), e.rz);
    let t2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let qd = x[0] * d[0] + x[1] * d[1] + x[2] * d[2];
    let s00 = 2.0 * (rr * drr + rz * drz);
    let s11 = 2.0 * tt * dtt;
    let s22 = 2.0 * (rz * drz + zz * dzz);
    let s02 = drz * (rr + zz) + rz * (drr + dzz);
    let tr = 2.0 / 3.0 * qd;
    let h00 = -p.a * drr - p.b * (s00 - tr) + p.c * (t2 * drr + 2.0 * qd * rr);
    let h11 = -p.a * dtt - p.b * (s11 - tr) + p.c * (t2 * dtt + 2.0 * qd * tt);
    let h22 = -p.a * dzz - p.b * (s22 - tr) + p.c * (t2 * dzz + 2.0 * qd * zz);
    let h02 = -p.a * drz - p.b * s02 + p.c * (t2 * drz + 2.0 * qd * rz);
    project(h00, h11, h22, h02)
}
