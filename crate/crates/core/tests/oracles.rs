//! Checks against values computed independently in the test code.

use std::f64::consts::PI;

use approx::assert_relative_eq;
use nematic_core::harmonic::{degree, detect_defects, psi_energy};
use nematic_core::ldg::{relax, StepMode};
use nematic_core::qtensor::{bulk_gradient, bulk_hessian_apply, bulk_potential, dist_to_ustar, eigen_system, s_star};
use nematic_core::quadrupole::{q0_eval, ring_radius};
use nematic_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_tensor(rng: &mut ChaCha8Rng, radius: f64) -> QTensor {
    loop {
        let u: [f64; 5] = std::array::from_fn(|_| rng.gen_range(-radius..radius));
        if u.iter().map(|v| v * v).sum::<f64>().sqrt() <= radius {
            return QTensor::new(u);
        }
    }
}

fn uniaxial(n: [f64; 3], s: f64) -> Mat3 {
    std::array::from_fn(|i| std::array::from_fn(|j| s * (n[i] * n[j] - if i == j { 1.0 / 3.0 } else { 0.0 })))
}

fn frob(a: &Mat3, b: &Mat3) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            s += (a[i][j] - b[i][j]).powi(2);
        }
    }
    s.sqrt()
}

#[test]
fn vacuum_order_is_a_critical_point_with_zero_energy() {
    for (a, b, c) in [(1.0, 2.0, 1.0), (0.0, 2.0, 1.0), (3.0, 4.0, 4.0), (0.5, 0.1, 2.0)] {
        let s = s_star(a, b, c).unwrap();
        let p = MaterialParams::new(a, b, c, 1.0, 0.0).unwrap();
        let f = |t: f64| bulk_potential(&QTensor::from_matrix(&uniaxial([0.0, 0.0, 1.0], t)), &p);
        let h = 1e-5;
        let d1 = (f(s + h) - f(s - h)) / (2.0 * h);
        let d2 = (f(s + h) - 2.0 * f(s) + f(s - h)) / (h * h);
        assert!(d1.abs() < 1e-8, "({a},{b},{c}): f'(s*) = {d1}");
        assert!(d2 > 0.0);
        assert!(f(s).abs() < 1e-13);
        // f is minimal among uniaxial states of either sign
        for t in [-2.0, -0.5, 0.0, 0.5 * s, 1.5 * s, 3.0] {
            assert!(f(t) >= -1e-13);
        }
    }
    assert_relative_eq!(
        s_star(1.0, 2.0, 1.0).unwrap(),
        (2.0 + 28f64.sqrt()) / 4.0,
        max_relative = 1e-15
    );
    assert_relative_eq!(
        s_star(3.0, 4.0, 4.0).unwrap(),
        (4.0 + 304f64.sqrt()) / 16.0,
        max_relative = 1e-15
    );
}

#[test]
fn bulk_hessian_matches_gradient_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = MaterialParams::new(1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
    for _ in 0..50 {
        let q = random_tensor(&mut rng, 2.0);
        let d = random_tensor(&mut rng, 1.0);
        let h = 1e-5;
        let gp = bulk_gradient(&q.add(&d.scaled(h)), &p);
        let gm = bulk_gradient(&q.sub(&d.scaled(h)), &p);
        let fd = gp.sub(&gm).scaled(0.5 / h);
        let an = bulk_hessian_apply(&q, &d, &p);
        assert!(fd.sub(&an).norm() <= 1e-7 * an.norm().max(1.0));
    }
}

/// Real roots of `det(A − λI)` by sign scan and bisection.
fn char_roots(m: &Mat3) -> Vec<f64> {
    let det = |l: f64| {
        let a = [
            [m[0][0] - l, m[0][1], m[0][2]],
            [m[1][0], m[1][1] - l, m[1][2]],
            [m[2][0], m[2][1], m[2][2] - l],
        ];
        a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
            + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
    };
    let bound = m.iter().flatten().map(|v| v.abs()).sum::<f64>() + 1.0;
    let n = 20_000;
    let mut roots = Vec::new();
    let mut prev = (-bound, det(-bound));
    for k in 1..=n {
        let x = -bound + 2.0 * bound * k as f64 / n as f64;
        let v = det(x);
        if prev.1 == 0.0 {
            roots.push(prev.0);
        } else if prev.1.signum() != v.signum() {
            let (mut lo, mut hi) = (prev.0, x);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if det(mid).signum() == det(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = (x, v);
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

#[test]
fn eigen_system_matches_characteristic_polynomial() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..40 {
        let q = random_tensor(&mut rng, 2.0);
        let m = q.to_matrix();
        let roots = char_roots(&m);
        assert_eq!(roots.len(), 3);
        let e = eigen_system(&q);
        for k in 0..3 {
            assert!((e.lambda[k] - roots[k]).abs() < 1e-10, "{:?} vs {roots:?}", e.lambda);
            let v = e.frame[k];
            for i in 0..3 {
                let av: f64 = (0..3).map(|j| m[i][j] * v[j]).sum();
                assert!((av - e.lambda[k] * v[i]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn distance_to_vacuum_matches_direction_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let p = MaterialParams::new(1.0, 2.0, 1.0, 1.0, 0.0).unwrap();
    for _ in 0..10 {
        let q = random_tensor(&mut rng, 2.0);
        let m = q.to_matrix();
        let dist = |th: f64, ph: f64| {
            let n = [th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()];
            frob(&m, &uniaxial(n, p.s_star))
        };
        // coarse sampling then local pattern search
        let mut best = (f64::INFINITY, 0.0, 0.0);
        for a in 0..200 {
            for b in 0..400 {
                let (th, ph) = (PI * a as f64 / 199.0, 2.0 * PI * b as f64 / 400.0);
                let v = dist(th, ph);
                if v < best.0 {
                    best = (v, th, ph);
                }
            }
        }
        let mut step = 0.02;
        while step > 1e-10 {
            let mut moved = false;
            for (dt, dp) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
                let v = dist(best.1 + dt, best.2 + dp);
                if v < best.0 {
                    best = (v, best.1 + dt, best.2 + dp);
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        let d = dist_to_ustar(&q, &p);
        assert!(d <= best.0 + 1e-12, "{d} > {}", best.0);
        assert!((d - best.0).abs() < 1e-9, "{d} vs {}", best.0);
    }
}

/// Real root of `r³ − A r² − B` (B > 0) from Cardano's formula.
fn cardano_root(a: f64, b: f64) -> f64 {
    // r = t + A/3: t³ + p t + q = 0
    let p = -a * a / 3.0;
    let q = -2.0 * a * a * a / 27.0 - b;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    let t = (-q / 2.0 + disc.sqrt()).cbrt() + (-q / 2.0 - disc.sqrt()).cbrt();
    t + a / 3.0
}

#[test]
fn ring_radius_matches_cardano() {
    for w in [1.75, 2.0, 3.0, 5.0, 10.0, 100.0, 1e6] {
        let r = ring_radius(w).unwrap();
        assert!(r.exists);
        let oracle = cardano_root(w / (1.0 + w), w / (3.0 + w));
        assert!((r.radius.unwrap() - oracle).abs() < 1e-12, "w={w}");
    }
    let inf = ring_radius(f64::INFINITY).unwrap().radius.unwrap();
    assert!((inf - cardano_root(1.0, 1.0)).abs() < 1e-12);
}

#[test]
fn q0_matches_assembled_formula() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for w in [0.5, 3.0, f64::INFINITY] {
        let s = 1.3;
        let cfg = QuadrupolarConfig::new(w, s).unwrap();
        let (k3, k1) = if w.is_infinite() {
            (1.0, 1.0)
        } else {
            (w / (3.0 + w), w / (1.0 + w))
        };
        for _ in 0..20 {
            let x: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-4.0..4.0));
            let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            if r < 1.0 {
                continue;
            }
            let er = [x[0] / r, x[1] / r, x[2] / r];
            let alpha = s * k3 / r.powi(3);
            let beta = s * (1.0 - k1 / r);
            let a = uniaxial(er, alpha);
            let b = uniaxial([0.0, 0.0, 1.0], beta);
            let expect: Mat3 = std::array::from_fn(|i| std::array::from_fn(|j| a[i][j] + b[i][j]));
            let got = q0_eval(x, &cfg).unwrap().to_matrix();
            assert!(frob(&got, &expect) < 1e-13);
        }
    }
}

#[test]
fn hedgehog_density_is_four_s_squared_over_r_squared() {
    // Q = s(x̂⊗x̂ − I/3): |∇Q|² = 2s²|∇x̂|² = 4s²/r²
    let s = 1.7;
    let field = |rho: f64, z: f64| AxiTensor::from_angle(rho.atan2(z), s);
    let h = 1e-3;
    let d = |f: &dyn Fn(f64) -> AxiTensor, t: f64| {
        let (a, b, c, e) = (f(t - 2.0 * h), f(t - h), f(t + h), f(t + 2.0 * h));
        let g = |x: f64, y: f64, u: f64, v: f64| (x - 8.0 * y + 8.0 * u - v) / (12.0 * h);
        AxiTensor::new(
            g(a.rr, b.rr, c.rr, e.rr),
            g(a.tt, b.tt, c.tt, e.tt),
            g(a.rz, b.rz, c.rz, e.rz),
        )
    };
    for (rho, z) in [(1.0, 0.5), (0.3, -2.0), (2.5, 2.5), (0.05, 1.2)] {
        let dr = d(&|t| field(t, z), rho);
        let dz = d(&|t| field(rho, t), z);
        let got = ldg::reduced_elastic_density(field(rho, z), dr, dz, rho);
        let r2 = rho * rho + z * z;
        assert_relative_eq!(got, 4.0 * s * s / r2, max_relative = 1e-8);
    }
}

#[test]
fn defect_census_locates_a_synthetic_jump() {
    let g = ExteriorGrid::new(10.0, 200, 64).unwrap();
    let z0 = -2.0;
    // director flips from +e_z to −e_z along the axis below z0
    let f = PsiField::from_fn(&g, FarField::Zero, |r, phi| {
        let (rho, z) = (r * phi.sin(), r * phi.cos());
        let t = (rho).atan2(z - z0);
        if z < 0.0 && r < 6.0 { PI - t } else { 0.0 }.clamp(0.0, PI)
    });
    let census = detect_defects(&f, &g).unwrap();
    assert_eq!(census.defects.len(), 1, "{census:?}");
    let d = census.defects[0];
    let cell = g.hs * 4.0;
    assert!((d.z0 - z0).abs() < 2.0 * cell, "{}", d.z0);
    assert_eq!(d.jump, 1);
    assert!((degree(&f, &g, 1.0).unwrap() + 1.0).abs() < 1e-12);
    assert!(psi_energy(&f, &g).unwrap() > 0.0);
}

#[test]
fn far_field_is_already_an_equilibrium() {
    let g = ExteriorGrid::new(10.0, 16, 12).unwrap();
    let p = MaterialParams::new(1.0, 2.0, 1.0, 5.0, 0.0).unwrap();
    let f0 = AxiQField::far_field(&g, &p);
    for mode in [StepMode::Newton, StepMode::GradientFlow] {
        let schedule = StepSchedule {
            mode,
            ..Default::default()
        };
        let (f, rep) = relax(&f0, &p, &g, &schedule).unwrap();
        assert!(rep.converged);
        assert_eq!(rep.iterations, 0);
        assert_eq!(f, f0);
    }
}
