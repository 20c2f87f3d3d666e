use std::f64::consts::PI;

use nematic_core::analysis::{log_spaced, RateFit};
use nematic_core::harmonic::psi_energy;
use nematic_core::io::fmt17;
use nematic_core::qtensor::{biaxiality, bulk_potential, dist_to_ustar, eigen_system};
use nematic_core::quadrupole::{q0_eigenvalues, ring_polynomial, ring_radius};
use nematic_core::*;
use proptest::prelude::*;

fn tensor() -> impl Strategy<Value = QTensor> {
    prop::array::uniform5(-2.0f64..2.0).prop_map(QTensor::new)
}

/// Rotation from a (not necessarily unit) quaternion.
fn rotation() -> impl Strategy<Value = Mat3> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("non-degenerate", |q| q.iter().map(|v| v * v).sum::<f64>() > 0.05)
        .prop_map(|q| {
            let n = q.iter().map(|v| v * v).sum::<f64>().sqrt();
            let [w, x, y, z] = q.map(|v| v / n);
            [
                [
                    1.0 - 2.0 * (y * y + z * z),
                    2.0 * (x * y - w * z),
                    2.0 * (x * z + w * y),
                ],
                [
                    2.0 * (x * y + w * z),
                    1.0 - 2.0 * (x * x + z * z),
                    2.0 * (y * z - w * x),
                ],
                [
                    2.0 * (x * z - w * y),
                    2.0 * (y * z + w * x),
                    1.0 - 2.0 * (x * x + y * y),
                ],
            ]
        })
}

fn params() -> MaterialParams {
    MaterialParams::new(1.0, 2.0, 1.0, 1.0, 0.0).unwrap()
}

proptest! {
    #[test]
    fn matrix_round_trip(q in tensor()) {
        let m = q.to_matrix();
        prop_assert!((m[0][0] + m[1][1] + m[2][2]).abs() < 1e-14);
        let back = QTensor::from_matrix(&m);
        prop_assert!(back.sub(&q).norm() < 1e-14);
    }

    #[test]
    fn spectrum_is_traceless_ordered_and_rotation_invariant(q in tensor(), r in rotation()) {
        let l = eigen_system(&q).lambda;
        prop_assert!(l[0] >= l[1] && l[1] >= l[2]);
        prop_assert!((l[0] + l[1] + l[2]).abs() < 1e-12);
        let n2: f64 = l.iter().map(|v| v * v).sum();
        prop_assert!((n2 - q.norm_sq()).abs() < 1e-12 * (1.0 + n2));
        let lr = eigen_system(&q.rotated(&r)).lambda;
        for k in 0..3 {
            prop_assert!((l[k] - lr[k]).abs() < 1e-11);
        }
    }

    #[test]
    fn bulk_potential_is_invariant_and_bounded_below(q in tensor(), r in rotation()) {
        let p = params();
        let f = bulk_potential(&q, &p);
        prop_assert!(f >= -1e-12);
        prop_assert!((f - bulk_potential(&q.rotated(&r), &p)).abs() < 1e-11 * (1.0 + f.abs()));
        let d = dist_to_ustar(&q, &p);
        prop_assert!((d - dist_to_ustar(&q.rotated(&r), &p)).abs() < 1e-10);
    }

    #[test]
    fn vacuum_states(n in prop::array::uniform3(-1.0f64..1.0)) {
        let len = n.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assume!(len > 0.1);
        let n = n.map(|v| v / len);
        let p = params();
        let q = QTensor::from_director(n, p.s_star).unwrap();
        prop_assert!(dist_to_ustar(&q, &p) < 1e-12);
        prop_assert!(bulk_potential(&q, &p).abs() < 1e-12);
        prop_assert!(biaxiality(&q).unwrap() < 1e-12);
    }

    #[test]
    fn biaxiality_in_unit_interval(q in tensor()) {
        if let Some(b) = biaxiality(&q) {
            prop_assert!((0.0..=1.0).contains(&b));
        }
    }

    #[test]
    fn axisymmetric_norm_is_azimuth_free(rr in -2.0f64..2.0, tt in -2.0f64..2.0, rz in -2.0f64..2.0, th in 0.0f64..6.3) {
        let t = AxiTensor::new(rr, tt, rz);
        let q = t.to_qtensor(th);
        prop_assert!((q.norm() - t.norm()).abs() < 1e-13);
        prop_assert!((q.norm() - t.to_qtensor(0.0).norm()).abs() < 1e-13);
    }

    #[test]
    fn ring_radius_is_a_root_and_monotone(w in 1.8f64..1e4, k in 1.01f64..3.0) {
        let a = ring_radius(w).unwrap();
        let b = ring_radius(w * k).unwrap();
        let (ra, rb) = (a.radius.unwrap(), b.radius.unwrap());
        prop_assert!(ring_polynomial(w, ra).abs() < 1e-12);
        prop_assert!(ra > 1.0 && rb > ra);
    }

    #[test]
    fn q0_branches_are_the_spectrum(w in 0.2f64..50.0, r in 1.0f64..6.0, phi in 0.0f64..PI) {
        let cfg = QuadrupolarConfig::new(w, 1.4).unwrap();
        let l = q0_eigenvalues(r, phi, &cfg);
        let e = eigen_system(&cfg.axi(r, phi).to_qtensor(0.0)).lambda;
        for k in 0..3 {
            prop_assert!((l[k] - e[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn log_spacing(lo in 0.1f64..10.0, span in 1.01f64..100.0, n in 2usize..40) {
        let v = log_spaced(lo, lo * span, n);
        prop_assert_eq!(v.len(), n);
        prop_assert_eq!(v[0], lo);
        prop_assert_eq!(v[n - 1], lo * span);
        prop_assert!(v.windows(2).all(|p| p[1] > p[0]));
    }

    #[test]
    fn rate_fit_recovers_power_laws(c in 0.01f64..10.0, k in 0.1f64..2.0) {
        let ls = [25.0, 100.0, 400.0, 1600.0];
        let errs: Vec<f64> = ls.iter().map(|l: &f64| c * l.powf(-k)).collect();
        let fit = RateFit::fit(&ls, &errs).unwrap();
        prop_assert!((fit.rate() - k).abs() < 1e-10);
        prop_assert!(fit.fit_residual < 1e-10);
    }

    #[test]
    fn fmt17_round_trips(v in prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO) {
        prop_assert_eq!(fmt17(v).parse::<f64>().unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_energy_is_mirror_invariant(seed in prop::collection::vec(0.0f64..PI, 6)) {
        let g = ExteriorGrid::new(8.0, 12, 17).unwrap();
        let f = PsiField::from_fn(&g, FarField::Zero, |r, phi| {
            (seed[0] * (seed[1] * r).sin() + seed[2] * (seed[3] * phi).cos() + seed[4] * phi / r + seed[5]).rem_euclid(PI)
        });
        let e = psi_energy(&f, &g).unwrap();
        let m = f.mirrored();
        prop_assert!((psi_energy(&m, &g).unwrap() - e).abs() <= 1e-12 * e);
        let back = m.mirrored();
        prop_assert_eq!(back.far, f.far);
        prop_assert!(back.psi.iter().zip(&f.psi).all(|(a, b)| (a - b).abs() < 1e-15));
    }
}

#[test]
fn schedules_serialize_in_kebab_case() {
    let s = StepSchedule {
        mode: ldg::StepMode::GradientFlow,
        ..Default::default()
    };
    let text = serde_json::to_string(&s).unwrap();
    assert!(text.contains("\"gradient-flow\""), "{text}");
    let back: StepSchedule = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
}

#[test]
fn relaxation_descends_monotonically_to_tolerance() {
    let g = ExteriorGrid::new(10.0, 24, 18).unwrap();
    for (l, w) in [(10.0, 30.0), (50.0, f64::INFINITY), (5.0, 0.0)] {
        let p = MaterialParams::new(1.0, 2.0, 1.0, l, w).unwrap();
        let f0 = AxiQField::warm_start(&g, &p).unwrap();
        for mode in [ldg::StepMode::Newton, ldg::StepMode::GradientFlow] {
            let schedule = StepSchedule {
                mode,
                max_iters: 5000,
                ..Default::default()
            };
            let (f, rep) = ldg::relax(&f0, &p, &g, &schedule).unwrap();
            assert!(rep.converged, "L={l} W={w} {mode:?}: residual {}", rep.residual);
            assert!(rep.energies.windows(2).all(|e| e[1] <= e[0]), "L={l} W={w} {mode:?}");
            assert!(ldg::residual(&f, &p, &g).unwrap().is_finite());
            let (sup, ok) = ldg::sup_bound_check(&f, &p);
            assert!(ok, "sup {sup}");
        }
    }
}
