use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn nematic(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_nematic"));
    cmd.args(args).env_remove("NEMATIC_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn data(p: &Path) -> Value {
    let v: Value = serde_json::from_str(&read(p)).unwrap();
    v["data"].clone()
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("run.toml");
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn ring_table_on_stdout() {
    let o = nematic(&["ring", "1", "1.7320508075688772", "3", "inf"], &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<Vec<&str>> = text.lines().map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0], ["w", "exists", "r_w", "residual"]);
    assert_eq!(rows[1][1], "false");
    assert_eq!(rows[1][2], "");
    assert_eq!(rows[2][2].parse::<f64>().unwrap(), 1.0);
    assert_eq!(rows[4][0], "inf");
    let r: f64 = rows[4][2].parse().unwrap();
    assert!((r * r * r - r * r - 1.0).abs() < 1e-12);
}

#[test]
fn ring_rejects_empty_and_invalid_lists() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[ring]\nw_values = []\n");
    assert_eq!(code(&nematic(&["--config", &cfg, "ring"], &[])), 2);
    let o = nematic(&["ring", "2", "-3", "x"], &[]);
    assert_eq!(code(&o), 2);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("-3,error,,") && text.contains("x,error,,"));
    assert!(text.lines().nth(1).unwrap().starts_with("2.0000000000000000e0,true,"));
}

#[test]
fn usage_and_config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&nematic(&["study", "spectrum"], &[])), 2);
    assert_eq!(code(&nematic(&["--preset", "nope", "q0-field"], &[])), 2);
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();
    let bad_grid = write_config(dir.path(), "[grid]\nn_phi = 7\n");
    assert_eq!(
        code(&nematic(&["--config", &bad_grid, "--out", out, "ldg-solve"], &[])),
        2
    );
    assert!(!Path::new(out).exists(), "nothing is written before validation");
    let unknown = write_config(dir.path(), "[solver]\ntolerance = 1e-6\n");
    assert_eq!(
        code(&nematic(&["--config", &unknown, "--out", out, "q0-field"], &[])),
        2
    );
    let bad_material = write_config(dir.path(), "[material]\nc = -1.0\n");
    assert_eq!(
        code(&nematic(&["--config", &bad_material, "--out", out, "q0-field"], &[])),
        2
    );
    let o = nematic(
        &["--preset", "quick", "--out", out, "study", "rate"],
        &[("NEMATIC_THREADS", "zero")],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn io_failures_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("occupied");
    std::fs::write(&file, "x").unwrap();
    let o = nematic(&["--preset", "quick", "--out", file.to_str().unwrap(), "q0-field"], &[]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn iteration_cap_exits_3_with_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[solver]\nmax_iters = 1\n");
    let out = dir.path().join("out");
    let o = nematic(
        &[
            "--preset",
            "quick",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "ldg-solve",
        ],
        &[],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    let snap = read(&out.join("ldg_field.csv"));
    assert_eq!(snap.lines().count(), 24 * 16 + 1);
    let d = data(&out.join("ldg_report.json"));
    assert_eq!(d["report"]["converged"], Value::Bool(false));
    assert_eq!(d["report"]["iterations"], 1);
}

#[test]
fn restart_from_converged_snapshot_takes_no_steps() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    assert_eq!(
        code(&nematic(
            &["--preset", "quick", "--out", first.to_str().unwrap(), "ldg-solve"],
            &[]
        )),
        0
    );
    let snap = first.join("ldg_field.csv");
    let cfg = write_config(
        dir.path(),
        &format!("[solver]\nrestart = {:?}\n", snap.to_str().unwrap()),
    );
    let second = dir.path().join("second");
    let o = nematic(
        &[
            "--preset",
            "quick",
            "--config",
            &cfg,
            "--out",
            second.to_str().unwrap(),
            "ldg-solve",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(data(&second.join("ldg_report.json"))["report"]["iterations"], 0);
    let values = |t: String| -> Vec<f64> {
        t.lines()
            .skip(1)
            .flat_map(|l| l.split(',').map(|x| x.parse::<f64>().unwrap()).collect::<Vec<_>>())
            .collect()
    };
    let (a, b) = (values(read(&snap)), values(read(&second.join("ldg_field.csv"))));
    assert_eq!(a.len(), b.len());
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-14));
}

#[test]
fn q0_field_shape_and_strong_boundary_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[regime]\nw = inf\n");
    let out = dir.path().join("out");
    let o = nematic(
        &[
            "--preset",
            "quick",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "q0-field",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = read(&out.join("q0_field.csv"));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 24 * 16 + 1);
    let s = (2.0 + 28f64.sqrt()) / 4.0;
    for line in &lines[1..17] {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        let (sp, cp) = v[1].sin_cos();
        assert_eq!(v[0], 1.0);
        assert!((v[4] - s * (sp * sp - 1.0 / 3.0)).abs() < 1e-14);
        assert!((v[5] + s / 3.0).abs() < 1e-14);
        assert!((v[6] - s * sp * cp).abs() < 1e-14);
    }
}

#[test]
fn exchange_on_q0_finds_the_strong_ring() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = nematic(
        &[
            "--preset",
            "exchange",
            "--out",
            out.to_str().unwrap(),
            "--format",
            "json",
            "study",
            "exchange",
        ],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(!out.join("branches.csv").exists());
    let d = data(&out.join("study_exchange.json"));
    let c = d["crossing"].as_f64().unwrap();
    assert!((c - 1.4656).abs() < 1e-4, "{c}");
    assert!((c - d["ring_radius"].as_f64().unwrap()).abs() < 1e-9);
}

#[test]
fn harmonic_census_has_one_defect_and_eight_degree_samples() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = write_config(dir.path(), "[grid]\nr_out = 20.0\nn_s = 96\nn_phi = 64\n");
    let o = nematic(
        &["--config", &cfg, "--out", out.to_str().unwrap(), "harmonic-solve"],
        &[],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let d = data(&out.join("census.json"));
    let defects = d["defects"].as_array().unwrap();
    assert_eq!(defects.len(), 1);
    assert!(defects[0]["z0"].as_f64().unwrap().abs() > 1.0);
    assert_eq!(d["degreeSamples"].as_array().unwrap().len(), 8);
    let starts = d["starts"].as_array().unwrap();
    assert_eq!(starts.len(), 3);
    let best = starts
        .iter()
        .map(|s| s["energy"].as_f64().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert_eq!(d["energy"].as_f64().unwrap(), best);
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let commands: [&[&str]; 6] = [
        &["q0-field"],
        &["ldg-solve"],
        &["harmonic-solve"],
        &["study", "rate"],
        &["study", "decay"],
        &["study", "exchange"],
    ];
    for (k, cmd) in commands.iter().enumerate() {
        let mut outs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{k}-{rep}"));
            let mut args = vec!["--preset", "quick", "--out", out.to_str().unwrap()];
            args.extend_from_slice(cmd);
            let threads = if rep == 0 { "1" } else { "3" };
            let o = nematic(&args, &[("NEMATIC_THREADS", threads)]);
            assert_eq!(code(&o), 0, "{cmd:?}: {}", String::from_utf8_lossy(&o.stderr));
            outs.push(out);
        }
        let mut names: Vec<_> = std::fs::read_dir(&outs[0])
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        names.sort();
        assert!(!names.is_empty());
        for name in names {
            let (a, b) = (outs[0].join(&name), outs[1].join(&name));
            if name.to_string_lossy().ends_with(".json") {
                let strip = |p: &Path| {
                    let mut v: Value = serde_json::from_str(&read(p)).unwrap();
                    v.as_object_mut().unwrap().remove("metadata");
                    serde_json::to_string(&v).unwrap()
                };
                assert_eq!(strip(&a), strip(&b), "{cmd:?} {name:?}");
            } else {
                assert_eq!(read(&a), read(&b), "{cmd:?} {name:?}");
            }
        }
    }
}
