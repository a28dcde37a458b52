use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_terrace"))
}

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(format!("{name}.conf"))
}

fn terrace(args: &[&str], config: Option<&Path>, out: &Path) -> Output {
    let mut cmd = bin();
    cmd.args(args).arg("--out").arg(out);
    if let Some(c) = config {
        cmd.arg("--config").arg(c);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Columns of a CSV as floats; empty fields become NaN.
fn csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| {
            l.split(',')
                .map(|f| f.parse().unwrap_or(f64::NAN))
                .collect()
        })
        .collect();
    (header, rows)
}

fn column(path: &Path, name: &str) -> Vec<f64> {
    let (h, rows) = csv(path);
    let j = h
        .iter()
        .position(|c| c == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[j]).collect()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CUBIC: &str = "potential.name = cubic\npotential.search_box = -2, 3\n";

#[test]
fn analyze_reports_cubic_curvatures() {
    let dir = TempDir::new().unwrap();
    let a = 0.25;
    let cfg = write_config(
        dir.path(),
        "c.conf",
        &format!("{CUBIC}potential.params.a = {a}\n"),
    );
    let o = terrace(&["analyze"], Some(&cfg), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(&dir.path().join("analysis.json"));
    // V'' = 3u^2 - 2(1 + a)u + a at the minima 0 and 1
    let curv = |u: f64| 3.0 * u * u - 2.0 * (1.0 + a) * u + a;
    assert!((doc["lambda_min"].as_f64().unwrap() - curv(0.0)).abs() < 1e-9);
    assert!((doc["lambda_max"].as_f64().unwrap() - curv(1.0)).abs() < 1e-9);
    let mut keys: Vec<&str> = doc
        .as_object()
        .unwrap()
        .keys()
        .map(String::as_str)
        .collect();
    keys.sort_unstable();
    let mut want = [
        "n",
        "minima",
        "lambda_min",
        "lambda_max",
        "d_esc",
        "q_low_hull",
        "w_en0",
        "eps_v",
        "c_v",
        "r_att",
        "nu_f0",
        "k_f0",
    ];
    want.sort_unstable();
    assert_eq!(keys, want);
    for m in doc["minima"].as_array().unwrap() {
        let obj = m.as_object().unwrap();
        assert!(
            obj.contains_key("location")
                && obj.contains_key("value")
                && obj.contains_key("eigenvalues")
        );
    }
}

#[test]
fn analyze_double_well_has_unit_energy_weight() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "dw.conf", "potential.name = double_well\n");
    let o = terrace(&["analyze"], Some(&cfg), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(&dir.path().join("analysis.json"));
    assert_eq!(doc["w_en0"].as_f64().unwrap(), 1.0);
}

#[test]
fn missing_potential_name_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), "bad.conf", "potential.params.a = 0.25\n");
    let o = terrace(&["analyze"], Some(&cfg), dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("potential.name"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_and_observer_parameters_are_config_errors() {
    let dir = TempDir::new().unwrap();
    let base = fs::read_to_string(preset("homogeneous")).unwrap();
    for (name, extra, needle) in [
        ("k.conf", "grid.nodes = 10\n", "grid.nodes"),
        (
            "o.conf",
            "observer.residual.speed = 1\n",
            "observer.residual.speed",
        ),
        ("x.conf", "observer.frame.c = 1\n", "observer.frame.c"),
    ] {
        let cfg = write_config(dir.path(), name, &format!("{base}{extra}"));
        let o = terrace(&["run"], Some(&cfg), &dir.path().join(name));
        assert_eq!(code(&o), 2, "{name}");
        assert!(stderr(&o).contains(needle), "{}", stderr(&o));
        assert!(!dir.path().join(name).join("manifest.json").exists());
    }
}

#[test]
fn front_speeds_and_sidecar() {
    let dir = TempDir::new().unwrap();
    for a in [0.25, 0.5] {
        let cfg = write_config(
            dir.path(),
            "f.conf",
            &format!("{CUBIC}potential.params.a = {a}\nfront.m_minus = 1\nfront.m_plus = 0\n"),
        );
        let out = dir.path().join(format!("a{a}"));
        let o = terrace(&["front"], Some(&cfg), &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let side = json(&out.join("front.json"));
        // travelling wave of the cubic nonlinearity: c = (1 - 2a)/sqrt(2)
        let exact = (1.0 - 2.0 * a) / 2f64.sqrt();
        assert!(
            (side["speed"].as_f64().unwrap() - exact).abs() < 1e-6,
            "{side}"
        );
        assert!(column(&out.join("front.csv"), "xi").len() > 10);
    }
}

#[test]
fn unbracketed_front_exits_with_solver_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "f.conf",
        &format!("{CUBIC}potential.params.a = 0.25\nfront.m_minus = 1\nfront.m_plus = 0\nfront.bracket = 0.5, 1\n"),
    );
    let o = terrace(&["front"], Some(&cfg), dir.path());
    assert_eq!(code(&o), 3);
    assert!(
        stderr(&o).contains("bracket does not isolate"),
        "{}",
        stderr(&o)
    );
}

#[test]
fn blow_up_exits_with_instability_code() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        dir.path(),
        "b.conf",
        &format!(
            "{CUBIC}potential.params.a = 0.25\ngrid.d = 3\ngrid.r_max = 50\ngrid.dr = 0.1\n\
             integrator.dt = 0.05\nintegrator.t_end = 5\ninitial.kind = bump\n\
             initial.params.outer = 0\ninitial.params.amplitude = 1e4\ninitial.params.r0 = 10\n\
             initial.params.width = 2\n"
        ),
    );
    let o = terrace(&["run"], Some(&cfg), dir.path());
    assert_eq!(code(&o), 4, "{}", stderr(&o));
}

#[test]
fn every_preset_validates() {
    for entry in fs::read_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")).unwrap()
    {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        assert!(
            text.contains("Runtime budget"),
            "{} documents no budget",
            path.display()
        );
        let dir = TempDir::new().unwrap();
        let o = terrace(&["analyze"], Some(&path), dir.path());
        assert_eq!(code(&o), 0, "{}: {}", path.display(), stderr(&o));
    }
}

#[test]
fn homogeneous_preset_has_zero_diagnostics() {
    let dir = TempDir::new().unwrap();
    let o = terrace(&["run"], Some(&preset("homogeneous")), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let d = dir.path();
    for (file, cols) in [
        ("energy.csv", &["energy", "rate", "dissipation"][..]),
        ("residual.csv", &["residual_energy"][..]),
        ("firewall.csv", &["F0", "escape_measure"][..]),
    ] {
        for c in cols {
            let v = column(&d.join(file), c);
            assert!(!v.is_empty());
            assert!(v.iter().all(|&x| x == 0.0), "{file} {c}");
        }
    }
    let margins = column(&d.join("firewall.csv"), "margin");
    assert!(margins.iter().all(|&x| x == 0.0 || x.is_nan()));
    assert!(column(&d.join("tracker.csv"), "r_Esc")
        .iter()
        .all(|&x| x == f64::NEG_INFINITY));

    let o = terrace(
        &[
            "terrace",
            "--manifest",
            d.join("manifest.json").to_str().unwrap(),
        ],
        None,
        d,
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ter = json(&d.join("terrace/terrace.json"));
    assert_eq!(ter["q"], 0);
}

#[test]
fn invasion_preset_escape_point_advances_and_fits_one_front() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = terrace(&["run"], Some(&preset("invasion_d3")), d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let manifest = json(&d.join("manifest.json"));
    let echo = fs::read_to_string(preset("invasion_d3")).unwrap();
    let lines: Vec<&str> = manifest["config"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap())
        .collect();
    assert!(lines.contains(&"potential.name = cubic") && echo.contains("potential.name = cubic"));
    for s in manifest["snapshots"].as_array().unwrap() {
        assert!(d.join(s["path"].as_str().unwrap()).exists());
    }
    let r = column(&d.join("tracker.csv"), "r_Esc");
    let dr = 0.1;
    assert!(r.windows(2).all(|w| w[1] >= w[0] - dr));
    assert!(r.last().unwrap() - r[0] > 50.0);

    let o = terrace(&["terrace"], None, d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ter = json(&d.join("terrace/terrace.json"));
    assert_eq!(ter["q"], 1);
    // planar speed minus the mean-curvature correction (d - 1)/R
    let radius = *column(&d.join("terrace/front_1_positions.csv"), "r")
        .last()
        .unwrap();
    let expected = 1.0 / 8f64.sqrt() - 2.0 / radius;
    let c = ter["speeds"][0].as_f64().unwrap();
    assert!((c - expected).abs() < 0.01, "{c} vs {expected}");
}

#[test]
fn residual_energy_preset_converges() {
    let dir = TempDir::new().unwrap();
    let o = terrace(&["run"], Some(&preset("residual_energy")), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let path = dir.path().join("residual.csv");
    let t = column(&path, "t");
    let e = column(&path, "residual_energy");
    let last = *e.last().unwrap();
    let scale = e.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(scale > 0.0);
    let tail = t
        .iter()
        .zip(&e)
        .filter(|(t, _)| **t >= 200.0)
        .map(|(_, x)| (x - last).abs());
    assert!(tail.fold(0.0, f64::max) <= 1e-6 * scale);
}

#[test]
fn triple_well_preset_fits_two_fronts() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let o = terrace(&["run"], Some(&preset("triple_well")), d);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let ter = json(&d.join("terrace.json"));
    assert_eq!(ter["q"], 2);
    let chain: Vec<f64> = ter["minima_chain"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m["location"][0].as_f64().unwrap())
        .collect();
    assert_eq!(
        chain.iter().map(|x| x.round()).collect::<Vec<_>>(),
        vec![2.0, 1.0, 0.0]
    );
    let cfg = fs::read_to_string(preset("triple_well")).unwrap();
    for (i, (behind, ahead)) in [(1, 2), (0, 1)].into_iter().enumerate() {
        let fc = write_config(
            d,
            "f.conf",
            &format!(
                "{}\nfront.m_minus = {behind}\nfront.m_plus = {ahead}\n",
                cfg.lines()
                    .filter(|l| l.starts_with("potential."))
                    .collect::<Vec<_>>()
                    .join("\n")
            ),
        );
        let out = d.join(format!("front{i}"));
        let o = terrace(&["front"], Some(&fc), &out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let planar = json(&out.join("front.json"))["speed"].as_f64().unwrap();
        let radius = *column(&d.join(format!("front_{}_positions.csv", i + 1)), "r")
            .last()
            .unwrap();
        let c = ter["speeds"][i].as_f64().unwrap();
        assert!(
            (c - (planar - 2.0 / radius)).abs() < 0.01,
            "front {i}: {c} vs {planar} at R = {radius}"
        );
    }
}

#[test]
fn audit_writes_clean_reports() {
    let dir = TempDir::new().unwrap();
    let o = terrace(&["audit"], Some(&preset("invasion_d3")), dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc = json(&dir.path().join("audit.json"));
    assert!(doc["firewall_decay"]["samples"].as_u64().unwrap() > 1000);
    assert_eq!(doc["firewall_decay"]["violations"], 0);
    assert_eq!(doc["escape_implication"]["counterexamples"], 0);
    assert_eq!(doc["invasion_bound"]["violations"], 0);
}

fn tree(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(p) = stack.pop() {
        for e in fs::read_dir(&p).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((
                    path.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&path).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = terrace(&["audit"], Some(&preset("invasion_d3")), out);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let (ta, tb) = (tree(&a), tree(&b));
    assert!(ta.len() > 10);
    assert!(ta == tb);
}

#[test]
fn sweep_isolates_outputs_and_reports_failures() {
    let dir = TempDir::new().unwrap();
    let d = dir.path();
    let good = fs::read_to_string(preset("homogeneous")).unwrap();
    let one = write_config(d, "one.conf", &good);
    let two = write_config(d, "two.conf", &good.replace("grid.d = 3", "grid.d = 2"));
    let out = d.join("sweep");
    let o = bin()
        .arg("sweep")
        .arg(&one)
        .arg(&two)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(out.join("one/manifest.json").exists() && out.join("two/manifest.json").exists());
    let bad = write_config(
        d,
        "bad.conf",
        &good.replace("initial.kind = homogeneous", "initial.kind = spiral"),
    );
    let o = bin()
        .arg("sweep")
        .arg(&one)
        .arg(&bad)
        .arg("--out")
        .arg(d.join("s2"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    assert!(d.join("s2/one/manifest.json").exists());
}

#[test]
fn observe_every_flag_overrides_the_config() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(
        code(&terrace(&["run"], Some(&preset("homogeneous")), &a)),
        0
    );
    assert_eq!(
        code(&terrace(
            &["run", "--observe-every", "10"],
            Some(&preset("homogeneous")),
            &b
        )),
        0
    );
    let na = column(&a.join("tracker.csv"), "t").len();
    let nb = column(&b.join("tracker.csv"), "t").len();
    assert_eq!((na - 1) / 10, nb - 1);
}
