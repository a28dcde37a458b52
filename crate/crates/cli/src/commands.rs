//! The subcommands. Each validates the whole configuration before computing.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde_json::json;
use terrace_core::diagnostics::{
    audit_escape_implication, audit_invasion_bound, delta_dissip, speed_estimate,
    traveling_frame_series, EnergyBalance, EscapeTracker, FirewallConfig, FirewallDecayAudit,
    Frame, Recorder, ResidualEnergyTracker, Trajectory, TravelingFrameConfig,
};
use terrace_core::radial::{
    integrate, read_snapshot, semi_discrete_rhs, write_snapshot, Manifest, Observer, ObserverRef,
    Snapshot, SnapshotRef,
};
use terrace_core::terrace::{export_terrace, fit_terrace, FitConfig, FrontLibrary};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::experiment::{self, Setup};

pub const OBSERVERS: &[(&str, &[&str])] = &[
    ("tracker", &["every"]),
    ("energy", &["every"]),
    ("firewall", &["every", "t_from", "stride"]),
    ("residual", &["every", "c"]),
    ("frame", &["every", "c", "r_init", "t_init", "xi_cut"]),
    ("dissipation", &["every", "c"]),
];

pub fn analyze(cfg: &Config, out: &Path) -> CliResult<PathBuf> {
    let setup = experiment::potential(cfg)?;
    fs::create_dir_all(out)?;
    let path = out.join("analysis.json");
    let report = setup.analysis.report();
    fs::write(&path, serde_json::to_string_pretty(&report)?)?;
    println!(
        "{} minima, lambda in [{}, {}], d_esc = {}, w_en0 = {}",
        report.minima.len(),
        report.lambda_min,
        report.lambda_max,
        report.d_esc,
        report.w_en0
    );
    Ok(path)
}

pub fn front(cfg: &Config, out: &Path) -> CliResult<PathBuf> {
    let setup = experiment::potential(cfg)?;
    let profile = experiment::front(cfg, &setup)?;
    fs::create_dir_all(out)?;
    let path = out.join("front.csv");
    profile.write_csv(&path)?;
    println!("speed = {}", profile.speed);
    Ok(path)
}

/// Writes a snapshot file every `every` steps.
struct SnapshotWriter {
    dir: PathBuf,
    every: usize,
    refs: Vec<SnapshotRef>,
}

impl Observer<f64> for SnapshotWriter {
    fn name(&self) -> &str {
        "snapshots"
    }

    fn cadence(&self) -> Option<usize> {
        Some(self.every)
    }

    fn observe(&mut self, snap: &Snapshot<'_, f64>) -> terrace_core::Result<()> {
        let rel = PathBuf::from("snapshots").join(format!("snapshot_{:05}.csv", self.refs.len()));
        write_snapshot(snap.field, &self.dir.join(&rel))?;
        self.refs.push(SnapshotRef {
            t: snap.field.time,
            path: rel,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub observe_every: Option<usize>,
    pub audits: bool,
}

struct Plan {
    kinds: Vec<String>,
    snapshot_every: usize,
    fit: bool,
    audits: bool,
    window: (f64, f64),
}

impl Plan {
    fn wants(&self, kind: &str) -> bool {
        self.kinds.iter().any(|k| k == kind)
    }
}

fn steps_of(cfg: &Config, key: &str, default: usize) -> CliResult<usize> {
    let k = cfg.get_or(key, default)?;
    if k == 0 {
        return Err(CliError::Config(format!("key '{key}' must be positive")));
    }
    Ok(k)
}

fn plan(cfg: &Config, dt: f64, t_end: f64, opts: RunOptions) -> CliResult<Plan> {
    let kinds = cfg.words("observers");
    for k in &kinds {
        if !OBSERVERS.iter().any(|(name, _)| name == k) {
            return Err(CliError::Config(format!(
                "key 'observers': unknown observer '{k}'"
            )));
        }
    }
    for (key, _) in cfg.echo().iter().filter_map(|l| l.split_once(" = ")) {
        let Some(rest) = key.strip_prefix("observer.") else {
            continue;
        };
        let (kind, param) = rest
            .split_once('.')
            .expect("family keys have three segments");
        let allowed = OBSERVERS
            .iter()
            .find(|(name, _)| *name == kind)
            .map(|(_, p)| *p)
            .ok_or_else(|| CliError::Config(format!("key '{key}': unknown observer '{kind}'")))?;
        if !allowed.contains(&param) {
            return Err(CliError::Config(format!(
                "key '{key}': unknown parameter '{param}'"
            )));
        }
        if !kinds.iter().any(|k| k == kind) {
            return Err(CliError::Config(format!(
                "key '{key}': observer '{kind}' is not enabled"
            )));
        }
    }
    let every: f64 = cfg.get_or("snapshots.every", t_end / 100.0)?;
    if every.is_nan() || every <= 0.0 {
        return Err(CliError::Config(
            "key 'snapshots.every' must be positive".into(),
        ));
    }
    let t_a = cfg.get_or("terrace.t_a", t_end / 2.0)?;
    let t_b = cfg.get_or("terrace.t_b", t_end)?;
    if !(0.0 <= t_a && t_a < t_b && t_b <= t_end) {
        return Err(CliError::Config(
            "terrace window needs 0 <= t_a < t_b <= t_end".into(),
        ));
    }
    if kinds.iter().any(|k| k == "residual") && !cfg.has("observer.residual.c") {
        return Err(CliError::Config(
            "missing required key 'observer.residual.c'".into(),
        ));
    }
    if kinds.iter().any(|k| k == "frame") && !cfg.has("observer.frame.c") {
        return Err(CliError::Config(
            "missing required key 'observer.frame.c'".into(),
        ));
    }
    if kinds.iter().any(|k| k == "frame") && !cfg.has("observer.frame.r_init") {
        return Err(CliError::Config(
            "missing required key 'observer.frame.r_init'".into(),
        ));
    }
    Ok(Plan {
        kinds,
        snapshot_every: ((every / dt).round() as usize).max(1),
        fit: cfg.get_or("analysis.fit_terrace", false)?,
        audits: opts.audits || cfg.get_or("analysis.audits", false)?,
        window: (t_a, t_b),
    })
}

fn write_rows(path: &Path, header: &str, rows: impl Iterator<Item = String>) -> CliResult<()> {
    let mut f = std::io::BufWriter::new(fs::File::create(path)?);
    writeln!(f, "{header}")?;
    for r in rows {
        writeln!(f, "{r}")?;
    }
    f.flush()?;
    Ok(())
}

/// Integrates the configured experiment, writing snapshots, observer CSVs
/// and `manifest.json` into `out`.
pub fn run(cfg: &Config, out: &Path, opts: RunOptions) -> CliResult<Manifest> {
    let setup = experiment::potential(cfg)?;
    let grid = experiment::grid(cfg)?;
    let ic = experiment::integrator(cfg, &setup, &grid, opts.observe_every)?;
    let field = experiment::initial(cfg, &setup, &grid)?;
    let m = experiment::reference_minimum(cfg, &setup)?;
    let plan = plan(cfg, ic.dt, ic.t_end, opts)?;
    let obs = |kind: &str, p: &str| format!("observer.{kind}.{p}");
    let cadence = |kind: &str| steps_of(cfg, &obs(kind, "every"), ic.observe_every);
    let needs_fw =
        plan.audits || plan.wants("tracker") || plan.wants("firewall") || plan.wants("frame");
    let fw: Option<FirewallConfig<f64>> = if needs_fw {
        Some(experiment::firewall(&setup, grid.d)?)
    } else {
        None
    };
    let frame_cfg = if plan.wants("frame") {
        let fw = fw.as_ref().expect("built above");
        Some(
            TravelingFrameConfig::new(
                fw,
                cfg.req(&obs("frame", "c"))?,
                cfg.req(&obs("frame", "r_init"))?,
                cfg.get_or(&obs("frame", "t_init"), 0.0)?,
                cfg.get_or(&obs("frame", "xi_cut"), 10.0)?,
            )
            .map_err(|e| CliError::Config(format!("observer.frame: {e}")))?,
        )
    } else {
        None
    };

    let spec = setup.spec.clone();
    let bc = ic.outer_bc;
    let mut tracker = if plan.wants("tracker") || plan.wants("dissipation") || plan.audits {
        let t = EscapeTracker::new(spec.clone(), m.clone(), setup.analysis.d_esc, bc);
        let t = match fw {
            Some(fw) => t.with_firewall(fw),
            None => t,
        };
        Some(t.with_cadence(cadence("tracker")?))
    } else {
        None
    };
    let mut energy = if plan.wants("energy") {
        let mut e = EnergyBalance::new(spec.clone(), m.value, bc);
        e.cadence = Some(cadence("energy")?);
        Some(e)
    } else {
        None
    };
    let mut firewall = if plan.wants("firewall") || plan.audits {
        let stride = cfg.get_or(
            &obs("firewall", "stride"),
            (1.0 / grid.dr).round().max(1.0) as usize,
        )?;
        let a = FirewallDecayAudit::new(
            spec.clone(),
            m.clone(),
            fw.expect("built above"),
            stride,
            bc,
        )
        .with_cadence(cadence("firewall")?)
        .from_time(cfg.get_or(&obs("firewall", "t_from"), 0.0)?);
        Some(if plan.wants("firewall") {
            a.with_log()
        } else {
            a
        })
    } else {
        None
    };
    let mut residual = if plan.wants("residual") {
        Some(
            ResidualEnergyTracker::new(
                spec.clone(),
                m.clone(),
                cfg.req(&obs("residual", "c"))?,
                bc,
            )
            .with_cadence(cadence("residual")?),
        )
    } else {
        None
    };
    let mut recorder = (plan.wants("frame") || plan.wants("dissipation") || plan.audits)
        .then(|| Recorder::new(bc, Some(ic.observe_every)));
    let dissipation_c = cfg.get::<f64>(&obs("dissipation", "c"))?;

    fs::create_dir_all(out.join("snapshots"))?;
    let mut snaps = SnapshotWriter {
        dir: out.to_path_buf(),
        every: plan.snapshot_every,
        refs: Vec::new(),
    };
    let mut observers: Vec<&mut dyn Observer<f64>> = vec![&mut snaps];
    if let Some(o) = tracker.as_mut() {
        observers.push(o);
    }
    if let Some(o) = energy.as_mut() {
        observers.push(o);
    }
    if let Some(o) = firewall.as_mut() {
        observers.push(o);
    }
    if let Some(o) = residual.as_mut() {
        observers.push(o);
    }
    if let Some(o) = recorder.as_mut() {
        observers.push(o);
    }
    log::info!(
        "integrating to t = {} with {} observers",
        ic.t_end,
        observers.len()
    );
    integrate(&field, spec.as_ref(), &ic, &mut observers)?;
    drop(observers);

    let mut refs = Vec::new();
    let mut emit = |kind: &str, name: &str| {
        refs.push(ObserverRef {
            kind: kind.to_string(),
            path: PathBuf::from(name),
        });
        out.join(name)
    };
    if plan.wants("tracker") {
        tracker
            .as_ref()
            .expect("enabled")
            .write_csv(&emit("tracker", "tracker.csv"))?;
    }
    if let Some(e) = &energy {
        write_rows(
            &emit("energy", "energy.csv"),
            "t,energy,rate,dissipation",
            e.records
                .iter()
                .map(|r| format!("{},{:e},{:e},{:e}", r.t, r.energy, r.rate, r.dissipation)),
        )?;
    }
    if plan.wants("firewall") {
        firewall
            .as_ref()
            .expect("enabled")
            .write_csv(&emit("firewall", "firewall.csv"))?;
    }
    if let Some(r) = &residual {
        r.write_csv(&emit("residual", "residual.csv"))?;
    }
    if let Some(fc) = &frame_cfg {
        let traj = &recorder.as_ref().expect("enabled").trajectory;
        let series = traveling_frame_series(traj, fc, spec.as_ref(), &m);
        write_rows(
            &emit("frame", "frame.csv"),
            "s,E,D,F",
            series.iter().map(|s| {
                format!(
                    "{},{:e},{:e},{:e}",
                    s.s, s.energy, s.dissipation, s.firewall
                )
            }),
        )?;
    }
    if plan.wants("dissipation") {
        let tr = tracker.as_ref().expect("enabled");
        let (times, r_esc) = (tr.times(), tr.escape_points());
        let c = match dissipation_c {
            Some(c) => c,
            None => speed_estimate(&times, &r_esc, (ic.t_end / 2.0, ic.t_end))?.slope,
        };
        let traj = &recorder.as_ref().expect("enabled").trajectory;
        let series = delta_dissip(traj, &times, &r_esc, c);
        write_rows(
            &emit("dissipation", "dissipation.csv"),
            "t,delta_dissip",
            series.iter().map(|(t, d)| format!("{t},{d:e}")),
        )?;
    }
    if plan.audits {
        let fw = fw.as_ref().expect("built above");
        let tr = tracker.as_ref().expect("enabled");
        let decay = firewall.as_ref().expect("enabled").report();
        let traj = &recorder.as_ref().expect("enabled").trajectory;
        let esc = audit_escape_implication(traj, fw, spec.as_ref(), &m);
        let inv = audit_invasion_bound(&tr.times(), &tr.escape_points(), fw.c_noesc);
        let doc = json!({
            "firewall_decay": {
                "samples": decay.samples,
                "min_margin": decay.min_margin,
                "min_margin_at": [decay.min_margin_at.0, decay.min_margin_at.1],
                "max_defect": decay.max_defect,
                "slack": decay.slack,
                "violations": decay.violations.len(),
            },
            "escape_implication": {
                "samples": esc.samples,
                "premises": esc.premises,
                "counterexamples": esc.counterexamples.len(),
            },
            "invasion_bound": {
                "c_noesc": fw.c_noesc,
                "pairs": inv.pairs,
                "skipped": inv.skipped,
                "max_excess": inv.max_excess,
                "violations": inv.violations.len(),
            },
        });
        fs::write(
            emit("audit", "audit.json"),
            serde_json::to_string_pretty(&doc)?,
        )?;
        println!(
            "audits: {} firewall violations, {} escape counterexamples, {} invasion violations",
            decay.violations.len(),
            esc.counterexamples.len(),
            inv.violations.len()
        );
    }
    let manifest = Manifest {
        config: cfg.echo(),
        snapshots: snaps.refs,
        observers: refs,
    };
    manifest.write(&out.join("manifest.json"))?;
    println!(
        "{} snapshots, manifest {}",
        manifest.snapshots.len(),
        out.join("manifest.json").display()
    );
    if plan.fit {
        fit(cfg, &setup, &manifest, out, out, plan.window)?;
    }
    Ok(manifest)
}

fn fit(
    cfg: &Config,
    setup: &Setup,
    manifest: &Manifest,
    base: &Path,
    out: &Path,
    window: (f64, f64),
) -> CliResult<PathBuf> {
    let grid = experiment::grid(cfg)?;
    let ic = experiment::integrator(cfg, setup, &grid, None)?;
    let fw = experiment::firewall(setup, grid.d)?;
    let mut traj = Trajectory::new(ic.outer_bc);
    for s in manifest
        .snapshots
        .iter()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
    {
        let field = read_snapshot::<f64>(&base.join(&s.path))?;
        let u_t = semi_discrete_rhs(&field, setup.spec.as_ref(), ic.outer_bc);
        traj.frames.push(Frame { field, u_t });
    }
    let (ter, rep) = fit_terrace(
        &traj,
        setup.spec.as_ref(),
        &setup.analysis,
        &mut FrontLibrary::new(),
        &FitConfig::new(window, fw.c_noesc),
    )?;
    let path = export_terrace(&ter, &rep, out)?;
    println!("terrace with {} fronts, speeds {:?}", ter.q(), rep.speeds);
    Ok(path)
}

/// Fits a terrace to the snapshots listed in a manifest, using the
/// configuration echoed in it.
pub fn terrace(manifest_path: &Path, out: &Path) -> CliResult<PathBuf> {
    let manifest = Manifest::read(manifest_path)?;
    let cfg = Config::parse(&manifest.config.join("\n"))?;
    let setup = experiment::potential(&cfg)?;
    let t_end: f64 = cfg.req("integrator.t_end")?;
    let dt: f64 = cfg.req("integrator.dt")?;
    let plan = plan(&cfg, dt, t_end, RunOptions::default())?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    fit(&cfg, &setup, &manifest, base, out, plan.window)
}

/// Runs each configuration on its own thread into `out/<file stem>`.
/// Returns the first failure in argument order.
pub fn sweep(configs: &[PathBuf], out: &Path, opts: RunOptions) -> CliResult<()> {
    let mut stems: Vec<String> = Vec::new();
    for p in configs {
        let stem = p
            .file_stem()
            .and_then(|s| s.to_str())
            .ok_or_else(|| CliError::Config(format!("bad config path {}", p.display())))?
            .to_string();
        if stems.contains(&stem) {
            return Err(CliError::Config(format!(
                "two sweep configs share the stem '{stem}'"
            )));
        }
        stems.push(stem);
    }
    let parsed = configs
        .iter()
        .map(|p| Config::load(p))
        .collect::<CliResult<Vec<_>>>()?;
    let results: Vec<CliResult<Manifest>> = std::thread::scope(|s| {
        let handles: Vec<_> = parsed
            .iter()
            .zip(&stems)
            .map(|(cfg, stem)| {
                let dir = out.join(stem);
                s.spawn(move || run(cfg, &dir, opts))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect()
    });
    for (stem, r) in stems.iter().zip(&results) {
        match r {
            Ok(_) => println!("{stem}: ok"),
            Err(e) => println!("{stem}: {e}"),
        }
    }
    results
        .into_iter()
        .find_map(Result::err)
        .map_or(Ok(()), Err)
}
