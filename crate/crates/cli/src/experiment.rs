//! Builds potentials, grids, integrators and initial data from a [`Config`].

use terrace_core::diagnostics::FirewallConfig;
use terrace_core::front::normalize_front;
use terrace_core::potential::{
    analyze, builtin, MinimumPoint, PotentialAnalysis, PotentialSpec, SearchBox,
};
use terrace_core::radial::{
    make_initial_data, InitialData, IntegratorConfig, OuterBc, RadialField, RadialGrid, Scheme,
};
use terrace_core::terrace::{speed_ceiling, FrontLibrary};

use crate::config::Config;
use crate::error::{CliError, CliResult};

pub struct Setup {
    pub spec: PotentialSpec<f64>,
    pub analysis: PotentialAnalysis<f64>,
}

pub fn potential(cfg: &Config) -> CliResult<Setup> {
    let name = cfg.require("potential.name")?;
    let params = cfg.family("potential.params.")?;
    let spec = builtin::<f64>(name, &params).map_err(|e| CliError::Config(e.to_string()))?;
    let n = spec.dim();
    let corners = cfg
        .list("potential.search_box")?
        .unwrap_or_else(|| vec![-3.0, 3.0]);
    let (lo, hi): (Vec<f64>, Vec<f64>) = match corners.len() {
        2 => (vec![corners[0]; n], vec![corners[1]; n]),
        k if k == 2 * n => corners.chunks(2).map(|c| (c[0], c[1])).unzip(),
        _ => {
            return Err(CliError::Config(format!(
                "key 'potential.search_box': expected 2 or {} values",
                2 * n
            )))
        }
    };
    let bounds = SearchBox::new(lo, hi)
        .map_err(|e| CliError::Config(format!("key 'potential.search_box': {e}")))?;
    let per_axis = cfg.get_or("potential.seed_grid", 41usize)?;
    let analysis = analyze(spec.as_ref(), &bounds, per_axis)?;
    Ok(Setup { spec, analysis })
}

pub fn nearest(setup: &Setup, key: &str, u: &[f64]) -> CliResult<MinimumPoint<f64>> {
    if u.len() != setup.spec.dim() {
        return Err(CliError::Config(format!(
            "key '{key}': expected {} components, got {}",
            setup.spec.dim(),
            u.len()
        )));
    }
    Ok(setup
        .analysis
        .nearest(u)
        .expect("analysis has minima")
        .clone())
}

pub fn grid(cfg: &Config) -> CliResult<RadialGrid<f64>> {
    let d: usize = cfg.req("grid.d")?;
    let r_max: f64 = cfg.req("grid.r_max")?;
    let grid = match (
        cfg.get::<usize>("grid.n_nodes")?,
        cfg.get::<f64>("grid.dr")?,
    ) {
        (Some(n), None) => RadialGrid::new(r_max, n, d),
        (None, Some(dr)) => RadialGrid::with_spacing(r_max, dr, d),
        _ => {
            return Err(CliError::Config(
                "exactly one of 'grid.n_nodes' and 'grid.dr' is required".into(),
            ))
        }
    };
    grid.map_err(|e| CliError::Config(format!("grid: {e}")))
}

pub fn firewall(setup: &Setup, d: usize) -> CliResult<FirewallConfig<f64>> {
    Ok(FirewallConfig::new(&setup.analysis, d)?)
}

/// Reference minimum of the diagnostics: `diagnostics.m`, else the minimum
/// nearest to `initial.params.outer`.
pub fn reference_minimum(cfg: &Config, setup: &Setup) -> CliResult<MinimumPoint<f64>> {
    let key = if cfg.has("diagnostics.m") {
        "diagnostics.m"
    } else {
        "initial.params.outer"
    };
    let u = cfg.req_list(key)?;
    nearest(setup, key, &u)
}

pub fn integrator(
    cfg: &Config,
    setup: &Setup,
    grid: &RadialGrid<f64>,
    observe_every: Option<usize>,
) -> CliResult<IntegratorConfig<f64>> {
    let dt: f64 = cfg.req("integrator.dt")?;
    let t_end: f64 = cfg.req("integrator.t_end")?;
    let mut ic = IntegratorConfig::imex(dt, t_end);
    ic.scheme = cfg.get_or("integrator.scheme", Scheme::ImexCn)?;
    ic.outer_bc = cfg.get_or("integrator.outer_bc", OuterBc::NeumannZero)?;
    if ic.outer_bc == OuterBc::DirichletToMinimum {
        ic.outer_value = reference_minimum(cfg, setup)?.location;
    }
    ic.observe_every = match observe_every {
        Some(k) => k,
        None => cfg.get_or("integrator.observe_every", 1usize)?,
    };
    ic.validate(grid, setup.spec.dim())
        .map_err(|e| CliError::Config(format!("integrator: {e}")))?;
    Ok(ic)
}

pub fn initial(cfg: &Config, setup: &Setup, grid: &RadialGrid<f64>) -> CliResult<RadialField<f64>> {
    let kind = cfg.require("initial.kind")?;
    let n = setup.spec.dim();
    let state = |name: &str| -> CliResult<Vec<f64>> {
        let key = format!("initial.params.{name}");
        let v = cfg.req_list(&key)?;
        if v.len() != n {
            return Err(CliError::Config(format!(
                "key '{key}': expected {n} components"
            )));
        }
        Ok(v)
    };
    let scalar = |name: &str| -> CliResult<f64> { cfg.req(&format!("initial.params.{name}")) };
    let data = match kind {
        "plateau" => InitialData::Plateau {
            inner: state("inner")?,
            outer: state("outer")?,
            r0: scalar("r0")?,
            width: scalar("width")?,
        },
        "bump" => InitialData::Bump {
            outer: state("outer")?,
            amplitude: state("amplitude")?,
            r0: scalar("r0")?,
            width: scalar("width")?,
        },
        "homogeneous" => InitialData::Homogeneous {
            outer: state("outer")?,
        },
        "front_seed" => {
            let behind = nearest(setup, "initial.params.m_minus", &state("m_minus")?)?;
            let ahead = nearest(setup, "initial.params.outer", &state("outer")?)?;
            let mut lib = FrontLibrary::new();
            let profile = lib
                .get_or_solve(setup.spec.as_ref(), &setup.analysis, &behind, &ahead)?
                .clone();
            InitialData::FrontSeed {
                profile,
                r0: scalar("r0")?,
            }
        }
        other => {
            return Err(CliError::Config(format!(
                "key 'initial.kind': unknown value '{other}'"
            )))
        }
    };
    make_initial_data(&data, grid).map_err(|e| CliError::Config(format!("initial data: {e}")))
}

/// Solves the front requested by the `front.*` keys.
pub fn front(cfg: &Config, setup: &Setup) -> CliResult<terrace_core::FrontProfile> {
    let behind = nearest(setup, "front.m_minus", &cfg.req_list("front.m_minus")?)?;
    let ahead = nearest(setup, "front.m_plus", &cfg.req_list("front.m_plus")?)?;
    let bracket = match cfg.list("front.bracket")? {
        Some(b) => b,
        None => {
            let s = speed_ceiling(setup.spec.as_ref(), &behind, &ahead);
            vec![-s, s]
        }
    };
    if bracket.len() != 2 {
        return Err(CliError::Config(
            "key 'front.bracket': expected 'lo, hi'".into(),
        ));
    }
    let raw = terrace_core::front::solve_bistable_front(
        setup.spec.as_ref(),
        &setup.analysis,
        &behind,
        &ahead,
        (bracket[0], bracket[1]),
    )?;
    if cfg.get_or("front.normalize", true)? {
        Ok(normalize_front(&raw, setup.analysis.d_esc)?)
    } else {
        Ok(raw)
    }
}
