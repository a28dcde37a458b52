//! Radially symmetric solutions `u_t = -grad V(u) + (d-1)/r u_r + u_rr`,
//! `u_r(0) = 0`, on a truncated interval `[0, r_max]`.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::FrontProfile;
use crate::linalg::Tridiagonal;
use crate::potential::Potential;
use crate::scalar::Real;

/// Uniform grid `r_k = k dr`, `k = 0..n_nodes`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGrid<T> {
    pub r_max: T,
    pub n_nodes: usize,
    pub dr: T,
    /// Space dimension of the radially symmetric problem.
    pub d: usize,
}

impl<T: Real> RadialGrid<T> {
    pub fn new(r_max: T, n_nodes: usize, d: usize) -> Result<Self> {
        if !(r_max > T::zero()) {
            return Err(Error::InvalidArgument("grid.r_max must be positive".into()));
        }
        if n_nodes < 16 {
            return Err(Error::InvalidArgument(
                "grid.n_nodes must be at least 16".into(),
            ));
        }
        if d == 0 {
            return Err(Error::InvalidArgument("grid.d must be at least 1".into()));
        }
        Ok(Self {
            r_max,
            n_nodes,
            dr: r_max / T::of_usize(n_nodes - 1),
            d,
        })
    }

    /// Grid with spacing `dr` (rounded so that `r_max` is a node).
    pub fn with_spacing(r_max: T, dr: T, d: usize) -> Result<Self> {
        let cells = (r_max / dr).round().to_usize().unwrap_or(0);
        Self::new(r_max, cells + 1, d)
    }

    #[inline]
    pub fn r(&self, k: usize) -> T {
        self.dr * T::of_usize(k)
    }

    /// `r^(d-1)`.
    #[inline]
    pub fn jacobian(&self, r: T) -> T {
        r.powi(self.d as i32 - 1)
    }

    /// Index of the last node with `r_k <= r`, clamped to the grid.
    pub fn node_below(&self, r: T) -> usize {
        if r <= T::zero() {
            return 0;
        }
        (r / self.dr)
            .floor()
            .to_usize()
            .unwrap_or(usize::MAX)
            .min(self.n_nodes - 1)
    }
}

/// A state `u(r_k, t)` with `n` components per node, stored node-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialField<T> {
    pub grid: RadialGrid<T>,
    pub n: usize,
    pub values: Vec<T>,
    pub time: T,
}

impl<T: Real> RadialField<T> {
    pub fn constant(grid: RadialGrid<T>, value: &[T], time: T) -> Self {
        let mut values = Vec::with_capacity(grid.n_nodes * value.len());
        for _ in 0..grid.n_nodes {
            values.extend_from_slice(value);
        }
        Self {
            grid,
            n: value.len(),
            values,
            time,
        }
    }

    /// State vector at node `k`.
    #[inline]
    pub fn at(&self, k: usize) -> &[T] {
        &self.values[k * self.n..(k + 1) * self.n]
    }

    #[inline]
    pub fn at_mut(&mut self, k: usize) -> &mut [T] {
        let n = self.n;
        &mut self.values[k * n..(k + 1) * n]
    }

    /// Component `j` at node `k`.
    #[inline]
    pub fn get(&self, k: usize, j: usize) -> T {
        self.values[k * self.n + j]
    }

    pub fn component(&self, j: usize) -> Vec<T> {
        (0..self.grid.n_nodes).map(|k| self.get(k, j)).collect()
    }

    /// Linear interpolation of the state at radius `r` (clamped to the grid).
    pub fn sample(&self, r: T) -> Vec<T> {
        let g = &self.grid;
        let k = g.node_below(r).min(g.n_nodes - 2);
        let t = ((r - g.r(k)) / g.dr).max(T::zero()).min(T::one());
        (0..self.n)
            .map(|j| self.get(k, j) * (T::one() - t) + self.get(k + 1, j) * t)
            .collect()
    }

    pub fn sup_norm(&self) -> T {
        (0..self.grid.n_nodes)
            .map(|k| crate::scalar::norm(self.at(k)))
            .fold(T::zero(), T::max)
    }

    /// Spatial derivative of component `j` at node `k` with the boundary
    /// conventions of the scheme: zero at the origin, zero at a Neumann
    /// outer edge, one-sided second order at a Dirichlet outer edge.
    pub fn du_dr(&self, k: usize, j: usize, outer_bc: OuterBc) -> T {
        node_derivative(&self.values, &self.grid, self.n, k, j, outer_bc)
    }
}

/// [`RadialField::du_dr`] on a raw node-major vector with `n` components.
pub(crate) fn node_derivative<T: Real>(
    v: &[T],
    g: &RadialGrid<T>,
    n: usize,
    k: usize,
    j: usize,
    outer_bc: OuterBc,
) -> T {
    let last = g.n_nodes - 1;
    let two = T::lit(2.0);
    if k == 0 {
        T::zero()
    } else if k == last {
        match outer_bc {
            OuterBc::NeumannZero => T::zero(),
            OuterBc::DirichletToMinimum => {
                (T::lit(3.0) * v[k * n + j] - T::lit(4.0) * v[(k - 1) * n + j] + v[(k - 2) * n + j])
                    / (two * g.dr)
            }
        }
    } else {
        (v[(k + 1) * n + j] - v[(k - 1) * n + j]) / (two * g.dr)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    ImexCn,
    ExplicitRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBc {
    NeumannZero,
    DirichletToMinimum,
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "imex_cn" => Ok(Self::ImexCn),
            "explicit_rk4" => Ok(Self::ExplicitRk4),
            _ => Err(Error::InvalidArgument(format!("unknown scheme '{s}'"))),
        }
    }
}

impl FromStr for OuterBc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "neumann_zero" => Ok(Self::NeumannZero),
            "dirichlet_to_minimum" => Ok(Self::DirichletToMinimum),
            _ => Err(Error::InvalidArgument(format!(
                "unknown outer boundary condition '{s}'"
            ))),
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ImexCn => "imex_cn",
            Self::ExplicitRk4 => "explicit_rk4",
        })
    }
}

impl fmt::Display for OuterBc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::NeumannZero => "neumann_zero",
            Self::DirichletToMinimum => "dirichlet_to_minimum",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    pub outer_bc: OuterBc,
    /// Clamped outer value for [`OuterBc::DirichletToMinimum`].
    pub outer_value: Vec<T>,
    pub t_end: T,
    /// Default observer cadence in steps.
    pub observe_every: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn imex(dt: T, t_end: T) -> Self {
        Self {
            dt,
            scheme: Scheme::ImexCn,
            outer_bc: OuterBc::NeumannZero,
            outer_value: Vec::new(),
            t_end,
            observe_every: 1,
        }
    }

    pub fn validate(&self, grid: &RadialGrid<T>, n: usize) -> Result<()> {
        if !(self.dt > T::zero()) {
            return Err(Error::InvalidArgument(
                "integrator.dt must be positive".into(),
            ));
        }
        if self.observe_every == 0 {
            return Err(Error::InvalidArgument(
                "integrator.observe_every must be positive".into(),
            ));
        }
        let dr = grid.dr;
        match self.scheme {
            Scheme::ExplicitRk4 if self.dt > T::lit(0.2) * dr * dr * (T::one() + T::tol(1e-12)) => {
                Err(Error::InvalidArgument(format!(
                    "explicit_rk4 needs dt <= 0.2 dr^2 = {}",
                    T::lit(0.2) * dr * dr
                )))
            }
            Scheme::ImexCn if self.dt > T::lit(0.5) * dr * (T::one() + T::tol(1e-12)) => {
                Err(Error::InvalidArgument(format!(
                    "imex_cn needs dt <= 0.5 dr = {}",
                    T::lit(0.5) * dr
                )))
            }
            _ if self.outer_bc == OuterBc::DirichletToMinimum && self.outer_value.len() != n => {
                Err(Error::InvalidArgument(
                    "dirichlet_to_minimum needs an outer value of the state dimension".into(),
                ))
            }
            _ => Ok(()),
        }
    }
}

/// Coefficients of the discrete radial Laplacian row by row:
/// `(L u)_k = lower_k u_{k-1} + diag_k u_k + upper_k u_{k+1}`.
#[derive(Debug, Clone)]
pub struct RadialLaplacian<T> {
    pub lower: Vec<T>,
    pub diag: Vec<T>,
    pub upper: Vec<T>,
}

impl<T: Real> RadialLaplacian<T> {
    pub fn new(grid: &RadialGrid<T>, outer_bc: OuterBc) -> Self {
        let n = grid.n_nodes;
        let h2 = grid.dr * grid.dr;
        let dm1 = T::of_usize(grid.d - 1);
        let two = T::lit(2.0);
        let mut lower = vec![T::zero(); n];
        let mut diag = vec![-two / h2; n];
        let mut upper = vec![T::zero(); n];
        // origin: (d-1) u_r / r -> (d-1) u_rr, ghost u_{-1} = u_1
        let d = T::of_usize(grid.d);
        diag[0] = -two * d / h2;
        upper[0] = two * d / h2;
        for k in 1..n - 1 {
            let curv = dm1 / (two * grid.r(k) * grid.dr);
            lower[k] = T::one() / h2 - curv;
            upper[k] = T::one() / h2 + curv;
        }
        match outer_bc {
            OuterBc::NeumannZero => lower[n - 1] = two / h2,
            OuterBc::DirichletToMinimum => diag[n - 1] = T::zero(),
        }
        Self { lower, diag, upper }
    }

    /// `(L u)_k` for component `j` of a node-major field.
    #[inline]
    fn apply_at(&self, u: &[T], n: usize, k: usize, j: usize) -> T {
        let mut s = self.diag[k] * u[k * n + j];
        if k > 0 {
            s = s + self.lower[k] * u[(k - 1) * n + j];
        }
        if k + 1 < self.diag.len() {
            s = s + self.upper[k] * u[(k + 1) * n + j];
        }
        s
    }
}

/// Right-hand side of the method-of-lines system at every node.
pub fn semi_discrete_rhs<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    outer_bc: OuterBc,
) -> Vec<T> {
    let lap = RadialLaplacian::new(&field.grid, outer_bc);
    let mut out = vec![T::zero(); field.values.len()];
    full_rhs(&lap, spec, field.n, outer_bc, &field.values, &mut out);
    out
}

fn reaction<T: Real>(spec: &dyn Potential<T>, n: usize, u: &[T], out: &mut [T]) {
    for (uk, ok) in u.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
        spec.gradient(uk, ok);
        for o in ok.iter_mut() {
            *o = -*o;
        }
    }
}

fn full_rhs<T: Real>(
    lap: &RadialLaplacian<T>,
    spec: &dyn Potential<T>,
    n: usize,
    bc: OuterBc,
    u: &[T],
    out: &mut [T],
) {
    reaction(spec, n, u, out);
    let nodes = u.len() / n;
    for k in 0..nodes {
        for j in 0..n {
            out[k * n + j] = out[k * n + j] + lap.apply_at(u, n, k, j);
        }
    }
    if bc == OuterBc::DirichletToMinimum {
        for o in &mut out[(nodes - 1) * n..] {
            *o = T::zero();
        }
    }
}

/// Advances fields by one step of the configured scheme.
pub struct Stepper<'a, T: Real> {
    spec: &'a dyn Potential<T>,
    cfg: IntegratorConfig<T>,
    n: usize,
    lap: RadialLaplacian<T>,
    implicit: Option<Tridiagonal<T>>,
    scratch: [Vec<T>; 5],
    column: Vec<T>,
}

impl<'a, T: Real> Stepper<'a, T> {
    pub fn new(
        spec: &'a dyn Potential<T>,
        grid: &RadialGrid<T>,
        n: usize,
        cfg: &IntegratorConfig<T>,
    ) -> Result<Self> {
        if spec.dim() != n {
            return Err(Error::InvalidArgument(
                "field and potential dimensions differ".into(),
            ));
        }
        cfg.validate(grid, n)?;
        let lap = RadialLaplacian::new(grid, cfg.outer_bc);
        let implicit = (cfg.scheme == Scheme::ImexCn).then(|| {
            let half = cfg.dt / T::lit(2.0);
            let lower: Vec<T> = lap.lower.iter().map(|&a| -half * a).collect();
            let diag: Vec<T> = lap.diag.iter().map(|&b| T::one() - half * b).collect();
            let upper: Vec<T> = lap.upper.iter().map(|&c| -half * c).collect();
            Tridiagonal::factor(&lower, &diag, &upper)
        });
        let len = grid.n_nodes * n;
        Ok(Self {
            spec,
            cfg: cfg.clone(),
            n,
            lap,
            implicit,
            scratch: std::array::from_fn(|_| vec![T::zero(); len]),
            column: vec![T::zero(); grid.n_nodes],
        })
    }

    pub fn config(&self) -> &IntegratorConfig<T> {
        &self.cfg
    }

    /// `u_t` of the semi-discrete system at `u`.
    pub fn rhs(&self, u: &[T], out: &mut [T]) {
        full_rhs(&self.lap, self.spec, self.n, self.cfg.outer_bc, u, out);
    }

    /// Advances `field` by `dt`; `field.time` becomes `t_new`.
    pub fn step_to(&mut self, field: &mut RadialField<T>, t_new: T) -> Result<()> {
        match self.cfg.scheme {
            Scheme::ImexCn => self.imex_cn(&mut field.values),
            Scheme::ExplicitRk4 => self.rk4(&mut field.values),
        }
        if self.cfg.outer_bc == OuterBc::DirichletToMinimum {
            let last = field.grid.n_nodes - 1;
            field.at_mut(last).copy_from_slice(&self.cfg.outer_value);
        }
        if let Some(pos) = field.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Instability {
                time: t_new.as_f64(),
                node: pos / self.n,
            });
        }
        field.time = t_new;
        Ok(())
    }

    pub fn step(&mut self, field: &mut RadialField<T>) -> Result<()> {
        let t = field.time + self.cfg.dt;
        self.step_to(field, t)
    }

    fn imex_cn(&mut self, u: &mut [T]) {
        let (n, dt) = (self.n, self.cfg.dt);
        let half = dt / T::lit(2.0);
        let [r0, ustar, rstar, rhs, _] = &mut self.scratch;
        // explicit midpoint predictor for the reaction
        reaction(self.spec, n, u, r0);
        let nodes = u.len() / n;
        for k in 0..nodes {
            for j in 0..n {
                let i = k * n + j;
                ustar[i] = u[i] + half * (self.lap.apply_at(u, n, k, j) + r0[i]);
            }
        }
        reaction(self.spec, n, ustar, rstar);
        for k in 0..nodes {
            for j in 0..n {
                let i = k * n + j;
                rhs[i] = u[i] + half * self.lap.apply_at(u, n, k, j) + dt * rstar[i];
            }
        }
        let lu = self.implicit.as_ref().expect("imex factors");
        for j in 0..n {
            for k in 0..nodes {
                self.column[k] = rhs[k * n + j];
            }
            lu.solve_in_place(&mut self.column);
            for k in 0..nodes {
                u[k * n + j] = self.column[k];
            }
        }
    }

    fn rk4(&mut self, u: &mut [T]) {
        let dt = self.cfg.dt;
        let half = dt / T::lit(2.0);
        let two = T::lit(2.0);
        let [k1, k2, k3, k4, tmp] = &mut self.scratch;
        full_rhs(&self.lap, self.spec, self.n, self.cfg.outer_bc, u, k1);
        for i in 0..u.len() {
            tmp[i] = u[i] + half * k1[i];
        }
        full_rhs(&self.lap, self.spec, self.n, self.cfg.outer_bc, tmp, k2);
        for i in 0..u.len() {
            tmp[i] = u[i] + half * k2[i];
        }
        full_rhs(&self.lap, self.spec, self.n, self.cfg.outer_bc, tmp, k3);
        for i in 0..u.len() {
            tmp[i] = u[i] + dt * k3[i];
        }
        full_rhs(&self.lap, self.spec, self.n, self.cfg.outer_bc, tmp, k4);
        for i in 0..u.len() {
            u[i] = u[i] + dt * (k1[i] + two * k2[i] + two * k3[i] + k4[i]) / T::lit(6.0);
        }
    }
}

/// One-shot step of `field` with a fresh [`Stepper`].
pub fn step<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<RadialField<T>> {
    let mut out = field.clone();
    Stepper::new(spec, &field.grid, field.n, cfg)?.step(&mut out)?;
    Ok(out)
}

/// Read-only view handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct Snapshot<'a, T> {
    pub field: &'a RadialField<T>,
    /// `u_t` from the semi-discrete right-hand side.
    pub u_t: &'a [T],
    pub step: usize,
}

/// Callback invoked during [`integrate`].
pub trait Observer<T: Real> {
    fn name(&self) -> &str;

    /// Cadence in steps; `None` uses the integrator's `observe_every`.
    fn cadence(&self) -> Option<usize> {
        None
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()>;
}

/// Steps `field` to `cfg.t_end`, calling each observer at step 0 and then on
/// its cadence.
pub fn integrate<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    cfg: &IntegratorConfig<T>,
    observers: &mut [&mut dyn Observer<T>],
) -> Result<RadialField<T>> {
    if cfg.t_end < field.time {
        return Err(Error::InvalidArgument(
            "integrator.t_end precedes the field time".into(),
        ));
    }
    let mut stepper = Stepper::new(spec, &field.grid, field.n, cfg)?;
    let mut state = field.clone();
    if cfg.outer_bc == OuterBc::DirichletToMinimum {
        let last = state.grid.n_nodes - 1;
        state.at_mut(last).copy_from_slice(&cfg.outer_value);
    }
    let t0 = field.time;
    let steps = ((cfg.t_end - t0) / cfg.dt).round().to_usize().unwrap_or(0);
    let cadences: Vec<usize> = observers
        .iter()
        .map(|o| o.cadence().unwrap_or(cfg.observe_every).max(1))
        .collect();
    let mut u_t = vec![T::zero(); state.values.len()];
    for s in 0..=steps {
        if s > 0 {
            stepper.step_to(&mut state, t0 + cfg.dt * T::of_usize(s))?;
        }
        let due: Vec<usize> = (0..observers.len())
            .filter(|&i| s % cadences[i] == 0)
            .collect();
        if due.is_empty() {
            continue;
        }
        stepper.rhs(&state.values, &mut u_t);
        let snap = Snapshot {
            field: &state,
            u_t: &u_t,
            step: s,
        };
        for i in due {
            observers[i].observe(&snap).map_err(|e| Error::Observer {
                time: state.time.as_f64(),
                message: format!("{}: {e}", observers[i].name()),
            })?;
        }
    }
    Ok(state)
}

/// Initial data presets; all are flat at the origin.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData<T> {
    /// `inner` on `[0, r0]`, raised-cosine ramp of width `width`, `outer` beyond.
    Plateau {
        inner: Vec<T>,
        outer: Vec<T>,
        r0: T,
        width: T,
    },
    /// A front profile placed with its `xi = 0` at radius `r0`, reflected
    /// evenly about the origin when its back reaches it.
    FrontSeed {
        profile: FrontProfile<T>,
        r0: T,
    },
    /// `outer` plus a Gaussian bump of the given amplitude, centre and width,
    /// symmetrized about the origin and cut off smoothly at four widths.
    Bump {
        outer: Vec<T>,
        amplitude: Vec<T>,
        r0: T,
        width: T,
    },
    Homogeneous {
        outer: Vec<T>,
    },
}

/// Integrated raised cosine: slope `1 - cos(2 pi s)`, so the ramp is `C^2`.
fn cosine_ramp<T: Real>(s: T) -> T {
    if s <= T::zero() {
        T::zero()
    } else if s >= T::one() {
        T::one()
    } else {
        let tau = T::lit(2.0) * T::PI();
        s - (tau * s).sin() / tau
    }
}

fn compact_gaussian<T: Real>(x: T, width: T) -> T {
    let s = x / width;
    let cut = s / T::lit(4.0);
    if cut.abs() >= T::one() {
        return T::zero();
    }
    (-s * s).exp() * (T::one() - cut * cut).powi(3)
}

pub fn make_initial_data<T: Real>(
    kind: &InitialData<T>,
    grid: &RadialGrid<T>,
) -> Result<RadialField<T>> {
    let exceeds = |r: T| r >= grid.r_max;
    match kind {
        InitialData::Homogeneous { outer } => Ok(RadialField::constant(*grid, outer, T::zero())),
        InitialData::Plateau {
            inner,
            outer,
            r0,
            width,
        } => {
            if inner.len() != outer.len() {
                return Err(Error::InvalidArgument(
                    "plateau states differ in dimension".into(),
                ));
            }
            if *r0 < T::zero() || !(*width > T::zero()) {
                return Err(Error::InvalidArgument(
                    "plateau needs r0 >= 0 and width > 0".into(),
                ));
            }
            if exceeds(*r0 + *width) {
                return Err(Error::InitialDataExceedsDomain);
            }
            let mut f = RadialField::constant(*grid, outer, T::zero());
            for k in 0..grid.n_nodes {
                let s = cosine_ramp((grid.r(k) - *r0) / *width);
                for (j, v) in f.at_mut(k).iter_mut().enumerate() {
                    *v = inner[j] + (outer[j] - inner[j]) * s;
                }
            }
            Ok(f)
        }
        InitialData::Bump {
            outer,
            amplitude,
            r0,
            width,
        } => {
            if amplitude.len() != outer.len() {
                return Err(Error::InvalidArgument(
                    "bump amplitude and state differ in dimension".into(),
                ));
            }
            if *r0 < T::zero() || !(*width > T::zero()) {
                return Err(Error::InvalidArgument(
                    "bump needs r0 >= 0 and width > 0".into(),
                ));
            }
            if exceeds(*r0 + *width) {
                return Err(Error::InitialDataExceedsDomain);
            }
            let mut f = RadialField::constant(*grid, outer, T::zero());
            for k in 0..grid.n_nodes {
                let r = grid.r(k);
                let g = compact_gaussian(r - *r0, *width) + compact_gaussian(r + *r0, *width);
                for (j, v) in f.at_mut(k).iter_mut().enumerate() {
                    *v = outer[j] + amplitude[j] * g;
                }
            }
            Ok(f)
        }
        InitialData::FrontSeed { profile, r0 } => {
            if profile.dim() == 0 || *r0 < T::zero() {
                return Err(Error::InvalidArgument("front seed needs r0 >= 0".into()));
            }
            if exceeds(*r0) {
                return Err(Error::InitialDataExceedsDomain);
            }
            let mut f = RadialField::constant(*grid, &profile.m_plus.location, T::zero());
            let behind = &profile.m_minus.location;
            for k in 0..grid.n_nodes {
                let r = grid.r(k);
                let a = profile.eval(r - *r0);
                let b = profile.eval(-r - *r0);
                // mirror image keeps u_r(0) = 0
                for (j, v) in f.at_mut(k).iter_mut().enumerate() {
                    *v = a[j] + b[j] - behind[j];
                }
            }
            Ok(f)
        }
    }
}

/// Writes a snapshot as `r,u_1..u_n` with a `# t=.. d=.. dr=..` header.
pub fn write_snapshot<T: Real>(field: &RadialField<T>, path: &Path) -> Result<()> {
    let mut out = Vec::new();
    let g = &field.grid;
    writeln!(
        out,
        "# t={} d={} dr={}",
        field.time.as_f64(),
        g.d,
        g.dr.as_f64()
    )?;
    let mut header = vec!["r".to_string()];
    header.extend((1..=field.n).map(|j| format!("u_{j}")));
    writeln!(out, "{}", header.join(","))?;
    for k in 0..g.n_nodes {
        let mut row = vec![format!("{}", g.r(k).as_f64())];
        row.extend(field.at(k).iter().map(|v| format!("{:e}", v.as_f64())));
        writeln!(out, "{}", row.join(","))?;
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_snapshot<T: Real>(path: &Path) -> Result<RadialField<T>> {
    let text = fs::read_to_string(path)?;
    let (mut time, mut d, mut dr) = (None, None, None);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut n = None;
    for line in text.lines() {
        let line = line.trim();
        if let Some(meta) = line.strip_prefix('#') {
            for kv in meta.split_whitespace() {
                match kv.split_once('=') {
                    Some(("t", v)) => time = v.parse::<f64>().ok(),
                    Some(("d", v)) => d = v.parse::<usize>().ok(),
                    Some(("dr", v)) => dr = v.parse::<f64>().ok(),
                    _ => {}
                }
            }
        } else if line.starts_with('r') {
            n = Some(line.split(',').count() - 1);
        } else if !line.is_empty() {
            let row = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Format(format!("snapshot row: {e}")))?;
            rows.push(row);
        }
    }
    let (Some(time), Some(d), Some(dr), Some(n)) = (time, d, dr, n) else {
        return Err(Error::Format("snapshot header incomplete".into()));
    };
    if rows.iter().any(|r| r.len() != n + 1) {
        return Err(Error::Format(
            "snapshot row has the wrong number of fields".into(),
        ));
    }
    let nodes = rows.len();
    let grid = RadialGrid::new(T::lit(dr * (nodes.max(1) - 1) as f64), nodes, d)?;
    let values = rows
        .iter()
        .flat_map(|r| r[1..].iter().map(|&v| T::lit(v)))
        .collect();
    Ok(RadialField {
        grid,
        n,
        values,
        time: T::lit(time),
    })
}

/// Index of a finished run: snapshot files and observer outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// Exact echo of the parsed configuration, `key = value` per entry.
    pub config: Vec<String>,
    pub snapshots: Vec<SnapshotRef>,
    pub observers: Vec<ObserverRef>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRef {
    pub t: f64,
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObserverRef {
    pub kind: String,
    pub path: PathBuf,
}

impl Manifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}
