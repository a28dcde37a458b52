//! Bistable travelling fronts `phi'' = -c phi' + grad V(phi)`.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::{MinimumPoint, Potential, PotentialAnalysis};
use crate::scalar::{dist, norm, Real};

/// First-order form of the front ODE: returns `(phi', phi'')`.
pub fn front_ode_rhs<T: Real>(
    phi: &[T],
    dphi: &[T],
    c: T,
    spec: &dyn Potential<T>,
) -> (Vec<T>, Vec<T>) {
    let g = spec.gradient_vec(phi);
    let dd = dphi.iter().zip(&g).map(|(&p, &gv)| -c * p + gv).collect();
    (dphi.to_vec(), dd)
}

/// A heteroclinic profile sampled on a uniform grid `xi_k = xi0 + k dxi`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontProfile<T> {
    pub xi0: T,
    pub dxi: T,
    pub values: Vec<Vec<T>>,
    pub derivative: Vec<Vec<T>>,
    pub speed: T,
    pub m_minus: MinimumPoint<T>,
    pub m_plus: MinimumPoint<T>,
    pub normalized: bool,
    /// Escape distance used for normalization, if any.
    pub d_esc: Option<T>,
}

impl<T: Real> FrontProfile<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.m_plus.location.len()
    }

    pub fn xi(&self, k: usize) -> T {
        self.xi0 + self.dxi * T::of_usize(k)
    }

    pub fn xi_grid(&self) -> Vec<T> {
        (0..self.len()).map(|k| self.xi(k)).collect()
    }

    pub fn xi_range(&self) -> (T, T) {
        (self.xi0, self.xi(self.len().saturating_sub(1)))
    }

    /// Cubic Hermite interpolation inside the grid, the endpoint minima outside.
    pub fn eval(&self, xi: T) -> Vec<T> {
        let (lo, hi) = self.xi_range();
        if xi <= lo {
            return if xi < lo {
                self.m_minus.location.clone()
            } else {
                self.values[0].clone()
            };
        }
        if xi >= hi {
            return if xi > hi {
                self.m_plus.location.clone()
            } else {
                self.values[self.len() - 1].clone()
            };
        }
        let s = (xi - self.xi0) / self.dxi;
        let k = s.floor().to_usize().unwrap_or(0).min(self.len() - 2);
        let t = s - T::of_usize(k);
        self.hermite(k, t)
    }

    fn hermite(&self, k: usize, t: T) -> Vec<T> {
        let (one, two, three) = (T::one(), T::lit(2.0), T::lit(3.0));
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + one;
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        (0..self.dim())
            .map(|j| {
                h00 * self.values[k][j]
                    + h10 * self.dxi * self.derivative[k][j]
                    + h01 * self.values[k + 1][j]
                    + h11 * self.dxi * self.derivative[k + 1][j]
            })
            .collect()
    }

    /// Same profile shifted so that old `xi` becomes `xi - shift`.
    pub fn translated(&self, shift: T) -> Self {
        let mut out = self.clone();
        out.xi0 = self.xi0 - shift;
        out.normalized = false;
        out
    }

    /// Scalar profiles only: whether `phi'` keeps one strict sign wherever
    /// the profile is outside the `tube`-neighbourhoods of both endpoints.
    pub fn is_monotone_between_tubes(&self, tube: T) -> bool {
        if self.dim() != 1 {
            return false;
        }
        let sign = (self.m_plus.location[0] - self.m_minus.location[0]).signum();
        self.values.iter().zip(&self.derivative).all(|(v, dv)| {
            let near =
                dist(v, &self.m_minus.location) <= tube || dist(v, &self.m_plus.location) <= tube;
            near || sign * dv[0] > T::zero()
        })
    }
}

/// Numerical parameters of the shooting solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingConfig {
    /// Distance from `m_minus` along the unstable direction at launch.
    pub launch_offset: f64,
    /// Bisection stops once the speed bracket is narrower than this.
    pub speed_tol: f64,
    /// Output grid spacing; halved (up to `max_refinements` times) until the
    /// residual target is met.
    pub dxi: f64,
    pub residual_target: f64,
    pub max_refinements: usize,
    /// Truncation distance to `m_plus`.
    pub tail_tol: f64,
    pub xi_max: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            launch_offset: 1e-6,
            speed_tol: 1e-10,
            dxi: 0.01,
            residual_target: 1e-6,
            max_refinements: 3,
            tail_tol: 1e-6,
            xi_max: 2000.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Shot {
    Overshoot,
    Undershoot,
    /// Still next to `m_plus` after `xi_max`.
    Stalled,
}

struct Trajectory<T> {
    phi: Vec<T>,
    dphi: Vec<T>,
    outcome: Shot,
}

struct Shooter<'a, T: Real> {
    spec: &'a dyn Potential<T>,
    from: T,
    to: T,
    curv_from: T,
    cfg: ShootingConfig,
}

impl<T: Real> Shooter<'_, T> {
    fn rhs(&self, c: T, p: T, q: T) -> (T, T) {
        (q, -c * q + self.spec.gradient_vec(&[p])[0])
    }

    /// Integrates from the unstable manifold of `from` with RK4 step `h`,
    /// storing every `stride`-th state when `keep` is set.
    fn shoot(&self, c: T, h: T, stride: usize, keep: bool) -> Trajectory<T> {
        let two = T::lit(2.0);
        let sign = (self.to - self.from).signum();
        let mu = (-c + (c * c + T::lit(4.0) * self.curv_from).sqrt()) / two;
        let eps = T::lit(self.cfg.launch_offset);
        let mut p = self.from + sign * eps;
        let mut q = sign * mu * eps;
        let (mut phi, mut dphi) = (Vec::new(), Vec::new());
        if keep {
            phi.push(p);
            dphi.push(q);
        }
        let steps = (T::lit(self.cfg.xi_max) / h)
            .ceil()
            .to_usize()
            .unwrap_or(usize::MAX);
        let half = h / two;
        for step in 1..=steps {
            let (k1p, k1q) = self.rhs(c, p, q);
            let (k2p, k2q) = self.rhs(c, p + half * k1p, q + half * k1q);
            let (k3p, k3q) = self.rhs(c, p + half * k2p, q + half * k2q);
            let (k4p, k4q) = self.rhs(c, p + h * k3p, q + h * k3q);
            let six = T::lit(6.0);
            p = p + h * (k1p + two * k2p + two * k3p + k4p) / six;
            q = q + h * (k1q + two * k2q + two * k3q + k4q) / six;
            if keep && step % stride == 0 {
                phi.push(p);
                dphi.push(q);
            }
            if sign * (p - self.to) > T::zero() {
                return Trajectory {
                    phi,
                    dphi,
                    outcome: Shot::Overshoot,
                };
            }
            if sign * q < T::zero() {
                return Trajectory {
                    phi,
                    dphi,
                    outcome: Shot::Undershoot,
                };
            }
            let resting = T::tol(1e-11);
            if q.abs() < resting
                && (k1q + c * q).abs() < resting
                && (p - self.to).abs() >= T::lit(1e-3)
            {
                return Trajectory {
                    phi,
                    dphi,
                    outcome: Shot::Undershoot,
                };
            }
        }
        // heavy damping can park the orbit on an intermediate critical point
        let outcome = if (p - self.to).abs() < T::lit(1e-3) {
            Shot::Stalled
        } else {
            Shot::Undershoot
        };
        Trajectory { phi, dphi, outcome }
    }

    fn classify(&self, c: T, h: T) -> Shot {
        self.shoot(c, h, 1, false).outcome
    }
}

fn check_endpoints<T: Real>(
    analysis: &PotentialAnalysis<T>,
    m_minus: &MinimumPoint<T>,
    m_plus: &MinimumPoint<T>,
) -> Result<()> {
    let known = |m: &MinimumPoint<T>| {
        analysis
            .minima
            .iter()
            .any(|a| dist(&a.location, &m.location) < T::tol(1e-6))
    };
    if !known(m_minus) || !known(m_plus) {
        return Err(Error::InvalidArgument(
            "front endpoints must be minima of the analysis".into(),
        ));
    }
    if dist(&m_minus.location, &m_plus.location) < T::tol(1e-6) {
        return Err(Error::InvalidArgument("front endpoints coincide".into()));
    }
    let slack = T::tol(1e-12) * (T::one() + m_plus.value.abs());
    if m_minus.value > m_plus.value + slack {
        return Err(Error::InvalidArgument(
            "bistable front requires V(m_minus) <= V(m_plus)".into(),
        ));
    }
    Ok(())
}

/// Scalar speed shooting for the front from `m_minus` (behind) to `m_plus`
/// (invaded), with `c` searched inside `bracket`.
///
/// The speed is bisected until the bracket is below `speed_tol` and further,
/// down to rounding, so that the stored orbit follows the stable manifold of
/// `m_plus` into its `tail_tol` neighbourhood. The returned profile is not
/// normalized; see [`normalize_front`].
pub fn solve_bistable_front<T: Real>(
    spec: &dyn Potential<T>,
    analysis: &PotentialAnalysis<T>,
    m_minus: &MinimumPoint<T>,
    m_plus: &MinimumPoint<T>,
    bracket: (T, T),
) -> Result<FrontProfile<T>> {
    solve_bistable_front_with(
        spec,
        analysis,
        m_minus,
        m_plus,
        bracket,
        &ShootingConfig::default(),
    )
}

pub fn solve_bistable_front_with<T: Real>(
    spec: &dyn Potential<T>,
    analysis: &PotentialAnalysis<T>,
    m_minus: &MinimumPoint<T>,
    m_plus: &MinimumPoint<T>,
    bracket: (T, T),
    cfg: &ShootingConfig,
) -> Result<FrontProfile<T>> {
    if spec.dim() != 1 {
        return Err(Error::VectorShootingUnsupported);
    }
    check_endpoints(analysis, m_minus, m_plus)?;
    let (lo0, hi0) = bracket;
    if !(lo0 < hi0) {
        return Err(Error::InvalidArgument(
            "speed bracket must satisfy lo < hi".into(),
        ));
    }
    let mut best = None;
    let mut dxi = T::lit(cfg.dxi);
    for _ in 0..=cfg.max_refinements {
        let profile = shoot_profile(spec, m_minus, m_plus, bracket, dxi, cfg)?;
        let res = front_residual(&profile, spec);
        log::debug!(
            "front at dxi = {dxi}: c = {}, residual = {res}",
            profile.speed
        );
        let done = res <= T::lit(cfg.residual_target);
        best = Some(profile);
        if done {
            break;
        }
        dxi = dxi / T::lit(2.0);
    }
    let profile = best.expect("at least one attempt");
    if profile.speed > T::zero() && m_minus.value >= m_plus.value {
        return Err(Error::InvalidArgument(
            "positive speed requires V(m_minus) < V(m_plus)".into(),
        ));
    }
    Ok(profile)
}

fn shoot_profile<T: Real>(
    spec: &dyn Potential<T>,
    m_minus: &MinimumPoint<T>,
    m_plus: &MinimumPoint<T>,
    (lo0, hi0): (T, T),
    dxi: T,
    cfg: &ShootingConfig,
) -> Result<FrontProfile<T>> {
    const SUBSTEPS: usize = 4;
    let h = dxi / T::of_usize(SUBSTEPS);
    let shooter = Shooter {
        spec,
        from: m_minus.location[0],
        to: m_plus.location[0],
        curv_from: m_minus.hess_eigenvalues[0],
        cfg: *cfg,
    };
    let lo_shot = shooter.classify(lo0, h);
    let hi_shot = shooter.classify(hi0, h);
    if lo_shot != Shot::Overshoot || hi_shot != Shot::Undershoot {
        return Err(Error::BracketDoesNotIsolate);
    }
    // the classifier must switch exactly once across the bracket
    let probes = 8;
    let mut switched = false;
    for k in 1..probes {
        let c = lo0 + (hi0 - lo0) * T::of_usize(k) / T::of_usize(probes);
        match shooter.classify(c, h) {
            Shot::Overshoot if switched => return Err(Error::NonMonotoneShooting(c.as_f64())),
            Shot::Overshoot => {}
            _ => switched = true,
        }
    }
    let (mut lo, mut hi) = (lo0, hi0);
    let tol = T::lit(cfg.speed_tol);
    loop {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        match shooter.classify(mid, h) {
            Shot::Overshoot => lo = mid,
            Shot::Undershoot => hi = mid,
            Shot::Stalled => {
                lo = mid;
                hi = mid;
                break;
            }
        }
        if hi - lo <= tol * T::lit(1e-5) {
            break;
        }
    }
    debug_assert!(hi - lo <= tol);
    let mut c = (lo + hi) / T::lit(2.0);
    let traj = shooter.shoot(c, h, SUBSTEPS, true);
    if c.abs() < T::lit(1e-8) {
        c = T::zero();
    }
    let to = shooter.to;
    let tail = T::lit(cfg.tail_tol);
    // keep the orbit up to its first entry into the tail neighbourhood, or up
    // to its closest approach and continue along the decaying linear mode
    let gaps: Vec<T> = traj.phi.iter().map(|&p| (p - to).abs()).collect();
    let (mut phi, mut dphi) = match gaps.iter().position(|&g| g < tail) {
        Some(k) => (traj.phi[..=k].to_vec(), traj.dphi[..=k].to_vec()),
        None => {
            let k = gaps
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
                .map(|(k, _)| k)
                .unwrap_or(0);
            (traj.phi[..=k].to_vec(), traj.dphi[..=k].to_vec())
        }
    };
    let curv_to = m_plus.hess_eigenvalues[0];
    let decay = (-c - (c * c + T::lit(4.0) * curv_to).sqrt()) / T::lit(2.0);
    let mut gap = *phi.last().unwrap() - to;
    while gap.abs() >= tail {
        gap = gap * (decay * dxi).exp();
        phi.push(to + gap);
        dphi.push(decay * gap);
    }
    log::debug!("front profile with {} nodes, c = {c}", phi.len());
    Ok(FrontProfile {
        xi0: T::zero(),
        dxi,
        values: phi.into_iter().map(|p| vec![p]).collect(),
        derivative: dphi.into_iter().map(|q| vec![q]).collect(),
        speed: c,
        m_minus: m_minus.clone(),
        m_plus: m_plus.clone(),
        normalized: false,
        d_esc: None,
    })
}

/// Translates `profile` so that the last point where `|phi - m_plus|`
/// equals `d_esc` sits at `xi = 0`.
///
/// The crossing is located on the cubic Hermite interpolant used by
/// [`FrontProfile::eval`], so `|phi(0) - m_plus| = d_esc` holds for the
/// interpolated profile to rounding.
pub fn normalize_front<T: Real>(profile: &FrontProfile<T>, d_esc: T) -> Result<FrontProfile<T>> {
    let m = &profile.m_plus.location;
    let gap = |k: usize| dist(&profile.values[k], m) - d_esc;
    let last_out = (0..profile.len()).rev().find(|&k| gap(k) >= T::zero());
    let Some(k) = last_out else {
        return Err(Error::NeverEscapes);
    };
    if k + 1 >= profile.len() {
        return Err(Error::NeverEscapes);
    }
    let gap_at = |t: T| dist(&profile.hermite(k, t), m) - d_esc;
    let (mut lo, mut hi) = (T::zero(), T::one());
    if gap_at(lo) == T::zero() {
        hi = lo;
    }
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if gap_at(mid) >= T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xi_star = profile.xi(k) + lo * profile.dxi;
    if profile.normalized && profile.d_esc == Some(d_esc) && xi_star.abs() <= T::tol(1e-12) {
        return Ok(profile.clone());
    }
    let mut out = profile.translated(xi_star);
    out.normalized = true;
    out.d_esc = Some(d_esc);
    Ok(out)
}

/// Sup over interior nodes of `|D^2 phi + c D phi - grad V(phi)|` with
/// centred differences on the profile grid.
pub fn front_residual<T: Real>(profile: &FrontProfile<T>, spec: &dyn Potential<T>) -> T {
    let h = profile.dxi;
    let n = profile.dim();
    let mut worst = T::zero();
    let mut r = vec![T::zero(); n];
    for k in 1..profile.len().saturating_sub(1) {
        let g = spec.gradient_vec(&profile.values[k]);
        for j in 0..n {
            let (a, b, c) = (
                profile.values[k - 1][j],
                profile.values[k][j],
                profile.values[k + 1][j],
            );
            let d2 = (c - T::lit(2.0) * b + a) / (h * h);
            let d1 = (c - a) / (T::lit(2.0) * h);
            r[j] = d2 + profile.speed * d1 - g[j];
        }
        worst = worst.max(norm(&r));
    }
    worst
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    speed: f64,
    m_minus: Vec<f64>,
    m_plus: Vec<f64>,
    normalized: bool,
    d_esc: Option<f64>,
}

/// Sidecar path next to a profile CSV.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

impl<T: Real> FrontProfile<T> {
    /// Writes `xi,phi_1..phi_n,dphi_1..dphi_n` and the JSON sidecar.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let n = self.dim();
        let mut out = Vec::new();
        let mut header = vec!["xi".to_string()];
        header.extend((1..=n).map(|j| format!("phi_{j}")));
        header.extend((1..=n).map(|j| format!("dphi_{j}")));
        writeln!(out, "{}", header.join(","))?;
        for k in 0..self.len() {
            let mut row = vec![format!("{:e}", self.xi(k).as_f64())];
            row.extend(self.values[k].iter().map(|v| format!("{:e}", v.as_f64())));
            row.extend(
                self.derivative[k]
                    .iter()
                    .map(|v| format!("{:e}", v.as_f64())),
            );
            writeln!(out, "{}", row.join(","))?;
        }
        fs::write(path, out)?;
        let side = Sidecar {
            speed: self.speed.as_f64(),
            m_minus: self.m_minus.location.iter().map(|x| x.as_f64()).collect(),
            m_plus: self.m_plus.location.iter().map(|x| x.as_f64()).collect(),
            normalized: self.normalized,
            d_esc: self.d_esc.map(|d| d.as_f64()),
        };
        fs::write(sidecar_path(path), serde_json::to_string_pretty(&side)?)?;
        Ok(())
    }

    /// Reads a profile written by [`FrontProfile::write_csv`]; endpoint
    /// spectra are recomputed from `spec`.
    pub fn read_csv(path: &Path, spec: &dyn Potential<T>) -> Result<Self> {
        let side: Sidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?;
        let n = spec.dim();
        if side.m_minus.len() != n || side.m_plus.len() != n {
            return Err(Error::Format(
                "sidecar minima do not match potential dimension".into(),
            ));
        }
        let text = fs::read_to_string(path)?;
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty profile CSV".into()))?;
        if header.split(',').count() != 1 + 2 * n {
            return Err(Error::Format(format!(
                "profile header '{header}' does not match n = {n}"
            )));
        }
        let mut xi = Vec::new();
        let mut values = Vec::new();
        let mut derivative = Vec::new();
        for (lineno, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let fields: Vec<f64> = line
                .split(',')
                .map(|f| f.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Format(format!("profile line {}: {e}", lineno + 2)))?;
            if fields.len() != 1 + 2 * n {
                return Err(Error::Format(format!(
                    "profile line {}: wrong field count",
                    lineno + 2
                )));
            }
            xi.push(fields[0]);
            values.push(fields[1..=n].iter().map(|&v| T::lit(v)).collect());
            derivative.push(fields[n + 1..].iter().map(|&v| T::lit(v)).collect());
        }
        if xi.len() < 2 {
            return Err(Error::Format("profile needs at least two nodes".into()));
        }
        let dxi = (xi[xi.len() - 1] - xi[0]) / (xi.len() - 1) as f64;
        let lit = |v: &[f64]| v.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        Ok(Self {
            xi0: T::lit(xi[0]),
            dxi: T::lit(dxi),
            values,
            derivative,
            speed: T::lit(side.speed),
            m_minus: MinimumPoint::at(spec, lit(&side.m_minus)),
            m_plus: MinimumPoint::at(spec, lit(&side.m_plus)),
            normalized: side.normalized,
            d_esc: side.d_esc.map(T::lit),
        })
    }
}
