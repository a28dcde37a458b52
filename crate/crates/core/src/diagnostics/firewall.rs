use super::energy::node_energy;
use super::observers::Trajectory;
use super::quadrature::{add_interval_weights, trapezoid_weights};
use crate::error::{Error, Result};
use crate::potential::{MinimumPoint, Potential, PotentialAnalysis};
use crate::radial::{node_derivative, OuterBc, RadialField};
use crate::scalar::{dist, Real};

/// Constants of the laboratory-frame firewall and of the no-escape hull.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirewallConfig<T> {
    pub kappa0: T,
    pub r_sc: T,
    pub nu_f0: T,
    pub k_f0: T,
    pub delta_esc: T,
    pub hull_l: T,
    pub c_noesc: T,
    pub w_en0: T,
    pub d_esc: T,
    pub lambda_min: T,
    pub lambda_max: T,
    pub d: usize,
}

impl<T: Real> FirewallConfig<T> {
    pub fn new(analysis: &PotentialAnalysis<T>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument(
                "space dimension must be at least 1".into(),
            ));
        }
        let (two, eight) = (T::lit(2.0), T::lit(8.0));
        let lmin = analysis.lambda_min;
        let dm1 = T::of_usize(d - 1);
        let kappa0 = T::lit(0.5).min(lmin / eight);
        let r_sc = (two * dm1).max(eight * dm1 / lmin);
        let delta_esc = analysis.d_esc
            * ((analysis.w_en0 / two).min(T::lit(0.25)) / (kappa0 + T::one())).sqrt();
        let d2 = delta_esc * delta_esc;
        let hull_l = (T::lit(16.0) * analysis.k_f0 / (analysis.nu_f0 * d2 * kappa0)).ln() / kappa0;
        let c_noesc = eight * analysis.k_f0 * hull_l / (kappa0 * d2);
        let cfg = Self {
            kappa0,
            r_sc,
            nu_f0: analysis.nu_f0,
            k_f0: analysis.k_f0,
            delta_esc,
            hull_l,
            c_noesc,
            w_en0: analysis.w_en0,
            d_esc: analysis.d_esc,
            lambda_min: lmin,
            lambda_max: analysis.lambda_max,
            d,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// `(d-1)/r_sc`, zero in dimension one.
    pub fn curvature_bound(&self) -> T {
        if self.d == 1 {
            T::zero()
        } else {
            T::of_usize(self.d - 1) / self.r_sc
        }
    }

    /// The three small-curvature inequalities and positivity of the hull length.
    pub fn check(&self) -> Result<()> {
        let q = T::lit(0.25);
        let s = self.curvature_bound() + self.kappa0;
        let slack = T::one() + T::tol(1e-12);
        if self.w_en0 / T::lit(4.0) * s * s > q * slack {
            return Err(Error::Constraint(
                "(w_en0/4)((d-1)/r_sc + kappa0)^2 <= 1/4".into(),
            ));
        }
        if q * s > q * slack {
            return Err(Error::Constraint("((d-1)/r_sc + kappa0)/4 <= 1/4".into()));
        }
        if s > self.lambda_min / T::lit(4.0) * slack {
            return Err(Error::Constraint(
                "(d-1)/r_sc + kappa0 <= lambda_min/4".into(),
            ));
        }
        if !(self.hull_l > T::zero()) || !(self.c_noesc > T::zero()) {
            return Err(Error::Constraint(
                "hull length and no-escape speed must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Radial factor of the weight: `(r/r_sc)^(d-1)` below `r_sc`, one above.
    pub fn small_curvature_factor(&self, r: T) -> T {
        if self.d == 1 || r >= self.r_sc {
            T::one()
        } else {
            (r / self.r_sc).powi(self.d as i32 - 1)
        }
    }
}

/// `T_rho psi_0(r)`, defined for `rho >= r_sc`.
pub fn weight_t_rho_psi0<T: Real>(rho: T, r: T, cfg: &FirewallConfig<T>) -> Result<T> {
    if rho < cfg.r_sc {
        return Err(Error::InvalidArgument(format!(
            "rho = {rho} is below r_sc = {}",
            cfg.r_sc
        )));
    }
    Ok((-cfg.kappa0 * (r - rho).abs()).exp() * cfg.small_curvature_factor(r))
}

fn firewall_integrand<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
    bc: OuterBc,
    w_en0: T,
    k: usize,
) -> T {
    let e = node_energy(field, spec, &m.location, m.value, bc, k);
    w_en0 * (e.kinetic + e.potential) + e.l2
}

/// `F_0(rho, t)` by direct trapezoid quadrature.
pub fn firewall_f0<T: Real>(
    field: &RadialField<T>,
    rho: T,
    cfg: &FirewallConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
    bc: OuterBc,
) -> Result<T> {
    let g = field.grid;
    let w = trapezoid_weights(&g);
    let mut s = T::zero();
    for k in 0..g.n_nodes {
        s = s + w[k]
            * weight_t_rho_psi0(rho, g.r(k), cfg)?
            * firewall_integrand(field, spec, m, bc, cfg.w_en0, k);
    }
    Ok(s)
}

/// Firewall quantities at every grid node `rho_k >= r_sc`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirewallProfile<T> {
    /// First node index with `r >= r_sc`.
    pub first: usize,
    pub rho: Vec<T>,
    pub f0: Vec<T>,
    /// `int over the escape set of T_rho psi_0`.
    pub escape_measure: Vec<T>,
    /// Exact time derivative of the discrete `F_0`, when `u_t` is supplied.
    pub df0_dt: Option<Vec<T>>,
}

/// `sum_i a_i exp(-kappa |r_i - r_k|)` for every `k`, in linear time.
fn exp_convolve<T: Real>(a: &[T], kappa: T, dr: T) -> Vec<T> {
    let q = (-kappa * dr).exp();
    let n = a.len();
    let mut left = vec![T::zero(); n];
    let mut acc = T::zero();
    for k in 0..n {
        acc = acc * q + a[k];
        left[k] = acc;
    }
    let mut out = vec![T::zero(); n];
    acc = T::zero();
    for k in (0..n).rev() {
        acc = acc * q + a[k];
        out[k] = left[k] + acc - a[k];
    }
    out
}

pub fn firewall_profile<T: Real>(
    field: &RadialField<T>,
    u_t: Option<&[T]>,
    cfg: &FirewallConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
    bc: OuterBc,
) -> FirewallProfile<T> {
    let g = field.grid;
    let n = field.n;
    let w = trapezoid_weights(&g);
    let shape: Vec<T> = (0..g.n_nodes)
        .map(|k| w[k] * cfg.small_curvature_factor(g.r(k)))
        .collect();
    let a: Vec<T> = (0..g.n_nodes)
        .map(|k| shape[k] * firewall_integrand(field, spec, m, bc, cfg.w_en0, k))
        .collect();
    let mut esc_w = vec![T::zero(); g.n_nodes];
    for (lo, hi) in escape_set(field, m, cfg.d_esc) {
        add_interval_weights(&g, lo, hi, &mut esc_w);
    }
    let b: Vec<T> = (0..g.n_nodes)
        .map(|k| esc_w[k] * cfg.small_curvature_factor(g.r(k)))
        .collect();
    let df0_dt = u_t.map(|ut| {
        let mut grad = vec![T::zero(); n];
        let rate: Vec<T> = (0..g.n_nodes)
            .map(|k| {
                let u = field.at(k);
                spec.gradient(u, &mut grad);
                let mut s = T::zero();
                for j in 0..n {
                    let ur = field.du_dr(k, j, bc);
                    let urt = node_derivative(ut, &g, n, k, j, bc);
                    s = s
                        + cfg.w_en0 * (ur * urt + grad[j] * ut[k * n + j])
                        + (u[j] - m.location[j]) * ut[k * n + j];
                }
                shape[k] * s
            })
            .collect();
        exp_convolve(&rate, cfg.kappa0, g.dr)
    });
    let f0 = exp_convolve(&a, cfg.kappa0, g.dr);
    let em = exp_convolve(&b, cfg.kappa0, g.dr);
    let first = (0..g.n_nodes)
        .find(|&k| g.r(k) >= cfg.r_sc)
        .unwrap_or(g.n_nodes);
    FirewallProfile {
        first,
        rho: (first..g.n_nodes).map(|k| g.r(k)).collect(),
        f0: f0[first..].to_vec(),
        escape_measure: em[first..].to_vec(),
        df0_dt: df0_dt.map(|v| v[first..].to_vec()),
    }
}

/// Same stencil as [`RadialField::du_dr`] applied to a nodal array.
fn deviation<T: Real>(field: &RadialField<T>, m: &[T]) -> Vec<T> {
    (0..field.grid.n_nodes)
        .map(|k| dist(field.at(k), m))
        .collect()
}

/// Maximal intervals where `|u(r) - m| > d_esc`, ends linearly interpolated.
pub fn escape_set<T: Real>(field: &RadialField<T>, m: &MinimumPoint<T>, d_esc: T) -> Vec<(T, T)> {
    let g = field.grid;
    let dev = deviation(field, &m.location);
    let cross = |k: usize| {
        // crossing between nodes k and k+1
        let (a, b) = (dev[k], dev[k + 1]);
        g.r(k) + g.dr * ((d_esc - a) / (b - a)).max(T::zero()).min(T::one())
    };
    let mut out = Vec::new();
    let mut k = 0;
    while k < g.n_nodes {
        if dev[k] <= d_esc {
            k += 1;
            continue;
        }
        let start = if k == 0 { T::zero() } else { cross(k - 1) };
        let mut e = k;
        while e + 1 < g.n_nodes && dev[e + 1] > d_esc {
            e += 1;
        }
        let end = if e + 1 == g.n_nodes {
            g.r_max
        } else {
            cross(e)
        };
        out.push((start, end));
        k = e + 1;
    }
    out
}

/// Inner edge of the outer plateau (all nodes beyond it within `d_esc/2`
/// of `m`) plus ten cells; `None` when the last node is not on the plateau.
pub fn r_hom<T: Real>(field: &RadialField<T>, m: &MinimumPoint<T>, d_esc: T) -> Option<T> {
    let g = field.grid;
    let dev = deviation(field, &m.location);
    let half = d_esc / T::lit(2.0);
    if dev[g.n_nodes - 1] > half {
        return None;
    }
    let mut edge = g.n_nodes - 1;
    while edge > 0 && dev[edge - 1] <= half {
        edge -= 1;
    }
    Some((g.r(edge) + T::lit(10.0) * g.dr).min(g.r_max))
}

/// Largest `r <= r_hom` with `|u(r) - m| = d_esc`, or `-inf`.
pub fn escape_point<T: Real>(field: &RadialField<T>, m: &MinimumPoint<T>, d_esc: T, r_hom: T) -> T {
    let g = field.grid;
    let dev = deviation(field, &m.location);
    let top = g.node_below(r_hom);
    // a crossing inside the last partial cell counts only up to r_hom
    let mut k = top.min(g.n_nodes - 1);
    if k + 1 < g.n_nodes && r_hom > g.r(k) {
        let (a, b) = (dev[k], dev[k + 1]);
        if (a - d_esc) * (b - d_esc) <= T::zero() && a != b {
            let r = g.r(k) + g.dr * (d_esc - a) / (b - a);
            if r <= r_hom {
                return r;
            }
        }
    }
    loop {
        if dev[k] == d_esc {
            return g.r(k);
        }
        if k == 0 {
            return T::neg_infinity();
        }
        let (a, b) = (dev[k - 1], dev[k]);
        if (a - d_esc) * (b - d_esc) < T::zero() {
            return g.r(k - 1) + g.dr * (d_esc - a) / (b - a);
        }
        k -= 1;
    }
}

/// No-escape hull; `+inf` for negative arguments.
pub fn hull_noesc<T: Real>(x: T, cfg: &FirewallConfig<T>) -> T {
    let d2 = cfg.delta_esc * cfg.delta_esc;
    if x < T::zero() {
        T::infinity()
    } else if x <= cfg.hull_l {
        d2 / T::lit(2.0) * (T::one() - x / (T::lit(2.0) * cfg.hull_l))
    } else {
        d2 / T::lit(4.0)
    }
}

/// Hull-based escape point: the infimum of the admissible left hull
/// positions `r_l` in `[r_sc, r_hom]`. `None` when even `r_l = r_hom - 1`
/// is not admissible or `r_hom - 1 < r_sc`.
pub fn r_esc_hull<T: Real>(
    profile: &FirewallProfile<T>,
    r_hom: T,
    cfg: &FirewallConfig<T>,
) -> Option<T> {
    let top = r_hom - T::one();
    if top < cfg.r_sc || profile.rho.is_empty() {
        return None;
    }
    let admissible = |r_l: T| {
        profile
            .rho
            .iter()
            .zip(&profile.f0)
            .filter(|(&r, _)| r >= r_l && r <= r_hom)
            .all(|(&r, &f)| f <= hull_noesc(r - r_l, cfg).max(hull_noesc(r_hom - r, cfg)))
    };
    if !admissible(top) {
        return None;
    }
    if admissible(cfg.r_sc) {
        return Some(cfg.r_sc);
    }
    let (mut lo, mut hi) = (cfg.r_sc, top);
    let dr = profile
        .rho
        .get(1)
        .map_or(T::one(), |&r1| r1 - profile.rho[0]);
    while hi - lo > dr * T::lit(1e-6) {
        let mid = (lo + hi) / T::lit(2.0);
        if admissible(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirewallDecayReport<T> {
    pub samples: usize,
    pub min_margin: T,
    /// `(rho, t)` of the smallest margin.
    pub min_margin_at: (T, T),
    /// Largest gap between the difference quotient of `F_0` and the
    /// trapezoid average of its exact time derivative.
    pub max_defect: T,
    /// `(rho, t)` of the largest defect.
    pub max_defect_at: (T, T),
    pub dr: T,
    pub dt_obs: T,
    /// Violation threshold; equals `max_defect` once finished.
    pub slack: T,
    /// `(rho, t, margin)` with `margin < -slack`.
    pub violations: Vec<(T, T, T)>,
    negative: Vec<(T, T, T)>,
}

impl<T: Real> FirewallDecayReport<T> {
    fn empty() -> Self {
        Self {
            samples: 0,
            min_margin: T::infinity(),
            min_margin_at: (T::nan(), T::nan()),
            max_defect: T::zero(),
            max_defect_at: (T::nan(), T::nan()),
            dr: T::zero(),
            dt_obs: T::zero(),
            slack: T::zero(),
            violations: Vec::new(),
            negative: Vec::new(),
        }
    }

    /// `max_defect / (dr^2 + dt_obs^2)`.
    pub fn defect_constant(&self) -> T {
        self.max_defect / (self.dr * self.dr + self.dt_obs * self.dt_obs)
    }

    /// Negative margins, before the slack is applied.
    pub fn negative_margins(&self) -> &[(T, T, T)] {
        &self.negative
    }
}

/// Streaming audit of `dF_0/dt <= -nu_F0 F_0 + K_F0 int_Sigma T`.
///
/// For consecutive profiles at `t` and `t + h` and each sampled node
/// `rho >= r_sc`, the margin is the trapezoid average of the right-hand side
/// minus the difference quotient of `F_0`. The difference quotient is also
/// compared with the trapezoid average of the exact `dF_0/dt`; the largest
/// gap is the measured time-discretization error of the audit and becomes the
/// slack below which negative margins are not counted.
#[derive(Debug, Clone)]
pub struct FirewallDecayAccumulator<T: Real> {
    pub cfg: FirewallConfig<T>,
    pub rho_stride: usize,
    /// Profiles before this time are ignored.
    pub t_from: T,
    prev: Option<(T, FirewallProfile<T>)>,
    report: FirewallDecayReport<T>,
    log: Option<Vec<FirewallSample<T>>>,
}

/// One audited `(rho, t)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirewallSample<T> {
    pub t: T,
    pub rho: T,
    pub f0: T,
    pub escape_measure: T,
    /// `NaN` at the last profile, which has no successor.
    pub margin: T,
}

impl<T: Real> FirewallDecayAccumulator<T> {
    pub fn new(cfg: FirewallConfig<T>, rho_stride: usize) -> Self {
        Self {
            cfg,
            rho_stride: rho_stride.max(1),
            t_from: T::neg_infinity(),
            prev: None,
            report: FirewallDecayReport::empty(),
            log: None,
        }
    }

    /// Keeps every audited sample; see [`FirewallDecayAccumulator::samples`].
    pub fn with_log(mut self) -> Self {
        self.log = Some(Vec::new());
        self
    }

    pub fn from_time(mut self, t: T) -> Self {
        self.t_from = t;
        self
    }

    /// Adds the profile at time `t`; it must carry `df0_dt`.
    pub fn push(&mut self, t: T, dr: T, profile: FirewallProfile<T>) -> Result<()> {
        let db = profile
            .df0_dt
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("firewall decay audit needs dF0/dt".into()))?;
        if t < self.t_from {
            return Ok(());
        }
        self.report.dr = dr;
        if let Some((ta, a)) = &self.prev {
            let (ta, h) = (*ta, t - *ta);
            if h <= T::zero() {
                return Err(Error::InvalidArgument(
                    "firewall decay audit needs increasing times".into(),
                ));
            }
            let r = &mut self.report;
            r.dt_obs = r.dt_obs.max(h);
            let da = a.df0_dt.as_ref().unwrap();
            let (nu, k) = (self.cfg.nu_f0, self.cfg.k_f0);
            let half = T::lit(0.5);
            for i in (0..a.rho.len().min(profile.rho.len())).step_by(self.rho_stride) {
                let lhs = (profile.f0[i] - a.f0[i]) / h;
                let rhs_a = -nu * a.f0[i] + k * a.escape_measure[i];
                let rhs_b = -nu * profile.f0[i] + k * profile.escape_measure[i];
                let margin = half * (rhs_a + rhs_b) - lhs;
                let defect = (lhs - half * (da[i] + db[i])).abs();
                r.samples += 1;
                if defect > r.max_defect {
                    r.max_defect = defect;
                    r.max_defect_at = (a.rho[i], ta);
                }
                if margin < r.min_margin {
                    r.min_margin = margin;
                    r.min_margin_at = (a.rho[i], ta);
                }
                if margin < T::zero() {
                    r.negative.push((a.rho[i], ta, margin));
                }
                if let Some(log) = &mut self.log {
                    log.push(FirewallSample {
                        t: ta,
                        rho: a.rho[i],
                        f0: a.f0[i],
                        escape_measure: a.escape_measure[i],
                        margin,
                    });
                }
            }
        }
        self.prev = Some((t, profile));
        Ok(())
    }

    /// Logged samples in time order, the last profile with `NaN` margins;
    /// empty unless built [`with_log`](FirewallDecayAccumulator::with_log).
    pub fn samples(&self) -> Vec<FirewallSample<T>> {
        let mut out = self.log.clone().unwrap_or_default();
        if let (Some(_), Some((t, p))) = (&self.log, &self.prev) {
            for i in (0..p.rho.len()).step_by(self.rho_stride) {
                out.push(FirewallSample {
                    t: *t,
                    rho: p.rho[i],
                    f0: p.f0[i],
                    escape_measure: p.escape_measure[i],
                    margin: T::nan(),
                });
            }
        }
        out
    }

    pub fn report(&self) -> FirewallDecayReport<T> {
        let mut r = self.report.clone();
        r.slack = r.max_defect;
        r.violations = r
            .negative
            .iter()
            .copied()
            .filter(|v| v.2 < -r.slack)
            .collect();
        r
    }
}

/// [`FirewallDecayAccumulator`] over a stored trajectory.
pub fn audit_firewall_decay<T: Real>(
    traj: &Trajectory<T>,
    rho_stride: usize,
    cfg: &FirewallConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
) -> Result<FirewallDecayReport<T>> {
    let mut acc = FirewallDecayAccumulator::new(*cfg, rho_stride);
    for f in &traj.frames {
        let p = firewall_profile(&f.field, Some(&f.u_t), cfg, spec, m, traj.outer_bc);
        acc.push(f.field.time, f.field.grid.dr, p)?;
    }
    Ok(acc.report())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EscapeImplicationReport<T> {
    pub samples: usize,
    /// Samples with `F_0 <= delta_esc^2`.
    pub premises: usize,
    /// `(rho, t, |u - m|)` where the premise held but the conclusion failed.
    pub counterexamples: Vec<(T, T, T)>,
}

/// Checks `F_0(rho, t) <= delta_esc^2 => |u(rho, t) - m| <= d_esc` at every
/// node `rho >= r_sc` of every frame.
pub fn audit_escape_implication<T: Real>(
    traj: &Trajectory<T>,
    cfg: &FirewallConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
) -> EscapeImplicationReport<T> {
    let mut rep = EscapeImplicationReport {
        samples: 0,
        premises: 0,
        counterexamples: Vec::new(),
    };
    let d2 = cfg.delta_esc * cfg.delta_esc;
    for f in &traj.frames {
        let p = firewall_profile(&f.field, None, cfg, spec, m, traj.outer_bc);
        for (i, (&rho, &f0)) in p.rho.iter().zip(&p.f0).enumerate() {
            rep.samples += 1;
            if f0 > d2 {
                continue;
            }
            rep.premises += 1;
            let dev = dist(f.field.at(p.first + i), &m.location);
            if dev > cfg.d_esc {
                rep.counterexamples.push((rho, f.field.time, dev));
            }
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvasionBoundReport<T> {
    pub pairs: usize,
    /// Pairs whose earlier position is the empty-set sentinel.
    pub skipped: usize,
    /// Largest `r(t+s) - r(t) - c_noesc s`.
    pub max_excess: T,
    pub violations: Vec<(T, T)>,
}

/// Checks `r(t+s) - r(t) <= c_noesc s` over all ordered sample pairs.
pub fn audit_invasion_bound<T: Real>(
    times: &[T],
    positions: &[T],
    c_noesc: T,
) -> InvasionBoundReport<T> {
    let mut rep = InvasionBoundReport {
        pairs: 0,
        skipped: 0,
        max_excess: T::neg_infinity(),
        violations: Vec::new(),
    };
    for i in 0..times.len() {
        for j in i + 1..times.len() {
            let (a, b) = (positions[i], positions[j]);
            if b == T::neg_infinity() {
                rep.pairs += 1;
                continue;
            }
            if !a.is_finite() || !b.is_finite() {
                rep.skipped += 1;
                continue;
            }
            rep.pairs += 1;
            let excess = b - a - c_noesc * (times[j] - times[i]);
            rep.max_excess = rep.max_excess.max(excess);
            if excess > T::zero() {
                rep.violations.push((times[i], times[j]));
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::observers::Frame;
    use crate::potential::{analyze, ScalarPolynomial, SearchBox};
    use crate::radial::RadialGrid;

    fn setup(
        d: usize,
    ) -> (
        ScalarPolynomial<f64>,
        PotentialAnalysis<f64>,
        FirewallConfig<f64>,
    ) {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &SearchBox::cube(1, -2.0, 3.0).unwrap(), 41).unwrap();
        let fw = FirewallConfig::new(&a, d).unwrap();
        (v, a, fw)
    }

    fn ramp_field(d: usize) -> RadialField<f64> {
        let g = RadialGrid::with_spacing(150.0, 0.1, d).unwrap();
        let mut f = RadialField::constant(g, &[0.0], 0.0);
        for k in 0..g.n_nodes {
            f.values[k] = 1.0 / (1.0 + ((g.r(k) - 90.0) / 2.0f64).exp());
        }
        f
    }

    #[test]
    fn cubic_constants_in_three_dimensions() {
        let (_, _, fw) = setup(3);
        assert_eq!(fw.kappa0, 0.03125);
        assert_eq!(fw.r_sc, 64.0);
        assert!((fw.curvature_bound() - 2.0 / 64.0).abs() < 1e-15);
        let (_, _, fw1) = setup(1);
        assert_eq!(fw1.r_sc, 0.0);
        assert_eq!(fw1.curvature_bound(), 0.0);
    }

    #[test]
    fn weight_is_continuous_at_r_sc_and_rejects_small_rho() {
        let (_, _, fw) = setup(3);
        let rho = 80.0;
        let a = weight_t_rho_psi0(rho, fw.r_sc - 1e-9, &fw).unwrap();
        let b = weight_t_rho_psi0(rho, fw.r_sc + 1e-9, &fw).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert_eq!(weight_t_rho_psi0(rho, rho, &fw).unwrap(), 1.0);
        assert!(weight_t_rho_psi0(10.0, 5.0, &fw).is_err());
    }

    #[test]
    fn profile_matches_direct_quadrature() {
        let (v, a, fw) = setup(3);
        let f = ramp_field(3);
        let m = a.nearest(&[0.0]).unwrap();
        let p = firewall_profile(&f, None, &fw, &v, m, OuterBc::NeumannZero);
        for i in [0, 100, 263, p.rho.len() - 1] {
            let direct = firewall_f0(&f, p.rho[i], &fw, &v, m, OuterBc::NeumannZero).unwrap();
            assert!(
                (direct - p.f0[i]).abs() <= 1e-10 * direct.abs().max(1.0),
                "rho = {}",
                p.rho[i]
            );
        }
    }

    #[test]
    fn homogeneous_state_has_zero_firewall_and_no_escape() {
        let (v, a, fw) = setup(3);
        let g = RadialGrid::with_spacing(120.0, 0.1, 3).unwrap();
        let f = RadialField::constant(g, &[0.0], 0.0);
        let m = a.nearest(&[0.0]).unwrap();
        let p = firewall_profile(
            &f,
            Some(&vec![0.0; g.n_nodes]),
            &fw,
            &v,
            m,
            OuterBc::NeumannZero,
        );
        assert!(p.f0.iter().all(|&x| x == 0.0));
        assert!(p.escape_measure.iter().all(|&x| x == 0.0));
        assert!(escape_set(&f, m, fw.d_esc).is_empty());
        let h = r_hom(&f, m, fw.d_esc).unwrap();
        assert_eq!(escape_point(&f, m, fw.d_esc, h), f64::NEG_INFINITY);
        assert!(h < fw.r_sc);
        assert_eq!(r_esc_hull(&p, h, &fw), None);
        assert_eq!(r_esc_hull(&p, 100.0, &fw), Some(fw.r_sc));
    }

    #[test]
    fn escape_point_and_set_locate_the_interface() {
        let (_, a, fw) = setup(3);
        let f = ramp_field(3);
        let m = a.nearest(&[0.0]).unwrap();
        let d = fw.d_esc;
        let exact = 90.0 + 2.0 * (1.0 / d - 1.0).ln();
        let h = r_hom(&f, m, d).unwrap();
        let r = escape_point(&f, m, d, h);
        assert!((r - exact).abs() < 1e-3, "{r} vs {exact}");
        let set = escape_set(&f, m, d);
        assert_eq!(set.len(), 1);
        assert_eq!(set[0].0, 0.0);
        assert!((set[0].1 - exact).abs() < 1e-3);
        assert!(h > exact && h < exact + 5.0);
    }

    #[test]
    fn r_hom_requires_outer_plateau() {
        let (_, a, fw) = setup(3);
        let g = RadialGrid::with_spacing(50.0, 0.1, 3).unwrap();
        let f = RadialField::constant(g, &[1.0], 0.0);
        assert!(r_hom(&f, a.nearest(&[0.0]).unwrap(), fw.d_esc).is_none());
    }

    #[test]
    fn hull_junctions() {
        let (_, _, fw) = setup(3);
        let d2 = fw.delta_esc * fw.delta_esc;
        assert_eq!(hull_noesc(-1.0, &fw), f64::INFINITY);
        assert!((hull_noesc(0.0, &fw) - d2 / 2.0).abs() < 1e-18);
        assert!((hull_noesc(fw.hull_l, &fw) - d2 / 4.0).abs() < 1e-18);
        assert_eq!(hull_noesc(2.0 * fw.hull_l, &fw), d2 / 4.0);
    }

    #[test]
    fn invasion_bound_counts_violations() {
        let t = [0.0, 1.0, 2.0, 3.0];
        let r = [f64::NEG_INFINITY, 1.0, 1.5, 4.0];
        let rep = audit_invasion_bound(&t, &r, 1.0);
        assert_eq!(rep.skipped, 3);
        assert_eq!(rep.pairs, 3);
        assert_eq!(rep.violations, vec![(1.0, 3.0), (2.0, 3.0)]);
        assert!((rep.max_excess - 1.5).abs() < 1e-15);
    }

    #[test]
    fn escape_implication_holds_on_a_front() {
        let (v, a, fw) = setup(3);
        let f = ramp_field(3);
        let traj = Trajectory {
            outer_bc: OuterBc::NeumannZero,
            frames: vec![Frame {
                u_t: vec![0.0; f.values.len()],
                field: f,
            }],
        };
        let rep = audit_escape_implication(&traj, &fw, &v, a.nearest(&[0.0]).unwrap());
        assert!(rep.samples > 0);
        assert!(rep.counterexamples.is_empty());
    }
}
