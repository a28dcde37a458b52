use super::firewall::escape_set;
use super::observers::Trajectory;
use super::quadrature::{add_interval_weights, trapezoid_weights};
use crate::error::{Error, Result};
use crate::potential::{ball_sup, MinimumPoint, Potential, PotentialAnalysis};
use crate::scalar::{dot, Real};

/// Standing-frame weights `chi~`, `psi~` and the rates of the relaxation
/// scheme behind the terrace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingFrameConfig<T> {
    pub kappa: T,
    pub c_cut: T,
    pub c_left: T,
    pub c_right: T,
    pub c_hom: T,
    pub w_en0: T,
    pub nu_f0: T,
    /// Pollution rate of the firewall.
    pub k_f: T,
    /// Rate in `E' <= -D/2 + K_ER F`.
    pub k_er: T,
    pub d_esc: T,
    pub d: usize,
}

impl<T: Real> StandingFrameConfig<T> {
    pub fn new(
        spec: &dyn Potential<T>,
        analysis: &PotentialAnalysis<T>,
        d: usize,
        c_hom: T,
        c_cut: T,
        c_left: T,
        c_right: T,
    ) -> Result<Self> {
        if !(c_hom > T::zero()) {
            return Err(Error::InvalidArgument("c_hom must be positive".into()));
        }
        if !(T::zero() < c_left && c_left <= c_cut && c_cut <= c_right && c_cut < c_hom) {
            return Err(Error::Constraint(
                "0 < c_left <= c_cut <= c_right and c_cut < c_hom".into(),
            ));
        }
        let (lmin, lmax, w) = (analysis.lambda_min, analysis.lambda_max, analysis.w_en0);
        let kappa = T::lit(0.5)
            .min(lmin / (T::lit(8.0) * lmax * c_hom))
            .min(lmin / (T::lit(4.0) * (T::one() + c_hom)));
        let nu = analysis.nu_f0;
        let eighth = lmin / (T::lit(8.0) * lmax);
        let half = T::lit(0.5);
        let k_f = ball_sup(spec, &analysis.minima, analysis.r_att, |u, m| {
            let v: Vec<T> = u.iter().zip(&m.location).map(|(&a, &b)| a - b).collect();
            let v2 = dot(&v, &v);
            let dv = spec.value(u) - m.value;
            nu * (w * dv + v2 * half) - dot(&v, &spec.gradient_vec(u))
                + eighth * dv.abs()
                + lmin / T::lit(8.0) * v2
        })
        .max(T::zero());
        let cfg = Self {
            kappa,
            c_cut,
            c_left,
            c_right,
            c_hom,
            w_en0: w,
            nu_f0: nu,
            k_f,
            k_er: kappa * (c_cut + kappa) / w,
            d_esc: analysis.d_esc,
            d,
        };
        let slack = T::one() + T::tol(1e-12);
        let (k, c) = (kappa, c_cut);
        if k * c * w + w * k * k + k > slack {
            return Err(Error::Constraint(
                "kappa c_cut w + w kappa^2 + kappa <= 1".into(),
            ));
        }
        if k * c * w > eighth * slack {
            return Err(Error::Constraint(
                "kappa c_cut w <= lambda_min / (8 lambda_max)".into(),
            ));
        }
        if k * c + k > lmin / T::lit(4.0) * slack {
            return Err(Error::Constraint(
                "kappa c_cut + kappa <= lambda_min / 4".into(),
            ));
        }
        Ok(cfg)
    }

    fn jac(&self, r: T) -> T {
        r.powi(self.d as i32 - 1)
    }

    pub fn chi(&self, r: T, t: T) -> T {
        let x = self.c_cut * t;
        if r <= x {
            self.jac(r)
        } else {
            self.jac(r) * (-self.kappa * (r - x)).exp()
        }
    }

    pub fn psi(&self, r: T, t: T) -> T {
        let (a, b) = (self.c_left * t, self.c_right * t);
        if r < a {
            self.jac(r) * (-self.kappa * (a - r)).exp()
        } else if r <= b {
            self.jac(r)
        } else {
            self.jac(r) * (-self.kappa * (r - b)).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandingSample<T> {
    pub t: T,
    pub energy: T,
    pub dissipation: T,
    pub firewall: T,
    /// `int over the escape set of psi~`.
    pub pollution: T,
}

/// Standing-frame energy, dissipation, firewall and pollution measure of
/// every frame with `t > 0`, relative to the minimum `m`.
pub fn standing_frame_series<T: Real>(
    traj: &Trajectory<T>,
    cfg: &StandingFrameConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
) -> Vec<StandingSample<T>> {
    let half = T::lit(0.5);
    let bc = traj.outer_bc;
    let mut out = Vec::new();
    for f in traj.frames.iter().filter(|f| f.field.time > T::zero()) {
        let field = &f.field;
        let t = field.time;
        let g = field.grid;
        let w = trapezoid_weights(&g);
        let mut esc = vec![T::zero(); g.n_nodes];
        for (a, b) in escape_set(field, m, cfg.d_esc) {
            add_interval_weights(&g, a, b, &mut esc);
        }
        let mut s = StandingSample {
            t,
            energy: T::zero(),
            dissipation: T::zero(),
            firewall: T::zero(),
            pollution: T::zero(),
        };
        for k in 0..g.n_nodes {
            let r = g.r(k);
            let u = field.at(k);
            let (mut ur2, mut ut2, mut l2) = (T::zero(), T::zero(), T::zero());
            for j in 0..field.n {
                let ur = field.du_dr(k, j, bc);
                let ut = f.u_t[k * field.n + j];
                let dv = u[j] - m.location[j];
                ur2 = ur2 + ur * ur;
                ut2 = ut2 + ut * ut;
                l2 = l2 + dv * dv;
            }
            let en = ur2 * half + spec.value(u) - m.value;
            let (chi, psi) = (cfg.chi(r, t), cfg.psi(r, t));
            s.energy = s.energy + w[k] * chi * en;
            s.dissipation = s.dissipation + w[k] * chi * ut2;
            s.firewall = s.firewall + w[k] * psi * (cfg.w_en0 * en + l2 * half);
            s.pollution = s.pollution + esc[k] * psi;
        }
        out.push(s);
    }
    out
}

/// Margins of `E' <= -D/2 + K_ER F` and `F' <= -nu F + K_F G` between
/// consecutive samples, right-hand sides averaged: `(t_mid, energy, firewall)`.
pub fn standing_frame_margins<T: Real>(
    samples: &[StandingSample<T>],
    cfg: &StandingFrameConfig<T>,
) -> Vec<(T, T, T)> {
    let half = T::lit(0.5);
    samples
        .windows(2)
        .map(|p| {
            let (a, b) = (&p[0], &p[1]);
            let h = b.t - a.t;
            let rhs_e = |s: &StandingSample<T>| -s.dissipation * half + cfg.k_er * s.firewall;
            let rhs_f = |s: &StandingSample<T>| -cfg.nu_f0 * s.firewall + cfg.k_f * s.pollution;
            (
                (a.t + b.t) * half,
                (rhs_e(a) + rhs_e(b)) * half - (b.energy - a.energy) / h,
                (rhs_f(a) + rhs_f(b)) * half - (b.firewall - a.firewall) / h,
            )
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{analyze, ScalarPolynomial, SearchBox};

    #[test]
    fn psi_pollution_factor_matches_piecewise_formula() {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &SearchBox::cube(1, -2.0, 3.0).unwrap(), 41).unwrap();
        let cfg = StandingFrameConfig::new(&v, &a, 3, 0.3, 0.1, 0.05, 0.2).unwrap();
        let t = 100.0;
        let h = 1e-4;
        for (r, expect) in [(2.0f64, -cfg.kappa), (12.0, 0.0), (30.0, cfg.kappa)] {
            let psi = cfg.psi(r, t);
            let dpsi = (cfg.psi(r + h, t) - cfg.psi(r - h, t)) / (2.0 * h);
            let lhs = 2.0 / r * psi - dpsi;
            assert!((lhs - expect * psi).abs() < 1e-6 * psi, "r = {r}");
        }
        for r in [5.0f64, 10.0, 20.0] {
            assert!((cfg.psi(r - 1e-12, t) - cfg.psi(r + 1e-12, t)).abs() < 1e-9 * cfg.psi(r, t));
        }
        assert!(cfg.k_f >= 0.0);
    }

    #[test]
    fn rejects_unordered_speeds() {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &SearchBox::cube(1, -2.0, 3.0).unwrap(), 41).unwrap();
        assert!(StandingFrameConfig::new(&v, &a, 3, 0.3, 0.4, 0.05, 0.5).is_err());
        assert!(StandingFrameConfig::new(&v, &a, 3, 0.3, 0.1, 0.2, 0.3).is_err());
    }
}
