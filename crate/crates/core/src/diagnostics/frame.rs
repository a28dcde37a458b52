use super::firewall::FirewallConfig;
use super::observers::Trajectory;
use super::quadrature::trapezoid_weights;
use crate::error::{Error, Result};
use crate::potential::{MinimumPoint, Potential};
use crate::scalar::Real;

/// Constants and placement of the travelling-frame weights `chi`, `psi`.
///
/// The frame is `v(rho, s) = u(r_init + c s + rho, t_init + s)`; the cutoff
/// point sits at `X(s) = xi_cut + c_cut s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TravelingFrameConfig<T> {
    pub c: T,
    pub kappa: T,
    pub c_cut: T,
    pub w_en: T,
    pub r_init: T,
    pub t_init: T,
    pub xi_cut: T,
    pub r_sc: T,
    pub d: usize,
    pub lambda_min: T,
    pub lambda_max: T,
}

impl<T: Real> TravelingFrameConfig<T> {
    pub fn new(fw: &FirewallConfig<T>, c: T, r_init: T, t_init: T, xi_cut: T) -> Result<Self> {
        if !(c >= T::zero()) {
            return Err(Error::InvalidArgument(
                "frame speed must be nonnegative".into(),
            ));
        }
        let one = T::one();
        let cn1 = fw.c_noesc + one;
        let cfg = Self {
            c,
            kappa: T::lit(0.25).min(fw.lambda_min / (T::lit(16.0) * cn1)),
            c_cut: (fw.lambda_min / (T::lit(8.0) * fw.lambda_max))
                .min(fw.lambda_min / (T::lit(8.0) * cn1)),
            w_en: fw.w_en0.min(one / (cn1 * cn1)),
            r_init,
            t_init,
            xi_cut,
            r_sc: fw.r_sc,
            d: fw.d,
            lambda_min: fw.lambda_min,
            lambda_max: fw.lambda_max,
        };
        cfg.check()?;
        Ok(cfg)
    }

    /// The four relaxation-scheme inequalities for the actual speed `c`.
    pub fn check(&self) -> Result<()> {
        let (c, k, cc, w) = (self.c, self.kappa, self.c_cut, self.w_en);
        let eighth = T::lit(0.125);
        let slack = T::one() + T::tol(1e-12);
        let half = T::lit(0.5);
        let checks = [
            (
                cc * (c + k) * w * half,
                eighth,
                "c_cut (c + kappa) w_en / 2 <= 1/8",
            ),
            (
                w * (c + k + half) * (c + k + half) / T::lit(4.0),
                eighth,
                "w_en (c + kappa + 1/2)^2 / 4 <= 1/8",
            ),
            (
                w * cc * (c + k),
                self.lambda_min / (T::lit(8.0) * self.lambda_max),
                "w_en c_cut (c + kappa) <= lambda_min / (8 lambda_max)",
            ),
            (
                (cc + k) * (c + k) * half,
                self.lambda_min / T::lit(16.0),
                "(c_cut + kappa)(c + kappa)/2 <= lambda_min/16",
            ),
        ];
        for (lhs, rhs, what) in checks {
            if lhs > rhs * slack {
                return Err(Error::Constraint(format!(
                    "{what} fails for c = {c}: {lhs} > {rhs}"
                )));
            }
        }
        Ok(())
    }

    fn origin(&self, s: T) -> T {
        self.r_init + self.c * s
    }

    pub fn cutoff(&self, s: T) -> T {
        self.xi_cut + self.c_cut * s
    }

    fn curvature(&self, r: T) -> T {
        if self.d == 1 {
            T::one()
        } else {
            (r / self.r_sc).powi(self.d as i32 - 1)
        }
    }

    fn region(&self, rho: T, s: T) -> Region {
        if rho > self.cutoff(s) {
            Region::Right
        } else if self.d > 1 && self.origin(s) + rho <= self.r_sc {
            Region::Left
        } else {
            Region::Main
        }
    }

    /// Energy weight `chi(rho, s)`.
    pub fn chi(&self, rho: T, s: T) -> T {
        let x = self.cutoff(s);
        match self.region(rho, s) {
            Region::Left => (self.c * rho).exp() * self.curvature(self.origin(s) + rho),
            Region::Main => (self.c * rho).exp(),
            Region::Right => ((self.c + self.kappa) * x - self.kappa * rho).exp(),
        }
    }

    /// Firewall weight `psi(rho, s)`.
    pub fn psi(&self, rho: T, s: T) -> T {
        let x = self.cutoff(s);
        match self.region(rho, s) {
            Region::Left => {
                ((self.c + self.kappa) * rho - self.kappa * x).exp()
                    * self.curvature(self.origin(s) + rho)
            }
            Region::Main => ((self.c + self.kappa) * rho - self.kappa * x).exp(),
            Region::Right => self.chi(rho, s),
        }
    }

    /// `chi_rho(rho, s)`.
    pub fn chi_rho(&self, rho: T, s: T) -> T {
        let chi = self.chi(rho, s);
        match self.region(rho, s) {
            Region::Left => (self.c + T::of_usize(self.d - 1) / (self.origin(s) + rho)) * chi,
            Region::Main => self.c * chi,
            Region::Right => -self.kappa * chi,
        }
    }

    /// `(d-1)/r chi + c chi - chi_rho`, the factor of the pollution term.
    pub fn pollution_factor(&self, rho: T, s: T) -> T {
        let chi = self.chi(rho, s);
        let curv = if self.d == 1 {
            T::zero()
        } else {
            T::of_usize(self.d - 1) / (self.origin(s) + rho)
        };
        match self.region(rho, s) {
            Region::Left => T::zero(),
            Region::Main => curv * chi,
            Region::Right => (self.c + self.kappa + curv) * chi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Region {
    Left,
    Main,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameSample<T> {
    pub s: T,
    /// `int chi (v_rho^2/2 + V(v) - V(m))`
    pub energy: T,
    /// `int chi |v_s|^2`
    pub dissipation: T,
    /// `int psi (w_en (v_rho^2/2 + V(v) - V(m)) + |v - m|^2/2)`
    pub firewall: T,
}

/// Travelling-frame energy, dissipation and firewall for every frame at or
/// after `t_init`, integrated on the laboratory grid (`rho = r - r_init - c s`).
pub fn traveling_frame_series<T: Real>(
    traj: &Trajectory<T>,
    cfg: &TravelingFrameConfig<T>,
    spec: &dyn Potential<T>,
    m: &MinimumPoint<T>,
) -> Vec<FrameSample<T>> {
    let half = T::lit(0.5);
    let bc = traj.outer_bc;
    let mut out = Vec::new();
    for f in traj.frames.iter().filter(|f| f.field.time >= cfg.t_init) {
        let field = &f.field;
        let g = field.grid;
        let w = trapezoid_weights(&g);
        let s = field.time - cfg.t_init;
        let base = cfg.origin(s);
        let (mut e, mut d, mut fw) = (T::zero(), T::zero(), T::zero());
        for k in 0..g.n_nodes {
            let rho = g.r(k) - base;
            let u = field.at(k);
            let (mut ur2, mut vs2, mut l2) = (T::zero(), T::zero(), T::zero());
            for j in 0..field.n {
                let ur = field.du_dr(k, j, bc);
                let vs = f.u_t[k * field.n + j] + cfg.c * ur;
                let dv = u[j] - m.location[j];
                ur2 = ur2 + ur * ur;
                vs2 = vs2 + vs * vs;
                l2 = l2 + dv * dv;
            }
            let en = ur2 * half + spec.value(u) - m.value;
            let chi = cfg.chi(rho, s);
            e = e + w[k] * chi * en;
            d = d + w[k] * chi * vs2;
            fw = fw + w[k] * cfg.psi(rho, s) * (cfg.w_en * en + l2 * half);
        }
        out.push(FrameSample {
            s,
            energy: e,
            dissipation: d,
            firewall: fw,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(d: usize) -> TravelingFrameConfig<f64> {
        TravelingFrameConfig {
            c: 0.3,
            kappa: 0.01,
            c_cut: 0.002,
            w_en: 0.5,
            r_init: 50.0,
            t_init: 0.0,
            xi_cut: 10.0,
            r_sc: 20.0,
            d,
            lambda_min: 0.25,
            lambda_max: 1.0,
        }
    }

    #[test]
    fn weights_are_continuous_at_region_boundaries() {
        for d in [1, 3] {
            let c = cfg(d);
            let s = 5.0;
            let x = c.cutoff(s);
            let eps = 1e-9;
            assert!((c.chi(x - eps, s) - c.chi(x + eps, s)).abs() < 1e-6 * c.chi(x, s));
            assert!((c.psi(x - eps, s) - c.psi(x + eps, s)).abs() < 1e-6 * c.psi(x, s));
            let left = c.r_sc - c.origin(s);
            assert!((c.chi(left - eps, s) - c.chi(left + eps, s)).abs() < 1e-6 * c.chi(left, s));
        }
    }

    #[test]
    fn chi_rho_matches_finite_difference() {
        let c = cfg(3);
        let s = 2.0;
        for rho in [-45.0, -10.0, 3.0, 25.0] {
            let h = 1e-5;
            let fd = (c.chi(rho + h, s) - c.chi(rho - h, s)) / (2.0 * h);
            assert!(
                (fd - c.chi_rho(rho, s)).abs() < 1e-6 * c.chi(rho, s).max(1.0),
                "rho = {rho}"
            );
        }
    }

    #[test]
    fn pollution_factor_vanishes_left() {
        let c = cfg(3);
        assert_eq!(c.pollution_factor(-40.0, 0.0), 0.0);
        let r = c.origin(0.0) + 3.0;
        assert!((c.pollution_factor(3.0, 0.0) - 2.0 / r * c.chi(3.0, 0.0)).abs() < 1e-12);
    }
}
