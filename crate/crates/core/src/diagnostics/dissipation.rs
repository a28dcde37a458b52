use super::energy::weighted_energy;
use super::observers::Trajectory;
use super::quadrature::interval_weights;
use crate::error::{Error, Result};
use crate::potential::{MinimumPoint, Potential};
use crate::radial::{OuterBc, RadialField};
use crate::scalar::Real;

/// `int_0^{c t} r^(d-1) (u_r^2/2 + V(u) - V(m)) dr`.
pub fn residual_energy<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    c: T,
    m: &MinimumPoint<T>,
    bc: OuterBc,
) -> Result<T> {
    let g = field.grid;
    let top = c * field.time;
    if top > g.r_max * (T::one() + T::tol(1e-12)) {
        return Err(Error::WindowExceedsDomain);
    }
    Ok(weighted_energy(
        field,
        spec,
        m.value,
        bc,
        |r| g.jacobian(r),
        (T::zero(), top),
    ))
}

/// `int_{-1}^{1} int_{-1/eps}^{1/eps} (u_t + c u_r)^2 (r_esc + rho, t + tau)`
/// as a function of `eps`, with the integrand precomputed per frame.
struct WindowIntegral<T> {
    times: Vec<T>,
    /// Per frame: the integrand at every node.
    rows: Vec<Vec<T>>,
    grid: crate::radial::RadialGrid<T>,
    center: T,
}

impl<T: Real> WindowIntegral<T> {
    fn value(&self, eps: T) -> T {
        let half = T::one() / eps;
        let w = interval_weights(&self.grid, self.center - half, self.center + half);
        let inner: Vec<T> = self
            .rows
            .iter()
            .map(|row| row.iter().zip(&w).map(|(&f, &wk)| f * wk).sum())
            .collect();
        let mut s = T::zero();
        for i in 1..self.times.len() {
            s = s + (self.times[i] - self.times[i - 1]) * (inner[i] + inner[i - 1]) / T::lit(2.0);
        }
        s
    }
}

/// `delta_Dissip(t)` for a given escape point: the root of
/// `g(eps) = I(eps) - eps`, where `I` is the space-time dissipation over
/// `[r_esc - 1/eps, r_esc + 1/eps] x [t - 1, t + 1]` (clipped to the grid
/// and to the recorded frames). The infimum convention is used: `0` when the
/// integrand vanishes identically. Returns NaN when `r_esc` is not finite or
/// fewer than two frames fall in the window.
pub fn delta_dissip_at<T: Real>(traj: &Trajectory<T>, r_esc: T, c: T, t: T) -> T {
    if !r_esc.is_finite() {
        return T::nan();
    }
    let frames: Vec<_> = traj
        .frames
        .iter()
        .filter(|f| f.field.time >= t - T::one() && f.field.time <= t + T::one())
        .collect();
    if frames.len() < 2 {
        return T::nan();
    }
    let grid = frames[0].field.grid;
    let rows = frames
        .iter()
        .map(|f| {
            let n = f.field.n;
            (0..grid.n_nodes)
                .map(|k| {
                    (0..n)
                        .map(|j| {
                            let v = f.u_t[k * n + j] + c * f.field.du_dr(k, j, traj.outer_bc);
                            v * v
                        })
                        .sum()
                })
                .collect()
        })
        .collect();
    let wi = WindowIntegral {
        times: frames.iter().map(|f| f.field.time).collect(),
        rows,
        grid,
        center: r_esc,
    };
    // the whole grid is covered once 1/eps exceeds r_max
    let total = wi.value(T::one() / (grid.r_max * T::lit(2.0) + T::one()));
    if !(total > T::zero()) {
        return T::zero();
    }
    let (mut lo, mut hi) = (T::zero(), total + T::one());
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if wi.value(mid) - mid > T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::tol(1e-12) * hi {
            break;
        }
    }
    hi
}

/// `(t, delta_Dissip(t))` at every tracked time whose window `[t-1, t+1]`
/// lies inside the recorded frames.
pub fn delta_dissip<T: Real>(traj: &Trajectory<T>, times: &[T], r_esc: &[T], c: T) -> Vec<(T, T)> {
    let (Some(first), Some(last)) = (traj.frames.first(), traj.frames.last()) else {
        return Vec::new();
    };
    let (t0, t1) = (first.field.time, last.field.time);
    times
        .iter()
        .zip(r_esc)
        .filter(|(&t, _)| t - T::one() >= t0 && t + T::one() <= t1)
        .map(|(&t, &r)| (t, delta_dissip_at(traj, r, c, t)))
        .collect()
}

/// Linear interpolation of a series sorted by time; `None` outside its range.
fn interpolate<T: Real>(series: &[(T, T)], t: T) -> Option<T> {
    let j = series.partition_point(|p| p.0 < t);
    if j == series.len() {
        return None;
    }
    if series[j].0 == t {
        return Some(series[j].1);
    }
    if j == 0 {
        return None;
    }
    let (a, b) = (series[j - 1], series[j]);
    Some(a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0))
}

/// `|E(2t) - E(t)|` at every sample `t > 0` whose double lies in the series.
pub fn doubling_gaps<T: Real>(series: &[(T, T)]) -> Vec<(T, T)> {
    series
        .iter()
        .filter(|p| p.0 > T::zero())
        .filter_map(|&(t, e)| interpolate(series, t + t).map(|e2| (t, (e2 - e).abs())))
        .collect()
}

/// Smallest sampled `t` from which every doubling gap is at most `tol`.
pub fn cauchy_time<T: Real>(series: &[(T, T)], tol: T) -> Option<T> {
    let gaps = doubling_gaps(series);
    let mut first = None;
    for &(t, g) in gaps.iter().rev() {
        if !(g <= tol) {
            break;
        }
        first = Some(t);
    }
    first
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::observers::Frame;
    use crate::potential::{analyze, ScalarPolynomial, SearchBox};
    use crate::radial::RadialGrid;

    fn synthetic(kappa: f64) -> Trajectory<f64> {
        let g = RadialGrid::with_spacing(100.0, 0.05, 3).unwrap();
        let frames = (0..=40)
            .map(|i| Frame {
                field: RadialField::constant(g, &[0.0], 9.0 + 0.05 * i as f64),
                u_t: vec![kappa; g.n_nodes],
            })
            .collect();
        Trajectory {
            outer_bc: OuterBc::NeumannZero,
            frames,
        }
    }

    #[test]
    fn constant_integrand_has_closed_form_root() {
        for kappa in [0.5, 0.2] {
            let traj = synthetic(kappa);
            let d = delta_dissip_at(&traj, 50.0, 0.3, 10.0);
            assert!((d - 2.0 * kappa).abs() < 1e-9, "{d}");
        }
    }

    #[test]
    fn vanishing_integrand_gives_zero() {
        let traj = synthetic(0.0);
        assert_eq!(delta_dissip_at(&traj, 50.0, 0.3, 10.0), 0.0);
        assert!(delta_dissip_at(&traj, f64::NEG_INFINITY, 0.3, 10.0).is_nan());
        let series = delta_dissip(&traj, &[9.0, 10.0, 11.0], &[50.0; 3], 0.3);
        assert_eq!(series, vec![(10.0, 0.0)]);
    }

    #[test]
    fn residual_energy_of_constant_states() {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &SearchBox::cube(1, -2.0, 3.0).unwrap(), 41).unwrap();
        let m0 = a.nearest(&[0.0]).unwrap();
        let m1 = a.nearest(&[1.0]).unwrap();
        let g = RadialGrid::with_spacing(40.0, 0.1, 3).unwrap();
        let f = RadialField::constant(g, &[0.0], 20.0);
        assert_eq!(
            residual_energy(&f, &v, 0.5, m0, OuterBc::NeumannZero).unwrap(),
            0.0
        );
        let f1 = RadialField::constant(g, &[1.0], 20.0);
        let e = residual_energy(&f1, &v, 0.5, m0, OuterBc::NeumannZero).unwrap();
        let exact = (m1.value - m0.value) * 10f64.powi(3) / 3.0;
        assert!((e - exact).abs() < 1e-3 * exact.abs(), "{e} vs {exact}");
        assert!(matches!(
            residual_energy(&f, &v, 3.0, m0, OuterBc::NeumannZero),
            Err(Error::WindowExceedsDomain)
        ));
    }

    #[test]
    fn cauchy_time_of_exponential_decay() {
        let series: Vec<(f64, f64)> = (0..=400)
            .map(|i| (i as f64, 2.0 + (-(i as f64) / 10.0).exp()))
            .collect();
        // |E(2t) - E(t)| = e^{-t/10} (1 - e^{-t/10}) falls below 1e-3 once t > 10 ln(1000) (about 69.07).
        assert_eq!(cauchy_time(&series, 1e-3), Some(70.0));
        let gaps = doubling_gaps(&series);
        assert_eq!(gaps.last().unwrap().0, 200.0);
        assert!(cauchy_time(&series, 0.0).is_none());
    }
}
