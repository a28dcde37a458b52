use serde::{Deserialize, Serialize};

use super::{MinimumPoint, Potential, SearchBox};
use crate::error::{Error, Result};
use crate::linalg::{solve, symmetric_eigenvalues};
use crate::scalar::{dist, dot, norm, Real};

/// Constants derived from the potential and used throughout the diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialAnalysis<T> {
    pub minima: Vec<MinimumPoint<T>>,
    pub lambda_min: T,
    pub lambda_max: T,
    pub d_esc: T,
    pub q_low_hull: T,
    pub w_en0: T,
    pub eps_v: T,
    pub c_v: T,
    pub r_att: T,
    pub nu_f0: T,
    pub k_f0: T,
}

/// `(eps_v, c_v, r_att)` from `u . grad V(u) >= eps_v |u|^2 - c_v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoercivityConstants<T> {
    pub eps_v: T,
    pub c_v: T,
    pub r_att: T,
}

const NEWTON_MAX_ITER: usize = 100;
const DEGENERACY: f64 = 1e-8;

fn newton_critical_point<T: Real>(
    spec: &dyn Potential<T>,
    seed: &[T],
    fence: &SearchBox<T>,
) -> Option<Vec<T>> {
    let tol = T::tol(1e-12);
    let mut u = seed.to_vec();
    let mut g = spec.gradient_vec(&u);
    for _ in 0..NEWTON_MAX_ITER {
        let gn = norm(&g);
        if gn <= tol {
            return Some(polish(spec, u, g));
        }
        let h = spec.hessian_vec(&u);
        let step = solve(&h, &g)?;
        let mut alpha = T::one();
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<T> = u.iter().zip(&step).map(|(&x, &s)| x - alpha * s).collect();
            let gt = spec.gradient_vec(&trial);
            if norm(&gt) < gn {
                u = trial;
                g = gt;
                accepted = true;
                break;
            }
            alpha = alpha * T::lit(0.5);
        }
        if !accepted || !fence.contains(&u) {
            return None;
        }
    }
    (norm(&g) <= tol).then_some(u)
}

/// A few undamped Newton steps past the tolerance, kept while they help.
fn polish<T: Real>(spec: &dyn Potential<T>, mut u: Vec<T>, mut g: Vec<T>) -> Vec<T> {
    for _ in 0..3 {
        let Some(step) = solve(&spec.hessian_vec(&u), &g) else {
            break;
        };
        let trial: Vec<T> = u.iter().zip(&step).map(|(&x, &s)| x - s).collect();
        let gt = spec.gradient_vec(&trial);
        if !(norm(&gt) < norm(&g)) {
            break;
        }
        u = trial;
        g = gt;
    }
    u
}

/// Multi-start damped Newton on `grad V`, seeded from a tensor grid over `bounds`.
///
/// Returns the nondegenerate minima inside the box sorted by value. Seeds
/// that do not converge are skipped; a converged critical point with a
/// near-zero Hessian eigenvalue is an error.
pub fn find_minima<T: Real>(
    spec: &dyn Potential<T>,
    bounds: &SearchBox<T>,
    grid_per_axis: usize,
) -> Result<Vec<MinimumPoint<T>>> {
    if grid_per_axis < 3 {
        return Err(Error::InvalidArgument(
            "grid_per_axis must be at least 3".into(),
        ));
    }
    if bounds.dim() != spec.dim() {
        return Err(Error::InvalidArgument(
            "box dimension does not match potential".into(),
        ));
    }
    let n = spec.dim();
    let pad: Vec<T> = bounds
        .lo
        .iter()
        .zip(&bounds.hi)
        .map(|(&a, &b)| (b - a) * T::lit(0.1))
        .collect();
    let fence = SearchBox {
        lo: bounds.lo.iter().zip(&pad).map(|(&a, &p)| a - p).collect(),
        hi: bounds.hi.iter().zip(&pad).map(|(&b, &p)| b + p).collect(),
    };
    let dedup = T::tol(1e-6);
    let mut critical: Vec<Vec<T>> = Vec::new();
    for seed in bounds.grid(grid_per_axis) {
        let Some(u) = newton_critical_point(spec, &seed, &fence) else {
            continue;
        };
        if !bounds.contains(&u) || critical.iter().any(|c| dist(c, &u) < dedup) {
            continue;
        }
        critical.push(u);
    }
    let mut minima = Vec::new();
    for u in critical {
        let eig = symmetric_eigenvalues(&spec.hessian_vec(&u), n);
        if let Some(&bad) = eig.iter().find(|l| l.abs() < T::lit(DEGENERACY)) {
            return Err(Error::DegenerateCriticalPoint {
                location: u.iter().map(|x| x.as_f64()).collect(),
                eigenvalue: bad.as_f64(),
            });
        }
        if eig.iter().all(|&l| l > T::zero()) {
            minima.push(MinimumPoint {
                value: spec.value(&u),
                location: u,
                hess_eigenvalues: eig,
            });
        }
    }
    minima.sort_by(|a, b| {
        a.value
            .partial_cmp(&b.value)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(minima)
}

/// Smallest and largest Hessian eigenvalue over all minima.
pub fn eigen_bounds<T: Real>(minima: &[MinimumPoint<T>]) -> Result<(T, T)> {
    if minima.is_empty() {
        return Err(Error::NoMinima);
    }
    let lo = minima
        .iter()
        .map(|m| m.smallest_eigenvalue())
        .fold(T::infinity(), T::min);
    let hi = minima
        .iter()
        .map(|m| m.largest_eigenvalue())
        .fold(T::neg_infinity(), T::max);
    Ok((lo, hi))
}

fn unit_directions<T: Real>(n: usize) -> Vec<Vec<T>> {
    match n {
        1 => vec![vec![T::one()], vec![-T::one()]],
        2 => (0..64)
            .map(|k| {
                let th = T::lit(2.0) * T::PI() * T::of_usize(k) / T::lit(64.0);
                vec![th.cos(), th.sin()]
            })
            .collect(),
        3 => {
            // Fibonacci sphere
            let golden = T::PI() * (T::lit(3.0) - T::lit(5.0).sqrt());
            (0..64)
                .map(|k| {
                    let z = T::one() - T::lit(2.0) * (T::of_usize(k) + T::lit(0.5)) / T::lit(64.0);
                    let rho = (T::one() - z * z).sqrt();
                    let th = golden * T::of_usize(k);
                    vec![rho * th.cos(), rho * th.sin(), z]
                })
                .collect()
        }
        _ => {
            let mut dirs = Vec::new();
            for ax in 0..n {
                for s in [T::one(), -T::one()] {
                    let mut e = vec![T::zero(); n];
                    e[ax] = s;
                    dirs.push(e);
                }
            }
            let inv = T::one() / T::of_usize(n).sqrt();
            for mask in 0..(1usize << n).min(64 - dirs.len().min(64)) {
                dirs.push(
                    (0..n)
                        .map(|ax| if mask >> ax & 1 == 1 { -inv } else { inv })
                        .collect(),
                );
            }
            dirs
        }
    }
}

/// Largest radius `d` such that every Hessian eigenvalue of `V` on the
/// balls `|u - m| <= d` lies in `[lambda_min/2, 2 lambda_max]`.
///
/// Each sampled direction is scanned outward (64 radii, or 4096 for a scalar
/// state) up to `cap` and the first failing radius is bisected to rounding.
/// The four shortest rays of every minimum are then refined by golden-section
/// search over the direction, one tangent great circle at a time.
pub fn escape_distance<T: Real>(
    spec: &dyn Potential<T>,
    minima: &[MinimumPoint<T>],
    lambda_min: T,
    lambda_max: T,
    cap: T,
) -> Result<T> {
    if minima.is_empty() {
        return Err(Error::NoMinima);
    }
    let n = spec.dim();
    let slack = T::tol(1e-12);
    let lo_band = lambda_min / T::lit(2.0) * (T::one() - slack);
    let hi_band = lambda_max * T::lit(2.0) * (T::one() + slack);
    let admissible = |u: &[T]| {
        symmetric_eigenvalues(&spec.hessian_vec(u), n)
            .iter()
            .all(|&l| l >= lo_band && l <= hi_band)
    };
    let radii = if n == 1 { 4096 } else { 64 };
    let ray = |m: &MinimumPoint<T>, dir: &[T]| -> T {
        let at = |s: T| -> Vec<T> {
            m.location
                .iter()
                .zip(dir)
                .map(|(&x, &e)| x + s * e)
                .collect()
        };
        let mut good = T::zero();
        for j in 1..=radii {
            let s = cap * T::of_usize(j) / T::of_usize(radii);
            if admissible(&at(s)) {
                good = s;
                continue;
            }
            let (mut lo, mut hi) = (good, s);
            for _ in 0..200 {
                if hi - lo <= T::epsilon() * T::lit(4.0) * hi {
                    break;
                }
                let mid = (lo + hi) / T::lit(2.0);
                if admissible(&at(mid)) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return lo;
        }
        cap
    };
    let window = if n == 2 { T::lit(0.1) } else { T::lit(0.5) };
    let mut best = cap;
    for m in minima {
        let mut rays: Vec<(T, Vec<T>)> = unit_directions::<T>(n)
            .into_iter()
            .map(|d| (ray(m, &d), d))
            .collect();
        rays.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        best = best.min(rays[0].0);
        if n == 1 {
            continue;
        }
        for (r0, mut dir) in rays.into_iter().take(4) {
            if r0 >= cap {
                break;
            }
            let mut r = r0;
            let mut w = window;
            for _round in 0..3 {
                for ax in 0..n {
                    let mut t: Vec<T> = (0..n)
                        .map(|k| if k == ax { T::one() } else { T::zero() } - dir[ax] * dir[k])
                        .collect();
                    let tn = norm(&t);
                    if tn < T::lit(0.1) {
                        continue;
                    }
                    t.iter_mut().for_each(|x| *x = *x / tn);
                    let turn = |phi: T| -> Vec<T> {
                        dir.iter()
                            .zip(&t)
                            .map(|(&d, &e)| phi.cos() * d + phi.sin() * e)
                            .collect()
                    };
                    let (phi, rp) = golden_min(|phi| ray(m, &turn(phi)), -w, w, &mut best);
                    if rp < r {
                        r = rp;
                        let d = turn(phi);
                        let dn = norm(&d);
                        dir = d.iter().map(|&x| x / dn).collect();
                    }
                }
                w = w / T::lit(4.0);
            }
        }
    }
    if best < T::lit(1e-8) {
        return Err(Error::NoEscapeDistance);
    }
    Ok(best)
}

/// Golden-section search for a minimum of `f` on `[a, b]`; every value seen
/// also lowers `floor`.
fn golden_min<T: Real>(f: impl Fn(T) -> T, mut a: T, mut b: T, floor: &mut T) -> (T, T) {
    let g = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    *floor = floor.min(f1).min(f2);
    for _ in 0..48 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
            *floor = floor.min(f1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
            *floor = floor.min(f2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

fn samples_per_axis(n: usize) -> usize {
    match n {
        1 => 10_000,
        2 => 256,
        _ => 32,
    }
}

/// `q_low_hull = min (V(u) - V(m)) / |u - m|^2` over minima and box samples
/// (minima locations included), and `w_en0 = 1 / max(1, -4 q_low_hull)`.
pub fn low_hull_coefficient<T: Real>(
    spec: &dyn Potential<T>,
    minima: &[MinimumPoint<T>],
    bounds: &SearchBox<T>,
) -> (T, T) {
    let mut samples = bounds.grid(samples_per_axis(spec.dim()));
    samples.extend(minima.iter().map(|m| m.location.clone()));
    let values: Vec<T> = samples.iter().map(|u| spec.value(u)).collect();
    let tiny = T::tol(1e-9);
    let mut q = T::infinity();
    for m in minima {
        for (u, &vu) in samples.iter().zip(&values) {
            let r2 = dist(u, &m.location).powi(2);
            if r2.sqrt() <= tiny {
                continue;
            }
            q = q.min((vu - m.value) / r2);
        }
    }
    let w = T::one() / T::one().max(-T::lit(4.0) * q);
    (q, w)
}

/// Coercivity constants by the sampling rule: `eps_v` is half the infimum of
/// `u . grad V / |u|^2` on the box boundary, `c_v` the excess of
/// `eps_v |u|^2 - u . grad V` over interior samples.
pub fn coercivity_constants<T: Real>(
    spec: &dyn Potential<T>,
    bounds: &SearchBox<T>,
) -> Result<CoercivityConstants<T>> {
    let per_axis = samples_per_axis(spec.dim());
    let tiny = T::tol(1e-12);
    let mut inf_ratio = T::infinity();
    for u in bounds.boundary(per_axis) {
        let r2 = dot(&u, &u);
        if r2.sqrt() <= tiny {
            return Err(Error::NotCoercive);
        }
        let p = dot(&u, &spec.gradient_vec(&u));
        if !(p > T::zero()) {
            return Err(Error::NotCoercive);
        }
        inf_ratio = inf_ratio.min(p / r2);
    }
    let eps_v = inf_ratio / T::lit(2.0);
    let mut c_v = T::zero();
    for u in bounds.grid(per_axis) {
        let excess = eps_v * dot(&u, &u) - dot(&u, &spec.gradient_vec(&u));
        c_v = c_v.max(excess);
    }
    let r_att = (c_v / eps_v + T::one()).sqrt();
    Ok(CoercivityConstants { eps_v, c_v, r_att })
}

/// Firewall decay rate and pollution constant `(nu_f0, k_f0)`.
///
/// `k_f0` maximizes the pollution integrand over the attracting ball
/// `|u| <= r_att`, measured relative to each minimum (state `u - m`,
/// potential `V(u) - V(m)`), plus one.
pub fn firewall_rates<T: Real>(
    spec: &dyn Potential<T>,
    minima: &[MinimumPoint<T>],
    lambda_min: T,
    lambda_max: T,
    w_en0: T,
    r_att: T,
) -> (T, T) {
    let half = T::lit(0.5);
    let nu = (T::one() / w_en0).min(lambda_min / (T::lit(4.0) * (w_en0 * lambda_max + half)));
    let k = ball_sup(spec, minima, r_att, |u, m| {
        let v: Vec<T> = u.iter().zip(&m.location).map(|(&a, &b)| a - b).collect();
        let v2 = dot(&v, &v);
        let g = spec.gradient_vec(u);
        nu * (w_en0 * (spec.value(u) - m.value) + v2 * half) - dot(&v, &g)
            + lambda_min / T::lit(4.0) * v2
    });
    (nu, (k + T::one()).max(T::one()))
}

/// Supremum of `f(u, m)` over grid samples of the ball `|u| <= r_att`
/// (minima included) and over all minima `m`.
pub fn ball_sup<T: Real>(
    spec: &dyn Potential<T>,
    minima: &[MinimumPoint<T>],
    r_att: T,
    f: impl Fn(&[T], &MinimumPoint<T>) -> T,
) -> T {
    let n = spec.dim();
    let ball = SearchBox::cube(n, -r_att, r_att).expect("positive radius");
    let mut samples: Vec<Vec<T>> = ball
        .grid(samples_per_axis(n))
        .into_iter()
        .filter(|u| norm(u) <= r_att)
        .collect();
    samples.extend(
        minima
            .iter()
            .filter(|m| norm(&m.location) <= r_att)
            .map(|m| m.location.clone()),
    );
    let mut k = T::neg_infinity();
    for m in minima {
        for u in &samples {
            k = k.max(f(u, m));
        }
    }
    k
}

/// Runs the full analysis chain on `bounds`.
pub fn analyze<T: Real>(
    spec: &dyn Potential<T>,
    bounds: &SearchBox<T>,
    grid_per_axis: usize,
) -> Result<PotentialAnalysis<T>> {
    let minima = find_minima(spec, bounds, grid_per_axis)?;
    let (lambda_min, lambda_max) = eigen_bounds(&minima)?;
    let d_esc = escape_distance(
        spec,
        &minima,
        lambda_min,
        lambda_max,
        bounds.half_diagonal(),
    )?;
    let (q_low_hull, w_en0) = low_hull_coefficient(spec, &minima, bounds);
    let coerc = coercivity_constants(spec, bounds)?;
    let inscribed = bounds
        .lo
        .iter()
        .zip(&bounds.hi)
        .map(|(&a, &b)| a.abs().min(b.abs()))
        .fold(T::infinity(), T::min);
    if inscribed < coerc.r_att {
        log::warn!(
            "search box does not contain the attracting ball of radius {}",
            coerc.r_att
        );
    }
    let (nu_f0, k_f0) = firewall_rates(spec, &minima, lambda_min, lambda_max, w_en0, coerc.r_att);
    Ok(PotentialAnalysis {
        minima,
        lambda_min,
        lambda_max,
        d_esc,
        q_low_hull,
        w_en0,
        eps_v: coerc.eps_v,
        c_v: coerc.c_v,
        r_att: coerc.r_att,
        nu_f0,
        k_f0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimumReport {
    pub location: Vec<f64>,
    pub value: f64,
    pub eigenvalues: Vec<f64>,
}

/// Flat JSON form of [`PotentialAnalysis`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub n: usize,
    pub minima: Vec<MinimumReport>,
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub d_esc: f64,
    pub q_low_hull: f64,
    pub w_en0: f64,
    pub eps_v: f64,
    pub c_v: f64,
    pub r_att: f64,
    pub nu_f0: f64,
    pub k_f0: f64,
}

impl<T: Real> PotentialAnalysis<T> {
    pub fn report(&self) -> AnalysisReport {
        let f = |x: T| x.as_f64();
        AnalysisReport {
            n: self.minima.first().map_or(0, |m| m.location.len()),
            minima: self
                .minima
                .iter()
                .map(|m| MinimumReport {
                    location: m.location.iter().map(|&x| f(x)).collect(),
                    value: f(m.value),
                    eigenvalues: m.hess_eigenvalues.iter().map(|&x| f(x)).collect(),
                })
                .collect(),
            lambda_min: f(self.lambda_min),
            lambda_max: f(self.lambda_max),
            d_esc: f(self.d_esc),
            q_low_hull: f(self.q_low_hull),
            w_en0: f(self.w_en0),
            eps_v: f(self.eps_v),
            c_v: f(self.c_v),
            r_att: f(self.r_att),
            nu_f0: f(self.nu_f0),
            k_f0: f(self.k_f0),
        }
    }

    /// Index of the minimum nearest to `u`.
    pub fn nearest(&self, u: &[T]) -> Option<&MinimumPoint<T>> {
        super::nearest_minimum(&self.minima, u).map(|i| &self.minima[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::ScalarPolynomial;

    fn line(lo: f64, hi: f64) -> SearchBox<f64> {
        SearchBox::cube(1, lo, hi).unwrap()
    }

    #[test]
    fn double_well_minima_and_bounds() {
        let v = ScalarPolynomial::double_well(0.0);
        let minima = find_minima(&v, &line(-2.0, 2.0), 21).unwrap();
        assert_eq!(minima.len(), 2);
        let mut locs: Vec<f64> = minima.iter().map(|m| m.location[0]).collect();
        locs.sort_by(f64::total_cmp);
        assert!((locs[0] + 1.0).abs() < 1e-12 && (locs[1] - 1.0).abs() < 1e-12);
        assert!(minima.iter().all(|m| m.value.abs() < 1e-14));
        let (lo, hi) = eigen_bounds(&minima).unwrap();
        assert!(
            (lo - 2.0).abs() < 1e-12 && (hi - 2.0).abs() < 1e-12,
            "{lo} {hi}"
        );
    }

    #[test]
    fn cubic_minima_sorted_by_value() {
        let v = ScalarPolynomial::cubic(0.25);
        let minima = find_minima(&v, &line(-2.0, 3.0), 31).unwrap();
        assert_eq!(minima.len(), 2);
        assert!((minima[0].location[0] - 1.0).abs() < 1e-12);
        assert!((minima[0].value + 1.0 / 24.0).abs() < 1e-14);
        assert!(minima[1].location[0].abs() < 1e-12);
        let (lo, hi) = eigen_bounds(&minima).unwrap();
        assert!((lo - 0.25).abs() < 1e-12 && (hi - 0.75).abs() < 1e-12);
    }

    #[test]
    fn degenerate_critical_point_is_reported() {
        // V = u^4 has a degenerate minimum at the origin.
        let v = ScalarPolynomial::from_coefficients("quartic", vec![0.0, 0.0, 0.0, 0.0, 1.0]);
        let err = find_minima(&v, &line(-1.0, 1.0), 11).unwrap_err();
        assert!(matches!(err, Error::DegenerateCriticalPoint { .. }));
    }

    #[test]
    fn empty_minima_list_is_an_error() {
        assert_eq!(eigen_bounds::<f64>(&[]).unwrap_err(), Error::NoMinima);
    }

    #[test]
    fn escape_distance_examples() {
        let v = ScalarPolynomial::double_well(0.0);
        let b = line(-2.0, 2.0);
        let minima = find_minima(&v, &b, 21).unwrap();
        let d = escape_distance(&v, &minima, 2.0, 2.0, b.half_diagonal()).unwrap();
        let exact = 1.0 - (2.0f64 / 3.0).sqrt();
        assert!((d - exact).abs() < 1e-6 * exact, "{d} vs {exact}");

        let q = ScalarPolynomial::quadratic();
        let b = line(-1.0, 1.0);
        let minima = find_minima(&q, &b, 11).unwrap();
        let d = escape_distance(&q, &minima, 1.0, 1.0, b.half_diagonal()).unwrap();
        assert_eq!(d, 1.0);
    }

    #[test]
    fn low_hull_examples() {
        let q = ScalarPolynomial::quadratic();
        let b = line(-1.0, 1.0);
        let minima = find_minima(&q, &b, 11).unwrap();
        let (ql, w) = low_hull_coefficient(&q, &minima, &b);
        assert!((ql - 0.5).abs() < 1e-12);
        assert_eq!(w, 1.0);

        let v = ScalarPolynomial::double_well(0.0);
        let b = line(-2.0, 2.0);
        let minima = find_minima(&v, &b, 21).unwrap();
        let (ql, w) = low_hull_coefficient(&v, &minima, &b);
        assert!(ql.abs() < 1e-12, "{ql}");
        assert_eq!(w, 1.0);
    }

    #[test]
    fn quadratic_coercivity() {
        let q = ScalarPolynomial::quadratic();
        let c = coercivity_constants(&q, &line(-2.0, 2.0)).unwrap();
        assert!((c.eps_v - 0.5).abs() < 1e-15);
        assert_eq!(c.c_v, 0.0);
        assert!((c.r_att - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_coercive_box_is_rejected() {
        // -u^2/2 pushes outward everywhere
        let v = ScalarPolynomial::from_coefficients("hill", vec![0.0, 0.0, -0.5]);
        assert_eq!(
            coercivity_constants(&v, &line(-1.0, 1.0)).unwrap_err(),
            Error::NotCoercive
        );
    }

    #[test]
    fn report_has_flat_keys() {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &line(-2.0, 3.0), 31).unwrap();
        let json = serde_json::to_value(a.report()).unwrap();
        let keys: Vec<&str> = json
            .as_object()
            .unwrap()
            .keys()
            .map(String::as_str)
            .collect();
        for k in [
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
        ] {
            assert!(keys.contains(&k), "missing {k}");
        }
        assert_eq!(keys.len(), 12);
        assert!(a.k_f0 > 0.0 && a.nu_f0 > 0.0);
    }
}
