//! Propagating terraces of bistable fronts: interface detection, fitting
//! against a library of travelling fronts, reconstruction and sup-distance.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::diagnostics::{speed_estimate, Trajectory};
use crate::error::{Error, Result};
use crate::front::{normalize_front, solve_bistable_front, FrontProfile};
use crate::potential::{nearest_minimum, MinimumPoint, Potential, PotentialAnalysis};
use crate::radial::{RadialField, RadialGrid};
use crate::scalar::{dist, Real};

/// An interface between two plateaus of a radial profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface<T> {
    /// Largest radius in the gap where `|u - m_outer| = d_esc`.
    pub position: T,
    /// Index into the minima list of the plateau behind the interface.
    pub inner: usize,
    /// Index of the plateau ahead of it.
    pub outer: usize,
}

/// Scans from `r_max` inward for plateaus (runs of at least ten cells within
/// `d_esc/2` of one minimum) and returns the interfaces between consecutive
/// distinct plateaus, outermost first.
pub fn detect_interfaces<T: Real>(
    field: &RadialField<T>,
    minima: &[MinimumPoint<T>],
    d_esc: T,
) -> Result<Vec<Interface<T>>> {
    let g = field.grid;
    let half = d_esc / T::lit(2.0);
    let label: Vec<Option<usize>> = (0..g.n_nodes)
        .map(|k| {
            let u = field.at(k);
            nearest_minimum(minima, u).filter(|&i| dist(u, &minima[i].location) <= half)
        })
        .collect();
    if label[g.n_nodes - 1].is_none() {
        return Err(Error::NotStableAtInfinity);
    }
    // plateaus as (label, first node, last node), outermost first
    let mut plateaus: Vec<(usize, usize, usize)> = Vec::new();
    let mut k = g.n_nodes;
    while k > 0 {
        k -= 1;
        let Some(l) = label[k] else { continue };
        let end = k;
        while k > 0 && label[k - 1] == Some(l) {
            k -= 1;
        }
        let long = end - k >= 10 || k == 0 || end == g.n_nodes - 1;
        if !long {
            continue;
        }
        match plateaus.last_mut() {
            Some(p) if p.0 == l => p.1 = k,
            _ => plateaus.push((l, k, end)),
        }
    }
    let mut out = Vec::new();
    for w in plateaus.windows(2) {
        let (outer, inner) = (w[0], w[1]);
        let m = &minima[outer.0].location;
        let dev = |k: usize| dist(field.at(k), m);
        // last node of the gap (inner plateau included) still escaped
        let mut k = outer.1;
        while k > inner.2 && dev(k) < d_esc {
            k -= 1;
        }
        let (a, b) = (dev(k), dev(k + 1));
        let position = if a <= b {
            g.r(k)
        } else {
            g.r(k) + g.dr * (a - d_esc) / (a - b)
        };
        out.push(Interface {
            position,
            inner: inner.0,
            outer: outer.0,
        });
    }
    Ok(out)
}

/// A propagating terrace `m_0 + sum_i [phi_i(r - r_i(t)) - m_{i-1}]`.
///
/// `minima_chain[0]` is the outer minimum, `minima_chain[q]` the inner one;
/// `fronts[i]` connects `minima_chain[i+1]` (behind) to `minima_chain[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Terrace<T> {
    pub minima_chain: Vec<MinimumPoint<T>>,
    pub fronts: Vec<FrontProfile<T>>,
    pub times: Vec<T>,
    /// `positions[i][k]` is `r_{i+1}` at `times[k]`.
    pub positions: Vec<Vec<T>>,
    pub speeds: Vec<T>,
    pub speed_stderr: Vec<T>,
}

impl<T: Real> Terrace<T> {
    /// The trivial terrace at a single minimum.
    pub fn homogeneous(m: MinimumPoint<T>) -> Self {
        Self {
            minima_chain: vec![m],
            fronts: Vec::new(),
            times: Vec::new(),
            positions: Vec::new(),
            speeds: Vec::new(),
            speed_stderr: Vec::new(),
        }
    }

    pub fn q(&self) -> usize {
        self.fronts.len()
    }

    /// `r_i(t)` by linear interpolation, extended at the recorded speed.
    pub fn position(&self, i: usize, t: T) -> T {
        let (ts, rs) = (&self.times, &self.positions[i]);
        let last = ts.len() - 1;
        if t <= ts[0] {
            return rs[0] - self.speeds[i] * (ts[0] - t);
        }
        if t >= ts[last] {
            return rs[last] + self.speeds[i] * (t - ts[last]);
        }
        let k = ts.partition_point(|&s| s <= t).min(last) - 1;
        let w = (t - ts[k]) / (ts[k + 1] - ts[k]);
        rs[k] + w * (rs[k + 1] - rs[k])
    }

    /// Pairs `i` (fronts `i` and `i + 1`, one-based) whose speeds agree
    /// within `2 stderr`.
    pub fn indeterminate_separations(&self) -> Vec<usize> {
        (1..self.q())
            .filter(|&i| {
                let slack = T::lit(2.0) * (self.speed_stderr[i - 1] + self.speed_stderr[i]);
                (self.speeds[i - 1] - self.speeds[i]).abs() <= slack
            })
            .collect()
    }

    /// Checks the value chain, the speed ordering (with `2 stderr` slack) and
    /// the strict growth of separations over the last half of the record,
    /// skipping [`indeterminate_separations`](Self::indeterminate_separations).
    pub fn check_invariants(&self) -> Result<()> {
        let q = self.q();
        if self.minima_chain.len() != q + 1 {
            return Err(Error::TerraceInvariant(
                "chain must hold q + 1 minima".into(),
            ));
        }
        for w in self.minima_chain.windows(2) {
            if !(w[0].value > w[1].value) {
                return Err(Error::TerraceInvariant(
                    "potential values must decrease strictly from the outer minimum inward".into(),
                ));
            }
        }
        for i in 0..q {
            if !(self.speeds[i] > T::zero()) {
                return Err(Error::TerraceInvariant(format!(
                    "front {} has nonpositive speed",
                    i + 1
                )));
            }
        }
        for i in 1..q {
            let slack = T::lit(2.0) * (self.speed_stderr[i - 1] + self.speed_stderr[i]);
            if self.speeds[i - 1] < self.speeds[i] - slack {
                return Err(Error::TerraceInvariant(format!(
                    "speeds must not increase inward: c_{} = {} < c_{} = {}",
                    i,
                    self.speeds[i - 1],
                    i + 1,
                    self.speeds[i]
                )));
            }
            if self.indeterminate_separations().contains(&i) {
                log::warn!("separation of fronts {i} and {} is indeterminate", i + 1);
                continue;
            }
            let start = self.times.len() / 2;
            let sep: Vec<T> = (start..self.times.len())
                .map(|k| self.positions[i - 1][k] - self.positions[i][k])
                .collect();
            if sep.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::TerraceInvariant(format!(
                    "separation of fronts {} and {} is not increasing over the last half of the window",
                    i,
                    i + 1
                )));
            }
        }
        Ok(())
    }
}

/// `m_0 + sum_i [phi_i(r - r_i(t)) - m_{i-1}]` on `grid`.
pub fn reconstruct<T: Real>(terrace: &Terrace<T>, grid: &RadialGrid<T>, t: T) -> RadialField<T> {
    let m0 = &terrace.minima_chain[0].location;
    let mut field = RadialField::constant(*grid, m0, t);
    for (i, front) in terrace.fronts.iter().enumerate() {
        let ri = terrace.position(i, t);
        let ahead = &terrace.minima_chain[i].location;
        for k in 0..grid.n_nodes {
            let phi = front.eval(grid.r(k) - ri);
            for (j, v) in field.at_mut(k).iter_mut().enumerate() {
                *v = *v + phi[j] - ahead[j];
            }
        }
    }
    field
}

/// `max |u(r, t) - T(r, t)|` over grid nodes with `r >= eps t`.
pub fn sup_error<T: Real>(field: &RadialField<T>, terrace: &Terrace<T>, eps: T) -> Result<T> {
    let g = field.grid;
    let lo = eps * field.time;
    if lo > g.r_max {
        return Err(Error::EmptyWindow);
    }
    let rec = reconstruct(terrace, &g, field.time);
    let first = if lo <= T::zero() {
        0
    } else {
        (lo / g.dr).ceil().to_usize().unwrap_or(g.n_nodes)
    };
    if first >= g.n_nodes {
        return Err(Error::EmptyWindow);
    }
    Ok((first..g.n_nodes)
        .map(|k| dist(field.at(k), rec.at(k)))
        .fold(T::zero(), T::max))
}

/// Solved, normalized fronts keyed by their end minima.
#[derive(Debug, Clone, Default)]
pub struct FrontLibrary<T> {
    pub fronts: Vec<FrontProfile<T>>,
}

impl<T: Real> FrontLibrary<T> {
    pub fn new() -> Self {
        Self { fronts: Vec::new() }
    }

    pub fn find(
        &self,
        m_minus: &MinimumPoint<T>,
        m_plus: &MinimumPoint<T>,
    ) -> Option<&FrontProfile<T>> {
        self.index_of(m_minus, m_plus).map(|i| &self.fronts[i])
    }

    /// Returns the library front for the pair, solving and normalizing it on
    /// first use with the speed bracket `(-s, s)`, `s = 2 sqrt(max -V'') + 0.1`.
    pub fn get_or_solve(
        &mut self,
        spec: &dyn Potential<T>,
        analysis: &PotentialAnalysis<T>,
        m_minus: &MinimumPoint<T>,
        m_plus: &MinimumPoint<T>,
    ) -> Result<&FrontProfile<T>> {
        if let Some(i) = self.index_of(m_minus, m_plus) {
            return Ok(&self.fronts[i]);
        }
        let hi = speed_ceiling(spec, m_minus, m_plus);
        let raw = solve_bistable_front(spec, analysis, m_minus, m_plus, (-hi, hi))?;
        self.fronts.push(normalize_front(&raw, analysis.d_esc)?);
        Ok(self.fronts.last().expect("just pushed"))
    }

    fn index_of(&self, m_minus: &MinimumPoint<T>, m_plus: &MinimumPoint<T>) -> Option<usize> {
        let tol = T::tol(1e-6);
        self.fronts.iter().position(|f| {
            dist(&f.m_minus.location, &m_minus.location) < tol
                && dist(&f.m_plus.location, &m_plus.location) < tol
        })
    }
}

/// `2 sqrt(sup (-V''))` along the segment between two scalar states, plus a
/// margin; no bistable front between them is faster.
pub fn speed_ceiling<T: Real>(
    spec: &dyn Potential<T>,
    a: &MinimumPoint<T>,
    b: &MinimumPoint<T>,
) -> T {
    let n = spec.dim();
    let mut h = vec![T::zero(); n * n];
    let mut worst = T::zero();
    for s in 0..=1000 {
        let w = T::of_usize(s) / T::lit(1000.0);
        let u: Vec<T> = a
            .location
            .iter()
            .zip(&b.location)
            .map(|(&x, &y)| x + w * (y - x))
            .collect();
        spec.hessian(&u, &mut h);
        worst = worst.max(-h[0]);
    }
    T::lit(2.0) * worst.sqrt() + T::lit(0.1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig<T> {
    /// Frames with `t_a <= t <= t_b` are used.
    pub window: (T, T),
    /// Largest admissible jump of an interface between frames, per unit time.
    pub max_speed: T,
    /// Multipliers of the smallest front speed giving the three `eps`.
    pub eps_factors: [T; 3],
    /// Speed used for `eps` when the terrace has no front.
    pub reference_speed: T,
}

impl<T: Real> FitConfig<T> {
    pub fn new(window: (T, T), max_speed: T) -> Self {
        Self {
            window,
            max_speed,
            eps_factors: [T::lit(0.1), T::lit(0.25), T::lit(0.5)],
            reference_speed: T::zero(),
        }
    }
}

/// Outcome of [`fit_terrace`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitReport {
    pub q: usize,
    pub epsilons: [f64; 3],
    pub times: Vec<f64>,
    /// `sup_error` per frame at the three `eps`.
    pub sup_errors: Vec<[f64; 3]>,
    pub speeds: Vec<f64>,
    pub speed_stderr: Vec<f64>,
    /// Regression window of the speeds.
    pub speed_window: (f64, f64),
    pub invariants_hold: bool,
    /// See [`Terrace::indeterminate_separations`].
    pub indeterminate_separation: Vec<usize>,
}

impl FitReport {
    /// CSV with columns `t,sup_err_eps1,sup_err_eps2,sup_err_eps3`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        writeln!(f, "t,sup_err_eps1,sup_err_eps2,sup_err_eps3")?;
        for (t, e) in self.times.iter().zip(&self.sup_errors) {
            writeln!(f, "{},{},{},{}", t, e[0], e[1], e[2])?;
        }
        Ok(())
    }
}

/// Fits a propagating terrace to the frames of `traj` inside the window.
///
/// Interfaces are detected in every frame; their number and end minima must
/// not change, and no interface may jump by more than `max_speed dt` between
/// frames. Speeds are regression slopes over the last half of the window.
pub fn fit_terrace<T: Real>(
    traj: &Trajectory<T>,
    spec: &dyn Potential<T>,
    analysis: &PotentialAnalysis<T>,
    library: &mut FrontLibrary<T>,
    cfg: &FitConfig<T>,
) -> Result<(Terrace<T>, FitReport)> {
    let frames: Vec<_> = traj
        .frames
        .iter()
        .filter(|f| f.field.time >= cfg.window.0 && f.field.time <= cfg.window.1)
        .collect();
    if frames.len() < 20 {
        return Err(Error::TooFewSamples {
            needed: 20,
            got: frames.len(),
        });
    }
    let minima = &analysis.minima;
    let detected = frames
        .iter()
        .map(|f| detect_interfaces(&f.field, minima, analysis.d_esc))
        .collect::<Result<Vec<_>>>()?;
    let layout = |v: &[Interface<T>]| v.iter().map(|i| (i.inner, i.outer)).collect::<Vec<_>>();
    let reference = layout(&detected[0]);
    for (f, d) in frames.iter().zip(&detected) {
        if layout(d) != reference {
            return Err(Error::TerraceNotFormed(format!(
                "interfaces change at t = {} ({} -> {}); extend t_b",
                f.field.time,
                reference.len(),
                d.len()
            )));
        }
    }
    let q = reference.len();
    let times: Vec<T> = frames.iter().map(|f| f.field.time).collect();
    let positions: Vec<Vec<T>> = (0..q)
        .map(|i| detected.iter().map(|d| d[i].position).collect())
        .collect();
    for series in &positions {
        for k in 1..series.len() {
            let jump = (series[k] - series[k - 1]).abs();
            if jump > cfg.max_speed * (times[k] - times[k - 1]) {
                return Err(Error::TerraceNotFormed(format!(
                    "interface jumps by {jump} at t = {}; extend t_b",
                    times[k]
                )));
            }
        }
    }
    let mid = times[0] + (times[times.len() - 1] - times[0]) / T::lit(2.0);
    let speed_window = (mid, times[times.len() - 1]);
    let mut speeds = Vec::new();
    let mut stderr = Vec::new();
    for series in &positions {
        let est = speed_estimate(&times, series, speed_window)?;
        speeds.push(est.slope);
        stderr.push(est.stderr);
    }
    let mut chain = Vec::new();
    let mut fronts = Vec::new();
    if q == 0 {
        let last = &frames[frames.len() - 1].field;
        let i = nearest_minimum(minima, last.at(last.grid.n_nodes - 1)).ok_or(Error::NoMinima)?;
        chain.push(minima[i].clone());
    } else {
        chain.push(minima[reference[0].1].clone());
        for &(inner, outer) in &reference {
            let (behind, ahead) = (&minima[inner], &minima[outer]);
            fronts.push(library.get_or_solve(spec, analysis, behind, ahead)?.clone());
            chain.push(behind.clone());
        }
    }
    let terrace = Terrace {
        minima_chain: chain,
        fronts,
        times: times.clone(),
        positions,
        speeds,
        speed_stderr: stderr,
    };
    terrace.check_invariants()?;
    let base = terrace.speeds.iter().copied().fold(T::infinity(), T::min);
    let base = if q == 0 { cfg.reference_speed } else { base };
    let eps = cfg.eps_factors.map(|f| f * base);
    let mut sup_errors = Vec::new();
    for f in &frames {
        let mut row = [0.0; 3];
        for (j, &e) in eps.iter().enumerate() {
            row[j] = sup_error(&f.field, &terrace, e)?.as_f64();
        }
        sup_errors.push(row);
    }
    let report = FitReport {
        q,
        epsilons: eps.map(|e| e.as_f64()),
        times: times.iter().map(|t| t.as_f64()).collect(),
        sup_errors,
        speeds: terrace.speeds.iter().map(|c| c.as_f64()).collect(),
        speed_stderr: terrace.speed_stderr.iter().map(|c| c.as_f64()).collect(),
        speed_window: (speed_window.0.as_f64(), speed_window.1.as_f64()),
        invariants_hold: true,
        indeterminate_separation: terrace.indeterminate_separations(),
    };
    Ok((terrace, report))
}

#[derive(Serialize)]
struct MinimumExport {
    location: Vec<f64>,
    value: f64,
}

#[derive(Serialize)]
struct TerraceExport<'a> {
    q: usize,
    minima_chain: Vec<MinimumExport>,
    speeds: Vec<f64>,
    position_series: Vec<PathBuf>,
    fit_report: &'a FitReport,
}

/// Writes `terrace.json`, one `front_<i>_positions.csv` (`t,r`) per front
/// and `fit_report.csv` into `dir`; returns the JSON path.
pub fn export_terrace<T: Real>(
    terrace: &Terrace<T>,
    report: &FitReport,
    dir: &Path,
) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let mut refs = Vec::new();
    for (i, series) in terrace.positions.iter().enumerate() {
        let name = PathBuf::from(format!("front_{}_positions.csv", i + 1));
        let mut f = fs::File::create(dir.join(&name))?;
        writeln!(f, "t,r")?;
        for (t, r) in terrace.times.iter().zip(series) {
            writeln!(f, "{},{}", t, r)?;
        }
        refs.push(name);
    }
    report.write_csv(&dir.join("fit_report.csv"))?;
    let export = TerraceExport {
        q: terrace.q(),
        minima_chain: terrace
            .minima_chain
            .iter()
            .map(|m| MinimumExport {
                location: m.location.iter().map(|x| x.as_f64()).collect(),
                value: m.value.as_f64(),
            })
            .collect(),
        speeds: terrace.speeds.iter().map(|c| c.as_f64()).collect(),
        position_series: refs,
        fit_report: report,
    };
    let path = dir.join("terrace.json");
    fs::write(&path, serde_json::to_string_pretty(&export)?)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Frame;
    use crate::potential::{analyze, ScalarPolynomial, SearchBox};
    use crate::radial::OuterBc;

    fn cubic() -> (ScalarPolynomial<f64>, PotentialAnalysis<f64>) {
        let v = ScalarPolynomial::cubic(0.25);
        let a = analyze(&v, &SearchBox::cube(1, -2.0, 3.0).unwrap(), 41).unwrap();
        (v, a)
    }

    fn at(a: &PotentialAnalysis<f64>, x: f64) -> MinimumPoint<f64> {
        a.nearest(&[x]).unwrap().clone()
    }

    fn logistic_field(grid: RadialGrid<f64>, center: f64, hi: f64, lo: f64) -> RadialField<f64> {
        let mut f = RadialField::constant(grid, &[lo], 0.0);
        for k in 0..grid.n_nodes {
            let s = 1.0 / (1.0 + ((grid.r(k) - center) / 2f64.sqrt()).exp());
            f.at_mut(k)[0] = lo + (hi - lo) * s;
        }
        f
    }

    fn translating_trajectory(front: &FrontProfile<f64>, c: f64) -> Trajectory<f64> {
        let grid = RadialGrid::with_spacing(150.0, 0.1, 3).unwrap();
        let frames = (0..40)
            .map(|i| {
                let t = 2.0 * i as f64;
                let mut field = RadialField::constant(grid, &[0.0], t);
                for k in 0..grid.n_nodes {
                    field.at_mut(k)[0] = front.eval(grid.r(k) - 40.0 - c * t)[0];
                }
                Frame {
                    field,
                    u_t: vec![0.0; grid.n_nodes],
                }
            })
            .collect();
        Trajectory {
            outer_bc: OuterBc::NeumannZero,
            frames,
        }
    }

    #[test]
    fn homogeneous_terrace_reconstructs_constant() {
        let (_, a) = cubic();
        let m = a.minima[0].clone();
        let ter = Terrace::homogeneous(m.clone());
        assert_eq!(ter.q(), 0);
        ter.check_invariants().unwrap();
        let grid = RadialGrid::with_spacing(20.0, 0.5, 3).unwrap();
        let rec = reconstruct(&ter, &grid, 3.0);
        assert!(rec.values.iter().all(|&u| u == m.location[0]));
        let field = RadialField::constant(grid, &m.location, 3.0);
        assert_eq!(sup_error(&field, &ter, 0.1).unwrap(), 0.0);
        assert!(matches!(
            sup_error(&field, &ter, 10.0),
            Err(Error::EmptyWindow)
        ));
    }

    #[test]
    fn no_interfaces_in_homogeneous_field() {
        let (_, a) = cubic();
        let grid = RadialGrid::with_spacing(50.0, 0.1, 3).unwrap();
        let field = RadialField::constant(grid, &[1.0], 0.0);
        assert!(detect_interfaces(&field, &a.minima, a.d_esc)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn logistic_interface_at_escape_crossing() {
        let (_, a) = cubic();
        let grid = RadialGrid::with_spacing(100.0, 0.1, 3).unwrap();
        let field = logistic_field(grid, 50.0, 1.0, 0.0);
        let found = detect_interfaces(&field, &a.minima, a.d_esc).unwrap();
        assert_eq!(found.len(), 1);
        let exact = 50.0 + 2f64.sqrt() * (1.0 / a.d_esc - 1.0).ln();
        assert!(
            (found[0].position - exact).abs() < 0.1 * 0.1,
            "{} vs {exact}",
            found[0].position
        );
        assert_eq!(a.minima[found[0].inner].location[0].round(), 1.0);
        assert_eq!(a.minima[found[0].outer].location[0].round(), 0.0);
    }

    #[test]
    fn unstable_tail_is_rejected() {
        let (_, a) = cubic();
        let grid = RadialGrid::with_spacing(50.0, 0.1, 3).unwrap();
        let field = logistic_field(grid, 25.0, 1.0, 0.5);
        assert!(matches!(
            detect_interfaces(&field, &a.minima, a.d_esc),
            Err(Error::NotStableAtInfinity)
        ));
    }

    #[test]
    fn two_interfaces_in_triple_well_fixture() {
        let v = ScalarPolynomial::triple_well(0.55, 0.8, 2.0);
        let a = analyze(&v, &SearchBox::cube(1, -1.0, 3.0).unwrap(), 81).unwrap();
        let grid = RadialGrid::with_spacing(150.0, 0.1, 3).unwrap();
        let inner = logistic_field(grid, 40.0, 0.0, 1.0);
        let outer = logistic_field(grid, 100.0, 0.0, 1.0);
        let mut field = inner.clone();
        for k in 0..grid.n_nodes {
            field.at_mut(k)[0] = inner.at(k)[0] + outer.at(k)[0];
        }
        let found = detect_interfaces(&field, &a.minima, a.d_esc).unwrap();
        assert_eq!(found.len(), 2);
        let loc = |i: usize| a.minima[i].location[0].round();
        assert_eq!((loc(found[0].inner), loc(found[0].outer)), (1.0, 2.0));
        assert_eq!((loc(found[1].inner), loc(found[1].outer)), (0.0, 1.0));
        assert!(found[0].position > 100.0 && found[1].position > 40.0 && found[1].position < 60.0);
    }

    #[test]
    fn fit_recovers_translating_front() {
        let (v, a) = cubic();
        let mut lib = FrontLibrary::new();
        let front = lib
            .get_or_solve(&v, &a, &at(&a, 1.0), &at(&a, 0.0))
            .unwrap()
            .clone();
        let c = front.speed;
        let traj = translating_trajectory(&front, c);
        let (ter, rep) =
            fit_terrace(&traj, &v, &a, &mut lib, &FitConfig::new((0.0, 80.0), 10.0)).unwrap();
        assert_eq!(ter.q(), 1);
        assert_eq!(lib.fronts.len(), 1);
        // crossings are linearly interpolated, so positions carry an O(dr^2) error
        assert!((rep.speeds[0] - c).abs() < 1e-4, "{} vs {c}", rep.speeds[0]);
        let worst = rep
            .sup_errors
            .iter()
            .flat_map(|r| r.iter())
            .copied()
            .fold(0.0, f64::max);
        assert!(worst < 1e-3, "{worst}");
        ter.check_invariants().unwrap();
    }

    #[test]
    fn sup_error_sees_a_bump() {
        let (v, a) = cubic();
        let mut lib = FrontLibrary::new();
        let front = lib
            .get_or_solve(&v, &a, &at(&a, 1.0), &at(&a, 0.0))
            .unwrap()
            .clone();
        let traj = translating_trajectory(&front, front.speed);
        let (ter, _) =
            fit_terrace(&traj, &v, &a, &mut lib, &FitConfig::new((0.0, 80.0), 10.0)).unwrap();
        let mut field = reconstruct(&ter, &traj.grid().unwrap(), 60.0);
        assert_eq!(sup_error(&field, &ter, 0.1).unwrap(), 0.0);
        let k = field.grid.n_nodes - 200;
        field.at_mut(k)[0] += 0.01;
        assert!((sup_error(&field, &ter, 0.1).unwrap() - 0.01).abs() < 1e-15);
    }

    #[test]
    fn invariants_reject_bad_chains() {
        let (v, a) = cubic();
        let mut lib = FrontLibrary::new();
        let front = lib
            .get_or_solve(&v, &a, &at(&a, 1.0), &at(&a, 0.0))
            .unwrap()
            .clone();
        let traj = translating_trajectory(&front, front.speed);
        let (ter, _) =
            fit_terrace(&traj, &v, &a, &mut lib, &FitConfig::new((0.0, 80.0), 10.0)).unwrap();
        let mut swapped = ter.clone();
        swapped.minima_chain.reverse();
        assert!(matches!(
            swapped.check_invariants(),
            Err(Error::TerraceInvariant(_))
        ));
        let mut slow = ter;
        slow.speeds[0] = -1.0;
        assert!(matches!(
            slow.check_invariants(),
            Err(Error::TerraceInvariant(_))
        ));
    }

    #[test]
    fn equal_speeds_leave_separation_indeterminate() {
        let v = ScalarPolynomial::triple_well(0.55, 0.8, 2.0);
        let a = analyze(&v, &SearchBox::cube(1, -1.0, 3.0).unwrap(), 81).unwrap();
        let mut lib = FrontLibrary::new();
        let outer = lib
            .get_or_solve(&v, &a, &at(&a, 1.0), &at(&a, 2.0))
            .unwrap()
            .clone();
        let inner = lib
            .get_or_solve(&v, &a, &at(&a, 0.0), &at(&a, 1.0))
            .unwrap()
            .clone();
        let times: Vec<f64> = (0..=20).map(f64::from).collect();
        let terrace = |c_inner: f64| Terrace {
            minima_chain: vec![at(&a, 2.0), at(&a, 1.0), at(&a, 0.0)],
            fronts: vec![outer.clone(), inner.clone()],
            positions: vec![
                times.iter().map(|t| 100.0 + 0.5 * t).collect(),
                times.iter().map(|t| 50.0 + 0.5 * t).collect(),
            ],
            times: times.clone(),
            speeds: vec![0.5, c_inner],
            speed_stderr: vec![1e-3, 1e-3],
        };
        let tied = terrace(0.5);
        assert_eq!(tied.indeterminate_separations(), vec![1]);
        tied.check_invariants().unwrap();
        let split = terrace(0.3);
        assert!(split.indeterminate_separations().is_empty());
        assert!(matches!(
            split.check_invariants(),
            Err(Error::TerraceInvariant(_))
        ));
    }

    #[test]
    fn export_writes_json_and_series() {
        let (v, a) = cubic();
        let mut lib = FrontLibrary::new();
        let front = lib
            .get_or_solve(&v, &a, &at(&a, 1.0), &at(&a, 0.0))
            .unwrap()
            .clone();
        let traj = translating_trajectory(&front, front.speed);
        let (ter, rep) =
            fit_terrace(&traj, &v, &a, &mut lib, &FitConfig::new((0.0, 80.0), 10.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = export_terrace(&ter, &rep, dir.path()).unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
        assert_eq!(json["q"], 1);
        assert_eq!(json["minima_chain"].as_array().unwrap().len(), 2);
        let csv = fs::read_to_string(dir.path().join("front_1_positions.csv")).unwrap();
        assert_eq!(csv.lines().next(), Some("t,r"));
        assert_eq!(csv.lines().count(), 41);
    }
}
