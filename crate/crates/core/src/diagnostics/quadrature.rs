use crate::radial::RadialGrid;
use crate::scalar::Real;

/// Composite trapezoid weights over the whole grid.
pub fn trapezoid_weights<T: Real>(grid: &RadialGrid<T>) -> Vec<T> {
    let mut w = vec![grid.dr; grid.n_nodes];
    w[0] = grid.dr / T::lit(2.0);
    w[grid.n_nodes - 1] = grid.dr / T::lit(2.0);
    w
}

/// Node weights `w` such that `sum_k w_k f_k` is the exact integral over
/// `[a, b]` (clipped to the grid) of the piecewise linear interpolant of `f`.
pub fn interval_weights<T: Real>(grid: &RadialGrid<T>, a: T, b: T) -> Vec<T> {
    let mut w = vec![T::zero(); grid.n_nodes];
    add_interval_weights(grid, a, b, &mut w);
    w
}

pub(crate) fn add_interval_weights<T: Real>(grid: &RadialGrid<T>, a: T, b: T, w: &mut [T]) {
    let a = a.max(T::zero());
    let b = b.min(grid.r_max);
    if !(b > a) {
        return;
    }
    let h = grid.dr;
    let half = T::lit(0.5);
    let first = grid.node_below(a).min(grid.n_nodes - 2);
    let last = grid.node_below(b).min(grid.n_nodes - 2);
    for k in first..=last {
        let lo = grid.r(k);
        let sp = ((a - lo) / h).max(T::zero());
        let sq = ((b - lo) / h).min(T::one());
        if !(sq > sp) {
            continue;
        }
        let quad = (sq * sq - sp * sp) * half;
        w[k] = w[k] + h * ((sq - sp) - quad);
        w[k + 1] = w[k + 1] + h * quad;
    }
}

/// Four-point Lagrange interpolation of nodal `values` (one component,
/// node stride `stride`, offset `offset`) at radius `r`; clamped outside.
pub fn cubic_sample<T: Real>(
    grid: &RadialGrid<T>,
    values: &[T],
    stride: usize,
    offset: usize,
    r: T,
) -> T {
    let n = grid.n_nodes;
    let at = |k: usize| values[k * stride + offset];
    if r <= T::zero() {
        return at(0);
    }
    if r >= grid.r_max {
        return at(n - 1);
    }
    let k = grid.node_below(r).min(n - 2);
    let base = k.saturating_sub(1).min(n - 4);
    let x = (r - grid.r(base)) / grid.dr;
    let mut s = T::zero();
    for i in 0..4 {
        let mut l = T::one();
        for j in 0..4 {
            if i != j {
                l = l * (x - T::of_usize(j)) / (T::of_usize(i) - T::of_usize(j));
            }
        }
        s = s + l * at(base + i);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid<f64> {
        RadialGrid::new(10.0, 101, 3).unwrap()
    }

    #[test]
    fn interval_weights_integrate_linear_functions_exactly() {
        let g = grid();
        let f: Vec<f64> = (0..g.n_nodes).map(|k| 2.0 * g.r(k) + 1.0).collect();
        for (a, b) in [
            (0.0, 10.0),
            (0.37, 4.21),
            (3.3, 3.31),
            (-1.0, 20.0),
            (5.0, 5.0),
        ] {
            let w = interval_weights(&g, a, b);
            let num: f64 = w.iter().zip(&f).map(|(w, f)| w * f).sum();
            let (a, b) = (f64::max(a, 0.0), f64::min(b, 10.0));
            let exact = (b * b + b) - (a * a + a);
            assert!((num - exact).abs() < 1e-12, "[{a},{b}]: {num} vs {exact}");
        }
        let full = interval_weights(&g, 0.0, 10.0);
        let trap = trapezoid_weights(&g);
        for (x, y) in full.iter().zip(&trap) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn cubic_sample_reproduces_cubics() {
        let g = grid();
        let p = |r: f64| r * r * r - 2.0 * r + 0.5;
        let v: Vec<f64> = (0..g.n_nodes).map(|k| p(g.r(k))).collect();
        for r in [0.0, 0.05, 0.13, 5.555, 9.97, 10.0] {
            assert!((cubic_sample(&g, &v, 1, 0, r) - p(r)).abs() < 1e-10);
        }
    }
}
