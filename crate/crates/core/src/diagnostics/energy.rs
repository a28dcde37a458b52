use super::quadrature::{interval_weights, trapezoid_weights};
use crate::potential::Potential;
use crate::radial::{OuterBc, RadialField};
use crate::scalar::Real;

/// Energy ingredients at one node, measured from a reference state `m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeEnergy<T> {
    /// `|u_r|^2 / 2`
    pub kinetic: T,
    /// `V(u) - v_ref`
    pub potential: T,
    /// `|u - m|^2 / 2`
    pub l2: T,
}

pub fn node_energy<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    m: &[T],
    v_ref: T,
    bc: OuterBc,
    k: usize,
) -> NodeEnergy<T> {
    let half = T::lit(0.5);
    let u = field.at(k);
    let mut ur2 = T::zero();
    let mut d2 = T::zero();
    for j in 0..field.n {
        let ur = field.du_dr(k, j, bc);
        ur2 = ur2 + ur * ur;
        let dv = u[j] - m[j];
        d2 = d2 + dv * dv;
    }
    NodeEnergy {
        kinetic: ur2 * half,
        potential: spec.value(u) - v_ref,
        l2: d2 * half,
    }
}

/// `int_a^b weight(r) (|u_r|^2/2 + V(u) - v_ref) dr` with the shared
/// piecewise-linear quadrature.
pub fn weighted_energy<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    v_ref: T,
    bc: OuterBc,
    weight: impl Fn(T) -> T,
    (a, b): (T, T),
) -> T {
    let w = interval_weights(&field.grid, a, b);
    let m = vec![T::zero(); field.n];
    w.iter()
        .enumerate()
        .filter(|(_, &wk)| wk != T::zero())
        .map(|(k, &wk)| {
            let e = node_energy(field, spec, &m, v_ref, bc, k);
            wk * weight(field.grid.r(k)) * (e.kinetic + e.potential)
        })
        .sum()
}

/// `int_0^{r_max} r^(d-1) (|u_r|^2/2 + V(u) - v_ref) dr`.
pub fn radial_energy<T: Real>(
    field: &RadialField<T>,
    spec: &dyn Potential<T>,
    v_ref: T,
    bc: OuterBc,
) -> T {
    let g = field.grid;
    weighted_energy(
        field,
        spec,
        v_ref,
        bc,
        |r| g.jacobian(r),
        (T::zero(), g.r_max),
    )
}

/// `int_0^{r_max} r^(d-1) |u_t|^2 dr`.
pub fn dissipation_integral<T: Real>(field: &RadialField<T>, u_t: &[T]) -> T {
    let g = field.grid;
    let w = trapezoid_weights(&g);
    (0..g.n_nodes)
        .map(|k| {
            let s: T = u_t[k * field.n..(k + 1) * field.n]
                .iter()
                .map(|&x| x * x)
                .sum();
            w[k] * g.jacobian(g.r(k)) * s
        })
        .sum()
}

/// Exact time derivative of [`radial_energy`] along a velocity field `u_t`:
/// `sum_k w_k r_k^(d-1) (u_r . (u_t)_r + grad V(u) . u_t)` with the same
/// difference stencil and weights.
pub fn radial_energy_rate<T: Real>(
    field: &RadialField<T>,
    u_t: &[T],
    spec: &dyn Potential<T>,
    bc: OuterBc,
) -> T {
    let g = field.grid;
    let n = field.n;
    let w = trapezoid_weights(&g);
    let velocity = RadialField {
        grid: g,
        n,
        values: u_t.to_vec(),
        time: field.time,
    };
    let mut grad = vec![T::zero(); n];
    (0..g.n_nodes)
        .map(|k| {
            spec.gradient(field.at(k), &mut grad);
            let mut s = T::zero();
            for j in 0..n {
                s = s + field.du_dr(k, j, bc) * velocity.du_dr(k, j, bc) + grad[j] * u_t[k * n + j];
            }
            w[k] * g.jacobian(g.r(k)) * s
        })
        .sum()
}
