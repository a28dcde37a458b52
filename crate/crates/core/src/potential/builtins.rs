use std::collections::BTreeMap;
use std::sync::Arc;

use super::{Potential, PotentialSpec};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Scalar polynomial potential `V(u) = sum_k coeffs[k] u^k`.
#[derive(Debug, Clone)]
pub struct ScalarPolynomial<T> {
    name: String,
    coeffs: Vec<T>,
    d1: Vec<T>,
    d2: Vec<T>,
}

fn horner<T: Real>(c: &[T], x: T) -> T {
    c.iter().rev().fold(T::zero(), |acc, &a| acc * x + a)
}

fn derive<T: Real>(c: &[T]) -> Vec<T> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| a * T::of_usize(k))
        .collect()
}

impl<T: Real> ScalarPolynomial<T> {
    pub fn from_coefficients(name: impl Into<String>, coeffs: Vec<T>) -> Self {
        let d1 = derive(&coeffs);
        let d2 = derive(&d1);
        Self {
            name: name.into(),
            coeffs,
            d1,
            d2,
        }
    }

    /// Potential with `V'(u) = scale * prod (u - root)` and `V(0) = 0`.
    pub fn from_derivative_roots(name: impl Into<String>, roots: &[T], scale: T) -> Self {
        let mut p = vec![scale];
        for &r in roots {
            let mut next = vec![T::zero(); p.len() + 1];
            for (k, &a) in p.iter().enumerate() {
                next[k + 1] = next[k + 1] + a;
                next[k] = next[k] - a * r;
            }
            p = next;
        }
        let mut coeffs = vec![T::zero()];
        coeffs.extend(p.iter().enumerate().map(|(k, &a)| a / T::of_usize(k + 1)));
        Self::from_coefficients(name, coeffs)
    }

    /// `V' = u (u - a)(u - 1)`: minima at 0 and 1, barrier at `a`.
    pub fn cubic(a: T) -> Self {
        Self::from_derivative_roots("cubic", &[T::zero(), a, T::one()], T::one())
    }

    /// `(u^2 - 1)^2 / 4 - tilt * u`.
    pub fn double_well(tilt: T) -> Self {
        let q = T::lit(0.25);
        Self::from_coefficients("double_well", vec![q, -tilt, -T::lit(0.5), T::zero(), q])
    }

    pub fn quadratic() -> Self {
        Self::from_coefficients("quadratic", vec![T::zero(), T::zero(), T::lit(0.5)])
    }

    /// `V' = scale * u (u - a)(u - 1)(u - 1 - b)(u - 2)`: minima at 0, 1, 2.
    ///
    /// `a` in (0, 1) and `b` in (0, 1) place the two barriers and so set the
    /// depth gaps `V(0) - V(1)` and `V(1) - V(2)`.
    pub fn triple_well(a: T, b: T, scale: T) -> Self {
        let one = T::one();
        Self::from_derivative_roots(
            "triple_well",
            &[T::zero(), a, one, one + b, one + one],
            scale,
        )
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    pub fn derivative(&self, x: T) -> T {
        horner(&self.d1, x)
    }

    pub fn second_derivative(&self, x: T) -> T {
        horner(&self.d2, x)
    }
}

impl<T: Real> Potential<T> for ScalarPolynomial<T> {
    fn dim(&self) -> usize {
        1
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, u: &[T]) -> T {
        horner(&self.coeffs, u[0])
    }
    fn gradient(&self, u: &[T], out: &mut [T]) {
        out[0] = horner(&self.d1, u[0]);
    }
    fn hessian(&self, u: &[T], out: &mut [T]) {
        out[0] = horner(&self.d2, u[0]);
    }
}

/// Two scalar double wells coupled by `gamma * u1 * u2`.
#[derive(Debug, Clone)]
pub struct CoupledDoubleWell<T> {
    pub gamma: T,
}

impl<T: Real> Potential<T> for CoupledDoubleWell<T> {
    fn dim(&self) -> usize {
        2
    }
    fn name(&self) -> &str {
        "coupled_double_well"
    }
    fn value(&self, u: &[T]) -> T {
        let q = T::lit(0.25);
        let w = |x: T| (x * x - T::one()) * (x * x - T::one()) * q;
        w(u[0]) + w(u[1]) + self.gamma * u[0] * u[1]
    }
    fn gradient(&self, u: &[T], out: &mut [T]) {
        out[0] = u[0] * u[0] * u[0] - u[0] + self.gamma * u[1];
        out[1] = u[1] * u[1] * u[1] - u[1] + self.gamma * u[0];
    }
    fn hessian(&self, u: &[T], out: &mut [T]) {
        let three = T::lit(3.0);
        out[0] = three * u[0] * u[0] - T::one();
        out[1] = self.gamma;
        out[2] = self.gamma;
        out[3] = three * u[1] * u[1] - T::one();
    }
}

type ScalarFn<T> = dyn Fn(&[T]) -> T + Send + Sync;
type VectorFn<T> = dyn Fn(&[T], &mut [T]) + Send + Sync;

/// Potential assembled from user-supplied closures.
pub struct FnPotential<T> {
    pub name: String,
    pub n: usize,
    pub eval: Box<ScalarFn<T>>,
    pub grad: Box<VectorFn<T>>,
    pub hess: Box<VectorFn<T>>,
}

impl<T: Real> Potential<T> for FnPotential<T> {
    fn dim(&self) -> usize {
        self.n
    }
    fn name(&self) -> &str {
        &self.name
    }
    fn value(&self, u: &[T]) -> T {
        (self.eval)(u)
    }
    fn gradient(&self, u: &[T], out: &mut [T]) {
        (self.grad)(u, out)
    }
    fn hessian(&self, u: &[T], out: &mut [T]) {
        (self.hess)(u, out)
    }
}

/// Catalogue entry: name, parameters with defaults, one-line description.
#[derive(Debug, Clone)]
pub struct BuiltinInfo {
    pub name: &'static str,
    pub params: &'static [(&'static str, f64)],
    pub description: &'static str,
}

/// Default triple-well barrier positions and scale.
pub const TRIPLE_WELL_DEFAULTS: [(&str, f64); 3] = [("a", 0.55), ("b", 0.8), ("scale", 2.0)];

pub fn builtin_potentials() -> Vec<BuiltinInfo> {
    vec![
        BuiltinInfo {
            name: "cubic",
            params: &[("a", 0.25)],
            description: "V' = u(u-a)(u-1); minima 0 and 1",
        },
        BuiltinInfo {
            name: "double_well",
            params: &[("tilt", 0.0)],
            description: "(u^2-1)^2/4 - tilt*u",
        },
        BuiltinInfo {
            name: "triple_well",
            params: &TRIPLE_WELL_DEFAULTS,
            description: "V' = scale*u(u-a)(u-1)(u-1-b)(u-2); minima 0, 1, 2",
        },
        BuiltinInfo {
            name: "quadratic",
            params: &[],
            description: "u^2/2",
        },
        BuiltinInfo {
            name: "coupled_double_well",
            params: &[("gamma", 0.0)],
            description: "(u1^2-1)^2/4 + (u2^2-1)^2/4 + gamma*u1*u2",
        },
    ]
}

/// Instantiates a builtin potential; missing parameters take their defaults.
pub fn builtin<T: Real>(name: &str, params: &BTreeMap<String, f64>) -> Result<PotentialSpec<T>> {
    let info = builtin_potentials()
        .into_iter()
        .find(|b| b.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown potential '{name}'")))?;
    for key in params.keys() {
        if !info.params.iter().any(|(p, _)| p == key) {
            return Err(Error::InvalidArgument(format!(
                "unknown parameter '{key}' for potential '{name}'"
            )));
        }
    }
    let get = |key: &str| -> T {
        let default = info.params.iter().find(|(p, _)| *p == key).map(|(_, v)| *v);
        T::lit(params.get(key).copied().or(default).unwrap_or(0.0))
    };
    let spec: PotentialSpec<T> = match name {
        "cubic" => Arc::new(ScalarPolynomial::cubic(get("a"))),
        "double_well" => Arc::new(ScalarPolynomial::double_well(get("tilt"))),
        "triple_well" => Arc::new(ScalarPolynomial::triple_well(
            get("a"),
            get("b"),
            get("scale"),
        )),
        "quadratic" => Arc::new(ScalarPolynomial::quadratic()),
        "coupled_double_well" => Arc::new(CoupledDoubleWell {
            gamma: get("gamma"),
        }),
        _ => unreachable!(),
    };
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_coefficients_match_closed_form() {
        let a = 0.25f64;
        let v = ScalarPolynomial::cubic(a);
        for u in [-0.7f64, 0.0, 0.3, 1.0, 1.9] {
            let closed = u.powi(4) / 4.0 - (1.0 + a) * u.powi(3) / 3.0 + a * u * u / 2.0;
            assert!((v.value(&[u]) - closed).abs() < 1e-14);
            assert!((v.derivative(u) - u * (u - a) * (u - 1.0)).abs() < 1e-14);
        }
        // V(1) = (2a - 1)/12
        assert!((v.value(&[1.0]) + 1.0f64 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_names_and_params_are_rejected() {
        assert!(builtin::<f64>("nope", &BTreeMap::new()).is_err());
        let mut p = BTreeMap::new();
        p.insert("zzz".to_string(), 1.0);
        assert!(builtin::<f64>("cubic", &p).is_err());
    }

    #[test]
    fn triple_well_defaults_have_ordered_minima() {
        let v = builtin::<f64>("triple_well", &BTreeMap::new()).unwrap();
        let bounds = crate::potential::SearchBox::cube(1, -1.0, 3.0).unwrap();
        let minima = crate::potential::find_minima(v.as_ref(), &bounds, 81).unwrap();
        let mut by_location: Vec<_> = minima.iter().map(|m| (m.location[0], m.value)).collect();
        by_location.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        assert_eq!(by_location.len(), 3);
        for (m, expect) in by_location.iter().zip([0.0, 1.0, 2.0]) {
            assert!((m.0 - expect).abs() < 1e-9);
        }
        assert!(by_location[0].1 < by_location[1].1 && by_location[1].1 < by_location[2].1);
        assert!(minima.iter().all(|m| m.smallest_eigenvalue() > 0.1));
    }
}
