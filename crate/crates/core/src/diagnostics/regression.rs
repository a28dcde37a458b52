use crate::error::{Error, Result};
use crate::scalar::Real;

/// Least-squares slope with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate<T> {
    pub slope: T,
    pub stderr: T,
    pub intercept: T,
    pub samples: usize,
    pub window: (T, T),
}

/// Regression of `positions` against `times` over `[t_a, t_b]`; non-finite
/// positions (for example the empty-set sentinel) are skipped.
pub fn speed_estimate<T: Real>(
    times: &[T],
    positions: &[T],
    window: (T, T),
) -> Result<SpeedEstimate<T>> {
    let pts: Vec<(T, T)> = times
        .iter()
        .zip(positions)
        .filter(|(t, x)| **t >= window.0 && **t <= window.1 && x.is_finite())
        .map(|(&t, &x)| (t, x))
        .collect();
    let m = pts.len();
    if m < 10 {
        return Err(Error::TooFewSamples { needed: 10, got: m });
    }
    let mf = T::of_usize(m);
    let tm = pts.iter().map(|p| p.0).sum::<T>() / mf;
    let xm = pts.iter().map(|p| p.1).sum::<T>() / mf;
    let stt: T = pts.iter().map(|p| (p.0 - tm) * (p.0 - tm)).sum();
    let stx: T = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    if !(stt > T::zero()) {
        return Err(Error::EmptyWindow);
    }
    let slope = stx / stt;
    let intercept = xm - slope * tm;
    let sse: T = pts
        .iter()
        .map(|p| {
            let e = p.1 - intercept - slope * p.0;
            e * e
        })
        .sum();
    let stderr = (sse / T::of_usize(m - 2) / stt).sqrt();
    Ok(SpeedEstimate {
        slope,
        stderr,
        intercept,
        samples: m,
        window,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line_and_constant() {
        let t: Vec<f64> = (0..20).map(|k| k as f64).collect();
        let x: Vec<f64> = t.iter().map(|t| 0.5 * t + 3.0).collect();
        let e = speed_estimate(&t, &x, (0.0, 19.0)).unwrap();
        assert!((e.slope - 0.5).abs() < 1e-14 && e.stderr < 1e-12);
        let c = vec![2.0; 20];
        let e = speed_estimate(&t, &c, (0.0, 19.0)).unwrap();
        assert_eq!((e.slope, e.stderr), (0.0, 0.0));
    }

    #[test]
    fn too_few_samples() {
        let t = [0.0, 1.0, 2.0];
        assert!(matches!(
            speed_estimate(&t, &t, (0.0, 2.0)),
            Err(Error::TooFewSamples { needed: 10, got: 3 })
        ));
    }
}
