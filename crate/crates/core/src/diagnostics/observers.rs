use std::fs;
use std::io::Write as _;
use std::path::Path;

use super::dissipation::residual_energy;
use super::energy::{dissipation_integral, radial_energy, radial_energy_rate};
use super::firewall::{
    escape_point, firewall_profile, r_esc_hull, r_hom, FirewallConfig, FirewallDecayAccumulator,
    FirewallDecayReport,
};
use crate::error::Result;
use crate::potential::{MinimumPoint, PotentialSpec};
use crate::radial::{Observer, OuterBc, RadialField, RadialGrid, Snapshot};
use crate::scalar::Real;

/// A stored state together with its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame<T> {
    pub field: RadialField<T>,
    pub u_t: Vec<T>,
}

impl<T: Real> Frame<T> {
    pub fn time(&self) -> T {
        self.field.time
    }
}

/// Frames of one run, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub outer_bc: OuterBc,
    pub frames: Vec<Frame<T>>,
}

impl<T: Real> Trajectory<T> {
    pub fn new(outer_bc: OuterBc) -> Self {
        Self {
            outer_bc,
            frames: Vec::new(),
        }
    }

    pub fn grid(&self) -> Option<RadialGrid<T>> {
        self.frames.first().map(|f| f.field.grid)
    }

    pub fn times(&self) -> Vec<T> {
        self.frames.iter().map(|f| f.field.time).collect()
    }

    /// Frame whose time is closest to `t`.
    pub fn nearest(&self, t: T) -> Option<&Frame<T>> {
        self.frames.iter().min_by(|a, b| {
            (a.field.time - t)
                .abs()
                .partial_cmp(&(b.field.time - t).abs())
                .unwrap()
        })
    }

    /// Frames with `a <= t <= b`.
    pub fn window(&self, a: T, b: T) -> Self {
        Self {
            outer_bc: self.outer_bc,
            frames: self
                .frames
                .iter()
                .filter(|f| f.field.time >= a && f.field.time <= b)
                .cloned()
                .collect(),
        }
    }
}

/// Stores every observed state from time `t_from` on.
#[derive(Debug, Clone)]
pub struct Recorder<T> {
    pub cadence: Option<usize>,
    pub t_from: T,
    pub trajectory: Trajectory<T>,
}

impl<T: Real> Recorder<T> {
    pub fn new(outer_bc: OuterBc, cadence: Option<usize>) -> Self {
        Self {
            cadence,
            t_from: T::neg_infinity(),
            trajectory: Trajectory::new(outer_bc),
        }
    }

    pub fn from_time(mut self, t_from: T) -> Self {
        self.t_from = t_from;
        self
    }
}

impl<T: Real> Observer<T> for Recorder<T> {
    fn name(&self) -> &str {
        "recorder"
    }

    fn cadence(&self) -> Option<usize> {
        self.cadence
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()> {
        if snap.field.time >= self.t_from {
            self.trajectory.frames.push(Frame {
                field: snap.field.clone(),
                u_t: snap.u_t.to_vec(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerSample<T> {
    pub t: T,
    pub r_hom: Option<T>,
    /// `-inf` when no escape point exists.
    pub r_esc: T,
    pub r_esc_hull: Option<T>,
}

/// Records `r_Hom`, `r_Esc` and, given firewall constants, the hull-based
/// escape point.
pub struct EscapeTracker<T: Real> {
    pub spec: PotentialSpec<T>,
    pub m: MinimumPoint<T>,
    pub d_esc: T,
    pub outer_bc: OuterBc,
    pub firewall: Option<FirewallConfig<T>>,
    pub cadence: Option<usize>,
    pub samples: Vec<TrackerSample<T>>,
    warned: bool,
}

impl<T: Real> EscapeTracker<T> {
    pub fn new(spec: PotentialSpec<T>, m: MinimumPoint<T>, d_esc: T, outer_bc: OuterBc) -> Self {
        Self {
            spec,
            m,
            d_esc,
            outer_bc,
            firewall: None,
            cadence: None,
            samples: Vec::new(),
            warned: false,
        }
    }

    pub fn with_firewall(mut self, cfg: FirewallConfig<T>) -> Self {
        self.firewall = Some(cfg);
        self
    }

    pub fn with_cadence(mut self, every: usize) -> Self {
        self.cadence = Some(every);
        self
    }

    pub fn times(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn escape_points(&self) -> Vec<T> {
        self.samples.iter().map(|s| s.r_esc).collect()
    }

    /// CSV with columns `t,r_hom,r_Esc,r_esc_hull`; missing values are empty.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        writeln!(f, "t,r_hom,r_Esc,r_esc_hull")?;
        let opt = |x: Option<T>| x.map_or(String::new(), |v| v.to_string());
        for s in &self.samples {
            writeln!(
                f,
                "{},{},{},{}",
                s.t,
                opt(s.r_hom),
                s.r_esc,
                opt(s.r_esc_hull)
            )?;
        }
        Ok(())
    }
}

impl<T: Real> Observer<T> for EscapeTracker<T> {
    fn name(&self) -> &str {
        "escape_tracker"
    }

    fn cadence(&self) -> Option<usize> {
        self.cadence
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()> {
        let field = snap.field;
        let hom = r_hom(field, &self.m, self.d_esc);
        let r_esc = hom.map_or(T::neg_infinity(), |h| {
            escape_point(field, &self.m, self.d_esc, h)
        });
        let hull = match (hom, &self.firewall) {
            (Some(h), Some(cfg)) => {
                let p =
                    firewall_profile(field, None, cfg, self.spec.as_ref(), &self.m, self.outer_bc);
                r_esc_hull(&p, h, cfg)
            }
            _ => None,
        };
        if !self.warned && r_esc > T::lit(0.8) * field.grid.r_max {
            log::warn!(
                "escape point {} passed 80% of r_max = {} at t = {}",
                r_esc,
                field.grid.r_max,
                field.time
            );
            self.warned = true;
        }
        self.samples.push(TrackerSample {
            t: field.time,
            r_hom: hom,
            r_esc,
            r_esc_hull: hull,
        });
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord<T> {
    pub t: T,
    pub energy: T,
    /// `dE/dt` of the discrete energy along the semi-discrete flow.
    pub rate: T,
    pub dissipation: T,
}

/// Records the radial energy, its exact rate of change along the
/// semi-discrete flow and the dissipation, so that `dE/dt = -D` can be
/// checked at every observation.
pub struct EnergyBalance<T: Real> {
    pub spec: PotentialSpec<T>,
    pub v_ref: T,
    pub outer_bc: OuterBc,
    pub cadence: Option<usize>,
    pub records: Vec<EnergyRecord<T>>,
}

impl<T: Real> EnergyBalance<T> {
    pub fn new(spec: PotentialSpec<T>, v_ref: T, outer_bc: OuterBc) -> Self {
        Self {
            spec,
            v_ref,
            outer_bc,
            cadence: Some(1),
            records: Vec::new(),
        }
    }

    /// `(t_mid, (E_1 - E_0)/dt, -(D_0 + D_1)/2)` for consecutive records.
    pub fn difference_rates(&self) -> Vec<(T, T, T)> {
        let half = T::lit(0.5);
        self.records
            .windows(2)
            .map(|w| {
                let (a, b) = (&w[0], &w[1]);
                (
                    (a.t + b.t) * half,
                    (b.energy - a.energy) / (b.t - a.t),
                    -(a.dissipation + b.dissipation) * half,
                )
            })
            .collect()
    }

    /// `(t, dE/dt, dE/dt + D)` for records with `t >= t_from`.
    pub fn mismatches(&self, t_from: T) -> Vec<(T, T, T)> {
        self.records
            .iter()
            .filter(|r| r.t >= t_from)
            .map(|r| (r.t, r.rate, r.rate + r.dissipation))
            .collect()
    }

    /// Largest `|dE/dt + D|`.
    pub fn worst_mismatch(&self, t_from: T) -> T {
        self.mismatches(t_from)
            .into_iter()
            .map(|m| m.2.abs())
            .fold(T::zero(), T::max)
    }

    /// Largest `|dE/dt + D| / (1 + |dE/dt|)`.
    pub fn worst_scaled_mismatch(&self, t_from: T) -> T {
        self.mismatches(t_from)
            .into_iter()
            .map(|(_, de, m)| m.abs() / (T::one() + de.abs()))
            .fold(T::zero(), T::max)
    }
}

impl<T: Real> Observer<T> for EnergyBalance<T> {
    fn name(&self) -> &str {
        "energy_balance"
    }

    fn cadence(&self) -> Option<usize> {
        self.cadence
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()> {
        let spec = self.spec.as_ref();
        self.records.push(EnergyRecord {
            t: snap.field.time,
            energy: radial_energy(snap.field, spec, self.v_ref, self.outer_bc),
            rate: radial_energy_rate(snap.field, snap.u_t, spec, self.outer_bc),
            dissipation: dissipation_integral(snap.field, snap.u_t),
        });
        Ok(())
    }
}

/// Runs the firewall decay audit during integration.
pub struct FirewallDecayAudit<T: Real> {
    pub spec: PotentialSpec<T>,
    pub m: MinimumPoint<T>,
    pub outer_bc: OuterBc,
    pub cadence: Option<usize>,
    acc: FirewallDecayAccumulator<T>,
}

impl<T: Real> FirewallDecayAudit<T> {
    pub fn new(
        spec: PotentialSpec<T>,
        m: MinimumPoint<T>,
        cfg: FirewallConfig<T>,
        rho_stride: usize,
        outer_bc: OuterBc,
    ) -> Self {
        Self {
            spec,
            m,
            outer_bc,
            cadence: None,
            acc: FirewallDecayAccumulator::new(cfg, rho_stride),
        }
    }

    pub fn with_cadence(mut self, every: usize) -> Self {
        self.cadence = Some(every);
        self
    }

    pub fn from_time(mut self, t: T) -> Self {
        self.acc.t_from = t;
        self
    }

    pub fn with_log(mut self) -> Self {
        self.acc = self.acc.with_log();
        self
    }

    pub fn report(&self) -> FirewallDecayReport<T> {
        self.acc.report()
    }

    /// CSV with columns `t,rho,F0,escape_measure,margin`; needs
    /// [`with_log`](FirewallDecayAudit::with_log).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        writeln!(f, "t,rho,F0,escape_measure,margin")?;
        for s in self.acc.samples() {
            writeln!(
                f,
                "{},{},{:e},{:e},{:e}",
                s.t,
                s.rho,
                s.f0.as_f64(),
                s.escape_measure.as_f64(),
                s.margin.as_f64()
            )?;
        }
        Ok(())
    }
}

impl<T: Real> Observer<T> for FirewallDecayAudit<T> {
    fn name(&self) -> &str {
        "firewall_decay_audit"
    }

    fn cadence(&self) -> Option<usize> {
        self.cadence
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()> {
        let cfg = self.acc.cfg;
        let p = firewall_profile(
            snap.field,
            Some(snap.u_t),
            &cfg,
            self.spec.as_ref(),
            &self.m,
            self.outer_bc,
        );
        self.acc.push(snap.field.time, snap.field.grid.dr, p)
    }
}

/// Residual energy over `[0, c t]` at every observed time with `c t <= r_max`.
pub struct ResidualEnergyTracker<T: Real> {
    pub spec: PotentialSpec<T>,
    pub m: MinimumPoint<T>,
    pub c: T,
    pub outer_bc: OuterBc,
    pub cadence: Option<usize>,
    /// `(t, residual energy)`.
    pub series: Vec<(T, T)>,
}

impl<T: Real> ResidualEnergyTracker<T> {
    pub fn new(spec: PotentialSpec<T>, m: MinimumPoint<T>, c: T, outer_bc: OuterBc) -> Self {
        Self {
            spec,
            m,
            c,
            outer_bc,
            cadence: None,
            series: Vec::new(),
        }
    }

    pub fn with_cadence(mut self, every: usize) -> Self {
        self.cadence = Some(every);
        self
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        writeln!(f, "t,c,residual_energy")?;
        for (t, e) in &self.series {
            writeln!(f, "{},{},{:e}", t, self.c, e.as_f64() + 0.0)?;
        }
        Ok(())
    }
}

impl<T: Real> Observer<T> for ResidualEnergyTracker<T> {
    fn name(&self) -> &str {
        "residual_energy"
    }

    fn cadence(&self) -> Option<usize> {
        self.cadence
    }

    fn observe(&mut self, snap: &Snapshot<'_, T>) -> Result<()> {
        match residual_energy(
            snap.field,
            self.spec.as_ref(),
            self.c,
            &self.m,
            self.outer_bc,
        ) {
            Ok(e) => self.series.push((snap.field.time, e)),
            Err(crate::error::Error::WindowExceedsDomain) => {}
            Err(e) => return Err(e),
        }
        Ok(())
    }
}
