//! Localized energies, firewall functionals, escape points and the audits
//! of the firewall lemmas.

mod dissipation;
mod energy;
mod firewall;
mod frame;
mod observers;
mod quadrature;
mod regression;
mod standing;

pub use dissipation::{cauchy_time, delta_dissip, delta_dissip_at, doubling_gaps, residual_energy};
pub use energy::{
    dissipation_integral, node_energy, radial_energy, radial_energy_rate, weighted_energy,
    NodeEnergy,
};
pub use firewall::{
    audit_escape_implication, audit_firewall_decay, audit_invasion_bound, escape_point, escape_set,
    firewall_f0, firewall_profile, hull_noesc, r_esc_hull, r_hom, weight_t_rho_psi0,
    EscapeImplicationReport, FirewallConfig, FirewallDecayAccumulator, FirewallDecayReport,
    FirewallProfile, FirewallSample, InvasionBoundReport,
};
pub use frame::{traveling_frame_series, FrameSample, TravelingFrameConfig};
pub use observers::{
    EnergyBalance, EnergyRecord, EscapeTracker, FirewallDecayAudit, Frame, Recorder,
    ResidualEnergyTracker, TrackerSample, Trajectory,
};
pub use quadrature::{cubic_sample, interval_weights, trapezoid_weights};
pub use regression::{speed_estimate, SpeedEstimate};
pub use standing::{
    standing_frame_margins, standing_frame_series, StandingFrameConfig, StandingSample,
};
