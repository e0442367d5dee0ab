//! Far-field patterns, 1-bit surface configuration and beam experiments.
//!
//! In the far field every element sees the same incident and departure
//! angles, the `1/d` amplitudes become common factors and only the
//! per-element path phase survives. With `u` the unit vector from the
//! surface toward the source or receiver, `exp(-j 2 pi d / lambda)` reduces
//! to `exp(j 2 pi u . r_m / lambda)` up to a constant.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Scenario;
use crate::element::{ElementState, InteractionMode, ResponseModel};
use crate::error::{Error, Result};
use crate::geometry::{angular_distance_deg, wrap_azimuth, SidedAngle, SphericalAngle, Vec3};
use crate::surface::SurfaceConfiguration;

/// Largest elevation a sweep will evaluate.
pub const MAX_SWEEP_ELEVATION_DEG: f64 = 89.9;

/// Floor applied before converting a field magnitude to dB.
pub const FIELD_FLOOR: f64 = 1e-15;

/// Sampled departure directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub theta_start_deg: f64,
    pub theta_stop_deg: f64,
    pub theta_step_deg: f64,
    pub phis_deg: Vec<f64>,
}

impl SweepGrid {
    /// The phi = 0 / 180 deg plane, elevations 0..=89.
    pub fn plane_cut(step_deg: f64) -> Self {
        Self {
            theta_start_deg: 0.0,
            theta_stop_deg: 89.0,
            theta_step_deg: step_deg,
            phis_deg: vec![0.0, 180.0],
        }
    }

    /// Full hemisphere with the same step in both angles.
    pub fn hemisphere(step_deg: f64) -> Self {
        let n = (360.0 / step_deg).round() as usize;
        Self {
            theta_start_deg: 0.0,
            theta_stop_deg: 89.0,
            theta_step_deg: step_deg,
            phis_deg: (0..n).map(|i| i as f64 * step_deg).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.theta_step_deg > 0.0
            && self.theta_step_deg.is_finite()
            && self.theta_start_deg >= 0.0
            && self.theta_stop_deg >= self.theta_start_deg
            && !self.phis_deg.is_empty()
            && self.phis_deg.iter().all(|p| p.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid sweep grid {self:?}")))
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        let n = ((self.theta_stop_deg - self.theta_start_deg) / self.theta_step_deg + 1e-9)
            .floor() as usize;
        let mut out: Vec<f64> = (0..=n)
            .map(|i| (self.theta_start_deg + i as f64 * self.theta_step_deg).min(MAX_SWEEP_ELEVATION_DEG))
            .collect();
        out.dedup();
        out
    }

    /// All (theta, phi) pairs, theta-major.
    pub fn directions(&self) -> Vec<(f64, f64)> {
        let thetas = self.thetas();
        thetas
            .iter()
            .flat_map(|&t| self.phis_deg.iter().map(move |&p| (t, wrap_azimuth(p))))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternSample {
    pub theta_deg: f64,
    pub phi_deg: f64,
    pub power_db: f64,
    pub field: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternSweep {
    pub mode: InteractionMode,
    pub incident: SidedAngle,
    pub model: ResponseModel,
    pub grid: SweepGrid,
    pub samples: Vec<PatternSample>,
}

impl PatternSweep {
    pub fn departure_side(&self) -> crate::geometry::Side {
        self.mode.departure_side(self.incident.side)
    }

    pub fn peak_power_db(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.power_db)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub fn field_to_db(field: Complex64) -> f64 {
    20.0 * field.norm().max(FIELD_FLOOR).log10()
}

/// Far-field response of the surface for a plane wave from `inc`,
/// observed toward `dep`, under the chosen element physics.
pub fn far_field(
    scn: &Scenario,
    config: &SurfaceConfiguration,
    inc: &SidedAngle,
    dep: &SidedAngle,
    model: ResponseModel,
) -> Result<Complex64> {
    config.expect_len(scn.num_elements())?;
    let mode = InteractionMode::between(inc.side, dep.side);
    let kw = wave_sum(scn, inc, dep);
    let gains = state_gains(scn, model, mode, inc, dep)?;
    Ok(scn
        .grid
        .positions()
        .iter()
        .zip(config.states())
        .map(|(r, s)| geometric_phasor(kw, *r) * gains[*s as usize])
        .sum())
}

/// `2 pi / lambda * (u_inc + u_dep)`; symmetric in its arguments.
fn wave_sum(scn: &Scenario, inc: &SidedAngle, dep: &SidedAngle) -> Vec3 {
    (inc.unit_vector() + dep.unit_vector()) * (2.0 * PI / scn.wavelength())
}

fn geometric_phasor(kw: Vec3, r: Vec3) -> Complex64 {
    Complex64::from_polar(1.0, kw.dot(r))
}

/// Element gain per state, indexed by `ElementState as usize`.
fn state_gains(
    scn: &Scenario,
    model: ResponseModel,
    mode: InteractionMode,
    inc: &SidedAngle,
    dep: &SidedAngle,
) -> Result<[Complex64; 2]> {
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for s in ElementState::ALL {
        out[s as usize] = scn.element.response(
            model,
            s,
            mode,
            inc.elevation_deg(),
            dep.elevation_deg(),
        )?;
    }
    Ok(out)
}

/// Power pattern over `grid` on the departure side implied by `mode`,
/// using the angle-aware element physics.
pub fn far_field_pattern(
    scn: &Scenario,
    config: &SurfaceConfiguration,
    incident: &SidedAngle,
    mode: InteractionMode,
    grid: &SweepGrid,
) -> Result<PatternSweep> {
    far_field_pattern_with(scn, config, incident, mode, grid, ResponseModel::AngleAware)
}

pub fn far_field_pattern_with(
    scn: &Scenario,
    config: &SurfaceConfiguration,
    incident: &SidedAngle,
    mode: InteractionMode,
    grid: &SweepGrid,
    model: ResponseModel,
) -> Result<PatternSweep> {
    grid.validate()?;
    config.expect_len(scn.num_elements())?;
    let side = mode.departure_side(incident.side);
    let positions = scn.grid.positions();
    let samples = grid
        .directions()
        .par_iter()
        .map(|&(theta, phi)| {
            let dep = SidedAngle {
                angle: SphericalAngle {
                    elevation_deg: theta,
                    azimuth_deg: phi,
                },
                side,
            };
            let kw = wave_sum(scn, incident, &dep);
            let gains = state_gains(scn, model, mode, incident, &dep)?;
            let field: Complex64 = positions
                .iter()
                .zip(config.states())
                .map(|(r, s)| geometric_phasor(kw, *r) * gains[*s as usize])
                .sum();
            Ok(PatternSample {
                theta_deg: theta,
                phi_deg: phi,
                power_db: field_to_db(field),
                field,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PatternSweep {
        mode,
        incident: *incident,
        model,
        grid: grid.clone(),
        samples,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeamReport {
    pub main_beam: SidedAngle,
    pub peak_power_db: f64,
    pub pointing_error_deg: Option<f64>,
    pub gain_loss_db: Option<f64>,
}

impl BeamReport {
    pub fn with_target(mut self, target: &SidedAngle) -> Self {
        self.pointing_error_deg = Some(angular_distance_deg(&self.main_beam, target));
        self
    }

    /// Flat `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut out = format!(
            "main_beam_theta_deg={}\nmain_beam_phi_deg={}\nmain_beam_side={}\npeak_power_db={}\n",
            self.main_beam.elevation_deg(),
            self.main_beam.azimuth_deg(),
            self.main_beam.side,
            self.peak_power_db
        );
        if let Some(e) = self.pointing_error_deg {
            out.push_str(&format!("pointing_error_deg={e}\n"));
        }
        if let Some(g) = self.gain_loss_db {
            out.push_str(&format!("gain_loss_db={g}\n"));
        }
        out
    }
}

/// Grid argmax of power. Ties go to the smaller elevation, then the
/// smaller azimuth.
pub fn main_beam(sweep: &PatternSweep) -> Result<BeamReport> {
    let best = sweep
        .samples
        .iter()
        .reduce(|best, s| {
            let (p, q) = (s.field.norm_sqr(), best.field.norm_sqr());
            let better = p > q
                || (p == q
                    && (s.theta_deg < best.theta_deg
                        || (s.theta_deg == best.theta_deg && s.phi_deg < best.phi_deg)));
            if better {
                s
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Domain("empty pattern sweep".into()))?;
    Ok(BeamReport {
        main_beam: SidedAngle {
            angle: SphericalAngle {
                elevation_deg: best.theta_deg,
                azimuth_deg: best.phi_deg,
            },
            side: sweep.departure_side(),
        },
        peak_power_db: best.power_db,
        pointing_error_deg: None,
        gain_loss_db: None,
    })
}

/// Picks one of two options per element so that `|sum_m c_m[s_m]|` is
/// maximal.
///
/// For an optimal choice with resultant direction `a`, every element's
/// option maximizes its projection onto `a`; otherwise switching it would
/// lengthen the sum. So the optimum is the per-element projection winner
/// for some reference `a`, and that winner only changes where
/// `Re((c1 - c0) e^{-ja}) = 0`. Evaluating one reference inside each arc
/// between those breakpoints covers every candidate.
pub fn best_binary_choice(options: &[[Complex64; 2]]) -> Vec<usize> {
    let tau = 2.0 * PI;
    let mut breaks: Vec<f64> = options
        .iter()
        .filter_map(|c| {
            let d = c[1] - c[0];
            (d.norm() > 0.0).then(|| d.arg())
        })
        .flat_map(|a| [(a + PI / 2.0).rem_euclid(tau), (a - PI / 2.0).rem_euclid(tau)])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();

    let choose = |alpha: f64| -> Vec<usize> {
        let rot = Complex64::from_polar(1.0, -alpha);
        options
            .iter()
            .map(|c| usize::from((c[1] * rot).re > (c[0] * rot).re))
            .collect()
    };
    let total = |pick: &[usize]| -> f64 {
        options
            .iter()
            .zip(pick)
            .map(|(c, &s)| c[s])
            .sum::<Complex64>()
            .norm()
    };

    if breaks.is_empty() {
        return vec![0; options.len()];
    }
    let mut best = choose(breaks[0] + PI);
    let mut best_norm = total(&best);
    for i in 0..breaks.len() {
        let lo = breaks[i];
        let hi = if i + 1 < breaks.len() {
            breaks[i + 1]
        } else {
            breaks[0] + tau
        };
        let pick = choose((lo + hi) / 2.0);
        let n = total(&pick);
        if n > best_norm {
            best = pick;
            best_norm = n;
        }
    }
    best
}

/// 1-bit configuration steering a plane wave from `incident` toward
/// `target`, designed under `model`.
///
/// Each element's two states are scored by their modeled contribution
/// `exp(j k (u_inc + u_tgt) . r_m) * g(state)` at the target; the states
/// are then chosen independently per element against the best common
/// reference phase.
pub fn configure_surface(
    scn: &Scenario,
    incident: &SidedAngle,
    target: &SidedAngle,
    model: ResponseModel,
) -> Result<SurfaceConfiguration> {
    let mode = InteractionMode::between(incident.side, target.side);
    let kw = wave_sum(scn, incident, target);
    let gains = state_gains(scn, model, mode, incident, target)?;
    let options: Vec<[Complex64; 2]> = scn
        .grid
        .positions()
        .iter()
        .map(|r| {
            let p = geometric_phasor(kw, *r);
            [p * gains[0], p * gains[1]]
        })
        .collect();
    let pick = best_binary_choice(&options);
    Ok(SurfaceConfiguration::new(
        pick.into_iter().map(|i| ElementState::ALL[i]).collect(),
    ))
}

/// How the configuration for a beam experiment is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BeamDesign {
    /// Steer toward an explicit target.
    Target {
        target: SidedAngle,
        model: ResponseModel,
    },
    /// Try every sweep direction as a target; keep the one whose design
    /// delivers the most power to it.
    BestTarget { model: ResponseModel },
    /// Use the given configuration.
    Fixed(SurfaceConfiguration),
}

/// Steering target whose own design delivers the most power toward it.
pub fn best_steering_target(
    scn: &Scenario,
    incident: &SidedAngle,
    mode: InteractionMode,
    grid: &SweepGrid,
    model: ResponseModel,
) -> Result<(SidedAngle, SurfaceConfiguration)> {
    grid.validate()?;
    let side = mode.departure_side(incident.side);
    let scored = grid
        .directions()
        .par_iter()
        .map(|&(theta, phi)| {
            let target = SidedAngle {
                angle: SphericalAngle {
                    elevation_deg: theta,
                    azimuth_deg: phi,
                },
                side,
            };
            let config = configure_surface(scn, incident, &target, model)?;
            let power = far_field(scn, &config, incident, &target, ResponseModel::AngleAware)?
                .norm_sqr();
            Ok((power, target, config))
        })
        .collect::<Result<Vec<_>>>()?;
    let (_, target, config) = scored
        .into_iter()
        .reduce(|best, cand| {
            let (a, b) = (&cand.1.angle, &best.1.angle);
            let better = cand.0 > best.0
                || (cand.0 == best.0
                    && (a.elevation_deg < b.elevation_deg
                        || (a.elevation_deg == b.elevation_deg && a.azimuth_deg < b.azimuth_deg)));
            if better {
                cand
            } else {
                best
            }
        })
        .ok_or_else(|| Error::Domain("empty sweep grid".into()))?;
    Ok((target, config))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamReciprocityReport {
    pub config: SurfaceConfiguration,
    pub target: Option<SidedAngle>,
    pub incident0: SidedAngle,
    pub beam1: BeamReport,
    pub beam2: BeamReport,
    pub deviation_deg: f64,
    pub grid_step_deg: f64,
    pub reciprocal: bool,
}

/// Round trip under a fixed configuration: incident0 -> beam1, then a wave
/// arriving from beam1 -> beam2. Reciprocal when beam2 lands within one
/// grid step of incident0.
pub fn beam_reciprocity_experiment(
    scn: &Scenario,
    incident0: &SidedAngle,
    mode: InteractionMode,
    grid: &SweepGrid,
    design: &BeamDesign,
) -> Result<BeamReciprocityReport> {
    let (config, target) = match design {
        BeamDesign::Target { target, model } => {
            if InteractionMode::between(incident0.side, target.side) != mode {
                return Err(Error::ModeMismatch(format!(
                    "target on {} side cannot be reached by {mode} from {} side",
                    target.side, incident0.side
                )));
            }
            (configure_surface(scn, incident0, target, *model)?, Some(*target))
        }
        BeamDesign::BestTarget { model } => {
            let (t, c) = best_steering_target(scn, incident0, mode, grid, *model)?;
            (c, Some(t))
        }
        BeamDesign::Fixed(c) => (c.clone(), None),
    };
    let sweep1 = far_field_pattern(scn, &config, incident0, mode, grid)?;
    let beam1 = main_beam(&sweep1)?;
    let sweep2 = far_field_pattern(scn, &config, &beam1.main_beam, mode, grid)?;
    let beam2 = main_beam(&sweep2)?;
    let deviation_deg = angular_distance_deg(&beam2.main_beam, incident0);
    Ok(BeamReciprocityReport {
        config,
        target,
        incident0: *incident0,
        beam1,
        beam2,
        deviation_deg,
        grid_step_deg: grid.theta_step_deg,
        reciprocal: deviation_deg <= grid.theta_step_deg,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutcome {
    pub model: ResponseModel,
    pub config: SurfaceConfiguration,
    pub beam: BeamReport,
    pub power_at_target_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelComparison {
    pub incident: SidedAngle,
    pub target: SidedAngle,
    pub ideal: ModelOutcome,
    pub angle_aware: ModelOutcome,
    /// Target-direction power of the angle-aware design minus that of the
    /// ideal-phase design.
    pub gain_loss_db: f64,
}

/// Designs with both element models, then judges both designs under the
/// angle-aware physics.
pub fn compare_beamforming_models(
    scn: &Scenario,
    incident: &SidedAngle,
    target: &SidedAngle,
    grid: &SweepGrid,
) -> Result<ModelComparison> {
    let mode = InteractionMode::between(incident.side, target.side);
    let outcome = |model: ResponseModel| -> Result<ModelOutcome> {
        let config = configure_surface(scn, incident, target, model)?;
        let sweep = far_field_pattern(scn, &config, incident, mode, grid)?;
        let beam = main_beam(&sweep)?.with_target(target);
        let at_target = far_field(scn, &config, incident, target, ResponseModel::AngleAware)?;
        Ok(ModelOutcome {
            model,
            config,
            beam,
            power_at_target_db: field_to_db(at_target),
        })
    };
    let mut ideal = outcome(ResponseModel::IdealPhase)?;
    let mut angle_aware = outcome(ResponseModel::AngleAware)?;
    let gain_loss_db = angle_aware.power_at_target_db - ideal.power_at_target_db;
    ideal.beam.gain_loss_db = Some(gain_loss_db);
    angle_aware.beam.gain_loss_db = Some(0.0);
    Ok(ModelComparison {
        incident: *incident,
        target: *target,
        ideal,
        angle_aware,
        gain_loss_db,
    })
}
