//! Link-level and end-to-end channels of a surface-aided scene.
//!
//! Every channel is a deterministic line-of-sight complex coefficient. The
//! BS-to-element link carries `sqrt(G_k F_k) / (sqrt(4 pi) d)`, the
//! element-to-user link `lambda sqrt(G_u F_u) / (4 pi d)`, both with the
//! path phase `exp(-j 2 pi d / lambda)`. Antenna patterns are evaluated at
//! the elevation of the antenna's own ray to the element.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::element::{cos_taper, ElementModel, InteractionMode};
use crate::error::{Error, Result};
use crate::geometry::{direction_between, distance, IosGrid, Side, Vec3};
use crate::surface::SurfaceConfiguration;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const DEFAULT_RECIPROCITY_TOLERANCE: f64 = 1e-10;

/// Normalized `cos^q` antenna pattern; `q = 0` is isotropic.
pub fn antenna_pattern(exponent_q: f64, theta_deg: f64) -> f64 {
    cos_taper(exponent_q, theta_deg)
}

/// `exp(-j 2 pi d / lambda)`, with the whole wavelengths removed first.
pub fn path_phase(d: f64, wavelength: f64) -> Complex64 {
    let cycles = (d / wavelength).rem_euclid(1.0);
    Complex64::from_polar(1.0, -2.0 * PI * cycles)
}

/// A BS antenna or a single-antenna user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Antenna {
    pub position: Vec3,
    pub gain: f64,
    pub exponent: f64,
}

impl Antenna {
    pub fn new(position: Vec3, gain: f64, exponent: f64) -> Self {
        Self {
            position,
            gain,
            exponent,
        }
    }

    pub fn isotropic(position: Vec3) -> Self {
        Self::new(position, 1.0, 0.0)
    }

    /// `G * F(theta)`.
    pub fn directivity(&self, theta_deg: f64) -> f64 {
        self.gain * antenna_pattern(self.exponent, theta_deg)
    }

    /// Elevation of `target` off this antenna's boresight. Antennas face the
    /// surface plane, so the boresight is `-sign(z) * z_hat`.
    fn off_boresight_deg(&self, target: Vec3) -> f64 {
        let v = target - self.position;
        let along = -self.position.z.signum() * v.z;
        v.x.hypot(v.y).atan2(along).to_degrees()
    }

    fn validate(&self, what: &str, index: usize) -> Result<()> {
        if !self.position.is_finite() {
            return Err(Error::Config(format!("{what} {index}: position must be finite")));
        }
        if self.position.z == 0.0 {
            return Err(Error::Config(format!(
                "{what} {index} at {} lies on the surface plane (z = 0)",
                self.position
            )));
        }
        if !(self.gain > 0.0 && self.gain.is_finite()) {
            return Err(Error::Config(format!(
                "{what} {index}: gain must be positive, got {}",
                self.gain
            )));
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::Config(format!(
                "{what} {index}: pattern exponent must be non-negative, got {}",
                self.exponent
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DirectLink {
    #[default]
    Blocked,
    FreeSpace,
}

impl DirectLink {
    pub fn as_str(self) -> &'static str {
        match self {
            DirectLink::Blocked => "blocked",
            DirectLink::FreeSpace => "free-space",
        }
    }
}

impl std::str::FromStr for DirectLink {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "blocked" => Ok(DirectLink::Blocked),
            "free-space" | "freespace" => Ok(DirectLink::FreeSpace),
            other => Err(Error::Config(format!("unknown direct_link '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// BS to user.
    Downlink,
    /// User to BS.
    Uplink,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Downlink => "downlink",
            Direction::Uplink => "uplink",
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkKind {
    BsToElement,
    ElementToUser,
    Direct,
    Effective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexChannel {
    pub value: Complex64,
    pub link_kind: LinkKind,
    pub direction: Direction,
}

/// The full simulated scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub frequency_hz: f64,
    pub grid: IosGrid,
    pub bs_antennas: Vec<Antenna>,
    pub users: Vec<Antenna>,
    pub element: ElementModel,
    pub direct_link: DirectLink,
}

impl Scenario {
    pub fn new(
        frequency_hz: f64,
        grid: IosGrid,
        bs_antennas: Vec<Antenna>,
        users: Vec<Antenna>,
        element: ElementModel,
        direct_link: DirectLink,
    ) -> Result<Self> {
        let scn = Self {
            frequency_hz,
            grid,
            bs_antennas,
            users,
            element,
            direct_link,
        };
        scn.validate()?;
        Ok(scn)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0 && self.frequency_hz.is_finite()) {
            return Err(Error::Config(format!(
                "frequency_hz must be positive, got {}",
                self.frequency_hz
            )));
        }
        if self.bs_antennas.is_empty() {
            return Err(Error::Config("scenario needs at least one BS antenna".into()));
        }
        if self.users.is_empty() {
            return Err(Error::Config("scenario needs at least one user".into()));
        }
        for (k, a) in self.bs_antennas.iter().enumerate() {
            a.validate("antenna", k)?;
        }
        for (u, a) in self.users.iter().enumerate() {
            a.validate("user", u)?;
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn num_elements(&self) -> usize {
        self.grid.len()
    }

    pub fn bs(&self, k: usize) -> Result<&Antenna> {
        self.bs_antennas.get(k).ok_or(Error::IndexOutOfRange {
            what: "antenna",
            index: k,
            limit: self.bs_antennas.len(),
        })
    }

    pub fn user(&self, u: usize) -> Result<&Antenna> {
        self.users.get(u).ok_or(Error::IndexOutOfRange {
            what: "user",
            index: u,
            limit: self.users.len(),
        })
    }

    /// Antenna-to-element link value: `amplitude * exp(-j 2 pi d / lambda)`
    /// where the numerator uses `numerator_scale` (1 for the BS side,
    /// `lambda / sqrt(4 pi)` for the user side).
    fn element_link(&self, antenna: &Antenna, m: usize, numerator_scale: f64) -> Result<Complex64> {
        let r_m = self.grid.element_position(m)?;
        let toward = direction_between(r_m, antenna.position)?;
        let d = distance(antenna.position, r_m);
        let amp = numerator_scale * antenna.directivity(toward.elevation_deg()).sqrt()
            / ((4.0 * PI).sqrt() * d);
        Ok(path_phase(d, self.wavelength()) * amp)
    }

    /// BS antenna `k` to element `m`.
    pub fn bs_to_element(&self, k: usize, m: usize, direction: Direction) -> Result<ComplexChannel> {
        let value = self.element_link(self.bs(k)?, m, 1.0)?;
        Ok(ComplexChannel {
            value,
            link_kind: LinkKind::BsToElement,
            direction,
        })
    }

    /// Element `m` to user `u`.
    pub fn element_to_user(
        &self,
        m: usize,
        u: usize,
        direction: Direction,
    ) -> Result<ComplexChannel> {
        let scale = self.wavelength() / (4.0 * PI).sqrt();
        let value = self.element_link(self.user(u)?, m, scale)?;
        Ok(ComplexChannel {
            value,
            link_kind: LinkKind::ElementToUser,
            direction,
        })
    }

    /// Direct BS-user link; identical for both directions.
    pub fn direct_link(&self, k: usize, u: usize, direction: Direction) -> Result<ComplexChannel> {
        let (bs, user) = (self.bs(k)?, self.user(u)?);
        let value = match self.direct_link {
            DirectLink::Blocked => Complex64::new(0.0, 0.0),
            DirectLink::FreeSpace => {
                let d = distance(bs.position, user.position);
                if d == 0.0 {
                    return Err(Error::DegenerateGeometry(format!(
                        "antenna {k} and user {u} coincide"
                    )));
                }
                let gk = bs.directivity(bs.off_boresight_deg(user.position));
                let gu = user.directivity(user.off_boresight_deg(bs.position));
                let amp = self.wavelength() * (gk * gu).sqrt() / (4.0 * PI * d);
                path_phase(d, self.wavelength()) * amp
            }
        };
        Ok(ComplexChannel {
            value,
            link_kind: LinkKind::Direct,
            direction,
        })
    }

    /// Scattering term `m` of the effective channel.
    ///
    /// Downlink: the wave arrives from the BS and departs toward the user.
    /// Uplink: the wave arrives from the user and departs toward the BS, and
    /// the product is taken in propagation order.
    pub fn cascade_term(
        &self,
        config: &SurfaceConfiguration,
        k: usize,
        m: usize,
        u: usize,
        direction: Direction,
    ) -> Result<Complex64> {
        let state = config.get(m).ok_or(Error::IndexOutOfRange {
            what: "configuration element",
            index: m,
            limit: config.len(),
        })?;
        let r_m = self.grid.element_position(m)?;
        let (bs, user) = (self.bs(k)?, self.user(u)?);
        match direction {
            Direction::Downlink => {
                let inc = direction_between(r_m, bs.position)?;
                let dep = direction_between(r_m, user.position)?;
                let mode = InteractionMode::between(inc.side, dep.side);
                let g = self.element.gain(state, mode, &inc, &dep)?;
                let h_in = self.bs_to_element(k, m, direction)?.value;
                let h_out = self.element_to_user(m, u, direction)?.value;
                Ok(h_in * g * h_out)
            }
            Direction::Uplink => {
                let inc = direction_between(r_m, user.position)?;
                let dep = direction_between(r_m, bs.position)?;
                let mode = InteractionMode::between(inc.side, dep.side);
                let g = self.element.gain(state, mode, &inc, &dep)?;
                let h_in = self.element_to_user(m, u, direction)?.value;
                let h_out = self.bs_to_element(k, m, direction)?.value;
                Ok(h_in * g * h_out)
            }
        }
    }

    /// End-to-end channel `H = h + sum_m h_in g_m h_out`.
    pub fn effective_channel(
        &self,
        config: &SurfaceConfiguration,
        k: usize,
        u: usize,
        direction: Direction,
    ) -> Result<ComplexChannel> {
        config.expect_len(self.num_elements())?;
        let direct = self.direct_link(k, u, direction)?.value;
        let terms = (0..self.num_elements())
            .map(|m| self.cascade_term(config, k, m, u, direction))
            .collect::<Result<Vec<_>>>()?;
        Ok(ComplexChannel {
            value: combine_paths(direct, terms),
            link_kind: LinkKind::Effective,
            direction,
        })
    }

    /// Side of user `u` relative to the surface.
    pub fn user_side(&self, u: usize) -> Result<Side> {
        let z = self.user(u)?.position.z;
        Side::of(z).ok_or_else(|| Error::DegenerateGeometry(format!("user {u} on surface plane")))
    }
}

/// Direct link plus the sum of scattering terms.
pub fn combine_paths(direct: Complex64, terms: impl IntoIterator<Item = Complex64>) -> Complex64 {
    terms.into_iter().fold(direct, |acc, t| acc + t)
}

/// Product-form cascade triple `h_in * g * h_out`, summed over elements.
pub fn cascade_sum(
    direct: Complex64,
    paths: &[(Complex64, Complex64, Complex64)],
) -> Complex64 {
    combine_paths(direct, paths.iter().map(|(a, g, b)| a * g * b))
}

/// `|a - b| / max(|a|, |b|)`, zero when both vanish.
pub fn relative_error(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CascadeReciprocity {
    pub downlink_product: Complex64,
    pub uplink_product: Complex64,
    pub max_rel_err: f64,
}

/// Compares `h~D_km * h^D_mu` with `h^U_mu * h~U_km` for one triple.
pub fn check_cascade_reciprocity(
    scn: &Scenario,
    k: usize,
    m: usize,
    u: usize,
) -> Result<CascadeReciprocity> {
    let downlink_product = scn.bs_to_element(k, m, Direction::Downlink)?.value
        * scn.element_to_user(m, u, Direction::Downlink)?.value;
    let uplink_product = scn.element_to_user(m, u, Direction::Uplink)?.value
        * scn.bs_to_element(k, m, Direction::Uplink)?.value;
    Ok(CascadeReciprocity {
        downlink_product,
        uplink_product,
        max_rel_err: relative_error(downlink_product, uplink_product),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairReciprocity {
    pub k: usize,
    pub u: usize,
    pub downlink: Complex64,
    pub uplink: Complex64,
    pub rel_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReciprocityReport {
    pub entries: Vec<PairReciprocity>,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

/// Evaluates every (k, u) pair in both directions.
pub fn check_channel_reciprocity(
    scn: &Scenario,
    config: &SurfaceConfiguration,
    tolerance: f64,
) -> Result<ChannelReciprocityReport> {
    config.expect_len(scn.num_elements())?;
    let pairs: Vec<(usize, usize)> = (0..scn.bs_antennas.len())
        .flat_map(|k| (0..scn.users.len()).map(move |u| (k, u)))
        .collect();
    let entries = pairs
        .par_iter()
        .map(|&(k, u)| {
            let downlink = scn.effective_channel(config, k, u, Direction::Downlink)?.value;
            let uplink = scn.effective_channel(config, k, u, Direction::Uplink)?.value;
            Ok(PairReciprocity {
                k,
                u,
                downlink,
                uplink,
                rel_err: relative_error(downlink, uplink),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_rel_err = entries.iter().map(|e| e.rel_err).fold(0.0, f64::max);
    let verdict = if entries.iter().all(|e| e.rel_err <= tolerance) {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(ChannelReciprocityReport {
        entries,
        max_rel_err,
        tolerance,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::element::{
        CompositionRule, ElementPatternParams, ElementResponseTable, ElementState,
    };
    use approx::assert_abs_diff_eq;

    fn scenario(bs: Vec3, user: Vec3) -> Scenario {
        let grid = IosGrid::new(1, 1, 0.04, 0.04).unwrap();
        Scenario::new(
            3.6e9,
            grid,
            vec![Antenna::isotropic(bs)],
            vec![Antenna::isotropic(user)],
            ElementModel::new(
                ElementPatternParams::new(1.0, grid.element_area(), 1.0).unwrap(),
                ElementResponseTable::bundled(),
            ),
            DirectLink::Blocked,
        )
        .unwrap()
    }

    #[test]
    fn pattern_values() {
        assert_eq!(antenna_pattern(0.0, 77.0), 1.0);
        assert_abs_diff_eq!(antenna_pattern(2.0, 60.0), 0.25, epsilon = 1e-15);
        assert_eq!(antenna_pattern(1.0, 90.0), 0.0);
    }

    #[test]
    fn bs_link_amplitude_and_phase_wraps() {
        let scn = scenario(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0));
        let h = scn.bs_to_element(0, 0, Direction::Downlink).unwrap();
        assert_abs_diff_eq!(h.value.norm(), 1.0 / (4.0 * PI).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(h.value.norm(), 0.28209479177387814, epsilon = 1e-15);

        let lambda = scn.wavelength();
        let full = path_phase(lambda, lambda);
        assert_eq!(full, Complex64::new(1.0, -0.0));
        let half = path_phase(lambda / 2.0, lambda);
        assert_abs_diff_eq!(half.re, -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(half.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn user_link_amplitude() {
        let scn = scenario(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -1.0));
        let lambda = SPEED_OF_LIGHT / 3.6e9;
        assert_abs_diff_eq!(lambda, 0.0832756827777778, epsilon = 1e-15);
        let h = scn.element_to_user(0, 0, Direction::Downlink).unwrap();
        assert_abs_diff_eq!(h.value.norm(), lambda / (4.0 * PI), epsilon = 1e-17);
        assert_abs_diff_eq!(h.value.norm(), 6.6268e-3, epsilon = 1e-6);

        let far = scenario(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -2.0));
        let h2 = far.element_to_user(0, 0, Direction::Downlink).unwrap();
        assert_abs_diff_eq!(h2.value.norm(), h.value.norm() / 2.0, epsilon = 1e-17);
    }

    #[test]
    fn user_link_phase_at_two_wavelengths() {
        let lambda = SPEED_OF_LIGHT / 3.6e9;
        let scn = scenario(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, -2.0 * lambda));
        let h = scn.element_to_user(0, 0, Direction::Downlink).unwrap().value;
        let phase = h / h.norm();
        assert_abs_diff_eq!(phase.re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(phase.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn direct_link_variants() {
        let lambda = SPEED_OF_LIGHT / 3.6e9;
        let mut scn = scenario(Vec3::new(0.0, 0.0, lambda / 2.0), Vec3::new(0.0, 0.0, -lambda / 2.0));
        let h = scn.direct_link(0, 0, Direction::Downlink).unwrap();
        assert_eq!(h.value, Complex64::new(0.0, 0.0));

        scn.direct_link = DirectLink::FreeSpace;
        let d = scn.direct_link(0, 0, Direction::Downlink).unwrap().value;
        let up = scn.direct_link(0, 0, Direction::Uplink).unwrap().value;
        assert_eq!(d, up);
        assert_abs_diff_eq!(d.re, 1.0 / (4.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(d.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn direct_link_pattern_points_at_surface() {
        let mut scn = scenario(Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.0, 0.0, 3.0));
        scn.direct_link = DirectLink::FreeSpace;
        scn.bs_antennas[0].exponent = 1.0;
        // The user sits behind the BS's boresight.
        let h = scn.direct_link(0, 0, Direction::Downlink).unwrap();
        assert_eq!(h.value.norm(), 0.0);
    }

    #[test]
    fn single_term_sum() {
        let one = Complex64::new(1.0, 0.0);
        let h = cascade_sum(Complex64::new(0.0, 0.0), &[(one, Complex64::new(0.5, 0.0), one)]);
        assert_eq!(h, Complex64::new(0.5, 0.0));
    }

    #[test]
    fn single_path_equals_product() {
        let scn = scenario(Vec3::new(0.3, 0.1, 0.9), Vec3::new(-0.4, 0.2, -1.1));
        let cfg = SurfaceConfiguration::uniform(1, ElementState::On);
        let rep = check_channel_reciprocity(&scn, &cfg, DEFAULT_RECIPROCITY_TOLERANCE).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        let e = rep.entries[0];
        let inc = scn.grid.angles_to(0, scn.bs_antennas[0].position).unwrap();
        let dep = scn.grid.angles_to(0, scn.users[0].position).unwrap();
        let g = scn
            .element
            .gain(ElementState::On, InteractionMode::Refract, &inc, &dep)
            .unwrap();
        let expected = scn.bs_to_element(0, 0, Direction::Downlink).unwrap().value
            * g
            * scn.element_to_user(0, 0, Direction::Downlink).unwrap().value;
        assert!(relative_error(e.downlink, expected) < 1e-14);
        assert!(relative_error(e.uplink, expected) < 1e-12);
    }

    #[test]
    fn mirrored_geometry_gives_equal_products() {
        let scn = scenario(Vec3::new(0.5, 0.2, 0.8), Vec3::new(-0.5, 0.2, 0.8));
        let a = check_cascade_reciprocity(&scn, 0, 0, 0).unwrap();
        assert!(a.max_rel_err <= 1e-12);
        let mirrored = scenario(Vec3::new(-0.5, 0.2, 0.8), Vec3::new(0.5, 0.2, 0.8));
        let b = check_cascade_reciprocity(&mirrored, 0, 0, 0).unwrap();
        assert!(relative_error(a.downlink_product, b.downlink_product) <= 1e-12);
    }

    #[test]
    fn user_on_plane_is_an_error_not_a_report() {
        let mut scn = scenario(Vec3::new(0.5, 0.2, 0.8), Vec3::new(-0.5, 0.2, 0.8));
        scn.users[0].position.z = 0.0;
        assert!(matches!(
            check_cascade_reciprocity(&scn, 0, 0, 0),
            Err(Error::DegenerateGeometry(_))
        ));
        assert!(scn.validate().is_err());
    }

    #[test]
    fn incident_only_rule_breaks_reciprocity() {
        let mut scn = scenario(Vec3::new(0.5, 0.0, 0.3), Vec3::new(-0.02, 0.1, -1.0));
        scn.element.rule = CompositionRule::IncidentOnly;
        let cfg = SurfaceConfiguration::uniform(1, ElementState::On);
        let rep = check_channel_reciprocity(&scn, &cfg, DEFAULT_RECIPROCITY_TOLERANCE).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn wrong_config_length_rejected() {
        let scn = scenario(Vec3::new(0.5, 0.0, 0.3), Vec3::new(0.0, 0.1, -1.0));
        let cfg = SurfaceConfiguration::uniform(2, ElementState::On);
        assert!(scn.effective_channel(&cfg, 0, 0, Direction::Downlink).is_err());
    }
}
