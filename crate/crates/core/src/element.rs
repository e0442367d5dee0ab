//! Angle-dependent electromagnetic response of a single surface element.
//!
//! A 1-bit element has two states and two interaction modes. For each
//! (state, mode) pair the response table holds sampled coefficients
//! `beta * exp(j psi)` versus incident elevation. The element's complex
//! gain combines those coefficients with an aperture term and a `cos^n`
//! radiation taper evaluated at both the incident and departure angles.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Side, SidedAngle};

const DEFAULT_TABLE_CSV: &str = include_str!("../data/default_table.csv");
const TABLE_HEADER: &str = "state,mode,theta_deg,psi_deg,beta";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementState {
    Off,
    On,
}

impl ElementState {
    pub const ALL: [ElementState; 2] = [ElementState::Off, ElementState::On];

    pub fn as_str(self) -> &'static str {
        match self {
            ElementState::On => "on",
            ElementState::Off => "off",
        }
    }

    pub fn bit(self) -> char {
        match self {
            ElementState::On => '1',
            ElementState::Off => '0',
        }
    }
}

impl fmt::Display for ElementState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElementState {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "on" | "1" => Ok(ElementState::On),
            "off" | "0" => Ok(ElementState::Off),
            other => Err(Error::Config(format!("unknown element state '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InteractionMode {
    Reflect,
    Refract,
}

impl InteractionMode {
    pub const ALL: [InteractionMode; 2] = [InteractionMode::Reflect, InteractionMode::Refract];

    /// Reflect when both endpoints share a side, refract otherwise.
    pub fn between(a: Side, b: Side) -> InteractionMode {
        if a == b {
            InteractionMode::Reflect
        } else {
            InteractionMode::Refract
        }
    }

    /// Side of the outgoing wave for a wave arriving from `incident`.
    pub fn departure_side(self, incident: Side) -> Side {
        match self {
            InteractionMode::Reflect => incident,
            InteractionMode::Refract => incident.opposite(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            InteractionMode::Reflect => "reflect",
            InteractionMode::Refract => "refract",
        }
    }
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InteractionMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reflect" | "reflection" => Ok(InteractionMode::Reflect),
            "refract" | "refraction" => Ok(InteractionMode::Refract),
            other => Err(Error::Config(format!("unknown interaction mode '{other}'"))),
        }
    }
}

/// Amplitude and phase (degrees) of a reflection/refraction coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub beta: f64,
    pub psi_deg: f64,
}

impl Coefficient {
    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.beta, self.psi_deg.to_radians())
    }
}

/// One sampled row of the response table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub state: ElementState,
    pub mode: InteractionMode,
    pub theta_deg: f64,
    pub psi_deg: f64,
    pub beta: f64,
}

/// Sampled coefficients per (state, mode), looked up by |elevation|.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementResponseTable {
    rows: Vec<TableRow>,
    curves: BTreeMap<(ElementState, InteractionMode), Vec<(f64, Coefficient)>>,
}

impl ElementResponseTable {
    /// The bundled 3.6 GHz table: four phase curves sampled at
    /// -20..20 deg in 10 deg steps, with unit amplitude.
    pub fn bundled() -> Self {
        Self::from_csv(DEFAULT_TABLE_CSV).expect("bundled table is valid")
    }

    pub fn bundled_csv() -> &'static str {
        DEFAULT_TABLE_CSV
    }

    /// Builds a table from rows. Rows of one (state, mode) group must be
    /// strictly ascending in elevation. Negative elevations fold onto their
    /// absolute value and must agree with a mirrored row when both exist.
    pub fn from_rows(rows: Vec<TableRow>) -> Result<Self> {
        let mut curves: BTreeMap<_, Vec<(f64, Coefficient)>> = BTreeMap::new();
        let mut last: BTreeMap<(ElementState, InteractionMode), f64> = BTreeMap::new();
        for row in &rows {
            let key = (row.state, row.mode);
            if !(row.theta_deg.is_finite() && row.psi_deg.is_finite()) {
                return Err(Error::Config(format!(
                    "{}/{}: non-finite table entry",
                    row.state, row.mode
                )));
            }
            if row.theta_deg.abs() >= 90.0 {
                return Err(Error::Config(format!(
                    "{}/{}: elevation {} outside (-90, 90)",
                    row.state, row.mode, row.theta_deg
                )));
            }
            if !(0.0..=1.0).contains(&row.beta) {
                return Err(Error::Config(format!(
                    "{}/{} at {} deg: amplitude {} outside [0, 1]",
                    row.state, row.mode, row.theta_deg, row.beta
                )));
            }
            if let Some(prev) = last.insert(key, row.theta_deg) {
                if row.theta_deg == prev {
                    return Err(Error::Config(format!(
                        "{}/{}: duplicate row at {} deg",
                        row.state, row.mode, row.theta_deg
                    )));
                }
                if row.theta_deg < prev {
                    return Err(Error::Config(format!(
                        "{}/{}: rows not sorted by elevation ({} after {})",
                        row.state, row.mode, row.theta_deg, prev
                    )));
                }
            }
            let coeff = Coefficient {
                beta: row.beta,
                psi_deg: row.psi_deg,
            };
            let curve = curves.entry(key).or_default();
            let folded = row.theta_deg.abs();
            match curve.iter().find(|(t, _)| *t == folded) {
                Some((_, existing)) if *existing != coeff => {
                    return Err(Error::Config(format!(
                        "{}/{}: rows at +/-{} deg differ; the element response must be even in elevation",
                        row.state, row.mode, folded
                    )));
                }
                Some(_) => {}
                None => curve.push((folded, coeff)),
            }
        }
        for ((state, mode), curve) in curves.iter_mut() {
            curve.sort_by(|a, b| a.0.total_cmp(&b.0));
            let first = curve[0].0;
            let last = curve[curve.len() - 1].0;
            if first != 0.0 || last < 20.0 {
                return Err(Error::Config(format!(
                    "{state}/{mode}: table must cover at least 0..20 deg (covers {first}..{last})"
                )));
            }
        }
        if curves.is_empty() {
            return Err(Error::Config("response table is empty".into()));
        }
        Ok(Self { rows, curves })
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, header)) if header.replace(' ', "") == TABLE_HEADER => {}
            Some((line, _)) => {
                return Err(Error::Syntax {
                    line,
                    message: format!("expected header '{TABLE_HEADER}'"),
                })
            }
            None => return Err(Error::Config("response table is empty".into())),
        }
        let mut rows = Vec::new();
        for (line, text) in lines {
            let fields: Vec<&str> = text.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Syntax {
                    line,
                    message: format!("expected 5 fields, found {}", fields.len()),
                });
            }
            let num = |s: &str, what: &str| {
                s.parse::<f64>().map_err(|_| Error::Syntax {
                    line,
                    message: format!("invalid {what} '{s}'"),
                })
            };
            let anchor = |e: Error| Error::Syntax {
                line,
                message: e.to_string(),
            };
            rows.push(TableRow {
                state: fields[0].parse().map_err(anchor)?,
                mode: fields[1].parse().map_err(anchor)?,
                theta_deg: num(fields[2], "theta_deg")?,
                psi_deg: num(fields[3], "psi_deg")?,
                beta: num(fields[4], "beta")?,
            });
        }
        Self::from_rows(rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.state, r.mode, r.theta_deg, r.psi_deg, r.beta
            ));
        }
        out
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// Same table with every curve flattened to its normal-incidence value.
    pub fn angle_independent(&self) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let c = self.curves[&(r.state, r.mode)][0].1;
                TableRow {
                    psi_deg: c.psi_deg,
                    beta: c.beta,
                    ..*r
                }
            })
            .collect();
        Self::from_rows(rows).expect("flattened table stays valid")
    }

    /// Coefficient at elevation `theta_deg`, linearly interpolated in
    /// |theta| and held flat beyond the last sample.
    pub fn lookup(
        &self,
        state: ElementState,
        mode: InteractionMode,
        theta_deg: f64,
    ) -> Result<Coefficient> {
        let curve = self.curves.get(&(state, mode)).ok_or_else(|| {
            Error::Config(format!("response table has no entry for {state}/{mode}"))
        })?;
        let t = theta_deg.abs();
        if !(t < 90.0) {
            return Err(Error::Domain(format!(
                "elevation {theta_deg} deg outside (-90, 90)"
            )));
        }
        let upper = curve.partition_point(|(s, _)| *s <= t);
        if upper == 0 {
            return Ok(curve[0].1);
        }
        let (t0, c0) = curve[upper - 1];
        if t0 == t || upper == curve.len() {
            return Ok(c0);
        }
        let (t1, c1) = curve[upper];
        let w = (t - t0) / (t1 - t0);
        Ok(Coefficient {
            beta: c0.beta + (c1.beta - c0.beta) * w,
            psi_deg: c0.psi_deg + (c1.psi_deg - c0.psi_deg) * w,
        })
    }

    pub fn lookup_gamma(
        &self,
        state: ElementState,
        mode: InteractionMode,
        theta_deg: f64,
    ) -> Result<Complex64> {
        Ok(self.lookup(state, mode, theta_deg)?.to_complex())
    }
}

impl Default for ElementResponseTable {
    fn default() -> Self {
        Self::bundled()
    }
}

/// How the single-angle table is extended to an (incident, departure) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CompositionRule {
    /// `G(ti) * G(tr) / G(0)`. Matches the table whenever either angle is 0.
    #[default]
    OffsetProduct,
    /// Phase is the mean of the two lookups, amplitude their geometric mean.
    Average,
    /// Uses the incident angle only. Not symmetric in its arguments, so it
    /// breaks channel reciprocity; kept as a negative control.
    IncidentOnly,
}

impl CompositionRule {
    pub fn as_str(self) -> &'static str {
        match self {
            CompositionRule::OffsetProduct => "offset-product",
            CompositionRule::Average => "average",
            CompositionRule::IncidentOnly => "incident-only",
        }
    }
}

impl FromStr for CompositionRule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "offset-product" => Ok(CompositionRule::OffsetProduct),
            "average" => Ok(CompositionRule::Average),
            "incident-only" => Ok(CompositionRule::IncidentOnly),
            other => Err(Error::Config(format!("unknown composition rule '{other}'"))),
        }
    }
}

/// Which element physics a computation assumes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseModel {
    /// Angle-independent phases taken from the normal-incidence rows.
    IdealPhase,
    /// Coefficients composed from the table at the actual angles.
    AngleAware,
}

impl ResponseModel {
    pub fn as_str(self) -> &'static str {
        match self {
            ResponseModel::IdealPhase => "ideal",
            ResponseModel::AngleAware => "angle-aware",
        }
    }
}

impl fmt::Display for ResponseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResponseModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "ideal" | "ideal-phase" => Ok(ResponseModel::IdealPhase),
            "angle-aware" | "aware" => Ok(ResponseModel::AngleAware),
            other => Err(Error::Config(format!("unknown model '{other}'"))),
        }
    }
}

/// `cos^n` taper; zero at and beyond 90 deg unless `n == 0`.
pub fn cos_taper(exponent: f64, theta_deg: f64) -> f64 {
    if exponent == 0.0 {
        return 1.0;
    }
    if theta_deg.abs() >= 90.0 {
        return 0.0;
    }
    theta_deg.to_radians().cos().powf(exponent)
}

/// Aperture parameters shared by all elements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElementPatternParams {
    pub gain: f64,
    pub area_m2: f64,
    pub exponent_n: f64,
}

impl ElementPatternParams {
    pub fn new(gain: f64, area_m2: f64, exponent_n: f64) -> Result<Self> {
        if !(gain > 0.0 && gain.is_finite()) {
            return Err(Error::Config(format!("element gain must be positive, got {gain}")));
        }
        if !(area_m2 > 0.0 && area_m2.is_finite()) {
            return Err(Error::Config(format!(
                "element area must be positive, got {area_m2}"
            )));
        }
        if !(exponent_n >= 0.0 && exponent_n.is_finite()) {
            return Err(Error::Config(format!(
                "taper exponent must be non-negative, got {exponent_n}"
            )));
        }
        Ok(Self {
            gain,
            area_m2,
            exponent_n,
        })
    }

    pub fn radiation_taper(&self, theta_deg: f64) -> f64 {
        cos_taper(self.exponent_n, theta_deg)
    }

    /// `sqrt(G F(ti) F(tr) S)`; symmetric in its two angles bit for bit.
    pub fn aperture(&self, theta_i_deg: f64, theta_r_deg: f64) -> f64 {
        let tapers = self.radiation_taper(theta_i_deg) * self.radiation_taper(theta_r_deg);
        (self.gain * tapers * self.area_m2).sqrt()
    }
}

/// Everything needed to evaluate an element's complex gain.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementModel {
    pub params: ElementPatternParams,
    pub table: ElementResponseTable,
    pub rule: CompositionRule,
}

impl ElementModel {
    pub fn new(params: ElementPatternParams, table: ElementResponseTable) -> Self {
        Self {
            params,
            table,
            rule: CompositionRule::default(),
        }
    }

    pub fn with_rule(mut self, rule: CompositionRule) -> Self {
        self.rule = rule;
        self
    }

    /// Two-angle coefficient built from single-angle table lookups.
    pub fn composed_coefficient(
        &self,
        state: ElementState,
        mode: InteractionMode,
        theta_i_deg: f64,
        theta_r_deg: f64,
    ) -> Result<Coefficient> {
        let ci = self.table.lookup(state, mode, theta_i_deg)?;
        if self.rule == CompositionRule::IncidentOnly {
            return Ok(ci);
        }
        let cr = self.table.lookup(state, mode, theta_r_deg)?;
        Ok(match self.rule {
            CompositionRule::OffsetProduct => {
                let c0 = self.table.lookup(state, mode, 0.0)?;
                let beta = if c0.beta > 0.0 {
                    ci.beta * cr.beta / c0.beta
                } else {
                    0.0
                };
                Coefficient {
                    beta,
                    psi_deg: (ci.psi_deg + cr.psi_deg) - c0.psi_deg,
                }
            }
            CompositionRule::Average => Coefficient {
                beta: (ci.beta * cr.beta).sqrt(),
                psi_deg: (ci.psi_deg + cr.psi_deg) / 2.0,
            },
            CompositionRule::IncidentOnly => unreachable!(),
        })
    }

    /// Element gain at raw elevations, no side check.
    pub fn response(
        &self,
        model: ResponseModel,
        state: ElementState,
        mode: InteractionMode,
        theta_i_deg: f64,
        theta_r_deg: f64,
    ) -> Result<Complex64> {
        let coeff = match model {
            ResponseModel::AngleAware => {
                self.composed_coefficient(state, mode, theta_i_deg, theta_r_deg)?
            }
            ResponseModel::IdealPhase => self.table.lookup(state, mode, 0.0)?,
        };
        Ok(coeff.to_complex() * self.params.aperture(theta_i_deg, theta_r_deg))
    }

    /// Complex gain `g` of an element in `state`, for a wave arriving from
    /// `inc` and leaving toward `dep`.
    pub fn gain(
        &self,
        state: ElementState,
        mode: InteractionMode,
        inc: &SidedAngle,
        dep: &SidedAngle,
    ) -> Result<Complex64> {
        let expected = InteractionMode::between(inc.side, dep.side);
        if expected != mode {
            return Err(Error::ModeMismatch(format!(
                "{mode} requested for incident on {} and departure on {} side",
                inc.side, dep.side
            )));
        }
        self.response(
            ResponseModel::AngleAware,
            state,
            mode,
            inc.elevation_deg(),
            dep.elevation_deg(),
        )
    }
}
