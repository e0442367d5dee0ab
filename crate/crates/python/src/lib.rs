//! Python bindings: `import ios_workbench`.
//!
//! Angles are passed as `(theta, phi)` or `(theta, phi, side)` tuples in
//! degrees, configurations as bit strings (`"1"` = ON, element 0 first).

use std::path::PathBuf;

use ios_core::workbench::{
    parse_scenario, parse_scenario_file, random_case, rng_for, s21_campaign, scenario_to_text,
};
use ios_core::{
    beam_reciprocity_experiment, check_cascade_reciprocity, check_channel_reciprocity,
    compare_beamforming_models, configure_surface, far_field, far_field_pattern_with, main_beam,
    BeamDesign, BeamReport, Complex64, Direction, ElementResponseTable, ElementState, Error,
    ErrorKind, InteractionMode, ResponseModel, Side, SidedAngle, SurfaceConfiguration, SweepGrid,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(ios_workbench, ConfigError, PyValueError, "Invalid scenario or argument.");
create_exception!(ios_workbench, DomainError, PyValueError, "Physically invalid request.");
create_exception!(ios_workbench, WorkbenchIoError, PyOSError, "File access failed.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Config => ConfigError::new_err(msg),
        ErrorKind::Domain => DomainError::new_err(msg),
        ErrorKind::Io => WorkbenchIoError::new_err(msg),
    }
}

trait OrPy<T> {
    fn py_err(self) -> PyResult<T>;
}

impl<T> OrPy<T> for ios_core::Result<T> {
    fn py_err(self) -> PyResult<T> {
        self.map_err(to_py)
    }
}

#[derive(FromPyObject)]
enum AngleArg {
    Sided(f64, f64, String),
    Plain(f64, f64),
}

impl AngleArg {
    fn resolve(&self, default_side: Side) -> PyResult<SidedAngle> {
        match self {
            AngleArg::Sided(t, p, s) => SidedAngle::new(*t, *p, s.parse().py_err()?),
            AngleArg::Plain(t, p) => SidedAngle::new(*t, *p, default_side),
        }
        .py_err()
    }
}

fn angle_tuple(a: &SidedAngle) -> (f64, f64, &'static str) {
    (a.elevation_deg(), a.azimuth_deg(), a.side.as_str())
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().py_err()
}

fn grid(step: f64, hemisphere: bool) -> SweepGrid {
    if hemisphere {
        SweepGrid::hemisphere(step)
    } else {
        SweepGrid::plane_cut(step)
    }
}

fn beam_dict<'py>(py: Python<'py>, b: &BeamReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("main_beam", angle_tuple(&b.main_beam))?;
    d.set_item("peak_power_db", b.peak_power_db)?;
    d.set_item("pointing_error_deg", b.pointing_error_deg)?;
    d.set_item("gain_loss_db", b.gain_loss_db)?;
    Ok(d)
}

/// A simulated scene: surface, BS antennas, users and element model.
#[pyclass(name = "Scenario", frozen)]
struct PyScenario {
    inner: ios_core::Scenario,
}

impl PyScenario {
    fn config(&self, bits: &str) -> PyResult<SurfaceConfiguration> {
        let cfg = match bits {
            "on" => SurfaceConfiguration::uniform(self.inner.num_elements(), ElementState::On),
            "off" => SurfaceConfiguration::uniform(self.inner.num_elements(), ElementState::Off),
            other => parse::<SurfaceConfiguration>(other)?,
        };
        if cfg.len() != self.inner.num_elements() {
            return Err(ConfigError::new_err(format!(
                "configuration has {} elements, surface has {}",
                cfg.len(),
                self.inner.num_elements()
            )));
        }
        Ok(cfg)
    }
}

#[pymethods]
impl PyScenario {
    /// Parse scenario text.
    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_scenario(text).py_err()? })
    }

    /// Read a scenario file; `overrides` maps `section.key` to a value.
    #[staticmethod]
    #[pyo3(signature = (path, overrides = None))]
    fn from_file(path: PathBuf, overrides: Option<Vec<(String, String)>>) -> PyResult<Self> {
        let inner = parse_scenario_file(&path, &overrides.unwrap_or_default()).py_err()?;
        Ok(Self { inner })
    }

    /// A seeded random scenario and a random configuration for it.
    #[staticmethod]
    fn random(seed: u64) -> (Self, String) {
        let (inner, cfg) = random_case(&mut rng_for(seed));
        (Self { inner }, cfg.to_string())
    }

    fn to_text(&self) -> String {
        scenario_to_text(&self.inner, None)
    }

    #[getter]
    fn num_elements(&self) -> usize {
        self.inner.num_elements()
    }

    #[getter]
    fn num_bs_antennas(&self) -> usize {
        self.inner.bs_antennas.len()
    }

    #[getter]
    fn num_users(&self) -> usize {
        self.inner.users.len()
    }

    #[getter]
    fn frequency_hz(&self) -> f64 {
        self.inner.frequency_hz
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavelength()
    }

    /// Element centers as `(x, y, z)` tuples, row-major.
    fn element_positions(&self) -> Vec<(f64, f64, f64)> {
        self.inner
            .grid
            .positions()
            .into_iter()
            .map(|p| (p.x, p.y, p.z))
            .collect()
    }

    /// End-to-end channel between BS antenna `k` and user `u`.
    #[pyo3(signature = (config, k, u, direction = "downlink"))]
    fn effective_channel(&self, config: &str, k: usize, u: usize, direction: &str) -> PyResult<Complex64> {
        let dir = match direction {
            "downlink" => Direction::Downlink,
            "uplink" => Direction::Uplink,
            other => return Err(ConfigError::new_err(format!("unknown direction '{other}'"))),
        };
        Ok(self.inner.effective_channel(&self.config(config)?, k, u, dir).py_err()?.value)
    }

    /// Relative error between the two orderings of one cascaded link.
    fn cascade_reciprocity_error(&self, k: usize, m: usize, u: usize) -> PyResult<f64> {
        Ok(check_cascade_reciprocity(&self.inner, k, m, u).py_err()?.max_rel_err)
    }

    /// Downlink vs uplink for every (antenna, user) pair.
    #[pyo3(signature = (config, tolerance = 1e-10))]
    fn check_channel_reciprocity<'py>(
        &self,
        py: Python<'py>,
        config: &str,
        tolerance: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let r = check_channel_reciprocity(&self.inner, &self.config(config)?, tolerance).py_err()?;
        let d = PyDict::new(py);
        d.set_item("verdict", r.verdict.to_string())?;
        d.set_item("max_rel_err", r.max_rel_err)?;
        d.set_item("tolerance", r.tolerance)?;
        let pairs: Vec<(usize, usize, Complex64, Complex64)> =
            r.entries.iter().map(|e| (e.k, e.u, e.downlink, e.uplink)).collect();
        d.set_item("pairs", pairs)?;
        Ok(d)
    }

    /// Far-field response toward `departure` for a wave from `incident`.
    #[pyo3(signature = (config, incident, departure, model = "angle-aware"))]
    fn far_field(&self, config: &str, incident: AngleArg, departure: AngleArg, model: &str) -> PyResult<Complex64> {
        let inc = incident.resolve(Side::Reflection)?;
        let dep = departure.resolve(inc.side)?;
        far_field(&self.inner, &self.config(config)?, &inc, &dep, parse(model)?).py_err()
    }

    /// Pattern sweep as a list of `(theta, phi, power_db, field)` rows.
    #[pyo3(signature = (config, incident, mode, grid_step = 1.0, model = "angle-aware", hemisphere = false))]
    fn far_field_pattern(
        &self,
        config: &str,
        incident: AngleArg,
        mode: &str,
        grid_step: f64,
        model: &str,
        hemisphere: bool,
    ) -> PyResult<Vec<(f64, f64, f64, Complex64)>> {
        let inc = incident.resolve(Side::Reflection)?;
        let sweep = far_field_pattern_with(
            &self.inner,
            &self.config(config)?,
            &inc,
            parse(mode)?,
            &grid(grid_step, hemisphere),
            parse(model)?,
        )
        .py_err()?;
        Ok(sweep
            .samples
            .iter()
            .map(|s| (s.theta_deg, s.phi_deg, s.power_db, s.field))
            .collect())
    }

    /// Main beam of a pattern sweep.
    #[pyo3(signature = (config, incident, mode, grid_step = 1.0, model = "angle-aware"))]
    fn main_beam<'py>(
        &self,
        py: Python<'py>,
        config: &str,
        incident: AngleArg,
        mode: &str,
        grid_step: f64,
        model: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let inc = incident.resolve(Side::Reflection)?;
        let sweep = far_field_pattern_with(
            &self.inner,
            &self.config(config)?,
            &inc,
            parse(mode)?,
            &grid(grid_step, false),
            parse(model)?,
        )
        .py_err()?;
        beam_dict(py, &main_beam(&sweep).py_err()?)
    }

    /// 1-bit configuration steering `incident` toward `target`.
    #[pyo3(signature = (incident, target, model = "angle-aware"))]
    fn configure_surface(&self, incident: AngleArg, target: AngleArg, model: &str) -> PyResult<String> {
        let inc = incident.resolve(Side::Reflection)?;
        let tgt = target.resolve(inc.side)?;
        Ok(configure_surface(&self.inner, &inc, &tgt, parse(model)?).py_err()?.to_string())
    }

    /// Beam round trip under a fixed configuration.
    #[pyo3(signature = (incident, mode, grid_step = 1.0, target = None, config = None, model = "angle-aware"))]
    fn beam_reciprocity<'py>(
        &self,
        py: Python<'py>,
        incident: AngleArg,
        mode: &str,
        grid_step: f64,
        target: Option<AngleArg>,
        config: Option<&str>,
        model: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let inc = incident.resolve(Side::Reflection)?;
        let mode: InteractionMode = parse(mode)?;
        let model: ResponseModel = parse(model)?;
        let design = match (target, config) {
            (Some(t), None) => BeamDesign::Target {
                target: t.resolve(mode.departure_side(inc.side))?,
                model,
            },
            (None, Some(c)) => BeamDesign::Fixed(self.config(c)?),
            (None, None) => BeamDesign::BestTarget { model },
            (Some(_), Some(_)) => {
                return Err(ConfigError::new_err("give either target or config, not both"))
            }
        };
        let r = beam_reciprocity_experiment(&self.inner, &inc, mode, &grid(grid_step, false), &design)
            .py_err()?;
        let d = PyDict::new(py);
        d.set_item("config", r.config.to_string())?;
        d.set_item("target", r.target.as_ref().map(angle_tuple))?;
        d.set_item("theta0", angle_tuple(&r.incident0))?;
        d.set_item("theta1", angle_tuple(&r.beam1.main_beam))?;
        d.set_item("theta2", angle_tuple(&r.beam2.main_beam))?;
        d.set_item("deviation_deg", r.deviation_deg)?;
        d.set_item("reciprocal", r.reciprocal)?;
        Ok(d)
    }

    /// Ideal-phase vs angle-aware design, both judged with angle-aware physics.
    #[pyo3(signature = (incident, target, grid_step = 1.0))]
    fn compare_models<'py>(
        &self,
        py: Python<'py>,
        incident: AngleArg,
        target: AngleArg,
        grid_step: f64,
    ) -> PyResult<Bound<'py, PyDict>> {
        let inc = incident.resolve(Side::Reflection)?;
        let tgt = target.resolve(inc.side)?;
        let c = compare_beamforming_models(&self.inner, &inc, &tgt, &grid(grid_step, false)).py_err()?;
        let d = PyDict::new(py);
        for o in [&c.ideal, &c.angle_aware] {
            let entry = beam_dict(py, &o.beam)?;
            entry.set_item("config", o.config.to_string())?;
            entry.set_item("power_at_target_db", o.power_at_target_db)?;
            d.set_item(o.model.as_str(), entry)?;
        }
        d.set_item("gain_loss_db", c.gain_loss_db)?;
        Ok(d)
    }

    /// Two-antenna S21/S12 campaign; one dict per measurement.
    #[pyo3(signature = (range_m = 1.0, model = "angle-aware"))]
    fn s21_campaign<'py>(&self, py: Python<'py>, range_m: f64, model: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
        s21_campaign(&self.inner, range_m, parse(model)?)
            .py_err()?
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("config", r.config_index)?;
                d.set_item("target", angle_tuple(&r.config_target))?;
                d.set_item("antenna2_theta_deg", r.antenna2_theta_deg)?;
                d.set_item("antenna2_side", r.antenna2_side.as_str())?;
                d.set_item("s21", r.s21)?;
                d.set_item("s12", r.s12)?;
                d.set_item("rel_err", r.rel_err)?;
                d.set_item("equal", r.equal)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario({}x{} elements, {} BS antennas, {} users, {} Hz)",
            self.inner.grid.rows(),
            self.inner.grid.cols(),
            self.inner.bs_antennas.len(),
            self.inner.users.len(),
            self.inner.frequency_hz
        )
    }
}

/// `(beta, psi_deg)` from the bundled response table.
#[pyfunction]
fn table_lookup(state: &str, mode: &str, theta_deg: f64) -> PyResult<(f64, f64)> {
    let c = ElementResponseTable::bundled()
        .lookup(parse(state)?, parse(mode)?, theta_deg)
        .py_err()?;
    Ok((c.beta, c.psi_deg))
}

/// The bundled response table as CSV text.
#[pyfunction]
fn bundled_table_csv() -> &'static str {
    ElementResponseTable::bundled_csv()
}

#[pymodule]
fn ios_workbench(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_function(wrap_pyfunction!(table_lookup, m)?)?;
    m.add_function(wrap_pyfunction!(bundled_table_csv, m)?)?;
    m.add("ConfigError", m.py().get_type::<ConfigError>())?;
    m.add("DomainError", m.py().get_type::<DomainError>())?;
    m.add("WorkbenchIoError", m.py().get_type::<WorkbenchIoError>())?;
    Ok(())
}
