//! Batch experiments and their artifacts.
//!
//! Every experiment computes all of its results first and only then hands
//! them to a single [`ArtifactWriter`]. If any write fails, files created by
//! the run are removed and appended logs are truncated back to their
//! previous length.

use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::beamforming::{
    beam_reciprocity_experiment, compare_beamforming_models, configure_surface, far_field_pattern,
    main_beam, BeamDesign, BeamReciprocityReport, PatternSweep, SweepGrid,
};
use crate::channel::{
    check_channel_reciprocity, relative_error, Antenna, ChannelReciprocityReport, Direction,
    Scenario, Verdict,
};
use crate::element::{ElementState, InteractionMode, ResponseModel};
use crate::error::{Error, Result};
use crate::geometry::{Side, SidedAngle};
use crate::surface::SurfaceConfiguration;
use crate::workbench::random::{random_case, rng_for};
use crate::workbench::scenario_file::{parse_scenario_with, ParseOptions};

pub const PATTERN_CSV: &str = "pattern.csv";
pub const BEAM_REPORT: &str = "beam.txt";
pub const CONFIGURATION_FILE: &str = "configuration.txt";
pub const EXPERIMENT_LOG: &str = "experiments.jsonl";
pub const RECIPROCITY_CSV: &str = "reciprocity.csv";
pub const CAMPAIGN_CSV: &str = "campaign.csv";
pub const VERDICT_FILE: &str = "verdict.txt";
pub const BEAM_RECIPROCITY_REPORT: &str = "beam_reciprocity.txt";
pub const MODEL_COMPARISON_CSV: &str = "model_comparison.csv";
pub const S21_CSV: &str = "s21_campaign.csv";

/// Where an experiment's surface configuration comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ConfigSource {
    Uniform(ElementState),
    Bits(SurfaceConfiguration),
    Random { seed: u64 },
    /// Steer the experiment's incident wave toward `target`.
    Design {
        target: SidedAngle,
        model: ResponseModel,
    },
}

impl ConfigSource {
    fn resolve(&self, scn: &Scenario, incident: Option<&SidedAngle>) -> Result<SurfaceConfiguration> {
        let m = scn.num_elements();
        let cfg = match self {
            ConfigSource::Uniform(s) => SurfaceConfiguration::uniform(m, *s),
            ConfigSource::Bits(c) => c.clone(),
            ConfigSource::Random { seed } => {
                SurfaceConfiguration::random(m, &mut ChaCha8Rng::seed_from_u64(*seed))
            }
            ConfigSource::Design { target, model } => {
                let incident = incident.ok_or_else(|| {
                    Error::Config("designing a configuration needs an incident direction".into())
                })?;
                configure_surface(scn, incident, target, *model)?
            }
        };
        cfg.expect_len(m)?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Experiment {
    Pattern {
        incident: SidedAngle,
        mode: InteractionMode,
        config: ConfigSource,
        grid: SweepGrid,
    },
    Beamform {
        incident: SidedAngle,
        target: SidedAngle,
        model: ResponseModel,
        grid: SweepGrid,
    },
    ChannelReciprocity {
        config: ConfigSource,
        tolerance: f64,
    },
    /// Channel reciprocity over `count` seeded random scenarios.
    ChannelReciprocityCampaign {
        count: usize,
        seed: u64,
        tolerance: f64,
    },
    BeamReciprocity {
        incident: SidedAngle,
        mode: InteractionMode,
        design: BeamDesign,
        grid: SweepGrid,
    },
    ModelCompare {
        incident: SidedAngle,
        target: SidedAngle,
        grid: SweepGrid,
    },
    /// Two-antenna S21/S12 campaign; antennas at `range_m` from the center.
    S21Campaign {
        range_m: f64,
        model: ResponseModel,
    },
}

impl Experiment {
    pub fn kind(&self) -> &'static str {
        match self {
            Experiment::Pattern { .. } => "pattern",
            Experiment::Beamform { .. } => "beamform",
            Experiment::ChannelReciprocity { .. } => "channel-reciprocity",
            Experiment::ChannelReciprocityCampaign { .. } => "channel-reciprocity-campaign",
            Experiment::BeamReciprocity { .. } => "beam-reciprocity",
            Experiment::ModelCompare { .. } => "model-compare",
            Experiment::S21Campaign { .. } => "s21-campaign",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub experiment: Experiment,
    pub scenario_path: Option<PathBuf>,
    pub overrides: Vec<(String, String)>,
    pub out_dir: PathBuf,
}

/// Result of a completed run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    /// `Some(Fail)` when a reciprocity check did not hold.
    pub verdict: Option<Verdict>,
}

/// Header metadata written at the top of pattern CSVs.
#[derive(Debug, Clone)]
pub struct CsvMeta {
    pub scenario_hash: String,
    pub extra: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum WriteMode {
    Create,
    Append,
}

/// Collects artifacts and writes them in one pass, rolling back on error.
#[derive(Debug, Default)]
pub struct ArtifactWriter {
    staged: Vec<(PathBuf, String, WriteMode)>,
}

impl ArtifactWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&mut self, path: impl Into<PathBuf>, content: String) {
        self.staged.push((path.into(), content, WriteMode::Create));
    }

    pub fn append(&mut self, path: impl Into<PathBuf>, content: String) {
        self.staged.push((path.into(), content, WriteMode::Append));
    }

    pub fn commit(self) -> Result<Vec<PathBuf>> {
        // (path, previous length if it existed)
        let mut touched: Vec<(PathBuf, Option<u64>)> = Vec::new();
        let result = (|| -> Result<()> {
            for (path, content, mode) in &self.staged {
                if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
                }
                let previous = fs::metadata(path).ok().map(|m| m.len());
                touched.push((path.clone(), previous.filter(|_| mode == &WriteMode::Append)));
                let mut file = match mode {
                    WriteMode::Create => fs::File::create(path),
                    WriteMode::Append => OpenOptions::new().create(true).append(true).open(path),
                }
                .map_err(|e| Error::io(path, e))?;
                file.write_all(content.as_bytes())
                    .map_err(|e| Error::io(path, e))?;
            }
            Ok(())
        })();
        match result {
            Ok(()) => Ok(self.staged.into_iter().map(|(p, _, _)| p).collect()),
            Err(e) => {
                for (path, previous) in touched.into_iter().rev() {
                    match previous {
                        Some(len) => {
                            if let Ok(f) = OpenOptions::new().write(true).open(&path) {
                                let _ = f.set_len(len);
                            }
                        }
                        None => {
                            let _ = fs::remove_file(&path);
                        }
                    }
                }
                Err(e)
            }
        }
    }
}

fn sha256_hex(parts: &[&[u8]]) -> String {
    let mut h = Sha256::new();
    for p in parts {
        h.update(p);
        h.update([0u8]);
    }
    hex::encode(h.finalize())
}

/// Pattern CSV text, normalized so the peak row reads 0 dB.
pub fn polar_csv(sweep: &PatternSweep, meta: &CsvMeta) -> String {
    let peak_db = sweep.peak_power_db();
    let peak_abs = sweep
        .samples
        .iter()
        .map(|s| s.field.norm())
        .fold(0.0, f64::max);
    let mut out = String::new();
    out.push_str(&format!("# scenario_sha256={}\n", meta.scenario_hash));
    out.push_str(&format!("# model={}\n", sweep.model));
    out.push_str(&format!("# mode={}\n", sweep.mode));
    out.push_str(&format!(
        "# incident_theta_deg={} incident_phi_deg={} incident_side={}\n",
        sweep.incident.elevation_deg(),
        sweep.incident.azimuth_deg(),
        sweep.incident.side
    ));
    out.push_str(&format!("# departure_side={}\n", sweep.departure_side()));
    out.push_str(&format!("# peak_power_db={peak_db}\n"));
    for (k, v) in &meta.extra {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str("theta_deg,phi_deg,power_db,re,im\n");
    for s in &sweep.samples {
        let (re, im) = if peak_abs > 0.0 {
            (s.field.re / peak_abs, s.field.im / peak_abs)
        } else {
            (s.field.re, s.field.im)
        };
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            s.theta_deg,
            s.phi_deg,
            s.power_db - peak_db,
            re,
            im
        ));
    }
    out
}

/// Writes [`polar_csv`] to `path`.
pub fn emit_polar_csv(sweep: &PatternSweep, meta: &CsvMeta, path: &Path) -> Result<()> {
    if sweep.samples.is_empty() {
        return Err(Error::Domain("empty pattern sweep".into()));
    }
    let mut w = ArtifactWriter::new();
    w.create(path, polar_csv(sweep, meta));
    w.commit().map(|_| ())
}

/// Reciprocity report as CSV: one row per (k, u, direction) plus a summary.
pub fn reciprocity_csv(report: &ChannelReciprocityReport) -> String {
    let mut out = String::from("k,u,direction,re,im,abs,phase_deg\n");
    for e in &report.entries {
        for (dir, v) in [(Direction::Downlink, e.downlink), (Direction::Uplink, e.uplink)] {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                e.k,
                e.u,
                dir,
                v.re,
                v.im,
                v.norm(),
                v.arg().to_degrees()
            ));
        }
    }
    out.push_str(&format!(
        "# summary pairs={} max_rel_err={:e} tolerance={:e} verdict={}\n",
        report.entries.len(),
        report.max_rel_err,
        report.tolerance,
        report.verdict
    ));
    out
}

fn verdict_text(verdict: Verdict, max_rel_err: f64) -> String {
    format!("{verdict}\nmax_rel_err={max_rel_err:e}\n")
}

fn angle_json(a: &SidedAngle) -> serde_json::Value {
    json!({
        "theta_deg": a.elevation_deg(),
        "phi_deg": a.azimuth_deg(),
        "side": a.side.as_str(),
    })
}

fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("experiment records serialize");
    s.push('\n');
    s
}

struct LoadedScenario {
    scenario: Scenario,
    hash: String,
}

fn load_scenario(spec: &ExperimentSpec) -> Result<LoadedScenario> {
    let path = spec.scenario_path.as_ref().ok_or_else(|| {
        Error::Config(format!("{} needs --scenario", spec.experiment.kind()))
    })?;
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let scenario = parse_scenario_with(
        &text,
        &ParseOptions {
            base_dir: path.parent().map(Path::to_path_buf),
            overrides: spec.overrides.clone(),
        },
    )?;
    let overrides: String = spec
        .overrides
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect();
    let table = scenario.element.table.to_csv();
    let hash = sha256_hex(&[text.as_bytes(), overrides.as_bytes(), table.as_bytes()]);
    Ok(LoadedScenario { scenario, hash })
}

/// Runs one experiment and writes its artifacts under `spec.out_dir`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunOutcome> {
    let out = |name: &str| spec.out_dir.join(name);
    let mut writer = ArtifactWriter::new();
    let mut verdict = None;

    let summary = match &spec.experiment {
        Experiment::Pattern {
            incident,
            mode,
            config,
            grid,
        } => {
            let loaded = load_scenario(spec)?;
            let scn = &loaded.scenario;
            let cfg = config.resolve(scn, Some(incident))?;
            let sweep = far_field_pattern(scn, &cfg, incident, *mode, grid)?;
            let beam = main_beam(&sweep)?;
            let meta = CsvMeta {
                scenario_hash: loaded.hash.clone(),
                extra: vec![("configuration".into(), cfg.to_string())],
            };
            writer.create(out(PATTERN_CSV), polar_csv(&sweep, &meta));
            writer.create(out(BEAM_REPORT), beam.to_key_values());
            format!("main beam {}", beam.main_beam)
        }
        Experiment::Beamform {
            incident,
            target,
            model,
            grid,
        } => {
            let loaded = load_scenario(spec)?;
            let scn = &loaded.scenario;
            let mode = InteractionMode::between(incident.side, target.side);
            let cfg = configure_surface(scn, incident, target, *model)?;
            let sweep = far_field_pattern(scn, &cfg, incident, mode, grid)?;
            let beam = main_beam(&sweep)?.with_target(target);
            let meta = CsvMeta {
                scenario_hash: loaded.hash.clone(),
                extra: vec![
                    ("design_model".into(), model.to_string()),
                    ("configuration".into(), cfg.to_string()),
                ],
            };
            writer.create(out(CONFIGURATION_FILE), format!("{cfg}\n"));
            writer.create(out(PATTERN_CSV), polar_csv(&sweep, &meta));
            writer.create(out(BEAM_REPORT), beam.to_key_values());
            writer.append(
                out(EXPERIMENT_LOG),
                json_line(&json!({
                    "experiment": "beamform",
                    "scenario_sha256": loaded.hash,
                    "model": model.as_str(),
                    "incident": angle_json(incident),
                    "target": angle_json(target),
                    "configuration": cfg.to_string(),
                    "main_beam": angle_json(&beam.main_beam),
                    "peak_power_db": beam.peak_power_db,
                    "pointing_error_deg": beam.pointing_error_deg,
                })),
            );
            format!(
                "configuration {cfg}; main beam {} ({:.3} deg off target)",
                beam.main_beam,
                beam.pointing_error_deg.unwrap_or_default()
            )
        }
        Experiment::ChannelReciprocity { config, tolerance } => {
            let loaded = load_scenario(spec)?;
            let scn = &loaded.scenario;
            let cfg = config.resolve(scn, None)?;
            let report = check_channel_reciprocity(scn, &cfg, *tolerance)?;
            verdict = Some(report.verdict);
            writer.create(out(RECIPROCITY_CSV), reciprocity_csv(&report));
            writer.create(out(VERDICT_FILE), verdict_text(report.verdict, report.max_rel_err));
            format!(
                "{} over {} pairs, max relative error {:e}",
                report.verdict,
                report.entries.len(),
                report.max_rel_err
            )
        }
        Experiment::ChannelReciprocityCampaign {
            count,
            seed,
            tolerance,
        } => {
            let mut rng = rng_for(*seed);
            let mut csv = format!("# seed={seed}\nscenario,elements,pairs,max_rel_err,verdict\n");
            let mut passes = 0usize;
            let mut worst = 0.0f64;
            for i in 0..*count {
                let (scn, cfg) = random_case(&mut rng);
                let report = check_channel_reciprocity(&scn, &cfg, *tolerance)?;
                if report.verdict == Verdict::Pass {
                    passes += 1;
                }
                worst = worst.max(report.max_rel_err);
                csv.push_str(&format!(
                    "{i},{},{},{:e},{}\n",
                    scn.num_elements(),
                    report.entries.len(),
                    report.max_rel_err,
                    report.verdict
                ));
            }
            let v = if passes == *count {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            verdict = Some(v);
            csv.push_str(&format!(
                "# summary scenarios={count} pass={passes} max_rel_err={worst:e} tolerance={tolerance:e} verdict={v}\n"
            ));
            writer.create(out(CAMPAIGN_CSV), csv);
            writer.create(out(VERDICT_FILE), verdict_text(v, worst));
            format!("{passes}/{count} scenarios PASS, max relative error {worst:e}")
        }
        Experiment::BeamReciprocity {
            incident,
            mode,
            design,
            grid,
        } => {
            let loaded = load_scenario(spec)?;
            let scn = &loaded.scenario;
            let report = beam_reciprocity_experiment(scn, incident, *mode, grid, design)?;
            let sweep1 = far_field_pattern(scn, &report.config, incident, *mode, grid)?;
            let sweep2 =
                far_field_pattern(scn, &report.config, &report.beam1.main_beam, *mode, grid)?;
            let meta = CsvMeta {
                scenario_hash: loaded.hash.clone(),
                extra: vec![("configuration".into(), report.config.to_string())],
            };
            writer.create(out("pattern_round1.csv"), polar_csv(&sweep1, &meta));
            writer.create(out("pattern_round2.csv"), polar_csv(&sweep2, &meta));
            writer.create(out(BEAM_RECIPROCITY_REPORT), beam_report_text(&report, *mode));
            writer.append(
                out(EXPERIMENT_LOG),
                json_line(&json!({
                    "experiment": "beam-reciprocity",
                    "scenario_sha256": loaded.hash,
                    "mode": mode.as_str(),
                    "configuration": report.config.to_string(),
                    "theta0": angle_json(&report.incident0),
                    "theta1": angle_json(&report.beam1.main_beam),
                    "theta2": angle_json(&report.beam2.main_beam),
                    "deviation_deg": report.deviation_deg,
                    "grid_step_deg": report.grid_step_deg,
                    "verdict": reciprocity_word(report.reciprocal),
                })),
            );
            format!(
                "{} -> {} -> {}: {}",
                report.incident0,
                report.beam1.main_beam,
                report.beam2.main_beam,
                reciprocity_word(report.reciprocal)
            )
        }
        Experiment::ModelCompare {
            incident,
            target,
            grid,
        } => {
            let loaded = load_scenario(spec)?;
            let scn = &loaded.scenario;
            let cmp = compare_beamforming_models(scn, incident, target, grid)?;
            let mode = InteractionMode::between(incident.side, target.side);
            let mut csv = String::from(
                "model,configuration,beam_theta_deg,beam_phi_deg,beam_side,pointing_error_deg,power_at_target_db,gain_loss_db\n",
            );
            for o in [&cmp.ideal, &cmp.angle_aware] {
                csv.push_str(&format!(
                    "{},{},{},{},{},{},{},{}\n",
                    o.model,
                    o.config,
                    o.beam.main_beam.elevation_deg(),
                    o.beam.main_beam.azimuth_deg(),
                    o.beam.main_beam.side,
                    o.beam.pointing_error_deg.unwrap_or_default(),
                    o.power_at_target_db,
                    o.beam.gain_loss_db.unwrap_or_default()
                ));
                let sweep = far_field_pattern(scn, &o.config, incident, mode, grid)?;
                let meta = CsvMeta {
                    scenario_hash: loaded.hash.clone(),
                    extra: vec![
                        ("design_model".into(), o.model.to_string()),
                        ("configuration".into(), o.config.to_string()),
                    ],
                };
                writer.create(
                    out(&format!("pattern_{}.csv", o.model.as_str())),
                    polar_csv(&sweep, &meta),
                );
            }
            writer.create(out(MODEL_COMPARISON_CSV), csv);
            writer.append(
                out(EXPERIMENT_LOG),
                json_line(&json!({
                    "experiment": "model-compare",
                    "scenario_sha256": loaded.hash,
                    "incident": angle_json(incident),
                    "target": angle_json(target),
                    "ideal_pointing_error_deg": cmp.ideal.beam.pointing_error_deg,
                    "angle_aware_pointing_error_deg": cmp.angle_aware.beam.pointing_error_deg,
                    "gain_loss_db": cmp.gain_loss_db,
                })),
            );
            format!(
                "pointing error ideal {:.3} deg, angle-aware {:.3} deg; gain loss {:.3} dB",
                cmp.ideal.beam.pointing_error_deg.unwrap_or_default(),
                cmp.angle_aware.beam.pointing_error_deg.unwrap_or_default(),
                cmp.gain_loss_db
            )
        }
        Experiment::S21Campaign { range_m, model } => {
            let loaded = load_scenario(spec)?;
            let campaign = s21_campaign(&loaded.scenario, *range_m, *model)?;
            let all_equal = campaign.iter().all(|r| r.equal);
            let v = if all_equal { Verdict::Pass } else { Verdict::Fail };
            verdict = Some(v);
            let worst = campaign.iter().map(|r| r.rel_err).fold(0.0, f64::max);
            writer.create(out(S21_CSV), s21_csv(&campaign, &loaded.hash, *range_m));
            writer.create(out(VERDICT_FILE), verdict_text(v, worst));
            format!(
                "{} rows, S21 = S12 in all: {all_equal}, max relative error {worst:e}",
                campaign.len()
            )
        }
    };

    let artifacts = writer.commit()?;
    Ok(RunOutcome {
        artifacts,
        summary,
        verdict,
    })
}

fn reciprocity_word(reciprocal: bool) -> &'static str {
    if reciprocal {
        "reciprocal"
    } else {
        "non-reciprocal"
    }
}

fn beam_report_text(r: &BeamReciprocityReport, mode: InteractionMode) -> String {
    let mut s = format!("mode={mode}\nconfiguration={}\n", r.config);
    if let Some(t) = &r.target {
        s.push_str(&format!(
            "target_theta_deg={}\ntarget_phi_deg={}\ntarget_side={}\n",
            t.elevation_deg(),
            t.azimuth_deg(),
            t.side
        ));
    }
    for (name, a) in [
        ("theta0", &r.incident0),
        ("theta1", &r.beam1.main_beam),
        ("theta2", &r.beam2.main_beam),
    ] {
        s.push_str(&format!(
            "{name}_deg={}\n{name}_phi_deg={}\n{name}_side={}\n",
            a.elevation_deg(),
            a.azimuth_deg(),
            a.side
        ));
    }
    s.push_str(&format!(
        "deviation_deg={}\ngrid_step_deg={}\nverdict={}\n",
        r.deviation_deg,
        r.grid_step_deg,
        reciprocity_word(r.reciprocal)
    ));
    s
}

/// One measurement of the two-antenna campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct S21Row {
    pub config_index: usize,
    pub config: SurfaceConfiguration,
    pub config_target: SidedAngle,
    pub antenna2_theta_deg: f64,
    pub antenna2_side: Side,
    /// Antenna 1 to antenna 2 (uplink).
    pub s21: num_complex::Complex64,
    /// Antenna 2 to antenna 1 (downlink).
    pub s12: num_complex::Complex64,
    pub rel_err: f64,
    pub equal: bool,
}

pub const S21_ELEVATIONS_DEG: [f64; 2] = [30.0, 45.0];
pub const S21_TOLERANCE: f64 = 1e-10;

/// Two-antenna S21/S12 campaign.
///
/// Antenna 1 sits at 30 deg elevation, azimuth 0, on the reflection side.
/// Antenna 2 sits at 30 or 45 deg, azimuth 180, on either side, both at
/// `range_m` from the surface center. Four configurations steer toward
/// 30/45 deg on the refraction side and 30/45 deg on the reflection side.
/// Antenna 1 takes the user role and antenna 2 the BS role, so S21 is the
/// uplink and S12 the downlink channel.
pub fn s21_campaign(base: &Scenario, range_m: f64, model: ResponseModel) -> Result<Vec<S21Row>> {
    if !(range_m > 0.0 && range_m.is_finite()) {
        return Err(Error::Config(format!("range must be positive, got {range_m}")));
    }
    let user_template = base.users[0];
    let bs_template = base.bs_antennas[0];
    let ant1_dir = SidedAngle::new(30.0, 0.0, Side::Reflection)?;
    let ant1 = Antenna::new(ant1_dir.unit_vector() * range_m, user_template.gain, user_template.exponent);

    let mut targets = Vec::new();
    for side in [Side::Refraction, Side::Reflection] {
        for theta in S21_ELEVATIONS_DEG {
            targets.push(SidedAngle::new(theta, 180.0, side)?);
        }
    }
    let mut rows = Vec::new();
    for (ci, target) in targets.iter().enumerate() {
        let config = configure_surface(base, &ant1_dir, target, model)?;
        for side in [Side::Reflection, Side::Refraction] {
            for theta in S21_ELEVATIONS_DEG {
                let dir = SidedAngle::new(theta, 180.0, side)?;
                let ant2 = Antenna::new(dir.unit_vector() * range_m, bs_template.gain, bs_template.exponent);
                let scn = Scenario {
                    bs_antennas: vec![ant2],
                    users: vec![ant1],
                    ..base.clone()
                };
                scn.validate()?;
                let s21 = scn.effective_channel(&config, 0, 0, Direction::Uplink)?.value;
                let s12 = scn.effective_channel(&config, 0, 0, Direction::Downlink)?.value;
                let rel_err = relative_error(s21, s12);
                rows.push(S21Row {
                    config_index: ci + 1,
                    config: config.clone(),
                    config_target: *target,
                    antenna2_theta_deg: theta,
                    antenna2_side: side,
                    s21,
                    s12,
                    rel_err,
                    equal: rel_err <= S21_TOLERANCE,
                });
            }
        }
    }
    Ok(rows)
}

fn s21_csv(rows: &[S21Row], hash: &str, range_m: f64) -> String {
    let mut out = format!(
        "# scenario_sha256={hash}\n# antenna ranges: {range_m} m from the surface center (assumed)\n# antenna1: theta=30 phi=0 reflection side; antenna2: phi=180\n"
    );
    out.push_str("config,target_theta_deg,target_side,antenna2_theta_deg,antenna2_side,s21_abs,s21_phase_deg,s12_abs,s12_phase_deg,rel_err,equal\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{:e},{}\n",
            r.config_index,
            r.config_target.elevation_deg(),
            r.config_target.side,
            r.antenna2_theta_deg,
            r.antenna2_side,
            r.s21.norm(),
            r.s21.arg().to_degrees(),
            r.s12.norm(),
            r.s12.arg().to_degrees(),
            r.rel_err,
            r.equal
        ));
    }
    out
}
