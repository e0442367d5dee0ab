//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::fs;
use std::path::Path;
use std::time::Instant;

use common::*;
use ios_core::channel::check_cascade_reciprocity;
use ios_core::workbench::*;
use ios_core::*;
use rand::Rng;

const CASCADE_TOL: f64 = 1e-12;
const CASCADE_BUDGET_S: f64 = 5.0;
const CHANNEL_TOL: f64 = 1e-10;
const PATTERN_TOL: f64 = 1e-12;
const PATTERN_BUDGET_S: f64 = 1.0;
const OPTIMUM_TIE_TOL: f64 = 1e-12;
const GRID_STEP_DEG: f64 = 1.0;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn scene(rows: usize, cols: usize, n: f64, table: ElementResponseTable) -> Scenario {
    Scenario::new(
        3.6e9,
        IosGrid::new(rows, cols, 0.04, 0.04).unwrap(),
        vec![Antenna::isotropic(Vec3::new(0.0, 0.0, 1.0))],
        vec![Antenna::isotropic(Vec3::new(0.0, 0.0, -1.0))],
        ElementModel::new(ElementPatternParams::new(1.0, 0.0016, n).unwrap(), table),
        DirectLink::Blocked,
    )
    .unwrap()
}

fn cascade_reciprocity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng_for(1001);
    let mut worst = 0.0f64;
    let mut triples = 0;
    while triples < 2000 {
        let (scn, _) = random_case(&mut rng);
        for _ in 0..4 {
            let k = rng.random_range(0..scn.bs_antennas.len());
            let m = rng.random_range(0..scn.num_elements());
            let u = rng.random_range(0..scn.users.len());
            let r = check_cascade_reciprocity(&scn, k, m, u).unwrap();
            worst = worst.max(r.max_rel_err);
            triples += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        worst <= CASCADE_TOL && secs < CASCADE_BUDGET_S,
        format!("{triples} triples, max rel err {worst:.3e} (tol {CASCADE_TOL:e}), {secs:.3} s (budget {CASCADE_BUDGET_S} s)"),
    )
}

fn channel_reciprocity() -> Outcome {
    let mut rng = rng_for(2002);
    let mut worst = 0.0f64;
    let (mut reflect, mut refract, mut blocked, mut free) = (0, 0, 0, 0);
    let scenarios = 1000;
    for _ in 0..scenarios {
        let (scn, cfg) = random_case(&mut rng);
        match scn.direct_link {
            DirectLink::Blocked => blocked += 1,
            DirectLink::FreeSpace => free += 1,
        }
        for k in 0..scn.bs_antennas.len() {
            for u in 0..scn.users.len() {
                if Side::of(scn.bs_antennas[k].position.z) == Side::of(scn.users[u].position.z) {
                    reflect += 1;
                } else {
                    refract += 1;
                }
                let d = scn.effective_channel(&cfg, k, u, Direction::Downlink).unwrap().value;
                let up = scn.effective_channel(&cfg, k, u, Direction::Uplink).unwrap().value;
                let err = if d.norm() > 0.0 { (d - up).norm() / d.norm() } else { up.norm() };
                worst = worst.max(err);
            }
        }
    }
    let covered = reflect > 0 && refract > 0 && blocked > 0 && free > 0;
    outcome(
        worst <= CHANNEL_TOL && covered,
        format!(
            "{scenarios} scenarios ({reflect} reflect / {refract} refract pairs, {blocked} blocked / {free} free-space), max |HD-HU|/|HD| {worst:.3e} (tol {CHANNEL_TOL:e})"
        ),
    )
}

fn table_fidelity() -> Outcome {
    let table = ElementResponseTable::bundled();
    let mut exact = 0;
    let mut even = true;
    for state in ElementState::ALL {
        for mode in [InteractionMode::Reflect, InteractionMode::Refract] {
            for (t, psi) in ANGLES.iter().zip(published(state, mode)) {
                let want = Complex64::from_polar(1.0, psi.to_radians());
                let c = table.lookup(state, mode, *t).unwrap();
                if c.psi_deg == *psi && c.beta == 1.0 && table.lookup_gamma(state, mode, *t).unwrap() == want {
                    exact += 1;
                }
                even &= table.lookup(state, mode, -*t).unwrap() == c;
            }
        }
    }
    outcome(
        exact == 20 && even,
        format!("{exact}/20 entries bit-exact, psi(-theta) = psi(theta): {even}"),
    )
}

fn pattern_oracle() -> Outcome {
    let scn = scene(3, 3, 1.0, ElementResponseTable::bundled());
    let mut rng = rng_for(4004);
    let grid = SweepGrid::hemisphere(GRID_STEP_DEG);
    let mut worst = 0.0f64;
    let mut slowest = 0.0f64;
    let mut points = 0;
    for (mode, dep_side) in [
        (InteractionMode::Reflect, Side::Reflection),
        (InteractionMode::Refract, Side::Refraction),
    ] {
        let cfg = SurfaceConfiguration::random(9, &mut rng);
        let inc = SidedAngle::new(rng.random_range(0.0..80.0), rng.random_range(0.0..360.0), Side::Reflection).unwrap();
        let start = Instant::now();
        let sweep = far_field_pattern(&scn, &cfg, &inc, mode, &grid).unwrap();
        slowest = slowest.max(start.elapsed().as_secs_f64());
        for s in &sweep.samples {
            let dep = SidedAngle::new(s.theta_deg, s.phi_deg, dep_side).unwrap();
            let want = oracle_far_field(&scn, &cfg, &inc, &dep, ResponseModel::AngleAware);
            worst = worst.max(rel_err(s.field, want));
            points += 1;
        }
    }
    outcome(
        worst <= PATTERN_TOL && slowest < PATTERN_BUDGET_S,
        format!("{points} hemisphere points at 1 deg, max rel err {worst:.3e} (tol {PATTERN_TOL:e}), slowest sweep {slowest:.3} s (budget {PATTERN_BUDGET_S} s)"),
    )
}

fn one_bit_optimality() -> Outcome {
    let mut rng = rng_for(5005);
    let pairs = 120;
    let mut failures = 0;
    let mut worst_gap = 0.0f64;
    for _ in 0..pairs {
        let rows = rng.random_range(1..=3);
        let cols = rng.random_range(1..=3);
        let scn = scene(rows, cols, rng.random_range(0.0..2.0), ElementResponseTable::bundled());
        let side = |r: &mut rand_chacha::ChaCha8Rng| if r.random_bool(0.5) { Side::Reflection } else { Side::Refraction };
        let inc = SidedAngle::new(rng.random_range(0.0..85.0), rng.random_range(0.0..360.0), side(&mut rng)).unwrap();
        let tgt = SidedAngle::new(rng.random_range(0.0..85.0), rng.random_range(0.0..360.0), side(&mut rng)).unwrap();
        for model in [ResponseModel::IdealPhase, ResponseModel::AngleAware] {
            let cfg = configure_surface(&scn, &inc, &tgt, model).unwrap();
            let got = far_field(&scn, &cfg, &inc, &tgt, model).unwrap().norm();
            let best = exhaustive_best(&scn, &inc, &tgt, model);
            let gap = (best - got) / best;
            worst_gap = worst_gap.max(gap);
            if gap > OPTIMUM_TIE_TOL {
                failures += 1;
            }
        }
    }
    outcome(
        failures == 0,
        format!("{pairs} incident/target pairs x 2 models, M <= 9, {failures} below exhaustive optimum, worst relative gap {worst_gap:.3e}"),
    )
}

fn beam_non_reciprocity() -> Outcome {
    let grid = SweepGrid::plane_cut(GRID_STEP_DEG);
    let inc = SidedAngle::new(60.0, 0.0, Side::Reflection).unwrap();
    let design = BeamDesign::BestTarget { model: ResponseModel::AngleAware };
    let tapered = scene(3, 3, 1.0, ElementResponseTable::bundled());
    let flat = scene(3, 3, 0.0, ElementResponseTable::bundled().angle_independent());
    let mut pass = true;
    let mut detail = Vec::new();
    for mode in [InteractionMode::Refract, InteractionMode::Reflect] {
        let r = beam_reciprocity_experiment(&tapered, &inc, mode, &grid, &design).unwrap();
        let theta2 = r.beam2.main_beam.elevation_deg();
        pass &= theta2 < 60.0 - GRID_STEP_DEG && !r.reciprocal;
        detail.push(format!(
            "n=1 {mode}: 60 -> {} -> {} ({})",
            r.beam1.main_beam.elevation_deg(),
            theta2,
            if r.reciprocal { "reciprocal" } else { "non-reciprocal" }
        ));
        let r = beam_reciprocity_experiment(&flat, &inc, mode, &grid, &design).unwrap();
        pass &= r.reciprocal;
        detail.push(format!("n=0 flat {mode}: deviation {:.2} deg", r.deviation_deg));
    }
    outcome(pass, detail.join("; "))
}

fn model_comparison() -> Outcome {
    let scn = scene(12, 12, 1.0, ElementResponseTable::bundled());
    let grid = SweepGrid::plane_cut(GRID_STEP_DEG);
    let mut hits = Vec::new();
    let mut scanned = 0;
    for mode in [InteractionMode::Refract, InteractionMode::Reflect] {
        let side = mode.departure_side(Side::Reflection);
        for ti in (0..=80).step_by(5) {
            for tt in (0..=80).step_by(5) {
                for phi in [0.0, 180.0] {
                    let inc = SidedAngle::new(ti as f64, 0.0, Side::Reflection).unwrap();
                    let tgt = SidedAngle::new(tt as f64, phi, side).unwrap();
                    let c = compare_beamforming_models(&scn, &inc, &tgt, &grid).unwrap();
                    scanned += 1;
                    let ideal_err = c.ideal.beam.pointing_error_deg.unwrap();
                    let aware_err = c.angle_aware.beam.pointing_error_deg.unwrap();
                    if ideal_err >= GRID_STEP_DEG && c.gain_loss_db > 0.0 && aware_err <= GRID_STEP_DEG {
                        hits.push((c.gain_loss_db, mode, ti, tt, phi, ideal_err, aware_err));
                    }
                }
            }
        }
    }
    hits.sort_by(|a, b| b.0.total_cmp(&a.0));
    let detail = match hits.first() {
        Some((loss, mode, ti, tt, phi, ie, ae)) => format!(
            "12x12, {scanned} pairs scanned, {} qualify; largest loss: {mode} incident {ti} deg -> target {tt}/{phi} deg, ideal error {ie:.1} deg, angle-aware error {ae:.1} deg, loss {loss:.3} dB",
            hits.len()
        ),
        None => format!("12x12, {scanned} pairs scanned, none qualify"),
    };
    outcome(!hits.is_empty(), detail)
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let scenarios = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios");
    let root = tempfile::tempdir().unwrap();
    let grid = SweepGrid::plane_cut(GRID_STEP_DEG);
    let inc = SidedAngle::new(60.0, 0.0, Side::Reflection).unwrap();
    let experiments = vec![
        (Experiment::Pattern { incident: inc, mode: InteractionMode::Reflect, config: ConfigSource::Random { seed: 8 }, grid: grid.clone() }, Some("round_trip_3x3.ini")),
        (Experiment::Beamform { incident: inc, target: SidedAngle::new(20.0, 180.0, Side::Refraction).unwrap(), model: ResponseModel::IdealPhase, grid: grid.clone() }, Some("compare_12x12.ini")),
        (Experiment::ChannelReciprocity { config: ConfigSource::Random { seed: 8 }, tolerance: CHANNEL_TOL }, Some("s21_16x20.ini")),
        (Experiment::ChannelReciprocityCampaign { count: 200, seed: 8, tolerance: CHANNEL_TOL }, None),
        (Experiment::BeamReciprocity { incident: inc, mode: InteractionMode::Refract, design: BeamDesign::BestTarget { model: ResponseModel::AngleAware }, grid: grid.clone() }, Some("round_trip_3x3.ini")),
        (Experiment::ModelCompare { incident: SidedAngle::new(75.0, 0.0, Side::Reflection).unwrap(), target: SidedAngle::new(20.0, 0.0, Side::Refraction).unwrap(), grid: grid.clone() }, Some("compare_12x12.ini")),
        (Experiment::S21Campaign { range_m: 1.0, model: ResponseModel::AngleAware }, Some("s21_16x20.ini")),
    ];
    let mut identical = 0;
    let mut files = 0;
    for (i, (experiment, scenario)) in experiments.iter().enumerate() {
        let mut snaps = Vec::new();
        for (run, threads) in [1usize, 1, 8].into_iter().enumerate() {
            let out = root.path().join(format!("{i}-{run}"));
            let spec = ExperimentSpec {
                experiment: experiment.clone(),
                scenario_path: scenario.map(|s| scenarios.join(s)),
                overrides: vec![],
                out_dir: out.clone(),
            };
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| run_experiment(&spec)).unwrap();
            snaps.push(snapshot(&out));
        }
        files += snaps[0].len();
        if snaps[0] == snaps[1] && snaps[0] == snaps[2] {
            identical += 1;
        }
    }
    outcome(
        identical == experiments.len(),
        format!("{identical}/{} experiment kinds byte-identical over 2 runs at 1 thread and 1 at 8 threads ({files} files per run)", experiments.len()),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("cascaded link reciprocity", cascade_reciprocity),
        ("end-to-end channel reciprocity", channel_reciprocity),
        ("response table fidelity", table_fidelity),
        ("far-field pattern vs brute force", pattern_oracle),
        ("1-bit configuration optimality", one_bit_optimality),
        ("beam non-reciprocity", beam_non_reciprocity),
        ("ideal vs angle-aware degradation", model_comparison),
        ("artifact determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {} {}: {} - {}",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
