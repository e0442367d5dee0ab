//! Brute-force reference implementations shared by the integration tests.
//!
//! Everything here is written from the model equations with plain loops and
//! hard-coded published phases. Nothing calls back into the library's
//! numerics except to read scenario fields.
#![allow(dead_code)]

use std::f64::consts::PI;

use ios_core::{
    CompositionRule, Complex64, Direction, DirectLink, ElementState, InteractionMode,
    ResponseModel, Scenario, Side, SidedAngle, SurfaceConfiguration,
};

pub const C: f64 = 299_792_458.0;

pub const ANGLES: [f64; 5] = [-20.0, -10.0, 0.0, 10.0, 20.0];
pub const REFLECT_ON: [f64; 5] = [-105.0, -135.0, -146.0, -135.0, -105.0];
pub const REFLECT_OFF: [f64; 5] = [11.0, -12.0, -20.0, -12.0, 11.0];
pub const REFRACT_ON: [f64; 5] = [162.0, 133.0, 122.0, 133.0, 162.0];
pub const REFRACT_OFF: [f64; 5] = [-32.0, -53.0, -62.0, -53.0, -32.0];

pub fn published(state: ElementState, mode: InteractionMode) -> &'static [f64; 5] {
    match (state, mode) {
        (ElementState::On, InteractionMode::Reflect) => &REFLECT_ON,
        (ElementState::Off, InteractionMode::Reflect) => &REFLECT_OFF,
        (ElementState::On, InteractionMode::Refract) => &REFRACT_ON,
        (ElementState::Off, InteractionMode::Refract) => &REFRACT_OFF,
    }
}

/// Published phase at |theta|: piecewise linear over 0, 10, 20 deg, flat past 20.
pub fn oracle_psi(state: ElementState, mode: InteractionMode, theta_deg: f64) -> f64 {
    let p = published(state, mode);
    let (p0, p10, p20) = (p[2], p[3], p[4]);
    let t = theta_deg.abs();
    if t >= 20.0 {
        p20
    } else if t >= 10.0 {
        p10 + (p20 - p10) * (t - 10.0) / 10.0
    } else {
        p0 + (p10 - p0) * t / 10.0
    }
}

pub fn cos_n(n: f64, theta_deg: f64) -> f64 {
    if n == 0.0 {
        1.0
    } else if theta_deg.abs() >= 90.0 {
        0.0
    } else {
        (theta_deg * PI / 180.0).cos().powf(n)
    }
}

/// Element gain for the bundled table (unit amplitude).
pub fn oracle_element_gain(
    scn: &Scenario,
    model: ResponseModel,
    state: ElementState,
    mode: InteractionMode,
    ti: f64,
    tr: f64,
) -> Complex64 {
    let p = &scn.element.params;
    let psi = match model {
        ResponseModel::IdealPhase => oracle_psi(state, mode, 0.0),
        ResponseModel::AngleAware => match scn.element.rule {
            CompositionRule::OffsetProduct => {
                oracle_psi(state, mode, ti) + oracle_psi(state, mode, tr) - oracle_psi(state, mode, 0.0)
            }
            CompositionRule::Average => (oracle_psi(state, mode, ti) + oracle_psi(state, mode, tr)) / 2.0,
            CompositionRule::IncidentOnly => oracle_psi(state, mode, ti),
        },
    };
    let amp = (p.gain * cos_n(p.exponent_n, ti) * cos_n(p.exponent_n, tr) * p.area_m2).sqrt();
    Complex64::new(0.0, psi * PI / 180.0).exp() * amp
}

pub fn element_xyz(scn: &Scenario, m: usize) -> [f64; 3] {
    let (rows, cols) = (scn.grid.rows(), scn.grid.cols());
    let (r, c) = (m / cols, m % cols);
    [
        (c as f64 - (cols as f64 - 1.0) / 2.0) * scn.grid.dx(),
        ((rows as f64 - 1.0) / 2.0 - r as f64) * scn.grid.dy(),
        0.0,
    ]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn len(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Elevation (deg) of point p seen from element position e, off the normal
/// on p's side.
fn elevation(e: [f64; 3], p: [f64; 3]) -> f64 {
    let v = sub(p, e);
    (v[2].abs() / len(v)).acos() * 180.0 / PI
}

fn wave(d: f64, lambda: f64) -> Complex64 {
    Complex64::new(0.0, -2.0 * PI * d / lambda).exp()
}

/// H = h + sum over elements of (incoming link) g (outgoing link).
pub fn oracle_channel(
    scn: &Scenario,
    cfg: &SurfaceConfiguration,
    k: usize,
    u: usize,
    direction: Direction,
) -> Complex64 {
    let lambda = C / scn.frequency_hz;
    let bs = &scn.bs_antennas[k];
    let user = &scn.users[u];
    let b = [bs.position.x, bs.position.y, bs.position.z];
    let q = [user.position.x, user.position.y, user.position.z];

    let mut h = Complex64::new(0.0, 0.0);
    if scn.direct_link == DirectLink::FreeSpace {
        let d = len(sub(q, b));
        // Each antenna faces the plane: boresight is -sign(z) z_hat.
        let off = |from: [f64; 3], to: [f64; 3]| {
            let v = sub(to, from);
            (-from[2].signum() * v[2] / len(v)).clamp(-1.0, 1.0).acos() * 180.0 / PI
        };
        let gk = bs.gain * cos_n(bs.exponent, off(b, q));
        let gu = user.gain * cos_n(user.exponent, off(q, b));
        h = wave(d, lambda) * (lambda * (gk * gu).sqrt() / (4.0 * PI * d));
    }

    for m in 0..scn.grid.len() {
        let e = element_xyz(scn, m);
        let (db, du) = (len(sub(b, e)), len(sub(q, e)));
        let (tb, tu) = (elevation(e, b), elevation(e, q));
        let h_bs = wave(db, lambda) * ((bs.gain * cos_n(bs.exponent, tb)).sqrt() / ((4.0 * PI).sqrt() * db));
        let h_user = wave(du, lambda)
            * (lambda * (user.gain * cos_n(user.exponent, tu)).sqrt() / (4.0 * PI * du));
        let mode = if (b[2] > 0.0) == (q[2] > 0.0) {
            InteractionMode::Reflect
        } else {
            InteractionMode::Refract
        };
        let state = cfg.states()[m];
        let term = match direction {
            Direction::Downlink => {
                h_bs * oracle_element_gain(scn, ResponseModel::AngleAware, state, mode, tb, tu) * h_user
            }
            Direction::Uplink => {
                h_user * oracle_element_gain(scn, ResponseModel::AngleAware, state, mode, tu, tb) * h_bs
            }
        };
        h += term;
    }
    h
}

/// Unit vector from the surface toward direction (theta, phi) on `side`.
pub fn unit(theta_deg: f64, phi_deg: f64, side: Side) -> [f64; 3] {
    let (t, p) = (theta_deg * PI / 180.0, phi_deg * PI / 180.0);
    let z = if side == Side::Reflection { t.cos() } else { -t.cos() };
    [t.sin() * p.cos(), t.sin() * p.sin(), z]
}

/// Double-loop far-field sum over elements for one departure direction.
pub fn oracle_far_field(
    scn: &Scenario,
    cfg: &SurfaceConfiguration,
    inc: &SidedAngle,
    dep: &SidedAngle,
    model: ResponseModel,
) -> Complex64 {
    let lambda = C / scn.frequency_hz;
    let a = unit(inc.elevation_deg(), inc.azimuth_deg(), inc.side);
    let b = unit(dep.elevation_deg(), dep.azimuth_deg(), dep.side);
    let mode = if inc.side == dep.side {
        InteractionMode::Reflect
    } else {
        InteractionMode::Refract
    };
    let mut field = Complex64::new(0.0, 0.0);
    for m in 0..scn.grid.len() {
        let r = element_xyz(scn, m);
        let mut phase = 0.0;
        for i in 0..3 {
            phase += (a[i] + b[i]) * r[i];
        }
        phase *= 2.0 * PI / lambda;
        let g = oracle_element_gain(
            scn,
            model,
            cfg.states()[m],
            mode,
            inc.elevation_deg(),
            dep.elevation_deg(),
        );
        field += Complex64::new(0.0, phase).exp() * g;
    }
    field
}

/// Largest |field(target)| over all 2^M configurations.
pub fn exhaustive_best(
    scn: &Scenario,
    inc: &SidedAngle,
    target: &SidedAngle,
    model: ResponseModel,
) -> f64 {
    let m = scn.grid.len();
    assert!(m <= 16);
    (0..1u64 << m)
        .map(|bits| {
            let cfg = SurfaceConfiguration::from_index(m, bits);
            oracle_far_field(scn, &cfg, inc, target, model).norm()
        })
        .fold(0.0, f64::max)
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    let s = a.norm().max(b.norm());
    if s == 0.0 {
        0.0
    } else {
        (a - b).norm() / s
    }
}
