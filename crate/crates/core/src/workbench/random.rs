//! Seeded random scenarios for property campaigns.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{Antenna, DirectLink, Scenario};
use crate::element::{CompositionRule, ElementModel, ElementPatternParams, ElementResponseTable};
use crate::geometry::{IosGrid, Vec3};
use crate::surface::SurfaceConfiguration;

/// Positions are drawn from this half-width box (meters).
pub const BOX_HALF_WIDTH_M: f64 = 1.5;
/// Minimum |z| of any antenna or user.
pub const MIN_STANDOFF_M: f64 = 0.05;

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_point<R: Rng + ?Sized>(rng: &mut R, sign: f64) -> Vec3 {
    Vec3::new(
        rng.random_range(-BOX_HALF_WIDTH_M..BOX_HALF_WIDTH_M),
        rng.random_range(-BOX_HALF_WIDTH_M..BOX_HALF_WIDTH_M),
        sign * rng.random_range(MIN_STANDOFF_M..BOX_HALF_WIDTH_M),
    )
}

fn random_antenna<R: Rng + ?Sized>(rng: &mut R, sign: f64) -> Antenna {
    Antenna::new(
        random_point(rng, sign),
        rng.random_range(0.5..10.0),
        rng.random_range(0.0..3.0),
    )
}

/// A random scene: 1-4 BS antennas, 1-4 users alternating between the two
/// sides of the surface, grids up to 8x8, carrier between 1 and 30 GHz.
pub fn random_scenario<R: Rng + ?Sized>(rng: &mut R) -> Scenario {
    let rows = rng.random_range(1..=8);
    let cols = rng.random_range(1..=8);
    let pitch = rng.random_range(0.005..0.08);
    let grid = IosGrid::new(rows, cols, pitch, pitch).expect("positive pitch");
    let frequency_hz = rng.random_range(1e9..30e9);

    let n_bs = rng.random_range(1..=4);
    let bs_antennas = (0..n_bs)
        .map(|_| {
            let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
            random_antenna(rng, sign)
        })
        .collect();
    let n_users = rng.random_range(1..=4);
    let first_sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let users = (0..n_users)
        .map(|i| random_antenna(rng, if i % 2 == 0 { first_sign } else { -first_sign }))
        .collect();

    let params = ElementPatternParams::new(
        rng.random_range(0.5..4.0),
        grid.element_area(),
        rng.random_range(0.0..3.0),
    )
    .expect("positive parameters");
    let rule = if rng.random_bool(0.5) {
        CompositionRule::OffsetProduct
    } else {
        CompositionRule::Average
    };
    let direct_link = if rng.random_bool(0.5) {
        DirectLink::Blocked
    } else {
        DirectLink::FreeSpace
    };
    Scenario::new(
        frequency_hz,
        grid,
        bs_antennas,
        users,
        ElementModel::new(params, ElementResponseTable::bundled()).with_rule(rule),
        direct_link,
    )
    .expect("generated scenario is valid")
}

/// A random scene and a random configuration for it.
pub fn random_case<R: Rng + ?Sized>(rng: &mut R) -> (Scenario, SurfaceConfiguration) {
    let scn = random_scenario(rng);
    let cfg = SurfaceConfiguration::random(scn.num_elements(), rng);
    (scn, cfg)
}
