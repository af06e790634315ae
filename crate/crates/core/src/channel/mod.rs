//! Shared channel physics: array geometry, path parameters, the system
//! shape function and the array CIR tensor.
//!
//! Angles follow one convention throughout the crate: azimuth `φ` in the
//! array plane, measured from the first element, and elevation `θ` measured
//! from zenith (array boresight), so `θ = π/2` is a horizontal arrival.

mod cir;
mod geometry;
pub mod io;
mod path;
mod shape;

pub use cir::{ArrayCirSet, CirTiming};
pub use geometry::{steering_vector, UcaGeometry, SPEED_OF_LIGHT};
pub use path::{PathComponent, PerAntennaGains};
pub use shape::{band_limited_interpolate, evaluate_shape, make_default_shape, ShapeFunction};

use std::f64::consts::PI;

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_two_pi(angle: f64) -> f64 {
    let w = angle.rem_euclid(2.0 * PI);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if w >= 2.0 * PI {
        0.0
    } else {
        w
    }
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let w = wrap_two_pi(angle);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}
