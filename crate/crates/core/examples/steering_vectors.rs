//! Steering vectors of the 16-element circular array and a Bartlett
//! azimuth scan that locates a single plane wave.

use std::f64::consts::PI;

use a2glab::channel::UcaGeometry;
use a2glab::error::Result;
use num_complex::Complex64;

/// Returns the azimuth, in degrees, at which the scan peaks for a wave
/// arriving from 137° in the horizontal plane.
pub fn run_example() -> Result<f64> {
    let array = UcaGeometry::default();
    println!(
        "{} elements, radius {:.3} m, wavelength {:.3} m",
        array.num_elements,
        array.radius_m,
        array.wavelength_m()
    );

    let true_azimuth = 137f64.to_radians();
    let wave = array.steering_vector(true_azimuth, PI / 2.0)?;
    let norm: f64 = wave.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    println!(
        "|a| = {norm:.6} (sqrt(M) = {:.6})",
        (array.num_elements as f64).sqrt()
    );

    let mut best = (0.0, f64::NEG_INFINITY);
    for step in 0..3600 {
        let phi = (step as f64 * 0.1).to_radians();
        let probe = array.steering_vector(phi, PI / 2.0)?;
        let response: Complex64 = probe.iter().zip(&wave).map(|(p, w)| p.conj() * w).sum();
        let gain = response.norm_sqr() / (array.num_elements as f64).powi(2);
        if gain > best.1 {
            best = (phi.to_degrees(), gain);
        }
    }
    println!(
        "scan peak at {:.1} deg, normalized gain {:.3}",
        best.0, best.1
    );
    Ok(best.0)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
