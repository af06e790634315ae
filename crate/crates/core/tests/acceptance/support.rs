use std::f64::consts::PI;

use a2glab::channel::{CirTiming, PathComponent, UcaGeometry};
use a2glab::hrpe::ChannelEstimate;
use num_complex::Complex64;
use rand::Rng;

pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

/// Smallest angle between two azimuths, degrees.
pub fn azimuth_gap_deg(a_deg: f64, b_deg: f64) -> f64 {
    let d = (a_deg - b_deg).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Random plane waves: delays at least two taps apart, azimuths at least
/// 30° apart, powers within 6 dB of each other, small Doppler shifts.
pub fn separated_paths<R: Rng>(
    rng: &mut R,
    count: usize,
    timing: &CirTiming,
) -> Vec<PathComponent> {
    let ts = timing.tap_spacing_s;
    let mut tap = rng.random_range(20.0..60.0);
    let mut delays = Vec::with_capacity(count);
    for _ in 0..count {
        delays.push(tap * ts);
        tap += rng.random_range(2.0..8.0);
    }
    let azimuths = loop {
        let a: Vec<f64> = (0..count).map(|_| rng.random_range(0.0..360.0)).collect();
        let separated =
            (0..count).all(|i| (i + 1..count).all(|j| azimuth_gap_deg(a[i], a[j]) >= 30.0));
        if separated {
            break a;
        }
    };
    delays
        .iter()
        .zip(&azimuths)
        .map(|(&delay, &azimuth)| {
            let power_db: f64 = rng.random_range(-6.0..0.0);
            let amplitude =
                Complex64::from_polar(10f64.powf(power_db / 20.0), rng.random_range(-PI..PI));
            PathComponent::new(amplitude, delay, azimuth.to_radians())
                .with_doppler(rng.random_range(-20.0..20.0))
        })
        .collect()
}

/// Horizontal paths `(power, delay_s, azimuth_rad)` as an estimate.
pub fn estimate_of(paths: &[(f64, f64, f64)]) -> ChannelEstimate {
    let components: Vec<PathComponent> = paths
        .iter()
        .map(|&(p, d, a)| PathComponent::new(Complex64::new(p.sqrt(), 0.0), d, a))
        .collect();
    ChannelEstimate::from_paths(&components, &UcaGeometry::default()).expect("valid paths")
}

/// Labels renumbered by first appearance, so equal partitions compare equal.
pub fn canonical(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// `|a − b| ≤ tol·max(|a|, |b|)`; exact equality passes.
pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs())
}
