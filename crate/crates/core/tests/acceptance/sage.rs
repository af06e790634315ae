use std::time::Instant;

use a2glab::channel::{make_default_shape, wrap_pi, CirTiming, PathComponent, UcaGeometry};
use a2glab::hrpe::{sage_estimate, PathEstimate, SageConfig};
use a2glab::synth::{noise_power_for_snr, synthesize_snapshot, SynthesisConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::support::{separated_paths, Verdict};

const TRIALS: usize = 100;
const PATHS: usize = 3;
const SNR_DB: f64 = 20.0;
const DELAY_TOL_S: f64 = 10e-9;
const AZIMUTH_TOL_DEG: f64 = 2.0;
const POWER_TOL_DB: f64 = 0.5;
const REQUIRED_RECOVERIES: usize = 95;
const RUNTIME_LIMIT_S: f64 = 300.0;

const ORDER_TRIALS: usize = 100;
const ORDER_MAX_PATHS: usize = 10;
const ORDER_SNR_DB: f64 = 15.0;
const REQUIRED_ORDERS: usize = 90;

struct Errors {
    delay_s: f64,
    azimuth_deg: f64,
    power_db: f64,
}

fn errors(truth: &PathComponent, est: &PathEstimate) -> Errors {
    Errors {
        delay_s: (est.delay_s - truth.delay_s).abs(),
        azimuth_deg: wrap_pi(est.azimuth_rad - truth.azimuth_rad)
            .abs()
            .to_degrees(),
        power_db: (10.0 * (est.power / truth.power()).log10()).abs(),
    }
}

fn within_tolerance(e: &Errors) -> bool {
    e.delay_s <= DELAY_TOL_S && e.azimuth_deg <= AZIMUTH_TOL_DEG && e.power_db <= POWER_TOL_DB
}

/// True when the true paths can be matched one-to-one to distinct
/// estimated paths, each within tolerance.
fn all_recovered(
    truth: &[PathComponent],
    estimated: &[PathEstimate],
    used: &mut Vec<bool>,
) -> bool {
    let Some((first, rest)) = truth.split_first() else {
        return true;
    };
    for (j, est) in estimated.iter().enumerate() {
        if !used[j] && within_tolerance(&errors(first, est)) {
            used[j] = true;
            if all_recovered(rest, estimated, used) {
                return true;
            }
            used[j] = false;
        }
    }
    false
}

fn simulate(
    seed: u64,
    count: usize,
    snr_db: f64,
    timing: &CirTiming,
) -> (Vec<PathComponent>, a2glab::channel::ArrayCirSet) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let paths = separated_paths(&mut rng, count, timing);
    let strongest = paths.iter().map(|p| p.power()).fold(0.0, f64::max);
    let shape =
        make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s).unwrap();
    let synthesis = SynthesisConfig {
        noise_power: noise_power_for_snr(strongest, snr_db),
        rng_seed: seed,
        ..SynthesisConfig::default()
    };
    let cirs = synthesize_snapshot(
        &paths,
        &[],
        &UcaGeometry::default(),
        &shape,
        timing,
        &synthesis,
    )
    .unwrap();
    (paths, cirs)
}

pub fn round_trip() -> Verdict {
    let timing = CirTiming::default();
    let shape =
        make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s).unwrap();
    let cfg = SageConfig::default();
    let start = Instant::now();
    let mut recovered = 0;
    let mut exact_order = 0;
    let (mut worst_delay, mut worst_azimuth, mut worst_power) = (0.0f64, 0.0f64, 0.0f64);
    for trial in 0..TRIALS {
        let (truth, cirs) = simulate(1_000 + trial as u64, PATHS, SNR_DB, &timing);
        let estimate = sage_estimate(&cirs, &shape, &cfg).unwrap();
        if estimate.model_order == PATHS {
            exact_order += 1;
        }
        let mut used = vec![false; estimate.len()];
        if all_recovered(&truth, &estimate.paths, &mut used) {
            recovered += 1;
            for t in &truth {
                let e = estimate
                    .paths
                    .iter()
                    .map(|p| errors(t, p))
                    .filter(within_tolerance)
                    .min_by(|a, b| a.delay_s.total_cmp(&b.delay_s))
                    .expect("matched");
                worst_delay = worst_delay.max(e.delay_s);
                worst_azimuth = worst_azimuth.max(e.azimuth_deg);
                worst_power = worst_power.max(e.power_db);
            }
        }
    }
    let runtime = start.elapsed().as_secs_f64();
    Verdict::new(
        recovered >= REQUIRED_RECOVERIES && runtime <= RUNTIME_LIMIT_S,
        format!(
            "{recovered}/{TRIALS} trials recovered all paths (need {REQUIRED_RECOVERIES}), \
             {exact_order}/{TRIALS} with model order {PATHS}; worst matched errors \
             {:.2} ns, {:.3} deg, {:.3} dB; runtime {runtime:.0} s (limit {RUNTIME_LIMIT_S:.0} s)",
            worst_delay * 1e9,
            worst_azimuth,
            worst_power
        ),
    )
}

pub fn model_order() -> Verdict {
    let timing = CirTiming::default();
    let shape =
        make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s).unwrap();
    let cfg = SageConfig {
        max_paths: ORDER_MAX_PATHS,
        ..SageConfig::default()
    };
    let mut correct = 0;
    let mut misses = Vec::new();
    for trial in 0..ORDER_TRIALS {
        let true_order = trial % 5 + 1;
        let (_, cirs) = simulate(5_000 + trial as u64, true_order, ORDER_SNR_DB, &timing);
        let estimate = sage_estimate(&cirs, &shape, &cfg).unwrap();
        if estimate.model_order == true_order {
            correct += 1;
        } else {
            misses.push(format!("L={true_order}->{}", estimate.model_order));
        }
    }
    Verdict::new(
        correct >= REQUIRED_ORDERS,
        format!(
            "{correct}/{ORDER_TRIALS} correct model orders at {ORDER_SNR_DB} dB (need {REQUIRED_ORDERS}); misses [{}]",
            misses.join(", ")
        ),
    )
}
