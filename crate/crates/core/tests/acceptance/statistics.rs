use a2glab::clustering::{Clustering, McdConfig};
use a2glab::hrpe::ChannelEstimate;
use a2glab::stats::{
    azimuth_spread_deg, cluster_level_stats, composite_spreads, delay_spread, ensemble_summary,
    ChannelStats, EnsembleLabel, Metric,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::support::{estimate_of, rel_close, Verdict};

const INSTANCES: usize = 200;
const REL_TOL: f64 = 1e-12;
const ANALYTIC_TOL: f64 = 1e-9;

/// Direct re-computation of the per-channel statistics.
struct Direct {
    delay_spread_s: f64,
    azimuth_spread_deg: f64,
    clusters: Vec<(usize, f64, f64, f64)>,
    k_db: Option<f64>,
    delay_offsets_s: Vec<f64>,
    azimuth_offsets_deg: Vec<f64>,
    power_offsets_db: Vec<f64>,
}

fn direct_delay_spread(p: &[f64], tau: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    let mean = p.iter().zip(tau).map(|(p, t)| p * t).sum::<f64>() / total;
    (p.iter()
        .zip(tau)
        .map(|(p, t)| p * (t - mean).powi(2))
        .sum::<f64>()
        / total)
        .sqrt()
}

/// `sqrt(−ln(1 − D))` with `D` the power-weighted mean of
/// `1 − cos(φ_i − φ_j)` over ordered pairs, written with half-angle sines.
fn direct_azimuth_spread_deg(p: &[f64], phi: &[f64]) -> f64 {
    let total: f64 = p.iter().sum();
    let mut d = 0.0;
    for i in 0..p.len() {
        for j in 0..p.len() {
            if i != j {
                d += p[i] * p[j] * 2.0 * ((phi[i] - phi[j]) / 2.0).sin().powi(2);
            }
        }
    }
    (-(-d / (total * total)).ln_1p()).sqrt().to_degrees()
}

fn direct(estimate: &ChannelEstimate, clustering: &Clustering) -> Direct {
    let p: Vec<f64> = estimate.paths.iter().map(|x| x.power).collect();
    let tau: Vec<f64> = estimate.paths.iter().map(|x| x.delay_s).collect();
    let phi: Vec<f64> = estimate.paths.iter().map(|x| x.azimuth_rad).collect();
    let mut groups: Vec<(f64, Vec<usize>)> = clustering
        .clusters
        .iter()
        .map(|c| {
            (
                c.member_indices.iter().map(|&i| p[i]).sum(),
                c.member_indices.clone(),
            )
        })
        .collect();
    groups.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut clusters = Vec::new();
    let mut centroids = Vec::new();
    for (power, members) in &groups {
        let cp: Vec<f64> = members.iter().map(|&i| p[i]).collect();
        let ct: Vec<f64> = members.iter().map(|&i| tau[i]).collect();
        let ca: Vec<f64> = members.iter().map(|&i| phi[i]).collect();
        let (ds, az) = if members.len() > 1 {
            (
                direct_delay_spread(&cp, &ct),
                direct_azimuth_spread_deg(&cp, &ca),
            )
        } else {
            (0.0, 0.0)
        };
        clusters.push((members.len(), *power, ds, az));
        let mean_delay = cp.iter().zip(&ct).map(|(a, b)| a * b).sum::<f64>() / power;
        let s: f64 = cp.iter().zip(&ca).map(|(a, b)| a * b.sin()).sum();
        let c: f64 = cp.iter().zip(&ca).map(|(a, b)| a * b.cos()).sum();
        centroids.push((mean_delay, s.atan2(c), *power));
    }
    let (d0, a0, p0) = centroids[0];
    let rest = &centroids[1..];
    let others: f64 = rest.iter().map(|c| c.2).sum();
    Direct {
        delay_spread_s: direct_delay_spread(&p, &tau),
        azimuth_spread_deg: direct_azimuth_spread_deg(&p, &phi),
        clusters,
        k_db: (!rest.is_empty()).then(|| 10.0 * (p0 / others).log10()),
        delay_offsets_s: rest.iter().map(|c| c.0 - d0).collect(),
        azimuth_offsets_deg: rest
            .iter()
            .map(|c| {
                let d = c.1 - a0;
                d.sin().abs().atan2(d.cos()).to_degrees()
            })
            .collect(),
        power_offsets_db: rest.iter().map(|c| 10.0 * (p0 / c.2).log10()).collect(),
    }
}

fn random_instance<R: Rng>(rng: &mut R) -> (ChannelEstimate, Clustering) {
    let n = if rng.random_bool(0.1) {
        1
    } else {
        rng.random_range(2..=20)
    };
    let rows: Vec<(f64, f64, f64)> = (0..n)
        .map(|_| {
            (
                10f64.powf(rng.random_range(-3.0..0.0)),
                rng.random_range(0.0..5e-6),
                rng.random_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    let estimate = estimate_of(&rows);
    let count = rng.random_range(1..=n.min(4));
    let labels: Vec<usize> = (0..n)
        .map(|i| {
            if i < count {
                i
            } else {
                rng.random_range(0..count)
            }
        })
        .collect();
    let clustering =
        Clustering::from_labels(&estimate, &labels, f64::NAN, &McdConfig::default()).unwrap();
    (estimate, clustering)
}

struct Tally {
    checked: usize,
    failures: Vec<String>,
}

impl Tally {
    fn check(&mut self, what: &str, got: f64, want: f64) {
        self.checked += 1;
        if !rel_close(got, want, REL_TOL) {
            self.failures.push(format!("{what}: {got:e} vs {want:e}"));
        }
    }

    fn check_opt(&mut self, what: &str, got: Option<f64>, want: Option<f64>) {
        match (got, want) {
            (Some(g), Some(w)) => self.check(what, g, w),
            (None, None) => self.checked += 1,
            _ => self.failures.push(format!("{what}: {got:?} vs {want:?}")),
        }
    }
}

fn mean_std(x: &[f64]) -> (Option<f64>, Option<f64>) {
    if x.is_empty() {
        return (None, None);
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let std = if x.len() > 1 {
        (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (Some(mean), Some(std))
}

/// Percentile at positions `(i + 0.5)/n`, clamped to the sample range.
fn direct_percentile(x: &[f64], pct: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = pct / 100.0 * s.len() as f64 - 0.5;
    if pos <= 0.0 {
        return s[0];
    }
    if pos >= (s.len() - 1) as f64 {
        return s[s.len() - 1];
    }
    let i = pos.floor() as usize;
    s[i] + (pos - i as f64) * (s[i + 1] - s[i])
}

/// Per-metric samples gathered from the direct statistics.
fn direct_samples(all: &[Direct], metric: Metric) -> Vec<f64> {
    let logs = |v: Vec<f64>| {
        v.into_iter()
            .filter(|x| *x > 0.0)
            .map(f64::log10)
            .collect::<Vec<_>>()
    };
    let multi = || {
        all.iter()
            .flat_map(|d| d.clusters.iter().filter(|c| c.0 > 1))
    };
    match metric {
        Metric::CompositeDelaySpread => logs(all.iter().map(|d| d.delay_spread_s).collect()),
        Metric::CompositeAzimuthSpread => logs(all.iter().map(|d| d.azimuth_spread_deg).collect()),
        Metric::ClusterNumber => all
            .iter()
            .filter(|d| d.clusters.len() > 1)
            .map(|d| d.clusters.len() as f64)
            .collect(),
        Metric::ClusterK => all.iter().filter_map(|d| d.k_db).collect(),
        Metric::ClusterAzimuthSpread => logs(multi().map(|c| c.3).collect()),
        Metric::ClusterDelaySpread => logs(multi().map(|c| c.2).collect()),
        Metric::ClusterDelayOffset => all
            .iter()
            .flat_map(|d| d.delay_offsets_s.iter().map(|v| v.abs()))
            .collect(),
        Metric::ClusterAzimuthOffset => all
            .iter()
            .flat_map(|d| d.azimuth_offsets_deg.clone())
            .collect(),
        Metric::ClusterPowerOffset => all
            .iter()
            .flat_map(|d| d.power_offsets_db.clone())
            .collect(),
        Metric::R1 | Metric::R2 | Metric::R3 => Vec::new(),
    }
}

fn check_channel(
    t: &mut Tally,
    i: usize,
    got: &ChannelStats,
    composite: (f64, f64),
    want: &Direct,
) {
    t.check(
        &format!("#{i} composite delay spread"),
        composite.0,
        want.delay_spread_s,
    );
    t.check(
        &format!("#{i} composite azimuth spread"),
        composite.1,
        want.azimuth_spread_deg,
    );
    t.check(
        &format!("#{i} stats delay spread"),
        got.composite_delay_spread_s,
        want.delay_spread_s,
    );
    t.check(
        &format!("#{i} stats azimuth spread"),
        got.composite_azimuth_spread_deg,
        want.azimuth_spread_deg,
    );
    t.check_opt(&format!("#{i} K"), got.cluster_k_db, want.k_db);
    if got.clusters.len() != want.clusters.len()
        || got.delay_offsets_s.len() != want.delay_offsets_s.len()
    {
        t.failures.push(format!("#{i}: cluster counts differ"));
        return;
    }
    for (c, (g, w)) in got.clusters.iter().zip(&want.clusters).enumerate() {
        if g.num_paths != w.0 {
            t.failures.push(format!("#{i} cluster {c}: member count"));
        }
        t.check(&format!("#{i} cluster {c} power"), g.power, w.1);
        t.check(
            &format!("#{i} cluster {c} delay spread"),
            g.delay_spread_s,
            w.2,
        );
        t.check(
            &format!("#{i} cluster {c} azimuth spread"),
            g.azimuth_spread_deg,
            w.3,
        );
    }
    for k in 0..want.delay_offsets_s.len() {
        t.check(
            &format!("#{i} delay offset {k}"),
            got.delay_offsets_s[k],
            want.delay_offsets_s[k],
        );
        t.check(
            &format!("#{i} azimuth offset {k}"),
            got.azimuth_offsets_deg[k],
            want.azimuth_offsets_deg[k],
        );
        t.check(
            &format!("#{i} power offset {k}"),
            got.power_offsets_db[k],
            want.power_offsets_db[k],
        );
    }
}

fn check_summary(t: &mut Tally, stats: &[ChannelStats], direct_all: &[Direct]) {
    let row = ensemble_summary(stats, &EnsembleLabel::new("oracle", 0)).unwrap();
    for metric in Metric::SAMPLED {
        let samples = direct_samples(direct_all, metric);
        let got = row.get(metric);
        let (mean, std) = if metric == Metric::ClusterDelayOffset {
            let (m, s) = mean_std(&samples);
            (m.map(f64::log10), s.map(f64::log10))
        } else {
            mean_std(&samples)
        };
        t.check_opt(&format!("summary {} mean", metric.key()), got.mean, mean);
        t.check_opt(&format!("summary {} std", metric.key()), got.std, std);
        let for_box: Vec<f64> = if metric == Metric::ClusterDelayOffset {
            samples
                .iter()
                .filter(|v| **v > 0.0)
                .map(|v| v.log10())
                .collect()
        } else {
            samples
        };
        if let Some(b) = &got.box_stats {
            t.check(
                &format!("summary {} q25", metric.key()),
                b.q25,
                direct_percentile(&for_box, 25.0),
            );
            t.check(
                &format!("summary {} median", metric.key()),
                b.median,
                direct_percentile(&for_box, 50.0),
            );
            t.check(
                &format!("summary {} q75", metric.key()),
                b.q75,
                direct_percentile(&for_box, 75.0),
            );
        }
    }
    let n = direct_all.len() as f64;
    let clusters: usize = direct_all.iter().map(|d| d.clusters.len()).sum();
    let single_path_channels = direct_all
        .iter()
        .filter(|d| d.clusters.iter().map(|c| c.0).sum::<usize>() == 1)
        .count();
    let single_cluster = direct_all.iter().filter(|d| d.clusters.len() == 1).count();
    let single_path_clusters = direct_all
        .iter()
        .flat_map(|d| &d.clusters)
        .filter(|c| c.0 == 1)
        .count();
    t.check("r1", row.r1(), single_path_channels as f64 / n);
    t.check("r2", row.r2(), single_cluster as f64 / n);
    t.check(
        "r3",
        row.r3(),
        single_path_clusters as f64 / clusters as f64,
    );
}

fn analytic() -> Result<String, String> {
    let two_point = delay_spread(&[1.0, 1.0], &[0.0, 100e-9]).unwrap();
    let split = azimuth_spread_deg(&[1.0, 1.0], &[0.0, 120f64.to_radians()]).unwrap();
    let expected_split = (2.0 * std::f64::consts::LN_2).sqrt().to_degrees();
    let composite = composite_spreads(&estimate_of(&[
        (1.0, 0.0, 0.0),
        (1.0, 100e-9, 120f64.to_radians()),
    ]))
    .unwrap();
    let ok = rel_close(two_point, 50e-9, ANALYTIC_TOL)
        && rel_close(split, expected_split, ANALYTIC_TOL)
        && rel_close(composite.0, 50e-9, ANALYTIC_TOL)
        && rel_close(composite.1, expected_split, ANALYTIC_TOL);
    let text = format!(
        "analytic sigma_tau {:.9} ns, sigma_phi {split:.6} deg",
        two_point * 1e9
    );
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

pub fn statistics_oracle() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let mut tally = Tally {
        checked: 0,
        failures: Vec::new(),
    };
    let mut stats = Vec::new();
    let mut direct_all = Vec::new();
    for i in 0..INSTANCES {
        let (estimate, clustering) = random_instance(&mut rng);
        let composite = composite_spreads(&estimate).unwrap();
        let got = cluster_level_stats(&clustering, &estimate).unwrap();
        let want = direct(&estimate, &clustering);
        check_channel(&mut tally, i, &got, composite, &want);
        stats.push(got);
        direct_all.push(want);
    }
    check_summary(&mut tally, &stats, &direct_all);
    let analytic = analytic();
    let passed = tally.failures.is_empty() && analytic.is_ok();
    let analytic_text = analytic.unwrap_or_else(|e| format!("MISMATCH {e}"));
    let failures = if tally.failures.is_empty() {
        String::new()
    } else {
        format!(
            "; first mismatches: {}",
            tally
                .failures
                .iter()
                .take(3)
                .cloned()
                .collect::<Vec<_>>()
                .join("; ")
        )
    };
    Verdict::new(
        passed,
        format!(
            "{} of {} quantities over {INSTANCES} instances within {REL_TOL:e} relative; {analytic_text}{failures}",
            tally.checked - tally.failures.len().min(tally.checked),
            tally.checked
        ),
    )
}
