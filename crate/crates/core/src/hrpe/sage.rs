use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{refine_max, ChannelEstimate, ConvergenceInfo, PathEstimate, SageConfig};
use crate::channel::{wrap_two_pi, ArrayCirSet, CirTiming, ShapeFunction, UcaGeometry};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
/// Delay taps examined by the coarse Doppler search of a new path.
const COARSE_DOPPLER_TAPS: usize = 4;

/// Estimate together with the bookkeeping needed to audit it.
#[derive(Clone, Debug)]
pub struct SageOutput {
    pub estimate: ChannelEstimate,
    /// Input minus the reconstruction of every returned path.
    pub residual: ArrayCirSet,
    /// Residual power of the over-complete pass: after initialization,
    /// then after every sweep.
    pub initial_pass_trace: Vec<f64>,
    /// Residual power of the pass run with the selected model order.
    /// Equal to the last entry of `initial_pass_trace` when no path was
    /// trimmed.
    pub final_pass_trace: Vec<f64>,
}

/// Estimates the multipath parameters of `cirs`. See [`sage_estimate_detailed`].
pub fn sage_estimate(
    cirs: &ArrayCirSet,
    shape: &ShapeFunction,
    cfg: &SageConfig,
) -> Result<ChannelEstimate> {
    sage_estimate_detailed(cirs, shape, cfg).map(|out| out.estimate)
}

/// Runs the estimator:
///
/// 1. successive cancellation of `max_paths` paths, each found by a global
///    Doppler × delay matched-filter search;
/// 2. SAGE sweeps: per path, add its reconstruction back to the residual
///    (E-step), re-estimate delay and Doppler by maximizing the
///    across-antenna incoherent sum `Σ_m |c_m|² / E_τ`, then the per-antenna
///    least-squares amplitudes `α_m = c_m / (N·E_τ)` (M-step). A parameter
///    move is accepted only if it does not lower the objective, so the
///    residual power never grows;
/// 3. model order: keep the paths whose mean per-antenna power clears the
///    residual noise floor by `snr_keep_threshold_db` (and lies within
///    `dynamic_range_db` of the strongest path), then re-run the sweeps
///    with only those paths;
/// 4. per path, `(φ, θ)` maximizing `|α_mᵀ a*(φ, θ)|` and `α = α_mᵀ a* / M`.
pub fn sage_estimate_detailed(
    cirs: &ArrayCirSet,
    shape: &ShapeFunction,
    cfg: &SageConfig,
) -> Result<SageOutput> {
    cfg.validate()?;
    let timing = *cirs.timing();
    let rel = (shape.tap_spacing_s() - timing.tap_spacing_s).abs() / timing.tap_spacing_s;
    if rel > 1e-9 {
        return Err(Error::invalid(format!(
            "shape tap spacing {} s does not match the CIR tap spacing {} s",
            shape.tap_spacing_s(),
            timing.tap_spacing_s
        )));
    }

    let engine = Engine::new(cirs, shape, cfg);
    let mut residual = cirs.data().to_vec();
    let mut paths: Vec<Track> = Vec::with_capacity(cfg.max_paths);
    for _ in 0..cfg.max_paths {
        let track = engine.fit_new_path(&residual);
        engine.subtract(&mut residual, &track);
        paths.push(track);
    }
    let mut initial_pass_trace = vec![power(&residual)];
    let mut iterations = engine.iterate(&mut paths, &mut residual, &mut initial_pass_trace);

    let pass_one_floor = engine.noise_floor(&residual);
    let strongest = paths.iter().map(Track::antenna_power).fold(0.0, f64::max);
    let keep_level = pass_one_floor * 10f64.powf(cfg.snr_keep_threshold_db / 10.0);
    let range_level = strongest * 10f64.powf(-cfg.dynamic_range_db / 10.0);
    let before = paths.len();
    paths.retain(|p| {
        let pw = p.antenna_power();
        pw > keep_level && pw >= range_level && pw > 0.0
    });
    log::debug!(
        "model order {} of {} (noise floor {:.3e}, strongest {:.3e})",
        paths.len(),
        before,
        pass_one_floor,
        strongest
    );

    let mut final_pass_trace = vec![*initial_pass_trace.last().unwrap_or(&0.0)];
    if paths.len() < before {
        residual = engine.residual_of(&paths);
        final_pass_trace = vec![power(&residual)];
        if !paths.is_empty() {
            iterations += engine.iterate(&mut paths, &mut residual, &mut final_pass_trace);
        }
    }

    // Exact bookkeeping for the returned paths.
    residual = engine.residual_of(&paths);
    let noise_floor = engine.noise_floor(&residual);
    let residual_power = power(&residual);
    let angles = AngleSearch::new(cirs.geometry(), cfg);
    let estimates = paths.iter().map(|p| angles.to_estimate(p)).collect();
    let estimate = ChannelEstimate::new(
        estimates,
        noise_floor,
        ConvergenceInfo {
            iterations,
            residual_power,
        },
    );
    let residual = ArrayCirSet::from_data(cirs.geometry().clone(), timing, residual)?;
    Ok(SageOutput {
        estimate,
        residual,
        initial_pass_trace,
        final_pass_trace,
    })
}

/// Noiseless reconstruction `Σ_ℓ α_{m,ℓ}·u(τ_k − τ_ℓ)·e^{j2πν_ℓ t_n}` of the
/// estimated paths from their per-antenna amplitudes. Paths without
/// per-antenna amplitudes use `α·a_m(φ, θ)`.
pub fn reconstruct(
    estimate: &ChannelEstimate,
    geometry: &UcaGeometry,
    timing: &CirTiming,
    shape: &ShapeFunction,
) -> Result<ArrayCirSet> {
    let mut out = ArrayCirSet::zeros(geometry.clone(), *timing)?;
    let (m_count, n_count, t_count) =
        (geometry.num_elements, timing.num_snapshots, timing.num_taps);
    for p in &estimate.paths {
        let alpha = if p.per_antenna_amplitudes.is_empty() {
            let a = geometry.steering_vector(p.azimuth_rad, p.elevation_rad)?;
            a.iter().map(|a| p.amplitude * a).collect()
        } else if p.per_antenna_amplitudes.len() == m_count {
            p.per_antenna_amplitudes.clone()
        } else {
            return Err(Error::invalid(
                "per-antenna amplitudes do not match the array size",
            ));
        };
        let w = shape.sample_on_grid(-p.delay_s, t_count);
        let rot = rotation(p.doppler_hz, timing.snapshot_spacing_s, n_count);
        let data = out.data_mut();
        for (m, a) in alpha.iter().enumerate() {
            for (n, r) in rot.iter().enumerate() {
                let ar = a * r;
                let row = &mut data[(m * n_count + n) * t_count..][..t_count];
                for (h, wk) in row.iter_mut().zip(&w) {
                    *h += ar * wk;
                }
            }
        }
    }
    Ok(out)
}

fn power(x: &[Complex64]) -> f64 {
    x.iter().map(|v| v.norm_sqr()).sum()
}

fn rotation(doppler_hz: f64, spacing_s: f64, count: usize) -> Vec<Complex64> {
    (0..count)
        .map(|n| Complex64::from_polar(1.0, 2.0 * PI * doppler_hz * spacing_s * n as f64))
        .collect()
}

/// One path during the iterations.
#[derive(Clone, Debug)]
struct Track {
    delay_s: f64,
    doppler_hz: f64,
    alpha: Vec<Complex64>,
    waveform: Vec<Complex64>,
    rotation: Vec<Complex64>,
}

impl Track {
    fn antenna_power(&self) -> f64 {
        self.alpha.iter().map(|a| a.norm_sqr()).sum::<f64>() / self.alpha.len() as f64
    }
}

struct Engine<'a> {
    data: &'a [Complex64],
    shape: &'a ShapeFunction,
    cfg: &'a SageConfig,
    m: usize,
    n: usize,
    t: usize,
    tap_spacing_s: f64,
    snapshot_spacing_s: f64,
    /// Zero-padded Doppler FFT length.
    q: usize,
    fft: Arc<dyn Fft<f64>>,
    /// `grid_bases[f][i] = u((i − T)·Δτ − f·Δτ/osf)`; the waveform of grid
    /// delay `(j·osf + f)·Δτ/osf` is `grid_bases[f][T − j .. 2T − j]`.
    grid_bases: Vec<Vec<Complex64>>,
    grid_energy: Vec<f64>,
}

impl<'a> Engine<'a> {
    fn new(cirs: &'a ArrayCirSet, shape: &'a ShapeFunction, cfg: &'a SageConfig) -> Self {
        let timing = cirs.timing();
        let (m, n, t) = (cirs.num_antennas(), cirs.num_snapshots(), cirs.num_taps());
        let osf = cfg.delay_grid_oversampling;
        let ts = timing.tap_spacing_s;
        let grid_bases: Vec<Vec<Complex64>> = (0..osf)
            .map(|f| shape.sample_on_grid(-(t as f64) * ts - f as f64 * ts / osf as f64, 2 * t + 1))
            .collect();
        let num_grid = (t - 1) * osf + 1;
        let mut engine = Self {
            data: cirs.data(),
            shape,
            cfg,
            m,
            n,
            t,
            tap_spacing_s: ts,
            snapshot_spacing_s: timing.snapshot_spacing_s,
            q: n * cfg.doppler_zero_padding,
            fft: FftPlanner::new().plan_fft_forward(n * cfg.doppler_zero_padding),
            grid_bases,
            grid_energy: Vec::new(),
        };
        engine.grid_energy = (0..num_grid)
            .map(|g| power(engine.grid_waveform(g)))
            .collect();
        engine
    }

    fn osf(&self) -> usize {
        self.cfg.delay_grid_oversampling
    }

    fn grid_step_s(&self) -> f64 {
        self.tap_spacing_s / self.osf() as f64
    }

    fn max_delay_s(&self) -> f64 {
        (self.t - 1) as f64 * self.tap_spacing_s
    }

    fn grid_waveform(&self, g: usize) -> &[Complex64] {
        let (j, f) = (g / self.osf(), g % self.osf());
        &self.grid_bases[f][self.t - j..2 * self.t - j]
    }

    fn waveform(&self, delay_s: f64) -> Vec<Complex64> {
        self.shape.sample_on_grid(-delay_s, self.t)
    }

    fn doppler_bin_hz(&self) -> f64 {
        1.0 / (self.q as f64 * self.snapshot_spacing_s)
    }

    fn doppler_of_bin(&self, bin: usize) -> f64 {
        let signed = if bin < self.q.div_ceil(2) {
            bin as f64
        } else {
            bin as f64 - self.q as f64
        };
        signed * self.doppler_bin_hz()
    }

    fn max_doppler_hz(&self) -> f64 {
        0.5 / self.snapshot_spacing_s
    }

    fn rotation(&self, doppler_hz: f64) -> Vec<Complex64> {
        rotation(doppler_hz, self.snapshot_spacing_s, self.n)
    }

    /// `z[m][k] = Σ_n e^{−j2πν t_n}·x(m, n, k)`.
    fn project_doppler(&self, x: &[Complex64], rot: &[Complex64]) -> Vec<Complex64> {
        let (n_count, t) = (self.n, self.t);
        let mut z = vec![ZERO; self.m * t];
        for (m, zm) in z.chunks_exact_mut(t).enumerate() {
            for (n, r) in rot.iter().enumerate() {
                let rc = r.conj();
                let row = &x[(m * n_count + n) * t..][..t];
                for (acc, h) in zm.iter_mut().zip(row) {
                    *acc += rc * h;
                }
            }
        }
        z
    }

    /// `y[m][n] = Σ_k w*_k·x(m, n, k)`.
    fn project_delay(&self, x: &[Complex64], w: &[Complex64]) -> Vec<Complex64> {
        x.chunks_exact(self.t)
            .map(|row| row.iter().zip(w).map(|(h, wk)| wk.conj() * h).sum())
            .collect()
    }

    /// `Σ_m |Σ_k w*_k z_m(k)|² / Σ_k |w_k|²`.
    fn delay_objective(&self, z: &[Complex64], w: &[Complex64], energy: f64) -> f64 {
        if energy <= 0.0 {
            return 0.0;
        }
        z.chunks_exact(self.t)
            .map(|zm| {
                zm.iter()
                    .zip(w)
                    .map(|(v, wk)| wk.conj() * v)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum::<f64>()
            / energy
    }

    fn doppler_objective(&self, y: &[Complex64], rot: &[Complex64], energy: f64) -> f64 {
        if energy <= 0.0 {
            return 0.0;
        }
        y.chunks_exact(self.n)
            .map(|ym| {
                ym.iter()
                    .zip(rot)
                    .map(|(v, r)| r.conj() * v)
                    .sum::<Complex64>()
                    .norm_sqr()
            })
            .sum::<f64>()
            / energy
    }

    /// `Σ_m |FFT_Q(y_m)[q]|²` for every zero-padded Doppler bin.
    fn doppler_spectrum(&self, y: &[Complex64]) -> Vec<f64> {
        let mut spectrum = vec![0.0; self.q];
        let mut buf = vec![ZERO; self.q];
        for ym in y.chunks_exact(self.n) {
            buf[..self.n].copy_from_slice(ym);
            buf[self.n..].fill(ZERO);
            self.fft.process(&mut buf);
            for (s, v) in spectrum.iter_mut().zip(&buf) {
                *s += v.norm_sqr();
            }
        }
        spectrum
    }

    /// Delay maximizing the objective over grid indices `range`, refined
    /// off-grid. Returns `(delay, objective)`.
    fn search_delay(&self, z: &[Complex64], range: std::ops::RangeInclusive<usize>) -> (f64, f64) {
        let (g_best, j_best) = range
            .map(|g| {
                (
                    g,
                    self.delay_objective(z, self.grid_waveform(g), self.grid_energy[g]),
                )
            })
            .fold((0, f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        let mut objective = |tau: f64| {
            let w = self.waveform(tau);
            self.delay_objective(z, &w, power(&w))
        };
        refine_max(
            &mut objective,
            g_best as f64 * self.grid_step_s(),
            j_best,
            self.grid_step_s(),
            self.cfg.refinement_rounds,
            0.0,
            self.max_delay_s(),
        )
    }

    /// Doppler maximizing the objective for the delay-projected `y`.
    fn search_doppler(&self, y: &[Complex64], energy: f64) -> (f64, f64) {
        let spectrum = self.doppler_spectrum(y);
        let (bin, peak) =
            spectrum
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                });
        let mut objective = |nu: f64| self.doppler_objective(y, &self.rotation(nu), energy);
        let start = self.doppler_of_bin(bin);
        let start_value = if energy > 0.0 { peak / energy } else { 0.0 };
        refine_max(
            &mut objective,
            start,
            start_value,
            self.doppler_bin_hz(),
            self.cfg.refinement_rounds,
            -self.max_doppler_hz(),
            self.max_doppler_hz(),
        )
    }

    /// Least-squares per-antenna amplitudes at `(delay, doppler)`.
    fn track(&self, x: &[Complex64], delay_s: f64, doppler_hz: f64) -> Track {
        let waveform = self.waveform(delay_s);
        let y = self.project_delay(x, &waveform);
        self.track_from_projection(&y, waveform, delay_s, doppler_hz)
    }

    /// As [`Engine::track`], with `y = project_delay(x, waveform)` given.
    fn track_from_projection(
        &self,
        y: &[Complex64],
        waveform: Vec<Complex64>,
        delay_s: f64,
        doppler_hz: f64,
    ) -> Track {
        let rotation = self.rotation(doppler_hz);
        let energy = power(&waveform);
        let alpha = y
            .chunks_exact(self.n)
            .map(|ym| {
                if energy <= 0.0 {
                    return ZERO;
                }
                ym.iter()
                    .zip(&rotation)
                    .map(|(v, r)| r.conj() * v)
                    .sum::<Complex64>()
                    / (self.n as f64 * energy)
            })
            .collect();
        Track {
            delay_s,
            doppler_hz,
            alpha,
            waveform,
            rotation,
        }
    }

    /// Global search for the strongest path in `x`.
    fn fit_new_path(&self, x: &[Complex64]) -> Track {
        let num_grid = self.grid_energy.len();
        let mut doppler = 0.0;
        if self.n > 1 {
            // Coarse Doppler: strongest bin of Σ_m |FFT_n x(m, ·, k)|² over
            // the few taps carrying the most residual power.
            let mut tap_power = vec![0.0; self.t];
            for row in x.chunks_exact(self.t) {
                for (p, v) in tap_power.iter_mut().zip(row) {
                    *p += v.norm_sqr();
                }
            }
            let mut taps: Vec<usize> = (0..self.t).collect();
            taps.sort_by(|&a, &b| tap_power[b].total_cmp(&tap_power[a]).then(a.cmp(&b)));
            let mut best = (0, f64::NEG_INFINITY);
            let mut buf = vec![ZERO; self.q];
            for &k in taps.iter().take(COARSE_DOPPLER_TAPS) {
                let mut spectrum = vec![0.0; self.q];
                for m in 0..self.m {
                    buf.fill(ZERO);
                    for (n, b) in buf.iter_mut().take(self.n).enumerate() {
                        *b = x[(m * self.n + n) * self.t + k];
                    }
                    self.fft.process(&mut buf);
                    for (s, v) in spectrum.iter_mut().zip(&buf) {
                        *s += v.norm_sqr();
                    }
                }
                for (bin, &v) in spectrum.iter().enumerate() {
                    if v > best.1 {
                        best = (bin, v);
                    }
                }
            }
            doppler = self.doppler_of_bin(best.0);
        }
        let z = self.project_doppler(x, &self.rotation(doppler));
        let (mut delay, _) = self.search_delay(&z, 0..=num_grid - 1);
        if self.n > 1 {
            let w = self.waveform(delay);
            let energy = power(&w);
            let y = self.project_delay(x, &w);
            doppler = self.search_doppler(&y, energy).0;
            let z = self.project_doppler(x, &self.rotation(doppler));
            delay = self.local_delay(&z, delay).0;
        }
        self.track(x, delay, doppler)
    }

    /// Local delay search around `current`, never returning a point with a
    /// lower objective than `current`.
    fn local_delay(&self, z: &[Complex64], current: f64) -> (f64, f64) {
        let w = self.waveform(current);
        let j_current = self.delay_objective(z, &w, power(&w));
        let span = 2 * self.osf();
        let g_current = (current / self.grid_step_s()).round() as usize;
        let lo = g_current.saturating_sub(span);
        let hi = (g_current + span).min(self.grid_energy.len() - 1);
        let (delay, value) = self.search_delay(z, lo..=hi);
        if value > j_current {
            (delay, value)
        } else {
            (current, j_current)
        }
    }

    /// One SAGE update of `track` given the residual without it.
    fn update(&self, x: &[Complex64], track: &Track) -> Track {
        let z = self.project_doppler(x, &track.rotation);
        let (delay, _) = self.local_delay(&z, track.delay_s);
        let w = self.waveform(delay);
        let y = self.project_delay(x, &w);
        let mut doppler = track.doppler_hz;
        if self.n > 1 {
            let energy = power(&w);
            let j_current = self.doppler_objective(&y, &track.rotation, energy);
            let (candidate, value) = self.search_doppler(&y, energy);
            if value > j_current {
                doppler = candidate;
            }
        }
        self.track_from_projection(&y, w, delay, doppler)
    }

    fn subtract(&self, residual: &mut [Complex64], track: &Track) {
        self.accumulate(residual, track, -1.0);
    }

    fn accumulate(&self, x: &mut [Complex64], track: &Track, sign: f64) {
        for (m, a) in track.alpha.iter().enumerate() {
            for (n, r) in track.rotation.iter().enumerate() {
                let ar = a * r * sign;
                let row = &mut x[(m * self.n + n) * self.t..][..self.t];
                for (h, w) in row.iter_mut().zip(&track.waveform) {
                    *h += ar * w;
                }
            }
        }
    }

    /// `out = x + sign·reconstruction(track)`.
    fn combine_into(&self, out: &mut [Complex64], x: &[Complex64], track: &Track, sign: f64) {
        for (m, a) in track.alpha.iter().enumerate() {
            for (n, r) in track.rotation.iter().enumerate() {
                let ar = a * r * sign;
                let start = (m * self.n + n) * self.t;
                let dst = &mut out[start..start + self.t];
                let src = &x[start..start + self.t];
                for ((o, h), w) in dst.iter_mut().zip(src).zip(&track.waveform) {
                    *o = h + ar * w;
                }
            }
        }
    }

    fn residual_of(&self, tracks: &[Track]) -> Vec<Complex64> {
        let mut residual = self.data.to_vec();
        for t in tracks {
            self.subtract(&mut residual, t);
        }
        residual
    }

    fn reconstructed_power(&self, tracks: &[Track]) -> f64 {
        tracks
            .iter()
            .map(|t| {
                let alpha: f64 = t.alpha.iter().map(|a| a.norm_sqr()).sum();
                alpha * power(&t.waveform) * self.n as f64
            })
            .sum()
    }

    /// SAGE sweeps until the reconstructed power settles. Pushes the
    /// residual power after each sweep onto `trace`; returns the number of
    /// sweeps.
    fn iterate(
        &self,
        tracks: &mut [Track],
        residual: &mut [Complex64],
        trace: &mut Vec<f64>,
    ) -> usize {
        let mut previous = self.reconstructed_power(tracks);
        let mut x = vec![ZERO; residual.len()];
        for sweep in 1..=self.cfg.max_iterations {
            for track in tracks.iter_mut() {
                self.combine_into(&mut x, residual, track, 1.0);
                *track = self.update(&x, track);
                self.combine_into(residual, &x, track, -1.0);
            }
            trace.push(power(residual));
            let current = self.reconstructed_power(tracks);
            let change = if previous > 0.0 {
                (current - previous).abs() / previous
            } else {
                0.0
            };
            previous = current;
            if change < self.cfg.convergence_tol {
                return sweep;
            }
        }
        self.cfg.max_iterations
    }

    /// Median residual power over the quietest quarter of the delay taps,
    /// divided by `ln 2` (the median of an exponential variable).
    fn noise_floor(&self, residual: &[Complex64]) -> f64 {
        let mut tap_power = vec![0.0; self.t];
        for row in residual.chunks_exact(self.t) {
            for (p, v) in tap_power.iter_mut().zip(row) {
                *p += v.norm_sqr();
            }
        }
        let mut order: Vec<usize> = (0..self.t).collect();
        order.sort_by(|&a, &b| tap_power[a].total_cmp(&tap_power[b]).then(a.cmp(&b)));
        let quiet = &order[..(self.t / 4).max(1)];
        let mut samples: Vec<f64> = residual
            .chunks_exact(self.t)
            .flat_map(|row| quiet.iter().map(move |&k| row[k].norm_sqr()))
            .collect();
        samples.sort_by(f64::total_cmp);
        let len = samples.len();
        let median = if len % 2 == 1 {
            samples[len / 2]
        } else {
            0.5 * (samples[len / 2 - 1] + samples[len / 2])
        };
        median / std::f64::consts::LN_2
    }
}

/// Angle fit of per-antenna amplitudes against the array manifold.
struct AngleSearch<'a> {
    geometry: &'a UcaGeometry,
    cfg: &'a SageConfig,
    azimuths: Vec<f64>,
    elevations: Vec<f64>,
    /// Conjugated steering vectors, elevation-major.
    manifold: Vec<Vec<Complex64>>,
}

impl<'a> AngleSearch<'a> {
    fn new(geometry: &'a UcaGeometry, cfg: &'a SageConfig) -> Self {
        let az_count = ((360.0 / cfg.azimuth_grid_deg).round() as usize).max(1);
        let azimuths: Vec<f64> = (0..az_count)
            .map(|i| (i as f64 * cfg.azimuth_grid_deg).to_radians())
            .collect();
        let el_count = (cfg.elevation_max_deg / cfg.elevation_grid_deg + 1e-9).floor() as usize + 1;
        let elevations: Vec<f64> = (0..el_count)
            .map(|i| (i as f64 * cfg.elevation_grid_deg).to_radians())
            .collect();
        let manifold = elevations
            .iter()
            .flat_map(|&el| {
                azimuths.iter().map(move |&az| {
                    geometry
                        .steering_unchecked(az, el)
                        .iter()
                        .map(|a| a.conj())
                        .collect()
                })
            })
            .collect();
        Self {
            geometry,
            cfg,
            azimuths,
            elevations,
            manifold,
        }
    }

    fn to_estimate(&self, track: &Track) -> PathEstimate {
        let alpha = &track.alpha;
        let correlate = |conj_a: &[Complex64]| {
            alpha
                .iter()
                .zip(conj_a)
                .map(|(x, a)| x * a)
                .sum::<Complex64>()
        };
        let (best, best_value) = self
            .manifold
            .iter()
            .enumerate()
            .map(|(i, a)| (i, correlate(a).norm()))
            .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
        let elevation = self.elevations[best / self.azimuths.len()];
        let start = self.azimuths[best % self.azimuths.len()];
        let mut objective = |az: f64| {
            let a = self.geometry.steering_unchecked(az, elevation);
            alpha
                .iter()
                .zip(&a)
                .map(|(x, a)| x * a.conj())
                .sum::<Complex64>()
                .norm()
        };
        let step = self.cfg.azimuth_grid_deg.to_radians();
        let (azimuth, _) = refine_max(
            &mut objective,
            start,
            best_value,
            step,
            self.cfg.refinement_rounds,
            f64::NEG_INFINITY,
            f64::INFINITY,
        );
        let azimuth = wrap_two_pi(azimuth);
        let a = self.geometry.steering_unchecked(azimuth, elevation);
        let amplitude = alpha
            .iter()
            .zip(&a)
            .map(|(x, a)| x * a.conj())
            .sum::<Complex64>()
            / alpha.len() as f64;
        PathEstimate {
            amplitude,
            per_antenna_amplitudes: alpha.clone(),
            delay_s: track.delay_s,
            doppler_hz: track.doppler_hz,
            azimuth_rad: azimuth,
            elevation_rad: elevation,
            power: amplitude.norm_sqr(),
        }
    }
}
