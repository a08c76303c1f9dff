//! Spectra from dipole traces, peak picking, Rabi splittings, beat
//! envelopes and the orientation-dependent effective coupling.
//!
//! Intensities are one-sided power: `|FFT|^2 / N_pad` with interior bins
//! doubled, so summing a [`Spectrum`] returns the energy of the windowed,
//! mean-subtracted signal exactly (Parseval).

use std::f64::consts::PI;
use std::fmt;

use polaritonmd_core::units::HARTREE_TO_CM1;
use polaritonmd_core::{Trajectory, Vec3};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

/// Fewest samples accepted for a spectrum.
pub const MIN_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("trace has {0} samples, need at least {MIN_SAMPLES}")]
    TooShort(usize),
    #[error("sampling is not uniform (sample {index} deviates by {deviation:.3e} a.u.)")]
    NonUniform { index: usize, deviation: f64 },
    #[error("pad factor must be at least 1")]
    BadPadFactor,
    #[error("no splitting resolved: {0}")]
    NoSplitting(String),
    #[error("trace is not oscillatory: {0}")]
    NonOscillatory(String),
    #[error("mode index {index} out of range for {count} modes")]
    NoSuchMode { index: usize, count: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hann,
    None,
}

impl WindowKind {
    fn weights(self, n: usize) -> Vec<f64> {
        match self {
            WindowKind::None => vec![1.0; n],
            WindowKind::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n - 1) as f64).cos())
                .collect(),
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowKind::Hann => "hann",
            WindowKind::None => "none",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["x", "y", "z"][self.index()])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// cm^-1, uniform and increasing from 0
    pub wavenumbers: Vec<f64>,
    /// one-sided power, summed over the requested components
    pub intensity: Vec<f64>,
    pub window: WindowKind,
    pub pad_factor: usize,
    /// length of the underlying trace
    pub n_samples: usize,
    /// sample spacing, atomic time units
    pub sample_interval: f64,
}

impl Spectrum {
    /// Native resolution `1 / (N dt)` of the unpadded trace, in cm^-1.
    pub fn resolution(&self) -> f64 {
        2.0 * PI / (self.n_samples as f64 * self.sample_interval) * HARTREE_TO_CM1
    }

    /// Spacing of the padded grid.
    pub fn bin_width(&self) -> f64 {
        2.0 * PI / ((self.n_samples * self.pad_factor) as f64 * self.sample_interval) * HARTREE_TO_CM1
    }

    pub fn total_power(&self) -> f64 {
        self.intensity.iter().sum()
    }

    /// Sub-spectrum over `[lo, hi]` cm^-1. Peak thresholds on the result are
    /// relative to the strongest line inside the band.
    pub fn band(&self, lo: f64, hi: f64) -> Spectrum {
        let keep: Vec<usize> = (0..self.wavenumbers.len())
            .filter(|&i| self.wavenumbers[i] >= lo && self.wavenumbers[i] <= hi)
            .collect();
        Spectrum {
            wavenumbers: keep.iter().map(|&i| self.wavenumbers[i]).collect(),
            intensity: keep.iter().map(|&i| self.intensity[i]).collect(),
            ..self.clone()
        }
    }

    /// Intensities scaled to a maximum of one (all zeros stay zero).
    pub fn normalized(&self) -> Vec<f64> {
        let max = self.intensity.iter().cloned().fold(0.0, f64::max);
        if max > 0.0 {
            self.intensity.iter().map(|x| x / max).collect()
        } else {
            self.intensity.clone()
        }
    }
}

fn check_uniform(times: &[f64]) -> Result<f64, AnalysisError> {
    if times.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooShort(times.len()));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    let tol = 1e-6 * dt.abs();
    for (i, t) in times.iter().enumerate() {
        let deviation = t - (times[0] + i as f64 * dt);
        if !(deviation.abs() <= tol) || !(dt > 0.0) {
            return Err(AnalysisError::NonUniform { index: i, deviation });
        }
    }
    Ok(dt)
}

/// Power spectrum of the summed channels. Each channel is mean-subtracted,
/// windowed and zero-padded to `pad_factor` times its length.
pub fn power_spectrum(
    times: &[f64],
    channels: &[Vec<f64>],
    window: WindowKind,
    pad_factor: usize,
) -> Result<Spectrum, AnalysisError> {
    if pad_factor == 0 {
        return Err(AnalysisError::BadPadFactor);
    }
    let dt = check_uniform(times)?;
    let n = times.len();
    let n_pad = n * pad_factor;
    let n_half = n_pad / 2;
    let w = window.weights(n);
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n_pad);
    let mut intensity = vec![0.0; n_half + 1];
    for ch in channels {
        assert_eq!(ch.len(), n, "channel length must match the time axis");
        let mean = ch.iter().sum::<f64>() / n as f64;
        let mut buf = vec![Complex::new(0.0, 0.0); n_pad];
        for (i, (x, wi)) in ch.iter().zip(&w).enumerate() {
            buf[i].re = (x - mean) * wi;
        }
        fft.process(&mut buf);
        for (k, slot) in intensity.iter_mut().enumerate() {
            let mirrored = k != 0 && 2 * k != n_pad;
            let scale = if mirrored { 2.0 } else { 1.0 };
            *slot += scale * buf[k].norm_sqr() / n_pad as f64;
        }
    }
    let dk = 2.0 * PI / (n_pad as f64 * dt) * HARTREE_TO_CM1;
    Ok(Spectrum {
        wavenumbers: (0..=n_half).map(|k| k as f64 * dk).collect(),
        intensity,
        window,
        pad_factor,
        n_samples: n,
        sample_interval: dt,
    })
}

/// Infrared spectrum from the dipole components of a trajectory.
pub fn ir_spectrum(
    traj: &Trajectory,
    components: &[Axis],
    window: WindowKind,
    pad_factor: usize,
) -> Result<Spectrum, AnalysisError> {
    let dipoles = traj.dipoles();
    ir_spectrum_from_dipoles(&traj.times(), &dipoles, components, window, pad_factor)
}

pub fn ir_spectrum_from_dipoles(
    times: &[f64],
    dipoles: &[Vec3],
    components: &[Axis],
    window: WindowKind,
    pad_factor: usize,
) -> Result<Spectrum, AnalysisError> {
    let channels: Vec<Vec<f64>> = components
        .iter()
        .map(|c| dipoles.iter().map(|mu| mu[c.index()]).collect())
        .collect();
    power_spectrum(times, &channels, window, pad_factor)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    /// refined position, cm^-1
    pub wavenumber: f64,
    /// refined height on the normalized scale
    pub height: f64,
    pub prominence: f64,
}

/// Local maxima of the normalized spectrum whose prominence reaches
/// `min_prominence`, sorted by wavenumber.
///
/// Prominence is the height above the higher of the two minima reached by
/// walking outwards until a taller sample or the edge. Positions are refined
/// with a three-point parabola.
pub fn find_peaks(s: &Spectrum, min_prominence: f64) -> Vec<Peak> {
    let y = s.normalized();
    let n = y.len();
    let dk = s.bin_width();
    let mut peaks = Vec::new();
    for i in 1..n.saturating_sub(1) {
        if !(y[i] > y[i - 1] && y[i] >= y[i + 1]) {
            continue;
        }
        let mut left_min = y[i];
        for j in (0..i).rev() {
            if y[j] > y[i] {
                break;
            }
            left_min = left_min.min(y[j]);
        }
        let mut right_min = y[i];
        for &yj in &y[i + 1..] {
            if yj > y[i] {
                break;
            }
            right_min = right_min.min(yj);
        }
        let prominence = y[i] - left_min.max(right_min);
        if prominence < min_prominence || prominence <= 0.0 {
            continue;
        }
        let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
        let denom = a - 2.0 * b + c;
        let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
        peaks.push(Peak {
            wavenumber: s.wavenumbers[i] + delta * dk,
            height: b - 0.25 * (a - c) * delta,
            prominence,
        });
    }
    peaks
}

/// Peaks inside `[lo, hi]` cm^-1.
pub fn peaks_in(peaks: &[Peak], lo: f64, hi: f64) -> Vec<Peak> {
    peaks
        .iter()
        .copied()
        .filter(|p| p.wavenumber >= lo && p.wavenumber <= hi)
        .collect()
}

/// Distance between the most prominent peak below `center` and the most
/// prominent peak above it, both within `half_window` of `center`.
pub fn rabi_splitting(s: &Spectrum, center: f64, half_window: f64, min_prominence: f64) -> Result<f64, AnalysisError> {
    let peaks = peaks_in(
        &find_peaks(s, min_prominence),
        center - half_window,
        center + half_window,
    );
    let best = |below: bool| {
        peaks
            .iter()
            .filter(|p| (p.wavenumber < center) == below)
            .max_by(|a, b| a.prominence.total_cmp(&b.prominence))
            .copied()
    };
    match (best(true), best(false)) {
        (Some(lo), Some(hi)) => Ok(hi.wavenumber - lo.wavenumber),
        _ => Err(AnalysisError::NoSplitting(format!(
            "{} peak(s) within {half_window} cm^-1 of {center} cm^-1, need one on each side",
            peaks.len()
        ))),
    }
}

/// Magnitude of the analytic signal of a real trace (FFT Hilbert transform).
pub fn analytic_envelope(trace: &[f64]) -> Vec<f64> {
    let n = trace.len();
    let mean = trace.iter().sum::<f64>() / n as f64;
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex<f64>> = trace.iter().map(|x| Complex::new(x - mean, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, z) in buf.iter_mut().enumerate() {
        let factor = if k == 0 || 2 * k == n {
            1.0
        } else if 2 * k < n {
            2.0
        } else {
            0.0
        };
        *z *= factor / n as f64;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|z| z.norm()).collect()
}

/// Fraction of the trace discarded at each end before analysing the
/// envelope; the FFT Hilbert transform rings near the edges.
pub const ENVELOPE_EDGE_TRIM: f64 = 0.1;
/// Smallest `(max - min) / mean` of the envelope that counts as a beat.
pub const MIN_MODULATION_DEPTH: f64 = 0.05;

/// Dominant frequency of the amplitude envelope of an oscillatory trace, in
/// cm^-1. For `cos(w1 t) + cos(w2 t)` this is `|w2 - w1|`.
pub fn beat_envelope(trace: &[f64], sample_interval: f64) -> Result<f64, AnalysisError> {
    if trace.len() < MIN_SAMPLES {
        return Err(AnalysisError::TooShort(trace.len()));
    }
    let env = analytic_envelope(trace);
    let trim = (ENVELOPE_EDGE_TRIM * env.len() as f64) as usize;
    let core = &env[trim..env.len() - trim];
    let mean = core.iter().sum::<f64>() / core.len() as f64;
    let (lo, hi) = core
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    if !(mean > 0.0) {
        return Err(AnalysisError::NonOscillatory("trace is constant".into()));
    }
    let depth = (hi - lo) / mean;
    if depth < MIN_MODULATION_DEPTH {
        return Err(AnalysisError::NonOscillatory(format!(
            "envelope modulation depth {depth:.2e} below {MIN_MODULATION_DEPTH}"
        )));
    }
    let times: Vec<f64> = (0..core.len()).map(|i| i as f64 * sample_interval).collect();
    let env_spectrum = power_spectrum(&times, &[core.to_vec()], WindowKind::Hann, 8)?;
    // Skip the two native bins nearest DC, where the window leaks the mean.
    let skip = 2 * env_spectrum.pad_factor;
    let (k, _) = env_spectrum.intensity[..env_spectrum.intensity.len() - 1]
        .iter()
        .enumerate()
        .skip(skip)
        .max_by(|a, b| a.1.total_cmp(b.1))
        .ok_or_else(|| AnalysisError::NonOscillatory("no envelope spectrum".into()))?;
    let (a, b, c) = (
        env_spectrum.intensity[k - 1],
        env_spectrum.intensity[k],
        env_spectrum.intensity[k + 1],
    );
    let denom = a - 2.0 * b + c;
    let delta = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
    Ok(env_spectrum.wavenumbers[k] + delta * env_spectrum.bin_width())
}

/// Orientation-dependent coupling of a linear molecule to one cavity mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveCoupling {
    /// atomic time units
    pub times: Vec<f64>,
    /// `e . mu(t)`, e*bohr
    pub projection: Vec<f64>,
    /// `|lambda| |cos theta(t)|` with theta between molecular axis and
    /// polarization; `None` when the molecule is not linear.
    pub orientation: Option<Vec<f64>>,
    pub notice: Option<String>,
}

/// Largest distance of any atom from the terminal-atom line below which a
/// molecule counts as linear, bohr.
pub const LINEARITY_TOLERANCE: f64 = 0.2;

/// Terminal pair (the two atoms farthest apart) if every atom lies within
/// [`LINEARITY_TOLERANCE`] of the line through it.
pub fn linear_axis_atoms(positions: &[Vec3]) -> Option<(usize, usize)> {
    let n = positions.len();
    if n < 2 {
        return None;
    }
    let mut best = (0, 1, -1.0);
    for i in 0..n {
        for j in i + 1..n {
            let d = (positions[j] - positions[i]).norm();
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    let (i, j, d) = best;
    if d <= 0.0 {
        return None;
    }
    let axis = (positions[j] - positions[i]) / d;
    let linear = positions.iter().all(|r| {
        let v = r - positions[i];
        (v - axis * v.dot(&axis)).norm() < LINEARITY_TOLERANCE
    });
    linear.then_some((i, j))
}

pub fn effective_coupling_trace(traj: &Trajectory, mode: usize) -> Result<EffectiveCoupling, AnalysisError> {
    let modes = traj.initial_modes();
    let md = modes.get(mode).ok_or(AnalysisError::NoSuchMode {
        index: mode,
        count: modes.len(),
    })?;
    let lambda = md.lambda();
    let e = md.polarization().unwrap_or_else(Vec3::zeros);
    let frames = traj.frames();
    let projection = frames.iter().map(|f| e.dot(&f.dipole)).collect();
    let (orientation, notice) = match linear_axis_atoms(&frames[0].positions) {
        Some((i, j)) => {
            let values = frames
                .iter()
                .map(|f| {
                    let axis = (f.positions[j] - f.positions[i]).normalize();
                    lambda.dot(&axis).abs()
                })
                .collect();
            (Some(values), None)
        }
        None => (
            None,
            Some("molecule is not linear; orientation factor omitted".to_string()),
        ),
    };
    Ok(EffectiveCoupling {
        times: traj.times(),
        projection,
        orientation,
        notice,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use polaritonmd_core::units::{cm1_to_hartree, fs_to_au};

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|i| i as f64 * dt).collect()
    }

    fn tone(t: &[f64], cm1: f64) -> Vec<f64> {
        let w = cm1_to_hartree(cm1);
        t.iter().map(|t| (w * t).cos()).collect()
    }

    #[test]
    fn single_tone_is_recovered() {
        let t = grid(5000, fs_to_au(1.0));
        let s = power_spectrum(&t, &[tone(&t, 1000.0)], WindowKind::Hann, 4).unwrap();
        assert!((s.resolution() - 6.67).abs() < 0.01, "{}", s.resolution());
        let p = find_peaks(&s, 0.05);
        assert_eq!(p.len(), 1, "{p:?}");
        assert!((p[0].wavenumber - 1000.0).abs() < 0.25 * s.resolution());
    }

    #[test]
    fn off_grid_tones_within_quarter_bin() {
        let t = grid(3000, fs_to_au(1.0));
        for nu in [523.3, 1111.1, 2430.0, 3001.7] {
            let s = power_spectrum(&t, &[tone(&t, nu)], WindowKind::Hann, 4).unwrap();
            let p = find_peaks(&s, 0.05);
            assert_eq!(p.len(), 1);
            assert!((p[0].wavenumber - nu).abs() < 0.25 * s.resolution(), "{nu}: {p:?}");
        }
    }

    #[test]
    fn parseval_holds() {
        let t = grid(1000, 2.0);
        let x: Vec<f64> = t
            .iter()
            .map(|t| (0.01 * t).sin() + 0.3 * (0.07 * t + 1.0).cos() + 1e-3 * t)
            .collect();
        for (win, pad) in [(WindowKind::Hann, 1), (WindowKind::Hann, 4), (WindowKind::None, 3)] {
            let s = power_spectrum(&t, std::slice::from_ref(&x), win, pad).unwrap();
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            let w = win.weights(x.len());
            let energy: f64 = x.iter().zip(&w).map(|(v, wi)| ((v - mean) * wi).powi(2)).sum();
            assert!((s.total_power() - energy).abs() / energy < 1e-10);
        }
    }

    #[test]
    fn rejects_short_and_irregular_traces() {
        let t = grid(100, 1.0);
        assert_eq!(
            power_spectrum(&t, &[vec![0.0; 100]], WindowKind::Hann, 1),
            Err(AnalysisError::TooShort(100))
        );
        let mut t = grid(300, 1.0);
        t[150] += 0.3;
        assert!(matches!(
            power_spectrum(&t, &[vec![0.0; 300]], WindowKind::Hann, 1),
            Err(AnalysisError::NonUniform { .. })
        ));
        let t = grid(300, 1.0);
        assert_eq!(
            power_spectrum(&t, &[vec![0.0; 300]], WindowKind::Hann, 0),
            Err(AnalysisError::BadPadFactor)
        );
    }

    #[test]
    fn band_view_renormalizes() {
        let t = grid(5000, fs_to_au(1.0));
        let x: Vec<f64> = tone(&t, 650.0)
            .iter()
            .zip(tone(&t, 2430.0))
            .map(|(a, b)| a + 0.01 * b)
            .collect();
        let s = power_spectrum(&t, &[x], WindowKind::Hann, 4).unwrap();
        assert_eq!(find_peaks(&s, 0.05).len(), 1);
        let b = s.band(2300.0, 2700.0);
        assert!((b.bin_width() - s.bin_width()).abs() < 1e-12);
        let p = find_peaks(&b, 0.05);
        assert_eq!(p.len(), 1);
        assert!((p[0].wavenumber - 2430.0).abs() < 0.25 * s.resolution());
        assert!((p[0].height - 1.0).abs() < 0.01);
    }

    #[test]
    fn flat_spectrum_has_no_peaks() {
        let t = grid(512, 1.0);
        let s = power_spectrum(&t, &[vec![2.5; 512]], WindowKind::Hann, 2).unwrap();
        assert!(find_peaks(&s, 0.0).is_empty());
    }

    #[test]
    fn splitting_of_a_synthetic_doublet() {
        let t = grid(5000, fs_to_au(1.0));
        let a = tone(&t, 2395.0);
        let b = tone(&t, 2465.0);
        let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
        let s = power_spectrum(&t, &[x], WindowKind::Hann, 4).unwrap();
        let gap = rabi_splitting(&s, 2430.0, 300.0, 0.05).unwrap();
        assert!((gap - 70.0).abs() < s.resolution(), "{gap}");

        let s = power_spectrum(&t, &[tone(&t, 2431.0)], WindowKind::Hann, 4).unwrap();
        assert!(matches!(
            rabi_splitting(&s, 2430.0, 300.0, 0.05),
            Err(AnalysisError::NoSplitting(_))
        ));
    }

    #[test]
    fn two_tone_envelope() {
        let dt = fs_to_au(1.0);
        let t = grid(5000, dt);
        let a = tone(&t, 2405.0);
        let b = tone(&t, 2455.0);
        let x: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + 0.7 * q).collect();
        let f = beat_envelope(&x, dt).unwrap();
        assert!((f - 50.0).abs() < 6.67, "{f}");
    }

    #[test]
    fn single_tone_has_no_envelope() {
        let dt = fs_to_au(1.0);
        let t = grid(5000, dt);
        assert!(matches!(
            beat_envelope(&tone(&t, 2430.0), dt),
            Err(AnalysisError::NonOscillatory(_))
        ));
        assert!(matches!(
            beat_envelope(&vec![0.0; 5000], dt),
            Err(AnalysisError::NonOscillatory(_))
        ));
    }

    fn resting_co2(polarization: Vec3) -> Trajectory {
        use polaritonmd_core::{build_co2_preset, run_trajectory, IntegrationPlan, PhotonMode, SimulationState};
        let (m, ff) = build_co2_preset();
        let mode = PhotonMode::from_cm1(2430.0, 0.05, polarization).unwrap();
        let plan = IntegrationPlan::from_fs(0.1, 5.0, 10).unwrap();
        run_trajectory(&SimulationState::new(m, vec![mode]), &ff, &plan).unwrap()
    }

    #[test]
    fn orientation_factor_limits() {
        let aligned = effective_coupling_trace(&resting_co2(Vec3::x()), 0).unwrap();
        assert!(aligned.orientation.unwrap().iter().all(|o| (o - 0.05).abs() < 1e-12));
        assert!(aligned.notice.is_none());
        let perpendicular = effective_coupling_trace(&resting_co2(Vec3::y()), 0).unwrap();
        assert!(perpendicular.orientation.unwrap().iter().all(|o| o.abs() < 1e-12));
        assert!(perpendicular.projection.iter().all(|p| p.abs() < 1e-12));
        assert!(matches!(
            effective_coupling_trace(&resting_co2(Vec3::x()), 1),
            Err(AnalysisError::NoSuchMode { index: 1, count: 1 })
        ));
    }

    #[test]
    fn linear_axis_detection() {
        let lin = [Vec3::zeros(), Vec3::new(-2.0, 0.05, 0.0), Vec3::new(2.0, 0.0, 0.0)];
        let (i, j) = linear_axis_atoms(&lin).unwrap();
        assert_eq!((i.min(j), i.max(j)), (1, 2));
        let bent = [Vec3::zeros(), Vec3::new(-2.0, 1.0, 0.0), Vec3::new(2.0, 1.0, 0.0)];
        assert_eq!(linear_axis_atoms(&bent), None);
    }
}
