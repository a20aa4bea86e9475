//! Spectral peak picking used to check rendered clips.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::AudioClip;
use crate::error::{Error, Result};

/// Analysis frame length in samples.
pub const FFT_SIZE: usize = 4096;

/// Peaks with a corrected amplitude below this are ignored.
pub const NOISE_FLOOR: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Peak {
    /// Centre frequency of the peak's bin.
    pub frequency_hz: f64,
    /// Estimated sinusoid amplitude.
    pub magnitude: f64,
}

/// Amplitude response of a Hann window at fractional bin offset `delta`,
/// relative to the on-bin response.
fn hann_response(delta: f64) -> f64 {
    if delta.abs() < 1e-9 {
        return 1.0;
    }
    let x = PI * delta;
    x.sin() / (x * (1.0 - delta * delta))
}

/// The `n_peaks` strongest local maxima of the Hann-windowed spectrum of the
/// clip's first [`FFT_SIZE`] samples, strongest first.
///
/// Magnitudes are scaled so a full-scale sinusoid reads about 1. The
/// window's scalloping loss is undone using the ratio of the peak bin to its
/// larger neighbour, so a tone's reading does not depend on where it falls
/// between bins.
pub fn spectral_peaks(clip: &AudioClip, n_peaks: usize) -> Result<Vec<Peak>> {
    if clip.len() < FFT_SIZE {
        return Err(Error::InvalidParameter(format!(
            "spectral analysis needs {FFT_SIZE} samples, clip has {}",
            clip.len()
        )));
    }
    let window: Vec<f64> = (0..FFT_SIZE)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / FFT_SIZE as f64).cos())
        .collect();
    let window_sum: f64 = window.iter().sum();
    let mut buf: Vec<Complex<f64>> = clip.samples()[..FFT_SIZE]
        .iter()
        .zip(&window)
        .map(|(&s, &w)| Complex::new(s * w, 0.0))
        .collect();
    FftPlanner::new().plan_fft_forward(FFT_SIZE).process(&mut buf);
    let mag: Vec<f64> = buf[..=FFT_SIZE / 2].iter().map(|c| c.norm() * 2.0 / window_sum).collect();

    let bin_hz = f64::from(clip.sample_rate_hz()) / FFT_SIZE as f64;
    let mut peaks: Vec<Peak> = (1..FFT_SIZE / 2)
        .filter(|&k| mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])
        .filter_map(|k| {
            let r = mag[k - 1].max(mag[k + 1]) / mag[k];
            let delta = ((2.0 * r - 1.0) / (1.0 + r)).clamp(0.0, 0.5);
            let amplitude = mag[k] / hann_response(delta);
            (amplitude > NOISE_FLOOR).then_some(Peak { frequency_hz: k as f64 * bin_hz, magnitude: amplitude })
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.magnitude.total_cmp(&a.magnitude).then(a.frequency_hz.total_cmp(&b.frequency_hz))
    });
    peaks.truncate(n_peaks);
    Ok(peaks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tone(f: f64, amp: f64) -> AudioClip {
        let s = (0..44_100).map(|i| amp * (2.0 * PI * f * i as f64 / 44_100.0).sin()).collect();
        AudioClip::new(44_100, s).unwrap()
    }

    #[test]
    fn pure_tone_peak_is_within_a_bin() {
        let p = spectral_peaks(&tone(1000.0, 1.0), 1).unwrap();
        assert_eq!(p.len(), 1);
        assert!((p[0].frequency_hz - 1000.0).abs() <= 44_100.0 / 4096.0);
        assert!((p[0].magnitude - 1.0).abs() < 0.02, "{}", p[0].magnitude);
    }

    #[test]
    fn off_bin_amplitude_is_corrected() {
        // 1000.0 Hz is 92.88 bins; 1005.4 Hz sits about half a bin away.
        for f in [1000.0, 1005.4, 2222.2, 7750.0] {
            let p = spectral_peaks(&tone(f, 0.5), 1).unwrap();
            assert!((p[0].magnitude - 0.5).abs() < 0.01, "{f}: {}", p[0].magnitude);
        }
    }

    #[test]
    fn silence_has_no_peaks() {
        let clip = AudioClip::new(44_100, vec![0.0; 44_100]).unwrap();
        assert!(spectral_peaks(&clip, 5).unwrap().is_empty());
    }

    #[test]
    fn short_clip_errors() {
        let clip = AudioClip::new(44_100, vec![0.0; 100]).unwrap();
        assert!(spectral_peaks(&clip, 1).is_err());
    }

    #[test]
    fn two_tones_ranked_by_amplitude() {
        let s = (0..8192)
            .map(|i| {
                let t = i as f64 / 44_100.0;
                0.3 * (2.0 * PI * 500.0 * t).sin() + 0.6 * (2.0 * PI * 3000.0 * t).sin()
            })
            .collect();
        let p = spectral_peaks(&AudioClip::new(44_100, s).unwrap(), 2).unwrap();
        assert!((p[0].frequency_hz - 3000.0).abs() < 11.0);
        assert!((p[1].frequency_hz - 500.0).abs() < 11.0);
    }
}
