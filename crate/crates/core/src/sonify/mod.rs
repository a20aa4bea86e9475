//! Image sonification.
//!
//! The histogram synthesiser has one sine voice per luminance level 1..=255
//! at linearly spaced frequencies; a level's share of the image's pixels is
//! that voice's amplitude. Level 0 is unvoiced. Because the shares sum to at
//! most 1 the mix never leaves [-1, 1], so no limiter is needed.
//!
//! The pixel mode instead gives each pixel of a 16x16 image its own voice,
//! pitched by position and scaled by brightness.
//!
//! Oscillators use `libm` so rendered samples are identical on every
//! platform.

mod batch;
mod spectrum;
mod wav;

use std::f64::consts::TAU;
use std::sync::OnceLock;

pub use batch::{batch_sonify, wav_name_for};
pub use spectrum::{spectral_peaks, Peak, FFT_SIZE, NOISE_FLOOR};
pub use wav::{decode_wav, encode_wav, read_wav, write_wav};

use crate::error::{Error, Result};
use crate::segmentation::Histogram256;
use crate::volume::GrayImage;

/// Side of the image accepted by [`sonify_pixels`].
pub const PIXEL_MODE_SIDE: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthConfig {
    pub sample_rate_hz: u32,
    pub duration_s: f64,
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub global_gain: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { sample_rate_hz: 44_100, duration_s: 1.0, f_min_hz: 100.0, f_max_hz: 7750.0, global_gain: 1.0 }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.sample_rate_hz == 0 {
            return bad("sample rate must be positive".into());
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return bad(format!("duration must be positive, got {}", self.duration_s));
        }
        if !(self.f_min_hz > 0.0 && self.f_min_hz < self.f_max_hz) {
            return bad(format!("need 0 < f_min < f_max, got {} and {}", self.f_min_hz, self.f_max_hz));
        }
        if self.f_max_hz >= f64::from(self.sample_rate_hz) / 2.0 {
            return bad(format!("f_max {} Hz is not below Nyquist", self.f_max_hz));
        }
        if !(self.global_gain > 0.0 && self.global_gain <= 1.0) {
            return bad(format!("gain must lie in (0, 1], got {}", self.global_gain));
        }
        Ok(())
    }

    /// Samples per clip, `round(sample_rate * duration)`.
    pub fn sample_count(&self) -> usize {
        (f64::from(self.sample_rate_hz) * self.duration_s).round() as usize
    }
}

/// Mono audio with samples in [-1, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct AudioClip {
    sample_rate_hz: u32,
    samples: Vec<f64>,
}

impl AudioClip {
    pub fn new(sample_rate_hz: u32, samples: Vec<f64>) -> Result<Self> {
        if sample_rate_hz == 0 {
            return Err(Error::InvalidParameter("sample rate must be positive".into()));
        }
        if let Some(s) = samples.iter().find(|s| !(s.abs() <= 1.0)) {
            return Err(Error::InvalidParameter(format!("sample {s} outside [-1, 1]")));
        }
        Ok(Self { sample_rate_hz, samples })
    }

    pub fn sample_rate_hz(&self) -> u32 {
        self.sample_rate_hz
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(s.abs()))
    }
}

/// Frequency of the voice bound to luminance `level` (1..=255):
/// `f_min + (level - 1) * (f_max - f_min) / 254`.
pub fn voice_frequency(level: u8, cfg: &SynthConfig) -> Result<f64> {
    if level == 0 {
        return Err(Error::InvalidParameter("level 0 has no voice".into()));
    }
    Ok(cfg.f_min_hz + f64::from(level - 1) * (cfg.f_max_hz - cfg.f_min_hz) / 254.0)
}

/// Frequency of the pixel-mode voice for row-major pixel `index` (0..=255):
/// the 256 voices span `f_min..=f_max` evenly.
pub fn pixel_frequency(index: usize, cfg: &SynthConfig) -> Result<f64> {
    if index >= PIXEL_MODE_SIDE * PIXEL_MODE_SIDE {
        return Err(Error::InvalidParameter(format!("pixel index {index} out of range")));
    }
    Ok(cfg.f_min_hz + index as f64 * (cfg.f_max_hz - cfg.f_min_hz) / 255.0)
}

fn oscillator(freq: f64, sample_rate: u32, n: usize) -> Vec<f64> {
    let sr = f64::from(sample_rate);
    (0..n)
        .map(|i| {
            let cycles = freq * i as f64 / sr;
            libm::sin(TAU * (cycles - cycles.floor()))
        })
        .collect()
}

/// Renders clips for one configuration, caching each voice's waveform the
/// first time it is needed. Shareable across threads.
pub struct Synthesizer {
    cfg: SynthConfig,
    samples: usize,
    level_voices: Vec<OnceLock<Vec<f64>>>,
    pixel_voices: Vec<OnceLock<Vec<f64>>>,
}

impl Synthesizer {
    pub fn new(cfg: SynthConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            cfg,
            samples: cfg.sample_count(),
            level_voices: (0..256).map(|_| OnceLock::new()).collect(),
            pixel_voices: (0..256).map(|_| OnceLock::new()).collect(),
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.cfg
    }

    fn level_wave(&self, level: u8) -> &[f64] {
        self.level_voices[level as usize].get_or_init(|| {
            let f = voice_frequency(level, &self.cfg).expect("voiced level");
            oscillator(f, self.cfg.sample_rate_hz, self.samples)
        })
    }

    fn pixel_wave(&self, index: usize) -> &[f64] {
        self.pixel_voices[index].get_or_init(|| {
            let f = pixel_frequency(index, &self.cfg).expect("pixel index in range");
            oscillator(f, self.cfg.sample_rate_hz, self.samples)
        })
    }

    fn mix<'a>(&'a self, voices: impl Iterator<Item = (f64, &'a [f64])>) -> AudioClip {
        let mut out = vec![0.0; self.samples];
        for (amp, wave) in voices {
            for (o, w) in out.iter_mut().zip(wave) {
                *o += amp * w;
            }
        }
        let gain = self.cfg.global_gain;
        for o in &mut out {
            // The clamp only absorbs rounding in the amplitude sum.
            *o = (*o * gain).clamp(-1.0, 1.0);
        }
        AudioClip { sample_rate_hz: self.cfg.sample_rate_hz, samples: out }
    }

    /// Histogram mode: voice `L` at amplitude `counts[L] / total`.
    pub fn render_histogram(&self, hist: &Histogram256) -> Result<AudioClip> {
        let total = hist.total();
        if total == 0 {
            return Err(Error::Empty("sonification of an empty histogram"));
        }
        let counts = hist.counts();
        let voices = (1..=255u8)
            .filter(|&l| counts[l as usize] > 0)
            .map(|l| (counts[l as usize] as f64 / total as f64, self.level_wave(l)));
        Ok(self.mix(voices))
    }

    /// Pixel mode: pixel `k` at amplitude `luminance / (255 * 256)`.
    pub fn render_pixels(&self, image: &GrayImage) -> Result<AudioClip> {
        if image.width() != PIXEL_MODE_SIDE || image.height() != PIXEL_MODE_SIDE {
            return Err(Error::Dimensions(format!(
                "pixel mode needs a {PIXEL_MODE_SIDE}x{PIXEL_MODE_SIDE} image, got {}x{}",
                image.width(),
                image.height()
            )));
        }
        let voices = image
            .pixels()
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0)
            .map(|(k, &p)| (f64::from(p) / (255.0 * 256.0), self.pixel_wave(k)));
        Ok(self.mix(voices))
    }
}

/// Renders one histogram; see [`Synthesizer::render_histogram`].
pub fn sonify_histogram(hist: &Histogram256, cfg: &SynthConfig) -> Result<AudioClip> {
    Synthesizer::new(*cfg)?.render_histogram(hist)
}

/// Renders a 16x16 image in pixel mode; see [`Synthesizer::render_pixels`].
pub fn sonify_pixels(image: &GrayImage, cfg: &SynthConfig) -> Result<AudioClip> {
    Synthesizer::new(*cfg)?.render_pixels(image)
}
