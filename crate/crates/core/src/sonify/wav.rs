//! Canonical 44-byte-header PCM16 mono WAV.

use std::fs;
use std::path::Path;

use super::AudioClip;
use crate::error::{io_err, Error, Result};
use crate::fsutil::write_atomic;

const HEADER_LEN: usize = 44;

fn quantise(s: f64) -> i16 {
    // Symmetric full scale: +1 maps to 32767 and -1 to -32767.
    (s * 32767.0).round().clamp(-32767.0, 32767.0) as i16
}

pub fn encode_wav(clip: &AudioClip) -> Result<Vec<u8>> {
    if clip.is_empty() {
        return Err(Error::Empty("wav encoding of an empty clip"));
    }
    let data_len = u32::try_from(clip.len() * 2)
        .ok()
        .filter(|&n| n <= u32::MAX - 36)
        .ok_or_else(|| Error::InvalidParameter("clip too long for a wav file".into()))?;
    let sr = clip.sample_rate_hz();
    let mut out = Vec::with_capacity(HEADER_LEN + data_len as usize);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVEfmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes()); // PCM
    out.extend_from_slice(&1u16.to_le_bytes()); // mono
    out.extend_from_slice(&sr.to_le_bytes());
    out.extend_from_slice(&(sr * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for &s in clip.samples() {
        out.extend_from_slice(&quantise(s).to_le_bytes());
    }
    Ok(out)
}

pub fn write_wav(clip: &AudioClip, path: &Path) -> Result<()> {
    write_atomic(path, &encode_wav(clip)?)
}

/// Parses the layout produced by [`encode_wav`]; anything else is rejected.
pub fn decode_wav(bytes: &[u8]) -> Result<AudioClip> {
    let bad = |why: &str| Error::Decode { file: "<wav>".into(), reason: why.into() };
    if bytes.len() < HEADER_LEN || &bytes[0..4] != b"RIFF" || &bytes[8..16] != b"WAVEfmt " {
        return Err(bad("not a canonical RIFF/WAVE file"));
    }
    let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]);
    let u32_at = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes"));
    if u32_at(16) != 16 || u16_at(20) != 1 || u16_at(22) != 1 || u16_at(34) != 16 {
        return Err(bad("only 16-bit mono PCM is supported"));
    }
    if &bytes[36..40] != b"data" {
        return Err(bad("missing data chunk"));
    }
    let data_len = u32_at(40) as usize;
    if bytes.len() != HEADER_LEN + data_len || data_len % 2 != 0 {
        return Err(bad("data length does not match file size"));
    }
    let samples = bytes[HEADER_LEN..]
        .chunks_exact(2)
        .map(|c| f64::from(i16::from_le_bytes([c[0], c[1]])) / 32767.0)
        .map(|s| s.clamp(-1.0, 1.0))
        .collect();
    AudioClip::new(u32_at(24), samples)
}

pub fn read_wav(path: &Path) -> Result<AudioClip> {
    let bytes = fs::read(path).map_err(io_err(format!("read {}", path.display())))?;
    decode_wav(&bytes).map_err(|e| match e {
        Error::Decode { reason, .. } => Error::Decode { file: path.to_path_buf(), reason },
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let clip = AudioClip::new(44_100, vec![0.0, 1.0, -1.0, 0.5]).unwrap();
        let b = encode_wav(&clip).unwrap();
        assert_eq!(b.len(), 44 + 8);
        assert_eq!(&b[0..4], b"RIFF");
        assert_eq!(u32::from_le_bytes(b[4..8].try_into().unwrap()), 44);
        assert_eq!(u32::from_le_bytes(b[24..28].try_into().unwrap()), 44_100);
        assert_eq!(u32::from_le_bytes(b[28..32].try_into().unwrap()), 88_200);
        assert_eq!(&b[44..], &[0, 0, 0xff, 0x7f, 0x01, 0x80, 0x00, 0x40]);
    }

    #[test]
    fn roundtrip_within_one_lsb() {
        let samples: Vec<f64> = (0..1000).map(|i| ((i as f64) * 0.01).sin() * 0.9).collect();
        let clip = AudioClip::new(8000, samples.clone()).unwrap();
        let back = decode_wav(&encode_wav(&clip).unwrap()).unwrap();
        assert_eq!(back.sample_rate_hz(), 8000);
        for (a, b) in samples.iter().zip(back.samples()) {
            assert!((a - b).abs() <= 1.0 / 32767.0);
        }
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_wav(b"RIFF").is_err());
        assert!(encode_wav(&AudioClip::new(8000, vec![]).unwrap()).is_err());
    }
}
