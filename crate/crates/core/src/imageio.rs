//! Raster input/output: slice-stack ingest and 8-bit grayscale export.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use globset::Glob;
use image::{DynamicImage, ImageFormat};

use crate::error::{io_err, Error, Result};
use crate::fsutil::write_atomic;
use crate::volume::{convert_depth, GrayImage, GrayVolume};

/// Files in `dir` whose names match `pattern`, sorted lexicographically.
pub fn matching_files(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>> {
    let matcher = Glob::new(pattern)?.compile_matcher();
    let entries = fs::read_dir(dir).map_err(io_err(format!("read directory {}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry = entry.map_err(io_err(format!("read directory {}", dir.display())))?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        if let Some(name) = path.file_name() {
            if matcher.is_match(Path::new(name)) {
                files.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}

/// Decodes one 8- or 16-bit single-channel raster. 16-bit samples go
/// through [`convert_depth`].
pub fn read_gray(path: &Path) -> Result<GrayImage> {
    let decode_err = |reason: String| Error::Decode { file: path.to_path_buf(), reason };
    let img = image::open(path).map_err(|e| decode_err(e.to_string()))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let pixels = match img {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLuma16(buf) => buf.into_raw().into_iter().map(convert_depth).collect(),
        other => {
            return Err(decode_err(format!(
                "unsupported pixel format {:?}; expected single-channel grayscale",
                other.color()
            )))
        }
    };
    GrayImage::new(w, h, pixels).map_err(|e| decode_err(e.to_string()))
}

/// Loads every file of `dir` matching `pattern` as one slice, in
/// lexicographic filename order.
pub fn ingest_stack(dir: &Path, pattern: &str, voxel_size_um: f64) -> Result<GrayVolume> {
    let files = matching_files(dir, pattern)?;
    if files.is_empty() {
        return Err(Error::NoMatchingFiles { dir: dir.to_path_buf(), pattern: pattern.to_string() });
    }
    let mut slices: Vec<GrayImage> = Vec::with_capacity(files.len());
    for (i, file) in files.iter().enumerate() {
        let img = read_gray(file)?;
        if let Some(first) = slices.first() {
            if img.width() != first.width() || img.height() != first.height() {
                return Err(Error::SliceDimensionMismatch {
                    slice: i + 1,
                    file: file.clone(),
                    expected_w: first.width(),
                    expected_h: first.height(),
                    found_w: img.width(),
                    found_h: img.height(),
                });
            }
        }
        slices.push(img);
    }
    GrayVolume::from_slices(&slices, voxel_size_um)
}

/// PNG bytes for an 8-bit grayscale image.
pub fn encode_png(image: &GrayImage) -> Result<Vec<u8>> {
    let buf = image::GrayImage::from_raw(
        image.width() as u32,
        image.height() as u32,
        image.pixels().to_vec(),
    )
    .ok_or_else(|| Error::Dimensions("image buffer size".into()))?;
    let mut out = Cursor::new(Vec::new());
    buf.write_to(&mut out, ImageFormat::Png)
        .map_err(|e| Error::InvalidParameter(format!("png encode: {e}")))?;
    Ok(out.into_inner())
}

/// Writes an 8-bit grayscale PNG atomically.
pub fn write_png(image: &GrayImage, path: &Path) -> Result<()> {
    write_atomic(path, &encode_png(image)?)
}

/// Writes each slice as `{prefix}{z:04}.png` into `dir`.
pub fn write_stack(volume: &GrayVolume, dir: &Path, prefix: &str) -> Result<Vec<PathBuf>> {
    crate::fsutil::ensure_dir(dir)?;
    volume
        .slices()
        .enumerate()
        .map(|(z, s)| {
            let path = dir.join(format!("{prefix}{z:04}.png"));
            write_png(&s, &path).map(|_| path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_directory_has_no_matching_files() {
        let dir = tempfile::tempdir().unwrap();
        let err = ingest_stack(dir.path(), "*.png", 6.25).unwrap_err();
        assert!(err.to_string().contains("no matching files"));
    }

    #[test]
    fn slices_are_sorted_and_stacked() {
        let dir = tempfile::tempdir().unwrap();
        write_png(&GrayImage::filled(4, 4, 20), &dir.path().join("b.png")).unwrap();
        write_png(&GrayImage::filled(4, 4, 10), &dir.path().join("a.png")).unwrap();
        fs::write(dir.path().join("notes.txt"), "x").unwrap();
        let vol = ingest_stack(dir.path(), "*.png", 6.25).unwrap();
        assert_eq!(vol.dims(), [4, 4, 2]);
        assert_eq!(vol.get(0, 0, 0), 10);
        assert_eq!(vol.get(0, 0, 1), 20);
        assert_eq!(vol.voxel_size_um(), 6.25);
    }

    #[test]
    fn dimension_mismatch_names_second_slice() {
        let dir = tempfile::tempdir().unwrap();
        write_png(&GrayImage::filled(256, 256, 0), &dir.path().join("a.png")).unwrap();
        write_png(&GrayImage::filled(128, 128, 0), &dir.path().join("b.png")).unwrap();
        let err = ingest_stack(dir.path(), "*.png", 1.0).unwrap_err();
        match &err {
            Error::SliceDimensionMismatch { slice: 2, file, .. } => assert!(file.ends_with("b.png")),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn undecodable_file_is_named() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("bad.png"), b"not a png").unwrap();
        let err = ingest_stack(dir.path(), "*.png", 1.0).unwrap_err();
        assert!(err.to_string().contains("bad.png"));
    }

    #[test]
    fn sixteen_bit_sources_are_converted() {
        let dir = tempfile::tempdir().unwrap();
        let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(2, 1, vec![32768u16, 65535]).unwrap();
        buf.save(dir.path().join("s.png")).unwrap();
        // 16-bit PGM goes through the same path.
        let pgm = dir.path().join("t.pgm");
        let mut bytes = b"P5\n2 1\n65535\n".to_vec();
        bytes.extend_from_slice(&[0, 0, 0xff, 0xff]);
        fs::write(&pgm, bytes).unwrap();

        let img = read_gray(&dir.path().join("s.png")).unwrap();
        assert_eq!(img.pixels(), &[128, 255]);
        assert_eq!(read_gray(&pgm).unwrap().pixels(), &[0, 255]);
    }

    #[test]
    fn png_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let img = GrayImage::from_fn(5, 3, |x, y| (x * 40 + y) as u8);
        let p = dir.path().join("x.png");
        write_png(&img, &p).unwrap();
        assert_eq!(read_gray(&p).unwrap(), img);
    }
}
