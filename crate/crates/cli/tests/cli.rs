use std::path::Path;
use std::process::{Command, Output};

use porevoice::imageio::{matching_files, read_gray, write_png};
use porevoice::volume::GrayImage;

fn porevoice(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_porevoice"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run porevoice")
}

fn ok(args: &[&str]) -> String {
    let out = porevoice(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// `statistic,value` rows of a summary CSV.
fn summary_value(path: &Path, key: &str) -> String {
    let text = std::fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key},")).map(str::to_string))
        .unwrap_or_else(|| panic!("{key} missing from {text}"))
}

fn small_stack(dir: &Path, slices: usize) {
    ok(&["gen", "stack", "--output", p(dir), "--slices", &slices.to_string(), "--side", "260"]);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = p(dir.path());
    for args in [
        vec!["preprocess", "--input", d, "--output", d, "--mode", "tiles"],
        vec!["preprocess", "--output", d],
        vec!["analyze", "4d", "--input", d, "--output", d],
        vec!["frobnicate"],
    ] {
        assert_eq!(porevoice(&args).status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "colour = red\n").unwrap();
    assert_eq!(porevoice(&["--config", p(&cfg), "selftest", "--quick"]).status.code(), Some(2));

    let out = Command::new(env!("CARGO_BIN_EXE_porevoice"))
        .args(["selftest", "--quick"])
        .env("POREVOICE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope");
    let out = porevoice(&["preprocess", "--input", p(&missing), "--output", p(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    let out = porevoice(&["sonify", "--input", p(dir.path()), "--output", p(&dir.path().join("w"))]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest"));
}

#[test]
fn corpus_pipeline_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, images, wavs) = (dir.path().join("raw"), dir.path().join("img"), dir.path().join("wav"));
    small_stack(&raw, 4);

    // The config asks for tiles; the flag wins.
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, format!("# test run\ninput = {}\nmode = tile\n", raw.display())).unwrap();
    ok(&["--config", p(&cfg), "preprocess", "--output", p(&images), "--mode", "downsample"]);
    assert_eq!(matching_files(&images, "*.png").unwrap().len(), 4);
    assert_eq!(read_gray(&images.join("s0000.png")).unwrap().width(), 64);

    ok(&["sonify", "--input", p(&images), "--output", p(&wavs)]);
    assert_eq!(matching_files(&wavs, "*.wav").unwrap().len(), 4);
    let first = std::fs::read(wavs.join("s0002.wav")).unwrap();
    assert_eq!(porevoice(&["sonify", "--input", p(&images), "--output", p(&wavs)]).status.code(), Some(1));
    ok(&["sonify", "--input", p(&images), "--output", p(&wavs), "--overwrite"]);
    assert_eq!(std::fs::read(wavs.join("s0002.wav")).unwrap(), first);

    let a2 = dir.path().join("a2");
    ok(&["analyze", "2d", "--input", p(&images), "--output", p(&a2)]);
    let rows = std::fs::read_to_string(a2.join("porosity.csv")).unwrap();
    assert_eq!(rows.lines().count(), 5);

    let same = dir.path().join("same");
    ok(&["compare", "--input", p(&images), "--generated", p(&images), "--output", p(&same)]);
    assert_eq!(summary_value(&same.join("summary.csv"), "mean_mse"), "0.0000");
    for k in ["mean_luminance", "porosity", "pore_size"] {
        assert_eq!(summary_value(&same.join("summary.csv"), &format!("percent_diff_{k}")), "0", "{k}");
    }

    let brighter = dir.path().join("bright");
    std::fs::create_dir(&brighter).unwrap();
    for f in matching_files(&images, "*.png").unwrap() {
        let img = read_gray(&f).unwrap();
        let up = GrayImage::from_fn(img.width(), img.height(), |x, y| img.get(x, y).saturating_add(10));
        write_png(&up, &brighter.join(f.file_name().unwrap())).unwrap();
    }
    let diff = dir.path().join("diff");
    ok(&["compare", "--input", p(&images), "--generated", p(&brighter), "--output", p(&diff)]);
    let pct: f64 = summary_value(&diff.join("summary.csv"), "percent_diff_mean_luminance").parse().unwrap();
    assert!(pct > 0.0);

    let half = dir.path().join("half");
    std::fs::create_dir(&half).unwrap();
    for k in ["s0000.png", "s0001.png"] {
        std::fs::copy(images.join(k), half.join(k)).unwrap();
    }
    let out = porevoice(&["compare", "--input", p(&images), "--generated", p(&half), "--output", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("s0002") && err.contains("s0003"), "{err}");
}

#[test]
fn tile_mode_counts_and_self_compare() {
    let dir = tempfile::tempdir().unwrap();
    let (raw, tiles) = (dir.path().join("raw"), dir.path().join("tiles"));
    small_stack(&raw, 2);
    ok(&["preprocess", "--input", p(&raw), "--output", p(&tiles), "--mode", "tile"]);
    assert_eq!(matching_files(&tiles, "*.png").unwrap().len(), 32);
    let rep = dir.path().join("rep");
    let out = ok(&["compare", "--input", p(&tiles), "--generated", p(&tiles), "--output", p(&rep)]);
    assert!(out.contains("compared 2 pairs"), "{out}");
}

#[test]
#[cfg_attr(feature = "fault-watershed", ignore)]
fn analyze_3d_on_synthetic_volumes() {
    let dir = tempfile::tempdir().unwrap();
    let chan = dir.path().join("chan");
    ok(&["gen", "channel", "--shape", "straight", "--output", p(&chan)]);
    let out = dir.path().join("chan_out");
    ok(&["analyze", "3d", "--input", p(&chan), "--output", p(&out), "--voxel-size", "1"]);
    let taus = std::fs::read_to_string(out.join("tortuosity.csv")).unwrap();
    assert!(taus.lines().count() > 1);
    assert!(taus.lines().skip(1).all(|l| l == "1.00000"), "{taus}");

    let spheres = dir.path().join("spheres");
    ok(&["gen", "spheres", "--output", p(&spheres), "--count", "6", "--radius-min", "4"]);
    let out = dir.path().join("sph_out");
    ok(&["analyze", "3d", "--input", p(&spheres), "--output", p(&out), "--dump"]);
    assert_eq!(summary_value(&out.join("summary.csv"), "pore_count"), "6");
    assert!(out.join("labels").is_dir());
}

#[test]
fn selftest_is_deterministic() {
    let a = porevoice(&["selftest", "--quick"]);
    let b = porevoice(&["selftest", "--quick"]);
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8_lossy(&a.stdout);
    assert!(text.ends_with("10/10 checks passed\n") || cfg!(feature = "fault-watershed"), "{text}");
    if cfg!(feature = "fault-watershed") {
        assert_eq!(a.status.code(), Some(1));
        assert!(text.contains("FAIL sphere-pack segmentation"), "{text}");
    } else {
        assert_eq!(a.status.code(), Some(0));
    }
}
