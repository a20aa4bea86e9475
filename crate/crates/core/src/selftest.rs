//! End-to-end checks against synthetic ground truth and the brute-force
//! oracles. Each check is deterministic in its seed, and its report line
//! holds no timings, so repeated runs print identical bytes.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::imageio::{matching_files, write_png};
use crate::manifest::{Manifest, MANIFEST_NAME};
use crate::metrics::{
    connect_pores, porosity, shortest_path, tortuosity_between, tortuosity_distribution, Axis, Pore, PoreNetwork,
    DEFAULT_GRID_SPACING,
};
use crate::pipeline::{preprocess, sonify_corpus, Mode, PreprocessConfig, DEFAULT_CROP};
use crate::segmentation::{
    distance_transform, otsu_threshold, segment_pores, BinaryVolume, Histogram256, LabelVolume,
};
use crate::sonify::{encode_wav, sonify_histogram, spectral_peaks, voice_frequency, SynthConfig, FFT_SIZE};
use crate::stats::{mse, moving_average, percent_difference};
use crate::synthetic::{
    brute_force_connectivity, brute_force_distance_transform, brute_force_otsu, brute_force_shortest_path,
    channel_preset, gen_channel, gen_sphere_pack, random_sphere_pack, textured_slice, ChannelShape,
};
use crate::tiles::{tile_reassemble, tile_split};
use crate::volume::GrayImage;

pub const DEFAULT_SEED: u64 = 20_231_107;
/// Slice count of the full-scale corpus check.
pub const FULL_STACK_SLICES: usize = 478;
/// Side of the fixture image whose WAV is frozen as a golden file.
pub const WAV_FIXTURE_SIDE: usize = 64;
/// Histogram-mode WAV of [`wav_fixture_image`] under the default synth
/// settings.
pub const GOLDEN_WAV: &[u8] = include_bytes!("../tests/fixtures/golden.wav");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Self { name, passed, detail: detail.into() }
    }

    /// A check that could not run counts as failed.
    fn from_result(name: &'static str, r: Result<(bool, String)>) -> Self {
        match r {
            Ok((passed, detail)) => Self::new(name, passed, detail),
            Err(e) => Self::new(name, false, format!("error: {e}")),
        }
    }
}

impl fmt::Display for CheckResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Preprocesses and sonifies a `slices`-deep textured stack in both modes
/// and checks every output count and manifest.
pub fn check_cardinalities(seed: u64, slices: usize, work: &Path) -> CheckResult {
    CheckResult::from_result("pipeline cardinalities", cardinalities(seed, slices, work))
}

fn cardinalities(seed: u64, slices: usize, work: &Path) -> Result<(bool, String)> {
    let raw = work.join("raw");
    crate::fsutil::ensure_dir(&raw)?;
    // Larger than the crop so the centre crop is exercised.
    let side = DEFAULT_CROP + 24;
    use rayon::prelude::*;
    (0..slices)
        .into_par_iter()
        .try_for_each(|i| write_png(&textured_slice(seed, i, side), &raw.join(format!("raw_{i:04}.png"))))?;

    let synth = SynthConfig::default();
    let mut parts = Vec::new();
    let mut ok = true;
    for (mode, per_slice) in [(Mode::Downsample, 1), (Mode::Tile, 16)] {
        let images = work.join(format!("{mode}"));
        let wavs = work.join(format!("{mode}_wav"));
        let pre = preprocess(&PreprocessConfig::new(&raw, &images, mode))?;
        let son = sonify_corpus(&images, &wavs, &synth, false)?;
        let expected = slices * per_slice;
        let n_png = matching_files(&images, "*.png")?.len();
        let n_wav = matching_files(&wavs, "*.wav")?.len();

        let pre_disk = Manifest::read(&images.join(MANIFEST_NAME))?;
        let son_disk = Manifest::read(&wavs.join(MANIFEST_NAME))?;
        let outputs: BTreeSet<_> = pre_disk.entries.iter().map(|(_, o)| o.clone()).collect();
        let sources: BTreeSet<_> = pre_disk.entries.iter().map(|(s, _)| s.clone()).collect();
        let paired: BTreeSet<_> = son_disk.entries.iter().map(|(i, _)| i.clone()).collect();
        let complete = pre_disk == pre
            && son_disk == son
            && sources.len() == slices
            && outputs.len() == expected
            && paired == outputs
            && son_disk.entries.iter().all(|(i, w)| i.is_file() && w.is_file());
        let good = n_png == expected && n_wav == expected && complete;
        ok &= good;
        parts.push(format!(
            "{mode}: {n_png} images + {n_wav} wavs (expected {expected} + {expected}), manifests {}",
            if complete { "complete" } else { "INCOMPLETE" }
        ));
    }
    Ok((ok, format!("{slices} slices; {}", parts.join("; "))))
}

pub fn check_tiling_roundtrip(seed: u64, cases: usize) -> CheckResult {
    CheckResult::from_result("tiling roundtrip", tiling(seed, cases))
}

fn tiling(seed: u64, cases: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0;
    for i in 0..cases {
        let img = GrayImage::new(DEFAULT_CROP, DEFAULT_CROP, (0..DEFAULT_CROP * DEFAULT_CROP).map(|_| rng.gen()).collect())?;
        let tiles = tile_split(&img, i, 64)?;
        if tiles.len() != 16 || tile_reassemble(&tiles)? != img {
            failures += 1;
        }
    }
    Ok((failures == 0, format!("{}/{cases} random 256x256 images bit-identical", cases - failures)))
}

/// Random histograms of varied shape: sparse, dense and heavy-tailed.
pub fn random_histogram(rng: &mut ChaCha8Rng) -> Histogram256 {
    let mut c = [0u64; 256];
    match rng.gen_range(0..3) {
        0 => {
            for _ in 0..rng.gen_range(1..=6) {
                c[rng.gen_range(0..256)] += rng.gen_range(1..1000);
            }
        }
        1 => {
            for v in c.iter_mut() {
                *v = rng.gen_range(0..50);
            }
        }
        _ => {
            for v in c.iter_mut() {
                if rng.gen_bool(0.3) {
                    *v = 1u64 << rng.gen_range(0..30);
                }
            }
        }
    }
    if c.iter().all(|&v| v == 0) {
        c[rng.gen_range(0..256)] = 1;
    }
    Histogram256::from_counts(c)
}

pub fn check_otsu(seed: u64, cases: usize) -> CheckResult {
    CheckResult::from_result("otsu vs brute force", otsu(seed, cases))
}

fn otsu(seed: u64, cases: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for i in 0..cases {
        let h = random_histogram(&mut rng);
        let (fast, slow) = (otsu_threshold(&h)?.level, brute_force_otsu(&h)?);
        if fast != slow {
            mismatches.push(format!("#{i}: {fast} vs {slow}"));
        }
    }
    let detail = format!("{}/{cases} histograms equal", cases - mismatches.len());
    Ok((mismatches.is_empty(), with_examples(detail, &mismatches)))
}

fn with_examples(detail: String, bad: &[String]) -> String {
    if bad.is_empty() {
        detail
    } else {
        format!("{detail}; first mismatches {}", bad.iter().take(3).cloned().collect::<Vec<_>>().join(", "))
    }
}

pub fn check_distance_transform(seed: u64, cases: usize, max_side: usize) -> CheckResult {
    CheckResult::from_result("distance transform vs brute force", edt(seed, cases, max_side))
}

fn edt(seed: u64, cases: usize, max_side: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mismatches = Vec::new();
    for i in 0..cases {
        let dims = [rng.gen_range(1..=max_side), rng.gen_range(1..=max_side), rng.gen_range(1..=max_side)];
        let fill = rng.gen_range(0.3..0.95);
        let b = BinaryVolume::from_fn(dims, |_, _, _| rng.gen_bool(fill));
        if distance_transform(&b) != brute_force_distance_transform(&b) {
            mismatches.push(format!("#{i} {dims:?}"));
        }
    }
    let detail = format!("{}/{cases} volumes up to {max_side}^3 exactly equal", cases - mismatches.len());
    Ok((mismatches.is_empty(), with_examples(detail, &mismatches)))
}

/// Sphere-pack tolerances.
pub const SPHERE_DIAMETER_TOL: f64 = 0.10;
pub const SPHERE_POROSITY_TOL: f64 = 0.02;

/// Packs of 1..=`max_spheres` spheres (radii 3..8, surfaces at least two
/// voxels apart) in 64^3, segmented end to end. Every sphere is matched to
/// the pore with the nearest centroid; the matching must be one-to-one.
pub fn check_sphere_packs(seed: u64, max_spheres: usize) -> CheckResult {
    CheckResult::from_result("sphere-pack segmentation", sphere_packs(seed, max_spheres))
}

fn sphere_packs(seed: u64, max_spheres: usize) -> Result<(bool, String)> {
    let mut count_failures = Vec::new();
    let (mut worst_d, mut worst_d_at) = (0.0f64, String::new());
    let mut worst_p = 0.0f64;
    let mut spheres_total = 0;
    let mut diameter_failures = 0;
    for n in 1..=max_spheres {
        let spec = random_sphere_pack(seed.wrapping_add(n as u64), [64; 3], n, (3.0, 8.0), 2.0)?;
        let (vol, truth) = gen_sphere_pack(&spec)?;
        let seg = segment_pores(&vol)?;
        let net = PoreNetwork::from_labels(&seg.labels, spec.voxel_size_um)?;
        worst_p = worst_p.max((porosity(&seg.binary)? - truth.analytic_porosity).abs());
        if net.pores().len() != n {
            count_failures.push(format!("{n} spheres -> {} pores", net.pores().len()));
            continue;
        }
        let mut used = BTreeSet::new();
        for s in &spec.spheres {
            let nearest = nearest_pore(net.pores(), s.center);
            used.insert(nearest.id);
            let analytic = 2.0 * s.radius * spec.voxel_size_um;
            let err = nearest.equivalent_diameter_um / analytic - 1.0;
            spheres_total += 1;
            if err.abs() > SPHERE_DIAMETER_TOL {
                diameter_failures += 1;
            }
            if err.abs() > worst_d.abs() {
                worst_d = err;
                worst_d_at = format!("radius {:.2}, pack of {n}", s.radius);
            }
        }
        if used.len() != n {
            count_failures.push(format!("{n} spheres matched to {} distinct pores", used.len()));
        }
    }
    let counts_ok = count_failures.is_empty();
    let diam_ok = diameter_failures == 0 && spheres_total > 0;
    let por_ok = worst_p <= SPHERE_POROSITY_TOL;
    let counts = if counts_ok {
        format!("pore counts exact for packs of 1..={max_spheres}")
    } else {
        format!("pore count errors [{}]", count_failures.join(", "))
    };
    let detail = format!(
        "{counts}; diameters: {}/{spheres_total} within {:.0}%, worst {:+.1}% ({worst_d_at}); porosity worst error {worst_p:.4} (tol {SPHERE_POROSITY_TOL})",
        spheres_total - diameter_failures,
        SPHERE_DIAMETER_TOL * 100.0,
        worst_d * 100.0,
    );
    Ok((counts_ok && diam_ok && por_ok, detail))
}

fn nearest_pore(pores: &[Pore], p: [f64; 3]) -> &Pore {
    let d2 = |q: &Pore| (0..3).map(|a| (q.centroid[a] - p[a]).powi(2)).sum::<f64>();
    pores.iter().min_by(|a, b| d2(a).total_cmp(&d2(b))).expect("non-empty")
}

/// Two box pores facing each other across a solid wall of `wall` voxels.
fn walled_pair(rng: &mut ChaCha8Rng, wall: usize) -> Result<LabelVolume> {
    let axis = rng.gen_range(0..3);
    let mut size_a = [0usize; 3];
    let mut size_b = [0usize; 3];
    for a in 0..3 {
        size_a[a] = rng.gen_range(2..=6);
        size_b[a] = rng.gen_range(2..=6);
    }
    let margin = 2;
    let mut dims = [0usize; 3];
    let mut origin_a = [margin; 3];
    let mut origin_b = [margin; 3];
    for a in 0..3 {
        if a == axis {
            origin_b[a] = margin + size_a[a] + wall;
            dims[a] = origin_b[a] + size_b[a] + margin;
        } else {
            // Offsetting one box by less than the smaller size keeps the
            // faces overlapping.
            let shift = rng.gen_range(0..size_a[a].min(size_b[a]));
            if rng.gen_bool(0.5) {
                origin_b[a] += shift;
            } else {
                origin_a[a] += shift;
            }
            dims[a] = margin * 2 + shift + size_a[a].max(size_b[a]);
        }
    }
    let inside = |o: [usize; 3], s: [usize; 3], p: [usize; 3]| (0..3).all(|a| p[a] >= o[a] && p[a] < o[a] + s[a]);
    let mut labels = Vec::with_capacity(dims.iter().product());
    for z in 0..dims[2] {
        for y in 0..dims[1] {
            for x in 0..dims[0] {
                let p = [x, y, z];
                labels.push(if inside(origin_a, size_a, p) {
                    1
                } else if inside(origin_b, size_b, p) {
                    2
                } else {
                    0
                });
            }
        }
    }
    LabelVolume::new(dims[0], dims[1], dims[2], labels)
}

pub fn check_connectivity(seed: u64, placements: usize) -> CheckResult {
    CheckResult::from_result("connectivity", connectivity(seed, placements))
}

fn connectivity(seed: u64, placements: usize) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut thin_ok, mut thick_ok, mut oracle_ok) = (0, 0, 0);
    for _ in 0..placements {
        let thin = walled_pair(&mut rng, 1)?;
        let thick_wall = rng.gen_range(3..=5);
        let thick = walled_pair(&mut rng, thick_wall)?;
        let (c_thin, c_thick) = (connect_pores(&thin), connect_pores(&thick));
        thin_ok += usize::from(c_thin.contains(&(1, 2)));
        thick_ok += usize::from(c_thick.is_empty());
        oracle_ok += usize::from(c_thin == brute_force_connectivity(&thin) && c_thick == brute_force_connectivity(&thick));
    }
    let ok = thin_ok == placements && thick_ok == placements && oracle_ok == placements;
    Ok((
        ok,
        format!(
            "1-voxel walls connected {thin_ok}/{placements}, >=3-voxel walls separate {thick_ok}/{placements}, dilation oracle agrees {oracle_ok}/{placements}"
        ),
    ))
}

pub const STRAIGHT_TAU_TOL: f64 = 1e-6;
pub const RIGHT_ANGLE_TAU: (f64, f64) = (std::f64::consts::SQRT_2, 0.05);
pub const U_TAU: (f64, f64) = (3.0, 0.1);

/// Tortuosity between the pores nearest to the first and last bead of a
/// channel preset, after full segmentation.
pub fn channel_endpoint_tau(shape: ChannelShape) -> Result<Option<f64>> {
    let (vol, truth) = gen_channel(&channel_preset(shape))?;
    let seg = segment_pores(&vol)?;
    let net = PoreNetwork::from_labels(&seg.labels, vol.voxel_size_um())?;
    if net.pores().is_empty() {
        return Ok(None);
    }
    let first = nearest_pore(net.pores(), truth.bead_centres[0]).id;
    let last = nearest_pore(net.pores(), *truth.bead_centres.last().expect("beads")).id;
    tortuosity_between(&net, first, last)
}

pub fn check_tortuosity(seed: u64, networks: usize) -> CheckResult {
    CheckResult::from_result("tortuosity", tortuosity(seed, networks))
}

fn tortuosity(seed: u64, networks: usize) -> Result<(bool, String)> {
    let (vol, _) = gen_channel(&channel_preset(ChannelShape::Straight))?;
    let seg = segment_pores(&vol)?;
    let net = PoreNetwork::from_labels(&seg.labels, vol.voxel_size_um())?;
    let dist = tortuosity_distribution(&net, Axis::Z, DEFAULT_GRID_SPACING)?;
    let straight_dev = dist.tau_values.iter().map(|t| (t - 1.0).abs()).fold(0.0, f64::max);
    let straight_ok = !dist.tau_values.is_empty() && straight_dev <= STRAIGHT_TAU_TOL;

    let fmt_tau = |t: Option<f64>| t.map_or("unreachable".to_string(), |t| format!("{t:.4}"));
    let within = |t: Option<f64>, (want, tol): (f64, f64)| t.is_some_and(|t| (t - want).abs() <= tol);
    let l = channel_endpoint_tau(ChannelShape::RightAngle)?;
    let u = channel_endpoint_tau(ChannelShape::U)?;

    let (agree, pairs) = random_networks(seed, networks)?;
    let ok = straight_ok && within(l, RIGHT_ANGLE_TAU) && within(u, U_TAU) && agree == pairs;
    Ok((
        ok,
        format!(
            "straight: {} pairs, max |tau-1| {straight_dev:.1e}; right-angle {} (want {:.4}±{}); U {} (want {}±{}); random networks: {agree}/{pairs} pair distances equal brute force",
            dist.tau_values.len(),
            fmt_tau(l),
            RIGHT_ANGLE_TAU.0,
            RIGHT_ANGLE_TAU.1,
            fmt_tau(u),
            U_TAU.0,
            U_TAU.1,
        ),
    ))
}

/// Dijkstra against exhaustive path enumeration on random networks of 2..=8
/// pores. Returns (agreeing pairs, total pairs).
fn random_networks(seed: u64, networks: usize) -> Result<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut agree, mut pairs) = (0, 0);
    for _ in 0..networks {
        let n = rng.gen_range(2..=8u32);
        let pores: Vec<Pore> = (1..=n)
            .map(|id| Pore {
                id,
                voxel_count: 1,
                centroid: [rng.gen_range(0.0..32.0), rng.gen_range(0.0..32.0), rng.gen_range(0.0..32.0)],
                equivalent_diameter_um: 1.0,
            })
            .collect();
        let density = rng.gen_range(0.2..0.8);
        let links: Vec<(u32, u32)> =
            (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).filter(|_| rng.gen_bool(density)).collect();
        let net = PoreNetwork::new([32; 3], rng.gen_range(0.5..10.0), pores, links)?;
        for s in 1..=n {
            for t in 1..=n {
                pairs += 1;
                let fast = shortest_path(&net, s, t)?.map(|(l, _)| l);
                agree += usize::from(fast == brute_force_shortest_path(&net, s, t)?);
            }
        }
    }
    Ok((agree, pairs))
}

pub fn check_spectra(seed: u64, cases: usize) -> CheckResult {
    CheckResult::from_result("sonification spectra", spectra(seed, cases))
}

fn spectra(seed: u64, cases: usize) -> Result<(bool, String)> {
    let cfg = SynthConfig::default();
    let bin = f64::from(cfg.sample_rate_hz) / FFT_SIZE as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut located, mut ordered, mut bounded) = (0, 0, 0);
    let mut worst_offset = 0.0f64;
    let mut peak_sample = 0.0f64;
    for _ in 0..cases {
        let k = rng.gen_range(1..=5);
        let mut levels: Vec<u8> = Vec::new();
        while levels.len() < k {
            let l: u8 = rng.gen_range(1..=255);
            if levels.iter().all(|&m| m.abs_diff(l) > 2) {
                levels.push(l);
            }
        }
        // Distinct counts at least 1/16 apart relative to the largest.
        let mut weights: Vec<u64> = (1..=16).collect();
        for i in (1..weights.len()).rev() {
            weights.swap(i, rng.gen_range(0..=i));
        }
        let scale = rng.gen_range(1..=1000u64);
        let mut counts = [0u64; 256];
        for (&l, &w) in levels.iter().zip(&weights) {
            counts[l as usize] = w * scale;
        }
        let clip = sonify_histogram(&Histogram256::from_counts(counts), &cfg)?;
        peak_sample = peak_sample.max(clip.peak());
        bounded += usize::from(clip.peak() <= 1.0);
        let peaks = spectral_peaks(&clip, k)?;

        let mut all_found = peaks.len() == k;
        let mut matched: Vec<(u64, f64)> = Vec::new();
        for &l in &levels {
            let f = voice_frequency(l, &cfg)?;
            match peaks.iter().min_by(|a, b| (a.frequency_hz - f).abs().total_cmp(&(b.frequency_hz - f).abs())) {
                Some(p) if (p.frequency_hz - f).abs() <= bin => {
                    worst_offset = worst_offset.max((p.frequency_hz - f).abs());
                    matched.push((counts[l as usize], p.magnitude));
                }
                _ => all_found = false,
            }
        }
        located += usize::from(all_found);
        matched.sort_by_key(|&(c, _)| c);
        ordered += usize::from(all_found && matched.windows(2).all(|w| w[0].1 < w[1].1));
    }
    let ok = located == cases && ordered == cases && bounded == cases;
    Ok((
        ok,
        format!(
            "{located}/{cases} clips with every voice within one bin ({bin:.2} Hz; worst offset {worst_offset:.2} Hz), magnitude order matches count order {ordered}/{cases}, peak sample {peak_sample:.4} (all within |1|: {})",
            bounded == cases
        ),
    ))
}

/// The fixture image whose WAV is frozen as a golden file.
pub fn wav_fixture_image() -> GrayImage {
    textured_slice(DEFAULT_SEED, 0, WAV_FIXTURE_SIDE)
}

/// Canonical WAV bytes of a histogram-mode rendering of `image`.
pub fn render_fixture_wav(image: &GrayImage) -> Result<Vec<u8>> {
    let hist = crate::segmentation::luminance_histogram(image)?;
    encode_wav(&sonify_histogram(&hist, &SynthConfig::default())?)
}

/// Renders the fixture twice and compares both against `golden`.
pub fn check_wav_golden(image: &GrayImage, golden: &[u8]) -> CheckResult {
    let run = || -> Result<(bool, String)> {
        let (a, b) = (render_fixture_wav(image)?, render_fixture_wav(image)?);
        let first_diff = a.iter().zip(golden).position(|(x, y)| x != y);
        let matches = a.len() == golden.len() && first_diff.is_none();
        let detail = match (a == b, matches) {
            (true, true) => format!("two renders identical and equal to the {}-byte golden file", golden.len()),
            (false, _) => "two renders differ".to_string(),
            (true, false) => format!(
                "render ({} bytes) differs from golden ({} bytes) at byte {}",
                a.len(),
                golden.len(),
                first_diff.unwrap_or(a.len().min(golden.len()))
            ),
        };
        Ok((a == b && matches, detail))
    };
    CheckResult::from_result("wav bit-exactness", run())
}

pub fn check_mse_properties(seed: u64) -> CheckResult {
    CheckResult::from_result("mse and summary statistics", mse_properties(seed))
}

fn mse_properties(seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = Vec::new();
    for i in 0..20 {
        let (w, h) = (rng.gen_range(1..40), rng.gen_range(1..40));
        let a = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect())?;
        let b = GrayImage::new(w, h, (0..w * h).map(|_| rng.gen()).collect())?;
        if mse(&a, &b)? != mse(&b, &a)? {
            bad.push(format!("asymmetric #{i}"));
        }
        if mse(&a, &a)? != 0.0 {
            bad.push(format!("identity #{i}"));
        }
    }
    let black = GrayImage::filled(8, 8, 0);
    let half = GrayImage::from_fn(8, 8, |x, _| if x < 4 { 255 } else { 0 });
    if mse(&black, &half)? != 0.5 {
        bad.push("half-pixels case".into());
    }

    // Centred window of 25: a linear series is reproduced wherever the
    // window fits, and truncated ends average what exists.
    let ramp: Vec<f64> = (0..60).map(f64::from).collect();
    let ma = moving_average(&ramp, 25)?;
    let expect_ends = [(0, 6.0), (1, 6.5), (12, 12.0), (59, 53.0), (47, 47.0), (48, 47.5)];
    if ma[12..=47] != ramp[12..=47] || expect_ends.iter().any(|&(i, v)| ma[i] != v) {
        bad.push("moving average ramp".into());
    }
    let constant = moving_average(&[7.5; 30], 25)?;
    if constant.iter().any(|&v| v != 7.5) {
        bad.push("moving average constant".into());
    }
    let mut spike = vec![0.0; 50];
    spike[25] = 25.0;
    let ma = moving_average(&spike, 25)?;
    if ma[13..=37].iter().any(|&v| v != 1.0) || ma[12] != 0.0 || ma[38] != 0.0 {
        bad.push("moving average spike".into());
    }

    if moving_average(&[0.0, 1.0, 2.0, 3.0, 4.0], 3)? != [0.5, 1.0, 2.0, 3.0, 3.5] {
        bad.push("moving average window 3".into());
    }

    let pd = percent_difference(&[100.0, 200.0], &[108.0, 216.0])?;
    if pd.percent != 8.0 || pd.excluded != 0 {
        bad.push(format!("percent difference {}", pd.percent));
    }
    let pd = percent_difference(&[50.0, 100.0, 200.0, 0.0], &[54.0, 92.0, 216.0, 3.0])?;
    if pd.percent != 8.0 || pd.excluded != 1 {
        bad.push(format!("percent difference with a zero original {} (excluded {})", pd.percent, pd.excluded));
    }
    let detail = if bad.is_empty() {
        "symmetry, zero on identity, half-pixels = 0.5, window-25 moving averages and 8% percent difference exact".to_string()
    } else {
        format!("failed: {}", bad.join(", "))
    };
    Ok((bad.is_empty(), detail))
}

/// Sizes of a selftest run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SelftestScale {
    pub seed: u64,
    pub stack_slices: usize,
    pub otsu_cases: usize,
    pub edt_cases: usize,
    pub edt_max_side: usize,
    pub max_spheres: usize,
    pub placements: usize,
    pub networks: usize,
    pub spectra_cases: usize,
    pub tiling_cases: usize,
}

impl SelftestScale {
    /// Acceptance-suite sizes.
    pub fn full() -> Self {
        Self {
            seed: DEFAULT_SEED,
            stack_slices: FULL_STACK_SLICES,
            otsu_cases: 1000,
            edt_cases: 50,
            edt_max_side: 12,
            max_spheres: 10,
            placements: 20,
            networks: 100,
            spectra_cases: 50,
            tiling_cases: 100,
        }
    }

    /// Full sizes except a short corpus stack.
    pub fn quick() -> Self {
        Self { stack_slices: 8, ..Self::full() }
    }
}

/// Runs every check in order. `work` receives the corpus files.
pub fn run_selftest(scale: &SelftestScale, work: &Path) -> Vec<CheckResult> {
    let s = scale.seed;
    vec![
        check_cardinalities(s, scale.stack_slices, work),
        check_tiling_roundtrip(s, scale.tiling_cases),
        check_otsu(s, scale.otsu_cases),
        check_distance_transform(s, scale.edt_cases, scale.edt_max_side),
        check_sphere_packs(s, scale.max_spheres),
        check_connectivity(s, scale.placements),
        check_tortuosity(s, scale.networks),
        check_spectra(s, scale.spectra_cases),
        check_wav_golden(&wav_fixture_image(), GOLDEN_WAV),
        check_mse_properties(s),
    ]
}

/// One line per check followed by a totals line.
pub fn summary(results: &[CheckResult]) -> String {
    let mut out: String = results.iter().map(|r| format!("{r}\n")).collect();
    let passed = results.iter().filter(|r| r.passed).count();
    out.push_str(&format!("{passed}/{} checks passed\n", results.len()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walled_pairs_have_requested_wall() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for wall in [1, 3, 5] {
            for _ in 0..20 {
                let l = walled_pair(&mut rng, wall).unwrap();
                assert_eq!(l.count(), 2);
                assert_eq!(connect_pores(&l).len(), usize::from(wall == 1));
            }
        }
    }

    #[test]
    fn small_checks_pass_and_repeat() {
        let run = || {
            vec![
                check_tiling_roundtrip(3, 5),
                check_otsu(3, 50),
                check_distance_transform(3, 5, 6),
                check_connectivity(3, 5),
                check_mse_properties(3),
            ]
        };
        let (a, b) = (run(), run());
        assert_eq!(a, b);
        for r in &a {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn golden_mismatch_is_reported() {
        let img = GrayImage::filled(4, 4, 9);
        let mut golden = render_fixture_wav(&img).unwrap();
        assert!(check_wav_golden(&img, &golden).passed);
        golden[100] ^= 1;
        let r = check_wav_golden(&img, &golden);
        assert!(!r.passed);
        assert!(r.detail.contains("byte 100"), "{}", r.detail);
    }

    #[test]
    fn summary_counts() {
        let r = vec![CheckResult::new("a", true, "x"), CheckResult::new("b", false, "y")];
        assert_eq!(summary(&r), "PASS a: x\nFAIL b: y\n1/2 checks passed\n");
    }
}
