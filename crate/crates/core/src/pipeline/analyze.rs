use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::{corpus_images, load_by_slice, DEFAULT_PATTERN, DEFAULT_VOXEL_SIZE_UM};
use crate::error::Result;
use crate::fsutil::ensure_dir;
use crate::imageio::ingest_stack;
use crate::metrics::{
    coordination_numbers, porosity, tortuosity_distribution, Axis, PoreNetwork, TortuosityResult, DEFAULT_GRID_SPACING,
};
use crate::segmentation::{dump_binary, dump_labels, segment_pores, OtsuThreshold};
use crate::stats::{analyze_image_2d, format_sig, write_analysis_2d, write_csv, write_distribution, ImageAnalysis};

/// Per-image 2D statistics of a corpus (tile corpora are reassembled per
/// slice first), written as CSVs into `out_dir`.
pub fn analyze_2d(corpus: &Path, pattern: &str, pixel_size: f64, out_dir: &Path) -> Result<Vec<ImageAnalysis>> {
    let images = load_by_slice(&corpus_images(corpus, pattern)?)?;
    let analyses = images
        .par_iter()
        .map(|(key, img)| analyze_image_2d(key, img, pixel_size))
        .collect::<Result<Vec<_>>>()?;
    write_analysis_2d(&analyses, out_dir)?;
    Ok(analyses)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Analyze3dConfig {
    pub input: PathBuf,
    pub pattern: String,
    pub voxel_size_um: f64,
    pub axis: Axis,
    pub grid_spacing: usize,
    pub output: PathBuf,
    /// Also write the pore mask and labels as slice images.
    pub dump: bool,
}

impl Analyze3dConfig {
    pub fn new(input: impl Into<PathBuf>, output: impl Into<PathBuf>) -> Self {
        Self {
            input: input.into(),
            pattern: DEFAULT_PATTERN.to_string(),
            voxel_size_um: DEFAULT_VOXEL_SIZE_UM,
            axis: Axis::Z,
            grid_spacing: DEFAULT_GRID_SPACING,
            output: output.into(),
            dump: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StackAnalysis {
    pub threshold: OtsuThreshold,
    pub porosity: f64,
    pub network: PoreNetwork,
    pub coordination: Vec<usize>,
    pub tortuosity: TortuosityResult,
}

/// Width of a tortuosity distribution bin.
const TAU_BIN: f64 = 0.05;
const SIZE_BINS: usize = 20;

/// Segments a slice stack and writes its pore network statistics:
///
/// * `pores.csv`: `id,voxel_count,centroid_x,centroid_y,centroid_z,equivalent_diameter_um,coordination`
/// * `edges.csv`: `a,b,length_um`
/// * `tortuosity.csv`: `tau`
/// * `pore_size_distribution.csv`, `coordination_distribution.csv`,
///   `tortuosity_distribution.csv`: `bin_start,bin_end,count,frequency`
/// * `summary.csv`: `statistic,value`
pub fn analyze_3d(cfg: &Analyze3dConfig) -> Result<StackAnalysis> {
    let volume = ingest_stack(&cfg.input, &cfg.pattern, cfg.voxel_size_um)?;
    let seg = segment_pores(&volume)?;
    let porosity = porosity(&seg.binary)?;
    if seg.labels.is_empty() {
        log::warn!("no pore voxels after segmentation");
    }
    let network = PoreNetwork::from_labels(&seg.labels, cfg.voxel_size_um)?;
    let coordination = coordination_numbers(&network);
    let tortuosity = if network.pores().is_empty() {
        TortuosityResult::default()
    } else {
        tortuosity_distribution(&network, cfg.axis, cfg.grid_spacing)?
    };
    let out = &cfg.output;
    ensure_dir(out)?;
    if cfg.dump {
        dump_binary(&seg.binary, &out.join("binary"))?;
        dump_labels(&seg.labels, &out.join("labels"))?;
    }

    write_csv(
        &out.join("pores.csv"),
        &["id", "voxel_count", "centroid_x", "centroid_y", "centroid_z", "equivalent_diameter_um", "coordination"],
        network.pores().iter().zip(&coordination).map(|(p, c)| {
            vec![
                p.id.to_string(),
                p.voxel_count.to_string(),
                format_sig(p.centroid[0]),
                format_sig(p.centroid[1]),
                format_sig(p.centroid[2]),
                format_sig(p.equivalent_diameter_um),
                c.to_string(),
            ]
        }),
    )?;
    write_csv(
        &out.join("edges.csv"),
        &["a", "b", "length_um"],
        network.edges().iter().map(|e| vec![e.a.to_string(), e.b.to_string(), format_sig(e.length_um)]),
    )?;
    write_csv(&out.join("tortuosity.csv"), &["tau"], tortuosity.tau_values.iter().map(|t| vec![format_sig(*t)]))?;

    let diameters: Vec<f64> = network.pores().iter().map(|p| p.equivalent_diameter_um).collect();
    let d_max = diameters.iter().copied().fold(0.0, f64::max);
    write_distribution(
        &out.join("pore_size_distribution.csv"),
        &diameters,
        SIZE_BINS,
        0.0,
        if d_max > 0.0 { d_max } else { 1.0 },
    )?;
    let coord: Vec<f64> = coordination.iter().map(|&c| c as f64).collect();
    let c_max = coordination.iter().copied().max().unwrap_or(0);
    write_distribution(&out.join("coordination_distribution.csv"), &coord, c_max + 1, -0.5, c_max as f64 + 0.5)?;
    let t_max = tortuosity.tau_values.iter().copied().fold(1.0, f64::max);
    let t_bins = (((t_max - 1.0) / TAU_BIN).ceil() as usize).max(1);
    write_distribution(
        &out.join("tortuosity_distribution.csv"),
        &tortuosity.tau_values,
        t_bins,
        1.0,
        1.0 + t_bins as f64 * TAU_BIN,
    )?;

    let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
    let rows = vec![
        ("threshold", seg.threshold.level.to_string()),
        ("threshold_degenerate", seg.threshold.degenerate.to_string()),
        ("porosity", format_sig(porosity)),
        ("pore_count", network.pores().len().to_string()),
        ("edge_count", network.edges().len().to_string()),
        ("mean_equivalent_diameter_um", format_sig(mean(&diameters))),
        ("mean_coordination", format_sig(mean(&coord))),
        ("tortuosity_pairs", tortuosity.tau_values.len().to_string()),
        ("mean_tortuosity", format_sig(mean(&tortuosity.tau_values))),
        ("unreachable_pairs", tortuosity.unreachable_pairs.to_string()),
        ("degenerate_pairs", tortuosity.degenerate_pairs.to_string()),
    ];
    write_csv(
        &out.join("summary.csv"),
        &["statistic", "value"],
        rows.into_iter().map(|(k, v)| vec![k.to_string(), v]),
    )?;
    log::info!(
        "{} pores, {} connections, {} tortuosity pairs",
        network.pores().len(),
        network.edges().len(),
        tortuosity.tau_values.len()
    );
    Ok(StackAnalysis { threshold: seg.threshold, porosity, network, coordination, tortuosity })
}
