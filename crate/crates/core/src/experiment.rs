//! Runs a resolved [`ExperimentSpec`] and writes its CSV tables plus a
//! manifest from which the whole run can be reproduced.
//!
//! Output files (all UTF-8, LF line endings, header row first):
//!
//! | file                 | columns                                              |
//! |----------------------|------------------------------------------------------|
//! | `nmse_vs_snr.csv`    | `snr_db,scheme,nmse_channel,nmse_aoa`                |
//! | `aoa_trajectory.csv` | `block,true_phi_rad,<one column per scheme>`         |
//! | `se_vs_snr.csv`      | `snr_db,scheme,mean_se_bits`                         |
//! | `manifest.txt`       | resolved configuration (valid config file)           |
//!
//! The perfect-CSI reference only appears in the SE table; its estimates
//! equal the truth, so it has no NMSE or trajectory of its own.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ExperimentKind, ExperimentSpec};
use crate::error::{Result, TrackError};
use crate::sim::{MetricsTable, Scheme, SimConfig, Simulator};

pub const MANIFEST_FILE: &str = "manifest.txt";

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> TrackError + '_ {
    move |source| TrackError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn sim_for(spec: &ExperimentSpec, scheme: Scheme) -> SimConfig {
    SimConfig {
        scheme,
        ..spec.sim.clone()
    }
}

pub fn nmse_csv(tables: &[MetricsTable]) -> String {
    let mut out = String::from("snr_db,scheme,nmse_channel,nmse_aoa\n");
    for table in tables {
        for row in &table.rows {
            writeln!(out, "{},{},{},{}", row.snr_db, table.scheme, row.nmse_channel, row.nmse_aoa).unwrap();
        }
    }
    out
}

pub fn se_csv(tables: &[MetricsTable]) -> String {
    let mut out = String::from("snr_db,scheme,mean_se_bits\n");
    for table in tables {
        for row in &table.rows {
            writeln!(out, "{},{},{}", row.snr_db, table.scheme, row.mean_se).unwrap();
        }
    }
    out
}

/// `true_phi` is shared by all schemes; `tracks` holds one estimated AoA
/// column per scheme.
pub fn trajectory_csv(true_phi: &[f64], tracks: &[(Scheme, Vec<f64>)]) -> String {
    let mut out = String::from("block,true_phi_rad");
    for (scheme, _) in tracks {
        write!(out, ",{scheme}").unwrap();
    }
    out.push('\n');
    for (t, phi) in true_phi.iter().enumerate() {
        write!(out, "{},{}", t + 1, phi).unwrap();
        for (_, track) in tracks {
            write!(out, ",{}", track[t]).unwrap();
        }
        out.push('\n');
    }
    out
}

pub fn manifest(spec: &ExperimentSpec) -> String {
    format!(
        "# its-track run manifest\n# master seed: {}\n# reproduce with: track run {MANIFEST_FILE}\n\n{}",
        spec.sim.seed,
        spec.to_toml()
    )
}

/// Renders every requested table in memory.
pub fn render_outputs(spec: &ExperimentSpec) -> Result<BTreeMap<&'static str, String>> {
    spec.validate()?;
    let wants = |k: ExperimentKind| spec.experiments.contains(&k);
    let estimating: Vec<Scheme> = spec.schemes.iter().copied().filter(|s| *s != Scheme::PerfectCsi).collect();

    let mut files = BTreeMap::new();
    if wants(ExperimentKind::NmseVsSnr) || wants(ExperimentKind::SeVsSnr) {
        let mut tables = BTreeMap::new();
        for &scheme in &spec.schemes {
            if scheme == Scheme::PerfectCsi && !wants(ExperimentKind::SeVsSnr) {
                continue;
            }
            tables.insert(scheme, Simulator::new(sim_for(spec, scheme))?.run_monte_carlo()?);
        }
        let in_order = |keep: &dyn Fn(Scheme) -> bool| -> Vec<MetricsTable> {
            spec.schemes.iter().filter(|s| keep(**s)).filter_map(|s| tables.get(s).cloned()).collect()
        };
        if wants(ExperimentKind::NmseVsSnr) {
            files.insert(
                ExperimentKind::NmseVsSnr.file_name(),
                nmse_csv(&in_order(&|s| s != Scheme::PerfectCsi)),
            );
        }
        if wants(ExperimentKind::SeVsSnr) {
            files.insert(ExperimentKind::SeVsSnr.file_name(), se_csv(&in_order(&|_| true)));
        }
    }
    if wants(ExperimentKind::AoaTrajectory) {
        let mut true_phi = Vec::new();
        let mut tracks = Vec::new();
        // the true track is identical across schemes; run perfect CSI when it
        // is the only scheme so the file still carries the truth
        let runs = if estimating.is_empty() { vec![Scheme::PerfectCsi] } else { estimating.clone() };
        for &scheme in &runs {
            let result = Simulator::new(sim_for(spec, scheme))?.run_trial(spec.trajectory_snr_db, spec.trajectory_trial)?;
            true_phi = result.blocks.iter().map(|b| b.truth.phi).collect();
            if scheme != Scheme::PerfectCsi {
                tracks.push((scheme, result.blocks.iter().map(|b| b.estimate.phi).collect()));
            }
        }
        files.insert(ExperimentKind::AoaTrajectory.file_name(), trajectory_csv(&true_phi, &tracks));
    }
    files.insert(MANIFEST_FILE, manifest(spec));
    Ok(files)
}

/// Runs the experiment and writes its files into `spec.output_dir`.
///
/// Returns the written paths. On a write failure every file written so far
/// by this call is removed again.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<PathBuf>> {
    let files = render_outputs(spec)?;
    let dir = &spec.output_dir;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    for (name, contents) in &files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in written.iter().chain(std::iter::once(&path)) {
                let _ = fs::remove_file(p);
            }
            return Err(io_err(&path)(e));
        }
        written.push(path);
    }
    Ok(written)
}
