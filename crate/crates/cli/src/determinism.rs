//! Reruns every experiment on thread pools of different sizes and compares
//! the output directories byte for byte. The manifest is compared with its
//! wall-clock field removed.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use bildsim_core::acceptance::{title, CriterionOutcome};

use crate::output::MANIFEST;
use crate::{run_text, CliError, Command, RunOptions};

/// The bundled example configurations, one per experiment command.
pub const FIXTURES: [(Command, &str); 7] = [
    (Command::PcsftAverage, include_str!("../configs/pcsft-average.json")),
    (Command::PcsftCorrelation, include_str!("../configs/pcsft-correlation.json")),
    (Command::ChshQuantum, include_str!("../configs/chsh-quantum.json")),
    (Command::ChshHv, include_str!("../configs/chsh-hv.json")),
    (Command::BrownianCtm, include_str!("../configs/brownian-ctm.json")),
    (Command::BrownianOm, include_str!("../configs/brownian-om.json")),
    (Command::VelocityField, include_str!("../configs/velocity-field.json")),
];

/// Output files of one run keyed by name.
pub fn snapshot(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, CliError> {
    let io = |e: std::io::Error| CliError::config(format!("{}: {e}", dir.display()));
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).map_err(io)? {
        let entry = entry.map_err(io)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(entry.path()).map_err(io)?;
        if name == MANIFEST {
            let mut v: serde_json::Value =
                serde_json::from_slice(&bytes).map_err(|e| CliError::config(format!("manifest: {e}")))?;
            v.as_object_mut().map(|m| m.remove("wall_clock_seconds"));
            bytes = serde_json::to_vec(&v).expect("manifest serializes");
        }
        files.insert(name, bytes);
    }
    Ok(files)
}

/// Runs `command` on a dedicated pool of `threads` workers into `out`.
pub fn run_with_threads(command: &Command, text: &str, threads: usize, out: &Path) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let opts = RunOptions { seed: None, paper_units: false };
    pool.install(|| run_text(command, text, &opts, out)).map(|_| ())
}

fn compare_all(thread_counts: &[usize]) -> Result<(bool, String), CliError> {
    let root = tempfile::tempdir().map_err(|e| CliError::config(format!("temporary directory: {e}")))?;
    let mut mismatches = Vec::new();
    let mut n_files = 0;
    for (command, text) in FIXTURES.iter() {
        let mut reference: Option<BTreeMap<String, Vec<u8>>> = None;
        for &threads in thread_counts {
            // two runs per thread count: reruns as well as pool sizes must agree
            for rerun in 0..2 {
                let dir = root.path().join(format!("{}-{threads}-{rerun}", command.name()));
                run_with_threads(command, text, threads, &dir)?;
                let files = snapshot(&dir)?;
                match &reference {
                    None => {
                        n_files += files.len();
                        reference = Some(files);
                    }
                    Some(r) if *r != files => {
                        let differing: Vec<&String> =
                            r.keys().filter(|k| files.get(*k) != r.get(*k)).collect();
                        mismatches.push(format!("{} at {threads} threads: {differing:?}", command.name()));
                    }
                    Some(_) => {}
                }
            }
        }
    }
    let counts: Vec<String> = thread_counts.iter().map(|t| t.to_string()).collect();
    let detail = if mismatches.is_empty() {
        format!(
            "{} commands x threads {{{}}} x 2 reruns: {n_files} files byte-identical",
            FIXTURES.len(),
            counts.join(", ")
        )
    } else {
        format!("differences: {}", mismatches.join("; "))
    };
    Ok((mismatches.is_empty(), detail))
}

/// Criterion 12.
pub fn check(thread_counts: &[usize]) -> CriterionOutcome {
    let start = Instant::now();
    let (passed, detail) = compare_all(thread_counts).unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionOutcome {
        id: 12,
        title: title(12),
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
        budget_seconds: None,
    }
}
