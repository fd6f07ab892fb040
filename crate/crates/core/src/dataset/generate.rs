use std::path::Path;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::manifest::DatasetManifest;
use super::store::{write_manifest, RecordWriter};
use super::Sample;
use crate::error::{Error, Result};
use crate::imaging::add_noise;
use crate::rng::sample_stream;
use crate::scenario::Simulator;

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationSummary {
    pub sample_count: usize,
    pub density_max: f64,
    pub elapsed: Duration,
}

/// Simulates sample `index` of the manifest grid, noise included.
pub fn simulate_sample(
    manifest: &DatasetManifest,
    simulator: &mut Simulator,
    index: usize,
) -> Result<Sample> {
    let labels_physical = manifest.ranges.triplet(index);
    let clean = simulator.observe(&labels_physical)?;
    let mut stream = sample_stream(manifest.master_seed, index as u64);
    let observation = add_noise(&clean, &manifest.noise, &mut stream)?;
    Ok(Sample {
        index,
        observation,
        labels_normalized: manifest.ranges.normalize(&labels_physical)?,
        labels_physical,
    })
}

/// Generates every sample of `manifest` into `out`, using up to `threads`
/// worker threads (0 lets rayon decide).
///
/// Records are written in enumeration order. The manifest is written last,
/// so a failed run never leaves a manifest next to incomplete data.
pub fn generate(manifest: &DatasetManifest, out: &Path, threads: usize) -> Result<GenerationSummary> {
    generate_with_progress(manifest, out, threads, |_| {})
}

pub fn generate_with_progress(
    manifest: &DatasetManifest,
    out: &Path,
    threads: usize,
    mut progress: impl FnMut(usize),
) -> Result<GenerationSummary> {
    let start = Instant::now();
    let mut manifest = manifest.clone();
    if manifest.sample_count == 0 {
        manifest.sample_count = manifest.ranges.len();
    }
    manifest.density_max = None;
    manifest.validate()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::invalid("threads", e.to_string()))?;
    let workers = pool.current_num_threads().max(1);
    let chunk = 2 * workers;
    let scenario = manifest.scenario();

    let mut writer = RecordWriter::create(out)?;
    let mut density_max = 0.0f64;
    let n = manifest.sample_count;
    for first in (0..n).step_by(chunk) {
        let indices: Vec<usize> = (first..(first + chunk).min(n)).collect();
        let samples: Vec<Result<Sample>> = pool.install(|| {
            indices
                .par_iter()
                .map_init(
                    || Simulator::new(scenario),
                    |sim, &i| {
                        let sim = sim.as_mut().map_err(|e| Error::invalid("scenario", e.to_string()))?;
                        simulate_sample(&manifest, sim, i).map_err(|e| Error::Sample {
                            index: i,
                            source: Box::new(e),
                        })
                    },
                )
                .collect()
        });
        for sample in samples {
            let sample = sample?;
            density_max = density_max.max(sample.observation.peak_density() as f64);
            writer.push(&sample.observation, &sample.labels_physical)?;
        }
        progress(writer.count());
    }
    writer.finish()?;
    manifest.density_max = Some(density_max);
    write_manifest(out, &manifest)?;
    Ok(GenerationSummary {
        sample_count: n,
        density_max,
        elapsed: start.elapsed(),
    })
}
