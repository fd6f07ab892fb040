//! On-disk layout of a dataset directory:
//!
//! - `manifest.json`: the [`DatasetManifest`]
//! - `observations.f32`: little-endian f32, per record 224·224 density values then
//!   224·224 phase values, record `i` at byte offset `i·2·224·224·4`
//! - `labels.f64`: little-endian f64, per record `(n2, i_sat, alpha)` in physical units

use std::fs::{self, File};
use std::io::{BufWriter, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use super::manifest::DatasetManifest;
use super::ranges::Triplet;
use crate::error::{Error, Result};
use crate::imaging::{Observation, IMAGE_PIXELS};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const OBSERVATIONS_FILE: &str = "observations.f32";
pub const LABELS_FILE: &str = "labels.f64";

pub const OBSERVATION_RECORD_BYTES: usize = 2 * IMAGE_PIXELS * 4;
pub const LABEL_RECORD_BYTES: usize = 3 * 8;

pub fn encode_observation(obs: &Observation, out: &mut Vec<u8>) {
    out.reserve(OBSERVATION_RECORD_BYTES);
    for v in obs.density.iter().chain(&obs.phase) {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn decode_observation(bytes: &[u8]) -> Result<Observation> {
    if bytes.len() != OBSERVATION_RECORD_BYTES {
        return Err(Error::Format(format!(
            "observation record has {} bytes, expected {OBSERVATION_RECORD_BYTES}",
            bytes.len()
        )));
    }
    let mut values = bytes
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]));
    let density: Vec<f32> = values.by_ref().take(IMAGE_PIXELS).collect();
    let phase: Vec<f32> = values.collect();
    Observation::new(density, phase)
}

pub fn encode_labels(labels: &Triplet, out: &mut Vec<u8>) {
    for v in labels {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn decode_labels(bytes: &[u8]) -> Triplet {
    std::array::from_fn(|k| {
        let mut b = [0u8; 8];
        b.copy_from_slice(&bytes[k * 8..(k + 1) * 8]);
        f64::from_le_bytes(b)
    })
}

/// Writes `contents` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let result = (|| {
        let mut f = File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    Ok(result?)
}

pub fn write_manifest(dir: &Path, manifest: &DatasetManifest) -> Result<()> {
    write_atomic(&dir.join(MANIFEST_FILE), manifest.to_json()?.as_bytes())
}

/// Sequential record writer. Data go to `*.partial` files that are renamed
/// into place by [`RecordWriter::finish`]; dropping an unfinished writer
/// removes them.
pub struct RecordWriter {
    dir: PathBuf,
    observations: Option<BufWriter<File>>,
    labels: Option<BufWriter<File>>,
    buf: Vec<u8>,
    count: usize,
}

fn partial(dir: &Path, name: &str) -> PathBuf {
    dir.join(format!("{name}.partial"))
}

impl RecordWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let observations = BufWriter::new(File::create(partial(dir, OBSERVATIONS_FILE))?);
        let labels = BufWriter::new(File::create(partial(dir, LABELS_FILE))?);
        Ok(Self {
            dir: dir.to_path_buf(),
            observations: Some(observations),
            labels: Some(labels),
            buf: Vec::with_capacity(OBSERVATION_RECORD_BYTES),
            count: 0,
        })
    }

    pub fn push(&mut self, obs: &Observation, labels: &Triplet) -> Result<()> {
        let (Some(o), Some(l)) = (self.observations.as_mut(), self.labels.as_mut()) else {
            return Err(Error::Format("writer already finished".into()));
        };
        self.buf.clear();
        encode_observation(obs, &mut self.buf);
        o.write_all(&self.buf)?;
        self.buf.clear();
        encode_labels(labels, &mut self.buf);
        l.write_all(&self.buf)?;
        self.count += 1;
        Ok(())
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Flushes and moves the data files into place.
    pub fn finish(mut self) -> Result<()> {
        for (name, w) in [
            (OBSERVATIONS_FILE, self.observations.take()),
            (LABELS_FILE, self.labels.take()),
        ] {
            if let Some(w) = w {
                let f = w.into_inner().map_err(|e| e.into_error())?;
                f.sync_all()?;
                fs::rename(partial(&self.dir, name), self.dir.join(name))?;
            }
        }
        Ok(())
    }
}

impl Drop for RecordWriter {
    fn drop(&mut self) {
        if self.observations.is_some() || self.labels.is_some() {
            self.observations.take();
            self.labels.take();
            let _ = fs::remove_file(partial(&self.dir, OBSERVATIONS_FILE));
            let _ = fs::remove_file(partial(&self.dir, LABELS_FILE));
        }
    }
}

/// Read access to a generated dataset directory.
#[derive(Debug)]
pub struct Dataset {
    dir: PathBuf,
    manifest: DatasetManifest,
    labels: Vec<Triplet>,
}

impl Dataset {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest = DatasetManifest::load(&dir.join(MANIFEST_FILE))?;
        let n = manifest.sample_count;
        let obs_len = fs::metadata(dir.join(OBSERVATIONS_FILE))?.len();
        if obs_len != (n * OBSERVATION_RECORD_BYTES) as u64 {
            return Err(Error::Format(format!(
                "{OBSERVATIONS_FILE} has {obs_len} bytes, expected {} for {n} records",
                n * OBSERVATION_RECORD_BYTES
            )));
        }
        let mut raw = Vec::new();
        File::open(dir.join(LABELS_FILE))?.read_to_end(&mut raw)?;
        if raw.len() != n * LABEL_RECORD_BYTES {
            return Err(Error::Format(format!(
                "{LABELS_FILE} has {} bytes, expected {}",
                raw.len(),
                n * LABEL_RECORD_BYTES
            )));
        }
        let labels = raw.chunks_exact(LABEL_RECORD_BYTES).map(decode_labels).collect();
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
            labels,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn manifest(&self) -> &DatasetManifest {
        &self.manifest
    }

    pub fn len(&self) -> usize {
        self.manifest.sample_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check_index(&self, index: usize) -> Result<()> {
        if index >= self.len() {
            return Err(Error::invalid(
                "index",
                format!("{index} is out of range for {} samples", self.len()),
            ));
        }
        Ok(())
    }

    pub fn labels(&self, index: usize) -> Result<Triplet> {
        self.check_index(index)?;
        Ok(self.labels[index])
    }

    pub fn all_labels(&self) -> &[Triplet] {
        &self.labels
    }

    pub fn normalized_labels(&self, index: usize) -> Result<Triplet> {
        self.manifest.ranges.normalize(&self.labels(index)?)
    }

    pub fn observation(&self, index: usize) -> Result<Observation> {
        self.check_index(index)?;
        let mut f = File::open(self.dir.join(OBSERVATIONS_FILE))?;
        f.seek(SeekFrom::Start((index * OBSERVATION_RECORD_BYTES) as u64))?;
        let mut buf = vec![0u8; OBSERVATION_RECORD_BYTES];
        f.read_exact(&mut buf)?;
        decode_observation(&buf)
    }

    pub fn sample(&self, index: usize) -> Result<super::Sample> {
        let labels_physical = self.labels(index)?;
        Ok(super::Sample {
            index,
            observation: self.observation(index)?,
            labels_normalized: self.manifest.ranges.normalize(&labels_physical)?,
            labels_physical,
        })
    }
}
