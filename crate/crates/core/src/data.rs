//! Datasets, IID partitioning across agents, synthetic classification data,
//! and CSV/IDX file loaders.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// A labeled classification dataset with row-major features.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<f64>,
    pub input_dim: usize,
    pub labels: Vec<usize>,
    pub num_classes: usize,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_row(&self, i: usize) -> &[f64] {
        &self.features[i * self.input_dim..(i + 1) * self.input_dim]
    }
}

/// Per-agent index lists into a dataset. Shards are pairwise disjoint and
/// equally sized; samples beyond `floor(len/n) * n` are dropped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub shards: Vec<Vec<usize>>,
}

impl Partition {
    pub fn shard(&self, agent: usize) -> &[usize] {
        &self.shards[agent]
    }

    pub fn shard_len(&self) -> usize {
        self.shards.first().map_or(0, Vec::len)
    }
}

/// Gaussian blobs with one unit-variance cluster per class, means placed on
/// the scaled simplex `separation * e_c`. Deterministic in `seed`; labels
/// cycle through the classes so counts are balanced up to a remainder.
pub fn generate_synthetic_classification(
    seed: u64,
    samples: usize,
    input_dim: usize,
    classes: usize,
    class_separation: f64,
) -> Result<Dataset> {
    if classes < 2 {
        return Err(Error::InvalidData(format!("need at least 2 classes, got {classes}")));
    }
    if samples < classes {
        return Err(Error::InvalidData(format!(
            "need at least one sample per class: {samples} samples for {classes} classes"
        )));
    }
    if input_dim == 0 {
        return Err(Error::InvalidData("input_dim must be positive".into()));
    }
    if classes > input_dim {
        return Err(Error::InvalidData(format!(
            "simplex placement needs classes <= input_dim, got {classes} > {input_dim}"
        )));
    }
    if !class_separation.is_finite() || class_separation < 0.0 {
        return Err(Error::InvalidData(format!(
            "class separation must be finite and nonnegative, got {class_separation}"
        )));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = StandardNormal;
    let mut features = Vec::with_capacity(samples * input_dim);
    let mut labels = Vec::with_capacity(samples);
    for i in 0..samples {
        let class = i % classes;
        for d in 0..input_dim {
            let mean = if d == class { class_separation } else { 0.0 };
            let noise: f64 = normal.sample(&mut rng);
            features.push(mean + noise);
        }
        labels.push(class);
    }
    Ok(Dataset { features, input_dim, labels, num_classes: classes })
}

/// IID split: one seeded global permutation, then contiguous equal shards of
/// `floor(len/n)` samples each. The remainder is dropped so every agent runs
/// the same number of iterations per epoch.
pub fn partition_iid(dataset: &Dataset, n: usize, seed: u64) -> Result<Partition> {
    if n == 0 {
        return Err(Error::InvalidData("need at least one agent".into()));
    }
    if dataset.len() < n {
        return Err(Error::InvalidData(format!(
            "cannot split {} samples across {n} agents",
            dataset.len()
        )));
    }
    let mut perm: Vec<usize> = (0..dataset.len()).collect();
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    perm.shuffle(&mut rng);
    let shard_len = dataset.len() / n;
    let shards = (0..n)
        .map(|a| perm[a * shard_len..(a + 1) * shard_len].to_vec())
        .collect();
    Ok(Partition { shards })
}

/// Input file formats understood by [`load_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    /// Comma-separated values, label in the last column.
    Csv { has_header: bool },
    /// IDX image file (big-endian magic 0x00000803); the label file is found
    /// by substituting `images` -> `labels` and `idx3` -> `idx1` in the path.
    Idx,
}

/// Loads a dataset from disk. IDX pixel bytes are scaled to [0,1]; CSV
/// features are taken as-is.
pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    match format {
        DataFormat::Csv { has_header } => load_csv(path, has_header),
        DataFormat::Idx => load_idx_pair(path),
    }
}

fn load_csv(path: &Path, has_header: bool) -> Result<Dataset> {
    let text = std::fs::read_to_string(path)?;
    let mut features = Vec::new();
    let mut labels = Vec::new();
    let mut input_dim = None;
    let skip = usize::from(has_header);
    for (lineno, line) in text.lines().enumerate().skip(skip) {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() < 2 {
            return Err(Error::Parse(format!(
                "{}:{}: expected at least one feature and a label, got {} field(s)",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let dim = fields.len() - 1;
        match input_dim {
            None => input_dim = Some(dim),
            Some(d) if d != dim => {
                return Err(Error::Parse(format!(
                    "{}:{}: row has {dim} features but earlier rows have {d}",
                    path.display(),
                    lineno + 1
                )));
            }
            _ => {}
        }
        for (col, field) in fields[..dim].iter().enumerate() {
            let value: f64 = field.parse().map_err(|_| {
                Error::Parse(format!(
                    "{}:{}: column {}: {field:?} is not a number",
                    path.display(),
                    lineno + 1,
                    col + 1
                ))
            })?;
            features.push(value);
        }
        let label: i64 = fields[dim].parse().map_err(|_| {
            Error::Parse(format!(
                "{}:{}: label {:?} is not an integer",
                path.display(),
                lineno + 1,
                fields[dim]
            ))
        })?;
        if label < 0 {
            return Err(Error::Parse(format!(
                "{}:{}: label {label} is negative",
                path.display(),
                lineno + 1
            )));
        }
        labels.push(label as usize);
    }
    let input_dim = input_dim
        .ok_or_else(|| Error::InvalidData(format!("{}: no data rows", path.display())))?;
    let num_classes = labels.iter().max().unwrap() + 1;
    Ok(Dataset { features, input_dim, labels, num_classes })
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn load_idx_pair(images_path: &Path) -> Result<Dataset> {
    let name = images_path.to_string_lossy();
    if !name.contains("images") {
        return Err(Error::InvalidData(format!(
            "{name}: idx loading expects the images file path containing \"images\", \
             with the labels file alongside it (images -> labels, idx3 -> idx1)"
        )));
    }
    let labels_path = name.replace("images", "labels").replace("idx3", "idx1");

    let (dims, pixels) = read_idx(images_path, IDX_IMAGES_MAGIC, 3)?;
    let (label_dims, raw_labels) = read_idx(Path::new(&labels_path), IDX_LABELS_MAGIC, 1)?;
    let samples = dims[0];
    if label_dims[0] != samples {
        return Err(Error::InvalidData(format!(
            "{name}: {samples} images but {} labels",
            label_dims[0]
        )));
    }
    let input_dim = dims[1] * dims[2];
    let features = pixels.iter().map(|&b| b as f64 / 255.0).collect();
    let labels: Vec<usize> = raw_labels.iter().map(|&b| b as usize).collect();
    let num_classes = labels.iter().max().copied().unwrap_or(0) + 1;
    Ok(Dataset { features, input_dim, labels, num_classes })
}

fn read_idx(path: &Path, want_magic: u32, want_dims: usize) -> Result<(Vec<usize>, Vec<u8>)> {
    let mut file = std::fs::File::open(path)?;
    let mut header = [0u8; 4];
    file.read_exact(&mut header)
        .map_err(|_| Error::Parse(format!("{}: too short for an idx magic", path.display())))?;
    let magic = u32::from_be_bytes(header);
    if magic != want_magic {
        return Err(Error::Parse(format!(
            "{}: magic 0x{magic:08x}, expected 0x{want_magic:08x}",
            path.display()
        )));
    }
    let mut dims = Vec::with_capacity(want_dims);
    for _ in 0..want_dims {
        let mut buf = [0u8; 4];
        file.read_exact(&mut buf)
            .map_err(|_| Error::Parse(format!("{}: truncated dimension header", path.display())))?;
        dims.push(u32::from_be_bytes(buf) as usize);
    }
    let expected: usize = dims.iter().product();
    let mut data = Vec::with_capacity(expected);
    file.read_to_end(&mut data)?;
    if data.len() != expected {
        return Err(Error::Parse(format!(
            "{}: expected {expected} data bytes, found {}",
            path.display(),
            data.len()
        )));
    }
    Ok((dims, data))
}
