use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{Dataset, DatasetError, Split};
use crate::model::{LabeledImage, RasterImage};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreprocessStats {
    pub duplicates: usize,
    pub monochrome: usize,
}

fn is_monochrome(img: &RasterImage) -> bool {
    img.pixels().all(|[r, g, b]| r == g && g == b)
}

/// Removes byte-identical duplicates (first occurrence wins) and, when
/// asked, images whose three channels agree at every pixel.
pub fn preprocess(dataset: Dataset, drop_monochrome: bool) -> (Dataset, PreprocessStats) {
    preprocess_with(dataset, true, drop_monochrome)
}

pub fn preprocess_with(
    dataset: Dataset,
    dedup: bool,
    drop_monochrome: bool,
) -> (Dataset, PreprocessStats) {
    let mut stats = PreprocessStats::default();
    let mut buckets: HashMap<[u8; 32], Vec<usize>> = HashMap::new();
    let mut kept: Vec<LabeledImage> = Vec::with_capacity(dataset.images.len());
    for img in dataset.images {
        if drop_monochrome && is_monochrome(&img.pixels) {
            stats.monochrome += 1;
            continue;
        }
        if dedup {
            let mut hasher = Sha256::new();
            hasher.update(img.pixels.width().to_le_bytes());
            hasher.update(img.pixels.height().to_le_bytes());
            hasher.update(img.pixels.data());
            let digest: [u8; 32] = hasher.finalize().into();
            let bucket = buckets.entry(digest).or_default();
            if bucket.iter().any(|&k| kept[k].pixels == img.pixels) {
                stats.duplicates += 1;
                continue;
            }
            bucket.push(kept.len());
        }
        kept.push(img);
    }
    let splits = dataset.splits.map(|mut s| {
        s.retain(|id, _| kept.iter().any(|img| &img.id == id));
        s
    });
    (
        Dataset {
            name: dataset.name,
            images: kept,
            splits,
        },
        stats,
    )
}

/// Seeded shuffle, then `floor(4n/6)` train, `floor(n/6)` val and the
/// remainder test.
pub fn split_441(mut dataset: Dataset, seed: u64) -> Result<Dataset, DatasetError> {
    let n = dataset.images.len();
    if n < 6 {
        return Err(DatasetError::TooSmall { count: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = 4 * n / 6;
    let val = n / 6;
    let assignments: BTreeMap<String, Split> = order
        .into_iter()
        .enumerate()
        .map(|(rank, idx)| {
            let split = if rank < train {
                Split::Train
            } else if rank < train + val {
                Split::Val
            } else {
                Split::Test
            };
            (dataset.images[idx].id.clone(), split)
        })
        .collect();
    dataset.splits = Some(assignments);
    Ok(dataset)
}
