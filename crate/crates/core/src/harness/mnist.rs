//! Reader for the IDX files used by the MNIST digit set.
//!
//! Layout (all integers big-endian): magic `u32`, item count `u32`, then
//! for images the row and column counts followed by one unsigned byte per
//! pixel; for labels one byte per item.

use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::objectives::Dataset;

pub const IMAGE_MAGIC: u32 = 2051;
pub const LABEL_MAGIC: u32 = 2049;

#[derive(Debug, thiserror::Error)]
pub enum MnistError {
    #[error("{file}: bad magic number {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        file: &'static str,
        found: u32,
        expected: u32,
    },
    #[error("io error reading {file}: {source}")]
    Io {
        file: &'static str,
        #[source]
        source: std::io::Error,
    },
    #[error("image file holds {images} items but label file holds {labels}")]
    CountMismatch { images: usize, labels: usize },
    #[error("class {0} does not occur in the label file")]
    ClassAbsent(u8),
    #[error("the two classes must differ (both are {0})")]
    SameClass(u8),
    #[error("requested {requested} samples but only {available} match the chosen classes")]
    NotEnoughSamples { requested: usize, available: usize },
}

pub type Result<T> = std::result::Result<T, MnistError>;

/// Decoded image file: `count` images of `rows × cols` bytes.
#[derive(Debug, Clone)]
pub struct IdxImages {
    pub rows: usize,
    pub cols: usize,
    pub pixels: Vec<u8>,
}

impl IdxImages {
    pub fn count(&self) -> usize {
        self.pixels.len() / (self.rows * self.cols).max(1)
    }

    pub fn image(&self, k: usize) -> &[u8] {
        let size = self.rows * self.cols;
        &self.pixels[k * size..(k + 1) * size]
    }
}

fn read_u32<R: Read>(r: &mut R, file: &'static str) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)
        .map_err(|source| MnistError::Io { file, source })?;
    Ok(u32::from_be_bytes(buf))
}

fn read_body<R: Read>(r: &mut R, len: usize, file: &'static str) -> Result<Vec<u8>> {
    let mut body = vec![0u8; len];
    r.read_exact(&mut body)
        .map_err(|source| MnistError::Io { file, source })?;
    Ok(body)
}

pub fn read_idx_images<R: Read>(mut r: R) -> Result<IdxImages> {
    const FILE: &str = "image file";
    let magic = read_u32(&mut r, FILE)?;
    if magic != IMAGE_MAGIC {
        return Err(MnistError::BadMagic {
            file: FILE,
            found: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let count = read_u32(&mut r, FILE)? as usize;
    let rows = read_u32(&mut r, FILE)? as usize;
    let cols = read_u32(&mut r, FILE)? as usize;
    let pixels = read_body(&mut r, count * rows * cols, FILE)?;
    Ok(IdxImages { rows, cols, pixels })
}

pub fn read_idx_labels<R: Read>(mut r: R) -> Result<Vec<u8>> {
    const FILE: &str = "label file";
    let magic = read_u32(&mut r, FILE)?;
    if magic != LABEL_MAGIC {
        return Err(MnistError::BadMagic {
            file: FILE,
            found: magic,
            expected: LABEL_MAGIC,
        });
    }
    let count = read_u32(&mut r, FILE)? as usize;
    read_body(&mut r, count, FILE)
}

/// Seeded two-class subsample: `count` images whose label is `class_a`
/// (mapped to +1) or `class_b` (mapped to −1), pixels scaled to `[0, 1]`.
pub fn select_two_classes(
    images: &IdxImages,
    labels: &[u8],
    class_a: u8,
    class_b: u8,
    count: usize,
    seed: u64,
) -> Result<Dataset> {
    if class_a == class_b {
        return Err(MnistError::SameClass(class_a));
    }
    if images.count() != labels.len() {
        return Err(MnistError::CountMismatch {
            images: images.count(),
            labels: labels.len(),
        });
    }
    for class in [class_a, class_b] {
        if !labels.contains(&class) {
            return Err(MnistError::ClassAbsent(class));
        }
    }
    let mut pool: Vec<usize> = (0..labels.len())
        .filter(|&k| labels[k] == class_a || labels[k] == class_b)
        .collect();
    if count > pool.len() {
        return Err(MnistError::NotEnoughSamples {
            requested: count,
            available: pool.len(),
        });
    }
    pool.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    pool.truncate(count);
    let features = pool
        .iter()
        .map(|&k| images.image(k).iter().map(|&p| p as f64 / 255.0).collect())
        .collect();
    let targets = pool
        .iter()
        .map(|&k| if labels[k] == class_a { 1.0 } else { -1.0 })
        .collect();
    Ok(Dataset::new(features, targets).expect("rows share the image size"))
}

/// Loads an image/label file pair and draws a two-class subsample.
pub fn load_mnist_idx(
    images: &Path,
    labels: &Path,
    class_a: u8,
    class_b: u8,
    count: usize,
    seed: u64,
) -> Result<Dataset> {
    let open = |path: &Path, file: &'static str| {
        std::fs::File::open(path)
            .map(std::io::BufReader::new)
            .map_err(|source| MnistError::Io { file, source })
    };
    let imgs = read_idx_images(open(images, "image file")?)?;
    let labs = read_idx_labels(open(labels, "label file")?)?;
    select_two_classes(&imgs, &labs, class_a, class_b, count, seed)
}

/// Encodes images in IDX form (used to build fixtures).
pub fn write_idx_images(rows: usize, cols: usize, pixels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + pixels.len());
    out.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    out.extend_from_slice(&((pixels.len() / (rows * cols)) as u32).to_be_bytes());
    out.extend_from_slice(&(rows as u32).to_be_bytes());
    out.extend_from_slice(&(cols as u32).to_be_bytes());
    out.extend_from_slice(pixels);
    out
}

/// Encodes labels in IDX form.
pub fn write_idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + labels.len());
    out.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    out.extend_from_slice(labels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        // 6 images of 2x2, labels 0 1 2 0 1 7
        let labels = [0u8, 1, 2, 0, 1, 7];
        let pixels: Vec<u8> = (0..6u8).flat_map(|k| [k * 40, 255, 0, k]).collect();
        (write_idx_images(2, 2, &pixels), write_idx_labels(&labels))
    }

    #[test]
    fn image_header_magic() {
        let (imgs, _) = fixture();
        assert_eq!(&imgs[..4], &[0x00, 0x00, 0x08, 0x03]);
        let parsed = read_idx_images(&imgs[..]).unwrap();
        assert_eq!((parsed.rows, parsed.cols, parsed.count()), (2, 2, 6));
    }

    #[test]
    fn bad_magic_is_a_format_error() {
        let (_, labels) = fixture();
        assert!(matches!(
            read_idx_images(&labels[..]),
            Err(MnistError::BadMagic { found: 2049, .. })
        ));
    }

    #[test]
    fn truncated_file_is_an_io_error() {
        let (imgs, _) = fixture();
        assert!(matches!(
            read_idx_images(&imgs[..imgs.len() - 1]),
            Err(MnistError::Io { .. })
        ));
        assert!(matches!(
            read_idx_labels(&[0u8, 0, 8][..]),
            Err(MnistError::Io { .. })
        ));
    }

    #[test]
    fn two_class_filter_and_scaling() {
        let (imgs, labels) = fixture();
        let imgs = read_idx_images(&imgs[..]).unwrap();
        let labels = read_idx_labels(&labels[..]).unwrap();
        let d = select_two_classes(&imgs, &labels, 0, 1, 4, 3).unwrap();
        assert_eq!(d.len(), 4);
        assert_eq!(d.dim(), 4);
        for (f, &l) in d.features().iter().zip(d.labels()) {
            assert!(f.iter().all(|p| (0.0..=1.0).contains(p)));
            assert_eq!(f[1], 1.0);
            // images 0 and 3 are class 0; first pixel is 0 or 120
            let k = (f[0] * 255.0 / 40.0).round() as u8;
            assert_eq!(l, if labels[k as usize] == 0 { 1.0 } else { -1.0 });
            assert!(labels[k as usize] == 0 || labels[k as usize] == 1);
        }
        assert!(matches!(
            select_two_classes(&imgs, &labels, 0, 5, 1, 0),
            Err(MnistError::ClassAbsent(5))
        ));
        assert!(matches!(
            select_two_classes(&imgs, &labels, 0, 1, 5, 0),
            Err(MnistError::NotEnoughSamples { .. })
        ));
    }

    #[test]
    fn subsample_is_seeded() {
        let (imgs, labels) = fixture();
        let imgs = read_idx_images(&imgs[..]).unwrap();
        let labels = read_idx_labels(&labels[..]).unwrap();
        let a = select_two_classes(&imgs, &labels, 0, 1, 3, 11).unwrap();
        let b = select_two_classes(&imgs, &labels, 0, 1, 3, 11).unwrap();
        assert_eq!(a, b);
    }
}
