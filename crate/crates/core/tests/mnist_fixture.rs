//! The bundled MNIST files against reference figures computed with numpy
//! from the same gzip files.

use std::path::Path;

use shapecode::image::{self, DEFAULT_THRESHOLD};

struct Reference {
    images: &'static str,
    labels: &'static str,
    counts: [usize; 10],
    gray_sum: u64,
    ones_per_class: [usize; 10],
    first_ones: usize,
}

const TRAIN: Reference = Reference {
    images: "train-images-idx3-ubyte.gz",
    labels: "train-labels-idx1-ubyte.gz",
    counts: [800, 901, 792, 825, 784, 690, 811, 856, 755, 782],
    gray_sum: 209_225_317,
    ones_per_class: [111332, 55665, 92490, 93431, 74412, 68505, 88041, 78697, 90525, 76763],
    first_ones: 125,
};

const TEST: Reference = Reference {
    images: "t10k-images-idx3-ubyte.gz",
    labels: "t10k-labels-idx1-ubyte.gz",
    counts: [201, 226, 199, 207, 196, 173, 203, 214, 189, 196],
    gray_sum: 52_921_283,
    ones_per_class: [28853, 14322, 23649, 23318, 20119, 16622, 21780, 19470, 21501, 20234],
    first_ones: 84,
};

fn check(r: &Reference) {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let ds = image::load_idx(&dir.join(r.images), &dir.join(r.labels)).unwrap();
    assert_eq!(ds.len(), r.counts.iter().sum::<usize>());
    assert!(ds.images.iter().all(|g| (g.height, g.width) == (28, 28)));
    let gray: u64 = ds.images.iter().flat_map(|g| g.levels.iter()).map(|&v| v as u64).sum();
    assert_eq!(gray, r.gray_sum);
    for class in 0..10u8 {
        let imgs = ds.class(class, DEFAULT_THRESHOLD);
        assert_eq!(imgs.len(), r.counts[class as usize], "class {class}");
        let ones: usize = imgs.iter().map(|i| i.ones()).sum();
        assert_eq!(ones, r.ones_per_class[class as usize], "class {class}");
    }
    assert_eq!(ds.labels[0], 0);
    assert_eq!(ds.images[0].binarize(DEFAULT_THRESHOLD).ones(), r.first_ones);
    assert_eq!(ds.source_hash.len(), 64);
}

#[test]
fn training_split_matches_reference() {
    check(&TRAIN);
}

#[test]
fn test_split_matches_reference() {
    check(&TEST);
}
