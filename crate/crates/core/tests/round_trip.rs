use std::path::Path;

use shapecode::codebook::{ShapeDatabase, TrainParams};
use shapecode::codec::{self, ContainerHeader, ShapeCodec, HEADER_BYTES};
use shapecode::image::{self, BinaryImage, DEFAULT_THRESHOLD};
use shapecode::simulate::{self, BirthDeathParams};
use shapecode::Error;

fn mnist_class(class: u8, split: &str, n: usize) -> Vec<BinaryImage> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist");
    let ds = image::load_idx(
        &dir.join(format!("{split}-images-idx3-ubyte.gz")),
        &dir.join(format!("{split}-labels-idx1-ubyte.gz")),
    )
    .unwrap();
    let mut imgs = ds.class(class, DEFAULT_THRESHOLD);
    imgs.truncate(n);
    imgs
}

#[test]
fn mnist_codebook_survives_serialization() {
    let train = mnist_class(3, "train", 300);
    let db = ShapeDatabase::train_coded(&train, TrainParams::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("three.scdb");
    std::fs::write(&path, db.to_bytes()).unwrap();
    let back = ShapeDatabase::from_bytes(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(back, db);
    assert_eq!(back.digest(), db.digest());

    let codec = ShapeCodec::new(&back).unwrap();
    for img in mnist_class(3, "t10k", 50) {
        let bytes = codec.encode(&img).unwrap();
        let header = ContainerHeader::parse(&bytes).unwrap();
        assert_eq!((header.height, header.width), (28, 28));
        assert_eq!(header.digest, db.digest());
        assert_eq!(codec::decode(&bytes, &db).unwrap(), img);
    }
}

#[test]
fn damaged_containers_are_rejected() {
    let params = BirthDeathParams::case(3).unwrap();
    let corpus = simulate::generate_corpus(&params, 6, 30, 30, 5).unwrap();
    let db = ShapeDatabase::train_coded(&corpus, TrainParams::up_to(3, 3, 2)).unwrap();
    let codec = ShapeCodec::new(&db).unwrap();
    let bytes = codec.encode(&corpus[0]).unwrap();

    let short = &bytes[..HEADER_BYTES + (bytes.len() - HEADER_BYTES) / 2];
    let err: Error = codec.decode(short).unwrap_err().into();
    assert!(matches!(err.category(), "truncated" | "corrupt-container"), "{err}");

    let mut retargeted = bytes.clone();
    retargeted[14] ^= 0xff;
    let err: Error = codec.decode(&retargeted).unwrap_err().into();
    assert_eq!(err.category(), "digest-mismatch");

    let mut codebook = db.to_bytes();
    let mid = codebook.len() / 2;
    codebook[mid] ^= 0x01;
    let err: Error = ShapeDatabase::from_bytes(&codebook).unwrap_err().into();
    assert_eq!(err.category(), "digest-mismatch");
}
