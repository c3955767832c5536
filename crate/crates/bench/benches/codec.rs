use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion, Throughput};
use shapecode::codebook::{ShapeDatabase, TrainParams};
use shapecode::codec::ShapeCodec;
use shapecode::entropy;
use shapecode::simulate::{self, BirthDeathParams};

fn corpus(count: usize, side: usize, seed: u64) -> Vec<shapecode::image::BinaryImage> {
    let params = BirthDeathParams::case(2).unwrap();
    simulate::generate_corpus(&params, count, side, side, seed).unwrap()
}

fn train(c: &mut Criterion) {
    let images = corpus(50, 100, 1);
    let mut group = c.benchmark_group("train");
    group.sample_size(10);
    group.throughput(Throughput::Elements((50 * 100 * 100) as u64));
    for n in [2, 4] {
        group.bench_function(format!("up_to_{n}x{n}"), |b| {
            b.iter(|| ShapeDatabase::train_coded(black_box(&images), TrainParams::up_to(n, n, 4)).unwrap())
        });
    }
    group.finish();
}

fn encode_decode(c: &mut Criterion) {
    let db = ShapeDatabase::train_coded(&corpus(50, 100, 2), TrainParams::up_to(4, 4, 4)).unwrap();
    let codec = ShapeCodec::new(&db).unwrap();
    let image = corpus(1, 316, 3).pop().unwrap();
    let packed = codec.encode(&image).unwrap();

    let mut group = c.benchmark_group("codec");
    group.throughput(Throughput::Elements(image.len() as u64));
    group.bench_function("encode", |b| b.iter(|| codec.encode(black_box(&image)).unwrap()));
    group.bench_function("decode", |b| {
        b.iter_batched(|| packed.clone(), |bytes| codec.decode(&bytes).unwrap(), BatchSize::SmallInput)
    });
    group.finish();
}

fn entropy_estimate(c: &mut Criterion) {
    let image = corpus(1, 1000, 4).pop().unwrap();
    let seq = image.raster_sequence();
    let mut group = c.benchmark_group("entropy");
    group.throughput(Throughput::Elements(seq.len() as u64));
    for k in [1, 4, 8] {
        group.bench_function(format!("order_{k}"), |b| {
            b.iter(|| entropy::estimate_entropy_rate(black_box(seq), k).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, train, encode_decode, entropy_estimate);
criterion_main!(benches);
