use criterion::{black_box, criterion_group, criterion_main, Criterion, Throughput};

use isifree::{decode, encode};
use isifree_bench::{random_bits, reference_code};

fn bench_encode_decode(c: &mut Criterion) {
    let code = reference_code();
    let bits = random_bits(100_000, 99);
    let encoded = encode(&code, &bits).unwrap();

    let mut group = c.benchmark_group("codec_100k_bits");
    group.throughput(Throughput::Elements(bits.len() as u64));
    group.bench_function("encode", |b| {
        b.iter(|| encode(black_box(&code), black_box(&bits)).unwrap())
    });
    group.bench_function("decode", |b| {
        b.iter(|| decode(black_box(&code), black_box(&encoded.symbols), bits.len()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_encode_decode);
criterion_main!(benches);
