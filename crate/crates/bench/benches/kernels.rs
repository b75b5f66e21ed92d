use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use polykit::metrics::{f1_score, sentence_bleu};
use polykit::xeval::{bucketize, wilcoxon_signed_rank};
use polykit::{render, Sample, TaskKind, TemplateRegistry};

const WORDS: [&str; 12] =
    ["the", "river", "city", "wrote", "north", "king", "in", "of", "a", "museum", "opened", "year"];

fn sentence(rng: &mut StdRng, len: usize) -> String {
    (0..len).map(|_| WORDS[rng.gen_range(0..WORDS.len())]).collect::<Vec<_>>().join(" ")
}

fn bench_f1(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let pred = sentence(&mut rng, 12);
    let golds = [sentence(&mut rng, 10), sentence(&mut rng, 14)];
    c.bench_function("f1_score/en", |b| b.iter(|| f1_score(black_box(&pred), black_box(&golds), "en").unwrap()));
    let zh_pred = "北京大学位于海淀区";
    let zh_gold = ["北京大学在北京市海淀区"];
    c.bench_function("f1_score/zh", |b| b.iter(|| f1_score(black_box(zh_pred), black_box(&zh_gold), "zh").unwrap()));
}

fn bench_bleu(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let cand = sentence(&mut rng, 30);
    let reference = sentence(&mut rng, 30);
    c.bench_function("sentence_bleu/30", |b| b.iter(|| sentence_bleu(black_box(&cand), black_box(&reference), "en")));
}

fn bench_bucketize(c: &mut Criterion) {
    let mut group = c.benchmark_group("bucketize");
    for n in [100usize, 10_000] {
        let mut rng = StdRng::seed_from_u64(3);
        let values: Vec<(String, f64)> = (0..n).map(|i| (format!("s{i}"), rng.gen_range(0..50) as f64)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &values, |b, v| b.iter(|| bucketize(black_box(v)).unwrap()));
    }
    group.finish();
}

fn bench_wilcoxon(c: &mut Criterion) {
    let mut group = c.benchmark_group("wilcoxon");
    for n in [12usize, 20, 200] {
        let mut rng = StdRng::seed_from_u64(4);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..100.0)).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &(x, y), |b, (x, y)| {
            b.iter(|| wilcoxon_signed_rank(black_box(x), black_box(y)).unwrap())
        });
    }
    group.finish();
}

fn bench_render(c: &mut Criterion) {
    let registry = TemplateRegistry::builtin_english();
    let template = registry.get("xquad-en-v1").expect("builtin template");
    let mut rng = StdRng::seed_from_u64(5);
    let sample = Sample {
        id: "q1".into(),
        language: "en".into(),
        dataset: "XQuAD".into(),
        task: TaskKind::QaExtractive,
        fields: [("question".to_string(), sentence(&mut rng, 10)), ("context".to_string(), sentence(&mut rng, 200))]
            .into_iter()
            .collect(),
        golds: vec!["river".into()],
    };
    c.bench_function("render/xquad", |b| b.iter(|| render(black_box(template), black_box(&sample)).unwrap()));
}

criterion_group!(benches, bench_f1, bench_bleu, bench_bucketize, bench_wilcoxon, bench_render);
criterion_main!(benches);
