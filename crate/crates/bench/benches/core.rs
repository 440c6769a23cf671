use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use fuzzstat_core::estimate::{extrapolator, required_effort};
use fuzzstat_core::{
    bootstrap_ci, estimate_richness, AbundanceDistribution, AbundanceFrequencies,
    AdaptiveBiasConfig, BootstrapConfig, Campaign, FrequencySnapshot, RichnessChoice, SpeciesAccumulator, SpeciesId,
    Statistic, SyntheticAssemblage,
};

fn snapshot() -> FrequencySnapshot {
    AbundanceFrequencies::from_leading(63_600_000, 4944, [447, 70, 31, 18]).unwrap().into()
}

fn accumulator(c: &mut Criterion) {
    let ids: Vec<SpeciesId> = (0..100_000u64).map(|i| SpeciesId::from_raw(i * i % 7919)).collect();
    c.bench_function("accumulator/observe_one x100k", |b| {
        b.iter_batched(
            SpeciesAccumulator::multinomial,
            |mut acc| {
                for &id in &ids {
                    acc.observe_one(id);
                }
                acc
            },
            BatchSize::SmallInput,
        )
    });
    c.bench_function("accumulator/from_token", |b| b.iter(|| SpeciesId::from_token(black_box("src/parse.c:1043"))));
}

fn estimators(c: &mut Criterion) {
    let snap = snapshot();
    for choice in [RichnessChoice::Chao, RichnessChoice::IChao, RichnessChoice::Jackknife2] {
        c.bench_function(&format!("estimate/{choice}"), |b| {
            b.iter(|| estimate_richness(black_box(&snap), choice).unwrap())
        });
    }
    let richness = estimate_richness(&snap, RichnessChoice::Chao).unwrap();
    let x = extrapolator(&snap, &richness).unwrap();
    c.bench_function("extrapolate/richness_at", |b| b.iter(|| x.richness_at(black_box(5.0e7))));
    c.bench_function("effort/required_effort", |b| {
        b.iter(|| required_effort(black_box(&snap), &richness, 0.9).unwrap())
    });
}

fn bootstrap(c: &mut Criterion) {
    let snap = snapshot();
    let cfg = BootstrapConfig::new(200, 0.95, 1).unwrap();
    c.bench_function("bootstrap/chao1 x200", |b| {
        b.iter(|| bootstrap_ci(black_box(&snap), Statistic::Richness(RichnessChoice::Chao), &cfg).unwrap())
    });
}

fn simulator(c: &mut Criterion) {
    let zipf = SyntheticAssemblage::multinomial(10_000, AbundanceDistribution::Zipf { exponent: 1.2 }).unwrap();
    let incidence = SyntheticAssemblage::incidence(10_000, AbundanceDistribution::Geometric { ratio: 0.999 }, 0.05).unwrap();
    for (name, a) in [("multinomial", &zipf), ("incidence", &incidence)] {
        c.bench_function(&format!("simulate/{name} x10k inputs"), |b| {
            b.iter_batched(
                || Campaign::new(a, AdaptiveBiasConfig::disabled(), 7).unwrap(),
                |mut campaign| {
                    campaign.advance(10_000);
                    campaign
                },
                BatchSize::SmallInput,
            )
        });
    }
}

criterion_group!(benches, accumulator, estimators, bootstrap, simulator);
criterion_main!(benches);
