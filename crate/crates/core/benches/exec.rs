use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kamscope::class::{classify_at, ClassConfig};
use kamscope::fourier::FourierPotential;
use kamscope::random::{p1_failure_probability, MeasureKind, MeasureSpec};
use kamscope::resonance::{zone_measures, ActionRegion, ZoneConfig, ZoneDecomposition};
use kamscope::survey::{nontorus_fraction, SurveySettings};
use kamscope::Exec;
use num_complex::Complex64;

const STRATEGIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn p1_monte_carlo(c: &mut Criterion) {
    let spec = MeasureSpec::new(MeasureKind::MuS, 2, 1.0, 1).unwrap();
    let mut g = c.benchmark_group("p1_failure_2000_draws");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| p1_failure_probability(black_box(0.1), &spec, 2000, exec).unwrap()));
    }
    g.finish();
}

fn zones(c: &mut Criterion) {
    let cfg = ZoneConfig { mode_exponent: 1.0, width_exponent: Some(0.0), ..ZoneConfig::default() };
    let z = ZoneDecomposition::new(1e-3, 2, &cfg).unwrap();
    let region = ActionRegion::cube(2, 0.6, 1.4).unwrap();
    let mut g = c.benchmark_group("zone_measures_200k");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| zone_measures(&z, &region, 200_000, black_box(3), exec).unwrap()));
    }
    g.finish();
}

fn survey(c: &mut Criterion) {
    let f = FourierPotential::new(2, 1.0)
        .unwrap()
        .with_mode(vec![1, 0], Complex64::new(0.15, 0.0))
        .unwrap()
        .with_mode(vec![0, 1], Complex64::new(0.0, 0.11))
        .unwrap()
        .with_mode(vec![1, -1], Complex64::new(0.06, 0.0))
        .unwrap();
    let report = classify_at(&f, 0.1, &ClassConfig::default()).unwrap();
    let region = ActionRegion::cube(2, 0.6, 1.4).unwrap();
    let settings = SurveySettings::default();
    let mut g = c.benchmark_group("survey_500_orbits");
    g.sample_size(10);
    for (name, exec) in STRATEGIES {
        g.bench_function(name, |b| b.iter(|| nontorus_fraction(&f, &report, 0.02, &region, 500, black_box(1), &settings, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, p1_monte_carlo, zones, survey);
criterion_main!(benches);
