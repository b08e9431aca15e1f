use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use dpp_core::benchmarks::{make_grid_world, make_linear_mdp};
use dpp_core::exact::dpp_operator;
use dpp_core::mdp::{expected_next, softmax_policy};
use dpp_core::rl::{dpp_rl_step, GenerativeSampleSet};
use dpp_core::rng::{self, Purpose};
use dpp_core::{InverseTemperature, Preferences, TabularMdp};

fn setup(mdp: &TabularMdp) -> Preferences {
    let mut psi = Preferences::zeros(mdp.n_states(), mdp.n_actions());
    rng::fill_uniform(&mut rng::stream(1, Purpose::Init), psi.as_mut_slice(), mdp.v_max());
    psi
}

fn mdps() -> Vec<(String, TabularMdp)> {
    vec![
        ("linear-500".into(), make_linear_mdp(500, 0.995).unwrap()),
        ("grid-15".into(), make_grid_world(15, 0.995).unwrap()),
    ]
}

// Each kernel is measured on the rayon path and inside `par::sequential`.
fn modes(c: &mut Criterion, group: &str, mut kernel: impl FnMut(&TabularMdp, &Preferences)) {
    let mut g = c.benchmark_group(group);
    g.sample_size(20);
    for (name, mdp) in mdps() {
        let psi = setup(&mdp);
        g.bench_with_input(BenchmarkId::new("parallel", &name), &(), |b, _| b.iter(|| kernel(&mdp, &psi)));
        g.bench_with_input(BenchmarkId::new("sequential", &name), &(), |b, _| {
            b.iter(|| dpp_core::par::sequential(|| kernel(&mdp, &psi)))
        });
    }
    g.finish();
}

fn bench_dpp_operator(c: &mut Criterion) {
    modes(c, "dpp_operator", |mdp, psi| {
        std::hint::black_box(dpp_operator(mdp, psi, InverseTemperature::Finite(1.0)).unwrap());
    });
}

fn bench_softmax_policy(c: &mut Criterion) {
    modes(c, "softmax_policy", |_, psi| {
        std::hint::black_box(softmax_policy(psi, InverseTemperature::Finite(1.0)));
    });
}

fn bench_expected_next(c: &mut Criterion) {
    modes(c, "expected_next", |mdp, psi| {
        let v: Vec<f64> = psi.rows().map(|r| r[0]).collect();
        std::hint::black_box(expected_next(mdp, &v));
    });
}

fn bench_dpp_rl_step(c: &mut Criterion) {
    let mut g = c.benchmark_group("dpp_rl_step");
    g.sample_size(20);
    for (name, mdp) in mdps() {
        let psi = setup(&mdp);
        let samples = GenerativeSampleSet::generate(&mdp, 1, 3).unwrap();
        let mut column = vec![0u32; mdp.n_states() * mdp.n_actions()];
        samples.column(0, &mut column);
        let step = || dpp_rl_step(mdp.rewards(), &psi, &column, InverseTemperature::Infinite, mdp.gamma()).unwrap();
        g.bench_function(BenchmarkId::new("parallel", &name), |b| b.iter(|| std::hint::black_box(step())));
        g.bench_function(BenchmarkId::new("sequential", &name), |b| {
            b.iter(|| std::hint::black_box(dpp_core::par::sequential(step)))
        });
    }
    g.finish();
}

criterion_group!(benches, bench_dpp_operator, bench_softmax_policy, bench_expected_next, bench_dpp_rl_step);
criterion_main!(benches);
