//! Benchmarks for the numerical hot paths: schedule coefficients, mixture
//! scores, SG density grids, network forward/backward, sampler steps, and
//! the finite-volume density update.

use criterion::{black_box, criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sglab_core::analytic::{sg_density_grid, DensityGrid, GridSpec, MixtureDensity};
use sglab_core::eval::{fokker_planck_evolve, FpOptions};
use sglab_core::field::{AnalyticScoreField, Condition};
use sglab_core::guidance::{stack_apply, GuidanceStack, ShiftSchedule, StepCache};
use sglab_core::nn::{draw_dsm_batch, loss_from_batch, Weighting};
use sglab_core::sampler::{ddim_step, euler_maruyama_step};
use sglab_core::{NoiseSchedule, ScoreNet};

fn bench_schedule(c: &mut Criterion) {
    let s = NoiseSchedule::vp_default();
    c.bench_function("vp_alpha_sigma", |b| {
        b.iter(|| s.vp_alpha_sigma(black_box(0.38)).unwrap())
    });
}

fn bench_mixture(c: &mut Criterion) {
    let two = MixtureDensity::two_mode(1.0, 0.05);
    c.bench_function("mixture_score_1d", |b| {
        b.iter(|| two.score_at(black_box(&[0.3])).unwrap())
    });
    let spec = GridSpec::new(vec![-3.0], vec![3.0], vec![600]).unwrap();
    let sched = NoiseSchedule::vp_default();
    c.bench_function("sg_density_grid_600", |b| {
        b.iter(|| sg_density_grid(&two, &sched, 0.38, 0.2, 1.0, &spec).unwrap())
    });
}

fn bench_net(c: &mut Criterion) {
    let net = ScoreNet::default_arch(1, 2, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let two = MixtureDensity::two_mode(1.0, 0.05);
    let xs = two.sample(&mut rng, 256);
    let ts = vec![0.5; 256];
    let conds = vec![Condition::Empty; 256];
    c.bench_function("net_forward_batch_256", |b| {
        b.iter(|| net.forward_batch(black_box(&xs), &ts, &conds).unwrap())
    });
    let sched = NoiseSchedule::vp_default();
    let (x0, labels) = two.sample_with_labels(&mut rng, 256);
    let batch =
        draw_dsm_batch(&x0, &labels, &sched, Weighting::SigmaSquared, 0.1, &mut rng).unwrap();
    c.bench_function("dsm_loss_backward_256", |b| {
        b.iter_batched(
            || (),
            |_| loss_from_batch(&net, &batch).unwrap().backward().unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn bench_sampler(c: &mut Criterion) {
    let sched = NoiseSchedule::vp_default();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("euler_maruyama_step", |b| {
        b.iter(|| {
            euler_maruyama_step(
                black_box(&[0.3]),
                0.5,
                -0.005,
                black_box(&[-0.4]),
                &sched,
                1.0,
                &mut rng,
            )
            .unwrap()
        })
    });
    c.bench_function("ddim_step", |b| {
        b.iter(|| ddim_step(black_box(&[0.3]), 0.5, 0.48, black_box(&[-0.4]), &sched).unwrap())
    });
    let field = AnalyticScoreField::new(MixtureDensity::two_mode(1.0, 0.05), sched);
    let stack = GuidanceStack {
        omega_sg: 1.0,
        shift: ShiftSchedule::Constant { steps: 10.0 },
        ..GuidanceStack::default()
    };
    let cache = StepCache::empty();
    c.bench_function("stack_apply_sg", |b| {
        b.iter(|| stack_apply(&field, &stack, black_box(&[0.3]), 0.5, &cache, &sched).unwrap())
    });
}

fn bench_fp(c: &mut Criterion) {
    let spec = GridSpec::new(vec![-3.0], vec![3.0], vec![600]).unwrap();
    let data = MixtureDensity::standard_normal(1);
    let init = DensityGrid::from_density(&spec, |x| data.density_at(x).unwrap()).unwrap();
    c.bench_function("fp_evolve_one_interval", |b| {
        b.iter(|| {
            fokker_planck_evolve(
                black_box(&init),
                |_x, _t| vec![0.0],
                |_t| 0.5,
                &[1.0, 0.99],
                &FpOptions::default(),
            )
            .unwrap()
        })
    });
}

criterion_group!(
    benches,
    bench_schedule,
    bench_mixture,
    bench_net,
    bench_sampler,
    bench_fp
);
criterion_main!(benches);
