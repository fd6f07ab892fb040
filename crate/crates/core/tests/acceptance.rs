//! Acceptance checks. Run with `cargo test -p nlse-core --test acceptance`.
//!
//! Prints one PASS/FAIL line per criterion followed by indented details, and
//! exits non-zero if any criterion fails.

use std::f64::consts::PI;
use std::time::Instant;

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use nlse_core::dataset::store::{LABELS_FILE, OBSERVATIONS_FILE};
use nlse_core::dataset::{generate, simulate_sample, split_indices, GridConfig, DEFAULT_FRACTIONS};
use nlse_core::oracle::{FitMethod, Oracle};
use nlse_core::regression::exchange::{read_predictions_file, write_predictions_file, PredictionRow};
use nlse_core::regression::{metrics, nll, nll_gradient, nll_gradient_check, GaussianPrediction};
use nlse_core::solver::gaussian_input;
use nlse_core::{
    BeamParams, ComplexField, Dataset, DatasetManifest, MediumParams, NoiseConfig, ParameterRanges,
    PropagationConfig, Propagator, Simulator, TransverseGrid,
};

struct Criterion {
    name: &'static str,
    checks: Vec<(bool, String)>,
}

impl Criterion {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            checks: Vec::new(),
        }
    }

    fn check(&mut self, passed: bool, detail: String) {
        self.checks.push((passed, detail));
    }

    fn passed(&self) -> bool {
        !self.checks.is_empty() && self.checks.iter().all(|(p, _)| *p)
    }
}

fn power(field: &ComplexField) -> f64 {
    let g = field.grid();
    field.values().iter().map(|v| v.norm_sqr()).sum::<f64>() * g.dx() * g.dy()
}

fn radius(field: &ComplexField) -> f64 {
    let g = *field.grid();
    let (mut m0, mut mx, mut my, mut mr) = (0.0, 0.0, 0.0, 0.0);
    for iy in 0..g.ny {
        for ix in 0..g.nx {
            let i = field.get(ix, iy).norm_sqr();
            let (x, y) = (g.x(ix), g.y(iy));
            m0 += i;
            mx += i * x;
            my += i * y;
            mr += i * (x * x + y * y);
        }
    }
    let (cx, cy) = (mx / m0, my / m0);
    (2.0 * (mr / m0 - cx * cx - cy * cy)).sqrt()
}

fn distance(a: &ComplexField, b: &ComplexField) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn mid_range() -> MediumParams {
    let t = ParameterRanges::default().denormalize(&[0.5; 3]);
    MediumParams::new(t[0], t[1], t[2])
}

fn reference_grid(n: usize) -> TransverseGrid {
    TransverseGrid::square(n, 15.0 * BeamParams::reference().waist).unwrap()
}

fn solver_suite() -> Criterion {
    let mut c = Criterion::new("solver analytic suite");
    let start = Instant::now();
    let beam = BeamParams::reference();
    let length = 0.2;

    let grid = reference_grid(896);
    let input = gaussian_input(&beam, &grid).unwrap();
    let lossless = MediumParams {
        alpha: 0.0,
        ..mid_range()
    };
    let out = Propagator::new(grid, beam, PropagationConfig::new(length, 200))
        .unwrap()
        .run(&input, &lossless)
        .unwrap();
    let drift = (power(&out) - power(&input)).abs() / power(&input);
    c.check(drift < 1e-8, format!("power drift {drift:.2e} at 896^2, 200 steps (< 1e-8)"));

    let grid = reference_grid(448);
    let input = gaussian_input(&beam, &grid).unwrap();
    let mut prop = Propagator::new(grid, beam, PropagationConfig::new(length, 200)).unwrap();
    for alpha in [13.0, 20.0, 30.0] {
        let medium = MediumParams { alpha, ..mid_range() };
        let ratio = power(&prop.run(&input, &medium).unwrap()) / power(&input);
        let expected = (-alpha * length).exp();
        let err = (ratio - expected).abs() / expected;
        c.check(err < 1e-9, format!("alpha {alpha}: P_out/P_in error {err:.2e} vs exp(-alpha L) (< 1e-9)"));
    }

    let small = BeamParams {
        power: 1.0,
        waist: 50e-6,
        wavelength: 780e-9,
    };
    let z_r = PI * small.waist * small.waist / small.wavelength;
    let grid = TransverseGrid::square(256, 16.0 * small.waist).unwrap();
    let input = gaussian_input(&small, &grid).unwrap();
    let out = Propagator::new(grid, small, PropagationConfig::new(z_r, 10))
        .unwrap()
        .run(&input, &MediumParams::new(0.0, 1.0, 0.0))
        .unwrap();
    let expected = 2f64.sqrt() * small.waist;
    let err = (radius(&out) - expected).abs() / expected;
    c.check(err < 5e-3, format!("radius at z_R off sqrt(2) w0 by {:.3}% (< 0.5%)", 100.0 * err));

    let grid = reference_grid(448);
    let input = gaussian_input(&beam, &grid).unwrap();
    let outs: Vec<ComplexField> = [200, 400, 800]
        .iter()
        .map(|&n| {
            Propagator::new(grid, beam, PropagationConfig::new(length, n))
                .unwrap()
                .run(&input, &mid_range())
                .unwrap()
        })
        .collect();
    let ratio = distance(&outs[0], &outs[1]) / distance(&outs[1], &outs[2]);
    c.check(
        (3.5..=4.5).contains(&ratio),
        format!("self-convergence ratio {ratio:.4} over 200/400/800 steps (in [3.5, 4.5])"),
    );

    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 60.0, format!("suite took {secs:.1} s (< 60 s)"));
    c
}

type Mat = [[f64; 3]; 3];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).map(|k| a[i][k] * b[k][j]).sum()))
}

fn transpose(a: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| a[j][i]))
}

fn det(a: &Mat) -> f64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn inverse(a: &Mat) -> Mat {
    let d = det(a);
    let cof = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0]
    };
    std::array::from_fn(|i| std::array::from_fn(|j| cof(j, i) / d))
}

fn dense_nll(x: &[f64; 3], mean: &[f64; 3], cov: &Mat) -> f64 {
    let r: [f64; 3] = std::array::from_fn(|i| x[i] - mean[i]);
    let inv = inverse(cov);
    let quad: f64 = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).map(|(i, j)| r[i] * inv[i][j] * r[j]).sum();
    0.5 * quad + 0.5 * det(cov).ln() + 1.5 * (2.0 * PI).ln()
}

fn cholesky(a: &Mat) -> Mat {
    let mut l = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = if i == j { (a[i][i] - s).sqrt() } else { (a[i][j] - s) / l[j][j] };
        }
    }
    l
}

fn random_rotation(rng: &mut impl Rng) -> Mat {
    let axis: [f64; 3] = std::array::from_fn(|_| StandardNormal.sample(rng));
    let n = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
    let [x, y, z] = axis.map(|v| v / n);
    let t: f64 = rng.random_range(0.0..2.0 * PI);
    let (s, c) = t.sin_cos();
    let k = 1.0 - c;
    [
        [c + x * x * k, x * y * k - z * s, x * z * k + y * s],
        [y * x * k + z * s, c + y * y * k, y * z * k - x * s],
        [z * x * k - y * s, z * y * k + x * s, c + z * z * k],
    ]
}

fn random_prediction(rng: &mut impl Rng) -> GaussianPrediction {
    let mean = std::array::from_fn(|_| rng.random_range(-0.5..1.5));
    let chol = std::array::from_fn(|_| StandardNormal.sample(rng));
    GaussianPrediction::new(mean, chol)
}

fn regression_suite() -> Criterion {
    let mut c = Criterion::new("regression-math suite");
    let identity = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let p = GaussianPrediction::from_factor([0.5; 3], &identity);
    let a = nll(&[0.5; 3], &p).unwrap();
    let b = nll(&[1.5, 0.5, 0.5], &p).unwrap();
    let err = (a - 2.756815599614018).abs().max((b - 3.256815599614018).abs());
    c.check(err < 1e-9, format!("analytic values {a:.9}, {b:.9}, worst error {err:.1e} (< 1e-9)"));

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pred = random_prediction(&mut rng);
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..1.5));
        let l = pred.factor();
        let cov = mat_mul(&l, &transpose(&l));
        let dense = dense_nll(&x, &pred.mean, &cov);
        worst = worst.max((nll(&x, &pred).unwrap() - dense).abs() / dense.abs());
    }
    c.check(worst < 1e-10, format!("dense inverse/determinant oracle, 1000 cases, worst relative {worst:.1e} (< 1e-10)"));

    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let pred = random_prediction(&mut rng);
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..1.5));
        let r = random_rotation(&mut rng);
        let l = pred.factor();
        let cov = mat_mul(&mat_mul(&r, &mat_mul(&l, &transpose(&l))), &transpose(&r));
        let rot = |v: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|i| (0..3).map(|k| r[i][k] * v[k]).sum()) };
        let rotated = GaussianPrediction::from_factor(rot(&pred.mean), &cholesky(&cov));
        let base = nll(&x, &pred).unwrap();
        worst = worst.max((nll(&rot(&x), &rotated).unwrap() - base).abs() / base.abs());
    }
    c.check(worst < 1e-10, format!("rotation invariance, 1000 cases, worst relative {worst:.1e} (< 1e-10)"));

    let mut worst = 0.0f64;
    for _ in 0..200 {
        let pred = random_prediction(&mut rng);
        let x: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.5..1.5));
        let g = nll_gradient(&x, &pred).unwrap();
        worst = worst.max(nll_gradient_check(&pred, &x, 1e-5, &g).unwrap());
    }
    c.check(worst < 1e-4, format!("finite-difference gradient, 200 points, worst relative {worst:.1e} (< 1e-4)"));
    c
}

/// The full physical scenario on a 448x448 computational grid with 50 steps.
fn reduced_manifest(counts: usize, noise: NoiseConfig, seed: u64) -> DatasetManifest {
    let mut m = DatasetManifest {
        ranges: ParameterRanges::with_counts(counts, counts, counts),
        grid: GridConfig {
            nx: 448,
            ny: 448,
            downsample: 2,
            ..GridConfig::default()
        },
        propagation: PropagationConfig::new(0.2, 50),
        noise,
        master_seed: seed,
        ..DatasetManifest::default()
    };
    m.sample_count = m.ranges.len();
    m
}

fn dataset_suite() -> Criterion {
    let mut c = Criterion::new("dataset suite");
    let dir = tempfile::tempdir().unwrap();
    let manifest = reduced_manifest(2, NoiseConfig::default(), 5);
    generate(&manifest, dir.path(), 0).unwrap();
    let size = |name: &str| std::fs::metadata(dir.path().join(name)).unwrap().len();
    let (obs_bytes, label_bytes) = (size(OBSERVATIONS_FILE), size(LABELS_FILE));
    c.check(
        obs_bytes == 8 * 2 * 224 * 224 * 4 && label_bytes == 8 * 3 * 8,
        format!("2x2x2 grid: observations {obs_bytes} B, labels {label_bytes} B"),
    );

    let ds = Dataset::open(dir.path()).unwrap();
    let mut sim = Simulator::new(manifest.scenario()).unwrap();
    let identical = (0..8).all(|i| {
        let fresh = simulate_sample(&manifest, &mut sim, i).unwrap();
        let stored = ds.sample(i).unwrap();
        let bits = |v: &[f32]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        bits(&fresh.observation.density) == bits(&stored.observation.density)
            && bits(&fresh.observation.phase) == bits(&stored.observation.phase)
            && fresh.labels_physical.map(f64::to_bits) == stored.labels_physical.map(f64::to_bits)
    });
    c.check(identical, "write -> read bit-identical for all 8 records".into());

    let ranges = ParameterRanges::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let u: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..=1.0));
        let phys = ranges.denormalize(&u);
        let back = ranges.normalize(&phys).unwrap();
        let again = ranges.denormalize(&back);
        for k in 0..3 {
            worst = worst.max((back[k] - u[k]).abs());
            worst = worst.max((again[k] - phys[k]).abs() / phys[k].abs());
        }
    }
    c.check(worst < 1e-12, format!("normalize/denormalize round trip, worst {worst:.1e} (< 1e-12)"));

    let sizes = split_indices(125_000, DEFAULT_FRACTIONS, 0).unwrap().sizes();
    c.check(sizes == [100_000, 12_500, 12_500], format!("split of 125000: {sizes:?}"));
    c
}

fn evaluator_suite() -> Criterion {
    let mut c = Criterion::new("evaluator reproduction of predicted-vs-true statistics");
    let sigma = [0.049, 0.028, 0.033];
    // variance of the uniform 50-point grid k/49
    let grid_var = 2499.0 / 28812.0;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let rows: Vec<PredictionRow> = (0..12_500)
        .map(|index| {
            let truth: [f64; 3] = std::array::from_fn(|_| rng.random_range(0..50) as f64 / 49.0);
            let pred = std::array::from_fn(|k| truth[k] + Normal::new(0.0, sigma[k]).unwrap().sample(&mut rng));
            PredictionRow { index, pred, truth }
        })
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("predictions.csv");
    write_predictions_file(&path, &rows).unwrap();
    let back = read_predictions_file(&path).unwrap();
    let preds: Vec<_> = back.iter().map(|r| r.pred).collect();
    let truths: Vec<_> = back.iter().map(|r| r.truth).collect();
    let report = metrics(&preds, &truths).unwrap();
    for (k, p) in report.parameters.iter().enumerate() {
        let std_err = (p.residual_std - sigma[k]).abs() / sigma[k];
        c.check(
            std_err < 0.05,
            format!("{}: sigma {:.4} vs {} ({:.1}% off, < 5%)", p.name, p.residual_std, sigma[k], 100.0 * std_err),
        );
        let expected = 1.0 - sigma[k] * sigma[k] / grid_var;
        let r2 = p.r2.unwrap_or(f64::NAN);
        c.check(
            (r2 - expected).abs() < 0.01,
            format!("{}: R2 {r2:.5} vs 1 - sigma^2/Var = {expected:.5} (within 0.01)", p.name),
        );
    }
    c
}

fn oracle_suite() -> Criterion {
    let mut c = Criterion::new("oracle identifiability");
    let start = Instant::now();
    let noisy = reduced_manifest(5, NoiseConfig::default(), 99);
    let clean = DatasetManifest {
        noise: NoiseConfig::disabled(),
        ..noisy.clone()
    };
    let scenario = noisy.scenario();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut picks = sample_indices(&mut rng, 125, 10).into_vec();
    picks.sort_unstable();
    let mut sim = Simulator::new(scenario).unwrap();
    let oracle = Oracle::new(scenario, noisy.ranges).unwrap();
    for (label, manifest, tol) in [("noiseless", &clean, 0.02), ("noisy", &noisy, 0.05)] {
        let mut worst = 0.0f64;
        let mut evals = 0;
        for &i in &picks {
            let sample = simulate_sample(manifest, &mut sim, i).unwrap();
            let r = oracle.fit(&sample.observation, FitMethod::NelderMead, 200).unwrap();
            evals += r.evaluations;
            for k in 0..3 {
                worst = worst.max((r.best[k] - sample.labels_normalized[k]).abs());
            }
        }
        c.check(
            worst <= tol,
            format!("{label}: samples {picks:?}, worst normalized error {worst:.4} (<= {tol}), {evals} objective evaluations"),
        );
    }
    let secs = start.elapsed().as_secs_f64();
    c.check(secs < 1800.0, format!("suite took {secs:.0} s (< 30 min)"));
    c
}

fn main() {
    let suites: [fn() -> Criterion; 5] = [
        solver_suite,
        regression_suite,
        dataset_suite,
        evaluator_suite,
        oracle_suite,
    ];
    let mut failed = 0;
    for suite in suites {
        let c = suite();
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        println!("{verdict} {}", c.name);
        for (ok, detail) in &c.checks {
            println!("    [{}] {detail}", if *ok { "ok" } else { "x" });
        }
        failed += usize::from(!c.passed());
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
