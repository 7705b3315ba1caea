//! The three run modes: optimisation traces, the check grid, and the
//! matrix-exponential benchmark. Everything except wall-clock columns
//! is a pure function of the seed and the configuration.

use std::io::{self, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use rayon::prelude::*;

use trivopt::dense::Matrix;
use trivopt::expm::expm;
use trivopt::manifolds::{random_point, ManifoldPoint, ManifoldSpec};
use trivopt::optimizers::OptimizerState;
use trivopt::problems::{
    copy_task, copy_task_init, karcher_spd, procrustes, rayleigh, CopyTaskConfig, Problem,
    COPY_ORTH_LR_FACTOR,
};
use trivopt::trivialize::{StoppingRule, TrivRun, TrivError};
use trivopt::verify::{
    cayley, flow_defect, hess_exp_check, random_unit_direction, rauch_check,
    stiefel_formula_crosscheck, BoundSide, CheckReport, FDConfig,
};

use crate::config::{OptChoice, ProblemChoice, RuleChoice, RunConfig};

/// Seed-splitting constant so the data and the starting point draw from
/// unrelated streams.
const SEED_SPLIT: u64 = 0x9E37_79B9_7F4A_7C15;

const TRACE_HEADER: &str =
    "iter,f_value,grad_norm_raw,grad_norm_riemannian,stop_fired,outer_i,wall_ms";

fn gaussian(rows: usize, cols: usize, r: &mut ChaCha8Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

/// A well-conditioned random symmetric positive definite matrix: a
/// normalised Gram matrix shifted off zero.
fn random_spd(n: usize, r: &mut ChaCha8Rng) -> Matrix {
    let g = gaussian(n, n, r);
    let gram = g.matmul(&g.transpose()).scale(1.0 / n as f64);
    let half_eye = Matrix::from_fn(n, n, |i, j| if i == j { 0.5 } else { 0.0 });
    &gram + &half_eye
}

fn build_problem(cfg: &RunConfig) -> (Problem, ManifoldPoint) {
    let problem = cfg.problem.expect("bench configs always carry a problem");
    let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
    match problem {
        ProblemChoice::Procrustes => {
            let a = gaussian(cfg.n, cfg.n, &mut r);
            let b = gaussian(cfg.n, cfg.n, &mut r);
            let start = random_point(
                &ManifoldSpec::special_orthogonal(cfg.n),
                cfg.seed ^ SEED_SPLIT,
            );
            (procrustes(&a, &b), start)
        }
        ProblemChoice::Rayleigh => {
            let g = gaussian(cfg.n, cfg.n, &mut r);
            let a = (&g + &g.transpose()).scale(0.5);
            let start = random_point(&ManifoldSpec::sphere(cfg.n), cfg.seed ^ SEED_SPLIT);
            (rayleigh(&a), start)
        }
        ProblemChoice::Karcher => {
            let points: Vec<Matrix> = (0..cfg.k).map(|_| random_spd(cfg.n, &mut r)).collect();
            let problem =
                karcher_spd(&points).expect("generated Gram matrices are positive definite");
            let start = ManifoldPoint::new(
                ManifoldSpec::spd(cfg.n),
                vec![Matrix::identity(cfg.n)],
            )
            .expect("the identity is positive definite");
            (problem, start)
        }
        ProblemChoice::Copy => {
            let task = CopyTaskConfig::new(9, 10, 100, cfg.n, 8, cfg.seed);
            (copy_task(&task), copy_task_init(&task))
        }
    }
}

fn build_optimizer(cfg: &RunConfig) -> OptimizerState {
    let lr = cfg.effective_lr;
    let opt = match cfg.opt {
        OptChoice::Gd => OptimizerState::gd(lr),
        OptChoice::Momentum { beta } => OptimizerState::momentum(lr, beta),
        OptChoice::Adam { beta1, beta2 } => OptimizerState::adam(lr, beta1, beta2, 1e-8),
    };
    if cfg.problem == Some(ProblemChoice::Copy) {
        // the orthogonal recurrence trains faster than the Euclidean
        // read-in and read-out factors
        opt.with_part_lr_scales(vec![COPY_ORTH_LR_FACTOR, 1.0, 1.0])
    } else {
        opt
    }
}

fn build_rule(cfg: &RunConfig) -> StoppingRule {
    match cfg.rule {
        RuleChoice::Never => StoppingRule::Never,
        RuleChoice::Always => StoppingRule::Always,
        RuleChoice::EveryK(k) => StoppingRule::EveryK(k),
        RuleChoice::GradRatio { low, high } => StoppingRule::GradRatio {
            eps_low: low,
            eps_high: high,
        },
    }
}

/// Run the configured optimisation and write one CSV row per step.
/// Returns 0 on a complete trace and 2 when the run diverged; a
/// divergent run ends with a flagged terminal row.
pub fn bench(cfg: &RunConfig) -> io::Result<i32> {
    let (problem, start) = build_problem(cfg);
    let mut run = TrivRun::new(start, build_optimizer(cfg), build_rule(cfg));

    let mut rows = Vec::with_capacity(cfg.iters as usize + 1);
    rows.push(TRACE_HEADER.to_string());
    let t0 = Instant::now();
    let mut exit = 0;
    let mut last_outer = 0;
    for _ in 0..cfg.iters {
        match run.step(&problem) {
            Ok(rec) => {
                last_outer = rec.outer_i;
                rows.push(format!(
                    "{},{:.16e},{:.16e},{:.16e},{},{},{:.16e}",
                    rec.iter,
                    rec.f_value,
                    rec.grad_norm_raw,
                    rec.grad_norm_riemannian,
                    u8::from(rec.stop_fired),
                    rec.outer_i,
                    t0.elapsed().as_secs_f64() * 1e3,
                ));
            }
            Err(err) => {
                let (iteration, f_value) = match &err {
                    TrivError::Diverged { iteration, f_value } => (*iteration, *f_value),
                    TrivError::Geometry { iteration, .. } => (*iteration, f64::NAN),
                };
                eprintln!("run diverged: {err}");
                rows.push(format!(
                    "{},{:.16e},{:.16e},{:.16e},1,{},{:.16e}",
                    iteration,
                    f_value,
                    f64::NAN,
                    f64::NAN,
                    last_outer,
                    t0.elapsed().as_secs_f64() * 1e3,
                ));
                exit = 2;
                break;
            }
        }
    }
    write_lines(cfg, &rows)?;
    Ok(exit)
}

/// The closed-form great-circle exponential, used as the reference
/// retraction in the flow checks.
fn sphere_exp(x: &Matrix, z: &Matrix) -> Matrix {
    let norm = z.frob();
    if norm < 1e-300 {
        return x.clone();
    }
    &x.scale(norm.cos()) + &z.scale(norm.sin() / norm)
}

fn flow_report(
    label: &'static str,
    expected_exact: bool,
    defect: f64,
    t: f64,
    s: f64,
) -> CheckReport {
    // exact flows must sit at finite-difference noise; deliberate
    // non-examples must show a visible defect
    let (bound, side, passed) = if expected_exact {
        (1e-6, BoundSide::Upper, defect <= 1e-6)
    } else {
        (1e-3, BoundSide::Lower, defect > 1e-3)
    };
    CheckReport {
        name: "flow defect",
        parameters: format!("{label}, t = {t}, s = {s}"),
        estimate: defect,
        bound,
        side,
        passed,
        skipped: false,
    }
}

/// Build the full check grid for one seed. Cell order is fixed so
/// reports and reruns line up.
fn grid_cells(seed: u64) -> Vec<Box<dyn Fn() -> Vec<CheckReport> + Send + Sync>> {
    let mut cells: Vec<Box<dyn Fn() -> Vec<CheckReport> + Send + Sync>> = Vec::new();
    let kinds = [
        ManifoldSpec::special_orthogonal(4),
        ManifoldSpec::sphere(3),
        ManifoldSpec::grassmannian(4, 2),
        ManifoldSpec::euclidean(2, 3),
    ];
    for (kind_idx, spec) in kinds.into_iter().enumerate() {
        for (r_idx, r) in [0.5, 1.0].into_iter().enumerate() {
            let cell_seed = seed
                .wrapping_add(1000 * kind_idx as u64)
                .wrapping_add(10 * r_idx as u64);
            let profile = spec
                .curvature()
                .expect("every grid manifold has a profile");
            let hess_in_domain =
                trivopt::curvature::hess_exp_radial_bounds(&profile, r).is_ok()
                    && trivopt::curvature::hess_exp_normal_bound(&profile, r).is_ok()
                    && trivopt::curvature::hess_exp_full_bound(&profile, r).is_ok();
            let rauch_spec = spec.clone();
            cells.push(Box::new(move || {
                let base = random_point(&rauch_spec, cell_seed);
                let v = random_unit_direction(&rauch_spec, cell_seed ^ 0xD1);
                let cfg = FDConfig::new(1e-5, 16, cell_seed ^ 0xF0);
                rauch_check(&base, &v, r, &cfg)
            }));
            if hess_in_domain {
                let hess_spec = spec.clone();
                cells.push(Box::new(move || {
                    let base = random_point(&hess_spec, cell_seed ^ 0x2);
                    let v = random_unit_direction(&hess_spec, cell_seed ^ 0xD2);
                    let cfg = FDConfig::new(1e-5, 16, cell_seed ^ 0xF1);
                    hess_exp_check(&base, &v, r, &cfg)
                }));
            }
        }
    }

    cells.push(Box::new(move || {
        let p = Matrix::new(3, 1, vec![1.0, 0.0, 0.0]);
        let v = Matrix::new(3, 1, vec![0.0, 0.8, 0.6]);
        let defect = flow_defect(sphere_exp, &p, &v, 0.7, 0.5, &FDConfig::default());
        vec![flow_report("exponential on sphere(3)", true, defect, 0.7, 0.5)]
    }));
    cells.push(Box::new(move || {
        let p = Matrix::identity(3);
        let a = Matrix::new(3, 3, vec![0.0, -1.0, 0.4, 1.0, 0.0, -0.7, -0.4, 0.7, 0.0]);
        let v = a.matmul(&p);
        let ret = |b: &Matrix, z: &Matrix| b.matmul(&expm(&b.transpose().matmul(z)));
        let defect = flow_defect(ret, &p, &v, 0.7, 0.5, &FDConfig::default());
        vec![flow_report(
            "exponential on special orthogonal(3)",
            true,
            defect,
            0.7,
            0.5,
        )]
    }));
    cells.push(Box::new(move || {
        let p = Matrix::identity(3);
        let a = Matrix::new(3, 3, vec![0.0, -1.0, 0.4, 1.0, 0.0, -0.7, -0.4, 0.7, 0.0]);
        let v = a.matmul(&p);
        let ret = |b: &Matrix, z: &Matrix| b.matmul(&cayley(&b.transpose().matmul(z)));
        let defect = flow_defect(ret, &p, &v, 0.7, 0.5, &FDConfig::default());
        vec![flow_report(
            "cayley on special orthogonal(3)",
            false,
            defect,
            0.7,
            0.5,
        )]
    }));
    cells.push(Box::new(move || {
        let p = Matrix::new(3, 1, vec![1.0, 0.0, 0.0]);
        let v = Matrix::new(3, 1, vec![0.0, 1.0, 0.0]);
        let ret = |x: &Matrix, z: &Matrix| {
            let sum = x + z;
            sum.scale(1.0 / sum.frob())
        };
        let defect = flow_defect(ret, &p, &v, 0.7, 0.5, &FDConfig::default());
        vec![flow_report("metric projection on sphere(3)", false, defect, 0.7, 0.5)]
    }));

    cells.push(Box::new(move || {
        let spec = ManifoldSpec::stiefel(6, 2);
        let u = random_point(&spec, seed ^ 0x57).value();
        let mut r = ChaCha8Rng::seed_from_u64(seed ^ 0x58);
        let g = gaussian(2, 2, &mut r);
        let s = (&g - &g.transpose()).scale(0.5);
        let raw_normal = gaussian(6, 2, &mut r);
        let normal = &raw_normal - &u.matmul(&u.transpose().matmul(&raw_normal));
        let c = &u.matmul(&s) + &normal;
        vec![stiefel_formula_crosscheck(
            &u,
            &c,
            &FDConfig::new(1e-5, 1, seed ^ 0x59),
        )]
    }));
    cells
}

/// Run the check grid, write the report, and return 0 iff every
/// (selected) check passed.
pub fn verify(cfg: &RunConfig) -> io::Result<i32> {
    let cells = grid_cells(cfg.seed);
    let mut reports: Vec<CheckReport> = cells
        .par_iter()
        .map(|cell| cell())
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    if let Some(filter) = &cfg.check {
        reports.retain(|r| r.name.contains(filter.as_str()));
    }
    if let Some(tol) = cfg.tol {
        for r in &mut reports {
            r.passed = r.holds_within(tol);
        }
    }

    let failed = reports.iter().filter(|r| !r.passed).count();
    let skipped = reports.iter().filter(|r| r.skipped).count();
    let mut lines: Vec<String> = reports.iter().map(|r| r.to_string()).collect();
    lines.push(format!(
        "summary: {} checks, {} passed, {failed} failed, {skipped} skipped",
        reports.len(),
        reports.len() - failed,
    ));
    write_lines(cfg, &lines)?;
    println!("{}", lines.last().expect("summary line exists"));
    Ok(if failed == 0 { 0 } else { 1 })
}

/// Time the matrix exponential on random skew matrices and record the
/// worst orthogonality residual per size. Returns 1 if any residual
/// exceeds machine-precision expectations.
pub fn expm_bench(cfg: &RunConfig) -> io::Result<i32> {
    let sizes = [4usize, 16, 64];
    let mut lines = vec!["n,trials,max_ortho_residual,wall_ms".to_string()];
    let mut exit = 0;
    let norm_dist = Uniform::new(0.0f64, 10.0).expect("static bounds are valid");
    for n in sizes {
        let mut r = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(n as u64));
        let eye = Matrix::identity(n);
        let mut worst = 0.0f64;
        let t0 = Instant::now();
        for _ in 0..cfg.iters {
            let g = gaussian(n, n, &mut r);
            let skew = (&g - &g.transpose()).scale(0.5);
            let target = norm_dist.sample(&mut r);
            let a = skew.scale(target / skew.frob());
            let q = expm(&a);
            let residual = (&q.transpose().matmul(&q) - &eye).frob();
            worst = worst.max(residual);
        }
        if worst > 1e-12 {
            eprintln!("orthogonality residual {worst:.3e} at n = {n} exceeds 1e-12");
            exit = 1;
        }
        lines.push(format!(
            "{n},{},{worst:.16e},{:.16e}",
            cfg.iters,
            t0.elapsed().as_secs_f64() * 1e3,
        ));
    }
    write_lines(cfg, &lines)?;
    Ok(exit)
}

fn write_lines(cfg: &RunConfig, lines: &[String]) -> io::Result<()> {
    let mut file = std::fs::File::create(&cfg.out)?;
    for line in lines {
        writeln!(file, "{line}")?;
    }
    Ok(())
}
