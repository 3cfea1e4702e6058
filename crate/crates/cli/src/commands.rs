use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use deconv_core::experiments::{
    conditioning, phase, sparse_phase, uniform_phase, ConditioningConfig, PhaseConfig, PhaseRow, SparsePhaseConfig,
};
use deconv_core::io::{read_grid, read_measure, read_samples, read_values, write_solution};
use deconv_core::{
    basis_pursuit, bpdn, certify_point, certify_sparse_point, design_matrix, kkt_report, region_sweep, relative_error,
    sparse_bp, write_region_csv, BoundConfig, Error, Grid, KernelFamily, KernelSpec, Result, SolveOptions, SparseConfig,
};

use crate::config::Params;

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Not certified / not recovered.
    Negative,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn required(p: &Params, key: &str) -> Result<PathBuf> {
    p.string(key).map(PathBuf::from).ok_or_else(|| Error::Config(format!("missing required key '{key}'")))
}

/// Output sink: `out` path or stdout. The first line is the provenance comment.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn header_comment(w: &mut dyn Write, p: &Params, seed: Option<u64>) -> Result<()> {
    match seed {
        Some(s) => writeln!(w, "# config_sha256={} seed={s}", p.hash())?,
        None => writeln!(w, "# config_sha256={} seed=none", p.hash())?,
    }
    Ok(())
}

fn finish(p: &Params) -> Result<()> {
    let unused = p.unused();
    if unused.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(format!("unknown keys: {}", unused.join(", "))))
    }
}

fn solver_options(p: &Params) -> Result<SolveOptions> {
    let d = SolveOptions::default();
    Ok(SolveOptions {
        max_iters: p.get("max_iters", d.max_iters)?,
        tol: p.get("tol", d.tol)?,
        polish: p.get("polish", d.polish)?,
        ..d
    })
}

pub fn solve(p: &Params) -> Result<Status> {
    let family = p.family()?;
    let sigma = p.get("sigma", 1.0)?;
    let kernel = KernelSpec::new(family, sigma)?;
    let samples = read_samples(open(&required(p, "samples")?)?)?;
    let y = read_values(open(&required(p, "values")?)?)?;
    if y.len() != samples.len() {
        return Err(Error::Config(format!("{} values for {} samples", y.len(), samples.len())));
    }
    let grid = match p.string("grid") {
        Some(g) => read_grid(open(Path::new(&g))?)?,
        None => Grid::uniform(p.get("grid_lo", 0.0)?, p.get("grid_hi", 1.0)?, p.get("grid_n", 2000usize)?)?,
    };
    let program = p.get("program", "bp".to_string())?;
    let truth = match p.string("truth") {
        Some(t) => Some(read_measure(open(Path::new(&t))?)?),
        None => None,
    };
    let opts = solver_options(p)?;
    let out = p.string("out").map(PathBuf::from);
    let (xi, lambda) = match program.as_str() {
        "bp" => (None, None),
        "bpdn" => (Some(p.get("xi_bar", 0.0)?), None),
        "sparse" => (None, Some(p.get("lambda", 2.0)?)),
        other => return Err(Error::Config(format!("program: unknown '{other}' (bp|bpdn|sparse)"))),
    };
    finish(p)?;

    let a = design_matrix(&kernel, &samples, &grid);
    let r = match (xi, lambda) {
        (Some(x), _) => bpdn(&a, &y, x, &opts)?,
        (_, Some(l)) => sparse_bp(&a, &y, l, &opts)?,
        _ => basis_pursuit(&a, &y, &opts)?,
    };
    let kkt = kkt_report(&a, &y, &r);
    let mut w = sink(out.as_deref())?;
    header_comment(&mut *w, p, None)?;
    writeln!(
        w,
        "# kkt primal={} dual={} gap={:e} dual_violation={:e} converged={}",
        kkt.primal_objective, kkt.dual_objective, kkt.duality_gap, kkt.dual_violation, r.converged
    )?;
    let mut status = Status::Success;
    if let Some(mu) = &truth {
        let mut t = vec![0.0; grid.len()];
        for &(loc, amp) in mu.spikes() {
            t[grid.nearest(loc)] += amp;
        }
        let err = relative_error(&r.x, &t);
        let tol = if lambda.is_some() { 1e-3 } else { opts.recovery_rel_tol };
        let ok = err < tol;
        writeln!(w, "# relative_error={err:e} exact_recovery={ok}")?;
        if !ok {
            status = Status::Negative;
        }
    }
    write_solution(&mut w, &grid, &r.x, r.w.as_deref())?;
    w.flush()?;
    if !r.converged {
        eprintln!("warning: solver stopped at the iteration limit");
    }
    Ok(status)
}

pub fn certify(p: &Params) -> Result<Status> {
    let family = p.family()?;
    let mode = p.get("mode", "noiseless".to_string())?;
    let coarsen = p.get("coarsen", 1.0)?;
    let out = p.string("out").map(PathBuf::from);
    let report = match mode.as_str() {
        "noiseless" => {
            let cfg = BoundConfig::new(family, p.get("delta", 3.5)?, p.get("gamma", 0.3)?, p.get("kappa", 0.05)?)
                .coarsened(coarsen);
            finish(p)?;
            certify_point(&cfg)?
        }
        "sparse" => {
            let d = match family {
                KernelFamily::Gaussian => SparseConfig::gaussian_default(),
                KernelFamily::Ricker => SparseConfig::ricker_default(),
            };
            let mut cfg = SparseConfig::new(
                family,
                p.get("delta", d.delta)?,
                p.get("tau1", d.tau1)?,
                p.get("tau2", d.tau2)?,
                p.get("lambda", d.lambda)?,
            );
            cfg.tau_cells = p.get("tau_cells", d.tau_cells)?;
            let cfg = cfg.coarsened(coarsen);
            finish(p)?;
            certify_sparse_point(&cfg)?
        }
        other => return Err(Error::Config(format!("mode: unknown '{other}' (noiseless|sparse)"))),
    };
    let mut w = sink(out.as_deref())?;
    header_comment(&mut *w, p, None)?;
    if let Some(s) = &report.sparse {
        writeln!(
            w,
            "# alpha_inf={} beta_inf={} alpha_lb={} psi_inf={} zeta_inf={} contradiction={} lambda={} tau=[{},{}]",
            report.alpha, report.beta, report.alpha_lb, s.psi, s.zeta, s.contradiction, s.lambda, s.tau1, s.tau2
        )?;
    }
    write_region_csv(&mut w, std::slice::from_ref(&report))?;
    w.flush()?;
    Ok(if report.certified { Status::Success } else { Status::Negative })
}

pub fn region(p: &Params) -> Result<Status> {
    let family = p.family()?;
    let deltas = p.list("deltas", &[2.0, 3.0, 4.0, 5.0, 6.0])?;
    let gammas = p.list("gammas", &[0.1, 0.2, 0.3, 0.4])?;
    let kappa = p.get("kappa", 0.05)?;
    let coarsen = p.get("coarsen", 4.0)?;
    let out = p.string("out").map(PathBuf::from);
    finish(p)?;
    let reports = region_sweep(family, &deltas, &gammas, kappa, coarsen)?;
    let mut w = sink(out.as_deref())?;
    header_comment(&mut *w, p, None)?;
    write_region_csv(&mut w, &reports)?;
    w.flush()?;
    Ok(Status::Success)
}

pub fn run_conditioning(p: &Params) -> Result<Status> {
    let d = ConditioningConfig::default();
    let cfg = ConditioningConfig {
        family: p.family()?,
        spike_counts: p.usize_list("m", &d.spike_counts)?,
        delta0s: p.list("delta0s", &d.delta0s)?,
        samples_per_spike: p.get("samples_per_spike", d.samples_per_spike)?,
        sample_step: p.opt("step")?,
        pad: p.get("pad", d.pad)?,
        perturbation: p.get("perturbation", d.perturbation)?,
        trials: p.get("trials", d.trials)?,
        seed: p.get("seed", d.seed)?,
    };
    let out = p.string("out").map(PathBuf::from);
    finish(p)?;
    let rows = conditioning(&cfg)?;
    let mut w = sink(out.as_deref())?;
    header_comment(&mut *w, p, Some(cfg.seed))?;
    writeln!(w, "m,delta0,sv_min,sv_mid")?;
    for r in rows {
        writeln!(w, "{},{},{:e},{:e}", r.m, r.delta0, r.sv_min, r.sv_mid)?;
    }
    w.flush()?;
    Ok(Status::Success)
}

fn phase_config(p: &Params, second_key: &str, second_default: &[f64]) -> Result<PhaseConfig> {
    let d = PhaseConfig::default();
    Ok(PhaseConfig {
        family: p.family()?,
        sigma: p.get("sigma", d.sigma)?,
        grid_points: p.get("grid_n", d.grid_points)?,
        num_spikes: p.get("spikes", d.num_spikes)?,
        deltas: p.list("deltas", &d.deltas)?,
        second: p.list(second_key, second_default)?,
        jitter: p.get("jitter", d.jitter)?,
        trials: p.get("trials", d.trials)?,
        seed: p.get("seed", d.seed)?,
        solver: solver_options(p)?,
    })
}

fn write_phase(p: &Params, out: Option<&Path>, seed: u64, second: &str, rows: &[PhaseRow]) -> Result<()> {
    let mut w = sink(out)?;
    header_comment(&mut *w, p, Some(seed))?;
    writeln!(w, "delta,{second},fraction,fraction_monotonized")?;
    for r in rows {
        writeln!(w, "{},{},{},{}", r.delta, r.second, r.fraction, r.fraction_monotonized)?;
    }
    w.flush()?;
    Ok(())
}

pub fn run_phase(p: &Params) -> Result<Status> {
    let cfg = phase_config(p, "gammas", &PhaseConfig::default().second)?;
    let out = p.string("out").map(PathBuf::from);
    finish(p)?;
    let rows = phase(&cfg)?;
    write_phase(p, out.as_deref(), cfg.seed, "gamma", &rows)?;
    Ok(Status::Success)
}

pub fn run_uniform_phase(p: &Params) -> Result<Status> {
    let cfg = phase_config(p, "widths", &[0.2, 0.4, 0.6, 0.8, 1.0, 1.5, 2.0])?;
    let out = p.string("out").map(PathBuf::from);
    finish(p)?;
    let rows = uniform_phase(&cfg)?;
    write_phase(p, out.as_deref(), cfg.seed, "grid_width", &rows)?;
    Ok(Status::Success)
}

/// Writes three CSVs into the `out` directory (lambda_noise.csv,
/// delta_spikes.csv, delta_noise.csv), or all three to stdout.
pub fn run_sparse_phase(p: &Params) -> Result<Status> {
    let d = SparsePhaseConfig::default();
    let cfg = SparsePhaseConfig {
        family: p.family()?,
        grid_points: p.get("grid_n", d.grid_points)?,
        width: p.get("width", d.width)?,
        trials: p.get("trials", d.trials)?,
        seed: p.get("seed", d.seed)?,
        solver: solver_options(p)?,
        lambda_sigma: p.get("lambda_sigma", d.lambda_sigma)?,
        lambda_spikes: p.get("lambda_spikes", d.lambda_spikes)?,
        lambda_delta: p.get("lambda_delta", d.lambda_delta)?,
        lambdas: p.list("lambdas", &d.lambdas)?,
        corruptions: p.usize_list("corruptions", &d.corruptions)?,
        count_sigma: p.get("count_sigma", d.count_sigma)?,
        count_corruptions: p.get("count_corruptions", d.count_corruptions)?,
        spike_counts: p.usize_list("spike_counts", &d.spike_counts)?,
        sep_sigma: p.get("sep_sigma", d.sep_sigma)?,
        sep_spikes: p.get("sep_spikes", d.sep_spikes)?,
        deltas: p.list("deltas", &d.deltas)?,
        lambda: p.get("lambda", d.lambda)?,
    };
    let out = p.string("out").map(PathBuf::from);
    finish(p)?;
    let s = sparse_phase(&cfg)?;
    let tables: [(&str, &str, Vec<String>); 3] = [
        (
            "lambda_noise.csv",
            "lambda,corruptions,fraction",
            s.lambda_vs_noise.iter().map(|(l, c, f)| format!("{l},{c},{f}")).collect(),
        ),
        (
            "delta_spikes.csv",
            "delta,spikes,fraction",
            s.delta_vs_spikes.iter().map(|(d, n, f)| format!("{d},{n},{f}")).collect(),
        ),
        (
            "delta_noise.csv",
            "delta,corruptions,fraction",
            s.delta_vs_noise.iter().map(|(d, c, f)| format!("{d},{c},{f}")).collect(),
        ),
    ];
    if let Some(dir) = &out {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    for (name, header, rows) in &tables {
        let path = out.as_ref().map(|d| d.join(name));
        let mut w = sink(path.as_deref())?;
        header_comment(&mut *w, p, Some(cfg.seed))?;
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{r}")?;
        }
        if out.is_none() {
            writeln!(w)?;
        }
        w.flush()?;
    }
    Ok(Status::Success)
}
