use std::fmt::Write as _;

use bilayer_core::code_sampler::sample_instance;
use bilayer_core::density_evolution::{
    exit_surface, grid_axis, lemma1_equivalence_check, region_scan, run_de, threshold_on_ray, DeConfig,
    DeParams,
};
use bilayer_core::ensemble::{presets, BilayerEnsemble, Degrees};
use bilayer_core::rate_design::{design_correlated, fit_degrees, DesignSpec};
use bilayer_core::simulator::{ber_sweep, sweep_metadata, write_sweep_csv};
use bilayer_core::sparse::SparseBinaryMatrix;
use bilayer_core::theory::{
    achievable_region_sd, achievable_region_sr, optimal_allocation_with, ChannelSet, Pentagon,
    RateBundle, TieBreak,
};
use bilayer_core::{DeError, DesignError, EnsembleError, MatrixError, SimError, TheoryError};
use thiserror::Error;

use crate::config::{Config, ConfigError};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Theory(#[from] TheoryError),
    #[error(transparent)]
    Design(#[from] DesignError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    De(#[from] DeError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Design(DesignError::Theory(_)) => 2,
            CliError::Design(DesignError::BadParameters(_)) => 2,
            CliError::Design(_) => 3,
            CliError::De(DeError::NonConvergence { .. }) => 4,
            CliError::Io(_) => 1,
            _ => 2,
        }
    }
}

pub type CmdResult = Result<String, CliError>;

fn channels(cfg: &Config) -> Result<ChannelSet, CliError> {
    Ok(ChannelSet::new(
        cfg.get("eps_s1r")?,
        cfg.get("eps_s2r")?,
        cfg.get("eps_s1d")?,
        cfg.get("eps_s2d")?,
        cfg.get("eps_rd")?,
    )?)
}

fn tie_break(cfg: &Config) -> Result<TieBreak, CliError> {
    match cfg.raw("tie_break") {
        "conditional" => Ok(TieBreak::ConditionalEntropy),
        "symmetric" => Ok(TieBreak::Symmetric),
        other => Err(ConfigError::Invalid(format!(
            "tie_break must be `conditional` or `symmetric`, got `{other}`"
        ))
        .into()),
    }
}

fn design_spec(cfg: &Config) -> Result<DesignSpec, CliError> {
    Ok(DesignSpec::new(channels(cfg)?, cfg.get("p")?)
        .with_tie_break(tie_break(cfg)?)
        .punctured(cfg.get("punctured")?))
}

fn degrees(l: u32, r: u32) -> Degrees {
    if l == 0 {
        Degrees::NONE
    } else {
        Degrees::new(l, r)
    }
}

pub fn ensemble(cfg: &Config) -> Result<BilayerEnsemble, CliError> {
    let base = match cfg.raw("code") {
        "a" => presets::code_a(),
        "b" => presets::code_b(),
        "custom" => BilayerEnsemble {
            first: [
                Degrees::new(cfg.get("l1")?, cfg.get("r1")?),
                Degrees::new(cfg.get("l2")?, cfg.get("r2")?),
            ],
            synd: [
                degrees(cfg.get("ls1")?, cfg.get("rs1")?),
                degrees(cfg.get("ls2")?, cfg.get("rs2")?),
            ],
            m: [cfg.get("m1")?, cfg.get("m2")?],
            chain_length: 1,
            window: 1,
        },
        other => {
            return Err(ConfigError::Invalid(format!(
                "code must be `a`, `b` or `custom`, got `{other}`"
            ))
            .into())
        }
    };
    let ens = BilayerEnsemble {
        chain_length: cfg.get("chain_length")?,
        window: cfg.get("window")?,
        ..base
    };
    ens.validate()?;
    Ok(ens)
}

fn de_params(cfg: &Config, ens: BilayerEnsemble) -> Result<DeParams, CliError> {
    let p: f64 = cfg.get("p")?;
    let punctured: bool = cfg.get("punctured")?;
    let params = if punctured {
        DeParams::correlated(ens, p)
    } else if p > 0.0 {
        return Err(ConfigError::Invalid(
            "correlated sources (p > 0) need punctured = true".into(),
        )
        .into());
    } else {
        DeParams::uncorrelated(ens)
    };
    let params = params.with_config(DeConfig {
        max_iters: cfg.get("max_iters")?,
        ..DeConfig::default()
    });
    Ok(if cfg.get("relay")? {
        params.relay()
    } else {
        params
    })
}

fn push_row(out: &mut String, key: &str, value: impl std::fmt::Display) {
    let _ = writeln!(out, "{key},{value}");
}

fn push_rates(out: &mut String, prefix: &str, r: &RateBundle) {
    push_row(out, &format!("{prefix}rs1"), r.rs1);
    push_row(out, &format!("{prefix}rs2"), r.rs2);
    push_row(out, &format!("{prefix}r1"), r.r1);
    push_row(out, &format!("{prefix}r2"), r.r2);
    if r.punctured {
        push_row(out, &format!("{prefix}rtilde1"), r.rtilde1());
        push_row(out, &format!("{prefix}rtilde2"), r.rtilde2());
    }
    push_row(out, &format!("{prefix}rsynd1"), r.rsynd1);
    push_row(out, &format!("{prefix}rsynd2"), r.rsynd2);
    push_row(out, &format!("{prefix}mu1"), r.mu1);
    push_row(out, &format!("{prefix}mu2"), r.mu2);
}

fn push_pentagon(out: &mut String, name: &str, pent: &Pentagon) {
    for (k, v) in [("a", pent.a), ("b", pent.b), ("c", pent.c), ("d", pent.d)] {
        push_row(out, &format!("{name}_{k}"), v);
    }
}

/// Optimal allocation, achievable rate and the two erasure regions of the
/// matching rate design.
pub fn limits(cfg: &Config) -> CmdResult {
    let spec = design_spec(cfg)?;
    let opt = optimal_allocation_with(&spec.channels, spec.p, spec.tie_break)?;
    let mut out = String::from("quantity,value\n");
    push_row(&mut out, "theta1", opt.alloc.theta1);
    push_row(&mut out, "theta2", opt.alloc.theta2);
    push_row(&mut out, "theta_r", opt.alloc.theta_r);
    push_row(&mut out, "rs1", opt.rs1);
    push_row(&mut out, "rs2", opt.rs2);
    push_row(&mut out, "rmax", opt.rmax);
    push_row(&mut out, "case", format!("{:?}", opt.case));
    push_row(&mut out, "kappa", opt.kappa);
    push_row(&mut out, "nu", opt.nu);
    let rates = design_correlated(&spec)?;
    let punctured = spec.is_punctured();
    push_pentagon(&mut out, "region_sr", &achievable_region_sr(&rates, spec.p, punctured)?);
    push_pentagon(&mut out, "region_sd", &achievable_region_sd(&rates, spec.p, punctured)?);
    Ok(out)
}

/// Target rates and an integer degree fit.
pub fn design(cfg: &Config) -> Result<(String, BilayerEnsemble), CliError> {
    let spec = design_spec(cfg)?;
    let rates = design_correlated(&spec)?;
    let fit = fit_degrees(&rates, cfg.get("r_max")?, cfg.get("m_base")?)?;
    let mut out = String::from("quantity,value\n");
    push_row(&mut out, "punctured", rates.punctured);
    if let Some(r) = rates.rprime {
        push_row(&mut out, "rprime", r);
    }
    push_rates(&mut out, "target_", &rates);
    for u in 0..2 {
        push_row(&mut out, &format!("l{}", u + 1), fit.first[u].l);
        push_row(&mut out, &format!("r{}", u + 1), fit.first[u].r);
        push_row(&mut out, &format!("ls{}", u + 1), fit.synd[u].l);
        push_row(&mut out, &format!("rs{}", u + 1), fit.synd[u].r);
        push_row(&mut out, &format!("m{}", u + 1), fit.m[u]);
    }
    push_rates(&mut out, "achieved_", &fit.achieved);
    push_row(&mut out, "max_rate_gap", fit.max_rate_gap());
    let ens = fit.ensemble(cfg.get("chain_length")?, cfg.get("window")?)?;
    Ok((out, ens))
}

/// Ray thresholds, optionally over several windows, or the single-layer
/// equivalence check.
pub fn de(cfg: &Config) -> CmdResult {
    match cfg.raw("de_mode") {
        "rays" => {}
        "point" => return point(cfg),
        "lemma1" => return lemma1(cfg),
        other => {
            return Err(ConfigError::Invalid(format!(
                "de_mode must be `rays`, `point` or `lemma1`, got `{other}`"
            ))
            .into())
        }
    }
    let ens = ensemble(cfg)?;
    let mut windows: Vec<usize> = cfg.get_list("windows", ',')?;
    if windows.is_empty() {
        windows.push(ens.window);
    }
    let dirs = cfg.get_directions("rays")?;
    let tol: f64 = cfg.get("bisect_tol")?;
    let mut out = String::from("window,dir_1,dir_2,threshold,eps_1,eps_2\n");
    for w in windows {
        let params = de_params(cfg, ens.with_window(w))?;
        for &dir in &dirs {
            let r = threshold_on_ray((0.0, 0.0), dir, &params, tol)?;
            let (e1, e2) = r.point((0.0, 0.0), dir);
            let _ = writeln!(out, "{w},{},{},{},{e1},{e2}", dir.0, dir.1, r.t);
        }
    }
    Ok(out)
}

/// One run at `(eps_s1d, eps_s2d)`; hitting the iteration cap is an error.
fn point(cfg: &Config) -> CmdResult {
    let params = de_params(cfg, ensemble(cfg)?)?;
    let eps = [cfg.get("eps_s1d")?, cfg.get("eps_s2d")?];
    let r = run_de(&params, eps)?;
    Ok(format!(
        "eps_1,eps_2,decodable,iterations,h_1,h_2\n{},{},{},{},{},{}\n",
        eps[0], eps[1], r.converged, r.iterations, r.h[0], r.h[1]
    ))
}

fn lemma1(cfg: &Config) -> CmdResult {
    let (l, ls, r): (u32, u32, u32) = (cfg.get("l1")?, cfg.get("ls1")?, cfg.get("r1")?);
    let eps: f64 = cfg.get("eps_s1d")?;
    let iters: usize = cfg.get("lemma_iters")?;
    let diff = lemma1_equivalence_check(
        l,
        ls,
        r,
        cfg.get("chain_length")?,
        cfg.get("window")?,
        eps,
        iters,
    )?;
    Ok(format!(
        "l,ls,r,eps,iterations,max_difference\n{l},{ls},{r},{eps},{iters},{diff}\n"
    ))
}

/// Highest decodable `eps_2` on each grid column.
pub fn region(cfg: &Config) -> CmdResult {
    let params = de_params(cfg, ensemble(cfg)?)?;
    let map = region_scan(cfg.get("step")?, &params)?;
    let mut out = String::from("eps_1,eps_2_max\n");
    for (i, &h) in map.heights.iter().enumerate() {
        if h > 0 {
            let _ = writeln!(out, "{},{}", map.axis[i], map.axis[h - 1]);
        } else {
            let _ = writeln!(out, "{},", map.axis[i]);
        }
    }
    Ok(out)
}

/// EXIT values over the square grid.
pub fn exit(cfg: &Config) -> CmdResult {
    let params = de_params(cfg, ensemble(cfg)?)?;
    let step: f64 = cfg.get("step")?;
    if !(step > 0.0 && step <= 0.5) {
        return Err(ConfigError::Invalid(format!("step {step} must lie in (0, 0.5]")).into());
    }
    let axis = grid_axis(step);
    let mut out = String::from("eps_1,eps_2,h_1,h_2,settled\n");
    for pt in exit_surface(&params, &axis, &axis)? {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            pt.eps1, pt.eps2, pt.h[0], pt.h[1], pt.settled
        );
    }
    Ok(out)
}

/// Erasure rates along a ray of destination erasure probabilities.
pub fn simulate(cfg: &Config, seed: u64) -> CmdResult {
    let ens = ensemble(cfg)?;
    let base = channels(cfg)?;
    let p: f64 = cfg.get("p")?;
    let punctured: bool = cfg.get::<bool>("punctured")? || p > 0.0;
    let (from, to): (f64, f64) = (cfg.get("sweep_from")?, cfg.get("sweep_to")?);
    let n: usize = cfg.get("sweep_points")?;
    let dirs = cfg.get_directions("sweep_dir")?;
    let [dir] = dirs[..] else {
        return Err(ConfigError::Invalid("sweep_dir must hold exactly one direction".into()).into());
    };
    if n == 0 {
        return Err(ConfigError::Invalid("sweep_points must be >= 1".into()).into());
    }
    let points = (0..n)
        .map(|i| {
            let t = if n == 1 {
                from
            } else {
                from + (to - from) * i as f64 / (n - 1) as f64
            };
            ChannelSet::new(
                base.eps_s1r,
                base.eps_s2r,
                t * dir.0,
                t * dir.1,
                base.eps_rd,
            )
        })
        .collect::<Result<Vec<_>, _>>()?;
    let inst = sample_instance(&ens, seed)?;
    let rows = ber_sweep(&inst, &points, p, cfg.get("trials")?, seed, punctured)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &rows, &sweep_metadata(&inst, seed, punctured))?;
    Ok(String::from_utf8(buf).expect("CSV is ASCII"))
}

/// The destination's two-layer matrix `[H1 0; 0 H2; Hs1 Hs2]` of a sampled
/// instance.
pub fn destination_matrix(ens: &BilayerEnsemble, seed: u64) -> Result<SparseBinaryMatrix, CliError> {
    let inst = sample_instance(ens, seed)?;
    let (n1, n2) = (inst.n(0), inst.n(1));
    let hs = SparseBinaryMatrix::hconcat(&inst.hs[0], &inst.hs[1])?;
    Ok(SparseBinaryMatrix::stack(
        n1 + n2,
        &[(&inst.h[0], 0), (&inst.h[1], n1), (&hs, 0)],
    )?)
}
