use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use rip_lab::bounds::{self, BoundParams, ComplexityModel, Constants, Incoherence};
use rip_lab::groups::{self, AveragingMode};
use rip_lab::harness::{self, ExperimentConfig, OpExportConfig};
use rip_lab::linalg::CMatrix;
use rip_lab::measurement::{Instrument, MeasurementOperator, SensingOperator};
use rip_lab::nets::{self, TensorAtomSet};
use rip_lab::rip;
use rip_lab::rng;
use rip_lab::{GroupDescriptor, SignalVector, SparsityModel};

#[derive(Parser)]
#[command(name = "rip-lab", version, about = "Restricted isometry experiments with group-structured operators")]
struct Cli {
    /// Worker threads (overrides config files).
    #[arg(long, global = true, env = "RIP_LAB_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Group checks.
    Group {
        #[command(subcommand)]
        cmd: GroupCmd,
    },
    /// RIP estimation.
    Rip {
        #[command(subcommand)]
        cmd: RipCmd,
    },
    /// ε-nets and the Gaussian dual-norm tail.
    Net {
        #[command(subcommand)]
        cmd: NetCmd,
    },
    /// Sample-complexity bounds.
    Bound {
        #[command(subcommand)]
        cmd: BoundCmd,
    },
    /// Operator export.
    Op {
        #[command(subcommand)]
        cmd: OpCmd,
    },
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Isotropy deviation `‖avg σ^*Tσ − tr(T)/N Id‖_F` over random probes.
    Verify {
        #[arg(long)]
        group: GroupDescriptor,
        #[arg(long, default_value_t = 5)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Use Monte Carlo averaging with this many draws.
        #[arg(long)]
        mc_trials: Option<usize>,
        /// Exit with status 1 when the deviation exceeds this.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EstimatorKind {
    Exact,
    Mc,
    Ascent,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    group: GroupDescriptor,
    /// `l1:N`, `schatten:n:q`, `tensor:n:d` or `tensor-real:n:d`.
    #[arg(long)]
    model: SparsityModel,
    /// `all-ones`, `identity`, `gaussian:SEED` or `gaussian-real:SEED`.
    #[arg(long, default_value = "all-ones")]
    instrument: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    s: f64,
    #[arg(long, value_enum, default_value = "mc")]
    estimator: EstimatorKind,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    #[arg(long)]
    seed: u64,
}

#[derive(Subcommand)]
enum RipCmd {
    /// Draw one operator and estimate its RIP deviation.
    Estimate(EstimateArgs),
    /// Run a scaling experiment from a JSON config.
    Scaling {
        #[arg(long)]
        config: PathBuf,
        /// CSV output (default: config's path, else stdout).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        redraws: Option<usize>,
    },
}

#[derive(Subcommand)]
enum NetCmd {
    /// Build an ε-net on the unit sphere of R^n.
    Build {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        validate: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gaussian dual-norm exceedance rates.
    Tail {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 400)]
        draws: usize,
        #[arg(long)]
        zeta: f64,
        /// Net radius; defaults to 1/(3d).
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Theorem {
    /// Both sufficient conditions of the general theorem.
    General,
    Polytope,
    Tensor,
    Gordon,
}

#[derive(Subcommand)]
enum BoundCmd {
    /// Smallest m satisfying a sample-complexity condition.
    Predict {
        #[arg(long, value_enum)]
        theorem: Theorem,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        zeta: f64,
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        d: Option<u64>,
        /// Polytope atom count M.
        #[arg(long)]
        atoms: Option<u64>,
        /// General theorem: `l1:N`, `schatten:n:q`, `tensor:n:d`, `polytope:M` or `dual-type:T`.
        #[arg(long)]
        model: Option<String>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1)]
        block_dim: u64,
        /// Instrument incoherence α (also used for ‖v‖).
        #[arg(long, default_value_t = 1.0)]
        incoherence: f64,
        /// Separate ‖v‖ moment; defaults to the incoherence.
        #[arg(long)]
        operator_norm: Option<f64>,
        #[arg(long)]
        type_constant: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1.0)]
        big_c: f64,
    },
}

#[derive(Subcommand)]
enum OpCmd {
    /// Densify an operator to a column-major complex128 file with a JSON sidecar.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_json(v: &Value) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn parse_instrument(spec: &str, n: usize) -> Result<Instrument> {
    let ins = match spec.split_once(':') {
        None if spec == "all-ones" => Instrument::all_ones(n),
        None if spec == "identity" => Instrument::identity(n),
        Some(("gaussian", seed)) => Instrument::gaussian(n, seed.parse()?, false)?,
        Some(("gaussian-real", seed)) => Instrument::gaussian(n, seed.parse()?, true)?,
        _ => bail!("unrecognized instrument `{spec}`"),
    };
    Ok(ins)
}

fn random_probe(n: usize, seed: u64, i: u64) -> CMatrix {
    let v = SignalVector::complex_gaussian(n * n, &mut rng::stream(seed, &[i]));
    CMatrix::from_row_slice(n, n, v.entries())
}

fn group_verify(group: GroupDescriptor, probes: usize, seed: u64, mc: Option<usize>, tol: f64) -> Result<bool> {
    group.validate()?;
    let n = group.dim();
    let mode = match mc {
        Some(trials) => AveragingMode::MonteCarlo { trials, seed },
        None => AveragingMode::Exact,
    };
    let mut worst: f64 = 0.0;
    for i in 0..probes {
        worst = worst.max(groups::verify_isotropy(&group, mode, &random_probe(n, seed, i as u64))?);
    }
    let pass = mc.is_some() || worst <= tol;
    print_json(&json!({
        "group": group.to_string(),
        "dim": n,
        "order": group.order().map(|o| o.to_string()),
        "mode": if mc.is_some() { "monte_carlo" } else { "exact" },
        "probes": probes,
        "max_deviation": worst,
        "tolerance": tol,
        "pass": pass,
    }))?;
    Ok(pass)
}

fn rip_estimate(a: EstimateArgs) -> Result<()> {
    let n = a.group.dim();
    let ins = parse_instrument(&a.instrument, n)?;
    let op = MeasurementOperator::draw(a.group.clone(), ins, a.m, &mut rng::stream(a.seed, &[0]))?;
    let est_seed = rng::derive_seed(a.seed, &[1]);
    let est = match a.estimator {
        EstimatorKind::Exact => {
            if a.s.fract() != 0.0 {
                bail!("exact estimation needs integer s");
            }
            rip::exact_canonical_rip(&op.to_dense(), a.s as usize)?
        }
        EstimatorKind::Mc => rip::monte_carlo_rip(&op, &a.model, a.s, a.trials, est_seed, None)?,
        EstimatorKind::Ascent => rip::ascent_rip(&op, &a.model, a.s, a.restarts, a.steps, est_seed, None)?,
    };
    print_json(&json!({
        "group": a.group.to_string(),
        "model": a.model.label(),
        "m": a.m,
        "s": a.s,
        "seed": a.seed,
        "delta": est.delta,
        "rip_constant": est.rip_constant(),
        "kind": est.kind,
        "method": est.method,
        "samples": est.samples,
        "degenerate": est.degenerate,
    }))
}

fn rip_scaling(
    config: PathBuf,
    out: Option<PathBuf>,
    manifest: Option<PathBuf>,
    seed: Option<u64>,
    redraws: Option<usize>,
    threads: Option<usize>,
) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = redraws {
        cfg.redraws = r;
    }
    if out.is_some() {
        cfg.output.csv = out;
    }
    if manifest.is_some() {
        cfg.output.manifest = manifest;
    }
    let run = match &cfg.output.csv {
        Some(p) => harness::run_to(&cfg, threads, BufWriter::new(File::create(p)?))?,
        None => harness::run_to(&cfg, threads, io::stdout().lock())?,
    };
    log::info!("manifest hash {}", run.manifest.manifest_hash);
    Ok(())
}

fn net_build(n: usize, eps: f64, seed: u64, validate: usize, out: Option<PathBuf>) -> Result<()> {
    let net = nets::sphere_net(n, eps, seed)?;
    let radius = net.covering_radius_estimate(validate, seed.wrapping_add(1));
    let report = json!({
        "cardinality": net.len(),
        "cardinality_bound": net.cardinality_bound(),
        "separation": net.separation(),
        "covering_radius_estimate": radius,
        "validation_samples": validate,
        "covered": radius <= eps,
        "net": net,
    });
    match out {
        Some(p) => harness::write_json(&p, &report)?,
        None => print_json(&report)?,
    }
    Ok(())
}

fn net_tail(n: usize, d: usize, draws: usize, zeta: f64, eps: Option<f64>, seed: u64) -> Result<()> {
    let net = nets::sphere_net(n, eps.unwrap_or_else(|| nets::admissible_epsilon(d)), seed)?;
    let atoms = TensorAtomSet::new(net, d)?;
    let rep = nets::gaussian_dual_tail_experiment(&atoms, draws, zeta, seed)?;
    let mut v = serde_json::to_value(&rep)?;
    v["net_size"] = json!(atoms.base.len());
    v["log_atoms"] = json!(atoms.log_count());
    v["within_three_sigma"] = json!(rep.deflated_within(3.0));
    print_json(&v)
}

fn parse_complexity(spec: &str) -> Result<ComplexityModel> {
    if let Some(m) = spec.strip_prefix("polytope:") {
        return Ok(ComplexityModel::AtomicPolytope { atoms: m.parse()? });
    }
    if let Some(t) = spec.strip_prefix("dual-type:") {
        return Ok(ComplexityModel::DualType { type_constant: t.parse()? });
    }
    let model: SparsityModel = spec.parse()?;
    Ok(ComplexityModel::from(&model))
}

#[allow(clippy::too_many_arguments)]
fn bound_predict(
    theorem: Theorem,
    s: f64,
    delta: f64,
    zeta: f64,
    n: Option<u64>,
    d: Option<u64>,
    atoms: Option<u64>,
    model: Option<String>,
    p: f64,
    block_dim: u64,
    incoherence: f64,
    operator_norm: Option<f64>,
    type_constant: Option<f64>,
    consts: Constants,
) -> Result<()> {
    let params = BoundParams {
        s,
        delta,
        zeta,
        p,
        block_dim,
        type_constant,
        constants: consts,
    };
    let inc = Incoherence {
        alpha: incoherence,
        operator_norm: operator_norm.unwrap_or(incoherence),
    };
    let need = |v: Option<u64>, name: &str| v.with_context(|| format!("--{name} is required for this theorem"));
    let (formula, m, iterations, extra) = match theorem {
        Theorem::General => {
            let model = parse_complexity(model.as_deref().context("--model is required")?)?;
            let pred = bounds::predict_m(&params, &model, &inc)?;
            let chk = bounds::check_conditions(&params, &model, &inc, pred.m)?;
            (
                "m^{1/p}/(1+ln m)^{e(p)/2} >= c M_{p,a}(K) sqrt(s) a/delta and m >= c delta^-2 s ln(1/zeta) |v|^2",
                pred.m,
                Some(pred.iterations),
                json!({ "model": model, "check": chk, "incoherence": inc }),
            )
        }
        Theorem::Polytope => {
            let a = need(atoms, "atoms")?;
            let pred = bounds::polytope_m(&params, a, incoherence)?;
            (
                "m >= c delta^-2 s max((1+ln m)(1+ln md)^2(1+ln M), ln(1/zeta)) |u|^2",
                pred.m,
                Some(pred.iterations),
                json!({ "atoms": a, "incoherence": incoherence, "block_dim": block_dim }),
            )
        }
        Theorem::Tensor => {
            let (n, d) = (need(n, "n")?, need(d, "d")?);
            let pred = bounds::tensor_m(n, d, s, delta, zeta, consts.c)?;
            (
                "m >= c delta^-2 s (1+ln m)^3 (1+3nd(1+ln d)+ln(1/zeta))^2",
                pred.m,
                Some(pred.iterations),
                json!({ "n": n, "d": d, "gaussian_baseline_m": bounds::gordon_gaussian_m(n, d, delta, zeta, consts.c)? }),
            )
        }
        Theorem::Gordon => {
            let (n, d) = (need(n, "n")?, need(d, "d")?);
            (
                "m >= c delta^-2 (nd(1+ln d)+ln(1/zeta))",
                bounds::gordon_gaussian_m(n, d, delta, zeta, consts.c)?,
                None,
                json!({ "n": n, "d": d }),
            )
        }
    };
    print_json(&json!({
        "theorem": theorem.to_possible_value().map(|v| v.get_name().to_string()),
        "formula": formula,
        "inputs": { "s": s, "delta": delta, "zeta": zeta, "p": p },
        "constants": consts,
        "m": m,
        "iterations": iterations,
        "details": extra,
    }))
}

fn op_export(config: PathBuf, out: PathBuf) -> Result<()> {
    let cfg = OpExportConfig::load(&config).with_context(|| format!("loading {}", config.display()))?;
    let header = harness::export_operator(&cfg, &out)?;
    print_json(&serde_json::to_value(header)?)
}

fn dispatch(cli: Cli) -> Result<bool> {
    let threads = cli.threads;
    let t = harness::resolve_threads(threads, None)?;
    match cli.command {
        Command::Group {
            cmd:
                GroupCmd::Verify {
                    group,
                    probes,
                    seed,
                    mc_trials,
                    tol,
                },
        } => return harness::with_threads(t, || group_verify(group, probes, seed, mc_trials, tol))?,
        Command::Rip { cmd: RipCmd::Estimate(a) } => harness::with_threads(t, || rip_estimate(a))??,
        Command::Rip {
            cmd:
                RipCmd::Scaling {
                    config,
                    out,
                    manifest,
                    seed,
                    redraws,
                },
        } => rip_scaling(config, out, manifest, seed, redraws, threads)?,
        Command::Net {
            cmd:
                NetCmd::Build {
                    n,
                    eps,
                    seed,
                    validate,
                    out,
                },
        } => harness::with_threads(t, || net_build(n, eps, seed, validate, out))??,
        Command::Net {
            cmd:
                NetCmd::Tail {
                    n,
                    d,
                    draws,
                    zeta,
                    eps,
                    seed,
                },
        } => harness::with_threads(t, || net_tail(n, d, draws, zeta, eps, seed))??,
        Command::Bound {
            cmd:
                BoundCmd::Predict {
                    theorem,
                    s,
                    delta,
                    zeta,
                    n,
                    d,
                    atoms,
                    model,
                    p,
                    block_dim,
                    incoherence,
                    operator_norm,
                    type_constant,
                    c,
                    big_c,
                },
        } => bound_predict(
            theorem,
            s,
            delta,
            zeta,
            n,
            d,
            atoms,
            model,
            p,
            block_dim,
            incoherence,
            operator_norm,
            type_constant,
            Constants { c, big_c },
        )?,
        Command::Op {
            cmd: OpCmd::Export { config, out },
        } => op_export(config, out)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
