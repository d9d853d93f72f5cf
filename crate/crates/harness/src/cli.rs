//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kljn_lab::noise::{gen_gblwn, quality_report, scale_johnson};
use kljn_lab::vmg::vmg_levels;
use kljn_lab::{BitSituation, Quantity, VmgConfig};
use serde::Serialize;

use crate::error::HarnessError;
use crate::report::{emit_report, write_report, MonteCarloReport};
use crate::runner::{run_experiment_with_threads, run_sweep, threads_from_env, SweepParam};
use crate::spec::{parse_config, AttackId, ExperimentSpec, Knowledge, OutputFormat, SchemeKind};

type Res<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Parser)]
#[command(
    name = "kljn-lab",
    version,
    about = "KLJN key-exchange attack laboratory",
    arg_required_else_help = true
)]
pub struct Cli {
    /// Flat `key = value` file of default flag values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate one band-limited Gaussian noise trace and report its quality.
    NoiseGen(NoiseArgs),
    /// Simulate plain key exchange; p is Bob's decoding rate.
    KljnRun(RunArgs),
    /// Derive VMG noise levels and temperatures.
    VmgDerive(VmgArgs),
    /// Run one attack experiment.
    Attack {
        #[arg(value_enum)]
        kind: AttackKind,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Repeat an experiment over a list of parameter values.
    Sweep {
        #[arg(value_enum)]
        kind: AttackKind,
        /// Parameter to vary.
        #[arg(long, value_enum)]
        over: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        values: Vec<f64>,
        #[command(flatten)]
        args: RunArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AttackKind {
    DetOhm,
    DetOnebit,
    DetEliminate,
    StatChannel,
    StatSource,
    ZeroCrossing,
    Nonlinearity,
}

impl From<AttackKind> for AttackId {
    fn from(k: AttackKind) -> Self {
        match k {
            AttackKind::DetOhm => Self::DetOhm,
            AttackKind::DetOnebit => Self::DetOnebit,
            AttackKind::DetEliminate => Self::DetEliminate,
            AttackKind::StatChannel => Self::StatChannel,
            AttackKind::StatSource => Self::StatSource,
            AttackKind::ZeroCrossing => Self::ZeroCrossing,
            AttackKind::Nonlinearity => Self::Nonlinearity,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// High resistance, ohms [default: 100000].
    #[arg(long)]
    pub rh: Option<f64>,
    /// Low resistance, ohms [default: 10000].
    #[arg(long)]
    pub rl: Option<f64>,
    /// Effective noise temperature, kelvin [default: 1e18].
    #[arg(long)]
    pub teff: Option<f64>,
    /// Noise bandwidth, hertz [default: 500].
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Samples per bit exchange period [default: 1000].
    #[arg(long)]
    pub samples: Option<usize>,
    /// Monte-Carlo runs per point [default: 200].
    #[arg(long)]
    pub runs: Option<usize>,
    /// Master seed [default: 0].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; CSV also writes `<name>.runs.csv`. Stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format [default: csv].
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Eve's noise-mixing multiplier.
    #[arg(long)]
    pub m: Option<f64>,
    /// Eve's instrument resolution in bits.
    #[arg(long)]
    pub delta_bits: Option<u32>,
    /// Second-order distortion coefficient, 1/V.
    #[arg(long, allow_hyphen_values = true)]
    pub b: Option<f64>,
    /// Third-order distortion coefficient, 1/V².
    #[arg(long, allow_hyphen_values = true)]
    pub c: Option<f64>,
    /// Comma-separated window lengths for the nonlinearity attack.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Option<Vec<usize>>,
    /// Zero-crossing interpolation factor [default: 16].
    #[arg(long)]
    pub oversample: Option<usize>,
    #[arg(long)]
    pub rha: Option<f64>,
    #[arg(long)]
    pub rla: Option<f64>,
    #[arg(long)]
    pub rhb: Option<f64>,
    #[arg(long)]
    pub rlb: Option<f64>,
    /// Mean-square voltage of Alice's low-resistor generator, V².
    #[arg(long)]
    pub u2la: Option<f64>,
    /// Key-exchange scheme [default: kljn].
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeKind>,
    /// Generators known to Eve [default: bilateral].
    #[arg(long, value_enum)]
    pub knowledge: Option<Knowledge>,
    /// Wire quantity for channel attacks: u, i or p [default: u].
    #[arg(long)]
    pub quantity: Option<String>,
    /// Fixed bit situation (HH, LL, HL, LH) instead of a random draw.
    #[arg(long)]
    pub truth: Option<String>,
    /// Independent streams averaged per generator [default: 4].
    #[arg(long)]
    pub ensemble: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct NoiseArgs {
    /// Trace length, a power of two [default: 16384].
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub ensemble: Option<usize>,
    /// Resistance for Johnson scaling; unit RMS when absent.
    #[arg(long)]
    pub r: Option<f64>,
    /// Temperature for Johnson scaling [default: 1e18].
    #[arg(long)]
    pub teff: Option<f64>,
    /// Segments of the averaged periodogram [default: 16].
    #[arg(long)]
    pub segments: Option<usize>,
    /// File for the samples; only the quality summary is printed when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Clone, Args)]
pub struct VmgArgs {
    #[arg(long)]
    pub rha: Option<f64>,
    #[arg(long)]
    pub rla: Option<f64>,
    #[arg(long)]
    pub rhb: Option<f64>,
    /// Bob's low resistor; with `--fck1` it is derived instead.
    #[arg(long)]
    pub rlb: Option<f64>,
    #[arg(long)]
    pub u2la: Option<f64>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Zero-net-power variant: R_LB = R_HB·R_LA/R_HA.
    #[arg(long)]
    pub fck1: bool,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

/// Parses `argv` (program name first), runs, and returns the exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    match execute(&cli, &mut std::io::stdout().lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Runs a parsed command, writing console output to `out`.
pub fn execute(cli: &Cli, out: &mut dyn std::io::Write) -> Res<()> {
    let file = match &cli.config {
        Some(p) => parse_config(&std::fs::read_to_string(p)?)?,
        None => BTreeMap::new(),
    };
    let cfg = Config(&file);
    let started = Instant::now();
    let finish = |spec: &ExperimentSpec, report: MonteCarloReport, out: &mut dyn std::io::Write| {
        let r = finish(spec, report, out);
        eprintln!("finished in {:.3} s", started.elapsed().as_secs_f64());
        r
    };
    match &cli.command {
        Command::NoiseGen(a) => noise_gen(a, &cfg, out),
        Command::VmgDerive(a) => vmg_derive(a, &cfg, out),
        Command::KljnRun(a) => {
            let spec = build_spec(AttackId::KljnRun, a, &cfg)?;
            finish(&spec, run_experiment_with_threads(&spec, threads_from_env())?, out)
        }
        Command::Attack { kind, args } => {
            let spec = build_spec((*kind).into(), args, &cfg)?;
            finish(&spec, run_experiment_with_threads(&spec, threads_from_env())?, out)
        }
        Command::Sweep {
            kind,
            over,
            values,
            args,
        } => {
            let spec = build_spec((*kind).into(), args, &cfg)?;
            finish(&spec, run_sweep(&spec, *over, values, threads_from_env())?, out)
        }
    }
}

/// Config-file lookup; command-line values take precedence.
struct Config<'a>(&'a BTreeMap<String, String>);

impl Config<'_> {
    fn get<T: FromStr>(&self, cli: Option<T>, key: &str) -> Res<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.0.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| HarnessError::Validation(vec![format!("config key {key}: cannot parse {v:?}")])),
        }
    }

    fn get_enum<T: ValueEnum>(&self, cli: Option<T>, key: &str) -> Res<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        self.0
            .get(key)
            .map(|v| {
                T::from_str(v, true)
                    .map_err(|_| HarnessError::Validation(vec![format!("config key {key}: unknown value {v:?}")]))
            })
            .transpose()
    }

    fn get_list<T: FromStr>(&self, cli: Option<Vec<T>>, key: &str) -> Res<Option<Vec<T>>> {
        if cli.is_some() {
            return Ok(cli);
        }
        self.0
            .get(key)
            .map(|v| {
                v.split(',')
                    .map(|x| x.trim().parse())
                    .collect::<Result<Vec<T>, _>>()
                    .map_err(|_| HarnessError::Validation(vec![format!("config key {key}: cannot parse {v:?}")]))
            })
            .transpose()
    }
}

fn build_spec(attack: AttackId, a: &RunArgs, cfg: &Config) -> Res<ExperimentSpec> {
    let mut s = ExperimentSpec::new(attack);
    s.scheme = cfg.get_enum(a.scheme, "scheme")?.unwrap_or_default();
    let kljn = s.scheme == SchemeKind::Kljn;
    s.r_h = cfg.get(a.rh, "rh")?.or(kljn.then_some(1e5));
    s.r_l = cfg.get(a.rl, "rl")?.or(kljn.then_some(1e4));
    s.t_eff = cfg.get(a.teff, "teff")?.or(kljn.then_some(1e18));
    s.bandwidth = cfg.get(a.bandwidth, "bandwidth")?.unwrap_or(s.bandwidth);
    s.samples_per_bep = cfg.get(a.samples, "samples")?.unwrap_or(s.samples_per_bep);
    s.runs = cfg.get(a.runs, "runs")?.unwrap_or(s.runs);
    s.master_seed = cfg.get(a.seed, "seed")?.unwrap_or(s.master_seed);
    s.output_path = cfg.get(a.out.clone(), "out")?;
    s.output_format = cfg.get_enum(a.format, "format")?.unwrap_or_default();
    s.m = cfg.get(a.m, "m")?;
    s.delta_bits = cfg.get(a.delta_bits, "delta-bits")?;
    s.b = cfg.get(a.b, "b")?;
    s.c = cfg.get(a.c, "c")?;
    s.gamma = cfg.get_list(a.gamma.clone(), "gamma")?.unwrap_or_default();
    s.factor = cfg.get(a.oversample, "oversample")?.unwrap_or(s.factor);
    s.r_ha = cfg.get(a.rha, "rha")?;
    s.r_la = cfg.get(a.rla, "rla")?;
    s.r_hb = cfg.get(a.rhb, "rhb")?;
    s.r_lb = cfg.get(a.rlb, "rlb")?;
    s.u2_la = cfg.get(a.u2la, "u2la")?;
    s.knowledge = cfg.get_enum(a.knowledge, "knowledge")?.unwrap_or_default();
    s.ensemble = cfg.get(a.ensemble, "ensemble")?.unwrap_or(s.ensemble);
    if let Some(q) = cfg.get(a.quantity.clone(), "quantity")? {
        s.quantity = Quantity::from_str(&q).map_err(|e| HarnessError::Validation(vec![e.to_string()]))?;
    }
    if let Some(t) = cfg.get(a.truth.clone(), "truth")? {
        s.truth = Some(BitSituation::from_str(&t).map_err(|e| HarnessError::Validation(vec![e.to_string()]))?);
    }
    s.validate()?;
    Ok(s)
}

fn finish(spec: &ExperimentSpec, report: MonteCarloReport, out: &mut dyn std::io::Write) -> Res<()> {
    match &spec.output_path {
        Some(path) => {
            write_report(&report, path, spec.output_format)?;
            writeln!(
                out,
                "p = {} sigma = {} runs = {}",
                report.p,
                report.sigma,
                report.per_run.len()
            )?;
        }
        None => out.write_all(&emit_report(&report, spec.output_format)?)?,
    }
    Ok(())
}

#[derive(Serialize)]
struct NoiseSummary<'a> {
    samples: usize,
    bandwidth: f64,
    dt: f64,
    rms: f64,
    mean: f64,
    std: f64,
    skewness: f64,
    excess_kurtosis: f64,
    lag1_autocorr: f64,
    in_band_psd: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    trace: Option<&'a [f64]>,
}

fn noise_gen(a: &NoiseArgs, cfg: &Config, out: &mut dyn std::io::Write) -> Res<()> {
    let n = cfg.get(a.samples, "samples")?.unwrap_or(16384);
    let bw = cfg.get(a.bandwidth, "bandwidth")?.unwrap_or(500.0);
    let seed = cfg.get(a.seed, "seed")?.unwrap_or(0);
    let ensemble = cfg.get(a.ensemble, "ensemble")?.unwrap_or(4);
    let segments = cfg.get(a.segments, "segments")?.unwrap_or(16);
    let format = cfg.get_enum(a.format, "format")?.unwrap_or_default();
    let mut trace = gen_gblwn::<f64>(n, bw, seed, ensemble)?;
    if let Some(r) = cfg.get(a.r, "r")? {
        trace = scale_johnson(&trace, r, cfg.get(a.teff, "teff")?.unwrap_or(1e18), bw)?;
    }
    let q = quality_report(&trace, segments)?;
    let summary = NoiseSummary {
        samples: trace.len(),
        bandwidth: bw,
        dt: trace.dt(),
        rms: trace.rms(),
        mean: q.mean,
        std: q.std,
        skewness: q.skewness,
        excess_kurtosis: q.excess_kurtosis,
        lag1_autocorr: q.lag1_autocorr,
        in_band_psd: q.in_band_psd_mean(),
        trace: None,
    };
    if let Some(path) = cfg.get(a.out.clone(), "out")? {
        let bytes = match format {
            OutputFormat::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["index", "time", "value"])?;
                for (k, v) in trace.samples().iter().enumerate() {
                    w.write_record([k.to_string(), (k as f64 * trace.dt()).to_string(), v.to_string()])?;
                }
                w.into_inner().map_err(|e| HarnessError::Io(e.into_error()))?
            }
            OutputFormat::Json => {
                let mut b = serde_json::to_vec_pretty(&NoiseSummary {
                    trace: Some(trace.samples()),
                    ..summary
                })?;
                b.push(b'\n');
                b
            }
        };
        std::fs::write(path, bytes)?;
    }
    match format {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &summary)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            let mut s = String::new();
            let rows = [
                ("samples", summary.samples as f64),
                ("bandwidth", summary.bandwidth),
                ("rms", summary.rms),
                ("mean", summary.mean),
                ("std", summary.std),
                ("skewness", summary.skewness),
                ("excess_kurtosis", summary.excess_kurtosis),
                ("lag1_autocorr", summary.lag1_autocorr),
                ("in_band_psd", summary.in_band_psd),
            ];
            s.push_str("quantity,value\n");
            for (k, v) in rows {
                writeln!(s, "{k},{v}").expect("write to string");
            }
            out.write_all(s.as_bytes())?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct VmgSummary {
    r_ha: f64,
    r_la: f64,
    r_hb: f64,
    r_lb: f64,
    u2_la: f64,
    u2_ha: f64,
    u2_lb: f64,
    u2_hb: f64,
    t_la: f64,
    t_ha: f64,
    t_lb: f64,
    t_hb: f64,
}

fn vmg_derive(a: &VmgArgs, cfg: &Config, out: &mut dyn std::io::Write) -> Res<()> {
    let mut missing = Vec::new();
    let mut need = |v: Option<f64>, k: &str| {
        if v.is_none() {
            missing.push(format!("missing {k}"));
        }
        v.unwrap_or(f64::NAN)
    };
    let r_ha = need(cfg.get(a.rha, "rha")?, "rha");
    let r_la = need(cfg.get(a.rla, "rla")?, "rla");
    let r_hb = need(cfg.get(a.rhb, "rhb")?, "rhb");
    let u2_la = need(cfg.get(a.u2la, "u2la")?, "u2la");
    let rlb = cfg.get(a.rlb, "rlb")?;
    if !a.fck1 && rlb.is_none() {
        missing.push("missing rlb".into());
    }
    if !missing.is_empty() {
        return Err(HarnessError::Validation(missing));
    }
    let bw = cfg.get(a.bandwidth, "bandwidth")?.unwrap_or(500.0);
    let config = if a.fck1 {
        VmgConfig::fck1(r_ha, r_la, r_hb, u2_la, bw)?
    } else {
        VmgConfig::new(r_ha, r_la, r_hb, rlb.unwrap_or(f64::NAN), u2_la, bw)?
    };
    let d = vmg_levels(&config)?;
    let s = VmgSummary {
        r_ha,
        r_la,
        r_hb,
        r_lb: config.r_lb,
        u2_la,
        u2_ha: d.u2_ha,
        u2_lb: d.u2_lb,
        u2_hb: d.u2_hb,
        t_la: d.t_la,
        t_ha: d.t_ha,
        t_lb: d.t_lb,
        t_hb: d.t_hb,
    };
    match cfg.get_enum(a.format, "format")?.unwrap_or_default() {
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut *out, &s)?;
            writeln!(out)?;
        }
        OutputFormat::Csv => {
            writeln!(out, "quantity,value")?;
            for (k, v) in [
                ("r_ha", s.r_ha),
                ("r_la", s.r_la),
                ("r_hb", s.r_hb),
                ("r_lb", s.r_lb),
                ("u2_la", s.u2_la),
                ("u2_ha", s.u2_ha),
                ("u2_lb", s.u2_lb),
                ("u2_hb", s.u2_hb),
                ("t_la", s.t_la),
                ("t_ha", s.t_ha),
                ("t_lb", s.t_lb),
                ("t_hb", s.t_hb),
            ] {
                writeln!(out, "{k},{v}")?;
            }
        }
    }
    Ok(())
}
