//! Monte-Carlo orchestration.
//!
//! Run `r` of an experiment draws every random source from the streams
//! keyed `(master_seed, r, label)`, so results depend neither on worker
//! count nor on scheduling. Per-run results are collected in run order.

use std::collections::BTreeMap;

use kljn_lab::attack::deterministic::{
    elimination_attack, ohms_law_attack, one_bit_power_attack, power_signs, EveKnowledge,
};
use kljn_lab::attack::nonlinearity::{temperature_sweep, DistortionSpec};
use kljn_lab::attack::statistical::{
    channel_ccc_attack, complete_from_alice, probe_records, source_ccc_attack, unilateral_channel_attack,
    unilateral_finish,
};
use kljn_lab::attack::zero_crossing::{zc_attack, SchemeSimulator, ZcReport};
use kljn_lab::attack::AttackOutcome;
use kljn_lab::circuit::{draw_situation, expected_mean_square, net_power, unit_noise};
use kljn_lab::noise::{johnson_mean_square, EveMix};
use kljn_lab::seed::labels;
use kljn_lab::stats::{self, binomial_se};
use kljn_lab::vmg::vmg_levels;
use kljn_lab::{BitSituation, KljnConfig, LabError, Party, Resistor, Scheme, SourceSet, VmgConfig};
use rayon::prelude::*;

use crate::error::HarnessError;
use crate::report::{MonteCarloReport, ParamValue, ReportPoint, RunSummary};
use crate::spec::{AttackId, ExperimentSpec, Knowledge, SchemeKind};

/// Environment variable holding the worker-count hint.
pub const THREADS_ENV: &str = "KLJN_LAB_THREADS";

/// Longest window tracked by the one-bit survival diagnostics.
pub const SURVIVAL_STEPS: usize = 16;

type Res<T> = std::result::Result<T, HarnessError>;

/// Worker count from `KLJN_LAB_THREADS`; `None` when unset or unparsable.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n| n > 0)
}

/// Runs `spec` on a pool sized by `KLJN_LAB_THREADS`, or rayon's default.
pub fn run_experiment(spec: &ExperimentSpec) -> Res<MonteCarloReport> {
    run_experiment_with_threads(spec, threads_from_env())
}

/// Runs `spec` on a pool of `threads` workers (`None`: rayon's default).
pub fn run_experiment_with_threads(spec: &ExperimentSpec, threads: Option<usize>) -> Res<MonteCarloReport> {
    spec.validate()?;
    in_pool(threads, || run_validated(spec))
}

/// Runs `spec` once per value of `param`, one report point per value.
pub fn run_sweep(
    spec: &ExperimentSpec,
    param: SweepParam,
    values: &[f64],
    threads: Option<usize>,
) -> Res<MonteCarloReport> {
    if values.is_empty() {
        return Err(HarnessError::Validation(vec!["sweep needs at least one value".into()]));
    }
    // Nonlinearity sweeps its own (T_eff, γ) grid in one pass.
    if spec.attack == AttackId::Nonlinearity && matches!(param, SweepParam::Teff | SweepParam::Gamma) {
        let mut s = spec.clone();
        match param {
            SweepParam::Teff => s.t_eff_list = values.to_vec(),
            _ => s.gamma = values.iter().map(|&v| v as usize).collect(),
        }
        return run_experiment_with_threads(&s, threads);
    }
    let specs: Vec<ExperimentSpec> = values.iter().map(|&v| param.apply(spec, v)).collect();
    for s in &specs {
        s.validate()?;
    }
    in_pool(threads, || {
        let parts = specs.iter().map(run_validated).collect::<Res<Vec<_>>>()?;
        Ok(MonteCarloReport::concat(spec.clone(), parts))
    })
}

/// Parameter a `sweep` varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Teff,
    M,
    DeltaBits,
    B,
    C,
    Gamma,
    Samples,
    Rh,
    Rl,
    Oversample,
}

impl SweepParam {
    fn apply(self, spec: &ExperimentSpec, v: f64) -> ExperimentSpec {
        let mut s = spec.clone();
        match self {
            Self::Teff => s.t_eff = Some(v),
            Self::M => s.m = Some(v),
            Self::DeltaBits => s.delta_bits = Some(v as u32),
            Self::B => s.b = Some(v),
            Self::C => s.c = Some(v),
            Self::Gamma => s.gamma = vec![v as usize],
            Self::Samples => s.samples_per_bep = v as usize,
            Self::Rh => s.r_h = Some(v),
            Self::Rl => s.r_l = Some(v),
            Self::Oversample => s.factor = v as usize,
        }
        s
    }
}

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> Res<T> + Send) -> Res<T> {
    match threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| HarnessError::Validation(vec![format!("cannot start {n} workers: {e}")]))?
            .install(f),
        None => f(),
    }
}

fn run_validated(spec: &ExperimentSpec) -> Res<MonteCarloReport> {
    match spec.attack {
        AttackId::ZeroCrossing => run_zero_crossing(spec),
        AttackId::Nonlinearity => run_nonlinearity(spec),
        _ => run_per_bit(spec),
    }
}

fn kljn_config(spec: &ExperimentSpec) -> Res<KljnConfig<f64>> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| HarnessError::Validation(vec![format!("missing {name}")]));
    Ok(KljnConfig::new(
        need(spec.r_h, "rh")?,
        need(spec.r_l, "rl")?,
        need(spec.t_eff, "teff")?,
        spec.bandwidth,
        spec.samples_per_bep,
    )?)
}

/// One run's scored outcome plus numeric diagnostics to be averaged.
struct RunOut {
    truth: BitSituation,
    outcome: AttackOutcome,
    diag: Vec<(String, f64)>,
    unclassified: bool,
}

struct Ctx<'a> {
    spec: &'a ExperimentSpec,
    config: KljnConfig<f64>,
    scheme: Scheme<f64>,
}

impl Ctx<'_> {
    fn sources(&self, r: u64) -> kljn_lab::Result<SourceSet<f64>> {
        self.scheme
            .sources(self.spec.master_seed, r, self.spec.samples_per_bep, self.spec.ensemble)
    }

    /// Fixed truth if given; otherwise LH for the statistical tables, a
    /// secure draw for the one-bit attack and a draw over all four else.
    fn truth(&self, r: u64) -> BitSituation {
        let allowed: &[BitSituation] = match self.spec.attack {
            AttackId::StatChannel | AttackId::StatSource => &[BitSituation::LH],
            AttackId::DetOnebit => &BitSituation::SECURE,
            _ => &BitSituation::ALL,
        };
        match (self.spec.truth, allowed) {
            (Some(t), _) => t,
            (None, [only]) => *only,
            _ => draw_situation(self.spec.master_seed, r, allowed),
        }
    }
}

fn run_per_bit(spec: &ExperimentSpec) -> Res<MonteCarloReport> {
    let config = kljn_config(spec)?;
    let ctx = Ctx {
        spec,
        config,
        scheme: Scheme::kljn(&config),
    };
    let f: fn(&Ctx, u64, BitSituation) -> kljn_lab::Result<RunOut> = match spec.attack {
        AttackId::KljnRun => kljn_run,
        AttackId::DetOhm => det_ohm,
        AttackId::DetOnebit => det_onebit,
        AttackId::DetEliminate => det_eliminate,
        AttackId::StatChannel => stat_channel,
        AttackId::StatSource => stat_source,
        AttackId::ZeroCrossing | AttackId::Nonlinearity => unreachable!("dispatched separately"),
    };
    let outs: Vec<RunOut> = (0..spec.runs as u64)
        .into_par_iter()
        .map(|r| {
            let truth = ctx.truth(r);
            match f(&ctx, r, truth) {
                // A bit whose level cannot be classified is a miss, not a failed experiment.
                Err(LabError::Classification(_)) => Ok(RunOut {
                    unclassified: true,
                    truth,
                    outcome: AttackOutcome::undecided().score(truth),
                    diag: Vec::new(),
                }),
                other => other,
            }
        })
        .collect::<kljn_lab::Result<_>>()?;

    let per_run: Vec<RunSummary> = outs
        .iter()
        .enumerate()
        .map(|(r, o)| RunSummary::new(r, o.truth, o.outcome.guess, o.outcome.decision_step))
        .collect();
    let mut diagnostics = average_diagnostics(outs.iter().map(|o| o.diag.as_slice()));
    diagnostics.insert(
        "unclassified".into(),
        outs.iter().filter(|o| o.unclassified).count() as f64,
    );
    if spec.attack == AttackId::DetOnebit {
        survival_diagnostics(&outs, &mut diagnostics);
    }
    let point = ReportPoint::from_runs(point_params(spec), &per_run);
    Ok(MonteCarloReport::new(spec.clone(), vec![point], per_run, diagnostics))
}

fn average_diagnostics<'a>(rows: impl Iterator<Item = &'a [(String, f64)]>) -> BTreeMap<String, f64> {
    let mut values: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for row in rows {
        for (k, v) in row {
            if v.is_finite() {
                values.entry(k.clone()).or_default().push(*v);
            }
        }
    }
    let mut out = BTreeMap::new();
    for (k, v) in values {
        out.insert(format!("mean.{k}"), stats::mean(&v));
        if v.len() > 1 {
            out.insert(format!("se.{k}"), stats::std_error(&v));
        }
    }
    out
}

/// Fraction of runs still undecided after `n` steps, for both hypothesis
/// sets, next to the `2^-n` law and its binomial standard error.
fn survival_diagnostics(outs: &[RunOut], diag: &mut BTreeMap<String, f64>) {
    let runs = outs.len();
    let survive = |step: Option<usize>, n: usize| step.is_none_or(|s| s > n);
    for n in 1..=SURVIVAL_STEPS {
        let all = outs.iter().filter(|o| survive(o.outcome.decision_step, n)).count();
        let secure = outs
            .iter()
            .filter(|o| survive(o.outcome.aux.get("secure_step").map(|&s| s as usize), n))
            .count();
        let expected = 0.5f64.powi(n as i32);
        diag.insert(format!("survival.all.n{n:02}"), all as f64 / runs as f64);
        diag.insert(format!("survival.secure.n{n:02}"), secure as f64 / runs as f64);
        diag.insert(format!("survival.expected.n{n:02}"), expected);
        diag.insert(format!("survival.se.n{n:02}"), binomial_se(expected, runs));
    }
}

/// Numeric and categorical parameters of one report point.
fn point_params(spec: &ExperimentSpec) -> Vec<(String, ParamValue)> {
    let num = |k: &str, v: f64| (k.to_string(), ParamValue::Num(v));
    let text = |k: &str, v: &str| (k.to_string(), ParamValue::Text(v.to_string()));
    let mut out = Vec::new();
    if spec.scheme == SchemeKind::Kljn {
        out.push(num("rh", spec.r_h.unwrap_or(f64::NAN)));
        out.push(num("rl", spec.r_l.unwrap_or(f64::NAN)));
        if spec.attack != AttackId::Nonlinearity {
            out.push(num("teff", spec.t_eff.unwrap_or(f64::NAN)));
        }
    } else {
        for (k, v) in [
            ("rha", spec.r_ha),
            ("rla", spec.r_la),
            ("rhb", spec.r_hb),
            ("rlb", spec.r_lb),
            ("u2la", spec.u2_la),
        ] {
            if let Some(v) = v {
                out.push(num(k, v));
            }
        }
    }
    out.push(num("bandwidth", spec.bandwidth));
    out.push(num("samples", spec.samples_per_bep as f64));
    match spec.attack {
        AttackId::DetOhm => out.push(text("knowledge", spec.knowledge.as_str())),
        AttackId::DetEliminate => out.push(num("delta_bits", spec.delta_bits.map_or(0.0, f64::from))),
        AttackId::StatChannel => {
            out.push(text("knowledge", spec.knowledge.as_str()));
            out.push(text("quantity", &spec.quantity.to_string()));
            out.push(num("m", spec.m.unwrap_or(f64::NAN)));
        }
        AttackId::StatSource => {
            out.push(text("knowledge", spec.knowledge.as_str()));
            out.push(num("m", spec.m.unwrap_or(f64::NAN)));
        }
        AttackId::ZeroCrossing => out.push(num("oversample", spec.factor as f64)),
        AttackId::Nonlinearity => {
            out.push(num("b", spec.b.unwrap_or(0.0)));
            out.push(num("c", spec.c.unwrap_or(0.0)));
        }
        AttackId::KljnRun | AttackId::DetOnebit => {}
    }
    out
}

/// Bob decodes Alice's bit from the mean-square level and his own choice.
fn kljn_run(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let rec = ctx.scheme.wire(&ctx.sources(r)?, truth)?;
    let ms = rec.mean_square_voltage();
    let (alice, _) = unilateral_finish(ms, ctx.config.resistance(truth.bob()), &ctx.config)?;
    let guess = BitSituation::new(alice, truth.bob());
    let outcome = AttackOutcome::decided(guess, ctx.config.samples_per_bep).score(truth);
    let diag = vec![
        (format!("u2_w.{truth}"), ms),
        (
            format!("u2_w_ratio.{truth}"),
            ms / expected_mean_square(&ctx.config, truth),
        ),
        (format!("power.{truth}"), net_power(&rec)),
    ];
    Ok(RunOut {
        truth,
        outcome,
        diag,
        unclassified: false,
    })
}

fn aux_diag(outcome: &AttackOutcome) -> Vec<(String, f64)> {
    outcome.aux.iter().map(|(k, v)| (k.clone(), *v)).collect()
}

fn det_ohm(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let src = ctx.sources(r)?;
    let rec = ctx.scheme.wire(&src, truth)?;
    let alice = match ctx.spec.knowledge {
        Knowledge::Bilateral => Some((src.la.clone(), src.ha.clone())),
        Knowledge::Unilateral => None,
    };
    let knowledge = EveKnowledge::new(alice, Some((src.lb, src.hb)), None)?;
    let outcome = ohms_law_attack(&rec, &knowledge, &ctx.config)?.score(truth);
    Ok(RunOut {
        truth,
        diag: aux_diag(&outcome),
        outcome,
        unclassified: false,
    })
}

fn det_onebit(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let src = ctx.sources(r)?;
    let rec = ctx.scheme.wire(&src, truth)?;
    let probes = probe_records(&src.la, &src.ha, &src.lb, &src.hb, &ctx.config)?;
    let signs = power_signs(&rec.p_w);
    let hyps: Vec<(BitSituation, &[f64])> = BitSituation::ALL
        .iter()
        .map(|&s| (s, probes[s.index()].p_w.as_slice()))
        .collect();
    let secure: Vec<(BitSituation, &[f64])> = hyps.iter().copied().filter(|(s, _)| s.is_secure()).collect();
    let pair = one_bit_power_attack(&signs, &secure)?;
    let mut outcome = one_bit_power_attack(&signs, &hyps)?.score(truth);
    let mut diag = aux_diag(&outcome);
    if let Some(step) = pair.decision_step {
        outcome = outcome.with_aux("secure_step", step as f64);
        diag.push(("secure_step".into(), step as f64));
    }
    if let Some(step) = outcome.decision_step {
        diag.push(("decision_step".into(), step as f64));
    }
    Ok(RunOut {
        truth,
        outcome,
        diag,
        unclassified: false,
    })
}

fn det_eliminate(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let src = ctx.sources(r)?;
    let rec = ctx.scheme.wire(&src, truth)?;
    let c = &ctx.config;
    let outcome = elimination_attack(&rec, &src.la, &src.ha, c.r_l, c.r_h, c, ctx.spec.delta_bits)?.score(truth);
    Ok(RunOut {
        truth,
        diag: aux_diag(&outcome),
        outcome,
        unclassified: false,
    })
}

fn eve_copies(ctx: &Ctx, r: u64, src: &SourceSet<f64>) -> kljn_lab::Result<SourceSet<f64>> {
    let c = &ctx.config;
    let mix = EveMix::for_run(ctx.spec.m.unwrap_or(0.0), ctx.spec.master_seed, r);
    let ens = ctx.spec.ensemble;
    Ok(SourceSet {
        la: mix.mix(labels::EVE_L_A, &src.la, c.r_l, c.t_eff, ens)?,
        ha: mix.mix(labels::EVE_H_A, &src.ha, c.r_h, c.t_eff, ens)?,
        lb: mix.mix(labels::EVE_L_B, &src.lb, c.r_l, c.t_eff, ens)?,
        hb: mix.mix(labels::EVE_H_B, &src.hb, c.r_h, c.t_eff, ens)?,
    })
}

fn stat_channel(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let src = ctx.sources(r)?;
    let rec = ctx.scheme.wire(&src, truth)?;
    let eve = eve_copies(ctx, r, &src)?;
    let q = ctx.spec.quantity;
    let (table, argmax) = match ctx.spec.knowledge {
        Knowledge::Bilateral => {
            let probes = probe_records(&eve.la, &eve.ha, &eve.lb, &eve.hb, &ctx.config)?;
            channel_ccc_attack(&rec, &probes, q)?
        }
        Knowledge::Unilateral => {
            let (seed, n, bw, ens) = (
                ctx.spec.master_seed,
                ctx.spec.samples_per_bep,
                ctx.config.bandwidth,
                ctx.spec.ensemble,
            );
            let dl = unit_noise(seed, r, labels::DUMMY_L_B, n, bw, ens)?;
            let dh = unit_noise(seed, r, labels::DUMMY_H_B, n, bw, ens)?;
            unilateral_channel_attack(&rec, (&eve.la, &eve.ha), (&dl, &dh), &ctx.config, q)?
        }
    };
    let guess = complete_from_alice(argmax.alice(), &rec, &ctx.config)?;
    let outcome = AttackOutcome::decided(guess, ctx.config.samples_per_bep).score(truth);
    let mut diag: Vec<(String, f64)> = BitSituation::ALL
        .iter()
        .map(|&s| (format!("ccc.{s}"), table.get(s)))
        .collect();
    diag.push(("argmax_match".into(), f64::from(u8::from(argmax == truth))));
    Ok(RunOut {
        truth,
        outcome,
        diag,
        unclassified: false,
    })
}

fn stat_source(ctx: &Ctx, r: u64, truth: BitSituation) -> kljn_lab::Result<RunOut> {
    let src = ctx.sources(r)?;
    let rec = ctx.scheme.wire(&src, truth)?;
    let eve = eve_copies(ctx, r, &src)?;
    let c = &ctx.config;
    let alice = source_ccc_attack(&rec, &eve.la, &eve.ha, Party::Alice, c.r_l, c.r_h)?;
    let mut diag = vec![
        ("ccc.alice.low".to_string(), alice.ccc_low),
        ("ccc.alice.high".to_string(), alice.ccc_high),
    ];
    let guess = match ctx.spec.knowledge {
        Knowledge::Bilateral => {
            let bob = source_ccc_attack(&rec, &eve.lb, &eve.hb, Party::Bob, c.r_l, c.r_h)?;
            diag.push(("ccc.bob.low".into(), bob.ccc_low));
            diag.push(("ccc.bob.high".into(), bob.ccc_high));
            BitSituation::new(alice.chosen_resistor, bob.chosen_resistor)
        }
        Knowledge::Unilateral => complete_from_alice(alice.chosen_resistor, &rec, c)?,
    };
    // CCC of the hypothesis matching each side's true resistor.
    let matched = |low: f64, high: f64, r: Resistor| if r == Resistor::Low { low } else { high };
    diag.push((
        "ccc.alice.matched".into(),
        matched(alice.ccc_low, alice.ccc_high, truth.alice()),
    ));
    let outcome = AttackOutcome::decided(guess, c.samples_per_bep).score(truth);
    Ok(RunOut {
        truth,
        outcome,
        diag,
        unclassified: false,
    })
}

fn run_zero_crossing(spec: &ExperimentSpec) -> Res<MonteCarloReport> {
    let scheme = match spec.scheme {
        SchemeKind::Kljn => Scheme::kljn(&kljn_config(spec)?),
        kind => {
            let v = |x: Option<f64>| x.unwrap_or(f64::NAN);
            let cfg = if kind == SchemeKind::Vmg {
                VmgConfig::new(
                    v(spec.r_ha),
                    v(spec.r_la),
                    v(spec.r_hb),
                    v(spec.r_lb),
                    v(spec.u2_la),
                    spec.bandwidth,
                )?
            } else {
                VmgConfig::fck1(v(spec.r_ha), v(spec.r_la), v(spec.r_hb), v(spec.u2_la), spec.bandwidth)?
            };
            Scheme::vmg(&cfg, &vmg_levels(&cfg)?)
        }
    };
    let sim = SchemeSimulator {
        scheme,
        ensemble: spec.ensemble,
    };
    let rep: ZcReport = zc_attack(
        &sim,
        spec.bandwidth,
        spec.runs,
        spec.samples_per_bep,
        spec.master_seed,
        spec.factor,
    )?;
    let per_run: Vec<RunSummary> = rep
        .per_run
        .iter()
        .map(|z| RunSummary::new(z.run, z.truth, z.guess, None))
        .collect();
    let mut diag = BTreeMap::new();
    for c in &rep.calibration {
        let s = c.situation;
        let mut put = |k: &str, v: f64| {
            if v.is_finite() {
                diag.insert(format!("calibration.{s}.{k}"), v);
            }
        };
        put("u2_zc", c.mean_u2_zc);
        put("u2_zc_se", c.se_u2_zc);
        put("u2_w", c.mean_u2_w);
        put("i2_w", c.mean_i2_w);
        put("ratio", c.mean_u2_zc / c.mean_u2_w);
        put("power", c.mean_power);
        put("crossings", c.mean_crossings);
        put("discarded", c.discarded as f64);
    }
    diag.insert("discarded".into(), rep.discarded as f64);
    let crossings: f64 = rep.per_run.iter().map(|z| z.crossings as f64).sum::<f64>() / rep.per_run.len() as f64;
    diag.insert("mean.crossings".into(), crossings);
    let point = ReportPoint::from_runs(point_params(spec), &per_run);
    debug_assert_eq!(point.p, rep.p);
    Ok(MonteCarloReport::new(spec.clone(), vec![point], per_run, diag))
}

fn run_nonlinearity(spec: &ExperimentSpec) -> Res<MonteCarloReport> {
    let template = kljn_config(&ExperimentSpec {
        t_eff: spec.t_eff.or(spec.t_eff_list.first().copied()),
        ..spec.clone()
    })?;
    let dist = DistortionSpec::new(1.0, spec.b.unwrap_or(0.0), spec.c.unwrap_or(0.0))?;
    let t_list = if spec.t_eff_list.is_empty() {
        vec![template.t_eff]
    } else {
        spec.t_eff_list.clone()
    };
    let sweep = temperature_sweep(
        &template,
        &dist,
        &t_list,
        &spec.gamma,
        spec.runs,
        spec.master_seed,
        spec.ensemble,
    )?;
    let base = point_params(spec);
    let mut points = Vec::with_capacity(sweep.len());
    let mut per_run = Vec::with_capacity(sweep.len() * spec.runs);
    let mut diag = BTreeMap::new();
    for (k, sp) in sweep.iter().enumerate() {
        let mut params = base.clone();
        params.push(("teff".into(), ParamValue::Num(sp.t_eff)));
        params.push(("gamma".into(), ParamValue::Num(sp.gamma as f64)));
        let offset = per_run.len();
        let runs: Vec<RunSummary> = sp
            .outcomes
            .iter()
            .enumerate()
            .map(|(r, &(t, g))| RunSummary::new(offset + r, t, Some(g), Some(sp.gamma)))
            .collect();
        let point = ReportPoint::from_runs(params, &runs);
        debug_assert!((point.sigma - sp.sigma).abs() < 1e-15);
        diag.insert(format!("point{k:03}.u_w_eff"), sp.u_w_eff);
        diag.insert(format!("point{k:03}.i_w_eff"), sp.i_w_eff);
        diag.insert(format!("point{k:03}.epsilon"), sp.epsilon);
        points.push(point);
        per_run.extend(runs);
    }
    for (k, &t) in t_list.iter().enumerate() {
        for (name, r) in [("low", template.r_l), ("high", template.r_h)] {
            let sigma = johnson_mean_square(r, t, template.bandwidth).sqrt();
            diag.insert(
                format!("teff{k:02}.total_distortion.{name}"),
                dist.analytic_total_distortion(sigma),
            );
        }
    }
    Ok(MonteCarloReport::new(spec.clone(), points, per_run, diag))
}
