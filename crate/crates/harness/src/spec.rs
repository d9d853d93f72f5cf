//! Experiment specification, validation and the flat config-file format.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use kljn_lab::{BitSituation, Quantity};
use serde::{Deserialize, Serialize};

use crate::error::HarnessError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum AttackId {
    KljnRun,
    DetOhm,
    DetOnebit,
    DetEliminate,
    StatChannel,
    StatSource,
    ZeroCrossing,
    Nonlinearity,
}

impl AttackId {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::KljnRun => "kljn-run",
            Self::DetOhm => "det-ohm",
            Self::DetOnebit => "det-onebit",
            Self::DetEliminate => "det-eliminate",
            Self::StatChannel => "stat-channel",
            Self::StatSource => "stat-source",
            Self::ZeroCrossing => "zero-crossing",
            Self::Nonlinearity => "nonlinearity",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).ok()
    }
}

impl fmt::Display for AttackId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeKind {
    #[default]
    Kljn,
    Vmg,
    Fck1,
}

impl SchemeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Kljn => "kljn",
            Self::Vmg => "vmg",
            Self::Fck1 => "fck1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        <Self as clap::ValueEnum>::from_str(s, true).ok()
    }
}

/// Which party's generators Eve holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Knowledge {
    #[default]
    Bilateral,
    Unilateral,
}

impl Knowledge {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Bilateral => "bilateral",
            Self::Unilateral => "unilateral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Everything needed to rerun an experiment bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub attack: AttackId,
    pub scheme: SchemeKind,
    pub r_h: Option<f64>,
    pub r_l: Option<f64>,
    pub t_eff: Option<f64>,
    /// Extra temperatures for nonlinearity sweeps; `t_eff` is used when empty.
    pub t_eff_list: Vec<f64>,
    pub bandwidth: f64,
    pub r_ha: Option<f64>,
    pub r_la: Option<f64>,
    pub r_hb: Option<f64>,
    pub r_lb: Option<f64>,
    pub u2_la: Option<f64>,
    pub m: Option<f64>,
    pub delta_bits: Option<u32>,
    pub b: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Vec<usize>,
    pub factor: usize,
    pub knowledge: Knowledge,
    pub quantity: Quantity,
    /// Fixed ground truth; drawn from the switch stream when absent.
    pub truth: Option<BitSituation>,
    pub ensemble: usize,
    pub runs: usize,
    pub samples_per_bep: usize,
    pub master_seed: u64,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl ExperimentSpec {
    /// Spec with desk-scale defaults and no attack-specific parameters.
    pub fn new(attack: AttackId) -> Self {
        Self {
            attack,
            scheme: SchemeKind::Kljn,
            r_h: None,
            r_l: None,
            t_eff: None,
            t_eff_list: Vec::new(),
            bandwidth: 500.0,
            r_ha: None,
            r_la: None,
            r_hb: None,
            r_lb: None,
            u2_la: None,
            m: None,
            delta_bits: None,
            b: None,
            c: None,
            gamma: Vec::new(),
            factor: 16,
            knowledge: Knowledge::Bilateral,
            quantity: Quantity::Voltage,
            truth: None,
            ensemble: 4,
            runs: 200,
            samples_per_bep: 1000,
            master_seed: 0,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }

    /// Original-scheme parameters `(r_h, r_l, t_eff)`.
    pub fn with_kljn(mut self, r_h: f64, r_l: f64, t_eff: f64) -> Self {
        self.r_h = Some(r_h);
        self.r_l = Some(r_l);
        self.t_eff = Some(t_eff);
        self
    }

    pub fn with_runs(mut self, runs: usize, seed: u64) -> Self {
        self.runs = runs;
        self.master_seed = seed;
        self
    }

    fn needs_kljn(&self) -> bool {
        self.attack != AttackId::ZeroCrossing || self.scheme == SchemeKind::Kljn
    }

    /// Lists every missing or out-of-range field.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let mut problems = Vec::new();
        fn positive(problems: &mut Vec<String>, name: &str, v: Option<f64>) {
            match v {
                None => problems.push(format!("missing {name}")),
                Some(x) if !(x > 0.0) || !x.is_finite() => problems.push(format!("{name} must be positive, got {x}")),
                Some(_) => {}
            }
        }
        if self.needs_kljn() {
            positive(&mut problems, "rh", self.r_h);
            positive(&mut problems, "rl", self.r_l);
            if self.t_eff_list.is_empty() || self.attack != AttackId::Nonlinearity {
                positive(&mut problems, "teff", self.t_eff);
            }
            if let (Some(h), Some(l)) = (self.r_h, self.r_l) {
                if h <= l {
                    problems.push(format!("rh must exceed rl, got rh={h}, rl={l}"));
                }
            }
        }
        if self.attack == AttackId::ZeroCrossing && self.scheme != SchemeKind::Kljn {
            positive(&mut problems, "rha", self.r_ha);
            positive(&mut problems, "rla", self.r_la);
            positive(&mut problems, "rhb", self.r_hb);
            positive(&mut problems, "u2la", self.u2_la);
            if self.scheme == SchemeKind::Vmg {
                positive(&mut problems, "rlb", self.r_lb);
            }
        }
        if self.attack != AttackId::ZeroCrossing && self.scheme != SchemeKind::Kljn {
            problems.push(format!(
                "scheme {} is only supported by zero-crossing",
                self.scheme.as_str()
            ));
        }
        if matches!(self.attack, AttackId::StatChannel | AttackId::StatSource) {
            match self.m {
                None => problems.push("missing m".into()),
                Some(m) if !(m >= 0.0) || !m.is_finite() => problems.push(format!("m must be >= 0, got {m}")),
                Some(_) => {}
            }
        }
        if self.attack == AttackId::Nonlinearity {
            if self.b.is_none() && self.c.is_none() {
                problems.push("missing b or c".into());
            }
            if self.gamma.is_empty() {
                problems.push("missing gamma".into());
            }
            if self.gamma.contains(&0) {
                problems.push("gamma values must be >= 1".into());
            }
            if self.t_eff_list.iter().any(|t| !(*t > 0.0)) {
                problems.push("teff values must be positive".into());
            }
        }
        if self.delta_bits == Some(0) {
            problems.push("delta-bits must be >= 1".into());
        }
        if self.runs == 0 {
            problems.push("runs must be >= 1".into());
        }
        if self.samples_per_bep < 2 {
            problems.push("samples must be >= 2".into());
        }
        if !(self.bandwidth > 0.0) || !self.bandwidth.is_finite() {
            problems.push(format!("bandwidth must be positive, got {}", self.bandwidth));
        }
        if self.ensemble == 0 {
            problems.push("ensemble must be >= 1".into());
        }
        if self.factor == 0 {
            problems.push("oversample must be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(HarnessError::Validation(problems))
        }
    }
}

/// Parses a flat `key = value` file; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, HarnessError> {
    let mut map = BTreeMap::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .or_else(|| line.split_once(char::is_whitespace))
            .ok_or_else(|| HarnessError::Validation(vec![format!("config line {}: expected key = value", no + 1)]))?;
        let key = k.trim().trim_start_matches("--").to_string();
        map.insert(key, v.trim().to_string());
    }
    Ok(map)
}
