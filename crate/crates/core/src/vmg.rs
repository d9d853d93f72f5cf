//! Four-resistor generalization with resistor-specific noise levels, and
//! its zero-net-power special case.
//!
//! `U²_HA` and `U²_LB` use their closed forms. `U²_HB` is taken from the
//! equal-current condition between the two secure situations,
//! `(U²_LA + U²_HB)/(R_LA + R_HB)² = (U²_HA + U²_LB)/(R_HA + R_LB)²`. The
//! direct closed form for `U²_HB` ([`printed_u2_hb`]) violates that
//! condition and goes negative at the symmetric point.

use crate::circuit::{Scheme, SourceSet};
use crate::error::{invalid, LabError, Result};
use crate::noise::johnson_mean_square;
use crate::scalar::{Real, BOLTZMANN};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmgConfig<S> {
    pub r_ha: S,
    pub r_la: S,
    pub r_hb: S,
    pub r_lb: S,
    /// Freely chosen mean-square voltage of Alice's low resistor.
    pub u2_la: S,
    pub bandwidth: S,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmgDerived<S> {
    pub u2_hb: S,
    pub u2_ha: S,
    pub u2_lb: S,
    pub t_la: S,
    pub t_hb: S,
    pub t_ha: S,
    pub t_lb: S,
}

impl<S: Real> VmgConfig<S> {
    pub fn new(r_ha: S, r_la: S, r_hb: S, r_lb: S, u2_la: S, bandwidth: S) -> Result<Self> {
        let c = Self {
            r_ha,
            r_la,
            r_hb,
            r_lb,
            u2_la,
            bandwidth,
        };
        c.validate()?;
        Ok(c)
    }

    /// Configuration whose fourth resistor satisfies the zero-power rule.
    pub fn fck1(r_ha: S, r_la: S, r_hb: S, u2_la: S, bandwidth: S) -> Result<Self> {
        let r_lb = fck1_fourth_resistor(r_hb, r_la, r_ha)?;
        Self::new(r_ha, r_la, r_hb, r_lb, u2_la, bandwidth)
    }

    fn validate(&self) -> Result<()> {
        let fields = [
            ("r_ha", self.r_ha),
            ("r_la", self.r_la),
            ("r_hb", self.r_hb),
            ("r_lb", self.r_lb),
            ("u2_la", self.u2_la),
            ("bandwidth", self.bandwidth),
        ];
        for (name, v) in fields {
            if !(v > S::zero()) || !v.is_finite() {
                return invalid(format!("{name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

fn ratio<S: Real>(num: S, den: S, what: &str) -> Result<S> {
    if den == S::zero() {
        return Err(LabError::Singular(format!("zero denominator in {what}")));
    }
    Ok(num / den)
}

fn temperature<S: Real>(u2: S, r: S, bandwidth: S) -> S {
    u2 / (S::of(4.0 * BOLTZMANN) * r * bandwidth)
}

/// Derived noise levels and temperatures; rejects unphysical results.
pub fn vmg_levels<S: Real>(config: &VmgConfig<S>) -> Result<VmgDerived<S>> {
    config.validate()?;
    let VmgConfig {
        r_ha,
        r_la,
        r_hb,
        r_lb,
        u2_la,
        bandwidth,
    } = *config;

    let u2_ha = u2_la
        * ratio(
            r_lb * (r_ha + r_hb) + r_ha * r_hb + r_ha * r_ha,
            r_la * r_la + r_lb * (r_la + r_hb) + r_hb * r_la,
            "U²_HA",
        )?;
    let u2_lb = u2_la
        * ratio(
            r_lb * (r_ha - r_hb) - r_ha * r_hb + r_lb * r_lb,
            r_la * r_la + r_la * (r_hb - r_ha) - r_ha * r_hb,
            "U²_LB",
        )?;
    let lh = r_la + r_hb;
    let hl = r_ha + r_lb;
    let u2_hb = (u2_ha + u2_lb) * (lh * lh) / (hl * hl) - u2_la;

    for (quantity, v) in [("u2_ha", u2_ha), ("u2_lb", u2_lb), ("u2_hb", u2_hb)] {
        if !(v > S::zero()) || !v.is_finite() {
            return Err(LabError::Unphysical {
                quantity,
                value: v.as_f64(),
            });
        }
    }
    Ok(VmgDerived {
        u2_hb,
        u2_ha,
        u2_lb,
        t_la: temperature(u2_la, r_la, bandwidth),
        t_hb: temperature(u2_hb, r_hb, bandwidth),
        t_ha: temperature(u2_ha, r_ha, bandwidth),
        t_lb: temperature(u2_lb, r_lb, bandwidth),
    })
}

/// The direct closed form for `U²_HB`, kept for comparison only.
pub fn printed_u2_hb<S: Real>(config: &VmgConfig<S>) -> Result<S> {
    let VmgConfig {
        r_ha,
        r_la,
        r_hb,
        r_lb,
        u2_la,
        ..
    } = *config;
    Ok(u2_la
        * ratio(
            r_lb * (r_ha + r_hb) - r_ha * r_hb + r_hb * r_hb,
            r_la * r_la + r_lb * (r_la - r_ha) - r_ha * r_la,
            "printed U²_HB",
        )?)
}

impl<S: Real> VmgDerived<S> {
    /// Mean squares recomputed from the temperatures.
    pub fn levels_from_temperatures(&self, config: &VmgConfig<S>) -> (S, S, S, S) {
        let ms = |r, t| johnson_mean_square(r, t, config.bandwidth);
        (
            ms(config.r_la, self.t_la),
            ms(config.r_ha, self.t_ha),
            ms(config.r_lb, self.t_lb),
            ms(config.r_hb, self.t_hb),
        )
    }
}

/// Fourth resistor making both secure pairs share the same geometric mean.
pub fn fck1_fourth_resistor<S: Real>(r_hb: S, r_la: S, r_ha: S) -> Result<S> {
    for (name, v) in [("r_hb", r_hb), ("r_la", r_la), ("r_ha", r_ha)] {
        if !(v > S::zero()) || !v.is_finite() {
            return invalid(format!("{name} must be positive, got {v}"));
        }
    }
    Ok(r_hb * r_la / r_ha)
}

impl<S: Real> Scheme<S> {
    pub fn vmg(config: &VmgConfig<S>, derived: &VmgDerived<S>) -> Self {
        Self {
            r_la: config.r_la,
            r_ha: config.r_ha,
            r_lb: config.r_lb,
            r_hb: config.r_hb,
            u2_la: config.u2_la,
            u2_ha: derived.u2_ha,
            u2_lb: derived.u2_lb,
            u2_hb: derived.u2_hb,
            bandwidth: config.bandwidth,
        }
    }
}

/// The four generator traces of run `run`, each at its derived level.
pub fn vmg_source_traces<S: Real>(
    config: &VmgConfig<S>,
    derived: &VmgDerived<S>,
    master: u64,
    run: u64,
    n: usize,
    ensemble: usize,
) -> Result<SourceSet<S>> {
    Scheme::vmg(config, derived).sources(master, run, n, ensemble)
}
