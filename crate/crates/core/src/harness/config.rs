//! Experiment configuration in a plain `key = value` text format.
//!
//! Blank lines and lines starting with `#` are ignored. Keys are listed in [`KEYS`]; values
//! are case-sensitive and `-` and `_` are interchangeable in enumerated values.

use std::fmt::Write as _;

use crate::algorithms::{FwRule, GeneralizedVariant, YHook};
use crate::error::{Error, Result};
use crate::model::ScheduleKind;
use crate::online::SubgradientPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algo {
    Fw,
    HbFw,
    GenFw(GeneralizedVariant),
    OfwFtrl,
    OfwOmd,
    GdPd,
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Fw => "fw",
            Algo::HbFw => "hbfw",
            Algo::GenFw(GeneralizedVariant::PerStep) => "gen_fw_per_step",
            Algo::GenFw(GeneralizedVariant::Cumulative) => "gen_fw_cumulative",
            Algo::GenFw(GeneralizedVariant::DecreasingReg) => "gen_fw_decreasing_reg",
            Algo::OfwFtrl => "ofw_ftrl",
            Algo::OfwOmd => "ofw_omd",
            Algo::GdPd => "gd_pd",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "fw" => Algo::Fw,
            "hbfw" | "hb_fw" => Algo::HbFw,
            "gen_fw_per_step" => Algo::GenFw(GeneralizedVariant::PerStep),
            "gen_fw_cumulative" => Algo::GenFw(GeneralizedVariant::Cumulative),
            "gen_fw_decreasing_reg" => Algo::GenFw(GeneralizedVariant::DecreasingReg),
            "ofw_ftrl" => Algo::OfwFtrl,
            "ofw_omd" => Algo::OfwOmd,
            "gd_pd" => Algo::GdPd,
            _ => return None,
        })
    }

    pub fn is_fw_family(&self) -> bool {
        !matches!(self, Algo::GdPd)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetSpec {
    Simplex,
    KSparse,
    Unconstrained,
}

impl SetSpec {
    pub fn name(&self) -> &'static str {
        match self {
            SetSpec::Simplex => "simplex",
            SetSpec::KSparse => "ksparse",
            SetSpec::Unconstrained => "unconstrained",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "simplex" => SetSpec::Simplex,
            "ksparse" | "k_sparse" => SetSpec::KSparse,
            "unconstrained" => SetSpec::Unconstrained,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjSpec {
    /// `‖x − x0‖²` with a random anchor.
    Dist,
    /// `‖Ax − b‖²` with random `A`, `b`.
    Lsq,
    /// `½(x − c)ᵀQ(x − c)` with prescribed condition number.
    Quad,
}

impl ObjSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ObjSpec::Dist => "dist",
            ObjSpec::Lsq => "lsq",
            ObjSpec::Quad => "quad",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "dist" => ObjSpec::Dist,
            "lsq" => ObjSpec::Lsq,
            "quad" => ObjSpec::Quad,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepSpec {
    /// The algorithm's default rule.
    Auto,
    OpenLoop,
    FwClassic,
    Short,
    PdShort,
    PdLine,
    /// `a_t = 1/L` for gradient descent.
    Fixed,
}

impl StepSpec {
    pub fn name(&self) -> &'static str {
        match self {
            StepSpec::Auto => "auto",
            StepSpec::OpenLoop => "open_loop",
            StepSpec::FwClassic => "fw_classic",
            StepSpec::Short => "short",
            StepSpec::PdShort => "pd_short",
            StepSpec::PdLine => "pd_line",
            StepSpec::Fixed => "fixed",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "auto" => StepSpec::Auto,
            "open_loop" => StepSpec::OpenLoop,
            "fw_classic" => StepSpec::FwClassic,
            "short" => StepSpec::Short,
            "pd_short" => StepSpec::PdShort,
            "pd_line" => StepSpec::PdLine,
            "fixed" => StepSpec::Fixed,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiSpec {
    Indicator,
    /// Indicator plus a random nonnegative linear term.
    Linear,
}

impl PsiSpec {
    pub fn name(&self) -> &'static str {
        match self {
            PsiSpec::Indicator => "indicator",
            PsiSpec::Linear => "linear",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "indicator" => PsiSpec::Indicator,
            "linear" => PsiSpec::Linear,
            _ => return None,
        })
    }
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algo: Algo,
    pub set: SetSpec,
    pub dim: usize,
    pub k: usize,
    pub obj: ObjSpec,
    /// Rows of the least-squares matrix; `None` means `dim`.
    pub m: Option<usize>,
    pub cond: f64,
    pub psi: PsiSpec,
    pub step: StepSpec,
    pub ell: u32,
    pub a0: f64,
    pub iters: usize,
    pub seed: u64,
    pub report_hb_gap: bool,
    pub epsilon: f64,
    pub y_hook: YHook,
    pub subgradient: SubgradientPolicy,
    pub extra_lmo_gap: bool,
    pub d_bound: Option<f64>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            algo: Algo::Fw,
            set: SetSpec::Simplex,
            dim: 100,
            k: 1,
            obj: ObjSpec::Dist,
            m: None,
            cond: 100.0,
            psi: PsiSpec::Indicator,
            step: StepSpec::Auto,
            ell: 2,
            a0: 2.0,
            iters: 1000,
            seed: 0,
            report_hb_gap: true,
            epsilon: 0.0,
            y_hook: YHook::Identity,
            subgradient: SubgradientPolicy::Recursive,
            extra_lmo_gap: true,
            d_bound: None,
        }
    }
}

/// All keys, in serialization order.
pub const KEYS: [&str; 19] = [
    "algo",
    "set",
    "dim",
    "k",
    "obj",
    "m",
    "cond",
    "psi",
    "step",
    "ell",
    "a0",
    "iters",
    "seed",
    "report_hb_gap",
    "epsilon",
    "y_hook",
    "subgradient",
    "extra_lmo_gap",
    "d_bound",
];

/// Keys that determine the generated instance.
pub const INSTANCE_KEYS: [&str; 8] = ["set", "dim", "k", "obj", "m", "cond", "psi", "seed"];

fn bad(key: &str, value: &str) -> Error {
    Error::config(key, format!("invalid value `{value}`"))
}

fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn boolean(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(bad(key, value)),
    }
}

fn optional<T: std::str::FromStr>(key: &str, value: &str) -> Result<Option<T>> {
    if value == "none" || value.is_empty() {
        Ok(None)
    } else {
        num(key, value).map(Some)
    }
}

impl ExperimentConfig {
    /// Sets one key from its textual value.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let norm = value.replace('-', "_");
        fn e<T>(v: Option<T>, key: &str, value: &str) -> Result<T> {
            v.ok_or_else(|| bad(key, value))
        }
        match key.replace('-', "_").as_str() {
            "algo" => self.algo = e(Algo::parse(&norm), key, value)?,
            "set" => self.set = e(SetSpec::parse(&norm), key, value)?,
            "dim" => self.dim = num(key, value)?,
            "k" => self.k = num(key, value)?,
            "obj" => self.obj = e(ObjSpec::parse(&norm), key, value)?,
            "m" => self.m = optional(key, value)?,
            "cond" => self.cond = num(key, value)?,
            "psi" => self.psi = e(PsiSpec::parse(&norm), key, value)?,
            "step" => self.step = e(StepSpec::parse(&norm), key, value)?,
            "ell" => self.ell = num(key, value)?,
            "a0" => self.a0 = num(key, value)?,
            "iters" => self.iters = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "report_hb_gap" => self.report_hb_gap = boolean(key, value)?,
            "epsilon" => self.epsilon = num(key, value)?,
            "y_hook" => {
                self.y_hook = match norm.as_str() {
                    "identity" => YHook::Identity,
                    "segment_search" => YHook::SegmentSearch,
                    _ => return Err(bad(key, value)),
                }
            }
            "subgradient" => {
                self.subgradient = match norm.as_str() {
                    "recursive" => SubgradientPolicy::Recursive,
                    "zero" => SubgradientPolicy::Zero,
                    _ => return Err(bad(key, value)),
                }
            }
            "extra_lmo_gap" => self.extra_lmo_gap = boolean(key, value)?,
            "d_bound" => self.d_bound = optional(key, value)?,
            _ => return Err(Error::config(key, "unknown key")),
        }
        Ok(())
    }

    /// Parses a whole config file on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(
                    format!("line {}", lineno + 1),
                    "expected `key = value`",
                )
            })?;
            let key = key.trim();
            if !seen.insert(key.replace('-', "_")) {
                return Err(Error::config(key, "given more than once"));
            }
            cfg.set_key(key, value)?;
        }
        Ok(cfg)
    }

    pub fn value_of(&self, key: &str) -> String {
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        match key {
            "algo" => self.algo.name().into(),
            "set" => self.set.name().into(),
            "dim" => self.dim.to_string(),
            "k" => self.k.to_string(),
            "obj" => self.obj.name().into(),
            "m" => opt(self.m.map(|m| m.to_string())),
            "cond" => self.cond.to_string(),
            "psi" => self.psi.name().into(),
            "step" => self.step.name().into(),
            "ell" => self.ell.to_string(),
            "a0" => self.a0.to_string(),
            "iters" => self.iters.to_string(),
            "seed" => self.seed.to_string(),
            "report_hb_gap" => self.report_hb_gap.to_string(),
            "epsilon" => self.epsilon.to_string(),
            "y_hook" => match self.y_hook {
                YHook::Identity => "identity".into(),
                YHook::SegmentSearch => "segment_search".into(),
            },
            "subgradient" => match self.subgradient {
                SubgradientPolicy::Recursive => "recursive".into(),
                SubgradientPolicy::Zero => "zero".into(),
            },
            "extra_lmo_gap" => self.extra_lmo_gap.to_string(),
            "d_bound" => opt(self.d_bound.map(|d| d.to_string())),
            _ => String::new(),
        }
    }

    /// Serializes every key; [`ExperimentConfig::parse`] reads it back losslessly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for key in KEYS {
            let _ = writeln!(s, "{key} = {}", self.value_of(key));
        }
        s
    }

    /// A short label for tables and file names.
    pub fn label(&self) -> String {
        let mut s = self.algo.name().to_string();
        if self.step != StepSpec::Auto {
            s.push('_');
            s.push_str(self.step.name());
        }
        if self.algo == Algo::OfwOmd && self.subgradient == SubgradientPolicy::Zero {
            s.push_str("_zero");
        }
        s
    }

    /// Effective FW rule for the FW and heavy-ball algorithms.
    pub fn fw_rule(&self) -> Result<FwRule> {
        Ok(match self.step {
            StepSpec::Auto | StepSpec::OpenLoop => FwRule::Schedule(ScheduleKind::OpenLoop {
                ell: self.ell,
                a0: self.a0,
            }),
            StepSpec::FwClassic => FwRule::Schedule(ScheduleKind::FwClassic),
            StepSpec::Short => FwRule::Short,
            StepSpec::PdShort => FwRule::PdShort,
            StepSpec::PdLine => FwRule::PdLine,
            StepSpec::Fixed => {
                return Err(Error::config("step", "`fixed` applies to gd_pd only"))
            }
        })
    }

    /// Checks every parameter and their combinations.
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim", "must be at least 1"));
        }
        if self.iters == 0 {
            return Err(Error::config("iters", "must be at least 1"));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::config("epsilon", "must be a finite nonnegative number"));
        }
        if self.set == SetSpec::KSparse && !(1..=self.dim).contains(&self.k) {
            return Err(Error::config("k", format!("must lie in 1..={}", self.dim)));
        }
        if self.m == Some(0) {
            return Err(Error::config("m", "must be at least 1"));
        }
        if self.obj == ObjSpec::Quad && !(self.cond >= 1.0 && self.cond.is_finite()) {
            return Err(Error::config("cond", "must be a finite number ≥ 1"));
        }
        if let Some(d) = self.d_bound {
            if !(d > 0.0 && d.is_finite()) {
                return Err(Error::config("d_bound", "must be positive and finite"));
            }
        }
        if self.step == StepSpec::OpenLoop || self.step == StepSpec::Auto {
            ScheduleKind::OpenLoop {
                ell: self.ell,
                a0: self.a0,
            }
            .validate()?;
        }
        match self.algo {
            Algo::GdPd => {
                if self.set != SetSpec::Unconstrained {
                    return Err(Error::config("set", "gd_pd runs unconstrained"));
                }
                if !matches!(
                    self.step,
                    StepSpec::Auto | StepSpec::PdShort | StepSpec::PdLine | StepSpec::Fixed
                ) {
                    return Err(Error::config(
                        "step",
                        "gd_pd supports pd_short, pd_line and fixed",
                    ));
                }
            }
            _ if self.set == SetSpec::Unconstrained => {
                return Err(Error::config("set", "FW-type algorithms need a bounded set"));
            }
            Algo::Fw | Algo::HbFw => {
                self.fw_rule()?;
                if self.algo == Algo::HbFw && self.step == StepSpec::Short {
                    return Err(Error::config(
                        "step",
                        "hbfw supports open_loop, fw_classic, pd_short and pd_line",
                    ));
                }
                if self.psi != PsiSpec::Indicator {
                    return Err(Error::config("psi", "fw and hbfw use the indicator of the set"));
                }
            }
            Algo::GenFw(_) => {
                if !matches!(self.step, StepSpec::Auto | StepSpec::FwClassic) {
                    return Err(Error::config("step", "generalized FW uses a_t = 2t + 2"));
                }
            }
            Algo::OfwFtrl | Algo::OfwOmd => {
                if self.step != StepSpec::Auto {
                    return Err(Error::config(
                        "step",
                        "optimistic FW uses a_t = 2t; leave step = auto",
                    ));
                }
                if self.psi != PsiSpec::Indicator {
                    return Err(Error::config("psi", "optimistic FW runs with the indicator"));
                }
            }
        }
        Ok(())
    }

    /// True when two configs generate the same instance.
    pub fn same_instance(&self, other: &Self) -> bool {
        INSTANCE_KEYS
            .iter()
            .all(|k| self.value_of(k) == other.value_of(k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = ExperimentConfig::parse("algo = fw\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "bogus"));
    }

    #[test]
    fn bad_value_is_named() {
        let err = ExperimentConfig::parse("dim = ten").unwrap_err();
        assert!(matches!(err, Error::Config { ref key, .. } if key == "dim"));
    }

    #[test]
    fn hyphens_are_accepted() {
        let c = ExperimentConfig::parse("algo = ofw-ftrl\nstep = auto\ny-hook = segment-search").unwrap();
        assert_eq!(c.algo, Algo::OfwFtrl);
        assert_eq!(c.y_hook, YHook::SegmentSearch);
    }

    #[test]
    fn combination_checks() {
        let mut c = ExperimentConfig {
            algo: Algo::HbFw,
            step: StepSpec::Short,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        c.algo = Algo::GdPd;
        c.step = StepSpec::PdShort;
        assert!(matches!(c.validate(), Err(Error::Config { ref key, .. }) if key == "set"));
        c.set = SetSpec::Unconstrained;
        c.validate().unwrap();
    }
}
