//! Per-iteration trace rows and their CSV form.

use std::io::Write;

use crate::error::Result;

/// Iteration flags, stored as a bit set and written as `|`-joined names.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Flags(u8);

impl Flags {
    pub const STATIONARY: Flags = Flags(1);
    pub const DEGENERATE: Flags = Flags(2);
    pub const GAMMA_FALLBACK: Flags = Flags(4);
    pub const Y_FALLBACK: Flags = Flags(8);

    const NAMES: [(Flags, &'static str); 4] = [
        (Flags::STATIONARY, "stationary"),
        (Flags::DEGENERATE, "degenerate"),
        (Flags::GAMMA_FALLBACK, "gamma_fallback"),
        (Flags::Y_FALLBACK, "y_fallback"),
    ];

    pub fn empty() -> Self {
        Flags(0)
    }

    pub fn contains(self, other: Flags) -> bool {
        self.0 & other.0 == other.0 && other.0 != 0
    }

    pub fn insert(&mut self, other: Flags) {
        self.0 |= other.0;
    }

    pub fn set(&mut self, other: Flags, on: bool) {
        if on {
            self.insert(other);
        }
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn names(self) -> String {
        Flags::NAMES
            .iter()
            .filter(|(f, _)| self.contains(*f))
            .map(|(_, n)| *n)
            .collect::<Vec<_>>()
            .join("|")
    }
}

/// One iteration. `None` marks a quantity the algorithm does not produce; lower bounds
/// that exist but have not been updated yet are `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub wall_time_s: f64,
    /// Objective (or composite objective) at the row's iterate.
    pub primal: f64,
    /// The algorithm's own lower bound.
    pub lb_native: f64,
    pub lb_fw_mix: Option<f64>,
    pub lb_fw_best: Option<f64>,
    pub lb_hb: Option<f64>,
    pub lb_opt: Option<f64>,
    pub lb_opt_extra: Option<f64>,
    /// `primal − lb_native`.
    pub gap_aligned: f64,
    /// Objective at the next iterate minus `lb_native`.
    pub gap_ahead: Option<f64>,
    pub gap_hb: Option<f64>,
    pub gap_fw_best: Option<f64>,
    pub gamma_or_a: f64,
    pub model_value: Option<f64>,
    /// Primal-dual short-step model value at the same state (line-search runs only).
    pub model_short: Option<f64>,
    pub lmo_calls: u64,
    pub grad_calls: u64,
    pub fval_calls: u64,
    pub reporting_lmo: u64,
    pub flags: Flags,
}

impl TraceRecord {
    pub(crate) fn new(iter: usize) -> Self {
        Self {
            iter,
            wall_time_s: 0.0,
            primal: f64::NAN,
            lb_native: f64::NEG_INFINITY,
            lb_fw_mix: None,
            lb_fw_best: None,
            lb_hb: None,
            lb_opt: None,
            lb_opt_extra: None,
            gap_aligned: f64::INFINITY,
            gap_ahead: None,
            gap_hb: None,
            gap_fw_best: None,
            gamma_or_a: f64::NAN,
            model_value: None,
            model_short: None,
            lmo_calls: 0,
            grad_calls: 0,
            fval_calls: 0,
            reporting_lmo: 0,
            flags: Flags::empty(),
        }
    }

    /// Every lower bound carried by the row.
    pub fn lower_bounds(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("lb_native", self.lb_native)];
        for (name, v) in [
            ("lb_fw_mix", self.lb_fw_mix),
            ("lb_fw_best", self.lb_fw_best),
            ("lb_hb", self.lb_hb),
            ("lb_opt", self.lb_opt),
            ("lb_opt_extra", self.lb_opt_extra),
        ] {
            if let Some(v) = v {
                out.push((name, v));
            }
        }
        out
    }
}

/// CSV header, in column order.
pub const COLUMNS: [&str; 24] = [
    "iter",
    "wall_time_s",
    "primal",
    "lb_native",
    "lb_fw_mix",
    "lb_fw_best",
    "lb_hb",
    "lb_opt",
    "lb_opt_extra",
    "gap_aligned",
    "gap_ahead",
    "gap_hb",
    "gap_fw_best",
    "gamma_or_a",
    "model_value",
    "model_short",
    "lmo_calls",
    "grad_calls",
    "fval_calls",
    "reporting_lmo",
    "flags",
    "gap_stride_min",
    "gap_stride_max",
    "stride",
];

/// Rows of one run plus run-level notes.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub algo: String,
    pub records: Vec<TraceRecord>,
    pub stopped_early: bool,
    /// Free-form run notes copied into the metadata sidecar.
    pub notes: Vec<(String, String)>,
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl Trace {
    pub fn new(algo: impl Into<String>) -> Self {
        Self {
            algo: algo.into(),
            ..Self::default()
        }
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn note(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.notes.push((key.into(), value.into()));
    }

    /// Writes the header and one row per `stride` iterations. Each written row is the last
    /// of its group and carries the extrema of `gap_aligned` over the group.
    pub fn write_csv<W: Write>(&self, out: W, stride: usize) -> Result<()> {
        let stride = stride.max(1);
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(COLUMNS)?;
        for group in self.records.chunks(stride) {
            let r = group.last().expect("chunks are nonempty");
            let (lo, hi) = group.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
                (lo.min(r.gap_aligned), hi.max(r.gap_aligned))
            });
            w.write_record([
                r.iter.to_string(),
                r.wall_time_s.to_string(),
                r.primal.to_string(),
                r.lb_native.to_string(),
                opt(r.lb_fw_mix),
                opt(r.lb_fw_best),
                opt(r.lb_hb),
                opt(r.lb_opt),
                opt(r.lb_opt_extra),
                r.gap_aligned.to_string(),
                opt(r.gap_ahead),
                opt(r.gap_hb),
                opt(r.gap_fw_best),
                r.gamma_or_a.to_string(),
                opt(r.model_value),
                opt(r.model_short),
                r.lmo_calls.to_string(),
                r.grad_calls.to_string(),
                r.fval_calls.to_string(),
                r.reporting_lmo.to_string(),
                r.flags.names(),
                lo.to_string(),
                hi.to_string(),
                group.len().to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_names() {
        let mut f = Flags::empty();
        assert_eq!(f.names(), "");
        f.insert(Flags::DEGENERATE);
        f.insert(Flags::STATIONARY);
        assert_eq!(f.names(), "stationary|degenerate");
        assert!(f.contains(Flags::STATIONARY));
        assert!(!f.contains(Flags::Y_FALLBACK));
    }

    #[test]
    fn stride_keeps_extrema() {
        let mut t = Trace::new("x");
        for i in 0..5 {
            let mut r = TraceRecord::new(i);
            r.gap_aligned = [3.0, 1.0, 4.0, 1.5, 9.0][i];
            t.records.push(r);
        }
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
        assert!(lines[1].ends_with(",,1,3,2"));
        assert!(lines[2].ends_with(",,1.5,4,2"));
        assert!(lines[3].starts_with("4,") && lines[3].ends_with(",,9,9,1"));
    }
}
