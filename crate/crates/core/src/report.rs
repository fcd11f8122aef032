//! Structured inequality reports shared by all checkers.
//!
//! Every entry is stored as `lhs <= rhs` with `margin = rhs - lhs`; checks of
//! the form `a >= b` are recorded with `lhs = b`, `rhs = a`.

use crate::extreal::ExtReal;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub t: Option<f64>,
    #[serde(rename = "Nprime")]
    pub nprime: Option<f64>,
    pub lhs: ExtReal,
    pub rhs: ExtReal,
    pub margin: ExtReal,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl ReportEntry {
    pub fn new(t: Option<f64>, nprime: Option<f64>, lhs: ExtReal, rhs: ExtReal) -> Self {
        ReportEntry { t, nprime, lhs, rhs, margin: slack(lhs, rhs), label: String::new() }
    }

    pub fn labeled(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }
}

/// `rhs - lhs` in extended arithmetic. An entry whose left side is `-inf`
/// or whose right side is `+inf` holds trivially and gets margin `+inf`.
pub fn slack(lhs: ExtReal, rhs: ExtReal) -> ExtReal {
    if lhs == ExtReal::NegInf || rhs == ExtReal::PosInf {
        ExtReal::PosInf
    } else {
        rhs - lhs
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Discretization {
    pub h: f64,
    pub eps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub spec: serde_json::Value,
    pub entries: Vec<ReportEntry>,
    pub worst_margin: ExtReal,
    pub tolerance: f64,
    pub pass: bool,
    pub discretization: Discretization,
    #[serde(default)]
    pub quantities: BTreeMap<String, f64>,
    #[serde(default)]
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(check: impl Into<String>, spec: serde_json::Value, tolerance: f64) -> Self {
        CheckReport {
            check: check.into(),
            spec,
            entries: Vec::new(),
            worst_margin: ExtReal::PosInf,
            tolerance,
            pass: true,
            discretization: Discretization { h: 0.0, eps: tolerance },
            quantities: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn with_discretization(mut self, h: f64) -> Self {
        self.discretization = Discretization { h, eps: self.tolerance };
        self
    }

    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        if !self.notes.contains(&msg) {
            self.notes.push(msg);
        }
    }

    pub fn quantity(&mut self, key: impl Into<String>, value: f64) {
        self.quantities.insert(key.into(), value);
    }

    /// Recomputes `worst_margin` and `pass` from the entries.
    pub fn finalize(mut self) -> Self {
        self.worst_margin = self
            .entries
            .iter()
            .map(|e| e.margin)
            .fold(ExtReal::PosInf, ExtReal::min);
        self.pass = self.worst_margin >= ExtReal::Finite(-self.tolerance);
        if !self.pass {
            self.note("witness search exhausted: no entry within tolerance for the tested plan");
        }
        self
    }

    /// Entries whose label matches.
    pub fn labeled<'a>(&'a self, label: &'a str) -> impl Iterator<Item = &'a ReportEntry> + 'a {
        self.entries.iter().filter(move |e| e.label == label)
    }

    /// Worst margin restricted to one label.
    pub fn worst_for(&self, label: &str) -> ExtReal {
        self.labeled(label).map(|e| e.margin).fold(ExtReal::PosInf, ExtReal::min)
    }

    /// CSV table with columns `label,t,Nprime,lhs,rhs,margin`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label,t,Nprime,lhs,rhs,margin\n");
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for e in &self.entries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                e.label,
                opt(e.t),
                opt(e.nprime),
                e.lhs,
                e.rhs,
                e.margin
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slack_conventions() {
        assert_eq!(slack(ExtReal::Finite(1.0), ExtReal::Finite(3.0)), ExtReal::Finite(2.0));
        assert_eq!(slack(ExtReal::Finite(1.0), ExtReal::NegInf), ExtReal::NegInf);
        assert_eq!(slack(ExtReal::NegInf, ExtReal::NegInf), ExtReal::PosInf);
        assert_eq!(slack(ExtReal::PosInf, ExtReal::PosInf), ExtReal::PosInf);
        assert_eq!(slack(ExtReal::PosInf, ExtReal::Finite(0.0)), ExtReal::NegInf);
    }

    #[test]
    fn finalize_and_serialize() {
        let mut r = CheckReport::new("demo", serde_json::json!({"K": 0}), 0.01);
        r.push(ReportEntry::new(Some(0.5), Some(2.0), ExtReal::Finite(-1.0), ExtReal::Finite(-1.005)));
        let r = r.finalize();
        assert!(r.pass);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["entries"][0]["Nprime"], 2.0);
        assert!(json["discretization"].is_object());
        let mut bad = r.clone();
        bad.push(ReportEntry::new(None, None, ExtReal::Finite(0.0), ExtReal::NegInf));
        let bad = bad.finalize();
        assert!(!bad.pass);
        assert!(bad.notes.iter().any(|n| n.contains("witness search exhausted")));
        assert!(bad.to_csv().contains("-inf"));
    }
}
