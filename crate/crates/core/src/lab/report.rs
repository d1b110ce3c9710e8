use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub params: BTreeMap<String, f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Further per-sample quantities (gaps, chain members, ...).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub aux: BTreeMap<String, f64>,
}

impl Sample {
    pub fn new(params: &[(&str, f64)], lhs: f64, rhs: f64, ratio: f64) -> Self {
        Self {
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            lhs,
            rhs,
            ratio,
            aux: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { name: name.into(), passed, detail: detail.into() }
    }
}

/// Min/max ratio over one parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupConstants {
    pub params: BTreeMap<String, f64>,
    pub count: usize,
    pub c_emp: f64,
    #[serde(rename = "C_emp")]
    pub c_emp_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub format_version: u32,
    pub name: String,
    pub parameters: BTreeMap<String, String>,
    pub c_emp: f64,
    #[serde(rename = "C_emp")]
    pub c_emp_upper: f64,
    pub groups: Vec<GroupConstants>,
    pub checks: Vec<Check>,
    pub samples: Vec<Sample>,
}

impl RatioReport {
    pub fn new(name: &str, parameters: BTreeMap<String, String>, samples: Vec<Sample>) -> Self {
        let (lo, hi) = if samples.is_empty() { (0.0, 0.0) } else { min_max(samples.iter().map(|s| s.ratio)) };
        Self {
            format_version: FORMAT_VERSION,
            name: name.to_string(),
            parameters,
            c_emp: lo,
            c_emp_upper: hi,
            groups: Vec::new(),
            checks: Vec::new(),
            samples,
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }

    /// Groups samples by the listed parameter keys (in sorted group order).
    pub fn group_by(&mut self, keys: &[&str]) {
        let mut groups: BTreeMap<Vec<u64>, (BTreeMap<String, f64>, Vec<f64>)> = BTreeMap::new();
        for s in &self.samples {
            let params: BTreeMap<String, f64> = keys.iter().map(|k| (k.to_string(), s.params.get(*k).copied().unwrap_or(f64::NAN))).collect();
            let key = params.values().map(|v| order_key(*v)).collect();
            groups.entry(key).or_insert_with(|| (params, Vec::new())).1.push(s.ratio);
        }
        self.groups = groups
            .into_values()
            .map(|(params, r)| {
                let (lo, hi) = min_max(r.iter().copied());
                GroupConstants { params, count: r.len(), c_emp: lo, c_emp_upper: hi }
            })
            .collect();
    }

    pub fn group(&self, params: &[(&str, f64)]) -> Option<&GroupConstants> {
        self.groups.iter().find(|g| params.iter().all(|(k, v)| g.params.get(*k) == Some(v)))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Format(e.to_string()))
    }

    /// Flat table: one row per sample, parameter and auxiliary columns sorted.
    pub fn to_csv(&self) -> String {
        let pkeys: BTreeSet<&String> = self.samples.iter().flat_map(|s| s.params.keys()).collect();
        let akeys: BTreeSet<&String> = self.samples.iter().flat_map(|s| s.aux.keys()).collect();
        let mut out = format!("# format_version: {FORMAT_VERSION}\n# report: {}\n", self.name);
        let header: Vec<&str> = pkeys
            .iter()
            .map(|k| k.as_str())
            .chain(["lhs", "rhs", "ratio"])
            .chain(akeys.iter().map(|k| k.as_str()))
            .collect();
        out.push_str(&header.join(","));
        out.push('\n');
        let num = |v: Option<&f64>| v.map(|v| format!("{v:.17e}")).unwrap_or_default();
        for s in &self.samples {
            let row: Vec<String> = pkeys
                .iter()
                .map(|k| num(s.params.get(*k)))
                .chain([num(Some(&s.lhs)), num(Some(&s.rhs)), num(Some(&s.ratio))])
                .chain(akeys.iter().map(|k| num(s.aux.get(*k))))
                .collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    /// First sample whose ratio falls outside `[lo, hi]`.
    pub fn first_outside(&self, lo: f64, hi: f64) -> Option<&Sample> {
        self.samples.iter().find(|s| !(s.ratio >= lo && s.ratio <= hi))
    }
}

/// Total order on finite floats for grouping keys.
fn order_key(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

pub(crate) fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}
