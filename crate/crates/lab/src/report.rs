use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sibm_core::verify::{Check, MCEstimate, Rule, TestReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Exploratory output without a pass/fail claim.
    Report,
}

impl Verdict {
    pub fn of(passed: bool) -> Self {
        if passed {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Fail => 1,
            Verdict::Pass | Verdict::Report => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub statistic: f64,
    /// `at_most` or `at_least`.
    pub rule: String,
    pub threshold: f64,
    pub pass: bool,
}

impl From<&Check> for CheckRow {
    fn from(c: &Check) -> Self {
        let rule = match c.rule {
            Rule::AtMost => "at_most",
            Rule::AtLeast => "at_least",
        };
        CheckRow {
            name: c.name.clone(),
            statistic: c.statistic,
            rule: rule.into(),
            threshold: c.threshold,
            pass: c.passed(),
        }
    }
}

/// The JSON document written by the `verify`, `mc` and `diag` commands.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub test: String,
    pub command: String,
    pub params: BTreeMap<String, f64>,
    pub estimate: Option<f64>,
    pub stderr: Option<f64>,
    pub theory: Option<f64>,
    pub z: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
    /// Seed of the single rerun after a failed Monte Carlo check.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rerun_seed: Option<u64>,
    /// Resolved configuration; feeding it back through `--config` replays
    /// the run.
    pub config: BTreeMap<String, String>,
    pub checks: Vec<CheckRow>,
    pub values: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(test: &str, command: &str, seed: u64, config: BTreeMap<String, String>) -> Self {
        Report {
            test: test.into(),
            command: command.into(),
            params: BTreeMap::new(),
            estimate: None,
            stderr: None,
            theory: None,
            z: None,
            verdict: Verdict::Report,
            seed,
            rerun_seed: None,
            config,
            checks: Vec::new(),
            values: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &str, v: f64) -> &mut Self {
        self.params.insert(key.into(), v);
        self
    }

    pub fn estimate(&mut self, e: &MCEstimate) -> &mut Self {
        self.estimate = Some(e.estimate);
        self.stderr = Some(e.stderr);
        self.theory = Some(e.theory);
        self.z = Some(e.z);
        self
    }

    /// Copies checks and values; the verdict follows the checks.
    pub fn absorb(&mut self, r: &TestReport) -> &mut Self {
        self.checks.extend(r.checks.iter().map(CheckRow::from));
        for (k, v) in &r.values {
            self.values.insert(k.clone(), *v);
        }
        self.verdict = Verdict::of(r.passed());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize") + "\n"
    }

    /// Headline fields as a two-row CSV.
    pub fn to_csv(&self) -> anyhow::Result<String> {
        let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
        let verdict = serde_json::to_value(self.verdict)?.as_str().unwrap_or_default().to_string();
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["test", "estimate", "stderr", "theory", "z", "verdict", "seed"])?;
        w.write_record([
            self.test.clone(),
            opt(self.estimate),
            opt(self.stderr),
            opt(self.theory),
            opt(self.z),
            verdict,
            self.seed.to_string(),
        ])?;
        Ok(String::from_utf8(w.into_inner()?)?)
    }

    /// Checks as table rows for raw export.
    pub fn check_rows(&self) -> Vec<Vec<String>> {
        self.checks
            .iter()
            .map(|c| {
                vec![
                    c.name.clone(),
                    c.statistic.to_string(),
                    c.rule.clone(),
                    c.threshold.to_string(),
                    c.pass.to_string(),
                ]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_checks() {
        let mut t = TestReport::new("x");
        t.check(Check::new("a", 1.0, Rule::AtMost, 2.0)).value("v", 3.0);
        let mut r = Report::new("x", "verify bm", 1, BTreeMap::new());
        r.absorb(&t);
        assert_eq!(r.verdict, Verdict::Pass);
        t.check(Check::new("b", 1.0, Rule::AtLeast, 2.0));
        r.absorb(&t);
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.values["v"], 3.0);
    }

    #[test]
    fn json_round_trip() {
        let mut r = Report::new("exit", "mc exit", 7, BTreeMap::from([("a".to_string(), "-1".to_string())]));
        r.estimate(&MCEstimate::proportion(30, 100, 0.3)).param("a", -1.0);
        let back: Report = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_csv().unwrap().starts_with("test,estimate"));
    }
}
