use std::fmt::Write as _;
use std::io::Write;

use super::{CheckResult, Verdict};
use crate::dynamics::GridSpec;
use crate::error::Result;

/// Shortest decimal that round-trips to the same `f64`; `nan`, `inf`, `-inf`
/// for non-finite values.
pub fn csv_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Provenance {
    pub config_hash: String,
    pub version: String,
    pub modulus: String,
    pub diffeo: String,
    pub n_max: usize,
    pub grid: GridSpec,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioReport {
    pub name: String,
    pub provenance: Provenance,
    pub checks: Vec<CheckResult>,
}

pub const RECORD_HEADER: [&str; 6] = ["check", "verdict", "value", "target", "tolerance", "window"];

fn window_field(w: Option<(usize, usize)>) -> String {
    w.map(|(a, b)| format!("{a}-{b}")).unwrap_or_default()
}

impl ScenarioReport {
    /// No check failed (skipped checks do not count as failures).
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict != Verdict::Fail)
    }

    pub fn to_text(&self) -> String {
        let p = &self.provenance;
        let mut out = String::new();
        let _ = writeln!(out, "scenario: {}", self.name);
        let _ = writeln!(out, "config_sha256: {}", p.config_hash);
        let _ = writeln!(out, "version: {}", p.version);
        let _ = writeln!(out, "modulus: {}", p.modulus);
        let _ = writeln!(out, "diffeo: {}", p.diffeo);
        let _ = writeln!(
            out,
            "growth: n_max={} grid={} refine={} seed={}",
            p.n_max, p.grid.base, p.grid.refine, p.seed
        );
        for c in &self.checks {
            let _ = write!(
                out,
                "{:<24} {:<8} value={} target={} tolerance={}",
                c.check.name(),
                c.verdict.name(),
                csv_float(c.value),
                csv_float(c.target),
                csv_float(c.tolerance)
            );
            if let Some((a, b)) = c.window {
                let _ = write!(out, " window=[{a},{b}]");
            }
            if let Some(f) = c.fitted {
                let _ = write!(out, " fitted={}", csv_float(f));
            }
            let _ = writeln!(out);
            if !c.detail.is_empty() {
                let _ = writeln!(out, "    {}", c.detail);
            }
        }
        let _ = writeln!(out, "overall: {}", if self.passed() { "pass" } else { "fail" });
        out
    }

    /// Machine-readable records: one CSV row per check.
    pub fn write_records<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        wr.write_record(RECORD_HEADER)?;
        for c in &self.checks {
            wr.write_record([
                c.check.name().to_string(),
                c.verdict.name().to_string(),
                csv_float(c.value),
                csv_float(c.target),
                csv_float(c.tolerance),
                window_field(c.window),
            ])?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn records_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_records(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lab::CheckId;

    #[test]
    fn float_format_round_trips() {
        for v in [10.0, 0.1, 1.0 / 3.0, 1e-300, 6.02e23, -2.5] {
            assert_eq!(csv_float(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(csv_float(10.0), "10.0");
        assert_eq!(csv_float(f64::NAN), "nan");
        assert_eq!(csv_float(f64::NEG_INFINITY), "-inf");
    }

    #[test]
    fn records_have_header_and_one_row_per_check() {
        let r = ScenarioReport {
            name: "t".into(),
            provenance: Provenance {
                config_hash: "h".into(),
                version: "0".into(),
                modulus: "lipschitz".into(),
                diffeo: "identity()".into(),
                n_max: 4,
                grid: GridSpec::default(),
                seed: 1,
            },
            checks: vec![
                CheckResult::new(CheckId::Lemma3, true).measured(0.0, 0.0, 1e-9),
                CheckResult::skipped(CheckId::Claim9, "n/a").window((2, 4)),
            ],
        };
        let csv = r.records_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "check,verdict,value,target,tolerance,window");
        assert_eq!(lines[1], "lemma3,pass,0.0,0.0,1e-9,");
        assert_eq!(lines[2], "claim9,skipped,nan,nan,nan,2-4");
        assert!(r.passed());
        assert!(r.to_text().contains("overall: pass"));
    }
}
