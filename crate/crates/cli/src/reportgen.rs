//! Consolidated reports from suite summaries: one markdown and one JSON
//! document, grouped by claim, byte-identical across reruns.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::artifacts::{Check, Summary};
use crate::suites::claims;

#[derive(Debug, Serialize)]
pub struct ConsolidatedReport {
    pub scenarios: Vec<Summary>,
    pub groups: Vec<ClaimGroup>,
    pub total_checks: usize,
    pub failed_checks: usize,
}

#[derive(Debug, Serialize)]
pub struct ClaimGroup {
    pub claim: String,
    pub heading: String,
    pub entries: Vec<GroupEntry>,
}

#[derive(Debug, Serialize)]
pub struct GroupEntry {
    pub scenario: String,
    #[serde(flatten)]
    pub check: Check,
}

/// Merge summaries into one report. Two summaries may not share a
/// scenario name unless they are identical.
pub fn consolidate(mut summaries: Vec<Summary>) -> Result<ConsolidatedReport> {
    if summaries.is_empty() {
        bail!("no summaries given");
    }
    summaries.sort_by(|a, b| a.scenario.cmp(&b.scenario).then(a.suite.cmp(&b.suite)));
    for w in summaries.windows(2) {
        if w[0].scenario == w[1].scenario && w[0] != w[1] {
            bail!(
                "conflicting summaries for scenario {:?}: refusing to merge",
                w[0].scenario
            );
        }
    }
    summaries.dedup();

    let mut by_claim: BTreeMap<String, Vec<GroupEntry>> = BTreeMap::new();
    for summary in &summaries {
        for check in &summary.checks {
            by_claim
                .entry(check.claim.clone())
                .or_default()
                .push(GroupEntry {
                    scenario: summary.scenario.clone(),
                    check: check.clone(),
                });
        }
    }
    let groups: Vec<ClaimGroup> = by_claim
        .into_iter()
        .map(|(claim, mut entries)| {
            entries.sort_by(|a, b| {
                a.scenario
                    .cmp(&b.scenario)
                    .then(a.check.id.cmp(&b.check.id))
            });
            ClaimGroup {
                heading: claims::heading(&claim).to_string(),
                claim,
                entries,
            }
        })
        .collect();
    let total_checks = groups.iter().map(|g| g.entries.len()).sum();
    let failed_checks = groups
        .iter()
        .flat_map(|g| &g.entries)
        .filter(|e| !e.check.pass)
        .count();
    Ok(ConsolidatedReport {
        scenarios: summaries,
        groups,
        total_checks,
        failed_checks,
    })
}

pub fn render_markdown(report: &ConsolidatedReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Verification report");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{} checks, {} failed, across {} scenario(s).",
        report.total_checks,
        report.failed_checks,
        report.scenarios.len()
    );
    for group in &report.groups {
        let _ = writeln!(out);
        let _ = writeln!(out, "## {} (`{}`)", group.heading, group.claim);
        let _ = writeln!(out);
        let _ = writeln!(out, "| scenario | check | value | bound | result |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for e in &group.entries {
            let bound = e
                .check
                .bound
                .map(|b| b.to_string())
                .unwrap_or_else(|| "-".into());
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                e.scenario,
                e.check.id,
                e.check.value,
                bound,
                if e.check.pass { "pass" } else { "FAIL" }
            );
        }
    }
    out
}

/// Read summary files, consolidate, and write `<base>.md` and
/// `<base>.json`.
pub fn emit_report(summary_paths: &[std::path::PathBuf], out_base: &Path) -> Result<ConsolidatedReport> {
    let mut summaries = Vec::new();
    for path in summary_paths {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        let summary: Summary = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        summaries.push(summary);
    }
    let report = consolidate(summaries)?;
    let md = render_markdown(&report);
    std::fs::write(out_base.with_extension("md"), md)?;
    crate::artifacts::write_json(&out_base.with_extension("json"), &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn summary(name: &str, checks: Vec<Check>) -> Summary {
        Summary {
            scenario: name.into(),
            suite: "clt".into(),
            seed: 1,
            checks,
        }
    }

    fn check(id: &str, claim: &str, pass: bool) -> Check {
        Check::new(id, claim, 1.0, None, pass, "d".into())
    }

    #[test]
    fn single_summary_round_trips() {
        let s = summary("a", vec![check("x", claims::CLT, true)]);
        let report = consolidate(vec![s.clone()]).unwrap();
        assert_eq!(report.scenarios, vec![s]);
        assert_eq!(report.total_checks, 1);
        assert_eq!(report.failed_checks, 0);
    }

    #[test]
    fn groups_by_claim_deterministically() {
        let a = summary(
            "a",
            vec![
                check("x", claims::CLT, true),
                check("y", claims::VARIANCE, false),
            ],
        );
        let b = summary("b", vec![check("z", claims::CLT, true)]);
        let r1 = consolidate(vec![a.clone(), b.clone()]).unwrap();
        let r2 = consolidate(vec![b, a]).unwrap();
        let names1: Vec<&String> = r1.groups.iter().map(|g| &g.claim).collect();
        let names2: Vec<&String> = r2.groups.iter().map(|g| &g.claim).collect();
        assert_eq!(names1, names2);
        assert_eq!(r1.failed_checks, 1);
        assert_eq!(
            serde_json::to_string(&r1.groups).unwrap(),
            serde_json::to_string(&r2.groups).unwrap()
        );
    }

    #[test]
    fn conflicting_scenario_names_refuse_to_merge() {
        let a = summary("a", vec![check("x", claims::CLT, true)]);
        let mut b = a.clone();
        b.checks[0].value = 2.0;
        assert!(consolidate(vec![a.clone(), b]).is_err());
        // identical duplicates collapse
        assert!(consolidate(vec![a.clone(), a]).is_ok());
    }
}
