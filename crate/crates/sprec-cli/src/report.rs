//! Report envelope and output rendering.
//!
//! Every run emits one schema-versioned report on stdout, JSON by default.
//! The report embeds the full resolved configuration (variables, method,
//! seed, grids), so rerunning from the embedded config reproduces every
//! value bit-for-bit. CSV output carries the same numeric values in a
//! flat, sectioned layout.

use serde::{Deserialize, Serialize};

use sprec_core::{
    AllocationComparison, AuditReport, CspReport, Direction, Holds, OrderVerdict, PairSpVerdict,
    PermProbTable, Permutation, ProbEstimate, Relation, SearchOutcome, SspReport, Witness,
};

use crate::config::RunConfig;

pub const SCHEMA: &str = "sprec-report/1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub command: String,
    pub config: RunConfig,
    /// Conventions worth flagging, e.g. precedence computed over
    /// real-valued supports.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub result: Payload,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, notes: Vec<String>, result: Payload) -> Self {
        Report { schema: SCHEMA.into(), command: command.into(), config, notes, result }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Payload {
    OrderCheck {
        relation: Relation,
        first: String,
        second: String,
        verdict: OrderVerdict,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_second_ge_first: Option<ProbEstimate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p_first_ge_second: Option<ProbEstimate>,
    },
    PermProb {
        perm: Permutation,
        estimate: ProbEstimate,
    },
    PermTable {
        sum: f64,
        table: PermProbTable,
    },
    SspCheck {
        report: SspReport,
    },
    CspCheck {
        report: CspReport,
    },
    Audit {
        report: AuditReport,
    },
    Search {
        outcome: SearchOutcome,
    },
    AppRatio {
        p_target: f64,
        p_rival: f64,
        ratio: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_perm: Option<Permutation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        target_estimate: Option<ProbEstimate>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rival_perm: Option<Permutation>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        rival_estimate: Option<ProbEstimate>,
    },
    AppSeriesParallel {
        comparison: AllocationComparison,
    },
    DemoBlyth {
        pairwise: Vec<PairSpVerdict>,
        cycle: Vec<String>,
        table: PermProbTable,
        ssp: SspReport,
        audit: AuditReport,
    },
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

// ---------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------

fn fmt(x: f64) -> String {
    format!("{x}")
}

fn opt_u64(x: Option<u64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Permutations in CSV use dashes so rows never need quoting.
fn perm_str(p: &Permutation) -> String {
    p.vars().iter().map(|v| (v + 1).to_string()).collect::<Vec<_>>().join("-")
}

fn dir_str(d: Direction) -> &'static str {
    match d {
        Direction::T1LeT2 => "t1<=t2",
        Direction::T2LeT1 => "t2<=t1",
        Direction::Equal => "equal",
        Direction::Incomparable => "incomparable",
        Direction::Indeterminate => "indeterminate",
    }
}

fn holds_str(h: Holds) -> &'static str {
    match h {
        Holds::Yes => "yes",
        Holds::No => "no",
        Holds::Indeterminate => "indeterminate",
    }
}

fn rel_str(r: Relation) -> &'static str {
    match r {
        Relation::Lr => "lr",
        Relation::Hr => "hr",
        Relation::St => "st",
        Relation::Sp => "sp",
    }
}

fn estimate_cells(e: &ProbEstimate) -> Vec<String> {
    vec![fmt(e.value), fmt(e.err), e.method.to_string(), opt_u64(e.samples), opt_u64(e.seed)]
}

fn push_table(rows: &mut Vec<Vec<String>>, table: &PermProbTable, sum: f64) {
    rows.push(vec!["perm".into(), "value".into(), "err".into(), "method".into(), "samples".into(), "seed".into()]);
    for entry in &table.entries {
        let mut row = vec![perm_str(&entry.perm)];
        row.extend(estimate_cells(&entry.estimate));
        rows.push(row);
    }
    rows.push(vec!["sum".into(), fmt(sum)]);
}

fn push_pairs(rows: &mut Vec<Vec<String>>, pairs: &[PairSpVerdict]) {
    rows.push(vec![
        "first".into(),
        "second".into(),
        "direction".into(),
        "margin".into(),
        "p_second_ge_first".into(),
        "p_first_ge_second".into(),
    ]);
    for p in pairs {
        rows.push(vec![
            p.first_name.clone(),
            p.second_name.clone(),
            dir_str(p.verdict.direction).into(),
            fmt(p.verdict.margin),
            fmt(p.p_second_ge_first.value),
            fmt(p.p_first_ge_second.value),
        ]);
    }
}

fn push_audit(rows: &mut Vec<Vec<String>>, report: &AuditReport) {
    rows.push(vec!["claim".into(), report.claim.to_string()]);
    rows.push(vec!["holds".into(), holds_str(report.holds).into()]);
    rows.push(vec!["checked".into(), report.checked.to_string()]);
    for w in &report.witnesses {
        match w {
            Witness::SpViolation { first, second, p_second_ge_first, p_first_ge_second } => {
                rows.push(vec![
                    "sp_violation".into(),
                    first.clone(),
                    second.clone(),
                    fmt(p_second_ge_first.value),
                    fmt(p_first_ge_second.value),
                ]);
            }
            Witness::TranspositionViolation { sigma, swapped, p_sigma, p_swapped } => {
                rows.push(vec![
                    "transposition_violation".into(),
                    perm_str(sigma),
                    perm_str(swapped),
                    fmt(p_sigma.value),
                    fmt(p_swapped.value),
                ]);
            }
            Witness::SspViolation { target, rival, p_target, p_rival } => {
                rows.push(vec![
                    "ssp_violation".into(),
                    perm_str(target),
                    perm_str(rival),
                    fmt(p_target.value),
                    fmt(p_rival.value),
                ]);
            }
            Witness::SpCycle { names, edges } => {
                rows.push(vec!["sp_cycle".into(), names.join(";")]);
                for e in edges {
                    rows.push(vec![
                        "cycle_edge".into(),
                        e.first.clone(),
                        e.second.clone(),
                        fmt(e.p_second_ge_first.value),
                        fmt(e.p_first_ge_second.value),
                    ]);
                }
            }
        }
    }
}

fn push_ssp(rows: &mut Vec<Vec<String>>, report: &SspReport) {
    push_table(rows, &report.table, report.table.sum());
    rows.push(vec!["ssp_holds".into(), holds_str(report.ssp_holds).into()]);
    rows.push(vec!["margin".into(), fmt(report.margin)]);
    rows.push(vec![
        "argmax".into(),
        report.argmax.iter().map(perm_str).collect::<Vec<_>>().join(";"),
    ]);
    rows.push(vec!["csp_holds".into(), holds_str(report.csp.holds).into()]);
    push_pairs(rows, &report.csp.pairs);
}

pub fn to_csv(report: &Report) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    match &report.result {
        Payload::OrderCheck { relation, first, second, verdict, p_second_ge_first, p_first_ge_second } => {
            rows.push(vec![
                "relation".into(),
                "first".into(),
                "second".into(),
                "direction".into(),
                "margin".into(),
                "p_second_ge_first".into(),
                "p_first_ge_second".into(),
            ]);
            rows.push(vec![
                rel_str(*relation).into(),
                first.clone(),
                second.clone(),
                dir_str(verdict.direction).into(),
                fmt(verdict.margin),
                p_second_ge_first.map(|e| fmt(e.value)).unwrap_or_default(),
                p_first_ge_second.map(|e| fmt(e.value)).unwrap_or_default(),
            ]);
        }
        Payload::PermProb { perm, estimate } => {
            rows.push(vec!["perm".into(), "value".into(), "err".into(), "method".into(), "samples".into(), "seed".into()]);
            let mut row = vec![perm_str(perm)];
            row.extend(estimate_cells(estimate));
            rows.push(row);
        }
        Payload::PermTable { sum, table } => push_table(&mut rows, table, *sum),
        Payload::SspCheck { report } => push_ssp(&mut rows, report),
        Payload::CspCheck { report } => {
            rows.push(vec!["csp_holds".into(), holds_str(report.holds).into()]);
            push_pairs(&mut rows, &report.pairs);
        }
        Payload::Audit { report } => push_audit(&mut rows, report),
        Payload::Search { outcome } => {
            rows.push(vec!["claim".into(), outcome.claim.to_string()]);
            rows.push(vec!["budget".into(), outcome.budget.to_string()]);
            rows.push(vec!["checked".into(), outcome.checked.to_string()]);
            rows.push(vec!["skipped".into(), outcome.skipped.to_string()]);
            rows.push(vec!["found".into(), if outcome.found.is_some() { "yes".into() } else { "no".into() }]);
            if let Some(found) = &outcome.found {
                push_audit(&mut rows, found);
            }
        }
        Payload::AppRatio { p_target, p_rival, ratio, .. } => {
            rows.push(vec!["p_target".into(), "p_rival".into(), "ratio".into()]);
            rows.push(vec![fmt(*p_target), fmt(*p_rival), fmt(*ratio)]);
        }
        Payload::AppSeriesParallel { comparison } => {
            rows.push(vec![
                "alloc_a".into(),
                "alloc_b".into(),
                "weak_value".into(),
                "weak_err".into(),
                "strict_value".into(),
                "strict_err".into(),
                "ties".into(),
                "samples".into(),
            ]);
            let alloc_str = |a: &sprec_core::AllocationSpec| {
                format!("{}|{}-{}", a.series + 1, a.parallel[0] + 1, a.parallel[1] + 1)
            };
            rows.push(vec![
                alloc_str(&comparison.alloc_a),
                alloc_str(&comparison.alloc_b),
                fmt(comparison.weak.value),
                fmt(comparison.weak.err),
                fmt(comparison.strict.value),
                fmt(comparison.strict.err),
                comparison.ties.to_string(),
                comparison.samples.to_string(),
            ]);
        }
        Payload::DemoBlyth { pairwise, cycle, table, ssp, audit } => {
            push_pairs(&mut rows, pairwise);
            rows.push(vec!["cycle".into(), cycle.join(";")]);
            push_table(&mut rows, table, table.sum());
            rows.push(vec!["ssp_holds".into(), holds_str(ssp.ssp_holds).into()]);
            rows.push(vec!["argmax".into(), ssp.argmax.iter().map(perm_str).collect::<Vec<_>>().join(";")]);
            push_audit(&mut rows, audit);
        }
    }
    let mut out = String::new();
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
