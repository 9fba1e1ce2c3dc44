//! Human-readable reports and DOT export.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::analysis::hunt::{HuntReport, TrialOutcome};
use crate::analysis::paper::{ItemStatus, PaperReport};
use crate::analysis::{OrderReport, Verdict};
use crate::net::{Marking, OrdinaryNet, TransitionId};
use crate::reach::ReachGraph;
use crate::transform::TransformTrace;

pub fn dot(net: &OrdinaryNet, graph: &ReachGraph) -> String {
    let mut out = String::from("digraph reachability {\n");
    for (i, m) in graph.nodes().iter().enumerate() {
        let shape = if i == 0 { ", shape=doublecircle" } else { "" };
        let _ = writeln!(out, "  n{i} [label=\"{m}\"{shape}];");
    }
    for e in graph.edges() {
        let _ = writeln!(
            out,
            "  n{} -> n{} [label=\"{}\"];",
            e.source,
            e.target,
            net.transition(e.transition).name
        );
    }
    out.push_str("}\n");
    out
}

pub fn marking_list(set: &BTreeSet<Marking>) -> String {
    if set.is_empty() {
        return "∅".to_string();
    }
    set.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

fn step_label(index: usize) -> String {
    // (a), (b), ..., (z), (aa), ...
    let mut n = index;
    let mut s = String::new();
    loop {
        s.insert(0, (b'a' + (n % 26) as u8) as char);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    format!("({s})")
}

fn order_names(net: &OrdinaryNet, order: &[TransitionId]) -> String {
    order
        .iter()
        .map(|t| net.transition(*t).name.as_str())
        .collect::<Vec<_>>()
        .join(",")
}

/// Step table: one block per transformed transition, listing the `rho`
/// applications and identity decisions that produced the new set.
pub fn trace_table(net: &OrdinaryNet, trace: &TransformTrace) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "W_0 = {}", trace.initial);
    let mut prefix = String::new();
    for (i, entry) in trace.entries.iter().enumerate() {
        let t = &net.transition(entry.transition).name;
        prefix.push_str(t);
        let _ = writeln!(out, "{} W_{prefix} = varrho(W, {t})", step_label(i));
        for step in &entry.steps {
            match step.place {
                Some(p) => {
                    let _ = writeln!(
                        out,
                        "      rho({}, {t}, {}) = {}",
                        step.input,
                        net.place_name(p),
                        step.outputs
                    );
                }
                None => {
                    let _ = writeln!(out, "      gain of {t} <= 0 under {}: kept", step.input);
                }
            }
        }
        let _ = writeln!(out, "      = {}", entry.after);
    }
    let _ = writeln!(out, "final: {}", trace.final_set());
    out
}

pub fn verdict_text(verdict: &Verdict) -> String {
    let mut out = String::new();
    let relation = if verdict.equal { "=" } else { "≠" };
    let _ = writeln!(
        out,
        "{} {relation} {} ({} vs {} markings, {} zero rule)",
        verdict.left.label,
        verdict.right.label,
        verdict.left.markings.len(),
        verdict.right.markings.len(),
        verdict.mode
    );
    if !verdict.equal {
        let _ = writeln!(
            out,
            "  witnesses ({} of {}): {}",
            verdict.witnesses.len(),
            verdict.difference_size,
            verdict
                .witnesses
                .iter()
                .map(|m| {
                    let side = if verdict.left.markings.contains(m) { "left" } else { "right" };
                    format!("{m} [{side} only]")
                })
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    out
}

pub fn order_text(net: &OrdinaryNet, report: &OrderReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "constraint {}; positive-gain uncontrollable transitions: [{}]; {} zero rule",
        report.constraint,
        order_names(net, &report.transitions),
        report.mode
    );
    let _ = writeln!(out, "A of original: {} markings", report.original.len());
    for (i, o) in report.orders.iter().enumerate() {
        let _ = writeln!(
            out,
            "order {i} [{}]: {} -> pruned {} -> class {} ({} markings)",
            order_names(net, &o.order),
            o.final_set,
            o.pruned,
            o.class,
            report.classes[o.class].len()
        );
    }
    let n = report.orders.len();
    if n > 1 && n <= 24 {
        let _ = writeln!(out, "pairwise (= same admissible set, x different):");
        for i in 0..n {
            let row: String = (0..n)
                .map(|j| {
                    if report.orders[i].class == report.orders[j].class {
                        '='
                    } else {
                        'x'
                    }
                })
                .collect();
            let _ = writeln!(out, "  {i:>3} {row}");
        }
    }
    if let Some((i, j)) = report.first_disagreement() {
        out.push_str(&verdict_text(&report.cell(net, i, j)));
    }
    for i in report.inequivalent_orders() {
        out.push_str(&verdict_text(&report.versus_original(net, i)));
    }
    let _ = writeln!(
        out,
        "{}",
        if report.inequivalence_found() {
            "result: inequivalence found"
        } else {
            "result: all orders equivalent to the original"
        }
    );
    out
}

pub fn paper_text(report: &PaperReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "counterexample replay ({} zero rule)", report.mode);
    for item in &report.items {
        let status = match item.status {
            ItemStatus::Pass => "PASS",
            ItemStatus::Fail => "FAIL",
            ItemStatus::Divergent => "DIVERGENT",
        };
        let _ = writeln!(
            out,
            "[{status}] {:<10} {}: expected {}, got {}",
            item.id, item.description, item.expected, item.actual
        );
    }
    if !report.zero_rule_disagreements.is_empty() {
        let _ = writeln!(
            out,
            "zero rules disagree on: {}",
            report
                .zero_rule_disagreements
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(", ")
        );
    }
    if let Some(v) = &report.order_verdict {
        out.push_str(&verdict_text(v));
    }
    let _ = writeln!(
        out,
        "{}",
        if report.all_pass() {
            "all items pass"
        } else {
            "verification mismatch"
        }
    );
    out
}

pub fn hunt_text(report: &HuntReport) -> String {
    let mut out = String::new();
    let s = &report.summary;
    let _ = writeln!(
        out,
        "hunt seed {} trials {}: {} checked, {} unbounded, {} capped, {} errors",
        report.config.seed, s.trials, s.checked, s.skipped_unbounded, s.skipped_cap, s.errors
    );
    let _ = writeln!(
        out,
        "flagged {} (order-sensitive {}, inequivalent to original {}); non-convergent {}; \
         weak-admissibility violations {}; invariant violations {}; order analysis skipped {}",
        s.flagged,
        s.order_sensitive,
        s.inequivalent,
        s.non_convergent,
        s.weak_admissibility_violations,
        s.invariant_violations,
        s.order_error
    );
    for t in &report.trials {
        if let TrialOutcome::Checked(f) = &t.outcome {
            if f.flagged() {
                let _ = writeln!(
                    out,
                    "  trial {} seed {:#018x}: {} reachable, {} orders in {} classes, inequivalent {:?}",
                    t.index, t.seed, f.reachable, f.orders, f.classes, f.inequivalent_orders
                );
            }
            for v in &f.invariant_violations {
                let _ = writeln!(out, "  trial {} invariant violation: {v}", t.index);
            }
            for v in &f.weak_admissibility_violations {
                let _ = writeln!(out, "  trial {} not weakly admissible: {v}", t.index);
            }
        }
    }
    out
}
