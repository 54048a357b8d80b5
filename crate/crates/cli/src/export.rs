//! JSON, Graphviz and plain-text renderings of a run.

use std::fmt::Write;

use wsurf::mmp::StepDetails;

use crate::run::{Note, RunArtifact, Snapshot};

pub fn to_json(a: &RunArtifact) -> String {
    serde_json::to_string_pretty(a).expect("artifact serializes")
}

fn esc(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_graph(out: &mut String, name: &str, s: &Snapshot, plus: Option<&str>, minus: Option<&str>) {
    let _ = writeln!(out, "graph \"{}\" {{", esc(name));
    let _ = writeln!(out, "  node [shape=box];");
    let node = |c: &crate::run::SnapCurve| {
        let mut tag = format!("{}:{}", c.label, c.self_int);
        if c.genus > 0 {
            let _ = write!(tag, " g{}", c.genus);
        }
        if plus == Some(c.label.as_str()) {
            tag.push_str(" \u{2295}");
        }
        if minus == Some(c.label.as_str()) {
            tag.push_str(" \u{2296}");
        }
        format!("  \"{}\" [label=\"{}\"];", esc(&c.label), esc(&tag))
    };
    for (i, mk) in s.marks.iter().enumerate() {
        let _ = writeln!(out, "  subgraph cluster_{i} {{");
        let _ = writeln!(out, "    style=rounded; label=\"mark {i}\";");
        for c in s.curves.iter().filter(|c| c.mark == Some(i)) {
            debug_assert!(mk.contains(&c.label));
            let _ = writeln!(out, "  {}", node(c));
        }
        let _ = writeln!(out, "  }}");
    }
    for c in s.curves.iter().filter(|c| c.mark.is_none()) {
        let _ = writeln!(out, "{}", node(c));
    }
    for (a, b, k) in &s.edges {
        if *k == 1 {
            let _ = writeln!(out, "  \"{}\" -- \"{}\";", esc(a), esc(b));
        } else {
            let _ = writeln!(out, "  \"{}\" -- \"{}\" [label=\"{k}\"];", esc(a), esc(b));
        }
    }
    out.push_str("}\n");
}

fn flip_curves(d: &StepDetails) -> Option<(&str, &str)> {
    match d {
        StepDetails::Flip(f) => Some((f.e_minus.as_str(), f.e_plus.as_str())),
        _ => None,
    }
}

/// One graph per model: the initial one and the one after each step. A
/// flipped curve E+ carries a circled plus, and the curve about to be flipped
/// next a circled minus.
pub fn to_dot(a: &RunArtifact) -> String {
    let mut out = String::new();
    let snaps: Vec<&Snapshot> = std::iter::once(&a.initial)
        .chain(a.steps.iter().map(|s| &s.after))
        .collect();
    for (i, s) in snaps.iter().enumerate() {
        let plus = i
            .checked_sub(1)
            .and_then(|j| flip_curves(&a.steps[j].record.details))
            .map(|f| f.1);
        let minus = a
            .steps
            .get(i)
            .and_then(|st| flip_curves(&st.record.details))
            .map(|f| f.0);
        let name = if i == 0 {
            format!("{} initial", a.scenario)
        } else {
            format!("{} step {}", a.scenario, i - 1)
        };
        dot_graph(&mut out, &name, s, plus, minus);
    }
    out
}

/// Human-readable log.
pub fn to_text(a: &RunArtifact) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "scenario {}", a.scenario);
    let _ = writeln!(
        out,
        "initial: {} curves, {}",
        a.initial.curves.len(),
        a.initial.invariants
    );
    for m in &a.initial_marks {
        let _ = writeln!(
            out,
            "  mark {} {} {} [{}]",
            m.chain,
            m.fraction,
            m.form,
            m.curves.join(" ")
        );
    }
    let mut notes = a.notes.iter().peekable();
    let note_at = |n: &Note| match n {
        Note::Resolved { after_step, .. }
        | Note::Tracked { after_step, .. }
        | Note::Maltese { after_step, .. }
        | Note::Nef { after_step, .. }
        | Note::PlaneReport { after_step, .. } => *after_step,
    };
    for i in 0..=a.steps.len() {
        while let Some(n) = notes.next_if(|n| note_at(n) <= i) {
            write_note(&mut out, n);
        }
        let Some(st) = a.steps.get(i) else { break };
        let r = &st.record;
        let _ = write!(out, "step {}: {} {}", r.index, r.kind, r.curve);
        match &r.details {
            StepDetails::Flip(f) => {
                let after = f
                    .chain_after
                    .as_ref()
                    .map_or("smooth".into(), ToString::to_string);
                let _ = write!(
                    out,
                    ", {} -> {}, E+ = {} (K.E+ = {})",
                    f.chain_before, after, f.e_plus, f.k_e_plus
                );
            }
            StepDetails::BlowDown(b) => {
                let cs: Vec<&str> = b.contractions.iter().map(|c| c.curve.as_str()).collect();
                let _ = write!(
                    out,
                    ", contracts {}, fibre multiplicity {}",
                    cs.join(" "),
                    b.fibre_multiplicity
                );
            }
            StepDetails::BlowUp { on, .. } => {
                let on: Vec<String> = on.iter().map(|(c, k)| format!("{c}:{k}")).collect();
                let _ = write!(out, " on {}", on.join(" "));
            }
            StepDetails::Canonical(c) => {
                let _ = write!(out, ", {} canonical component(s)", c.components.len());
            }
        }
        let _ = writeln!(out, "; {}", r.invariants_after);
        for l in &st.ledgers {
            let _ = writeln!(out, "  {} = {}", l.name, l.terms);
        }
    }
    if let Some(ab) = &a.abort {
        let _ = writeln!(
            out,
            "aborted at directive {} ({}): {}",
            ab.directive, ab.text, ab.message
        );
    }
    if let Some(t) = &a.terminal {
        let _ = writeln!(out, "terminal: {t}");
    }
    for e in &a.expectations {
        let _ = writeln!(
            out,
            "{} {}: {} (actual {})",
            if e.pass { "ok  " } else { "FAIL" },
            e.origin,
            e.text,
            e.actual
        );
    }
    let _ = writeln!(out, "status: {:?}", a.status);
    out
}

fn write_note(out: &mut String, n: &Note) {
    match n {
        Note::Resolved { curve, chain, .. } => {
            let _ = writeln!(out, "resolve {chain} at {curve}");
        }
        Note::Tracked { ledger, .. } => {
            let _ = writeln!(
                out,
                "track {} = {} (K.G = {}, G^2 = {})",
                ledger.name, ledger.terms, ledger.k_gamma_t, ledger.self_gamma_t
            );
        }
        Note::Maltese { curves, report, .. } => {
            let _ = writeln!(
                out,
                "maltese {}: {}",
                curves.join(" "),
                if report.pass { "pass" } else { "fail" }
            );
        }
        Note::Nef { report, .. } => {
            let _ = writeln!(
                out,
                "nef: {} ({} negative)",
                report.pass,
                report.negative.len()
            );
        }
        Note::PlaneReport {
            reports, images, ..
        } => {
            for r in reports {
                let _ = writeln!(out, "{r}");
            }
            for im in images {
                match im.degree {
                    Some(d) => {
                        let _ = writeln!(out, "  image {} has degree {d}", im.label);
                    }
                    None => {
                        let _ = writeln!(out, "  image {} has square {}", im.label, im.self_int);
                    }
                }
            }
        }
    }
}
