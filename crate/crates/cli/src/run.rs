//! Building a scenario's model and executing its script.

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::Serialize;
use wsurf::cfrac::{hj_value, is_wahl_chain, Chain, Fraction};
use wsurf::degeneration::{init_ledger, plane_run, transport_ledger, ImageCurve};
use wsurf::mmp::{
    blow_down_step, blow_up_step, canonical_step, classify_terminal, flip_step, greedy_move,
    maltese_validate, MalteseReport,
};
use wsurf::surface::{
    discrepancy_of, global_invariants, k_pair, mark_forms, nef_report, pair_curves, validate_model,
    NefReport,
};
use wsurf::{
    CurveId, GlobalInvariants, Ledger, MmpError, PlaneCurveReport, StepKind, StepRecord,
    SurfaceModel, Terminal, Q,
};

use crate::error::CliError;
use crate::expect::{Expectation, Flag, Quantity, TerminalKind};
use crate::scenario::{BuildOp, Directive, Scenario};

pub const SCHEMA_VERSION: u32 = 1;

/// Model described by the scenario, before any script directive.
pub fn build_model(s: &Scenario) -> Result<SurfaceModel, CliError> {
    let mut m = SurfaceModel::new(s.k2, s.euler);
    let err = |e: wsurf::SurfaceError| CliError::Build(e.to_string());
    for c in &s.curves {
        m.add_curve(&c.label, c.self_int, c.genus).map_err(err)?;
    }
    let mut seen = BTreeMap::new();
    for mt in &s.intersections {
        let (a, b) = (m.id(&mt.a).map_err(err)?, m.id(&mt.b).map_err(err)?);
        if seen.insert((a.min(b), a.max(b)), ()).is_some() {
            return Err(CliError::Build(format!(
                "intersection of '{}' and '{}' given twice",
                mt.a, mt.b
            )));
        }
        m.set_meet(a, b, mt.mult).map_err(err)?;
    }
    for op in &s.build {
        match op {
            BuildOp::BlowUp { label, on } => {
                let on = resolve_on(&m, on).map_err(err)?;
                m.blow_up(label, &on).map_err(err)?;
            }
            BuildOp::BlowDown(l) => {
                let id = m.id(l).map_err(err)?;
                m.contract(id).map_err(err)?;
            }
        }
    }
    for mk in &s.marks {
        let ids = mk
            .iter()
            .map(|l| m.id(l))
            .collect::<Result<Vec<_>, _>>()
            .map_err(err)?;
        m.add_mark(ids).map_err(err)?;
    }
    let v = validate_model(&m);
    if !v.is_empty() {
        return Err(CliError::Invalid(
            v.iter().map(ToString::to_string).collect(),
        ));
    }
    Ok(m)
}

fn resolve_on(
    m: &SurfaceModel,
    on: &[(String, u32)],
) -> Result<Vec<(CurveId, u32)>, wsurf::SurfaceError> {
    on.iter().map(|(l, k)| Ok((m.id(l)?, *k))).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SnapCurve {
    pub label: String,
    pub self_int: i64,
    pub genus: u32,
    pub mark: Option<usize>,
}

/// Labelled copy of a dual graph, independent of curve ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Snapshot {
    pub curves: Vec<SnapCurve>,
    pub edges: Vec<(String, String, u32)>,
    pub marks: Vec<Vec<String>>,
    pub invariants: GlobalInvariants,
}

impl Snapshot {
    pub fn of(m: &SurfaceModel) -> Snapshot {
        Snapshot {
            curves: m
                .curves()
                .map(|c| SnapCurve {
                    label: c.label.clone(),
                    self_int: c.self_int,
                    genus: c.genus,
                    mark: m.mark_of(c.id),
                })
                .collect(),
            edges: m
                .intersections()
                .map(|(a, b, k)| (m.label(a).to_string(), m.label(b).to_string(), k))
                .collect(),
            marks: m
                .marks()
                .iter()
                .map(|mk| mk.curves.iter().map(|&c| m.label(c).to_string()).collect())
                .collect(),
            invariants: global_invariants(m),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerState {
    pub name: String,
    pub terms: String,
    pub k_gamma_t: String,
    pub self_gamma_t: String,
    pub diagnostics: Vec<String>,
}

impl LedgerState {
    fn of(l: &Ledger, m: &SurfaceModel) -> LedgerState {
        LedgerState {
            name: l.name.clone(),
            terms: l.display(m),
            k_gamma_t: l.k_gamma_t.to_string(),
            self_gamma_t: l.self_gamma_t.to_string(),
            diagnostics: l.diagnostics.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepEntry {
    pub record: StepRecord,
    pub after: Snapshot,
    pub ledgers: Vec<LedgerState>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MarkInfo {
    pub curves: Vec<String>,
    pub chain: String,
    pub fraction: String,
    pub form: String,
}

/// Output of a directive that is not a step.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "note", rename_all = "snake_case")]
pub enum Note {
    Resolved {
        after_step: usize,
        curve: String,
        chain: String,
    },
    Tracked {
        after_step: usize,
        ledger: LedgerState,
    },
    Maltese {
        after_step: usize,
        curves: [String; 4],
        report: Box<MalteseReport>,
    },
    Nef {
        after_step: usize,
        report: NefReport,
    },
    PlaneReport {
        after_step: usize,
        reports: Vec<PlaneCurveReport>,
        images: Vec<ImageCurve>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExpectationResult {
    /// "script N" for inline assertions, "expect N" for the final section.
    pub origin: String,
    pub text: String,
    pub pass: bool,
    pub actual: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Abort {
    pub directive: usize,
    pub text: String,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    ExpectationFailed,
    Aborted,
    Stuck,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::ExpectationFailed => 1,
            Status::Aborted => 2,
            Status::Stuck => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunArtifact {
    pub schema_version: u32,
    pub scenario: String,
    pub initial: Snapshot,
    pub initial_marks: Vec<MarkInfo>,
    pub steps: Vec<StepEntry>,
    pub notes: Vec<Note>,
    pub expectations: Vec<ExpectationResult>,
    pub terminal: Option<Terminal>,
    pub abort: Option<Abort>,
    pub final_marks: Vec<MarkInfo>,
    pub final_ledgers: Vec<LedgerState>,
    pub status: Status,
}

impl RunArtifact {
    pub fn failed_expectations(&self) -> impl Iterator<Item = &ExpectationResult> {
        self.expectations.iter().filter(|e| !e.pass)
    }

    pub fn count(&self, kind: StepKind) -> usize {
        self.steps.iter().filter(|s| s.record.kind == kind).count()
    }
}

fn mark_info(m: &SurfaceModel) -> Vec<MarkInfo> {
    mark_forms(m)
        .into_iter()
        .map(|(curves, ch, form)| MarkInfo {
            curves,
            chain: ch.as_ref().map_or("?".into(), ToString::to_string),
            fraction: ch.as_ref().map_or("?".into(), |c| {
                let f = hj_value(c);
                format!("1/{}(1,{})", f.m(), f.q())
            }),
            form: form.to_string(),
        })
        .collect()
}

struct State<'a> {
    scenario: &'a Scenario,
    model: SurfaceModel,
    tracked: Vec<Ledger>,
    steps: Vec<StepEntry>,
    notes: Vec<Note>,
    reports: BTreeMap<String, PlaneCurveReport>,
    images: BTreeMap<String, ImageCurve>,
    maltese: Option<MalteseReport>,
    terminal: Option<Terminal>,
    results: Vec<ExpectationResult>,
}

impl State<'_> {
    fn id(&self, l: &str) -> Result<CurveId, String> {
        self.model.id(l).map_err(|e| e.to_string())
    }

    fn push_step(&mut self, after: SurfaceModel, rec: StepRecord) -> Result<(), String> {
        let mut moved = Vec::with_capacity(self.tracked.len());
        for l in &self.tracked {
            moved.push(
                transport_ledger(&self.model, &after, &rec, l)
                    .map_err(|e| format!("ledger '{}': {e}", l.name))?,
            );
        }
        self.tracked = moved;
        self.model = after;
        self.steps.push(StepEntry {
            record: rec,
            after: Snapshot::of(&self.model),
            ledgers: self
                .tracked
                .iter()
                .map(|l| LedgerState::of(l, &self.model))
                .collect(),
        });
        Ok(())
    }

    /// Ok(true) when execution should stop (engine stuck).
    fn apply(&mut self, d: &Directive, at: usize) -> Result<bool, String> {
        let idx = self.steps.len();
        match d {
            Directive::Resolve(l) => {
                let id = self.id(l)?;
                let i = self
                    .model
                    .mark_of(id)
                    .ok_or_else(|| format!("'{l}' lies in no mark"))?;
                let chain = self
                    .model
                    .mark_chain(i)
                    .map_or("?".into(), |c| c.to_string());
                self.model.remove_mark(i);
                self.notes.push(Note::Resolved {
                    after_step: idx,
                    curve: l.clone(),
                    chain,
                });
            }
            Directive::Track(name) => {
                if self.tracked.iter().any(|l| &l.name == name) {
                    return Err(format!("ledger '{name}' is already tracked"));
                }
                let seed = self
                    .scenario
                    .ledgers
                    .iter()
                    .find(|s| &s.name == name)
                    .expect("checked at parse");
                let terms = seed
                    .terms
                    .iter()
                    .map(|(l, a)| Ok((self.id(l)?, *a)))
                    .collect::<Result<Vec<_>, String>>()?;
                let l = init_ledger(&self.model, name, &terms, seed.genus)
                    .map_err(|e| e.to_string())?;
                self.notes.push(Note::Tracked {
                    after_step: idx,
                    ledger: LedgerState::of(&l, &self.model),
                });
                self.tracked.push(l);
            }
            Directive::Flip(l) => match flip_step(&self.model, self.id(l)?, idx) {
                Ok((after, rec)) => self.push_step(after, rec)?,
                Err(MmpError::Unsupported(u)) => {
                    self.terminal = Some(Terminal::Stuck(format!(
                        "step {idx}: flip '{l}': {}",
                        MmpError::Unsupported(u)
                    )));
                    return Ok(true);
                }
                Err(e) => return Err(e.to_string()),
            },
            Directive::BlowDown(l) => {
                let (after, rec) =
                    blow_down_step(&self.model, self.id(l)?, idx).map_err(|e| e.to_string())?;
                self.push_step(after, rec)?;
            }
            Directive::BlowUp { label, on } => {
                let on = resolve_on(&self.model, on).map_err(|e| e.to_string())?;
                let (after, rec) =
                    blow_up_step(&self.model, label, &on, idx).map_err(|e| e.to_string())?;
                self.push_step(after, rec)?;
            }
            Directive::Canonical => {
                let (after, rec) = canonical_step(&self.model, idx).map_err(|e| e.to_string())?;
                self.push_step(after, rec)?;
            }
            Directive::PlaneReport(labels) => {
                let ids = labels
                    .iter()
                    .map(|l| self.id(l))
                    .collect::<Result<Vec<_>, _>>()?;
                let run =
                    plane_run(&self.model, &self.tracked, &ids, idx).map_err(|e| e.to_string())?;
                for (rec, after) in run.steps.into_iter().zip(run.models) {
                    self.push_step(after, rec)?;
                }
                debug_assert_eq!(self.tracked, run.ledgers);
                for r in &run.reports {
                    self.reports.insert(r.name.clone(), r.clone());
                }
                for im in &run.images {
                    self.images.insert(im.label.clone(), im.clone());
                }
                self.notes.push(Note::PlaneReport {
                    after_step: self.steps.len(),
                    reports: run.reports,
                    images: run.images,
                });
            }
            Directive::Maltese { a, b, c, f } => {
                let r = maltese_validate(
                    &self.model,
                    self.id(a)?,
                    self.id(b)?,
                    self.id(c)?,
                    self.id(f)?,
                )
                .map_err(|e| e.to_string())?;
                self.maltese = Some(r.clone());
                self.notes.push(Note::Maltese {
                    after_step: idx,
                    curves: [a.clone(), b.clone(), c.clone(), f.clone()],
                    report: Box::new(r),
                });
            }
            Directive::Nef => self.notes.push(Note::Nef {
                after_step: idx,
                report: nef_report(&self.model),
            }),
            Directive::Greedy { reverse } => loop {
                match greedy_move(&self.model, *reverse, self.steps.len()) {
                    Ok((after, rec)) => self.push_step(after, rec)?,
                    Err(t) => {
                        let stuck = matches!(t, Terminal::Stuck(_));
                        self.terminal = Some(t);
                        return Ok(stuck);
                    }
                }
            },
            Directive::Expect(e) => {
                let r = self.evaluate(e, format!("script {}", at + 1));
                self.results.push(r);
            }
        }
        Ok(false)
    }

    fn ledger(&self, name: &str) -> Result<&Ledger, String> {
        self.tracked
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| format!("ledger '{name}' is not tracked"))
    }

    fn report(&self, name: &str) -> Result<&PlaneCurveReport, String> {
        self.reports
            .get(name)
            .ok_or_else(|| format!("no plane report for '{name}'"))
    }

    /// The mark containing `curve`, oriented to start at it when it is the last curve.
    fn oriented_mark(&self, curve: &str) -> Result<Chain, String> {
        let id = self.id(curve)?;
        let i = self
            .model
            .mark_of(id)
            .ok_or_else(|| format!("'{curve}' lies in no mark"))?;
        let ch = self.model.mark_chain(i).ok_or("mark is not a chain")?;
        let last = self.model.marks()[i].curves.last() == Some(&id) && ch.len() > 1;
        Ok(if last { ch.reversed() } else { ch })
    }

    fn quantity(&self, q: &Quantity) -> Result<Q, String> {
        let int = |n: i64| Q::from_integer(n.into());
        let inv = || global_invariants(&self.model);
        Ok(match q {
            Quantity::K2Special => inv().k2_special,
            Quantity::K2General => inv().k2_general,
            Quantity::EulerGeneral => int(inv().euler_general),
            Quantity::Curves => int(self.model.curve_count() as i64),
            Quantity::Flips => int(self.count(StepKind::Flip)),
            Quantity::BlowDowns => int(self.count(StepKind::BlowDown)),
            Quantity::BlowUps => int(self.count(StepKind::BlowUp)),
            Quantity::KPair(l) => k_pair(&self.model, self.id(l)?).map_err(|e| e.to_string())?,
            Quantity::SelfPair(l) => {
                let id = self.id(l)?;
                pair_curves(&self.model, id, id).map_err(|e| e.to_string())?
            }
            Quantity::Discrepancy(l) => discrepancy_of(&self.model, self.id(l)?),
            Quantity::DiscrepancySum(ls) => {
                let mut s = Q::zero();
                for l in ls {
                    s += discrepancy_of(&self.model, self.id(l)?);
                }
                s
            }
            Quantity::KGamma(n) => self.ledger(n)?.k_gamma_t.clone(),
            Quantity::SelfGamma(n) => self.ledger(n)?.self_gamma_t.clone(),
            Quantity::Degree(n) => int(self.report(n)?.degree),
            Quantity::Delta(n) => int(self.report(n)?.delta),
            Quantity::Points(n, mult) => int(self.report(n)?.count_with_multiplicity(*mult) as i64),
            Quantity::ImageDegree(l) => {
                let im = self
                    .images
                    .get(l)
                    .ok_or_else(|| format!("'{l}' is not a curve on the plane"))?;
                int(im.degree.ok_or_else(|| {
                    format!("'{l}' (square {}) is not a plane curve image", im.self_int)
                })?)
            }
        })
    }

    fn count(&self, kind: StepKind) -> i64 {
        self.steps.iter().filter(|s| s.record.kind == kind).count() as i64
    }

    fn check(&self, e: &Expectation) -> Result<(bool, String), String> {
        Ok(match e {
            Expectation::Compare {
                quantity,
                cmp,
                value,
            } => {
                let a = self.quantity(quantity)?;
                (cmp.holds(&a, value), a.to_string())
            }
            Expectation::Flag(f) => match f {
                Flag::Valid => {
                    let v = validate_model(&self.model);
                    (v.is_empty(), format!("{} violation(s)", v.len()))
                }
                Flag::Smooth => (
                    self.model.is_smooth(),
                    format!("{} mark(s)", self.model.marks().len()),
                ),
                Flag::Nef => {
                    let r = nef_report(&self.model);
                    let neg: Vec<String> = r
                        .negative
                        .iter()
                        .map(|p| format!("K.{} = {}", p.curve, p.k))
                        .collect();
                    (
                        r.pass,
                        if neg.is_empty() {
                            "nef".into()
                        } else {
                            neg.join(", ")
                        },
                    )
                }
                Flag::Maltese => match &self.maltese {
                    Some(r) => (r.pass, format!("pass = {}", r.pass)),
                    None => (false, "no maltese check was run".into()),
                },
                Flag::GenusOk(n) => {
                    let r = self.report(n)?;
                    (
                        r.genus_ok,
                        format!("delta {}, degree {}", r.delta, r.degree),
                    )
                }
                Flag::ProximityOk(n) => {
                    let r = self.report(n)?;
                    (r.proximity_ok, format!("{}", r.proximity_ok))
                }
                Flag::Integral(n) => {
                    let l = self.ledger(n)?;
                    let ok = l.is_integral() && l.diagnostics.is_empty();
                    (
                        ok,
                        if l.diagnostics.is_empty() {
                            l.display(&self.model)
                        } else {
                            l.diagnostics.join("; ")
                        },
                    )
                }
            },
            Expectation::Ledger { name, terms } => {
                let l = self.ledger(name)?;
                let actual: BTreeMap<String, Q> = l.labeled(&self.model).into_iter().collect();
                (same_terms(&actual, terms), l.display(&self.model))
            }
            Expectation::Components { name, terms } => {
                let r = self.report(name)?;
                let actual: BTreeMap<String, Q> = r
                    .components
                    .iter()
                    .map(|(c, a)| (c.clone(), a.parse::<Q>().expect("formatted rational")))
                    .collect();
                let shown: Vec<(String, Q)> =
                    actual.iter().map(|(c, a)| (c.clone(), a.clone())).collect();
                (
                    same_terms(&actual, terms),
                    wsurf::degeneration::format_terms(&shown),
                )
            }
            Expectation::Clusters { name, signature } => {
                let got = self.report(name)?.cluster_signature();
                (&got == signature, got)
            }
            Expectation::Marks(lens) => {
                let mut got: Vec<usize> =
                    self.model.marks().iter().map(|m| m.curves.len()).collect();
                let mut want = lens.clone();
                got.sort_unstable_by(|a, b| b.cmp(a));
                want.sort_unstable_by(|a, b| b.cmp(a));
                let shown = got
                    .iter()
                    .map(ToString::to_string)
                    .collect::<Vec<_>>()
                    .join(" ");
                (
                    got == want,
                    if shown.is_empty() {
                        "no marks".into()
                    } else {
                        shown
                    },
                )
            }
            Expectation::Wahl { curve, n, a } => {
                let ch = self.oriented_mark(curve)?;
                match is_wahl_chain(&ch) {
                    Some(w) => (
                        w.n == (*n).into() && w.a == (*a).into(),
                        format!("{ch} = Wahl({}, {})", w.n, w.a),
                    ),
                    None => (false, format!("{ch} is not Wahl")),
                }
            }
            Expectation::Fraction { curve, m, q } => {
                let ch = self.oriented_mark(curve)?;
                let v = hj_value(&ch);
                let ok = Fraction::new(*m, *q).is_ok_and(|f| f == v);
                (ok, format!("{ch} = {v}"))
            }
            Expectation::Terminal { kind, reason } => match &self.terminal {
                None => (false, "run has not terminated".into()),
                Some(t) => {
                    let k = match t {
                        Terminal::MinimalModel => TerminalKind::Minimal,
                        Terminal::RankOneDelPezzo { .. } => TerminalKind::DelPezzo,
                        Terminal::RuledFibration { .. } => TerminalKind::Ruled,
                        Terminal::Stuck(_) => TerminalKind::Stuck,
                        Terminal::Open { .. } => TerminalKind::Open,
                    };
                    let text = t.to_string();
                    let ok =
                        k == *kind && reason.as_ref().is_none_or(|r| text.contains(r.as_str()));
                    (ok, text)
                }
            },
        })
    }

    fn evaluate(&self, e: &Expectation, origin: String) -> ExpectationResult {
        let (pass, actual) = match self.check(e) {
            Ok(r) => r,
            Err(why) => (false, format!("cannot evaluate: {why}")),
        };
        ExpectationResult {
            origin,
            text: e.to_string(),
            pass,
            actual,
        }
    }
}

fn same_terms(actual: &BTreeMap<String, Q>, expected: &[(String, Q)]) -> bool {
    let mut want: BTreeMap<String, Q> = BTreeMap::new();
    for (c, a) in expected {
        *want.entry(c.clone()).or_insert_with(Q::zero) += a;
    }
    want.retain(|_, a| !a.is_zero());
    &want == actual
}

fn asserts_stuck(s: &Scenario) -> bool {
    let stuck = |e: &Expectation| {
        matches!(
            e,
            Expectation::Terminal {
                kind: TerminalKind::Stuck,
                ..
            }
        )
    };
    s.expect.iter().any(stuck)
        || s.script
            .iter()
            .any(|d| matches!(d, Directive::Expect(e) if stuck(e)))
}

/// Runs the script; build failures are returned as errors, everything after
/// that is recorded in the artifact.
pub fn execute(s: &Scenario) -> Result<RunArtifact, CliError> {
    let model = build_model(s)?;
    let initial = Snapshot::of(&model);
    let initial_marks = mark_info(&model);
    let mut st = State {
        scenario: s,
        model,
        tracked: Vec::new(),
        steps: Vec::new(),
        notes: Vec::new(),
        reports: BTreeMap::new(),
        images: BTreeMap::new(),
        maltese: None,
        terminal: None,
        results: Vec::new(),
    };
    let mut abort = None;
    for (i, d) in s.script.iter().enumerate() {
        match st.apply(d, i) {
            Ok(false) => {}
            Ok(true) => break,
            Err(message) => {
                abort = Some(Abort {
                    directive: i + 1,
                    text: d.to_string(),
                    message,
                });
                break;
            }
        }
    }
    if abort.is_none() && st.terminal.is_none() {
        st.terminal = Some(classify_terminal(&st.model));
    }
    if abort.is_none() {
        for (i, e) in s.expect.iter().enumerate() {
            let r = st.evaluate(e, format!("expect {}", i + 1));
            st.results.push(r);
        }
    }
    let status = if abort.is_some() {
        Status::Aborted
    } else if st.results.iter().any(|r| !r.pass) {
        Status::ExpectationFailed
    } else if matches!(st.terminal, Some(Terminal::Stuck(_))) && !asserts_stuck(s) {
        Status::Stuck
    } else {
        Status::Ok
    };
    Ok(RunArtifact {
        schema_version: SCHEMA_VERSION,
        scenario: s.name.clone(),
        initial,
        initial_marks,
        final_marks: mark_info(&st.model),
        final_ledgers: st
            .tracked
            .iter()
            .map(|l| LedgerState::of(l, &st.model))
            .collect(),
        steps: st.steps,
        notes: st.notes,
        expectations: st.results,
        terminal: st.terminal,
        abort,
        status,
    })
}

/// Summary printed by `check`.
pub fn describe_model(m: &SurfaceModel) -> String {
    let mut out = String::new();
    let inv = global_invariants(m);
    out.push_str(&format!(
        "{} curves, resolution K^2 = {}, e = {}\n",
        m.curve_count(),
        m.resolution_k2(),
        m.resolution_euler()
    ));
    out.push_str(&format!(
        "special fibre: K^2 = {}, e(general) = {}\n",
        inv.k2_special, inv.euler_general
    ));
    for (i, mk) in mark_info(m).iter().enumerate() {
        out.push_str(&format!(
            "mark {i}: {} {} {} [{}]\n",
            mk.chain,
            mk.fraction,
            mk.form,
            mk.curves.join(" ")
        ));
    }
    let neg: Vec<String> = m
        .curves()
        .filter(|c| m.mark_of(c.id).is_none())
        .filter_map(|c| {
            k_pair(m, c.id)
                .ok()
                .filter(|k| *k < Q::zero())
                .map(|k| format!("{} ({k})", c.label))
        })
        .collect();
    if neg.is_empty() {
        out.push_str("K is nef on the encoded curves\n");
    } else {
        out.push_str(&format!("K-negative curves: {}\n", neg.join(", ")));
    }
    out
}

pub fn load_scenario(path: &std::path::Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path)?;
    crate::scenario::parse_scenario(&text).map_err(CliError::Parse)
}
