//! MMP steps as dual-graph surgery: extremal classification, the end-attached
//! W-flip, W-blow-downs, point blow-ups, the maltese check, canonical
//! contraction and the driver.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cfrac::{hj_value, is_wahl_chain, recognize_t_form, Chain, TForm, WahlPair};
use crate::error::{MmpError, SurfaceError, UnsupportedFlip};
use crate::linalg::Q;
use crate::qfmt;
use crate::surface::{
    discrepancies, global_invariants, k_pair, nef_report, pair_curves, q, validate_model, CurveId,
    GlobalInvariants, SurfaceModel,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExtremalKind {
    PositiveSquare,
    ZeroSquare,
    NegativeSquare,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalClass {
    pub kind: ExtremalKind,
    pub gamma: CurveId,
    #[serde(with = "qfmt")]
    pub k_pairing: Q,
    #[serde(with = "qfmt")]
    pub self_pairing: Q,
    pub note: Option<&'static str>,
}

pub fn classify_extremal(m: &SurfaceModel, gamma: CurveId) -> Result<ExtremalClass, MmpError> {
    let k = k_pair(m, gamma)?;
    if !k.is_negative() {
        return Err(MmpError::NotKNegative {
            curve: m.label(gamma).to_string(),
            k: k.to_string(),
        });
    }
    let s = pair_curves(m, gamma, gamma)?;
    let (kind, note) = if s.is_positive() {
        (
            ExtremalKind::PositiveSquare,
            Some("degeneration of P^2, Markov case"),
        )
    } else if s.is_zero() {
        (
            ExtremalKind::ZeroSquare,
            Some("geometrically ruled, smooth deformation"),
        )
    } else {
        (ExtremalKind::NegativeSquare, None)
    };
    Ok(ExtremalClass {
        kind,
        gamma,
        k_pairing: k,
        self_pairing: s,
        note,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum End {
    First,
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipConfig {
    pub e_minus: CurveId,
    pub mark: usize,
    pub attachment: End,
}

fn require_minus_one(m: &SurfaceModel, c: CurveId) -> Result<(), MmpError> {
    let node = m.node(c)?;
    if node.self_int != -1 || node.genus != 0 {
        return Err(SurfaceError::NotMinusOne(node.label.clone()).into());
    }
    if m.mark_of(c).is_some() {
        return Err(SurfaceError::CurveInMark(node.label.clone()).into());
    }
    Ok(())
}

/// Detects the end-attached configuration around a (-1)-curve.
pub fn flip_config(m: &SurfaceModel, e_minus: CurveId) -> Result<FlipConfig, MmpError> {
    require_minus_one(m, e_minus)?;
    let met = m.marks_met(e_minus);
    let (&mark, hits) = match met.len() {
        0 => return Err(MmpError::Unsupported(UnsupportedFlip::NoMark)),
        1 => met.iter().next().expect("one mark"),
        n => return Err(MmpError::Unsupported(UnsupportedFlip::SeveralMarks(n))),
    };
    let total: u32 = hits.iter().map(|&(_, k)| k).sum();
    if total != 1 {
        return Err(MmpError::Unsupported(
            UnsupportedFlip::MultipleIntersection(total),
        ));
    }
    let curves = &m.marks()[mark].curves;
    let hit = hits[0].0;
    let attachment = if curves[0] == hit {
        End::First
    } else if *curves.last().expect("non-empty mark") == hit {
        End::Last
    } else {
        return Err(MmpError::Unsupported(UnsupportedFlip::InteriorAttachment(
            m.label(hit).to_string(),
        )));
    };
    Ok(FlipConfig {
        e_minus,
        mark,
        attachment,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipSummary {
    pub e_minus: String,
    pub e_plus: String,
    #[serde(skip)]
    pub e_plus_id: CurveId,
    /// Chain read from the attachment end.
    pub chain_before: Chain,
    pub r: usize,
    pub chain_after: Option<Chain>,
    pub wahl_before: Option<WahlPair>,
    pub wahl_after: Option<WahlPair>,
    /// E-, E_1, ..., E_r in contraction order.
    pub contracted: Vec<String>,
    #[serde(skip)]
    pub contracted_ids: Vec<CurveId>,
    #[serde(with = "qfmt")]
    pub k_e_plus: Q,
}

/// The frequent-case W-flip: contract E-, E_1, ..., E_r; E+ is the old E_m.
pub fn end_flip(
    m: &SurfaceModel,
    cfg: &FlipConfig,
) -> Result<(SurfaceModel, FlipSummary), MmpError> {
    let detected = flip_config(m, cfg.e_minus)?;
    if detected != *cfg {
        return Err(MmpError::Identity(format!(
            "flip configuration {:?} does not match the model ({:?})",
            cfg, detected
        )));
    }
    let mut oriented = m.marks()[cfg.mark].curves.clone();
    if cfg.attachment == End::Last {
        oriented.reverse();
    }
    let b: Vec<i64> = oriented.iter().map(|&c| -m.self_int(c)).collect();
    let len = b.len();
    let r = b[..len - 1].iter().take_while(|&&x| x == 2).count();
    let last = b[len - 1];
    let chain_before = Chain::new(b.clone()).expect("validated mark");
    let frequent = if r == len - 1 {
        last == r as i64 + 4
    } else {
        last == r as i64 + 2
    };
    if !frequent {
        return Err(MmpError::Unsupported(UnsupportedFlip::Dichotomy {
            chain: chain_before.to_string(),
            r,
            last,
        }));
    }

    let mut out = m.clone();
    let mark_curves = out.remove_mark(cfg.mark).curves;
    let mut contracted_ids = vec![cfg.e_minus];
    out.contract(cfg.e_minus)?;
    for &e in &oriented[..r] {
        out.contract(e)?;
        contracted_ids.push(e);
    }
    let e_plus = oriented[len - 1];
    let survivors: Vec<CurveId> = oriented[r..len - 1].to_vec();
    let (chain_after, wahl_after) = if survivors.is_empty() {
        (None, None)
    } else {
        let stored: Vec<CurveId> = mark_curves
            .iter()
            .copied()
            .filter(|c| survivors.contains(c))
            .collect();
        out.add_mark(stored)?;
        let ch = Chain::new(survivors.iter().map(|&c| -out.self_int(c)).collect())
            .map_err(|e| MmpError::Identity(format!("surviving chain: {e}")))?;
        let w = is_wahl_chain(&ch)
            .ok_or_else(|| MmpError::Identity(format!("surviving chain {ch} is not Wahl")))?;
        (Some(ch), Some(w))
    };

    let k_e_plus = k_pair(&out, e_plus)?;
    let expected = match &chain_after {
        None => q(r as i64 + 1),
        Some(ch) => {
            let d = discrepancies(ch);
            q(r as i64) - d.last().expect("non-empty").clone()
        }
    };
    if k_e_plus != expected {
        return Err(MmpError::Identity(format!(
            "K.E+ = {k_e_plus}, expected {expected}"
        )));
    }
    let summary = FlipSummary {
        e_minus: m.label(cfg.e_minus).to_string(),
        e_plus: m.label(e_plus).to_string(),
        e_plus_id: e_plus,
        wahl_before: is_wahl_chain(&chain_before),
        chain_before,
        r,
        chain_after,
        wahl_after,
        contracted: contracted_ids
            .iter()
            .map(|&c| m.label(c).to_string())
            .collect(),
        contracted_ids,
        k_e_plus,
    };
    Ok((out, summary))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contraction {
    pub curve: String,
    #[serde(skip)]
    pub id: CurveId,
    /// Curves met at the moment of contraction, with multiplicities.
    pub met: Vec<(String, u32)>,
    #[serde(skip)]
    pub met_ids: Vec<(CurveId, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BlowDownSummary {
    pub gamma: String,
    #[serde(skip)]
    pub gamma_id: CurveId,
    pub contractions: Vec<Contraction>,
    pub residual: Option<Chain>,
    pub residual_wahl: Option<WahlPair>,
    /// The general-fibre exceptional curve degenerates to c * gamma, c = -1/K.gamma.
    pub fibre_multiplicity: i64,
}

fn chain_order(m: &SurfaceModel, pool: &[CurveId]) -> Option<Vec<CurveId>> {
    let set: BTreeSet<CurveId> = pool.iter().copied().collect();
    let adj = |c: CurveId| -> Vec<CurveId> {
        m.neighbors(c)
            .into_iter()
            .filter(|(n, _)| set.contains(n))
            .map(|(n, _)| n)
            .collect()
    };
    for &c in pool {
        let nb = m.neighbors(c);
        if nb.iter().any(|&(n, k)| set.contains(&n) && k != 1) || adj(c).len() > 2 {
            return None;
        }
    }
    let start = *pool.iter().find(|&&c| adj(c).len() <= 1)?;
    let mut order = vec![start];
    let mut prev: Option<CurveId> = None;
    let mut cur = start;
    loop {
        let next = adj(cur).into_iter().find(|&n| Some(n) != prev);
        match next {
            Some(n) if !order.contains(&n) => {
                order.push(n);
                prev = Some(cur);
                cur = n;
            }
            Some(_) => return None,
            None => break,
        }
    }
    (order.len() == pool.len()).then_some(order)
}

fn contract_recording(
    out: &mut SurfaceModel,
    before: &SurfaceModel,
    e: CurveId,
) -> Result<Contraction, MmpError> {
    let met_ids = out.contract(e)?;
    Ok(Contraction {
        curve: before.label(e).to_string(),
        id: e,
        met: met_ids
            .iter()
            .map(|&(c, k)| (out.label(c).to_string(), k))
            .collect(),
        met_ids,
    })
}

/// Divisorial contraction: gamma, then every curve of the touched marks that
/// becomes a (-1)-curve; the residue must be empty or a Wahl chain.
pub fn w_blow_down(
    m: &SurfaceModel,
    gamma: CurveId,
) -> Result<(SurfaceModel, BlowDownSummary), MmpError> {
    let ext = classify_extremal(m, gamma)?;
    if ext.kind != ExtremalKind::NegativeSquare {
        return Err(MmpError::NotWBlowDown(format!(
            "'{}' has non-negative square",
            m.label(gamma)
        )));
    }
    require_minus_one(m, gamma)?;
    // the general-fibre (-1)-curve degenerates to c * gamma
    let c = -ext.k_pairing.recip();
    if !c.is_integer() {
        return Err(MmpError::NotWBlowDown(format!(
            "K.{} = {} is not -1/c for an integer c",
            m.label(gamma),
            ext.k_pairing
        )));
    }
    let touched: Vec<usize> = m.marks_met(gamma).into_keys().collect();
    if touched.len() > 2 {
        return Err(MmpError::NotWBlowDown(format!(
            "'{}' meets {} marks",
            m.label(gamma),
            touched.len()
        )));
    }
    let mut out = m.clone();
    let mut pool: Vec<CurveId> = Vec::new();
    for &i in touched.iter().rev() {
        let mut curves = out.remove_mark(i).curves;
        curves.append(&mut pool);
        pool = curves;
    }
    let mut contractions = vec![contract_recording(&mut out, m, gamma)?];
    while let Some(pos) = pool
        .iter()
        .position(|&c| out.self_int(c) == -1 && out.genus(c) == 0)
    {
        let e = pool.remove(pos);
        contractions.push(contract_recording(&mut out, m, e)?);
    }
    let (residual, residual_wahl) = if pool.is_empty() {
        (None, None)
    } else {
        let describe = || {
            let selfs: Vec<i64> = pool.iter().map(|&c| out.self_int(c)).collect();
            format!("residual configuration with self-intersections {selfs:?}")
        };
        let order = chain_order(&out, &pool).ok_or_else(|| MmpError::NotWBlowDown(describe()))?;
        let ch = Chain::new(order.iter().map(|&c| -out.self_int(c)).collect())
            .map_err(|_| MmpError::NotWBlowDown(describe()))?;
        let w = is_wahl_chain(&ch)
            .ok_or_else(|| MmpError::NotWBlowDown(format!("residual chain {ch} is not Wahl")))?;
        out.add_mark(order)?;
        (Some(ch), Some(w))
    };
    Ok((
        out,
        BlowDownSummary {
            gamma: m.label(gamma).to_string(),
            gamma_id: gamma,
            contractions,
            residual,
            residual_wahl,
            fibre_multiplicity: i64::try_from(c.to_integer()).expect("small multiplicity"),
        },
    ))
}

/// Point blow-up at a smooth point of the surface.
pub fn blow_up_point(
    m: &SurfaceModel,
    label: &str,
    on: &[(CurveId, u32)],
) -> Result<(SurfaceModel, CurveId), MmpError> {
    for &(c, _) in on {
        if m.mark_of(c).is_some() {
            return Err(SurfaceError::CurveInMark(m.label(c).to_string()).into());
        }
    }
    let mut out = m.clone();
    let e = out.blow_up(label, on)?;
    Ok((out, e))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Contractibility {
    pub curve: String,
    pub chain: Option<Vec<i64>>,
    pub residual: Option<Chain>,
    pub form: Option<String>,
    pub contractible: bool,
}

/// Whether a curve together with the marks it meets contracts to a cyclic
/// quotient point (or a smooth point).
pub fn cyclic_contractibility(m: &SurfaceModel, c: CurveId) -> Contractibility {
    let mut pool = vec![c];
    for i in m.marks_met(c).into_keys() {
        pool.extend(m.marks()[i].curves.iter().copied());
    }
    let fail = |chain| Contractibility {
        curve: m.label(c).to_string(),
        chain,
        residual: None,
        form: None,
        contractible: false,
    };
    let Some(order) = chain_order(m, &pool) else {
        return fail(None);
    };
    if order.iter().any(|&x| m.genus(x) != 0) {
        return fail(None);
    }
    let mut entries: Vec<i64> = order.iter().map(|&x| -m.self_int(x)).collect();
    let chain = Some(entries.clone());
    while let Some(i) = entries.iter().position(|&b| b == 1) {
        if i > 0 {
            entries[i - 1] -= 1;
        }
        if i + 1 < entries.len() {
            entries[i + 1] -= 1;
        }
        entries.remove(i);
    }
    if entries.iter().any(|&b| b < 2) {
        return fail(chain);
    }
    let (residual, form) = match Chain::new(entries) {
        Ok(ch) => {
            let f = recognize_t_form(&hj_value(&ch));
            let text = format!("1/{}", hj_value(&ch));
            (
                Some(ch),
                Some(if f.is_t() {
                    format!("{text} {f}")
                } else {
                    text
                }),
            )
        }
        Err(_) => (None, Some("smooth".to_string())),
    };
    Contractibility {
        curve: m.label(c).to_string(),
        chain,
        residual,
        form,
        contractible: true,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalteseReport {
    #[serde(with = "qfmt")]
    pub k_b: Q,
    #[serde(with = "qfmt")]
    pub k_c: Q,
    pub signs: bool,
    pub contract_b: Contractibility,
    pub contract_c: Contractibility,
    pub contractible: bool,
    pub section: Option<String>,
    pub section_self: Option<i64>,
    pub section_ok: bool,
    pub a_is_minus_one: bool,
    pub f_is_fiber: bool,
    pub fibers_ok: bool,
    pub pass: bool,
}

/// Connected components of the fibration's fiber curves (curves with zero
/// resolution intersection with F, other than F).
fn fiber_components(m: &SurfaceModel, f: CurveId) -> BTreeMap<CurveId, usize> {
    let fiber: BTreeSet<CurveId> = m
        .curve_ids()
        .into_iter()
        .filter(|&c| c != f && m.dot(c, f) == 0)
        .collect();
    let mut comp = BTreeMap::new();
    let mut next = 0;
    for &start in &fiber {
        if comp.contains_key(&start) {
            continue;
        }
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            if comp.insert(c, next).is_some() {
                continue;
            }
            for (n, _) in m.neighbors(c) {
                if fiber.contains(&n) && !comp.contains_key(&n) {
                    stack.push(n);
                }
            }
        }
        next += 1;
    }
    comp
}

pub fn maltese_validate(
    m: &SurfaceModel,
    a: CurveId,
    b: CurveId,
    c: CurveId,
    f: CurveId,
) -> Result<MalteseReport, MmpError> {
    let k_b = k_pair(m, b)?;
    let k_c = k_pair(m, c)?;
    let signs = k_b.is_negative() && k_c.is_positive();
    let contract_b = cyclic_contractibility(m, b);
    let contract_c = cyclic_contractibility(m, c);
    let contractible = contract_b.contractible && contract_c.contractible;

    let sections: Vec<CurveId> = m
        .curve_ids()
        .into_iter()
        .filter(|&x| m.mark_of(x).is_some() && m.meet(x, f) == 1)
        .collect();
    let section = (sections.len() == 1).then(|| sections[0]);
    let in_config = |x: CurveId, y: CurveId| {
        m.marks_met(y)
            .keys()
            .any(|&i| m.marks()[i].curves.contains(&x))
    };
    let section_ok =
        section.is_some_and(|s| m.self_int(s) <= -3 && (in_config(s, b) || in_config(s, c)));

    let a_is_minus_one = m.self_int(a) == -1 && m.genus(a) == 0;
    let f_is_fiber = m.self_int(f) == 0 && m.genus(f) == 0;
    let comp = fiber_components(m, f);
    let fibers_ok = match (comp.get(&a), comp.get(&b), comp.get(&c)) {
        (Some(x), Some(y), Some(z)) => x != y && y == z,
        _ => false,
    };
    let pass = signs && contractible && section_ok && a_is_minus_one && f_is_fiber && fibers_ok;
    Ok(MalteseReport {
        k_b,
        k_c,
        signs,
        contract_b,
        contract_c,
        contractible,
        section: section.map(|s| m.label(s).to_string()),
        section_self: section.map(|s| m.self_int(s)),
        section_ok,
        a_is_minus_one,
        f_is_fiber,
        fibers_ok,
        pass,
    })
}

/// T-form of a K-trivial chain, or an error naming it.
pub fn canonical_component_form(entries: &[i64]) -> Result<TForm, MmpError> {
    let ch = Chain::new(entries.to_vec())
        .map_err(|e| MmpError::Canonical(format!("{entries:?}: {e}")))?;
    match recognize_t_form(&hj_value(&ch)) {
        TForm::NonT => Err(MmpError::Canonical(format!(
            "component {ch} = 1/{} is not a T-singularity",
            hj_value(&ch)
        ))),
        f => Ok(f),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CanonicalReport {
    pub components: Vec<(Vec<String>, Chain, String)>,
}

pub fn contract_to_canonical(
    m: &SurfaceModel,
) -> Result<(SurfaceModel, CanonicalReport), MmpError> {
    if !nef_report(m).pass {
        return Err(MmpError::Canonical(
            "K is not nef on the encoded curves".into(),
        ));
    }
    if !global_invariants(m).k2_special.is_positive() {
        return Err(MmpError::Canonical("K^2 is not positive".into()));
    }
    let trivial: BTreeSet<CurveId> = m
        .curve_ids()
        .into_iter()
        .filter(|&c| m.mark_of(c).is_none() && k_pair(m, c).is_ok_and(|k| k.is_zero()))
        .collect();
    let mut out = m.clone();
    let mut components = Vec::new();
    let mut seen = BTreeSet::new();
    for &start in &trivial {
        if seen.contains(&start) {
            continue;
        }
        let mut comp = Vec::new();
        let mut stack = vec![start];
        while let Some(c) = stack.pop() {
            if !seen.insert(c) {
                continue;
            }
            comp.push(c);
            for (n, _) in m.neighbors(c) {
                if trivial.contains(&n) {
                    stack.push(n);
                } else if m.mark_of(n).is_some() {
                    return Err(MmpError::Canonical(format!(
                        "K-trivial curve '{}' meets a singular point",
                        m.label(c)
                    )));
                }
            }
        }
        comp.sort();
        let labels: Vec<String> = comp.iter().map(|&c| m.label(c).to_string()).collect();
        let order = chain_order(m, &comp)
            .ok_or_else(|| MmpError::Canonical(format!("component {labels:?} is not a chain")))?;
        let entries: Vec<i64> = order.iter().map(|&c| -m.self_int(c)).collect();
        let form = canonical_component_form(&entries)?;
        out.add_mark(order)?;
        components.push((
            labels,
            Chain::new(entries).expect("checked"),
            form.to_string(),
        ));
    }
    out.set_canonical(true);
    Ok((out, CanonicalReport { components }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StepKind {
    Flip,
    BlowDown,
    BlowUp,
    CanonicalContraction,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StepKind::Flip => "flip",
            StepKind::BlowDown => "blow_down",
            StepKind::BlowUp => "blow_up",
            StepKind::CanonicalContraction => "canonical",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum StepDetails {
    Flip(FlipSummary),
    BlowDown(BlowDownSummary),
    BlowUp {
        curve: String,
        on: Vec<(String, u32)>,
        #[serde(skip)]
        id: CurveId,
        #[serde(skip)]
        on_ids: Vec<(CurveId, u32)>,
    },
    Canonical(CanonicalReport),
}

/// Sum of mark indices, then curve count.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Measure {
    pub index_sum: String,
    pub curves: usize,
    #[serde(skip)]
    raw: BigInt,
}

impl Measure {
    pub fn of(m: &SurfaceModel) -> Measure {
        let mut s = BigInt::zero();
        for i in 0..m.marks().len() {
            if let Some(ch) = m.mark_chain(i) {
                match recognize_t_form(&hj_value(&ch)) {
                    TForm::Wahl(w) => s += w.n,
                    TForm::GeneralT { n, .. } => s += n,
                    _ => s += hj_value(&ch).m().clone(),
                }
            }
        }
        Measure {
            index_sum: s.to_string(),
            curves: m.curve_count(),
            raw: s,
        }
    }

    pub fn decreases_to(&self, after: &Measure) -> bool {
        (&after.raw, after.curves) < (&self.raw, self.curves)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub kind: StepKind,
    pub curve: String,
    pub details: StepDetails,
    pub invariants_before: GlobalInvariants,
    pub invariants_after: GlobalInvariants,
    pub measure_before: Measure,
    pub measure_after: Measure,
}

impl StepRecord {
    /// Flip: (0, 0); blow-down: (+1, -1); blow-up: (-1, +1).
    pub fn invariants_consistent(&self) -> bool {
        let (b, a) = (&self.invariants_before, &self.invariants_after);
        let dk = &a.k2_general - &b.k2_general;
        let de = a.euler_general - b.euler_general;
        match self.kind {
            StepKind::Flip => dk.is_zero() && de == 0,
            StepKind::BlowDown => dk == q(1) && de == -1,
            StepKind::BlowUp => dk == q(-1) && de == 1,
            StepKind::CanonicalContraction => dk.is_zero(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Terminal {
    MinimalModel,
    RankOneDelPezzo {
        curve: String,
        note: String,
    },
    RuledFibration {
        curve: String,
        note: String,
    },
    Stuck(String),
    /// A script ended while K-negative curves remain.
    Open {
        k_negative: Vec<String>,
    },
}

impl fmt::Display for Terminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Terminal::MinimalModel => write!(f, "minimal model (K nef on encoded curves)"),
            Terminal::RankOneDelPezzo { curve, note } => {
                write!(f, "rank-one del Pezzo via '{curve}' ({note})")
            }
            Terminal::RuledFibration { curve, note } => {
                write!(f, "ruled fibration via '{curve}' ({note})")
            }
            Terminal::Stuck(r) => write!(f, "stuck: {r}"),
            Terminal::Open { k_negative } => write!(
                f,
                "script ended; K-negative curves remain: {}",
                k_negative.join(", ")
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MmpTrace {
    pub steps: Vec<StepRecord>,
    pub terminal: Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Move {
    Flip(CurveId),
    BlowDown(CurveId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Strategy {
    Scripted(Vec<Move>),
    /// Candidates in increasing (or, with `reverse`, decreasing) id order.
    Greedy {
        reverse: bool,
    },
}

fn record(
    index: usize,
    kind: StepKind,
    curve: String,
    details: StepDetails,
    before: &SurfaceModel,
    after: &SurfaceModel,
) -> StepRecord {
    StepRecord {
        index,
        kind,
        curve,
        details,
        invariants_before: global_invariants(before),
        invariants_after: global_invariants(after),
        measure_before: Measure::of(before),
        measure_after: Measure::of(after),
    }
}

pub fn flip_step(
    m: &SurfaceModel,
    e_minus: CurveId,
    index: usize,
) -> Result<(SurfaceModel, StepRecord), MmpError> {
    let cfg = flip_config(m, e_minus)?;
    let (out, summary) = end_flip(m, &cfg)?;
    let rec = record(
        index,
        StepKind::Flip,
        m.label(e_minus).to_string(),
        StepDetails::Flip(summary),
        m,
        &out,
    );
    Ok((out, rec))
}

pub fn blow_down_step(
    m: &SurfaceModel,
    gamma: CurveId,
    index: usize,
) -> Result<(SurfaceModel, StepRecord), MmpError> {
    let (out, summary) = w_blow_down(m, gamma)?;
    let rec = record(
        index,
        StepKind::BlowDown,
        m.label(gamma).to_string(),
        StepDetails::BlowDown(summary),
        m,
        &out,
    );
    Ok((out, rec))
}

pub fn blow_up_step(
    m: &SurfaceModel,
    label: &str,
    on: &[(CurveId, u32)],
    index: usize,
) -> Result<(SurfaceModel, StepRecord), MmpError> {
    let (out, id) = blow_up_point(m, label, on)?;
    let details = StepDetails::BlowUp {
        curve: label.to_string(),
        on: on
            .iter()
            .map(|&(c, k)| (m.label(c).to_string(), k))
            .collect(),
        id,
        on_ids: on.to_vec(),
    };
    let rec = record(index, StepKind::BlowUp, label.to_string(), details, m, &out);
    Ok((out, rec))
}

pub fn canonical_step(
    m: &SurfaceModel,
    index: usize,
) -> Result<(SurfaceModel, StepRecord), MmpError> {
    let (out, report) = contract_to_canonical(m)?;
    let rec = record(
        index,
        StepKind::CanonicalContraction,
        String::new(),
        StepDetails::Canonical(report),
        m,
        &out,
    );
    Ok((out, rec))
}

/// Terminal state of a model nobody is going to touch further.
/// b2 of the singular surface, assuming q = 0: the resolution has
/// e - 2 classes and every singular point removes its chain.
pub fn second_betti(m: &SurfaceModel) -> i64 {
    m.resolution_euler()
        - 2
        - m.marks()
            .iter()
            .map(|mk| mk.curves.len() as i64)
            .sum::<i64>()
}

fn k_negative(m: &SurfaceModel) -> Vec<CurveId> {
    m.curve_ids()
        .into_iter()
        .filter(|&c| m.mark_of(c).is_none() && k_pair(m, c).is_ok_and(|k| k.is_negative()))
        .collect()
}

/// A K-negative curve of non-negative square ends the program only when the
/// Picard number allows it: 1 for a del Pezzo, 2 for a fibration.
fn fibre_type_end(m: &SurfaceModel, negative: &[CurveId]) -> Option<Terminal> {
    let b2 = second_betti(m);
    for &c in negative {
        let Ok(ext) = classify_extremal(m, c) else {
            continue;
        };
        let note = ext.note.unwrap_or_default().to_string();
        match ext.kind {
            ExtremalKind::PositiveSquare if b2 == 1 => {
                return Some(Terminal::RankOneDelPezzo {
                    curve: m.label(c).to_string(),
                    note,
                })
            }
            ExtremalKind::ZeroSquare if b2 == 2 => {
                return Some(Terminal::RuledFibration {
                    curve: m.label(c).to_string(),
                    note,
                })
            }
            _ => {}
        }
    }
    None
}

pub fn classify_terminal(m: &SurfaceModel) -> Terminal {
    let negative = k_negative(m);
    if negative.is_empty() {
        return Terminal::MinimalModel;
    }
    fibre_type_end(m, &negative).unwrap_or_else(|| Terminal::Open {
        k_negative: negative.iter().map(|&c| m.label(c).to_string()).collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScriptAbort {
    pub index: usize,
    pub error: MmpError,
}

impl fmt::Display for ScriptAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {}: {}", self.index, self.error)
    }
}

/// One greedy move: divisorial if the residue is Wahl or empty, otherwise a
/// frequent-case flip.
pub fn greedy_move(
    m: &SurfaceModel,
    reverse: bool,
    index: usize,
) -> Result<(SurfaceModel, StepRecord), Terminal> {
    let mut negative = k_negative(m);
    if negative.is_empty() {
        return Err(Terminal::MinimalModel);
    }
    if reverse {
        negative.reverse();
    }
    let mut reasons = Vec::new();
    for &c in &negative {
        if !classify_extremal(m, c).is_ok_and(|e| e.kind == ExtremalKind::NegativeSquare) {
            continue;
        }
        match blow_down_step(m, c, index) {
            Ok(done) => return Ok(done),
            Err(e) => match flip_step(m, c, index) {
                Ok(done) => return Ok(done),
                Err(f) => reasons.push(format!("'{}': {e}; {f}", m.label(c))),
            },
        }
    }
    if let Some(t) = fibre_type_end(m, &negative) {
        return Err(t);
    }
    if reasons.is_empty() {
        return Err(Terminal::Open {
            k_negative: negative.iter().map(|&c| m.label(c).to_string()).collect(),
        });
    }
    Err(Terminal::Stuck(reasons.join(" | ")))
}

pub fn run_mmp(
    m: &SurfaceModel,
    strategy: &Strategy,
) -> Result<(SurfaceModel, MmpTrace), ScriptAbort> {
    let mut cur = m.clone();
    let mut steps = Vec::new();
    match strategy {
        Strategy::Scripted(moves) => {
            for (index, mv) in moves.iter().enumerate() {
                let res = match *mv {
                    Move::Flip(c) => flip_step(&cur, c, index),
                    Move::BlowDown(c) => blow_down_step(&cur, c, index),
                };
                match res {
                    Ok((next, rec)) => {
                        cur = next;
                        steps.push(rec);
                    }
                    Err(MmpError::Unsupported(u)) => {
                        let terminal =
                            Terminal::Stuck(format!("step {index}: {}", MmpError::Unsupported(u)));
                        return Ok((cur, MmpTrace { steps, terminal }));
                    }
                    Err(error) => return Err(ScriptAbort { index, error }),
                }
            }
            let terminal = classify_terminal(&cur);
            Ok((cur, MmpTrace { steps, terminal }))
        }
        Strategy::Greedy { reverse } => loop {
            match greedy_move(&cur, *reverse, steps.len()) {
                Ok((next, rec)) => {
                    debug_assert!(rec.measure_before.decreases_to(&rec.measure_after));
                    cur = next;
                    steps.push(rec);
                }
                Err(terminal) => return Ok((cur, MmpTrace { steps, terminal })),
            }
        },
    }
}

/// Validation gate used by callers that take user models.
pub fn ensure_valid(m: &SurfaceModel) -> Result<(), MmpError> {
    let v = validate_model(m);
    if v.is_empty() {
        Ok(())
    } else {
        Err(SurfaceError::Invalid(v.len()).into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cfrac::{hj_expand, wahl_blowup_pairs, wahl_chains};
    use proptest::prelude::*;

    fn frac(a: i64, b: i64) -> Q {
        Q::new(a.into(), b.into())
    }

    /// A (-1)-curve E meeting one curve of a marked chain once, plus a free
    /// curve D meeting E once.
    fn config(entries: &[i64], at: usize) -> (SurfaceModel, CurveId, Vec<CurveId>) {
        let mut m = SurfaceModel::new(0, 0);
        let ids: Vec<CurveId> = entries
            .iter()
            .enumerate()
            .map(|(i, &b)| m.add_curve(&format!("E{}", i + 1), -b, 0).unwrap())
            .collect();
        for w in ids.windows(2) {
            m.set_meet(w[0], w[1], 1).unwrap();
        }
        let e = m.add_curve("Em", -1, 0).unwrap();
        m.set_meet(e, ids[at], 1).unwrap();
        m.add_mark(ids.clone()).unwrap();
        (m, e, ids)
    }

    #[test]
    fn classify_examples() {
        let mut m = SurfaceModel::new(0, 0);
        let e = m.add_curve("E", -1, 0).unwrap();
        let c = classify_extremal(&m, e).unwrap();
        assert_eq!((c.kind, c.k_pairing), (ExtremalKind::NegativeSquare, q(-1)));
        let f = m.add_curve("F", 0, 0).unwrap();
        assert_eq!(
            classify_extremal(&m, f).unwrap().kind,
            ExtremalKind::ZeroSquare
        );
        let l = m.add_curve("L", 1, 0).unwrap();
        assert_eq!(
            classify_extremal(&m, l).unwrap().kind,
            ExtremalKind::PositiveSquare
        );
        let s = m.add_curve("S", -2, 0).unwrap();
        assert!(classify_extremal(&m, s).is_err());

        let (m, e, _) = config(&[4], 0);
        let c = classify_extremal(&m, e).unwrap();
        assert_eq!(
            (c.kind, c.self_pairing),
            (ExtremalKind::NegativeSquare, frac(-3, 4))
        );
    }

    #[test]
    fn flip_seven_two_two_two() {
        let (m, e, ids) = config(&[7, 2, 2, 2], 0);
        let cfg = flip_config(&m, e).unwrap();
        assert_eq!(cfg.attachment, End::First);
        let (out, s) = end_flip(&m, &cfg).unwrap();
        assert_eq!(s.chain_after.unwrap().entries(), &[6, 2, 2]);
        assert_eq!(s.e_plus_id, ids[3]);
        assert_eq!(s.k_e_plus, frac(1, 4));
        assert!(validate_model(&out).is_empty());
        assert_eq!(global_invariants(&out), global_invariants(&m));
    }

    #[test]
    fn flip_four_is_smooth() {
        let (m, e, ids) = config(&[4], 0);
        let (out, s) = end_flip(&m, &flip_config(&m, e).unwrap()).unwrap();
        assert!(out.is_smooth());
        assert_eq!(out.self_int(ids[0]), -3);
        assert_eq!(s.k_e_plus, q(1));
    }

    #[test]
    fn flip_errors() {
        let (m, e, _) = config(&[2, 5, 3], 1);
        assert!(matches!(
            flip_config(&m, e),
            Err(MmpError::Unsupported(UnsupportedFlip::InteriorAttachment(
                _
            )))
        ));
        for at in [0, 2] {
            let (m, e, _) = config(&[2, 5, 3], at);
            assert!(flip_step(&m, e, 0).is_ok());
        }
        let (mut m, e, _) = config(&[4], 0);
        let w = m.add_curve("W", -4, 0).unwrap();
        m.add_mark(vec![w]).unwrap();
        m.set_meet(e, w, 1).unwrap();
        assert!(matches!(
            flip_config(&m, e),
            Err(MmpError::Unsupported(UnsupportedFlip::SeveralMarks(2)))
        ));
    }

    #[test]
    fn dichotomy_violation_is_typed() {
        // every Wahl chain satisfies the dichotomy; a T-chain [3,3] does not
        let (mut m, e, _) = config(&[3, 3], 0);
        m.set_canonical(true);
        let cfg = flip_config(&m, e).unwrap();
        assert!(matches!(
            end_flip(&m, &cfg),
            Err(MmpError::Unsupported(UnsupportedFlip::Dichotomy { .. }))
        ));
    }

    #[test]
    fn blow_down_examples() {
        let mut m = SurfaceModel::new(0, 12);
        let e = m.add_curve("E", -1, 0).unwrap();
        let (out, s) = w_blow_down(&m, e).unwrap();
        assert!(s.residual.is_none());
        assert_eq!(global_invariants(&out).k2_general, q(1));

        let (m, e, _) = config(&[4], 0);
        assert!(matches!(w_blow_down(&m, e), Err(MmpError::NotWBlowDown(_))));

        // residual [4] is Wahl, but K.E = -2/3 is not -1/delta
        let (m, e, _) = config(&[2, 5], 0);
        assert!(matches!(w_blow_down(&m, e), Err(MmpError::NotWBlowDown(_))));
    }

    #[test]
    fn blow_up_examples() {
        let m = SurfaceModel::new(9, 3);
        let (out, e) = blow_up_point(&m, "E", &[]).unwrap();
        assert_eq!((out.self_int(e), out.resolution_k2()), (-1, 8));
    }

    #[test]
    fn canonical_examples() {
        let mut m = SurfaceModel::new(2, 10);
        let a = m.add_curve("A", -2, 0).unwrap();
        let b = m.add_curve("B", -2, 0).unwrap();
        m.set_meet(a, b, 1).unwrap();
        let (out, rep) = contract_to_canonical(&m).unwrap();
        assert!(out.is_canonical());
        assert_eq!(rep.components[0].2, "du Val");
        assert!(validate_model(&out).is_empty());
        assert_eq!(
            canonical_component_form(&[3, 3]).unwrap(),
            TForm::GeneralT {
                d: 2.into(),
                n: 2.into(),
                a: 1.into()
            }
        );
        assert!(canonical_component_form(&[2, 4]).is_err());
    }

    #[test]
    fn maltese_sign_failure() {
        let mut m = SurfaceModel::new(0, 0);
        let a = m.add_curve("A", -1, 0).unwrap();
        let b = m.add_curve("B", -1, 0).unwrap();
        let c = m.add_curve("C", -1, 0).unwrap();
        let f = m.add_curve("F", 0, 0).unwrap();
        let r = maltese_validate(&m, a, b, c, f).unwrap();
        assert!(!r.signs && !r.pass);
    }

    #[test]
    fn greedy_on_nef_model_is_empty() {
        let mut m = SurfaceModel::new(1, 11);
        m.add_curve("A", -2, 0).unwrap();
        let (_, t) = run_mmp(&m, &super::Strategy::Greedy { reverse: false }).unwrap();
        assert!(t.steps.is_empty());
        assert_eq!(t.terminal, Terminal::MinimalModel);
    }

    #[test]
    fn two_mark_blow_down_follows_recurrence() {
        for (delta, a) in [
            (2i64, 1i64),
            (3, 1),
            (3, 2),
            (4, 1),
            (4, 3),
            (5, 1),
            (5, 2),
            (5, 3),
            (5, 4),
            (7, 3),
        ] {
            let mut pairs = vec![WahlPair::new(delta, a).unwrap()];
            pairs.extend(wahl_blowup_pairs(delta, a, 4).unwrap());
            for w in pairs.windows(2) {
                let c1 = hj_expand(&w[0].fraction());
                let c2 = hj_expand(&w[1].fraction());
                let mut m = SurfaceModel::new(0, 0);
                let mk = |m: &mut SurfaceModel, p: &str, c: &Chain| -> Vec<CurveId> {
                    let ids: Vec<CurveId> = c
                        .entries()
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| m.add_curve(&format!("{p}{i}"), -b, 0).unwrap())
                        .collect();
                    for x in ids.windows(2) {
                        m.set_meet(x[0], x[1], 1).unwrap();
                    }
                    ids
                };
                let i1 = mk(&mut m, "U", &c1);
                let i2 = mk(&mut m, "V", &c2);
                let e = m.add_curve("E", -1, 0).unwrap();
                m.add_mark(i1.clone()).unwrap();
                m.add_mark(i2.clone()).unwrap();
                // exactly one pair of ends gives a W-blow-down
                let mut hits = Vec::new();
                for &u in &[i1[0], *i1.last().unwrap()] {
                    for &v in &[i2[0], *i2.last().unwrap()] {
                        let mut t = m.clone();
                        t.set_meet(e, u, 1).unwrap();
                        t.set_meet(e, v, 1).unwrap();
                        if let Ok(r) = w_blow_down(&t, e) {
                            hits.push(r);
                        }
                    }
                }
                let len_one = c1.len() == 1 || c2.len() == 1;
                assert!(
                    hits.len() == 1 || len_one && !hits.is_empty(),
                    "{c1} {c2}: {}",
                    hits.len()
                );
                let (out, s) = hits.pop().unwrap();
                assert_eq!(s.residual_wahl.unwrap().n, BigInt::from(delta), "{c1} {c2}");
                // c = n1 n2 / delta
                assert_eq!(
                    BigInt::from(s.fibre_multiplicity * delta),
                    &w[0].n * &w[1].n
                );
                assert!(validate_model(&out).is_empty());
            }
        }
    }

    proptest! {
        #[test]
        fn end_flip_identities(idx in 0usize..2000, last in proptest::bool::ANY) {
            let all: Vec<Chain> = wahl_chains(10).into_iter().collect();
            let c = &all[idx % all.len()];
            let at = if last { c.len() - 1 } else { 0 };
            let (m, e, _) = config(c.entries(), at);
            let (out, rec) = flip_step(&m, e, 0).unwrap();
            prop_assert!(rec.invariants_consistent());
            prop_assert!(rec.measure_before.decreases_to(&rec.measure_after));
            let StepDetails::Flip(s) = &rec.details else { unreachable!() };
            if let Some(ch) = &s.chain_after {
                let d = discrepancies(ch);
                let ends = if d.len() == 1 { q(2) * -d[0].clone() } else { -(d[0].clone() + d[d.len() - 1].clone()) };
                prop_assert_eq!(ends, q(1));
                prop_assert!(s.wahl_after.as_ref().unwrap().n < s.wahl_before.as_ref().unwrap().n);
            }
            prop_assert!(validate_model(&out).is_empty());
        }
    }
}
