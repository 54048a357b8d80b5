//! Tracking a curve of the general fibre through the special fibre: its
//! limit as a combination of curves, transported across each MMP step, and
//! the plane-curve data read off once the special fibre reaches P^2.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{LedgerError, MmpError};
use crate::linalg::Q;
use crate::mmp::{blow_down_step, StepDetails, StepRecord};
use crate::qfmt;
use crate::surface::{k_pair, k_pair_class, pair_on_x, q, CurveId, DivisorClass, SurfaceModel};

/// Limit Gamma_0 = sum alpha_i D_i of a general-fibre curve Gamma_t, with the
/// fibre-independent numbers K.Gamma_t, Gamma_t^2 and the arithmetic genus.
#[derive(Debug, Clone, PartialEq)]
pub struct Ledger {
    pub name: String,
    pub terms: BTreeMap<CurveId, Q>,
    pub k_gamma_t: Q,
    pub self_gamma_t: Q,
    pub genus_gamma_t: i64,
    /// Non-fatal observations, e.g. a fractional coefficient after a flip.
    pub diagnostics: Vec<String>,
}

impl Ledger {
    pub fn class(&self) -> DivisorClass {
        self.terms.iter().map(|(&c, a)| (c, a.clone())).collect()
    }

    pub fn coefficient(&self, c: CurveId) -> Q {
        self.terms.get(&c).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|a| a.is_integer())
    }

    pub fn labeled(&self, m: &SurfaceModel) -> Vec<(String, Q)> {
        self.terms
            .iter()
            .map(|(&c, a)| (m.label(c).to_string(), a.clone()))
            .collect()
    }

    /// "S1 + F1 + 3 F2", in curve-id order.
    pub fn display(&self, m: &SurfaceModel) -> String {
        format_terms(&self.labeled(m))
    }
}

pub fn format_terms(terms: &[(String, Q)]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|(l, a)| {
            if *a == q(1) {
                l.clone()
            } else {
                format!("{a} {l}")
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

pub fn init_ledger(
    m: &SurfaceModel,
    name: &str,
    terms: &[(CurveId, i64)],
    genus: i64,
) -> Result<Ledger, LedgerError> {
    let mut map = BTreeMap::new();
    for &(c, a) in terms {
        m.node(c)?;
        if a < 0 {
            return Err(LedgerError::NegativeCoefficient {
                curve: m.label(c).to_string(),
                alpha: a,
            });
        }
        if a > 0 {
            *map.entry(c).or_insert_with(Q::zero) += q(a);
        }
    }
    let mut l = Ledger {
        name: name.to_string(),
        terms: map,
        k_gamma_t: Q::zero(),
        self_gamma_t: Q::zero(),
        genus_gamma_t: genus,
        diagnostics: Vec::new(),
    };
    let d = l.class();
    l.k_gamma_t = k_pair_class(m, &d)?;
    l.self_gamma_t = pair_on_x(m, &d, &d)?;
    Ok(l)
}

/// beta with K.(support + beta E+) = K.Gamma_t; also whether beta is a
/// non-negative integer.
pub fn beta_solve(
    m: &SurfaceModel,
    support: &DivisorClass,
    e_plus: CurveId,
    k_gamma_t: &Q,
) -> Result<(Q, bool), LedgerError> {
    let ke = k_pair(m, e_plus)?;
    if ke.is_zero() {
        return Err(LedgerError::ZeroKPairing(m.label(e_plus).to_string()));
    }
    let beta = (k_gamma_t - k_pair_class(m, support)?) / ke;
    let ok = beta.is_integer() && !beta.is_negative();
    Ok((beta, ok))
}

fn verify(m: &SurfaceModel, l: &Ledger, step: &str) -> Result<(), LedgerError> {
    let d = l.class();
    let k = k_pair_class(m, &d)?;
    if k != l.k_gamma_t {
        return Err(LedgerError::Invariant {
            step: step.to_string(),
            what: "K.Gamma",
            cached: l.k_gamma_t.to_string(),
            actual: k.to_string(),
        });
    }
    let s = pair_on_x(m, &d, &d)?;
    if s != l.self_gamma_t {
        return Err(LedgerError::Invariant {
            step: step.to_string(),
            what: "Gamma^2",
            cached: l.self_gamma_t.to_string(),
            actual: s.to_string(),
        });
    }
    Ok(())
}

/// Multiplicity of Gamma_t along the exceptional curve of a blow-down step,
/// computed on the model before the step.
pub fn blow_down_multiplicity(
    before: &SurfaceModel,
    l: &Ledger,
    gamma: CurveId,
    fibre_multiplicity: i64,
) -> Result<Q, LedgerError> {
    Ok(pair_on_x(before, &l.class(), &DivisorClass::curve(gamma))? * q(fibre_multiplicity))
}

/// Moves a ledger across one recorded step and re-verifies both pairings.
pub fn transport_ledger(
    before: &SurfaceModel,
    after: &SurfaceModel,
    step: &StepRecord,
    l: &Ledger,
) -> Result<Ledger, LedgerError> {
    let tag = format!("step {} ({} {})", step.index, step.kind, step.curve);
    let mut out = l.clone();
    match &step.details {
        StepDetails::Flip(s) => {
            for c in &s.contracted_ids {
                out.terms.remove(c);
            }
            let support = out.class();
            let (beta, ok) = beta_solve(after, &support, s.e_plus_id, &l.k_gamma_t)?;
            if !ok {
                out.diagnostics
                    .push(format!("{tag}: coefficient {beta} on '{}'", s.e_plus));
            }
            if !beta.is_zero() {
                *out.terms.entry(s.e_plus_id).or_insert_with(Q::zero) += beta;
            }
        }
        StepDetails::BlowDown(s) => {
            let mu = blow_down_multiplicity(before, l, s.gamma_id, s.fibre_multiplicity)?;
            for c in &s.contractions {
                out.terms.remove(&c.id);
            }
            out.k_gamma_t -= &mu;
            out.self_gamma_t += &mu * &mu;
        }
        StepDetails::BlowUp { id, on_ids, .. } => {
            let mut alpha = Q::zero();
            for &(c, k) in on_ids {
                alpha += l.coefficient(c) * q(k as i64);
            }
            if !alpha.is_zero() {
                out.terms.insert(*id, alpha);
            }
        }
        StepDetails::Canonical(_) => {
            if let Some((&c, _)) = out
                .terms
                .iter()
                .find(|(&c, _)| !after.contains(c) || after.mark_of(c).is_some())
            {
                return Err(LedgerError::Plane(format!(
                    "{tag}: tracked component '{}' was absorbed by the canonical contraction",
                    before.label(c)
                )));
            }
        }
    }
    out.terms.retain(|_, a| !a.is_zero());
    verify(after, &out, &tag)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlanePoint {
    /// The contracted curve, which names the point.
    pub label: String,
    pub multiplicity: i64,
    /// The point this one is infinitely near to, one level up.
    pub parent: Option<String>,
    /// Every point this one is proximate to.
    pub proximate_to: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlaneCurveReport {
    pub name: String,
    pub degree: i64,
    /// Limit components surviving on P^2 with their coefficients.
    pub components: Vec<(String, String)>,
    pub points: Vec<PlanePoint>,
    /// Sum of m(m-1)/2 over all points.
    pub delta: i64,
    pub genus_gamma_t: i64,
    pub genus_ok: bool,
    /// True when every special-fibre adjacency is realised as proximity.
    pub proximity_ok: bool,
    /// (point, would-be parent) pairs whose adjacency violates proximity.
    pub detached: Vec<(String, String)>,
    /// Multiplicity trees of points with m >= 2, root first.
    pub clusters: Vec<Vec<i64>>,
}

impl PlaneCurveReport {
    /// Like "3,2,2,2,2 + 2x8": distinct trees joined by " + ", repeated
    /// trees with a count.
    pub fn cluster_signature(&self) -> String {
        cluster_signature(&self.clusters)
    }

    pub fn count_with_multiplicity(&self, m: i64) -> usize {
        self.points.iter().filter(|p| p.multiplicity == m).count()
    }
}

pub fn cluster_signature(clusters: &[Vec<i64>]) -> String {
    let mut sorted: Vec<&Vec<i64>> = clusters.iter().collect();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = (i..sorted.len())
            .find(|&j| sorted[j] != sorted[i])
            .unwrap_or(sorted.len());
        let body = sorted[i]
            .iter()
            .map(i64::to_string)
            .collect::<Vec<_>>()
            .join(",");
        parts.push(if j - i > 1 {
            format!("{body}x{}", j - i)
        } else {
            body
        });
        i = j;
    }
    parts.join(" + ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ImageCurve {
    pub label: String,
    pub self_int: i64,
    pub genus: u32,
    pub degree: Option<i64>,
}

/// Result of blowing down to P^2 with several tracked ledgers.
#[derive(Debug, Clone)]
pub struct PlaneRun {
    pub model: SurfaceModel,
    pub steps: Vec<StepRecord>,
    /// Model after each step.
    pub models: Vec<SurfaceModel>,
    pub ledgers: Vec<Ledger>,
    pub reports: Vec<PlaneCurveReport>,
    pub images: Vec<ImageCurve>,
}

fn plane_err(e: MmpError) -> LedgerError {
    match e {
        MmpError::Surface(s) => LedgerError::Surface(s),
        other => LedgerError::Plane(other.to_string()),
    }
}

/// Contracts the listed (-1)-curves of a smooth model in order; the result
/// must be P^2. Step indices start at `first_index`.
pub fn plane_run(
    m: &SurfaceModel,
    ledgers: &[Ledger],
    script: &[CurveId],
    first_index: usize,
) -> Result<PlaneRun, LedgerError> {
    if !m.is_smooth() {
        return Err(LedgerError::Plane(
            "the model still carries singularity marks".into(),
        ));
    }
    let mut cur = m.clone();
    let mut ls = ledgers.to_vec();
    let mut steps = Vec::new();
    let mut models = Vec::new();
    let mut mults: Vec<Vec<i64>> = vec![Vec::new(); ls.len()];
    // for each contraction: label and ids met at that moment
    let mut met: Vec<(CurveId, String, Vec<CurveId>)> = Vec::new();
    for (k, &c) in script.iter().enumerate() {
        let (after, rec) = blow_down_step(&cur, c, first_index + k).map_err(plane_err)?;
        let StepDetails::BlowDown(s) = &rec.details else {
            unreachable!()
        };
        if s.contractions.len() != 1 {
            return Err(LedgerError::Plane(format!(
                "contracting '{}' is not a single smooth blow-down",
                cur.label(c)
            )));
        }
        met.push((
            c,
            cur.label(c).to_string(),
            s.contractions[0].met_ids.iter().map(|&(x, _)| x).collect(),
        ));
        for (i, l) in ls.iter_mut().enumerate() {
            let mu = blow_down_multiplicity(&cur, l, c, s.fibre_multiplicity)?;
            if !mu.is_integer() || mu.is_negative() {
                return Err(LedgerError::Plane(format!(
                    "'{}' has multiplicity {mu} at '{}'",
                    l.name,
                    cur.label(c)
                )));
            }
            mults[i].push(mu.to_integer().to_i64().expect("small multiplicity"));
            *l = transport_ledger(&cur, &after, &rec, l)?;
        }
        steps.push(rec);
        models.push(after.clone());
        cur = after;
    }
    if cur.resolution_k2() != 9 || cur.resolution_euler() != 3 {
        return Err(LedgerError::Plane(format!(
            "end surface has K^2 = {}, e = {}; not P^2",
            cur.resolution_k2(),
            cur.resolution_euler()
        )));
    }

    let order: BTreeMap<CurveId, usize> = met
        .iter()
        .enumerate()
        .map(|(i, (c, _, _))| (*c, i))
        .collect();
    let mut prox: Vec<Vec<usize>> = Vec::new();
    for (i, (_, _, around)) in met.iter().enumerate() {
        let mut later: Vec<usize> = around
            .iter()
            .filter_map(|c| order.get(c).copied())
            .filter(|&j| j > i)
            .collect();
        later.sort_unstable();
        prox.push(later);
    }

    let mut reports = Vec::new();
    for (i, l) in ls.iter().enumerate() {
        reports.push(report_for(&cur, l, &ledgers[i], &met, &mults[i], &prox)?);
    }
    let images = cur
        .curves()
        .map(|n| {
            let num = n.self_int + 2 - 2 * n.genus as i64;
            let d = (num % 3 == 0 && (num / 3) * (num / 3) == n.self_int).then_some(num / 3);
            ImageCurve {
                label: n.label.clone(),
                self_int: n.self_int,
                genus: n.genus,
                degree: d,
            }
        })
        .collect();
    Ok(PlaneRun {
        model: cur,
        steps,
        models,
        ledgers: ls,
        reports,
        images,
    })
}

fn report_for(
    plane: &SurfaceModel,
    l: &Ledger,
    start: &Ledger,
    met: &[(CurveId, String, Vec<CurveId>)],
    mult: &[i64],
    adjacent: &[Vec<usize>],
) -> Result<PlaneCurveReport, LedgerError> {
    let sum: i64 = mult.iter().sum();
    let sq: i64 = mult.iter().map(|m| m * m).sum();
    // K_P2.Gamma = -3d and Gamma^2 = d^2 on the plane
    let k = &start.k_gamma_t - q(sum);
    if !(-&k / q(3)).is_integer() {
        return Err(LedgerError::Plane(format!(
            "'{}': K.Gamma = {k} on P^2 is not divisible by 3",
            l.name
        )));
    }
    let degree = (-&k / q(3)).to_integer();
    let self_plane = &start.self_gamma_t + q(sq);
    if Q::from_integer(&degree * &degree) != self_plane || degree <= BigInt::zero() {
        return Err(LedgerError::Plane(format!(
            "'{}': degree {degree} from K disagrees with square {self_plane}",
            l.name
        )));
    }
    let degree = degree.to_i64().expect("small degree");

    // Adjacency at contraction time is lattice data from the special fibre.
    // On the general fibre a point can only lie on the exceptional curve of
    // p if m_p >= sum of the multiplicities proximate to it; where that
    // fails the adjacency is not realised and the points are kept apart.
    let n = met.len();
    let mut detached = Vec::new();
    let mut prox: Vec<Vec<usize>> = adjacent.to_vec();
    for p in 0..n {
        let below: Vec<usize> = (0..n).filter(|&x| adjacent[x].contains(&p)).collect();
        if below.iter().map(|&x| mult[x]).sum::<i64>() > mult[p] {
            for &x in &below {
                prox[x].retain(|&y| y != p);
                detached.push((met[x].1.clone(), met[p].1.clone()));
            }
        }
    }
    let parent: Vec<Option<usize>> = prox.iter().map(|v| v.first().copied()).collect();

    let mut points = Vec::new();
    let mut keep = Vec::new();
    for (i, (_, label, _)) in met.iter().enumerate() {
        if mult[i] > 0 {
            keep.push(i);
            points.push(PlanePoint {
                label: label.clone(),
                multiplicity: mult[i],
                parent: parent[i].map(|p| met[p].1.clone()),
                proximate_to: prox[i].iter().map(|&p| met[p].1.clone()).collect(),
            });
        }
    }
    let delta: i64 = mult.iter().map(|m| m * (m - 1) / 2).sum();
    let genus_ok = (degree - 1) * (degree - 2) / 2 - delta == l.genus_gamma_t;
    let proximity_ok = detached.is_empty();

    // trees of points with m >= 2, children in reverse contraction order
    let heavy: BTreeSet<usize> = keep.iter().copied().filter(|&i| mult[i] >= 2).collect();
    let mut clusters = Vec::new();
    for &root in heavy.iter().rev() {
        if parent[root].is_some_and(|p| heavy.contains(&p)) {
            continue;
        }
        let mut tree = Vec::new();
        let mut stack = vec![root];
        while let Some(p) = stack.pop() {
            tree.push(mult[p]);
            let kids: Vec<usize> = heavy
                .iter()
                .copied()
                .filter(|&x| parent[x] == Some(p))
                .collect();
            stack.extend(kids);
        }
        clusters.push(tree);
    }

    Ok(PlaneCurveReport {
        name: l.name.clone(),
        degree,
        components: l
            .labeled(plane)
            .into_iter()
            .map(|(c, a)| (c, a.to_string()))
            .collect(),
        points,
        delta,
        genus_gamma_t: l.genus_gamma_t,
        genus_ok,
        proximity_ok,
        detached,
        clusters,
    })
}

pub fn plane_report(
    m: &SurfaceModel,
    l: &Ledger,
    script: &[CurveId],
) -> Result<PlaneCurveReport, LedgerError> {
    let mut run = plane_run(m, std::slice::from_ref(l), script, 0)?;
    Ok(run.reports.pop().expect("one ledger"))
}

#[derive(Serialize)]
struct LedgerView<'a> {
    name: &'a str,
    terms: Vec<(String, String)>,
    #[serde(with = "qfmt")]
    k_gamma_t: &'a Q,
    #[serde(with = "qfmt")]
    self_gamma_t: &'a Q,
    genus_gamma_t: i64,
    diagnostics: &'a [String],
}

impl Ledger {
    /// Serializable snapshot with labels resolved against `m`.
    pub fn view<'a>(&'a self, m: &SurfaceModel) -> impl Serialize + 'a {
        LedgerView {
            name: &self.name,
            terms: self
                .labeled(m)
                .into_iter()
                .map(|(c, a)| (c, a.to_string()))
                .collect(),
            k_gamma_t: &self.k_gamma_t,
            self_gamma_t: &self.self_gamma_t,
            genus_gamma_t: self.genus_gamma_t,
            diagnostics: &self.diagnostics,
        }
    }
}

impl fmt::Display for PlaneCurveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: degree {}", self.name, self.degree)?;
        for p in &self.points {
            write!(f, "  {} m={}", p.label, p.multiplicity)?;
            if let Some(par) = &p.parent {
                write!(f, " (infinitely near {par})")?;
            }
            writeln!(f)?;
        }
        writeln!(
            f,
            "  delta {}, genus {} {}, proximity {}",
            self.delta,
            self.genus_gamma_t,
            if self.genus_ok { "ok" } else { "MISMATCH" },
            if self.proximity_ok { "ok" } else { "partial" }
        )?;
        for (x, p) in &self.detached {
            writeln!(f, "  {x} kept off {p}: proximity would fail")?;
        }
        write!(f, "  clusters: {}", self.cluster_signature())
    }
}
