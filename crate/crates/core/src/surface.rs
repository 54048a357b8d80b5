//! Decorated dual graphs: curves on the minimal resolution, singularity
//! marks, discrepancies and the Mumford pairing.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::cfrac::{hj_value_entries, is_wahl_chain, recognize_t_form, Chain, TForm};
use crate::error::SurfaceError;
use crate::linalg::{self, Q};
use crate::qfmt;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CurveId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurveNode {
    pub id: CurveId,
    pub label: String,
    pub self_int: i64,
    /// Arithmetic genus on the current surface.
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SingularityMark {
    pub curves: Vec<CurveId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceModel {
    curves: BTreeMap<CurveId, CurveNode>,
    meets: BTreeMap<(CurveId, CurveId), u32>,
    labels: BTreeMap<String, CurveId>,
    marks: Vec<SingularityMark>,
    resolution_k2: i64,
    resolution_euler: i64,
    canonical: bool,
    next: u32,
}

fn key(a: CurveId, b: CurveId) -> (CurveId, CurveId) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl SurfaceModel {
    pub fn new(resolution_k2: i64, resolution_euler: i64) -> Self {
        SurfaceModel {
            curves: BTreeMap::new(),
            meets: BTreeMap::new(),
            labels: BTreeMap::new(),
            marks: Vec::new(),
            resolution_k2,
            resolution_euler,
            canonical: false,
            next: 0,
        }
    }

    pub fn add_curve(
        &mut self,
        label: &str,
        self_int: i64,
        genus: u32,
    ) -> Result<CurveId, SurfaceError> {
        if self.labels.contains_key(label) {
            return Err(SurfaceError::DuplicateLabel(label.to_string()));
        }
        let id = CurveId(self.next);
        self.next += 1;
        self.labels.insert(label.to_string(), id);
        self.curves.insert(
            id,
            CurveNode {
                id,
                label: label.to_string(),
                self_int,
                genus,
            },
        );
        Ok(id)
    }

    pub fn set_meet(&mut self, a: CurveId, b: CurveId, mult: u32) -> Result<(), SurfaceError> {
        self.node(a)?;
        self.node(b)?;
        if a == b {
            return Err(SurfaceError::SelfMeet(self.label(a).to_string()));
        }
        if mult == 0 {
            self.meets.remove(&key(a, b));
        } else {
            self.meets.insert(key(a, b), mult);
        }
        Ok(())
    }

    pub fn node(&self, id: CurveId) -> Result<&CurveNode, SurfaceError> {
        self.curves
            .get(&id)
            .ok_or_else(|| SurfaceError::UnknownCurve(format!("#{}", id.0)))
    }

    pub fn id(&self, label: &str) -> Result<CurveId, SurfaceError> {
        self.labels
            .get(label)
            .copied()
            .ok_or_else(|| SurfaceError::UnknownCurve(label.to_string()))
    }

    pub fn contains(&self, id: CurveId) -> bool {
        self.curves.contains_key(&id)
    }

    pub fn label(&self, id: CurveId) -> &str {
        self.curves.get(&id).map_or("?", |c| c.label.as_str())
    }

    pub fn self_int(&self, id: CurveId) -> i64 {
        self.curves[&id].self_int
    }

    pub fn genus(&self, id: CurveId) -> u32 {
        self.curves[&id].genus
    }

    pub fn curves(&self) -> impl Iterator<Item = &CurveNode> {
        self.curves.values()
    }

    pub fn curve_ids(&self) -> Vec<CurveId> {
        self.curves.keys().copied().collect()
    }

    pub fn curve_count(&self) -> usize {
        self.curves.len()
    }

    /// Intersection number of two distinct curves (0 when equal).
    pub fn meet(&self, a: CurveId, b: CurveId) -> u32 {
        if a == b {
            return 0;
        }
        self.meets.get(&key(a, b)).copied().unwrap_or(0)
    }

    /// Intersection pairing on the resolution, self-intersection on the diagonal.
    pub fn dot(&self, a: CurveId, b: CurveId) -> i64 {
        if a == b {
            self.self_int(a)
        } else {
            self.meet(a, b) as i64
        }
    }

    pub fn intersections(&self) -> impl Iterator<Item = (CurveId, CurveId, u32)> + '_ {
        self.meets.iter().map(|(&(a, b), &m)| (a, b, m))
    }

    pub fn neighbors(&self, id: CurveId) -> Vec<(CurveId, u32)> {
        self.meets
            .iter()
            .filter_map(|(&(a, b), &m)| {
                if a == id {
                    Some((b, m))
                } else if b == id {
                    Some((a, m))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn marks(&self) -> &[SingularityMark] {
        &self.marks
    }

    pub fn add_mark(&mut self, curves: Vec<CurveId>) -> Result<usize, SurfaceError> {
        for &c in &curves {
            self.node(c)?;
        }
        self.marks.push(SingularityMark { curves });
        Ok(self.marks.len() - 1)
    }

    pub fn remove_mark(&mut self, index: usize) -> SingularityMark {
        self.marks.remove(index)
    }

    pub fn mark_of(&self, id: CurveId) -> Option<usize> {
        self.marks.iter().position(|mk| mk.curves.contains(&id))
    }

    /// Marks met by a curve outside them, with the curves hit.
    pub fn marks_met(&self, id: CurveId) -> BTreeMap<usize, Vec<(CurveId, u32)>> {
        let mut out: BTreeMap<usize, Vec<(CurveId, u32)>> = BTreeMap::new();
        for (n, m) in self.neighbors(id) {
            if let Some(i) = self.mark_of(n) {
                out.entry(i).or_default().push((n, m));
            }
        }
        out
    }

    /// Negated self-intersections along a mark, in stored order.
    pub fn mark_entries(&self, index: usize) -> Vec<i64> {
        self.marks[index]
            .curves
            .iter()
            .map(|&c| -self.self_int(c))
            .collect()
    }

    pub fn mark_chain(&self, index: usize) -> Option<Chain> {
        Chain::new(self.mark_entries(index)).ok()
    }

    pub fn resolution_k2(&self) -> i64 {
        self.resolution_k2
    }

    pub fn resolution_euler(&self) -> i64 {
        self.resolution_euler
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical
    }

    pub fn set_canonical(&mut self, flag: bool) {
        self.canonical = flag;
    }

    pub fn is_smooth(&self) -> bool {
        self.marks.is_empty()
    }

    /// Blows up one point lying on the listed curves with the given multiplicities.
    pub fn blow_up(&mut self, label: &str, on: &[(CurveId, u32)]) -> Result<CurveId, SurfaceError> {
        let mut seen = BTreeSet::new();
        for &(c, m) in on {
            let node = self.node(c)?;
            if m == 0 || !seen.insert(c) {
                return Err(SurfaceError::InconsistentPoint(format!(
                    "curve '{}' listed with multiplicity {m} or twice",
                    node.label
                )));
            }
            let drop = m * (m - 1) / 2;
            if node.genus < drop {
                return Err(SurfaceError::InconsistentPoint(format!(
                    "'{}' of arithmetic genus {} cannot have a point of multiplicity {m}",
                    node.label, node.genus
                )));
            }
        }
        for (i, &(a, ma)) in on.iter().enumerate() {
            for &(b, mb) in &on[i + 1..] {
                if self.meet(a, b) < ma * mb {
                    return Err(SurfaceError::InconsistentPoint(format!(
                        "'{}' and '{}' meet {} times, fewer than {}",
                        self.label(a),
                        self.label(b),
                        self.meet(a, b),
                        ma * mb
                    )));
                }
            }
        }
        let e = self.add_curve(label, -1, 0)?;
        for (i, &(a, ma)) in on.iter().enumerate() {
            let node = self.curves.get_mut(&a).expect("checked");
            node.self_int -= (ma * ma) as i64;
            node.genus -= ma * (ma - 1) / 2;
            for &(b, mb) in &on[i + 1..] {
                let cur = self.meet(a, b);
                self.set_meet(a, b, cur - ma * mb)?;
            }
            self.set_meet(a, e, ma)?;
        }
        self.resolution_k2 -= 1;
        self.resolution_euler += 1;
        Ok(e)
    }

    /// Contracts a smooth rational (-1)-curve that lies in no mark, returning
    /// the curves it met with their multiplicities.
    pub fn contract(&mut self, e: CurveId) -> Result<Vec<(CurveId, u32)>, SurfaceError> {
        let node = self.node(e)?;
        if node.self_int != -1 || node.genus != 0 {
            return Err(SurfaceError::NotMinusOne(node.label.clone()));
        }
        if self.mark_of(e).is_some() {
            return Err(SurfaceError::CurveInMark(node.label.clone()));
        }
        let nbrs = self.neighbors(e);
        for (i, &(a, ma)) in nbrs.iter().enumerate() {
            let node = self.curves.get_mut(&a).expect("neighbor exists");
            node.self_int += (ma * ma) as i64;
            node.genus += ma * (ma - 1) / 2;
            for &(b, mb) in &nbrs[i + 1..] {
                let cur = self.meet(a, b);
                self.set_meet(a, b, cur + ma * mb)?;
            }
        }
        self.meets.retain(|&(a, b), _| a != e && b != e);
        let label = self.curves.remove(&e).expect("exists").label;
        self.labels.remove(&label);
        self.resolution_k2 += 1;
        self.resolution_euler -= 1;
        Ok(nbrs)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    EmptyMark {
        mark: usize,
    },
    MarkOverlap {
        curve: String,
    },
    MarkCurveNotNegative {
        curve: String,
        self_int: i64,
    },
    MarkCurveGenus {
        curve: String,
        genus: u32,
    },
    ChainAdjacency {
        mark: usize,
        a: String,
        b: String,
        found: u32,
        expected: u32,
    },
    NotWahl {
        mark: usize,
        chain: String,
        form: String,
    },
    MarksMeet {
        a: usize,
        b: usize,
        curve_a: String,
        curve_b: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyMark { mark } => write!(f, "mark {mark} is empty"),
            Violation::MarkOverlap { curve } => write!(f, "curve '{curve}' belongs to two marks"),
            Violation::MarkCurveNotNegative { curve, self_int } => {
                write!(
                    f,
                    "mark curve '{curve}' has self-intersection {self_int} > -2"
                )
            }
            Violation::MarkCurveGenus { curve, genus } => {
                write!(f, "mark curve '{curve}' has genus {genus}")
            }
            Violation::ChainAdjacency {
                mark,
                a,
                b,
                found,
                expected,
            } => write!(
                f,
                "mark {mark}: '{a}' and '{b}' meet {found} time(s), expected {expected}"
            ),
            Violation::NotWahl { mark, chain, form } => {
                write!(f, "mark {mark}: chain {chain} is {form}, not admissible")
            }
            Violation::MarksMeet {
                a,
                b,
                curve_a,
                curve_b,
            } => {
                write!(f, "marks {a} and {b} meet ('{curve_a}' and '{curve_b}')")
            }
        }
    }
}

pub fn validate_model(m: &SurfaceModel) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut owner: BTreeMap<CurveId, usize> = BTreeMap::new();
    for (i, mk) in m.marks.iter().enumerate() {
        if mk.curves.is_empty() {
            out.push(Violation::EmptyMark { mark: i });
            continue;
        }
        for &c in &mk.curves {
            if owner.insert(c, i).is_some() {
                out.push(Violation::MarkOverlap {
                    curve: m.label(c).to_string(),
                });
            }
            let node = &m.curves[&c];
            if node.self_int > -2 {
                out.push(Violation::MarkCurveNotNegative {
                    curve: node.label.clone(),
                    self_int: node.self_int,
                });
            }
            if node.genus != 0 {
                out.push(Violation::MarkCurveGenus {
                    curve: node.label.clone(),
                    genus: node.genus,
                });
            }
        }
        for (x, &a) in mk.curves.iter().enumerate() {
            for (y, &b) in mk.curves.iter().enumerate().skip(x + 1) {
                let expected = u32::from(y == x + 1);
                let found = m.meet(a, b);
                if found != expected {
                    out.push(Violation::ChainAdjacency {
                        mark: i,
                        a: m.label(a).to_string(),
                        b: m.label(b).to_string(),
                        found,
                        expected,
                    });
                }
            }
        }
        let entries = m.mark_entries(i);
        let chain_str = format!("{entries:?}");
        match hj_value_entries(&entries) {
            Ok(f) => {
                let form = recognize_t_form(&f);
                let ok = if m.canonical {
                    form.is_t()
                } else {
                    matches!(form, TForm::Wahl(_))
                };
                if !ok {
                    out.push(Violation::NotWahl {
                        mark: i,
                        chain: chain_str,
                        form: form.to_string(),
                    });
                }
            }
            Err(_) => out.push(Violation::NotWahl {
                mark: i,
                chain: chain_str,
                form: "not a chain".into(),
            }),
        }
    }
    for &(a, b) in m.meets.keys() {
        if let (Some(&i), Some(&j)) = (owner.get(&a), owner.get(&b)) {
            if i != j {
                out.push(Violation::MarksMeet {
                    a: i.min(j),
                    b: i.max(j),
                    curve_a: m.label(a).to_string(),
                    curve_b: m.label(b).to_string(),
                });
            }
        }
    }
    out
}

fn gram(entries: &[i64]) -> Vec<Vec<Q>> {
    let r = entries.len();
    (0..r)
        .map(|i| {
            (0..r)
                .map(|j| {
                    if i == j {
                        q(-entries[i])
                    } else if i.abs_diff(j) == 1 {
                        q(1)
                    } else {
                        q(0)
                    }
                })
                .collect()
        })
        .collect()
}

/// Signed discrepancies d_i in (-1, 0] with K_res = pi^*K + sum d_i E_i.
pub fn discrepancies(c: &Chain) -> Vec<Q> {
    let e = c.entries();
    let rhs: Vec<Q> = e.iter().map(|&b| q(b - 2)).collect();
    linalg::solve(&gram(e), &rhs).expect("chains with entries >= 2 are negative definite")
}

/// Discrepancy of every mark curve.
pub fn mark_discrepancies(m: &SurfaceModel) -> BTreeMap<CurveId, Q> {
    let mut out = BTreeMap::new();
    for (i, mk) in m.marks.iter().enumerate() {
        let Some(ch) = m.mark_chain(i) else { continue };
        for (&c, d) in mk.curves.iter().zip(discrepancies(&ch)) {
            out.insert(c, d);
        }
    }
    out
}

/// Discrepancy of a single curve: 0 off the marks.
pub fn discrepancy_of(m: &SurfaceModel, c: CurveId) -> Q {
    mark_discrepancies(m).remove(&c).unwrap_or_else(Q::zero)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DivisorClass {
    coeffs: BTreeMap<CurveId, Q>,
}

impl DivisorClass {
    pub fn curve(id: CurveId) -> Self {
        let mut d = DivisorClass::default();
        d.add(id, q(1));
        d
    }

    pub fn add(&mut self, id: CurveId, coeff: Q) {
        let e = self.coeffs.entry(id).or_insert_with(Q::zero);
        *e += coeff;
        if e.is_zero() {
            self.coeffs.remove(&id);
        }
    }

    pub fn get(&self, id: CurveId) -> Q {
        self.coeffs.get(&id).cloned().unwrap_or_else(Q::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (CurveId, &Q)> {
        self.coeffs.iter().map(|(&c, x)| (c, x))
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Raw intersection on the resolution.
    pub fn dot_resolution(&self, m: &SurfaceModel, other: &DivisorClass) -> Q {
        let mut s = Q::zero();
        for (a, x) in self.iter() {
            for (b, y) in other.iter() {
                let d = m.dot(a, b);
                if d != 0 {
                    s += x * y * q(d);
                }
            }
        }
        s
    }
}

impl FromIterator<(CurveId, Q)> for DivisorClass {
    fn from_iter<T: IntoIterator<Item = (CurveId, Q)>>(iter: T) -> Self {
        let mut d = DivisorClass::default();
        for (c, x) in iter {
            d.add(c, x);
        }
        d
    }
}

/// pi^*C = C + sum c_E E, orthogonal to every mark curve.
pub fn mumford_pullback(m: &SurfaceModel, c: CurveId) -> Result<DivisorClass, SurfaceError> {
    m.node(c)?;
    if m.mark_of(c).is_some() {
        return Err(SurfaceError::CurveInMark(m.label(c).to_string()));
    }
    let mut out = DivisorClass::curve(c);
    for (i, mk) in m.marks.iter().enumerate() {
        let rhs: Vec<Q> = mk
            .curves
            .iter()
            .map(|&e| q(-(m.meet(c, e) as i64)))
            .collect();
        if rhs.iter().all(Zero::is_zero) {
            continue;
        }
        let sol = linalg::solve(&gram(&m.mark_entries(i)), &rhs).ok_or_else(|| {
            SurfaceError::InconsistentPoint(format!("mark {i} is not negative definite"))
        })?;
        for (&e, x) in mk.curves.iter().zip(sol) {
            out.add(e, x);
        }
    }
    Ok(out)
}

fn pullback_class(m: &SurfaceModel, d: &DivisorClass) -> Result<DivisorClass, SurfaceError> {
    let mut out = DivisorClass::default();
    for (c, x) in d.iter() {
        for (e, y) in mumford_pullback(m, c)?.iter() {
            out.add(e, x * y);
        }
    }
    Ok(out)
}

/// Mumford intersection A.B on the singular surface.
pub fn pair_on_x(m: &SurfaceModel, a: &DivisorClass, b: &DivisorClass) -> Result<Q, SurfaceError> {
    let in_mark = |d: &DivisorClass| d.iter().any(|(c, _)| m.mark_of(c).is_some());
    let (a, b) = if in_mark(a) && !in_mark(b) {
        (b, a)
    } else {
        (a, b)
    };
    Ok(pullback_class(m, a)?.dot_resolution(m, b))
}

pub fn pair_curves(m: &SurfaceModel, a: CurveId, b: CurveId) -> Result<Q, SurfaceError> {
    pair_on_x(m, &DivisorClass::curve(a), &DivisorClass::curve(b))
}

/// K_X.C from adjunction on the resolution and the mark discrepancies.
pub fn k_pair(m: &SurfaceModel, c: CurveId) -> Result<Q, SurfaceError> {
    let node = m.node(c)?;
    if m.mark_of(c).is_some() {
        return Err(SurfaceError::CurveInMark(node.label.clone()));
    }
    let mut k = q(2 * node.genus as i64 - 2 - node.self_int);
    for (i, mk) in m.marks.iter().enumerate() {
        if mk.curves.iter().all(|&e| m.meet(c, e) == 0) {
            continue;
        }
        let Some(ch) = m.mark_chain(i) else { continue };
        for (&e, d) in mk.curves.iter().zip(discrepancies(&ch)) {
            k -= d * q(m.meet(c, e) as i64);
        }
    }
    Ok(k)
}

pub fn k_pair_class(m: &SurfaceModel, d: &DivisorClass) -> Result<Q, SurfaceError> {
    let mut s = Q::zero();
    for (c, x) in d.iter() {
        s += x * k_pair(m, c)?;
    }
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GlobalInvariants {
    #[serde(with = "qfmt")]
    pub k2_special: Q,
    #[serde(with = "qfmt")]
    pub k2_general: Q,
    pub euler_general: i64,
}

impl fmt::Display for GlobalInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K^2 = {}, e = {}", self.k2_special, self.euler_general)
    }
}

pub fn global_invariants(m: &SurfaceModel) -> GlobalInvariants {
    let mut k2 = q(m.resolution_k2);
    let mut euler = m.resolution_euler;
    for i in 0..m.marks.len() {
        let entries = m.mark_entries(i);
        let Some(ch) = m.mark_chain(i) else { continue };
        // K_res^2 = (pi^*K)^2 + D^2 with D.E_i = b_i - 2
        for (d, &b) in discrepancies(&ch).iter().zip(&entries) {
            k2 -= d * q(b - 2);
        }
        let mu = recognize_t_form(&crate::cfrac::hj_value(&ch))
            .milnor_number(ch.len())
            .unwrap_or(0);
        euler -= ch.len() as i64 - mu;
    }
    GlobalInvariants {
        k2_general: k2.clone(),
        k2_special: k2,
        euler_general: euler,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CurvePairing {
    pub curve: String,
    #[serde(with = "qfmt")]
    pub k: Q,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NefReport {
    pub scope: &'static str,
    pub pairings: Vec<CurvePairing>,
    pub negative: Vec<CurvePairing>,
    pub pass: bool,
}

pub fn nef_report(m: &SurfaceModel) -> NefReport {
    let pairings: Vec<CurvePairing> = m
        .curves()
        .filter(|c| m.mark_of(c.id).is_none())
        .map(|c| CurvePairing {
            curve: c.label.clone(),
            k: k_pair(m, c.id).expect("curve off the marks"),
        })
        .collect();
    let negative: Vec<CurvePairing> = pairings
        .iter()
        .filter(|p| p.k.is_negative())
        .cloned()
        .collect();
    NefReport {
        scope: "nef relative to encoded curves",
        pass: negative.is_empty(),
        pairings,
        negative,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AnticanonicalMismatch {
    pub curve: String,
    pub group_pairing: i64,
    pub minus_k: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub scope: &'static str,
    pub rank: usize,
    pub independent: bool,
    pub anticanonical: bool,
    pub mismatches: Vec<AnticanonicalMismatch>,
}

impl ObstructionReport {
    pub fn pass(&self) -> bool {
        self.independent && self.anticanonical
    }
}

/// Numerical hypotheses of the obstruction criterion, on the resolution.
pub fn obstruction_witness_check(
    m: &SurfaceModel,
    first_group: &[CurveId],
    rest: &[CurveId],
) -> Result<ObstructionReport, SurfaceError> {
    for &c in first_group.iter().chain(rest) {
        m.node(c)?;
    }
    let gram: Vec<Vec<Q>> = rest
        .iter()
        .map(|&a| rest.iter().map(|&b| q(m.dot(a, b))).collect())
        .collect();
    let rank = linalg::rank(&gram);
    let mut mismatches = Vec::new();
    for node in m.curves() {
        let group_pairing: i64 = first_group.iter().map(|&c| m.dot(c, node.id)).sum();
        let minus_k = node.self_int + 2 - 2 * node.genus as i64;
        if group_pairing != minus_k {
            mismatches.push(AnticanonicalMismatch {
                curve: node.label.clone(),
                group_pairing,
                minus_k,
            });
        }
    }
    Ok(ObstructionReport {
        scope: "necessary conditions only",
        rank,
        independent: rank == rest.len(),
        anticanonical: mismatches.is_empty(),
        mismatches,
    })
}

/// Wahl pair of every mark, when it is one.
pub fn mark_forms(m: &SurfaceModel) -> Vec<(Vec<String>, Option<Chain>, TForm)> {
    (0..m.marks.len())
        .map(|i| {
            let labels = m.marks[i]
                .curves
                .iter()
                .map(|&c| m.label(c).to_string())
                .collect();
            let ch = m.mark_chain(i);
            let form = ch.as_ref().map_or(TForm::NonT, |c| match is_wahl_chain(c) {
                Some(w) => TForm::Wahl(w),
                None => recognize_t_form(&crate::cfrac::hj_value(c)),
            });
            (labels, ch, form)
        })
        .collect()
}
