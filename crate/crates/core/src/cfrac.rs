//! Hirzebruch-Jung continued fractions, T-singularity recognition, the
//! W-blow-up index recurrence and Markov triples.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

use crate::error::CfracError;

/// A reduced pair (m, q) with 0 < q < m, standing for 1/m(1,q).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fraction {
    m: BigInt,
    q: BigInt,
}

impl Fraction {
    /// Strict constructor: the pair must already be coprime.
    pub fn new(m: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, CfracError> {
        let (m, q) = (m.into(), q.into());
        if !q.is_positive() || q >= m {
            return Err(CfracError::OutOfRange {
                m: m.to_string(),
                q: q.to_string(),
            });
        }
        if !m.gcd(&q).is_one() {
            return Err(CfracError::NotCoprime {
                m: m.to_string(),
                q: q.to_string(),
            });
        }
        Ok(Fraction { m, q })
    }

    /// Divides out the common factor before validating.
    pub fn reduced(m: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Self, CfracError> {
        let (m, q) = (m.into(), q.into());
        let g = m.gcd(&q);
        if g.is_zero() {
            return Err(CfracError::OutOfRange {
                m: m.to_string(),
                q: q.to_string(),
            });
        }
        Fraction::new(&m / &g, &q / &g)
    }

    pub fn m(&self) -> &BigInt {
        &self.m
    }

    pub fn q(&self) -> &BigInt {
        &self.q
    }

    /// The fraction of the reversed chain: q' with q q' = 1 mod m.
    pub fn dual(&self) -> Fraction {
        let e = self.q.extended_gcd(&self.m);
        let q = e.x.mod_floor(&self.m);
        Fraction {
            m: self.m.clone(),
            q,
        }
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.m, self.q)
    }
}

impl Serialize for Fraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Negated self-intersections of a chain of rational curves, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Chain(Vec<i64>);

impl Chain {
    pub fn new(entries: Vec<i64>) -> Result<Self, CfracError> {
        if entries.is_empty() {
            return Err(CfracError::EmptyChain);
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &b)| b < 2) {
            return Err(CfracError::EntryTooSmall { index, value });
        }
        Ok(Chain(entries))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Chain {
        Chain(self.0.iter().rev().copied().collect())
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Wahl index pair (n, a) of 1/n^2(1, na-1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WahlPair {
    pub n: BigInt,
    pub a: BigInt,
}

impl WahlPair {
    pub fn new(n: impl Into<BigInt>, a: impl Into<BigInt>) -> Result<Self, CfracError> {
        let (n, a) = (n.into(), a.into());
        if n < BigInt::from(2) || !a.is_positive() || a >= n || !n.gcd(&a).is_one() {
            return Err(CfracError::BadWahlPair {
                n: n.to_string(),
                a: a.to_string(),
            });
        }
        Ok(WahlPair { n, a })
    }

    pub fn fraction(&self) -> Fraction {
        Fraction {
            m: &self.n * &self.n,
            q: &self.n * &self.a - 1,
        }
    }
}

impl fmt::Display for WahlPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.a)
    }
}

impl Serialize for WahlPair {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TForm {
    DuVal,
    Wahl(WahlPair),
    GeneralT { d: BigInt, n: BigInt, a: BigInt },
    NonT,
}

impl TForm {
    pub fn is_t(&self) -> bool {
        !matches!(self, TForm::NonT)
    }

    /// Milnor number of a Q-Gorenstein smoothing (d - 1 for 1/dn^2, r for A_r).
    pub fn milnor_number(&self, len: usize) -> Option<i64> {
        match self {
            TForm::DuVal => Some(len as i64),
            TForm::Wahl(_) => Some(0),
            TForm::GeneralT { d, .. } => i64::try_from(d - 1).ok(),
            TForm::NonT => None,
        }
    }
}

impl fmt::Display for TForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TForm::DuVal => write!(f, "du Val"),
            TForm::Wahl(w) => write!(f, "Wahl{w}"),
            TForm::GeneralT { d, n, a } => write!(f, "T(d={d},n={n},a={a})"),
            TForm::NonT => write!(f, "non-T"),
        }
    }
}

impl Serialize for TForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub fn hj_expand(f: &Fraction) -> Chain {
    let (mut m, mut q) = (f.m.clone(), f.q.clone());
    let mut out = Vec::new();
    while !q.is_zero() {
        let b = m.div_ceil(&q);
        let next = &b * &q - &m;
        out.push(i64::try_from(&b).expect("chain entry fits in i64"));
        m = std::mem::replace(&mut q, next);
    }
    Chain(out)
}

/// Strict expansion of a raw pair; rejects q >= m and gcd(m,q) != 1.
pub fn hj_expand_pair(m: impl Into<BigInt>, q: impl Into<BigInt>) -> Result<Chain, CfracError> {
    Ok(hj_expand(&Fraction::new(m, q)?))
}

pub fn hj_value(c: &Chain) -> Fraction {
    let mut num = BigInt::one();
    let mut den = BigInt::zero();
    for &b in c.0.iter().rev() {
        let next = BigInt::from(b) * &num - &den;
        den = std::mem::replace(&mut num, next);
    }
    Fraction { m: num, q: den }
}

/// Value of an arbitrary integer list, for callers holding unchecked data.
pub fn hj_value_entries(entries: &[i64]) -> Result<Fraction, CfracError> {
    Ok(hj_value(&Chain::new(entries.to_vec())?))
}

pub fn recognize_t_form(f: &Fraction) -> TForm {
    let (m, q) = (&f.m, &f.q);
    if *q == m - 1 {
        return TForm::DuVal;
    }
    let q1: BigInt = q + 1;
    // n descending means d = m / n^2 ascending
    let mut n = m.sqrt();
    let two = BigInt::from(2);
    while n >= two {
        let n2 = &n * &n;
        if (m % &n2).is_zero() {
            let d = m / &n2;
            let dn = &d * &n;
            if (&q1 % &dn).is_zero() {
                let a = &q1 / &dn;
                if a.is_positive() && a < n && n.gcd(&a).is_one() {
                    return if d.is_one() {
                        TForm::Wahl(WahlPair { n, a })
                    } else {
                        TForm::GeneralT { d, n, a }
                    };
                }
            }
        }
        n -= 1;
    }
    TForm::NonT
}

pub fn is_wahl_chain(c: &Chain) -> Option<WahlPair> {
    match recognize_t_form(&hj_value(c)) {
        TForm::Wahl(w) => Some(w),
        _ => None,
    }
}

/// (n_2,a_2), ..., (n_k,a_k) from n_i = delta n_{i-1} - n_{i-2}, seeded by (0,1), (delta,a).
pub fn wahl_blowup_pairs(
    delta: impl Into<BigInt>,
    a: impl Into<BigInt>,
    k: usize,
) -> Result<Vec<WahlPair>, CfracError> {
    let (delta, a) = (delta.into(), a.into());
    if delta < BigInt::from(2) || !a.is_positive() || a >= delta || !delta.gcd(&a).is_one() || k < 2
    {
        return Err(CfracError::BadRecurrenceSeed {
            delta: delta.to_string(),
            a: a.to_string(),
            k,
        });
    }
    let mut prev = (BigInt::zero(), BigInt::one());
    let mut cur = (delta.clone(), a);
    let mut out = Vec::with_capacity(k - 1);
    for _ in 2..=k {
        let next = (&delta * &cur.0 - &prev.0, &delta * &cur.1 - &prev.1);
        prev = std::mem::replace(&mut cur, next);
        out.push(WahlPair::new(cur.0.clone(), cur.1.clone())?);
    }
    Ok(out)
}

/// All Wahl pairs (n, a) with n <= max_n, ordered by n then a.
pub fn wahl_pairs(max_n: i64) -> Vec<WahlPair> {
    (2..=max_n)
        .flat_map(|n| (1..n).filter_map(move |a| WahlPair::new(n, a).ok()))
        .collect()
}

/// All Wahl chains of length at most `max_len`, grown from [4] by the two
/// standard extensions [b1,...,br] -> [2,b1,...,br+1] and [b1+1,...,br,2].
pub fn wahl_chains(max_len: usize) -> BTreeSet<Chain> {
    let mut out = BTreeSet::new();
    if max_len == 0 {
        return out;
    }
    let mut queue = VecDeque::from([vec![4i64]]);
    while let Some(c) = queue.pop_front() {
        if !out.insert(Chain(c.clone())) || c.len() == max_len {
            continue;
        }
        let mut left = vec![2];
        left.extend_from_slice(&c);
        *left.last_mut().unwrap() += 1;
        let mut right = c.clone();
        right[0] += 1;
        right.push(2);
        queue.push_back(left);
        queue.push_back(right);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MarkovTriple {
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl MarkovTriple {
    pub fn holds(&self) -> bool {
        let (a, b, c) = (self.a as u128, self.b as u128, self.c as u128);
        a * a + b * b + c * c == 3 * a * b * c
    }
}

impl fmt::Display for MarkovTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.a, self.b, self.c)
    }
}

/// Sorted solutions with c <= bound, found by solving the quadratic in c
/// for every admissible (a, b).
pub fn markov_triples(bound: u64) -> BTreeSet<MarkovTriple> {
    let mut out = BTreeSet::new();
    // c >= 3ab/2 for the larger root, so ab <= 2c/3 <= bound
    let mut a: u64 = 1;
    while a * a <= bound {
        let mut b = a;
        while a * b <= bound && b <= bound {
            let (a2, b2) = (a as u128, b as u128);
            let s = 3 * a2 * b2;
            if let Some(disc) = (s * s).checked_sub(4 * (a2 * a2 + b2 * b2)) {
                let r = disc.sqrt();
                if r * r == disc {
                    for twice_c in [s + r, s - r] {
                        if twice_c % 2 == 0 {
                            let c = twice_c / 2;
                            if c >= b2 && c <= bound as u128 {
                                out.insert(MarkovTriple { a, b, c: c as u64 });
                            }
                        }
                    }
                }
            }
            b += 1;
        }
        a += 1;
    }
    out
}

/// Markov triples reachable from (1,1,1) by Vieta involutions, with c <= bound.
pub fn markov_vieta_tree(bound: u64) -> BTreeSet<MarkovTriple> {
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::from([[1u64, 1, 1]]);
    while let Some(t) = queue.pop_front() {
        let mut s = t;
        s.sort_unstable();
        if s[2] > bound {
            continue;
        }
        if !seen.insert(MarkovTriple {
            a: s[0],
            b: s[1],
            c: s[2],
        }) {
            continue;
        }
        for i in 0..3 {
            let (x, y) = (s[(i + 1) % 3] as u128, s[(i + 2) % 3] as u128);
            let flipped = 3 * x * y - s[i] as u128;
            if flipped <= bound as u128 {
                let mut u = s;
                u[i] = flipped as u64;
                queue.push_back(u);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac(m: i64, q: i64) -> Fraction {
        Fraction::new(m, q).unwrap()
    }

    fn chain(v: &[i64]) -> Chain {
        Chain::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expand_examples() {
        assert_eq!(hj_expand(&frac(4, 1)), chain(&[4]));
        assert_eq!(hj_expand(&frac(36, 5)), chain(&[8, 2, 2, 2, 2]));
        assert_eq!(hj_expand(&frac(25, 4)), chain(&[7, 2, 2, 2]));
        assert_eq!(hj_value(&chain(&[7, 2, 2, 2])), frac(25, 4));
    }

    #[test]
    fn expand_rejects_bad_pairs() {
        assert!(matches!(
            hj_expand_pair(4, 4),
            Err(CfracError::OutOfRange { .. })
        ));
        assert!(matches!(
            hj_expand_pair(4, 6),
            Err(CfracError::OutOfRange { .. })
        ));
        assert!(matches!(
            hj_expand_pair(6, 4),
            Err(CfracError::NotCoprime { .. })
        ));
        assert!(Fraction::reduced(6, 4).is_ok());
    }

    #[test]
    fn value_examples() {
        assert_eq!(hj_value(&chain(&[4])), frac(4, 1));
        assert_eq!(hj_value(&chain(&[6, 2, 2])), frac(16, 3));
        assert_eq!(hj_value(&chain(&[2, 2, 2])), frac(4, 3));
        assert!(Chain::new(vec![3, 1]).is_err());
        assert!(Chain::new(vec![]).is_err());
    }

    #[test]
    fn t_form_examples() {
        assert_eq!(
            recognize_t_form(&frac(4, 1)),
            TForm::Wahl(WahlPair::new(2, 1).unwrap())
        );
        assert_eq!(
            recognize_t_form(&frac(8, 3)),
            TForm::GeneralT {
                d: 2.into(),
                n: 2.into(),
                a: 1.into()
            }
        );
        assert_eq!(hj_value(&chain(&[3, 3])), frac(8, 3));
        assert_eq!(recognize_t_form(&frac(5, 2)), TForm::NonT);
        assert_eq!(recognize_t_form(&frac(4, 3)), TForm::DuVal);
    }

    #[test]
    fn wahl_chain_examples() {
        assert_eq!(
            is_wahl_chain(&chain(&[8, 2, 2, 2, 2])),
            Some(WahlPair::new(6, 1).unwrap())
        );
        assert_eq!(is_wahl_chain(&chain(&[2, 2])), None);
        assert_eq!(
            is_wahl_chain(&chain(&[5, 2])),
            Some(WahlPair::new(3, 1).unwrap())
        );
    }

    #[test]
    fn recurrence_examples() {
        let p = |n: i64, a: i64| WahlPair::new(n, a).unwrap();
        assert_eq!(wahl_blowup_pairs(2, 1, 2).unwrap(), vec![p(4, 1)]);
        assert_eq!(wahl_blowup_pairs(3, 1, 3).unwrap(), vec![p(9, 2), p(24, 5)]);
        assert!(wahl_blowup_pairs(4, 2, 3).is_err());
    }

    #[test]
    fn markov_examples() {
        let t = |a, b, c| MarkovTriple { a, b, c };
        assert_eq!(
            markov_triples(1).into_iter().collect::<Vec<_>>(),
            vec![t(1, 1, 1)]
        );
        assert!(markov_triples(2).contains(&t(1, 1, 2)));
        assert!(markov_triples(29).contains(&t(2, 5, 29)));
        assert_eq!(markov_triples(2000), markov_vieta_tree(2000));
    }

    // Independent Wahl test straight from the definition m = n^2, q = na - 1.
    fn wahl_by_definition(f: &Fraction) -> Option<(u64, u64)> {
        let m: u64 = f.m().try_into().ok()?;
        let q: u64 = f.q().try_into().ok()?;
        let n = (1..=m).take_while(|n| n * n <= m).find(|n| n * n == m)?;
        (1..n)
            .find(|&a| n * a - 1 == q && n.gcd(&a) == 1)
            .map(|a| (n, a))
    }

    fn chains_up_to(len: usize, max_entry: i64, f: &mut impl FnMut(&[i64])) {
        fn go(cur: &mut Vec<i64>, len: usize, max_entry: i64, f: &mut impl FnMut(&[i64])) {
            if !cur.is_empty() {
                f(cur);
            }
            if cur.len() == len {
                return;
            }
            for b in 2..=max_entry {
                cur.push(b);
                go(cur, len, max_entry, f);
                cur.pop();
            }
        }
        go(&mut Vec::new(), len, max_entry, f);
    }

    #[test]
    fn wahl_recognition_matches_definition_exhaustively() {
        let mut found = BTreeSet::new();
        chains_up_to(5, 12, &mut |c| {
            let ch = chain(c);
            let ours = is_wahl_chain(&ch)
                .map(|w| (u64::try_from(&w.n).unwrap(), u64::try_from(&w.a).unwrap()));
            assert_eq!(ours, wahl_by_definition(&hj_value(&ch)), "{ch}");
            if ours.is_some() {
                found.insert(ch);
            }
        });
        let grown: BTreeSet<Chain> = wahl_chains(5)
            .into_iter()
            .filter(|c| c.entries().iter().all(|&b| b <= 12))
            .collect();
        assert_eq!(found, grown);
    }

    #[test]
    fn reversal_duality() {
        for m in 2..=500i64 {
            for q in 1..m {
                if m.gcd(&q) != 1 {
                    continue;
                }
                let f = frac(m, q);
                let r = hj_value(&hj_expand(&f).reversed());
                assert_eq!(r.m(), f.m());
                assert_eq!((r.q() * f.q()) % m, BigInt::one());
                assert_eq!(r, f.dual());
            }
        }
    }

    proptest! {
        #[test]
        fn wahl_recognition_matches_definition_long(c in proptest::collection::vec(2i64..=12, 6..=8)) {
            let ch = chain(&c);
            let ours = is_wahl_chain(&ch).map(|w| {
                (u64::try_from(&w.n).unwrap(), u64::try_from(&w.a).unwrap())
            });
            prop_assert_eq!(ours, wahl_by_definition(&hj_value(&ch)));
        }

        #[test]
        fn grown_chains_are_wahl(idx in 0usize..200) {
            let all: Vec<Chain> = wahl_chains(8).into_iter().collect();
            let c = &all[idx % all.len()];
            prop_assert!(is_wahl_chain(c).is_some());
        }

        #[test]
        fn chains_evaluate_in_range(c in proptest::collection::vec(2i64..=40, 1..=12)) {
            let f = hj_value(&chain(&c));
            prop_assert!(f.m() > f.q() && *f.q() >= BigInt::one());
            prop_assert_eq!(hj_expand(&f), chain(&c));
        }

        #[test]
        fn recurrence_pairs_coprime_and_increasing(delta in 2i64..40, a in 1i64..40, k in 2usize..12) {
            prop_assume!(a < delta && delta.gcd(&a) == 1);
            let pairs = wahl_blowup_pairs(delta, a, k).unwrap();
            let mut last = BigInt::from(delta);
            for p in pairs {
                prop_assert!(p.n.gcd(&p.a).is_one());
                prop_assert!(p.n > last);
                last = p.n.clone();
            }
        }
    }
}
