//! Assertions a scenario makes about its run.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use wsurf::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds(self, actual: &Q, expected: &Q) -> bool {
        match self {
            Cmp::Eq => actual == expected,
            Cmp::Le => actual <= expected,
            Cmp::Lt => actual < expected,
            Cmp::Ge => actual >= expected,
            Cmp::Gt => actual > expected,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Cmp::Eq => "=",
            Cmp::Le => "<=",
            Cmp::Lt => "<",
            Cmp::Ge => ">=",
            Cmp::Gt => ">",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Quantity {
    K2Special,
    K2General,
    EulerGeneral,
    Curves,
    Flips,
    BlowDowns,
    BlowUps,
    KPair(String),
    SelfPair(String),
    Discrepancy(String),
    DiscrepancySum(Vec<String>),
    KGamma(String),
    SelfGamma(String),
    Degree(String),
    Delta(String),
    /// Number of points of the given multiplicity in a plane report.
    Points(String, i64),
    ImageDegree(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Flag {
    Valid,
    Smooth,
    Nef,
    Maltese,
    GenusOk(String),
    ProximityOk(String),
    Integral(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TerminalKind {
    Minimal,
    DelPezzo,
    Ruled,
    Stuck,
    Open,
}

impl TerminalKind {
    fn as_str(self) -> &'static str {
        match self {
            TerminalKind::Minimal => "minimal",
            TerminalKind::DelPezzo => "del_pezzo",
            TerminalKind::Ruled => "ruled",
            TerminalKind::Stuck => "stuck",
            TerminalKind::Open => "open",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expectation {
    Compare {
        quantity: Quantity,
        cmp: Cmp,
        value: Q,
    },
    Flag(Flag),
    /// Current ledger, as an unordered sum.
    Ledger {
        name: String,
        terms: Vec<(String, Q)>,
    },
    /// Components of the plane report.
    Components {
        name: String,
        terms: Vec<(String, Q)>,
    },
    Clusters {
        name: String,
        signature: String,
    },
    /// Mark lengths as a multiset.
    Marks(Vec<usize>),
    Wahl {
        curve: String,
        n: i64,
        a: i64,
    },
    /// hj value of the mark containing the curve, read from that curve's end.
    Fraction {
        curve: String,
        m: i64,
        q: i64,
    },
    Terminal {
        kind: TerminalKind,
        reason: Option<String>,
    },
}

fn parse_q(s: &str) -> Result<Q, String> {
    let bad = || format!("bad number '{s}'");
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d == BigInt::from(0) {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.trim().parse().map_err(|_| bad())?)),
    }
}

fn ident_ok(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.')
}

/// "name(a,b)" -> ("name", ["a","b"]); "name" -> ("name", []).
fn call(s: &str) -> Result<(&str, Vec<&str>), String> {
    match s.split_once('(') {
        None => Ok((s, Vec::new())),
        Some((head, rest)) => {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("unbalanced parentheses in '{s}'"))?;
            let args: Vec<&str> = inner.split(',').map(str::trim).collect();
            if args
                .iter()
                .any(|a| !ident_ok(a) && a.parse::<i64>().is_err())
            {
                return Err(format!("bad arguments in '{s}'"));
            }
            Ok((head, args))
        }
    }
}

fn parse_quantity(s: &str) -> Result<Quantity, String> {
    let (head, args) = call(s)?;
    let one = |args: &[&str]| -> Result<String, String> {
        match args {
            [a] if ident_ok(a) => Ok(a.to_string()),
            _ => Err(format!("'{head}' takes one label")),
        }
    };
    Ok(match head {
        "k2_special" if args.is_empty() => Quantity::K2Special,
        "k2_general" if args.is_empty() => Quantity::K2General,
        "euler_general" if args.is_empty() => Quantity::EulerGeneral,
        "curves" if args.is_empty() => Quantity::Curves,
        "flips" if args.is_empty() => Quantity::Flips,
        "blow_downs" if args.is_empty() => Quantity::BlowDowns,
        "blow_ups" if args.is_empty() => Quantity::BlowUps,
        "k_pair" => Quantity::KPair(one(&args)?),
        "self_pair" => Quantity::SelfPair(one(&args)?),
        "discrepancy" => Quantity::Discrepancy(one(&args)?),
        "discrepancy_sum" if !args.is_empty() => {
            Quantity::DiscrepancySum(args.iter().map(|a| a.to_string()).collect())
        }
        "k_gamma" => Quantity::KGamma(one(&args)?),
        "self_gamma" => Quantity::SelfGamma(one(&args)?),
        "degree" => Quantity::Degree(one(&args)?),
        "delta" => Quantity::Delta(one(&args)?),
        "image_degree" => Quantity::ImageDegree(one(&args)?),
        "points" => match args.as_slice() {
            [g, m] if ident_ok(g) => Quantity::Points(
                g.to_string(),
                m.parse().map_err(|_| format!("bad multiplicity '{m}'"))?,
            ),
            _ => return Err("'points' takes a ledger and a multiplicity".into()),
        },
        _ => return Err(format!("unknown quantity '{s}'")),
    })
}

fn parse_flag(s: &str) -> Option<Flag> {
    let (head, args) = call(s).ok()?;
    let one = || match args.as_slice() {
        [a] => Some(a.to_string()),
        _ => None,
    };
    Some(match head {
        "valid" if args.is_empty() => Flag::Valid,
        "smooth" if args.is_empty() => Flag::Smooth,
        "nef" if args.is_empty() => Flag::Nef,
        "maltese" if args.is_empty() => Flag::Maltese,
        "genus_ok" => Flag::GenusOk(one()?),
        "proximity_ok" => Flag::ProximityOk(one()?),
        "integral" => Flag::Integral(one()?),
        _ => return None,
    })
}

/// "S1 + F1 + 3 F2", "1/2 E", or "0".
pub fn parse_terms(s: &str) -> Result<Vec<(String, Q)>, String> {
    if s.trim() == "0" {
        return Ok(Vec::new());
    }
    s.split('+')
        .map(|t| {
            let words: Vec<&str> = t.split_whitespace().collect();
            match words.as_slice() {
                [l] if ident_ok(l) => Ok((l.to_string(), Q::from_integer(1.into()))),
                [c, l] if ident_ok(l) => Ok((l.to_string(), parse_q(c)?)),
                _ => Err(format!("bad term '{}'", t.trim())),
            }
        })
        .collect()
}

fn format_terms(terms: &[(String, Q)]) -> String {
    wsurf::degeneration::format_terms(terms)
}

fn named_rhs<'a>(rest: &'a str, what: &str) -> Result<(String, &'a str), String> {
    let (name, rhs) = rest
        .split_once('=')
        .ok_or_else(|| format!("expected '{what} NAME = ...'"))?;
    let name = name.trim();
    if !ident_ok(name) {
        return Err(format!("bad name '{name}'"));
    }
    Ok((name.to_string(), rhs.trim()))
}

impl FromStr for Expectation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (head, rest) = s
            .split_once(char::is_whitespace)
            .map_or((s, ""), |(h, r)| (h, r.trim()));
        match head {
            "ledger" => {
                let (name, rhs) = named_rhs(rest, "ledger")?;
                return Ok(Expectation::Ledger {
                    name,
                    terms: parse_terms(rhs)?,
                });
            }
            "components" => {
                let (name, rhs) = named_rhs(rest, "components")?;
                return Ok(Expectation::Components {
                    name,
                    terms: parse_terms(rhs)?,
                });
            }
            "clusters" => {
                let (name, rhs) = named_rhs(rest, "clusters")?;
                let signature = rhs.split_whitespace().collect::<Vec<_>>().join(" ");
                return Ok(Expectation::Clusters { name, signature });
            }
            "marks" => {
                let lens = rest
                    .split_whitespace()
                    .map(|w| {
                        w.parse::<usize>()
                            .map_err(|_| format!("bad mark length '{w}'"))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                return Ok(Expectation::Marks(lens));
            }
            "wahl" => {
                let w: Vec<&str> = rest.split_whitespace().collect();
                if let [c, n, a] = w.as_slice() {
                    if let (true, Ok(n), Ok(a)) = (ident_ok(c), n.parse(), a.parse()) {
                        return Ok(Expectation::Wahl {
                            curve: c.to_string(),
                            n,
                            a,
                        });
                    }
                }
                return Err("expected 'wahl CURVE N A'".into());
            }
            "fraction" => {
                let w: Vec<&str> = rest.split_whitespace().collect();
                if let [c, f] = w.as_slice() {
                    if let Some((m, q)) = f.split_once('/') {
                        if let (true, Ok(m), Ok(q)) = (ident_ok(c), m.parse(), q.parse()) {
                            return Ok(Expectation::Fraction {
                                curve: c.to_string(),
                                m,
                                q,
                            });
                        }
                    }
                }
                return Err("expected 'fraction CURVE M/Q'".into());
            }
            "terminal" => {
                let (kind, reason) = rest
                    .split_once(char::is_whitespace)
                    .map_or((rest, ""), |(k, r)| (k, r.trim()));
                let kind = match kind {
                    "minimal" => TerminalKind::Minimal,
                    "del_pezzo" => TerminalKind::DelPezzo,
                    "ruled" => TerminalKind::Ruled,
                    "stuck" => TerminalKind::Stuck,
                    "open" => TerminalKind::Open,
                    other => return Err(format!("unknown terminal kind '{other}'")),
                };
                let reason = if reason.is_empty() {
                    None
                } else {
                    let r = reason
                        .strip_prefix('"')
                        .and_then(|r| r.strip_suffix('"'))
                        .filter(|r| !r.contains('"'))
                        .ok_or("terminal reason must be a quoted string")?;
                    Some(r.to_string())
                };
                return Ok(Expectation::Terminal { kind, reason });
            }
            _ => {}
        }
        if let Some(f) = parse_flag(s) {
            return Ok(Expectation::Flag(f));
        }
        for op in ["<=", ">=", "=", "<", ">"] {
            if let Some((lhs, rhs)) = s.split_once(op) {
                let cmp = match op {
                    "<=" => Cmp::Le,
                    ">=" => Cmp::Ge,
                    "=" => Cmp::Eq,
                    "<" => Cmp::Lt,
                    _ => Cmp::Gt,
                };
                let quantity = parse_quantity(&lhs.split_whitespace().collect::<String>())?;
                return Ok(Expectation::Compare {
                    quantity,
                    cmp,
                    value: parse_q(rhs)?,
                });
            }
        }
        Err(format!("unrecognized expectation '{s}'"))
    }
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Quantity::K2Special => f.write_str("k2_special"),
            Quantity::K2General => f.write_str("k2_general"),
            Quantity::EulerGeneral => f.write_str("euler_general"),
            Quantity::Curves => f.write_str("curves"),
            Quantity::Flips => f.write_str("flips"),
            Quantity::BlowDowns => f.write_str("blow_downs"),
            Quantity::BlowUps => f.write_str("blow_ups"),
            Quantity::KPair(l) => write!(f, "k_pair({l})"),
            Quantity::SelfPair(l) => write!(f, "self_pair({l})"),
            Quantity::Discrepancy(l) => write!(f, "discrepancy({l})"),
            Quantity::DiscrepancySum(ls) => write!(f, "discrepancy_sum({})", ls.join(",")),
            Quantity::KGamma(l) => write!(f, "k_gamma({l})"),
            Quantity::SelfGamma(l) => write!(f, "self_gamma({l})"),
            Quantity::Degree(l) => write!(f, "degree({l})"),
            Quantity::Delta(l) => write!(f, "delta({l})"),
            Quantity::Points(l, m) => write!(f, "points({l},{m})"),
            Quantity::ImageDegree(l) => write!(f, "image_degree({l})"),
        }
    }
}

impl fmt::Display for Flag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Flag::Valid => f.write_str("valid"),
            Flag::Smooth => f.write_str("smooth"),
            Flag::Nef => f.write_str("nef"),
            Flag::Maltese => f.write_str("maltese"),
            Flag::GenusOk(l) => write!(f, "genus_ok({l})"),
            Flag::ProximityOk(l) => write!(f, "proximity_ok({l})"),
            Flag::Integral(l) => write!(f, "integral({l})"),
        }
    }
}

impl fmt::Display for Expectation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expectation::Compare {
                quantity,
                cmp,
                value,
            } => write!(f, "{quantity} {} {value}", cmp.as_str()),
            Expectation::Flag(fl) => write!(f, "{fl}"),
            Expectation::Ledger { name, terms } => {
                write!(f, "ledger {name} = {}", format_terms(terms))
            }
            Expectation::Components { name, terms } => {
                write!(f, "components {name} = {}", format_terms(terms))
            }
            Expectation::Clusters { name, signature } => write!(f, "clusters {name} = {signature}"),
            Expectation::Marks(l) => {
                f.write_str("marks")?;
                for x in l {
                    write!(f, " {x}")?;
                }
                Ok(())
            }
            Expectation::Wahl { curve, n, a } => write!(f, "wahl {curve} {n} {a}"),
            Expectation::Fraction { curve, m, q } => write!(f, "fraction {curve} {m}/{q}"),
            Expectation::Terminal { kind, reason } => {
                write!(f, "terminal {}", kind.as_str())?;
                if let Some(r) = reason {
                    write!(f, " \"{r}\"")?;
                }
                Ok(())
            }
        }
    }
}
