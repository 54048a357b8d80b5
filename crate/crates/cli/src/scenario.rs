//! Line-oriented scenario files: a model, ledger seeds, a script and
//! assertions. `parse_scenario` and `Scenario`'s `Display` are inverse.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::ParseError;
use crate::expect::Expectation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveDecl {
    pub label: String,
    pub self_int: i64,
    pub genus: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meet {
    pub a: String,
    pub b: String,
    pub mult: u32,
}

/// Construction steps applied to the declared curves before marks are set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BuildOp {
    BlowUp {
        label: String,
        on: Vec<(String, u32)>,
    },
    BlowDown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerSeed {
    pub name: String,
    pub genus: i64,
    pub terms: Vec<(String, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Directive {
    /// Forget the mark containing this curve (the singularity being smoothed).
    Resolve(String),
    /// Start transporting a ledger seeded in a `[ledger]` section.
    Track(String),
    Flip(String),
    BlowDown(String),
    BlowUp {
        label: String,
        on: Vec<(String, u32)>,
    },
    Canonical,
    /// Contract to P^2 in this order, reporting every tracked ledger.
    PlaneReport(Vec<String>),
    Maltese {
        a: String,
        b: String,
        c: String,
        f: String,
    },
    Nef,
    Greedy {
        reverse: bool,
    },
    Expect(Expectation),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub k2: i64,
    pub euler: i64,
    pub curves: Vec<CurveDecl>,
    pub intersections: Vec<Meet>,
    pub build: Vec<BuildOp>,
    pub marks: Vec<Vec<String>>,
    pub ledgers: Vec<LedgerSeed>,
    pub script: Vec<Directive>,
    pub expect: Vec<Expectation>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    None,
    Scenario,
    Ambient,
    Curves,
    Intersections,
    Build,
    Marks,
    Ledger(usize),
    Script,
    Expect,
}

fn label_ok(s: &str) -> bool {
    !s.is_empty()
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'' || c == '.')
        && !s.starts_with(|c: char| c.is_ascii_digit() || c == '-')
}

fn parse_on(words: &[&str]) -> Result<Vec<(String, u32)>, String> {
    words
        .iter()
        .map(|w| {
            let (l, m) = w.split_once(':').unwrap_or((w, "1"));
            let m: u32 = m
                .parse()
                .map_err(|_| format!("bad multiplicity in '{w}'"))?;
            if !label_ok(l) || m == 0 {
                return Err(format!("bad point entry '{w}'"));
            }
            Ok((l.to_string(), m))
        })
        .collect()
}

fn parse_blow_up(words: &[&str]) -> Result<(String, Vec<(String, u32)>), String> {
    // blow_up NEW on A:1 B:2
    match words {
        [label, "on", rest @ ..] if label_ok(label) && !rest.is_empty() => {
            Ok((label.to_string(), parse_on(rest)?))
        }
        _ => Err("expected 'blow_up NEW on LABEL[:MULT] ...'".into()),
    }
}

fn one_label(verb: &str, rest: &[&str]) -> Result<String, String> {
    match rest {
        [l] if label_ok(l) => Ok(l.to_string()),
        _ => Err(format!("'{verb}' takes exactly one curve label")),
    }
}

fn parse_directive(line: &str) -> Result<Directive, String> {
    let words: Vec<&str> = line.split_whitespace().collect();
    let (verb, rest) = words.split_first().ok_or("empty directive")?;
    Ok(match *verb {
        "resolve" => Directive::Resolve(one_label(verb, rest)?),
        "track" => Directive::Track(one_label(verb, rest)?),
        "flip" => Directive::Flip(one_label(verb, rest)?),
        "blow_down" => Directive::BlowDown(one_label(verb, rest)?),
        "blow_up" => {
            let (label, on) = parse_blow_up(rest)?;
            Directive::BlowUp { label, on }
        }
        "canonical" if rest.is_empty() => Directive::Canonical,
        "nef" if rest.is_empty() => Directive::Nef,
        "greedy" => match rest {
            [] => Directive::Greedy { reverse: false },
            ["reverse"] => Directive::Greedy { reverse: true },
            _ => return Err("expected 'greedy' or 'greedy reverse'".into()),
        },
        "plane_report" => {
            if rest.is_empty() || !rest.iter().all(|l| label_ok(l)) {
                return Err("'plane_report' takes a list of curve labels".into());
            }
            Directive::PlaneReport(rest.iter().map(|s| s.to_string()).collect())
        }
        "maltese" => match rest {
            [a, b, c, f] if [a, b, c, f].iter().all(|l| label_ok(l)) => Directive::Maltese {
                a: a.to_string(),
                b: b.to_string(),
                c: c.to_string(),
                f: f.to_string(),
            },
            _ => return Err("expected 'maltese A B C F'".into()),
        },
        "expect" => Directive::Expect(line.trim_start()["expect".len()..].trim().parse()?),
        other => return Err(format!("unknown directive '{other}'")),
    })
}

fn ledger_header(h: &str) -> Result<(String, i64), String> {
    // "ledger NAME" or "ledger NAME genus=g"
    let words: Vec<&str> = h.split_whitespace().collect();
    match words.as_slice() {
        ["ledger", name] if label_ok(name) => Ok((name.to_string(), 0)),
        ["ledger", name, g] if label_ok(name) => {
            let g = g
                .strip_prefix("genus=")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| format!("bad ledger attribute '{g}'"))?;
            Ok((name.to_string(), g))
        }
        _ => Err(format!("bad section header '[{h}]'")),
    }
}

fn key_value(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    Some((k.trim(), v.trim()))
}

/// Parses and checks label references; geometric validation happens when the
/// model is built.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<ParseError>> {
    let mut s = Scenario {
        name: String::new(),
        k2: 0,
        euler: 0,
        curves: Vec::new(),
        intersections: Vec::new(),
        build: Vec::new(),
        marks: Vec::new(),
        ledgers: Vec::new(),
        script: Vec::new(),
        expect: Vec::new(),
    };
    let mut errors = Vec::new();
    let mut section = Section::None;
    let mut seen_ambient = (false, false);
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut err = |msg: String| {
            errors.push(ParseError {
                line: line_no,
                message: msg,
            })
        };
        if let Some(h) = line.strip_prefix('[') {
            let Some(h) = h.strip_suffix(']') else {
                err(format!("unterminated section header '{line}'"));
                continue;
            };
            section = match h.trim() {
                "scenario" => Section::Scenario,
                "ambient" => Section::Ambient,
                "curves" => Section::Curves,
                "intersections" => Section::Intersections,
                "build" => Section::Build,
                "marks" => Section::Marks,
                "script" => Section::Script,
                "expect" => Section::Expect,
                other if other.starts_with("ledger") => match ledger_header(other) {
                    Ok((name, genus)) => {
                        if s.ledgers.iter().any(|l| l.name == name) {
                            err(format!("duplicate ledger '{name}'"));
                        }
                        s.ledgers.push(LedgerSeed {
                            name,
                            genus,
                            terms: Vec::new(),
                        });
                        Section::Ledger(s.ledgers.len() - 1)
                    }
                    Err(e) => {
                        err(e);
                        Section::None
                    }
                },
                other => {
                    err(format!("unknown section '[{other}]'"));
                    Section::None
                }
            };
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        match section {
            Section::None => err("content outside any section".into()),
            Section::Scenario => match key_value(line) {
                Some(("name", v)) if !v.is_empty() => s.name = v.to_string(),
                _ => err(format!("expected 'name = ...', got '{line}'")),
            },
            Section::Ambient => match key_value(line).map(|(k, v)| (k, v.parse::<i64>())) {
                Some(("k2", Ok(v))) => {
                    s.k2 = v;
                    seen_ambient.0 = true;
                }
                Some(("euler", Ok(v))) => {
                    s.euler = v;
                    seen_ambient.1 = true;
                }
                _ => err(format!("expected 'k2 = N' or 'euler = N', got '{line}'")),
            },
            Section::Curves => {
                let parsed = match words.as_slice() {
                    [l, si] => si.parse().ok().map(|si| (l, si, 0)),
                    [l, si, g] => si
                        .parse()
                        .ok()
                        .zip(g.parse().ok())
                        .map(|(si, g)| (l, si, g)),
                    _ => None,
                };
                match parsed {
                    Some((l, self_int, genus)) if label_ok(l) => {
                        if s.curves.iter().any(|c| c.label == *l) {
                            err(format!("duplicate curve label '{l}'"));
                        } else {
                            s.curves.push(CurveDecl {
                                label: l.to_string(),
                                self_int,
                                genus,
                            });
                        }
                    }
                    _ => err(format!("expected 'LABEL SELF_INT [GENUS]', got '{line}'")),
                }
            }
            Section::Intersections => match words.as_slice() {
                [a, b] | [a, b, _] if a == b => err(format!("curve '{a}' listed against itself")),
                [a, b] => s.intersections.push(Meet {
                    a: a.to_string(),
                    b: b.to_string(),
                    mult: 1,
                }),
                [a, b, m] => match m.parse() {
                    Ok(mult) => s.intersections.push(Meet {
                        a: a.to_string(),
                        b: b.to_string(),
                        mult,
                    }),
                    Err(_) => err(format!("bad multiplicity '{m}'")),
                },
                _ => err(format!("expected 'A B [MULT]', got '{line}'")),
            },
            Section::Build => match words.split_first() {
                Some((&"blow_up", rest)) => match parse_blow_up(rest) {
                    Ok((label, on)) => s.build.push(BuildOp::BlowUp { label, on }),
                    Err(e) => err(e),
                },
                Some((&"blow_down", rest)) => match one_label("blow_down", rest) {
                    Ok(l) => s.build.push(BuildOp::BlowDown(l)),
                    Err(e) => err(e),
                },
                _ => err(format!("expected 'blow_up' or 'blow_down', got '{line}'")),
            },
            Section::Marks => {
                if words.iter().all(|w| label_ok(w)) {
                    s.marks.push(words.iter().map(|w| w.to_string()).collect());
                } else {
                    err(format!("bad mark line '{line}'"));
                }
            }
            Section::Ledger(i) => match words.as_slice() {
                [l, a] if label_ok(l) => match a.parse() {
                    Ok(a) => s.ledgers[i].terms.push((l.to_string(), a)),
                    Err(_) => err(format!("bad coefficient '{a}'")),
                },
                [l] if label_ok(l) => s.ledgers[i].terms.push((l.to_string(), 1)),
                _ => err(format!("expected 'LABEL [ALPHA]', got '{line}'")),
            },
            Section::Script => match parse_directive(line) {
                Ok(d) => s.script.push(d),
                Err(e) => err(e),
            },
            Section::Expect => match line.parse() {
                Ok(e) => s.expect.push(e),
                Err(e) => err(e),
            },
        }
    }
    if !seen_ambient.0 || !seen_ambient.1 {
        errors.push(ParseError {
            line: 0,
            message: "[ambient] needs both k2 and euler".into(),
        });
    }
    if errors.is_empty() {
        errors.extend(check_references(&s, text));
    }
    if errors.is_empty() {
        Ok(s)
    } else {
        Err(errors)
    }
}

/// First line mentioning `word` as a whole token, for positioning errors.
fn locate(text: &str, word: &str) -> usize {
    text.lines()
        .position(|l| {
            l.split('#')
                .next()
                .unwrap_or("")
                .split(|c: char| c.is_whitespace() || c == ':' || c == '(' || c == ')' || c == ',')
                .any(|w| w == word)
        })
        .map_or(0, |i| i + 1)
}

fn check_references(s: &Scenario, text: &str) -> Vec<ParseError> {
    let mut errors = Vec::new();
    let mut known: BTreeSet<String> = s.curves.iter().map(|c| c.label.clone()).collect();
    let missing = |l: &str, known: &BTreeSet<String>, errors: &mut Vec<ParseError>| {
        if !known.contains(l) {
            errors.push(ParseError {
                line: locate(text, l),
                message: format!("unknown curve '{l}'"),
            });
        }
    };
    for m in &s.intersections {
        missing(&m.a, &known, &mut errors);
        missing(&m.b, &known, &mut errors);
    }
    let introduce = |l: &str, known: &mut BTreeSet<String>, errors: &mut Vec<ParseError>| {
        if !known.insert(l.to_string()) {
            errors.push(ParseError {
                line: locate(text, l),
                message: format!("duplicate curve label '{l}'"),
            });
        }
    };
    for op in &s.build {
        match op {
            BuildOp::BlowUp { label, on } => {
                for (c, _) in on {
                    missing(c, &known, &mut errors);
                }
                introduce(label, &mut known, &mut errors);
            }
            BuildOp::BlowDown(l) => missing(l, &known, &mut errors),
        }
    }
    for mk in &s.marks {
        for l in mk {
            missing(l, &known, &mut errors);
        }
    }
    for seed in &s.ledgers {
        for (l, a) in &seed.terms {
            missing(l, &known, &mut errors);
            if *a < 0 {
                errors.push(ParseError {
                    line: locate(text, l),
                    message: format!("negative coefficient {a} on '{l}'"),
                });
            }
        }
    }
    let ledger_names: BTreeSet<&str> = s.ledgers.iter().map(|l| l.name.as_str()).collect();
    for d in &s.script {
        match d {
            Directive::Resolve(l) | Directive::Flip(l) | Directive::BlowDown(l) => {
                missing(l, &known, &mut errors)
            }
            Directive::Track(n) => {
                if !ledger_names.contains(n.as_str()) {
                    errors.push(ParseError {
                        line: locate(text, n),
                        message: format!("unknown ledger '{n}'"),
                    });
                }
            }
            Directive::BlowUp { label, on } => {
                for (c, _) in on {
                    missing(c, &known, &mut errors);
                }
                introduce(label, &mut known, &mut errors);
            }
            Directive::PlaneReport(ls) => {
                for l in ls {
                    missing(l, &known, &mut errors);
                }
            }
            Directive::Maltese { a, b, c, f } => {
                for l in [a, b, c, f] {
                    missing(l, &known, &mut errors);
                }
            }
            Directive::Canonical
            | Directive::Nef
            | Directive::Greedy { .. }
            | Directive::Expect(_) => {}
        }
    }
    errors
}

fn write_on(f: &mut fmt::Formatter<'_>, on: &[(String, u32)]) -> fmt::Result {
    for (c, m) in on {
        write!(f, " {c}:{m}")?;
    }
    Ok(())
}

impl fmt::Display for Directive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Directive::Resolve(l) => write!(f, "resolve {l}"),
            Directive::Track(n) => write!(f, "track {n}"),
            Directive::Flip(l) => write!(f, "flip {l}"),
            Directive::BlowDown(l) => write!(f, "blow_down {l}"),
            Directive::BlowUp { label, on } => {
                write!(f, "blow_up {label} on")?;
                write_on(f, on)
            }
            Directive::Canonical => f.write_str("canonical"),
            Directive::PlaneReport(ls) => write!(f, "plane_report {}", ls.join(" ")),
            Directive::Maltese { a, b, c, f: fl } => write!(f, "maltese {a} {b} {c} {fl}"),
            Directive::Nef => f.write_str("nef"),
            Directive::Greedy { reverse } => {
                f.write_str(if *reverse { "greedy reverse" } else { "greedy" })
            }
            Directive::Expect(e) => write!(f, "expect {e}"),
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.name.is_empty() {
            writeln!(f, "[scenario]\nname = {}\n", self.name)?;
        }
        writeln!(f, "[ambient]\nk2 = {}\neuler = {}", self.k2, self.euler)?;
        if !self.curves.is_empty() {
            writeln!(f, "\n[curves]")?;
            for c in &self.curves {
                if c.genus == 0 {
                    writeln!(f, "{} {}", c.label, c.self_int)?;
                } else {
                    writeln!(f, "{} {} {}", c.label, c.self_int, c.genus)?;
                }
            }
        }
        if !self.intersections.is_empty() {
            writeln!(f, "\n[intersections]")?;
            for m in &self.intersections {
                writeln!(f, "{} {} {}", m.a, m.b, m.mult)?;
            }
        }
        if !self.build.is_empty() {
            writeln!(f, "\n[build]")?;
            for op in &self.build {
                match op {
                    BuildOp::BlowUp { label, on } => {
                        write!(f, "blow_up {label} on")?;
                        write_on(f, on)?;
                        writeln!(f)?;
                    }
                    BuildOp::BlowDown(l) => writeln!(f, "blow_down {l}")?,
                }
            }
        }
        if !self.marks.is_empty() {
            writeln!(f, "\n[marks]")?;
            for mk in &self.marks {
                writeln!(f, "{}", mk.join(" "))?;
            }
        }
        for l in &self.ledgers {
            writeln!(f, "\n[ledger {} genus={}]", l.name, l.genus)?;
            for (c, a) in &l.terms {
                writeln!(f, "{c} {a}")?;
            }
        }
        if !self.script.is_empty() {
            writeln!(f, "\n[script]")?;
            for d in &self.script {
                writeln!(f, "{d}")?;
            }
        }
        if !self.expect.is_empty() {
            writeln!(f, "\n[expect]")?;
            for e in &self.expect {
                writeln!(f, "{e}")?;
            }
        }
        Ok(())
    }
}
