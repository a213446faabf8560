//! CPLEX-style LP text for [`MilpInstance`].
//!
//! Every variable is written in the `Bounds` section in index order, which is
//! how the reader recovers the variable order. Branching priorities are not
//! represented and read back as 0.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::instance::{MilpInstance, Relation, Variable};
use crate::error::{Error, Result};

fn write_terms(out: &mut String, inst: &MilpInstance, terms: &[(usize, f64)]) {
    if terms.is_empty() {
        out.push_str(" 0");
        return;
    }
    for &(j, a) in terms {
        let sign = if a < 0.0 || (a == 0.0 && a.is_sign_negative()) {
            '-'
        } else {
            '+'
        };
        let _ = write!(out, " {sign} {:?} {}", a.abs(), inst.variables[j].name);
    }
}

pub fn to_lp_string(inst: &MilpInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "\\ {}", inst.name);
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, inst, &inst.objective);
    if inst.objective_offset != 0.0 {
        let sign = if inst.objective_offset < 0.0 {
            '-'
        } else {
            '+'
        };
        let _ = write!(out, " {sign} {:?}", inst.objective_offset.abs());
    }
    out.push_str("\nSubject To\n");
    for c in &inst.constraints {
        let _ = write!(out, " {}:", c.name);
        write_terms(&mut out, inst, &c.coeffs);
        let _ = writeln!(out, " {} {:?}", c.relation.symbol(), c.rhs);
    }
    out.push_str("Bounds\n");
    for v in &inst.variables {
        let _ = writeln!(out, " {:?} <= {} <= {:?}", v.lower, v.name, v.upper);
    }
    let bins: Vec<&str> = inst
        .variables
        .iter()
        .filter(|v| v.binary)
        .map(|v| v.name.as_str())
        .collect();
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for b in bins {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Head,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    End,
}

struct Tok<'a> {
    text: &'a str,
    line: usize,
}

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::LpParse {
        line,
        msg: msg.into(),
    }
}

fn parse_num(t: &Tok) -> Option<f64> {
    match t.text.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => Some(f64::INFINITY),
        "-inf" | "-infinity" => Some(f64::NEG_INFINITY),
        s => s.parse().ok(),
    }
}

fn is_relation(s: &str) -> Option<Relation> {
    match s {
        "<=" | "=<" | "<" => Some(Relation::Le),
        ">=" | "=>" | ">" => Some(Relation::Ge),
        "=" => Some(Relation::Eq),
        _ => None,
    }
}

/// Linear expression `[+|-] [coef] name ...` starting at `toks[*k]`, stopping
/// at a relation symbol or the end. Bare numbers are returned as a constant.
fn parse_expr<'a>(toks: &[Tok<'a>], k: &mut usize) -> Result<(Vec<(&'a str, f64)>, f64)> {
    let mut terms = Vec::new();
    let mut constant = 0.0;
    while *k < toks.len() && is_relation(toks[*k].text).is_none() {
        let mut sign = 1.0;
        while *k < toks.len() && (toks[*k].text == "+" || toks[*k].text == "-") {
            if toks[*k].text == "-" {
                sign = -sign;
            }
            *k += 1;
        }
        let Some(t) = toks.get(*k) else {
            return Err(err(toks.last().map_or(0, |t| t.line), "dangling sign"));
        };
        if let Some(c) = parse_num(t) {
            *k += 1;
            match toks.get(*k) {
                Some(n)
                    if is_relation(n.text).is_none()
                        && parse_num(n).is_none()
                        && n.text != "+"
                        && n.text != "-" =>
                {
                    terms.push((n.text, sign * c));
                    *k += 1;
                }
                _ => constant += sign * c,
            }
        } else {
            terms.push((t.text, sign));
            *k += 1;
        }
    }
    Ok((terms, constant))
}

pub fn from_lp_str(text: &str) -> Result<MilpInstance> {
    let mut name = String::from("lp");
    let mut section = Section::Head;
    let mut sections: Vec<(Section, Vec<(String, usize)>)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = ln + 1;
        let body = match raw.find('\\') {
            Some(p) => {
                if ln == 0 && p == 0 {
                    name = raw[1..].trim().to_string();
                }
                &raw[..p]
            }
            None => raw,
        };
        let lower = body.trim().to_ascii_lowercase();
        let next = match lower.as_str() {
            "minimize" | "minimise" | "min" => Some(Section::Objective),
            "maximize" | "maximise" | "max" => {
                return Err(err(line, "only minimization is supported"))
            }
            "subject to" | "such that" | "st" | "s.t." => Some(Section::Constraints),
            "bounds" | "bound" => Some(Section::Bounds),
            "binaries" | "binary" | "bin" => Some(Section::Binaries),
            "end" => Some(Section::End),
            "general" | "generals" | "gen" => {
                return Err(err(line, "general integers are not supported"))
            }
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            sections.push((s, Vec::new()));
            continue;
        }
        if body.trim().is_empty() {
            continue;
        }
        if section == Section::Head || section == Section::End {
            return Err(err(line, format!("unexpected text {:?}", body.trim())));
        }
        let toks = &mut sections.last_mut().expect("inside a section").1;
        // split "name:" prefixes and glued operators
        let spaced = body
            .replace("<=", " <= ")
            .replace(">=", " >= ")
            .replace(':', ": ");
        for w in spaced.split_whitespace() {
            toks.push((w.to_string(), line));
        }
    }
    let views: Vec<(Section, Vec<Tok>)> = sections
        .iter()
        .map(|(s, t)| {
            (
                *s,
                t.iter()
                    .map(|(x, l)| Tok {
                        text: x.as_str(),
                        line: *l,
                    })
                    .collect(),
            )
        })
        .collect();

    let mut objective: Vec<(String, f64)> = Vec::new();
    let mut offset = 0.0;
    let mut rows: Vec<(String, Vec<(String, f64)>, Relation, f64)> = Vec::new();
    let mut bounds: Vec<(String, f64, f64, usize)> = Vec::new();
    let mut binaries: Vec<String> = Vec::new();
    let mut seen_order: Vec<String> = Vec::new();
    let note = |n: &str, seen: &mut Vec<String>| {
        if !seen.iter().any(|s| s == n) {
            seen.push(n.to_string());
        }
    };

    for (sec, toks) in &views {
        let mut k = 0;
        match sec {
            Section::Objective => {
                if toks.first().is_some_and(|t| t.text.ends_with(':')) {
                    k = 1;
                }
                let (terms, c) = parse_expr(toks, &mut k)?;
                if k != toks.len() {
                    return Err(err(toks[k].line, "relation in objective"));
                }
                for (n, a) in terms {
                    note(n, &mut seen_order);
                    objective.push((n.to_string(), a));
                }
                offset += c;
            }
            Section::Constraints => {
                while k < toks.len() {
                    let line = toks[k].line;
                    let rname = if toks[k].text.ends_with(':') {
                        k += 1;
                        toks[k - 1].text.trim_end_matches(':').to_string()
                    } else {
                        format!("c{}", rows.len())
                    };
                    let (terms, c) = parse_expr(toks, &mut k)?;
                    let rel = toks
                        .get(k)
                        .and_then(|t| is_relation(t.text))
                        .ok_or_else(|| err(line, "constraint without relation"))?;
                    k += 1;
                    let rhs_tok = toks
                        .get(k)
                        .ok_or_else(|| err(line, "missing right-hand side"))?;
                    let mut sign = 1.0;
                    let mut rt = rhs_tok;
                    if rt.text == "-" || rt.text == "+" {
                        if rt.text == "-" {
                            sign = -1.0;
                        }
                        k += 1;
                        rt = toks
                            .get(k)
                            .ok_or_else(|| err(line, "missing right-hand side"))?;
                    }
                    let rhs = parse_num(rt).ok_or_else(|| err(rt.line, "bad right-hand side"))?;
                    k += 1;
                    let mut coeffs = Vec::new();
                    for (n, a) in terms {
                        note(n, &mut seen_order);
                        coeffs.push((n.to_string(), a));
                    }
                    rows.push((rname, coeffs, rel, sign * rhs - c));
                }
            }
            Section::Bounds => {
                // one bound statement per line
                let mut by_line: Vec<Vec<&Tok>> = Vec::new();
                for t in toks {
                    match by_line.last() {
                        Some(v) if v[0].line == t.line => by_line.last_mut().unwrap().push(t),
                        _ => by_line.push(vec![t]),
                    }
                }
                for st in by_line {
                    let line = st[0].line;
                    let words: Vec<&str> = st.iter().map(|t| t.text).collect();
                    let num = |s: &str| {
                        parse_num(&Tok { text: s, line })
                            .ok_or_else(|| err(line, format!("bad number {s}")))
                    };
                    let (var, lo, hi) = match words.as_slice() {
                        [l, "<=", v, "<=", h] => (*v, Some(num(l)?), Some(num(h)?)),
                        [v, "free"] | [v, "Free"] | [v, "FREE"] => {
                            (*v, Some(f64::NEG_INFINITY), Some(f64::INFINITY))
                        }
                        [v, "=", x] => (*v, Some(num(x)?), Some(num(x)?)),
                        [v, ">=", x] => (*v, Some(num(x)?), None),
                        [v, "<=", x] => (*v, None, Some(num(x)?)),
                        _ => {
                            return Err(err(
                                line,
                                format!("cannot read bound {:?}", words.join(" ")),
                            ))
                        }
                    };
                    let (cur_lo, cur_hi) = bounds
                        .iter()
                        .find(|b| b.0 == var)
                        .map_or((0.0, f64::INFINITY), |b| (b.1, b.2));
                    bounds.retain(|b| b.0 != var);
                    bounds.push((
                        var.to_string(),
                        lo.unwrap_or(cur_lo),
                        hi.unwrap_or(cur_hi),
                        line,
                    ));
                }
            }
            Section::Binaries => {
                for t in toks {
                    binaries.push(t.text.to_string());
                }
            }
            Section::Head | Section::End => {}
        }
    }

    let mut order: Vec<String> = bounds.iter().map(|b| b.0.clone()).collect();
    for n in seen_order.into_iter().chain(binaries.iter().cloned()) {
        if !order.contains(&n) {
            order.push(n);
        }
    }
    let index: HashMap<&str, usize> = order
        .iter()
        .enumerate()
        .map(|(k, n)| (n.as_str(), k))
        .collect();
    let mut inst = MilpInstance::new(name);
    for n in &order {
        let b = bounds.iter().find(|b| &b.0 == n);
        let binary = binaries.contains(n);
        let (lo, hi) = match b {
            Some(b) => (b.1, b.2),
            None if binary => (0.0, 1.0),
            None => (0.0, f64::INFINITY),
        };
        inst.variables.push(Variable {
            name: n.clone(),
            lower: lo,
            upper: hi,
            binary,
            branch_priority: 0,
        });
    }
    inst.objective = merge(objective.iter().map(|(n, a)| (index[n.as_str()], *a)));
    inst.objective_offset = offset;
    for (rname, coeffs, rel, rhs) in rows {
        let c = merge(coeffs.iter().map(|(n, a)| (index[n.as_str()], *a)));
        inst.add_constraint(rname, c, rel, rhs);
    }
    Ok(inst)
}

/// Drops explicit zero terms produced for empty expressions.
fn merge(terms: impl Iterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    terms.filter(|&(_, a)| a != 0.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::instance::Relation;

    fn sample() -> MilpInstance {
        let mut p = MilpInstance::new("sample");
        let x = p.add_continuous("x", 0.0, 10.0);
        let y = p.add_continuous("y", -2.5, 3.0);
        let b = p.add_binary("b");
        p.add_constraint(
            "r1",
            vec![(x, 1.0), (y, -0.1), (b, 3.0)],
            Relation::Le,
            7.25,
        );
        p.add_constraint("r2", vec![(x, 1.0 / 3.0), (b, -1e-9)], Relation::Ge, -1.0);
        p.add_constraint("r3", vec![(y, 2.0)], Relation::Eq, 1.0);
        p.set_objective(vec![(x, 2.0), (b, -4.0)]);
        p.objective_offset = 1.5;
        p
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        let text = to_lp_string(&p);
        let back = from_lp_str(&text).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn reads_hand_written_text() {
        let text = "Minimize\n obj: x + 2 y\nSubject To\n c: x + y >= 1\n d: x - y <= 0.5\nBounds\n x <= 4\n 0 <= y <= 4\nEnd\n";
        let p = from_lp_str(text).unwrap();
        assert_eq!(p.n_vars(), 2);
        assert_eq!(p.variables[0].name, "x");
        assert_eq!(p.variables[0].upper, 4.0);
        assert_eq!(p.constraints[1].coeffs, vec![(0, 1.0), (1, -1.0)]);
    }

    #[test]
    fn reports_line_numbers() {
        let text = "Minimize\n obj: x\nSubject To\n c: x + y\nEnd\n";
        match from_lp_str(text) {
            Err(Error::LpParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }
}
