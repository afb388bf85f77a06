//! Text export of the pseudo-MUB program in CPLEX-style LP format.
//!
//! The grammar is documented in `docs/lp_format.md`. Numbers are written with
//! 17 significant digits, so [`parse_lp`] recovers the exported matrix bit
//! for bit.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use crate::lp::{LpError, LpProblem, WEIGHT_UPPER};
use crate::numfmt::fmt17;

const TERMS_PER_LINE: usize = 4;

/// A problem `maximize cᵀf subject to A f >= rhs, lower <= f <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpText {
    pub objective: Vec<f64>,
    pub constraint_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LpText {
    /// The full program: every nonzero character orbit as one row.
    pub fn from_problem(p: &LpProblem) -> LpText {
        let n = p.variables();
        let rows: Vec<Vec<f64>> = p.characters.par_iter().map(|&g| p.row(g)).collect();
        LpText {
            objective: p.objective(),
            constraint_names: (0..rows.len()).map(|i| format!("c_{i}")).collect(),
            rhs: vec![-1.0; rows.len()],
            rows,
            lower: vec![0.0; n],
            upper: vec![WEIGHT_UPPER; n],
        }
    }

    pub fn variables(&self) -> usize {
        self.objective.len()
    }
}

fn push_terms(out: &mut String, coeffs: &[f64]) {
    let mut written = 0;
    for (j, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        if written > 0 && written % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c.is_sign_negative() { '-' } else { '+' };
        let _ = write!(out, " {sign} {} f_{j}", fmt17(c.abs()));
        written += 1;
    }
    if written == 0 {
        let _ = write!(out, " + {} f_0", fmt17(0.0));
    }
}

/// Writes the program with a header describing the grid and the objective shift.
pub fn write_lp<W: Write>(p: &LpProblem, mut w: W) -> Result<(), LpError> {
    let t = LpText::from_problem(p);
    let mut out = String::new();
    let _ = writeln!(out, "\\ Pseudo-MUB program: d = {}, m = {}, symmetry = {:?}", p.d, p.m, p.orbits.symmetry);
    out.push_str("\\ Objective is the shifted total M - 1 (f(0) = 1 is fixed): M = obj + 1.\n");
    out.push_str("\\ Variable f_k is the common value of f on orbit k, written as its representative.\n");
    for (k, o) in p.orbits.orbits.iter().enumerate() {
        let _ = writeln!(out, "\\ f_{k}: {:?} size {} {}", p.orbits.numerators(o.representative), o.len(), o.class.label());
    }
    out.push_str("Maximize\n obj:");
    push_terms(&mut out, &t.objective);
    out.push_str("\nSubject To\n");
    for (i, (&g, row)) in p.characters.iter().zip(&t.rows).enumerate() {
        let _ = writeln!(out, "\\ gamma {:?}", p.orbits.numerators(g));
        let _ = write!(out, " {}:", t.constraint_names[i]);
        push_terms(&mut out, row);
        let _ = writeln!(out, " >= {}", fmt17(t.rhs[i]));
    }
    out.push_str("Bounds\n");
    for j in 0..t.variables() {
        let _ = writeln!(out, " {} <= f_{j} <= {}", fmt17(t.lower[j]), fmt17(t.upper[j]));
    }
    out.push_str("End\n");
    w.write_all(out.as_bytes())?;
    Ok(())
}

pub fn export_lp(p: &LpProblem, path: &Path) -> Result<(), LpError> {
    let mut buf = Vec::new();
    write_lp(p, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Bounds,
    End,
}

struct Tokens {
    items: Vec<(usize, String)>,
    pos: usize,
}

impl Tokens {
    fn peek(&self) -> Option<&str> {
        self.items.get(self.pos).map(|(_, s)| s.as_str())
    }

    fn line(&self) -> usize {
        self.items.get(self.pos).or(self.items.last()).map_or(0, |(l, _)| *l)
    }

    fn next(&mut self) -> Result<String, LpError> {
        let t = self.items.get(self.pos).map(|(_, s)| s.clone());
        self.pos += 1;
        t.ok_or_else(|| LpError::Parse { line: self.line(), msg: "unexpected end of section".into() })
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, LpError> {
        Err(LpError::Parse { line: self.line(), msg: msg.into() })
    }

    fn number(&mut self) -> Result<f64, LpError> {
        let t = self.next()?;
        t.parse::<f64>().or_else(|_| self.err(format!("expected a number, found {t:?}")))
    }

    fn variable(&mut self) -> Result<usize, LpError> {
        let t = self.next()?;
        match t.strip_prefix("f_").and_then(|k| k.parse::<usize>().ok()) {
            Some(k) => Ok(k),
            None => self.err(format!("expected a variable f_<k>, found {t:?}")),
        }
    }

    /// `(+|-) coeff var` terms up to the next token that is not a sign.
    fn terms(&mut self) -> Result<Vec<(usize, f64)>, LpError> {
        let mut v = Vec::new();
        while let Some(sign @ ("+" | "-")) = self.peek() {
            let neg = sign == "-";
            self.pos += 1;
            let c = self.number()?;
            let k = self.variable()?;
            v.push((k, if neg { -c } else { c }));
        }
        Ok(v)
    }

    fn label(&mut self) -> Result<String, LpError> {
        let t = self.next()?;
        match t.strip_suffix(':') {
            Some(name) if !name.is_empty() => Ok(name.to_string()),
            _ => self.err(format!("expected a label, found {t:?}")),
        }
    }
}

fn dense(terms: &[(usize, f64)], n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    for &(k, c) in terms {
        v[k] += c;
    }
    v
}

/// Parses the format written by [`write_lp`].
pub fn parse_lp(text: &str) -> Result<LpText, LpError> {
    let mut sections: Vec<(Section, Tokens)> = Vec::new();
    let mut current = Section::Preamble;
    let mut items = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('\\').next().unwrap_or("").trim();
        let next = match line.to_ascii_lowercase().as_str() {
            "maximize" => Some(Section::Objective),
            "subject to" => Some(Section::Constraints),
            "bounds" => Some(Section::Bounds),
            "end" => Some(Section::End),
            _ => None,
        };
        match next {
            Some(s) => {
                sections.push((current, Tokens { items: std::mem::take(&mut items), pos: 0 }));
                current = s;
            }
            None => items.extend(line.split_whitespace().map(|t| (no + 1, t.to_string()))),
        }
    }
    sections.push((current, Tokens { items, pos: 0 }));
    let order: Vec<Section> = sections.iter().map(|(s, _)| *s).collect();
    let expected = [Section::Preamble, Section::Objective, Section::Constraints, Section::Bounds, Section::End];
    if order != expected {
        return Err(LpError::Parse { line: 0, msg: "expected Maximize, Subject To, Bounds and End sections".into() });
    }
    for (s, t) in &sections {
        if matches!(s, Section::Preamble | Section::End) && !t.items.is_empty() {
            return t.err("content outside of a section");
        }
    }
    let mut it = sections.into_iter().map(|(_, t)| t).skip(1);
    let mut obj = it.next().expect("five sections");
    let mut con = it.next().expect("five sections");
    let mut bnd = it.next().expect("five sections");

    obj.label()?;
    let obj_terms = obj.terms()?;
    if obj.peek().is_some() {
        return obj.err("trailing tokens in objective");
    }

    let mut raw_rows = Vec::new();
    while con.peek().is_some() {
        let name = con.label()?;
        let terms = con.terms()?;
        if con.next()? != ">=" {
            return con.err("expected >=");
        }
        raw_rows.push((name, terms, con.number()?));
    }

    let mut raw_bounds = Vec::new();
    while bnd.peek().is_some() {
        let lo = bnd.number()?;
        if bnd.next()? != "<=" {
            return bnd.err("expected <=");
        }
        let k = bnd.variable()?;
        if bnd.next()? != "<=" {
            return bnd.err("expected <=");
        }
        raw_bounds.push((k, lo, bnd.number()?));
    }

    let n = obj_terms
        .iter()
        .map(|t| t.0 + 1)
        .chain(raw_rows.iter().flat_map(|r| r.1.iter().map(|t| t.0 + 1)))
        .chain(raw_bounds.iter().map(|b| b.0 + 1))
        .max()
        .unwrap_or(0);
    let mut lower = vec![0.0; n];
    let mut upper = vec![f64::INFINITY; n];
    for (k, lo, hi) in raw_bounds {
        lower[k] = lo;
        upper[k] = hi;
    }
    let mut t = LpText {
        objective: dense(&obj_terms, n),
        constraint_names: Vec::new(),
        rows: Vec::new(),
        rhs: Vec::new(),
        lower,
        upper,
    };
    for (name, terms, rhs) in raw_rows {
        t.constraint_names.push(name);
        t.rows.push(dense(&terms, n));
        t.rhs.push(rhs);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{build_orbits, build_pseudo_mub_lp, Symmetry};
    use crate::simplex::{self, DenseLp};
    use crate::torus::DEFAULT_GRID_BUDGET;

    fn problem(d: usize, m: u32) -> LpProblem {
        build_pseudo_mub_lp(build_orbits(d, m, Symmetry::default(), DEFAULT_GRID_BUDGET).unwrap())
    }

    fn export(p: &LpProblem) -> String {
        let mut buf = Vec::new();
        write_lp(p, &mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    #[test]
    fn smallest_problem() {
        let text = export(&problem(2, 2));
        let t = parse_lp(&text).unwrap();
        assert_eq!(t.variables(), 1);
        assert_eq!(t.rows, vec![vec![-1.0]]);
        assert!(text.contains(" c_0: - 1.0000000000000000e0 f_0 >= -1.0000000000000000e0"));
        assert!(text.contains("M = obj + 1"));
    }

    #[test]
    fn round_trip_is_exact() {
        for (d, m) in [(3, 3), (4, 6), (5, 5)] {
            let p = problem(d, m);
            let parsed = parse_lp(&export(&p)).unwrap();
            assert_eq!(parsed, LpText::from_problem(&p));
        }
    }

    #[test]
    fn exported_problem_solves_to_shifted_optimum() {
        let t = parse_lp(&export(&problem(3, 3))).unwrap();
        // Negate the >= rows into the <= form of the simplex.
        let lp = DenseLp {
            rows: t.rows.len(),
            columns: (0..t.variables()).map(|j| t.rows.iter().map(|r| -r[j]).collect()).collect(),
            rhs: t.rhs.iter().map(|b| -b).collect(),
            cost: t.objective.clone(),
            upper: t.upper.clone(),
        };
        let s = simplex::solve(&lp, 1000).unwrap();
        assert!((s.objective - 8.0).abs() < 1e-9);
    }

    #[test]
    fn parse_errors() {
        assert!(parse_lp("Maximize\n obj: + 1 f_0\nEnd\n").is_err());
        let bad = "Maximize\n obj: + 1 f_0\nSubject To\n c_0: + 1 f_0 <= 1\nBounds\nEnd\n";
        assert!(matches!(parse_lp(bad), Err(LpError::Parse { line: 4, .. })));
        let bad = "Maximize\n obj: + x f_0\nSubject To\nBounds\nEnd\n";
        assert!(parse_lp(bad).is_err());
        let ok = "\\ comment\nMaximize\n obj: + 1 f_0 \\ trailing\nSubject To\nBounds\n 0 <= f_0 <= 1\nEnd\n";
        assert_eq!(parse_lp(ok).unwrap().upper, vec![1.0]);
    }
}
