//! Problem files: statement parsing into a `ProblemSpec` plus expression
//! evaluation into the truncated ring.

use std::collections::BTreeMap;

use germ_core::series::{SeriesVec, TruncSeries};

use crate::parse::{Expr, ParseError, Parser};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertKind {
    Tougeron,
    Fisher,
    Bk,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetFlavor {
    R0,
    K0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Solve,
    Certify(CertKind),
    DeformRoot,
    DeformEig,
    Determinacy(DetFlavor),
}

impl Task {
    pub fn name(&self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Certify(CertKind::Tougeron) => "certify(tougeron)",
            Task::Certify(CertKind::Fisher) => "certify(fisher)",
            Task::Certify(CertKind::Bk) => "certify(bk)",
            Task::DeformRoot => "deform-root",
            Task::DeformEig => "deform-eig",
            Task::Determinacy(DetFlavor::R0) => "determinacy(r0)",
            Task::Determinacy(DetFlavor::K0) => "determinacy(k0)",
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Task::Solve => "solve",
            Task::Certify(_) => "certify",
            Task::DeformRoot => "deform-root",
            Task::DeformEig => "deform-eig",
            Task::Determinacy(_) => "determinacy",
        }
    }
}

/// A declared ideal clause `ideal NAME = <g1, ...> [^k];`.
#[derive(Debug, Clone)]
pub struct IdealClause {
    pub name: String,
    pub generators: Vec<Expr>,
    pub power: u32,
}

/// A declared submodule clause `submodule NAME = [g11, g12], ...;`.
#[derive(Debug, Clone)]
pub struct SubmoduleClause {
    pub name: String,
    pub generators: Vec<Vec<Expr>>,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub vars: Vec<String>,
    pub unknowns: Vec<String>,
    pub trunc: u32,
    pub equations: Vec<Expr>,
    pub ideal: Option<IdealClause>,
    pub submodule: Option<SubmoduleClause>,
    pub task: Task,
}

fn err(line: u32, col: u32, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        col,
        message: message.into(),
    }
}

pub fn parse_problem(text: &str) -> Result<ProblemSpec, ParseError> {
    let mut p = Parser::new(text)?;
    let mut vars: Option<Vec<String>> = None;
    let mut unknowns: Option<Vec<String>> = None;
    let mut trunc: Option<u32> = None;
    let mut equations: Vec<Expr> = Vec::new();
    let mut ideal: Option<IdealClause> = None;
    let mut submodule: Option<SubmoduleClause> = None;
    let mut task: Option<Task> = None;

    while !p.at_end() {
        let keyword = p.take_ident()?;
        match keyword.as_str() {
            "vars" => {
                let mut names = Vec::new();
                while p.peek_ident().is_some() {
                    names.push(p.take_ident()?);
                }
                if names.is_empty() {
                    return Err(err(1, 1, "vars clause needs at least one name"));
                }
                if vars.replace(names).is_some() {
                    return Err(err(1, 1, "duplicate vars clause"));
                }
                p.expect_semi()?;
            }
            "unknowns" => {
                let mut names = Vec::new();
                while p.peek_ident().is_some() {
                    names.push(p.take_ident()?);
                }
                if unknowns.replace(names).is_some() {
                    return Err(err(1, 1, "duplicate unknowns clause"));
                }
                p.expect_semi()?;
            }
            "trunc" => {
                let d = p.take_uint()?;
                if trunc.replace(d).is_some() {
                    return Err(err(1, 1, "duplicate trunc clause"));
                }
                p.expect_semi()?;
            }
            "eq" => {
                equations.push(p.parse_expr()?);
                p.expect_semi()?;
            }
            "ideal" => {
                let name = p.take_ident()?;
                p.expect_eq()?;
                if !p.eat_langle() {
                    return Err(err(1, 1, "ideal generators must be written in <...>"));
                }
                let mut generators = vec![p.parse_expr()?];
                while p.eat_comma() {
                    generators.push(p.parse_expr()?);
                }
                p.expect_rangle()?;
                let power = if p.eat_caret() { p.take_uint()? } else { 1 };
                if power == 0 {
                    return Err(err(1, 1, "ideal power must be >= 1"));
                }
                if ideal
                    .replace(IdealClause {
                        name,
                        generators,
                        power,
                    })
                    .is_some()
                {
                    return Err(err(1, 1, "duplicate ideal clause"));
                }
                p.expect_semi()?;
            }
            "submodule" => {
                let name = p.take_ident()?;
                p.expect_eq()?;
                let mut generators = Vec::new();
                loop {
                    p.expect_lbracket()?;
                    let mut entries = vec![p.parse_expr()?];
                    while p.eat_comma() {
                        entries.push(p.parse_expr()?);
                    }
                    p.expect_rbracket()?;
                    generators.push(entries);
                    if !p.eat_comma() {
                        break;
                    }
                }
                if submodule
                    .replace(SubmoduleClause { name, generators })
                    .is_some()
                {
                    return Err(err(1, 1, "duplicate submodule clause"));
                }
                p.expect_semi()?;
            }
            "task" => {
                let head = p.take_ident()?;
                let t = match head.as_str() {
                    "solve" => Task::Solve,
                    "certify" => {
                        if !p.eat_lparen() {
                            return Err(err(1, 1, "certify needs (tougeron|fisher|bk)"));
                        }
                        let kind = match p.take_ident()?.as_str() {
                            "tougeron" => CertKind::Tougeron,
                            "fisher" => CertKind::Fisher,
                            "bk" => CertKind::Bk,
                            other => {
                                return Err(err(1, 1, format!("unknown certificate '{other}'")))
                            }
                        };
                        p.expect_rparen()?;
                        Task::Certify(kind)
                    }
                    "deform" => {
                        if !p.eat_minus() {
                            return Err(err(1, 1, "expected deform-root or deform-eig"));
                        }
                        match p.take_ident()?.as_str() {
                            "root" => Task::DeformRoot,
                            "eig" => Task::DeformEig,
                            other => {
                                return Err(err(1, 1, format!("unknown task 'deform-{other}'")))
                            }
                        }
                    }
                    "determinacy" => {
                        if !p.eat_lparen() {
                            return Err(err(1, 1, "determinacy needs (r0|k0)"));
                        }
                        let flavor = match p.take_ident()?.as_str() {
                            "r0" => DetFlavor::R0,
                            "k0" => DetFlavor::K0,
                            other => return Err(err(1, 1, format!("unknown flavor '{other}'"))),
                        };
                        p.expect_rparen()?;
                        Task::Determinacy(flavor)
                    }
                    other => return Err(err(1, 1, format!("unknown task '{other}'"))),
                };
                if task.replace(t).is_some() {
                    return Err(err(1, 1, "duplicate task clause"));
                }
                p.expect_semi()?;
            }
            other => return Err(err(1, 1, format!("unknown statement '{other}'"))),
        }
    }

    let vars = vars.ok_or_else(|| err(1, 1, "missing vars clause"))?;
    let unknowns = unknowns.unwrap_or_default();
    let trunc = trunc.ok_or_else(|| err(1, 1, "missing trunc clause"))?;
    let task = task.ok_or_else(|| err(1, 1, "missing task clause"))?;
    if trunc < 1 {
        return Err(err(1, 1, "trunc must be >= 1"));
    }
    // Names must be pairwise distinct across vars and unknowns.
    let mut seen = std::collections::BTreeSet::new();
    for n in vars.iter().chain(unknowns.iter()) {
        if !seen.insert(n.clone()) {
            return Err(err(1, 1, format!("name '{n}' declared twice")));
        }
    }
    if equations.is_empty() {
        return Err(err(1, 1, "at least one eq clause is required"));
    }
    let spec = ProblemSpec {
        vars,
        unknowns,
        trunc,
        equations,
        ideal,
        submodule,
        task,
    };
    spec.validate_names()?;
    Ok(spec)
}

impl ProblemSpec {
    fn validate_names(&self) -> Result<(), ParseError> {
        let all: Vec<&str> = self
            .vars
            .iter()
            .chain(self.unknowns.iter())
            .map(|s| s.as_str())
            .collect();
        for e in &self.equations {
            check_names(e, &all)?;
        }
        let ring: Vec<&str> = self.vars.iter().map(|s| s.as_str()).collect();
        if let Some(i) = &self.ideal {
            for g in &i.generators {
                check_names(g, &ring)?;
            }
        }
        if let Some(s) = &self.submodule {
            for g in &s.generators {
                for e in g {
                    check_names(e, &ring)?;
                }
            }
        }
        Ok(())
    }

    /// Environment mapping names to variable indices for equations
    /// (vars then unknowns).
    pub fn full_env(&self) -> BTreeMap<String, usize> {
        self.vars
            .iter()
            .chain(self.unknowns.iter())
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect()
    }

    /// Environment over ring variables only, for filtration data.
    pub fn ring_env(&self) -> BTreeMap<String, usize> {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect()
    }

    /// Evaluate the equations at the given truncation (possibly above the
    /// declared one; the expressions are exact polynomials).
    pub fn equations_at(&self, trunc: u32) -> SeriesVec {
        let env = self.full_env();
        let nvars = env.len();
        SeriesVec::new(
            self.equations
                .iter()
                .map(|e| eval(e, &env, nvars, trunc))
                .collect(),
        )
    }

    pub fn ideal_generators_at(&self, trunc: u32) -> Option<Vec<TruncSeries>> {
        let env = self.ring_env();
        self.ideal.as_ref().map(|clause| {
            clause
                .generators
                .iter()
                .map(|e| eval(e, &env, self.vars.len(), trunc))
                .collect()
        })
    }

    pub fn submodule_generators_at(&self, trunc: u32) -> Option<Vec<Vec<TruncSeries>>> {
        let env = self.ring_env();
        self.submodule.as_ref().map(|clause| {
            clause
                .generators
                .iter()
                .map(|g| {
                    g.iter()
                        .map(|e| eval(e, &env, self.vars.len(), trunc))
                        .collect()
                })
                .collect()
        })
    }
}

fn check_names(e: &Expr, allowed: &[&str]) -> Result<(), ParseError> {
    match e {
        Expr::Num(_) => Ok(()),
        Expr::Var(n) => {
            if allowed.contains(&n.as_str()) {
                Ok(())
            } else {
                Err(ParseError {
                    line: 1,
                    col: 1,
                    message: format!("undeclared name '{n}' in this context"),
                })
            }
        }
        Expr::Neg(a) => check_names(a, allowed),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => {
            check_names(a, allowed)?;
            check_names(b, allowed)
        }
        Expr::Pow(a, _) => check_names(a, allowed),
    }
}

/// Evaluate an expression into the truncated ring.
pub fn eval(e: &Expr, env: &BTreeMap<String, usize>, nvars: usize, trunc: u32) -> TruncSeries {
    match e {
        Expr::Num(r) => TruncSeries::constant(nvars, trunc, r.clone()),
        Expr::Var(n) => TruncSeries::var(nvars, trunc, env[n]),
        Expr::Neg(a) => eval(a, env, nvars, trunc).neg(),
        Expr::Add(a, b) => eval(a, env, nvars, trunc).add(&eval(b, env, nvars, trunc)),
        Expr::Sub(a, b) => eval(a, env, nvars, trunc).sub(&eval(b, env, nvars, trunc)),
        Expr::Mul(a, b) => eval(a, env, nvars, trunc).mul(&eval(b, env, nvars, trunc)),
        Expr::Pow(a, k) => eval(a, env, nvars, trunc).pow(*k),
    }
}

/// Parse a single expression over the given names (used by print/parse
/// round-trip checks).
pub fn parse_series(text: &str, names: &[&str], trunc: u32) -> Result<TruncSeries, ParseError> {
    let mut p = Parser::new(text)?;
    let e = p.parse_expr()?;
    if !p.at_end() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "trailing input".into(),
        });
    }
    check_names(&e, names)?;
    let env: BTreeMap<String, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.to_string(), i))
        .collect();
    Ok(eval(&e, &env, names.len(), trunc))
}
