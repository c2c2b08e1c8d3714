//! Lexer, recursive-descent parser and canonical printer.
//!
//! The printer emits the canonical layout: one statement per line, single
//! spaces around binary operators, no redundant parentheses beyond those the
//! tree records. `parse(print(s)) == s` for every tree the parser produces.

use std::fmt;

use superloops::Parity;

use crate::error::{Pos, ScriptError};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Int(n) => write!(f, "integer `{n}`"),
            Tok::Sym(s) => write!(f, "`{s}`"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: &[&str] = &[
    ";", "=", ":", ",", "+", "-", "*", "/", "^", "(", ")", "[", "]",
];

/// Keywords spelled with a hyphen; everywhere else `-` is subtraction.
const HYPHENATED: &[&str] = &["psi-scaling", "chain-map"];

pub fn lex(src: &str) -> Result<Vec<Token>, ScriptError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    let word_at = |mut j: usize| -> (String, usize) {
        let mut w = String::new();
        while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
            w.push(chars[j]);
            j += 1;
        }
        (w, j)
    };
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos::new(line, col);
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            if i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                return Err(ScriptError::Lex {
                    pos: Pos::new(line, col + (i - start)),
                    message: format!("unexpected `{}` after number `{text}`", chars[i]),
                });
            }
            let n = text.parse::<u64>().map_err(|_| ScriptError::Lex {
                pos,
                message: format!("integer literal `{text}` is too large"),
            })?;
            col += i - start;
            out.push(Token {
                tok: Tok::Int(n),
                pos,
            });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let (mut w, mut j) = word_at(i);
            if j < chars.len() && chars[j] == '-' {
                let (rest, k) = word_at(j + 1);
                let joined = format!("{w}-{rest}");
                if HYPHENATED.contains(&joined.as_str()) {
                    w = joined;
                    j = k;
                }
            }
            col += j - i;
            i = j;
            out.push(Token {
                tok: Tok::Ident(w),
                pos,
            });
            continue;
        }
        let s = c.to_string();
        match SYMBOLS.iter().find(|&&sym| sym == s) {
            Some(sym) => {
                out.push(Token {
                    tok: Tok::Sym(sym),
                    pos,
                });
                i += 1;
                col += 1;
            }
            None => {
                return Err(ScriptError::Lex {
                    pos,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos::new(line, col),
    });
    Ok(out)
}

/// An identifier occurrence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Name {
    pub text: String,
    pub pos: Pos,
}

impl Name {
    pub fn new(text: impl Into<String>) -> Self {
        Name {
            text: text.into(),
            pos: Pos::default(),
        }
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// `expr := ["-"] term (("+"|"-") term)*`. The sign of the first term is
/// `Minus` only for a leading unary minus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub terms: Vec<(Sign, Term)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub factors: Vec<Factor>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Factor {
    Num { num: u64, den: Option<u64> },
    Var(Name),
    D(Box<Factor>),
    Paren(Box<Expr>),
    Pow(Box<Factor>, i64),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Assign {
    pub coord: Name,
    pub expr: Expr,
}

/// `residue/(denominator)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleSpec {
    pub residue: Name,
    pub denominator: Expr,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decl {
    Vars {
        pos: Pos,
        parity: Parity,
        names: Vec<Name>,
        cap: Option<u64>,
    },
    Form {
        pos: Pos,
        name: Name,
        expr: Expr,
    },
    Loop {
        pos: Pos,
        name: Name,
        assigns: Vec<Assign>,
    },
    Poles {
        pos: Pos,
        name: Name,
        specs: Vec<PoleSpec>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Sl12,
    Closed {
        form: Name,
    },
    Exactness {
        vars: Vec<Name>,
        cap: u64,
    },
    Truncation {
        vars: Vec<Name>,
        p: u64,
        cap: u64,
    },
    ChainMap {
        degree: u64,
        cases: u64,
    },
    Transgress {
        form: Name,
        lp: Name,
    },
    Radon {
        form: Name,
        lp: Name,
    },
    Hessian {
        form: Name,
        n: i64,
    },
    Additivity {
        form: Name,
        poles: Name,
        d: Option<u64>,
    },
    PsiScaling {
        form: Name,
        n: u64,
    },
    Berezinian {
        even: u64,
        odd: u64,
        rows: Vec<Vec<Expr>>,
    },
    Taylor {
        form: Name,
        cap: Option<u64>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub pos: Pos,
    pub kind: CommandKind,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Script {
    pub decls: Vec<Decl>,
    pub command: Option<Command>,
}

const COMMANDS: &[&str] = &[
    "check",
    "transgress",
    "radon",
    "hessian",
    "additivity",
    "psi-scaling",
    "berezinian",
    "taylor",
];

const CHECKS: &[&str] = &["sl12", "closed", "exactness", "truncation", "chain-map"];

pub fn parse(src: &str) -> Result<Script, ScriptError> {
    Parser {
        toks: lex(src)?,
        i: 0,
        expected: Vec::new(),
    }
    .script()
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    /// Alternatives tried at the current token, for diagnostics.
    expected: Vec<String>,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.i]
    }

    fn pos(&self) -> Pos {
        self.peek().pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if t.tok != Tok::Eof {
            self.i += 1;
        }
        self.expected.clear();
        t
    }

    fn note(&mut self, what: String) {
        if !self.expected.contains(&what) {
            self.expected.push(what);
        }
    }

    fn fail(&mut self, also: &[&str]) -> ScriptError {
        for a in also {
            self.note(a.to_string());
        }
        let mut expected = std::mem::take(&mut self.expected);
        expected.sort();
        ScriptError::Syntax {
            pos: self.pos(),
            expected,
            found: self.peek().tok.to_string(),
        }
    }

    fn at_sym(&mut self, s: &'static str) -> bool {
        if self.peek().tok == Tok::Sym(s) {
            true
        } else {
            self.note(format!("`{s}`"));
            false
        }
    }

    fn eat_sym(&mut self, s: &'static str) -> bool {
        let hit = self.at_sym(s);
        if hit {
            self.bump();
        }
        hit
    }

    fn expect_sym(&mut self, s: &'static str) -> Result<Pos, ScriptError> {
        if self.at_sym(s) {
            Ok(self.bump().pos)
        } else {
            Err(self.fail(&[]))
        }
    }

    fn at_kw(&mut self, k: &str) -> bool {
        if matches!(&self.peek().tok, Tok::Ident(s) if s == k) {
            true
        } else {
            self.note(format!("`{k}`"));
            false
        }
    }

    fn at_ident(&mut self) -> bool {
        if matches!(self.peek().tok, Tok::Ident(_)) {
            true
        } else {
            self.note("identifier".into());
            false
        }
    }

    fn ident(&mut self) -> Result<Name, ScriptError> {
        if !self.at_ident() {
            return Err(self.fail(&[]));
        }
        let t = self.bump();
        match t.tok {
            Tok::Ident(text) => Ok(Name { text, pos: t.pos }),
            _ => unreachable!(),
        }
    }

    fn at_int(&mut self) -> bool {
        if matches!(self.peek().tok, Tok::Int(_)) {
            true
        } else {
            self.note("integer".into());
            false
        }
    }

    fn int(&mut self) -> Result<u64, ScriptError> {
        if !self.at_int() {
            return Err(self.fail(&[]));
        }
        match self.bump().tok {
            Tok::Int(n) => Ok(n),
            _ => unreachable!(),
        }
    }

    fn signed_int(&mut self) -> Result<i64, ScriptError> {
        let neg = self.eat_sym("-");
        let pos = self.pos();
        let n = self.int()?;
        let v = i64::try_from(n).map_err(|_| ScriptError::Lex {
            pos,
            message: format!("integer `{n}` is out of range"),
        })?;
        Ok(if neg { -v } else { v })
    }

    fn script(&mut self) -> Result<Script, ScriptError> {
        let mut decls = Vec::new();
        loop {
            if self.peek().tok == Tok::Eof {
                return Ok(Script {
                    decls,
                    command: None,
                });
            }
            if let Some(d) = self.decl()? {
                decls.push(d);
                continue;
            }
            if COMMANDS
                .iter()
                .any(|c| matches!(&self.peek().tok, Tok::Ident(s) if s == c))
            {
                let command = self.command()?;
                if self.peek().tok != Tok::Eof {
                    return Err(self.fail(&["end of input"]));
                }
                return Ok(Script {
                    decls,
                    command: Some(command),
                });
            }
            for c in COMMANDS {
                self.note(format!("`{c}`"));
            }
            return Err(self.fail(&["end of input"]));
        }
    }

    fn decl(&mut self) -> Result<Option<Decl>, ScriptError> {
        let pos = self.pos();
        let parity = if self.at_kw("even") {
            Some(Parity::Even)
        } else if self.at_kw("odd") {
            Some(Parity::Odd)
        } else {
            None
        };
        if let Some(parity) = parity {
            self.bump();
            let mut names = vec![self.ident()?];
            while self.at_ident() && !self.at_kw("cap") {
                names.push(self.ident()?);
            }
            let cap = if self.at_kw("cap") {
                self.bump();
                Some(self.int()?)
            } else {
                None
            };
            self.expect_sym(";")?;
            return Ok(Some(Decl::Vars {
                pos,
                parity,
                names,
                cap,
            }));
        }
        if self.at_kw("form") {
            self.bump();
            let name = self.ident()?;
            self.expect_sym("=")?;
            let expr = self.expr()?;
            self.expect_sym(";")?;
            return Ok(Some(Decl::Form { pos, name, expr }));
        }
        if self.at_kw("loop") {
            self.bump();
            let name = self.ident()?;
            self.expect_sym("=")?;
            let mut assigns = Vec::new();
            loop {
                let coord = self.ident()?;
                self.expect_sym(":")?;
                let expr = self.expr()?;
                assigns.push(Assign { coord, expr });
                self.eat_sym(",");
                if self.at_sym(";") {
                    break;
                }
            }
            self.bump();
            return Ok(Some(Decl::Loop { pos, name, assigns }));
        }
        if self.at_kw("poles") {
            self.bump();
            let name = self.ident()?;
            self.expect_sym("=")?;
            let mut specs = Vec::new();
            loop {
                let residue = self.ident()?;
                self.expect_sym("/")?;
                self.expect_sym("(")?;
                let denominator = self.expr()?;
                self.expect_sym(")")?;
                specs.push(PoleSpec {
                    residue,
                    denominator,
                });
                self.eat_sym("+");
                if self.at_sym(";") {
                    break;
                }
            }
            self.bump();
            return Ok(Some(Decl::Poles { pos, name, specs }));
        }
        Ok(None)
    }

    fn var_list(&mut self) -> Result<Vec<Name>, ScriptError> {
        self.expect_sym("[")?;
        let mut vars = vec![self.ident()?];
        while self.eat_sym(",") {
            vars.push(self.ident()?);
        }
        self.expect_sym("]")?;
        Ok(vars)
    }

    fn optional_int(&mut self) -> Result<Option<u64>, ScriptError> {
        Ok(if self.at_int() {
            Some(self.int()?)
        } else {
            None
        })
    }

    fn command(&mut self) -> Result<Command, ScriptError> {
        let pos = self.pos();
        let head = self.ident()?.text;
        let kind = match head.as_str() {
            "check" => {
                let sub = if CHECKS.iter().any(|c| self.at_kw(c)) {
                    self.ident()?.text
                } else {
                    return Err(self.fail(&[]));
                };
                match sub.as_str() {
                    "sl12" => CommandKind::Sl12,
                    "closed" => CommandKind::Closed {
                        form: self.ident()?,
                    },
                    "exactness" => {
                        let vars = self.var_list()?;
                        CommandKind::Exactness {
                            vars,
                            cap: self.int()?,
                        }
                    }
                    "truncation" => {
                        let vars = self.var_list()?;
                        let p = self.int()?;
                        CommandKind::Truncation {
                            vars,
                            p,
                            cap: self.int()?,
                        }
                    }
                    _ => {
                        let degree = self.int()?;
                        CommandKind::ChainMap {
                            degree,
                            cases: self.int()?,
                        }
                    }
                }
            }
            "transgress" | "radon" => {
                let form = self.ident()?;
                let lp = self.ident()?;
                if head == "radon" {
                    CommandKind::Radon { form, lp }
                } else {
                    CommandKind::Transgress { form, lp }
                }
            }
            "hessian" => {
                let form = self.ident()?;
                CommandKind::Hessian {
                    form,
                    n: self.signed_int()?,
                }
            }
            "additivity" => {
                let form = self.ident()?;
                let poles = self.ident()?;
                CommandKind::Additivity {
                    form,
                    poles,
                    d: self.optional_int()?,
                }
            }
            "psi-scaling" => {
                let form = self.ident()?;
                CommandKind::PsiScaling {
                    form,
                    n: self.int()?,
                }
            }
            "berezinian" => {
                let even = self.int()?;
                let odd = self.int()?;
                self.expect_sym("[")?;
                let mut rows = Vec::new();
                loop {
                    let mut row = vec![self.expr()?];
                    while self.eat_sym(",") {
                        row.push(self.expr()?);
                    }
                    rows.push(row);
                    if !self.eat_sym(";") {
                        break;
                    }
                }
                self.expect_sym("]")?;
                CommandKind::Berezinian { even, odd, rows }
            }
            _ => {
                let form = self.ident()?;
                CommandKind::Taylor {
                    form,
                    cap: self.optional_int()?,
                }
            }
        };
        self.expect_sym(";")?;
        Ok(Command { pos, kind })
    }

    fn expr(&mut self) -> Result<Expr, ScriptError> {
        let first = if self.eat_sym("-") {
            Sign::Minus
        } else {
            Sign::Plus
        };
        let mut terms = vec![(first, self.term()?)];
        loop {
            let sign = if self.eat_sym("+") {
                Sign::Plus
            } else if self.eat_sym("-") {
                Sign::Minus
            } else {
                break;
            };
            terms.push((sign, self.term()?));
        }
        Ok(Expr { terms })
    }

    fn term(&mut self) -> Result<Term, ScriptError> {
        let mut factors = vec![self.factor()?];
        while self.eat_sym("*") {
            factors.push(self.factor()?);
        }
        Ok(Term { factors })
    }

    fn factor(&mut self) -> Result<Factor, ScriptError> {
        let mut f = self.primary()?;
        while self.eat_sym("^") {
            f = Factor::Pow(Box::new(f), self.signed_int()?);
        }
        Ok(f)
    }

    fn primary(&mut self) -> Result<Factor, ScriptError> {
        if self.at_int() {
            let num = self.int()?;
            let den = if self.eat_sym("/") {
                let pos = self.pos();
                let d = self.int()?;
                if d == 0 {
                    return Err(ScriptError::Lex {
                        pos,
                        message: "zero denominator".into(),
                    });
                }
                Some(d)
            } else {
                None
            };
            return Ok(Factor::Num { num, den });
        }
        if self.at_kw("d") {
            self.bump();
            return Ok(Factor::D(Box::new(self.factor()?)));
        }
        if self.at_ident() {
            return Ok(Factor::Var(self.ident()?));
        }
        if self.eat_sym("(") {
            let e = self.expr()?;
            self.expect_sym(")")?;
            return Ok(Factor::Paren(Box::new(e)));
        }
        Err(self.fail(&[]))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (sign, term)) in self.terms.iter().enumerate() {
            match (k, sign) {
                (0, Sign::Plus) => {}
                (0, Sign::Minus) => f.write_str("-")?,
                (_, Sign::Plus) => f.write_str(" + ")?,
                (_, Sign::Minus) => f.write_str(" - ")?,
            }
            write!(f, "{term}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        f.write_str(&parts.join(" * "))
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Num { num, den: None } => write!(f, "{num}"),
            Factor::Num { num, den: Some(d) } => write!(f, "{num}/{d}"),
            Factor::Var(n) => write!(f, "{n}"),
            Factor::D(inner) => match inner.as_ref() {
                Factor::Paren(_) => write!(f, "d{inner}"),
                _ => write!(f, "d {inner}"),
            },
            Factor::Paren(e) => write!(f, "({e})"),
            Factor::Pow(base, n) => write!(f, "{base}^{n}"),
        }
    }
}

fn join_names(names: &[Name], sep: &str) -> String {
    names
        .iter()
        .map(|n| n.text.as_str())
        .collect::<Vec<_>>()
        .join(sep)
}

impl fmt::Display for Decl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decl::Vars {
                parity, names, cap, ..
            } => {
                write!(f, "{parity} {}", join_names(names, " "))?;
                if let Some(c) = cap {
                    write!(f, " cap {c}")?;
                }
                f.write_str(";")
            }
            Decl::Form { name, expr, .. } => write!(f, "form {name} = {expr};"),
            Decl::Loop { name, assigns, .. } => {
                let parts: Vec<String> = assigns
                    .iter()
                    .map(|a| format!("{}: {}", a.coord, a.expr))
                    .collect();
                write!(f, "loop {name} = {};", parts.join(", "))
            }
            Decl::Poles { name, specs, .. } => {
                let parts: Vec<String> = specs
                    .iter()
                    .map(|s| format!("{}/({})", s.residue, s.denominator))
                    .collect();
                write!(f, "poles {name} = {};", parts.join(" + "))
            }
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandKind::Sl12 => f.write_str("check sl12"),
            CommandKind::Closed { form } => write!(f, "check closed {form}"),
            CommandKind::Exactness { vars, cap } => {
                write!(f, "check exactness [{}] {cap}", join_names(vars, ", "))
            }
            CommandKind::Truncation { vars, p, cap } => {
                write!(f, "check truncation [{}] {p} {cap}", join_names(vars, ", "))
            }
            CommandKind::ChainMap { degree, cases } => {
                write!(f, "check chain-map {degree} {cases}")
            }
            CommandKind::Transgress { form, lp } => write!(f, "transgress {form} {lp}"),
            CommandKind::Radon { form, lp } => write!(f, "radon {form} {lp}"),
            CommandKind::Hessian { form, n } => write!(f, "hessian {form} {n}"),
            CommandKind::Additivity { form, poles, d } => {
                write!(f, "additivity {form} {poles}")?;
                match d {
                    Some(d) => write!(f, " {d}"),
                    None => Ok(()),
                }
            }
            CommandKind::PsiScaling { form, n } => write!(f, "psi-scaling {form} {n}"),
            CommandKind::Berezinian { even, odd, rows } => {
                let rows: Vec<String> = rows
                    .iter()
                    .map(|r| {
                        r.iter()
                            .map(|e| e.to_string())
                            .collect::<Vec<_>>()
                            .join(", ")
                    })
                    .collect();
                write!(f, "berezinian {even} {odd} [{}]", rows.join("; "))
            }
            CommandKind::Taylor { form, cap } => {
                write!(f, "taylor {form}")?;
                match cap {
                    Some(c) => write!(f, " {c}"),
                    None => Ok(()),
                }
            }
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{};", self.kind)
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.decls {
            writeln!(f, "{d}")?;
        }
        if let Some(c) = &self.command {
            writeln!(f, "{c}")?;
        }
        Ok(())
    }
}
