//! Lexer, parser and elaborator for the workbench DSL.
//!
//! Parsing happens in two stages. The parser produces raw items in which
//! identifiers are unresolved; elaboration then resolves names against a
//! signature and infers variable sorts. Sort inference propagates sorts from
//! relation and function argument positions and through equalities. A
//! variable whose sort stays undetermined defaults to the only sort of a
//! single-sorted signature and is an error otherwise.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::FiniteModel;
use crate::syntax::{Formula, Mode, Sequent, Signature, SyntaxError, Term, Theory, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("line {line}, column {col}: {err}")]
    Type {
        line: usize,
        col: usize,
        err: SyntaxError,
    },
}

impl ParseError {
    pub fn at(pos: Pos, msg: impl Into<String>) -> Self {
        ParseError::Syntax {
            line: pos.line,
            col: pos.col,
            msg: msg.into(),
        }
    }

    pub fn typed(pos: Pos, err: SyntaxError) -> Self {
        ParseError::Type {
            line: pos.line,
            col: pos.col,
            err,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

const SYMBOLS: &[&str] = &[
    "|-", "->", "=>", ":=", "{", "}", "(", ")", ",", ":", ".", "=", "|", "&", "~", ";",
];

pub fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
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
        if c == '#' || (c == '/' && chars.get(i + 1) == Some(&'/')) {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                i += 1;
            }
            let word: String = chars[start..i].iter().collect();
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(word),
                pos,
            });
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
        let sym = SYMBOLS.iter().find(|s| rest.starts_with(**s));
        match sym {
            Some(s) => {
                i += s.len();
                col += s.len();
                out.push(Token { tok: Tok::Sym(s), pos });
            }
            None => return Err(ParseError::at(pos, format!("unexpected character '{c}'"))),
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: Pos { line, col },
    });
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawTerm {
    Name(String, Option<String>, Pos),
    App(String, Vec<RawTerm>, Pos),
}

impl RawTerm {
    pub fn pos(&self) -> Pos {
        match self {
            RawTerm::Name(_, _, p) | RawTerm::App(_, _, p) => *p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawFormula {
    Top,
    Bot,
    Rel(String, Vec<RawTerm>, Pos),
    Eq(RawTerm, RawTerm),
    And(Box<RawFormula>, Box<RawFormula>),
    Or(Box<RawFormula>, Box<RawFormula>),
    Not(Box<RawFormula>),
    Exists(String, Option<String>, Box<RawFormula>, Pos),
    Forall(String, Option<String>, Box<RawFormula>, Pos),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawSequent {
    pub antecedent: Vec<RawFormula>,
    pub succedent: RawFormula,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawDecl {
    Sort(Vec<String>, Pos),
    Rel(String, Vec<String>, Pos),
    Fun(String, Vec<String>, String, Pos),
    Ax(String, RawSequent),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTheory {
    pub name: String,
    pub classical: bool,
    pub extends: Option<String>,
    pub decls: Vec<RawDecl>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawModel {
    pub name: String,
    pub theory: String,
    pub sorts: Vec<(String, Vec<String>)>,
    pub relations: Vec<(String, Vec<Vec<String>>)>,
    pub functions: Vec<(String, Vec<(Vec<String>, String)>)>,
    pub pos: Pos,
}

/// `name(params) := body`
#[derive(Debug, Clone, PartialEq)]
pub struct RawDef {
    pub label: String,
    pub params: Vec<String>,
    pub body: RawFormula,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawTrEntry {
    Sort {
        sort: String,
        image: Vec<String>,
        domain: Option<RawDef>,
        pos: Pos,
    },
    Rel(String, RawDef),
    Fun(String, RawDef),
    Eq(String, RawDef),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTranslation {
    pub name: String,
    pub source: String,
    pub target: String,
    pub entries: Vec<RawTrEntry>,
    pub pos: Pos,
}

/// `sort s => chi(x1, x2 | y1, y2) := body`
#[derive(Debug, Clone, PartialEq)]
pub struct RawComponent {
    pub sort: String,
    pub left: Vec<String>,
    pub right: Vec<String>,
    pub body: RawFormula,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTMap {
    pub name: String,
    pub iso: bool,
    pub from: String,
    pub to: String,
    pub components: Vec<RawComponent>,
    pub checks: Vec<RawDef>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawCatDecl {
    Ob(Vec<String>),
    Mor(String, String, String),
    Comp(String, String, String),
    Terminal(String),
    Product(String, String, String, String, String),
    Equalizer(String, String, String, String),
    Join(String, String, String, String),
    Bottom(String, String),
    Cover(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCategory {
    pub name: String,
    pub decls: Vec<(RawCatDecl, Pos)>,
    pub pos: Pos,
}

/// A finite lattice given by its elements and generating order pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct RawLattice {
    pub name: String,
    pub elements: Vec<String>,
    pub le: Vec<(String, String)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawExtSpec {
    Product { sorts: Vec<String>, name: Option<String>, maps: Vec<String> },
    Terminal { name: Option<String> },
    Coproduct { sorts: Vec<String>, name: Option<String>, maps: Vec<String> },
    Subsort { base: String, class: RawClass, name: Option<String>, map: Option<String> },
    Quotient { base: String, class: RawClass, name: Option<String>, map: Option<String> },
    DefineRel { name: String, def: RawDef },
    DefineFun { name: String, def: RawDef },
}

/// A defining class: either a relation symbol or `{x:s, y:s | phi}`.
#[derive(Debug, Clone, PartialEq)]
pub enum RawClass {
    Symbol(String, Pos),
    Abstraction(Vec<(String, Option<String>)>, RawFormula, Pos),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawExtend {
    pub theory: String,
    pub specs: Vec<(RawExtSpec, Pos)>,
    pub into: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawLevel {
    Logical,
    Definitional(Vec<String>),
    Weak(Vec<String>),
    Morita { left: Vec<String>, right: Vec<String>, artifacts: Vec<String> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawCertificate {
    pub name: String,
    pub left: String,
    pub right: String,
    pub levels: Vec<(RawLevel, Pos)>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawItem {
    Theory(RawTheory),
    Model(RawModel),
    Translation(RawTranslation),
    TMap(RawTMap),
    Category(RawCategory),
    Lattice(RawLattice),
    Extend(RawExtend),
    Certificate(RawCertificate),
}

pub struct Parser {
    toks: Vec<Token>,
    i: usize,
}

const FORMULA_KEYWORDS: &[&str] = &["top", "bot", "exists", "forall"];

impl Parser {
    pub fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(text)?, i: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    pub fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn err<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::at(
            self.pos(),
            format!("expected {expected}, found {}", Self::describe(self.peek())),
        ))
    }

    fn expect_sym(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(&format!("'{s}'"))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            self.err(&format!("'{k}'"))
        }
    }

    pub fn ident(&mut self) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("identifier"),
        }
    }

    fn name(&mut self) -> Result<String, ParseError> {
        match self.peek() {
            Tok::Ident(s) if FORMULA_KEYWORDS.contains(&s.as_str()) => self.err("name"),
            _ => self.ident(),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    fn ident_list_until(&mut self, stops: &[&str]) -> Vec<String> {
        let mut out = Vec::new();
        while let Tok::Ident(s) = self.peek().clone() {
            if stops.contains(&s.as_str()) {
                break;
            }
            self.bump();
            out.push(s);
        }
        out
    }

    fn paren_names(&mut self) -> Result<Vec<String>, ParseError> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if self.eat_sym(")") {
            return Ok(out);
        }
        loop {
            out.push(self.name()?);
            if self.eat_sym(")") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> Result<RawFormula, ParseError> {
        let first = self.conj()?;
        if self.eat_sym("|") {
            let rest = self.formula()?;
            return Ok(RawFormula::Or(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn conj(&mut self) -> Result<RawFormula, ParseError> {
        let first = self.unary()?;
        if self.eat_sym("&") {
            let rest = self.conj()?;
            return Ok(RawFormula::And(Box::new(first), Box::new(rest)));
        }
        Ok(first)
    }

    fn binders(&mut self) -> Result<Vec<(String, Option<String>, Pos)>, ParseError> {
        let mut out = Vec::new();
        loop {
            let pos = self.pos();
            let n = self.name()?;
            let s = if self.eat_sym(":") { Some(self.ident()?) } else { None };
            out.push((n, s, pos));
            self.eat_sym(",");
            if self.eat_sym(".") {
                return Ok(out);
            }
        }
    }

    fn unary(&mut self) -> Result<RawFormula, ParseError> {
        if self.eat_sym("~") {
            return Ok(RawFormula::Not(Box::new(self.unary()?)));
        }
        if self.is_kw("exists") || self.is_kw("forall") {
            let ex = self.is_kw("exists");
            self.bump();
            let bs = self.binders()?;
            let body = self.formula()?;
            return Ok(bs.into_iter().rev().fold(body, |acc, (n, s, p)| {
                if ex {
                    RawFormula::Exists(n, s, Box::new(acc), p)
                } else {
                    RawFormula::Forall(n, s, Box::new(acc), p)
                }
            }));
        }
        if self.eat_kw("top") {
            return Ok(RawFormula::Top);
        }
        if self.eat_kw("bot") {
            return Ok(RawFormula::Bot);
        }
        if self.eat_sym("(") {
            let f = self.formula()?;
            self.expect_sym(")")?;
            return Ok(f);
        }
        let lhs = self.term()?;
        if self.eat_sym("=") {
            let rhs = self.term()?;
            return Ok(RawFormula::Eq(lhs, rhs));
        }
        match lhs {
            RawTerm::App(r, args, p) => Ok(RawFormula::Rel(r, args, p)),
            RawTerm::Name(r, None, p) => Ok(RawFormula::Rel(r, Vec::new(), p)),
            RawTerm::Name(_, Some(_), p) => Err(ParseError::at(p, "annotated variable used as a formula")),
        }
    }

    pub fn term(&mut self) -> Result<RawTerm, ParseError> {
        let pos = self.pos();
        let n = self.name()?;
        if self.eat_sym("(") {
            let mut args = Vec::new();
            if !self.eat_sym(")") {
                loop {
                    args.push(self.term()?);
                    if self.eat_sym(")") {
                        break;
                    }
                    self.expect_sym(",")?;
                }
            }
            return Ok(RawTerm::App(n, args, pos));
        }
        if self.eat_sym(":") {
            let s = self.ident()?;
            return Ok(RawTerm::Name(n, Some(s), pos));
        }
        Ok(RawTerm::Name(n, None, pos))
    }

    pub fn sequent(&mut self) -> Result<RawSequent, ParseError> {
        let pos = self.pos();
        let mut antecedent = Vec::new();
        if !self.is_sym("|-") {
            loop {
                antecedent.push(self.formula()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("|-")?;
        let succedent = self.formula()?;
        Ok(RawSequent {
            antecedent,
            succedent,
            pos,
        })
    }

    fn def(&mut self) -> Result<RawDef, ParseError> {
        let pos = self.pos();
        let label = self.name()?;
        let params = if self.is_sym("(") { self.paren_names()? } else { Vec::new() };
        self.expect_sym(":=")?;
        let body = self.formula()?;
        Ok(RawDef {
            label,
            params,
            body,
            pos,
        })
    }

    // ---- items ----

    pub fn item(&mut self) -> Result<RawItem, ParseError> {
        match self.peek() {
            Tok::Ident(k) => match k.as_str() {
                "theory" => self.theory().map(RawItem::Theory),
                "model" => self.model().map(RawItem::Model),
                "translation" => self.translation().map(RawItem::Translation),
                "tmap" => self.tmap().map(RawItem::TMap),
                "category" => self.category().map(RawItem::Category),
                "lattice" => self.lattice().map(RawItem::Lattice),
                "extend" => self.extend().map(RawItem::Extend),
                "certificate" => self.certificate().map(RawItem::Certificate),
                _ => self.err("an item keyword"),
            },
            _ => self.err("an item keyword"),
        }
    }

    pub fn document(&mut self) -> Result<Vec<RawItem>, ParseError> {
        let mut out = Vec::new();
        while !self.at_eof() {
            out.push(self.item()?);
            self.eat_sym(";");
        }
        Ok(out)
    }

    fn theory(&mut self) -> Result<RawTheory, ParseError> {
        let pos = self.pos();
        self.expect_kw("theory")?;
        let name = self.ident()?;
        let classical = self.eat_kw("classical");
        let extends = if self.eat_kw("extends") { Some(self.ident()?) } else { None };
        self.expect_sym("{")?;
        let mut decls = Vec::new();
        loop {
            let p = self.pos();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_kw("sort") {
                let names = self.ident_list_until(&["sort", "rel", "fun", "ax"]);
                if names.is_empty() {
                    return self.err("sort name");
                }
                decls.push(RawDecl::Sort(names, p));
            } else if self.eat_kw("rel") {
                let n = self.ident()?;
                let dom = if self.eat_sym(":") {
                    self.ident_list_until(&["sort", "rel", "fun", "ax"])
                } else {
                    Vec::new()
                };
                decls.push(RawDecl::Rel(n, dom, p));
            } else if self.eat_kw("fun") {
                let n = self.ident()?;
                self.expect_sym(":")?;
                let dom = self.ident_list_until(&[]);
                self.expect_sym("->")?;
                let cod = self.ident()?;
                decls.push(RawDecl::Fun(n, dom, cod, p));
            } else if self.eat_kw("ax") {
                let n = self.ident()?;
                self.expect_sym(":")?;
                decls.push(RawDecl::Ax(n, self.sequent()?));
            } else {
                return self.err("'sort', 'rel', 'fun', 'ax' or '}'");
            }
        }
        Ok(RawTheory {
            name,
            classical,
            extends,
            decls,
            pos,
        })
    }

    fn label_tuple(&mut self) -> Result<Vec<String>, ParseError> {
        if self.eat_sym("(") {
            let mut out = Vec::new();
            if self.eat_sym(")") {
                return Ok(out);
            }
            loop {
                out.push(self.ident()?);
                if self.eat_sym(")") {
                    return Ok(out);
                }
                self.expect_sym(",")?;
            }
        }
        Ok(vec![self.ident()?])
    }

    fn braced<T>(&mut self, mut one: impl FnMut(&mut Self) -> Result<T, ParseError>) -> Result<Vec<T>, ParseError> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        if self.eat_sym("}") {
            return Ok(out);
        }
        loop {
            out.push(one(self)?);
            if self.eat_sym("}") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn model(&mut self) -> Result<RawModel, ParseError> {
        let pos = self.pos();
        self.expect_kw("model")?;
        let name = self.ident()?;
        self.expect_sym(":")?;
        let theory = self.ident()?;
        self.expect_sym("{")?;
        let mut m = RawModel {
            name,
            theory,
            sorts: Vec::new(),
            relations: Vec::new(),
            functions: Vec::new(),
            pos,
        };
        loop {
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_kw("sort") {
                let s = self.ident()?;
                self.expect_sym("=")?;
                let labels = self.braced(|p| p.ident())?;
                m.sorts.push((s, labels));
            } else if self.eat_kw("rel") {
                let r = self.ident()?;
                self.expect_sym("=")?;
                let tuples = self.braced(|p| p.label_tuple())?;
                m.relations.push((r, tuples));
            } else if self.eat_kw("fun") {
                let f = self.ident()?;
                self.expect_sym("=")?;
                let entries = self.braced(|p| {
                    let args = if p.is_sym("->") { Vec::new() } else { p.label_tuple()? };
                    p.expect_sym("->")?;
                    Ok((args, p.ident()?))
                })?;
                m.functions.push((f, entries));
            } else {
                return self.err("'sort', 'rel', 'fun' or '}'");
            }
        }
        Ok(m)
    }

    fn translation(&mut self) -> Result<RawTranslation, ParseError> {
        let pos = self.pos();
        self.expect_kw("translation")?;
        let name = self.ident()?;
        self.expect_sym(":")?;
        let source = self.ident()?;
        self.expect_sym("->")?;
        let target = self.ident()?;
        self.expect_sym("{")?;
        let mut entries = Vec::new();
        loop {
            let p = self.pos();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_kw("sort") {
                let sort = self.ident()?;
                self.expect_sym("=>")?;
                let image = if self.is_sym("(") { self.paren_names()? } else { vec![self.ident()?] };
                let domain = if self.eat_kw("with") { Some(self.def()?) } else { None };
                entries.push(RawTrEntry::Sort {
                    sort,
                    image,
                    domain,
                    pos: p,
                });
            } else if self.eat_kw("rel") {
                let r = self.ident()?;
                self.expect_sym("=>")?;
                entries.push(RawTrEntry::Rel(r, self.def()?));
            } else if self.eat_kw("fun") {
                let f = self.ident()?;
                self.expect_sym("=>")?;
                entries.push(RawTrEntry::Fun(f, self.def()?));
            } else if self.eat_kw("eq") {
                let s = self.ident()?;
                self.expect_sym("=>")?;
                entries.push(RawTrEntry::Eq(s, self.def()?));
            } else {
                return self.err("'sort', 'rel', 'fun', 'eq' or '}'");
            }
        }
        Ok(RawTranslation {
            name,
            source,
            target,
            entries,
            pos,
        })
    }

    /// `H.G.F`
    fn path(&mut self) -> Result<String, ParseError> {
        let mut out = self.ident()?;
        while self.eat_sym(".") {
            out.push('.');
            out.push_str(&self.ident()?);
        }
        Ok(out)
    }

    fn tmap(&mut self) -> Result<RawTMap, ParseError> {
        let pos = self.pos();
        self.expect_kw("tmap")?;
        let iso = self.eat_kw("iso");
        let name = self.ident()?;
        self.expect_sym(":")?;
        let from = self.path()?;
        self.expect_sym("=>")?;
        let to = self.path()?;
        self.expect_sym("{")?;
        let mut components = Vec::new();
        let mut checks = Vec::new();
        loop {
            let p = self.pos();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_kw("sort") {
                let sort = self.ident()?;
                self.expect_sym("=>")?;
                self.name()?;
                self.expect_sym("(")?;
                let mut left = Vec::new();
                let mut right = Vec::new();
                let mut side_right = false;
                loop {
                    if self.eat_sym(")") {
                        break;
                    }
                    if self.eat_sym("|") {
                        side_right = true;
                        continue;
                    }
                    if self.eat_sym(",") {
                        continue;
                    }
                    let v = self.name()?;
                    if side_right {
                        right.push(v);
                    } else {
                        left.push(v);
                    }
                }
                if !side_right {
                    return Err(ParseError::at(p, "component parameters need the form (x.. | y..)"));
                }
                self.expect_sym(":=")?;
                let body = self.formula()?;
                components.push(RawComponent {
                    sort,
                    left,
                    right,
                    body,
                    pos: p,
                });
            } else if self.eat_kw("check") {
                checks.push(self.def()?);
            } else {
                return self.err("'sort', 'check' or '}'");
            }
        }
        Ok(RawTMap {
            name,
            iso,
            from,
            to,
            components,
            checks,
            pos,
        })
    }

    fn lattice(&mut self) -> Result<RawLattice, ParseError> {
        let pos = self.pos();
        self.expect_kw("lattice")?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut elements = Vec::new();
        let mut le = Vec::new();
        loop {
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            if self.eat_kw("elements") {
                let names = self.ident_list_until(&["elements", "le"]);
                if names.is_empty() {
                    return self.err("element name");
                }
                elements.extend(names);
            } else if self.eat_kw("le") {
                let a = self.ident()?;
                le.push((a, self.ident()?));
            } else {
                return self.err("`elements` or `le`");
            }
        }
        Ok(RawLattice { name, elements, le, pos })
    }

    fn category(&mut self) -> Result<RawCategory, ParseError> {
        let pos = self.pos();
        self.expect_kw("category")?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut decls = Vec::new();
        const KWS: &[&str] = &[
            "ob", "mor", "comp", "terminal", "product", "equalizer", "join", "bottom", "cover",
        ];
        loop {
            let p = self.pos();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            let d = if self.eat_kw("ob") {
                let names = self.ident_list_until(KWS);
                if names.is_empty() {
                    return self.err("object name");
                }
                RawCatDecl::Ob(names)
            } else if self.eat_kw("mor") {
                let f = self.ident()?;
                self.expect_sym(":")?;
                let a = self.ident()?;
                self.expect_sym("->")?;
                RawCatDecl::Mor(f, a, self.ident()?)
            } else if self.eat_kw("comp") {
                let g = self.ident()?;
                self.expect_sym(".")?;
                let f = self.ident()?;
                self.expect_sym("=")?;
                RawCatDecl::Comp(g, f, self.ident()?)
            } else if self.eat_kw("terminal") {
                RawCatDecl::Terminal(self.ident()?)
            } else if self.eat_kw("product") {
                let p_ = self.ident()?;
                self.expect_sym("=")?;
                let a = self.ident()?;
                self.expect_kw("x")?;
                let b = self.ident()?;
                self.expect_kw("with")?;
                let p1 = self.ident()?;
                self.eat_sym(",");
                RawCatDecl::Product(p_, a, b, p1, self.ident()?)
            } else if self.eat_kw("equalizer") {
                let e = self.ident()?;
                self.expect_sym("=")?;
                self.expect_kw("eq")?;
                self.expect_sym("(")?;
                let f = self.ident()?;
                self.expect_sym(",")?;
                let g = self.ident()?;
                self.expect_sym(")")?;
                self.expect_kw("via")?;
                RawCatDecl::Equalizer(e, f, g, self.ident()?)
            } else if self.eat_kw("join") || self.eat_kw("bottom") {
                let is_join = matches!(&self.toks[self.i - 1].tok, Tok::Ident(k) if k == "join");
                self.expect_kw("on")?;
                self.expect_kw("Sub")?;
                self.expect_sym("(")?;
                let b = self.ident()?;
                self.expect_sym(")")?;
                self.expect_sym(":")?;
                if is_join {
                    let m1 = self.ident()?;
                    self.expect_kw("v")?;
                    let m2 = self.ident()?;
                    self.expect_sym("=")?;
                    RawCatDecl::Join(b, m1, m2, self.ident()?)
                } else {
                    RawCatDecl::Bottom(b, self.ident()?)
                }
            } else if self.eat_kw("cover") {
                RawCatDecl::Cover(self.ident()?)
            } else {
                return self.err("a category declaration");
            };
            decls.push((d, p));
        }
        Ok(RawCategory { name, decls, pos })
    }

    fn class(&mut self) -> Result<RawClass, ParseError> {
        let pos = self.pos();
        if self.eat_sym("{") {
            let mut vars = Vec::new();
            loop {
                let n = self.name()?;
                let s = if self.eat_sym(":") { Some(self.ident()?) } else { None };
                vars.push((n, s));
                if self.eat_sym("|") {
                    break;
                }
                self.expect_sym(",")?;
            }
            let body = self.formula()?;
            self.expect_sym("}")?;
            return Ok(RawClass::Abstraction(vars, body, pos));
        }
        Ok(RawClass::Symbol(self.ident()?, pos))
    }

    fn opt_as(&mut self) -> Result<Option<String>, ParseError> {
        if self.eat_kw("as") {
            Ok(Some(self.ident()?))
        } else {
            Ok(None)
        }
    }

    fn ext_spec(&mut self) -> Result<RawExtSpec, ParseError> {
        if self.eat_kw("product") || self.eat_kw("coproduct") {
            let product = matches!(&self.toks[self.i - 1].tok, Tok::Ident(k) if k == "product");
            let sorts = if self.is_sym("(") { self.paren_names()? } else { vec![self.ident()?] };
            let name = self.opt_as()?;
            let maps = if self.eat_kw("via") { self.ident_list_until(&["and", "into"]) } else { Vec::new() };
            return Ok(if product {
                RawExtSpec::Product { sorts, name, maps }
            } else {
                RawExtSpec::Coproduct { sorts, name, maps }
            });
        }
        if self.eat_kw("terminal") {
            return Ok(RawExtSpec::Terminal { name: self.opt_as()? });
        }
        if self.eat_kw("subsort") || self.eat_kw("quotient") {
            let sub = matches!(&self.toks[self.i - 1].tok, Tok::Ident(k) if k == "subsort");
            let base = self.ident()?;
            self.expect_kw("by")?;
            let class = self.class()?;
            let name = self.opt_as()?;
            let map = if self.eat_kw("via") { Some(self.ident()?) } else { None };
            return Ok(if sub {
                RawExtSpec::Subsort { base, class, name, map }
            } else {
                RawExtSpec::Quotient { base, class, name, map }
            });
        }
        if self.eat_kw("define") {
            if self.eat_kw("rel") {
                let def = self.def()?;
                return Ok(RawExtSpec::DefineRel { name: def.label.clone(), def });
            }
            if self.eat_kw("fun") {
                let def = self.def()?;
                return Ok(RawExtSpec::DefineFun { name: def.label.clone(), def });
            }
            return self.err("'rel' or 'fun'");
        }
        self.err("an extension kind")
    }

    fn extend(&mut self) -> Result<RawExtend, ParseError> {
        let pos = self.pos();
        self.expect_kw("extend")?;
        let theory = self.ident()?;
        self.expect_kw("with")?;
        let mut specs = Vec::new();
        loop {
            let p = self.pos();
            specs.push((self.ext_spec()?, p));
            if !self.eat_kw("and") {
                break;
            }
        }
        self.expect_kw("into")?;
        let into = self.ident()?;
        Ok(RawExtend {
            theory,
            specs,
            into,
            pos,
        })
    }

    fn certificate(&mut self) -> Result<RawCertificate, ParseError> {
        let pos = self.pos();
        self.expect_kw("certificate")?;
        let name = self.ident()?;
        self.expect_sym(":")?;
        let left = self.ident()?;
        self.expect_sym("~")?;
        let right = self.ident()?;
        self.expect_sym("{")?;
        let mut levels = Vec::new();
        const KWS: &[&str] = &["logical", "definitional", "weak", "morita"];
        loop {
            let p = self.pos();
            if self.eat_sym("}") {
                break;
            }
            if self.eat_sym(";") {
                continue;
            }
            let lv = if self.eat_kw("logical") {
                RawLevel::Logical
            } else if self.eat_kw("definitional") {
                RawLevel::Definitional(self.ident_list_until(KWS))
            } else if self.eat_kw("weak") {
                RawLevel::Weak(self.ident_list_until(KWS))
            } else if self.eat_kw("morita") {
                self.expect_sym("(")?;
                let left = self.ident_list_until(&[]);
                self.expect_sym("|")?;
                let right = self.ident_list_until(&[]);
                self.expect_sym(")")?;
                RawLevel::Morita {
                    left,
                    right,
                    artifacts: self.ident_list_until(KWS),
                }
            } else {
                return self.err("'logical', 'definitional', 'weak', 'morita' or '}'");
            };
            levels.push((lv, p));
        }
        Ok(RawCertificate {
            name,
            left,
            right,
            levels,
            pos,
        })
    }
}

pub fn parse_document(text: &str) -> Result<Vec<RawItem>, ParseError> {
    Parser::new(text)?.document()
}

// ---------------------------------------------------------------------------
// elaboration

#[derive(Debug, Clone)]
enum ITerm {
    Slot(usize),
    App(String, Vec<ITerm>, String),
}

#[derive(Debug, Clone)]
enum IFormula {
    Top,
    Bot,
    Rel(String, Vec<ITerm>),
    Eq(ITerm, ITerm),
    And(Box<IFormula>, Box<IFormula>),
    Or(Box<IFormula>, Box<IFormula>),
    Not(Box<IFormula>),
    Exists(usize, Box<IFormula>),
    Forall(usize, Box<IFormula>),
}

struct SlotInfo {
    name: String,
    pos: Pos,
}

/// Name resolution and sort inference for a group of formulae sharing one
/// scope of free variables.
pub struct Elaborator<'a> {
    sig: &'a Signature,
    classical: bool,
    slots: Vec<SlotInfo>,
    parent: Vec<usize>,
    sort: Vec<Option<String>>,
    free: BTreeMap<String, usize>,
    free_order: Vec<usize>,
}

impl<'a> Elaborator<'a> {
    pub fn new(sig: &'a Signature, classical: bool) -> Self {
        Elaborator {
            sig,
            classical,
            slots: Vec::new(),
            parent: Vec::new(),
            sort: Vec::new(),
            free: BTreeMap::new(),
            free_order: Vec::new(),
        }
    }

    /// Pre-declare free variables with known sorts.
    pub fn with_context(mut self, ctx: &[Var]) -> Self {
        for v in ctx {
            let id = self.new_slot(&v.name, Pos::default(), Some(v.sort.clone()));
            self.free.insert(v.name.clone(), id);
            self.free_order.push(id);
        }
        self
    }

    fn new_slot(&mut self, name: &str, pos: Pos, sort: Option<String>) -> usize {
        let id = self.slots.len();
        self.slots.push(SlotInfo {
            name: name.to_string(),
            pos,
        });
        self.parent.push(id);
        self.sort.push(sort);
        id
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn set_sort(&mut self, slot: usize, s: &str, symbol: &str, pos: Pos) -> Result<(), ParseError> {
        self.sig.require_sort(s).map_err(|e| ParseError::typed(pos, e))?;
        let r = self.find(slot);
        match &self.sort[r] {
            None => {
                self.sort[r] = Some(s.to_string());
                Ok(())
            }
            Some(t) if t == s => Ok(()),
            Some(t) => Err(ParseError::typed(
                pos,
                SyntaxError::TypeMismatch {
                    symbol: symbol.to_string(),
                    expected: t.clone(),
                    found: s.to_string(),
                },
            )),
        }
    }

    fn unify(&mut self, a: usize, b: usize, pos: Pos) -> Result<(), ParseError> {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return Ok(());
        }
        let sb = self.sort[rb].clone();
        self.parent[rb] = ra;
        if let Some(s) = sb {
            let name = self.slots[a].name.clone();
            self.set_sort(ra, &s, &name, pos)?;
        }
        Ok(())
    }

    fn term(&mut self, t: &RawTerm, scope: &mut Vec<(String, usize)>) -> Result<ITerm, ParseError> {
        match t {
            RawTerm::Name(n, ann, pos) => {
                let slot = if let Some((_, id)) = scope.iter().rev().find(|(m, _)| m == n) {
                    *id
                } else if let Some(id) = self.free.get(n) {
                    *id
                } else if ann.is_none()
                    && self.sig.functions.get(n).is_some_and(|f| f.domain.is_empty())
                {
                    let cod = self.sig.functions[n].codomain.clone();
                    return Ok(ITerm::App(n.clone(), Vec::new(), cod));
                } else {
                    let id = self.new_slot(n, *pos, None);
                    self.free.insert(n.clone(), id);
                    self.free_order.push(id);
                    id
                };
                if let Some(s) = ann {
                    self.set_sort(slot, s, n, *pos)?;
                }
                Ok(ITerm::Slot(slot))
            }
            RawTerm::App(f, args, pos) => {
                let sig = self
                    .sig
                    .functions
                    .get(f)
                    .cloned()
                    .ok_or_else(|| ParseError::typed(*pos, SyntaxError::UnknownFunction(f.clone())))?;
                let args = self.args(f, &sig.domain, args, scope, *pos)?;
                Ok(ITerm::App(f.clone(), args, sig.codomain))
            }
        }
    }

    fn args(
        &mut self,
        symbol: &str,
        domain: &[String],
        args: &[RawTerm],
        scope: &mut Vec<(String, usize)>,
        pos: Pos,
    ) -> Result<Vec<ITerm>, ParseError> {
        if domain.len() != args.len() {
            return Err(ParseError::typed(
                pos,
                SyntaxError::Arity {
                    symbol: symbol.to_string(),
                    expected: domain.len(),
                    found: args.len(),
                },
            ));
        }
        let mut out = Vec::new();
        for (s, a) in domain.iter().zip(args) {
            let t = self.term(a, scope)?;
            self.expect_sort(&t, s, symbol, a.pos())?;
            out.push(t);
        }
        Ok(out)
    }

    fn expect_sort(&mut self, t: &ITerm, s: &str, symbol: &str, pos: Pos) -> Result<(), ParseError> {
        match t {
            ITerm::Slot(id) => self.set_sort(*id, s, symbol, pos),
            ITerm::App(_, _, cod) if cod == s => Ok(()),
            ITerm::App(_, _, cod) => Err(ParseError::typed(
                pos,
                SyntaxError::TypeMismatch {
                    symbol: symbol.to_string(),
                    expected: s.to_string(),
                    found: cod.clone(),
                },
            )),
        }
    }

    fn formula(&mut self, f: &RawFormula, scope: &mut Vec<(String, usize)>) -> Result<IFormula, ParseError> {
        Ok(match f {
            RawFormula::Top => IFormula::Top,
            RawFormula::Bot => IFormula::Bot,
            RawFormula::Rel(r, args, pos) => {
                let dom = self
                    .sig
                    .relations
                    .get(r)
                    .cloned()
                    .ok_or_else(|| ParseError::typed(*pos, SyntaxError::UnknownRelation(r.clone())))?;
                IFormula::Rel(r.clone(), self.args(r, &dom, args, scope, *pos)?)
            }
            RawFormula::Eq(a, b) => {
                let ta = self.term(a, scope)?;
                let tb = self.term(b, scope)?;
                let pos = a.pos();
                match (&ta, &tb) {
                    (ITerm::Slot(x), ITerm::Slot(y)) => self.unify(*x, *y, pos)?,
                    (ITerm::Slot(_), ITerm::App(_, _, s)) => self.expect_sort(&ta, &s.clone(), "=", pos)?,
                    (ITerm::App(_, _, s), _) => self.expect_sort(&tb, &s.clone(), "=", b.pos())?,
                }
                IFormula::Eq(ta, tb)
            }
            RawFormula::And(a, b) => IFormula::And(Box::new(self.formula(a, scope)?), Box::new(self.formula(b, scope)?)),
            RawFormula::Or(a, b) => IFormula::Or(Box::new(self.formula(a, scope)?), Box::new(self.formula(b, scope)?)),
            RawFormula::Not(a) => {
                if !self.classical {
                    return Err(ParseError::typed(Pos::default(), SyntaxError::NotCoherent("~".into())));
                }
                IFormula::Not(Box::new(self.formula(a, scope)?))
            }
            RawFormula::Exists(n, s, body, pos) | RawFormula::Forall(n, s, body, pos) => {
                let is_forall = matches!(f, RawFormula::Forall(..));
                if is_forall && !self.classical {
                    return Err(ParseError::typed(*pos, SyntaxError::NotCoherent("forall".into())));
                }
                let id = self.new_slot(n, *pos, None);
                if let Some(s) = s {
                    self.set_sort(id, s, n, *pos)?;
                }
                scope.push((n.clone(), id));
                let b = self.formula(body, scope)?;
                scope.pop();
                if is_forall {
                    IFormula::Forall(id, Box::new(b))
                } else {
                    IFormula::Exists(id, Box::new(b))
                }
            }
        })
    }

    fn var(&mut self, slot: usize) -> Result<Var, ParseError> {
        let r = self.find(slot);
        let sort = match &self.sort[r] {
            Some(s) => s.clone(),
            None if self.sig.sorts.len() == 1 => {
                let s = self.sig.sorts[0].clone();
                self.sort[r] = Some(s.clone());
                s
            }
            None => {
                return Err(ParseError::at(
                    self.slots[slot].pos,
                    format!("cannot infer the sort of variable {}", self.slots[slot].name),
                ))
            }
        };
        Ok(Var::new(self.slots[slot].name.clone(), sort))
    }

    fn build_term(&mut self, t: &ITerm) -> Result<Term, ParseError> {
        Ok(match t {
            ITerm::Slot(id) => Term::Var(self.var(*id)?),
            ITerm::App(f, args, s) => Term::App {
                fun: f.clone(),
                args: args.iter().map(|a| self.build_term(a)).collect::<Result<_, _>>()?,
                sort: s.clone(),
            },
        })
    }

    fn build(&mut self, f: &IFormula) -> Result<Formula, ParseError> {
        Ok(match f {
            IFormula::Top => Formula::Top,
            IFormula::Bot => Formula::Bot,
            IFormula::Rel(r, args) => Formula::Rel(
                r.clone(),
                args.iter().map(|a| self.build_term(a)).collect::<Result<_, _>>()?,
            ),
            IFormula::Eq(a, b) => Formula::Eq(self.build_term(a)?, self.build_term(b)?),
            IFormula::And(a, b) => Formula::and(self.build(a)?, self.build(b)?),
            IFormula::Or(a, b) => Formula::or(self.build(a)?, self.build(b)?),
            IFormula::Not(a) => Formula::Not(Box::new(self.build(a)?)),
            IFormula::Exists(id, b) => Formula::exists(self.var(*id)?, self.build(b)?),
            IFormula::Forall(id, b) => Formula::Forall(self.var(*id)?, Box::new(self.build(b)?)),
        })
    }

    /// Elaborate a group of formulae sharing their free variables.
    pub fn formulas(mut self, raws: &[&RawFormula]) -> Result<(Vec<Formula>, Vec<Var>), ParseError> {
        let mut items = Vec::new();
        for r in raws {
            items.push(self.formula(r, &mut Vec::new())?);
        }
        let out = items.iter().map(|i| self.build(i)).collect::<Result<Vec<_>, _>>()?;
        let order = self.free_order.clone();
        let free = order.into_iter().map(|id| self.var(id)).collect::<Result<Vec<_>, _>>()?;
        Ok((out, free))
    }
}

pub fn elaborate_formula(sig: &Signature, raw: &RawFormula, ctx: &[Var], classical: bool) -> Result<Formula, ParseError> {
    let (mut fs, _) = Elaborator::new(sig, classical).with_context(ctx).formulas(&[raw])?;
    Ok(fs.remove(0))
}

pub fn elaborate_sequent(sig: &Signature, raw: &RawSequent, classical: bool) -> Result<Sequent, ParseError> {
    let mut all: Vec<&RawFormula> = raw.antecedent.iter().collect();
    all.push(&raw.succedent);
    let (mut fs, _) = Elaborator::new(sig, classical).formulas(&all)?;
    let succedent = fs.pop().expect("succedent present");
    Ok(Sequent::new(fs, succedent))
}

/// Parse a formula in the scope of a signature. Variables in `ctx` have fixed
/// sorts; other free variables are inferred.
pub fn parse_formula(sig: &Signature, text: &str, ctx: &[Var]) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let raw = p.formula()?;
    if !p.at_eof() {
        return p.err("end of formula");
    }
    elaborate_formula(sig, &raw, ctx, false)
}

pub fn parse_sequent(sig: &Signature, text: &str) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text)?;
    let raw = p.sequent()?;
    if !p.at_eof() {
        return p.err("end of sequent");
    }
    elaborate_sequent(sig, &raw, false)
}

/// Elaborate a raw theory; `lookup` resolves the name after `extends`.
pub fn elaborate_theory(raw: &RawTheory, lookup: &dyn Fn(&str) -> Option<Theory>) -> Result<Theory, ParseError> {
    let mut th = match &raw.extends {
        Some(base) => {
            let mut t = lookup(base).ok_or_else(|| ParseError::at(raw.pos, format!("unknown theory {base}")))?;
            t.name = raw.name.clone();
            t
        }
        None => Theory::new(raw.name.clone(), Signature::new()),
    };
    if raw.classical {
        th.mode = Mode::Classical;
    }
    for d in &raw.decls {
        match d {
            RawDecl::Sort(names, pos) => {
                for n in names {
                    th.signature.add_sort(n.clone()).map_err(|e| ParseError::typed(*pos, e))?;
                }
            }
            RawDecl::Rel(n, dom, pos) => th
                .signature
                .add_relation(n.clone(), dom.clone())
                .map_err(|e| ParseError::typed(*pos, e))?,
            RawDecl::Fun(n, dom, cod, pos) => th
                .signature
                .add_function(n.clone(), dom.clone(), cod.clone())
                .map_err(|e| ParseError::typed(*pos, e))?,
            RawDecl::Ax(..) => {}
        }
    }
    for d in &raw.decls {
        if let RawDecl::Ax(n, seq) = d {
            let s = elaborate_sequent(&th.signature, seq, th.mode == Mode::Classical)?;
            th.add_axiom(n.clone(), s).map_err(|e| ParseError::typed(seq.pos, e))?;
        }
    }
    Ok(th)
}

/// Parse text holding a single self-contained theory (the first theory item).
pub fn parse_theory(text: &str) -> Result<Theory, ParseError> {
    let items = parse_document(text)?;
    let raw = items
        .iter()
        .find_map(|i| match i {
            RawItem::Theory(t) => Some(t),
            _ => None,
        })
        .ok_or_else(|| ParseError::at(Pos { line: 1, col: 1 }, "no theory found"))?;
    elaborate_theory(raw, &|_| None)
}

pub fn elaborate_model(raw: &RawModel, theory: &Theory) -> Result<FiniteModel, ParseError> {
    let sig = &theory.signature;
    let mut m = FiniteModel::empty(sig);
    let err = |msg: String| ParseError::at(raw.pos, msg);
    for (s, labels) in &raw.sorts {
        if !sig.has_sort(s) {
            return Err(ParseError::typed(raw.pos, SyntaxError::UnknownSort(s.clone())));
        }
        let mut seen = Vec::new();
        for l in labels {
            if seen.contains(l) {
                return Err(err(format!("duplicate element {l} in sort {s}")));
            }
            seen.push(l.clone());
        }
        m.carriers.insert(s.clone(), seen);
    }
    let index = |m: &FiniteModel, s: &str, l: &str| -> Result<usize, ParseError> {
        m.carriers[s]
            .iter()
            .position(|x| x == l)
            .ok_or_else(|| err(format!("{l} is not an element of sort {s}")))
    };
    for (r, tuples) in &raw.relations {
        let dom = sig
            .relations
            .get(r)
            .ok_or_else(|| ParseError::typed(raw.pos, SyntaxError::UnknownRelation(r.clone())))?;
        for t in tuples {
            if t.len() != dom.len() {
                return Err(err(format!("tuple of wrong length for {r}")));
            }
            let idx = t
                .iter()
                .zip(dom)
                .map(|(l, s)| index(&m, s, l))
                .collect::<Result<Vec<_>, _>>()?;
            m.relations.get_mut(r).expect("initialised").insert(idx);
        }
    }
    for (f, entries) in &raw.functions {
        let fs = sig
            .functions
            .get(f)
            .ok_or_else(|| ParseError::typed(raw.pos, SyntaxError::UnknownFunction(f.clone())))?;
        for (args, val) in entries {
            if args.len() != fs.domain.len() {
                return Err(err(format!("entry of wrong arity for {f}")));
            }
            let idx = args
                .iter()
                .zip(&fs.domain)
                .map(|(l, s)| index(&m, s, l))
                .collect::<Result<Vec<_>, _>>()?;
            let v = index(&m, &fs.codomain, val)?;
            let table = m.functions.get_mut(f).expect("initialised");
            if table.insert(idx, v).is_some_and(|old| old != v) {
                return Err(err(format!("function {f} is not single-valued")));
            }
        }
    }
    m.validate(sig).map_err(|e| err(e.to_string()))?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::alpha_equal;

    #[test]
    fn minimal_theory() {
        let t = parse_theory("theory E { sort s  ax t: |- top }").unwrap();
        assert_eq!(t.signature.sorts.len(), 1);
        assert_eq!(t.axioms.len(), 1);
    }

    #[test]
    fn unknown_relation_is_reported() {
        let e = parse_theory("theory X { ax a: R(x) |- top }").unwrap_err();
        assert!(e.to_string().contains("unknown relation R"), "{e}");
    }

    #[test]
    fn lexical_errors_carry_position() {
        let e = parse_theory("theory X {\n  sort s\n  ax a: $ |- top }").unwrap_err();
        assert_eq!(
            e,
            ParseError::Syntax {
                line: 3,
                col: 9,
                msg: "unexpected character '$'".into()
            }
        );
    }

    #[test]
    fn duplicate_names_rejected() {
        let e = parse_theory("theory X { sort s rel s : s }").unwrap_err();
        assert!(e.to_string().contains("duplicate name s"), "{e}");
    }

    #[test]
    fn sort_inference_through_equality_and_functions() {
        let t = parse_theory(
            "theory M { sort a b  fun f : a -> b  rel R : b
               ax one : x = y, R(f(x)) |- exists z . f(z) = w & R(w) }",
        )
        .unwrap();
        let s = &t.axioms[0].sequent;
        let ctx = s.context();
        let sorts: Vec<&str> = ctx.iter().map(|v| v.sort.as_str()).collect();
        assert_eq!(sorts, vec!["a", "a", "b"]);
    }

    #[test]
    fn ambiguous_sort_is_an_error() {
        let e = parse_theory("theory M { sort a b  ax bad : |- x = y }").unwrap_err();
        assert!(e.to_string().contains("cannot infer the sort"), "{e}");
    }

    #[test]
    fn type_error_names_symbol() {
        let e = parse_theory("theory M { sort a b  rel R : a  fun f : a -> b  ax bad : R(f(x)) |- top }").unwrap_err();
        assert!(e.to_string().contains("type mismatch in R"), "{e}");
    }

    #[test]
    fn constants_resolve_and_annotation_forces_variable() {
        let t = parse_theory("theory T { sort s fun a : -> s  ax k : |- x = a }").unwrap();
        let Formula::Eq(_, rhs) = &t.axioms[0].sequent.succedent else { panic!() };
        assert!(rhs.has_application());
        let t = parse_theory("theory T { sort s fun a : -> s  ax k : |- x = a:s }").unwrap();
        let Formula::Eq(_, rhs) = &t.axioms[0].sequent.succedent else { panic!() };
        assert!(!rhs.has_application());
    }

    #[test]
    fn classical_connectives_need_flag() {
        assert!(parse_theory("theory T { rel P ax k : |- ~P }").is_err());
        let t = parse_theory("theory T classical { sort s rel P : s ax k : |- forall x . ~P(x) | P(x) }").unwrap();
        assert!(t.axioms[0].sequent.is_classical());
    }

    #[test]
    fn formula_parse_matches_constructed() {
        let t = parse_theory("theory EQ { sort s rel A : s s }").unwrap();
        let f = parse_formula(&t.signature, "exists z . A(x, z) & A(z, y)", &[]).unwrap();
        let s = |n: &str| Var::new(n, "s");
        let g = Formula::exists(
            s("w"),
            Formula::and(
                Formula::rel("A", vec![s("x").term(), s("w").term()]),
                Formula::rel("A", vec![s("w").term(), s("y").term()]),
            ),
        );
        assert!(alpha_equal(&f, &g));
    }
}
