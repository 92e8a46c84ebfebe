//! Lexer and recursive-descent parser for `.lib` sources.

use super::DslError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Assign,
    EqEq,
    NotEq,
    Eq,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Colon,
    Semi,
    Comma,
    Arrow,
    FatArrow,
    Star,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: Span,
}

const KEYWORDS: &[&str] = &[
    "values", "locations", "method", "raw", "skip", "read", "write", "cas", "else", "if",
    "choose", "or", "while", "label", "goto", "return", "match", "arg", "init", "final",
];

fn lex(src: &str) -> Result<Vec<Token>, DslError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
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
        if c.is_ascii_alphanumeric() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, len) = match (c, next) {
            (':', Some('=')) => (Tok::Assign, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('=', Some('>')) => (Tok::FatArrow, 2),
            ('!', Some('=')) => (Tok::NotEq, 2),
            ('-', Some('>')) => (Tok::Arrow, 2),
            ('=', _) => (Tok::Eq, 1),
            ('{', _) => (Tok::LBrace, 1),
            ('}', _) => (Tok::RBrace, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (':', _) => (Tok::Colon, 1),
            (';', _) => (Tok::Semi, 1),
            (',', _) => (Tok::Comma, 1),
            ('*', _) => (Tok::Star, 1),
            _ => {
                return Err(DslError::Syntax {
                    line,
                    col,
                    msg: format!("unexpected character `{c}`"),
                })
            }
        };
        out.push(Token { tok, span });
        i += len;
        col += len;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span { line, col },
    });
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Name(String, Span),
    Arg(Span),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Name(_, s) | Expr::Arg(s) => *s,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cond {
    pub lhs: Expr,
    pub rhs: Expr,
    pub eq: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Skip,
    Read { reg: String, loc: String },
    Assign { reg: String, expr: Expr },
    Write { loc: String, expr: Expr },
    Cas { loc: String, expected: Expr, new: Expr, suc: Vec<Stmt>, fail: Vec<Stmt> },
    If { cond: Cond, then: Vec<Stmt>, els: Vec<Stmt> },
    Choose(Vec<Vec<Stmt>>),
    While { cond: Cond, body: Vec<Stmt> },
    Label(String),
    Goto(String),
    Return(Expr),
    Match { expr: Expr, arms: Vec<MatchArm> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchArm {
    /// `None` for the `_` arm.
    pub value: Option<String>,
    pub span: Span,
    pub body: Vec<Stmt>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RawItem {
    /// `init VAL POS`; `None` value means `init * POS`.
    Init { value: Option<String>, pos: String, span: Span },
    Final { value: String, pos: String, span: Span },
    Edge { from: String, to: String, cmd: String, args: Vec<String>, span: Span },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MethodAst {
    Structured { name: String, span: Span, body: Vec<Stmt> },
    Raw { name: String, span: Span, items: Vec<RawItem> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SourceFile {
    pub values: Vec<(String, Span)>,
    pub locations: Vec<(String, String, Span)>,
    pub methods: Vec<MethodAst>,
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.i].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, DslError> {
        let s = self.span();
        Err(DslError::Syntax {
            line: s.line,
            col: s.col,
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            t => format!("{t:?}"),
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<Span, DslError> {
        if *self.peek() == t {
            Ok(self.bump().span)
        } else {
            self.err(format!("expected {what}, found {}", self.describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn expect_kw(&mut self, kw: &str) -> Result<Span, DslError> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.err(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    /// A non-keyword identifier.
    fn name(&mut self, what: &str) -> Result<(String, Span), DslError> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let sp = self.bump().span;
                Ok((s, sp))
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Semi | Tok::Comma) {
            self.bump();
        }
    }

    fn file(&mut self) -> Result<SourceFile, DslError> {
        let mut f = SourceFile::default();
        loop {
            self.skip_separators();
            match self.peek().clone() {
                Tok::Eof => return Ok(f),
                Tok::Ident(k) if k == "values" => {
                    self.bump();
                    self.expect(Tok::Colon, "`:`")?;
                    loop {
                        self.skip_separators();
                        match self.peek() {
                            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                                f.values.push(self.name("value")?);
                            }
                            _ => break,
                        }
                    }
                }
                Tok::Ident(k) if k == "locations" => {
                    self.bump();
                    self.expect(Tok::Colon, "`:`")?;
                    loop {
                        self.skip_separators();
                        match self.peek() {
                            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                                let (l, sp) = self.name("location")?;
                                self.expect(Tok::Eq, "`=` and an initial value")?;
                                let (v, _) = self.name("initial value")?;
                                f.locations.push((l, v, sp));
                            }
                            _ => break,
                        }
                    }
                }
                Tok::Ident(k) if k == "method" => {
                    let span = self.bump().span;
                    let (name, _) = self.name("method name")?;
                    let body = self.block()?;
                    f.methods.push(MethodAst::Structured { name, span, body });
                }
                Tok::Ident(k) if k == "raw" => {
                    let span = self.bump().span;
                    self.expect_kw("method")?;
                    let (name, _) = self.name("method name")?;
                    let items = self.raw_body()?;
                    f.methods.push(MethodAst::Raw { name, span, items });
                }
                _ => {
                    return self.err(format!(
                        "expected `values:`, `locations:`, `method` or `raw method`, found {}",
                        self.describe()
                    ))
                }
            }
        }
    }

    fn raw_body(&mut self) -> Result<Vec<RawItem>, DslError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut items = Vec::new();
        loop {
            self.skip_separators();
            if *self.peek() == Tok::RBrace {
                self.bump();
                return Ok(items);
            }
            let span = self.span();
            if self.is_kw("init") {
                self.bump();
                let value = if *self.peek() == Tok::Star {
                    self.bump();
                    None
                } else {
                    Some(self.name("argument value or `*`")?.0)
                };
                let (pos, _) = self.name("position")?;
                items.push(RawItem::Init { value, pos, span });
            } else if self.is_kw("final") {
                self.bump();
                let (value, _) = self.name("return value")?;
                let (pos, _) = self.name("position")?;
                items.push(RawItem::Final { value, pos, span });
            } else {
                let (from, _) = self.name("position")?;
                self.expect(Tok::Arrow, "`->`")?;
                let (to, _) = self.name("position")?;
                self.expect(Tok::Colon, "`:`")?;
                let cmd = match self.bump().tok {
                    Tok::Ident(s) => s,
                    _ => return self.err("expected a command"),
                };
                let mut args = Vec::new();
                let arity = match cmd.as_str() {
                    "tau" => 0,
                    "read" | "write" => 2,
                    "cas_suc" | "cas_fail" => 3,
                    _ => {
                        return Err(DslError::Syntax {
                            line: span.line,
                            col: span.col,
                            msg: format!("unknown command `{cmd}`"),
                        })
                    }
                };
                for _ in 0..arity {
                    args.push(self.name("command argument")?.0);
                }
                items.push(RawItem::Edge { from, to, cmd, args, span });
            }
        }
    }

    fn block(&mut self) -> Result<Vec<Stmt>, DslError> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out = Vec::new();
        loop {
            self.skip_separators();
            if *self.peek() == Tok::RBrace {
                self.bump();
                return Ok(out);
            }
            if *self.peek() == Tok::Eof {
                return self.err("unclosed block: expected `}`");
            }
            out.push(self.stmt()?);
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        if self.is_kw("arg") {
            return Ok(Expr::Arg(self.bump().span));
        }
        let (n, sp) = self.name("register, value or `arg`")?;
        Ok(Expr::Name(n, sp))
    }

    fn cond(&mut self) -> Result<Cond, DslError> {
        let lhs = self.expr()?;
        let eq = match self.peek() {
            Tok::EqEq => true,
            Tok::NotEq => false,
            _ => return self.err(format!("expected `==` or `!=`, found {}", self.describe())),
        };
        self.bump();
        let rhs = self.expr()?;
        Ok(Cond { lhs, rhs, eq })
    }

    fn stmt(&mut self) -> Result<Stmt, DslError> {
        let span = self.span();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.err(format!("expected a statement, found {}", self.describe())),
        };
        let kind = match kw.as_str() {
            "skip" => {
                self.bump();
                StmtKind::Skip
            }
            "write" => {
                self.bump();
                let (loc, _) = self.name("location")?;
                self.expect(Tok::Assign, "`:=`")?;
                StmtKind::Write { loc, expr: self.expr()? }
            }
            "cas" => {
                self.bump();
                let (loc, _) = self.name("location")?;
                let expected = self.expr()?;
                let new = self.expr()?;
                let suc = self.block()?;
                let fail = self.else_block()?;
                StmtKind::Cas { loc, expected, new, suc, fail }
            }
            "if" => {
                self.bump();
                let paren = *self.peek() == Tok::LParen;
                if paren {
                    self.bump();
                }
                let cond = self.cond()?;
                if paren {
                    self.expect(Tok::RParen, "`)`")?;
                }
                let then = self.block()?;
                let els = self.else_block()?;
                StmtKind::If { cond, then, els }
            }
            "choose" => {
                self.bump();
                let mut branches = vec![self.block()?];
                while self.is_kw("or") {
                    self.bump();
                    branches.push(self.block()?);
                }
                StmtKind::Choose(branches)
            }
            "while" => {
                self.bump();
                let paren = *self.peek() == Tok::LParen;
                if paren {
                    self.bump();
                }
                let cond = self.cond()?;
                if paren {
                    self.expect(Tok::RParen, "`)`")?;
                }
                StmtKind::While { cond, body: self.block()? }
            }
            "label" => {
                self.bump();
                let (l, _) = self.name("label name")?;
                self.expect(Tok::Colon, "`:`")?;
                StmtKind::Label(l)
            }
            "goto" => {
                self.bump();
                StmtKind::Goto(self.name("label name")?.0)
            }
            "return" => {
                self.bump();
                StmtKind::Return(self.expr()?)
            }
            "match" => {
                self.bump();
                let expr = self.expr()?;
                self.expect(Tok::LBrace, "`{`")?;
                let mut arms = Vec::new();
                loop {
                    self.skip_separators();
                    if *self.peek() == Tok::RBrace {
                        self.bump();
                        break;
                    }
                    let aspan = self.span();
                    let value = match self.peek() {
                        Tok::Ident(s) if s == "_" => {
                            self.bump();
                            None
                        }
                        _ => Some(self.name("value or `_`")?.0),
                    };
                    self.expect(Tok::FatArrow, "`=>`")?;
                    let body = self.block()?;
                    arms.push(MatchArm { value, span: aspan, body });
                }
                StmtKind::Match { expr, arms }
            }
            _ if !KEYWORDS.contains(&kw.as_str()) && *self.peek_at(1) == Tok::Assign => {
                let (reg, _) = self.name("register")?;
                self.bump();
                if self.is_kw("read") {
                    self.bump();
                    let (loc, _) = self.name("location")?;
                    StmtKind::Read { reg, loc }
                } else {
                    StmtKind::Assign { reg, expr: self.expr()? }
                }
            }
            _ => return self.err(format!("expected a statement, found {}", self.describe())),
        };
        Ok(Stmt { kind, span })
    }

    fn else_block(&mut self) -> Result<Vec<Stmt>, DslError> {
        if self.is_kw("else") {
            self.bump();
            self.block()
        } else {
            Ok(Vec::new())
        }
    }
}

pub fn parse(src: &str) -> Result<SourceFile, DslError> {
    let toks = lex(src)?;
    Parser { toks, i: 0 }.file()
}
