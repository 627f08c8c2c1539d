//! Reader for the surface syntax.
//!
//! Programs are sequences of parenthesized statements; `;` starts a comment
//! that runs to end of line. Symbols are case-sensitive. The reader enforces
//! grammatical shape (including arity and concept-vs-role positions that are
//! visible syntactically); name resolution happens later against the
//! terminology.

use crate::certainty::Certainty;
use crate::error::{ParseError, Pos};
use crate::term::{Arg, DefaultSpec, Literal, Pattern, RuleMode, RuleSpec, Statement, Sym, TermExpr};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    LParen,
    RParen,
    LBracket,
    RBracket,
    Keyword(String),
    Symbol(String),
    Number(f64, bool), // value, written-as-integer
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: Pos,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = src.chars().peekable();

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, col };
        match c {
            '\n' => {
                chars.next();
                line += 1;
                col = 1;
            }
            c if c.is_whitespace() => {
                chars.next();
                col += 1;
            }
            ';' => {
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    chars.next();
                    col += 1;
                }
            }
            '(' | ')' | '[' | ']' => {
                chars.next();
                col += 1;
                out.push(Token {
                    tok: match c {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        _ => Tok::RBracket,
                    },
                    pos,
                });
            }
            _ => {
                let mut word = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '[' | ']' | ';') {
                        break;
                    }
                    word.push(c);
                    chars.next();
                    col += 1;
                }
                let first = word.chars().next().unwrap();
                let tok = if first == ':' {
                    if word.len() == 1 {
                        return Err(ParseError::Syntax { pos, msg: "bare `:`".into() });
                    }
                    Tok::Keyword(word[1..].to_string())
                } else if matches!(first, '0'..='9' | '.' | '-' | '+') && word.parse::<f64>().is_ok()
                {
                    let n: f64 = word.parse().unwrap();
                    let is_int = !word.contains(['.', 'e', 'E']);
                    Tok::Number(n, is_int)
                } else if matches!(first, '0'..='9' | '.') {
                    return Err(ParseError::Syntax {
                        pos,
                        msg: format!("`{word}` is not a number or a valid symbol"),
                    });
                } else {
                    Tok::Symbol(word)
                };
                out.push(Token { tok, pos });
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at)
    }

    fn pos(&self) -> Pos {
        self.toks
            .get(self.at)
            .or_else(|| self.toks.last())
            .map(|t| t.pos)
            .unwrap_or(Pos { line: 1, col: 1 })
    }

    fn next(&mut self, want: &str) -> Result<Token, ParseError> {
        let pos = self.pos();
        match self.toks.get(self.at) {
            Some(t) => {
                self.at += 1;
                Ok(t.clone())
            }
            None => Err(ParseError::Syntax {
                pos,
                msg: format!("expected {want}, found end of input"),
            }),
        }
    }

    fn expect_lparen(&mut self, ctx: &str) -> Result<Pos, ParseError> {
        let t = self.next(&format!("`(` to open {ctx}"))?;
        if t.tok == Tok::LParen {
            Ok(t.pos)
        } else {
            Err(ParseError::Syntax {
                pos: t.pos,
                msg: format!("expected `(` to open {ctx}"),
            })
        }
    }

    fn expect_rparen(&mut self, ctx: &str) -> Result<(), ParseError> {
        let t = self.next(&format!("`)` to close {ctx}"))?;
        if t.tok == Tok::RParen {
            Ok(())
        } else {
            Err(ParseError::Arity {
                pos: t.pos,
                msg: format!("too many items in {ctx}"),
            })
        }
    }

    fn symbol(&mut self, what: &str) -> Result<(Sym, Pos), ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Symbol(s) => Ok((Sym::new(&s), t.pos)),
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn ground_symbol(&mut self, what: &str) -> Result<Sym, ParseError> {
        let (s, pos) = self.symbol(what)?;
        if s.is_variable() {
            return Err(ParseError::Sort {
                pos,
                msg: format!("variable `{s}` is not allowed here"),
            });
        }
        Ok(s)
    }

    fn number(&mut self, what: &str) -> Result<(f64, bool, Pos), ParseError> {
        let t = self.next(what)?;
        match t.tok {
            Tok::Number(n, is_int) => Ok((n, is_int, t.pos)),
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                msg: format!("expected {what}"),
            }),
        }
    }

    fn cardinality(&mut self) -> Result<u32, ParseError> {
        let (n, is_int, pos) = self.number("a nonnegative integer")?;
        if !is_int || n < 0.0 || n.fract() != 0.0 || n > u32::MAX as f64 {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("`{n}` is not a nonnegative integer"),
            });
        }
        Ok(n as u32)
    }

    fn unit_number(&mut self, what: &str) -> Result<f64, ParseError> {
        let (n, _, pos) = self.number(what)?;
        if !(0.0..=1.0).contains(&n) {
            return Err(ParseError::Syntax {
                pos,
                msg: format!("{what} must lie in [0, 1], got {n}"),
            });
        }
        Ok(n)
    }

    /// `NUM` or `[NUM NUM]`.
    fn certainty(&mut self) -> Result<Certainty, ParseError> {
        let pos = self.pos();
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::LBracket)) {
            self.next("certainty interval")?;
            let lo = self.unit_number("a certainty bound")?;
            let hi = self.unit_number("a certainty bound")?;
            let t = self.next("`]` to close the interval")?;
            if t.tok != Tok::RBracket {
                return Err(ParseError::Arity {
                    pos: t.pos,
                    msg: "a certainty interval holds exactly two numbers".into(),
                });
            }
            Certainty::new(lo, hi).map_err(|e| ParseError::Syntax {
                pos,
                msg: e.to_string(),
            })
        } else {
            let d = self.unit_number("a certainty degree")?;
            Ok(Certainty::from_degree(d).unwrap())
        }
    }

    /// Role expressions: `NAME | (:and rexpr+)`.
    fn rexpr(&mut self) -> Result<TermExpr, ParseError> {
        let t = self.next("a role expression")?;
        match t.tok {
            Tok::Symbol(s) => {
                let s = Sym::new(&s);
                if s.is_variable() {
                    return Err(ParseError::Sort {
                        pos: t.pos,
                        msg: format!("variable `{s}` is not allowed in a role expression"),
                    });
                }
                Ok(TermExpr::Ref(s))
            }
            Tok::LParen => {
                let h = self.next("a role operator")?;
                match h.tok {
                    Tok::Keyword(k) if k == "and" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen) | None) {
                            parts.push(self.rexpr()?);
                        }
                        self.expect_rparen("(:and ...)")?;
                        if parts.len() < 2 {
                            return Err(ParseError::Arity {
                                pos: t.pos,
                                msg: "(:and ...) needs at least two parts".into(),
                            });
                        }
                        Ok(TermExpr::RoleAnd(parts))
                    }
                    Tok::Keyword(k) if k == "primitive" => {
                        self.expect_rparen("(:primitive)")?;
                        Ok(TermExpr::PrimitiveMarker)
                    }
                    Tok::Keyword(k) if matches!(k.as_str(), "all" | "at-least" | "at-most") => {
                        Err(ParseError::Sort {
                            pos: h.pos,
                            msg: format!("`:{k}` is a concept form; a role expression is expected here"),
                        })
                    }
                    _ => Err(ParseError::Syntax {
                        pos: h.pos,
                        msg: "expected a role operator".into(),
                    }),
                }
            }
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                msg: "expected a role expression".into(),
            }),
        }
    }

    /// Concept expressions.
    fn cexpr(&mut self) -> Result<TermExpr, ParseError> {
        let t = self.next("a concept expression")?;
        match t.tok {
            Tok::Symbol(s) => {
                let s = Sym::new(&s);
                if s.is_variable() {
                    return Err(ParseError::Sort {
                        pos: t.pos,
                        msg: format!("variable `{s}` is not allowed in a concept expression"),
                    });
                }
                Ok(TermExpr::Ref(s))
            }
            Tok::LParen => {
                let h = self.next("a concept operator")?;
                let kw = match h.tok {
                    Tok::Keyword(k) => k,
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: h.pos,
                            msg: "expected a concept operator".into(),
                        })
                    }
                };
                match kw.as_str() {
                    "primitive" => {
                        self.expect_rparen("(:primitive)")?;
                        Ok(TermExpr::PrimitiveMarker)
                    }
                    "and" => {
                        let mut parts = Vec::new();
                        while !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen) | None) {
                            parts.push(self.cexpr()?);
                        }
                        self.expect_rparen("(:and ...)")?;
                        if parts.len() < 2 {
                            return Err(ParseError::Arity {
                                pos: t.pos,
                                msg: "(:and ...) needs at least two parts".into(),
                            });
                        }
                        Ok(TermExpr::ConceptAnd(parts))
                    }
                    "all" => {
                        let role = self.rexpr()?;
                        let filler = self.cexpr()?;
                        self.expect_rparen("(:all ...)")?;
                        Ok(TermExpr::All(Box::new(role), Box::new(filler)))
                    }
                    "at-least" | "at-most" => {
                        let n = self.cardinality()?;
                        let role = self.rexpr()?;
                        self.expect_rparen("a number restriction")?;
                        Ok(if kw == "at-least" {
                            TermExpr::AtLeast(n, Box::new(role))
                        } else {
                            TermExpr::AtMost(n, Box::new(role))
                        })
                    }
                    other => Err(ParseError::Syntax {
                        pos: h.pos,
                        msg: format!("unknown concept operator `:{other}`"),
                    }),
                }
            }
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                msg: "expected a concept expression".into(),
            }),
        }
    }

    fn arg(&mut self, allow_vars: bool) -> Result<Arg, ParseError> {
        let (s, pos) = self.symbol("an instance")?;
        if s.is_variable() {
            if allow_vars {
                Ok(Arg::Var(s))
            } else {
                Err(ParseError::Sort {
                    pos,
                    msg: format!("variable `{s}` is not allowed here"),
                })
            }
        } else {
            Ok(Arg::Const(s))
        }
    }

    /// `(NAME INSTANCE)` or `(NAME INSTANCE INSTANCE)`, already past the `(`.
    fn pattern_body(&mut self, head: Sym, open: Pos, allow_vars: bool) -> Result<Pattern, ParseError> {
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen) | None) {
            return Err(ParseError::Arity {
                pos: open,
                msg: "a literal takes one or two instances".into(),
            });
        }
        let first = self.arg(allow_vars)?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen)) {
            self.next("`)`")?;
            return Ok(Pattern::Concept(head, first));
        }
        let second = self.arg(allow_vars)?;
        match self.next("`)` to close the literal")? {
            Token { tok: Tok::RParen, .. } => Ok(Pattern::Role(head, first, second)),
            Token { pos, .. } => Err(ParseError::Arity {
                pos,
                msg: "a literal takes one or two instances".into(),
            }),
        }
    }

    fn pattern(&mut self, allow_vars: bool) -> Result<Pattern, ParseError> {
        let open = self.expect_lparen("a literal")?;
        let (head, pos) = self.symbol("a predicate name")?;
        if head.is_variable() {
            return Err(ParseError::Sort {
                pos,
                msg: "a predicate position cannot hold a variable".into(),
            });
        }
        self.pattern_body(head, open, allow_vars)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        // pattern(false) rejects variables, so the conversion cannot fail
        Ok(self.pattern(false)?.as_literal().unwrap())
    }

    /// `literal | (:and literal+)` inside a rule body.
    fn conjunction(&mut self) -> Result<Vec<Pattern>, ParseError> {
        let open = self.expect_lparen("a literal or conjunction")?;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Keyword(k)) if k == "and") {
            self.next(":and")?;
            let mut parts = Vec::new();
            while !matches!(self.peek().map(|t| &t.tok), Some(Tok::RParen) | None) {
                parts.push(self.pattern(true)?);
            }
            self.expect_rparen("(:and ...)")?;
            if parts.is_empty() {
                return Err(ParseError::Arity {
                    pos: open,
                    msg: "(:and ...) needs at least one literal".into(),
                });
            }
            Ok(parts)
        } else {
            let (head, pos) = self.symbol("a predicate name")?;
            if head.is_variable() {
                return Err(ParseError::Sort {
                    pos,
                    msg: "a predicate position cannot hold a variable".into(),
                });
            }
            Ok(vec![self.pattern_body(head, open, true)?])
        }
    }

    fn keyword(&mut self, want: &str) -> Result<(), ParseError> {
        let t = self.next(&format!("`:{want}`"))?;
        match t.tok {
            Tok::Keyword(k) if k == want => Ok(()),
            _ => Err(ParseError::Syntax {
                pos: t.pos,
                msg: format!("expected `:{want}`"),
            }),
        }
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        self.expect_lparen("a statement")?;
        let (head, hpos) = match self.next("a statement head")? {
            Token { tok: Tok::Symbol(s), pos } => (s, pos),
            Token { pos, .. } => {
                return Err(ParseError::Syntax {
                    pos,
                    msg: "expected a statement head".into(),
                })
            }
        };
        match head.as_str() {
            "defconcept" => {
                let name = self.ground_symbol("a concept name")?;
                let body = self.cexpr()?;
                self.expect_rparen("(defconcept ...)")?;
                Ok(Statement::DefConcept(name, body))
            }
            "defrelation" => {
                let name = self.ground_symbol("a relation name")?;
                let body = match self.peek().map(|t| t.tok.clone()) {
                    Some(Tok::Keyword(k)) if k == "primitive" => {
                        self.next(":primitive")?;
                        None
                    }
                    _ => {
                        let e = self.rexpr()?;
                        match e {
                            TermExpr::PrimitiveMarker => None,
                            other => Some(other),
                        }
                    }
                };
                self.expect_rparen("(defrelation ...)")?;
                Ok(Statement::DefRelation(name, body))
            }
            "defrule" => {
                let name = self.ground_symbol("a rule name")?;
                self.keyword("if")?;
                let antecedent = self.conjunction()?;
                self.keyword("then")?;
                let consequent = self.pattern(true)?;
                let t = self.next("a rule mode keyword")?;
                let mode = match t.tok {
                    Tok::Keyword(k) if k == "sufficiency" => RuleMode::Possibilistic {
                        sufficiency: self.certainty()?,
                    },
                    Tok::Keyword(k) if k == "prob-given" => {
                        let given = self.certainty()?;
                        self.keyword("prob-given-not")?;
                        let given_not = self.certainty()?;
                        RuleMode::Probabilistic { given, given_not }
                    }
                    _ => {
                        return Err(ParseError::Syntax {
                            pos: t.pos,
                            msg: "expected `:sufficiency` or `:prob-given`".into(),
                        })
                    }
                };
                self.expect_rparen("(defrule ...)")?;
                Ok(Statement::DefRule(RuleSpec { name, antecedent, consequent, mode }))
            }
            "defdefault" => {
                let name = self.ground_symbol("a rule name")?;
                self.keyword("unless")?;
                let unless = self.literal()?;
                self.keyword("threshold")?;
                let threshold = self.unit_number("a threshold")?;
                self.keyword("then")?;
                let then = self.literal()?;
                let degree = self.unit_number("a default degree")?;
                self.expect_rparen("(defdefault ...)")?;
                Ok(Statement::DefDefault(DefaultSpec { name, unless, threshold, then, degree }))
            }
            "tell" => {
                // (tell (Lit x)) or (tell ((Lit x) certainty))
                let open = self.expect_lparen("a fact")?;
                let stmt = if matches!(self.peek().map(|t| &t.tok), Some(Tok::LParen)) {
                    let lit = self.literal()?;
                    let c = self.certainty()?;
                    self.expect_rparen("the fact")?;
                    Statement::Tell(lit, Some(c))
                } else {
                    let (head, pos) = self.symbol("a predicate name")?;
                    if head.is_variable() {
                        return Err(ParseError::Sort {
                            pos,
                            msg: "a predicate position cannot hold a variable".into(),
                        });
                    }
                    let p = self.pattern_body(head, open, false)?;
                    Statement::Tell(p.as_literal().unwrap(), None)
                };
                self.expect_rparen("(tell ...)")?;
                Ok(stmt)
            }
            "forget" => {
                let lit = self.literal()?;
                self.expect_rparen("(forget ...)")?;
                Ok(Statement::Forget(lit))
            }
            "ask" => {
                let lit = self.literal()?;
                self.expect_rparen("(ask ...)")?;
                Ok(Statement::Ask(lit))
            }
            "close-role" => {
                let inst = self.ground_symbol("an instance")?;
                let role = self.ground_symbol("a role name")?;
                self.expect_rparen("(close-role ...)")?;
                Ok(Statement::CloseRole(inst, role))
            }
            other => Err(ParseError::Syntax {
                pos: hpos,
                msg: format!("unknown statement `{other}`"),
            }),
        }
    }
}

/// Parse a whole program: zero or more statements.
pub fn parse_program(src: &str) -> Result<Vec<Statement>, ParseError> {
    Ok(parse_program_spanned(src)?.into_iter().map(|(_, s)| s).collect())
}

/// Like [`parse_program`], but each statement carries the source line it
/// starts on, for front ends that report positions against a file.
pub fn parse_program_spanned(src: &str) -> Result<Vec<(usize, Statement)>, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    let mut out = Vec::new();
    while p.peek().is_some() {
        let line = p.pos().line;
        out.push((line, p.statement()?));
    }
    Ok(out)
}

/// Parse exactly one statement.
pub fn parse_statement(src: &str) -> Result<Statement, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0 };
    let stmt = p.statement()?;
    if let Some(t) = p.peek() {
        return Err(ParseError::Syntax {
            pos: t.pos,
            msg: "trailing input after statement".into(),
        });
    }
    Ok(stmt)
}
