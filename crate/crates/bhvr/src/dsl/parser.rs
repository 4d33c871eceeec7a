//! Recursive-descent parser.
//!
//! Precedence, loosest first: `?`, then `|||`, then the `;` chain. A `;`
//! chain is a sequence of statements, each optionally a `x <- e` binding
//! whose variable scopes over the rest of the chain. Statement heads and
//! `if` branches sit at primary level, so composite operands there take
//! parentheses — which keeps `a ? b ; c` reading as `a ? (b ; c)`.

use super::ast::{CmpOp, Def, Diag, Expr, ExprKind, Literal, Program, Span};
use super::lexer::{lex, Tok, Token};

pub fn parse(src: &str) -> Result<Program, Diag> {
    let tokens = lex(src)?;
    let mut p = Parser { tokens, pos: 0 };
    let mut defs: Vec<Def> = Vec::new();
    while !p.at_end() {
        let def = p.definition()?;
        if defs.iter().any(|d| d.name == def.name) {
            return Err(Diag::new(
                def.span,
                format!("duplicate definition of `{}`", def.name),
            ));
        }
        defs.push(def);
    }
    Ok(Program { defs })
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.tokens.get(self.pos + 1).map(|t| &t.tok)
    }

    fn span(&self) -> Span {
        self.tokens
            .get(self.pos.min(self.tokens.len().saturating_sub(1)))
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn prev_span(&self) -> Span {
        self.tokens
            .get(self.pos.saturating_sub(1))
            .map(|t| t.span)
            .unwrap_or_default()
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok) -> Result<Span, Diag> {
        match self.advance() {
            Some(t) if t.tok == tok => Ok(t.span),
            Some(t) => Err(Diag::new(
                t.span,
                format!("expected {}, found {}", tok.describe(), t.tok.describe()),
            )),
            None => Err(Diag::new(
                self.prev_span(),
                format!("expected {}, found end of input", tok.describe()),
            )),
        }
    }

    fn ident(&mut self) -> Result<(String, Span), Diag> {
        match self.advance() {
            Some(Token {
                tok: Tok::Ident(name),
                span,
            }) => Ok((name, span)),
            Some(t) => Err(Diag::new(
                t.span,
                format!("expected an identifier, found {}", t.tok.describe()),
            )),
            None => Err(Diag::new(
                self.prev_span(),
                "expected an identifier, found end of input",
            )),
        }
    }

    fn definition(&mut self) -> Result<Def, Diag> {
        let (name, span) = self.ident()?;
        let mut params = Vec::new();
        if self.peek() == Some(&Tok::LParen) {
            self.advance();
            loop {
                let (p, pspan) = self.ident()?;
                if params.contains(&p) {
                    return Err(Diag::new(pspan, format!("duplicate parameter `{p}`")));
                }
                params.push(p);
                match self.advance() {
                    Some(Token { tok: Tok::Comma, .. }) => continue,
                    Some(Token { tok: Tok::RParen, .. }) => break,
                    Some(t) => {
                        return Err(Diag::new(
                            t.span,
                            format!("expected `,` or `)`, found {}", t.tok.describe()),
                        ))
                    }
                    None => {
                        return Err(Diag::new(
                            self.prev_span(),
                            "unterminated parameter list",
                        ))
                    }
                }
            }
        }
        self.expect(Tok::Assign)?;
        let body = self.expr()?;
        Ok(Def {
            name,
            params,
            body,
            span,
        })
    }

    /// expr := par ( `?` par )*      (left-associative)
    fn expr(&mut self) -> Result<Expr, Diag> {
        let mut lhs = self.par_expr()?;
        while self.peek() == Some(&Tok::Question) {
            self.advance();
            let rhs = self.par_expr()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Fallback(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    /// par := chain ( `|||` chain )*  (left-associative)
    fn par_expr(&mut self) -> Result<Expr, Diag> {
        let mut lhs = self.chain()?;
        while self.peek() == Some(&Tok::Par) {
            self.advance();
            let rhs = self.chain()?;
            let span = lhs.span.to(rhs.span);
            lhs = Expr::new(ExprKind::Parallel(Box::new(lhs), Box::new(rhs)), span);
        }
        Ok(lhs)
    }

    /// chain := stmt ( `;` stmt )*, folded right so bound variables scope
    /// over the rest of the chain.
    fn chain(&mut self) -> Result<Expr, Diag> {
        let stmts = {
            let mut stmts = vec![self.stmt()?];
            while self.peek() == Some(&Tok::Semi) {
                self.advance();
                stmts.push(self.stmt()?);
            }
            stmts
        };
        let mut iter = stmts.into_iter().rev();
        let (last_bind, last) = iter.next().expect("at least one statement");
        let mut acc = match last_bind {
            None => last,
            Some((var, vspan)) => {
                return Err(Diag::new(
                    vspan.to(last.span),
                    format!("`{var} <- ...` must be followed by `;` and a continuation"),
                ))
            }
        };
        for (bind, e) in iter {
            let span = e.span.to(acc.span);
            acc = match bind {
                None => Expr::new(ExprKind::Seq(Box::new(e), Box::new(acc)), span),
                Some((var, _)) => Expr::new(
                    ExprKind::Bind {
                        var,
                        value: Box::new(e),
                        body: Box::new(acc),
                    },
                    span,
                ),
            };
        }
        Ok(acc)
    }

    /// stmt := IDENT `<-` primary | primary
    #[allow(clippy::type_complexity)]
    fn stmt(&mut self) -> Result<(Option<(String, Span)>, Expr), Diag> {
        if let (Some(Tok::Ident(_)), Some(Tok::BindArrow)) = (self.peek(), self.peek2()) {
            let (var, vspan) = self.ident()?;
            self.advance(); // <-
            let value = self.primary()?;
            return Ok((Some((var, vspan)), value));
        }
        Ok((None, self.primary()?))
    }

    fn int(&mut self) -> Result<(i64, Span), Diag> {
        match self.advance() {
            Some(Token {
                tok: Tok::Int(n),
                span,
            }) => Ok((n, span)),
            Some(t) => Err(Diag::new(
                t.span,
                format!("expected an integer, found {}", t.tok.describe()),
            )),
            None => Err(Diag::new(self.prev_span(), "expected an integer")),
        }
    }

    fn cmp_op(&mut self) -> Result<CmpOp, Diag> {
        match self.advance() {
            Some(Token { tok, span }) => match tok {
                Tok::Lt => Ok(CmpOp::Lt),
                Tok::Le => Ok(CmpOp::Le),
                Tok::Gt => Ok(CmpOp::Gt),
                Tok::Ge => Ok(CmpOp::Ge),
                Tok::EqEq => Ok(CmpOp::Eq),
                Tok::Ne => Ok(CmpOp::Ne),
                other => Err(Diag::new(
                    span,
                    format!(
                        "expected a comparison operator (< <= > >= == !=), found {}",
                        other.describe()
                    ),
                )),
            },
            None => Err(Diag::new(self.prev_span(), "expected a comparison operator")),
        }
    }

    fn primary(&mut self) -> Result<Expr, Diag> {
        let start = self.span();
        let Some(tok) = self.peek().cloned() else {
            return Err(Diag::new(
                self.prev_span(),
                "expected an expression, found end of input",
            ));
        };
        match tok {
            Tok::LParen => {
                self.advance();
                let inner = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(inner.kind, start.to(end)))
            }
            Tok::If => {
                self.advance();
                let cond = self.expr()?;
                self.expect(Tok::Then)?;
                let then_branch = self.primary()?;
                self.expect(Tok::Else)?;
                let else_branch = self.primary()?;
                let span = start.to(else_branch.span);
                Ok(Expr::new(
                    ExprKind::If {
                        cond: Box::new(cond),
                        then_branch: Box::new(then_branch),
                        else_branch: Box::new(else_branch),
                    },
                    span,
                ))
            }
            Tok::RSelect => {
                self.advance();
                self.expect(Tok::LParen)?;
                let test = self.expr()?;
                self.expect(Tok::Comma)?;
                let left = self.expr()?;
                self.expect(Tok::Comma)?;
                let right = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::RSelect {
                        test: Box::new(test),
                        left: Box::new(left),
                        right: Box::new(right),
                    },
                    start.to(end),
                ))
            }
            Tok::Monitor => {
                self.advance();
                self.expect(Tok::LParen)?;
                let test = self.expr()?;
                self.expect(Tok::Comma)?;
                let recovery = self.expr()?;
                self.expect(Tok::Comma)?;
                let task = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::Monitor {
                        test: Box::new(test),
                        recovery: Box::new(recovery),
                        task: Box::new(task),
                    },
                    start.to(end),
                ))
            }
            Tok::Both => {
                self.advance();
                self.expect(Tok::LParen)?;
                let a = self.expr()?;
                self.expect(Tok::Comma)?;
                let b = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::Both(Box::new(a), Box::new(b)),
                    start.to(end),
                ))
            }
            Tok::Attempt => {
                self.advance();
                self.expect(Tok::LParen)?;
                let (n, nspan) = self.int()?;
                let n = u32::try_from(n)
                    .map_err(|_| Diag::new(nspan, "attempt count must be >= 0"))?;
                self.expect(Tok::Comma)?;
                let body = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::Attempt {
                        n,
                        body: Box::new(body),
                    },
                    start.to(end),
                ))
            }
            Tok::FallbackOver => {
                self.advance();
                self.expect(Tok::LParen)?;
                let list = self.expr()?;
                self.expect(Tok::Comma)?;
                let (func, _) = self.ident()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::FallbackOver {
                        list: Box::new(list),
                        func,
                    },
                    start.to(end),
                ))
            }
            Tok::Cmp => {
                self.advance();
                self.expect(Tok::LParen)?;
                let op = self.cmp_op()?;
                self.expect(Tok::Comma)?;
                let (constant, _) = self.int()?;
                self.expect(Tok::Comma)?;
                let arg = self.expr()?;
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(
                    ExprKind::Cmp {
                        op,
                        constant,
                        arg: Box::new(arg),
                    },
                    start.to(end),
                ))
            }
            Tok::Pure => {
                self.advance();
                self.expect(Tok::LParen)?;
                let lit = match self.peek() {
                    Some(Tok::RParen) => Literal::Unit,
                    Some(Tok::Int(n)) => {
                        let n = *n;
                        self.advance();
                        Literal::Int(n)
                    }
                    Some(Tok::True) => {
                        self.advance();
                        Literal::Bool(true)
                    }
                    Some(Tok::False) => {
                        self.advance();
                        Literal::Bool(false)
                    }
                    _ => {
                        return Err(Diag::new(
                            self.span(),
                            "pure takes (), an integer, or a boolean",
                        ))
                    }
                };
                let end = self.expect(Tok::RParen)?;
                Ok(Expr::new(ExprKind::Pure(lit), start.to(end)))
            }
            Tok::Ident(_) => {
                let (name, nspan) = self.ident()?;
                if self.peek() == Some(&Tok::LParen) {
                    self.advance();
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            match self.peek() {
                                Some(Tok::Comma) => {
                                    self.advance();
                                }
                                _ => break,
                            }
                        }
                    }
                    let end = self.expect(Tok::RParen)?;
                    Ok(Expr::new(ExprKind::Call { name, args }, nspan.to(end)))
                } else {
                    Ok(Expr::new(ExprKind::Var(name), nspan))
                }
            }
            other => Err(Diag::new(
                start,
                format!("expected an expression, found {}", other.describe()),
            )),
        }
    }
}
