//! Recursive-descent parser for the set-expression grammar:
//!
//! ```text
//! all | empty | odd | ap(r,m) | val(p,{e,...}) | val(p,ap(a,d),K)
//! | mval((p,{...}),...) | balpha(bits|p/q,K) | squares | pt(t)
//! | rt(t;p1,p2,... | t;default) | taudiv | slice(expr,p)
//! | scale(a,expr) | union(e,...) | inter(e,...) | comp(e)
//! ```
//!
//! Truncated dyadic streams print with a `...` suffix after the digits,
//! and that form parses back.

use crate::error::{Error, Result};
use crate::expr::{RtPrimes, SetExpr};
use crate::measure::ExponentSet;

pub fn parse_expr(text: &str) -> Result<SetExpr> {
    let mut p = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err(format!("unexpected trailing input {:?}", p.rest_token())));
    }
    Ok(e)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: String) -> Error {
        Error::Parse { pos: self.pos, msg }
    }

    fn rest_token(&self) -> String {
        let end = (self.pos + 12).min(self.bytes.len());
        String::from_utf8_lossy(&self.bytes[self.pos..end]).into_owned()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!(
                "expected {:?}, found {:?}",
                c as char,
                self.rest_token()
            )))
        }
    }

    fn try_eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .map_or(false, |c| c.is_ascii_lowercase())
        {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!("expected a name, found {:?}", self.rest_token())));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    /// Raw digit run; leading zeros are significant for dyadic strings.
    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map_or(false, |c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err(format!(
                "expected a number, found {:?}",
                self.rest_token()
            )));
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn number(&mut self) -> Result<u64> {
        let pos = self.pos;
        let text = self.digits()?;
        text.parse().map_err(|_| Error::Parse {
            pos,
            msg: format!("number {text:?} does not fit in 64 bits"),
        })
    }

    fn number_u32(&mut self) -> Result<u32> {
        let pos = self.pos;
        let n = self.number()?;
        u32::try_from(n).map_err(|_| Error::Parse {
            pos,
            msg: format!("{n} is too large here"),
        })
    }

    /// `{e1,e2,...}` or `ap(a,d),K`.
    fn exponent_set(&mut self) -> Result<ExponentSet> {
        self.skip_ws();
        if self.try_eat(b'{') {
            let mut elems = Vec::new();
            self.skip_ws();
            if !self.try_eat(b'}') {
                loop {
                    elems.push(self.number_u32()?);
                    if self.try_eat(b'}') {
                        break;
                    }
                    self.eat(b',')?;
                }
            }
            return ExponentSet::explicit(elems);
        }
        let pos = self.pos;
        let name = self.ident()?;
        if name != "ap" {
            return Err(Error::Parse {
                pos,
                msg: format!("expected {{...}} or ap(a,d), found {name:?}"),
            });
        }
        self.eat(b'(')?;
        let start = self.number_u32()?;
        self.eat(b',')?;
        let step = self.number_u32()?;
        self.eat(b')')?;
        self.eat(b',')?;
        let trunc = self.number()? as usize;
        ExponentSet::progression(start, step, trunc)
    }

    fn expr_list(&mut self) -> Result<Vec<SetExpr>> {
        self.eat(b'(')?;
        let mut parts = vec![self.expr()?];
        while self.try_eat(b',') {
            parts.push(self.expr()?);
        }
        self.eat(b')')?;
        Ok(parts)
    }

    fn expr(&mut self) -> Result<SetExpr> {
        self.skip_ws();
        let pos = self.pos;
        let name = self.ident()?;
        let lift = |r: Result<SetExpr>| {
            r.map_err(|e| match e {
                Error::Parse { .. } => e,
                other => Error::Parse {
                    pos,
                    msg: other.to_string(),
                },
            })
        };
        match name.as_str() {
            "all" => Ok(SetExpr::All),
            "empty" => Ok(SetExpr::Empty),
            "odd" => Ok(SetExpr::Odd),
            "squares" => Ok(SetExpr::Squares),
            "taudiv" => Ok(SetExpr::TauDivides),
            "ap" => {
                self.eat(b'(')?;
                let r = self.number()?;
                self.eat(b',')?;
                let m = self.number()?;
                self.eat(b')')?;
                lift(SetExpr::ap(r, m))
            }
            "val" => {
                self.eat(b'(')?;
                let p = self.number()?;
                self.eat(b',')?;
                let exps = self.exponent_set()?;
                self.eat(b')')?;
                lift(SetExpr::valuation(p, exps))
            }
            "mval" => {
                self.eat(b'(')?;
                let mut parts = Vec::new();
                loop {
                    self.eat(b'(')?;
                    let p = self.number()?;
                    self.eat(b',')?;
                    let exps = self.exponent_set()?;
                    self.eat(b')')?;
                    parts.push((p, exps));
                    if !self.try_eat(b',') {
                        break;
                    }
                }
                self.eat(b')')?;
                lift(SetExpr::multi_valuation(parts))
            }
            "balpha" => {
                self.eat(b'(')?;
                let first = self.digits()?;
                let expr = if self.try_eat(b'/') {
                    let num: u64 = first.parse().map_err(|_| Error::Parse {
                        pos,
                        msg: format!("numerator {first:?} does not fit in 64 bits"),
                    })?;
                    let den = self.number()?;
                    self.eat(b',')?;
                    let k = self.number()? as usize;
                    self.eat(b')')?;
                    lift(SetExpr::balpha_rational(num, den, k))?
                } else {
                    let truncated = self.try_eat(b'.') && {
                        self.eat(b'.')?;
                        self.eat(b'.')?;
                        true
                    };
                    self.eat(b',')?;
                    let k = self.number()? as usize;
                    self.eat(b')')?;
                    if k < first.len() {
                        return Err(Error::Parse {
                            pos,
                            msg: format!(
                                "digit count {k} is smaller than the {} given digits",
                                first.len()
                            ),
                        });
                    }
                    if k > 63 {
                        return Err(Error::Parse {
                            pos,
                            msg: "digit count must be <= 63".into(),
                        });
                    }
                    let padded: String = {
                        let mut s = first.clone();
                        while s.len() < k {
                            s.push('0');
                        }
                        s
                    };
                    let base = lift(SetExpr::balpha_bits(&padded))?;
                    if truncated {
                        match base {
                            SetExpr::BAlpha { mut digits, .. } => {
                                digits.resize(k, false);
                                SetExpr::BAlpha {
                                    digits,
                                    truncated: true,
                                }
                            }
                            _ => unreachable!(),
                        }
                    } else {
                        base
                    }
                };
                Ok(expr)
            }
            "pt" => {
                self.eat(b'(')?;
                let t = self.number_u32()?;
                self.eat(b')')?;
                Ok(SetExpr::pt(t))
            }
            "rt" => {
                self.eat(b'(')?;
                let t = self.number_u32()?;
                self.eat(b';')?;
                self.skip_ws();
                let primes = if self.peek().map_or(false, |c| c.is_ascii_digit()) {
                    let mut list = vec![self.number()?];
                    while self.try_eat(b',') {
                        list.push(self.number()?);
                    }
                    lift_primes(pos, RtPrimes::explicit(list))?
                } else {
                    let kw = self.ident()?;
                    if kw != "default" {
                        return Err(Error::Parse {
                            pos,
                            msg: format!("expected a prime list or 'default', found {kw:?}"),
                        });
                    }
                    RtPrimes::Default
                };
                self.eat(b')')?;
                Ok(SetExpr::rt(t, primes))
            }
            "slice" => {
                self.eat(b'(')?;
                let inner = self.expr()?;
                self.eat(b',')?;
                let p = self.number()?;
                self.eat(b')')?;
                lift(SetExpr::p_slice(inner, p))
            }
            "scale" => {
                self.eat(b'(')?;
                let a = self.number()?;
                self.eat(b',')?;
                let inner = self.expr()?;
                self.eat(b')')?;
                lift(SetExpr::scale(a, inner))
            }
            "union" => Ok(SetExpr::union(self.expr_list()?)),
            "inter" => Ok(SetExpr::intersect(self.expr_list()?)),
            "comp" => {
                self.eat(b'(')?;
                let inner = self.expr()?;
                self.eat(b')')?;
                Ok(SetExpr::complement(inner))
            }
            other => Err(Error::Parse {
                pos,
                msg: format!("unknown set constructor {other:?}"),
            }),
        }
    }
}

fn lift_primes(pos: usize, r: Result<RtPrimes>) -> Result<RtPrimes> {
    r.map_err(|e| Error::Parse {
        pos,
        msg: e.to_string(),
    })
}
