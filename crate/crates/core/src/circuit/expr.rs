//! Constant parameter expressions such as `pi/4` or `-2*pi/3`.

use super::qasm::Token;

pub(super) struct ExprParser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> ExprParser<'a> {
    pub(super) fn new(tokens: &'a [Token]) -> Self {
        ExprParser { tokens, pos: 0 }
    }

    pub(super) fn parse(mut self) -> Result<f64, String> {
        if self.tokens.is_empty() {
            return Err("empty parameter expression".into());
        }
        let v = self.sum()?;
        if self.pos != self.tokens.len() {
            return Err(format!("unexpected `{}` in expression", self.tokens[self.pos]));
        }
        if !v.is_finite() {
            return Err("parameter expression is not finite".into());
        }
        Ok(v)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_sym(&mut self, s: char) -> bool {
        if matches!(self.peek(), Some(Token::Sym(c)) if *c == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<f64, String> {
        let mut v = self.product()?;
        loop {
            if self.eat_sym('+') {
                v += self.product()?;
            } else if self.eat_sym('-') {
                v -= self.product()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn product(&mut self) -> Result<f64, String> {
        let mut v = self.unary()?;
        loop {
            if self.eat_sym('*') {
                v *= self.unary()?;
            } else if self.eat_sym('/') {
                v /= self.unary()?;
            } else {
                return Ok(v);
            }
        }
    }

    fn unary(&mut self) -> Result<f64, String> {
        if self.eat_sym('-') {
            return Ok(-self.unary()?);
        }
        if self.eat_sym('+') {
            return self.unary();
        }
        self.power()
    }

    // right-associative, binds tighter than unary minus on its left
    fn power(&mut self) -> Result<f64, String> {
        let base = self.atom()?;
        if self.eat_sym('^') {
            let exp = self.unary()?;
            return Ok(base.powf(exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<f64, String> {
        let tok = self
            .peek()
            .cloned()
            .ok_or_else(|| "expression ends early".to_string())?;
        self.pos += 1;
        match tok {
            Token::Number(v) => Ok(v),
            Token::Sym('(') => {
                let v = self.sum()?;
                if !self.eat_sym(')') {
                    return Err("missing `)` in expression".into());
                }
                Ok(v)
            }
            Token::Ident(name) if name == "pi" => Ok(std::f64::consts::PI),
            Token::Ident(name) => {
                let f: fn(f64) -> f64 = match name.as_str() {
                    "sin" => f64::sin,
                    "cos" => f64::cos,
                    "tan" => f64::tan,
                    "exp" => f64::exp,
                    "ln" => f64::ln,
                    "sqrt" => f64::sqrt,
                    _ => return Err(format!("unknown identifier `{name}` in expression")),
                };
                if !self.eat_sym('(') {
                    return Err(format!("expected `(` after `{name}`"));
                }
                let v = self.sum()?;
                if !self.eat_sym(')') {
                    return Err("missing `)` in expression".into());
                }
                Ok(f(v))
            }
            other => Err(format!("unexpected `{other}` in expression")),
        }
    }
}
