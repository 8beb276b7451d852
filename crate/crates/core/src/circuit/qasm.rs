//! OpenQASM 2.0 subset reader.
//!
//! Accepts one `qreg`, any number of `creg`s, applications of the standard
//! library gates, and drops `measure`, `barrier` and `reset` with a warning.
//! Custom gate definitions and classical control are rejected.

use std::fmt;
use std::path::Path;

use super::expr::ExprParser;
use super::{Gate, LogicalCircuit, Operands};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QasmError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `{gate}` takes {expected} qubit(s), got {found}")]
    Arity {
        line: usize,
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: `{gate}` takes {expected} parameter(s), got {found}")]
    ParamCount {
        line: usize,
        gate: String,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: qubit index {index} out of range for register of size {size}")]
    OutOfRange {
        line: usize,
        index: usize,
        size: usize,
    },
    #[error("line {line}: two-qubit gate `{gate}` applied to q[{qubit}] twice")]
    RepeatedOperand {
        line: usize,
        gate: String,
        qubit: usize,
    },
    #[error("line {line}: unsupported three-qubit gate `{gate}`")]
    ThreeQubit { line: usize, gate: String },
    #[error("line {line}: unsupported: {message}")]
    Unsupported { line: usize, message: String },
    #[error("no qreg declaration")]
    NoRegister,
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParseOptions {
    /// Replace every `swap` with three `cx` gates.
    pub expand_swaps: bool,
}

impl Default for ParseOptions {
    fn default() -> Self {
        ParseOptions { expand_swaps: true }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(super) enum Token {
    Ident(String),
    Number(f64),
    Str(String),
    Sym(char),
    Arrow,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Ident(s) => f.write_str(s),
            Token::Number(v) => write!(f, "{v}"),
            Token::Str(s) => write!(f, "\"{s}\""),
            Token::Sym(c) => write!(f, "{c}"),
            Token::Arrow => f.write_str("->"),
        }
    }
}

/// (qubit arity, parameter count) of the supported gates.
fn signature(name: &str) -> Option<(usize, usize)> {
    Some(match name {
        "id" | "x" | "y" | "z" | "h" | "s" | "sdg" | "t" | "tdg" | "sx" | "sxdg" => (1, 0),
        "rx" | "ry" | "rz" | "p" | "u1" => (1, 1),
        "u2" => (1, 2),
        "u3" | "u" | "U" => (1, 3),
        "cx" | "CX" | "cz" | "cy" | "ch" | "swap" => (2, 0),
        "cp" | "cu1" | "crx" | "cry" | "crz" | "rzz" | "rxx" => (2, 1),
        "cu3" => (2, 3),
        "ccx" | "cswap" | "ccz" => (3, 0),
        _ => return None,
    })
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, QasmError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let src = match raw.find("//") {
            Some(cut) => &raw[..cut],
            None => raw,
        };
        let bytes = src.as_bytes();
        let mut pos = 0;
        while pos < bytes.len() {
            let c = bytes[pos] as char;
            if c.is_ascii_whitespace() {
                pos += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let start = pos;
                while pos < bytes.len()
                    && ((bytes[pos] as char).is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                out.push((Token::Ident(src[start..pos].to_string()), line));
            } else if c.is_ascii_digit() || c == '.' {
                let start = pos;
                while pos < bytes.len() && ((bytes[pos] as char).is_ascii_digit() || bytes[pos] == b'.')
                {
                    pos += 1;
                }
                if pos < bytes.len() && (bytes[pos] == b'e' || bytes[pos] == b'E') {
                    let mut look = pos + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        pos = look;
                        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
                            pos += 1;
                        }
                    }
                }
                let lit = &src[start..pos];
                let v: f64 = lit.parse().map_err(|_| QasmError::Syntax {
                    line,
                    message: format!("bad number `{lit}`"),
                })?;
                out.push((Token::Number(v), line));
            } else if c == '"' {
                let rest = &src[pos + 1..];
                let end = rest.find('"').ok_or_else(|| QasmError::Syntax {
                    line,
                    message: "unterminated string".into(),
                })?;
                out.push((Token::Str(rest[..end].to_string()), line));
                pos += end + 2;
            } else if c == '-' && bytes.get(pos + 1) == Some(&b'>') {
                out.push((Token::Arrow, line));
                pos += 2;
            } else if "[](){};,+-*/^".contains(c) {
                out.push((Token::Sym(c), line));
                pos += 1;
            } else if c == '=' && bytes.get(pos + 1) == Some(&b'=') {
                out.push((Token::Sym('='), line));
                pos += 2;
            } else {
                return Err(QasmError::Syntax {
                    line,
                    message: format!("unexpected character `{c}`"),
                });
            }
        }
    }
    Ok(out)
}

struct Register {
    name: String,
    size: usize,
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    options: ParseOptions,
    qreg: Option<Register>,
    circuit: Option<LogicalCircuit>,
    pending_warnings: Vec<(usize, String)>,
}

impl Parser {
    fn line(&self) -> usize {
        self.tokens
            .get(self.pos)
            .or_else(|| self.tokens.last())
            .map(|t| t.1)
            .unwrap_or(1)
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T, QasmError> {
        Err(QasmError::Syntax {
            line: self.line(),
            message: message.into(),
        })
    }

    fn next(&mut self) -> Result<Token, QasmError> {
        match self.tokens.get(self.pos) {
            Some((t, _)) => {
                self.pos += 1;
                Ok(t.clone())
            }
            None => self.syntax("unexpected end of input"),
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), QasmError> {
        match self.next()? {
            Token::Sym(s) if s == c => Ok(()),
            other => {
                self.pos -= 1;
                self.syntax(format!("expected `{c}`, found `{other}`"))
            }
        }
    }

    fn ident(&mut self) -> Result<String, QasmError> {
        match self.next()? {
            Token::Ident(s) => Ok(s),
            other => {
                self.pos -= 1;
                self.syntax(format!("expected identifier, found `{other}`"))
            }
        }
    }

    fn integer(&mut self) -> Result<usize, QasmError> {
        match self.next()? {
            Token::Number(v) if v >= 0.0 && v.fract() == 0.0 => Ok(v as usize),
            other => {
                self.pos -= 1;
                self.syntax(format!("expected non-negative integer, found `{other}`"))
            }
        }
    }

    fn skip_statement(&mut self) -> Result<(), QasmError> {
        loop {
            if let Token::Sym(';') = self.next()? {
                return Ok(());
            }
        }
    }

    fn run(mut self) -> Result<LogicalCircuit, QasmError> {
        while self.pos < self.tokens.len() {
            self.statement()?;
        }
        let mut circuit = self.circuit.ok_or(QasmError::NoRegister)?;
        for (line, message) in self.pending_warnings {
            circuit.push_warning(line, message);
        }
        Ok(circuit)
    }

    fn statement(&mut self) -> Result<(), QasmError> {
        let line = self.line();
        let head = self.ident()?;
        match head.as_str() {
            "OPENQASM" => {
                match self.next()? {
                    Token::Number(v) if (2.0..3.0).contains(&v) => {}
                    other => {
                        return Err(QasmError::Unsupported {
                            line,
                            message: format!("OPENQASM version {other}"),
                        })
                    }
                }
                self.expect_sym(';')
            }
            "include" => {
                match self.next()? {
                    Token::Str(_) => {}
                    other => return self.syntax(format!("expected file name, found `{other}`")),
                }
                self.expect_sym(';')
            }
            "qreg" => {
                let name = self.ident()?;
                self.expect_sym('[')?;
                let size = self.integer()?;
                self.expect_sym(']')?;
                self.expect_sym(';')?;
                if self.qreg.is_some() {
                    return Err(QasmError::Unsupported {
                        line,
                        message: "more than one qreg".into(),
                    });
                }
                self.qreg = Some(Register { name, size });
                self.circuit = Some(LogicalCircuit::new(size));
                Ok(())
            }
            "creg" => self.skip_statement(),
            "measure" | "barrier" | "reset" => {
                self.skip_statement()?;
                self.pending_warnings
                    .push((line, format!("dropped `{head}` statement")));
                Ok(())
            }
            "gate" | "opaque" => Err(QasmError::Unsupported {
                line,
                message: "custom gate definitions".into(),
            }),
            "if" => Err(QasmError::Unsupported {
                line,
                message: "classical control".into(),
            }),
            _ => self.application(line, head),
        }
    }

    fn params(&mut self) -> Result<Vec<f64>, QasmError> {
        if !matches!(self.tokens.get(self.pos), Some((Token::Sym('('), _))) {
            return Ok(Vec::new());
        }
        self.pos += 1;
        let mut params = Vec::new();
        let mut current: Vec<Token> = Vec::new();
        let mut depth = 0usize;
        loop {
            let line = self.line();
            let tok = self.next()?;
            match tok {
                Token::Sym(')') if depth == 0 => {
                    if !(current.is_empty() && params.is_empty()) {
                        params.push(self.eval(line, &current)?);
                    }
                    return Ok(params);
                }
                Token::Sym(',') if depth == 0 => {
                    params.push(self.eval(line, &current)?);
                    current.clear();
                }
                Token::Sym(';') => return self.syntax("unterminated parameter list"),
                Token::Sym('(') => {
                    depth += 1;
                    current.push(tok);
                }
                Token::Sym(')') => {
                    depth -= 1;
                    current.push(tok);
                }
                _ => current.push(tok),
            }
        }
    }

    fn eval(&self, line: usize, tokens: &[Token]) -> Result<f64, QasmError> {
        ExprParser::new(tokens)
            .parse()
            .map_err(|message| QasmError::Syntax { line, message })
    }

    /// One operand: `q[i]` or a bare register name (broadcast).
    fn argument(&mut self, line: usize) -> Result<Option<usize>, QasmError> {
        let name = self.ident()?;
        let reg = self.qreg.as_ref().ok_or(QasmError::Syntax {
            line,
            message: "gate applied before qreg declaration".into(),
        })?;
        if name != reg.name {
            return Err(QasmError::Syntax {
                line,
                message: format!("unknown quantum register `{name}`"),
            });
        }
        let size = reg.size;
        if !matches!(self.tokens.get(self.pos), Some((Token::Sym('['), _))) {
            return Ok(None);
        }
        self.pos += 1;
        let index = self.integer()?;
        self.expect_sym(']')?;
        if index >= size {
            return Err(QasmError::OutOfRange { line, index, size });
        }
        Ok(Some(index))
    }

    fn application(&mut self, line: usize, name: String) -> Result<(), QasmError> {
        let (arity, nparams) = signature(&name).ok_or_else(|| QasmError::Unsupported {
            line,
            message: format!("unknown gate `{name}`"),
        })?;
        let params = self.params()?;
        let mut args = vec![self.argument(line)?];
        while matches!(self.tokens.get(self.pos), Some((Token::Sym(','), _))) {
            self.pos += 1;
            args.push(self.argument(line)?);
        }
        self.expect_sym(';')?;

        if arity == 3 {
            return Err(QasmError::ThreeQubit { line, gate: name });
        }
        if args.len() != arity {
            return Err(QasmError::Arity {
                line,
                gate: name,
                expected: arity,
                found: args.len(),
            });
        }
        if params.len() != nparams {
            return Err(QasmError::ParamCount {
                line,
                gate: name,
                expected: nparams,
                found: params.len(),
            });
        }
        let name = match name.as_str() {
            "CX" => "cx".to_string(),
            "U" => "u".to_string(),
            _ => name,
        };
        let size = self.qreg.as_ref().map(|r| r.size).unwrap_or(0);
        let gates: Vec<Gate> = match (arity, args.as_slice()) {
            (1, [Some(q)]) => vec![Gate::single(name, *q).with_params(params)],
            (1, [None]) => (0..size)
                .map(|q| Gate::single(name.clone(), q).with_params(params.clone()))
                .collect(),
            (2, [Some(a), Some(b)]) => {
                if a == b {
                    return Err(QasmError::RepeatedOperand {
                        line,
                        gate: name,
                        qubit: *a,
                    });
                }
                if name == "swap" && self.options.expand_swaps {
                    self.pending_warnings
                        .push((line, "swap expanded into three cx".into()));
                    vec![Gate::cx(*a, *b), Gate::cx(*b, *a), Gate::cx(*a, *b)]
                } else {
                    vec![Gate {
                        name,
                        params,
                        operands: Operands::Pair(*a, *b),
                    }]
                }
            }
            _ => {
                return Err(QasmError::Unsupported {
                    line,
                    message: format!("register broadcast for two-qubit gate `{name}`"),
                })
            }
        };
        let circuit = self.circuit.as_mut().expect("register declared");
        for g in gates {
            circuit
                .push(g)
                .expect("operands validated against the register");
        }
        Ok(())
    }
}

pub fn parse_qasm(text: &str) -> Result<LogicalCircuit, QasmError> {
    parse_qasm_with(text, ParseOptions::default())
}

pub fn parse_qasm_with(text: &str, options: ParseOptions) -> Result<LogicalCircuit, QasmError> {
    let parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
        options,
        qreg: None,
        circuit: None,
        pending_warnings: Vec::new(),
    };
    parser.run()
}

pub fn load_qasm(path: impl AsRef<Path>) -> Result<LogicalCircuit, QasmError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| QasmError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_qasm(&text)
}
