//! Clause store with DIMACS-style literals and per-family bookkeeping.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

/// Nonzero DIMACS literal: `v` or `-v` for variable `v >= 1`.
pub type Lit = i32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Injective,
    Consistency,
    Dependency,
    Swap,
    Transformation,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Injective,
        Family::Consistency,
        Family::Dependency,
        Family::Swap,
        Family::Transformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Injective => "injective",
            Family::Consistency => "consistency",
            Family::Dependency => "dependency",
            Family::Swap => "swap",
            Family::Transformation => "transformation",
        }
    }

    fn slot(self) -> usize {
        self as usize
    }
}

/// Per-family totals in [`Family::ALL`] order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FamilyCounts(pub [usize; 5]);

impl FamilyCounts {
    pub fn get(&self, f: Family) -> usize {
        self.0[f.slot()]
    }

    pub fn total(&self) -> usize {
        self.0.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Family, usize)> + '_ {
        Family::ALL.iter().map(|&f| (f, self.get(f)))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    clauses_by_family: FamilyCounts,
    constraints_by_family: FamilyCounts,
}

impl Cnf {
    pub fn new() -> Self {
        Cnf::default()
    }

    pub fn new_var(&mut self) -> Lit {
        self.num_vars += 1;
        self.num_vars as Lit
    }

    pub fn new_vars(&mut self, n: usize) -> Vec<Lit> {
        (0..n).map(|_| self.new_var()).collect()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn clauses_by_family(&self) -> FamilyCounts {
        self.clauses_by_family
    }

    pub fn constraints_by_family(&self) -> FamilyCounts {
        self.constraints_by_family
    }

    /// Counts one logical constraint; its clauses are added separately.
    pub fn constraint(&mut self, family: Family) {
        self.constraints_by_family.0[family.slot()] += 1;
    }

    pub fn clause(&mut self, family: Family, lits: Vec<Lit>) {
        debug_assert!(lits
            .iter()
            .all(|&l| l != 0 && l.unsigned_abs() <= self.num_vars));
        self.clauses_by_family.0[family.slot()] += 1;
        self.clauses.push(lits);
    }

    /// Pairwise at-most-one.
    pub fn at_most_one(&mut self, family: Family, lits: &[Lit]) {
        for (i, &a) in lits.iter().enumerate() {
            for &b in &lits[i + 1..] {
                self.clause(family, vec![-a, -b]);
            }
        }
    }

    pub fn exactly_one(&mut self, family: Family, lits: &[Lit]) {
        self.constraint(family);
        self.clause(family, lits.to_vec());
        self.at_most_one(family, lits);
    }

    pub fn to_dimacs(&self) -> String {
        self.to_dimacs_with(&[])
    }

    /// DIMACS text with `assumptions` appended as unit clauses.
    pub fn to_dimacs_with(&self, assumptions: &[Lit]) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "p cnf {} {}",
            self.num_vars,
            self.clauses.len() + assumptions.len()
        );
        for c in self
            .clauses
            .iter()
            .map(Vec::as_slice)
            .chain(assumptions.iter().map(std::slice::from_ref))
        {
            for l in c {
                let _ = write!(out, "{l} ");
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn write_dimacs(&self, path: impl AsRef<Path>) -> io::Result<()> {
        let mut f = io::BufWriter::new(std::fs::File::create(path)?);
        f.write_all(self.to_dimacs().as_bytes())?;
        f.flush()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DimacsError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses, found {found}")]
    ClauseCount { declared: usize, found: usize },
}

/// Parses DIMACS CNF into `(num_vars, clauses)`.
pub fn parse_dimacs(text: &str) -> Result<(u32, Vec<Vec<Lit>>), DimacsError> {
    let mut header: Option<(u32, usize)> = None;
    let mut clauses = Vec::new();
    let mut current = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('c') || trimmed.starts_with('%') {
            continue;
        }
        if trimmed.starts_with('p') {
            let parts: Vec<&str> = trimmed.split_whitespace().collect();
            let parsed = match parts.as_slice() {
                ["p", "cnf", v, c] => v.parse().ok().zip(c.parse().ok()),
                _ => None,
            };
            header = Some(parsed.ok_or_else(|| DimacsError::Malformed {
                line,
                message: format!("bad header `{trimmed}`"),
            })?);
            continue;
        }
        let (num_vars, _) = header.ok_or(DimacsError::MissingHeader)?;
        for tok in trimmed.split_whitespace() {
            let lit: Lit = tok.parse().map_err(|_| DimacsError::Malformed {
                line,
                message: format!("bad literal `{tok}`"),
            })?;
            if lit == 0 {
                clauses.push(std::mem::take(&mut current));
            } else if lit.unsigned_abs() > num_vars {
                return Err(DimacsError::Malformed {
                    line,
                    message: format!("literal {lit} exceeds {num_vars} variables"),
                });
            } else {
                current.push(lit);
            }
        }
    }
    let (num_vars, declared) = header.ok_or(DimacsError::MissingHeader)?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != declared {
        return Err(DimacsError::ClauseCount {
            declared,
            found: clauses.len(),
        });
    }
    Ok((num_vars, clauses))
}
