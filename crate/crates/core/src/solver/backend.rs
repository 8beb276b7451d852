//! SAT backends: the embedded CDCL engine and external DIMACS solvers run as
//! subprocesses.

use std::cell::Cell;
use std::fmt;
use std::io::{Read, Seek, SeekFrom, Write};
use std::process::{Command, Stdio};
use std::rc::Rc;
use std::str::FromStr;
use std::time::{Duration, Instant};

use batsat::{lbool, BasicSolver, Lit as BLit, SolverInterface, Var};
use serde::{Deserialize, Serialize};

use super::cnf::Lit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatOutcome {
    /// Value of variable `v` at index `v - 1`.
    Sat(Vec<bool>),
    Unsat,
    /// Deadline reached or the solver gave up.
    Unknown,
}

#[derive(Debug, thiserror::Error)]
pub enum BackendError {
    #[error("cannot run `{command}`: {source}")]
    Spawn {
        command: String,
        source: std::io::Error,
    },
    #[error("i/o while talking to the external solver: {0}")]
    Io(#[from] std::io::Error),
    #[error("external solver output not understood: {0}")]
    Output(String),
}

pub trait SolverBackend {
    fn name(&self) -> String;

    /// True if clauses and learnt state persist between `solve` calls.
    fn incremental(&self) -> bool;

    /// Grows the variable range to `num_vars` and adds `clauses`.
    fn add_clauses(&mut self, num_vars: u32, clauses: &[Vec<Lit>]);

    fn solve(
        &mut self,
        assumptions: &[Lit],
        deadline: Option<Instant>,
    ) -> Result<SatOutcome, BackendError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BackendKind {
    #[default]
    Embedded,
    /// Command line of a DIMACS solver; the CNF file path is appended.
    Dimacs(String),
}

impl BackendKind {
    pub fn create(&self) -> Box<dyn SolverBackend> {
        match self {
            BackendKind::Embedded => Box::new(EmbeddedBackend::new()),
            BackendKind::Dimacs(cmd) => Box::new(DimacsBackend::new(cmd.clone())),
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendKind::Embedded => f.write_str("embedded"),
            BackendKind::Dimacs(cmd) => write!(f, "dimacs:{cmd}"),
        }
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "embedded" {
            return Ok(BackendKind::Embedded);
        }
        match s.strip_prefix("dimacs:") {
            Some(cmd) if !cmd.trim().is_empty() => Ok(BackendKind::Dimacs(cmd.trim().to_string())),
            _ => Err(format!("unknown backend `{s}` (expected `embedded` or `dimacs:<command>`)")),
        }
    }
}

pub struct EmbeddedBackend {
    solver: BasicSolver,
    vars: Vec<Var>,
    deadline: Rc<Cell<Option<Instant>>>,
}

impl EmbeddedBackend {
    pub fn new() -> Self {
        let mut solver = BasicSolver::new(Default::default(), Default::default());
        let deadline: Rc<Cell<Option<Instant>>> = Rc::new(Cell::new(None));
        let watched = Rc::clone(&deadline);
        let ticks = Cell::new(0u32);
        solver.cb_mut().set_stop(move || {
            let n = ticks.get().wrapping_add(1);
            ticks.set(n);
            n % 64 == 0 && watched.get().is_some_and(|d| Instant::now() >= d)
        });
        EmbeddedBackend {
            solver,
            vars: Vec::new(),
            deadline,
        }
    }

    fn lit(&self, l: Lit) -> BLit {
        BLit::new(self.vars[l.unsigned_abs() as usize - 1], l > 0)
    }
}

impl Default for EmbeddedBackend {
    fn default() -> Self {
        EmbeddedBackend::new()
    }
}

impl SolverBackend for EmbeddedBackend {
    fn name(&self) -> String {
        "embedded".into()
    }

    fn incremental(&self) -> bool {
        true
    }

    fn add_clauses(&mut self, num_vars: u32, clauses: &[Vec<Lit>]) {
        while self.vars.len() < num_vars as usize {
            let v = self.solver.new_var_default();
            self.vars.push(v);
        }
        let mut buf = Vec::new();
        for c in clauses {
            buf.clear();
            buf.extend(c.iter().map(|&l| self.lit(l)));
            self.solver.add_clause_reuse(&mut buf);
        }
    }

    fn solve(
        &mut self,
        assumptions: &[Lit],
        deadline: Option<Instant>,
    ) -> Result<SatOutcome, BackendError> {
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(SatOutcome::Unknown);
        }
        self.deadline.set(deadline);
        let assumps: Vec<BLit> = assumptions.iter().map(|&l| self.lit(l)).collect();
        let result = self.solver.solve_limited(&assumps);
        self.deadline.set(None);
        Ok(if result == lbool::TRUE {
            SatOutcome::Sat(
                self.vars
                    .iter()
                    .map(|&v| self.solver.value_var(v) == lbool::TRUE)
                    .collect(),
            )
        } else if result == lbool::FALSE {
            SatOutcome::Unsat
        } else {
            SatOutcome::Unknown
        })
    }
}

/// Writes the accumulated CNF, with assumptions as unit clauses, to a
/// temporary file and runs the command on it. Understands the competition
/// output format (`s` and `v` lines) and falls back to exit codes 10/20.
pub struct DimacsBackend {
    command: String,
    clauses: Vec<Vec<Lit>>,
    num_vars: u32,
}

impl DimacsBackend {
    pub fn new(command: String) -> Self {
        DimacsBackend {
            command,
            clauses: Vec::new(),
            num_vars: 0,
        }
    }

    fn document(&self, assumptions: &[Lit]) -> String {
        let mut text = format!(
            "p cnf {} {}\n",
            self.num_vars,
            self.clauses.len() + assumptions.len()
        );
        for c in self.clauses.iter().map(Vec::as_slice).chain(assumptions.iter().map(std::slice::from_ref)) {
            for l in c {
                text.push_str(&l.to_string());
                text.push(' ');
            }
            text.push_str("0\n");
        }
        text
    }
}

impl SolverBackend for DimacsBackend {
    fn name(&self) -> String {
        format!("dimacs:{}", self.command)
    }

    fn incremental(&self) -> bool {
        false
    }

    fn add_clauses(&mut self, num_vars: u32, clauses: &[Vec<Lit>]) {
        self.num_vars = self.num_vars.max(num_vars);
        self.clauses.extend_from_slice(clauses);
    }

    fn solve(
        &mut self,
        assumptions: &[Lit],
        deadline: Option<Instant>,
    ) -> Result<SatOutcome, BackendError> {
        let mut input = tempfile::Builder::new().suffix(".cnf").tempfile()?;
        input.write_all(self.document(assumptions).as_bytes())?;
        input.flush()?;
        let mut output = tempfile::tempfile()?;

        let mut parts = self.command.split_whitespace();
        let program = parts.next().unwrap_or_default();
        let mut child = Command::new(program)
            .args(parts)
            .arg(input.path())
            .stdin(Stdio::null())
            .stdout(Stdio::from(output.try_clone()?))
            .stderr(Stdio::null())
            .spawn()
            .map_err(|source| BackendError::Spawn {
                command: self.command.clone(),
                source,
            })?;
        let status = loop {
            if let Some(status) = child.try_wait()? {
                break status;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SatOutcome::Unknown);
            }
            std::thread::sleep(Duration::from_millis(2));
        };

        let mut text = String::new();
        output.seek(SeekFrom::Start(0))?;
        output.read_to_string(&mut text)?;
        parse_solver_output(&text, self.num_vars, status.code())
    }
}

fn parse_solver_output(
    text: &str,
    num_vars: u32,
    exit_code: Option<i32>,
) -> Result<SatOutcome, BackendError> {
    let mut verdict: Option<bool> = None;
    let mut model = vec![false; num_vars as usize];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            verdict = match rest.trim() {
                "SATISFIABLE" => Some(true),
                "UNSATISFIABLE" => Some(false),
                _ => return Ok(SatOutcome::Unknown),
            };
        } else if let Some(rest) = line.strip_prefix("v ") {
            for tok in rest.split_whitespace() {
                let lit: i64 = tok
                    .parse()
                    .map_err(|_| BackendError::Output(format!("bad model literal `{tok}`")))?;
                let v = lit.unsigned_abs() as usize;
                if v >= 1 && v <= model.len() {
                    model[v - 1] = lit > 0;
                }
            }
        }
    }
    let verdict = verdict.or(match exit_code {
        Some(10) => Some(true),
        Some(20) => Some(false),
        _ => None,
    });
    match verdict {
        Some(true) => Ok(SatOutcome::Sat(model)),
        Some(false) => Ok(SatOutcome::Unsat),
        None => Err(BackendError::Output(format!(
            "no verdict (exit code {exit_code:?})"
        ))),
    }
}
