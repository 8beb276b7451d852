//! Sequential-counter encoding of `sum(xs) <= k`.

use super::cnf::{Cnf, Family, Lit};

/// Partial-sum registers over a fixed list of inputs. `outputs[j]` is forced
/// true whenever at least `j + 1` inputs are true, so assuming `-outputs[k]`
/// bounds the count by `k` for any `k < capacity`.
#[derive(Debug, Clone)]
pub struct SequentialCounter {
    pub outputs: Vec<Lit>,
}

impl SequentialCounter {
    pub fn build(cnf: &mut Cnf, family: Family, inputs: &[Lit], capacity: usize) -> Self {
        cnf.constraint(family);
        if inputs.is_empty() || capacity == 0 {
            return SequentialCounter { outputs: Vec::new() };
        }
        let mut prev: Vec<Lit> = Vec::new();
        for (i, &x) in inputs.iter().enumerate() {
            let width = capacity.min(i + 1);
            let regs = cnf.new_vars(width);
            cnf.clause(family, vec![-x, regs[0]]);
            for j in 0..width {
                if j < prev.len() {
                    cnf.clause(family, vec![-prev[j], regs[j]]);
                }
                if j >= 1 {
                    cnf.clause(family, vec![-x, -prev[j - 1], regs[j]]);
                }
            }
            prev = regs;
        }
        SequentialCounter { outputs: prev }
    }

    pub fn capacity(&self) -> usize {
        self.outputs.len()
    }

    /// Assumption literal enforcing `count <= k`; `None` if `k` is at or
    /// beyond capacity, where the counter cannot express the bound.
    pub fn at_most(&self, k: usize) -> Option<Lit> {
        self.outputs.get(k).map(|&o| -o)
    }
}

/// Hard `sum(xs) <= k` clauses.
pub fn at_most_k(cnf: &mut Cnf, family: Family, inputs: &[Lit], k: usize) {
    if k == 0 {
        cnf.constraint(family);
        for &x in inputs {
            cnf.clause(family, vec![-x]);
        }
        return;
    }
    if k >= inputs.len() {
        return;
    }
    let counter = SequentialCounter::build(cnf, family, inputs, k + 1);
    let lit = counter.at_most(k).expect("capacity k + 1");
    cnf.clause(family, vec![lit]);
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Checks by enumeration that the encoding admits exactly the input
    /// assignments with at most `k` ones.
    fn admits(n: usize, k: usize) -> Vec<bool> {
        let mut cnf = Cnf::new();
        let xs = cnf.new_vars(n);
        at_most_k(&mut cnf, Family::Swap, &xs, k);
        let total = cnf.num_vars() as usize;
        let aux = total - n;
        (0..1u32 << n)
            .map(|inputs| {
                (0..1u64 << aux).any(|extra| {
                    let value = |l: Lit| {
                        let v = l.unsigned_abs() as usize - 1;
                        let bit = if v < n {
                            inputs >> v & 1 == 1
                        } else {
                            extra >> (v - n) & 1 == 1
                        };
                        bit == (l > 0)
                    };
                    cnf.clauses().iter().all(|c| c.iter().any(|&l| value(l)))
                })
            })
            .collect()
    }

    #[test]
    fn matches_popcount() {
        for n in 0..=5 {
            for k in 0..=n {
                let got = admits(n, k);
                for (inputs, ok) in got.into_iter().enumerate() {
                    assert_eq!(ok, (inputs as u32).count_ones() as usize <= k, "n={n} k={k}");
                }
            }
        }
    }
}
