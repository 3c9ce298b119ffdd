//! Propositional core: variables, literals, clauses, CNF formulas,
//! size statistics, assignment evaluation and DIMACS output.

use std::fmt;

use thiserror::Error;

/// A propositional variable. Ids are 1-based and allocated densely by a
/// single [`Cnf`] allocator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn id(self) -> u32 {
        self.0
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}", self.0)
    }
}

/// A variable with a polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit {
    pub var: Var,
    pub positive: bool,
}

impl Lit {
    pub fn pos(var: Var) -> Self {
        Lit { var, positive: true }
    }

    pub fn neg(var: Var) -> Self {
        Lit { var, positive: false }
    }

    pub fn negate(self) -> Self {
        Lit {
            var: self.var,
            positive: !self.positive,
        }
    }

    /// Signed DIMACS integer for this literal.
    pub fn to_dimacs(self) -> i64 {
        let id = i64::from(self.var.0);
        if self.positive {
            id
        } else {
            -id
        }
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.positive {
            write!(f, "\u{ac}")?;
        }
        write!(f, "{}", self.var)
    }
}

/// A nonempty disjunction of literals. No duplicate literal, never both a
/// literal and its negation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clause {
    literals: Vec<Lit>,
}

impl Clause {
    pub fn literals(&self) -> &[Lit] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }
}

/// Role a variable plays in an encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarRole {
    /// Variable of the constraint being encoded.
    Target,
    /// Helper variable introduced by an encoder.
    Aux,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CnfError {
    #[error("clause is empty")]
    EmptyClause,
    #[error("duplicate literal {0} in clause")]
    DuplicateLiteral(Lit),
    #[error("tautological clause: contains both {0} and its negation")]
    Tautology(Lit),
    #[error("variable {0} not allocated (var_count = {1})")]
    Unallocated(Var, u32),
    #[error("assignment covers {got} variables, formula has {expected}")]
    PartialAssignment { got: usize, expected: usize },
}

/// Size statistics of a formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CnfStats {
    pub variables: usize,
    pub aux_variables: usize,
    pub clauses: usize,
    /// Total literal occurrences across all clauses.
    pub literals: usize,
}

/// A clause database with variable accounting. Construction is
/// single-writer; a completed formula is immutable and can be shared
/// across analysis threads.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Cnf {
    clauses: Vec<Clause>,
    var_count: u32,
    target_vars: Vec<Var>,
    aux_vars: Vec<Var>,
    literal_count: usize,
}

impl Cnf {
    pub fn new() -> Self {
        Cnf::default()
    }

    pub fn var_count(&self) -> u32 {
        self.var_count
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    /// Target variables in ascending allocation order.
    pub fn target_vars(&self) -> &[Var] {
        &self.target_vars
    }

    pub fn aux_vars(&self) -> &[Var] {
        &self.aux_vars
    }

    /// Allocates `count` fresh consecutive variables under the given role.
    pub fn alloc_vars(&mut self, count: u32, role: VarRole) -> Vec<Var> {
        let vars: Vec<Var> = (self.var_count + 1..=self.var_count + count).map(Var).collect();
        self.var_count += count;
        match role {
            VarRole::Target => self.target_vars.extend(&vars),
            VarRole::Aux => self.aux_vars.extend(&vars),
        }
        vars
    }

    pub fn alloc_var(&mut self, role: VarRole) -> Var {
        self.alloc_vars(1, role)[0]
    }

    /// Appends a clause, rejecting malformed ones. A tautological or
    /// duplicate-literal clause signals an encoder bug, not valid input.
    pub fn add_clause(&mut self, literals: Vec<Lit>) -> Result<(), CnfError> {
        if literals.is_empty() {
            return Err(CnfError::EmptyClause);
        }
        for (i, &lit) in literals.iter().enumerate() {
            if lit.var.0 == 0 || lit.var.0 > self.var_count {
                return Err(CnfError::Unallocated(lit.var, self.var_count));
            }
            for &earlier in &literals[..i] {
                if earlier == lit {
                    return Err(CnfError::DuplicateLiteral(lit));
                }
                if earlier == lit.negate() {
                    return Err(CnfError::Tautology(lit));
                }
            }
        }
        self.literal_count += literals.len();
        self.clauses.push(Clause { literals });
        Ok(())
    }

    pub fn stats(&self) -> CnfStats {
        CnfStats {
            variables: self.var_count as usize,
            aux_variables: self.aux_vars.len(),
            clauses: self.clauses.len(),
            literals: self.literal_count,
        }
    }

    /// Evaluates the formula under a total assignment indexed by variable
    /// id minus one.
    pub fn eval(&self, assignment: &[bool]) -> Result<bool, CnfError> {
        if assignment.len() != self.var_count as usize {
            return Err(CnfError::PartialAssignment {
                got: assignment.len(),
                expected: self.var_count as usize,
            });
        }
        Ok(self.clauses.iter().all(|clause| {
            clause
                .literals
                .iter()
                .any(|lit| assignment[(lit.var.0 - 1) as usize] == lit.positive)
        }))
    }

    /// Standard DIMACS CNF text. Target variables are listed in `c target`
    /// comment lines so downstream tools can project models onto them.
    /// Byte output is deterministic for a given formula.
    pub fn write_dimacs(&self) -> String {
        let mut out = String::new();
        if !self.target_vars.is_empty() {
            out.push_str("c target");
            for var in &self.target_vars {
                out.push(' ');
                out.push_str(&var.0.to_string());
            }
            out.push('\n');
        }
        out.push_str(&format!("p cnf {} {}\n", self.var_count, self.clauses.len()));
        for clause in &self.clauses {
            for lit in &clause.literals {
                out.push_str(&lit.to_dimacs().to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DimacsError {
    #[error("missing `p cnf` header")]
    MissingHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("clause not terminated by 0")]
    UnterminatedClause,
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// Round-trip helper: re-parses text produced by [`Cnf::write_dimacs`].
/// Variables not named in a `c target` line are registered as auxiliary.
pub fn parse_dimacs(text: &str) -> Result<Cnf, DimacsError> {
    let mut targets: Vec<u32> = Vec::new();
    let mut header: Option<(u32, usize)> = None;
    let mut clause_lits: Vec<Vec<i64>> = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("c target") {
            for tok in rest.split_whitespace() {
                let id = tok
                    .parse::<u32>()
                    .map_err(|_| DimacsError::Malformed(line.to_string()))?;
                targets.push(id);
            }
        } else if line.starts_with('c') {
            continue;
        } else if let Some(rest) = line.strip_prefix("p cnf") {
            let mut parts = rest.split_whitespace();
            let vars = parts
                .next()
                .and_then(|t| t.parse::<u32>().ok())
                .ok_or_else(|| DimacsError::Malformed(line.to_string()))?;
            let clauses = parts
                .next()
                .and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| DimacsError::Malformed(line.to_string()))?;
            header = Some((vars, clauses));
        } else {
            let mut lits = Vec::new();
            for tok in line.split_whitespace() {
                let value = tok
                    .parse::<i64>()
                    .map_err(|_| DimacsError::Malformed(line.to_string()))?;
                lits.push(value);
            }
            match lits.pop() {
                Some(0) => clause_lits.push(lits),
                _ => return Err(DimacsError::UnterminatedClause),
            }
        }
    }
    let (var_count, _) = header.ok_or(DimacsError::MissingHeader)?;

    let mut cnf = Cnf::new();
    targets.sort_unstable();
    for id in 1..=var_count {
        let role = if targets.binary_search(&id).is_ok() {
            VarRole::Target
        } else {
            VarRole::Aux
        };
        cnf.alloc_var(role);
    }
    for lits in clause_lits {
        let clause = lits
            .iter()
            .map(|&value| {
                let var = Var(value.unsigned_abs() as u32);
                if value > 0 {
                    Lit::pos(var)
                } else {
                    Lit::neg(var)
                }
            })
            .collect();
        cnf.add_clause(clause)?;
    }
    Ok(cnf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_formula() {
        let cnf = Cnf::new();
        let stats = cnf.stats();
        assert_eq!(stats.variables, 0);
        assert_eq!(stats.clauses, 0);
        assert_eq!(stats.literals, 0);
        assert_eq!(cnf.write_dimacs(), "p cnf 0 0\n");
        assert_eq!(cnf.eval(&[]), Ok(true));
    }

    #[test]
    fn allocation_is_dense_and_role_tracked() {
        let mut cnf = Cnf::new();
        let targets = cnf.alloc_vars(4, VarRole::Target);
        assert_eq!(targets, vec![Var(1), Var(2), Var(3), Var(4)]);
        let aux = cnf.alloc_vars(2, VarRole::Aux);
        assert_eq!(aux, vec![Var(5), Var(6)]);
        assert_eq!(cnf.var_count(), 6);
        assert!(cnf.alloc_vars(0, VarRole::Aux).is_empty());
        assert_eq!(cnf.target_vars(), &targets[..]);
        assert_eq!(cnf.aux_vars(), &aux[..]);
    }

    #[test]
    fn add_clause_counts_literals() {
        let mut cnf = Cnf::new();
        let v = cnf.alloc_vars(2, VarRole::Target);
        cnf.add_clause(vec![Lit::neg(v[0]), Lit::pos(v[1])]).unwrap();
        let stats = cnf.stats();
        assert_eq!(stats.clauses, 1);
        assert_eq!(stats.literals, 2);
    }

    #[test]
    fn add_clause_rejects_bad_clauses() {
        let mut cnf = Cnf::new();
        let v = cnf.alloc_vars(4, VarRole::Target);
        assert_eq!(
            cnf.add_clause(vec![Lit::pos(v[0]), Lit::neg(v[0])]),
            Err(CnfError::Tautology(Lit::neg(v[0])))
        );
        assert_eq!(
            cnf.add_clause(vec![Lit::pos(v[1]), Lit::pos(v[1])]),
            Err(CnfError::DuplicateLiteral(Lit::pos(v[1])))
        );
        assert_eq!(
            cnf.add_clause(vec![Lit::pos(Var(9))]),
            Err(CnfError::Unallocated(Var(9), 4))
        );
        assert_eq!(cnf.add_clause(vec![]), Err(CnfError::EmptyClause));
        assert_eq!(cnf.stats().clauses, 0);
    }

    #[test]
    fn eval_cases() {
        let mut cnf = Cnf::new();
        let v = cnf.alloc_vars(2, VarRole::Target);
        cnf.add_clause(vec![Lit::neg(v[0])]).unwrap();
        assert_eq!(cnf.eval(&[true, false]), Ok(false));
        assert_eq!(cnf.eval(&[false, true]), Ok(true));
        assert!(matches!(
            cnf.eval(&[false]),
            Err(CnfError::PartialAssignment { got: 1, expected: 2 })
        ));

        let mut disj = Cnf::new();
        let v = disj.alloc_vars(2, VarRole::Target);
        disj.add_clause(vec![Lit::pos(v[0]), Lit::pos(v[1])]).unwrap();
        assert_eq!(disj.eval(&[false, true]), Ok(true));
        assert_eq!(disj.eval(&[false, false]), Ok(false));
    }

    #[test]
    fn dimacs_transcription() {
        let mut cnf = Cnf::new();
        let v = cnf.alloc_vars(2, VarRole::Target);
        cnf.add_clause(vec![Lit::neg(v[0]), Lit::pos(v[1])]).unwrap();
        assert_eq!(cnf.write_dimacs(), "c target 1 2\np cnf 2 1\n-1 2 0\n");
    }

    #[test]
    fn dimacs_round_trip() {
        let mut cnf = Cnf::new();
        let t = cnf.alloc_vars(3, VarRole::Target);
        let a = cnf.alloc_vars(2, VarRole::Aux);
        cnf.add_clause(vec![Lit::neg(t[0]), Lit::pos(a[0])]).unwrap();
        cnf.add_clause(vec![Lit::neg(t[1]), Lit::neg(a[1]), Lit::pos(t[2])])
            .unwrap();
        let parsed = parse_dimacs(&cnf.write_dimacs()).unwrap();
        assert_eq!(parsed, cnf);
    }
}
