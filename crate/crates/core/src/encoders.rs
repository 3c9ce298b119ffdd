//! Primitive cardinality encoders: binomial (pairwise) at-most-k with an
//! optional guard literal, the sequential counter encoding, and the order
//! encoding chain for a column of variables.

use itertools::Itertools;
use thiserror::Error;

use crate::cnf::{Cnf, CnfError, Lit, Var, VarRole};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EncodeError {
    #[error("at-most bound {bound} out of range for {len} variables")]
    BoundOutOfRange { bound: usize, len: usize },
    #[error("counter encoding requires 1 <= k < n, got k = {k}, n = {n}")]
    CounterDomain { n: usize, k: usize },
    #[error(transparent)]
    Cnf(#[from] CnfError),
}

/// An at-most-k constraint that may be conditioned on a guard literal.
/// The guard is included verbatim in every emitted clause, so the bound
/// applies exactly when the guard literal is false.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuardedAtMost {
    pub guard: Option<Lit>,
    pub vars: Vec<Var>,
    pub bound: usize,
}

/// Binomial (pairwise) at-most-k: one clause of k+1 negated variables per
/// (k+1)-subset, prefixed by the guard literal when present. Subsets are
/// enumerated in lexicographic order of variable position. Emits nothing
/// when `k = vars.len()`. Returns the number of clauses emitted.
pub fn at_most_binomial(
    cnf: &mut Cnf,
    vars: &[Var],
    k: usize,
    guard: Option<Lit>,
) -> Result<usize, EncodeError> {
    if k > vars.len() {
        return Err(EncodeError::BoundOutOfRange { bound: k, len: vars.len() });
    }
    let mut emitted = 0;
    for subset in vars.iter().combinations(k + 1) {
        let mut clause = Vec::with_capacity(k + 2);
        if let Some(g) = guard {
            clause.push(g);
        }
        clause.extend(subset.into_iter().map(|&v| Lit::neg(v)));
        cnf.add_clause(clause)?;
        emitted += 1;
    }
    Ok(emitted)
}

/// Sequential counter at-most-k over `vars`. Allocates auxiliary unary
/// registers r[i][j] (i in 1..n-1, j in 1..k) and emits five clause
/// families in a fixed order:
///
/// 1. (-x_i v r_{i,1})               for i in 1..n-1
/// 2. (-r_{1,j})                     for j in 2..k
/// 3. (-r_{i-1,j} v r_{i,j})         for i in 2..n-1, j in 1..k
/// 4. (-x_i v -r_{i-1,j-1} v r_{i,j}) for i in 2..n-1, j in 2..k
/// 5. (-x_i v -r_{i-1,k})            for i in 2..n
///
/// Returns the number of clauses emitted.
pub fn at_most_counter(cnf: &mut Cnf, vars: &[Var], k: usize) -> Result<usize, EncodeError> {
    let n = vars.len();
    if k == 0 || k >= n {
        return Err(EncodeError::CounterDomain { n, k });
    }
    // registers[i][j] = r_{i+1, j+1}
    let registers: Vec<Vec<Var>> = (0..n - 1)
        .map(|_| cnf.alloc_vars(k as u32, VarRole::Aux))
        .collect();
    let r = |i: usize, j: usize| registers[i - 1][j - 1];
    let x = |i: usize| vars[i - 1];

    let mut emitted = 0;
    for i in 1..n {
        cnf.add_clause(vec![Lit::neg(x(i)), Lit::pos(r(i, 1))])?;
        emitted += 1;
    }
    for j in 2..=k {
        cnf.add_clause(vec![Lit::neg(r(1, j))])?;
        emitted += 1;
    }
    for i in 2..n {
        for j in 1..=k {
            cnf.add_clause(vec![Lit::neg(r(i - 1, j)), Lit::pos(r(i, j))])?;
            emitted += 1;
        }
    }
    for i in 2..n {
        for j in 2..=k {
            cnf.add_clause(vec![Lit::neg(x(i)), Lit::neg(r(i - 1, j - 1)), Lit::pos(r(i, j))])?;
            emitted += 1;
        }
    }
    for i in 2..=n {
        cnf.add_clause(vec![Lit::neg(x(i)), Lit::neg(r(i - 1, k))])?;
        emitted += 1;
    }
    Ok(emitted)
}

/// Closed-form literal total of [`at_most_counter`] without building the
/// formula. Equals `stats(at_most_counter(n, k)).literals`.
pub fn counter_literal_count(n: usize, k: usize) -> Result<usize, EncodeError> {
    if k == 0 || k >= n {
        return Err(EncodeError::CounterDomain { n, k });
    }
    Ok(2 * (n - 1) + (k - 1) + 2 * k * (n - 2) + 3 * (k - 1) * (n - 2) + 2 * (n - 1))
}

/// Order encoding chain for one column: v_j implies v_{j-1}, emitted as
/// h-1 binary clauses. Returns the number of clauses emitted.
pub fn order_column(cnf: &mut Cnf, column_vars: &[Var]) -> Result<usize, EncodeError> {
    for pair in column_vars.windows(2) {
        cnf.add_clause(vec![Lit::neg(pair[1]), Lit::pos(pair[0])])?;
    }
    Ok(column_vars.len().saturating_sub(1))
}
