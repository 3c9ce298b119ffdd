//! Acceptance oracles for approximate tree models.
//!
//! An assignment of the target variables is *accepted* when it extends to
//! a satisfying assignment of the full formula. Two independent oracles
//! compute the accepted counts per true-count:
//!
//! - [`count_accepted_dp`]: a structural recursion over the tree that
//!   never touches the CNF. Each column's minimal unary value is the
//!   ceiling of its child's required trues over the expansion factor;
//!   an assignment is accepted iff the top node's total stays within the
//!   top bound.
//! - [`count_accepted_bruteforce`]: enumerates all target assignments
//!   and runs a small DPLL search ([`sat_extend`]) on the formula.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_integer::binomial;
use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::approx::{EncodingResult, ModelShape, ShapeError};
use crate::cnf::{Cnf, Lit};

/// Brute force is capped at this many target variables (2^20 assignments).
pub const BRUTE_FORCE_LIMIT: usize = 20;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error(transparent)]
    Shape(#[from] ShapeError),
    #[error("assignment has {got} entries but the formula has {expected} targets")]
    AssignmentLength { expected: usize, got: usize },
    #[error("{got} leaf counts given but the shape has {expected} leaf groups")]
    LeafCountLength { expected: usize, got: usize },
    #[error("leaf count {count} for group {group} is outside [{min}, {max}]")]
    LeafCountOutOfRange { group: usize, count: u64, min: u64, max: u64 },
    #[error("{n} target variables exceed the brute-force limit of {limit}")]
    TooLarge { n: usize, limit: usize },
}

/// Accepted assignment counts indexed by the number of true targets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AcceptHistogram {
    /// `accepted[t]` = number of accepted assignments with t true targets.
    pub accepted: Vec<BigUint>,
}

impl AcceptHistogram {
    /// Number of target variables the histogram ranges over.
    pub fn n(&self) -> usize {
        self.accepted.len() - 1
    }

    /// `possible[t]` = C(n, t), the number of assignments with t trues.
    pub fn possible(&self) -> Vec<BigUint> {
        let n = self.n() as u64;
        (0..=n).map(|t| binomial(BigUint::from(n), BigUint::from(t))).collect()
    }

    /// Coverage ratios against the binomial totals, with the derived
    /// bound `k` fixing the overall denominator.
    pub fn coverage_report(self, derived_k: u64) -> CoverageReport {
        let derived_n = self.n() as u64;
        let possible = self.possible();
        let bound = (derived_k as usize).min(self.n());
        let accepted_within: BigUint = self.accepted[..=bound].iter().sum();
        let possible_within: BigUint = possible[..=bound].iter().sum();
        let overall_coverage = Ratio::new(accepted_within, possible_within);
        let maxcount_coverage =
            Ratio::new(self.accepted[bound].clone(), possible[bound].clone());
        CoverageReport { histogram: self, derived_k, derived_n, overall_coverage, maxcount_coverage }
    }
}

/// Exact coverage of an approximate model.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageReport {
    pub histogram: AcceptHistogram,
    pub derived_k: u64,
    pub derived_n: u64,
    /// Accepted / possible over every assignment with at most k trues.
    pub overall_coverage: Ratio<BigUint>,
    /// Accepted / possible among assignments with exactly k trues.
    pub maxcount_coverage: Ratio<BigUint>,
}

/// Coverage of a shape via the structural oracle.
pub fn coverage(shape: &ModelShape) -> Result<CoverageReport, OracleError> {
    let (k, _) = shape.derived_params()?;
    Ok(count_accepted_dp(shape)?.coverage_report(k))
}

/// Static description of the tree used by the structural oracle.
struct TreeInfo {
    levels: Vec<(u32, u32)>,
    /// Per leaf group: (free variable count, pinned-true count).
    leaf_groups: Vec<(u64, u64)>,
    group_size: u64,
}

fn tree_info(shape: &ModelShape) -> Result<TreeInfo, OracleError> {
    let (_, n) = shape.derived_params()?;
    let bottom = shape.bottom_count();
    let group_size = u64::from(shape.levels.last().unwrap().0) * u64::from(shape.leaf_m);
    let true_start = n + shape.fix_false;
    let false_start = n;
    let leaf_groups = (0..bottom / group_size)
        .map(|g| {
            let lo = g * group_size;
            let hi = lo + group_size;
            let pinned_true = hi.min(bottom).saturating_sub(true_start.max(lo)).min(group_size);
            let pinned_false =
                hi.min(true_start).saturating_sub(false_start.max(lo)).min(group_size);
            (group_size - pinned_true - pinned_false, pinned_true)
        })
        .collect();
    Ok(TreeInfo {
        levels: shape.levels.clone(),
        leaf_groups,
        group_size,
    })
}

/// Minimal number of trues the top node must carry when each leaf group
/// holds the given number of trues (counts include any pinned trues), or
/// `None` when some column cannot bound its child within its height. The
/// corresponding assignments are accepted iff the result is at most the
/// shape's top bound.
pub fn min_required_trues(
    shape: &ModelShape,
    leaf_true_counts: &[u64],
) -> Result<Option<u64>, OracleError> {
    let info = tree_info(shape)?;
    if leaf_true_counts.len() != info.leaf_groups.len() {
        return Err(OracleError::LeafCountLength {
            expected: info.leaf_groups.len(),
            got: leaf_true_counts.len(),
        });
    }
    for (group, (&count, &(_, pinned_true))) in
        leaf_true_counts.iter().zip(&info.leaf_groups).enumerate()
    {
        if count < pinned_true || count > info.group_size {
            return Err(OracleError::LeafCountOutOfRange {
                group,
                count,
                min: pinned_true,
                max: info.group_size,
            });
        }
    }

    // Fold bottom-up: each column needs ceil(child_req / expansion) trues,
    // each node needs the sum over its columns.
    let mut child_reqs = leaf_true_counts.to_vec();
    let mut child_size = info.group_size;
    for &(h, w) in info.levels.iter().rev() {
        let h = u64::from(h);
        let w = u64::from(w);
        let expansion = child_size / h;
        let mut node_reqs = Vec::with_capacity(child_reqs.len() / w as usize);
        for node in child_reqs.chunks(w as usize) {
            let mut total = 0u64;
            for &req in node {
                let col = req.div_ceil(expansion);
                if col > h {
                    return Ok(None);
                }
                total += col;
            }
            node_reqs.push(total);
        }
        child_reqs = node_reqs;
        child_size = h * w;
    }
    debug_assert_eq!(child_reqs.len(), 1);
    Ok(Some(child_reqs[0]))
}

/// Structural acceptance of one target assignment: derives the per-group
/// true counts (including pinned trues) and checks the top requirement
/// against the shape's bound.
pub fn accepts(shape: &ModelShape, targets: &[bool]) -> Result<bool, OracleError> {
    let (_, n) = shape.derived_params()?;
    if targets.len() as u64 != n {
        return Err(OracleError::AssignmentLength { expected: n as usize, got: targets.len() });
    }
    let info = tree_info(shape)?;
    let mut counts = Vec::with_capacity(info.leaf_groups.len());
    let mut free_index = 0usize;
    for &(free, pinned_true) in &info.leaf_groups {
        let trues = targets[free_index..free_index + free as usize]
            .iter()
            .filter(|&&b| b)
            .count() as u64;
        free_index += free as usize;
        counts.push(trues + pinned_true);
    }
    Ok(min_required_trues(shape, &counts)?.is_some_and(|req| req <= shape.top_k))
}

/// Joint distribution over (required trues, free true targets) for one
/// subtree: `dist[r][t]` counts target assignments of the subtree's free
/// bottoms with t trues whose subtree requires exactly r trues above.
type Dist = Vec<Vec<BigUint>>;

fn convolve(a: &Dist, b: &Dist) -> Dist {
    let rows = a.len() + b.len() - 1;
    let cols = a[0].len() + b[0].len() - 1;
    let mut out = vec![vec![BigUint::zero(); cols]; rows];
    for (ra, row_a) in a.iter().enumerate() {
        for (ta, va) in row_a.iter().enumerate() {
            if va.is_zero() {
                continue;
            }
            for (rb, row_b) in b.iter().enumerate() {
                for (tb, vb) in row_b.iter().enumerate() {
                    if !vb.is_zero() {
                        out[ra + rb][ta + tb] += va * vb;
                    }
                }
            }
        }
    }
    out
}

/// Accepted counts per true-count via the structural recursion. Agrees
/// with [`count_accepted_bruteforce`] on the built CNF for every valid
/// shape.
pub fn count_accepted_dp(shape: &ModelShape) -> Result<AcceptHistogram, OracleError> {
    let (_, n) = shape.derived_params()?;
    let info = tree_info(shape)?;

    // Distribution per leaf group, keyed by the trues the group holds
    // (free choices plus pinned trues); the fold below converts that to
    // the parent column's requirement.
    let leaf_dists: Vec<Dist> = info
        .leaf_groups
        .iter()
        .map(|&(free, pinned_true)| {
            let mut dist =
                vec![vec![BigUint::zero(); free as usize + 1]; info.group_size as usize + 1];
            for j in 0..=free {
                dist[(j + pinned_true) as usize][j as usize] +=
                    binomial(BigUint::from(free), BigUint::from(j));
            }
            dist
        })
        .collect();

    // Fold bottom-up. `child_dists[u]` is keyed by the trues child unit u
    // requires of its subtree (for leaves: trues in the group itself).
    let mut child_dists = leaf_dists;
    let mut child_size = info.group_size;
    for &(h, w) in info.levels.iter().rev() {
        let h = u64::from(h);
        let w = u64::from(w);
        let expansion = child_size / h;
        let mut node_dists = Vec::with_capacity(child_dists.len() / w as usize);
        for node_children in child_dists.chunks(w as usize) {
            let mut acc: Dist = vec![vec![BigUint::one()]];
            for child in node_children {
                // Reindex the child's requirement to this column's unary
                // value: r trues below need ceil(r / expansion) here.
                let mut col: Dist = vec![vec![BigUint::zero(); child[0].len()]; h as usize + 1];
                for (r, row) in child.iter().enumerate() {
                    let cr = (r as u64).div_ceil(expansion);
                    debug_assert!(cr <= h);
                    for (t, v) in row.iter().enumerate() {
                        if !v.is_zero() {
                            col[cr as usize][t] += v;
                        }
                    }
                }
                acc = convolve(&acc, &col);
            }
            node_dists.push(acc);
        }
        child_dists = node_dists;
        child_size = h * w;
    }
    debug_assert_eq!(child_dists.len(), 1);
    let top = &child_dists[0];

    let mut accepted = vec![BigUint::zero(); n as usize + 1];
    for row in top.iter().take(shape.top_k as usize + 1) {
        for (t, v) in row.iter().enumerate() {
            accepted[t] += v;
        }
    }
    Ok(AcceptHistogram { accepted })
}

/// DPLL search for an extension of a fixed target assignment to a full
/// satisfying assignment. `targets[i]` fixes the i-th entry of
/// `cnf.target_vars()`; all remaining variables are decided by the
/// search (ascending id, false first) with unit propagation.
pub fn sat_extend(cnf: &Cnf, targets: &[bool]) -> Result<bool, OracleError> {
    let target_vars = cnf.target_vars();
    if targets.len() != target_vars.len() {
        return Err(OracleError::AssignmentLength {
            expected: target_vars.len(),
            got: targets.len(),
        });
    }
    let var_count = cnf.var_count() as usize;
    let mut assignment: Vec<Option<bool>> = vec![None; var_count];
    for (&var, &value) in target_vars.iter().zip(targets) {
        assignment[(var.id() - 1) as usize] = Some(value);
    }
    let clauses: Vec<Vec<Lit>> =
        cnf.clauses().iter().map(|c| c.literals().to_vec()).collect();
    let free: Vec<usize> = (0..var_count).filter(|&i| assignment[i].is_none()).collect();
    Ok(dpll(&clauses, &mut assignment, &free))
}

/// Propagates unit clauses to fixpoint. Returns the changed indices, or
/// `None` on conflict (in which case the changes are already undone).
fn propagate(clauses: &[Vec<Lit>], assignment: &mut Vec<Option<bool>>) -> Option<Vec<usize>> {
    let mut trail = Vec::new();
    loop {
        let mut changed = false;
        for clause in clauses {
            let mut unassigned = None;
            let mut satisfied = false;
            let mut unassigned_count = 0;
            for lit in clause {
                let idx = (lit.var.id() - 1) as usize;
                match assignment[idx] {
                    Some(v) if v == lit.positive => {
                        satisfied = true;
                        break;
                    }
                    Some(_) => {}
                    None => {
                        unassigned_count += 1;
                        unassigned = Some((idx, lit.positive));
                    }
                }
            }
            if satisfied {
                continue;
            }
            match (unassigned_count, unassigned) {
                (0, _) => {
                    for idx in trail {
                        assignment[idx] = None;
                    }
                    return None;
                }
                (1, Some((idx, value))) => {
                    assignment[idx] = Some(value);
                    trail.push(idx);
                    changed = true;
                }
                _ => {}
            }
        }
        if !changed {
            return Some(trail);
        }
    }
}

fn dpll(clauses: &[Vec<Lit>], assignment: &mut Vec<Option<bool>>, free: &[usize]) -> bool {
    let Some(trail) = propagate(clauses, assignment) else {
        return false;
    };
    let result = match free.iter().position(|&i| assignment[i].is_none()) {
        // total assignment survived propagation: every clause satisfied
        None => true,
        Some(pos) => {
            let idx = free[pos];
            let mut found = false;
            for value in [false, true] {
                assignment[idx] = Some(value);
                if dpll(clauses, assignment, &free[pos + 1..]) {
                    found = true;
                    break;
                }
            }
            assignment[idx] = None;
            found
        }
    };
    for idx in trail {
        assignment[idx] = None;
    }
    result
}

/// Accepted counts per true-count by enumerating every target assignment
/// of the encoding and searching for an extension. Limited to
/// [`BRUTE_FORCE_LIMIT`] targets.
pub fn count_accepted_bruteforce(
    encoding: &EncodingResult,
) -> Result<AcceptHistogram, OracleError> {
    count_accepted_cnf(&encoding.cnf)
}

/// Target part of one clause as bitmasks over the target variables.
type TargetTest = (u32, u32); // (positive literals, negated literals)

/// The target parts of all clauses sharing one residual, in a form that
/// decides "is some clause false on the current target assignment" fast.
enum TestSet {
    /// Plain list: false iff some (pos, neg) has no positive bit in the
    /// mask and every negated bit in it.
    List(Vec<TargetTest>),
    /// The tests are exactly the all-negated `size`-subsets of
    /// `universe`: false iff the mask holds at least `size` of them.
    AllSubsets { universe: u32, size: u32 },
}

fn compress_tests(mut tests: Vec<TargetTest>) -> TestSet {
    tests.sort_unstable();
    tests.dedup();
    if tests.iter().all(|&(pos, _)| pos == 0) {
        let universe = tests.iter().fold(0u32, |u, &(_, neg)| u | neg);
        let size = tests[0].1.count_ones();
        if tests.iter().all(|&(_, neg)| neg.count_ones() == size)
            && BigUint::from(tests.len())
                == binomial(BigUint::from(universe.count_ones()), BigUint::from(size))
        {
            return TestSet::AllSubsets { universe, size };
        }
    }
    TestSet::List(tests)
}

/// Brute-force acceptance counting for an arbitrary formula with
/// designated target variables.
///
/// Semantically this runs [`sat_extend`] on every target assignment; the
/// implementation applies the target assignment to each clause first
/// (clauses become satisfied, or reduce to their non-target residual)
/// and searches only the residual formula, caching results per forced
/// residual set.
pub fn count_accepted_cnf(cnf: &Cnf) -> Result<AcceptHistogram, OracleError> {
    let target_vars = cnf.target_vars();
    let n = target_vars.len();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge { n, limit: BRUTE_FORCE_LIMIT });
    }
    let var_count = cnf.var_count() as usize;
    let mut target_bit = vec![usize::MAX; var_count];
    for (i, var) in target_vars.iter().enumerate() {
        target_bit[(var.id() - 1) as usize] = i;
    }

    // Unit-propagate the formula once: unit clauses (and everything they
    // imply) hold in every model, so they can be substituted up front.
    let all: Vec<Vec<Lit>> = cnf.clauses().iter().map(|c| c.literals().to_vec()).collect();
    let mut pre: Vec<Option<bool>> = vec![None; var_count];
    if propagate(&all, &mut pre).is_none() {
        return Ok(AcceptHistogram { accepted: vec![BigUint::zero(); n + 1] });
    }
    // Forced target variables constrain which assignments can succeed.
    let (mut required_true, mut required_false) = (0u32, 0u32);
    for (i, var) in target_vars.iter().enumerate() {
        match pre[(var.id() - 1) as usize] {
            Some(true) => required_true |= 1 << i,
            Some(false) => required_false |= 1 << i,
            None => {}
        }
    }

    // Split each remaining clause into its target part and its residual.
    // Clauses without target literals are constant across assignments.
    let mut fixed: Vec<Vec<Lit>> = Vec::new();
    let mut by_residual: BTreeMap<Vec<Lit>, Vec<TargetTest>> = BTreeMap::new();
    for clause in &all {
        let (mut pos, mut neg) = (0u32, 0u32);
        let mut residual = Vec::new();
        let mut satisfied = false;
        for &lit in clause {
            let idx = (lit.var.id() - 1) as usize;
            if pre[idx] == Some(lit.positive) {
                satisfied = true;
                break;
            }
            if pre[idx].is_some() {
                continue; // literal false in every model
            }
            let bit = target_bit[idx];
            if bit == usize::MAX {
                residual.push(lit);
            } else if lit.positive {
                pos |= 1 << bit;
            } else {
                neg |= 1 << bit;
            }
        }
        if satisfied {
            continue;
        }
        if pos == 0 && neg == 0 {
            fixed.push(residual);
        } else {
            residual.sort_unstable();
            by_residual.entry(residual).or_default().push((pos, neg));
        }
    }
    let groups: Vec<(Vec<Lit>, TestSet)> =
        by_residual.into_iter().map(|(residual, tests)| (residual, compress_tests(tests))).collect();

    let target_indices: Vec<usize> =
        target_vars.iter().map(|var| (var.id() - 1) as usize).collect();
    let mut accepted = vec![0u64; n + 1];
    let mut assignment: Vec<Option<bool>> = vec![None; var_count];
    let mut memo: HashMap<Vec<Lit>, bool> = HashMap::new();
    'mask: for mask in 0u64..1 << n {
        let m = mask as u32;
        if m & required_false != 0 || required_true & !m != 0 {
            continue; // contradicts a unit-implied target value
        }
        let mut forced: Vec<Lit> = Vec::new();
        let mut extra: Vec<Vec<Lit>> = Vec::new();
        for (residual, tests) in &groups {
            // A clause is false on the targets iff no positive target
            // bit is set and every negated target bit is.
            let some_clause_false = match tests {
                TestSet::AllSubsets { universe, size } => (m & universe).count_ones() >= *size,
                TestSet::List(list) => {
                    list.iter().any(|&(pos, neg)| pos & m == 0 && neg & !m == 0)
                }
            };
            if !some_clause_false {
                continue;
            }
            match residual.as_slice() {
                [] => continue 'mask, // empty residual: the assignment is rejected
                [lit] => {
                    if forced.contains(&lit.negate()) {
                        continue 'mask;
                    }
                    if !forced.contains(lit) {
                        forced.push(*lit);
                    }
                }
                _ => extra.push(residual.clone()),
            }
        }
        forced.sort_unstable();
        // The residual formula never mentions target variables, so its
        // satisfiability depends only on the forced residuals.
        let sat = if extra.is_empty() {
            match memo.get(&forced) {
                Some(&cached) => cached,
                None => {
                    let result =
                        solve_residual(&fixed, &forced, &pre, &target_indices, &mut assignment);
                    memo.insert(forced, result);
                    result
                }
            }
        } else {
            extra.extend(fixed.iter().cloned());
            solve_residual(&extra, &forced, &pre, &target_indices, &mut assignment)
        };
        if sat {
            accepted[mask.count_ones() as usize] += 1;
        }
    }
    Ok(AcceptHistogram { accepted: accepted.into_iter().map(BigUint::from).collect() })
}

fn solve_residual(
    clauses: &[Vec<Lit>],
    forced: &[Lit],
    pre: &[Option<bool>],
    target_indices: &[usize],
    assignment: &mut Vec<Option<bool>>,
) -> bool {
    assignment.copy_from_slice(pre);
    // The residual clauses never mention the targets; fixing them keeps
    // the search over residual variables only.
    for &idx in target_indices {
        if assignment[idx].is_none() {
            assignment[idx] = Some(false);
        }
    }
    for lit in forced {
        assignment[(lit.var.id() - 1) as usize] = Some(lit.positive);
    }
    let free: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i].is_none()).collect();
    dpll(clauses, assignment, &free)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approx::encode_approx;

    fn shape(spec: &str) -> ModelShape {
        spec.parse().unwrap()
    }

    fn ratio(num: u64, den: u64) -> Ratio<BigUint> {
        Ratio::new(BigUint::from(num), BigUint::from(den))
    }

    #[test]
    fn chain_16_coverage() {
        let report = coverage(&shape("2x2,2x2;m=2;k=2")).unwrap();
        assert_eq!((report.derived_n, report.derived_k), (16, 8));
        assert_eq!(report.overall_coverage, ratio(17411, 39203));
        assert_eq!(report.maxcount_coverage, ratio(1446, 12870));
    }

    #[test]
    fn chain_32_coverage() {
        let report = coverage(&shape("2x2,2x2,2x2;m=2;k=2")).unwrap();
        assert_eq!((report.derived_n, report.derived_k), (32, 16));
        assert_eq!(report.overall_coverage, ratio(303239171, 2448023843));
    }

    #[test]
    fn five_of_ten_models_coverage() {
        let best = coverage(&shape("2x3;m=2;k=3;ff=1;ft=1")).unwrap();
        assert_eq!((best.derived_n, best.derived_k), (10, 5));
        assert_eq!(best.overall_coverage, ratio(414, 638));
        assert_eq!(best.maxcount_coverage, ratio(76, 252));

        let wide = coverage(&shape("2x2;m=3;k=2;ff=1;ft=1")).unwrap();
        assert_eq!(wide.overall_coverage, ratio(467, 638));

        let deep = coverage(&shape("2x2,2x2;m=2;k=2;ff=3;ft=3")).unwrap();
        assert_eq!(deep.overall_coverage, ratio(134, 638));
    }

    #[test]
    fn min_required_examples() {
        let chain = shape("2x2,2x2;m=2;k=2");
        // all-false: requirement 0, accepted
        assert_eq!(min_required_trues(&chain, &[0, 0, 0, 0]), Ok(Some(0)));
        // one group of 4 holding 3 trues, a sibling holding 1: the top
        // column over them needs ceil(3/2) + ceil(1/2) = 3 > top bound 2
        let one_level = shape("2x2;m=2;k=2");
        assert_eq!(min_required_trues(&one_level, &[3, 1]), Ok(Some(3)));
        assert!(3 > one_level.top_k);
        // one true per group: one parent true per column suffices
        assert_eq!(min_required_trues(&one_level, &[1, 1]), Ok(Some(2)));
    }

    #[test]
    fn min_required_validates_counts() {
        let s = shape("2x2;m=2;k=2");
        assert_eq!(
            min_required_trues(&s, &[0]),
            Err(OracleError::LeafCountLength { expected: 2, got: 1 })
        );
        assert_eq!(
            min_required_trues(&s, &[5, 0]),
            Err(OracleError::LeafCountOutOfRange { group: 0, count: 5, min: 0, max: 4 })
        );
        let pinned = shape("2x3;m=2;k=3;ff=1;ft=1");
        // group 2 holds the pinned true; counts below it are invalid
        assert_eq!(
            min_required_trues(&pinned, &[0, 0, 0]),
            Err(OracleError::LeafCountOutOfRange { group: 2, count: 0, min: 1, max: 4 })
        );
    }

    #[test]
    fn histogram_edges() {
        // t = 0 always accepted; t = 1 accepted for every position
        let hist = count_accepted_dp(&shape("2x2,2x2;m=2;k=2")).unwrap();
        assert_eq!(hist.accepted[0], BigUint::from(1u32));
        assert_eq!(hist.accepted[1], BigUint::from(16u32));
        // nothing beyond the derived bound is accepted
        for t in 9..=16 {
            assert_eq!(hist.accepted[t], BigUint::zero(), "t={t}");
        }
    }

    #[test]
    fn unconstrained_top_covers_everything() {
        // top bound equal to the top node size never bites
        let report = coverage(&shape("2x2;m=2;k=4")).unwrap();
        assert_eq!(report.overall_coverage, ratio(1, 1));
    }

    #[test]
    fn oracles_agree_small_shapes() {
        for spec in [
            "2x2;m=2;k=2",
            "2x2;m=3;k=2;ff=1;ft=1",
            "2x3;m=2;k=3;ff=1;ft=1",
            "2x2,2x2;m=2;k=2",
            "2x2,2x2;m=2;k=2;ff=3;ft=3",
            "2x2,2x2;m=2;k=3",
            "3x2;m=2;k=4;ff=2;ft=0",
            "2x2,2x3;m=1;k=2",
        ] {
            let s = shape(spec);
            let dp = count_accepted_dp(&s).unwrap();
            let bf = count_accepted_bruteforce(&encode_approx(&s).unwrap()).unwrap();
            assert_eq!(dp, bf, "oracles disagree for {spec}");
        }
    }

    #[test]
    fn structural_accept_matches_sat_extend() {
        let s = shape("2x2;m=2;k=2");
        let enc = encode_approx(&s).unwrap();
        let n = enc.target_vars.len();
        for mask in 0u32..1 << n {
            let targets: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            let structural = accepts(&s, &targets).unwrap();
            let sat = sat_extend(&enc.cnf, &targets).unwrap();
            assert_eq!(structural, sat, "mismatch for mask {mask:#b}");
        }
    }

    #[test]
    fn acceptance_is_downward_closed() {
        let s = shape("2x2,2x2;m=2;k=2");
        let n = 16;
        // sample: take each accepted assignment from a fixed set of masks
        // and flip every true to false in turn
        for mask in (0u32..1 << n).step_by(97) {
            let targets: Vec<bool> = (0..n).map(|i| mask >> i & 1 == 1).collect();
            if !accepts(&s, &targets).unwrap() {
                continue;
            }
            for i in 0..n {
                if targets[i] {
                    let mut weaker = targets.clone();
                    weaker[i] = false;
                    assert!(accepts(&s, &weaker).unwrap(), "flip {i} of {mask:#b}");
                }
            }
        }
    }

    #[test]
    fn assignment_length_checked() {
        let s = shape("2x2;m=2;k=2");
        assert_eq!(
            accepts(&s, &[true]),
            Err(OracleError::AssignmentLength { expected: 8, got: 1 })
        );
        let enc = encode_approx(&s).unwrap();
        assert_eq!(
            sat_extend(&enc.cnf, &[true]),
            Err(OracleError::AssignmentLength { expected: 8, got: 1 })
        );
    }

    #[test]
    fn brute_force_limit_enforced() {
        let s = shape("2x2,2x2,2x2;m=2;k=2");
        let enc = encode_approx(&s).unwrap();
        assert_eq!(
            count_accepted_bruteforce(&enc),
            Err(OracleError::TooLarge { n: 32, limit: BRUTE_FORCE_LIMIT })
        );
    }

    #[test]
    fn histogram_totals_are_binomials() {
        let hist = count_accepted_dp(&shape("2x3;m=2;k=3;ff=1;ft=1")).unwrap();
        let expected: [u64; 11] = [1, 10, 45, 120, 210, 252, 210, 120, 45, 10, 1];
        for (t, e) in expected.iter().enumerate() {
            assert_eq!(hist.possible()[t], BigUint::from(*e));
        }
    }

    #[test]
    fn sat_extend_rejects_overfull() {
        let s = shape("2x2;m=2;k=2");
        let enc = encode_approx(&s).unwrap();
        // 8 targets, derived k = 4; all-true has 8 trues and must fail
        assert!(!sat_extend(&enc.cnf, &[true; 8]).unwrap());
        assert!(sat_extend(&enc.cnf, &[false; 8]).unwrap());
    }
}
