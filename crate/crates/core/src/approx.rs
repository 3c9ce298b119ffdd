//! Approximate-at-most-k tree models: a tree of h x w variable matrices
//! in which the unary value of every internal column bounds the true
//! count of its child group. Giving at-most-k at the top node yields an
//! incomplete at-most constraint over the bottom variables that is much
//! smaller than a genuine encoding.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::cnf::{Cnf, Lit, Var, VarRole};
use crate::encoders::{at_most_binomial, order_column, EncodeError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ShapeError {
    #[error("shape needs at least one level")]
    EmptyLevels,
    #[error("level dimensions must be at least 1x1, got {h}x{w}")]
    ZeroDimension { h: u32, w: u32 },
    #[error("leaf width multiplier must be at least 1")]
    ZeroLeafM,
    #[error("level {upper_index} size {h}x{w} is not a multiple of parent column height {parent_h}")]
    Divisibility { upper_index: usize, h: u32, w: u32, parent_h: u32 },
    #[error("top bound {top_k} exceeds top node size {size}")]
    TopKOutOfRange { top_k: u64, size: u64 },
    #[error("top bound {top_k} does not give an integer bottom count over {bottom} variables")]
    NonIntegerK { top_k: u64, bottom: u64 },
    #[error("{fix_false} fixed falses + {fix_true} fixed trues exceed {bottom} bottom variables")]
    FixesExceedBottom { fix_false: u64, fix_true: u64, bottom: u64 },
    #[error("fixing {fix_true} trues drives the derived bound below zero (raw k = {raw_k})")]
    NegativeDerivedK { raw_k: u64, fix_true: u64 },
    #[error("literal count exceeds the representable range")]
    LiteralCountOverflow,
    #[error(transparent)]
    Encode(#[from] EncodeError),
}

/// Full description of one approximate-at-most-k tree model.
///
/// `levels[0]` is the top node; every node at level i is an
/// `h_i x w_i` matrix of variables and each of its columns feeds one
/// child node at level i+1 (or a leaf group of `h_last * leaf_m` bottom
/// variables below the last level). `fix_false` / `fix_true` pin that
/// many bottom variables, adjusting the derived (k, n).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModelShape {
    pub levels: Vec<(u32, u32)>,
    pub leaf_m: u32,
    pub top_k: u64,
    pub fix_false: u64,
    pub fix_true: u64,
}

impl ModelShape {
    pub fn new(levels: Vec<(u32, u32)>, leaf_m: u32, top_k: u64) -> Self {
        ModelShape { levels, leaf_m, top_k, fix_false: 0, fix_true: 0 }
    }

    pub fn with_fixes(mut self, fix_false: u64, fix_true: u64) -> Self {
        self.fix_false = fix_false;
        self.fix_true = fix_true;
        self
    }

    /// Number of bottom variables: (prod of w_i) * h_last * leaf_m.
    pub fn bottom_count(&self) -> u64 {
        let w_prod: u64 = self.levels.iter().map(|&(_, w)| u64::from(w)).product();
        let h_last = self.levels.last().map_or(0, |&(h, _)| u64::from(h));
        w_prod * h_last * u64::from(self.leaf_m)
    }

    fn top_size(&self) -> u64 {
        self.levels
            .first()
            .map_or(0, |&(h, w)| u64::from(h) * u64::from(w))
    }

    /// Structural validation, ignoring the fix bounds.
    fn validate_tree(&self) -> Result<(), ShapeError> {
        if self.levels.is_empty() {
            return Err(ShapeError::EmptyLevels);
        }
        for &(h, w) in &self.levels {
            if h == 0 || w == 0 {
                return Err(ShapeError::ZeroDimension { h, w });
            }
        }
        if self.leaf_m == 0 {
            return Err(ShapeError::ZeroLeafM);
        }
        for (i, pair) in self.levels.windows(2).enumerate() {
            let (parent_h, _) = pair[0];
            let (h, w) = pair[1];
            if (h * w) % parent_h != 0 {
                return Err(ShapeError::Divisibility { upper_index: i + 1, h, w, parent_h });
            }
        }
        if self.top_k > self.top_size() {
            return Err(ShapeError::TopKOutOfRange { top_k: self.top_k, size: self.top_size() });
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ShapeError> {
        self.validate_tree()?;
        let (_, _) = self.derived_params()?;
        Ok(())
    }

    /// The (k, n) of the approximate-at-most-k-of-n this shape realizes:
    /// n = bottom - fixes, k = top_k * bottom / (h_1 * w_1) - fix_true.
    pub fn derived_params(&self) -> Result<(u64, u64), ShapeError> {
        self.validate_tree()?;
        let bottom = self.bottom_count();
        if self.fix_false + self.fix_true > bottom {
            return Err(ShapeError::FixesExceedBottom {
                fix_false: self.fix_false,
                fix_true: self.fix_true,
                bottom,
            });
        }
        let top_size = self.top_size();
        if (self.top_k * bottom) % top_size != 0 {
            return Err(ShapeError::NonIntegerK { top_k: self.top_k, bottom });
        }
        let raw_k = self.top_k * bottom / top_size;
        if raw_k < self.fix_true {
            return Err(ShapeError::NegativeDerivedK { raw_k, fix_true: self.fix_true });
        }
        let n = bottom - self.fix_false - self.fix_true;
        Ok((raw_k - self.fix_true, n))
    }
}

/// `2x2,2x2;m=2;k=2;ff=0;ft=0` — levels as `<h>x<w>` pairs, then leaf
/// multiplier, top bound and fix counts. `ff`/`ft` may be omitted.
impl fmt::Display for ModelShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &(h, w)) in self.levels.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{h}x{w}")?;
        }
        write!(
            f,
            ";m={};k={};ff={};ft={}",
            self.leaf_m, self.top_k, self.fix_false, self.fix_true
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("invalid shape string: {0}")]
pub struct ShapeParseError(String);

impl FromStr for ModelShape {
    type Err = ShapeParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ShapeParseError(s.to_string());
        let mut parts = s.split(';');
        let levels_part = parts.next().ok_or_else(bad)?;
        let mut levels = Vec::new();
        for level in levels_part.split(',') {
            let (h, w) = level.split_once('x').ok_or_else(bad)?;
            levels.push((h.trim().parse().map_err(|_| bad())?, w.trim().parse().map_err(|_| bad())?));
        }
        let mut leaf_m = None;
        let mut top_k = None;
        let mut fix_false = 0;
        let mut fix_true = 0;
        for part in parts {
            let (key, value) = part.split_once('=').ok_or_else(bad)?;
            let value: u64 = value.trim().parse().map_err(|_| bad())?;
            match key.trim() {
                "m" => leaf_m = Some(u32::try_from(value).map_err(|_| bad())?),
                "k" => top_k = Some(value),
                "ff" => fix_false = value,
                "ft" => fix_true = value,
                _ => return Err(bad()),
            }
        }
        Ok(ModelShape {
            levels,
            leaf_m: leaf_m.ok_or_else(bad)?,
            top_k: top_k.ok_or_else(bad)?,
            fix_false,
            fix_true,
        })
    }
}

/// One internal node: its variable matrix as `columns[c][j]`, where j
/// runs bottom-up through the order-encoded column.
#[derive(Debug, Clone)]
pub struct NodeVars {
    pub columns: Vec<Vec<Var>>,
}

impl NodeVars {
    pub fn all_vars(&self) -> Vec<Var> {
        self.columns.iter().flatten().copied().collect()
    }
}

/// Variable layout of one tree model. Column c of node p at level i feeds
/// node `p * w_{i+1}... + c` at the next level, leaf groups likewise.
#[derive(Debug, Clone)]
pub struct TreeLayout {
    /// `levels[i]` holds the nodes of level i+1, left to right.
    pub levels: Vec<Vec<NodeVars>>,
    /// Bottom variable groups, left to right, each of size h_last * leaf_m.
    pub leaf_groups: Vec<Vec<Var>>,
    /// Pinned bottom variables and their fixed values, ascending by id.
    pub pinned: Vec<(Var, bool)>,
}

/// A built approximate encoding: the formula, the n unpinned target
/// variables it constrains and the derived (k, n).
#[derive(Debug, Clone)]
pub struct EncodingResult {
    pub cnf: Cnf,
    pub target_vars: Vec<Var>,
    pub derived_k: u64,
    pub derived_n: u64,
    pub shape: ModelShape,
}

/// Allocates all variables of a shape into `cnf`: bottom variables first
/// (left to right; the trailing `fix_true` pinned true, the `fix_false`
/// before them pinned false), then internal matrices top-down, left to
/// right. Pinned bottom variables are registered as auxiliary, unpinned
/// ones as targets.
pub fn build_layout(shape: &ModelShape, cnf: &mut Cnf) -> Result<TreeLayout, ShapeError> {
    let (_, n) = shape.derived_params()?;
    let bottom = shape.bottom_count();

    let bottom_targets = cnf.alloc_vars(n as u32, VarRole::Target);
    let pinned_vars = cnf.alloc_vars((shape.fix_false + shape.fix_true) as u32, VarRole::Aux);
    let mut bottom_vars = bottom_targets;
    bottom_vars.extend(&pinned_vars);
    let pinned: Vec<(Var, bool)> = pinned_vars
        .iter()
        .enumerate()
        .map(|(i, &v)| (v, (i as u64) >= shape.fix_false))
        .collect();

    let group_size = (u64::from(shape.levels.last().unwrap().0) * u64::from(shape.leaf_m)) as usize;
    let leaf_groups: Vec<Vec<Var>> = bottom_vars.chunks(group_size).map(<[Var]>::to_vec).collect();
    debug_assert_eq!(leaf_groups.len() as u64 * group_size as u64, bottom);

    let mut levels = Vec::with_capacity(shape.levels.len());
    let mut node_count = 1usize;
    for &(h, w) in &shape.levels {
        let mut nodes = Vec::with_capacity(node_count);
        for _ in 0..node_count {
            let columns = (0..w).map(|_| cnf.alloc_vars(h, VarRole::Aux)).collect();
            nodes.push(NodeVars { columns });
        }
        levels.push(nodes);
        node_count *= w as usize;
    }

    Ok(TreeLayout { levels, leaf_groups, pinned })
}

/// Emits the CNF of a shape: the unguarded at-most on the top node, order
/// chains for every internal column, one guarded at-most per (column
/// level j, child group) link, and unit clauses for pinned bottoms.
/// Vacuous link bounds (at least the child group size) are skipped.
pub fn encode_approx(shape: &ModelShape) -> Result<EncodingResult, ShapeError> {
    let (derived_k, derived_n) = shape.derived_params()?;
    let mut cnf = Cnf::new();
    let layout = build_layout(shape, &mut cnf)?;

    let top_vars = layout.levels[0]
        .first()
        .map(NodeVars::all_vars)
        .unwrap_or_default();
    at_most_binomial(&mut cnf, &top_vars, shape.top_k as usize, None)?;

    for level in &layout.levels {
        for node in level {
            for column in &node.columns {
                order_column(&mut cnf, column)?;
            }
        }
    }

    for (i, level) in layout.levels.iter().enumerate() {
        let last = i + 1 == layout.levels.len();
        for (p, node) in level.iter().enumerate() {
            for (c, column) in node.columns.iter().enumerate() {
                let child_index = p * node.columns.len() + c;
                let child_vars: Vec<Var> = if last {
                    layout.leaf_groups[child_index].clone()
                } else {
                    layout.levels[i + 1][child_index].all_vars()
                };
                let expansion = child_vars.len() / column.len();
                for (j, &guard_var) in column.iter().enumerate() {
                    let bound = expansion * j;
                    if bound >= child_vars.len() {
                        continue;
                    }
                    at_most_binomial(&mut cnf, &child_vars, bound, Some(Lit::pos(guard_var)))?;
                }
            }
        }
    }

    for &(var, value) in &layout.pinned {
        let lit = if value { Lit::pos(var) } else { Lit::neg(var) };
        cnf.add_clause(vec![lit]).map_err(EncodeError::from)?;
    }

    let target_vars = cnf.target_vars().to_vec();
    Ok(EncodingResult { cnf, target_vars, derived_k, derived_n, shape: shape.clone() })
}

/// Literal count of [`encode_approx`] for this shape, computed in closed
/// form without building the formula. Large shapes encode to binomial
/// blocks with astronomically many clauses; the search uses this count
/// so it never has to materialize them.
pub fn approx_literal_count(shape: &ModelShape) -> Result<u64, ShapeError> {
    shape.validate()?;

    fn binom_block(vars: u64, bound: u64) -> Option<u64> {
        // C(vars, bound + 1) clauses of bound + 1 negated literals
        if bound >= vars {
            return Some(0);
        }
        let clauses = num_integer::binomial(BigUint::from(vars), BigUint::from(bound + 1));
        (clauses * (bound + 1)).to_u64()
    }

    let overflow = || ShapeError::LiteralCountOverflow;
    let (h1, w1) = shape.levels[0];
    let top_size = u64::from(h1) * u64::from(w1);
    let mut total = binom_block(top_size, shape.top_k).ok_or_else(overflow)?;

    let group_size = u64::from(shape.levels.last().unwrap().0) * u64::from(shape.leaf_m);
    let mut node_count = 1u64;
    for (i, &(h, w)) in shape.levels.iter().enumerate() {
        let h = u64::from(h);
        let w = u64::from(w);
        // order chains: h - 1 binary clauses per column
        total = total
            .checked_add(node_count * w * (h - 1) * 2)
            .ok_or_else(overflow)?;
        // links: every column level j adds a guarded at-most block
        let child_size = match shape.levels.get(i + 1) {
            Some(&(ch, cw)) => u64::from(ch) * u64::from(cw),
            None => group_size,
        };
        let expansion = child_size / h;
        let mut per_column = 0u64;
        for j in 0..h {
            let bound = expansion * j;
            if bound >= child_size {
                continue;
            }
            let block = binom_block(child_size, bound).ok_or_else(overflow)?;
            // one guard literal per clause in the block
            let clauses = block / (bound + 1);
            per_column = per_column
                .checked_add(block.checked_add(clauses).ok_or_else(overflow)?)
                .ok_or_else(overflow)?;
        }
        total = total
            .checked_add(
                (node_count * w).checked_mul(per_column).ok_or_else(overflow)?,
            )
            .ok_or_else(overflow)?;
        node_count *= w;
    }

    total = total
        .checked_add(shape.fix_false + shape.fix_true)
        .ok_or_else(overflow)?;
    Ok(total)
}

/// Search space for [`enumerate_shapes`]. The defaults cover every model
/// named in the reference experiments: at most two internal levels,
/// heights 2..4, widths 1..4, leaf multiplier 1..6 and any top bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShapeBounds {
    pub max_levels: usize,
    pub min_h: u32,
    pub max_h: u32,
    pub max_w: u32,
    pub max_leaf_m: u32,
}

impl Default for ShapeBounds {
    fn default() -> Self {
        ShapeBounds { max_levels: 2, min_h: 2, max_h: 4, max_w: 4, max_leaf_m: 6 }
    }
}

/// Every shape within `bounds` whose derived parameters equal (k, n), in
/// deterministic order: fewest levels first, then lexicographic on
/// (levels, leaf_m, top_k, fix_false, fix_true).
pub fn enumerate_shapes(k: u64, n: u64, bounds: &ShapeBounds) -> Vec<ModelShape> {
    let mut shapes = Vec::new();
    let mut level_stack: Vec<(u32, u32)> = Vec::new();
    collect_levels(&mut level_stack, bounds, &mut |levels| {
        for leaf_m in 1..=bounds.max_leaf_m {
            let base = ModelShape::new(levels.to_vec(), leaf_m, 0);
            let bottom = base.bottom_count();
            if bottom < n {
                continue;
            }
            let top_size = u64::from(levels[0].0) * u64::from(levels[0].1);
            for top_k in 0..=top_size {
                if (top_k * bottom) % top_size != 0 {
                    continue;
                }
                let raw_k = top_k * bottom / top_size;
                if raw_k < k {
                    continue;
                }
                let fix_true = raw_k - k;
                let Some(fix_false) = (bottom - n).checked_sub(fix_true) else {
                    continue;
                };
                let shape =
                    ModelShape::new(levels.to_vec(), leaf_m, top_k).with_fixes(fix_false, fix_true);
                debug_assert_eq!(shape.derived_params(), Ok((k, n)));
                shapes.push(shape);
            }
        }
    });
    shapes.sort_by(|a, b| {
        (a.levels.len(), &a.levels, a.leaf_m, a.top_k, a.fix_false, a.fix_true).cmp(&(
            b.levels.len(),
            &b.levels,
            b.leaf_m,
            b.top_k,
            b.fix_false,
            b.fix_true,
        ))
    });
    shapes.dedup();
    shapes
}

fn collect_levels(
    stack: &mut Vec<(u32, u32)>,
    bounds: &ShapeBounds,
    visit: &mut impl FnMut(&[(u32, u32)]),
) {
    if !stack.is_empty() {
        visit(stack);
    }
    if stack.len() == bounds.max_levels {
        return;
    }
    let parent_h = stack.last().map(|&(h, _)| h);
    for h in bounds.min_h..=bounds.max_h {
        for w in 1..=bounds.max_w {
            if let Some(ph) = parent_h {
                if (h * w) % ph != 0 {
                    continue;
                }
            }
            stack.push((h, w));
            collect_levels(stack, bounds, visit);
            stack.pop();
        }
    }
}
