//! Row numbering for the monitoring table.
//!
//! Every subformula becomes one 1-based row. Rows are grouped by frozen
//! block: the region of the formula governed by one freeze binder, cut off
//! at nested binders. Blocks are laid out in the order their binders appear
//! in the formula text, starting with the binder-free outer region, and the
//! rows inside a block follow a level-order (breadth-first, left to right)
//! walk of the block. A freeze node is a row of the block it appears in;
//! its body opens a later block.
//!
//! The layout makes each block a contiguous row range, gives the whole
//! formula row 1, and places every binder row before its body's rows, which
//! is what the evaluation order of the monitor relies on.

use super::{Formula, Relation};
use std::collections::{HashMap, VecDeque};

/// One row of the table: the node's operator with the row numbers of its
/// operands.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeKind {
    True,
    Prop(String),
    Constraint(String, Relation, f64),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Next(usize),
    Until(usize, usize),
    Release(usize, usize),
    Eventually(usize),
    Always(usize),
    Freeze(String, usize),
}

impl NodeKind {
    /// Rows whose value is written once and never recomputed: atoms are
    /// filled from the trace or from constraint resolution, and a freeze row
    /// receives a copy of its body's value.
    pub fn is_leaf(&self) -> bool {
        matches!(
            self,
            NodeKind::True | NodeKind::Prop(_) | NodeKind::Constraint(..) | NodeKind::Freeze(..)
        )
    }

    /// Short label for printed tables: the operator symbol, or the atom
    /// text.
    pub fn label(&self) -> String {
        match self {
            NodeKind::True => "true".into(),
            NodeKind::Prop(name) => name.clone(),
            NodeKind::Constraint(variable, relation, bound) => {
                format!("{variable} {relation} {bound}")
            }
            NodeKind::Not(_) => "!".into(),
            NodeKind::And(_, _) => "/\\".into(),
            NodeKind::Or(_, _) => "\\/".into(),
            NodeKind::Implies(_, _) => "->".into(),
            NodeKind::Next(_) => "X".into(),
            NodeKind::Until(_, _) => "U".into(),
            NodeKind::Release(_, _) => "R".into(),
            NodeKind::Eventually(_) => "F".into(),
            NodeKind::Always(_) => "G".into(),
            NodeKind::Freeze(variable, _) => format!("{variable}."),
        }
    }
}

/// Row-range descriptor of one frozen block.
///
/// `parent` is the binder's own row in the enclosing block, `root` the row
/// of the block's top node, and `[min, max]` the contiguous range of the
/// block's rows. `root == min` and `parent < root` always hold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrozenSubtree {
    pub variable: String,
    pub parent: usize,
    pub root: usize,
    pub min: usize,
    pub max: usize,
}

/// A formula laid out as table rows.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexedFormula {
    nodes: Vec<NodeKind>,
    labels: Vec<String>,
    /// Sorted by decreasing `root`, so iterating processes a nested block
    /// before the block of its binder.
    subtrees: Vec<FrozenSubtree>,
    outer_max: usize,
}

impl IndexedFormula {
    /// Number of rows.
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The node at `row` (1-based).
    pub fn node(&self, row: usize) -> &NodeKind {
        &self.nodes[row - 1]
    }

    /// Display label of `row` (1-based).
    pub fn label(&self, row: usize) -> &str {
        &self.labels[row - 1]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Frozen blocks in processing order (decreasing root row).
    pub fn subtrees(&self) -> &[FrozenSubtree] {
        &self.subtrees
    }

    /// Number of freeze binders.
    pub fn variable_count(&self) -> usize {
        self.subtrees.len()
    }

    /// Last row of the binder-free outer region; rows `1..=outer_max` are
    /// evaluated after every block has been processed.
    pub fn outer_max(&self) -> usize {
        self.outer_max
    }

    /// Rebuilds the subformula rooted at `row` from the table.
    pub fn subformula(&self, row: usize) -> Formula {
        match self.node(row) {
            NodeKind::True => Formula::True,
            NodeKind::Prop(name) => Formula::Prop(name.clone()),
            NodeKind::Constraint(variable, relation, bound) => {
                Formula::Constraint(variable.clone(), *relation, *bound)
            }
            NodeKind::Not(m) => Formula::not(self.subformula(*m)),
            NodeKind::And(m, n) => Formula::and(self.subformula(*m), self.subformula(*n)),
            NodeKind::Or(m, n) => Formula::or(self.subformula(*m), self.subformula(*n)),
            NodeKind::Implies(m, n) => Formula::implies(self.subformula(*m), self.subformula(*n)),
            NodeKind::Next(m) => Formula::next(self.subformula(*m)),
            NodeKind::Until(m, n) => Formula::until(self.subformula(*m), self.subformula(*n)),
            NodeKind::Release(m, n) => Formula::release(self.subformula(*m), self.subformula(*n)),
            NodeKind::Eventually(m) => Formula::eventually(self.subformula(*m)),
            NodeKind::Always(m) => Formula::always(self.subformula(*m)),
            NodeKind::Freeze(variable, m) => Formula::freeze(variable.clone(), self.subformula(*m)),
        }
    }
}

struct BlockSource<'f> {
    /// Binder introducing the block: its variable and its freeze node.
    /// `None` for the outer region.
    binder: Option<(&'f str, &'f Formula)>,
    root: &'f Formula,
}

fn collect_blocks<'f>(formula: &'f Formula, blocks: &mut Vec<BlockSource<'f>>) {
    if let Formula::Freeze(variable, body) = formula {
        blocks.push(BlockSource { binder: Some((variable, formula)), root: body });
        collect_blocks(body, blocks);
    } else {
        for child in formula.children() {
            collect_blocks(child, blocks);
        }
    }
}

/// Assigns every subformula its table row and derives the block
/// descriptors.
pub fn index_subformulas(formula: &Formula) -> IndexedFormula {
    let mut blocks = vec![BlockSource { binder: None, root: formula }];
    collect_blocks(formula, &mut blocks);

    // Row assignment: blocks in collection order, level-order inside each.
    let mut rows: Vec<&Formula> = Vec::new();
    let mut index_of: HashMap<*const Formula, usize> = HashMap::new();
    let mut ranges = Vec::with_capacity(blocks.len());
    for block in &blocks {
        let min = rows.len() + 1;
        let mut queue = VecDeque::from([block.root]);
        while let Some(node) = queue.pop_front() {
            rows.push(node);
            index_of.insert(node as *const Formula, rows.len());
            if !matches!(node, Formula::Freeze(..)) {
                queue.extend(node.children());
            }
        }
        ranges.push((min, rows.len()));
    }

    let index = |node: &Formula| index_of[&(node as *const Formula)];
    let nodes: Vec<NodeKind> = rows
        .iter()
        .map(|node| match node {
            Formula::True => NodeKind::True,
            Formula::Prop(name) => NodeKind::Prop(name.clone()),
            Formula::Constraint(variable, relation, bound) => {
                NodeKind::Constraint(variable.clone(), *relation, *bound)
            }
            Formula::Not(f) => NodeKind::Not(index(f)),
            Formula::And(l, r) => NodeKind::And(index(l), index(r)),
            Formula::Or(l, r) => NodeKind::Or(index(l), index(r)),
            Formula::Implies(l, r) => NodeKind::Implies(index(l), index(r)),
            Formula::Next(f) => NodeKind::Next(index(f)),
            Formula::Until(l, r) => NodeKind::Until(index(l), index(r)),
            Formula::Release(l, r) => NodeKind::Release(index(l), index(r)),
            Formula::Eventually(f) => NodeKind::Eventually(index(f)),
            Formula::Always(f) => NodeKind::Always(index(f)),
            Formula::Freeze(variable, body) => NodeKind::Freeze(variable.clone(), index(body)),
        })
        .collect();
    let labels = nodes.iter().map(NodeKind::label).collect();

    let mut subtrees: Vec<FrozenSubtree> = blocks
        .iter()
        .zip(&ranges)
        .filter_map(|(block, &(min, max))| {
            block.binder.map(|(variable, freeze)| FrozenSubtree {
                variable: variable.to_owned(),
                parent: index(freeze),
                root: min,
                min,
                max,
            })
        })
        .collect();
    subtrees.sort_by_key(|subtree| std::cmp::Reverse(subtree.root));

    IndexedFormula { nodes, labels, subtrees, outer_max: ranges[0].1 }
}
