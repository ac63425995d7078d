//! Reverse-mode automatic differentiation on a flat, append-only tape.
//!
//! Each recorded node stores its value together with the local partial
//! derivatives with respect to its operands ("precomputed multiplier" style),
//! so the reverse sweep is a single pass over the partial lists. Composite
//! operations such as log-sum-exp or the fused raster kernel record one n-ary
//! node instead of many elementary ones.

mod check;
mod composite;
mod ops;
mod vector;

use std::sync::atomic::{AtomicU32, Ordering};

use thiserror::Error;

use crate::scalar::Scalar;

pub use check::{
    finite_diff_check, finite_diff_check_with_floor, relative_error, FdReport, DEFAULT_REL_FLOOR,
};
pub use vector::Vec3Ref;
pub(crate) use composite::softmax_values;

/// Lower/upper bound applied to the argument of [`Tape::exp`].
pub const EXP_CLAMP: f64 = 60.0;

/// Errors raised while recording or differentiating.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AdError {
    #[error("non-finite leaf value {0}")]
    NonFiniteLeaf(f64),
    #[error("operand belongs to tape {found}, expected tape {expected}")]
    CrossTape { expected: u32, found: u32 },
    #[error("node index {0} out of range")]
    InvalidRef(u32),
    #[error("operation {0:?} is not an elementary operation")]
    UnknownOp(OpKind),
    #[error("operation {op:?} takes {expected} operands, got {found}")]
    Arity {
        op: OpKind,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value recorded at node {0}")]
    NonFiniteValue(u32),
    #[error("finite-difference probe produced a non-finite value at input {0}")]
    NonFiniteProbe(usize),
}

/// What produced a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpKind {
    Leaf,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Exp,
    Ln,
    Sqrt,
    /// `x^y` with both operands on the tape.
    Pow,
    /// `x^p` for a constant exponent.
    PowConst,
    /// Affine map `a·x + b` with constant `a`, `b`.
    Affine,
    Sigmoid,
    Softplus,
    LogSigmoid,
    /// `sqrt(x² + ε²)`.
    SmoothAbs,
    /// n-ary node with caller-supplied partials.
    Composite,
}

impl OpKind {
    fn arity(self) -> Option<usize> {
        use OpKind::*;
        match self {
            Add | Sub | Mul | Div | Pow => Some(2),
            Neg | Exp | Ln | Sqrt | Sigmoid | Softplus | LogSigmoid | SmoothAbs => Some(1),
            Leaf | PowConst | Affine | Composite => None,
        }
    }
}

/// Handle to a differentiable scalar recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeRef {
    tape: u32,
    index: u32,
}

impl NodeRef {
    #[inline]
    pub fn index(self) -> usize {
        self.index as usize
    }

    #[inline]
    pub fn tape_id(self) -> u32 {
        self.tape
    }
}

static NEXT_TAPE_ID: AtomicU32 = AtomicU32::new(1);

/// Append-only computation graph in topological order.
#[derive(Debug)]
pub struct Tape<T> {
    id: u32,
    values: Vec<T>,
    ops: Vec<OpKind>,
    /// `offsets[i]..offsets[i + 1]` indexes node `i`'s operands.
    offsets: Vec<u32>,
    operands: Vec<u32>,
    partials: Vec<T>,
    grad_leaf: Vec<bool>,
    first_non_finite: Option<u32>,
}

impl<T: Scalar> Default for Tape<T> {
    fn default() -> Self {
        Self::new()
    }
}

impl<T: Scalar> Tape<T> {
    pub fn new() -> Self {
        Self::with_capacity(0, 0)
    }

    pub fn with_capacity(nodes: usize, edges: usize) -> Self {
        let mut offsets = Vec::with_capacity(nodes + 1);
        offsets.push(0);
        Self {
            id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed),
            values: Vec::with_capacity(nodes),
            ops: Vec::with_capacity(nodes),
            offsets,
            operands: Vec::with_capacity(edges),
            partials: Vec::with_capacity(edges),
            grad_leaf: Vec::with_capacity(nodes),
            first_non_finite: None,
        }
    }

    #[inline]
    pub fn id(&self) -> u32 {
        self.id
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Total number of recorded operand edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.operands.len()
    }

    /// Records an input. Rejects NaN and infinities.
    pub fn leaf(&mut self, value: T, requires_grad: bool) -> Result<NodeRef, AdError> {
        if !value.is_finite() {
            return Err(AdError::NonFiniteLeaf(value.to_f64_lossy()));
        }
        Ok(self.push_leaf(value, requires_grad))
    }

    /// Records a value that never receives a reported gradient.
    ///
    /// # Panics
    /// On a non-finite value.
    pub fn constant(&mut self, value: T) -> NodeRef {
        self.leaf(value, false).expect("finite constant")
    }

    /// Records a gradient-tracked input.
    ///
    /// # Panics
    /// On a non-finite value.
    pub fn var(&mut self, value: T) -> NodeRef {
        self.leaf(value, true).expect("finite variable")
    }

    fn push_leaf(&mut self, value: T, requires_grad: bool) -> NodeRef {
        let r = self.push_node(OpKind::Leaf, value, std::iter::empty());
        self.grad_leaf[r.index()] = requires_grad;
        r
    }

    #[inline]
    pub fn value(&self, r: NodeRef) -> T {
        self.check(r).expect("node on this tape");
        self.values[r.index()]
    }

    #[inline]
    pub fn values(&self, rs: &[NodeRef]) -> Vec<T> {
        rs.iter().map(|&r| self.value(r)).collect()
    }

    pub fn op(&self, r: NodeRef) -> OpKind {
        self.ops[r.index()]
    }

    /// Operand indices and local partials of a node.
    pub fn partials_of(&self, r: NodeRef) -> impl Iterator<Item = (usize, T)> + '_ {
        let (a, b) = (self.offsets[r.index()] as usize, self.offsets[r.index() + 1] as usize);
        self.operands[a..b]
            .iter()
            .zip(&self.partials[a..b])
            .map(|(&i, &p)| (i as usize, p))
    }

    pub fn requires_grad(&self, r: NodeRef) -> bool {
        self.grad_leaf[r.index()]
    }

    /// Verifies `r` was issued by this tape and is in range.
    #[inline]
    pub fn check(&self, r: NodeRef) -> Result<(), AdError> {
        if r.tape != self.id {
            return Err(AdError::CrossTape {
                expected: self.id,
                found: r.tape,
            });
        }
        if r.index() >= self.values.len() {
            return Err(AdError::InvalidRef(r.index));
        }
        Ok(())
    }

    /// First node whose value came out NaN or infinite, if any.
    pub fn check_finite(&self) -> Result<(), AdError> {
        match self.first_non_finite {
            Some(i) => Err(AdError::NonFiniteValue(i)),
            None => Ok(()),
        }
    }

    #[inline]
    fn node_ref(&self, index: usize) -> NodeRef {
        NodeRef {
            tape: self.id,
            index: index as u32,
        }
    }

    fn push_node(
        &mut self,
        op: OpKind,
        value: T,
        parents: impl IntoIterator<Item = (NodeRef, T)>,
    ) -> NodeRef {
        for (p, d) in parents {
            self.check(p).expect("operand on this tape");
            self.operands.push(p.index);
            self.partials.push(d);
        }
        self.finish_node(op, value)
    }

    #[inline]
    fn finish_node(&mut self, op: OpKind, value: T) -> NodeRef {
        let index = self.values.len();
        if !value.is_finite() && self.first_non_finite.is_none() {
            self.first_non_finite = Some(index as u32);
        }
        self.values.push(value);
        self.ops.push(op);
        self.grad_leaf.push(false);
        self.offsets.push(self.operands.len() as u32);
        self.node_ref(index)
    }

    /// Records a node whose value and local partials were computed by the caller.
    pub fn composite(&mut self, value: T, parents: &[(NodeRef, T)]) -> NodeRef {
        self.push_node(OpKind::Composite, value, parents.iter().copied())
    }

    /// Appends pre-validated composite nodes in bulk: `values[k]` owns
    /// `operands[offsets[k]..offsets[k+1]]`. Operand indices must already
    /// belong to this tape.
    pub(crate) fn extend_composites(
        &mut self,
        values: &[T],
        offsets: &[u32],
        operands: &[u32],
        partials: &[T],
    ) -> Vec<NodeRef> {
        debug_assert_eq!(offsets.len(), values.len() + 1);
        let limit = self.values.len() as u32;
        debug_assert!(operands.iter().all(|&i| i < limit));
        let mut out = Vec::with_capacity(values.len());
        for (k, &v) in values.iter().enumerate() {
            let (a, b) = (offsets[k] as usize, offsets[k + 1] as usize);
            self.operands.extend_from_slice(&operands[a..b]);
            self.partials.extend_from_slice(&partials[a..b]);
            out.push(self.finish_node(OpKind::Composite, v));
        }
        out
    }

    /// Reverse sweep from `output`; its adjoint is seeded with one.
    pub fn backward(&self, output: NodeRef) -> Result<Gradients<T>, AdError> {
        self.check(output)?;
        let n = output.index() + 1;
        let mut adj = vec![T::zero(); n];
        adj[output.index()] = T::one();
        for i in (0..n).rev() {
            let a = adj[i];
            if a == T::zero() {
                continue;
            }
            let (lo, hi) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
            for k in lo..hi {
                let p = self.operands[k] as usize;
                adj[p] = adj[p] + a * self.partials[k];
            }
        }
        Ok(Gradients {
            tape: self.id,
            adjoints: adj,
            grad_leaf: self.grad_leaf[..n].to_vec(),
        })
    }
}

/// Adjoints produced by [`Tape::backward`].
#[derive(Debug, Clone)]
pub struct Gradients<T> {
    tape: u32,
    adjoints: Vec<T>,
    grad_leaf: Vec<bool>,
}

impl<T: Scalar> Gradients<T> {
    /// Gradient with respect to a tracked leaf; `None` for anything else.
    pub fn get(&self, r: NodeRef) -> Option<T> {
        if r.tape != self.tape {
            return None;
        }
        match self.grad_leaf.get(r.index()) {
            Some(true) => Some(self.adjoints[r.index()]),
            _ => None,
        }
    }

    /// Gradient with respect to a tracked leaf, zero when the leaf is absent.
    pub fn wrt(&self, r: NodeRef) -> T {
        self.get(r).unwrap_or_else(T::zero)
    }

    /// Adjoint of any node at or before the differentiated output.
    pub fn adjoint(&self, r: NodeRef) -> T {
        if r.tape != self.tape {
            return T::zero();
        }
        self.adjoints.get(r.index()).copied().unwrap_or_else(T::zero)
    }

    /// `(leaf, gradient)` for every tracked leaf, in recording order.
    pub fn iter(&self) -> impl Iterator<Item = (NodeRef, T)> + '_ {
        let tape = self.tape;
        self.grad_leaf
            .iter()
            .enumerate()
            .filter(|(_, &g)| g)
            .map(move |(i, _)| {
                (
                    NodeRef {
                        tape,
                        index: i as u32,
                    },
                    self.adjoints[i],
                )
            })
    }

    pub fn len(&self) -> usize {
        self.grad_leaf.iter().filter(|&&g| g).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}
