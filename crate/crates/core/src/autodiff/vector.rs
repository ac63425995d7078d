use super::{NodeRef, OpKind, Tape};
use crate::scalar::Scalar;

/// Three tape scalars forming a 3-vector.
pub type Vec3Ref = [NodeRef; 3];

impl<T: Scalar> Tape<T> {
    pub fn constant3(&mut self, v: [T; 3]) -> Vec3Ref {
        v.map(|c| self.constant(c))
    }

    pub fn values3(&self, v: Vec3Ref) -> [T; 3] {
        v.map(|c| self.value(c))
    }

    pub fn add3(&mut self, a: Vec3Ref, b: Vec3Ref) -> Vec3Ref {
        [0, 1, 2].map(|k| self.add(a[k], b[k]))
    }

    pub fn sub3(&mut self, a: Vec3Ref, b: Vec3Ref) -> Vec3Ref {
        [0, 1, 2].map(|k| self.sub(a[k], b[k]))
    }

    pub fn scale3(&mut self, a: Vec3Ref, s: NodeRef) -> Vec3Ref {
        [0, 1, 2].map(|k| self.mul(a[k], s))
    }

    pub fn dot3(&mut self, a: Vec3Ref, b: Vec3Ref) -> NodeRef {
        self.dot(&a, &b)
    }

    /// Dot product with a constant vector.
    pub fn dot3_const(&mut self, a: Vec3Ref, b: [T; 3]) -> NodeRef {
        self.linear_combination(&[(a[0], b[0]), (a[1], b[1]), (a[2], b[2])])
    }

    pub fn cross3(&mut self, a: Vec3Ref, b: Vec3Ref) -> Vec3Ref {
        [
            self.det2(a[1], a[2], b[1], b[2]),
            self.det2(a[2], a[0], b[2], b[0]),
            self.det2(a[0], a[1], b[0], b[1]),
        ]
    }

    /// `sqrt(|a|² + ε²)` as one node.
    pub fn norm3_smooth(&mut self, a: Vec3Ref, eps: T) -> NodeRef {
        let v = self.values3(a);
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + eps * eps).sqrt();
        self.push_node(
            OpKind::Composite,
            n,
            [(a[0], v[0] / n), (a[1], v[1] / n), (a[2], v[2] / n)],
        )
    }

    /// `sqrt(x² + y² + ε²)` as one node.
    pub fn norm2_smooth(&mut self, x: NodeRef, y: NodeRef, eps: T) -> NodeRef {
        let (a, b) = (self.value(x), self.value(y));
        let n = (a * a + b * b + eps * eps).sqrt();
        self.push_node(OpKind::Composite, n, [(x, a / n), (y, b / n)])
    }

    /// `a / sqrt(|a|² + ε²)`.
    pub fn normalize3_smooth(&mut self, a: Vec3Ref, eps: T) -> Vec3Ref {
        let n = self.norm3_smooth(a, eps);
        [0, 1, 2].map(|k| self.div(a[k], n))
    }

    /// Mean of several 3-vectors.
    pub fn mean3(&mut self, vs: &[Vec3Ref]) -> Vec3Ref {
        [0, 1, 2].map(|k| {
            let comps: Vec<_> = vs.iter().map(|v| v[k]).collect();
            self.mean(&comps)
        })
    }
}
