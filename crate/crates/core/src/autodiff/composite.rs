use super::{NodeRef, OpKind, Tape};
use crate::scalar::Scalar;

impl<T: Scalar> Tape<T> {
    pub fn dot(&mut self, a: &[NodeRef], b: &[NodeRef]) -> NodeRef {
        assert_eq!(a.len(), b.len(), "dot of unequal lengths");
        let mut v = T::zero();
        let mut parents = Vec::with_capacity(2 * a.len());
        for (&x, &y) in a.iter().zip(b) {
            let (xv, yv) = (self.value(x), self.value(y));
            v = v + xv * yv;
            parents.push((x, yv));
            parents.push((y, xv));
        }
        self.push_node(OpKind::Composite, v, parents)
    }

    /// `| a b ; c d | = a·d − b·c`.
    pub fn det2(&mut self, a: NodeRef, b: NodeRef, c: NodeRef, d: NodeRef) -> NodeRef {
        let (av, bv, cv, dv) = (self.value(a), self.value(b), self.value(c), self.value(d));
        self.push_node(
            OpKind::Composite,
            av * dv - bv * cv,
            [(a, dv), (b, -cv), (c, -bv), (d, av)],
        )
    }

    /// Max-shifted `ln Σ e^{xᵢ}`; its partials are the softmax of `xs`.
    pub fn logsumexp(&mut self, xs: &[NodeRef]) -> NodeRef {
        assert!(!xs.is_empty(), "logsumexp of an empty slice");
        let vals = self.values(xs);
        let probs = softmax_values(&vals);
        let m = vals.iter().copied().fold(T::neg_infinity(), T::max);
        let s = vals.iter().fold(T::zero(), |acc, &x| acc + (x - m).exp());
        let v = m + s.ln();
        self.push_node(
            OpKind::Composite,
            v,
            xs.iter().copied().zip(probs.iter().copied()),
        )
    }

    /// Softmax of `xs`, one node per output.
    pub fn softmax(&mut self, xs: &[NodeRef]) -> Vec<NodeRef> {
        assert!(!xs.is_empty(), "softmax of an empty slice");
        let p = softmax_values(&self.values(xs));
        (0..xs.len())
            .map(|i| {
                let parents: Vec<_> = xs
                    .iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let kron = if i == j { T::one() } else { T::zero() };
                        (x, p[i] * (kron - p[j]))
                    })
                    .collect();
                self.push_node(OpKind::Composite, p[i], parents)
            })
            .collect()
    }

    /// Weighted softmax `SoftMax(xᵢ + ln wᵢ)`; weights are lifted to the log floor.
    pub fn wsoftmax(&mut self, xs: &[NodeRef], ws: &[NodeRef]) -> Vec<NodeRef> {
        assert_eq!(xs.len(), ws.len(), "wsoftmax length mismatch");
        let shifted: Vec<_> = xs
            .iter()
            .zip(ws)
            .map(|(&x, &w)| {
                let lw = self.ln(w);
                self.add(x, lw)
            })
            .collect();
        self.softmax(&shifted)
    }

    /// `wsoftmax(−x, w)`.
    pub fn wsoftmin(&mut self, xs: &[NodeRef], ws: &[NodeRef]) -> Vec<NodeRef> {
        let neg: Vec<_> = xs.iter().map(|&x| self.neg(x)).collect();
        self.wsoftmax(&neg, ws)
    }

    /// Smooth minimum `Σ xᵢ·softmax(−τ·x)ᵢ`; tends to `min x` as `τ → ∞`.
    pub fn soft_min_value(&mut self, xs: &[NodeRef], temperature: T) -> NodeRef {
        let scaled: Vec<_> = xs.iter().map(|&x| self.scale(x, -temperature)).collect();
        let w = self.softmax(&scaled);
        self.dot(xs, &w)
    }

    /// Smooth maximum, the mirror of [`Tape::soft_min_value`].
    pub fn soft_max_value(&mut self, xs: &[NodeRef], temperature: T) -> NodeRef {
        let scaled: Vec<_> = xs.iter().map(|&x| self.scale(x, temperature)).collect();
        let w = self.softmax(&scaled);
        self.dot(xs, &w)
    }
}

/// Max-shifted softmax on plain values.
pub(crate) fn softmax_values<T: Scalar>(xs: &[T]) -> Vec<T> {
    let m = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = xs.iter().map(|&x| (x - m).exp()).collect();
    let s = e.iter().fold(T::zero(), |a, &b| a + b);
    e.into_iter().map(|x| x / s).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logsumexp_symmetric_pair() {
        let mut t = Tape::<f64>::new();
        let a = t.var(0.0);
        let b = t.var(0.0);
        let l = t.logsumexp(&[a, b]);
        assert!((t.value(l) - 2f64.ln()).abs() < 1e-15);
        let g = t.backward(l).unwrap();
        assert_eq!(g.wrt(a), 0.5);
        assert_eq!(g.wrt(b), 0.5);
    }

    #[test]
    fn logsumexp_large_inputs_stay_finite() {
        let mut t = Tape::<f64>::new();
        let xs: Vec<_> = [1000.0, 999.0, -1e4].iter().map(|&v| t.var(v)).collect();
        let l = t.logsumexp(&xs);
        assert!(t.value(l).is_finite());
        let g = t.backward(l).unwrap();
        let total: f64 = xs.iter().map(|&x| g.wrt(x)).sum();
        assert!((total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn det2_and_dot() {
        let mut t = Tape::<f64>::new();
        let v: Vec<_> = [1.0, 2.0, 3.0, 4.0].iter().map(|&x| t.var(x)).collect();
        let d = t.det2(v[0], v[1], v[2], v[3]);
        assert_eq!(t.value(d), -2.0);
        let p = t.dot(&v[..2], &v[2..]);
        assert_eq!(t.value(p), 11.0);
        let g = t.backward(d).unwrap();
        assert_eq!([g.wrt(v[0]), g.wrt(v[1]), g.wrt(v[2]), g.wrt(v[3])], [4.0, -3.0, -2.0, 1.0]);
    }

    #[test]
    fn soft_min_of_equal_inputs_is_exact() {
        let mut t = Tape::<f64>::new();
        let xs: Vec<_> = (0..3).map(|_| t.var(10.0)).collect();
        for temp in [0.1, 1.0, 25.0, 1e3] {
            let m = t.soft_min_value(&xs, temp);
            assert_eq!(t.value(m), 10.0);
        }
    }

    #[test]
    fn wsoftmin_matches_direct_formula() {
        let mut t = Tape::<f64>::new();
        let xs = [t.var(0.0), t.var(1.0)];
        let ws = [t.constant(1.0), t.constant(1.0)];
        let p = t.wsoftmin(&xs, &ws);
        let e = (-1f64).exp();
        assert!((t.value(p[0]) - 1.0 / (1.0 + e)).abs() < 1e-15);
        assert!((t.value(p[1]) - e / (1.0 + e)).abs() < 1e-15);
    }
}
