use super::{AdError, NodeRef, OpKind, Tape, EXP_CLAMP};
use crate::scalar::{self, Scalar};

impl<T: Scalar> Tape<T> {
    /// Records an elementary operation selected at runtime.
    pub fn elementary(&mut self, op: OpKind, operands: &[NodeRef]) -> Result<NodeRef, AdError> {
        let expected = op.arity().ok_or(AdError::UnknownOp(op))?;
        if operands.len() != expected {
            return Err(AdError::Arity {
                op,
                expected,
                found: operands.len(),
            });
        }
        for &r in operands {
            self.check(r)?;
        }
        let a = operands[0];
        Ok(match op {
            OpKind::Add => self.add(a, operands[1]),
            OpKind::Sub => self.sub(a, operands[1]),
            OpKind::Mul => self.mul(a, operands[1]),
            OpKind::Div => self.div(a, operands[1]),
            OpKind::Pow => self.pow(a, operands[1]),
            OpKind::Neg => self.neg(a),
            OpKind::Exp => self.exp(a),
            OpKind::Ln => self.ln(a),
            OpKind::Sqrt => self.sqrt(a),
            OpKind::Sigmoid => self.sigmoid(a),
            OpKind::Softplus => self.softplus(a),
            OpKind::LogSigmoid => self.log_sigmoid(a),
            OpKind::SmoothAbs => self.smooth_abs(a, T::lit(crate::SMOOTH_EPS)),
            OpKind::Leaf | OpKind::PowConst | OpKind::Affine | OpKind::Composite => {
                unreachable!("rejected by arity")
            }
        })
    }

    #[inline]
    fn unary(&mut self, op: OpKind, a: NodeRef, value: T, d: T) -> NodeRef {
        self.push_node(op, value, [(a, d)])
    }

    #[inline]
    fn binary(&mut self, op: OpKind, a: NodeRef, b: NodeRef, value: T, da: T, db: T) -> NodeRef {
        self.push_node(op, value, [(a, da), (b, db)])
    }

    pub fn add(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let v = self.value(a) + self.value(b);
        self.binary(OpKind::Add, a, b, v, T::one(), T::one())
    }

    pub fn sub(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let v = self.value(a) - self.value(b);
        self.binary(OpKind::Sub, a, b, v, T::one(), -T::one())
    }

    pub fn mul(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let (x, y) = (self.value(a), self.value(b));
        self.binary(OpKind::Mul, a, b, x * y, y, x)
    }

    pub fn div(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let (x, y) = (self.value(a), self.value(b));
        let q = x / y;
        self.binary(OpKind::Div, a, b, q, T::one() / y, -q / y)
    }

    pub fn neg(&mut self, a: NodeRef) -> NodeRef {
        let v = -self.value(a);
        self.unary(OpKind::Neg, a, v, -T::one())
    }

    /// `e^x` with the argument clamped to `[-60, 60]`; zero slope outside.
    pub fn exp(&mut self, a: NodeRef) -> NodeRef {
        let x = self.value(a);
        let lim = T::lit(EXP_CLAMP);
        let xc = x.max(-lim).min(lim);
        let e = xc.exp();
        let d = if x == xc { e } else { T::zero() };
        self.unary(OpKind::Exp, a, e, d)
    }

    /// Natural log with the argument lifted to `max(x, 1e-300)`.
    pub fn ln(&mut self, a: NodeRef) -> NodeRef {
        let x = self.value(a).max(T::log_floor());
        self.unary(OpKind::Ln, a, x.ln(), T::one() / x)
    }

    pub fn sqrt(&mut self, a: NodeRef) -> NodeRef {
        let r = self.value(a).max(T::zero()).sqrt();
        let d = T::lit(0.5) / r.max(T::lit(1e-150));
        self.unary(OpKind::Sqrt, a, r, d)
    }

    /// `x^y` for `x > 0`.
    pub fn pow(&mut self, a: NodeRef, b: NodeRef) -> NodeRef {
        let x = self.value(a).max(T::log_floor());
        let y = self.value(b);
        let v = x.powf(y);
        self.binary(OpKind::Pow, a, b, v, y * v / x, v * x.ln())
    }

    /// `x^p` for constant `p`.
    pub fn powf(&mut self, a: NodeRef, p: T) -> NodeRef {
        let x = self.value(a);
        let v = x.powf(p);
        let d = if p == T::zero() {
            T::zero()
        } else {
            p * x.powf(p - T::one())
        };
        self.unary(OpKind::PowConst, a, v, d)
    }

    /// `scale·x + shift` with constant coefficients.
    pub fn affine(&mut self, a: NodeRef, scale: T, shift: T) -> NodeRef {
        let v = scale * self.value(a) + shift;
        self.unary(OpKind::Affine, a, v, scale)
    }

    pub fn add_const(&mut self, a: NodeRef, c: T) -> NodeRef {
        self.affine(a, T::one(), c)
    }

    pub fn scale(&mut self, a: NodeRef, c: T) -> NodeRef {
        self.affine(a, c, T::zero())
    }

    pub fn square(&mut self, a: NodeRef) -> NodeRef {
        let x = self.value(a);
        self.unary(OpKind::PowConst, a, x * x, x + x)
    }

    pub fn sigmoid(&mut self, a: NodeRef) -> NodeRef {
        let s = scalar::sigmoid(self.value(a));
        self.unary(OpKind::Sigmoid, a, s, s * (T::one() - s))
    }

    pub fn softplus(&mut self, a: NodeRef) -> NodeRef {
        let x = self.value(a);
        self.unary(OpKind::Softplus, a, scalar::softplus(x), scalar::sigmoid(x))
    }

    /// `ln σ(x)`, evaluated without clamping.
    pub fn log_sigmoid(&mut self, a: NodeRef) -> NodeRef {
        let x = self.value(a);
        self.unary(
            OpKind::LogSigmoid,
            a,
            scalar::log_sigmoid(x),
            scalar::sigmoid(-x),
        )
    }

    /// `sqrt(x² + ε²)`: differentiable stand-in for `|x|`.
    pub fn smooth_abs(&mut self, a: NodeRef, eps: T) -> NodeRef {
        let x = self.value(a);
        let r = scalar::smooth_abs(x, eps);
        self.unary(OpKind::SmoothAbs, a, r, x / r)
    }

    /// `(x + sqrt(x² + ε²)) / 2`: smooth `max(x, 0)`.
    pub fn smooth_relu(&mut self, a: NodeRef, eps: T) -> NodeRef {
        let x = self.value(a);
        let r = scalar::smooth_abs(x, eps);
        let half = T::lit(0.5);
        self.push_node(OpKind::Composite, half * (x + r), [(a, half * (T::one() + x / r))])
    }

    /// Sum of any number of nodes as one node.
    pub fn sum(&mut self, xs: &[NodeRef]) -> NodeRef {
        let v = xs.iter().fold(T::zero(), |acc, &x| acc + self.value(x));
        self.push_node(OpKind::Composite, v, xs.iter().map(|&x| (x, T::one())))
    }

    /// Arithmetic mean as one node.
    pub fn mean(&mut self, xs: &[NodeRef]) -> NodeRef {
        assert!(!xs.is_empty(), "mean of an empty slice");
        let w = T::one() / T::from_usize(xs.len()).unwrap();
        let v = xs.iter().fold(T::zero(), |acc, &x| acc + self.value(x)) * w;
        self.push_node(OpKind::Composite, v, xs.iter().map(|&x| (x, w)))
    }

    /// `Σ cᵢ·xᵢ` with constant coefficients.
    pub fn linear_combination(&mut self, terms: &[(NodeRef, T)]) -> NodeRef {
        let v = terms
            .iter()
            .fold(T::zero(), |acc, &(x, c)| acc + c * self.value(x));
        self.push_node(OpKind::Composite, v, terms.iter().copied())
    }
}
