use super::{AdError, NodeRef, Tape};
use crate::scalar::Scalar;

/// Reverse-mode gradient compared against central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct FdReport<T> {
    pub analytic: Vec<T>,
    pub numeric: Vec<T>,
    pub max_abs_err: T,
    /// `|a − n| / max(|a|, |n|, floor)`, maximised over inputs.
    pub max_rel_err: T,
}

/// Relative error with an absolute floor on the denominator.
pub fn relative_error<T: Scalar>(analytic: T, numeric: T, floor: T) -> T {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Denominator floor used by [`finite_diff_check`].
pub const DEFAULT_REL_FLOOR: f64 = 1e-8;

/// Compares the tape gradient of `f` at `inputs` with `(f(x+h) − f(x−h)) / 2h`
/// per coordinate. `f` is re-recorded on a fresh tape for every probe.
pub fn finite_diff_check<T, F>(f: F, inputs: &[T], step: T) -> Result<FdReport<T>, AdError>
where
    T: Scalar,
    F: Fn(&mut Tape<T>, &[NodeRef]) -> NodeRef,
{
    finite_diff_check_with_floor(f, inputs, step, T::lit(DEFAULT_REL_FLOOR))
}

/// [`finite_diff_check`] with an explicit relative-error denominator floor.
pub fn finite_diff_check_with_floor<T, F>(
    f: F,
    inputs: &[T],
    step: T,
    floor: T,
) -> Result<FdReport<T>, AdError>
where
    T: Scalar,
    F: Fn(&mut Tape<T>, &[NodeRef]) -> NodeRef,
{
    assert!(step > T::zero(), "finite-difference step must be positive");
    let eval = |xs: &[T], grad: bool| -> Result<(T, Option<Vec<T>>), AdError> {
        let mut tape = Tape::new();
        let leaves = xs
            .iter()
            .map(|&x| tape.leaf(x, grad))
            .collect::<Result<Vec<_>, _>>()?;
        let out = f(&mut tape, &leaves);
        let value = tape.value(out);
        let grads = if grad {
            let g = tape.backward(out)?;
            Some(leaves.iter().map(|&l| g.wrt(l)).collect())
        } else {
            None
        };
        Ok((value, grads))
    };

    let (f0, analytic) = eval(inputs, true)?;
    if !f0.is_finite() {
        return Err(AdError::NonFiniteProbe(0));
    }
    let analytic = analytic.expect("gradients requested");
    let two = T::lit(2.0);
    let mut numeric = Vec::with_capacity(inputs.len());
    let mut probe = inputs.to_vec();
    for i in 0..inputs.len() {
        probe[i] = inputs[i] + step;
        let (fp, _) = eval(&probe, false)?;
        probe[i] = inputs[i] - step;
        let (fm, _) = eval(&probe, false)?;
        probe[i] = inputs[i];
        if !fp.is_finite() || !fm.is_finite() {
            return Err(AdError::NonFiniteProbe(i));
        }
        numeric.push((fp - fm) / (two * step));
    }

    let mut max_abs_err = T::zero();
    let mut max_rel_err = T::zero();
    for (&a, &n) in analytic.iter().zip(&numeric) {
        max_abs_err = max_abs_err.max((a - n).abs());
        max_rel_err = max_rel_err.max(relative_error(a, n, floor));
    }
    Ok(FdReport {
        analytic,
        numeric,
        max_abs_err,
        max_rel_err,
    })
}
