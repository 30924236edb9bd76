//! Scalar automatic differentiation.
//!
//! Reverse mode runs over a [`Tape`] of [`Var`]s and produces parameter
//! gradients. Forward mode propagates [`Jet`]s carrying first and diagonal
//! second partials with respect to a handful of inputs. The two compose:
//! `Jet<Var>` gives input derivatives whose parameter gradients can then be
//! taken on the tape.

mod jet;
mod real;
mod tape;

use rayon::prelude::*;

pub use jet::{jet_eval, Jet, MAX_SLOTS};
pub use real::{stable_tanh, Real};
pub use tape::{Op, Sweep, Tape, Var};

use crate::error::{Error, Result};

/// Records `f` over fresh inputs holding `params` and returns its value and
/// gradient.
pub fn record_and_grad<F>(params: &[f64], f: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> FnOnce(&[Var<'t>]) -> Var<'t>,
{
    let mut grad = vec![0.0; params.len()];
    let value = accumulate_grad(params, &mut grad, f)?;
    check_gradient(&grad)?;
    Ok((value, grad))
}

/// Like [`record_and_grad`] but adds the gradient into `grad`.
pub fn accumulate_grad<F>(params: &[f64], grad: &mut [f64], f: F) -> Result<f64>
where
    F: for<'t> FnOnce(&[Var<'t>]) -> Var<'t>,
{
    assert_eq!(params.len(), grad.len());
    let tape = Tape::with_capacity(1 << 12, 1 << 14);
    let vars = tape.inputs(params);
    let out = f(&vars);
    if let Some((op, node)) = tape.first_non_finite() {
        return Err(Error::NonFiniteTape { op, node });
    }
    if out.is_constant() {
        return Ok(out.value());
    }
    let sweep = tape.gradient(out);
    for (g, a) in grad.iter_mut().zip(&sweep.adjoints) {
        *g += a;
    }
    Ok(out.value())
}

/// Value and gradient of `Σ_chunks f(params, chunk)` over `0..n_items`.
///
/// Each chunk is recorded on its own tape, possibly on another worker; the
/// per-chunk results are summed in chunk order so the total does not depend
/// on the thread count.
pub fn batch_grad<F>(params: &[f64], n_items: usize, chunk: usize, f: F) -> Result<(f64, Vec<f64>)>
where
    F: for<'t> Fn(&[Var<'t>], std::ops::Range<usize>) -> Var<'t> + Sync,
{
    let chunk = chunk.max(1);
    let n_chunks = n_items.div_ceil(chunk);
    let parts: Vec<Result<(f64, Vec<f64>)>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let range = c * chunk..((c + 1) * chunk).min(n_items);
            let mut grad = vec![0.0; params.len()];
            let value = accumulate_grad(params, &mut grad, |p| f(p, range))?;
            Ok((value, grad))
        })
        .collect();
    let mut value = 0.0;
    let mut grad = vec![0.0; params.len()];
    for part in parts {
        let (v, g) = part?;
        value += v;
        for (a, b) in grad.iter_mut().zip(&g) {
            *a += b;
        }
    }
    check_gradient(&grad)?;
    Ok((value, grad))
}

fn check_gradient(grad: &[f64]) -> Result<()> {
    match grad.iter().position(|g| !g.is_finite()) {
        Some(index) => Err(Error::NonFiniteGradient { index }),
        None => Ok(()),
    }
}
