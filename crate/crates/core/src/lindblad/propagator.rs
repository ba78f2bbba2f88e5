use super::Lindbladian;
use crate::error::{check_dims, Error, Result};
use crate::Super;

/// Deterministic map t ↦ ℒ_t with a fixed dimension.
pub trait GeneratorFamily: Sync {
    fn dim(&self) -> usize;
    fn beta(&self) -> f64;
    fn generator_at(&self, t: f64) -> Result<Lindbladian>;
}

/// Time-independent family.
#[derive(Debug, Clone)]
pub struct ConstantFamily(pub Lindbladian);

impl GeneratorFamily for ConstantFamily {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn beta(&self) -> f64 {
        self.0.beta()
    }

    fn generator_at(&self, _t: f64) -> Result<Lindbladian> {
        Ok(self.0.clone())
    }
}

/// Ordered product of `steps` midpoint exponentials exp(Δt ℒ_{mid}) from t2
/// to t1, without error control.
pub fn propagator_fixed<F: GeneratorFamily + ?Sized>(family: &F, t1: f64, t2: f64, steps: usize) -> Result<Super> {
    if t1 < t2 {
        return Err(Error::Domain(format!("propagator needs t1 ≥ t2, got {t1} < {t2}")));
    }
    if steps == 0 {
        return Err(Error::Domain("propagator needs at least one step".into()));
    }
    let d = family.dim();
    let mut acc = Super::identity(d);
    if t1 == t2 {
        return Ok(acc);
    }
    let dt = (t1 - t2) / steps as f64;
    for k in 0..steps {
        let mid = t2 + (k as f64 + 0.5) * dt;
        let l = family.generator_at(mid)?;
        check_dims(d, l.dim())?;
        let step = l.supermatrix().exp_scaled(dt)?;
        acc = &step * &acc;
    }
    Ok(acc)
}

const SELF_CONSISTENCY: f64 = 1e-8;
const MAX_HALVINGS: usize = 14;

/// Like [`propagator_fixed`], halving the step until two successive results
/// differ by less than 1e-8 entrywise; returns the finer one.
pub fn propagator<F: GeneratorFamily + ?Sized>(family: &F, t1: f64, t2: f64, steps: usize) -> Result<Super> {
    Ok(refined_pair(family, t1, t2, steps)?.1)
}

/// The last two products of the halving loop, (coarse, fine).
pub(crate) fn refined_pair<F: GeneratorFamily + ?Sized>(
    family: &F,
    t1: f64,
    t2: f64,
    steps: usize,
) -> Result<(Super, Super)> {
    let mut n = steps.max(1);
    let mut coarse = propagator_fixed(family, t1, t2, n)?;
    if t1 == t2 {
        return Ok((coarse.clone(), coarse));
    }
    for _ in 0..MAX_HALVINGS {
        n *= 2;
        let fine = propagator_fixed(family, t1, t2, n)?;
        if fine.max_abs_diff(&coarse) < SELF_CONSISTENCY {
            return Ok((coarse, fine));
        }
        coarse = fine;
    }
    Err(Error::Convergence(format!(
        "propagator from {t2} to {t1} not self-consistent after {n} steps"
    )))
}
