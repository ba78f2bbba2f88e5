//! Arithmetic- and logarithmic-mean multiplications by a state.
//!
//! With ρ = Σ p_i |i⟩⟨i| and Δ_ρA = A − Tr[Aρ], the three maps act
//! elementwise in the eigenbasis of ρ:
//!
//! * 𝕊: (Δ_ρA)_ij · (p_i + p_j)/2
//! * 𝕁: (Δ_ρA)_ij · LM(p_i, p_j)
//! * ℳ = 𝕊 − 𝕁: (Δ_ρA)_ij · [(p_i + p_j)/2 − LM(p_i, p_j)]
//!
//! `smap` is also available without diagonalisation, as ½{ρ, Δ_ρA}.

use nalgebra::{Complex, DMatrix};

use super::{DensityMatrix, HermitianMatrix, Scalar};
use crate::error::{check_dims, Result};

/// Logarithmic mean (p − q)/(ln p − ln q) of two floored populations.
pub fn log_mean<T: Scalar>(p: T, q: T) -> T {
    let floor = T::lit(T::POPULATION_FLOOR);
    let (p, q) = (p.max(floor), q.max(floor));
    let am = (p + q) * T::lit(0.5);
    if (p - q).abs() < T::lit(1e-13) * p.max(q) {
        return am;
    }
    let x = (p - q) / (p + q);
    if x.abs() < T::lit(1e-3) {
        am * (T::one() - ratio_gap_series(x))
    } else {
        (p - q) / (p.ln() - q.ln())
    }
}

/// (p + q)/2 − LM(p, q), evaluated without cancellation. Never negative.
pub fn mean_gap<T: Scalar>(p: T, q: T) -> T {
    let floor = T::lit(T::POPULATION_FLOOR);
    let (p, q) = (p.max(floor), q.max(floor));
    let am = (p + q) * T::lit(0.5);
    if (p - q).abs() < T::lit(1e-13) * p.max(q) {
        return T::zero();
    }
    let x = (p - q) / (p + q);
    if x.abs() < T::lit(1e-3) {
        am * ratio_gap_series(x)
    } else {
        let lm = (p - q) / (p.ln() - q.ln());
        (am - lm).max(T::zero())
    }
}

// 1 − x/atanh(x) = x²/3 + 4x⁴/45 + 44x⁶/945 + …
fn ratio_gap_series<T: Scalar>(x: T) -> T {
    let x2 = x * x;
    x2 * (T::lit(1.0 / 3.0) + x2 * (T::lit(4.0 / 45.0) + x2 * T::lit(44.0 / 945.0)))
}

fn centred<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    check_dims(rho.dim(), a.dim())?;
    let mean = a.expectation(rho)?;
    Ok(a.shifted(mean))
}

fn eigen_factor_map<T: Scalar>(
    rho: &DensityMatrix<T>,
    a: &HermitianMatrix<T>,
    factor: impl Fn(T, T) -> T,
) -> Result<HermitianMatrix<T>> {
    let delta = centred(rho, a)?;
    let spec = rho.spectrum();
    let p = rho.populations();
    let mut t = spec.to_eigenbasis(delta.matrix());
    let d = p.len();
    for j in 0..d {
        for i in 0..d {
            t[(i, j)] *= Complex::new(factor(p[i], p[j]), T::zero());
        }
    }
    Ok(HermitianMatrix::symmetrised(spec.from_eigenbasis(&t)))
}

/// 𝕊_ρ(A) = ½{ρ, Δ_ρA}, evaluated directly.
pub fn smap<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let delta = centred(rho, a)?;
    rho.as_hermitian().jordan_product(&delta)
}

/// 𝕁_ρ(A) = ∫₀¹ ρ^s Δ_ρA ρ^{1−s} ds in closed form.
pub fn jmap<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    eigen_factor_map(rho, a, log_mean)
}

/// ℳ_ρ(A) = 𝕊_ρ(A) − 𝕁_ρ(A) with nonnegative eigen-factors.
pub fn mmap<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    eigen_factor_map(rho, a, mean_gap)
}

/// Averaged Wigner–Yanase–Dyson skew information Tr[A ℳ_ρ(A)]
/// = Σ_ij |Ã_ij|² [(p_i+p_j)/2 − LM(p_i,p_j)].
pub fn wyd_skew_information<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<T> {
    check_dims(rho.dim(), a.dim())?;
    let t = rho.spectrum().to_eigenbasis(a.matrix());
    let p = rho.populations();
    let d = p.len();
    let mut sum = T::zero();
    for j in 0..d {
        for i in 0..d {
            if i != j {
                sum += t[(i, j)].norm_sqr() * mean_gap(p[i], p[j]);
            }
        }
    }
    Ok(sum)
}

/// 𝕊, 𝕁 and ℳ of one operator from a single change of basis.
#[derive(Debug, Clone)]
pub struct MeanImages<T: Scalar> {
    pub s: HermitianMatrix<T>,
    pub j: HermitianMatrix<T>,
    pub m: HermitianMatrix<T>,
}

pub fn mean_images<T: Scalar>(rho: &DensityMatrix<T>, a: &HermitianMatrix<T>) -> Result<MeanImages<T>> {
    let delta = centred(rho, a)?;
    let spec = rho.spectrum();
    let p = rho.populations();
    let base = spec.to_eigenbasis(delta.matrix());
    let d = p.len();
    let scaled = |f: &dyn Fn(T, T) -> T| {
        let t = DMatrix::from_fn(d, d, |i, j| base[(i, j)] * Complex::new(f(p[i], p[j]), T::zero()));
        HermitianMatrix::symmetrised(spec.from_eigenbasis(&t))
    };
    Ok(MeanImages {
        s: scaled(&|x, y| (x + y) * T::lit(0.5)),
        j: scaled(&log_mean),
        m: scaled(&mean_gap),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::gibbs_state;

    #[test]
    fn log_mean_branches_agree_at_the_switch() {
        let q = 0.3_f64;
        let below = log_mean(q * (1.0 + 1.999e-3), q);
        let above = log_mean(q * (1.0 + 2.001e-3), q);
        assert!((below - above).abs() < 1e-6 * q);
        let direct = (0.31_f64 - 0.3) / (0.31_f64.ln() - 0.3_f64.ln());
        assert!((log_mean(0.31, 0.3) - direct).abs() < 1e-15);
    }

    #[test]
    fn mean_gap_is_nonnegative_near_coincidence() {
        for k in 1..60 {
            let p = 0.25;
            let q = p * (1.0 + 10f64.powi(-(k % 15)) * (k as f64 / 7.0));
            assert!(mean_gap(p, q) >= 0.0);
            assert!(mean_gap(q, p) >= 0.0);
        }
        assert_eq!(mean_gap(0.4, 0.4), 0.0);
    }

    #[test]
    fn two_level_gap_factor() {
        let lambda = mean_gap(0.75_f64, 0.25);
        let expected = 0.5 - 0.5 / 3f64.ln();
        assert!((lambda - expected).abs() < 1e-15);
        assert!((lambda - 0.044880).abs() < 1e-6);
    }

    #[test]
    fn images_match_individual_maps() {
        let h = HermitianMatrix::<f64>::symmetrised(DMatrix::from_fn(3, 3, |i, j| {
            Complex::new((i + 2 * j) as f64 * 0.1, (i as f64) - 0.5 * (j as f64))
        }));
        let rho = gibbs_state(&h, 0.8).unwrap();
        let a = HermitianMatrix::symmetrised(DMatrix::from_fn(3, 3, |i, j| {
            Complex::new(((i * 3 + j) % 4) as f64, 0.3 * (j as f64))
        }));
        let im = mean_images(&rho, &a).unwrap();
        assert!(im.s.max_abs_diff(&smap(&rho, &a).unwrap()) < 1e-13);
        assert!(im.j.max_abs_diff(&jmap(&rho, &a).unwrap()) < 1e-13);
        assert!(im.m.max_abs_diff(&mmap(&rho, &a).unwrap()) < 1e-13);
        assert!((&im.s - &im.j).max_abs_diff(&im.m) < 1e-13);
    }
}
