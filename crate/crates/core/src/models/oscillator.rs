//! Harmonic oscillator H = ω(n + ½) driven in ω under a perfect thermalizer.
//!
//! In the instantaneous Fock basis the power operator is
//! Ḣ = ω̇ X with X = n + ½ + (a² + a†²)/2, which does not commute with H.
//! With x = βω the metrics have the closed forms
//!
//! * Λ(ω) = β(1 + cosh x) / (4Γ sinh²(x/2)) = β coth²(x/2) / (2Γ)
//! * ξ(ω) = β(1 + sinh x / x) / (4Γ sinh²(x/2))

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{chart_metrics, optimal_velocity_1d, ControlChart, GeodesicSolution, MetricPair, MetricSource};
use crate::lindblad::{perfect_thermalizer, Lindbladian};
use crate::{Hermitian, C64};

/// Largest Fock truncation the numeric route will try.
pub const MAX_TRUNCATION: usize = 2048;

const TRUNCATION_TOL: f64 = 1e-6;

fn check_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite and > 0, got {x}")))
    }
}

/// X = n + ½ + (a² + a†²)/2 on the first `d` Fock states.
pub fn oscillator_force(d: usize) -> Hermitian {
    let mut m = DMatrix::from_element(d, d, C64::new(0.0, 0.0));
    for n in 0..d {
        m[(n, n)] = C64::new(n as f64 + 0.5, 0.0);
        if n + 2 < d {
            let v = 0.5 * (((n + 1) * (n + 2)) as f64).sqrt();
            m[(n, n + 2)] = C64::new(v, 0.0);
            m[(n + 2, n)] = C64::new(v, 0.0);
        }
    }
    Hermitian::new(m).expect("real symmetric")
}

/// Truncated oscillator as a one-parameter control chart (λ = ω).
#[derive(Debug, Clone)]
pub struct OscillatorChart {
    beta: f64,
    gamma: f64,
    dim: usize,
    force: Hermitian,
    number_only: bool,
}

impl OscillatorChart {
    pub fn new(beta: f64, gamma: f64, dim: usize) -> Result<Self> {
        check_positive("inverse temperature", beta)?;
        check_positive("thermalization rate", gamma)?;
        if dim < 3 {
            return Err(Error::Domain(format!("oscillator truncation must be ≥ 3, got {dim}")));
        }
        if dim > MAX_TRUNCATION {
            return Err(Error::DimensionCap {
                dim,
                cap: MAX_TRUNCATION,
            });
        }
        Ok(Self {
            beta,
            gamma,
            dim,
            force: oscillator_force(dim),
            number_only: false,
        })
    }

    /// Drops the squeezing term: X = n + ½, which commutes with H.
    pub fn number_operator_drive(mut self) -> Self {
        self.force = Hermitian::from_real_diagonal(&(0..self.dim).map(|n| n as f64 + 0.5).collect::<Vec<_>>());
        self.number_only = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

impl ControlChart for OscillatorChart {
    fn n_params(&self) -> usize {
        1
    }

    fn beta(&self) -> f64 {
        self.beta
    }

    fn hamiltonian(&self, lambda: &[f64]) -> Result<Hermitian> {
        let omega = lambda[0];
        check_positive("oscillator frequency", omega)?;
        Ok(Hermitian::from_real_diagonal(
            &(0..self.dim).map(|n| omega * (n as f64 + 0.5)).collect::<Vec<_>>(),
        ))
    }

    fn forces(&self, _lambda: &[f64]) -> Result<Vec<Hermitian>> {
        Ok(vec![self.force.clone()])
    }

    fn generator(&self, h: &Hermitian) -> Result<Lindbladian> {
        perfect_thermalizer(h, self.beta, self.gamma)
    }
}

/// Closed-form (Λ, ξ) as a metric source over ω.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorMetric {
    pub beta: f64,
    pub gamma: f64,
}

impl OscillatorMetric {
    pub fn new(beta: f64, gamma: f64) -> Result<Self> {
        check_positive("inverse temperature", beta)?;
        check_positive("thermalization rate", gamma)?;
        Ok(Self { beta, gamma })
    }

    /// (Λ(ω), ξ(ω)).
    pub fn evaluate(&self, omega: f64) -> Result<(f64, f64)> {
        check_positive("oscillator frequency", omega)?;
        let (b, g) = (self.beta, self.gamma);
        let x = b * omega;
        let half = 0.5 * x;
        let coth = 1.0 / half.tanh();
        let sh = half.sinh();
        let lambda = b * coth * coth / (2.0 * g);
        // sinh x / sinh²(x/2) = 2 coth(x/2)
        let xi = b / (4.0 * g * sh * sh) + b * coth / (2.0 * g * x);
        Ok((lambda, xi))
    }
}

impl MetricSource for OscillatorMetric {
    fn n_params(&self) -> usize {
        1
    }

    fn metric_pair(&self, lambda: &[f64]) -> Result<MetricPair> {
        let (l, x) = self.evaluate(lambda[0])?;
        Ok(MetricPair {
            fluctuation: DMatrix::from_element(1, 1, l),
            dissipation: DMatrix::from_element(1, 1, x),
        })
    }
}

/// Numeric metrics with the truncation they were converged at.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericMetrics {
    pub lambda: f64,
    pub xi: f64,
    pub dim: usize,
    /// Relative change against the 25%-smaller truncation.
    pub truncation_change: f64,
}

/// Oscillator protocol ω₀ → ω_τ at inverse temperature β with thermalizer
/// rate Γ.
#[derive(Debug, Clone)]
pub struct OscillatorModel {
    pub omega0: f64,
    pub omega_tau: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Fock truncation; `None` picks max(40, ⌈25/(βω_min)⌉).
    pub truncation: Option<usize>,
    /// Frequency unit ω̃ used to quote dimensionless results.
    pub omega_ref: f64,
}

impl OscillatorModel {
    pub fn new(omega0: f64, omega_tau: f64, beta: f64, gamma: f64) -> Result<Self> {
        check_positive("initial frequency", omega0)?;
        check_positive("final frequency", omega_tau)?;
        check_positive("inverse temperature", beta)?;
        check_positive("thermalization rate", gamma)?;
        Ok(Self {
            omega0,
            omega_tau,
            beta,
            gamma,
            truncation: None,
            omega_ref: 1.0,
        })
    }

    pub fn with_truncation(mut self, d: usize) -> Self {
        self.truncation = Some(d);
        self
    }

    /// max(40, ⌈25/(βω)⌉) at the given frequency.
    pub fn default_truncation_at(beta: f64, omega: f64) -> usize {
        40usize.max((25.0 / (beta * omega)).ceil() as usize)
    }

    /// Truncation for the whole protocol (set explicitly or from ω_min).
    pub fn truncation(&self) -> usize {
        self.truncation
            .unwrap_or_else(|| Self::default_truncation_at(self.beta, self.omega0.min(self.omega_tau)))
    }

    pub fn closed_form(&self) -> OscillatorMetric {
        OscillatorMetric {
            beta: self.beta,
            gamma: self.gamma,
        }
    }

    pub fn metrics_closed_form(&self, omega: f64) -> Result<(f64, f64)> {
        self.closed_form().evaluate(omega)
    }

    /// Λ, ξ from the truncated Fock-space maps at truncation `d`.
    pub fn metrics_numeric_at(&self, omega: f64, d: usize) -> Result<(f64, f64)> {
        let chart = OscillatorChart::new(self.beta, self.gamma, d)?;
        let p = chart_metrics(&chart, &[omega])?;
        Ok((p.fluctuation[(0, 0)], p.dissipation[(0, 0)]))
    }

    /// Numeric metrics at the model truncation (at least the default for
    /// this ω), accepted once a 25% larger truncation changes both by less
    /// than 1e-6 relative. Otherwise the truncation grows by 25% steps up to
    /// [`MAX_TRUNCATION`].
    pub fn metrics_numeric(&self, omega: f64) -> Result<NumericMetrics> {
        check_positive("oscillator frequency", omega)?;
        let mut d = self.truncation().max(Self::default_truncation_at(self.beta, omega));
        let mut current = self.metrics_numeric_at(omega, d)?;
        loop {
            let next_d = (d as f64 * 1.25).ceil() as usize;
            if next_d > MAX_TRUNCATION {
                return Err(Error::Convergence(format!(
                    "oscillator truncation not converged at d = {d} for βω = {:.3e}; \
                     increase the truncation beyond {MAX_TRUNCATION} or raise βω",
                    self.beta * omega
                )));
            }
            let next = self.metrics_numeric_at(omega, next_d)?;
            let change = ((next.0 - current.0) / next.0)
                .abs()
                .max(((next.1 - current.1) / next.1).abs());
            if change < TRUNCATION_TOL {
                return Ok(NumericMetrics {
                    lambda: next.0,
                    xi: next.1,
                    dim: next_d,
                    truncation_change: change,
                });
            }
            log::debug!("oscillator truncation {d} → {next_d}: change {change:.3e}");
            d = next_d;
            current = next;
        }
    }

    /// Optimal ω_t for g_α from the closed-form metrics.
    pub fn geodesic(&self, alpha: f64, tau: f64, grid: usize) -> Result<GeodesicSolution> {
        optimal_velocity_1d(&self.closed_form(), alpha, (self.omega0, self.omega_tau), tau, grid)
    }

    /// Largest relative deviation of the protocol from the implicit equation
    /// for the optimal frequency schedule.
    pub fn implicit_equation_residual(&self, sol: &GeodesicSolution) -> Result<f64> {
        implicit_equation_residual(sol, self.beta)
    }
}

/// f(x) = |sinh(x/2)| / sqrt(1 + α cosh x + (1 − α) sinh x / x).
fn implicit_weight(x: f64, alpha: f64) -> f64 {
    if x < 600.0 {
        let sh = (0.5 * x).sinh().abs();
        sh / (1.0 + alpha * x.cosh() + (1.0 - alpha) * x.sinh() / x).sqrt()
    } else {
        // e^{x/2}/2 over sqrt(e^x (α + (1 − α)/x)/2)
        1.0 / (2.0 * (alpha + (1.0 - alpha) / x)).sqrt()
    }
}

/// max over the knots of
/// |ω̇_t/(ω_τ − ω₀) − f(βω_t)/∫₀^τ f(βω_s) ds| relative to the right side.
/// The time integral is evaluated along the returned schedule.
pub fn implicit_equation_residual(sol: &GeodesicSolution, beta: f64) -> Result<f64> {
    let span = sol.end - sol.start;
    if span == 0.0 {
        return Ok(0.0);
    }
    if sol.lambdas.iter().any(|w| *w <= 0.0) {
        return Err(Error::Domain("oscillator schedule left ω > 0".into()));
    }
    let alpha = sol.alpha;
    let norm = sol.time_integral(|w| implicit_weight(beta * w, alpha));
    Ok(sol
        .lambdas
        .iter()
        .zip(&sol.velocities)
        .map(|(w, v)| {
            let rhs = implicit_weight(beta * w, alpha) / norm;
            (v / span - rhs).abs() / rhs
        })
        .fold(0.0, f64::max))
}
