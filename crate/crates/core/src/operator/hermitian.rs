use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use super::Scalar;
use crate::error::{check_dims, Error, Result};

type Cx<T> = Complex<T>;

fn czero<T: Scalar>() -> Cx<T> {
    Complex::new(T::zero(), T::zero())
}

fn creal<T: Scalar>(x: T) -> Cx<T> {
    Complex::new(x, T::zero())
}

fn max_abs<T: Scalar>(m: &DMatrix<Cx<T>>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Complex square matrix equal to its conjugate transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    m: DMatrix<Cx<T>>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Validates squareness, finiteness and Hermiticity (relative to the
    /// largest entry), then stores the exactly symmetrised matrix.
    pub fn new(m: DMatrix<Cx<T>>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::Domain("empty matrix".into()));
        }
        check_dims(m.nrows(), m.ncols())?;
        if m.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::Contract("non-finite matrix entry".into()));
        }
        let scale = max_abs(&m);
        let d = m.nrows();
        let mut dev = T::zero();
        for j in 0..d {
            for i in 0..d {
                dev = dev.max((m[(i, j)] - m[(j, i)].conj()).modulus());
            }
        }
        if dev > T::lit(T::CONTRACT_TOL) * scale {
            return Err(Error::Contract(format!(
                "matrix is not Hermitian (deviation {dev} vs scale {scale})"
            )));
        }
        Ok(Self::symmetrised(m))
    }

    /// Trusted constructor: symmetrises without validation.
    pub(crate) fn symmetrised(m: DMatrix<Cx<T>>) -> Self {
        let half = creal(T::lit(0.5));
        let adj = m.adjoint();
        Self { m: (m + adj) * half }
    }

    pub fn from_real(m: &DMatrix<T>) -> Result<Self> {
        Self::new(m.map(creal))
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let d = diag.len();
        let mut m = DMatrix::from_element(d, d, czero());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = creal(x);
        }
        Self { m }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            m: DMatrix::from_element(d, d, czero()),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            m: DMatrix::identity(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<Cx<T>> {
        self.m
    }

    /// Real trace.
    pub fn trace(&self) -> T {
        self.m.trace().re
    }

    /// Re Tr[self · other]; exact for two Hermitian operands.
    pub fn trace_product(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        Ok(self.m.dotc(&other.m).re)
    }

    /// Tr[self · ρ].
    pub fn expectation(&self, rho: &DensityMatrix<T>) -> Result<T> {
        self.trace_product(rho.as_hermitian())
    }

    pub fn frobenius_norm(&self) -> T {
        self.m.norm()
    }

    /// ‖[self, other]‖_F.
    pub fn commutator_norm(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        let c = &self.m * &other.m - &other.m * &self.m;
        Ok(c.norm())
    }

    pub fn scale(&self, a: T) -> Self {
        Self {
            m: &self.m * creal(a),
        }
    }

    /// self − c·I.
    pub fn shifted(&self, c: T) -> Self {
        let mut m = self.m.clone();
        for i in 0..self.dim() {
            m[(i, i)] -= creal(c);
        }
        Self { m }
    }

    /// U·self·U† for a caller-supplied unitary.
    pub fn conjugate_by(&self, u: &DMatrix<Cx<T>>) -> Result<Self> {
        check_dims(self.dim(), u.nrows())?;
        Ok(Self::symmetrised(u * &self.m * u.adjoint()))
    }

    /// self ⊗ other, first factor outermost.
    pub fn kron(&self, other: &Self) -> Self {
        Self {
            m: self.m.kronecker(&other.m),
        }
    }

    pub fn eigen(&self) -> Spectrum<T> {
        hermitian_eigen(&self.m)
    }

    /// Hermitian part of the product, ½(AB + BA).
    pub fn jordan_product(&self, other: &Self) -> Result<Self> {
        check_dims(self.dim(), other.dim())?;
        let ab = &self.m * &other.m;
        Ok(Self::symmetrised(ab))
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        max_abs(&(&self.m - &other.m))
    }
}

impl<'a, T: Scalar> Add<&'a HermitianMatrix<T>> for &'a HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;
    fn add(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix { m: &self.m + &rhs.m }
    }
}

impl<'a, T: Scalar> Sub<&'a HermitianMatrix<T>> for &'a HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;
    fn sub(self, rhs: Self) -> HermitianMatrix<T> {
        HermitianMatrix { m: &self.m - &rhs.m }
    }
}

impl<T: Scalar> Add for HermitianMatrix<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self { m: self.m + rhs.m }
    }
}

impl<T: Scalar> Sub for HermitianMatrix<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self { m: self.m - rhs.m }
    }
}

impl<T: Scalar> Mul<T> for &HermitianMatrix<T> {
    type Output = HermitianMatrix<T>;
    fn mul(self, a: T) -> HermitianMatrix<T> {
        self.scale(a)
    }
}

impl<T: Scalar> Mul<T> for HermitianMatrix<T> {
    type Output = Self;
    fn mul(self, a: T) -> Self {
        Self {
            m: self.m * creal(a),
        }
    }
}

impl<T: Scalar> Neg for HermitianMatrix<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { m: -self.m }
    }
}

/// Eigendecomposition with eigenvalues in ascending order.
#[derive(Debug, Clone)]
pub struct Spectrum<T: Scalar> {
    values: DVector<T>,
    vectors: DMatrix<Cx<T>>,
    // Some(perm) when U is the permutation matrix with U[perm[j], j] = 1
    permutation: Option<Vec<usize>>,
}

impl<T: Scalar> Spectrum<T> {
    pub fn values(&self) -> &DVector<T> {
        &self.values
    }

    pub fn vectors(&self) -> &DMatrix<Cx<T>> {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// U† A U.
    pub fn to_eigenbasis(&self, a: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        match &self.permutation {
            Some(p) => DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(p[i], p[j])]),
            None => self.vectors.adjoint() * a * &self.vectors,
        }
    }

    /// U A U†.
    pub fn from_eigenbasis(&self, a: &DMatrix<Cx<T>>) -> DMatrix<Cx<T>> {
        match &self.permutation {
            Some(p) => {
                let mut out = DMatrix::from_element(a.nrows(), a.ncols(), czero());
                for j in 0..a.ncols() {
                    for i in 0..a.nrows() {
                        out[(p[i], p[j])] = a[(i, j)];
                    }
                }
                out
            }
            None => &self.vectors * a * self.vectors.adjoint(),
        }
    }

    /// U diag(f(e_i)) U†.
    pub fn map(&self, f: impl Fn(T) -> T) -> HermitianMatrix<T> {
        let d = self.dim();
        let mut diag = DMatrix::from_element(d, d, czero());
        for i in 0..d {
            diag[(i, i)] = creal(f(self.values[i]));
        }
        HermitianMatrix::symmetrised(self.from_eigenbasis(&diag))
    }

    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.map(|x| x)
    }
}

fn permutation_matrix<T: Scalar>(perm: &[usize]) -> DMatrix<Cx<T>> {
    let d = perm.len();
    DMatrix::from_fn(d, d, |i, j| if i == perm[j] { creal(T::one()) } else { czero() })
}

fn is_diagonal<T: Scalar>(m: &DMatrix<Cx<T>>) -> bool {
    let d = m.nrows();
    (0..d).all(|j| (0..d).all(|i| i == j || (m[(i, j)].re == T::zero() && m[(i, j)].im == T::zero())))
}

/// The single eigendecomposition routine for Hermitian input.
///
/// Diagonal input takes an exact fast path; otherwise nalgebra's Hermitian QR
/// iteration is used. Eigenvalues are sorted ascending.
pub fn hermitian_eigen<T: Scalar>(m: &DMatrix<Cx<T>>) -> Spectrum<T> {
    let d = m.nrows();
    let (raw_values, raw_vectors): (Vec<T>, Option<DMatrix<Cx<T>>>) = if is_diagonal(m) {
        ((0..d).map(|i| m[(i, i)].re).collect(), None)
    } else {
        let eig = m.clone().symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), Some(eig.eigenvectors))
    };
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| {
        raw_values[a]
            .partial_cmp(&raw_values[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = DVector::from_iterator(d, order.iter().map(|&k| raw_values[k]));
    match raw_vectors {
        Some(v) => Spectrum {
            values,
            vectors: DMatrix::from_fn(d, d, |i, j| v[(i, order[j])]),
            permutation: None,
        },
        None => Spectrum {
            values,
            vectors: permutation_matrix(&order),
            permutation: Some(order),
        },
    }
}

/// Positive semidefinite, unit-trace Hermitian matrix.
#[derive(Debug, Clone)]
pub struct DensityMatrix<T: Scalar> {
    h: HermitianMatrix<T>,
    spectrum: OnceLock<Spectrum<T>>,
}

impl<T: Scalar> DensityMatrix<T> {
    /// Validates with the precision's contract tolerance.
    pub fn new(m: DMatrix<Cx<T>>) -> Result<Self> {
        let tol = T::lit(T::CONTRACT_TOL);
        Self::with_tolerance(m, tol, tol)
    }

    /// Validates trace to `trace_tol` and the minimum eigenvalue to
    /// `−eig_tol`.
    pub fn with_tolerance(m: DMatrix<Cx<T>>, trace_tol: T, eig_tol: T) -> Result<Self> {
        let h = HermitianMatrix::new(m)?;
        Self::from_hermitian(h, trace_tol, eig_tol)
    }

    pub fn from_hermitian(h: HermitianMatrix<T>, trace_tol: T, eig_tol: T) -> Result<Self> {
        let tr = h.trace();
        if (tr - T::one()).abs() > trace_tol {
            return Err(Error::Contract(format!("density matrix trace {tr} differs from 1")));
        }
        let spectrum = h.eigen();
        let min = spectrum.values[0];
        if min < -eig_tol {
            return Err(Error::Contract(format!(
                "density matrix has negative eigenvalue {min}"
            )));
        }
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Ok(Self { h, spectrum: cell })
    }

    /// Trusted constructor from a spectrum whose eigenvalues are populations.
    pub(crate) fn from_spectrum(spectrum: Spectrum<T>) -> Self {
        let h = spectrum.reconstruct();
        let cell = OnceLock::new();
        let _ = cell.set(spectrum);
        Self { h, spectrum: cell }
    }

    pub(crate) fn from_raw(m: DMatrix<Cx<T>>) -> Self {
        Self {
            h: HermitianMatrix::symmetrised(m),
            spectrum: OnceLock::new(),
        }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let p = T::one() / T::lit(d as f64);
        Self::from_spectrum(Spectrum {
            values: DVector::from_element(d, p),
            vectors: DMatrix::identity(d, d),
            permutation: Some((0..d).collect()),
        })
    }

    /// |ψ⟩⟨ψ| for a (not necessarily normalised) vector.
    pub fn pure(psi: &DVector<Cx<T>>) -> Result<Self> {
        let n = psi.norm();
        if n == T::zero() {
            return Err(Error::Domain("zero state vector".into()));
        }
        let v = psi * creal(T::one() / n);
        Ok(Self::from_raw(&v * v.adjoint()))
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn as_hermitian(&self) -> &HermitianMatrix<T> {
        &self.h
    }

    pub fn matrix(&self) -> &DMatrix<Cx<T>> {
        self.h.matrix()
    }

    /// Cached eigendecomposition.
    pub fn spectrum(&self) -> &Spectrum<T> {
        self.spectrum.get_or_init(|| self.h.eigen())
    }

    /// Eigenvalues clamped below at the population floor.
    pub fn populations(&self) -> Vec<T> {
        let floor = T::lit(T::POPULATION_FLOOR);
        self.spectrum().values.iter().map(|&p| p.max(floor)).collect()
    }

    pub fn trace_distance(&self, other: &Self) -> Result<T> {
        check_dims(self.dim(), other.dim())?;
        let diff = self.h.matrix() - other.h.matrix();
        let e = hermitian_eigen(&diff);
        Ok(e.values.iter().fold(T::zero(), |acc, &x| acc + x.abs()) * T::lit(0.5))
    }
}

fn gibbs_weights<T: Scalar>(energies: &DVector<T>, beta: T) -> (Vec<T>, T) {
    // energies ascending: the shift by the ground energy keeps every weight ≤ 1
    let e0 = energies[0];
    let floor = T::lit(T::POPULATION_FLOOR);
    let w: Vec<T> = energies.iter().map(|&e| (-(beta * (e - e0))).exp()).collect();
    let z: T = w.iter().fold(T::zero(), |a, &x| a + x);
    let p = w.iter().map(|&x| (x / z).max(floor)).collect();
    (p, z.ln() - beta * e0)
}

fn check_beta<T: Scalar>(beta: T) -> Result<()> {
    if !(beta.is_finite() && beta > T::zero()) {
        return Err(Error::Domain(format!("inverse temperature must be finite and > 0, got {beta}")));
    }
    Ok(())
}

/// π = e^{−βH}/Z via the eigendecomposition of H with a ground-energy shift.
pub fn gibbs_state<T: Scalar>(h: &HermitianMatrix<T>, beta: T) -> Result<DensityMatrix<T>> {
    check_beta(beta)?;
    let spec = h.eigen();
    let (p, _) = gibbs_weights(&spec.values, beta);
    // populations ascend as energies descend; keep ascending eigenvalue order
    let d = spec.dim();
    let order: Vec<usize> = (0..d).rev().collect();
    let values = DVector::from_iterator(d, order.iter().map(|&k| p[k]));
    let vectors = DMatrix::from_fn(d, d, |i, j| spec.vectors[(i, order[j])]);
    let permutation = spec
        .permutation
        .as_ref()
        .map(|p| order.iter().map(|&k| p[k]).collect());
    Ok(DensityMatrix::from_spectrum(Spectrum {
        values,
        vectors,
        permutation,
    }))
}

/// ln Tr e^{−βH}.
pub fn log_partition_function<T: Scalar>(h: &HermitianMatrix<T>, beta: T) -> Result<T> {
    check_beta(beta)?;
    let spec = h.eigen();
    Ok(gibbs_weights(&spec.values, beta).1)
}

/// ρ^a = U diag(p_i^a) U†. Eigenvalues at or below the population floor are
/// outside the support and map to zero for every a.
pub fn matrix_power<T: Scalar>(rho: &DensityMatrix<T>, a: T) -> Result<HermitianMatrix<T>> {
    if !(a >= T::zero() && a <= T::one()) {
        return Err(Error::Domain(format!("matrix power exponent {a} outside [0, 1]")));
    }
    let floor = T::lit(T::POPULATION_FLOOR);
    Ok(rho
        .spectrum()
        .map(|p| if p <= floor { T::zero() } else { p.powf(a) }))
}

/// Quantum relative entropy S(ρ‖σ) = Tr[ρ(ln ρ − ln σ)] with floored
/// eigenvalues.
pub fn relative_entropy<T: Scalar>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    check_dims(rho.dim(), sigma.dim())?;
    let floor = T::lit(T::POPULATION_FLOOR);
    let ln_rho = rho.spectrum().map(|p| p.max(floor).ln());
    let ln_sigma = sigma.spectrum().map(|p| p.max(floor).ln());
    (&ln_rho - &ln_sigma).expectation(rho)
}

/// Tr_B of an operator on C^{d_a} ⊗ C^{d_b} (first factor outermost).
pub fn partial_trace_second<T: Scalar>(
    m: &DMatrix<Cx<T>>,
    d_a: usize,
    d_b: usize,
) -> Result<DMatrix<Cx<T>>> {
    check_dims(d_a * d_b, m.nrows())?;
    check_dims(m.nrows(), m.ncols())?;
    Ok(DMatrix::from_fn(d_a, d_a, |i, j| {
        (0..d_b).fold(czero(), |acc, k| acc + m[(i * d_b + k, j * d_b + k)])
    }))
}
