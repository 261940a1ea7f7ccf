//! Exact Gaussian-state evolution in phase space.
//!
//! A state of `N` bosonic modes is its mean vector and covariance matrix in
//! the ordering `(q₁, p₁, …, q_N, p_N)`, with vacuum covariance equal to the
//! identity. Every operation returns a new state; nothing is mutated in place.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on the smallest symplectic eigenvalue, `ν_min ≥ 1 − PHYSICALITY_TOL`.
pub const PHYSICALITY_TOL: f64 = 1e-9;

/// Tolerance on `S Ω Sᵀ = Ω` when a symplectic matrix is validated.
pub const SYMPLECTIC_TOL: f64 = 1e-12;

/// Tolerance on covariance symmetry when a state is built from raw moments.
pub const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Position,
    Momentum,
}

impl Axis {
    fn offset(self) -> usize {
        match self {
            Axis::Position => 0,
            Axis::Momentum => 1,
        }
    }
}

/// One quadrature of one mode, e.g. the momentum of mode 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Quadrature {
    pub mode: usize,
    pub axis: Axis,
}

impl Quadrature {
    pub fn q(mode: usize) -> Self {
        Quadrature {
            mode,
            axis: Axis::Position,
        }
    }

    pub fn p(mode: usize) -> Self {
        Quadrature {
            mode,
            axis: Axis::Momentum,
        }
    }

    /// Index of this quadrature in the phase-space vector.
    pub fn index(self) -> usize {
        2 * self.mode + self.axis.offset()
    }
}

/// The symplectic form for `n` modes: block-diagonal with `[[0, 1], [-1, 0]]`.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr", into = "StateRepr")]
pub struct GaussianState {
    num_modes: usize,
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

/// JSON layout `{num_modes, mean: [..], cov: [[..]]}` with `cov` row-major.
#[derive(Serialize, Deserialize)]
struct StateRepr {
    num_modes: usize,
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
}

impl From<GaussianState> for StateRepr {
    fn from(s: GaussianState) -> Self {
        StateRepr {
            num_modes: s.num_modes,
            mean: s.mean.iter().copied().collect(),
            cov: s
                .cov
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
        }
    }
}

impl TryFrom<StateRepr> for GaussianState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        let dim = 2 * r.num_modes;
        if r.cov.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: r.cov.len(),
            });
        }
        if let Some(row) = r.cov.iter().find(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: row.len(),
            });
        }
        let cov = DMatrix::from_fn(dim, dim, |i, j| r.cov[i][j]);
        GaussianState::from_moments(DVector::from_vec(r.mean), cov)
    }
}

impl GaussianState {
    /// Builds a state from raw moments, checking dimensions, symmetry and the
    /// uncertainty relation.
    pub fn from_moments(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 {
            return Err(Error::EmptySelection);
        }
        if !dim.is_multiple_of(2) {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                found: dim,
            });
        }
        if cov.nrows() != dim || cov.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: cov.nrows().max(cov.ncols()),
            });
        }
        let asym = max_abs(&(&cov - cov.transpose()));
        if asym > SYMMETRY_TOL * (1.0 + max_abs(&cov)) {
            return Err(Error::NotSymmetric(asym));
        }
        let state = GaussianState {
            num_modes: dim / 2,
            mean,
            cov: symmetrize(&cov),
        };
        let nu = state.min_symplectic_eigenvalue();
        if nu < 1.0 - PHYSICALITY_TOL {
            return Err(Error::Unphysical(nu));
        }
        Ok(state)
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptySelection);
        }
        Ok(GaussianState {
            num_modes: n,
            mean: DVector::zeros(2 * n),
            cov: DMatrix::identity(2 * n, 2 * n),
        })
    }

    /// Single-mode squeezed vacuum with linear gain `gain ≥ 1`. The squeezed
    /// axis has variance `1/gain`, the other `gain`.
    pub fn squeezed_vacuum(gain: f64, axis: Axis) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::param("gain", gain, "finite and ≥ 1"));
        }
        let (vq, vp) = match axis {
            Axis::Position => (1.0 / gain, gain),
            Axis::Momentum => (gain, 1.0 / gain),
        };
        Ok(GaussianState {
            num_modes: 1,
            mean: DVector::zeros(2),
            cov: DMatrix::from_diagonal(&DVector::from_vec(vec![vq, vp])),
        })
    }

    pub fn coherent(q_mean: f64, p_mean: f64) -> Self {
        GaussianState {
            num_modes: 1,
            mean: DVector::from_vec(vec![q_mean, p_mean]),
            cov: DMatrix::identity(2, 2),
        }
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.num_modes {
            return Err(Error::ModeOutOfRange {
                mode,
                num_modes: self.num_modes,
            });
        }
        Ok(())
    }

    /// Direct sum of the two states; `self`'s modes come first.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let da = 2 * self.num_modes;
        let dim = da + 2 * other.num_modes;
        let mut mean = DVector::zeros(dim);
        mean.rows_mut(0, da).copy_from(&self.mean);
        mean.rows_mut(da, dim - da).copy_from(&other.mean);
        let mut cov = DMatrix::zeros(dim, dim);
        cov.view_mut((0, 0), (da, da)).copy_from(&self.cov);
        cov.view_mut((da, da), (dim - da, dim - da))
            .copy_from(&other.cov);
        GaussianState {
            num_modes: self.num_modes + other.num_modes,
            mean,
            cov,
        }
    }

    /// `mean → S·mean + d`, `cov → S·cov·Sᵀ`.
    pub fn apply(&self, op: &SymplecticOp) -> Result<GaussianState> {
        let dim = 2 * self.num_modes;
        if op.matrix.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: op.matrix.nrows(),
            });
        }
        let s = &op.matrix;
        Ok(GaussianState {
            num_modes: self.num_modes,
            mean: s * &self.mean + &op.displacement,
            cov: symmetrize(&(s * &self.cov * s.transpose())),
        })
    }

    /// Pure-loss channel with transmissivity `kappa` on one mode.
    pub fn loss(&self, mode: usize, kappa: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::param("kappa", kappa, "in [0, 1]"));
        }
        let t = kappa.sqrt();
        let mut cov = self.cov.clone();
        let mut mean = self.mean.clone();
        for k in [2 * mode, 2 * mode + 1] {
            cov.row_mut(k).scale_mut(t);
            cov.column_mut(k).scale_mut(t);
            cov[(k, k)] += 1.0 - kappa;
            mean[k] *= t;
        }
        Ok(GaussianState {
            num_modes: self.num_modes,
            mean,
            cov: symmetrize(&cov),
        })
    }

    /// Classical random displacement adding `var_q`, `var_p` to the mode's
    /// quadrature variances.
    pub fn additive_noise(&self, mode: usize, var_q: f64, var_p: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        if !(var_q >= 0.0) {
            return Err(Error::param("var_q", var_q, "≥ 0"));
        }
        if !(var_p >= 0.0) {
            return Err(Error::param("var_p", var_p, "≥ 0"));
        }
        let mut cov = self.cov.clone();
        cov[(2 * mode, 2 * mode)] += var_q;
        cov[(2 * mode + 1, 2 * mode + 1)] += var_p;
        Ok(GaussianState {
            num_modes: self.num_modes,
            mean: self.mean.clone(),
            cov,
        })
    }

    pub fn displace(&self, mode: usize, dq: f64, dp: f64) -> Result<GaussianState> {
        self.check_mode(mode)?;
        let mut mean = self.mean.clone();
        mean[2 * mode] += dq;
        mean[2 * mode + 1] += dp;
        Ok(GaussianState {
            num_modes: self.num_modes,
            mean,
            cov: self.cov.clone(),
        })
    }

    /// Marginal of the listed modes, in the order given.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<GaussianState> {
        if keep.is_empty() {
            return Err(Error::EmptySelection);
        }
        for (i, &m) in keep.iter().enumerate() {
            self.check_mode(m)?;
            if keep[..i].contains(&m) {
                return Err(Error::DuplicateMode(m));
            }
        }
        let idx: Vec<usize> = keep.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Ok(GaussianState {
            num_modes: keep.len(),
            mean: DVector::from_fn(idx.len(), |i, _| self.mean[idx[i]]),
            cov: DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cov[(idx[i], idx[j])]),
        })
    }

    /// Variance of the linear combination `coeffs · x` of the quadratures.
    pub fn quadratic_form(&self, coeffs: &DVector<f64>) -> f64 {
        (coeffs.transpose() * &self.cov * coeffs)[(0, 0)]
    }

    /// State of the other modes after `target` is measured with result
    /// `outcome`; the measured mode is removed. The conditional covariance
    /// does not depend on `outcome`.
    pub fn condition(&self, target: Quadrature, outcome: f64) -> Result<GaussianState> {
        self.check_mode(target.mode)?;
        if self.num_modes == 1 {
            return Err(Error::EmptySelection);
        }
        let t = target.index();
        let var_t = self.cov[(t, t)];
        assert!(
            var_t > 0.0,
            "measured quadrature variance {var_t} is not positive; state is unphysical"
        );
        let rest: Vec<usize> = (0..2 * self.num_modes)
            .filter(|&k| k / 2 != target.mode)
            .collect();
        let m = rest.len();
        let c = DVector::from_fn(m, |i, _| self.cov[(rest[i], t)]);
        let shift = (outcome - self.mean[t]) / var_t;
        let mean = DVector::from_fn(m, |i, _| self.mean[rest[i]] + c[i] * shift);
        let cov = DMatrix::from_fn(m, m, |i, j| {
            self.cov[(rest[i], rest[j])] - c[i] * c[j] / var_t
        });
        Ok(GaussianState {
            num_modes: self.num_modes - 1,
            mean,
            cov: symmetrize(&cov),
        })
    }

    /// Homodyne measurement of `target`: samples the outcome from its
    /// Gaussian marginal and returns it with the conditioned remaining modes.
    /// Measuring the last mode of a single-mode state returns no post state.
    pub fn homodyne<R: Rng + ?Sized>(
        &self,
        target: Quadrature,
        rng: &mut R,
    ) -> Result<(f64, Option<GaussianState>)> {
        self.check_mode(target.mode)?;
        let t = target.index();
        let var_t = self.cov[(t, t)];
        assert!(
            var_t > 0.0,
            "measured quadrature variance {var_t} is not positive; state is unphysical"
        );
        let z: f64 = rng.sample(StandardNormal);
        let outcome = self.mean[t] + var_t.sqrt() * z;
        if self.num_modes == 1 {
            return Ok((outcome, None));
        }
        Ok((outcome, Some(self.condition(target, outcome)?)))
    }

    /// Symplectic eigenvalues in ascending order. Returns all zeros when the
    /// covariance is not positive definite.
    pub fn symplectic_eigenvalues(&self) -> Vec<f64> {
        let n = self.num_modes;
        let eig = SymmetricEigen::new(self.cov.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return vec![0.0; n];
        }
        // V^{1/2} Ω V^{1/2} is antisymmetric with eigenvalues ±iν_k, so its
        // Gram matrix has eigenvalues ν_k², each twice.
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let m = &root * symplectic_form(n) * &root;
        let gram = symmetrize(&(m.transpose() * &m));
        let mut sq: Vec<f64> = SymmetricEigen::new(gram)
            .eigenvalues
            .iter()
            .map(|&x| x.max(0.0).sqrt())
            .collect();
        sq.sort_by(|a, b| a.total_cmp(b));
        sq.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect()
    }

    pub fn min_symplectic_eigenvalue(&self) -> f64 {
        self.symplectic_eigenvalues()[0]
    }

    pub fn is_physical(&self) -> bool {
        self.min_symplectic_eigenvalue() >= 1.0 - PHYSICALITY_TOL
    }
}

/// Affine phase-space map `x → S x + d` with `S Ω Sᵀ = Ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticOp {
    matrix: DMatrix<f64>,
    displacement: DVector<f64>,
}

impl SymplecticOp {
    pub fn new(matrix: DMatrix<f64>, displacement: DVector<f64>) -> Result<Self> {
        let dim = matrix.nrows();
        if matrix.ncols() != dim || !dim.is_multiple_of(2) || dim == 0 {
            return Err(Error::DimensionMismatch {
                expected: dim.max(2),
                found: matrix.ncols(),
            });
        }
        if displacement.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: displacement.len(),
            });
        }
        let op = SymplecticOp {
            matrix,
            displacement,
        };
        let dev = op.symplectic_deviation();
        if dev > SYMPLECTIC_TOL {
            return Err(Error::NotSymplectic(dev));
        }
        Ok(op)
    }

    pub fn identity(n: usize) -> Self {
        SymplecticOp {
            matrix: DMatrix::identity(2 * n, 2 * n),
            displacement: DVector::zeros(2 * n),
        }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn num_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    /// `‖S Ω Sᵀ − Ω‖_∞` (max-entry norm).
    pub fn symplectic_deviation(&self) -> f64 {
        let omega = symplectic_form(self.num_modes());
        max_abs(&(&self.matrix * &omega * self.matrix.transpose() - omega))
    }

    /// Passive two-mode map acting identically on q and p:
    /// `out_i = u[0][0] in_i + u[0][1] in_j`, `out_j = u[1][0] in_i + u[1][1] in_j`.
    /// `u` must be a real orthogonal 2×2 matrix.
    pub fn two_mode_passive(u: [[f64; 2]; 2], i: usize, j: usize, n: usize) -> Result<Self> {
        for m in [i, j] {
            if m >= n {
                return Err(Error::ModeOutOfRange {
                    mode: m,
                    num_modes: n,
                });
            }
        }
        if i == j {
            return Err(Error::DuplicateMode(i));
        }
        let mut s = DMatrix::identity(2 * n, 2 * n);
        let modes = [i, j];
        for (r, &mr) in modes.iter().enumerate() {
            for (c, &mc) in modes.iter().enumerate() {
                s[(2 * mr, 2 * mc)] = u[r][c];
                s[(2 * mr + 1, 2 * mc + 1)] = u[r][c];
            }
        }
        SymplecticOp::new(s, DVector::zeros(2 * n))
    }

    /// Beamsplitter with ratio `eta` between `mode_i` (playing A) and
    /// `mode_j` (playing S):
    /// `out_i = √η in_i + √(1−η) in_j`, `out_j = √(1−η) in_i − √η in_j`.
    pub fn beamsplitter(eta: f64, mode_i: usize, mode_j: usize, n: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::param("eta", eta, "in [0, 1]"));
        }
        let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
        SymplecticOp::two_mode_passive([[t, r], [r, -t]], mode_i, mode_j, n)
    }

    /// Single-mode squeezer with linear gain `gain ≥ 1` on `mode`; the named
    /// axis is scaled by `1/√gain`, the conjugate one by `√gain`.
    pub fn squeezer(gain: f64, axis: Axis, mode: usize, n: usize) -> Result<Self> {
        if !(gain >= 1.0) || !gain.is_finite() {
            return Err(Error::param("gain", gain, "finite and ≥ 1"));
        }
        if mode >= n {
            return Err(Error::ModeOutOfRange { mode, num_modes: n });
        }
        let mut s = DMatrix::identity(2 * n, 2 * n);
        let (fq, fp) = match axis {
            Axis::Position => (gain.sqrt().recip(), gain.sqrt()),
            Axis::Momentum => (gain.sqrt(), gain.sqrt().recip()),
        };
        s[(2 * mode, 2 * mode)] = fq;
        s[(2 * mode + 1, 2 * mode + 1)] = fp;
        SymplecticOp::new(s, DVector::zeros(2 * n))
    }
}
