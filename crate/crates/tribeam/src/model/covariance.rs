use nalgebra::{DMatrix, Matrix6};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::invariants::StandardFormParams;

/// Symplectic eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymplecticSpectrum {
    pub values: Vec<f64>,
}

impl SymplecticSpectrum {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }
}

/// 6×6 quadrature covariance matrix in (x₁, p₁, x₂, p₂, x₃, p₃) ordering,
/// vacuum normalized to the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    pub entries: Matrix6<f64>,
}

/// Block-diagonal symplectic form for `n` modes.
pub fn symplectic_form(n: usize) -> DMatrix<f64> {
    let mut om = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        om[(2 * k, 2 * k + 1)] = 1.0;
        om[(2 * k + 1, 2 * k)] = -1.0;
    }
    om
}

/// Fully symmetric CM with α = diag(a, a) and γ = diag(c₊, c₋).
pub fn assemble_cm(p: &StandardFormParams) -> CovarianceMatrix {
    let mut m = Matrix6::zeros();
    for i in 0..3 {
        for j in 0..3 {
            let (x, y) = if i == j { (p.a, p.a) } else { (p.c_plus, p.c_minus) };
            m[(2 * i, 2 * j)] = x;
            m[(2 * i + 1, 2 * j + 1)] = y;
        }
    }
    CovarianceMatrix { entries: m }
}

impl CovarianceMatrix {
    pub fn identity() -> Self {
        CovarianceMatrix {
            entries: Matrix6::identity(),
        }
    }

    pub fn from_rows(rows: [[f64; 6]; 6]) -> Self {
        CovarianceMatrix {
            entries: Matrix6::from_fn(|i, j| rows[i][j]),
        }
    }

    pub fn to_rows(&self) -> [[f64; 6]; 6] {
        let mut rows = [[0.0; 6]; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.entries[(i, j)];
            }
        }
        rows
    }

    pub fn dynamic(&self) -> DMatrix<f64> {
        DMatrix::from_fn(6, 6, |i, j| self.entries[(i, j)])
    }

    pub fn determinant(&self) -> f64 {
        self.entries.determinant()
    }

    /// Flips the sign of the momentum of `beam`.
    pub fn partial_transpose(&self, beam: usize) -> Self {
        let mut m = self.entries;
        let k = 2 * beam + 1;
        for j in 0..6 {
            if j != k {
                m[(k, j)] = -m[(k, j)];
                m[(j, k)] = -m[(j, k)];
            }
        }
        CovarianceMatrix { entries: m }
    }

    /// Reduced CM of the listed beams (in the given order).
    pub fn reduced(&self, beams: &[usize]) -> DMatrix<f64> {
        let idx: Vec<usize> = beams.iter().flat_map(|&b| [2 * b, 2 * b + 1]).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.entries[(idx[i], idx[j])])
    }

    pub fn symplectic_spectrum(&self) -> Result<SymplecticSpectrum> {
        symplectic_spectrum(&self.dynamic())
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        let m = &self.entries;
        (0..6).all(|i| (0..6).all(|j| (m[(i, j)] - m[(j, i)]).abs() <= tol * m.amax().max(1.0)))
    }
}

/// Schur complement σ_BB − σ_BAσ_AA⁻¹σ_AB of the block `removed` in `sigma`,
/// where both index sets are mode lists.
pub fn schur_complement(sigma: &DMatrix<f64>, removed: &[usize], kept: &[usize]) -> Result<DMatrix<f64>> {
    let ix = |modes: &[usize]| -> Vec<usize> { modes.iter().flat_map(|&b| [2 * b, 2 * b + 1]).collect() };
    let (r, k) = (ix(removed), ix(kept));
    let aa = DMatrix::from_fn(r.len(), r.len(), |i, j| sigma[(r[i], r[j])]);
    let ab = DMatrix::from_fn(r.len(), k.len(), |i, j| sigma[(r[i], k[j])]);
    let bb = DMatrix::from_fn(k.len(), k.len(), |i, j| sigma[(k[i], k[j])]);
    let inv = aa
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular block in Schur complement".into()))?;
    Ok(&bb - ab.transpose() * inv * ab)
}

/// Absolute eigenvalues of iΩσ for a positive-definite 2n×2n matrix, one per pair.
///
/// Uses S = σ^{1/2}; the matrix (SΩS)ᵀ(SΩS) is symmetric with eigenvalues ν²,
/// each appearing twice.
pub fn symplectic_spectrum(sigma: &DMatrix<f64>) -> Result<SymplecticSpectrum> {
    let n2 = sigma.nrows();
    if n2 == 0 || n2 % 2 != 0 || sigma.ncols() != n2 {
        return Err(Error::Numerical(format!("matrix of shape {:?} is not 2n x 2n", sigma.shape())));
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eig = sym.clone().symmetric_eigen();
    let scale = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    if eig.eigenvalues.iter().any(|&l| l <= 1e-14 * scale) {
        return Err(Error::Numerical("matrix is not positive definite".into()));
    }
    let root = &eig.eigenvectors
        * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
        * eig.eigenvectors.transpose();
    let om = symplectic_form(n2 / 2);
    let a = &root * om * &root;
    let b = a.transpose() * &a;
    let b = (&b + b.transpose()) * 0.5;
    let mut nu2: Vec<f64> = b.symmetric_eigen().eigenvalues.iter().copied().collect();
    nu2.sort_by(f64::total_cmp);
    let values = nu2
        .chunks(2)
        .map(|pair| (0.5 * (pair[0] + pair[1])).max(0.0).sqrt())
        .collect();
    Ok(SymplecticSpectrum { values })
}

impl Serialize for CovarianceMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for CovarianceMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = <[[f64; 6]; 6]>::deserialize(d)?;
        Ok(CovarianceMatrix::from_rows(rows))
    }
}
