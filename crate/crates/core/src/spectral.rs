//! Dense complex linear algebra over small Hilbert spaces: Hermitian
//! operators, spectral decomposition into eigenspace projectors, tensor
//! products, and operator functions.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Absolute tolerance on the max entrywise deviation of `A` from `A†`.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Default eigenvalue grouping tolerance, relative to the spectral radius.
pub const DEFAULT_EIG_TOL_REL: f64 = 1e-9;
/// Absolute floor for the grouping tolerance (covers the zero operator).
pub const EIG_TOL_FLOOR: f64 = 1e-14;
/// Default tolerance for commutator checks.
pub const COMMUTE_TOL: f64 = 1e-9;
/// Tolerance used when validating orthonormality of basis families.
pub const ORTHO_TOL: f64 = 1e-8;

pub(crate) fn max_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// A dense self-adjoint operator on a finite-dimensional complex space.
///
/// Construction verifies hermiticity within [`HERMITICITY_TOL`] and
/// symmetrizes the entries, so every held matrix is exactly self-adjoint.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: CMatrix,
}

impl HermitianOperator {
    pub fn new(entries: CMatrix) -> Result<Self> {
        let dim = entries.nrows();
        if dim == 0 || entries.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim.max(1),
                got: entries.ncols(),
            });
        }
        let adjoint = entries.adjoint();
        let deviation = max_norm(&(&entries - &adjoint));
        if deviation > HERMITICITY_TOL {
            return Err(Error::NotHermitian {
                deviation,
                tol: HERMITICITY_TOL,
            });
        }
        let symmetrized = (entries + adjoint).map(|z| z * 0.5);
        Ok(Self {
            dim,
            entries: symmetrized,
        })
    }

    pub fn from_real(rows: usize, data: &[f64]) -> Result<Self> {
        let entries = CMatrix::from_iterator(
            rows,
            rows,
            // from_iterator fills column-major; real symmetric data is safe
            // only when the caller passes a symmetric slice, which `new`
            // verifies anyway.
            data.iter().map(|&x| Complex64::new(x, 0.0)),
        );
        Self::new(entries)
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        Self {
            dim: n,
            entries: m,
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            entries: CMatrix::identity(dim, dim),
        }
    }

    pub fn pauli_x() -> Self {
        Self::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
    }

    pub fn pauli_y() -> Self {
        let entries = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        Self::new(entries).unwrap()
    }

    pub fn pauli_z() -> Self {
        Self::from_diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.entries
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        &self.entries * v
    }

    /// Spectral radius estimate from the eigenvalues.
    pub fn spectral_radius(&self) -> f64 {
        self.entries
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .map(|l| l.abs())
            .fold(0.0, f64::max)
    }

    /// Decompose with the default relative grouping tolerance.
    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        let tol = (DEFAULT_EIG_TOL_REL * self.spectral_radius()).max(EIG_TOL_FLOOR);
        self.decompose_with_tol(tol)
    }

    /// Decompose into eigenspace projectors, merging eigenvalues whose
    /// pairwise gap is below `eig_tol` into one degenerate branch.
    pub fn decompose_with_tol(&self, eig_tol: f64) -> Result<SpectralDecomposition> {
        assert!(eig_tol > 0.0, "eig_tol must be positive");
        let eig = self.entries.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

        let mut branches: Vec<SpectralBranch> = Vec::new();
        let mut group: Vec<usize> = Vec::new();
        let flush = |group: &mut Vec<usize>, branches: &mut Vec<SpectralBranch>| {
            if group.is_empty() {
                return;
            }
            let eigenvalue =
                group.iter().map(|&k| eig.eigenvalues[k]).sum::<f64>() / group.len() as f64;
            let mut projector = CMatrix::zeros(self.dim, self.dim);
            for &k in group.iter() {
                let v = eig.eigenvectors.column(k);
                projector += &v * v.adjoint();
            }
            branches.push(SpectralBranch {
                eigenvalue,
                projector,
                multiplicity: group.len(),
            });
            group.clear();
        };
        for &k in &order {
            if let Some(&last) = group.last() {
                if eig.eigenvalues[k] - eig.eigenvalues[last] >= eig_tol {
                    flush(&mut group, &mut branches);
                }
            }
            group.push(k);
        }
        flush(&mut group, &mut branches);

        let decomposition = SpectralDecomposition {
            branches,
            source_dim: self.dim,
        };
        if decomposition.branches.len() == 1 {
            // collapsing everything into one branch must not lose real
            // spectral structure; judge against the default relative budget
            let radius = eig.eigenvalues.iter().map(|l| l.abs()).fold(0.0, f64::max);
            let budget = 10.0 * (DEFAULT_EIG_TOL_REL * radius).max(EIG_TOL_FLOOR);
            let recon_err = max_norm(&(decomposition.reconstruct().entries - &self.entries));
            if recon_err > budget {
                return Err(Error::ToleranceCollapse { eig_tol, recon_err });
            }
        }
        Ok(decomposition)
    }
}

/// Kronecker product `a ⊗ b` of two Hermitian operators.
pub fn tensor_product(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator {
        dim: a.dim * b.dim,
        entries: a.entries.kronecker(&b.entries),
    }
}

/// Kronecker product of two vectors.
pub fn tensor_vector(a: &CVector, b: &CVector) -> CVector {
    let mut out = CVector::zeros(a.len() * b.len());
    for i in 0..a.len() {
        for j in 0..b.len() {
            out[i * b.len() + j] = a[i] * b[j];
        }
    }
    out
}

/// True iff the max-norm of `ab − ba` is at most `tol`.
pub fn commutes(a: &HermitianOperator, b: &HermitianOperator, tol: f64) -> Result<bool> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let comm = &a.entries * &b.entries - &b.entries * &a.entries;
    Ok(max_norm(&comm) <= tol)
}

/// One eigenspace of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct SpectralBranch {
    pub eigenvalue: f64,
    pub projector: CMatrix,
    pub multiplicity: usize,
}

/// Spectral decomposition `a = Σ αₘ Pₘ` with branches in ascending
/// eigenvalue order and mutually orthogonal projectors summing to the
/// identity.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    branches: Vec<SpectralBranch>,
    source_dim: usize,
}

impl SpectralDecomposition {
    pub fn branches(&self) -> &[SpectralBranch] {
        &self.branches
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn eigenvalues(&self) -> impl Iterator<Item = f64> + '_ {
        self.branches.iter().map(|b| b.eigenvalue)
    }

    /// Index of the branch with eigenvalue closest to `value`.
    pub fn branch_near(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_gap = f64::INFINITY;
        for (i, b) in self.branches.iter().enumerate() {
            let gap = (b.eigenvalue - value).abs();
            if gap < best_gap {
                best_gap = gap;
                best = i;
            }
        }
        best
    }

    pub fn is_degenerate(&self) -> bool {
        self.branches.iter().any(|b| b.multiplicity > 1)
    }

    /// `Σ αₘ Pₘ`.
    pub fn reconstruct(&self) -> HermitianOperator {
        self.apply_function(|x| x)
    }

    /// Operator function calculus: `Σ f(αₘ) Pₘ`.
    pub fn apply_function(&self, f: impl Fn(f64) -> f64) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.source_dim, self.source_dim);
        for b in &self.branches {
            m += b.projector.map(|z| z * f(b.eigenvalue));
        }
        // branch projectors are Hermitian by construction, but symmetrize
        // away accumulated rounding
        let adjoint = m.adjoint();
        HermitianOperator {
            dim: self.source_dim,
            entries: (m + adjoint).map(|z| z * 0.5),
        }
    }

    /// Sum of branch projectors with eigenvalue inside the closed interval.
    pub fn interval_projector(&self, lo: f64, hi: f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.source_dim, self.source_dim);
        for b in &self.branches {
            if b.eigenvalue >= lo && b.eigenvalue <= hi {
                m += &b.projector;
            }
        }
        m
    }

    /// Orthonormal basis of the range of branch `i`, extracted from the
    /// projector's unit eigenvectors.
    pub fn branch_basis(&self, i: usize) -> Vec<CVector> {
        let b = &self.branches[i];
        let eig = b.projector.clone().symmetric_eigen();
        let mut vectors: Vec<CVector> = Vec::with_capacity(b.multiplicity);
        for k in 0..self.source_dim {
            if eig.eigenvalues[k] > 0.5 {
                vectors.push(eig.eigenvectors.column(k).into_owned());
            }
        }
        debug_assert_eq!(vectors.len(), b.multiplicity);
        vectors
    }
}

/// A complete or per-eigenspace family of orthonormal vectors, each tagged
/// with a distinct real label. Used to describe refinements `d̂` of a
/// degenerate observable.
#[derive(Debug, Clone)]
pub struct OrthonormalBasisFamily {
    groups: Vec<BasisGroup>,
    dim: usize,
    id: String,
}

#[derive(Debug, Clone)]
pub struct BasisGroup {
    pub vectors: Vec<CVector>,
    pub labels: Vec<f64>,
}

impl OrthonormalBasisFamily {
    pub fn new(groups: Vec<BasisGroup>, dim: usize, id: impl Into<String>) -> Result<Self> {
        let all: Vec<&CVector> = groups.iter().flat_map(|g| g.vectors.iter()).collect();
        for (i, u) in all.iter().enumerate() {
            if u.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: u.len(),
                });
            }
            for (j, v) in all.iter().enumerate().skip(i) {
                let dot: Complex64 = u.dotc(*v);
                let target = if i == j { 1.0 } else { 0.0 };
                if (dot.norm() - target).abs() > ORTHO_TOL {
                    return Err(Error::IncompleteBasis {
                        provided: all.len(),
                        dim,
                    });
                }
            }
        }
        let mut labels: Vec<f64> = groups.iter().flat_map(|g| g.labels.iter().copied()).collect();
        labels.sort_by(f64::total_cmp);
        for w in labels.windows(2) {
            if (w[1] - w[0]).abs() < 1e-12 {
                return Err(Error::DuplicateLabels { a: w[0], b: w[1] });
            }
        }
        Ok(Self {
            groups,
            dim,
            id: id.into(),
        })
    }

    pub fn groups(&self) -> &[BasisGroup] {
        &self.groups
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn total_vectors(&self) -> usize {
        self.groups.iter().map(|g| g.vectors.len()).sum()
    }

    pub fn is_complete(&self) -> bool {
        self.total_vectors() == self.dim
    }

    pub fn iter_vectors(&self) -> impl Iterator<Item = (&CVector, f64)> {
        self.groups
            .iter()
            .flat_map(|g| g.vectors.iter().zip(g.labels.iter().copied()))
    }

    /// The nondegenerate operator `d̂ = Σ γ P_φ` carried by this family.
    pub fn refinement_operator(&self) -> HermitianOperator {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (v, label) in self.iter_vectors() {
            m += (v * v.adjoint()).map(|z| z * label);
        }
        let adjoint = m.adjoint();
        HermitianOperator {
            dim: self.dim,
            entries: (m + adjoint).map(|z| z * 0.5),
        }
    }
}

// JSON schema {"dim": n, "re": [[...]], "im": [[...]]} used by the CLI for
// fixture loading.

#[derive(Serialize, Deserialize)]
struct MatrixJson {
    dim: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

pub(crate) fn matrix_to_parts(m: &CMatrix) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = m.nrows();
    let mut re = vec![vec![0.0; m.ncols()]; n];
    let mut im = vec![vec![0.0; m.ncols()]; n];
    for i in 0..n {
        for j in 0..m.ncols() {
            re[i][j] = m[(i, j)].re;
            im[i][j] = m[(i, j)].im;
        }
    }
    (re, im)
}

pub(crate) fn matrix_from_parts(
    dim: usize,
    re: &[Vec<f64>],
    im: &[Vec<f64>],
) -> std::result::Result<CMatrix, String> {
    if re.len() != dim || im.len() != dim {
        return Err(format!("expected {dim} rows, got {} / {}", re.len(), im.len()));
    }
    let mut m = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        if re[i].len() != dim || im[i].len() != dim {
            return Err(format!("row {i} has wrong length"));
        }
        for j in 0..dim {
            m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
        }
    }
    Ok(m)
}

impl Serialize for HermitianOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (re, im) = matrix_to_parts(&self.entries);
        MatrixJson {
            dim: self.dim,
            re,
            im,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = MatrixJson::deserialize(deserializer)?;
        let m = matrix_from_parts(raw.dim, &raw.re, &raw.im).map_err(D::Error::custom)?;
        HermitianOperator::new(m).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_decomposition_invariants(op: &HermitianOperator, d: &SpectralDecomposition, eig_tol: f64) {
        let n = d.source_dim();
        // completeness
        let mut sum = CMatrix::zeros(n, n);
        for b in d.branches() {
            sum += &b.projector;
        }
        assert!(max_norm(&(sum - CMatrix::identity(n, n))) < 1e-9);
        // idempotence, hermiticity, orthogonality, multiplicity = trace
        for (i, bi) in d.branches().iter().enumerate() {
            assert!(max_norm(&(&bi.projector * &bi.projector - &bi.projector)) < 1e-9);
            assert!(max_norm(&(bi.projector.adjoint() - &bi.projector)) < 1e-9);
            let tr: Complex64 = bi.projector.trace();
            assert_abs_diff_eq!(tr.re, bi.multiplicity as f64, epsilon = 1e-9);
            for bj in d.branches().iter().skip(i + 1) {
                assert!(max_norm(&(&bi.projector * &bj.projector)) < 1e-9);
            }
        }
        // ascending order
        for w in d.branches().windows(2) {
            assert!(w[0].eigenvalue < w[1].eigenvalue);
        }
        // multiplicities sum to dim
        let total: usize = d.branches().iter().map(|b| b.multiplicity).sum();
        assert_eq!(total, n);
        // reconstruction
        let err = max_norm(&(d.reconstruct().matrix() - op.matrix()));
        assert!(err <= 10.0 * eig_tol.max(1e-12), "recon err {err}");
    }

    #[test]
    fn pauli_z_decomposition() {
        let d = HermitianOperator::pauli_z().decompose().unwrap();
        assert_eq!(d.branches().len(), 2);
        assert_abs_diff_eq!(d.branches()[0].eigenvalue, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.branches()[1].eigenvalue, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.branches()[0].projector[(1, 1)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.branches()[1].projector[(0, 0)].re, 1.0, epsilon = 1e-12);
        assert!(!d.is_degenerate());
        assert_decomposition_invariants(&HermitianOperator::pauli_z(), &d, 1e-12);
    }

    #[test]
    fn identity_single_branch() {
        let op = HermitianOperator::identity(4);
        let d = op.decompose_with_tol(1e-9).unwrap();
        assert_eq!(d.branches().len(), 1);
        assert_eq!(d.branches()[0].multiplicity, 4);
        assert_abs_diff_eq!(d.branches()[0].eigenvalue, 1.0, epsilon = 1e-12);
        assert_decomposition_invariants(&op, &d, 1e-9);
    }

    #[test]
    fn lifted_pauli_z_is_degenerate() {
        let op = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::identity(2));
        let d = op.decompose().unwrap();
        assert_eq!(d.branches().len(), 2);
        assert_eq!(d.branches()[0].multiplicity, 2);
        assert_eq!(d.branches()[1].multiplicity, 2);
        assert!(d.is_degenerate());
        assert_decomposition_invariants(&op, &d, 1e-9);
    }

    #[test]
    fn tensor_of_diagonals() {
        let op = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::identity(2));
        let expected = HermitianOperator::from_diagonal(&[1.0, 1.0, -1.0, -1.0]);
        assert!(max_norm(&(op.matrix() - expected.matrix())) < 1e-15);
        let i4 = tensor_product(&HermitianOperator::identity(2), &HermitianOperator::identity(2));
        assert!(max_norm(&(i4.matrix() - CMatrix::identity(4, 4))) < 1e-15);
    }

    #[test]
    fn sigma_x_tensor_sigma_x_on_singlet() {
        // direct 4x4 matrix-vector multiplication oracle
        let xx = tensor_product(&HermitianOperator::pauli_x(), &HermitianOperator::pauli_x());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = CVector::from_iterator(
            4,
            [0.0, inv_sqrt2, -inv_sqrt2, 0.0]
                .iter()
                .map(|&x| Complex64::new(x, 0.0)),
        );
        let out = xx.apply(&singlet);
        let expect = singlet.map(|z| -z);
        assert!((out - expect).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-12);
    }

    #[test]
    fn lifted_commuting_pair() {
        let a = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::identity(2));
        let b = tensor_product(&HermitianOperator::identity(2), &HermitianOperator::pauli_x());
        assert!(commutes(&a, &b, COMMUTE_TOL).unwrap());
        // (a⊗I)(I⊗b) = a⊗b
        let ab = a.matrix() * b.matrix();
        let full = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::pauli_x());
        assert!(max_norm(&(ab - full.matrix())) < 1e-12);
    }

    #[test]
    fn pauli_z_x_do_not_commute() {
        // explicit 2x2 commutator is 2i·σ_y up to sign
        let z = HermitianOperator::pauli_z();
        let x = HermitianOperator::pauli_x();
        assert!(!commutes(&z, &x, COMMUTE_TOL).unwrap());
        assert!(commutes(&z, &z, COMMUTE_TOL).unwrap());
        let comm = z.matrix() * x.matrix() - x.matrix() * z.matrix();
        let two_i_sy = HermitianOperator::pauli_y().matrix().map(|v| v * Complex64::new(0.0, 2.0));
        assert!(max_norm(&(comm - two_i_sy)) < 1e-12);
    }

    #[test]
    fn commutes_rejects_dim_mismatch() {
        let z = HermitianOperator::pauli_z();
        let i4 = HermitianOperator::identity(4);
        assert!(matches!(
            commutes(&z, &i4, COMMUTE_TOL),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn operator_function_identity_and_constant() {
        let op = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::pauli_x());
        let d = op.decompose().unwrap();
        let recon = d.apply_function(|x| x);
        assert!(max_norm(&(recon.matrix() - op.matrix())) < 1e-8);
        let c = d.apply_function(|_| 2.5);
        let expect = CMatrix::identity(4, 4).map(|z| z * 2.5);
        assert!(max_norm(&(c.matrix() - &expect)) < 1e-8);
        // f(d) commutes with the reconstructed operator
        let f = d.apply_function(|x| x * x - 1.0);
        assert!(commutes(&f, &recon, 1e-8).unwrap());
    }

    #[test]
    fn function_calculus_composes() {
        let op = HermitianOperator::from_diagonal(&[0.0, 1.0, 2.0, 3.0]);
        let d = op.decompose().unwrap();
        let g = |x: f64| x + 1.0;
        let f = |x: f64| x * x;
        let lhs = d.apply_function(|x| f(g(x)));
        let rhs = d
            .apply_function(g)
            .decompose()
            .unwrap()
            .apply_function(f);
        assert!(max_norm(&(lhs.matrix() - rhs.matrix())) < 1e-8);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        assert!(matches!(
            HermitianOperator::new(m),
            Err(Error::NotHermitian { .. })
        ));
    }

    #[test]
    fn tolerance_collapse() {
        let op = HermitianOperator::from_diagonal(&[0.0, 1.0]);
        assert!(matches!(
            op.decompose_with_tol(10.0),
            Err(Error::ToleranceCollapse { .. })
        ));
    }

    #[test]
    fn branch_basis_spans_eigenspace() {
        let op = tensor_product(&HermitianOperator::pauli_z(), &HermitianOperator::identity(2));
        let d = op.decompose().unwrap();
        for (i, b) in d.branches().iter().enumerate() {
            let basis = d.branch_basis(i);
            assert_eq!(basis.len(), b.multiplicity);
            let mut p = CMatrix::zeros(4, 4);
            for v in &basis {
                p += v * v.adjoint();
            }
            assert!(max_norm(&(p - &b.projector)) < 1e-9);
        }
    }

    #[test]
    fn basis_family_rejects_duplicate_labels() {
        let e0 = CVector::from_iterator(2, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let e1 = CVector::from_iterator(2, [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let groups = vec![BasisGroup {
            vectors: vec![e0, e1],
            labels: vec![1.0, 1.0],
        }];
        assert!(matches!(
            OrthonormalBasisFamily::new(groups, 2, "t"),
            Err(Error::DuplicateLabels { .. })
        ));
    }

    #[test]
    fn refinement_operator_from_family() {
        let e0 = CVector::from_iterator(2, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let e1 = CVector::from_iterator(2, [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)]);
        let fam = OrthonormalBasisFamily::new(
            vec![BasisGroup {
                vectors: vec![e0, e1],
                labels: vec![2.0, 5.0],
            }],
            2,
            "diag",
        )
        .unwrap();
        let d = fam.refinement_operator();
        let expect = HermitianOperator::from_diagonal(&[2.0, 5.0]);
        assert!(max_norm(&(d.matrix() - expect.matrix())) < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let op = tensor_product(&HermitianOperator::pauli_y(), &HermitianOperator::pauli_z());
        let s = serde_json::to_string(&op).unwrap();
        assert!(s.contains("\"dim\":4"));
        let back: HermitianOperator = serde_json::from_str(&s).unwrap();
        assert!(max_norm(&(back.matrix() - op.matrix())) < 1e-15);
    }
}
