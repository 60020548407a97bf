//! Composite systems, entangled states, lifted observables, and the
//! side-by-side comparison of the two projection postulates on them.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{
    born_probabilities, build_refinement, luders_measure, von_neumann_measure, MeasurementRecord,
    PostState, QuantumState, Refinement,
};
use crate::spectral::{
    tensor_product, tensor_vector, CMatrix, CVector, HermitianOperator, SpectralDecomposition,
};

/// Variance threshold below which a remote observable counts as sharp.
pub const SHARPNESS_TOL: f64 = 1e-9;

/// Which factor of the tensor product a local operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    First,
    Second,
}

/// A bipartite tensor-product space together with the local eigenbases used
/// to build states and refinements.
#[derive(Debug, Clone)]
pub struct CompositeSpace {
    dim1: usize,
    dim2: usize,
    basis1: Vec<CVector>,
    basis2: Vec<CVector>,
}

impl CompositeSpace {
    /// Computational bases on both sides. Both dimensions must be ≥ 2.
    pub fn standard(dim1: usize, dim2: usize) -> Result<Self> {
        let unit = |dim: usize, k: usize| {
            let mut v = CVector::zeros(dim);
            v[k] = Complex64::new(1.0, 0.0);
            v
        };
        Self::with_bases(
            (0..dim1).map(|k| unit(dim1, k)).collect(),
            (0..dim2).map(|k| unit(dim2, k)).collect(),
        )
    }

    pub fn with_bases(basis1: Vec<CVector>, basis2: Vec<CVector>) -> Result<Self> {
        let dim1 = basis1.len();
        let dim2 = basis2.len();
        if dim1 < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: dim1,
            });
        }
        if dim2 < 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: dim2,
            });
        }
        Ok(Self {
            dim1,
            dim2,
            basis1,
            basis2,
        })
    }

    /// Eigenbases of two nondegenerate local observables, in ascending
    /// eigenvalue order.
    pub fn from_observables(a1: &HermitianOperator, a2: &HermitianOperator) -> Result<Self> {
        let d1 = a1.decompose()?;
        let d2 = a2.decompose()?;
        if d1.is_degenerate() {
            return Err(Error::DegenerateLocalObservable { side: 1 });
        }
        if d2.is_degenerate() {
            return Err(Error::DegenerateLocalObservable { side: 2 });
        }
        let extract = |d: &SpectralDecomposition| {
            (0..d.branches().len())
                .map(|i| d.branch_basis(i).remove(0))
                .collect()
        };
        Self::with_bases(extract(&d1), extract(&d2))
    }

    pub fn dim1(&self) -> usize {
        self.dim1
    }

    pub fn dim2(&self) -> usize {
        self.dim2
    }

    pub fn total_dim(&self) -> usize {
        self.dim1 * self.dim2
    }

    pub fn basis1(&self) -> &[CVector] {
        &self.basis1
    }

    pub fn basis2(&self) -> &[CVector] {
        &self.basis2
    }

    /// `e₁^α ⊗ e₂^β`.
    pub fn product_vector(&self, alpha: usize, beta: usize) -> CVector {
        tensor_vector(&self.basis1[alpha], &self.basis2[beta])
    }
}

/// `ψ = c₁ e₁ⁱ⊗e₂ʲ + c₂ e₁ʲ⊗e₂ⁱ` with `|c₁|² + |c₂|² = 1` and `i ≠ j`.
pub fn entangled_state(
    c1: Complex64,
    c2: Complex64,
    i: usize,
    j: usize,
    space: &CompositeSpace,
) -> Result<QuantumState> {
    let norm_sq = c1.norm_sqr() + c2.norm_sqr();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq });
    }
    if i == j {
        return Err(Error::EqualIndices { index: i });
    }
    let bound = space.dim1.min(space.dim2);
    for idx in [i, j] {
        if idx >= bound {
            return Err(Error::IndexOutOfRange {
                index: idx,
                dim: bound,
            });
        }
    }
    let v = space.product_vector(i, j).map(|z| z * c1) + space.product_vector(j, i).map(|z| z * c2);
    QuantumState::pure(v)
}

/// `ψ = Σ_γ c_γ e₁^γ⊗e₂^γ`.
pub fn schmidt_like_state(coeffs: &[Complex64], space: &CompositeSpace) -> Result<QuantumState> {
    let bound = space.dim1.min(space.dim2);
    if coeffs.len() > bound {
        return Err(Error::IndexOutOfRange {
            index: coeffs.len(),
            dim: bound,
        });
    }
    let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq });
    }
    let mut v = CVector::zeros(space.total_dim());
    for (gamma, &c) in coeffs.iter().enumerate() {
        v += space.product_vector(gamma, gamma).map(|z| z * c);
    }
    QuantumState::pure(v)
}

/// General product-basis superposition `ψ = Σ c_{αβ} e₁^α⊗e₂^β` from a
/// `dim1 × dim2` coefficient matrix.
pub fn product_superposition(coeffs: &CMatrix, space: &CompositeSpace) -> Result<QuantumState> {
    if coeffs.nrows() != space.dim1 || coeffs.ncols() != space.dim2 {
        return Err(Error::DimensionMismatch {
            expected: space.dim1,
            got: coeffs.nrows(),
        });
    }
    let norm_sq: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
    if (norm_sq - 1.0).abs() > 1e-10 {
        return Err(Error::NotNormalized { norm_sq });
    }
    let mut v = CVector::zeros(space.total_dim());
    for alpha in 0..space.dim1 {
        for beta in 0..space.dim2 {
            v += space.product_vector(alpha, beta).map(|z| z * coeffs[(alpha, beta)]);
        }
    }
    QuantumState::pure(v)
}

/// `â ⊗ I` or `I ⊗ â` on the composite space.
pub fn lift_observable(
    local: &HermitianOperator,
    side: Side,
    space: &CompositeSpace,
) -> Result<HermitianOperator> {
    let (expected, other) = match side {
        Side::First => (space.dim1, space.dim2),
        Side::Second => (space.dim2, space.dim1),
    };
    if local.dim() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: local.dim(),
        });
    }
    Ok(match side {
        Side::First => tensor_product(local, &HermitianOperator::identity(other)),
        Side::Second => tensor_product(&HermitianOperator::identity(other), local),
    })
}

/// The default refinement of a lifted observable: the product eigenbasis
/// `e₁^α⊗e₂^β` grouped per eigenspace of the lifted operator, labelled
/// `α·N₂ + β`.
pub fn canonical_product_refinement(
    lifted: &SpectralDecomposition,
    space: &CompositeSpace,
    measured_side: Side,
) -> Result<Refinement> {
    // group product vectors by which lifted branch they belong to
    let op = lifted.reconstruct();
    let mut bases: Vec<Vec<CVector>> = vec![Vec::new(); lifted.branches().len()];
    let mut labels_grouped: Vec<Vec<f64>> = vec![Vec::new(); lifted.branches().len()];
    for alpha in 0..space.dim1 {
        for beta in 0..space.dim2 {
            let v = space.product_vector(alpha, beta);
            let av = op.apply(&v);
            let eigenvalue = v.dotc(&av).re;
            let branch = lifted.branch_near(eigenvalue);
            bases[branch].push(v);
            labels_grouped[branch].push((alpha * space.dim2 + beta) as f64);
        }
    }
    let labels: Vec<f64> = labels_grouped.into_iter().flatten().collect();
    let id = match measured_side {
        Side::First => "product-first",
        Side::Second => "product-second",
    };
    build_refinement(lifted, Some(bases), Some(labels), id)
}

/// One postulate's branch of the EPR scenario report.
#[derive(Debug, Clone, Serialize)]
pub struct EprBranchReport {
    pub outcome: f64,
    pub probability: f64,
    pub purity: f64,
    pub undetermined: bool,
    /// Variance of the lifted remote observable on the post-state.
    pub remote_variance: f64,
    /// Expected remote value when sharp.
    pub remote_value: Option<f64>,
    pub element_of_reality_assigned: bool,
    pub refinement_id: Option<String>,
    pub post_state: QuantumState,
}

/// Side-by-side comparison of the two postulates for one measurement of the
/// lifted first-side observable.
#[derive(Debug, Clone, Serialize)]
pub struct EprScenarioReport {
    pub luders: EprBranchReport,
    pub von_neumann: EprBranchReport,
}

fn branch_report(record: &MeasurementRecord, remote: &HermitianOperator) -> Result<EprBranchReport> {
    let post = record.post_state.state();
    let remote_variance = post.variance(remote)?;
    let sharp = remote_variance < SHARPNESS_TOL;
    let undetermined = record.post_state.is_undetermined();
    let refinement_id = match &record.post_state {
        PostState::Undetermined { basis_id, .. } => Some(basis_id.clone()),
        PostState::Determined(_) => None,
    };
    Ok(EprBranchReport {
        outcome: record.outcome,
        probability: record.probability,
        purity: post.purity(),
        undetermined,
        remote_variance,
        remote_value: sharp.then(|| post.expectation(remote).expect("dims checked")),
        // an element of reality needs a determined post-state on which the
        // remote observable is sharp
        element_of_reality_assigned: sharp && !undetermined,
        refinement_id,
        post_state: post.clone(),
    })
}

/// Measure the lifted first-side observable on `state` at `outcome_index`,
/// under both postulates, and report whether the remote observable becomes
/// sharp on each post-state.
pub fn run_epr_scenario(
    state: &QuantumState,
    a1: &HermitianOperator,
    a2: &HermitianOperator,
    outcome_index: usize,
) -> Result<EprScenarioReport> {
    let space = CompositeSpace::from_observables(a1, a2)?;
    if state.dim() != space.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: space.total_dim(),
            got: state.dim(),
        });
    }
    let lifted1 = lift_observable(a1, Side::First, &space)?.decompose()?;
    let lifted2 = lift_observable(a2, Side::Second, &space)?;

    let luders_record = luders_measure(state, &lifted1, outcome_index)?;
    let refinement = canonical_product_refinement(&lifted1, &space, Side::First)?;
    let vn_record = von_neumann_measure(state, &lifted1, &refinement.family, outcome_index)?;

    Ok(EprScenarioReport {
        luders: branch_report(&luders_record, &lifted2)?,
        von_neumann: branch_report(&vn_record, &lifted2)?,
    })
}

/// Sampling wrapper: pick the outcome branch by Born probabilities, then
/// run the deterministic scenario on it.
pub fn run_epr_scenario_sampled<R: Rng>(
    state: &QuantumState,
    a1: &HermitianOperator,
    a2: &HermitianOperator,
    rng: &mut R,
) -> Result<(usize, EprScenarioReport)> {
    let space = CompositeSpace::from_observables(a1, a2)?;
    let lifted1 = lift_observable(a1, Side::First, &space)?.decompose()?;
    let probs = born_probabilities(state, &lifted1)?;
    let mut draw = rng.gen::<f64>();
    let mut index = probs.len() - 1;
    for (i, (_, p)) in probs.iter().enumerate() {
        if draw < *p {
            index = i;
            break;
        }
        draw -= p;
    }
    Ok((index, run_epr_scenario(state, a1, a2, index)?))
}

/// The fixed 4-dimensional spin refinement: `Â e₁^α⊗e₂^β = (α + 2β)
/// e₁^α⊗e₂^β` with the sign encoding `−− = 0, +− = 1, −+ = 2, ++ = 3`,
/// so that the lifted spin observables are recovered as `f₁(Â)` and
/// `f₂(Â)`.
#[derive(Debug, Clone)]
pub struct SpinRefinement {
    pub operator: HermitianOperator,
    pub local1: HermitianOperator,
    pub local2: HermitianOperator,
    pub space: CompositeSpace,
}

impl SpinRefinement {
    /// `f₁`: first-side spin value (±1) encoded in the low bit.
    pub fn decode_first(label: f64) -> f64 {
        let code = label.round() as i64;
        if code & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }

    /// `f₂`: second-side spin value (±1) encoded in the high bit.
    pub fn decode_second(label: f64) -> f64 {
        let code = label.round() as i64;
        if (code >> 1) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

fn spin_operator(direction: [f64; 3]) -> Result<HermitianOperator> {
    let norm = direction.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::NonUnitDirection { norm });
    }
    let m = HermitianOperator::pauli_x().matrix().map(|v| v * direction[0])
        + HermitianOperator::pauli_y().matrix().map(|v| v * direction[1])
        + HermitianOperator::pauli_z().matrix().map(|v| v * direction[2]);
    HermitianOperator::new(m)
}

/// Build the spin-refinement operator for local spin directions `x` and `y`
/// (unit vectors in ℝ³).
pub fn spin_refinement_example(x: [f64; 3], y: [f64; 3]) -> Result<SpinRefinement> {
    let a1 = spin_operator(x)?;
    let a2 = spin_operator(y)?;
    let space = CompositeSpace::from_observables(&a1, &a2)?;
    // eigenbases come out in ascending eigenvalue order, so index 0 is the
    // "−" eigenvector and index 1 the "+" one, matching the bit encoding
    let mut m = CMatrix::zeros(4, 4);
    for alpha in 0..2 {
        for beta in 0..2 {
            let v = space.product_vector(alpha, beta);
            let code = (alpha + 2 * beta) as f64;
            m += (&v * v.adjoint()).map(|z| z * code);
        }
    }
    Ok(SpinRefinement {
        operator: HermitianOperator::new(m)?,
        local1: a1,
        local2: a2,
        space,
    })
}
