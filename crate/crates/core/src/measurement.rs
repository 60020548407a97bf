//! Born probabilities and the two projection postulates.
//!
//! The selective update `ψ ↦ Pψ/‖Pψ‖` applies to any branch regardless of
//! degeneracy (the form standard today). The older, stricter form only
//! determines the post-measurement state through a refinement `d` with
//! nondegenerate spectrum such that `a = f(d)`; for a degenerate branch the
//! outcome alone leaves the state undetermined, and conditioning on the
//! refinement yields a basis-dependent statistical mixture. Both paths are
//! implemented here, together with joint probabilities for commuting
//! observables and quantum conditional probability.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use serde::ser::SerializeStruct;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::spectral::{
    matrix_from_parts, matrix_to_parts, max_norm, BasisGroup, CMatrix, CVector,
    HermitianOperator, OrthonormalBasisFamily, SpectralDecomposition, COMMUTE_TOL,
};

/// Probabilities below this floor cannot be conditioned on.
pub const PROB_FLOOR: f64 = 1e-12;
/// Norm tolerance for state validation.
pub const STATE_TOL: f64 = 1e-10;
/// Max allowed leakage of a refinement vector outside its eigenspace.
pub const REFINEMENT_LEAK_TOL: f64 = 1e-8;

/// A pure state vector or a density operator.
#[derive(Debug, Clone)]
pub enum QuantumState {
    Pure(CVector),
    Density(CMatrix),
}

impl QuantumState {
    pub fn pure(v: CVector) -> Result<Self> {
        let norm = v.norm();
        if (norm - 1.0).abs() > STATE_TOL {
            return Err(Error::StateNotNormalized { norm });
        }
        Ok(Self::Pure(v))
    }

    pub fn density(m: CMatrix) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: m.ncols(),
            });
        }
        let herm_dev = max_norm(&(&m - m.adjoint()));
        if herm_dev > STATE_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("not Hermitian (deviation {herm_dev:.3e})"),
            });
        }
        let trace = m.trace();
        if (trace.re - 1.0).abs() > STATE_TOL || trace.im.abs() > STATE_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("trace {} != 1", trace.re),
            });
        }
        let sym = (m.clone() + m.adjoint()).map(|z| z * 0.5);
        let min_eig = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidDensity {
                reason: format!("negative eigenvalue {min_eig:.3e}"),
            });
        }
        Ok(Self::Density(sym))
    }

    /// The `k`-th computational basis state on `dim` dimensions.
    pub fn basis_state(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        Self::Pure(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Pure(v) => v.len(),
            Self::Density(m) => m.nrows(),
        }
    }

    pub fn is_pure_variant(&self) -> bool {
        matches!(self, Self::Pure(_))
    }

    /// `Tr(ρ²)`; exactly 1 for the pure variant.
    pub fn purity(&self) -> f64 {
        match self {
            Self::Pure(_) => 1.0,
            Self::Density(m) => (m * m).trace().re,
        }
    }

    pub fn to_density_matrix(&self) -> CMatrix {
        match self {
            Self::Pure(v) => v * v.adjoint(),
            Self::Density(m) => m.clone(),
        }
    }

    pub fn expectation(&self, op: &HermitianOperator) -> Result<f64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: op.dim(),
            });
        }
        Ok(match self {
            Self::Pure(v) => v.dotc(&(op.matrix() * v)).re,
            Self::Density(m) => (m * op.matrix()).trace().re,
        })
    }

    pub fn variance(&self, op: &HermitianOperator) -> Result<f64> {
        let mean = self.expectation(op)?;
        let sq = HermitianOperator::new(op.matrix() * op.matrix()).expect("square of Hermitian");
        Ok((self.expectation(&sq)? - mean * mean).max(0.0))
    }

    /// `‖Pψ‖²` or `Tr(ρP)` for a projector `P`.
    pub fn weight(&self, projector: &CMatrix) -> f64 {
        match self {
            Self::Pure(v) => (projector * v).norm_squared(),
            Self::Density(m) => (m * projector).trace().re,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum StateJson {
    Pure {
        dim: usize,
        re: Vec<f64>,
        im: Vec<f64>,
    },
    Density {
        dim: usize,
        re: Vec<Vec<f64>>,
        im: Vec<Vec<f64>>,
    },
}

impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Self::Pure(v) => StateJson::Pure {
                dim: v.len(),
                re: v.iter().map(|z| z.re).collect(),
                im: v.iter().map(|z| z.im).collect(),
            },
            Self::Density(m) => {
                let (re, im) = matrix_to_parts(m);
                StateJson::Density {
                    dim: m.nrows(),
                    re,
                    im,
                }
            }
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match StateJson::deserialize(deserializer)? {
            StateJson::Pure { dim, re, im } => {
                if re.len() != dim || im.len() != dim {
                    return Err(D::Error::custom("state vector length mismatch"));
                }
                let v = DVector::from_iterator(
                    dim,
                    re.iter().zip(&im).map(|(&r, &i)| Complex64::new(r, i)),
                );
                QuantumState::pure(v).map_err(|e| D::Error::custom(e.to_string()))
            }
            StateJson::Density { dim, re, im } => {
                let m = matrix_from_parts(dim, &re, &im).map_err(D::Error::custom)?;
                QuantumState::density(m).map_err(|e| D::Error::custom(e.to_string()))
            }
        }
    }
}

/// Which projection rule produced a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Postulate {
    Luders,
    VonNeumann,
}

/// Post-measurement state: determined, or explicitly undetermined with the
/// refinement-conditional mixture and the basis that produced it.
#[derive(Debug, Clone)]
pub enum PostState {
    Determined(QuantumState),
    Undetermined {
        conditional_mixture: QuantumState,
        basis_id: String,
    },
}

impl PostState {
    pub fn state(&self) -> &QuantumState {
        match self {
            Self::Determined(s) => s,
            Self::Undetermined {
                conditional_mixture,
                ..
            } => conditional_mixture,
        }
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, Self::Undetermined { .. })
    }
}

/// Outcome, Born probability, and post-measurement state of one selective
/// measurement.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub outcome: f64,
    pub probability: f64,
    pub post_state: PostState,
    pub postulate: Postulate,
}

impl Serialize for MeasurementRecord {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("MeasurementRecord", 5)?;
        s.serialize_field("outcome", &self.outcome)?;
        s.serialize_field("probability", &self.probability)?;
        s.serialize_field("postulate", &self.postulate)?;
        match &self.post_state {
            PostState::Determined(state) => {
                s.serialize_field("post_state", state)?;
                s.serialize_field("undetermined", &false)?;
            }
            PostState::Undetermined {
                conditional_mixture,
                basis_id,
            } => {
                #[derive(Serialize)]
                struct Undet<'a> {
                    conditional_mixture: &'a QuantumState,
                    basis_id: &'a str,
                }
                s.serialize_field(
                    "post_state",
                    &Undet {
                        conditional_mixture,
                        basis_id,
                    },
                )?;
                s.serialize_field("undetermined", &true)?;
            }
        }
        s.end()
    }
}

fn check_dims(state: &QuantumState, obs: &SpectralDecomposition) -> Result<()> {
    if state.dim() != obs.source_dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: obs.source_dim(),
        });
    }
    Ok(())
}

/// Born rule: one `(eigenvalue, probability)` entry per branch.
pub fn born_probabilities(
    state: &QuantumState,
    obs: &SpectralDecomposition,
) -> Result<Vec<(f64, f64)>> {
    check_dims(state, obs)?;
    Ok(obs
        .branches()
        .iter()
        .map(|b| (b.eigenvalue, state.weight(&b.projector)))
        .collect())
}

/// Selective update `ψ ↦ Pψ/‖Pψ‖` (resp. `ρ ↦ PρP/Tr(ρP)`) for the branch
/// at `outcome_index`. The post-state is always determined, degenerate or
/// not.
pub fn luders_measure(
    state: &QuantumState,
    obs: &SpectralDecomposition,
    outcome_index: usize,
) -> Result<MeasurementRecord> {
    check_dims(state, obs)?;
    let branch = &obs.branches()[outcome_index];
    let prob = state.weight(&branch.projector);
    if prob <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob });
    }
    let post = match state {
        QuantumState::Pure(v) => {
            let projected = &branch.projector * v;
            QuantumState::Pure(projected.map(|z| z / prob.sqrt()))
        }
        QuantumState::Density(m) => {
            let updated = (&branch.projector * m * &branch.projector).map(|z| z / prob);
            QuantumState::Density(updated)
        }
    };
    Ok(MeasurementRecord {
        outcome: branch.eigenvalue,
        probability: prob,
        post_state: PostState::Determined(post),
        postulate: Postulate::Luders,
    })
}

/// Nonselective update `ρ ↦ Σₘ Pₘ ρ Pₘ`.
pub fn luders_nonselective(
    state: &QuantumState,
    obs: &SpectralDecomposition,
) -> Result<QuantumState> {
    check_dims(state, obs)?;
    let rho = state.to_density_matrix();
    let n = obs.source_dim();
    let mut out = CMatrix::zeros(n, n);
    for b in obs.branches() {
        out += &b.projector * &rho * &b.projector;
    }
    QuantumState::density(out)
}

fn validate_refinement(
    obs: &SpectralDecomposition,
    refinement: &OrthonormalBasisFamily,
) -> Result<()> {
    if refinement.dim() != obs.source_dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.source_dim(),
            got: refinement.dim(),
        });
    }
    if refinement.groups().len() != obs.branches().len() {
        return Err(Error::RefinementMismatch {
            group: refinement.groups().len(),
            leakage: f64::NAN,
        });
    }
    for (g, (group, branch)) in refinement
        .groups()
        .iter()
        .zip(obs.branches())
        .enumerate()
    {
        if group.vectors.len() != branch.multiplicity {
            return Err(Error::RefinementMismatch {
                group: g,
                leakage: f64::NAN,
            });
        }
        for v in &group.vectors {
            let leakage = (&branch.projector * v - v).norm();
            if leakage > REFINEMENT_LEAK_TOL {
                return Err(Error::RefinementMismatch { group: g, leakage });
            }
        }
    }
    Ok(())
}

fn refinement_weight(state: &QuantumState, v: &CVector) -> f64 {
    match state {
        QuantumState::Pure(psi) => v.dotc(psi).norm_sqr(),
        QuantumState::Density(rho) => v.dotc(&(rho * v)).re,
    }
}

/// Selective measurement in the refinement-mediated form. For a branch of
/// multiplicity 1 this coincides with [`luders_measure`]; otherwise the
/// outcome leaves the state undetermined and the record carries the
/// refinement-conditional mixture
/// `Σ_{k∈branch} wₖ P_{φₖ} / p(branch)`.
pub fn von_neumann_measure(
    state: &QuantumState,
    obs: &SpectralDecomposition,
    refinement: &OrthonormalBasisFamily,
    outcome_index: usize,
) -> Result<MeasurementRecord> {
    check_dims(state, obs)?;
    validate_refinement(obs, refinement)?;
    let branch = &obs.branches()[outcome_index];
    if branch.multiplicity == 1 {
        let mut record = luders_measure(state, obs, outcome_index)?;
        record.postulate = Postulate::VonNeumann;
        return Ok(record);
    }
    let prob = state.weight(&branch.projector);
    if prob <= PROB_FLOOR {
        return Err(Error::ZeroProbabilityBranch { prob });
    }
    let n = obs.source_dim();
    let mut mix = CMatrix::zeros(n, n);
    for v in &refinement.groups()[outcome_index].vectors {
        let w = refinement_weight(state, v);
        mix += (v * v.adjoint()).map(|z| z * (w / prob));
    }
    Ok(MeasurementRecord {
        outcome: branch.eigenvalue,
        probability: prob,
        post_state: PostState::Undetermined {
            conditional_mixture: QuantumState::density(mix)?,
            basis_id: refinement.id().to_string(),
        },
        postulate: Postulate::VonNeumann,
    })
}

/// Nonselective refinement measurement: `ρ ↦ Σₖ ⟨ρφₖ,φₖ⟩ P_{φₖ}` over a
/// complete orthonormal basis. The result is diagonal in that basis.
pub fn von_neumann_nonselective(
    state: &QuantumState,
    refinement: &OrthonormalBasisFamily,
) -> Result<QuantumState> {
    if refinement.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: refinement.dim(),
        });
    }
    if !refinement.is_complete() {
        return Err(Error::IncompleteBasis {
            provided: refinement.total_vectors(),
            dim: refinement.dim(),
        });
    }
    let n = state.dim();
    let mut out = CMatrix::zeros(n, n);
    for (v, _) in refinement.iter_vectors() {
        let w = refinement_weight(state, v);
        out += (v * v.adjoint()).map(|z| z * w);
    }
    QuantumState::density(out)
}

/// A refinement `d̂` of an observable, with the label-to-eigenvalue map
/// that coarse-grains `d` back to the refined observable.
#[derive(Debug, Clone)]
pub struct Refinement {
    pub family: OrthonormalBasisFamily,
    pub operator: HermitianOperator,
    label_to_eigenvalue: Vec<(f64, f64)>,
}

impl Refinement {
    /// Eigenvalue of the refined observable for a `d`-outcome label.
    pub fn coarse_value(&self, label: f64) -> f64 {
        self.label_to_eigenvalue
            .iter()
            .min_by(|a, b| (a.0 - label).abs().total_cmp(&(b.0 - label).abs()))
            .map(|&(_, e)| e)
            .expect("refinement has at least one label")
    }

    /// The coarse-graining function `f` with `a = f(d)`.
    pub fn coarse_fn(&self) -> impl Fn(f64) -> f64 + '_ {
        move |label| self.coarse_value(label)
    }
}

/// Build a refinement of `obs`: per-eigenspace orthonormal bases (supplied
/// or extracted from the projectors) with pairwise distinct labels, and the
/// nondegenerate operator `d̂ = Σ γ P_φ`.
///
/// When `obs` is already nondegenerate and no bases or labels are supplied,
/// labels default to the eigenvalues, so `d̂` reconstructs `obs`.
pub fn build_refinement(
    obs: &SpectralDecomposition,
    per_eigenspace_bases: Option<Vec<Vec<CVector>>>,
    labels: Option<Vec<f64>>,
    id: impl Into<String>,
) -> Result<Refinement> {
    let bases: Vec<Vec<CVector>> = match per_eigenspace_bases {
        Some(b) => b,
        None => (0..obs.branches().len())
            .map(|i| obs.branch_basis(i))
            .collect(),
    };
    let total: usize = bases.iter().map(|g| g.len()).sum();
    let default_labels: Vec<f64> = if labels.is_none() && !obs.is_degenerate() {
        obs.eigenvalues().collect()
    } else {
        // stride encoding keeps the label -> branch map trivial
        let stride = obs
            .branches()
            .iter()
            .map(|b| b.multiplicity)
            .max()
            .unwrap_or(1) as f64;
        bases
            .iter()
            .enumerate()
            .flat_map(|(m, g)| (0..g.len()).map(move |j| m as f64 * stride + j as f64))
            .collect()
    };
    let labels = labels.unwrap_or(default_labels);
    if labels.len() != total {
        return Err(Error::IncompleteBasis {
            provided: labels.len(),
            dim: total,
        });
    }
    let mut groups = Vec::with_capacity(bases.len());
    let mut label_iter = labels.into_iter();
    let mut label_to_eigenvalue = Vec::with_capacity(total);
    for (branch, vectors) in obs.branches().iter().zip(bases) {
        let group_labels: Vec<f64> = label_iter.by_ref().take(vectors.len()).collect();
        for &l in &group_labels {
            label_to_eigenvalue.push((l, branch.eigenvalue));
        }
        groups.push(BasisGroup {
            vectors,
            labels: group_labels,
        });
    }
    let family = OrthonormalBasisFamily::new(groups, obs.source_dim(), id)?;
    validate_refinement(obs, &family)?;
    let operator = family.refinement_operator();
    Ok(Refinement {
        family,
        operator,
        label_to_eigenvalue,
    })
}

/// Closed interval of outcome values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn point(x: f64) -> Self {
        // half-open around x to absorb eigenvalue rounding
        Self {
            lo: x - 1e-9,
            hi: x + 1e-9,
        }
    }

    pub fn all() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }
}

/// Joint probability `‖E₁(Δ₁)…Eₙ(Δₙ)ψ‖²` for commuting observables, where
/// each `Eᵢ(Δᵢ)` sums the branch projectors with eigenvalue inside `Δᵢ`.
pub fn joint_probability_commuting(
    state: &QuantumState,
    specs: &[(&SpectralDecomposition, Interval)],
) -> Result<f64> {
    let ops: Vec<HermitianOperator> = specs.iter().map(|(d, _)| d.reconstruct()).collect();
    for i in 0..ops.len() {
        check_dims(state, specs[i].0)?;
        for j in i + 1..ops.len() {
            let comm = ops[i].matrix() * ops[j].matrix() - ops[j].matrix() * ops[i].matrix();
            let norm = max_norm(&comm);
            if norm > COMMUTE_TOL {
                return Err(Error::NonCommutingObservables {
                    norm,
                    tol: COMMUTE_TOL,
                });
            }
        }
    }
    let n = state.dim();
    let mut product = CMatrix::identity(n, n);
    for (d, interval) in specs {
        product = d.interval_projector(interval.lo, interval.hi) * product;
    }
    Ok(match state {
        QuantumState::Pure(v) => (&product * v).norm_squared(),
        QuantumState::Density(m) => (&product * m * product.adjoint()).trace().re,
    })
}

/// A common nondegenerate refinement of two commuting observables, built by
/// diagonalizing `b` inside each eigenspace of `a`. Each refinement vector
/// decodes to an `(a, b)` eigenvalue pair.
#[derive(Debug, Clone)]
pub struct JointRefinement {
    pub family: OrthonormalBasisFamily,
    pub operator: HermitianOperator,
    /// Per refinement vector, in label order: decoded `(a, b)` eigenvalues.
    pub decoded: Vec<(f64, f64)>,
}

pub fn common_refinement(
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
) -> Result<JointRefinement> {
    let op_a = a.reconstruct();
    let op_b = b.reconstruct();
    if op_a.dim() != op_b.dim() {
        return Err(Error::DimensionMismatch {
            expected: op_a.dim(),
            got: op_b.dim(),
        });
    }
    let comm = op_a.matrix() * op_b.matrix() - op_b.matrix() * op_a.matrix();
    let norm = max_norm(&comm);
    if norm > COMMUTE_TOL {
        return Err(Error::NonCommutingObservables {
            norm,
            tol: COMMUTE_TOL,
        });
    }
    let n = a.source_dim();
    let mut vectors: Vec<CVector> = Vec::with_capacity(n);
    let mut decoded: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (m, branch) in a.branches().iter().enumerate() {
        let basis = a.branch_basis(m);
        let k = basis.len();
        let mut v_mat = CMatrix::zeros(n, k);
        for (c, v) in basis.iter().enumerate() {
            v_mat.set_column(c, v);
        }
        // b compressed to the a-eigenspace; Hermitian because [a, b] = 0
        let b_small = v_mat.adjoint() * op_b.matrix() * &v_mat;
        let eig = b_small.symmetric_eigen();
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let mut group = Vec::with_capacity(k);
        for &c in &order {
            let w = &v_mat * eig.eigenvectors.column(c);
            let beta = b.branches()[b.branch_near(eig.eigenvalues[c])].eigenvalue;
            group.push(vectors.len());
            vectors.push(w);
            decoded.push((branch.eigenvalue, beta));
        }
        groups.push(group);
    }
    let basis_groups: Vec<BasisGroup> = groups
        .iter()
        .map(|idx| BasisGroup {
            vectors: idx.iter().map(|&i| vectors[i].clone()).collect(),
            labels: idx.iter().map(|&i| i as f64).collect(),
        })
        .collect();
    let family = OrthonormalBasisFamily::new(basis_groups, n, "common-refinement")?;
    let operator = family.refinement_operator();
    Ok(JointRefinement {
        family,
        operator,
        decoded,
    })
}

/// Full outcome distribution of the two-step simultaneous measurement:
/// measure the common refinement `d`, then decode `a = f₁(d)`, `b = f₂(d)`.
/// Returns one entry per distinct decoded pair with its total probability.
pub fn simultaneous_distribution(
    state: &QuantumState,
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
) -> Result<Vec<((f64, f64), f64)>> {
    let joint = common_refinement(a, b)?;
    check_dims(state, a)?;
    let mut table: Vec<((f64, f64), f64)> = Vec::new();
    for ((v, _), &pair) in joint.family.iter_vectors().zip(&joint.decoded) {
        let w = refinement_weight(state, v);
        match table
            .iter_mut()
            .find(|(p, _)| (p.0 - pair.0).abs() < 1e-9 && (p.1 - pair.1).abs() < 1e-9)
        {
            Some((_, total)) => *total += w,
            None => table.push((pair, w)),
        }
    }
    Ok(table)
}

/// Sample one run of the two-step simultaneous measurement. The record
/// describes the `d`-measurement itself: outcome = refinement label,
/// post-state = the selected refinement vector.
pub fn simultaneous_measure<R: Rng>(
    state: &QuantumState,
    a: &SpectralDecomposition,
    b: &SpectralDecomposition,
    rng: &mut R,
) -> Result<(f64, f64, MeasurementRecord)> {
    let joint = common_refinement(a, b)?;
    check_dims(state, a)?;
    let entries: Vec<(&CVector, f64, (f64, f64))> = joint
        .family
        .iter_vectors()
        .zip(&joint.decoded)
        .map(|((v, label), &pair)| (v, label, pair))
        .collect();
    let weights: Vec<f64> = entries
        .iter()
        .map(|(v, _, _)| refinement_weight(state, v))
        .collect();
    let total: f64 = weights.iter().sum();
    let mut draw = rng.gen::<f64>() * total;
    let mut chosen = entries.len() - 1;
    for (i, w) in weights.iter().enumerate() {
        if draw < *w {
            chosen = i;
            break;
        }
        draw -= w;
    }
    let (v, label, (alpha, beta)) = entries[chosen];
    let post = match state {
        QuantumState::Pure(_) => QuantumState::Pure(v.clone()),
        QuantumState::Density(_) => QuantumState::Density(v * v.adjoint()),
    };
    Ok((
        alpha,
        beta,
        MeasurementRecord {
            outcome: label,
            probability: weights[chosen],
            post_state: PostState::Determined(post),
            postulate: Postulate::VonNeumann,
        },
    ))
}

/// `P_ψ(b = βₘ | a = αₖ)`: Born probability of branch `m` of `b` on the
/// selective post-state of branch `k` of `a`.
pub fn conditional_probability(
    state: &QuantumState,
    a: &SpectralDecomposition,
    k: usize,
    b: &SpectralDecomposition,
    m: usize,
) -> Result<f64> {
    check_dims(state, a)?;
    check_dims(state, b)?;
    let record = luders_measure(state, a, k)?;
    Ok(record.post_state.state().weight(&b.branches()[m].projector))
}
