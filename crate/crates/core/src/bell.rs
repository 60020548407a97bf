//! Analytic quantum correlations and CHSH values, plus estimators for
//! sampled event data.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{simultaneous_distribution, QuantumState};
use crate::spectral::{tensor_product, CVector, HermitianOperator};

/// Analyzer angles (radians) for the four CHSH correlation terms. Each
/// angle defines the spin observable `cosθ·σ_z + sinθ·σ_x` on its side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChshSetting {
    pub a: f64,
    pub a_prime: f64,
    pub b: f64,
    pub b_prime: f64,
}

impl ChshSetting {
    /// The configuration that maximizes |S| on the singlet at 2√2.
    pub fn tsirelson() -> Self {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        Self {
            a: 0.0,
            a_prime: FRAC_PI_2,
            b: FRAC_PI_4,
            b_prime: 3.0 * FRAC_PI_4,
        }
    }

    /// The four (Alice, Bob) angle pairs in S-term order:
    /// `(a,b), (a,b′), (a′,b), (a′,b′)`.
    pub fn pairs(&self) -> [(f64, f64); 4] {
        [
            (self.a, self.b),
            (self.a, self.b_prime),
            (self.a_prime, self.b),
            (self.a_prime, self.b_prime),
        ]
    }
}

/// `cosθ·σ_z + sinθ·σ_x`: a spin observable in the real z-x plane with
/// spectrum {−1, +1}.
pub fn observable_from_angle(theta: f64) -> HermitianOperator {
    let m = HermitianOperator::pauli_z().matrix().map(|v| v * theta.cos())
        + HermitianOperator::pauli_x().matrix().map(|v| v * theta.sin());
    HermitianOperator::new(m).expect("real combination of Pauli matrices")
}

/// The two-qubit singlet state `(e₀⊗e₁ − e₁⊗e₀)/√2`.
pub fn singlet() -> QuantumState {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let v = CVector::from_iterator(
        4,
        [0.0, h, -h, 0.0].iter().map(|&x| Complex64::new(x, 0.0)),
    );
    QuantumState::pure(v).expect("normalized")
}

/// Expectation of `obsA ⊗ obsB` in the composite state.
pub fn quantum_correlation(
    state: &QuantumState,
    obs_a: &HermitianOperator,
    obs_b: &HermitianOperator,
) -> Result<f64> {
    let joint = tensor_product(obs_a, obs_b);
    if joint.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: state.dim(),
            got: joint.dim(),
        });
    }
    state.expectation(&joint)
}

fn angle_correlation(state: &QuantumState, theta_a: f64, theta_b: f64) -> Result<f64> {
    quantum_correlation(
        state,
        &observable_from_angle(theta_a),
        &observable_from_angle(theta_b),
    )
}

/// `S = E(a,b) − E(a,b′) + E(a′,b) + E(a′,b′)` from analytic correlations.
pub fn chsh_value(state: &QuantumState, setting: &ChshSetting) -> Result<f64> {
    let [e_ab, e_abp, e_apb, e_apbp] = chsh_terms(state, setting)?;
    Ok(e_ab - e_abp + e_apb + e_apbp)
}

/// The four correlation terms in S order.
pub fn chsh_terms(state: &QuantumState, setting: &ChshSetting) -> Result<[f64; 4]> {
    let pairs = setting.pairs();
    Ok([
        angle_correlation(state, pairs[0].0, pairs[0].1)?,
        angle_correlation(state, pairs[1].0, pairs[1].1)?,
        angle_correlation(state, pairs[2].0, pairs[2].1)?,
        angle_correlation(state, pairs[3].0, pairs[3].1)?,
    ])
}

/// Sample mean and standard error of a correlation from ±1 outcome pairs.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrelationEstimate {
    pub value: f64,
    pub n_pairs: usize,
    /// Standard error of the mean; NaN for a single-pair sample.
    pub std_error: f64,
}

pub fn correlation_estimate(samples: &[(i8, i8)]) -> Option<CorrelationEstimate> {
    if samples.is_empty() {
        return None;
    }
    let n = samples.len();
    let products: Vec<f64> = samples.iter().map(|&(x, y)| (x as f64) * (y as f64)).collect();
    let mean = products.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        f64::NAN
    } else {
        let var = products.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        (var / n as f64).sqrt()
    };
    Some(CorrelationEstimate {
        value: mean,
        n_pairs: n,
        std_error,
    })
}

/// S and its propagated standard error from four per-setting outcome-pair
/// lists, ordered `(a,b), (a,b′), (a′,b), (a′,b′)`.
pub fn chsh_from_samples(pairs: &[Vec<(i8, i8)>; 4]) -> Result<(f64, f64)> {
    let mut estimates = Vec::with_capacity(4);
    for (i, list) in pairs.iter().enumerate() {
        let est = correlation_estimate(list).ok_or(Error::EmptySample { setting: i })?;
        estimates.push(est);
    }
    let s = estimates[0].value - estimates[1].value + estimates[2].value + estimates[3].value;
    let std_error = estimates
        .iter()
        .map(|e| e.std_error * e.std_error)
        .sum::<f64>()
        .sqrt();
    Ok((s, std_error))
}

/// Draw `n` outcome pairs for one setting by sampling the enumeration
/// weights of the two-step simultaneous measurement of the lifted
/// observables.
pub fn sample_outcome_pairs<R: Rng>(
    state: &QuantumState,
    theta_a: f64,
    theta_b: f64,
    n: usize,
    rng: &mut R,
) -> Result<Vec<(i8, i8)>> {
    let lifted_a = tensor_product(&observable_from_angle(theta_a), &HermitianOperator::identity(2))
        .decompose()?;
    let lifted_b = tensor_product(&HermitianOperator::identity(2), &observable_from_angle(theta_b))
        .decompose()?;
    let dist = simultaneous_distribution(state, &lifted_a, &lifted_b)?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut draw = rng.gen::<f64>();
        let mut chosen = dist.len() - 1;
        for (i, (_, p)) in dist.iter().enumerate() {
            if draw < *p {
                chosen = i;
                break;
            }
            draw -= p;
        }
        let ((alpha, beta), _) = dist[chosen];
        out.push((alpha.signum() as i8, beta.signum() as i8));
    }
    Ok(out)
}
