//! Event-based simulation of the EPR-Bohm experiment: timestamped detector
//! clicks from a local hidden-parameter model, time-window coincidence
//! matching, and window sweeps exhibiting unfair sampling.
//!
//! Everything on side A depends only on the shared hidden angle and side
//! A's own setting; the Bell bound can then only be exceeded through the
//! pair selection performed by the coincidence window.

use std::io;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{chsh_from_samples, correlation_estimate, ChshSetting};
use crate::error::{Error, Result};

/// One emitted photon pair: shared hidden polarization angle plus
/// per-photon emission jitter.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionEvent {
    pub pair_id: u64,
    /// Shared hidden parameter, uniform on [0, 2π).
    pub hidden_angle: f64,
    /// Pair emission time in seconds; strictly increasing across pairs.
    pub emission_time: f64,
    /// Per-photon emission jitter (seconds, ≥ 0).
    pub jitter_a: f64,
    pub jitter_b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DetectorSide {
    A,
    B,
}

impl DetectorSide {
    fn tag(self) -> u64 {
        match self {
            DetectorSide::A => 0xA11CE,
            DetectorSide::B => 0xB0B,
        }
    }
}

/// One detector click with its time tag.
#[derive(Debug, Clone, PartialEq)]
pub struct ClickRecord {
    pub side: DetectorSide,
    pub pair_id: u64,
    /// Analyzer setting in radians.
    pub setting_angle: f64,
    pub outcome: i8,
    /// Seconds.
    pub time_tag: f64,
}

/// Local detector response: outcome ±1 and time delay from the shared
/// hidden angle and this side's setting only.
pub trait DelayModel {
    fn validate(&self) -> Result<()> {
        Ok(())
    }
    fn respond(&self, hidden_angle: f64, setting_angle: f64, rng: &mut dyn RngCore) -> (i8, f64);
}

fn malus_outcome(hidden_angle: f64, setting_angle: f64, rng: &mut dyn RngCore) -> i8 {
    let p_plus = (hidden_angle - setting_angle).cos().powi(2);
    let u: f64 = Rng::gen(rng);
    if u < p_plus {
        1
    } else {
        -1
    }
}

/// Malus-law outcomes with no extra delay.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ZeroDelayModel;

impl DelayModel for ZeroDelayModel {
    fn respond(&self, hidden_angle: f64, setting_angle: f64, rng: &mut dyn RngCore) -> (i8, f64) {
        (malus_outcome(hidden_angle, setting_angle, rng), 0.0)
    }
}

/// The reference local model: Malus-law outcome and delay
/// `T₀ · u · |sin 2(λ − θ)|^d` with `u` uniform on [0, 1].
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ReferenceDelayModel {
    /// Delay scale `T₀` in seconds.
    pub t0: f64,
    /// Angular sharpening exponent `d`.
    pub exponent: f64,
}

impl Default for ReferenceDelayModel {
    fn default() -> Self {
        Self {
            t0: 1e-6,
            exponent: 4.0,
        }
    }
}

impl DelayModel for ReferenceDelayModel {
    fn validate(&self) -> Result<()> {
        if !(self.t0 >= 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidModelParams {
                reason: format!("t0 must be finite and non-negative, got {}", self.t0),
            });
        }
        if !(self.exponent >= 0.0 && self.exponent.is_finite()) {
            return Err(Error::InvalidModelParams {
                reason: format!("exponent must be finite and non-negative, got {}", self.exponent),
            });
        }
        Ok(())
    }

    fn respond(&self, hidden_angle: f64, setting_angle: f64, rng: &mut dyn RngCore) -> (i8, f64) {
        let outcome = malus_outcome(hidden_angle, setting_angle, rng);
        let u: f64 = Rng::gen(rng);
        let s = (2.0 * (hidden_angle - setting_angle)).sin().abs();
        (outcome, self.t0 * u * s.powf(self.exponent))
    }
}

/// Source parameters: fixed inter-pair spacing and the scale of the
/// per-photon exponential emission jitter.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SourceParams {
    /// Seconds between successive pair emissions.
    pub mean_spacing: f64,
    /// Mean of the exponential per-photon jitter, seconds. Zero disables.
    pub jitter_scale: f64,
}

impl Default for SourceParams {
    fn default() -> Self {
        // spacing 10·T₀ keeps adjacent pairs from cross-matching
        Self {
            mean_spacing: 1e-5,
            jitter_scale: 1e-9,
        }
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Sub-seed for one detector stream. The derivation uses only the master
/// seed, the side, and that side's own setting, so a stream never depends
/// on the remote setting.
pub fn derive_stream_seed(master_seed: u64, side: DetectorSide, setting_angle: f64) -> u64 {
    splitmix64(master_seed ^ splitmix64(side.tag()) ^ setting_angle.to_bits())
}

/// Generate `n_pairs` emission events. Deterministic for a fixed seed.
pub fn simulate_source(n_pairs: usize, seed: u64, params: &SourceParams) -> Vec<EmissionEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed));
    let mut events = Vec::with_capacity(n_pairs);
    let jitter = |rng: &mut ChaCha8Rng| {
        if params.jitter_scale == 0.0 {
            0.0
        } else {
            let u: f64 = rng.gen();
            -params.jitter_scale * (1.0 - u).ln()
        }
    };
    for k in 0..n_pairs {
        let hidden_angle = rng.gen::<f64>() * std::f64::consts::TAU;
        let jitter_a = jitter(&mut rng);
        let jitter_b = jitter(&mut rng);
        events.push(EmissionEvent {
            pair_id: k as u64,
            hidden_angle,
            emission_time: (k + 1) as f64 * params.mean_spacing,
            jitter_a,
            jitter_b,
        });
    }
    events
}

/// Run one detector over the emission stream. The click stream depends
/// only on this side's setting (and the per-side sub-seed), never on the
/// remote one.
pub fn detect(
    events: &[EmissionEvent],
    side: DetectorSide,
    setting_angle: f64,
    model: &dyn DelayModel,
    master_seed: u64,
) -> Result<Vec<ClickRecord>> {
    model.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_stream_seed(master_seed, side, setting_angle));
    let mut clicks = Vec::with_capacity(events.len());
    for ev in events {
        let (outcome, delay) = model.respond(ev.hidden_angle, setting_angle, &mut rng);
        let jitter = match side {
            DetectorSide::A => ev.jitter_a,
            DetectorSide::B => ev.jitter_b,
        };
        clicks.push(ClickRecord {
            side,
            pair_id: ev.pair_id,
            setting_angle,
            outcome,
            time_tag: ev.emission_time + jitter + delay,
        });
    }
    Ok(clicks)
}

/// Coincidence window: a closed bound on |tᵃ − tᵇ|, or the exact
/// match-everything-in-order baseline used for fair sampling.
///
/// Serialized as a number of seconds; the sentinel round-trips as the
/// string `"inf"` (an `inf` float is also accepted on input).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Finite(f64),
    /// ∞ sentinel: pair clicks in time order, index by index.
    MatchAllInOrder,
}

impl Serialize for Window {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Window::Finite(w) => s.serialize_f64(*w),
            Window::MatchAllInOrder => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Window {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Seconds(f64),
            Sentinel(String),
        }
        match Raw::deserialize(d)? {
            Raw::Seconds(w) if w.is_infinite() && w > 0.0 => Ok(Window::MatchAllInOrder),
            Raw::Seconds(w) if w.is_finite() && w >= 0.0 => Ok(Window::Finite(w)),
            Raw::Seconds(w) => Err(serde::de::Error::custom(format!(
                "window must be a non-negative number of seconds or \"inf\", got {w}"
            ))),
            Raw::Sentinel(s) if s == "inf" => Ok(Window::MatchAllInOrder),
            Raw::Sentinel(s) => Err(serde::de::Error::custom(format!(
                "window must be a non-negative number of seconds or \"inf\", got \"{s}\""
            ))),
        }
    }
}

impl Window {
    pub fn as_seconds(&self) -> f64 {
        match self {
            Window::Finite(w) => *w,
            Window::MatchAllInOrder => f64::INFINITY,
        }
    }
}

/// Window-matched click pairs plus the discarded remainder. Indices refer
/// to the input slices.
#[derive(Debug, Clone)]
pub struct CoincidencePairing {
    pub matched: Vec<(usize, usize)>,
    pub discarded_a: Vec<usize>,
    pub discarded_b: Vec<usize>,
    pub window: Window,
}

impl CoincidencePairing {
    pub fn matched_pair_ids(&self, clicks_a: &[ClickRecord]) -> Vec<u64> {
        self.matched.iter().map(|&(i, _)| clicks_a[i].pair_id).collect()
    }

    pub fn outcome_pairs(
        &self,
        clicks_a: &[ClickRecord],
        clicks_b: &[ClickRecord],
    ) -> Vec<(i8, i8)> {
        self.matched
            .iter()
            .map(|&(i, j)| (clicks_a[i].outcome, clicks_b[j].outcome))
            .collect()
    }
}

/// Couple clicks whose time tags differ by at most the window (closed
/// inequality). Deterministic greedy two-pointer matching over time-sorted
/// clicks: each a-click is paired with the closest-in-time admissible
/// unconsumed b-click; ties go to the earlier b-click; every click is used
/// at most once, and unmatched clicks are discarded.
pub fn match_window(
    clicks_a: &[ClickRecord],
    clicks_b: &[ClickRecord],
    window: Window,
) -> CoincidencePairing {
    if let Window::Finite(w) = window {
        assert!(w >= 0.0, "window must be non-negative");
    }
    let mut order_a: Vec<usize> = (0..clicks_a.len()).collect();
    let mut order_b: Vec<usize> = (0..clicks_b.len()).collect();
    order_a.sort_by(|&i, &j| clicks_a[i].time_tag.total_cmp(&clicks_a[j].time_tag));
    order_b.sort_by(|&i, &j| clicks_b[i].time_tag.total_cmp(&clicks_b[j].time_tag));

    let mut matched = Vec::new();
    let mut discarded_a = Vec::new();
    let mut discarded_b = Vec::new();

    match window {
        Window::MatchAllInOrder => {
            let n = order_a.len().min(order_b.len());
            for k in 0..n {
                matched.push((order_a[k], order_b[k]));
            }
            discarded_a.extend(order_a.iter().skip(n));
            discarded_b.extend(order_b.iter().skip(n));
        }
        Window::Finite(w) => {
            let ta = |k: usize| clicks_a[order_a[k]].time_tag;
            let tb = |k: usize| clicks_b[order_b[k]].time_tag;
            let mut i = 0;
            let mut j = 0;
            while i < order_a.len() && j < order_b.len() {
                // advance j to the b-click nearest the current a-click
                // (strict inequality keeps the earlier b-click on ties)
                while j + 1 < order_b.len() && (tb(j + 1) - ta(i)).abs() < (tb(j) - ta(i)).abs() {
                    discarded_b.push(order_b[j]);
                    j += 1;
                }
                let dt = ta(i) - tb(j);
                if dt.abs() <= w {
                    matched.push((order_a[i], order_b[j]));
                    i += 1;
                    j += 1;
                } else if dt < 0.0 {
                    discarded_a.push(order_a[i]);
                    i += 1;
                } else {
                    discarded_b.push(order_b[j]);
                    j += 1;
                }
            }
            discarded_a.extend(order_a.iter().skip(i));
            discarded_b.extend(order_b.iter().skip(j));
        }
    }

    CoincidencePairing {
        matched,
        discarded_a,
        discarded_b,
        window,
    }
}

/// Window-sweep configuration: CHSH settings, source and model parameters,
/// and the windows to scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n_pairs: usize,
    pub master_seed: u64,
    pub settings: ChshSetting,
    pub source: SourceParams,
    pub model: ReferenceDelayModel,
    pub windows: Vec<Window>,
}

impl Default for SweepConfig {
    /// The shipped default: verified by Monte Carlo to push |S| above the
    /// Bell bound at the small window while staying below it at the
    /// match-all baseline.
    fn default() -> Self {
        use std::f64::consts::FRAC_PI_8;
        Self {
            n_pairs: 1_000_000,
            master_seed: 42,
            // correlations depend on 2(a−b), so the extremal settings sit
            // at half the textbook angles
            settings: ChshSetting {
                a: 0.0,
                a_prime: 2.0 * FRAC_PI_8,
                b: FRAC_PI_8,
                b_prime: 3.0 * FRAC_PI_8,
            },
            source: SourceParams::default(),
            model: ReferenceDelayModel::default(),
            windows: vec![Window::MatchAllInOrder, Window::Finite(2e-9)],
        }
    }
}

/// One window's worth of sweep results.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub window: Window,
    /// Correlations in S-term order: E(a,b), E(a,b′), E(a′,b), E(a′,b′).
    pub correlations: [f64; 4],
    pub s: f64,
    pub stderr_s: f64,
    /// Matched pairs / emitted pairs, averaged over the four settings.
    pub matched_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
}

/// The four detector streams a sweep needs: one per distinct (side, angle).
pub struct SweepStreams {
    pub a: Vec<ClickRecord>,
    pub a_prime: Vec<ClickRecord>,
    pub b: Vec<ClickRecord>,
    pub b_prime: Vec<ClickRecord>,
}

impl SweepStreams {
    /// (Alice stream, Bob stream) for S-term `k`.
    pub fn pair(&self, k: usize) -> (&[ClickRecord], &[ClickRecord]) {
        match k {
            0 => (&self.a, &self.b),
            1 => (&self.a, &self.b_prime),
            2 => (&self.a_prime, &self.b),
            3 => (&self.a_prime, &self.b_prime),
            _ => panic!("S has four terms"),
        }
    }
}

pub fn generate_streams(config: &SweepConfig) -> Result<SweepStreams> {
    let events = simulate_source(config.n_pairs, config.master_seed, &config.source);
    let s = &config.settings;
    Ok(SweepStreams {
        a: detect(&events, DetectorSide::A, s.a, &config.model, config.master_seed)?,
        a_prime: detect(&events, DetectorSide::A, s.a_prime, &config.model, config.master_seed)?,
        b: detect(&events, DetectorSide::B, s.b, &config.model, config.master_seed)?,
        b_prime: detect(&events, DetectorSide::B, s.b_prime, &config.model, config.master_seed)?,
    })
}

/// Simulate once, then match and estimate S for every window in the
/// config. The same emission and click streams are reused across windows
/// and settings, so selection effects are purely due to the window.
pub fn run_window_sweep(config: &SweepConfig) -> Result<SweepReport> {
    let streams = generate_streams(config)?;
    let mut rows = Vec::with_capacity(config.windows.len());
    for &window in &config.windows {
        let mut outcome_lists: [Vec<(i8, i8)>; 4] = Default::default();
        let mut matched_total = 0usize;
        for k in 0..4 {
            let (alice, bob) = streams.pair(k);
            let pairing = match_window(alice, bob, window);
            matched_total += pairing.matched.len();
            outcome_lists[k] = pairing.outcome_pairs(alice, bob);
        }
        let (s, stderr_s) = chsh_from_samples(&outcome_lists)?;
        let correlations = std::array::from_fn(|k| {
            correlation_estimate(&outcome_lists[k])
                .map(|e| e.value)
                .unwrap_or(f64::NAN)
        });
        rows.push(SweepRow {
            window,
            correlations,
            s,
            stderr_s,
            matched_fraction: matched_total as f64 / (4.0 * config.n_pairs as f64),
        });
    }
    Ok(SweepReport { rows })
}

// CSV schema for click streams: side, pair_id, setting_deg, outcome,
// time_tag_s. Externally recorded data in the same shape can be re-matched
// with `match_window`.

#[derive(Serialize, Deserialize)]
struct ClickCsvRow {
    side: DetectorSide,
    pair_id: u64,
    setting_deg: f64,
    outcome: i8,
    time_tag_s: f64,
}

pub fn write_clicks_csv<W: io::Write>(writer: W, clicks: &[ClickRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for c in clicks {
        w.serialize(ClickCsvRow {
            side: c.side,
            pair_id: c.pair_id,
            setting_deg: c.setting_angle.to_degrees(),
            outcome: c.outcome,
            time_tag_s: c.time_tag,
        })
        .map_err(|e| Error::InvalidModelParams {
            reason: format!("csv write failed: {e}"),
        })?;
    }
    w.flush().map_err(|e| Error::InvalidModelParams {
        reason: format!("csv flush failed: {e}"),
    })?;
    Ok(())
}

pub fn read_clicks_csv<R: io::Read>(reader: R) -> Result<Vec<ClickRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in r.deserialize::<ClickCsvRow>() {
        let row = row.map_err(|e| Error::InvalidModelParams {
            reason: format!("csv read failed: {e}"),
        })?;
        out.push(ClickRecord {
            side: row.side,
            pair_id: row.pair_id,
            setting_angle: row.setting_deg.to_radians(),
            outcome: row.outcome,
            time_tag: row.time_tag_s,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn click(t: f64) -> ClickRecord {
        ClickRecord {
            side: DetectorSide::A,
            pair_id: 0,
            setting_angle: 0.0,
            outcome: 1,
            time_tag: t,
        }
    }

    fn small_config(n_pairs: usize) -> SweepConfig {
        SweepConfig {
            n_pairs,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn source_is_deterministic() {
        let p = SourceParams::default();
        let a = simulate_source(500, 7, &p);
        let b = simulate_source(500, 7, &p);
        assert_eq!(a, b);
        let c = simulate_source(500, 8, &p);
        assert_ne!(a, c);
    }

    #[test]
    fn zero_jitter_shares_emission_time() {
        let p = SourceParams {
            jitter_scale: 0.0,
            ..SourceParams::default()
        };
        for ev in simulate_source(100, 1, &p) {
            assert_eq!(ev.jitter_a, 0.0);
            assert_eq!(ev.jitter_b, 0.0);
        }
    }

    #[test]
    fn emission_times_strictly_increase() {
        let events = simulate_source(1000, 3, &SourceParams::default());
        for w in events.windows(2) {
            assert!(w[0].emission_time < w[1].emission_time);
            assert!(w[0].pair_id < w[1].pair_id);
        }
    }

    #[test]
    fn hidden_angle_uniform_ks() {
        let events = simulate_source(1_000_000, 12, &SourceParams::default());
        let mut xs: Vec<f64> = events
            .iter()
            .map(|e| e.hidden_angle / std::f64::consts::TAU)
            .collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        let mut ks: f64 = 0.0;
        for (i, x) in xs.iter().enumerate() {
            let lo = (x - i as f64 / n).abs();
            let hi = ((i + 1) as f64 / n - x).abs();
            ks = ks.max(lo).max(hi);
        }
        assert!(ks < 0.002, "KS statistic {ks}");
    }

    #[test]
    fn zero_delay_model_time_tags() {
        let p = SourceParams::default();
        let events = simulate_source(100, 5, &p);
        let clicks = detect(&events, DetectorSide::A, 0.3, &ZeroDelayModel, 5).unwrap();
        for (ev, c) in events.iter().zip(&clicks) {
            assert_eq!(c.time_tag, ev.emission_time + ev.jitter_a);
        }
    }

    #[test]
    fn reference_model_aligned_angle_has_zero_delay() {
        let model = ReferenceDelayModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..100 {
            let theta = rng.gen::<f64>() * std::f64::consts::TAU;
            let (_, delay) = model.respond(theta, theta, &mut rng);
            assert!(delay.abs() < 1e-18, "delay {delay}");
        }
    }

    #[test]
    fn reference_model_marginal_is_unbiased() {
        let events = simulate_source(100_000, 17, &SourceParams::default());
        let clicks = detect(
            &events,
            DetectorSide::A,
            0.7,
            &ReferenceDelayModel::default(),
            17,
        )
        .unwrap();
        let n = clicks.len() as f64;
        let mean = clicks.iter().map(|c| c.outcome as f64).sum::<f64>() / n;
        // Var(outcome) ≤ 1, so 3σ of the mean is 3/√n
        assert!(mean.abs() < 3.0 / n.sqrt() + 0.003, "marginal mean {mean}");
    }

    #[test]
    fn invalid_model_params_rejected() {
        let model = ReferenceDelayModel {
            t0: -1.0,
            exponent: 4.0,
        };
        let events = simulate_source(1, 0, &SourceParams::default());
        assert!(matches!(
            detect(&events, DetectorSide::A, 0.0, &model, 0),
            Err(Error::InvalidModelParams { .. })
        ));
    }

    #[test]
    fn locality_side_a_independent_of_b() {
        let config = small_config(2000);
        let events = simulate_source(config.n_pairs, config.master_seed, &config.source);
        let a1 = detect(&events, DetectorSide::A, 0.0, &config.model, config.master_seed).unwrap();
        // simulate B with two different settings in between; A must not move
        let _b1 = detect(&events, DetectorSide::B, 0.3, &config.model, config.master_seed).unwrap();
        let _b2 = detect(&events, DetectorSide::B, 1.2, &config.model, config.master_seed).unwrap();
        let a2 = detect(&events, DetectorSide::A, 0.0, &config.model, config.master_seed).unwrap();
        assert_eq!(a1, a2);
    }

    #[test]
    fn match_all_in_order_pairs_everything() {
        let a: Vec<ClickRecord> = [1.0, 2.0, 3.0].map(click).to_vec();
        let b: Vec<ClickRecord> = [1.4, 2.6, 3.1].map(click).to_vec();
        let pairing = match_window(&a, &b, Window::MatchAllInOrder);
        assert_eq!(pairing.matched, vec![(0, 0), (1, 1), (2, 2)]);
        assert!(pairing.discarded_a.is_empty());
        assert!(pairing.discarded_b.is_empty());
    }

    #[test]
    fn exact_boundary_is_matched() {
        let a = vec![click(0.0)];
        let b = vec![click(3.0)];
        let pairing = match_window(&a, &b, Window::Finite(3.0));
        assert_eq!(pairing.matched, vec![(0, 0)]);
    }

    #[test]
    fn out_of_window_clicks_discarded() {
        let a: Vec<ClickRecord> = [0.0, 10.0].map(click).to_vec();
        let b = vec![click(4.0)];
        let pairing = match_window(&a, &b, Window::Finite(3.0));
        assert!(pairing.matched.is_empty());
        assert_eq!(pairing.discarded_a.len(), 2);
        assert_eq!(pairing.discarded_b.len(), 1);
    }

    #[test]
    fn nearest_click_wins() {
        // b has a nearer candidate later in the stream
        let a = vec![click(5.0)];
        let b: Vec<ClickRecord> = [1.0, 4.9].map(click).to_vec();
        let pairing = match_window(&a, &b, Window::Finite(1.0));
        assert_eq!(pairing.matched, vec![(0, 1)]);
        assert_eq!(pairing.discarded_b, vec![0]);
    }

    #[test]
    fn tie_breaks_toward_earlier_b_click() {
        let a = vec![click(5.0)];
        let b: Vec<ClickRecord> = [4.0, 6.0].map(click).to_vec();
        let pairing = match_window(&a, &b, Window::Finite(2.0));
        assert_eq!(pairing.matched, vec![(0, 0)]);
    }

    #[test]
    fn pairing_partitions_clicks() {
        let config = small_config(3000);
        let streams = generate_streams(&config).unwrap();
        for &window in &[Window::Finite(2e-9), Window::Finite(1e-7), Window::MatchAllInOrder] {
            let pairing = match_window(&streams.a, &streams.b, window);
            let mut seen = vec![0u8; streams.a.len()];
            for &(i, _) in &pairing.matched {
                seen[i] += 1;
            }
            for &i in &pairing.discarded_a {
                seen[i] += 1;
            }
            assert!(seen.iter().all(|&c| c == 1), "a-clicks not partitioned");
            // window soundness: every matched pair obeys the closed bound
            if let Window::Finite(w) = window {
                for &(i, j) in &pairing.matched {
                    assert!((streams.a[i].time_tag - streams.b[j].time_tag).abs() <= w);
                }
            }
        }
    }

    #[test]
    fn retention_monotone_in_window() {
        let config = small_config(5000);
        let streams = generate_streams(&config).unwrap();
        let mut last = 0usize;
        for w in [1e-10, 1e-9, 5e-9, 2e-8, 1e-7, 1e-6] {
            let pairing = match_window(&streams.a, &streams.b, Window::Finite(w));
            assert!(
                pairing.matched.len() >= last,
                "retention dropped at window {w}"
            );
            last = pairing.matched.len();
        }
    }

    #[test]
    fn matched_sets_depend_on_remote_setting() {
        let config = small_config(20_000);
        let streams = generate_streams(&config).unwrap();
        let window = Window::Finite(2e-9);
        let ids_b: std::collections::BTreeSet<u64> = match_window(&streams.a, &streams.b, window)
            .matched_pair_ids(&streams.a)
            .into_iter()
            .collect();
        let ids_bp: std::collections::BTreeSet<u64> =
            match_window(&streams.a, &streams.b_prime, window)
                .matched_pair_ids(&streams.a)
                .into_iter()
                .collect();
        assert!(!ids_b.is_empty() && !ids_bp.is_empty());
        let intersection = ids_b.intersection(&ids_bp).count();
        let union = ids_b.union(&ids_bp).count();
        assert!(
            intersection < union,
            "Jaccard similarity is 1: no setting-dependent selection"
        );
    }

    #[test]
    fn sweep_runs_and_reports() {
        let config = small_config(5000);
        let report = run_window_sweep(&config).unwrap();
        assert_eq!(report.rows.len(), config.windows.len());
        for row in &report.rows {
            assert!(row.s.is_finite());
            assert!(row.matched_fraction > 0.0 && row.matched_fraction <= 1.0);
        }
    }

    #[test]
    fn window_serde_round_trip() {
        let finite: Window = serde_json::from_str("2e-9").unwrap();
        assert_eq!(finite, Window::Finite(2e-9));
        let all: Window = serde_json::from_str("\"inf\"").unwrap();
        assert_eq!(all, Window::MatchAllInOrder);
        assert_eq!(serde_json::to_string(&all).unwrap(), "\"inf\"");
        assert!(serde_json::from_str::<Window>("-1.0").is_err());
        let back: Window =
            serde_json::from_str(&serde_json::to_string(&finite).unwrap()).unwrap();
        assert_eq!(back, finite);
    }

    #[test]
    fn clicks_csv_round_trip() {
        let config = small_config(200);
        let streams = generate_streams(&config).unwrap();
        let mut buf = Vec::new();
        write_clicks_csv(&mut buf, &streams.a).unwrap();
        let back = read_clicks_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), streams.a.len());
        for (orig, rt) in streams.a.iter().zip(&back) {
            assert_eq!(orig.side, rt.side);
            assert_eq!(orig.pair_id, rt.pair_id);
            assert_eq!(orig.outcome, rt.outcome);
            assert!((orig.setting_angle - rt.setting_angle).abs() < 1e-12);
            assert_eq!(orig.time_tag, rt.time_tag);
        }
    }
}
