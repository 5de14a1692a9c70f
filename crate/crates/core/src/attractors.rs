//! Limit regimes: spike trains, symbolic regime labels, periodic orbits with
//! their multipliers, the largest Lyapunov exponent and the warm-started
//! period-doubling scan on the section `y2 = 0`.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::integrator::{
    integrate_with_tangent, section_crossings, stepper, Coord, Crossing, Direction,
    IntegratorSettings, SectionSpec, TangentSettings, Trajectory,
};
use crate::model::{swap, Matrix4, Parameters, State};

pub const SPIKE_THRESHOLD: f64 = 1.0;
/// Minimum separation of two spikes of one element.
pub const REFRACTORY: f64 = 0.2;
/// In-phase pairing window as a fraction of the mean inter-spike interval.
pub const SYNC_FRACTION: f64 = 0.05;
/// Allowed relative deviation of the anti-phase offset from half a period.
pub const ANTI_PHASE_TOLERANCE: f64 = 0.1;
pub const CHAOS_THRESHOLD: f64 = 0.005;
pub const MAX_WORD_LEN: usize = 64;
/// Spikes per element needed before a spiking regime is labelled.
pub const MIN_SPIKES: usize = 10;
pub const LYAPUNOV_MIN_TIME: f64 = 2000.0;
/// Section returns closer than this count as the same point of a cycle.
pub const CYCLE_TOL: f64 = 1e-8;
pub const MAX_CYCLE_PERIOD: usize = 64;
pub const SELF_SYMMETRY_TOL: f64 = 1e-6;
/// Looser return tolerance used to decide whether a finite record is periodic.
pub const RETURN_TOL: f64 = 1e-4;
/// Gap that separates clusters of section values.
pub const CLUSTER_TOL: f64 = 1e-5;
/// Cluster counts above this are read as a chaotic band.
pub const BAND_CLUSTERS: usize = 16;

// renormalization step of the determinant run
const QR_INTERVAL: f64 = 0.05;

// fixed, generic start vector for the Benettin run
const LYAPUNOV_VECTOR: [f64; 4] = [0.6, 0.2, -0.5, 0.3];

/// Spike times of both elements, ascending.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SpikeTrain {
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

impl SpikeTrain {
    /// Train of element 1 or 2.
    pub fn element(&self, i: u8) -> &[f64] {
        if i == 1 {
            &self.first
        } else {
            &self.second
        }
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty() && self.second.is_empty()
    }

    /// Both trains merged in time order as `(t, owner)`.
    pub fn merged(&self) -> Vec<(f64, u8)> {
        let mut v: Vec<(f64, u8)> = self
            .first
            .iter()
            .map(|&t| (t, 1))
            .chain(self.second.iter().map(|&t| (t, 2)))
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        v
    }

    /// Mean inter-spike interval over both elements.
    pub fn mean_interval(&self) -> Option<f64> {
        let isi = |v: &[f64]| (v.len() >= 2).then(|| (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64);
        match (isi(&self.first), isi(&self.second)) {
            (Some(a), Some(b)) => Some(0.5 * (a + b)),
            (a, b) => a.or(b),
        }
    }
}

fn element_spikes(traj: &Trajectory, coord: Coord) -> Vec<f64> {
    let sec = SectionSpec {
        coord,
        level: SPIKE_THRESHOLD,
        direction: Direction::Rising,
    };
    let mut out: Vec<f64> = Vec::new();
    for c in traj.crossings(&sec) {
        if out.last().is_none_or(|&last| c.t - last > REFRACTORY) {
            out.push(c.t);
        }
    }
    out
}

/// Upward threshold crossings of `x1` and `x2` with the refractory window applied.
pub fn detect_spikes(traj: &Trajectory) -> SpikeTrain {
    SpikeTrain {
        first: element_spikes(traj, Coord::X1),
        second: element_spikes(traj, Coord::X2),
    }
}

/// Periodic activation word over `{1, 2}`.
///
/// The period is kept as a sequence of bursts (spikes separated by short
/// gaps); the canonical form is the burst-aligned rotation whose symbol
/// string is lexicographically smallest. Equality and hashing use the
/// symbol string only.
#[derive(Debug, Clone)]
pub struct Word {
    bursts: Vec<Vec<u8>>,
    symbols: String,
}

impl Word {
    /// Canonical word from one or more periods of bursts.
    ///
    /// `None` unless both symbols occur and the primitive period has at
    /// most [`MAX_WORD_LEN`] symbols.
    pub fn from_bursts(bursts: &[Vec<u8>]) -> Option<Self> {
        if bursts.is_empty() || bursts.iter().any(|b| b.is_empty() || b.iter().any(|&s| s != 1 && s != 2)) {
            return None;
        }
        let n = bursts.len();
        let m = (1..=n)
            .find(|&m| n % m == 0 && (0..n).all(|i| bursts[i] == bursts[i % m]))
            .unwrap_or(n);
        let period = &bursts[..m];
        let flat = |r: usize| -> Vec<u8> { (0..m).flat_map(|i| period[(r + i) % m].iter().copied()).collect() };
        let best = (0..m)
            .min_by(|&a, &b| flat(a).cmp(&flat(b)).then_with(|| rotation(period, a).cmp(&rotation(period, b))))
            .expect("nonempty period");
        let bursts = rotation(period, best);
        let symbols: String = bursts.iter().flatten().map(|&s| char::from(b'0' + s)).collect();
        if symbols.len() > MAX_WORD_LEN || !symbols.contains('1') || !symbols.contains('2') {
            return None;
        }
        Some(Self { bursts, symbols })
    }

    /// Word of a fixed activation order with every spike its own burst.
    pub fn from_symbols(s: &str) -> Option<Self> {
        let bursts: Option<Vec<Vec<u8>>> = s
            .chars()
            .map(|c| match c {
                '1' => Some(vec![1]),
                '2' => Some(vec![2]),
                _ => None,
            })
            .collect();
        Self::from_bursts(&bursts?)
    }

    pub fn as_str(&self) -> &str {
        &self.symbols
    }

    pub fn bursts(&self) -> &[Vec<u8>] {
        &self.bursts
    }

    /// The word of the swap-conjugate regime (symbols 1 and 2 exchanged).
    pub fn swapped(&self) -> Self {
        let b: Vec<Vec<u8>> = self
            .bursts
            .iter()
            .map(|b| b.iter().map(|&s| 3 - s).collect())
            .collect();
        Self::from_bursts(&b).expect("swap keeps a valid word valid")
    }
}

fn rotation(period: &[Vec<u8>], r: usize) -> Vec<Vec<u8>> {
    (0..period.len()).map(|i| period[(r + i) % period.len()].clone()).collect()
}

impl PartialEq for Word {
    fn eq(&self, other: &Self) -> bool {
        self.symbols == other.symbols
    }
}

impl Eq for Word {}

impl Hash for Word {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.symbols.hash(state);
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.symbols.cmp(&other.symbols)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.symbols)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegimeLabel {
    Quiescent,
    InPhase,
    AntiPhase,
    Sequential(Word),
    Chaotic,
    Unclassified,
}

impl RegimeLabel {
    /// Label of the swap-conjugate attractor.
    pub fn swapped(&self) -> Self {
        match self {
            RegimeLabel::Sequential(w) => RegimeLabel::Sequential(w.swapped()),
            other => other.clone(),
        }
    }

    pub fn word(&self) -> Option<&Word> {
        match self {
            RegimeLabel::Sequential(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_spiking(&self) -> bool {
        !matches!(self, RegimeLabel::Quiescent | RegimeLabel::Unclassified)
    }
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeLabel::Quiescent => f.write_str("quiescent"),
            RegimeLabel::InPhase => f.write_str("in-phase"),
            RegimeLabel::AntiPhase => f.write_str("anti-phase"),
            RegimeLabel::Sequential(w) => write!(f, "seq:{w}"),
            RegimeLabel::Chaotic => f.write_str("chaotic"),
            RegimeLabel::Unclassified => f.write_str("unclassified"),
        }
    }
}

impl Serialize for RegimeLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl std::str::FromStr for RegimeLabel {
    type Err = Error;

    /// Parses the display form; sequential words are read with one spike per burst.
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "quiescent" => RegimeLabel::Quiescent,
            "in-phase" => RegimeLabel::InPhase,
            "anti-phase" => RegimeLabel::AntiPhase,
            "chaotic" => RegimeLabel::Chaotic,
            "unclassified" => RegimeLabel::Unclassified,
            other => {
                let word = other
                    .strip_prefix("seq:")
                    .and_then(Word::from_symbols)
                    .ok_or_else(|| Error::InvalidParameter(format!("unknown regime label {other:?}")))?;
                RegimeLabel::Sequential(word)
            }
        })
    }
}

// Long gaps split the spike stream into bursts when the gap distribution is
// clearly bimodal; otherwise every spike stands alone.
fn split_bursts(spikes: &[(f64, u8)]) -> Vec<Vec<u8>> {
    if spikes.is_empty() {
        return Vec::new();
    }
    let gaps: Vec<f64> = spikes.windows(2).map(|w| w[1].0 - w[0].0).collect();
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = gaps.iter().copied().fold(0.0, f64::max);
    let cut = if hi > 2.0 * lo { 0.5 * (lo + hi) } else { -1.0 };
    let mut bursts = vec![vec![spikes[0].1]];
    for (gap, s) in gaps.iter().zip(&spikes[1..]) {
        if *gap > cut {
            bursts.push(vec![s.1]);
        } else {
            bursts.last_mut().expect("nonempty").push(s.1);
        }
    }
    bursts
}

/// Smallest period `m` (in items) repeated at least three times over `seq`.
fn smallest_period<T>(seq: &[T], max_period: usize, same: impl Fn(&T, &T) -> bool) -> Option<usize> {
    (1..=max_period.min(seq.len() / 3))
        .find(|&m| (0..seq.len() - m).all(|i| same(&seq[i], &seq[i + m])))
}

/// Sequential word of an eventually periodic spike stream.
pub fn activation_word(spikes: &SpikeTrain) -> Option<Word> {
    let bursts = split_bursts(&spikes.merged());
    if bursts.len() < 3 {
        return None;
    }
    // the window edges may cut a burst in two
    let inner = &bursts[1..bursts.len() - 1];
    let m = smallest_period(inner, MAX_WORD_LEN, |a, b| a == b)?;
    Word::from_bursts(&inner[..m])
}

fn is_in_phase(sp: &SpikeTrain, window: f64, t0: f64, t1: f64) -> bool {
    let paired = |a: &[f64], b: &[f64]| {
        a.iter()
            .filter(|&&t| t - t0 > window && t1 - t > window)
            .all(|&t| {
                let i = b.partition_point(|&s| s < t);
                let near = |j: usize| b.get(j).map_or(f64::INFINITY, |&s| (s - t).abs());
                near(i).min(if i > 0 { near(i - 1) } else { f64::INFINITY }) <= window
            })
    };
    paired(&sp.first, &sp.second) && paired(&sp.second, &sp.first)
}

fn is_anti_phase(sp: &SpikeTrain) -> bool {
    let merged = sp.merged();
    if merged.windows(2).any(|w| w[0].1 == w[1].1) {
        return false;
    }
    let first = &sp.first;
    sp.second.iter().all(|&t| {
        let i = first.partition_point(|&s| s < t);
        if i == 0 || i == first.len() {
            return true;
        }
        let half = 0.5 * (first[i] - first[i - 1]);
        ((t - first[i - 1]) - half).abs() <= ANTI_PHASE_TOLERANCE * half
    })
}

/// Whether the section returns repeat with some period `m ≤ MAX_CYCLE_PERIOD`.
///
/// Records with fewer than four returns count as periodic (nothing to refute).
pub fn returns_are_periodic(returns: &[Crossing], tol: f64) -> bool {
    returns.len() < 4 || smallest_period(returns, MAX_CYCLE_PERIOD, |a, b| a.state.distance(&b.state) < tol).is_some()
}

/// [`classify_regime_with`] under default integrator settings.
pub fn classify_regime(traj: &Trajectory, p: &Parameters) -> Result<RegimeLabel> {
    classify_regime_with(traj, p, &IntegratorSettings::default())
}

/// Labels the attractor sampled by a post-transient trajectory.
///
/// Checks run in order: quiescence (no spikes in the second half of the
/// window), in-phase pairing, chaos (aperiodic section returns and a
/// positive Lyapunov exponent, estimated from the trajectory's end with the
/// tolerances of `cfg`), anti-phase alternation, then a periodic word.
pub fn classify_regime_with(traj: &Trajectory, p: &Parameters, cfg: &IntegratorSettings) -> Result<RegimeLabel> {
    let spikes = detect_spikes(traj);
    let (t0, t1) = (traj.t_start(), traj.t_end());
    let late = t0 + 0.5 * (t1 - t0);
    if spikes.first.iter().chain(&spikes.second).all(|&t| t < late) {
        return Ok(RegimeLabel::Quiescent);
    }
    if spikes.first.len() < MIN_SPIKES || spikes.second.len() < MIN_SPIKES {
        return Err(Error::InsufficientData {
            first: spikes.first.len(),
            second: spikes.second.len(),
        });
    }
    let period = spikes.mean_interval().expect("at least two spikes");
    if is_in_phase(&spikes, SYNC_FRACTION * period, t0, t1) {
        return Ok(RegimeLabel::InPhase);
    }
    let returns = traj.crossings(&SectionSpec::standard());
    if !returns_are_periodic(&returns, RETURN_TOL) {
        let lyap_cfg = cfg.with_horizons(0.0, LYAPUNOV_MIN_TIME);
        if largest_lyapunov(traj.last(), p, &lyap_cfg)? > CHAOS_THRESHOLD {
            return Ok(RegimeLabel::Chaotic);
        }
    }
    if is_anti_phase(&spikes) {
        return Ok(RegimeLabel::AntiPhase);
    }
    Ok(activation_word(&spikes).map_or(RegimeLabel::Unclassified, RegimeLabel::Sequential))
}

/// Leading Lyapunov exponent by the Benettin method.
///
/// Discards `cfg.t_transient`, then averages over at least
/// [`LYAPUNOV_MIN_TIME`] with unit renormalization interval.
pub fn largest_lyapunov(seed: State, p: &Parameters, cfg: &IntegratorSettings) -> Result<f64> {
    let cfg = cfg.with_horizons(cfg.t_transient, cfg.t_observe.max(LYAPUNOV_MIN_TIME));
    let n = LYAPUNOV_VECTOR.iter().map(|v| v * v).sum::<f64>().sqrt();
    let v = LYAPUNOV_VECTOR.map(|c| c / n);
    let run = integrate_with_tangent(
        seed,
        &[v],
        p,
        &cfg,
        &TangentSettings {
            renorm_interval: Some(1.0),
            record: false,
        },
    )?;
    Ok(run.exponents()[0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymmetryClass {
    /// The orbit is its own swap image.
    SelfSymmetric,
    /// One of two swap-conjugate orbits.
    AsymmetricPair,
}

/// A periodic orbit located through its returns to `y2 = 0` (upwards).
#[derive(Debug, Clone, Serialize)]
pub struct CycleRecord {
    pub period: f64,
    /// Returns to the section per period.
    pub section_period: usize,
    pub fixed_point: State,
    /// The section points of the orbit, in visiting order.
    pub section_points: Vec<State>,
    /// Nontrivial multipliers, by descending modulus.
    pub multipliers: Vec<Complex64>,
    /// The multiplier closest to 1 (flow direction), removed from `multipliers`.
    pub trivial_multiplier: Complex64,
    #[serde(serialize_with = "matrix_rows")]
    pub monodromy: Matrix4,
    /// `∫ trace J dt` over one period.
    pub trace_integral: f64,
    /// `ln |det|` of the period map from a renormalized (QR) tangent run;
    /// the smallest multipliers are far below rounding level of the raw matrix.
    pub log_det: f64,
    /// Distance between the fixed point and its `m`-th section return.
    pub closure_error: f64,
    /// Distance between the fixed point and its image under the time-`T` flow.
    pub flow_closure: f64,
    pub symmetry: SymmetryClass,
    /// Max distance between the section points and those of the swap image.
    pub swap_distance: f64,
}

impl CycleRecord {
    /// Orbital stability: every nontrivial multiplier inside the unit circle (with slack).
    pub fn is_stable(&self, slack: f64) -> bool {
        self.multipliers.iter().all(|m| m.norm() < 1.0 + slack)
    }

    /// Relative mismatch between `∏ |μ|` and `exp(∫ trace J)`, compared in logs.
    pub fn liouville_error(&self) -> f64 {
        (self.log_det - self.trace_integral).exp_m1().abs()
    }
}

fn matrix_rows<S: Serializer>(m: &Matrix4, s: S) -> std::result::Result<S::Ok, S::Error> {
    let rows: [[f64; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| m[(i, j)]));
    rows.serialize(s)
}

// Max over each set of the distance to the nearest member of the other.
fn hausdorff(a: &[State], b: &[State]) -> f64 {
    let one_way = |u: &[State], v: &[State]| {
        u.iter()
            .map(|s| v.iter().map(|w| s.distance(w)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_way(a, b).max(one_way(b, a))
}

/// Period `m ≤ MAX_CYCLE_PERIOD` shown by the last `3m + 1` returns.
fn confirmed_period(hits: &[Crossing]) -> Option<usize> {
    let n = hits.len();
    (1..=MAX_CYCLE_PERIOD)
        .take_while(|&m| n > 3 * m)
        .find(|&m| (n - 1 - 3 * m..n - m).all(|j| hits[j].state.distance(&hits[j + m].state) < CYCLE_TOL))
}

/// Locates the periodic attractor reached from `seed`.
///
/// Section returns are followed after `cfg.t_transient` until consecutive
/// returns agree to [`CYCLE_TOL`], or a period-`m` pattern repeats three
/// times, with the budget ending at `cfg.t_end()`. The monodromy matrix is
/// the raw linearized flow over one period from the last return.
pub fn find_limit_cycle(seed: State, p: &Parameters, cfg: &IntegratorSettings) -> Result<CycleRecord> {
    let sec = SectionSpec::standard();
    let mut st = stepper(seed, p, cfg)?;
    st.advance_to(cfg.t_transient)?;
    let t_end = cfg.t_end();
    let mut hits: Vec<Crossing> = Vec::new();
    while st.t() < t_end {
        let seg = st.step(t_end)?;
        if let Some(c) = sec.crossing_in(&seg) {
            hits.push(c);
            if let Some(m) = confirmed_period(&hits) {
                return cycle_record(&hits[hits.len() - 1 - m..], p, cfg);
            }
        }
    }
    Err(Error::NotPeriodic)
}

fn cycle_record(span: &[Crossing], p: &Parameters, cfg: &IntegratorSettings) -> Result<CycleRecord> {
    let m = span.len() - 1;
    let fixed = span[m].state;
    let period = span[m].t - span[0].t;
    let identity = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let run = integrate_with_tangent(
        fixed,
        &identity,
        p,
        &cfg.with_horizons(0.0, period),
        &TangentSettings {
            renorm_interval: None,
            record: true,
        },
    )?;
    let mut mono = Matrix4::zeros();
    for (j, col) in run.basis.iter().enumerate() {
        for i in 0..4 {
            mono[(i, j)] = col[i];
        }
    }
    let mut mult: Vec<Complex64> = mono.complex_eigenvalues().iter().copied().collect();
    let trivial_at = (0..4)
        .min_by(|&a, &b| (mult[a] - 1.0).norm().total_cmp(&(mult[b] - 1.0).norm()))
        .expect("four multipliers");
    let trivial = mult.remove(trivial_at);
    mult.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(b.im.total_cmp(&a.im)));

    let qr = integrate_with_tangent(
        fixed,
        &identity,
        p,
        &cfg.with_horizons(0.0, period),
        &TangentSettings {
            renorm_interval: Some(QR_INTERVAL),
            record: false,
        },
    )?;
    let log_det: f64 = qr.log_norms.iter().sum();
    let sec = SectionSpec::standard();
    let image = section_crossings(fixed, p, &sec, m, &cfg.with_horizons(0.0, 2.0 * period))?;
    let closure_error = image[m - 1].state.distance(&fixed);

    let points: Vec<State> = span[1..].iter().map(|c| c.state).collect();
    let y1_section = SectionSpec {
        coord: Coord::Y1,
        ..SectionSpec::standard()
    };
    let mirrored: Vec<State> = run
        .trajectory
        .crossings(&y1_section)
        .iter()
        .map(|c| swap(c.state))
        .collect();
    let swap_distance = if mirrored.is_empty() {
        f64::INFINITY
    } else {
        hausdorff(&points, &mirrored)
    };
    Ok(CycleRecord {
        period,
        section_period: m,
        fixed_point: fixed,
        section_points: points,
        multipliers: mult,
        trivial_multiplier: trivial,
        monodromy: mono,
        trace_integral: run.trace_integral,
        log_det,
        closure_error,
        flow_closure: run.trajectory.last().distance(&fixed),
        symmetry: if swap_distance < SELF_SYMMETRY_TOL {
            SymmetryClass::SelfSymmetric
        } else {
            SymmetryClass::AsymmetricPair
        },
        swap_distance,
    })
}

/// Number of groups in `values` when gaps above `tol` separate groups.
pub fn cluster_count(values: &[f64], tol: f64) -> usize {
    if values.is_empty() {
        return 0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    1 + v.windows(2).filter(|w| w[1] - w[0] > tol).count()
}

/// Whether two value sets share points: some member of `a` within `tol` of some member of `b`.
pub fn sets_overlap(a: &[f64], b: &[f64], tol: f64) -> bool {
    let mut b = b.to_vec();
    b.sort_by(f64::total_cmp);
    a.iter().any(|&x| {
        let i = b.partition_point(|&y| y < x);
        b.get(i).is_some_and(|&y| y - x <= tol) || (i > 0 && x - b[i - 1] <= tol)
    })
}

/// Settings of [`period_doubling_scan`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdScanSettings {
    /// Returns discarded at every `α` before recording.
    pub discard: usize,
    pub record: usize,
    /// `t_transient` is applied at the first `α` only; `t_observe` is the
    /// time budget for `discard + record` returns.
    pub integrator: IntegratorSettings,
}

impl Default for PdScanSettings {
    fn default() -> Self {
        Self {
            discard: 256,
            record: 256,
            integrator: IntegratorSettings::default().with_horizons(300.0, 6000.0),
        }
    }
}

/// One `α` of a scan: recorded section `x1` values per seed (`None` when integration failed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdScanPoint {
    pub alpha_deg: f64,
    pub branches: [Option<Vec<f64>>; 2],
    pub failures: [Option<String>; 2],
}

impl PdScanPoint {
    pub fn flagged(&self) -> bool {
        self.branches.iter().any(Option::is_none)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PdScan {
    pub delta_deg: f64,
    /// The two seeds at the first `α`; the second is the swap of the first.
    pub seeds: [State; 2],
    pub points: Vec<PdScanPoint>,
}

/// Cascade structure read off a scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CascadeSummary {
    /// Cluster count per `α` for the first seed (0 where integration failed).
    pub counts: Vec<usize>,
    pub first_two: Option<f64>,
    pub first_four: Option<f64>,
    pub band_onset: Option<f64>,
    /// Counts go 1 → 2 → 4 without decreasing before the band.
    pub monotone_cascade: bool,
    /// First `α` where the seeds' value sets overlap after having been disjoint.
    pub merge_alpha: Option<f64>,
}

impl PdScan {
    pub fn cluster_counts(&self, branch: usize, tol: f64) -> Vec<usize> {
        self.points
            .iter()
            .map(|pt| pt.branches[branch].as_deref().map_or(0, |v| cluster_count(v, tol)))
            .collect()
    }

    pub fn summary(&self, tol: f64) -> CascadeSummary {
        let counts = self.cluster_counts(0, tol);
        let alpha = |i: usize| self.points[i].alpha_deg;
        let one = counts.iter().position(|&c| c == 1);
        let two = one.and_then(|i| counts[i..].iter().position(|&c| c == 2).map(|j| i + j));
        let four = two.and_then(|i| counts[i..].iter().position(|&c| c == 4).map(|j| i + j));
        let band = four
            .or(two)
            .or(one)
            .and_then(|i| counts[i..].iter().position(|&c| c > BAND_CLUSTERS).map(|j| i + j));
        let monotone = match (one, four, band) {
            (Some(i), Some(_), Some(l)) => counts[i..l].windows(2).all(|w| w[1] >= w[0] && w[1] > 0),
            _ => false,
        };
        let mut disjoint_seen = false;
        let mut merge = None;
        for pt in &self.points {
            if let [Some(a), Some(b)] = &pt.branches {
                if sets_overlap(a, b, tol) {
                    if disjoint_seen {
                        merge = Some(pt.alpha_deg);
                        break;
                    }
                } else {
                    disjoint_seen = true;
                }
            }
        }
        CascadeSummary {
            first_two: two.map(alpha),
            first_four: four.map(alpha),
            band_onset: band.map(alpha),
            monotone_cascade: monotone,
            merge_alpha: merge,
            counts,
        }
    }
}

/// Grid `start + i·(end − start)/(n − 1)`, `i = 0..n`.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (end - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Returns of one run to `y2 = 0` and to `y1 = 0` (both upwards), `n` of each.
///
/// The returns to `y1 = 0` are, after swapping coordinates, the returns to
/// `y2 = 0` of the run started from `swap(s0)`: the integrator treats the
/// two elements symmetrically, so that run is the exact swap image.
pub fn dual_returns(
    s0: State,
    p: &Parameters,
    n: usize,
    cfg: &IntegratorSettings,
) -> Result<(Vec<Crossing>, Vec<Crossing>)> {
    let own = SectionSpec::standard();
    let mirror = SectionSpec {
        coord: Coord::Y1,
        ..own
    };
    let mut st = stepper(s0, p, cfg)?;
    st.advance_to(cfg.t_transient)?;
    let t_end = cfg.t_end();
    let (mut a, mut b) = (Vec::with_capacity(n), Vec::with_capacity(n));
    while st.t() < t_end {
        let seg = st.step(t_end)?;
        if a.len() < n {
            a.extend(own.crossing_in(&seg));
        }
        if b.len() < n {
            b.extend(mirror.crossing_in(&seg).map(|c| Crossing {
                state: swap(c.state),
                ..c
            }));
        }
        if a.len() == n && b.len() == n {
            return Ok((a, b));
        }
    }
    Err(Error::SectionTimeout {
        found: a.len().min(b.len()),
        requested: n,
        t_end,
    })
}

/// Section `x1` values along `α` at fixed `δ`, following both swap-conjugate attractors.
///
/// The first seed is carried from each `α` to the next by its last return
/// to `y2 = 0`; the second seed is its swap at every `α`, so the two stay
/// exact swap images and sit on conjugate branches after a
/// symmetry-breaking bifurcation. Both are read from one integration (see
/// [`dual_returns`]). A failed point is flagged and the seed is retried
/// unchanged at the next `α`.
pub fn period_doubling_scan(
    delta_deg: f64,
    alpha_range_deg: (f64, f64),
    n_points: usize,
    seed: State,
    p: &Parameters,
    settings: &PdScanSettings,
) -> Result<PdScan> {
    if n_points == 0 || settings.record == 0 {
        return Err(Error::InvalidParameter("scan needs at least one point and one recorded return".into()));
    }
    settings.integrator.validate()?;
    let n = settings.discard + settings.record;
    let mut current = seed;
    let mut points = Vec::with_capacity(n_points);
    for (i, alpha_deg) in linspace(alpha_range_deg.0, alpha_range_deg.1, n_points).into_iter().enumerate() {
        let pa = p.with_sector_deg(alpha_deg, delta_deg)?;
        let transient = if i == 0 { settings.integrator.t_transient } else { 0.0 };
        let cfg = settings.integrator.with_horizons(transient, settings.integrator.t_observe);
        let values = |c: &[Crossing]| Some(c[settings.discard..].iter().map(|c| c.state.x1).collect::<Vec<f64>>());
        let point = match dual_returns(current, &pa, n, &cfg) {
            Ok((a, b)) => {
                current = a[n - 1].state;
                PdScanPoint {
                    alpha_deg,
                    branches: [values(&a), values(&b)],
                    failures: [None, None],
                }
            }
            Err(e) => PdScanPoint {
                alpha_deg,
                branches: [None, None],
                failures: [Some(e.to_string()), Some(e.to_string())],
            },
        };
        points.push(point);
    }
    Ok(PdScan {
        delta_deg,
        seeds: [seed, swap(seed)],
        points,
    })
}
