//! Equilibria of the pair and the analytic Andronov–Hopf curves.
//!
//! At an equilibrium both `x` coordinates equal `a`, and the `y`
//! coordinates solve `y1 = Ĩ(y2)`, `y2 = Ĩ(y1)` with
//! `Ĩ(y) = a − a³/3 + I(φ(a, y))`. Fixed points of `Ĩ` give symmetric
//! equilibria `O(a, y0, a, y0)`; period-2 points give swap-conjugate pairs.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{
    coupling_partials, coupling_slope, emitted_current, jacobian, phase_angle, symmetric_pairs, symmetric_spectrum, Parameters,
    Spectrum, State,
};

/// Sign-change scan resolution over the invariant interval.
pub const SCAN_INTERVALS: usize = 4096;
/// Period-2 roots closer than this to a fixed point are the fixed point itself.
pub const PERIOD2_DEDUP: f64 = 1e-8;
/// Real parts within this band of zero are reported as marginal.
pub const MARGINAL_BAND: f64 = 1e-8;
/// Angular resolution of the α scan for Hopf points.
pub const HOPF_SCAN_STEP_DEG: f64 = 0.05;
/// Inner root-bracketing resolution used while tracing Hopf curves.
pub const HOPF_INNER_INTERVALS: usize = 512;

/// `Ĩ(y) = a − a³/3 + I(φ(a, y))`.
///
/// The phase is undefined only for `a = 0, y = 0`; the current is taken as zero there.
pub fn itilde(y: f64, p: &Parameters) -> f64 {
    p.rest_y() + emitted_current(p.a, y, p).unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquilibriumKind {
    Symmetric,
    /// Member of a swap-conjugate pair `O1, O2`.
    Asymmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    StableFocus,
    StableNode,
    SaddleFocus,
    Saddle,
    Unstable,
    /// Some eigenvalue has `|Re λ| < 1e-8`.
    Marginal,
}

impl Stability {
    pub fn is_stable(self) -> bool {
        matches!(self, Stability::StableFocus | Stability::StableNode)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub kind: EquilibriumKind,
    /// `(y1, y2)`; equal for a symmetric equilibrium.
    pub y: (f64, f64),
    pub state: State,
    pub spectrum: Spectrum,
    pub stability: Stability,
}

impl Equilibrium {
    fn build(kind: EquilibriumKind, y1: f64, y2: f64, p: &Parameters) -> Result<Self> {
        let state = State::new(p.a, y1, p.a, y2);
        let spectrum = match kind {
            EquilibriumKind::Symmetric => symmetric_spectrum(y1, p)?,
            EquilibriumKind::Asymmetric => Spectrum::of_matrix(&jacobian(&state, p)?),
        };
        Ok(Self {
            kind,
            y: (y1, y2),
            state,
            spectrum,
            stability: classify_spectrum(&spectrum),
        })
    }

    pub fn residual(&self, p: &Parameters) -> Result<f64> {
        Ok(crate::model::vector_field(&self.state, p)?.norm())
    }
}

/// Stability class from the sign pattern of the real parts.
pub fn classify_spectrum(sp: &Spectrum) -> Stability {
    let v = sp.values();
    if v.iter().any(|l| l.re.abs() < MARGINAL_BAND) {
        return Stability::Marginal;
    }
    let complex = v.iter().any(|l| l.im != 0.0);
    let stable = v.iter().all(|l| l.re < 0.0);
    let unstable = v.iter().all(|l| l.re > 0.0);
    match (stable, unstable, complex) {
        (true, _, true) => Stability::StableFocus,
        (true, _, false) => Stability::StableNode,
        (_, true, _) => Stability::Unstable,
        (false, false, true) => Stability::SaddleFocus,
        (false, false, false) => Stability::Saddle,
    }
}

pub fn classify_equilibrium(eq: &Equilibrium) -> Stability {
    classify_spectrum(&eq.spectrum)
}

// Bisection to full double precision on a bracketing interval.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    if flo == 0.0 {
        return lo;
    }
    if f(hi) == 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let (a, b) = (f(lo).abs(), f(hi).abs());
    if a <= b {
        lo
    } else {
        hi
    }
}

// All sign changes of `f` on [lo, hi] with `n` subintervals, each refined by bisection.
fn scan_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / n as f64;
    let mut roots: Vec<f64> = Vec::new();
    let mut x0 = lo;
    let mut f0 = f(x0);
    for i in 1..=n {
        let x1 = if i == n { hi } else { lo + i as f64 * step };
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0 * f1 < 0.0 {
            roots.push(bisect(&f, x0, x1));
        }
        x0 = x1;
        f0 = f1;
    }
    if f0 == 0.0 {
        roots.push(x0);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    roots
}

/// Interval searched for equilibrium `y` values.
pub fn search_interval(p: &Parameters) -> (f64, f64) {
    (p.rest_y() - p.g, p.rest_y() + 2.0 * p.g)
}

/// Fixed points of `Ĩ`, ascending.
pub fn symmetric_equilibrium_ys(p: &Parameters) -> Vec<f64> {
    fixed_points(p, SCAN_INTERVALS)
}

fn fixed_points(p: &Parameters, intervals: usize) -> Vec<f64> {
    let (lo, hi) = search_interval(p);
    scan_roots(|y| y - itilde(y, p), lo, hi, intervals)
}

fn itilde_slope(y: f64, p: &Parameters) -> f64 {
    match phase_angle(p.a, y) {
        Ok(phi) => coupling_slope(phi, p) * p.a / (p.a * p.a + y * y),
        Err(_) => 0.0,
    }
}

// Newton on y1 = Ĩ(y2), y2 = Ĩ(y1); the composed map is too steep for bisection alone.
fn polish_pair(mut y1: f64, mut y2: f64, p: &Parameters) -> (f64, f64) {
    let norm = |a: f64, b: f64| (a - itilde(b, p)).abs().max((b - itilde(a, p)).abs());
    for _ in 0..8 {
        let f1 = y1 - itilde(y2, p);
        let f2 = y2 - itilde(y1, p);
        let (s1, s2) = (itilde_slope(y1, p), itilde_slope(y2, p));
        // Jacobian [[1, -s2], [-s1, 1]]
        let det = 1.0 - s1 * s2;
        if det.abs() < 1e-300 {
            break;
        }
        let n1 = y1 - (f1 + s2 * f2) / det;
        let n2 = y2 - (f2 + s1 * f1) / det;
        if norm(n1, n2) >= norm(y1, y2) {
            break;
        }
        y1 = n1;
        y2 = n2;
    }
    (y1, y2)
}

/// All equilibria: symmetric ones first, then asymmetric pairs as adjacent `O1, O2`.
pub fn find_equilibria(p: &Parameters) -> Result<Vec<Equilibrium>> {
    let (lo, hi) = search_interval(p);
    let fixed = symmetric_equilibrium_ys(p);
    let mut out = Vec::new();
    for &y0 in &fixed {
        out.push(Equilibrium::build(EquilibriumKind::Symmetric, y0, y0, p)?);
    }
    let period2 = scan_roots(|y| y - itilde(itilde(y, p), p), lo, hi, SCAN_INTERVALS);
    let mut seen: Vec<f64> = Vec::new();
    for y10 in period2 {
        if fixed.iter().any(|f| (f - y10).abs() < PERIOD2_DEDUP) {
            continue;
        }
        if seen.iter().any(|s| (s - y10).abs() < PERIOD2_DEDUP) {
            continue;
        }
        let (y10, y20) = polish_pair(y10, itilde(y10, p), p);
        seen.push(y10);
        seen.push(y20);
        let (a, b) = if y10 <= y20 { (y10, y20) } else { (y20, y10) };
        out.push(Equilibrium::build(EquilibriumKind::Asymmetric, a, b, p)?);
        out.push(Equilibrium::build(EquilibriumKind::Asymmetric, b, a, p)?);
    }
    Ok(out)
}

/// Which eigenvalue pair crosses the imaginary axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HopfBranch {
    /// `I_x = a² − 1`: the in-phase pair (eigenvectors on the invariant plane).
    InPhase,
    /// `I_x = 1 − a²`: the anti-phase pair.
    AntiPhase,
}

impl HopfBranch {
    pub fn name(self) -> &'static str {
        match self {
            HopfBranch::InPhase => "in-phase",
            HopfBranch::AntiPhase => "anti-phase",
        }
    }

    /// `I_x` value on the curve.
    pub fn target(self, p: &Parameters) -> f64 {
        match self {
            HopfBranch::InPhase => p.a * p.a - 1.0,
            HopfBranch::AntiPhase => 1.0 - p.a * p.a,
        }
    }

    /// The eigenvalue pair of this branch at the symmetric equilibrium `y0`.
    pub fn pair(self, y0: f64, p: &Parameters) -> Result<[num_complex::Complex64; 2]> {
        let (inp, anti) = symmetric_pairs(y0, p)?;
        Ok(match self {
            HopfBranch::InPhase => inp,
            HopfBranch::AntiPhase => anti,
        })
    }
}

impl std::str::FromStr for HopfBranch {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "in-phase" | "inphase" | "12" => Ok(HopfBranch::InPhase),
            "anti-phase" | "antiphase" | "13" => Ok(HopfBranch::AntiPhase),
            other => Err(crate::Error::InvalidParameter(format!("unknown Hopf branch {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfCurvePoint {
    /// Radians.
    pub alpha: f64,
    /// Radians.
    pub delta: f64,
    pub y0: f64,
    pub branch: HopfBranch,
}

// Symmetric equilibria with the Hopf residual `I_x − target` at each.
fn hopf_residuals(alpha: f64, delta: f64, branch: HopfBranch, p: &Parameters) -> Result<Vec<(f64, f64)>> {
    let q = p.with_sector(alpha, delta)?;
    fixed_points(&q, HOPF_INNER_INTERVALS)
        .into_iter()
        .map(|y0| Ok((y0, coupling_partials(q.a, y0, &q)?.0 - branch.target(&q))))
        .collect()
}

/// Points of one Andronov–Hopf curve, one or more per `δ` in `delta_grid` (radians).
///
/// α is scanned around the full circle at [`HOPF_SCAN_STEP_DEG`] and every sign
/// change of `I_x − target` along a continuous equilibrium branch is refined by
/// bisection. Tangencies without a sign change are not reported.
pub fn hopf_curve(branch: HopfBranch, delta_grid: &[f64], p: &Parameters) -> Result<Vec<HopfCurvePoint>> {
    let n = (360.0 / HOPF_SCAN_STEP_DEG).round() as usize;
    let mut out = Vec::new();
    for &delta in delta_grid {
        if !(delta > 0.0 && delta < TAU) {
            return Err(crate::Error::InvalidParameter(format!("delta {delta} outside (0, 2π)")));
        }
        let grid: Vec<f64> = (0..=n).map(|i| TAU * i as f64 / n as f64).collect();
        let values = grid
            .iter()
            .map(|&al| hopf_residuals(al, delta, branch, p))
            .collect::<Result<Vec<_>>>()?;
        for i in 0..n {
            let (r0, r1) = (&values[i], &values[i + 1]);
            if r0.len() != r1.len() {
                continue;
            }
            for j in 0..r0.len() {
                let (c0, c1) = (r0[j].1, r1[j].1);
                if c0 == 0.0 || c0 * c1 >= 0.0 {
                    continue;
                }
                let f = |al: f64| {
                    hopf_residuals(al, delta, branch, p)
                        .ok()
                        .and_then(|v| v.get(j).map(|r| r.1))
                        .unwrap_or(f64::NAN)
                };
                let alpha = bisect(f, grid[i], grid[i + 1]);
                let res = hopf_residuals(alpha, delta, branch, p)?;
                let Some(&(y0, c)) = res.get(j) else { continue };
                let q = p.with_sector(alpha, delta)?;
                // the crossing pair must be complex at the crossing, i.e. 1 ∓ I_y > 0
                let (_, iy) = coupling_partials(q.a, y0, &q)?;
                let complex = match branch {
                    HopfBranch::InPhase => iy < 1.0,
                    HopfBranch::AntiPhase => iy > -1.0,
                };
                if c.abs() < 1e-10 && complex {
                    out.push(HopfCurvePoint {
                        alpha: q.alpha,
                        delta,
                        y0,
                        branch,
                    });
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::vector_field;
    use num_complex::Complex64;

    #[test]
    fn itilde_off_sector_and_on_plateau() {
        // rest phase is ~213.4°; a sector at 30°..50° never sees it
        let p = Parameters::with_angles_deg(30.0, 20.0).unwrap();
        assert!((itilde(-0.6, &p) - p.rest_y()).abs() < 1e-8);
        assert!((p.rest_y() + 0.66657).abs() < 1e-5);
        let p = Parameters::with_angles_deg(170.0, 80.0).unwrap();
        assert!((itilde(-0.6, &p) - (p.rest_y() + p.g)).abs() < 1e-6);
        // plateau: moving y keeps the phase deep inside the sector
        assert!((itilde(-0.6, &p) - itilde(-0.55, &p)).abs() < 1e-12);
    }

    #[test]
    fn itilde_is_bounded() {
        let p = Parameters::with_angles_deg(200.0, 20.0).unwrap();
        for i in 0..10_000 {
            let y = -3.0 + 6.0 * i as f64 / 10_000.0;
            // far from the sector the current is below one ulp of the rest value
            let i = emitted_current(p.a, y, &p).unwrap();
            assert!(i > 0.0 && i < p.g, "y = {y}");
            let v = itilde(y, &p);
            assert!(v >= p.rest_y() && v < p.rest_y() + p.g, "y = {y}");
        }
    }

    #[test]
    fn far_sector_gives_single_stable_equilibrium() {
        let p = Parameters::with_angles_deg(30.0, 20.0).unwrap();
        let eqs = find_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 1);
        let e = &eqs[0];
        assert_eq!(e.kind, EquilibriumKind::Symmetric);
        // bisection oracle written independently of the scan
        let (mut lo, mut hi) = (-1.0, 0.0);
        for _ in 0..100 {
            let m = 0.5 * (lo + hi);
            if m - itilde(m, &p) > 0.0 {
                hi = m
            } else {
                lo = m
            }
        }
        assert!((e.y.0 - lo).abs() < 1e-12);
        assert!((e.y.0 + 0.66657).abs() < 1e-5);
        assert_eq!(e.stability, Stability::StableFocus);
        assert!(e.residual(&p).unwrap() < 1e-10);
    }

    #[test]
    fn uncoupled_equilibrium() {
        let p = Parameters::default().with_coupling(0.0).unwrap();
        let eqs = find_equilibria(&p).unwrap();
        assert_eq!(eqs.len(), 1);
        assert!((eqs[0].y.0 - p.rest_y()).abs() < 1e-14);
        assert!(eqs[0].stability.is_stable());
    }

    #[test]
    fn equilibrium_state_is_a_zero_of_the_field() {
        for (al, de) in [(210.0, 50.0), (100.0, 20.0), (160.0, 60.0), (213.648, 15.0)] {
            let p = Parameters::with_angles_deg(al, de).unwrap();
            for e in find_equilibria(&p).unwrap() {
                let r = vector_field(&e.state, &p).unwrap().norm();
                assert!(r < 1e-10, "{al} {de}: {r}");
                let generic = Spectrum::of_matrix(&jacobian(&e.state, &p).unwrap());
                assert!(e.spectrum.distance(&generic) < 1e-9);
            }
        }
    }

    #[test]
    fn asymmetric_pairs_with_steep_coupling() {
        // a strong, sharp window makes Ĩ non-contracting and creates period-2 points
        let base = Parameters::new(-1.01, 0.01, 400.0, 1.0, 0.0, 1.0).unwrap();
        let mut found = false;
        for al in (150..260).map(|d| (d as f64).to_radians()) {
            let p = base.with_sector(al, 0.4).unwrap();
            let eqs = find_equilibria(&p).unwrap();
            let asym: Vec<_> = eqs.iter().filter(|e| e.kind == EquilibriumKind::Asymmetric).collect();
            assert_eq!(asym.len() % 2, 0);
            for pair in asym.chunks(2) {
                found = true;
                assert_eq!(pair[1].state, crate::model::swap(pair[0].state));
                let (y10, y20) = pair[0].y;
                assert!((y10 - itilde(y20, &p)).abs() < 1e-10);
                assert!((y20 - itilde(y10, &p)).abs() < 1e-10);
                let r = pair[0].residual(&p).unwrap();
                assert!(r < 1e-10, "{pair:?} residual {r}");
            }
        }
        assert!(found, "expected at least one asymmetric pair");
    }

    #[test]
    fn classification_rules() {
        let c = |re, im| Complex64::new(re, im);
        let stable = Spectrum::new([c(-1.005, 9.9494), c(-1.005, -9.9494), c(-1.005, 9.9494), c(-1.005, -9.9494)]);
        assert_eq!(classify_spectrum(&stable), Stability::StableFocus);
        let sf = Spectrum::new([c(0.1, 5.0), c(0.1, -5.0), c(-1.0, 5.0), c(-1.0, -5.0)]);
        assert_eq!(classify_spectrum(&sf), Stability::SaddleFocus);
        let marg = Spectrum::new([c(5e-9, 5.0), c(5e-9, -5.0), c(-1.0, 5.0), c(-1.0, -5.0)]);
        assert_eq!(classify_spectrum(&marg), Stability::Marginal);
        let saddle = Spectrum::new([c(4.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(-50.0, 0.0)]);
        assert_eq!(classify_spectrum(&saddle), Stability::Saddle);
        let node = Spectrum::new([c(-4.0, 0.0), c(-1.0, 0.0), c(-1.0, 0.0), c(-50.0, 0.0)]);
        assert_eq!(classify_spectrum(&node), Stability::StableNode);
        let unst = Spectrum::new([c(4.0, 1.0), c(4.0, -1.0), c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(classify_spectrum(&unst), Stability::Unstable);
    }

    #[test]
    fn hopf_points_sit_on_the_imaginary_axis() {
        let p = Parameters::default();
        let grid: Vec<f64> = [20.0, 50.0, 80.0].iter().map(|d: &f64| d.to_radians()).collect();
        for branch in [HopfBranch::InPhase, HopfBranch::AntiPhase] {
            let pts = hopf_curve(branch, &grid, &p).unwrap();
            assert!(!pts.is_empty(), "{branch:?}");
            for pt in pts {
                let q = p.with_sector(pt.alpha, pt.delta).unwrap();
                let pair = branch.pair(pt.y0, &q).unwrap();
                assert!(pair[0].re.abs() < 1e-6, "{pt:?} {pair:?}");
                assert!((pt.y0 - itilde(pt.y0, &q)).abs() < 1e-10);
                assert!(p.a * (1.0 - p.a * p.a) / pt.y0 < 1.0);
            }
        }
    }

    #[test]
    fn branch_names_round_trip() {
        for b in [HopfBranch::InPhase, HopfBranch::AntiPhase] {
            assert_eq!(b.name().parse::<HopfBranch>().unwrap(), b);
        }
        assert!("sideways".parse::<HopfBranch>().is_err());
    }
}
