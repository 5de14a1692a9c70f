//! Dormand–Prince 5(4) integration with dense output, Poincaré sections and
//! the variational (tangent) flow.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{coupling_with_partials, vector_field, Parameters, State};

/// Tolerances, step limit and time horizons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Integration time discarded before recording starts.
    pub t_transient: f64,
    /// Recorded time after the transient.
    pub t_observe: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            max_step: 1e-2,
            t_transient: 300.0,
            t_observe: 500.0,
        }
    }
}

impl IntegratorSettings {
    pub fn validate(&self) -> Result<()> {
        let ok = self.rel_tol > 0.0
            && self.abs_tol > 0.0
            && self.max_step > 0.0
            && self.t_transient >= 0.0
            && self.t_observe >= 0.0
            && self.t_end().is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("integrator settings {self:?}")))
        }
    }

    pub fn t_end(&self) -> f64 {
        self.t_transient + self.t_observe
    }

    pub fn with_horizons(self, t_transient: f64, t_observe: f64) -> Self {
        Self {
            t_transient,
            t_observe,
            ..self
        }
    }

    pub fn with_tolerances(self, rel_tol: f64, abs_tol: f64) -> Self {
        Self {
            rel_tol,
            abs_tol,
            ..self
        }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.rcont[0]
    }

    pub fn end(&self) -> [f64; N] {
        let mut y = self.rcont[0];
        for (yi, d) in y.iter_mut().zip(self.rcont[1]) {
            *yi += d;
        }
        y
    }

    /// Fourth-order interpolant at time `t` within the step.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let mut out = [0.0; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.eval_component(t, i);
        }
        out
    }

    pub fn eval_component(&self, t: f64, i: usize) -> f64 {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
    }

    /// Restriction to the first `M` components.
    pub fn project<const M: usize>(&self) -> DenseStep<M> {
        let mut rcont = [[0.0; M]; 5];
        for (dst, src) in rcont.iter_mut().zip(&self.rcont) {
            dst.copy_from_slice(&src[..M]);
        }
        DenseStep {
            t0: self.t0,
            h: self.h,
            rcont,
        }
    }
}

/// Adaptive Dormand–Prince stepper for an autonomous system `y' = f(y)`.
pub struct Dopri5<const N: usize, F> {
    f: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    rel_tol: f64,
    abs_tol: f64,
    max_step: f64,
    rejected_last: bool,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for (o, ki) in out.iter_mut().zip(k.iter()) {
            *o += h * c * ki;
        }
    }
    out
}

impl<const N: usize, F> Dopri5<N, F>
where
    F: FnMut(&[f64; N], &mut [f64; N]) -> Result<()>,
{
    pub fn new(mut f: F, y0: [f64; N], t0: f64, cfg: &IntegratorSettings) -> Result<Self> {
        cfg.validate()?;
        if y0.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { t: t0 });
        }
        let mut k1 = [0.0; N];
        f(&y0, &mut k1)?;
        let fnorm = k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = if fnorm > 0.0 {
            (1e-3 / fnorm).clamp(1e-8, cfg.max_step)
        } else {
            cfg.max_step
        };
        Ok(Self {
            f,
            t: t0,
            y: y0,
            k1,
            h,
            rel_tol: cfg.rel_tol,
            abs_tol: cfg.abs_tol,
            max_step: cfg.max_step,
            rejected_last: false,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; N] {
        &self.y
    }

    /// Overwrites the current state without touching the clock, e.g. after renormalization.
    pub fn reset_state(&mut self, y: [f64; N]) -> Result<()> {
        self.y = y;
        (self.f)(&self.y, &mut self.k1)
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        loop {
            let remaining = t_limit - self.t;
            let mut h = self.h.min(self.max_step);
            // avoid leaving a sliver before the limit
            let last = h >= remaining - 1e-12 * self.t.abs().max(1.0);
            if last {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let f = &mut self.f;
            let y = &self.y;
            let k1 = &self.k1;
            let mut k2 = [0.0; N];
            let mut k3 = [0.0; N];
            let mut k4 = [0.0; N];
            let mut k5 = [0.0; N];
            let mut k6 = [0.0; N];
            let mut k7 = [0.0; N];
            f(&axpy(y, h, &[(A21, k1)]), &mut k2)?;
            f(&axpy(y, h, &[(A31, k1), (A32, &k2)]), &mut k3)?;
            f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]), &mut k4)?;
            f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]), &mut k5)?;
            f(
                &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
                &mut k6,
            )?;
            let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            if y_new.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { t: self.t });
            }
            f(&y_new, &mut k7)?;

            // max norm: independent of component order, so the element swap
            // commutes with step-size selection bit for bit
            let mut err: f64 = 0.0;
            for i in 0..N {
                let e = h
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.abs_tol + self.rel_tol * y[i].abs().max(y_new[i].abs());
                err = err.max((e / sc).abs());
            }
            if !err.is_finite() {
                self.h = 0.2 * h;
                self.rejected_last = true;
                continue;
            }

            if err <= 1.0 {
                let mut rcont = [[0.0; N]; 5];
                for i in 0..N {
                    let ydiff = y_new[i] - y[i];
                    let bspl = h * k1[i] - ydiff;
                    rcont[0][i] = y[i];
                    rcont[1][i] = ydiff;
                    rcont[2][i] = bspl;
                    rcont[3][i] = ydiff - h * k7[i] - bspl;
                    rcont[4][i] = h
                        * (D1 * k1[i]
                            + D3 * k3[i]
                            + D4 * k4[i]
                            + D5 * k5[i]
                            + D6 * k6[i]
                            + D7 * k7[i]);
                }
                let dense = DenseStep {
                    t0: self.t,
                    h,
                    rcont,
                };
                let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, if self.rejected_last { 1.0 } else { 5.0 });
                // a step truncated at the horizon says nothing about the natural size
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.t = if last { t_limit } else { self.t + h };
                self.y = y_new;
                self.k1 = k7;
                self.rejected_last = false;
                return Ok(dense);
            }
            self.h = h * (0.9 * err.powf(-0.2)).max(0.2);
            self.rejected_last = true;
        }
    }

    /// Advances to exactly `t_end`, discarding the dense output.
    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }
}

fn state_field(p: Parameters) -> impl FnMut(&[f64; 4], &mut [f64; 4]) -> Result<()> {
    move |y, dy| {
        let d = vector_field(&State::from_array(*y), &p)?;
        *dy = d.to_array();
        Ok(())
    }
}

/// Stepper for the coupled pair.
pub fn stepper(
    s0: State,
    p: &Parameters,
    cfg: &IntegratorSettings,
) -> Result<Dopri5<4, impl FnMut(&[f64; 4], &mut [f64; 4]) -> Result<()>>> {
    Dopri5::new(state_field(*p), s0.to_array(), 0.0, cfg)
}

/// Recorded post-transient solution with dense interpolation.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub params: Parameters,
    segments: Vec<DenseStep<4>>,
    start: State,
    t_start: f64,
}

impl Trajectory {
    fn new(params: Parameters, t_start: f64, start: State) -> Self {
        Self {
            params,
            segments: Vec::new(),
            start,
            t_start,
        }
    }

    fn push(&mut self, seg: DenseStep<4>) {
        self.segments.push(seg);
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.segments.last().map_or(self.t_start, |s| s.t1())
    }

    pub fn duration(&self) -> f64 {
        self.t_end() - self.t_start
    }

    pub fn len(&self) -> usize {
        self.segments.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn segments(&self) -> &[DenseStep<4>] {
        &self.segments
    }

    /// Samples at the integrator's step boundaries.
    pub fn samples(&self) -> impl Iterator<Item = (f64, State)> + '_ {
        std::iter::once((self.t_start, self.start)).chain(
            self.segments
                .iter()
                .map(|s| (s.t1(), State::from_array(s.end()))),
        )
    }

    pub fn first(&self) -> State {
        self.start
    }

    pub fn last(&self) -> State {
        self.segments
            .last()
            .map_or(self.start, |s| State::from_array(s.end()))
    }

    /// Dense interpolation; `None` outside the recorded window.
    pub fn interpolate(&self, t: f64) -> Option<State> {
        if t < self.t_start || t > self.t_end() {
            return None;
        }
        if self.segments.is_empty() {
            return Some(self.start);
        }
        let idx = self.segments.partition_point(|s| s.t1() < t);
        let seg = &self.segments[idx.min(self.segments.len() - 1)];
        Some(State::from_array(seg.eval(t)))
    }

    /// Uniformly resampled copy of the recorded window.
    pub fn resample(&self, dt: f64) -> Vec<(f64, State)> {
        let n = (self.duration() / dt).floor() as usize;
        (0..=n)
            .filter_map(|i| {
                let t = self.t_start + i as f64 * dt;
                self.interpolate(t).map(|s| (t, s))
            })
            .collect()
    }

    /// Upward/downward crossings of `coord = level`, refined on the dense output.
    pub fn crossings(&self, sec: &SectionSpec) -> Vec<Crossing> {
        self.segments
            .iter()
            .filter_map(|seg| sec.crossing_in(seg))
            .collect()
    }
}

/// Integrates from `t = 0` and records `[t_transient, t_transient + t_observe]`.
pub fn integrate(s0: State, p: &Parameters, cfg: &IntegratorSettings) -> Result<Trajectory> {
    let mut st = stepper(s0, p, cfg)?;
    st.advance_to(cfg.t_transient)?;
    let mut traj = Trajectory::new(*p, st.t(), State::from_array(*st.y()));
    let t_end = cfg.t_end();
    while st.t() < t_end {
        traj.push(st.step(t_end)?);
    }
    Ok(traj)
}

/// Coordinate of the phase point, in `(x1, y1, x2, y2)` order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coord {
    X1,
    Y1,
    X2,
    Y2,
}

impl Coord {
    pub fn index(self) -> usize {
        match self {
            Coord::X1 => 0,
            Coord::Y1 => 1,
            Coord::X2 => 2,
            Coord::Y2 => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Rising,
    Falling,
    Both,
}

impl Direction {
    /// `+1`, `-1` or `0`.
    pub fn from_sign(sign: i32) -> Self {
        match sign.signum() {
            1 => Direction::Rising,
            -1 => Direction::Falling,
            _ => Direction::Both,
        }
    }

    pub fn sign(self) -> i32 {
        match self {
            Direction::Rising => 1,
            Direction::Falling => -1,
            Direction::Both => 0,
        }
    }
}

/// Hyperplane `coord = level` crossed in a given direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectionSpec {
    pub coord: Coord,
    pub level: f64,
    pub direction: Direction,
}

impl SectionSpec {
    /// `y2 = 0` crossed upwards.
    pub fn standard() -> Self {
        Self {
            coord: Coord::Y2,
            level: 0.0,
            direction: Direction::Rising,
        }
    }

    /// Crossing inside one dense step, if any. The step's start point is
    /// excluded so that a crossing on a step boundary is reported once.
    pub fn crossing_in<const N: usize>(&self, seg: &DenseStep<N>) -> Option<Crossing> {
        let i = self.coord.index();
        let f0 = seg.start()[i] - self.level;
        let f1 = seg.end()[i] - self.level;
        let rising = f0 < 0.0 && f1 >= 0.0;
        let falling = f0 > 0.0 && f1 <= 0.0;
        let hit = match self.direction {
            Direction::Rising => rising,
            Direction::Falling => falling,
            Direction::Both => rising || falling,
        };
        if !hit {
            return None;
        }
        let g = |t: f64| seg.eval_component(t, i) - self.level;
        let t = refine_root(g, seg.t0, seg.t1(), f0, f1);
        let full = seg.eval(t);
        Some(Crossing {
            t,
            state: State::new(full[0], full[1], full[2], full[3]),
            rising: f1 > f0,
        })
    }
}

/// Illinois-modified regula falsi on a bracketing interval.
pub(crate) fn refine_root(
    g: impl Fn(f64) -> f64,
    mut a: f64,
    mut b: f64,
    mut fa: f64,
    mut fb: f64,
) -> f64 {
    if fb == 0.0 {
        return b;
    }
    let mut side = 0;
    for _ in 0..200 {
        let c = if fa != fb {
            (a * fb - b * fa) / (fb - fa)
        } else {
            0.5 * (a + b)
        };
        let c = if c > a.min(b) && c < a.max(b) {
            c
        } else {
            0.5 * (a + b)
        };
        let fc = g(c);
        if fc.abs() < 1e-13 || (b - a).abs() < 1e-15 * c.abs().max(1.0) {
            return c;
        }
        if (fc > 0.0) == (fb > 0.0) {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if fa.abs() < fb.abs() {
        a
    } else {
        b
    }
}

/// A refined section crossing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub t: f64,
    pub state: State,
    pub rising: bool,
}

/// First `n` post-transient crossings; the search gives up at `t_transient + t_observe`.
pub fn section_crossings(
    s0: State,
    p: &Parameters,
    sec: &SectionSpec,
    n: usize,
    cfg: &IntegratorSettings,
) -> Result<Vec<Crossing>> {
    if n == 0 {
        return Err(Error::InvalidParameter("crossing count must be at least 1".into()));
    }
    let mut st = stepper(s0, p, cfg)?;
    st.advance_to(cfg.t_transient)?;
    let t_end = cfg.t_end();
    let mut found = Vec::with_capacity(n);
    while st.t() < t_end {
        let seg = st.step(t_end)?;
        if let Some(c) = sec.crossing_in(&seg) {
            found.push(c);
            if found.len() == n {
                return Ok(found);
            }
        }
    }
    Err(Error::SectionTimeout {
        found: found.len(),
        requested: n,
        t_end,
    })
}

/// How the tangent basis is handled during [`integrate_with_tangent`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentSettings {
    /// Gram–Schmidt renormalization period; `None` keeps the raw linearized flow.
    pub renorm_interval: Option<f64>,
    /// Record the state trajectory (costs memory on long runs).
    pub record: bool,
}

impl Default for TangentSettings {
    fn default() -> Self {
        Self {
            renorm_interval: Some(1.0),
            record: true,
        }
    }
}

/// Result of a joint state + tangent integration.
#[derive(Debug, Clone)]
pub struct TangentRun {
    /// Recorded state trajectory, empty window when recording is off.
    pub trajectory: Trajectory,
    /// Evolved basis (orthonormal after the last renormalization).
    pub basis: Vec<[f64; 4]>,
    /// Accumulated log expansion factors, one per basis vector.
    pub log_norms: Vec<f64>,
    /// Time span over which the tangent flow was integrated.
    pub duration: f64,
    /// `∫ trace J dt` over the same span.
    pub trace_integral: f64,
}

impl TangentRun {
    /// Lyapunov exponent estimates `log_norms / duration`.
    pub fn exponents(&self) -> Vec<f64> {
        self.log_norms.iter().map(|l| l / self.duration).collect()
    }

    pub fn mean_trace(&self) -> f64 {
        self.trace_integral / self.duration
    }
}

// State (4) + four tangent vectors (16) + running integral of the trace (1).
const TAN_DIM: usize = 21;
const COLLAPSED_NORM: f64 = 1e-100;

fn tangent_field(p: Parameters) -> impl FnMut(&[f64; TAN_DIM], &mut [f64; TAN_DIM]) -> Result<()> {
    move |y, dy| {
        let (x1, y1, x2, y2) = (y[0], y[1], y[2], y[3]);
        let (i1, ix1, iy1) = coupling_with_partials(x1, y1, &p)?;
        let (i2, ix2, iy2) = coupling_with_partials(x2, y2, &p)?;
        let e = p.eps;
        dy[0] = (x1 - x1.powi(3) / 3.0 - y1 + i2) / e;
        dy[1] = x1 - p.a;
        dy[2] = (x2 - x2.powi(3) / 3.0 - y2 + i1) / e;
        dy[3] = x2 - p.a;
        let j00 = (1.0 - x1 * x1) / e;
        let j22 = (1.0 - x2 * x2) / e;
        for v in 0..4 {
            let o = 4 + 4 * v;
            let (u0, u1, u2, u3) = (y[o], y[o + 1], y[o + 2], y[o + 3]);
            dy[o] = j00 * u0 - u1 / e + (ix2 * u2 + iy2 * u3) / e;
            dy[o + 1] = u0;
            dy[o + 2] = (ix1 * u0 + iy1 * u1) / e + j22 * u2 - u3 / e;
            dy[o + 3] = u2;
        }
        dy[20] = j00 + j22;
        Ok(())
    }
}

// Modified Gram–Schmidt on the four tangent slots; returns the log norms.
// A slot that has collapsed numerically is replaced by a fresh unit vector
// orthogonal to the earlier ones.
fn orthonormalize(y: &mut [f64; TAN_DIM]) -> [f64; 4] {
    let mut logs = [0.0; 4];
    for v in 0..4 {
        let ov = 4 + 4 * v;
        let mut norm = 0.0;
        for attempt in 0..=4 {
            if attempt > 0 {
                for i in 0..4 {
                    y[ov + i] = if i == attempt - 1 { 1.0 } else { 0.0 };
                }
            }
            for u in 0..v {
                let ou = 4 + 4 * u;
                let dot: f64 = (0..4).map(|i| y[ov + i] * y[ou + i]).sum();
                for i in 0..4 {
                    y[ov + i] -= dot * y[ou + i];
                }
            }
            norm = (0..4).map(|i| y[ov + i].powi(2)).sum::<f64>().sqrt();
            if attempt == 0 {
                logs[v] = norm.max(f64::MIN_POSITIVE).ln();
            }
            if norm > COLLAPSED_NORM && norm.is_finite() {
                break;
            }
        }
        for i in 0..4 {
            y[ov + i] /= norm;
        }
    }
    logs
}

// Completes `basis` to four vectors so that the padded slots stay well conditioned.
fn padded_basis(basis: &[[f64; 4]]) -> Result<[[f64; 4]; 4]> {
    if basis.is_empty() || basis.len() > 4 {
        return Err(Error::InvalidParameter("basis must hold 1 to 4 vectors".into()));
    }
    let mut out = [[0.0; 4]; 4];
    out[..basis.len()].copy_from_slice(basis);
    let mut filled = basis.len();
    // check independence and complete with coordinate vectors
    let mut ortho: Vec<[f64; 4]> = Vec::new();
    let push = |v: [f64; 4], ortho: &mut Vec<[f64; 4]>| -> bool {
        let mut w = v;
        for q in ortho.iter() {
            let d: f64 = (0..4).map(|i| w[i] * q[i]).sum();
            for i in 0..4 {
                w[i] -= d * q[i];
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n <= 1e-10 * scale.max(f64::MIN_POSITIVE) {
            return false;
        }
        ortho.push(w.map(|x| x / n));
        true
    };
    for v in basis {
        if !push(*v, &mut ortho) {
            return Err(Error::InvalidParameter("basis vectors are linearly dependent".into()));
        }
    }
    for axis in 0..4 {
        if filled == 4 {
            break;
        }
        let mut e = [0.0; 4];
        e[axis] = 1.0;
        if push(e, &mut ortho) {
            out[filled] = *ortho.last().expect("just pushed");
            filled += 1;
        }
    }
    Ok(out)
}

/// Joint integration of the state and the linearized flow `v' = J(s(t)) v`.
///
/// The transient `[0, t_transient]` advances the state only; the tangent
/// basis then evolves over `t_observe`, renormalized every
/// `tangent.renorm_interval` with the log expansion factors accumulated.
pub fn integrate_with_tangent(
    s0: State,
    basis: &[[f64; 4]],
    p: &Parameters,
    cfg: &IntegratorSettings,
    tangent: &TangentSettings,
) -> Result<TangentRun> {
    let m = basis.len();
    let full = padded_basis(basis)?;
    if let Some(dt) = tangent.renorm_interval {
        if dt.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
            return Err(Error::InvalidParameter("renormalization interval must be positive".into()));
        }
    }
    let mut st = stepper(s0, p, cfg)?;
    st.advance_to(cfg.t_transient)?;
    let t0 = st.t();
    let start = State::from_array(*st.y());

    let mut y = [0.0; TAN_DIM];
    y[..4].copy_from_slice(&start.to_array());
    for (v, vec) in full.iter().enumerate() {
        y[4 + 4 * v..8 + 4 * v].copy_from_slice(vec);
    }
    let mut tan = Dopri5::new(tangent_field(*p), y, t0, cfg)?;
    let mut traj = Trajectory::new(*p, t0, start);
    let mut log_norms = vec![0.0; m];
    let t_end = cfg.t_end();
    let mut next_renorm = tangent.renorm_interval.map(|dt| (t0 + dt).min(t_end));
    while tan.t() < t_end {
        let limit = next_renorm.unwrap_or(t_end);
        let seg = tan.step(limit)?;
        if tangent.record {
            traj.push(seg.project::<4>());
        }
        if let (Some(at), Some(dt)) = (next_renorm, tangent.renorm_interval) {
            if tan.t() >= at {
                let mut y = *tan.y();
                let logs = orthonormalize(&mut y);
                for (acc, l) in log_norms.iter_mut().zip(&logs) {
                    *acc += l;
                }
                tan.reset_state(y)?;
                next_renorm = Some((at + dt).min(t_end));
            }
        }
    }
    let y = *tan.y();
    let basis_out: Vec<[f64; 4]> = (0..m)
        .map(|v| [y[4 + 4 * v], y[5 + 4 * v], y[6 + 4 * v], y[7 + 4 * v]])
        .collect();
    if tangent.renorm_interval.is_none() {
        // report raw growth of each vector
        for (v, acc) in log_norms.iter_mut().enumerate() {
            let n = basis_out[v].iter().map(|x| x * x).sum::<f64>().sqrt();
            let n0 = full[v].iter().map(|x| x * x).sum::<f64>().sqrt();
            *acc = (n / n0).ln();
        }
    }
    Ok(TangentRun {
        trajectory: traj,
        basis: basis_out,
        log_norms,
        duration: t_end - t0,
        trace_integral: y[20],
    })
}

/// Monodromy (period-map linearization) from `s0` over time `period`.
///
/// Column `j` is the image of the `j`-th unit vector. Also returns the state
/// reached after `period` and `∫ trace J dt`.
pub fn monodromy(
    s0: State,
    period: f64,
    p: &Parameters,
    cfg: &IntegratorSettings,
) -> Result<(crate::model::Matrix4, State, f64)> {
    let identity = [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ];
    let cfg = cfg.with_horizons(0.0, period);
    let run = integrate_with_tangent(
        s0,
        &identity,
        p,
        &cfg,
        &TangentSettings {
            renorm_interval: None,
            record: true,
        },
    )?;
    let mut m = crate::model::Matrix4::zeros();
    for (j, col) in run.basis.iter().enumerate() {
        for i in 0..4 {
            m[(i, j)] = col[i];
        }
    }
    Ok((m, run.trajectory.last(), run.trace_integral))
}
