//! Dormand–Prince 5(4) integrator with proportional-integral step control
//! and continuous (dense) output of order four.
//!
//! Trajectories are anchored at `τ = 0` and integrated forward and backward
//! to cover a span `[τa, τb]` with `τa ≤ 0 ≤ τb`.

use crate::error::{Error, Result};

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

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const BETA: f64 = 0.04;
const MAX_STEPS: usize = 5_000_000;

/// Lowest tolerance accepted by the integrator.
pub const TOL_MIN: f64 = 1e-13;
/// Highest tolerance accepted by the integrator.
pub const TOL_MAX: f64 = 1e-4;

/// One accepted step with its interpolation coefficients.
#[derive(Debug, Clone)]
struct Segment<const N: usize> {
    t_old: f64,
    h: f64,
    rcont: [[f64; N]; 5],
}

impl<const N: usize> Segment<N> {
    fn lo(&self) -> f64 {
        self.t_old.min(self.t_old + self.h)
    }

    fn eval(&self, t: f64) -> [f64; N] {
        let theta = (t - self.t_old) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        std::array::from_fn(|i| {
            r[0][i] + theta * (r[1][i] + theta1 * (r[2][i] + theta * (r[3][i] + theta1 * r[4][i])))
        })
    }
}

/// A densely interpolable solution of an autonomous ODE `y' = f(y)`.
///
/// Node times are strictly increasing and evaluation at a node returns the
/// stored node state exactly.
#[derive(Debug, Clone)]
pub struct DenseTrajectory<const N: usize> {
    times: Vec<f64>,
    states: Vec<[f64; N]>,
    segments: Vec<Segment<N>>,
}

impl<const N: usize> DenseTrajectory<N> {
    /// Accepted-step node times, increasing.
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    /// Node states aligned with [`Self::times`].
    pub fn states(&self) -> &[[f64; N]] {
        &self.states
    }

    /// The covered interval.
    pub fn span(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().expect("non-empty"))
    }

    /// Interpolated state at `t`; `t` is clamped into the covered span.
    pub fn eval(&self, t: f64) -> [f64; N] {
        let (lo, hi) = self.span();
        let t = t.clamp(lo, hi);
        let idx = self.times.partition_point(|&x| x < t);
        if idx < self.times.len() && self.times[idx] == t {
            return self.states[idx];
        }
        if self.segments.is_empty() {
            return self.states[0];
        }
        let seg = idx.saturating_sub(1).min(self.segments.len() - 1);
        self.segments[seg].eval(t)
    }
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn scaled_norm<const N: usize>(v: &[f64; N], y0: &[f64; N], y1: &[f64; N], tol: f64) -> f64 {
    let sum: f64 = (0..N)
        .map(|i| {
            let sc = tol + tol * y0[i].abs().max(y1[i].abs());
            (v[i] / sc).powi(2)
        })
        .sum();
    (sum / N as f64).sqrt()
}

/// Accepted nodes and the dense-output segments between them.
type Sweep<const N: usize> = (Vec<(f64, [f64; N])>, Vec<Segment<N>>);

/// Integrates from `0` to `t_end` (either sign) and returns the accepted steps in
/// integration order.
fn sweep<const N: usize, F>(f: &F, y0: [f64; N], t_end: f64, tol: f64) -> Result<Sweep<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let mut nodes = vec![(0.0, y0)];
    let mut segments = Vec::new();
    if t_end == 0.0 {
        return Ok((nodes, segments));
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let mut t = 0.0_f64;
    let mut y = y0;
    let mut k1 = f(&y);
    let d0 = scaled_norm(&y, &y, &y, tol);
    let d1 = scaled_norm(&k1, &y, &y, tol);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span).max(1e-12 * span);
    let mut err_old = 1e-4_f64;
    let mut rejected = false;
    for _ in 0..MAX_STEPS {
        if t == t_end {
            break;
        }
        let remaining = (t_end - t).abs();
        let last = h >= remaining;
        if last {
            h = remaining;
        }
        if h < 1e-14 * span {
            return Err(Error::StepUnderflow { tau: t });
        }
        let hs = dir * h;
        let k2 = f(&axpy(&y, hs, &[(A21, &k1)]));
        let k3 = f(&axpy(&y, hs, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(&axpy(&y, hs, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&axpy(&y, hs, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&axpy(&y, hs, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = axpy(&y, hs, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y1);
        let errv: [f64; N] = std::array::from_fn(|i| {
            hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        });
        let err = scaled_norm(&errv, &y, &y1, tol);
        if err <= 1.0 {
            let r1 = y;
            let r2: [f64; N] = std::array::from_fn(|i| y1[i] - y[i]);
            let r3: [f64; N] = std::array::from_fn(|i| hs * k1[i] - r2[i]);
            let r4: [f64; N] = std::array::from_fn(|i| r2[i] - hs * k7[i] - r3[i]);
            let r5: [f64; N] = std::array::from_fn(|i| {
                hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
            });
            segments.push(Segment { t_old: t, h: hs, rcont: [r1, r2, r3, r4, r5] });
            t = if last { t_end } else { t + hs };
            y = y1;
            k1 = k7;
            nodes.push((t, y));
            let err_c = err.max(1e-10);
            let mut fac = SAFETY * err_c.powf(-(0.2 - 0.75 * BETA)) * err_old.powf(BETA);
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if rejected {
                fac = fac.min(1.0);
            }
            err_old = err_c;
            rejected = false;
            h *= fac;
        } else {
            rejected = true;
            h *= (SAFETY * err.powf(-0.2)).max(FAC_MIN);
        }
    }
    if t != t_end {
        return Err(Error::Accuracy(format!("step budget exhausted at tau = {t}")));
    }
    Ok((nodes, segments))
}

/// Solves `y' = f(y)` with `y(0) = y0` on `[span.0, span.1]` (which must contain 0)
/// with mixed absolute/relative local error tolerance `tol`.
pub fn integrate<const N: usize, F>(f: F, y0: [f64; N], span: (f64, f64), tol: f64) -> Result<DenseTrajectory<N>>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let (a, b) = span;
    if !(a <= 0.0 && 0.0 <= b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::Precondition(format!("span [{a}, {b}] must contain 0")));
    }
    if !(TOL_MIN..=TOL_MAX).contains(&tol) {
        return Err(Error::Precondition(format!("tolerance {tol} outside [{TOL_MIN}, {TOL_MAX}]")));
    }
    let (fwd_nodes, fwd_segs) = sweep(&f, y0, b, tol)?;
    let (bwd_nodes, bwd_segs) = sweep(&f, y0, a, tol)?;
    let mut times = Vec::with_capacity(fwd_nodes.len() + bwd_nodes.len());
    let mut states = Vec::with_capacity(times.capacity());
    for (t, y) in bwd_nodes.iter().skip(1).rev() {
        times.push(*t);
        states.push(*y);
    }
    for (t, y) in &fwd_nodes {
        times.push(*t);
        states.push(*y);
    }
    let mut segments: Vec<Segment<N>> = bwd_segs.into_iter().rev().collect();
    segments.extend(fwd_segs);
    debug_assert!(segments.windows(2).all(|w| w[0].lo() < w[1].lo()));
    Ok(DenseTrajectory { times, states, segments })
}
