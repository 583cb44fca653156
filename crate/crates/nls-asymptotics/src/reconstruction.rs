//! Rebuilds the amplitudes `(A1, A2)` from the quadratic quantities.
//!
//! Anchored on `A1`, the solution is
//!
//! ```text
//! A1(τ) = (−1)^{k1(τ)} √((ρ + D)/2) · A1(0)/|A1(0)| · exp(i ∫₀^τ (N1 − 𝒱))
//! A2(τ) = (−1)^{k1(τ)} (R + iI)/√(2(ρ + D)) · A1(0)/|A1(0)| · exp(i ∫₀^τ (N1 − 𝒱))
//! ```
//!
//! where `k1` counts the zeros of `ρ + D` between 0 and `τ`. The `A2`
//! anchor mirrors this with `ρ − D`, `N2` and `(R − iI)`.
//!
//! [`reconstruct`] and [`reconstruct_path`] hand off between the two anchors
//! whenever the anchored weight `ρ ± D` drops below [`HANDOFF_FRACTION`]`·ρ`,
//! so the phase integrand stays bounded. [`reconstruct_anchored`] evaluates a
//! single anchor literally, counting zeros with a [`SignTracker`].

use crate::error::{Error, Result};
use crate::quadratic_flow::{full_ode_rhs, AmplitudePair, QuadState};
use crate::quadrature;
use crate::standard_form::{StandardParams, StructureMatrix};
use num_complex::Complex64;

/// Weight fraction of `ρ` below which the anchor is handed to the other component.
pub const HANDOFF_FRACTION: f64 = 0.5;

/// Absolute tolerance of each phase quadrature panel.
pub const PHASE_TOL: f64 = 1e-11;

/// Largest `ρ ± D` (relative to `ρ`) still counted as a zero of the anchored component.
pub const ZERO_TOL: f64 = 1e-8;

/// Half-width, in units of `1/(ρP)`, of the window around a zero in which
/// the phase rate is replaced by its linear interpolant.
const REMOVABLE_WINDOW: f64 = 1e-4;

/// The component whose polar form carries the phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Anchor {
    First,
    Second,
}

impl Anchor {
    /// `ρ + D` for the first anchor and `ρ − D` for the second.
    pub fn weight(self, rho: f64, s: QuadState) -> f64 {
        match self {
            Anchor::First => rho + s.d,
            Anchor::Second => rho - s.d,
        }
    }

    fn other(self) -> Self {
        match self {
            Anchor::First => Anchor::Second,
            Anchor::Second => Anchor::First,
        }
    }
}

/// `𝒱 = ((q1 + q3)/2)ρ + ((q1 − q3)/2)D + q2 R`.
pub fn potential_rate(p: &StandardParams, rho: f64, s: QuadState) -> f64 {
    0.5 * (p.q1 + p.q3) * rho + 0.5 * (p.q1 - p.q3) * s.d + p.q2 * s.r
}

fn singular_check(w: f64, rho: f64, which: &str) -> Result<()> {
    if w > 1e-12 * rho {
        Ok(())
    } else {
        Err(Error::Singular(format!("{which} is singular at weight {w:e}; switch to the other anchor")))
    }
}

/// Phase rate of the `A1` anchor.
pub fn phase_rate_n1(p: &StandardParams, rho: f64, s: QuadState) -> Result<f64> {
    let QuadState { d, r, i } = s;
    let w = rho + d;
    singular_check(w, rho, "N1")?;
    Ok(rho * r / w * p.p1 + (-3.0 * rho + i * i / w) * p.p2 + (-d + r * r / w) * p.p3 - w * p.p4
        + (-r - rho * r / w) * p.p5)
}

/// Phase rate of the `A2` anchor.
pub fn phase_rate_n2(p: &StandardParams, rho: f64, s: QuadState) -> Result<f64> {
    let QuadState { d, r, i } = s;
    let w = rho - d;
    singular_check(w, rho, "N2")?;
    Ok(-rho * r / w * p.p1 + (-3.0 * rho + i * i / w) * p.p2 + (d + r * r / w) * p.p3 + w * p.p4
        + (-r - rho * r / w) * p.p5)
}

/// Phase rate of the `A1` anchor for the gauge-free system with structure matrix `C`.
pub fn phase_rate_n1_general(c: &StructureMatrix, rho: f64, s: QuadState) -> Result<f64> {
    let QuadState { d, r, i } = s;
    let c = &c.c;
    let w = rho + d;
    singular_check(w, rho, "N1")?;
    let tr = c[0][0] + c[1][1] + c[2][2];
    Ok((c[0][1] + c[1][2]) * w / 2.0 - 1.5 * c[0][0] * r - c[1][0] * (rho - d + (r * r - i * i) / (2.0 * w))
        - c[2][0] * (rho - d) * r / (2.0 * w)
        + tr / 2.0 * r)
}

/// Phase rate of the `A2` anchor for the gauge-free system with structure matrix `C`.
pub fn phase_rate_n2_general(c: &StructureMatrix, rho: f64, s: QuadState) -> Result<f64> {
    let QuadState { d, r, i } = s;
    let c = &c.c;
    let w = rho - d;
    singular_check(w, rho, "N2")?;
    let tr = c[0][0] + c[1][1] + c[2][2];
    Ok(-(c[1][0] + c[2][1]) * w / 2.0 + 1.5 * c[2][2] * r + c[1][2] * (rho + d + (r * r - i * i) / (2.0 * w))
        + c[0][2] * (rho + d) * r / (2.0 * w)
        - tr / 2.0 * r)
}

/// The integrand `N − 𝒱` of the phase along a quadratic-quantity path.
pub struct PhaseIntegrand<'a> {
    pub p: StandardParams,
    pub rho: f64,
    pub anchor: Anchor,
    pub quad: &'a dyn Fn(f64) -> QuadState,
}

impl PhaseIntegrand<'_> {
    /// `N1(τ)` or `N2(τ)`.
    pub fn n_rate(&self, tau: f64) -> Result<f64> {
        let s = (self.quad)(tau);
        match self.anchor {
            Anchor::First => phase_rate_n1(&self.p, self.rho, s),
            Anchor::Second => phase_rate_n2(&self.p, self.rho, s),
        }
    }

    /// `𝒱(τ)`.
    pub fn v_rate(&self, tau: f64) -> f64 {
        potential_rate(&self.p, self.rho, (self.quad)(tau))
    }

    /// `N(τ) − 𝒱(τ)`.
    pub fn rate(&self, tau: f64) -> Result<f64> {
        Ok(self.n_rate(tau)? - self.v_rate(tau))
    }

    /// `∫_a^b (N − 𝒱)`, or a singular-evaluation error if the weight vanishes on the way.
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        let failure = std::cell::Cell::new(None);
        let value = quadrature::integrate(
            |t| match self.rate(t) {
                Ok(v) => v,
                Err(e) => {
                    failure.set(Some(e));
                    0.0
                }
            },
            a,
            b,
            PHASE_TOL,
            0.0,
        )?;
        match failure.take() {
            Some(e) => Err(e),
            None => Ok(value),
        }
    }
}

/// Zero times of the anchored weight `ρ ± D` between 0 and a horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct SignTracker {
    /// Zero times ordered by distance from 0.
    pub zero_times: Vec<f64>,
}

impl SignTracker {
    /// Locates the zeros of `ρ ± D` on the segment from 0 to `tau`.
    /// `step` is the sampling step used to bracket local minima.
    pub fn locate(quad: &dyn Fn(f64) -> QuadState, rho: f64, anchor: Anchor, tau: f64, step: f64) -> Self {
        let n = ((tau.abs() / step).ceil() as usize).max(8);
        let w = |t: f64| anchor.weight(rho, quad(t));
        let grid: Vec<f64> = (0..=n).map(|k| tau * k as f64 / n as f64).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| w(t)).collect();
        let mut zero_times = Vec::new();
        for k in 0..=n {
            let left = if k == 0 { f64::INFINITY } else { vals[k - 1] };
            let right = if k == n { f64::INFINITY } else { vals[k + 1] };
            if !(vals[k] <= left && vals[k] < right) {
                continue;
            }
            let lo = grid[k.saturating_sub(1)];
            let hi = grid[(k + 1).min(n)];
            let t_min = golden_minimum(&w, lo.min(hi), lo.max(hi));
            if w(t_min) > ZERO_TOL * rho {
                continue;
            }
            let t_zero = refine_crossing(quad, t_min, (hi - lo).abs() / 4.0);
            if t_zero != 0.0 && zero_times.iter().all(|z: &f64| (z - t_zero).abs() > 1e-9 * step) {
                zero_times.push(t_zero);
            }
        }
        zero_times.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        Self { zero_times }
    }

    /// `k(τ)`: zeros inside `[0, τ]` (or `[τ, 0]` for negative `τ`).
    pub fn parity(&self, tau: f64) -> u32 {
        self.zero_times
            .iter()
            .filter(|&&z| if tau >= 0.0 { z > 0.0 && z <= tau } else { z < 0.0 && z >= tau })
            .count() as u32
    }
}

fn golden_minimum(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-13 * (1.0 + a.abs()) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    0.5 * (a + b)
}

/// Sharpens a zero of `A_j` by bisecting the sign change of `(R, I)` projected
/// on its direction of passage.
fn refine_crossing(quad: &dyn Fn(f64) -> QuadState, t0: f64, half: f64) -> f64 {
    let (a, b) = (quad(t0 - half), quad(t0 + half));
    let dir = [b.r - a.r, b.i - a.i];
    let proj = |t: f64| {
        let s = quad(t);
        s.r * dir[0] + s.i * dir[1]
    };
    let (mut lo, mut hi) = (t0 - half, t0 + half);
    let (plo, phi) = (proj(lo), proj(hi));
    if plo.signum() == phi.signum() {
        return t0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
            break;
        }
        if proj(mid).signum() == plo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn polar_pair(anchor: Anchor, rho: f64, s: QuadState, phase: Complex64) -> AmplitudePair {
    let w = anchor.weight(rho, s);
    match anchor {
        Anchor::First => AmplitudePair::new(
            phase * (0.5 * w).sqrt(),
            phase * Complex64::new(s.r, s.i) / (2.0 * w).sqrt(),
        ),
        Anchor::Second => AmplitudePair::new(
            phase * Complex64::new(s.r, -s.i) / (2.0 * w).sqrt(),
            phase * (0.5 * w).sqrt(),
        ),
    }
}

fn anchored(a: &AmplitudePair, anchor: Anchor) -> Complex64 {
    match anchor {
        Anchor::First => a.a1,
        Anchor::Second => a.a2,
    }
}

fn check_data(a0: &AmplitudePair, quad: &dyn Fn(f64) -> QuadState, rho: f64) -> Result<()> {
    if a0.rho() == 0.0 {
        return Err(Error::Precondition("the trivial solution has no phase to reconstruct".into()));
    }
    if (a0.rho() - rho).abs() > 1e-8 * rho.max(1.0) {
        return Err(Error::Precondition(format!("rho = {rho} differs from |A1|² + |A2|² = {}", a0.rho())));
    }
    let gap = a0.quad().max_abs_diff(quad(0.0));
    if gap > 1e-8 * rho.max(1.0) {
        return Err(Error::Precondition(format!("quadratic source at 0 differs from the data by {gap:e}")));
    }
    Ok(())
}

fn time_scale(p: &StandardParams, rho: f64) -> f64 {
    1.0 / (rho * p.p_scale()).max(1e-300)
}

/// Marches the phase of the current anchor from 0 towards `targets` (all of
/// one sign, ordered by distance from 0), handing off between anchors.
fn march(
    p: &StandardParams,
    a0: &AmplitudePair,
    quad: &dyn Fn(f64) -> QuadState,
    rho: f64,
    targets: &[f64],
) -> Result<Vec<AmplitudePair>> {
    let mut anchor = if a0.a1.norm() >= a0.a2.norm() { Anchor::First } else { Anchor::Second };
    let mut unit = anchored(a0, anchor) / anchored(a0, anchor).norm();
    let mut theta = 0.0;
    let mut t = 0.0;
    let h_max = 0.05 * time_scale(p, rho);
    let threshold = HANDOFF_FRACTION * rho;
    let mut out = Vec::with_capacity(targets.len());
    for &target in targets {
        while t != target {
            let remaining = target - t;
            let next = if remaining.abs() <= h_max { target } else { t + h_max * remaining.signum() };
            let integrand = PhaseIntegrand { p: *p, rho, anchor, quad };
            let w = |s: f64| anchor.weight(rho, quad(s));
            let probes: Vec<f64> = (1..=4).map(|k| t + (next - t) * k as f64 / 4.0).collect();
            match probes.iter().position(|&s| w(s) < threshold) {
                None => {
                    theta += integrand.integral(t, next)?;
                    t = next;
                }
                Some(k) => {
                    let (mut lo, mut hi) = (if k == 0 { t } else { probes[k - 1] }, probes[k]);
                    for _ in 0..200 {
                        let mid = 0.5 * (lo + hi);
                        if (hi - lo).abs() <= 1e-14 * (1.0 + mid.abs()) {
                            break;
                        }
                        if w(mid) >= threshold {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    theta += integrand.integral(t, lo)?;
                    t = lo;
                    let pair = polar_pair(anchor, rho, quad(t), unit * Complex64::from_polar(1.0, theta));
                    anchor = anchor.other();
                    let z = anchored(&pair, anchor);
                    unit = z / z.norm();
                    theta = 0.0;
                }
            }
        }
        out.push(polar_pair(anchor, rho, quad(t), unit * Complex64::from_polar(1.0, theta)));
    }
    Ok(out)
}

/// Rebuilds `(A1, A2)(τ)` from data `a0` and the quadratic path `quad`.
pub fn reconstruct(
    p: &StandardParams,
    a0: AmplitudePair,
    quad: &dyn Fn(f64) -> QuadState,
    rho: f64,
    tau: f64,
) -> Result<AmplitudePair> {
    Ok(reconstruct_path(p, a0, quad, rho, &[tau])?[0])
}

/// [`reconstruct`] at every entry of `times`, sharing the phase integral.
pub fn reconstruct_path(
    p: &StandardParams,
    a0: AmplitudePair,
    quad: &dyn Fn(f64) -> QuadState,
    rho: f64,
    times: &[f64],
) -> Result<Vec<AmplitudePair>> {
    check_data(&a0, quad, rho)?;
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].abs().total_cmp(&times[b].abs()));
    let forward: Vec<usize> = order.iter().copied().filter(|&k| times[k] >= 0.0).collect();
    let backward: Vec<usize> = order.iter().copied().filter(|&k| times[k] < 0.0).collect();
    let mut out = vec![a0; times.len()];
    for idx in [forward, backward] {
        let targets: Vec<f64> = idx.iter().map(|&k| times[k]).collect();
        for (k, v) in idx.iter().zip(march(p, &a0, quad, rho, &targets)?) {
            if times[*k] != 0.0 {
                out[*k] = v;
            }
        }
    }
    Ok(out)
}

/// The single-anchor formula evaluated literally, with the sign factor
/// `(−1)^k` from a [`SignTracker`]. Within a short window around each zero
/// the phase rate is replaced by its linear interpolant.
pub fn reconstruct_anchored(
    p: &StandardParams,
    a0: AmplitudePair,
    quad: &dyn Fn(f64) -> QuadState,
    rho: f64,
    tau: f64,
    anchor: Anchor,
) -> Result<AmplitudePair> {
    check_data(&a0, quad, rho)?;
    let z0 = anchored(&a0, anchor);
    if z0.norm() == 0.0 {
        return Err(Error::Precondition("the anchored component vanishes at 0".into()));
    }
    if tau == 0.0 {
        return Ok(a0);
    }
    let scale = time_scale(p, rho);
    let tracker = SignTracker::locate(quad, rho, anchor, tau, 0.02 * scale);
    let integrand = PhaseIntegrand { p: *p, rho, anchor, quad };
    let window = REMOVABLE_WINDOW * scale;
    let mut theta = 0.0;
    let mut start = 0.0;
    let mut zeros: Vec<f64> = tracker.zero_times.iter().copied().filter(|z| z.abs() < tau.abs() && z * tau > 0.0).collect();
    zeros.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let dir = tau.signum();
    for z in zeros {
        let (before, after) = (z - dir * window, z + dir * window);
        theta += integrand.integral(start, before)?;
        let (r0, r1) = (integrand.rate(before)?, integrand.rate(after)?);
        theta += 0.5 * (r0 + r1) * (after - before);
        start = after;
    }
    let end_weight = anchor.weight(rho, quad(tau));
    if end_weight <= ZERO_TOL * rho {
        return Err(Error::Singular(format!("the anchored component vanishes at tau = {tau}")));
    }
    theta += integrand.integral(start, tau)?;
    let sign = if tracker.parity(tau).is_multiple_of(2) { 1.0 } else { -1.0 };
    Ok(polar_pair(anchor, rho, quad(tau), z0 / z0.norm() * Complex64::from_polar(sign, theta)))
}

/// Largest deviation `|dA/dτ − (−iF(A))|` over the interior nodes of a
/// uniformly spaced path, with the fourth-order central difference.
pub fn residual(p: &StandardParams, path: &[(f64, AmplitudePair)]) -> Result<f64> {
    let n = path.len();
    if n < 9 {
        return Err(Error::Precondition(format!("residual needs at least 9 nodes, got {n}")));
    }
    let h = path[1].0 - path[0].0;
    if h == 0.0 {
        return Err(Error::Precondition("path nodes must be distinct".into()));
    }
    for w in path.windows(2) {
        if ((w[1].0 - w[0].0) - h).abs() > 1e-9 * h.abs() {
            return Err(Error::Precondition("path nodes must be uniformly spaced".into()));
        }
    }
    let mut worst = 0.0f64;
    for k in 2..n - 2 {
        let fd = |sel: fn(&AmplitudePair) -> Complex64| {
            (-sel(&path[k + 2].1) + 8.0 * sel(&path[k + 1].1) - 8.0 * sel(&path[k - 1].1) + sel(&path[k - 2].1))
                / (12.0 * h)
        };
        let rhs = full_ode_rhs(p, &path[k].1);
        worst = worst.max((fd(|a| a.a1) - rhs.a1).norm()).max((fd(|a| a.a2) - rhs.a2).norm());
    }
    Ok(worst)
}
