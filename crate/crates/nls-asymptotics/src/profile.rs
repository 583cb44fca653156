//! Large-time asymptotic profiles built on the amplitude flow.
//!
//! For final data `(α1(ξ), α2(ξ))` the profile is
//!
//! ```text
//! u_app,j(t, x) = (2it)^{−1/2} e^{ix²/4t} A_j((t/2|t|) log|t|, x/2t)
//! ```
//!
//! where `A(·, ξ)` solves the amplitude ODE with data `α(ξ)`.
//! [`case1_profile`] and [`case3_profile`] evaluate the explicit forms of
//! the pure `p1` and pure `p3` systems, and [`sync_decay`] measures the
//! decay of a synchronizing combination `γ1 u1 + γ2 u2`.

use crate::closed_form::solve_case;
use crate::elliptic::{argument_from_sn_cn, jacobi, jacobi_am};
use crate::error::{Error, Result};
use crate::quadratic_flow::{fmt17, integrate_full, AmplitudePair};
use crate::quadrature;
use crate::reconstruction::reconstruct;
use crate::standard_form::StandardParams;
use num_complex::Complex64;
use std::f64::consts::SQRT_2;
use std::fmt::Write as _;

type C64 = Complex64;

/// Final data sampled on an increasing `ξ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FinalData {
    pub xi_grid: Vec<f64>,
    pub alpha1: Vec<C64>,
    pub alpha2: Vec<C64>,
}

impl FinalData {
    /// Checks that the grid is strictly increasing and the columns agree in length.
    pub fn new(xi_grid: Vec<f64>, alpha1: Vec<C64>, alpha2: Vec<C64>) -> Result<Self> {
        if xi_grid.len() < 2 || alpha1.len() != xi_grid.len() || alpha2.len() != xi_grid.len() {
            return Err(Error::Precondition("final data needs at least two nodes and matching columns".into()));
        }
        if xi_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition("xi grid must be strictly increasing".into()));
        }
        Ok(Self { xi_grid, alpha1, alpha2 })
    }

    /// Samples `f` on `xi_grid`.
    pub fn from_fn(xi_grid: Vec<f64>, f: impl Fn(f64) -> (C64, C64)) -> Result<Self> {
        let (alpha1, alpha2) = xi_grid.iter().map(|&x| f(x)).unzip();
        Self::new(xi_grid, alpha1, alpha2)
    }

    /// Complex-linear interpolation at `xi`.
    pub fn at(&self, xi: f64) -> Result<AmplitudePair> {
        let g = &self.xi_grid;
        let (first, last) = (g[0], g[g.len() - 1]);
        if !(xi >= first && xi <= last) {
            return Err(Error::OutOfDomain { what: "xi outside the final-data grid", value: xi });
        }
        let k = g.partition_point(|&x| x <= xi).clamp(1, g.len() - 1);
        let w = (xi - g[k - 1]) / (g[k] - g[k - 1]);
        let lerp = |v: &[C64]| v[k - 1] * (1.0 - w) + v[k] * w;
        Ok(AmplitudePair::new(lerp(&self.alpha1), lerp(&self.alpha2)))
    }

    /// Smallest `C` with `|α1(ξ)| + |α2(ξ)| ≤ C⟨ξ⟩⁻²` on the grid.
    pub fn decay_constant(&self) -> f64 {
        self.xi_grid
            .iter()
            .zip(self.alpha1.iter().zip(&self.alpha2))
            .map(|(x, (a1, a2))| (a1.norm() + a2.norm()) * (1.0 + x * x))
            .fold(0.0, f64::max)
    }
}

/// One profile evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub t: f64,
    pub x: f64,
    pub u1: C64,
    pub u2: C64,
}

/// Renders samples as CSV with header `t,x,re_u1,im_u1,re_u2,im_u2`.
pub fn profile_csv(samples: &[ProfileSample]) -> String {
    let mut out = String::from("t,x,re_u1,im_u1,re_u2,im_u2\n");
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt17(s.t),
            fmt17(s.x),
            fmt17(s.u1.re),
            fmt17(s.u1.im),
            fmt17(s.u2.re),
            fmt17(s.u2.im)
        );
    }
    out
}

/// Flow time `τ = (t/2|t|) log|t|`.
pub fn flow_time(t: f64) -> f64 {
    0.5 * t.signum() * t.abs().ln()
}

/// `(2it)^{−1/2} e^{ix²/4t}` with the principal square root.
fn free_factor(t: f64, x: f64) -> C64 {
    C64::new(0.0, 2.0 * t).sqrt().inv() * C64::from_polar(1.0, x * x / (4.0 * t))
}

fn check_time(t: f64) -> Result<()> {
    if t == 0.0 || !t.is_finite() {
        return Err(Error::OutOfDomain { what: "profile time", value: t });
    }
    Ok(())
}

/// The amplitude flow from `a0` at `τ = 0` to `tau`, through the closed form
/// and reconstruction when the case is supported and the full ODE otherwise.
pub fn evolve(p: &StandardParams, a0: AmplitudePair, tau: f64) -> Result<AmplitudePair> {
    let rho = a0.rho();
    if rho == 0.0 || tau == 0.0 {
        return Ok(a0);
    }
    match solve_case(p, rho, a0.quad()) {
        Ok(sol) => reconstruct(p, a0, &|s| sol.eval(s), rho, tau),
        Err(Error::Unsupported(_)) | Err(Error::UnsupportedRatio(_)) => {
            let traj = integrate_full(p, a0, (tau.min(0.0), tau.max(0.0)), 1e-11)?;
            Ok(traj.eval(tau))
        }
        Err(e) => Err(e),
    }
}

/// `(u_app,1, u_app,2)(t, x)`.
pub fn uapp(p: &StandardParams, fd: &FinalData, t: f64, x: f64) -> Result<(C64, C64)> {
    check_time(t)?;
    let a0 = fd.at(x / (2.0 * t))?;
    let a = evolve(p, a0, flow_time(t))?;
    let pre = free_factor(t, x);
    Ok((pre * a.a1, pre * a.a2))
}

/// `uapp` over a set of `x` at fixed `t`.
pub fn sample_profile(p: &StandardParams, fd: &FinalData, t: f64, xs: &[f64]) -> Result<Vec<ProfileSample>> {
    xs.iter()
        .map(|&x| uapp(p, fd, t, x).map(|(u1, u2)| ProfileSample { t, x, u1, u2 }))
        .collect()
}

/// Quadratic data `(ρ, D0, R0, I0)` of an amplitude pair.
fn quad_data(a: &AmplitudePair) -> (f64, f64, f64, f64) {
    let s = a.quad();
    (a.rho(), s.d, s.r, s.i)
}

/// The explicit profile of the pure `p1` system with potential `q`, for `t > 1`.
pub fn case1_profile(p1: f64, q: [f64; 3], fd: &FinalData, t: f64, x: f64) -> Result<(C64, C64)> {
    if !(p1 > 0.0) {
        return Err(Error::Precondition(format!("p1 = {p1} must be positive")));
    }
    if !(t > 1.0) {
        return Err(Error::Precondition(format!("t = {t} must exceed 1")));
    }
    let a0 = fd.at(x / (2.0 * t))?;
    if a0.a1.norm() == 0.0 {
        return Err(Error::Precondition("alpha1 vanishes at this xi".into()));
    }
    let (rho, d0, r0, i0) = quad_data(&a0);
    let [q1, q2, q3] = q;
    let a = rho - i0;
    let b = rho + i0;
    if a <= 1e-14 * rho {
        return Err(Error::Singular("rho = I0: the data sits on the unstable fixed point".into()));
    }
    let tp = t.powf(p1 * rho);
    let l = tp * a + b / tp;
    let pre = free_factor(t, x) * (a0.a1 / a0.a1.norm()) * (0.5 * rho).sqrt();
    let unit = {
        let z = C64::new(r0, -(a + d0)) * C64::new(r0, tp * a + d0);
        z / z.norm()
    };
    let n0 = d0.hypot(r0);
    let v_drift = if n0 == 0.0 {
        0.0
    } else {
        let k = (a / b).sqrt();
        (0.5 * (q1 - q3) * d0 + q2 * r0) / (p1 * n0) * ((k * tp).atan() - k.atan())
    };
    let phase = C64::from_polar(1.0, -0.25 * (q1 + q3) * rho * t.ln() - v_drift);
    let u1 = pre * (1.0 + 2.0 * d0 / l).sqrt() * unit * phase;
    let u2 = pre * C64::new(2.0 * r0, -(tp * a - b / tp)) / ((l + 2.0 * d0).sqrt() * l.sqrt()) * unit * phase;
    Ok((u1, u2))
}

/// Parameters `(ω1, ω2, m, t0)` of the explicit pure-`p3` profile at one `ξ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Case3Moduli {
    pub omega1: f64,
    pub omega2: f64,
    pub m: f64,
    pub t0: f64,
}

/// Computes the moduli of the pure-`p3` profile, checking `0 < ω2 < |ω1| < 1`.
pub fn case3_moduli(a0: &AmplitudePair) -> Result<Case3Moduli> {
    let (rho, d0, r0, i0) = quad_data(a0);
    if rho == 0.0 || d0 == 0.0 {
        return Err(Error::Precondition("0 < omega2 < |omega1| < 1 fails: omega1 = 0".into()));
    }
    let omega1 = d0.signum() * ((i0 * i0 + 2.0 * d0 * d0) / (2.0 * rho * rho)).sqrt();
    let omega2 = ((i0 * i0 + 2.0 * r0 * r0) / (2.0 * rho * rho)).sqrt();
    if !(omega2 > 0.0) {
        return Err(Error::Precondition("0 < omega2 fails".into()));
    }
    if !(omega2 < omega1.abs()) {
        return Err(Error::Precondition(format!("omega2 < |omega1| fails: {omega2} >= {}", omega1.abs())));
    }
    if !(omega1.abs() < 1.0) {
        return Err(Error::Precondition(format!("|omega1| < 1 fails: {}", omega1.abs())));
    }
    let m = omega2 * omega2 / (omega1 * omega1);
    let norm = (i0 * i0 + 2.0 * r0 * r0).sqrt();
    let t0 = argument_from_sn_cn(i0 / norm, SQRT_2 * r0 / norm, m)?;
    Ok(Case3Moduli { omega1, omega2, m, t0 })
}

/// The explicit profile of the pure `p3` system with potential `q`, for `t > 1`.
pub fn case3_profile(p3: f64, q: [f64; 3], fd: &FinalData, t: f64, x: f64) -> Result<(C64, C64)> {
    if !(p3 > 0.0) {
        return Err(Error::Precondition(format!("p3 = {p3} must be positive")));
    }
    if !(t > 1.0) {
        return Err(Error::Precondition(format!("t = {t} must exceed 1")));
    }
    let a0 = fd.at(x / (2.0 * t))?;
    let Case3Moduli { omega1, omega2, m, t0 } = case3_moduli(&a0)?;
    let (rho, d0, _, i0) = quad_data(&a0);
    let [q1, q2, q3] = q;
    let s8 = 8f64.sqrt();
    let span = SQRT_2 * p3 * rho * omega1 * t.ln();
    let u = span + t0;
    let j = jacobi(u, m)?;
    let integral = quadrature::integrate(
        |s| {
            let v = jacobi(s + t0, m).expect("modulus checked above");
            v.cn * v.cn / (1.0 + omega1 * v.dn)
        },
        0.0,
        span,
        1e-10,
        0.0,
    )?;
    let am_shift = jacobi_am(u, m)? - jacobi_am(t0, m)?;
    let arcsin_now = (omega2 / omega1 * j.sn).clamp(-1.0, 1.0).asin();
    let arcsin_start = (d0.signum() * i0 / (i0 * i0 + 2.0 * d0 * d0).sqrt()).clamp(-1.0, 1.0).asin();
    let phase = omega2 * omega2 / (s8 * omega1) * integral - 0.25 * (q1 + q3) * rho * t.ln()
        - (1.0 + (q1 - q3) / (2.0 * p3)) / s8 * am_shift
        - q2 / (s8 * p3) * (arcsin_now - arcsin_start);
    let pre = free_factor(t, x) * (a0.a1 / a0.a1.norm()) * (0.5 * rho).sqrt() * C64::from_polar(1.0, phase);
    let weight = 1.0 + omega1 * j.dn;
    Ok((pre * weight.sqrt(), pre * omega2 / weight.sqrt() * C64::new(j.cn, SQRT_2 * j.sn)))
}

/// `max √t |γ1 u1 + γ2 u2|(t, 2tξ)` over the grid nodes with `ξ` in `region`.
pub fn sync_decay(p: &StandardParams, fd: &FinalData, gamma: (C64, C64), t: f64, region: (f64, f64)) -> Result<f64> {
    if !(t > 1.0) {
        return Err(Error::Precondition(format!("t = {t} must exceed 1")));
    }
    let nodes: Vec<f64> = fd.xi_grid.iter().copied().filter(|&x| x >= region.0 && x <= region.1).collect();
    if nodes.is_empty() {
        return Err(Error::Precondition(format!("no grid node in the region [{}, {}]", region.0, region.1)));
    }
    if gamma.0 == C64::new(0.0, 0.0) && gamma.1 == C64::new(0.0, 0.0) {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for xi in nodes {
        let (u1, u2) = uapp(p, fd, t, 2.0 * t * xi)?;
        worst = worst.max(t.sqrt() * (gamma.0 * u1 + gamma.1 * u2).norm());
    }
    Ok(worst)
}
