//! The quadratic-quantity flow on the sphere `S²ρ`, the full complex ODE,
//! numerical oracles for both, fixed points, a sufficient stability test and
//! an empirical detector of nonlinear synchronization.
//!
//! With `ρ = |A1|² + |A2|²`, `D = |A1|² − |A2|²`, `R = 2 Re(Ā1A2)` and
//! `I = 2 Im(Ā1A2)` one has `ρ² = D² + R² + I²` and
//!
//! ```text
//! D' = 2I (p1 D + (p2 − p3) R) + 2ρ I p5
//! R' = 2I (−(p2 + p3) D + p1 R) − 2ρ I p4
//! I' = −2p1 (D² + R²) + 4p3 D R + 2ρ (−p5 D + p4 R)
//! ```

use crate::closed_form;
use crate::error::{Error, Result};
use crate::ode::{self, DenseTrajectory};
use crate::standard_form::{nonlinearity, StandardParams};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

/// Number of lattice points used by the multi-start searches.
pub const LATTICE_POINTS: usize = 64;

/// Eigenvalue threshold of the sufficient stability condition.
pub const STABILITY_EPS: f64 = 1e-10;

/// The quadratic quantities `(D, R, I)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct QuadState {
    pub d: f64,
    pub r: f64,
    pub i: f64,
}

impl QuadState {
    pub const fn new(d: f64, r: f64, i: f64) -> Self {
        Self { d, r, i }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.d, self.r, self.i]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self { d: a[0], r: a[1], i: a[2] }
    }

    /// Euclidean norm, equal to `ρ` on `S²ρ`.
    pub fn norm(self) -> f64 {
        (self.d * self.d + self.r * self.r + self.i * self.i).sqrt()
    }

    /// Euclidean distance to another state.
    pub fn distance(self, other: QuadState) -> f64 {
        ((self.d - other.d).powi(2) + (self.r - other.r).powi(2) + (self.i - other.i).powi(2)).sqrt()
    }

    /// `k·(D, R, I)`.
    pub fn scale(self, k: f64) -> Self {
        Self { d: k * self.d, r: k * self.r, i: k * self.i }
    }

    /// Largest componentwise deviation.
    pub fn max_abs_diff(self, other: QuadState) -> f64 {
        (self.d - other.d).abs().max((self.r - other.r).abs()).max((self.i - other.i).abs())
    }
}

/// A pair of complex amplitudes `(A1, A2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmplitudePair {
    pub a1: Complex64,
    pub a2: Complex64,
}

impl AmplitudePair {
    pub fn new(a1: Complex64, a2: Complex64) -> Self {
        Self { a1, a2 }
    }

    /// `ρ = |A1|² + |A2|²`.
    pub fn rho(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }

    /// The quadratic quantities `(D, R, I)`.
    pub fn quad(&self) -> QuadState {
        let z = self.a1.conj() * self.a2;
        QuadState { d: self.a1.norm_sqr() - self.a2.norm_sqr(), r: 2.0 * z.re, i: 2.0 * z.im }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.a1.re, self.a1.im, self.a2.re, self.a2.im]
    }

    pub fn from_array(a: [f64; 4]) -> Self {
        Self { a1: Complex64::new(a[0], a[1]), a2: Complex64::new(a[2], a[3]) }
    }

    /// Largest modulus of the componentwise difference.
    pub fn max_abs_diff(&self, other: &AmplitudePair) -> f64 {
        (self.a1 - other.a1).norm().max((self.a2 - other.a2).norm())
    }
}

/// Right-hand side of the quadratic system.
pub fn qqq_rhs(p: &StandardParams, rho: f64, s: QuadState) -> QuadState {
    let StandardParams { p1, p2, p3, p4, p5, .. } = *p;
    let QuadState { d, r, i } = s;
    QuadState {
        d: 2.0 * i * (p1 * d + (p2 - p3) * r) + 2.0 * rho * i * p5,
        r: 2.0 * i * (-(p2 + p3) * d + p1 * r) - 2.0 * rho * i * p4,
        i: -2.0 * p1 * (d * d + r * r) + 4.0 * p3 * d * r + 2.0 * rho * (-p5 * d + p4 * r),
    }
}

/// Right-hand side `(−i F1, −i F2)` of the full ODE `i A' = F(A)`.
pub fn full_ode_rhs(p: &StandardParams, a: &AmplitudePair) -> AmplitudePair {
    let (f1, f2) = nonlinearity(p, a.a1, a.a2);
    let mi = Complex64::new(0.0, -1.0);
    AmplitudePair { a1: mi * f1, a2: mi * f2 }
}

/// A numerically integrated quadratic-quantity trajectory.
#[derive(Debug, Clone)]
pub struct QuadTrajectory {
    pub rho: f64,
    inner: DenseTrajectory<3>,
}

impl QuadTrajectory {
    /// Dense-output state at `tau` (clamped into the covered span).
    pub fn eval(&self, tau: f64) -> QuadState {
        QuadState::from_array(self.inner.eval(tau))
    }

    /// Accepted-step node times.
    pub fn times(&self) -> &[f64] {
        self.inner.times()
    }

    /// Node states.
    pub fn states(&self) -> Vec<QuadState> {
        self.inner.states().iter().map(|s| QuadState::from_array(*s)).collect()
    }

    /// Largest `|√(D² + R² + I²) − ρ|` over the nodes.
    pub fn max_rho_drift(&self) -> f64 {
        self.inner.states().iter().map(|s| (QuadState::from_array(*s).norm() - self.rho).abs()).fold(0.0, f64::max)
    }
}

/// A numerically integrated amplitude trajectory.
#[derive(Debug, Clone)]
pub struct AmplitudeTrajectory {
    pub rho: f64,
    inner: DenseTrajectory<4>,
}

impl AmplitudeTrajectory {
    /// Dense-output state at `tau` (clamped into the covered span).
    pub fn eval(&self, tau: f64) -> AmplitudePair {
        AmplitudePair::from_array(self.inner.eval(tau))
    }

    /// Accepted-step node times.
    pub fn times(&self) -> &[f64] {
        self.inner.times()
    }

    /// Node states.
    pub fn states(&self) -> Vec<AmplitudePair> {
        self.inner.states().iter().map(|s| AmplitudePair::from_array(*s)).collect()
    }

    /// Largest `||A1|² + |A2|² − ρ|` over the nodes.
    pub fn max_rho_drift(&self) -> f64 {
        self.inner.states().iter().map(|s| (AmplitudePair::from_array(*s).rho() - self.rho).abs()).fold(0.0, f64::max)
    }
}

fn check_sphere(rho: f64, s0: QuadState) -> Result<()> {
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Precondition(format!("rho = {rho} must be non-negative")));
    }
    if (s0.norm() - rho).abs() > 1e-9 * rho.max(1.0) {
        return Err(Error::Precondition(format!(
            "initial state {s0:?} is not on the sphere of radius {rho}"
        )));
    }
    Ok(())
}

/// Integrates the quadratic system from `s0` at `τ = 0` over `span` (which
/// must contain 0) with local tolerance `tol`. No projection onto `S²ρ` is applied.
pub fn integrate_quad(p: &StandardParams, rho: f64, s0: QuadState, span: (f64, f64), tol: f64) -> Result<QuadTrajectory> {
    check_sphere(rho, s0)?;
    let pp = *p;
    let inner = ode::integrate(move |y: &[f64; 3]| qqq_rhs(&pp, rho, QuadState::from_array(*y)).to_array(), s0.to_array(), span, tol)?;
    Ok(QuadTrajectory { rho, inner })
}

/// Integrates the full complex ODE from `a0` at `τ = 0` over `span`.
pub fn integrate_full(p: &StandardParams, a0: AmplitudePair, span: (f64, f64), tol: f64) -> Result<AmplitudeTrajectory> {
    let pp = *p;
    let inner = ode::integrate(
        move |y: &[f64; 4]| full_ode_rhs(&pp, &AmplitudePair::from_array(*y)).to_array(),
        a0.to_array(),
        span,
        tol,
    )?;
    Ok(AmplitudeTrajectory { rho: a0.rho(), inner })
}

/// A circle of fixed points `{x ∈ S²ρ : x·n = c}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedCircle {
    pub description: String,
    /// Unit normal `n` of the plane cutting the sphere.
    pub normal: [f64; 3],
    /// Offset `c` of the plane along `n`.
    pub offset: f64,
    /// Sixteen sample points on the circle.
    pub samples: Vec<QuadState>,
}

impl FixedCircle {
    /// Builds the circle and its samples.
    pub fn new(description: impl Into<String>, normal: [f64; 3], offset: f64, rho: f64) -> Self {
        let nn = (normal[0].powi(2) + normal[1].powi(2) + normal[2].powi(2)).sqrt();
        let n = [normal[0] / nn, normal[1] / nn, normal[2] / nn];
        let radius = (rho * rho - offset * offset).max(0.0).sqrt();
        let (e1, e2) = tangent_basis(n);
        let samples = (0..16)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / 16.0;
                let (s, c) = th.sin_cos();
                QuadState::from_array(std::array::from_fn(|j| offset * n[j] + radius * (c * e1[j] + s * e2[j])))
            })
            .collect();
        Self { description: description.into(), normal: n, offset, samples }
    }

    /// Whether `s` lies on the circle within `tol`.
    pub fn contains(&self, s: QuadState, rho: f64, tol: f64) -> bool {
        let a = s.to_array();
        let dot: f64 = (0..3).map(|j| a[j] * self.normal[j]).sum();
        (dot - self.offset).abs() <= tol && (s.norm() - rho).abs() <= tol
    }
}

/// Fixed points of the quadratic flow on `S²ρ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FixedPoints {
    pub isolated: Vec<QuadState>,
    pub continua: Vec<FixedCircle>,
}

impl FixedPoints {
    /// Whether the fixed-point set is finite.
    pub fn is_finite(&self) -> bool {
        self.continua.is_empty()
    }

    /// Distance from `s` to the nearest fixed point.
    pub fn distance(&self, s: QuadState, rho: f64) -> f64 {
        let mut best = self.isolated.iter().map(|x| x.distance(s)).fold(f64::INFINITY, f64::min);
        for c in &self.continua {
            let a = s.to_array();
            let dot: f64 = (0..3).map(|j| a[j] * c.normal[j]).sum();
            let along = dot - c.offset;
            let radius = (rho * rho - c.offset * c.offset).max(0.0).sqrt();
            let perp = (s.norm().powi(2) - dot * dot).max(0.0).sqrt();
            best = best.min((along * along + (perp - radius).powi(2)).sqrt());
        }
        best
    }
}

/// Orthonormal basis of the plane orthogonal to the unit vector `n`.
fn tangent_basis(n: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let dot: f64 = (0..3).map(|j| helper[j] * n[j]).sum();
    let mut e1: [f64; 3] = std::array::from_fn(|j| helper[j] - dot * n[j]);
    let l = (e1[0].powi(2) + e1[1].powi(2) + e1[2].powi(2)).sqrt();
    e1.iter_mut().for_each(|x| *x /= l);
    let e2 = [n[1] * e1[2] - n[2] * e1[1], n[2] * e1[0] - n[0] * e1[2], n[0] * e1[1] - n[1] * e1[0]];
    (e1, e2)
}

/// `n` points of a Fibonacci lattice on `S²ρ`.
pub fn fibonacci_lattice(n: usize, rho: f64) -> Vec<QuadState> {
    let golden = PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|k| {
            let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
            let r = (1.0 - z * z).sqrt();
            let th = golden * k as f64;
            QuadState::new(rho * r * th.cos(), rho * r * th.sin(), rho * z)
        })
        .collect()
}

/// The Jacobian of the quadratic system at a point, with `ρ` held fixed.
pub fn stability_matrix(p: &StandardParams, rho: f64, s: QuadState) -> [[f64; 3]; 3] {
    let StandardParams { p1, p2, p3, p4, p5, .. } = *p;
    let QuadState { d, r, i } = s;
    [
        [2.0 * p1 * i, 2.0 * (p2 - p3) * i, 2.0 * p1 * d + 2.0 * (p2 - p3) * r + 2.0 * p5 * rho],
        [-2.0 * (p2 + p3) * i, 2.0 * p1 * i, -2.0 * (p2 + p3) * d + 2.0 * p1 * r - 2.0 * p4 * rho],
        [-4.0 * p1 * d + 4.0 * p3 * r - 2.0 * p5 * rho, -4.0 * p1 * r + 4.0 * p3 * d + 2.0 * p4 * rho, 0.0],
    ]
}

fn polish_fixed_point(p: &StandardParams, rho: f64, start: QuadState) -> Option<QuadState> {
    let scale = rho * rho * p.p_scale();
    let mut x = start;
    for _ in 0..60 {
        let f = qqq_rhs(p, rho, x).to_array();
        let fnorm = (f[0] * f[0] + f[1] * f[1] + f[2] * f[2]).sqrt();
        if fnorm <= 1e-13 * scale {
            return Some(x);
        }
        let n: [f64; 3] = std::array::from_fn(|j| x.to_array()[j] / x.norm());
        let (e1, e2) = tangent_basis(n);
        let h = stability_matrix(p, rho, x);
        let col = |e: &[f64; 3]| -> [f64; 3] { std::array::from_fn(|r| (0..3).map(|c| h[r][c] * e[c]).sum()) };
        let (a1, a2) = (col(&e1), col(&e2));
        // Least squares for δ = α e1 + β e2 minimizing |f + α a1 + β a2|.
        let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
        let (g11, g12, g22) = (dot(&a1, &a1), dot(&a1, &a2), dot(&a2, &a2));
        let (b1, b2) = (-dot(&a1, &f), -dot(&a2, &f));
        let det = g11 * g22 - g12 * g12;
        if det.abs() <= 1e-300 {
            return None;
        }
        let alpha = (b1 * g22 - b2 * g12) / det;
        let beta = (g11 * b2 - g12 * b1) / det;
        let step: [f64; 3] = std::array::from_fn(|j| alpha * e1[j] + beta * e2[j]);
        let snorm = dot(&step, &step).sqrt();
        let damp = if snorm > 0.5 * rho { 0.5 * rho / snorm } else { 1.0 };
        let moved: [f64; 3] = std::array::from_fn(|j| x.to_array()[j] + damp * step[j]);
        let m = QuadState::from_array(moved);
        x = m.scale(rho / m.norm());
    }
    let f = qqq_rhs(p, rho, x);
    if f.norm() <= 1e-10 * scale {
        Some(x)
    } else {
        None
    }
}

/// Isolated zeros of the quadratic vector field found by damped Gauss–Newton
/// iterations from a Fibonacci lattice, deduplicated at distance `1e-6·ρ`.
pub fn numeric_fixed_points(p: &StandardParams, rho: f64) -> Vec<QuadState> {
    let mut found: Vec<QuadState> = Vec::new();
    for start in fibonacci_lattice(LATTICE_POINTS, rho) {
        if let Some(x) = polish_fixed_point(p, rho, start) {
            if found.iter().all(|y| y.distance(x) > 1e-6 * rho) {
                found.push(x);
            }
        }
    }
    found.sort_by(|a, b| a.i.total_cmp(&b.i).then(a.d.total_cmp(&b.d)).then(a.r.total_cmp(&b.r)));
    found
}

/// Fixed points of the flow: the analytic sets for the classified cases and
/// a numerical multi-start search otherwise.
pub fn fixed_points(p: &StandardParams, rho: f64) -> Result<FixedPoints> {
    if !(rho > 0.0) {
        return Err(Error::Precondition(format!("rho = {rho} must be positive")));
    }
    match closed_form::case_fixed_points(p, rho) {
        Some(fp) => Ok(fp),
        None => Ok(FixedPoints { isolated: numeric_fixed_points(p, rho), continua: Vec::new() }),
    }
}

/// Outcome of the sufficient stability test.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    AsymptoticallyStableSufficient,
    Inconclusive,
}

/// Eigenvalues of the symmetric part of `H` on the tangent plane and the
/// resulting classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub point: QuadState,
    pub tangent_form_eigenvalues: [f64; 2],
    pub classification: StabilityClass,
}

/// Applies the sufficient condition `vᵀ H v < 0` on the tangent plane at a fixed point.
pub fn stability(p: &StandardParams, rho: f64, point: QuadState) -> Result<StabilityReport> {
    let residual = qqq_rhs(p, rho, point).norm();
    if residual >= 1e-8 * rho * rho * p.p_scale() || point.norm() == 0.0 {
        return Err(Error::Precondition(format!("{point:?} is not a fixed point (|rhs| = {residual:e})")));
    }
    let h = stability_matrix(p, rho, point);
    let n: [f64; 3] = std::array::from_fn(|j| point.to_array()[j] / point.norm());
    let (e1, e2) = tangent_basis(n);
    let form = |u: &[f64; 3], v: &[f64; 3]| -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            for b in 0..3 {
                s += u[a] * 0.5 * (h[a][b] + h[b][a]) * v[b];
            }
        }
        s
    };
    let (s11, s12, s22) = (form(&e1, &e1), form(&e1, &e2), form(&e2, &e2));
    let mean = 0.5 * (s11 + s22);
    let rad = (0.25 * (s11 - s22).powi(2) + s12 * s12).sqrt();
    let ev = [mean - rad, mean + rad];
    let classification = if ev[1] < -STABILITY_EPS {
        StabilityClass::AsymptoticallyStableSufficient
    } else {
        StabilityClass::Inconclusive
    };
    Ok(StabilityReport { point, tangent_form_eigenvalues: ev, classification })
}

/// The pair `(γ1, γ2)` attached to a point of the unit sphere through its
/// polar angles.
pub fn gamma_from_point(unit: QuadState) -> (Complex64, Complex64) {
    let c1 = unit.d.clamp(-1.0, 1.0);
    let phi2 = unit.i.atan2(unit.r).rem_euclid(2.0 * PI);
    let g1 = Complex64::new((1.0 - c1).max(0.0).sqrt(), 0.0);
    let g2 = -(1.0 + c1).max(0.0).sqrt() * Complex64::from_polar(1.0, -phi2);
    (g1, g2)
}

/// Integration horizon of the synchronization detector.
pub fn sync_horizon(p: &StandardParams, rho: f64) -> f64 {
    20.0 / (rho * p.p1.max(1e-3 * p.p_scale()))
}

/// Empirical synchronization detector: a unique sufficiently-stable fixed
/// point that attracts every non-equilibrium lattice start within `1e-3·ρ`.
pub fn detect_sync(p: &StandardParams, rho: f64) -> Result<Option<(QuadState, (Complex64, Complex64))>> {
    let fps = fixed_points(p, rho)?;
    if !fps.is_finite() {
        return Ok(None);
    }
    let stable: Vec<QuadState> = fps
        .isolated
        .iter()
        .filter_map(|x| stability(p, rho, *x).ok())
        .filter(|r| r.classification == StabilityClass::AsymptoticallyStableSufficient)
        .map(|r| r.point)
        .collect();
    let [candidate] = stable.as_slice() else {
        return Ok(None);
    };
    let horizon = sync_horizon(p, rho);
    for start in fibonacci_lattice(LATTICE_POINTS, rho) {
        if fps.distance(start, rho) <= 1e-6 * rho {
            continue;
        }
        let traj = integrate_quad(p, rho, start, (0.0, horizon), 1e-9)?;
        if traj.eval(horizon).distance(*candidate) > 1e-3 * rho {
            return Ok(None);
        }
    }
    Ok(Some((*candidate, gamma_from_point(candidate.scale(1.0 / rho)))))
}

/// Formats a number with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV with header `tau,D,R,I`.
pub fn quad_csv(rows: &[(f64, QuadState)]) -> String {
    let mut out = String::from("tau,D,R,I\n");
    for (t, s) in rows {
        let _ = writeln!(out, "{},{},{},{}", fmt17(*t), fmt17(s.d), fmt17(s.r), fmt17(s.i));
    }
    out
}

/// CSV with header `tau,re_a1,im_a1,re_a2,im_a2`.
pub fn amplitude_csv(rows: &[(f64, AmplitudePair)]) -> String {
    let mut out = String::from("tau,re_a1,im_a1,re_a2,im_a2\n");
    for (t, a) in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt17(*t),
            fmt17(a.a1.re),
            fmt17(a.a1.im),
            fmt17(a.a2.re),
            fmt17(a.a2.im)
        );
    }
    out
}
