//! Exact solutions of the quadratic system in the fifteen integrable cases.
//!
//! [`classify`] assigns a case to a standard parameter set and
//! [`solve_case`] builds an evaluable closed form from an initial state on
//! `S²ρ`. Cases 3 and 7 reduce to the first auxiliary lemma, Case 8 to the
//! second and Cases 9 and 10 to the third.

mod lemmas;

pub use lemmas::{solve_lemma1, solve_lemma2, solve_lemma3, TripleSolution, BRANCH_TOL};

use crate::elliptic::argument_from_sn_cn;
use crate::error::{Error, Result};
use crate::quadratic_flow::{qqq_rhs, FixedCircle, FixedPoints, QuadState};
use crate::standard_form::StandardParams;
use lemmas::{clamp_parameter, jac};
use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

/// Relative tolerance of the special parameter relations of Cases 7 and 11–15.
pub const RELATION_TOL: f64 = 1e-12;

/// The integrable cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Case {
    Case1,
    Case2,
    Case3,
    Case4,
    Case5,
    Case6,
    Case7,
    Case8,
    Case9,
    Case10,
    Case11,
    Case12,
    Case13,
    Case14,
    Case15,
    Unsupported,
}

impl Case {
    /// The case number, `None` for [`Case::Unsupported`].
    pub fn number(self) -> Option<u8> {
        use Case::*;
        Some(match self {
            Case1 => 1,
            Case2 => 2,
            Case3 => 3,
            Case4 => 4,
            Case5 => 5,
            Case6 => 6,
            Case7 => 7,
            Case8 => 8,
            Case9 => 9,
            Case10 => 10,
            Case11 => 11,
            Case12 => 12,
            Case13 => 13,
            Case14 => 14,
            Case15 => 15,
            Unsupported => return None,
        })
    }
}

impl fmt::Display for Case {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "Case {n}"),
            None => write!(f, "Unsupported"),
        }
    }
}

/// Position of one parameter relative to a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    Above,
    Threshold,
    Below,
}

/// Ratio `p1/p3` in Case 11.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Case11Ratio {
    Third,
    One,
    Three,
    Other(f64),
}

/// Parameter-level discriminant of a case.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Subcase {
    Generic,
    /// Case 6: `p1` compared with `p4`.
    Case6(Regime),
    /// Case 7: `p2` compared with `±p3` (`Below` is `p2 < −p3`, `Threshold`
    /// the band `|p2| < p3`, `Above` is `p2 > p3`).
    Case7(Regime),
    Case11(Case11Ratio),
}

/// A case together with its parameter-level subcase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseId {
    pub case: Case,
    pub subcase: Subcase,
}

impl CaseId {
    fn generic(case: Case) -> Self {
        Self { case, subcase: Subcase::Generic }
    }
}

fn near(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= RELATION_TOL * scale
}

/// Assigns the first matching case, pure cases before mixed ones before the
/// special relations.
pub fn classify(p: &StandardParams) -> Result<CaseId> {
    let [p1, p2, p3, p4, p5] = p.p();
    if p.p().iter().all(|&x| x == 0.0) {
        return Err(Error::Trivial);
    }
    let z = |x: f64| x == 0.0;
    let scale = p.p_scale();
    let id = |c| Ok(CaseId::generic(c));
    // Pure cases.
    if p1 > 0.0 && z(p2) && z(p3) && z(p4) && z(p5) {
        return id(Case::Case1);
    }
    if z(p1) && !z(p2) && z(p3) && z(p4) && z(p5) {
        return id(Case::Case2);
    }
    if z(p1) && z(p2) && p3 > 0.0 && z(p4) && z(p5) {
        return id(Case::Case3);
    }
    if z(p1) && z(p2) && z(p3) && !z(p4) && z(p5) {
        return id(Case::Case4);
    }
    // Mixed pairs.
    if p1 > 0.0 && !z(p2) && z(p3) && z(p4) && z(p5) {
        return id(Case::Case5);
    }
    if p1 > 0.0 && z(p2) && z(p3) && p4 > 0.0 && z(p5) {
        let regime = if near(p1, p4, scale) {
            Regime::Threshold
        } else if p1 > p4 {
            Regime::Above
        } else {
            Regime::Below
        };
        return Ok(CaseId { case: Case::Case6, subcase: Subcase::Case6(regime) });
    }
    if z(p1) && !z(p2) && p3 > 0.0 && z(p4) && z(p5) {
        if near(p2.abs(), p3, scale) {
            return id(Case::Unsupported);
        }
        let regime = if p2 < -p3 {
            Regime::Below
        } else if p2 > p3 {
            Regime::Above
        } else {
            Regime::Threshold
        };
        return Ok(CaseId { case: Case::Case7, subcase: Subcase::Case7(regime) });
    }
    if z(p1) && !z(p2) && z(p3) && !z(p4) && z(p5) {
        return id(Case::Case8);
    }
    if z(p1) && z(p2) && p3 > 0.0 && p4 > 0.0 && z(p5) {
        return id(Case::Case9);
    }
    if z(p1) && z(p2) && p3 > 0.0 && z(p4) && p5 > 0.0 {
        return id(Case::Case10);
    }
    // Special relations.
    if p1 > 0.0 && z(p2) && p3 > 0.0 && z(p4) && z(p5) {
        let ratio = if near(p1, p3, scale) {
            Case11Ratio::One
        } else if near(p1, 3.0 * p3, scale) {
            Case11Ratio::Three
        } else if near(3.0 * p1, p3, scale) {
            Case11Ratio::Third
        } else {
            Case11Ratio::Other(p1 / p3)
        };
        return Ok(CaseId { case: Case::Case11, subcase: Subcase::Case11(ratio) });
    }
    if z(p1) && p2 > 0.0 && near(p2, p3, scale) && !z(p4) && z(p5) {
        return id(Case::Case12);
    }
    if z(p1) && p2 < 0.0 && near(p2, -p3, scale) && z(p4) && p5 > 0.0 {
        return id(Case::Case13);
    }
    let pythagorean = near(p1 * p1 + p2 * p2, p3 * p3, scale * scale);
    if p1 > 0.0 && !z(p2) && pythagorean && z(p4) && z(p5) {
        return id(Case::Case14);
    }
    if p1 > 0.0 && !z(p2) && pythagorean && !z(p4) && p5 > 0.0 && near(p5 * (p2 + p3), p1 * p4, scale * scale) {
        return id(Case::Case15);
    }
    id(Case::Unsupported)
}

type QuadFn = Arc<dyn Fn(f64) -> QuadState + Send + Sync>;

/// An evaluable exact solution of the quadratic system.
#[derive(Clone)]
pub struct ClosedFormSolution {
    pub case: CaseId,
    pub rho: f64,
    /// Short name of the formula branch in use.
    pub branch: &'static str,
    /// Named constants of the branch (τ₀, t₀, m₀, θ, ξ, amplitudes).
    pub constants: Vec<(&'static str, f64)>,
    eval: QuadFn,
}

impl fmt::Debug for ClosedFormSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedFormSolution")
            .field("case", &self.case)
            .field("rho", &self.rho)
            .field("branch", &self.branch)
            .field("constants", &self.constants)
            .finish()
    }
}

impl ClosedFormSolution {
    fn new(
        case: CaseId,
        rho: f64,
        branch: &'static str,
        constants: Vec<(&'static str, f64)>,
        eval: impl Fn(f64) -> QuadState + Send + Sync + 'static,
    ) -> Self {
        Self { case, rho, branch, constants, eval: Arc::new(eval) }
    }

    fn from_triple(case: CaseId, rho: f64, sol: TripleSolution, back: impl Fn([f64; 3]) -> QuadState + Send + Sync + 'static) -> Self {
        let branch = sol.branch;
        let constants = sol.constants.clone();
        Self::new(case, rho, branch, constants, move |t| back(sol.eval(t)))
    }

    /// The state at `tau`.
    pub fn eval(&self, tau: f64) -> QuadState {
        (self.eval)(tau)
    }

    /// Looks up a named constant.
    pub fn constant_named(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// `n ≥ 2` equally spaced samples over `span`.
    pub fn sample(&self, span: (f64, f64), n: usize) -> Vec<(f64, QuadState)> {
        let n = n.max(2);
        (0..n)
            .map(|k| {
                let t = span.0 + (span.1 - span.0) * k as f64 / (n - 1) as f64;
                (t, self.eval(t))
            })
            .collect()
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

/// `(cosh x, sinh x) · e^{−|x|}` together with `|x|`.
fn scaled_cosh_sinh(x: f64) -> (f64, f64) {
    let e = (-2.0 * x.abs()).exp();
    (0.5 * (1.0 + e), 0.5 * sign(x) * (1.0 - e))
}

/// Builds the exact solution through `s0` at `τ = 0`.
pub fn solve_case(p: &StandardParams, rho: f64, s0: QuadState) -> Result<ClosedFormSolution> {
    let id = classify(p)?;
    if !(rho >= 0.0) || !rho.is_finite() {
        return Err(Error::Precondition(format!("rho = {rho} must be non-negative")));
    }
    if (s0.norm() - rho).abs() > 1e-9 * rho.max(f64::MIN_POSITIVE) && !(rho == 0.0 && s0.norm() == 0.0) {
        return Err(Error::Precondition(format!("initial state {s0:?} is not on the sphere of radius {rho}")));
    }
    match id.case {
        Case::Unsupported => {
            return Err(Error::Unsupported(
                "no closed form for these parameters; integrate the quadratic system numerically instead".into(),
            ))
        }
        Case::Case11 => {
            if let Subcase::Case11(Case11Ratio::Other(r)) = id.subcase {
                return Err(Error::UnsupportedRatio(r));
            }
        }
        _ => {}
    }
    let rhs = qqq_rhs(p, rho, s0);
    if rho == 0.0 || rhs.norm() <= 1e-14 * rho * rho * p.p_scale() {
        return Ok(ClosedFormSolution::new(id, rho, "fixed point", Vec::new(), move |_| s0));
    }
    let [p1, p2, p3, p4, p5] = p.p();
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    Ok(match id.case {
        Case::Case1 => synchronizing(id, p1, 0.0, rho, s0),
        Case::Case5 => synchronizing(id, p1, p2, rho, s0),
        Case::Case2 => {
            let w = 2.0 * p2 * i0;
            ClosedFormSolution::new(id, rho, "rotation", vec![("omega", w)], move |t| {
                let (s, c) = (w * t).sin_cos();
                QuadState::new(d0 * c + r0 * s, -d0 * s + r0 * c, i0)
            })
        }
        Case::Case4 => rotation_about_d(id, rho, 2.0 * p4 * rho, s0),
        Case::Case12 => rotation_about_d(id, rho, 2.0 * (2.0 * p3 * d0 + p4 * rho), s0),
        Case::Case13 => {
            let w = 2.0 * (2.0 * p3 * r0 - p5 * rho);
            ClosedFormSolution::new(id, rho, "rotation", vec![("omega", w)], move |t| {
                let (s, c) = (w * t).sin_cos();
                QuadState::new(d0 * c - i0 * s, r0, d0 * s + i0 * c)
            })
        }
        Case::Case3 => {
            let k = 8f64.sqrt() * p3;
            let sol = solve_lemma1(2.0 * p3 * i0, k * r0, k * d0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| QuadState::new(h / k, g / k, f / (2.0 * p3)))
        }
        Case::Case7 => case7(id, p2, p3, rho, s0)?,
        Case::Case6 => case6(id, p1, p4, rho, s0),
        Case::Case8 => {
            let a = 4.0 * p2 * p4 * rho;
            let b = 4.0 * p4 * rho;
            let sol = solve_lemma2(a * r0, b * (p2 * d0 + p4 * rho), -2.0 * p2 * i0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| {
                QuadState::new((g / b - p4 * rho) / p2, f / a, -h / (2.0 * p2))
            })
        }
        Case::Case9 => {
            let eta = SQRT_2 * p4 * rho;
            let c = 2.0 * SQRT_2;
            let sol = solve_lemma3(eta, c * (p3 * d0 + 0.5 * p4 * rho), 2.0 * p3 * i0, c * p3 * r0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| {
                QuadState::new((f / c - 0.5 * p4 * rho) / p3, h / (c * p3), g / (2.0 * p3))
            })
        }
        Case::Case10 => {
            let eta = SQRT_2 * p5 * rho;
            let c = 2.0 * SQRT_2;
            let sol = solve_lemma3(eta, -c * (p3 * r0 - 0.5 * p5 * rho), -2.0 * p3 * i0, c * p3 * d0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| {
                QuadState::new(h / (c * p3), (-f / c + 0.5 * p5 * rho) / p3, -g / (2.0 * p3))
            })
        }
        Case::Case11 => match id.subcase {
            Subcase::Case11(Case11Ratio::One) => case11_one(id, p1, rho, s0),
            Subcase::Case11(Case11Ratio::Three) => case11_three(id, p3, rho, s0),
            _ => case11_third(id, p3, rho, s0)?,
        },
        Case::Case14 => case14_15(id, p, rho, s0, false),
        Case::Case15 => case14_15(id, p, rho, s0, true),
        Case::Unsupported => unreachable!("handled above"),
    })
}

/// Cases 1 and 5: the `(D, R)` plane contracts while rotating at rate `p2/p1`
/// in the logarithm of the contraction factor.
fn synchronizing(id: CaseId, p1: f64, p2: f64, rho: f64, s0: QuadState) -> ClosedFormSolution {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let n0 = d0.hypot(r0);
    let phi0 = r0.atan2(d0);
    let ratio = p2 / p1;
    let tau0 = (i0 / rho).atanh();
    ClosedFormSolution::new(id, rho, "hyperbolic", vec![("tau0", tau0), ("phi0", phi0)], move |t| {
        let x = 2.0 * p1 * rho * t;
        let (c, s) = scaled_cosh_sinh(x);
        // L(τ) = (ρ − I0) e^{x} + (ρ + I0) e^{−x} = 2e^{|x|}(ρ c − I0 s).
        let l_scaled = 2.0 * (rho * c - i0 * s);
        let log_l = x.abs() + l_scaled.ln();
        let contraction = 2.0 * rho * (-x.abs()).exp() / l_scaled;
        let i = 2.0 * rho * (i0 * c - rho * s) / l_scaled;
        if ratio == 0.0 {
            QuadState::new(d0 * contraction, r0 * contraction, i)
        } else {
            let phi = phi0 + ratio * (log_l - (2.0 * rho).ln());
            QuadState::new(n0 * contraction * phi.cos(), n0 * contraction * phi.sin(), i)
        }
    })
}

fn rotation_about_d(id: CaseId, rho: f64, w: f64, s0: QuadState) -> ClosedFormSolution {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    ClosedFormSolution::new(id, rho, "rotation", vec![("omega", w)], move |t| {
        let (s, c) = (w * t).sin_cos();
        QuadState::new(d0, r0 * c - i0 * s, r0 * s + i0 * c)
    })
}

fn case7(id: CaseId, p2: f64, p3: f64, rho: f64, s0: QuadState) -> Result<ClosedFormSolution> {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let Subcase::Case7(regime) = id.subcase else { unreachable!("case 7 carries its regime") };
    Ok(match regime {
        Regime::Below => {
            let (a, b, c) = ((8.0 * p3 * (p2 + p3).abs()).sqrt(), (8.0 * p3 * (p3 - p2)).sqrt(), 2.0 * (p2 * p2 - p3 * p3).sqrt());
            let sol = solve_lemma1(-a * d0, b * r0, c * i0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| QuadState::new(-f / a, g / b, h / c))
        }
        Regime::Threshold => {
            let (a, b, c) = (2.0 * (p3 * p3 - p2 * p2).sqrt(), (8.0 * p3 * (p3 - p2)).sqrt(), (8.0 * p3 * (p2 + p3)).sqrt());
            let sol = solve_lemma1(a * i0, b * r0, c * d0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| QuadState::new(h / c, g / b, f / a))
        }
        Regime::Above => {
            let (a, b, c) = ((8.0 * p3 * (p2 - p3)).sqrt(), (8.0 * p3 * (p2 + p3)).sqrt(), 2.0 * (p2 * p2 - p3 * p3).sqrt());
            let sol = solve_lemma1(-a * r0, b * d0, c * i0)?;
            ClosedFormSolution::from_triple(id, rho, sol, move |[f, g, h]| QuadState::new(g / b, -f / a, h / c))
        }
    })
}

fn case6(id: CaseId, p1: f64, p4: f64, rho: f64, s0: QuadState) -> ClosedFormSolution {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let Subcase::Case6(regime) = id.subcase else { unreachable!("case 6 carries its regime") };
    let a = p4 / p1;
    match regime {
        Regime::Above => {
            let s = (1.0 - a * a).sqrt();
            let c = a * (a * rho - r0);
            let w = ((a * rho - r0).powi(2) + s * s * d0 * d0).sqrt();
            let kappa = 2.0 * p1 * rho * s;
            let tau0 = (s * i0 / w).asinh();
            ClosedFormSolution::new(id, rho, "p1>p4", vec![("tau0", tau0), ("kappa", kappa)], move |t| {
                let y = kappa * t - tau0;
                let sech = 1.0 / y.cosh();
                let den = w - c * sech;
                QuadState::new(
                    s * s * rho * d0 * sech / den,
                    a * rho + s * s * rho * (r0 - a * rho) * sech / den,
                    -rho * s * w * y.tanh() / den,
                )
            })
        }
        Regime::Threshold => {
            let dd = rho - r0;
            ClosedFormSolution::new(id, rho, "p1=p4", Vec::new(), move |t| {
                let delta = 2.0 * p1 * rho * dd * t - i0;
                let den = delta * delta + 2.0 * rho * dd - i0 * i0;
                QuadState::new(2.0 * rho * dd * d0 / den, rho - 2.0 * rho * dd * dd / den, -2.0 * rho * dd * delta / den)
            })
        }
        Regime::Below => {
            let s = (a * a - 1.0).sqrt();
            let c = a * (a * rho - r0);
            let w = ((a * rho - r0).powi(2) - s * s * d0 * d0).max(0.0).sqrt();
            let kappa = 2.0 * p1 * rho * s;
            let tau0 = (s * i0 / w).atan2((c - s * s * rho) / w);
            ClosedFormSolution::new(id, rho, "p1<p4", vec![("tau0", tau0), ("kappa", kappa)], move |t| {
                let (sn, cs) = (kappa * t - tau0).sin_cos();
                let den = c - w * cs;
                QuadState::new(
                    s * s * rho * d0 / den,
                    a * rho + s * s * rho * (r0 - a * rho) / den,
                    -rho * s * w * sn / den,
                )
            })
        }
    }
}

/// `p1 = p3`: `D + R` is conserved and `(D − R, I)` follows the Case 1 law.
fn case11_one(id: CaseId, p1: f64, rho: f64, s0: QuadState) -> ClosedFormSolution {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let u = d0 + r0;
    let v0 = d0 - r0;
    let r = (0.5 * v0 * v0 + i0 * i0).sqrt();
    let kappa = 4.0 * p1 * r;
    let tau0 = -(i0 / r).atanh();
    ClosedFormSolution::new(id, rho, "p1=p3", vec![("tau0", tau0), ("r", r)], move |t| {
        let y = kappa * t;
        let (c, s) = scaled_cosh_sinh(y);
        let den = c - (i0 / r) * s;
        let v = v0 * (-y.abs()).exp() / den;
        QuadState::new(0.5 * (u + v), 0.5 * (u - v), (i0 * c - r * s) / den)
    })
}

/// `p1 = 3p3`.
fn case11_three(id: CaseId, p3: f64, rho: f64, s0: QuadState) -> ClosedFormSolution {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let u0 = d0 + r0;
    let v0 = d0 - r0;
    let q = (8.0 * rho * rho * v0 * v0 + u0.powi(4)).sqrt();
    let tau0 = (-4.0 * rho * i0 / q).asinh();
    ClosedFormSolution::new(id, rho, "p1=3p3", vec![("tau0", tau0), ("Q", q)], move |t| {
        let y = 8.0 * p3 * rho * t + tau0;
        let den = q * y.cosh() + u0 * u0;
        let first = 0.5 * u0 * 2.0 * rho / den.sqrt();
        let second = 0.5 * v0 * 4.0 * rho * rho / den;
        QuadState::new(first + second, first - second, -rho * q * y.sinh() / den)
    })
}

/// Real roots `α < β < γ` of `c₊w³ − ρ²w + c₋ = 0` by the trigonometric
/// formula, each polished by Newton steps.
fn cubic_roots(cp: f64, cm: f64, rho2: f64) -> [f64; 3] {
    let p = -rho2 / cp;
    let q = cm / cp;
    let amp = 2.0 * (-p / 3.0).sqrt();
    let arg = ((3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt()).clamp(-1.0, 1.0);
    let phi = arg.acos() / 3.0;
    let mut roots: [f64; 3] = std::array::from_fn(|k| amp * (phi - 2.0 * PI * k as f64 / 3.0).cos());
    for w in roots.iter_mut() {
        for _ in 0..3 {
            let f = *w * *w * *w + p * *w + q;
            let df = 3.0 * *w * *w + p;
            if df != 0.0 {
                *w -= f / df;
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots
}

/// `p1 = p3/3`: with `u = D + R`, `v = D − R` one has `u = u0 W^{−1/2}` and
/// `v = v0 W` for a scalar `W` with `W(0) = 1`.
fn case11_third(id: CaseId, p3: f64, rho: f64, s0: QuadState) -> Result<ClosedFormSolution> {
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let u0 = d0 + r0;
    let v0 = d0 - r0;
    let cp = 0.5 * v0 * v0;
    let cm = 0.5 * u0 * u0;
    let zero_tol = (BRANCH_TOL * rho).powi(2);
    let from_w = move |w: f64, i: f64| {
        let first = 0.5 * u0 / w.sqrt();
        let second = 0.5 * v0 * w;
        QuadState::new(first + second, first - second, i)
    };
    if cp <= zero_tol && cm <= zero_tol {
        return Ok(ClosedFormSolution::new(id, rho, "c+=c-=0", Vec::new(), move |_| s0));
    }
    if cp <= zero_tol {
        let kappa = 4.0 / 3.0 * p3 * rho;
        let tau0 = (i0 / rho).atanh();
        return Ok(ClosedFormSolution::new(id, rho, "c+=0<c-", vec![("tau0", tau0)], move |t| {
            let y = kappa * t;
            let (c, s) = scaled_cosh_sinh(y);
            let den = c + (i0 / rho) * s;
            let d = d0 * (-y.abs()).exp() / den;
            QuadState::new(d, d, (rho * s + i0 * c) / den)
        }));
    }
    if cm <= zero_tol {
        let kappa = 8.0 / 3.0 * p3 * rho;
        let tau0 = (i0 / rho).atanh();
        return Ok(ClosedFormSolution::new(id, rho, "c-=0<c+", vec![("tau0", tau0)], move |t| {
            let y = kappa * t;
            let (c, s) = scaled_cosh_sinh(y);
            let den = c - (i0 / rho) * s;
            let d = d0 * (-y.abs()).exp() / den;
            QuadState::new(d, -d, (i0 * c - rho * s) / den)
        }));
    }
    if i0.abs() <= 1e-12 * rho {
        let disc = (cp * (cp + 4.0 * cm)).sqrt() / (2.0 * cp);
        let alpha = -0.5 - disc;
        let other = -0.5 + disc;
        if (2.0 * cp - cm).abs() <= BRANCH_TOL * (cp + cm) {
            return Ok(ClosedFormSolution::new(id, rho, "I0=0, 2c+=c-", Vec::new(), move |_| s0));
        }
        if 2.0 * cp > cm {
            let beta = other;
            let m = clamp_parameter(-alpha * (1.0 - beta) / (beta - alpha))?;
            let kappa = 4.0 / 3.0 * p3 * (cp * (beta - alpha)).sqrt();
            let amp = (cp / (beta - alpha)).sqrt() * beta * (1.0 - alpha) * (1.0 - beta);
            return Ok(ClosedFormSolution::new(
                id,
                rho,
                "I0=0, 2c+>c-",
                vec![("alpha", alpha), ("beta", beta), ("m", m)],
                move |t| {
                    let j = jac(kappa * t, m);
                    let den = 1.0 - (1.0 - beta) * j.cd * j.cd;
                    from_w(beta / den, -amp * j.cd * j.sd * j.nd / den)
                },
            ));
        }
        let gamma = other;
        let m = clamp_parameter((gamma - 1.0) * (-alpha) / (gamma * (1.0 - alpha)))?;
        let lam = (cp * gamma * (1.0 - alpha)).sqrt();
        let kappa = 4.0 / 3.0 * p3 * lam;
        return Ok(ClosedFormSolution::new(
            id,
            rho,
            "I0=0, 2c+<c-",
            vec![("alpha", alpha), ("gamma", gamma), ("m", m)],
            move |t| {
                let j = jac(kappa * t, m);
                let den = gamma - (gamma - 1.0) * j.sn * j.sn;
                from_w(gamma / den, lam * (gamma - 1.0) * j.sn * j.cn * j.dn / den)
            },
        ));
    }
    let [alpha, beta, gamma] = cubic_roots(cp, cm, rho * rho);
    if !(alpha < 0.0 && 0.0 < beta && beta < 1.0 && 1.0 < gamma) {
        return Err(Error::Internal(format!("cubic roots {alpha}, {beta}, {gamma} out of order")));
    }
    let m = clamp_parameter((gamma - beta) * (-alpha) / (gamma * (beta - alpha)))?;
    let lam = (cp * gamma * (beta - alpha)).sqrt();
    let kappa = 4.0 / 3.0 * p3 * lam;
    let s = sign(i0) * (gamma * (1.0 - beta) / (gamma - beta)).sqrt();
    let c = (beta * (gamma - 1.0) / (gamma - beta)).sqrt();
    let tau0 = argument_from_sn_cn(s, c, m)?;
    Ok(ClosedFormSolution::new(
        id,
        rho,
        "c+,c->0, I0!=0",
        vec![("alpha", alpha), ("beta", beta), ("gamma", gamma), ("m", m), ("tau0", tau0)],
        move |t| {
            let j = jac(kappa * t + tau0, m);
            let den = gamma - (gamma - beta) * j.sn * j.sn;
            from_w(beta * gamma / den, lam * (gamma - beta) * j.sn * j.cn * j.dn / den)
        },
    ))
}

/// Cases 14 and 15 through the conserved `X = D/(2 sin Θ) + R/(2 cos Θ)`.
fn case14_15(id: CaseId, p: &StandardParams, rho: f64, s0: QuadState, shifted: bool) -> ClosedFormSolution {
    let [p1, p2, p3, p4, p5] = p.p();
    let QuadState { d: d0, r: r0, i: i0 } = s0;
    let theta = (p1 / (p2 + p3)).atan();
    let (sn, cs) = theta.sin_cos();
    let (x_shift, y_shift, d_shift, r_shift, level) = if shifted {
        (
            p2 * p4 / (2.0 * p1 * p3 * cs) * rho,
            -p4 / (2.0 * p1 * cs) * rho,
            -p5 / (2.0 * p1) * rho,
            p4 / (2.0 * p1) * rho,
            (1.0 - p4 * p4 / (4.0 * p3 * p3 * cs * cs)) * rho * rho,
        )
    } else {
        (0.0, 0.0, 0.0, 0.0, rho * rho)
    };
    let x = d0 / (2.0 * sn) + r0 / (2.0 * cs) + x_shift;
    let y = -d0 / (2.0 * sn) + r0 / (2.0 * cs) + y_shift;
    let r = (level - x * x).abs().sqrt();
    let centre = x - x_shift;
    let lam = i0 * i0 + y * y;
    let consts = vec![("Theta", theta), ("X", x), ("Y", y), ("r", r)];
    let out = move |frac: f64, i: f64| {
        QuadState::new(sn * (centre - frac) + d_shift, cs * (centre + frac) + r_shift, i)
    };
    let disc = level - x * x;
    if disc.abs() <= BRANCH_TOL * level.abs().max(x * x) {
        return ClosedFormSolution::new(id, rho, "|X| at threshold", consts, move |t| {
            let delta = 2.0 * p1 * t * lam - i0;
            let den = delta * delta + y * y;
            out(lam * y / den, -lam * delta / den)
        });
    }
    if disc > 0.0 {
        let (ap, am) = ((r - i0).powi(2) + y * y, (r + i0).powi(2) + y * y);
        return ClosedFormSolution::new(id, rho, "|X| below threshold", consts, move |t| {
            let z = 4.0 * p1 * r * t;
            let (ep, em) = (z.exp(), (-z).exp());
            let den = ap * ep + am * em - 2.0 * i0 * i0 - 2.0 * y * y + 2.0 * r * r;
            out(4.0 * r * r * y / den, -r * (ap * ep - am * em) / den)
        });
    }
    ClosedFormSolution::new(id, rho, "|X| above threshold", consts, move |t| {
        let (s, c) = (4.0 * p1 * r * t).sin_cos();
        let den = (lam + r * r) - 2.0 * r * i0 * s - (lam - r * r) * c;
        out(2.0 * r * r * y / den, r * (2.0 * r * i0 * c - (lam - r * r) * s) / den)
    })
}

fn dedup(points: Vec<QuadState>, rho: f64) -> Vec<QuadState> {
    let mut out: Vec<QuadState> = Vec::new();
    for p in points {
        if out.iter().all(|q| q.distance(p) > 1e-9 * rho) {
            out.push(p);
        }
    }
    out
}

fn axes(rho: f64) -> Vec<QuadState> {
    vec![
        QuadState::new(rho, 0.0, 0.0),
        QuadState::new(-rho, 0.0, 0.0),
        QuadState::new(0.0, rho, 0.0),
        QuadState::new(0.0, -rho, 0.0),
        QuadState::new(0.0, 0.0, rho),
        QuadState::new(0.0, 0.0, -rho),
    ]
}

/// Fixed-point sets known in closed form, `None` for cases whose
/// closed forms do not list them.
pub fn case_fixed_points(p: &StandardParams, rho: f64) -> Option<FixedPoints> {
    let id = classify(p).ok()?;
    let [p1, p2, p3, p4, p5] = p.p();
    let poles = vec![QuadState::new(0.0, 0.0, rho), QuadState::new(0.0, 0.0, -rho)];
    let d_axis = vec![QuadState::new(rho, 0.0, 0.0), QuadState::new(-rho, 0.0, 0.0)];
    let r_axis = vec![QuadState::new(0.0, rho, 0.0), QuadState::new(0.0, -rho, 0.0)];
    let isolated = |v: Vec<QuadState>| Some(FixedPoints { isolated: dedup(v, rho), continua: Vec::new() });
    match id.case {
        Case::Case1 | Case::Case5 => isolated(poles),
        Case::Case2 => Some(FixedPoints {
            isolated: poles,
            continua: vec![FixedCircle::new("I = 0", [0.0, 0.0, 1.0], 0.0, rho)],
        }),
        Case::Case3 | Case::Case7 => isolated(axes(rho)),
        Case::Case4 => isolated(d_axis),
        Case::Case6 => {
            let Subcase::Case6(regime) = id.subcase else { return None };
            match regime {
                Regime::Above => {
                    let a = p4 / p1;
                    let s = (1.0 - a * a).sqrt();
                    isolated(vec![QuadState::new(0.0, a * rho, rho * s), QuadState::new(0.0, a * rho, -rho * s)])
                }
                Regime::Threshold => isolated(vec![QuadState::new(0.0, rho, 0.0)]),
                Regime::Below => {
                    let a = p1 / p4;
                    let s = (1.0 - a * a).sqrt();
                    isolated(vec![QuadState::new(rho * s, a * rho, 0.0), QuadState::new(-rho * s, a * rho, 0.0)])
                }
            }
        }
        Case::Case8 => {
            let mut v = d_axis;
            if p2.abs() >= p4.abs() {
                let a = p4 / p2;
                let s = (1.0 - a * a).max(0.0).sqrt();
                v.push(QuadState::new(-a * rho, 0.0, s * rho));
                v.push(QuadState::new(-a * rho, 0.0, -s * rho));
            }
            isolated(v)
        }
        Case::Case9 => {
            let mut v = d_axis;
            if p4 <= 2.0 * p3 {
                let a = p4 / (2.0 * p3);
                let s = (1.0 - a * a).max(0.0).sqrt();
                v.push(QuadState::new(-a * rho, s * rho, 0.0));
                v.push(QuadState::new(-a * rho, -s * rho, 0.0));
            }
            if p4 <= p3 {
                let a = p4 / p3;
                let s = (1.0 - a * a).max(0.0).sqrt();
                v.push(QuadState::new(-a * rho, 0.0, s * rho));
                v.push(QuadState::new(-a * rho, 0.0, -s * rho));
            }
            isolated(v)
        }
        Case::Case10 => {
            let mut v = r_axis;
            if p5 <= 2.0 * p3 {
                let a = p5 / (2.0 * p3);
                let s = (1.0 - a * a).max(0.0).sqrt();
                v.push(QuadState::new(s * rho, a * rho, 0.0));
                v.push(QuadState::new(-s * rho, a * rho, 0.0));
            }
            if p5 <= p3 {
                let a = p5 / p3;
                let s = (1.0 - a * a).max(0.0).sqrt();
                v.push(QuadState::new(0.0, a * rho, s * rho));
                v.push(QuadState::new(0.0, a * rho, -s * rho));
            }
            isolated(v)
        }
        Case::Case11 => match id.subcase {
            Subcase::Case11(Case11Ratio::One) => Some(FixedPoints {
                isolated: Vec::new(),
                continua: vec![FixedCircle::new("D = R", [FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0], 0.0, rho)],
            }),
            Subcase::Case11(Case11Ratio::Three) => isolated(poles),
            Subcase::Case11(Case11Ratio::Third) => {
                let (a, b) = ((SQRT_2 - 1.0) / 6f64.sqrt() * rho, (SQRT_2 + 1.0) / 6f64.sqrt() * rho);
                let mut v = poles;
                v.extend([
                    QuadState::new(a, b, 0.0),
                    QuadState::new(-a, -b, 0.0),
                    QuadState::new(b, a, 0.0),
                    QuadState::new(-b, -a, 0.0),
                ]);
                isolated(v)
            }
            _ => None,
        },
        Case::Case12 => {
            let mut continua = Vec::new();
            if 2.0 * p3 > p4.abs() {
                continua.push(FixedCircle::new("D = -p4 rho / (2 p3)", [1.0, 0.0, 0.0], -p4 / (2.0 * p3) * rho, rho));
            }
            Some(FixedPoints { isolated: d_axis, continua })
        }
        Case::Case13 => {
            let mut continua = Vec::new();
            if 2.0 * p3 > p5 {
                continua.push(FixedCircle::new("R = p5 rho / (2 p3)", [0.0, 1.0, 0.0], p5 / (2.0 * p3) * rho, rho));
            }
            Some(FixedPoints { isolated: r_axis, continua })
        }
        Case::Case14 | Case::Case15 | Case::Unsupported => None,
    }
}
