//! Exact solutions of the three auxiliary elliptic systems
//!
//! ```text
//! (1)  f' = gh,   g' = −fh,  h' = −fg
//! (2)  f' = gh,   g' = −fh,  h' = −f
//! (3)  f' = −gh,  g' = fh,   h' = −(f + η) g        (η > 0)
//! ```
//!
//! Every solver returns a [`TripleSolution`] whose phase constant is fixed by
//! the data at `t = 0`.

use crate::elliptic::{argument_from_sn_cn, jacobi, JacobiValues};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// Relative width of the band in which a branch discriminant counts as zero.
pub const BRANCH_TOL: f64 = 1e-10;

type TripleFn = Arc<dyn Fn(f64) -> [f64; 3] + Send + Sync>;

/// An evaluable exact solution of one of the auxiliary systems.
#[derive(Clone)]
pub struct TripleSolution {
    /// Short name of the formula branch in use.
    pub branch: &'static str,
    /// Named constants of the branch (amplitudes, frequency, parameter, phase).
    pub constants: Vec<(&'static str, f64)>,
    eval: TripleFn,
}

impl fmt::Debug for TripleSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TripleSolution").field("branch", &self.branch).field("constants", &self.constants).finish()
    }
}

impl TripleSolution {
    fn new(branch: &'static str, constants: Vec<(&'static str, f64)>, eval: impl Fn(f64) -> [f64; 3] + Send + Sync + 'static) -> Self {
        Self { branch, constants, eval: Arc::new(eval) }
    }

    fn constant(v: [f64; 3]) -> Self {
        Self::new("stationary", Vec::new(), move |_| v)
    }

    /// The solution at time `t`.
    pub fn eval(&self, t: f64) -> [f64; 3] {
        (self.eval)(t)
    }

    /// Looks up a named constant.
    pub fn constant_named(&self, name: &str) -> Option<f64> {
        self.constants.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    fn map(self, f: impl Fn([f64; 3]) -> [f64; 3] + Send + Sync + 'static) -> Self {
        let inner = self.eval.clone();
        Self { branch: self.branch, constants: self.constants, eval: Arc::new(move |t| f(inner(t))) }
    }
}

/// Jacobi functions at a parameter that was validated when the branch was built.
pub(crate) fn jac(u: f64, m: f64) -> JacobiValues {
    jacobi(u, m).expect("elliptic parameter validated at construction")
}

/// Pulls a computed parameter that overshoots `[0, 1]` by rounding back inside.
pub(crate) fn clamp_parameter(m: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&m) {
        Ok(m)
    } else if m > -1e-12 && m < 1.0 + 1e-12 {
        Ok(m.clamp(0.0, 1.0))
    } else {
        Err(Error::Internal(format!("elliptic parameter {m} outside [0, 1]")))
    }
}

fn sign(x: f64) -> f64 {
    if x < 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn check_finite(v: [f64; 3]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Precondition(format!("non-finite data {v:?}")))
    }
}

/// Solves `f' = gh, g' = −fh, h' = −fg` with data `(f0, g0, h0)` at `t = 0`.
pub fn solve_lemma1(f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    check_finite([f0, g0, h0])?;
    let rfg = f0.hypot(g0);
    let rfh = f0.hypot(h0);
    let scale = rfg.max(rfh);
    if scale == 0.0 {
        return Ok(TripleSolution::constant([0.0; 3]));
    }
    if rfh - rfg < -BRANCH_TOL * scale {
        // The system is symmetric under g ↔ h.
        return Ok(lemma1_ordered(f0, h0, g0)?.map(|[f, g, h]| [f, h, g]));
    }
    lemma1_ordered(f0, g0, h0)
}

fn lemma1_ordered(f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    let rfg = f0.hypot(g0);
    let rfh = f0.hypot(h0);
    if rfg == 0.0 {
        return Ok(TripleSolution::constant([0.0, 0.0, h0]));
    }
    if rfh - rfg <= BRANCH_TOL * rfh {
        if g0 == 0.0 && h0 == 0.0 {
            return Ok(TripleSolution::constant([f0, 0.0, 0.0]));
        }
        let a = 0.5 * (g0.abs() + h0.abs());
        let r = f0.hypot(a);
        let sigma = sign(g0) * sign(h0);
        let (sg, sh) = (sign(g0), sign(h0));
        let t0 = (f0 / a).asinh();
        return Ok(TripleSolution::new("sech", vec![("R", r), ("t0", t0)], move |t| {
            let u = sigma * r * t + t0;
            let sech = 1.0 / u.cosh();
            [r * u.tanh(), sg * r * sech, sh * r * sech]
        }));
    }
    let m = clamp_parameter((rfg / rfh).powi(2))?;
    let sigma = sign(h0);
    let t0 = argument_from_sn_cn(f0, g0, m)?;
    Ok(TripleSolution::new("elliptic", vec![("R_fg", rfg), ("R_fh", rfh), ("m", m), ("t0", t0)], move |t| {
        let j = jac(sigma * rfh * t + t0, m);
        [rfg * j.sn, rfg * j.cn, sigma * rfh * j.dn]
    }))
}

/// Solves `f' = gh, g' = −fh, h' = −f` with data `(f0, g0, h0)` at `t = 0`.
pub fn solve_lemma2(f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    check_finite([f0, g0, h0])?;
    if (f0 == 0.0 && h0 == 0.0) || (f0 == 0.0 && g0 == 0.0) {
        return Ok(TripleSolution::constant([f0, g0, h0]));
    }
    let n = f0.hypot(g0);
    let r = n.sqrt();
    let p = ((0.5 * (n - g0)).max(0.0) + 0.25 * h0 * h0).sqrt();
    let disc = h0 * h0 - 2.0 * (n + g0);
    let scale = h0 * h0 + 2.0 * n + 2.0 * g0.abs();
    let g_of_h = move |h: f64| 0.5 * (h * h - h0 * h0) + g0;
    if disc.abs() <= BRANCH_TOL * scale {
        let sigma = sign(h0);
        let t0 = (2.0 * sigma * f0 / (h0 * h0)).asinh();
        return Ok(TripleSolution::new("sech", vec![("P", p), ("t0", t0)], move |t| {
            let u = p * t + t0;
            let sech = 1.0 / u.cosh();
            let h = sigma * 2.0 * p * sech;
            [sigma * 2.0 * p * p * sech * u.tanh(), g_of_h(h), h]
        }));
    }
    if disc < 0.0 {
        let m = clamp_parameter((p / r).powi(2))?;
        let c0 = (h0 / (2.0 * p)).clamp(-1.0, 1.0);
        let dn0 = (1.0 - m * (1.0 - c0 * c0)).max(0.0).sqrt();
        let s0 = f0 / (2.0 * p * r * dn0);
        let t0 = argument_from_sn_cn(s0, c0, m)?;
        return Ok(TripleSolution::new("cn", vec![("P", p), ("R_fg", r), ("m", m), ("t0", t0)], move |t| {
            let j = jac(r * t + t0, m);
            let h = 2.0 * p * j.cn;
            [2.0 * p * r * j.sn * j.dn, g_of_h(h), h]
        }));
    }
    let m = clamp_parameter((r / p).powi(2))?;
    let sigma = sign(h0);
    let d0 = (h0.abs() / (2.0 * p)).min(1.0);
    let s2 = if m > 0.0 { ((1.0 - d0 * d0) / m).clamp(0.0, 1.0) } else { 0.0 };
    let sc = f0 / (2.0 * p * p * m);
    let (s, c) = if s2 <= 0.5 {
        let c = sign(f0) * (1.0 - s2).sqrt();
        (sc / c, c)
    } else {
        let s = s2.sqrt();
        (s, sc / s)
    };
    let t0 = argument_from_sn_cn(s, c, m)?;
    Ok(TripleSolution::new("dn", vec![("P", p), ("R_fg", r), ("m", m), ("t0", t0)], move |t| {
        let j = jac(sigma * p * t + t0, m);
        let h = sigma * 2.0 * p * j.dn;
        [2.0 * p * p * m * j.sn * j.cn, g_of_h(h), h]
    }))
}

/// Solves `f' = −gh, g' = fh, h' = −(f + η) g` with data `(f0, g0, h0)` at `t = 0`.
pub fn solve_lemma3(eta: f64, f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    check_finite([f0, g0, h0])?;
    if !(eta > 0.0) || !eta.is_finite() {
        return Err(Error::Precondition(format!("eta = {eta} must be positive")));
    }
    if lemma3_stationary(eta, f0, g0, h0) {
        return Ok(TripleSolution::constant([f0, g0, h0]));
    }
    let e0 = f0 + eta;
    let k0 = h0 * h0 - e0 * e0;
    let k_scale = h0 * h0 + e0 * e0;
    if k0.abs() <= BRANCH_TOL * k_scale {
        // Orbits with h = λ(f + η); the reflection maps λ = −1 onto λ = 1.
        if h0 * e0 < 0.0 {
            return Ok(lemma3_parabolic(eta, f0, -g0, -h0)?.map(|[f, g, h]| [f, -g, -h]));
        }
        return lemma3_parabolic(eta, f0, g0, h0);
    }
    if h0 < 0.0 {
        return Ok(lemma3_upper(eta, f0, -g0, -h0)?.map(|[f, g, h]| [f, -g, -h]));
    }
    lemma3_upper(eta, f0, g0, h0)
}

fn lemma3_stationary(eta: f64, f0: f64, g0: f64, h0: f64) -> bool {
    (g0 == 0.0 && h0 == 0.0) || (f0 == 0.0 && g0 == 0.0) || (f0 == -eta && h0 == 0.0)
}

/// The `K = 0` family with `h = f + η`.
fn lemma3_parabolic(eta: f64, f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    let r0 = f0.hypot(g0);
    let e0 = 0.5 * (f0 + eta + h0);
    let tol = BRANCH_TOL * (r0 + eta);
    if (r0 - eta).abs() <= tol {
        let t0 = g0 / e0;
        return Ok(TripleSolution::new("K0=0, R0=eta", vec![("t0", t0)], move |t| {
            let s = eta * t + t0;
            let den = 1.0 + s * s;
            let h = 2.0 * eta / den;
            [h - eta, 2.0 * eta * s / den, h]
        }));
    }
    if r0 < eta {
        let w = (eta * eta - r0 * r0).sqrt();
        let phi0 = (g0 * w / (r0 * e0)).atan2((eta - w * w / e0) / r0);
        return Ok(TripleSolution::new("K0=0, R0<eta", vec![("omega", w), ("t0", phi0)], move |t| {
            let (s, c) = (w * t + phi0).sin_cos();
            let den = eta - r0 * c;
            let h = w * w / den;
            [h - eta, r0 * w * s / den, h]
        }));
    }
    let w = (r0 * r0 - eta * eta).sqrt();
    if e0 > 0.0 {
        let psi0 = (g0 * w / (r0 * e0)).asinh();
        Ok(TripleSolution::new("K0=0, R0>eta", vec![("omega", w), ("t0", psi0)], move |t| {
            let psi = w * t + psi0;
            let den = r0 * psi.cosh() - eta;
            let h = w * w / den;
            [h - eta, r0 * w * psi.sinh() / den, h]
        }))
    } else {
        let psi0 = (-g0 * w / (r0 * e0)).asinh();
        Ok(TripleSolution::new("K0=0, R0>eta, f+eta<0", vec![("omega", w), ("t0", psi0)], move |t| {
            let psi = w * t + psi0;
            let den = r0 * psi.cosh() + eta;
            let h = -w * w / den;
            [h - eta, r0 * w * psi.sinh() / den, h]
        }))
    }
}

/// Non-stationary data with `K ≠ 0` and `h0 ≥ 0`.
fn lemma3_upper(eta: f64, f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    let r0 = f0.hypot(g0);
    let e0 = f0 + eta;
    let k0 = h0 * h0 - e0 * e0;
    if k0 > 0.0 {
        let theta = (((r0 + eta).powi(2) + k0) * ((r0 - eta).powi(2) + k0)).sqrt().sqrt();
        let xi = 2.0 * eta * r0 / (k0 + eta * eta + r0 * r0 + theta * theta);
        let m = clamp_parameter((theta * theta + r0 * r0 - k0 - eta * eta) / (2.0 * theta * theta))?;
        let q = (1.0 - xi * xi).sqrt();
        let c = (f0 + r0 * xi) / (r0 + xi * f0);
        let s = g0 * (1.0 - xi * c) / (r0 * q);
        let t0 = argument_from_sn_cn(s, c, m)?;
        return Ok(TripleSolution::new(
            "K0>0",
            vec![("theta", theta), ("xi", xi), ("m", m), ("t0", t0)],
            move |t| {
                let j = jac(theta * t + t0, m);
                let den = 1.0 - xi * j.cn;
                [r0 * (j.cn - xi) / den, r0 * q * j.sn / den, theta * q * j.dn / den]
            },
        ));
    }
    let k = (-k0).sqrt();
    let tol = BRANCH_TOL * (r0 + eta + k);
    if e0 < 0.0 {
        return lemma3_lower_sheet(eta, k, r0, f0, g0, h0);
    }
    if (r0 - (eta + k)).abs() <= tol {
        let w = (r0 * (r0 - eta)).sqrt();
        let cg = 2.0 * r0 * (eta * (r0 - eta)).sqrt();
        let ch = 2.0 * (r0 - eta) * (r0 * eta).sqrt();
        let t0 = (g0 / cg).atan2(h0 / ch);
        return Ok(TripleSolution::new("K0<0, R0=eta+k", vec![("omega", w), ("t0", t0)], move |t| {
            let (s, c) = (w * t + t0).sin_cos();
            let den = r0 - eta * c * c;
            [r0 - 2.0 * r0 * eta * s * s / den, cg * s / den, ch * c / den]
        }));
    }
    if r0 > eta + k {
        let a = r0 + eta + k;
        let cc = r0 + eta - k;
        let theta = 0.5 * ((r0 + k).powi(2) - eta * eta).sqrt();
        let m = clamp_parameter(((r0 - k).powi(2) - eta * eta) / ((r0 + k).powi(2) - eta * eta))?;
        let ch = 2.0 * k * ((r0 + eta).powi(2) + k0).sqrt();
        let cg = (r0 * r0 - (eta - k).powi(2)).sqrt();
        let s2 = (a * (e0 - k) / (cc * (e0 + k))).clamp(0.0, 1.0);
        let den0 = a - cc * s2;
        let s = h0 * den0 / ch;
        let dn0 = (1.0 - m * s2).sqrt();
        let c = -g0 * den0 / (a * cg * dn0);
        let t0 = argument_from_sn_cn(s, c, m)?;
        return Ok(TripleSolution::new(
            "K0<0, R0>eta+k, f+eta>0",
            vec![("theta", theta), ("m", m), ("t0", t0)],
            move |t| {
                let j = jac(theta * t + t0, m);
                let s2 = j.sn * j.sn;
                let den = a - cc * s2;
                [-eta + k * (a + cc * s2) / den, -a * cg * j.cn * j.dn / den, ch * j.sn / den]
            },
        ));
    }
    if eta > k && (r0 - (eta - k)).abs() <= tol {
        let w = (r0 * (eta - r0)).sqrt();
        let cg = 2.0 * r0 * (eta * (eta - r0)).sqrt();
        let ch = 2.0 * (eta - r0) * (r0 * eta).sqrt();
        let t0 = ((g0 / cg) / (h0 / ch)).atanh();
        return Ok(TripleSolution::new("K0<0, R0=eta-k", vec![("omega", w), ("t0", t0)], move |t| {
            let u = w * t + t0;
            let c = u.cosh();
            let den = eta * c * c - r0;
            [-r0 + 2.0 * r0 * (eta - r0) / den, cg * u.sinh() / den, ch * c / den]
        }));
    }
    if r0 > eta - k {
        let cc = r0 + eta - k;
        let theta = (r0 * k).sqrt();
        let m = clamp_parameter((eta * eta - (r0 - k).powi(2)) / (4.0 * r0 * k))?;
        let sq = (r0 * r0 - (eta - k).powi(2)).sqrt();
        let cg = 2.0 * r0 * sq;
        let ch = 2.0 * (r0 * k).sqrt() * sq;
        let den0 = 2.0 * r0 * (r0 - eta + k) / (f0 + r0);
        let s2 = ((2.0 * r0 - den0) / cc).clamp(0.0, 1.0);
        let dn0 = (1.0 - m * s2).sqrt();
        let c = g0 * den0 / cg;
        let s = -h0 * den0 / (ch * dn0);
        let t0 = argument_from_sn_cn(s, c, m)?;
        return Ok(TripleSolution::new(
            "K0<0, eta-k<R0<eta+k",
            vec![("theta", theta), ("m", m), ("t0", t0)],
            move |t| {
                let j = jac(theta * t + t0, m);
                let den = 2.0 * r0 - cc * j.sn * j.sn;
                [-r0 + 2.0 * r0 * (r0 - eta + k) / den, cg * j.cn / den, -ch * j.sn * j.dn / den]
            },
        ));
    }
    let e = r0 + eta - k;
    let ff = eta - k - r0;
    let theta = 0.5 * (eta * eta - (r0 - k).powi(2)).sqrt();
    let m = clamp_parameter(4.0 * r0 * k / (eta * eta - (r0 - k).powi(2)))?;
    let cg = 2.0 * r0 * ((eta - k).powi(2) - r0 * r0).sqrt();
    let ch = e * ((r0 - eta).powi(2) + k0).sqrt();
    let s2 = ((f0 + r0) * e / (2.0 * r0 * (ff + f0 + r0))).clamp(0.0, 1.0);
    let den0 = e - 2.0 * r0 * s2;
    let sc = -g0 * den0 / cg;
    let (s, c) = if s2 <= 0.5 {
        let c = sign(sc) * (1.0 - s2).sqrt();
        (sc / c, c)
    } else {
        let s = s2.sqrt();
        (s, sc / s)
    };
    let t0 = argument_from_sn_cn(s, c, m)?;
    Ok(TripleSolution::new("K0<0, R0<eta-k", vec![("theta", theta), ("m", m), ("t0", t0)], move |t| {
        let j = jac(theta * t + t0, m);
        let s2 = j.sn * j.sn;
        let den = e - 2.0 * r0 * s2;
        [-r0 + 2.0 * r0 * ff * s2 / den, -cg * j.sn * j.cn / den, ch * j.dn / den]
    }))
}

/// `K < 0` on the sheet `f + η < 0`, which forces `R0 > η + √(−K)`.
fn lemma3_lower_sheet(eta: f64, k: f64, r0: f64, f0: f64, g0: f64, h0: f64) -> Result<TripleSolution> {
    let a = r0 + eta + k;
    let b = r0 - eta - k;
    if !(b > 0.0) {
        return Err(Error::Internal(format!("lower sheet with R0 = {r0} <= eta + k = {}", eta + k)));
    }
    let k0 = -k * k;
    let theta = 0.5 * ((r0 + k).powi(2) - eta * eta).sqrt();
    let m = clamp_parameter(((r0 - k).powi(2) - eta * eta) / ((r0 + k).powi(2) - eta * eta))?;
    let cg = 2.0 * r0 * (r0 * r0 - (eta + k).powi(2)).sqrt();
    let ch = a * ((r0 - eta).powi(2) + k0).sqrt();
    let s2 = (a * (r0 + f0) / (b * (r0 - f0))).clamp(0.0, 1.0);
    let den0 = a + b * s2;
    let s = g0 * den0 / cg;
    let dn0 = (1.0 - m * s2).sqrt();
    let c = h0 * den0 / (ch * dn0);
    let t0 = argument_from_sn_cn(s, c, m)?;
    Ok(TripleSolution::new(
        "K0<0, R0>eta+k, f+eta<0",
        vec![("theta", theta), ("m", m), ("t0", t0)],
        move |t| {
            let j = jac(t0 - theta * t, m);
            let s2 = j.sn * j.sn;
            let den = a + b * s2;
            [r0 * (-a + b * s2) / den, cg * j.sn / den, ch * j.cn * j.dn / den]
        },
    ))
}
