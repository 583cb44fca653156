//! Jacobi elliptic functions, the amplitude function and elliptic integrals
//! of the first kind.
//!
//! The parameter convention is `m = k²` with `0 ≤ m ≤ 1`. The functions
//! `sn`, `cn`, `dn` and `am` are evaluated with the descending Landen
//! (arithmetic-geometric mean) recursion after reducing the argument modulo
//! the half period `2K(m)`. For `m` within `1e-10` of one the hyperbolic
//! limits are used.

use crate::error::{Error, Result};
use std::f64::consts::{FRAC_PI_2, PI};

/// Parameters closer than this to one are treated as `m = 1`.
pub const DEGENERATE_M_GAP: f64 = 1e-10;

/// Arguments of `arcsin`/`arccos` within this distance of `±1` are clamped.
pub const CLAMP_TOL: f64 = 1e-12;

const AGM_TOL: f64 = 1e-15;
const AGM_MAX_ITER: usize = 40;

/// A validated elliptic parameter `0 ≤ m ≤ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticModulus(f64);

impl EllipticModulus {
    /// Wraps `m` after checking `0 ≤ m ≤ 1`.
    pub fn new(m: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&m) {
            Ok(Self(m))
        } else {
            Err(Error::OutOfDomain { what: "elliptic parameter m", value: m })
        }
    }

    /// The raw parameter.
    pub fn value(self) -> f64 {
        self.0
    }
}

/// The six Jacobi functions at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiValues {
    pub sn: f64,
    pub cn: f64,
    pub dn: f64,
    pub cd: f64,
    pub sd: f64,
    pub nd: f64,
}

impl JacobiValues {
    fn from_triple(sn: f64, cn: f64, dn: f64) -> Self {
        Self { sn, cn, dn, cd: cn / dn, sd: sn / dn, nd: 1.0 / dn }
    }
}

fn check_m(m: f64) -> Result<()> {
    EllipticModulus::new(m).map(|_| ())
}

fn agm(mut a: f64, mut b: f64) -> f64 {
    for _ in 0..AGM_MAX_ITER {
        if (a - b).abs() <= AGM_TOL * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind
/// `K(m) = ∫₀^{π/2} dθ / √(1 − m sin²θ)` for `0 ≤ m < 1`.
pub fn complete_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::OutOfDomain { what: "complete_k", value: m });
    }
    Ok(PI / (2.0 * agm(1.0, (1.0 - m).sqrt())))
}

/// Carlson's symmetric integral `R_F(x, y, z)` by the duplication theorem.
fn carlson_rf(mut x: f64, mut y: f64, mut z: f64) -> f64 {
    const ERRTOL: f64 = 1e-4;
    loop {
        let mu = (x + y + z) / 3.0;
        let dx = 1.0 - x / mu;
        let dy = 1.0 - y / mu;
        let dz = 1.0 - z / mu;
        if dx.abs().max(dy.abs()).max(dz.abs()) < ERRTOL {
            let e2 = dx * dy - dz * dz;
            let e3 = dx * dy * dz;
            return (1.0 + (e2 / 24.0 - 0.1 - 3.0 * e3 / 44.0) * e2 + e3 / 14.0) / mu.sqrt();
        }
        let (sx, sy, sz) = (x.sqrt(), y.sqrt(), z.sqrt());
        let lambda = sx * (sy + sz) + sy * sz;
        x = 0.25 * (x + lambda);
        y = 0.25 * (y + lambda);
        z = 0.25 * (z + lambda);
    }
}

/// Incomplete elliptic integral of the first kind
/// `F(φ, m) = ∫₀^φ dθ / √(1 − m sin²θ)`, the inverse of `am(·, m)`.
///
/// For `m < 1` any real `φ` is accepted and `F(φ + π, m) = F(φ, m) + 2K(m)`.
/// For `m = 1` the integral diverges at `|φ| = π/2`.
pub fn incomplete_f(phi: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    if !phi.is_finite() {
        return Err(Error::OutOfDomain { what: "incomplete_f angle", value: phi });
    }
    if m == 1.0 {
        if phi.abs() >= FRAC_PI_2 {
            return Err(Error::OutOfDomain { what: "incomplete_f angle at m = 1", value: phi });
        }
        return Ok(phi.sin().atanh());
    }
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let s = r.sin();
    let c = r.cos();
    let base = s * carlson_rf(c * c, 1.0 - m * s * s, 1.0);
    if n == 0.0 {
        Ok(base)
    } else {
        Ok(base + 2.0 * n * complete_k(m)?)
    }
}

/// Amplitude for `|u| ≤ K(m)` via the descending Landen recursion.
fn am_agm(u: f64, m: f64) -> f64 {
    let mut a = [0.0_f64; AGM_MAX_ITER + 1];
    let mut c = [0.0_f64; AGM_MAX_ITER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < AGM_MAX_ITER && c[n].abs() > AGM_TOL {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    for j in (1..=n).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    phi
}

/// The reduced form `u = 2nK + r`, `|r| ≤ K`.
fn reduce_half_period(u: f64, m: f64) -> (f64, f64) {
    let k = PI / (2.0 * agm(1.0, (1.0 - m).sqrt()));
    let n = (u / (2.0 * k)).round();
    (n, u - 2.0 * n * k)
}

/// Evaluates `sn`, `cn`, `dn` and their ratios `cd`, `sd`, `nd`.
pub fn jacobi(u: f64, m: f64) -> Result<JacobiValues> {
    check_m(m)?;
    if !u.is_finite() {
        return Err(Error::OutOfDomain { what: "jacobi argument", value: u });
    }
    if m == 0.0 {
        return Ok(JacobiValues::from_triple(u.sin(), u.cos(), 1.0));
    }
    if m > 1.0 - DEGENERATE_M_GAP {
        let sech = 1.0 / u.cosh();
        return Ok(JacobiValues {
            sn: u.tanh(),
            cn: sech,
            dn: sech,
            cd: 1.0,
            sd: u.sinh(),
            nd: u.cosh(),
        });
    }
    let (n, r) = reduce_half_period(u, m);
    let phi = am_agm(r, m);
    let sign = if (n as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let sn = sign * phi.sin();
    let cn = sign * phi.cos();
    let dn = (cn * cn + (1.0 - m) * sn * sn).sqrt();
    Ok(JacobiValues::from_triple(sn, cn, dn))
}

/// Jacobi amplitude `am(u, m) = ∫₀^u dn(v, m) dv`, unwrapped so that
/// `am(u + 2K, m) = am(u, m) + π`.
pub fn jacobi_am(u: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    if !u.is_finite() {
        return Err(Error::OutOfDomain { what: "jacobi_am argument", value: u });
    }
    if m == 0.0 {
        return Ok(u);
    }
    if m > 1.0 - DEGENERATE_M_GAP {
        return Ok(u.sinh().atan());
    }
    let (n, r) = reduce_half_period(u, m);
    Ok(am_agm(r, m) + n * PI)
}

/// Clamps `x` into `[−1, 1]` when it overshoots by at most [`CLAMP_TOL`].
pub fn clamp_unit(x: f64, what: &'static str) -> Result<f64> {
    if x.abs() <= 1.0 {
        Ok(x)
    } else if x.abs() <= 1.0 + CLAMP_TOL {
        Ok(x.signum())
    } else {
        Err(Error::OutOfDomain { what, value: x })
    }
}

/// The argument `u ∈ [−K, K]` with `sn(u, m) = x`.
pub fn inverse_sn(x: f64, m: f64) -> Result<f64> {
    let x = clamp_unit(x, "inverse_sn")?;
    if m > 1.0 - DEGENERATE_M_GAP {
        if x.abs() == 1.0 {
            return Err(Error::OutOfDomain { what: "inverse_sn at m = 1", value: x });
        }
        return Ok(x.atanh());
    }
    incomplete_f(x.asin(), m)
}

/// The argument `u ∈ [0, 2K]` with `cn(u, m) = x`.
pub fn inverse_cn(x: f64, m: f64) -> Result<f64> {
    let x = clamp_unit(x, "inverse_cn")?;
    if m > 1.0 - DEGENERATE_M_GAP {
        if x <= 0.0 {
            return Err(Error::OutOfDomain { what: "inverse_cn at m = 1", value: x });
        }
        return Ok((1.0 / x).acosh());
    }
    incomplete_f(x.acos(), m)
}

/// The argument `u` with `(sn, cn)(u, m)` proportional to `(s, c)`, taken on
/// the branch `am(u) ∈ (−π, π]`.
pub fn argument_from_sn_cn(s: f64, c: f64, m: f64) -> Result<f64> {
    check_m(m)?;
    if s == 0.0 && c == 0.0 {
        return Err(Error::OutOfDomain { what: "argument_from_sn_cn", value: 0.0 });
    }
    if m > 1.0 - DEGENERATE_M_GAP {
        if c <= 0.0 {
            return Err(Error::OutOfDomain { what: "argument_from_sn_cn at m = 1", value: c });
        }
        return Ok((s / c).asinh());
    }
    incomplete_f(s.atan2(c), m)
}
