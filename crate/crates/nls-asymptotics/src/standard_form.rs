//! General two-component cubic systems, their matrix–vector representation
//! and the reduction to the standard parameters `p1..p5, q1..q3`.
//!
//! A general system
//!
//! ```text
//! i u1' = λ1|u1|²u1 + λ2|u1|²u2 + λ3 u1²ū2 + λ4|u2|²u1 + λ5 u2²ū1 + λ6|u2|²u2
//! i u2' = λ7|u1|²u1 + λ8|u1|²u2 + λ9 u1²ū2 + λ10|u2|²u1 + λ11 u2²ū1 + λ12|u2|²u2
//! ```
//!
//! is identified with a pair `(C, V)`. A quadratic form
//! `a|u1|² + 2b Re(ū1u2) + c|u2|²` is conserved iff `(a, b, c)` lies in the
//! kernel of `C`. When a coercive one exists (`ac > b²`) a real linear change
//! of unknowns brings the system to the standard form.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector, Matrix3};
use num_complex::Complex64;

/// Relative pivot threshold used when computing the kernel of `C`.
pub const KERNEL_PIVOT_TOL: f64 = 1e-10;

/// Output parameters smaller than this multiple of the largest one are set to zero.
const SNAP_TOL: f64 = 1e-13;

/// Coefficients `λ1..λ12` of a general cubic system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeneralCubic {
    pub lambda: [f64; 12],
}

/// The structure matrix `C = (c_ij)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureMatrix {
    pub c: [[f64; 3]; 3],
}

/// The structure vector `V = (q1, q2, q3)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureVector {
    pub v: [f64; 3],
}

/// The six numbers parametrizing a structure matrix whose third column is
/// minus its first column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SixTuple {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p3_tilde: f64,
    pub p4: f64,
    pub p5: f64,
}

/// The eight real parameters of the standard system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StandardParams {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub p5: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

/// Record of the changes of unknowns applied by [`reduce_to_standard`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReductionTrace {
    /// The coercive conserved form `(a, b, c)`, normalized to `a > 0`.
    pub mass_form: [f64; 3],
    /// The quadratic-completion change `v = M u`.
    pub linear_change: [[f64; 2]; 2],
    /// The angle `θ` of the final change `w = [[cos θ, −sin θ], [sin θ, cos θ]] v`.
    pub rotation_angle: f64,
    /// Whether `v2 ↦ −v2` was applied to make `p1` non-negative.
    pub component_sign_flip: bool,
}

/// Kernel of a structure matrix and whether it contains a coercive form.
#[derive(Debug, Clone, PartialEq)]
pub struct MassForms {
    /// Orthonormal basis of `ker C`.
    pub kernel_basis: Vec<[f64; 3]>,
    /// Whether some `(a, b, c)` in the kernel has `ac > b²`.
    pub coercive: bool,
    /// The kernel element closest to `(1, 0, 1)` when it is coercive; otherwise
    /// the coercive direction maximizing `ac − b²`, scaled to `a + c = 2`.
    pub selected: Option<[f64; 3]>,
}

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl GeneralCubic {
    /// Evaluates the two right-hand sides at `(u1, u2)`.
    pub fn eval(&self, u1: Complex64, u2: Complex64) -> (Complex64, Complex64) {
        let m = monomials(u1, u2);
        let l = &self.lambda;
        let f1 = (0..6).map(|k| m[k] * l[k]).sum();
        let f2 = (0..6).map(|k| m[k] * l[k + 6]).sum();
        (f1, f2)
    }

    /// The system obtained by the real linear change of unknowns `w = T u`.
    pub fn transform(&self, t: [[f64; 2]; 2]) -> Result<GeneralCubic> {
        let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Precondition("change of unknowns is singular".into()));
        }
        if t == [[1.0, 0.0], [0.0, 1.0]] {
            return Ok(*self);
        }
        let inv = [[t[1][1] / det, -t[0][1] / det], [-t[1][0] / det, t[0][0] / det]];
        Ok(fit_general(|w1, w2| {
            let u1 = w1 * inv[0][0] + w2 * inv[0][1];
            let u2 = w1 * inv[1][0] + w2 * inv[1][1];
            let (f1, f2) = self.eval(u1, u2);
            (f1 * t[0][0] + f2 * t[0][1], f1 * t[1][0] + f2 * t[1][1])
        }))
    }
}

/// The six cubic monomials shared by both equations, in coefficient order.
fn monomials(u1: Complex64, u2: Complex64) -> [Complex64; 6] {
    let a1 = u1.norm_sqr();
    let a2 = u2.norm_sqr();
    [u1 * a1, u2 * a1, u1 * u1 * u2.conj(), u1 * a2, u2 * u2 * u1.conj(), u2 * a2]
}

/// Recovers real coefficients of a cubic gauge-invariant map by least squares
/// on a fixed set of sample points.
fn fit_general<F: Fn(Complex64, Complex64) -> (Complex64, Complex64)>(g: F) -> GeneralCubic {
    const SAMPLES: [(f64, f64, f64, f64); 8] = [
        (0.9, 0.3, -0.4, 0.7),
        (-0.2, 1.1, 0.5, -0.6),
        (0.35, -0.8, 1.2, 0.15),
        (1.3, 0.05, 0.25, 0.9),
        (-0.7, -0.45, -0.3, 0.55),
        (0.1, 0.6, -1.0, -0.35),
        (0.55, -0.25, 0.65, 1.05),
        (-1.15, 0.4, 0.2, -0.8),
    ];
    let mut a = DMatrix::<f64>::zeros(16, 6);
    let mut b1 = DVector::<f64>::zeros(16);
    let mut b2 = DVector::<f64>::zeros(16);
    for (j, &(x1, y1, x2, y2)) in SAMPLES.iter().enumerate() {
        let (u1, u2) = (c64(x1, y1), c64(x2, y2));
        let m = monomials(u1, u2);
        let (g1, g2) = g(u1, u2);
        for k in 0..6 {
            a[(2 * j, k)] = m[k].re;
            a[(2 * j + 1, k)] = m[k].im;
        }
        b1[2 * j] = g1.re;
        b1[2 * j + 1] = g1.im;
        b2[2 * j] = g2.re;
        b2[2 * j + 1] = g2.im;
    }
    let svd = a.svd(true, true);
    let x1 = svd.solve(&b1, 1e-14).expect("SVD computed with both factors");
    let x2 = svd.solve(&b2, 1e-14).expect("SVD computed with both factors");
    let mut lambda = [0.0; 12];
    for k in 0..6 {
        lambda[k] = x1[k];
        lambda[k + 6] = x2[k];
    }
    GeneralCubic { lambda }
}

/// Computes the structure matrix and vector of a general system.
pub fn build_structure(g: &GeneralCubic) -> (StructureMatrix, StructureVector) {
    let l = |k: usize| g.lambda[k - 1];
    let c = [
        [l(2) - l(3), -l(1) + l(8) - l(9), -l(7)],
        [l(5), -l(3) + l(11), -l(9)],
        [l(6), -l(4) + l(5) + l(12), -l(10) + l(11)],
    ];
    let v = [l(8) - 2.0 * l(9), 0.5 * (-l(2) + 2.0 * l(3) - l(10) + 2.0 * l(11)), l(4) - 2.0 * l(5)];
    (StructureMatrix { c }, StructureVector { v })
}

/// The general system represented by a pair `(C, V)`; inverse of [`build_structure`].
pub fn general_from_structure(cm: &StructureMatrix, cv: &StructureVector) -> GeneralCubic {
    let c = &cm.c;
    let [q1, q2, q3] = cv.v;
    let tr = c[0][0] + c[1][1] + c[2][2];
    GeneralCubic {
        lambda: [
            -(c[0][1] + c[1][2]) + q1,
            2.0 * c[0][0] - 0.5 * tr + q2,
            c[0][0] - 0.5 * tr + q2,
            2.0 * c[1][0] + q3,
            c[1][0],
            c[2][0],
            -c[0][2],
            -2.0 * c[1][2] + q1,
            -c[1][2],
            -2.0 * c[2][2] + 0.5 * tr + q2,
            -c[2][2] + 0.5 * tr + q2,
            c[1][0] + c[2][1] + q3,
        ],
    }
}

/// Kernel of `C` and coercivity of the conserved forms it describes.
pub fn mass_forms(cm: &StructureMatrix) -> MassForms {
    let m = Matrix3::from_fn(|i, j| cm.c[i][j]);
    let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let kernel_basis: Vec<[f64; 3]> = if scale == 0.0 {
        vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
    } else {
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("right singular vectors requested");
        (0..3)
            .filter(|&k| svd.singular_values[k] <= KERNEL_PIVOT_TOL * scale)
            .map(|k| [v_t[(k, 0)], v_t[(k, 1)], v_t[(k, 2)]])
            .collect()
    };
    let disc = |v: &[f64; 3]| v[0] * v[2] - v[1] * v[1];
    let normalize = |v: [f64; 3]| {
        let s = 2.0 / (v[0] + v[2]);
        [v[0] * s, v[1] * s, v[2] * s]
    };
    // Projection of (1, 0, 1) onto the kernel.
    let target = [1.0, 0.0, 1.0];
    let mut proj = [0.0; 3];
    for b in &kernel_basis {
        let d = b[0] * target[0] + b[1] * target[1] + b[2] * target[2];
        for i in 0..3 {
            proj[i] += d * b[i];
        }
    }
    let residual = (0..3).fold(0.0_f64, |acc, i| acc.max((cm.c[i][0] + cm.c[i][2]).abs()));
    let selected = if kernel_basis.is_empty() {
        None
    } else if residual <= KERNEL_PIVOT_TOL * scale {
        Some(target)
    } else if disc(&proj) > 0.0 {
        Some(proj)
    } else {
        // Maximize ac − b² over unit vectors of the kernel: the top eigenvector
        // of the restricted form.
        let n = kernel_basis.len();
        let form = |x: &[f64; 3], y: &[f64; 3]| 0.5 * (x[0] * y[2] + x[2] * y[0]) - x[1] * y[1];
        let g = DMatrix::from_fn(n, n, |i, j| form(&kernel_basis[i], &kernel_basis[j]));
        let eig = g.symmetric_eigen();
        let (kmax, &lmax) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("non-empty kernel");
        if lmax > 0.0 {
            let mut v = [0.0; 3];
            for (i, b) in kernel_basis.iter().enumerate() {
                for k in 0..3 {
                    v[k] += eig.eigenvectors[(i, kmax)] * b[k];
                }
            }
            Some(normalize(v))
        } else {
            None
        }
    };
    MassForms { coercive: selected.is_some(), kernel_basis, selected }
}

/// Assembles the parametrized structure matrix of a six-tuple.
pub fn assemble_sixtuple(t: &SixTuple) -> StructureMatrix {
    let SixTuple { p1, p2, p3, p3_tilde: pt, p4, p5 } = *t;
    StructureMatrix {
        c: [
            [p1 + pt + p5, -2.0 * p2 - 2.0 * p3 - 2.0 * p4, -p1 - pt - p5],
            [p2 - p3, 2.0 * p1 - 2.0 * pt, -p2 + p3],
            [-p1 - pt + p5, 2.0 * p2 + 2.0 * p3 - 2.0 * p4, p1 + pt - p5],
        ],
    }
}

/// Extracts the six-tuple of a structure matrix whose third column is minus
/// its first column.
pub fn extract_sixtuple(cm: &StructureMatrix) -> Result<SixTuple> {
    let c = &cm.c;
    let scale = c.iter().flatten().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    for i in 0..3 {
        if (c[i][2] + c[i][0]).abs() > 1e-9 * scale {
            return Err(Error::Shape(format!(
                "c{r}3 = {} differs from -c{r}1 = {}",
                c[i][2],
                -c[i][0],
                r = i + 1
            )));
        }
    }
    let p1 = 0.25 * (c[0][0] + c[1][1] - c[2][0]);
    let p4 = -0.25 * (c[0][1] + c[2][1]);
    let p5 = 0.5 * (c[0][0] + c[2][0]);
    let p2 = 0.125 * (c[2][1] - c[0][1]) + 0.5 * c[1][0];
    let p3 = 0.125 * (c[2][1] - c[0][1]) - 0.5 * c[1][0];
    let p3_tilde = c[0][0] - p1 - p5;
    Ok(SixTuple { p1, p2, p3, p3_tilde, p4, p5 })
}

/// The six-tuple after the change of unknowns
/// `w = [[cos θ, −sin θ], [sin θ, cos θ]] v`: `(p3, p̃3)` turns by `4θ` and
/// `(p4, p5)` by `2θ`.
pub fn rotate_sixtuple(t: &SixTuple, theta: f64) -> SixTuple {
    let (s4, c4) = (4.0 * theta).sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    SixTuple {
        p1: t.p1,
        p2: t.p2,
        p3: c4 * t.p3 - s4 * t.p3_tilde,
        p3_tilde: s4 * t.p3 + c4 * t.p3_tilde,
        p4: c2 * t.p4 - s2 * t.p5,
        p5: s2 * t.p4 + c2 * t.p5,
    }
}

impl StandardParams {
    /// Builds parameters after checking the sign constraints and non-triviality.
    pub fn new(p: [f64; 5], q: [f64; 3]) -> Result<Self> {
        let s = Self::from_arrays(p, q);
        s.validate()?;
        Ok(s)
    }

    /// Builds parameters without validation.
    pub fn from_arrays(p: [f64; 5], q: [f64; 3]) -> Self {
        Self { p1: p[0], p2: p[1], p3: p[2], p4: p[3], p5: p[4], q1: q[0], q2: q[1], q3: q[2] }
    }

    /// Checks `p1, p3, p5 ≥ 0` and that not all `p` vanish.
    pub fn validate(&self) -> Result<()> {
        let all = self.p().iter().chain(self.q().iter()).all(|x| x.is_finite());
        if !all {
            return Err(Error::Precondition("parameters must be finite".into()));
        }
        for (name, v) in [("p1", self.p1), ("p3", self.p3), ("p5", self.p5)] {
            if v < 0.0 {
                return Err(Error::Precondition(format!("{name} = {v} must be non-negative")));
            }
        }
        if self.p().iter().all(|&x| x == 0.0) {
            return Err(Error::Trivial);
        }
        Ok(())
    }

    /// `(p1, p2, p3, p4, p5)`.
    pub fn p(&self) -> [f64; 5] {
        [self.p1, self.p2, self.p3, self.p4, self.p5]
    }

    /// `(q1, q2, q3)`.
    pub fn q(&self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }

    /// The same `p` with `q = 0`.
    pub fn without_potential(&self) -> Self {
        Self { q1: 0.0, q2: 0.0, q3: 0.0, ..*self }
    }

    /// Largest `|p_i|`.
    pub fn p_scale(&self) -> f64 {
        self.p().iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    /// The structure pair of the standard system.
    pub fn structure(&self) -> (StructureMatrix, StructureVector) {
        let t = SixTuple { p1: self.p1, p2: self.p2, p3: self.p3, p3_tilde: 0.0, p4: self.p4, p5: self.p5 };
        (assemble_sixtuple(&t), StructureVector { v: self.q() })
    }

    /// The standard system written as a general cubic system.
    pub fn to_general(&self) -> GeneralCubic {
        let (c, v) = self.structure();
        general_from_structure(&c, &v)
    }

    /// The potential `𝒱(z1, z2) = q1|z1|² + 2q2 Re(z̄1z2) + q3|z2|²`.
    pub fn potential(&self, z1: Complex64, z2: Complex64) -> f64 {
        self.q1 * z1.norm_sqr() + 2.0 * self.q2 * (z1.conj() * z2).re + self.q3 * z2.norm_sqr()
    }
}

/// Evaluates the standard nonlinearities `(F1, F2)` at `(z1, z2)`.
pub fn nonlinearity(p: &StandardParams, z1: Complex64, z2: Complex64) -> (Complex64, Complex64) {
    let StandardParams { p1, p2, p3, p4, p5, .. } = *p;
    let a1 = z1.norm_sqr();
    let a2 = z2.norm_sqr();
    let re12 = (z1.conj() * z2).re;
    let v = p.potential(z1, z2);
    let t1 = z2 * (2.0 * a1) + z1 * z1 * z2.conj();
    let t2 = z1 * (2.0 * a2) + z1.conj() * z2 * z2;
    let f1 = z1 * a1 * (3.0 * p2 + p3 + 2.0 * p4) + t1 * (p1 + p5) + t2 * (p2 - p3) - z2 * a2 * (p1 - p5)
        - z1 * (4.0 * p1 * re12)
        + z1 * v;
    let f2 = z1 * a1 * (p1 + p5) + t1 * (p2 - p3) - t2 * (p1 - p5) + z2 * a2 * (3.0 * p2 + p3 - 2.0 * p4)
        + z2 * (4.0 * p1 * re12)
        + z2 * v;
    (f1, f2)
}

fn snap(x: f64, scale: f64) -> f64 {
    if x.abs() <= SNAP_TOL * scale {
        0.0
    } else {
        x
    }
}

fn matmul(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> [[f64; 2]; 2] {
    [
        [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
        [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
    ]
}

/// Chooses `θ` in `[0, 2π)` with `p̃3(θ) = 0`, `p3 ≥ 0`, `p5 ≥ 0`, or, when
/// `p3 = p̃3 = 0`, with `p5 = 0`. The smallest admissible angle wins.
fn choose_rotation(t: &SixTuple, scale: f64) -> Result<f64> {
    use std::f64::consts::PI;
    let tol = 1e-12 * scale;
    let r3 = t.p3.hypot(t.p3_tilde);
    let already = if r3 > tol { t.p3_tilde.abs() <= tol && t.p3 >= 0.0 } else { t.p5.abs() <= tol };
    if already && t.p5 >= -tol {
        return Ok(0.0);
    }
    let mut candidates: Vec<f64> = if r3 > tol {
        let phi0 = (-t.p3_tilde).atan2(t.p3);
        (0..8).map(|k| (phi0 / 4.0 + k as f64 * PI / 4.0).rem_euclid(2.0 * PI)).collect()
    } else {
        let phi0 = (-t.p5).atan2(t.p4);
        (0..4).map(|k| (phi0 / 2.0 + k as f64 * PI / 2.0).rem_euclid(2.0 * PI)).collect()
    };
    candidates.sort_by(f64::total_cmp);
    candidates
        .into_iter()
        .find(|&th| {
            let r = rotate_sixtuple(t, th);
            r.p3 >= -tol && r.p5 >= -tol && r.p3_tilde.abs() <= tol.max(1e-12 * r3)
        })
        .ok_or_else(|| Error::Internal("no admissible rotation angle".into()))
}

/// Reduces a general cubic system with a coercive mass-like conserved
/// quantity to the standard parameters.
pub fn reduce_to_standard(g: &GeneralCubic) -> Result<(StandardParams, ReductionTrace)> {
    let (c, _) = build_structure(g);
    let mf = mass_forms(&c);
    let [a, b, cc] = mf.selected.ok_or(Error::NonCoercive)?;
    let sa = a.sqrt();
    let m = [[sa, b / sa], [0.0, ((a * cc - b * b) / a).sqrt()]];

    let first = g.transform(m)?;
    let t1 = extract_sixtuple(&build_structure(&first).0)?;
    let scale = [t1.p1, t1.p2, t1.p3, t1.p3_tilde, t1.p4, t1.p5].iter().fold(0.0_f64, |s, x| s.max(x.abs()));
    let flip = t1.p1 < -1e-12 * scale;
    let f = if flip { [[1.0, 0.0], [0.0, -1.0]] } else { [[1.0, 0.0], [0.0, 1.0]] };
    let fm = matmul(f, m);
    let t2 = extract_sixtuple(&build_structure(&g.transform(fm)?).0)?;
    let theta = choose_rotation(&t2, scale.max(f64::MIN_POSITIVE))?;
    let rot = [[theta.cos(), -theta.sin()], [theta.sin(), theta.cos()]];
    let total = matmul(rot, fm);
    let (c3, v3) = build_structure(&g.transform(total)?);
    let t3 = extract_sixtuple(&c3)?;
    let expected = rotate_sixtuple(&t2, theta);
    let dev = [
        t3.p1 - expected.p1,
        t3.p2 - expected.p2,
        t3.p3 - expected.p3,
        t3.p3_tilde - expected.p3_tilde,
        t3.p4 - expected.p4,
        t3.p5 - expected.p5,
    ]
    .iter()
    .fold(0.0_f64, |s, x| s.max(x.abs()));
    if dev > 1e-9 * scale.max(1.0) || t3.p3_tilde.abs() > 1e-9 * scale.max(1.0) {
        return Err(Error::Internal(format!("rotation bookkeeping deviates by {dev:e}")));
    }
    let pscale = scale.max(v3.v.iter().fold(0.0_f64, |s, x| s.max(x.abs())));
    let sn = |x: f64| snap(x, pscale);
    let params = StandardParams {
        p1: sn(t3.p1).max(0.0),
        p2: sn(t3.p2),
        p3: sn(t3.p3).max(0.0),
        p4: sn(t3.p4),
        p5: sn(t3.p5).max(0.0),
        q1: sn(v3.v[0]),
        q2: sn(v3.v[1]),
        q3: sn(v3.v[2]),
    };
    params.validate()?;
    let trace = ReductionTrace {
        mass_form: [a, b, cc],
        linear_change: m,
        rotation_angle: theta,
        component_sign_flip: flip,
    };
    Ok((params, trace))
}
