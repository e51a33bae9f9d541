//! Kernel functions of the matrix and scalar Riemann-Hilbert problems.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::specfun::{cot_pi, tan_pi};

pub type Vec2 = [C64; 2];

/// Dense 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

pub type ComplexMatrix2 = Mat2;

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

impl Mat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }
    pub fn real(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2::new(a.into(), b.into(), c.into(), d.into())
    }
    pub fn zero() -> Self {
        Mat2([[cz(); 2]; 2])
    }
    pub fn identity() -> Self {
        Mat2::real(1.0, 0.0, 0.0, 1.0)
    }
    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, cz(), cz(), d)
    }
    /// Rotation (cos q, -sin q; sin q, cos q).
    pub fn rotation(q: f64) -> Self {
        Mat2::real(q.cos(), -q.sin(), q.sin(), q.cos())
    }
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[i][j]
    }
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }
    pub fn inv(&self) -> Result<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 || !d.is_finite() {
            return Err(Error::Singular(format!("2x2 determinant {d}")));
        }
        let [[a, b], [c, e]] = self.0;
        Ok(Mat2::new(e / d, -b / d, -c / d, a / d))
    }
    pub fn scale(&self, k: C64) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a * k, b * k, c * k, d * k)
    }
    pub fn apply(&self, v: Vec2) -> Vec2 {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
    pub fn transpose(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a, c, b, d)
    }
    pub fn conj(&self) -> Mat2 {
        let [[a, b], [c, d]] = self.0;
        Mat2::new(a.conj(), b.conj(), c.conj(), d.conj())
    }
    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }
    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.is_finite())
    }
    pub fn re(&self) -> [[f64; 2]; 2] {
        [[self.0[0][0].re, self.0[0][1].re], [self.0[1][0].re, self.0[1][1].re]]
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let mut r = self;
        for i in 0..2 {
            for j in 0..2 {
                r.0[i][j] += o.0[i][j];
            }
        }
        r
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = self.0;
        let b = o.0;
        let mut r = [[cz(); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                r[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Mat2(r)
    }
}

impl Mul<C64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: C64) -> Mat2 {
        self.scale(k)
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, k: f64) -> Mat2 {
        self.scale(C64::new(k, 0.0))
    }
}

pub fn vadd(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn vscale(a: Vec2, k: C64) -> Vec2 {
    [a[0] * k, a[1] * k]
}

pub fn vnorm(a: Vec2) -> f64 {
    a[0].norm().max(a[1].norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseTag {
    General,
    SideCrack,
    Halfplane,
}

/// Wedge -alpha2 < theta < alpha1 with the crack on theta = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WedgeGeometry {
    pub alpha1: f64,
    pub alpha2: f64,
    pub case_tag: CaseTag,
}

impl WedgeGeometry {
    pub fn new(alpha1: f64, alpha2: f64) -> Result<Self> {
        if !(alpha1 > 0.0 && alpha1 < PI) {
            return Err(Error::Invalid(format!("alpha1 = {alpha1} must lie in (0, pi)")));
        }
        if !(alpha2 > 0.0 && alpha2 <= PI) {
            return Err(Error::Invalid(format!("alpha2 = {alpha2} must lie in (0, pi]")));
        }
        let case_tag = if (alpha2 - PI).abs() <= 1e-14 {
            CaseTag::SideCrack
        } else if (alpha1 - PI / 2.0).abs() <= 1e-14 && (alpha2 - PI / 2.0).abs() <= 1e-14 {
            CaseTag::Halfplane
        } else {
            CaseTag::General
        };
        Ok(Self { alpha1, alpha2, case_tag })
    }

    /// Crack continuing one side of a wedge of angle alpha.
    pub fn side_crack(alpha: f64) -> Result<Self> {
        Self::new(alpha, PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrainState {
    PlaneStress,
    PlaneStrain,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub young_modulus: f64,
    pub poisson: f64,
    pub strain_state: StrainState,
}

impl MaterialSpec {
    pub fn new(young_modulus: f64, poisson: f64, strain_state: StrainState) -> Result<Self> {
        if !(young_modulus > 0.0) {
            return Err(Error::Invalid(format!("Young's modulus {young_modulus} must be positive")));
        }
        if !(0.0..0.5).contains(&poisson) {
            return Err(Error::Invalid(format!("Poisson ratio {poisson} must lie in [0, 1/2)")));
        }
        Ok(Self { young_modulus, poisson, strain_state })
    }

    /// (E, nu) after the plane-strain remap E/(1-nu^2), nu/(1-nu^2).
    pub fn effective(&self) -> (f64, f64) {
        match self.strain_state {
            StrainState::PlaneStress => (self.young_modulus, self.poisson),
            StrainState::PlaneStrain => {
                let k = 1.0 - self.poisson * self.poisson;
                (self.young_modulus / k, self.poisson / k)
            }
        }
    }
}

impl Default for MaterialSpec {
    fn default() -> Self {
        Self { young_modulus: 1.0, poisson: 0.3, strain_state: StrainState::PlaneStress }
    }
}

/// d(s, theta) = s^2 sin^2 theta - sin^2(theta s).
pub fn d_fun(s: C64, theta: f64) -> C64 {
    let st = theta.sin();
    let w = (s * theta).sin();
    s * s * st * st - w * w
}

/// d/ds d(s, theta).
pub fn d_prime(s: C64, theta: f64) -> C64 {
    let st = theta.sin();
    2.0 * s * st * st - theta * (s * (2.0 * theta)).sin()
}

fn pole_guard(s: C64, theta: f64) -> Result<()> {
    if d_fun(s, theta).norm() < 1e-12 * (1.0 + s.norm_sqr()) {
        return Err(Error::Pole { func: "kernel d", at: format!("{s}") });
    }
    Ok(())
}

/// The 2x2 kernel for a general wedge (-alpha2, alpha1).
pub fn g_general(s: C64, geom: &WedgeGeometry) -> Result<Mat2> {
    let mut g = Mat2::zero();
    for (k, &alpha) in [geom.alpha1, geom.alpha2].iter().enumerate() {
        let sign = if k == 0 { -1.0 } else { 1.0 };
        let d = if (alpha - PI).abs() < 1e-15 {
            // d(s, pi) = -sin^2(pi s), evaluated without the rounding of sin(pi)
            let w = (s * PI).sin();
            -w * w
        } else {
            pole_guard(s, alpha)?;
            d_fun(s, alpha)
        };
        if d.norm() < 1e-300 {
            return Err(Error::Pole { func: "kernel d", at: format!("{s}") });
        }
        let (s2a, sin2) = if (alpha - PI).abs() < 1e-15 { (0.0, 0.0) } else { ((2.0 * alpha).sin(), alpha.sin().powi(2)) };
        let w = (s * (2.0 * alpha)).sin();
        // diagonal: -(sin 2 alpha s - (-1)^j s sin 2 alpha)/d
        g.0[0][0] -= (w + s * s2a) / d;
        g.0[1][1] -= (w - s * s2a) / d;
        g.0[0][1] += 2.0 * s * (s - 1.0) * sign * sin2 / d;
        g.0[1][0] += 2.0 * s * (-s - 1.0) * sign * sin2 / d;
    }
    Ok(g)
}

/// J(s) = (l, m+; m-, -l) with l = cos alpha, m+- = (+-s - 1) sin alpha.
pub fn j_mat(s: C64, alpha: f64) -> Mat2 {
    let sa = alpha.sin();
    let l = C64::new(alpha.cos(), 0.0);
    Mat2::new(l, (s - 1.0) * sa, (-s - 1.0) * sa, -l)
}

/// dJ/ds.
pub fn j_prime(alpha: f64) -> Mat2 {
    let sa = alpha.sin();
    Mat2::real(0.0, sa, -sa, 0.0)
}

/// Kernel for a crack continuing a wedge side (alpha2 = pi).
pub fn g_side(s: C64, alpha: f64) -> Result<Mat2> {
    pole_guard(s, alpha)?;
    let d = d_fun(s, alpha);
    let b1 = 2.0 * cot_pi(s) - (s * (2.0 * alpha)).sin() / d;
    let b2 = -2.0 * s * alpha.sin() / d;
    Ok(Mat2::identity().scale(b1) + j_mat(s, alpha).scale(b2))
}

/// 1/sin(w) without overflow.
fn csc(w: C64) -> C64 {
    let i = C64::i();
    if w.im.abs() < 20.0 {
        return 1.0 / w.sin();
    }
    if w.im > 0.0 {
        let e = (i * w).exp();
        -2.0 * i * e / (1.0 - e * e)
    } else {
        let e = (-i * w).exp();
        2.0 * i * e / (1.0 - e * e)
    }
}

/// (b1, b2) of the regular part, evaluated directly (not at the removable points).
fn b0_direct(s: C64, alpha: f64) -> (C64, C64) {
    let w = s * alpha;
    let sa = alpha.sin();
    let c2 = csc(w) * csc(w);
    let q = s * s * sa * sa * c2 - 1.0; // d / sin^2(w)
    let t = tan_pi(s);
    let cotw = cot_pi(w / PI);
    let b1 = 0.5 * (1.0 - t * cotw / q);
    let b2 = -s * t * sa * c2 / (2.0 * q);
    (b1, b2)
}

/// Truncated power series in h.
#[derive(Debug, Clone)]
struct Series(Vec<C64>);

const SERIES_ORDER: usize = 10;

impl Series {
    fn from_fn(f: impl Fn(usize) -> C64) -> Series {
        Series((0..SERIES_ORDER).map(f).collect())
    }
    fn mul(&self, o: &Series) -> Series {
        let mut r = vec![cz(); SERIES_ORDER];
        for i in 0..SERIES_ORDER {
            for j in 0..SERIES_ORDER - i {
                r[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(r)
    }
    fn sub(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }
    fn scale(&self, k: C64) -> Series {
        Series(self.0.iter().map(|a| a * k).collect())
    }
    fn shift_down(&self, k: usize) -> Series {
        let mut v: Vec<C64> = self.0[k..].to_vec();
        v.resize(SERIES_ORDER, cz());
        Series(v)
    }
    /// self / o where o[0] != 0; the result is exact up to order len - 1.
    fn div(&self, o: &Series) -> Series {
        let n = SERIES_ORDER;
        let mut r = vec![cz(); n];
        for i in 0..n {
            let mut acc = self.0[i];
            for j in 0..i {
                acc -= r[j] * o.0[i - j];
            }
            r[i] = acc / o.0[0];
        }
        Series(r)
    }
    fn eval(&self, h: C64, terms: usize) -> (C64, C64) {
        let mut v = cz();
        let mut dv = cz();
        for k in (0..terms).rev() {
            v = v * h + self.0[k];
        }
        for k in (1..terms).rev() {
            dv = dv * h + self.0[k] * k as f64;
        }
        (v, dv)
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).fold(1.0, |a, b| a * b as f64)
}

/// sin(a (p + h)) as a series in h.
fn sin_series(a: f64, p: f64) -> Series {
    Series::from_fn(|k| {
        let phase = a * p + k as f64 * PI / 2.0;
        C64::new(phase.sin() * a.powi(k as i32) / factorial(k), 0.0)
    })
}

/// tan(pi (p + h)) for integer p, i.e. tan(pi h).
fn tan_series() -> Series {
    // tan x = x + x^3/3 + 2x^5/15 + 17x^7/315 + 62x^9/2835
    let c = [0.0, 1.0, 0.0, 1.0 / 3.0, 0.0, 2.0 / 15.0, 0.0, 17.0 / 315.0, 0.0, 62.0 / 2835.0];
    Series::from_fn(|k| C64::new(c[k] * PI.powi(k as i32), 0.0))
}

/// Leading order (number of vanishing coefficients) of an analytically zero-led series.
fn valuation(s: &Series) -> usize {
    let scale = s.0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    s.0.iter().position(|z| z.norm() > 1e-14 * scale).unwrap_or(SERIES_ORDER)
}

fn ratio(num: &Series, den: &Series) -> Series {
    let k = valuation(den);
    num.shift_down(k).div(&den.shift_down(k))
}

/// (b1, b2) and their derivatives near the removable point p in {-1, 0, 1}.
fn b0_series(h: C64, p: f64, alpha: f64) -> ((C64, C64), (C64, C64)) {
    let sa = alpha.sin();
    let s_ser = Series::from_fn(|k| match k {
        0 => C64::new(p, 0.0),
        1 => C64::new(1.0, 0.0),
        _ => cz(),
    });
    let s1 = sin_series(alpha, p);
    let s2 = sin_series(2.0 * alpha, p);
    let d = s_ser.mul(&s_ser).scale(C64::new(sa * sa, 0.0)).sub(&s1.mul(&s1));
    let t = tan_series();
    let r1 = ratio(&t.mul(&s2), &d);
    let r2 = ratio(&s_ser.mul(&t), &d);
    // one order is lost to the division when the denominator has a double zero
    let terms = SERIES_ORDER - valuation(&d);
    let (v1, dv1) = r1.eval(h, terms);
    let (v2, dv2) = r2.eval(h, terms);
    ((0.5 - 0.25 * v1, -0.5 * sa * v2), (-0.25 * dv1, -0.5 * sa * dv2))
}

const REMOVABLE_RADIUS: f64 = 1e-3;

fn near_removable(s: C64) -> Option<f64> {
    [0.0, 1.0, -1.0].into_iter().find(|&p| (s - p).norm() < REMOVABLE_RADIUS)
}

/// Scalar coefficients (b1, b2) of the regular kernel, analytic at 0 and +-1.
pub fn b0_pair(s: C64, alpha: f64) -> (C64, C64) {
    if let Some(p) = near_removable(s) {
        return b0_series(s - p, p, alpha).0;
    }
    if (s * alpha).im.abs() > 350.0 {
        return (C64::new(1.0, 0.0), cz());
    }
    b0_direct(s, alpha)
}

/// Derivatives (b1', b2').
pub fn b0_pair_derivative(s: C64, alpha: f64) -> (C64, C64) {
    if let Some(p) = near_removable(s) {
        return b0_series(s - p, p, alpha).1;
    }
    // quotient rule on b1 = 1/2 - T S2 / (4 d), b2 = -sin(alpha) s T / (2 d)
    let sa = alpha.sin();
    let t = tan_pi(s);
    let dt = PI * (1.0 + t * t);
    let s2 = (s * (2.0 * alpha)).sin();
    let ds2 = 2.0 * alpha * (s * (2.0 * alpha)).cos();
    let d = d_fun(s, alpha);
    let dd = d_prime(s, alpha);
    let n1 = t * s2;
    let dn1 = dt * s2 + t * ds2;
    let n2 = s * t;
    let dn2 = t + s * dt;
    let db1 = -0.25 * (dn1 * d - n1 * dd) / (d * d);
    let db2 = -0.5 * sa * (dn2 * d - n2 * dd) / (d * d);
    (db1, db2)
}

/// G0(s) = b1 I + b2 J(s), with G(s) = 4 cot(pi s) G0(s).
pub fn g0_side(s: C64, alpha: f64) -> Mat2 {
    let (b1, b2) = b0_pair(s, alpha);
    Mat2::identity().scale(b1) + j_mat(s, alpha).scale(b2)
}

/// dG0/ds.
pub fn g0_side_derivative(s: C64, alpha: f64) -> Mat2 {
    let (_, b2) = b0_pair(s, alpha);
    let (db1, db2) = b0_pair_derivative(s, alpha);
    Mat2::identity().scale(db1) + j_mat(s, alpha).scale(db2) + j_prime(alpha).scale(b2)
}

/// Residue of G at a pole s_p: an integer (cot pole) or a zero of d(s, alpha).
pub fn residue_g(s: C64, alpha: f64, integer_pole: bool) -> Mat2 {
    if integer_pole {
        return g0_side(s, alpha).scale(C64::new(4.0 / PI, 0.0));
    }
    let sa = alpha.sin();
    let s2a = (2.0 * alpha).sin();
    let w = (s * (2.0 * alpha)).sin();
    let m = Mat2::new(
        -(w + s * s2a),
        -2.0 * s * (s - 1.0) * sa * sa,
        2.0 * s * (s + 1.0) * sa * sa,
        -(w - s * s2a),
    );
    m.scale(1.0 / d_prime(s, alpha))
}

/// atanh keeping full relative accuracy for tiny arguments.
fn atanh_small(x: C64) -> C64 {
    if x.norm() < 1e-3 {
        let x2 = x * x;
        return x * (1.0 + x2 * (1.0 / 3.0 + x2 * (0.2 + x2 / 7.0)));
    }
    0.5 * ((1.0 + x) / (1.0 - x)).ln()
}

/// Eigen-structure of G0: lambda_{1,2} = b1 +- b2 f^{1/2}.
#[derive(Debug, Clone, Copy)]
pub struct KernelEigens {
    pub lambda1: C64,
    pub lambda2: C64,
    pub delta: C64,
    pub eps: C64,
    pub f: C64,
    pub f_half: C64,
}

/// f(s) = 1 - s^2 sin^2 alpha.
pub fn f_poly(s: C64, alpha: f64) -> C64 {
    let sa = alpha.sin();
    1.0 - s * s * sa * sa
}

pub fn kernel_eigens(s: C64, alpha: f64) -> Result<KernelEigens> {
    let f = f_poly(s, alpha);
    if f.im.abs() < 1e-14 && f.re < 0.0 && s.im.abs() < 1e-14 {
        return Err(Error::Invalid(format!("s = {s} lies on the branch cut of f^(1/2)")));
    }
    let f_half = f.sqrt();
    let (b1, b2) = b0_pair(s, alpha);
    let lambda1 = b1 + b2 * f_half;
    let lambda2 = b1 - b2 * f_half;
    Ok(KernelEigens {
        lambda1,
        lambda2,
        delta: lambda1 * lambda2,
        eps: atanh_small(b2 * f_half / b1),
        f,
        f_half,
    })
}

/// lambda_j(0) = (1 + pi/(alpha + (-1)^j sin alpha))/2.
pub fn lambda_at_zero(alpha: f64) -> (f64, f64) {
    let sa = alpha.sin();
    (0.5 * (1.0 + PI / (alpha - sa)), 0.5 * (1.0 + PI / (alpha + sa)))
}

/// L0(s) = 1 - s^2 / sin^2(pi s / 2), analytic at 0.
pub fn l0_fun(s: C64) -> C64 {
    let x = s * (PI / 2.0);
    if x.norm() < 1e-3 {
        // x / sin x = 1 + x^2/6 + 7 x^4/360 + 31 x^6/15120
        let x2 = x * x;
        let r = 1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0 + 31.0 * x2 * x2 * x2 / 15120.0;
        let q = r * (2.0 / PI);
        return 1.0 - q * q;
    }
    let c = csc(x);
    1.0 - s * s * c * c
}

/// L(s) = tan(pi s / 2) L0(s) / 4.
pub fn l_fun(s: C64) -> C64 {
    0.25 * tan_pi(0.5 * s) * l0_fun(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    const ANGLES: [f64; 7] = [PI / 8.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0];

    #[test]
    fn d_values() {
        assert_eq!(d_fun(c(0.0, 0.0), 0.7), c(0.0, 0.0));
        assert!(d_fun(c(1.0, 0.0), 1.1).norm() < 1e-16);
        let v = d_fun(c(0.0, 2.0), PI / 2.0);
        assert!((v - c(-4.0 + PI.sinh().powi(2), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn split_identity() {
        for &a in &ANGLES {
            for k in 0..20 {
                let s = c(-0.25, -5.0 + 0.5 * k as f64 + 0.013);
                let g = g_side(s, a).unwrap();
                let g0 = g0_side(s, a).scale(4.0 * cot_pi(s));
                assert!((g - g0).max_abs() < 1e-12 * (1.0 + g.max_abs()), "a={a} s={s}");
            }
        }
    }

    #[test]
    fn general_reduces_to_side() {
        for &a in &ANGLES {
            let geom = WedgeGeometry::side_crack(a).unwrap();
            for &s in &[c(-0.25, 0.7), c(0.3, -2.0), c(-0.25, 8.0)] {
                let g1 = g_general(s, &geom).unwrap();
                let g2 = g_side(s, a).unwrap();
                assert!((g1 - g2).max_abs() < 1e-12 * (1.0 + g2.max_abs()));
            }
        }
    }

    #[test]
    fn symmetric_wedge_has_no_coupling() {
        let geom = WedgeGeometry::new(1.1, 1.1).unwrap();
        let g = g_general(c(-0.25, 1.3), &geom).unwrap();
        assert!(g.get(0, 1).norm() < 1e-15 && g.get(1, 0).norm() < 1e-15);
    }

    #[test]
    fn halfplane_normal_reduction() {
        // alpha1 = alpha2 = pi/2: G11 = 1/L(s)
        let geom = WedgeGeometry::new(PI / 2.0, PI / 2.0).unwrap();
        assert_eq!(geom.case_tag, CaseTag::Halfplane);
        for &s in &[c(-0.25, 0.4), c(-0.25, 3.0)] {
            let g = g_general(s, &geom).unwrap();
            let expect = -2.0 * (s * PI).sin() / d_fun(s, PI / 2.0);
            assert!((g.get(0, 0) - expect).norm() < 1e-12);
            assert!((g.get(0, 0) * l_fun(s) - 1.0).norm() < 1e-12, "{}", g.get(0, 0) * l_fun(s));
        }
    }

    #[test]
    fn eigenvalues_at_zero() {
        for &a in &ANGLES {
            let e = kernel_eigens(c(0.0, 0.0), a).unwrap();
            let (l1, l2) = lambda_at_zero(a);
            assert!((e.lambda1 - l1).norm() < 1e-12, "a={a} {} {l1}", e.lambda1);
            assert!((e.lambda2 - l2).norm() < 1e-12);
            assert!((e.f - 1.0).norm() < 1e-15);
        }
    }

    #[test]
    fn delta_is_determinant() {
        for &a in &ANGLES {
            for k in 1..=20 {
                let s = c(0.0, 0.37 * k as f64);
                let e = kernel_eigens(s, a).unwrap();
                let det = g0_side(s, a).det();
                assert!((e.delta - det).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn eps_tail() {
        let a = PI / 3.0;
        let tau: f64 = 40.0;
        let e = kernel_eigens(c(0.0, tau), a).unwrap();
        let approx = 2.0 * tau * tau * a.sin().powi(2) * (-2.0 * a * tau).exp();
        assert!(((e.eps.re - approx) / approx).abs() < 0.05, "{} {}", e.eps, approx);
    }

    #[test]
    fn evenness() {
        for &a in &ANGLES {
            for &s in &[c(0.3, 0.2), c(-0.25, 4.0), c(2.2, -0.7), c(0.0005, 0.0002), c(1.0004, 0.0)] {
                let (p1, p2) = b0_pair(s, a);
                let (m1, m2) = b0_pair(-s, a);
                assert!((p1 - m1).norm() < 1e-12 && (p2 - m2).norm() < 1e-12, "a={a} s={s}");
            }
        }
    }

    #[test]
    fn removable_points_are_continuous() {
        for &a in &ANGLES {
            for &p in &[0.0, 1.0, -1.0] {
                for &h in &[c(0.9e-3, 0.0), c(0.0, 2e-3), c(-3e-3, 1e-3)] {
                    let (s1, s2) = b0_series(h, p, a).0;
                    let (d1, d2) = b0_direct(h + p, a);
                    assert!((s1 - d1).norm() < 1e-10 * (1.0 + d1.norm()) && (s2 - d2).norm() < 1e-10 * (1.0 + d2.norm()), "a={a} p={p} {s1} {d1} {s2} {d2}");
                }
                let h = 1e-4;
                let fd = (g0_side(c(p + h, 0.0), a) - g0_side(c(p - h, 0.0), a)) * (0.5 / h);
                let an = g0_side_derivative(c(p, 0.0), a);
                assert!((fd - an).max_abs() < 1e-6 * (1.0 + an.max_abs()), "a={a} p={p} {fd:?} {an:?}");
            }
        }
    }

    #[test]
        fn pole_at_minus_one() {
        // (s+1) pi/4 G(s) -> G0(-1)
        for &a in &ANGLES {
            let s = c(-1.0 + 1e-7, 0.0);
            let g = g_side(s, a).unwrap().scale(C64::new(1e-7 * PI / 4.0, 0.0));
            let g0 = g0_side(c(-1.0, 0.0), a);
            assert!((g - g0).max_abs() < 1e-5 * (1.0 + g0.max_abs()), "a={a} {g:?} {g0:?}");
        }
    }

    #[test]
    fn decay_at_large_tau() {
        let g = g0_side(c(0.0, 60.0), PI / 2.0);
        assert!((g - Mat2::identity()).max_abs() < 1e-12);
        let g = g0_side(c(-0.25, -60.0), PI / 2.0);
        assert!((g - Mat2::identity()).max_abs() < 1e-12);
        let g = g0_side(c(0.0, 400.0), PI);
        assert!((g - Mat2::identity()).max_abs() < 1e-12);
    }

    #[test]
    fn residue_at_sigma() {
        let a = PI / 2.0;
        let sigma = c(2.739_593_356, 1.119_024_534);
        // refine
        let mut z = sigma;
        for _ in 0..20 {
            z -= d_fun(z, a) / d_prime(z, a);
        }
        let r = residue_g(z, a, false);
        let e = 1e-6;
        let mut acc = Mat2::zero();
        let n = 32;
        for k in 0..n {
            let th = 2.0 * PI * k as f64 / n as f64;
            let w = c(th.cos(), th.sin()) * e;
            acc = acc + g_side(z + w, a).unwrap().scale(w / n as f64);
        }
        assert!((acc - r).max_abs() < 1e-6 * r.max_abs(), "{:?} {:?}", acc, r);
    }

    #[test]
    fn l_functions() {
        assert!((l0_fun(c(0.0, 0.0)) - c(1.0 - 4.0 / (PI * PI), 0.0)).norm() < 1e-15);
        assert!(l0_fun(c(1.0, 0.0)).norm() < 1e-15);
        let s = c(0.0, 0.3);
        let direct = ((s * (PI / 2.0)).sin().powi(2) - s * s) / (2.0 * (s * PI).sin());
        assert!((l_fun(s) - direct).norm() < 1e-14);
    }

    #[test]
    fn poisson_ratio_is_irrelevant() {
        let m0 = MaterialSpec::new(1.0, 0.0, StrainState::PlaneStress).unwrap();
        let m1 = MaterialSpec::new(1.0, 0.3, StrainState::PlaneStrain).unwrap();
        assert_ne!(m0.effective(), m1.effective());
        let geom = WedgeGeometry::new(1.0, 2.0).unwrap();
        let s = c(-0.25, 1.0);
        assert_eq!(g_general(s, &geom).unwrap(), g_general(s, &geom).unwrap());
        let (e, nu) = m1.effective();
        assert!((e - 1.0 / 0.91).abs() < 1e-15 && (nu - 0.3 / 0.91).abs() < 1e-15);
    }

    #[test]
    fn branch_choice_does_not_matter() {
        // c = cosh(f^{1/2} beta) and beta sinh(f^{1/2} beta)/f^{1/2} are even in f^{1/2}
        let f = c(0.3, -1.2);
        let beta = c(0.4, 0.1);
        for r in [f.sqrt(), -f.sqrt()] {
            let ch = (r * beta).cosh();
            let sh = (r * beta).sinh() / r;
            assert!((ch - (f.sqrt() * beta).cosh()).norm() < 1e-15);
            assert!((sh - (f.sqrt() * beta).sinh() / f.sqrt()).norm() < 1e-15);
        }
    }

    #[test]
    fn geometry_validation() {
        assert!(WedgeGeometry::new(0.0, PI).is_err());
        assert!(WedgeGeometry::new(1.0, 3.5).is_err());
        assert_eq!(WedgeGeometry::side_crack(1.0).unwrap().case_tag, CaseTag::SideCrack);
        assert!(MaterialSpec::new(-1.0, 0.3, StrainState::PlaneStress).is_err());
        assert!(MaterialSpec::new(1.0, 0.5, StrainState::PlaneStress).is_err());
    }
}
