//! Internal crack a < r < b along a wedge side.
//!
//! The transforms chi+- are represented by their pole expansions with
//! coefficients A+ at s_n (right poles of G) and A- at -s_n; the residue
//! conditions and the closure chi-(0) = 0 form one dense complex system.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI};

use crate::edge::sif_edge_constant;
use crate::error::{Error, Result};
use crate::factor::{FactorizationData, Side};
use crate::kernels::{g0_side, g0_side_derivative, residue_g, vadd, vscale, MaterialSpec, Mat2, Vec2};
use crate::roots::{pole_table_window, Root, RootKind};
use crate::specfun::{cot_pi, k_minus, k_plus};

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrackConfig {
    pub a: f64,
    pub b: f64,
    pub delta: f64,
}

impl CrackConfig {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a >= 0.0) {
            return Err(Error::Invalid(format!("crack needs 0 <= a < b, got a = {a}, b = {b}")));
        }
        if a >= b {
            return Err(Error::Invalid(format!("no crack: a = {a} is not below b = {b}")));
        }
        Ok(CrackConfig { a, b, delta: a / b })
    }
}

/// Truncation control for the infinite systems.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSettings {
    /// Keep poles until delta^{Re s} < tol.
    pub tol: f64,
    pub max_roots: usize,
    /// Explicit window Re s <= re_max, overriding tol.
    pub re_max: Option<f64>,
}

impl Default for TruncationSettings {
    fn default() -> Self {
        TruncationSettings { tol: 1e-14, max_roots: 400, re_max: None }
    }
}

impl TruncationSettings {
    pub fn window(&self, delta: f64) -> f64 {
        self.re_max.unwrap_or_else(|| (self.tol.ln() / delta.ln() + 1.0).max(3.0))
    }
}

/// Solved coefficients of the truncated system.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruncatedSystem {
    pub delta: f64,
    /// Poles s_n in Re s >= 0 including conjugates, ordered by (Re, Im); s_0 = 0, s_1 = 1.
    pub roots: Vec<Root>,
    pub a_plus: Vec<Vec2>,
    /// A- at -s_n for n >= 2 (index shifted by 2).
    pub a_minus: Vec<Vec2>,
    /// Combined unknown for the double pole of chi- at -1.
    pub u: Vec2,
    pub c_circ: Vec2,
    pub n1_minus: Vec2,
    pub n2_plus: Vec2,
    /// delta^{Re s_N} at the last kept pole.
    pub truncation_bound: f64,
    /// |A x - rhs| / |rhs|.
    pub residual: f64,
}

/// Pieces of the factorization at -1 and 0 used by the residue rows.
struct Anchors {
    x0: Mat2,
    y0: Mat2,
    y1: Mat2,
    v0: Mat2,
    v1: Mat2,
    w0: Mat2,
    w1: Mat2,
}

impl Anchors {
    fn new(fact: &FactorizationData) -> Result<Self> {
        let x0 = fact.x_plus_minus1;
        let y0 = x0.inv()?;
        let y1 = fact.dx_plus_inv_minus1;
        let (v0, v1) = fact.x_with_derivative(cz(), Side::Minus)?;
        let w0 = v0.inv()?;
        let w1 = -(w0 * v1 * w0);
        Ok(Anchors { x0, y0, y1, v0, v1, w0, w1 })
    }
}

/// Full pole sequence for a given window, with the 400-root style cap.
pub fn truncation_roots(alpha: f64, delta: f64, trunc: &TruncationSettings) -> Result<(Vec<Root>, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    let re_max = trunc.window(delta);
    let roots = pole_table_window(alpha, re_max)?.full_sequence();
    let last = roots.last().map(|r| r.s.re).unwrap_or(0.0);
    let bound = delta.powf(last);
    if roots.len() > trunc.max_roots {
        let kept = roots[trunc.max_roots - 1].s.re;
        return Err(Error::Truncation { bound: delta.powf(kept), tol: trunc.tol });
    }
    Ok((roots, bound))
}

fn put(m: &mut DMatrix<C64>, r: usize, c: usize, b: &Mat2) {
    for i in 0..2 {
        for j in 0..2 {
            m[(r + i, c + j)] += b.0[i][j];
        }
    }
}

fn put_v(v: &mut DVector<C64>, r: usize, x: Vec2) {
    v[r] += x[0];
    v[r + 1] += x[1];
}

/// Unknown layout: A+ (2 per root), U, A- for n >= 2, C.
#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
}

impl Layout {
    fn ap(&self, m: usize) -> usize {
        2 * m
    }
    fn u(&self) -> usize {
        2 * self.n
    }
    fn am(&self, m: usize) -> usize {
        2 * self.n + 2 + 2 * (m - 2)
    }
    fn c(&self) -> usize {
        2 * self.n + 2 + 2 * (self.n - 2)
    }
    fn dim(&self) -> usize {
        self.c() + 2
    }
}

/// Dense system for the coefficients; returns (matrix, rhs).
pub fn assemble_internal(
    fact: &FactorizationData,
    delta: f64,
    p: [f64; 2],
    roots: &[Root],
) -> Result<(DMatrix<C64>, DVector<C64>)> {
    let alpha = fact.alpha;
    let n = roots.len();
    if n < 3 || roots[0].s != cz() || roots[1].s != C64::new(1.0, 0.0) {
        return Err(Error::Invalid("pole sequence must start with 0 and 1".into()));
    }
    let lay = Layout { n };
    let an = Anchors::new(fact)?;
    let s: Vec<C64> = roots.iter().map(|r| r.s).collect();
    let pv = [C64::new(p[0], 0.0), C64::new(p[1], 0.0)];
    let n1m = an.x0.apply(pv);
    let n1m = vscale(n1m, C64::new(8.0 / PI.sqrt(), 0.0));
    let g0m1 = g0_side(C64::new(-1.0, 0.0), alpha);
    let g0dm1 = g0_side_derivative(C64::new(-1.0, 0.0), alpha);
    let n2p = (an.y0 * g0m1 * an.y0).scale(C64::new(-0.25, 0.0)).apply(n1m);
    let g00 = g0_side(cz(), alpha);
    let g0d0 = g0_side_derivative(cz(), alpha);

    let mut dm = Vec::with_capacity(n);
    let mut dp = Vec::with_capacity(n);
    for (k, root) in roots.iter().enumerate() {
        let z = root.s;
        let int = root.kind == RootKind::IntegerPole;
        let xm = if k == 0 { fact.x_minus_0 } else { fact.x(z, Side::Minus)? };
        dm.push((residue_g(z, alpha, int) * xm * xm).scale(-0.25 * k_minus(z)?.powi(2)));
        if k < 2 {
            dp.push(Mat2::zero());
            continue;
        }
        let yp = fact.x(-z, Side::Plus)?.inv()?;
        dp.push((residue_g(-z, alpha, int) * yp * yp).scale(-1.0 / (4.0 * k_plus(-z)?.powi(2))));
    }

    let dim = lay.dim();
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    let mut rhs = DVector::<C64>::zeros(dim);
    let id = Mat2::identity();
    let ld = delta.ln();

    // residues of chi- at s_n
    for k in 0..n {
        let sn = s[k];
        let fac = dm[k].scale(((sn + 1.0) * ld).exp());
        let r = lay.ap(k);
        put(&mut a, r, lay.ap(k), &id);
        put(&mut a, r, lay.c(), &-fac);
        put(&mut a, r, lay.u(), &-fac.scale(1.0 / (sn + 1.0)));
        put_v(&mut rhs, r, fac.scale(1.0 / ((sn + 1.0) * (sn + 1.0))).apply(n2p));
        for m in 2..n {
            put(&mut a, r, lay.am(m), &-fac.scale(1.0 / (sn + s[m])));
        }
    }

    // double pole at -1
    let q = g0m1 * an.y1 + g0dm1 * an.y0 - (g0m1 * an.y0) * (ld + 4.0 * (1.0 - LN_2)) + an.x0 * an.y1 * g0m1 * an.y0;
    let r = lay.u();
    put(&mut a, r, r, &id);
    let t = (an.y0 * g0m1 * an.y0).scale(C64::new(-0.25, 0.0));
    for m in 0..n {
        put(&mut a, r, lay.ap(m), &t.scale(1.0 / (1.0 + s[m])));
    }
    put_v(&mut rhs, r, (an.y0 * q).scale(C64::new(-0.25, 0.0)).apply(n1m));

    // residues of chi+ at -s_n, n >= 2
    for k in 2..n {
        let sn = s[k];
        let fac = dp[k].scale(((sn - 1.0) * ld).exp());
        let r = lay.am(k);
        put(&mut a, r, r, &id);
        put_v(&mut rhs, r, fac.scale(1.0 / (1.0 - sn)).apply(n1m));
        for m in 0..n {
            put(&mut a, r, lay.ap(m), &fac.scale(1.0 / (sn + s[m])));
        }
    }

    // closure chi-(0) = 0
    let r = lay.c();
    let l1 = g00 * (an.v1 + an.v0 * (delta / 4.0).ln()) + g0d0 * an.v0;
    let l2 = g00 * an.v0;
    put(&mut a, r, lay.c(), &(l1 * delta));
    put(&mut a, r, lay.u(), &((l1 - l2) * delta));
    for m in 2..n {
        let b = l1.scale(1.0 / s[m]) - l2.scale(1.0 / (s[m] * s[m]));
        put(&mut a, r, lay.am(m), &(b * delta));
    }
    put_v(&mut rhs, r, vscale((l1 - l2 * 2.0).apply(n2p), C64::new(-delta, 0.0)));
    put(&mut a, r, lay.ap(0), &(an.w0 * (2.0 * LN_2) + an.w1));
    for m in 1..n {
        put(&mut a, r, lay.ap(m), &-an.w0.scale(1.0 / s[m]));
    }
    put_v(&mut rhs, r, vscale(an.w0.apply(n1m), C64::new(-1.0, 0.0)));
    Ok((a, rhs))
}

fn solve_dense(a: DMatrix<C64>, rhs: &DVector<C64>) -> Result<(DVector<C64>, f64)> {
    let lu = a.clone().lu();
    let x = lu.solve(rhs).ok_or_else(|| Error::Singular("truncated system matrix is singular".into()))?;
    let res = (&a * &x - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
    if !res.is_finite() {
        return Err(Error::Singular("non-finite solution of the truncated system".into()));
    }
    Ok((x, res))
}

/// Build and solve the truncated system for unit-free load P at delta = a/b.
pub fn solve_system(
    fact: &FactorizationData,
    delta: f64,
    p: [f64; 2],
    trunc: &TruncationSettings,
) -> Result<TruncatedSystem> {
    let (roots, bound) = truncation_roots(fact.alpha, delta, trunc)?;
    let (a, rhs) = assemble_internal(fact, delta, p, &roots)?;
    let n = roots.len();
    let lay = Layout { n };
    let an = Anchors::new(fact)?;
    let pv = [C64::new(p[0], 0.0), C64::new(p[1], 0.0)];
    let n1m = vscale(an.x0.apply(pv), C64::new(8.0 / PI.sqrt(), 0.0));
    let n2p = (an.y0 * g0_side(C64::new(-1.0, 0.0), fact.alpha) * an.y0).scale(C64::new(-0.25, 0.0)).apply(n1m);
    let (x, residual) = if rhs.norm() == 0.0 {
        (DVector::zeros(lay.dim()), 0.0)
    } else {
        solve_dense(a, &rhs)?
    };
    let v = |i: usize| [x[i], x[i + 1]];
    Ok(TruncatedSystem {
        delta,
        a_plus: (0..n).map(|m| v(lay.ap(m))).collect(),
        a_minus: (2..n).map(|m| v(lay.am(m))).collect(),
        u: v(lay.u()),
        c_circ: v(lay.c()),
        n1_minus: n1m,
        n2_plus: n2p,
        roots,
        truncation_bound: bound,
        residual,
    })
}

/// Rotation by 2q, equal to Xinf^2.
pub fn q_matrix(fact: &FactorizationData) -> [[f64; 2]; 2] {
    Mat2::rotation(2.0 * fact.q).re()
}

/// (h/E) (K_I^2 + K_II^2).
pub fn energy_release(k: [f64; 2], e_eff: f64, h: f64) -> f64 {
    h / e_eff * (k[0] * k[0] + k[1] * k[1])
}

/// Leading near-vertex estimate h (K_I^2 + K_II^2)/(E delta log^2 delta) in terms of the edge SIFs.
pub fn energy_near_vertex(k_edge: [f64; 2], e_eff: f64, h: f64, delta: f64) -> f64 {
    let l = delta.ln();
    h / (e_eff * delta * l * l) * (k_edge[0] * k_edge[0] + k_edge[1] * k_edge[1])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Diagnostics {
    pub n_roots: usize,
    pub truncation_bound: f64,
    pub residual: f64,
    pub closure_defect: f64,
    pub transform_defect: f64,
    pub quad_error: f64,
}

/// SIFs at both tips and the energy released per unit advance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SifResult {
    pub k_i_minus: f64,
    pub k_ii_minus: f64,
    pub k_i_plus: f64,
    pub k_ii_plus: f64,
    pub du_minus: f64,
    pub du_plus: f64,
    pub diagnostics: Diagnostics,
}

/// Solved internal crack with transform evaluators.
pub struct InternalSolution<'a> {
    pub fact: &'a FactorizationData,
    pub crack: CrackConfig,
    pub load: [f64; 2],
    pub system: TruncatedSystem,
}

impl<'a> InternalSolution<'a> {
    pub fn new(fact: &'a FactorizationData, crack: CrackConfig, p: [f64; 2], trunc: &TruncationSettings) -> Result<Self> {
        if crack.a == 0.0 {
            return Err(Error::Invalid("a = 0 is the edge crack".into()));
        }
        let system = solve_system(fact, crack.delta, p, trunc)?;
        Ok(InternalSolution { fact, crack, load: p, system })
    }

    /// K at the inner tip, 1/2 sqrt(a/2) Xinf C.
    pub fn k_minus(&self) -> [f64; 2] {
        let k = self.fact.x_inf.apply(self.system.c_circ);
        let c = 0.5 * (self.crack.a / 2.0).sqrt();
        [c * k[0].re, c * k[1].re]
    }

    /// K at the outer tip, 1/2 sqrt(b/2) Xinf^{-1} (N1- + sum A+).
    pub fn k_plus(&self) -> [f64; 2] {
        let mut acc = self.system.n1_minus;
        for v in &self.system.a_plus {
            acc = vadd(acc, *v);
        }
        let k = self.fact.x_inf_inv().apply(acc);
        let c = 0.5 * (self.crack.b / 2.0).sqrt();
        [c * k[0].re, c * k[1].re]
    }

    /// The two pole sums S1 (poles of chi+) and S2 (poles of chi-).
    fn sums(&self, z: C64) -> (Vec2, Vec2) {
        let sys = &self.system;
        let mut s1 = vscale(sys.n1_minus, 1.0 / (z + 1.0));
        for (r, a) in sys.roots.iter().zip(&sys.a_plus) {
            s1 = vadd(s1, vscale(*a, 1.0 / (z - r.s)));
        }
        let mut s2 = vadd(sys.c_circ, vscale(sys.u, 1.0 / (z + 1.0)));
        s2 = vadd(s2, vscale(sys.n2_plus, 1.0 / ((z + 1.0) * (z + 1.0))));
        for (r, a) in sys.roots[2..].iter().zip(&sys.a_minus) {
            s2 = vadd(s2, vscale(*a, 1.0 / (z + r.s)));
        }
        (s1, s2)
    }

    fn g_full(&self, z: C64) -> Mat2 {
        g0_side(z, self.fact.alpha).scale(4.0 * cot_pi(z))
    }

    pub fn chi_minus(&self, z: C64) -> Result<Vec2> {
        let (s1, s2) = self.sums(z);
        let xm = self.fact.x(z, Side::Minus)?;
        let km = k_minus(z)?;
        let a = (self.g_full(z) * xm).apply(s2);
        let b = xm.inv()?.apply(s1);
        let d = (self.crack.delta.ln() * (z + 1.0)).exp();
        Ok(vadd(vscale(a, d * km / 4.0), vscale(b, 1.0 / km)))
    }

    pub fn chi_plus(&self, z: C64) -> Result<Vec2> {
        let (s1, s2) = self.sums(z);
        let xp = self.fact.x(z, Side::Plus)?;
        let kp = k_plus(z)?;
        let a = (self.g_full(z) * xp.inv()?).apply(s1);
        let d = (-self.crack.delta.ln() * (z + 1.0)).exp();
        Ok(vadd(vscale(a, d / (4.0 * kp)), vscale(xp.apply(s2), kp)))
    }

    /// Regular part of chi- at 0: the mean over a circle of radius 0.1.
    pub fn closure_defect(&self) -> Result<f64> {
        let n = 32;
        let mut acc = [cz(); 2];
        for k in 0..n {
            let z = C64::from_polar(0.1, 2.0 * PI * k as f64 / n as f64);
            acc = vadd(acc, self.chi_minus(z)?);
        }
        Ok(acc[0].norm().max(acc[1].norm()) / n as f64)
    }

    /// max |chi- - delta^{s+1} chi+| / |chi-| over sample points in the common strip.
    pub fn transform_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let z = C64::new(-0.25 + 0.05 * k as f64, 0.3 + 0.4 * k as f64);
            let m = self.chi_minus(z)?;
            let p = self.chi_plus(z)?;
            let d = (self.crack.delta.ln() * (z + 1.0)).exp();
            let scale = m[0].norm().max(m[1].norm()).max(1e-300);
            for j in 0..2 {
                worst = worst.max((m[j] - d * p[j]).norm() / scale);
            }
        }
        Ok(worst)
    }

    pub fn sif(&self, material: &MaterialSpec) -> Result<SifResult> {
        let (e_eff, _) = material.effective();
        let km = self.k_minus();
        let kp = self.k_plus();
        Ok(SifResult {
            k_i_minus: km[0],
            k_ii_minus: km[1],
            k_i_plus: kp[0],
            k_ii_plus: kp[1],
            du_minus: energy_release(km, e_eff, 1.0),
            du_plus: energy_release(kp, e_eff, 1.0),
            diagnostics: Diagnostics {
                n_roots: self.system.roots.len(),
                truncation_bound: self.system.truncation_bound,
                residual: self.system.residual,
                closure_defect: self.closure_defect()?,
                transform_defect: self.transform_defect()?,
                quad_error: self.fact.quad_error,
            },
        })
    }
}

/// SIFs for an internal crack; a = 0 gives the edge crack with NaN at the missing tip.
pub fn solve_internal(
    fact: &FactorizationData,
    a: f64,
    b: f64,
    p: [f64; 2],
    material: &MaterialSpec,
    trunc: &TruncationSettings,
) -> Result<SifResult> {
    let crack = CrackConfig::new(a, b)?;
    if !(p[0].is_finite() && p[1].is_finite()) {
        return Err(Error::Invalid("load must be finite".into()));
    }
    if a == 0.0 {
        let (e_eff, _) = material.effective();
        let s = sif_edge_constant(fact, b, p)?;
        return Ok(SifResult {
            k_i_minus: f64::NAN,
            k_ii_minus: f64::NAN,
            k_i_plus: s.k_i,
            k_ii_plus: s.k_ii,
            du_minus: f64::NAN,
            du_plus: energy_release([s.k_i, s.k_ii], e_eff, 1.0),
            diagnostics: Diagnostics { quad_error: fact.quad_error, ..Default::default() },
        });
    }
    InternalSolution::new(fact, crack, p, trunc)?.sif(material)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::build_khrapkov;
    use crate::quadrature::QuadratureSettings;
    use std::sync::OnceLock;

    fn half_pi() -> &'static FactorizationData {
        static F: OnceLock<FactorizationData> = OnceLock::new();
        F.get_or_init(|| build_khrapkov(PI / 2.0, &QuadratureSettings::default()).unwrap())
    }

    #[test]
    fn energy_examples() {
        assert_eq!(energy_release([1.0, 0.0], 1.0, 1.0), 1.0);
        assert!((energy_release([3.0, 4.0], 2.0, 0.1) - 1.25).abs() < 1e-15);
    }

    #[test]
    fn q_is_a_rotation_equal_to_xinf_squared() {
        let f = half_pi();
        let q = q_matrix(f);
        let det = q[0][0] * q[1][1] - q[0][1] * q[1][0];
        assert!((det - 1.0).abs() < 1e-14);
        let x2 = (f.x_inf * f.x_inf).re();
        for i in 0..2 {
            for j in 0..2 {
                assert!((x2[i][j] - q[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn closure_and_transform_identity() {
        let f = half_pi();
        let crack = CrackConfig::new(0.5, 1.0).unwrap();
        let sol = InternalSolution::new(f, crack, [1.0, 1.0], &TruncationSettings::default()).unwrap();
        assert!(sol.system.residual < 1e-12);
        assert!(sol.closure_defect().unwrap() < 1e-8);
        assert!(sol.transform_defect().unwrap() < 1e-10, "{}", sol.transform_defect().unwrap());
    }

    #[test]
    fn zero_load_gives_zero_coefficients() {
        let f = half_pi();
        let crack = CrackConfig::new(0.3, 1.0).unwrap();
        let sol = InternalSolution::new(f, crack, [0.0, 0.0], &TruncationSettings::default()).unwrap();
        assert!(sol.system.a_plus.iter().all(|v| v[0].norm() == 0.0 && v[1].norm() == 0.0));
        assert_eq!(sol.k_minus(), [0.0, 0.0]);
    }

    #[test]
    fn doubling_the_window_leaves_sifs_unchanged() {
        let f = half_pi();
        let crack = CrackConfig::new(0.5, 1.0).unwrap();
        let t = TruncationSettings::default();
        let w = t.window(0.5);
        let a = InternalSolution::new(f, crack, [1.0, 0.3], &t).unwrap();
        let b = InternalSolution::new(f, crack, [1.0, 0.3], &TruncationSettings { re_max: Some(2.0 * w), ..t }).unwrap();
        for (x, y) in a.k_plus().iter().chain(&a.k_minus()).zip(b.k_plus().iter().chain(&b.k_minus())) {
            assert!((x - y).abs() < 1e-8 * y.abs().max(1e-3), "{x} {y}");
        }
    }

    #[test]
    fn small_delta_approaches_edge_crack() {
        let f = half_pi();
        let edge = sif_edge_constant(f, 1.0, [1.0, 1.0]).unwrap();
        let mut last = f64::INFINITY;
        for d in [1e-2, 1e-4, 1e-6] {
            let sol = InternalSolution::new(f, CrackConfig::new(d, 1.0).unwrap(), [1.0, 1.0], &TruncationSettings::default()).unwrap();
            let k = sol.k_plus();
            let err = (k[0] - edge.k_i).abs() / edge.k_i;
            assert!(err < last);
            last = err;
        }
        assert!(last < 0.1);
    }

    #[test]
    fn a_zero_routes_to_edge() {
        let f = half_pi();
        let r = solve_internal(f, 0.0, 1.0, [1.0, 0.0], &MaterialSpec::default(), &TruncationSettings::default()).unwrap();
        assert!((r.k_i_plus - 1.776778).abs() < 1e-5);
        assert!(r.k_i_minus.is_nan());
        assert!(matches!(CrackConfig::new(1.0, 1.0), Err(Error::Invalid(_))));
    }
}
