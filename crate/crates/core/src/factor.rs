//! Khrapkov factorization of the side-crack kernel and the scalar half-plane factorization.
//!
//! Both factors come from Cauchy integrals of even functions tabulated on the
//! imaginary axis. Away from the axis the closed axis form is used; within 0.2
//! of it (or on the far side) the contour is shifted by 0.15 past the point.

use num_complex::Complex64 as C64;
use std::f64::consts::{LN_2, PI};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::kernels::{f_poly, j_mat, j_prime, kernel_eigens, l0_fun, lambda_at_zero, Mat2};
use crate::quadrature::{composite_gl, integrate_decaying, QuadratureSettings};
use crate::specfun::{a_minus, a_plus};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

const AXIS_MARGIN: f64 = 0.2;
const CONTOUR_SHIFT: f64 = 0.15;
const PANEL_WIDTH: f64 = 0.25;

/// Tabulated even integrand(s) on the imaginary axis, t = i tau, tau in [0, T].
#[derive(Debug, Clone)]
struct AxisTable<const K: usize> {
    tau: Vec<f64>,
    w: Vec<f64>,
    vals: Vec<[f64; K]>,
}

impl<const K: usize> AxisTable<K> {
    /// -(z/pi) sum w phi/(tau^2 + z^2) and its z-derivative.
    fn eval(&self, z: C64) -> ([C64; K], [C64; K]) {
        let mut v = [C64::new(0.0, 0.0); K];
        let mut d = [C64::new(0.0, 0.0); K];
        let z2 = z * z;
        for ((t, w), phi) in self.tau.iter().zip(&self.w).zip(&self.vals) {
            let den = t * t + z2;
            let k = *w / den;
            let kd = *w * (t * t - z2) / (den * den);
            for j in 0..K {
                v[j] += k * phi[j];
                d[j] += kd * phi[j];
            }
        }
        for j in 0..K {
            v[j] *= -z / PI;
            d[j] *= -1.0 / PI;
        }
        (v, d)
    }

    fn integral(&self) -> [f64; K] {
        let mut acc = [0.0; K];
        for (w, phi) in self.w.iter().zip(&self.vals) {
            for j in 0..K {
                acc[j] += w * phi[j];
            }
        }
        acc
    }
}

fn tabulate<const K: usize>(t_end: f64, width: f64, f: &impl Fn(f64) -> Result<[f64; K]>) -> Result<AxisTable<K>> {
    let panels = (t_end / width).ceil() as usize;
    let (tau, w) = composite_gl(0.0, t_end, panels, 24);
    let vals = tau.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
    Ok(AxisTable { tau, w, vals })
}

/// (1/2 pi) sum w phi(t)/(t - z) along t = c + i tau, and the z-derivative.
fn contour_sum<const K: usize>(ts: &[C64], ws: &[f64], phis: &[[C64; K]], z: C64) -> ([C64; K], [C64; K]) {
    let mut v = [C64::new(0.0, 0.0); K];
    let mut d = [C64::new(0.0, 0.0); K];
    for ((t, w), phi) in ts.iter().zip(ws).zip(phis) {
        let k = *w / (t - z);
        let kd = k / (t - z);
        for j in 0..K {
            v[j] += k * phi[j];
            d[j] += kd * phi[j];
        }
    }
    for j in 0..K {
        v[j] /= 2.0 * PI;
        d[j] /= 2.0 * PI;
    }
    (v, d)
}

fn line_nodes(c: f64, t_end: f64) -> (Vec<C64>, Vec<f64>) {
    let panels = (2.0 * t_end / PANEL_WIDTH).ceil() as usize;
    let (tau, w) = composite_gl(-t_end, t_end, panels, 24);
    (tau.iter().map(|&t| C64::new(c, t)).collect(), w)
}

/// Continuous logarithm along a sequence of points, anchored at the principal branch of the first.
struct Unwrap {
    prev: Option<C64>,
}

impl Unwrap {
    fn new() -> Self {
        Unwrap { prev: None }
    }
    fn next(&mut self, x: C64) -> C64 {
        let l = x.ln();
        let out = match self.prev {
            None => l,
            Some(p) => {
                let k = ((p.im - l.im) / (2.0 * PI)).round();
                C64::new(l.re, l.im + 2.0 * PI * k)
            }
        };
        self.prev = Some(out);
        out
    }
}

/// Decay-aware truncation: 2 T^2 exp(-rate T) below the guard.
fn tail_point(rate: f64, settings: &QuadratureSettings) -> f64 {
    let mut t: f64 = 40.0;
    for _ in 0..50 {
        t = (2.0 * t * t / settings.truncation_guard).ln() / rate;
    }
    t.max(40.0)
}

fn check_side(z: C64, side: Side, reach: f64) -> Result<()> {
    let bad = match side {
        Side::Plus => z.re > reach,
        Side::Minus => z.re < -reach,
    };
    if bad || !z.is_finite() {
        return Err(Error::WrongHalfPlane { side: side.name(), at: format!("{z}") });
    }
    Ok(())
}

fn use_axis(z: C64, side: Side) -> bool {
    match side {
        Side::Plus => z.re < -AXIS_MARGIN,
        Side::Minus => z.re > AXIS_MARGIN,
    }
}

fn shifted_abscissa(z: C64, side: Side) -> f64 {
    match side {
        Side::Plus => z.re + CONTOUR_SHIFT,
        Side::Minus => z.re - CONTOUR_SHIFT,
    }
}

/// log B, beta and their derivatives at one point.
#[derive(Debug, Clone, Copy)]
pub struct BBeta {
    pub log_b: C64,
    pub beta: C64,
    pub dlog_b: C64,
    pub dbeta: C64,
}

/// Khrapkov factors X+-(s) = B(s) (C(u) I + beta(s) S(u) J(s)), u = f beta^2.
#[derive(Debug, Clone)]
pub struct FactorizationData {
    pub alpha: f64,
    pub settings: QuadratureSettings,
    pub q: f64,
    pub x_inf: Mat2,
    pub x_plus_0: Mat2,
    pub x_minus_0: Mat2,
    pub x_plus_minus1: Mat2,
    pub dx_plus_inv_minus1: Mat2,
    pub quad_error: f64,
    t_end: f64,
    table: AxisTable<2>,
}

/// (1/2) log Delta and eps/f^{1/2} on the imaginary axis.
fn khrapkov_axis_values(alpha: f64, tau: f64) -> Result<[f64; 2]> {
    if tau == 0.0 {
        let (l1, l2) = lambda_at_zero(alpha);
        return Ok([0.5 * (l1 * l2).ln(), 0.5 * (l1 / l2).ln()]);
    }
    let e = kernel_eigens(C64::new(0.0, tau), alpha)?;
    if !(e.lambda1.re > 0.0 && e.lambda2.re > 0.0) {
        return Err(Error::Quadrature(format!("kernel eigenvalues not positive at i*{tau}")));
    }
    Ok([0.5 * e.delta.re.ln(), (e.eps / e.f_half).re])
}

/// Same integrands along a shifted line, with continuous logarithms.
fn khrapkov_line_values(alpha: f64, ts: &[C64]) -> Result<Vec<[C64; 2]>> {
    let mut u1 = Unwrap::new();
    let mut u2 = Unwrap::new();
    let mut out = Vec::with_capacity(ts.len());
    for &t in ts {
        let e = kernel_eigens(t, alpha)?;
        let l1 = u1.next(e.lambda1);
        let l2 = u2.next(e.lambda2);
        let eps = if e.eps.norm() < 1e-3 {
            let unwrapped = 0.5 * (l1 - l2);
            if (unwrapped - e.eps).norm() > 1e-6 {
                return Err(Error::Quadrature(format!("eigenvalue ratio winds around zero near {t}")));
            }
            e.eps
        } else {
            0.5 * (l1 - l2)
        };
        out.push([0.5 * (l1 + l2), eps / e.f_half]);
    }
    Ok(out)
}

/// cosh(sqrt u) and sinh(sqrt u)/sqrt u with their u-derivatives.
fn ch_sh(u: C64) -> (C64, C64, C64, C64) {
    if u.norm() < 1.0 {
        // even power series; 14 terms give full precision for |u| < 1
        let mut c = C64::new(0.0, 0.0);
        let mut s = C64::new(0.0, 0.0);
        let mut dc = C64::new(0.0, 0.0);
        let mut ds = C64::new(0.0, 0.0);
        let mut pk = C64::new(1.0, 0.0);
        let mut pkm1 = C64::new(0.0, 0.0);
        let mut fac2k = 1.0; // (2k)!
        for k in 0..14 {
            let kf = k as f64;
            let fac2k1 = fac2k * (2.0 * kf + 1.0);
            c += pk / fac2k;
            s += pk / fac2k1;
            dc += pkm1 * kf / fac2k;
            ds += pkm1 * kf / fac2k1;
            pkm1 = pk;
            pk *= u;
            fac2k = fac2k1 * (2.0 * kf + 2.0);
        }
        return (c, s, dc, ds);
    }
    let r = u.sqrt();
    let c = r.cosh();
    let s = r.sinh() / r;
    (c, s, 0.5 * s, (c - s) / (2.0 * u))
}

impl FactorizationData {
    fn from_table(alpha: f64, settings: QuadratureSettings, t_end: f64, table: AxisTable<2>, quad_error: f64) -> Result<Self> {
        let sa = alpha.sin();
        let q = sa / PI * table.integral()[1];
        let (l1, l2) = lambda_at_zero(alpha);
        let log_delta0 = (l1 * l2).ln();
        let eps0 = 0.5 * (l1 / l2).ln();
        let c0 = (0.5 * eps0).cosh();
        let s0 = (0.5 * eps0).sinh();
        let ca = alpha.cos();
        let closed = |sign: f64| {
            let k = (sign * 0.25 * log_delta0).exp();
            Mat2::real(
                k * (c0 + sign * s0 * ca),
                -sign * k * s0 * sa,
                -sign * k * s0 * sa,
                k * (c0 - sign * s0 * ca),
            )
        };
        let mut data = FactorizationData {
            alpha,
            settings,
            q,
            x_inf: Mat2::rotation(q),
            x_plus_0: closed(1.0),
            x_minus_0: closed(-1.0),
            x_plus_minus1: Mat2::identity(),
            dx_plus_inv_minus1: Mat2::zero(),
            quad_error,
            t_end,
            table,
        };
        let (x, dx) = data.x_with_derivative(C64::new(-1.0, 0.0), Side::Plus)?;
        let y = x.inv()?;
        data.x_plus_minus1 = x;
        data.dx_plus_inv_minus1 = -(y * dx * y);
        Ok(data)
    }

    pub fn b_beta(&self, z: C64, side: Side) -> Result<BBeta> {
        check_side(z, side, 0.3)?;
        let (v, d) = if use_axis(z, side) {
            self.table.eval(z)
        } else {
            let (ts, ws) = line_nodes(shifted_abscissa(z, side), self.t_end);
            let phis = khrapkov_line_values(self.alpha, &ts)?;
            contour_sum(&ts, &ws, &phis, z)
        };
        Ok(BBeta { log_b: v[0], beta: v[1], dlog_b: d[0], dbeta: d[1] })
    }

    pub fn x(&self, z: C64, side: Side) -> Result<Mat2> {
        Ok(self.x_with_derivative(z, side)?.0)
    }

    /// X and dX/ds.
    pub fn x_with_derivative(&self, z: C64, side: Side) -> Result<(Mat2, Mat2)> {
        let bb = self.b_beta(z, side)?;
        let a = self.alpha;
        let sa = a.sin();
        let f = f_poly(z, a);
        let df = -2.0 * z * sa * sa;
        let be = bb.beta;
        let u = f * be * be;
        let du = df * be * be + 2.0 * f * be * bb.dbeta;
        let (c, s, dc, ds) = ch_sh(u);
        let jm = j_mat(z, a);
        let m = Mat2::identity().scale(c) + jm.scale(be * s);
        let dbs = bb.dbeta * s + be * ds * du;
        let dm = Mat2::identity().scale(dc * du) + jm.scale(dbs) + j_prime(a).scale(be * s);
        let b = bb.log_b.exp();
        Ok((m.scale(b), (m.scale(bb.dlog_b) + dm).scale(b)))
    }

    /// The inverse rotation applied to SIF vectors.
    pub fn x_inf_inv(&self) -> Mat2 {
        Mat2::rotation(-self.q)
    }

    pub fn table_len(&self) -> usize {
        self.table.tau.len()
    }
}

pub fn x_matrix(data: &FactorizationData, s: C64, side: Side) -> Result<Mat2> {
    data.x(s, side)
}

/// Build the Khrapkov factorization for a crack along a wedge side of angle alpha.
pub fn build_khrapkov(alpha: f64, settings: &QuadratureSettings) -> Result<FactorizationData> {
    settings.validate()?;
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Invalid(format!("alpha = {alpha} must lie in (0, pi)")));
    }
    build_khrapkov_to(alpha, settings, tail_point(2.0 * alpha, settings))
}

/// As `build_khrapkov` but with every tau-integral cut at `t_end` and no tail.
///
/// Only useful for reproducing values computed with a short cutoff; the
/// neglected tail is of order exp(-2 alpha t_end).
pub fn build_khrapkov_truncated(alpha: f64, settings: &QuadratureSettings, t_end: f64) -> Result<FactorizationData> {
    settings.validate()?;
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Invalid(format!("alpha = {alpha} must lie in (0, pi)")));
    }
    if !(t_end > 1.0 && t_end.is_finite()) {
        return Err(Error::Invalid(format!("cutoff t_end = {t_end} must exceed 1")));
    }
    build_khrapkov_to(alpha, settings, t_end)
}

fn build_khrapkov_to(alpha: f64, settings: &QuadratureSettings, t_end: f64) -> Result<FactorizationData> {
    let f = |t: f64| khrapkov_axis_values(alpha, t);
    let probe = |tab: &AxisTable<2>| {
        let int = tab.integral();
        let (v, _) = tab.eval(C64::new(-1.0, 0.0));
        [int[1], v[0].re, v[1].re]
    };
    let mut width = 2.0 * PANEL_WIDTH;
    let mut coarse = tabulate(t_end, width, &f)?;
    loop {
        width *= 0.5;
        let fine = tabulate(t_end, width, &f)?;
        let (a, b) = (probe(&coarse), probe(&fine));
        let err = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let scale = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
        if err <= settings.abs_tol.max(settings.rel_tol * scale) || width < 0.01 {
            return FactorizationData::from_table(alpha, *settings, t_end, fine, err.max(1e-16));
        }
        coarse = fine;
    }
}

const CACHE_MAGIC: &[u8; 4] = b"WCKF";
const CACHE_VERSION: u32 = 1;

fn cache_path(dir: &Path, alpha: f64, settings: &QuadratureSettings) -> PathBuf {
    dir.join(format!(
        "khrapkov-v{CACHE_VERSION}-{:016x}-{:016x}.bin",
        alpha.to_bits(),
        settings.rel_tol.to_bits()
    ))
}

fn write_cache(path: &Path, data: &FactorizationData) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
    let mut buf = Vec::with_capacity(64 + 32 * data.table.tau.len());
    buf.extend_from_slice(CACHE_MAGIC);
    buf.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    buf.extend_from_slice(&data.alpha.to_le_bytes());
    buf.extend_from_slice(&data.settings.rel_tol.to_le_bytes());
    buf.extend_from_slice(&(data.table.tau.len() as u64).to_le_bytes());
    buf.extend_from_slice(&data.t_end.to_le_bytes());
    buf.extend_from_slice(&data.quad_error.to_le_bytes());
    for k in 0..data.table.tau.len() {
        for x in [data.table.tau[k], data.table.w[k], data.table.vals[k][0], data.table.vals[k][1]] {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    let mut file = fs::File::create(&tmp).map_err(io)?;
    file.write_all(&buf).map_err(io)?;
    file.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn read_cache(path: &Path, alpha: f64, settings: &QuadratureSettings) -> Result<FactorizationData> {
    let bytes = fs::read(path).map_err(|e| Error::Cache(format!("{}: {e}", path.display())))?;
    let bad = || Error::Cache(format!("{}: malformed cache file", path.display()));
    let f64_at = |i: usize| -> Result<f64> {
        bytes.get(i..i + 8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).ok_or_else(bad)
    };
    if bytes.len() < 48 || &bytes[0..4] != CACHE_MAGIC {
        return Err(bad());
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_VERSION || f64_at(8)? != alpha || f64_at(16)? != settings.rel_tol {
        return Err(Error::Cache(format!("{}: header mismatch", path.display())));
    }
    let n = u64::from_le_bytes(bytes[24..32].try_into().unwrap()) as usize;
    let t_end = f64_at(32)?;
    let quad_error = f64_at(40)?;
    if bytes.len() != 48 + 32 * n {
        return Err(bad());
    }
    let mut table = AxisTable { tau: Vec::with_capacity(n), w: Vec::with_capacity(n), vals: Vec::with_capacity(n) };
    for k in 0..n {
        let o = 48 + 32 * k;
        table.tau.push(f64_at(o)?);
        table.w.push(f64_at(o + 8)?);
        table.vals.push([f64_at(o + 16)?, f64_at(o + 24)?]);
    }
    FactorizationData::from_table(alpha, *settings, t_end, table, quad_error)
}

/// As `build_khrapkov`, reusing a table stored under `dir` when present.
pub fn build_khrapkov_cached(alpha: f64, settings: &QuadratureSettings, dir: Option<&Path>) -> Result<FactorizationData> {
    let Some(dir) = dir else {
        return build_khrapkov(alpha, settings);
    };
    let path = cache_path(dir, alpha, settings);
    if path.exists() {
        if let Ok(data) = read_cache(&path, alpha, settings) {
            return Ok(data);
        }
    }
    let data = build_khrapkov(alpha, settings)?;
    write_cache(&path, &data)?;
    Ok(data)
}

/// log L0(i tau) = log(1 - tau^2/sinh^2(pi tau/2)).
pub fn scalar_axis_value(tau: f64) -> f64 {
    if tau.abs() < 1e-8 {
        return (1.0 - 4.0 / (PI * PI)).ln();
    }
    let sh = (0.5 * PI * tau).sinh();
    (1.0 - (tau / sh).powi(2)).ln()
}

/// Integrand of the constant X1; tends to pi^2/(3(4 - pi^2)) at 0.
pub fn x1_integrand(t: f64) -> f64 {
    let x = 0.5 * PI * t;
    if x < 1e-8 {
        return PI * PI / (3.0 * (4.0 - PI * PI));
    }
    let num = if x < 1e-2 {
        let x2 = x * x;
        x2 / 3.0 - x2 * x2 / 45.0 + 2.0 * x2 * x2 * x2 / 945.0
    } else {
        x / x.tanh() - 1.0
    };
    num / (t * t - x.sinh().powi(2))
}

/// Scalar factors X+-(s) of L0, with L+- = a+- X+-.
#[derive(Debug, Clone)]
pub struct ScalarFactorData {
    pub x_minus_0: f64,
    pub l_minus_0: f64,
    pub x1: f64,
    pub l0_const: f64,
    pub gamma_koiter: f64,
    pub quad_error: f64,
    t_end: f64,
    table: AxisTable<1>,
}

impl ScalarFactorData {
    /// log X and its derivative.
    pub fn log_x(&self, z: C64, side: Side) -> Result<(C64, C64)> {
        check_side(z, side, 0.7)?;
        if use_axis(z, side) {
            let (v, d) = self.table.eval(z);
            return Ok((v[0], d[0]));
        }
        let (ts, ws) = line_nodes(shifted_abscissa(z, side), self.t_end);
        let mut u = Unwrap::new();
        let phis: Vec<[C64; 1]> = ts.iter().map(|&t| [u.next(l0_fun(t))]).collect();
        let (v, d) = contour_sum(&ts, &ws, &phis, z);
        Ok((v[0], d[0]))
    }

    pub fn x(&self, z: C64, side: Side) -> Result<C64> {
        Ok(self.log_x(z, side)?.0.exp())
    }

    /// L+(s) = a+(s) X+(s).
    pub fn l_plus(&self, z: C64) -> Result<C64> {
        Ok(a_plus(z)? * self.x(z, Side::Plus)?)
    }

    /// L-(s) = a-(s) X-(s).
    pub fn l_minus(&self, z: C64) -> Result<C64> {
        Ok(a_minus(z)? * self.x(z, Side::Minus)?)
    }
}

pub fn build_scalar_factor(settings: &QuadratureSettings) -> Result<ScalarFactorData> {
    settings.validate()?;
    let t_end = tail_point(PI, settings);
    let f = |t: f64| Ok([scalar_axis_value(t)]);
    let mut width = 2.0 * PANEL_WIDTH;
    let mut coarse = tabulate(t_end, width, &f)?;
    let probe = |tab: &AxisTable<1>| tab.eval(C64::new(1.0, 0.0)).0[0].re;
    let (table, err) = loop {
        width *= 0.5;
        let fine = tabulate(t_end, width, &f)?;
        let err = (probe(&fine) - probe(&coarse)).abs();
        if err <= settings.abs_tol.max(settings.rel_tol * probe(&fine).abs()) || width < 0.01 {
            break (fine, err);
        }
        coarse = fine;
    };
    let x1 = integrate_decaying(x1_integrand, PI, settings)?;
    let x1_value = 2.0 / PI * x1.value;
    let mut data = ScalarFactorData {
        x_minus_0: 0.0,
        l_minus_0: 0.0,
        x1: x1_value,
        l0_const: x1_value + LN_2,
        gamma_koiter: table.eval(C64::new(1.0, 0.0)).0[0].re.exp(),
        quad_error: err.max(x1.error),
        t_end,
        table,
    };
    data.x_minus_0 = data.x(C64::new(0.0, 0.0), Side::Minus)?.re;
    data.l_minus_0 = data.l_minus(C64::new(0.0, 0.0))?.re;
    Ok(data)
}

/// The constant in log L-(s) = log L-(0) + L0 s + O(s^2).
pub fn l0_const(data: &ScalarFactorData) -> f64 {
    data.l0_const
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{g0_side, g_side, l_fun};

    const ANGLES: [f64; 7] = [PI / 8.0, PI / 4.0, PI / 3.0, PI / 2.0, 2.0 * PI / 3.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0];

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn settings() -> QuadratureSettings {
        QuadratureSettings::default()
    }

    #[test]
    fn closed_forms_at_zero() {
        for &a in &ANGLES {
            let d = build_khrapkov(a, &settings()).unwrap();
            assert!((d.x_minus_0 * d.x_plus_0 - Mat2::identity()).max_abs() < 1e-12);
            // the quadrature route agrees with the closed forms
            let xm = d.x(c(0.0, 0.0), Side::Minus).unwrap();
            let xp = d.x(c(0.0, 0.0), Side::Plus).unwrap();
            assert!((xm - d.x_minus_0).max_abs() < 1e-10, "a={a} {xm:?} {:?}", d.x_minus_0);
            assert!((xp - d.x_plus_0).max_abs() < 1e-10);
        }
    }

    #[test]
    fn boundary_factorization_residual() {
        for &a in &[PI / 8.0, PI / 2.0, 7.0 * PI / 8.0] {
            let d = build_khrapkov(a, &settings()).unwrap();
            for k in 0..12 {
                let t = c(0.0, 0.1 + 2.5 * k as f64);
                let xp = d.x(t, Side::Plus).unwrap();
                let xm = d.x(t, Side::Minus).unwrap();
                let g0 = g0_side(t, a);
                assert!((xp * xm.inv().unwrap() - g0).max_abs() < 1e-8, "a={a} t={t}");
                assert!((xm.inv().unwrap() * xp - g0).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn determinant_is_b_squared() {
        let a = PI / 3.0;
        let d = build_khrapkov(a, &settings()).unwrap();
        for &z in &[c(-1.0, 0.0), c(-0.5, 2.0), c(-3.0, -1.0)] {
            let b = d.b_beta(z, Side::Plus).unwrap().log_b.exp();
            assert!((d.x(z, Side::Plus).unwrap().det() - b * b).norm() < 1e-12 * b.norm_sqr());
        }
    }

    #[test]
    fn commutes_with_kernel() {
        let a = 2.0 * PI / 3.0;
        let d = build_khrapkov(a, &settings()).unwrap();
        let z = c(-0.25, 1.7);
        let g = g_side(z, a).unwrap();
        for side in [Side::Plus, Side::Minus] {
            let x = d.x(z, side).unwrap();
            assert!((g * x - x * g).max_abs() < 1e-10 * (1.0 + g.max_abs() * x.max_abs()));
        }
    }

    #[test]
    fn right_angle_minus_one_is_upper_triangular() {
        let d = build_khrapkov(PI / 2.0, &settings()).unwrap();
        assert!(d.x_plus_minus1.get(1, 0).norm() < 1e-14);
    }

    #[test]
    fn x_inf_limit() {
        let a = PI / 2.0;
        let d = build_khrapkov(a, &settings()).unwrap();
        assert!((d.x_inf.det() - 1.0).norm() < 1e-14);
        let far = d.x(c(-0.25, 2.0e4), Side::Plus).unwrap();
        let far_low = d.x(c(-0.25, -2.0e4), Side::Plus).unwrap();
        let r = Mat2::rotation(d.q);
        let rt = Mat2::rotation(-d.q);
        let e1 = (far - r).max_abs().min((far - rt).max_abs());
        let e2 = (far_low - r).max_abs().min((far_low - rt).max_abs());
        assert!(e1 < 1e-3 && e2 < 1e-3, "{far:?} {r:?}");
    }

    #[test]
    fn derivative_of_inverse_at_minus_one() {
        let d = build_khrapkov(PI / 4.0, &settings()).unwrap();
        let h = 1e-4;
        let yp = d.x(c(-1.0 + h, 0.0), Side::Plus).unwrap().inv().unwrap();
        let ym = d.x(c(-1.0 - h, 0.0), Side::Plus).unwrap().inv().unwrap();
        let fd = (yp - ym) * (0.5 / h);
        let rel = (fd - d.dx_plus_inv_minus1).max_abs() / d.dx_plus_inv_minus1.max_abs();
        assert!(rel < 1e-6, "{rel}");
    }

    #[test]
    fn contour_and_axis_agree() {
        let d = build_khrapkov(PI / 3.0, &settings()).unwrap();
        // X- at 0.5 by the axis form vs a contour placed further left
        let z = c(0.5, 0.3);
        let axis = d.b_beta(z, Side::Minus).unwrap();
        let (ts, ws) = line_nodes(0.1, d.t_end);
        let phis = khrapkov_line_values(d.alpha, &ts).unwrap();
        let (v, _) = contour_sum(&ts, &ws, &phis, z);
        assert!((axis.log_b - v[0]).norm() < 1e-12 && (axis.beta - v[1]).norm() < 1e-12);
    }

    #[test]
    fn wrong_side_is_rejected() {
        let d = build_khrapkov(PI / 3.0, &settings()).unwrap();
        assert!(matches!(d.x(c(1.0, 0.0), Side::Plus), Err(Error::WrongHalfPlane { .. })));
        assert!(matches!(d.x(c(-1.0, 0.0), Side::Minus), Err(Error::WrongHalfPlane { .. })));
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("wedgecrack-cache-test-{}", std::process::id()));
        let a = PI / 4.0;
        let first = build_khrapkov_cached(a, &settings(), Some(&dir)).unwrap();
        let second = build_khrapkov_cached(a, &settings(), Some(&dir)).unwrap();
        assert_eq!(first.q, second.q);
        assert_eq!(first.x_plus_minus1, second.x_plus_minus1);
        let path = cache_path(&dir, a, &settings());
        fs::write(&path, b"garbage").unwrap();
        let third = build_khrapkov_cached(a, &settings(), Some(&dir)).unwrap();
        assert_eq!(first.q, third.q);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn scalar_constants() {
        let d = build_scalar_factor(&settings()).unwrap();
        assert!((d.gamma_koiter - 1.121_522_2).abs() < 1e-6, "{}", d.gamma_koiter);
        assert!((d.x_minus_0 - PI / (PI * PI - 4.0).sqrt()).abs() < 1e-10);
        assert!((x1_integrand(0.0) - PI * PI / (3.0 * (4.0 - PI * PI))).abs() < 1e-15);
        assert!((x1_integrand(1e-4) - x1_integrand(0.0)).abs() < 1e-6);
        assert!((d.l0_const - d.x1 - LN_2).abs() == 0.0);
    }

    #[test]
    fn scalar_residual() {
        let d = build_scalar_factor(&settings()).unwrap();
        for k in 0..10 {
            let t = c(0.0, 0.1 + 3.0 * k as f64);
            let lp = d.l_plus(t).unwrap();
            let lm = d.l_minus(t).unwrap();
            assert!((-0.25 * lp / lm - l_fun(t)).norm() < 1e-9, "t={t}");
        }
    }

    #[test]
    fn l0_const_is_log_derivative() {
        let d = build_scalar_factor(&settings()).unwrap();
        let h = 1e-4;
        let fd = ((d.l_minus(c(h, 0.0)).unwrap().ln() - d.l_minus(c(-h, 0.0)).unwrap().ln()) / (2.0 * h)).re;
        assert!((fd - d.l0_const).abs() < 1e-6, "{fd} {}", d.l0_const);
    }
}
