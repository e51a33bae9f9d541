//! Edge crack along a wedge side: SIFs for constant and eigen-solution loads,
//! the weight matrix, and the full transform solution for general loads.
//!
//! With Psi0 = (1/2 pi i) int K+ X+ g- dt along a vertical line between the
//! poles of g- and the origin, the SIFs are K = sqrt(2b) Xinf^{-1} Psi0.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::factor::{FactorizationData, Side};
use crate::kernels::{residue_g, vadd, vscale, Mat2, Vec2};
use crate::quadrature::{adaptive, integrate_decaying, mellin_contour_vec, QuadratureSettings};
use crate::roots::{char_fun, char_roots, pole_table_window, RootKind};
use crate::specfun::{k_minus, k_plus};

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

fn creal(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn vreal(v: [f64; 2]) -> Vec2 {
    [creal(v[0]), creal(v[1])]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenKind {
    First,
    Second,
}

/// Crack-face traction sigma(b rho), rho in (0, 1), as (normal, shear).
pub type Sampler = Arc<dyn Fn(f64) -> [f64; 2] + Send + Sync>;

#[derive(Clone)]
pub enum LoadSpec {
    /// Uniform pressure p_theta = P1, p_rtheta = P2.
    Constant { p1: f64, p2: f64 },
    /// Loads p_theta = k r^{mu-1}, p_rtheta = k k_* r^{mu-1} of an eigen-solution.
    Eigen { which: EigenKind, k_theta0: f64 },
    General(Sampler),
}

impl std::fmt::Debug for LoadSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LoadSpec::Constant { p1, p2 } => write!(f, "Constant({p1}, {p2})"),
            LoadSpec::Eigen { which, k_theta0 } => write!(f, "Eigen({which:?}, {k_theta0})"),
            LoadSpec::General(_) => write!(f, "General(..)"),
        }
    }
}

impl LoadSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            LoadSpec::Constant { p1, p2 } if !(p1.is_finite() && p2.is_finite()) => {
                Err(Error::Invalid("constant load must be finite".into()))
            }
            LoadSpec::Eigen { k_theta0, .. } if !k_theta0.is_finite() => {
                Err(Error::Invalid("eigen load scale must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

/// SIFs with the load-independent coefficient matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgeSif {
    pub k_i: f64,
    pub k_ii: f64,
    /// b^{-1/2} K = D P (constant load) or K/(sqrt(b) k) = D (1, k_*) (eigen load).
    pub d: [[f64; 2]; 2],
}

fn check_b(b: f64) -> Result<()> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::Invalid(format!("crack length b = {b} must be positive")));
    }
    Ok(())
}

/// K = sqrt(2b) Xinf^{-1} Psi0, real part.
pub fn sif_from_psi0(fact: &FactorizationData, b: f64, psi0: Vec2) -> [f64; 2] {
    let k = fact.x_inf_inv().apply(psi0);
    let c = (2.0 * b).sqrt();
    [c * k[0].re, c * k[1].re]
}

/// The constant-load matrix D = 2 sqrt(2/pi) Xinf^{-1} X+(-1).
pub fn d_matrix_constant(fact: &FactorizationData) -> [[f64; 2]; 2] {
    (fact.x_inf_inv() * fact.x_plus_minus1 * (2.0 * (2.0 / PI).sqrt())).re()
}

pub fn sif_edge_constant(fact: &FactorizationData, b: f64, p: [f64; 2]) -> Result<EdgeSif> {
    check_b(b)?;
    let d = d_matrix_constant(fact);
    let sb = b.sqrt();
    Ok(EdgeSif {
        k_i: sb * (d[0][0] * p[0] + d[0][1] * p[1]),
        k_ii: sb * (d[1][0] * p[0] + d[1][1] * p[1]),
        d,
    })
}

/// Homogeneous wedge field with sigma_theta(r, 0) = -k r^{mu-1}, normalized to k = 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSolution {
    pub alpha: f64,
    pub which: EigenKind,
    pub mu: f64,
    pub k_star: f64,
    pub c: [f64; 4],
    pub d0: f64,
}

impl EigenSolution {
    /// Angular factor of sigma_theta.
    pub fn sigma_theta(&self, theta: f64) -> f64 {
        let s = self.mu - 1.0;
        let [c1, c2, c3, c4] = self.c;
        c1 * (s * theta).cos() + c2 * ((s + 2.0) * theta).cos() + c3 * (s * theta).sin() + c4 * ((s + 2.0) * theta).sin()
    }

    /// Angular factor of tau_rtheta.
    pub fn tau_r_theta(&self, theta: f64) -> f64 {
        let s = self.mu - 1.0;
        let [c1, c2, c3, c4] = self.c;
        let k = s / (s + 2.0);
        k * c1 * (s * theta).sin() + c2 * ((s + 2.0) * theta).sin() - k * c3 * (s * theta).cos() - c4 * ((s + 2.0) * theta).cos()
    }

    /// Residual of sin^2 mu(pi+alpha) = mu^2 sin^2 alpha.
    pub fn char_residual(&self) -> f64 {
        char_fun(self.mu, self.alpha)
    }
}

fn k_star(mu: f64, a: f64) -> f64 {
    let mp = mu * PI;
    let num = mu * (mu + 1.0) * (mp - 2.0 * a).cos() + mu * (mu - 1.0) * (mp + 2.0 * a).cos()
        - 2.0 * (mu * (PI + 2.0 * a)).cos()
        - 2.0 * (mu * mu - 1.0) * mp.cos();
    num / (4.0 * mu * (mu + 1.0) * mp.sin() * a.sin().powi(2))
}

pub fn eigen_solution(alpha: f64, which: EigenKind) -> Result<EigenSolution> {
    let (mu1, mu0) = char_roots(alpha)?;
    let mu = match which {
        EigenKind::First => mu1,
        EigenKind::Second => mu0.ok_or(Error::NoSecondRoot { alpha })?,
    };
    let a = alpha;
    let mp = mu * PI;
    let d0 = (mu - 1.0) * mp.cos() - mu * (mp - 2.0 * a).cos() + (mu * (PI + 2.0 * a)).cos();
    let c4 = d0 / (4.0 * mu * mp.sin() * a.sin().powi(2));
    let r = c4 / d0;
    let c1 = r * ((mu + 1.0) * mp.sin() + (mu * (PI + 2.0 * a)).sin() - mu * (mp + 2.0 * a).sin());
    let c2 = r * ((mu - 1.0) * mp.sin() - (mu * (PI + 2.0 * a)).sin() - mu * (mp - 2.0 * a).sin());
    let c3 = r * ((mu + 1.0) * mp.cos() - (mu * (PI + 2.0 * a)).cos() - mu * (mp + 2.0 * a).cos());
    Ok(EigenSolution { alpha, which, mu, k_star: k_star(mu, a), c: [c1, c2, c3, c4], d0 })
}

/// D = -sqrt(2) K+(-mu) Xinf^{-1} X+(-mu).
pub fn d_matrix_eigen(fact: &FactorizationData, eig: &EigenSolution) -> Result<[[f64; 2]; 2]> {
    let s = creal(-eig.mu);
    let kp = k_plus(s)?;
    let x = fact.x(s, Side::Plus)?;
    Ok((fact.x_inf_inv() * x).scale(-SQRT_2 * kp).re())
}

/// K = k b^{mu-1/2} D (1, k_*); the load is sigma_theta(r, 0) = -k (r/b)^{mu-1} b^{mu-1}.
pub fn sif_edge_eigen(fact: &FactorizationData, b: f64, k_theta0: f64, eig: &EigenSolution) -> Result<EdgeSif> {
    check_b(b)?;
    if (fact.alpha - eig.alpha).abs() > 1e-14 {
        return Err(Error::Invalid("eigen-solution and factorization angles differ".into()));
    }
    let d = d_matrix_eigen(fact, eig)?;
    let scale = k_theta0 * b.powf(eig.mu - 0.5);
    Ok(EdgeSif {
        k_i: scale * (d[0][0] + d[0][1] * eig.k_star),
        k_ii: scale * (d[1][0] + d[1][1] * eig.k_star),
        d,
    })
}

/// Mellin transform g-(s) of the crack-face traction and the strip where it is holomorphic.
pub trait LoadTransform: Sync {
    fn g_minus(&self, s: C64) -> Result<Vec2>;
    /// g- is holomorphic for Re s greater than this (and below 0 the line must stay).
    fn left_bound(&self) -> f64;
}

/// g-(s) = sum c_k/(s + lambda_k).
#[derive(Debug, Clone, PartialEq)]
pub struct PoleLoad {
    pub terms: Vec<(f64, [f64; 2])>,
}

impl PoleLoad {
    pub fn constant(p: [f64; 2]) -> Self {
        PoleLoad { terms: vec![(1.0, [-p[0], -p[1]])] }
    }

    pub fn eigen(eig: &EigenSolution, k_theta0: f64, b: f64) -> Self {
        let c = -k_theta0 * b.powf(eig.mu - 1.0);
        PoleLoad { terms: vec![(eig.mu, [c, c * eig.k_star])] }
    }

    /// Psi0 in closed form: sum K+(-lambda) X+(-lambda) c.
    pub fn psi0(&self, fact: &FactorizationData) -> Result<Vec2> {
        let mut acc = [cz(); 2];
        for (lam, c) in &self.terms {
            let s = creal(-lam);
            let m = fact.x(s, Side::Plus)?.scale(k_plus(s)?);
            acc = vadd(acc, m.apply(vreal(*c)));
        }
        Ok(acc)
    }

    /// Psi-(s) = -sum K+(-lambda) X+(-lambda) c/(s + lambda).
    pub fn psi_minus(&self, fact: &FactorizationData, s: C64) -> Result<Vec2> {
        let mut acc = [cz(); 2];
        for (lam, c) in &self.terms {
            let p = creal(-lam);
            let m = fact.x(p, Side::Plus)?.scale(k_plus(p)?);
            acc = vadd(acc, vscale(m.apply(vreal(*c)), -1.0 / (s + lam)));
        }
        Ok(acc)
    }
}

impl LoadTransform for PoleLoad {
    fn g_minus(&self, s: C64) -> Result<Vec2> {
        let mut acc = [cz(); 2];
        for (lam, c) in &self.terms {
            acc = vadd(acc, vscale(vreal(*c), 1.0 / (s + lam)));
        }
        Ok(acc)
    }

    fn left_bound(&self) -> f64 {
        self.terms.iter().map(|(l, _)| -l).fold(-1.0, f64::max)
    }
}

/// Transform of a sampled load by quadrature in x = -log rho.
///
/// `exponent` bounds the load near the vertex: |sigma(b rho)| <= C rho^{exponent}, exponent > -1.
pub struct SampledLoad {
    pub sampler: Sampler,
    pub exponent: f64,
    pub settings: QuadratureSettings,
}

impl LoadTransform for SampledLoad {
    fn g_minus(&self, s: C64) -> Result<Vec2> {
        let rate = s.re + 1.0 + self.exponent;
        if !(rate > 0.0) {
            return Err(Error::Invalid(format!("load transform diverges at Re s = {}", s.re)));
        }
        let f = &self.sampler;
        let est = integrate_decaying(
            |x: f64| {
                let v = f((-x).exp());
                let e = (-(s + 1.0) * x).exp();
                [e * v[0], e * v[1]]
            },
            rate,
            &self.settings,
        )?;
        Ok(est.value)
    }

    fn left_bound(&self) -> f64 {
        -1.0 - self.exponent
    }
}

/// Transform solution for an arbitrary load: Psi+-, sigma+ and chi-.
pub struct EdgeGeneralSolution<'a> {
    fact: &'a FactorizationData,
    load: &'a dyn LoadTransform,
    settings: QuadratureSettings,
    /// Abscissa of the splitting line.
    pub omega: f64,
    pub psi0: Vec2,
    pub k: [f64; 2],
    pub quad_error: f64,
}

/// Map x in (0,1) to tau = (x/(1-x))^2 on the half-line.
fn half_line(x: f64) -> (f64, f64) {
    let u = x / (1.0 - x);
    (u * u, 2.0 * x / (1.0 - x).powi(3))
}

fn line_integral<F: FnMut(C64) -> Result<Vec2>>(
    mut f: F,
    omega: f64,
    settings: &QuadratureSettings,
) -> Result<(Vec2, f64)> {
    let mut fail: Option<Error> = None;
    let est = adaptive(
        |x: f64| {
            let (tau, jac) = half_line(x);
            let up = f(C64::new(omega, tau));
            let dn = f(C64::new(omega, -tau));
            match (up, dn) {
                (Ok(a), Ok(b)) => {
                    let k = jac / (2.0 * PI);
                    [(a[0] + b[0]) * k, (a[1] + b[1]) * k]
                }
                (Err(e), _) | (_, Err(e)) => {
                    fail.get_or_insert(e);
                    [cz(); 2]
                }
            }
        },
        0.0,
        1.0,
        settings,
    );
    if let Some(e) = fail {
        return Err(e);
    }
    let est = est?;
    Ok((est.value, est.error))
}

pub fn solve_edge_general<'a>(
    fact: &'a FactorizationData,
    b: f64,
    load: &'a dyn LoadTransform,
    settings: &QuadratureSettings,
) -> Result<EdgeGeneralSolution<'a>> {
    check_b(b)?;
    let lo = load.left_bound();
    if !(lo < 0.0) {
        return Err(Error::Invalid("load transform must be holomorphic on a strip left of 0".into()));
    }
    let omega = 0.5 * lo.max(-1.0);
    let f = |t: C64| -> Result<Vec2> {
        let m = fact.x(t, Side::Plus)?.scale(k_plus(t)?);
        Ok(m.apply(load.g_minus(t)?))
    };
    let (psi0, err) = line_integral(f, omega, settings)?;
    let k = sif_from_psi0(fact, b, psi0);
    Ok(EdgeGeneralSolution { fact, load, settings: *settings, omega, psi0, k, quad_error: err })
}

impl EdgeGeneralSolution<'_> {
    /// (1/2 pi i) int F(t)/(t - s) dt along Re t = w.
    fn cauchy(&self, s: C64, w: f64) -> Result<Vec2> {
        let fact = self.fact;
        let load = self.load;
        let f = |t: C64| -> Result<Vec2> {
            let m = fact.x(t, Side::Plus)?.scale(k_plus(t)?);
            Ok(vscale(m.apply(load.g_minus(t)?), 1.0 / (t - s)))
        };
        Ok(line_integral(f, w, &self.settings)?.0)
    }

    /// A line in the holomorphy strip at least 0.1 away from s on the requested side.
    fn line_for(&self, s: C64, s_right: bool) -> Result<f64> {
        let lo = self.load.left_bound().max(-1.0);
        let w = self.omega;
        let ok = |w: f64| if s_right { s.re - w >= 0.1 } else { w - s.re >= 0.1 };
        if ok(w) {
            return Ok(w);
        }
        let alt = if s_right { s.re - 0.1 } else { s.re + 0.1 };
        if alt > lo + 0.02 && alt < -0.02 {
            return Ok(alt);
        }
        Err(Error::WrongHalfPlane { side: if s_right { "minus" } else { "plus" }, at: format!("{s}") })
    }

    /// Psi-(s), holomorphic to the right of the load poles.
    pub fn psi_minus(&self, s: C64) -> Result<Vec2> {
        if s.re > self.omega + 0.1 {
            return self.cauchy(s, self.omega);
        }
        match self.line_for(s, true) {
            Ok(w) => self.cauchy(s, w),
            // continue across the line: Psi- = Psi+ - K+ X+ g-
            Err(_) => {
                let w = self.line_for(s, false)?;
                let m = self.fact.x(s, Side::Plus)?.scale(k_plus(s)?);
                let f = m.apply(self.load.g_minus(s)?);
                let p = self.cauchy(s, w)?;
                Ok([p[0] - f[0], p[1] - f[1]])
            }
        }
    }

    /// Psi+(s), holomorphic for Re s < 0.
    pub fn psi_plus(&self, s: C64) -> Result<Vec2> {
        let w = self.line_for(s, false)?;
        self.cauchy(s, w)
    }

    /// chi-(s) = -(4/K-(s)) [X-(s)]^{-1} Psi-(s).
    pub fn chi_minus(&self, s: C64) -> Result<Vec2> {
        let psi = self.psi_minus(s)?;
        let xi = self.fact.x(s, Side::Minus)?.inv()?;
        Ok(vscale(xi.apply(psi), -4.0 / k_minus(s)?))
    }

    /// sigma+(s) = -(1/K+(s)) [X+(s)]^{-1} Psi+(s).
    pub fn sigma_plus(&self, s: C64) -> Result<Vec2> {
        let psi = self.psi_plus(s)?;
        let xi = self.fact.x(s, Side::Plus)?.inv()?;
        Ok(vscale(xi.apply(psi), -1.0 / k_plus(s)?))
    }
}

/// Abscissa of the contour in the weight-matrix integral.
const WEIGHT_OMEGA: f64 = -0.25;
/// Radius below which the residue series is summed.
const SERIES_RADIUS: f64 = 0.5;
/// Residue terms are kept up to this real part; 0.5^60 is below double precision.
const SERIES_RE_MAX: f64 = 60.0;

/// Evaluator of the weight matrix W(r) = sqrt(2b) Xinf^{-1} w(r),
/// w(r) = (1/2 pi i) int K+(t) X+(t) r^t dt.
pub struct WeightMatrix<'a> {
    fact: &'a FactorizationData,
    b: f64,
    settings: QuadratureSettings,
    /// (p, -K-(p) res G(p) X-(p)/4) over all poles with Re p <= SERIES_RE_MAX.
    terms: Vec<(C64, Mat2)>,
}

impl<'a> WeightMatrix<'a> {
    pub fn new(fact: &'a FactorizationData, b: f64, settings: &QuadratureSettings) -> Result<Self> {
        check_b(b)?;
        let table = pole_table_window(fact.alpha, SERIES_RE_MAX)?;
        let mut terms = Vec::new();
        for root in table.full_sequence() {
            let p = root.s;
            let res = residue_g(p, fact.alpha, root.kind == RootKind::IntegerPole);
            let xm = if p.norm() == 0.0 { fact.x_minus_0 } else { fact.x(p, Side::Minus)? };
            terms.push((p, (res * xm).scale(-0.25 * k_minus(p)?)));
        }
        Ok(WeightMatrix { fact, b, settings: *settings, terms })
    }

    /// w(r) as a complex matrix.
    fn w(&self, r: f64) -> Result<Mat2> {
        if r <= SERIES_RADIUS {
            let lr = r.ln();
            let mut acc = Mat2::zero();
            for (p, m) in &self.terms {
                acc = acc + m.scale((p * lr).exp());
            }
            return Ok(acc);
        }
        let fact = self.fact;
        let xinf = fact.x_inf;
        let mut fail: Option<Error> = None;
        let est = mellin_contour_vec(
            |t: C64| {
                let v = (|| -> Result<Mat2> {
                    let kx = fact.x(t, Side::Plus)?.scale(k_plus(t)?);
                    let kas = -1.0 / (-t).sqrt();
                    Ok(kx - xinf.scale(kas))
                })();
                match v {
                    Ok(m) => [m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]],
                    Err(e) => {
                        fail.get_or_insert(e);
                        [cz(); 4]
                    }
                }
            },
            WEIGHT_OMEGA,
            r,
            &self.settings,
        );
        if let Some(e) = fail {
            return Err(e);
        }
        let v = est?.value;
        let sing = -1.0 / ((-r.ln()).sqrt() * PI.sqrt());
        Ok(Mat2::new(v[0], v[1], v[2], v[3]) + xinf * sing)
    }

    pub fn at(&self, r: f64) -> Result<[[f64; 2]; 2]> {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::Invalid(format!("weight matrix needs 0 < r < 1, got {r}")));
        }
        Ok((self.fact.x_inf_inv() * self.w(r)? * (2.0 * self.b).sqrt()).re())
    }

    /// K = int_0^1 W(r) sigma(b r) dr for a load bounded by C r^{exponent} near 0.
    pub fn sif(&self, sampler: &dyn Fn(f64) -> [f64; 2], exponent: f64) -> Result<[f64; 2]> {
        if !(exponent > -1.0) {
            return Err(Error::Invalid("load must be integrable at the vertex".into()));
        }
        let mut fail: Option<Error> = None;
        let mut apply = |r: f64, jac: f64| -> [C64; 2] {
            match self.at(r) {
                Ok(w) => {
                    let s = sampler(r);
                    [
                        creal(jac * (w[0][0] * s[0] + w[0][1] * s[1])),
                        creal(jac * (w[1][0] * s[0] + w[1][1] * s[1])),
                    ]
                }
                Err(e) => {
                    fail.get_or_insert(e);
                    [cz(); 2]
                }
            }
        };
        // r = v^{1/(1+e)} flattens the vertex singularity on [0, 1/2]
        let m = 1.0 / (1.0 + exponent);
        let vmax = SERIES_RADIUS.powf(1.0 + exponent);
        let head = adaptive(|v: f64| apply(v.powf(m), m * v.powf(m - 1.0)), 0.0, vmax, &self.settings)?;
        // r = 1 - u^2 absorbs the (1 - r)^{-1/2} edge singularity
        let umax = (1.0 - SERIES_RADIUS).sqrt();
        let tail = adaptive(|u: f64| apply(1.0 - u * u, 2.0 * u), 0.0, umax, &self.settings)?;
        if let Some(e) = fail {
            return Err(e);
        }
        Ok([(head.value[0] + tail.value[0]).re, (head.value[1] + tail.value[1]).re])
    }
}

pub fn weight_matrix(fact: &FactorizationData, b: f64, r: f64) -> Result<[[f64; 2]; 2]> {
    WeightMatrix::new(fact, b, &fact.settings)?.at(r)
}

/// SIFs for any of the supported loads.
pub fn sif_edge(fact: &FactorizationData, b: f64, load: &LoadSpec) -> Result<EdgeSif> {
    load.validate()?;
    match load {
        LoadSpec::Constant { p1, p2 } => sif_edge_constant(fact, b, [*p1, *p2]),
        LoadSpec::Eigen { which, k_theta0 } => {
            let eig = eigen_solution(fact.alpha, *which)?;
            sif_edge_eigen(fact, b, *k_theta0, &eig)
        }
        LoadSpec::General(f) => {
            let wm = WeightMatrix::new(fact, b, &fact.settings)?;
            let k = wm.sif(&|r| f(r), 0.0)?;
            Ok(EdgeSif { k_i: k[0], k_ii: k[1], d: [[f64::NAN; 2]; 2] })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::build_khrapkov;
    use std::sync::OnceLock;

    fn fact(a: f64) -> FactorizationData {
        build_khrapkov(a, &QuadratureSettings::default()).unwrap()
    }

    fn half_pi() -> &'static FactorizationData {
        static F: OnceLock<FactorizationData> = OnceLock::new();
        F.get_or_init(|| fact(PI / 2.0))
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn constant_table_row_half_pi() {
        let s = sif_edge_constant(half_pi(), 1.0, [1.0, 0.0]).unwrap();
        let want = [[1.776778, -0.121477], [-0.202058, 1.813571]];
        for i in 0..2 {
            for j in 0..2 {
                assert!(rel(s.d[i][j], want[i][j]) < 1e-5, "{:?}", s.d);
            }
        }
    }

    #[test]
    fn sqrt_b_scaling_and_linearity() {
        let f = half_pi();
        let k1 = sif_edge_constant(f, 1.0, [0.3, -1.2]).unwrap();
        let k4 = sif_edge_constant(f, 4.0, [0.3, -1.2]).unwrap();
        assert!((k4.k_i - 2.0 * k1.k_i).abs() < 1e-12 && (k4.k_ii - 2.0 * k1.k_ii).abs() < 1e-12);
        let a = sif_edge_constant(f, 1.0, [1.0, 0.0]).unwrap();
        let b = sif_edge_constant(f, 1.0, [0.0, 1.0]).unwrap();
        let c = sif_edge_constant(f, 1.0, [1.0, 1.0]).unwrap();
        assert!((c.k_i - a.k_i - b.k_i).abs() < 1e-12);
        assert!((c.k_ii - a.k_ii - b.k_ii).abs() < 1e-12);
    }

    #[test]
    fn eigen_parameters() {
        let e = eigen_solution(PI / 4.0, EigenKind::First).unwrap();
        assert!(rel(e.mu, 0.673583) < 1e-6);
        assert!(rel(e.k_star, 1.340535) < 1e-6);
        let e = eigen_solution(PI / 2.0, EigenKind::First).unwrap();
        assert!(rel(e.k_star, 0.5430756) < 1e-6);
        let e = eigen_solution(2.0 * PI / 3.0, EigenKind::Second).unwrap();
        assert!(rel(e.mu, 0.730901) < 1e-6);
        assert!(matches!(eigen_solution(PI / 3.0, EigenKind::Second), Err(Error::NoSecondRoot { .. })));
    }

    #[test]
    fn eigen_field_is_traction_free_on_the_wedge_faces() {
        for (a, which) in [(PI / 4.0, EigenKind::First), (PI / 2.0, EigenKind::Second), (0.8 * PI, EigenKind::First)] {
            let e = eigen_solution(a, which).unwrap();
            assert!(e.char_residual().abs() < 1e-12);
            for th in [-PI, a] {
                assert!(e.sigma_theta(th).abs() < 1e-10, "{a} {th}");
                assert!(e.tau_r_theta(th).abs() < 1e-10, "{a} {th}");
            }
            // normalization: sigma_theta on the crack line is the unit profile, shear ratio k_*
            assert!((e.sigma_theta(0.0) - 1.0).abs() < 1e-10);
            assert!((e.tau_r_theta(0.0) / e.sigma_theta(0.0) - e.k_star).abs() < 1e-10);
        }
    }

    #[test]
    fn eigen_table_row_half_pi() {
        let f = half_pi();
        let e = eigen_solution(PI / 2.0, EigenKind::First).unwrap();
        let s = sif_edge_eigen(f, 1.0, 1.0, &e).unwrap();
        assert!(rel(s.d[0][0], 2.764929) < 1e-5);
        assert!(rel(s.d[1][1], 2.848868) < 1e-5);
        // K / (sqrt(b) k) is independent of b only after the b^{mu-1} load scale
        let s4 = sif_edge_eigen(f, 4.0, 1.0, &e).unwrap();
        assert!(rel(s4.k_i, s.k_i * 4f64.powf(e.mu - 0.5)) < 1e-12);
    }

    #[test]
    fn general_path_matches_pole_form_for_constant_load() {
        let f = half_pi();
        let set = QuadratureSettings::default();
        let load = PoleLoad::constant([1.0, 0.5]);
        let sol = solve_edge_general(f, 1.0, &load, &set).unwrap();
        let exact = sif_edge_constant(f, 1.0, [1.0, 0.5]).unwrap();
        assert!(rel(sol.k[0], exact.k_i) < 1e-8, "{:?} {:?}", sol.k, exact);
        assert!(rel(sol.k[1], exact.k_ii) < 1e-8);
        for s in [C64::new(0.3, 0.7), C64::new(-0.6, 2.0), C64::new(2.0, -1.0)] {
            let got = sol.psi_minus(s).unwrap();
            let want = load.psi_minus(f, s).unwrap();
            for j in 0..2 {
                assert!((got[j] - want[j]).norm() < 1e-8 * (1.0 + want[j].norm()), "{s} {got:?} {want:?}");
            }
        }
    }

    #[test]
    fn sigma_plus_asymptote_gives_the_sif() {
        let f = half_pi();
        let set = QuadratureSettings::default();
        let load = PoleLoad::constant([1.0, 0.0]);
        let sol = solve_edge_general(f, 1.0, &load, &set).unwrap();
        let target = sif_from_psi0(f, 0.5, sol.psi0);
        // the correction decays like |s|^{-1/2}
        let s = C64::new(-1e8, 0.0);
        let v = sol.sigma_plus(s).unwrap();
        let k = (-s).sqrt();
        for j in 0..2 {
            assert!((v[j] * k - target[j]).norm() < 1e-4 * target[0].abs(), "{v:?} {target:?}");
        }
    }

    #[test]
    fn zero_load_gives_zero_transforms() {
        let f = half_pi();
        let load = PoleLoad { terms: vec![(1.0, [0.0, 0.0])] };
        let sol = solve_edge_general(f, 1.0, &load, &QuadratureSettings::default()).unwrap();
        assert_eq!(sol.k, [0.0, 0.0]);
        let c = sol.chi_minus(C64::new(0.5, 1.0)).unwrap();
        assert!(c[0].norm() == 0.0 && c[1].norm() == 0.0);
    }

    #[test]
    fn weight_matrix_is_continuous_between_series_and_contour() {
        let f = half_pi();
        let wm = WeightMatrix::new(f, 1.0, &QuadratureSettings::default()).unwrap();
        let lo = wm.w(0.5).unwrap();
        let fact = f;
        let xinf = fact.x_inf;
        // force the contour branch at the same point
        let est = mellin_contour_vec(
            |t: C64| {
                let m = fact.x(t, Side::Plus).unwrap().scale(k_plus(t).unwrap()) - xinf.scale(-1.0 / (-t).sqrt());
                [m.0[0][0], m.0[0][1], m.0[1][0], m.0[1][1]]
            },
            WEIGHT_OMEGA,
            0.5,
            &QuadratureSettings::default(),
        )
        .unwrap();
        let sing = -1.0 / ((-(0.5f64).ln()).sqrt() * PI.sqrt());
        let hi = Mat2::new(est.value[0], est.value[1], est.value[2], est.value[3]) + xinf * sing;
        assert!((lo - hi).max_abs() < 1e-8, "{lo:?} {hi:?}");
        assert!(lo.0.iter().flatten().all(|z| z.im.abs() < 1e-10));
    }

    #[test]
    fn weight_matrix_reproduces_closed_forms() {
        let f = half_pi();
        let wm = WeightMatrix::new(f, 1.0, &QuadratureSettings::default()).unwrap();
        let p = [0.7, -0.4];
        let k = wm.sif(&|_| [-p[0], -p[1]], 0.0).unwrap();
        let exact = sif_edge_constant(f, 1.0, p).unwrap();
        assert!(rel(k[0], exact.k_i) < 1e-6, "{k:?} {exact:?}");
        assert!(rel(k[1], exact.k_ii) < 1e-6, "{k:?} {exact:?}");
        let e = eigen_solution(PI / 2.0, EigenKind::First).unwrap();
        let (mu, ks) = (e.mu, e.k_star);
        let k = wm.sif(&|r| [-r.powf(mu - 1.0), -ks * r.powf(mu - 1.0)], mu - 1.0).unwrap();
        let exact = sif_edge_eigen(f, 1.0, 1.0, &e).unwrap();
        assert!(rel(k[0], exact.k_i) < 1e-6, "{k:?} {exact:?}");
        assert!(rel(k[1], exact.k_ii) < 1e-6, "{k:?} {exact:?}");
    }
}
