//! Internal crack a < r < b normal to the boundary of a half-plane, under
//! uniform normal pressure P.
//!
//! The scalar analogue of the wedge system: with L = -L+/(4 L-),
//!   chi-(s) = L-(s) S1(s) - delta^{s+1} S2(s) / (4 L(s) L-(s)),
//!   chi+(s) = S2(s)/L+(s) - delta^{-s-1} L+(s) S1(s) / (4 L(s)),
//! S1 = -p+/(s+1) + sum A+_n/(s - s_n),  S2 = C + p-/(s+1) + sum A-_n/(s + s_n).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::factor::ScalarFactorData;
use crate::internal::{energy_release, CrackConfig, Diagnostics, SifResult, TruncationSettings};
use crate::kernels::{l_fun, MaterialSpec};
use crate::roots::halfplane_zeros_window;

fn cz() -> C64 {
    C64::new(0.0, 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HalfplaneSystem {
    pub delta: f64,
    /// s_0 = 0 followed by the non-real zeros of s^2 - sin^2(pi s/2) and their conjugates.
    pub roots: Vec<C64>,
    pub a_plus: Vec<C64>,
    /// A- at -s_n, n >= 1 (index shifted by 1).
    pub a_minus: Vec<C64>,
    pub c_circ: f64,
    pub p_plus: f64,
    pub p_minus: f64,
    pub truncation_bound: f64,
    pub residual: f64,
}

impl HalfplaneSystem {
    pub fn a0_plus(&self) -> f64 {
        self.a_plus[0].re
    }
}

/// gamma = exp{-(1/pi) int_0^inf log(1 - t^2/sinh^2(pi t/2)) dt/(t^2+1)} = X-(1).
pub fn koiter_gamma(fact: &ScalarFactorData) -> f64 {
    fact.gamma_koiter
}

pub fn halfplane_roots(delta: f64, trunc: &TruncationSettings) -> Result<(Vec<C64>, f64)> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Invalid(format!("delta = {delta} must lie in (0, 1)")));
    }
    let re_max = trunc.window(delta);
    let mut roots = vec![cz()];
    for z in halfplane_zeros_window(re_max)? {
        roots.push(z);
        roots.push(z.conj());
    }
    let bound = delta.powf(roots.last().map(|z| z.re).unwrap_or(0.0));
    if roots.len() > trunc.max_roots {
        return Err(Error::Truncation { bound: delta.powf(roots[trunc.max_roots - 1].re), tol: trunc.tol });
    }
    Ok((roots, bound))
}

/// Assembled system in block form [[M, m_c], [k, k_c]] over (A+, A-, C).
struct Blocks {
    a: DMatrix<C64>,
    rhs: DVector<C64>,
    p_plus: f64,
    p_minus: f64,
}

fn assemble(fact: &ScalarFactorData, delta: f64, p: f64, s: &[C64]) -> Result<Blocks> {
    let n = s.len() - 1;
    let lp1 = fact.l_plus(C64::new(-1.0, 0.0))?.re;
    let pp = p / lp1;
    let pm = PI * p * lp1 / 4.0;
    let l0c = fact.l0_const;
    let mut dm = vec![C64::new(2.0, 0.0)];
    let mut dp = vec![cz()];
    for &z in &s[1..] {
        let sp = (PI * z).sin();
        let r = sp / (PI * sp - 4.0 * z);
        dm.push(r / fact.l_minus(z)?.powi(2));
        dp.push(r * fact.l_plus(-z)?.powi(2));
    }
    let ld = delta.ln();
    let dim = 2 * n + 2;
    let ic = 2 * n + 1;
    let mut a = DMatrix::<C64>::zeros(dim, dim);
    let mut rhs = DVector::<C64>::zeros(dim);
    for k in 0..=n {
        let f = ((s[k] + 1.0) * ld).exp() * dm[k];
        a[(k, k)] = C64::new(1.0, 0.0);
        a[(k, ic)] = -f;
        rhs[k] = f * pm / (s[k] + 1.0);
        for m in 1..=n {
            a[(k, n + m)] -= f / (s[k] + s[m]);
        }
    }
    for k in 1..=n {
        let f = ((s[k] - 1.0) * ld).exp() * dp[k];
        let row = n + k;
        a[(row, row)] = C64::new(1.0, 0.0);
        rhs[row] = f * pp / (s[k] - 1.0);
        for m in 0..=n {
            a[(row, m)] += f / (s[k] + s[m]);
        }
    }
    // closure chi-(0) = 0, scaled by delta
    let row = ic;
    a[(row, ic)] = C64::new(2.0 * delta * (ld - l0c), 0.0);
    for m in 1..=n {
        a[(row, n + m)] = 2.0 * delta * ((ld - l0c) / s[m] - 1.0 / (s[m] * s[m]));
        a[(row, m)] += 1.0 / s[m];
    }
    a[(row, 0)] += -l0c;
    rhs[row] = C64::new(-(2.0 * delta * (pm * (ld - l0c) - pm) + pp), 0.0);
    Ok(Blocks { a, rhs, p_plus: pp, p_minus: pm })
}

fn finish(delta: f64, s: Vec<C64>, x: &DVector<C64>, blk: &Blocks, bound: f64) -> HalfplaneSystem {
    let n = s.len() - 1;
    let residual = (&blk.a * x - &blk.rhs).norm() / blk.rhs.norm().max(f64::MIN_POSITIVE);
    HalfplaneSystem {
        delta,
        a_plus: (0..=n).map(|k| x[k]).collect(),
        a_minus: (1..=n).map(|k| x[n + k]).collect(),
        c_circ: x[2 * n + 1].re,
        p_plus: blk.p_plus,
        p_minus: blk.p_minus,
        roots: s,
        truncation_bound: bound,
        residual,
    }
}

/// Joint solve of the coefficient rows and the closure row.
pub fn solve_system(fact: &ScalarFactorData, delta: f64, p: f64, trunc: &TruncationSettings) -> Result<HalfplaneSystem> {
    let (s, bound) = halfplane_roots(delta, trunc)?;
    let blk = assemble(fact, delta, p, &s)?;
    let x = blk
        .a
        .clone()
        .lu()
        .solve(&blk.rhs)
        .ok_or_else(|| Error::Singular("half-plane system matrix is singular".into()))?;
    Ok(finish(delta, s, &x, &blk, bound))
}

/// Split solve: A = C A0 + A1 from the coefficient rows, then C from the closure row.
pub fn solve_system_split(fact: &ScalarFactorData, delta: f64, p: f64, trunc: &TruncationSettings) -> Result<HalfplaneSystem> {
    let (s, bound) = halfplane_roots(delta, trunc)?;
    let blk = assemble(fact, delta, p, &s)?;
    let dim = blk.a.nrows();
    let ic = dim - 1;
    let m = blk.a.view((0, 0), (ic, ic)).into_owned();
    let mc = blk.a.view((0, ic), (ic, 1)).into_owned();
    let r = blk.rhs.rows(0, ic).into_owned();
    let lu = m.lu();
    let singular = || Error::Singular("half-plane coefficient block is singular".into());
    let a0 = lu.solve(&(-mc.column(0).into_owned())).ok_or_else(singular)?;
    let a1 = lu.solve(&r).ok_or_else(singular)?;
    let k = blk.a.view((ic, 0), (1, ic)).into_owned();
    let kc = blk.a[(ic, ic)];
    let c = (blk.rhs[ic] - (&k * &a1)[0]) / ((&k * &a0)[0] + kc);
    let mut x = DVector::<C64>::zeros(dim);
    for i in 0..ic {
        x[i] = c * a0[i] + a1[i];
    }
    x[ic] = c;
    Ok(finish(delta, s, &x, &blk, bound))
}

/// Leading near-boundary estimate with the printed single logarithm, h K^2/(E delta |log delta|).
pub fn energy_near_boundary_printed(k_edge: f64, e_eff: f64, h: f64, delta: f64) -> f64 {
    h * k_edge * k_edge / (e_eff * delta * delta.ln().abs())
}

/// The same estimate with log^2 delta, as implied by squaring K- ~ -K/(sqrt(delta) log delta).
pub fn energy_near_boundary_squared(k_edge: f64, e_eff: f64, h: f64, delta: f64) -> f64 {
    let l = delta.ln();
    h * k_edge * k_edge / (e_eff * delta * l * l)
}

pub struct HalfplaneSolution<'a> {
    pub fact: &'a ScalarFactorData,
    pub crack: CrackConfig,
    pub load: f64,
    pub system: HalfplaneSystem,
}

impl<'a> HalfplaneSolution<'a> {
    pub fn new(fact: &'a ScalarFactorData, crack: CrackConfig, p: f64, trunc: &TruncationSettings) -> Result<Self> {
        if crack.a == 0.0 {
            return Err(Error::Invalid("a = 0 is the edge crack".into()));
        }
        if !p.is_finite() {
            return Err(Error::Invalid("load must be finite".into()));
        }
        let system = solve_system(fact, crack.delta, p, trunc)?;
        Ok(HalfplaneSolution { fact, crack, load: p, system })
    }

    /// K_I at r = a: 2 sqrt(a) C.
    pub fn k_minus(&self) -> f64 {
        2.0 * self.crack.a.sqrt() * self.system.c_circ
    }

    /// K_I at r = b: sqrt(b) (P/L+(-1) - sum A+).
    pub fn k_plus(&self) -> f64 {
        let sum: C64 = self.system.a_plus.iter().sum();
        self.crack.b.sqrt() * (self.system.p_plus - sum.re)
    }

    fn sums(&self, z: C64) -> (C64, C64) {
        let sys = &self.system;
        let mut s1 = -sys.p_plus / (z + 1.0);
        for (r, a) in sys.roots.iter().zip(&sys.a_plus) {
            s1 += a / (z - r);
        }
        let mut s2 = sys.c_circ + sys.p_minus / (z + 1.0);
        for (r, a) in sys.roots[1..].iter().zip(&sys.a_minus) {
            s2 += a / (z + r);
        }
        (s1, s2)
    }

    pub fn chi_minus(&self, z: C64) -> Result<C64> {
        let (s1, s2) = self.sums(z);
        let lm = self.fact.l_minus(z)?;
        let d = (self.crack.delta.ln() * (z + 1.0)).exp();
        Ok(lm * s1 - d * s2 / (4.0 * l_fun(z) * lm))
    }

    pub fn chi_plus(&self, z: C64) -> Result<C64> {
        let (s1, s2) = self.sums(z);
        let lp = self.fact.l_plus(z)?;
        let d = (-self.crack.delta.ln() * (z + 1.0)).exp();
        Ok(s2 / lp - d * lp * s1 / (4.0 * l_fun(z)))
    }

    /// Regular part of chi- at 0 (circle mean, radius 0.1).
    pub fn closure_defect(&self) -> Result<f64> {
        let n = 32;
        let mut acc = cz();
        for k in 0..n {
            acc += self.chi_minus(C64::from_polar(0.1, 2.0 * PI * k as f64 / n as f64))?;
        }
        Ok(acc.norm() / n as f64)
    }

    pub fn transform_defect(&self) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for k in 0..10 {
            let z = C64::new(-0.25 + 0.05 * k as f64, 0.3 + 0.4 * k as f64);
            let m = self.chi_minus(z)?;
            let p = self.chi_plus(z)?;
            let d = (self.crack.delta.ln() * (z + 1.0)).exp();
            worst = worst.max((m - d * p).norm() / m.norm().max(1e-300));
        }
        Ok(worst)
    }

    pub fn sif(&self, material: &MaterialSpec) -> Result<SifResult> {
        let (e_eff, _) = material.effective();
        let km = self.k_minus();
        let kp = self.k_plus();
        Ok(SifResult {
            k_i_minus: km,
            k_ii_minus: 0.0,
            k_i_plus: kp,
            k_ii_plus: 0.0,
            du_minus: energy_release([km, 0.0], e_eff, 1.0),
            du_plus: energy_release([kp, 0.0], e_eff, 1.0),
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

/// SIFs for the half-plane crack; a = 0 gives the edge value sqrt(pi b) P gamma.
pub fn solve_halfplane(
    fact: &ScalarFactorData,
    a: f64,
    b: f64,
    p: f64,
    material: &MaterialSpec,
    trunc: &TruncationSettings,
) -> Result<SifResult> {
    let crack = CrackConfig::new(a, b)?;
    if a == 0.0 {
        let (e_eff, _) = material.effective();
        let k = (PI * b).sqrt() * p * fact.gamma_koiter;
        return Ok(SifResult {
            k_i_minus: f64::NAN,
            k_ii_minus: f64::NAN,
            k_i_plus: k,
            k_ii_plus: 0.0,
            du_minus: f64::NAN,
            du_plus: energy_release([k, 0.0], e_eff, 1.0),
            diagnostics: Diagnostics { quad_error: fact.quad_error, ..Default::default() },
        });
    }
    HalfplaneSolution::new(fact, crack, p, trunc)?.sif(material)
}
