//! Pole and zero tables: kernel poles, half-plane zeros, characteristic roots.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::kernels::{d_fun, d_prime};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RootKind {
    IntegerPole,
    SigmaZero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub s: C64,
    pub kind: RootKind,
}

/// Poles of the kernel in Re s >= 0, upper-half representatives only.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RootTable {
    pub alpha: f64,
    pub roots: Vec<Root>,
}

impl RootTable {
    pub fn count(&self) -> usize {
        self.roots.len()
    }

    /// All poles including the conjugates of non-real zeros, ordered by (Re, Im).
    pub fn full_sequence(&self) -> Vec<Root> {
        let mut out = Vec::with_capacity(2 * self.roots.len());
        for r in &self.roots {
            out.push(*r);
            if r.s.im > 0.0 {
                out.push(Root { s: r.s.conj(), kind: r.kind });
            }
        }
        out.sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));
        out
    }
}

/// Newton on d(., theta) with the analytic derivative.
fn newton(z0: C64, theta: f64) -> Option<C64> {
    let mut z = z0;
    for _ in 0..60 {
        let dz = d_fun(z, theta) / d_prime(z, theta);
        if !dz.is_finite() {
            return None;
        }
        z -= dz;
        if dz.norm() <= 1e-15 * (1.0 + z.norm()) {
            // two polishing steps
            for _ in 0..2 {
                let dz = d_fun(z, theta) / d_prime(z, theta);
                if dz.is_finite() {
                    z -= dz;
                }
            }
            return Some(z);
        }
    }
    None
}

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

/// Phase change of d along a segment, refined until each step turns by < 0.3 rad.
fn phase_change(theta: f64, a: C64, b: C64) -> Option<f64> {
    let n = ((b - a).norm() * 64.0).ceil().max(16.0) as usize;
    let mut total = 0.0;
    let mut prev_z = a;
    let mut prev_f = d_fun(a, theta);
    for k in 1..=n {
        let z = a + (b - a) * (k as f64 / n as f64);
        let f = d_fun(z, theta);
        total += refine(theta, prev_z, prev_f, z, f, 0)?;
        prev_z = z;
        prev_f = f;
    }
    Some(total)
}

fn refine(theta: f64, za: C64, fa: C64, zb: C64, fb: C64, depth: u32) -> Option<f64> {
    let scale = 1.0 + za.norm_sqr();
    if fa.norm() < 1e-13 * scale || fb.norm() < 1e-13 * scale {
        return None;
    }
    let dphi = (fb / fa).arg();
    if dphi.abs() < 0.3 {
        return Some(dphi);
    }
    if depth > 40 {
        return None;
    }
    let zm = 0.5 * (za + zb);
    let fm = d_fun(zm, theta);
    Some(refine(theta, za, fa, zm, fm, depth + 1)? + refine(theta, zm, fm, zb, fb, depth + 1)?)
}

/// Number of zeros of d inside the rectangle, or None when a zero sits on the boundary.
fn winding(theta: f64, r: Rect) -> Option<i64> {
    let c = [
        C64::new(r.x0, r.y0),
        C64::new(r.x1, r.y0),
        C64::new(r.x1, r.y1),
        C64::new(r.x0, r.y1),
    ];
    let mut total = 0.0;
    for k in 0..4 {
        total += phase_change(theta, c[k], c[(k + 1) % 4])?;
    }
    Some((total / (2.0 * PI)).round() as i64)
}

const MIN_BOX: f64 = 1e-6;

fn nearest_integer_gap(z: C64) -> (i64, f64) {
    let m = z.re.round();
    (m as i64, (z - m).norm())
}

fn isolate(theta: f64, r: Rect, count: i64, out: &mut Vec<C64>) -> Result<()> {
    if count <= 0 {
        return Ok(());
    }
    let w = r.x1 - r.x0;
    let h = r.y1 - r.y0;
    if count == 1 {
        let center = C64::new(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        if let Some(z) = newton(center, theta) {
            let tol = 1e-9 * (1.0 + z.norm());
            if z.re >= r.x0 - tol && z.re <= r.x1 + tol && z.im >= r.y0 - tol && z.im <= r.y1 + tol {
                out.push(z);
                return Ok(());
            }
        }
    }
    if w.max(h) < MIN_BOX {
        let center = C64::new(0.5 * (r.x0 + r.x1), 0.5 * (r.y0 + r.y1));
        let (m, gap) = nearest_integer_gap(center);
        return Err(if gap < 1e-3 {
            Error::ExceptionalAngle { m, gap }
        } else {
            Error::Roots(format!("{count} zeros of d clustered near {center}"))
        });
    }
    // split off-center so the cut avoids the real axis and other symmetric positions
    for attempt in 0..8 {
        let frac = 0.5 + 0.0731 * (attempt as f64 + 1.0) * if attempt % 2 == 0 { 1.0 } else { -1.0 } / 2.0;
        let (a, b) = if w >= h {
            let xm = r.x0 + frac * w;
            (Rect { x1: xm, ..r }, Rect { x0: xm, ..r })
        } else {
            let ym = r.y0 + frac * h;
            (Rect { y1: ym, ..r }, Rect { y0: ym, ..r })
        };
        if let (Some(ca), Some(cb)) = (winding(theta, a), winding(theta, b)) {
            if ca + cb == count {
                isolate(theta, a, ca, out)?;
                isolate(theta, b, cb, out)?;
                return Ok(());
            }
        }
    }
    Err(Error::Roots(format!("argument-principle split failed on box {r:?}")))
}

/// Height bound for zeros of d with Re s <= re_max.
fn height_bound(theta: f64, re_max: f64) -> f64 {
    ((4.0 * re_max + 4.0) * theta.sin().max(1e-3)).ln().max(1.0) / theta + 2.0 / theta
}

/// Pick a right boundary near `target` with no zero of d on it.
fn clean_edge(theta: f64, target: f64, y: f64) -> f64 {
    for k in 0..40 {
        let x = target + 0.0173 * k as f64;
        if phase_change(theta, C64::new(x, -y), C64::new(x, y)).is_some() {
            return x;
        }
    }
    target
}

/// Zeros of d(s, theta) with 0.5 < Re s <= re_max, Im s >= 0, excluding s = 1, ordered by Re.
/// Also returns the argument-principle count of the scanned symmetric box.
pub fn sigma_zeros(theta: f64, re_max: f64) -> Result<(Vec<C64>, i64)> {
    let y = height_bound(theta, re_max);
    let x1 = clean_edge(theta, re_max + 0.011, y);
    let r = Rect { x0: 0.5, x1, y0: -y, y1: y };
    let count = winding(theta, r).ok_or_else(|| Error::Roots("zero on the scan boundary".into()))?;
    let mut found = Vec::new();
    isolate(theta, r, count, &mut found)?;
    if found.len() as i64 != count {
        return Err(Error::Roots(format!("found {} zeros, argument principle counts {count}", found.len())));
    }
    // drop the trivial zero at 1 and the lower-half copies
    let mut trivial = false;
    let mut out = Vec::new();
    for z in found {
        if (z - 1.0).norm() < 1e-9 && !trivial {
            trivial = true;
            continue;
        }
        let z = if z.im.abs() < 1e-10 * (1.0 + z.norm()) {
            newton(C64::new(z.re, 0.0), theta).map(|w| C64::new(w.re, 0.0)).unwrap_or(C64::new(z.re, 0.0))
        } else {
            z
        };
        if z.im >= 0.0 && z.re <= re_max {
            out.push(z);
        }
    }
    if !trivial {
        return Err(Error::Roots("the zero at s = 1 was not located".into()));
    }
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok((out, count))
}

/// Kernel poles with Re s <= re_max (plus s0 = 0, s1 = 1).
pub fn pole_table_window(alpha: f64, re_max: f64) -> Result<RootTable> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Invalid(format!("alpha = {alpha} must lie in (0, pi)")));
    }
    let (sig, _) = sigma_zeros(alpha, re_max.max(2.0))?;
    let mut roots = vec![
        Root { s: C64::new(0.0, 0.0), kind: RootKind::IntegerPole },
        Root { s: C64::new(1.0, 0.0), kind: RootKind::IntegerPole },
    ];
    for z in &sig {
        let (m, gap) = nearest_integer_gap(*z);
        if m >= 1 && gap < MIN_BOX {
            return Err(Error::ExceptionalAngle { m, gap });
        }
        if z.re <= re_max {
            roots.push(Root { s: *z, kind: RootKind::SigmaZero });
        }
    }
    let mut m = 2;
    while m as f64 <= re_max {
        roots.push(Root { s: C64::new(m as f64, 0.0), kind: RootKind::IntegerPole });
        m += 1;
    }
    roots[2..].sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));
    Ok(RootTable { alpha, roots })
}

/// The first n poles beyond s0 = 0 and s1 = 1.
pub fn pole_table(alpha: f64, n: usize) -> Result<RootTable> {
    if n == 0 {
        return Err(Error::Invalid("pole table size must be at least 1".into()));
    }
    let mut re_max = 4.0;
    loop {
        let t = pole_table_window(alpha, re_max)?;
        if t.roots.len() >= n + 2 {
            let mut t = t;
            t.roots.truncate(n + 2);
            return Ok(t);
        }
        re_max *= 1.6;
    }
}

/// Non-real zeros of s^2 - sin^2(pi s/2) with Re, Im > 0, ordered by Re.
pub fn halfplane_zero_table(n: usize) -> Result<RootTable> {
    if n == 0 {
        return Err(Error::Invalid("zero table size must be at least 1".into()));
    }
    let mut re_max = 2.0 * n as f64 + 4.0;
    loop {
        let (z, _) = sigma_zeros(PI / 2.0, re_max)?;
        let z: Vec<C64> = z.into_iter().filter(|z| z.im > 1e-8).collect();
        if z.len() > n {
            let roots = z.into_iter().take(n).map(|s| Root { s, kind: RootKind::SigmaZero }).collect();
            return Ok(RootTable { alpha: PI / 2.0, roots });
        }
        re_max *= 1.5;
    }
}

/// Half-plane zeros with Re s <= re_max.
pub fn halfplane_zeros_window(re_max: f64) -> Result<Vec<C64>> {
    let (z, _) = sigma_zeros(PI / 2.0, re_max.max(2.0))?;
    Ok(z.into_iter().filter(|z| z.im > 1e-8 && z.re <= re_max).collect())
}

/// Left side of sin^2 mu(pi + alpha) - mu^2 sin^2 alpha = 0.
pub fn char_fun(mu: f64, alpha: f64) -> f64 {
    (mu * (PI + alpha)).sin().powi(2) - (mu * alpha.sin()).powi(2)
}

/// Roots mu < mu0 of the characteristic equation in (0, 1).
pub fn char_roots(alpha: f64) -> Result<(f64, Option<f64>)> {
    if !(alpha > 0.0 && alpha < PI) {
        return Err(Error::Invalid(format!("alpha = {alpha} must lie in (0, pi)")));
    }
    let n = 2048;
    let lo = 1e-9;
    let hi = 1.0 - 1e-12;
    let mut roots = Vec::new();
    let mut xa = lo;
    let mut fa = char_fun(xa, alpha);
    for k in 1..=n {
        let xb = lo + (hi - lo) * k as f64 / n as f64;
        let fb = char_fun(xb, alpha);
        if fa == 0.0 {
            roots.push(xa);
        } else if fa * fb < 0.0 {
            roots.push(bisect(|m| char_fun(m, alpha), xa, xb));
        }
        xa = xb;
        fa = fb;
    }
    match roots.as_slice() {
        [mu] => Ok((*mu, None)),
        [mu, mu0] => Ok((*mu, Some(*mu0))),
        _ => Err(Error::Roots(format!("{} characteristic roots in (0,1) at alpha = {alpha}", roots.len()))),
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let mut fa = f(a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    0.5 * (a + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_zero_right_angle() {
        let t = pole_table_window(PI / 2.0, 6.0).unwrap();
        let sig: Vec<_> = t.roots.iter().filter(|r| r.kind == RootKind::SigmaZero).collect();
        assert!((sig[0].s - C64::new(2.739_593_356, 1.119_024_534)).norm() < 1e-8);
        for r in &sig {
            assert!(d_fun(r.s, PI / 2.0).norm() < 1e-13 * (1.0 + r.s.norm_sqr()));
        }
    }

    #[test]
    fn ordering_and_integers() {
        for &a in &[PI / 8.0, PI / 3.0, PI / 2.0, 3.0 * PI / 4.0, 7.0 * PI / 8.0] {
            let t = pole_table_window(a, 12.0).unwrap();
            assert_eq!(t.roots[0].s, C64::new(0.0, 0.0));
            assert_eq!(t.roots[1].s, C64::new(1.0, 0.0));
            for w in t.roots.windows(2) {
                assert!(w[0].s.re <= w[1].s.re);
            }
            for m in 2..=12 {
                let c = t.roots.iter().filter(|r| r.kind == RootKind::IntegerPole && r.s == C64::new(m as f64, 0.0)).count();
                assert_eq!(c, 1);
            }
            for r in t.roots.iter().filter(|r| r.kind == RootKind::SigmaZero) {
                assert!(r.s.im >= 0.0);
                assert!(d_fun(r.s, a).norm() < 1e-12 * (1.0 + r.s.norm_sqr()), "a={a} {}", r.s);
            }
        }
    }

    #[test]
    fn argument_principle_audit() {
        for &a in &[PI / 4.0, PI / 2.0, 7.0 * PI / 8.0] {
            let (z, count) = sigma_zeros(a, 15.0).unwrap();
            let listed: i64 = z.iter().map(|z| if z.im > 0.0 { 2 } else { 1 }).sum();
            // plus the trivial zero at 1
            assert_eq!(listed + 1, count, "a={a}");
        }
    }

    #[test]
    fn real_zero_near_one_for_obtuse_wedges() {
        let a = 7.0 * PI / 8.0;
        let (z, _) = sigma_zeros(a, 3.0).unwrap();
        let real: Vec<_> = z.iter().filter(|z| z.im == 0.0).collect();
        assert!(!real.is_empty());
        assert!(real[0].re > 1.0 && real[0].re < 1.5);
    }

    #[test]
    fn full_sequence_has_conjugates() {
        let t = pole_table_window(PI / 2.0, 5.0).unwrap();
        let full = t.full_sequence();
        for r in &full {
            if r.s.im != 0.0 {
                assert!(full.iter().any(|q| (q.s - r.s.conj()).norm() == 0.0));
            }
        }
    }

    #[test]
    fn pole_table_counts() {
        let t = pole_table(PI / 3.0, 10).unwrap();
        assert_eq!(t.count(), 12);
    }

    #[test]
    fn halfplane_table() {
        let t = halfplane_zero_table(12).unwrap();
        assert_eq!(t.count(), 12);
        for r in &t.roots {
            let s = r.s;
            assert!((s * s - (s * (PI / 2.0)).sin().powi(2)).norm() < 1e-13 * (1.0 + s.norm_sqr()));
            assert!(s.im > 0.0 && (s - 1.0).norm() > 0.5);
        }
        for r in &t.roots[4..] {
            // |sin(pi s/2)| ~ exp(pi Im s/2)/2 balances |s|
            let est = (2.0 / PI) * (2.0 * r.s.norm()).ln();
            assert!((r.s.im - est).abs() < 0.1 * est, "{} {est}", r.s);
        }
    }

    #[test]
    fn characteristic_roots() {
        let (mu, mu0) = char_roots(PI / 2.0).unwrap();
        assert!((mu - 0.544484).abs() < 1e-6);
        assert!((mu0.unwrap() - 0.908529).abs() < 1e-6);
        let (mu, mu0) = char_roots(PI / 8.0).unwrap();
        assert!((mu - 0.800766).abs() < 1e-6);
        assert!(mu0.is_none());
        assert!(char_fun(mu, PI / 8.0).abs() < 1e-13);
        // the second root appears near 0.431 pi
        assert!(char_roots(0.42 * PI).unwrap().1.is_none());
        assert!(char_roots(0.44 * PI).unwrap().1.is_some());
    }

    #[test]
    fn characteristic_root_continuity() {
        let mut prev = char_roots(PI / 180.0).unwrap().0;
        for k in 2..180 {
            let mu = char_roots(k as f64 * PI / 180.0).unwrap().0;
            assert!((mu - prev).abs() < 0.02, "k={k}");
            prev = mu;
        }
    }

    #[test]
    fn invalid_angles() {
        assert!(pole_table(0.0, 3).is_err());
        assert!(char_roots(PI).is_err());
    }
}
