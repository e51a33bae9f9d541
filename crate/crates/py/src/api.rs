//! Plain-Rust layer under the bindings, kept free of Python types.

use wedgecrack::edge::{eigen_solution, sif_edge_constant, sif_edge_eigen, EigenKind, EdgeSif};
use wedgecrack::factor::{build_khrapkov, build_scalar_factor};
use wedgecrack::halfplane::{koiter_gamma as gamma, solve_halfplane};
use wedgecrack::internal::{solve_internal, SifResult, TruncationSettings};
use wedgecrack::kernels::{MaterialSpec, StrainState};
use wedgecrack::oracle::sie_solve;
use wedgecrack::quadrature::QuadratureSettings;
use wedgecrack::{Error, Result};

pub type Record = Vec<(&'static str, f64)>;

fn settings(tol: f64) -> Result<QuadratureSettings> {
    let s = QuadratureSettings { rel_tol: tol, ..Default::default() };
    s.validate()?;
    Ok(s)
}

pub fn parse_eigen(which: &str) -> Result<EigenKind> {
    match which {
        "first" => Ok(EigenKind::First),
        "second" => Ok(EigenKind::Second),
        _ => Err(Error::Invalid(format!("eigen-solution must be 'first' or 'second', got {which:?}"))),
    }
}

pub fn material(young: f64, poisson: f64, plane_strain: bool) -> Result<MaterialSpec> {
    let state = if plane_strain { StrainState::PlaneStrain } else { StrainState::PlaneStress };
    MaterialSpec::new(young, poisson, state)
}

fn edge_record(s: &EdgeSif) -> Record {
    vec![
        ("k_i", s.k_i),
        ("k_ii", s.k_ii),
        ("d11", s.d[0][0]),
        ("d12", s.d[0][1]),
        ("d21", s.d[1][0]),
        ("d22", s.d[1][1]),
    ]
}

pub fn edge_constant(alpha: f64, b: f64, p: [f64; 2], tol: f64) -> Result<Record> {
    let f = build_khrapkov(alpha, &settings(tol)?)?;
    let s = sif_edge_constant(&f, b, p)?;
    let mut r = edge_record(&s);
    r.push(("quad_error", f.quad_error));
    Ok(r)
}

pub fn edge_eigen(alpha: f64, b: f64, kind: EigenKind, k_theta0: f64, tol: f64) -> Result<Record> {
    let e = eigen_solution(alpha, kind)?;
    let f = build_khrapkov(alpha, &settings(tol)?)?;
    let s = sif_edge_eigen(&f, b, k_theta0, &e)?;
    let mut r = vec![("mu", e.mu), ("k_star", e.k_star)];
    r.extend(edge_record(&s));
    r.push(("quad_error", f.quad_error));
    Ok(r)
}

fn crack_record(s: &SifResult) -> Record {
    let d = s.diagnostics;
    vec![
        ("k_i_plus", s.k_i_plus),
        ("k_ii_plus", s.k_ii_plus),
        ("k_i_minus", s.k_i_minus),
        ("k_ii_minus", s.k_ii_minus),
        ("du_plus", s.du_plus),
        ("du_minus", s.du_minus),
        ("n_roots", d.n_roots as f64),
        ("truncation_bound", d.truncation_bound),
        ("residual", d.residual),
        ("closure_defect", d.closure_defect),
        ("transform_defect", d.transform_defect),
        ("quad_error", d.quad_error),
    ]
}

pub fn internal(alpha: f64, a: f64, b: f64, p: [f64; 2], m: &MaterialSpec, tol: f64) -> Result<Record> {
    let f = build_khrapkov(alpha, &settings(tol)?)?;
    Ok(crack_record(&solve_internal(&f, a, b, p, m, &TruncationSettings::default())?))
}

pub fn halfplane(a: f64, b: f64, p: f64, m: &MaterialSpec) -> Result<Record> {
    let f = build_scalar_factor(&QuadratureSettings::default())?;
    Ok(crack_record(&solve_halfplane(&f, a, b, p, m, &TruncationSettings::default())?))
}

pub fn oracle(a: f64, b: f64, p: f64, nodes: usize) -> Result<(f64, f64)> {
    let s = sie_solve(a, b, &|_| p, nodes)?;
    Ok((s.k_minus, s.k_plus))
}

pub fn koiter_gamma() -> Result<f64> {
    Ok(gamma(&build_scalar_factor(&QuadratureSettings::default())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(r: &Record, k: &str) -> f64 {
        r.iter().find(|(n, _)| *n == k).unwrap().1
    }

    #[test]
    fn eigen_names() {
        assert_eq!(parse_eigen("first").unwrap(), EigenKind::First);
        assert!(parse_eigen("third").unwrap_err().is_validation());
    }

    #[test]
    fn edge_record_keys() {
        let r = edge_constant(std::f64::consts::FRAC_PI_2, 1.0, [1.0, 0.0], 1e-10).unwrap();
        assert!((get(&r, "d11") - 1.776778).abs() < 1e-5);
        assert_eq!(get(&r, "k_i"), get(&r, "d11"));
    }

    #[test]
    fn bad_material_is_validation() {
        assert!(material(1.0, 0.6, false).unwrap_err().is_validation());
    }
}
