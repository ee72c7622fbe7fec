//! Closed-form consequences of the correction terms: one-point nodal
//! counts on surfaces, the twistor-family count on a K3, and the
//! universal polynomial a multiplicity induces on Chern numbers.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bundles::BundleClass;
use crate::error::Error;
use crate::rational::Rat;
use crate::ring::GradedClass;
use crate::surfaces::{surface_model, Surface, SurfaceData};

/// One-point count at multiplicity `p`: the integral of
/// `c_2(O(C) ⊗ S^{p-1}(T* ⊕ C))` over the surface carrying the class.
pub fn severi_one_point(surface: &Surface, c: &GradedClass, p: i64) -> Result<Rat, Error> {
    if p < 1 {
        return Err(Error::BadMultiplicity {
            context: format!("multiplicity {p} is below 1"),
        });
    }
    if c.space().id() != surface.space.id() {
        return Err(Error::AmbientMismatch);
    }
    if !(c.is_zero() || c.is_homogeneous(2)) {
        return Err(Error::WrongDegree {
            context: "the class must be homogeneous of degree 2".into(),
        });
    }
    let line = BundleClass::line(c.clone())?;
    let sym = surface
        .tangent
        .dual()
        .whitney(&BundleClass::trivial(&surface.space, 1))?
        .sym_power((p - 1) as u32)?;
    Ok(sym.tensor_line(&line)?.chern(2).integrate())
}

/// Number of 1-nodal degree-`d` curves through the generic point count
/// on the plane, computed through the multiplicity-2 correction term:
/// comes out to `3(d-1)^2`.
pub fn nodal_cp2(d: i64) -> Rat {
    let s = surface_model(&SurfaceData::cp2()).expect("plane model is valid");
    let h = GradedClass::generator(&s.space, "h").expect("plane has h");
    severi_one_point(&s, &h.scale(&Rat::from_int(d)), 2).expect("valid inputs")
}

/// Count attached to the twistor family of a K3 surface for a class of
/// self-intersection `square`: comes out to `24 + 3 square`.
pub fn k3_twistor_count(square: i64) -> Rat {
    let s = surface_model(&SurfaceData::k3(Rat::from_int(square))).expect("K3 model is valid");
    let c = GradedClass::generator(&s.space, "C").expect("K3 model has C");
    severi_one_point(&s, &c, 2).expect("valid inputs")
}

/// `(K^2 + c_2) / 12`.
pub fn todd_genus(k_sq: &Rat, c2: &Rat) -> Rat {
    (k_sq.clone() + c2.clone()) / Rat::from_int(12)
}

const VAR_NAMES: [&str; 4] = ["C2", "CK", "K2", "c2"];
const GRID_SIDE: i64 = 3;
const OFF_GRID_CHECKS: usize = 5;
const OFF_GRID_SEED: u64 = 0x0ff6_71d5;

/// Polynomial in the four Chern pairings `(C^2, C·K, K^2, c_2)`
/// recovered by exact interpolation; `verified` records an extra
/// comparison against direct evaluation at off-grid points.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UniversalPolynomial {
    p: i64,
    terms: Vec<([u32; 4], Rat)>,
    verified: bool,
}

impl UniversalPolynomial {
    pub fn multiplicity(&self) -> i64 {
        self.p
    }

    pub fn verified(&self) -> bool {
        self.verified
    }

    /// Nonzero terms as exponent vectors over `(C^2, C·K, K^2, c_2)`.
    pub fn terms(&self) -> &[([u32; 4], Rat)] {
        &self.terms
    }

    pub fn eval(&self, values: &[Rat; 4]) -> Rat {
        let mut acc = Rat::zero();
        for (exps, coeff) in &self.terms {
            let mut term = coeff.clone();
            for (v, e) in values.iter().zip(exps) {
                term *= v.pow(*e);
            }
            acc += term;
        }
        acc
    }

    /// Coefficients keyed by monomial name: `1`, `CK`, `C2^2`, `CK*K2`.
    pub fn named_coefficients(&self) -> BTreeMap<String, Rat> {
        self.terms
            .iter()
            .map(|(exps, c)| (monomial_name(exps), c.clone()))
            .collect()
    }

    /// Rebuilds the polynomial from named coefficients (inverse of
    /// [`UniversalPolynomial::named_coefficients`]).
    pub fn from_named(
        p: i64,
        coefficients: &BTreeMap<String, Rat>,
        verified: bool,
    ) -> Result<Self, Error> {
        let mut terms = Vec::with_capacity(coefficients.len());
        for (name, coeff) in coefficients {
            if coeff.is_zero() {
                continue;
            }
            terms.push((parse_monomial_name(name)?, coeff.clone()));
        }
        terms.sort_by_key(|a| a.0);
        Ok(UniversalPolynomial { p, terms, verified })
    }
}

fn monomial_name(exps: &[u32; 4]) -> String {
    let mut parts = Vec::new();
    for (v, e) in VAR_NAMES.iter().zip(exps) {
        match e {
            0 => {}
            1 => parts.push((*v).to_string()),
            _ => parts.push(format!("{v}^{e}")),
        }
    }
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

fn parse_monomial_name(name: &str) -> Result<[u32; 4], Error> {
    let mut exps = [0u32; 4];
    if name == "1" {
        return Ok(exps);
    }
    for part in name.split('*') {
        let (var, e) = match part.split_once('^') {
            Some((v, e)) => (
                v,
                e.parse::<u32>().map_err(|_| Error::UnknownName {
                    name: part.to_string(),
                })?,
            ),
            None => (part, 1),
        };
        let idx = VAR_NAMES
            .iter()
            .position(|v| *v == var)
            .ok_or_else(|| Error::UnknownName {
                name: var.to_string(),
            })?;
        exps[idx] += e;
    }
    Ok(exps)
}

/// The 15 monomials of weighted degree at most 2.
fn basis_monomials() -> Vec<[u32; 4]> {
    let mut out = vec![[0u32; 4]];
    for i in 0..4 {
        let mut e = [0u32; 4];
        e[i] = 1;
        out.push(e);
    }
    for i in 0..4 {
        for j in i..4 {
            let mut e = [0u32; 4];
            e[i] += 1;
            e[j] += 1;
            out.push(e);
        }
    }
    out
}

/// Direct engine evaluation of the one-point count on a formal surface
/// with the prescribed Chern pairings.
fn direct_value(p: i64, vals: &[Rat; 4]) -> Result<Rat, Error> {
    let data = SurfaceData::formal(
        vals[0].clone(),
        vals[1].clone(),
        vals[2].clone(),
        vals[3].clone(),
        0,
        0,
    );
    let s = surface_model(&data)?;
    let c = GradedClass::generator(&s.space, "C")?;
    severi_one_point(&s, &c, p)
}

/// Interpolates the one-point count at multiplicity `p` as a polynomial
/// in `(C^2, C·K, K^2, c_2)` from exact evaluations on the integer grid
/// `{0, 1, 2}^4`, then verifies the result at off-grid points drawn from
/// a fixed-seed generator. Supported range: `1 ≤ p ≤ 8`.
pub fn universal_poly(p: i64) -> Result<UniversalPolynomial, Error> {
    if !(1..=8).contains(&p) {
        return Err(Error::RangeError {
            context: format!("multiplicity {p} is outside the supported range [1, 8]"),
        });
    }
    let basis = basis_monomials();
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(81);
    let mut rhs: Vec<Rat> = Vec::with_capacity(81);
    for a in 0..GRID_SIDE {
        for b in 0..GRID_SIDE {
            for c in 0..GRID_SIDE {
                for d in 0..GRID_SIDE {
                    let vals = [
                        Rat::from_int(a),
                        Rat::from_int(b),
                        Rat::from_int(c),
                        Rat::from_int(d),
                    ];
                    let row = basis
                        .iter()
                        .map(|exps| {
                            let mut t = Rat::one();
                            for (v, e) in vals.iter().zip(exps) {
                                t *= v.pow(*e);
                            }
                            t
                        })
                        .collect();
                    rows.push(row);
                    rhs.push(direct_value(p, &vals)?);
                }
            }
        }
    }
    let solution = solve_exact(rows, rhs, basis.len())?;

    let mut terms: Vec<([u32; 4], Rat)> = basis
        .into_iter()
        .zip(solution)
        .filter(|(_, c)| !c.is_zero())
        .collect();
    terms.sort_by_key(|a| a.0);

    let mut rng = ChaCha8Rng::seed_from_u64(OFF_GRID_SEED.wrapping_add(p as u64));
    let poly = UniversalPolynomial {
        p,
        terms,
        verified: false,
    };
    let mut verified = true;
    for _ in 0..OFF_GRID_CHECKS {
        let vals = [
            Rat::from_int(rng.gen_range(-4..=8)),
            Rat::from_int(rng.gen_range(-4..=8)),
            Rat::from_int(rng.gen_range(-4..=8)),
            Rat::from_int(rng.gen_range(-4..=8)),
        ];
        if poly.eval(&vals) != direct_value(p, &vals)? {
            verified = false;
            break;
        }
    }
    Ok(UniversalPolynomial { verified, ..poly })
}

/// Exact Gaussian elimination of an overdetermined consistent system;
/// demands full column rank and consistency.
#[allow(clippy::needless_range_loop)]
fn solve_exact(mut rows: Vec<Vec<Rat>>, mut rhs: Vec<Rat>, cols: usize) -> Result<Vec<Rat>, Error> {
    let n = rows.len();
    let mut pivot_row_of_col = vec![usize::MAX; cols];
    let mut row = 0usize;
    for col in 0..cols {
        let Some(pr) = (row..n).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(row, pr);
        rhs.swap(row, pr);
        let inv = rows[row][col].recip().expect("pivot is nonzero");
        for x in rows[row].iter_mut() {
            *x = x.clone() * inv.clone();
        }
        rhs[row] = rhs[row].clone() * inv;
        for r in 0..n {
            if r == row || rows[r][col].is_zero() {
                continue;
            }
            let f = rows[r][col].clone();
            for cidx in 0..cols {
                let delta = f.clone() * rows[row][cidx].clone();
                rows[r][cidx] -= delta;
            }
            let delta = f * rhs[row].clone();
            rhs[r] -= delta;
        }
        pivot_row_of_col[col] = row;
        row += 1;
    }
    if pivot_row_of_col.contains(&usize::MAX) {
        return Err(Error::InterpolationRankDeficient {
            context: format!("design matrix rank {row} is below {cols}"),
        });
    }
    for r in row..n {
        if !rhs[r].is_zero() {
            return Err(Error::InterpolationRankDeficient {
                context: "inconsistent evaluations: the value is not a polynomial \
                          of the assumed shape"
                    .into(),
            });
        }
    }
    Ok(pivot_row_of_col.iter().map(|&r| rhs[r].clone()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    #[test]
    fn nodal_counts_on_the_plane() {
        for d in 1..=10i64 {
            assert_eq!(nodal_cp2(d), rat(3 * (d - 1) * (d - 1)), "d = {d}");
        }
    }

    #[test]
    fn twistor_count_on_k3() {
        assert_eq!(k3_twistor_count(0), rat(24));
        assert_eq!(k3_twistor_count(2), rat(30));
        assert_eq!(k3_twistor_count(-2), rat(18));
    }

    #[test]
    fn multiplicity_three_closed_form() {
        // Chern-root expansion of O(d) ⊗ S^2(T* ⊕ C) over the plane gives
        // c_2 = 15 d^2 - 60 d + 60 = 15 (d - 2)^2.
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        for d in 1..=6i64 {
            let v = severi_one_point(&s, &h.scale(&rat(d)), 3).unwrap();
            assert_eq!(v, rat(15 * (d - 2) * (d - 2)), "d = {d}");
        }
    }

    #[test]
    fn multiplicity_one_has_no_correction() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        assert_eq!(severi_one_point(&s, &h, 1).unwrap(), rat(0));
        assert!(matches!(
            severi_one_point(&s, &h, 0),
            Err(Error::BadMultiplicity { .. })
        ));
    }

    #[test]
    fn universal_polynomial_at_two() {
        let poly = universal_poly(2).unwrap();
        assert!(poly.verified());
        let named = poly.named_coefficients();
        let expected: BTreeMap<String, Rat> = [
            ("C2".to_string(), rat(3)),
            ("CK".to_string(), rat(2)),
            ("c2".to_string(), rat(1)),
        ]
        .into_iter()
        .collect();
        assert_eq!(named, expected);
    }

    #[test]
    fn universal_polynomial_at_three() {
        let poly = universal_poly(3).unwrap();
        assert!(poly.verified());
        let named = poly.named_coefficients();
        let expected: BTreeMap<String, Rat> = [
            ("C2".to_string(), rat(15)),
            ("CK".to_string(), rat(20)),
            ("K2".to_string(), rat(5)),
            ("c2".to_string(), rat(5)),
        ]
        .into_iter()
        .collect();
        assert_eq!(named, expected);
    }

    #[test]
    fn universal_polynomial_eval_matches_the_plane() {
        let poly = universal_poly(2).unwrap();
        for d in 1..=8i64 {
            let vals = [rat(d * d), rat(-3 * d), rat(9), rat(3)];
            assert_eq!(poly.eval(&vals), rat(3 * (d - 1) * (d - 1)));
        }
    }

    #[test]
    fn universal_polynomial_round_trips_names() {
        let poly = universal_poly(3).unwrap();
        let named = poly.named_coefficients();
        let back =
            UniversalPolynomial::from_named(poly.multiplicity(), &named, poly.verified()).unwrap();
        assert_eq!(back, poly);
        assert_eq!(monomial_name(&[2, 0, 0, 0]), "C2^2");
        assert_eq!(monomial_name(&[0, 1, 1, 0]), "CK*K2");
        assert_eq!(monomial_name(&[0, 0, 0, 0]), "1");
        assert_eq!(parse_monomial_name("CK*K2").unwrap(), [0, 1, 1, 0]);
        assert!(parse_monomial_name("XY").is_err());
    }

    #[test]
    fn universal_polynomial_range_guard() {
        assert!(matches!(universal_poly(0), Err(Error::RangeError { .. })));
        assert!(matches!(universal_poly(9), Err(Error::RangeError { .. })));
    }

    #[test]
    fn todd_genus_values() {
        assert_eq!(todd_genus(&rat(9), &rat(3)), rat(1));
        assert_eq!(todd_genus(&rat(0), &rat(24)), rat(2));
    }
}
