//! Finite-dimensional reduction of the wall-crossing count: evaluating
//! the localized Euler class of the obstruction over a projectivized
//! parameter bundle, with optional odd insertions, plus the canonical
//! multi-level obstruction product.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::blowup::{sw_dimension, DimensionData, DimensionKind};
use crate::bundles::BundleClass;
use crate::error::Error;
use crate::rational::Rat;
use crate::ring::{GradedClass, Parity};
use crate::surfaces::projective_bundle;

/// Input of one fiber-integral evaluation: a parameter bundle `V`, an
/// obstruction bundle `W`, the hyperplane exponent `d`, and a class on
/// the shared base inserted under the integral.
#[derive(Clone, Debug)]
pub struct KuranishiData {
    pub v: BundleClass,
    pub w: BundleClass,
    pub d: u32,
    pub insertion: GradedClass,
}

impl KuranishiData {
    /// Validates the pieces: shared base, `V` honest of rank at least 1,
    /// `W` honest of nonnegative rank, homogeneous (or zero) insertion.
    pub fn new(
        v: BundleClass,
        w: BundleClass,
        d: u32,
        insertion: GradedClass,
    ) -> Result<Self, Error> {
        if v.space().id() != w.space().id() || v.space().id() != insertion.space().id() {
            return Err(Error::AmbientMismatch);
        }
        if v.rank() < 1 || !v.is_honest() {
            return Err(Error::VirtualRank { rank: v.rank() });
        }
        if w.rank() < 0 || !w.is_honest() {
            return Err(Error::VirtualRank { rank: w.rank() });
        }
        if let Some(deg) = insertion.max_degree() {
            if !insertion.is_homogeneous(deg) {
                return Err(Error::WrongDegree {
                    context: "insertion must be homogeneous".into(),
                });
            }
        }
        Ok(Self { v, w, d, insertion })
    }

    /// Fills the exponent with `rank V - rank W - 1`, the choice that
    /// normalizes the trivial evaluation over a point to 1.
    pub fn balanced(v: BundleClass, w: BundleClass, insertion: GradedClass) -> Result<Self, Error> {
        let d = exponent(&Rat::from_int(v.rank() - w.rank() - 1))?;
        Self::new(v, w, d, insertion)
    }

    /// Fills the exponent with the embedded-curve count plus the number
    /// of holomorphic 2-forms, the cut-down used for family counts.
    pub fn family(
        v: BundleClass,
        w: BundleClass,
        insertion: GradedClass,
        dims: &DimensionData,
    ) -> Result<Self, Error> {
        let gt = sw_dimension(DimensionKind::GromovTaubes, dims)?;
        let d = exponent(&(gt + Rat::from_int(dims.pg as i64)))?;
        Self::new(v, w, d, insertion)
    }

    /// Fills the exponent with the embedded-curve count plus the
    /// fiberwise deformation number, which must lie in `[0, pg]`.
    pub fn algebraic_family(
        v: BundleClass,
        w: BundleClass,
        insertion: GradedClass,
        dims: &DimensionData,
    ) -> Result<Self, Error> {
        if dims.fbd < 0 || dims.fbd > dims.pg as i64 {
            return Err(Error::RangeError {
                context: format!("fbd = {} must lie in [0, {}]", dims.fbd, dims.pg),
            });
        }
        let gt = sw_dimension(DimensionKind::GromovTaubes, dims)?;
        let d = exponent(&(gt + Rat::from_int(dims.fbd)))?;
        Self::new(v, w, d, insertion)
    }
}

fn exponent(dim: &Rat) -> Result<u32, Error> {
    dim.to_i64()
        .and_then(|v| u32::try_from(v).ok())
        .ok_or_else(|| Error::RangeError {
            context: format!("exponent {dim} is not a nonnegative integer"),
        })
}

/// Result of one fiber-integral evaluation. `top_degree_checked` records
/// whether the integrand's formal degree matched the top degree of the
/// projectivized space; when it does not, the value is 0 by fiat rather
/// than by cancellation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AswReport {
    pub value: Rat,
    pub top_degree_checked: bool,
}

/// Evaluates `∫_{P(V)} ξ^d · c_top(H ⊗ π*W) · π*η` with `H` the
/// hyperplane bundle, expanding the top Chern class by the line-twist
/// rule `c_top(H ⊗ π*W) = Σ_j π*c_j(W) ξ^{rank W - j}`.
///
/// A degree mismatch is not an error: the value is then 0 with the check
/// flag lowered.
pub fn asw_evaluate(k: &KuranishiData) -> Result<AswReport, Error> {
    let eta_degree = k.insertion.max_degree().unwrap_or(0);
    let pb = projective_bundle(&k.v, &fresh_name(k.v.space(), "xi"))?;
    let xi = pb.xi();
    let w_rank = k.w.rank() as u32;
    let mut euler = GradedClass::zero(pb.total());
    for j in 0..=w_rank {
        let term = pb.lift(&k.w.chern(j))?.mul(&xi.pow(w_rank - j)?)?;
        euler = euler.add(&term)?;
    }
    let integrand = xi.pow(k.d)?.mul(&euler)?.mul(&pb.lift(&k.insertion)?)?;
    let top_degree_checked = 2 * k.d + 2 * w_rank + eta_degree == pb.total().top_degree();
    Ok(AswReport {
        value: integrand.integrate(),
        top_degree_checked,
    })
}

fn fresh_name(space: &crate::ring::Space, stem: &str) -> String {
    let mut name = stem.to_string();
    while space.gen_index(&name).is_some() {
        name.push('_');
    }
    name
}

/// A value together with non-fatal diagnostics.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: Rat,
    pub warnings: Vec<String>,
}

/// Same fiber integral with the insertion given as a product of base
/// generators selected by 1-based index (typically odd circle classes on
/// a torus base, where index `i` selects `t{i}`). A repeated odd
/// generator makes the product vanish; that is reported as a warning on
/// the zero result, not an error.
pub fn asw_with_torus_insertions(
    v: &BundleClass,
    w: &BundleClass,
    d: u32,
    odd_insertion: &[usize],
) -> Result<Evaluation, Error> {
    let space = v.space();
    let gens = space.generators();
    let mut warnings = Vec::new();
    let mut seen_odd = BTreeSet::new();
    let mut eta = GradedClass::one(space);
    for &i in odd_insertion {
        let gen = i
            .checked_sub(1)
            .and_then(|j| gens.get(j))
            .ok_or_else(|| Error::UnknownName {
                name: format!("generator {i}"),
            })?;
        if gen.parity == Parity::Odd && !seen_odd.insert(i) {
            warnings.push(format!(
                "insertion {} repeats an odd generator; the product vanishes",
                gen.name
            ));
        }
        eta = eta.mul(&GradedClass::generator(space, &gen.name)?)?;
    }
    let data = asw_evaluate(&KuranishiData::new(v.clone(), w.clone(), d, eta)?)?;
    Ok(Evaluation {
        value: data.value,
        warnings,
    })
}

/// Number of point insertions that cuts an expected dimension to zero:
/// half of it, provided it is a nonnegative even integer.
pub fn point_insertions(dim: &Rat) -> Result<u32, Error> {
    let half = dim.clone() / Rat::from_int(2);
    if dim.is_negative() || !half.is_integer() {
        return Err(Error::RangeError {
            context: format!("dimension {dim} is not a nonnegative even integer"),
        });
    }
    half.to_i64()
        .filter(|v| u32::try_from(*v).is_ok())
        .map(|v| v as u32)
        .ok_or_else(|| Error::RangeError {
            context: format!("dimension {dim} is out of range"),
        })
}

/// Obstruction of a multi-level degeneration: one twisted symmetric
/// power per level, kept factored.
#[derive(Clone, Debug)]
pub struct CanonicalObstruction {
    space: crate::ring::Space,
    rank: i64,
    factors: Vec<BundleClass>,
}

impl CanonicalObstruction {
    pub fn rank(&self) -> i64 {
        self.rank
    }

    pub fn factors(&self) -> &[BundleClass] {
        &self.factors
    }

    /// Total Chern class of the direct sum of the factors.
    pub fn total_chern(&self) -> Result<GradedClass, Error> {
        let mut acc = GradedClass::one(&self.space);
        for f in &self.factors {
            acc = acc.mul(f.total_chern())?;
        }
        Ok(acc)
    }
}

/// Builds the obstruction attached to levels `(m_i, N_i)`: the factor at
/// a level is `E ⊗ S^{m_i - 1}(C ⊕ N_i*)` of rank `m_i (m_i + 1)/2`,
/// so the whole sum has rank `Σ m_i (m_i + 1)/2`. Multiplicities must be
/// at least 1 and the normal bundles honest of rank 2.
pub fn canonical_obstruction(
    e_restr: &BundleClass,
    levels: &[(i64, BundleClass)],
) -> Result<CanonicalObstruction, Error> {
    if e_restr.rank() != 1 {
        return Err(Error::NotALine {
            rank: e_restr.rank(),
        });
    }
    let mut factors = Vec::with_capacity(levels.len());
    let mut rank = 0i64;
    for (m, n) in levels {
        if *m < 1 {
            return Err(Error::BadMultiplicity {
                context: format!("level multiplicity {m} is below 1"),
            });
        }
        if n.rank() != 2 || !n.is_honest() {
            return Err(Error::VirtualRank { rank: n.rank() });
        }
        if n.space().id() != e_restr.space().id() {
            return Err(Error::AmbientMismatch);
        }
        let sym = BundleClass::trivial(e_restr.space(), 1)
            .whitney(&n.dual())?
            .sym_power((*m - 1) as u32)?;
        factors.push(sym.tensor_line(e_restr)?);
        rank += m * (m + 1) / 2;
    }
    Ok(CanonicalObstruction {
        space: e_restr.space().clone(),
        rank,
        factors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blowup::{obstruction_algebraic, FamilyBlowupScenario, Variant};
    use crate::surfaces::{point_model, surface_model, torus_model, SurfaceData};

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn eval(v: &BundleClass, w: &BundleClass, d: u32, eta: &GradedClass) -> AswReport {
        asw_evaluate(&KuranishiData::new(v.clone(), w.clone(), d, eta.clone()).unwrap()).unwrap()
    }

    #[test]
    fn point_normalization() {
        let p = point_model();
        for v in 2..=6u32 {
            for w in 1..v {
                let data = eval(
                    &BundleClass::trivial(&p, v),
                    &BundleClass::trivial(&p, w),
                    v - w - 1,
                    &GradedClass::one(&p),
                );
                assert_eq!(data.value, rat(1), "v = {v}, w = {w}");
                assert!(data.top_degree_checked);
            }
        }
    }

    #[test]
    fn balanced_constructor_fills_the_normalizing_exponent() {
        let p = point_model();
        let k = KuranishiData::balanced(
            BundleClass::trivial(&p, 7),
            BundleClass::trivial(&p, 3),
            GradedClass::one(&p),
        )
        .unwrap();
        assert_eq!(k.d, 3);
        assert_eq!(asw_evaluate(&k).unwrap().value, rat(1));
        assert!(KuranishiData::balanced(
            BundleClass::trivial(&p, 2),
            BundleClass::trivial(&p, 2),
            GradedClass::one(&p),
        )
        .is_err());
    }

    #[test]
    fn dimension_driven_constructors() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        // C = 4h on the plane: embedded-curve count (16 + 12)/2 = 14.
        let dims = DimensionData::from_surface(&SurfaceData::cp2(), &[rat(4)], 0, 0).unwrap();
        let v = BundleClass::trivial(&s.space, 16);
        let w = BundleClass::trivial(&s.space, 1);
        let k =
            KuranishiData::family(v.clone(), w.clone(), GradedClass::one(&s.space), &dims).unwrap();
        assert_eq!(k.d, 14); // pg = 0 on the plane
        let k = KuranishiData::algebraic_family(v, w, GradedClass::one(&s.space), &dims).unwrap();
        assert_eq!(k.d, 14);

        let mut bad = dims.clone();
        bad.fbd = 1; // pg = 0 leaves no room
        assert!(matches!(
            KuranishiData::algebraic_family(
                BundleClass::trivial(&s.space, 2),
                BundleClass::trivial(&s.space, 0),
                GradedClass::one(&s.space),
                &bad,
            ),
            Err(Error::RangeError { .. })
        ));
    }

    #[test]
    fn degree_mismatch_is_zero_not_error() {
        let p = point_model();
        let data = eval(
            &BundleClass::trivial(&p, 4),
            &BundleClass::trivial(&p, 1),
            0,
            &GradedClass::one(&p),
        );
        assert_eq!(data.value, rat(0));
        assert!(!data.top_degree_checked);
    }

    #[test]
    fn euler_factor_matches_the_twisted_bundle() {
        // The summed expansion of c_top(H ⊗ π*W) must agree with the top
        // Chern class computed through the tensor product itself.
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let v = s
            .tangent
            .whitney(&BundleClass::trivial(&s.space, 1))
            .unwrap();
        let w = s
            .tangent
            .whitney(&BundleClass::line(h.scale(&rat(2))).unwrap())
            .unwrap();
        let pb = projective_bundle(&v, "xi").unwrap();
        let xi = pb.xi();
        let w_rank = w.rank() as u32;
        let mut euler = GradedClass::zero(pb.total());
        for j in 0..=w_rank {
            euler = euler
                .add(
                    &pb.lift(&w.chern(j))
                        .unwrap()
                        .mul(&xi.pow(w_rank - j).unwrap())
                        .unwrap(),
                )
                .unwrap();
        }
        let twisted = pb
            .lift_bundle(&w)
            .unwrap()
            .tensor_line(&pb.hyperplane_bundle())
            .unwrap();
        assert_eq!(euler, twisted.total_chern().degree_part(2 * w_rank));
    }

    #[test]
    fn stabilization_by_a_common_summand() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let v = s
            .tangent
            .whitney(&BundleClass::trivial(&s.space, 1))
            .unwrap();
        let w = BundleClass::line(h.scale(&rat(2))).unwrap();
        for u in [
            BundleClass::trivial(&s.space, 2),
            BundleClass::line(h.clone()).unwrap(),
            s.tangent.clone(),
        ] {
            for d in 0..=4u32 {
                let plain = eval(&v, &w, d, &h);
                let stabilized = eval(&v.whitney(&u).unwrap(), &w.whitney(&u).unwrap(), d, &h);
                assert_eq!(plain.value, stabilized.value, "d = {d}");
            }
        }
    }

    #[test]
    fn torus_insertions_pair_against_the_fiber() {
        let t = torus_model(1);
        let v = BundleClass::trivial(&t, 2);
        let w = BundleClass::trivial(&t, 0);
        let eval = asw_with_torus_insertions(&v, &w, 1, &[1, 2]).unwrap();
        assert_eq!(eval.value, rat(1));
        assert!(eval.warnings.is_empty());
        // reversing the order flips the Koszul sign
        let eval = asw_with_torus_insertions(&v, &w, 1, &[2, 1]).unwrap();
        assert_eq!(eval.value, rat(-1));
    }

    #[test]
    fn repeated_odd_insertion_warns_and_vanishes() {
        let t = torus_model(1);
        let v = BundleClass::trivial(&t, 2);
        let w = BundleClass::trivial(&t, 0);
        let eval = asw_with_torus_insertions(&v, &w, 1, &[1, 1]).unwrap();
        assert_eq!(eval.value, rat(0));
        assert_eq!(eval.warnings.len(), 1);
        assert!(matches!(
            asw_with_torus_insertions(&v, &w, 1, &[5]),
            Err(Error::UnknownName { .. })
        ));
    }

    #[test]
    fn point_insertion_count() {
        assert_eq!(point_insertions(&rat(6)).unwrap(), 3);
        assert_eq!(point_insertions(&rat(0)).unwrap(), 0);
        assert!(point_insertions(&rat(5)).is_err());
        assert!(point_insertions(&rat(-2)).is_err());
        assert!(point_insertions(&Rat::frac(1, 2).unwrap()).is_err());
    }

    #[test]
    fn canonical_obstruction_ranks_and_single_level_factor() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let e = BundleClass::line(h.scale(&rat(3))).unwrap();
        let levels = vec![
            (1, s.tangent.clone()),
            (2, BundleClass::trivial(&s.space, 2)),
            (3, s.tangent.dual()),
        ];
        let ob = canonical_obstruction(&e, &levels).unwrap();
        assert_eq!(ob.rank(), 1 + 3 + 6);
        assert_eq!(ob.factors().len(), 3);
        assert_eq!(
            ob.rank(),
            ob.factors().iter().map(|f| f.rank()).sum::<i64>()
        );

        // one level of multiplicity p matches the algebraic variant at -p
        for p in 1..=3i64 {
            let single = canonical_obstruction(&e, &[(p, s.tangent.clone())]).unwrap();
            let sc = FamilyBlowupScenario::new(
                Variant::Algebraic,
                &s.space,
                GradedClass::zero(&s.space),
                s.tangent.clone(),
                -p,
                GradedClass::one(&s.space),
                Some(e.clone()),
            )
            .unwrap();
            let alg = obstruction_algebraic(&sc).unwrap();
            assert!(single.factors()[0].equals(&alg), "p = {p}");
        }
    }

    #[test]
    fn canonical_obstruction_guards() {
        let s = surface_model(&SurfaceData::cp2()).unwrap();
        let h = GradedClass::generator(&s.space, "h").unwrap();
        let e = BundleClass::line(h.clone()).unwrap();
        assert!(matches!(
            canonical_obstruction(&e, &[(0, s.tangent.clone())]),
            Err(Error::BadMultiplicity { .. })
        ));
        assert!(matches!(
            canonical_obstruction(&e, &[(2, BundleClass::trivial(&s.space, 3))]),
            Err(Error::VirtualRank { .. })
        ));
        assert!(matches!(
            canonical_obstruction(&BundleClass::trivial(&s.space, 2), &[]),
            Err(Error::NotALine { .. })
        ));
    }
}
