//! Ready-made space models: simply-connected-type surfaces presented by an
//! intersection form, exterior tori, the point, and projective bundles
//! over any of them with their pushforward maps.
//!
//! Surface models carry an explicit degree-4 point-class generator `pt`,
//! so a basis class with square zero (a K3 fiber class, say) still has a
//! place for its products to land and the integration table stays
//! one-entry: `pt` integrates to 1.

use serde::{Deserialize, Serialize};

use crate::bundles::BundleClass;
use crate::error::Error;
use crate::rational::Rat;
use crate::ring::{GradedClass, Monomial, Parity, Space, SpaceBuilder};

/// Numerical presentation of a surface: degree-2 basis with intersection
/// form `Q`, canonical-class coordinates in that basis, second Chern
/// number, and the Hodge data used by dimension formulas.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceData {
    pub basis: Vec<String>,
    #[serde(rename = "Q")]
    pub intersection: Vec<Vec<Rat>>,
    #[serde(rename = "K")]
    pub canonical: Vec<Rat>,
    pub c2: Rat,
    pub pg: u32,
    pub q: u32,
}

impl SurfaceData {
    pub fn validate(&self) -> Result<(), Error> {
        let n = self.basis.len();
        if self.intersection.len() != n || self.intersection.iter().any(|row| row.len() != n) {
            return Err(Error::ShapeMismatch {
                context: format!("Q must be {n}x{n} to match the basis"),
            });
        }
        for i in 0..n {
            for j in 0..n {
                if self.intersection[i][j] != self.intersection[j][i] {
                    return Err(Error::ShapeMismatch {
                        context: "Q must be symmetric".into(),
                    });
                }
            }
        }
        if self.canonical.len() != n {
            return Err(Error::ShapeMismatch {
                context: format!("K needs {n} coordinates to match the basis"),
            });
        }
        Ok(())
    }

    /// The projective plane: basis `h`, `h^2 = 1`, `K = -3h`, `c2 = 3`.
    pub fn cp2() -> Self {
        SurfaceData {
            basis: vec!["h".into()],
            intersection: vec![vec![Rat::one()]],
            canonical: vec![Rat::from_int(-3)],
            c2: Rat::from_int(3),
            pg: 0,
            q: 0,
        }
    }

    /// A K3 surface tracked through one basis class of self-intersection
    /// `square` (0 for a fiber-type class); `K = 0`, `c2 = 24`.
    pub fn k3(square: Rat) -> Self {
        SurfaceData {
            basis: vec!["C".into()],
            intersection: vec![vec![square]],
            canonical: vec![Rat::zero()],
            c2: Rat::from_int(24),
            pg: 1,
            q: 0,
        }
    }

    /// Formal two-generator surface hitting prescribed Chern numbers
    /// `(C^2, C.K, K^2, c2)`; the second basis class is the canonical
    /// class. Used for interpolation over Chern-number space.
    pub fn formal(c_sq: Rat, c_k: Rat, k_sq: Rat, c2: Rat, pg: u32, q: u32) -> Self {
        SurfaceData {
            basis: vec!["C".into(), "K".into()],
            intersection: vec![vec![c_sq, c_k.clone()], vec![c_k, k_sq]],
            canonical: vec![Rat::zero(), Rat::one()],
            c2,
            pg,
            q,
        }
    }
}

/// A built surface model: the space, its tangent bundle, and the data it
/// came from.
#[derive(Clone)]
pub struct Surface {
    pub space: Space,
    pub tangent: BundleClass,
    pub data: SurfaceData,
}

impl Surface {
    /// The degree-4 point class.
    pub fn point_class(&self) -> GradedClass {
        GradedClass::generator(&self.space, "pt").expect("surface models define pt")
    }

    /// Divisor class with the given coordinates in the degree-2 basis.
    pub fn divisor(&self, coords: &[Rat]) -> Result<GradedClass, Error> {
        if coords.len() != self.data.basis.len() {
            return Err(Error::ShapeMismatch {
                context: format!(
                    "expected {} coordinates, got {}",
                    self.data.basis.len(),
                    coords.len()
                ),
            });
        }
        let mut acc = GradedClass::zero(&self.space);
        for (name, c) in self.data.basis.iter().zip(coords) {
            acc = acc.add(&GradedClass::generator(&self.space, name)?.scale(c))?;
        }
        Ok(acc)
    }

    /// Canonical class `K` as a degree-2 class.
    pub fn canonical_class(&self) -> GradedClass {
        self.divisor(&self.data.canonical)
            .expect("canonical coordinates validated")
    }
}

/// Builds the rewriting model of a surface from its numerical data:
/// `x_i * x_j -> Q_ij * pt`, `pt * x_i -> 0`, `pt^2 -> 0`, `∫ pt = 1`;
/// tangent bundle `c_1 = -K`, `c_2 = c2 * pt`.
pub fn surface_model(data: &SurfaceData) -> Result<Surface, Error> {
    data.validate()?;
    let n = data.basis.len();
    let mut b = SpaceBuilder::new("surface", 2);
    for name in &data.basis {
        b = b.generator(name, 2, Parity::Even);
    }
    b = b.generator("pt", 4, Parity::Even);
    for i in 0..n {
        for j in i..n {
            let lhs = if i == j {
                vec![(data.basis[i].as_str(), 2)]
            } else {
                vec![(data.basis[i].as_str(), 1), (data.basis[j].as_str(), 1)]
            };
            let q = data.intersection[i][j].clone();
            if q.is_zero() {
                b = b.rule_to_zero(&lhs);
            } else {
                let rhs: &[(&[(&str, u32)], Rat)] = &[(&[("pt", 1)], q)];
                b = b.rule(&lhs, rhs);
            }
        }
    }
    for name in &data.basis {
        b = b.rule_to_zero(&[("pt", 1), (name.as_str(), 1)]);
    }
    b = b.rule_to_zero(&[("pt", 2)]);
    b = b.integral(&[("pt", 1)], Rat::one());
    let space = b.build()?;

    let minus_k: Vec<Rat> = data.canonical.iter().map(|c| -c).collect();
    let mut c1 = GradedClass::zero(&space);
    for (name, c) in data.basis.iter().zip(&minus_k) {
        c1 = c1.add(&GradedClass::generator(&space, name)?.scale(c))?;
    }
    let c2 = GradedClass::generator(&space, "pt")?.scale(&data.c2);
    let tangent = BundleClass::from_chern(&space, 2, &[c1, c2])?;
    Ok(Surface {
        space,
        tangent,
        data: data.clone(),
    })
}

/// Exterior algebra of a real `2q`-torus: odd degree-1 generators
/// `t1..t{2q}` with `∫ t1∧…∧t{2q} = 1`. `q = 0` is the point.
pub fn torus_model(q: u32) -> Space {
    let names: Vec<String> = (1..=2 * q).map(|i| format!("t{i}")).collect();
    let mut b = SpaceBuilder::new(format!("torus{q}"), q);
    for n in &names {
        b = b.generator(n, 1, Parity::Odd);
    }
    let top: Vec<(&str, u32)> = names.iter().map(|n| (n.as_str(), 1)).collect();
    b.integral(&top, Rat::one())
        .build()
        .expect("exterior algebra is always confluent")
}

/// The one-point space: dimension 0, `∫ 1 = 1`.
pub fn point_model() -> Space {
    SpaceBuilder::new("point", 0)
        .integral(&[], Rat::one())
        .build()
        .expect("point model is trivially valid")
}

/// Projectivization `P(V) -> B` with hyperplane class `ξ = c_1(O(1))`,
/// Grothendieck relation `Σ_i π*c_i(V) ξ^{r-i} = 0`, and the sign
/// convention `π_*(ξ^{r-1}) = +1`. An exceptional-sphere class on the
/// blown-up side corresponds to `-ξ` here, with the fiber orientation
/// reversed: the reversal flips integrals, which is how a presentation
/// with `E^2 · π^*[B] = -1` is recovered from `∫ ξ^{r-1} μ_B = +1`.
pub struct ProjBundle {
    total: Space,
    base: Space,
    v: BundleClass,
    rank: u32,
    xi_index: u32,
}

/// Builds `P(V)` over the base carrying `V`. `xi_name` must not collide
/// with a base generator.
pub fn projective_bundle(v: &BundleClass, xi_name: &str) -> Result<ProjBundle, Error> {
    if v.rank() < 1 || !v.is_honest() {
        return Err(Error::VirtualRank { rank: v.rank() });
    }
    let base = v.space().clone();
    let r = v.rank() as u32;
    let dim_total = base.complex_dim() + r - 1;

    let mut b = SpaceBuilder::new(format!("P({})", base.name()), dim_total);
    for g in base.generators() {
        b = b.generator(&g.name, g.degree, g.parity);
    }
    b = b.generator(xi_name, 2, Parity::Even);

    // base rules, re-expressed by name
    let name_of = |idx: u32| base.generators()[idx as usize].name.clone();
    let to_named = |m: &Monomial| -> Vec<(String, u32)> {
        m.factors().iter().map(|&(g, e)| (name_of(g), e)).collect()
    };
    for rule in base.rules() {
        let lhs_named = to_named(rule.lhs());
        let lhs_ref: Vec<(&str, u32)> = lhs_named.iter().map(|(n, e)| (n.as_str(), *e)).collect();
        let rhs_named: Vec<(Vec<(String, u32)>, Rat)> = rule
            .rhs()
            .iter()
            .map(|(m, c)| (to_named(m), c.clone()))
            .collect();
        let rhs_ref: Vec<(Vec<(&str, u32)>, Rat)> = rhs_named
            .iter()
            .map(|(m, c)| (m.iter().map(|(n, e)| (n.as_str(), *e)).collect(), c.clone()))
            .collect();
        let rhs_slices: Vec<(&[(&str, u32)], Rat)> = rhs_ref
            .iter()
            .map(|(m, c)| (m.as_slice(), c.clone()))
            .collect();
        b = b.rule(&lhs_ref, &rhs_slices);
    }

    // Grothendieck relation: ξ^r -> -Σ_{i=1..r} π*c_i(V) ξ^{r-i}
    let mut rhs_named: Vec<(Vec<(String, u32)>, Rat)> = Vec::new();
    for i in 1..=r {
        let ci = v.chern(i);
        for (m, c) in ci.terms() {
            let mut named = to_named(m);
            if r - i > 0 {
                named.push((xi_name.to_string(), r - i));
            }
            rhs_named.push((named, -c));
        }
    }
    let rhs_ref: Vec<(Vec<(&str, u32)>, Rat)> = rhs_named
        .iter()
        .map(|(m, c)| (m.iter().map(|(n, e)| (n.as_str(), *e)).collect(), c.clone()))
        .collect();
    let rhs_slices: Vec<(&[(&str, u32)], Rat)> = rhs_ref
        .iter()
        .map(|(m, c)| (m.as_slice(), c.clone()))
        .collect();
    b = b.rule(&[(xi_name, r)], &rhs_slices);

    // integration: ∫_total ξ^{r-1} μ = ∫_base μ
    for (m, val) in base.integrals() {
        let mut named = to_named(m);
        if r > 1 {
            named.push((xi_name.to_string(), r - 1));
        }
        let named_ref: Vec<(&str, u32)> = named.iter().map(|(n, e)| (n.as_str(), *e)).collect();
        b = b.integral(&named_ref, val.clone());
    }

    let total = b.build()?;
    let xi_index = total.gen_index(xi_name).expect("just added");
    Ok(ProjBundle {
        total,
        base,
        v: v.clone(),
        rank: r,
        xi_index,
    })
}

impl ProjBundle {
    pub fn total(&self) -> &Space {
        &self.total
    }

    pub fn base(&self) -> &Space {
        &self.base
    }

    pub fn bundle(&self) -> &BundleClass {
        &self.v
    }

    pub fn rank(&self) -> u32 {
        self.rank
    }

    /// Hyperplane class `ξ`.
    pub fn xi(&self) -> GradedClass {
        GradedClass::from_raw_terms(
            &self.total,
            vec![(Monomial::from_factors(&[(self.xi_index, 1)]), Rat::one())],
        )
    }

    /// The line bundle `O(1)` with `c_1 = ξ`.
    pub fn hyperplane_bundle(&self) -> BundleClass {
        BundleClass::line(self.xi()).expect("ξ has degree 2")
    }

    /// `O(n)`; negative `n` is the dual power.
    pub fn hyperplane_power(&self, n: i64) -> BundleClass {
        BundleClass::line(self.xi().scale(&Rat::from_int(n))).expect("ξ has degree 2")
    }

    /// Pullback of a base class: base generators keep their indices in the
    /// total model, so the monomials transfer verbatim.
    pub fn lift(&self, a: &GradedClass) -> Result<GradedClass, Error> {
        if a.space().id() != self.base.id() {
            return Err(Error::AmbientMismatch);
        }
        Ok(GradedClass::from_raw_terms(
            &self.total,
            a.terms().map(|(m, c)| (m.clone(), c.clone())).collect(),
        ))
    }

    /// Pullback of a bundle class.
    pub fn lift_bundle(&self, e: &BundleClass) -> Result<BundleClass, Error> {
        BundleClass::virtual_from_total(e.rank(), self.lift(e.total_chern())?)
    }

    /// Relative tangent class `T_{P(V)/B} = H ⊗ π*V − C` of rank `r − 1`;
    /// the rank-`r` top Chern class of `H ⊗ π*V` is exactly the
    /// Grothendieck relation, so it normalizes to zero and the stored
    /// class is honest.
    pub fn relative_tangent(&self) -> Result<BundleClass, Error> {
        let twisted = self
            .lift_bundle(&self.v)?
            .tensor_line(&self.hyperplane_bundle())?;
        BundleClass::from_total(self.v.rank() - 1, twisted.total_chern().clone())
    }

    /// Fiber integration `π_*`: classes are stored in normal form, where
    /// the relation caps the ξ-exponent at `r − 1`, so `π_*` extracts the
    /// coefficient of `ξ^{r-1}`. The Segre-class behavior
    /// `π_*(ξ^{r-1+j} π*b) = s_j(V) b` emerges from the relation.
    pub fn pushforward(&self, a: &GradedClass) -> Result<GradedClass, Error> {
        if a.space().id() != self.total.id() {
            return Err(Error::AmbientMismatch);
        }
        let mut raw: Vec<(Monomial, Rat)> = Vec::new();
        for (m, c) in a.terms() {
            let (exp, rest) = m.without(self.xi_index);
            if exp == self.rank - 1 {
                raw.push((rest, c.clone()));
            }
        }
        Ok(GradedClass::from_raw_terms(&self.base, raw))
    }
}
