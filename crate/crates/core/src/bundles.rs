//! Chern calculus on a fixed ambient space: Whitney sums, duals, twists by
//! line bundles, symmetric powers via formal roots, Chern characters and
//! Todd classes with series coefficients generated from Bernoulli numbers.
//!
//! A [`BundleClass`] is the pair (rank, total Chern class). Negative or
//! inconsistent ranks are allowed — such classes are *virtual* and admit
//! sums, duals, twists, ch and todd, but not symmetric powers.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::OnceLock;

use crate::error::Error;
use crate::rational::{bernoulli, binomial, inv_factorial, Rat};
use crate::ring::{GradedClass, Space};

#[derive(Clone, PartialEq)]
pub struct BundleClass {
    rank: i64,
    total: GradedClass,
}

impl BundleClass {
    /// Rank-`rank` bundle with the given total Chern class. The scalar part
    /// must be 1 and every term must sit in even cohomological degree. For
    /// honest ranks the vanishing `c_i = 0, i > rank` is enforced.
    pub fn from_total(rank: i64, total: GradedClass) -> Result<Self, Error> {
        Self::from_total_inner(rank, total, true)
    }

    /// Same as [`BundleClass::from_total`] without the honesty check; use
    /// for classes known only as K-theory differences.
    pub fn virtual_from_total(rank: i64, total: GradedClass) -> Result<Self, Error> {
        Self::from_total_inner(rank, total, false)
    }

    fn from_total_inner(rank: i64, total: GradedClass, check_honest: bool) -> Result<Self, Error> {
        if total.scalar_part() != Rat::one() {
            return Err(Error::invalid("total Chern class must have scalar part 1"));
        }
        for (m, _) in total.terms() {
            if !total.space().degree_of(m).is_multiple_of(2) {
                return Err(Error::WrongDegree {
                    context: "total Chern class has an odd-degree term".into(),
                });
            }
        }
        let b = BundleClass { rank, total };
        if check_honest && rank >= 0 && !b.is_honest() {
            return Err(Error::invalid(format!(
                "rank {rank} bundle with nonzero c_i beyond the rank; use a virtual constructor"
            )));
        }
        Ok(b)
    }

    pub fn from_chern(space: &Space, rank: i64, parts: &[GradedClass]) -> Result<Self, Error> {
        let mut total = GradedClass::one(space);
        for (i, part) in parts.iter().enumerate() {
            let d = 2 * (i as u32 + 1);
            if !part.is_homogeneous(d) {
                return Err(Error::WrongDegree {
                    context: format!("c_{} must be homogeneous of degree {d}", i + 1),
                });
            }
            total = total.add(part)?;
        }
        Self::from_total(rank, total)
    }

    pub fn trivial(space: &Space, rank: u32) -> Self {
        BundleClass {
            rank: rank as i64,
            total: GradedClass::one(space),
        }
    }

    /// Rank-0 bundle with total Chern class 1.
    pub fn zero(space: &Space) -> Self {
        Self::trivial(space, 0)
    }

    /// Line bundle with the given first Chern class (homogeneous of degree
    /// 2, or zero).
    pub fn line(c1: GradedClass) -> Result<Self, Error> {
        if !c1.is_homogeneous(2) {
            return Err(Error::WrongDegree {
                context: "a line bundle's c_1 must be homogeneous of degree 2".into(),
            });
        }
        let total = GradedClass::one(c1.space()).add(&c1)?;
        Ok(BundleClass { rank: 1, total })
    }

    /// Formal square root: the line with `c_1 = a/2`. Legitimate in
    /// K-theory with rational coefficients even when no honest square root
    /// exists.
    pub fn half_line(a: GradedClass) -> Result<Self, Error> {
        if !a.is_homogeneous(2) {
            return Err(Error::WrongDegree {
                context: "half_line argument must be homogeneous of degree 2".into(),
            });
        }
        Self::line(a.scale(&Rat::frac(1, 2).unwrap()))
    }

    pub fn rank(&self) -> i64 {
        self.rank
    }

    pub fn space(&self) -> &Space {
        self.total.space()
    }

    pub fn total_chern(&self) -> &GradedClass {
        &self.total
    }

    /// `c_i`, the degree-`2i` part of the total Chern class.
    pub fn chern(&self, i: u32) -> GradedClass {
        self.total.degree_part(2 * i)
    }

    /// True when the rank is nonnegative and all `c_i` with `i > rank`
    /// vanish (up to the ambient truncation, which hides nothing below the
    /// top degree).
    pub fn is_honest(&self) -> bool {
        if self.rank < 0 {
            return false;
        }
        match self.total.max_degree() {
            None => false, // scalar part 1 is always present
            Some(d) => d <= 2 * (self.rank.min(self.space().complex_dim() as i64).max(0) as u32),
        }
    }

    /// Determinant line, `c_1(det E) = c_1(E)`.
    pub fn det(&self) -> Self {
        BundleClass {
            rank: 1,
            total: GradedClass::one(self.space())
                .add(&self.chern(1))
                .expect("same ambient"),
        }
    }

    /// Top Chern class of an honest bundle, `c_rank`.
    pub fn c_top(&self) -> Result<GradedClass, Error> {
        if self.rank < 0 {
            return Err(Error::VirtualRank { rank: self.rank });
        }
        if self.rank == 0 {
            return Ok(GradedClass::one(self.space()));
        }
        Ok(self.chern(self.rank as u32))
    }

    /// Whitney sum: ranks add, total Chern classes multiply.
    pub fn whitney(&self, other: &Self) -> Result<Self, Error> {
        Ok(BundleClass {
            rank: self.rank + other.rank,
            total: self.total.mul(&other.total)?,
        })
    }

    /// Formal difference in K-theory: ranks subtract, total Chern classes
    /// divide. The result is usually virtual.
    pub fn difference(&self, other: &Self) -> Result<Self, Error> {
        Ok(BundleClass {
            rank: self.rank - other.rank,
            total: self.total.mul(&other.total.invert_unit()?)?,
        })
    }

    /// Dual bundle, `c_i(E*) = (-1)^i c_i(E)`.
    pub fn dual(&self) -> Self {
        let space = self.space();
        let mut total = GradedClass::zero(space);
        let top = space.top_degree();
        let mut d = 0;
        while d <= top {
            let part = self.total.degree_part(d);
            let signed = if (d / 2) % 2 == 1 { part.neg() } else { part };
            total = total.add(&signed).expect("same ambient");
            d += 2;
        }
        BundleClass {
            rank: self.rank,
            total,
        }
    }

    /// Twist by a line bundle: with `λ = c_1(L)`,
    /// `c(E⊗L) = Σ_i c_i(E) (1+λ)^{rank−i}`. Multiplicative in `E`, hence
    /// valid for virtual classes (negative exponents expand as series on
    /// the nilpotent `λ`).
    pub fn tensor_line(&self, line: &Self) -> Result<Self, Error> {
        if line.rank != 1 {
            return Err(Error::NotALine { rank: line.rank });
        }
        let space = self.space();
        let one_plus = GradedClass::one(space).add(&line.chern(1))?;
        let mut total = GradedClass::zero(space);
        let dim = space.complex_dim();
        for i in 0..=dim {
            let ci = self.chern(i);
            if ci.is_zero() && i > 0 {
                continue;
            }
            let shifted = one_plus.unit_power(self.rank - i as i64)?;
            total = total.add(&ci.mul(&shifted)?)?;
        }
        BundleClass::virtual_from_total(self.rank, total)
    }

    /// Power sums `p_1..p_n` of the formal Chern roots, from Newton's
    /// identities applied to the stored `c_i` (valid for virtual classes:
    /// the identities only see the total Chern class).
    pub fn power_sums(&self, n: u32) -> Vec<GradedClass> {
        let space = self.space();
        let mut p: Vec<GradedClass> = Vec::with_capacity(n as usize);
        for k in 1..=n {
            // p_k = sum_{i=1}^{k-1} (-1)^{i-1} c_i p_{k-i} + (-1)^{k-1} k c_k
            let mut acc = GradedClass::zero(space);
            for i in 1..k {
                let term = self
                    .chern(i)
                    .mul(&p[(k - i - 1) as usize])
                    .expect("ambient");
                acc = acc
                    .add(&if i % 2 == 1 { term } else { term.neg() })
                    .expect("ambient");
            }
            let tail = self.chern(k).scale(&Rat::from_int(k as i64));
            acc = acc
                .add(&if k % 2 == 1 { tail } else { tail.neg() })
                .expect("ambient");
            p.push(acc);
        }
        p
    }

    /// Chern character `rank + Σ p_k / k!`, truncated at the ambient
    /// dimension.
    pub fn chern_character(&self) -> GradedClass {
        let space = self.space();
        let dim = space.complex_dim();
        let mut ch = GradedClass::constant(space, Rat::from_int(self.rank));
        for (k, pk) in self.power_sums(dim).into_iter().enumerate() {
            ch = ch
                .add(&pk.scale(&inv_factorial(k as u64 + 1)))
                .expect("ambient");
        }
        ch
    }

    /// Todd class: `exp(Σ_j ℓ_j p_j)` with `ℓ_j` the coefficients of
    /// `log(x / (1 - e^{-x}))`, generated from Bernoulli numbers. The
    /// expansion starts `1 + c_1/2 + (c_1^2 + c_2)/12 + c_1 c_2 / 24 + …`
    /// and is multiplicative under Whitney sums, so it extends to virtual
    /// classes.
    pub fn todd(&self) -> GradedClass {
        let space = self.space();
        let dim = space.complex_dim();
        let coeffs = log_todd_series();
        assert!(
            (dim as usize) < coeffs.len(),
            "ambient dimension exceeds the generated Todd series length"
        );
        let mut arg = GradedClass::zero(space);
        for (k, pk) in self.power_sums(dim).into_iter().enumerate() {
            arg = arg.add(&pk.scale(&coeffs[k + 1])).expect("ambient");
        }
        exp_class(&arg)
    }

    /// Total Segre class, the power-series inverse of the total Chern
    /// class.
    pub fn total_segre(&self) -> GradedClass {
        self.total.invert_unit().expect("scalar part is 1")
    }

    /// `s_j`, the degree-`2j` part of the total Segre class.
    pub fn segre(&self, j: u32) -> GradedClass {
        self.total_segre().degree_part(2 * j)
    }

    /// Symmetric power by formal-root enumeration: the Chern roots of
    /// `S^k E` are the multiset sums of `k` roots of `E`. Requires an
    /// honest bundle of rank 1..=4 and `k <= 64` so the multiset set stays
    /// manageable; the rank of the result is `C(k + r - 1, r - 1)`.
    pub fn sym_power(&self, k: u32) -> Result<Self, Error> {
        if self.rank < 1 || !self.is_honest() {
            return Err(Error::VirtualInput {
                context: format!(
                    "sym_power needs an honest bundle of positive rank, got rank {}",
                    self.rank
                ),
            });
        }
        let r = self.rank as usize;
        if r > 4 {
            return Err(Error::RankTooLarge {
                context: format!("sym_power supports rank <= 4, got {r}"),
            });
        }
        if k > 64 {
            return Err(Error::RankTooLarge {
                context: format!("sym_power supports k <= 64, got {k}"),
            });
        }
        let space = self.space();
        let new_rank = binomial(k as u64 + r as u64 - 1, r as u64 - 1)
            .to_i64()
            .expect("small binomial");
        if k == 0 {
            return Ok(BundleClass::trivial(space, 1));
        }
        let dim = space.complex_dim() as usize;

        // product of (1 + mu . x) over all exponent multisets mu of size k
        let mut product = SymPoly::one(r);
        for mu in multisets(r, k) {
            let mut root = SymPoly::zero(r);
            for (i, &m) in mu.iter().enumerate() {
                if m > 0 {
                    root.add_var(i, Rat::from_int(m as i64));
                }
            }
            product = product.mul_linear(&root, dim);
        }

        // rewrite in the elementary basis, then substitute e_i = c_i(E)
        let e_monos = product.into_elementary(dim);
        let mut total = GradedClass::zero(space);
        for (e_exp, coeff) in e_monos {
            let mut term = GradedClass::constant(space, coeff);
            for (i, &e) in e_exp.iter().enumerate() {
                if e > 0 {
                    term = term.mul(&self.chern(i as u32 + 1).pow(e)?)?;
                }
            }
            total = total.add(&term)?;
        }
        BundleClass::from_total(new_rank, total)
    }

    pub fn equals(&self, other: &Self) -> bool {
        self.rank == other.rank && self.total == other.total
    }
}

impl fmt::Display for BundleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rank {}, c = {}", self.rank, self.total)
    }
}

impl fmt::Debug for BundleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `exp` of a class with zero scalar part (nilpotent, so the sum is
/// finite).
pub fn exp_class(a: &GradedClass) -> GradedClass {
    assert!(a.scalar_part().is_zero(), "exp needs a nilpotent argument");
    let mut acc = GradedClass::one(a.space());
    let mut pw = GradedClass::one(a.space());
    let mut n = 0u64;
    loop {
        n += 1;
        pw = pw.mul(a).expect("ambient");
        if pw.is_zero() {
            break;
        }
        acc = acc.add(&pw.scale(&inv_factorial(n))).expect("ambient");
    }
    acc
}

const SERIES_LEN: usize = 33;

/// Coefficients of `log(x / (1 - e^{-x}))` up to degree `SERIES_LEN - 1`,
/// generated once from Bernoulli numbers.
fn log_todd_series() -> &'static Vec<Rat> {
    static CELL: OnceLock<Vec<Rat>> = OnceLock::new();
    CELL.get_or_init(|| {
        let b = bernoulli(SERIES_LEN - 1);
        // T(x) = x/(1-e^{-x}) = sum (-1)^k B_k x^k / k!
        let mut t = vec![Rat::zero(); SERIES_LEN];
        for (k, bk) in b.iter().enumerate() {
            let sign = if k % 2 == 0 {
                Rat::one()
            } else {
                Rat::from_int(-1)
            };
            t[k] = sign * bk.clone() * inv_factorial(k as u64);
        }
        // log(1 + u) with u = T - 1 (u has no constant term)
        let mut u = t;
        u[0] = Rat::zero();
        let mut log = vec![Rat::zero(); SERIES_LEN];
        let mut upow = vec![Rat::zero(); SERIES_LEN];
        upow[0] = Rat::one();
        for n in 1..SERIES_LEN {
            upow = series_mul(&upow, &u);
            let sign = if n % 2 == 1 {
                Rat::one()
            } else {
                Rat::from_int(-1)
            };
            let inv_n = Rat::one() / Rat::from_int(n as i64);
            for d in 0..SERIES_LEN {
                log[d] += &sign * &(&upow[d] * &inv_n);
            }
        }
        log
    })
}

fn series_mul(a: &[Rat], b: &[Rat]) -> Vec<Rat> {
    let n = a.len();
    let mut out = vec![Rat::zero(); n];
    for i in 0..n {
        if a[i].is_zero() {
            continue;
        }
        for j in 0..n - i {
            if !b[j].is_zero() {
                out[i + j] += &a[i] * &b[j];
            }
        }
    }
    out
}

/// All exponent vectors of length `r` summing to `k` (multisets of size
/// `k` over `r` letters).
fn multisets(r: usize, k: u32) -> Vec<Vec<u32>> {
    fn rec(r: usize, k: u32, acc: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if r == 1 {
            acc.push(k);
            out.push(acc.clone());
            acc.pop();
            return;
        }
        for first in 0..=k {
            acc.push(first);
            rec(r - 1, k - first, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(r, k, &mut Vec::new(), &mut out);
    out
}

/// Dense-enough sparse polynomial in `r` commuting variables, used only
/// for the formal-root computation; truncated by total degree.
struct SymPoly {
    r: usize,
    terms: BTreeMap<Vec<u16>, Rat>,
}

impl SymPoly {
    fn zero(r: usize) -> Self {
        SymPoly {
            r,
            terms: BTreeMap::new(),
        }
    }

    fn one(r: usize) -> Self {
        let mut p = SymPoly::zero(r);
        p.terms.insert(vec![0; r], Rat::one());
        p
    }

    fn add_var(&mut self, i: usize, c: Rat) {
        let mut exp = vec![0u16; self.r];
        exp[i] = 1;
        let e = self.terms.entry(exp).or_insert_with(Rat::zero);
        *e += c;
    }

    /// self * (1 + linear), truncated at total degree `dim`.
    fn mul_linear(&self, linear: &SymPoly, dim: usize) -> SymPoly {
        let mut out = SymPoly::zero(self.r);
        for (exp, c) in &self.terms {
            // the "1" part
            let e = out.terms.entry(exp.clone()).or_insert_with(Rat::zero);
            *e += c.clone();
            let deg: u16 = exp.iter().sum();
            if (deg as usize) >= dim {
                continue;
            }
            for (lexp, lc) in &linear.terms {
                let var = lexp.iter().position(|&x| x > 0).expect("linear term");
                let mut nexp = exp.clone();
                nexp[var] += 1;
                let e = out.terms.entry(nexp).or_insert_with(Rat::zero);
                *e += c * lc;
            }
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    fn mul(&self, other: &SymPoly, dim: usize) -> SymPoly {
        let mut out = SymPoly::zero(self.r);
        for (ea, ca) in &self.terms {
            let da: u16 = ea.iter().sum();
            for (eb, cb) in &other.terms {
                let db: u16 = eb.iter().sum();
                if (da + db) as usize > dim {
                    continue;
                }
                let exp: Vec<u16> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                let e = out.terms.entry(exp).or_insert_with(Rat::zero);
                *e += ca * cb;
            }
        }
        out.terms.retain(|_, v| !v.is_zero());
        out
    }

    fn elementary(r: usize, i: usize) -> SymPoly {
        // e_i = sum over i-subsets of the variables
        fn rec(r: usize, i: usize, start: usize, acc: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if acc.len() == i {
                out.push(acc.clone());
                return;
            }
            for v in start..r {
                acc.push(v);
                rec(r, i, v + 1, acc, out);
                acc.pop();
            }
        }
        let mut subsets = Vec::new();
        rec(r, i, 0, &mut Vec::new(), &mut subsets);
        let mut p = SymPoly::zero(r);
        for s in subsets {
            let mut exp = vec![0u16; r];
            for v in s {
                exp[v] = 1;
            }
            p.terms.insert(exp, Rat::one());
        }
        p
    }

    /// Gauss's algorithm: rewrite a symmetric polynomial as a polynomial
    /// in the elementary symmetric functions. Returns exponent vectors
    /// over `e_1..e_r` with coefficients.
    fn into_elementary(mut self, dim: usize) -> Vec<(Vec<u32>, Rat)> {
        let r = self.r;
        let mut out: Vec<(Vec<u32>, Rat)> = Vec::new();
        // repeatedly knock out the lex-largest monomial
        while let Some((exp, coeff)) = self
            .terms
            .iter()
            .max_by(|a, b| a.0.cmp(b.0))
            .map(|(e, c)| (e.clone(), c.clone()))
        {
            // symmetric => exponents weakly decreasing in the leader
            debug_assert!(exp.windows(2).all(|w| w[0] >= w[1]));
            let mut e_exp = vec![0u32; r];
            for i in 0..r {
                let next = if i + 1 < r { exp[i + 1] } else { 0 };
                e_exp[i] = (exp[i] - next) as u32;
            }
            let mut expansion = SymPoly::one(r);
            for (i, &e) in e_exp.iter().enumerate() {
                for _ in 0..e {
                    expansion = expansion.mul(&SymPoly::elementary(r, i + 1), dim);
                }
            }
            for (m, c) in &expansion.terms {
                let e = self.terms.entry(m.clone()).or_insert_with(Rat::zero);
                *e -= &coeff * c;
            }
            self.terms.retain(|_, v| !v.is_zero());
            out.push((e_exp, coeff));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{Parity, SpaceBuilder};

    fn rat(n: i64) -> Rat {
        Rat::from_int(n)
    }

    fn cp2() -> Space {
        SpaceBuilder::new("cp2", 2)
            .generator("h", 2, Parity::Even)
            .rule_to_zero(&[("h", 3)])
            .integral(&[("h", 2)], Rat::one())
            .build()
            .unwrap()
    }

    /// One even generator `t`, no relations below the truncation bound:
    /// a scratch space for checking series coefficients in degree <= dim.
    fn line_space(dim: u32) -> Space {
        SpaceBuilder::new("formal", dim)
            .generator("t", 2, Parity::Even)
            .integral(&[("t", dim)], Rat::one())
            .build()
            .unwrap()
    }

    fn gen(s: &Space, n: &str) -> GradedClass {
        GradedClass::generator(s, n).unwrap()
    }

    fn tangent_cp2(s: &Space) -> BundleClass {
        let h = gen(s, "h");
        BundleClass::from_chern(s, 2, &[h.scale(&rat(3)), h.pow(2).unwrap().scale(&rat(3))])
            .unwrap()
    }

    #[test]
    fn whitney_and_dual() {
        let s = cp2();
        let h = gen(&s, "h");
        let t = tangent_cp2(&s);
        let o1 = BundleClass::line(h.clone()).unwrap();
        let sum = t.whitney(&o1).unwrap();
        assert_eq!(sum.rank(), 3);
        assert_eq!(sum.chern(1), h.scale(&rat(4)));
        assert_eq!(sum.chern(2), h.pow(2).unwrap().scale(&rat(6)));
        let dd = t.dual().dual();
        assert!(dd.equals(&t));
        assert_eq!(t.dual().chern(1), h.scale(&rat(-3)));
        assert_eq!(t.dual().chern(2), h.pow(2).unwrap().scale(&rat(3)));
    }

    #[test]
    fn tensor_line_rank_two_oracle() {
        // roots x, y shifted by λ: c1 += 2λ, c2 += c1 λ + λ^2
        let s = cp2();
        let h = gen(&s, "h");
        let e = BundleClass::from_chern(&s, 2, &[h.clone(), h.pow(2).unwrap()]).unwrap();
        let l = BundleClass::line(h.scale(&rat(2))).unwrap();
        let t = e.tensor_line(&l).unwrap();
        assert_eq!(t.rank(), 2);
        assert_eq!(t.chern(1), h.scale(&rat(5))); // c1 + 2λ = h + 4h
                                                  // c2 + c1 λ + λ^2 = h^2 + 2h^2 + 4h^2
        assert_eq!(t.chern(2), h.pow(2).unwrap().scale(&rat(7)));
    }

    #[test]
    fn cotangent_twist_matches_known_chern_classes() {
        // T*_{P^2} ⊗ O(d): c1 = (2d-3) h, c2 = (d^2 - 3d + 3) h^2
        let s = cp2();
        let h = gen(&s, "h");
        for d in [0i64, 1, 2, 5] {
            let tw = tangent_cp2(&s)
                .dual()
                .tensor_line(&BundleClass::line(h.scale(&rat(d))).unwrap())
                .unwrap();
            assert_eq!(tw.chern(1), h.scale(&rat(2 * d - 3)));
            assert_eq!(
                tw.chern(2),
                h.pow(2).unwrap().scale(&rat(d * d - 3 * d + 3))
            );
        }
    }

    #[test]
    fn sym_power_rank_two_frozen_oracle() {
        // S^2 of rank 2: roots 2x, x+y, 2y => c1 = 3c1, c2 = 2c1^2 + 4c2,
        // c3 = 4 c1 c2 (frozen from the independent root expansion)
        let s = SpaceBuilder::new("threefold", 3)
            .generator("a", 2, Parity::Even)
            .generator("b", 2, Parity::Even)
            .build()
            .unwrap();
        let a = gen(&s, "a");
        let b = gen(&s, "b");
        let e = BundleClass::from_chern(&s, 2, &[a.clone(), b.pow(2).unwrap()]).unwrap();
        let s2 = e.sym_power(2).unwrap();
        assert_eq!(s2.rank(), 3);
        assert_eq!(s2.chern(1), a.scale(&rat(3)));
        let c1sq = a.pow(2).unwrap();
        let c2 = b.pow(2).unwrap();
        assert_eq!(
            s2.chern(2),
            c1sq.scale(&rat(2)).add(&c2.scale(&rat(4))).unwrap()
        );
        assert_eq!(s2.chern(3), a.mul(&c2).unwrap().scale(&rat(4)));
    }

    #[test]
    fn sym_power_small_cases() {
        let s = cp2();
        let t = tangent_cp2(&s);
        assert!(t.sym_power(0).unwrap().equals(&BundleClass::trivial(&s, 1)));
        assert!(t.sym_power(1).unwrap().equals(&t));
        assert_eq!(t.sym_power(7).unwrap().rank(), 8);
        let r3 = t.whitney(&BundleClass::trivial(&s, 1)).unwrap();
        assert_eq!(r3.sym_power(5).unwrap().rank(), 21); // C(7,2)
    }

    #[test]
    fn sym_power_guards() {
        let s = cp2();
        let t = tangent_cp2(&s);
        let r5 = t.whitney(&BundleClass::trivial(&s, 3)).unwrap();
        assert!(matches!(r5.sym_power(2), Err(Error::RankTooLarge { .. })));
        assert!(matches!(t.sym_power(65), Err(Error::RankTooLarge { .. })));
        let v = t.difference(&BundleClass::trivial(&s, 3)).unwrap();
        assert!(matches!(v.sym_power(2), Err(Error::VirtualInput { .. })));
    }

    #[test]
    fn chern_character_low_terms() {
        let s = cp2();
        let h = gen(&s, "h");
        let l = BundleClass::line(h.clone()).unwrap();
        // ch(O(1)) = 1 + h + h^2/2
        let ch = l.chern_character();
        assert_eq!(ch.degree_part(0).scalar_part(), rat(1));
        assert_eq!(ch.degree_part(2), h);
        assert_eq!(
            ch.degree_part(4),
            h.pow(2).unwrap().scale(&Rat::frac(1, 2).unwrap())
        );
        // rank-2: ch_2 = (c1^2 - 2c2)/2
        let t = tangent_cp2(&s);
        assert_eq!(
            t.chern_character().degree_part(4),
            h.pow(2).unwrap().scale(&Rat::frac(3, 2).unwrap())
        );
        // additivity
        let sum = t.whitney(&l).unwrap();
        assert_eq!(
            sum.chern_character(),
            t.chern_character().add(&l.chern_character()).unwrap()
        );
    }

    #[test]
    fn chern_character_of_twist_multiplies() {
        let s = cp2();
        let h = gen(&s, "h");
        let t = tangent_cp2(&s);
        let l = BundleClass::line(h.scale(&rat(-2))).unwrap();
        let lhs = t.tensor_line(&l).unwrap().chern_character();
        let rhs = t.chern_character().mul(&l.chern_character()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn todd_series_from_bernoulli() {
        // line bundle on a 4-dim scratch space:
        // Todd = 1 + t/2 + t^2/12 + 0 t^3 - t^4/720
        let s = line_space(4);
        let t = gen(&s, "t");
        let td = BundleClass::line(t.clone()).unwrap().todd();
        assert_eq!(td.degree_part(0).scalar_part(), rat(1));
        assert_eq!(td.degree_part(2), t.scale(&Rat::frac(1, 2).unwrap()));
        assert_eq!(
            td.degree_part(4),
            t.pow(2).unwrap().scale(&Rat::frac(1, 12).unwrap())
        );
        assert!(td.degree_part(6).is_zero());
        assert_eq!(
            td.degree_part(8),
            t.pow(4).unwrap().scale(&Rat::frac(-1, 720).unwrap())
        );
    }

    #[test]
    fn todd_rank_two_formula() {
        // degree-4 part of Todd is (c1^2 + c2)/12
        let s = cp2();
        let t = tangent_cp2(&s);
        let h2 = gen(&s, "h").pow(2).unwrap();
        assert_eq!(t.todd().degree_part(4), h2.scale(&rat(1))); // (9+3)/12
                                                                // multiplicativity
        let l = BundleClass::line(gen(&s, "h")).unwrap();
        assert_eq!(
            t.whitney(&l).unwrap().todd(),
            t.todd().mul(&l.todd()).unwrap()
        );
    }

    #[test]
    fn segre_inverts_chern() {
        let s = cp2();
        let t = tangent_cp2(&s);
        let prod = t.total_chern().mul(&t.total_segre()).unwrap();
        assert_eq!(prod, GradedClass::one(&s));
        // rank 2, c = 1 + c1 + c2: s1 = -c1, s2 = c1^2 - c2
        let h = gen(&s, "h");
        assert_eq!(t.segre(1), h.scale(&rat(-3)));
        assert_eq!(t.segre(2), h.pow(2).unwrap().scale(&rat(6))); // 9 - 3
    }

    #[test]
    fn half_line_halves() {
        let s = cp2();
        let h = gen(&s, "h");
        let hl = BundleClass::half_line(h.scale(&rat(6))).unwrap();
        assert_eq!(hl.chern(1), h.scale(&rat(3)));
        let zero = BundleClass::half_line(GradedClass::zero(&s)).unwrap();
        assert!(zero.equals(&BundleClass::trivial(&s, 1)));
        assert!(BundleClass::half_line(GradedClass::one(&s)).is_err());
    }

    #[test]
    fn honest_rank_enforcement() {
        let s = cp2();
        let h2 = gen(&s, "h").pow(2).unwrap();
        let err = BundleClass::from_chern(&s, 1, &[GradedClass::zero(&s), h2.clone()]);
        assert!(err.is_err());
        let ok = BundleClass::virtual_from_total(1, GradedClass::one(&s).add(&h2).unwrap());
        assert!(ok.is_ok());
    }
}
