//! Distributed polynomials: a sorted list of `(coefficient, exponent)` terms.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::coeff::Coeff;
use crate::error::{Error, Result};
use crate::exponent::{Exponent, Layout, MAX_VARS};

/// Ordered, unique variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarTable {
    names: Vec<String>,
}

impl VarTable {
    pub fn new<I, S>(names: I) -> Result<VarTable>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() || names.len() > MAX_VARS {
            return Err(Error::InvalidVars(format!(
                "{} variables, expected 1..={MAX_VARS}",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() {
                return Err(Error::InvalidVars("empty variable name".into()));
            }
            if names[..i].contains(n) {
                return Err(Error::InvalidVars(format!("duplicate variable `{n}`")));
            }
        }
        Ok(VarTable { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

/// Variables plus the exponent layout shared by every polynomial built in it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolySpace {
    vars: VarTable,
    layout: Layout,
}

impl PolySpace {
    pub fn new(vars: VarTable, layout: Layout) -> Result<Arc<PolySpace>> {
        if vars.len() != layout.nvars() {
            return Err(Error::InvalidLayout(format!(
                "layout has {} fields for {} variables",
                layout.nvars(),
                vars.len()
            )));
        }
        Ok(Arc::new(PolySpace { vars, layout }))
    }

    pub fn vars(&self) -> &VarTable {
        &self.vars
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    /// Packs an exponent vector, naming the offending variable on overflow.
    pub fn pack(&self, v: &[u32]) -> Result<Exponent> {
        self.layout.pack(v).map_err(|e| self.rename(e))
    }

    pub(crate) fn rename(&self, e: Error) -> Error {
        match e {
            Error::ExponentOverflow { field, limit } => {
                let field = match field.strip_prefix("variable ").map(str::parse::<usize>) {
                    Some(Ok(i)) if i < self.vars.len() => {
                        format!("exponent of `{}`", self.vars.names[i])
                    }
                    _ => field,
                };
                Error::ExponentOverflow { field, limit }
            }
            other => other,
        }
    }

    pub(crate) fn ensure_same(self: &Arc<Self>, other: &Arc<PolySpace>) -> Result<()> {
        if Arc::ptr_eq(self, other) || **self == **other {
            return Ok(());
        }
        if self.vars != other.vars {
            return Err(Error::SpaceMismatch(format!(
                "variables [{}] vs [{}]",
                self.vars.names.join(", "),
                other.vars.names.join(", ")
            )));
        }
        Err(Error::SpaceMismatch("exponent layouts differ".into()))
    }
}

/// A polynomial in canonical form: exponents strictly ascending, no zero
/// coefficients.
#[derive(Clone)]
pub struct Polynomial<C> {
    space: Arc<PolySpace>,
    exps: Vec<Exponent>,
    coeffs: Vec<C>,
}

impl<C: Coeff> PartialEq for Polynomial<C> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || self.space == other.space)
            && self.exps == other.exps
            && self.coeffs == other.coeffs
    }
}

impl<C: Coeff> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{}]({})", self.len(), self)
    }
}

impl<C: Coeff> fmt::Display for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let layout = self.space.layout();
        for (k, (c, e)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for (i, name) in self.space.vars().names().iter().enumerate() {
                match layout.component(e, i) {
                    0 => {}
                    1 => write!(f, "*{name}")?,
                    d => write!(f, "*{name}^{d}")?,
                }
            }
        }
        Ok(())
    }
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(space: &Arc<PolySpace>) -> Self {
        Polynomial {
            space: space.clone(),
            exps: Vec::new(),
            coeffs: Vec::new(),
        }
    }

    pub fn constant(space: &Arc<PolySpace>, c: C) -> Self {
        let mut p = Self::zero(space);
        if !c.is_zero() {
            p.exps.push(Exponent::ZERO);
            p.coeffs.push(c);
        }
        p
    }

    pub fn variable(space: &Arc<PolySpace>, index: usize) -> Result<Self> {
        let mut v = vec![0; space.nvars()];
        *v.get_mut(index)
            .ok_or_else(|| Error::InvalidVars(format!("no variable with index {index}")))? = 1;
        Ok(Polynomial {
            space: space.clone(),
            exps: vec![space.pack(&v)?],
            coeffs: vec![C::one()],
        })
    }

    /// Builds a polynomial from unpacked terms in any order.
    pub fn from_terms<I>(space: &Arc<PolySpace>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, Vec<u32>)>,
    {
        let packed = terms
            .into_iter()
            .map(|(c, v)| Ok((c, space.pack(&v)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(canonicalize(space, packed))
    }

    /// Wraps parts that are already canonical. Only checked in debug builds.
    pub(crate) fn from_canonical_parts(
        space: Arc<PolySpace>,
        exps: Vec<Exponent>,
        coeffs: Vec<C>,
    ) -> Self {
        debug_assert_eq!(exps.len(), coeffs.len());
        debug_assert!(exps.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(coeffs.iter().all(|c| !c.is_zero()));
        Polynomial {
            space,
            exps,
            coeffs,
        }
    }

    pub fn space(&self) -> &Arc<PolySpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Exponent] {
        &self.exps
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    pub fn terms(&self) -> impl Iterator<Item = (&C, Exponent)> + '_ {
        self.coeffs.iter().zip(self.exps.iter().copied())
    }

    pub fn into_terms(self) -> Vec<(C, Exponent)> {
        self.coeffs.into_iter().zip(self.exps).collect()
    }

    /// Coefficient of the given exponent vector, zero if absent.
    pub fn coeff_of(&self, v: &[u32]) -> Result<C> {
        let e = self.space.pack(v)?;
        Ok(match self.exps.binary_search(&e) {
            Ok(k) => self.coeffs[k].clone(),
            Err(_) => C::zero(),
        })
    }

    /// Largest value of every component over all terms, and the largest
    /// total degree.
    pub fn degree_bounds(&self) -> (Vec<u32>, u64) {
        let layout = self.space.layout();
        let mut per_var = vec![0u32; layout.nvars()];
        let mut total = 0u64;
        for &e in &self.exps {
            for (i, m) in per_var.iter_mut().enumerate() {
                *m = (*m).max(layout.component(e, i));
            }
            total = total.max(layout.degree(e));
        }
        (per_var, total)
    }

    /// Fails unless every exponent sum `alpha_i + beta_j` of `self * other`
    /// fits the layout.
    pub fn check_product_fits(&self, other: &Self) -> Result<()> {
        self.space.ensure_same(&other.space)?;
        if self.is_zero() || other.is_zero() {
            return Ok(());
        }
        let (a_max, a_deg) = self.degree_bounds();
        let (b_max, b_deg) = other.degree_bounds();
        self.space
            .layout()
            .check_sum_bounds(&a_max, a_deg, &b_max, b_deg)
            .map_err(|e| self.space.rename(e))
    }

    pub fn neg(&self) -> Self {
        Polynomial {
            space: self.space.clone(),
            exps: self.exps.clone(),
            coeffs: self.coeffs.iter().map(C::neg).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.space.ensure_same(&other.space)?;
        let mut exps = Vec::with_capacity(self.len() + other.len());
        let mut coeffs = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.len() && j < other.len() {
            let (ea, eb) = (self.exps[i], other.exps[j]);
            if ea < eb {
                exps.push(ea);
                coeffs.push(self.coeffs[i].clone());
                i += 1;
            } else if eb < ea {
                exps.push(eb);
                coeffs.push(other.coeffs[j].clone());
                j += 1;
            } else {
                let mut c = self.coeffs[i].clone();
                c.add_assign(&other.coeffs[j]);
                if !c.is_zero() {
                    exps.push(ea);
                    coeffs.push(c);
                }
                i += 1;
                j += 1;
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        coeffs.extend_from_slice(&self.coeffs[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        coeffs.extend_from_slice(&other.coeffs[j..]);
        Ok(Polynomial::from_canonical_parts(
            self.space.clone(),
            exps,
            coeffs,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }
}

/// Sorts terms, combines equal exponents and drops zero coefficients.
pub fn canonicalize<C: Coeff>(
    space: &Arc<PolySpace>,
    mut terms: Vec<(C, Exponent)>,
) -> Polynomial<C> {
    terms.sort_by_key(|t| t.1);
    let mut exps: Vec<Exponent> = Vec::with_capacity(terms.len());
    let mut coeffs: Vec<C> = Vec::with_capacity(terms.len());
    for (c, e) in terms {
        if exps.last() == Some(&e) {
            coeffs.last_mut().unwrap().add_assign(&c);
        } else {
            if coeffs.last().is_some_and(C::is_zero) {
                coeffs.pop();
                exps.pop();
            }
            exps.push(e);
            coeffs.push(c);
        }
    }
    if coeffs.last().is_some_and(C::is_zero) {
        coeffs.pop();
        exps.pop();
    }
    Polynomial::from_canonical_parts(space.clone(), exps, coeffs)
}

/// Schoolbook product: every pairwise term product accumulated in a hash
/// map, then sorted. Serves as the reference for the fast paths.
pub fn naive_mul<C: Coeff>(a: &Polynomial<C>, b: &Polynomial<C>) -> Result<Polynomial<C>> {
    a.space.ensure_same(&b.space)?;
    let layout = a.space.layout();
    let mut acc: HashMap<Exponent, C> = HashMap::with_capacity(a.len().max(b.len()));
    for (ca, ea) in a.terms() {
        for (cb, eb) in b.terms() {
            let e = layout.add(ea, eb).map_err(|e| a.space.rename(e))?;
            acc.entry(e).or_insert_with(C::zero).add_mul_assign(ca, cb);
        }
    }
    Ok(canonicalize(
        &a.space,
        acc.into_iter().map(|(e, c)| (c, e)).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponent::MonomialOrder;
    use num_bigint::BigInt;
    use proptest::prelude::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type P = Polynomial<BigInt>;

    fn space(names: &[&str], bits: u32) -> Arc<PolySpace> {
        let vars = VarTable::new(names.iter().copied()).unwrap();
        let layout = Layout::new(MonomialOrder::Grlex, &vec![bits; names.len()], 2 * bits).unwrap();
        PolySpace::new(vars, layout).unwrap()
    }

    fn poly(s: &Arc<PolySpace>, terms: &[(i64, &[u32])]) -> P {
        P::from_terms(s, terms.iter().map(|(c, v)| (BigInt::from(*c), v.to_vec()))).unwrap()
    }

    fn linear_sum(s: &Arc<PolySpace>) -> P {
        let mut terms = vec![(1i64, vec![0u32; s.nvars()])];
        for i in 0..s.nvars() {
            let mut v = vec![0; s.nvars()];
            v[i] = 1;
            terms.push((1, v));
        }
        P::from_terms(s, terms.into_iter().map(|(c, v)| (BigInt::from(c), v))).unwrap()
    }

    fn power(p: &P, n: u32) -> P {
        let mut acc = P::constant(p.space(), BigInt::from(1));
        for _ in 0..n {
            acc = naive_mul(&acc, p).unwrap();
        }
        acc
    }

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn var_table_validation() {
        assert!(VarTable::new(["x", "y"]).is_ok());
        assert!(VarTable::new(["x", "x"]).is_err());
        assert!(VarTable::new(Vec::<String>::new()).is_err());
        assert!(VarTable::new([""]).is_err());
        assert!(VarTable::new((0..15).map(|i| format!("v{i}"))).is_err());
    }

    #[test]
    fn canonicalize_merges_and_drops() {
        let s = space(&["x"], 8);
        let x = s.pack(&[1]).unwrap();
        let one = BigInt::from(1);
        let p = canonicalize(&s, vec![(one.clone(), x), (BigInt::from(2), x)]);
        assert_eq!(p.coeffs(), &[BigInt::from(3)]);
        let p = canonicalize(&s, vec![(one.clone(), x), (BigInt::from(-1), x)]);
        assert!(p.is_zero());
        // a cancelled run in the middle must not survive either
        let x2 = s.pack(&[2]).unwrap();
        let p = canonicalize(
            &s,
            vec![
                (one.clone(), x2),
                (one.clone(), x),
                (BigInt::from(-1), x),
                (one, Exponent::ZERO),
            ],
        );
        assert_eq!(p.exponents(), &[Exponent::ZERO, x2]);
    }

    #[test]
    fn canonicalize_is_shuffle_invariant() {
        let s = space(&["x", "y", "z"], 6);
        let p = power(&linear_sum(&s), 4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let mut terms = p.clone().into_terms();
            terms.shuffle(&mut rng);
            assert_eq!(canonicalize(&s, terms), p);
        }
    }

    #[test]
    fn naive_mul_examples() {
        let s = space(&["x", "y"], 8);
        let a = poly(&s, &[(1, &[0, 0]), (1, &[1, 0])]);
        let b = poly(&s, &[(1, &[0, 0]), (-1, &[1, 0])]);
        assert_eq!(
            naive_mul(&a, &b).unwrap(),
            poly(&s, &[(1, &[0, 0]), (-1, &[2, 0])])
        );

        let xy = poly(&s, &[(1, &[1, 0]), (1, &[0, 1])]);
        assert_eq!(
            naive_mul(&xy, &xy).unwrap(),
            poly(&s, &[(1, &[2, 0]), (2, &[1, 1]), (1, &[0, 2])])
        );
    }

    #[test]
    fn dense_square_term_count() {
        let s = space(&["x", "y", "z", "t"], 6);
        let f = power(&linear_sum(&s), 8);
        assert_eq!(f.len(), 495);
        let sq = naive_mul(&f, &f).unwrap();
        // stars and bars: monomials of degree <= 16 in 4 variables
        assert_eq!(sq.len() as u64, binom(20, 4));
        assert_eq!(sq.len(), 4845);
        // brute force count of the support
        let mut count = 0;
        for a in 0..=16u32 {
            for b in 0..=16 - a {
                for c in 0..=16 - a - b {
                    for _d in 0..=16 - a - b - c {
                        count += 1;
                    }
                }
            }
        }
        assert_eq!(count, 4845);
    }

    #[test]
    fn power_term_counts_are_binomial() {
        for k in 1..=4usize {
            let names: Vec<String> = (0..k).map(|i| format!("x{i}")).collect();
            let s = PolySpace::new(
                VarTable::new(names).unwrap(),
                Layout::even(MonomialOrder::Grlex, k).unwrap(),
            )
            .unwrap();
            let base = linear_sum(&s);
            let mut acc = P::constant(&s, BigInt::from(1));
            for n in 0..=10u64 {
                assert_eq!(
                    acc.len() as u64,
                    binom(n + k as u64, k as u64),
                    "k={k} n={n}"
                );
                acc = naive_mul(&acc, &base).unwrap();
            }
        }
    }

    #[test]
    fn overflow_is_reported_with_the_variable_name() {
        let s = space(&["x", "y"], 3);
        let a = poly(&s, &[(1, &[0, 5])]);
        let err = naive_mul(&a, &a).unwrap_err();
        assert!(err.to_string().contains("`y`"), "{err}");
        assert!(a.check_product_fits(&a).is_err());
        let b = poly(&s, &[(1, &[0, 2])]);
        assert!(a.check_product_fits(&b).is_ok());
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let s1 = space(&["x", "y"], 8);
        let s2 = space(&["x", "z"], 8);
        let a = poly(&s1, &[(1, &[1, 0])]);
        let b = poly(&s2, &[(1, &[1, 0])]);
        assert!(matches!(naive_mul(&a, &b), Err(Error::SpaceMismatch(_))));
        // equal content in distinct allocations is the same space
        let s3 = space(&["x", "y"], 8);
        let c = poly(&s3, &[(1, &[0, 1])]);
        assert!(naive_mul(&a, &c).is_ok());
    }

    #[test]
    fn display_and_lookup() {
        let s = space(&["x", "y"], 8);
        let p = poly(&s, &[(3, &[2, 1]), (-1, &[0, 0])]);
        assert_eq!(p.to_string(), "-1 + 3*x^2*y");
        assert_eq!(p.coeff_of(&[2, 1]).unwrap(), BigInt::from(3));
        assert_eq!(p.coeff_of(&[1, 1]).unwrap(), BigInt::from(0));
    }

    fn small_poly() -> impl Strategy<Value = Vec<(i64, Vec<u32>)>> {
        prop::collection::vec((-5i64..=5, prop::collection::vec(0u32..4, 3)), 0..12)
    }

    proptest! {
        #[test]
        fn naive_mul_commutes_and_distributes(a in small_poly(), b in small_poly(), c in small_poly()) {
            let s = space(&["x", "y", "z"], 6);
            let build = |t: &Vec<(i64, Vec<u32>)>| {
                P::from_terms(&s, t.iter().map(|(c, v)| (BigInt::from(*c), v.clone()))).unwrap()
            };
            let (a, b, c) = (build(&a), build(&b), build(&c));
            prop_assert_eq!(naive_mul(&a, &b).unwrap(), naive_mul(&b, &a).unwrap());
            let lhs = naive_mul(&a, &b.add(&c).unwrap()).unwrap();
            let rhs = naive_mul(&a, &b).unwrap().add(&naive_mul(&a, &c).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn canonical_form_invariants(a in small_poly()) {
            let s = space(&["x", "y", "z"], 6);
            let p = P::from_terms(&s, a.into_iter().map(|(c, v)| (BigInt::from(c), v))).unwrap();
            prop_assert!(p.exponents().windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.coeffs().iter().all(|c| !Coeff::is_zero(c)));
        }
    }
}
