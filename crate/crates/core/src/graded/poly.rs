use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::field::Field;

/// Maximum number of ring variables; exponents are packed into one `u64`.
pub const MAX_VARS: usize = 8;

/// Exponent vector packed 8 bits per variable.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(u64);

impl Monomial {
    pub const ONE: Monomial = Monomial(0);

    pub fn from_exponents(exps: &[u32]) -> Result<Self> {
        if exps.len() > MAX_VARS {
            return Err(Error::TooManyVariables { max: MAX_VARS, got: exps.len() });
        }
        let mut packed = 0u64;
        for (i, &e) in exps.iter().enumerate() {
            if e > 255 {
                return Err(Error::ExponentOverflow);
            }
            packed |= (e as u64) << (8 * i);
        }
        Ok(Monomial(packed))
    }

    pub fn var(i: usize) -> Self {
        Monomial(1 << (8 * i))
    }

    #[inline]
    pub fn exp(self, i: usize) -> u32 {
        ((self.0 >> (8 * i)) & 0xff) as u32
    }

    pub fn exponents(self, nvars: usize) -> Vec<u32> {
        (0..nvars).map(|i| self.exp(i)).collect()
    }

    /// Product; exponents must stay below 256 (guaranteed inside any window).
    #[inline]
    pub fn mul(self, other: Monomial) -> Monomial {
        debug_assert!((0..MAX_VARS).all(|i| self.exp(i) + other.exp(i) < 256), "exponent overflow");
        Monomial(self.0 + other.0)
    }

    pub fn divides(self, other: Monomial) -> bool {
        (0..MAX_VARS).all(|i| self.exp(i) <= other.exp(i))
    }

    pub fn weighted_degree(self, weights: &[u32]) -> u32 {
        weights.iter().enumerate().map(|(i, w)| w * self.exp(i)).sum()
    }
}

/// Degree-reverse-lexicographic comparison of two monomials with the same
/// weighted degree: the larger one has the smaller exponent in the last
/// variable where they differ.
pub fn revlex_cmp(a: Monomial, b: Monomial, nvars: usize) -> Ordering {
    for i in (0..nvars).rev() {
        match a.exp(i).cmp(&b.exp(i)) {
            Ordering::Equal => continue,
            Ordering::Less => return Ordering::Greater,
            Ordering::Greater => return Ordering::Less,
        }
    }
    Ordering::Equal
}

/// Sparse polynomial; terms sorted by packed monomial, no zero coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Poly<E> {
    terms: Vec<(Monomial, E)>,
}

impl<E: Clone> Poly<E> {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant<F: Field<Elem = E>>(field: &F, c: E) -> Self {
        Self::term(field, Monomial::ONE, c)
    }

    pub fn one<F: Field<Elem = E>>(field: &F) -> Self {
        Self::constant(field, field.one())
    }

    pub fn term<F: Field<Elem = E>>(field: &F, m: Monomial, c: E) -> Self {
        if field.is_zero(&c) {
            Self::zero()
        } else {
            Self { terms: alloc::vec![(m, c)] }
        }
    }

    pub fn monomial<F: Field<Elem = E>>(field: &F, m: Monomial) -> Self {
        Self::term(field, m, field.one())
    }

    pub fn var<F: Field<Elem = E>>(field: &F, i: usize) -> Self {
        Self::monomial(field, Monomial::var(i))
    }

    /// Build from arbitrary terms, combining duplicates and dropping zeros.
    pub fn from_terms<F: Field<Elem = E>>(field: &F, mut terms: Vec<(Monomial, E)>) -> Self {
        terms.sort_by_key(|t| t.0);
        let mut out: Vec<(Monomial, E)> = Vec::with_capacity(terms.len());
        for (m, c) in terms {
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = field.add(lc, &c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !field.is_zero(c));
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(Monomial, E)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff<F: Field<Elem = E>>(&self, field: &F, m: Monomial) -> E {
        match self.terms.binary_search_by_key(&m, |t| t.0) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => field.zero(),
        }
    }

    pub fn add<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        self.merge(field, other, |a, b| field.add(a, b), |b| b.clone())
    }

    pub fn sub<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        self.merge(field, other, |a, b| field.sub(a, b), |b| field.neg(b))
    }

    fn merge<F: Field<Elem = E>>(
        &self,
        field: &F,
        other: &Self,
        both: impl Fn(&E, &E) -> E,
        only_other: impl Fn(&E) -> E,
    ) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() || j < other.terms.len() {
            let ord = match (self.terms.get(i), other.terms.get(j)) {
                (Some(a), Some(b)) => a.0.cmp(&b.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let (m, c) = &other.terms[j];
                    out.push((*m, only_other(c)));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = both(&self.terms[i].1, &other.terms[j].1);
                    if !field.is_zero(&c) {
                        out.push((self.terms[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { terms: out }
    }

    pub fn neg<F: Field<Elem = E>>(&self, field: &F) -> Self {
        Self { terms: self.terms.iter().map(|(m, c)| (*m, field.neg(c))).collect() }
    }

    pub fn scale<F: Field<Elem = E>>(&self, field: &F, c: &E) -> Self {
        if field.is_zero(c) {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(m, a)| (*m, field.mul(a, c))).collect() }
    }

    pub fn mul_monomial(&self, m: Monomial) -> Self {
        // Multiplication by a monomial is injective and order preserving on packed keys.
        Self { terms: self.terms.iter().map(|(a, c)| (a.mul(m), c.clone())).collect() }
    }

    pub fn mul<F: Field<Elem = E>>(&self, field: &F, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                terms.push((a.mul(*b), field.mul(ca, cb)));
            }
        }
        Self::from_terms(field, terms)
    }

    pub fn pow<F: Field<Elem = E>>(&self, field: &F, e: u32) -> Self {
        let mut acc = Self::one(field);
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }

    /// Weighted degree if the polynomial is homogeneous and nonzero.
    pub fn homogeneous_degree(&self, weights: &[u32]) -> Option<u32> {
        let d = self.terms.first()?.0.weighted_degree(weights);
        self.terms.iter().all(|(m, _)| m.weighted_degree(weights) == d).then_some(d)
    }

    /// Whether the polynomial is zero or homogeneous of degree `d`.
    pub fn is_homogeneous_of(&self, weights: &[u32], d: i32) -> bool {
        self.terms.iter().all(|(m, _)| m.weighted_degree(weights) as i32 == d)
    }
}

/// Standard-graded (or positively weighted) polynomial ring `k[x_1..x_m]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyRing<F: Field> {
    field: F,
    names: Vec<String>,
    weights: Vec<u32>,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F, names: &[&str]) -> Result<Self> {
        let weights = alloc::vec![1; names.len()];
        Self::with_weights(field, names.iter().map(|s| s.to_string()).collect(), weights)
    }

    pub fn with_weights(field: F, names: Vec<String>, weights: Vec<u32>) -> Result<Self> {
        if names.len() > MAX_VARS {
            return Err(Error::TooManyVariables { max: MAX_VARS, got: names.len() });
        }
        if names.len() != weights.len() {
            return Err(Error::Invalid("one degree per variable is required".into()));
        }
        if weights.iter().any(|&w| w == 0) {
            return Err(Error::Invalid("variable degrees must be positive".into()));
        }
        Ok(Self { field, names, weights })
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn weights(&self) -> &[u32] {
        &self.weights
    }

    pub fn var(&self, i: usize) -> Poly<F::Elem> {
        Poly::var(&self.field, i)
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn degree(&self, m: Monomial) -> u32 {
        m.weighted_degree(&self.weights)
    }

    /// All monomials of weighted degree `d`, degrevlex descending.
    pub fn monomials(&self, d: i32) -> Vec<Monomial> {
        let mut out = Vec::new();
        if d < 0 {
            return out;
        }
        let n = self.nvars();
        let mut exps = alloc::vec![0u32; n];
        self.enumerate(0, d as u32, &mut exps, &mut out);
        out.sort_by(|a, b| revlex_cmp(*b, *a, n));
        out
    }

    fn enumerate(&self, i: usize, rest: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        let n = self.nvars();
        if i == n {
            if rest == 0 {
                out.push(Monomial::from_exponents(exps).expect("exponents bounded by degree"));
            }
            return;
        }
        let w = self.weights[i];
        let mut e = 0;
        while e * w <= rest {
            exps[i] = e;
            self.enumerate(i + 1, rest - e * w, exps, out);
            e += 1;
        }
        exps[i] = 0;
    }

    pub fn render_monomial(&self, m: Monomial) -> String {
        let mut parts = Vec::new();
        for (i, name) in self.names.iter().enumerate() {
            match m.exp(i) {
                0 => {}
                1 => parts.push(name.clone()),
                e => parts.push(alloc::format!("{}^{}", name, e)),
            }
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join("*")
        }
    }

    /// Render with terms in descending degrevlex order, e.g. `x^2+x*y`.
    pub fn render(&self, p: &Poly<F::Elem>) -> String {
        if p.is_zero() {
            return "0".into();
        }
        let n = self.nvars();
        let mut terms: Vec<&(Monomial, F::Elem)> = p.terms().iter().collect();
        terms.sort_by(|a, b| {
            self.degree(b.0).cmp(&self.degree(a.0)).then_with(|| revlex_cmp(b.0, a.0, n))
        });
        let mut s = String::new();
        for (k, (m, c)) in terms.into_iter().enumerate() {
            let coeff = self.field.render(c);
            let (neg, mag) = match coeff.strip_prefix('-') {
                Some(rest) => (true, rest.to_string()),
                None => (false, coeff),
            };
            if neg {
                s.push('-');
            } else if k > 0 {
                s.push('+');
            }
            let mono = *m == Monomial::ONE;
            if mono {
                s.push_str(&mag);
            } else {
                if mag != "1" {
                    s.push_str(&mag);
                    s.push('*');
                }
                s.push_str(&self.render_monomial(*m));
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::PrimeField;
    use alloc::vec;

    #[test]
    fn monomials_in_degrevlex_order() {
        let r = PolyRing::new(PrimeField::default(), &["x", "y", "z"]).unwrap();
        let ms: Vec<String> = r.monomials(2).into_iter().map(|m| r.render_monomial(m)).collect();
        assert_eq!(ms, ["x^2", "x*y", "y^2", "x*z", "y*z", "z^2"]);
        assert_eq!(r.monomials(0), vec![Monomial::ONE]);
        assert!(r.monomials(-1).is_empty());
    }

    #[test]
    fn weighted_monomials() {
        let f = PrimeField::default();
        let r = PolyRing::with_weights(f, vec!["x".into(), "y".into()], vec![1, 2]).unwrap();
        let ms: Vec<String> = r.monomials(3).into_iter().map(|m| r.render_monomial(m)).collect();
        assert_eq!(ms, ["x^3", "x*y"]);
    }

    #[test]
    fn arithmetic_and_rendering() {
        let f = PrimeField::default();
        let r = PolyRing::new(f, &["x", "y"]).unwrap();
        let (x, y) = (r.var(0), r.var(1));
        let p = x.mul(&f, &x).add(&f, &x.mul(&f, &y));
        assert_eq!(r.render(&p), "x^2+x*y");
        assert_eq!(r.render(&y.neg(&f)), "-y");
        assert_eq!(p.homogeneous_degree(r.weights()), Some(2));
        assert!(p.sub(&f, &p).is_zero());
        assert_eq!(x.add(&f, &Poly::one(&f)).homogeneous_degree(r.weights()), None);
    }
}
