//! Truncated multivariate power series in `(z, w_1, ..., w_n)` with complex
//! coefficients.
//!
//! A [`Series`] stores only nonzero coefficients, keyed by [`MultiIndex`] in
//! graded lexicographic order, and drops everything of total degree above its
//! `order_cap`. Coefficients smaller than [`PRUNE_REL`] times the largest
//! stored modulus are discarded after every operation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Relative prune threshold applied after every arithmetic operation.
pub const PRUNE_REL: f64 = 1e-14;

/// Exponent vector of a monomial `z^z * w_1^w[0] * ... * w_n^w[n-1]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    pub z: u32,
    pub w: Vec<u32>,
}

impl MultiIndex {
    pub fn new(z: u32, w: Vec<u32>) -> Self {
        Self { z, w }
    }

    pub fn constant(n: usize) -> Self {
        Self { z: 0, w: vec![0; n] }
    }

    pub fn z_pow(n: usize, e: u32) -> Self {
        Self { z: e, w: vec![0; n] }
    }

    /// The single variable `w_j` (zero-based `j`).
    pub fn w_unit(n: usize, j: usize) -> Self {
        let mut w = vec![0; n];
        w[j] = 1;
        Self { z: 0, w }
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn w_degree(&self) -> u32 {
        self.w.iter().sum()
    }

    pub fn degree(&self) -> u32 {
        self.z + self.w_degree()
    }

    pub fn is_pure_z(&self) -> bool {
        self.w.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &MultiIndex) -> MultiIndex {
        debug_assert_eq!(self.n(), other.n());
        MultiIndex { z: self.z + other.z, w: self.w.iter().zip(&other.w).map(|(a, b)| a + b).collect() }
    }

    /// Exponent of variable `v`, where `v = 0` is `z` and `v = j + 1` is `w_j`.
    pub fn exponent(&self, v: usize) -> u32 {
        if v == 0 {
            self.z
        } else {
            self.w[v - 1]
        }
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.z.cmp(&other.z)).then_with(|| self.w.cmp(&other.w))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.z > 0 {
            parts.push(if self.z == 1 { "z".to_string() } else { format!("z^{}", self.z) });
        }
        for (j, &e) in self.w.iter().enumerate() {
            if e == 1 {
                parts.push(format!("w{}", j + 1));
            } else if e > 1 {
                parts.push(format!("w{}^{}", j + 1, e));
            }
        }
        if parts.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{}", parts.join("*"))
        }
    }
}

/// A power series truncated at total degree `order_cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    n: usize,
    order_cap: u32,
    terms: BTreeMap<MultiIndex, C64>,
}

impl Series {
    pub fn zero(n: usize, order_cap: u32) -> Self {
        Self { n, order_cap, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, order_cap: u32, c: C64) -> Self {
        Self::monomial(n, order_cap, MultiIndex::constant(n), c)
    }

    pub fn one(n: usize, order_cap: u32) -> Self {
        Self::constant(n, order_cap, C64::new(1.0, 0.0))
    }

    pub fn monomial(n: usize, order_cap: u32, idx: MultiIndex, c: C64) -> Self {
        let mut s = Self::zero(n, order_cap);
        s.add_term(idx, c);
        s.prune();
        s
    }

    /// The coordinate function of variable `v` (0 = z, j + 1 = w_j).
    pub fn variable(n: usize, order_cap: u32, v: usize) -> Self {
        let idx = if v == 0 { MultiIndex::z_pow(n, 1) } else { MultiIndex::w_unit(n, v - 1) };
        Self::monomial(n, order_cap, idx, C64::new(1.0, 0.0))
    }

    pub fn from_terms<I>(n: usize, order_cap: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, C64)>,
    {
        let mut s = Self::zero(n, order_cap);
        for (idx, c) in terms {
            s.add_term(idx, c);
        }
        s.prune();
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order_cap(&self) -> u32 {
        self.order_cap
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &C64)> {
        self.terms.iter()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> C64 {
        self.terms.get(idx).copied().unwrap_or_default()
    }

    /// Largest coefficient modulus, 0 for the zero series.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Accumulates `c` onto the coefficient of `idx`; ignored beyond `order_cap`.
    /// Does not prune; callers that build incrementally prune once at the end.
    pub fn add_term(&mut self, idx: MultiIndex, c: C64) {
        assert_eq!(idx.n(), self.n, "multi-index arity does not match series");
        if idx.degree() > self.order_cap {
            return;
        }
        *self.terms.entry(idx).or_default() += c;
    }

    pub fn set_coeff(&mut self, idx: MultiIndex, c: C64) {
        if idx.degree() > self.order_cap {
            return;
        }
        if c == C64::default() {
            self.terms.remove(&idx);
        } else {
            self.terms.insert(idx, c);
        }
    }

    pub fn remove(&mut self, idx: &MultiIndex) -> Option<C64> {
        self.terms.remove(idx)
    }

    fn prune(&mut self) {
        let threshold = self.max_abs() * PRUNE_REL;
        self.terms.retain(|_, c| c.norm() > threshold);
    }

    fn check_shape(&self, other: &Series) -> Result<()> {
        if self.n != other.n || self.order_cap != other.order_cap {
            return Err(Error::Shape(format!(
                "(n={}, order_cap={}) vs (n={}, order_cap={})",
                self.n, self.order_cap, other.n, other.order_cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Series) -> Result<Series> {
        self.check_shape(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            *out.terms.entry(idx.clone()).or_default() += c;
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &Series) -> Result<Series> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: C64) -> Series {
        let mut out = Series::zero(self.n, self.order_cap);
        for (idx, v) in &self.terms {
            out.terms.insert(idx.clone(), v * c);
        }
        out.prune();
        out
    }

    pub fn mul(&self, other: &Series) -> Result<Series> {
        self.check_shape(other)?;
        let mut out = Series::zero(self.n, self.order_cap);
        for (ia, ca) in &self.terms {
            let room = self.order_cap - ia.degree();
            for (ib, cb) in &other.terms {
                // terms are sorted by degree, so nothing further fits
                if ib.degree() > room {
                    break;
                }
                *out.terms.entry(ia.mul(ib)).or_default() += ca * cb;
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Series> {
        let mut acc = Series::one(self.n, self.order_cap);
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Multiplies every term by `z^e`, truncating at `order_cap`.
    pub fn shift_z(&self, e: u32) -> Series {
        let mut out = Series::zero(self.n, self.order_cap);
        for (idx, c) in &self.terms {
            out.add_term(MultiIndex::new(idx.z + e, idx.w.clone()), *c);
        }
        out
    }

    /// Sub-series of total degree exactly `d`.
    pub fn homogeneous(&self, d: u32) -> Series {
        let mut out = Series::zero(self.n, self.order_cap);
        for (idx, c) in self.terms.iter().filter(|(i, _)| i.degree() == d) {
            out.terms.insert(idx.clone(), *c);
        }
        out
    }

    /// Sub-series of total degree at most `d`.
    pub fn truncated(&self, d: u32) -> Series {
        let mut out = Series::zero(self.n, self.order_cap);
        for (idx, c) in self.terms.iter().filter(|(i, _)| i.degree() <= d) {
            out.terms.insert(idx.clone(), *c);
        }
        out
    }

    /// Same coefficients under a different truncation degree.
    pub fn with_order_cap(&self, order_cap: u32) -> Series {
        let mut out = Series::zero(self.n, order_cap);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), *c);
        }
        out
    }

    /// Monomial-sum evaluation at `p = (z, w_1, ..., w_n)` in canonical term order.
    pub fn eval(&self, p: &[C64]) -> C64 {
        debug_assert_eq!(p.len(), self.n + 1);
        let mut acc = C64::default();
        for (idx, c) in &self.terms {
            let mut m = *c;
            if idx.z > 0 {
                m *= p[0].powu(idx.z);
            }
            for (j, &e) in idx.w.iter().enumerate() {
                if e > 0 {
                    m *= p[j + 1].powu(e);
                }
            }
            acc += m;
        }
        acc
    }

    /// Formal composition `self(z -> repl[0], w_j -> repl[j + 1])`, truncated.
    ///
    /// Every replacement must vanish at the origin so that truncation is exact.
    pub fn substitute(&self, repl: &[Series]) -> Result<Series> {
        if repl.len() != self.n + 1 {
            return Err(Error::Shape(format!("substitute needs {} replacements, got {}", self.n + 1, repl.len())));
        }
        let target_n = repl[0].n;
        let cap = repl[0].order_cap;
        for (v, r) in repl.iter().enumerate() {
            if r.n != target_n || r.order_cap != cap {
                return Err(Error::Shape(format!("replacement {v} has a different shape")));
            }
            if r.terms.keys().any(|i| i.degree() == 0) {
                return Err(Error::NonzeroConstant { index: v });
            }
        }

        let mut powers: Vec<Vec<Series>> = repl.iter().map(|_| vec![Series::one(target_n, cap)]).collect();
        let mut out = Series::zero(target_n, cap);
        for (idx, c) in &self.terms {
            // each replacement has order >= 1, so the image has degree >= idx.degree()
            if idx.degree() > cap {
                continue;
            }
            let mut term = Series::constant(target_n, cap, *c);
            for (v, table) in powers.iter_mut().enumerate() {
                let e = idx.exponent(v) as usize;
                while table.len() <= e {
                    let next = table.last().expect("table starts with 1").mul(&repl[v])?;
                    table.push(next);
                }
                if e > 0 {
                    term = term.mul(&table[e])?;
                }
            }
            for (i, tc) in term.terms {
                *out.terms.entry(i).or_default() += tc;
            }
        }
        out.prune();
        Ok(out)
    }

    /// Multiplicative inverse of a series with a nonzero constant term.
    pub fn inverse(&self) -> Result<Series> {
        let c0 = self.coeff(&MultiIndex::constant(self.n));
        if c0 == C64::default() {
            return Err(Error::Precondition("series has no constant term to invert".into()));
        }
        // 1/(c0 (1 + p)) = (1/c0) * sum (-p)^i
        let mut p = self.scale(c0.inv());
        p.remove(&MultiIndex::constant(self.n));
        let neg_p = p.scale(C64::new(-1.0, 0.0));
        let mut acc = Series::one(self.n, self.order_cap);
        let mut power = Series::one(self.n, self.order_cap);
        for _ in 0..self.order_cap {
            power = power.mul(&neg_p)?;
            if power.is_empty() {
                break;
            }
            acc = acc.add(&power)?;
        }
        Ok(acc.scale(c0.inv()))
    }

    /// Coefficientwise maximum modulus of `self - other` over degrees `<= d`.
    pub fn max_diff_upto(&self, other: &Series, d: u32) -> Result<f64> {
        self.check_shape(other)?;
        let mut worst: f64 = 0.0;
        for idx in self.terms.keys().chain(other.terms.keys()) {
            if idx.degree() <= d {
                worst = worst.max((self.coeff(idx) - other.coeff(idx)).norm());
            }
        }
        Ok(worst)
    }
}

impl fmt::Display for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(i, c)| format!("({}{:+}i)*{}", c.re, c.im, i)).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn z(n: usize, cap: u32) -> Series {
        Series::variable(n, cap, 0)
    }

    fn w(n: usize, cap: u32, j: usize) -> Series {
        Series::variable(n, cap, j + 1)
    }

    #[test]
    fn add_examples() {
        let one = Series::one(2, 4);
        let a = one.add(&z(2, 4)).unwrap();
        let b = one.scale(c(-1.0)).add(&z(2, 4)).unwrap();
        assert_eq!(a.add(&b).unwrap(), z(2, 4).scale(c(2.0)));

        assert_eq!(a.add(&Series::zero(2, 4)).unwrap(), a);

        let zw = z(2, 4).mul(&w(2, 4, 0)).unwrap();
        let two = zw.add(&zw).unwrap();
        assert_eq!(two.coeff(&MultiIndex::new(1, vec![1, 0])), c(2.0));
        assert_eq!(two.len(), 1);
    }

    #[test]
    fn mul_examples() {
        let one = Series::one(1, 4);
        let p = one.add(&z(1, 4)).unwrap();
        let m = one.sub(&z(1, 4)).unwrap();
        let expect = one.sub(&z(1, 4).pow(2).unwrap()).unwrap();
        assert_eq!(p.mul(&m).unwrap(), expect);

        let z1 = z(1, 2);
        assert!(z1.mul(&z1.pow(2).unwrap()).unwrap().is_empty());

        let prod = w(2, 3, 0).mul(&w(2, 3, 1)).unwrap();
        assert_eq!(prod.coeff(&MultiIndex::new(0, vec![1, 1])), c(1.0));
        assert_eq!(prod.len(), 1);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        assert!(matches!(z(1, 3).add(&z(2, 3)), Err(Error::Shape(_))));
        assert!(matches!(z(1, 3).mul(&z(1, 4)), Err(Error::Shape(_))));
    }

    #[test]
    fn substitute_examples() {
        let n = 2;
        let cap = 5;
        let target = w(n, cap, 0).mul(&w(n, cap, 1)).unwrap();
        let repl = vec![z(n, cap), z(n, cap).mul(&w(n, cap, 0)).unwrap(), w(n, cap, 1)];
        let out = target.substitute(&repl).unwrap();
        assert_eq!(out, Series::monomial(n, cap, MultiIndex::new(1, vec![1, 1]), c(1.0)));

        let ident: Vec<Series> = (0..=n).map(|v| Series::variable(n, cap, v)).collect();
        let s = Series::from_terms(
            n,
            cap,
            [(MultiIndex::new(2, vec![0, 1]), C64::new(0.3, -1.0)), (MultiIndex::new(0, vec![3, 0]), c(2.0))],
        );
        assert_eq!(s.substitute(&ident).unwrap(), s);

        let lam = C64::from_polar(1.0, 1.1);
        let h = C64::new(0.25, 0.5);
        let lin = w(n, cap, 0).scale(lam);
        let repl = vec![z(n, cap), w(n, cap, 0).add(&w(n, cap, 0).pow(2).unwrap().scale(h)).unwrap(), w(n, cap, 1)];
        let out = lin.substitute(&repl).unwrap();
        assert!((out.coeff(&MultiIndex::w_unit(n, 0)) - lam).norm() < 1e-15);
        assert!((out.coeff(&MultiIndex::new(0, vec![2, 0])) - lam * h).norm() < 1e-15);
    }

    #[test]
    fn substitute_rejects_constant_terms() {
        let s = z(1, 3);
        let repl = vec![Series::one(1, 3), w(1, 3, 0)];
        assert!(matches!(s.substitute(&repl), Err(Error::NonzeroConstant { index: 0 })));
    }

    #[test]
    fn inverse_of_geometric() {
        let q = Series::one(1, 6).sub(&z(1, 6)).unwrap();
        let inv = q.inverse().unwrap();
        for e in 0..=6 {
            assert!((inv.coeff(&MultiIndex::z_pow(1, e)) - c(1.0)).norm() < 1e-15);
        }
        let prod = q.mul(&inv).unwrap();
        assert!(prod.max_diff_upto(&Series::one(1, 6), 6).unwrap() < 1e-14);
    }

    #[test]
    fn homogeneous_parts_and_order() {
        let s = Series::from_terms(
            1,
            4,
            [
                (MultiIndex::new(1, vec![1]), c(1.0)),
                (MultiIndex::new(2, vec![0]), c(2.0)),
                (MultiIndex::new(0, vec![3]), c(3.0)),
            ],
        );
        let degs: Vec<u32> = s.terms().map(|(i, _)| i.degree()).collect();
        assert_eq!(degs, vec![2, 2, 3]);
        let first = s.terms().next().unwrap().0.clone();
        assert_eq!(first, MultiIndex::new(1, vec![1]));
        assert_eq!(s.homogeneous(2).len(), 2);
    }

    fn arb_series(n: usize, cap: u32) -> impl Strategy<Value = Series> {
        let idx = (0..=2u32, prop::collection::vec(0..=2u32, n));
        prop::collection::vec((idx, -1.0..1.0f64, -1.0..1.0f64), 0..6).prop_map(move |ts| {
            Series::from_terms(n, cap, ts.into_iter().map(|((z, w), re, im)| (MultiIndex::new(z, w), C64::new(re, im))))
        })
    }

    /// Series without constant term, degree <= 3.
    fn arb_repl(n: usize, cap: u32) -> impl Strategy<Value = Series> {
        arb_series(n, cap).prop_map(move |s| {
            let mut s = s.truncated(3);
            s.remove(&MultiIndex::constant(n));
            s
        })
    }

    fn arb_point(n: usize) -> impl Strategy<Value = Vec<C64>> {
        prop::collection::vec((-0.35..0.35f64, -0.35..0.35f64), n + 1)
            .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn ring_laws_hold_up_to_truncation(
            a in arb_series(2, 4), b in arb_series(2, 4), c in arb_series(2, 4)
        ) {
            let ab_c = a.mul(&b).unwrap().mul(&c).unwrap();
            let a_bc = a.mul(&b.mul(&c).unwrap()).unwrap();
            prop_assert!(ab_c.max_diff_upto(&a_bc, 4).unwrap() < 1e-12);
            prop_assert!(a.mul(&b).unwrap().max_diff_upto(&b.mul(&a).unwrap(), 4).unwrap() < 1e-12);
            let lhs = a.mul(&b.add(&c).unwrap()).unwrap();
            let rhs = a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap();
            prop_assert!(lhs.max_diff_upto(&rhs, 4).unwrap() < 1e-12);
        }

        #[test]
        fn substitution_composes(
            s in arb_series(1, 5),
            a0 in arb_repl(1, 5), a1 in arb_repl(1, 5),
            b0 in arb_repl(1, 5), b1 in arb_repl(1, 5),
        ) {
            let a = vec![a0, a1];
            let b = vec![b0, b1];
            let lhs = s.substitute(&a).unwrap().substitute(&b).unwrap();
            let a_of_b: Vec<Series> = a.iter().map(|ai| ai.substitute(&b).unwrap()).collect();
            let rhs = s.substitute(&a_of_b).unwrap();
            prop_assert!(lhs.max_diff_upto(&rhs, 5).unwrap() < 1e-11);
        }

        #[test]
        fn eval_respects_products(a in arb_series(2, 8), b in arb_series(2, 8), p in arb_point(2)) {
            // degree <= 4 operands keep the product below the cap
            let a = a.truncated(4);
            let b = b.truncated(4);
            let prod = a.mul(&b).unwrap();
            let lhs = prod.eval(&p);
            let rhs = a.eval(&p) * b.eval(&p);
            prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-3));
        }

        #[test]
        fn homogeneous_parts_sum_back(a in arb_series(2, 6)) {
            let mut acc = Series::zero(2, 6);
            for d in 0..=6 {
                acc = acc.add(&a.homogeneous(d)).unwrap();
            }
            prop_assert_eq!(acc, a);
        }
    }
}
