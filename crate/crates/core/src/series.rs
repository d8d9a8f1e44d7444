//! Truncated multivariate formal power series over complex scalars.
//!
//! Series live in `d` deformation parameters and are cut at total degree
//! `N`: terms of higher total degree are discarded by every operation and
//! never folded back. Invariants:
//! - every stored multi-index has total degree <= `max_degree`
//! - stored coefficients are normalized (one entry per multi-index)
//! - coefficients with modulus below [`PRUNE_EPS`] are dropped from storage
//!
//! Term order is graded-lexicographic (total degree first, then the first
//! parameter weighted heaviest), which is also the serialization order.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use nalgebra::DVector;
use serde_json::{json, Value};

use crate::error::SeriesError;
use crate::scalar::{cabs, czero, Real, C};

/// Storage prune threshold for coefficients produced by arithmetic.
/// Equality checks take explicit tolerances; pruning only keeps maps sparse.
pub const PRUNE_EPS: f64 = 1e-14;

/// Exponent multi-index of a series term.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Exp(pub Vec<u32>);

impl Exp {
    pub fn zero(num_params: usize) -> Self {
        Exp(vec![0; num_params])
    }

    /// The j-th unit exponent, i.e. the monomial `t_j`.
    pub fn unit(num_params: usize, j: usize) -> Self {
        let mut e = vec![0; num_params];
        e[j] += 1;
        Exp(e)
    }

    pub fn total_degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exp) -> Exp {
        Exp(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl Ord for Exp {
    fn cmp(&self, other: &Self) -> Ordering {
        // Graded-lex: lower total degree first; on ties the exponent vector
        // with the larger leading entries comes first (so t1 precedes t2).
        match self.total_degree().cmp(&other.total_degree()) {
            Ordering::Equal => other.0.cmp(&self.0),
            ord => ord,
        }
    }
}

impl PartialOrd for Exp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Multivariate series with complex coefficients, truncated at a total degree.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries<R: Real = f64> {
    num_params: usize,
    max_degree: u32,
    terms: BTreeMap<Exp, C<R>>,
}

impl<R: Real> TruncatedSeries<R> {
    pub fn zero(num_params: usize, max_degree: u32) -> Self {
        TruncatedSeries {
            num_params,
            max_degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(num_params: usize, max_degree: u32, value: C<R>) -> Self {
        let mut s = Self::zero(num_params, max_degree);
        s.add_term(Exp::zero(num_params), value);
        s
    }

    pub fn one(num_params: usize, max_degree: u32) -> Self {
        Self::constant(num_params, max_degree, C::new(R::one(), R::zero()))
    }

    /// The monomial `c * t_j`.
    pub fn monomial(num_params: usize, max_degree: u32, j: usize, c: C<R>) -> Self {
        let mut s = Self::zero(num_params, max_degree);
        s.add_term(Exp::unit(num_params, j), c);
        s
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &C<R>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exp) -> C<R> {
        self.terms.get(e).copied().unwrap_or_else(czero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Accumulate a term, truncating, normalizing and pruning.
    pub fn add_term(&mut self, e: Exp, c: C<R>) {
        debug_assert_eq!(e.0.len(), self.num_params);
        if e.total_degree() > self.max_degree {
            return;
        }
        let entry = self.terms.entry(e.clone()).or_insert_with(czero);
        *entry += c;
        if cabs(entry) < PRUNE_EPS {
            self.terms.remove(&e);
        }
    }

    fn check_shape(&self, other: &Self) -> Result<(), SeriesError> {
        if self.num_params != other.num_params {
            return Err(SeriesError::Shape(format!(
                "num_params {} vs {}",
                self.num_params, other.num_params
            )));
        }
        if self.max_degree != other.max_degree {
            return Err(SeriesError::Shape(format!(
                "max_degree {} vs {}",
                self.max_degree, other.max_degree
            )));
        }
        Ok(())
    }

    /// Linear combination `ca * a + cb * b`.
    pub fn combine(a: &Self, b: &Self, ca: C<R>, cb: C<R>) -> Result<Self, SeriesError> {
        a.check_shape(b)?;
        let mut out = Self::zero(a.num_params, a.max_degree);
        for (e, c) in &a.terms {
            out.add_term(e.clone(), ca * *c);
        }
        for (e, c) in &b.terms {
            out.add_term(e.clone(), cb * *c);
        }
        Ok(out)
    }

    /// Product, truncated at the shared max degree.
    pub fn mul(a: &Self, b: &Self) -> Result<Self, SeriesError> {
        a.check_shape(b)?;
        let mut out = Self::zero(a.num_params, a.max_degree);
        for (ea, ca) in &a.terms {
            for (eb, cb) in &b.terms {
                if ea.total_degree() + eb.total_degree() > a.max_degree {
                    continue;
                }
                out.add_term(ea.add(eb), *ca * *cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: C<R>) -> Self {
        let mut out = Self::zero(self.num_params, self.max_degree);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), c * *v);
        }
        out
    }

    /// Evaluate at a parameter point.
    pub fn eval(&self, t: &[C<R>]) -> C<R> {
        assert_eq!(t.len(), self.num_params, "parameter point length");
        let mut acc = czero();
        for (e, c) in &self.terms {
            let mut m = C::new(R::one(), R::zero());
            for (j, &p) in e.0.iter().enumerate() {
                for _ in 0..p {
                    m *= t[j];
                }
            }
            acc += *c * m;
        }
        acc
    }

    /// Largest coefficient modulus (0 for the zero series).
    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(cabs).fold(0.0, f64::max)
    }

    /// Max coefficient-wise difference against another series.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (e, c) in &self.terms {
            d = d.max(cabs(&(*c - other.coefficient(e))));
        }
        for (e, c) in &other.terms {
            d = d.max(cabs(&(*c - self.coefficient(e))));
        }
        d
    }

    /// JSON per the series schema, terms in graded-lex order.
    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(e, c)| {
                json!({
                    "exp": e.0,
                    "re": c.re.to_f64(),
                    "im": c.im.to_f64(),
                })
            })
            .collect();
        json!({
            "params": self.num_params,
            "degree": self.max_degree,
            "terms": terms,
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SeriesError> {
        let params = v["params"]
            .as_u64()
            .ok_or_else(|| SeriesError::Shape("missing params".into()))? as usize;
        let degree = v["degree"]
            .as_u64()
            .ok_or_else(|| SeriesError::Shape("missing degree".into()))? as u32;
        let mut s = Self::zero(params, degree);
        let terms = v["terms"]
            .as_array()
            .ok_or_else(|| SeriesError::Shape("missing terms".into()))?;
        for t in terms {
            let exp: Vec<u32> = t["exp"]
                .as_array()
                .ok_or_else(|| SeriesError::Shape("term missing exp".into()))?
                .iter()
                .map(|x| x.as_u64().unwrap_or(0) as u32)
                .collect();
            if exp.len() != params {
                return Err(SeriesError::Shape("exp length != params".into()));
            }
            let re = t["re"].as_f64().unwrap_or(0.0);
            let im = t["im"].as_f64().unwrap_or(0.0);
            s.add_term(Exp(exp), C::new(R::from_f64_lossy(re), R::from_f64_lossy(im)));
        }
        Ok(s)
    }
}

/// `ca * a + cb * b` with shared truncation (operation-style entry point).
pub fn series_combine<R: Real>(
    a: &TruncatedSeries<R>,
    b: &TruncatedSeries<R>,
    ca: C<R>,
    cb: C<R>,
) -> Result<TruncatedSeries<R>, SeriesError> {
    TruncatedSeries::combine(a, b, ca, cb)
}

/// Truncated convolution product.
pub fn series_mul<R: Real>(
    a: &TruncatedSeries<R>,
    b: &TruncatedSeries<R>,
) -> Result<TruncatedSeries<R>, SeriesError> {
    TruncatedSeries::mul(a, b)
}

/// A series whose coefficients are coefficient vectors of a fixed dimension.
///
/// This is the layout the solver works in: one vector per multi-index.
/// The serialized form (one scalar series per vector slot) is recovered by
/// [`VecSeries::component`].
#[derive(Debug, Clone)]
pub struct VecSeries<R: Real = f64> {
    num_params: usize,
    max_degree: u32,
    dim: usize,
    terms: BTreeMap<Exp, DVector<C<R>>>,
}

impl<R: Real> VecSeries<R> {
    pub fn zero(num_params: usize, max_degree: u32, dim: usize) -> Self {
        VecSeries {
            num_params,
            max_degree,
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exp, &DVector<C<R>>)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &Exp) -> DVector<C<R>> {
        self.terms
            .get(e)
            .cloned()
            .unwrap_or_else(|| DVector::from_element(self.dim, czero()))
    }

    /// Accumulate a vector coefficient on a multi-index.
    pub fn add_term(&mut self, e: Exp, v: &DVector<C<R>>) {
        debug_assert_eq!(v.len(), self.dim);
        if e.total_degree() > self.max_degree {
            return;
        }
        match self.terms.get_mut(&e) {
            Some(slot) => *slot += v,
            None => {
                self.terms.insert(e, v.clone());
            }
        }
    }

    /// Drop terms whose vector is negligibly small.
    pub fn prune(&mut self) {
        self.terms
            .retain(|_, v| v.iter().any(|z| cabs(z) >= PRUNE_EPS));
    }

    /// Apply a linear map to every coefficient vector.
    pub fn map_linear<F>(&self, out_dim: usize, f: F) -> Self
    where
        F: Fn(&DVector<C<R>>) -> DVector<C<R>>,
    {
        let mut out = VecSeries::zero(self.num_params, self.max_degree, out_dim);
        for (e, v) in &self.terms {
            let w = f(v);
            debug_assert_eq!(w.len(), out_dim);
            out.add_term(e.clone(), &w);
        }
        out.prune();
        out
    }

    /// Bilinear convolution `out[e1+e2] += kernel(a[e1], b[e2])`, truncated.
    /// `degree_cap` restricts to output total degree == cap when `Some`
    /// (used by the order-by-order solver).
    pub fn convolve<F>(
        a: &Self,
        b: &Self,
        out_dim: usize,
        degree_cap: Option<u32>,
        kernel: F,
    ) -> Self
    where
        F: Fn(&DVector<C<R>>, &DVector<C<R>>) -> DVector<C<R>>,
    {
        let mut out = VecSeries::zero(a.num_params, a.max_degree, out_dim);
        for (ea, va) in &a.terms {
            for (eb, vb) in &b.terms {
                let deg = ea.total_degree() + eb.total_degree();
                if deg > a.max_degree {
                    continue;
                }
                if let Some(cap) = degree_cap {
                    if deg != cap {
                        continue;
                    }
                }
                let w = kernel(va, vb);
                debug_assert_eq!(w.len(), out_dim);
                out.add_term(ea.add(eb), &w);
            }
        }
        out.prune();
        out
    }

    /// Evaluate at a parameter point.
    pub fn eval(&self, t: &[C<R>]) -> DVector<C<R>> {
        assert_eq!(t.len(), self.num_params);
        let mut acc = DVector::from_element(self.dim, czero());
        for (e, v) in &self.terms {
            let mut m = C::new(R::one(), R::zero());
            for (j, &p) in e.0.iter().enumerate() {
                for _ in 0..p {
                    m *= t[j];
                }
            }
            acc += v * m;
        }
        acc
    }

    /// The homogeneous part of a given total degree.
    pub fn homogeneous(&self, degree: u32) -> Self {
        let mut out = VecSeries::zero(self.num_params, self.max_degree, self.dim);
        for (e, v) in &self.terms {
            if e.total_degree() == degree {
                out.add_term(e.clone(), v);
            }
        }
        out
    }

    /// Scalar series of one vector slot (serialization view).
    pub fn component(&self, index: usize) -> TruncatedSeries<R> {
        let mut s = TruncatedSeries::zero(self.num_params, self.max_degree);
        for (e, v) in &self.terms {
            s.add_term(e.clone(), v[index]);
        }
        s
    }

    /// Max coefficient modulus across all terms and slots.
    pub fn max_abs(&self) -> f64 {
        self.terms
            .values()
            .flat_map(|v| v.iter().map(cabs))
            .fold(0.0, f64::max)
    }

    /// Max coefficient-wise difference against another vector series.
    pub fn max_diff(&self, other: &Self) -> f64 {
        let mut d = 0.0f64;
        for (e, v) in &self.terms {
            let w = other.coefficient(e);
            d = d.max((v - &w).iter().map(cabs).fold(0.0, f64::max));
        }
        for (e, w) in &other.terms {
            let v = self.coefficient(e);
            d = d.max((w - &v).iter().map(cabs).fold(0.0, f64::max));
        }
        d
    }

    /// Multiply every term by a scalar.
    pub fn scale(&self, c: C<R>) -> Self {
        let mut out = VecSeries::zero(self.num_params, self.max_degree, self.dim);
        for (e, v) in &self.terms {
            out.add_term(e.clone(), &(v * c));
        }
        out.prune();
        out
    }

    /// Sum of two vector series with shared shape.
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, v) in &other.terms {
            out.add_term(e.clone(), v);
        }
        out.prune();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::c;

    type S = TruncatedSeries<f64>;

    fn t(j: usize) -> S {
        S::monomial(2, 2, j, c(1.0, 0.0))
    }

    /// Independent oracle: plain polynomial multiply, cut at the end.
    fn brute_mul(a: &S, b: &S) -> S {
        let mut out = S::zero(a.num_params(), a.max_degree());
        let mut raw: Vec<(Exp, C<f64>)> = Vec::new();
        for (ea, ca) in a.terms() {
            for (eb, cb) in b.terms() {
                raw.push((ea.add(eb), ca * cb));
            }
        }
        for (e, cc) in raw {
            if e.total_degree() <= a.max_degree() {
                out.add_term(e, cc);
            }
        }
        out
    }

    #[test]
    fn combine_cancellation_is_zero() {
        let a = S::combine(&t(0), &S::one(2, 2), c(3.0, 1.0), c(-2.0, 0.5)).unwrap();
        let z = S::combine(&a, &a, c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn combine_linearity() {
        let s = S::combine(&S::one(2, 2), &t(0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        assert_eq!(s.coefficient(&Exp(vec![0, 0])), c(1.0, 0.0));
        assert_eq!(s.coefficient(&Exp(vec![1, 0])), c(1.0, 0.0));
    }

    #[test]
    fn combine_coefficient_arithmetic() {
        // (t1 + t2, t2, 2, -1) -> 2 t1 + t2, against direct arithmetic.
        let t1_plus_t2 = S::combine(&t(0), &t(1), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let s = S::combine(&t1_plus_t2, &t(1), c(2.0, 0.0), c(-1.0, 0.0)).unwrap();
        assert_eq!(s.coefficient(&Exp(vec![1, 0])), c(2.0, 0.0));
        assert_eq!(s.coefficient(&Exp(vec![0, 1])), c(1.0, 0.0));
        assert_eq!(s.terms().count(), 2);
    }

    #[test]
    fn mul_binomial() {
        let one_plus_t1 = S::combine(&S::one(2, 2), &t(0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let sq = series_mul(&one_plus_t1, &one_plus_t1).unwrap();
        assert_eq!(sq.coefficient(&Exp(vec![0, 0])), c(1.0, 0.0));
        assert_eq!(sq.coefficient(&Exp(vec![1, 0])), c(2.0, 0.0));
        assert_eq!(sq.coefficient(&Exp(vec![2, 0])), c(1.0, 0.0));
        assert_eq!(sq.terms().count(), 3);
    }

    #[test]
    fn mul_truncation_kills_high_degree() {
        let a = S::monomial(2, 1, 0, c(1.0, 0.0));
        let b = S::monomial(2, 1, 1, c(1.0, 0.0));
        let p = series_mul(&a, &b).unwrap();
        assert!(p.is_zero());
    }

    #[test]
    fn mul_matches_brute_force_oracle() {
        // (1 + t1 + t2)(1 - t1) at N=2 -> 1 + t2 - t1^2 - t1 t2.
        let one = S::one(2, 2);
        let a = S::combine(
            &S::combine(&one, &t(0), c(1.0, 0.0), c(1.0, 0.0)).unwrap(),
            &t(1),
            c(1.0, 0.0),
            c(1.0, 0.0),
        )
        .unwrap();
        let b = S::combine(&S::one(2, 2), &t(0), c(1.0, 0.0), c(-1.0, 0.0)).unwrap();
        let p = series_mul(&a, &b).unwrap();
        let expect = brute_mul(&a, &b);
        assert!(p.max_diff(&expect) == 0.0);
        assert_eq!(p.coefficient(&Exp(vec![0, 0])), c(1.0, 0.0));
        assert_eq!(p.coefficient(&Exp(vec![0, 1])), c(1.0, 0.0));
        assert_eq!(p.coefficient(&Exp(vec![2, 0])), c(-1.0, 0.0));
        assert_eq!(p.coefficient(&Exp(vec![1, 1])), c(-1.0, 0.0));
        assert_eq!(p.coefficient(&Exp(vec![1, 0])), c(0.0, 0.0));
    }

    #[test]
    fn shape_mismatch_is_error() {
        let a = S::zero(2, 2);
        let b = S::zero(3, 2);
        assert!(series_combine(&a, &b, c(1.0, 0.0), c(1.0, 0.0)).is_err());
        let d = S::zero(2, 3);
        assert!(series_mul(&a, &d).is_err());
    }

    #[test]
    fn graded_lex_order() {
        let mut s = S::zero(2, 2);
        s.add_term(Exp(vec![0, 2]), c(1.0, 0.0));
        s.add_term(Exp(vec![1, 1]), c(1.0, 0.0));
        s.add_term(Exp(vec![0, 1]), c(1.0, 0.0));
        s.add_term(Exp(vec![2, 0]), c(1.0, 0.0));
        s.add_term(Exp(vec![1, 0]), c(1.0, 0.0));
        s.add_term(Exp(vec![0, 0]), c(1.0, 0.0));
        let order: Vec<Vec<u32>> = s.terms().map(|(e, _)| e.0.clone()).collect();
        assert_eq!(
            order,
            vec![
                vec![0, 0],
                vec![1, 0],
                vec![0, 1],
                vec![2, 0],
                vec![1, 1],
                vec![0, 2]
            ]
        );
    }

    #[test]
    fn json_round_trip() {
        let a = S::combine(&t(0), &S::one(2, 2), c(0.5, -1.5), c(1.0, 0.25)).unwrap();
        let v = a.to_json();
        let b = S::from_json(&v).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn vec_series_component_round_trip() {
        let mut vs = VecSeries::<f64>::zero(2, 3, 2);
        vs.add_term(
            Exp(vec![1, 0]),
            &DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 2.0)]),
        );
        vs.add_term(
            Exp(vec![1, 2]),
            &DVector::from_vec(vec![c(0.0, 0.0), c(-1.0, 0.5)]),
        );
        let s0 = vs.component(0);
        let s1 = vs.component(1);
        assert_eq!(s0.coefficient(&Exp(vec![1, 0])), c(1.0, 0.0));
        assert!(s0.coefficient(&Exp(vec![1, 2])) == c(0.0, 0.0));
        assert_eq!(s1.coefficient(&Exp(vec![1, 2])), c(-1.0, 0.5));
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_series() -> impl Strategy<Value = S> {
            prop::collection::vec(
                ((0u32..3, 0u32..3), -2.0f64..2.0, -2.0f64..2.0),
                0..6,
            )
            .prop_map(|entries| {
                let mut s = S::zero(2, 3);
                for ((e1, e2), re, im) in entries {
                    s.add_term(Exp(vec![e1, e2]), c(re, im));
                }
                s
            })
        }

        proptest! {
            #[test]
            fn mul_commutative(a in arb_series(), b in arb_series()) {
                let ab = series_mul(&a, &b).unwrap();
                let ba = series_mul(&b, &a).unwrap();
                prop_assert!(ab.max_diff(&ba) < 1e-12);
            }

            #[test]
            fn mul_associative(a in arb_series(), b in arb_series(), cc in arb_series()) {
                let l = series_mul(&series_mul(&a, &b).unwrap(), &cc).unwrap();
                let r = series_mul(&a, &series_mul(&b, &cc).unwrap()).unwrap();
                prop_assert!(l.max_diff(&r) < 1e-10);
            }

            #[test]
            fn distributive(a in arb_series(), b in arb_series(), cc in arb_series()) {
                let bc = series_combine(&b, &cc, c(1.0, 0.0), c(1.0, 0.0)).unwrap();
                let l = series_mul(&a, &bc).unwrap();
                let r = series_combine(
                    &series_mul(&a, &b).unwrap(),
                    &series_mul(&a, &cc).unwrap(),
                    c(1.0, 0.0),
                    c(1.0, 0.0),
                ).unwrap();
                prop_assert!(l.max_diff(&r) < 1e-10);
            }

            #[test]
            fn one_is_identity(a in arb_series()) {
                let p = series_mul(&a, &S::one(2, 3)).unwrap();
                prop_assert!(p.max_diff(&a) < 1e-14);
            }
        }
    }
}
