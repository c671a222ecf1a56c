//! Sparse multivariate polynomials with real coefficients.
//!
//! Terms are kept in a canonical form: exponent keys are unique and no stored
//! coefficient is exactly zero. Coefficients with magnitude below any epsilon
//! are deliberately kept; only exact zeros are dropped, so generator
//! compilation never silently alters a model.

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use std::collections::BTreeMap;
use std::fmt;

/// A sparse polynomial in `dimension` variables.
#[derive(Clone, PartialEq, Debug)]
pub struct Polynomial {
    dimension: usize,
    terms: BTreeMap<MultiIndex, f64>,
}

impl Polynomial {
    pub fn zero(dimension: usize) -> Self {
        Polynomial {
            dimension,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dimension: usize, value: f64) -> Self {
        let mut p = Self::zero(dimension);
        if value != 0.0 {
            p.terms.insert(MultiIndex::zeros(dimension), value);
        }
        p
    }

    /// The single term `coeff * x^exponents`.
    pub fn monomial(dimension: usize, exponents: &[u32], coeff: f64) -> Result<Self> {
        if exponents.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: exponents.len(),
            });
        }
        let mut p = Self::zero(dimension);
        if coeff != 0.0 {
            p.terms.insert(MultiIndex::from_slice(exponents), coeff);
        }
        Ok(p)
    }

    /// The coordinate polynomial `x_axis`.
    pub fn variable(dimension: usize, axis: usize) -> Self {
        debug_assert!(axis < dimension);
        let mut p = Self::zero(dimension);
        p.terms.insert(MultiIndex::unit(dimension, axis), 1.0);
        p
    }

    /// Builds a polynomial from `(exponents, coeff)` pairs, merging duplicate
    /// exponents and dropping exact zeros.
    pub fn from_terms<'a, I>(dimension: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (&'a [u32], f64)>,
    {
        let mut p = Self::zero(dimension);
        for (exponents, coeff) in terms {
            if exponents.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: exponents.len(),
                });
            }
            p.accumulate(MultiIndex::from_slice(exponents), coeff);
        }
        Ok(p)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Iterates `(exponents, coeff)` in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn coefficient(&self, exponents: &MultiIndex) -> f64 {
        self.terms.get(exponents).copied().unwrap_or(0.0)
    }

    /// The constant value if every stored term has zero exponents.
    pub fn constant_value(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => {
                let (e, &c) = self.terms.iter().next().unwrap();
                e.is_zero().then_some(c)
            }
            _ => None,
        }
    }

    fn accumulate(&mut self, exponents: MultiIndex, coeff: f64) {
        if coeff == 0.0 {
            return;
        }
        match self.terms.get_mut(&exponents) {
            Some(slot) => {
                *slot += coeff;
                if *slot == 0.0 {
                    self.terms.remove(&exponents);
                }
            }
            None => {
                self.terms.insert(exponents, coeff);
            }
        }
    }

    fn check_dimension(&self, other: usize) -> Result<()> {
        if self.dimension != other {
            return Err(Error::DimensionMismatch {
                expected: self.dimension,
                got: other,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dimension(other.dimension)?;
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.accumulate(e.clone(), c);
        }
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> Polynomial {
        let mut out = Self::zero(self.dimension);
        if factor != 0.0 {
            for (e, c) in self.terms() {
                out.terms.insert(e.clone(), c * factor);
            }
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial> {
        self.check_dimension(other.dimension)?;
        let mut out = Self::zero(self.dimension);
        for (ea, ca) in self.terms() {
            for (eb, cb) in other.terms() {
                let e = MultiIndex::new(ea.iter().zip(eb.iter()).map(|(a, b)| a + b));
                out.accumulate(e, ca * cb);
            }
        }
        Ok(out)
    }

    /// Rewrites `self` around a new origin: the result `q` satisfies
    /// `q(y) = self(y + origin)` exactly, via binomial expansion.
    pub fn shift(&self, origin: &[f64]) -> Result<Polynomial> {
        self.check_dimension(origin.len())?;
        let mut out = Self::zero(self.dimension);
        for (e, c) in self.terms() {
            // expand c * prod_d (y_d + origin_d)^{e_d} one dimension at a time
            let mut partial: Vec<(Vec<u32>, f64)> = vec![(vec![0; self.dimension], c)];
            for d in 0..self.dimension {
                let mut next = Vec::with_capacity(partial.len() * (e[d] as usize + 1));
                for k in 0..=e[d] {
                    let w = binomial(e[d], k) * origin[d].powi((e[d] - k) as i32);
                    if w == 0.0 {
                        continue;
                    }
                    for (pe, pc) in &partial {
                        let mut ne = pe.clone();
                        ne[d] += k;
                        next.push((ne, pc * w));
                    }
                }
                partial = next;
            }
            for (ne, nc) in partial {
                out.accumulate(MultiIndex::new(ne), nc);
            }
        }
        Ok(out)
    }

    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        self.check_dimension(point.len())?;
        Ok(self
            .terms()
            .map(|(e, c)| {
                c * e
                    .iter()
                    .zip(point)
                    .map(|(exp, x)| x.powi(exp as i32))
                    .product::<f64>()
            })
            .sum())
    }

    /// Evaluation at an integer lattice point. Hot path for event weights.
    pub fn eval_lattice(&self, n: &MultiIndex) -> f64 {
        debug_assert_eq!(self.dimension, n.len());
        let mut total = 0.0;
        for (e, c) in self.terms() {
            let mut term = c;
            for (exp, x) in e.iter().zip(n.iter()) {
                term *= (x as f64).powi(exp as i32);
            }
            total += term;
        }
        total
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (i, (e, c)) in self.terms().enumerate() {
            if i == 0 {
                if c < 0.0 {
                    write!(f, "-")?;
                }
            } else if c < 0.0 {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs();
            let mut wrote = false;
            if mag != 1.0 || e.is_zero() {
                write!(f, "{mag}")?;
                wrote = true;
            }
            for (d, exp) in e.iter().enumerate() {
                if exp == 0 {
                    continue;
                }
                if wrote {
                    write!(f, " ")?;
                }
                write!(f, "n{}", d + 1)?;
                if exp > 1 {
                    write!(f, "^{exp}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}
