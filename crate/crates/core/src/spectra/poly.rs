//! Exact integer polynomials, Sturm counting and real algebraic numbers
//! given by an isolating interval.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Coefficients from the constant term up; no trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poly(Vec<BigInt>);

impl Poly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn from_i64(coeffs: &[i64]) -> Self {
        Poly::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    pub fn leading(&self) -> BigInt {
        self.0.last().cloned().unwrap_or_default()
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(self.0.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
    }

    fn content(&self) -> BigInt {
        self.0.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Divide out the content and make the leading coefficient positive.
    pub fn primitive(&self) -> Poly {
        if self.is_zero() {
            return self.clone();
        }
        let mut g = self.content();
        if self.leading().is_negative() {
            g = -g;
        }
        Poly::new(self.0.iter().map(|c| c / &g).collect())
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    /// `lc(b)^(deg a - deg b + 1) * a mod b`.
    fn pseudo_rem(&self, b: &Poly) -> Poly {
        assert!(!b.is_zero(), "pseudo-remainder by zero");
        let mut r = self.0.clone();
        let db = b.degree();
        let lb = b.leading();
        if r.len() < b.0.len() {
            return self.clone();
        }
        let steps = r.len() - db;
        for _ in 0..steps {
            let dr = r.len() - 1;
            let lr = r[dr].clone();
            for c in r.iter_mut() {
                *c *= &lb;
            }
            for (i, bc) in b.0.iter().enumerate() {
                r[dr - db + i] -= &lr * bc;
            }
            debug_assert!(r[dr].is_zero());
            r.pop();
        }
        Poly::new(r)
    }

    /// Monic-free gcd, normalized primitive with positive leading term.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.primitive(), other.primitive());
        while !b.is_zero() {
            let r = a.pseudo_rem(&b).primitive();
            a = b;
            b = r;
        }
        a.primitive()
    }

    /// Exact quotient; panics if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Poly {
        assert!(!d.is_zero());
        let mut r = self.0.clone();
        let dd = d.degree();
        let ld = d.leading();
        if r.len() < d.0.len() {
            assert!(self.is_zero(), "inexact division");
            return Poly(Vec::new());
        }
        let mut q = vec![BigInt::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let (c, rem) = r[k + dd].div_rem(&ld);
            assert!(rem.is_zero(), "inexact division");
            for (i, dc) in d.0.iter().enumerate() {
                r[k + i] -= &c * dc;
            }
            q[k] = c;
        }
        assert!(r.iter().all(Zero::is_zero), "inexact division");
        Poly::new(q)
    }

    /// Square-free part, primitive.
    pub fn square_free(&self) -> Poly {
        let g = self.gcd(&self.derivative());
        if g.degree() == 0 {
            self.primitive()
        } else {
            self.primitive().div_exact(&g)
        }
    }

    /// Sign of the value at a rational point, computed without division.
    pub fn sign_at(&self, x: &BigRational) -> Ordering {
        let (p, q) = (x.numer(), x.denom());
        // Horner on the homogenized form, sum c_i p^i q^(n-i)
        let mut acc = BigInt::zero();
        let mut qpow = BigInt::one();
        for c in self.0.iter().rev() {
            acc = acc * p + c * &qpow;
            qpow *= q;
        }
        acc.sign_ordering()
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    fn sign_at_infinity(&self) -> Ordering {
        self.leading().sign_ordering()
    }

    fn sign_at_neg_infinity(&self) -> Ordering {
        let s = self.leading().sign_ordering();
        if self.degree() % 2 == 1 {
            s.reverse()
        } else {
            s
        }
    }
}

trait SignOrdering {
    fn sign_ordering(&self) -> Ordering;
}

impl SignOrdering for BigInt {
    fn sign_ordering(&self) -> Ordering {
        self.cmp(&BigInt::zero())
    }
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly({self})")
    }
}

impl fmt::Display for Poly {
    /// Highest degree first, e.g. `x^2 - x - 1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.0.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            }
            first = false;
            let show_mag = i == 0 || !mag.is_one();
            match (show_mag, i) {
                (_, 0) => write!(f, "{mag}")?,
                (true, 1) => write!(f, "{mag}x")?,
                (false, 1) => write!(f, "x")?,
                (true, _) => write!(f, "{mag}x^{i}")?,
                (false, _) => write!(f, "x^{i}")?,
            }
        }
        Ok(())
    }
}

/// Sturm chain of a square-free polynomial.
#[derive(Debug, Clone)]
pub struct Sturm {
    chain: Vec<Poly>,
}

impl Sturm {
    pub fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone()];
        if p.degree() > 0 {
            chain.push(p.derivative());
            loop {
                let n = chain.len();
                if chain[n - 1].degree() == 0 {
                    break;
                }
                let (a, b) = (&chain[n - 2], &chain[n - 1]);
                let e = a.degree() - b.degree() + 1;
                let mut r = a.pseudo_rem(b);
                if r.is_zero() {
                    break;
                }
                // the pseudo-remainder is scaled by lc(b)^e; undo a negative scale
                let scale_negative = b.leading().is_negative() && e % 2 == 1;
                if !scale_negative {
                    r = r.neg();
                }
                // keep the sign, drop the content
                let c = r.content();
                r = Poly::new(r.0.iter().map(|x| x / &c).collect());
                chain.push(r);
            }
        }
        Sturm { chain }
    }

    fn variations(signs: impl Iterator<Item = Ordering>) -> usize {
        let mut last = Ordering::Equal;
        let mut count = 0;
        for s in signs.filter(|s| *s != Ordering::Equal) {
            if last != Ordering::Equal && s != last {
                count += 1;
            }
            last = s;
        }
        count
    }

    fn at(&self, x: &BigRational) -> usize {
        Self::variations(self.chain.iter().map(|p| p.sign_at(x)))
    }

    fn at_infinity(&self) -> usize {
        Self::variations(self.chain.iter().map(Poly::sign_at_infinity))
    }

    fn at_neg_infinity(&self) -> usize {
        Self::variations(self.chain.iter().map(Poly::sign_at_neg_infinity))
    }

    /// Distinct real roots in `(a, b]`.
    pub fn count(&self, a: &BigRational, b: &BigRational) -> usize {
        self.at(a).saturating_sub(self.at(b))
    }

    /// Distinct real roots in `(a, ∞)`.
    pub fn count_above(&self, a: &BigRational) -> usize {
        self.at(a).saturating_sub(self.at_infinity())
    }

    pub fn count_real(&self) -> usize {
        self.at_neg_infinity().saturating_sub(self.at_infinity())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum RootError {
    #[error("polynomial has no real root")]
    NoRealRoot,
    #[error("zero polynomial")]
    ZeroPolynomial,
}

/// A real root of a square-free primitive polynomial. Either `lo == hi` and
/// the root is that rational, or the root is the only one in `(lo, hi]` and
/// `hi` is not itself a root.
#[derive(Clone)]
pub struct AlgebraicRoot {
    poly: Poly,
    lo: BigRational,
    hi: BigRational,
}

fn dyadic(x: f64, bits: u32, up: bool) -> BigRational {
    let scale = (1u64 << bits) as f64;
    let v = if up { (x * scale).ceil() } else { (x * scale).floor() };
    BigRational::new(BigInt::from(v as i128), BigInt::from(1u64 << bits))
}

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Cauchy bound: every root has absolute value below it.
fn root_bound(p: &Poly) -> BigRational {
    let lead = p.leading().abs();
    let max = p.coeffs().iter().map(Signed::abs).max().unwrap_or_default();
    BigRational::new(max, lead) + BigRational::one()
}

impl AlgebraicRoot {
    /// Largest real root of `p` (any nonzero polynomial), located near
    /// `hint` when the hint is good, and refined to width at most `tol`.
    pub fn largest_root(p: &Poly, hint: Option<f64>, tol: f64) -> Result<Self, RootError> {
        if p.is_zero() {
            return Err(RootError::ZeroPolynomial);
        }
        let sf = p.square_free();
        let sturm = Sturm::new(&sf);
        if sturm.count_real() == 0 {
            return Err(RootError::NoRealRoot);
        }
        let mut root = None;
        if let Some(h) = hint.filter(|h| h.is_finite()) {
            let r = h.round();
            if (h - r).abs() < 1e-6 && r.abs() < 1e15 {
                let rr = rat(r as i64);
                if sf.sign_at(&rr) == Ordering::Equal && sturm.count_above(&rr) == 0 {
                    root = Some(AlgebraicRoot { poly: sf.clone(), lo: rr.clone(), hi: rr });
                }
            }
            if root.is_none() {
                for bits in [20u32, 12, 6] {
                    let delta = 1.0 / (1u64 << bits) as f64 * h.abs().max(1.0);
                    let lo = dyadic(h - delta, bits, false);
                    let hi = dyadic(h + delta, bits, true);
                    if sf.sign_at(&hi) != Ordering::Equal
                        && sturm.count(&lo, &hi) == 1
                        && sturm.count_above(&hi) == 0
                    {
                        root = Some(AlgebraicRoot { poly: sf.clone(), lo, hi });
                        break;
                    }
                }
            }
        }
        let mut root = match root {
            Some(r) => r,
            None => {
                let b = root_bound(&sf);
                let mut lo = -b.clone();
                let mut hi = b;
                // shrink until exactly one root lies above lo
                while sturm.count_above(&lo) > 1 {
                    let mid = (&lo + &hi) / rat(2);
                    if sturm.count_above(&mid) >= 1 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                AlgebraicRoot::settle(sf.clone(), lo, hi)
            }
        };
        root.refine_to(tol, &sturm);
        Ok(root)
    }

    fn settle(poly: Poly, lo: BigRational, hi: BigRational) -> Self {
        if poly.sign_at(&hi) == Ordering::Equal {
            AlgebraicRoot { poly, lo: hi.clone(), hi }
        } else {
            AlgebraicRoot { poly, lo, hi }
        }
    }

    fn refine_to(&mut self, tol: f64, sturm: &Sturm) {
        while !self.is_exact() && self.width() > tol {
            self.bisect(sturm);
        }
    }

    fn bisect(&mut self, sturm: &Sturm) {
        let mid = (&self.lo + &self.hi) / rat(2);
        if sturm.count(&self.lo, &mid) == 1 {
            self.hi = mid;
            if self.poly.sign_at(&self.hi) == Ordering::Equal {
                self.lo = self.hi.clone();
            }
        } else {
            self.lo = mid;
        }
    }

    /// Halve the interval until its width is at most `tol`.
    pub fn refine(&mut self, tol: f64) {
        let sturm = Sturm::new(&self.poly);
        self.refine_to(tol, &sturm);
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn interval(&self) -> (&BigRational, &BigRational) {
        (&self.lo, &self.hi)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }

    pub fn width(&self) -> f64 {
        (&self.hi - &self.lo).to_f64().unwrap_or(f64::INFINITY)
    }

    pub fn to_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / rat(2)).to_f64().unwrap_or(f64::NAN)
    }

    /// Whether the root equals a given rational.
    pub fn equals_rational(&self, r: &BigRational) -> bool {
        if self.is_exact() {
            return &self.lo == r;
        }
        r > &self.lo && r <= &self.hi && self.poly.sign_at(r) == Ordering::Equal
    }

    /// Exact comparison.
    pub fn cmp_exact(&self, other: &AlgebraicRoot) -> Ordering {
        if self.is_exact() && other.is_exact() {
            return self.lo.cmp(&other.lo);
        }
        if self.is_exact() && other.equals_rational(&self.lo) {
            return Ordering::Equal;
        }
        if other.is_exact() && self.equals_rational(&other.lo) {
            return Ordering::Equal;
        }
        let lo = (&self.lo).max(&other.lo).clone();
        let hi = (&self.hi).min(&other.hi).clone();
        if !self.is_exact() && !other.is_exact() && lo < hi {
            let g = self.poly.gcd(&other.poly);
            if g.degree() > 0 && Sturm::new(&g).count(&lo, &hi) > 0 {
                return Ordering::Equal;
            }
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        let (sa, sb) = (Sturm::new(&a.poly), Sturm::new(&b.poly));
        loop {
            if a.hi < b.lo || (a.hi == b.lo && !b.is_exact()) {
                return Ordering::Less;
            }
            if b.hi < a.lo || (b.hi == a.lo && !a.is_exact()) {
                return Ordering::Greater;
            }
            if a.is_exact() && b.is_exact() {
                return a.lo.cmp(&b.lo);
            }
            if !a.is_exact() {
                a.bisect(&sa);
            }
            if !b.is_exact() {
                b.bisect(&sb);
            }
        }
    }
}

impl PartialEq for AlgebraicRoot {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_exact(other) == Ordering::Equal
    }
}

impl fmt::Debug for AlgebraicRoot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "root of {} in ({}, {}]", self.poly, self.lo, self.hi)
    }
}

/// Characteristic polynomial `det(xI - A)` by Faddeev-LeVerrier.
pub fn char_poly(a: &[Vec<u64>]) -> Poly {
    let n = a.len();
    let a: Vec<Vec<BigInt>> =
        a.iter().map(|row| row.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    // m = A * M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k) / k
    let mut m: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); n]; n];
    for k in 1..=n {
        let mut next = mat_mul(&a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(&a, &m);
        let tr: BigInt = (0..n).map(|i| am[i][i].clone()).sum();
        let (q, r) = tr.div_rem(&BigInt::from(k));
        debug_assert!(r.is_zero());
        coeffs[n - k] = -q;
    }
    Poly::new(coeffs)
}

fn mat_mul(a: &[Vec<BigInt>], b: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let n = a.len();
    let mut out = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for k in 0..n {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..n {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}
