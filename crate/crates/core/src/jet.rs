//! Truncated bivariate Taylor jets.
//!
//! A `Jet` stores the Taylor coefficients of a scalar function of two
//! variables around a base point, up to a fixed total degree (`order`).
//! Arithmetic and elementary functions propagate all coefficients exactly
//! (in floating point), so mixed partial derivatives up to `order` come out
//! of a single forward evaluation.
//!
//! Coefficients are stored densely over the triangle i + j <= order, graded
//! by total degree: (0,0), (1,0), (0,1), (2,0), (1,1), (0,2), ...
//! The coefficient `c[i][j]` multiplies (x - x0)^i (y - y0)^j, so the mixed
//! partial d^{i+j} f / dx^i dy^j at the base point is `c[i][j] * i! * j!`.

use thiserror::Error;

/// Highest supported truncation order.
pub const MAX_ORDER: usize = 5;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum JetError {
    #[error("jet order mismatch: {left} vs {right}")]
    OrderMismatch { left: usize, right: usize },
    #[error("singular composition in {op}: {why}")]
    SingularCompose { op: &'static str, why: String },
    #[error("derivative index ({i},{j}) exceeds jet order {order}")]
    IndexOutOfOrder { i: usize, j: usize, order: usize },
}

/// Number of coefficients of a jet of the given order.
#[inline]
pub const fn coeff_len(order: usize) -> usize {
    (order + 1) * (order + 2) / 2
}

/// Position of the (i, j) coefficient in the graded triangular layout.
#[inline]
const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const FACTORIAL: [f64; MAX_ORDER + 1] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    order: usize,
    base: (f64, f64),
    coeffs: Vec<f64>,
}

impl Jet {
    fn zeroed(order: usize, base: (f64, f64)) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds MAX_ORDER");
        Jet { order, base, coeffs: vec![0.0; coeff_len(order)] }
    }

    /// Jet of a constant function.
    pub fn constant(value: f64, order: usize, base: (f64, f64)) -> Self {
        let mut j = Self::zeroed(order, base);
        j.coeffs[0] = value;
        j
    }

    /// Jet of the first coordinate function (x, y) -> x.
    pub fn var_x(order: usize, base: (f64, f64)) -> Self {
        let mut j = Self::zeroed(order, base);
        j.coeffs[0] = base.0;
        if order >= 1 {
            j.coeffs[idx(1, 0)] = 1.0;
        }
        j
    }

    /// Jet of the second coordinate function (x, y) -> y.
    pub fn var_y(order: usize, base: (f64, f64)) -> Self {
        let mut j = Self::zeroed(order, base);
        j.coeffs[0] = base.1;
        if order >= 1 {
            j.coeffs[idx(0, 1)] = 1.0;
        }
        j
    }

    /// Build a jet from raw triangular coefficients (graded layout).
    pub fn from_coeffs(coeffs: Vec<f64>, order: usize, base: (f64, f64)) -> Self {
        assert_eq!(coeffs.len(), coeff_len(order), "coefficient count does not match order");
        assert!(order <= MAX_ORDER);
        Jet { order, base, coeffs }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Base point; recorded for diagnostics, not enforced in arithmetic.
    pub fn base(&self) -> (f64, f64) {
        self.base
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of (x-x0)^i (y-y0)^j; zero access is checked.
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        assert!(i + j <= self.order, "coefficient ({i},{j}) out of order {}", self.order);
        self.coeffs[idx(i, j)]
    }

    /// Value of the underlying function at the base point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Mixed partial d^{i+j} f / dx^i dy^j at the base point.
    pub fn derivative(&self, i: usize, j: usize) -> Result<f64, JetError> {
        if i + j > self.order {
            return Err(JetError::IndexOutOfOrder { i, j, order: self.order });
        }
        Ok(self.coeffs[idx(i, j)] * FACTORIAL[i] * FACTORIAL[j])
    }

    /// Copy truncated to a lower (or equal) order.
    pub fn cut(&self, order: usize) -> Jet {
        assert!(order <= self.order, "cannot extend a jet from order {} to {}", self.order, order);
        Jet {
            order,
            base: self.base,
            coeffs: self.coeffs[..coeff_len(order)].to_vec(),
        }
    }

    /// Jet of the x-partial; drops one order.
    pub fn dx(&self) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Self::zeroed(self.order - 1, self.base);
        for d in 0..self.order {
            for j in 0..=d {
                let i = d - j;
                out.coeffs[idx(i, j)] = self.coeffs[idx(i + 1, j)] * (i + 1) as f64;
            }
        }
        out
    }

    /// Jet of the y-partial; drops one order.
    pub fn dy(&self) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = Self::zeroed(self.order - 1, self.base);
        for d in 0..self.order {
            for j in 0..=d {
                let i = d - j;
                out.coeffs[idx(i, j)] = self.coeffs[idx(i, j + 1)] * (j + 1) as f64;
            }
        }
        out
    }

    /// Directional derivative along coordinate axis 0 (x) or 1 (y).
    pub fn d(&self, axis: usize) -> Jet {
        match axis {
            0 => self.dx(),
            1 => self.dy(),
            _ => panic!("axis must be 0 or 1"),
        }
    }

    fn check_order(&self, rhs: &Jet) -> Result<(), JetError> {
        if self.order != rhs.order {
            return Err(JetError::OrderMismatch { left: self.order, right: rhs.order });
        }
        Ok(())
    }

    pub fn try_add(&self, rhs: &Jet) -> Result<Jet, JetError> {
        self.check_order(rhs)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, rhs: &Jet) -> Result<Jet, JetError> {
        self.check_order(rhs)?;
        let mut out = self.clone();
        for (a, b) in out.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
        Ok(out)
    }

    /// Truncated product: convolution over the coefficient triangle.
    pub fn try_mul(&self, rhs: &Jet) -> Result<Jet, JetError> {
        self.check_order(rhs)?;
        let mut out = Self::zeroed(self.order, self.base);
        let n = self.order;
        for da in 0..=n {
            for ja in 0..=da {
                let ia = da - ja;
                let a = self.coeffs[idx(ia, ja)];
                if a == 0.0 {
                    continue;
                }
                for db in 0..=(n - da) {
                    for jb in 0..=db {
                        let ib = db - jb;
                        out.coeffs[idx(ia + ib, ja + jb)] += a * rhs.coeffs[idx(ib, jb)];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn try_div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        self.try_mul(&rhs.recip()?)
    }

    pub fn scale(&self, k: f64) -> Jet {
        let mut out = self.clone();
        for c in &mut out.coeffs {
            *c *= k;
        }
        out
    }

    pub fn add_scalar(&self, k: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    /// Compose a univariate Taylor series with the nonconstant part of `self`.
    ///
    /// `series[k]` must be f^(k)(c0)/k! where c0 is the constant term of the
    /// jet. The nonconstant part is nilpotent under truncation, so a Horner
    /// sweep over the series reproduces the composition exactly to `order`.
    fn compose(&self, series: &[f64]) -> Jet {
        debug_assert_eq!(series.len(), self.order + 1);
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        let mut acc = Jet::constant(series[self.order], self.order, self.base);
        for k in (0..self.order).rev() {
            acc = acc.try_mul(&w).unwrap();
            acc.coeffs[0] += series[k];
        }
        acc
    }

    /// Reciprocal; errors when the constant term vanishes.
    pub fn recip(&self) -> Result<Jet, JetError> {
        let c0 = self.value();
        if c0 == 0.0 || !c0.is_finite() {
            return Err(JetError::SingularCompose {
                op: "recip",
                why: format!("constant term {c0} is not invertible"),
            });
        }
        // 1/(c0 + w) = sum_k (-1)^k w^k / c0^{k+1}
        let mut series = vec![0.0; self.order + 1];
        let mut p = 1.0 / c0;
        for s in series.iter_mut() {
            *s = p;
            p *= -1.0 / c0;
        }
        Ok(self.compose(&series))
    }

    pub fn sin(&self) -> Jet {
        let c0 = self.value();
        let table = [c0.sin(), c0.cos(), -c0.sin(), -c0.cos()];
        let series: Vec<f64> =
            (0..=self.order).map(|k| table[k % 4] / FACTORIAL[k]).collect();
        self.compose(&series)
    }

    pub fn cos(&self) -> Jet {
        let c0 = self.value();
        let table = [c0.cos(), -c0.sin(), -c0.cos(), c0.sin()];
        let series: Vec<f64> =
            (0..=self.order).map(|k| table[k % 4] / FACTORIAL[k]).collect();
        self.compose(&series)
    }

    pub fn tan(&self) -> Result<Jet, JetError> {
        let c = self.cos();
        if c.value() == 0.0 {
            return Err(JetError::SingularCompose {
                op: "tan",
                why: format!("cos vanishes at argument {}", self.value()),
            });
        }
        self.sin().try_div(&c)
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        let series: Vec<f64> = (0..=self.order).map(|k| e / FACTORIAL[k]).collect();
        self.compose(&series)
    }

    pub fn ln(&self) -> Result<Jet, JetError> {
        let c0 = self.value();
        if c0 <= 0.0 || !c0.is_finite() {
            return Err(JetError::SingularCompose {
                op: "ln",
                why: format!("constant term {c0} is not positive"),
            });
        }
        let mut series = vec![0.0; self.order + 1];
        series[0] = c0.ln();
        // d^k/dx^k ln = (-1)^{k+1} (k-1)! / x^k  =>  coefficient (-1)^{k+1}/(k c0^k)
        let mut p = 1.0;
        for (k, s) in series.iter_mut().enumerate().skip(1) {
            p /= c0;
            *s = if k % 2 == 1 { p / k as f64 } else { -p / k as f64 };
        }
        Ok(self.compose(&series))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        self.powf(0.5).map_err(|_| JetError::SingularCompose {
            op: "sqrt",
            why: format!("constant term {} is not positive", self.value()),
        })
    }

    /// Real power with positive constant term (binomial series).
    pub fn powf(&self, p: f64) -> Result<Jet, JetError> {
        let c0 = self.value();
        if c0 <= 0.0 || !c0.is_finite() {
            return Err(JetError::SingularCompose {
                op: "powf",
                why: format!("constant term {c0} is not positive"),
            });
        }
        // binom(p, k) c0^{p-k}
        let mut series = vec![0.0; self.order + 1];
        let mut coef = c0.powf(p);
        series[0] = coef;
        for k in 1..=self.order {
            coef *= (p - (k as f64 - 1.0)) / (k as f64 * c0);
            series[k] = coef;
        }
        Ok(self.compose(&series))
    }

    /// Integer power by repeated squaring; valid for any base when n >= 0.
    pub fn powi(&self, n: i64) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut acc = Jet::constant(1.0, self.order, self.base);
        let mut b = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.try_mul(&b).unwrap();
            }
            e >>= 1;
            if e > 0 {
                b = b.try_mul(&b).unwrap();
            }
        }
        Ok(acc)
    }

    /// Largest absolute coefficient; a crude magnitude for tolerance scaling.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

// Operators panic on order mismatch: inside the engine every computation is
// carried out at a single explicitly chosen order, so a mismatch is a bug.
// Fallible entry points (`try_*`) are used wherever user input reaches jets.

impl std::ops::Add for &Jet {
    type Output = Jet;
    fn add(self, rhs: &Jet) -> Jet {
        self.try_add(rhs).expect("jet addition")
    }
}

impl std::ops::Sub for &Jet {
    type Output = Jet;
    fn sub(self, rhs: &Jet) -> Jet {
        self.try_sub(rhs).expect("jet subtraction")
    }
}

impl std::ops::Mul for &Jet {
    type Output = Jet;
    fn mul(self, rhs: &Jet) -> Jet {
        self.try_mul(rhs).expect("jet multiplication")
    }
}

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}
