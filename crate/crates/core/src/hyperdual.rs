//! Dual numbers with two seed directions and the mixed second derivative.
//!
//! A `HyperDual` is a + b·ε₁ + c·ε₂ + d·ε₁ε₂ with ε₁² = ε₂² = 0. Evaluating
//! a smooth expression with the inputs seeded along directions v (in `d1`)
//! and w (in `d2`) leaves exactly f, Df[v], Df[w] and D²f[v, w] in the four
//! slots. No step size is involved, so there is no truncation error to tune.
//!
//! Elementary functions with restricted domains return `Err` outside them
//! instead of producing NaN: fractional powers and square roots need a
//! strictly positive base, logarithms a positive argument, reciprocals a
//! nonzero one. Integer powers of negative bases are fine and are routed
//! through the integer rule automatically.

use crate::error::{Error, Result};
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    pub val: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl HyperDual {
    pub const ZERO: HyperDual = HyperDual::constant(0.0);
    pub const ONE: HyperDual = HyperDual::constant(1.0);

    pub const fn new(val: f64, d1: f64, d2: f64, d12: f64) -> Self {
        HyperDual { val, d1, d2, d12 }
    }

    /// Lift a real constant: all derivative parts are zero.
    pub const fn constant(val: f64) -> Self {
        HyperDual::new(val, 0.0, 0.0, 0.0)
    }

    /// True when the derivative parts vanish, i.e. the value is a constant
    /// with respect to both seed directions.
    pub fn is_constant(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 0.0 && self.d12 == 0.0
    }

    /// Chain rule for a scalar function with value `f`, derivative `fp` and
    /// second derivative `fpp` at `self.val`.
    fn chain(self, f: f64, fp: f64, fpp: f64) -> Self {
        HyperDual {
            val: f,
            d1: fp * self.d1,
            d2: fp * self.d2,
            d12: fpp * self.d1 * self.d2 + fp * self.d12,
        }
    }

    pub fn exp(self) -> Self {
        let e = self.val.exp();
        self.chain(e, e, e)
    }

    pub fn ln(self) -> Result<Self> {
        if self.val <= 0.0 {
            return Err(Error::Domain {
                op: "ln",
                arg: self.val,
                why: "argument must be positive",
            });
        }
        let v = self.val;
        Ok(self.chain(v.ln(), 1.0 / v, -1.0 / (v * v)))
    }

    pub fn sqrt(self) -> Result<Self> {
        // Treated as the power 1/2: the derivative is singular at zero, so
        // the base must be strictly positive.
        self.powf(0.5)
    }

    pub fn recip(self) -> Result<Self> {
        if self.val == 0.0 {
            return Err(Error::Domain {
                op: "recip",
                arg: 0.0,
                why: "division by zero",
            });
        }
        let v = self.val;
        Ok(self.chain(1.0 / v, -1.0 / (v * v), 2.0 / (v * v * v)))
    }

    pub fn div(self, rhs: Self) -> Result<Self> {
        Ok(self * rhs.recip()?)
    }

    /// Integer power. Negative exponents need a nonzero base.
    pub fn powi(self, n: i32) -> Result<Self> {
        if n < 0 && self.val == 0.0 {
            return Err(Error::Domain {
                op: "powi",
                arg: 0.0,
                why: "negative power of zero",
            });
        }
        let v = self.val;
        let k = f64::from(n);
        let f = v.powi(n);
        let fp = if n == 0 { 0.0 } else { k * v.powi(n - 1) };
        let fpp = if n == 0 || n == 1 {
            0.0
        } else {
            k * (k - 1.0) * v.powi(n - 2)
        };
        Ok(self.chain(f, fp, fpp))
    }

    /// Real power. Integer exponents are delegated to [`powi`](Self::powi);
    /// non-integer exponents require a strictly positive base, and violating
    /// that is a hard error rather than a NaN.
    pub fn powf(self, k: f64) -> Result<Self> {
        if k.fract() == 0.0 && k.abs() <= 1e9 {
            return self.powi(k as i32);
        }
        if self.val <= 0.0 {
            return Err(Error::Domain {
                op: "powf",
                arg: self.val,
                why: "fractional power of non-positive base",
            });
        }
        let v = self.val;
        let f = v.powf(k);
        Ok(self.chain(f, k * v.powf(k - 1.0), k * (k - 1.0) * v.powf(k - 2.0)))
    }

    /// General power a^b = exp(b ln a). When the exponent is a constant the
    /// real-power rule applies instead, which also admits negative bases for
    /// integer exponents.
    pub fn pow(self, rhs: Self) -> Result<Self> {
        if rhs.is_constant() {
            return self.powf(rhs.val);
        }
        if self.val <= 0.0 {
            return Err(Error::Domain {
                op: "pow",
                arg: self.val,
                why: "variable exponent needs a positive base",
            });
        }
        Ok((rhs * self.ln()?).exp())
    }

    pub fn scale(self, k: f64) -> Self {
        HyperDual {
            val: k * self.val,
            d1: k * self.d1,
            d2: k * self.d2,
            d12: k * self.d12,
        }
    }
}

impl Add for HyperDual {
    type Output = HyperDual;
    fn add(self, rhs: Self) -> Self {
        HyperDual {
            val: self.val + rhs.val,
            d1: self.d1 + rhs.d1,
            d2: self.d2 + rhs.d2,
            d12: self.d12 + rhs.d12,
        }
    }
}

impl Sub for HyperDual {
    type Output = HyperDual;
    fn sub(self, rhs: Self) -> Self {
        HyperDual {
            val: self.val - rhs.val,
            d1: self.d1 - rhs.d1,
            d2: self.d2 - rhs.d2,
            d12: self.d12 - rhs.d12,
        }
    }
}

impl Mul for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: Self) -> Self {
        // Leibniz twice over: the mixed part collects one derivative from
        // each factor in both orders.
        HyperDual {
            val: self.val * rhs.val,
            d1: self.val * rhs.d1 + self.d1 * rhs.val,
            d2: self.val * rhs.d2 + self.d2 * rhs.val,
            d12: self.val * rhs.d12 + self.d1 * rhs.d2 + self.d2 * rhs.d1 + self.d12 * rhs.val,
        }
    }
}

impl Neg for HyperDual {
    type Output = HyperDual;
    fn neg(self) -> Self {
        self.scale(-1.0)
    }
}

impl Add<f64> for HyperDual {
    type Output = HyperDual;
    fn add(self, rhs: f64) -> Self {
        HyperDual {
            val: self.val + rhs,
            ..self
        }
    }
}

impl Sub<f64> for HyperDual {
    type Output = HyperDual;
    fn sub(self, rhs: f64) -> Self {
        HyperDual {
            val: self.val - rhs,
            ..self
        }
    }
}

impl Mul<f64> for HyperDual {
    type Output = HyperDual;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<HyperDual> for f64 {
    type Output = HyperDual;
    fn mul(self, rhs: HyperDual) -> HyperDual {
        rhs.scale(self)
    }
}
