//! Truncated power series `c_0 + c_1 z + ... + c_N z^N`.

use std::io::Write;
use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Coefficients `c_0..=c_N` of a power series truncated at order `N`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSeries {
    coeffs: Vec<f64>,
}

impl CoefficientSeries {
    /// Builds a series from its coefficients; the truncation order is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        CoefficientSeries { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        Self::new(vec![0.0; order + 1])
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zeros(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.coeffs.iter()
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    fn check_orders(&self, other: &Self) {
        assert_eq!(self.order(), other.order(), "series orders differ");
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Self) -> Self {
        self.check_orders(other);
        let a = &self.coeffs;
        let b = &other.coeffs;
        let out = (0..a.len())
            .map(|n| a[..=n].iter().zip(b[..=n].iter().rev()).map(|(x, y)| x * y).sum())
            .collect();
        Self::new(out)
    }

    /// Truncated quotient `self / other`; needs `other[0] != 0`.
    pub fn div(&self, other: &Self) -> Result<Self> {
        self.check_orders(other);
        let b = &other.coeffs;
        if b[0] == 0.0 {
            return Err(Error::Domain("series division by a series with zero constant term".into()));
        }
        let mut q = Vec::with_capacity(b.len());
        for n in 0..b.len() {
            let acc: f64 = q.iter().zip(b[1..=n].iter().rev()).map(|(x, y): (&f64, &f64)| x * y).sum();
            q.push((self.coeffs[n] - acc) / b[0]);
        }
        Ok(Self::new(q))
    }

    /// `exp` of the series via `n e_n = Σ_{k=1}^{n} k f_k e_{n-k}`.
    pub fn exp(&self) -> Self {
        let f = &self.coeffs;
        let mut e = Vec::with_capacity(f.len());
        e.push(f[0].exp());
        let df: Vec<f64> = f.iter().enumerate().map(|(k, c)| k as f64 * c).collect();
        for n in 1..f.len() {
            let acc: f64 = df[1..=n].iter().zip(e.iter().rev()).map(|(x, y)| x * y).sum();
            e.push(acc / n as f64);
        }
        Self::new(e)
    }

    /// Termwise antiderivative vanishing at 0, truncated to the same order.
    pub fn integral(&self) -> Self {
        let mut out = vec![0.0; self.coeffs.len()];
        for n in 1..out.len() {
            out[n] = self.coeffs[n - 1] / n as f64;
        }
        Self::new(out)
    }

    /// Sum of all retained coefficients, i.e. the truncated series at `z = 1`.
    pub fn sum(&self) -> f64 {
        neumaier_sum(self.coeffs.iter().copied())
    }

    /// Partial sums `Σ_{n<=j} c_n` for every `j`.
    pub fn cumulative(&self) -> Vec<f64> {
        let mut acc = Accumulator::default();
        self.coeffs
            .iter()
            .map(|&c| {
                acc.add(c);
                acc.value()
            })
            .collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// Sup-norm distance to another series of the same order.
    pub fn sup_distance(&self, other: &Self) -> f64 {
        self.check_orders(other);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Writes `n,pmf,cdf` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "n,pmf,cdf")?;
        for (n, (p, c)) in self.coeffs.iter().zip(self.cumulative()).enumerate() {
            writeln!(out, "{n},{p:.16e},{c:.16e}")?;
        }
        Ok(())
    }
}

impl Index<usize> for CoefficientSeries {
    type Output = f64;

    fn index(&self, n: usize) -> &f64 {
        &self.coeffs[n]
    }
}

impl Add for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn add(self, rhs: Self) -> CoefficientSeries {
        self.check_orders(rhs);
        CoefficientSeries::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn sub(self, rhs: Self) -> CoefficientSeries {
        self.check_orders(rhs);
        CoefficientSeries::new(self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect())
    }
}

impl Mul for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn mul(self, rhs: Self) -> CoefficientSeries {
        CoefficientSeries::mul(self, rhs)
    }
}

impl Neg for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn neg(self) -> CoefficientSeries {
        self.scale(-1.0)
    }
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct Accumulator {
    sum: f64,
    comp: f64,
}

impl Accumulator {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn neumaier_sum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut acc = Accumulator::default();
    for x in xs {
        acc.add(x);
    }
    acc.value()
}
