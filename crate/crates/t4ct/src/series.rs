//! Exact counting pipeline: ternary-tree series, skeleton closed forms,
//! forest convolutions, and the toroidal/planar assembly of the sequence
//! 0, 1, 6, 40, 268, 1801, 12120, ...
//!
//! Everything is exact big-integer arithmetic; divisions assert exactness.

use num_bigint::BigInt;

use crate::{Error, Result};

/// Truncated power series with exact integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    /// coefficient of z^i at index i
    pub coeffs: Vec<BigInt>,
}

impl Series {
    pub fn zero(order: usize) -> Series {
        Series {
            coeffs: vec![BigInt::from(0); order + 1],
        }
    }

    pub fn constant(c: i64, order: usize) -> Series {
        let mut s = Series::zero(order);
        s.coeffs[0] = BigInt::from(c);
        s
    }

    pub fn z(order: usize) -> Series {
        let mut s = Series::zero(order);
        if order >= 1 {
            s.coeffs[1] = BigInt::from(1);
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, n: usize) -> &BigInt {
        &self.coeffs[n]
    }

    pub fn add(&self, other: &Series) -> Series {
        assert_eq!(self.order(), other.order());
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Series) -> Series {
        assert_eq!(self.order(), other.order());
        Series {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn scale(&self, c: i64) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn mul(&self, other: &Series) -> Series {
        assert_eq!(self.order(), other.order());
        let n = self.order();
        let mut coeffs = vec![BigInt::from(0); n + 1];
        for i in 0..=n {
            if self.coeffs[i] == BigInt::from(0) {
                continue;
            }
            for j in 0..=n - i {
                let p = &self.coeffs[i] * &other.coeffs[j];
                coeffs[i + j] += p;
            }
        }
        Series { coeffs }
    }

    pub fn pow(&self, e: usize) -> Series {
        let mut acc = Series::constant(1, self.order());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Division; the divisor needs a unit constant term and the quotient must
    /// stay integral (asserted).
    pub fn div(&self, other: &Series) -> Result<Series> {
        assert_eq!(self.order(), other.order());
        let unit = &other.coeffs[0];
        if unit != &BigInt::from(1) && unit != &BigInt::from(-1) {
            return Err(Error::Internal(
                "series division needs a unit constant term".into(),
            ));
        }
        let n = self.order();
        let mut q = vec![BigInt::from(0); n + 1];
        for i in 0..=n {
            let mut acc = self.coeffs[i].clone();
            for j in 0..i {
                acc -= &q[j] * &other.coeffs[i - j];
            }
            let (quot, rem) = num_integer_div_rem(&acc, unit);
            if rem != BigInt::from(0) {
                return Err(Error::Internal(format!(
                    "series division is not exact at order {i}"
                )));
            }
            q[i] = quot;
        }
        Ok(Series { coeffs: q })
    }

    /// Composition self(w) where w has zero constant term.
    pub fn compose(&self, w: &Series) -> Series {
        assert_eq!(self.order(), w.order());
        assert_eq!(w.coeffs[0], BigInt::from(0), "inner series needs w(0) = 0");
        let n = self.order();
        // Horner: ((a_n w + a_{n-1}) w + ...) + a_0
        let mut acc = Series::zero(n);
        for i in (0..=n).rev() {
            acc = acc.mul(w);
            acc.coeffs[0] += &self.coeffs[i];
        }
        acc
    }
}

fn num_integer_div_rem(a: &BigInt, b: &BigInt) -> (BigInt, BigInt) {
    (a / b, a % b)
}

pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::from(0);
    }
    let k = k.min(n - k);
    let mut num = BigInt::from(1);
    for i in 0..k {
        num *= n - i;
        num /= i + 1; // always exact for running binomials
    }
    num
}

fn exact_div(a: BigInt, b: i64) -> Result<BigInt> {
    let d = BigInt::from(b);
    if &a % &d != BigInt::from(0) {
        return Err(Error::Internal(format!("non-exact division of {a} by {b}")));
    }
    Ok(a / d)
}

// ---------------------------------------------------------------------------
// Named series and sequences
// ---------------------------------------------------------------------------

/// A(z) = 1 + z A(z)^3, the leaf-rooted ternary tree series.
pub fn ternary_series(order: usize) -> Series {
    let mut a = Series::constant(1, order);
    // the fixed point gains one correct coefficient per iteration
    for _ in 0..=order {
        let mut next = a.pow(3).mul(&Series::z(order));
        next.coeffs[0] += 1;
        a = next;
    }
    a
}

/// Closed form for ternary trees: |A(n)| = C(3n, n) / (2n + 1).
pub fn ternary_closed(n: u64) -> Result<BigInt> {
    exact_div(binomial(3 * n, n), 2 * n as i64 + 1)
}

/// Rooted 4-connected planar triangulations of the quadrangle with a marked
/// corner: 4/(n+1) C(3n+1, n), which also equals 4 [z^n] A(z)^2.
pub fn planar_count(n: u64) -> Result<BigInt> {
    exact_div(binomial(3 * n + 1, n) * 4, n as i64 + 1)
}

/// Square skeletons: (3^n - (-1)^n) / 4.
pub fn square_skeleton_count(n: u64) -> Result<BigInt> {
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    exact_div(BigInt::from(3).pow(n as u32) - sign, 4)
}

/// Hexagon skeletons: (n-2) 3^(n-1) + (5 3^(n-1) + (-1)^n) / 4.
pub fn hexagon_skeleton_count(n: u64) -> Result<BigInt> {
    if n == 0 {
        return Ok(BigInt::from(0));
    }
    let p = BigInt::from(3).pow((n - 1) as u32);
    let sign = if n.is_multiple_of(2) { 1 } else { -1 };
    let second = exact_div(&p * 5 + sign, 4)?;
    Ok((BigInt::from(n as i64) - 2) * &p + second)
}

/// Combined skeletons S(n) = S^s(n) + S^h(n)/2 = ((-1)^(n-1) + (3+4n) 3^(n-1)) / 8.
pub fn skeleton_count(n: u64) -> Result<BigInt> {
    if n == 0 {
        return Ok(BigInt::from(0));
    }
    let sign = if n.is_multiple_of(2) { -1 } else { 1 };
    let p = BigInt::from(3).pow((n - 1) as u32);
    exact_div((BigInt::from(3) + 4 * n as i64) * p + sign, 8)
}

/// All three skeleton counts at once.
pub fn skeleton_counts(n: u64) -> Result<(BigInt, BigInt, BigInt)> {
    let ss = square_skeleton_count(n)?;
    let sh = hexagon_skeleton_count(n)?;
    let s = skeleton_count(n)?;
    let twice = &ss * 2 + &sh;
    if &s * 2 != twice {
        return Err(Error::Internal("S != S^s + S^h/2".into()));
    }
    Ok((ss, sh, s))
}

/// Forests: F(n, k) = [z^n] A(z)^k, by exact convolution.
pub fn forest_count(n: usize, k: usize) -> BigInt {
    let a = ternary_series(n);
    a.pow(k).coeff(n).clone()
}

/// Closed form via Lagrange inversion, used as an independent check:
/// F(n, k) = k/(3n+k) C(3n+k, n) for k >= 1.
pub fn forest_closed(n: u64, k: u64) -> Result<BigInt> {
    if k == 0 {
        return Ok(BigInt::from((n == 0) as i64));
    }
    exact_div(binomial(3 * n + k, n) * k as i64, (3 * n + k) as i64)
}

/// Toroidal parts: |T^t_c(n)| = sum_k S(k) F(n-k, 2k-2).
pub fn toroidal_count(n: usize) -> Result<BigInt> {
    let a = ternary_series(n);
    let mut total = BigInt::from(0);
    for k in 1..=n {
        let f = a.pow(2 * k - 2).coeff(n - k).clone();
        total += skeleton_count(k as u64)? * f;
    }
    Ok(total)
}

/// Rooted essentially 4-connected toroidal triangulations:
/// |T_h(n)| = (1/4) sum_k |T^p(n-k)| |T^t_c(k)|.
pub fn total_count(n: usize) -> Result<BigInt> {
    let mut total = BigInt::from(0);
    for k in 1..=n {
        total += planar_count((n - k) as u64)? * toroidal_count(k)?;
    }
    exact_div(total, 4)
}

// ---------------------------------------------------------------------------
// Generating-function routes
// ---------------------------------------------------------------------------

/// S(z) = z(1-z) / ((1+z)(1-3z)^2).
pub fn skeleton_series(order: usize) -> Result<Series> {
    let z = Series::z(order);
    let one = Series::constant(1, order);
    let num = z.mul(&one.sub(&z));
    let den = one.add(&z).mul(&one.sub(&z.scale(3)).pow(2));
    num.div(&den)
}

/// S^s(z) = z / (1 - 2z - 3z^2).
pub fn square_skeleton_series(order: usize) -> Result<Series> {
    let z = Series::z(order);
    let den = Series::constant(1, order)
        .sub(&z.scale(2))
        .sub(&z.mul(&z).scale(3));
    z.div(&den)
}

/// S^h(z) = 4 z^2 / ((z+1)(3z-1)^2).
pub fn hexagon_skeleton_series(order: usize) -> Result<Series> {
    let z = Series::z(order);
    let one = Series::constant(1, order);
    let num = z.mul(&z).scale(4);
    let den = z.add(&one).mul(&z.scale(3).sub(&one).pow(2));
    num.div(&den)
}

/// Grand Motzkin paths: GM(z) = 1/sqrt(1 - 2z - 3z^2); the coefficients are
/// the central trinomial numbers, computed combinatorially.
pub fn grand_motzkin_series(order: usize) -> Series {
    let mut coeffs = Vec::with_capacity(order + 1);
    for n in 0..=order as u64 {
        let mut total = BigInt::from(0);
        for j in 0..=n / 2 {
            total += binomial(n, 2 * j) * binomial(2 * j, j);
        }
        coeffs.push(total);
    }
    Series { coeffs }
}

/// T^t_c(z) = (z - z^2 A^2) / ((z A^2 + 1)(3 z A^2 - 1)^2); also equals
/// S(zA^2)/A^2 by the forest substitution.
pub fn toroidal_series_closed(order: usize) -> Result<Series> {
    let a = ternary_series(order);
    let z = Series::z(order);
    let za2 = z.mul(&a.pow(2));
    let one = Series::constant(1, order);
    let num = z.sub(&z.mul(&za2));
    let den = za2.add(&one).mul(&za2.scale(3).sub(&one).pow(2));
    num.div(&den)
}

/// The forest-decomposition route: T^t_c(z) = S(z A^2) / A^2 with
/// S = S^s + S^h / 2 handled without halves by doubling.
pub fn toroidal_series_decomposition(order: usize) -> Result<Series> {
    let a = ternary_series(order);
    let za2 = Series::z(order).mul(&a.pow(2));
    let ms = square_skeleton_series(order)?.compose(&za2).div(&a.pow(2))?;
    let mh = hexagon_skeleton_series(order)?.compose(&za2).div(&a.pow(2))?;
    // T^t = M^s + M^h/2: compute 2 T^t and halve exactly
    let twice = ms.scale(2).add(&mh);
    let mut coeffs = Vec::with_capacity(order + 1);
    for c in &twice.coeffs {
        if c % 2 != BigInt::from(0) {
            return Err(Error::Internal("M^h series has an odd coefficient".into()));
        }
        coeffs.push(c / 2);
    }
    Ok(Series { coeffs })
}

/// T_h(z) = z A / (7 z A^2 - 21 z A + 9 z + 1).
pub fn total_series_closed(order: usize) -> Result<Series> {
    let a = ternary_series(order);
    let z = Series::z(order);
    let num = z.mul(&a);
    let den = z
        .mul(&a.pow(2))
        .scale(7)
        .sub(&z.mul(&a).scale(21))
        .add(&z.scale(9))
        .add(&Series::constant(1, order));
    num.div(&den)
}

// ---------------------------------------------------------------------------
// The assembled table
// ---------------------------------------------------------------------------

/// All named sequences up to an order.
pub struct CountTable {
    pub order: usize,
    pub ternary: Vec<BigInt>,
    pub planar: Vec<BigInt>,
    pub square_skeleton: Vec<BigInt>,
    pub hexagon_skeleton: Vec<BigInt>,
    pub skeleton: Vec<BigInt>,
    pub toroidal: Vec<BigInt>,
    pub total: Vec<BigInt>,
}

/// Builds the table through the convolution pipeline, cross-checking every
/// order against the closed forms and the generating-function routes.
pub fn count_table(order: usize) -> Result<CountTable> {
    let a = ternary_series(order);
    let a2 = a.pow(2);
    let toroidal_closed = toroidal_series_closed(order)?;
    let total_closed = total_series_closed(order)?;
    let mut t = CountTable {
        order,
        ternary: Vec::new(),
        planar: Vec::new(),
        square_skeleton: Vec::new(),
        hexagon_skeleton: Vec::new(),
        skeleton: Vec::new(),
        toroidal: Vec::new(),
        total: Vec::new(),
    };
    for n in 0..=order {
        let nn = n as u64;
        let tern = ternary_closed(nn)?;
        if &tern != a.coeff(n) {
            return Err(Error::Internal("ternary closed form disagrees".into()));
        }
        let planar = planar_count(nn)?;
        if planar != a2.coeff(n) * 4 {
            return Err(Error::Internal("planar closed form disagrees".into()));
        }
        let (ss, sh, s) = if n == 0 {
            (BigInt::from(0), BigInt::from(0), BigInt::from(0))
        } else {
            skeleton_counts(nn)?
        };
        t.ternary.push(tern);
        t.planar.push(planar);
        t.square_skeleton.push(ss);
        t.hexagon_skeleton.push(sh);
        t.skeleton.push(s);
    }
    // toroidal convolution: sum_k S(k) [z^(n-k)] A^(2k-2), with the powers of
    // A^2 accumulated incrementally
    let mut toroidal = vec![BigInt::from(0); order + 1];
    let mut power = Series::constant(1, order); // A^(2k-2) for k = 1
    for k in 1..=order {
        let s_k = &t.skeleton[k];
        for n in k..=order {
            toroidal[n] += s_k * power.coeff(n - k);
        }
        power = power.mul(&a2);
    }
    for (n, v) in toroidal.iter().enumerate() {
        if v != toroidal_closed.coeff(n) {
            return Err(Error::Internal(
                "toroidal convolution disagrees with its generating function".into(),
            ));
        }
    }
    // total convolution: (1/4) sum_k planar(n-k) toroidal(k)
    for n in 0..=order {
        let mut acc = BigInt::from(0);
        for k in 1..=n {
            acc += &t.planar[n - k] * &toroidal[k];
        }
        let total = exact_div(acc, 4)?;
        if &total != total_closed.coeff(n) {
            return Err(Error::Internal(
                "total convolution disagrees with its generating function".into(),
            ));
        }
        t.total.push(total);
    }
    t.toroidal = toroidal;
    Ok(t)
}
