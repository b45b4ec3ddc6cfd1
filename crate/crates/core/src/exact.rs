//! Exact scalar layer: signs, rationals, determinant signs and Gamma values
//! at half-integers.

use std::fmt;
use std::ops::{Div, Mul, Neg};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Arbitrary-precision fraction, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Sign of an exact quantity; the value of a chirotope entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    Neg,
    Zero,
    Pos,
}

impl Sign {
    pub fn of<T: Signed>(x: &T) -> Sign {
        if x.is_positive() {
            Sign::Pos
        } else if x.is_negative() {
            Sign::Neg
        } else {
            Sign::Zero
        }
    }

    pub fn from_ordering(o: std::cmp::Ordering) -> Sign {
        match o {
            std::cmp::Ordering::Less => Sign::Neg,
            std::cmp::Ordering::Equal => Sign::Zero,
            std::cmp::Ordering::Greater => Sign::Pos,
        }
    }

    pub fn is_zero(self) -> bool {
        self == Sign::Zero
    }

    /// `+`, `-` or `0`.
    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
        }
    }

    pub fn from_symbol(c: char) -> Option<Sign> {
        match c {
            '-' => Some(Sign::Neg),
            '0' => Some(Sign::Zero),
            '+' => Some(Sign::Pos),
            _ => None,
        }
    }

    pub fn to_i8(self) -> i8 {
        match self {
            Sign::Neg => -1,
            Sign::Zero => 0,
            Sign::Pos => 1,
        }
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Zero => Sign::Zero,
            Sign::Pos => Sign::Neg,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        match (self, rhs) {
            (Sign::Zero, _) | (_, Sign::Zero) => Sign::Zero,
            (a, b) if a == b => Sign::Pos,
            _ => Sign::Neg,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Clears denominators row by row. Returns the integer rows together with
/// the product of the (positive) row multipliers, so that
/// `det(m) = det(rows) / scale`.
pub fn clear_denominators(m: &[Vec<Rational>]) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut scale = BigInt::one();
    let rows = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            let out = row.iter().map(|x| x.numer() * (&l / x.denom())).collect();
            scale *= &l;
            out
        })
        .collect();
    (rows, scale)
}

/// Determinant of a square integer matrix by fraction-free (Bareiss)
/// elimination. Every division is exact.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        let pivot = &pivot_row[k];
        for row in bottom.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * pivot - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

fn assert_square(m: &[Vec<Rational>]) {
    assert!(
        m.iter().all(|r| r.len() == m.len()),
        "determinant requires a square matrix"
    );
}

/// Exact determinant of a square rational matrix.
pub fn det(m: &[Vec<Rational>]) -> Rational {
    assert_square(m);
    let (rows, scale) = clear_denominators(m);
    Rational::new(bareiss_det(rows), scale)
}

/// Exact sign of the determinant of a square rational matrix.
///
/// Panics if `m` is not square.
pub fn det_sign(m: &[Vec<Rational>]) -> Sign {
    assert_square(m);
    // Row multipliers are positive, so the integer determinant has the same sign.
    let (rows, _) = clear_denominators(m);
    Sign::of(&bareiss_det(rows))
}

/// Orientation of `d+1` integer points in `Z^d`, i.e. the sign of the
/// homogeneous determinant with rows `(p_i, 1)`.
///
/// Subtracting the first row from the others and expanding along the
/// column of ones reduces it to `(-1)^d · det(p_i - p_0)`.
pub fn orientation_int(points: &[&[BigInt]]) -> Sign {
    let d = points.len() - 1;
    let base = points[0];
    let diffs = points[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let s = Sign::of(&bareiss_det(diffs));
    if d % 2 == 1 {
        -s
    } else {
        s
    }
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "binomial({n}, {k}): k must not exceed n"
        )));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // acc = C(n, i) here, so the division is exact.
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

/// A value `q · π^(k/2)` with `q` rational, i.e. a rational multiple of a
/// power of `√π`. Products and quotients stay exact.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ScaledPi {
    q: Rational,
    k: i32,
}

impl ScaledPi {
    pub fn new(q: Rational, k: i32) -> ScaledPi {
        if q.is_zero() {
            ScaledPi { q, k: 0 }
        } else {
            ScaledPi { q, k }
        }
    }

    pub fn rational(q: Rational) -> ScaledPi {
        ScaledPi::new(q, 0)
    }

    pub fn one() -> ScaledPi {
        ScaledPi::rational(Rational::one())
    }

    pub fn sqrt_pi() -> ScaledPi {
        ScaledPi::new(Rational::one(), 1)
    }

    /// Rational coefficient.
    pub fn coefficient(&self) -> &Rational {
        &self.q
    }

    /// Power of `√π`.
    pub fn pi_half_power(&self) -> i32 {
        self.k
    }

    pub fn is_zero(&self) -> bool {
        self.q.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        let q = self.q.to_f64().unwrap_or(f64::NAN);
        q * std::f64::consts::PI.sqrt().powi(self.k)
    }
}

impl Mul for ScaledPi {
    type Output = ScaledPi;
    fn mul(self, rhs: ScaledPi) -> ScaledPi {
        ScaledPi::new(self.q * rhs.q, self.k + rhs.k)
    }
}

impl Div for ScaledPi {
    type Output = ScaledPi;
    fn div(self, rhs: ScaledPi) -> ScaledPi {
        assert!(!rhs.is_zero(), "division by zero ScaledPi");
        ScaledPi::new(self.q / rhs.q, self.k - rhs.k)
    }
}

impl fmt::Display for ScaledPi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.k {
            0 => write!(f, "{}", self.q),
            k if k % 2 == 0 => write!(f, "{}·π^{}", self.q, k / 2),
            k => write!(f, "{}·π^({}/2)", self.q, k),
        }
    }
}

/// `Γ(x)` for `x ∈ {1/2, 1, 3/2, 2, …}`, from `Γ(1) = 1`, `Γ(1/2) = √π` and
/// `Γ(x) = (x-1)·Γ(x-1)`.
pub fn half_gamma(x: &Rational) -> Result<ScaledPi> {
    let twice = x * Rational::from_integer(BigInt::from(2));
    let half = Rational::new(BigInt::one(), BigInt::from(2));
    if !twice.is_integer() || *x < half {
        return Err(Error::NotHalfInteger(x.to_string()));
    }
    let (mut acc, mut arg) = if x.is_integer() {
        (ScaledPi::one(), Rational::one())
    } else {
        (ScaledPi::sqrt_pi(), half)
    };
    while arg < *x {
        acc = acc * ScaledPi::rational(arg.clone());
        arg += Rational::one();
    }
    Ok(acc)
}

fn half_of(n: u64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(2))
}

/// Volume of the unit ball in `R^d`, `π^(d/2) / Γ(d/2 + 1)`.
pub fn ball_volume(d: u32) -> ScaledPi {
    let gamma = half_gamma(&half_of(u64::from(d) + 2)).expect("d/2 + 1 is a half-integer");
    ScaledPi::new(Rational::one(), d as i32) / gamma
}

/// `vol(B_{d-1}) / vol(B_d) = Γ(d/2 + 1) / (√π · Γ((d-1)/2 + 1))`.
pub fn ball_volume_ratio(d: u32) -> Result<ScaledPi> {
    if d < 1 {
        return Err(Error::InvalidArgument(
            "ball_volume_ratio needs d >= 1".into(),
        ));
    }
    let top = half_gamma(&half_of(u64::from(d) + 2))?;
    let bottom = half_gamma(&half_of(u64::from(d) + 1))?;
    Ok(top / (ScaledPi::sqrt_pi() * bottom))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(BigInt::from(n), BigInt::from(d))
    }

    fn ri(n: i64) -> Rational {
        r(n, 1)
    }

    fn identity(k: usize) -> Vec<Vec<Rational>> {
        (0..k)
            .map(|i| (0..k).map(|j| ri((i == j) as i64)).collect())
            .collect()
    }

    /// Laplace expansion along the first row.
    fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
        let n = m.len();
        if n == 1 {
            return m[0][0].clone();
        }
        let mut acc = Rational::zero();
        for c in 0..n {
            let minor: Vec<Vec<Rational>> = m[1..]
                .iter()
                .map(|row| {
                    row.iter()
                        .enumerate()
                        .filter(|(j, _)| *j != c)
                        .map(|(_, v)| v.clone())
                        .collect()
                })
                .collect();
            let term = &m[0][c] * cofactor_det(&minor);
            if c % 2 == 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }

    #[test]
    fn sign_algebra() {
        use Sign::*;
        for a in [Neg, Zero, Pos] {
            assert_eq!(-(-a), a);
            for b in [Neg, Zero, Pos] {
                assert_eq!(a * b, Sign::of(&(a.to_i8() as i32 * b.to_i8() as i32)));
            }
        }
    }

    #[test]
    fn det_sign_small_cases() {
        let id = identity(3);
        assert_eq!(det_sign(&id), Sign::Pos);
        let mut swapped = id.clone();
        swapped.swap(0, 1);
        assert_eq!(det_sign(&swapped), Sign::Neg);
        let mut repeated = id.clone();
        repeated[2] = repeated[0].clone();
        assert_eq!(det_sign(&repeated), Sign::Zero);
        assert_eq!(det_sign(&[vec![r(-1, 7)]]), Sign::Neg);
    }

    #[test]
    fn det_needs_pivoting() {
        let m = vec![
            vec![ri(0), ri(1), ri(2)],
            vec![ri(0), ri(3), ri(4)],
            vec![ri(5), ri(6), ri(7)],
        ];
        assert_eq!(det(&m), cofactor_det(&m));
        assert_eq!(det(&m), ri(-10));
    }

    #[test]
    fn det_sign_matches_cofactor_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..10_000 {
            let k = 1 + case % 5;
            let m: Vec<Vec<Rational>> = (0..k)
                .map(|_| {
                    (0..k)
                        .map(|_| r(rng.random_range(-6..=6), rng.random_range(1..=5)))
                        .collect()
                })
                .collect();
            let oracle = cofactor_det(&m);
            assert_eq!(det(&m), oracle);
            assert_eq!(det_sign(&m), Sign::of(&oracle));
        }
    }

    #[test]
    fn orientation_int_matches_homogeneous_det() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 1..=4usize {
            for _ in 0..200 {
                let pts: Vec<Vec<BigInt>> = (0..=d)
                    .map(|_| {
                        (0..d)
                            .map(|_| BigInt::from(rng.random_range(-3..=3)))
                            .collect()
                    })
                    .collect();
                let hom: Vec<Vec<Rational>> = pts
                    .iter()
                    .map(|p| {
                        p.iter()
                            .map(|c| Rational::from_integer(c.clone()))
                            .chain(std::iter::once(ri(1)))
                            .collect()
                    })
                    .collect();
                let refs: Vec<&[BigInt]> = pts.iter().map(|p| p.as_slice()).collect();
                assert_eq!(orientation_int(&refs), Sign::of(&cofactor_det(&hom)));
            }
        }
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(32, 3).unwrap(), BigUint::from(4960u32));
        assert_eq!(binomial(16, 4).unwrap(), BigUint::from(1820u32));
        assert_eq!(binomial(9, 0).unwrap(), BigUint::one());
        assert_eq!(binomial(0, 0).unwrap(), BigUint::one());
        assert!(binomial(3, 4).is_err());
    }

    #[test]
    fn half_gamma_values() {
        assert_eq!(half_gamma(&ri(1)).unwrap(), ScaledPi::one());
        assert_eq!(half_gamma(&r(1, 2)).unwrap(), ScaledPi::sqrt_pi());
        assert_eq!(half_gamma(&r(3, 2)).unwrap(), ScaledPi::new(r(1, 2), 1));
        assert_eq!(half_gamma(&r(5, 2)).unwrap(), ScaledPi::new(r(3, 4), 1));
        assert_eq!(half_gamma(&ri(5)).unwrap(), ScaledPi::rational(ri(24)));
        assert!(half_gamma(&r(1, 3)).is_err());
        assert!(half_gamma(&ri(0)).is_err());
        assert!(half_gamma(&r(-1, 2)).is_err());
    }

    #[test]
    fn half_gamma_recurrence() {
        for twice in 1..=40i64 {
            let x = r(twice, 2);
            let next = half_gamma(&(&x + ri(1))).unwrap();
            let scaled = ScaledPi::rational(x.clone()) * half_gamma(&x).unwrap();
            assert_eq!(next, scaled, "x = {x}");
        }
    }

    #[test]
    fn ball_ratio_values() {
        assert_eq!(ball_volume_ratio(1).unwrap(), ScaledPi::rational(r(1, 2)));
        assert_eq!(ball_volume_ratio(2).unwrap(), ScaledPi::new(ri(2), -2));
        assert_eq!(ball_volume_ratio(3).unwrap(), ScaledPi::rational(r(3, 4)));
        assert!(ball_volume_ratio(0).is_err());
        assert_eq!(ball_volume(0), ScaledPi::one());
        assert_eq!(ball_volume(1), ScaledPi::rational(ri(2)));
        assert_eq!(ball_volume(2), ScaledPi::new(ri(1), 2));
        assert_eq!(ball_volume(3), ScaledPi::new(r(4, 3), 2));
        for d in 1..=12 {
            let ratio = ball_volume(d - 1) / ball_volume(d);
            assert_eq!(ratio, ball_volume_ratio(d).unwrap());
        }
    }

    #[test]
    fn scaled_pi_zero_is_canonical() {
        assert_eq!(ScaledPi::new(ri(0), 3), ScaledPi::rational(ri(0)));
    }
}
