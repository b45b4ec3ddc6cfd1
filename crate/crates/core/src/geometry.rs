//! Points, simplices and hyperplanes over `Q^d`.
//!
//! Every predicate here is decided exactly. Distances to a common hyperplane
//! are compared through `|a·x + b|` (the norm of `a` cancels) and absolute
//! distance thresholds through `(a·x + b)^2 >= t2·|a|^2`, so no square root
//! appears in any decision.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::exact::{self, Rational, Sign};
use crate::{Error, Result};

/// A point of `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point(Vec<Rational>);

impl Point {
    pub fn new(coords: Vec<Rational>) -> Point {
        Point(coords)
    }

    pub fn from_ints(coords: &[i64]) -> Point {
        Point(
            coords
                .iter()
                .map(|&c| Rational::from_integer(c.into()))
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.0
    }

    pub fn norm_sq(&self) -> Rational {
        self.0.iter().map(|c| c * c).sum()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        use num_traits::ToPrimitive;
        self.0
            .iter()
            .map(|c| c.to_f64().unwrap_or(f64::NAN))
            .collect()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Common positive denominator of all coordinates, and the integer
/// coordinates obtained by scaling with it. Uniform positive scaling
/// preserves every orientation.
pub fn integer_coords<'a>(
    points: impl IntoIterator<Item = &'a Point> + Clone,
) -> (Vec<Vec<BigInt>>, BigInt) {
    let denom = points
        .clone()
        .into_iter()
        .flat_map(|p| p.0.iter())
        .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let rows = points
        .into_iter()
        .map(|p| {
            p.0.iter()
                .map(|c| c.numer() * (&denom / c.denom()))
                .collect()
        })
        .collect();
    (rows, denom)
}

/// An ordered `(d+1)`-tuple of points in `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplexTuple {
    points: Vec<Point>,
}

impl SimplexTuple {
    pub fn new(points: Vec<Point>) -> Result<SimplexTuple> {
        let d = points.first().map(Point::dim).unwrap_or(0);
        if points.len() != d + 1 {
            return Err(Error::DimensionMismatch {
                expected: d + 1,
                found: points.len(),
            });
        }
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        Ok(SimplexTuple { points })
    }

    pub fn dim(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn orientation(&self) -> Sign {
        orientation(self)
    }

    pub fn is_nondegenerate(&self) -> bool {
        !self.orientation().is_zero()
    }
}

/// Sign of the `(d+1)×(d+1)` determinant whose rows are `(p_i, 1)`.
pub fn orientation(t: &SimplexTuple) -> Sign {
    let (rows, _) = integer_coords(t.points.iter());
    let refs: Vec<&[BigInt]> = rows.iter().map(Vec::as_slice).collect();
    exact::orientation_int(&refs)
}

/// The affine functional `a·x + b`; its zero set is the hyperplane and its
/// sign tells the side.
#[derive(Clone, Debug)]
pub struct Hyperplane {
    a: Vec<Rational>,
    b: Rational,
}

impl Hyperplane {
    pub fn new(a: Vec<Rational>, b: Rational) -> Result<Hyperplane> {
        if a.iter().all(Zero::is_zero) {
            return Err(Error::InvalidArgument(
                "hyperplane normal must be nonzero".into(),
            ));
        }
        Ok(Hyperplane { a, b })
    }

    /// The hyperplane through `d` affinely independent points of `Q^d`,
    /// as `x ↦ det[(q_1,1); …; (q_d,1); (x,1)]` up to a positive factor.
    pub fn through(points: &[Point]) -> Result<Hyperplane> {
        let d = points.len();
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        // With X = L·x, h_L(X) = L^d·h(x), hence h(x) ∝ (L·a_L)·x + b_L.
        let (rows, scale) = integer_coords(points.iter());
        let refs: Vec<&[BigInt]> = rows.iter().map(Vec::as_slice).collect();
        let h = IntHyperplane::through(&refs)?;
        Ok(Hyperplane {
            a: h.a
                .into_iter()
                .map(|c| Rational::from_integer(c * &scale))
                .collect(),
            b: Rational::from_integer(h.b),
        })
    }

    pub fn normal(&self) -> &[Rational] {
        &self.a
    }

    pub fn constant(&self) -> &Rational {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.len()
    }

    pub fn normal_norm_sq(&self) -> Rational {
        self.a.iter().map(|c| c * c).sum()
    }

    /// `a·x + b`.
    pub fn offset(&self, x: &Point) -> Rational {
        debug_assert_eq!(x.dim(), self.dim());
        self.a
            .iter()
            .zip(&x.0)
            .map(|(a, c)| a * c)
            .sum::<Rational>()
            + &self.b
    }

    pub fn side(&self, x: &Point) -> Sign {
        Sign::of(&self.offset(x))
    }

    pub fn negated(&self) -> Hyperplane {
        Hyperplane {
            a: self.a.iter().map(|c| -c).collect(),
            b: -&self.b,
        }
    }

    pub fn scaled(&self, factor: &Rational) -> Hyperplane {
        assert!(
            factor.is_positive(),
            "only positive rescaling preserves orientation"
        );
        Hyperplane {
            a: self.a.iter().map(|c| c * factor).collect(),
            b: &self.b * factor,
        }
    }

    /// Distance of `x` to this hyperplane exceeds the distance of `y`.
    pub fn abs_offset_greater(&self, x: &Point, y: &Point) -> bool {
        self.offset(x).abs() > self.offset(y).abs()
    }

    /// Euclidean distance from `x` is at least `√t2`, decided as
    /// `(a·x + b)^2 >= t2·|a|^2`.
    pub fn dist_at_least(&self, x: &Point, t2: &Rational) -> bool {
        let off = self.offset(x);
        &off * &off >= t2 * self.normal_norm_sq()
    }

    /// Squared Euclidean distance from `x`, for reporting.
    pub fn dist_sq(&self, x: &Point) -> Rational {
        let off = self.offset(x);
        &off * &off / self.normal_norm_sq()
    }

    fn as_form(&self) -> LinearForm {
        LinearForm {
            coeffs: self.a.clone(),
            constant: self.b.clone(),
        }
    }
}

/// Equal iff the coefficient vectors differ by a positive factor.
impl PartialEq for Hyperplane {
    fn eq(&self, other: &Hyperplane) -> bool {
        if self.dim() != other.dim() {
            return false;
        }
        let Some(k) = self.a.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let ratio = &other.a[k] / &self.a[k];
        ratio.is_positive()
            && self.a.iter().zip(&other.a).all(|(x, y)| x * &ratio == *y)
            && &self.b * &ratio == other.b
    }
}

impl Eq for Hyperplane {}

/// A hyperplane through integer points with integer coefficients; the
/// allocation-light kernel behind the rational API.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntHyperplane {
    a: Vec<BigInt>,
    b: BigInt,
}

impl IntHyperplane {
    /// `x ↦ det[(q_1,1); …; (q_d,1); (x,1)]` for `d` points of `Z^d`.
    pub fn through(points: &[&[BigInt]]) -> Result<IntHyperplane> {
        let d = points.len();
        if let Some(p) = points.iter().find(|p| p.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.len(),
            });
        }
        // Cofactors along the last row of the homogeneous matrix.
        let mut coeffs: Vec<BigInt> = (0..=d)
            .map(|col| {
                let minor = points
                    .iter()
                    .map(|p| {
                        let mut row: Vec<BigInt> = p
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != col)
                            .map(|(_, v)| v.clone())
                            .collect();
                        if col < d {
                            row.push(BigInt::one());
                        }
                        row
                    })
                    .collect();
                let m = exact::bareiss_det(minor);
                if (d + col).is_multiple_of(2) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let b = coeffs.pop().expect("d+1 cofactors");
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::Degenerate);
        }
        Ok(IntHyperplane { a: coeffs, b })
    }

    /// The facet hyperplane opposite `points[i]`, oriented towards it.
    pub fn facet(points: &[&[BigInt]], i: usize) -> Result<IntHyperplane> {
        let facet: Vec<&[BigInt]> = points
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| *p)
            .collect();
        let h = IntHyperplane::through(&facet)?;
        match Sign::of(&h.offset(points[i])) {
            Sign::Pos => Ok(h),
            Sign::Neg => Ok(IntHyperplane {
                a: h.a.into_iter().map(|c| -c).collect(),
                b: -h.b,
            }),
            Sign::Zero => Err(Error::Degenerate),
        }
    }

    pub fn offset(&self, x: &[BigInt]) -> BigInt {
        self.a.iter().zip(x).map(|(a, c)| a * c).sum::<BigInt>() + &self.b
    }

    pub fn normal_norm_sq(&self) -> BigInt {
        self.a.iter().map(|c| c * c).sum()
    }

    /// `(a·x + b)^2 >= t2·|a|^2`.
    pub fn dist_at_least(&self, x: &[BigInt], t2: &Rational) -> bool {
        let off = self.offset(x);
        &off * &off * t2.denom() >= t2.numer() * self.normal_norm_sq()
    }
}

/// The hyperplane through the facet opposite `t[i]` (0-based), oriented so
/// that `t[i]` lies on its positive side.
pub fn facet_hyperplane(t: &SimplexTuple, i: usize) -> Result<Hyperplane> {
    let d = t.dim();
    if i > d {
        return Err(Error::IndexOutOfRange { index: i, max: d });
    }
    let facet: Vec<Point> = t
        .points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, p)| p.clone())
        .collect();
    let h = Hyperplane::through(&facet)?;
    match h.side(&t.points[i]) {
        Sign::Pos => Ok(h),
        Sign::Neg => Ok(h.negated()),
        Sign::Zero => Err(Error::Degenerate),
    }
}

/// Whether every vertex is at distance at least `√t2` from its opposite
/// facet hyperplane.
pub fn facet_margins_at_least(t: &SimplexTuple, t2: &Rational) -> Result<bool> {
    // Scaling every point by L scales distances by L.
    let (rows, scale) = integer_coords(t.points.iter());
    let refs: Vec<&[BigInt]> = rows.iter().map(Vec::as_slice).collect();
    let scaled_t2 = t2 * Rational::from_integer(&scale * &scale);
    for i in 0..=t.dim() {
        if !IntHyperplane::facet(&refs, i)?.dist_at_least(refs[i], &scaled_t2) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An exact affine map `x ↦ L·x + c` of `Q^d`, stored with `L^{-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineMap {
    linear: Vec<Vec<Rational>>,
    translation: Vec<Rational>,
    inverse: Vec<Vec<Rational>>,
}

impl AffineMap {
    pub fn linear(&self) -> &[Vec<Rational>] {
        &self.linear
    }

    pub fn translation(&self) -> &[Rational] {
        &self.translation
    }

    pub fn is_identity(&self) -> bool {
        self.translation.iter().all(Zero::is_zero)
            && self.linear.iter().enumerate().all(|(i, row)| {
                row.iter()
                    .enumerate()
                    .all(|(j, v)| if i == j { v.is_one() } else { v.is_zero() })
            })
    }

    pub fn apply(&self, x: &Point) -> Point {
        Point(
            self.linear
                .iter()
                .zip(&self.translation)
                .map(|(row, c)| row.iter().zip(&x.0).map(|(a, v)| a * v).sum::<Rational>() + c)
                .collect(),
        )
    }

    /// The image of `h` under the map: a functional `h'` with
    /// `h'(apply(x)) = h(x)` for all `x`.
    pub fn transform_hyperplane(&self, h: &Hyperplane) -> Hyperplane {
        // x = L^{-1}(y - c), so h(x) = (L^{-T} a)·y + b - a·L^{-1} c.
        let d = self.linear.len();
        let a: Vec<Rational> = (0..d)
            .map(|k| (0..d).map(|i| &h.a[i] * &self.inverse[i][k]).sum())
            .collect();
        let shift: Rational = a.iter().zip(&self.translation).map(|(x, c)| x * c).sum();
        Hyperplane { a, b: &h.b - shift }
    }
}

fn invert(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| {
                if i == j {
                    Rational::one()
                } else {
                    Rational::zero()
                }
            }));
            r
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !aug[r][col].is_zero())?;
        aug.swap(col, pivot);
        let inv = aug[col][col].recip();
        for v in aug[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !aug[r][col].is_zero() {
                let f = aug[r][col].clone();
                let pivot_row = aug[col].clone();
                for (v, p) in aug[r].iter_mut().zip(pivot_row) {
                    *v -= &f * p;
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// The affine map sending `t[0]` to the origin and `t[i]` to `e_i`,
/// together with the images of the tuple.
pub fn affine_normalize(t: &SimplexTuple) -> Result<(AffineMap, SimplexTuple)> {
    let d = t.dim();
    let base = &t.points[0];
    // Columns of V are p_i - p_0.
    let v: Vec<Vec<Rational>> = (0..d)
        .map(|row| {
            (1..=d)
                .map(|i| &t.points[i].0[row] - &base.0[row])
                .collect()
        })
        .collect();
    let linear = invert(&v).ok_or(Error::Degenerate)?;
    let translation = linear
        .iter()
        .map(|row| {
            -row.iter()
                .zip(&base.0)
                .map(|(a, c)| a * c)
                .sum::<Rational>()
        })
        .collect();
    let map = AffineMap {
        linear,
        translation,
        inverse: v,
    };
    let images = SimplexTuple {
        points: t.points.iter().map(|p| map.apply(p)).collect(),
    };
    Ok((map, images))
}

/// Unbounded cells of the arrangement spanned by the facets of a simplex,
/// in the normalized frame where the simplex is `(0, e_1, …, e_d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CellLabel {
    /// Unbounded cell not carrying a facet, `1 <= i <= d+1`.
    R(usize),
    /// Unbounded cell carrying a facet, `1 <= i <= d+1`.
    S(usize),
    Other,
    Boundary,
}

impl fmt::Display for CellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CellLabel::R(i) => write!(f, "R{i}"),
            CellLabel::S(i) => write!(f, "S{i}"),
            CellLabel::Other => write!(f, "OTHER"),
            CellLabel::Boundary => write!(f, "BOUNDARY"),
        }
    }
}

/// Required signs of `(x_1, …, x_d, Σx_j - 1)` on the open cell `label`.
fn cell_signs(label: CellLabel, d: usize) -> Option<Vec<Sign>> {
    use Sign::{Neg, Pos};
    let pattern = |at_i: Option<usize>, on: Sign, off: Sign, sum: Sign| {
        let mut v: Vec<Sign> = (1..=d)
            .map(|j| if Some(j) == at_i { on } else { off })
            .collect();
        v.push(sum);
        v
    };
    match label {
        CellLabel::R(i) if i >= 1 && i <= d => Some(pattern(Some(i), Pos, Neg, Pos)),
        CellLabel::R(i) if i == d + 1 => Some(pattern(None, Neg, Neg, Neg)),
        CellLabel::S(i) if i >= 1 && i <= d => Some(pattern(Some(i), Neg, Pos, Neg)),
        CellLabel::S(i) if i == d + 1 => Some(pattern(None, Pos, Pos, Pos)),
        _ => None,
    }
}

/// All `2(d+1)` labelled unbounded cells, R's first.
pub fn rs_cells(d: usize) -> impl Iterator<Item = CellLabel> {
    (1..=d + 1)
        .map(CellLabel::R)
        .chain((1..=d + 1).map(CellLabel::S))
}

/// Label of a point given in normalized coordinates.
///
/// For `d = 1` the cells `R(2)`/`S(1)` and `R(1)`/`S(2)` coincide; the R
/// label is returned.
pub fn classify_cell(x: &Point) -> CellLabel {
    let d = x.dim();
    let sum: Rational = x.0.iter().sum();
    let signs: Vec<Sign> =
        x.0.iter()
            .map(Sign::of)
            .chain(std::iter::once(Sign::of(&(sum - Rational::one()))))
            .collect();
    if signs.iter().any(|s| s.is_zero()) {
        return CellLabel::Boundary;
    }
    rs_cells(d)
        .find(|&label| cell_signs(label, d).as_deref() == Some(signs.as_slice()))
        .unwrap_or(CellLabel::Other)
}

/// `coeffs·x + constant`, used both as a strict inequality (`> 0`) and as
/// an equation (`= 0`).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct LinearForm {
    pub coeffs: Vec<Rational>,
    pub constant: Rational,
}

impl LinearForm {
    pub fn new(coeffs: Vec<Rational>, constant: Rational) -> LinearForm {
        LinearForm { coeffs, constant }
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        self.coeffs
            .iter()
            .zip(x)
            .map(|(a, v)| a * v)
            .sum::<Rational>()
            + &self.constant
    }

    /// Divide by the absolute value of the first nonzero entry so that
    /// positively proportional forms coincide.
    fn normalized(mut self) -> LinearForm {
        let lead = self
            .coeffs
            .iter()
            .chain(std::iter::once(&self.constant))
            .find(|c| !c.is_zero())
            .map(|c| c.abs());
        if let Some(lead) = lead {
            for c in self.coeffs.iter_mut() {
                *c /= &lead;
            }
            self.constant /= &lead;
        }
        self
    }

    fn is_constant(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }
}

/// Strict inequalities `s_k·f_k(x) > 0` describing the open cell.
pub fn cell_constraints(label: CellLabel, d: usize) -> Option<Vec<LinearForm>> {
    let signs = cell_signs(label, d)?;
    let sign_rat = |s: Sign| Rational::from_integer(BigInt::from(s.to_i8()));
    Some(
        signs
            .iter()
            .enumerate()
            .map(|(k, &s)| {
                let f = sign_rat(s);
                if k < d {
                    let mut coeffs = vec![Rational::zero(); d];
                    coeffs[k] = f;
                    LinearForm::new(coeffs, Rational::zero())
                } else {
                    LinearForm::new(vec![f.clone(); d], -f)
                }
            })
            .collect(),
    )
}

/// Decides whether some `x` satisfies every `ineq(x) > 0` and, if given,
/// `eq(x) = 0`. Exact: the equation removes one variable by substitution
/// and Fourier–Motzkin eliminates the rest.
pub fn strict_feasible(ineqs: &[LinearForm], eq: Option<&LinearForm>) -> Result<bool> {
    Ok(strict_feasible_witness(ineqs, eq)?.is_some())
}

/// Like [`strict_feasible`], returning a point of the feasible set.
pub fn strict_feasible_witness(
    ineqs: &[LinearForm],
    eq: Option<&LinearForm>,
) -> Result<Option<Vec<Rational>>> {
    let d = eq
        .map(|e| e.coeffs.len())
        .or_else(|| ineqs.first().map(|f| f.coeffs.len()))
        .unwrap_or(0);
    if let Some(f) = ineqs.iter().find(|f| f.coeffs.len() != d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: f.coeffs.len(),
        });
    }

    let mut system: Vec<LinearForm> = ineqs.to_vec();
    let mut solved_var = None;
    if let Some(eq) = eq {
        let k = eq
            .coeffs
            .iter()
            .position(|c| !c.is_zero())
            .ok_or(Error::DegenerateEquation)?;
        // x_k = -(Σ_{j≠k} e_j x_j + e_0) / e_k
        system = system
            .into_iter()
            .map(|g| {
                let factor = &g.coeffs[k] / &eq.coeffs[k];
                let coeffs = g
                    .coeffs
                    .iter()
                    .zip(&eq.coeffs)
                    .enumerate()
                    .map(|(j, (gj, ej))| {
                        if j == k {
                            Rational::zero()
                        } else {
                            gj - &factor * ej
                        }
                    })
                    .collect();
                LinearForm::new(coeffs, &g.constant - &factor * &eq.constant)
            })
            .collect();
        solved_var = Some(k);
    }

    // Systems before each elimination step, kept for back-substitution.
    let mut stages: Vec<(usize, Vec<LinearForm>)> = Vec::new();
    let mut current = dedup(system);
    for var in (0..d).filter(|&v| Some(v) != solved_var) {
        if has_contradiction(&current) {
            return Ok(None);
        }
        let (mut next, mut pos, mut neg) = (Vec::new(), Vec::new(), Vec::new());
        for f in &current {
            match Sign::of(&f.coeffs[var]) {
                Sign::Zero => next.push(f.clone()),
                Sign::Pos => pos.push(f),
                Sign::Neg => neg.push(f),
            }
        }
        for p in &pos {
            for n in &neg {
                let (cp, cn) = (p.coeffs[var].clone(), -&n.coeffs[var]);
                let coeffs = p
                    .coeffs
                    .iter()
                    .zip(&n.coeffs)
                    .enumerate()
                    .map(|(j, (a, b))| {
                        if j == var {
                            Rational::zero()
                        } else {
                            a * &cn + b * &cp
                        }
                    })
                    .collect();
                next.push(LinearForm::new(
                    coeffs,
                    &p.constant * &cn + &n.constant * &cp,
                ));
            }
        }
        stages.push((var, current));
        current = dedup(next);
    }
    if has_contradiction(&current) {
        return Ok(None);
    }

    let mut x = vec![Rational::zero(); d];
    for (var, forms) in stages.iter().rev() {
        x[*var] = pick_value(forms, *var, &x);
    }
    if let (Some(k), Some(eq)) = (solved_var, eq) {
        x[k] = Rational::zero();
        let rest = eq.eval(&x);
        x[k] = -rest / &eq.coeffs[k];
    }
    Ok(Some(x))
}

fn dedup(forms: Vec<LinearForm>) -> Vec<LinearForm> {
    forms
        .into_iter()
        .map(LinearForm::normalized)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

fn has_contradiction(forms: &[LinearForm]) -> bool {
    forms
        .iter()
        .any(|f| f.is_constant() && !f.constant.is_positive())
}

/// A value for `var` strictly inside the bounds the forms impose, given
/// the values of all other variables still present.
fn pick_value(forms: &[LinearForm], var: usize, x: &[Rational]) -> Rational {
    let mut lower: Option<Rational> = None;
    let mut upper: Option<Rational> = None;
    for f in forms {
        let c = &f.coeffs[var];
        if c.is_zero() {
            continue;
        }
        let rest: Rational = f
            .coeffs
            .iter()
            .zip(x)
            .enumerate()
            .filter(|&(j, _)| j != var)
            .map(|(_, (a, v))| a * v)
            .sum::<Rational>()
            + &f.constant;
        // c·x_var + rest > 0
        let bound = -rest / c;
        if c.is_positive() {
            lower = Some(match lower {
                Some(l) if l >= bound => l,
                _ => bound,
            });
        } else {
            upper = Some(match upper {
                Some(u) if u <= bound => u,
                _ => bound,
            });
        }
    }
    match (lower, upper) {
        (Some(l), Some(u)) => (l + u) / Rational::from_integer(2.into()),
        (Some(l), None) => l + Rational::one(),
        (None, Some(u)) => u - Rational::one(),
        (None, None) => Rational::zero(),
    }
}

/// The labelled R/S cells of the simplex `t` that `h` meets.
///
/// For `d = 2` no line meets all three R cells or all three S cells. From
/// `d = 3` on, any hyperplane crossing the relative interiors of all facets
/// meets every S cell; the R family has not been observed fully met.
pub fn lemma1_transversal_report(t: &SimplexTuple, h: &Hyperplane) -> Result<BTreeSet<CellLabel>> {
    let d = t.dim();
    if h.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: h.dim(),
        });
    }
    let (map, _) = affine_normalize(t)?;
    let eq = map.transform_hyperplane(h).as_form();
    let mut met = BTreeSet::new();
    for label in rs_cells(d) {
        let cell = cell_constraints(label, d).expect("valid R/S label");
        if strict_feasible(&cell, Some(&eq))? {
            met.insert(label);
        }
    }
    Ok(met)
}

/// Whether a report contains a whole R family or a whole S family.
pub fn is_full_family(met: &BTreeSet<CellLabel>, d: usize) -> bool {
    let rs = met.iter().filter(|l| matches!(l, CellLabel::R(_))).count();
    let ss = met.iter().filter(|l| matches!(l, CellLabel::S(_))).count();
    rs == d + 1 || ss == d + 1
}

/// Checks the facet certificate for `Q` keeping the orientation of `P`: for
/// each `i`, with `f_i` the facet hyperplane of `P` opposite `p_i`, (1) `q_i`
/// is strictly on the side of `p_i` and (2) both `p_i` and `q_i` are strictly
/// farther from `f_i` than every `q_j`, `j ≠ i`.
///
/// No planar pair has been found that is certified yet changes orientation.
/// In three dimensions such pairs exist (see the tests); the grid margin of
/// [`facet_margins_at_least`] is a much stronger hypothesis.
pub fn lemma2_certificate(p: &SimplexTuple, q: &SimplexTuple) -> Result<bool> {
    let d = p.dim();
    if q.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: q.dim(),
        });
    }
    // A common positive scaling of P and Q multiplies every facet functional
    // by a positive constant, so all sign and |offset| comparisons survive.
    let (rows, _) = integer_coords(p.points.iter().chain(&q.points));
    let (ps, qs): (Vec<&[BigInt]>, Vec<&[BigInt]>) = {
        let refs: Vec<&[BigInt]> = rows.iter().map(Vec::as_slice).collect();
        (refs[..=d].to_vec(), refs[d + 1..].to_vec())
    };
    for i in 0..=d {
        let f = IntHyperplane::facet(&ps, i)?;
        let off_p = f.offset(ps[i]);
        let off_q = f.offset(qs[i]);
        if !off_q.is_positive() {
            return Ok(false);
        }
        for (j, qj) in qs.iter().enumerate() {
            if j == i {
                continue;
            }
            let other = f.offset(qj).abs();
            if off_q <= other || off_p <= other {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
