//! Chirotopes: one orientation sign per increasing `(d+1)`-subset of the
//! point labels, extended to ordered tuples by permutation parity.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{orientation_int, Sign};
use crate::sampling::PointConfig;
use crate::{Error, Result};

/// Number of `k`-subsets of an `n`-set, as a machine integer.
pub fn subset_count(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Lexicographic iterator over increasing `k`-subsets of `0..n`.
#[derive(Clone, Debug)]
pub struct Subsets {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Subsets {
    pub fn new(n: usize, k: usize) -> Subsets {
        let current = if k <= n { Some((0..k).collect()) } else { None };
        Subsets { n, current }
    }
}

impl Iterator for Subsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.take()?;
        let k = out.len();
        let mut next = out.clone();
        // Rightmost position that can still be incremented.
        if let Some(i) = (0..k).rev().find(|&i| next[i] < self.n - k + i) {
            next[i] += 1;
            for j in i + 1..k {
                next[j] = next[j - 1] + 1;
            }
            self.current = Some(next);
        }
        Some(out)
    }
}

/// All increasing `(d+1)`-subsets of `0..n` in lexicographic order.
pub fn enumerate_subsets(n: usize, d: usize) -> Result<Vec<Vec<usize>>> {
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= d+1, got n={n}, d={d}"
        )));
    }
    Ok(Subsets::new(n, d + 1).collect())
}

/// Position of an increasing subset of `0..n` in lexicographic order.
pub fn subset_rank(n: usize, subset: &[usize]) -> usize {
    let k = subset.len();
    let tail: usize = subset
        .iter()
        .enumerate()
        .map(|(i, &c)| subset_count(n - 1 - c, k - i))
        .sum();
    subset_count(n, k) - 1 - tail
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chirotope {
    d: usize,
    n: usize,
    signs: Vec<Sign>,
}

/// How two chirotopes disagree on one subset.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DiffKind {
    /// `+` against `-`.
    Flip,
    /// One side is `0`.
    Degenerate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffEntry {
    /// 0-based increasing subset.
    pub subset: Vec<usize>,
    pub a: Sign,
    pub b: Sign,
    pub kind: DiffKind,
}

impl Chirotope {
    pub fn from_signs(d: usize, n: usize, signs: Vec<Sign>) -> Result<Chirotope> {
        let expected = subset_count(n, d + 1);
        if signs.len() != expected || n < d + 1 {
            return Err(Error::InvalidArgument(format!(
                "chirotope with d={d}, n={n} needs {expected} signs, got {}",
                signs.len()
            )));
        }
        Ok(Chirotope { d, n, signs })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len_points(&self) -> usize {
        self.n
    }

    pub fn signs(&self) -> &[Sign] {
        &self.signs
    }

    pub fn is_general_position(&self) -> bool {
        !self.signs.iter().any(|s| s.is_zero())
    }

    pub fn subsets(&self) -> Subsets {
        Subsets::new(self.n, self.d + 1)
    }

    /// Sign of an increasing 0-based subset.
    pub fn sign_of_subset(&self, subset: &[usize]) -> Sign {
        self.signs[subset_rank(self.n, subset)]
    }

    /// Orientation of an ordered tuple of distinct 0-based labels.
    pub fn orientation_of_ordered(&self, tuple: &[usize]) -> Result<Sign> {
        if tuple.len() != self.d + 1 {
            return Err(Error::DimensionMismatch {
                expected: self.d + 1,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&i| i >= self.n) {
            return Err(Error::IndexOutOfRange {
                index: bad,
                max: self.n - 1,
            });
        }
        let mut sorted = tuple.to_vec();
        // Parity by counting inversions; tuples are short.
        let mut odd = false;
        for i in 0..sorted.len() {
            for j in i + 1..sorted.len() {
                if sorted[i] == sorted[j] {
                    return Err(Error::RepeatedIndex(sorted[i]));
                }
                if sorted[i] > sorted[j] {
                    odd = !odd;
                }
            }
        }
        sorted.sort_unstable();
        let s = self.sign_of_subset(&sorted);
        Ok(if odd { -s } else { s })
    }

    /// Text form: a `chirotope d n` header, then one line per subset with
    /// 1-based labels followed by `+`, `-` or `0`.
    pub fn to_text(&self) -> String {
        let mut out = format!("chirotope {} {}\n", self.d, self.n);
        for (subset, s) in self.subsets().zip(&self.signs) {
            for i in &subset {
                write!(out, "{} ", i + 1).unwrap();
            }
            writeln!(out, "{s}").unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Chirotope> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "missing header".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let parse_usize = |s: &str, line: usize| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("expected an integer, found {s:?}"),
            })
        };
        if fields.len() != 3 || fields[0] != "chirotope" {
            return Err(Error::Parse {
                line: hline,
                message: "expected `chirotope d n`".into(),
            });
        }
        let d = parse_usize(fields[1], hline)?;
        let n = parse_usize(fields[2], hline)?;
        if n < d + 1 {
            return Err(Error::Parse {
                line: hline,
                message: "need n >= d+1".into(),
            });
        }
        let total = subset_count(n, d + 1);
        let mut signs: Vec<Option<Sign>> = vec![None; total];
        for (line, l) in lines {
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != d + 2 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {} columns, found {}", d + 2, fields.len()),
                });
            }
            let mut subset = Vec::with_capacity(d + 1);
            for f in &fields[..d + 1] {
                let i = parse_usize(f, line)?;
                if i == 0 || i > n {
                    return Err(Error::Parse {
                        line,
                        message: format!("label {i} outside 1..={n}"),
                    });
                }
                subset.push(i - 1);
            }
            if subset.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Parse {
                    line,
                    message: "labels must be strictly increasing".into(),
                });
            }
            let mut chars = fields[d + 1].chars();
            let sign = match (chars.next().and_then(Sign::from_symbol), chars.next()) {
                (Some(s), None) => s,
                _ => {
                    return Err(Error::Parse {
                        line,
                        message: format!("bad sign {:?}", fields[d + 1]),
                    })
                }
            };
            let slot = &mut signs[subset_rank(n, &subset)];
            if slot.is_some() {
                return Err(Error::Parse {
                    line,
                    message: "subset listed twice".into(),
                });
            }
            *slot = Some(sign);
        }
        let signs: Option<Vec<Sign>> = signs.into_iter().collect();
        let signs = signs.ok_or(Error::Parse {
            line: text.lines().count(),
            message: format!("expected {total} subsets"),
        })?;
        Chirotope::from_signs(d, n, signs)
    }

    /// Signs packed two bits each, first subset in the two most significant
    /// bits of the first byte: `00` zero, `01` positive, `10` negative.
    pub fn to_packed(&self) -> Vec<u8> {
        let mut out = vec![0u8; self.signs.len().div_ceil(4)];
        for (k, s) in self.signs.iter().enumerate() {
            let code = match s {
                Sign::Zero => 0b00,
                Sign::Pos => 0b01,
                Sign::Neg => 0b10,
            };
            out[k / 4] |= code << (6 - 2 * (k % 4));
        }
        out
    }

    pub fn from_packed(d: usize, n: usize, bytes: &[u8]) -> Result<Chirotope> {
        let total = subset_count(n, d + 1);
        if bytes.len() != total.div_ceil(4) {
            return Err(Error::Encoding(format!(
                "expected {} bytes, found {}",
                total.div_ceil(4),
                bytes.len()
            )));
        }
        let signs = (0..total)
            .map(|k| match (bytes[k / 4] >> (6 - 2 * (k % 4))) & 0b11 {
                0b00 => Ok(Sign::Zero),
                0b01 => Ok(Sign::Pos),
                0b10 => Ok(Sign::Neg),
                _ => Err(Error::Encoding(format!(
                    "invalid sign code at position {k}"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        Chirotope::from_signs(d, n, signs)
    }
}

/// The chirotope of a point configuration. Subsets are evaluated in
/// parallel; the output does not depend on scheduling.
pub fn compute_chirotope(config: &PointConfig) -> Result<Chirotope> {
    let d = config.dim();
    let n = config.len();
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= d+1, got n={n}, d={d}"
        )));
    }
    let (coords, _) = config.integer_coords();
    let subsets: Vec<Vec<usize>> = Subsets::new(n, d + 1).collect();
    let signs = subsets
        .par_iter()
        .with_min_len(256)
        .map(|subset| {
            let pts: Vec<&[BigInt]> = subset.iter().map(|&i| coords[i].as_slice()).collect();
            orientation_int(&pts)
        })
        .collect();
    Ok(Chirotope { d, n, signs })
}

/// Every subset on which `a` and `b` disagree, in lexicographic order.
pub fn chirotope_diff(a: &Chirotope, b: &Chirotope) -> Result<Vec<DiffEntry>> {
    if a.d != b.d || a.n != b.n {
        return Err(Error::ShapeMismatch {
            d1: a.d,
            n1: a.n,
            d2: b.d,
            n2: b.n,
        });
    }
    Ok(a.subsets()
        .zip(a.signs.iter().zip(&b.signs))
        .filter(|(_, (x, y))| x != y)
        .map(|(subset, (&x, &y))| DiffEntry {
            subset,
            a: x,
            b: y,
            kind: if x.is_zero() || y.is_zero() {
                DiffKind::Degenerate
            } else {
                DiffKind::Flip
            },
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point, SimplexTuple};
    use crate::Rational;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn config(pts: &[&[i64]]) -> PointConfig {
        PointConfig::new(
            pts[0].len(),
            pts.iter().map(|p| Point::from_ints(p)).collect(),
        )
        .unwrap()
    }

    fn random_config(rng: &mut ChaCha8Rng, n: usize, d: usize) -> PointConfig {
        let pts = (0..n)
            .map(|_| {
                Point::new(
                    (0..d)
                        .map(|_| {
                            Rational::new(
                                rng.random_range(-20..=20).into(),
                                rng.random_range(1..=7).into(),
                            )
                        })
                        .collect(),
                )
            })
            .collect();
        PointConfig::new(d, pts).unwrap()
    }

    #[test]
    fn subsets_in_lex_order() {
        let s = enumerate_subsets(4, 2).unwrap();
        assert_eq!(
            s,
            vec![vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]]
        );
        assert_eq!(enumerate_subsets(32, 2).unwrap().len(), 4960);
        assert_eq!(enumerate_subsets(7, 3).unwrap()[0], vec![0, 1, 2, 3]);
        assert_eq!(enumerate_subsets(3, 2).unwrap(), vec![vec![0, 1, 2]]);
        assert!(enumerate_subsets(2, 2).is_err());
    }

    #[test]
    fn rank_inverts_enumeration() {
        for n in 1..=9 {
            for k in 1..=n {
                for (pos, s) in Subsets::new(n, k).enumerate() {
                    assert_eq!(subset_rank(n, &s), pos);
                }
                assert_eq!(Subsets::new(n, k).count(), subset_count(n, k));
            }
        }
    }

    #[test]
    fn chirotope_examples() {
        let tri = config(&[&[0, 0], &[1, 0], &[0, 1]]);
        assert_eq!(compute_chirotope(&tri).unwrap().signs(), &[Sign::Pos]);

        // (e_1, …, e_d, 0) is positively oriented in every dimension.
        for d in 1..=5 {
            let mut pts: Vec<Point> = (0..d)
                .map(|i| {
                    let mut c = vec![0i64; d];
                    c[i] = 1;
                    Point::from_ints(&c)
                })
                .collect();
            pts.push(Point::from_ints(&vec![0; d]));
            let c = compute_chirotope(&PointConfig::new(d, pts).unwrap()).unwrap();
            assert_eq!(c.signs(), &[Sign::Pos]);
        }

        let square = config(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let c = compute_chirotope(&square).unwrap();
        assert_eq!(c.signs(), &[Sign::Pos, Sign::Pos, Sign::Neg, Sign::Neg]);
        assert!(c.is_general_position());

        let collinear = config(&[&[0, 0], &[1, 1], &[2, 2], &[0, 1]]);
        let c = compute_chirotope(&collinear).unwrap();
        assert!(c.signs().contains(&Sign::Zero));
        assert!(!c.is_general_position());
    }

    /// 2×2 cross product of (q - p) and (r - p), i.e. the planar orientation.
    fn cross_sign(p: &[i64], q: &[i64], r: &[i64]) -> Sign {
        Sign::of(&((q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])))
    }

    #[test]
    fn planar_chirotope_matches_cross_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let pts: Vec<Vec<i64>> = (0..7)
                .map(|_| vec![rng.random_range(-5..=5), rng.random_range(-5..=5)])
                .collect();
            let refs: Vec<&[i64]> = pts.iter().map(Vec::as_slice).collect();
            let c = compute_chirotope(&config(&refs)).unwrap();
            for (s, sign) in c.subsets().zip(c.signs()) {
                assert_eq!(*sign, cross_sign(&pts[s[0]], &pts[s[1]], &pts[s[2]]));
            }
        }
    }

    #[test]
    fn chirotope_matches_per_tuple_orientation_exhaustively() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for d in 1..=3 {
            for n in d + 1..=8 {
                let cfg = random_config(&mut rng, n, d);
                let c = compute_chirotope(&cfg).unwrap();
                for (s, sign) in c.subsets().zip(c.signs()) {
                    let t = SimplexTuple::new(s.iter().map(|&i| cfg.points()[i].clone()).collect())
                        .unwrap();
                    assert_eq!(*sign, t.orientation());
                }
            }
        }
    }

    #[test]
    fn ordered_tuples_use_parity() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let cfg = random_config(&mut rng, 9, 3);
        let c = compute_chirotope(&cfg).unwrap();
        assert_eq!(
            c.orientation_of_ordered(&[0, 1, 2, 3]).unwrap(),
            c.signs()[0]
        );
        assert_eq!(
            c.orientation_of_ordered(&[1, 0, 2, 3]).unwrap(),
            -c.signs()[0]
        );
        assert_eq!(
            c.orientation_of_ordered(&[1, 1, 2, 3]),
            Err(Error::RepeatedIndex(1))
        );
        assert!(c.orientation_of_ordered(&[0, 1, 2, 9]).is_err());
        assert!(c.orientation_of_ordered(&[0, 1, 2]).is_err());
        for _ in 0..1000 {
            let mut labels: Vec<usize> = (0..9).collect();
            for i in (1..labels.len()).rev() {
                labels.swap(i, rng.random_range(0..=i));
            }
            let tuple = &labels[..4];
            let t = SimplexTuple::new(tuple.iter().map(|&i| cfg.points()[i].clone()).collect())
                .unwrap();
            assert_eq!(c.orientation_of_ordered(tuple).unwrap(), t.orientation());
        }
    }

    #[test]
    fn diff_reports_flips_and_degeneracies() {
        let square = config(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let a = compute_chirotope(&square).unwrap();
        assert!(chirotope_diff(&a, &a).unwrap().is_empty());

        let mut signs = a.signs().to_vec();
        signs[2] = -signs[2];
        signs[3] = Sign::Zero;
        let b = Chirotope::from_signs(2, 4, signs).unwrap();
        let diff = chirotope_diff(&a, &b).unwrap();
        assert_eq!(diff.len(), 2);
        assert_eq!(diff[0].subset, vec![0, 2, 3]);
        assert_eq!(diff[0].kind, DiffKind::Flip);
        assert_eq!(diff[1].kind, DiffKind::Degenerate);

        let back = chirotope_diff(&b, &a).unwrap();
        for (x, y) in diff.iter().zip(&back) {
            assert_eq!((x.a, x.b, x.kind), (y.b, y.a, y.kind));
        }

        let other = Chirotope::from_signs(2, 3, vec![Sign::Pos]).unwrap();
        assert!(matches!(
            chirotope_diff(&a, &other),
            Err(Error::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn orientation_preserving_affine_maps_keep_the_chirotope() {
        let mut rng = ChaCha8Rng::seed_from_u64(24);
        let mut applied = 0;
        while applied < 100 {
            let d = rng.random_range(1..=3);
            let cfg = random_config(&mut rng, 7, d);
            let m: Vec<Vec<Rational>> = (0..d)
                .map(|_| {
                    (0..d)
                        .map(|_| {
                            Rational::new(
                                rng.random_range(-4..=4).into(),
                                rng.random_range(1..=3).into(),
                            )
                        })
                        .collect()
                })
                .collect();
            if crate::exact::det_sign(&m) != Sign::Pos {
                continue;
            }
            let shift: Vec<Rational> = (0..d)
                .map(|_| Rational::from_integer(rng.random_range(-9..=9).into()))
                .collect();
            let moved = cfg
                .points()
                .iter()
                .map(|p| {
                    Point::new(
                        m.iter()
                            .zip(&shift)
                            .map(|(row, s)| {
                                row.iter()
                                    .zip(p.coords())
                                    .map(|(a, x)| a * x)
                                    .sum::<Rational>()
                                    + s
                            })
                            .collect(),
                    )
                })
                .collect();
            let moved = PointConfig::new(d, moved).unwrap();
            assert_eq!(
                compute_chirotope(&cfg).unwrap(),
                compute_chirotope(&moved).unwrap()
            );
            applied += 1;
        }
    }

    #[test]
    fn text_format() {
        let square = config(&[&[0, 0], &[1, 0], &[0, 1], &[1, 1]]);
        let c = compute_chirotope(&square).unwrap();
        let text = c.to_text();
        assert_eq!(text, "chirotope 2 4\n1 2 3 +\n1 2 4 +\n1 3 4 -\n2 3 4 -\n");
        assert_eq!(Chirotope::from_text(&text).unwrap(), c);
        let err = Chirotope::from_text("chirotope 2 4\n1 2 3 +\n1 2 +\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }));
        assert!(Chirotope::from_text("chirotope 2 4\n1 2 3 +\n").is_err());
        assert!(Chirotope::from_text("chirotope 2 4\n1 2 3 x\n").is_err());
    }

    #[test]
    fn packed_signs() {
        let mut rng = ChaCha8Rng::seed_from_u64(25);
        for n in 3..=9 {
            let signs: Vec<Sign> = (0..subset_count(n, 3))
                .map(|_| [Sign::Neg, Sign::Zero, Sign::Pos][rng.random_range(0..3)])
                .collect();
            let c = Chirotope::from_signs(2, n, signs).unwrap();
            let packed = c.to_packed();
            assert_eq!(packed.len(), subset_count(n, 3).div_ceil(4));
            assert_eq!(Chirotope::from_packed(2, n, &packed).unwrap(), c);
        }
        assert_eq!(
            Chirotope::from_signs(2, 3, vec![Sign::Neg])
                .unwrap()
                .to_packed(),
            vec![0b1000_0000]
        );
        assert!(Chirotope::from_packed(2, 3, &[0b1100_0000]).is_err());
    }
}
