//! Grids of step `1/M`, nearest-node rounding and the fixed-width binary
//! encoding of rounded configurations.
//!
//! # Binary layout
//!
//! | bytes      | content                                              |
//! |------------|------------------------------------------------------|
//! | 4          | magic `CHGR`                                         |
//! | 1          | format version (`1`)                                 |
//! | 4          | `d`, big-endian `u32`                                |
//! | 8          | `n`, big-endian `u64`                                |
//! | 4          | byte length `L` of `M`                               |
//! | `L`        | `M`, big-endian unsigned                             |
//! | 4          | width `w = ceil(log2(2M + 1))`, big-endian `u32`     |
//! | rest       | payload, zero-padded to a whole byte                 |
//!
//! The payload holds `n·d` integers `k` (the coordinate is `k/M`, `|k| <= M`),
//! row-major by point then coordinate, each as `w`-bit two's complement,
//! most significant bit first.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::Rational;
use crate::geometry::Point;
use crate::sampling::PointConfig;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"CHGR";
pub const FORMAT_VERSION: u8 = 1;

/// A grid of step `1/M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GridSpec {
    m: BigUint,
}

impl GridSpec {
    pub fn new(m: BigUint) -> Result<GridSpec> {
        if m.is_zero() {
            return Err(Error::InvalidArgument(
                "grid denominator M must be at least 1".into(),
            ));
        }
        Ok(GridSpec { m })
    }

    pub fn from_u64(m: u64) -> Result<GridSpec> {
        GridSpec::new(BigUint::from(m))
    }

    pub fn m(&self) -> &BigUint {
        &self.m
    }

    pub fn m_f64(&self) -> f64 {
        self.m.to_f64().unwrap_or(f64::INFINITY)
    }

    /// Bits per stored integer, `ceil(log2(2M + 1))`.
    pub fn width(&self) -> u64 {
        self.m.bits() + 1
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.m)
    }
}

/// `M = ceil(n^(d+1+eps))`, computed exactly: with `eps = p/q` in lowest
/// terms this is the ceiling of the `q`-th root of `n^((d+1)q + p)`.
pub fn grid_from_params(n: u64, d: u64, eps: &Rational) -> Result<GridSpec> {
    if n < 2 || d < 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= 2 and d >= 1, got n={n}, d={d}"
        )));
    }
    if eps.is_negative() {
        return Err(Error::InvalidArgument(format!(
            "eps must be nonnegative, got {eps}"
        )));
    }
    let p = eps
        .numer()
        .to_u32()
        .ok_or_else(|| Error::Unsupported(format!("eps numerator of {eps}")))?;
    let q = eps
        .denom()
        .to_u32()
        .ok_or_else(|| Error::Unsupported(format!("eps denominator of {eps}")))?;
    let exponent = (d as u32 + 1)
        .checked_mul(q)
        .and_then(|e| e.checked_add(p))
        .ok_or_else(|| Error::Unsupported(format!("exponent (d+1)+{eps} too large")))?;
    let power = BigUint::from(n).pow(exponent);
    let root = power.nth_root(q);
    let m = if root.pow(q) == power {
        root
    } else {
        root + 1u32
    };
    GridSpec::new(m)
}

/// Nearest integer to `x`, halves rounded away from zero.
fn round_half_away(x: &Rational) -> BigInt {
    let (num, den) = (x.numer().abs(), x.denom());
    let k: BigInt = (BigInt::from(2) * &num + den).div_floor(&(BigInt::from(2) * den));
    if x.is_negative() {
        -k
    } else {
        k
    }
}

/// Each coordinate moved to the nearest multiple of `1/M`; exact half-steps
/// go away from zero.
pub fn round_point(p: &Point, g: &GridSpec) -> Point {
    let m = BigInt::from(g.m.clone());
    Point::new(
        p.coords()
            .iter()
            .map(|c| {
                Rational::new(
                    round_half_away(&(c * Rational::from_integer(m.clone()))),
                    m.clone(),
                )
            })
            .collect(),
    )
}

/// Pointwise rounding. Order is kept and coinciding images are kept too;
/// see [`PointConfig::duplicate_pairs`].
pub fn round_config(s: &PointConfig, g: &GridSpec) -> PointConfig {
    PointConfig::new(
        s.dim(),
        s.points().iter().map(|p| round_point(p, g)).collect(),
    )
    .expect("rounding preserves dimension")
}

/// A rounded configuration packed as fixed-width grid indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncodedConfig {
    d: usize,
    n: usize,
    grid: GridSpec,
    payload: Vec<u8>,
}

impl EncodedConfig {
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn width(&self) -> u64 {
        self.grid.width()
    }

    /// `n·d·w`.
    pub fn payload_bits(&self) -> u64 {
        (self.n * self.d) as u64 * self.width()
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    fn header(&self) -> Vec<u8> {
        let m = self.grid.m.to_bytes_be();
        let mut out = Vec::with_capacity(25 + m.len());
        out.extend_from_slice(&MAGIC);
        out.push(FORMAT_VERSION);
        out.extend_from_slice(&(self.d as u32).to_be_bytes());
        out.extend_from_slice(&(self.n as u64).to_be_bytes());
        out.extend_from_slice(&(m.len() as u32).to_be_bytes());
        out.extend_from_slice(&m);
        out.extend_from_slice(&(self.width() as u32).to_be_bytes());
        out
    }

    /// Size of the serialized form in bytes, header included.
    pub fn total_bytes(&self) -> usize {
        self.header().len() + self.payload.len()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = self.header();
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<EncodedConfig> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Encoding("bad magic".into()));
        }
        let version = r.take(1)?[0];
        if version != FORMAT_VERSION {
            return Err(Error::Encoding(format!("unsupported version {version}")));
        }
        let d = r.u32()? as usize;
        let n = usize::try_from(r.u64()?).map_err(|_| Error::Encoding("n too large".into()))?;
        let m_len = r.u32()? as usize;
        let grid = GridSpec::new(BigUint::from_bytes_be(r.take(m_len)?))
            .map_err(|_| Error::Encoding("M must be positive".into()))?;
        let width = u64::from(r.u32()?);
        if width != grid.width() {
            return Err(Error::Encoding(format!(
                "width {width} does not match M = {} (expected {})",
                grid.m,
                grid.width()
            )));
        }
        let bits = (n as u128) * (d as u128) * u128::from(width);
        let expected = bits.div_ceil(8);
        let payload = r.rest();
        if (payload.len() as u128) < expected {
            return Err(Error::Encoding(format!(
                "truncated payload: {} bytes, expected {expected}",
                payload.len()
            )));
        }
        if (payload.len() as u128) > expected {
            return Err(Error::Encoding("trailing bytes after payload".into()));
        }
        Ok(EncodedConfig {
            d,
            n,
            grid,
            payload: payload.to_vec(),
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(len).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Encoding("truncated header".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_be_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn rest(&mut self) -> &'a [u8] {
        let out = &self.bytes[self.pos..];
        self.pos = self.bytes.len();
        out
    }
}

#[derive(Default)]
struct BitWriter {
    bytes: Vec<u8>,
    len: u64,
}

impl BitWriter {
    fn push(&mut self, bit: bool) {
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        if bit {
            *self.bytes.last_mut().unwrap() |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }
}

struct BitReader<'a> {
    bytes: &'a [u8],
    pos: u64,
}

impl BitReader<'_> {
    fn next(&mut self) -> bool {
        let bit = self.bytes[(self.pos / 8) as usize] & (0x80 >> (self.pos % 8)) != 0;
        self.pos += 1;
        bit
    }
}

/// Packs a configuration whose coordinates all lie on the grid and in
/// `[-1, 1]`.
pub fn encode(s: &PointConfig, g: &GridSpec) -> Result<EncodedConfig> {
    let m = BigInt::from(g.m.clone());
    let width = g.width();
    let modulus = BigInt::one() << width;
    let mut w = BitWriter::default();
    for (i, p) in s.points().iter().enumerate() {
        for c in p.coords() {
            let scaled = c * Rational::from_integer(m.clone());
            if !scaled.is_integer() {
                return Err(Error::OffGrid {
                    point: i,
                    value: c.to_string(),
                    m: g.m.to_string(),
                });
            }
            let k = scaled.to_integer();
            if k.abs() > m {
                return Err(Error::OutOfRange {
                    point: i,
                    value: c.to_string(),
                });
            }
            let twos = if k.is_negative() { &modulus + &k } else { k };
            let bits = twos
                .to_biguint()
                .expect("two's complement image is nonnegative");
            for b in (0..width).rev() {
                w.push(bits.bit(b));
            }
        }
    }
    debug_assert_eq!(w.len, (s.len() * s.dim()) as u64 * width);
    Ok(EncodedConfig {
        d: s.dim(),
        n: s.len(),
        grid: g.clone(),
        payload: w.bytes,
    })
}

/// Inverse of [`encode`].
pub fn decode(e: &EncodedConfig) -> Result<PointConfig> {
    let width = e.width();
    let m = BigInt::from(e.grid.m.clone());
    let modulus = BigInt::one() << width;
    let half = BigInt::one() << (width - 1);
    if (e.payload.len() as u64) * 8 < e.payload_bits() {
        return Err(Error::Encoding("truncated payload".into()));
    }
    let mut r = BitReader {
        bytes: &e.payload,
        pos: 0,
    };
    let mut points = Vec::with_capacity(e.n);
    for i in 0..e.n {
        let mut coords = Vec::with_capacity(e.d);
        for _ in 0..e.d {
            let mut u = BigInt::zero();
            for _ in 0..width {
                u = (u << 1u32) + u8::from(r.next());
            }
            let k = if u >= half { u - &modulus } else { u };
            if k.abs() > m {
                return Err(Error::Encoding(format!("point {i}: index {k} exceeds M")));
            }
            coords.push(Rational::new(k, m.clone()));
        }
        points.push(Point::new(coords));
    }
    PointConfig::new(e.d, points)
}

/// Decodes the binary form produced by [`EncodedConfig::to_bytes`].
pub fn decode_bytes(bytes: &[u8]) -> Result<PointConfig> {
    decode(&EncodedConfig::from_bytes(bytes)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_config, Domain, SamplerConfig};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn pt(c: &[(i64, i64)]) -> Point {
        Point::new(c.iter().map(|&(n, d)| r(n, d)).collect())
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(
            grid_from_params(10, 2, &r(0, 1)).unwrap().m(),
            &BigUint::from(1000u32)
        );
        assert_eq!(
            grid_from_params(32, 2, &r(1, 2)).unwrap().m(),
            &BigUint::from(185_364u32)
        );
        assert_eq!(
            grid_from_params(16, 3, &r(1, 2)).unwrap().m(),
            &BigUint::from(262_144u32)
        );
        assert_eq!(
            grid_from_params(2, 1, &r(1, 3)).unwrap().m(),
            &BigUint::from(6u32)
        ); // 2^(7/3) = 5.04
        assert!(grid_from_params(1, 2, &r(0, 1)).is_err());
        assert!(grid_from_params(5, 0, &r(0, 1)).is_err());
        assert!(grid_from_params(5, 2, &r(-1, 2)).is_err());
        assert!(GridSpec::from_u64(0).is_err());
    }

    #[test]
    fn widths() {
        assert_eq!(GridSpec::from_u64(10).unwrap().width(), 5);
        assert_eq!(GridSpec::from_u64(10_000_000).unwrap().width(), 25);
        assert_eq!(GridSpec::from_u64(1).unwrap().width(), 2);
        for m in 1u64..2000 {
            let w = GridSpec::from_u64(m).unwrap().width();
            assert!(1u64 << (w - 1) < 2 * m + 1 && 2 * m < 1u64 << w, "m = {m}");
        }
    }

    #[test]
    fn rounding_examples() {
        let g = GridSpec::from_u64(4).unwrap();
        assert_eq!(
            round_point(&pt(&[(3, 10), (-1, 10)]), &g),
            pt(&[(1, 4), (0, 1)])
        );
        assert_eq!(
            round_point(&pt(&[(1, 8), (0, 1)]), &g),
            pt(&[(1, 4), (0, 1)])
        );
        assert_eq!(
            round_point(&pt(&[(-1, 8), (3, 8)]), &g),
            pt(&[(-1, 4), (1, 2)])
        );
        let on = pt(&[(3, 4), (-1, 2)]);
        assert_eq!(round_point(&on, &g), on);
    }

    #[test]
    fn rounding_displacement_and_collisions() {
        let g = GridSpec::from_u64(1000).unwrap();
        let s = sample_config(&SamplerConfig::new(Domain::Ball, 3, 200, 8)).unwrap();
        let rounded = round_config(&s, &g);
        let bound = r(1, 2000);
        for (p, q) in s.points().iter().zip(rounded.points()) {
            for (a, b) in p.coords().iter().zip(q.coords()) {
                assert!((a - b).abs() <= bound);
            }
        }
        assert_eq!(round_config(&rounded, &g), rounded);

        let close = PointConfig::new(
            2,
            vec![
                pt(&[(1, 10), (1, 10)]),
                pt(&[(101, 1000), (99, 1000)]),
                pt(&[(1, 2), (0, 1)]),
            ],
        )
        .unwrap();
        let coarse = round_config(&close, &GridSpec::from_u64(10).unwrap());
        assert_eq!(coarse.duplicate_pairs(), vec![(0, 1)]);
        assert_eq!(coarse.len(), 3);
    }

    #[test]
    fn encode_sizes() {
        let g = GridSpec::from_u64(10).unwrap();
        let s = PointConfig::new(
            2,
            vec![
                pt(&[(1, 10), (-1, 1)]),
                pt(&[(0, 1), (1, 1)]),
                pt(&[(-7, 10), (3, 10)]),
            ],
        )
        .unwrap();
        let e = encode(&s, &g).unwrap();
        assert_eq!(e.width(), 5);
        assert_eq!(e.payload_bits(), 30);
        assert_eq!(e.payload().len(), 4);
        assert_eq!(decode(&e).unwrap().points(), s.points());
        // 1 -> 00001, -10 -> 10110, 0 -> 00000, 10 -> 01010, -7 -> 11001, 3 -> 00011
        assert_eq!(
            e.payload(),
            &[0b0000_1101, 0b1000_0000, 0b1010_1100, 0b1000_1100]
        );
    }

    #[test]
    fn encode_rejects_bad_input() {
        let g = GridSpec::from_u64(10).unwrap();
        let off = PointConfig::new(1, vec![pt(&[(1, 3)])]).unwrap();
        assert!(matches!(
            encode(&off, &g),
            Err(Error::OffGrid { point: 0, .. })
        ));
        let out = PointConfig::new(1, vec![pt(&[(0, 1)]), pt(&[(11, 10)])]).unwrap();
        assert!(matches!(
            encode(&out, &g),
            Err(Error::OutOfRange { point: 1, .. })
        ));
    }

    #[test]
    fn bytes_roundtrip_and_corruption() {
        let g = GridSpec::from_u64(185_364).unwrap();
        let s = round_config(
            &sample_config(&SamplerConfig::new(Domain::Ball, 2, 32, 3)).unwrap(),
            &g,
        );
        let e = encode(&s, &g).unwrap();
        let bytes = e.to_bytes();
        assert_eq!(bytes.len(), e.total_bytes());
        assert_eq!(decode_bytes(&bytes).unwrap(), s);

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert_eq!(decode_bytes(&bad), Err(Error::Encoding("bad magic".into())));
        let mut bad = bytes.clone();
        bad[4] = 9;
        assert!(decode_bytes(&bad).is_err());
        assert!(decode_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(decode_bytes(&bytes[..10]).is_err());
        // Width field sits right before the payload.
        let mut bad = bytes.clone();
        let width_at = e.total_bytes() - e.payload().len() - 1;
        bad[width_at] += 1;
        assert!(matches!(decode_bytes(&bad), Err(Error::Encoding(_))));
    }

    #[test]
    fn empty_config() {
        let g = GridSpec::from_u64(7).unwrap();
        let e = encode(&PointConfig::new(2, vec![]).unwrap(), &g).unwrap();
        assert_eq!(e.payload_bits(), 0);
        let back = decode_bytes(&e.to_bytes()).unwrap();
        assert!(back.is_empty());
        assert_eq!(back.dim(), 2);
    }

    #[test]
    fn wide_grids() {
        let g = grid_from_params(50, 3, &r(15, 2)).unwrap();
        assert!(g.width() > 64);
        let s = round_config(
            &sample_config(&SamplerConfig::new(Domain::Cube, 3, 10, 4)).unwrap(),
            &g,
        );
        assert_eq!(
            decode_bytes(&encode(&s, &g).unwrap().to_bytes()).unwrap(),
            s
        );
        let corner = PointConfig::new(2, vec![pt(&[(-1, 1), (1, 1)])]).unwrap();
        assert_eq!(decode(&encode(&corner, &g).unwrap()).unwrap(), corner);
    }
}
