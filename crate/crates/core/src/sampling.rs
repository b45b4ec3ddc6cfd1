//! Seeded sampling of point configurations with exact dyadic coordinates,
//! and the `pointset` text format.
//!
//! # Random streams
//!
//! Every stream is a ChaCha8 generator seeded through
//! [`rand_core::SeedableRng::seed_from_u64`]. Trial `i` of an experiment with
//! master seed `s` uses the stream seeded by [`derive_seed`]`(s, i)`, the
//! SplitMix64 finalizer applied to `s + (i + 1)·0x9E3779B97F4A7C15`.
//! Both pieces are fixed, so outputs are identical across runs and
//! platforms.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::path::Path;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::exact::Rational;
use crate::geometry::{integer_coords, Point};
use crate::{Error, Result};

/// Default number of fractional bits of sampled coordinates.
pub const DEFAULT_PRECISION_BITS: u32 = 96;

/// Rejections tolerated for a single ball point before the generator is
/// declared faulty. The acceptance rate is at least 0.3 for `d <= 4`.
pub const MAX_REJECTIONS: usize = 10_000;

/// Largest dimension supported for ball sampling.
pub const MAX_BALL_DIM: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Domain {
    /// Closed unit ball.
    Ball,
    /// The cube `[-1, 1]^d`.
    Cube,
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Ball => "ball",
            Domain::Cube => "cube",
        })
    }
}

impl FromStr for Domain {
    type Err = Error;
    fn from_str(s: &str) -> Result<Domain> {
        match s.to_ascii_lowercase().as_str() {
            "ball" => Ok(Domain::Ball),
            "cube" => Ok(Domain::Cube),
            _ => Err(Error::InvalidArgument(format!(
                "unknown domain {s:?} (expected ball or cube)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub domain: Domain,
    pub d: usize,
    pub n: usize,
    pub precision_bits: u32,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn new(domain: Domain, d: usize, n: usize, seed: u64) -> SamplerConfig {
        SamplerConfig {
            domain,
            d,
            n,
            precision_bits: DEFAULT_PRECISION_BITS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 1 {
            return Err(Error::InvalidArgument("d must be at least 1".into()));
        }
        if self.precision_bits < 1 {
            return Err(Error::InvalidArgument(
                "precision_bits must be at least 1".into(),
            ));
        }
        if self.n < self.d + 1 {
            return Err(Error::InvalidArgument(format!(
                "need n >= d+1, got n={}, d={}",
                self.n, self.d
            )));
        }
        check_domain(self.domain, self.d)
    }
}

fn check_domain(domain: Domain, d: usize) -> Result<()> {
    if domain == Domain::Ball && d > MAX_BALL_DIM {
        return Err(Error::Unsupported(format!(
            "ball sampling is limited to d <= {MAX_BALL_DIM}, got d={d}"
        )));
    }
    Ok(())
}

/// SplitMix64 finalizer of `seed + (index + 1)·φ64`; the seed of trial
/// `index`'s random stream.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A stream of uniformly distributed dyadic points.
///
/// Cube coordinates are the midpoints `(2u + 1 - 2^B) / 2^B`,
/// `u ∈ [0, 2^B)`, of the `2^B` equal cells of `[-1, 1]`. Ball points are
/// cube points accepted by the exact test `|x|^2 <= 1`.
pub struct Sampler {
    rng: ChaCha8Rng,
    domain: Domain,
    d: usize,
    bits: u32,
    denom: BigInt,
}

impl Sampler {
    pub fn new(domain: Domain, d: usize, bits: u32, seed: u64) -> Result<Sampler> {
        if bits < 1 {
            return Err(Error::InvalidArgument(
                "precision_bits must be at least 1".into(),
            ));
        }
        check_domain(domain, d)?;
        let denom = BigInt::one() << bits;
        Ok(Sampler {
            rng: ChaCha8Rng::seed_from_u64(seed),
            domain,
            d,
            bits,
            denom,
        })
    }

    /// Numerator over `2^B` of one cube coordinate; always odd.
    fn coordinate_numerator(&mut self) -> BigInt {
        let words = self.bits.div_ceil(64) as usize;
        let mut bytes = Vec::with_capacity(words * 8);
        for _ in 0..words {
            bytes.extend_from_slice(&self.rng.next_u64().to_le_bytes());
        }
        let mask = (BigUint::one() << self.bits) - 1u32;
        let u = BigInt::from(BigUint::from_bytes_le(&bytes) & mask);
        2 * u + 1 - &self.denom
    }

    /// Numerators over [`Sampler::denominator`] of the next point.
    pub fn next_numerators(&mut self) -> Result<Vec<BigInt>> {
        let limit = &self.denom * &self.denom;
        for _ in 0..MAX_REJECTIONS {
            let nums: Vec<BigInt> = (0..self.d).map(|_| self.coordinate_numerator()).collect();
            let accept = match self.domain {
                Domain::Cube => true,
                Domain::Ball => nums.iter().map(|v| v * v).sum::<BigInt>() <= limit,
            };
            if accept {
                return Ok(nums);
            }
        }
        Err(Error::RngFault(MAX_REJECTIONS))
    }

    /// `2^B`.
    pub fn denominator(&self) -> &BigInt {
        &self.denom
    }

    pub fn next_point(&mut self) -> Result<Point> {
        let nums = self.next_numerators()?;
        Ok(Point::new(
            nums.into_iter()
                .map(|v| Rational::new(v, self.denom.clone()))
                .collect(),
        ))
    }

    pub fn points(&mut self, count: usize) -> Result<Vec<Point>> {
        (0..count).map(|_| self.next_point()).collect()
    }
}

/// Where a configuration came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Sampled(SamplerConfig),
    File,
    Constructed,
}

/// An ordered list of points of `Q^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointConfig {
    d: usize,
    points: Vec<Point>,
    provenance: Provenance,
}

impl PointConfig {
    pub fn new(d: usize, points: Vec<Point>) -> Result<PointConfig> {
        if let Some(p) = points.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: p.dim(),
            });
        }
        Ok(PointConfig {
            d,
            points,
            provenance: Provenance::Constructed,
        })
    }

    pub fn with_provenance(mut self, provenance: Provenance) -> PointConfig {
        self.provenance = provenance;
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn into_points(self) -> Vec<Point> {
        self.points
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Integer coordinates after scaling by the common denominator.
    pub fn integer_coords(&self) -> (Vec<Vec<BigInt>>, BigInt) {
        integer_coords(self.points.iter())
    }

    /// Pairs `(i, j)`, `i < j`, of coinciding points.
    pub fn duplicate_pairs(&self) -> Vec<(usize, usize)> {
        let mut seen: HashMap<&Point, Vec<usize>> = HashMap::new();
        for (i, p) in self.points.iter().enumerate() {
            seen.entry(p).or_default().push(i);
        }
        let mut pairs: Vec<(usize, usize)> = seen
            .values()
            .flat_map(|idx| {
                idx.iter()
                    .enumerate()
                    .flat_map(move |(a, &i)| idx[a + 1..].iter().map(move |&j| (i, j)))
            })
            .collect();
        pairs.sort_unstable();
        pairs
    }

    /// `pointset d n` followed by one line of `d` rationals per point.
    pub fn to_text(&self) -> String {
        let mut out = format!("pointset {} {}\n", self.d, self.points.len());
        if let Provenance::Sampled(cfg) = &self.provenance {
            writeln!(
                out,
                "# sampled domain={} bits={} seed={}",
                cfg.domain, cfg.precision_bits, cfg.seed
            )
            .unwrap();
        }
        for p in &self.points {
            let line: Vec<String> = p.coords().iter().map(ToString::to_string).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<PointConfig> {
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
        if fields.len() != 3 || fields[0] != "pointset" {
            return Err(Error::Parse {
                line: hline,
                message: "expected `pointset d n`".into(),
            });
        }
        let parse = |s: &str| {
            s.parse::<usize>().map_err(|_| Error::Parse {
                line: hline,
                message: format!("expected an integer, found {s:?}"),
            })
        };
        let (d, n) = (parse(fields[1])?, parse(fields[2])?);
        let mut points = Vec::with_capacity(n);
        let mut last_line = hline;
        for (line, l) in lines {
            last_line = line;
            let fields: Vec<&str> = l.split_whitespace().collect();
            if fields.len() != d {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} coordinates, found {}", fields.len()),
                });
            }
            let coords = fields
                .iter()
                .map(|f| {
                    f.parse::<Rational>().map_err(|_| Error::Parse {
                        line,
                        message: format!("malformed rational {f:?}"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            points.push(Point::new(coords));
        }
        if points.len() != n {
            return Err(Error::Parse {
                line: last_line,
                message: format!("header announces {n} points, found {}", points.len()),
            });
        }
        Ok(PointConfig {
            d,
            points,
            provenance: Provenance::File,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PointConfig> {
        PointConfig::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Draws `cfg.n` points; identical configs give identical outputs.
pub fn sample_config(cfg: &SamplerConfig) -> Result<PointConfig> {
    cfg.validate()?;
    let mut sampler = Sampler::new(cfg.domain, cfg.d, cfg.precision_bits, cfg.seed)?;
    let points = sampler.points(cfg.n)?;
    Ok(PointConfig {
        d: cfg.d,
        points,
        provenance: Provenance::Sampled(cfg.clone()),
    })
}
