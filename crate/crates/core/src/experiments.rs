//! Monte Carlo harnesses for chirotope preservation under rounding, the
//! per-facet margin event, the cell-transversal search and the facet
//! certificate, plus the closed-form bounds they are checked against.
//!
//! Every trial draws from its own stream, seeded by
//! [`derive_seed`]`(seed, trial)`, so results do not depend on how trials
//! are scheduled. Summaries are folds over the multiset of trial records.

use std::collections::BTreeSet;
use std::io::Write;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chirotope::{chirotope_diff, compute_chirotope, DiffKind, Subsets};
use crate::exact::{ball_volume_ratio, binomial, Rational};
use crate::geometry::{
    facet_margins_at_least, is_full_family, lemma1_transversal_report, lemma2_certificate,
    CellLabel, Hyperplane, IntHyperplane, Point, SimplexTuple,
};
use crate::grid::{grid_from_params, round_config, round_point, GridSpec};
use crate::sampling::{
    derive_seed, sample_config, Domain, PointConfig, Sampler, SamplerConfig, DEFAULT_PRECISION_BITS,
};
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Width of the statistical acceptance band, in standard deviations.
pub const ACCEPTANCE_SIGMAS: f64 = 3.0;

/// Samples drawn from one random stream by [`estimate_per_event`].
const PER_EVENT_BATCH: u64 = 4096;

mod rational_string {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|_| serde::de::Error::custom(format!("malformed rational {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub n: usize,
    pub d: usize,
    #[serde(with = "rational_string")]
    pub eps: Rational,
    pub trials: u64,
    pub seed: u64,
    pub domain: Domain,
    pub precision_bits: u32,
}

impl ExperimentParams {
    pub fn new(
        n: usize,
        d: usize,
        eps: Rational,
        trials: u64,
        seed: u64,
        domain: Domain,
    ) -> ExperimentParams {
        ExperimentParams {
            n,
            d,
            eps,
            trials,
            seed,
            domain,
            precision_bits: DEFAULT_PRECISION_BITS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        self.sampler(0).validate()?;
        self.grid().map(|_| ())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        grid_from_params(self.n as u64, self.d as u64, &self.eps)
    }

    fn sampler(&self, seed: u64) -> SamplerConfig {
        SamplerConfig {
            domain: self.domain,
            d: self.d,
            n: self.n,
            precision_bits: self.precision_bits,
            seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Outcome {
    Preserved,
    Flip,
    Degenerate,
    Collision,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: String,
    pub outcome: Outcome,
    pub diff_count: usize,
    /// Smallest squared distance from a vertex to its opposite facet
    /// hyperplane over all subsets of the original points. Reporting only.
    pub min_margin_sq: f64,
}

/// Rounds `s` to `grid` and classifies what happened to its chirotope.
pub fn classify_rounding(
    s: &PointConfig,
    grid: &GridSpec,
    trial: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let rounded = round_config(s, grid);
    let before = compute_chirotope(s)?;
    let after = compute_chirotope(&rounded)?;
    let diff = chirotope_diff(&before, &after)?;
    let outcome = if !rounded.duplicate_pairs().is_empty() {
        Outcome::Collision
    } else if !before.is_general_position() || !after.is_general_position() {
        Outcome::Degenerate
    } else if diff.iter().any(|e| e.kind == DiffKind::Flip) {
        Outcome::Flip
    } else {
        Outcome::Preserved
    };
    Ok(TrialRecord {
        trial,
        seed,
        m: grid.to_string(),
        outcome,
        diff_count: diff.len(),
        min_margin_sq: min_margin_sq(s),
    })
}

/// One sample-round-compare trial of the rounding experiment.
pub fn theorem_trial(params: &ExperimentParams, trial: u64) -> Result<TrialRecord> {
    let seed = derive_seed(params.seed, trial);
    let s = sample_config(&params.sampler(seed))?;
    classify_rounding(&s, &params.grid()?, trial, seed)
}

fn det_f64(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&a, &b| m[a][k].abs().total_cmp(&m[b][k].abs()))
            .unwrap();
        if m[pivot][k] == 0.0 {
            return 0.0;
        }
        if pivot != k {
            m.swap(pivot, k);
            det = -det;
        }
        det *= m[k][k];
        let (top, rest) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest {
            let f = row[k] / pivot_row[k];
            for (x, p) in row[k..].iter_mut().zip(&pivot_row[k..]) {
                *x -= f * p;
            }
        }
    }
    det
}

/// Squared distance from `x` to the affine hull of `facet` (`d` points in
/// `R^d`), via the generalized cross product of the edge vectors.
fn facet_distance_sq(facet: &[&[f64]], x: &[f64]) -> f64 {
    let d = x.len();
    let base = facet[0];
    let edges: Vec<Vec<f64>> = facet[1..]
        .iter()
        .map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect())
        .collect();
    let normal: Vec<f64> = (0..d)
        .map(|c| {
            let minor = edges
                .iter()
                .map(|e| {
                    e.iter()
                        .enumerate()
                        .filter(|&(j, _)| j != c)
                        .map(|(_, v)| *v)
                        .collect()
                })
                .collect();
            let m = det_f64(minor);
            if c % 2 == 0 {
                m
            } else {
                -m
            }
        })
        .collect();
    let norm_sq: f64 = normal.iter().map(|v| v * v).sum();
    let off: f64 = normal
        .iter()
        .zip(x.iter().zip(base))
        .map(|(nv, (a, b))| nv * (a - b))
        .sum();
    off * off / norm_sq
}

fn min_margin_sq(s: &PointConfig) -> f64 {
    let d = s.dim();
    let coords: Vec<Vec<f64>> = s.points().iter().map(Point::to_f64).collect();
    let mut best = f64::INFINITY;
    for subset in Subsets::new(s.len(), d + 1) {
        for i in 0..=d {
            let facet: Vec<&[f64]> = subset
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &k)| coords[k].as_slice())
                .collect();
            best = best.min(facet_distance_sq(&facet, &coords[subset[i]]));
        }
    }
    best
}

/// Wilson score interval `(lo, hi)` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Half-width of the Wilson interval at `z`.
pub fn wilson_halfwidth(successes: u64, trials: u64, z: f64) -> f64 {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub params: ExperimentParams,
    #[serde(rename = "M")]
    pub m: String,
    pub preserved: u64,
    pub flip: u64,
    pub degenerate: u64,
    pub collision: u64,
    pub freq: f64,
    /// 95% Wilson interval.
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub bound_paper: f64,
    pub bound_exact: f64,
}

impl ExperimentSummary {
    pub fn trials(&self) -> u64 {
        self.preserved + self.flip + self.degenerate + self.collision
    }

    /// Half-width of the acceptance band around the observed frequency.
    pub fn acceptance_halfwidth(&self) -> f64 {
        wilson_halfwidth(self.preserved, self.trials(), ACCEPTANCE_SIGMAS)
    }

    pub const CSV_HEADER: &'static str =
        "n,d,eps,M,trials,preserved,flip,degenerate,collision,freq,wilson_lo,wilson_hi,bound_paper,bound_exact";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.params.n,
            self.params.d,
            self.params.eps,
            self.m,
            self.trials(),
            self.preserved,
            self.flip,
            self.degenerate,
            self.collision,
            self.freq,
            self.wilson_lo,
            self.wilson_hi,
            self.bound_paper,
            self.bound_exact
        )
    }
}

/// Folds trial records into a summary; the result does not depend on the
/// order of `records`.
pub fn summarize(params: &ExperimentParams, records: &[TrialRecord]) -> Result<ExperimentSummary> {
    let grid = params.grid()?;
    let count = |o: Outcome| records.iter().filter(|r| r.outcome == o).count() as u64;
    let preserved = count(Outcome::Preserved);
    let trials = records.len() as u64;
    let (wilson_lo, wilson_hi) = wilson_interval(preserved, trials, Z95);
    let bound = success_lower_bound(params.n, params.d, &params.eps)?;
    Ok(ExperimentSummary {
        params: params.clone(),
        m: grid.to_string(),
        preserved,
        flip: count(Outcome::Flip),
        degenerate: count(Outcome::Degenerate),
        collision: count(Outcome::Collision),
        freq: preserved as f64 / trials as f64,
        wilson_lo,
        wilson_hi,
        bound_paper: bound.paper,
        bound_exact: bound.exact,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremRun {
    pub summary: ExperimentSummary,
    /// In trial order.
    pub records: Vec<TrialRecord>,
}

pub fn run_theorem_experiment(params: &ExperimentParams) -> Result<TheoremRun> {
    params.validate()?;
    let records = (0..params.trials)
        .into_par_iter()
        .map(|t| theorem_trial(params, t))
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(params, &records)?;
    Ok(TheoremRun { summary, records })
}

/// Serializes records as JSON lines, one record per line.
pub fn write_jsonl<T: Serialize>(records: &[T], mut out: impl Write) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

/// Lower bounds on the probability that rounding preserves the chirotope.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessBound {
    #[serde(rename = "M")]
    pub m: String,
    /// `1 - C(n, d+1)·(d+1)·d^{3/2} / (√π·M)`, clamped at 0.
    pub paper: f64,
    /// `1 - C(n, d+1)·(d+1)·(4√d/M)·vol(B_{d-1})/vol(B_d)`, clamped at 0.
    pub exact: f64,
}

pub fn success_lower_bound(n: usize, d: usize, eps: &Rational) -> Result<SuccessBound> {
    if n < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need n >= d+1, got n={n}, d={d}"
        )));
    }
    let grid = grid_from_params(n as u64, d as u64, eps)?;
    success_lower_bound_for_grid(n, d, &grid)
}

pub fn success_lower_bound_for_grid(n: usize, d: usize, grid: &GridSpec) -> Result<SuccessBound> {
    let tuples = binomial(n as u64, d as u64 + 1)?
        .to_f64()
        .unwrap_or(f64::INFINITY);
    let per = per_event_bound(d, grid)?;
    let events = tuples * (d + 1) as f64;
    Ok(SuccessBound {
        m: grid.to_string(),
        paper: (1.0 - events * per.simplified).max(0.0),
        exact: (1.0 - events * per.exact).max(0.0),
    })
}

/// Upper bounds on the probability that a vertex lies within `2√d/M` of
/// the hyperplane through its opposite facet.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerEventBound {
    /// `(2√d/M)·vol(B_{d-1})/vol(B_d)`.
    pub paper: f64,
    /// `d^{3/2}/(√π·M)`.
    pub simplified: f64,
    /// `(4√d/M)·vol(B_{d-1})/vol(B_d)`: the full two-sided slab.
    pub exact: f64,
}

pub fn per_event_bound(d: usize, grid: &GridSpec) -> Result<PerEventBound> {
    let ratio = ball_volume_ratio(d as u32)?.to_f64();
    let m = grid.m_f64();
    let df = d as f64;
    Ok(PerEventBound {
        paper: 2.0 * df.sqrt() / m * ratio,
        simplified: df.powf(1.5) / (std::f64::consts::PI.sqrt() * m),
        exact: 4.0 * df.sqrt() / m * ratio,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerEventEstimate {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: String,
    pub samples: u64,
    pub seed: u64,
    pub bad: u64,
    /// Facet draws thrown away because the `d` points were affinely dependent.
    pub degenerate_resamples: u64,
    pub freq: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    pub bound: PerEventBound,
}

impl PerEventEstimate {
    pub fn acceptance_halfwidth(&self) -> f64 {
        wilson_halfwidth(self.bad, self.samples, ACCEPTANCE_SIGMAS)
    }
}

/// Frequency of the event "the last of `d+1` ball points is closer than
/// `2√d/M` to the hyperplane through the first `d`".
pub fn estimate_per_event(
    d: usize,
    grid: &GridSpec,
    samples: u64,
    seed: u64,
) -> Result<PerEventEstimate> {
    if samples < 1 {
        return Err(Error::InvalidArgument("samples must be at least 1".into()));
    }
    if d < 1 {
        return Err(Error::InvalidArgument("d must be at least 1".into()));
    }
    Sampler::new(Domain::Ball, d, DEFAULT_PRECISION_BITS, seed)?;
    let batches = samples.div_ceil(PER_EVENT_BATCH);
    let (bad, degenerate) = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = PER_EVENT_BATCH.min(samples - b * PER_EVENT_BATCH);
            per_event_batch(d, grid, count, derive_seed(seed, b))
        })
        .try_reduce(|| (0, 0), |x, y| Ok((x.0 + y.0, x.1 + y.1)))?;
    let (wilson_lo, wilson_hi) = wilson_interval(bad, samples, Z95);
    Ok(PerEventEstimate {
        d,
        m: grid.to_string(),
        samples,
        seed,
        bad,
        degenerate_resamples: degenerate,
        freq: bad as f64 / samples as f64,
        wilson_lo,
        wilson_hi,
        bound: per_event_bound(d, grid)?,
    })
}

fn per_event_batch(d: usize, grid: &GridSpec, count: u64, seed: u64) -> Result<(u64, u64)> {
    let mut sampler = Sampler::new(Domain::Ball, d, DEFAULT_PRECISION_BITS, seed)?;
    // Points are kept as integer numerators over 2^B, which scales every
    // distance by 2^B: the threshold 4d/M^2 becomes 4d·4^B/M^2.
    let scale = sampler.denominator().clone();
    let m = BigInt::from(grid.m().clone());
    let t2 = Rational::new(BigInt::from(4 * d) * &scale * &scale, &m * &m);
    let (mut bad, mut degenerate) = (0, 0);
    for _ in 0..count {
        let h = loop {
            let facet = (0..d)
                .map(|_| sampler.next_numerators())
                .collect::<Result<Vec<_>>>()?;
            let refs: Vec<&[BigInt]> = facet.iter().map(Vec::as_slice).collect();
            match IntHyperplane::through(&refs) {
                Ok(h) => break h,
                Err(Error::Degenerate) => degenerate += 1,
                Err(e) => return Err(e),
            }
        };
        let apex = sampler.next_numerators()?;
        if !h.dist_at_least(&apex, &t2) {
            bad += 1;
        }
    }
    Ok((bad, degenerate))
}

fn nondegenerate_simplex(sampler: &mut Sampler, d: usize) -> Result<SimplexTuple> {
    loop {
        let t = SimplexTuple::new(sampler.points(d + 1)?)?;
        if t.is_nondegenerate() {
            return Ok(t);
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Witness {
    pub trial: u64,
    pub seed: u64,
    pub met: Vec<CellLabel>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma1Report {
    pub d: usize,
    pub trials: u64,
    pub seed: u64,
    pub counterexamples: u64,
    pub witnesses: Vec<Lemma1Witness>,
}

/// One falsification attempt from a derived seed: a random simplex and the
/// hyperplane through `d` further random points.
pub fn lemma1_trial(d: usize, seed: u64) -> Result<BTreeSet<CellLabel>> {
    let mut sampler = Sampler::new(Domain::Ball, d, DEFAULT_PRECISION_BITS, seed)?;
    let simplex = nondegenerate_simplex(&mut sampler, d)?;
    let h = loop {
        match Hyperplane::through(&sampler.points(d)?) {
            Ok(h) => break h,
            Err(Error::Degenerate) => continue,
            Err(e) => return Err(e),
        }
    };
    lemma1_transversal_report(&simplex, &h)
}

/// Counts trials in which a hyperplane meets every R cell or every S cell.
pub fn lemma1_falsify(d: usize, trials: u64, seed: u64) -> Result<Lemma1Report> {
    if !(2..=4).contains(&d) {
        return Err(Error::InvalidArgument(format!(
            "lemma 1 falsification runs for d in 2..=4, got {d}"
        )));
    }
    let witnesses = (0..trials)
        .into_par_iter()
        .map(|t| {
            let s = derive_seed(seed, t);
            let met = lemma1_trial(d, s)?;
            Ok(is_full_family(&met, d).then(|| Lemma1Witness {
                trial: t,
                seed: s,
                met: met.into_iter().collect(),
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    Ok(Lemma1Report {
        d,
        trials,
        seed,
        counterexamples: witnesses.len() as u64,
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma2Report {
    pub d: usize,
    #[serde(rename = "M")]
    pub m: String,
    pub trials: u64,
    pub seed: u64,
    /// Trials whose certificate held.
    pub certified: u64,
    /// Certified trials whose orientation nevertheless changed.
    pub violations: u64,
    /// Trials meeting the `2√d/M` facet margin.
    pub margin_ok: u64,
    /// Trials meeting the margin whose certificate failed.
    pub margin_without_certificate: u64,
    pub violating_trials: Vec<u64>,
}

/// Checks "certificate ⟹ same orientation" on random simplices and their
/// roundings to `grid`.
pub fn lemma2_property_run(
    d: usize,
    trials: u64,
    grid: &GridSpec,
    seed: u64,
) -> Result<Lemma2Report> {
    if trials < 1 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let m = BigInt::from(grid.m().clone());
    let t2 = Rational::new(BigInt::from(4 * d), &m * &m);
    let rows = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut sampler = Sampler::new(
                Domain::Ball,
                d,
                DEFAULT_PRECISION_BITS,
                derive_seed(seed, t),
            )?;
            let p = nondegenerate_simplex(&mut sampler, d)?;
            let q = SimplexTuple::new(p.points().iter().map(|x| round_point(x, grid)).collect())?;
            let certified = lemma2_certificate(&p, &q)?;
            let margin = facet_margins_at_least(&p, &t2)?;
            let violated = certified && p.orientation() != q.orientation();
            Ok((certified, violated, margin))
        })
        .collect::<Result<Vec<_>>>()?;
    let count =
        |f: &dyn Fn(&(bool, bool, bool)) -> bool| rows.iter().filter(|r| f(r)).count() as u64;
    Ok(Lemma2Report {
        d,
        m: grid.to_string(),
        trials,
        seed,
        certified: count(&|r| r.0),
        violations: count(&|r| r.1),
        margin_ok: count(&|r| r.2),
        margin_without_certificate: count(&|r| r.2 && !r.0),
        violating_trials: rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.1)
            .map(|(i, _)| i as u64)
            .collect(),
    })
}
