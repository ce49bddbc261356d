//! Square-code distinguisher for RLCE public keys: shortening range,
//! dimension bound for shortened squares and the trial-based verdict.

use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::codes::{CodeError, LinearCode};
use crate::rlce::RlceParams;
use crate::seed::SeedStreams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DistinguisherError {
    #[error("parameters are not distinguishable: the shortening interval is empty")]
    NotDistinguishable,
    #[error("shortening size {size} outside the interval [{min}, {max}]")]
    IntervalViolation { size: usize, min: usize, max: usize },
    #[error("code length {len} too short to shorten {ell} positions")]
    TooShort { len: usize, ell: usize },
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// Upper bound on dim Sh_L(C)^2 for an honest key and |L| = ell; clamped
/// at zero.
pub fn theorem_bound(params: &RlceParams, ell: usize) -> usize {
    let n = (params.n + params.w) as i64;
    let kw = (params.k + params.w) as i64;
    let ell = ell as i64;
    (n - ell).min(2 * (kw - ell) - 1).max(0) as usize
}

/// Typical dimension of the square of a random shortened code:
/// min(n+w-ell, C(k-ell+1, 2)).
pub fn random_baseline(params: &RlceParams, ell: usize) -> usize {
    let len = (params.n + params.w).saturating_sub(ell);
    let k = params.k.saturating_sub(ell);
    len.min(k * (k + 1) / 2)
}

/// Inclusive range of shortening sizes for which the square of the
/// shortened public code is neither full nor degenerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DistinguisherInterval {
    pub ell_min: usize,
    pub ell_max: usize,
    pub params: RlceParams,
}

impl DistinguisherInterval {
    pub fn contains(&self, ell: usize) -> bool {
        (self.ell_min..=self.ell_max).contains(&ell)
    }

    /// Number of admissible sizes (never zero).
    pub fn width(&self) -> usize {
        self.ell_max + 1 - self.ell_min
    }

    /// Middle of the interval for the distinguisher.
    pub fn middle(&self) -> usize {
        (self.ell_min + self.ell_max) / 2
    }

    /// Shortening size for the attack: the middle, kept below ell_max so
    /// that ell + 1 stays in range. `None` for a single-point interval.
    pub fn attack_ell(&self) -> Option<usize> {
        (self.ell_min < self.ell_max).then(|| self.middle().min(self.ell_max - 1))
    }

    pub fn check(&self, ell: usize) -> Result<(), DistinguisherError> {
        if self.contains(ell) {
            Ok(())
        } else {
            Err(DistinguisherError::IntervalViolation {
                size: ell,
                min: self.ell_min,
                max: self.ell_max,
            })
        }
    }
}

/// ell_min = w + 2k - n (clamped at 0) and ell_max the largest integer
/// strictly below k - (3 + sqrt(16w+1))/2.
pub fn interval(params: &RlceParams) -> Result<DistinguisherInterval, DistinguisherError> {
    let (n, k, w) = (params.n as i64, params.k as i64, params.w as i64);
    let ell_min = (w + 2 * k - n).max(0);
    // With r = isqrt(16w+1) the real bound (2k-5-sqrt(16w+1))/2 has
    // ceiling ceil((2k-5-r)/2), whether or not 16w+1 is a square.
    let r = (16 * params.w + 1).isqrt() as i64;
    let ell_max = (2 * k - 5 - r).div_euclid(2) + (2 * k - 5 - r).rem_euclid(2);
    if ell_max < ell_min {
        return Err(DistinguisherError::NotDistinguishable);
    }
    Ok(DistinguisherInterval {
        ell_min: ell_min as usize,
        ell_max: ell_max as usize,
        params: *params,
    })
}

/// One shortening experiment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ShorteningReport {
    #[serde(rename = "L")]
    pub shortened: Vec<usize>,
    pub observed_dim: usize,
    pub theorem_bound: usize,
    pub random_baseline: usize,
    pub distinguished: bool,
}

impl ShorteningReport {
    pub fn ell(&self) -> usize {
        self.shortened.len()
    }
}

/// dim Sh_L(C)^2 compared against the bound and the random baseline.
pub fn shortened_square_dim(
    code: &LinearCode,
    params: &RlceParams,
    shortened: &[usize],
) -> Result<ShorteningReport, DistinguisherError> {
    let sub = code.shorten(shortened)?;
    let ell = shortened.len();
    let observed_dim = sub.square_dim();
    let random_baseline = random_baseline(params, ell);
    Ok(ShorteningReport {
        shortened: shortened.to_vec(),
        observed_dim,
        theorem_bound: theorem_bound(params, ell),
        random_baseline,
        distinguished: observed_dim < random_baseline,
    })
}

/// Uniform shortening set of size `ell` over the code's labels, sorted.
pub fn sample_shortening(code: &LinearCode, ell: usize, rng: &mut impl rand::Rng) -> Vec<usize> {
    let labels = code.labels();
    let mut set: Vec<usize> = index::sample(rng, labels.len(), ell.min(labels.len()))
        .into_iter()
        .map(|i| labels[i])
        .collect();
    set.sort_unstable();
    set
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub rlce_like: bool,
    pub ell: usize,
    pub distinguished_trials: usize,
    pub evidence: Vec<ShorteningReport>,
}

/// Majority vote over `trials` random shortenings of mid-interval size.
/// Evidence is ordered by trial index.
pub fn is_rlce_like(
    code: &LinearCode,
    params: &RlceParams,
    trials: usize,
    seed: &[u8],
) -> Result<Verdict, DistinguisherError> {
    let range = interval(params)?;
    is_rlce_like_at(code, params, range.middle(), trials, seed)
}

/// [`is_rlce_like`] with an explicit shortening size.
pub fn is_rlce_like_at(
    code: &LinearCode,
    params: &RlceParams,
    ell: usize,
    trials: usize,
    seed: &[u8],
) -> Result<Verdict, DistinguisherError> {
    if ell > code.len() {
        return Err(DistinguisherError::TooShort {
            len: code.len(),
            ell,
        });
    }
    let streams = SeedStreams::new(seed);
    let evidence = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = streams.indexed("distinguisher", t as u64);
            let set = sample_shortening(code, ell, &mut rng);
            shortened_square_dim(code, params, &set)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let distinguished_trials = evidence.iter().filter(|r| r.distinguished).count();
    Ok(Verdict {
        rlce_like: 2 * distinguished_trials > trials,
        ell,
        distinguished_trials,
        evidence,
    })
}
