//! Key recovery for RLCE with w < n - k: twin detection through shortened
//! squares, Sidelnikov-Shestakov on the GRS positions, per-pair recovery of
//! the evaluation point and mixer, and assembly of an equivalent key.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;
use std::sync::Mutex;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::codes::{CodeError, LinearCode};
use crate::distinguisher::{interval, sample_shortening, DistinguisherError, DistinguisherInterval};
use crate::gf::{Field, FieldContext};
use crate::grs::{GrsError, GrsParams, Interpolator, Poly};
use crate::linalg::{LinalgError, Matrix};
use crate::rlce::{
    decrypt, encrypt, random_message, RlceError, RlceParams, RlcePublicKey, RlceSecretKey,
    TwinMixer,
};
use crate::seed::SeedStreams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AttackError {
    #[error("parameters are not distinguishable: the shortening interval is empty")]
    NotDistinguishable,
    #[error("shortening size {size} outside the interval [{min}, {max}]")]
    IntervalViolation { size: usize, min: usize, max: usize },
    #[error("position {0} is not twin-exposed under this shortening")]
    NotTwinExposed(usize),
    #[error("no unique twin for position {position} (candidates {candidates:?})")]
    AmbiguousTwin { position: usize, candidates: Vec<usize> },
    #[error("shortening budget of {samples} sets exhausted with {pairs} pairs and {unmatched} unmatched positions (w = {w})")]
    BudgetExceeded {
        samples: usize,
        pairs: usize,
        unmatched: usize,
        w: usize,
    },
    #[error("input is not a GRS generator: {0}")]
    NotGrs(String),
    #[error("pair ({0}, {1}) is degenerate")]
    DegeneratePair(usize, usize),
    #[error("pair ({0}, {1}) is inconsistent with a twin pair of this GRS code")]
    InconsistentPair(usize, usize),
    #[error("pair ({0}, {1}) sits at infinity after every re-parameterization")]
    PointAtInfinity(usize, usize),
    #[error("no hidden twin found for position {0}")]
    RepairFailed(usize),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Rlce(#[from] RlceError),
}

impl From<DistinguisherError> for AttackError {
    fn from(e: DistinguisherError) -> Self {
        match e {
            DistinguisherError::NotDistinguishable => AttackError::NotDistinguishable,
            DistinguisherError::IntervalViolation { size, min, max } => {
                AttackError::IntervalViolation { size, min, max }
            }
            DistinguisherError::TooShort { len, ell } => AttackError::IntervalViolation {
                size: ell,
                min: 0,
                max: len,
            },
            DistinguisherError::Code(c) => AttackError::Code(c),
        }
    }
}

/// Receives one JSON object per attack event.
pub trait TraceSink: Sync {
    fn event(&self, value: Value);
}

/// Discards all events.
pub struct NoTrace;

impl TraceSink for NoTrace {
    fn event(&self, _: Value) {}
}

/// Writes events as JSON lines.
pub struct JsonLinesTrace<W: Write + Send> {
    out: Mutex<W>,
}

impl<W: Write + Send> JsonLinesTrace<W> {
    pub fn new(out: W) -> Self {
        JsonLinesTrace {
            out: Mutex::new(out),
        }
    }

    pub fn into_inner(self) -> W {
        self.out.into_inner().unwrap_or_else(|e| e.into_inner())
    }
}

impl<W: Write + Send> TraceSink for JsonLinesTrace<W> {
    fn event(&self, value: Value) {
        let mut out = self.out.lock().unwrap_or_else(|e| e.into_inner());
        // tracing is best effort
        let _ = writeln!(out, "{value}");
    }
}

#[derive(Clone, Debug)]
pub struct AttackConfig {
    /// Shortening size; the attack default of the interval when `None`.
    pub ell: Option<usize>,
    /// Maximum number of shortening sets sampled while collecting pairs.
    pub max_shortenings: usize,
    /// Unmatched observations needed before a position counts as a lone
    /// random column.
    pub unmatched_threshold: usize,
    /// Candidate columns tried per degenerate position (0 = all).
    pub max_repair_candidates: usize,
    /// Random anchor choices tried by Sidelnikov-Shestakov.
    pub ss_attempts: usize,
    /// Re-parameterizations tried when a twin point lands at infinity.
    pub max_remaps: usize,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            ell: None,
            max_shortenings: 16,
            unmatched_threshold: 2,
            max_repair_candidates: 0,
            ss_attempts: 8,
            max_remaps: 4,
        }
    }
}

/// How a pair was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discovery {
    /// Index of the shortening set that exposed it.
    Shortening(usize),
    /// Found by pseudo-randomising a GRS column.
    Repair,
}

/// Twin pair (first, second) as public positions. For repaired pairs
/// `first` is the GRS column.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TwinPair {
    pub first: usize,
    pub second: usize,
    pub discovered_by: Discovery,
}

impl TwinPair {
    pub fn positions(&self) -> (usize, usize) {
        (self.first, self.second)
    }

    pub fn unordered(&self) -> (usize, usize) {
        (self.first.min(self.second), self.first.max(self.second))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct TwinPairing {
    /// Disjoint pairs sorted by first position.
    pub pairs: Vec<TwinPair>,
    /// Exposed positions without a detectable twin.
    pub unmatched: Vec<usize>,
    pub shortenings_used: usize,
}

impl TwinPairing {
    pub fn contains(&self, position: usize) -> bool {
        self.pairs
            .iter()
            .any(|p| p.first == position || p.second == position)
    }

    fn insert(&mut self, pair: TwinPair) {
        self.pairs.push(pair);
        self.pairs.sort_by_key(|p| p.first);
        self.unmatched.retain(|&u| u != pair.first && u != pair.second);
    }
}

/// A shortened code together with its twin-exposed positions.
struct Probe {
    shortened: LinearCode,
    exposed: BTreeSet<usize>,
    square_dim: usize,
}

/// Labels j with e_j in the square of `code`: the zero columns of a
/// parity-check matrix of the square. Also returns the square's dimension.
fn exposed_positions(code: &LinearCode) -> (BTreeSet<usize>, usize) {
    let square = code.square();
    let (r, pivots) = square.generator().rref();
    let labels = code.labels();
    let exposed = pivots
        .iter()
        .enumerate()
        .filter(|&(row, _)| r.row(row).iter().filter(|&&v| v != 0).count() == 1)
        .map(|(_, &p)| labels[p])
        .collect();
    (exposed, pivots.len())
}

impl Probe {
    fn new(code: &LinearCode, shortened: &[usize]) -> Result<Self, AttackError> {
        let shortened = code.shorten(shortened)?;
        let (exposed, square_dim) = exposed_positions(&shortened);
        Ok(Probe {
            shortened,
            exposed,
            square_dim,
        })
    }

    fn is_full(&self) -> bool {
        self.square_dim == self.shortened.len()
    }

    /// Positions of `exposed` that stop being exposed once i is shortened
    /// too, i itself excluded.
    fn dropped_after(&self, i: usize) -> Result<Vec<usize>, AttackError> {
        if !self.exposed.contains(&i) {
            return Err(AttackError::NotTwinExposed(i));
        }
        let sub = self.shortened.shorten(&[i])?;
        let (still, _) = exposed_positions(&sub);
        Ok(self
            .exposed
            .iter()
            .copied()
            .filter(|&j| j != i && !still.contains(&j))
            .collect())
    }

    fn match_twin(&self, i: usize) -> Result<usize, AttackError> {
        let candidates = self.dropped_after(i)?;
        match candidates.as_slice() {
            [j] => Ok(*j),
            _ => Err(AttackError::AmbiguousTwin {
                position: i,
                candidates,
            }),
        }
    }
}

fn check_ell(range: &DistinguisherInterval, ell: usize) -> Result<(), AttackError> {
    range.check(ell)?;
    range.check(ell + 1)?;
    Ok(())
}

/// Twin-exposed positions of Sh_L(C): those whose puncturing lowers the
/// dimension of the square.
pub fn find_twin_exposed(
    code: &LinearCode,
    range: &DistinguisherInterval,
    shortened: &[usize],
) -> Result<BTreeSet<usize>, AttackError> {
    check_ell(range, shortened.len())?;
    Ok(Probe::new(code, shortened)?.exposed)
}

/// The twin of exposed position i: the unique other exposed position that
/// is no longer exposed after also shortening i.
pub fn match_twin(
    code: &LinearCode,
    range: &DistinguisherInterval,
    shortened: &[usize],
    i: usize,
) -> Result<usize, AttackError> {
    check_ell(range, shortened.len())?;
    Probe::new(code, shortened)?.match_twin(i)
}

fn attack_ell(range: &DistinguisherInterval, config: &AttackConfig) -> Result<usize, AttackError> {
    let ell = match config.ell {
        Some(ell) => ell,
        None => range.attack_ell().ok_or(AttackError::IntervalViolation {
            size: range.ell_max + 1,
            min: range.ell_min,
            max: range.ell_max,
        })?,
    };
    check_ell(range, ell)?;
    Ok(ell)
}

/// Samples shortening sets until w pairs are matched, or until every
/// remaining twin position has been seen unmatched often enough to be a
/// lone random column.
pub fn collect_all_pairs(
    code: &LinearCode,
    params: &RlceParams,
    config: &AttackConfig,
    seed: &[u8],
    trace: &dyn TraceSink,
) -> Result<TwinPairing, AttackError> {
    let range = interval(params)?;
    let ell = attack_ell(&range, config)?;
    let mut pairing = TwinPairing::default();
    if params.w == 0 {
        return Ok(pairing);
    }
    let streams = SeedStreams::new(seed);
    let mut unmatched_seen: BTreeMap<usize, usize> = BTreeMap::new();
    let lone = |seen: &BTreeMap<usize, usize>, pairing: &TwinPairing| -> Vec<usize> {
        seen.iter()
            .filter(|&(&p, &c)| c >= config.unmatched_threshold && !pairing.contains(p))
            .map(|(&p, _)| p)
            .collect()
    };
    for trial in 0..config.max_shortenings {
        let mut rng = streams.indexed("shortening", trial as u64);
        let set = sample_shortening(code, ell, &mut rng);
        let probe = Probe::new(code, &set)?;
        pairing.shortenings_used = trial + 1;
        if probe.is_full() {
            trace.event(json!({"event": "shortening", "trial": trial, "ell": ell,
                "square_dim": probe.square_dim, "full": true}));
            continue;
        }
        let todo: Vec<usize> = probe
            .exposed
            .iter()
            .copied()
            .filter(|&p| !pairing.contains(p))
            .collect();
        let outcomes: BTreeMap<usize, Result<usize, AttackError>> = todo
            .par_iter()
            .map(|&i| (i, probe.match_twin(i)))
            .collect();
        let mut found = Vec::new();
        for (&i, outcome) in &outcomes {
            match outcome {
                Ok(j) if i < *j && matches!(outcomes.get(j), Some(Ok(back)) if *back == i) => {
                    found.push((i, *j));
                }
                Err(AttackError::AmbiguousTwin { candidates, .. }) if candidates.is_empty() => {
                    *unmatched_seen.entry(i).or_default() += 1;
                }
                _ => {}
            }
        }
        for &(i, j) in &found {
            pairing.insert(TwinPair {
                first: i,
                second: j,
                discovered_by: Discovery::Shortening(trial),
            });
        }
        pairing.unmatched = lone(&unmatched_seen, &pairing);
        trace.event(json!({"event": "shortening", "trial": trial, "ell": ell,
            "L": set, "square_dim": probe.square_dim,
            "exposed": probe.exposed.iter().collect::<Vec<_>>(),
            "new_pairs": found, "pairs": pairing.pairs.len(),
            "unmatched": pairing.unmatched}));
        if pairing.pairs.len() + pairing.unmatched.len() == params.w {
            return Ok(pairing);
        }
    }
    Err(AttackError::BudgetExceeded {
        samples: config.max_shortenings,
        pairs: pairing.pairs.len(),
        unmatched: pairing.unmatched.len(),
        w: params.w,
    })
}

/// Looks for a twin of the lone random column `unmatched` by replacing a
/// GRS column j with a combination of itself and the lone column, and
/// checking that (j, unmatched) becomes a detectable pair. Any GRS column
/// passes the test: a lone random column is independent of the rest of
/// the key, so the key with twin j is equivalent to the genuine one.
pub fn repair_degenerate(
    code: &LinearCode,
    params: &RlceParams,
    unmatched: usize,
    pairing: &TwinPairing,
    config: &AttackConfig,
    seed: &[u8],
    trace: &dyn TraceSink,
) -> Result<TwinPairing, AttackError> {
    let range = interval(params)?;
    let ell = attack_ell(&range, config)?;
    let field = code.field().clone();
    let columns = code.columns_of(&[unmatched])?;
    let u_col = code.generator().column(columns[0]);
    let mut candidates: Vec<usize> = code
        .labels()
        .iter()
        .copied()
        .filter(|&p| !pairing.contains(p) && !pairing.unmatched.contains(&p) && p != unmatched)
        .collect();
    let streams = SeedStreams::new(seed).child(&format!("repair-{unmatched}"));
    candidates.shuffle(&mut streams.rng("order"));
    if config.max_repair_candidates > 0 {
        candidates.truncate(config.max_repair_candidates);
    }
    for (attempt, &j) in candidates.iter().enumerate() {
        let mut rng = streams.indexed("candidate", attempt as u64);
        let alpha = rng.gen_range(1..field.order()) as u16;
        let beta = rng.gen_range(1..field.order()) as u16;
        let col = code.columns_of(&[j])?[0];
        let mut g = code.generator().clone();
        for r in 0..g.rows() {
            let v = field.mul(alpha, g.get(r, col)) ^ field.mul(beta, u_col[r]);
            g.set(r, col, v);
        }
        let modified = LinearCode::with_labels(g, code.labels().to_vec())?;
        let others: Vec<usize> = code
            .labels()
            .iter()
            .copied()
            .filter(|&p| p != j && p != unmatched)
            .collect();
        let mut set: Vec<usize> = rand::seq::index::sample(&mut rng, others.len(), ell)
            .into_iter()
            .map(|i| others[i])
            .collect();
        set.sort_unstable();
        let probe = Probe::new(&modified, &set)?;
        let ok = probe.exposed.contains(&j)
            && probe.exposed.contains(&unmatched)
            && probe.match_twin(j).ok() == Some(unmatched);
        trace.event(json!({"event": "repair", "unmatched": unmatched, "candidate": j,
            "square_dim": probe.square_dim, "accepted": ok}));
        if ok {
            let mut out = pairing.clone();
            out.insert(TwinPair {
                first: j,
                second: unmatched,
                discovered_by: Discovery::Repair,
            });
            return Ok(out);
        }
    }
    Err(AttackError::RepairFailed(unmatched))
}

fn distinct_nonzero_diff(field: &FieldContext, a: u16, b: u16) -> Option<u16> {
    let d = a ^ b;
    (d != 0).then(|| field.inv(d).expect("nonzero"))
}

/// Support and multiplier of a GRS code given by any generator matrix.
/// The result is one of many equivalent parameterizations; only the code
/// is guaranteed to match.
pub fn sidelnikov_shestakov(g: &Matrix, seed: &[u8], attempts: usize) -> Result<GrsParams, AttackError> {
    let field = g.field().clone();
    let (k, n) = (g.rows(), g.cols());
    if k == 0 || g.rank() != k {
        return Err(AttackError::NotGrs("generator must have full row rank".into()));
    }
    if n > field.order() {
        return Err(AttackError::NotGrs("longer than the field".into()));
    }
    if k == 1 {
        let y = g.row(0).to_vec();
        if y.contains(&0) {
            return Err(AttackError::NotGrs("zero coordinate".into()));
        }
        let x = (0..n as u16).collect();
        return Ok(GrsParams::new(&field, x, y, 1)?);
    }
    if n < k + 1 || (k >= 3 && n < k + 2) {
        return Err(AttackError::NotGrs(format!("length {n} too short for dimension {k}")));
    }
    if 2 * k - 1 < n && LinearCode::new(g.clone()).square_dim() != 2 * k - 1 {
        return Err(AttackError::NotGrs("square dimension differs from 2k-1".into()));
    }
    let (s, pivots) = g.rref();
    if pivots != (0..k).collect::<Vec<_>>() {
        return Err(AttackError::NotGrs("first k columns are dependent".into()));
    }
    if (0..k).any(|r| s.row(r)[k..].contains(&0)) {
        return Err(AttackError::NotGrs("zero in the redundant part".into()));
    }
    let mut rng = SeedStreams::new(seed).rng("sidelnikov-shestakov");
    for _ in 0..attempts.max(1) {
        let anchors: Vec<u16> = rand::seq::index::sample(&mut rng, field.order(), 3)
            .into_iter()
            .map(|v| v as u16)
            .collect();
        let Some((x, y)) = ss_candidate(&field, &s, [anchors[0], anchors[1], anchors[2]]) else {
            continue;
        };
        let Ok(params) = GrsParams::new(&field, x, y, k) else {
            continue;
        };
        if params.generator().rref().0 == s {
            return Ok(params);
        }
    }
    Err(AttackError::NotGrs("no consistent parameterization".into()))
}

/// One reconstruction from systematic form with x_0, x_1, x_k fixed.
fn ss_candidate(field: &FieldContext, s: &Matrix, anchors: [u16; 3]) -> Option<(Vec<u16>, Vec<u16>)> {
    let (k, n) = (s.rows(), s.cols());
    let div = |a: u16, b: u16| field.div(a, b).ok();
    let mut x = vec![0u16; n];
    x[0] = anchors[0];
    x[1] = anchors[1];
    x[k] = anchors[2];
    // rows 0 and 1 vanish on the other pivots, so their ratio on column j
    // is C (x_j - x_1) / (x_j - x_0)
    let ratio: Vec<u16> = (k..n)
        .map(|j| div(s.get(0, j), s.get(1, j)))
        .collect::<Option<_>>()?;
    let c = field.mul(
        ratio[0],
        field.mul(anchors[2] ^ anchors[0], distinct_nonzero_diff(field, anchors[2], anchors[1])?),
    );
    for j in k + 1..n {
        let r = ratio[j - k];
        let num = field.mul(r, x[0]) ^ field.mul(c, x[1]);
        x[j] = div(num, r ^ c)?;
    }
    // remaining pivots from rows 0 and i on columns k and k+1
    for i in 2..k {
        let a = |j: usize| -> Option<u16> {
            Some(field.mul(div(s.get(0, j), s.get(i, j))?, x[j] ^ x[0]))
        };
        let (a1, a2) = (a(k)?, a(k + 1)?);
        let num = field.mul(a2, x[k]) ^ field.mul(a1, x[k + 1]);
        x[i] = div(num, a1 ^ a2)?;
    }
    let mut seen = BTreeSet::new();
    if !x.iter().all(|v| seen.insert(*v)) {
        return None;
    }
    // with the row-0 polynomial monic, y_j = s_0j / prod_{l=1}^{k-1} (x_j - x_l)
    let prod_except = |at: u16, skip: usize| -> u16 {
        (0..k)
            .filter(|&l| l != skip)
            .fold(1u16, |acc, l| field.mul(acc, at ^ x[l]))
    };
    let mut y = vec![0u16; n];
    y[0] = field.inv(prod_except(x[0], 0)).ok()?;
    for j in k..n {
        y[j] = div(s.get(0, j), prod_except(x[j], 0))?;
    }
    for i in 1..k {
        // row i = c_i y_j prod_{l != i} (x_j - x_l); fix c_i from column k
        let ci = div(s.get(i, k), field.mul(y[k], prod_except(x[k], i)))?;
        y[i] = field.inv(field.mul(ci, prod_except(x[i], i))).ok()?;
    }
    Some((x, y))
}

/// Failure modes of the per-pair solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PairFailure {
    Degenerate,
    AtInfinity,
    Inconsistent,
}

/// Per-pair linear algebra relative to a fixed GRS parameterization:
/// `coeffs` row r holds the polynomial behind row r of the public matrix.
struct PairSolver<'a> {
    field: &'a Field,
    coeffs: &'a Matrix,
}

impl PairSolver<'_> {
    /// Evaluation point and determinant for columns (v_i, v_tau), using the
    /// subcode vanishing at tau where v_i = det * f(x).
    fn point_and_det(&self, vi: &[u16], vt: &[u16]) -> Result<(u16, u16), PairFailure> {
        let field = self.field;
        let k = self.coeffs.rows();
        let p = vt.iter().position(|&v| v != 0).ok_or(PairFailure::Degenerate)?;
        let inv = field.inv(vt[p]).expect("nonzero");
        let mut values = Vec::with_capacity(k - 1);
        let mut polys = Vec::with_capacity(k - 1);
        for r in (0..k).filter(|&r| r != p) {
            let f = field.mul(vt[r], inv);
            let mut coeffs = self.coeffs.row(r).to_vec();
            field.axpy(&mut coeffs, self.coeffs.row(p), f);
            values.push(vi[r] ^ field.mul(f, vi[p]));
            polys.push(Poly::new(field, coeffs));
        }
        let reference = values.iter().position(|&c| c != 0).ok_or(PairFailure::Degenerate)?;
        let (c_ref, p_ref) = (values[reference], &polys[reference]);
        // c_ref P_t - c_t P_ref vanishes at the pair's point
        let mut g: Option<Poly> = None;
        for t in (0..values.len()).filter(|&t| t != reference) {
            let h = polys[t].scale(c_ref).add(&p_ref.scale(values[t]));
            if h.is_zero() {
                continue;
            }
            let next = match &g {
                None => h.gcd(&h),
                Some(g) => g.gcd(&h),
            };
            let done = next.degree() == Some(1);
            g = Some(next);
            if done {
                break;
            }
        }
        let g = g.ok_or(PairFailure::Inconsistent)?;
        let x = match g.degree() {
            Some(0) => return Err(PairFailure::AtInfinity),
            Some(1) => g.coeffs()[0],
            _ => return Err(PairFailure::Inconsistent),
        };
        let evals: Vec<u16> = polys.iter().map(|p| p.eval(x)).collect();
        let consistent = (0..values.len())
            .all(|t| field.mul(c_ref, evals[t]) == field.mul(values[t], evals[reference]));
        if !consistent || evals[reference] == 0 {
            return Err(PairFailure::Inconsistent);
        }
        let det = field.div(c_ref, evals[reference]).expect("nonzero");
        Ok((x, det))
    }

    /// The GRS column (f_r(x))_r with multiplier 1.
    fn evaluation_column(&self, x: u16) -> Vec<u16> {
        (0..self.coeffs.rows())
            .map(|r| Poly::new(self.field, self.coeffs.row(r).to_vec()).eval(x))
            .collect()
    }

    /// Mixer with d = 1 and multiplier 1 such that
    /// (v_i, v_tau) = (a v + c psi, b v + psi).
    fn mixer(&self, vi: &[u16], vt: &[u16], x: u16, det: u16) -> Result<TwinMixer, PairFailure> {
        let field = self.field;
        let v = self.evaluation_column(x);
        // c: the unique lambda with v_i - lambda v_tau = det v
        let r = vt.iter().position(|&e| e != 0).ok_or(PairFailure::Degenerate)?;
        let c = field
            .div(vi[r] ^ field.mul(det, v[r]), vt[r])
            .expect("nonzero");
        // (a, b) with a - c b = det and v_i - a v = c (v_tau - b v); one
        // free parameter, fixed at b = 0 by the solver
        let k = v.len();
        let mut system = Matrix::zeros(self.field, k + 1, 2);
        let mut rhs = Vec::with_capacity(k + 1);
        for r in 0..k {
            system.set(r, 0, v[r]);
            system.set(r, 1, field.mul(c, v[r]));
            rhs.push(vi[r] ^ field.mul(c, vt[r]));
        }
        system.set(k, 0, 1);
        system.set(k, 1, c);
        rhs.push(det);
        let ab = system.solve(&rhs).map_err(|_| PairFailure::Inconsistent)?;
        let mixer = TwinMixer {
            a: ab[0],
            b: ab[1],
            c,
            d: 1,
        };
        if mixer.det(field) == 0 {
            return Err(PairFailure::Inconsistent);
        }
        Ok(mixer)
    }
}

fn pair_error(f: PairFailure, pair: (usize, usize)) -> AttackError {
    match f {
        PairFailure::Degenerate => AttackError::DegeneratePair(pair.0, pair.1),
        PairFailure::AtInfinity => AttackError::PointAtInfinity(pair.0, pair.1),
        PairFailure::Inconsistent => AttackError::InconsistentPair(pair.0, pair.1),
    }
}

/// Polynomial coefficients of every row of `code` relative to `grs`, which
/// parameterizes the code restricted to `grs_positions`.
fn coefficient_matrix(
    code: &LinearCode,
    grs_positions: &[usize],
    grs: &GrsParams,
) -> Result<Matrix, AttackError> {
    let cols = code.columns_of(grs_positions)?;
    let words = code.generator().select_columns(&cols);
    let first: Vec<usize> = (0..grs.k()).collect();
    Ok(Interpolator::new(grs, &first)?.coefficients(&words))
}

fn pair_columns(code: &LinearCode, pair: (usize, usize)) -> Result<(Vec<u16>, Vec<u16>), AttackError> {
    let cols = code.columns_of(&[pair.0, pair.1])?;
    Ok((
        code.generator().column(cols[0]),
        code.generator().column(cols[1]),
    ))
}

/// Evaluation point x_j and determinant of the mixer of `pair`, with y_j = 1
/// and d = 1. `grs` parameterizes the code on `grs_positions`.
pub fn recover_point_and_det(
    code: &LinearCode,
    grs_positions: &[usize],
    grs: &GrsParams,
    pair: (usize, usize),
) -> Result<(u16, u16), AttackError> {
    let coeffs = coefficient_matrix(code, grs_positions, grs)?;
    let solver = PairSolver {
        field: grs.field(),
        coeffs: &coeffs,
    };
    let (vi, vt) = pair_columns(code, pair)?;
    let (x, det) = solver.point_and_det(&vi, &vt).map_err(|f| pair_error(f, pair))?;
    if grs.support().contains(&x) {
        return Err(AttackError::InconsistentPair(pair.0, pair.1));
    }
    Ok((x, det))
}

/// Mixer of `pair` given its point and determinant.
pub fn recover_mixer(
    code: &LinearCode,
    grs_positions: &[usize],
    grs: &GrsParams,
    pair: (usize, usize),
    x: u16,
    det: u16,
) -> Result<TwinMixer, AttackError> {
    let coeffs = coefficient_matrix(code, grs_positions, grs)?;
    let solver = PairSolver {
        field: grs.field(),
        coeffs: &coeffs,
    };
    let (vi, vt) = pair_columns(code, pair)?;
    solver.mixer(&vi, &vt, x, det).map_err(|f| pair_error(f, pair))
}

/// Moebius change x -> 1/(x - e), y -> y (x - e)^(k-1); same code.
fn remap(grs: &GrsParams, e: u16) -> Result<GrsParams, AttackError> {
    let field = grs.field();
    let k = grs.k() as u64;
    let mut x = Vec::with_capacity(grs.n());
    let mut y = Vec::with_capacity(grs.n());
    for (&xi, &yi) in grs.support().iter().zip(grs.multiplier()) {
        let d = xi ^ e;
        x.push(field.inv(d).map_err(|_| AttackError::NotGrs("remap pole on support".into()))?);
        y.push(field.mul(yi, field.pow(d, k - 1)));
    }
    Ok(GrsParams::new(field, x, y, grs.k())?)
}

/// Output of a successful attack.
#[derive(Clone, Debug)]
pub struct RecoveredKey {
    /// Equivalent secret key; its public matrix equals the attacked one.
    pub key: RlceSecretKey,
    pub pairing: TwinPairing,
    /// Public positions treated as plain GRS columns, in support order.
    pub grs_positions: Vec<usize>,
    /// Evaluation point of each pair, in pairing order.
    pub pair_points: Vec<u16>,
    pub ell: usize,
    pub remaps: usize,
}

/// Runs the whole pipeline on a public key.
pub fn full_attack(
    pk: &RlcePublicKey,
    seed: &[u8],
    config: &AttackConfig,
    trace: &dyn TraceSink,
) -> Result<RecoveredKey, AttackError> {
    let params = *pk.params();
    let field = pk.field().clone();
    let RlceParams { n, k, w, .. } = params;
    let streams = SeedStreams::new(seed);
    let clock = Instant::now();
    let step = |name: &str, start: Instant| {
        trace.event(json!({"event": "step", "step": name,
            "ms": start.elapsed().as_secs_f64() * 1e3}));
    };

    let range = interval(&params)?;
    let ell = attack_ell(&range, config)?;
    trace.event(json!({"event": "interval", "ell_min": range.ell_min,
        "ell_max": range.ell_max, "ell": ell, "params": params}));
    step("interval", clock);
    let code = LinearCode::new(pk.matrix().clone());

    let start = Instant::now();
    let mut pairing = collect_all_pairs(&code, &params, config, streams.child("pairs").seed(), trace)?;
    step("pairs", start);

    let start = Instant::now();
    for u in pairing.unmatched.clone() {
        pairing = repair_degenerate(
            &code,
            &params,
            u,
            &pairing,
            config,
            streams.child("repair").seed(),
            trace,
        )?;
    }
    step("repair", start);

    // GRS columns: everything outside non-repaired pairs and lone columns
    let start = Instant::now();
    let twin_like: BTreeSet<usize> = pairing
        .pairs
        .iter()
        .flat_map(|p| match p.discovered_by {
            Discovery::Repair => vec![p.second],
            Discovery::Shortening(_) => vec![p.first, p.second],
        })
        .collect();
    let ss_positions: Vec<usize> = (0..n + w).filter(|p| !twin_like.contains(p)).collect();
    let ss_cols = code.columns_of(&ss_positions)?;
    let mut grs = sidelnikov_shestakov(
        &code.generator().select_columns(&ss_cols),
        streams.child("ss").seed(),
        config.ss_attempts,
    )?;
    step("sidelnikov_shestakov", start);

    let start = Instant::now();
    let mut remap_rng = streams.rng("remap");
    let mut remaps = 0;
    let (coeffs, solved) = loop {
        let coeffs = coefficient_matrix(&code, &ss_positions, &grs)?;
        let solver = PairSolver {
            field: &field,
            coeffs: &coeffs,
        };
        let solved: Vec<Result<(u16, TwinMixer), (PairFailure, (usize, usize))>> = pairing
            .pairs
            .par_iter()
            .map(|pair| {
                let pos = pair.positions();
                if pair.discovered_by == Discovery::Repair {
                    let idx = ss_positions.binary_search(&pair.first).expect("GRS column");
                    let ident = TwinMixer { a: 1, b: 0, c: 0, d: 1 };
                    return Ok((grs.support()[idx], ident));
                }
                let (vi, vt) = pair_columns(&code, pos).map_err(|_| (PairFailure::Inconsistent, pos))?;
                let (x, det) = solver.point_and_det(&vi, &vt).map_err(|f| (f, pos))?;
                let mixer = solver.mixer(&vi, &vt, x, det).map_err(|f| (f, pos))?;
                Ok((x, mixer))
            })
            .collect();
        let at_infinity = solved
            .iter()
            .any(|s| matches!(s, Err((PairFailure::AtInfinity, _))));
        if !at_infinity || remaps >= config.max_remaps {
            break (coeffs, solved);
        }
        let taken: BTreeSet<u16> = grs
            .support()
            .iter()
            .copied()
            .chain(solved.iter().filter_map(|s| s.as_ref().ok().map(|(x, _)| *x)))
            .collect();
        let free: Vec<u16> = (0..field.order() as u16).filter(|v| !taken.contains(v)).collect();
        let e = *free
            .get(remap_rng.gen_range(0..free.len().max(1)))
            .ok_or_else(|| AttackError::NotGrs("no free point for re-parameterization".into()))?;
        grs = remap(&grs, e)?;
        remaps += 1;
        trace.event(json!({"event": "remap", "pole": e}));
    };
    let solved: Vec<(u16, TwinMixer)> = solved
        .into_iter()
        .collect::<Result<_, _>>()
        .map_err(|(f, pos)| pair_error(f, pos))?;
    for (pair, (x, mixer)) in pairing.pairs.iter().zip(&solved) {
        trace.event(json!({"event": "pair", "first": pair.first, "second": pair.second,
            "point": x, "mixer": mixer}));
    }
    step("mixers", start);

    // assemble: singles, then one GRS point per pair
    let start = Instant::now();
    let repaired: BTreeSet<usize> = pairing
        .pairs
        .iter()
        .filter(|p| p.discovered_by == Discovery::Repair)
        .map(|p| p.first)
        .collect();
    let mut support = Vec::with_capacity(n);
    let mut multiplier = Vec::with_capacity(n);
    let mut permutation = Vec::with_capacity(n + w);
    let mut grs_positions = Vec::with_capacity(n - w);
    for (idx, &p) in ss_positions.iter().enumerate() {
        if !repaired.contains(&p) {
            support.push(grs.support()[idx]);
            multiplier.push(grs.multiplier()[idx]);
            permutation.push(p);
            grs_positions.push(p);
        }
    }
    let mut psi = Matrix::zeros(&field, k, w);
    let mut mixers = Vec::with_capacity(w);
    for (s, (pair, &(x, mixer))) in pairing.pairs.iter().zip(&solved).enumerate() {
        support.push(x);
        multiplier.push(match pair.discovered_by {
            Discovery::Repair => {
                grs.multiplier()[ss_positions.binary_search(&pair.first).expect("GRS column")]
            }
            Discovery::Shortening(_) => 1,
        });
        permutation.push(pair.first);
        permutation.push(pair.second);
        let column = code.generator().column(code.columns_of(&[pair.second])?[0]);
        for (r, v) in column.into_iter().enumerate() {
            psi.set(r, s, v);
        }
        mixers.push(mixer);
    }
    let random_columns = coeffs.inverse()?.mul(&psi)?;
    let key = RlceSecretKey::from_parts(
        params,
        GrsParams::new(&field, support, multiplier, k)?,
        mixers,
        random_columns,
        permutation,
        Some(coeffs),
        seed.to_vec(),
    )?;
    let pair_points = solved.iter().map(|(x, _)| *x).collect();
    step("assemble", start);
    step("total", clock);
    Ok(RecoveredKey {
        key,
        pairing,
        grs_positions,
        pair_points,
        ell,
        remaps,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub same_row_space: bool,
    pub identical_matrix: bool,
    pub trials: usize,
    pub decrypted: usize,
}

impl EquivalenceReport {
    pub fn passed(&self) -> bool {
        self.same_row_space && self.decrypted == self.trials
    }
}

/// Row-space comparison of the regenerated public matrix plus `trials`
/// encrypt/decrypt round trips with the candidate key.
pub fn verify_equivalence(
    pk: &RlcePublicKey,
    candidate: &RlceSecretKey,
    trials: usize,
    seed: &[u8],
) -> EquivalenceReport {
    let regenerated = candidate.public_matrix();
    let same_row_space = regenerated.same_row_space(pk.matrix());
    let identical_matrix = &regenerated == pk.matrix();
    let streams = SeedStreams::new(seed);
    let decrypted = (0..trials)
        .into_par_iter()
        .filter(|&t| {
            let child = streams.child(&format!("trial-{t}"));
            let msg = random_message(pk.params(), pk.field(), child.seed());
            encrypt(pk, &msg, child.seed())
                .and_then(|c| decrypt(candidate, &c))
                .is_ok_and(|m| m == msg)
        })
        .count();
    EquivalenceReport {
        same_row_space,
        identical_matrix,
        trials,
        decrypted,
    }
}
