//! The RLCE public-key scheme (simplified form without the extra scrambling
//! matrices): a GRS generator with w random columns interleaved at the end,
//! each mixed with its GRS neighbour by a secret 2x2 matrix, then permuted.
//!
//! Structural column order (before the permutation) is
//! `g_0 .. g_{n-w-1}` followed by w twin pairs; pair s occupies structural
//! columns `n-w+2s` and `n-w+2s+1` and mixes GRS column `g_{n-w+s}` with
//! random column `r_s`:
//!
//! ```text
//! first  = a_s g + c_s r_s
//! second = b_s g + d_s r_s
//! ```
//!
//! Structural column l ends up at public position `permutation[l]`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FieldContext, GfError};
use crate::grs::{GrsError, GrsParams};
use crate::linalg::{LinalgError, Matrix};
use crate::seed::SeedStreams;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RlceError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("decryption failed")]
    DecryptFailure,
    #[error("message has length {got}, expected {expected}")]
    MessageLength { got: usize, expected: usize },
    #[error("ciphertext has length {got}, expected {expected}")]
    CiphertextLength { got: usize, expected: usize },
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Grs(#[from] GrsError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Scheme parameters: GRS length n, dimension k, w random columns, t
/// errors, field GF(2^m).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RlceParams {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub t: usize,
    pub m: u32,
}

impl RlceParams {
    /// Parameters with t defaulting to floor((n-k)/2).
    pub fn new(n: usize, k: usize, w: usize, m: u32) -> Self {
        RlceParams {
            n,
            k,
            w,
            t: n.saturating_sub(k) / 2,
            m,
        }
    }

    pub fn with_t(mut self, t: usize) -> Self {
        self.t = t;
        self
    }

    pub fn public_length(&self) -> usize {
        self.n + self.w
    }

    pub fn validate(&self) -> Result<(), RlceError> {
        let bad = |msg: String| Err(RlceError::InvalidParams(msg));
        if !(2..=16).contains(&self.m) {
            return bad(format!("field degree m={} outside 2..=16", self.m));
        }
        if self.k == 0 || self.k >= self.n {
            return bad(format!("need 0 < k < n, got k={} n={}", self.k, self.n));
        }
        if self.w > self.n {
            return bad(format!("w={} exceeds n={}", self.w, self.n));
        }
        if self.t > (self.n - self.k) / 2 {
            return bad(format!(
                "t={} exceeds floor((n-k)/2)={}",
                self.t,
                (self.n - self.k) / 2
            ));
        }
        if self.n > 1usize << self.m {
            return bad(format!("n={} exceeds field size 2^{}", self.n, self.m));
        }
        Ok(())
    }
}

impl fmt::Display for RlceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "n={} k={} w={} t={} q=2^{}",
            self.n, self.k, self.w, self.t, self.m
        )
    }
}

/// The six published parameter sets. Odd IDs have w < n-k, even IDs w = n-k.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Preset {
    Id0,
    Id1,
    Id2,
    Id3,
    Id4,
    Id5,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Id0,
        Preset::Id1,
        Preset::Id2,
        Preset::Id3,
        Preset::Id4,
        Preset::Id5,
    ];

    pub fn params(self) -> RlceParams {
        let (n, k, t, w, m) = match self {
            Preset::Id0 => (630, 470, 80, 160, 10),
            Preset::Id1 => (532, 376, 78, 96, 10),
            Preset::Id2 => (1000, 764, 118, 236, 10),
            Preset::Id3 => (846, 618, 114, 144, 10),
            Preset::Id4 => (1360, 800, 280, 560, 11),
            Preset::Id5 => (1160, 700, 230, 311, 11),
        };
        RlceParams { n, k, w, t, m }
    }

    pub fn name(self) -> &'static str {
        match self {
            Preset::Id0 => "id0",
            Preset::Id1 => "id1",
            Preset::Id2 => "id2",
            Preset::Id3 => "id3",
            Preset::Id4 => "id4",
            Preset::Id5 => "id5",
        }
    }

    pub fn security_bits(self) -> u32 {
        match self {
            Preset::Id0 | Preset::Id1 => 128,
            Preset::Id2 | Preset::Id3 => 192,
            Preset::Id4 | Preset::Id5 => 256,
        }
    }
}

impl FromStr for Preset {
    type Err = RlceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| RlceError::InvalidParams(format!("unknown preset {s:?}")))
    }
}

/// Secret 2x2 mixing matrix [[a, b], [c, d]] of one twin pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwinMixer {
    pub a: u16,
    pub b: u16,
    pub c: u16,
    pub d: u16,
}

impl TwinMixer {
    pub fn det(&self, field: &FieldContext) -> u16 {
        field.mul(self.a, self.d) ^ field.mul(self.b, self.c)
    }

    pub fn is_degenerate(&self) -> bool {
        self.c == 0 || self.d == 0
    }

    /// (g, r) -> (a g + c r, b g + d r).
    pub fn mix(&self, field: &FieldContext, g: u16, r: u16) -> (u16, u16) {
        (
            field.mul(self.a, g) ^ field.mul(self.c, r),
            field.mul(self.b, g) ^ field.mul(self.d, r),
        )
    }

    /// Inverse of [`TwinMixer::mix`].
    pub fn unmix(&self, field: &FieldContext, first: u16, second: u16) -> Result<(u16, u16), GfError> {
        let inv = field.inv(self.det(field))?;
        let g = field.mul(inv, field.mul(self.d, first) ^ field.mul(self.c, second));
        let r = field.mul(inv, field.mul(self.b, first) ^ field.mul(self.a, second));
        Ok((g, r))
    }
}

/// Which mixer entry a test key forces to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForcedZero {
    C,
    D,
}

#[derive(Clone, Debug)]
pub struct KeygenOptions {
    /// Resample any mixer with c*d = 0.
    pub force_nondegenerate: bool,
    /// Pairs whose mixer gets a forced zero entry (applied after sampling).
    pub forced_zeros: Vec<(usize, ForcedZero)>,
    /// Reduction polynomial; the default for m when `None`.
    pub reduction_poly: Option<u32>,
}

impl Default for KeygenOptions {
    fn default() -> Self {
        KeygenOptions {
            force_nondegenerate: true,
            forced_zeros: Vec::new(),
            reduction_poly: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlcePublicKey {
    params: RlceParams,
    matrix: Matrix,
}

impl RlcePublicKey {
    pub fn new(params: RlceParams, matrix: Matrix) -> Result<Self, RlceError> {
        params.validate()?;
        if matrix.rows() != params.k || matrix.cols() != params.public_length() {
            return Err(RlceError::InvalidKey(format!(
                "public matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                params.k,
                params.public_length()
            )));
        }
        if matrix.field().degree() != params.m {
            return Err(RlceError::InvalidKey("field degree does not match m".into()));
        }
        Ok(RlcePublicKey { params, matrix })
    }

    pub fn params(&self) -> &RlceParams {
        &self.params
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn field(&self) -> &Field {
        self.matrix.field()
    }
}

/// The secret 4-tuple (x, y, A, P) together with the random columns and an
/// optional change of message basis (the GRS generator used is `basis`
/// times the monomial one; `None` means the identity).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RlceSecretKey {
    pub(crate) params: RlceParams,
    pub(crate) grs: GrsParams,
    pub(crate) mixers: Vec<TwinMixer>,
    pub(crate) random_columns: Matrix,
    pub(crate) permutation: Vec<usize>,
    pub(crate) basis: Option<Matrix>,
    pub(crate) seed: Vec<u8>,
}

impl RlceSecretKey {
    /// Assembles and validates a key from its parts.
    pub fn from_parts(
        params: RlceParams,
        grs: GrsParams,
        mixers: Vec<TwinMixer>,
        random_columns: Matrix,
        permutation: Vec<usize>,
        basis: Option<Matrix>,
        seed: Vec<u8>,
    ) -> Result<Self, RlceError> {
        params.validate()?;
        let field = grs.field().clone();
        let invalid = |m: &str| Err(RlceError::InvalidKey(m.to_string()));
        if grs.n() != params.n || grs.k() != params.k || field.degree() != params.m {
            return invalid("GRS parameters do not match n, k, m");
        }
        if mixers.len() != params.w {
            return invalid("need exactly w mixers");
        }
        if mixers.iter().any(|mx| mx.det(&field) == 0) {
            return invalid("singular mixer");
        }
        if random_columns.rows() != params.k || random_columns.cols() != params.w {
            return invalid("random columns must be k x w");
        }
        let len = params.public_length();
        let mut seen = vec![false; len];
        if permutation.len() != len
            || permutation
                .iter()
                .any(|&p| p >= len || std::mem::replace(&mut seen[p], true))
        {
            return invalid("permutation is not a bijection on the public positions");
        }
        if let Some(b) = &basis {
            if b.rows() != params.k || b.cols() != params.k || b.rank() != params.k {
                return invalid("basis must be an invertible k x k matrix");
            }
        }
        Ok(RlceSecretKey {
            params,
            grs,
            mixers,
            random_columns,
            permutation,
            basis,
            seed,
        })
    }

    pub fn params(&self) -> &RlceParams {
        &self.params
    }

    pub fn field(&self) -> &Field {
        self.grs.field()
    }

    pub fn grs(&self) -> &GrsParams {
        &self.grs
    }

    pub fn mixers(&self) -> &[TwinMixer] {
        &self.mixers
    }

    pub fn random_columns(&self) -> &Matrix {
        &self.random_columns
    }

    /// Structural column -> public position.
    pub fn permutation(&self) -> &[usize] {
        &self.permutation
    }

    pub fn basis(&self) -> Option<&Matrix> {
        self.basis.as_ref()
    }

    pub fn seed(&self) -> &[u8] {
        &self.seed
    }

    /// Public positions of twin pair s, (first, second).
    pub fn pair_positions(&self, s: usize) -> (usize, usize) {
        let base = self.params.n - self.params.w + 2 * s;
        (self.permutation[base], self.permutation[base + 1])
    }

    /// Underlying GRS evaluation point of pair s.
    pub fn pair_point(&self, s: usize) -> u16 {
        self.grs.support()[self.params.n - self.params.w + s]
    }

    /// Regenerates G = basis * G1 * A * P.
    pub fn public_matrix(&self) -> Matrix {
        let field = self.field();
        let RlceParams { n, k, w, .. } = self.params;
        let g0 = self.grs.generator();
        let mut g = Matrix::zeros(field, k, n + w);
        for row in 0..k {
            for l in 0..n - w {
                g.set(row, self.permutation[l], g0.get(row, l));
            }
            for (s, mixer) in self.mixers.iter().enumerate() {
                let (first, second) = mixer.mix(
                    field,
                    g0.get(row, n - w + s),
                    self.random_columns.get(row, s),
                );
                let (p1, p2) = self.pair_positions(s);
                g.set(row, p1, first);
                g.set(row, p2, second);
            }
        }
        match &self.basis {
            Some(b) => b.mul(&g).expect("k x k times k x (n+w)"),
            None => g,
        }
    }

    pub fn public_key(&self) -> RlcePublicKey {
        RlcePublicKey {
            params: self.params,
            matrix: self.public_matrix(),
        }
    }

    /// Undoes P and the mixers; returns the n GRS coordinates (in support
    /// order) of a received word.
    pub fn grs_coordinates(&self, word: &[u16]) -> Result<Vec<u16>, RlceError> {
        let RlceParams { n, w, .. } = self.params;
        if word.len() != n + w {
            return Err(RlceError::CiphertextLength {
                got: word.len(),
                expected: n + w,
            });
        }
        let mut out = Vec::with_capacity(n);
        out.extend((0..n - w).map(|l| word[self.permutation[l]]));
        for (s, mixer) in self.mixers.iter().enumerate() {
            let (p1, p2) = self.pair_positions(s);
            let (g, _) = mixer.unmix(self.field(), word[p1], word[p2])?;
            out.push(g);
        }
        Ok(out)
    }
}

/// Generates a key pair; deterministic in `seed`.
pub fn keygen(
    params: &RlceParams,
    seed: &[u8],
    options: &KeygenOptions,
) -> Result<(RlcePublicKey, RlceSecretKey), RlceError> {
    params.validate()?;
    let poly = match options.reduction_poly {
        Some(p) => p,
        None => crate::gf::default_reduction_poly(params.m).ok_or(GfError::UnsupportedDegree(params.m))?,
    };
    let field: Field = FieldContext::new(params.m, poly)?.into();
    let RlceParams { n, k, w, .. } = *params;
    for &(s, _) in &options.forced_zeros {
        if s >= w {
            return Err(RlceError::InvalidParams(format!(
                "forced degenerate pair {s} but w={w}"
            )));
        }
    }
    let streams = SeedStreams::new(seed);

    let mut rng = streams.rng("support");
    let support: Vec<u16> = index::sample(&mut rng, field.order(), n)
        .into_iter()
        .map(|v| v as u16)
        .collect();
    let mut rng = streams.rng("multiplier");
    let multiplier: Vec<u16> = (0..n)
        .map(|_| rng.gen_range(1..field.order()) as u16)
        .collect();
    let grs = GrsParams::new(&field, support, multiplier, k)?;

    let mut rng = streams.rng("random-columns");
    let data = (0..k * w)
        .map(|_| rng.gen_range(0..field.order()) as u16)
        .collect();
    let random_columns = Matrix::from_vec(&field, k, w, data)?;

    let mut rng = streams.rng("mixers");
    let mut mixers: Vec<TwinMixer> = (0..w)
        .map(|_| sample_mixer(&field, &mut rng, options.force_nondegenerate))
        .collect();
    let mut rng = streams.rng("forced-zeros");
    for &(s, which) in &options.forced_zeros {
        mixers[s] = sample_forced(&field, &mut rng, which);
    }

    let mut rng = streams.rng("permutation");
    let mut permutation: Vec<usize> = (0..n + w).collect();
    permutation.shuffle(&mut rng);

    let sk = RlceSecretKey::from_parts(
        *params,
        grs,
        mixers,
        random_columns,
        permutation,
        None,
        seed.to_vec(),
    )?;
    let pk = sk.public_key();
    if pk.matrix.rank() != k {
        // a rank-deficient G is possible only with negligible probability
        return Err(RlceError::InvalidKey("public matrix lost rank".into()));
    }
    Ok((pk, sk))
}

fn nonzero(field: &FieldContext, rng: &mut ChaCha20Rng) -> u16 {
    rng.gen_range(1..field.order()) as u16
}

fn sample_mixer(field: &FieldContext, rng: &mut ChaCha20Rng, nondegenerate: bool) -> TwinMixer {
    let q = field.order();
    loop {
        let mixer = TwinMixer {
            a: rng.gen_range(0..q) as u16,
            b: rng.gen_range(0..q) as u16,
            c: rng.gen_range(0..q) as u16,
            d: rng.gen_range(0..q) as u16,
        };
        if mixer.det(field) != 0 && !(nondegenerate && mixer.is_degenerate()) {
            return mixer;
        }
    }
}

fn sample_forced(field: &FieldContext, rng: &mut ChaCha20Rng, which: ForcedZero) -> TwinMixer {
    let any = rng.gen_range(0..field.order()) as u16;
    match which {
        // det = a d
        ForcedZero::C => TwinMixer {
            a: nonzero(field, rng),
            b: any,
            c: 0,
            d: nonzero(field, rng),
        },
        // det = b c
        ForcedZero::D => TwinMixer {
            a: any,
            b: nonzero(field, rng),
            c: nonzero(field, rng),
            d: 0,
        },
    }
}

/// c = m G + e with a uniformly drawn error of weight t.
pub fn encrypt(pk: &RlcePublicKey, message: &[u16], seed: &[u8]) -> Result<Vec<u16>, RlceError> {
    encrypt_with_weight(pk, message, seed, pk.params.t)
}

/// Like [`encrypt`] with an explicit error weight.
pub fn encrypt_with_weight(
    pk: &RlcePublicKey,
    message: &[u16],
    seed: &[u8],
    weight: usize,
) -> Result<Vec<u16>, RlceError> {
    let len = pk.params.public_length();
    if weight > len {
        return Err(RlceError::InvalidParams(format!(
            "error weight {weight} exceeds length {len}"
        )));
    }
    let mut rng = SeedStreams::new(seed).rng("error");
    let mut error = vec![0u16; len];
    for pos in index::sample(&mut rng, len, weight) {
        error[pos] = nonzero(pk.field(), &mut rng);
    }
    encrypt_with_error(pk, message, &error)
}

/// c = m G + e for a caller-chosen e.
pub fn encrypt_with_error(pk: &RlcePublicKey, message: &[u16], error: &[u16]) -> Result<Vec<u16>, RlceError> {
    if message.len() != pk.params.k {
        return Err(RlceError::MessageLength {
            got: message.len(),
            expected: pk.params.k,
        });
    }
    if error.len() != pk.params.public_length() {
        return Err(RlceError::CiphertextLength {
            got: error.len(),
            expected: pk.params.public_length(),
        });
    }
    let field = pk.field();
    if let Some(&bad) = message.iter().chain(error).find(|&&v| !field.contains(v as u32)) {
        return Err(RlceError::Field(GfError::OutOfRange {
            value: bad as u32,
            m: field.degree(),
        }));
    }
    let mut c = pk.matrix.left_mul_vec(message)?;
    for (ci, &ei) in c.iter_mut().zip(error) {
        *ci ^= ei;
    }
    Ok(c)
}

/// Random message of length k drawn from `seed`.
pub fn random_message(params: &RlceParams, field: &FieldContext, seed: &[u8]) -> Vec<u16> {
    let mut rng = SeedStreams::new(seed).rng("message");
    (0..params.k)
        .map(|_| rng.gen_range(0..field.order()) as u16)
        .collect()
}

/// Legitimate decryption: unpermute, unmix, decode the GRS coordinates
/// with bound t and map the polynomial back to the message.
pub fn decrypt(sk: &RlceSecretKey, ciphertext: &[u16]) -> Result<Vec<u16>, RlceError> {
    let coords = sk.grs_coordinates(ciphertext)?;
    let (poly, _) = sk
        .grs
        .decode(&coords, sk.params.t)
        .map_err(|_| RlceError::DecryptFailure)?;
    let coeffs = poly.padded(sk.params.k);
    match &sk.basis {
        None => Ok(coeffs),
        Some(b) => {
            // coeffs = m * basis
            let inv = b.inverse().map_err(|_| RlceError::InvalidKey("singular basis".into()))?;
            Ok(inv.left_mul_vec(&coeffs)?)
        }
    }
}

/// Ground-truth partition of the public positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PositionClassification {
    /// GRS columns never associated with a random column.
    pub grs_first: BTreeSet<usize>,
    /// Twin positions that are pure GRS because c_s = 0 or d_s = 0.
    pub grs_second: BTreeSet<usize>,
    /// Twin positions that are pure random because of a degenerate mixer.
    pub random: BTreeSet<usize>,
    /// Positions of pairs with c_s d_s != 0.
    pub pseudo_random: BTreeSet<usize>,
    /// Twin map on every twin position, degenerate pairs included.
    pub twin: BTreeMap<usize, usize>,
    /// Index into the GRS support of the column underlying each position.
    pub grs_index: Vec<usize>,
}

impl PositionClassification {
    pub fn grs_positions(&self) -> BTreeSet<usize> {
        self.grs_first.union(&self.grs_second).copied().collect()
    }

    pub fn twin_positions(&self) -> BTreeSet<usize> {
        self.twin.keys().copied().collect()
    }

    /// Unordered pseudo-random pairs, each as (smaller, larger).
    pub fn pseudo_random_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.pseudo_random
            .iter()
            .map(|&i| (i.min(self.twin[&i]), i.max(self.twin[&i])))
            .collect()
    }
}

pub fn classify_positions(sk: &RlceSecretKey) -> PositionClassification {
    let RlceParams { n, w, .. } = sk.params;
    let mut out = PositionClassification {
        grs_first: BTreeSet::new(),
        grs_second: BTreeSet::new(),
        random: BTreeSet::new(),
        pseudo_random: BTreeSet::new(),
        twin: BTreeMap::new(),
        grs_index: vec![0; n + w],
    };
    for l in 0..n - w {
        let p = sk.permutation[l];
        out.grs_first.insert(p);
        out.grs_index[p] = l;
    }
    for (s, mixer) in sk.mixers.iter().enumerate() {
        let (p1, p2) = sk.pair_positions(s);
        out.twin.insert(p1, p2);
        out.twin.insert(p2, p1);
        out.grs_index[p1] = n - w + s;
        out.grs_index[p2] = n - w + s;
        if mixer.c == 0 {
            out.grs_second.insert(p1);
            out.random.insert(p2);
        } else if mixer.d == 0 {
            out.grs_second.insert(p2);
            out.random.insert(p1);
        } else {
            out.pseudo_random.insert(p1);
            out.pseudo_random.insert(p2);
        }
    }
    out
}
