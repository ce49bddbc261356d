//! Versioned JSON documents for keys, ciphertexts and messages. Field
//! elements are plain integers in [0, 2^m); the reduction polynomial and
//! seeds are hex strings.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf::{Field, FieldContext, GfError};
use crate::grs::GrsParams;
use crate::linalg::Matrix;
use crate::rlce::{RlceError, RlceParams, RlcePublicKey, RlceSecretKey, TwinMixer};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {0} (expected {FORMAT_VERSION})")]
    Version(u32),
    #[error("expected a {expected} document, found {found}")]
    Kind { expected: &'static str, found: String },
    #[error("invalid hex field {0:?}")]
    Hex(String),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Field(#[from] GfError),
    #[error(transparent)]
    Rlce(#[from] RlceError),
}

const PUBLIC: &str = "rlce-public-key";
const SECRET: &str = "rlce-secret-key";
const CIPHERTEXT: &str = "rlce-ciphertext";
const MESSAGE: &str = "rlce-message";

#[derive(Clone, Debug, Serialize, Deserialize)]
struct Header {
    version: u32,
    kind: String,
    m: u32,
    reduction_poly: String,
}

impl Header {
    fn new(kind: &str, field: &FieldContext) -> Self {
        Header {
            version: FORMAT_VERSION,
            kind: kind.to_string(),
            m: field.degree(),
            reduction_poly: format!("0x{:x}", field.reduction_poly()),
        }
    }

    fn field(&self, expected: &'static str) -> Result<Field, FormatError> {
        if self.version != FORMAT_VERSION {
            return Err(FormatError::Version(self.version));
        }
        if self.kind != expected {
            return Err(FormatError::Kind {
                expected,
                found: self.kind.clone(),
            });
        }
        let digits = self.reduction_poly.trim_start_matches("0x");
        let poly = u32::from_str_radix(digits, 16)
            .map_err(|_| FormatError::Hex(self.reduction_poly.clone()))?;
        Ok(FieldContext::new(self.m, poly)?.into())
    }
}

#[derive(Serialize, Deserialize)]
struct PublicKeyDoc {
    #[serde(flatten)]
    header: Header,
    n: usize,
    k: usize,
    w: usize,
    t: usize,
    matrix: Vec<Vec<u16>>,
}

#[derive(Serialize, Deserialize)]
struct SecretKeyDoc {
    #[serde(flatten)]
    header: Header,
    n: usize,
    k: usize,
    w: usize,
    t: usize,
    support: Vec<u16>,
    multiplier: Vec<u16>,
    mixers: Vec<TwinMixer>,
    random_columns: Vec<Vec<u16>>,
    permutation: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<Vec<u16>>>,
    seed: String,
}

#[derive(Serialize, Deserialize)]
struct VectorDoc {
    #[serde(flatten)]
    header: Header,
    length: usize,
    values: Vec<u16>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<String>,
}

/// A ciphertext or message with its field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldVector {
    pub field: Field,
    pub values: Vec<u16>,
    pub seed: Option<Vec<u8>>,
}

fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string(doc).expect("documents serialize");
    s.push('\n');
    s
}

fn check_range(field: &FieldContext, values: &[u16]) -> Result<(), FormatError> {
    match values.iter().find(|&&v| !field.contains(v as u32)) {
        Some(&v) => Err(GfError::OutOfRange {
            value: v as u32,
            m: field.degree(),
        }
        .into()),
        None => Ok(()),
    }
}

fn matrix(field: &Field, rows: &[Vec<u16>], shape: (usize, usize), what: &str) -> Result<Matrix, FormatError> {
    if rows.len() != shape.0 || rows.iter().any(|r| r.len() != shape.1) {
        return Err(FormatError::Invalid(format!(
            "{what} must be {}x{}",
            shape.0, shape.1
        )));
    }
    for r in rows {
        check_range(field, r)?;
    }
    Matrix::from_rows_with_cols(field, rows, shape.1).map_err(|e| FormatError::Invalid(e.to_string()))
}

fn decode_hex(s: &str) -> Result<Vec<u8>, FormatError> {
    hex::decode(s).map_err(|_| FormatError::Hex(s.to_string()))
}

pub fn public_key_to_json(pk: &RlcePublicKey) -> String {
    let p = pk.params();
    to_json(&PublicKeyDoc {
        header: Header::new(PUBLIC, pk.field()),
        n: p.n,
        k: p.k,
        w: p.w,
        t: p.t,
        matrix: pk.matrix().to_rows(),
    })
}

pub fn public_key_from_json(s: &str) -> Result<RlcePublicKey, FormatError> {
    let doc: PublicKeyDoc = serde_json::from_str(s)?;
    let field = doc.header.field(PUBLIC)?;
    let params = RlceParams {
        n: doc.n,
        k: doc.k,
        w: doc.w,
        t: doc.t,
        m: field.degree(),
    };
    params.validate()?;
    let g = matrix(&field, &doc.matrix, (params.k, params.public_length()), "matrix")?;
    Ok(RlcePublicKey::new(params, g)?)
}

pub fn secret_key_to_json(sk: &RlceSecretKey) -> String {
    let p = sk.params();
    to_json(&SecretKeyDoc {
        header: Header::new(SECRET, sk.field()),
        n: p.n,
        k: p.k,
        w: p.w,
        t: p.t,
        support: sk.grs().support().to_vec(),
        multiplier: sk.grs().multiplier().to_vec(),
        mixers: sk.mixers().to_vec(),
        random_columns: sk.random_columns().to_rows(),
        permutation: sk.permutation().to_vec(),
        basis: sk.basis().map(Matrix::to_rows),
        seed: hex::encode(sk.seed()),
    })
}

pub fn secret_key_from_json(s: &str) -> Result<RlceSecretKey, FormatError> {
    let doc: SecretKeyDoc = serde_json::from_str(s)?;
    let field = doc.header.field(SECRET)?;
    let params = RlceParams {
        n: doc.n,
        k: doc.k,
        w: doc.w,
        t: doc.t,
        m: field.degree(),
    };
    params.validate()?;
    check_range(&field, &doc.support)?;
    check_range(&field, &doc.multiplier)?;
    for mx in &doc.mixers {
        check_range(&field, &[mx.a, mx.b, mx.c, mx.d])?;
    }
    let grs = GrsParams::new(&field, doc.support, doc.multiplier, params.k)
        .map_err(|e| FormatError::Invalid(e.to_string()))?;
    let random_columns = matrix(&field, &doc.random_columns, (params.k, params.w), "random_columns")?;
    let basis = doc
        .basis
        .map(|b| matrix(&field, &b, (params.k, params.k), "basis"))
        .transpose()?;
    Ok(RlceSecretKey::from_parts(
        params,
        grs,
        doc.mixers,
        random_columns,
        doc.permutation,
        basis,
        decode_hex(&doc.seed)?,
    )?)
}

fn vector_to_json(kind: &str, v: &FieldVector) -> String {
    to_json(&VectorDoc {
        header: Header::new(kind, &v.field),
        length: v.values.len(),
        values: v.values.clone(),
        seed: v.seed.as_deref().map(hex::encode),
    })
}

fn vector_from_json(kind: &'static str, s: &str) -> Result<FieldVector, FormatError> {
    let doc: VectorDoc = serde_json::from_str(s)?;
    let field = doc.header.field(kind)?;
    if doc.values.len() != doc.length {
        return Err(FormatError::Invalid(format!(
            "length {} but {} values",
            doc.length,
            doc.values.len()
        )));
    }
    check_range(&field, &doc.values)?;
    Ok(FieldVector {
        field,
        values: doc.values,
        seed: doc.seed.as_deref().map(decode_hex).transpose()?,
    })
}

pub fn ciphertext_to_json(v: &FieldVector) -> String {
    vector_to_json(CIPHERTEXT, v)
}

pub fn ciphertext_from_json(s: &str) -> Result<FieldVector, FormatError> {
    vector_from_json(CIPHERTEXT, s)
}

pub fn message_to_json(v: &FieldVector) -> String {
    vector_to_json(MESSAGE, v)
}

pub fn message_from_json(s: &str) -> Result<FieldVector, FormatError> {
    vector_from_json(MESSAGE, s)
}
