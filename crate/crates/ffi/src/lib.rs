//! C ABI over `rlce-core`.
//!
//! Keys are opaque heap handles released with the matching `_free`
//! function. Every fallible call returns an [`RlceStatus`]; on failure the
//! message is available from [`rlce_last_error`] on the same thread.
//! Strings returned by the library are released with [`rlce_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use rlce_core::attack::{full_attack, verify_equivalence, AttackConfig, AttackError, NoTrace};
use rlce_core::distinguisher::{interval, DistinguisherError};
use rlce_core::formats;
use rlce_core::rlce::{self, KeygenOptions, Preset, RlceError};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RlceStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    NotDistinguishable = 3,
    AttackFailed = 4,
    DecryptFailure = 5,
    Format = 6,
    BufferTooSmall = 7,
    Panic = 8,
}

/// Scheme parameters. `t` is the error weight, `m` the field degree.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RlceParams {
    pub n: usize,
    pub k: usize,
    pub w: usize,
    pub t: usize,
    pub m: u32,
}

impl From<RlceParams> for rlce::RlceParams {
    fn from(p: RlceParams) -> Self {
        rlce::RlceParams {
            n: p.n,
            k: p.k,
            w: p.w,
            t: p.t,
            m: p.m,
        }
    }
}

impl From<rlce::RlceParams> for RlceParams {
    fn from(p: rlce::RlceParams) -> Self {
        RlceParams {
            n: p.n,
            k: p.k,
            w: p.w,
            t: p.t,
            m: p.m,
        }
    }
}

pub struct RlcePublicKey(rlce::RlcePublicKey);

pub struct RlceSecretKey(rlce::RlceSecretKey);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(RlceStatus, String);

impl Failure {
    fn new(status: RlceStatus, msg: impl ToString) -> Self {
        Failure(status, msg.to_string())
    }
}

impl From<RlceError> for Failure {
    fn from(e: RlceError) -> Self {
        let status = match e {
            RlceError::DecryptFailure => RlceStatus::DecryptFailure,
            _ => RlceStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

impl From<formats::FormatError> for Failure {
    fn from(e: formats::FormatError) -> Self {
        Failure::new(RlceStatus::Format, e)
    }
}

impl From<DistinguisherError> for Failure {
    fn from(e: DistinguisherError) -> Self {
        let status = match e {
            DistinguisherError::NotDistinguishable { .. } => RlceStatus::NotDistinguishable,
            _ => RlceStatus::InvalidArgument,
        };
        Failure::new(status, e)
    }
}

impl From<AttackError> for Failure {
    fn from(e: AttackError) -> Self {
        let status = match e {
            AttackError::NotDistinguishable { .. } => RlceStatus::NotDistinguishable,
            AttackError::IntervalViolation { .. } => RlceStatus::InvalidArgument,
            _ => RlceStatus::AttackFailed,
        };
        Failure::new(status, e)
    }
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> RlceStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RlceStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            RlceStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: caller passes either null or a valid pointer from this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure::new(RlceStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<(), Failure> {
    if p.is_null() {
        Err(Failure::new(RlceStatus::NullPointer, format!("{what} is null")))
    } else {
        Ok(())
    }
}

unsafe fn bytes<'a>(p: *const u8, len: usize, what: &str) -> Result<&'a [u8], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(RlceStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn words<'a>(p: *const u16, len: usize, what: &str) -> Result<&'a [u16], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure::new(RlceStatus::NullPointer, format!("{what} is null")));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::new(RlceStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure::new(RlceStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn write_words(values: &[u16], out: *mut u16, out_len: usize) -> Result<(), Failure> {
    if out_len < values.len() {
        return Err(Failure::new(
            RlceStatus::BufferTooSmall,
            format!("need {} elements, buffer holds {out_len}", values.len()),
        ));
    }
    out_ptr(out, "output buffer")?;
    ptr::copy_nonoverlapping(values.as_ptr(), out, values.len());
    Ok(())
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no interior NUL").into_raw()
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next library call on the same thread.
#[no_mangle]
pub extern "C" fn rlce_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rlce_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rlce_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Looks up a named preset ("id0" .. "id5").
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_preset(name: *const c_char, out: *mut RlceParams) -> RlceStatus {
    guard(|| {
        let name = string(name, "name")?;
        out_ptr(out, "out")?;
        let preset: Preset = name.parse()?;
        *out = preset.params().into();
        Ok(())
    })
}

/// Writes the shortening-size interval on which the public code is
/// distinguishable. Returns `RLCE_STATUS_NOT_DISTINGUISHABLE` when it is empty.
///
/// # Safety
/// `params` must be readable; `ell_min` and `ell_max` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_interval(
    params: *const RlceParams,
    ell_min: *mut usize,
    ell_max: *mut usize,
) -> RlceStatus {
    guard(|| {
        let params = rlce::RlceParams::from(*non_null(params, "params")?);
        out_ptr(ell_min, "ell_min")?;
        out_ptr(ell_max, "ell_max")?;
        params.validate()?;
        let iv = interval(&params)?;
        *ell_min = iv.ell_min;
        *ell_max = iv.ell_max;
        Ok(())
    })
}

/// Generates a key pair, deterministic in the seed bytes.
///
/// # Safety
/// `seed` must point to `seed_len` bytes; `pk_out` and `sk_out` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_keygen(
    params: *const RlceParams,
    seed: *const u8,
    seed_len: usize,
    allow_degenerate: bool,
    pk_out: *mut *mut RlcePublicKey,
    sk_out: *mut *mut RlceSecretKey,
) -> RlceStatus {
    guard(|| {
        let params = rlce::RlceParams::from(*non_null(params, "params")?);
        let seed = bytes(seed, seed_len, "seed")?;
        out_ptr(pk_out, "pk_out")?;
        out_ptr(sk_out, "sk_out")?;
        let opts = KeygenOptions {
            force_nondegenerate: !allow_degenerate,
            ..Default::default()
        };
        let (pk, sk) = rlce::keygen(&params, seed, &opts)?;
        *pk_out = Box::into_raw(Box::new(RlcePublicKey(pk)));
        *sk_out = Box::into_raw(Box::new(RlceSecretKey(sk)));
        Ok(())
    })
}

/// # Safety
/// `pk` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rlce_public_key_free(pk: *mut RlcePublicKey) {
    if !pk.is_null() {
        drop(Box::from_raw(pk));
    }
}

/// # Safety
/// `sk` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rlce_secret_key_free(sk: *mut RlceSecretKey) {
    if !sk.is_null() {
        drop(Box::from_raw(sk));
    }
}

/// # Safety
/// `pk` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_public_key_params(pk: *const RlcePublicKey, out: *mut RlceParams) -> RlceStatus {
    guard(|| {
        let pk = non_null(pk, "pk")?;
        out_ptr(out, "out")?;
        *out = (*pk.0.params()).into();
        Ok(())
    })
}

/// # Safety
/// `pk` must be a live handle; `out` writable. Free the result with
/// `rlce_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rlce_public_key_to_json(pk: *const RlcePublicKey, out: *mut *mut c_char) -> RlceStatus {
    guard(|| {
        let pk = non_null(pk, "pk")?;
        out_ptr(out, "out")?;
        *out = into_c_string(formats::public_key_to_json(&pk.0));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_public_key_from_json(json: *const c_char, out: *mut *mut RlcePublicKey) -> RlceStatus {
    guard(|| {
        let json = string(json, "json")?;
        out_ptr(out, "out")?;
        let pk = formats::public_key_from_json(json)?;
        *out = Box::into_raw(Box::new(RlcePublicKey(pk)));
        Ok(())
    })
}

/// # Safety
/// `sk` must be a live handle; `out` writable. Free the result with
/// `rlce_string_free`.
#[no_mangle]
pub unsafe extern "C" fn rlce_secret_key_to_json(sk: *const RlceSecretKey, out: *mut *mut c_char) -> RlceStatus {
    guard(|| {
        let sk = non_null(sk, "sk")?;
        out_ptr(out, "out")?;
        *out = into_c_string(formats::secret_key_to_json(&sk.0));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_secret_key_from_json(json: *const c_char, out: *mut *mut RlceSecretKey) -> RlceStatus {
    guard(|| {
        let json = string(json, "json")?;
        out_ptr(out, "out")?;
        let sk = formats::secret_key_from_json(json)?;
        *out = Box::into_raw(Box::new(RlceSecretKey(sk)));
        Ok(())
    })
}

/// Encrypts `k` field elements into `n + w` elements.
///
/// # Safety
/// `message` must hold `message_len` elements, `seed` `seed_len` bytes and
/// `out` room for `out_len` elements.
#[no_mangle]
pub unsafe extern "C" fn rlce_encrypt(
    pk: *const RlcePublicKey,
    message: *const u16,
    message_len: usize,
    seed: *const u8,
    seed_len: usize,
    out: *mut u16,
    out_len: usize,
) -> RlceStatus {
    guard(|| {
        let pk = non_null(pk, "pk")?;
        let message = words(message, message_len, "message")?;
        let seed = bytes(seed, seed_len, "seed")?;
        let ct = rlce::encrypt(&pk.0, message, seed)?;
        write_words(&ct, out, out_len)
    })
}

/// Decrypts `n + w` elements into the `k`-element message.
///
/// # Safety
/// `ciphertext` must hold `ciphertext_len` elements and `out` room for
/// `out_len` elements.
#[no_mangle]
pub unsafe extern "C" fn rlce_decrypt(
    sk: *const RlceSecretKey,
    ciphertext: *const u16,
    ciphertext_len: usize,
    out: *mut u16,
    out_len: usize,
) -> RlceStatus {
    guard(|| {
        let sk = non_null(sk, "sk")?;
        let ct = words(ciphertext, ciphertext_len, "ciphertext")?;
        let msg = rlce::decrypt(&sk.0, ct)?;
        write_words(&msg, out, out_len)
    })
}

/// Recovers an equivalent secret key from a public key alone.
/// `max_shortenings` of 0 keeps the default budget.
///
/// # Safety
/// `pk` must be a live handle, `seed` `seed_len` bytes, `sk_out` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_attack(
    pk: *const RlcePublicKey,
    seed: *const u8,
    seed_len: usize,
    max_shortenings: usize,
    sk_out: *mut *mut RlceSecretKey,
) -> RlceStatus {
    guard(|| {
        let pk = non_null(pk, "pk")?;
        let seed = bytes(seed, seed_len, "seed")?;
        out_ptr(sk_out, "sk_out")?;
        let mut config = AttackConfig::default();
        if max_shortenings > 0 {
            config.max_shortenings = max_shortenings;
        }
        let rec = full_attack(&pk.0, seed, &config, &NoTrace)?;
        *sk_out = Box::into_raw(Box::new(RlceSecretKey(rec.key)));
        Ok(())
    })
}

/// Checks that `sk` regenerates `pk` and decrypts `trials` fresh
/// ciphertexts. `passed` is set either way; the count of successful
/// decryptions goes to `decrypted` when it is non-null.
///
/// # Safety
/// Handles must be live, `seed` `seed_len` bytes, `passed` writable.
#[no_mangle]
pub unsafe extern "C" fn rlce_verify(
    pk: *const RlcePublicKey,
    sk: *const RlceSecretKey,
    trials: usize,
    seed: *const u8,
    seed_len: usize,
    passed: *mut bool,
    decrypted: *mut usize,
) -> RlceStatus {
    guard(|| {
        let pk = non_null(pk, "pk")?;
        let sk = non_null(sk, "sk")?;
        let seed = bytes(seed, seed_len, "seed")?;
        out_ptr(passed, "passed")?;
        if pk.0.params() != sk.0.params() {
            return Err(Failure::new(RlceStatus::InvalidArgument, "key parameters differ"));
        }
        let report = verify_equivalence(&pk.0, &sk.0, trials, seed);
        *passed = report.passed();
        if !decrypted.is_null() {
            *decrypted = report.decrypted;
        }
        Ok(())
    })
}
