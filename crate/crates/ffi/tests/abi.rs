use std::ffi::{CStr, CString};
use std::ptr;

use rlce_ffi::*;

fn last_error() -> String {
    let p = rlce_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn desk() -> RlceParams {
    RlceParams { n: 60, k: 30, w: 12, t: 15, m: 10 }
}

fn keys(seed: &[u8]) -> (*mut RlcePublicKey, *mut RlceSecretKey) {
    let (mut pk, mut sk) = (ptr::null_mut(), ptr::null_mut());
    let s = unsafe { rlce_keygen(&desk(), seed.as_ptr(), seed.len(), false, &mut pk, &mut sk) };
    assert_eq!(s, RlceStatus::Ok);
    (pk, sk)
}

#[test]
fn presets_and_intervals() {
    let name = CString::new("ID1").unwrap();
    let mut p = RlceParams::default();
    assert_eq!(unsafe { rlce_preset(name.as_ptr(), &mut p) }, RlceStatus::Ok);
    assert_eq!((p.n, p.k, p.w, p.m), (532, 376, 96, 10));
    let (mut lo, mut hi) = (0, 0);
    assert_eq!(unsafe { rlce_interval(&p, &mut lo, &mut hi) }, RlceStatus::Ok);
    assert_eq!((lo, hi), (316, 354));
    assert!(rlce_last_error().is_null());

    let name = CString::new("id0").unwrap();
    unsafe { rlce_preset(name.as_ptr(), &mut p) };
    assert_eq!(unsafe { rlce_interval(&p, &mut lo, &mut hi) }, RlceStatus::NotDistinguishable);
    assert!(!last_error().is_empty());

    let name = CString::new("id9").unwrap();
    assert_eq!(unsafe { rlce_preset(name.as_ptr(), &mut p) }, RlceStatus::InvalidArgument);
    assert_eq!(unsafe { rlce_preset(ptr::null(), &mut p) }, RlceStatus::NullPointer);
    assert!(last_error().contains("name"));
}

#[test]
fn encrypt_decrypt_and_buffers() {
    let (pk, sk) = keys(b"abi");
    let msg: Vec<u16> = (0..30).map(|i| i * 31).collect();
    let mut ct = vec![0u16; 72];
    let seed = [7u8];
    let s = unsafe { rlce_encrypt(pk, msg.as_ptr(), msg.len(), seed.as_ptr(), 1, ct.as_mut_ptr(), ct.len()) };
    assert_eq!(s, RlceStatus::Ok);
    let mut back = vec![0u16; 30];
    let s = unsafe { rlce_decrypt(sk, ct.as_ptr(), ct.len(), back.as_mut_ptr(), back.len()) };
    assert_eq!(s, RlceStatus::Ok);
    assert_eq!(back, msg);

    let mut short = vec![0u16; 71];
    let s = unsafe { rlce_encrypt(pk, msg.as_ptr(), msg.len(), seed.as_ptr(), 1, short.as_mut_ptr(), short.len()) };
    assert_eq!(s, RlceStatus::BufferTooSmall);
    let s = unsafe { rlce_encrypt(pk, msg.as_ptr(), 29, seed.as_ptr(), 1, ct.as_mut_ptr(), ct.len()) };
    assert_eq!(s, RlceStatus::InvalidArgument);
    let s = unsafe { rlce_decrypt(ptr::null(), ct.as_ptr(), ct.len(), back.as_mut_ptr(), back.len()) };
    assert_eq!(s, RlceStatus::NullPointer);

    unsafe {
        rlce_public_key_free(pk);
        rlce_secret_key_free(sk);
    }
}

#[test]
fn json_round_trip() {
    let (pk, sk) = keys(b"json");
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(rlce_public_key_to_json(pk, &mut s), RlceStatus::Ok);
        let mut pk2 = ptr::null_mut();
        assert_eq!(rlce_public_key_from_json(s, &mut pk2), RlceStatus::Ok);
        let mut s2 = ptr::null_mut();
        rlce_public_key_to_json(pk2, &mut s2);
        assert_eq!(CStr::from_ptr(s), CStr::from_ptr(s2));
        let mut p = RlceParams::default();
        rlce_public_key_params(pk2, &mut p);
        assert_eq!(p, desk());
        rlce_string_free(s);
        rlce_string_free(s2);

        let mut s = ptr::null_mut();
        assert_eq!(rlce_secret_key_to_json(sk, &mut s), RlceStatus::Ok);
        let mut sk2 = ptr::null_mut();
        assert_eq!(rlce_secret_key_from_json(s, &mut sk2), RlceStatus::Ok);
        rlce_string_free(s);

        let bad = CString::new("{\"version\":1}").unwrap();
        let mut none = ptr::null_mut();
        assert_eq!(rlce_public_key_from_json(bad.as_ptr(), &mut none), RlceStatus::Format);
        assert!(none.is_null());

        rlce_public_key_free(pk);
        rlce_public_key_free(pk2);
        rlce_secret_key_free(sk);
        rlce_secret_key_free(sk2);
        rlce_string_free(ptr::null_mut());
    }
}

#[test]
fn attack_and_verify() {
    let (pk, sk) = keys(b"target");
    let (_, other) = keys(b"other");
    let seed = [1u8];
    unsafe {
        let mut rec = ptr::null_mut();
        assert_eq!(rlce_attack(pk, seed.as_ptr(), 1, 0, &mut rec), RlceStatus::Ok);
        let (mut ok, mut dec) = (false, 0usize);
        assert_eq!(rlce_verify(pk, rec, 20, seed.as_ptr(), 1, &mut ok, &mut dec), RlceStatus::Ok);
        assert!(ok);
        assert_eq!(dec, 20);
        assert_eq!(rlce_verify(pk, sk, 5, seed.as_ptr(), 1, &mut ok, ptr::null_mut()), RlceStatus::Ok);
        assert!(ok);
        assert_eq!(rlce_verify(pk, other, 5, seed.as_ptr(), 1, &mut ok, &mut dec), RlceStatus::Ok);
        assert!(!ok);
        rlce_secret_key_free(rec);
        rlce_secret_key_free(other);
        rlce_secret_key_free(sk);
        rlce_public_key_free(pk);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(rlce_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}
