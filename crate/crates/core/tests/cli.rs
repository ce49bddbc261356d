use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn rlce(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rlce"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn desk_keygen(dir: &TempDir, seed: &str, prefix: &str) -> (String, String) {
    let (p, s) = (path(dir, &format!("{prefix}.pub")), path(dir, &format!("{prefix}.sec")));
    let o = rlce(&[
        "keygen", "--n", "60", "--k", "30", "--w", "12", "--t", "15", "--m", "10", "--seed", seed,
        "--pub", &p, "--sec", &s,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    (p, s)
}

fn read(p: &str) -> String {
    std::fs::read_to_string(Path::new(p)).unwrap()
}

#[test]
fn keygen_reports_interval_and_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let (p1, s1) = desk_keygen(&dir, "0a", "a");
    let (p2, s2) = desk_keygen(&dir, "0a", "b");
    assert_eq!(read(&p1), read(&p2));
    assert_eq!(read(&s1), read(&s2));
    let (p3, _) = desk_keygen(&dir, "0b", "c");
    assert_ne!(read(&p1), read(&p3));
    let o = rlce(&[
        "keygen", "--n", "60", "--k", "30", "--w", "12", "--m", "10", "--pub", &p1, "--sec", &s1,
    ]);
    assert!(stdout(&o).contains("interval 12 21"));
}

#[test]
fn preset_keys() {
    let dir = TempDir::new().unwrap();
    let (p, s) = (path(&dir, "id1.pub"), path(&dir, "id1.sec"));
    let o = rlce(&["keygen", "--preset", "id1", "--seed", "00", "--pub", &p, "--sec", &s]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("public key 376x628"));
    let doc: serde_json::Value = serde_json::from_str(&read(&p)).unwrap();
    let rows = doc["matrix"].as_array().unwrap();
    assert_eq!(rows.len(), 376);
    assert!(rows.iter().all(|r| r.as_array().unwrap().len() == 628));

    let (p0, s0) = (path(&dir, "id0.pub"), path(&dir, "id0.sec"));
    let o = rlce(&["keygen", "--preset", "id0", "--pub", &p0, "--sec", &s0]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("interval not distinguishable"));
    let o = rlce(&["attack", "--pub", &p0, "--out", &path(&dir, "x.sec")]);
    assert_eq!(o.status.code(), Some(2));
    let o = rlce(&["distinguish", "--pub", &p0]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn encrypt_decrypt_round_trip() {
    let dir = TempDir::new().unwrap();
    let (p, s) = desk_keygen(&dir, "01", "k");
    let (ct, msg, dec) = (path(&dir, "c.json"), path(&dir, "m.json"), path(&dir, "d.json"));
    let o = rlce(&["encrypt", "--pub", &p, "--seed", "77", "--out", &ct, "--message-out", &msg]);
    assert!(o.status.success());
    let o = rlce(&["decrypt", "--sec", &s, "--ct", &ct, "--out", &dec]);
    assert!(o.status.success());
    let m: serde_json::Value = serde_json::from_str(&read(&msg)).unwrap();
    let d: serde_json::Value = serde_json::from_str(&read(&dec)).unwrap();
    assert_eq!(m["values"], d["values"]);
    assert_eq!(m["kind"], "rlce-message");

    // encrypting a stored message gives the same ciphertext
    let ct2 = path(&dir, "c2.json");
    let o = rlce(&["encrypt", "--pub", &p, "--seed", "77", "--message", &msg, "--out", &ct2]);
    assert!(o.status.success());
    assert_eq!(read(&ct), read(&ct2));
}

#[test]
fn attack_then_verify() {
    let dir = TempDir::new().unwrap();
    let (p, s) = desk_keygen(&dir, "02", "k");
    let (rec, trace) = (path(&dir, "rec.sec"), path(&dir, "trace.jsonl"));
    let o = rlce(&["attack", "--pub", &p, "--seed", "01", "--out", &rec, "--trace", &trace]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("pairs 12"));
    for line in read(&trace).lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
    let o = rlce(&["verify", "--pub", &p, "--sec", &rec]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("decrypted 100/100"));
    let o = rlce(&["verify", "--pub", &p, "--sec", &s, "--trials", "5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], true);

    // same seed, same recovered key
    let rec2 = path(&dir, "rec2.sec");
    rlce(&["attack", "--pub", &p, "--seed", "01", "--out", &rec2]);
    assert_eq!(read(&rec), read(&rec2));

    // an unrelated key fails verification
    let (_, other) = desk_keygen(&dir, "03", "o");
    let o = rlce(&["verify", "--pub", &p, "--sec", &other, "--trials", "3"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn distinguish_formats() {
    let dir = TempDir::new().unwrap();
    let (p, _) = desk_keygen(&dir, "04", "k");
    let o = rlce(&["distinguish", "--pub", &p, "--trials", "4", "--format", "csv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(
        lines.next(),
        Some("ell,observed_dim,theorem_bound,random_baseline,distinguished")
    );
    assert_eq!(lines.filter(|l| l.ends_with(",true")).count(), 4);
    let o = rlce(&["distinguish", "--pub", &p, "--trials", "3"]);
    assert!(stdout(&o).contains("rlce-like"));
    let again = rlce(&["distinguish", "--pub", &p, "--trials", "3", "--threads", "1"]);
    assert_eq!(o.stdout, again.stdout);
}

#[test]
fn bad_inputs() {
    let dir = TempDir::new().unwrap();
    let o = rlce(&["verify", "--pub", &path(&dir, "missing"), "--sec", "x"]);
    assert_eq!(o.status.code(), Some(1));
    let bogus = path(&dir, "bogus.pub");
    std::fs::write(&bogus, "{\"version\": 9}").unwrap();
    let o = rlce(&["distinguish", "--pub", &bogus]);
    assert_eq!(o.status.code(), Some(1));
    let o = rlce(&["keygen", "--n", "10", "--k", "12", "--w", "1", "--m", "8", "--pub", "a", "--sec", "b"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(rlce(&["params", "--preset", "id1", "--format", "yaml"]).status.code(), Some(1));
}
