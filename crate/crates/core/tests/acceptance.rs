//! Acceptance suite: one PASS/FAIL line per criterion. Runs with a custom
//! main so the lines are always printed. The full-size ID1 attack runs only
//! when RLCE_STRETCH=1.

use std::collections::{BTreeSet, HashMap};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rlce_core::attack::{full_attack, verify_equivalence, AttackConfig, AttackError, Discovery, NoTrace};
use rlce_core::codes::LinearCode;
use rlce_core::distinguisher::{sample_shortening, shortened_square_dim};
use rlce_core::gf::{Field, FieldContext};
use rlce_core::grs::{GrsParams, Poly};
use rlce_core::linalg::Matrix;
use rlce_core::rlce::{classify_positions, keygen, ForcedZero, KeygenOptions, Preset, RlceParams};

// Pinned thresholds.
const RANDOM_BASELINE_RATE: f64 = 0.95;
const SHARPNESS_RATE: f64 = 0.80;
const DECRYPT_TRIALS: usize = 100;
const STRETCH_SHORTENINGS: usize = 64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn rng(label: &str, i: u64) -> ChaCha20Rng {
    let mut seed = [0u8; 32];
    for (s, b) in seed.iter_mut().zip(label.bytes().chain(i.to_le_bytes())) {
        *s = b;
    }
    ChaCha20Rng::from_seed(seed)
}

fn desk() -> RlceParams {
    RlceParams::new(60, 30, 12, 10).with_t(15)
}

fn ac_intervals() -> Outcome {
    let expected = [("id1", "316 354"), ("id3", "534 592"), ("id5", "551 663")];
    let mut got = Vec::new();
    let mut pass = true;
    for (name, want) in expected {
        let o = Command::new(env!("CARGO_BIN_EXE_rlce"))
            .args(["params", "--preset", name])
            .output()
            .expect("binary runs");
        let text = String::from_utf8_lossy(&o.stdout).trim().to_string();
        pass &= o.status.success() && text == want;
        got.push(format!("{name}=[{text}]"));
    }
    outcome(pass, got.join(" "))
}

fn ac_grs_square() -> Outcome {
    let field = FieldContext::shared(8).unwrap();
    let mut failures = 0;
    for i in 0..50 {
        let mut r = rng("grs-square", i);
        let n = r.gen_range(6..=64);
        let k = r.gen_range(1..=(n - 1) / 2);
        let grs = GrsParams::random(&field, n, k, &mut r).unwrap();
        let square = LinearCode::new(grs.generator()).square();
        let ysq: Vec<u16> = grs.multiplier().iter().map(|&y| field.mul(y, y)).collect();
        let expected = GrsParams::new(&field, grs.support().to_vec(), ysq, 2 * k - 1).unwrap();
        let ok = square.dim() == 2 * k - 1 && square == LinearCode::new(expected.generator());
        failures += usize::from(!ok);
    }
    outcome(failures == 0, format!("{}/50 exact", 50 - failures))
}

fn ac_random_baseline() -> Outcome {
    let field = FieldContext::shared(8).unwrap();
    let mut hits = 0;
    for i in 0..100 {
        let mut r = rng("random-square", i);
        let k = r.gen_range(6..=12);
        let n = r.gen_range(2 * k..=4 * k);
        let data = (0..k * n).map(|_| r.gen_range(0..256u16)).collect();
        let code = LinearCode::new(Matrix::from_vec(&field, k, n, data).unwrap());
        hits += usize::from(code.square_dim() == n.min(k * (k + 1) / 2));
    }
    outcome(
        hits as f64 >= RANDOM_BASELINE_RATE * 100.0,
        format!("{hits}/100 typical (threshold {RANDOM_BASELINE_RATE})"),
    )
}

fn ac_theorem_bound() -> Outcome {
    let params = desk();
    let mut violations = 0;
    let mut attained = 0;
    let mut trials = 0;
    for key in 0..20u64 {
        let (pk, _) = keygen(&params, &key.to_le_bytes(), &KeygenOptions::default()).unwrap();
        let code = LinearCode::new(pk.matrix().clone());
        let mut r = rng("theorem-bound", key);
        for _ in 0..20 {
            let ell = r.gen_range(12..=21);
            let set = sample_shortening(&code, ell, &mut r);
            let report = shortened_square_dim(&code, &params, &set).unwrap();
            violations += usize::from(report.observed_dim > report.theorem_bound);
            attained += usize::from(report.observed_dim == report.theorem_bound);
            trials += 1;
        }
    }
    let rate = attained as f64 / trials as f64;
    outcome(
        violations == 0 && rate >= SHARPNESS_RATE,
        format!("{violations} violations in {trials}; bound attained {attained}/{trials} (threshold {SHARPNESS_RATE})"),
    )
}

fn ac_duality() -> Outcome {
    let field = FieldContext::shared(8).unwrap();
    let mut failures = 0;
    for i in 0..100 {
        let mut r = rng("duality", i);
        let n = r.gen_range(4..=30);
        let k = r.gen_range(1..n);
        let data = (0..k * n).map(|_| r.gen_range(0..256u16)).collect();
        let code = LinearCode::new(Matrix::from_vec(&field, k, n, data).unwrap());
        let ell = r.gen_range(0..n);
        let set: Vec<usize> = index::sample(&mut r, n, ell).into_vec();
        let lhs1 = code.dual().shorten(&set).unwrap();
        let rhs1 = code.puncture(&set).unwrap().dual();
        let lhs2 = code.shorten(&set).unwrap().dual();
        let rhs2 = code.dual().puncture(&set).unwrap();
        failures += usize::from(lhs1 != rhs1 || lhs2 != rhs2);
    }
    outcome(failures == 0, format!("{}/100 exact", 100 - failures))
}

fn ac_desk_attack() -> Outcome {
    let params = desk();
    let mut passed = 0;
    let mut notes = Vec::new();
    for key in 0..10u64 {
        let seed = [b'k', key as u8];
        let (pk, _) = keygen(&params, &seed, &KeygenOptions::default()).unwrap();
        match full_attack(&pk, &[key as u8], &AttackConfig::default(), &NoTrace) {
            Ok(rk) => {
                let report = verify_equivalence(&pk, &rk.key, DECRYPT_TRIALS, b"verify");
                if report.passed() && report.decrypted == DECRYPT_TRIALS {
                    passed += 1;
                } else {
                    notes.push(format!("key {key}: {}/{}", report.decrypted, report.trials));
                }
            }
            Err(e) => notes.push(format!("key {key}: {e}")),
        }
    }
    outcome(
        passed == 10,
        format!("{passed}/10 keys recovered, {DECRYPT_TRIALS}/{DECRYPT_TRIALS} decryptions each {}", notes.join("; ")),
    )
}

fn ac_degenerate() -> Outcome {
    let params = desk();
    let mut passed = 0;
    let mut genuine_twin = 0;
    let mut notes = Vec::new();
    for key in 0..10u64 {
        let which = if key < 5 { ForcedZero::C } else { ForcedZero::D };
        let pair = (key as usize * 5) % params.w;
        let opts = KeygenOptions {
            forced_zeros: vec![(pair, which)],
            ..Default::default()
        };
        let (pk, sk) = keygen(&params, &[b'd', key as u8], &opts).unwrap();
        let class = classify_positions(&sk);
        let lone = *class.random.iter().next().unwrap();
        let hidden = class.twin[&lone];
        match full_attack(&pk, &[key as u8], &AttackConfig::default(), &NoTrace) {
            Ok(rk) => {
                let repaired: Vec<_> = rk
                    .pairing
                    .pairs
                    .iter()
                    .filter(|p| p.discovered_by == Discovery::Repair)
                    .collect();
                let report = verify_equivalence(&pk, &rk.key, DECRYPT_TRIALS, b"verify");
                let ok = repaired.len() == 1 && repaired[0].second == lone && report.passed();
                passed += usize::from(ok);
                genuine_twin += usize::from(repaired.first().is_some_and(|p| p.first == hidden));
                if !ok {
                    notes.push(format!("key {key}: {} repaired, {}/{}", repaired.len(), report.decrypted, report.trials));
                }
            }
            Err(e) => notes.push(format!("key {key}: {e}")),
        }
    }
    outcome(
        passed == 10,
        format!(
            "{passed}/10 keys repaired and verified (twin up to key equivalence; genuine twin column chosen in {genuine_twin}/10) {}",
            notes.join("; ")
        ),
    )
}

fn ac_id1_stretch() -> Option<Outcome> {
    if std::env::var("RLCE_STRETCH").ok().as_deref() != Some("1") {
        return None;
    }
    let (pk, _) = keygen(&Preset::Id1.params(), b"id1", &KeygenOptions::default()).unwrap();
    let config = AttackConfig {
        max_shortenings: STRETCH_SHORTENINGS,
        ..Default::default()
    };
    Some(match full_attack(&pk, b"stretch", &config, &NoTrace) {
        Ok(rk) => {
            let report = verify_equivalence(&pk, &rk.key, DECRYPT_TRIALS, b"verify");
            outcome(
                report.passed(),
                format!(
                    "{} shortenings, {}/{} decryptions",
                    rk.pairing.shortenings_used, report.decrypted, report.trials
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    })
}

fn ac_even_refusal() -> Outcome {
    let (pk, _) = keygen(&Preset::Id0.params(), b"id0", &KeygenOptions::default()).unwrap();
    match full_attack(&pk, b"a", &AttackConfig::default(), &NoTrace) {
        Err(AttackError::NotDistinguishable) => outcome(true, "NotDistinguishable"),
        Err(e) => outcome(false, format!("unexpected error {e}")),
        Ok(_) => outcome(false, "attack ran"),
    }
}

/// Nearest codeword by enumerating all q^k codewords.
fn nearest_by_codewords(grs: &GrsParams, received: &[u16]) -> Vec<u16> {
    let field = grs.field();
    let q = field.order();
    let mut best: Option<(usize, Vec<u16>)> = None;
    for idx in 0..q.pow(grs.k() as u32) {
        let coeffs = (0..grs.k()).map(|i| ((idx / q.pow(i as u32)) % q) as u16).collect();
        let c = grs.encode(&Poly::new(field, coeffs)).unwrap();
        let d = c.iter().zip(received).filter(|(a, b)| a != b).count();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, c));
        }
    }
    best.unwrap().1
}

/// Every vector of weight <= t with its support and values.
fn error_patterns(field: &Field, n: usize, t: usize) -> Vec<Vec<u16>> {
    let mut out = vec![vec![0u16; n]];
    let mut frontier = vec![(vec![0u16; n], 0usize)];
    for _ in 0..t {
        let mut next = Vec::new();
        for (e, from) in &frontier {
            for pos in *from..n {
                for v in 1..field.order() as u16 {
                    let mut e2 = e.clone();
                    e2[pos] = v;
                    out.push(e2.clone());
                    next.push((e2, pos + 1));
                }
            }
        }
        frontier = next;
    }
    out
}

fn ac_decoder_oracle() -> Outcome {
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    // full codeword enumeration
    for (m, n, k, s) in [(3u32, 7usize, 3usize, 0u64), (3, 8, 4, 1), (2, 4, 2, 2)] {
        let field = FieldContext::shared(m).unwrap();
        let mut r = rng("decoder", s);
        let grs = GrsParams::random(&field, n, k, &mut r).unwrap();
        let t = (n - k) / 2;
        let msg = Poly::new(&field, (0..k).map(|_| r.gen_range(0..field.order() as u16)).collect());
        let c = grs.encode(&msg).unwrap();
        for e in error_patterns(&field, n, t) {
            let received: Vec<u16> = c.iter().zip(&e).map(|(a, b)| a ^ b).collect();
            let oracle = nearest_by_codewords(&grs, &received);
            let bw = grs.decode(&received, t).ok().map(|(f, _)| grs.encode(&f).unwrap());
            mismatches += usize::from(bw.as_ref() != Some(&oracle));
            checked += 1;
        }
    }
    // n = 12: nearest codeword through an exhaustive table of all vectors of
    // weight <= t keyed by syndrome
    let field = FieldContext::shared(4).unwrap();
    let mut r = rng("decoder", 12);
    let (n, k) = (12, 6);
    let t = (n - k) / 2;
    let grs = GrsParams::random(&field, n, k, &mut r).unwrap();
    let h = LinearCode::new(grs.generator()).dual().generator().clone();
    let patterns = error_patterns(&field, n, t);
    let mut table: HashMap<Vec<u16>, Vec<usize>> = HashMap::new();
    for (i, e) in patterns.iter().enumerate() {
        table.entry(h.mul_vec(e).unwrap()).or_default().push(i);
    }
    let msg = Poly::new(&field, (0..k).map(|_| r.gen_range(0..16)).collect());
    let c = grs.encode(&msg).unwrap();
    for e in &patterns {
        let received: Vec<u16> = c.iter().zip(e).map(|(a, b)| a ^ b).collect();
        let leaders = &table[&h.mul_vec(&received).unwrap()];
        let min_w = leaders
            .iter()
            .map(|&i| patterns[i].iter().filter(|&&v| v != 0).count())
            .min()
            .unwrap();
        let nearest: BTreeSet<Vec<u16>> = leaders
            .iter()
            .filter(|&&i| patterns[i].iter().filter(|&&v| v != 0).count() == min_w)
            .map(|&i| received.iter().zip(&patterns[i]).map(|(a, b)| a ^ b).collect())
            .collect();
        let bw = grs.decode(&received, t).ok().map(|(f, _)| grs.encode(&f).unwrap());
        mismatches += usize::from(nearest.len() != 1 || bw.as_ref() != nearest.iter().next());
        checked += 1;
    }
    outcome(mismatches == 0, format!("{checked} error patterns, {mismatches} mismatches"))
}

fn main() -> ExitCode {
    type Check = fn() -> Outcome;
    let criteria: [(&str, &str, Duration, Check); 9] = [
        ("AC01", "distinguisher intervals", Duration::from_secs(1), ac_intervals),
        ("AC02", "GRS square law", Duration::from_secs(10), ac_grs_square),
        ("AC03", "random-code square baseline", Duration::from_secs(30), ac_random_baseline),
        ("AC04", "square dimension bound", Duration::from_secs(120), ac_theorem_bound),
        ("AC05", "shortening/puncturing duality", Duration::from_secs(10), ac_duality),
        ("AC06", "desk-scale key recovery", Duration::from_secs(300), ac_desk_attack),
        ("AC07", "degenerate pair repair", Duration::from_secs(300), ac_degenerate),
        ("AC09", "even-ID refusal", Duration::from_secs(60), ac_even_refusal),
        ("AC10", "decoder vs brute force", Duration::from_secs(120), ac_decoder_oracle),
    ];
    let mut failed = 0;
    for (id, name, budget, check) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let pass = o.pass && elapsed <= budget;
        failed += usize::from(!pass);
        println!(
            "{id} {} {name}: {} ({:.2}s of {}s)",
            if pass { "PASS" } else { "FAIL" },
            o.detail.trim(),
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    let start = Instant::now();
    match ac_id1_stretch() {
        Some(o) => {
            let budget = Duration::from_secs(4 * 3600);
            let elapsed = start.elapsed();
            let pass = o.pass && elapsed <= budget;
            println!(
                "AC08 {} full-parameter ID1 attack (stretch, non-gating): {} ({:.1}s of {}s)",
                if pass { "PASS" } else { "FAIL" },
                o.detail,
                elapsed.as_secs_f64(),
                budget.as_secs()
            );
        }
        None => println!("AC08 SKIP full-parameter ID1 attack (stretch, non-gating): set RLCE_STRETCH=1"),
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
