//! Regenerates the study-data fixtures under `assets/fixtures`.
//!
//! cargo run -p worldyou-core --release --example make_fixtures
//!
//! The IMI file is searched so that each dimension's group means and SDs,
//! rounded to two decimals, equal the reference summary table, and the
//! effect sizes land as close as possible to the reference ones. The PSS file
//! reproduces the reference group means of the stress scores.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use worldyou_core::analytics::imi::Dimension;
use worldyou_core::analytics::stats::{cohens_d, mean, pooled_sd, sample_sd};
use worldyou_core::analytics::{imi_header, pss_header};

const N: usize = 14;

/// (dimension, E mean, E sd, C mean, C sd, d)
const TARGETS: [(Dimension, f64, f64, f64, f64, f64); 6] = [
    (Dimension::IE, 5.61, 0.44, 4.78, 0.52, 1.73),
    (Dimension::PC, 5.48, 0.55, 4.79, 0.65, 1.15),
    (Dimension::EI, 4.07, 1.13, 4.19, 0.51, -0.13),
    (Dimension::PT, 1.89, 0.45, 1.70, 0.45, 0.41),
    (Dimension::CH, 5.20, 0.54, 4.58, 0.40, 1.31),
    (Dimension::VU, 5.93, 0.37, 5.35, 0.30, 1.72),
];

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

/// Integer keyed sums in `[k, 7k]` whose mean/k equals `total/(n k)` and
/// whose SD/k is as close as possible to `sd`.
fn group_sums(rng: &mut ChaCha8Rng, k: i64, mean_target: f64, sd: f64) -> Vec<i64> {
    let total = (mean_target * (N as i64 * k) as f64).round() as i64;
    let sd_of = |s: &[i64]| sample_sd(&s.iter().map(|&v| v as f64 / k as f64).collect::<Vec<_>>());
    let mut best = Vec::new();
    let mut best_err = f64::INFINITY;
    for _ in 0..20 {
        let mut s = vec![total / N as i64; N];
        for v in s.iter_mut().take((total % N as i64) as usize) {
            *v += 1;
        }
        let mut err = (sd_of(&s) - sd).abs();
        for _ in 0..20_000 {
            let (i, j) = (rng.gen_range(0..N), rng.gen_range(0..N));
            let step = rng.gen_range(1..=3);
            if i == j || s[i] + step > 7 * k || s[j] - step < k {
                continue;
            }
            s[i] += step;
            s[j] -= step;
            let e = (sd_of(&s) - sd).abs();
            if e <= err {
                err = e;
            } else {
                s[i] -= step;
                s[j] += step;
            }
        }
        if err < best_err {
            best_err = err;
            best = s;
        }
    }
    best
}

/// Spread a keyed sum over `k` items in 1..7, then undo reverse keying.
fn items_for(rng: &mut ChaCha8Rng, d: Dimension, sum: i64) -> Vec<i64> {
    let k = d.item_count();
    let mut v = vec![1i64; k];
    let mut left = sum - k as i64;
    while left > 0 {
        let i = rng.gen_range(0..k);
        if v[i] < 7 {
            v[i] += 1;
            left -= 1;
        }
    }
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if d.reversed().contains(&(i + 1)) {
                8 - x
            } else {
                x
            }
        })
        .collect()
}

fn imi(rng: &mut ChaCha8Rng) -> String {
    let mut rows: Vec<Vec<i64>> = vec![Vec::new(); 2 * N];
    for (d, me, se, mc, sc, d_pub) in TARGETS {
        let k = d.item_count() as i64;
        let mut best: Option<(f64, Vec<i64>, Vec<i64>)> = None;
        for de in [-0.004, -0.002, 0.0, 0.002, 0.004] {
            for dc in [-0.004, -0.002, 0.0, 0.002, 0.004] {
                let e = group_sums(rng, k, me, se + de);
                let c = group_sums(rng, k, mc, sc + dc);
                let ef: Vec<f64> = e.iter().map(|&v| v as f64 / k as f64).collect();
                let cf: Vec<f64> = c.iter().map(|&v| v as f64 / k as f64).collect();
                let ok = round2(mean(&ef)) == me
                    && round2(sample_sd(&ef)) == se
                    && round2(mean(&cf)) == mc
                    && round2(sample_sd(&cf)) == sc;
                if !ok {
                    continue;
                }
                let sp = pooled_sd(sample_sd(&ef), sample_sd(&cf), N, N).unwrap();
                let err = (cohens_d(mean(&ef), mean(&cf), sp).unwrap() - d_pub).abs();
                if best.as_ref().is_none_or(|b| err < b.0) {
                    best = Some((err, e, c));
                }
            }
        }
        let (err, e, c) = best.unwrap_or_else(|| panic!("no fixture for {d}"));
        eprintln!("{d}: |d - reference| = {err:.4}");
        for (row, sum) in rows.iter_mut().zip(e.iter().chain(c.iter())) {
            row.extend(items_for(rng, d, *sum));
        }
    }
    let mut out = imi_header().join(",") + "\n";
    for (i, row) in rows.iter().enumerate() {
        let (id, group) = if i < N {
            (format!("E{:02}", i + 1), "E")
        } else {
            (format!("C{:02}", i - N + 1), "C")
        };
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{id},{group},{}", cells.join(","));
    }
    out
}

/// Ten items in 0..4 whose score is `total`.
fn pss_items(rng: &mut ChaCha8Rng, total: i64) -> Vec<i64> {
    let mut v = [0i64; 10];
    let mut left = total;
    while left > 0 {
        let i = rng.gen_range(0..10);
        if v[i] < 4 {
            v[i] += 1;
            left -= 1;
        }
    }
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            if [4, 5, 7, 8].contains(&(i + 1)) {
                4 - x
            } else {
                x
            }
        })
        .collect()
}

fn pss_totals(rng: &mut ChaCha8Rng, sum: i64, sd: f64) -> Vec<i64> {
    loop {
        let mut t = vec![sum / N as i64; N];
        for v in t.iter_mut().take((sum % N as i64) as usize) {
            *v += 1;
        }
        let sd_of = |t: &[i64]| sample_sd(&t.iter().map(|&v| v as f64).collect::<Vec<_>>());
        for _ in 0..20_000 {
            let (i, j) = (rng.gen_range(0..N), rng.gen_range(0..N));
            if i == j || t[i] >= 40 || t[j] <= 14 {
                continue;
            }
            let before = (sd_of(&t) - sd).abs();
            t[i] += 1;
            t[j] -= 1;
            if (sd_of(&t) - sd).abs() > before {
                t[i] -= 1;
                t[j] += 1;
            }
        }
        if round2(sd_of(&t)) == sd {
            return t;
        }
    }
}

fn pss(rng: &mut ChaCha8Rng) -> String {
    let mut out = pss_header().join(",") + "\n";
    let groups = [
        ("E", pss_totals(rng, 288, 4.07)),
        ("C", pss_totals(rng, 294, 3.16)),
    ];
    for (g, totals) in groups {
        for (i, t) in totals.iter().enumerate() {
            let cells: Vec<String> = pss_items(rng, *t).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{g}{:02},{}", i + 1, cells.join(","));
        }
    }
    // screened out before randomisation
    for (i, t) in [13, 9, 11].iter().enumerate() {
        let cells: Vec<String> = pss_items(rng, *t).iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "X{:02},{}", i + 1, cells.join(","));
    }
    out
}

fn themes(rng: &mut ChaCha8Rng) -> String {
    let vocab: [&[&str]; 3] = [
        &["Curiosity", "Challenge", "Visual appeal", "Confusion"],
        &[
            "Letting go",
            "Trying again",
            "Testing beliefs",
            "Facing fear",
            "Asking for help",
        ],
        &[
            "Study pressure",
            "Work habits",
            "Relationships",
            "Self-criticism",
        ],
    ];
    let ids: Vec<String> = (1..=N).map(|i| format!("E{i:02}")).collect();
    let mut out = "participant_id,level,question,theme\n".to_string();
    for level in 1..=5 {
        for (q, words) in vocab.iter().enumerate() {
            if level == 5 && q == 1 {
                // 17 of 20 code instances share one theme
                let mut themes = vec!["Sharing the load with others"; 17];
                themes.extend(["Trying again", "Facing fear", "Facing fear"]);
                for (i, t) in themes.iter().enumerate() {
                    let _ = writeln!(out, "{},L5,Q2,{t}", ids[i % N]);
                }
                continue;
            }
            let n = rng.gen_range(14..=20);
            for i in 0..n {
                let t = words.choose(rng).unwrap();
                let _ = writeln!(out, "{},L{level},Q{},{t}", ids[i % N], q + 1);
            }
        }
    }
    out
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("assets/fixtures");
    std::fs::create_dir_all(&dir).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    std::fs::write(dir.join("imi_groups.csv"), imi(&mut rng)).unwrap();
    std::fs::write(dir.join("pss.csv"), pss(&mut rng)).unwrap();
    std::fs::write(dir.join("themes.csv"), themes(&mut rng)).unwrap();
}
