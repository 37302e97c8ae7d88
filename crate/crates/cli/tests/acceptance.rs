//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs sequentially so timings are not disturbed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lsc_cli::bench::{run_suite, AggregateRow, BenchOptions, BenchResult, RunRow, Suite};
use lsc_core::dtw::dtw_fast;
use lsc_core::eval::expected_mutual_information;
use lsc_core::preprocess::smooth_values;
use lsc_core::{
    adjusted_mutual_information, adjusted_rand_index, dtw_exact, homogeneity_completeness_v, savgol_kernel,
    silhouette, ContingencyTable, DataMatrix, FastDtwSpec, SavGolSpec,
};

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

// ---------- oracles ----------

fn dtw_enumerated(s: &[f64], t: &[f64]) -> f64 {
    fn walk(s: &[f64], t: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
        let acc = acc + (s[i] - t[j]).abs();
        if i + 1 == s.len() && j + 1 == t.len() {
            *best = best.min(acc);
            return;
        }
        if i + 1 < s.len() {
            walk(s, t, i + 1, j, acc, best);
        }
        if j + 1 < t.len() {
            walk(s, t, i, j + 1, acc, best);
        }
        if i + 1 < s.len() && j + 1 < t.len() {
            walk(s, t, i + 1, j + 1, acc, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(s, t, 0, 0, 0.0, &mut best);
    best
}

fn ari_pairwise(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut in_a, mut in_b) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let (sa, sb) = (a[i] == a[j], b[i] == b[j]);
            if sa && sb {
                both += 1.0;
            }
            if sa {
                in_a += 1.0;
            }
            if sb {
                in_b += 1.0;
            }
        }
    }
    let expected = in_a * in_b / (n * (n - 1) / 2) as f64;
    let max = 0.5 * (in_a + in_b);
    if max == expected {
        1.0
    } else {
        (both - expected) / (max - expected)
    }
}

fn class_counts(labels: &[usize]) -> Vec<f64> {
    let mut c = vec![0.0; labels.iter().max().map_or(0, |m| m + 1)];
    for &l in labels {
        c[l] += 1.0;
    }
    c
}

fn entropy(counts: &[f64], n: f64) -> f64 {
    counts.iter().filter(|&&x| x > 0.0).map(|&x| -(x / n) * (x / n).ln()).sum()
}

/// H(A | B).
fn cond_entropy(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let mut joint = std::collections::BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_insert(0.0) += 1.0;
    }
    let cb = class_counts(b);
    joint.iter().map(|(&(_, y), &c)| -(c / n) * (c / cb[y]).ln()).sum()
}

fn hcv_direct(truth: &[usize], pred: &[usize]) -> (f64, f64, f64) {
    let n = truth.len() as f64;
    let (hc, hk) = (entropy(&class_counts(truth), n), entropy(&class_counts(pred), n));
    let h = if hc == 0.0 { 1.0 } else { 1.0 - cond_entropy(truth, pred) / hc };
    let c = if hk == 0.0 { 1.0 } else { 1.0 - cond_entropy(pred, truth) / hk };
    let v = if h + c == 0.0 { 0.0 } else { 2.0 * h * c / (h + c) };
    (h, c, v)
}

fn binom(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn emi_summation(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as u64;
    let nf = n as f64;
    let mut e = 0.0;
    for &ai in class_counts(a).iter().filter(|&&x| x > 0.0) {
        for &bj in class_counts(b).iter().filter(|&&x| x > 0.0) {
            let (ai, bj) = (ai as u64, bj as u64);
            for nij in (ai + bj).saturating_sub(n).max(1)..=ai.min(bj) {
                let p = binom(ai, nij) * binom(n - ai, bj - nij) / binom(n, bj);
                let x = nij as f64;
                e += p * (x / nf) * (nf * x / (ai as f64 * bj as f64)).ln();
            }
        }
    }
    e
}

fn silhouette_two_loops(rows: &[Vec<f64>], labels: &[usize]) -> f64 {
    let dist = |i: usize, j: usize| rows[i].iter().zip(&rows[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let n = rows.len();
    let k = labels.iter().max().unwrap() + 1;
    let mut total = 0.0;
    for i in 0..n {
        let size = labels.iter().filter(|&&l| l == labels[i]).count();
        if size == 1 {
            continue;
        }
        let a = (0..n).filter(|&j| j != i && labels[j] == labels[i]).map(|j| dist(i, j)).sum::<f64>()
            / (size - 1) as f64;
        let mut b = f64::INFINITY;
        for c in (0..k).filter(|&c| c != labels[i]) {
            let members: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            if !members.is_empty() {
                b = b.min(members.iter().map(|&j| dist(i, j)).sum::<f64>() / members.len() as f64);
            }
        }
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

/// Dense labeling with at most `k` clusters.
fn random_labels(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    let raw: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
    let mut ids: Vec<usize> = raw.clone();
    ids.sort_unstable();
    ids.dedup();
    raw.iter().map(|x| ids.binary_search(x).unwrap()).collect()
}

/// Center row of the least-squares smoother, from the normal equations
/// solved by Gauss-Jordan elimination.
fn savgol_center_weights(window: usize, order: usize) -> Vec<f64> {
    let m = (window / 2) as i64;
    let p = order + 1;
    let xs: Vec<f64> = (-m..=m).map(|x| x as f64).collect();
    let mut ata = vec![vec![0.0; p]; p];
    for (r, row) in ata.iter_mut().enumerate() {
        for (c, cell) in row.iter_mut().enumerate() {
            *cell = xs.iter().map(|x| x.powi((r + c) as i32)).sum();
        }
    }
    // invert A^T A by Gauss-Jordan
    let mut inv: Vec<Vec<f64>> = (0..p).map(|i| (0..p).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for col in 0..p {
        let pivot = (col..p).max_by(|&a, &b| ata[a][col].abs().total_cmp(&ata[b][col].abs())).unwrap();
        ata.swap(col, pivot);
        inv.swap(col, pivot);
        let d = ata[col][col];
        for j in 0..p {
            ata[col][j] /= d;
            inv[col][j] /= d;
        }
        for r in 0..p {
            if r != col {
                let f = ata[r][col];
                for j in 0..p {
                    ata[r][j] -= f * ata[col][j];
                    inv[r][j] -= f * inv[col][j];
                }
            }
        }
    }
    // value at 0 is the constant coefficient: row 0 of (A^T A)^-1 A^T
    xs.iter()
        .map(|x| (0..p).map(|c| inv[0][c] * x.powi(c as i32)).sum())
        .collect()
}

// ---------- criteria ----------

fn c1_dtw_oracle() -> Outcome {
    let t0 = Instant::now();
    let mut seqs = Vec::new();
    for len in 1..=4u32 {
        for code in 0..4u32.pow(len) {
            seqs.push((0..len).map(|p| f64::from((code / 4u32.pow(p)) % 4)).collect::<Vec<f64>>());
        }
    }
    let mut checked = 0usize;
    let mut mismatches = 0usize;
    for s in &seqs {
        for t in &seqs {
            checked += 1;
            if dtw_exact(s, t).unwrap().distance != dtw_enumerated(s, t) {
                mismatches += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..1000 {
        let mut draw = || -> Vec<f64> {
            let len = rng.random_range(1..=6);
            (0..len).map(|_| f64::from(rng.random_range(0u8..4))).collect()
        };
        let (s, t) = (draw(), draw());
        checked += 1;
        if dtw_exact(&s, &t).unwrap().distance != dtw_enumerated(&s, &t) {
            mismatches += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        mismatches == 0 && secs < 60.0,
        format!("{checked} pairs, {mismatches} mismatches, {secs:.2} s"),
    )
}

fn c2_fastdtw() -> Outcome {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut under, mut full_mismatch, mut worst_ratio) = (0usize, 0usize, 1.0f64);
    for _ in 0..500 {
        let mut draw = || -> Vec<f64> {
            let len = rng.random_range(1..=128);
            (0..len).map(|_| rng.random_range(-10.0..10.0)).collect()
        };
        let (s, t) = (draw(), draw());
        let exact = dtw_exact(&s, &t).unwrap().distance;
        let fast = dtw_fast(&s, &t, FastDtwSpec::default()).unwrap();
        if fast < exact - 1e-9 {
            under += 1;
        }
        if exact > 0.0 {
            worst_ratio = worst_ratio.max(fast / exact);
        }
        let full = FastDtwSpec::new(s.len().max(t.len()), FastDtwSpec::default().min_size).unwrap();
        if (dtw_fast(&s, &t, full).unwrap() - exact).abs() > 1e-9 {
            full_mismatch += 1;
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    outcome(
        under == 0 && full_mismatch == 0 && secs < 60.0,
        format!(
            "500 pairs: {under} below exact, {full_mismatch} full-radius mismatches, worst fast/exact {worst_ratio:.3}, {secs:.2} s"
        ),
    )
}

fn c3_savgol() -> Outcome {
    let kernel = savgol_kernel(SavGolSpec::new(5, 2).unwrap()).unwrap();
    let expected = [-3.0, 12.0, 17.0, 12.0, -3.0].map(|x| x / 35.0);
    let derived = savgol_center_weights(5, 2);
    let kernel_err = kernel
        .coefficients()
        .iter()
        .zip(&expected)
        .zip(&derived)
        .map(|((k, e), d)| (k - e).abs().max((k - d).abs()))
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut poly_err = 0.0f64;
    for _ in 0..200 {
        let len = rng.random_range(5..=40);
        let c: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let degree = rng.random_range(0..=2);
        let y: Vec<f64> = (0..len)
            .map(|i| {
                let x = i as f64;
                (0..=degree).map(|p| c[p] * x.powi(p as i32)).sum()
            })
            .collect();
        let out = smooth_values(&y, &kernel).unwrap();
        for (a, b) in out.iter().zip(&y) {
            poly_err = poly_err.max((a - b).abs());
        }
    }
    outcome(
        kernel_err <= 1e-9 && poly_err <= 1e-9,
        format!("kernel max error {kernel_err:.1e}, polynomial max error {poly_err:.1e} (200 signals, edges included)"),
    )
}

fn c4_metric_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut ari_err, mut hcv_err, mut ami_err, mut sil_err) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..2000 {
        let n = rng.random_range(2..=12);
        let a = random_labels(&mut rng, n, 3);
        let b = random_labels(&mut rng, n, 3);
        ari_err = ari_err.max((adjusted_rand_index(&a, &b).unwrap() - ari_pairwise(&a, &b)).abs());
        let (h1, c1, v1) = homogeneity_completeness_v(&a, &b).unwrap();
        let (h2, c2, v2) = hcv_direct(&a, &b);
        hcv_err = hcv_err.max((h1 - h2).abs()).max((c1 - c2).abs()).max((v1 - v2).abs());
    }
    let mut ami_cases = 0;
    for _ in 0..1000 {
        let n = rng.random_range(2..=30);
        let a = random_labels(&mut rng, n, 4);
        let b = random_labels(&mut rng, n, 4);
        let table = ContingencyTable::new(&a, &b).unwrap();
        let emi = emi_summation(&a, &b);
        ami_err = ami_err.max((expected_mutual_information(&table) - emi).abs());
        let nf = n as f64;
        let (ha, hb) = (entropy(&class_counts(&a), nf), entropy(&class_counts(&b), nf));
        let denom = 0.5 * (ha + hb) - emi;
        let bijective = ari_pairwise(&a, &b) == 1.0 && class_counts(&a).len() == class_counts(&b).len();
        if denom.abs() > 1e-6 && !bijective {
            let mi = ha - cond_entropy(&a, &b);
            ami_err = ami_err.max((adjusted_mutual_information(&a, &b).unwrap() - (mi - emi) / denom).abs());
            ami_cases += 1;
        }
    }
    let mut sil_cases = 0;
    for _ in 0..300 {
        let n = rng.random_range(3..=25);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..3).map(|_| rng.random_range(-3.0..3.0)).collect()).collect();
        let labels = random_labels(&mut rng, n, 4);
        if labels.iter().max() == Some(&0) {
            continue;
        }
        let got = silhouette(&DataMatrix::from_rows(&rows).unwrap(), &labels).unwrap();
        sil_err = sil_err.max((got - silhouette_two_loops(&rows, &labels)).abs());
        sil_cases += 1;
    }
    let worst = ari_err.max(hcv_err).max(ami_err).max(sil_err);
    outcome(
        worst <= 1e-9,
        format!(
            "ARI {ari_err:.1e} / h,c,V {hcv_err:.1e} (2000 cases), AMI+EMI {ami_err:.1e} ({ami_cases} tables <= 4x4), silhouette {sil_err:.1e} ({sil_cases} cases)"
        ),
    )
}

fn agg(rows: &[AggregateRow], pred: impl Fn(&AggregateRow) -> bool) -> Vec<&AggregateRow> {
    rows.iter().filter(|r| pred(r)).collect()
}

fn mean_ari(r: &AggregateRow) -> f64 {
    r.ari.mean.unwrap_or(f64::NAN)
}

fn c5_noise_trend(sweep: &BenchResult) -> Outcome {
    let rows = &sweep.summary.aggregate;
    let lsc = agg(rows, |r| r.algorithm == "lsc");
    let km = agg(rows, |r| r.algorithm == "kmeans");
    let lsc_means: Vec<(f64, f64)> = lsc.iter().map(|r| (r.noise.unwrap(), mean_ari(r))).collect();
    let km_means: Vec<(f64, f64)> = km.iter().map(|r| (r.noise.unwrap(), mean_ari(r))).collect();
    let at1 = |v: &[(f64, f64)]| v.iter().find(|p| p.0 == 1.0).map_or(f64::NAN, |p| p.1);
    let trend_ok = lsc_means.windows(2).all(|w| w[1].1 <= w[0].1 + 0.05);
    let pass = sweep.failed() == 0 && at1(&lsc_means) >= 0.9 && at1(&km_means) >= 0.9 && trend_ok;
    let fmt = |v: &[(f64, f64)]| v.iter().map(|(x, a)| format!("{x}:{a:.3}")).collect::<Vec<_>>().join(" ");
    outcome(pass, format!("LSC [{}] KM [{}]", fmt(&lsc_means), fmt(&km_means)))
}

fn best_lsc(result: &BenchResult, dataset: &str) -> Vec<(f64, f64)> {
    result
        .summary
        .aggregate
        .iter()
        .filter(|r| r.dataset == dataset && r.algorithm == "lsc")
        .map(|r| (r.alpha.unwrap(), r.ari_best.unwrap_or(f64::NAN)))
        .collect()
}

fn realworld(dataset: &str, smooth: bool) -> (BenchResult, f64) {
    let mut opts = BenchOptions {
        seeds: Some(10),
        alphas: Some(vec![0.25, 0.5]),
        datasets: Some(vec![dataset.to_string()]),
        quiet: true,
        ..BenchOptions::default()
    };
    opts.base.smooth = smooth;
    let t0 = Instant::now();
    let result = run_suite(Suite::Realworld, &opts).unwrap();
    (result, t0.elapsed().as_secs_f64())
}

fn c6_iris() -> Outcome {
    let (result, secs) = realworld("iris", true);
    let best = best_lsc(&result, "iris");
    let smoothing = result.rows.iter().find(|r| r.algorithm == "lsc").map(|r| r.smoothing.clone());
    let pass = result.failed() == 0 && best.len() == 2 && best.iter().all(|b| b.1 >= 0.55) && secs < 60.0;
    outcome(
        pass,
        format!(
            "best-of-10 ARI {} (smoothing {}, window fitted to 4 features), {secs:.2} s",
            best.iter().map(|(a, b)| format!("alpha {a}: {b:.4}")).collect::<Vec<_>>().join(", "),
            smoothing.unwrap_or_default()
        ),
    )
}

fn c7_wine() -> Outcome {
    let (result, secs) = realworld("wine", false);
    let best = best_lsc(&result, "wine");
    let pass = result.failed() == 0 && best.len() == 2 && best.iter().all(|b| b.1 >= 0.75) && secs < 120.0;
    outcome(
        pass,
        format!(
            "best-of-10 ARI {} (standardized, no smoothing), {secs:.2} s",
            best.iter().map(|(a, b)| format!("alpha {a}: {b:.4}")).collect::<Vec<_>>().join(", ")
        ),
    )
}

fn c8_smoothing() -> Outcome {
    let opts = BenchOptions {
        seeds: Some(10),
        noise: Some(vec![3.0, 10.0]),
        quiet: true,
        ..BenchOptions::default()
    };
    let result = run_suite(Suite::SmoothingAblation, &opts).unwrap();
    let pair = |noise: f64| {
        let rows = &result.summary.aggregate;
        let on = rows.iter().find(|r| r.noise == Some(noise) && r.smoothing != "off").map(mean_ari);
        let off = rows.iter().find(|r| r.noise == Some(noise) && r.smoothing == "off").map(mean_ari);
        (on.unwrap_or(f64::NAN), off.unwrap_or(f64::NAN))
    };
    let (on3, off3) = pair(3.0);
    let (on10, off10) = pair(10.0);
    outcome(
        result.failed() == 0 && on3 >= off3 - 0.05,
        format!(
            "noise 3 (= 3 x base_std): with {on3:.4}, without {off3:.4}; not asserted, noise 10: with {on10:.4}, without {off10:.4}"
        ),
    )
}

fn rerun_labels(config: &Path, out: &Path, threads: usize) -> Option<Vec<u8>> {
    let status = Command::new(env!("CARGO_BIN_EXE_lsc"))
        .env("LSC_THREADS", threads.to_string())
        .arg("cluster")
        .arg("--config")
        .arg(config)
        .arg("-o")
        .arg(out)
        .output()
        .ok()?;
    if !status.status.success() {
        return None;
    }
    std::fs::read(out.join("labels.csv")).ok()
}

fn c9_determinism(dir: &Path, sweep: &BenchResult) -> Outcome {
    let picks: Vec<&RunRow> = sweep
        .rows
        .iter()
        .filter(|r| r.seed == 0 && (r.noise == Some(3.0) || r.noise == Some(10.0)))
        .collect();
    let mut identical = 0;
    for row in &picks {
        let cell = dir.join("sweep/cells").join(&row.cell);
        let original = std::fs::read(cell.join("labels.csv")).ok();
        let one = rerun_labels(&cell.join("report.json"), &dir.join("rerun1").join(&row.cell), 1);
        let four = rerun_labels(&cell.join("report.json"), &dir.join("rerun4").join(&row.cell), 4);
        if original.is_some() && original == one && one == four {
            identical += 1;
        }
    }
    outcome(
        !picks.is_empty() && identical == picks.len(),
        format!(
            "{identical}/{} cells re-run from their echoed config with LSC_THREADS=1 and 4 gave byte-identical labels",
            picks.len()
        ),
    )
}

fn c10_timing() -> Outcome {
    let opts = BenchOptions {
        seeds: Some(3),
        noise: Some(vec![10.0]),
        ns: vec![250, 500, 1000],
        ds: vec![32],
        quiet: true,
        ..BenchOptions::default()
    };
    let result = run_suite(Suite::Timing, &opts).unwrap();
    let fit = result.summary.timing.first().and_then(|t| t.fit.map(|f| (t.points.clone(), f)));
    match fit {
        Some((points, f)) => outcome(
            result.failed() == 0 && f.r2 >= 0.9,
            format!(
                "mean seconds {}; R^2 = {:.4}",
                points.iter().map(|(n, s)| format!("n={n}: {s:.3}")).collect::<Vec<_>>().join(", "),
                f.r2
            ),
        ),
        None => outcome(false, "no timing fit"),
    }
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut report = |id: usize, name: &'static str, o: Outcome| {
        println!("{} {id:>2} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((id, name, o));
    };

    report(1, "DTW equals brute-force path enumeration", c1_dtw_oracle());
    report(2, "FastDTW never undercuts exact DTW", c2_fastdtw());
    report(3, "Savitzky-Golay kernel and polynomial reproduction", c3_savgol());
    report(4, "ARI / h,c,V / AMI / silhouette oracles", c4_metric_oracles());

    let sweep_opts = BenchOptions {
        seeds: Some(10),
        out: Some(dir.path().join("sweep")),
        quiet: true,
        ..BenchOptions::default()
    };
    let sweep = run_suite(Suite::NoiseSweep, &sweep_opts).unwrap();
    report(5, "noise sweep trend (n=500, d=32, k=5, 10 seeds)", c5_noise_trend(&sweep));
    report(6, "Iris best-of-10 LSC", c6_iris());
    report(7, "Wine best-of-10 LSC", c7_wine());
    report(8, "smoothing ablation", c8_smoothing());
    report(9, "determinism across worker counts", c9_determinism(dir.path(), &sweep));
    report(10, "timing linear in n (FastDTW, d=32, noise 10)", c10_timing());

    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
