//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line with the
//! measured value and elapsed time against its budget.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use mambaad_core::blocks::{hss_forward, lss_forward, HssConfig, HssParams, LssConfig, LssParams};
use mambaad_core::io::load_tensor;
use mambaad_core::metrics::oracle::{aupro_exhaustive, auroc_pairs, average_precision_thresholds, f1_max_thresholds};
use mambaad_core::metrics::{aupro, auroc, average_precision, f1_max, mad, LabeledScores, MetricsReport};
use mambaad_core::scan::{gather_sequence, hilbert_matrix, scatter_sequence, schedule, ScanDirection, ScanMethod};
use mambaad_core::ssm::suites::{parallel_lengths, random_lti};
use mambaad_core::ssm::{
    build_conv_kernel, discretize, gradcheck, max_relative_error, scan_convolutional, scan_parallel, scan_recurrent,
};
use mambaad_core::{BinaryMask, Rng, Tensor};

/// Runs `check`, prints the verdict line and fails the test on a miss.
fn criterion(name: &str, budget: Duration, check: impl FnOnce() -> Result<String, String>) {
    let start = Instant::now();
    let outcome = check();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let (ok, detail) = match outcome {
        Ok(d) => (in_time, d),
        Err(d) => (false, d),
    };
    println!(
        "{} {name}: {detail} ({:.3} ms, budget {} ms)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64() * 1e3,
        budget.as_millis()
    );
    assert!(ok, "{name} failed: {detail}{}", if in_time { "" } else { " (over budget)" });
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn hilbert_base_case() {
    criterion("hilbert base case", Duration::from_millis(1), || {
        let rows = hilbert_matrix(1).map_err(|e| e.to_string())?.rows();
        ensure(rows == vec![vec![1, 2], vec![4, 3]], || format!("got {rows:?}"))?;
        Ok("H_1 = [[1, 2], [4, 3]]".into())
    });
}

#[test]
fn hilbert_validity() {
    criterion("hilbert validity n=1..6", Duration::from_secs(1), || {
        for n in 1..=6u32 {
            let g = hilbert_matrix(n).map_err(|e| e.to_string())?;
            let side = g.side();
            let mut pos = vec![None; side * side];
            for r in 0..side {
                for c in 0..side {
                    let k = g.rank(r, c) as usize;
                    ensure((1..=side * side).contains(&k), || format!("n={n}: rank {k} out of range"))?;
                    ensure(pos[k - 1].is_none(), || format!("n={n}: rank {k} repeated"))?;
                    pos[k - 1] = Some((r, c));
                }
            }
            for (k, pair) in pos.windows(2).enumerate() {
                let ((r0, c0), (r1, c1)) = (pair[0].unwrap(), pair[1].unwrap());
                ensure(r0.abs_diff(r1) + c0.abs_diff(c1) == 1, || {
                    format!("n={n}: ranks {} and {} not adjacent", k + 1, k + 2)
                })?;
            }
        }
        Ok("bijective and 4-adjacent for 6 orders".into())
    });
}

#[test]
fn schedule_permutation_suite() {
    criterion("schedule permutation suite", Duration::from_secs(5), || {
        let mut rng = Rng::new(3);
        let (mut checked, mut skipped) = (0, 0);
        for method in ScanMethod::ALL {
            for dir in ScanDirection::ALL {
                for h in [2, 4, 8] {
                    for w in [2, 4, 8] {
                        let permitted = method.supports(h, w) && (!dir.rotates() || h == w);
                        let s = match schedule(method, dir, h, w) {
                            Ok(s) if permitted => s,
                            Err(_) if !permitted => {
                                skipped += 1;
                                continue;
                            }
                            other => return Err(format!("{method:?} {dir:?} {h}x{w}: unexpected {other:?}")),
                        };
                        let case = || format!("{method:?} {dir:?} {h}x{w}");
                        let mut sorted = s.order().to_vec();
                        sorted.sort_unstable();
                        ensure(sorted == (0..h * w).collect::<Vec<_>>(), || format!("{}: not a bijection", case()))?;
                        ensure(s.order().iter().enumerate().all(|(t, &p)| s.inverse()[p] == t), || {
                            format!("{}: inverse wrong", case())
                        })?;
                        let t = Tensor::new(vec![3, h, w], rng.uniform(3 * h * w, -1.0, 1.0).unwrap()).unwrap();
                        let back = gather_sequence(&t, &s).and_then(|q| scatter_sequence(&q, &s));
                        ensure(back.as_ref().ok() == Some(&t), || format!("{}: round trip differs", case()))?;
                        checked += 1;
                    }
                }
            }
        }
        Ok(format!("{checked} schedules checked, {skipped} unsupported geometries rejected"))
    });
}

#[test]
fn recurrence_equals_convolution() {
    criterion("recurrence = convolution, 1000 LTI instances", Duration::from_secs(10), || {
        let mut rng = Rng::new(11);
        let mut worst: f64 = 0.0;
        for i in 0..1000 {
            let n = 1 + rng.below(8);
            let len = 1 + rng.below(256);
            let d = discretize(&random_lti(&mut rng, n));
            let x: Vec<f64> = (0..len).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
            let y = scan_recurrent(&d, &x);
            let z = scan_convolutional(&build_conv_kernel(&d, len), &x).map_err(|e| e.to_string())?;
            let err = max_relative_error(&y, &z, 1e-6);
            ensure(err <= 1e-5, || format!("instance {i} (N={n}, L={len}): relative error {err:e}"))?;
            worst = worst.max(err);
        }
        Ok(format!("max relative error {worst:.3e} <= 1e-5"))
    });
}

#[test]
fn parallel_equals_sequential() {
    criterion("parallel = sequential scan, L <= 4096", Duration::from_secs(10), || {
        let pools: Vec<_> = [1, 2, 8]
            .iter()
            .map(|&n| rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap())
            .collect();
        let mut rng = Rng::new(12);
        let mut worst: f64 = 0.0;
        let lengths = parallel_lengths(4096);
        for &len in &lengths {
            let n = 1 + rng.below(8);
            let d = discretize(&random_lti(&mut rng, n));
            let x: Vec<f64> = (0..len).map(|_| rng.uniform_f64(-1.0, 1.0)).collect();
            let seq = scan_recurrent(&d, &x);
            let runs: Vec<Vec<f64>> = pools.iter().map(|p| p.install(|| scan_parallel(&d, &x))).collect();
            let err = max_relative_error(&seq, &runs[0], 1e-6);
            ensure(err <= 1e-6, || format!("L={len}: relative error {err:e}"))?;
            worst = worst.max(err);
            for (k, r) in runs.iter().enumerate().skip(1) {
                let same = r.iter().zip(&runs[0]).all(|(a, b)| a.to_bits() == b.to_bits());
                ensure(same, || format!("L={len}: pool {k} differs bitwise from 1 worker"))?;
            }
        }
        Ok(format!(
            "{} lengths, max relative error {worst:.3e}, bit-identical over 1/2/8 workers",
            lengths.len()
        ))
    });
}

#[test]
fn selective_gradient_check() {
    criterion("selective scan gradcheck, 100 instances", Duration::from_secs(30), || {
        let mut rng = Rng::new(13);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (len, state) = (1 + rng.below(16), 1 + rng.below(4));
            let r = gradcheck(len, state, rng.next_u64());
            ensure(r.max_rel_error <= 1e-4, || {
                format!("L={len} N={state} seed={}: {:e} at {}", r.seed, r.max_rel_error, r.worst)
            })?;
            worst = worst.max(r.max_rel_error);
        }
        Ok(format!("max relative error {worst:.3e} <= 1e-4"))
    });
}

#[test]
fn residual_identities() {
    criterion("HSS/LSS residual identities, 20 configs", Duration::from_secs(5), || {
        let mut rng = Rng::new(14);
        for i in 0..20 {
            let channels = 1 + rng.below(4);
            let side = 1 << (1 + rng.below(3));
            let method = ScanMethod::ALL[rng.below(5)];
            let k = [1, 2, 4, 8][rng.below(4)];
            let mut dirs = ScanDirection::ALL.to_vec();
            for j in (1..dirs.len()).rev() {
                dirs.swap(j, rng.below(j + 1));
            }
            dirs.truncate(k);
            let x = Tensor::new(
                vec![channels, side, side],
                rng.uniform(channels * side * side, -2.0, 2.0).unwrap(),
            )
            .unwrap();
            let case = || format!("config {i}: C={channels} {side}x{side} {method:?} K={k}");

            let hss_cfg = HssConfig {
                channels,
                expansion: 1 + rng.below(2),
                state_size: 1 + rng.below(4),
                method,
                directions: dirs.clone(),
            };
            let mut hss = HssParams::init(&hss_cfg, &mut rng).map_err(|e| e.to_string())?;
            hss.out_proj.zero();
            let y = hss_forward(&x, &hss).map_err(|e| format!("{}: {e}", case()))?;
            ensure(y == x, || format!("{}: HSS output differs from input", case()))?;

            let lss_cfg = LssConfig {
                hss_blocks: 1 + rng.below(2),
                state_size: 1 + rng.below(4),
                method,
                directions: dirs,
                ..LssConfig::new(channels)
            };
            let mut lss = LssParams::init(&lss_cfg, &mut rng).map_err(|e| e.to_string())?;
            lss.fuse.zero();
            let y = lss_forward(&x, &lss).map_err(|e| format!("{}: {e}", case()))?;
            ensure(y == x, || format!("{}: LSS output differs from input", case()))?;
        }
        Ok("20 HSS and 20 LSS configs return their input bit-exactly".into())
    });
}

fn random_labeled(rng: &mut Rng) -> (Vec<f64>, Vec<bool>) {
    loop {
        let n = 2 + rng.below(199);
        let levels = 2 + rng.below(30);
        let s: Vec<f64> = (0..n).map(|_| rng.below(levels) as f64 / levels as f64).collect();
        let l: Vec<bool> = (0..n).map(|_| rng.below(3) == 0).collect();
        if l.iter().any(|&x| x) && l.iter().any(|&x| !x) {
            return (s, l);
        }
    }
}

fn random_pixels(rng: &mut Rng) -> (Vec<Tensor>, Vec<BinaryMask>) {
    loop {
        let count = 1 + rng.below(3);
        let (mut maps, mut masks) = (Vec::new(), Vec::new());
        for _ in 0..count {
            let (h, w) = (2 + rng.below(15), 2 + rng.below(15));
            let bits = (0..h * w).map(|_| u8::from(rng.below(5) == 0)).collect();
            masks.push(BinaryMask::new(h, w, bits).unwrap());
            let q = (0..h * w).map(|_| rng.below(20) as f32 / 19.0).collect();
            maps.push(Tensor::new(vec![h, w], q).unwrap());
        }
        let pos: usize = masks.iter().map(|m| m.count_positive()).sum();
        let total: usize = masks.iter().map(|m| m.bits().len()).sum();
        if pos > 0 && pos < total {
            return (maps, masks);
        }
    }
}

#[test]
fn metric_oracles() {
    criterion("metric oracles, 200 instances each", Duration::from_secs(30), || {
        let ls = |s: &[f64], l: &[u8]| LabeledScores::new(s.to_vec(), l.iter().map(|&v| v == 1).collect()).unwrap();
        let ex = ls(&[0.8, 0.6, 0.4, 0.2], &[1, 0, 1, 0]);
        let a = auroc(&ex).unwrap();
        ensure(a == 0.75, || format!("worked AUROC {a}"))?;
        let ap = average_precision(&ex).unwrap();
        ensure((ap - 5.0 / 6.0).abs() <= 1e-12, || format!("worked AP {ap}"))?;
        let f1 = f1_max(&ls(&[0.9, 0.8, 0.1], &[1, 0, 1])).unwrap();
        ensure((f1 - 0.8).abs() <= 1e-12, || format!("worked F1_max {f1}"))?;

        let mut rng = Rng::new(15);
        let mut worst: f64 = 0.0;
        for i in 0..200 {
            let (s, l) = random_labeled(&mut rng);
            let d = LabeledScores::new(s.clone(), l.clone()).unwrap();
            let errs = [
                (auroc(&d).unwrap() - auroc_pairs(&s, &l)).abs(),
                (average_precision(&d).unwrap() - average_precision_thresholds(&s, &l)).abs(),
                (f1_max(&d).unwrap() - f1_max_thresholds(&s, &l)).abs(),
            ];
            for (name, e) in ["AUROC", "AP", "F1_max"].iter().zip(errs) {
                ensure(e <= 1e-9, || format!("instance {i}: {name} off by {e:e}"))?;
                worst = worst.max(e);
            }
        }
        for i in 0..200 {
            let (maps, masks) = random_pixels(&mut rng);
            let a = aupro(&maps, &masks, 0.3).map_err(|e| e.to_string())?;
            let b = aupro_exhaustive(&maps, &masks, 0.3).map_err(|e| e.to_string())?;
            ensure((a - b).abs() <= 1e-9, || format!("AU-PRO instance {i}: {a} vs {b}"))?;
            worst = worst.max((a - b).abs());
        }
        Ok(format!(
            "worked examples 0.75 / 0.8333 / 0.8 exact; max oracle deviation {worst:.1e}"
        ))
    });
}

#[test]
fn mad_cell_reproduction() {
    criterion("mAD cell reproduction", Duration::from_millis(1), || {
        let v = mad([0.986, 0.996, 0.978], [0.977, 0.563, 0.592, 0.931]).map_err(|e| e.to_string())?;
        let cell = format!("{:.1}", v * 100.0);
        ensure(cell == "86.0", || format!("mAD cell {cell}"))?;
        Ok(format!("mAD {v:.6} -> \"{cell}\""))
    });
}

fn mambaad(args: &[&str], workers: &str) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_mambaad"))
        .args(args)
        .env("MAMBAAD_WORKERS", workers)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!(
            "`mambaad {}` exited {:?}: {}",
            args.join(" "),
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

const COUNT: usize = 4;

/// synth -> forward for every sample -> eval, inside `root`.
fn end_to_end(root: &Path, workers: &str) -> Result<(), String> {
    let fx = root.join("fx");
    let p = |rel: String| fx.join(rel).to_string_lossy().into_owned();
    let config = root.join("micro.json");
    fs::write(&config, r#"{"stage_depths": [1, 1, 1, 1], "hss_blocks": [1, 1, 1, 1], "seed": 3}"#)
        .map_err(|e| e.to_string())?;
    let fx_s = fx.to_string_lossy().into_owned();
    mambaad(
        &["synth", "--kind", "fixture", "--size", "16", "--channels", "4", "--count", "4", "--seed", "7", "--out", &fx_s],
        workers,
    )?;
    for i in 0..COUNT {
        let n = format!("sample_{i:03}");
        let scales = [0, 1, 2].map(|k| p(format!("{n}/scale{k}.mbt")));
        let (map, rec) = (p(format!("outputs/{n}.mbt")), p(format!("outputs/{n}.json")));
        let cfg = config.to_string_lossy().into_owned();
        mambaad(
            &[
                "forward", "--pyramid", &scales[0], &scales[1], &scales[2], "--config", &cfg, "--out-map", &map,
                "--out-json", &rec,
            ],
            workers,
        )?;
    }
    let (manifest, report, csv) = (p("manifest.json".into()), p("report.json".into()), p("report.csv".into()));
    mambaad(&["eval", "--manifest", &manifest, "--out", &report, "--csv", &csv], workers)
}

fn outputs(root: &Path) -> Vec<(String, Vec<u8>)> {
    let fx = root.join("fx");
    let mut names: Vec<String> = (0..COUNT)
        .flat_map(|i| [format!("outputs/sample_{i:03}.mbt"), format!("outputs/sample_{i:03}.json")])
        .collect();
    names.extend(["report.json".into(), "report.csv".into(), "manifest.json".into()]);
    names.into_iter().map(|n| (n.clone(), fs::read(fx.join(&n)).unwrap_or_default())).collect()
}

#[test]
fn end_to_end_smoke() {
    criterion("end-to-end synth -> forward -> eval", Duration::from_secs(30), || {
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        end_to_end(a.path(), "4")?;
        end_to_end(b.path(), "1")?;
        let (oa, ob) = (outputs(a.path()), outputs(b.path()));
        for ((name, x), (_, y)) in oa.iter().zip(&ob) {
            ensure(!x.is_empty(), || format!("{name} missing or empty"))?;
            ensure(x == y, || format!("{name} differs between runs"))?;
        }
        for i in 0..COUNT {
            let map = load_tensor(a.path().join(format!("fx/outputs/sample_{i:03}.mbt"))).map_err(|e| e.to_string())?;
            ensure(map.shape() == [16, 16] && map.is_finite(), || format!("sample {i}: bad map"))?;
            let rec: serde_json::Value =
                serde_json::from_slice(&fs::read(a.path().join(format!("fx/outputs/sample_{i:03}.json"))).unwrap())
                    .map_err(|e| e.to_string())?;
            let finite = ["loss", "image_score"].iter().all(|k| rec[k].as_f64().is_some_and(f64::is_finite));
            ensure(finite, || format!("sample {i}: non-finite record {rec}"))?;
        }
        let report: MetricsReport =
            serde_json::from_slice(&fs::read(a.path().join("fx/report.json")).unwrap()).map_err(|e| e.to_string())?;
        ensure(report.values().iter().all(|v| v.is_finite()), || "non-finite metric".into())?;
        Ok(format!(
            "exit 0 throughout, {} output files byte-identical across runs (4 vs 1 workers), mAD {:.3}",
            oa.len(),
            report.mad
        ))
    });
}
