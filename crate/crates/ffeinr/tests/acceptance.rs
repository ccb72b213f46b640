//! Acceptance criteria A1-A11, one PASS/FAIL/SKIP line each.
//!
//! Runs without the libtest harness so the lines come out in order and the
//! expensive training run is shared between A1, A2 and A10.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use ffeinr::core::inr::BatchItem;
use ffeinr::core::nn::siren::{siren_init, SirenLayerSpec};
use ffeinr::core::nn::Parameters;
use ffeinr::core::train::{evaluate_frames, heldout_intermediate_frames, train_paired};
use ffeinr::core::viz::trace_streamlines;
use ffeinr::core::*;
use ffeinr::{ckpt, raw, Archive, FfError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn verdict(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn a1_config() -> TrainConfig {
    let width = 64;
    TrainConfig {
        sx: 4,
        st: 2,
        iters: 2000,
        batch: 16,
        queries_per_sample: 1024,
        lr: 1e-3,
        lr_milestones: vec![1200, 1600],
        seed: 7,
        two_stage: true,
        stage2_iters: 1000,
        model: ModelConfig {
            encoder: EncoderConfig { c_f: 16, n_blocks: 3, lstm_hidden: 16, kernel: 3 },
            spatial_width: width,
            temporal_width: width,
            decoder_width: width,
            lookup: FeatureLookup::Bilinear,
            ..ModelConfig::default()
        },
        ..TrainConfig::default()
    }
}

struct Trained {
    high: FlowField,
    one: Checkpoint,
    two: Checkpoint,
    secs: f64,
}

fn train_a1() -> Trained {
    let high = gen_taylor_green(64, 33, 0.1).unwrap();
    let cfg = a1_config();
    let low = downsample(&high, cfg.sx, cfg.st).unwrap();
    let t0 = Instant::now();
    let (one, two) = train_paired(&low, &high, &cfg, &mut |i, l| {
        if i % 250 == 0 {
            eprintln!("  [train] iteration {i} loss {l:.5} ({:.0}s)", t0.elapsed().as_secs_f64());
        }
    })
    .unwrap();
    Trained { high, one, two, secs: t0.elapsed().as_secs_f64() }
}

fn heldout(cfg: &TrainConfig, high: &FlowField) -> Vec<usize> {
    let low_frames = (high.frames() - 1) / cfg.st + 1;
    heldout_intermediate_frames(low_frames, cfg.st, cfg.holdout_fraction)
}

fn a1(tr: &Trained) -> Outcome {
    let frames = heldout(&tr.one.config, &tr.high);
    let r = evaluate_frames(&tr.one, &tr.high, (4, 2), Some(&frames)).unwrap();
    let gap = r.model.psnr_db - r.trilinear.psnr_db;
    verdict(
        gap >= 2.0,
        format!(
            "held-out frames {frames:?}: FFEINR {:.2} dB vs trilinear {:.2} dB (gap {gap:+.2} dB, need >= 2; training {:.0}s)",
            r.model.psnr_db, r.trilinear.psnr_db, tr.secs
        ),
    )
}

fn a2(tr: &Trained) -> Outcome {
    let mut wins = 0;
    let mut finite = true;
    let mut parts = Vec::new();
    for f in [(2, 2), (4, 4), (4, 8)] {
        let r = evaluate_frames(&tr.one, &tr.high, f, None).unwrap();
        finite &= r.model.is_finite() && r.trilinear.is_finite();
        if r.model.psnr_db > r.trilinear.psnr_db {
            wins += 1;
        }
        parts.push(format!("S{}T{} {:.2}/{:.2}", f.0, f.1, r.model.psnr_db, r.trilinear.psnr_db));
    }
    verdict(
        finite && wins >= 2,
        format!("FFEINR/trilinear dB: {}; wins {wins}/3, finite {finite}", parts.join(", ")),
    )
}

fn a10(tr: &Trained) -> Outcome {
    let frames = heldout(&tr.one.config, &tr.high);
    println!("  A10 table: factor | frames | one-stage PSNR/SSIM | two-stage PSNR/SSIM | trilinear PSNR/SSIM");
    let mut finite = true;
    for (f, sel) in [((4, 2), Some(&frames[..])), ((4, 2), None), ((2, 2), None), ((4, 4), None), ((4, 8), None)] {
        let a = evaluate_frames(&tr.one, &tr.high, f, sel).unwrap();
        let b = evaluate_frames(&tr.two, &tr.high, f, sel).unwrap();
        finite &= a.model.is_finite() && b.model.is_finite();
        println!(
            "  A10 table: S{}T{} | {:>8} | {:6.2} / {:.4} | {:6.2} / {:.4} | {:6.2} / {:.4}",
            f.0,
            f.1,
            if sel.is_some() { "held-out" } else { "all" },
            a.model.psnr_db,
            a.model.ssim,
            b.model.psnr_db,
            b.model.ssim,
            a.trilinear.psnr_db,
            a.trilinear.ssim,
        );
    }

    // Reproducibility: the same paired run twice under one seed, bit for bit.
    let high = gen_taylor_green(32, 17, 0.1).unwrap();
    let mut cfg = a1_config();
    cfg.iters = 30;
    cfg.stage2_iters = 20;
    cfg.lr_milestones = vec![20];
    cfg.queries_per_sample = 128;
    cfg.batch = 4;
    let low = downsample(&high, cfg.sx, cfg.st).unwrap();
    let run = || train_paired(&low, &high, &cfg, &mut |_, _| {}).unwrap();
    let (o1, t1) = run();
    let (o2, t2) = run();
    let same = o1 == o2 && t1 == t2;
    cfg.seed += 1;
    let (o3, _) = train_paired(&low, &high, &cfg, &mut |_, _| {}).unwrap();
    let differs = o3.model != o1.model;
    verdict(
        finite && same && differs,
        format!("both runs finite: {finite}; repeat under fixed seed bit-identical: {same}; other seed differs: {differs}"),
    )
}

fn a3() -> Outcome {
    fn brute(pred: &FlowField, gt: &FlowField) -> (f64, f64, Vec<f64>) {
        let [t, h, w, c] = gt.dims();
        let g = |f: &FlowField, i, r, q, k| f.get(i, r, q, k) as f64;
        let mut peak = 0.0f64;
        let mut sq = 0.0;
        let mut per = vec![0.0; c];
        let (mut lo, mut hi) = (f64::MAX, f64::MIN);
        for i in 0..t {
            for r in 0..h {
                for q in 0..w {
                    for k in 0..c {
                        let (a, b) = (g(pred, i, r, q, k), g(gt, i, r, q, k));
                        peak = peak.max(b.abs());
                        lo = lo.min(b);
                        hi = hi.max(b);
                        sq += (a - b).powi(2);
                        per[k] += (a - b).powi(2);
                    }
                }
            }
        }
        let n = (t * h * w) as f64;
        let psnr = 10.0 * (peak.powi(2) / (sq / (n * c as f64))).log10();
        let rmse = per.iter().map(|s| (s / n).sqrt()).collect();
        let l = if hi > lo { hi - lo } else { 1.0 };
        let (c1, c2) = ((0.01 * l).powi(2), (0.03 * l).powi(2));
        let m = (h * w) as f64;
        let mut total = 0.0;
        for i in 0..t {
            for k in 0..c {
                let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for r in 0..h {
                    for q in 0..w {
                        let (a, b) = (g(pred, i, r, q, k), g(gt, i, r, q, k));
                        sa += a;
                        sb += b;
                        saa += a * a;
                        sbb += b * b;
                        sab += a * b;
                    }
                }
                let (ma, mb) = (sa / m, sb / m);
                let va = saa / m - ma * ma;
                let vb = sbb / m - mb * mb;
                let cov = sab / m - ma * mb;
                total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
        (psnr, total / (t * c) as f64, rmse)
    }

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut dp, mut ds, mut dr) = (0.0f64, 0.0f64, 0.0f64);
    let mut identity = true;
    for _ in 0..100 {
        let dims = [rng.gen_range(1..4), rng.gen_range(2..10), rng.gen_range(2..10), rng.gen_range(1..4)];
        let n: usize = dims.iter().product();
        let scale = rng.gen_range(0.1..5.0);
        let gt_v: Vec<f32> = (0..n).map(|_| rng.gen_range(-scale..scale)).collect();
        let noise = rng.gen_range(0.001..1.0) * scale;
        let pr_v: Vec<f32> = gt_v.iter().map(|v| v + rng.gen_range(-noise..noise)).collect();
        let ext = Extents::new(0.0, 1.0, 0.0, 1.0);
        let gt = FlowField::from_values(dims, gt_v, ext, 1.0).unwrap();
        let pred = FlowField::from_values(dims, pr_v, ext, 1.0).unwrap();
        let (p, s, r) = brute(&pred, &gt);
        dp = dp.max((psnr(&pred, &gt).unwrap() - p).abs());
        ds = ds.max((ssim(&pred, &gt).unwrap() - s).abs());
        for (a, b) in rmse_per_channel(&pred, &gt).unwrap().iter().zip(&r) {
            dr = dr.max((a - b).abs());
        }
        identity &= psnr(&gt, &gt).unwrap() == PSNR_CAP_DB
            && ssim(&gt, &gt).unwrap() == 1.0
            && rmse_per_channel(&gt, &gt).unwrap().iter().all(|v| *v == 0.0);
    }
    verdict(
        dp <= 1e-6 && dr <= 1e-6 && ds <= 1e-4 && identity,
        format!("100 pairs: max |dPSNR| {dp:.2e}, |dRMSE| {dr:.2e}, |dSSIM| {ds:.2e}; identity cases exact: {identity}"),
    )
}

fn a4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut nodes_exact = true;
    for _ in 0..20 {
        let k: [f64; 8] = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
        let f = |x: f64, y: f64, t: f64| {
            k[0] + k[1] * x + k[2] * y + k[3] * t + k[4] * x * y + k[5] * x * t + k[6] * y * t + k[7] * x * y * t
        };
        let (lt, lh, lw) = (rng.gen_range(2..6), rng.gen_range(2..7), rng.gen_range(2..7));
        let mut vals = Vec::new();
        for i in 0..lt {
            for r in 0..lh {
                for q in 0..lw {
                    let (x, y, t) = (q as f64 / (lw - 1) as f64, r as f64 / (lh - 1) as f64, i as f64 / (lt - 1) as f64);
                    vals.push(f(x, y, t) as f32);
                    vals.push(f(1.0 - x, t, y) as f32);
                }
            }
        }
        let low = FlowField::from_values([lt, lh, lw, 2], vals, Extents::new(0.0, 1.0, 0.0, 1.0), 1.0).unwrap();
        let target = (lt + rng.gen_range(0..15), lh + rng.gen_range(0..15), lw + rng.gen_range(0..15));
        let out = trilinear_upsample(&low, target).unwrap();
        for i in 0..target.0 {
            for r in 0..target.1 {
                for q in 0..target.2 {
                    let pos = |j: usize, out: usize| j as f64 / (out - 1) as f64;
                    let (x, y, t) = (pos(q, target.2), pos(r, target.1), pos(i, target.0));
                    worst = worst.max((out.get(i, r, q, 0) as f64 - f(x, y, t)).abs());
                    worst = worst.max((out.get(i, r, q, 1) as f64 - f(1.0 - x, t, y)).abs());
                }
            }
        }
        // node-aligned lattice: low node k lands on output node k*s
        let s = (rng.gen_range(1..5), rng.gen_range(1..5));
        let dims = ((lt - 1) * s.1 + 1, (lh - 1) * s.0 + 1, (lw - 1) * s.0 + 1);
        let up = trilinear_upsample(&low, dims).unwrap();
        for i in 0..lt {
            for r in 0..lh {
                for q in 0..lw {
                    for c in 0..2 {
                        nodes_exact &= up.get(i * s.1, r * s.0, q * s.0, c) == low.get(i, r, q, c);
                    }
                }
            }
        }
    }
    verdict(
        worst <= 1e-6 && nodes_exact,
        format!("20 random multilinear fields: max error {worst:.2e}; low-res nodes bit-exact: {nodes_exact}"),
    )
}

fn a5() -> Outcome {
    fn toy_pair(rng: &mut ChaCha8Rng) -> SlicePair {
        let (h, w, c) = (4, 5, 2);
        let mut frame = || (0..h * w * c).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        SlicePair::new([frame(), frame()], h, w, c, 0).unwrap()
    }
    fn objective(model: &Model<f64>, items: &[BatchItem<'_>], r: &[f64]) -> f64 {
        let (out, _) = model.forward_batch(items).unwrap();
        out.iter().zip(r).map(|(a, b)| a * b).sum()
    }
    let mut worst = 0.0f64;
    for (seed, lookup) in [(0, FeatureLookup::Nearest), (1, FeatureLookup::Bilinear)] {
        let cfg = ModelConfig {
            channels: 2,
            encoder: EncoderConfig { c_f: 4, n_blocks: 1, lstm_hidden: 3, kernel: 3 },
            spatial_width: 6,
            spatial_depth: 2,
            temporal_width: 6,
            temporal_depth: 2,
            decoder_width: 6,
            decoder_depth: 2,
            omega0: 3.0,
            lookup,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let mut model: Model<f64> = Model::new(cfg, &mut rng).unwrap();
        let pairs = [toy_pair(&mut rng), toy_pair(&mut rng)];
        let queries: Vec<QueryBatch> = (0..2)
            .map(|_| {
                let xy = (0..7).map(|_| [rng.gen_range(-0.95..0.95), rng.gen_range(-0.95..0.95)]).collect();
                let t = (0..7).map(|_| rng.gen_range(0.0..1.0)).collect();
                QueryBatch::new(xy, t).unwrap()
            })
            .collect();
        let items: Vec<BatchItem<'_>> = pairs.iter().zip(&queries).map(|(pair, query)| BatchItem { pair, query }).collect();
        let r: Vec<f64> = (0..28).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let (_, cache) = model.forward_batch(&items).unwrap();
        model.zero_grad();
        model.backward(cache, r.clone());
        let mut names = Vec::new();
        model.visit("", &mut |name, p| names.push((name.to_string(), p.len())));
        let h = 1e-5;
        for _ in 0..50 {
            let (name, len) = names[rng.gen_range(0..names.len())].clone();
            let idx = rng.gen_range(0..len);
            let mut analytic = 0.0;
            let mut nudge = |m: &mut Model<f64>, d: f64| {
                m.visit_mut("", &mut |n, p| {
                    if n == name {
                        analytic = p.grad[idx];
                        p.value[idx] += d;
                    }
                })
            };
            nudge(&mut model, h);
            let up = objective(&model, &items, &r);
            nudge(&mut model, -2.0 * h);
            let down = objective(&model, &items, &r);
            nudge(&mut model, h);
            let numeric = (up - down) / (2.0 * h);
            worst = worst.max((analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-6));
        }
    }
    verdict(worst < 1e-4, format!("2 x 50 probes (nearest and bilinear lookup), max relative error {worst:.2e}"))
}

fn a6() -> Outcome {
    let specs = [
        SirenLayerSpec { fan_in: 2, fan_out: 500_000, omega0: 30.0, is_first: true },
        SirenLayerSpec { fan_in: 64, fan_out: 15_625, omega0: 30.0, is_first: false },
        SirenLayerSpec { fan_in: 256, fan_out: 3_907, omega0: 30.0, is_first: false },
        SirenLayerSpec { fan_in: 100, fan_out: 10_000, omega0: 1.0, is_first: false },
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let chi = ChiSquared::new(19.0).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in &specs {
        let w = siren_init::<f64, _>(s, &mut rng).weight;
        let expected_bound = if s.is_first { 1.0 / s.fan_in as f64 } else { (6.0 / s.fan_in as f64).sqrt() / s.omega0 };
        let within = w.iter().all(|v| v.abs() <= expected_bound);
        let mut bins = [0usize; 20];
        for v in &w {
            let b = ((v + expected_bound) / (2.0 * expected_bound) * 20.0) as usize;
            bins[b.min(19)] += 1;
        }
        let e = w.len() as f64 / 20.0;
        let stat: f64 = bins.iter().map(|&o| (o as f64 - e).powi(2) / e).sum();
        let p = 1.0 - chi.cdf(stat);
        ok &= within && p > 0.01 && w.len() >= 1_000_000;
        parts.push(format!("{}x{}{} n={} in-bounds {within} p={p:.3}", s.fan_in, s.fan_out, if s.is_first { " first" } else { "" }, w.len()));
    }
    verdict(ok, parts.join("; "))
}

fn a7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut identical = true;
    for lookup in [FeatureLookup::Nearest, FeatureLookup::Bilinear] {
        let cfg = ModelConfig {
            encoder: EncoderConfig { c_f: 8, n_blocks: 2, lstm_hidden: 8, kernel: 3 },
            spatial_width: 32,
            temporal_width: 32,
            decoder_width: 32,
            lookup,
            ..ModelConfig::default()
        };
        let mut model: Model<f32> = Model::new(cfg, &mut rng).unwrap();
        model.temporal.zero_weights();
        let (h, w) = (9, 11);
        let mut frame = || (0..h * w * 2).map(|_| rng.gen_range(-1.0f32..1.0)).collect();
        let pair = SlicePair::new([frame(), frame()], h, w, 2, 0).unwrap();
        let xy: Vec<[f64; 2]> = (0..200).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let at = |t: f64| model.forward(&QueryBatch::new(xy.clone(), vec![t; xy.len()]).unwrap(), &pair).unwrap();
        let base: Vec<u32> = at(0.0).iter().map(|v| v.to_bits()).collect();
        for t in [0.1, 0.25, 0.5, 0.73, 0.99, 1.0] {
            identical &= at(t).iter().map(|v| v.to_bits()).collect::<Vec<_>>() == base;
        }
    }
    verdict(identical, format!("outputs bit-identical across 7 time values for both lookups: {identical}"))
}

fn a8() -> Outcome {
    let high = gen_taylor_green(17, 9, 0.1).unwrap();
    let raw_bytes = raw::to_bytes(&high).unwrap();
    let raw_ok = raw::from_bytes(&raw_bytes).unwrap() == high && raw::to_bytes(&raw::from_bytes(&raw_bytes).unwrap()).unwrap() == raw_bytes;

    let cfg = TrainConfig {
        iters: 3,
        batch: 2,
        patch: 4,
        queries_per_sample: 16,
        model: ModelConfig {
            encoder: EncoderConfig { c_f: 4, n_blocks: 1, lstm_hidden: 4, kernel: 3 },
            spatial_width: 8,
            temporal_width: 8,
            decoder_width: 8,
            ..ModelConfig::default()
        },
        ..TrainConfig::default()
    };
    let a = ffeinr::compress(&high, &cfg, &mut |_, _| {}).unwrap();
    let ck_bytes = ckpt::to_bytes(&a.checkpoint).unwrap();
    let ck_back = ckpt::from_bytes(&ck_bytes).unwrap();
    let ck_ok = ck_back == a.checkpoint && ckpt::to_bytes(&ck_back).unwrap() == ck_bytes;

    let ar_bytes = a.to_bytes().unwrap();
    let ar_back = Archive::from_bytes(&ar_bytes).unwrap();
    let ar_ok = ar_back == a && ar_back.to_bytes().unwrap() == ar_bytes;

    let mut detected = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let trials = 50;
    for _ in 0..trials {
        let mut bad = ar_bytes.clone();
        let at = rng.gen_range(ffeinr::archive::overhead(3)..bad.len());
        bad[at] ^= 1 << rng.gen_range(0..8);
        if matches!(Archive::from_bytes(&bad), Err(FfError::Checksum { .. })) {
            detected += 1;
        }
    }
    verdict(
        raw_ok && ck_ok && ar_ok && detected == trials,
        format!("FFNR {raw_ok}, checkpoint {ck_ok}, archive {ar_ok}; payload bit flips caught by CRC {detected}/{trials}"),
    )
}

fn a9() -> Outcome {
    let n = 65;
    let ext = Extents::new(-1.0, 1.0, -1.0, 1.0);
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / (n - 1) as f64;
    let field = |u: &dyn Fn(f64, f64) -> [f64; 2]| {
        let mut v = Vec::with_capacity(n * n * 2);
        for r in 0..n {
            for c in 0..n {
                let w = u(coord(c), coord(r));
                v.extend([w[0] as f32, w[1] as f32]);
            }
        }
        FlowField::from_values([1, n, n, 2], v, ext, 1.0).unwrap()
    };

    let uniform = field(&|_, _| [0.6, -0.3]);
    let line = &trace_streamlines(&uniform, 0, &[[-0.7, 0.5]], 0.01, 200).unwrap()[0];
    let (s, d) = (line.points[0], [0.6f64, -0.3]);
    let norm = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let straight = line
        .points
        .iter()
        .map(|p| ((p[0] - s[0]) * d[1] - (p[1] - s[1]) * d[0]).abs() / norm)
        .fold(0.0, f64::max);

    let rot = field(&|x, y| [-y, x]);
    let radius = 0.5;
    let closure = |steps: usize| {
        let h = 2.0 * std::f64::consts::PI / steps as f64;
        let l = &trace_streamlines(&rot, 0, &[[radius, 0.0]], h, steps).unwrap()[0];
        assert_eq!(l.points.len(), steps + 1);
        let e = l.points[steps];
        ((e[0] - radius).powi(2) + e[1].powi(2)).sqrt()
    };
    let fine = closure(200) / radius;
    let (e1, e2) = (closure(16), closure(32));
    let factor = e1 / e2;
    verdict(
        straight <= 1e-6 && fine <= 0.01 && factor >= 8.0,
        format!(
            "uniform deviation {straight:.2e} over {} points; closure {:.2e} of radius at 200 steps; error ratio 16->32 steps {factor:.1}",
            line.points.len(),
            fine
        ),
    )
}

fn a11() -> Outcome {
    let Some(path) = std::env::var_os("FFEINR_CYLINDER") else {
        return Outcome::Skip("set FFEINR_CYLINDER to an FFNR file of the converted Cylinder data to run".into());
    };
    let high = raw::load_raw(&path).unwrap();
    let mut cfg = match std::env::var_os("FFEINR_CYLINDER_CONFIG") {
        Some(p) => ffeinr::config::parse_config(&std::fs::read_to_string(p).unwrap()).unwrap(),
        None => TrainConfig::default(),
    };
    cfg.sx = 4;
    cfg.st = 2;
    cfg.iters = 7500;
    let low = downsample(&high, 4, 2).unwrap();
    let ck = train::train_one_stage(&low, &high, &cfg).unwrap();
    let r = evaluate_frames(&ck, &high, (4, 2), None).unwrap();
    let gap = r.model.psnr_db - r.trilinear.psnr_db;
    verdict(
        r.model.psnr_db >= 40.0 && gap >= 4.0,
        format!("FFEINR {:.2} dB vs trilinear {:.2} dB (need >= 40 dB and gap >= 4 dB)", r.model.psnr_db, r.trilinear.psnr_db),
    )
}

fn report(id: &str, required: bool, f: impl FnOnce() -> Outcome) -> bool {
    let t0 = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::Fail(format!("panicked: {msg}"))
    });
    let secs = t0.elapsed().as_secs_f64();
    let (tag, detail, failed) = match outcome {
        Outcome::Pass(d) => ("PASS", d, false),
        Outcome::Fail(d) => ("FAIL", d, required),
        Outcome::Skip(d) => ("SKIP", d, false),
    };
    println!("{id} {tag}: {detail} [{secs:.1}s]");
    failed
}

fn main() {
    // libtest-style filtering: `cargo test --test acceptance -- A3 A9`
    let filters: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let wanted = |id: &str| filters.is_empty() || filters.iter().any(|f| f == id);
    let mut failed = false;

    let trained = if wanted("A1") || wanted("A2") || wanted("A10") {
        match catch_unwind(train_a1) {
            Ok(t) => Some(t),
            Err(_) => {
                println!("A1 training run panicked");
                None
            }
        }
    } else {
        None
    };
    let shared = |f: fn(&Trained) -> Outcome| {
        let t = trained.as_ref();
        move || match t {
            Some(t) => f(t),
            None => Outcome::Fail("shared training run did not complete".into()),
        }
    };

    if wanted("A1") {
        failed |= report("A1", true, shared(a1));
    }
    if wanted("A2") {
        failed |= report("A2", true, shared(a2));
    }
    let cheap: [(&str, fn() -> Outcome); 7] =
        [("A3", a3), ("A4", a4), ("A5", a5), ("A6", a6), ("A7", a7), ("A8", a8), ("A9", a9)];
    for (id, f) in cheap {
        if wanted(id) {
            failed |= report(id, true, f);
        }
    }
    if wanted("A10") {
        failed |= report("A10", true, shared(a10));
    }
    if wanted("A11") {
        failed |= report("A11", false, a11);
    }
    if failed {
        std::process::exit(1);
    }
}
