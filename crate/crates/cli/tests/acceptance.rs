//! Acceptance suite. Prints one `[PASS]`/`[FAIL]` line per criterion and
//! fails if any criterion fails. Run with
//! `cargo test -p prophet-cli --test acceptance -- --nocapture`.

use std::collections::BTreeSet;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use prophet_cli::manifest::{sha256_hex, RunManifest};
use prophet_cli::toy::ToySpec;
use prophet_cli::train::format_corpus;
use prophet_dlm::analysis::{convergence_histogram, dynamics_matrix, first_match_step, format_speedup, DynamicsClass};
use prophet_dlm::decoder::decode_full;
use prophet_dlm::forward::{predictor_from_logits, tau_leap_step, NoiseLevel};
use prophet_dlm::models::{make_ramp_oracle, LogitMatrix, RampSpec, ScriptedOracle};
use prophet_dlm::prophet::{decode_prophet, threshold};
use prophet_dlm::{rng, AnswerRegion, DecodeConfig, DecodeTrace, RemaskStrategy, ThresholdParams, TokenId, TokenSequence, Vocabulary};
use rand::Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, fn() -> Check);

const AC2_CONFIGS: usize = 1000;
const AC4_SPAN: (f64, f64) = (1.4, 3.4);
const AC5_TRIALS: usize = 100_000;
const AC5_SIGMAS: f64 = 3.0;
const AC7_PROPHET_AGREEMENT_MIN: f64 = 0.95;
const AC7_SPEEDUP_MIN: f64 = 1.0;
const AC7_HALF_SLACK: f64 = 0.02;
const AC9_RUNS: usize = 500;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prophet_bin(dir: &Path, args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_prophet"))
        .current_dir(dir)
        .env_remove("PROPHET_SEED")
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

// ---------------------------------------------------------------------------
// random scripted problems

struct Case {
    oracle: ScriptedOracle,
    seq0: TokenSequence,
    cfg: DecodeConfig,
}

fn random_matrix<R: Rng>(r: &mut R, n: usize, v: usize, mask: TokenId, grid: bool) -> LogitMatrix {
    let values = (0..n * v)
        .map(|_| {
            if grid {
                r.random_range(-4i32..=4) as f64 * 0.5
            } else {
                r.random_range(-8.0..8.0)
            }
        })
        .collect();
    LogitMatrix::from_flat(values, n, v, mask).unwrap()
}

/// gen_len <= 32, t_max <= 50, mixed tie-heavy and continuous logits.
fn random_case(seed: u64, strategy: RemaskStrategy) -> Case {
    let mut r = rng::seeded(seed);
    let vocab_size = r.random_range(3..=12usize);
    let mask = r.random_range(0..vocab_size) as TokenId;
    let vocab = Vocabulary::new(vocab_size, mask).unwrap();
    let content: Vec<TokenId> = vocab.content_tokens().collect();
    let prompt: Vec<TokenId> = (0..r.random_range(0..=4))
        .map(|_| content[r.random_range(0..content.len())])
        .collect();
    let block_len = r.random_range(1..=32usize);
    let n_blocks = r.random_range(1..=32 / block_len);
    let gen_len = block_len * n_blocks;
    let t_max = r.random_range(n_blocks..=50);
    let n = prompt.len() + gen_len;
    let grid = r.random_bool(0.5);
    let oracle = ScriptedOracle::from_fn(vocab.clone(), t_max, |_| Ok(random_matrix(&mut r, n, vocab_size, mask, grid))).unwrap();
    let mut cfg = DecodeConfig {
        t_max,
        gen_len,
        block_len,
        remask_strategy: strategy,
        seed: r.random(),
        record_top1: r.random_bool(0.5),
        temperature: if r.random_bool(0.25) { r.random_range(0.5..2.0) } else { 0.0 },
        ..Default::default()
    };
    if r.random_bool(0.3) {
        let start = prompt.len() + r.random_range(0..gen_len);
        cfg.answer_region = Some(AnswerRegion::new(start, r.random_range(start + 1..=n)));
    }
    let seq0 = TokenSequence::new(&prompt, gen_len, &vocab).unwrap();
    Case { oracle, seq0, cfg }
}

// ---------------------------------------------------------------------------
// closed-form ramp prediction

/// Staged threshold, written out independently of the library.
fn tau_oracle(t_max: usize, t: usize) -> f64 {
    let p = (t_max - t) as f64 / t_max as f64;
    if p < 0.33 {
        8.0
    } else if p < 0.67 {
        5.0
    } else {
        3.0
    }
}

/// Tokens unmasked at each step by a single-block schedule: `gen_len / t_max`
/// each, the remainder one extra per step from the front.
fn single_block_counts(gen_len: usize, t_max: usize) -> Vec<usize> {
    (0..t_max)
        .map(|i| gen_len / t_max + usize::from(i < gen_len % t_max))
        .collect()
}

/// Walks `t = t_max, ..., 1` and returns the first step whose mean answer gap
/// clears the threshold, for a single-block ramp whose whole generation is the
/// answer. `None` means no commit.
fn predicted_commit(t_max: usize, t_star: usize, pre: f64, post: f64, gen_len: usize) -> Option<usize> {
    let counts = single_block_counts(gen_len, t_max);
    let mut masked = gen_len;
    for (i, t) in (1..=t_max).rev().enumerate() {
        let gap = if masked == 0 {
            f64::INFINITY
        } else if t <= t_star {
            post
        } else {
            pre
        };
        if gap >= tau_oracle(t_max, t) {
            return Some(t);
        }
        masked -= counts[i];
    }
    None
}

struct RampRun {
    commit_step: Option<usize>,
    calls: usize,
    matches_full: bool,
}

fn ramp_run(t_max: usize, t_star: usize, pre: f64, post: f64, gen_len: usize) -> RampRun {
    let vocab = Vocabulary::new(10, 0).unwrap();
    let prompt = [4, 2, 7];
    let target: Vec<TokenId> = (0..gen_len).map(|i| 1 + ((i * 5 + 2) % 9) as TokenId).collect();
    let spec = RampSpec {
        stabilize_step: t_star,
        pre_gap: pre,
        post_gap: post,
        t_max,
    };
    let oracle = make_ramp_oracle(&spec, &prompt, &target, gen_len, &vocab).unwrap();
    let seq0 = TokenSequence::new(&prompt, gen_len, &vocab).unwrap();
    let cfg = DecodeConfig {
        t_max,
        gen_len,
        block_len: gen_len,
        prophet_enabled: true,
        ..Default::default()
    };
    let (out, trace, _) = decode_prophet(&oracle, &seq0, &cfg, &mut rng::seeded(0)).unwrap();
    let (full, _) = decode_full(&oracle, &seq0, &cfg, &mut rng::seeded(0)).unwrap();
    RampRun {
        commit_step: trace.commit_step,
        calls: trace.model_calls,
        matches_full: out == full,
    }
}

// ---------------------------------------------------------------------------
// criteria

fn ac1_threshold() -> Check {
    let params = ThresholdParams::default();
    let expected = [(0.0, 8.0), (0.32999, 8.0), (0.33, 5.0), (0.5, 5.0), (0.66999, 5.0), (0.67, 3.0), (1.0, 3.0)];
    for (p, tau) in expected {
        let got = threshold(p, &params);
        ensure(got == tau, || format!("threshold({p}) = {got}, expected {tau}"))?;
    }
    Ok(format!("{} boundary points exact", expected.len()))
}

fn ac2_conservative_limit() -> Check {
    let mut compared = 0;
    for i in 0..AC2_CONFIGS {
        for strategy in [RemaskStrategy::Random, RemaskStrategy::LowConfidence] {
            let case = random_case(10_000 + i as u64, strategy);
            let cfg = DecodeConfig {
                prophet_enabled: true,
                thresholds: ThresholdParams::never(),
                ..case.cfg.clone()
            };
            let full = decode_full(&case.oracle, &case.seq0, &cfg, &mut rng::seeded(cfg.seed)).map_err(|e| e.to_string())?;
            let (out, trace, _) =
                decode_prophet(&case.oracle, &case.seq0, &cfg, &mut rng::seeded(cfg.seed)).map_err(|e| e.to_string())?;
            ensure(out == full.0, || format!("config {i} {strategy:?}: outputs differ"))?;
            ensure(trace == full.1, || format!("config {i} {strategy:?}: traces differ"))?;
            ensure(trace.to_jsonl() == full.1.to_jsonl(), || format!("config {i}: serialized traces differ"))?;
            compared += 1;
        }
    }
    Ok(format!("{AC2_CONFIGS} configs x 2 strategies, {compared} bit-identical pairs"))
}

fn ac3_ramp_commit() -> Check {
    let (t_max, t_star, gen_len) = (50, 40, 64);
    let predicted = predicted_commit(t_max, t_star, 1.0, 9.0, gen_len);
    ensure(predicted == Some(40), || format!("closed form predicts {predicted:?}"))?;
    let run = ramp_run(t_max, t_star, 1.0, 9.0, gen_len);
    ensure(run.commit_step == Some(40), || format!("committed at {:?}", run.commit_step))?;
    ensure(run.calls == 11, || format!("{} model calls", run.calls))?;
    let speedup = t_max as f64 / run.calls as f64;
    let shown = format!("{speedup:.2}");
    ensure(shown == "4.55", || format!("speedup shows as {shown}"))?;
    ensure(format_speedup(speedup) == "(4.55×)", || format_speedup(speedup))?;
    ensure(run.matches_full, || "output differs from full decode".into())?;
    Ok(format!("commit t=40, 11 calls, speedup {}", format_speedup(speedup)))
}

fn ac4_speedup_range() -> Check {
    let (t_max, gen_len) = (50, 64);
    let mut speedups = Vec::new();
    for k in 1..=9 {
        let f = k as f64 / 10.0;
        // stabilizes at progress f
        let t_star = t_max - (f * t_max as f64).round() as usize;
        for post in [9.0, 6.0, 4.0] {
            let predicted = predicted_commit(t_max, t_star, 1.0, post, gen_len).ok_or("closed form never commits")?;
            let run = ramp_run(t_max, t_star, 1.0, post, gen_len);
            ensure(run.commit_step == Some(predicted), || {
                format!("f={f} post={post}: committed at {:?}, predicted {predicted}", run.commit_step)
            })?;
            let measured = t_max as f64 / run.calls as f64;
            let expected = t_max as f64 / (t_max - predicted + 1) as f64;
            ensure(measured == expected, || format!("f={f} post={post}: speedup {measured} vs {expected}"))?;
            ensure(run.matches_full, || format!("f={f} post={post}: output differs from full decode"))?;
            if post == 9.0 {
                speedups.push(measured);
            }
        }
    }
    let lo = speedups.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = speedups.iter().copied().fold(0.0, f64::max);
    ensure(lo <= AC4_SPAN.0 && hi >= AC4_SPAN.1, || format!("span [{lo:.2}, {hi:.2}]"))?;
    Ok(format!("speedups span [{lo:.2}x, {hi:.2}x], 27 closed-form matches"))
}

fn ac5_kernel() -> Check {
    let vocab = Vocabulary::new(6, 0).unwrap();
    // prompt of 2, then 4 masked and 4 decoded generation positions
    let tokens = vec![3, 1, 0, 2, 0, 5, 0, 4, 0, 1];
    let x_t = TokenSequence::from_tokens(tokens, 2, &vocab).unwrap();
    let masked = x_t.masked_positions();
    let rows: Vec<Vec<f64>> = (0..x_t.len()).map(|i| (0..6).map(|v| ((v * 3 + i) % 5) as f64 * 0.7).collect()).collect();
    let predictor = predictor_from_logits(&LogitMatrix::from_rows(rows, 0).unwrap(), 1.0);
    let mut report = Vec::new();
    for (i, (t, s)) in [(1.0, 0.5), (0.8, 0.2), (0.6, 0.3)].into_iter().enumerate() {
        let mut r = rng::seeded(500 + i as u64);
        let level = NoiseLevel::new(t).map_err(|e| e.to_string())?;
        let mut stayed = 0usize;
        for _ in 0..AC5_TRIALS {
            let x_s = tau_leap_step(&x_t, level, s, &predictor, &mut r).map_err(|e| e.to_string())?;
            for pos in 0..x_t.len() {
                if !x_t.is_masked(pos) {
                    ensure(x_s.tokens()[pos] == x_t.tokens()[pos], || format!("position {pos} changed"))?;
                }
            }
            stayed += masked.iter().filter(|&&p| x_s.is_masked(p)).count();
        }
        let n = (AC5_TRIALS * masked.len()) as f64;
        let p = s / t;
        let sigma = (p * (1.0 - p) / n).sqrt();
        let freq = stayed as f64 / n;
        let z = (freq - p).abs() / sigma;
        ensure(z <= AC5_SIGMAS, || format!("(t={t}, s={s}): frequency {freq} vs {p}, {z:.2} sigma"))?;
        report.push(format!("{z:.2}σ"));
    }
    Ok(format!("deviations {}, immutability 100%", report.join(" ")))
}

/// Ramp trace whose single answer token first appears at `t*`, so its
/// first-match fraction is `(t_max - t* + 1) / t_max`.
fn fraction_trace(t_max: usize, t_star: usize) -> (DecodeTrace, Vec<TokenId>, AnswerRegion) {
    let vocab = Vocabulary::new(8, 0).unwrap();
    let target = [3, 4, 5, 6];
    let spec = RampSpec {
        stabilize_step: t_star,
        pre_gap: 1.0,
        post_gap: 9.0,
        t_max,
    };
    let oracle = make_ramp_oracle(&spec, &[1], &target, 4, &vocab).unwrap();
    let seq0 = TokenSequence::new(&[1], 4, &vocab).unwrap();
    let cfg = DecodeConfig {
        t_max,
        gen_len: 4,
        block_len: 1,
        record_top1: true,
        ..Default::default()
    };
    let (_, trace) = decode_full(&oracle, &seq0, &cfg, &mut rng::seeded(0)).unwrap();
    (trace, vec![6], AnswerRegion::new(4, 5))
}

fn ac6_convergence_stats() -> Check {
    let t_max = 10;
    // 97 instances with fractions in {0.1..0.5}, 3 with {0.6, 0.8, 0.9}
    let ks: Vec<usize> = (0..97).map(|i| 1 + i % 5).chain([6, 8, 9]).collect();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let traces = dir.path().join("traces");
    std::fs::create_dir_all(&traces).map_err(|e| e.to_string())?;
    let mut answers = String::new();
    let mut fractions = Vec::new();
    for (i, &k) in ks.iter().enumerate() {
        let (trace, answer, region) = fraction_trace(t_max, t_max + 1 - k);
        let stats = first_match_step(&trace, &answer, region).map_err(|e| e.to_string())?;
        ensure(stats.first_match_fraction == k as f64 / 10.0, || {
            format!("instance {i}: fraction {} expected {}", stats.first_match_fraction, k as f64 / 10.0)
        })?;
        fractions.push(stats.first_match_fraction);
        std::fs::write(traces.join(format!("r{i:03}.jsonl")), trace.to_jsonl()).map_err(|e| e.to_string())?;
        answers.push_str(&format!("r{i:03} | 6 | 4,5\n"));
    }
    std::fs::write(dir.path().join("answers.txt"), answers).map_err(|e| e.to_string())?;
    let hist = convergence_histogram(&fractions, 10).map_err(|e| e.to_string())?;
    ensure(hist.frac_le_50 == 0.97, || format!("library frac_le_50 = {}", hist.frac_le_50))?;

    let json = prophet_bin(dir.path(), &["stats", "--traces", "traces", "--answers", "answers.txt"])?;
    let summary: serde_json::Value = serde_json::from_str(&json).map_err(|e| e.to_string())?;
    let cli = summary["frac_le_50"].as_f64().ok_or("summary lacks frac_le_50")?;
    ensure(cli == 0.97, || format!("stats command frac_le_50 = {cli}"))?;
    ensure(summary["applicable"] == 100, || format!("applicable = {}", summary["applicable"]))?;
    Ok("frac_le_50 = 0.97 (library and stats command)".into())
}

fn ac7_toy_experiment() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let spec = ToySpec {
        seed: 2024,
        ..Default::default()
    };
    let data = spec.generate().map_err(|e| e.to_string())?;
    ensure(data.corpus.len() == 5000 && data.instances.len() == 200, || "toy sizes".into())?;
    std::fs::write(dir.path().join("corpus.txt"), format_corpus(&data.corpus)).map_err(|e| e.to_string())?;
    std::fs::write(dir.path().join("data.txt"), data.dataset_text()).map_err(|e| e.to_string())?;
    prophet_bin(dir.path(), &["train-toy", "--corpus", "corpus.txt", "--order", "1", "--vocab-size", "21", "--out", "toy.ngram"])?;
    let csv = prophet_bin(
        dir.path(),
        &["compare", "--model", "ngram:toy.ngram", "--dataset", "data.txt", "--gen-len", "16", "--block-len", "8",
          "--steps", "50", "--remask", "low_conf", "--seed", "7"],
    )?;
    let mut rows = std::collections::BTreeMap::new();
    for line in csv.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        let num = |i: usize| cols[i].parse::<f64>().map_err(|e| format!("{line}: {e}"));
        rows.insert(cols[0].to_string(), (num(2)?, num(3)?, num(5)?, num(7)?));
    }
    let (_, prophet_speedup, prophet_agree, _) = *rows.get("prophet").ok_or("no prophet row")?;
    let (half_steps, _, half_agree, _) = *rows.get("half").ok_or("no half row")?;
    let (_, _, _, full_accuracy) = *rows.get("full").ok_or("no full row")?;
    ensure(half_steps == 25.0, || format!("half used {half_steps} steps"))?;
    ensure(prophet_agree >= AC7_PROPHET_AGREEMENT_MIN, || format!("prophet agreement {prophet_agree}"))?;
    ensure(prophet_speedup > AC7_SPEEDUP_MIN, || format!("prophet speedup {prophet_speedup}"))?;
    ensure(half_agree <= prophet_agree || (half_agree - prophet_agree).abs() <= AC7_HALF_SLACK, || {
        format!("half agreement {half_agree} vs prophet {prophet_agree}")
    })?;
    Ok(format!(
        "prophet agreement {prophet_agree:.3}, speedup {prophet_speedup:.2}x, half agreement {half_agree:.3}, full accuracy {full_accuracy:.3}"
    ))
}

fn file_hash(path: &Path) -> Result<String, String> {
    std::fs::read(path).map(|b| sha256_hex(&b)).map_err(|e| format!("{}: {e}", path.display()))
}

fn ac8_reproducibility() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let d = dir.path();
    let spec = ToySpec {
        sequences: 300,
        prompts: 1,
        seed: 11,
        ..Default::default()
    };
    let data = spec.generate().map_err(|e| e.to_string())?;
    std::fs::write(d.join("corpus.txt"), format_corpus(&data.corpus)).map_err(|e| e.to_string())?;
    prophet_bin(d, &["train-toy", "--corpus", "corpus.txt", "--vocab-size", "21", "--out", "m.ngram"])?;

    let runs: [&[&str]; 2] = [
        &["--model", "ngram:m.ngram", "--prompt-ids", "5,12,19", "--suffix-ids", "6", "--gen-len", "24", "--block-len", "8",
          "--steps", "30", "--remask", "random", "--temperature", "0.8", "--prophet", "on", "--record-top1", "--seed", "3"],
        &["--model", "ramp:9:20:1:9", "--prompt-ids", "1", "--target-ids", "2,3,4,5,6,7,8,2", "--gen-len", "8",
          "--block-len", "4", "--steps", "40", "--prophet", "on", "--seed", "4"],
    ];
    for (i, flags) in runs.iter().enumerate() {
        let mut first = vec!["decode"];
        first.extend_from_slice(flags);
        let (t0, o0, m0) = (format!("a{i}/t.jsonl"), format!("a{i}/o.txt"), format!("a{i}/m.json"));
        first.extend(["--trace-out", &t0, "--output-out", &o0, "--manifest-out", &m0]);
        prophet_bin(d, &first)?;
        let manifest = RunManifest::read(&d.join(&m0)).map_err(|e| e.to_string())?;
        let (trace_hash, out_hash) = (file_hash(&d.join(&t0))?, file_hash(&d.join(&o0))?);
        ensure(manifest.hashes["trace"] == trace_hash && manifest.hashes["output"] == out_hash, || {
            format!("run {i}: manifest hashes do not match the written files")
        })?;

        for rep in 0..2 {
            let (t, o) = (format!("b{i}_{rep}/t.jsonl"), format!("b{i}_{rep}/o.txt"));
            prophet_bin(d, &["decode", "--manifest-in", &m0, "--trace-out", &t, "--output-out", &o])?;
            ensure(file_hash(&d.join(&t))? == trace_hash, || format!("run {i} replay {rep}: trace differs"))?;
            ensure(file_hash(&d.join(&o))? == out_hash, || format!("run {i} replay {rep}: output differs"))?;
        }
        // replay in place, onto the recorded paths
        prophet_bin(d, &["decode", "--manifest-in", &m0])?;
        ensure(file_hash(&d.join(&t0))? == trace_hash && file_hash(&d.join(&o0))? == out_hash, || {
            format!("run {i}: in-place replay differs")
        })?;
    }
    Ok("2 manifests x 3 replays, trace and output hashes identical".into())
}

fn check_invariants(case: &Case, cfg: &DecodeConfig, out: &TokenSequence, trace: &DecodeTrace) -> Result<(), String> {
    let prompt_len = case.seq0.prompt_len();
    let gen: BTreeSet<usize> = (prompt_len..case.seq0.len()).collect();

    // completeness
    ensure(out.masked_positions().is_empty(), || "masks remain".into())?;
    ensure(out.tokens()[..prompt_len] == case.seq0.tokens()[..prompt_len], || "prompt altered".into())?;

    // monotone unmasking
    let mut seen = BTreeSet::new();
    for s in &trace.steps {
        for &p in &s.unmasked_positions {
            ensure(gen.contains(&p), || format!("non-generation position {p} unmasked"))?;
            ensure(seen.insert(p), || format!("position {p} unmasked twice"))?;
        }
    }
    ensure(seen == gen, || "unmasked positions do not cover the generation".into())?;

    // immutability: once decoded, the recorded state never changes
    let mut decoded_at = vec![None; out.len()];
    for (col, s) in trace.steps.iter().enumerate() {
        for &p in &s.unmasked_positions {
            decoded_at[p] = Some(col);
        }
    }
    for (col, s) in trace.steps.iter().enumerate() {
        let top1 = s.top1.as_ref().ok_or("missing top1")?;
        for (p, at) in decoded_at.iter().enumerate() {
            if at.is_some_and(|a| a <= col) {
                ensure(top1[p] == out.tokens()[p], || format!("position {p} changed after decoding"))?;
            }
        }
    }

    // block order: refinement steps never return to an earlier block, and
    // never touch a block before the previous one is finished
    let block_of = |p: usize| (p - prompt_len) / cfg.block_len;
    let mut done = vec![0usize; cfg.gen_len / cfg.block_len];
    for s in trace.steps.iter().filter(|s| !s.committed) {
        for &p in &s.unmasked_positions {
            let b = block_of(p);
            ensure((0..b).all(|earlier| done[earlier] == cfg.block_len), || {
                format!("block {b} decoded before earlier blocks finished")
            })?;
            done[b] += 1;
        }
    }

    // dynamics consistency, against a direct recount
    let d = dynamics_matrix(trace).map_err(|e| e.to_string())?;
    ensure(d.positions == gen.iter().copied().collect::<Vec<_>>(), || "dynamics rows".into())?;
    ensure(d.steps == trace.steps.iter().map(|s| s.t).collect::<Vec<_>>(), || "dynamics columns".into())?;
    for (row, &p) in d.positions.iter().enumerate() {
        for col in 0..trace.steps.len() {
            let expected = if decoded_at[p] == Some(col) {
                DynamicsClass::Decoded
            } else if col > 0 && trace.steps[col].top1.as_ref().unwrap()[p] != trace.steps[col - 1].top1.as_ref().unwrap()[p] {
                DynamicsClass::Changed
            } else {
                DynamicsClass::Unchanged
            };
            ensure(d.get(row, col) == expected, || format!("dynamics cell ({p}, {col})"))?;
        }
        let after = decoded_at[p].unwrap() + 1;
        ensure(d.cells[row][after..].iter().all(|&c| c == DynamicsClass::Unchanged), || {
            format!("position {p} changes after decoding")
        })?;
    }

    // budget bookkeeping
    ensure(trace.model_calls == trace.steps.len() && trace.model_calls <= cfg.t_max, || "model call count".into())?;
    if trace.commit_step.is_none() {
        ensure(trace.model_calls == cfg.t_max, || "uncommitted run used fewer steps".into())?;
    }
    Ok(())
}

fn ac9_structural_invariants() -> Check {
    let mut committed = 0;
    for i in 0..AC9_RUNS {
        let strategy = if i % 2 == 0 { RemaskStrategy::Random } else { RemaskStrategy::LowConfidence };
        let case = random_case(90_000 + i as u64, strategy);
        let mut cfg = DecodeConfig {
            record_top1: true,
            ..case.cfg.clone()
        };
        let (out, trace) = if i % 3 == 0 {
            decode_full(&case.oracle, &case.seq0, &cfg, &mut rng::seeded(cfg.seed)).map_err(|e| e.to_string())?
        } else {
            let low = (i % 7) as f64 * 0.5;
            cfg.prophet_enabled = true;
            cfg.thresholds = ThresholdParams {
                tau_high: low + 2.0,
                tau_mid: low + 1.0,
                tau_low: low,
                ..Default::default()
            };
            let (o, t, _) = decode_prophet(&case.oracle, &case.seq0, &cfg, &mut rng::seeded(cfg.seed)).map_err(|e| e.to_string())?;
            (o, t)
        };
        committed += usize::from(trace.commit_step.is_some());
        check_invariants(&case, &cfg, &out, &trace).map_err(|e| format!("run {i}: {e}"))?;
    }
    Ok(format!("{AC9_RUNS} runs ({committed} early commits)"))
}

#[test]
fn acceptance() {
    let criteria: [Criterion; 9] = [
        ("AC1", "threshold exactness", ac1_threshold),
        ("AC2", "conservative-limit equivalence", ac2_conservative_limit),
        ("AC3", "ramp-oracle commit arithmetic", ac3_ramp_commit),
        ("AC4", "speedup-range reconstruction", ac4_speedup_range),
        ("AC5", "transition kernel statistics", ac5_kernel),
        ("AC6", "convergence-statistics exactness", ac6_convergence_stats),
        ("AC7", "end-to-end toy experiment", ac7_toy_experiment),
        ("AC8", "determinism and reproducibility", ac8_reproducibility),
        ("AC9", "decoder structural invariants", ac9_structural_invariants),
    ];
    let mut failed = Vec::new();
    for (id, name, check) in criteria {
        let start = Instant::now();
        let result = check();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("[PASS] {id} {name}: {detail} ({secs:.2}s)"),
            Err(why) => {
                println!("[FAIL] {id} {name}: {why} ({secs:.2}s)");
                failed.push(id);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
