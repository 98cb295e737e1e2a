//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `ACCEPTANCE_CRITERIA=1,2,3` runs a subset. Criterion 7 runs only when
//! `NGRAMBAG_FULL_SCALE=1`; its corpus defaults to the full-scale preset's data
//! path and can be replaced with `NGRAMBAG_FULL_SCALE_DATA`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use ngrambag::corpus::Sentence;
use ngrambag::embedder::{embed_backward, embed_ids, EmbeddingTable};
use ngrambag::harness::pipeline::{quiet, read_json};
use ngrambag::harness::{self, ExperimentConfig, Prepared, RunLayout, Summary};
use ngrambag::metrics::bleu::{bleu_clip, clipped_counts, BleuConfig};
use ngrambag::metrics::NormTable;
use ngrambag::ngrams::{encode_sentence, extract_ngrams, NGramCounts, Vocabulary, MAX_ORDER};
use ngrambag::numerics::gradcheck::{grad_check, numeric_gradient, relative_error, GradCheckReport};
use ngrambag::numerics::loss::cross_entropy_with_logits;
use ngrambag::numerics::tensor::dot;
use ngrambag::numerics::{Parameters, Rng};
use ngrambag::probes::mlp::Mlp;
use ngrambag::probes::{ControlReport, ProbeReport, Task};
use ngrambag::reconstruction::{train, Forcing, GruCell, ModelDims, ReconstructionModel, TrainConfig, Variant};

const H: f64 = 1e-5;
const TOLERANCE: f64 = 1e-4;
const INSTANCES: u64 = 20;
/// Step size for the single-sentence overfit; the training rate needs far more than 500 steps.
const OVERFIT_LR: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome { pass, detail: detail.into() }
    }

    fn from_checks(checks: Vec<(bool, String)>) -> Self {
        let pass = checks.iter().all(|(ok, _)| *ok);
        let detail = checks
            .into_iter()
            .map(|(ok, d)| if ok { d } else { format!("[failed] {d}") })
            .collect::<Vec<_>>()
            .join("; ");
        Outcome { pass, detail }
    }
}

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn random_vec(rng: &mut Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.uniform(-1.0, 1.0)).collect()
}

fn worst(reports: impl IntoIterator<Item = GradCheckReport>) -> GradCheckReport {
    reports.into_iter().reduce(GradCheckReport::merge).expect("at least one instance")
}

fn max_rel(a: &[f64], n: &[f64]) -> f64 {
    a.iter().zip(n).map(|(a, n)| relative_error(*a, *n)).fold(0.0, f64::max)
}

fn randomized_cell(rng: &mut Rng, input: usize, hidden: usize) -> GruCell<f64> {
    let mut cell = GruCell::new("gru", input, hidden, rng);
    for b in [&mut cell.b_z, &mut cell.b_r, &mut cell.b_h] {
        for v in b.value.as_mut_slice() {
            *v = rng.uniform(-0.5, 0.5);
        }
    }
    cell
}

/// GRU unrolled over `xs` from `h0`; loss is `c · h_T`.
fn unroll_loss(cell: &GruCell<f64>, h0: &[f64], xs: &[Vec<f64>], c: &[f64]) -> f64 {
    let mut h = h0.to_vec();
    for x in xs {
        h = cell.forward(&h, x).h;
    }
    dot(c, &h)
}

fn criterion_1() -> Outcome {
    let mut checks = Vec::new();
    let row = |name: &str, r: f64, n: usize| (r < TOLERANCE, format!("{name} max rel err {r:.2e} over {n} instances"));

    // GRU cell: parameters, input and previous state.
    let mut reports = Vec::new();
    let mut input_err: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = Rng::new(100 + seed);
        let mut cell = randomized_cell(&mut rng, 6, 5);
        let (h, x, c) = (random_vec(&mut rng, 5), random_vec(&mut rng, 6), random_vec(&mut rng, 5));
        reports.push(grad_check(
            &mut cell,
            |cell| {
                let step = cell.forward(&h, &x);
                cell.backward(&step, &c);
                dot(&c, &step.h)
            },
            H,
        ));
        let step = cell.forward(&h, &x);
        let (dh, dx) = cell.backward(&step, &c);
        let nh = numeric_gradient(&h, H, |h| dot(&c, &cell.forward(h, &x).h));
        let nx = numeric_gradient(&x, H, |x| dot(&c, &cell.forward(&h, x).h));
        input_err = input_err.max(max_rel(&dh, &nh)).max(max_rel(&dx, &nx));
    }
    let r = worst(reports).max_rel_error.max(input_err);
    checks.push(row("GRU cell", r, INSTANCES as usize));

    // Three-step unroll, backpropagated through time by chaining cell backward passes.
    let mut reports = Vec::new();
    let mut state_err: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = Rng::new(200 + seed);
        let mut cell = randomized_cell(&mut rng, 4, 6);
        let h0 = random_vec(&mut rng, 6);
        let xs: Vec<Vec<f64>> = (0..3).map(|_| random_vec(&mut rng, 4)).collect();
        let c = random_vec(&mut rng, 6);
        let bptt = |cell: &mut GruCell<f64>| -> (f64, Vec<f64>) {
            let mut steps = Vec::new();
            let mut h = h0.clone();
            for x in &xs {
                let s = cell.forward(&h, x);
                h = s.h.clone();
                steps.push(s);
            }
            let mut dh = c.clone();
            for s in steps.iter().rev() {
                dh = cell.backward(s, &dh).0;
            }
            (dot(&c, &h), dh)
        };
        reports.push(grad_check(&mut cell, |cell| bptt(cell).0, H));
        let dh0 = bptt(&mut cell.clone()).1;
        let n0 = numeric_gradient(&h0, H, |h| unroll_loss(&cell, h, &xs, &c));
        state_err = state_err.max(max_rel(&dh0, &n0));
    }
    checks.push(row("3-step BPTT", worst(reports).max_rel_error.max(state_err), INSTANCES as usize));

    // Probe MLP with cross-entropy on top.
    let reports = (0..INSTANCES).map(|seed| {
        let mut rng = Rng::new(300 + seed);
        let mut mlp = Mlp::<f64>::with_hidden(5, [7, 6], 3, &mut rng);
        for mut p in mlp.params_mut() {
            if p.name().ends_with("bias") {
                for v in p.value_mut().as_mut_slice() {
                    *v = rng.uniform(-0.5, 0.5);
                }
            }
        }
        let x = random_vec(&mut rng, 5);
        let label = rng.below(3);
        grad_check(&mut mlp, |m| m.loss_and_backward(&x, label), H)
    });
    checks.push(row("MLP", worst(reports).max_rel_error, INSTANCES as usize));

    // Embedding scatter-add with repeated ids, under a nonlinear loss.
    let reports = (0..INSTANCES).map(|seed| {
        let mut rng = Rng::new(400 + seed);
        let mut table = EmbeddingTable::<f64>::new(9, 4, &mut rng);
        let ids: Vec<usize> = (0..7).map(|_| rng.below(9)).collect();
        let c = random_vec(&mut rng, 4);
        grad_check(
            &mut table,
            |t| {
                let sv = embed_ids(ids.clone(), t);
                let y: Vec<f64> = sv.vector.iter().map(|v| v.tanh()).collect();
                let upstream: Vec<f64> = y.iter().zip(&c).map(|(y, c)| c * (1.0 - y * y)).collect();
                embed_backward(&sv, &upstream, t);
                dot(&c, &y)
            },
            H,
        )
    });
    checks.push(row("embedder scatter-add", worst(reports).max_rel_error, INSTANCES as usize));

    // Cross-entropy with respect to the logits.
    let mut ce: f64 = 0.0;
    for seed in 0..INSTANCES {
        let mut rng = Rng::new(500 + seed);
        let logits: Vec<f64> = (0..6).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let target = rng.below(6);
        let (_, g) = cross_entropy_with_logits(&logits, target);
        let n = numeric_gradient(&logits, H, |z| cross_entropy_with_logits(z, target).0);
        ce = ce.max(max_rel(&g, &n));
    }
    checks.push(row("cross-entropy", ce, INSTANCES as usize));

    // Whole reconstruction models, end to end, on gold decoder inputs: with
    // argmax feedback a nudge can flip a prediction and the loss jumps.
    let sentences: Vec<Sentence> = ["a b c a", "b c d", "d a b c ."]
        .iter()
        .map(|s| Sentence::from_tokens(s.split(' ').map(String::from).collect()).unwrap())
        .collect();
    for variant in [Variant::BagOfNgrams(2), Variant::RnnEncoder] {
        let vocab = Vocabulary::build(&sentences, variant.vocab_order(), 100).unwrap();
        let dims = ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: 4 };
        let reports = (0..INSTANCES).map(|seed| {
            let mut model = ReconstructionModel::<f64>::new(variant, dims, false, &mut Rng::new(600 + seed));
            let enc = encode_sentence(sentences[seed as usize % 3].tokens(), &vocab);
            grad_check(&mut model, |m| m.decode_train_step(&enc, Forcing::Sentence(true), &mut Rng::new(seed)), H)
        });
        checks.push(row(&format!("{variant} model"), worst(reports).max_rel_error, INSTANCES as usize));
    }
    Outcome::from_checks(checks)
}

/// Independent BLEU-clip: every n-gram compared element-wise, no hashing.
fn oracle_counts(cand: &[usize], reference: &[usize], k: usize) -> (usize, usize) {
    if cand.len() < k {
        return (0, 0);
    }
    let cand_grams: Vec<&[usize]> = (0..=cand.len() - k).map(|i| &cand[i..i + k]).collect();
    let ref_grams: Vec<&[usize]> = if reference.len() >= k {
        (0..=reference.len() - k).map(|i| &reference[i..i + k]).collect()
    } else {
        Vec::new()
    };
    let mut matched = 0;
    let mut seen: Vec<&[usize]> = Vec::new();
    for g in &cand_grams {
        if seen.contains(g) {
            continue;
        }
        seen.push(g);
        let in_cand = cand_grams.iter().filter(|h| *h == g).count();
        let in_ref = ref_grams.iter().filter(|h| *h == g).count();
        matched += in_cand.min(in_ref);
    }
    (matched, cand_grams.len())
}

fn oracle_bleu(cand: &[usize], reference: &[usize], max_order: usize, smoothing: bool) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let orders = max_order.min(reference.len());
    let mut log_sum = 0.0;
    for k in 1..=orders {
        let (m, t) = oracle_counts(cand, reference, k);
        let (m, t) = if k >= 2 && smoothing { (m as f64 + 1.0, t as f64 + 1.0) } else { (m as f64, t as f64) };
        if m == 0.0 {
            return 0.0;
        }
        log_sum += (m / t).ln();
    }
    let bp = if cand.len() >= reference.len() { 1.0 } else { (1.0 - reference.len() as f64 / cand.len() as f64).exp() };
    bp * (log_sum / orders as f64).exp()
}

fn criterion_2() -> Outcome {
    let mut rng = Rng::new(2024);
    let mut count_mismatches = 0;
    let mut max_diff: f64 = 0.0;
    for i in 0..1000 {
        let alphabet = 1 + rng.below(5);
        let cand: Vec<usize> = (0..rng.below(9)).map(|_| rng.below(alphabet)).collect();
        let reference: Vec<usize> = (0..1 + rng.below(8)).map(|_| rng.below(alphabet)).collect();
        let smoothing = i % 4 != 0;
        let cfg = BleuConfig { max_order: 4, smoothing };
        for k in 1..=4 {
            if clipped_counts(&cand, &reference, k) != oracle_counts(&cand, &reference, k) {
                count_mismatches += 1;
            }
        }
        let got = bleu_clip(&cand, &reference, &cfg).unwrap().score;
        max_diff = max_diff.max((got - oracle_bleu(&cand, &reference, 4, smoothing)).abs());
    }
    let hand = bleu_clip(&["a", "a", "a"], &["a", "b"], &BleuConfig { max_order: 1, smoothing: true }).unwrap();
    let third = 1.0 / 3.0;
    let hand_ok =
        (hand.precisions[0] - third).abs() < 1e-15 && hand.brevity_penalty == 1.0 && (hand.score - third).abs() < 1e-15;
    Outcome::from_checks(vec![
        (count_mismatches == 0, format!("1000 random pairs: {count_mismatches} clipped-count mismatches")),
        (max_diff < 1e-12, format!("max score difference {max_diff:.1e}")),
        (
            hand_ok,
            format!(
                "[a,a,a] vs [a,b]: p1 = {:.6}, BP = {}, score = {:.6}",
                hand.precisions[0], hand.brevity_penalty, hand.score
            ),
        ),
    ])
}

fn criterion_3() -> Outcome {
    let mut rng = Rng::new(3);
    let words = ["the", "cat", "sat", "on", "a", "mat", "."];
    let mut sentences = Vec::new();
    let mut count_errors = 0;
    for _ in 0..500 {
        let len = 1 + rng.below(25);
        let tokens: Vec<String> = (0..len).map(|_| words[rng.below(words.len())].to_string()).collect();
        let grams = extract_ngrams(&tokens, MAX_ORDER);
        for i in 1..=MAX_ORDER {
            if grams[i - 1].len() != len.saturating_sub(i - 1) {
                count_errors += 1;
            }
        }
        sentences.push(Sentence::from_tokens(tokens).unwrap());
    }

    let mut round_trip = true;
    for n in 1..=MAX_ORDER {
        let v = Vocabulary::build(&sentences, n, 300).unwrap();
        let back = Vocabulary::from_json(&v.to_json()).unwrap();
        round_trip &= back.to_json() == v.to_json() && back.hash() == v.hash();
        round_trip &= (3..v.len()).all(|id| v.id(&v.entry(id).unwrap().tokens) == Some(id));
    }

    let mut counts: NGramCounts = vec![Default::default(); 2];
    for (tokens, f) in [(&["a"][..], 5), (&["b"], 3), (&["c"], 1), (&["a", "b"], 4), (&["b", "a"], 2)] {
        counts[tokens.len() - 1].insert(tokens.iter().map(|s| s.to_string()).collect(), f);
    }
    let v = Vocabulary::from_counts(&counts, 2, 4).unwrap();
    let kept: Vec<String> = v.entries().iter().map(|e| e.tokens.join(" ")).collect();
    let quota_ok = kept == ["a", "b", "a b", "b a"] && v.per_order_counts() == [2, 2];

    Outcome::from_checks(vec![
        (count_errors == 0, format!("N_i = max(0, L-i+1) on 500 sentences x 5 orders: {count_errors} mismatches")),
        (round_trip, "vocabulary JSON and id round trip for n = 1..5".to_string()),
        (quota_ok, format!("quota hand case keeps {kept:?}")),
    ])
}

fn desk_config() -> ExperimentConfig {
    ExperimentConfig::load(&workspace().join("configs/desk.json")).expect("desk preset loads")
}

fn criterion_4() -> Outcome {
    let cfg = desk_config();
    let dir = tempfile::tempdir().unwrap();
    let mut cfg1 = cfg.clone();
    cfg1.model.variants = vec![Variant::BagOfNgrams(1)];
    let layout = RunLayout::new(dir.path());
    harness::prepare(&cfg1, &layout, &quiet).unwrap();
    let prepared = Prepared::load(&cfg1, &layout).unwrap();
    let vocab = prepared.vocab(Variant::BagOfNgrams(1));
    let sentence = prepared.train.sentences.iter().find(|s| s.len() >= 8).expect("a sentence of 8+ tokens");
    let enc = encode_sentence(sentence.tokens(), vocab);
    let dims = ModelDims { vocab_len: vocab.len(), words: vocab.word_count(), hidden: cfg.model.hidden };
    let mut model =
        ReconstructionModel::<f32>::new(Variant::BagOfNgrams(1), dims, cfg.model.tied, &mut Rng::new(cfg.model.seed));
    let tc = TrainConfig { epochs: 1, tf_prob: 1.0, lr: OVERFIT_LR, ..cfg.train_config(Variant::BagOfNgrams(1)) };
    let mut solved_at = None;
    let mut loss = f64::NAN;
    for step in 1..=500 {
        // One sentence per epoch: each call is a single SGD step.
        train(&mut model, std::slice::from_ref(&enc), &tc, |_| {}).unwrap();
        loss = model.clone().decode_train_step(&enc, Forcing::Sentence(true), &mut Rng::new(0)) as f64;
        if loss < 0.01 && model.reconstruct(&enc, 30) == enc.words() {
            solved_at = Some(step);
            break;
        }
    }
    Outcome::new(
        solved_at.is_some(),
        format!(
            "{}-token sentence, hidden {}, lr {}: {} (last loss {loss:.5})",
            sentence.len(),
            cfg.model.hidden,
            tc.lr,
            match solved_at {
                Some(s) => format!("loss < 0.01 and exact greedy decode after {s} steps"),
                None => "not solved within 500 steps".into(),
            }
        ),
    )
}

struct DeskRun {
    _dir: tempfile::TempDir,
    layout: RunLayout,
    summary: Summary,
    seconds: f64,
}

fn desk_run(label: &str) -> DeskRun {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = desk_config();
    cfg.output_dir = dir.path().join(label);
    let layout = RunLayout::new(&cfg.output_dir);
    let start = Instant::now();
    let summary = harness::run_all(&cfg, &layout, 1, &quiet).expect("desk pipeline runs");
    DeskRun { _dir: dir, layout, summary, seconds: start.elapsed().as_secs_f64() }
}

fn criterion_5(run: &DeskRun) -> Outcome {
    let s = &run.summary;
    let mut checks = Vec::new();
    let mut bad = Vec::new();
    for t in &s.training {
        let l = t.epoch_losses.clone().unwrap_or_default();
        if !(l.len() >= 3 && l[0] > l[1] && l[1] > l[2]) {
            bad.push(format!("{} {:?}", t.model, l));
        }
    }
    checks.push((
        bad.is_empty() && s.training.len() == 6,
        if bad.is_empty() {
            "loss decreases over epochs 1-3 for all 6 models".to_string()
        } else {
            format!("loss not decreasing over epochs 1-3: {}", bad.join(", "))
        },
    ));

    let bag1 = s.reconstruction.iter().find(|r| r.model == "bag1").unwrap();
    let (trained, untrained) = (bag1.overall.unwrap_or(f64::NAN), bag1.untrained_overall.unwrap_or(f64::NAN));
    checks.push((trained - untrained >= 0.10, format!("bag1 BLEU {trained:.3} vs untrained {untrained:.3}")));

    let gaps: Vec<String> = s
        .reconstruction
        .iter()
        .map(|r| format!("{} {:.3}/{:.3}", r.model, r.short.unwrap_or(f64::NAN), r.long.unwrap_or(f64::NAN)))
        .collect();
    let short_ge_long = s.reconstruction.iter().all(|r| matches!((r.short, r.long), (Some(a), Some(b)) if a >= b));
    checks.push((short_ge_long, format!("short/long BLEU {}", gaps.join(", "))));

    let norms: NormTable = read_json(&run.layout.norms(Variant::BagOfNgrams(1))).unwrap();
    let rho = norms.monotonicity().unwrap_or(f64::NAN);
    checks.push((rho > 0.8, format!("bag1 norm-vs-length Spearman {rho:.3}")));
    let mut out = Outcome::from_checks(checks);
    out.detail.push_str(&format!(" (pipeline {:.0}s)", run.seconds));
    out
}

fn criterion_6(run: &DeskRun) -> Outcome {
    let mut checks = Vec::new();
    let v = Variant::BagOfNgrams(1);
    for task in Task::all() {
        let r: ProbeReport = read_json(&run.layout.probe(v, task, false)).unwrap();
        checks.push((r.overall - r.chance >= 0.05, format!("{task} {:.3} vs chance {:.3}", r.overall, r.chance)));
    }
    for task in Task::all() {
        let c: ControlReport = read_json(&run.layout.probe(v, task, true)).unwrap();
        checks.push((
            (c.mean - c.chance).abs() <= 0.03,
            format!("{task} shuffled {:.3} vs chance {:.3}", c.mean, c.chance),
        ));
    }
    Outcome::from_checks(checks)
}

fn criterion_7() -> Outcome {
    let mut cfg = ExperimentConfig::load(&workspace().join("configs/full.json")).expect("full-scale preset loads");
    if let Ok(p) = std::env::var("NGRAMBAG_FULL_SCALE_DATA") {
        cfg.data.path = PathBuf::from(p);
    }
    if !cfg.data.path.exists() {
        return Outcome::new(false, format!("corpus {} not found", cfg.data.path.display()));
    }
    let dir = tempfile::tempdir().unwrap();
    cfg.output_dir = dir.path().join("full");
    let layout = RunLayout::new(&cfg.output_dir);
    let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let s = harness::run_all(&cfg, &layout, jobs, &quiet).expect("full-scale pipeline runs");

    let bleu: BTreeMap<&str, f64> =
        s.reconstruction.iter().filter_map(|r| r.overall.map(|b| (r.model.as_str(), b))).collect();
    let probe =
        |task: Task, model: &str| s.probes.iter().find(|p| p.task == task && p.model == model).and_then(|p| p.overall);
    let bucket = |rows: &[harness::report::BucketRow], model: &str, b: &str| {
        rows.iter().find(|r| r.model == model && r.bucket == b).and_then(|r| r.value).unwrap_or(f64::NAN)
    };
    let b1 = bleu.get("bag1").copied().unwrap_or(f64::NAN);
    let higher_max = (2..=5).filter_map(|n| bleu.get(format!("bag{n}").as_str()).copied()).fold(f64::MIN, f64::max);
    let rnn_len = probe(Task::Length, "rnn").unwrap_or(f64::NAN);
    let bag_len = (1..=5).filter_map(|n| probe(Task::Length, &format!("bag{n}"))).fold(f64::MIN, f64::max);
    let (p4, p1) = (bucket(&s.phrase_content, "bag4", "2"), bucket(&s.phrase_content, "bag1", "2"));
    let (u5, u1) = (
        bucket(&s.word_content_by_frequency, "bag5", "unknown"),
        bucket(&s.word_content_by_frequency, "bag1", "unknown"),
    );
    Outcome::from_checks(vec![
        ((b1 - 0.58).abs() <= 0.08, format!("bag1 BLEU {b1:.3} within 0.58 +/- 0.08")),
        (b1 >= higher_max, format!("bag1 BLEU >= bag2..bag5 (max {higher_max:.3})")),
        (rnn_len > bag_len, format!("rnn length accuracy {rnn_len:.3} > bag max {bag_len:.3}")),
        (p4 > p1, format!("2-word phrase accuracy bag4 {p4:.3} > bag1 {p1:.3}")),
        (u5 < u1, format!("unknown-word content bag5 {u5:.3} < bag1 {u1:.3}")),
    ])
}

fn criterion_8(a: &DeskRun) -> Outcome {
    let b = desk_run("b");
    let read = |r: &DeskRun| std::fs::read(r.layout.report_dir().join("summary.json")).unwrap();
    let (sa, sb) = (read(a), read(&b));
    Outcome::new(
        sa == sb,
        format!("summary.json {} bytes, identical: {} (second run {:.0}s)", sa.len(), sa == sb, b.seconds),
    )
}

fn main() {
    let selected: Option<Vec<u32>> =
        std::env::var("ACCEPTANCE_CRITERIA").ok().map(|s| s.split(',').filter_map(|c| c.trim().parse().ok()).collect());
    let wanted = |n: u32| selected.as_ref().is_none_or(|s| s.contains(&n));
    let full_scale = std::env::var("NGRAMBAG_FULL_SCALE").is_ok_and(|v| v == "1");
    let names = [
        "gradient checks",
        "BLEU-clip oracle",
        "n-gram combinatorics",
        "overfit one sentence",
        "desk-scale trends",
        "probe sanity",
        "full-scale trends",
        "determinism",
    ];

    let mut failed = 0;
    let mut report = |n: u32, outcome: Option<Outcome>| {
        let name = names[n as usize - 1];
        match outcome {
            Some(o) => {
                if !o.pass {
                    failed += 1;
                }
                println!("criterion {n} ({name}): {} - {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
            }
            None => println!("criterion {n} ({name}): SKIP"),
        }
    };
    report(1, wanted(1).then(criterion_1));
    report(2, wanted(2).then(criterion_2));
    report(3, wanted(3).then(criterion_3));
    report(4, wanted(4).then(criterion_4));
    let desk = [5, 6, 8].iter().any(|n| wanted(*n)).then(|| desk_run("a"));
    report(5, desk.as_ref().filter(|_| wanted(5)).map(criterion_5));
    report(6, desk.as_ref().filter(|_| wanted(6)).map(criterion_6));
    report(7, (wanted(7) && full_scale).then(criterion_7));
    report(8, desk.as_ref().filter(|_| wanted(8)).map(criterion_8));
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
