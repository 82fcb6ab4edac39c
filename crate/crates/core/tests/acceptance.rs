//! End-to-end acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so every criterion reports even when an
//! earlier one fails; the process exits non-zero if any fails.

use std::collections::{BTreeMap, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchqa::corpus::{
    parse_corpus, parse_corpus_str, preprocess_corpus, split_indices, write_corpus, RasterExtractor, SplitRatios,
};
use sketchqa::eval::{accuracy_report, check_monotone, localization_accuracy, localization_report, EvalConfig};
use sketchqa::guesser::{
    featurize, fit_normalizer, train_two_phase, train_unified, GuesserModel, Phase1Config, SequenceExample,
    TwoPhaseConfig, TwoPhaseModel, UnifiedConfig,
};
use sketchqa::lexnet::{accuracy_by_criteria, match_guess, CriteriaSet, Criterion, EmbeddingTable, Lexicon, Taxonomy};
use sketchqa::neuralcore::{
    compute_loss, init_lstm, ranking_loss, transition_weights, weighted_bce, weighted_bce_logit, Checkpoint,
    ClassWeights, LossConfig, LossKind, LstmShape, OptimizerConfig,
};
use sketchqa::stats::wilcoxon_signed_rank;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn data() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn lexicon() -> Lexicon {
    Lexicon::load_dir(&data().join("lexicon")).expect("bundled lexicon")
}

// ---------------------------------------------------------------- gradients

const FD_EPS: f64 = 1e-5;
const MAX_REL: f64 = 1e-4;

fn rel_err(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

fn vec_in(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Worst relative error of `grad` against central differences of `f` at `x`.
fn check_vec(x: &[f64], grad: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut worst: f64 = 0.0;
    let mut y = x.to_vec();
    for i in 0..x.len() {
        y[i] = x[i] + FD_EPS;
        let up = f(&y);
        y[i] = x[i] - FD_EPS;
        let down = f(&y);
        y[i] = x[i];
        worst = worst.max(rel_err(grad[i], (up - down) / (2.0 * FD_EPS)));
    }
    worst
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: BTreeMap<&str, f64> = BTreeMap::new();
    let mut record = |name: &'static str, e: f64| {
        let w = worst.entry(name).or_insert(0.0);
        *w = w.max(e);
    };
    let convex = LossConfig {
        lambda: 1.0,
        ..LossConfig::of(LossKind::Convex)
    };
    for _ in 0..100 {
        let dim = 8;
        let (p, g, h) = (vec_in(&mut rng, dim), vec_in(&mut rng, dim), vec_in(&mut rng, dim));
        for (name, cfg) in [
            ("mse", LossConfig::of(LossKind::Mse)),
            ("cosine", LossConfig::of(LossKind::Cosine)),
            ("hinge-rank", LossConfig::of(LossKind::HingeRank)),
            ("convex", convex),
        ] {
            let neg = cfg.kind.needs_negative().then_some(h.as_slice());
            let (_, grad) = compute_loss(&cfg, &p, &g, neg).unwrap();
            record(name, check_vec(&p, &grad, |q| compute_loss(&cfg, q, &g, neg).unwrap().0));
        }

        let w = ClassWeights {
            w0: rng.random_range(0.2..3.0),
            w1: rng.random_range(0.2..3.0),
        };
        let label = rng.random_bool(0.5);
        let prob = rng.random_range(0.05..0.95);
        let (_, d) = weighted_bce(prob, label, &w).unwrap();
        record(
            "weighted-bce",
            check_vec(&[prob], &[d], |q| weighted_bce(q[0], label, &w).unwrap().0),
        );
        let z = rng.random_range(-4.0..4.0);
        let (_, dz) = weighted_bce_logit(z, label, &w).unwrap();
        record(
            "weighted-bce-logit",
            check_vec(&[z], &[dz], |q| weighted_bce_logit(q[0], label, &w).unwrap().0),
        );

        let n = rng.random_range(2..8);
        let k = rng.random_range(0..=n);
        let labels: Vec<bool> = (0..n).map(|t| t >= k).collect();
        let scores: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..0.95)).collect();
        let (ls, lr) = (rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        let r = ranking_loss(&scores, &labels, ls, lr, &w).unwrap();
        record(
            "ranking",
            check_vec(&scores, &r.grad, |q| ranking_loss(q, &labels, ls, lr, &w).unwrap().total),
        );

        let shape = LstmShape::new(4, 8, 3);
        let params = init_lstm(shape, 1.1, rng.random()).unwrap();
        let inputs: Vec<Vec<f64>> = (0..3).map(|_| vec_in(&mut rng, 4)).collect();
        let coef: Vec<Vec<f64>> = (0..3).map(|_| vec_in(&mut rng, 3)).collect();
        let objective = |flat: &[f64]| -> f64 {
            let p = sketchqa::neuralcore::LstmParams::from_vec(shape, flat.to_vec()).unwrap();
            let trace = p.forward(&inputs).unwrap();
            trace
                .outputs
                .iter()
                .zip(&coef)
                .map(|(y, c)| y.iter().zip(c).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };
        let trace = params.forward(&inputs).unwrap();
        let grad = params.backward(&trace, &coef).unwrap();
        record("bptt", check_vec(params.as_slice(), &grad, objective));
    }
    let elapsed = started.elapsed();
    let summary = worst
        .iter()
        .map(|(k, v)| format!("{k} {v:.1e}"))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(worst.values().all(|&e| e < MAX_REL), format!("relative error too large: {summary}"))?;
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!("worst relative error: {summary}; {:.1}s", elapsed.as_secs_f64()))
}

// ------------------------------------------------------------ class weights

fn criterion_2() -> Outcome {
    let w = ClassWeights::from_fractions(0.339, 0.661).map_err(|e| e.to_string())?;
    ensure((w.w0 - 1.475).abs() <= 1e-3, format!("w0 = {}", w.w0))?;
    ensure((w.w1 - 0.756).abs() <= 1e-3, format!("w1 = {}", w.w1))?;
    ensure(
        (w.w0 - 1.475).abs() <= 0.01 && (w.w1 - 0.765).abs() <= 0.01,
        "more than 0.01 from the published weights",
    )?;
    Ok(format!("w0 = {:.4}, w1 = {:.4}", w.w0, w.w1))
}

// ---------------------------------------------------------------- criteria

fn criterion_3() -> Outcome {
    let lex = lexicon();
    let t = &lex.taxonomy;
    let all = CriteriaSet::new(&Criterion::ALL).unwrap();
    let text = std::fs::read_to_string(data().join("fixtures/criteria_pairs.tsv")).unwrap();
    let mut rows = 0;
    for line in text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#')) {
        let cols: Vec<&str> = line.split('\t').collect();
        let expected: Vec<Criterion> = match cols[2] {
            "-" => Vec::new(),
            s => s.split(',').map(|c| c.parse().unwrap()).collect(),
        };
        let got = match_guess(cols[0], cols[1], t, &all);
        ensure(
            got.fired == expected && got.verdict == !expected.is_empty(),
            format!("{:?} vs {:?}: fired {:?}, expected {:?}", cols[0], cols[1], got.fired, expected),
        )?;
        rows += 1;
    }
    ensure(rows == 25, format!("{rows} fixture rows"))?;

    let nodes: Vec<&str> = t.nodes().iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pick = |rng: &mut ChaCha8Rng| -> String {
        match rng.random_range(0..4) {
            0 => format!(
                "{} {}",
                nodes[rng.random_range(0..nodes.len())],
                nodes[rng.random_range(0..nodes.len())]
            ),
            1 => "xqzzy".to_string(),
            _ => nodes[rng.random_range(0..nodes.len())].to_string(),
        }
    };
    let pairs: Vec<(String, String)> = (0..1000).map(|_| (pick(&mut rng), pick(&mut rng))).collect();
    let acc = accuracy_by_criteria(&pairs, t, &CriteriaSet::progressive_chain()).map_err(|e| e.to_string())?;
    ensure(acc.windows(2).all(|w| w[0] <= w[1]), format!("chain not monotone: {acc:?}"))?;
    Ok(format!(
        "{rows}/25 fixture pairs exact; chain accuracy {}",
        acc.iter().map(|a| format!("{a:.3}")).collect::<Vec<_>>().join(" <= ")
    ))
}

// --------------------------------------------------------------------- WUP

struct Forest {
    parent: HashMap<String, String>,
    nodes: Vec<String>,
    joined: bool,
}

fn random_forest(rng: &mut ChaCha8Rng) -> Forest {
    let n = rng.random_range(2..=200);
    let mut parent = HashMap::new();
    let mut tops = vec!["n0".to_string()];
    for i in 1..n {
        let name = format!("n{i}");
        if rng.random_bool(0.1) {
            tops.push(name);
        } else {
            parent.insert(name, format!("n{}", rng.random_range(0..i)));
        }
    }
    // only nodes that occur in some edge exist in the taxonomy
    let mut nodes: Vec<String> = parent.keys().chain(parent.values()).cloned().collect();
    nodes.sort();
    nodes.dedup();
    let present_tops = tops.iter().filter(|t| nodes.contains(t)).count();
    Forest {
        parent,
        nodes,
        joined: present_tops > 1,
    }
}

fn ancestor_path<'a>(f: &'a Forest, mut node: &'a str) -> Vec<&'a str> {
    let mut path = vec![node];
    while let Some(p) = f.parent.get(node) {
        path.push(p);
        node = p;
    }
    if f.joined {
        path.push("entity");
    }
    path
}

fn brute_wup(f: &Forest, a: &str, b: &str) -> f64 {
    let pa = ancestor_path(f, a);
    let pb = ancestor_path(f, b);
    let lcs_depth = pa
        .iter()
        .find_map(|x| pb.iter().position(|y| y == x).map(|i| pb.len() - i))
        .expect("joined forests share a root") as u32;
    2.0 * f64::from(lcs_depth) / f64::from(pa.len() as u32 + pb.len() as u32)
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for forest_no in 0..50 {
        let f = random_forest(&mut rng);
        if f.nodes.is_empty() {
            continue;
        }
        let edges: Vec<(String, String)> = f.parent.iter().map(|(c, p)| (c.clone(), p.clone())).collect();
        let t = Taxonomy::new(&edges, &[] as &[Vec<String>]).map_err(|e| e.to_string())?;
        for a in &f.nodes {
            ensure(t.wup_similarity(a, a).unwrap() == 1.0, format!("wup({a},{a}) != 1"))?;
        }
        for _ in 0..200 {
            let a = &f.nodes[rng.random_range(0..f.nodes.len())];
            let b = &f.nodes[rng.random_range(0..f.nodes.len())];
            let got = t.wup_similarity(a, b).unwrap();
            ensure(
                got == brute_wup(&f, a, b),
                format!("forest {forest_no}: wup({a},{b}) = {got}, brute force {}", brute_wup(&f, a, b)),
            )?;
            ensure(got == t.wup_similarity(b, a).unwrap(), format!("wup({a},{b}) not symmetric"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} pairs over 50 forests match the ancestor-path oracle"))
}

// ---------------------------------------------------------------- Wilcoxon

/// Two-sided exact p by enumerating all sign assignments, using doubled
/// average ranks of the non-zero absolute differences.
fn exhaustive_p(pairs: &[(f64, f64)]) -> (usize, f64) {
    let d: Vec<f64> = pairs.iter().map(|(x, y)| x - y).filter(|d| *d != 0.0).collect();
    let n = d.len();
    let mut ranks = vec![0u64; n];
    for i in 0..n {
        let below = d.iter().filter(|o| o.abs() < d[i].abs()).count() as u64;
        let equal = d.iter().filter(|o| o.abs() == d[i].abs()).count() as u64;
        // mean of ranks below+1 ..= below+equal, doubled
        ranks[i] = 2 * below + equal + 1;
    }
    let total: u64 = ranks.iter().sum();
    let observed: u64 = (0..n).filter(|&i| d[i] > 0.0).map(|i| ranks[i]).sum();
    // compare 2*W+ - total in doubled units against the mean, all integral
    let dev = |w: u64| (2 * w as i64 - total as i64).abs();
    let obs_dev = dev(observed);
    let extreme = (0u32..1 << n)
        .filter(|mask| {
            let w: u64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            dev(w) >= obs_dev
        })
        .count();
    (n, extreme as f64 / f64::from(1u32 << n))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut exact_cases = 0;
    for case in 0..200 {
        let len = rng.random_range(1..=14);
        let pairs: Vec<(f64, f64)> = (0..len)
            .map(|_| (f64::from(rng.random_range(0..6)), f64::from(rng.random_range(0..6))))
            .collect();
        let (n, oracle) = exhaustive_p(&pairs);
        if n == 0 || n > 10 {
            continue;
        }
        let r = wilcoxon_signed_rank(&pairs).map_err(|e| e.to_string())?;
        ensure(r.p == oracle, format!("case {case} (n = {n}): p = {}, enumeration {oracle}", r.p))?;
        exact_cases += 1;
    }

    let mut worst: f64 = 0.0;
    for n in 8..=12 {
        for _ in 0..40 {
            let mut mags: Vec<u32> = (1..=n).collect();
            for i in (1..mags.len()).rev() {
                mags.swap(i, rng.random_range(0..=i));
            }
            let pairs: Vec<(f64, f64)> = mags
                .iter()
                .map(|&m| {
                    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                    (sign * f64::from(m), 0.0)
                })
                .collect();
            let (_, oracle) = exhaustive_p(&pairs);
            let r = wilcoxon_signed_rank(&pairs).map_err(|e| e.to_string())?;
            worst = worst.max((r.p_normal - oracle).abs());
        }
    }
    ensure(worst < 0.05, format!("normal approximation off by {worst:.4}"))?;
    Ok(format!(
        "{exact_cases} cases with n <= 10 exact; normal approximation within {worst:.4} for 8 <= n <= 12"
    ))
}

// ------------------------------------------------------ transition weights

fn criterion_6() -> Outcome {
    let mut cases = 0;
    for alpha in [5.0, 7.0, 10.0] {
        for n in 1..=50 {
            for k in 0..n {
                let w = transition_weights(k, n, alpha).map_err(|e| e.to_string())?;
                ensure(w[k] == 1.0, format!("peak {} at k={k} n={n}", w[k]))?;
                ensure(w[..=k].windows(2).all(|p| p[0] < p[1]), format!("not increasing before k={k} n={n}"))?;
                ensure(w[k..].windows(2).all(|p| p[0] > p[1]), format!("not decreasing after k={k} n={n}"))?;
                cases += 1;
            }
        }
    }
    let w = transition_weights(1, 5, 7.0).map_err(|e| e.to_string())?;
    ensure((w[0] - (-3.5f64).exp()).abs() <= 1e-12, format!("w(t=1) = {}", w[0]))?;
    Ok(format!("{cases} (alpha, k, N) cases unimodal; w(t=1 | k=1, alpha=7) = {:.12}", w[0]))
}

// ------------------------------------------------------- separable corpus

struct Trained {
    examples: Vec<SequenceExample>,
    unified: GuesserModel,
    unified_acc: f64,
    unified_epoch: usize,
    unified_time: Duration,
    two_phase: TwoPhaseModel,
    phase1_loc: f64,
}

fn separable_examples() -> (Vec<SequenceExample>, RasterExtractor, Arc<EmbeddingTable>) {
    let lex = lexicon();
    let table = Arc::new(lex.embeddings().unwrap().clone());
    let corpus = parse_corpus(&data().join("separable_corpus.jsonl"), true).unwrap().corpus;
    let fx = RasterExtractor::default();
    (featurize(&corpus, &fx).unwrap(), fx, table)
}

fn train_separable() -> Trained {
    let (examples, fx, table) = separable_examples();
    let normalizer = fit_normalizer(&examples).unwrap();
    let unified_cfg = UnifiedConfig {
        hidden: 32,
        max_epochs: 200,
        seed: 1,
        optimizer: OptimizerConfig {
            early_stop_patience: 0,
            ..OptimizerConfig::default()
        },
        ..UnifiedConfig::default()
    };
    let started = Instant::now();
    let (unified, report) = train_unified(
        &examples,
        &examples,
        &unified_cfg,
        normalizer.clone(),
        Some(fx.0),
        Arc::clone(&table),
    )
    .unwrap();
    let unified_time = started.elapsed();
    let best = *report.best().expect("trained for some epochs");

    let two_cfg = TwoPhaseConfig {
        phase1: Phase1Config {
            hidden: 32,
            optimizer: OptimizerConfig {
                learning_rate: 0.05,
                early_stop_patience: 0,
                ..OptimizerConfig::phase_one()
            },
            ..Phase1Config::default()
        },
        phase2: UnifiedConfig {
            max_epochs: 50,
            ..unified_cfg
        },
    };
    let (two_phase, rep2) = train_two_phase(&examples, &examples, &two_cfg, normalizer, Some(fx.0), table).unwrap();
    let phase1_loc = rep2.phase1_log.iter().map(|e| e.localization[0]).fold(0.0, f64::max);
    Trained {
        examples,
        unified,
        unified_acc: best.val_acc[0],
        unified_epoch: best.epoch,
        unified_time,
        two_phase,
        phase1_loc,
    }
}

fn criterion_7(t: &Trained) -> Outcome {
    ensure(t.unified_acc >= 0.95, format!("unified acc@1 {:.3}", t.unified_acc))?;
    ensure(t.unified_time < Duration::from_secs(300), format!("unified took {:?}", t.unified_time))?;
    ensure(t.phase1_loc >= 0.95, format!("phase-1 localization@0 {:.3}", t.phase1_loc))?;
    Ok(format!(
        "unified acc@1 {:.3} (best epoch {}, {:.1}s); phase-1 localization@0 {:.3}",
        t.unified_acc,
        t.unified_epoch,
        t.unified_time.as_secs_f64(),
        t.phase1_loc
    ))
}

fn criterion_8(t: &Trained) -> Outcome {
    let cfg = EvalConfig::default();
    let ranked: Vec<Vec<Vec<String>>> = t
        .examples
        .iter()
        .map(|e| t.unified.ranked(&e.features, cfg.max_k()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let truths: Vec<Vec<String>> = t.examples.iter().map(|e| e.guesses.clone()).collect();
    let acc = accuracy_report(&ranked, &truths, &cfg).map_err(|e| e.to_string())?;
    check_monotone(&acc).map_err(|e| format!("accuracy: {e}"))?;
    let a = t.unified.evaluate(&t.examples, &cfg).map_err(|e| e.to_string())?;
    ensure(a[0] <= a[1] && a[1] <= a[2], format!("acc@1,3,5 = {a:?}"))?;

    let preds: Vec<usize> = t
        .examples
        .iter()
        .map(|e| t.two_phase.predict_transition(&e.features).map(|p| p.index))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let truth: Vec<usize> = t.examples.iter().map(|e| e.no_guess_prefix_len() + 1).collect();
    let loc: Vec<f64> = (0..3)
        .map(|d| localization_accuracy(&preds, &truth, d))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    check_monotone(&localization_report(&preds, &truth, &[0, 1, 2]).map_err(|e| e.to_string())?)
        .map_err(|e| format!("localization: {e}"))?;
    ensure(loc[0] <= loc[1] && loc[1] <= loc[2], format!("loc@0,1,2 = {loc:?}"))?;
    Ok(format!(
        "acc@1,3,5 = {:.3} <= {:.3} <= {:.3}; loc@0,1,2 = {:.3} <= {:.3} <= {:.3}",
        a[0], a[1], a[2], loc[0], loc[1], loc[2]
    ))
}

// ------------------------------------------------------------ determinism

fn mini_checkpoint() -> (Vec<u8>, Vec<u8>) {
    let lex = lexicon();
    let table = Arc::new(lex.embeddings().unwrap().clone());
    let corpus = parse_corpus(&data().join("mini_corpus.jsonl"), true).unwrap().corpus;
    let fx = RasterExtractor::default();
    let examples = featurize(&corpus, &fx).unwrap();
    let normalizer = fit_normalizer(&examples).unwrap();
    let cfg = UnifiedConfig {
        hidden: 16,
        max_epochs: 5,
        ..UnifiedConfig::default()
    };
    let (unified, _) = train_unified(
        &examples,
        &[],
        &cfg,
        normalizer.clone(),
        Some(fx.0),
        Arc::clone(&table),
    )
    .unwrap();
    let two_cfg = TwoPhaseConfig {
        phase1: Phase1Config {
            hidden: 8,
            max_epochs: 5,
            ..Phase1Config::default()
        },
        phase2: cfg,
    };
    let (two, _) = train_two_phase(&examples, &[], &two_cfg, normalizer, Some(fx.0), table).unwrap();
    (
        unified.to_checkpoint().to_bytes().unwrap(),
        two.to_checkpoint().to_bytes().unwrap(),
    )
}

fn criterion_9() -> Outcome {
    let first = mini_checkpoint();
    let second = mini_checkpoint();
    ensure(first.0 == second.0, "unified checkpoints differ between runs")?;
    ensure(first.1 == second.1, "two-phase checkpoints differ between runs")?;
    for bytes in [&first.0, &first.1] {
        let ck = Checkpoint::from_bytes(bytes).map_err(|e| e.to_string())?;
        ensure(&ck.to_bytes().unwrap() == bytes, "checkpoint round trip is lossy")?;
    }
    let table = Arc::new(lexicon().embeddings().unwrap().clone());
    let restored = GuesserModel::from_checkpoint(&Checkpoint::from_bytes(&first.0).unwrap(), Arc::clone(&table))
        .map_err(|e| e.to_string())?;
    ensure(restored.to_checkpoint().to_bytes().unwrap() == first.0, "restored unified model differs")?;
    let restored = TwoPhaseModel::from_checkpoint(&Checkpoint::from_bytes(&first.1).unwrap(), table)
        .map_err(|e| e.to_string())?;
    ensure(restored.to_checkpoint().to_bytes().unwrap() == first.1, "restored two-phase model differs")?;

    for name in ["mini_corpus.jsonl", "separable_corpus.jsonl", "fixtures/raw_30.jsonl"] {
        let text = std::fs::read_to_string(data().join(name)).unwrap();
        let parsed = parse_corpus_str(&text, true).map_err(|e| e.to_string())?.corpus;
        ensure(write_corpus(&parsed) == text, format!("{name} does not round-trip"))?;
    }

    let sizes = SplitRatios::default().sizes(16624);
    ensure(sizes == (9975, 4156, 2493), format!("split sizes {sizes:?}"))?;
    let [tr, va, te] = split_indices(16624, SplitRatios::default(), 1).map_err(|e| e.to_string())?;
    ensure((tr.len(), va.len(), te.len()) == sizes, "split index lists disagree with sizes")?;
    let mut all: Vec<usize> = tr.into_iter().chain(va).chain(te).collect();
    all.sort_unstable();
    ensure(all == (0..16624).collect::<Vec<_>>(), "split is not a partition")?;
    Ok(format!(
        "checkpoints bit-identical ({} + {} bytes); round trips lossless; split(16624) = {sizes:?}",
        first.0.len(),
        first.1.len()
    ))
}

// ----------------------------------------------------------- preprocessing

fn criterion_10() -> Outcome {
    let lex = lexicon();
    let raw = parse_corpus(&data().join("fixtures/raw_30.jsonl"), true).map_err(|e| e.to_string())?.corpus;
    ensure(raw.len() == 30, format!("{} raw records", raw.len()))?;
    let golden = std::fs::read(data().join("fixtures/golden_30.jsonl")).unwrap();
    let (clean, removed) = preprocess_corpus(&raw, &lex);
    let out = write_corpus(&clean);
    ensure(out.as_bytes() == golden.as_slice(), "preprocessed output differs from the golden file")?;
    Ok(format!(
        "{} records kept, {} removed; byte-identical to golden",
        clean.len(),
        removed.len()
    ))
}

// ------------------------------------------------------------------ runner

fn run(no: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panicked".into());
        Err(msg)
    });
    match outcome {
        Ok(detail) => {
            println!("criterion {no:>2} {name:<26} PASS  {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {no:>2} {name:<26} FAIL  {detail}");
            false
        }
    }
}

fn main() {
    // `cargo test -- --list` and filters come through as arguments
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let mut ok = true;
    ok &= run(1, "gradient checks", criterion_1);
    ok &= run(2, "class weights", criterion_2);
    ok &= run(3, "matching criteria", criterion_3);
    ok &= run(4, "Wu-Palmer similarity", criterion_4);
    ok &= run(5, "Wilcoxon signed-rank", criterion_5);
    ok &= run(6, "transition weights", criterion_6);
    let trained = catch_unwind(train_separable).ok();
    match &trained {
        Some(t) => {
            ok &= run(7, "separable corpus training", || criterion_7(t));
            ok &= run(8, "metric monotonicity", || criterion_8(t));
        }
        None => {
            ok &= run(7, "separable corpus training", || Err("training failed".into()));
            ok &= run(8, "metric monotonicity", || Err("training failed".into()));
        }
    }
    ok &= run(9, "determinism and round trips", criterion_9);
    ok &= run(10, "preprocessing golden file", criterion_10);
    if !ok {
        std::process::exit(1);
    }
}
