//! End-to-end acceptance checks. Prints one `PASS`/`FAIL`/`SKIP` line per
//! criterion and exits non-zero if any check fails.
//!
//! Criteria 9 and 10 need the public news dataset; they run only when
//! `POLYCLUST_DATASET_DIR` points at a directory holding `train.jsonl`,
//! `dev.jsonl`, `test.jsonl` (stream format), `idf.tsv` and
//! `embeddings.txt`.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use polyclust::clusterer::IngestOutcome;
use polyclust::evaluation::{clustream_baseline, evaluate_state, pairwise_metrics, CluStreamConfig, MetricsReport};
use polyclust::featurizer::{EmbeddingTable, Featurizer, IdfTable, PlainAnnotator};
use polyclust::learning::{
    generate_cross_ranking_data, generate_ranking_data, pairwise_accuracy, train_merge, train_ranker, tune_tau, MergeTrainingConfig, RankerConfig,
    RankingDataConfig, RankingExample, TauSearch,
};
use polyclust::model::{Centroid, DenseVector, FeatureClass, SparseVector, TermId, NUM_SPARSE, NUM_SUBVECTORS};
use polyclust::similarity::{time_feature, CrossSimilarityModel, SimilarityModel};
use polyclust::synthetic::{story_stream, StoryStreamConfig, SuffixAnnotator};
use polyclust::{
    ClustererConfig, CrossMode, DocRepresentation, Document, Language, MergePolicy, Models, OnlineClusterer,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Stream = Vec<(Document, DocRepresentation)>;

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Outcome::Pass(detail)
    } else {
        Outcome::Fail(detail)
    }
}

fn main() {
    let criteria: Vec<(&str, fn() -> Outcome)> = vec![
        ("1 metric oracle equivalence", metric_oracle),
        ("2 centroid invariant", centroid_invariant),
        ("3 domino correctness", domino_correctness),
        ("4 gaussian timestamp feature", gaussian_feature),
        ("5 separable-stream recovery", separable_recovery),
        ("6 ranker sanity", ranker_sanity),
        ("7a svm-merge >= tau-search under time drift", merge_vs_tau),
        ("7b trained >= all-ones weights on noisy titles", trained_vs_ones),
        ("7c full features >= tokens only", full_vs_tokens),
        ("8 ingest latency bounded by cluster count", latency),
        ("9 dataset: trained > clustream, timestamps help", dataset_table2),
        ("10 dataset: pivot > sum crosslingual", dataset_table5),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Outcome::Pass(d) => println!("PASS  {name}: {d} ({secs:.1}s)"),
            Outcome::Fail(d) => {
                failed += 1;
                println!("FAIL  {name}: {d} ({secs:.1}s)");
            }
            Outcome::Skip(d) => println!("SKIP  {name}: {d}"),
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}

// ---------------------------------------------------------------- helpers

fn lang(code: &str) -> Language {
    Language::new(code).unwrap()
}

fn run(stream: &[(Document, DocRepresentation)], models: &Models, config: ClustererConfig) -> (OnlineClusterer, Vec<IngestOutcome>) {
    let mut c = OnlineClusterer::new(models.clone(), config).unwrap();
    let outcomes = stream.iter().map(|(d, r)| c.ingest(d, r).unwrap()).collect();
    (c, outcomes)
}

fn report(c: &OnlineClusterer, stream: &[(Document, DocRepresentation)]) -> MetricsReport {
    let docs: Vec<Document> = stream.iter().map(|(d, _)| d.clone()).collect();
    evaluate_state(c.state(), &docs).unwrap()
}

/// Pooled monolingual F1 over all languages of a threshold or classifier run.
fn mono_f1(stream: &[(Document, DocRepresentation)], models: &Models, policy: MergePolicy) -> f64 {
    let config = ClustererConfig {
        merge_policy: policy,
        ..Default::default()
    };
    let (c, _) = run(stream, models, config);
    let predicted: HashMap<String, String> = c
        .state()
        .all_clusters()
        .flat_map(|cl| cl.member_ids().iter().map(move |id| (id.clone(), cl.reference().to_string())))
        .collect();
    let gold: HashMap<String, String> = stream
        .iter()
        .map(|(d, _)| (d.id.clone(), format!("{}/{}", d.language, d.gold_mono_label.clone().unwrap())))
        .collect();
    pairwise_metrics(&predicted, &gold).unwrap().f1
}

fn search() -> TauSearch {
    TauSearch {
        lo: -5.0,
        hi: 12.0,
        ..Default::default()
    }
}

fn trained(train: &[(Document, DocRepresentation)]) -> Models {
    let ex = generate_ranking_data(train, &RankingDataConfig::default()).unwrap();
    let r = train_ranker(&ex, &RankerConfig::default()).unwrap();
    Models {
        mono_default: r.mono_model(0.0, 72.0).unwrap(),
        ..Default::default()
    }
}

// ---------------------------------------------------------------- 1

fn brute_force(pred: &[u32], gold: &[u32]) -> (u64, u64, u64) {
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for i in 0..pred.len() {
        for j in i + 1..pred.len() {
            match (pred[i] == pred[j], gold[i] == gold[j]) {
                (true, true) => tp += 1,
                (true, false) => fp += 1,
                (false, true) => fn_ += 1,
                _ => {}
            }
        }
    }
    (tp, fp, fn_)
}

fn metric_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..200 {
        let n = rng.gen_range(0..=50);
        let kp = rng.gen_range(1..=8);
        let kg = rng.gen_range(1..=8);
        let pred: Vec<u32> = (0..n).map(|_| rng.gen_range(0..kp)).collect();
        let gold: Vec<u32> = (0..n).map(|_| rng.gen_range(0..kg)).collect();
        let pm: HashMap<usize, u32> = pred.iter().copied().enumerate().collect();
        let gm: HashMap<usize, u32> = gold.iter().copied().enumerate().collect();
        let m = pairwise_metrics(&pm, &gm).unwrap();
        let expected = brute_force(&pred, &gold);
        if (m.tp, m.fp, m.fn_) != expected {
            return Outcome::Fail(format!("case {case}: got {:?}, oracle {expected:?}", (m.tp, m.fp, m.fn_)));
        }
    }
    let elapsed = start.elapsed();
    check(elapsed < Duration::from_secs(5), format!("200/200 exact, {elapsed:.2?} (limit 5s)"))
}

// ---------------------------------------------------------------- 2

fn centroid_invariant() -> Outcome {
    let corpus = story_stream(&StoryStreamConfig {
        languages: vec!["en".into(), "de".into(), "es".into()],
        stories: 40,
        docs: 1000,
        concurrent: 8,
        drift: 0.5,
        seed: 7,
        ..Default::default()
    });
    let stream = corpus.represent(&PlainAnnotator).unwrap();
    let reps: HashMap<&str, &DocRepresentation> = stream.iter().map(|(d, r)| (d.id.as_str(), r)).collect();
    let config = ClustererConfig {
        merge_policy: MergePolicy::threshold(4.0),
        ..Default::default()
    };
    let (c, _) = run(&stream, &Models::default(), config);
    let mut worst: f64 = 0.0;
    let mut clusters = 0;
    for cl in c.state().all_clusters() {
        clusters += 1;
        let members: Vec<&DocRepresentation> = cl.member_ids().iter().map(|id| reps[id.as_str()]).collect();
        let n = members.len() as f64;
        for i in 0..NUM_SUBVECTORS {
            match cl.centroid(i).unwrap() {
                Centroid::Sparse(v) => {
                    let mut mean: HashMap<TermId, f64> = HashMap::new();
                    for m in &members {
                        for (t, w) in m.mono[i].iter() {
                            *mean.entry(t).or_default() += w / n;
                        }
                    }
                    for (t, w) in &mean {
                        worst = worst.max((v.get(*t) - w).abs());
                    }
                    for (t, w) in v.iter() {
                        worst = worst.max((mean.get(&t).copied().unwrap_or(0.0) - w).abs());
                    }
                }
                Centroid::Dense(v) => {
                    let k = i - NUM_SPARSE;
                    for (d, x) in v.0.iter().enumerate() {
                        let mean: f64 = members.iter().map(|m| m.cross[k].0[d]).sum::<f64>() / n;
                        worst = worst.max((x - mean).abs());
                    }
                }
            }
        }
    }
    check(
        worst <= 1e-9 && c.state().document_count() == 1000,
        format!("{clusters} clusters, max deviation {worst:.1e} (tolerance 1e-9)"),
    )
}

// ---------------------------------------------------------------- 3

/// Text-only models: mono scores are token cosines, cross scores are dense
/// cosines of the first dense subvector.
fn text_only() -> Models {
    Models {
        mono_default: SimilarityModel {
            q1: [0.0; 3],
            ..Default::default()
        },
        cross: CrossSimilarityModel {
            q1: [0.0; 3],
            ..Default::default()
        },
        ..Default::default()
    }
}

fn angled(id: &str, language: &str, word: &str, degrees: f64) -> (Document, DocRepresentation) {
    let mut rep = DocRepresentation::empty(0.0, 2);
    rep.mono[0] = SparseVector::from_weights([(TermId::new(FeatureClass::Token, word), 1.0)]);
    let r = degrees.to_radians();
    rep.cross[0] = DenseVector(vec![r.cos(), r.sin()]);
    (Document::new(id, lang(language), "", word, 0.0), rep)
}

/// Crosslingual cluster of every document.
fn cross_of(c: &OnlineClusterer) -> BTreeMap<String, u64> {
    let st = c.state();
    st.all_clusters()
        .flat_map(|cl| {
            let home = st.home_of(&cl.reference()).unwrap();
            cl.member_ids().iter().map(move |id| (id.clone(), home))
        })
        .collect()
}

fn expect_homes(c: &OnlineClusterer, expected: &[(&str, u64)]) -> Result<(), String> {
    let got = cross_of(c);
    let want: BTreeMap<String, u64> = expected.iter().map(|(id, a)| (id.to_string(), *a)).collect();
    if got == want {
        Ok(())
    } else {
        Err(format!("got {got:?}, want {want:?}"))
    }
}

fn domino_scenarios() -> Result<String, String> {
    let config = ClustererConfig {
        merge_policy: MergePolicy::threshold(0.5),
        ..Default::default()
    };

    // Empty space: the first cluster founds crosslingual cluster 1.
    let (c, out) = run(&[angled("z", "de", "z", 0.0)], &text_only(), config.clone());
    expect_homes(&c, &[("z", 1)])?;
    if !out[0].trace.topples.is_empty() {
        return Err("empty space toppled".into());
    }

    // Single displacement. A1 = {de 0deg, en 60deg}; en 10deg is closer to
    // the German member, takes the slot, and the 60deg cluster founds A2.
    let single = [
        angled("z", "de", "z", 0.0),
        angled("y", "en", "y", 60.0),
        angled("c", "en", "c", 10.0),
    ];
    let (c, out) = run(&single, &text_only(), config.clone());
    expect_homes(&c, &[("z", 1), ("y", 2), ("c", 1)])?;
    if out[2].trace.topples.len() != 1 {
        return Err(format!("single displacement: {} topples", out[2].trace.topples.len()));
    }

    // Chain. German anchors at 0, 90 and 150 degrees found A1..A3 (residual
    // contests between same-language singletons are ties, so nobody moves).
    // English clusters land E1(40) -> A1, E2(95) -> A2, E3(210) -> A3.
    // A second E1 document at 144 degrees turns E1's centroid to 92 degrees:
    //   E1 beats E2 at A2 (cos 2 > cos 5 against the German member),
    //   E2 ranks A2 > A3 (0.151) > A1 (-0.087), loses A2, beats E3 at A3
    //   (cos 55 > cos 60 against 150 degrees),
    //   E3 ranks A3 > A1 > A2, loses A3 and takes the free A1 slot.
    let chain = [
        angled("z1", "de", "z1", 0.0),
        angled("z2", "de", "z2", 90.0),
        angled("z3", "de", "z3", 150.0),
        angled("e1", "en", "e1", 40.0),
        angled("e2", "en", "e2", 95.0),
        angled("e3", "en", "e3", 210.0),
    ];
    let (mut c, _) = run(&chain, &text_only(), config.clone());
    expect_homes(&c, &[("z1", 1), ("z2", 2), ("z3", 3), ("e1", 1), ("e2", 2), ("e3", 3)])?;
    let (d, r) = angled("e1b", "en", "e1", 144.0);
    let out = c.ingest(&d, &r).unwrap();
    expect_homes(
        &c,
        &[("z1", 1), ("z2", 2), ("z3", 3), ("e1", 2), ("e1b", 2), ("e2", 3), ("e3", 1)],
    )?;
    let displaced: Vec<&str> = out
        .trace
        .topples
        .iter()
        .map(|t| c.state().cluster(&t.displaced).unwrap().member_ids()[0].as_str())
        .collect();
    if displaced != ["e2", "e3"] {
        return Err(format!("chain displaced {displaced:?}"));
    }
    c.state().check_invariants()?;
    Ok("empty space, single displacement and 2-topple chain match the hand traces".into())
}

fn domino_correctness() -> Outcome {
    let scenarios = match domino_scenarios() {
        Ok(s) => s,
        Err(e) => return Outcome::Fail(e),
    };
    let mut topples = Vec::new();
    for seed in 0..3 {
        let stream = story_stream(&StoryStreamConfig {
            languages: vec!["en".into(), "de".into(), "es".into()],
            stories: 30,
            docs: 600,
            concurrent: 6,
            drift: 0.3,
            seed,
            ..Default::default()
        })
        .represent(&PlainAnnotator)
        .unwrap();
        let config = ClustererConfig {
            merge_policy: MergePolicy::threshold(4.0),
            ..Default::default()
        };
        let mut c = OnlineClusterer::new(Models::default(), config).unwrap();
        for (i, (d, r)) in stream.iter().enumerate() {
            let out = c.ingest(d, r).unwrap();
            topples.push(out.trace.topples.len());
            if let Err(e) = c.state().check_invariants() {
                return Outcome::Fail(format!("seed {seed}, doc {i}: {e}"));
            }
            if c.state().document_count() != i + 1 {
                return Outcome::Fail(format!("seed {seed}, doc {i}: assignment count"));
            }
        }
    }
    topples.sort_unstable();
    let median = topples[topples.len() / 2];
    let toppling = topples.iter().filter(|&&t| t > 0).count();
    check(
        median == 0,
        format!(
            "{scenarios}; invariants held on 1800 ingests; median topples {median}, {:.1}% of updates topple",
            100.0 * toppling as f64 / topples.len() as f64
        ),
    )
}

// ---------------------------------------------------------------- 4

fn gaussian_feature() -> Outcome {
    let f0 = time_feature(0.0, 0.0, 72.0).unwrap();
    let f72 = time_feature(72.0, 0.0, 72.0).unwrap();
    let symmetric = [0.5, 3.0, 24.0, 72.0, 500.0]
        .iter()
        .all(|&t| time_feature(t, 0.0, 72.0).unwrap() == time_feature(-t, 0.0, 72.0).unwrap());
    check(
        f0 == 1.0 && (f72 - (-0.5f64).exp()).abs() <= 1e-12 && symmetric,
        format!("f(0) = {f0}, f(72) - exp(-0.5) = {:.1e}, symmetric {symmetric}", f72 - (-0.5f64).exp()),
    )
}

// ---------------------------------------------------------------- 5

fn separable_recovery() -> Outcome {
    let test = story_stream(&StoryStreamConfig::separable_trilingual(4, 1))
        .represent(&PlainAnnotator)
        .unwrap();
    let dev = story_stream(&StoryStreamConfig::separable_trilingual(4, 2))
        .represent(&PlainAnnotator)
        .unwrap();
    let models = Models::default();
    let tau = tune_tau(&dev, &models, &TauSearch::default()).unwrap().tau;
    let merge = train_merge(&dev, &models.mono_default, &MergeTrainingConfig::default()).unwrap();
    let mut worst: f64 = 1.0;
    for mode in [CrossMode::Sum, CrossMode::pivot(lang("en"))] {
        for policy in [MergePolicy::threshold(tau), MergePolicy::classifier(merge.clone())] {
            let config = ClustererConfig {
                merge_policy: policy,
                cross_mode: mode.clone(),
                ..Default::default()
            };
            let (c, _) = run(&test, &models, config);
            let r = report(&c, &test);
            for m in r.per_language.values().chain(r.crosslingual.as_ref()) {
                worst = worst.min(m.f1);
            }
            if r.crosslingual.is_none() || r.per_language.len() != 3 {
                return Outcome::Fail("missing report rows".into());
            }
        }
    }
    check(
        worst == 1.0,
        format!("tau {tau} and svm-merge, sum and pivot: min F1 {worst} (required exactly 1.0)"),
    )
}

// ---------------------------------------------------------------- 6

fn planted(rng: &mut ChaCha8Rng, w: &[f64], queries: std::ops::Range<usize>) -> Vec<RankingExample> {
    queries
        .map(|q| {
            let mut cands: Vec<Vec<f64>> = (0..8)
                .map(|_| (0..w.len()).map(|_| rng.gen_range(0.0..1.0)).collect())
                .collect();
            let score = |x: &Vec<f64>| x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
            cands.sort_by(|a, b| score(b).total_cmp(&score(a)));
            let negatives = cands.split_off(2);
            RankingExample {
                query_id: format!("q{q}"),
                positives: cands,
                negatives,
            }
        })
        .collect()
}

fn ranker_sanity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let w: Vec<f64> = (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let train = planted(&mut rng, &w, 0..300);
    let test = planted(&mut rng, &w, 300..600);
    let r = train_ranker(&train, &RankerConfig::default()).unwrap();
    let acc = pairwise_accuracy(&r.weights, &test);
    check(
        acc >= 0.99,
        format!("held-out pairwise agreement {:.4} (required >= 0.99), C = {}", acc, r.c),
    )
}

// ---------------------------------------------------------------- 7

fn triple(cfg: StoryStreamConfig, annotate_suffixes: bool) -> (Stream, Stream, Stream) {
    let mk = |seed| {
        let corpus = story_stream(&StoryStreamConfig { seed, ..cfg.clone() });
        if annotate_suffixes {
            corpus.represent(&SuffixAnnotator).unwrap()
        } else {
            corpus.represent(&PlainAnnotator).unwrap()
        }
    };
    (mk(1), mk(2), mk(3))
}

fn drifting(cfg: StoryStreamConfig) -> StoryStreamConfig {
    StoryStreamConfig {
        stories: 30,
        docs: 600,
        concurrent: 6,
        drift: 0.3,
        shared_vocab: 40,
        shared_per_doc: 6,
        ..cfg
    }
}

fn merge_vs_tau() -> Outcome {
    // The gap between documents grows twenty-fold over the stream, so the
    // timestamp part of every score shrinks as the stream goes on.
    let (train, dev, test) = triple(
        drifting(StoryStreamConfig {
            rate_drift: 20.0,
            ..Default::default()
        }),
        false,
    );
    let models = Models::default();
    let tau = tune_tau(&dev, &models, &search()).unwrap();
    let merge = train_merge(&train, &models.mono_default, &MergeTrainingConfig::default()).unwrap();
    let f_tau = mono_f1(&test, &models, MergePolicy::threshold(tau.tau));
    let f_merge = mono_f1(&test, &models, MergePolicy::classifier(merge));
    check(
        f_merge >= f_tau,
        format!("svm-merge F1 {f_merge:.3} vs tau-search F1 {f_tau:.3} (tau {})", tau.tau),
    )
}

fn trained_vs_ones() -> Outcome {
    let (train, dev, test) = triple(
        drifting(StoryStreamConfig {
            noisy_titles: true,
            ..Default::default()
        }),
        false,
    );
    let ones = Models::default();
    let learned = trained(&train);
    let tau_ones = tune_tau(&dev, &ones, &search()).unwrap().tau;
    let tau_learned = tune_tau(&dev, &learned, &search()).unwrap().tau;
    let f_ones = mono_f1(&test, &ones, MergePolicy::threshold(tau_ones));
    let f_learned = mono_f1(&test, &learned, MergePolicy::threshold(tau_learned));
    check(
        f_learned >= f_ones,
        format!("trained F1 {f_learned:.3} vs all-ones F1 {f_ones:.3}"),
    )
}

fn tokens_only(stream: &[(Document, DocRepresentation)]) -> Stream {
    stream
        .iter()
        .map(|(d, r)| {
            let mut r = r.clone();
            for v in &mut r.mono[3..NUM_SPARSE] {
                *v = SparseVector::new();
            }
            (d.clone(), r)
        })
        .collect()
}

fn full_vs_tokens() -> Outcome {
    let (train, dev, test) = triple(
        drifting(StoryStreamConfig {
            inflections: 4,
            entities_per_story: 1,
            ..Default::default()
        }),
        true,
    );
    let full = trained(&train);
    let tau_full = tune_tau(&dev, &full, &search()).unwrap().tau;
    let f_full = mono_f1(&test, &full, MergePolicy::threshold(tau_full));

    let (train, dev, test) = (tokens_only(&train), tokens_only(&dev), tokens_only(&test));
    let tokens = trained(&train);
    let tau_tokens = tune_tau(&dev, &tokens, &search()).unwrap().tau;
    let f_tokens = mono_f1(&test, &tokens, MergePolicy::threshold(tau_tokens));
    check(
        f_full >= f_tokens,
        format!("full-feature F1 {f_full:.3} vs tokens-only F1 {f_tokens:.3}"),
    )
}

// ---------------------------------------------------------------- 8

fn median(mut xs: Vec<Duration>) -> Duration {
    xs.sort();
    xs[xs.len() / 2]
}

fn latency() -> Outcome {
    // Every story stays active for the whole stream and documents carry no
    // background words, so the number of clusters stops growing once each
    // story has been seen.
    let cfg = StoryStreamConfig {
        languages: vec!["en".into(), "de".into(), "es".into()],
        stories: 20,
        concurrent: 20,
        docs: 10_200,
        shared_vocab: 0,
        shared_per_doc: 0,
        seed: 8,
        ..Default::default()
    };
    let stream = story_stream(&cfg).represent(&PlainAnnotator).unwrap();
    let models = Models::default();
    let dev = story_stream(&StoryStreamConfig {
        docs: 600,
        seed: 9,
        ..cfg.clone()
    })
    .represent(&PlainAnnotator)
    .unwrap();
    let tau = tune_tau(&dev, &models, &TauSearch::default()).unwrap().tau;
    let config = ClustererConfig {
        merge_policy: MergePolicy::threshold(tau),
        ..Default::default()
    };
    let mut c = OnlineClusterer::new(models, config).unwrap();
    let window = 100;
    let mut early = Vec::new();
    let mut late = Vec::new();
    let mut clusters_early = 0;
    for (i, (d, r)) in stream.iter().enumerate() {
        let start = Instant::now();
        c.ingest(d, r).unwrap();
        let t = start.elapsed();
        if (1000 - window / 2..1000 + window / 2).contains(&i) {
            early.push(t);
        }
        if i == 1000 {
            clusters_early = c.state().all_clusters().count();
        }
        if (10_000 - window / 2..10_000 + window / 2).contains(&i) {
            late.push(t);
        }
    }
    let clusters_late = c.state().all_clusters().count();
    let (e, l) = (median(early), median(late));
    let ratio = l.as_secs_f64() / e.as_secs_f64();
    check(
        ratio <= 3.0,
        format!(
            "median ingest {e:.2?} at doc 1000 ({clusters_early} clusters) vs {l:.2?} at doc 10000 \
             ({clusters_late} clusters): ratio {ratio:.2} (limit 3)"
        ),
    )
}

// ---------------------------------------------------------------- 9, 10

struct Dataset {
    train: Stream,
    dev: Stream,
    test: Stream,
}

fn dataset_dir() -> Option<PathBuf> {
    std::env::var_os("POLYCLUST_DATASET_DIR").map(PathBuf::from)
}

fn load_dataset(dir: &Path) -> Result<Dataset, String> {
    let open = |name: &str| {
        std::fs::File::open(dir.join(name))
            .map(std::io::BufReader::new)
            .map_err(|e| format!("{name}: {e}"))
    };
    let idf = IdfTable::parse(open("idf.tsv")?).map_err(|e| e.to_string())?;
    let embeddings = EmbeddingTable::parse(open("embeddings.txt")?).map_err(|e| e.to_string())?;
    let annotator = PlainAnnotator;
    let featurizer = Featurizer::new(&idf, &embeddings, &annotator);
    let load = |name: &str| -> Result<Stream, String> {
        let docs = polyclust::io::read_stream(open(name)?, None).map_err(|e| format!("{name}: {e}"))?;
        docs.into_iter()
            .map(|d| featurizer.represent(&d).map(|r| (d, r)).map_err(|e| e.to_string()))
            .collect()
    };
    Ok(Dataset {
        train: load("train.jsonl")?,
        dev: load("dev.jsonl")?,
        test: load("test.jsonl")?,
    })
}

fn with_dataset(f: impl FnOnce(&Dataset) -> Outcome) -> Outcome {
    match dataset_dir() {
        None => Outcome::Skip("set POLYCLUST_DATASET_DIR to run".into()),
        Some(dir) => match load_dataset(&dir) {
            Ok(ds) => f(&ds),
            Err(e) => Outcome::Fail(format!("cannot load dataset: {e}")),
        },
    }
}

/// Mono and cross weights trained on the dataset's training split.
fn dataset_models(train: &[(Document, DocRepresentation)], ex: &[RankingExample]) -> Models {
    let cross = generate_cross_ranking_data(train, &RankingDataConfig::default()).unwrap();
    Models {
        mono_default: train_ranker(ex, &RankerConfig::default()).unwrap().mono_model(0.0, 72.0).unwrap(),
        cross: train_ranker(&cross, &RankerConfig::default()).unwrap().cross_model(0.0, 72.0).unwrap(),
        ..Default::default()
    }
}

fn per_language_f1(c: &OnlineClusterer, stream: &[(Document, DocRepresentation)]) -> BTreeMap<Language, f64> {
    report(c, stream)
        .per_language
        .into_iter()
        .map(|(l, m)| (l, m.f1))
        .collect()
}

fn dataset_table2() -> Outcome {
    with_dataset(|ds| {
        let ex = generate_ranking_data(&ds.train, &RankingDataConfig::default()).unwrap();
        let with_time = dataset_models(&ds.train, &ex);
        // same weights trained with the timestamp columns zeroed
        let zeroed: Vec<RankingExample> = ex
            .iter()
            .map(|q| {
                let strip = |v: &Vec<f64>| {
                    let mut v = v.clone();
                    v[NUM_SPARSE..].iter_mut().for_each(|x| *x = 0.0);
                    v
                };
                RankingExample {
                    query_id: q.query_id.clone(),
                    positives: q.positives.iter().map(strip).collect(),
                    negatives: q.negatives.iter().map(strip).collect(),
                }
            })
            .collect();
        let no_time = Models {
            mono_default: train_ranker(&zeroed, &RankerConfig::default())
                .unwrap()
                .mono_model(0.0, 72.0)
                .unwrap(),
            ..with_time.clone()
        };
        let mut scores = Vec::new();
        for models in [&with_time, &no_time] {
            let tau = tune_tau(&ds.dev, models, &search()).unwrap().tau;
            let (c, _) = run(
                &ds.test,
                models,
                ClustererConfig {
                    merge_policy: MergePolicy::threshold(tau),
                    ..Default::default()
                },
            );
            scores.push(per_language_f1(&c, &ds.test));
        }
        let mut ok = true;
        let mut detail = Vec::new();
        for l in ["en", "de", "es"].map(lang) {
            let subset: Stream = ds.test.iter().filter(|(d, _)| d.language == l).cloned().collect();
            let expected = subset
                .iter()
                .map(|(d, _)| d.gold_mono_label.clone())
                .collect::<std::collections::HashSet<_>>()
                .len();
            let pred = clustream_baseline(&subset, &CluStreamConfig::for_expected_clusters(expected)).unwrap();
            let gold: HashMap<String, String> = subset
                .iter()
                .map(|(d, _)| (d.id.clone(), d.gold_mono_label.clone().unwrap_or_default()))
                .collect();
            let base = pairwise_metrics(&pred, &gold).unwrap().f1;
            let (t, n) = (
                scores[0].get(&l).copied().unwrap_or(0.0),
                scores[1].get(&l).copied().unwrap_or(0.0),
            );
            ok &= t > base && t >= n;
            if l.as_str() == "en" {
                ok &= t >= 0.88;
            }
            detail.push(format!("{l}: trained {t:.3} / no-time {n:.3} / clustream {base:.3}"));
        }
        check(ok, detail.join("; "))
    })
}

fn dataset_table5() -> Outcome {
    with_dataset(|ds| {
        let ex = generate_ranking_data(&ds.train, &RankingDataConfig::default()).unwrap();
        let models = dataset_models(&ds.train, &ex);
        let tau = tune_tau(&ds.dev, &models, &search()).unwrap().tau;
        let mut f = Vec::new();
        for mode in [CrossMode::pivot(lang("en")), CrossMode::Sum] {
            let config = ClustererConfig {
                merge_policy: MergePolicy::threshold(tau),
                cross_mode: mode,
                ..Default::default()
            };
            let (c, _) = run(&ds.test, &models, config);
            f.push(report(&c, &ds.test).crosslingual.map_or(0.0, |m| m.f1));
        }
        check(f[0] > f[1], format!("pivot crosslingual F1 {:.3} vs sum {:.3}", f[0], f[1]))
    })
}
