use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use log::{info, warn};
use polyclust::evaluation::{clustream_baseline, evaluate_assignments, CluStreamConfig};
use polyclust::featurizer::{Annotator, EmbeddingTable, ExternalCommandAnnotator, Featurizer, IdfTable, PlainAnnotator};
use polyclust::io::convert::FieldMap;
use polyclust::io::models::{self, MergeFile, RankerFile, MERGE_KIND, RANKER_KIND};
use polyclust::io::snapshot::{self, Assignment};
use polyclust::io::StreamReader;
use polyclust::learning::{
    generate_cross_ranking_data, generate_ranking_data, train_merge, train_ranker, write_ranking_dump,
    MergeTrainingConfig, RankerConfig, RankingDataConfig, TauSearch,
};
use polyclust::synthetic::{story_stream, Order, StoryStreamConfig};
use polyclust::{
    ClusterRef, ClustererConfig, CrossMode, DocRepresentation, Document, GUpdate, Language, MergePolicy, Models,
    OnlineClusterer,
};
use serde::{Deserialize, Serialize};

use crate::fingerprint::Fingerprint;
use crate::{
    AnnotatorKind, BaselineArgs, BuildIdfArgs, CliError, ClusterArgs, ConvertArgs, CrossModeArg, EvaluateArgs,
    FeatureArgs, GUpdateArg, Preset, SynthArgs, TrainArgs, TuneTauArgs,
};

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Writes the whole file at once so a failed run leaves nothing behind.
fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn slack(hours: f64) -> Result<Option<f64>> {
    if hours.is_nan() || hours < 0.0 {
        return Err(CliError::Config(format!("--slack must be non-negative, got {hours}")).into());
    }
    Ok(hours.is_finite().then_some(hours))
}

fn read_docs(path: &Path, slack_hours: f64) -> Result<Vec<Document>> {
    let docs = polyclust::io::read_stream(open(path)?, slack(slack_hours)?)
        .with_context(|| format!("reading stream {}", path.display()))?;
    Ok(docs)
}

fn annotator(kind: AnnotatorKind, cmd: Option<&str>) -> Result<Box<dyn Annotator>> {
    match (kind, cmd) {
        (AnnotatorKind::None, None) => Ok(Box::new(PlainAnnotator)),
        (AnnotatorKind::None, Some(_)) => {
            Err(CliError::Config("--annotator-cmd needs --annotator external-command".into()).into())
        }
        (AnnotatorKind::ExternalCommand, Some(c)) => Ok(Box::new(ExternalCommandAnnotator::new(c)?)),
        (AnnotatorKind::ExternalCommand, None) => {
            Err(CliError::Config("--annotator external-command needs --annotator-cmd".into()).into())
        }
    }
}

fn idf_for_all(docs: &[Document], annotator: &dyn Annotator) -> Result<IdfTable> {
    let languages: BTreeSet<&Language> = docs.iter().map(|d| &d.language).collect();
    let mut table = IdfTable::new();
    for l in languages {
        table.merge(IdfTable::build(docs, l, annotator)?);
    }
    Ok(table)
}

/// Loaded featurization resources.
struct Features {
    idf: Option<IdfTable>,
    embeddings: EmbeddingTable,
    annotator: Box<dyn Annotator>,
}

impl Features {
    fn load(args: &FeatureArgs) -> Result<Self> {
        let idf = match &args.idf {
            Some(p) => Some(IdfTable::parse(open(p)?).with_context(|| format!("parsing {}", p.display()))?),
            None => None,
        };
        let embeddings = match &args.embeddings {
            Some(p) => EmbeddingTable::parse(open(p)?).with_context(|| format!("parsing {}", p.display()))?,
            None => EmbeddingTable::empty(),
        };
        Ok(Features {
            idf,
            embeddings,
            annotator: annotator(args.annotator, args.annotator_cmd.as_deref())?,
        })
    }

    fn fingerprint(&self, fp: Fingerprint, args: &FeatureArgs) -> Result<Fingerprint> {
        Ok(fp
            .optional_file(args.idf.as_deref())?
            .optional_file(args.embeddings.as_deref())?
            .settings(&(args.annotator, &args.annotator_cmd)))
    }

    /// Featurizes `docs`, building the IDF table from them when none was
    /// given.
    fn represent(&self, docs: Vec<Document>) -> Result<Vec<(Document, DocRepresentation)>> {
        let built;
        let idf = match &self.idf {
            Some(t) => t,
            None => {
                if docs.is_empty() {
                    return Ok(Vec::new());
                }
                warn!("no --idf given; computing IDF from the input stream");
                built = idf_for_all(&docs, self.annotator.as_ref())?;
                &built
            }
        };
        let f = Featurizer::new(idf, &self.embeddings, self.annotator.as_ref());
        docs.into_iter()
            .map(|d| {
                let r = f.represent(&d)?;
                Ok((d, r))
            })
            .collect()
    }
}

fn load_ranker(path: Option<&Path>) -> Result<RankerFile> {
    match path {
        Some(p) => Ok(models::parse_ranker(&read_text(p)?)
            .with_context(|| format!("loading ranker {}", p.display()))?
            .payload),
        None => Ok(RankerFile::default()),
    }
}

fn set_sigma(models: &mut Models, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(CliError::Config(format!("--sigma-hours must be positive, got {sigma}")).into());
    }
    models.mono_default.sigma = sigma;
    for m in models.mono.values_mut() {
        m.sigma = sigma;
    }
    models.cross.sigma = sigma;
    Ok(())
}

// ------------------------------------------------------------- build-idf

pub fn build_idf(args: BuildIdfArgs) -> Result<()> {
    let annotator = annotator(args.annotator, args.annotator_cmd.as_deref())?;
    let docs = read_docs(&args.input, f64::INFINITY)?;
    let table = match &args.language {
        Some(l) => IdfTable::build(&docs, &Language::new(l)?, annotator.as_ref())?,
        None if docs.is_empty() => return Err(CliError::Input("empty corpus".into()).into()),
        None => idf_for_all(&docs, annotator.as_ref())?,
    };
    write_file(&args.output, table.to_text().as_bytes())?;
    for l in table.languages() {
        println!(
            "{l}: {} documents, {} terms",
            table.doc_count(l).unwrap_or(0),
            table.term_count(l)
        );
    }
    Ok(())
}

// ------------------------------------------------------------- cluster

#[derive(Serialize)]
struct ClusterSettings<'a> {
    config: &'a ClustererConfig,
    models: &'a Models,
    slack: f64,
}

#[derive(Serialize)]
struct ClusterSummary {
    fingerprint: String,
    #[serde(flatten)]
    counts: snapshot::ClusterCounts,
    topples: usize,
}

fn cluster_config(args: &ClusterArgs, ranker: &RankerFile) -> Result<ClustererConfig> {
    let merge_policy = match (&args.merge_model, args.tau) {
        (Some(_), Some(_)) => {
            return Err(CliError::Config("--tau and --merge-model are mutually exclusive".into()).into())
        }
        (Some(p), None) => {
            let m: MergeFile = models::parse_merge(&read_text(p)?)
                .with_context(|| format!("loading merge model {}", p.display()))?
                .payload;
            MergePolicy::Classifier {
                default: m.default,
                per_language: m.per_language,
            }
        }
        (None, Some(tau)) => MergePolicy::threshold(tau),
        (None, None) => match ranker.tau {
            Some(tau) => MergePolicy::Threshold {
                tau,
                per_language: ranker.tau_per_language.clone(),
            },
            None => {
                return Err(CliError::Config(
                    "no join threshold: pass --tau, a ranker with a tuned tau, or --merge-model".into(),
                )
                .into())
            }
        },
    };
    let cross_mode = match (args.cross_mode, &args.pivot) {
        (Some(CrossModeArg::Sum), Some(_)) => {
            return Err(CliError::Config("--pivot needs --cross-mode pivot".into()).into())
        }
        (Some(CrossModeArg::Sum), None) | (None, None) => CrossMode::Sum,
        (Some(CrossModeArg::Pivot), None) => {
            return Err(CliError::Config("--cross-mode pivot needs --pivot <language>".into()).into())
        }
        (_, Some(l)) => CrossMode::Pivot {
            language: Language::new(l)?,
            fallback: args.pivot_fallback,
        },
    };
    let config = ClustererConfig {
        merge_policy,
        cross_mode,
        g_update: match args.g_update {
            GUpdateArg::Immutable => GUpdate::Immutable,
            GUpdateArg::Domino => GUpdate::Domino,
        },
        topple_budget: args.topple_budget,
        cross_tau: args.cross_tau,
        ..Default::default()
    };
    config.validate()?;
    Ok(config)
}

pub fn cluster(args: ClusterArgs) -> Result<()> {
    let features = Features::load(&args.features)?;
    let mut ranker = load_ranker(args.ranker.as_deref())?;
    if let Some(s) = args.sigma_hours {
        set_sigma(&mut ranker.models, s)?;
    }
    let config = cluster_config(&args, &ranker)?;
    let fingerprint = features
        .fingerprint(Fingerprint::new("cluster").file(&args.input)?, &args.features)?
        .settings(&ClusterSettings {
            config: &config,
            models: &ranker.models,
            slack: args.slack,
        })
        .finish();
    let mut clusterer = OnlineClusterer::new(ranker.models, config)?;

    // (document id, language, mono cluster, crosslingual cluster at ingest)
    let mut ingested: Vec<(String, ClusterRef, u64)> = Vec::new();
    let mut topples = 0;
    let mut ingest = |clusterer: &mut OnlineClusterer, doc: &Document, rep: &DocRepresentation| -> Result<()> {
        let out = clusterer
            .ingest(doc, rep)
            .with_context(|| format!("ingesting {}", doc.id))?;
        topples += out.trace.topples.len();
        ingested.push((doc.id.clone(), out.mono, out.cross));
        Ok(())
    };
    match &features.idf {
        Some(idf) => {
            let f = Featurizer::new(idf, &features.embeddings, features.annotator.as_ref());
            for doc in StreamReader::new(open(&args.input)?).with_slack(slack(args.slack)?) {
                let doc = doc?;
                let rep = f.represent(&doc)?;
                ingest(&mut clusterer, &doc, &rep)?;
            }
        }
        None => {
            let docs = read_docs(&args.input, args.slack)?;
            for (doc, rep) in features.represent(docs)? {
                ingest(&mut clusterer, &doc, &rep)?;
            }
        }
    }

    let state = clusterer.state();
    let mut out = Vec::new();
    for (id, mono, at_ingest) in ingested {
        let record = Assignment {
            id,
            language: mono.language.clone(),
            mono_cluster: mono.id,
            cross_cluster: state.home_of(&mono).expect("every cluster has a home"),
            cross_cluster_at_ingest: Some(at_ingest),
        };
        serde_json::to_writer(&mut out, &record)?;
        out.push(b'\n');
    }
    write_file(&args.output, &out)?;
    if let Some(p) = &args.snapshot {
        let mut s = serde_json::to_vec_pretty(&snapshot::snapshot(state))?;
        s.push(b'\n');
        write_file(p, &s)?;
    }
    let summary = ClusterSummary {
        fingerprint,
        counts: snapshot::counts(state),
        topples,
    };
    println!("{}", serde_json::to_string(&summary)?);
    Ok(())
}

// ------------------------------------------------------------- train

pub fn train(args: TrainArgs) -> Result<()> {
    let features = Features::load(&args.features)?;
    let mut fp = features.fingerprint(Fingerprint::new("train").file(&args.input)?, &args.features)?;
    fp = fp
        .optional_file(args.dev.as_deref())?
        .settings(&(args.sigma_hours, args.merge_c, args.seed, args.slack));
    let fingerprint = fp.finish();

    let train = features.represent(read_docs(&args.input, args.slack)?)?;
    let data_cfg = RankingDataConfig {
        sigma: args.sigma_hours,
        ..Default::default()
    };
    let ranker_cfg = RankerConfig {
        seed: args.seed,
        ..Default::default()
    };
    let examples = generate_ranking_data(&train, &data_cfg)?;
    if let Some(p) = &args.dump_ranking {
        let mut buf = Vec::new();
        write_ranking_dump(&examples, &mut buf)?;
        write_file(p, &buf)?;
    }
    let mono = train_ranker(&examples, &ranker_cfg).context("training monolingual weights")?;
    info!("monolingual ranker: C = {}, cv accuracy {:?}", mono.c, mono.cv_accuracy);
    let mut models = Models {
        mono_default: mono.mono_model(data_cfg.mu, data_cfg.sigma)?,
        ..Default::default()
    };
    let languages: BTreeSet<&Language> = train.iter().map(|(d, _)| &d.language).collect();
    if languages.len() > 1 && train.iter().all(|(d, _)| d.gold_cross_label.is_some()) {
        let cross_examples = generate_cross_ranking_data(&train, &data_cfg)?;
        match train_ranker(&cross_examples, &ranker_cfg) {
            Ok(cross) => models.cross = cross.cross_model(data_cfg.mu, data_cfg.sigma)?,
            Err(polyclust::Error::NoRankablePairs) => {
                warn!("no crosslingual ranking pairs; keeping all-ones crosslingual weights")
            }
            Err(e) => return Err(e).context("training crosslingual weights"),
        }
    } else {
        warn!("training stream lacks crosslingual labels or languages; keeping all-ones crosslingual weights");
    }

    let mut file = RankerFile {
        models,
        ..Default::default()
    };
    if let Some(dev) = &args.dev {
        let dev = features.represent(read_docs(dev, args.slack)?)?;
        let r = polyclust::learning::tune_tau(&dev, &file.models, &TauSearch::default())?;
        println!("tuned tau {} (dev F1 {:.4})", r.tau, r.f1);
        file.tau = Some(r.tau);
    }
    write_file(&args.output, models::to_json(RANKER_KIND, &file, Some(&fingerprint)).as_bytes())?;
    if let Some(p) = &args.merge_model {
        let cfg = MergeTrainingConfig {
            c: args.merge_c,
            seed: args.seed,
            ..Default::default()
        };
        let m = train_merge(&train, &file.models.mono_default, &cfg).context("training merge classifier")?;
        let payload = MergeFile {
            default: Some(m),
            per_language: BTreeMap::new(),
        };
        write_file(p, models::to_json(MERGE_KIND, &payload, Some(&fingerprint)).as_bytes())?;
    }
    println!(
        "{}",
        serde_json::json!({
            "fingerprint": fingerprint,
            "queries": examples.len(),
            "c": mono.c,
        })
    );
    Ok(())
}

// ------------------------------------------------------------- tune-tau

pub fn tune_tau(args: TuneTauArgs) -> Result<()> {
    let features = Features::load(&args.features)?;
    let mut ranker = load_ranker(args.ranker.as_deref())?;
    if let Some(s) = args.sigma_hours {
        set_sigma(&mut ranker.models, s)?;
    }
    let search = TauSearch {
        lo: args.tau_lo,
        hi: args.tau_hi,
        ..Default::default()
    };
    let fingerprint = features
        .fingerprint(Fingerprint::new("tune-tau").file(&args.input)?, &args.features)?
        .settings(&(&ranker.models, &search, args.seed, args.slack))
        .finish();
    let dev = features.represent(read_docs(&args.input, args.slack)?)?;
    let r = polyclust::learning::tune_tau(&dev, &ranker.models, &search)?;
    if let Some(p) = &args.output {
        ranker.tau = Some(r.tau);
        write_file(p, models::to_json(RANKER_KIND, &ranker, Some(&fingerprint)).as_bytes())?;
    }
    println!(
        "{}",
        serde_json::json!({ "fingerprint": fingerprint, "tau": r.tau, "f1": r.f1, "evaluations": r.evaluations.len() })
    );
    Ok(())
}

// ------------------------------------------------------------- evaluate

#[derive(Deserialize)]
struct AssignmentRecord {
    id: String,
    language: Language,
    mono_cluster: u64,
    #[serde(default)]
    cross_cluster: Option<u64>,
}

fn read_assignments(path: &Path) -> Result<Vec<AssignmentRecord>> {
    let mut out = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        if line.trim().is_empty() {
            continue;
        }
        let r: AssignmentRecord = serde_json::from_str(&line).map_err(|e| polyclust::Error::Malformed {
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(r);
    }
    Ok(out)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let fingerprint = Fingerprint::new("evaluate").file(&args.input)?.file(&args.gold)?.finish();
    let records = read_assignments(&args.input)?;
    let gold: HashMap<String, Document> = read_docs(&args.gold, f64::INFINITY)?
        .into_iter()
        .map(|d| (d.id.clone(), d))
        .collect();
    let mut predicted = HashMap::new();
    let mut links: HashMap<ClusterRef, u64> = HashMap::new();
    let with_cross = records.iter().all(|r| r.cross_cluster.is_some());
    for r in &records {
        let c = ClusterRef {
            language: r.language.clone(),
            id: r.mono_cluster,
        };
        if predicted.insert(r.id.clone(), c.clone()).is_some() {
            return Err(polyclust::Error::DuplicateDocument(r.id.clone()).into());
        }
        if let Some(x) = r.cross_cluster {
            if *links.entry(c.clone()).or_insert(x) != x {
                return Err(CliError::Input(format!("cluster {c} has two crosslingual ids")).into());
            }
        }
    }
    let report = evaluate_assignments(&predicted, &gold, with_cross.then_some(&links))?;
    print!("{}", report.to_table());
    if let Some(p) = &args.output {
        let mut s = serde_json::to_vec_pretty(&serde_json::json!({
            "fingerprint": fingerprint,
            "report": report,
        }))?;
        s.push(b'\n');
        write_file(p, &s)?;
    }
    Ok(())
}

// ------------------------------------------------------------- baseline

pub fn baseline(args: BaselineArgs) -> Result<()> {
    let features = Features::load(&args.features)?;
    let stream = features.represent(read_docs(&args.input, args.slack)?)?;
    let mut by_language: BTreeMap<Language, Vec<(Document, DocRepresentation)>> = BTreeMap::new();
    for (d, r) in stream.iter().cloned() {
        by_language.entry(d.language.clone()).or_default().push((d, r));
    }
    let mut assigned: HashMap<String, (Language, usize)> = HashMap::new();
    for (lang, docs) in &by_language {
        let max_clusters = match args.max_clusters {
            Some(n) => n,
            None => {
                let labels: Option<BTreeSet<&str>> =
                    docs.iter().map(|(d, _)| d.gold_mono_label.as_deref()).collect();
                let labels = labels.ok_or_else(|| {
                    CliError::Config("--max-clusters is required when gold labels are missing".into())
                })?;
                2 * labels.len()
            }
        };
        let cfg = CluStreamConfig {
            max_clusters,
            boundary_factor: args.boundary_factor,
            horizon_hours: args.horizon_hours,
            subvector: args.subvector,
        };
        for (id, c) in clustream_baseline(docs, &cfg)? {
            assigned.insert(id, (lang.clone(), c));
        }
    }
    let mut out = Vec::new();
    for (d, _) in &stream {
        let (language, c) = &assigned[&d.id];
        writeln!(
            out,
            "{}",
            serde_json::json!({ "id": d.id, "language": language, "mono_cluster": c })
        )?;
    }
    write_file(&args.output, &out)?;
    Ok(())
}

// ------------------------------------------------------------- convert

pub fn convert(args: ConvertArgs) -> Result<()> {
    let map: FieldMap = match &args.field_map {
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| CliError::Config(format!("field map {}: {e}", p.display())))?,
        None => FieldMap::default(),
    };
    let mut buf = Vec::new();
    let n = polyclust::io::convert::convert(open(&args.input)?, &mut buf, &map)?;
    write_file(&args.output, &buf)?;
    println!("converted {n} documents");
    Ok(())
}

// ------------------------------------------------------------- synth

pub fn synth(args: SynthArgs) -> Result<()> {
    let cfg: StoryStreamConfig = match &args.config {
        Some(p) => serde_json::from_str(&read_text(p)?)
            .map_err(|e| CliError::Config(format!("generator config {}: {e}", p.display())))?,
        None => match args.preset {
            Preset::Separable => StoryStreamConfig::separable_trilingual(args.docs / 9, args.seed),
            Preset::NoisyTitles => StoryStreamConfig {
                languages: vec!["en".into(), "de".into(), "es".into()],
                stories: 6,
                docs: args.docs,
                concurrent: 3,
                order: Order::Random,
                noisy_titles: true,
                shared_vocab: 20,
                shared_per_doc: 6,
                drift: 0.3,
                seed: args.seed,
                ..Default::default()
            },
        },
    };
    let corpus = story_stream(&cfg);
    let mut buf = Vec::new();
    polyclust::io::write_stream(&corpus.docs, &mut buf)?;
    write_file(&args.output, &buf)?;
    write_file(&args.embeddings, corpus.embeddings.to_text().as_bytes())?;
    let mut stdout = BufWriter::new(std::io::stdout());
    writeln!(stdout, "wrote {} documents", corpus.docs.len())?;
    Ok(())
}
