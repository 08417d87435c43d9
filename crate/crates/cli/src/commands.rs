use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use log::{info, warn};
use shortshift::config::{load_word_list, PipelineConfig};
use shortshift::corpus::{build_vocab, ingest_jsonl_files, ingest_text, intersect_vocabs, JsonlFields, TimeBin, TimeBinnedCorpus};
use shortshift::embedding::{init_from, init_random, load_model, save_model, save_text, train_with_stats, EmbeddingModel, TrainParams};
use shortshift::eval::{group_stats, krippendorff_alpha, shift_index, JudgmentTable, SdKind, ShiftIndex};
use shortshift::io::write_atomic;
use shortshift::shift::{
    attach_frequencies, candidate_words, classify, rank_shifts, write_records_tsv, write_scatter_tsv,
};
use shortshift::synth::{generate, score_benchmark, BenchmarkConfig, SynthSpec};
use shortshift::variability::{variability_report, write_report_tsv, VariabilityParams};

use crate::args::{EvaluateArgs, Global, IngestArgs, ScoreArgs, SynthArgs, TrainArgs, VariabilityArgs};
use crate::failure::{at, Failure};

type Outcome = Result<(), Failure>;

pub struct Context {
    pub config: PipelineConfig,
    pub threads: u32,
}

impl Context {
    pub fn new(g: &Global) -> Result<Self, Failure> {
        let config = match &g.config {
            Some(path) => {
                let c = PipelineConfig::load(path).map_err(at("config"))?;
                c.validate().map_err(at("config"))?;
                c
            }
            None => PipelineConfig::default(),
        };
        let threads = match (g.deterministic, g.threads) {
            (true, _) => 1,
            (false, Some(0)) => return Err(Failure::usage("config", "--threads must be at least 1")),
            (false, Some(n)) => n,
            (false, None) => std::thread::available_parallelism().map_or(1, |n| n.get() as u32),
        };
        Ok(Context { config, threads })
    }

    fn train_params(&self) -> TrainParams {
        TrainParams {
            threads: self.threads,
            ..self.config.train.clone()
        }
    }

    fn corpus_dir(&self, flag: Option<PathBuf>, stage: &'static str) -> Result<PathBuf, Failure> {
        flag.or_else(|| self.config.paths.corpus.clone())
            .ok_or_else(|| Failure::usage(stage, "no corpus directory: pass --corpus or set paths.corpus"))
    }
}

fn require_file(path: &Path, stage: &'static str) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure {
            stage,
            code: crate::failure::DATA,
            message: format!("{} does not exist", path.display()),
        })
    }
}

fn load_corpus(dir: &Path, stage: &'static str) -> Result<TimeBinnedCorpus, Failure> {
    TimeBinnedCorpus::load(dir).map_err(at(stage))
}

fn load_index(path: &Path, exclude: Option<&Path>, stage: &'static str) -> Result<(JudgmentTable, ShiftIndex), Failure> {
    let mut table = JudgmentTable::load_csv(path).map_err(at(stage))?;
    if let Some(ex) = exclude {
        let words: HashSet<String> = load_word_list(ex).map_err(at(stage))?.into_iter().collect();
        table = table.without_words(&words);
    }
    let index = shift_index(&table).map_err(at(stage))?;
    Ok((table, index))
}

fn parse_time(s: &str) -> Option<i64> {
    if let Ok(epoch) = s.parse::<i64>() {
        return Some(epoch);
    }
    let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
    Some(date.and_hms_opt(0, 0, 0)?.and_utc().timestamp())
}

fn parse_bin(spec: &str) -> Result<TimeBin, Failure> {
    let bad = || Failure::usage("ingest", format!("bad --bin {spec:?}; expected LABEL:START:END"));
    let mut parts = spec.splitn(3, ':');
    let (Some(label), Some(start), Some(end)) = (parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let (start, end) = (parse_time(start).ok_or_else(bad)?, parse_time(end).ok_or_else(bad)?);
    TimeBin::new(label, start, end).map_err(at("ingest"))
}

pub fn ingest(ctx: &Context, a: IngestArgs) -> Outcome {
    let out = a
        .out
        .or_else(|| ctx.config.paths.corpus.clone())
        .ok_or_else(|| Failure::usage("ingest", "no output directory: pass --out or set paths.corpus"))?;
    if a.jsonl.is_empty() && a.text.is_empty() {
        return Err(Failure::usage("ingest", "nothing to ingest: give --jsonl or --text"));
    }
    if !a.jsonl.is_empty() && a.bins.is_empty() {
        return Err(Failure::usage("ingest", "--jsonl needs at least one --bin"));
    }
    let bins = a.bins.iter().map(|b| parse_bin(b)).collect::<Result<Vec<_>, _>>()?;
    let texts = a
        .text
        .iter()
        .map(|t| {
            t.split_once('=')
                .map(|(l, f)| (l.to_owned(), PathBuf::from(f)))
                .ok_or_else(|| Failure::usage("ingest", format!("bad --text {t:?}; expected LABEL=FILE")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    for path in a.jsonl.iter().chain(texts.iter().map(|(_, p)| p)) {
        require_file(path, "ingest")?;
    }

    let mut corpus = TimeBinnedCorpus::default();
    if !a.jsonl.is_empty() {
        let fields = JsonlFields {
            text: a.text_field,
            time: a.time_field,
        };
        let (part, stats) = ingest_jsonl_files(&a.jsonl, &fields, &bins).map_err(at("ingest"))?;
        eprintln!(
            "{} records: {} kept, {} outside every bin, {} malformed, {} missing a field",
            stats.records, stats.kept, stats.out_of_range, stats.malformed, stats.missing_field
        );
        corpus.merge(part).map_err(at("ingest"))?;
    }
    for (label, path) in &texts {
        corpus.merge(ingest_text(path, label).map_err(at("ingest"))?).map_err(at("ingest"))?;
    }
    corpus.save(&out).map_err(at("ingest"))?;
    for (i, bin) in corpus.bins().iter().enumerate() {
        println!("{}\t{} documents\t{} tokens", bin.label, corpus.documents(i).len(), corpus.token_count(i));
    }
    Ok(())
}

pub fn train(ctx: &Context, a: TrainArgs) -> Outcome {
    let stage = "train";
    let dir = ctx.corpus_dir(a.corpus, stage)?;
    let out = match (a.out, &ctx.config.paths.models) {
        (Some(p), _) => p,
        (None, Some(models)) => models.join(format!("{}.ssem", a.bin)),
        (None, None) => return Err(Failure::usage(stage, "no output: pass --out or set paths.models")),
    };
    let mut params = ctx.train_params();
    params.dim = a.dim.unwrap_or(params.dim);
    params.epochs = a.epochs.unwrap_or(params.epochs);
    params.seed = a.seed.unwrap_or(params.seed);
    params.validate().map_err(at(stage))?;
    if let Some(parent) = &a.init_from {
        require_file(parent, stage)?;
        if a.min_count.is_some() || !a.intersect.is_empty() {
            return Err(Failure::usage(stage, "--min-count and --intersect apply only without --init-from"));
        }
    }

    let corpus = load_corpus(&dir, stage)?;
    let bin = corpus.bin_by_label(&a.bin).map_err(at(stage))?;
    let mut model = match &a.init_from {
        Some(path) => {
            let parent = load_model(path).map_err(at(stage))?;
            if a.dim.is_some_and(|d| d as usize != parent.dim()) {
                return Err(Failure::usage(stage, format!("--dim differs from the parent model's {}", parent.dim())));
            }
            params.dim = parent.dim() as u32;
            init_from(&parent, parent.vocab()).map_err(at(stage))?
        }
        None => {
            let min_count = a.min_count.unwrap_or(ctx.config.min_count);
            let mut vocab = build_vocab(bin, min_count).map_err(at(stage))?;
            if !a.intersect.is_empty() {
                let others = a
                    .intersect
                    .iter()
                    .map(|l| build_vocab(corpus.bin_by_label(l)?, 1))
                    .collect::<shortshift::Result<Vec<_>>>()
                    .map_err(at(stage))?;
                let refs: Vec<_> = others.iter().collect();
                vocab = intersect_vocabs(&vocab, &refs).map_err(at(stage))?;
            }
            init_random(&vocab, &params).map_err(at(stage))?
        }
    };
    model.set_bin_label(&a.bin);
    info!("training {} on bin {} with {} lane(s)", out.display(), a.bin, params.threads);
    let (model, stats) = train_with_stats(model, bin, &params).map_err(at(stage))?;
    save_model(&model, &out).map_err(at(stage))?;
    if let Some(text) = &a.text_out {
        save_text(&model, text).map_err(at(stage))?;
    }
    let losses: Vec<String> = stats.epoch_loss.iter().map(|l| format!("{l:.4}")).collect();
    println!(
        "{}: |V| = {}, dim {}, {} tokens in {:.1}s ({:.0}/s), epoch loss {}",
        out.display(),
        model.vocab().len(),
        model.dim(),
        stats.tokens,
        stats.seconds,
        stats.tokens_per_second(),
        losses.join(" ")
    );
    Ok(())
}

fn load_pair(t1: &Path, t2: &Path, stage: &'static str) -> Result<(EmbeddingModel, EmbeddingModel), Failure> {
    require_file(t1, stage)?;
    require_file(t2, stage)?;
    Ok((load_model(t1).map_err(at(stage))?, load_model(t2).map_err(at(stage))?))
}

pub fn score(ctx: &Context, a: ScoreArgs) -> Outcome {
    let stage = "score";
    let (m1, m2) = load_pair(&a.t1, &a.t2, stage)?;
    let corpus_dir = a.corpus.or_else(|| ctx.config.paths.corpus.clone());
    if (a.candidates || a.variability) && corpus_dir.is_none() {
        return Err(Failure::usage(stage, "--candidates and --variability need --corpus or paths.corpus"));
    }
    let judged = match a.judgments.as_deref().or(ctx.config.paths.judgments.as_deref()) {
        Some(path) => Some(load_index(path, None, stage)?.1),
        None => None,
    };
    let corpus = corpus_dir.map(|d| load_corpus(&d, stage)).transpose()?;
    let bins = match &corpus {
        Some(c) => Some((
            c.bin_by_label(m1.bin_label()).map_err(at(stage))?,
            c.bin_by_label(m2.bin_label()).map_err(at(stage))?,
        )),
        None => None,
    };
    let vocabs = match bins {
        Some((b1, b2)) => Some((build_vocab(b1, 1).map_err(at(stage))?, build_vocab(b2, 1).map_err(at(stage))?)),
        None => None,
    };

    let mut z = HashMap::new();
    let words: Vec<String> = if let Some(path) = &a.words {
        let listed = load_word_list(path).map_err(at(stage))?;
        let (known, unknown): (Vec<String>, Vec<String>) =
            listed.into_iter().partition(|w| m1.vocab().contains(w) && m2.vocab().contains(w));
        if !unknown.is_empty() {
            warn!("{} listed word(s) are not in both models, e.g. {:?}", unknown.len(), unknown[0]);
        }
        known
    } else if a.candidates {
        let list = a
            .content_words
            .or_else(|| ctx.config.paths.content_words.clone())
            .ok_or_else(|| Failure::usage(stage, "--candidates needs --content-words or paths.content_words"))?;
        let content: HashSet<String> = load_word_list(&list).map_err(at(stage))?.into_iter().collect();
        let (v1, v2) = vocabs.as_ref().expect("corpus checked above");
        candidate_words(v1, v2, &content, &ctx.config.candidates)
            .map_err(at(stage))?
            .into_iter()
            .filter(|d| m1.vocab().contains(&d.word))
            .map(|d| {
                z.insert(d.word.clone(), d.z);
                d.word
            })
            .collect()
    } else {
        m1.vocab().words().to_vec()
    };
    if words.is_empty() {
        return Err(Failure {
            stage,
            code: crate::failure::DATA,
            message: "no words to score".into(),
        });
    }

    let mut records = rank_shifts(&m1, &m2, &words).map_err(at(stage))?;
    if let Some((v1, v2)) = &vocabs {
        attach_frequencies(&mut records, v1, v2);
    }
    if a.variability {
        let (_, b2) = bins.expect("corpus checked above");
        let names: Vec<&str> = records.iter().map(|r| r.word.as_str()).collect();
        let entries = variability_report(b2, &names, &m2, &ctx.config.variability);
        for (r, e) in records.iter_mut().zip(entries) {
            r.variability = e.variability.ok();
        }
    }
    let mut scatter = Vec::new();
    for r in &mut records {
        r.z = z.get(&r.word).copied();
        if let Some(index) = judged.as_ref().and_then(|j| j.get(&r.word)) {
            r.region = classify(index, r.cosine, &ctx.config.regions);
            scatter.push((r.word.clone(), index, r.cosine));
        }
    }
    write_atomic(&a.out, |w| write_records_tsv(&records, w)).map_err(at(stage))?;
    if let Some(path) = &a.scatter {
        write_atomic(path, |w| write_scatter_tsv(&scatter, "shift_index", "cosine", w)).map_err(at(stage))?;
    }
    println!("scored {} words; largest shifts:", records.len());
    for r in records.iter().take(10) {
        println!("  {}\t{:.4}", r.word, r.cosine);
    }
    Ok(())
}

pub fn variability(ctx: &Context, a: VariabilityArgs) -> Outcome {
    let stage = "variability";
    require_file(&a.model, stage)?;
    require_file(&a.words, stage)?;
    let params = VariabilityParams {
        window: a.window.unwrap_or(ctx.config.variability.window),
        max_contexts: a.max_contexts.unwrap_or(ctx.config.variability.max_contexts),
        seed: a.seed.unwrap_or(ctx.config.variability.seed),
    };
    if params.window == 0 || params.max_contexts < 2 {
        return Err(Failure::usage(stage, "--window must be positive and --max-contexts at least 2"));
    }
    let dir = ctx.corpus_dir(a.corpus, stage)?;
    let judged = match &a.judgments {
        Some(path) => Some(load_index(path, None, stage)?.1),
        None => None,
    };
    let model = load_model(&a.model).map_err(at(stage))?;
    let corpus = load_corpus(&dir, stage)?;
    let label = a.bin.unwrap_or_else(|| model.bin_label().to_owned());
    let bin = corpus.bin_by_label(&label).map_err(at(stage))?;
    let words = load_word_list(&a.words).map_err(at(stage))?;

    let entries = variability_report(bin, &words, &model, &params);
    write_atomic(&a.out, |w| write_report_tsv(&entries, w)).map_err(at(stage))?;
    let failed: Vec<&str> = entries.iter().filter(|e| e.variability.is_err()).map(|e| e.word.as_str()).collect();
    if let Some(first) = entries.iter().find(|e| e.variability.is_err()) {
        warn!("{} word(s) not scored, e.g. {}: {}", failed.len(), first.word, first.variability.as_ref().unwrap_err());
    }
    if let (Some(index), Some(path)) = (&judged, &a.scatter) {
        let rows: Vec<(String, f64, f64)> = entries
            .iter()
            .filter_map(|e| Some((e.word.clone(), index.get(&e.word)?, *e.variability.as_ref().ok()?)))
            .collect();
        write_atomic(path, |w| write_scatter_tsv(&rows, "shift_index", "variability", w)).map_err(at(stage))?;
    }
    println!(
        "variability of {} words ({} not scored), window {}, cap {}, seed {}",
        entries.len() - failed.len(),
        failed.len(),
        params.window,
        params.max_contexts,
        params.seed
    );
    Ok(())
}

/// Reads `column` of a TSV with a `word` column; `NA` cells are skipped.
fn read_scores(path: &Path, column: &str) -> Result<HashMap<String, f64>, Failure> {
    let stage = "evaluate";
    let text = std::fs::read_to_string(path).map_err(|e| at(stage)(shortshift::Error::Io { path: path.into(), source: e }))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap_or_default().split('\t').collect();
    let find = |name: &str| {
        header.iter().position(|h| *h == name).ok_or_else(|| Failure {
            stage,
            code: crate::failure::DATA,
            message: format!("{} has no {name:?} column (columns: {})", path.display(), header.join(", ")),
        })
    };
    let (wi, si) = (find("word")?, find(column)?);
    let mut scores = HashMap::new();
    for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let fields: Vec<&str> = line.split('\t').collect();
        let bad = || Failure {
            stage,
            code: crate::failure::DATA,
            message: format!("{}:{}: malformed row", path.display(), n + 2),
        };
        let (word, value) = (fields.get(wi).ok_or_else(bad)?, fields.get(si).ok_or_else(bad)?);
        if *value == "NA" {
            continue;
        }
        scores.insert((*word).to_owned(), value.parse().map_err(|_| bad())?);
    }
    Ok(scores)
}

pub fn evaluate(ctx: &Context, a: EvaluateArgs) -> Outcome {
    let stage = "evaluate";
    let judgments = a
        .judgments
        .or_else(|| ctx.config.paths.judgments.clone())
        .ok_or_else(|| Failure::usage(stage, "no judgments: pass --judgments or set paths.judgments"))?;
    require_file(&judgments, stage)?;
    require_file(&a.scores, stage)?;
    let (table, index) = load_index(&judgments, a.exclude.as_deref(), stage)?;
    let scores = read_scores(&a.scores, &a.column)?;
    let report = shortshift::eval::evaluate(&scores, &index, &ctx.config.regions).map_err(at(stage))?;

    let mut out = String::new();
    out.push_str(&format!("{} judgments of {} words by {} annotators\n", table.len(), table.words().len(), table.annotators().len()));
    match krippendorff_alpha(&table) {
        Ok(ag) if ag.degenerate => out.push_str("krippendorff alpha = 1 (every judgment identical)\n"),
        Ok(ag) => out.push_str(&format!("krippendorff alpha = {:.4} over {} words\n", ag.alpha, ag.pairable_units)),
        Err(e) => out.push_str(&format!("krippendorff alpha: n/a ({e})\n")),
    }
    out.push_str(&report.to_text(&a.column));
    if let Some(path) = &a.groups {
        require_file(path, stage)?;
        let text = std::fs::read_to_string(path).map_err(|e| at(stage)(shortshift::Error::Io { path: path.clone(), source: e }))?;
        let groups: HashMap<String, String> = text
            .lines()
            .filter_map(|l| l.split_once('\t'))
            .map(|(w, g)| (w.trim().to_owned(), g.trim().to_owned()))
            .collect();
        let kind = if a.sample_sd { SdKind::Sample } else { SdKind::Population };
        let stats = group_stats(&index, &groups, kind).map_err(at(stage))?;
        out.push_str("shift index by group:\n");
        for (g, s) in &stats {
            out.push_str(&format!("  {g}: {:.2} (± {:.2}), n = {}\n", s.mean, s.sd, s.n));
        }
    }
    print!("{out}");
    std::io::stdout().flush().ok();
    if let Some(path) = &a.out {
        write_atomic(path, |w| report.write_tsv(&a.column, w)).map_err(at(stage))?;
    }
    Ok(())
}

pub fn synth(ctx: &Context, a: SynthArgs) -> Outcome {
    let stage = "synth";
    let mut spec = match &a.spec {
        Some(path) => SynthSpec::load(path).map_err(at(stage))?,
        None => SynthSpec::default(),
    };
    spec.seed = a.seed.unwrap_or(spec.seed);
    let generated = generate(&spec).map_err(at(stage))?;
    generated.save(&a.out).map_err(at(stage))?;
    let toml = spec.to_toml();
    write_atomic(&a.out.join("spec.toml"), |w| w.write_all(toml.as_bytes())).map_err(at(stage))?;
    for (i, bin) in generated.corpus.bins().iter().enumerate() {
        println!("{}\t{} documents\t{} tokens", bin.label, generated.corpus.documents(i).len(), generated.corpus.token_count(i));
    }
    if !a.benchmark {
        return Ok(());
    }
    let mut config = BenchmarkConfig::default();
    config.train.threads = ctx.threads;
    config.train.dim = a.dim.unwrap_or(config.train.dim);
    config.train.epochs = a.epochs.unwrap_or(config.train.epochs);
    let report = score_benchmark(&generated.corpus, &generated.gold, &config).map_err(at(stage))?;
    let text = report.to_text();
    print!("{text}");
    write_atomic(&a.out.join("benchmark.txt"), |w| w.write_all(text.as_bytes())).map_err(at(stage))?;
    write_atomic(&a.out.join("benchmark.tsv"), |w| report.write_tsv(w)).map_err(at(stage))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn times_as_epochs_or_dates() {
        assert_eq!(parse_time("1356998400"), Some(1_356_998_400));
        assert_eq!(parse_time("2013-01-01"), Some(1_356_998_400));
        assert_eq!(parse_time("-5"), Some(-5));
        assert_eq!(parse_time("2013-13-01"), None);
        assert_eq!(parse_time("soon"), None);
    }

    #[test]
    fn bin_specs() {
        let b = parse_bin("t1:2011-01-01:2014-01-01").unwrap();
        assert_eq!((b.label.as_str(), b.start_epoch, b.end_epoch), ("t1", 1_293_840_000, 1_388_534_400));
        assert_eq!(parse_bin("t1:2014-01-01").unwrap_err().code, crate::failure::USAGE);
        assert_eq!(parse_bin("t1:2014-01-01:2011-01-01").unwrap_err().code, crate::failure::USAGE);
        assert_eq!(parse_bin("bad label:1:2").unwrap_err().code, crate::failure::USAGE);
    }
}
