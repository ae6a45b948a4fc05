//! Subcommand implementations.

use std::fs;
use std::path::Path;

use log::{info, warn};
use lyrik::analysis::{
    detect_change_points, frequency_bands, linearity_fit, pairwise_selfsim, total_selfsim, DistributionSummary,
    SelfSimSeries,
};
use lyrik::corpus::{
    assign, dedup_first_line, ingest as read_corpus, load_lemma_map, load_stopwords, normalize, write_jsonl,
    CorpusStats, IngestOptions, LemmaMap, Stopwords,
};
use lyrik::synthgen::{generate, SynthSpec};
use lyrik::trainer::{load_model, save_model, train as fit, JointEmbeddingModel, SlotCorpus};
use lyrik::tropes::{build_trajectories, orient_components, trope_pca, ExtremeEntry, TrajectoryOptions};

use crate::config::Resolved;
use crate::error::CliError;
use crate::svg::{self, BoxStats, Series};

type CmdResult = Result<(), CliError>;

fn ensure_dir(dir: &Path) -> CmdResult {
    fs::create_dir_all(dir).map_err(|e| CliError::output(dir, e))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| CliError::output(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> CmdResult {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::output(path, e))?;
    w.write_record(header).map_err(|e| CliError::output(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))?;
    info!("wrote {}", path.display());
    Ok(())
}

/// `1234567` → `1,234,567`.
fn grouped(n: usize) -> String {
    let digits = n.to_string();
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i).is_multiple_of(3) {
            out.push(',');
        }
        out.push(c);
    }
    out
}

fn summary_fields(s: &DistributionSummary) -> Vec<String> {
    [s.median, s.q1, s.q3, s.whisker_lo, s.whisker_hi, s.mean]
        .iter()
        .map(|v| v.to_string())
        .collect()
}

fn box_of(label: String, s: &DistributionSummary) -> BoxStats {
    BoxStats {
        label,
        lo: s.whisker_lo,
        q1: s.q1,
        median: s.median,
        q3: s.q3,
        hi: s.whisker_hi,
    }
}

fn open_model(cfg: &Resolved) -> Result<JointEmbeddingModel, CliError> {
    if !cfg.model.exists() {
        return Err(CliError::Usage(format!(
            "model file {} not found; run `lyrik train` first or pass --model",
            cfg.model.display()
        )));
    }
    let model = load_model(&cfg.model)?;
    if !model.is_finite() {
        return Err(CliError::Numeric(format!(
            "model {} contains NaN or infinite values",
            cfg.model.display()
        )));
    }
    Ok(model)
}

fn load_stopword_list(cfg: &Resolved) -> Result<Stopwords, CliError> {
    Ok(match &cfg.stopwords {
        Some(p) => load_stopwords(p)?,
        None => Stopwords::new(),
    })
}

pub fn ingest(cfg: &Resolved) -> CmdResult {
    let path = cfg
        .corpus
        .as_ref()
        .ok_or_else(|| CliError::Usage("ingest needs --corpus".into()))?;
    let table = cfg.slot_table()?;
    let report = read_corpus(path, IngestOptions { strict: cfg.strict })?;
    if report.dropped() > 0 {
        warn!(
            "dropped {} records ({} without year, {} with invalid year, {} malformed)",
            report.dropped(),
            report.missing_year,
            report.invalid_year,
            report.malformed
        );
    }
    let lemmas = match &cfg.lemmas {
        Some(p) => load_lemma_map(p)?,
        None => LemmaMap::new(),
    };
    let read = report.stanzas.len();
    let deduped = dedup_first_line(report.stanzas);
    let duplicates = read - deduped.len();
    let normalized = normalize(deduped, &lemmas);
    if normalized.dropped_empty > 0 {
        warn!("dropped {} stanzas without tokens", normalized.dropped_empty);
    }
    let stanzas = normalized.stanzas;
    if stanzas.is_empty() {
        warn!("corpus {} contains no usable stanzas", path.display());
    }
    let stats = CorpusStats::of(&stanzas);
    println!("records read       {}", grouped(read));
    println!("duplicates removed {}", grouped(duplicates));
    println!();
    for (name, n) in [
        ("Tokens", stats.tokens),
        ("Lines", stats.lines),
        ("Stanzas", stats.stanzas),
        ("Poems", stats.poems),
        ("Authors", stats.authors),
    ] {
        println!("{name:<8} {:>12}", grouped(n));
    }

    let assignment = assign(&stanzas, &table);
    println!();
    println!("stanzas per slot ({} outside all slots)", assignment.dropped);
    let mut rows = Vec::new();
    let mut bars = Vec::new();
    for (slot, docs) in table.slots.iter().zip(&assignment.per_slot) {
        println!("{:<11} {:>10}", slot.label, grouped(docs.len()));
        rows.push(vec![
            slot.start.to_string(),
            slot.end.to_string(),
            docs.len().to_string(),
        ]);
        bars.push((slot.start.to_string(), docs.len() as f64));
    }

    ensure_dir(&cfg.out)?;
    let cache = cfg.cache_path();
    write_jsonl(&cache, &stanzas)?;
    info!("wrote {}", cache.display());
    write_csv(
        &cfg.out_file("slot_histogram.csv"),
        &["slot_start", "slot_end", "stanzas"],
        rows,
    )?;
    write_text(
        &cfg.out_file("slot_histogram.svg"),
        &svg::bar_chart("Stanzas per time slot", "slot start year", "stanzas", &bars),
    )
}

pub fn train(cfg: &Resolved) -> CmdResult {
    let cache = cfg.cache_path();
    if !cache.exists() {
        return Err(CliError::Usage(format!(
            "normalized corpus cache {} not found; run `lyrik ingest --corpus <file> --out {}` first",
            cache.display(),
            cfg.out.display()
        )));
    }
    let table = cfg.slot_table()?;
    let stanzas = read_corpus(&cache, IngestOptions { strict: true })?.stanzas;
    let corpus = SlotCorpus::build(&stanzas, table, cfg.min_count)?;
    info!(
        "training on {} tokens, {} words, {} slots",
        corpus.total_tokens(),
        corpus.vocab.len(),
        corpus.slots.len()
    );
    let (model, report) = fit(&corpus, &cfg.train)?;
    if let Some(dir) = cfg.model.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    save_model(&model, &cfg.model)?;
    info!("wrote {}", cfg.model.display());
    ensure_dir(&cfg.out)?;
    let rows = report
        .epoch_losses
        .iter()
        .enumerate()
        .map(|(e, l)| vec![(e + 1).to_string(), l.to_string()])
        .collect();
    write_csv(&cfg.out_file("train_log.csv"), &["epoch", "mean_loss"], rows)?;
    for (e, l) in report.epoch_losses.iter().enumerate() {
        println!("epoch {:>3}  loss {l:.6}", e + 1);
    }
    Ok(())
}

fn pairwise_series(cfg: &Resolved, model: &JointEmbeddingModel) -> Result<SelfSimSeries, CliError> {
    let top_n = if cfg.top_n > model.vocab.len() {
        warn!(
            "top-n {} exceeds vocabulary size {}; using all words",
            cfg.top_n,
            model.vocab.len()
        );
        model.vocab.len()
    } else {
        cfg.top_n
    };
    Ok(pairwise_selfsim(model, top_n, cfg.ranking)?)
}

pub fn selfsim(cfg: &Resolved) -> CmdResult {
    let model = open_model(cfg)?;
    let series = pairwise_series(cfg, &model)?;
    ensure_dir(&cfg.out)?;
    let rows = series
        .pairs
        .iter()
        .map(|p| {
            let mut row = vec![
                p.first_start.to_string(),
                p.second_start.to_string(),
                p.summary.n.to_string(),
            ];
            let s = summary_fields(&p.summary);
            row.extend([&s[0], &s[1], &s[2], &s[3], &s[4], &s[5]].map(String::clone));
            row
        })
        .collect();
    write_csv(
        &cfg.out_file("pairwise.csv"),
        &["slot_start", "slot_end", "n", "median", "q1", "q3", "p5", "p95", "mean"],
        rows,
    )?;
    let boxes: Vec<BoxStats> = series
        .pairs
        .iter()
        .map(|p| box_of(format!("{}/{}", p.first_start, p.second_start), &p.summary))
        .collect();
    for p in &series.pairs {
        println!(
            "{}-{}  n={:<6} median {:.6}",
            p.first_start, p.second_start, p.summary.n, p.summary.median
        );
    }
    write_text(
        &cfg.out_file("pairwise.svg"),
        &svg::box_plot(
            "Pairwise self-similarity",
            "adjacent slot pair (start years)",
            "cosine",
            &boxes,
        ),
    )
}

pub fn totalsim(cfg: &Resolved) -> CmdResult {
    let model = open_model(cfg)?;
    let stopwords = load_stopword_list(cfg)?;
    let total = total_selfsim(&model, cfg.min_per_slot, &stopwords)?;
    println!("{} eligible words", total.words.len());
    let bands = match frequency_bands(&total) {
        Ok(b) => Some(b),
        Err(e) => {
            warn!("frequency bands skipped: {e}");
            None
        }
    };
    let mut rows = Vec::new();
    let mut push = |band: &str, d: i32, s: &DistributionSummary| {
        let mut row = vec![d.to_string(), band.to_string(), s.n.to_string()];
        row.extend(summary_fields(s));
        rows.push(row);
    };
    for (d, s) in total.distances.iter().zip(&total.summaries) {
        push("all", *d, s);
        if let Some(b) = &bands {
            let i = total.distances.iter().position(|x| x == d).unwrap();
            push("low", *d, &b.low[i]);
            push("high", *d, &b.high[i]);
        }
    }
    ensure_dir(&cfg.out)?;
    write_csv(
        &cfg.out_file("total.csv"),
        &["distance_years", "band", "n", "median", "q1", "q3", "p5", "p95", "mean"],
        rows,
    )?;
    match linearity_fit(&total) {
        Ok(fit) => println!(
            "mean cosine vs distance: slope {:.6e} per year, intercept {:.6}, r^2 {:.4}",
            fit.slope, fit.intercept, fit.r_squared
        ),
        Err(e) => warn!("linear fit skipped: {e}"),
    }
    let boxes: Vec<BoxStats> = total
        .distances
        .iter()
        .zip(&total.summaries)
        .map(|(d, s)| box_of(d.to_string(), s))
        .collect();
    write_text(
        &cfg.out_file("total.svg"),
        &svg::box_plot(
            "Total self-similarity",
            "distance between slots (years)",
            "mean cosine",
            &boxes,
        ),
    )
}

pub fn changepoints(cfg: &Resolved) -> CmdResult {
    let model = open_model(cfg)?;
    let series = pairwise_series(cfg, &model)?;
    let points = detect_change_points(&series, cfg.k)?;
    if points.is_empty() {
        println!("no local minimum in the pairwise medians");
    }
    let rows = points
        .iter()
        .enumerate()
        .map(|(r, c)| {
            let pair = &series.pairs[c.pair_index];
            println!(
                "#{} {}-{}  depth {:.6}",
                r + 1,
                pair.first_start,
                pair.second_start,
                c.depth
            );
            vec![
                (r + 1).to_string(),
                pair.first_start.to_string(),
                pair.second_start.to_string(),
                c.year.to_string(),
                c.depth.to_string(),
                pair.summary.median.to_string(),
            ]
        })
        .collect();
    ensure_dir(&cfg.out)?;
    write_csv(
        &cfg.out_file("changepoints.csv"),
        &["rank", "slot_start", "slot_end", "year", "depth", "median"],
        rows,
    )
}

pub fn tropes(cfg: &Resolved) -> CmdResult {
    let target = cfg
        .target
        .as_deref()
        .ok_or_else(|| CliError::Usage("tropes needs --target".into()))?;
    let model = open_model(cfg)?;
    let options = TrajectoryOptions {
        min_global: cfg.min_global,
        ..TrajectoryOptions::default()
    };
    let trajectories = build_trajectories(&model, target, options)?;
    let q = cfg
        .components
        .min(model.num_slots())
        .min(trajectories.len().saturating_sub(1));
    if q < 2 {
        return Err(CliError::Data(lyrik::Error::InsufficientData(format!(
            "{} candidate trajectories for target {target:?}; need at least 3",
            trajectories.len()
        ))));
    }
    let report = orient_components(trope_pca(&trajectories, q, cfg.top_k)?);
    let starts = model.slots.starts();
    println!("{} candidates for {target:?}", trajectories.len());
    for (k, r) in report.pca.explained_variance_ratio.iter().enumerate() {
        println!("component {}: {:.4} of variance", k + 1, r);
    }
    ensure_dir(&cfg.out)?;

    let rows = report
        .trajectories
        .iter()
        .flat_map(|t| {
            starts.iter().enumerate().map(move |(s, start)| {
                vec![
                    t.target.clone(),
                    t.candidate.clone(),
                    start.to_string(),
                    t.values[s].to_string(),
                    t.imputed[s].to_string(),
                ]
            })
        })
        .collect();
    write_csv(
        &cfg.out_file("trajectories.csv"),
        &["target", "candidate", "slot_start", "value", "imputed"],
        rows,
    )?;

    let mut rows = Vec::new();
    for (k, ext) in report.extremes.iter().enumerate() {
        for (end, list) in [("positive", &ext.positive), ("negative", &ext.negative)] {
            for (rank, e) in list.iter().enumerate() {
                rows.push(vec![
                    (k + 1).to_string(),
                    end.to_string(),
                    (rank + 1).to_string(),
                    e.candidate.clone(),
                    e.projection.to_string(),
                ]);
            }
        }
    }
    write_csv(
        &cfg.out_file("report.csv"),
        &["component", "end", "rank", "candidate", "projection"],
        rows,
    )?;

    let ticks: Vec<String> = starts.iter().map(i32::to_string).collect();
    let classes: [(&str, usize, bool); 4] = [
        ("high", 0, true),
        ("rising", 1, true),
        ("low", 0, false),
        ("falling", 1, false),
    ];
    for (class, k, positive) in classes {
        let list: &[ExtremeEntry] = if positive {
            &report.extremes[k].positive
        } else {
            &report.extremes[k].negative
        };
        println!(
            "{class}: {}",
            list.iter().map(|e| e.candidate.as_str()).collect::<Vec<_>>().join(", ")
        );
        let series: Vec<Series> = list
            .iter()
            .filter_map(|e| {
                report
                    .trajectories
                    .iter()
                    .find(|t| t.candidate_index == e.candidate_index)
            })
            .map(|t| Series {
                label: t.candidate.clone(),
                values: t.values.clone(),
            })
            .collect();
        write_text(
            &cfg.out_file(&format!("trope_{class}.svg")),
            &svg::line_plot(
                &format!("{class} trajectories with \u{201c}{target}\u{201d}"),
                "slot start year",
                "cosine",
                &ticks,
                &series,
            ),
        )?;
    }
    Ok(())
}

pub fn synth(cfg: &Resolved, seed: Option<u64>) -> CmdResult {
    let path = cfg
        .spec
        .as_ref()
        .ok_or_else(|| CliError::Usage("synth needs --spec".into()))?;
    let mut spec = SynthSpec::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let stanzas = generate(&spec)?;
    ensure_dir(&cfg.out)?;
    let out = cfg.out_file("synth.jsonl");
    write_jsonl(&out, &stanzas)?;
    info!("wrote {}", out.display());
    println!("{} stanzas over {} slots", grouped(stanzas.len()), spec.slots);
    Ok(())
}
