//! Subcommand implementations. Every output file carries `#` header comments
//! recording the resolved configuration, so runs are auditable and
//! reproducible byte-for-byte.

use std::fs::{self, File};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use politelex::corpus::{self, CorpusFormat, Lang};
use politelex::learner::{
    self, evaluate, grid_search, quartile_split, Label, LabeledSet, LinearModel, Metrics,
};
use politelex::lexicon::{self, builtin_politelex, CompiledMatcher, Lexicon};
use politelex::stats::{correlate_features, standardize_scores};
use politelex::vectorizer::{extract_corpus, FeatureMatrix};

use crate::chart;
use crate::config::RunConfig;

/// Errors carry the exit-code contract: usage -> 1, data -> 2.
pub enum CmdError {
    Usage(String),
    Data(String),
}

impl From<politelex::Error> for CmdError {
    fn from(e: politelex::Error) -> Self {
        CmdError::Data(e.to_string())
    }
}

type CmdResult = Result<(), CmdError>;

fn require_exists(path: &Path, what: &str) -> Result<(), CmdError> {
    if path.exists() {
        Ok(())
    } else {
        Err(CmdError::Usage(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

fn ensure_out_dir(config: &RunConfig) -> Result<(), CmdError> {
    fs::create_dir_all(&config.out)
        .map_err(|e| CmdError::Data(format!("cannot create {}: {e}", config.out.display())))
}

fn create_output(config: &RunConfig, name: &str) -> Result<(File, PathBuf), CmdError> {
    ensure_out_dir(config)?;
    let path = config.out.join(name);
    let file = File::create(&path)
        .map_err(|e| CmdError::Data(format!("cannot write {}: {e}", path.display())))?;
    Ok((file, path))
}

fn load_lexicons(config: &RunConfig) -> Result<Vec<Lexicon>, CmdError> {
    if config.lexicons.is_empty() {
        return Ok(vec![builtin_politelex()]);
    }
    let mut lexicons = Vec::new();
    for path in &config.lexicons {
        require_exists(path, "lexicon")?;
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .unwrap_or("")
            .to_ascii_lowercase();
        let lexicon = match ext.as_str() {
            "json" => lexicon::parse_politelex(path)?,
            "dic" => lexicon::parse_liwc_dic(path)?,
            "tsv" | "txt" => lexicon::parse_emolex(path)?,
            other => {
                return Err(CmdError::Usage(format!(
                    "cannot infer lexicon format of {} (extension {other:?}); \
                     expected .json, .dic, .tsv, or .txt",
                    path.display()
                )))
            }
        };
        lexicons.push(lexicon);
    }
    Ok(lexicons)
}

fn feature_set_name(lexicons: &[Lexicon]) -> String {
    lexicons
        .iter()
        .map(|l| l.name.as_str())
        .collect::<Vec<_>>()
        .join("+")
}

fn load_corpus_auto(path: &Path, lang: Option<Lang>) -> Result<corpus::Corpus, CmdError> {
    require_exists(path, "corpus")?;
    let format = match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => CorpusFormat::Csv,
        _ => CorpusFormat::Jsonl,
    };
    let loaded = corpus::load_corpus(path, format)?;
    match lang {
        None => Ok(loaded),
        Some(lang) => {
            let posts: Vec<_> = loaded
                .posts()
                .iter()
                .filter(|p| p.lang == lang)
                .cloned()
                .collect();
            if posts.is_empty() {
                return Err(CmdError::Data(format!(
                    "no {lang:?} posts in {}",
                    path.display()
                )));
            }
            Ok(corpus::Corpus::new(posts)?)
        }
    }
}

fn load_features(path: &Path) -> Result<FeatureMatrix, CmdError> {
    require_exists(path, "feature matrix")?;
    let file =
        File::open(path).map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))?;
    Ok(FeatureMatrix::read_tsv(BufReader::new(file))?)
}

fn load_model(path: &Path) -> Result<LinearModel, CmdError> {
    require_exists(path, "model")?;
    let file =
        File::open(path).map_err(|e| CmdError::Data(format!("{}: {e}", path.display())))?;
    Ok(LinearModel::read_json(BufReader::new(file))?)
}

pub fn cmd_extract(config: &RunConfig, input: &Path) -> CmdResult {
    let lexicons = load_lexicons(config)?;
    let corpus = load_corpus_auto(input, config.lang)?;
    let matchers: Vec<CompiledMatcher> = lexicons.iter().map(CompiledMatcher::compile).collect();
    let refs: Vec<&CompiledMatcher> = matchers.iter().collect();
    let features = extract_corpus(&corpus, &refs)?;

    let mut comments = config.header_comments("extract");
    comments.push(format!("input: {}", input.display()));
    comments.push(format!("feature_set: {}", feature_set_name(&lexicons)));
    let (file, path) = create_output(config, "features.tsv")?;
    features.write_tsv(file, &comments)?;
    println!(
        "extract: {} posts x {} categories -> {}",
        features.n_rows(),
        features.n_cols(),
        path.display()
    );
    Ok(())
}

pub fn cmd_reliability(config: &RunConfig, annotations: &Path) -> CmdResult {
    require_exists(annotations, "annotations")?;
    let table = corpus::load_annotations(annotations)?;
    let alpha = politelex::stats::krippendorff_alpha_interval(&table)?;
    println!("krippendorff_alpha_interval\t{alpha:.6}");
    let icc = if table.is_complete() {
        let value = politelex::stats::icc2k_table(&table)?;
        println!("icc2k\t{value:.6}");
        Some(value)
    } else {
        println!("icc2k\tskipped (table has missing cells)");
        None
    };

    let (mut file, path) = create_output(config, "reliability.tsv")?;
    let mut write = |line: String| -> CmdResult {
        writeln!(file, "{line}").map_err(|e| CmdError::Data(e.to_string()))
    };
    for comment in config.header_comments("reliability") {
        write(format!("# {comment}"))?;
    }
    write(format!("# annotations: {}", annotations.display()))?;
    write(format!(
        "# posts: {}\tannotators: {}",
        table.n_posts(),
        table.n_annotators()
    ))?;
    write("metric\tvalue".into())?;
    write(format!("krippendorff_alpha_interval\t{alpha:.6}"))?;
    if let Some(icc) = icc {
        write(format!("icc2k\t{icc:.6}"))?;
    }
    println!("reliability: wrote {}", path.display());
    Ok(())
}

pub fn cmd_correlate(config: &RunConfig, features: &Path, annotations: &Path) -> CmdResult {
    let matrix = load_features(features)?;
    require_exists(annotations, "annotations")?;
    let table = corpus::load_annotations(annotations)?;
    let scores = standardize_scores(&table)?;
    let report = correlate_features(&matrix, &scores, config.alpha)?;

    let mut comments = config.header_comments("correlate");
    comments.push(format!("features: {}", features.display()));
    comments.push(format!("annotations: {}", annotations.display()));
    let (file, tsv_path) = create_output(config, "correlations.tsv")?;
    report.write_tsv(file, &comments)?;

    let svg = chart::correlation_bar_chart(&report);
    let (mut svg_file, svg_path) = create_output(config, "correlations.svg")?;
    svg_file
        .write_all(svg.as_bytes())
        .map_err(|e| CmdError::Data(e.to_string()))?;

    let significant = report.entries.iter().filter(|e| e.significant).count();
    println!(
        "correlate: {} tested, {} significant at {} / {}, {} untestable",
        report.m,
        significant,
        report.alpha,
        report.m,
        report.untestable.len()
    );
    println!("correlate: wrote {} and {}", tsv_path.display(), svg_path.display());
    Ok(())
}

fn labeled_from_files(
    features: &Path,
    annotations: &Path,
) -> Result<(FeatureMatrix, LabeledSet), CmdError> {
    let matrix = load_features(features)?;
    require_exists(annotations, "annotations")?;
    let table = corpus::load_annotations(annotations)?;
    let scores = standardize_scores(&table)?;
    let split = quartile_split(&scores)?;
    let labeled = LabeledSet::from_split(&matrix, &split)?;
    Ok((matrix, labeled))
}

fn matrix_from_rows(set: &LabeledSet, rows: &[usize]) -> Result<FeatureMatrix, CmdError> {
    let mut ids = Vec::new();
    let mut values = Vec::new();
    for &i in rows {
        ids.push(set.post_ids[i].clone());
        values.extend_from_slice(&set.rows[i]);
    }
    Ok(FeatureMatrix::new(ids, set.feature_names.clone(), values)?)
}

/// Stratified cross-validated metrics at a fixed C, mirroring the fold
/// assignment used inside grid search.
fn cv_metrics(data: &LabeledSet, c: f64, config: &RunConfig) -> Result<Metrics, CmdError> {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
    let mut pos: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == Label::Polite)
        .collect();
    let mut neg: Vec<usize> = (0..data.len())
        .filter(|&i| data.labels[i] == Label::Rude)
        .collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold_of = vec![0usize; data.len()];
    for (rank, &i) in pos.iter().chain(neg.iter()).enumerate() {
        fold_of[i] = rank % config.folds;
    }

    let mut sums = [0.0f64; 5];
    for fold in 0..config.folds {
        let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != fold).collect();
        let test_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == fold).collect();
        let train = matrix_from_rows(data, &train_idx)?;
        let train_set = LabeledSet::from_split(
            &train,
            &politelex::learner::QuartileSplit {
                polite: train_idx
                    .iter()
                    .filter(|&&i| data.labels[i] == Label::Polite)
                    .map(|&i| data.post_ids[i].clone())
                    .collect(),
                rude: train_idx
                    .iter()
                    .filter(|&&i| data.labels[i] == Label::Rude)
                    .map(|&i| data.post_ids[i].clone())
                    .collect(),
                boundary_ties: false,
            },
        )?;
        let model = learner::train_linear_svm(&train_set, c, config.tol, config.seed)?;
        let test = matrix_from_rows(data, &test_idx)?;
        let preds = learner::predict(&model, &test)?;
        let truth: Vec<Label> = test_idx.iter().map(|&i| data.labels[i]).collect();
        let m = evaluate(&truth, &preds.labels, &preds.margins)?;
        sums[0] += m.f1_weighted;
        sums[1] += m.precision_weighted;
        sums[2] += m.recall_weighted;
        sums[3] += m.roc_auc;
        sums[4] += m.accuracy;
    }
    let k = config.folds as f64;
    Ok(Metrics {
        f1_weighted: sums[0] / k,
        precision_weighted: sums[1] / k,
        recall_weighted: sums[2] / k,
        roc_auc: sums[3] / k,
        accuracy: sums[4] / k,
    })
}

fn write_metrics_tsv(
    config: &RunConfig,
    name: &str,
    comments: &[String],
    feature_set: &str,
    metrics: &Metrics,
) -> Result<PathBuf, CmdError> {
    let (mut file, path) = create_output(config, name)?;
    let mut write = |line: String| -> CmdResult {
        writeln!(file, "{line}").map_err(|e| CmdError::Data(e.to_string()))
    };
    for comment in comments {
        write(format!("# {comment}"))?;
    }
    write("feature_set\tf1\tprecision\trecall\trocauc\taccuracy".into())?;
    write(format!(
        "{feature_set}\t{:.4}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
        metrics.f1_weighted,
        metrics.precision_weighted,
        metrics.recall_weighted,
        metrics.roc_auc,
        metrics.accuracy
    ))?;
    Ok(path)
}

pub fn cmd_train(config: &RunConfig, features: &Path, annotations: &Path) -> CmdResult {
    let (_, labeled) = labeled_from_files(features, annotations)?;
    let grid = grid_search(&labeled, &config.c_grid, config.folds, config.tol, config.seed)?;
    let model = learner::train_linear_svm(&labeled, grid.best_c, config.tol, config.seed)?;
    let metrics = cv_metrics(&labeled, grid.best_c, config)?;

    let (file, model_path) = create_output(config, "model.json")?;
    model.write_json(file)?;

    let feature_set = features
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("features")
        .to_string();
    let mut comments = config.header_comments("train");
    comments.push(format!("features: {}", features.display()));
    comments.push(format!("annotations: {}", annotations.display()));
    comments.push(format!("best_c: {}", grid.best_c));
    comments.push(format!("folds: {}", config.folds));
    for (c, f1) in &grid.scores {
        comments.push(format!("grid: C={c} mean_f1={f1:.4}"));
    }
    comments.push("metrics: stratified cross-validation means at best C".into());
    let metrics_path = write_metrics_tsv(config, "metrics.tsv", &comments, &feature_set, &metrics)?;

    println!(
        "train: {} labeled posts, best C = {} (cv weighted F1 = {:.4})",
        labeled.len(),
        grid.best_c,
        metrics.f1_weighted
    );
    println!(
        "train: wrote {} and {}",
        model_path.display(),
        metrics_path.display()
    );
    Ok(())
}

pub fn cmd_predict(config: &RunConfig, model_path: &Path, features: &Path) -> CmdResult {
    let model = load_model(model_path)?;
    let matrix = load_features(features)?;
    let preds = learner::predict(&model, &matrix)?;

    let (mut file, out_path) = create_output(config, "predictions.tsv")?;
    let mut write = |line: String| -> CmdResult {
        writeln!(file, "{line}").map_err(|e| CmdError::Data(e.to_string()))
    };
    for comment in config.header_comments("predict") {
        write(format!("# {comment}"))?;
    }
    write(format!("# model: {}", model_path.display()))?;
    write(format!("# features: {}", features.display()))?;
    write("post_id\tlabel\tmargin".into())?;
    for ((id, label), margin) in preds
        .post_ids
        .iter()
        .zip(&preds.labels)
        .zip(&preds.margins)
    {
        write(format!("{id}\t{label}\t{margin:.6}"))?;
    }
    println!(
        "predict: {} posts -> {}",
        preds.post_ids.len(),
        out_path.display()
    );
    Ok(())
}

pub fn cmd_evaluate(
    config: &RunConfig,
    model_path: &Path,
    features: &Path,
    annotations: &Path,
) -> CmdResult {
    let model = load_model(model_path)?;
    let (matrix, labeled) = labeled_from_files(features, annotations)?;
    let _ = matrix;

    let rows: Vec<usize> = (0..labeled.len()).collect();
    let eval_matrix = matrix_from_rows(&labeled, &rows)?;
    let preds = learner::predict(&model, &eval_matrix)?;
    let metrics = evaluate(&labeled.labels, &preds.labels, &preds.margins)?;

    let feature_set = features
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("features")
        .to_string();
    let mut comments = config.header_comments("evaluate");
    comments.push(format!("model: {}", model_path.display()));
    comments.push(format!("features: {}", features.display()));
    comments.push(format!("annotations: {}", annotations.display()));
    comments.push(format!("posts: {}", labeled.len()));
    let path = write_metrics_tsv(config, "metrics.tsv", &comments, &feature_set, &metrics)?;

    println!(
        "evaluate: weighted F1 = {:.4} accuracy = {:.4} over {} posts",
        metrics.f1_weighted,
        metrics.accuracy,
        labeled.len()
    );
    println!("evaluate: wrote {}", path.display());
    Ok(())
}
