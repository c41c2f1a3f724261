//! `factorlens` command-line pipeline.

use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use factorlens_core::classify::{fit_logistic, Averaging, EvalReport, TrainingSet, Variant};
use factorlens_core::efa::{EfaConfig, Retention, ScoreMethod};
use factorlens_core::ingest::{read_profiles, read_survey, FeatureTable, LabelSet};
use factorlens_core::pipeline::{self, AnalysisConfig};
use factorlens_core::suitability::Thresholds;
use factorlens_core::{report, synth, Error};
use serde_json::json;

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "factorlens", version, about = "Trust-factor analysis pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand)]
enum Command {
    /// Build features.csv and labels.csv from profiles and survey answers
    Ingest,
    /// KMO and Bartlett suitability tests; exits 1 if either fails
    Check,
    /// Factor extraction, retention, varimax rotation and factor scores
    Efa,
    /// Cross-validated logistic models on raw features and factor scores
    Train,
    /// Comparison table of the trained variants
    Report,
    /// Write a synthetic three-factor dataset (profiles.jsonl, survey.csv)
    Synth {
        #[arg(long, default_value_t = 100)]
        n: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct Options {
    #[arg(long, global = true)]
    profiles: Option<PathBuf>,
    #[arg(long, global = true)]
    survey: Option<PathBuf>,
    /// Directory for all artifacts; downstream commands read from it too
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[arg(long, global = true, default_value_t = 10)]
    window: usize,
    /// kaiser | cumvar[:<pct>] | fixed:<k>
    #[arg(long, global = true, default_value = "kaiser")]
    retention: String,
    #[arg(long, global = true, default_value_t = 0.36)]
    cutoff: f64,
    #[arg(long, global = true)]
    no_kaiser_normalize: bool,
    /// regression | sum-of-assigned
    #[arg(long, global = true, default_value = "regression")]
    scores: String,
    /// Apply ln(1+x) to the features before analysis
    #[arg(long, global = true)]
    log1p: bool,
    #[arg(long, global = true, default_value_t = 1e-4)]
    l2: f64,
    #[arg(long, global = true, default_value_t = 10)]
    folds: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// 1..6 or all
    #[arg(long, global = true, default_value = "all")]
    question: String,
    /// Map tied or missing votes to label 0 instead of failing
    #[arg(long, global = true)]
    lenient: bool,
    /// Report positive-class metrics instead of support-weighted averages
    #[arg(long, global = true)]
    positive_only: bool,
    #[arg(long, global = true, default_value_t = 0.6)]
    kmo_threshold: f64,
    #[arg(long, global = true, default_value_t = 0.05)]
    alpha: f64,
}

enum Failure {
    Core(Error),
    CheckFailed,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

impl Options {
    fn config(&self) -> Result<AnalysisConfig, Error> {
        let cfg = AnalysisConfig {
            window: self.window,
            log1p: self.log1p,
            efa: EfaConfig {
                retention: self.retention.parse::<Retention>()?,
                cutoff: self.cutoff,
                kaiser_normalize: !self.no_kaiser_normalize,
                score_method: self.scores.parse::<ScoreMethod>()?,
            },
            thresholds: Thresholds {
                kmo_min: self.kmo_threshold,
                bartlett_alpha: self.alpha,
            },
            l2: self.l2,
            folds: self.folds,
            seed: self.seed,
            averaging: if self.positive_only {
                Averaging::PositiveOnly
            } else {
                Averaging::Weighted
            },
            lenient: self.lenient,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn questions(&self) -> Result<Vec<usize>, Error> {
        if self.question == "all" {
            return Ok((1..=6).collect());
        }
        match self.question.parse::<usize>() {
            Ok(q) if (1..=6).contains(&q) => Ok(vec![q]),
            _ => Err(Error::Validation(format!(
                "--question must be 1..6 or all, got '{}'",
                self.question
            ))),
        }
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }
}

fn required<'a>(path: &'a Option<PathBuf>, flag: &str) -> Result<&'a Path, Error> {
    path.as_deref()
        .ok_or_else(|| Error::Validation(format!("missing required flag {flag}")))
}

fn open(path: &Path) -> Result<fs::File, Error> {
    fs::File::open(path)
        .map_err(|e| Error::Validation(format!("{}: cannot open: {e}", path.display())))
}

fn read_text(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path)
        .map_err(|e| Error::Validation(format!("{}: cannot read: {e}", path.display())))
}

fn warn_all(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

/// Writes every artifact only after all of them were produced.
fn write_all(dir: &Path, files: &[(String, String)]) -> Result<(), Error> {
    for (name, _) in files {
        if let Some(parent) = dir.join(name).parent() {
            fs::create_dir_all(parent)?;
        }
    }
    for (name, body) in files {
        fs::write(dir.join(name), body)?;
    }
    Ok(())
}

fn load_features(opts: &Options) -> Result<FeatureTable, Error> {
    let path = opts.artifact("features.csv");
    FeatureTable::read_csv(open(&path)?, &path.display().to_string())
}

fn ingest(opts: &Options) -> Outcome {
    let cfg = opts.config()?;
    let profiles_path = required(&opts.profiles, "--profiles")?;
    let survey_path = required(&opts.survey, "--survey")?;
    let profiles = read_profiles(
        BufReader::new(open(profiles_path)?),
        &profiles_path.display().to_string(),
    )?;
    let survey = read_survey(open(survey_path)?, &survey_path.display().to_string())?;
    let out = pipeline::ingest(&profiles.value, &survey, &cfg)?;
    warn_all(&profiles.warnings);
    warn_all(&out.warnings);
    let (features, labels) = out.value;

    let mut f = Vec::new();
    features.write_csv(&mut f)?;
    let mut l = Vec::new();
    labels.write_csv(&mut l)?;
    write_all(
        &opts.out,
        &[
            (
                "features.csv".into(),
                String::from_utf8_lossy(&f).into_owned(),
            ),
            (
                "labels.csv".into(),
                String::from_utf8_lossy(&l).into_owned(),
            ),
        ],
    )?;
    println!(
        "ingested {} profiles, {} labelled users -> {}",
        features.len(),
        labels.len(),
        opts.out.display()
    );
    Ok(())
}

fn check(opts: &Options) -> Outcome {
    let cfg = opts.config()?;
    let features = load_features(opts)?;
    let data = pipeline::analysis_matrix(&features, cfg.log1p)?;
    let r = factorlens_core::matrix::correlation_matrix(&data)?;
    let rep = factorlens_core::suitability::assess(&r, data.n_rows(), cfg.thresholds)?;
    write_all(
        &opts.out,
        &[("suitability.json".into(), report::to_json_string(&rep)?)],
    )?;
    println!("{rep}");
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::CheckFailed)
    }
}

fn efa(opts: &Options) -> Outcome {
    let cfg = opts.config()?;
    let features = load_features(opts)?;
    let analysis = pipeline::analyse(&features, &cfg)?;
    let model = &analysis.model;
    let doc = report::efa_report(model, Some(&analysis.suitability));
    write_all(
        &opts.out,
        &[
            ("efa.json".into(), report::to_json_string(&doc)?),
            ("scree.csv".into(), report::scree_csv(&model.scree)),
            ("scree.svg".into(), report::scree_svg(&model.scree)),
            (
                "scores.csv".into(),
                report::scores_csv(&features.user_ids(), &analysis.scores),
            ),
        ],
    )?;
    println!(
        "retained k={} (kaiser {}, cumvar60 {}, scree elbow {})",
        model.k,
        model.retention_counts.kaiser,
        model.retention_counts.cumvar_60,
        model
            .retention_counts
            .scree_elbow
            .map_or("-".to_string(), |e| e.to_string())
    );
    for (j, group) in model.assignment.groups(model.k).iter().enumerate() {
        println!(
            "factor {} (ssl {:.3}): {}",
            j + 1,
            model.rotation_ssl[j],
            group.join(", ")
        );
    }
    Ok(())
}

fn train(opts: &Options) -> Outcome {
    let cfg = opts.config()?;
    let questions = opts.questions()?;
    let features = load_features(opts)?;
    let labels_path = opts.artifact("labels.csv");
    let labels = LabelSet::read_csv(open(&labels_path)?, &labels_path.display().to_string())?;
    let scores_path = opts.artifact("scores.csv");
    let (score_users, scores) = report::read_scores_csv(
        &read_text(&scores_path)?,
        &scores_path.display().to_string(),
    )?;
    if score_users != features.user_ids() {
        return Err(Error::Validation(format!(
            "{}: users do not match features.csv; rerun efa",
            scores_path.display()
        ))
        .into());
    }

    let paired = pipeline::evaluate(&features, &scores, &labels, &questions, &cfg)?;
    let design8 =
        pipeline::eight_feature_design(&pipeline::analysis_matrix(&features, cfg.log1p)?)?;
    let users = features.user_ids();

    let mut files = Vec::new();
    let mut evals: Vec<EvalReport> = Vec::new();
    let mut nonconverged = 0;
    for pr in &paired {
        let y = labels.column(pr.question, &users)?;
        for (variant, x) in [(Variant::Eight, &design8), (Variant::Three, &scores.values)] {
            let ts = TrainingSet::new(x.clone(), y.clone(), pr.question, variant)?;
            let model = fit_logistic(&ts, cfg.l2)?;
            if !model.converged {
                nonconverged += 1;
                eprintln!(
                    "warning: question {} {variant}: full-data fit did not converge in {} iterations",
                    pr.question, model.iterations
                );
            }
            let doc = json!({
                "question": pr.question,
                "variant": variant,
                "weights": model.weights,
                "converged": model.converged,
                "iterations": model.iterations,
                "l2": model.l2,
            });
            files.push((
                format!("models/q{}_{variant}.json", pr.question),
                report::to_json_string(&doc)?,
            ));
        }
        for ev in [&pr.eight, &pr.three] {
            if ev.nonconverged_folds > 0 {
                nonconverged += 1;
                eprintln!(
                    "warning: question {} {}: {} fold fit(s) did not converge",
                    ev.question, ev.variant, ev.nonconverged_folds
                );
            }
            evals.push(ev.clone());
        }
    }
    if nonconverged > 0 {
        return Err(Error::Numerical(format!(
            "{nonconverged} logistic fit(s) did not converge; try a larger --l2"
        ))
        .into());
    }
    match opts.format {
        Format::Json => {
            for ev in &evals {
                files.push((
                    format!("evals/q{}_{}.json", ev.question, ev.variant),
                    report::to_json_string(ev)?,
                ));
            }
        }
        Format::Csv => files.push(("evals/eval.csv".into(), report::eval_csv(&evals))),
    }
    write_all(&opts.out, &files)?;
    for ev in &evals {
        println!(
            "q{} {:<5}  P={:.3} R={:.3} F={:.3}",
            ev.question, ev.variant, ev.precision, ev.recall, ev.f_measure
        );
    }
    Ok(())
}

fn load_evals(dir: &Path) -> Result<Vec<EvalReport>, Error> {
    let evals_dir = dir.join("evals");
    let entries = fs::read_dir(&evals_dir).map_err(|e| {
        Error::Validation(format!(
            "{}: cannot read: {e}; run train first",
            evals_dir.display()
        ))
    })?;
    let mut paths: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for p in paths {
        let text = read_text(&p)?;
        let ev: EvalReport = serde_json::from_str(&text).map_err(|e| Error::Input {
            source_name: p.display().to_string(),
            line: e.line() as u64,
            message: e.to_string(),
        })?;
        out.push(ev);
    }
    if out.is_empty() {
        let csv_path = evals_dir.join("eval.csv");
        if csv_path.exists() {
            return read_eval_csv(&csv_path);
        }
        return Err(Error::Validation(format!(
            "{}: no evaluation reports; run train first",
            evals_dir.display()
        )));
    }
    Ok(out)
}

fn read_eval_csv(path: &Path) -> Result<Vec<EvalReport>, Error> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        let bad = || Error::Input {
            source_name: path.display().to_string(),
            line: i as u64 + 1,
            message: "malformed evaluation row".into(),
        };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 11 {
            return Err(bad());
        }
        let num = |k: usize| cols[k].parse::<f64>().map_err(|_| bad());
        let int = |k: usize| cols[k].parse::<usize>().map_err(|_| bad());
        let question = int(0)?;
        let variant: Variant = cols[1].parse()?;
        let confusion = factorlens_core::classify::Confusion {
            tp: int(7)?,
            fp: int(8)?,
            fn_: int(9)?,
            tn: int(10)?,
        };
        out.push(EvalReport {
            question,
            variant,
            precision: num(2)?,
            recall: num(3)?,
            f_measure: num(4)?,
            folds: int(5)?,
            seed: cols[6].parse().map_err(|_| bad())?,
            confusion,
            averaging: Averaging::Weighted,
            positive: confusion.positive(),
            negative: confusion.negative(),
            l2: f64::NAN,
            n: confusion.total(),
            nonconverged_folds: 0,
            protocol: String::new(),
            reference_metrics: factorlens_core::classify::reference_metrics(question, variant),
        });
    }
    Ok(out)
}

fn report_cmd(opts: &Options) -> Outcome {
    let evals = load_evals(&opts.out)?;
    let table = report::comparison_csv(&evals);
    write_all(&opts.out, &[("comparison.csv".into(), table.clone())])?;
    print!("{table}");
    Ok(())
}

fn synth_cmd(opts: &Options, n: usize) -> Outcome {
    let d = synth::generate(n, opts.seed);
    let mut profiles = String::new();
    for p in &d.profiles {
        profiles.push_str(&serde_json::to_string(p).map_err(|e| Error::Numerical(e.to_string()))?);
        profiles.push('\n');
    }
    let mut survey = Vec::new();
    factorlens_core::ingest::write_survey(&mut survey, &d.survey)?;
    write_all(
        &opts.out,
        &[
            ("profiles.jsonl".into(), profiles),
            (
                "survey.csv".into(),
                String::from_utf8_lossy(&survey).into_owned(),
            ),
        ],
    )?;
    println!(
        "wrote {n} synthetic profiles (seed {}) -> {}",
        opts.seed,
        opts.out.display()
    );
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let opts = &cli.opts;
    let result = match cli.command {
        Command::Ingest => ingest(opts),
        Command::Check => check(opts),
        Command::Efa => efa(opts),
        Command::Train => train(opts),
        Command::Report => report_cmd(opts),
        Command::Synth { n } => synth_cmd(opts, n),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::CheckFailed) => {
            eprintln!("suitability check failed");
            ExitCode::from(EXIT_CHECK_FAILED)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(EXIT_NUMERICAL)
            } else {
                ExitCode::from(EXIT_VALIDATION)
            }
        }
    }
}
