use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use qfilter::answer::load_corpus;
use qfilter::filter::{continue_training, load_model, make_targets, save_model, train_with_report, TrainReport};
use qfilter::metrics::{self, filtered_fraction, uniform_grid};
use qfilter::{
    calibrate_filter, compare, joint_sweep, load_dataset, pipeline_cost, run_pipeline, split_dataset,
    write_dataset, CalibrationResult, CostBreakdown, CostScenario, Dataset, Decision, FeatureConfig, FilterModel,
    FilterReport, Head, SplitFractions, SynthConfig, SyntheticTeacherParams, TargetStrategy, Teacher, TrainConfig,
};

use crate::{
    CalibrateArgs, CostArgs, EvaluateArgs, GenerateArgs, HeadArg, ScoreArgs, SplitArgs, Strategy, SweepArgs,
    SweepMode, TeacherKind, TrainArgs,
};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(qfilter::Error),
    InFile(PathBuf, qfilter::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) | CliError::InFile(_, e) if e.is_io() => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
            // Io errors already carry the path.
            CliError::InFile(_, e) if e.is_io() => write!(f, "{e}"),
            CliError::InFile(p, e) => write!(f, "{}: {e}", p.display()),
        }
    }
}

impl From<qfilter::Error> for CliError {
    fn from(e: qfilter::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn in_file<T>(path: &Path, r: qfilter::Result<T>) -> Result<T> {
    r.map_err(|e| CliError::InFile(path.to_owned(), e))
}

fn read_dataset(path: &Path) -> Result<Dataset> {
    in_file(path, load_dataset(path))
}

fn read_model(path: &Path) -> Result<FilterModel> {
    in_file(path, load_model(path))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| {
        CliError::Core(qfilter::Error::Io {
            path: path.to_owned(),
            source,
        })
    })
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| {
        CliError::Core(qfilter::Error::Io {
            path: path.to_owned(),
            source,
        })
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    write_text(path, &text)
}

fn read_teacher_params(path: &Path) -> Result<SyntheticTeacherParams> {
    let text = read_text(path)?;
    in_file(path, SyntheticTeacherParams::from_json(&text))
}

fn replay(ds: &Dataset, path: &Path, tau1: f64) -> Result<Vec<Decision>> {
    in_file(path, run_pipeline(ds, &Teacher::Replay, tau1))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |x| format!("{x:.4}"))
}

pub fn generate(a: GenerateArgs) -> Result<()> {
    let mut cfg = SynthConfig {
        noise_std: a.noise,
        ..SynthConfig::default()
    };
    if let Some(v) = a.vocab {
        cfg.vocab_size = v;
    }
    let mut teacher = match &a.teacher_params {
        Some(p) => read_teacher_params(p)?,
        None => SyntheticTeacherParams::sample(&cfg, a.seed)?,
    };
    if let Some(m) = a.shift {
        if !(m >= 0.0) {
            return Err(CliError::Usage(format!("--shift must be >= 0, got {m}")));
        }
        teacher = teacher.shifted(m, 0.0, a.seed);
    }
    let ds = qfilter::synthetic::generate_from_teacher(a.n, &cfg, &teacher, a.seed, "syn-")?;
    write_dataset(&a.out, &ds)?;
    write_text(&a.params, &teacher.to_json())?;
    println!("wrote {} questions to {}", ds.len(), a.out.display());
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn split(a: SplitArgs) -> Result<()> {
    if a.fractions.len() != 3 {
        return Err(CliError::Usage(format!(
            "--fractions takes three comma-separated values, got {}",
            a.fractions.len()
        )));
    }
    let ds = read_dataset(&a.input)?;
    let fr = SplitFractions::new(a.fractions[0], a.fractions[1], a.fractions[2]);
    let (train, dev, test) = split_dataset(&ds, fr, a.seed)?;
    for (part, name) in [(&train, "train"), (&dev, "dev"), (&test, "test")] {
        let path = with_suffix(&a.out, &format!(".{name}.jsonl"));
        write_dataset(&path, part)?;
        println!("{name}: {} questions -> {}", part.len(), path.display());
    }
    Ok(())
}

pub fn score(a: ScoreArgs) -> Result<()> {
    let teacher = match a.teacher {
        TeacherKind::Replay => {
            return Err(CliError::Usage(
                "the replay teacher reads scores that are already present; nothing to score".into(),
            ))
        }
        TeacherKind::Lexical => {
            let path = a
                .corpus
                .as_ref()
                .ok_or_else(|| CliError::Usage("--teacher lexical needs --corpus".into()))?;
            if a.k == 0 {
                return Err(CliError::Usage("--k must be >= 1".into()));
            }
            Teacher::Lexical {
                corpus: in_file(path, load_corpus(path))?,
                k: a.k,
            }
        }
        TeacherKind::Synthetic => {
            let path = a
                .params
                .as_ref()
                .ok_or_else(|| CliError::Usage("--teacher synthetic needs --params".into()))?;
            Teacher::Synthetic(read_teacher_params(path)?)
        }
    };
    let ds = read_dataset(&a.input)?;
    let decisions = in_file(&a.input, run_pipeline(&ds, &teacher, 0.0))?;
    let records = ds
        .into_records()
        .into_iter()
        .zip(&decisions)
        .map(|(mut q, d)| {
            q.teacher_score = Some(d.sigma);
            if q.correct.is_none() {
                q.correct = d.correct;
            }
            q
        })
        .collect();
    let scored = Dataset::new(records, qfilter::SplitTag::Unsplit)?;
    write_dataset(&a.out, &scored)?;
    println!("scored {} questions with the {} teacher", scored.len(), teacher.name());
    Ok(())
}

fn strategy(a: &TrainArgs) -> Result<TargetStrategy> {
    Ok(match a.strategy {
        Strategy::DistillRegression => TargetStrategy::DistillRegression,
        Strategy::DistillClassification => TargetStrategy::DistillClassification {
            tau1: a
                .tau1
                .ok_or_else(|| CliError::Usage("--strategy distill-classification needs --tau1".into()))?,
        },
        Strategy::Correctness => TargetStrategy::Correctness,
        Strategy::Wellformed => TargetStrategy::Wellformed,
    })
}

pub fn train(a: TrainArgs) -> Result<()> {
    let strategy = strategy(&a)?;
    let head = match a.head {
        Some(HeadArg::Regression) => Head::Regression,
        Some(HeadArg::Classification) => Head::Classification,
        None => strategy.default_head(),
    };
    let cfg = TrainConfig {
        learning_rate: a.lr,
        epochs: a.epochs,
        batch_size: a.batch_size,
        warmup_fraction: a.warmup,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let features = FeatureConfig {
        dimension: a.dim,
        use_bigrams: a.bigrams,
    };
    features.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let ds = read_dataset(&a.input)?;
    let decisions = match strategy {
        TargetStrategy::Wellformed => Vec::new(),
        _ => replay(&ds, &a.input, 0.0)?,
    };
    let targets = in_file(&a.input, make_targets(&ds, &decisions, strategy))?;

    let (model, report) = match &a.init {
        Some(path) => {
            let mut model = read_model(path)?;
            if model.head != head {
                return Err(CliError::Usage(format!(
                    "--init model has a {} head but training asked for {}",
                    model.head, head
                )));
            }
            if model.features != features {
                return Err(CliError::Usage(
                    "--init model was trained with a different --dim/--bigrams".into(),
                ));
            }
            let report = continue_training(&mut model, &ds, &targets, &cfg)?;
            (model, report)
        }
        None => train_with_report(&ds, &targets, head, &cfg, &features, a.seed)?,
    };
    save_model(&model, &a.out)?;
    print_losses(&report);
    println!("wrote {} model to {}", model.head, a.out.display());
    Ok(())
}

fn print_losses(report: &TrainReport) {
    for (i, l) in report.epoch_losses.iter().enumerate() {
        println!("epoch {}: loss {l:.6}", i + 1);
    }
    if let Some(l) = report.final_loss() {
        println!("final loss: {l:.6}");
    }
}

pub fn calibrate(a: CalibrateArgs) -> Result<()> {
    let model = read_model(&a.model)?;
    let dev = read_dataset(&a.input)?;
    let decisions = replay(&dev, &a.input, a.tau1)?;
    let r = calibrate_filter(&model, &dev, &decisions, a.tau1)?;
    println!("tau1             {:.4}", a.tau1);
    println!("tau2*            {:.6}", r.tau2_star);
    println!("dev agreement F1 {:.4}", r.dev_agreement_f1);
    println!("candidates       {}", r.candidates_examined);
    if let Some(out) = &a.out {
        write_json(out, &r)?;
    }
    Ok(())
}

pub fn evaluate(a: EvaluateArgs) -> Result<()> {
    let tau2 = match (a.tau2, &a.calibration) {
        (Some(t), _) => t,
        (None, Some(path)) => {
            let text = read_text(path)?;
            let r: CalibrationResult = serde_json::from_str(&text).map_err(|e| {
                CliError::InFile(
                    path.clone(),
                    qfilter::Error::Parse {
                        line: e.line(),
                        message: e.to_string(),
                    },
                )
            })?;
            r.tau2_star
        }
        (None, None) => unreachable!("clap requires --tau2 or --calibration"),
    };
    let model = read_model(&a.model)?;
    let test = read_dataset(&a.input)?;
    let decisions = replay(&test, &a.input, a.tau1)?;
    let f = model.predict_all(&test);
    let report = in_file(&a.input, compare(&decisions, &f, a.tau1, tau2))?;
    print_report(&report);
    if let Some(out) = &a.out {
        write_json(out, &report)?;
    }
    Ok(())
}

fn print_report(r: &FilterReport) {
    println!("tau1 {:.4}  tau2 {:.4}  filtered {:.2}%", r.tau1, r.tau2, r.pct_filter);
    println!("{:<10} {:>9} {:>9} {:>9} {:>9}", "system", "answered", "Pr", "Re", "F1");
    for (name, m) in [("M", &r.base), ("F -> M", &r.filtered)] {
        println!(
            "{:<10} {:>9} {:>9} {:>9.4} {:>9.4}",
            name,
            m.answered,
            fmt_opt(m.precision),
            m.recall,
            m.f1
        );
    }
    println!(
        "{:<10} {:>9} {:>9} {:>+9.4} {:>+9.4}",
        "delta",
        "",
        r.delta_pr.map_or_else(|| "n/a".to_owned(), |d| format!("{d:+.4}")),
        r.delta_re,
        r.delta_f1
    );
}

pub fn sweep(a: SweepArgs) -> Result<()> {
    let taus = uniform_grid(a.grid).map_err(|e| CliError::Usage(e.to_string()))?;
    let ds = read_dataset(&a.input)?;
    let correct: Vec<bool> = ds
        .iter()
        .map(|q| {
            q.correct.ok_or_else(|| {
                CliError::InFile(
                    a.input.clone(),
                    qfilter::Error::MissingField {
                        id: q.id.clone(),
                        field: "correct",
                        context: "sweep".into(),
                    },
                )
            })
        })
        .collect::<Result<_>>()?;
    let f_scores = match (a.mode, &a.model) {
        (SweepMode::Model, _) => None,
        (_, Some(path)) => Some(read_model(path)?.predict_all(&ds)),
        (_, None) => return Err(CliError::Usage("--mode filter and --mode joint need --model".into())),
    };
    let curve = match a.mode {
        SweepMode::Model => {
            let sigma: Vec<f64> = replay(&ds, &a.input, 0.0)?.iter().map(|d| d.sigma).collect();
            metrics::sweep(&sigma, &correct, &taus)?
        }
        SweepMode::Filter => {
            let f = f_scores.expect("checked above");
            let mut curve = metrics::sweep(&f, &correct, &taus)?;
            for p in &mut curve.points {
                p.filtered_fraction = Some(filtered_fraction(&f, p.tau));
            }
            curve
        }
        SweepMode::Joint => {
            let sigma: Vec<f64> = replay(&ds, &a.input, 0.0)?.iter().map(|d| d.sigma).collect();
            joint_sweep(&f_scores.expect("checked above"), &sigma, &correct, &taus)?
        }
    };
    write_text(&a.out, &curve.to_csv())?;
    println!("wrote {} points to {}", curve.points.len(), a.out.display());
    Ok(())
}

pub fn cost(a: CostArgs) -> Result<()> {
    let s = CostScenario {
        n_questions: a.n_questions,
        candidates_per_question: a.candidates,
        batch_size: a.batch_size,
        seq_len_m: a.seq_len_m,
        seq_len_f: a.seq_len_f,
        filter_fraction: a.filter_fraction,
    };
    let c = pipeline_cost(&s).map_err(|e| CliError::Usage(e.to_string()))?;
    print_cost(&c);
    if let Some(out) = &a.out {
        write_json(out, &c)?;
    }
    Ok(())
}

fn print_cost(c: &CostBreakdown) {
    println!("baseline M-batches   {}", c.baseline_m_batches);
    println!("filtered M-batches   {}", c.filtered_m_batches);
    println!("F-batches            {}", c.f_batches);
    println!("cost ratio           {}", c.cost_ratio);
    println!("savings              {:.4}%", c.savings_pct);
    println!("note: retrieval and sentence splitting are not counted, so real savings are larger");
}
