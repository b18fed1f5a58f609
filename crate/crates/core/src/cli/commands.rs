use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::files::{load_vignettes, read_json, unix_now, write_json, Outputs, RunManifest, JUDGMENTS, MANIFEST};
use super::{
    BackendArgs, BaselineArgs, Cli, CliError, Command, EvalArgs, GenerateArgs, GoldArgs, MockScriptArgs, MsaArgs,
    RerunArgs,
};
use crate::infer::{load, run_rejection, PosteriorEstimate, RejectionConfig};
use crate::lm::{open_backend, Backend, BackendDescriptor, BackendError, Message};
use crate::metrics::{build_report, write_csv, JudgmentSet, ReportOptions, Source};
use crate::olympics::{gold_model, sample_experiment_set, CommentaryEntry, Experiment, GoldParams, Vignette};
use crate::synthesis::{
    mock_script, participant_seed, run_baseline, run_experiment, BaselineConfig, BaselineMode, PipelineConfig,
};

fn participant_id(p: usize) -> String {
    format!("p{p:02}")
}

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

/// Common bookkeeping: the clock, the output set and the manifest.
struct Run {
    command: &'static str,
    argv: Vec<String>,
    out: PathBuf,
    started: Instant,
    started_unix: u64,
    outputs: Outputs,
}

impl Run {
    fn new(command: &'static str, argv: &[String], out: &Path) -> Self {
        Run {
            command,
            argv: argv.to_vec(),
            out: out.to_path_buf(),
            started: Instant::now(),
            started_unix: unix_now(),
            outputs: Outputs::new(out),
        }
    }

    fn finish(
        self,
        config: serde_json::Value,
        seed: u64,
        backend: Option<BackendDescriptor>,
        inputs: Vec<PathBuf>,
    ) -> Result<(), CliError> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            argv: self.argv,
            config,
            seed,
            backend,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            inputs,
            outputs: self.outputs.into_paths(),
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
        };
        write_json(&self.out.join(MANIFEST), &manifest)
    }
}

fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    if jobs == Some(0) {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(failure)
}

pub fn dispatch(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let pool = pool(cli.jobs)?;
    match cli.command {
        Command::Generate(a) => generate(a, &argv),
        Command::Gold(a) => pool.install(|| gold(a, &argv)),
        Command::Msa(a) => pool.install(|| msa(a, &argv)),
        Command::Baseline(a) => pool.install(|| baseline(a, &argv)),
        Command::Eval(a) => pool.install(|| eval(a, &argv)),
        Command::MockScript(a) => mock(a, &argv),
        Command::Rerun(a) => rerun(a),
    }
}

fn generate(a: GenerateArgs, argv: &[String]) -> Result<(), CliError> {
    let commentary: Option<Vec<CommentaryEntry>> = match (&a.commentary, a.experiment) {
        (None, Experiment::E3) => return Err(CliError::Usage("--experiment e3 needs --commentary FILE".into())),
        (Some(_), Experiment::E1 | Experiment::E2) => {
            return Err(CliError::Usage("--commentary only applies to e3".into()))
        }
        (Some(p), _) => Some(read_json(p).map_err(|e| CliError::Usage(e.to_string()))?),
        (None, _) => None,
    };
    let mut run = Run::new("generate", argv, &a.out);
    let set = sample_experiment_set(a.experiment, a.seed, commentary.as_deref()).map_err(failure)?;
    for v in &set {
        run.outputs.json(format!("{}.json", v.id), v)?;
    }
    eprintln!("wrote {} vignettes to {}", set.len(), a.out.display());
    let config = json!({ "experiment": a.experiment, "commentary": a.commentary });
    run.finish(config, a.seed, None, a.commentary.into_iter().collect())
}

#[derive(Serialize)]
struct GoldRun<'a> {
    vignette_id: &'a str,
    participant_id: String,
    posterior: &'a PosteriorEstimate,
}

fn gold_params(path: &Option<PathBuf>) -> Result<GoldParams, CliError> {
    match path {
        None => Ok(GoldParams::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
            GoldParams::from_json(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))
        }
    }
}

fn gold(a: GoldArgs, argv: &[String]) -> Result<(), CliError> {
    if a.samples == 0 || a.participants == 0 {
        return Err(CliError::Usage("--samples and --participants must be at least 1".into()));
    }
    let params = gold_params(&a.params)?;
    let vignettes = load_vignettes(&a.vignettes)?;
    let programs = vignettes
        .iter()
        .map(|v| {
            let src = gold_model(v, &params).map_err(failure)?;
            load(&src.text).map_err(|e| CliError::Failure(format!("{}: {e}", v.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut run = Run::new("gold", argv, &a.out);
    let jobs: Vec<(usize, usize)> = (0..vignettes.len())
        .flat_map(|v| (0..a.participants).map(move |p| (v, p)))
        .collect();
    let posteriors = jobs
        .par_iter()
        .map(|&(v, p)| {
            let config = RejectionConfig::new(a.samples, participant_seed(a.seed, &vignettes[v].id, p));
            run_rejection(&programs[v], &config).map_err(|e| CliError::Failure(format!("{}: {e}", vignettes[v].id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut judgments = JudgmentSet::new(Source::Gold);
    for (&(v, p), posterior) in jobs.iter().zip(&posteriors) {
        let vid = &vignettes[v].id;
        run.outputs.json(
            Path::new(vid).join(format!("{}.json", participant_id(p))),
            &GoldRun {
                vignette_id: vid,
                participant_id: participant_id(p),
                posterior,
            },
        )?;
        judgments.add_posterior(vid, &participant_id(p), posterior);
    }
    vignettes.iter().for_each(|v| judgments.add_vignette(v));
    run.outputs.json(JUDGMENTS, &judgments)?;
    eprintln!("{} vignettes x {} participants x {} samples", vignettes.len(), a.participants, a.samples);
    let config = json!({ "samples": a.samples, "participants": a.participants, "params": params });
    run.finish(config, a.seed, None, a.vignettes)
}

fn backend_error(e: BackendError) -> CliError {
    match e {
        BackendError::Config(m) => CliError::Usage(m),
        other => CliError::Failure(other.to_string()),
    }
}

fn open(b: &BackendArgs) -> Result<(BackendDescriptor, std::sync::Arc<dyn Backend>), CliError> {
    let d = b.descriptor()?;
    let backend = open_backend(&d).map_err(backend_error)?;
    Ok((backend.descriptor(), backend))
}

/// Built-in defaults for the vignettes' experiment, then the file's keys,
/// then flags.
fn pipeline_config(a: &MsaArgs, vignettes: &[Vignette]) -> Result<PipelineConfig, CliError> {
    let e3 = vignettes.iter().all(|v| v.experiment == Some(Experiment::E3));
    let base = PipelineConfig::for_experiment(if e3 { Experiment::E3 } else { Experiment::E1 });
    let mut value = serde_json::to_value(base).map_err(failure)?;
    if let Some(path) = &a.config {
        let file: serde_json::Value = read_json(path).map_err(|e| CliError::Usage(e.to_string()))?;
        let serde_json::Value::Object(entries) = file else {
            return Err(CliError::Usage(format!("{}: expected a JSON object", path.display())));
        };
        for (k, v) in entries {
            value[k] = v;
        }
    }
    let mut config: PipelineConfig =
        serde_json::from_value(value).map_err(|e| CliError::Usage(format!("pipeline config: {e}")))?;
    if let Some(n) = a.participants {
        config.n_participants = n;
    }
    if let Some(n) = a.samples {
        config.k_samples = n;
    }
    if let Some(m) = &a.backend.model {
        config.model_name = m.clone();
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

#[derive(Serialize)]
struct FailedRun<'a> {
    vignette_id: &'a str,
    participant_id: String,
    error: String,
    transcript: &'a [Message],
}

fn msa(a: MsaArgs, argv: &[String]) -> Result<(), CliError> {
    let vignettes = load_vignettes(&a.vignettes)?;
    let config = pipeline_config(&a, &vignettes)?;
    let (descriptor, backend) = open(&a.backend)?;
    let mut run = Run::new("msa", argv, &a.out);
    let outcomes = run_experiment(&vignettes, &config, backend.as_ref(), a.seed).map_err(failure)?;
    let mut judgments = JudgmentSet::new(Source::Msa);
    let mut failed = 0;
    for o in &outcomes {
        let pid = participant_id(o.participant_id);
        let dir = Path::new(&o.vignette_id);
        match &o.result {
            Ok(r) => {
                run.outputs.json(dir.join(format!("{pid}.json")), r)?;
                judgments.add_posterior(&o.vignette_id, &pid, &r.posterior);
            }
            Err(e) => {
                failed += 1;
                eprintln!("{e}");
                run.outputs.json(
                    dir.join(format!("{pid}.error.json")),
                    &FailedRun {
                        vignette_id: &o.vignette_id,
                        participant_id: pid.clone(),
                        error: e.source.to_string(),
                        transcript: &e.transcript,
                    },
                )?;
            }
        }
    }
    vignettes.iter().for_each(|v| judgments.add_vignette(v));
    run.outputs.json(JUDGMENTS, &judgments)?;
    eprintln!("{} runs, {failed} failed", outcomes.len());
    let snapshot = serde_json::to_value(&config).map_err(failure)?;
    run.finish(snapshot, a.seed, Some(descriptor), a.vignettes)?;
    if failed > 0 {
        return Err(CliError::Failure(format!("{failed} of {} participant runs failed", outcomes.len())));
    }
    Ok(())
}

fn baseline(a: BaselineArgs, argv: &[String]) -> Result<(), CliError> {
    if a.participants == 0 || a.responses == 0 {
        return Err(CliError::Usage("--participants and --responses must be at least 1".into()));
    }
    let vignettes = load_vignettes(&a.vignettes)?;
    let (descriptor, backend) = open(&a.backend)?;
    let mode = BaselineMode::from(a.mode);
    let config = BaselineConfig {
        responses_per_question: a.responses,
        temperature: a.temperature,
        model_name: a.backend.model.clone().unwrap_or_default(),
        ..BaselineConfig::default()
    };
    let mut run = Run::new("baseline", argv, &a.out);
    let jobs: Vec<(usize, usize)> = (0..vignettes.len())
        .flat_map(|v| (0..a.participants).map(move |p| (v, p)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(v, p)| {
            let vig = &vignettes[v];
            run_baseline(mode, vig, backend.as_ref(), p, participant_seed(a.seed, &vig.id, p), &config)
                .map_err(|e| CliError::Failure(format!("participant {p} on `{}`: {e}", vig.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let source = match mode {
        BaselineMode::Direct => Source::LmDirect,
        BaselineMode::Cot => Source::LmCot,
    };
    let mut judgments = JudgmentSet::new(source);
    for r in &runs {
        let pid = participant_id(r.answers.participant_id);
        run.outputs.json(Path::new(&r.answers.vignette_id).join(format!("{pid}.json")), r)?;
        judgments.add_answers(&r.answers.vignette_id, &pid, &r.answers.answers);
    }
    vignettes.iter().for_each(|v| judgments.add_vignette(v));
    run.outputs.json(JUDGMENTS, &judgments)?;
    let snapshot = json!({ "mode": mode.as_str(), "participants": a.participants, "baseline": config });
    run.finish(snapshot, a.seed, Some(descriptor), a.vignettes)
}

fn judgments_at(path: &Path) -> Result<JudgmentSet, CliError> {
    let file = if path.is_dir() { path.join(JUDGMENTS) } else { path.to_path_buf() };
    read_json(&file).map_err(|e| CliError::Usage(e.to_string()))
}

fn eval(a: EvalArgs, argv: &[String]) -> Result<(), CliError> {
    let human = judgments_at(&a.human)?;
    if human.source != Source::Human {
        return Err(CliError::Usage(format!("{} does not hold human judgments", a.human.display())));
    }
    let mut model: Option<JudgmentSet> = None;
    for p in &a.runs {
        let set = judgments_at(p)?;
        match &mut model {
            None => model = Some(set),
            Some(m) => m.extend(set).map_err(|e| CliError::Usage(e.to_string()))?,
        }
    }
    let mut model = model.expect("--runs is required");
    if !a.vignettes.is_empty() {
        load_vignettes(&a.vignettes)?.iter().for_each(|v| model.add_vignette(v));
    }
    let options = ReportOptions {
        metrics: a.metrics.clone(),
        n_boot: a.n_boot,
        split_half: a.split_half,
        seed: a.seed,
    };
    let mut run = Run::new("eval", argv, &a.out);
    let report = build_report(&model, &human, &options).map_err(failure)?;
    run.outputs.json("report.json", &report)?;
    let mut csv = Vec::new();
    write_csv(&report, &mut csv).map_err(failure)?;
    run.outputs.bytes("questions.csv", &csv)?;
    for g in &report.groups {
        let show = |x: Option<f64>| x.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{} {}: wd {} tvd {} r2 {}",
            g.sport,
            g.experiment.map_or("-", Experiment::as_str),
            show(g.wd),
            show(g.tvd),
            show(g.r2)
        );
    }
    let mut inputs = vec![a.human];
    inputs.extend(a.runs);
    inputs.extend(a.vignettes);
    run.finish(serde_json::to_value(&options).map_err(failure)?, a.seed, None, inputs)
}

fn mock(a: MockScriptArgs, argv: &[String]) -> Result<(), CliError> {
    let params = gold_params(&a.params)?;
    let vignettes = load_vignettes(&a.vignettes)?;
    let mut run = Run::new("mock-script", argv, &a.out);
    for v in &vignettes {
        let script = mock_script(v, &params).map_err(failure)?;
        run.outputs.json(format!("{}.json", v.id), &script)?;
    }
    run.finish(json!({ "params": params }), 0, None, a.vignettes)
}

/// The recorded arguments with any `--out` removed.
fn without_out(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
        } else if a == "--out" {
            skip = true;
        } else if !a.starts_with("--out=") {
            out.push(a.clone());
        }
    }
    out
}

fn rerun(a: RerunArgs) -> Result<(), CliError> {
    let manifest: RunManifest = read_json(&a.manifest).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut args = without_out(&manifest.argv);
    args.push("--out".into());
    args.push(a.out.to_string_lossy().into_owned());
    let cli = <Cli as clap::Parser>::try_parse_from(std::iter::once("msa".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("recorded arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Rerun(_)) {
        return Err(CliError::Usage("a manifest cannot record a rerun".into()));
    }
    dispatch(cli, args)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn out_flag_is_dropped() {
        let argv: Vec<String> = ["gold", "--out", "x", "--seed", "3", "--out=y"].map(String::from).to_vec();
        assert_eq!(without_out(&argv), ["gold", "--seed", "3"]);
    }
}
