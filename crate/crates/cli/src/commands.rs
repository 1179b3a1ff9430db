use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use spc_core::align::{
    generate_dataset, load_dataset, run_rla_spc, write_dataset, ContextSummary, IterationLog, RewardPipeline,
    TemplatePolicy, SHIPPED_LABEL_COUNTS,
};
use spc_core::bench::{self, generate_cases, load_candidates, load_cases, write_cases, BenchError, MetricsReport};
use spc_core::config::HarnessConfig;
use spc_core::minidsl::{self, Diagnostic, ParseFailure, StaticReport};
use spc_core::reward::{score_output, RewardBreakdown};
use spc_core::sandbox::{self, ExecutionOutcome};
use spc_core::templates::{render_output, TemplateKind};

use crate::manifest::{Document, ManifestBuilder};
use crate::{AlignArgs, Assign, CliError, CliResult, Command};

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

/// Writes the document to `out`, or to stdout.
fn emit<T: Serialize>(manifest: &mut ManifestBuilder, body: &T, out: Option<&Path>) -> CliResult {
    if let Some(p) = out {
        manifest.output(p);
    }
    let text = to_json(&Document { manifest: manifest.finish(), body });
    match out {
        Some(p) => write(p, &text),
        None => match std::io::stdout().lock().write_all(text.as_bytes()) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Usage(format!("stdout: {e}"))),
            _ => Ok(()),
        },
    }
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn positive(name: &str, v: f64) -> CliResult<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(CliError::Usage(format!("--{name} must be positive, got {v}")))
    }
}

pub fn dispatch(command: Command, cfg: HarnessConfig, timing: bool) -> CliResult {
    match command {
        Command::Parse { file, out } => cmd_parse(&file, out.as_deref(), &cfg, timing),
        Command::Run { file, budget, gt, pga, trace, out } => {
            let mut cfg = cfg;
            if let Some(b) = budget {
                if b == 0 {
                    return Err(CliError::Usage("--budget must be at least 1".into()));
                }
                cfg.sandbox.budget = b;
            }
            if let Some(p) = pga {
                cfg.sandbox.pga = positive("pga", p)?;
            }
            let gt = gt.map(|g| positive("gt", g)).transpose()?;
            cmd_run(&file, gt, trace, out.as_deref(), &cfg, timing)
        }
        Command::Reward { file, gt, pga, out } => {
            let mut cfg = cfg;
            if let Some(p) = pga {
                cfg.sandbox.pga = positive("pga", p)?;
            }
            cmd_reward(&file, positive("gt", gt)?, out.as_deref(), &cfg, timing)
        }
        Command::GenCases { count, seed, out } => cmd_gen_cases(count, seed, &out, &cfg, timing),
        Command::GenCandidates { cases, out, n, seed, templates, assign } => {
            let mut cfg = cfg;
            if let Some(n) = n {
                cfg.bench.n = n;
            }
            cmd_gen_candidates(&cases, &out, seed, &templates, assign, &cfg, timing)
        }
        Command::GenDataset { seed, out } => cmd_gen_dataset(seed, &out, &cfg, timing),
        Command::Evaluate { cases, candidates, n, k, out, csv, label } => {
            let mut cfg = cfg;
            if let Some(n) = n {
                cfg.bench.n = n;
            }
            if !k.is_empty() {
                cfg.bench.ks = k;
            }
            cmd_evaluate(&cases, &candidates, out.as_deref(), csv.as_deref(), &label, &cfg, timing)
        }
        Command::Align(args) => cmd_align(args, cfg, timing),
    }
}

#[derive(Serialize)]
struct ParseBody {
    file: String,
    total_lines: usize,
    commands: usize,
    failures: Vec<ParseFailure>,
    diagnostics: Vec<Diagnostic>,
    report: StaticReport,
}

fn cmd_parse(file: &Path, out: Option<&Path>, cfg: &HarnessConfig, timing: bool) -> CliResult {
    let source = read(file)?;
    let mut manifest = ManifestBuilder::new("parse", cfg, None, timing);
    manifest.input(file);
    let (program, failures) = minidsl::parse_recovering(&source);
    let body = ParseBody {
        file: file.display().to_string(),
        total_lines: program.total_lines,
        commands: program.commands.len(),
        report: minidsl::static_report(&program, &cfg.api_tiers()),
        diagnostics: program.diagnostics,
        failures,
    };
    emit(&mut manifest, &body, out)?;
    if body.failures.is_empty() && body.diagnostics.is_empty() {
        Ok(())
    } else {
        Err(CliError::Domain(format!(
            "{}: {} parse failure(s), {} diagnostic(s)",
            file.display(),
            body.failures.len(),
            body.diagnostics.len()
        )))
    }
}

#[derive(Serialize)]
struct RunBody {
    file: String,
    outcome: ExecutionOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_gt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
}

fn cmd_run(file: &Path, gt: Option<f64>, trace: bool, out: Option<&Path>, cfg: &HarnessConfig, timing: bool) -> CliResult {
    let source = read(file)?;
    let mut manifest = ManifestBuilder::new("run", cfg, None, timing);
    manifest.input(file);
    let outcome = if trace {
        match minidsl::parse(&source) {
            Ok(program) => {
                let (outcome, lines) = sandbox::execute_traced(&program, &cfg.sandbox);
                for l in lines {
                    eprintln!("{l}");
                }
                outcome
            }
            Err(_) => sandbox::execute_source(&source, &cfg.sandbox),
        }
    } else {
        sandbox::execute_source(&source, &cfg.sandbox)
    };
    let epsilon = gt.zip(outcome.t_pred()).map(|(g, t)| (t - g).abs() / g);
    let success = outcome.is_success();
    let body = RunBody { file: file.display().to_string(), outcome, t_gt: gt, epsilon };
    emit(&mut manifest, &body, out)?;
    if success {
        Ok(())
    } else {
        Err(CliError::Domain(format!("{}: execution did not succeed", file.display())))
    }
}

#[derive(Serialize)]
struct RewardBody {
    file: String,
    t_gt: f64,
    breakdown: RewardBreakdown,
    outcome: ExecutionOutcome,
}

fn cmd_reward(file: &Path, gt: f64, out: Option<&Path>, cfg: &HarnessConfig, timing: bool) -> CliResult {
    let raw = read(file)?;
    let mut manifest = ManifestBuilder::new("reward", cfg, None, timing);
    manifest.input(file);
    let scored = score_output(&raw, gt, &cfg.reward, &cfg.api_tiers(), &cfg.sandbox);
    let body = RewardBody {
        file: file.display().to_string(),
        t_gt: gt,
        breakdown: scored.breakdown,
        outcome: scored.outcome,
    };
    emit(&mut manifest, &body, out)
}

#[derive(Serialize)]
struct GenBody {
    records: usize,
}

fn cmd_gen_cases(count: usize, seed: u64, out: &Path, cfg: &HarnessConfig, timing: bool) -> CliResult {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let mut manifest = ManifestBuilder::new("gen-cases", cfg, Some(seed), timing);
    let cases = generate_cases(count, seed, &cfg.period);
    write(out, &write_cases(&cases))?;
    manifest.output(out);
    emit(&mut manifest, &GenBody { records: cases.len() }, Some(&sidecar(out)))
}

fn cmd_gen_dataset(seed: u64, out: &Path, cfg: &HarnessConfig, timing: bool) -> CliResult {
    let mut manifest = ManifestBuilder::new("gen-dataset", cfg, Some(seed), timing);
    let examples = generate_dataset(seed, &SHIPPED_LABEL_COUNTS, &cfg.period);
    write(out, &write_dataset(&examples))?;
    manifest.output(out);
    emit(&mut manifest, &GenBody { records: examples.len() }, Some(&sidecar(out)))
}

#[derive(Serialize)]
struct Assignment {
    case_id: String,
    index: usize,
    template: TemplateKind,
}

#[derive(Serialize)]
struct CandidatesBody {
    cases: usize,
    n: usize,
    assignments: Vec<Assignment>,
}

fn parse_templates(ids: &[String]) -> CliResult<Vec<TemplateKind>> {
    if ids.is_empty() {
        return Ok(TemplateKind::ALL.to_vec());
    }
    ids.iter()
        .map(|id| {
            TemplateKind::from_id(id.trim()).ok_or_else(|| {
                let known: Vec<_> = TemplateKind::ALL.iter().map(|t| t.id()).collect();
                CliError::Usage(format!("unknown template '{id}' (known: {})", known.join(", ")))
            })
        })
        .collect()
}

fn cmd_gen_candidates(
    cases_path: &Path,
    out: &Path,
    seed: u64,
    templates: &[String],
    assign: Assign,
    cfg: &HarnessConfig,
    timing: bool,
) -> CliResult {
    let kinds = parse_templates(templates)?;
    let n = cfg.bench.n;
    if n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let cases = load_cases(&read(cases_path)?).map_err(|e| CliError::Usage(format!("{}: {e}", cases_path.display())))?;
    fs::create_dir_all(out).map_err(|e| CliError::Usage(format!("{}: {e}", out.display())))?;
    let mut manifest = ManifestBuilder::new("gen-candidates", cfg, Some(seed), timing);
    manifest.input(cases_path).output(out);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignments = Vec::new();
    for case in &cases {
        for i in 0..n {
            let (kind, phrase) = match assign {
                Assign::Cycle => (kinds[i % kinds.len()], i as u64),
                Assign::Random => (*kinds.choose(&mut rng).expect("non-empty"), rng.gen()),
            };
            let raw = render_output(kind, &case.spec, case.t_gt, phrase);
            let stem = out.join(format!("{}_{i}", case.id));
            write(&stem.with_extension("mos"), &spc_core::reward::extract_code(&raw))?;
            write(&stem.with_extension("out"), &raw)?;
            assignments.push(Assignment { case_id: case.id.clone(), index: i, template: kind });
        }
    }
    let body = CandidatesBody { cases: cases.len(), n, assignments };
    emit(&mut manifest, &body, Some(&out.join("manifest.json")))
}

fn bench_error(e: BenchError) -> CliError {
    match e {
        BenchError::CardinalityMismatch { .. } | BenchError::ZeroCandidates | BenchError::UnknownCase(_) => {
            CliError::Domain(format!("evaluation refused: {e}"))
        }
        _ => CliError::Usage(e.to_string()),
    }
}

#[derive(Serialize)]
struct EvaluateBody<'a> {
    label: &'a str,
    metrics: &'a MetricsReport,
    records: &'a [bench::CandidateRecord],
}

fn cmd_evaluate(
    cases_path: &Path,
    dir: &Path,
    out: Option<&Path>,
    csv: Option<&Path>,
    label: &str,
    cfg: &HarnessConfig,
    timing: bool,
) -> CliResult {
    let cases = load_cases(&read(cases_path)?).map_err(|e| CliError::Usage(format!("{}: {e}", cases_path.display())))?;
    let candidates = load_candidates(dir).map_err(bench_error)?;
    let mut manifest = ManifestBuilder::new("evaluate", cfg, None, timing);
    manifest.input(cases_path).input(dir);
    let report = bench::evaluate(&cases, &candidates, &cfg.eval_config()).map_err(bench_error)?;
    if let Some(p) = csv {
        write(p, &report.metrics.to_csv(label))?;
        manifest.output(p);
    }
    let body = EvaluateBody { label, metrics: &report.metrics, records: &report.records };
    emit(&mut manifest, &body, out)
}

#[derive(Serialize)]
struct PolicyBody<'a> {
    policy: &'a TemplatePolicy,
    contexts: Vec<ContextSummary>,
}

#[derive(Serialize)]
struct AlignSummary<'a> {
    examples: usize,
    reward_evaluations: usize,
    reference_expected_reward: f64,
    final_expected_reward: f64,
    gain: f64,
    final_iteration: &'a IterationLog,
    /// Mean reward per template id, for contexts present in the dataset.
    reward_table: BTreeMap<String, BTreeMap<String, f64>>,
}

fn cmd_align(args: AlignArgs, mut cfg: HarnessConfig, timing: bool) -> CliResult {
    let a = &mut cfg.align;
    if let Some(v) = args.seed {
        a.seed = v;
    }
    if let Some(v) = args.iterations {
        a.iterations = v;
    }
    if let Some(v) = args.beta {
        a.beta = v;
    }
    if let Some(v) = args.group_size {
        a.group_size = v;
    }
    if let Some(v) = args.learning_rate {
        a.learning_rate = v;
    }
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;

    let dataset = load_dataset(&read(&args.dataset)?, &cfg.period)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.dataset.display())))?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::Usage(format!("{}: {e}", args.out.display())))?;
    let mut manifest = ManifestBuilder::new("align", &cfg, Some(cfg.align.seed), timing);
    manifest.input(&args.dataset);

    let mut pipeline = RewardPipeline::new(cfg.reward.clone(), cfg.api_tiers(), cfg.sandbox);
    let initial = TemplatePolicy::uniform(&TemplateKind::ALL);
    let result = run_rla_spc(&dataset, &initial, &cfg.align, &mut pipeline)
        .map_err(|e| CliError::Domain(format!("alignment failed: {e}")))?;

    let policy_doc = |p: &TemplatePolicy| to_json(&PolicyBody { policy: p, contexts: p.summary() });
    let files = [
        ("reference.json", policy_doc(&result.reference)),
        ("final.json", policy_doc(&result.final_policy)),
        ("training_log.jsonl", result.log_jsonl()),
    ];
    for (name, text) in &files {
        let p = args.out.join(name);
        write(&p, text)?;
        manifest.output(&p);
    }

    let last = result.log.last().expect("log includes iteration 0");
    let reward_table = spc_core::align::Context::all()
        .into_iter()
        .filter_map(|c| {
            result.reward_table[c.index()].as_ref().map(|row| {
                let cells = result
                    .final_policy
                    .templates
                    .iter()
                    .zip(row)
                    .map(|(t, r)| (t.id().to_string(), *r))
                    .collect();
                (c.id(), cells)
            })
        })
        .collect();
    let summary = AlignSummary {
        examples: dataset.len(),
        reward_evaluations: pipeline.evaluations(),
        reference_expected_reward: result.log[0].expected_reward,
        final_expected_reward: last.expected_reward,
        gain: result.gain(),
        final_iteration: last,
        reward_table,
    };
    emit(&mut manifest, &summary, Some(&args.out.join("summary.json")))
}
