use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::drift::{base_shear, drift_proxy};
use super::{EnvFailureKind, ExecutionOutcome, PhysMetrics, SandboxConfig};
use crate::kernel::{assemble, solve_periods, Dof, FrameElement, ModalResult, StructModel};
use crate::minidsl::{self, Command, Literal, Program};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceLine {
    pub line: usize,
    pub command: String,
    /// Cumulative steps after the command ran.
    pub steps: u64,
}

impl std::fmt::Display for TraceLine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}\t{}\t{}", self.line, self.command, self.steps)
    }
}

/// Parses and executes; a source that does not parse is refused.
pub fn execute_source(source: &str, cfg: &SandboxConfig) -> ExecutionOutcome {
    match minidsl::parse(source) {
        Ok(p) => execute(&p, cfg),
        Err(f) => ExecutionOutcome::EnvFailure {
            kind: EnvFailureKind::ParseRefused,
            message: f.to_string(),
        },
    }
}

pub fn execute(program: &Program, cfg: &SandboxConfig) -> ExecutionOutcome {
    Interp::new(cfg, false).run(program).0
}

pub fn execute_traced(program: &Program, cfg: &SandboxConfig) -> (ExecutionOutcome, Vec<TraceLine>) {
    Interp::new(cfg, true).run(program)
}

/// Steps charged for a dense solve over `n` unknowns.
fn solve_cost(n: usize) -> u64 {
    let n = n as u64;
    1 + n.saturating_mul(n).saturating_mul(n) / 1000
}

enum Stop {
    Env(EnvFailureKind, String),
    Runtime(String),
}

type Step<T = ()> = Result<T, Stop>;

fn runtime<T>(msg: impl Into<String>) -> Step<T> {
    Err(Stop::Runtime(msg.into()))
}

struct Interp<'c> {
    cfg: &'c SandboxConfig,
    trace: Option<Vec<TraceLine>>,
    steps: u64,
    model_ready: bool,
    model: StructModel,
    element_tags: BTreeSet<i64>,
    transforms: BTreeSet<i64>,
    materials: BTreeMap<i64, f64>,
    series: BTreeSet<i64>,
    patterns: BTreeMap<i64, i64>,
    active_pattern: Option<i64>,
    analysis_defined: bool,
    modal: Option<ModalResult>,
    t_pred: Option<f64>,
    drift: Option<f64>,
    report: Vec<String>,
}

impl<'c> Interp<'c> {
    fn new(cfg: &'c SandboxConfig, traced: bool) -> Self {
        Self {
            cfg,
            trace: traced.then(Vec::new),
            steps: 0,
            model_ready: false,
            model: StructModel::default(),
            element_tags: BTreeSet::new(),
            transforms: BTreeSet::new(),
            materials: BTreeMap::new(),
            series: BTreeSet::new(),
            patterns: BTreeMap::new(),
            active_pattern: None,
            analysis_defined: false,
            modal: None,
            t_pred: None,
            drift: None,
            report: Vec::new(),
        }
    }

    fn run(mut self, program: &Program) -> (ExecutionOutcome, Vec<TraceLine>) {
        let mut last_line = 0;
        for cmd in &program.commands {
            if let Err(stop) = self.command(cmd) {
                let outcome = match stop {
                    Stop::Env(kind, message) => ExecutionOutcome::EnvFailure { kind, message },
                    Stop::Runtime(message) => ExecutionOutcome::RuntimeError {
                        l_err: cmd.line,
                        command: cmd.name.clone(),
                        message,
                    },
                };
                return (outcome, self.trace.unwrap_or_default());
            }
            last_line = cmd.line;
            if let Some(trace) = self.trace.as_mut() {
                trace.push(TraceLine {
                    line: cmd.line,
                    command: cmd.name.clone(),
                    steps: self.steps,
                });
            }
        }
        let metrics = PhysMetrics {
            t_pred: self.t_pred,
            max_drift_ratio: self.drift,
            compliance_text: self.report.join("\n"),
            eigen_ran: self.modal.is_some(),
            last_line,
        };
        (ExecutionOutcome::Success { metrics }, self.trace.unwrap_or_default())
    }

    fn charge(&mut self, cost: u64) -> Step {
        let next = self.steps.saturating_add(cost);
        if next > self.cfg.budget {
            return Err(Stop::Env(
                EnvFailureKind::BudgetExceeded,
                format!("step budget of {} exceeded", self.cfg.budget),
            ));
        }
        self.steps = next;
        Ok(())
    }

    fn free_dofs(&self) -> usize {
        self.model.nodes.len() * 3 - self.model.fixed_dofs.len()
    }

    fn command(&mut self, cmd: &Command) -> Step {
        let name = cmd.name.as_str();
        let extra = match name {
            "eigen" => solve_cost(self.free_dofs()),
            "analyze" => match cmd.args.first().and_then(Literal::as_int) {
                Some(n) if n > 0 => (n as u64).saturating_add(solve_cost(self.free_dofs())),
                _ => 0,
            },
            _ => 0,
        };
        self.charge(1)?;
        self.charge(extra)?;

        if !minidsl::is_registered(name) {
            return runtime(format!("unknown command '{name}'"));
        }
        if name == minidsl::PRINT_COMMAND {
            let text: Vec<String> = cmd
                .args
                .iter()
                .map(|a| match a {
                    Literal::Str(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect();
            self.report.push(text.join(" "));
            return Ok(());
        }
        if name == "model" {
            return self.model_cmd(&cmd.args);
        }
        if !self.model_ready {
            return runtime(format!("'{name}' called before the model builder was initialized"));
        }
        let args = &cmd.args;
        match name {
            "node" => self.node(args),
            "fix" => self.fix(args),
            "mass" => self.mass(args),
            "geomTransf" => self.geom_transf(args),
            "uniaxialMaterial" => self.material(args),
            "element" => self.element(args),
            "timeSeries" => self.time_series(args),
            "pattern" => self.pattern(args),
            "load" => self.load(args),
            "analysis" => {
                arity(name, args, 1)?;
                match args[0].as_ident() {
                    Some("Static") | Some("Transient") => {
                        self.analysis_defined = true;
                        Ok(())
                    }
                    _ => runtime(format!("analysis: unsupported type '{}'", args[0])),
                }
            }
            "system" | "numberer" | "constraints" | "algorithm" | "test" | "integrator" => {
                if args.is_empty() {
                    return runtime(format!("{name}: missing type argument"));
                }
                Ok(())
            }
            "analyze" => self.analyze(args),
            "eigen" => self.eigen(args),
            "reportPeriod" => self.report_period(),
            _ => unreachable!("registered command without a handler: {name}"),
        }
    }

    fn model_cmd(&mut self, args: &[Literal]) -> Step {
        if self.model_ready {
            return runtime("model builder already initialized");
        }
        if args.first().and_then(Literal::as_ident) != Some("basic") {
            return Err(Stop::Env(
                EnvFailureKind::InterpreterInit,
                "model: only the 'basic' builder is available".into(),
            ));
        }
        let mut ndm = None;
        let mut ndf = None;
        let mut i = 1;
        while i < args.len() {
            let value = args.get(i + 1).and_then(Literal::as_int);
            match args[i].as_ident() {
                Some("-ndm") => ndm = value,
                Some("-ndf") => ndf = value,
                _ => return runtime(format!("model: unexpected argument '{}'", args[i])),
            }
            i += 2;
        }
        if ndm != Some(2) || ndf.unwrap_or(3) != 3 {
            return Err(Stop::Env(
                EnvFailureKind::InterpreterInit,
                "model: the sandbox supports only -ndm 2 -ndf 3".into(),
            ));
        }
        self.model_ready = true;
        Ok(())
    }

    fn require_node(&self, what: &str, tag: i64) -> Step {
        if self.model.nodes.contains_key(&tag) {
            Ok(())
        } else {
            runtime(format!("{what}: node {tag} does not exist"))
        }
    }

    fn node(&mut self, args: &[Literal]) -> Step {
        arity("node", args, 3)?;
        let tag = int("node", args, 0)?;
        if self.model.nodes.contains_key(&tag) {
            return runtime(format!("node: tag {tag} already defined"));
        }
        let (x, y) = (num("node", args, 1)?, num("node", args, 2)?);
        self.model.nodes.insert(tag, (x, y));
        Ok(())
    }

    fn fix(&mut self, args: &[Literal]) -> Step {
        arity("fix", args, 4)?;
        let tag = int("fix", args, 0)?;
        self.require_node("fix", tag)?;
        for (k, dof) in Dof::ALL.into_iter().enumerate() {
            match int("fix", args, k + 1)? {
                0 => {}
                1 => {
                    self.model.fixed_dofs.insert((tag, dof));
                }
                other => return runtime(format!("fix: constraint flag must be 0 or 1, found {other}")),
            }
        }
        Ok(())
    }

    fn mass(&mut self, args: &[Literal]) -> Step {
        arity("mass", args, 4)?;
        let tag = int("mass", args, 0)?;
        self.require_node("mass", tag)?;
        for (k, dof) in Dof::ALL.into_iter().enumerate() {
            let m = num("mass", args, k + 1)?;
            if m < 0.0 {
                return runtime(format!("mass: negative mass {m} at node {tag}"));
            }
            if m > 0.0 {
                self.model.masses.insert((tag, dof), m);
            } else {
                self.model.masses.remove(&(tag, dof));
            }
        }
        Ok(())
    }

    fn geom_transf(&mut self, args: &[Literal]) -> Step {
        arity("geomTransf", args, 2)?;
        match args[0].as_ident() {
            Some("Linear" | "PDelta" | "Corotational") => {}
            _ => return runtime(format!("geomTransf: unsupported type '{}'", args[0])),
        }
        let tag = int("geomTransf", args, 1)?;
        if !self.transforms.insert(tag) {
            return runtime(format!("geomTransf: tag {tag} already defined"));
        }
        Ok(())
    }

    fn material(&mut self, args: &[Literal]) -> Step {
        arity("uniaxialMaterial", args, 3)?;
        if args[0].as_ident() != Some("Elastic") {
            return runtime(format!("uniaxialMaterial: unsupported type '{}'", args[0]));
        }
        let tag = int("uniaxialMaterial", args, 1)?;
        let e = num("uniaxialMaterial", args, 2)?;
        if !(e > 0.0) {
            return runtime("uniaxialMaterial: modulus must be positive");
        }
        if self.materials.insert(tag, e).is_some() {
            return runtime(format!("uniaxialMaterial: tag {tag} already defined"));
        }
        Ok(())
    }

    fn element(&mut self, args: &[Literal]) -> Step {
        let kind = args.first().and_then(Literal::as_ident).unwrap_or_default().to_string();
        let el = match kind.as_str() {
            "elasticBeamColumn" => {
                arity("element elasticBeamColumn", args, 8)?;
                let transf = int("element", args, 7)?;
                if !self.transforms.contains(&transf) {
                    return runtime(format!("element: geomTransf {transf} does not exist"));
                }
                FrameElement {
                    tag: int("element", args, 1)?,
                    node_i: int("element", args, 2)?,
                    node_j: int("element", args, 3)?,
                    a: num("element", args, 4)?,
                    e: num("element", args, 5)?,
                    i: num("element", args, 6)?,
                }
            }
            "truss" => {
                arity("element truss", args, 6)?;
                let mat = int("element", args, 5)?;
                let Some(&e) = self.materials.get(&mat) else {
                    return runtime(format!("element: uniaxialMaterial {mat} does not exist"));
                };
                FrameElement {
                    tag: int("element", args, 1)?,
                    node_i: int("element", args, 2)?,
                    node_j: int("element", args, 3)?,
                    a: num("element", args, 4)?,
                    e,
                    i: 0.0,
                }
            }
            other => return runtime(format!("element: unsupported type '{other}'")),
        };
        self.require_node("element", el.node_i)?;
        self.require_node("element", el.node_j)?;
        if !(el.e > 0.0 && el.a > 0.0 && el.i >= 0.0) {
            return runtime(format!("element {}: section properties must be positive", el.tag));
        }
        if !self.element_tags.insert(el.tag) {
            return runtime(format!("element: tag {} already defined", el.tag));
        }
        self.model.elements.push(el);
        Ok(())
    }

    fn time_series(&mut self, args: &[Literal]) -> Step {
        arity("timeSeries", args, 2)?;
        match args[0].as_ident() {
            Some("Linear" | "Constant") => {}
            _ => return runtime(format!("timeSeries: unsupported type '{}'", args[0])),
        }
        let tag = int("timeSeries", args, 1)?;
        if !self.series.insert(tag) {
            return runtime(format!("timeSeries: tag {tag} already defined"));
        }
        Ok(())
    }

    fn pattern(&mut self, args: &[Literal]) -> Step {
        arity("pattern", args, 3)?;
        if args[0].as_ident() != Some("Plain") {
            return runtime(format!("pattern: unsupported type '{}'", args[0]));
        }
        let tag = int("pattern", args, 1)?;
        let series = int("pattern", args, 2)?;
        if !self.series.contains(&series) {
            return runtime(format!("pattern: timeSeries {series} does not exist"));
        }
        if self.patterns.insert(tag, series).is_some() {
            return runtime(format!("pattern: tag {tag} already defined"));
        }
        self.active_pattern = Some(tag);
        Ok(())
    }

    fn load(&mut self, args: &[Literal]) -> Step {
        arity("load", args, 4)?;
        if self.active_pattern.is_none() {
            return runtime("load: no active load pattern");
        }
        let tag = int("load", args, 0)?;
        self.require_node("load", tag)?;
        for k in 1..4 {
            num("load", args, k)?;
        }
        Ok(())
    }

    fn analyze(&mut self, args: &[Literal]) -> Step {
        arity("analyze", args, 1)?;
        let n = int("analyze", args, 0)?;
        if n < 1 {
            return runtime("analyze: step count must be at least 1");
        }
        if !self.analysis_defined {
            return runtime("analyze: no analysis has been defined");
        }
        let shear = base_shear(&self.model, self.cfg.pga, self.cfg.drift_load_factor);
        let result = drift_proxy(&self.model, shear).or_else(|e| runtime(format!("analyze: {e}")))?;
        let ratio = result.max_drift_ratio;
        self.drift = Some(ratio);
        self.report.push(format!("max drift ratio = {ratio:.6e}"));
        let verdict = if ratio <= self.cfg.drift_limit { "pass" } else { "fail" };
        self.report.push(format!("drift check: {verdict}"));
        Ok(())
    }

    fn eigen(&mut self, args: &[Literal]) -> Step {
        let rest = match args.first() {
            Some(Literal::Ident(_)) => &args[1..],
            _ => args,
        };
        arity("eigen", rest, 1)?;
        let n = int("eigen", rest, 0)?;
        if n < 1 {
            return runtime("eigen: number of modes must be at least 1");
        }
        if self.model.masses.is_empty() {
            return runtime("eigen: no mass has been assigned to the model");
        }
        let asm = assemble(&self.model).or_else(|e| runtime(format!("eigen: {e}")))?;
        let modal = solve_periods(&asm.k, &asm.m, n as usize).or_else(|e| runtime(format!("eigen: {e}")))?;
        self.modal = Some(modal);
        Ok(())
    }

    fn report_period(&mut self) -> Step {
        let Some(modal) = &self.modal else {
            return runtime("reportPeriod: no eigen results available");
        };
        let t1 = modal.fundamental();
        self.t_pred = Some(t1);
        self.report.push(format!("T1 = {t1:.6} s"));
        Ok(())
    }
}

fn arity(name: &str, args: &[Literal], n: usize) -> Step {
    if args.len() == n {
        Ok(())
    } else {
        runtime(format!("{name}: expected {n} arguments, found {}", args.len()))
    }
}

fn int(name: &str, args: &[Literal], i: usize) -> Step<i64> {
    match args.get(i).and_then(Literal::as_int) {
        Some(v) => Ok(v),
        None => runtime(format!("{name}: argument {} must be an integer", i + 1)),
    }
}

fn num(name: &str, args: &[Literal], i: usize) -> Step<f64> {
    match args.get(i).and_then(Literal::as_f64) {
        Some(v) => Ok(v),
        None => runtime(format!("{name}: argument {} must be a number", i + 1)),
    }
}
