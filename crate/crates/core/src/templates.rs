//! Parameterized program generators for a building spec.
//!
//! Every kind renders the same one-bay moment frame; the flawed kinds each
//! seed one specific defect into it.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::building::BuildingSpec;

/// Concrete modulus used by the generated frames, Pa.
pub const FRAME_MODULUS: f64 = 3.0e10;
/// Seismic floor mass per plan area, kg/m².
pub const FLOOR_MASS_DENSITY: f64 = 1000.0;
/// The generated frame targets this fraction of the ground-truth period.
pub const TARGET_PERIOD_RATIO: f64 = 0.95;
/// Modulus divisor of the period-biased variant (period grows by its square root).
pub const BIAS_MODULUS_DIVISOR: f64 = 2.6;
/// Offset added to a node tag to make it dangle.
const DANGLING_OFFSET: i64 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    Correct,
    FormatBroken,
    TierMissing,
    UndefinedTag,
    EigenBeforeMass,
    PeriodBiased,
    UnterminatedString,
}

impl TemplateKind {
    pub const ALL: [TemplateKind; 7] = [
        TemplateKind::Correct,
        TemplateKind::FormatBroken,
        TemplateKind::TierMissing,
        TemplateKind::UndefinedTag,
        TemplateKind::EigenBeforeMass,
        TemplateKind::PeriodBiased,
        TemplateKind::UnterminatedString,
    ];

    pub fn id(self) -> &'static str {
        match self {
            TemplateKind::Correct => "correct",
            TemplateKind::FormatBroken => "format_broken",
            TemplateKind::TierMissing => "tier_missing",
            TemplateKind::UndefinedTag => "undefined_tag",
            TemplateKind::EigenBeforeMass => "eigen_before_mass",
            TemplateKind::PeriodBiased => "period_biased",
            TemplateKind::UnterminatedString => "unterminated_string",
        }
    }

    pub fn from_id(id: &str) -> Option<TemplateKind> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&k| k == self).expect("listed")
    }
}

impl std::fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

const THINK_PHRASES: [&str; 4] = [
    "Plan a one-bay frame, lump floor masses at the beams, then run eigen and the drift check.",
    "Size the columns story by story so the first mode matches the code period.",
    "Build nodes and supports first, assign masses, then elements, loads and the analysis.",
    "Use elastic beam-columns with rigid beams; report T1 and the drift verdict.",
];

fn num(x: f64) -> String {
    format!("{x:.6e}")
}

fn node_tag(level: u32, column: u32) -> i64 {
    if level == 0 {
        column as i64
    } else {
        10 * level as i64 + column as i64
    }
}

/// Section of each generated frame story: column inertia and area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StorySection {
    pub column_i: f64,
    pub column_a: f64,
}

/// Floor mass of one level, kg.
pub fn floor_mass(spec: &BuildingSpec) -> f64 {
    FLOOR_MASS_DENSITY * spec.plan_area()
}

/// Column sections sized so that a shear-building idealization with linear
/// first mode has period `TARGET_PERIOD_RATIO · t_gt`.
pub fn story_sections(spec: &BuildingSpec, t_gt: f64, modulus: f64) -> Vec<StorySection> {
    let n = spec.stories;
    let h = spec.story_height;
    let omega = 2.0 * PI / (TARGET_PERIOD_RATIO * t_gt);
    let kappa = floor_mass(spec) * omega * omega;
    (1..=n)
        .map(|j| {
            let s: u32 = (j..=n).sum();
            let story_k = kappa * s as f64;
            let column_i = story_k * h.powi(3) / (24.0 * modulus);
            let b = (12.0 * column_i).powf(0.25);
            StorySection { column_i, column_a: b * b }
        })
        .collect()
}

struct Frame {
    lines: Vec<String>,
    mass_lines: std::ops::Range<usize>,
    eigen_lines: std::ops::Range<usize>,
    solver_lines: std::ops::Range<usize>,
    last_column: usize,
}

fn build_frame(spec: &BuildingSpec, t_gt: f64, modulus: f64) -> Frame {
    let n = spec.stories;
    let h = spec.story_height;
    let sections = story_sections(spec, t_gt, FRAME_MODULUS);
    let max_i = sections.iter().map(|s| s.column_i).fold(0.0, f64::max);
    let bay = spec.plan_length;
    let beam_i = 1.0e3 * max_i * (bay / h);
    let half_mass = 0.5 * floor_mass(spec);

    let mut lines = vec![
        format!(
            "# {} building, {} stories at {:.2} m, plan {:.1} x {:.1} m",
            spec.function.name(),
            n,
            h,
            spec.plan_length,
            spec.plan_width
        ),
        "model basic -ndm 2 -ndf 3".to_string(),
    ];
    for level in 0..=n {
        for column in 1..=2 {
            let x = if column == 1 { 0.0 } else { bay };
            lines.push(format!("node {} {} {}", node_tag(level, column), num(x), num(level as f64 * h)));
        }
    }
    lines.push("fix 1 1 1 1".into());
    lines.push("fix 2 1 1 1".into());
    let mass_start = lines.len();
    for level in 1..=n {
        for column in 1..=2 {
            lines.push(format!("mass {} {} 0.0 0.0", node_tag(level, column), num(half_mass)));
        }
    }
    let mass_lines = mass_start..lines.len();
    lines.push("geomTransf Linear 1".into());
    lines.push(format!("uniaxialMaterial Elastic 1 {}", num(modulus)));
    let mut tag = 1;
    let mut last_column = 0;
    for (j, sec) in sections.iter().enumerate() {
        let level = j as u32 + 1;
        for column in 1..=2 {
            last_column = lines.len();
            lines.push(format!(
                "element elasticBeamColumn {} {} {} {} {} {} 1",
                tag,
                node_tag(level - 1, column),
                node_tag(level, column),
                num(sec.column_a),
                num(modulus),
                num(sec.column_i)
            ));
            tag += 1;
        }
    }
    for level in 1..=n {
        lines.push(format!(
            "element elasticBeamColumn {} {} {} {} {} {} 1",
            tag,
            node_tag(level, 1),
            node_tag(level, 2),
            num(1.0),
            num(modulus),
            num(beam_i)
        ));
        tag += 1;
    }
    lines.push("timeSeries Linear 1".into());
    lines.push("pattern Plain 1 1".into());
    let total: u32 = (1..=n).sum();
    for level in 1..=n {
        let share = level as f64 / total as f64;
        lines.push(format!("load {} {} 0.0 0.0", node_tag(level, 1), num(share)));
    }
    let eigen_start = lines.len();
    lines.push("eigen 1".into());
    lines.push("reportPeriod".into());
    let eigen_lines = eigen_start..lines.len();
    let solver_start = lines.len();
    lines.extend(
        [
            "system BandGeneral",
            "numberer RCM",
            "constraints Plain",
            "test NormDispIncr 1.0e-8 10",
            "algorithm Linear",
            "integrator LoadControl 1.0",
            "analysis Static",
            "analyze 1",
        ]
        .map(String::from),
    );
    let solver_lines = solver_start..lines.len();
    lines.push("print \"model build and checks complete\"".into());
    Frame {
        lines,
        mass_lines,
        eigen_lines,
        solver_lines,
        last_column,
    }
}

/// Source text of the program a template kind generates (no markdown wrapper).
pub fn render_code(kind: TemplateKind, spec: &BuildingSpec, t_gt: f64) -> String {
    let modulus = match kind {
        TemplateKind::PeriodBiased => FRAME_MODULUS / BIAS_MODULUS_DIVISOR,
        _ => FRAME_MODULUS,
    };
    let frame = build_frame(spec, t_gt, modulus);
    let mut lines = frame.lines.clone();
    match kind {
        TemplateKind::Correct | TemplateKind::FormatBroken | TemplateKind::PeriodBiased => {}
        TemplateKind::TierMissing => {
            lines.drain(frame.solver_lines.clone());
        }
        TemplateKind::UndefinedTag => {
            let line = &mut lines[frame.last_column];
            let mut parts: Vec<String> = line.split(' ').map(String::from).collect();
            let top: i64 = parts[4].parse().expect("node tag");
            parts[4] = (top + DANGLING_OFFSET).to_string();
            *line = parts.join(" ");
        }
        TemplateKind::EigenBeforeMass => {
            let eigen: Vec<String> = lines.drain(frame.eigen_lines.clone()).collect();
            let at = frame.mass_lines.start;
            lines.splice(at..at, eigen);
        }
        TemplateKind::UnterminatedString => {
            lines.push("print \"design summary".into());
        }
    }
    let mut out = lines.join("\n");
    out.push('\n');
    out
}

/// Full raw model output: a reasoning block followed by the fenced program,
/// except for the format-broken kind which omits the fences.
pub fn render_output(kind: TemplateKind, spec: &BuildingSpec, t_gt: f64, seed: u64) -> String {
    let think = THINK_PHRASES[(seed % THINK_PHRASES.len() as u64) as usize];
    let code = render_code(kind, spec, t_gt);
    match kind {
        TemplateKind::FormatBroken => format!("<think>\n{think}\n</think>\n{code}"),
        _ => format!("<think>\n{think}\n</think>\n```mos\n{code}```\n"),
    }
}


#[cfg(test)]
mod sweep {
    use super::*;
    use crate::building::sample_spec;
    use crate::kernel::{empirical_period, EmpiricalPeriod};
    use crate::sandbox::{execute_source, SandboxConfig};

    #[test]
    fn correct_frame_over_parameter_corners() {
        for stories in 3..=7u32 {
            for h in [3.0, 3.5, 4.0] {
                if stories as f64 * h >= 23.0 {
                    continue;
                }
                for (l, w) in [(40.0, 40.0), (100.0, 40.0), (100.0, 100.0)] {
                    let mut spec = sample_spec(stories, h);
                    spec.plan_length = l;
                    spec.plan_width = w;
                    spec.pga = 0.40;
                    let t = empirical_period(&spec, &EmpiricalPeriod::default(), true).unwrap();
                    let out = execute_source(&render_code(TemplateKind::Correct, &spec, t), &SandboxConfig::default().with_pga(0.40));
                    let m = out.metrics().expect("success");
                    let e = (m.t_pred.unwrap() - t).abs() / t;
                    assert!(e < 0.10, "{stories} {h} {l} {w}: eps {e}");
                    assert!(m.compliance_text.contains("drift check: pass"));
                }
            }
        }
    }
}
