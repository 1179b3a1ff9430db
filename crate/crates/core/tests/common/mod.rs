#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spc_core::bench::{generate_cases, EvalCase};
use spc_core::kernel::EmpiricalPeriod;
use spc_core::templates::{render_code, TemplateKind};

pub fn cases(count: usize, seed: u64) -> Vec<EvalCase> {
    generate_cases(count, seed, &EmpiricalPeriod::default())
}

const JUNK_LINES: [&str; 10] = [
    "node",
    "element elasticBeamColumn 99 1 2",
    "foo 1 2 3",
    "eigen -3",
    "analyze x",
    "fix 1 2 2 2",
    "mass 11 -5 0 0",
    "print \"",
    "uniaxialMaterial Steel01 1 2",
    "pattern Plain 9 77",
];

fn mutate_once<R: Rng>(lines: &mut Vec<String>, rng: &mut R) {
    if lines.is_empty() {
        lines.push(JUNK_LINES.choose(rng).unwrap().to_string());
        return;
    }
    let i = rng.gen_range(0..lines.len());
    match rng.gen_range(0..10) {
        0 => {
            lines.remove(i);
        }
        1 => {
            let l = lines[i].clone();
            lines.insert(i, l);
        }
        2 => {
            let j = rng.gen_range(0..lines.len());
            lines.swap(i, j);
        }
        3 => lines.truncate(i),
        4 => {
            let mut toks: Vec<String> = lines[i].split(' ').map(str::to_string).collect();
            let t = rng.gen_range(0..toks.len());
            toks[t] = match rng.gen_range(0..4) {
                0 => "0".into(),
                1 => "-1.5".into(),
                2 => "1e400".into(),
                _ => rng.gen_range(-50..1000).to_string(),
            };
            lines[i] = toks.join(" ");
        }
        5 => lines[i].push('"'),
        6 => lines.insert(i, JUNK_LINES.choose(rng).unwrap().to_string()),
        7 => {
            let pos = rng.gen_range(0..=lines[i].len());
            if lines[i].is_char_boundary(pos) {
                let c = *[b'"', b'#', b'-', b'{', b'\t', b'x', b'9'].choose(rng).unwrap() as char;
                lines[i].insert(pos, c);
            }
        }
        8 => {
            if let Some(rest) = lines[i].split_once(' ').map(|(_, r)| r.to_string()) {
                lines[i] = format!("frobnicate {rest}");
            }
        }
        _ => {
            let n = rng.gen_range(1..40);
            lines[i] = (0..n).map(|_| rng.gen_range(b' '..=b'~') as char).collect();
        }
    }
}

/// Seeded corpus: mutated templates plus a few raw random strings.
pub fn fuzz_corpus(count: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs = cases(8, seed ^ 0x5eed);
    (0..count)
        .map(|_| {
            if rng.gen_bool(0.1) {
                let n = rng.gen_range(0..200);
                return (0..n)
                    .map(|_| *['a', ' ', '\n', '"', '1', '.', '-', 'é', '#', 'e'].choose(&mut rng).unwrap())
                    .collect();
            }
            let case = specs.choose(&mut rng).unwrap();
            let kind = *TemplateKind::ALL.choose(&mut rng).unwrap();
            let mut lines: Vec<String> = render_code(kind, &case.spec, case.t_gt).lines().map(str::to_string).collect();
            for _ in 0..rng.gen_range(1..=3) {
                mutate_once(&mut lines, &mut rng);
            }
            lines.join("\n") + "\n"
        })
        .collect()
}
