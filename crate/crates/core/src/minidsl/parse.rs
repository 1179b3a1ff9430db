use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use super::vocab::is_registered;
use super::{count_lines, Command, Diagnostic, Literal, Program, TagKind, TagRef};

#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize)]
#[error("line {line}: {message}")]
pub struct ParseFailure {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Unknown commands are kept and reported as diagnostics.
    #[default]
    Lenient,
    /// Unknown commands are a parse failure.
    Strict,
}

/// Lenient parse that stops at the first malformed line.
pub fn parse(source: &str) -> Result<Program, ParseFailure> {
    parse_with(source, ParseMode::Lenient)
}

pub fn parse_with(source: &str, mode: ParseMode) -> Result<Program, ParseFailure> {
    let mut builder = Builder::new(source);
    for (idx, text) in source.lines().enumerate() {
        builder.line(idx + 1, text, mode)?;
    }
    Ok(builder.finish())
}

/// Lenient parse that skips malformed lines instead of failing, returning every
/// failure alongside the program built from the lines that did parse. Static
/// scoring uses this so that a candidate with one broken line still earns
/// coverage for the rest.
pub fn parse_recovering(source: &str) -> (Program, Vec<ParseFailure>) {
    let mut builder = Builder::new(source);
    let mut failures = Vec::new();
    for (idx, text) in source.lines().enumerate() {
        if let Err(f) = builder.line(idx + 1, text, ParseMode::Lenient) {
            failures.push(f);
        }
    }
    (builder.finish(), failures)
}

struct Builder<'a> {
    source: &'a str,
    commands: Vec<Command>,
    var_defs: BTreeMap<TagRef, usize>,
    var_uses: Vec<(TagRef, usize)>,
    diagnostics: Vec<Diagnostic>,
}

impl<'a> Builder<'a> {
    fn new(source: &'a str) -> Self {
        Self {
            source,
            commands: Vec::new(),
            var_defs: BTreeMap::new(),
            var_uses: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    fn line(&mut self, line: usize, text: &str, mode: ParseMode) -> Result<(), ParseFailure> {
        let fail = |message: String| ParseFailure { line, message };
        let tokens = tokenize(text).map_err(fail)?;
        let Some((head, rest)) = tokens.split_first() else {
            return Ok(());
        };
        let name = match head {
            Literal::Ident(s) if s.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_') => {
                s.clone()
            }
            other => return Err(fail(format!("expected a command name, found '{other}'"))),
        };
        let args = rest.to_vec();
        if is_registered(&name) {
            check_arg_types(&name, &args).map_err(fail)?;
        } else {
            match mode {
                ParseMode::Strict => return Err(fail(format!("unknown command '{name}'"))),
                ParseMode::Lenient => self.diagnostics.push(Diagnostic::UnknownCommand {
                    line,
                    name: name.clone(),
                }),
            }
        }
        let cmd = Command { name, args, line };
        self.record_tags(&cmd);
        self.commands.push(cmd);
        Ok(())
    }

    fn record_tags(&mut self, cmd: &Command) {
        let (defs, uses) = tag_roles(cmd);
        for def in defs {
            self.var_defs.entry(def).or_insert(cmd.line);
        }
        let mut seen = BTreeSet::new();
        for u in uses {
            if seen.insert(u) {
                self.var_uses.push((u, cmd.line));
            }
        }
    }

    fn finish(self) -> Program {
        Program {
            raw_text: self.source.to_string(),
            commands: self.commands,
            total_lines: count_lines(self.source),
            var_defs: self.var_defs,
            var_uses: self.var_uses,
            diagnostics: self.diagnostics,
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<Literal>, String> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(start, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        if c == '#' {
            break;
        }
        if c == '"' {
            chars.next();
            let mut closed = None;
            for (i, ch) in chars.by_ref() {
                if ch == '"' {
                    closed = Some(i);
                    break;
                }
            }
            match closed {
                Some(end) => out.push(Literal::Str(text[start + 1..end].to_string())),
                None => return Err("unterminated string literal".to_string()),
            }
            continue;
        }
        let mut end = text.len();
        while let Some(&(i, ch)) = chars.peek() {
            if ch.is_whitespace() || ch == '"' || ch == '#' {
                end = i;
                break;
            }
            chars.next();
        }
        out.push(classify(&text[start..end])?);
    }
    Ok(out)
}

fn classify(token: &str) -> Result<Literal, String> {
    if let Ok(v) = token.parse::<i64>() {
        return Ok(Literal::Int(v));
    }
    let numeric_shape = token
        .chars()
        .all(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E' | '+' | '-'))
        && token.chars().any(|c| c.is_ascii_digit());
    if numeric_shape {
        return match token.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Literal::Real(v)),
            Ok(_) => Err(format!("numeric literal '{token}' is out of range")),
            Err(_) => Err(format!("malformed number '{token}'")),
        };
    }
    let body = token.strip_prefix('-').unwrap_or(token);
    let ident_ok = body.starts_with(|c: char| c.is_ascii_alphabetic() || c == '_')
        && body
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'));
    if ident_ok {
        Ok(Literal::Ident(token.to_string()))
    } else {
        Err(format!("invalid token '{token}'"))
    }
}

#[derive(Clone, Copy)]
enum Want {
    Int,
    Num,
    Ident,
    Any,
}

fn check_arg_types(name: &str, args: &[Literal]) -> Result<(), String> {
    use Want::*;
    // Fixed leading positions; the tail (if any) is then checked against `tail`.
    let (head, tail): (&[Want], Want) = match name {
        "model" => (&[Ident], Any),
        "node" => (&[Int, Num, Num], Num),
        "fix" => (&[Int, Int, Int, Int], Int),
        "mass" | "load" => (&[Int, Num, Num, Num], Num),
        "geomTransf" | "timeSeries" => (&[Ident, Int], Any),
        "uniaxialMaterial" => (&[Ident, Int], Num),
        "element" => (&[Ident, Int, Int, Int], Num),
        "pattern" => (&[Ident, Int, Int], Any),
        "system" | "numberer" | "constraints" | "algorithm" | "analysis" => (&[Ident], Any),
        "test" | "integrator" => (&[Ident], Num),
        "analyze" => (&[Int], Any),
        "eigen" => {
            let skip = usize::from(matches!(args.first(), Some(Literal::Ident(_))));
            return check_positions(name, &args[skip..], &[Int], Any, skip);
        }
        _ => (&[], Any),
    };
    if name == "model" {
        // `-ndm 2 -ndf 3`: every value following a flag must be an integer.
        for (i, pair) in args.windows(2).enumerate() {
            if let [Literal::Ident(flag), value] = pair {
                if flag.starts_with('-') && value.as_int().is_none() {
                    return Err(type_error(name, i + 2, "an integer", value));
                }
            }
        }
    }
    if name == "element" {
        // element <type> <tag> <i> <j> <A> <E> <I> <transfTag> | <A> <matTag>
        for (i, arg) in args.iter().enumerate().skip(4) {
            if !arg.is_number() {
                return Err(type_error(name, i + 1, "a number", arg));
            }
        }
    }
    check_positions(name, args, head, tail, 0)
}

fn check_positions(
    name: &str,
    args: &[Literal],
    head: &[Want],
    tail: Want,
    offset: usize,
) -> Result<(), String> {
    for (i, arg) in args.iter().enumerate() {
        let want = head.get(i).copied().unwrap_or(tail);
        let ok = match want {
            Want::Int => matches!(arg, Literal::Int(_)),
            Want::Num => arg.is_number(),
            Want::Ident => matches!(arg, Literal::Ident(_)),
            Want::Any => true,
        };
        if !ok {
            let what = match want {
                Want::Int => "an integer",
                Want::Num => "a number",
                Want::Ident => "an identifier",
                Want::Any => unreachable!(),
            };
            return Err(type_error(name, offset + i + 1, what, arg));
        }
    }
    Ok(())
}

fn type_error(name: &str, position: usize, want: &str, found: &Literal) -> String {
    format!("argument {position} of '{name}' must be {want}, found '{found}'")
}

/// Tags a command defines and tags it references.
pub(crate) fn tag_roles(cmd: &Command) -> (Vec<TagRef>, Vec<TagRef>) {
    let int_at = |i: usize| cmd.args.get(i).and_then(Literal::as_int);
    let tag = |kind, i| int_at(i).map(|tag| TagRef { kind, tag });
    let mut defs = Vec::new();
    let mut uses = Vec::new();
    match cmd.name.as_str() {
        "node" => defs.extend(tag(TagKind::Node, 0)),
        "uniaxialMaterial" => defs.extend(tag(TagKind::Material, 1)),
        "geomTransf" => defs.extend(tag(TagKind::Transform, 1)),
        "timeSeries" => defs.extend(tag(TagKind::Series, 1)),
        "pattern" => {
            defs.extend(tag(TagKind::Pattern, 1));
            uses.extend(tag(TagKind::Series, 2));
        }
        "element" => {
            defs.extend(tag(TagKind::Element, 1));
            uses.extend(tag(TagKind::Node, 2));
            uses.extend(tag(TagKind::Node, 3));
            match cmd.args.first().and_then(Literal::as_ident) {
                Some("truss") => uses.extend(tag(TagKind::Material, 5)),
                Some(_) => uses.extend(tag(TagKind::Transform, 7)),
                None => {}
            }
        }
        "fix" | "mass" | "load" => uses.extend(tag(TagKind::Node, 0)),
        _ => {}
    }
    (defs, uses)
}
