//! Interactive shell and batch runner for the credal knowledge base.
//!
//! With `--load` or `--eval` the process runs the given sources in order and
//! exits; otherwise it reads statements and `:`-directives line by line.
//! Answers go to stdout; prompts, warnings, and trace output go to stderr,
//! so piped runs produce clean answer streams.

use std::fs;
use std::io::{self, BufRead, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use credal_core::{
    classify, parse_program_spanned, AllSemantics, ConjunctionMode, DegreeConfig, Effect,
    ImplicationKind, ParseError, Session, Sym, TnormFamily,
};

/// Largest default cluster the shell lets the engine enumerate; extensions
/// are searched over every subset of an interlocked cluster, so this caps
/// the work at 2^20 candidate sets.
const SCC_BOUND_CAP: usize = 20;

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TnormArg {
    Min,
    Product,
    Lukasiewicz,
}

impl From<TnormArg> for TnormFamily {
    fn from(a: TnormArg) -> TnormFamily {
        match a {
            TnormArg::Min => TnormFamily::Min,
            TnormArg::Product => TnormFamily::Product,
            TnormArg::Lukasiewicz => TnormFamily::Lukasiewicz,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ImplicationArg {
    KleeneDienes,
    Goedel,
    Lukasiewicz,
    Goguen,
}

impl From<ImplicationArg> for ImplicationKind {
    fn from(a: ImplicationArg) -> ImplicationKind {
        match a {
            ImplicationArg::KleeneDienes => ImplicationKind::KleeneDienes,
            ImplicationArg::Goedel => ImplicationKind::Goedel,
            ImplicationArg::Lukasiewicz => ImplicationKind::Lukasiewicz,
            ImplicationArg::Goguen => ImplicationKind::Goguen,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum AllArg {
    Implication,
    Possibility,
}

impl From<AllArg> for AllSemantics {
    fn from(a: AllArg) -> AllSemantics {
        match a {
            AllArg::Implication => AllSemantics::Implication,
            AllArg::Possibility => AllSemantics::Possibility,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum ConjunctionArg {
    MinScalar,
    TnormInterval,
}

impl From<ConjunctionArg> for ConjunctionMode {
    fn from(a: ConjunctionArg) -> ConjunctionMode {
        match a {
            ConjunctionArg::MinScalar => ConjunctionMode::MinScalar,
            ConjunctionArg::TnormInterval => ConjunctionMode::TnormInterval,
        }
    }
}

#[derive(Debug, Copy, Clone, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    /// English sentences
    Text,
    /// One space-separated record per line
    Machine,
}

fn threshold_in_open_unit(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err("the threshold must lie strictly between 0 and 1".into())
    }
}

fn bounded_scc(s: &str) -> Result<usize, String> {
    let n: usize = s.parse().map_err(|e| format!("{e}"))?;
    if n <= SCC_BOUND_CAP {
        Ok(n)
    } else {
        Err(format!("the default-cluster bound tops out at {SCC_BOUND_CAP}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "credal", version, about = "A knowledge base that answers with certainty intervals")]
struct Flags {
    /// Knowledge-base file to run before anything else (repeatable)
    #[arg(long = "load", value_name = "FILE")]
    load: Vec<PathBuf>,

    /// Statement to run after the loaded files (repeatable)
    #[arg(long = "eval", value_name = "STMT")]
    eval: Vec<String>,

    /// Conjunction operator for combining certainties
    #[arg(long, value_enum, default_value_t = TnormArg::Min)]
    tnorm: TnormArg,

    /// Implication operator scoring universal role restrictions
    #[arg(long, value_enum, default_value_t = ImplicationArg::KleeneDienes)]
    implication: ImplicationArg,

    /// How universal restrictions are graded
    #[arg(long = "all-semantics", value_enum, default_value_t = AllArg::Implication)]
    all_semantics: AllArg,

    /// How the parts of a definition combine into one degree
    #[arg(long, value_enum, default_value_t = ConjunctionArg::MinScalar)]
    conjunction: ConjunctionArg,

    /// Session firing threshold for default rules that do not declare one
    #[arg(long, value_name = "T", value_parser = threshold_in_open_unit, default_value_t = 0.5)]
    threshold: f64,

    /// Largest cluster of interlocked default rules to evaluate exactly
    #[arg(long = "scc-bound", value_name = "N", value_parser = bounded_scc, default_value_t = 10)]
    scc_bound: usize,

    /// Echo belief-revision steps to stderr
    #[arg(long)]
    trace: bool,

    /// Answer format
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,

    /// Stop at the first error instead of carrying on
    #[arg(long)]
    strict: bool,
}

#[derive(Debug, Copy, Clone)]
struct SessionConfig {
    degrees: DegreeConfig,
    threshold: f64,
    scc_bound: usize,
    trace: bool,
    format: FormatArg,
}

impl From<&Flags> for SessionConfig {
    fn from(f: &Flags) -> SessionConfig {
        SessionConfig {
            degrees: DegreeConfig {
                tnorm: f.tnorm.into(),
                implication: f.implication.into(),
                all_semantics: f.all_semantics.into(),
                conjunction: f.conjunction.into(),
            },
            threshold: f.threshold,
            scc_bound: f.scc_bound,
            trace: f.trace,
            format: f.format,
        }
    }
}

enum Flow {
    Continue,
    Quit,
}

struct Shell {
    session: Session,
    config: SessionConfig,
    /// The command-line configuration, restored by `:reset`.
    startup: SessionConfig,
}

impl Shell {
    fn new(config: SessionConfig) -> Shell {
        Shell {
            session: Session::new(config.degrees, config.scc_bound),
            config,
            startup: config,
        }
    }

    fn emit_effects(&self, effects: &[Effect]) {
        for effect in effects {
            match effect {
                Effect::Answer(a) => match self.config.format {
                    FormatArg::Text => println!("{}", a.prose()),
                    FormatArg::Machine => println!("{}", a.machine()),
                },
                Effect::Warning(w) => eprintln!("warning: {w}"),
                Effect::Diagnostic(d) => eprintln!("diagnostic: {d}"),
                other => {
                    if self.config.trace {
                        eprintln!("trace: {other}");
                    }
                }
            }
        }
    }

    fn report_parse(&self, origin: Option<&str>, e: &ParseError) {
        match origin {
            Some(o) => eprintln!("{o}:{e}"),
            None => eprintln!("error: {e}"),
        }
    }

    /// Run every statement in `src`. Diagnostics carry `origin:line` when an
    /// origin is given. Returns false if anything failed; with `stop_early`
    /// the first failure also stops execution.
    fn exec_source(&mut self, src: &str, origin: Option<&str>, stop_early: bool) -> bool {
        let spanned = match parse_program_spanned(src) {
            Ok(s) => s,
            Err(e) => {
                self.report_parse(origin, &e);
                return false;
            }
        };
        let mut ok = true;
        for (line, stmt) in spanned {
            match self.session.execute(stmt) {
                Ok(effects) => self.emit_effects(&effects),
                Err(e) => {
                    match origin {
                        Some(o) => eprintln!("{o}:{line}: error: {e}"),
                        None => eprintln!("error: {e}"),
                    }
                    ok = false;
                    if stop_early {
                        return false;
                    }
                }
            }
        }
        ok
    }

    fn load_file(&mut self, path: &Path, stop_early: bool) -> bool {
        let origin = path.display().to_string();
        match fs::read_to_string(path) {
            Ok(src) => self.exec_source(&src, Some(&origin), stop_early),
            Err(e) => {
                eprintln!("error: {origin}: {e}");
                false
            }
        }
    }

    fn set_key(&mut self, key: &str, value: &str) -> Result<(), String> {
        let mut cfg = self.config;
        match key {
            "tnorm" => cfg.degrees.tnorm = TnormArg::from_str(value, true)?.into(),
            "implication" => cfg.degrees.implication = ImplicationArg::from_str(value, true)?.into(),
            "all-semantics" => cfg.degrees.all_semantics = AllArg::from_str(value, true)?.into(),
            "conjunction" => cfg.degrees.conjunction = ConjunctionArg::from_str(value, true)?.into(),
            "threshold" => cfg.threshold = threshold_in_open_unit(value)?,
            "scc-bound" => cfg.scc_bound = bounded_scc(value)?,
            "format" => cfg.format = FormatArg::from_str(value, true)?,
            "trace" => cfg.trace = on_or_off(value)?,
            _ => return Err(format!("unknown setting `{key}`")),
        }
        let recompute = cfg.degrees != self.config.degrees || cfg.scc_bound != self.config.scc_bound;
        self.config = cfg;
        if recompute {
            // operators changed, so every derived degree is stale
            let effects = self
                .session
                .set_config(cfg.degrees, cfg.scc_bound)
                .map_err(|e| e.to_string())?;
            self.emit_effects(&effects);
        }
        Ok(())
    }

    fn print_facts(&self, instance: Option<&str>) {
        let instance = instance.map(Sym::from);
        for fact in self.session.facts(instance.as_ref()) {
            match self.config.format {
                FormatArg::Text => {
                    println!("{} {} {}", fact.literal, fact.certainty, fact.provenance)
                }
                FormatArg::Machine => println!(
                    "{} {} {} {}",
                    fact.literal,
                    fact.certainty.lower(),
                    fact.certainty.upper(),
                    fact.provenance
                ),
            }
        }
    }

    fn directive(&mut self, rest: &str) -> Flow {
        let mut parts = rest.split_whitespace();
        let head = parts.next().unwrap_or("");
        let args: Vec<&str> = parts.collect();
        match (head, args.as_slice()) {
            ("quit", []) => return Flow::Quit,
            ("load", [path]) => {
                self.load_file(Path::new(path), false);
            }
            ("taxonomy", []) => {
                let taxonomy = classify(self.session.tbox());
                let rendered = match self.config.format {
                    FormatArg::Text => taxonomy.render_tree(),
                    FormatArg::Machine => taxonomy.render_edges(),
                };
                print!("{rendered}");
            }
            ("facts", []) => self.print_facts(None),
            ("facts", [instance]) => self.print_facts(Some(instance)),
            ("trace", [flag]) => match on_or_off(flag) {
                Ok(on) => self.config.trace = on,
                Err(e) => eprintln!("error: {e}"),
            },
            ("set", [key, value]) => {
                if let Err(e) = self.set_key(key, value) {
                    eprintln!("error: {e}");
                }
            }
            ("reset", []) => {
                self.config = self.startup;
                self.session = Session::new(self.startup.degrees, self.startup.scc_bound);
            }
            ("quit" | "load" | "taxonomy" | "facts" | "trace" | "set" | "reset", _) => {
                eprintln!("error: wrong arguments for `:{head}`");
            }
            _ => eprintln!("error: unknown directive `:{head}`"),
        }
        Flow::Continue
    }
}

fn on_or_off(value: &str) -> Result<bool, String> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        other => Err(format!("expected `on` or `off`, got `{other}`")),
    }
}

fn repl(shell: &mut Shell) -> ExitCode {
    let stdin = io::stdin();
    let interactive = stdin.is_terminal();
    let mut lines = stdin.lock().lines();
    loop {
        if interactive {
            eprint!("credal> ");
            let _ = io::stderr().flush();
        }
        let line = match lines.next() {
            Some(Ok(line)) => line,
            Some(Err(e)) => {
                eprintln!("error: {e}");
                break;
            }
            None => break,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix(':') {
            match shell.directive(rest) {
                Flow::Quit => break,
                Flow::Continue => {}
            }
        } else {
            shell.exec_source(&line, None, false);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let flags = Flags::parse();
    let config = SessionConfig::from(&flags);
    let mut shell = Shell::new(config);

    if flags.load.is_empty() && flags.eval.is_empty() {
        return repl(&mut shell);
    }

    let mut ok = true;
    for path in &flags.load {
        ok &= shell.load_file(path, flags.strict);
        if flags.strict && !ok {
            return ExitCode::from(1);
        }
    }
    for src in &flags.eval {
        ok &= shell.exec_source(src, Some("eval"), flags.strict);
        if flags.strict && !ok {
            return ExitCode::from(1);
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
