//! `smw`: command-line front end for the smw library.
//!
//! Exit status 0 means success or a positive answer, 1 a negative answer and
//! 2 an input error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smw::bands::{band_to_text, theta_band, trapezium, trapezium_to_text, verify_band, verify_trapezium, BandError};
use smw::derive::{
    accept_bfs, bar_conjugated_insertion, derivation_history, insertion_history, trace_history,
    DerivationStep,
};
use smw::h2::x_words_conjugate;
use smw::hardware::{sigma_w, sigma_w_bar, AdmissibleWord, EEPresentation, Flavor, Hardware};
use smw::presentation::{emit, RelatorIndex};
use smw::smachine::{brief_history, build_machine, is_historical_form, Machine, Trace};
use smw::symbol::{parse_history, parse_rule, parse_word, Family, RuleId};
use smw::words::{enumerate_pairings, find_minus_pairing, CyclicWord, DyckPairing, Letter, Word};

#[derive(Parser)]
#[command(name = "smw", version, about = "S-machine simulator, relation compiler and diagram verifier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct HardwareArgs {
    /// Auxiliary presentation file.
    #[arg(long)]
    ee: PathBuf,
    /// Number of blocks of the base word.
    #[arg(long, default_value_t = 8)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FlavorArg {
    Strict,
    Bar,
    Mixed,
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Flavor {
        match f {
            FlavorArg::Strict => Flavor::Strict,
            FlavorArg::Bar => Flavor::Bar,
            FlavorArg::Mixed => Flavor::Mixed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit the finite presentation.
    Present {
        #[command(flatten)]
        hw: HardwareArgs,
        /// Write the presentation to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print per-kind relator counts.
        #[arg(long)]
        stats: bool,
    },
    /// Run a history, or a random walk, from an admissible word.
    Run {
        #[command(flatten)]
        hw: HardwareArgs,
        /// Admissible word, inline or a file name.
        #[arg(long)]
        word: String,
        /// History, inline or a file name.
        #[arg(long, conflicts_with = "walk")]
        history: Option<String>,
        /// Take this many random applicable rules instead of a history.
        #[arg(long)]
        walk: Option<usize>,
        /// Seed of the random walk; SMW_SEED is used when absent.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "strict")]
        flavor: FlavorArg,
    },
    /// Histories realizing derivation steps.
    Derive {
        #[command(subcommand)]
        command: DeriveCommand,
    },
    /// Bounded search for a computation ending at a Σ word.
    Accept {
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 12)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "strict")]
        flavor: FlavorArg,
    },
    /// Build the θ-band of one rule over an admissible word.
    Band {
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long)]
        word: String,
        #[arg(long)]
        rule: String,
        #[arg(long)]
        verify: bool,
    },
    /// Build the trapezium of a bar computation.
    Trapezium {
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long)]
        word: String,
        #[arg(long)]
        history: String,
        #[arg(long)]
        verify: bool,
    },
    /// Cancellation pairings of a cyclic word over named letters.
    Dyck {
        /// Letters such as `a b^-1`, inline or a file name.
        #[arg(long)]
        word: String,
        /// Search for a minus pairing only.
        #[arg(long)]
        minus: bool,
        #[arg(long, default_value_t = 16)]
        limit: usize,
    },
    /// Brief history of a history.
    Brief {
        #[arg(long)]
        history: String,
    },
    /// Decide conjugacy of two cyclically reduced x-words.
    Xconj {
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long)]
        w1: String,
        #[arg(long)]
        w2: String,
    },
    /// Sizes of the hardware, machines and presentation.
    Stats {
        #[command(flatten)]
        hw: HardwareArgs,
    },
}

#[derive(Subcommand)]
enum DeriveCommand {
    /// Insert or delete one relator.
    Insert {
        #[command(flatten)]
        hw: HardwareArgs,
        /// Word over the generators, e.g. `a1 a2`.
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = 0)]
        pos: usize,
        /// Relator reference, e.g. `r2`.
        #[arg(long)]
        relator: String,
        #[arg(long, conflicts_with = "bar")]
        delete: bool,
        /// Conjugated insertion in the bar machine.
        #[arg(long)]
        bar: bool,
        #[arg(long, requires = "bar")]
        conjugator: Option<String>,
        /// Also print the trace.
        #[arg(long)]
        verify: bool,
    },
    /// A chain of steps `+POS:rK` (insert) or `-POS:rK` (delete).
    Chain {
        #[command(flatten)]
        hw: HardwareArgs,
        #[arg(long)]
        word: String,
        #[arg(long = "step", required = true, allow_hyphen_values = true)]
        steps: Vec<String>,
        #[arg(long)]
        verify: bool,
    },
}

/// Result of a command that ran to completion.
struct Answer {
    output: String,
    positive: bool,
}

impl Answer {
    fn yes(output: String) -> Answer {
        Answer { output, positive: true }
    }

    fn no(output: String) -> Answer {
        Answer { output, positive: false }
    }
}

/// Reads `arg` as a file when such a file exists, else takes it literally.
fn inline_or_file(arg: &str) -> Result<String> {
    let path = Path::new(arg);
    if path.is_file() {
        std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_string())
    }
}

fn load_hardware(args: &HardwareArgs) -> Result<Hardware> {
    let ee = EEPresentation::load(&args.ee)?;
    Ok(Hardware::new(ee, args.n)?)
}

fn parse_admissible_arg(m: &Machine, arg: &str) -> Result<AdmissibleWord> {
    let w = parse_word(&inline_or_file(arg)?)?;
    Ok(m.parse(&w)?)
}

fn parse_relator_ref(s: &str) -> Result<u16> {
    let digits = s.strip_prefix('r').unwrap_or(s);
    digits
        .parse()
        .map_err(|_| anyhow!("expected a relator reference such as r2, found `{s}`"))
}

fn seed(explicit: Option<u64>) -> Result<u64> {
    if let Some(s) = explicit {
        return Ok(s);
    }
    match std::env::var("SMW_SEED") {
        Ok(v) => v.trim().parse().with_context(|| format!("SMW_SEED={v} is not a number")),
        Err(_) => Ok(0),
    }
}

fn trace_text(hw: &Hardware, trace: &Trace) -> String {
    let mut s = String::new();
    for (t, w) in trace.words.iter().enumerate() {
        writeln!(s, "{t}: {}", w.display(hw)).expect("write to string");
    }
    s
}

fn history_lines(h: &[RuleId]) -> String {
    h.iter().map(|r| format!("{r}\n")).collect()
}

fn present(args: &HardwareArgs, out: Option<&Path>, stats: bool) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let mut p = emit(&hw);
    p.ee_file = Some(args.ee.display().to_string());
    if let Some(path) = out {
        std::fs::write(path, p.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    let output = if stats {
        p.stats_report()
    } else if out.is_none() {
        p.to_text()
    } else {
        String::new()
    };
    Ok(Answer::yes(output))
}

fn run(
    args: &HardwareArgs,
    word: &str,
    history: Option<&str>,
    walk: Option<usize>,
    seed_arg: Option<u64>,
    flavor: Flavor,
) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let m = build_machine(&hw, flavor);
    let start = parse_admissible_arg(&m, word)?;
    let h = match (history, walk) {
        (Some(h), _) => parse_history(&inline_or_file(h)?)?,
        (None, Some(steps)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed(seed_arg)?);
            let mut cur = start.clone();
            let mut h: Vec<RuleId> = Vec::new();
            for _ in 0..steps {
                let options: Vec<RuleId> = m
                    .applicable_rules(&cur)
                    .into_iter()
                    .filter(|&id| h.last() != Some(&id.inv()))
                    .collect();
                let Some(&id) = options.choose(&mut rng) else {
                    break;
                };
                cur = m.apply(id, &cur)?;
                h.push(id);
            }
            h
        }
        (None, None) => bail!("give --history or --walk"),
    };
    let trace = m.run(&start, &h);
    let mut out = String::new();
    if walk.is_some() {
        writeln!(out, "history: {}", smw::smachine::history_to_string(&h))?;
    }
    out.push_str(&trace_text(&hw, &trace));
    Ok(match &trace.failure {
        None => Answer::yes(out),
        Some((t, d)) => {
            writeln!(out, "step {t} ({}): {d}", h[*t])?;
            Answer::no(out)
        }
    })
}

fn generator_word(arg: &str) -> Result<Word> {
    let w = parse_word(&inline_or_file(arg)?)?;
    if !w.letters().iter().all(|l| matches!(l.sym, smw::symbol::Symbol::Gen(_))) {
        bail!("expected a word over the generators, such as `a1 a2^-1`");
    }
    Ok(w)
}

struct InsertArgs<'a> {
    word: &'a str,
    pos: usize,
    relator: &'a str,
    delete: bool,
    bar: bool,
    conjugator: Option<&'a str>,
    verify: bool,
}

fn derive_insert(args: &HardwareArgs, a: InsertArgs<'_>) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let w = generator_word(a.word)?;
    let rel = parse_relator_ref(a.relator)?;
    let (h, start, m) = if a.bar {
        let u = match a.conjugator {
            Some(c) => generator_word(c)?,
            None => Word::new(),
        };
        let h = bar_conjugated_insertion(&hw, &w, &u, rel)?;
        (h, sigma_w_bar(&hw, &w)?, build_machine(&hw, Flavor::Bar))
    } else {
        let h = insertion_history(&hw, &w, a.pos, rel, a.delete)?;
        (h, sigma_w(&hw, &w)?, build_machine(&hw, Flavor::Strict))
    };
    let mut out = history_lines(&h);
    if !a.verify {
        return Ok(Answer::yes(out));
    }
    let trace = m.run(&start, &h);
    out.push('\n');
    out.push_str(&trace_text(&hw, &trace));
    Ok(if trace.is_complete() {
        Answer::yes(out)
    } else {
        Answer::no(out)
    })
}

fn parse_step(s: &str) -> Result<DerivationStep> {
    let bad = || anyhow!("expected a step such as +1:r2 or -0:r1, found `{s}`");
    let (delete, rest) = match s.chars().next() {
        Some('+') => (false, &s[1..]),
        Some('-') => (true, &s[1..]),
        _ => return Err(bad()),
    };
    let (pos, rel) = rest.split_once(':').ok_or_else(bad)?;
    Ok(DerivationStep {
        delete,
        pos: pos.parse().map_err(|_| bad())?,
        rel: parse_relator_ref(rel)?,
    })
}

fn derive_chain(args: &HardwareArgs, word: &str, steps: &[String], verify: bool) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let w0 = generator_word(word)?;
    let steps: Vec<DerivationStep> = steps.iter().map(|s| parse_step(s)).collect::<Result<_>>()?;
    let (h, end) = derivation_history(&hw, &w0, &steps)?;
    let mut out = history_lines(&h);
    writeln!(out, "\nfinal word: {end}")?;
    if !verify {
        return Ok(Answer::yes(out));
    }
    let m = build_machine(&hw, Flavor::Strict);
    let trace = m.run(&sigma_w(&hw, &w0)?, &h);
    out.push('\n');
    out.push_str(&trace_text(&hw, &trace));
    let reached = trace.is_complete() && *trace.last() == sigma_w(&hw, &end)?;
    Ok(if reached { Answer::yes(out) } else { Answer::no(out) })
}

fn accept(args: &HardwareArgs, word: &str, max_steps: usize, flavor: Flavor) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let m = build_machine(&hw, flavor);
    let w = parse_admissible_arg(&m, word)?;
    Ok(match accept_bfs(&m, &w, max_steps) {
        Some(trace) => {
            let mut out = format!("history: {}\n", smw::smachine::history_to_string(&trace_history(&m, &trace)));
            out.push_str(&trace_text(&hw, &trace));
            Answer::yes(out)
        }
        None => Answer::no(format!("no accepting computation within {max_steps} steps\n")),
    })
}

fn band(args: &HardwareArgs, word: &str, rule: &str, verify: bool) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let rule = parse_rule(rule)?;
    let m = build_machine(&hw, if rule.bar { Flavor::Bar } else { Flavor::Strict });
    let w = parse_admissible_arg(&m, word)?;
    let p = RelatorIndex::new(emit(&hw));
    let band = match theta_band(&p, &m, &w, rule) {
        Ok(b) => b,
        Err(e @ BandError::NotApplicable { .. }) => return Ok(Answer::no(format!("{e}\n"))),
        Err(e) => return Err(e.into()),
    };
    let mut out = band_to_text(&band, 0);
    if !verify {
        return Ok(Answer::yes(out));
    }
    let report = verify_band(&p, &hw, &band, 0);
    Ok(verdict(&mut out, report.iter().map(ToString::to_string).collect()))
}

fn verdict(out: &mut String, issues: Vec<String>) -> Answer {
    if issues.is_empty() {
        out.push_str("verified: ok\n");
        return Answer::yes(std::mem::take(out));
    }
    for i in &issues {
        out.push_str(&format!("violation: {i}\n"));
    }
    out.push_str(&format!("verified: {} violations\n", issues.len()));
    Answer::no(std::mem::take(out))
}

fn trapezium_cmd(args: &HardwareArgs, word: &str, history: &str, verify: bool) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let m = build_machine(&hw, Flavor::Bar);
    let w = parse_admissible_arg(&m, word)?;
    let h = parse_history(&inline_or_file(history)?)?;
    let p = RelatorIndex::new(emit(&hw));
    let t = match trapezium(&p, &m, &w, &h) {
        Ok(t) => t,
        Err(e @ (BandError::StepNotApplicable { .. } | BandError::OpenFlank(_))) => {
            return Ok(Answer::no(format!("{e}\n")))
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = trapezium_to_text(&t);
    if !verify {
        return Ok(Answer::yes(out));
    }
    let report = verify_trapezium(&p, &m, &t);
    Ok(verdict(&mut out, report.iter().map(ToString::to_string).collect()))
}

fn named_word(text: &str) -> Result<Word<String>> {
    text.split_whitespace()
        .map(|tok| {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                bail!("malformed letter `{tok}`");
            }
            Ok(Letter {
                sym: name.to_string(),
                inv,
            })
        })
        .collect()
}

fn letter_text(l: &Letter<String>) -> String {
    if l.inv {
        format!("{}^-1", l.sym)
    } else {
        l.sym.clone()
    }
}

/// The canonical rotation with `(` before each opening letter and `)` after
/// each closing letter.
fn parenthesized(w: &CyclicWord<String>, p: &DyckPairing) -> String {
    let n = w.len();
    let mut open = vec![false; n];
    let mut close = vec![false; n];
    for &(o, c) in p.pairs() {
        open[o] = true;
        close[c] = true;
    }
    let mut s = String::new();
    for (k, l) in w.letters().iter().enumerate() {
        if open[k] {
            s.push('(');
        }
        s.push_str(&letter_text(l));
        if close[k] {
            s.push(')');
        }
        if k + 1 < n {
            s.push(' ');
        }
    }
    s
}

fn dyck(word: &str, minus: bool, limit: usize) -> Result<Answer> {
    let w = CyclicWord::new(&named_word(&inline_or_file(word)?)?);
    let rendered: Vec<String> = w.letters().iter().map(letter_text).collect();
    let mut out = format!("word: {}\n", rendered.join(" "));
    if !w.is_dyck() {
        out.push_str("not a Dyck word\n");
        return Ok(Answer::no(out));
    }
    if minus {
        return Ok(match find_minus_pairing(&w) {
            Some(p) => {
                writeln!(out, "minus pairing: {}", parenthesized(&w, &p))?;
                Answer::yes(out)
            }
            None => {
                out.push_str("no minus pairing\n");
                Answer::no(out)
            }
        });
    }
    let pairings = enumerate_pairings(&w, limit);
    for (k, p) in pairings.iter().enumerate() {
        writeln!(out, "pairing {k}: {}", parenthesized(&w, p))?;
    }
    writeln!(out, "{} pairings (limit {limit})", pairings.len())?;
    Ok(Answer::yes(out))
}

fn brief(history: &str) -> Result<Answer> {
    let h = parse_history(&inline_or_file(history)?)?;
    let b = brief_history(&h);
    let historical = is_historical_form(&b);
    let out = format!("{b}\nhistorical form: {}\n", if historical { "yes" } else { "no" });
    Ok(if historical { Answer::yes(out) } else { Answer::no(out) })
}

fn xconj(args: &HardwareArgs, w1: &str, w2: &str) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let w1 = parse_word(&inline_or_file(w1)?)?;
    let w2 = parse_word(&inline_or_file(w2)?)?;
    Ok(match x_words_conjugate(&hw, &w1, &w2)? {
        Some(witness) => Answer::yes(format!("conjugate: {witness}\n")),
        None => Answer::no("not conjugate\n".to_string()),
    })
}

fn stats(args: &HardwareArgs) -> Result<Answer> {
    let hw = load_hardware(args)?;
    let ee = hw.ee();
    let mut out = String::new();
    writeln!(out, "generators {}", ee.mbar())?;
    writeln!(out, "embedded generators {}", ee.m())?;
    writeln!(out, "relators {}", ee.relator_count())?;
    writeln!(out, "blocks {}", hw.n())?;
    writeln!(out, "base length {}", hw.period())?;
    let strict = build_machine(&hw, Flavor::Strict);
    for family in Family::ALL {
        let count = strict.positive_rules().filter(|r| r.key.family == family).count();
        writeln!(out, "rules ({family}) {count}")?;
    }
    for flavor in [Flavor::Strict, Flavor::Bar, Flavor::Mixed] {
        let m = build_machine(&hw, flavor);
        writeln!(out, "positive rules {flavor} {}", m.positive_rules().count())?;
    }
    let p = emit(&hw);
    writeln!(out, "presentation generators {}", p.inventory().len())?;
    out.push_str(&p.stats_report());
    Ok(Answer::yes(out))
}

fn dispatch(cli: Cli) -> Result<Answer> {
    match cli.command {
        Command::Present { hw, out, stats } => present(&hw, out.as_deref(), stats),
        Command::Run {
            hw,
            word,
            history,
            walk,
            seed,
            flavor,
        } => run(&hw, &word, history.as_deref(), walk, seed, flavor.into()),
        Command::Derive { command } => match command {
            DeriveCommand::Insert {
                hw,
                word,
                pos,
                relator,
                delete,
                bar,
                conjugator,
                verify,
            } => derive_insert(
                &hw,
                InsertArgs {
                    word: &word,
                    pos,
                    relator: &relator,
                    delete,
                    bar,
                    conjugator: conjugator.as_deref(),
                    verify,
                },
            ),
            DeriveCommand::Chain {
                hw,
                word,
                steps,
                verify,
            } => derive_chain(&hw, &word, &steps, verify),
        },
        Command::Accept {
            hw,
            word,
            max_steps,
            flavor,
        } => accept(&hw, &word, max_steps, flavor.into()),
        Command::Band { hw, word, rule, verify } => band(&hw, &word, &rule, verify),
        Command::Trapezium {
            hw,
            word,
            history,
            verify,
        } => trapezium_cmd(&hw, &word, &history, verify),
        Command::Dyck { word, minus, limit } => dyck(&word, minus, limit),
        Command::Brief { history } => brief(&history),
        Command::Xconj { hw, w1, w2 } => xconj(&hw, &w1, &w2),
        Command::Stats { hw } => stats(&hw),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(answer) => {
            print!("{}", answer.output);
            if answer.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
