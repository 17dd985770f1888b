//! The `semimarkov` command line.
//!
//! Exit status: 0 on success or a true predicate, 1 when `check-ipg`,
//! `equiv` or `dsep` answer no, 2 on usage, parse or bound errors.

use std::ffi::OsString;
use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::calculus::{closure, completions, is_valid_ipg, Ipg, Mdg};
use crate::construction::{expansions_with_choices, minimal_models};
use crate::equivalence::{
    counterexample_report, mdg_of, pearl_apply, pearl_rule_check, pearl_to_dag, semi_markov_equivalent, MdgMode,
    PearlModel, Rule,
};
use crate::error::{Error, Result};
use crate::graph::{parse_graph, parse_graphs, serialize_graph, Format, MixedGraph};
use crate::model::CausalModel;
use crate::separation::{d_separated, d_separation_signature, ipg_of};
use crate::Bounds;

#[derive(Debug, Parser)]
#[command(name = "semimarkov", version, about = "Inducing path graphs, marginal dependency graphs and minimal models")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output format for graphs.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Native)]
    pub format: OutputFormat,
    /// MDG extraction mode; by default exact below 8 observables.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long, global = true, default_value_t = Bounds::default().max_observables)]
    pub max_observables: usize,
    #[arg(long, global = true, default_value_t = Bounds::default().max_circles)]
    pub max_circles: usize,
    #[arg(long, global = true, default_value_t = Bounds::default().max_vertices)]
    pub max_vertices: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Native,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Tetrad,
    Exact,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Inducing path graph of a causal model.
    Ipg {
        file: String,
        /// Restrict to these observables.
        #[arg(long, value_delimiter = ',')]
        subset: Option<Vec<String>>,
    },
    /// Marginal dependency graph of a causal model.
    Mdg { file: String },
    /// All closed acyclic completions of an MDG.
    Completions { file: String },
    /// Expansions of an IPG with their hidden-edge choices.
    Expansions { file: String },
    /// Minimal models of an IPG.
    Minimal { file: String },
    /// Semi-Markov equivalence of two causal models.
    Equiv { first: String, second: String },
    /// Validity of an IPG under the closure rules.
    CheckIpg { file: String },
    /// Closure of an IPG under the closure rules.
    Closure { file: String },
    /// d-separation of two vertices given others.
    Dsep { file: String, a: String, b: String, given: Vec<String> },
    /// Pearl's edge rules on models with correlated errors.
    Pearl {
        #[command(subcommand)]
        action: PearlAction,
    },
    /// Render graphs as DOT.
    Dot { file: String },
    /// Model to IPG, MDG, completions, expansions and minimal models.
    Pipeline { file: String },
}

#[derive(Debug, Subcommand)]
pub enum PearlAction {
    /// Evaluate the side conditions of a rule on the edge X - Y.
    Check { file: String, x: String, y: String, rule: String },
    /// Apply a rule to the edge X - Y.
    Apply { file: String, x: String, y: String, rule: String },
    /// Replace correlated errors by latent common causes.
    Dag { file: String },
    /// Walk through the rule-2 counterexample.
    Counterexample,
}

/// Exit status and the text destined for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Outcome {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn answer(yes: bool, stdout: String) -> Outcome {
        Outcome { code: if yes { 0 } else { 1 }, stdout, stderr: String::new() }
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli),
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            if code == 0 {
                Outcome::ok(text)
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            }
        }
    }
}

pub fn dispatch(cli: &Cli) -> Outcome {
    match execute(cli) {
        Ok(o) => o,
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

fn read(path: &str) -> Result<String> {
    let text = if path == "-" {
        std::io::read_to_string(std::io::stdin())
    } else {
        std::fs::read_to_string(path)
    };
    text.map_err(|e| Error::pre(format!("cannot read `{path}`: {e}")))
}

fn load(path: &str) -> Result<MixedGraph> {
    parse_graph(&read(path)?)
}

fn load_model(path: &str) -> Result<CausalModel> {
    CausalModel::new(load(path)?)
}

impl Global {
    fn bounds(&self) -> Bounds {
        Bounds {
            max_observables: self.max_observables,
            max_circles: self.max_circles,
            max_vertices: self.max_vertices,
        }
    }

    fn graph_format(&self) -> Format {
        match self.format {
            OutputFormat::Native => Format::Native,
            OutputFormat::Dot => Format::Dot,
        }
    }

    /// Explicit mode, or exact when the model is small enough for it.
    fn mode_for(&self, m: &CausalModel) -> Result<MdgMode> {
        if let Some(mode) = self.mode {
            return Ok(match mode {
                ModeArg::Tetrad => MdgMode::Tetrad,
                ModeArg::Exact => MdgMode::Exact,
            });
        }
        let n = m.observables().count();
        let edges = ipg_of(m, None)?.edges().len();
        Ok(if n < 8 && 2 * edges <= self.max_circles { MdgMode::Exact } else { MdgMode::Tetrad })
    }

    fn emit(&self, out: &mut String, g: &MixedGraph) {
        if !out.is_empty() && self.format == OutputFormat::Native && !out.ends_with("\n\n") {
            out.push('\n');
        }
        out.push_str(&serialize_graph(g, self.graph_format()));
    }

    /// Section heading; a comment in either format.
    fn heading(&self, out: &mut String, title: &str) {
        if !out.is_empty() && !out.ends_with("\n\n") {
            out.push('\n');
        }
        let mark = if self.format == OutputFormat::Dot { "//" } else { "#" };
        let _ = writeln!(out, "{mark} {title}");
    }
}

fn execute(cli: &Cli) -> Result<Outcome> {
    let g = &cli.global;
    let bounds = g.bounds();
    let mut out = String::new();
    match &cli.command {
        Command::Ipg { file, subset } => {
            let m = load_model(file)?;
            let s: Option<Vec<&str>> = subset.as_ref().map(|v| v.iter().map(String::as_str).collect());
            g.emit(&mut out, &*ipg_of(&m, s.as_deref())?);
        }
        Command::Mdg { file } => {
            let m = load_model(file)?;
            g.emit(&mut out, &*mdg_of(&m, g.mode_for(&m)?, &bounds)?);
        }
        Command::Completions { file } => {
            let mdg = Mdg::new(load(file)?)?;
            for c in completions(&mdg, &bounds)? {
                g.emit(&mut out, &c);
            }
        }
        Command::Expansions { file } => {
            let ipg = Ipg::new(load(file)?)?;
            for (choice, m) in expansions_with_choices(&ipg, &bounds)? {
                g.heading(&mut out, &choice.to_string());
                g.emit(&mut out, &m);
            }
        }
        Command::Minimal { file } => {
            let ipg = Ipg::new(load(file)?)?;
            for m in minimal_models(&ipg, &bounds)? {
                g.emit(&mut out, &m);
            }
        }
        Command::Equiv { first, second } => {
            let m1 = load_model(first)?;
            let m2 = load_model(second)?;
            let v = semi_markov_equivalent(&m1, &m2, g.mode_for(&m1)?, &bounds)?;
            match &v.witness {
                None => out.push_str("equivalent\n"),
                Some(w) => {
                    let _ = writeln!(out, "{w} differs");
                }
            }
            let _ = writeln!(out, "mdg agreement: {}", if v.mdg_agreement { "yes" } else { "no" });
            return Ok(Outcome::answer(v.equivalent, out));
        }
        Command::CheckIpg { file } => {
            let d = is_valid_ipg(&load(file)?);
            if d.valid {
                out.push_str("valid\n");
            }
            for v in &d.violations {
                let _ = writeln!(out, "{v}");
            }
            return Ok(Outcome::answer(d.valid, out));
        }
        Command::Closure { file } => {
            g.emit(&mut out, &*closure(&load(file)?)?);
        }
        Command::Dsep { file, a, b, given } => {
            let m = load_model(file)?;
            let w: Vec<&str> = given.iter().map(String::as_str).collect();
            let sep = d_separated(&m, a, b, &w)?;
            let _ = writeln!(
                out,
                "{a} {} {b} | {{{}}}",
                if sep { "_||_" } else { "not _||_" },
                w.join(", ")
            );
            return Ok(Outcome::answer(sep, out));
        }
        Command::Pearl { action } => pearl(g, action, &mut out)?,
        Command::Dot { file } => {
            for graph in parse_graphs(&read(file)?)? {
                out.push_str(&serialize_graph(&graph, Format::Dot));
            }
        }
        Command::Pipeline { file } => pipeline(g, &bounds, &load_model(file)?, &mut out)?,
    }
    Ok(Outcome::ok(out))
}

fn pearl(g: &Global, action: &PearlAction, out: &mut String) -> Result<()> {
    match action {
        PearlAction::Check { file, x, y, rule } => {
            let pm = PearlModel::new(load(file)?)?;
            let ok = pearl_rule_check(&pm, x, y, rule.parse::<Rule>()?)?;
            let _ = writeln!(out, "{ok}");
        }
        PearlAction::Apply { file, x, y, rule } => {
            let pm = PearlModel::new(load(file)?)?;
            g.emit(out, &*pearl_apply(&pm, x, y, rule.parse::<Rule>()?)?);
        }
        PearlAction::Dag { file } => {
            let pm = PearlModel::new(load(file)?)?;
            g.emit(out, &*pearl_to_dag(&pm)?);
        }
        PearlAction::Counterexample => {
            let r = counterexample_report()?;
            g.heading(out, "model with correlated error");
            g.emit(out, &r.before);
            g.heading(out, &format!("rule 2 on C -> D: {}; rule 2p: {}", r.rule2_applies, r.rule2p_applies));
            g.emit(out, &r.after);
            g.heading(out, "IPG before");
            g.emit(out, &r.ipg1);
            g.heading(out, "IPG after");
            g.emit(out, &r.ipg2);
            let pairs = |v: &[(String, String)]| {
                v.iter().map(|(a, b)| format!("{a}-{b}")).collect::<Vec<_>>().join(" ")
            };
            g.heading(out, &format!("adjacencies gained: {}", pairs(&r.gained)));
            g.heading(out, &format!("adjacencies lost: {}", pairs(&r.lost)));
            let verdict = match &r.verdict.witness {
                None => "equivalent".to_string(),
                Some(w) => format!("not equivalent: {w} differs"),
            };
            g.heading(out, &verdict);
        }
    }
    Ok(())
}

/// Model, IPG, MDG, completions, expansions, then the minimal models of
/// every completion that are equivalent to the input model.
fn pipeline(g: &Global, bounds: &Bounds, m: &CausalModel, out: &mut String) -> Result<()> {
    let signature = d_separation_signature(m, bounds)?;
    let mode = g.mode_for(m)?;
    g.heading(out, "model");
    g.emit(out, m);
    g.heading(out, "inducing path graph");
    g.emit(out, &*ipg_of(m, None)?);
    g.heading(out, &format!("marginal dependency graph ({})", if mode == MdgMode::Exact { "exact" } else { "tetrad" }));
    let mdg = mdg_of(m, mode, bounds)?;
    g.emit(out, &mdg);
    let all = completions(&mdg, bounds)?;
    let mut found: Vec<CausalModel> = Vec::new();
    let mut dropped = 0;
    for (k, c) in all.iter().enumerate() {
        g.heading(out, &format!("completion {}", k + 1));
        g.emit(out, c);
        for (choice, e) in expansions_with_choices(c, bounds)? {
            g.heading(out, &format!("completion {} expansion, {}", k + 1, choice));
            g.emit(out, &e);
        }
        for mm in minimal_models(c, bounds)? {
            if d_separation_signature(&mm, bounds)? != signature {
                dropped += 1;
                continue;
            }
            if !found.iter().any(|f| crate::graph::isomorphic_modulo_latents(f, &mm)) {
                found.push(mm);
            }
        }
    }
    g.heading(out, &format!("minimal models ({} not equivalent to the input dropped)", dropped));
    for (k, mm) in found.iter().enumerate() {
        g.heading(out, &format!("minimal model {}", k + 1));
        g.emit(out, mm);
    }
    Ok(())
}
