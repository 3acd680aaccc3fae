//! `synpivot`: batch conversion, validation, comparison and grammar
//! extraction over the pivot representation.

mod commands;
mod config;
mod input;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use synpivot::aml::SerializationProfile;
use synpivot::eval::BracketOptions;
use synpivot::par::Execution;
use synpivot::ptb::{EncodingStyle, PunctuationPolicy};
use synpivot::registry::Dialect;

use commands::{CompareOptions, Ctx, DcsChoice, Metric, Outcome, Target};
use config::{layered, require_dialect, FileConfig, Resolver};
use input::{Format, Side};

#[derive(Parser, Debug)]
#[command(name = "synpivot", version, about = "Convert, validate and compare syntactic annotation through a common pivot")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// TOML file of defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Category registry (TOML).
    #[arg(long, global = true)]
    registry: Option<PathBuf>,
    /// Head rule table.
    #[arg(long, global = true)]
    head_rules: Option<PathBuf>,
    /// Directory searched for registry.toml, head_rules.txt,
    /// {ptb,dep}.dialect.toml and {ptb,dep}.dcs.toml before the built-in
    /// copies.
    #[arg(long, global = true, env = "SYNPIVOT_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Worker threads; 1 runs on the main thread.
    #[arg(long, short = 'j', global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert a corpus from one format to another.
    Convert(ConvertArgs),
    /// Score a test corpus against a gold one.
    Compare(CompareArgs),
    /// Check well-formedness and conformance to a category specification.
    Validate(ValidateArgs),
    /// Count the context-free rules used in a corpus.
    ExtractGrammar(GrammarArgs),
    /// Inspect the category registry.
    #[command(subcommand)]
    Registry(RegistryCommand),
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Input format; guessed from the file extension when omitted.
    #[arg(long, value_enum)]
    from: Option<Format>,
    /// Input file; stdin when absent or `-`.
    input: Option<PathBuf>,
    /// Raw sentence text, one sentence per line. Tree leaves are anchored
    /// by character spans into it; bare AML gets its words from it.
    #[arg(long)]
    text: Option<PathBuf>,
    /// Token file (`id<TAB>form` lines, one block per sentence).
    #[arg(long)]
    tokens: Option<PathBuf>,
    /// Concrete AML dialect.
    #[arg(long)]
    dialect: Option<PathBuf>,
    /// Vocabulary of the pivot's labels; by default the treebank one for
    /// trees and the dependency one for flat documents.
    #[arg(long)]
    pivot_dialect: Option<PathBuf>,
    /// Keep punctuation leaves as tokens.
    #[arg(long)]
    keep_punct: bool,
    /// Encode only what the brackets state: no implicit objects, bare
    /// trace nodes.
    #[arg(long)]
    explicit_only: bool,
}

#[derive(Args, Debug)]
struct ConvertArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Output format.
    #[arg(long, value_enum)]
    to: Format,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Also write the tokens of every sentence to this file.
    #[arg(long)]
    tokens_out: Option<PathBuf>,
    /// AML output: write only the annotation layer, without `<doc>` and
    /// its tokens.
    #[arg(long)]
    standoff: bool,
    /// AML indentation width.
    #[arg(long)]
    indent: Option<usize>,
    /// AML output: leave out the `xml:base` wrapper.
    #[arg(long)]
    no_base: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportStyle {
    Table,
    Tsv,
}

#[derive(Args, Debug)]
struct CompareArgs {
    gold: PathBuf,
    test: PathBuf,
    #[arg(long, value_enum, default_value = "parseval")]
    metric: Metric,
    /// Format of both files, unless set per side.
    #[arg(long, value_enum)]
    from: Option<Format>,
    #[arg(long, value_enum)]
    gold_format: Option<Format>,
    #[arg(long, value_enum)]
    test_format: Option<Format>,
    /// Label vocabulary of the gold file (also its concrete AML dialect).
    #[arg(long)]
    gold_dialect: Option<PathBuf>,
    #[arg(long)]
    test_dialect: Option<PathBuf>,
    #[arg(long)]
    gold_text: Option<PathBuf>,
    #[arg(long)]
    test_text: Option<PathBuf>,
    #[arg(long)]
    gold_tokens: Option<PathBuf>,
    #[arg(long)]
    test_tokens: Option<PathBuf>,
    /// Labels must agree (default).
    #[arg(long, overrides_with = "unlabeled")]
    labeled: bool,
    /// Only spans or attachments must agree.
    #[arg(long)]
    unlabeled: bool,
    /// Compare labels at this depth of the registry; 0 for full depth.
    #[arg(long)]
    granularity: Option<usize>,
    /// Leave the root bracket out.
    #[arg(long)]
    no_root: bool,
    /// Leave brackets over a single token out.
    #[arg(long)]
    no_single_token: bool,
    #[arg(long, value_enum, default_value = "table")]
    report: ReportStyle,
    /// List unmatched gold and test items.
    #[arg(long)]
    details: bool,
    #[arg(long)]
    keep_punct: bool,
    #[arg(long)]
    explicit_only: bool,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Category specification; by default the built-in one for the
    /// input's vocabulary.
    #[arg(long)]
    dcs: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GrammarArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum RegistryCommand {
    /// Print the category hierarchy, or a dialect's vocabulary.
    Show {
        /// Print this dialect's `local<TAB>category` pairs instead.
        #[arg(long)]
        dialect: Option<PathBuf>,
    },
}

struct App {
    config: FileConfig,
    resolver: Resolver,
    ctx: Ctx,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) if p != Path::new("-") => {
            Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?))
        }
        _ => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn style(explicit_only: bool, keep_punct: bool) -> EncodingStyle {
    let s = if explicit_only { EncodingStyle::explicit_only() } else { EncodingStyle::default() };
    if keep_punct {
        s.with_punctuation(PunctuationPolicy::Anchor)
    } else {
        s
    }
}

fn format_of(explicit: Option<Format>, path: Option<&Path>) -> Result<Format> {
    match explicit.or_else(|| path.and_then(Format::from_path)) {
        Some(f) => Ok(f),
        None => bail!("cannot tell the format of {}; pass --from", input::display(path)),
    }
}

struct SideSpec {
    format: Format,
    path: Option<PathBuf>,
    text: Option<PathBuf>,
    tokens: Option<PathBuf>,
    concrete: Option<PathBuf>,
    pivot: Option<PathBuf>,
    style: EncodingStyle,
}

impl App {
    fn side(&self, spec: SideSpec) -> Result<Side> {
        let ptb = self.resolver.shipped_dialect("ptb")?;
        let dep = self.resolver.shipped_dialect("dep")?;
        let pivot = spec.pivot.as_deref().map(Resolver::dialect_file).transpose()?;
        let profile = match spec.format {
            Format::AmlConcrete => {
                let target = Resolver::dialect_file(&require_dialect(spec.concrete, "concrete AML input")?)?;
                let source = pivot.clone().unwrap_or_else(|| ptb.clone());
                SerializationProfile::concrete(source, target, &self.ctx.registry)
            }
            _ => SerializationProfile::virtual_aml(),
        };
        Ok(Side {
            format: spec.format,
            path: spec.path,
            text: spec.text,
            tokens: spec.tokens,
            style: spec.style,
            pivot,
            ptb,
            dep,
            profile,
        })
    }

    fn input_side(&self, a: InputArgs) -> Result<Side> {
        let format = format_of(a.from, a.input.as_deref())?;
        self.side(SideSpec {
            format,
            path: a.input,
            text: a.text,
            tokens: a.tokens,
            concrete: layered(a.dialect, &self.config.dialect),
            pivot: layered(a.pivot_dialect, &self.config.pivot_dialect),
            style: style(a.explicit_only, a.keep_punct),
        })
    }

    fn convert(&self, a: ConvertArgs) -> Result<Outcome> {
        let dialect_path = layered(a.input.dialect.clone(), &self.config.dialect);
        let dialect = match (a.to, dialect_path) {
            (Format::AmlConcrete, p) => Some(Resolver::dialect_file(&require_dialect(p, "concrete AML output")?)?),
            (Format::Dep, Some(p)) => Some(Resolver::dialect_file(&p)?),
            _ => None,
        };
        let target = Target {
            format: a.to,
            dialect,
            dep: self.resolver.shipped_dialect("dep")?,
            style: style(a.input.explicit_only, a.input.keep_punct),
            standoff: a.standoff,
            indent: a.indent.or(self.config.indent).unwrap_or(2),
            emit_base: !a.no_base,
        };
        let side = self.input_side(a.input)?;
        let mut out = output(a.out.as_deref())?;
        let mut tokens_out = a.tokens_out.as_deref().map(|p| output(Some(p))).transpose()?;
        let outcome = commands::convert(&self.ctx, &side, &target, &mut out, tokens_out.as_mut().map(|t| t as &mut dyn Write))?;
        if let Some(t) = tokens_out.as_mut() {
            t.flush()?;
        }
        Ok(outcome)
    }

    fn compare(&self, a: CompareArgs) -> Result<Outcome> {
        let style = style(a.explicit_only, a.keep_punct);
        let gold_dialect = layered(a.gold_dialect, &self.config.gold_dialect);
        let test_dialect = layered(a.test_dialect, &self.config.test_dialect);
        let gold = self.side(SideSpec {
            format: format_of(a.gold_format.or(a.from), Some(&a.gold))?,
            path: Some(a.gold),
            text: a.gold_text,
            tokens: a.gold_tokens,
            concrete: gold_dialect.clone(),
            pivot: gold_dialect,
            style,
        })?;
        let test = self.side(SideSpec {
            format: format_of(a.test_format.or(a.from), Some(&a.test))?,
            path: Some(a.test),
            text: a.test_text,
            tokens: a.test_tokens,
            concrete: test_dialect.clone(),
            pivot: test_dialect,
            style,
        })?;
        let opts = CompareOptions {
            metric: a.metric,
            labeled: !a.unlabeled,
            granularity: a.granularity.or(self.config.granularity).unwrap_or(0),
            brackets: BracketOptions {
                include_root: !a.no_root,
                include_single_token: !a.no_single_token,
            },
        };
        let (report, outcome) = commands::compare(&self.ctx, &gold, &test, &opts)?;
        let mut out = output(a.out.as_deref())?;
        match a.report {
            ReportStyle::Table => out.write_all(report.to_table().as_bytes())?,
            ReportStyle::Tsv => out.write_all(report.to_tsv().as_bytes())?,
        }
        if a.details {
            for id in &report.unmatched_gold {
                writeln!(out, "unmatched_gold\t{id}")?;
            }
            for id in &report.unmatched_test {
                writeln!(out, "unmatched_test\t{id}")?;
            }
        }
        out.flush()?;
        Ok(outcome)
    }

    fn validate(&self, a: ValidateArgs) -> Result<Outcome> {
        let reg = &self.ctx.registry;
        let dcs = DcsChoice {
            explicit: layered(a.dcs, &self.config.dcs)
                .map(|p| self.resolver.dcs(Some(&p), "", reg))
                .transpose()?,
            ptb: self.resolver.dcs(None, "ptb", reg)?,
            dep: self.resolver.dcs(None, "dep", reg)?,
        };
        let side = self.input_side(a.input)?;
        let mut out = output(a.out.as_deref())?;
        commands::validate(&self.ctx, &side, &dcs, &mut out)
    }

    fn extract_grammar(&self, a: GrammarArgs) -> Result<Outcome> {
        let side = self.input_side(a.input)?;
        let (grammar, outcome) = commands::extract_grammar(&self.ctx, &side)?;
        let mut out = output(a.out.as_deref())?;
        out.write_all(grammar.render().as_bytes())?;
        out.flush()?;
        Ok(outcome)
    }

    fn registry(&self, c: RegistryCommand) -> Result<Outcome> {
        let RegistryCommand::Show { dialect } = c;
        let mut out = output(None)?;
        match dialect {
            None => out.write_all(self.ctx.registry.render_tree().as_bytes())?,
            Some(p) => {
                let d: Dialect = Resolver::dialect_file(&p)?;
                for (local, id) in d.vocab() {
                    writeln!(out, "{local}\t{id}")?;
                }
            }
        }
        out.flush()?;
        Ok(Outcome::default())
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    let config = match &cli.global.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let resolver = Resolver {
        data_dir: layered(cli.global.data_dir, &config.data_dir),
    };
    let jobs = cli.global.jobs.or(config.jobs);
    let ctx = Ctx {
        registry: resolver.registry(layered(cli.global.registry, &config.registry).as_deref())?,
        rules: resolver.head_rules(layered(cli.global.head_rules, &config.head_rules).as_deref())?,
        exec: Execution::for_jobs(jobs),
    };
    let app = App { config, resolver, ctx };
    let exec = app.ctx.exec;
    let command = cli.command;
    exec.install(jobs, move || match command {
        Command::Convert(a) => app.convert(a),
        Command::Compare(a) => app.compare(a),
        Command::Validate(a) => app.validate(a),
        Command::ExtractGrammar(a) => app.extract_grammar(a),
        Command::Registry(c) => app.registry(c),
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(o) if o.failures == 0 => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
