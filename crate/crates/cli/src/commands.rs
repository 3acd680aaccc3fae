use std::io::Write;

use anyhow::{bail, Result};
use synpivot::aml::{write_aml, write_corpus_member, write_document, SerializationProfile};
use synpivot::dep::{pivot_to_dep, render_dep, render_token_sidecar};
use synpivot::eval::{
    dep_agreement, parseval_readings, rules_of, BracketOptions, DepReport, EvalError, EvalReport, Grammar, Readings,
};
use synpivot::par::Execution;
use synpivot::pivot::{validate_doc, AnnotationDoc};
use synpivot::ptb::{pivot_to_ptb, EncodingStyle};
use synpivot::registry::{check_dcs, Dcs, Dialect, Registry};
use synpivot::transduce::{to_dependency, DepOptions, HeadRules};

use crate::input::{is_flat, Format, Side, Unit};

/// Sentences handed to the workers at a time.
const CHUNK: usize = 512;

/// Shared state for one run.
pub struct Ctx {
    pub registry: Registry,
    pub rules: HeadRules,
    pub exec: Execution,
}

/// Counts problems already reported on stderr.
#[derive(Debug, Default)]
pub struct Outcome {
    pub failures: usize,
}

impl Outcome {
    fn fail(&mut self, what: impl std::fmt::Display) {
        eprintln!("{what}");
        self.failures += 1;
    }
}

/// Where converted sentences go and in what shape.
pub struct Target {
    pub format: Format,
    /// Concrete AML dialect, or the label vocabulary for dependency output.
    pub dialect: Option<Dialect>,
    pub dep: Dialect,
    pub style: EncodingStyle,
    pub standoff: bool,
    pub indent: usize,
    pub emit_base: bool,
}

struct Rendered {
    main: String,
    tokens: String,
}

impl Target {
    fn profile(&self, source: &Dialect, registry: &Registry) -> Result<SerializationProfile> {
        let p = match self.format {
            Format::AmlConcrete => match &self.dialect {
                Some(d) => SerializationProfile::concrete(source.clone(), d.clone(), registry),
                None => bail!("concrete AML output needs a dialect"),
            },
            _ => SerializationProfile::virtual_aml(),
        };
        Ok(p.with_indent(self.indent).with_emit_base(self.emit_base))
    }

    fn render(&self, doc: &AnnotationDoc, side: &Side, ctx: &Ctx, lone: bool) -> Result<Rendered> {
        let source = side.dialect_for(doc);
        let main = match self.format {
            Format::Ptb => pivot_to_ptb(doc, &ctx.rules, self.style)?.render_pretty(),
            Format::Dep => {
                let dep = dependency(doc, source, &ctx.rules)?;
                let target = self.dialect.as_ref().unwrap_or(&self.dep);
                render_dep(&pivot_to_dep(&dep, source, target)?)
            }
            Format::AmlVirtual | Format::AmlConcrete => {
                let profile = self.profile(source, &ctx.registry)?;
                match (lone, self.standoff) {
                    (true, true) => write_aml(doc, &profile)?,
                    (true, false) => write_document(doc, &profile)?,
                    (false, standoff) => write_corpus_member(doc, &profile, standoff)?,
                }
            }
        };
        Ok(Rendered {
            main,
            tokens: render_token_sidecar(&doc.tokens),
        })
    }
}

/// The doc itself when already flat, else its head-rule transduction.
fn dependency(doc: &AnnotationDoc, dialect: &Dialect, rules: &HeadRules) -> Result<AnnotationDoc> {
    if is_flat(doc) {
        Ok(doc.clone())
    } else {
        Ok(to_dependency(doc, rules, dialect, DepOptions::default())?)
    }
}

fn sentence_error(side: &Side, number: usize, e: &anyhow::Error) -> String {
    format!("{}: sentence {number}: {e:#}", side.name())
}

pub fn convert(
    ctx: &Ctx,
    side: &Side,
    target: &Target,
    out: &mut dyn Write,
    mut tokens_out: Option<&mut dyn Write>,
) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut sentences = side.sentences()?;
    let mut written = 0usize;
    let mut corpus_open = false;
    let mut first_chunk = true;
    loop {
        let (chunk, error) = sentences.chunk(CHUNK);
        // a short batch means the input is exhausted
        let lone = first_chunk && chunk.len() == 1 && error.is_none();
        first_chunk = false;
        let rendered = ctx.exec.map(&chunk, |u| {
            side.pivot(u, &ctx.rules).and_then(|doc| target.render(&doc, side, ctx, lone))
        });
        for (unit, r) in chunk.iter().zip(rendered) {
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    outcome.fail(sentence_error(side, unit.number, &e));
                    continue;
                }
            };
            if target.format.is_aml() && !lone && !corpus_open {
                out.write_all(b"<corpus>\n")?;
                corpus_open = true;
            }
            if written > 0 && matches!(target.format, Format::Ptb | Format::Dep) {
                out.write_all(b"\n")?;
            }
            out.write_all(r.main.as_bytes())?;
            if let Some(t) = tokens_out.as_deref_mut() {
                if written > 0 {
                    t.write_all(b"\n")?;
                }
                t.write_all(r.tokens.as_bytes())?;
            }
            written += 1;
        }
        if let Some(e) = error {
            outcome.fail(format!("{}: {e:#}", side.name()));
            break;
        }
        if chunk.len() < CHUNK {
            break;
        }
    }
    if target.format.is_aml() {
        if corpus_open {
            out.write_all(b"</corpus>\n")?;
        } else if written == 0 {
            out.write_all(b"<corpus/>\n")?;
        }
    }
    out.flush()?;
    Ok(outcome)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Metric {
    /// Labeled bracket precision and recall.
    Parseval,
    /// Head-dependent agreement, after converting trees to dependencies.
    Deprel,
}

pub struct CompareOptions {
    pub metric: Metric,
    pub labeled: bool,
    pub granularity: usize,
    pub brackets: BracketOptions,
}

fn score(ctx: &Ctx, gold: &Side, test: &Side, g: &Unit, t: &Unit, opts: &CompareOptions) -> Result<EvalReport> {
    let gd = gold.pivot(g, &ctx.rules)?;
    let td = test.pivot(t, &ctx.rules)?;
    let (gl, tl) = (gold.dialect_for(&gd), test.dialect_for(&td));
    match opts.metric {
        Metric::Parseval => {
            let mut r = parseval_readings(&gd, &td, gl, tl, opts.labeled, opts.brackets)?;
            Ok(r.scores.swap_remove(r.best))
        }
        Metric::Deprel => {
            let gdep = dependency(&gd.reading(0), gl, &ctx.rules)?;
            let scores = (0..td.reading_count())
                .map(|k| {
                    let tdep = dependency(&td.reading(k), tl, &ctx.rules)?;
                    Ok(dep_agreement(&gdep, &tdep, &ctx.registry, gl, tl, opts.granularity)?)
                })
                .collect::<Result<Vec<DepReport>>>()?;
            let labeled = opts.labeled;
            let mut r = Readings::pick(scores, |s| if labeled { s.labeled.f1() } else { s.unlabeled.f1() });
            let best = r.scores.swap_remove(r.best);
            Ok(if labeled { best.labeled } else { best.unlabeled })
        }
    }
}

pub fn compare(ctx: &Ctx, gold: &Side, test: &Side, opts: &CompareOptions) -> Result<(EvalReport, Outcome)> {
    if opts.metric == Metric::Parseval {
        for side in [gold, test] {
            if side.format == Format::Dep {
                bail!("{}: parseval needs constituency input, dependency facts have no brackets", side.name());
            }
        }
    }
    let mut outcome = Outcome::default();
    let mut total = EvalReport::default();
    let (mut gs, mut ts) = (gold.sentences()?, test.sentences()?);
    let (mut gold_seen, mut test_seen) = (0, 0);
    loop {
        let (gc, ge) = gs.chunk(CHUNK);
        let (tc, te) = ts.chunk(CHUNK);
        for (side, e) in [(gold, ge), (test, te)] {
            if let Some(e) = e {
                bail!("{}: {e:#}", side.name());
            }
        }
        gold_seen += gc.len();
        test_seen += tc.len();
        if gc.len() != tc.len() {
            let gold = gold_seen + gs.by_ref().count();
            let test = test_seen + ts.by_ref().count();
            return Err(EvalError::CountMismatch { gold, test }.into());
        }
        let pairs: Vec<(&Unit, &Unit)> = gc.iter().zip(&tc).collect();
        let reports = ctx.exec.map(&pairs, |(g, t)| score(ctx, gold, test, g, t, opts));
        for ((g, _), r) in pairs.iter().zip(reports) {
            match r {
                Ok(r) => total.absorb(&r, &format!("{}:", g.number)),
                Err(e) => outcome.fail(format!("sentence {}: {e:#}", g.number)),
            }
        }
        if gc.len() < CHUNK {
            break;
        }
    }
    Ok((total, outcome))
}

/// DCS override, or the built-in one per vocabulary.
pub struct DcsChoice {
    pub explicit: Option<Dcs>,
    pub ptb: Dcs,
    pub dep: Dcs,
}

pub fn validate(ctx: &Ctx, side: &Side, dcs: &DcsChoice, out: &mut dyn Write) -> Result<Outcome> {
    let mut outcome = Outcome::default();
    let mut sentences = side.sentences()?;
    let mut violations = 0;
    loop {
        let (chunk, error) = sentences.chunk(CHUNK);
        let found = ctx.exec.map(&chunk, |u| {
            side.pivot(u, &ctx.rules).map(|doc| {
                let d = dcs.explicit.as_ref().unwrap_or(if side.scheme_for(&doc) == "dep" { &dcs.dep } else { &dcs.ptb });
                let mut lines: Vec<String> = validate_doc(&doc).iter().map(ToString::to_string).collect();
                lines.extend(check_dcs(&doc, d, side.dialect_for(&doc), &ctx.registry).iter().map(ToString::to_string));
                lines
            })
        });
        for (unit, r) in chunk.iter().zip(found) {
            match r {
                Ok(lines) => {
                    for l in lines {
                        writeln!(out, "{}:{}: {l}", side.name(), unit.number)?;
                        violations += 1;
                    }
                }
                Err(e) => outcome.fail(sentence_error(side, unit.number, &e)),
            }
        }
        if let Some(e) = error {
            outcome.fail(format!("{}: {e:#}", side.name()));
            break;
        }
        if chunk.len() < CHUNK {
            break;
        }
    }
    out.flush()?;
    if violations > 0 {
        eprintln!("{violations} violation(s)");
        outcome.failures += violations;
    }
    Ok(outcome)
}

pub fn extract_grammar(ctx: &Ctx, side: &Side) -> Result<(Grammar, Outcome)> {
    if side.format == Format::Dep {
        bail!("{}: grammar extraction needs constituency input", side.name());
    }
    let mut outcome = Outcome::default();
    let mut grammar = Grammar::default();
    let mut sentences = side.sentences()?;
    loop {
        let (chunk, error) = sentences.chunk(CHUNK);
        let rules = ctx.exec.map(&chunk, |u| side.pivot(u, &ctx.rules).map(|d| rules_of(&d)));
        for (unit, r) in chunk.iter().zip(rules) {
            match r {
                Ok(rules) => rules.into_iter().for_each(|r| grammar.add(r)),
                Err(e) => outcome.fail(sentence_error(side, unit.number, &e)),
            }
        }
        if let Some(e) = error {
            outcome.fail(format!("{}: {e:#}", side.name()));
            break;
        }
        if chunk.len() < CHUNK {
            break;
        }
    }
    Ok((grammar, outcome))
}
