//! Command-line front end: argument parsing, series expressions and reports.

pub mod parse;

use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use reciprocity_core::formal_group::{FormalGroupData, FrobeniusOperator, GroupDescriptor};
use reciprocity_core::herr::{check_complex, check_cup, kummer_triple_classical, HerrModule};
use reciprocity_core::padic::PadicContext;
use reciprocity_core::reciprocity::{
    bv_bracket, coleman_bracket, formal_bracket, formal_bracket_cohomological, BracketConfig, Caps, GroupSource,
    SymbolResult,
};
use reciprocity_core::series::{CoeffKind, GBeltSpec, SeriesRing, Slope, TruncatedSeries, VarKind};
use reciprocity_core::{Error, Result};

pub use parse::parse_series;

/// Environment override for bracket caps, `"y_cap,y_window[,x_cap,x_window]"`.
pub const CAPS_ENV: &str = "RECIPROCITY_DEFAULT_CAPS";

#[derive(Parser, Debug)]
#[command(name = "reciprocity", version, about = "Explicit reciprocity laws for formal groups")]
pub struct Cli {
    /// Print machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Formal groups of Honda type.
    #[command(subcommand)]
    Fg(FgCommand),
    /// The Herr complex.
    #[command(subcommand)]
    Herr(HerrCommand),
    /// Hilbert-symbol brackets.
    #[command(subcommand)]
    Symbol(SymbolCommand),
    /// Valuation-profile checks.
    #[command(subcommand)]
    Gbelt(GbeltCommand),
}

#[derive(Args, Debug, Clone)]
pub struct GroupArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Residue degree of `W`.
    #[arg(long = "residue-degree", default_value_t = 1)]
    pub residue_degree: usize,
    /// Coefficient precision.
    #[arg(long = "N", default_value_t = 8)]
    pub n: u32,
    /// `phi` or `phi^k`.
    #[arg(long, default_value = "phi")]
    pub op: String,
    /// JSON group descriptor (overrides --op).
    #[arg(long)]
    pub descriptor: Option<std::path::PathBuf>,
    /// Total-degree cap.
    #[arg(long, default_value_t = 12)]
    pub cap: i32,
}

#[derive(Subcommand, Debug)]
pub enum FgCommand {
    /// Logarithm, group law, `[p]` and inverse.
    Build(GroupArgs),
    /// Axioms, Honda integrality and the `frob_form` identities.
    Check(GroupArgs),
    /// Height read off `[p]` modulo `p`.
    Height(GroupArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ModuleArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    #[arg(long = "N", default_value_t = 2)]
    pub n: u32,
    /// `X`-cap and `Y`-cap.
    #[arg(long, default_value = "4,4")]
    pub caps: String,
    /// `χ(γ)`; defaults to `1 + p`.
    #[arg(long)]
    pub chi: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub twist: i32,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum HerrCommand {
    /// `β∘α = 0`, `η∘β = 0`, `f_2∘f_1 = 0` and the group relations.
    CheckComplex(ModuleArgs),
    /// Orders of `H^0..H^3` by linear algebra.
    Homology(ModuleArgs),
    /// `η` kills cups of random cocycles.
    Cup(ModuleArgs),
    /// Classical Kummer triple of a `Y`-series.
    Kummer {
        #[command(flatten)]
        module: ModuleArgs,
        /// Laurent windows of `X` and `Y`.
        #[arg(long, default_value = "-2,-4", allow_hyphen_values = true)]
        windows: String,
        /// The unit whose Kummer triple is built.
        #[arg(long = "F")]
        f: String,
    },
}

#[derive(Args, Debug, Clone)]
pub struct BracketArgs {
    #[arg(long, default_value_t = 3)]
    pub p: u64,
    /// Level `n` (the symbol is computed modulo `p^n`).
    #[arg(long, visible_alias = "M", default_value_t = 1)]
    pub n: u32,
    /// Residue degree of `W`.
    #[arg(long = "residue-degree", default_value_t = 1)]
    pub residue_degree: usize,
    /// Caps `y_cap,y_window[,x_cap,x_window]`; also read from the environment.
    #[arg(long, env = CAPS_ENV, allow_hyphen_values = true)]
    pub caps: Option<String>,
    /// Skip the doubled-caps recomputation.
    #[arg(long)]
    pub no_stability: bool,
}

#[derive(Subcommand, Debug)]
pub enum SymbolCommand {
    /// Coleman's bracket of two units of `W[[X]]`.
    Coleman {
        #[command(flatten)]
        args: BracketArgs,
        /// First unit, a series in `X` or `Y`.
        #[arg(long = "F")]
        f: String,
        /// Second unit.
        #[arg(long = "G")]
        g: String,
    },
    /// Brückner–Vostokov bracket.
    Bv {
        #[command(flatten)]
        args: BracketArgs,
        /// First unit, a series in `X` or `Y`.
        #[arg(long = "F")]
        f: String,
        /// Second unit.
        #[arg(long = "G")]
        g: String,
        /// Kernel series; defaults to `1+Y`.
        #[arg(long)]
        s: Option<String>,
    },
    /// Formal bracket by residues (Path A), for `G_m`.
    Formal {
        #[command(flatten)]
        args: BracketArgs,
        /// Unit `α(Y)` of the classical side.
        #[arg(long)]
        alpha: String,
        /// Series `β(Y)` without constant term, a point of the formal group.
        #[arg(long)]
        beta: String,
    },
    /// Formal bracket through cup products (Path B), for `G_m`.
    FormalCohomological {
        #[command(flatten)]
        args: BracketArgs,
        /// Unit `α(Y)` of the classical side.
        #[arg(long)]
        alpha: String,
        /// Series `β(Y)` without constant term, a point of the formal group.
        #[arg(long)]
        beta: String,
        /// `χ(γ)`; defaults to `1 + p`.
        #[arg(long)]
        chi: Option<i64>,
    },
}

#[derive(Subcommand, Debug)]
pub enum GbeltCommand {
    /// Checks a Laurent series against `𝓖_{[b,a]}`.
    Check {
        #[arg(long, default_value_t = 3)]
        p: u64,
        #[arg(long = "N", default_value_t = 6)]
        n: u32,
        #[arg(long, default_value_t = 16)]
        cap: i32,
        #[arg(long, default_value_t = -16, allow_hyphen_values = true)]
        window: i32,
        /// Upper slope `a` as `num/den`, an integer, or `inf`.
        #[arg(long)]
        a: String,
        /// Lower slope `b` as `num/den` or an integer.
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1)]
        e: i64,
        #[arg(long)]
        series: String,
    },
}

/// A finished command: report body and verdict.
#[derive(Debug)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub result: Value,
    /// Lines for the human-readable table.
    pub lines: Vec<(String, String)>,
}

impl Report {
    fn new(command: &str, pass: bool, result: Value) -> Self {
        Report { command: command.into(), pass, result, lines: Vec::new() }
    }

    fn line(mut self, k: impl Into<String>, v: impl ToString) -> Self {
        self.lines.push((k.into(), v.to_string()));
        self
    }

    pub fn to_json(&self) -> Value {
        json!({ "command": self.command, "pass": self.pass, "result": self.result })
    }

    pub fn to_table(&self) -> String {
        let w = self.lines.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        let mut out = format!("{} ... {}\n", self.command, if self.pass { "PASS" } else { "FAIL" });
        for (k, v) in &self.lines {
            out.push_str(&format!("  {k:<w$}  {v}\n"));
        }
        out
    }
}

fn pair(text: &str) -> Result<(i32, i32)> {
    let v: Vec<i32> = text
        .split(',')
        .map(|s| s.trim().parse::<i32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::ParseError { position: 0, message: format!("'{text}': {e}") })?;
    match v.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Error::ParseError { position: 0, message: format!("'{text}': expected two integers") }),
    }
}

fn ratio(text: &str) -> Result<(i64, i64)> {
    let bad = || Error::ParseError { position: 0, message: format!("'{text}': expected num/den") };
    match text.split_once('/') {
        Some((a, b)) => Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)),
        None => Ok((text.trim().parse().map_err(|_| bad())?, 1)),
    }
}

fn group(args: &GroupArgs) -> Result<FrobeniusOperator> {
    match &args.descriptor {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::ParseError { position: 0, message: format!("{}: {e}", path.display()) })?;
            GroupDescriptor::parse(&text)?.operator(args.n)
        }
        None => {
            let ctx = PadicContext::new(args.p, args.residue_degree, args.n)?;
            FrobeniusOperator::from_name(&ctx, &args.op, args.cap)
        }
    }
}

fn run_fg(cmd: &FgCommand) -> Result<Report> {
    match cmd {
        FgCommand::Build(a) => {
            let g = FormalGroupData::build(&group(a)?, a.cap)?;
            let show = |v: &[TruncatedSeries]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>().join("; ");
            Ok(Report::new("fg build", true, g.to_json())
                .line("logarithm", show(g.logarithm()))
                .line("law", show(g.law()))
                .line("[p]", show(g.p_series())))
        }
        FgCommand::Check(a) => {
            let g = FormalGroupData::build(&group(a)?, a.cap)?;
            let axioms = g.check_axioms()?;
            let honda = g.honda_check()?;
            let frob = if g.operator().blocks().is_some() { Some(g.check_frob_form()?) } else { None };
            let pass = axioms.pass() && honda && frob.as_ref().is_none_or(|f| f.pass);
            let result = json!({ "axioms": axioms, "honda": honda, "frob_form": frob });
            Ok(Report::new("fg check", pass, result)
                .line("axioms", axioms.pass())
                .line("honda", honda)
                .line("frob_form", frob.map_or("n/a".to_string(), |f| f.pass.to_string())))
        }
        FgCommand::Height(a) => {
            let g = FormalGroupData::build(&group(a)?, a.cap)?;
            let h = g.observed_height()?;
            Ok(Report::new("fg height", true, json!({ "height": h, "cap": a.cap })).line("height", h))
        }
    }
}

fn module(a: &ModuleArgs) -> Result<HerrModule> {
    let ctx = PadicContext::new(a.p, 1, a.n)?;
    let chi = a.chi.unwrap_or(HerrModule::default_chi(a.p));
    HerrModule::new(&ctx, pair(&a.caps)?, 0, a.twist, chi)
}

fn run_herr(cmd: &HerrCommand) -> Result<Report> {
    match cmd {
        HerrCommand::CheckComplex(a) => {
            let m = module(a)?;
            let r = check_complex(&m, a.samples, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
            Ok(Report::new("herr check-complex", r.pass, serde_json::to_value(&r).unwrap())
                .line("samples", r.samples)
                .line("chi", r.chi)
                .line("beta.alpha failures", r.beta_alpha)
                .line("eta.beta failures", r.eta_beta)
                .line("f2.f1 failures", r.f2_f1)
                .line("gamma tau failures", r.gamma_tau)
                .line("delta (tau-1) failures", r.delta_tau))
        }
        HerrCommand::Homology(a) => {
            let h = module(a)?.homology_orders()?;
            let mut r = Report::new("herr homology", true, json!({ "log_p_orders": h.h }));
            for (i, k) in h.h.iter().enumerate() {
                r = r.line(format!("|H^{i}|"), format!("p^{k}"));
            }
            Ok(r)
        }
        HerrCommand::Cup(a) => {
            let m = module(a)?;
            let m1 = m.with_twist(1);
            let r = check_cup(&m, &m1, a.samples, &mut ChaCha8Rng::seed_from_u64(a.seed))?;
            Ok(Report::new("herr cup", r.pass, serde_json::to_value(&r).unwrap())
                .line("samples", r.samples)
                .line("failures", r.failures))
        }
        HerrCommand::Kummer { module: a, windows, f } => {
            let ctx = PadicContext::new(a.p, 1, a.n)?;
            let chi = a.chi.unwrap_or(HerrModule::default_chi(a.p));
            let (xc, yc) = pair(&a.caps)?;
            let m = HerrModule::laurent(&ctx, CoeffKind::Integral, (xc, yc), pair(windows)?, 1, chi)?;
            let yr = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, yc, pair(windows)?.1)?;
            let fs = parse_series(f, &yr)?;
            let (t, cert) = kummer_triple_classical(&m, &fs)?;
            let result = json!({
                "x": t.x.to_string(), "y": t.y.to_string(), "z": t.z.to_string(), "certificate": cert,
            });
            Ok(Report::new("herr kummer", cert.pass, result)
                .line("x", &t.x)
                .line("y", &t.y)
                .line("z", &t.z)
                .line("unclassified", cert.unclassified.len()))
        }
    }
}

fn config(a: &BracketArgs) -> Result<BracketConfig> {
    let mut cfg = BracketConfig::new(a.p, a.n);
    cfg.f = a.residue_degree;
    cfg.caps = a.caps.as_deref().map(Caps::parse).transpose()?;
    cfg.check_stability = !a.no_stability;
    Ok(cfg)
}

/// Input ring for bracket arguments: wide enough to hold any polynomial exactly.
fn input_ring(cfg: &BracketConfig, name: &str, kind: VarKind) -> Result<Arc<SeriesRing>> {
    let ctx = PadicContext::new(cfg.p, cfg.f, cfg.working_precision())?;
    SeriesRing::univariate(&ctx, CoeffKind::Rational, name, kind, 1 << 12, -(1 << 12))
}

fn symbol_report(r: SymbolResult) -> Report {
    let name = format!("symbol {}", r.bracket);
    let coords = r.coords.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
    let mut rep = Report::new(&name, true, serde_json::to_value(&r).unwrap())
        .line(format!("value mod {}^{}", r.p, r.modulus_exponent), coords)
        .line("pre-reduction", r.certificate.values.join(", "))
        .line("working precision", r.working_precision)
        .line("caps", format!("Y {}..{}, X {}..{}", r.caps.y_window, r.caps.y_cap, r.caps.x_window, r.caps.x_cap))
        .line("cap stable", r.cap_stable.map_or("not checked".to_string(), |b| b.to_string()));
    if let Some(res) = &r.residual {
        rep = rep.line("discards", res.discards.len()).line("classification failures", res.failures.len());
    }
    rep
}

fn run_symbol(cmd: &SymbolCommand) -> Result<Report> {
    match cmd {
        SymbolCommand::Coleman { args, f, g } => {
            let cfg = config(args)?;
            let r = input_ring(&cfg, "X", VarKind::Cyclotomic)?;
            Ok(symbol_report(coleman_bracket(&cfg, &parse_series(f, &r)?, &parse_series(g, &r)?)?))
        }
        SymbolCommand::Bv { args, f, g, s } => {
            let cfg = config(args)?;
            let r = input_ring(&cfg, "Y", VarKind::Kummer)?;
            let s = s.as_deref().map(|s| parse_series(s, &r)).transpose()?;
            Ok(symbol_report(bv_bracket(&cfg, &parse_series(f, &r)?, &parse_series(g, &r)?, s.as_ref())?))
        }
        SymbolCommand::Formal { args, alpha, beta } => {
            let cfg = config(args)?;
            let r = input_ring(&cfg, "Y", VarKind::Kummer)?;
            let (a, b) = (parse_series(alpha, &r)?, parse_series(beta, &r)?);
            Ok(symbol_report(formal_bracket(&cfg, &GroupSource::Multiplicative, &a, &[b])?))
        }
        SymbolCommand::FormalCohomological { args, alpha, beta, chi } => {
            let mut cfg = config(args)?;
            if let Some(c) = chi {
                cfg.chi = *c;
            }
            let r = input_ring(&cfg, "Y", VarKind::Kummer)?;
            let (a, b) = (parse_series(alpha, &r)?, parse_series(beta, &r)?);
            Ok(symbol_report(formal_bracket_cohomological(&cfg, &GroupSource::Multiplicative, &a, &[b])?))
        }
    }
}

fn run_gbelt(cmd: &GbeltCommand) -> Result<Report> {
    let GbeltCommand::Check { p, n, cap, window, a, b, e, series } = cmd;
    let ctx = PadicContext::new(*p, 1, *n)?;
    let ring = SeriesRing::univariate(&ctx, CoeffKind::Rational, "Y", VarKind::Kummer, *cap, *window)?;
    let s = parse_series(series, &ring)?;
    let a = if a.trim() == "inf" {
        Slope::Infinite
    } else {
        let (x, y) = ratio(a)?;
        Slope::Finite(x, y)
    };
    let spec = GBeltSpec::new(a, ratio(b)?, *e)?;
    let r = s.gbelt_check(&spec)?;
    Ok(Report::new("gbelt check", r.pass, serde_json::to_value(&r).unwrap())
        .line("outer min", r.outer_min.map_or("none".into(), |x| x.to_string()))
        .line("inner min", r.inner_min.map_or("none".into(), |x| x.to_string())))
}

/// Runs a parsed command.
pub fn run(cli: &Cli) -> Result<Report> {
    match &cli.command {
        Command::Fg(c) => run_fg(c),
        Command::Herr(c) => run_herr(c),
        Command::Symbol(c) => run_symbol(c),
        Command::Gbelt(c) => run_gbelt(c),
    }
}

/// JSON body of an error report.
pub fn error_json(e: &Error) -> Value {
    json!({ "command": "error", "pass": false, "error": { "kind": error_kind(e), "message": e.to_string() } })
}

fn error_kind(e: &Error) -> String {
    let dbg = format!("{e:?}");
    dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("Error").to_string()
}
