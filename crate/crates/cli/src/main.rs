use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use satclass::checker::{check_agreement, check_q, check_reflection, check_tarski, ExpandedModel};
use satclass::henkin::{enumerate_psi, HenkinGrid};
use satclass::kernel::{check_derivation, parse_theory, Derivation, Prover, TheoryHandle};
use satclass::model::{parse_model, FiniteModel};
use satclass::omega::{OmegaContext, Reason};
use satclass::pipeline::{failure_report, omega_context, Bounds, Inputs, Run};
use satclass::tree::{build_am, find_path, PathArtifact, Preference, Universe};
use satclass::{parse, Coder, Signature};

#[derive(Parser)]
#[command(name = "satclass", version, about = "Satisfaction classes for finite models, built and checked at desk scale")]
struct Cli {
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Files {
    /// Directory holding signature.sig, theory.thy and model.mdl.
    #[arg(long, short = 'f')]
    fixture: Option<PathBuf>,
    #[arg(long)]
    signature: Option<PathBuf>,
    #[arg(long)]
    theory: Option<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct BoundArgs {
    /// Universe bound K: sentences with code below K are decided.
    #[arg(long, short = 'k', default_value_t = 4096)]
    universe: usize,
    /// Tableau budget for level-0 provability.
    #[arg(long, default_value_t = 4096)]
    proof_bound: usize,
    /// Witness formulas for the ω-rule have code below this.
    #[arg(long, default_value_t = 1024)]
    witness_bound: u64,
    #[arg(long, default_value_t = 3)]
    n_max: usize,
    #[arg(long, default_value_t = 3)]
    i_max: usize,
}

impl BoundArgs {
    fn bounds(&self) -> Bounds {
        Bounds {
            universe: self.universe,
            proof_bound: self.proof_bound,
            witness_bound: self.witness_bound,
            n_max: self.n_max,
            i_max: self.i_max,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse the inputs and print their codes.
    Parse {
        #[command(flatten)]
        files: Files,
        /// Also parse and encode this formula.
        #[arg(long)]
        formula: Option<String>,
    },
    /// Search for a derivation of a sentence from the theory.
    Prove {
        #[command(flatten)]
        files: Files,
        #[arg(long)]
        goal: String,
        #[arg(long, default_value_t = 4096)]
        budget: usize,
    },
    /// Decide `Γ_n` for a sentence over the theory plus the model's diagram.
    Gamma {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long)]
        formula: String,
        #[arg(long, short = 'n', default_value_t = 0)]
        n: usize,
        /// Quantify over constants 0..k against the bare theory instead of the model's carrier.
        #[arg(long)]
        carrier: Option<u32>,
    },
    /// Build the Henkin grid through row `i` and print that row.
    Grid {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, short = 'i')]
        i: usize,
    },
    /// Collect A_M and find a path of length K.
    Tree {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Check a truth set against the model.
    Check {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        bounds: BoundArgs,
        /// A truth.json artifact.
        #[arg(long)]
        truth: PathBuf,
        /// A grid.json artifact, used to route existentials to witness rows.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Run the whole construction and write its artifacts.
    Run {
        #[command(flatten)]
        files: Files,
        #[command(flatten)]
        bounds: BoundArgs,
        #[arg(long, short = 'o', env = "SATCLASS_OUT", default_value = "satclass-out")]
        out: PathBuf,
    },
}

impl Files {
    fn path(&self, own: &Option<PathBuf>, name: &str) -> Option<PathBuf> {
        own.clone().or_else(|| self.fixture.as_ref().map(|d| d.join(name)))
    }

    fn required(&self, own: &Option<PathBuf>, name: &str, flag: &str) -> Result<PathBuf> {
        self.path(own, name).ok_or_else(|| anyhow!("missing --{flag} (or --fixture)"))
    }

    fn signature(&self) -> Result<Signature> {
        let p = self.required(&self.signature, "signature.sig", "signature")?;
        parse::signature(&read(&p)?).map_err(|e| located(&p, e))
    }

    fn theory(&self, sig: &Signature) -> Result<TheoryHandle> {
        let p = self.required(&self.theory, "theory.thy", "theory")?;
        parse_theory(Arc::new(Coder::new(sig.clone())), &read(&p)?).map_err(|e| located(&p, e))
    }

    fn model(&self, sig: &Signature) -> Result<FiniteModel> {
        let p = self.required(&self.model, "model.mdl", "model")?;
        parse_model(sig, &read(&p)?).map_err(|e| located(&p, e))
    }

    fn inputs(&self) -> Result<Inputs> {
        let sig = self.signature()?;
        Ok(Inputs { theory: self.theory(&sig)?, model: self.model(&sig)? })
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn located(p: &Path, e: impl std::fmt::Display) -> anyhow::Error {
    anyhow!("{}:{e}", p.display())
}

fn print(v: &Value) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json serializes"));
}

fn code_json(coder: &Coder, e: &satclass::Expr) -> Value {
    json!({ "formula": coder.signature().show(e), "code": coder.encode_unchecked(e).0.to_string() })
}

fn derivation_json(sig: &Signature, d: &Derivation) -> Value {
    let steps: Vec<Value> = d
        .steps
        .iter()
        .map(|s| json!({ "formula": sig.show(&s.formula), "justification": s.justification }))
        .collect();
    Value::Array(steps)
}

fn context(inputs: &Inputs, bounds: &BoundArgs) -> Result<OmegaContext> {
    omega_context(inputs, &bounds.bounds()).map_err(|e| anyhow!("{e}"))
}

fn cmd_parse(files: &Files, formula: Option<String>) -> Result<bool> {
    let sig = files.signature()?;
    let coder = Coder::new(sig.clone());
    let mut out = json!({ "signature": parse::render_signature(&sig).trim_end() });
    if files.path(&files.theory, "theory.thy").is_some() {
        let t = files.theory(&sig)?;
        out["theory"] = json!({ "name": t.name(), "axioms": t.axioms().iter().map(|a| code_json(&coder, a)).collect::<Vec<_>>() });
    }
    if files.path(&files.model, "model.mdl").is_some() {
        let m = files.model(&sig)?;
        out["model"] = json!({ "carrier": m.elements() });
    }
    if let Some(f) = formula {
        let e = parse::formula(&sig, &f).map_err(|e| anyhow!("formula:{e}"))?;
        out["formula"] = code_json(&coder, &e);
    }
    print(&out);
    Ok(true)
}

fn cmd_prove(files: &Files, goal: &str, budget: usize) -> Result<bool> {
    let sig = files.signature()?;
    let theory = files.theory(&sig)?;
    let e = parse::formula(&sig, goal).map_err(|e| anyhow!("goal:{e}"))?;
    let coder = theory.coder();
    let found = Prover::new(&theory, budget).prove(&e);
    let mut out = json!({ "goal": code_json(coder, &e), "budget": budget, "provable": found.is_some() });
    if let Some(d) = &found {
        out["checked"] = json!(check_derivation(d, &theory).is_ok());
        let code = d.encode(coder).0.to_string();
        out["derivation_code_digits"] = json!(code.len());
        if code.len() <= 64 {
            out["derivation_code"] = json!(code);
        }
        out["derivation"] = derivation_json(&sig, d);
    }
    print(&out);
    Ok(found.is_some())
}

fn cmd_gamma(files: &Files, bounds: &BoundArgs, formula: &str, n: usize, carrier: Option<u32>) -> Result<bool> {
    let sig = files.signature()?;
    let ctx = match carrier {
        Some(k) => OmegaContext::new(files.theory(&sig)?, (0..k).collect(), bounds.proof_bound, bounds.witness_bound)
            .map_err(|e| anyhow!("{e}"))?
            .with_level_cap(bounds.n_max.max(n)),
        None => context(&files.inputs()?, bounds)?,
    };
    let e = parse::formula(&sig, formula).map_err(|e| anyhow!("formula:{e}"))?;
    ctx.check_level(n).map_err(|e| anyhow!("{e}"))?;
    let reason = ctx.gamma_reason(n, &e);
    let shown = match &reason {
        Some(Reason::Witness { psi, var }) => json!({ "witness": sig.show(psi), "variable": var }),
        Some(Reason::Provable) => json!("provable"),
        None => Value::Null,
    };
    print(&json!({
        "formula": code_json(ctx.theory().coder(), &e),
        "n": n,
        "holds": reason.is_some(),
        "reason": shown,
        "carrier": ctx.carrier(),
        "theory": ctx.theory().name(),
        "bounds": { "proof_bound": ctx.proof_bound(), "witness_bound": ctx.witness_bound(), "level_cap": ctx.level_cap() },
    }));
    Ok(true)
}

fn build_grid(ctx: &OmegaContext, i: usize, n_max: usize) -> Result<HenkinGrid> {
    let psi = enumerate_psi(ctx, i + 1);
    if psi.len() <= i {
        bail!("the signature yields only {} one-variable formulas, row {i} needs {}", psi.len(), i + 1);
    }
    HenkinGrid::new(psi, n_max).build(ctx, i).map_err(|e| anyhow!("{e}"))
}

fn cmd_grid(files: &Files, bounds: &BoundArgs, i: usize) -> Result<bool> {
    let inputs = files.inputs()?;
    let ctx = context(&inputs, bounds)?;
    let grid = build_grid(&ctx, i, bounds.n_max)?;
    let sig = ctx.theory().coder().signature();
    let row: Vec<Value> = grid
        .row(i)?
        .iter()
        .map(|c| json!({ "j": c.j, "constant": c.constant, "formula": sig.show(&c.formula), "code": c.code.0.to_string() }))
        .collect();
    print(&json!({ "i": i, "a": grid.a[i].to_string(), "psi": sig.show(grid.psi(i)?), "cells": row }));
    Ok(true)
}

fn cmd_tree(files: &Files, bounds: &BoundArgs) -> Result<bool> {
    let inputs = files.inputs()?;
    let b = bounds.bounds();
    let ctx = context(&inputs, bounds)?;
    let psi = enumerate_psi(&ctx, b.i_max + 1);
    let grid = HenkinGrid::new(psi, b.n_max);
    let grid = match grid.psi.len().checked_sub(1) {
        Some(top) => grid.build(&ctx, b.i_max.min(top)).map_err(|e| anyhow!("{e}"))?,
        None => grid,
    };
    let u = Universe::new(ctx.theory().coder(), ctx.carrier(), b.universe);
    let am = build_am(&ctx, &grid, &u);
    let pref = ctx.reference_model().map_or(Preference::LowerFirst, Preference::Model);
    let path = find_path(&am, &u, pref, b.proof_bound).map_err(|e| anyhow!("{e}"))?;
    print(&json!({ "am_members": am.members.len(), "path": PathArtifact::new(&path) }));
    Ok(true)
}

fn cmd_check(files: &Files, bounds: &BoundArgs, truth: &Path, grid: Option<&Path>) -> Result<bool> {
    let inputs = files.inputs()?;
    let b = bounds.bounds();
    let ctx = context(&inputs, bounds)?;
    let doc: Value = serde_json::from_str(&read(truth)?).with_context(|| format!("{}", truth.display()))?;
    let members: BTreeSet<usize> = doc["members"]
        .as_array()
        .ok_or_else(|| anyhow!("{}: no members array", truth.display()))?
        .iter()
        .map(|m| m["code"].as_u64().or_else(|| m.as_u64()).map(|c| c as usize).ok_or_else(|| anyhow!("bad member {m}")))
        .collect::<Result<_>>()?;
    let universe = doc["universe"].as_u64().map_or(b.universe, |k| k as usize);
    let grid = match grid {
        Some(p) => HenkinGrid::from_json(&read(p)?).with_context(|| format!("{}", p.display()))?,
        None => HenkinGrid::new(Vec::new(), b.n_max),
    };
    let u = Universe::new(ctx.theory().coder(), ctx.carrier(), universe);
    let em = ExpandedModel::new(&inputs.model, members, &u);
    let tarski = check_tarski(&em, ctx.theory().coder(), &grid);
    let reflection = check_reflection(&em, &ctx, b.n_max);
    let q = check_q(Some(&em), &ctx, b.n_max);
    let agreement = check_agreement(&em, &ctx);
    let passed = tarski.passed() && reflection.passed() && q.passed() && agreement.passed();
    print(&json!({
        "universe": universe,
        "tarski": tarski,
        "reflection": reflection,
        "q": q,
        "agreement": agreement,
        "passed": passed,
    }));
    Ok(passed)
}

fn cmd_run(files: &Files, bounds: &BoundArgs, out: &Path) -> Result<bool> {
    let inputs = files.inputs()?;
    let b = bounds.bounds();
    match Run::execute(inputs, b.clone()) {
        Ok(run) => {
            run.write_artifacts(out).with_context(|| format!("writing {}", out.display()))?;
            let r = &run.report;
            print(&json!({
                "out": out.display().to_string(),
                "universe": r.universe,
                "am_members": r.am_members,
                "truth_members": run.truth.len(),
                "truth_set": r.truth_set.passed(),
                "tarski": r.tarski.passed(),
                "reflection": r.reflection.passed(),
                "q": r.q.passed(),
                "agreement": r.agreement.passed(),
                "passed": r.passed,
            }));
            Ok(r.passed)
        }
        Err(f) => {
            std::fs::create_dir_all(out)?;
            std::fs::write(out.join("report.json"), failure_report(&f, &b) + "\n")?;
            eprintln!("stopped at {f}");
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Parse { files, formula } => cmd_parse(files, formula.clone()),
        Command::Prove { files, goal, budget } => cmd_prove(files, goal, *budget),
        Command::Gamma { files, bounds, formula, n, carrier } => cmd_gamma(files, bounds, formula, *n, *carrier),
        Command::Grid { files, bounds, i } => cmd_grid(files, bounds, *i),
        Command::Tree { files, bounds } => cmd_tree(files, bounds),
        Command::Check { files, bounds, truth, grid } => cmd_check(files, bounds, truth, grid.as_deref()),
        Command::Run { files, bounds, out } => cmd_run(files, bounds, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
