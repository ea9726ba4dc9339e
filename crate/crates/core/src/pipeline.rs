//! End-to-end construction: enumerate `ψ_n`, build the grid and the `F_n`,
//! collect `A_M`, find a path, extract `T`, check `(M, T)`.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{
    check_agreement, check_q, check_reflection, check_tarski, AgreementReport, ExpandedModel, QReport, ReflectionReport, TarskiReport,
};
use crate::coding::Coder;
use crate::henkin::{enumerate_psi, HenkinGrid};
use crate::kernel::{parse_theory, TheoryHandle};
use crate::model::{parse_model, FiniteModel};
use crate::omega::{OmegaContext, DEFAULT_LEVEL_CAP};
use crate::parse;
use crate::tree::{build_am, extract_t, find_path, verify_truth_set, AxiomSetAM, Closure, PathArtifact, Preference, TruthSetReport, Universe};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub universe: usize,
    pub proof_bound: usize,
    pub witness_bound: u64,
    pub n_max: usize,
    pub i_max: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { universe: 4096, proof_bound: 4096, witness_bound: 1024, n_max: 3, i_max: 3 }
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {message}")]
pub struct StageFailure {
    pub stage: &'static str,
    pub message: String,
    pub q: Option<QReport>,
}

impl StageFailure {
    fn new(stage: &'static str, message: impl ToString) -> Self {
        StageFailure { stage, message: message.to_string(), q: None }
    }
}

pub struct Inputs {
    pub theory: TheoryHandle,
    pub model: FiniteModel,
}

impl Inputs {
    pub fn parse(signature: &str, theory: &str, model: &str) -> Result<Self, StageFailure> {
        let sig = parse::signature(signature).map_err(|e| StageFailure::new("signature", e))?;
        let coder = Arc::new(Coder::new(sig.clone()));
        let theory = parse_theory(coder, theory).map_err(|e| StageFailure::new("theory", e))?;
        let model = parse_model(&sig, model).map_err(|e| StageFailure::new("model", e))?;
        Ok(Inputs { theory, model })
    }

    pub fn load(signature: &Path, theory: &Path, model: &Path) -> Result<Self, StageFailure> {
        let read = |p: &Path| std::fs::read_to_string(p).map_err(|e| StageFailure::new("input", format!("{}: {e}", p.display())));
        Inputs::parse(&read(signature)?, &read(theory)?, &read(model)?)
    }
}

/// The theory `S ∪ Diag(M)` and its ω-provability context, with `M` as
/// refutation filter when it satisfies that theory.
pub fn omega_context(inputs: &Inputs, bounds: &Bounds) -> Result<OmegaContext, StageFailure> {
    let coder = inputs.theory.coder();
    let diag = inputs.model.diagram(coder, bounds.universe as u64);
    let base = inputs.theory.extend(format!("{}+diagram", inputs.theory.name()), diag).map_err(|e| StageFailure::new("theory", e))?;
    let mut ctx = OmegaContext::new(base, inputs.model.elements(), bounds.proof_bound, bounds.witness_bound)
        .map_err(|e| StageFailure::new("omega", e))?
        .with_level_cap(bounds.n_max.max(DEFAULT_LEVEL_CAP));
    ctx.use_reference_model(Arc::new(inputs.model.clone()));
    Ok(ctx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub universe: usize,
    pub bounds: Bounds,
    pub reference_model: bool,
    pub psi: usize,
    pub grid_rows: usize,
    pub unrealized_allocations: usize,
    pub am_members: usize,
    pub backtracks: usize,
    pub truth_set: TruthSetReport,
    pub tarski: TarskiReport,
    pub reflection: ReflectionReport,
    pub q: QReport,
    pub agreement: AgreementReport,
    pub passed: bool,
}

pub struct Run {
    pub inputs: Inputs,
    pub ctx: OmegaContext,
    pub grid: HenkinGrid,
    pub universe: Universe,
    pub am: AxiomSetAM,
    pub path: Closure,
    pub truth: Vec<usize>,
    pub report: RunReport,
}

impl Run {
    pub fn execute(inputs: Inputs, bounds: Bounds) -> Result<Run, StageFailure> {
        if bounds.universe == 0 || bounds.proof_bound == 0 || bounds.witness_bound == 0 {
            return Err(StageFailure::new("config", "bounds must be positive"));
        }
        let ctx = omega_context(&inputs, &bounds)?;
        let q0 = check_q(None, &ctx, bounds.n_max);
        if !q0.passed() {
            let n = q0.first_failure.unwrap_or(0);
            return Err(StageFailure { stage: "q-check", message: format!("Γ_{n}[⊥] holds"), q: Some(q0) });
        }

        let psi = enumerate_psi(&ctx, bounds.i_max + 1);
        let grid = HenkinGrid::new(psi, bounds.n_max);
        let grid = match grid.psi.len().checked_sub(1) {
            Some(top) => grid.build(&ctx, bounds.i_max.min(top)).map_err(|e| StageFailure::new("grid", e))?,
            None => grid,
        };

        let universe = Universe::new(ctx.theory().coder(), ctx.carrier(), bounds.universe);
        let am = build_am(&ctx, &grid, &universe);
        let pref = match ctx.reference_model() {
            Some(m) => Preference::Model(m),
            None => Preference::LowerFirst,
        };
        let path = find_path(&am, &universe, pref, bounds.proof_bound).map_err(|e| StageFailure::new("tree", e))?;
        let truth = extract_t(&path.node);
        let truth_set = verify_truth_set(&truth, &am, &universe);

        let em = ExpandedModel::new(&inputs.model, truth.iter().copied(), &universe);
        let tarski = check_tarski(&em, ctx.theory().coder(), &grid);
        let reflection = check_reflection(&em, &ctx, bounds.n_max);
        let q = check_q(Some(&em), &ctx, bounds.n_max);
        let agreement = check_agreement(&em, &ctx);
        let passed = truth_set.passed() && tarski.passed() && reflection.passed() && q.passed() && agreement.passed();
        let report = RunReport {
            universe: bounds.universe,
            reference_model: ctx.has_reference_model(),
            psi: grid.psi.len(),
            grid_rows: grid.built_rows(),
            unrealized_allocations: grid.allocator.log.iter().filter(|a| !a.realized).count(),
            am_members: am.members.len(),
            backtracks: path.backtracks,
            bounds,
            truth_set,
            tarski,
            reflection,
            q,
            agreement,
            passed,
        };
        drop(em);
        Ok(Run { inputs, ctx, grid, universe, am, path, truth, report })
    }

    /// The artifact files by name.
    pub fn artifacts(&self) -> BTreeMap<&'static str, String> {
        let sig = self.ctx.theory().coder().signature();
        let listing = |codes: &mut dyn Iterator<Item = usize>| -> Vec<serde_json::Value> {
            codes.map(|c| serde_json::json!({ "code": c, "sentence": sig.show(self.universe.expr(c)) })).collect()
        };
        let am: Vec<serde_json::Value> = self
            .am
            .members
            .iter()
            .map(|(c, p)| serde_json::json!({ "code": c, "sentence": sig.show(self.universe.expr(*c)), "provenance": p }))
            .collect();
        let truth = serde_json::json!({ "universe": self.universe.bound(), "members": listing(&mut self.truth.iter().copied()) });
        let mut out = BTreeMap::new();
        out.insert("grid.json", self.grid.to_json());
        out.insert("am.json", pretty(&serde_json::json!({ "universe": self.am.universe, "members": am })));
        out.insert("path.json", pretty(&serde_json::to_value(PathArtifact::new(&self.path)).expect("path serializes")));
        out.insert("truth.json", pretty(&truth));
        out.insert("report.json", pretty(&serde_json::to_value(&self.report).expect("report serializes")));
        out
    }

    pub fn write_artifacts(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, body) in self.artifacts() {
            std::fs::write(dir.join(name), body + "\n")?;
        }
        Ok(())
    }
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json serializes")
}

/// The report written when a stage stops the run.
pub fn failure_report(f: &StageFailure, bounds: &Bounds) -> String {
    let v = serde_json::json!({
        "universe": bounds.universe,
        "bounds": bounds,
        "stage": f.stage,
        "message": f.message,
        "q": f.q,
        "passed": false,
    });
    pretty(&v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::TruthAssignment;

    fn fixture(name: &str) -> Inputs {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
        Inputs::load(&dir.join("signature.sig"), &dir.join("theory.thy"), &dir.join("model.mdl")).unwrap()
    }

    fn small() -> Bounds {
        Bounds { universe: 512, ..Bounds::default() }
    }

    #[test]
    fn inconsistent_theory_stops_at_the_q_probe() {
        let Err(f) = Run::execute(fixture("inconsistent"), small()) else { panic!("run succeeded") };
        assert_eq!(f.stage, "q-check");
        assert_eq!(f.q.as_ref().unwrap().first_failure, Some(0));
        let v: serde_json::Value = serde_json::from_str(&failure_report(&f, &small())).unwrap();
        assert_eq!(v["passed"], false);
        assert_eq!(v["stage"], "q-check");
        assert_eq!(v["universe"], 512);
    }

    #[test]
    fn zero_bounds_are_rejected() {
        let b = Bounds { witness_bound: 0, ..small() };
        assert_eq!(Run::execute(fixture("unary"), b).err().unwrap().stage, "config");
    }

    #[test]
    fn malformed_inputs_name_their_stage() {
        assert_eq!(Inputs::parse("pred p 1", "(p", "carrier 0").err().unwrap().stage, "theory");
        assert_eq!(Inputs::parse("pred p x", "", "").err().unwrap().stage, "signature");
    }

    #[test]
    fn artifacts_are_deterministic_and_decode() {
        let a = Run::execute(fixture("unary"), small()).unwrap();
        let b = Run::execute(fixture("unary"), small()).unwrap();
        assert!(a.report.passed);
        assert_eq!(a.artifacts(), b.artifacts());

        let art = a.artifacts();
        assert_eq!(art.keys().copied().collect::<Vec<_>>(), ["am.json", "grid.json", "path.json", "report.json", "truth.json"]);
        let grid = HenkinGrid::from_json(&art["grid.json"]).unwrap();
        assert_eq!(grid.to_json(), art["grid.json"]);
        let path: PathArtifact = serde_json::from_str(&art["path.json"]).unwrap();
        let bits: TruthAssignment = path.assignment();
        assert_eq!(bits, a.path.node);
        assert_eq!(bits.ones(), a.truth);
        let truth: serde_json::Value = serde_json::from_str(&art["truth.json"]).unwrap();
        assert_eq!(truth["members"].as_array().unwrap().len(), a.truth.len());
    }

    #[test]
    fn artifacts_are_written_to_disk() {
        let run = Run::execute(fixture("propositional"), small()).unwrap();
        let dir = std::env::temp_dir().join(format!("satclass-artifacts-{}", std::process::id()));
        run.write_artifacts(&dir).unwrap();
        for (name, body) in run.artifacts() {
            assert_eq!(std::fs::read_to_string(dir.join(name)).unwrap(), body + "\n");
        }
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
