//! Declarative scenario files, built-in demonstrations, and randomized
//! oracle cross-checks: the machinery behind the `retrodictor` binary.
//!
//! A scenario file is JSON with a fixed schema (`version: 1`). Complex
//! numbers are two-element `[re, im]` arrays. The file names a preparation,
//! an ordered list of observations (the plan), and a list of queries; each
//! query is answered by its closed form and, where one applies, by the
//! brute-force oracle over the same plan, so the output table carries both
//! values side by side.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qla::{
    rotate_fixing_axis, rotate_fixing_axis_phased, ComplexMatrix, DensityOperator, Ket,
    ProjectiveDecomposition,
};
use crate::random;
use crate::retrodict::{
    abl_coarse, abl_fine, classical_retrodict, corrected_bayes, corrected_marginal,
    margenau_discrepancy, margenau_scenario, naive_bayes, naive_marginal, oracle_conditional,
    rotated_scenario, three_box_scenario, ClassicalModel, RetrodictError, RetrodictionQuery,
};
use crate::sequence::{joint_distribution, Conditional, EventAtom, MeasurementPlan};
use crate::tol;

/// The literal token used wherever an undefined conditional is rendered.
pub const UNDEFINED_TOKEN: &str = "undefined (conditioning probability < 1e-14)";

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },

    #[error("{field}: {message}")]
    Schema { field: String, message: String },

    #[error("{field}: {source}")]
    Numeric {
        field: String,
        source: RetrodictError,
    },

    #[error("unknown demo {name:?}; available: margenau, three-box, rotated")]
    UnknownDemo { name: String },

    #[error("{0}")]
    Argument(String),
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> ScenarioError {
    ScenarioError::Schema {
        field: field.into(),
        message: message.into(),
    }
}

fn numeric<E: Into<RetrodictError>>(field: impl Into<String>) -> impl FnOnce(E) -> ScenarioError {
    let field = field.into();
    move |source| ScenarioError::Numeric {
        field,
        source: source.into(),
    }
}

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

/// Top-level scenario file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub dim: usize,
    pub rho: RhoSpec,
    /// Named fine bases that slots may reference, coarsen, or rotate.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub bases: BTreeMap<String, BasisSpec>,
    pub slots: Vec<SlotSpec>,
    pub queries: Vec<QuerySpec>,
}

/// Preparation: exactly one of `pure` (an amplitude list) or `matrix`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RhoSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pure: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSpec {
    pub kets: Vec<Vec<[f64; 2]>>,
    /// Block labels, one per ket; defaults to "1", "2", ...
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
}

/// One observation slot: exactly one of `basis` (reference a named fine
/// basis), `kets` (inline fine basis), `coarsen` (group a named basis), or
/// `rotate_fixing` (rotate a named basis about one of its kets).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlotSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kets: Option<Vec<Vec<[f64; 2]>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coarsen: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub groups: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotate_fixing: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryKind {
    /// Retrodiction formula (fine or coarse slot 1).
    Abl,
    /// Naive Bayes with the unmeasured-system denominator.
    Naive,
    /// Bayes with the conditioning event written out in full.
    Corrected,
    /// Brute-force conditional over the plan's joint table.
    Oracle,
    /// Unmeasured Born weight versus the marginal over slot 1.
    Discrepancy,
    /// Classical retrodiction on the model extracted from the instance.
    Classical,
}

impl QueryKind {
    fn name(self) -> &'static str {
        match self {
            QueryKind::Abl => "abl",
            QueryKind::Naive => "naive",
            QueryKind::Corrected => "corrected",
            QueryKind::Oracle => "oracle",
            QueryKind::Discrepancy => "discrepancy",
            QueryKind::Classical => "classical",
        }
    }
}

/// One query. For the closed-form kinds `target` is a slot-1 label and
/// `given` a rank-1 slot-2 label. The `oracle` kind may instead name
/// arbitrary atoms per slot through `target_atoms` / `given_atoms`
/// (ordinal, as a string key, to label).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuerySpec {
    pub kind: QueryKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_atoms: Option<BTreeMap<String, String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub given_atoms: Option<BTreeMap<String, String>>,
}

/// One output row: the query echoed back, the closed form that answered
/// it, its value, the oracle value where one applies, and their gap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub query: QuerySpec,
    pub method: String,
    pub value: Option<f64>,
    pub oracle: Option<f64>,
    pub gap: Option<f64>,
}

impl ResultRecord {
    fn new(query: QuerySpec, method: &str, value: Option<f64>, oracle: Option<f64>) -> Self {
        let gap = match (value, oracle) {
            (Some(v), Some(o)) => Some((v - o).abs()),
            _ => None,
        };
        Self {
            query,
            method: method.to_string(),
            value,
            oracle,
            gap,
        }
    }
}

// ---------------------------------------------------------------------------
// Building domain objects
// ---------------------------------------------------------------------------

fn complex(pair: [f64; 2]) -> Complex64 {
    Complex64::new(pair[0], pair[1])
}

fn build_ket(field: &str, amplitudes: &[[f64; 2]], dim: usize) -> Result<Ket, ScenarioError> {
    if amplitudes.len() != dim {
        return Err(schema(
            field,
            format!("expected {dim} amplitudes, got {}", amplitudes.len()),
        ));
    }
    Ket::new(amplitudes.iter().copied().map(complex).collect()).map_err(numeric(field))
}

fn build_rho(spec: &RhoSpec, dim: usize) -> Result<DensityOperator, ScenarioError> {
    match (&spec.pure, &spec.matrix) {
        (Some(_), Some(_)) | (None, None) => {
            Err(schema("rho", "expected exactly one of `pure` or `matrix`"))
        }
        (Some(amplitudes), None) => {
            let ket = build_ket("rho.pure", amplitudes, dim)?;
            Ok(DensityOperator::from_ket(&ket))
        }
        (None, Some(rows)) => {
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(schema(
                    "rho.matrix",
                    format!("expected {dim}x{dim} entries"),
                ));
            }
            let entries = rows
                .iter()
                .flatten()
                .copied()
                .map(complex)
                .collect::<Vec<_>>();
            let matrix = ComplexMatrix::new(dim, entries).map_err(numeric("rho.matrix"))?;
            DensityOperator::new(matrix).map_err(numeric("rho.matrix"))
        }
    }
}

fn build_basis(
    field: &str,
    spec: &BasisSpec,
    dim: usize,
) -> Result<ProjectiveDecomposition, ScenarioError> {
    let mut kets = Vec::with_capacity(spec.kets.len());
    for (i, amplitudes) in spec.kets.iter().enumerate() {
        kets.push(build_ket(&format!("{field}.kets[{i}]"), amplitudes, dim)?);
    }
    let labels: Vec<String> = match &spec.labels {
        Some(labels) => {
            if labels.len() != kets.len() {
                return Err(schema(
                    format!("{field}.labels"),
                    format!("expected {} labels, got {}", kets.len(), labels.len()),
                ));
            }
            labels.clone()
        }
        None => (1..=kets.len()).map(|i| i.to_string()).collect(),
    };
    ProjectiveDecomposition::from_labeled_kets(labels.into_iter().zip(kets).collect())
        .map_err(numeric(field.to_string()))
}

fn build_slot(
    field: &str,
    spec: &SlotSpec,
    bases: &BTreeMap<String, ProjectiveDecomposition>,
    dim: usize,
) -> Result<ProjectiveDecomposition, ScenarioError> {
    let chosen: Vec<&str> = [
        spec.basis.as_ref().map(|_| "basis"),
        spec.kets.as_ref().map(|_| "kets"),
        spec.coarsen.as_ref().map(|_| "coarsen"),
        spec.rotate_fixing.as_ref().map(|_| "rotate_fixing"),
    ]
    .into_iter()
    .flatten()
    .collect();
    if chosen.len() != 1 {
        return Err(schema(
            field,
            "expected exactly one of `basis`, `kets`, `coarsen`, `rotate_fixing`",
        ));
    }
    let forbid = |name: &str, present: bool| -> Result<(), ScenarioError> {
        if present {
            Err(schema(
                format!("{field}.{name}"),
                format!("not allowed with `{}`", chosen[0]),
            ))
        } else {
            Ok(())
        }
    };
    let lookup = |name: &String, at: String| -> Result<ProjectiveDecomposition, ScenarioError> {
        bases
            .get(name)
            .cloned()
            .ok_or_else(|| schema(at, format!("references unknown basis {name:?}")))
    };

    match chosen[0] {
        "basis" => {
            forbid("labels", spec.labels.is_some())?;
            forbid("groups", spec.groups.is_some())?;
            forbid("fixed_label", spec.fixed_label.is_some())?;
            forbid("angles", spec.angles.is_some())?;
            forbid("phases", spec.phases.is_some())?;
            lookup(
                spec.basis.as_ref().expect("chosen"),
                format!("{field}.basis"),
            )
        }
        "kets" => {
            forbid("groups", spec.groups.is_some())?;
            forbid("fixed_label", spec.fixed_label.is_some())?;
            forbid("angles", spec.angles.is_some())?;
            forbid("phases", spec.phases.is_some())?;
            let basis_spec = BasisSpec {
                kets: spec.kets.clone().expect("chosen"),
                labels: spec.labels.clone(),
            };
            build_basis(field, &basis_spec, dim)
        }
        "coarsen" => {
            forbid("labels", spec.labels.is_some())?;
            forbid("fixed_label", spec.fixed_label.is_some())?;
            forbid("angles", spec.angles.is_some())?;
            forbid("phases", spec.phases.is_some())?;
            let base = lookup(
                spec.coarsen.as_ref().expect("chosen"),
                format!("{field}.coarsen"),
            )?;
            let groups = spec
                .groups
                .as_ref()
                .ok_or_else(|| schema(format!("{field}.groups"), "required with `coarsen`"))?;
            base.coarsen(groups)
                .map_err(numeric(format!("{field}.groups")))
        }
        "rotate_fixing" => {
            forbid("labels", spec.labels.is_some())?;
            forbid("groups", spec.groups.is_some())?;
            let base = lookup(
                spec.rotate_fixing.as_ref().expect("chosen"),
                format!("{field}.rotate_fixing"),
            )?;
            let fixed = spec.fixed_label.as_ref().ok_or_else(|| {
                schema(
                    format!("{field}.fixed_label"),
                    "required with `rotate_fixing`",
                )
            })?;
            let angles = spec.angles.as_ref().ok_or_else(|| {
                schema(format!("{field}.angles"), "required with `rotate_fixing`")
            })?;
            match &spec.phases {
                Some(phases) => rotate_fixing_axis_phased(&base, fixed, angles, phases)
                    .map_err(numeric(field.to_string())),
                None => {
                    rotate_fixing_axis(&base, fixed, angles).map_err(numeric(field.to_string()))
                }
            }
        }
        _ => unreachable!(),
    }
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct BuiltScenario {
    rho: DensityOperator,
    plan: MeasurementPlan,
}

fn build(file: &ScenarioFile) -> Result<BuiltScenario, ScenarioError> {
    if file.version != SCENARIO_VERSION {
        return Err(schema(
            "version",
            format!(
                "unsupported version {}, expected {SCENARIO_VERSION}",
                file.version
            ),
        ));
    }
    if file.dim == 0 {
        return Err(schema("dim", "dimension must be at least 1"));
    }
    let rho = build_rho(&file.rho, file.dim)?;
    let mut bases = BTreeMap::new();
    for (name, spec) in &file.bases {
        bases.insert(
            name.clone(),
            build_basis(&format!("bases.{name}"), spec, file.dim)?,
        );
    }
    let mut slots = Vec::with_capacity(file.slots.len());
    for (i, spec) in file.slots.iter().enumerate() {
        slots.push(build_slot(&format!("slots[{i}]"), spec, &bases, file.dim)?);
    }
    let plan = MeasurementPlan::new(file.dim, slots).map_err(numeric("slots"))?;
    Ok(BuiltScenario { rho, plan })
}

fn atoms_from_map(
    field: &str,
    map: &BTreeMap<String, String>,
    plan: &MeasurementPlan,
) -> Result<Vec<EventAtom>, ScenarioError> {
    let mut atoms = Vec::with_capacity(map.len());
    for (ordinal, label) in map {
        let parsed: usize = ordinal.parse().map_err(|_| {
            schema(
                format!("{field}.{ordinal}"),
                "keys must be 1-based slot ordinals",
            )
        })?;
        if parsed == 0 || parsed > plan.len() {
            return Err(schema(
                format!("{field}.{ordinal}"),
                format!("the plan has {} slots", plan.len()),
            ));
        }
        atoms.push(EventAtom::new(parsed, label.clone()));
    }
    Ok(atoms)
}

struct QueryContext {
    rho: DensityOperator,
    plan: MeasurementPlan,
    // Joint table over the scenario plan, shared across queries.
    dist: Option<crate::sequence::JointDistribution>,
}

impl QueryContext {
    fn dist(&mut self) -> Result<&crate::sequence::JointDistribution, ScenarioError> {
        if self.dist.is_none() {
            self.dist = Some(joint_distribution(&self.rho, &self.plan).map_err(numeric("slots"))?);
        }
        Ok(self.dist.as_ref().expect("just set"))
    }
}

/// Pulls out the pieces a two-slot closed-form query needs: the slot-1
/// observation, the target label (when required), the post-selection
/// label, and its ket.
fn two_slot_pieces(
    field: &str,
    spec: &QuerySpec,
    plan: &MeasurementPlan,
    need_target: bool,
) -> Result<(ProjectiveDecomposition, Option<String>, String, Ket), ScenarioError> {
    if plan.len() != 2 {
        return Err(schema(
            field,
            format!(
                "`{}` queries need a two-slot plan; this plan has {} slots",
                spec.kind.name(),
                plan.len()
            ),
        ));
    }
    let target = match (&spec.target, need_target) {
        (Some(t), true) => Some(t.clone()),
        (None, true) => return Err(schema(format!("{field}.target"), "required")),
        (Some(_), false) => {
            return Err(schema(
                format!("{field}.target"),
                format!("not allowed with `{}`", spec.kind.name()),
            ))
        }
        (None, false) => None,
    };
    let given = spec
        .given
        .clone()
        .ok_or_else(|| schema(format!("{field}.given"), "required"))?;
    let slot2 = plan.slot(2).expect("two slots");
    let block = slot2.block(&given).ok_or_else(|| {
        schema(
            format!("{field}.given"),
            format!("no block {given:?} in slot 2"),
        )
    })?;
    let q = block.to_ket().ok_or_else(|| {
        schema(
            format!("{field}.given"),
            format!("block {given:?} has rank {}, expected rank 1", block.rank()),
        )
    })?;
    if let Some(t) = &target {
        let slot1 = plan.slot(1).expect("two slots");
        if slot1.block(t).is_none() {
            return Err(schema(
                format!("{field}.target"),
                format!("no block {t:?} in slot 1"),
            ));
        }
    }
    Ok((plan.slot(1).expect("two slots").clone(), target, given, q))
}

fn run_query(
    field: &str,
    spec: &QuerySpec,
    ctx: &mut QueryContext,
) -> Result<ResultRecord, ScenarioError> {
    let plan = ctx.plan.clone();
    let rho = ctx.rho.clone();
    match spec.kind {
        QueryKind::Abl | QueryKind::Naive | QueryKind::Corrected => {
            let (slot1, target, given, q) = two_slot_pieces(field, spec, &plan, true)?;
            let target = target.expect("required above");
            let query = RetrodictionQuery::new(rho, slot1.clone(), q, target.clone())
                .map_err(numeric(field.to_string()))?;
            let (method, value) = match spec.kind {
                QueryKind::Abl if slot1.is_fine() => ("abl_fine", abl_fine(&query)),
                QueryKind::Abl => ("abl_coarse", abl_coarse(&query)),
                QueryKind::Naive => ("naive_bayes", naive_bayes(&query)),
                QueryKind::Corrected => ("corrected_bayes", corrected_bayes(&query)),
                _ => unreachable!(),
            };
            let value = value.map_err(numeric(field.to_string()))?;
            let oracle = ctx
                .dist()?
                .conditional(&[EventAtom::new(1, target)], &[EventAtom::new(2, given)])
                .map_err(numeric(field.to_string()))?;
            Ok(ResultRecord::new(
                spec.clone(),
                method,
                value.defined(),
                oracle.defined(),
            ))
        }
        QueryKind::Classical => {
            let (slot1, target, given, _q) = two_slot_pieces(field, spec, &plan, true)?;
            let target = target.expect("required above");
            let slot2 = plan.slot(2).expect("two slots");
            let model = ClassicalModel::from_quantum(&rho, &slot1, slot2)
                .map_err(numeric(field.to_string()))?;
            let value =
                classical_retrodict(&model, &given, &target).map_err(numeric(field.to_string()))?;
            let oracle = ctx
                .dist()?
                .conditional(&[EventAtom::new(1, target)], &[EventAtom::new(2, given)])
                .map_err(numeric(field.to_string()))?;
            Ok(ResultRecord::new(
                spec.clone(),
                "classical_retrodict",
                value.defined(),
                oracle.defined(),
            ))
        }
        QueryKind::Discrepancy => {
            let (slot1, _, _, q) = two_slot_pieces(field, spec, &plan, false)?;
            let report =
                margenau_discrepancy(&rho, &slot1, &q).map_err(numeric(field.to_string()))?;
            Ok(ResultRecord::new(
                spec.clone(),
                "margenau_discrepancy",
                report.naive_value,
                Some(report.oracle_value),
            ))
        }
        QueryKind::Oracle => {
            let (target_atoms, given_atoms) = match (&spec.target_atoms, &spec.given_atoms) {
                (Some(t), Some(g)) => {
                    if spec.target.is_some() || spec.given.is_some() {
                        return Err(schema(
                            field,
                            "use either target/given labels or the atom maps, not both",
                        ));
                    }
                    (
                        atoms_from_map(&format!("{field}.target_atoms"), t, &plan)?,
                        atoms_from_map(&format!("{field}.given_atoms"), g, &plan)?,
                    )
                }
                (None, None) => {
                    let (_, target, given, _q) = two_slot_pieces(field, spec, &plan, true)?;
                    (
                        vec![EventAtom::new(1, target.expect("required above"))],
                        vec![EventAtom::new(2, given)],
                    )
                }
                _ => {
                    return Err(schema(
                        field,
                        "`target_atoms` and `given_atoms` go together",
                    ))
                }
            };
            let value = ctx
                .dist()?
                .conditional(&target_atoms, &given_atoms)
                .map_err(numeric(field.to_string()))?;
            Ok(ResultRecord::new(
                spec.clone(),
                "oracle_conditional",
                value.defined(),
                None,
            ))
        }
    }
}

/// Runs every query of an already-parsed scenario, in order.
pub fn execute(file: &ScenarioFile) -> Result<Vec<ResultRecord>, ScenarioError> {
    let built = build(file)?;
    let mut ctx = QueryContext {
        rho: built.rho,
        plan: built.plan,
        dist: None,
    };
    let mut records = Vec::with_capacity(file.queries.len());
    for (i, spec) in file.queries.iter().enumerate() {
        records.push(run_query(&format!("queries[{i}]"), spec, &mut ctx)?);
    }
    Ok(records)
}

pub fn parse_scenario_str(text: &str) -> Result<ScenarioFile, ScenarioError> {
    serde_json::from_str(text).map_err(|e| ScenarioError::Parse {
        path: "<input>".into(),
        message: e.to_string(),
    })
}

/// Loads and runs a scenario file.
pub fn run_scenario(path: &Path) -> Result<Vec<ResultRecord>, ScenarioError> {
    let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let file: ScenarioFile = serde_json::from_str(&text).map_err(|e| ScenarioError::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    execute(&file)
}

/// True when strict mode must fail: an undefined result, or a closed form
/// deviating from its oracle value by more than [`tol::ORACLE_MATCH`].
pub fn has_strict_violation(records: &[ResultRecord]) -> bool {
    records
        .iter()
        .any(|r| r.value.is_none() || matches!(r.gap, Some(g) if g > tol::ORACLE_MATCH))
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

/// Probabilities are printed with 12 significant digits; values in [0, 1]
/// make fixed-point the natural choice.
fn fmt_prob(x: f64) -> String {
    format!("{x:.12}")
}

fn fmt_value(v: Option<f64>) -> String {
    match v {
        // Only the naive formula can land here; the excess is diagnostic
        // and rendered as-is rather than clamped.
        Some(x) if x > 1.0 => format!("{} (exceeds 1)", fmt_prob(x)),
        Some(x) => fmt_prob(x),
        None => UNDEFINED_TOKEN.to_string(),
    }
}

fn fmt_oracle(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt_prob(x),
        None => "-".to_string(),
    }
}

fn fmt_gap(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.3e}"),
        None => "-".to_string(),
    }
}

/// Human-readable result table, one row per record, in query order.
pub fn render_table(records: &[ResultRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>3}  {:<12} {:<20} {:<24} {:<24} gap",
        "#", "kind", "method", "value", "oracle"
    );
    for (i, r) in records.iter().enumerate() {
        let _ = writeln!(
            out,
            "{:>3}  {:<12} {:<20} {:<24} {:<24} {}",
            i + 1,
            r.query.kind.name(),
            r.method,
            fmt_value(r.value),
            fmt_oracle(r.oracle),
            fmt_gap(r.gap)
        );
    }
    out
}

fn fmt_ket(ket: &Ket) -> String {
    let parts: Vec<String> = ket
        .amplitudes()
        .iter()
        .map(|a| format!("{:.6}{:+.6}i", a.re, a.im))
        .collect();
    format!("({})", parts.join(", "))
}

// ---------------------------------------------------------------------------
// Demos
// ---------------------------------------------------------------------------

pub const DEMO_NAMES: [&str; 3] = ["margenau", "three-box", "rotated"];

/// Renders one of the built-in demonstrations.
pub fn demo(name: &str) -> Result<String, ScenarioError> {
    match name {
        "margenau" => demo_margenau(),
        "three-box" => demo_three_box(),
        "rotated" => demo_rotated(),
        _ => Err(ScenarioError::UnknownDemo {
            name: name.to_string(),
        }),
    }
}

fn demo_margenau() -> Result<String, ScenarioError> {
    let report = margenau_scenario().map_err(numeric("margenau"))?;
    let naive = match report.naive {
        Conditional::Defined(v) => fmt_prob(v),
        Conditional::Undefined => UNDEFINED_TOKEN.to_string(),
    };
    let mut out = String::new();
    let _ = writeln!(out, "Spin-1/2 retrodiction counterexample");
    let _ = writeln!(out, "====================================");
    let _ = writeln!(out, "preparation:     rho = |z+><z+|");
    let _ = writeln!(out, "slot 1 observes: the y basis {{y+, y-}}");
    let _ = writeln!(out, "slot 2 selects:  |z->");
    let _ = writeln!(out, "asked:           Pr(y+ at slot 1 | selection)");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "naive Bayes denominator <z-|rho|z->:          {}",
        fmt_prob(0.0)
    );
    let _ = writeln!(out, "naive Bayes value:                            {naive}");
    let _ = writeln!(
        out,
        "retrodiction formula value:                   {}",
        fmt_prob(report.abl)
    );
    let _ = writeln!(
        out,
        "brute-force oracle conditional:               {}",
        fmt_prob(report.oracle)
    );
    let _ = writeln!(
        out,
        "marginal sum over the y observation:          {}",
        fmt_prob(report.discrepancy.correct_value)
    );
    let _ = writeln!(
        out,
        "Born weight of z- with no slot-1 observation: {}",
        fmt_prob(report.discrepancy.naive_value.unwrap_or(f64::NAN))
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "The naive route divides by the probability z- would have on an \
         unmeasured system, which vanishes here even though the sequence \
         \"some y outcome, then z-\" happens half the time. The conditioning \
         event is really \"the y observation happened (either outcome), then \
         z-\"; writing that event out gives the well-defined 1/2 above, in \
         agreement with the brute-force oracle. The marginal sum computes the \
         probability of that sequential event, not the Born weight of z- on \
         an undisturbed system; on this instance the two differ by 1/2."
    );
    Ok(out)
}

fn demo_three_box() -> Result<String, ScenarioError> {
    let report = three_box_scenario().map_err(numeric("three-box"))?;
    let mut out = String::new();
    let _ = writeln!(out, "Three-box paradox");
    let _ = writeln!(out, "=================");
    let _ = writeln!(out, "preparation:    psi = {}", fmt_ket(&report.psi));
    let _ = writeln!(out, "post-selection: phi = {}", fmt_ket(&report.phi));
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "observe {{box1, box2∨box3}}, ask box1:  {}  (oracle {})",
        fmt_prob(report.coarse_box1),
        fmt_prob(report.oracle_coarse_box1)
    );
    let _ = writeln!(
        out,
        "observe {{box2, box1∨box3}}, ask box2:  {}  (oracle {})",
        fmt_prob(report.coarse_box2),
        fmt_prob(report.oracle_coarse_box2)
    );
    for (i, (fine, oracle)) in report
        .fine_boxes
        .iter()
        .zip(&report.oracle_fine_boxes)
        .enumerate()
    {
        let _ = writeln!(
            out,
            "observe all three boxes, ask box{}:     {}  (oracle {})",
            i + 1,
            fmt_prob(*fine),
            fmt_prob(*oracle)
        );
    }
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "Under the coarse observation \"box 1 or not\", the grouped block \
         (boxes 2 and 3 together) maps psi onto a state orthogonal to phi, so \
         every post-selected run must have seen box 1; symmetrically for box 2 \
         under its own coarse observation. Under the complete three-box \
         observation each box is retrodicted with probability 1/3. There is no \
         contradiction: \"(box1 or box2 or box3) then phi\" and \"(box1 or not \
         box1) then phi\" are different conditioning events, and the answer \
         depends on which observation was actually performed and then ignored."
    );
    Ok(out)
}

fn demo_rotated() -> Result<String, ScenarioError> {
    let report = rotated_scenario().map_err(numeric("rotated"))?;
    let mut out = String::new();
    let _ = writeln!(out, "Rotated-basis comparison");
    let _ = writeln!(out, "========================");
    let _ = writeln!(out, "preparation:    psi = {}", fmt_ket(&report.psi));
    let _ = writeln!(out, "post-selection: q   = {}", fmt_ket(&report.q));
    let _ = writeln!(
        out,
        "P = standard basis; P' = P rotated about p1 by {:.6} rad",
        report.angle
    );
    let _ = writeln!(out, "asked: Pr(p1 at slot 1 | selection) under each basis");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "value under P:  {}  (oracle {})",
        fmt_prob(report.value_original),
        fmt_prob(report.oracle_original)
    );
    let _ = writeln!(
        out,
        "value under P': {}  (oracle {})",
        fmt_prob(report.value_rotated),
        fmt_prob(report.oracle_rotated)
    );
    let _ = writeln!(
        out,
        "gap:            {}",
        fmt_prob((report.value_original - report.value_rotated).abs())
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "P and P' share the vector the question asks about, and the question \
         mentions nothing else. Yet the answers differ, because the \
         conditioning event includes which complete observation ran at slot 1 \
         before its outcome was ignored. The two plans are different \
         experiments with different joint tables, and the brute-force oracle \
         reproduces both values."
    );
    Ok(out)
}

// ---------------------------------------------------------------------------
// Oracle check
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OracleCheckConfig {
    pub seed: u64,
    pub trials: u32,
    pub max_dim: usize,
}

impl Default for OracleCheckConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            trials: 100,
            max_dim: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OracleCheckSummary {
    pub seed: u64,
    pub trials: u32,
    pub max_dim: usize,
    pub checks: u64,
    pub failures: u64,
    pub worst_deviation: f64,
    /// First failing instance, serialized for replay with `run`.
    pub failure: Option<OracleCheckFailure>,
}

#[derive(Debug, Clone)]
pub struct OracleCheckFailure {
    pub description: String,
    pub scenario: ScenarioFile,
}

struct CheckState {
    checks: u64,
    failures: u64,
    worst: f64,
    failure: Option<OracleCheckFailure>,
}

impl CheckState {
    fn deviation(&mut self, dev: f64, bound: f64, describe: impl FnOnce() -> OracleCheckFailure) {
        self.checks += 1;
        self.worst = self.worst.max(dev);
        if dev > bound {
            self.failures += 1;
            if self.failure.is_none() {
                self.failure = Some(describe());
            }
        }
    }

    fn claim(&mut self, ok: bool, describe: impl FnOnce() -> OracleCheckFailure) {
        self.checks += 1;
        if !ok {
            self.failures += 1;
            if self.failure.is_none() {
                self.failure = Some(describe());
            }
        }
    }
}

fn slot_reference(name: &str) -> SlotSpec {
    SlotSpec {
        basis: Some(name.to_string()),
        ..SlotSpec::default()
    }
}

/// Serializes one random instance as a runnable scenario so that any
/// reported violation can be replayed bit for bit with `run`.
fn instance_scenario(
    rho: &DensityOperator,
    slot1: &ProjectiveDecomposition,
    slot2: &ProjectiveDecomposition,
    target: &str,
    given: &str,
) -> ScenarioFile {
    let dim = rho.dim();
    let matrix: Vec<Vec<[f64; 2]>> = (0..dim)
        .map(|i| {
            (0..dim)
                .map(|j| {
                    let e = rho.matrix().at(i, j);
                    [e.re, e.im]
                })
                .collect()
        })
        .collect();
    let basis_spec = |pvm: &ProjectiveDecomposition| -> BasisSpec {
        BasisSpec {
            kets: pvm
                .blocks()
                .iter()
                .map(|(_, p)| {
                    p.to_ket()
                        .expect("fine block")
                        .amplitudes()
                        .iter()
                        .map(|a| [a.re, a.im])
                        .collect()
                })
                .collect(),
            labels: Some(pvm.labels().map(str::to_string).collect()),
        }
    };
    let mut bases = BTreeMap::new();
    bases.insert("P".to_string(), basis_spec(slot1));
    bases.insert("Q".to_string(), basis_spec(slot2));
    let query = |kind: QueryKind| QuerySpec {
        kind,
        target: Some(target.to_string()),
        given: Some(given.to_string()),
        target_atoms: None,
        given_atoms: None,
    };
    ScenarioFile {
        version: SCENARIO_VERSION,
        dim,
        rho: RhoSpec {
            pure: None,
            matrix: Some(matrix),
        },
        bases,
        slots: vec![slot_reference("P"), slot_reference("Q")],
        queries: vec![
            query(QueryKind::Abl),
            query(QueryKind::Naive),
            query(QueryKind::Corrected),
            query(QueryKind::Classical),
            query(QueryKind::Oracle),
            QuerySpec {
                kind: QueryKind::Discrepancy,
                target: None,
                given: Some(given.to_string()),
                target_atoms: None,
                given_atoms: None,
            },
        ],
    }
}

/// Runs the randomized equivalence and normalization properties: every
/// closed form against the brute-force oracle on fresh instances, fine and
/// coarse, plus the error-cancellation check on the naive pair.
/// Deterministic for a fixed seed.
pub fn oracle_check(config: &OracleCheckConfig) -> Result<OracleCheckSummary, ScenarioError> {
    if config.trials < 1 {
        return Err(ScenarioError::Argument(
            "trials must be at least 1".to_string(),
        ));
    }
    if !(2..=8).contains(&config.max_dim) {
        return Err(ScenarioError::Argument(
            "max-dim must be between 2 and 8".to_string(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = CheckState {
        checks: 0,
        failures: 0,
        worst: 0.0,
        failure: None,
    };

    for trial in 0..config.trials {
        let dim = rng.gen_range(2..=config.max_dim);
        let rho = if rng.gen_bool(0.5) {
            random::random_pure_density(&mut rng, dim)
        } else {
            random::random_density(&mut rng, dim)
        };
        let p_basis = random::random_fine_pvm(&mut rng, dim);
        let q_basis = random::random_fine_pvm(&mut rng, dim);
        let q_index = rng.gen_range(0..dim);
        let q_label = q_basis.blocks()[q_index].0.clone();
        let q = q_basis.blocks()[q_index].1.to_ket().expect("fine block");

        let fail = |description: String| {
            let scenario = instance_scenario(&rho, &p_basis, &q_basis, "1", &q_label);
            move || OracleCheckFailure {
                description,
                scenario,
            }
        };

        // Closed forms against the oracle, target by target.
        let mut abl_values: Vec<(String, Conditional)> = Vec::with_capacity(dim);
        let mut abl_sum = 0.0;
        let mut all_defined = true;
        for (label, _) in p_basis.blocks() {
            let query =
                RetrodictionQuery::new(rho.clone(), p_basis.clone(), q.clone(), label.clone())
                    .map_err(numeric("oracle-check"))?;
            let abl = abl_fine(&query).map_err(numeric("oracle-check"))?;
            let oracle = oracle_conditional(&query).map_err(numeric("oracle-check"))?;
            state.claim(
                abl.is_defined() == oracle.is_defined(),
                fail(format!(
                    "trial {trial}: definedness mismatch at target {label} (dim {dim})"
                )),
            );
            if let (Some(a), Some(o)) = (abl.defined(), oracle.defined()) {
                state.deviation(
                    (a - o).abs(),
                    tol::ORACLE_MATCH,
                    fail(format!(
                        "trial {trial}: abl_fine vs oracle deviation at target {label} (dim {dim})"
                    )),
                );
                abl_sum += a;
                let corrected = corrected_bayes(&query)
                    .map_err(numeric("oracle-check"))?
                    .expect_defined("oracle conditional is defined");
                state.deviation(
                    (corrected - a).abs(),
                    tol::REARRANGED_SUM,
                    fail(format!(
                        "trial {trial}: corrected_bayes vs abl_fine at target {label} (dim {dim})"
                    )),
                );
            } else {
                all_defined = false;
            }
            abl_values.push((label.clone(), abl));
        }
        if all_defined {
            state.deviation(
                (abl_sum - 1.0).abs(),
                tol::ORACLE_MATCH,
                fail(format!(
                    "trial {trial}: abl_fine does not sum to 1 over targets (dim {dim})"
                )),
            );
        }

        // Classical bridge on the extracted model.
        let model = ClassicalModel::from_quantum(&rho, &p_basis, &q_basis)
            .map_err(numeric("oracle-check"))?;
        for (label, abl) in &abl_values {
            let classical =
                classical_retrodict(&model, &q_label, label).map_err(numeric("oracle-check"))?;
            match (abl.defined(), classical.defined()) {
                (Some(a), Some(c)) => state.deviation(
                    (a - c).abs(),
                    tol::CLASSICAL_BRIDGE,
                    fail(format!(
                        "trial {trial}: classical_retrodict vs abl_fine at target {label} (dim {dim})"
                    )),
                ),
                (a, c) => state.claim(
                    a.is_none() && c.is_none(),
                    fail(format!(
                        "trial {trial}: classical/quantum definedness mismatch at target {label} (dim {dim})"
                    )),
                ),
            }
        }

        // The two marginal routes are the same sum.
        let literal = naive_marginal(&rho, &p_basis, &q).map_err(numeric("oracle-check"))?;
        let tabulated = corrected_marginal(&rho, &p_basis, &q).map_err(numeric("oracle-check"))?;
        state.deviation(
            (literal - tabulated).abs(),
            tol::REARRANGED_SUM,
            fail(format!(
                "trial {trial}: marginal sum vs joint-table marginal (dim {dim})"
            )),
        );

        // Error cancellation: a marginal gap forces the naive Bayes value
        // away from the correct one at the heaviest target.
        let born = rho.born_weight(&q).map_err(numeric("oracle-check"))?;
        let marginal_gap = (literal - born).abs();
        if marginal_gap > tol::NONCOMMUTING_GAP {
            let heaviest = abl_values
                .iter()
                .filter_map(|(l, v)| v.defined().map(|x| (l.clone(), x)))
                .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"));
            if let Some((label, abl_value)) = heaviest {
                let query = RetrodictionQuery::new(rho.clone(), p_basis.clone(), q.clone(), label)
                    .map_err(numeric("oracle-check"))?;
                let naive = naive_bayes(&query).map_err(numeric("oracle-check"))?;
                let disagrees = match naive.defined() {
                    None => true,
                    Some(n) => (n - abl_value).abs() > tol::ORACLE_MATCH,
                };
                state.claim(
                    disagrees,
                    fail(format!(
                        "trial {trial}: naive_bayes agrees despite marginal gap {marginal_gap:.3e} (dim {dim})"
                    )),
                );
            }
        }

        // Bayes symmetry at the oracle level.
        let plan = MeasurementPlan::new(
            dim,
            vec![
                p_basis.clone(),
                ProjectiveDecomposition::completion(&q, "q").map_err(numeric("oracle-check"))?,
            ],
        )
        .map_err(numeric("oracle-check"))?;
        let dist = joint_distribution(&rho, &plan).map_err(numeric("oracle-check"))?;
        let first_label = p_basis.blocks()[0].0.clone();
        let p_atom = [EventAtom::new(1, first_label)];
        let q_atom = [EventAtom::new(2, "q")];
        let fwd = dist
            .conditional(&q_atom, &p_atom)
            .map_err(numeric("oracle-check"))?;
        let bwd = dist
            .conditional(&p_atom, &q_atom)
            .map_err(numeric("oracle-check"))?;
        if let (Some(fwd), Some(bwd)) = (fwd.defined(), bwd.defined()) {
            let p_prob = dist
                .event_probability(&p_atom)
                .map_err(numeric("oracle-check"))?;
            let q_prob = dist
                .event_probability(&q_atom)
                .map_err(numeric("oracle-check"))?;
            state.deviation(
                (fwd * p_prob - bwd * q_prob).abs(),
                tol::ORACLE_MATCH,
                fail(format!(
                    "trial {trial}: Bayes symmetry violated (dim {dim})"
                )),
            );
        }

        // Coarse observations against the oracle.
        let labels: Vec<String> = p_basis.labels().map(str::to_string).collect();
        let groups = random::random_partition(&mut rng, &labels, 2);
        let coarse = p_basis.coarsen(&groups).map_err(numeric("oracle-check"))?;
        let mut coarse_sum = 0.0;
        let mut coarse_defined = true;
        for (label, _) in coarse.blocks() {
            let query =
                RetrodictionQuery::new(rho.clone(), coarse.clone(), q.clone(), label.clone())
                    .map_err(numeric("oracle-check"))?;
            let value = abl_coarse(&query).map_err(numeric("oracle-check"))?;
            let oracle = oracle_conditional(&query).map_err(numeric("oracle-check"))?;
            state.claim(
                value.is_defined() == oracle.is_defined(),
                fail(format!(
                    "trial {trial}: coarse definedness mismatch at block {label} (dim {dim})"
                )),
            );
            if let (Some(v), Some(o)) = (value.defined(), oracle.defined()) {
                state.deviation(
                    (v - o).abs(),
                    tol::ORACLE_MATCH,
                    fail(format!(
                        "trial {trial}: abl_coarse vs oracle at block {label} (dim {dim})"
                    )),
                );
                coarse_sum += v;
                let corrected = corrected_bayes(&query)
                    .map_err(numeric("oracle-check"))?
                    .expect_defined("oracle conditional is defined");
                state.deviation(
                    (corrected - v).abs(),
                    tol::REARRANGED_SUM,
                    fail(format!(
                        "trial {trial}: corrected_bayes vs abl_coarse at block {label} (dim {dim})"
                    )),
                );
            } else {
                coarse_defined = false;
            }
        }
        if coarse_defined {
            state.deviation(
                (coarse_sum - 1.0).abs(),
                tol::ORACLE_MATCH,
                fail(format!(
                    "trial {trial}: abl_coarse does not sum to 1 over blocks (dim {dim})"
                )),
            );
        }
    }

    Ok(OracleCheckSummary {
        seed: config.seed,
        trials: config.trials,
        max_dim: config.max_dim,
        checks: state.checks,
        failures: state.failures,
        worst_deviation: state.worst,
        failure: state.failure,
    })
}
