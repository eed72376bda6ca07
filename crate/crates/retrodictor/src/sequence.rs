//! Exact joint distributions over outcome sequences of projective
//! measurements: the brute-force oracle that every closed form in
//! [`crate::retrodict`] is checked against.
//!
//! A probability here only ever exists relative to a [`MeasurementPlan`]
//! naming every observation that takes place. There is deliberately no way
//! to ask for the probability of a slot-2 outcome without saying what was
//! observed at slot 1: comparing "measured but ignored" with "never
//! measured" requires building two different plans.

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::qla::{DensityOperator, ProjectiveDecomposition, Projector, QlaError};
use crate::tol;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SequenceError {
    #[error(transparent)]
    Qla(#[from] QlaError),

    #[error("slot {ordinal} is out of range: the plan has {slots} slots")]
    OrdinalOutOfRange { ordinal: usize, slots: usize },

    #[error("no block {label:?} in slot {ordinal}")]
    UnknownLabel { ordinal: usize, label: String },

    #[error("slot {ordinal} is constrained more than once")]
    DuplicateOrdinal { ordinal: usize },

    #[error("target and given constrain slot {ordinal} to different labels")]
    ConflictingAtoms { ordinal: usize },

    #[error("joint table sums to {total}, expected 1")]
    NotNormalized { total: f64 },

    #[error("joint table entry {entry} is below the negativity floor")]
    NegativeEntry { entry: f64 },
}

/// One event in a plan: "the observation at `ordinal` (1-based) produced
/// the block labeled `label`".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct EventAtom {
    pub ordinal: usize,
    pub label: String,
}

impl EventAtom {
    pub fn new(ordinal: usize, label: impl Into<String>) -> Self {
        Self {
            ordinal,
            label: label.into(),
        }
    }
}

/// An ordered list of observations, all on the same dimension. Slot `t`
/// (1-based) is the `t`-th measurement performed on the system.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementPlan {
    dim: usize,
    slots: Vec<ProjectiveDecomposition>,
}

impl MeasurementPlan {
    pub fn new(dim: usize, slots: Vec<ProjectiveDecomposition>) -> Result<Self, SequenceError> {
        if dim == 0 {
            return Err(QlaError::ZeroDimension.into());
        }
        for slot in &slots {
            if slot.dim() != dim {
                return Err(QlaError::DimensionMismatch {
                    left: dim,
                    right: slot.dim(),
                }
                .into());
            }
        }
        Ok(Self { dim, slots })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[ProjectiveDecomposition] {
        &self.slots
    }

    pub fn slot(&self, ordinal: usize) -> Option<&ProjectiveDecomposition> {
        if ordinal == 0 {
            return None;
        }
        self.slots.get(ordinal - 1)
    }
}

/// One label per slot, in slot order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct OutcomeSequence {
    labels: Vec<String>,
}

impl OutcomeSequence {
    pub fn new(labels: Vec<String>) -> Self {
        Self { labels }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }
}

/// Result of projecting a state on an outcome: the branch probability and,
/// when that probability is above [`tol::ZERO_PROB`], the updated state.
/// A vanishing branch carries no post-state; it is signaled, not faked.
#[derive(Debug, Clone)]
pub struct LudersOutcome {
    pub probability: f64,
    pub post: Option<DensityOperator>,
}

/// Projective state update: probability `tr(P rho P)` clamped to [0, 1],
/// post-state `P rho P / prob` when the branch survives.
pub fn luders_update(rho: &DensityOperator, p: &Projector) -> Result<LudersOutcome, SequenceError> {
    if rho.dim() != p.dim() {
        return Err(QlaError::DimensionMismatch {
            left: rho.dim(),
            right: p.dim(),
        }
        .into());
    }
    let collapsed = p.matrix().multiply(rho.matrix())?.multiply(p.matrix())?;
    let probability = collapsed.trace().re.clamp(0.0, 1.0);
    if probability <= tol::ZERO_PROB {
        return Ok(LudersOutcome {
            probability,
            post: None,
        });
    }
    let normalized = collapsed.scale(Complex64::new(1.0 / probability, 0.0));
    let post = DensityOperator::new(normalized)?;
    Ok(LudersOutcome {
        probability,
        post: Some(post),
    })
}

/// Exact table of probabilities over every outcome sequence of a plan.
/// Entries are stored in lexicographic order of their label tuples.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution {
    plan: MeasurementPlan,
    table: BTreeMap<OutcomeSequence, f64>,
}

/// Enumerates every branch of the plan, chaining [`luders_update`] along
/// the slots. A branch whose probability vanishes contributes exactly 0 to
/// all of its descendants, keeping the table total.
pub fn joint_distribution(
    rho: &DensityOperator,
    plan: &MeasurementPlan,
) -> Result<JointDistribution, SequenceError> {
    if rho.dim() != plan.dim() {
        return Err(QlaError::DimensionMismatch {
            left: rho.dim(),
            right: plan.dim(),
        }
        .into());
    }
    let mut table = BTreeMap::new();
    let mut prefix = Vec::with_capacity(plan.len());
    descend(Some((1.0, rho.clone())), plan, 0, &mut prefix, &mut table)?;

    let expected: usize = plan.slots().iter().map(|s| s.len()).product();
    debug_assert_eq!(table.len(), expected, "table covers the outcome space");
    let total: f64 = table.values().sum();
    if (total - 1.0).abs() > tol::NORMALIZATION {
        return Err(SequenceError::NotNormalized { total });
    }
    if let Some((_, &entry)) = table.iter().find(|(_, &p)| p < -tol::PROB_FLOOR) {
        return Err(SequenceError::NegativeEntry { entry });
    }
    Ok(JointDistribution {
        plan: plan.clone(),
        table,
    })
}

fn descend(
    state: Option<(f64, DensityOperator)>,
    plan: &MeasurementPlan,
    depth: usize,
    prefix: &mut Vec<String>,
    table: &mut BTreeMap<OutcomeSequence, f64>,
) -> Result<(), SequenceError> {
    if depth == plan.len() {
        let probability = state.as_ref().map_or(0.0, |(p, _)| *p);
        table.insert(OutcomeSequence::new(prefix.clone()), probability);
        return Ok(());
    }
    for (label, projector) in plan.slots()[depth].blocks() {
        prefix.push(label.clone());
        let next = match &state {
            None => None,
            Some((acc, rho)) => {
                let outcome = luders_update(rho, projector)?;
                outcome.post.map(|post| (acc * outcome.probability, post))
            }
        };
        descend(next, plan, depth + 1, prefix, table)?;
        prefix.pop();
    }
    Ok(())
}

impl JointDistribution {
    pub fn plan(&self) -> &MeasurementPlan {
        &self.plan
    }

    /// Probability of one full outcome sequence, clamped at zero.
    pub fn probability(&self, outcome: &OutcomeSequence) -> Option<f64> {
        self.table.get(outcome).map(|p| p.max(0.0))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OutcomeSequence, f64)> {
        self.table.iter().map(|(k, v)| (k, v.max(0.0)))
    }

    fn validate_atoms(&self, atoms: &[EventAtom]) -> Result<(), SequenceError> {
        for (i, atom) in atoms.iter().enumerate() {
            let slot = self
                .plan
                .slot(atom.ordinal)
                .ok_or(SequenceError::OrdinalOutOfRange {
                    ordinal: atom.ordinal,
                    slots: self.plan.len(),
                })?;
            if slot.block(&atom.label).is_none() {
                return Err(SequenceError::UnknownLabel {
                    ordinal: atom.ordinal,
                    label: atom.label.clone(),
                });
            }
            if atoms[..i].iter().any(|a| a.ordinal == atom.ordinal) {
                return Err(SequenceError::DuplicateOrdinal {
                    ordinal: atom.ordinal,
                });
            }
        }
        Ok(())
    }

    /// Probability of the conjunction of the atoms. Slots left
    /// unconstrained are summed over, which is legitimate exactly because
    /// the plan includes those observations.
    pub fn event_probability(&self, atoms: &[EventAtom]) -> Result<f64, SequenceError> {
        self.validate_atoms(atoms)?;
        let mut total = 0.0;
        'outcomes: for (outcome, p) in self.iter() {
            for atom in atoms {
                if outcome.labels()[atom.ordinal - 1] != atom.label {
                    continue 'outcomes;
                }
            }
            total += p;
        }
        Ok(total)
    }

    /// Conditional probability of `target` given `given`, by the ratio of
    /// event probabilities. Conditioning on an event whose probability is
    /// at or below [`tol::ZERO_PROB`] is undefined, never 0/0.
    pub fn conditional(
        &self,
        target: &[EventAtom],
        given: &[EventAtom],
    ) -> Result<Conditional, SequenceError> {
        self.validate_atoms(target)?;
        self.validate_atoms(given)?;
        let mut joint: Vec<EventAtom> = given.to_vec();
        for atom in target {
            match joint.iter().find(|a| a.ordinal == atom.ordinal) {
                Some(existing) if existing.label != atom.label => {
                    return Err(SequenceError::ConflictingAtoms {
                        ordinal: atom.ordinal,
                    });
                }
                Some(_) => {}
                None => joint.push(atom.clone()),
            }
        }
        let denominator = self.event_probability(given)?;
        if denominator <= tol::ZERO_PROB {
            return Ok(Conditional::Undefined);
        }
        let numerator = self.event_probability(&joint)?;
        Ok(Conditional::Defined(
            (numerator / denominator).clamp(0.0, 1.0),
        ))
    }
}

/// Value of a conditional-probability query. `Undefined` marks a
/// conditioning event of vanishing probability; it is a first-class
/// answer, not an error, because several of the deliberately flawed
/// formulas in this crate hit it on perfectly ordinary inputs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conditional {
    Defined(f64),
    Undefined,
}

impl Conditional {
    pub fn defined(self) -> Option<f64> {
        match self {
            Conditional::Defined(v) => Some(v),
            Conditional::Undefined => None,
        }
    }

    pub fn is_defined(self) -> bool {
        matches!(self, Conditional::Defined(_))
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Conditional::Undefined)
    }

    /// Unwraps a value that is defined by construction of the caller.
    pub fn expect_defined(self, context: &str) -> f64 {
        match self {
            Conditional::Defined(v) => v,
            Conditional::Undefined => panic!("conditional unexpectedly undefined: {context}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qla::Ket;
    use approx::assert_abs_diff_eq;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn z_plus() -> Ket {
        Ket::basis_vector(2, 0).unwrap()
    }

    fn y_basis() -> ProjectiveDecomposition {
        let s = 1.0 / 2.0_f64.sqrt();
        ProjectiveDecomposition::from_labeled_kets(vec![
            ("y+".into(), Ket::new(vec![c(s, 0.0), c(0.0, s)]).unwrap()),
            ("y-".into(), Ket::new(vec![c(s, 0.0), c(0.0, -s)]).unwrap()),
        ])
        .unwrap()
    }

    fn z_basis() -> ProjectiveDecomposition {
        ProjectiveDecomposition::from_labeled_kets(vec![
            ("z+".into(), Ket::basis_vector(2, 0).unwrap()),
            ("z-".into(), Ket::basis_vector(2, 1).unwrap()),
        ])
        .unwrap()
    }

    fn margenau_distribution() -> JointDistribution {
        let rho = DensityOperator::from_ket(&z_plus());
        let plan = MeasurementPlan::new(2, vec![y_basis(), z_basis()]).unwrap();
        joint_distribution(&rho, &plan).unwrap()
    }

    #[test]
    fn eigenstate_update_is_certain() {
        let rho = DensityOperator::from_ket(&z_plus());
        let p = Projector::from_ket(&z_plus());
        let out = luders_update(&rho, &p).unwrap();
        assert_abs_diff_eq!(out.probability, 1.0, epsilon = 1e-12);
        let post = out.post.unwrap();
        assert!(post.matrix().sub(rho.matrix()).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn orthogonal_update_signals_a_dead_branch() {
        let rho = DensityOperator::from_ket(&z_plus());
        let p = Projector::from_ket(&Ket::basis_vector(2, 1).unwrap());
        let out = luders_update(&rho, &p).unwrap();
        assert!(out.probability <= tol::ZERO_PROB);
        assert!(out.post.is_none());
    }

    #[test]
    fn unbiased_update_halves_and_collapses() {
        let rho = DensityOperator::from_ket(&z_plus());
        let s = 1.0 / 2.0_f64.sqrt();
        let y_plus = Ket::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let p = Projector::from_ket(&y_plus);
        let out = luders_update(&rho, &p).unwrap();
        assert_abs_diff_eq!(out.probability, 0.5, epsilon = 1e-12);
        let post = out.post.unwrap();
        let expected = DensityOperator::from_ket(&y_plus);
        assert!(post.matrix().sub(expected.matrix()).unwrap().max_norm() < 1e-12);
    }

    #[test]
    fn single_slot_diagonal_state_reads_off_the_diagonal() {
        let rho = DensityOperator::mixture(&[
            (
                0.25,
                DensityOperator::from_ket(&Ket::basis_vector(2, 0).unwrap()),
            ),
            (
                0.75,
                DensityOperator::from_ket(&Ket::basis_vector(2, 1).unwrap()),
            ),
        ])
        .unwrap();
        let plan = MeasurementPlan::new(2, vec![z_basis()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        let p_plus = dist
            .probability(&OutcomeSequence::new(vec!["z+".into()]))
            .unwrap();
        let p_minus = dist
            .probability(&OutcomeSequence::new(vec!["z-".into()]))
            .unwrap();
        assert_abs_diff_eq!(p_plus, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(p_minus, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn margenau_joint_table_is_uniform() {
        let dist = margenau_distribution();
        for (_, p) in dist.iter() {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-12);
        }
    }

    #[test]
    fn empty_atom_set_has_total_probability_one() {
        let dist = margenau_distribution();
        assert_abs_diff_eq!(dist.event_probability(&[]).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn post_selection_marginal_is_one_half() {
        // Pr(some y outcome, then z-) = 1/2 even though <z-|rho|z-> = 0.
        let dist = margenau_distribution();
        let p = dist.event_probability(&[EventAtom::new(2, "z-")]).unwrap();
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn fully_constrained_event_is_a_table_entry() {
        let dist = margenau_distribution();
        let via_event = dist
            .event_probability(&[EventAtom::new(1, "y+"), EventAtom::new(2, "z-")])
            .unwrap();
        let via_table = dist
            .probability(&OutcomeSequence::new(vec!["y+".into(), "z-".into()]))
            .unwrap();
        assert_eq!(via_event, via_table);
    }

    #[test]
    fn margenau_conditional_is_one_half() {
        let dist = margenau_distribution();
        let value = dist
            .conditional(&[EventAtom::new(1, "y+")], &[EventAtom::new(2, "z-")])
            .unwrap();
        assert_abs_diff_eq!(value.expect_defined("margenau"), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn conditional_on_itself_is_one() {
        let dist = margenau_distribution();
        let atoms = [EventAtom::new(1, "y+")];
        let value = dist.conditional(&atoms, &atoms).unwrap();
        assert_abs_diff_eq!(value.expect_defined("self"), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn conditioning_on_an_impossible_event_is_undefined() {
        // One z slot on |z+>: the z- branch never happens.
        let rho = DensityOperator::from_ket(&z_plus());
        let plan = MeasurementPlan::new(2, vec![z_basis()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        let value = dist.conditional(&[], &[EventAtom::new(1, "z-")]).unwrap();
        assert!(value.is_undefined());
    }

    #[test]
    fn measurement_order_matters() {
        // [Y, Z] on |z+> is uniform; [Z, Y] concentrates on z+ branches.
        let rho = DensityOperator::from_ket(&z_plus());
        let reversed = MeasurementPlan::new(2, vec![z_basis(), y_basis()]).unwrap();
        let dist = joint_distribution(&rho, &reversed).unwrap();
        let dead = dist
            .probability(&OutcomeSequence::new(vec!["z-".into(), "y+".into()]))
            .unwrap();
        let live = dist
            .probability(&OutcomeSequence::new(vec!["z+".into(), "y+".into()]))
            .unwrap();
        assert_eq!(dead, 0.0);
        assert_abs_diff_eq!(live, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn duplicate_ordinals_are_rejected() {
        let dist = margenau_distribution();
        let err = dist
            .event_probability(&[EventAtom::new(1, "y+"), EventAtom::new(1, "y+")])
            .unwrap_err();
        assert_eq!(err, SequenceError::DuplicateOrdinal { ordinal: 1 });
    }

    #[test]
    fn conflicting_target_and_given_are_rejected() {
        let dist = margenau_distribution();
        let err = dist
            .conditional(&[EventAtom::new(1, "y+")], &[EventAtom::new(1, "y-")])
            .unwrap_err();
        assert_eq!(err, SequenceError::ConflictingAtoms { ordinal: 1 });
    }

    #[test]
    fn unknown_labels_are_rejected_with_their_slot() {
        let dist = margenau_distribution();
        let err = dist
            .event_probability(&[EventAtom::new(2, "y+")])
            .unwrap_err();
        assert_eq!(
            err,
            SequenceError::UnknownLabel {
                ordinal: 2,
                label: "y+".into()
            }
        );
    }

    #[test]
    fn three_slot_plans_stay_normalized() {
        let rho = DensityOperator::from_ket(&z_plus());
        let plan = MeasurementPlan::new(2, vec![y_basis(), z_basis(), y_basis()]).unwrap();
        let dist = joint_distribution(&rho, &plan).unwrap();
        let total: f64 = dist.iter().map(|(_, p)| p).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
        assert_eq!(dist.iter().count(), 8);
    }
}
