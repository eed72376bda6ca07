//! Closed-form retrodiction formulas, correct and deliberately flawed,
//! plus the three named demonstration instances.
//!
//! The retrodiction problem: a system prepared in `rho` is observed once
//! (slot 1, a complete basis or a coarser partition), then observed again
//! and post-selected on a ket `q` (slot 2). Asked for is the probability
//! of a particular slot-1 outcome given the post-selection.
//!
//! Two things can go wrong when writing that probability down, and both
//! are kept here on purpose:
//!
//! * [`naive_bayes`] divides by the Born weight `<q|rho|q>`, the
//!   probability `q` would have on the *unmeasured* system. That event is
//!   not the conditioning event; the formula can be undefined or exceed 1
//!   even when the true conditional is perfectly ordinary.
//! * [`naive_marginal`] computes the right number but calls it the
//!   unconditional probability of `q`. The sum it evaluates is really the
//!   probability of "slot 1 happened (any outcome), then q": the same
//!   arithmetic as [`corrected_marginal`], under a different event.
//!
//! The correct forms, [`abl_fine`], [`abl_coarse`] and [`corrected_bayes`],
//! agree with the brute-force oracle of [`crate::sequence`] everywhere; the
//! naive pair agrees only where `rho` commutes with the slot-1 observation.

use thiserror::Error;

use std::collections::BTreeMap;

use crate::qla::{
    rotate_fixing_axis, DensityOperator, Ket, ProjectiveDecomposition, Projector, QlaError,
};
use crate::sequence::{
    joint_distribution, luders_update, Conditional, EventAtom, MeasurementPlan, SequenceError,
};
use crate::tol;

/// Label used for the post-selection block when a single ket is completed
/// to a full slot-2 observation.
pub const POST_SELECTION_LABEL: &str = "q";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetrodictError {
    #[error(transparent)]
    Qla(#[from] QlaError),

    #[error(transparent)]
    Sequence(#[from] SequenceError),

    #[error("slot-1 observation must be fine (every block rank 1)")]
    FineSlotRequired,

    #[error("target label {label:?} is not a block of the slot-1 observation")]
    TargetNotInSlot1 { label: String },

    #[error("dimension {dim} is too small: need at least {min}")]
    DimensionTooSmall { dim: usize, min: usize },

    #[error("prior probabilities sum to {sum}, expected 1")]
    PriorNotNormalized { sum: f64 },

    #[error("likelihood row for {p_label:?} sums to {sum}, expected 1")]
    LikelihoodRowNotNormalized { p_label: String, sum: f64 },

    #[error("{context} has probability {value} outside [0, 1]")]
    ProbabilityOutOfRange { context: String, value: f64 },

    #[error("unknown outcome label {label:?}")]
    UnknownOutcome { label: String },
}

/// A fully specified retrodiction question: preparation, the slot-1
/// observation actually performed (fine or coarse), the post-selection
/// ket, and which slot-1 outcome is asked about.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrodictionQuery {
    rho: DensityOperator,
    slot1: ProjectiveDecomposition,
    slot2_ket: Ket,
    target_label: String,
}

impl RetrodictionQuery {
    pub fn new(
        rho: DensityOperator,
        slot1: ProjectiveDecomposition,
        slot2_ket: Ket,
        target_label: impl Into<String>,
    ) -> Result<Self, RetrodictError> {
        let target_label = target_label.into();
        if rho.dim() != slot1.dim() {
            return Err(QlaError::DimensionMismatch {
                left: rho.dim(),
                right: slot1.dim(),
            }
            .into());
        }
        if rho.dim() != slot2_ket.dim() {
            return Err(QlaError::DimensionMismatch {
                left: rho.dim(),
                right: slot2_ket.dim(),
            }
            .into());
        }
        if slot1.block(&target_label).is_none() {
            return Err(RetrodictError::TargetNotInSlot1 {
                label: target_label,
            });
        }
        Ok(Self {
            rho,
            slot1,
            slot2_ket,
            target_label,
        })
    }

    pub fn rho(&self) -> &DensityOperator {
        &self.rho
    }

    pub fn slot1(&self) -> &ProjectiveDecomposition {
        &self.slot1
    }

    pub fn slot2_ket(&self) -> &Ket {
        &self.slot2_ket
    }

    pub fn target_label(&self) -> &str {
        &self.target_label
    }

    /// The same query with a different target outcome.
    pub fn with_target(&self, target_label: impl Into<String>) -> Result<Self, RetrodictError> {
        Self::new(
            self.rho.clone(),
            self.slot1.clone(),
            self.slot2_ket.clone(),
            target_label,
        )
    }

    /// The two-slot plan this query describes: the slot-1 observation
    /// followed by the completion of the post-selection ket.
    pub fn plan(&self) -> Result<MeasurementPlan, RetrodictError> {
        let slot2 = ProjectiveDecomposition::completion(&self.slot2_ket, POST_SELECTION_LABEL)?;
        Ok(MeasurementPlan::new(
            self.rho.dim(),
            vec![self.slot1.clone(), slot2],
        )?)
    }
}

fn fine_kets(slot1: &ProjectiveDecomposition) -> Result<Vec<(String, Ket)>, RetrodictError> {
    if !slot1.is_fine() {
        return Err(RetrodictError::FineSlotRequired);
    }
    Ok(slot1
        .blocks()
        .iter()
        .map(|(label, p)| {
            let ket = p.to_ket().expect("fine block has rank 1");
            (label.clone(), ket)
        })
        .collect())
}

/// Retrodiction under a complete slot-1 observation:
/// `|<q|p_j>|^2 <p_j|rho|p_j>` over the sum of the same weights across all
/// slot-1 kets. Undefined when the post-selected event never occurs.
pub fn abl_fine(query: &RetrodictionQuery) -> Result<Conditional, RetrodictError> {
    let kets = fine_kets(query.slot1())?;
    let q = query.slot2_ket();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (label, p) in &kets {
        let overlap = q.inner(p)?.norm_sqr();
        let weight = overlap * query.rho().born_weight(p)?;
        denominator += weight;
        if label == query.target_label() {
            numerator = weight;
        }
    }
    if denominator <= tol::ZERO_PROB {
        return Ok(Conditional::Undefined);
    }
    Ok(Conditional::Defined(
        (numerator / denominator).clamp(0.0, 1.0),
    ))
}

fn coarse_weight(rho: &DensityOperator, block: &Projector, q: &Ket) -> Result<f64, RetrodictError> {
    // <q| E rho E |q> = (E q)^dagger rho (E q), real and nonnegative.
    let eq = block.matrix().apply(q.amplitudes())?;
    Ok(rho.matrix().expectation(&eq)?.re.max(0.0))
}

/// Retrodiction under a possibly coarse slot-1 observation:
/// `tr(Q E_j rho E_j)` over the sum across blocks, with `Q = |q><q|`. For a
/// fine observation this reduces term by term to [`abl_fine`]; for the
/// two-block "p or not p" observation the cross terms of the complement
/// block survive and the value genuinely differs from the fine one.
pub fn abl_coarse(query: &RetrodictionQuery) -> Result<Conditional, RetrodictError> {
    let q = query.slot2_ket();
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for (label, block) in query.slot1().blocks() {
        let weight = coarse_weight(query.rho(), block, q)?;
        denominator += weight;
        if label == query.target_label() {
            numerator = weight;
        }
    }
    if denominator <= tol::ZERO_PROB {
        return Ok(Conditional::Undefined);
    }
    Ok(Conditional::Defined(
        (numerator / denominator).clamp(0.0, 1.0),
    ))
}

/// The naive Bayes route: same numerator as [`abl_fine`], but the
/// denominator is the Born weight `<q|rho|q>` of the unmeasured system.
/// Deliberately flawed; the value may exceed 1 and is reported as-is, and
/// the formula is undefined whenever `<q|rho|q>` vanishes even though the
/// true conditional may be perfectly well defined there.
pub fn naive_bayes(query: &RetrodictionQuery) -> Result<Conditional, RetrodictError> {
    let kets = fine_kets(query.slot1())?;
    let q = query.slot2_ket();
    let denominator = query.rho().born_weight(q)?;
    if denominator <= tol::ZERO_PROB {
        return Ok(Conditional::Undefined);
    }
    let mut numerator = 0.0;
    for (label, p) in &kets {
        if label == query.target_label() {
            numerator = q.inner(p)?.norm_sqr() * query.rho().born_weight(p)?;
        }
    }
    Ok(Conditional::Defined(numerator / denominator))
}

/// The literal marginal sum `sum_s |<p_s|q>|^2 <p_s|rho|p_s>` over a fine
/// basis. The arithmetic is exactly [`corrected_marginal`]; what it is
/// *not* is the probability of `q` on an unmeasured system, despite the
/// naive derivation labeling it that way.
pub fn naive_marginal(
    rho: &DensityOperator,
    slot1: &ProjectiveDecomposition,
    q: &Ket,
) -> Result<f64, RetrodictError> {
    let kets = fine_kets(slot1)?;
    let mut total = 0.0;
    for (_, p) in &kets {
        total += p.inner(q)?.norm_sqr() * rho.born_weight(p)?;
    }
    Ok(total)
}

/// The probability of "the slot-1 observation happened (any outcome), then
/// the post-selection q", computed from the brute-force joint distribution
/// over the two-slot plan. Accepts fine, coarse, or trivial slot-1
/// observations; for a trivial `{I}` slot it reduces to the Born weight of
/// the unmeasured system.
pub fn corrected_marginal(
    rho: &DensityOperator,
    slot1: &ProjectiveDecomposition,
    q: &Ket,
) -> Result<f64, RetrodictError> {
    let slot2 = ProjectiveDecomposition::completion(q, POST_SELECTION_LABEL)?;
    let plan = MeasurementPlan::new(rho.dim(), vec![slot1.clone(), slot2])?;
    let dist = joint_distribution(rho, &plan)?;
    Ok(dist.event_probability(&[EventAtom::new(2, POST_SELECTION_LABEL)])?)
}

/// Side-by-side demonstration that the marginal sum is not the unmeasured
/// Born weight: `naive_value` is `<q|rho|q>`, `correct_value` is the
/// literal marginal sum, `oracle_value` is the brute-force probability of
/// the event the sum actually describes.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub naive_value: Option<f64>,
    pub correct_value: f64,
    pub oracle_value: f64,
    pub gap: Option<f64>,
}

/// Compares the Born weight of `q` on the unmeasured system with the
/// marginal sum over an intervening fine observation. The two agree only
/// when `rho` commutes with the slot-1 basis; their gap is the price of
/// ignoring that an observation took place.
pub fn margenau_discrepancy(
    rho: &DensityOperator,
    slot1: &ProjectiveDecomposition,
    q: &Ket,
) -> Result<DiscrepancyReport, RetrodictError> {
    let unmeasured = rho.born_weight(q)?;
    let correct_value = naive_marginal(rho, slot1, q)?;
    let oracle_value = corrected_marginal(rho, slot1, q)?;
    debug_assert!(
        (correct_value - oracle_value).abs() <= tol::ORACLE_MATCH,
        "marginal sum and oracle disagree: {correct_value} vs {oracle_value}"
    );
    Ok(DiscrepancyReport {
        naive_value: Some(unmeasured),
        correct_value,
        oracle_value,
        gap: Some((unmeasured - correct_value).abs()),
    })
}

/// Bayes's formula with the conditioning event written out in full: the
/// numerator chains the projective update through the target branch, the
/// denominator is [`corrected_marginal`]. Works for fine and coarse slot-1
/// observations and agrees with [`abl_fine`] / [`abl_coarse`].
pub fn corrected_bayes(query: &RetrodictionQuery) -> Result<Conditional, RetrodictError> {
    let denominator = corrected_marginal(query.rho(), query.slot1(), query.slot2_ket())?;
    if denominator <= tol::ZERO_PROB {
        return Ok(Conditional::Undefined);
    }
    let target = query
        .slot1()
        .block(query.target_label())
        .expect("validated at construction");
    let first = luders_update(query.rho(), target)?;
    let numerator = match first.post {
        // A dead branch contributes exactly zero.
        None => 0.0,
        Some(post) => first.probability * post.born_weight(query.slot2_ket())?,
    };
    Ok(Conditional::Defined(
        (numerator / denominator).clamp(0.0, 1.0),
    ))
}

/// A classical two-stage model: priors over the earlier outcomes and
/// likelihood rows for the later one.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalModel {
    prior: BTreeMap<String, f64>,
    // p-label -> q-label -> Prob(q | p); each row sums to 1.
    likelihood: BTreeMap<String, BTreeMap<String, f64>>,
}

impl ClassicalModel {
    pub fn new(
        prior: BTreeMap<String, f64>,
        likelihood: BTreeMap<String, BTreeMap<String, f64>>,
    ) -> Result<Self, RetrodictError> {
        for (label, value) in &prior {
            if !(0.0..=1.0).contains(value) {
                return Err(RetrodictError::ProbabilityOutOfRange {
                    context: format!("prior for {label:?}"),
                    value: *value,
                });
            }
        }
        let prior_sum: f64 = prior.values().sum();
        if (prior_sum - 1.0).abs() > tol::MODEL_NORMALIZATION {
            return Err(RetrodictError::PriorNotNormalized { sum: prior_sum });
        }
        for p_label in prior.keys() {
            let row = likelihood
                .get(p_label)
                .ok_or_else(|| RetrodictError::UnknownOutcome {
                    label: p_label.clone(),
                })?;
            for (q_label, value) in row {
                if !(0.0..=1.0).contains(value) {
                    return Err(RetrodictError::ProbabilityOutOfRange {
                        context: format!("likelihood of {q_label:?} given {p_label:?}"),
                        value: *value,
                    });
                }
            }
            let row_sum: f64 = row.values().sum();
            if (row_sum - 1.0).abs() > tol::MODEL_NORMALIZATION {
                return Err(RetrodictError::LikelihoodRowNotNormalized {
                    p_label: p_label.clone(),
                    sum: row_sum,
                });
            }
        }
        Ok(Self { prior, likelihood })
    }

    /// Extracts the classical model of a quantum instance: priors are the
    /// Born weights of the slot-1 kets, likelihoods the squared overlaps
    /// with the slot-2 basis kets. Both observations must be fine.
    pub fn from_quantum(
        rho: &DensityOperator,
        slot1: &ProjectiveDecomposition,
        slot2: &ProjectiveDecomposition,
    ) -> Result<Self, RetrodictError> {
        let p_kets = fine_kets(slot1)?;
        let q_kets = fine_kets(slot2)?;
        let mut prior = BTreeMap::new();
        let mut likelihood = BTreeMap::new();
        for (p_label, p) in &p_kets {
            prior.insert(p_label.clone(), rho.born_weight(p)?.clamp(0.0, 1.0));
            let mut row = BTreeMap::new();
            for (q_label, q) in &q_kets {
                row.insert(q_label.clone(), q.inner(p)?.norm_sqr().clamp(0.0, 1.0));
            }
            likelihood.insert(p_label.clone(), row);
        }
        Self::new(prior, likelihood)
    }

    pub fn prior(&self, p_label: &str) -> Option<f64> {
        self.prior.get(p_label).copied()
    }

    pub fn likelihood(&self, q_label: &str, p_label: &str) -> Option<f64> {
        self.likelihood.get(p_label)?.get(q_label).copied()
    }

    pub fn p_labels(&self) -> impl Iterator<Item = &str> {
        self.prior.keys().map(String::as_str)
    }
}

/// Classical retrodiction: `Prob(q|p_j) Pr(p_j)` over the total
/// probability of `q` through every earlier outcome. Undefined when that
/// total vanishes.
pub fn classical_retrodict(
    model: &ClassicalModel,
    q_label: &str,
    p_label: &str,
) -> Result<Conditional, RetrodictError> {
    if model.prior(p_label).is_none() {
        return Err(RetrodictError::UnknownOutcome {
            label: p_label.to_string(),
        });
    }
    let mut numerator = 0.0;
    let mut denominator = 0.0;
    for s in model.p_labels() {
        let likelihood =
            model
                .likelihood(q_label, s)
                .ok_or_else(|| RetrodictError::UnknownOutcome {
                    label: q_label.to_string(),
                })?;
        let weight = likelihood * model.prior(s).expect("iterating prior labels");
        denominator += weight;
        if s == p_label {
            numerator = weight;
        }
    }
    if denominator <= tol::ZERO_PROB {
        return Ok(Conditional::Undefined);
    }
    Ok(Conditional::Defined(
        (numerator / denominator).clamp(0.0, 1.0),
    ))
}

/// The brute-force value of the same conditional a query's closed form
/// computes, via the two-slot joint distribution.
pub fn oracle_conditional(query: &RetrodictionQuery) -> Result<Conditional, RetrodictError> {
    let plan = query.plan()?;
    let dist = joint_distribution(query.rho(), &plan)?;
    Ok(dist.conditional(
        &[EventAtom::new(1, query.target_label())],
        &[EventAtom::new(2, POST_SELECTION_LABEL)],
    )?)
}

/// Retrodiction toward the first basis vector under the original fine
/// basis and under its rotation about that same vector. The two
/// observations share the asked-about outcome, yet the values differ in
/// general: the ignored remainder of the observation matters.
pub fn rotated_basis_comparison(
    rho: &DensityOperator,
    slot1: &ProjectiveDecomposition,
    q: &Ket,
    angles: &[f64],
) -> Result<(Conditional, Conditional), RetrodictError> {
    if rho.dim() < 3 {
        // In dimension 2 the complement rotation is a phase and the two
        // values necessarily coincide.
        return Err(RetrodictError::DimensionTooSmall {
            dim: rho.dim(),
            min: 3,
        });
    }
    let fixed_label = slot1
        .blocks()
        .first()
        .map(|(l, _)| l.clone())
        .ok_or(QlaError::EmptyDecomposition)?;
    let rotated = rotate_fixing_axis(slot1, &fixed_label, angles)?;
    let original_query =
        RetrodictionQuery::new(rho.clone(), slot1.clone(), q.clone(), fixed_label.clone())?;
    let rotated_query = RetrodictionQuery::new(rho.clone(), rotated, q.clone(), fixed_label)?;
    Ok((abl_fine(&original_query)?, abl_fine(&rotated_query)?))
}

/// The canonical spin-1/2 counterexample: prepare `|z+>`, observe the y
/// basis, post-select on `|z->`.
#[derive(Debug, Clone, PartialEq)]
pub struct MargenauReport {
    /// Undefined: the naive denominator `<z-|rho|z->` vanishes.
    pub naive: Conditional,
    /// The correct retrodiction toward `y+`, 1/2.
    pub abl: f64,
    /// The brute-force value of the same conditional.
    pub oracle: f64,
    /// Unmeasured Born weight 0 versus marginal sum 1/2.
    pub discrepancy: DiscrepancyReport,
}

pub fn margenau_scenario() -> Result<MargenauReport, RetrodictError> {
    let (rho, y, z_minus) = margenau_instance()?;
    let query = RetrodictionQuery::new(rho.clone(), y.clone(), z_minus.clone(), "y+")?;
    let naive = naive_bayes(&query)?;
    let abl = abl_fine(&query)?.expect_defined("post-selection occurs half the time");
    let oracle = oracle_conditional(&query)?.expect_defined("same event as the closed form");
    let discrepancy = margenau_discrepancy(&rho, &y, &z_minus)?;
    Ok(MargenauReport {
        naive,
        abl,
        oracle,
        discrepancy,
    })
}

/// Building blocks of the spin-1/2 counterexample: `|z+>` preparation, the
/// y basis, and the `|z->` post-selection ket.
pub fn margenau_instance() -> Result<(DensityOperator, ProjectiveDecomposition, Ket), RetrodictError>
{
    use num_complex::Complex64;
    let s = 1.0 / 2.0_f64.sqrt();
    let y_plus = Ket::new(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)])?;
    let y_minus = Ket::new(vec![Complex64::new(s, 0.0), Complex64::new(0.0, -s)])?;
    let y = ProjectiveDecomposition::from_labeled_kets(vec![
        ("y+".into(), y_plus),
        ("y-".into(), y_minus),
    ])?;
    let rho = DensityOperator::from_ket(&Ket::basis_vector(2, 0)?);
    let z_minus = Ket::basis_vector(2, 1)?;
    Ok((rho, y, z_minus))
}

/// The three-box instance: prepare `(1,1,1)/sqrt 3`, post-select on
/// `(1,1,-1)/sqrt 3`, and ask where the system was in between.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeBoxReport {
    pub psi: Ket,
    pub phi: Ket,
    /// Retrodiction for box 1 under the observation "box 1 or not": 1.
    pub coarse_box1: f64,
    /// Retrodiction for box 2 under the observation "box 2 or not": 1.
    pub coarse_box2: f64,
    /// Retrodiction for each box under the full three-box observation:
    /// 1/3 each.
    pub fine_boxes: Vec<f64>,
    pub oracle_coarse_box1: f64,
    pub oracle_coarse_box2: f64,
    pub oracle_fine_boxes: Vec<f64>,
}

pub fn three_box_scenario() -> Result<ThreeBoxReport, RetrodictError> {
    let psi = Ket::from_reals(&[1.0, 1.0, 1.0])?;
    let phi = Ket::from_reals(&[1.0, 1.0, -1.0])?;
    let rho = DensityOperator::from_ket(&psi);
    let boxes = ProjectiveDecomposition::from_labeled_kets(vec![
        ("box1".into(), Ket::basis_vector(3, 0)?),
        ("box2".into(), Ket::basis_vector(3, 1)?),
        ("box3".into(), Ket::basis_vector(3, 2)?),
    ])?;

    let coarse = |kept: &str, others: [&str; 2]| -> Result<f64, RetrodictError> {
        let grouping = vec![
            vec![kept.to_string()],
            vec![others[0].to_string(), others[1].to_string()],
        ];
        let slot1 = boxes.coarsen(&grouping)?;
        let query = RetrodictionQuery::new(rho.clone(), slot1, phi.clone(), kept)?;
        Ok(abl_coarse(&query)?.expect_defined("three-box denominators are positive"))
    };
    let coarse_oracle = |kept: &str, others: [&str; 2]| -> Result<f64, RetrodictError> {
        let grouping = vec![
            vec![kept.to_string()],
            vec![others[0].to_string(), others[1].to_string()],
        ];
        let slot1 = boxes.coarsen(&grouping)?;
        let query = RetrodictionQuery::new(rho.clone(), slot1, phi.clone(), kept)?;
        Ok(oracle_conditional(&query)?.expect_defined("three-box denominators are positive"))
    };

    let mut fine_boxes = Vec::new();
    let mut oracle_fine_boxes = Vec::new();
    for label in ["box1", "box2", "box3"] {
        let query = RetrodictionQuery::new(rho.clone(), boxes.clone(), phi.clone(), label)?;
        fine_boxes.push(abl_fine(&query)?.expect_defined("three-box denominators are positive"));
        oracle_fine_boxes.push(
            oracle_conditional(&query)?.expect_defined("three-box denominators are positive"),
        );
    }

    let coarse_box1 = coarse("box1", ["box2", "box3"])?;
    let coarse_box2 = coarse("box2", ["box1", "box3"])?;
    let oracle_coarse_box1 = coarse_oracle("box1", ["box2", "box3"])?;
    let oracle_coarse_box2 = coarse_oracle("box2", ["box1", "box3"])?;
    Ok(ThreeBoxReport {
        psi,
        phi,
        coarse_box1,
        coarse_box2,
        fine_boxes,
        oracle_coarse_box1,
        oracle_coarse_box2,
        oracle_fine_boxes,
    })
}

/// The rotated-basis instance derived from the three-box states: the
/// standard basis versus its quarter-turn rotation about the first vector.
#[derive(Debug, Clone, PartialEq)]
pub struct RotatedReport {
    pub psi: Ket,
    pub q: Ket,
    pub angle: f64,
    /// Retrodiction toward the shared vector under the original basis, 1/3.
    pub value_original: f64,
    /// Under the rotated basis; differs by well more than rounding.
    pub value_rotated: f64,
    pub oracle_original: f64,
    pub oracle_rotated: f64,
}

pub fn rotated_scenario() -> Result<RotatedReport, RetrodictError> {
    let psi = Ket::from_reals(&[1.0, 1.0, 1.0])?;
    let q = Ket::from_reals(&[1.0, 1.0, -1.0])?;
    let rho = DensityOperator::from_ket(&psi);
    let basis = ProjectiveDecomposition::from_labeled_kets(vec![
        ("p1".into(), Ket::basis_vector(3, 0)?),
        ("p2".into(), Ket::basis_vector(3, 1)?),
        ("p3".into(), Ket::basis_vector(3, 2)?),
    ])?;
    let angle = std::f64::consts::FRAC_PI_4;
    let (value_original, value_rotated) = {
        let (a, b) = rotated_basis_comparison(&rho, &basis, &q, &[angle])?;
        (
            a.expect_defined("post-selection overlaps the basis"),
            b.expect_defined("post-selection overlaps the rotated basis"),
        )
    };
    let rotated = rotate_fixing_axis(&basis, "p1", &[angle])?;
    let oracle_original = oracle_conditional(&RetrodictionQuery::new(
        rho.clone(),
        basis,
        q.clone(),
        "p1",
    )?)?
    .expect_defined("same event as the closed form");
    let oracle_rotated = oracle_conditional(&RetrodictionQuery::new(
        rho.clone(),
        rotated,
        q.clone(),
        "p1",
    )?)?
    .expect_defined("same event as the closed form");
    Ok(RotatedReport {
        psi,
        q,
        angle,
        value_original,
        value_rotated,
        oracle_original,
        oracle_rotated,
    })
}
