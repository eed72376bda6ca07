//! Numerical tolerances, fixed in one place.
//!
//! All scenarios of interest live in dimension ≤ 8 with double-precision
//! arithmetic, which leaves at least six digits of headroom between these
//! thresholds and accumulated rounding.

/// Structural invariants checked at construction time: unit norm,
/// Hermiticity, idempotence, block orthogonality, completeness.
pub const STRUCTURAL: f64 = 1e-10;

/// Eigenvalue floor for the positive-semidefiniteness check. Looser than
/// [`STRUCTURAL`] because the Jacobi sweeps used to obtain the spectrum
/// round on their own.
pub const PSD_FLOOR: f64 = 1e-9;

/// Cross-checks that accumulate arithmetic over many terms, such as the
/// rank-versus-trace comparison for projectors.
pub const ACCUMULATED: f64 = 1e-8;

/// Joint-distribution normalization: the table over all outcome sequences
/// must sum to one within this bound.
pub const NORMALIZATION: f64 = 1e-9;

/// Probability entries may round this far below zero; they are clamped to
/// zero when read.
pub const PROB_FLOOR: f64 = 1e-12;

/// Branch and conditioning probabilities at or below this threshold are
/// treated as zero. Conditioning on such an event is undefined, never 0/0.
pub const ZERO_PROB: f64 = 1e-14;

/// Agreement required between a closed-form value and the brute-force
/// oracle value of the same conditional. Also the strict-mode gate in the
/// command-line runner.
pub const ORACLE_MATCH: f64 = 1e-9;

/// Agreement required between two algebraic routes to the same sum, e.g.
/// the literal marginal formula versus the joint-table marginal.
pub const REARRANGED_SUM: f64 = 1e-10;

/// Agreement between the classical retrodiction formula on an extracted
/// model and the quantum fine-grained formula. The two are the same
/// arithmetic expression, so the bound is near machine precision.
pub const CLASSICAL_BRIDGE: f64 = 1e-12;

/// Normalization of classical model priors and likelihood rows.
pub const MODEL_NORMALIZATION: f64 = 1e-12;

/// Marginal gap above which an instance counts as genuinely non-commuting
/// for the error-cancellation checks.
pub const NONCOMMUTING_GAP: f64 = 1e-6;

/// Minimum retrodiction gap asserted between a basis and its rotation
/// about the shared vector on the derived dimension-3 instance.
pub const ROTATION_GAP: f64 = 1e-3;
