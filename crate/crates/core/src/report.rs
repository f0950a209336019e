//! Verification report types and serialization.
//!
//! Reports are machine-readable and deterministic: identical inputs produce
//! byte-identical JSON and CSV.  CSV numbers carry 17 significant digits so
//! doubles round-trip exactly; JSON uses the shortest round-trip encoding.

use serde::{Deserialize, Serialize};

use crate::integrate::Trajectory;
use crate::invariants::MONITOR_NAMES;
use crate::model::ModelParams;

/// Fixed registry of claim labels a check record may reference.
/// "plumbing" marks checks of artifact machinery rather than of a
/// model identity.
pub mod claims {
    pub const FUNDAMENTAL_BRACKETS: &str = "brackets.fundamental";
    pub const BRACKET_ANTISYMMETRY: &str = "brackets.antisymmetry";
    pub const BRACKET_JACOBI: &str = "brackets.jacobi";
    pub const BRACKET_LEIBNIZ: &str = "brackets.leibniz";
    pub const BRACKET_UNDEFORMED_LIMIT: &str = "brackets.undeformed-limit";
    pub const CONSTANTS_OF_MOTION: &str = "constants.involution";
    pub const CONSERVATION_DRIFT: &str = "constants.flow-drift";
    pub const ACTION_HAMILTONIAN: &str = "action.hamiltonian";
    pub const ACTION_ANGLES: &str = "action.angle-map";
    pub const XI_RELATIONS: &str = "xi.relations";
    pub const XI_FREQUENCY: &str = "xi.frequency-consistency";
    pub const PI_RELATIONS: &str = "pi.relations";
    pub const PI_INVERSE_LITERAL: &str = "pi.inverse-literal";
    pub const PI_FREQUENCY: &str = "pi.frequency-ratio";
    pub const REDUCED_FIELD_MASS_FACTOR: &str = "reduced.angle-rate-mass-factor";
    pub const HIERARCHY_MU_BRACKET: &str = "hierarchy.mu-bracket";
    pub const HIERARCHY_CHAIN_BRACKETS: &str = "hierarchy.chain-brackets";
    pub const HIERARCHY_INVOLUTION: &str = "hierarchy.involution";
    pub const RECURSION_TORSION: &str = "recursion.torsion";
    pub const RECURSION_FLOW_INVARIANCE: &str = "recursion.flow-invariance";
    pub const RECURSION_OMEGA1: &str = "recursion.omega1-lie-derivative";
    pub const RECURSION_EIGENVALUES: &str = "recursion.eigenvalue-integrals";
    pub const SPLIT_OPERATOR: &str = "split.operator-sum";
    pub const SPLIT_CONTRACTION: &str = "split.upsilon-contraction";
    pub const SPLIT_CLOSURE: &str = "split.closure-condition";
    pub const SPLIT_WEDGE: &str = "split.wedge-degeneracy";
    pub const QBH_FIRST_INTEGRALS: &str = "qbh.first-integrals";
    pub const QBH_NON_CLOSED: &str = "qbh.non-closedness";
    pub const QBH_WEAK_OPERATORS: &str = "qbh.weak-operators";
    pub const QBH_WEAK_OPERATORS_LITERAL: &str = "qbh.weak-operators-literal";
    pub const QBH_CONTRACTION: &str = "qbh.contraction-residual";
    pub const QBH_DECOMPOSITION: &str = "qbh.decomposition-sum";
    pub const LRL_CLASSICAL: &str = "lrl.classical-conservation";
    pub const LRL_ROTATION: &str = "lrl.angular-momentum-rotation";
    pub const LRL_ROTATION_LITERAL: &str = "lrl.angular-momentum-rotation-literal";
    pub const LRL_DEFORMED: &str = "lrl.deformed-brackets";
    pub const LRL_SU2: &str = "lrl.su2-surface";
    pub const LRL_COMMUTATION: &str = "lrl.commutation-conditions";
    pub const GAMMA_NORM: &str = "gamma.norm-identity";
    pub const GAMMA_NORM_LITERAL: &str = "gamma.norm-identity-literal";
    pub const EQUATORIAL_STRUCTURE: &str = "equatorial.structure";
    pub const PLUMBING: &str = "plumbing";

    pub fn registry() -> &'static [&'static str] {
        &[
            FUNDAMENTAL_BRACKETS,
            BRACKET_ANTISYMMETRY,
            BRACKET_JACOBI,
            BRACKET_LEIBNIZ,
            BRACKET_UNDEFORMED_LIMIT,
            CONSTANTS_OF_MOTION,
            CONSERVATION_DRIFT,
            ACTION_HAMILTONIAN,
            ACTION_ANGLES,
            XI_RELATIONS,
            XI_FREQUENCY,
            PI_RELATIONS,
            PI_INVERSE_LITERAL,
            PI_FREQUENCY,
            REDUCED_FIELD_MASS_FACTOR,
            HIERARCHY_MU_BRACKET,
            HIERARCHY_CHAIN_BRACKETS,
            HIERARCHY_INVOLUTION,
            RECURSION_TORSION,
            RECURSION_FLOW_INVARIANCE,
            RECURSION_OMEGA1,
            RECURSION_EIGENVALUES,
            SPLIT_OPERATOR,
            SPLIT_CONTRACTION,
            SPLIT_CLOSURE,
            SPLIT_WEDGE,
            QBH_FIRST_INTEGRALS,
            QBH_NON_CLOSED,
            QBH_WEAK_OPERATORS,
            QBH_WEAK_OPERATORS_LITERAL,
            QBH_CONTRACTION,
            QBH_DECOMPOSITION,
            LRL_CLASSICAL,
            LRL_ROTATION,
            LRL_ROTATION_LITERAL,
            LRL_DEFORMED,
            LRL_SU2,
            LRL_COMMUTATION,
            GAMMA_NORM,
            GAMMA_NORM_LITERAL,
            EQUATORIAL_STRUCTURE,
            PLUMBING,
        ]
    }

    pub fn is_registered(label: &str) -> bool {
        registry().contains(&label)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    pub description: String,
    pub claim_ref: String,
    /// Representative evaluation point (empty for grid-aggregate checks).
    pub point: Vec<f64>,
    pub residual: f64,
    /// None for report-only entries (nothing asserted).
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub mode: String,
    /// Known-discrepancy entry: reported, never failing a run.
    pub ledger: bool,
    /// For ledger entries, the residual the discrepancy is expected to have.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_residual: Option<f64>,
}

impl CheckRecord {
    /// Residual check: passes when |residual| ≤ tolerance.
    pub fn residual_check(
        check_id: &str,
        description: &str,
        claim_ref: &str,
        point: Vec<f64>,
        residual: f64,
        tolerance: f64,
    ) -> Self {
        debug_assert!(claims::is_registered(claim_ref));
        CheckRecord {
            check_id: check_id.to_string(),
            description: description.to_string(),
            claim_ref: claim_ref.to_string(),
            point,
            residual,
            tolerance: Some(tolerance),
            pass: residual.abs() <= tolerance,
            mode: "corrected".to_string(),
            ledger: false,
            expected_residual: None,
        }
    }

    /// Lower-bound check: passes when residual > threshold
    /// (used for the non-closedness assertions).
    pub fn exceeds_check(
        check_id: &str,
        description: &str,
        claim_ref: &str,
        point: Vec<f64>,
        residual: f64,
        threshold: f64,
    ) -> Self {
        let mut rec = CheckRecord::residual_check(
            check_id,
            description,
            claim_ref,
            point,
            residual,
            threshold,
        );
        rec.pass = residual > threshold;
        rec
    }

    /// Ledger entry: a known discrepancy with a pinned expected residual.
    /// Passes when the observed residual sits within `window` of it.
    pub fn ledger_check(
        check_id: &str,
        description: &str,
        claim_ref: &str,
        point: Vec<f64>,
        residual: f64,
        expected: f64,
        window: f64,
    ) -> Self {
        debug_assert!(claims::is_registered(claim_ref));
        CheckRecord {
            check_id: check_id.to_string(),
            description: description.to_string(),
            claim_ref: claim_ref.to_string(),
            point,
            residual,
            tolerance: Some(window),
            pass: (residual - expected).abs() <= window,
            mode: "literal".to_string(),
            ledger: true,
            expected_residual: Some(expected),
        }
    }

    /// Report-only entry: a residual printed for the record, nothing asserted.
    pub fn report_only(
        check_id: &str,
        description: &str,
        claim_ref: &str,
        point: Vec<f64>,
        residual: f64,
    ) -> Self {
        debug_assert!(claims::is_registered(claim_ref));
        CheckRecord {
            check_id: check_id.to_string(),
            description: description.to_string(),
            claim_ref: claim_ref.to_string(),
            point,
            residual,
            tolerance: None,
            pass: true,
            mode: "corrected".to_string(),
            ledger: true,
            expected_residual: None,
        }
    }

    pub fn with_mode(mut self, mode: &str) -> Self {
        self.mode = mode.to_string();
        self
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub total: usize,
    /// Non-ledger records that passed / failed.
    pub passed: usize,
    pub failed: usize,
    pub ledger: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: String,
    pub suite: String,
    pub mode: String,
    pub params: ModelParams,
    pub records: Vec<CheckRecord>,
    pub summary: Summary,
    /// The ledger records again, as their own section.
    pub discrepancy_ledger: Vec<CheckRecord>,
}

impl VerificationReport {
    pub fn new(suite: &str, mode: &str, params: ModelParams, records: Vec<CheckRecord>) -> Self {
        let ledger: Vec<CheckRecord> = records.iter().filter(|r| r.ledger).cloned().collect();
        let passed = records.iter().filter(|r| !r.ledger && r.pass).count();
        let failed = records.iter().filter(|r| !r.ledger && !r.pass).count();
        let summary = Summary {
            total: records.len(),
            passed,
            failed,
            ledger: ledger.len(),
        };
        VerificationReport {
            schema_version: "1".to_string(),
            suite: suite.to_string(),
            mode: mode.to_string(),
            params,
            records,
            summary,
            discrepancy_ledger: ledger,
        }
    }

    /// Exit-code predicate: ledger records never fail a run.
    pub fn all_non_ledger_pass(&self) -> bool {
        self.summary.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// CSV with a header row; numbers carry 17 significant digits.
pub fn write_csv(header: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt17(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Trajectory CSV: t, state coordinates, the seven monitors, and the running
/// max-drift of each monitor.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut header: Vec<String> = vec!["t".to_string()];
    header.extend(
        traj.chart
            .coordinate_names()
            .iter()
            .map(|s| (*s).to_string()),
    );
    header.extend(MONITOR_NAMES.iter().map(|s| (*s).to_string()));
    header.extend(MONITOR_NAMES.iter().map(|s| format!("drift_{s}")));
    let drift = traj.running_drift();
    let mut rows = Vec::with_capacity(traj.len());
    for (((t, state), monitors), drift_row) in traj
        .times
        .iter()
        .zip(&traj.states)
        .zip(&traj.monitors)
        .zip(&drift)
    {
        let mut row = Vec::with_capacity(header.len());
        row.push(*t);
        row.extend_from_slice(state);
        row.extend_from_slice(monitors);
        row.extend_from_slice(drift_row);
        rows.push(row);
    }
    write_csv(&header, &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn summary_counts_match_records() {
        let records = vec![
            CheckRecord::residual_check("a", "passes", claims::PLUMBING, vec![], 0.0, 1e-9),
            CheckRecord::residual_check("b", "fails", claims::PLUMBING, vec![], 1.0, 1e-9),
            CheckRecord::ledger_check(
                "c",
                "ledger",
                claims::PI_INVERSE_LITERAL,
                vec![],
                0.75,
                0.75,
                1e-4,
            ),
        ];
        let rep = VerificationReport::new("test", "corrected", ModelParams::default(), records);
        assert_eq!(rep.summary.total, 3);
        assert_eq!(rep.summary.passed, 1);
        assert_eq!(rep.summary.failed, 1);
        assert_eq!(rep.summary.ledger, 1);
        assert_eq!(rep.discrepancy_ledger.len(), 1);
        assert!(!rep.all_non_ledger_pass());
    }

    #[test]
    fn csv_round_trips_doubles() {
        let header = vec!["x".to_string()];
        let v = std::f64::consts::PI / 3.0;
        let csv = write_csv(&header, &[vec![v]]);
        let line = csv.lines().nth(1).unwrap();
        let back: f64 = line.parse().unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn json_is_deterministic() {
        let make = || {
            VerificationReport::new(
                "t",
                "corrected",
                ModelParams::default(),
                vec![CheckRecord::residual_check(
                    "a",
                    "d",
                    claims::PLUMBING,
                    vec![0.1, 0.2],
                    1e-12,
                    1e-9,
                )],
            )
        };
        assert_eq!(make().to_json(), make().to_json());
    }

    #[test]
    fn registry_contains_no_duplicates() {
        let reg = claims::registry();
        for (i, a) in reg.iter().enumerate() {
            for b in &reg[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}
