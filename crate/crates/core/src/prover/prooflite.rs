use super::ProverError;
use crate::pvs::{print_theory, TheoryAst};

/// Wrap a bare tactic in parentheses: `grind` becomes `(grind)`.
pub fn format_tactic(tactic: &str) -> String {
    let t = tactic.trim();
    if t.starts_with('(') {
        t.to_owned()
    } else {
        format!("({t})")
    }
}

/// The printed theory followed by a ProofLite script for one formula.
pub fn write_prooflite(theory: &TheoryAst, formula_name: &str, tactic: &str) -> Result<String, ProverError> {
    let is_formula = theory
        .declaration(formula_name)
        .is_some_and(|d| d.kind.is_formula());
    if !is_formula {
        return Err(ProverError::UnknownFormula(formula_name.to_owned()));
    }
    let mut out = print_theory(theory).map_err(|e| ProverError::Io(e.to_string()))?;
    out.push_str(&format!("\n%|- {formula_name} : PROOF\n"));
    for line in format_tactic(tactic).lines() {
        out.push_str(&format!("%|- {line}\n"));
    }
    out.push_str("%|- QED\n");
    Ok(out)
}
