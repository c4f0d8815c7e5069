//! LP-format text output.
//!
//! ```text
//! \ <comment>
//! Minimize
//!  obj: <terms>            (empty for a feasibility model)
//! Subject To
//!  <name>: <terms> <sense> <rhs>
//! Bounds
//!  <lower> <= <continuous var> <= <upper>
//! Binaries
//!  <binary var>
//! End
//! ```
//!
//! Terms are written as `+ a name` / `- a name`, with at most eight terms per
//! line. Integral numbers are printed without a fraction, others with six
//! fractional digits.

use std::fmt::Write;

use num_rational::Ratio;

use super::model::{Coef, LinearModel, VarKind};

const TERMS_PER_LINE: usize = 8;

pub fn write_lp(model: &LinearModel) -> String {
    let mut s = String::new();
    s.push_str("\\ hybridsched model\n");
    s.push_str("Minimize\n obj:");
    if let Some(obj) = &model.objective {
        write_terms(&mut s, model, obj);
    }
    s.push('\n');

    s.push_str("Subject To\n");
    for c in &model.constraints {
        let _ = write!(s, " {}:", c.name);
        if c.terms.is_empty() {
            // LP readers need a variable on the left; zero is harmless
            let _ = write!(s, " 0 {}", model.variables.first().map_or("x", |v| v.name.as_str()));
        }
        write_terms(&mut s, model, &c.terms);
        let _ = writeln!(s, " {} {}", c.sense.symbol(), number(c.rhs));
    }

    s.push_str("Bounds\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Continuous) {
        let _ = writeln!(s, " {} <= {} <= {}", number(v.lower), v.name, number(v.upper));
    }
    s.push_str("Binaries\n");
    for v in model.variables.iter().filter(|v| v.kind == VarKind::Binary) {
        let _ = writeln!(s, " {}", v.name);
    }
    s.push_str("End\n");
    s
}

fn write_terms(s: &mut String, model: &LinearModel, terms: &[(usize, Coef)]) {
    for (n, &(i, a)) in terms.iter().enumerate() {
        if n > 0 && n % TERMS_PER_LINE == 0 {
            s.push_str("\n  ");
        }
        let sign = if a < Coef::from(0) { '-' } else { '+' };
        let _ = write!(s, " {sign} {} {}", number(if a < Coef::from(0) { -a } else { a }), model.variables[i].name);
    }
}

/// Integers as-is, everything else rounded to six fractional digits.
pub(crate) fn number(x: Coef) -> String {
    if x.is_integer() {
        return x.to_integer().to_string();
    }
    let scaled = (x * Ratio::from_integer(1_000_000)).round().to_integer();
    let sign = if scaled < 0 { "-" } else { "" };
    let a = scaled.unsigned_abs();
    format!("{sign}{}.{:06}", a / 1_000_000, a % 1_000_000)
}
