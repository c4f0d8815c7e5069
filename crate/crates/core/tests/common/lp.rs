//! Exhaustive enumeration of the integer points of a small linear model, by
//! interval propagation and branching. Continuous variables only take integer
//! values, which covers every schedule on the integer time grid.

use hybridsched::encoder::{Coef, LinearModel, Sense, VarKind};

pub struct Points {
    pub solutions: Vec<Vec<Coef>>,
    /// False when `cap` stopped the enumeration early.
    pub complete: bool,
}

/// `Σ a_j x_j <= b` with integer coefficients.
struct Row {
    terms: Vec<(usize, i64)>,
    rhs: i64,
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 { a.abs() } else { gcd(b, a % b) }
}

fn scaled(terms: &[(usize, Coef)], rhs: Coef, sign: i64) -> Row {
    let lcm = terms
        .iter()
        .map(|t| *t.1.denom())
        .chain([*rhs.denom()])
        .fold(1i64, |a, b| a / gcd(a, b) * b);
    let int = |c: Coef| {
        let v = c * Coef::from_integer(lcm);
        v.to_integer() * sign
    };
    Row {
        terms: terms.iter().map(|&(j, a)| (j, int(a))).collect(),
        // scaled sums are integers, so a fractional bound rounds down
        rhs: (rhs * Coef::from_integer(lcm * sign)).floor().to_integer(),
    }
}

fn rows(model: &LinearModel) -> Vec<Row> {
    let mut out = Vec::new();
    for c in &model.constraints {
        match c.sense {
            Sense::Le => out.push(scaled(&c.terms, c.rhs, 1)),
            Sense::Ge => out.push(scaled(&c.terms, c.rhs, -1)),
            Sense::Eq => {
                out.push(scaled(&c.terms, c.rhs, 1));
                out.push(scaled(&c.terms, c.rhs, -1));
            }
        }
    }
    out
}

fn propagate(rows: &[Row], lo: &mut [i64], hi: &mut [i64]) -> bool {
    loop {
        let mut changed = false;
        for r in rows {
            let min_sum: i64 = r.terms.iter().map(|&(j, a)| if a > 0 { a * lo[j] } else { a * hi[j] }).sum();
            if min_sum > r.rhs {
                return false;
            }
            let slack = r.rhs - min_sum;
            for &(j, a) in &r.terms {
                if a > 0 {
                    let new_hi = lo[j] + slack.div_euclid(a);
                    if new_hi < hi[j] {
                        hi[j] = new_hi;
                        changed = true;
                    }
                } else {
                    let b = -a;
                    let new_lo = hi[j] - slack.div_euclid(b);
                    if new_lo > lo[j] {
                        lo[j] = new_lo;
                        changed = true;
                    }
                }
                if lo[j] > hi[j] {
                    return false;
                }
            }
        }
        if !changed {
            return true;
        }
    }
}

pub fn integer_points(model: &LinearModel, cap: usize) -> Points {
    let rows = rows(model);
    let mut lo: Vec<i64> = model.variables.iter().map(|v| v.lower.ceil().to_integer()).collect();
    let mut hi: Vec<i64> = model.variables.iter().map(|v| v.upper.floor().to_integer()).collect();
    let binary: Vec<bool> = model.variables.iter().map(|v| v.kind == VarKind::Binary).collect();
    let mut pts = Points { solutions: Vec::new(), complete: true };
    if propagate(&rows, &mut lo, &mut hi) {
        branch(&rows, &binary, lo, hi, cap, &mut pts);
    }
    pts
}

fn branch(rows: &[Row], binary: &[bool], lo: Vec<i64>, hi: Vec<i64>, cap: usize, pts: &mut Points) {
    if !pts.complete {
        return;
    }
    // binaries first, then the narrowest domain
    let pick = (0..lo.len())
        .filter(|&j| lo[j] < hi[j])
        .min_by_key(|&j| (!binary[j], hi[j] - lo[j], j));
    let Some(j) = pick else {
        if pts.solutions.len() == cap {
            pts.complete = false;
            return;
        }
        pts.solutions.push(lo.iter().map(|&v| Coef::from_integer(v)).collect());
        return;
    };
    for v in lo[j]..=hi[j] {
        let (mut l, mut h) = (lo.clone(), hi.clone());
        l[j] = v;
        h[j] = v;
        if propagate(rows, &mut l, &mut h) {
            branch(rows, binary, l, h, cap, pts);
        }
    }
}
