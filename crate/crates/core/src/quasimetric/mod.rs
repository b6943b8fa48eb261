//! The induced quasi-distance, generalized weights, and the quasi-metric,
//! weightability and triangle-orientation checks.

mod distance;
mod oracle;

use std::collections::HashMap;

pub use distance::{
    distance, distance_with, polyline_length, DistanceMethod, DistanceOptions, DistancePath, DistanceResult, COINCIDENCE,
};
pub use oracle::{distance_oracle_grid, OracleResult};

use crate::error::{Error, Result};
use crate::forms::Potential;
use crate::metric::ManifoldPatch;
use crate::report::{max_abs, CheckReport, Detail};

/// Tolerance on triangle-inequality violations.
pub const TRIANGLE_SLACK_TOL: f64 = 1e-6;
/// Threshold on the weightability and orientation residuals.
pub const WEIGHT_THRESHOLD: f64 = 1e-4;

/// `w_a(x) = d(a, x) − d(x, a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSample {
    pub a: Vec<f64>,
    pub x: Vec<f64>,
    pub w: f64,
}

/// Memoized distance queries; each ordered pair is solved once.
pub struct DistanceTable<'a> {
    patch: &'a ManifoldPatch,
    opts: DistanceOptions,
    memo: HashMap<(Vec<u64>, Vec<u64>), f64>,
    non_converged: usize,
}

impl<'a> DistanceTable<'a> {
    pub fn new(patch: &'a ManifoldPatch) -> Self {
        Self::with_options(patch, DistanceOptions::default())
    }

    pub fn with_options(patch: &'a ManifoldPatch, opts: DistanceOptions) -> Self {
        DistanceTable { patch, opts, memo: HashMap::new(), non_converged: 0 }
    }

    /// Best value; non-converged solves are counted, not rejected.
    pub fn get(&mut self, x: &[f64], y: &[f64]) -> Result<f64> {
        let key = (x.iter().map(|v| v.to_bits()).collect(), y.iter().map(|v| v.to_bits()).collect());
        if let Some(&d) = self.memo.get(&key) {
            return Ok(d);
        }
        let r = distance_with(self.patch, x, y, &self.opts)?;
        if !r.converged {
            self.non_converged += 1;
        }
        self.memo.insert(key, r.value);
        Ok(r.value)
    }

    pub fn non_converged(&self) -> usize {
        self.non_converged
    }

    pub fn weight(&mut self, a: &[f64], x: &[f64]) -> Result<f64> {
        Ok(self.get(a, x)? - self.get(x, a)?)
    }
}

/// Fails with [`Error::NotConverged`] when either distance does.
pub fn weight(patch: &ManifoldPatch, a: &[f64], x: &[f64]) -> Result<WeightSample> {
    let mut legs = [0.0; 2];
    for (slot, (p, q)) in legs.iter_mut().zip([(a, x), (x, a)]) {
        let r = distance(patch, p, q)?;
        if !r.converged {
            return Err(Error::NotConverged { from: p.to_vec(), to: q.to_vec(), value: r.value });
        }
        *slot = r.value;
    }
    Ok(WeightSample { a: a.to_vec(), x: x.to_vec(), w: legs[0] - legs[1] })
}

fn apart(x: &[f64], y: &[f64]) -> bool {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= COINCIDENCE
}

/// Positivity, triangle inequality and separation over sample triples
/// `(x, y, z)`, testing `d(x, y) ≤ d(x, z) + d(z, y)`.
pub fn quasi_axioms_report(patch: &ManifoldPatch, triples: &[[Vec<f64>; 3]]) -> Result<CheckReport> {
    let mut table = DistanceTable::new(patch);
    let (mut slack, mut asym) = (0.0f64, 0.0f64);
    let (mut positivity, mut separation) = (0usize, 0usize);
    for [x, y, z] in triples {
        let dxy = table.get(x, y)?;
        slack = max_abs(slack, (dxy - table.get(x, z)? - table.get(z, y)?).max(0.0));
        for (p, q) in [(x, y), (y, z), (z, x)] {
            let (d, e) = (table.get(p, q)?, table.get(q, p)?);
            asym = max_abs(asym, d - e);
            if apart(p, q) {
                positivity += usize::from(!(d > 0.0)) + usize::from(!(e > 0.0));
                separation += usize::from(d.abs() < COINCIDENCE && e.abs() < COINCIDENCE);
            }
        }
    }
    let mut report = CheckReport::below("quasi_axioms", triples.len(), slack, TRIANGLE_SLACK_TOL)
        .with_detail(Detail::bounded("positivity_violations", positivity as f64, 0.0))
        .with_detail(Detail::bounded("separation_violations", separation as f64, 0.0))
        .with_detail(Detail::value("symmetry_defect", asym))
        .with_detail(Detail::bounded("non_converged", table.non_converged() as f64, 0.0));
    report.pass = slack <= TRIANGLE_SLACK_TOL && report.details.iter().all(|d| d.pass != Some(false));
    Ok(report)
}

/// Axiom 4 of a weighted quasi-metric with `w = w_a`, the symmetrized form
/// `d(x, y) = ρ(x, y) + ½(w(y) − w(x))`, and the bound `½|w(x) − w(y)| ≤ ρ`.
/// Refuses patches whose 1-form is not closed.
pub fn weightability_report(patch: &ManifoldPatch, a: &[f64], pairs: &[[Vec<f64>; 2]]) -> Result<CheckReport> {
    let potential = Potential::new(patch, a)?;
    let va = potential.value(a)?;
    let mut table = DistanceTable::new(patch);
    let (mut axiom4, mut sym, mut slack, mut consistency) = (0.0f64, 0.0f64, f64::NEG_INFINITY, 0.0f64);
    let mut min_w = f64::INFINITY;
    for [x, y] in pairs {
        let (dxy, dyx) = (table.get(x, y)?, table.get(y, x)?);
        let (wx, wy) = (table.weight(a, x)?, table.weight(a, y)?);
        let rho = 0.5 * (dxy + dyx);
        axiom4 = max_abs(axiom4, dxy + wx - dyx - wy);
        sym = max_abs(sym, dxy - rho - 0.5 * (wy - wx));
        slack = slack.max(0.5 * (wx - wy).abs() - rho);
        for (p, w) in [(x, wx), (y, wy)] {
            consistency = max_abs(consistency, w - 2.0 * (potential.value(p)? - va));
        }
        min_w = min_w.min(wx.min(wy));
    }
    if pairs.is_empty() {
        slack = 0.0;
    }
    let mut report = CheckReport::below("weightability", pairs.len(), axiom4, WEIGHT_THRESHOLD)
        .with_detail(Detail::bounded("symmetrized_form_residual", sym, WEIGHT_THRESHOLD))
        .with_detail(Detail::bounded("half_weight_gap_minus_rho", slack, TRIANGLE_SLACK_TOL))
        .with_detail(Detail::bounded("weight_potential_residual", consistency, WEIGHT_THRESHOLD))
        .with_detail(Detail::value("min_weight", if pairs.is_empty() { 0.0 } else { min_w }))
        .with_detail(Detail::bounded("non_converged", table.non_converged() as f64, 0.0));
    report.pass = report.pass && report.details.iter().all(|d| d.pass != Some(false));
    Ok(report)
}

/// Perimeter in both orientations:
/// `|(d(x,y) + d(y,z) + d(z,x)) − (d(x,z) + d(z,y) + d(y,x))|`.
pub fn triangle_orientation_report(patch: &ManifoldPatch, triples: &[[Vec<f64>; 3]]) -> Result<CheckReport> {
    let mut table = DistanceTable::new(patch);
    let mut defect = 0.0f64;
    let mut first = None;
    for [x, y, z] in triples {
        let ccw = table.get(x, y)? + table.get(y, z)? + table.get(z, x)?;
        let cw = table.get(x, z)? + table.get(z, y)? + table.get(y, x)?;
        first.get_or_insert((ccw, cw));
        defect = max_abs(defect, ccw - cw);
    }
    let mut report = CheckReport::below("triangle_orientation", triples.len(), defect, WEIGHT_THRESHOLD);
    if let Some((ccw, cw)) = first {
        report.details.push(Detail::value("first_perimeter_forward", ccw));
        report.details.push(Detail::value("first_perimeter_backward", cw));
    }
    report.details.push(Detail::bounded("non_converged", table.non_converged() as f64, 0.0));
    let closed = crate::forms::closedness_report(patch, 9)?;
    if !closed.pass {
        report.details.push(
            Detail { pass: Some(false), ..Detail::value("closed_one_form", closed.max_residual) }
                .with_note("theorem precondition violated: the 1-form is not closed"),
        );
    }
    report.pass = report.pass && report.details.iter().all(|d| d.pass != Some(false));
    Ok(report)
}
