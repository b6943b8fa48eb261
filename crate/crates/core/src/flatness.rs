//! Projective flatness: Hamel's relation, the projective factor `P`, and the
//! checks relating flatness of `F`, of the quartic part, and reversibility.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::geodesic::{spray_of, trace_reversibility_defect, REVERSIBLE_DEFECT_THRESHOLD};
use crate::metric::{DirectionPoint, ManifoldPatch, Variant};
use crate::report::{max_abs, CheckReport, Detail};

/// Threshold on exact-derivative Hamel residuals.
pub const FLATNESS_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessSample {
    pub at: DirectionPoint,
    pub hamel: Vec<f64>,
    pub proj_defect: Vec<f64>,
    pub p: f64,
}

/// `∂²F/∂xᵐ∂yᵏ yᵐ − ∂F/∂xᵏ` for the selected metric.
pub fn hamel_residual(patch: &ManifoldPatch, dp: &DirectionPoint, variant: Variant) -> Result<Vec<f64>> {
    dp.check(patch.dim())?;
    let jet = patch.fields(&dp.x)?.jet_f(&dp.y, variant)?;
    let y = DVector::from_column_slice(&dp.y);
    Ok((&jet.dyx * &y - &jet.dx).iter().copied().collect())
}

/// `P = (∂F/∂xᵏ yᵏ) / (2F)`.
pub fn projective_factor(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<f64> {
    dp.check(patch.dim())?;
    let jet = patch.fields(&dp.x)?.jet_f(&dp.y, Variant::Forward)?;
    if !(jet.value > 0.0) {
        return Err(Error::MetricPositivity { value: jet.value, x: dp.x.clone(), y: dp.y.clone() });
    }
    Ok(jet.dx.dot(&DVector::from_column_slice(&dp.y)) / (2.0 * jet.value))
}

/// `Gⁱ − P yⁱ`.
pub fn projective_flat_defect(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<Vec<f64>> {
    let g = spray_of(patch, dp, Variant::Forward)?.g;
    let p = projective_factor(patch, dp)?;
    Ok(g.iter().zip(&dp.y).map(|(gi, yi)| gi - p * yi).collect())
}

pub fn flatness_sample(patch: &ManifoldPatch, dp: &DirectionPoint) -> Result<FlatnessSample> {
    Ok(FlatnessSample {
        at: dp.clone(),
        hamel: hamel_residual(patch, dp, Variant::Forward)?,
        proj_defect: projective_flat_defect(patch, dp)?,
        p: projective_factor(patch, dp)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlatnessReport {
    /// Max Hamel residual of `F`; the report's pass flag.
    pub report: CheckReport,
    pub hamel_forward: f64,
    pub hamel_quartic: f64,
    pub hamel_reverse: f64,
    pub projective_defect: f64,
    /// `F` flat ⇔ quartic part flat, observed on the samples.
    pub flat_iff_quartic_flat: bool,
    /// Trace-reversal check, run only when `F` passes the Hamel test.
    pub reversibility: Option<CheckReport>,
}

/// Hamel residuals over `samples` for `F`, `F(x,−y)` and the quartic metric.
/// No violation found is the strongest possible outcome: the samples cannot
/// certify flatness on the whole patch.
pub fn flatness_report(patch: &ManifoldPatch, samples: &[DirectionPoint]) -> Result<FlatnessReport> {
    if samples.is_empty() {
        return Err(Error::Invalid("flatness report needs at least one sample".into()));
    }
    let (mut fwd, mut quart, mut rev, mut proj) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for dp in samples {
        let norm = |v: Vec<f64>| v.iter().fold(0.0f64, |m, c| max_abs(m, *c));
        fwd = max_abs(fwd, norm(hamel_residual(patch, dp, Variant::Forward)?));
        quart = max_abs(quart, norm(hamel_residual(patch, dp, Variant::Quartic)?));
        rev = max_abs(rev, norm(hamel_residual(patch, dp, Variant::Reverse)?));
        proj = max_abs(proj, norm(projective_flat_defect(patch, dp)?));
    }
    let flat = fwd < FLATNESS_THRESHOLD;
    let consistent = flat == (quart < FLATNESS_THRESHOLD);
    let mut report = CheckReport::below("projective_flatness", samples.len(), fwd, FLATNESS_THRESHOLD)
        .with_detail(Detail::value("hamel_quartic", quart))
        .with_detail(Detail::value("hamel_reverse", rev))
        .with_detail(Detail::value("projective_defect", proj))
        .with_detail(Detail {
            pass: Some(consistent),
            ..Detail::value("flat_iff_quartic_flat", if consistent { 0.0 } else { 1.0 })
        });
    let reversibility = if flat {
        let subset: Vec<_> = samples.iter().take(3).cloned().collect();
        let r = trace_reversibility_defect(patch, &subset, 1.0, 256)?;
        report.details.push(
            Detail::bounded("implied_reversal_defect", r.max_residual, REVERSIBLE_DEFECT_THRESHOLD)
                .with_note("flat metrics must have reversible geodesics"),
        );
        Some(r)
    } else {
        report.details.push(Detail::value("implied_reversal_defect", f64::NAN).with_note("not flat; implication vacuous"));
        None
    };
    Ok(FlatnessReport {
        report,
        hamel_forward: fwd,
        hamel_quartic: quart,
        hamel_reverse: rev,
        projective_defect: proj,
        flat_iff_quartic_flat: consistent,
        reversibility,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::{seed_axes, top_mask, Dual2, Scalar};

    fn patch(a: [&str; 4], b: [&str; 2]) -> ManifoldPatch {
        ManifoldPatch::from_sources("t", vec![[-4.0, 4.0]; 2], &a, &b).unwrap()
    }
    const EUCLID: [&str; 4] = ["1", "0", "0", "1"];
    const CONFORMAL: [&str; 4] = ["exp(0.2*x1)", "0", "0", "exp(0.2*x1)"];

    fn unit_samples() -> Vec<DirectionPoint> {
        (0..6)
            .map(|k| {
                let t = 1.1 * k as f64;
                DirectionPoint::new([0.3 * t.sin(), -0.5 * t.cos()], [t.cos(), t.sin()])
            })
            .collect()
    }

    #[test]
    fn locally_minkowski_is_flat() {
        let p = patch(EUCLID, ["0.2", "0"]);
        let d = DirectionPoint::new([0.3, 0.1], [1.0, 2.0]);
        assert!(hamel_residual(&p, &d, Variant::Forward).unwrap().iter().all(|v| v.abs() < 1e-15));
        assert_eq!(projective_factor(&p, &d).unwrap(), 0.0);
        assert!(projective_flat_defect(&p, &d).unwrap().iter().all(|v| v.abs() < 1e-15));
        let r = flatness_report(&p, &unit_samples()).unwrap();
        assert!(r.report.pass && r.flat_iff_quartic_flat);
        assert!(r.reversibility.unwrap().pass);
    }

    #[test]
    fn rotational_is_not_flat() {
        let p = patch(EUCLID, ["-0.1*x2", "0.1*x1"]);
        let d = DirectionPoint::new([1.0, 1.0], [1.0, 0.0]);
        let h = hamel_residual(&p, &d, Variant::Forward).unwrap();
        assert!(h.iter().map(|v| v * v).sum::<f64>().sqrt() > 1e-3);
        // independent: second-order duals over the whole metric
        let point = [1.0, 1.0, 1.0, 0.0];
        for k in 0..2 {
            let mut mixed = 0.0;
            let mut dfx = 0.0;
            for m in 0..2 {
                let v: Vec<Dual2> = seed_axes(&point, &[m, 2 + k]);
                let f = p.finsler_generic(&v[..2], &v[2..], Variant::Forward).unwrap();
                mixed += f.component(top_mask(2)) * point[2 + m];
                if m == k {
                    dfx = f.component(0b01);
                }
            }
            assert!((h[k] - (mixed - dfx)).abs() < 1e-13);
        }
        let r = flatness_report(&p, &unit_samples()).unwrap();
        assert!(!r.report.pass);
        assert!(r.reversibility.is_none());
    }

    #[test]
    fn hamel_is_degree_one_and_defect_degree_two() {
        let p = patch(CONFORMAL, ["0.05*x1^2", "0"]);
        let d = DirectionPoint::new([0.2, -0.6], [0.7, 0.4]);
        let h1 = hamel_residual(&p, &d, Variant::Forward).unwrap();
        let h3 = hamel_residual(&p, &d.scaled(3.0), Variant::Forward).unwrap();
        let e1 = projective_flat_defect(&p, &d).unwrap();
        let e2 = projective_flat_defect(&p, &d.scaled(2.0)).unwrap();
        for i in 0..2 {
            assert!((h3[i] - 3.0 * h1[i]).abs() < 1e-12);
            assert!((e2[i] - 4.0 * e1[i]).abs() < 1e-12);
        }
        let p1 = projective_factor(&p, &d).unwrap();
        assert!((projective_factor(&p, &d.scaled(2.0)).unwrap() - 2.0 * p1).abs() < 1e-13);
    }

    #[test]
    fn conformal_projective_factor() {
        // α = e^{0.1 x¹}|y|, ∂F/∂x¹ = 0.1 F, so P = ½·0.1·y¹ = 0.05 at y = (1, 0)
        let p = patch(CONFORMAL, ["0", "0"]);
        let d = DirectionPoint::new([0.0, 0.0], [1.0, 0.0]);
        assert!((projective_factor(&p, &d).unwrap() - 0.05).abs() < 1e-15);
        let g = spray_of(&p, &d, Variant::Forward).unwrap().g;
        let defect = projective_flat_defect(&p, &d).unwrap();
        assert!((defect[0] - (g[0] - 0.05)).abs() < 1e-15);
        assert!((defect[1] - g[1]).abs() < 1e-15);
    }

    #[test]
    fn exact_bump_hamel_agrees_for_f_and_quartic() {
        let p = patch(EUCLID, ["0.1*x1", "0"]);
        let r = flatness_report(&p, &unit_samples()).unwrap();
        assert!(r.flat_iff_quartic_flat);
        assert!((r.hamel_forward - r.hamel_quartic).abs() < 1e-12);
        assert!((r.hamel_forward - r.hamel_reverse).abs() < 1e-12);
    }
}
