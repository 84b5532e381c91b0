use serde::{Deserialize, Serialize};

use super::identity::{IdentityId, Params};
use super::scan::{scan, ScanOptions, Verdict};
use crate::hazard::HazardModel;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    Exponential,
    WeibullHalf,
    Neither,
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Classification::Exponential => "Exponential",
            Classification::WeibullHalf => "WeibullHalf",
            Classification::Neither => "Neither",
        })
    }
}

/// One scan behind a classification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyCheck {
    pub identity: IdentityId,
    pub params: Params,
    pub max_rel_residual: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub schema_version: u32,
    pub dist: String,
    pub tol: f64,
    pub checks: Vec<ClassifyCheck>,
    pub classification: Classification,
}

/// Spacing identities with adjacent covariates hold exactly for the
/// exponential and Weibull-½ laws; the linear combination identity keeps
/// only the exponential.
pub fn classify_report(model: &HazardModel, tol: f64) -> Result<ClassifyReport> {
    let opts = ScanOptions::new(model).tol(tol);
    let mut runs: Vec<(IdentityId, Params)> =
        (3..=5).map(|n| (IdentityId::Cor3, Params { m: Some(2), n: Some(n), ..Default::default() })).collect();
    runs.push((IdentityId::Lemma1, Params::default()));
    runs.push((IdentityId::Thm3, Params::krmn(1, 1, 2, 3)));

    let mut checks = Vec::with_capacity(runs.len());
    for (identity, params) in runs {
        let report = scan(identity, &params, model, &opts)?;
        checks.push(ClassifyCheck {
            identity,
            params: report.params,
            max_rel_residual: report.max_rel_residual,
            verdict: report.verdict,
        });
    }
    let confirmed =
        |id: IdentityId| checks.iter().filter(|c| c.identity == id).all(|c| c.verdict == Verdict::Confirmed);
    let classification =
        match (confirmed(IdentityId::Cor3) && confirmed(IdentityId::Lemma1), confirmed(IdentityId::Thm3)) {
            (true, true) => Classification::Exponential,
            (true, false) => Classification::WeibullHalf,
            (false, _) => Classification::Neither,
        };
    Ok(ClassifyReport {
        schema_version: super::scan::SCHEMA_VERSION,
        dist: model.to_string(),
        tol,
        checks,
        classification,
    })
}

pub fn classify(model: &HazardModel, tol: f64) -> Result<Classification> {
    Ok(classify_report(model, tol)?.classification)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decision_table() {
        let cases = [
            (HazardModel::exponential(2.0, 0.0).unwrap(), Classification::Exponential),
            (HazardModel::exponential(0.5, 1.5).unwrap(), Classification::Exponential),
            (HazardModel::weibull(0.5, 1.0).unwrap(), Classification::WeibullHalf),
            (HazardModel::weibull(0.5, 3.0).unwrap(), Classification::WeibullHalf),
            (HazardModel::weibull(2.0, 1.0).unwrap(), Classification::Neither),
            (HazardModel::linear_quadratic(), Classification::Neither),
        ];
        for (model, expected) in cases {
            let report = classify_report(&model, 1e-6).unwrap();
            assert_eq!(report.classification, expected, "{model}: {report:?}");
            assert_eq!(report.checks.len(), 5);
        }
    }
}
