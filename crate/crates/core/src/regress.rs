//! Logistic-regression models over labeled slot records: maximum-likelihood
//! fits via iteratively reweighted least squares, Wald tests from the
//! inverse observed information, and the `(coefficient, p-value)` table
//! rendering used by the report bundle.
//!
//! No regularization is applied; quasi-separated designs are allowed to
//! diverge and are flagged via `separation_warning` instead of suppressed.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metrics::{LabeledSlotRecord, RecordLabel};
use crate::templgen::{AdverbCondition, GenderStatus, ReferentRole, SubsetKind};
use crate::vocab::{AdjType, Sentiment, Stereotype};
use crate::BinaryGender;

use std::collections::HashMap;

/// The three model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelKind {
    Adverb,
    Character,
    Structural,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::Adverb, ModelKind::Character, ModelKind::Structural];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Adverb => "adverb",
            ModelKind::Character => "character",
            ModelKind::Structural => "structural",
        }
    }

    /// Term list in table order.
    pub fn terms(self) -> Vec<&'static str> {
        let adjective = [
            "Adj Stereo(M)",
            "Adj Stereo(F)",
            "Adj Sentiment(neg)",
            "Adj Type(appearance)",
        ];
        match self {
            ModelKind::Adverb => {
                let mut t = vec!["Intercept"];
                t.extend(adjective);
                t.extend(["Adv Stereo(M)", "Adv Stereo(F)"]);
                t
            }
            ModelKind::Character => {
                let mut t = vec!["Intercept"];
                t.extend(adjective);
                t.push("Character Stereo(F)");
                t
            }
            ModelKind::Structural => {
                let mut t = vec!["Intercept", "True(M)"];
                t.extend(adjective);
                t.extend([
                    "You(M)",
                    "You(F)",
                    "Lookahead(M)",
                    "Lookahead(F)",
                    "Consistency(M)",
                    "Consistency(F)",
                    "Opposite(M)",
                ]);
                t
            }
        }
    }

    /// Records entering the model's design matrix (before label filtering).
    pub fn selects(self, r: &LabeledSlotRecord) -> bool {
        match self {
            ModelKind::Adverb => r.subset_kind == SubsetKind::StereoAdverb,
            ModelKind::Character => {
                matches!(
                    r.subset_kind,
                    SubsetKind::StereoCharSingle | SubsetKind::StereoCharDialogue
                ) && r.gender_status == GenderStatus::Ambiguous
            }
            ModelKind::Structural => r.subset_kind.is_structure(),
        }
    }
}

#[derive(Debug, Error)]
pub enum RegressError {
    #[error("design matrix is singular; offending terms: {terms:?}")]
    SingularInformation { terms: Vec<String> },
    #[error("{rows} rows but {cols} columns; need rows >= columns")]
    TooFewRows { rows: usize, cols: usize },
    #[error("outcome vector contains a value other than 0 and 1")]
    InvalidOutcome,
}

/// A built design matrix plus the degenerate-column warnings that came with
/// it (constant columns are reported but retained).
#[derive(Debug, Clone)]
pub struct Design {
    pub terms: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub warnings: Vec<String>,
}

/// Encode the model's design over the M/F-labeled records of its subset.
/// Feminine declensions are the positive class; reference categories are
/// all-zeros rows.
pub fn build_design(records: &[LabeledSlotRecord], model: ModelKind) -> Result<Design, RegressError> {
    // prior-slot labels for the consistency terms, keyed by
    // (system, instance, slot)
    let mut labels: HashMap<(&str, &str, usize), RecordLabel> = HashMap::new();
    for r in records {
        labels.insert(
            (r.system_id.as_str(), r.instance_id.as_str(), r.slot_index),
            r.label,
        );
    }
    let consistency_of = |r: &LabeledSlotRecord| -> Option<BinaryGender> {
        r.prior_same_referent_slots
            .iter()
            .rev()
            .filter_map(|&i| labels.get(&(r.system_id.as_str(), r.instance_id.as_str(), i)))
            .find_map(|l| l.as_binary())
    };

    let terms: Vec<String> = model.terms().into_iter().map(str::to_string).collect();
    let mut x = Vec::new();
    let mut y = Vec::new();
    for r in records.iter().filter(|r| model.selects(r)) {
        let Some(label) = r.label.as_binary() else {
            continue;
        };
        let flag = |b: bool| if b { 1.0 } else { 0.0 };
        let truth = r.gender_status.true_gender();
        let mut row = vec![1.0];
        if model == ModelKind::Structural {
            row.push(flag(truth == Some(BinaryGender::M)));
        }
        row.push(flag(r.adj_stereotype == Stereotype::M));
        row.push(flag(r.adj_stereotype == Stereotype::F));
        row.push(flag(r.sentiment == Sentiment::Negative));
        row.push(flag(r.adj_type == AdjType::Appearance));
        match model {
            ModelKind::Adverb => {
                row.push(flag(r.adverb_condition == AdverbCondition::M));
                row.push(flag(r.adverb_condition == AdverbCondition::F));
            }
            ModelKind::Character => {
                row.push(flag(r.referent_stereotype == Some(BinaryGender::F)));
            }
            ModelKind::Structural => {
                let is_you = r.referent_role == ReferentRole::You;
                row.push(flag(is_you && truth == Some(BinaryGender::M)));
                row.push(flag(is_you && truth == Some(BinaryGender::F)));
                row.push(flag(r.lookahead && truth == Some(BinaryGender::M)));
                row.push(flag(r.lookahead && truth == Some(BinaryGender::F)));
                let consistency = consistency_of(r);
                row.push(flag(consistency == Some(BinaryGender::M)));
                row.push(flag(consistency == Some(BinaryGender::F)));
                row.push(flag(r.other_speaker_gender == Some(BinaryGender::M)));
            }
        }
        debug_assert_eq!(row.len(), terms.len());
        x.push(row);
        y.push(flag(label == BinaryGender::F));
    }

    let mut warnings = Vec::new();
    for (j, term) in terms.iter().enumerate().skip(1) {
        if let Some(first) = x.first() {
            if x.iter().all(|row| row[j] == first[j]) {
                warnings.push(format!("degenerate column: `{term}` is constant across rows"));
            }
        }
    }
    Ok(Design { terms, x, y, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FitOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub divergence_guard: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iter: 100,
            tol: 1e-8,
            divergence_guard: 15.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TermStats {
    pub term: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
    pub stars: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RegressionResult {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model_kind: Option<ModelKind>,
    pub coefficients: Vec<TermStats>,
    pub converged: bool,
    pub iterations: usize,
    pub separation_warning: bool,
    pub n: usize,
    pub log_likelihood: f64,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RegressionResult {
    pub fn coefficient(&self, term: &str) -> Option<&TermStats> {
        self.coefficients.iter().find(|c| c.term == term)
    }
}

/// Maximum-likelihood logistic fit via IRLS (Newton steps with halving),
/// converged when the score vector's max component drops below `tol`.
///
/// Constant non-intercept columns are not estimable; they are kept in the
/// result as aliased terms (estimate 0, p-value 1) with a warning, matching
/// the degenerate-column contract of the design builder.
pub fn fit_logistic(
    x: &[Vec<f64>],
    y: &[f64],
    terms: &[String],
    options: &FitOptions,
) -> Result<RegressionResult, RegressError> {
    let full_p = terms.len();
    if x.len() < full_p {
        return Err(RegressError::TooFewRows {
            rows: x.len(),
            cols: full_p,
        });
    }
    let aliased: Vec<usize> = (1..full_p)
        .filter(|&j| x.iter().all(|row| row[j] == x[0][j]))
        .collect();
    if aliased.is_empty() {
        return fit_logistic_dense(x, y, terms, options);
    }
    let active: Vec<usize> = (0..full_p).filter(|j| !aliased.contains(j)).collect();
    let reduced_x: Vec<Vec<f64>> = x
        .iter()
        .map(|row| active.iter().map(|&j| row[j]).collect())
        .collect();
    let reduced_terms: Vec<String> = active.iter().map(|&j| terms[j].clone()).collect();
    let mut reduced = fit_logistic_dense(&reduced_x, y, &reduced_terms, options)?;
    let mut fitted = std::mem::take(&mut reduced.coefficients).into_iter();
    let mut coefficients = Vec::with_capacity(full_p);
    for (j, term) in terms.iter().enumerate() {
        if aliased.contains(&j) {
            coefficients.push(TermStats {
                term: term.clone(),
                estimate: 0.0,
                std_error: 0.0,
                z: 0.0,
                p_value: 1.0,
                stars: String::new(),
            });
            reduced
                .warnings
                .push(format!("aliased: `{term}` is constant; coefficient not estimable"));
        } else {
            coefficients.push(fitted.next().expect("one fitted stat per active term"));
        }
    }
    reduced.coefficients = coefficients;
    Ok(reduced)
}

fn fit_logistic_dense(
    x: &[Vec<f64>],
    y: &[f64],
    terms: &[String],
    options: &FitOptions,
) -> Result<RegressionResult, RegressError> {
    let n = x.len();
    let p = terms.len();
    if n < p {
        return Err(RegressError::TooFewRows { rows: n, cols: p });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(RegressError::InvalidOutcome);
    }

    let mut beta = vec![0.0; p];
    let mut converged = false;
    let mut iterations = 0;
    let mut ll = log_likelihood(x, y, &beta);
    for iter in 0..options.max_iter {
        iterations = iter + 1;
        let mu = probabilities(x, &beta);
        let mut grad = vec![0.0; p];
        for i in 0..n {
            let resid = y[i] - mu[i];
            for j in 0..p {
                grad[j] += x[i][j] * resid;
            }
        }
        if grad.iter().all(|g| g.abs() < options.tol) {
            converged = true;
            iterations = iter;
            break;
        }
        let info = information(x, &mu);
        let step = cholesky_solve(&info, &grad)
            .ok_or_else(|| singular_terms(&info, terms))?;
        // halve the Newton step until the likelihood does not decrease
        // (beyond summation noise, which scales with |ll|)
        let slack = 1e-9 * (1.0 + ll.abs());
        let mut scale = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let candidate: Vec<f64> = beta
                .iter()
                .zip(&step)
                .map(|(b, s)| b + scale * s)
                .collect();
            let cand_ll = log_likelihood(x, y, &candidate);
            if cand_ll + slack >= ll {
                beta = candidate;
                ll = cand_ll;
                accepted = true;
                break;
            }
            scale /= 2.0;
        }
        if !accepted {
            // cannot improve: treat the current point as final
            break;
        }
    }

    let mu = probabilities(x, &beta);
    let info = information(x, &mu);
    let covariance = cholesky_inverse(&info).ok_or_else(|| singular_terms(&info, terms))?;
    let mut coefficients = Vec::with_capacity(p);
    for j in 0..p {
        let estimate = beta[j];
        let std_error = covariance[j][j].max(0.0).sqrt();
        let z = if std_error > 0.0 { estimate / std_error } else { 0.0 };
        let p_value = two_sided_p(z);
        coefficients.push(TermStats {
            term: terms[j].clone(),
            estimate,
            std_error,
            z,
            p_value,
            stars: stars(p_value).to_string(),
        });
    }
    let separation_warning =
        !converged || beta.iter().any(|b| b.abs() > options.divergence_guard);
    Ok(RegressionResult {
        model_kind: None,
        coefficients,
        converged,
        iterations,
        separation_warning,
        n,
        log_likelihood: ll,
        warnings: Vec::new(),
    })
}

/// Filter, build and fit one model over the records.
pub fn run_regression(
    records: &[LabeledSlotRecord],
    model: ModelKind,
    options: &FitOptions,
) -> Result<RegressionResult, RegressError> {
    let design = build_design(records, model)?;
    let mut result = fit_logistic(&design.x, &design.y, &design.terms, options)?;
    result.model_kind = Some(model);
    result.warnings.extend(design.warnings);
    Ok(result)
}

fn probabilities(x: &[Vec<f64>], beta: &[f64]) -> Vec<f64> {
    x.iter()
        .map(|row| {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            1.0 / (1.0 + (-eta).exp())
        })
        .collect()
}

fn log_likelihood(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            // ln sigma(eta) = -ln(1 + e^-eta), stable on both tails
            yi * -(1.0 + (-eta).exp()).ln() + (1.0 - yi) * -(1.0 + eta.exp()).ln()
        })
        .sum()
}

/// X' W X with the IRLS weights w = mu (1 - mu), floored to keep the
/// information matrix positive definite under separation.
#[allow(clippy::needless_range_loop)]
fn information(x: &[Vec<f64>], mu: &[f64]) -> Vec<Vec<f64>> {
    let p = x.first().map(|r| r.len()).unwrap_or(0);
    let mut info = vec![vec![0.0; p]; p];
    for (row, &m) in x.iter().zip(mu) {
        let w = (m * (1.0 - m)).max(1e-10);
        for j in 0..p {
            let wj = w * row[j];
            for k in j..p {
                info[j][k] += wj * row[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            info[j][k] = info[k][j];
        }
    }
    info
}

#[allow(clippy::needless_range_loop)]
fn singular_terms(a: &[Vec<f64>], terms: &[String]) -> RegressError {
    // report the first column where the Cholesky pivot collapses
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        for i in j..n {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 1e-12 {
                    return RegressError::SingularInformation {
                        terms: vec![terms[j].clone()],
                    };
                }
                l[j][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    RegressError::SingularInformation { terms: Vec::new() }
}

#[allow(clippy::needless_range_loop)]
fn cholesky_factor(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        for i in j..n {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= l[i][k] * l[j][k];
            }
            if i == j {
                if sum <= 1e-12 {
                    return None;
                }
                l[j][j] = sum.sqrt();
            } else {
                l[i][j] = sum / l[j][j];
            }
        }
    }
    Some(l)
}

#[allow(clippy::needless_range_loop)]
fn cholesky_solve(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let l = cholesky_factor(a)?;
    let n = a.len();
    // forward substitution L z = b
    let mut z = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i][k] * z[k];
        }
        z[i] = sum / l[i][i];
    }
    // back substitution L' x = z
    let mut sol = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = z[i];
        for k in i + 1..n {
            sum -= l[k][i] * sol[k];
        }
        sol[i] = sum / l[i][i];
    }
    Some(sol)
}

#[allow(clippy::needless_range_loop)]
fn cholesky_inverse(a: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = a.len();
    let mut inv = vec![vec![0.0; n]; n];
    let l = cholesky_factor(a)?;
    for col in 0..n {
        let mut e = vec![0.0; n];
        e[col] = 1.0;
        // reuse the factor for each unit vector
        let mut z = vec![0.0; n];
        for i in 0..n {
            let mut sum = e[i];
            for k in 0..i {
                sum -= l[i][k] * z[k];
            }
            z[i] = sum / l[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let mut sum = z[i];
            for k in i + 1..n {
                sum -= l[k][i] * x[k];
            }
            x[i] = sum / l[i][i];
        }
        for i in 0..n {
            inv[i][col] = x[i];
        }
    }
    Some(inv)
}

/// Two-sided normal-approximation p-value of a Wald z statistic.
pub fn two_sided_p(z: f64) -> f64 {
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

/// Significance stars at the 0.05 / 0.01 / 0.001 thresholds (strict).
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// Complementary error function (Cody's rational approximations; relative
/// error around 1e-16 across the double range).
#[allow(clippy::excessive_precision)]
pub fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y < 0.46875 {
        return 1.0 - erf_small(x);
    } else if y <= 4.0 {
        erfc_mid(y)
    } else {
        erfc_large(y)
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

#[allow(clippy::excessive_precision)]
fn erf_small(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let ysq = x * x;
    let mut xnum = A[4] * ysq;
    let mut xden = ysq;
    for i in 0..3 {
        xnum = (xnum + A[i]) * ysq;
        xden = (xden + B[i]) * ysq;
    }
    x * (xnum + A[3]) / (xden + B[3])
}

#[allow(clippy::excessive_precision)]
fn erfc_mid(y: f64) -> f64 {
    const C: [f64; 9] = [
        5.64188496988670089e-1,
        8.88314979438837594e0,
        6.61191906371416295e1,
        2.98635138197400131e2,
        8.81952221241769090e2,
        1.71204761263407058e3,
        2.05107837782607147e3,
        1.23033935479799725e3,
        2.15311535474403846e-8,
    ];
    const D: [f64; 8] = [
        1.57449261107098347e1,
        1.17693950891312499e2,
        5.37181101862009858e2,
        1.62138957456669019e3,
        3.29079923573345963e3,
        4.36261909014324716e3,
        3.43936767414372164e3,
        1.23033935480374942e3,
    ];
    let mut xnum = C[8] * y;
    let mut xden = y;
    for i in 0..7 {
        xnum = (xnum + C[i]) * y;
        xden = (xden + D[i]) * y;
    }
    let result = (xnum + C[7]) / (xden + D[7]);
    scale_by_exp(y, result)
}

#[allow(clippy::excessive_precision)]
fn erfc_large(y: f64) -> f64 {
    const P: [f64; 6] = [
        3.05326634961232344e-1,
        3.60344899949804439e-1,
        1.25781726111229246e-1,
        1.60837851487422766e-2,
        6.58749161529837803e-4,
        1.63153871373020978e-2,
    ];
    const Q: [f64; 5] = [
        2.56852019228982242e0,
        1.87295284992346047e0,
        5.27905102951428412e-1,
        6.05183413124413191e-2,
        2.33520497626869185e-3,
    ];
    const ONE_OVER_SQRT_PI: f64 = 0.5641895835477562869;
    let ysq = 1.0 / (y * y);
    let mut xnum = P[5] * ysq;
    let mut xden = ysq;
    for i in 0..4 {
        xnum = (xnum + P[i]) * ysq;
        xden = (xden + Q[i]) * ysq;
    }
    let mut result = ysq * (xnum + P[4]) / (xden + Q[4]);
    result = (ONE_OVER_SQRT_PI - result) / y;
    scale_by_exp(y, result)
}

/// exp(-y^2) * r computed as exp(-ysq^2) * exp(-del) * r with a truncated
/// ysq, preserving precision for large y.
fn scale_by_exp(y: f64, r: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * r
}

/// `p` in the tables' scientific notation: one-decimal mantissa, uppercase
/// E, sign, at least two exponent digits.
pub fn format_p_sci(p: f64) -> String {
    if p <= 0.0 {
        return "0.0E+00".to_string();
    }
    let mut exponent = p.log10().floor() as i32;
    let mut mantissa = p / 10f64.powi(exponent);
    // rounding the mantissa to one decimal can carry into the next decade
    if (mantissa * 10.0).round() >= 100.0 {
        mantissa /= 10.0;
        exponent += 1;
    }
    let sign = if exponent < 0 { '-' } else { '+' };
    format!("{:.1}E{}{:02}", mantissa, sign, exponent.abs())
}

/// One rendered row: `(estimate, p-value with stars)`.
pub fn render_cell(stats: &TermStats) -> String {
    format!(
        "({:.2},{}{})",
        stats.estimate,
        format_p_sci(stats.p_value),
        stats.stars
    )
}

/// Rows of `term<TAB>(estimate,p)` in the model's term order.
pub fn render_regression_table(result: &RegressionResult) -> String {
    let mut out = String::from("term\tvalue\n");
    for stats in &result.coefficients {
        out.push_str(&format!("{}\t{}\n", stats.term, render_cell(stats)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn erfc_reference_values() {
        // reference values from the standard library of any scientific stack
        let cases = [
            (0.1, 0.8875370839817152),
            (0.5, 0.4795001221869535),
            (1.0, 0.15729920705028513),
            (2.0, 0.004677734981047265),
            (3.0, 2.2090496998585438e-5),
            (5.0, 1.5374597944280351e-12),
            (10.0, 2.088487583762545e-45),
            (-1.0, 1.842700792949715),
        ];
        for (x, expected) in cases {
            let got = erfc(x);
            assert!(
                ((got - expected) / expected).abs() < 1e-12,
                "erfc({x}) = {got}, expected {expected}"
            );
        }
    }

    #[test]
    fn p_value_formatting_matches_table_style() {
        assert_eq!(format_p_sci(3.7e-7), "3.7E-07");
        assert_eq!(format_p_sci(0.93), "9.3E-01");
        assert_eq!(format_p_sci(0.95), "9.5E-01");
        assert_eq!(format_p_sci(1.3e-147), "1.3E-147");
        assert_eq!(format_p_sci(1.0), "1.0E+00");
        assert_eq!(format_p_sci(0.0995), "1.0E-01");
    }

    #[test]
    fn stars_are_strict_thresholds() {
        assert_eq!(stars(0.05), "");
        assert_eq!(stars(0.049), "*");
        assert_eq!(stars(0.01), "*");
        assert_eq!(stars(0.0099), "**");
        assert_eq!(stars(0.001), "**");
        assert_eq!(stars(0.0009), "***");
    }

    #[test]
    fn render_cell_matches_examples() {
        let cell = TermStats {
            term: "Intercept".to_string(),
            estimate: -1.73,
            std_error: 0.34,
            z: -5.08,
            p_value: 3.7e-7,
            stars: stars(3.7e-7).to_string(),
        };
        assert_eq!(render_cell(&cell), "(-1.73,3.7E-07***)");
        let cell = TermStats {
            term: "Adv Stereo(F)".to_string(),
            estimate: 0.05,
            std_error: 0.6,
            z: 0.08,
            p_value: 0.93,
            stars: String::new(),
        };
        assert_eq!(render_cell(&cell), "(0.05,9.3E-01)");
    }

    #[test]
    fn intercept_only_fit_is_logit_of_rate() {
        let n = 1000;
        let positives = 300;
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0]).collect();
        let y: Vec<f64> = (0..n).map(|i| if i < positives { 1.0 } else { 0.0 }).collect();
        let result = fit_logistic(&x, &y, &["Intercept".to_string()], &FitOptions::default())
            .unwrap();
        let expected = (0.3f64 / 0.7).ln();
        assert!((result.coefficients[0].estimate - expected).abs() < 1e-3);
        assert!(result.converged);
        assert!(!result.separation_warning);
    }

    #[test]
    fn perfectly_separated_data_flags_separation() {
        let x: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![1.0, if i < 20 { 0.0 } else { 1.0 }])
            .collect();
        let y: Vec<f64> = (0..40).map(|i| if i < 20 { 0.0 } else { 1.0 }).collect();
        let result = fit_logistic(
            &x,
            &y,
            &["Intercept".to_string(), "x".to_string()],
            &FitOptions::default(),
        )
        .unwrap();
        assert!(result.separation_warning);
        // enormous estimate, p-value near 1, like quasi-separated
        // real-world fits
        assert!(result.coefficients[1].estimate.abs() > 15.0);
        assert!(result.coefficients[1].p_value > 0.9);
    }

    #[test]
    fn collinear_design_is_singular_with_term_names() {
        let x: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                let v = (i % 3) as f64;
                vec![1.0, v, v]
            })
            .collect();
        let y: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let terms = vec!["Intercept".to_string(), "a".to_string(), "b".to_string()];
        match fit_logistic(&x, &y, &terms, &FitOptions::default()) {
            Err(RegressError::SingularInformation { terms }) => {
                assert_eq!(terms, vec!["b".to_string()]);
            }
            other => panic!("expected SingularInformation, got {other:?}"),
        }
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let x = vec![vec![1.0, 0.0]];
        let y = vec![1.0];
        assert!(matches!(
            fit_logistic(&x, &y, &["a".to_string(), "b".to_string()], &FitOptions::default()),
            Err(RegressError::TooFewRows { .. })
        ));
    }

    #[test]
    fn row_permutation_is_inert() {
        use rand::seq::SliceRandom;
        use rand_chacha::rand_core::SeedableRng;
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
        let n = 500;
        let mut rows: Vec<(Vec<f64>, f64)> = (0..n)
            .map(|i| {
                let a = ((i * 37) % 5) as f64 / 4.0;
                let b = ((i * 17) % 3) as f64 / 2.0;
                let eta = -0.5 + 1.5 * a - 0.8 * b;
                let prob = 1.0 / (1.0 + (-eta).exp());
                let y = if ((i * 7919) % 1000) as f64 / 1000.0 < prob { 1.0 } else { 0.0 };
                (vec![1.0, a, b], y)
            })
            .collect();
        let terms: Vec<String> = ["Intercept", "a", "b"].iter().map(|s| s.to_string()).collect();
        let fit = |rows: &[(Vec<f64>, f64)]| {
            let x: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.clone()).collect();
            let y: Vec<f64> = rows.iter().map(|(_, y)| *y).collect();
            fit_logistic(&x, &y, &terms, &FitOptions::default()).unwrap()
        };
        let base = fit(&rows);
        rows.shuffle(&mut rng);
        let permuted = fit(&rows);
        for (a, b) in base.coefficients.iter().zip(&permuted.coefficients) {
            assert!((a.estimate - b.estimate).abs() < 1e-10);
            assert!((a.std_error - b.std_error).abs() < 1e-10);
        }
    }
}
