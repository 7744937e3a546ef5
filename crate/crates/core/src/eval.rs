//! Evaluation metrics against a ground-truth table: RMSE, R², error
//! percentage, per-leaf residuals, per dimension.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::LeafMeasurement;
use crate::scalar::{lit, Real};

pub fn rmse<S: Real>(pred: &[S], truth: &[S]) -> Result<S> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            a: pred.len(),
            b: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = lit::<S>(pred.len() as f64);
    let ss: S = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok((ss / n).sqrt())
}

/// Coefficient of determination about the identity prediction:
/// 1 - SS_res / SS_tot with SS_tot about the truth mean.
pub fn r_squared<S: Real>(pred: &[S], truth: &[S]) -> Result<S> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            a: pred.len(),
            b: truth.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let n = lit::<S>(truth.len() as f64);
    let mean: S = truth.iter().copied().sum::<S>() / n;
    let ss_tot: S = truth.iter().map(|&t| (t - mean) * (t - mean)).sum();
    if ss_tot == S::zero() {
        return Err(Error::ConstantTruth);
    }
    let ss_res: S = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(S::one() - ss_res / ss_tot)
}

/// Squared Pearson correlation of the (truth, pred) scatter; the fit-line
/// reading of R². Reported alongside the default when asked for.
pub fn r_squared_pearson<S: Real>(pred: &[S], truth: &[S]) -> Result<S> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            a: pred.len(),
            b: truth.len(),
        });
    }
    if pred.len() < 2 {
        return Err(Error::EmptyInput);
    }
    let n = lit::<S>(truth.len() as f64);
    let mp: S = pred.iter().copied().sum::<S>() / n;
    let mt: S = truth.iter().copied().sum::<S>() / n;
    let mut spt = S::zero();
    let mut spp = S::zero();
    let mut stt = S::zero();
    for (&p, &t) in pred.iter().zip(truth) {
        spt = spt + (p - mp) * (t - mt);
        spp = spp + (p - mp) * (p - mp);
        stt = stt + (t - mt) * (t - mt);
    }
    if stt == S::zero() || spp == S::zero() {
        return Err(Error::ConstantTruth);
    }
    Ok(spt * spt / (spp * stt))
}

/// 100 * mean(|pred - truth|) / mean(truth).
pub fn error_percentage<S: Real>(pred: &[S], truth: &[S]) -> Result<S> {
    if pred.len() != truth.len() {
        return Err(Error::LengthMismatch {
            a: pred.len(),
            b: truth.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = lit::<S>(pred.len() as f64);
    let mean_truth: S = truth.iter().copied().sum::<S>() / n;
    if mean_truth <= S::zero() {
        return Err(Error::ConstantTruth);
    }
    let mean_err: S = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| (p - t).abs())
        .sum::<S>()
        / n;
    Ok(lit::<S>(100.0) * mean_err / mean_truth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TruthSource {
    Manual,
    Software,
    Synthetic,
}

impl std::fmt::Display for TruthSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TruthSource::Manual => "manual",
            TruthSource::Software => "software",
            TruthSource::Synthetic => "synthetic",
        })
    }
}

impl std::str::FromStr for TruthSource {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "manual" => Ok(Self::Manual),
            "software" => Ok(Self::Software),
            "synthetic" => Ok(Self::Synthetic),
            other => Err(format!("unknown ground-truth source '{other}'")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthRow {
    pub leaf_id: String,
    pub length: f64,
    pub width: f64,
    pub source: TruthSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthTable {
    pub rows: Vec<GroundTruthRow>,
}

impl GroundTruthTable {
    pub fn new(rows: Vec<GroundTruthRow>) -> Result<Self> {
        let mut ids: Vec<&str> = rows.iter().map(|r| r.leaf_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != rows.len() {
            return Err(Error::Csv("duplicate leaf_id in ground truth".into()));
        }
        for r in &rows {
            if r.length <= 0.0 || r.width <= 0.0 {
                return Err(Error::Csv(format!(
                    "non-positive size for leaf '{}'",
                    r.leaf_id
                )));
            }
        }
        Ok(Self { rows })
    }

    /// Column order: leaf_id,length_mm,width_mm,source.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("leaf_id,length_mm,width_mm,source\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.leaf_id, r.length, r.width, r.source
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or(Error::Csv("empty file".into()))?;
        if header.trim() != "leaf_id,length_mm,width_mm,source" {
            return Err(Error::Csv(format!(
                "bad header '{header}', expected 'leaf_id,length_mm,width_mm,source'"
            )));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(Error::Csv(format!(
                    "row {}: expected 4 fields, found {}",
                    i + 2,
                    fields.len()
                )));
            }
            let num = |s: &str, what: &str| -> Result<f64> {
                s.trim()
                    .parse()
                    .map_err(|_| Error::Csv(format!("row {}: bad {what} '{s}'", i + 2)))
            };
            rows.push(GroundTruthRow {
                leaf_id: fields[0].trim().to_string(),
                length: num(fields[1], "length")?,
                width: num(fields[2], "width")?,
                source: fields[3]
                    .trim()
                    .parse()
                    .map_err(|e: String| Error::Csv(format!("row {}: {e}", i + 2)))?,
            });
        }
        Self::new(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub rmse: f64,
    pub r_squared: f64,
    pub error_percentage: f64,
    /// (leaf_id, predicted - truth), mm, in join order.
    pub residuals: Vec<(String, f64)>,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub length: DimensionReport,
    pub width: DimensionReport,
    /// Which R² definition `r_squared` carries.
    pub r_squared_kind: String,
    pub unmatched_measurements: Vec<String>,
    pub unmatched_truth: Vec<String>,
}

/// Join measurements to the ground-truth table on leaf_id and compute all
/// three metrics per dimension. Unmatched ids are listed, never filled in.
pub fn evaluate(
    measurements: &[LeafMeasurement<f64>],
    truth: &GroundTruthTable,
) -> Result<EvalReport> {
    let mut matched: Vec<(&LeafMeasurement<f64>, &GroundTruthRow)> = Vec::new();
    let mut unmatched_measurements = Vec::new();
    for m in measurements {
        match truth.rows.iter().find(|r| r.leaf_id == m.leaf_id) {
            Some(r) => matched.push((m, r)),
            None => unmatched_measurements.push(m.leaf_id.clone()),
        }
    }
    let unmatched_truth: Vec<String> = truth
        .rows
        .iter()
        .filter(|r| !measurements.iter().any(|m| m.leaf_id == r.leaf_id))
        .map(|r| r.leaf_id.clone())
        .collect();

    if matched.len() < 2 {
        return Err(Error::TooFewMatches { got: matched.len() });
    }

    let dim = |pred: Vec<f64>, tru: Vec<f64>| -> Result<DimensionReport> {
        Ok(DimensionReport {
            rmse: rmse(&pred, &tru)?,
            r_squared: r_squared(&pred, &tru)?,
            error_percentage: error_percentage(&pred, &tru)?,
            residuals: matched
                .iter()
                .zip(pred.iter().zip(&tru))
                .map(|((m, _), (p, t))| (m.leaf_id.clone(), p - t))
                .collect(),
            n: pred.len(),
        })
    };

    let length = dim(
        matched.iter().map(|(m, _)| m.length).collect(),
        matched.iter().map(|(_, r)| r.length).collect(),
    )?;
    let width = dim(
        matched.iter().map(|(m, _)| m.width).collect(),
        matched.iter().map(|(_, r)| r.width).collect(),
    )?;

    Ok(EvalReport {
        length,
        width,
        r_squared_kind: "coefficient_of_determination".into(),
        unmatched_measurements,
        unmatched_truth,
    })
}

/// Aligned-column text table, one row per dimension.
pub fn render_table(report: &EvalReport) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<10} {:>10} {:>8} {:>9} {:>5}\n",
        "Dimension", "RMSE(mm)", "R^2", "Error(%)", "n"
    ));
    for (name, d) in [("Length", &report.length), ("Width", &report.width)] {
        out.push_str(&format!(
            "{:<10} {:>10.3} {:>8.4} {:>9.2} {:>5}\n",
            name, d.rmse, d.r_squared, d.error_percentage, d.n
        ));
    }
    out.push_str(&format!("R^2 definition: {}\n", report.r_squared_kind));
    if !report.unmatched_measurements.is_empty() {
        out.push_str(&format!(
            "unmatched measurements: {}\n",
            report.unmatched_measurements.join(", ")
        ));
    }
    if !report.unmatched_truth.is_empty() {
        out.push_str(&format!(
            "unmatched ground truth: {}\n",
            report.unmatched_truth.join(", ")
        ));
    }
    out
}
