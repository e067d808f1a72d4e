//! Uniform verification record for every inequality check: one row per
//! (input, band or scale) with LHS, RHS and ratio, plus a least-squares
//! slope fit against the sweep variable when the check is a scaling law.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ReportRow {
    pub estimate_id: String,
    pub input_id: String,
    /// Dyadic scale of the band, when applicable.
    pub j: Option<i32>,
    /// Band translate, when applicable.
    pub k: Option<i64>,
    /// Dilation or sweep parameter, when applicable.
    pub lambda: Option<f64>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub predicted: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub rows: Vec<ReportRow>,
    pub max_ratio: f64,
    pub min_ratio: f64,
    pub slope: Option<SlopeFit>,
    /// Free-form notes: truncation windows, strategy identities, etc.
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub fn new(estimate_id: impl Into<String>) -> Self {
        Self {
            estimate_id: estimate_id.into(),
            rows: Vec::new(),
            max_ratio: 0.0,
            min_ratio: f64::INFINITY,
            slope: None,
            notes: Vec::new(),
        }
    }

    pub fn push(&mut self, mut row: ReportRow) {
        row.estimate_id = self.estimate_id.clone();
        if row.ratio.is_finite() && row.ratio > 0.0 {
            self.max_ratio = self.max_ratio.max(row.ratio);
            self.min_ratio = self.min_ratio.min(row.ratio);
        } else {
            self.max_ratio = f64::INFINITY;
        }
        self.rows.push(row);
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    pub fn all_ratios_finite(&self) -> bool {
        self.rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0)
    }

    /// Ordinary least squares of `log2(ratio)` against the chosen abscissa.
    pub fn fit_slope(
        &mut self,
        predicted: f64,
        abscissa: impl Fn(&ReportRow) -> Option<f64>,
    ) -> Result<SlopeFit> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter_map(|r| {
                let x = abscissa(r)?;
                (r.ratio.is_finite() && r.ratio > 0.0).then(|| (x, r.ratio.log2()))
            })
            .collect();
        let fit = ols(&pts, predicted)?;
        self.slope = Some(fit.clone());
        Ok(fit)
    }

    /// CSV with the shared schema `estimate_id,input_id,j,k,lambda,lhs,rhs,ratio`.
    pub fn to_csv(&self, config_hash: &str) -> String {
        let mut out = String::from("estimate_id,input_id,j,k,lambda,lhs,rhs,ratio,config\n");
        for r in &self.rows {
            let j = r.j.map(|v| v.to_string()).unwrap_or_default();
            let k = r.k.map(|v| v.to_string()).unwrap_or_default();
            let l = r.lambda.map(|v| format!("{v:.17e}")).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{:.17e},{:.17e},{:.17e},{}\n",
                r.estimate_id, r.input_id, j, k, l, r.lhs, r.rhs, r.ratio, config_hash
            ));
        }
        out
    }
}

pub fn ols(pts: &[(f64, f64)], predicted: f64) -> Result<SlopeFit> {
    if pts.len() < 4 {
        return Err(Error::InsufficientFitPoints { needed: 4, got: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let det = n * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::InsufficientFitPoints { needed: 4, got: 1 });
    }
    let slope = (n * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / n;
    let residual = (pts
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(SlopeFit { slope, intercept, residual, predicted })
}
