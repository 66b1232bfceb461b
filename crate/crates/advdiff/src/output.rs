//! CSV artifacts. Every file has a header row; floats use the shortest
//! round-trip representation and missing values are empty fields.

use advdiff_core::control::{reconstruct_control, ControlProblem, ControlSolution};
use advdiff_core::direct::SolutionGrid;
use advdiff_core::spectral::RootReport;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub x: f64,
    pub t: f64,
    pub theta: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionRow {
    pub n: usize,
    pub t_final: f64,
    pub tau: f64,
    pub control_norm: f64,
    pub residual_norm: f64,
    pub verified_error: f64,
    pub regularized: bool,
    pub delta: Option<f64>,
    pub condition: f64,
}

impl SolutionRow {
    pub fn new(problem: &ControlProblem, s: &ControlSolution) -> Self {
        SolutionRow {
            n: problem.n,
            t_final: problem.t_final,
            tau: problem.tau,
            control_norm: s.control_norm,
            residual_norm: s.residual_norm,
            verified_error: s.verified_error,
            regularized: s.regularized,
            delta: s.delta,
            condition: s.condition_estimate,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffRow {
    pub n: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub t: f64,
    pub v: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub x: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub n: usize,
    pub t_final: f64,
    pub tau: f64,
    pub control_norm: f64,
    pub verified_error: f64,
}

/// `roots` lists `re:im` pairs separated by `;`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootRow {
    pub sigma: Option<f64>,
    pub rho: Option<f64>,
    pub predicted: Option<usize>,
    pub count: usize,
    pub roots: String,
}

impl RootRow {
    pub fn new(r: &RootReport) -> Self {
        // adding +0.0 turns -0.0 into 0.0
        let roots = r.roots.iter().map(|z| format!("{}:{}", z.re + 0.0, z.im + 0.0)).collect::<Vec<_>>().join(";");
        RootRow { sigma: r.sigma.map(|s| s + 0.0), rho: r.rho.map(|s| s + 0.0), predicted: r.predicted_count, count: r.roots.len(), roots }
    }
}

/// One sweep cell; `error` is empty on success.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub t_final: f64,
    pub control_norm: Option<f64>,
    pub verified_error: Option<f64>,
    pub residual_norm: Option<f64>,
    pub condition: Option<f64>,
    pub delta: Option<f64>,
    pub error: String,
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, CliError> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect::<Result<Vec<T>, _>>().map_err(|e| CliError::Io(e.to_string()))
}

/// Rows of `grid` in `t`-major order; times multiplied by `t_scale`.
pub fn grid_rows(grid: &SolutionGrid, t_scale: f64, offset: f64) -> Vec<GridRow> {
    let mut rows = Vec::with_capacity(grid.xs.len() * grid.ts.len());
    for (j, &t) in grid.ts.iter().enumerate() {
        for (i, &x) in grid.xs.iter().enumerate() {
            let ok = grid.converged[i][j];
            let theta = if ok { grid.values[i][j] + offset } else { f64::NAN };
            rows.push(GridRow { x, t: t * t_scale, theta, converged: ok });
        }
    }
    rows
}

pub fn coeff_rows(coeffs: &[f64]) -> Vec<CoeffRow> {
    coeffs.iter().enumerate().map(|(k, &c)| CoeffRow { n: k + 1, c }).collect()
}

/// `v(t)` on `points` uniform times in `[0, T]`.
pub fn series_rows(coeffs: &[f64], tau: f64, t_final: f64, points: usize) -> Vec<SeriesRow> {
    let m = points.max(2) - 1;
    (0..=m)
        .map(|i| {
            let t = t_final * i as f64 / m as f64;
            SeriesRow { t, v: reconstruct_control(coeffs, t, tau, t_final) }
        })
        .collect()
}

pub fn profile_rows(grid: &SolutionGrid) -> Vec<ProfileRow> {
    grid.xs.iter().zip(grid.column(0)).map(|(&x, theta)| ProfileRow { x, theta }).collect()
}

/// `N × T` table of one quantity: first column `n`, one column per time.
pub fn table_csv(ns: &[usize], ts: &[f64], cells: &[SweepRow], pick: impl Fn(&SweepRow) -> Option<f64>) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec!["n".to_string()];
    header.extend(ts.iter().map(|t| format!("T={t}")));
    w.write_record(&header).map_err(io)?;
    for &n in ns {
        let mut rec = vec![n.to_string()];
        for &t in ts {
            let v = cells.iter().find(|c| c.n == n && c.t_final == t).and_then(&pick);
            rec.push(v.map(|v| v.to_string()).unwrap_or_default());
        }
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_round_trip() {
        let rows = vec![
            GridRow { x: 0.1, t: 1.0 / 3.0, theta: -2.5e-17, converged: true },
            GridRow { x: 1.0, t: 2.0, theta: 0.397, converged: false },
        ];
        let text = to_csv(&rows).unwrap();
        assert!(text.starts_with("x,t,theta,converged\n"));
        assert_eq!(from_csv::<GridRow>(&text).unwrap(), rows);
    }

    #[test]
    fn missing_values_are_empty_fields() {
        let row = SweepRow {
            n: 4,
            t_final: 0.5,
            control_norm: None,
            verified_error: None,
            residual_norm: None,
            condition: None,
            delta: None,
            error: "singular".into(),
        };
        let text = to_csv(std::slice::from_ref(&row)).unwrap();
        assert!(text.lines().nth(1).unwrap().starts_with("4,0.5,,,,,,"));
        assert_eq!(from_csv::<SweepRow>(&text).unwrap(), vec![row]);
    }

    #[test]
    fn table_layout() {
        let cell = |n, t, v| SweepRow {
            n,
            t_final: t,
            control_norm: v,
            verified_error: None,
            residual_norm: None,
            condition: None,
            delta: None,
            error: String::new(),
        };
        let cells = [cell(2, 0.5, Some(1.5)), cell(2, 1.0, None), cell(4, 0.5, Some(0.25)), cell(4, 1.0, Some(2.0))];
        let text = table_csv(&[2, 4], &[0.5, 1.0], &cells, |c| c.control_norm).unwrap();
        assert_eq!(text, "n,T=0.5,T=1\n2,1.5,\n4,0.25,2\n");
    }

    #[test]
    fn coefficients_are_numbered_from_one() {
        let rows = coeff_rows(&[0.5, -1.0, 2.0]);
        assert_eq!(rows.len(), 3);
        assert_eq!((rows[0].n, rows[2].n, rows[2].c), (1, 3, 2.0));
    }

    #[test]
    fn series_spans_the_horizon() {
        let rows = series_rows(&[1.0], 0.0, 2.0, 5);
        assert_eq!(rows.len(), 5);
        assert_eq!((rows[0].t, rows[4].t), (0.0, 2.0));
        assert!(rows[0].v.abs() < 1e-15);
    }
}
