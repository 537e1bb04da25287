use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::stats::{f_survival, student_t_quantile};
use super::svd::svd;
use super::sweep::SweepRecord;
use crate::clustering::kebab_enum;
use crate::error::{Error, Result};
use crate::scalar::Real;

pub const MIN_RECORDS: usize = 7;

/// Whether a constant column joins the weights and N.
///
/// The four weights always sum to 100, so a constant column makes the design
/// exactly collinear; `PseudoInverse` then reports the minimum-norm solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Intercept {
    #[default]
    None,
    PseudoInverse,
}

kebab_enum!(Intercept { None => "none", PseudoInverse => "pseudo-inverse" });

#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub name: String,
    pub coefficient: T,
    pub std_error: T,
    pub ci_low: T,
    pub ci_high: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionReport<T> {
    pub terms: Vec<Term<T>>,
    /// Against the mean model when the column space holds a constant, else
    /// against zero.
    pub r_squared: T,
    pub centered: bool,
    /// `None` when the smallest singular value is exactly zero.
    pub condition_number: Option<T>,
    pub sample_size: usize,
    pub rank: usize,
    pub residual_dof: usize,
    pub f_statistic: Option<f64>,
    pub f_p_value: Option<f64>,
}

impl<T: Real> RegressionReport<T> {
    pub fn term(&self, name: &str) -> Option<&Term<T>> {
        self.terms.iter().find(|t| t.name == name)
    }

    pub fn coefficient(&self, name: &str) -> Option<T> {
        self.term(name).map(|t| t.coefficient)
    }

    pub fn to_json(&self) -> Value {
        let mut coefficients = Map::new();
        let mut errors = Map::new();
        let mut intervals = Map::new();
        for t in &self.terms {
            coefficients.insert(t.name.clone(), number(t.coefficient.as_f64()));
            errors.insert(t.name.clone(), number(t.std_error.as_f64()));
            intervals.insert(t.name.clone(), json!([number(t.ci_low.as_f64()), number(t.ci_high.as_f64())]));
        }
        json!({
            "coefficients": coefficients,
            "standardErrors": errors,
            "confidenceIntervals95": intervals,
            "rSquared": number(self.r_squared.as_f64()),
            "rSquaredCentered": self.centered,
            "conditionNumber": self.condition_number.map_or(Value::Null, |c| number(c.as_f64())),
            "sampleSize": self.sample_size,
            "rank": self.rank,
            "residualDof": self.residual_dof,
            "fStatistic": self.f_statistic.map_or(Value::Null, number),
            "fPValue": self.f_p_value.map_or(Value::Null, number),
        })
    }

    /// Coefficients with their 95% intervals, then R².
    pub fn to_table(&self) -> String {
        let mut out = format!("{:<8}{:>14}{:>30}\n", "", "Coef.", "[95% Conf. Interval]");
        for t in &self.terms {
            let _ = writeln!(
                out,
                "{:<8}{:>14.7}{:>15.7}{:>15.7}",
                t.name,
                t.coefficient.as_f64(),
                t.ci_low.as_f64(),
                t.ci_high.as_f64()
            );
        }
        let _ = writeln!(out, "{:<8}{:>14.4}", "R²", self.r_squared.as_f64());
        out
    }
}

fn number(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// Least squares of `y` on the row-major `n x p` design `x`.
///
/// Rank-deficient designs are rejected unless `allow_rank_deficient`, in which
/// case the minimum-norm solution is returned.
pub fn fit_design<T: Real>(
    names: &[&str],
    x: &[T],
    y: &[T],
    allow_rank_deficient: bool,
) -> Result<RegressionReport<T>> {
    let (n, p) = (y.len(), names.len());
    if x.len() != n * p {
        return Err(Error::DimensionMismatch(format!("design has {} cells, expected {n} x {p}", x.len())));
    }
    let d = svd(x, n, p);
    let rank = d.rank();
    if rank < p && !allow_rank_deficient {
        return Err(Error::RankDeficient(describe_dependency(names, d.v_column(p - 1))));
    }
    if n <= rank {
        return Err(Error::InsufficientData { needed: rank + 1, got: n });
    }

    // projections of y and of the ones vector on the left singular vectors
    let uy: Vec<T> = (0..rank).map(|k| (0..n).fold(T::zero(), |acc, i| acc + d.u(i, k) * y[i])).collect();
    let u1: Vec<T> = (0..rank).map(|k| (0..n).fold(T::zero(), |acc, i| acc + d.u(i, k))).collect();

    let beta: Vec<T> = (0..p)
        .map(|j| (0..rank).fold(T::zero(), |acc, k| acc + d.v(j, k) * uy[k] / d.sigma[k]))
        .collect();
    let ssr = (0..n).fold(T::zero(), |acc, i| {
        let fitted = (0..p).fold(T::zero(), |a, j| a + x[i * p + j] * beta[j]);
        let r = y[i] - fitted;
        acc + r * r
    });
    let dof = n - rank;
    let s2 = ssr / T::from_count(dof);
    let t = T::from_f64_lossy(student_t_quantile(0.975, dof as f64));

    let terms = names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let var = (0..rank).fold(T::zero(), |acc, k| {
                let v = d.v(j, k) / d.sigma[k];
                acc + v * v
            });
            let std_error = (s2 * var).sqrt();
            Term {
                name: name.to_string(),
                coefficient: beta[j],
                std_error,
                ci_low: beta[j] - t * std_error,
                ci_high: beta[j] + t * std_error,
            }
        })
        .collect();

    let nf = T::from_count(n);
    let off_span = nf - u1.iter().fold(T::zero(), |acc, &c| acc + c * c);
    let centered = off_span <= nf * T::epsilon().sqrt();
    let sst = if centered {
        let mean = y.iter().fold(T::zero(), |acc, &v| acc + v) / nf;
        y.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean))
    } else {
        y.iter().fold(T::zero(), |acc, &v| acc + v * v)
    };
    let r_squared = if sst > T::zero() {
        (T::one() - ssr / sst).max(T::zero())
    } else {
        T::one()
    };

    let df_model = rank - usize::from(centered);
    let (f_statistic, f_p_value) = if df_model == 0 {
        (None, None)
    } else {
        let explained = (sst - ssr).max(T::zero()).as_f64() / df_model as f64;
        let f = explained / (ssr.as_f64() / dof as f64);
        let p_value = if f.is_finite() { f_survival(f, df_model as f64, dof as f64) } else { 0.0 };
        (Some(f), Some(p_value))
    };

    let smallest = *d.sigma.last().expect("at least one column");
    let condition_number = (smallest > T::zero()).then(|| d.sigma[0] / smallest);

    Ok(RegressionReport {
        terms,
        r_squared,
        centered,
        condition_number,
        sample_size: n,
        rank,
        residual_dof: dof,
        f_statistic,
        f_p_value,
    })
}

fn describe_dependency<T: Real>(names: &[&str], null: &[T]) -> String {
    let scale = null.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let parts: Vec<String> = names
        .iter()
        .zip(null)
        .filter_map(|(name, &v)| {
            let c = (v / scale).as_f64();
            (c.abs() > 1e-6).then(|| format!("{c:+.4}*{name}"))
        })
        .collect();
    format!("{} = 0", parts.join(" "))
}

/// Regresses uniform complexity on the four weights and N.
pub fn ols_fit<T: Real>(records: &[SweepRecord<T>], intercept: Intercept) -> Result<RegressionReport<T>> {
    if records.len() < MIN_RECORDS {
        return Err(Error::InsufficientData { needed: MIN_RECORDS, got: records.len() });
    }
    let mut names = vec!["A", "W", "R", "S", "N"];
    if intercept == Intercept::PseudoInverse {
        names.push("const");
    }
    let mut x = Vec::with_capacity(records.len() * names.len());
    for r in records {
        let w = r.weights;
        for c in [w.access, w.write, w.read, w.sequence] {
            x.push(T::from_count(c as usize));
        }
        x.push(T::from_count(r.n_clusters));
        if intercept == Intercept::PseudoInverse {
            x.push(T::one());
        }
    }
    let y: Vec<T> = records.iter().map(|r| r.uniform_complexity).collect();
    fit_design(&names, &x, &y, intercept == Intercept::PseudoInverse)
}
