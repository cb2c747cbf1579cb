//! Entropic partial transport by capped Sinkhorn scaling.
//!
//! Starting from the Gibbs kernel `exp(-C / τ)` normalized to mass `s`, each
//! iteration caps the row sums at `a`, caps the column sums at `b`, and
//! rescales the plan back to total mass `s`. The whole iteration runs on
//! log-plan entries so tiny temperatures do not underflow the kernel.
//!
//! With [`ScalingScheme::Dykstra`] (the default) each of the three steps
//! carries a multiplicative correction that is re-applied before the step,
//! which makes the iterates converge to the entropic optimum rather than to
//! an arbitrary feasible plan. [`ScalingScheme::Capped`] runs the bare
//! capping loop. When `s` equals the total weight of a side, that side's cap
//! is applied as an exact rescaling, since any feasible plan saturates it.
//!
//! The loop stops once the largest marginal violation is below
//! [`MARGINAL_TOLERANCE`] and no plan entry moved by more than
//! [`PLAN_TOLERANCE`] during the iteration. If that does not happen within
//! `max_iters` iterations and the plan is still infeasible, it is rounded onto
//! the feasible set: rows and columns are capped, and the missing mass is
//! placed on the cheapest cells that still have row and column slack.

use super::{Matrix, TransportError};

/// Stopping threshold on the largest marginal violation.
pub const MARGINAL_TOLERANCE: f64 = 1e-9;
/// Stopping threshold on the largest per-entry plan change.
pub const PLAN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingScheme {
    #[default]
    Dykstra,
    Capped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportProblem {
    pub cost: Matrix,
    pub source: Vec<f64>,
    pub target: Vec<f64>,
    pub mass: f64,
    pub tau: f64,
    pub max_iters: usize,
    pub scheme: ScalingScheme,
}

impl TransportProblem {
    /// Problem with uniform source `1/T_i` and target `1/T_j` weights.
    pub fn uniform(cost: Matrix, mass: f64, tau: f64, max_iters: usize) -> Result<Self, TransportError> {
        let source = vec![1.0 / cost.rows() as f64; cost.rows()];
        let target = vec![1.0 / cost.cols() as f64; cost.cols()];
        let p = Self {
            cost,
            source,
            target,
            mass,
            tau,
            max_iters,
            scheme: ScalingScheme::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), TransportError> {
        let (n, m) = (self.cost.rows(), self.cost.cols());
        if n == 0 || m == 0 || self.source.len() != n || self.target.len() != m {
            return Err(TransportError::InvalidProblem(format!(
                "cost is {n}x{m} with {} source and {} target weights",
                self.source.len(),
                self.target.len()
            )));
        }
        if self.cost.data().iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(TransportError::InvalidProblem(
                "cost entries must be finite and non-negative".into(),
            ));
        }
        if self.source.iter().chain(&self.target).any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(TransportError::InvalidProblem("weights must be positive".into()));
        }
        let cap = self.source.iter().sum::<f64>().min(self.target.iter().sum());
        if !(self.mass > 0.0 && self.mass <= cap * (1.0 + 1e-12)) {
            return Err(TransportError::InvalidProblem(format!(
                "mass {} outside (0, {cap}]",
                self.mass
            )));
        }
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(TransportError::InvalidProblem(format!("tau {} must be positive", self.tau)));
        }
        if self.max_iters == 0 {
            return Err(TransportError::InvalidProblem("max_iters must be positive".into()));
        }
        Ok(())
    }

    pub fn with_scheme(self, scheme: ScalingScheme) -> Self {
        Self { scheme, ..self }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TransportResult {
    pub plan: Matrix,
    pub cost_raw: f64,
    pub cost_per_mass: f64,
    pub mass: f64,
    pub iterations_used: usize,
    pub converged: bool,
}

impl TransportResult {
    /// Largest violation of `rows <= a`, `cols <= b`, `sum = s`.
    pub fn violation(&self, p: &TransportProblem) -> f64 {
        marginal_violation(&self.plan, p)
    }
}

pub fn sinkhorn_partial(p: &TransportProblem) -> Result<TransportResult, TransportError> {
    p.validate()?;
    let (n, m) = (p.cost.rows(), p.cost.cols());
    let log_a: Vec<f64> = p.source.iter().map(|w| w.ln()).collect();
    let log_b: Vec<f64> = p.target.iter().map(|w| w.ln()).collect();
    let log_s = p.mass.ln();
    let saturated = |w: &[f64]| (w.iter().sum::<f64>() - p.mass).abs() <= 1e-12 * p.mass;
    let (rows_exact, cols_exact) = (saturated(&p.source), saturated(&p.target));
    let dykstra = p.scheme == ScalingScheme::Dykstra;

    let mut log_plan = Matrix::from_vec(n, m, p.cost.data().iter().map(|c| -c / p.tau).collect());
    rescale_mass(&mut log_plan, log_s, p.tau)?;

    // Dykstra corrections, in log space, one per constraint set.
    let mut corrections = vec![vec![0.0; n * m]; if dykstra { 3 } else { 0 }];
    let mut previous = exp_plan(&log_plan);
    let mut col_lse = vec![0.0; m];
    let mut converged = false;
    let mut iterations_used = p.max_iters;
    for it in 0..p.max_iters {
        for step in 0..3 {
            let before = dykstra.then(|| {
                let before = log_plan.data().to_vec();
                for (v, q) in log_plan.data_mut().iter_mut().zip(&corrections[step]) {
                    *v += q;
                }
                before
            });
            match step {
                0 => {
                    for (k, row) in log_plan.data_mut().chunks_exact_mut(m).enumerate() {
                        let mut shift = log_a[k] - log_sum_exp(row);
                        if !rows_exact {
                            shift = shift.min(0.0);
                        }
                        row.iter_mut().for_each(|v| *v += shift);
                    }
                }
                1 => {
                    column_log_sums(&log_plan, &mut col_lse);
                    for row in log_plan.data_mut().chunks_exact_mut(m) {
                        for (l, v) in row.iter_mut().enumerate() {
                            let shift = log_b[l] - col_lse[l];
                            *v += if cols_exact { shift } else { shift.min(0.0) };
                        }
                    }
                }
                _ => rescale_mass(&mut log_plan, log_s, p.tau)?,
            }
            if let Some(before) = before {
                for ((q, b), v) in corrections[step].iter_mut().zip(before).zip(log_plan.data()) {
                    *q += b - v;
                }
            }
        }

        let plan = exp_plan(&log_plan);
        let moved = plan
            .data()
            .iter()
            .zip(previous.data())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        let feasible = marginal_violation(&plan, p) < MARGINAL_TOLERANCE;
        previous = plan;
        if feasible && moved < PLAN_TOLERANCE {
            converged = true;
            iterations_used = it + 1;
            break;
        }
    }

    let mut plan = previous;
    if marginal_violation(&plan, p) >= MARGINAL_TOLERANCE {
        round_to_feasible(&mut plan, p);
    }
    let cost_raw = plan.dot(&p.cost);
    Ok(TransportResult {
        cost_per_mass: cost_raw / p.mass,
        mass: plan.sum(),
        plan,
        cost_raw,
        iterations_used,
        converged,
    })
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn column_log_sums(log_plan: &Matrix, out: &mut [f64]) {
    let m = log_plan.cols();
    let mut max = vec![f64::NEG_INFINITY; m];
    for row in log_plan.data().chunks_exact(m) {
        for (mx, &v) in max.iter_mut().zip(row) {
            *mx = mx.max(v);
        }
    }
    let mut acc = vec![0.0; m];
    for row in log_plan.data().chunks_exact(m) {
        for ((a, &v), &mx) in acc.iter_mut().zip(row).zip(&max) {
            if mx > f64::NEG_INFINITY {
                *a += (v - mx).exp();
            }
        }
    }
    for ((o, a), mx) in out.iter_mut().zip(acc).zip(max) {
        *o = if mx == f64::NEG_INFINITY { mx } else { mx + a.ln() };
    }
}

fn rescale_mass(log_plan: &mut Matrix, log_s: f64, tau: f64) -> Result<(), TransportError> {
    let total = log_sum_exp(log_plan.data());
    if !total.is_finite() {
        return Err(TransportError::Degenerate { tau });
    }
    let shift = log_s - total;
    log_plan.data_mut().iter_mut().for_each(|v| *v += shift);
    Ok(())
}

fn exp_plan(log_plan: &Matrix) -> Matrix {
    Matrix::from_vec(
        log_plan.rows(),
        log_plan.cols(),
        log_plan.data().iter().map(|v| v.exp()).collect(),
    )
}

pub(crate) fn marginal_violation(plan: &Matrix, p: &TransportProblem) -> f64 {
    let rows = plan
        .row_sums()
        .iter()
        .zip(&p.source)
        .map(|(r, a)| r - a)
        .fold(0.0, f64::max);
    let cols = plan
        .col_sums()
        .iter()
        .zip(&p.target)
        .map(|(c, b)| c - b)
        .fold(0.0, f64::max);
    rows.max(cols).max((plan.sum() - p.mass).abs())
}

fn round_to_feasible(plan: &mut Matrix, p: &TransportProblem) {
    let (n, m) = (plan.rows(), plan.cols());
    for (k, &rs) in plan.row_sums().iter().enumerate() {
        if rs > p.source[k] {
            let f = p.source[k] / rs;
            (0..m).for_each(|l| plan.set(k, l, plan.get(k, l) * f));
        }
    }
    for (l, &cs) in plan.col_sums().iter().enumerate() {
        if cs > p.target[l] {
            let f = p.target[l] / cs;
            (0..n).for_each(|k| plan.set(k, l, plan.get(k, l) * f));
        }
    }
    let mut row_slack: Vec<f64> = plan.row_sums().iter().zip(&p.source).map(|(r, a)| (a - r).max(0.0)).collect();
    let mut col_slack: Vec<f64> = plan.col_sums().iter().zip(&p.target).map(|(c, b)| (b - c).max(0.0)).collect();
    let mut missing = p.mass - plan.sum();
    if missing <= 0.0 {
        return;
    }
    let mut cells: Vec<(usize, usize)> = (0..n).flat_map(|k| (0..m).map(move |l| (k, l))).collect();
    cells.sort_by(|x, y| p.cost.get(x.0, x.1).total_cmp(&p.cost.get(y.0, y.1)));
    for (k, l) in cells {
        if missing <= 0.0 {
            break;
        }
        let add = row_slack[k].min(col_slack[l]).min(missing);
        if add > 0.0 {
            plan.set(k, l, plan.get(k, l) + add);
            row_slack[k] -= add;
            col_slack[l] -= add;
            missing -= add;
        }
    }
}
