//! Exact partial transport for desk-scale instances.
//!
//! The partial problem is rewritten as a balanced transportation problem by
//! appending a dummy row of mass `Σb − s` and a dummy column of mass `Σa − s`.
//! Real-to-dummy cells cost nothing and absorb the untransported mass; the
//! dummy-to-dummy cell is left out so exactly `s` moves between real points.
//! The resulting program is solved by simplex.

use super::simplex::{minimize, LpOutcome};
use super::{Matrix, TransportError};

/// Largest side accepted by the exact solver.
pub const MAX_EXACT_SIZE: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub plan: Matrix,
    pub cost_raw: f64,
    pub cost_per_mass: f64,
}

pub fn solve_exact_partial(
    cost: &Matrix,
    a: &[f64],
    b: &[f64],
    s: f64,
) -> Result<ExactSolution, TransportError> {
    let (n, m) = (cost.rows(), cost.cols());
    if n > MAX_EXACT_SIZE || m > MAX_EXACT_SIZE {
        return Err(TransportError::TooLarge { rows: n, cols: m });
    }
    if a.len() != n || b.len() != m || n == 0 || m == 0 {
        return Err(TransportError::InvalidProblem("weights do not match the cost shape".into()));
    }
    let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
    if !(s > 0.0 && s <= sa.min(sb) * (1.0 + 1e-12)) {
        return Err(TransportError::InvalidProblem(format!("mass {s} is infeasible")));
    }

    // Variables: every cell of the (n+1)x(m+1) extension except (n, m).
    let ext_rows: Vec<f64> = a.iter().copied().chain([(sb - s).max(0.0)]).collect();
    let ext_cols: Vec<f64> = b.iter().copied().chain([(sa - s).max(0.0)]).collect();
    let cells: Vec<(usize, usize)> = (0..=n)
        .flat_map(|k| (0..=m).map(move |l| (k, l)))
        .filter(|&(k, l)| !(k == n && l == m))
        .collect();
    let c: Vec<f64> = cells
        .iter()
        .map(|&(k, l)| if k < n && l < m { cost.get(k, l) } else { 0.0 })
        .collect();
    let mut rows = Vec::with_capacity(n + m + 2);
    let mut rhs = Vec::with_capacity(n + m + 2);
    for (k, &w) in ext_rows.iter().enumerate() {
        rows.push(cells.iter().map(|&(r, _)| f64::from(u8::from(r == k))).collect());
        rhs.push(w);
    }
    for (l, &w) in ext_cols.iter().enumerate() {
        rows.push(cells.iter().map(|&(_, col)| f64::from(u8::from(col == l))).collect());
        rhs.push(w);
    }

    match minimize(&c, &rows, &rhs) {
        LpOutcome::Optimal { x, .. } => {
            let mut plan = Matrix::zeros(n, m);
            for (&(k, l), &v) in cells.iter().zip(&x) {
                if k < n && l < m {
                    plan.set(k, l, v.max(0.0));
                }
            }
            let cost_raw = plan.dot(cost);
            Ok(ExactSolution {
                plan,
                cost_raw,
                cost_per_mass: cost_raw / s,
            })
        }
        other => Err(TransportError::InvalidProblem(format!("exact solver failed: {other:?}"))),
    }
}

/// Optimal transported cost per unit mass, `min Σ plan·C / s`.
pub fn exact_partial_ot(cost: &Matrix, a: &[f64], b: &[f64], s: f64) -> Result<f64, TransportError> {
    solve_exact_partial(cost, a, b, s).map(|sol| sol.cost_per_mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    #[test]
    fn zero_cost_is_free_at_every_mass() {
        for s in [0.25, 0.5, 1.0] {
            assert_eq!(exact_partial_ot(&Matrix::zeros(2, 2), &uniform(2), &uniform(2), s).unwrap(), 0.0);
        }
    }

    #[test]
    fn anti_diagonal_costs_are_avoided() {
        let c = Matrix::from_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        assert!(exact_partial_ot(&c, &uniform(2), &uniform(2), 1.0).unwrap().abs() < 1e-12);
    }

    #[test]
    fn single_cell_plan_is_forced() {
        let c = Matrix::from_rows(&[&[1.0]]);
        assert!((exact_partial_ot(&c, &[1.0], &[1.0], 1.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_mass_picks_the_cheapest_cells() {
        // s = 1/2 fits in the single cheapest cell 0.1.
        let c = Matrix::from_rows(&[&[0.5, 0.1], &[0.3, 0.9]]);
        let sol = solve_exact_partial(&c, &uniform(2), &uniform(2), 0.5).unwrap();
        assert!((sol.cost_per_mass - 0.1).abs() < 1e-12);
        assert!((sol.plan.get(0, 1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn oversize_instances_are_rejected() {
        let c = Matrix::zeros(9, 2);
        assert!(matches!(
            exact_partial_ot(&c, &uniform(9), &uniform(2), 0.5),
            Err(TransportError::TooLarge { rows: 9, cols: 2 })
        ));
    }
}
