//! Dense two-phase simplex for small equality-form programs
//! `min cᵀx  s.t.  Ax = b, x ≥ 0`, using Bland's rule so degenerate
//! transportation vertices cannot cycle.

const EPS: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal { objective: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

struct Tableau {
    /// `m` constraint rows followed by the objective row; last column is the rhs.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
}

impl Tableau {
    fn m(&self) -> usize {
        self.basis.len()
    }

    fn width(&self) -> usize {
        self.cells[0].len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width();
        let p = self.cells[row][col];
        for v in self.cells[row].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.cells[row].clone();
        for (r, cells) in self.cells.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let f = cells[col];
            if f != 0.0 {
                for j in 0..w {
                    cells[j] -= f * pivot_row[j];
                }
            }
        }
        self.basis[row] = col;
    }

    /// Minimizes the objective row over columns `< allowed`. Returns false if
    /// unbounded.
    fn run(&mut self, allowed: usize) -> bool {
        let m = self.m();
        let rhs = self.width() - 1;
        loop {
            let Some(enter) = (0..allowed).find(|&j| self.cells[m][j] < -EPS) else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..m {
                let a = self.cells[r][enter];
                if a > EPS {
                    let ratio = self.cells[r][rhs] / a;
                    leave = match leave {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS
                                || (ratio <= lratio + EPS && self.basis[r] < self.basis[lr])
                            {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, enter),
                None => return false,
            }
        }
    }
}

pub(crate) fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let width = n + m + 1;
    let mut cells = Vec::with_capacity(m + 1);
    for (row, &rhs) in a.iter().zip(b) {
        let sign = if rhs < 0.0 { -1.0 } else { 1.0 };
        let mut r: Vec<f64> = row.iter().map(|v| v * sign).collect();
        r.resize(width, 0.0);
        r[width - 1] = rhs * sign;
        cells.push(r);
    }
    for (i, row) in cells.iter_mut().enumerate() {
        row[n + i] = 1.0;
    }
    // Phase one: minimize the sum of artificials.
    let mut obj = vec![0.0; width];
    for row in &cells {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width - 1] -= row[width - 1];
    }
    cells.push(obj);
    let mut t = Tableau {
        cells,
        basis: (n..n + m).collect(),
    };
    t.run(n + m);
    if -t.cells[m][width - 1] > 1e-9 {
        return LpOutcome::Infeasible;
    }
    // Drive zero-valued artificials out of the basis; rows where that is
    // impossible are redundant and dropped.
    let mut r = 0;
    while r < t.m() {
        if t.basis[r] >= n {
            if let Some(j) = (0..n).find(|&j| t.cells[r][j].abs() > EPS) {
                t.pivot(r, j);
                r += 1;
            } else {
                t.cells.remove(r);
                t.basis.remove(r);
            }
        } else {
            r += 1;
        }
    }
    // Phase two objective expressed in the current basis.
    let m = t.m();
    let mut obj = vec![0.0; width];
    obj[..n].copy_from_slice(c);
    for (r, &bj) in t.basis.iter().enumerate() {
        let f = obj[bj];
        if f != 0.0 {
            for j in 0..width {
                obj[j] -= f * t.cells[r][j];
            }
        }
    }
    t.cells[m] = obj;
    if !t.run(n) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (r, &bj) in t.basis.iter().enumerate() {
        if bj < n {
            x[bj] = t.cells[r][width - 1];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { objective, x }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_program() {
        // min -x - y  s.t. x + s1 = 2, y + s2 = 3, x + y + s3 = 4
        let a = vec![
            vec![1.0, 0.0, 1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 1.0, 0.0],
            vec![1.0, 1.0, 0.0, 0.0, 1.0],
        ];
        let c = [-1.0, -1.0, 0.0, 0.0, 0.0];
        match minimize(&c, &a, &[2.0, 3.0, 4.0]) {
            LpOutcome::Optimal { objective, .. } => assert!((objective + 4.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn detects_infeasible_and_unbounded() {
        assert_eq!(minimize(&[1.0], &[vec![1.0], vec![1.0]], &[1.0, 2.0]), LpOutcome::Infeasible);
        assert_eq!(
            minimize(&[-1.0, 0.0], &[vec![1.0, -1.0]], &[1.0]),
            LpOutcome::Unbounded
        );
    }

    #[test]
    fn tolerates_redundant_rows() {
        let a = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        match minimize(&[1.0, 3.0], &a, &[1.0, 2.0]) {
            LpOutcome::Optimal { objective, x } => {
                assert!((objective - 1.0).abs() < 1e-9);
                assert!((x[0] - 1.0).abs() < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
