//! Bounded-variable two-phase primal simplex on a dense tableau.
//!
//! Minimizes `c.x` subject to `A x >= b` and `0 <= x_j <= u_j`. Structural
//! variables start at their upper bounds (the models built here are most
//! often feasible at the all-ones point, which skips phase one entirely);
//! rows violated there receive an artificial variable and a phase-one
//! objective. Pivoting is Dantzig with lowest-index tie-breaks, falling
//! back to Bland after a run of degenerate steps, so the solve is fully
//! deterministic for a given problem and terminates in exact arithmetic.

use super::scalar::Scalar;
use crate::error::{Error, Result};

/// `A x >= b`, `0 <= x <= upper`, minimize `cost . x`.
pub struct BoundedLp<S> {
    pub num_vars: usize,
    /// Sparse rows: `(column, coefficient)` pairs.
    pub rows: Vec<Vec<(usize, S)>>,
    pub rhs: Vec<S>,
    pub cost: Vec<S>,
    pub upper: Vec<S>,
}

#[derive(Clone, Debug)]
pub enum SimplexOutcome<S> {
    Optimal { x: Vec<S>, value: S },
    Infeasible,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau<S> {
    m: usize,
    nvars: usize,
    /// Dense rows of `B^{-1} A`, with `B^{-1} b` appended as last column.
    t: Vec<Vec<S>>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    upper: Vec<Option<S>>,
    /// Current basic-variable values.
    beta: Vec<S>,
    /// Reduced costs under the current phase objective.
    d: Vec<S>,
    cost: Vec<S>,
    /// Devex reference weights (pricing heuristic only; eligibility is
    /// always decided on the exact reduced costs).
    weights: Vec<f64>,
    bland: bool,
    degenerate_run: usize,
    pivots: u64,
}

const BLAND_TRIGGER: usize = 64;
const DEVEX_RESET: f64 = 1e12;

impl<S: Scalar> Tableau<S> {
    fn value_of(&self, j: usize) -> S {
        match self.state[j] {
            VarState::Basic => {
                let row = self.basis.iter().position(|&b| b == j).expect("basic row");
                self.beta[row].clone()
            }
            VarState::AtLower => S::zero(),
            VarState::AtUpper => self.upper[j].clone().expect("upper-bounded"),
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for (i, &bj) in self.basis.iter().enumerate() {
            let cb = self.cost[bj].clone();
            if cb.is_zero_val() {
                continue;
            }
            for j in 0..self.nvars {
                d[j] = d[j].clone() - cb.clone() * self.t[i][j].clone();
            }
        }
        for &bj in &self.basis {
            d[bj] = S::zero();
        }
        self.d = d;
    }

    fn refresh_beta(&mut self) {
        // beta = B^{-1} b - sum over nonbasic-at-upper columns.
        let mut beta: Vec<S> = (0..self.m).map(|i| self.t[i][self.nvars].clone()).collect();
        for j in 0..self.nvars {
            if self.state[j] == VarState::AtUpper {
                let u = self.upper[j].clone().expect("upper-bounded");
                for (i, b) in beta.iter_mut().enumerate() {
                    *b = b.clone() - self.t[i][j].clone() * u.clone();
                }
            }
        }
        self.beta = beta;
    }

    /// Entering column under the current rule, or `None` at optimality.
    /// Eligibility is exact; among eligible columns the Devex score
    /// `d_j^2 / w_j` picks the winner (ties to the lowest index).
    fn choose_entering(&self) -> Option<(usize, bool)> {
        let tol = S::tol();
        let mut best: Option<(usize, bool, f64)> = None;
        for j in 0..self.nvars {
            if self.state[j] == VarState::Basic {
                continue;
            }
            if let Some(u) = &self.upper[j] {
                if u.is_zero_val() {
                    continue; // fixed variable
                }
            }
            let increase = self.state[j] == VarState::AtLower;
            let viol = if increase {
                -self.d[j].clone()
            } else {
                self.d[j].clone()
            };
            if viol > tol {
                if self.bland {
                    return Some((j, increase));
                }
                let vf = viol.to_f64();
                let score = vf * vf / self.weights[j];
                match &best {
                    Some((_, _, s)) if *s >= score => {}
                    _ => best = Some((j, increase, score)),
                }
            }
        }
        best.map(|(j, inc, _)| (j, inc))
    }

    /// One simplex step. Returns false at optimality.
    fn step(&mut self) -> Result<bool> {
        let Some((q, increase)) = self.choose_entering() else {
            return Ok(false);
        };
        let tol = S::tol();

        // Ratio test: the entering variable moves away from its bound by
        // t >= 0; basic variable i changes at rate -dir * T[i][q].
        let mut limit: Option<S> = self.upper[q].clone();
        let mut blocking: Option<(usize, bool)> = None; // (row, leaves_at_upper)
        for i in 0..self.m {
            let coef = self.t[i][q].clone();
            let rate = if increase { -coef } else { coef };
            if rate < -tol.clone() {
                let mut cand = self.beta[i].clone() / (-rate);
                if cand < S::zero() {
                    cand = S::zero();
                }
                if limit.as_ref().map_or(true, |l| cand < *l)
                    || (limit.as_ref() == Some(&cand)
                        && blocking.map_or(false, |(r, _)| self.basis[i] < self.basis[r]))
                {
                    limit = Some(cand);
                    blocking = Some((i, false));
                }
            } else if rate > tol {
                if let Some(u) = &self.upper[self.basis[i]] {
                    let mut cand = (u.clone() - self.beta[i].clone()) / rate;
                    if cand < S::zero() {
                        cand = S::zero();
                    }
                    if limit.as_ref().map_or(true, |l| cand < *l)
                        || (limit.as_ref() == Some(&cand)
                            && blocking.map_or(false, |(r, _)| self.basis[i] < self.basis[r]))
                    {
                        limit = Some(cand);
                        blocking = Some((i, true));
                    }
                }
            }
        }

        let Some(step) = limit else {
            return Err(Error::Lp("unbounded direction in simplex".into()));
        };

        if step.is_zero_val() {
            self.degenerate_run += 1;
            if self.degenerate_run >= BLAND_TRIGGER {
                self.bland = true;
            }
        } else {
            self.degenerate_run = 0;
        }

        let dir = if increase { S::one() } else { -S::one() };
        match blocking {
            None => {
                // Bound flip: the entering variable crosses to its other
                // bound without any basis change.
                for i in 0..self.m {
                    let delta = dir.clone() * step.clone() * self.t[i][q].clone();
                    self.beta[i] = self.beta[i].clone() - delta;
                }
                self.state[q] = if increase {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
            }
            Some((r, leaves_at_upper)) => {
                let entering_start = if increase {
                    S::zero()
                } else {
                    self.upper[q].clone().expect("decreasing from upper")
                };
                for i in 0..self.m {
                    if i != r {
                        let delta = dir.clone() * step.clone() * self.t[i][q].clone();
                        self.beta[i] = self.beta[i].clone() - delta;
                    }
                }
                let leaving = self.basis[r];
                self.state[leaving] = if leaves_at_upper {
                    VarState::AtUpper
                } else {
                    VarState::AtLower
                };
                self.beta[r] = entering_start + dir.clone() * step;
                self.state[q] = VarState::Basic;
                self.basis[r] = q;

                // Pivot row ops.
                let piv = self.t[r][q].clone();
                for cell in self.t[r].iter_mut() {
                    *cell = cell.clone() / piv.clone();
                }
                let row_r = self.t[r].clone();
                for (i, row) in self.t.iter_mut().enumerate() {
                    if i == r {
                        continue;
                    }
                    let factor = row[q].clone();
                    if factor == S::zero() {
                        continue;
                    }
                    for (cell, rc) in row.iter_mut().zip(&row_r) {
                        *cell = cell.clone() - factor.clone() * rc.clone();
                    }
                }
                let dq = self.d[q].clone();
                if dq != S::zero() {
                    for (dj, rc) in self.d.iter_mut().zip(&row_r) {
                        *dj = dj.clone() - dq.clone() * rc.clone();
                    }
                }
                self.d[q] = S::zero();

                // Devex weight propagation along the (normalized) pivot row.
                let wq = self.weights[q].max(1.0);
                let piv_f = piv.to_f64();
                let mut reset = false;
                for (j, rc) in row_r.iter().enumerate().take(self.nvars) {
                    if j == q {
                        continue;
                    }
                    let a = rc.to_f64();
                    if a != 0.0 {
                        let cand = a * a * wq;
                        if cand > self.weights[j] {
                            self.weights[j] = cand;
                            if cand > DEVEX_RESET {
                                reset = true;
                            }
                        }
                    }
                }
                self.weights[leaving] = (wq / (piv_f * piv_f).max(f64::MIN_POSITIVE)).max(1.0);
                self.weights[q] = 1.0;
                if reset {
                    self.weights.iter_mut().for_each(|w| *w = 1.0);
                }
            }
        }

        self.pivots += 1;
        // Floating-point runs drift; periodically rebuild the invariants.
        if !S::tol().is_zero_val() && self.pivots % 256 == 0 {
            self.refresh_beta();
            self.recompute_reduced_costs();
        }
        Ok(true)
    }

    fn run(&mut self, max_iters: u64) -> Result<()> {
        self.bland = false;
        self.degenerate_run = 0;
        self.weights.iter_mut().for_each(|w| *w = 1.0);
        let mut iters = 0u64;
        while self.step()? {
            iters += 1;
            if iters > max_iters {
                return Err(Error::Lp(format!(
                    "simplex iteration limit {max_iters} exceeded"
                )));
            }
        }
        if std::env::var_os("PTAS_LP_STATS").is_some() {
            eprintln!(
                "simplex: m={} nvars={} iters={} pivots={} bland={}",
                self.m, self.nvars, iters, self.pivots, self.bland
            );
        }
        Ok(())
    }
}

/// Solves the bounded-variable LP, minimizing. Deterministic: identical
/// inputs produce identical pivot sequences and outputs.
pub fn solve_bounded_min<S: Scalar>(lp: &BoundedLp<S>) -> Result<SimplexOutcome<S>> {
    let m = lp.rows.len();
    let ns = lp.num_vars;
    debug_assert_eq!(lp.rhs.len(), m);
    debug_assert_eq!(lp.cost.len(), ns);
    debug_assert_eq!(lp.upper.len(), ns);

    // Initial point: structural variables at their upper bounds.
    let activity: Vec<S> = lp
        .rows
        .iter()
        .map(|row| {
            row.iter().fold(S::zero(), |acc, (j, a)| {
                acc + a.clone() * lp.upper[*j].clone()
            })
        })
        .collect();

    let violated: Vec<bool> = activity
        .iter()
        .zip(&lp.rhs)
        .map(|(act, b)| *act < *b)
        .collect();
    let num_artificial = violated.iter().filter(|&&v| v).count();
    let nvars = ns + m + num_artificial;

    let mut t: Vec<Vec<S>> = (0..m).map(|_| vec![S::zero(); nvars + 1]).collect();
    let mut upper: Vec<Option<S>> = lp.upper.iter().cloned().map(Some).collect();
    upper.extend((0..m + num_artificial).map(|_| None));
    let mut state = vec![VarState::AtUpper; ns];
    state.extend(vec![VarState::AtLower; m + num_artificial]);
    let mut basis = Vec::with_capacity(m);
    let mut beta = Vec::with_capacity(m);

    // Row i of the equality system is  A_i x - s_i (+ z_i) = b_i, with the
    // basis column scaled so it reads +1: surplus-basic rows enter negated.
    let mut art = 0usize;
    for i in 0..m {
        let sgn_neg = !violated[i]; // surplus basic: multiply row by -1
        for (j, a) in &lp.rows[i] {
            t[i][*j] = if sgn_neg { -a.clone() } else { a.clone() };
        }
        let s_col = ns + i;
        t[i][s_col] = if sgn_neg { S::one() } else { -S::one() };
        if violated[i] {
            let z_col = ns + m + art;
            art += 1;
            t[i][z_col] = S::one();
            basis.push(z_col);
            beta.push(lp.rhs[i].clone() - activity[i].clone());
        } else {
            basis.push(s_col);
            beta.push(activity[i].clone() - lp.rhs[i].clone());
        }
        t[i][nvars] = if sgn_neg {
            -lp.rhs[i].clone()
        } else {
            lp.rhs[i].clone()
        };
        state[*basis.last().expect("row basis")] = VarState::Basic;
    }

    let mut tab = Tableau {
        m,
        nvars,
        t,
        basis,
        state,
        upper,
        beta,
        d: vec![S::zero(); nvars],
        cost: vec![S::zero(); nvars],
        weights: vec![1.0; nvars],
        bland: false,
        degenerate_run: 0,
        pivots: 0,
    };

    let max_iters = 50_000 + 100 * (m as u64 + nvars as u64);

    if num_artificial > 0 {
        let mut phase1 = vec![S::zero(); nvars];
        for j in ns + m..nvars {
            phase1[j] = S::one();
        }
        tab.cost = phase1;
        tab.recompute_reduced_costs();
        tab.run(max_iters)?;
        let infeasibility = (0..m)
            .filter(|&i| tab.basis[i] >= ns + m)
            .fold(S::zero(), |acc, i| acc + tab.beta[i].clone().abs_val());
        let scale = lp
            .rhs
            .iter()
            .fold(S::one(), |acc, b| if b.abs_val() > acc { b.abs_val() } else { acc });
        if infeasibility > S::tol() * scale {
            return Ok(SimplexOutcome::Infeasible);
        }
        // Freeze artificials at zero for phase two.
        for j in ns + m..nvars {
            tab.upper[j] = Some(S::zero());
            if tab.state[j] == VarState::AtUpper {
                tab.state[j] = VarState::AtLower;
            }
        }
    }

    let mut phase2 = vec![S::zero(); nvars];
    phase2[..ns].clone_from_slice(&lp.cost);
    tab.cost = phase2;
    tab.recompute_reduced_costs();
    tab.run(max_iters)?;

    let x: Vec<S> = (0..ns).map(|j| tab.value_of(j)).collect();
    let value = x
        .iter()
        .zip(&lp.cost)
        .fold(S::zero(), |acc, (xj, cj)| acc + xj.clone() * cj.clone());
    Ok(SimplexOutcome::Optimal { x, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn lp_f64(
        rows: Vec<Vec<(usize, f64)>>,
        rhs: Vec<f64>,
        cost: Vec<f64>,
        upper: Vec<f64>,
    ) -> BoundedLp<f64> {
        BoundedLp {
            num_vars: cost.len(),
            rows,
            rhs,
            cost,
            upper,
        }
    }

    fn to_exact(lp: &BoundedLp<f64>) -> BoundedLp<BigRational> {
        BoundedLp {
            num_vars: lp.num_vars,
            rows: lp
                .rows
                .iter()
                .map(|r| {
                    r.iter()
                        .map(|(j, a)| (*j, <BigRational as Scalar>::from_f64(*a)))
                        .collect()
                })
                .collect(),
            rhs: lp.rhs.iter().map(|&b| Scalar::from_f64(b)).collect(),
            cost: lp.cost.iter().map(|&c| Scalar::from_f64(c)).collect(),
            upper: lp.upper.iter().map(|&u| Scalar::from_f64(u)).collect(),
        }
    }

    #[test]
    fn simple_cover() {
        // min x0 + 2 x1  s.t.  x0 + x1 >= 1, x in [0,1]^2 -> x = (1, 0).
        let lp = lp_f64(
            vec![vec![(0, 1.0), (1, 1.0)]],
            vec![1.0],
            vec![1.0, 2.0],
            vec![1.0, 1.0],
        );
        let SimplexOutcome::Optimal { x, value } = solve_bounded_min(&lp).unwrap() else {
            panic!("expected optimal");
        };
        assert!((value - 1.0).abs() < 1e-9);
        assert!((x[0] - 1.0).abs() < 1e-9 && x[1].abs() < 1e-9);
    }

    #[test]
    fn forced_fractional() {
        // min x0 s.t. 2 x0 >= 1, box [0,1]: x0 = 0.5.
        let lp = lp_f64(vec![vec![(0, 2.0)]], vec![1.0], vec![1.0], vec![1.0]);
        let SimplexOutcome::Optimal { x, value } = solve_bounded_min(&lp).unwrap() else {
            panic!();
        };
        assert!((x[0] - 0.5).abs() < 1e-9);
        assert!((value - 0.5).abs() < 1e-9);
    }

    #[test]
    fn infeasible_detected() {
        // x0 >= 2 with upper bound 1.
        let lp = lp_f64(vec![vec![(0, 1.0)]], vec![2.0], vec![1.0], vec![1.0]);
        assert!(matches!(
            solve_bounded_min(&lp).unwrap(),
            SimplexOutcome::Infeasible
        ));
        // Empty row with positive rhs.
        let lp2 = lp_f64(vec![vec![]], vec![1.0], vec![0.0], vec![1.0]);
        assert!(matches!(
            solve_bounded_min(&lp2).unwrap(),
            SimplexOutcome::Infeasible
        ));
    }

    #[test]
    fn zero_cost_feasible() {
        let lp = lp_f64(
            vec![vec![(0, 1.0), (1, 1.0)]],
            vec![0.5],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        );
        let SimplexOutcome::Optimal { x, value } = solve_bounded_min(&lp).unwrap() else {
            panic!();
        };
        assert!(value.abs() < 1e-12);
        assert!(x[0] + x[1] >= 0.5 - 1e-9);
    }

    #[test]
    fn multi_row_interior() {
        // min 3x0 + x1 + 2x2
        // s.t. x0 + x1 >= 1; x1 + x2 >= 1; x0 + x2 >= 1; box [0,1].
        // Optimum: x = (0, 1, 1) -> 3.
        let lp = lp_f64(
            vec![
                vec![(0, 1.0), (1, 1.0)],
                vec![(1, 1.0), (2, 1.0)],
                vec![(0, 1.0), (2, 1.0)],
            ],
            vec![1.0, 1.0, 1.0],
            vec![3.0, 1.0, 2.0],
            vec![1.0; 3],
        );
        let SimplexOutcome::Optimal { x, value } = solve_bounded_min(&lp).unwrap() else {
            panic!();
        };
        assert!((value - 3.0).abs() < 1e-9, "value {value} x {x:?}");
    }

    #[test]
    fn exact_matches_float_on_random_lps() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for case in 0..40 {
            let n = rng.gen_range(2..6);
            let m = rng.gen_range(1..5);
            let rows: Vec<Vec<(usize, f64)>> = (0..m)
                .map(|_| {
                    let mut row = Vec::new();
                    for j in 0..n {
                        if rng.gen_bool(0.7) {
                            row.push((j, (rng.gen_range(1..8) as f64) / 4.0));
                        }
                    }
                    row
                })
                .collect();
            let rhs: Vec<f64> = (0..m).map(|_| (rng.gen_range(0..6) as f64) / 4.0).collect();
            let cost: Vec<f64> = (0..n).map(|_| (rng.gen_range(0..9) as f64) / 8.0).collect();
            let lp = lp_f64(rows, rhs, cost, vec![1.0; n]);
            let exact = to_exact(&lp);
            let f = solve_bounded_min(&lp).unwrap();
            let e = solve_bounded_min(&exact).unwrap();
            match (f, e) {
                (
                    SimplexOutcome::Optimal { value: vf, .. },
                    SimplexOutcome::Optimal { value: ve, x: xe },
                ) => {
                    let ve_f = Scalar::to_f64(&ve);
                    assert!(
                        (vf - ve_f).abs() <= 1e-7 * (1.0 + ve_f.abs()),
                        "case {case}: float {vf} vs exact {ve_f}"
                    );
                    // Exact solution is exactly feasible.
                    for (row, b) in exact.rows.iter().zip(&exact.rhs) {
                        let act = row.iter().fold(
                            <BigRational as Scalar>::zero(),
                            |acc, (j, a)| acc + a.clone() * xe[*j].clone(),
                        );
                        assert!(act >= *b, "case {case}: exact solution infeasible");
                    }
                }
                (SimplexOutcome::Infeasible, SimplexOutcome::Infeasible) => {}
                (a, b) => panic!("case {case}: status mismatch {a:?} vs {b:?}"),
            }
        }
    }

    #[test]
    fn determinism() {
        let lp = lp_f64(
            vec![
                vec![(0, 1.0), (1, 1.0), (2, 1.0)],
                vec![(0, 2.0), (2, 1.0)],
            ],
            vec![1.5, 1.0],
            vec![1.0, 1.0, 1.0],
            vec![1.0; 3],
        );
        let SimplexOutcome::Optimal { x: x1, .. } = solve_bounded_min(&lp).unwrap() else {
            panic!();
        };
        let SimplexOutcome::Optimal { x: x2, .. } = solve_bounded_min(&lp).unwrap() else {
            panic!();
        };
        assert_eq!(x1, x2);
    }
}
