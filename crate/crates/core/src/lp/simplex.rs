//! Two-phase primal simplex on a dense tableau with Bland's rule.

use super::{Certificate, LinearProgram, LpError, LpSolution, LpStatus, RowSense, Sense, SimplexConfig};

/// Provenance of an expanded (standard-form) column.
#[derive(Debug, Clone, Copy)]
enum ColKind {
    /// Shifted user variable contribution: `x_user[j] += sign · col`.
    Var { var: usize, sign: f64 },
    /// Slack of a user row.
    Slack,
    /// Slack of the upper-bound row of a variable.
    BoundSlack,
}

#[derive(Debug, Clone, Copy)]
enum RowKind {
    User(usize),
    Bound(usize),
}

/// Equality-form program `min c·x, A x = b, x ≥ 0` plus bookkeeping to map
/// solutions and duals back to the user's statement.
struct Standard {
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
    cols: Vec<ColKind>,
    rows: Vec<RowKind>,
    flipped: Vec<bool>,
    shift: f64,
}

fn build_standard(lp: &LinearProgram) -> Standard {
    let n = lp.num_vars();
    let m = lp.num_rows();
    let obj_flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };

    let mut cols: Vec<ColKind> = Vec::new();
    let mut c: Vec<f64> = Vec::new();
    let mut shift = 0.0;
    // Column layout per user variable.
    let mut var_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let cj = lp.objective[j] * obj_flip;
        if lp.lower[j].is_finite() {
            var_cols[j].push(cols.len());
            cols.push(ColKind::Var { var: j, sign: 1.0 });
            c.push(cj);
            shift += cj * lp.lower[j];
        } else {
            var_cols[j].push(cols.len());
            cols.push(ColKind::Var { var: j, sign: 1.0 });
            c.push(cj);
            var_cols[j].push(cols.len());
            cols.push(ColKind::Var { var: j, sign: -1.0 });
            c.push(-cj);
        }
    }

    let mut rows: Vec<RowKind> = Vec::new();
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();

    let col_count_estimate = cols.len();
    let mut push_row = |kind: RowKind, coeffs: Vec<(usize, f64)>, rhs: f64| {
        let mut row = vec![0.0; col_count_estimate];
        for (idx, v) in coeffs {
            row[idx] += v;
        }
        a.push(row);
        b.push(rhs);
        rows.push(kind);
    };

    for i in 0..m {
        let mut coeffs: Vec<(usize, f64)> = Vec::new();
        let mut rhs = lp.rhs[i];
        for j in 0..n {
            let v = lp.rows[i][j];
            if v == 0.0 {
                continue;
            }
            if lp.lower[j].is_finite() {
                rhs -= v * lp.lower[j];
                coeffs.push((var_cols[j][0], v));
            } else {
                coeffs.push((var_cols[j][0], v));
                coeffs.push((var_cols[j][1], -v));
            }
        }
        push_row(RowKind::User(i), coeffs, rhs);
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            push_row(RowKind::Bound(j), vec![(var_cols[j][0], 1.0)], u - lp.lower[j]);
        }
    }

    // Append slack columns.
    for (i, kind) in rows.iter().enumerate() {
        let sense = match kind {
            RowKind::User(r) => lp.row_senses[*r],
            RowKind::Bound(_) => RowSense::Le,
        };
        let sign = match sense {
            RowSense::Le => 1.0,
            RowSense::Ge => -1.0,
            RowSense::Eq => continue,
        };
        let col = cols.len();
        match kind {
            RowKind::User(_) => cols.push(ColKind::Slack),
            RowKind::Bound(_) => cols.push(ColKind::BoundSlack),
        }
        c.push(0.0);
        for row in a.iter_mut() {
            row.push(0.0);
        }
        a[i][col] = sign;
    }

    // Normalize b ≥ 0.
    let mut flipped = vec![false; a.len()];
    for i in 0..a.len() {
        if b[i] < 0.0 {
            for v in a[i].iter_mut() {
                *v = -*v;
            }
            b[i] = -b[i];
            flipped[i] = true;
        }
    }

    Standard { a, b, c, cols, rows, flipped, shift }
}

pub(super) fn solve(lp: &LinearProgram, cfg: &SimplexConfig) -> Result<LpSolution, LpError> {
    let std_form = build_standard(lp);
    let m = std_form.a.len();
    let n_struct = std_form.cols.len();

    // Tableau columns: structural, then one artificial per row needing it,
    // then the rhs.
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    let mut art_of_row: Vec<Option<usize>> = vec![None; m];
    let mut n_art = 0;
    for i in 0..m {
        let slack = (0..n_struct).rev().find(|&j| {
            matches!(std_form.cols[j], ColKind::Slack | ColKind::BoundSlack)
                && std_form.a[i][j] == 1.0
                && (0..m).all(|r| r == i || std_form.a[r][j] == 0.0)
        });
        match slack {
            Some(j) => basis.push(j),
            None => {
                art_of_row[i] = Some(n_struct + n_art);
                basis.push(n_struct + n_art);
                n_art += 1;
            }
        }
    }

    let width = n_struct + n_art + 1;
    let mut t = vec![0.0f64; m * width];
    for i in 0..m {
        for j in 0..n_struct {
            t[i * width + j] = std_form.a[i][j];
        }
        if let Some(col) = art_of_row[i] {
            t[i * width + col] = 1.0;
        }
        t[i * width + width - 1] = std_form.b[i];
    }

    let mut active: Vec<usize> = (0..m).collect(); // tableau row → standard row
    let mut iterations = 0usize;

    let failure = |iterations| LpSolution {
        status: LpStatus::NumericalFailure,
        primal: vec![0.0; lp.num_vars()],
        dual: vec![0.0; lp.num_rows()],
        reduced_costs: vec![0.0; lp.num_vars()],
        upper_duals: vec![0.0; lp.num_vars()],
        objective: f64::NAN,
        certificate: Certificate::default(),
        iterations,
    };

    // Phase 1: minimize the sum of artificials.
    if n_art > 0 {
        let c1: Vec<f64> = (0..n_struct + n_art).map(|j| if j >= n_struct { 1.0 } else { 0.0 }).collect();
        let status = run_phase(&mut t, width, &mut basis, &active, &c1, n_struct, cfg, &mut iterations);
        match status {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::IterationCap => return Ok(failure(iterations)),
            PhaseOutcome::Unbounded => return Ok(failure(iterations)), // cannot happen: objective ≥ 0
        }
        let obj1: f64 = (0..active.len())
            .filter(|&row| basis[row] >= n_struct)
            .map(|row| t[row * width + width - 1])
            .sum();
        let scale = 1.0 + std_form.b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if obj1 > cfg.feas_tol * scale {
            return Ok(LpSolution { status: LpStatus::Infeasible, ..failure(iterations) });
        }

        // Drive remaining artificials out of the basis, dropping redundant rows.
        let mut row = 0;
        while row < active.len() {
            if basis[row] >= n_struct {
                let pivot_col = (0..n_struct).find(|&j| t[row * width + j].abs() > cfg.pivot_tol);
                match pivot_col {
                    Some(j) => {
                        pivot(&mut t, width, active.len(), row, j);
                        basis[row] = j;
                        row += 1;
                    }
                    None => {
                        // Redundant constraint: remove the tableau row.
                        let last = active.len() - 1;
                        for j in 0..width {
                            t[row * width + j] = t[last * width + j];
                        }
                        basis.swap_remove(row);
                        active.swap_remove(row);
                        t.truncate(active.len() * width);
                    }
                }
            } else {
                row += 1;
            }
        }
    }

    // Phase 2 on the original objective.
    let c2: Vec<f64> = (0..n_struct + n_art)
        .map(|j| if j < n_struct { std_form.c[j] } else { 0.0 })
        .collect();
    let status = run_phase(&mut t, width, &mut basis, &active, &c2, n_struct, cfg, &mut iterations);
    match status {
        PhaseOutcome::Optimal => {}
        PhaseOutcome::IterationCap => return Ok(failure(iterations)),
        PhaseOutcome::Unbounded => {
            return Ok(LpSolution { status: LpStatus::Unbounded, ..failure(iterations) })
        }
    }

    // Structural solution.
    let mut x_std = vec![0.0f64; n_struct];
    for (row, &col) in basis.iter().enumerate() {
        if col < n_struct {
            x_std[col] = t[row * width + width - 1];
        }
    }
    let mut primal = vec![0.0f64; lp.num_vars()];
    for (j, kind) in std_form.cols.iter().enumerate() {
        if let ColKind::Var { var, sign } = kind {
            primal[*var] += sign * x_std[j];
        }
    }
    for j in 0..lp.num_vars() {
        if lp.lower[j].is_finite() {
            primal[j] += lp.lower[j];
        }
    }

    // Duals of the active rows: solve Bᵀ y = c_B.
    let k = active.len();
    let mut bt = vec![0.0f64; k * k];
    let mut cb = vec![0.0f64; k];
    for (pos, &col) in basis.iter().enumerate() {
        for (row, &std_row) in active.iter().enumerate() {
            // Bᵀ[pos][row] = B[row][pos] = a[std_row][basis[pos]]
            bt[pos * k + row] = std_form.a[std_row][col];
        }
        cb[pos] = std_form.c[col];
    }
    let y_active = match gauss_solve(&mut bt, &mut cb, k) {
        Some(y) => y,
        None => return Ok(failure(iterations)),
    };

    let mut dual_min = vec![0.0f64; lp.num_rows()];
    let mut upper_min = vec![0.0f64; lp.num_vars()];
    for (row, &std_row) in active.iter().enumerate() {
        let y = if std_form.flipped[std_row] { -y_active[row] } else { y_active[row] };
        match std_form.rows[std_row] {
            RowKind::User(i) => dual_min[i] = y,
            RowKind::Bound(j) => upper_min[j] = y,
        }
    }

    // User-level reduced costs in minimize convention.
    let obj_flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut reduced_min = vec![0.0f64; lp.num_vars()];
    for j in 0..lp.num_vars() {
        let mut r = lp.objective[j] * obj_flip - upper_min[j];
        for i in 0..lp.num_rows() {
            r -= dual_min[i] * lp.rows[i][j];
        }
        reduced_min[j] = r;
    }

    let objective_min: f64 = basis
        .iter()
        .enumerate()
        .map(|(row, &col)| std_form.c[col] * t[row * width + width - 1])
        .sum::<f64>()
        + std_form.shift;

    Ok(LpSolution {
        status: LpStatus::Optimal,
        primal,
        dual: dual_min.iter().map(|v| v * obj_flip).collect(),
        reduced_costs: reduced_min.iter().map(|v| v * obj_flip).collect(),
        upper_duals: upper_min.iter().map(|v| v * obj_flip).collect(),
        objective: objective_min * obj_flip,
        certificate: Certificate::default(),
        iterations,
    })
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationCap,
}

/// Runs Bland-rule pivots until no reduced cost is below `−pivot_tol`.
#[allow(clippy::too_many_arguments)]
fn run_phase(
    t: &mut [f64],
    width: usize,
    basis: &mut [usize],
    active: &[usize],
    c: &[f64],
    n_struct: usize,
    cfg: &SimplexConfig,
    iterations: &mut usize,
) -> PhaseOutcome {
    let m = active.len();
    let mut in_basis = vec![false; width - 1];
    for &col in basis.iter() {
        in_basis[col] = true;
    }
    loop {
        if *iterations >= cfg.max_iters {
            return PhaseOutcome::IterationCap;
        }
        // Reduced costs r_j = c_j − c_Bᵀ tableau_j, entering = smallest index
        // with r_j < −pivot_tol (artificial columns never re-enter).
        let mut entering = None;
        for j in 0..n_struct {
            if in_basis[j] {
                continue;
            }
            let mut r = c[j];
            for row in 0..m {
                let cb = c[basis[row]];
                if cb != 0.0 {
                    r -= cb * t[row * width + j];
                }
            }
            if r < -cfg.pivot_tol {
                entering = Some(j);
                break;
            }
        }
        let je = match entering {
            Some(j) => j,
            None => return PhaseOutcome::Optimal,
        };

        // Ratio test; ties broken by the smallest basic column index.
        let mut leave: Option<(usize, f64)> = None;
        for row in 0..m {
            let piv = t[row * width + je];
            if piv > cfg.pivot_tol {
                let theta = t[row * width + width - 1] / piv;
                match leave {
                    None => leave = Some((row, theta)),
                    Some((best_row, best_theta)) => {
                        let tol = 1e-12 * (1.0 + best_theta.abs());
                        if theta < best_theta - tol
                            || (theta <= best_theta + tol && basis[row] < basis[best_row])
                        {
                            leave = Some((row, theta.min(best_theta)));
                        }
                    }
                }
            }
        }
        let (lr, _) = match leave {
            Some(v) => v,
            None => return PhaseOutcome::Unbounded,
        };
        pivot(t, width, m, lr, je);
        in_basis[basis[lr]] = false;
        in_basis[je] = true;
        basis[lr] = je;
        *iterations += 1;
    }
}

fn pivot(t: &mut [f64], width: usize, m: usize, row: usize, col: usize) {
    let piv = t[row * width + col];
    let inv = 1.0 / piv;
    for j in 0..width {
        t[row * width + j] *= inv;
    }
    t[row * width + col] = 1.0;
    for r in 0..m {
        if r == row {
            continue;
        }
        let factor = t[r * width + col];
        if factor != 0.0 {
            for j in 0..width {
                t[r * width + j] -= factor * t[row * width + j];
            }
            t[r * width + col] = 0.0;
        }
    }
}

/// Dense Gaussian elimination with partial pivoting; `a` is n×n row-major.
fn gauss_solve(a: &mut [f64], b: &mut [f64], n: usize) -> Option<Vec<f64>> {
    for col in 0..n {
        let mut best = col;
        for r in col + 1..n {
            if a[r * n + col].abs() > a[best * n + col].abs() {
                best = r;
            }
        }
        if a[best * n + col].abs() < 1e-300 {
            return None;
        }
        if best != col {
            for j in 0..n {
                a.swap(col * n + j, best * n + j);
            }
            b.swap(col, best);
        }
        let inv = 1.0 / a[col * n + col];
        for r in col + 1..n {
            let f = a[r * n + col] * inv;
            if f != 0.0 {
                for j in col..n {
                    a[r * n + j] -= f * a[col * n + j];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for col in (0..n).rev() {
        let mut v = b[col];
        for j in col + 1..n {
            v -= a[col * n + j] * x[j];
        }
        x[col] = v / a[col * n + col];
    }
    Some(x)
}
