//! Exact LP solving by basic-solution enumeration in rational arithmetic.
//!
//! Every float datum is converted to an exact rational, the program is put in
//! equality form, and all column bases are enumerated; each nonsingular basis
//! is solved by exact Gaussian elimination and feasible ones compete on the
//! exact objective. This is an oracle for small instances: it shares no code
//! with the simplex pivoting path.
//!
//! The objective must be bounded on the feasible set (true for nonnegative
//! transport costs); unboundedness is not detected here.

use super::{LinearProgram, LpError, RowSense, Sense};
use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone)]
pub enum ExactResult {
    Optimal { value: f64, primal: Vec<f64> },
    Infeasible,
}

fn rat(v: f64) -> BigRational {
    BigRational::from_f64(v).expect("finite float")
}

const MAX_BASES: f64 = 5e6;

/// Enumerates all bases of the equality form of `lp` and returns the best
/// feasible basic solution, exactly.
pub fn solve_enumerated(lp: &LinearProgram) -> Result<ExactResult, LpError> {
    lp.validate()?;
    let n = lp.num_vars();

    // Equality form with rational data. Column provenance: (var, sign) with
    // var == usize::MAX marking a slack column.
    let mut cols: Vec<(usize, f64)> = Vec::new();
    let obj_flip = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut c: Vec<BigRational> = Vec::new();
    let mut shift = BigRational::zero();
    let mut var_cols: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..n {
        let cj = rat(lp.objective[j] * obj_flip);
        if lp.lower[j].is_finite() {
            var_cols[j].push(cols.len());
            cols.push((j, 1.0));
            shift += &cj * rat(lp.lower[j]);
            c.push(cj);
        } else {
            var_cols[j].push(cols.len());
            cols.push((j, 1.0));
            c.push(cj.clone());
            var_cols[j].push(cols.len());
            cols.push((j, -1.0));
            c.push(-cj);
        }
    }

    let mut rows: Vec<Vec<(usize, BigRational)>> = Vec::new();
    let mut rhs: Vec<BigRational> = Vec::new();
    let mut senses: Vec<RowSense> = Vec::new();
    for i in 0..lp.num_rows() {
        let mut row: Vec<(usize, BigRational)> = Vec::new();
        let mut b = rat(lp.rhs[i]);
        for j in 0..n {
            let v = lp.rows[i][j];
            if v == 0.0 {
                continue;
            }
            let rv = rat(v);
            if lp.lower[j].is_finite() {
                b -= &rv * rat(lp.lower[j]);
                row.push((var_cols[j][0], rv));
            } else {
                row.push((var_cols[j][0], rv.clone()));
                row.push((var_cols[j][1], -rv));
            }
        }
        rows.push(row);
        rhs.push(b);
        senses.push(lp.row_senses[i]);
    }
    for j in 0..n {
        if let Some(u) = lp.upper[j] {
            rows.push(vec![(var_cols[j][0], rat(1.0))]);
            rhs.push(rat(u) - rat(lp.lower[j]));
            senses.push(RowSense::Le);
        }
    }

    // Slack columns.
    for (i, sense) in senses.iter().enumerate() {
        let sign = match sense {
            RowSense::Le => 1.0,
            RowSense::Ge => -1.0,
            RowSense::Eq => continue,
        };
        let col = cols.len();
        cols.push((usize::MAX, 0.0));
        c.push(BigRational::zero());
        rows[i].push((col, rat(sign)));
    }

    let m = rows.len();
    let n_total = cols.len();
    if m == 0 {
        // No constraints: optimum sits at the (shifted) origin unless some
        // reduced cost is negative, which the caller rules out.
        let primal: Vec<f64> = (0..n)
            .map(|j| if lp.lower[j].is_finite() { lp.lower[j] } else { 0.0 })
            .collect();
        let value = shift.to_f64().unwrap() * obj_flip;
        return Ok(ExactResult::Optimal { value, primal });
    }
    if n_total < m {
        return Err(LpError::Shape("more rows than columns in equality form".into()));
    }
    let bases = binomial(n_total, m);
    if bases > MAX_BASES {
        return Err(LpError::TooLarge(bases));
    }

    // Dense rational matrix.
    let mut a = vec![BigRational::zero(); m * n_total];
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row {
            a[i * n_total + j] = a[i * n_total + j].clone() + v.clone();
        }
    }

    let mut best: Option<(BigRational, Vec<usize>, Vec<BigRational>)> = None;
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        if let Some(xb) = solve_basis(&a, &rhs, &combo, m, n_total) {
            if xb.iter().all(|v| !v.is_negative()) {
                let value: BigRational =
                    combo.iter().zip(&xb).map(|(&j, v)| &c[j] * v).sum::<BigRational>() + &shift;
                let better = match &best {
                    None => true,
                    Some((bv, _, _)) => value < *bv,
                };
                if better {
                    best = Some((value, combo.clone(), xb));
                }
            }
        }
        if !next_combination(&mut combo, n_total) {
            break;
        }
    }

    match best {
        None => Ok(ExactResult::Infeasible),
        Some((value, combo, xb)) => {
            let mut primal = vec![0.0f64; n];
            for (pos, &j) in combo.iter().enumerate() {
                let (var, sign) = cols[j];
                if var != usize::MAX {
                    primal[var] += sign * xb[pos].to_f64().unwrap();
                }
            }
            for j in 0..n {
                if lp.lower[j].is_finite() {
                    primal[j] += lp.lower[j];
                }
            }
            Ok(ExactResult::Optimal { value: value.to_f64().unwrap() * obj_flip, primal })
        }
    }
}

/// Solves B x = b for the basis given by `combo`, or None if singular.
fn solve_basis(
    a: &[BigRational],
    rhs: &[BigRational],
    combo: &[usize],
    m: usize,
    n_total: usize,
) -> Option<Vec<BigRational>> {
    let mut mat = vec![BigRational::zero(); m * m];
    for (pos, &j) in combo.iter().enumerate() {
        for i in 0..m {
            mat[i * m + pos] = a[i * n_total + j].clone();
        }
    }
    let mut b: Vec<BigRational> = rhs.to_vec();
    for col in 0..m {
        let pivot_row = (col..m).find(|&r| !mat[r * m + col].is_zero())?;
        if pivot_row != col {
            for j in 0..m {
                mat.swap(col * m + j, pivot_row * m + j);
            }
            b.swap(col, pivot_row);
        }
        let inv = mat[col * m + col].clone();
        for r in col + 1..m {
            if mat[r * m + col].is_zero() {
                continue;
            }
            let f = &mat[r * m + col] / &inv;
            for j in col..m {
                let sub = &f * &mat[col * m + j];
                mat[r * m + j] = &mat[r * m + j] - sub;
            }
            let sub = &f * &b[col];
            b[r] = &b[r] - sub;
        }
    }
    let mut x = vec![BigRational::zero(); m];
    for col in (0..m).rev() {
        let mut v = b[col].clone();
        for j in col + 1..m {
            v -= &mat[col * m + j] * &x[j];
        }
        x[col] = v / &mat[col * m + col];
    }
    Some(x)
}

fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    let mut v = 1.0f64;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
        if v > 1e18 {
            return v;
        }
    }
    v
}
