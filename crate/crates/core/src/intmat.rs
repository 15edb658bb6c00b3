//! Integer matrix normal forms: row Hermite form, Smith form and kernels.
//!
//! Sizes here are tiny (the torus rank), so the plain Euclidean
//! elimination without pivot-size heuristics is fine. Entries use `i128`
//! to absorb the intermediate growth of the elementary operations.

pub type IMat = Vec<Vec<i128>>;

/// Row Hermite normal form: row echelon, positive pivots, entries above
/// each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hnf_rows(mat: &IMat) -> IMat {
    let mut m: IMat = mat.clone();
    if m.is_empty() {
        return m;
    }
    let cols = m[0].len();
    let mut row = 0;
    for col in 0..cols {
        // Euclid down the column to leave a single nonzero entry at `row`.
        loop {
            let mut pivot: Option<usize> = None;
            for r in row..m.len() {
                if m[r][col] != 0 && pivot.is_none_or(|p| m[r][col].abs() < m[p][col].abs()) {
                    pivot = Some(r);
                }
            }
            let Some(p) = pivot else { break };
            m.swap(row, p);
            let mut done = true;
            let head = m[row][col];
            for r in row + 1..m.len() {
                let q = div_floor(m[r][col], head);
                if q != 0 {
                    for c in 0..cols {
                        let v = m[row][c];
                        m[r][c] -= q * v;
                    }
                }
                if m[r][col] != 0 {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if row < m.len() && m[row][col] != 0 {
            if m[row][col] < 0 {
                for c in 0..cols {
                    m[row][c] = -m[row][c];
                }
            }
            let head = m[row][col];
            for r in 0..row {
                let q = div_floor(m[r][col], head);
                if q != 0 {
                    for c in 0..cols {
                        let v = m[row][c];
                        m[r][c] -= q * v;
                    }
                }
            }
            row += 1;
            if row == m.len() {
                break;
            }
        }
    }
    m.truncate(row);
    m
}

fn div_floor(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Basis of the integer kernel `{x : mat * x = 0}` as rows.
///
/// Row-reduces `[mat^T | I]`; the identity blocks of the zero rows of the
/// reduced transpose are exactly the kernel.
pub fn kernel_basis(mat: &IMat) -> IMat {
    if mat.is_empty() {
        return vec![];
    }
    let rows = mat.len();
    let cols = mat[0].len();
    let mut work: IMat = Vec::with_capacity(cols);
    for j in 0..cols {
        let mut r = Vec::with_capacity(rows + cols);
        for row in mat {
            r.push(row[j]);
        }
        for k in 0..cols {
            r.push(if k == j { 1 } else { 0 });
        }
        work.push(r);
    }
    let h = hnf_rows(&work);
    let mut kernel = Vec::new();
    for row in h {
        if row[..rows].iter().all(|&v| v == 0) {
            kernel.push(row[rows..].to_vec());
        }
    }
    kernel
}

/// Elementary divisors (the diagonal of the Smith normal form), nonzero
/// entries only, each positive.
pub fn smith_divisors(mat: &IMat) -> Vec<i128> {
    let mut m = mat.clone();
    let mut out = Vec::new();
    let mut top = 0;
    while top < m.len() && !m.iter().skip(top).all(|r| r.iter().all(|&v| v == 0)) {
        let cols = m[0].len();
        // Find the smallest nonzero entry and move it to (top, top).
        loop {
            let mut best: Option<(usize, usize)> = None;
            for r in top..m.len() {
                for c in top..cols {
                    if m[r][c] != 0
                        && best.is_none_or(|(br, bc)| m[r][c].abs() < m[br][bc].abs())
                    {
                        best = Some((r, c));
                    }
                }
            }
            let Some((br, bc)) = best else {
                return out;
            };
            m.swap(top, br);
            for row in m.iter_mut() {
                row.swap(top, bc);
            }
            let head = m[top][top];
            let mut clean = true;
            for r in top + 1..m.len() {
                let q = div_floor(m[r][top], head);
                if q != 0 {
                    for c in top..cols {
                        let v = m[top][c];
                        m[r][c] -= q * v;
                    }
                }
                if m[r][top] != 0 {
                    clean = false;
                }
            }
            for c in top + 1..cols {
                let q = div_floor(m[top][c], head);
                if q != 0 {
                    for row in m.iter_mut().skip(top) {
                        let v = row[top];
                        row[c] -= q * v;
                    }
                }
                if m[top][c] != 0 {
                    clean = false;
                }
            }
            if clean {
                break;
            }
        }
        out.push(m[top][top].abs());
        top += 1;
        if top >= m.len() || top >= cols {
            break;
        }
    }
    // Normalize the divisibility chain d1 | d2 | ...
    let mut changed = true;
    while changed {
        changed = false;
        for i in 1..out.len() {
            if out[i] % out[i - 1] != 0 {
                let a = out[i - 1];
                let b = out[i];
                let g = gcd(a, b);
                out[i - 1] = g;
                out[i] = a / g * b;
                changed = true;
            }
        }
    }
    out
}

fn gcd(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}
