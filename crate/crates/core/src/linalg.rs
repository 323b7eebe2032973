//! Direct solvers: tridiagonal, banded LU, dense LU and block-tridiagonal LU.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("singular matrix (zero pivot at row {row})")]
    Singular { row: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Solves a tridiagonal system by the Thomas algorithm.
///
/// `lower[i]` multiplies x[i-1] in row i (lower[0] ignored), `upper[i]`
/// multiplies x[i+1] (upper[n-1] ignored). Intended for diagonally dominant
/// matrices; no pivoting.
pub fn solve_tridiagonal(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>, LinalgError> {
    let mut x = rhs.to_vec();
    let mut scratch = vec![0.0; diag.len()];
    solve_tridiagonal_in_place(lower, diag, upper, &mut x, &mut scratch)?;
    Ok(x)
}

/// Thomas algorithm without pivoting, overwriting `rhs` with the solution;
/// `scratch` needs the length of `diag`.
pub fn solve_tridiagonal_in_place(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &mut [f64],
    scratch: &mut [f64],
) -> Result<(), LinalgError> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || scratch.len() != n {
        return Err(LinalgError::Dimension(format!(
            "tridiagonal bands {} {} {} rhs {} scratch {}",
            lower.len(),
            n,
            upper.len(),
            rhs.len(),
            scratch.len()
        )));
    }
    if n == 0 {
        return Ok(());
    }
    let c = scratch;
    let d = rhs;
    let mut beta = diag[0];
    if beta == 0.0 || !beta.is_finite() {
        return Err(LinalgError::Singular { row: 0 });
    }
    c[0] = upper[0] / beta;
    d[0] /= beta;
    for i in 1..n {
        beta = diag[i] - lower[i] * c[i - 1];
        if beta == 0.0 || !beta.is_finite() {
            return Err(LinalgError::Singular { row: i });
        }
        c[i] = upper[i] / beta;
        d[i] = (d[i] - lower[i] * d[i - 1]) / beta;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(())
}

/// Banded matrix with `kl` sub- and `ku` super-diagonals, factored by
/// Gaussian elimination with partial pivoting.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
    pivots: Vec<usize>,
    factored: bool,
}

impl BandedMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
            pivots: vec![0; n],
            factored: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Zeros every entry so the storage can be reused for a new matrix.
    pub fn reset(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
        self.factored = false;
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl);
        i * self.width + (j + self.kl - i)
    }

    /// Sets entry (i, j); `j` must lie within the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i},{j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return 0.0;
        }
        self.data[self.idx(i, j)]
    }

    /// Computes y = A x (only valid before factorisation).
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert!(!self.factored);
        let mut y = vec![0.0; self.n];
        for (i, yi) in y.iter_mut().enumerate() {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            for j in lo..=hi {
                *yi += self.data[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn factor(&mut self) -> Result<(), LinalgError> {
        let n = self.n;
        let span = self.ku + self.kl;
        for k in 0..n {
            let last = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for i in k + 1..=last {
                let v = self.data[self.idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::Singular { row: k });
            }
            self.pivots[k] = p;
            let jmax = (k + span).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = self.idx(k, j);
                    let b = self.idx(p, j);
                    self.data.swap(a, b);
                }
            }
            let piv = self.data[self.idx(k, k)];
            for i in k + 1..=last {
                let ik = self.idx(i, k);
                let m = self.data[ik] / piv;
                self.data[ik] = m;
                if m != 0.0 {
                    for j in k + 1..=jmax {
                        let kj = self.data[self.idx(k, j)];
                        let ij = self.idx(i, j);
                        self.data[ij] -= m * kj;
                    }
                }
            }
        }
        self.factored = true;
        Ok(())
    }

    /// Solves in place using a previous [`factor`](Self::factor).
    pub fn solve_in_place(&self, b: &mut [f64]) -> Result<(), LinalgError> {
        assert!(self.factored, "solve before factor");
        let n = self.n;
        if b.len() != n {
            return Err(LinalgError::Dimension(format!("rhs {} vs {}", b.len(), n)));
        }
        let span = self.ku + self.kl;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let last = (k + self.kl).min(n - 1);
            for i in k + 1..=last {
                b[i] -= self.data[self.idx(i, k)] * b[k];
            }
        }
        for k in (0..n).rev() {
            let jmax = (k + span).min(n - 1);
            let mut s = b[k];
            for j in k + 1..=jmax {
                s -= self.data[self.idx(k, j)] * b[j];
            }
            b[k] = s / self.data[self.idx(k, k)];
        }
        Ok(())
    }
}

/// LU factorisation (partial pivoting) of a small dense row-major matrix.
#[derive(Debug, Clone)]
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl DenseLu {
    pub fn new(n: usize, mut a: Vec<f64>) -> Result<Self, LinalgError> {
        if a.len() != n * n {
            return Err(LinalgError::Dimension(format!("{} entries for n={n}", a.len())));
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(LinalgError::Singular { row: k });
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let piv = a[k * n + k];
            let (top, bottom) = a.split_at_mut((k + 1) * n);
            let row_k = &top[k * n..];
            for row_i in bottom.chunks_exact_mut(n) {
                let m = row_i[k] / piv;
                row_i[k] = m;
                if m != 0.0 {
                    for j in k + 1..n {
                        row_i[j] -= m * row_k[j];
                    }
                }
            }
        }
        Ok(Self { n, lu: a, perm })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        self.substitute(&mut x);
        x
    }

    /// Solves A X = B in place for a row-major n×m block B.
    pub fn solve_many_in_place(&self, b: &mut [f64], m: usize) {
        let n = self.n;
        debug_assert_eq!(b.len(), n * m);
        let src = b.to_vec();
        for (i, &p) in self.perm.iter().enumerate() {
            b[i * m..(i + 1) * m].copy_from_slice(&src[p * m..(p + 1) * m]);
        }
        for i in 1..n {
            let (done, rest) = b.split_at_mut(i * m);
            let row = &mut rest[..m];
            for k in 0..i {
                let l = self.lu[i * n + k];
                if l != 0.0 {
                    for (x, y) in row.iter_mut().zip(&done[k * m..(k + 1) * m]) {
                        *x -= l * y;
                    }
                }
            }
        }
        for i in (0..n).rev() {
            let (head, tail) = b.split_at_mut((i + 1) * m);
            let row = &mut head[i * m..];
            for k in i + 1..n {
                let u = self.lu[i * n + k];
                if u != 0.0 {
                    for (x, y) in row.iter_mut().zip(&tail[(k - i - 1) * m..(k - i) * m]) {
                        *x -= u * y;
                    }
                }
            }
            let d = 1.0 / self.lu[i * n + i];
            row.iter_mut().for_each(|x| *x *= d);
        }
    }

    fn substitute(&self, x: &mut [f64]) {
        let n = self.n;
        for i in 1..n {
            let row = &self.lu[i * n..i * n + i];
            let mut s = x[i];
            for (j, l) in row.iter().enumerate() {
                s -= l * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n..(i + 1) * n];
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
    }
}

/// Block-tridiagonal matrix with dense b×b diagonal blocks. Each
/// off-diagonal block is a diagonal plus a dense last row, the shape of
/// per-group couplings closed by one conservation row.
///
/// Block row j reads `lower[j] x[j-1] + diag[j] x[j] + upper[j] x[j+1]`.
/// Factored by block LU with partial pivoting inside each diagonal block
/// and row equilibration.
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub blocks: usize,
    pub size: usize,
    pub diag: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    lower_row: Vec<f64>,
    upper_row: Vec<f64>,
}

/// Output of [`BlockTridiagonal::factor`]; reusable for many right-hand sides.
#[derive(Debug, Clone)]
pub struct BlockLu {
    blocks: usize,
    size: usize,
    scale: Vec<f64>,
    lower: Vec<f64>,
    lower_row: Vec<f64>,
    pivots: Vec<DenseLu>,
    coupling: Vec<f64>,
}

impl BlockTridiagonal {
    pub fn zeros(blocks: usize, size: usize) -> Self {
        let v = blocks * size;
        Self {
            blocks,
            size,
            diag: vec![0.0; v * size],
            lower: vec![0.0; v],
            upper: vec![0.0; v],
            lower_row: vec![0.0; v],
            upper_row: vec![0.0; v],
        }
    }

    pub fn clear(&mut self) {
        for v in [&mut self.diag, &mut self.lower, &mut self.upper, &mut self.lower_row, &mut self.upper_row] {
            v.iter_mut().for_each(|x| *x = 0.0);
        }
    }

    #[inline]
    pub fn diag_mut(&mut self, block: usize, r: usize, c: usize) -> &mut f64 {
        let b = self.size;
        &mut self.diag[block * b * b + r * b + c]
    }

    /// Diagonal entry r of the block coupling row `block` to `block - 1`.
    #[inline]
    pub fn lower_mut(&mut self, block: usize, r: usize) -> &mut f64 {
        &mut self.lower[block * self.size + r]
    }

    /// Diagonal entry r of the block coupling row `block` to `block + 1`.
    #[inline]
    pub fn upper_mut(&mut self, block: usize, r: usize) -> &mut f64 {
        &mut self.upper[block * self.size + r]
    }

    /// Last-row entry c of the lower coupling, added to any diagonal part.
    #[inline]
    pub fn lower_last_row(&mut self, block: usize, c: usize) -> &mut f64 {
        &mut self.lower_row[block * self.size + c]
    }

    /// Last-row entry c of the upper coupling, added to any diagonal part.
    #[inline]
    pub fn upper_last_row(&mut self, block: usize, c: usize) -> &mut f64 {
        &mut self.upper_row[block * self.size + c]
    }

    /// y_j += (D + e_last wᵀ) x for one coupling block.
    fn apply_coupling(d: &[f64], w: &[f64], x: &[f64], y: &mut [f64], sign: f64) {
        let b = d.len();
        for r in 0..b {
            y[r] += sign * d[r] * x[r];
        }
        y[b - 1] += sign * w.iter().zip(x).map(|(a, v)| a * v).sum::<f64>();
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let (n, b) = (self.blocks, self.size);
        let mut y = vec![0.0; n * b];
        for j in 0..n {
            let yj = &mut y[j * b..(j + 1) * b];
            let dj = &self.diag[j * b * b..(j + 1) * b * b];
            let xj = &x[j * b..(j + 1) * b];
            for r in 0..b {
                yj[r] = dj[r * b..(r + 1) * b].iter().zip(xj).map(|(a, v)| a * v).sum();
            }
            let v = j * b..(j + 1) * b;
            if j > 0 {
                Self::apply_coupling(&self.lower[v.clone()], &self.lower_row[v.clone()], &x[(j - 1) * b..j * b], yj, 1.0);
            }
            if j + 1 < n {
                Self::apply_coupling(&self.upper[v.clone()], &self.upper_row[v], &x[(j + 1) * b..(j + 2) * b], yj, 1.0);
            }
        }
        y
    }

    pub fn factor(&self) -> Result<BlockLu, LinalgError> {
        let (n, b) = (self.blocks, self.size);
        let bb = b * b;
        let mut scale = vec![1.0; n * b];
        for j in 0..n {
            for r in 0..b {
                let k = j * b + r;
                let mut m = self.diag[j * bb + r * b..j * bb + (r + 1) * b]
                    .iter()
                    .fold(0.0f64, |a, v| a.max(v.abs()))
                    .max(self.lower[k].abs())
                    .max(self.upper[k].abs());
                if r == b - 1 {
                    let row = j * b..(j + 1) * b;
                    m = self.lower_row[row.clone()]
                        .iter()
                        .chain(&self.upper_row[row])
                        .fold(m, |a, v| a.max(v.abs()));
                }
                if m > 0.0 && m.is_finite() {
                    scale[k] = 1.0 / m;
                }
            }
        }
        let mut lower = self.lower.clone();
        let mut lower_row = self.lower_row.clone();
        for j in 0..n {
            for r in 0..b {
                lower[j * b + r] *= scale[j * b + r];
            }
            for c in 0..b {
                lower_row[j * b + c] *= scale[j * b + b - 1];
            }
        }
        let mut pivots = Vec::with_capacity(n);
        let mut coupling = vec![0.0; n * bb];
        let mut work = vec![0.0; bb];
        for j in 0..n {
            for r in 0..b {
                let s = scale[j * b + r];
                for c in 0..b {
                    work[r * b + c] = self.diag[j * bb + r * b + c] * s;
                }
            }
            if j > 0 {
                // S_j = D_j - L_j X_{j-1}
                let prev = &coupling[(j - 1) * bb..j * bb];
                for r in 0..b {
                    let l = lower[j * b + r];
                    if l != 0.0 {
                        for c in 0..b {
                            work[r * b + c] -= l * prev[r * b + c];
                        }
                    }
                }
                for k in 0..b {
                    let l = lower_row[j * b + k];
                    if l != 0.0 {
                        for c in 0..b {
                            work[(b - 1) * b + c] -= l * prev[k * b + c];
                        }
                    }
                }
            }
            let lu = DenseLu::new(b, work.clone()).map_err(|e| match e {
                LinalgError::Singular { row } => LinalgError::Singular { row: j * b + row },
                other => other,
            })?;
            if j + 1 < n {
                // X_j = S_j^{-1} U_j, stored row-major.
                let x = &mut coupling[j * bb..(j + 1) * bb];
                x.iter_mut().for_each(|v| *v = 0.0);
                for r in 0..b {
                    x[r * b + r] = self.upper[j * b + r] * scale[j * b + r];
                }
                let s = scale[j * b + b - 1];
                for c in 0..b {
                    x[(b - 1) * b + c] += self.upper_row[j * b + c] * s;
                }
                lu.solve_many_in_place(x, b);
            }
            pivots.push(lu);
        }
        Ok(BlockLu { blocks: n, size: b, scale, lower, lower_row, pivots, coupling })
    }
}

impl BlockLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, LinalgError> {
        let (n, b) = (self.blocks, self.size);
        let bb = b * b;
        if rhs.len() != n * b {
            return Err(LinalgError::Dimension(format!("rhs {} vs {}", rhs.len(), n * b)));
        }
        let mut y = vec![0.0; n * b];
        let mut r = vec![0.0; b];
        for j in 0..n {
            for k in 0..b {
                r[k] = rhs[j * b + k] * self.scale[j * b + k];
            }
            if j > 0 {
                let v = j * b..(j + 1) * b;
                BlockTridiagonal::apply_coupling(&self.lower[v.clone()], &self.lower_row[v], &y[(j - 1) * b..j * b], &mut r, -1.0);
            }
            let s = self.pivots[j].solve(&r);
            y[j * b..(j + 1) * b].copy_from_slice(&s);
        }
        for j in (0..n.saturating_sub(1)).rev() {
            let x = &self.coupling[j * bb..(j + 1) * bb];
            let (head, tail) = y.split_at_mut((j + 1) * b);
            let next = &tail[..b];
            let cur = &mut head[j * b..];
            for rr in 0..b {
                let row = &x[rr * b..(rr + 1) * b];
                cur[rr] -= row.iter().zip(next).map(|(a, v)| a * v).sum::<f64>();
            }
        }
        Ok(y)
    }
}
