//! Symmetric banded matrices and a solver for a few of their lowest eigenpairs:
//! Givens band-to-tridiagonal reduction, Sturm bisection on the tridiagonal,
//! then inverse iteration on the original band for the vectors.

use super::NumericsError;

/// Symmetric matrix with `a(i, j) = 0` for `|i - j| > bandwidth`.
/// Only the lower band is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix {
    order: usize,
    bandwidth: usize,
    data: Vec<f64>,
}

impl BandedSymmetricMatrix {
    pub fn zeros(order: usize, bandwidth: usize) -> Self {
        Self {
            order,
            bandwidth,
            data: vec![0.0; order * (bandwidth + 1)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        let d = i - j;
        (d <= self.bandwidth && i < self.order).then(|| i * (self.bandwidth + 1) + d)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |k| self.data[k])
    }

    /// Sets `a(i, j)` and `a(j, i)`.
    ///
    /// # Panics
    /// If `(i, j)` lies outside the band.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside band");
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.slot(i, j).expect("entry outside band");
        self.data[k] += v;
    }

    pub fn from_dense(a: &[Vec<f64>], bandwidth: usize) -> Self {
        let n = a.len();
        let mut m = Self::zeros(n, bandwidth);
        for i in 0..n {
            for j in i.saturating_sub(bandwidth)..=i {
                m.set(i, j, a[i][j]);
            }
        }
        m
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        (0..self.order)
            .map(|i| (0..self.order).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.order;
        let b = self.bandwidth;
        let mut y = vec![0.0; n];
        for i in 0..n {
            let row = &self.data[i * (b + 1)..(i + 1) * (b + 1)];
            y[i] += row[0] * x[i];
            for d in 1..=b.min(i) {
                let j = i - d;
                y[i] += row[d] * x[j];
                y[j] += row[d] * x[i];
            }
        }
        y
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.order)
            .map(|i| {
                let lo = i.saturating_sub(self.bandwidth);
                let hi = (i + self.bandwidth).min(self.order - 1);
                (lo..=hi).map(|j| self.get(i, j).abs()).sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// `x·Ax`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.matvec(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    fn check_finite(&self) -> Result<(), NumericsError> {
        let w = self.bandwidth + 1;
        match self.data.iter().position(|v| !v.is_finite()) {
            Some(k) => Err(NumericsError::NonFiniteEntry {
                row: k / w,
                col: k / w - k % w,
            }),
            None => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    /// Unit Euclidean norm.
    pub vector: Vec<f64>,
}

/// The `count` smallest eigenpairs in ascending order.
pub fn lowest_eigenpairs(
    m: &BandedSymmetricMatrix,
    count: usize,
) -> Result<Vec<EigenPair>, NumericsError> {
    let n = m.order();
    if count > n {
        return Err(NumericsError::TooManyEigenpairs { requested: count, order: n });
    }
    m.check_finite()?;
    let (d, e) = tridiagonalize(m);
    let norm = m.norm_inf().max(f64::MIN_POSITIVE);
    let values: Vec<f64> = (0..count).map(|k| sturm_bisect(&d, &e, k)).collect();
    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    for (k, &lambda) in values.iter().enumerate() {
        let vector = inverse_iteration(m, lambda, k, &pairs, norm)?;
        pairs.push(EigenPair { value: lambda, vector });
    }
    Ok(pairs)
}

/// Working band of half-width `b + 1` to hold the bulge.
struct Work {
    n: usize,
    w: usize,
    a: Vec<f64>,
}

impl Work {
    fn idx(&self, i: usize, j: usize) -> Option<usize> {
        let (i, j) = if i >= j { (i, j) } else { (j, i) };
        (i - j <= self.w).then(|| i * (self.w + 1) + (i - j))
    }
    fn get(&self, i: usize, j: usize) -> f64 {
        self.idx(i, j).map_or(0.0, |k| self.a[k])
    }
    fn put(&mut self, i: usize, j: usize, v: f64) {
        if let Some(k) = self.idx(i, j) {
            self.a[k] = v;
        }
    }

    /// Similarity rotation in the plane `(p, p + 1)` that zeroes `a(p + 1, col)`.
    fn rotate(&mut self, p: usize, col: usize) {
        let q = p + 1;
        let x = self.get(p, col);
        let y = self.get(q, col);
        if y == 0.0 {
            return;
        }
        let r = x.hypot(y);
        let (c, s) = (x / r, y / r);
        let lo = p.saturating_sub(self.w);
        let hi = (q + self.w).min(self.n - 1);
        for l in lo..=hi {
            if l == p || l == q {
                continue;
            }
            let apl = self.get(p, l);
            let aql = self.get(q, l);
            self.put(p, l, c * apl + s * aql);
            self.put(q, l, -s * apl + c * aql);
        }
        let (app, apq, aqq) = (self.get(p, p), self.get(p, q), self.get(q, q));
        self.put(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        self.put(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        self.put(p, q, (c * c - s * s) * apq + c * s * (aqq - app));
        self.put(q, col, 0.0);
    }
}

fn tridiagonalize(m: &BandedSymmetricMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.order();
    let b = m.bandwidth();
    if b >= 2 && n > 2 {
        let w = b + 1;
        let mut work = Work { n, w, a: vec![0.0; n * (w + 1)] };
        for i in 0..n {
            for j in i.saturating_sub(b)..=i {
                work.put(i, j, m.get(i, j));
            }
        }
        for j in 0..n.saturating_sub(2) {
            for k in (2..=b).rev() {
                if j + k >= n {
                    continue;
                }
                work.rotate(j + k - 1, j);
                // chase the bulge created at (j + k + b, j + k - 1)
                let mut col = j + k - 1;
                let mut row = j + k + b;
                while row < n {
                    work.rotate(row - 1, col);
                    col = row - 1;
                    row += b;
                }
            }
        }
        let d = (0..n).map(|i| work.get(i, i)).collect();
        let e = (0..n - 1).map(|i| work.get(i + 1, i)).collect();
        (d, e)
    } else {
        let d = (0..n).map(|i| m.get(i, i)).collect();
        let e = (0..n.saturating_sub(1)).map(|i| m.get(i + 1, i)).collect();
        (d, e)
    }
}

/// Number of eigenvalues of the tridiagonal `(d, e)` below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn sturm_bisect(d: &[f64], e: &[f64], k: usize) -> f64 {
    let n = d.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - r);
        hi = hi.max(d[i] + r);
    }
    let pad = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE;
    lo -= pad;
    hi += pad;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(d, e, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// LU with partial pivoting of a general band matrix, `kl` sub- and `ku = 2 kl`
/// super-diagonals after fill.
struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    piv: Vec<usize>,
}

impl BandLu {
    fn width(&self) -> usize {
        self.kl + self.ku + 1
    }
    fn at(&self, i: usize, j: usize) -> usize {
        i * self.width() + (j + self.kl - i)
    }

    fn factor(m: &BandedSymmetricMatrix, shift: f64, tiny: f64) -> Self {
        let n = m.order();
        let kl = m.bandwidth();
        let ku = 2 * kl;
        let mut lu = BandLu { n, kl, ku, ab: vec![0.0; n * (kl + ku + 1)], piv: vec![0; n] };
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + kl).min(n - 1) {
                let k = lu.at(i, j);
                lu.ab[k] = m.get(i, j) - if i == j { shift } else { 0.0 };
            }
        }
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + ku).min(n - 1);
            let mut p = k;
            for i in k + 1..=last_row {
                if lu.ab[lu.at(i, k)].abs() > lu.ab[lu.at(p, k)].abs() {
                    p = i;
                }
            }
            lu.piv[k] = p;
            if p != k {
                for j in k..=last_col {
                    let (a, b) = (lu.at(k, j), lu.at(p, j));
                    lu.ab.swap(a, b);
                }
            }
            let kk = lu.at(k, k);
            if lu.ab[kk].abs() < tiny {
                lu.ab[kk] = if lu.ab[kk] < 0.0 { -tiny } else { tiny };
            }
            let pivot = lu.ab[kk];
            for i in k + 1..=last_row {
                let ik = lu.at(i, k);
                let l = lu.ab[ik] / pivot;
                lu.ab[ik] = l;
                if l != 0.0 {
                    for j in k + 1..=last_col {
                        let (ij, kj) = (lu.at(i, j), lu.at(k, j));
                        lu.ab[ij] -= l * lu.ab[kj];
                    }
                }
            }
        }
        lu
    }

    fn solve(&self, x: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            for i in k + 1..=(k + self.kl).min(n - 1) {
                x[i] -= self.ab[self.at(i, k)] * x[k];
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for j in k + 1..=(k + self.ku).min(n - 1) {
                s -= self.ab[self.at(k, j)] * x[j];
            }
            x[k] = s / self.ab[self.at(k, k)];
        }
    }
}

fn normalize(v: &mut [f64]) -> f64 {
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if nrm > 0.0 {
        v.iter_mut().for_each(|x| *x /= nrm);
    }
    nrm
}

fn inverse_iteration(
    m: &BandedSymmetricMatrix,
    lambda: f64,
    index: usize,
    previous: &[EigenPair],
    norm: f64,
) -> Result<Vec<f64>, NumericsError> {
    let n = m.order();
    let tiny = f64::EPSILON * norm;
    let lu = BandLu::factor(m, lambda, tiny);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((1.3 * i as f64) + index as f64).sin())
        .collect();
    normalize(&mut v);
    let residual = |v: &[f64]| {
        let mv = m.matvec(v);
        mv.iter()
            .zip(v)
            .map(|(a, b)| (a - lambda * b).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    let mut res = f64::INFINITY;
    for _ in 0..8 {
        lu.solve(&mut v);
        for pair in previous {
            let dot: f64 = pair.vector.iter().zip(&v).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(&pair.vector).for_each(|(x, y)| *x -= dot * y);
        }
        normalize(&mut v);
        res = residual(&v);
        if res <= 1e-10 * norm {
            break;
        }
    }
    if !(res <= 1e-9 * norm) {
        return Err(NumericsError::EigenNotConverged { index, residual: res });
    }
    Ok(v)
}
