//! Banded LU factorization with partial pivoting.
//!
//! Storage follows the LAPACK `gbtrf` layout: column-major with leading
//! dimension `2*kl + ku + 1`, the first `kl` rows reserved for fill-in from
//! row interchanges.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BandError {
    #[error("matrix is singular: zero pivot in column {column}")]
    Singular { column: usize },
    #[error("right-hand side has length {got}, expected {expected}")]
    Dimension { got: usize, expected: usize },
}

#[derive(Clone, Debug)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    ld: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            ld,
            data: vec![0.0; ld * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i);
        (self.kl + self.ku + i - j) + j * self.ld
    }

    /// Adds `v` at `(i, j)`; the position must lie inside the band.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + self.ku < j || j + self.kl < i || i >= self.n || j >= self.n {
            0.0
        } else {
            self.data[self.idx(i, j)]
        }
    }

    /// `A x`, using the unfactored matrix.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, &xj) in x.iter().enumerate() {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for (i, yi) in y.iter_mut().enumerate().take(hi + 1).skip(lo) {
                *yi += self.data[self.idx(i, j)] * xj;
            }
        }
        y
    }

    /// Factorizes in place. `pivot_floor` is the absolute pivot magnitude
    /// below which the matrix is declared singular.
    pub fn factor(mut self, pivot_floor: f64) -> Result<BandLu, BandError> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let kv = ku + kl;
        let mut piv = vec![0usize; n];
        let mut ju = 0usize;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let col = j * self.ld + kv;
            // pivot search down column j
            let mut p = 0;
            let mut best = self.data[col].abs();
            for r in 1..=km {
                let v = self.data[col + r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > pivot_floor) {
                return Err(BandError::Singular { column: j });
            }
            piv[j] = j + p;
            ju = ju.max((j + ku + p).min(n - 1));
            if p != 0 {
                for c in j..=ju {
                    let a = self.idx(j, c);
                    let b = self.idx(j + p, c);
                    self.data.swap(a, b);
                }
            }
            let inv = 1.0 / self.data[col];
            for r in 1..=km {
                self.data[col + r] *= inv;
            }
            for c in (j + 1)..=ju {
                let top = self.data[self.idx(j, c)];
                if top == 0.0 {
                    continue;
                }
                let base = self.idx(j + 1, c);
                for r in 1..=km {
                    let l = self.data[col + r];
                    self.data[base + r - 1] -= l * top;
                }
            }
        }
        Ok(BandLu { m: self, piv })
    }
}

#[derive(Clone, Debug)]
pub struct BandLu {
    m: BandMatrix,
    piv: Vec<usize>,
}

impl BandLu {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>, BandError> {
        let m = &self.m;
        let n = m.n;
        if rhs.len() != n {
            return Err(BandError::Dimension {
                got: rhs.len(),
                expected: n,
            });
        }
        let mut x = rhs.to_vec();
        let kv = m.ku + m.kl;
        // L y = P b
        for j in 0..n {
            let p = self.piv[j];
            if p != j {
                x.swap(j, p);
            }
            let km = m.kl.min(n - 1 - j);
            let col = j * m.ld + kv;
            let xj = x[j];
            if xj != 0.0 {
                for r in 1..=km {
                    x[j + r] -= m.data[col + r] * xj;
                }
            }
        }
        // U x = y, U has bandwidth kl + ku
        for j in (0..n).rev() {
            let col = j * m.ld + kv;
            x[j] /= m.data[col];
            let xj = x[j];
            let lo = j.saturating_sub(kv);
            for i in lo..j {
                x[i] -= m.data[m.idx(i, j)] * xj;
            }
        }
        Ok(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
                .unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in (k + 1)..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn matches_dense_with_pivoting() {
        let (n, kl, ku) = (23, 3, 2);
        let mut band = BandMatrix::zeros(n, kl, ku);
        let mut dense = vec![vec![0.0; n]; n];
        let mut seed = 12345u64;
        let mut next = || {
            seed = seed
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((seed >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // small diagonal forces row interchanges
                let v = if i == j { 0.01 * next() } else { next() };
                band.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let ax = band.mul_vec(&b);
        let x = band.clone().factor(1e-300).unwrap().solve(&ax).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-9, "{xi} vs {bi}");
        }
        let rhs: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.7).cos()).collect();
        let xb = band.factor(1e-300).unwrap().solve(&rhs).unwrap();
        let xd = dense_solve(&mut dense, &mut rhs.clone());
        for (a, b) in xb.iter().zip(&xd) {
            assert!((a - b).abs() <= 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn singular_detected() {
        let mut band = BandMatrix::zeros(3, 1, 1);
        band.add(0, 0, 1.0);
        band.add(1, 1, 0.0);
        band.add(2, 2, 1.0);
        assert_eq!(
            band.factor(1e-14).unwrap_err(),
            BandError::Singular { column: 1 }
        );
    }

    #[test]
    fn dimension_checked() {
        let mut band = BandMatrix::zeros(2, 0, 0);
        band.add(0, 0, 2.0);
        band.add(1, 1, 4.0);
        let lu = band.factor(0.0).unwrap();
        assert_eq!(lu.solve(&[2.0, 8.0]).unwrap(), vec![1.0, 2.0]);
        assert!(lu.solve(&[1.0]).is_err());
    }
}
