//! Complex banded LU with partial pivoting, LAPACK `gbtrf` storage.

use num_complex::Complex64;

/// `n x n` matrix with `kl` sub- and `ku` super-diagonals.
///
/// Column-major band storage with `kl` extra rows on top for pivoting fill-in:
/// entry `(i, j)` lives at `data[(kl + ku + i - j) + j * ld]`, `ld = 2 kl + ku + 1`.
#[derive(Debug, Clone)]
pub struct BandedMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    data: Vec<Complex64>,
}

impl BandedMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ld = 2 * kl + ku + 1;
        Self { n, kl, ku, data: vec![Complex64::new(0.0, 0.0); ld * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn ld(&self) -> usize {
        2 * self.kl + self.ku + 1
    }

    fn in_band(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && i + self.ku >= j && j + self.kl >= i
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        self.kl + self.ku + i - j + j * self.ld()
    }

    /// Panics when `(i, j)` lies outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(self.in_band(i, j), "entry ({i}, {j}) outside band");
        let k = self.idx(i, j);
        self.data[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if self.in_band(i, j) {
            self.data[self.idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.kl);
                let hi = (i + self.ku).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// In-place factorization; returns the column where a zero pivot appeared.
    pub fn factor(mut self) -> Result<BandedLu, usize> {
        let n = self.n;
        let kl = self.kl;
        let kv = self.kl + self.ku;
        let ld = self.ld();
        let mut ipiv = vec![0usize; n];
        let mut ju = 0usize;
        let at = |r: usize, c: usize| kv + r - c + c * ld;
        for j in 0..n {
            let km = kl.min(n - 1 - j);
            let mut jp = 0;
            let mut best = self.data[at(j, j)].norm();
            for i in 1..=km {
                let v = self.data[at(j + i, j)].norm();
                if v > best {
                    best = v;
                    jp = i;
                }
            }
            ipiv[j] = j + jp;
            if best == 0.0 || !best.is_finite() {
                return Err(j);
            }
            ju = ju.max((j + self.ku + jp).min(n - 1));
            if jp != 0 {
                for c in j..=ju {
                    self.data.swap(at(j, c), at(j + jp, c));
                }
            }
            let pivot = self.data[at(j, j)];
            for i in 1..=km {
                self.data[at(j + i, j)] /= pivot;
            }
            for c in (j + 1)..=ju {
                let u = self.data[at(j, c)];
                if u == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 1..=km {
                    let l = self.data[at(j + i, j)];
                    self.data[at(j + i, c)] -= l * u;
                }
            }
        }
        Ok(BandedLu { m: self, ipiv })
    }
}

#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn n(&self) -> usize {
        self.m.n
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve(&self, b: &mut [Complex64]) {
        let n = self.m.n;
        let kl = self.m.kl;
        let kv = self.m.kl + self.m.ku;
        let ld = self.m.ld();
        let d = &self.m.data;
        let at = |r: usize, c: usize| kv + r - c + c * ld;
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == Complex64::new(0.0, 0.0) {
                continue;
            }
            for i in 1..=kl.min(n - 1 - j) {
                b[j + i] -= d[at(j + i, j)] * bj;
            }
        }
        for j in (0..n).rev() {
            b[j] /= d[at(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kv)..j {
                b[i] -= d[at(i, j)] * bj;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn solves_random_banded_systems() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(n, kl, ku) in &[(10, 1, 1), (40, 7, 5), (25, 3, 0), (30, 0, 4)] {
            let mut a = BandedMatrix::new(n, kl, ku);
            for i in 0..n {
                for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                    a.set(i, j, c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                }
            }
            let x: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let mut b = a.matvec(&x);
            a.clone().factor().unwrap().solve(&mut b);
            let err = b.iter().zip(&x).fold(0.0, |m: f64, (u, v)| m.max((u - v).norm()));
            assert!(err < 1e-9, "n={n} kl={kl} ku={ku} err={err}");
        }
    }

    #[test]
    fn pivoting_handles_zero_diagonal() {
        // [[0, 1], [1, 0]] needs a row swap
        let mut a = BandedMatrix::new(2, 1, 1);
        a.set(0, 1, c(1.0, 0.0));
        a.set(1, 0, c(1.0, 0.0));
        let mut b = vec![c(2.0, 0.0), c(3.0, 1.0)];
        a.factor().unwrap().solve(&mut b);
        assert_eq!(b, vec![c(3.0, 1.0), c(2.0, 0.0)]);
    }

    #[test]
    fn singular_matrix_reports_column() {
        let mut a = BandedMatrix::new(3, 1, 1);
        a.set(0, 0, c(1.0, 0.0));
        a.set(2, 2, c(1.0, 0.0));
        assert_eq!(a.factor().unwrap_err(), 1);
    }
}
