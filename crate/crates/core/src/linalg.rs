//! Symmetric tridiagonal systems bordered by one dense row and column.

use crate::field::C64;

/// [T b; bᵀ d] with T symmetric tridiagonal (complex symmetric, not Hermitian).
#[derive(Debug, Clone, PartialEq)]
pub struct BorderedTridiag {
    pub diag: Vec<C64>,
    pub off: Vec<C64>,
    pub border: Vec<C64>,
    pub corner: C64,
}

#[derive(Debug, Clone)]
pub struct BorderedFactor {
    off: Vec<C64>,
    border: Vec<C64>,
    upper: Vec<C64>,
    pivots: Vec<C64>,
    inv_pivots: Vec<C64>,
    tb: Vec<C64>,
    schur: C64,
}

impl BorderedTridiag {
    pub fn zeros(n: usize) -> Self {
        let z = C64::new(0.0, 0.0);
        BorderedTridiag { diag: vec![z; n], off: vec![z; n - 1], border: vec![z; n], corner: z }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// a·self + b·other, entrywise.
    pub fn lin_comb(&self, a: C64, other: &BorderedTridiag, b: C64) -> Self {
        let zip = |x: &[C64], y: &[C64]| x.iter().zip(y).map(|(&p, &q)| a * p + b * q).collect();
        BorderedTridiag {
            diag: zip(&self.diag, &other.diag),
            off: zip(&self.off, &other.off),
            border: zip(&self.border, &other.border),
            corner: a * self.corner + b * other.corner,
        }
    }

    /// y = A x for x = (f, c) packed as n+1 entries.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let n = self.len();
        let c = x[n];
        let mut y = vec![C64::new(0.0, 0.0); n + 1];
        let mut last = self.corner * c;
        for i in 0..n {
            let mut v = self.diag[i] * x[i] + self.border[i] * c;
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
            last += self.border[i] * x[i];
        }
        y[n] = last;
        y
    }

    /// Unconjugated bilinear xᵀ A y.
    pub fn bilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(&a, &b)| a * b).sum()
    }

    /// Hermitian pairing x* A y for real-valued matrices.
    pub fn sesquilinear(&self, x: &[C64], y: &[C64]) -> C64 {
        let ay = self.apply(y);
        x.iter().zip(&ay).map(|(&a, &b)| a.conj() * b).sum()
    }

    pub fn factor(&self) -> BorderedFactor {
        let n = self.len();
        let mut upper = vec![C64::new(0.0, 0.0); n];
        let mut pivots = vec![C64::new(0.0, 0.0); n];
        pivots[0] = self.diag[0];
        for i in 1..n {
            upper[i - 1] = self.off[i - 1] / pivots[i - 1];
            pivots[i] = self.diag[i] - self.off[i - 1] * upper[i - 1];
        }
        let inv_pivots = pivots.iter().map(|p| p.inv()).collect();
        let mut f = BorderedFactor {
            inv_pivots,
            off: self.off.clone(),
            border: self.border.clone(),
            upper,
            pivots,
            tb: Vec::new(),
            schur: C64::new(0.0, 0.0),
        };
        let tb = f.solve_tridiag(&self.border);
        let btb: C64 = self.border.iter().zip(&tb).map(|(&a, &b)| a * b).sum();
        f.schur = self.corner - btb;
        f.tb = tb;
        f
    }
}

impl BorderedFactor {
    fn solve_tridiag(&self, r: &[C64]) -> Vec<C64> {
        let n = self.pivots.len();
        let mut x = vec![C64::new(0.0, 0.0); n];
        x[0] = r[0] * self.inv_pivots[0];
        for i in 1..n {
            x[i] = (r[i] - self.off[i - 1] * x[i - 1]) * self.inv_pivots[i];
        }
        for i in (0..n - 1).rev() {
            let next = x[i + 1];
            x[i] -= self.upper[i] * next;
        }
        x
    }

    pub fn solve(&self, rhs: &[C64]) -> Vec<C64> {
        let n = self.pivots.len();
        let z = self.solve_tridiag(&rhs[..n]);
        let bz: C64 = self.border.iter().zip(&z).map(|(&a, &b)| a * b).sum();
        let y = (rhs[n] - bz) / self.schur;
        let mut x: Vec<C64> = z.iter().zip(&self.tb).map(|(&zi, &ti)| zi - ti * y).collect();
        x.push(y);
        x
    }

    /// True when the (real) matrix is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.pivots.iter().all(|p| p.re > 0.0 && p.im == 0.0) && self.schur.re > 0.0 && self.schur.im == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_inverts_apply() {
        let n = 40;
        let mut a = BorderedTridiag::zeros(n);
        for i in 0..n {
            a.diag[i] = C64::new(4.0 + i as f64 * 0.1, 0.5);
            a.border[i] = C64::new(0.3 / (1.0 + i as f64), -0.1);
        }
        for i in 0..n - 1 {
            a.off[i] = C64::new(-1.0, 0.2);
        }
        a.corner = C64::new(7.0, 1.0);
        let x: Vec<C64> = (0..=n).map(|i| C64::new((i as f64).sin(), (i as f64).cos())).collect();
        let b = a.apply(&x);
        let y = a.factor().solve(&b);
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).norm() < 1e-12);
        }
    }
}
