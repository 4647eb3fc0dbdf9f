//! Limited-memory BFGS directions over complex vectors viewed as real pairs.

use std::collections::VecDeque;

use crate::field::C64;

pub fn dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

#[derive(Debug, Clone)]
pub struct Lbfgs {
    m: usize,
    pairs: VecDeque<(Vec<C64>, Vec<C64>, f64)>,
}

impl Lbfgs {
    pub fn new(m: usize) -> Self {
        Lbfgs { m, pairs: VecDeque::with_capacity(m) }
    }

    pub fn reset(&mut self) {
        self.pairs.clear();
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores (s, y) if the curvature condition holds; returns whether it was kept.
    pub fn push(&mut self, s: Vec<C64>, y: Vec<C64>) -> bool {
        let sy = dot(&s, &y);
        if !(sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt()) {
            return false;
        }
        if self.pairs.len() == self.m {
            self.pairs.pop_front();
        }
        self.pairs.push_back((s, y, 1.0 / sy));
        true
    }

    /// −H g by the two-loop recursion with initial inverse Hessian `h0`.
    pub fn direction(&self, g: &[C64], h0: impl Fn(&[C64]) -> Vec<C64>) -> Vec<C64> {
        let mut q = g.to_vec();
        let mut alphas = Vec::with_capacity(self.pairs.len());
        for (s, y, rho) in self.pairs.iter().rev() {
            let a = rho * dot(s, &q);
            for (qi, yi) in q.iter_mut().zip(y) {
                *qi -= yi * a;
            }
            alphas.push(a);
        }
        let mut r = h0(&q);
        for ((s, y, rho), a) in self.pairs.iter().zip(alphas.into_iter().rev()) {
            let b = rho * dot(y, &r);
            for (ri, si) in r.iter_mut().zip(s) {
                *ri += si * (a - b);
            }
        }
        r.iter().map(|v| -v).collect()
    }
}
