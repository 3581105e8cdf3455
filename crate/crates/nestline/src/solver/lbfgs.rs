//! Two-loop recursion for limited-memory BFGS directions.

use std::collections::VecDeque;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Pair {
    s: Vec<f64>,
    y: Vec<f64>,
    inv_sy: f64,
}

pub(crate) struct LbfgsHistory {
    memory: usize,
    pairs: VecDeque<Pair>,
}

impl LbfgsHistory {
    pub fn new(memory: usize) -> Self {
        // 64 caps the stack-allocated alpha buffer in `direction`
        LbfgsHistory {
            memory: memory.clamp(1, 64),
            pairs: VecDeque::new(),
        }
    }

    pub fn clear(&mut self) {
        self.pairs.clear();
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Record a step/gradient-change pair; pairs without positive curvature
    /// are dropped to keep the implicit Hessian positive definite.
    pub fn push(&mut self, s: Vec<f64>, y: Vec<f64>) -> bool {
        let sy = dot(&s, &y);
        let ss = dot(&s, &s);
        let yy = dot(&y, &y);
        if !(sy > 1e-12 * (ss * yy).sqrt()) {
            return false;
        }
        if self.pairs.len() == self.memory {
            self.pairs.pop_front();
        }
        self.pairs.push_back(Pair {
            s,
            y,
            inv_sy: 1.0 / sy,
        });
        true
    }

    /// `out = -H grad` with H the current limited-memory approximation of
    /// the inverse Hessian (identity when the history is empty).
    pub fn direction(&self, grad: &[f64], out: &mut Vec<f64>) {
        out.clear();
        out.extend_from_slice(grad);
        let mut alphas = [0.0f64; 64];
        for (idx, pair) in self.pairs.iter().enumerate().rev() {
            let a = pair.inv_sy * dot(&pair.s, out);
            alphas[idx] = a;
            for (o, yi) in out.iter_mut().zip(&pair.y) {
                *o -= a * yi;
            }
        }
        if let Some(last) = self.pairs.back() {
            let gamma = 1.0 / (last.inv_sy * dot(&last.y, &last.y));
            for o in out.iter_mut() {
                *o *= gamma;
            }
        }
        for (idx, pair) in self.pairs.iter().enumerate() {
            let b = pair.inv_sy * dot(&pair.y, out);
            let c = alphas[idx] - b;
            for (o, si) in out.iter_mut().zip(&pair.s) {
                *o += c * si;
            }
        }
        for o in out.iter_mut() {
            *o = -*o;
        }
    }
}
