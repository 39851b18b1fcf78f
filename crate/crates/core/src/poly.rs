//! Multi-index bookkeeping and Legendre expansions.
//!
//! Monomials are ordered by total degree first, then lexicographically
//! descending inside each degree, so the first `n + 1` entries are always
//! `1, x_1, ..., x_n`. Every structure that is indexed by monomials (moment
//! tables, coefficient matrices, Legendre tensor bases) uses this order.

use std::collections::HashMap;

use nalgebra::DMatrix;

/// All monomials of total degree at most `degree` in `dim` variables.
#[derive(Debug, Clone)]
pub struct MonomialSet {
    dim: usize,
    degree: usize,
    exps: Vec<Vec<u32>>,
    index: HashMap<Vec<u32>, usize>,
}

impl MonomialSet {
    pub fn new(dim: usize, degree: usize) -> Self {
        let mut exps = Vec::with_capacity(binomial(dim + degree, degree));
        for total in 0..=degree {
            let mut current = vec![0u32; dim];
            push_exact_degree(&mut exps, &mut current, 0, total as u32);
        }
        let index = exps
            .iter()
            .enumerate()
            .map(|(i, e)| (e.clone(), i))
            .collect();
        Self {
            dim,
            degree,
            exps,
            index,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.exps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn exponents(&self) -> &[Vec<u32>] {
        &self.exps
    }

    pub fn exponent(&self, i: usize) -> &[u32] {
        &self.exps[i]
    }

    pub fn index_of(&self, exp: &[u32]) -> Option<usize> {
        self.index.get(exp).copied()
    }

    /// Index of the product of monomials `a` and `b` inside `self`.
    pub fn product_index(&self, a: &[u32], b: &[u32]) -> Option<usize> {
        let sum: Vec<u32> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.index_of(&sum)
    }

    /// Values of every monomial at `point`.
    pub fn eval(&self, point: &[f64]) -> Vec<f64> {
        let powers: Vec<Vec<f64>> = point
            .iter()
            .map(|&x| {
                let mut p = Vec::with_capacity(self.degree + 1);
                let mut acc = 1.0;
                for _ in 0..=self.degree {
                    p.push(acc);
                    acc *= x;
                }
                p
            })
            .collect();
        self.exps
            .iter()
            .map(|e| {
                e.iter()
                    .enumerate()
                    .map(|(k, &p)| powers[k][p as usize])
                    .product()
            })
            .collect()
    }

    /// Matrix of `d/dxi_axis` acting on coefficient vectors over this set.
    pub fn derivative_matrix(&self, axis: usize, scale: f64) -> DMatrix<f64> {
        let n = self.len();
        let mut d = DMatrix::zeros(n, n);
        for (col, e) in self.exps.iter().enumerate() {
            if e[axis] == 0 {
                continue;
            }
            let mut lowered = e.clone();
            lowered[axis] -= 1;
            let row = self.index[&lowered];
            d[(row, col)] = e[axis] as f64 * scale;
        }
        d
    }
}

fn push_exact_degree(out: &mut Vec<Vec<u32>>, current: &mut [u32], pos: usize, remaining: u32) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        current[pos] = 0;
        return;
    }
    if current.is_empty() {
        return;
    }
    for k in (0..=remaining).rev() {
        current[pos] = k;
        push_exact_degree(out, current, pos + 1, remaining - k);
    }
    current[pos] = 0;
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Monomial coefficients of the Legendre polynomial `P_k` on `[-1, 1]`.
pub fn legendre_coefficients(k: usize) -> Vec<f64> {
    let mut prev = vec![1.0];
    if k == 0 {
        return prev;
    }
    let mut cur = vec![0.0, 1.0];
    for j in 1..k {
        // (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}
        let mut next = vec![0.0; j + 2];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += (2 * j + 1) as f64 * c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= j as f64 * c;
        }
        for c in &mut next {
            *c /= (j + 1) as f64;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// Columns hold the monomial expansion of each tensor Legendre function
/// `prod_i P_{k_i}(xi_i)`, indexed in the same graded order as `set`.
pub fn tensor_legendre_matrix(set: &MonomialSet) -> DMatrix<f64> {
    let n = set.len();
    let one_d: Vec<Vec<f64>> = (0..=set.degree()).map(legendre_coefficients).collect();
    let mut m = DMatrix::zeros(n, n);
    for (col, k) in set.exponents().iter().enumerate() {
        // Expand the product axis by axis.
        let mut terms: Vec<(Vec<u32>, f64)> = vec![(vec![0; set.dim()], 1.0)];
        for (axis, &ka) in k.iter().enumerate() {
            let coeffs = &one_d[ka as usize];
            let mut next = Vec::new();
            for (exp, c) in &terms {
                for (p, &a) in coeffs.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    let mut e = exp.clone();
                    e[axis] = p as u32;
                    next.push((e, c * a));
                }
            }
            terms = next;
        }
        for (exp, c) in terms {
            let row = set.index_of(&exp).expect("legendre term within degree");
            m[(row, col)] += c;
        }
    }
    m
}
