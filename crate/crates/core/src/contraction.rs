//! Index contraction for traces over two copies of an operator.
//!
//! `Tr(U^{(x)2} P U^{dagger (x)2} Q)` for system permutations `P`, `Q` is a
//! closed network of four tensors (two copies of `U`, two of `U^dagger`)
//! whose legs are wired by the permutations. The network is contracted
//! pairwise, so the `D^2 x D^2` matrix `U (x) U` is never formed.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::tensor::{strides, validate_permutation, MultipartiteOperator, C64};

type Label = usize;

/// Dense row-major tensor with one label per axis.
#[derive(Clone, Debug)]
struct LabeledTensor {
    data: Vec<C64>,
    labels: Vec<Label>,
    dims: Vec<usize>,
}

impl LabeledTensor {
    /// Axes `[out_0 .. out_{n-1}, in_0 .. in_{n-1}]` of `op`, or of its
    /// adjoint when `adjoint` is set.
    fn from_operator(
        op: &MultipartiteOperator,
        out_labels: Vec<Label>,
        in_labels: Vec<Label>,
        adjoint: bool,
    ) -> Self {
        let m = op.matrix();
        let total = op.total_dim();
        let mut data = Vec::with_capacity(total * total);
        for r in 0..total {
            for c in 0..total {
                data.push(if adjoint { m[(c, r)].conj() } else { m[(r, c)] });
            }
        }
        let mut dims = op.dims().to_vec();
        dims.extend_from_slice(op.dims());
        let mut labels = out_labels;
        labels.extend(in_labels);
        Self { data, labels, dims }
    }

    fn size(&self) -> usize {
        self.data.len()
    }

    fn permute_axes(&self, order: &[usize]) -> Self {
        if order.iter().enumerate().all(|(i, &o)| i == o) {
            return self.clone();
        }
        let old_strides = strides(&self.dims);
        let dims: Vec<usize> = order.iter().map(|&o| self.dims[o]).collect();
        let labels: Vec<Label> = order.iter().map(|&o| self.labels[o]).collect();
        let step: Vec<usize> = order.iter().map(|&o| old_strides[o]).collect();
        let n = dims.len();
        let mut data = Vec::with_capacity(self.data.len());
        let mut idx = vec![0usize; n];
        let mut offset = 0usize;
        for _ in 0..self.data.len() {
            data.push(self.data[offset]);
            for k in (0..n).rev() {
                idx[k] += 1;
                offset += step[k];
                if idx[k] < dims[k] {
                    break;
                }
                offset -= step[k] * dims[k];
                idx[k] = 0;
            }
        }
        Self { data, labels, dims }
    }

    fn shared_with(&self, other: &Self) -> Vec<Label> {
        self.labels
            .iter()
            .copied()
            .filter(|l| other.labels.contains(l))
            .collect()
    }

    fn result_size(&self, other: &Self) -> usize {
        let shared = self.shared_with(other);
        let free = |t: &Self| -> usize {
            t.labels
                .iter()
                .zip(&t.dims)
                .filter(|(l, _)| !shared.contains(l))
                .map(|(_, d)| *d)
                .product()
        };
        free(self) * free(other)
    }

    /// Sums over every label the two tensors share.
    fn contract(&self, other: &Self) -> Result<Self> {
        let shared = self.shared_with(other);
        let axis_of = |t: &Self, l: Label| t.labels.iter().position(|&x| x == l).unwrap();
        for &l in &shared {
            if self.dims[axis_of(self, l)] != other.dims[axis_of(other, l)] {
                return Err(Error::DimensionMismatch(format!(
                    "label {l} joins legs of different dimension"
                )));
            }
        }
        let a_free: Vec<usize> = (0..self.labels.len())
            .filter(|&i| !shared.contains(&self.labels[i]))
            .collect();
        let b_free: Vec<usize> = (0..other.labels.len())
            .filter(|&i| !shared.contains(&other.labels[i]))
            .collect();
        let a_order: Vec<usize> = a_free
            .iter()
            .copied()
            .chain(shared.iter().map(|&l| axis_of(self, l)))
            .collect();
        let b_order: Vec<usize> = shared
            .iter()
            .map(|&l| axis_of(other, l))
            .chain(b_free.iter().copied())
            .collect();
        let a = self.permute_axes(&a_order);
        let b = other.permute_axes(&b_order);
        let rows: usize = a_free.iter().map(|&i| self.dims[i]).product();
        let inner: usize = shared
            .iter()
            .map(|&l| self.dims[axis_of(self, l)])
            .product();
        let cols: usize = b_free.iter().map(|&i| other.dims[i]).product();
        let am = DMatrix::from_row_slice(rows, inner, &a.data);
        let bm = DMatrix::from_row_slice(inner, cols, &b.data);
        let cm = am * bm;
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(cm[(r, c)]);
            }
        }
        let mut labels: Vec<Label> = a_free.iter().map(|&i| self.labels[i]).collect();
        labels.extend(b_free.iter().map(|&i| other.labels[i]));
        let mut dims: Vec<usize> = a_free.iter().map(|&i| self.dims[i]).collect();
        dims.extend(b_free.iter().map(|&i| other.dims[i]));
        Ok(Self { data, labels, dims })
    }
}

/// Contracts a closed network greedily: at each step the pair sharing the
/// most labels goes first, ties broken by the smaller intermediate.
fn contract_network(mut tensors: Vec<LabeledTensor>) -> Result<C64> {
    while tensors.len() > 1 {
        let mut best: Option<(usize, usize, usize, usize)> = None;
        for i in 0..tensors.len() {
            for j in i + 1..tensors.len() {
                let shared = tensors[i].shared_with(&tensors[j]).len();
                let size = tensors[i].result_size(&tensors[j]);
                let better = match best {
                    None => true,
                    Some((_, _, s, z)) => shared > s || (shared == s && size < z),
                };
                if better {
                    best = Some((i, j, shared, size));
                }
            }
        }
        let (i, j, _, _) = best.expect("at least two tensors");
        let b = tensors.remove(j);
        let a = tensors.remove(i);
        tensors.push(a.contract(&b)?);
    }
    let last = tensors
        .pop()
        .ok_or_else(|| Error::InvalidArgument("empty tensor network".into()))?;
    if !last.labels.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "network is not closed: open labels {:?}",
            last.labels
        )));
    }
    debug_assert_eq!(last.size(), 1);
    Ok(last.data[0])
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// `Tr(U^{(x)2} P U^{dagger (x)2} Q)`.
///
/// `p` and `q` permute the `2n` systems of two copies of the register of `u`
/// (copy one occupies positions `0..n`); `p[k]` is the new position of system
/// `k`, matching [`crate::tensor::permute_systems`].
pub fn doubled_trace(u: &MultipartiteOperator, p: &[usize], q: &[usize]) -> Result<C64> {
    let n = u.num_systems();
    validate_permutation(p, 2 * n)?;
    validate_permutation(q, 2 * n)?;
    let slot_dim = |s: usize| u.dims()[s % n];
    for perm in [p, q] {
        for (k, &t) in perm.iter().enumerate() {
            if slot_dim(k) != slot_dim(t) {
                return Err(Error::InvalidPermutation(format!(
                    "{perm:?} moves a system of dimension {} onto one of dimension {}",
                    slot_dim(k),
                    slot_dim(t)
                )));
            }
        }
    }
    let x_label = |s: usize| s;
    let y_label = |s: usize| 2 * n + s;
    let p_inv = inverse(p);
    let q_inv = inverse(q);

    let mut tensors = Vec::with_capacity(4);
    for copy in 0..2 {
        let slots: Vec<usize> = (copy * n..(copy + 1) * n).collect();
        // (U P)[x, y] = U[x, P y] with (P y)_s = y_{p^{-1}(s)}
        tensors.push(LabeledTensor::from_operator(
            u,
            slots.iter().map(|&s| x_label(s)).collect(),
            slots.iter().map(|&s| y_label(p_inv[s])).collect(),
            false,
        ));
        tensors.push(LabeledTensor::from_operator(
            u,
            slots.iter().map(|&s| y_label(s)).collect(),
            slots.iter().map(|&s| x_label(q_inv[s])).collect(),
            true,
        ));
    }
    contract_network(tensors)
}

/// Permutation of two register copies exchanging the listed systems of copy
/// one with the same systems of copy two.
pub fn swap_copies(n: usize, systems: &[usize]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..2 * n).collect();
    for &s in systems {
        perm.swap(s, n + s);
    }
    perm
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{haar_unitary, seeded};
    use crate::tensor::{c64, kron, permutation_operator};

    fn scalar(z: f64) -> C64 {
        c64(z, 0.0)
    }

    /// Oracle: materialize `U (x) U` and the permutation matrices.
    fn dense_trace(u: &MultipartiteOperator, p: &[usize], q: &[usize]) -> C64 {
        let mut dims = u.dims().to_vec();
        dims.extend_from_slice(u.dims());
        let uu = kron(u, u);
        let pp = permutation_operator(&dims, p).unwrap();
        let qq = permutation_operator(&dims, q).unwrap();
        MultipartiteOperator::chain([&uu, &pp, &uu.adjoint(), &qq])
            .unwrap()
            .trace()
    }

    #[test]
    fn matches_dense_oracle_for_swaps() {
        let mut rng = seeded(17);
        for d in [2, 3] {
            let u = haar_unitary(&[d, d], &mut rng).unwrap();
            let s13 = swap_copies(2, &[0]);
            let s24 = swap_copies(2, &[1]);
            for (p, q) in [(&s13, &s13), (&s24, &s13), (&s13, &s24)] {
                let fast = doubled_trace(&u, p, q).unwrap();
                let slow = dense_trace(&u, p, q);
                assert!((fast - slow).norm() < 1e-10, "d={d}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn matches_dense_oracle_for_cyclic_permutations() {
        let mut rng = seeded(18);
        let u = haar_unitary(&[2, 2], &mut rng).unwrap();
        let p = [1, 2, 3, 0];
        let q = [2, 0, 3, 1];
        let fast = doubled_trace(&u, &p, &q).unwrap();
        let slow = dense_trace(&u, &p, &q);
        assert!((fast - slow).norm() < 1e-10);
    }

    #[test]
    fn unequal_dims_respected() {
        let mut rng = seeded(19);
        let u = haar_unitary(&[2, 3], &mut rng).unwrap();
        let s13 = swap_copies(2, &[0]);
        let s24 = swap_copies(2, &[1]);
        let fast = doubled_trace(&u, &s24, &s13).unwrap();
        let slow = dense_trace(&u, &s24, &s13);
        assert!((fast - slow).norm() < 1e-10);
        assert!(doubled_trace(&u, &[1, 0, 2, 3], &s13).is_err());
    }

    #[test]
    fn identity_traces_count_cycles() {
        // Tr(P) for a permutation of 2n d-dimensional systems is d^{#cycles}
        let id = MultipartiteOperator::identity(&[3, 3]).unwrap();
        let s13 = swap_copies(2, &[0]);
        let t = doubled_trace(&id, &s13, &s13).unwrap();
        assert_eq!(t, scalar(81.0));
        let t = doubled_trace(&id, &swap_copies(2, &[1]), &s13).unwrap();
        assert_eq!(t, scalar(9.0));
    }

    #[test]
    fn four_system_register() {
        let mut rng = seeded(20);
        let u = haar_unitary(&[2, 2, 2, 2], &mut rng).unwrap();
        let a = swap_copies(4, &[0, 1]);
        let b = swap_copies(4, &[2, 3]);
        let fast = doubled_trace(&u, &b, &a).unwrap();
        let slow = dense_trace(&u, &b, &a);
        assert!((fast - slow).norm() < 1e-9);
    }
}
