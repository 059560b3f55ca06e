//! Systems of `m` F_q-affine hyperplanes of `F_{q^m}` in general position.
//!
//! Given an `F_q`-basis `β_1..β_m` and constants `c_1..c_m`, hyperplane `A_j`
//! is the set of elements whose `j`-th coordinate equals `c_j`; the avoiding
//! set `S_c^*` is the complement of their union and has exactly `(q−1)^m`
//! elements. The default basis is the power basis `{1, x, …, x^{m−1}}`, where
//! coordinate extraction is free; arbitrary independent bases go through a
//! precomputed inverse change-of-basis matrix over `F_q`.

use crate::finitefield::{FieldContext, FieldElement};
use crate::{Error, Result};

/// An immutable hyperplane system. Enumeration is lexicographic over
/// coordinate vectors (first coordinate most significant), which makes
/// first-coordinate blocks a perfect partition for parallel scans.
#[derive(Debug, Clone)]
pub struct HyperplaneSystem {
    basis: Vec<FieldElement>,
    constants: Vec<u32>,
    /// Row-major m×m inverse of the matrix whose columns are the basis
    /// vectors in power-basis coordinates. `None` for the power basis.
    inv_matrix: Option<Vec<Vec<u32>>>,
}

/// Build a system from an optional basis (default: power basis) and the
/// constants vector. The basis must be `F_q`-linearly independent.
pub fn build_system(
    ctx: &FieldContext,
    basis: Option<Vec<FieldElement>>,
    constants: Vec<u32>,
) -> Result<HyperplaneSystem> {
    let m = ctx.m() as usize;
    if constants.len() != m {
        return Err(Error::invalid(format!(
            "expected {m} constants, got {}",
            constants.len()
        )));
    }
    if constants.iter().any(|&c| c as u64 >= ctx.q()) {
        return Err(Error::invalid("hyperplane constant out of range for F_q"));
    }
    match basis {
        None => Ok(HyperplaneSystem {
            basis: (0..m)
                .map(|j| {
                    let mut coeffs = vec![0u32; m];
                    coeffs[j] = 1;
                    ctx.element_from_coeffs(coeffs).unwrap()
                })
                .collect(),
            constants,
            inv_matrix: None,
        }),
        Some(basis) => {
            if basis.len() != m {
                return Err(Error::invalid(format!(
                    "expected {m} basis elements, got {}",
                    basis.len()
                )));
            }
            let inv = invert_basis_matrix(ctx, &basis)?;
            Ok(HyperplaneSystem {
                basis,
                constants,
                inv_matrix: Some(inv),
            })
        }
    }
}

/// Gauss–Jordan inversion over `F_q` of the matrix with basis columns.
/// A singular matrix is rejected with its rank in the diagnostic.
fn invert_basis_matrix(ctx: &FieldContext, basis: &[FieldElement]) -> Result<Vec<Vec<u32>>> {
    let m = ctx.m() as usize;
    let f = ctx.base();
    // augmented [M | I], M[i][j] = coefficient i of basis element j
    let mut a = vec![vec![0u32; 2 * m]; m];
    for (j, b) in basis.iter().enumerate() {
        for i in 0..m {
            a[i][j] = b.coeffs()[i];
        }
    }
    for i in 0..m {
        a[i][m + i] = 1;
    }
    let mut rank = 0usize;
    for col in 0..m {
        let Some(piv) = (rank..m).find(|&r| a[r][col] != 0) else {
            continue;
        };
        a.swap(rank, piv);
        let inv = f.inv(a[rank][col]).unwrap();
        for x in a[rank].iter_mut() {
            *x = f.mul(*x, inv);
        }
        for r in 0..m {
            if r != rank && a[r][col] != 0 {
                let factor = a[r][col];
                for c in 0..2 * m {
                    let t = f.mul(factor, a[rank][c]);
                    a[r][c] = f.sub(a[r][c], t);
                }
            }
        }
        rank += 1;
    }
    if rank != m {
        return Err(Error::invalid(format!(
            "basis is F_q-linearly dependent: rank {rank} < {m}"
        )));
    }
    Ok(a.into_iter().map(|row| row[m..].to_vec()).collect())
}

impl HyperplaneSystem {
    pub fn basis(&self) -> &[FieldElement] {
        &self.basis
    }

    pub fn constants(&self) -> &[u32] {
        &self.constants
    }

    pub fn is_power_basis(&self) -> bool {
        self.inv_matrix.is_none()
    }

    /// The unique `(a_1, …, a_m)` with `a = Σ a_i β_i`.
    pub fn coordinates(&self, ctx: &FieldContext, a: &FieldElement) -> Vec<u32> {
        match &self.inv_matrix {
            None => a.coeffs().to_vec(),
            Some(inv) => {
                let f = ctx.base();
                let mut out = vec![0u32; inv.len()];
                for (i, row) in inv.iter().enumerate() {
                    let mut acc = 0u32;
                    for (j, &coef) in row.iter().enumerate() {
                        acc = f.add(acc, f.mul(coef, a.coeffs()[j]));
                    }
                    out[i] = acc;
                }
                out
            }
        }
    }

    /// `a ∈ A_j` (0-based `j`): coordinate `j` equals `c_j`.
    pub fn in_hyperplane(&self, ctx: &FieldContext, a: &FieldElement, j: usize) -> bool {
        self.coordinates(ctx, a)[j] == self.constants[j]
    }

    /// `a ∈ S_c^*`: every coordinate differs from its constant.
    pub fn in_avoiding_set(&self, ctx: &FieldContext, a: &FieldElement) -> bool {
        self.coordinates(ctx, a)
            .iter()
            .zip(&self.constants)
            .all(|(c, k)| c != k)
    }

    /// `|S_c^*| = (q−1)^m`.
    pub fn avoiding_count(&self, ctx: &FieldContext) -> u64 {
        (ctx.q() - 1).pow(ctx.m())
    }

    /// Admissible values of coordinate `j`, ascending (everything but `c_j`).
    fn admissible(&self, ctx: &FieldContext, j: usize) -> Vec<u32> {
        (0..ctx.q() as u32)
            .filter(|&v| v != self.constants[j])
            .collect()
    }

    /// Enumerate `S_c^*` in lexicographic coordinate order, directly over the
    /// admissible coordinate vectors; the full field is never filtered.
    pub fn avoiding_iter<'a>(&'a self, ctx: &'a FieldContext) -> AvoidingIter<'a> {
        let all = self.admissible(ctx, 0);
        self.avoiding_iter_block(ctx, &all)
    }

    /// Enumerate the sub-block of `S_c^*` whose first coordinate lies in
    /// `first_values` (which must be admissible, ascending). Blocks over a
    /// partition of the first coordinate are disjoint and cover `S_c^*`.
    pub fn avoiding_iter_block<'a>(
        &'a self,
        ctx: &'a FieldContext,
        first_values: &[u32],
    ) -> AvoidingIter<'a> {
        let m = ctx.m() as usize;
        let mut columns = Vec::with_capacity(m);
        columns.push(first_values.to_vec());
        for j in 1..m {
            columns.push(self.admissible(ctx, j));
        }
        AvoidingIter::new(ctx, self, columns)
    }

    /// Enumerate the hyperplane `A_j` itself (`q^{m−1}` elements): coordinate
    /// `j` pinned to `c_j`, all others free.
    pub fn hyperplane_iter<'a>(&'a self, ctx: &'a FieldContext, j: usize) -> AvoidingIter<'a> {
        let m = ctx.m() as usize;
        let mut columns: Vec<Vec<u32>> = Vec::with_capacity(m);
        for pos in 0..m {
            if pos == j {
                columns.push(vec![self.constants[j]]);
            } else {
                columns.push((0..ctx.q() as u32).collect());
            }
        }
        AvoidingIter::new(ctx, self, columns)
    }
}

/// Odometer over per-coordinate value columns, assembling `Σ a_i β_i`
/// through prefix sums so each step costs O(changed suffix).
pub struct AvoidingIter<'a> {
    ctx: &'a FieldContext,
    sys: &'a HyperplaneSystem,
    columns: Vec<Vec<u32>>,
    state: Vec<usize>,
    /// prefix[d] = Σ_{i<d} a_i β_i
    prefix: Vec<FieldElement>,
    started: bool,
    exhausted: bool,
}

impl<'a> AvoidingIter<'a> {
    fn new(ctx: &'a FieldContext, sys: &'a HyperplaneSystem, columns: Vec<Vec<u32>>) -> Self {
        let m = columns.len();
        let exhausted = columns.iter().any(|c| c.is_empty());
        AvoidingIter {
            ctx,
            sys,
            columns,
            state: vec![0; m],
            prefix: vec![ctx.zero(); m + 1],
            started: false,
            exhausted,
        }
    }

    fn rebuild_from(&mut self, depth: usize) {
        for d in depth..self.columns.len() {
            let val = self.columns[d][self.state[d]];
            let term = if self.sys.is_power_basis() {
                let mut coeffs = vec![0u32; self.columns.len()];
                coeffs[d] = val;
                self.ctx.element_from_coeffs(coeffs).unwrap()
            } else {
                self.ctx.mul_base(&self.sys.basis[d], val)
            };
            self.prefix[d + 1] = self.ctx.add(&self.prefix[d], &term);
        }
    }

    /// Coordinates of the current element (valid after `next`).
    pub fn current_coordinates(&self) -> Vec<u32> {
        self.state
            .iter()
            .zip(&self.columns)
            .map(|(&i, col)| col[i])
            .collect()
    }
}

impl Iterator for AvoidingIter<'_> {
    type Item = FieldElement;

    fn next(&mut self) -> Option<FieldElement> {
        if self.exhausted {
            return None;
        }
        let m = self.columns.len();
        if !self.started {
            self.started = true;
            self.rebuild_from(0);
            return Some(self.prefix[m].clone());
        }
        // advance odometer, last coordinate fastest
        let mut d = m;
        loop {
            if d == 0 {
                self.exhausted = true;
                return None;
            }
            d -= 1;
            if self.state[d] + 1 < self.columns[d].len() {
                self.state[d] += 1;
                for s in self.state.iter_mut().skip(d + 1) {
                    *s = 0;
                }
                break;
            }
        }
        self.rebuild_from(d);
        Some(self.prefix[m].clone())
    }
}

/// For every subset `J ⊆ {1..m}` (bitmask over coordinates), the number of
/// field elements lying in `⋂_{j∈J} A_j`; in general position this equals
/// `q^{m−|J|}`. Exhaustive over the field, so test-scale inputs only.
pub fn subset_intersection_counts(ctx: &FieldContext, sys: &HyperplaneSystem) -> Vec<u64> {
    let m = ctx.m() as usize;
    let mut hist = vec![0u64; 1 << m];
    for a in ctx.elements() {
        let coords = sys.coordinates(ctx, &a);
        let mut mask = 0usize;
        for (j, (&c, &k)) in coords.iter().zip(sys.constants()).enumerate() {
            if c == k {
                mask |= 1 << j;
            }
        }
        hist[mask] += 1;
    }
    // superset sums: counts[J] = Σ_{mask ⊇ J} hist[mask]
    let mut counts = hist;
    for j in 0..m {
        for mask in 0..counts.len() {
            if mask & (1 << j) == 0 {
                counts[mask] += counts[mask | (1 << j)];
            }
        }
    }
    counts
}
