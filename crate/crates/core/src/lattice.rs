//! Integer lattices: Hermite and Smith normal forms, kernels, intersections,
//! quotients and class orders.

use crate::arith::{bigint_vec_json, lcm_all};
use crate::error::{Error, Result};
use crate::matrix::IntMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

/// Row-reduces `rows` to Hermite normal form on the first `pivot_cols` columns.
///
/// Row operations act on full rows, so trailing columns carry the transform.
/// Returns the reduced rows (zero rows in the pivot part are kept at the end)
/// and the pivot column of each leading row.
fn hermite_reduce(mut rows: Vec<Vec<BigInt>>, pivot_cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..pivot_cols {
        if r == rows.len() {
            break;
        }
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows.len() {
                if !rows[i][col].is_zero()
                    && best.is_none_or(|b| rows[i][col].abs() < rows[b][col].abs())
                {
                    best = Some(i);
                }
            }
            let Some(b) = best else { break };
            rows.swap(r, b);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col].is_zero() {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[r][col]);
                let (head, tail) = rows.split_at_mut(i);
                sub_multiple(&mut tail[0], &head[r], &q);
                if !tail[0][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col].is_zero() {
            continue;
        }
        if rows[r][col].is_negative() {
            for x in rows[r].iter_mut() {
                *x = -&*x;
            }
        }
        for i in 0..r {
            if rows[i][col].is_zero() {
                continue;
            }
            let q = rows[i][col].div_floor(&rows[r][col]);
            let (head, tail) = rows.split_at_mut(r);
            sub_multiple(&mut head[i], &tail[0], &q);
        }
        pivots.push(col);
        r += 1;
    }
    (rows, pivots)
}

fn sub_multiple(target: &mut [BigInt], src: &[BigInt], q: &BigInt) {
    if q.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        if !s.is_zero() {
            *t -= q * s;
        }
    }
}

/// Hermite normal form basis of the lattice spanned by `gens` (all of length `dim`).
pub fn hermite_basis(dim: usize, gens: &[Vec<BigInt>]) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    let rows: Vec<Vec<BigInt>> =
        gens.iter().filter(|g| g.iter().any(|x| !x.is_zero())).cloned().collect();
    debug_assert!(rows.iter().all(|r| r.len() == dim));
    let (mut rows, pivots) = hermite_reduce(rows, dim);
    rows.truncate(pivots.len());
    (rows, pivots)
}

/// Basis of the integer relations `c` with `sum_i c_i * gens[i] = 0`.
pub fn integer_relations(dim: usize, gens: &[Vec<BigInt>]) -> Vec<Vec<BigInt>> {
    let m = gens.len();
    let rows: Vec<Vec<BigInt>> = gens
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let mut r = g.clone();
            r.extend((0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            r
        })
        .collect();
    let (rows, pivots) = hermite_reduce(rows, dim);
    let kernel: Vec<Vec<BigInt>> = rows[pivots.len()..].iter().map(|r| r[dim..].to_vec()).collect();
    hermite_basis(m, &kernel).0
}

/// Row reduction of `rows` on the first `pivot_cols` columns, keeping all rows.
///
/// Trailing columns record the row transform when the caller augments with an identity.
pub fn hermite_with_transform(rows: Vec<Vec<BigInt>>, pivot_cols: usize) -> (Vec<Vec<BigInt>>, Vec<usize>) {
    hermite_reduce(rows, pivot_cols)
}

/// Basis of the right integer kernel `{x : m x = 0}`.
pub fn integer_kernel(m: &IntMatrix) -> Vec<Vec<BigInt>> {
    integer_relations(m.nrows(), &m.columns())
}

/// Nonzero invariant factors of `m` in divisibility order.
pub fn smith_invariants(m: &IntMatrix) -> Vec<BigInt> {
    let mut rows = m.row_vecs();
    let mut ncols = m.ncols();
    loop {
        let (r, _) = hermite_basis(ncols, &rows);
        let t = transpose_rows(&r, ncols);
        let (r2, _) = hermite_basis(r.len(), &t);
        ncols = r.len();
        rows = r2;
        let diagonal = rows
            .iter()
            .enumerate()
            .all(|(i, row)| row.iter().enumerate().all(|(j, x)| (i == j) != x.is_zero()));
        if diagonal {
            break;
        }
    }
    let mut d: Vec<BigInt> = rows.iter().enumerate().map(|(i, r)| r[i].abs()).collect();
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// Smith invariant factors padded with zeros to `min(rows, cols)` entries.
pub fn invariant_factors(m: &IntMatrix) -> Vec<BigInt> {
    let mut d = smith_invariants(m);
    let n = m.nrows().min(m.ncols());
    d.resize(n, BigInt::zero());
    d
}

fn transpose_rows(rows: &[Vec<BigInt>], ncols: usize) -> Vec<Vec<BigInt>> {
    (0..ncols).map(|j| rows.iter().map(|r| r[j].clone()).collect()).collect()
}

/// Structure of `Z^n / M Z^m` for an `n x m` matrix `M`.
pub fn coker_structure(m: &IntMatrix) -> AbelianGroup {
    let d = smith_invariants(m);
    AbelianGroup::from_invariants(m.nrows() - d.len(), d)
}

/// Finitely generated abelian group `Z^free_rank x prod Z/torsion_i`.
///
/// `torsion` lists invariant factors greater than one, each dividing the next.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    #[serde(with = "bigint_vec_json")]
    pub torsion: Vec<BigInt>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, torsion: Vec::new() }
    }

    /// Builds the group from arbitrary positive cyclic orders (unit factors dropped).
    pub fn from_invariants(free_rank: usize, factors: Vec<BigInt>) -> Self {
        let mut d: Vec<BigInt> = factors.into_iter().map(|x| x.abs()).filter(|x| !x.is_zero()).collect();
        for i in 0..d.len() {
            for j in i + 1..d.len() {
                let g = d[i].gcd(&d[j]);
                let l = d[i].lcm(&d[j]);
                d[i] = g;
                d[j] = l;
            }
        }
        d.retain(|x| !x.is_one());
        AbelianGroup { free_rank, torsion: d }
    }

    pub fn is_finite(&self) -> bool {
        self.free_rank == 0
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }

    /// Group order, `None` when infinite.
    pub fn order(&self) -> Option<BigInt> {
        self.is_finite().then(|| self.torsion.iter().product())
    }

    /// Product with another group.
    pub fn product(&self, other: &AbelianGroup) -> Self {
        let mut t = self.torsion.clone();
        t.extend(other.torsion.iter().cloned());
        AbelianGroup::from_invariants(self.free_rank + other.free_rank, t)
    }

    /// Sorted prime-power cyclic factors.
    pub fn elementary_divisors(&self) -> Vec<BigInt> {
        let mut out = Vec::new();
        for t in &self.torsion {
            for (p, e) in factorize(t) {
                out.push(p.pow(e));
            }
        }
        out.sort();
        out
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".to_string() } else { format!("Z^{}", self.free_rank) });
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" x "))
        }
    }
}

/// Prime factorization by trial division.
pub fn factorize(n: &BigInt) -> Vec<(BigInt, u32)> {
    let mut n = n.abs();
    let mut out = Vec::new();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        if e > 0 {
            out.push((p.clone(), e));
        }
        p += 1;
    }
    if n > BigInt::one() {
        out.push((n, 1));
    }
    out
}

/// A sublattice of `Z^dim` stored as a Hermite normal form basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
    pivots: Vec<usize>,
}

impl Lattice {
    pub fn from_generators(dim: usize, gens: &[Vec<BigInt>]) -> Self {
        let (basis, pivots) = hermite_basis(dim, gens);
        Lattice { dim, basis, pivots }
    }

    pub fn zero(dim: usize) -> Self {
        Lattice { dim, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn full(dim: usize) -> Self {
        Self::from_generators(dim, &unit_vectors(dim, 0..dim))
    }

    /// Span of the standard basis vectors with the given indices.
    pub fn coordinate(dim: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        Self::from_generators(dim, &unit_vectors(dim, indices))
    }

    pub fn column_span(m: &IntMatrix) -> Self {
        Self::from_generators(m.nrows(), &m.columns())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Coordinates of `v` in the Hermite basis, `None` when `v` is outside the rational span.
    pub fn rational_coordinates(&self, v: &[BigInt]) -> Option<Vec<BigRational>> {
        assert_eq!(v.len(), self.dim, "vector length does not match lattice dimension");
        let mut res: Vec<BigRational> = v.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        let mut coords = Vec::with_capacity(self.rank());
        for (b, &p) in self.basis.iter().zip(&self.pivots) {
            let c = &res[p] / BigRational::from_integer(b[p].clone());
            if !c.is_zero() {
                for (r, x) in res.iter_mut().zip(b) {
                    if !x.is_zero() {
                        *r -= &c * BigRational::from_integer(x.clone());
                    }
                }
            }
            coords.push(c);
        }
        res.iter().all(Zero::is_zero).then_some(coords)
    }

    pub fn integer_coordinates(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.rational_coordinates(v)?;
        c.iter().all(|x| x.is_integer()).then(|| c.into_iter().map(|x| x.to_integer()).collect())
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.integer_coordinates(v).is_some()
    }

    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.basis.iter().all(|b| self.contains(b))
    }

    /// Least `n > 0` with `n v` in the lattice, `None` when no multiple lies in it.
    pub fn class_order(&self, v: &[BigInt]) -> Option<BigInt> {
        let c = self.rational_coordinates(v)?;
        Some(lcm_all(c.iter().map(|x| x.denom())))
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.dim, other.dim);
        let mut g = self.basis.clone();
        g.extend(other.basis.iter().cloned());
        Lattice::from_generators(self.dim, &g)
    }

    pub fn intersect(&self, other: &Lattice) -> Lattice {
        assert_eq!(self.dim, other.dim);
        if self.rank() == 0 || other.rank() == 0 {
            return Lattice::zero(self.dim);
        }
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().map(|b| b.iter().map(|x| -x).collect::<Vec<_>>()));
        let rel = integer_relations(self.dim, &gens);
        let out: Vec<Vec<BigInt>> = rel
            .iter()
            .map(|c| {
                let mut v = vec![BigInt::zero(); self.dim];
                for (ci, b) in c.iter().zip(&self.basis) {
                    if !ci.is_zero() {
                        for (vj, bj) in v.iter_mut().zip(b) {
                            *vj += ci * bj;
                        }
                    }
                }
                v
            })
            .collect();
        Lattice::from_generators(self.dim, &out)
    }

    /// Vectors of `Z^dim` orthogonal to the lattice under the dot product.
    pub fn annihilator(&self) -> Lattice {
        if self.rank() == 0 {
            return Lattice::full(self.dim);
        }
        let cols = transpose_rows(&self.basis, self.dim);
        Lattice::from_generators(self.dim, &integer_relations(self.rank(), &cols))
    }

    /// `Q span(L) ∩ Z^dim`.
    pub fn saturation(&self) -> Lattice {
        self.annihilator().annihilator()
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation().rank() == self.rank() && self.contains_lattice(&self.saturation())
    }

    /// Index of the lattice inside its saturation.
    pub fn saturation_index(&self) -> BigInt {
        self.saturation().quotient(self).ok().and_then(|g| g.order()).unwrap_or_else(BigInt::zero)
    }

    /// The group `self / sub`. Fails when `sub` is not contained in `self`.
    pub fn quotient(&self, sub: &Lattice) -> Result<AbelianGroup> {
        let mut rows = Vec::with_capacity(sub.rank());
        for b in &sub.basis {
            rows.push(self.integer_coordinates(b).ok_or(Error::NotContained)?);
        }
        if rows.is_empty() {
            return Ok(AbelianGroup::from_invariants(self.rank(), Vec::new()));
        }
        let m = IntMatrix::from_rows(rows)?;
        let d = smith_invariants(&m);
        Ok(AbelianGroup::from_invariants(self.rank() - d.len(), d))
    }

    /// Sublattice of vectors whose coordinates vanish outside `allowed`.
    pub fn restrict_to(&self, allowed: &[bool]) -> Lattice {
        assert_eq!(allowed.len(), self.dim);
        let outside: Vec<usize> = (0..self.dim).filter(|&i| !allowed[i]).collect();
        if outside.is_empty() {
            return self.clone();
        }
        let proj: Vec<Vec<BigInt>> =
            self.basis.iter().map(|b| outside.iter().map(|&i| b[i].clone()).collect()).collect();
        let rel = integer_relations(outside.len(), &proj);
        let gens: Vec<Vec<BigInt>> = rel
            .iter()
            .map(|c| {
                let mut v = vec![BigInt::zero(); self.dim];
                for (ci, b) in c.iter().zip(&self.basis) {
                    if !ci.is_zero() {
                        for (vj, bj) in v.iter_mut().zip(b) {
                            *vj += ci * bj;
                        }
                    }
                }
                v
            })
            .collect();
        Lattice::from_generators(self.dim, &gens)
    }

    /// Applies a linear map (acting on column vectors) to every basis vector.
    pub fn image(&self, m: &IntMatrix) -> Lattice {
        let gens: Vec<Vec<BigInt>> = self.basis.iter().map(|b| m.mul_vec(b)).collect();
        Lattice::from_generators(m.nrows(), &gens)
    }
}

pub fn unit_vector(dim: usize, i: usize) -> Vec<BigInt> {
    let mut v = vec![BigInt::zero(); dim];
    v[i] = BigInt::one();
    v
}

pub fn unit_vectors(dim: usize, indices: impl IntoIterator<Item = usize>) -> Vec<Vec<BigInt>> {
    indices.into_iter().map(|i| unit_vector(dim, i)).collect()
}

/// Absolute value of an invariant factor as `u64`, for display and tests.
pub fn small(x: &BigInt) -> u64 {
    x.abs().to_u64().expect("value exceeds u64")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::to_bigints;
    use proptest::prelude::*;

    fn b(v: &[i64]) -> Vec<BigInt> {
        to_bigints(v)
    }

    #[test]
    fn smith_examples() {
        let q = IntMatrix::from_i64(&[vec![3, -1, -1], vec![-1, 3, -1], vec![-1, -1, 3]]);
        assert_eq!(invariant_factors(&q), b(&[1, 4, 4]));
        let d = IntMatrix::from_i64(&[vec![2, 0], vec![0, 3]]);
        assert_eq!(invariant_factors(&d), b(&[1, 6]));
        assert_eq!(invariant_factors(&IntMatrix::zeros(2, 2)), b(&[0, 0]));
        let r = IntMatrix::from_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        assert_eq!(invariant_factors(&r), b(&[2, 6, 12]));
    }

    #[test]
    fn coker_of_k4_polarization() {
        let q = IntMatrix::from_i64(&[vec![3, -1, -1], vec![-1, 3, -1], vec![-1, -1, 3]]);
        let g = coker_structure(&q);
        assert_eq!(g.free_rank, 0);
        assert_eq!(g.torsion, b(&[4, 4]));
        assert_eq!(g.order(), Some(BigInt::from(16)));
    }

    #[test]
    fn class_order_and_membership() {
        let l = Lattice::from_generators(3, &[b(&[1, 0, 0]), b(&[0, 4, 0]), b(&[0, 0, 4])]);
        assert_eq!(l.class_order(&b(&[5, 2, 1])), Some(BigInt::from(4)));
        assert_eq!(l.class_order(&b(&[0, 4, 8])), Some(BigInt::one()));
        let p = Lattice::from_generators(3, &[b(&[1, 0, 0])]);
        assert_eq!(p.class_order(&b(&[0, 1, 0])), None);
    }

    #[test]
    fn intersection_of_coordinate_and_diagonal() {
        let a = Lattice::from_generators(2, &[b(&[2, 0]), b(&[0, 3])]);
        let c = Lattice::from_generators(2, &[b(&[1, 1])]);
        let i = a.intersect(&c);
        assert_eq!(i.basis(), &[b(&[6, 6])]);
    }

    #[test]
    fn saturation_of_index_three() {
        let l = Lattice::from_generators(2, &[b(&[2, 1]), b(&[1, 2])]);
        assert!(!l.is_saturated());
        assert_eq!(l.saturation(), Lattice::full(2));
        assert_eq!(l.saturation_index(), BigInt::from(3));
    }

    #[test]
    fn kernel_vectors() {
        let m = IntMatrix::from_i64(&[vec![1, 2, 3], vec![2, 4, 6]]);
        let k = integer_kernel(&m);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(m.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    fn small_matrix() -> impl Strategy<Value = IntMatrix> {
        (1usize..5, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(-6i64..=6, r * c).prop_map(move |v| {
                IntMatrix::from_i64(&v.chunks(c).map(|x| x.to_vec()).collect::<Vec<_>>())
            })
        })
    }

    proptest! {
        #[test]
        fn invariants_divide_and_match_det(m in small_matrix()) {
            let d = smith_invariants(&m);
            for w in d.windows(2) {
                prop_assert!((&w[1] % &w[0]).is_zero());
            }
            if m.is_square() {
                let prod: BigInt = invariant_factors(&m).iter().product();
                prop_assert_eq!(prod, m.det().abs());
            }
        }

        #[test]
        fn intersection_is_contained_in_both(a in small_matrix(), c in small_matrix()) {
            let la = Lattice::from_generators(a.ncols(), &a.row_vecs());
            let lc = Lattice::from_generators(c.ncols(), &c.row_vecs());
            prop_assume!(la.dim() == lc.dim());
            let i = la.intersect(&lc);
            prop_assert!(la.contains_lattice(&i));
            prop_assert!(lc.contains_lattice(&i));
            for v in la.basis() {
                if lc.contains(v) {
                    prop_assert!(i.contains(v));
                }
            }
        }

        #[test]
        fn class_order_multiple_is_member(m in small_matrix(), v in proptest::collection::vec(-9i64..=9, 4)) {
            let l = Lattice::from_generators(m.ncols(), &m.row_vecs());
            let v = to_bigints(&v[..m.ncols()]);
            if let Some(n) = l.class_order(&v) {
                let nv: Vec<BigInt> = v.iter().map(|x| x * &n).collect();
                prop_assert!(l.contains(&nv));
                for k in 1..n.to_u64().unwrap_or(1).min(50) {
                    let kv: Vec<BigInt> = v.iter().map(|x| x * BigInt::from(k)).collect();
                    prop_assert!(!l.contains(&kv));
                }
            }
        }
    }
}
