//! The symplectic lattice `H` of a tropical curve: homology basis, the
//! polarization `Q`, the monodromy `δ`, Dehn twist actions and saturations.

use crate::error::{Error, Result};
use crate::graph::{natural_cmp, TropicalCurve};
use crate::lattice::{unit_vector, Lattice};
use crate::matrix::IntMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};

/// Human-readable statement of the twist convention.
pub const TWIST_CONVENTION: &str = "T_l(h) = h + c * i(h, l) * l, so the multitwist is [[I,0],[Q,I]]";

/// Which spanning tree and cycle order determine a homology basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisRef {
    pub tree: Vec<String>,
    pub cycle_order: Vec<String>,
}

/// Symplectic basis `α_1..α_g, β_1..β_g` of `H` attached to a spanning tree.
///
/// Slots `0..h` are cycle slots: `α_i` is the fundamental cycle of the
/// non-tree edge `e_i` (coefficient +1 on `e_i`) and `β_i` the class of the
/// loop around `e_i`. Slots `h..g` are weight slots, one per unit of vertex
/// weight, in vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyBasis {
    pub genus: usize,
    pub graph_genus: usize,
    /// Edge indices of the spanning tree.
    pub tree: Vec<usize>,
    /// Non-tree edge index for each cycle slot.
    pub cycle_edges: Vec<usize>,
    /// Signed edge vector of each fundamental cycle.
    pub cycles: Vec<Vec<i64>>,
    /// Vertex index owning each weight slot.
    pub weight_slots: Vec<usize>,
    /// Sign `s` in `T_l(h) = h + s * c * i(h, l) * l`.
    pub twist_sign: i8,
    edge_ids: Vec<String>,
    vertex_ids: Vec<String>,
}

impl HomologyBasis {
    /// Basis from the greedy spanning tree: edges are scanned in id order and
    /// kept when they join two components.
    pub fn new(curve: &TropicalCurve) -> Result<Self> {
        let mut comp: Vec<usize> = (0..curve.num_vertices()).collect();
        fn root(c: &[usize], mut x: usize) -> usize {
            while c[x] != x {
                x = c[x];
            }
            x
        }
        let mut tree = Vec::new();
        for (i, e) in curve.edges().iter().enumerate() {
            let (a, b) = (root(&comp, e.tail), root(&comp, e.head));
            if a != b {
                comp[a.max(b)] = a.min(b);
                tree.push(i);
            }
        }
        Self::with_tree(curve, &tree, None)
    }

    /// Basis for a given spanning tree; non-tree edges ordered by `order` or by id.
    pub fn with_tree(curve: &TropicalCurve, tree: &[usize], order: Option<&[usize]>) -> Result<Self> {
        let g = curve.genus();
        if g < 2 {
            return Err(Error::GenusTooSmall(g));
        }
        let n = curve.num_vertices();
        let mut tree: Vec<usize> = tree.to_vec();
        tree.sort();
        tree.dedup();
        if tree.len() + 1 != n || tree.iter().any(|&t| t >= curve.num_edges()) {
            return Err(Error::InvalidTree("wrong number of edges".into()));
        }
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for &t in &tree {
            let e = &curve.edges()[t];
            adj[e.tail].push((e.head, t));
            adj[e.head].push((e.tail, t));
        }
        // Parent pointers from vertex 0.
        let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &(u, t) in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some((v, t));
                    queue.push_back(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::InvalidTree("edges do not span".into()));
        }
        let non_tree: Vec<usize> = match order {
            Some(o) => {
                let mut sorted = o.to_vec();
                sorted.sort();
                let expected: Vec<usize> = (0..curve.num_edges()).filter(|i| !tree.contains(i)).collect();
                if sorted != expected {
                    return Err(Error::InvalidTree("cycle order must list exactly the non-tree edges".into()));
                }
                o.to_vec()
            }
            None => (0..curve.num_edges()).filter(|i| !tree.contains(i)).collect(),
        };
        let depth = |mut v: usize| {
            let mut d = 0;
            while let Some((p, _)) = parent[v] {
                v = p;
                d += 1;
            }
            d
        };
        let mut cycles = Vec::with_capacity(non_tree.len());
        for &ei in &non_tree {
            let e = &curve.edges()[ei];
            let mut gamma = vec![0i64; curve.num_edges()];
            gamma[ei] = 1;
            // Walk head back to tail through the tree: head -> lca <- tail.
            let (mut a, mut b) = (e.head, e.tail);
            let (mut da, mut db) = (depth(a), depth(b));
            let mut tail_side = Vec::new();
            while da > db {
                let (p, t) = parent[a].unwrap();
                gamma[t] += tree_sign(curve, t, a, p);
                a = p;
                da -= 1;
            }
            while db > da {
                let (p, t) = parent[b].unwrap();
                tail_side.push((t, p, b));
                b = p;
                db -= 1;
            }
            while a != b {
                let (pa, ta) = parent[a].unwrap();
                gamma[ta] += tree_sign(curve, ta, a, pa);
                a = pa;
                let (pb, tb) = parent[b].unwrap();
                tail_side.push((tb, pb, b));
                b = pb;
            }
            for (t, from, to) in tail_side.into_iter().rev() {
                gamma[t] += tree_sign(curve, t, from, to);
            }
            cycles.push(gamma);
        }
        let mut weight_slots = Vec::new();
        for (v, vx) in curve.vertices().iter().enumerate() {
            weight_slots.extend(std::iter::repeat_n(v, vx.weight as usize));
        }
        Ok(HomologyBasis {
            genus: g,
            graph_genus: non_tree.len(),
            tree,
            cycle_edges: non_tree,
            cycles,
            weight_slots,
            twist_sign: 1,
            edge_ids: curve.edges().iter().map(|e| e.id.clone()).collect(),
            vertex_ids: curve.vertices().iter().map(|v| v.id.clone()).collect(),
        })
    }

    pub fn from_ref(curve: &TropicalCurve, r: &BasisRef) -> Result<Self> {
        let idx = |id: &String| {
            curve.edge_index(id).ok_or_else(|| Error::BasisMismatch(format!("unknown edge {id} in basis reference")))
        };
        let tree = r.tree.iter().map(idx).collect::<Result<Vec<_>>>()?;
        let order = r.cycle_order.iter().map(idx).collect::<Result<Vec<_>>>()?;
        Self::with_tree(curve, &tree, Some(&order))
    }

    pub fn reference(&self) -> BasisRef {
        BasisRef {
            tree: self.tree.iter().map(|&t| self.edge_ids[t].clone()).collect(),
            cycle_order: self.cycle_edges.iter().map(|&t| self.edge_ids[t].clone()).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        2 * self.genus
    }

    /// Class of the loop around edge `e` in `H`: `sum_i γ_i(e) β_i`.
    pub fn loop_class(&self, e: usize) -> Vec<BigInt> {
        let g = self.genus;
        let mut v = vec![BigInt::zero(); 2 * g];
        for (i, c) in self.cycles.iter().enumerate() {
            v[g + i] = BigInt::from(c[e]);
        }
        v
    }

    /// Indices (0-based, into the `2g` basis) of the β-classes of cycle slots.
    pub fn cycle_beta_slots(&self) -> Vec<usize> {
        (0..self.graph_genus).map(|i| self.genus + i).collect()
    }

    /// Labels `a1..ag, b1..bg`.
    pub fn labels(&self) -> Vec<String> {
        let g = self.genus;
        (1..=g).map(|i| format!("a{i}")).chain((1..=g).map(|i| format!("b{i}"))).collect()
    }

    pub fn report(&self) -> BasisReport {
        let g = self.genus;
        let mut loops = BTreeMap::new();
        for e in 0..self.edge_ids.len() {
            let cls = self.loop_class(e);
            let sparse: BTreeMap<String, i64> = (0..g)
                .filter(|&i| !cls[g + i].is_zero())
                .map(|i| (format!("b{}", i + 1), self.cycles[i][e]))
                .collect();
            loops.insert(self.edge_ids[e].clone(), sparse);
        }
        let cycles = self
            .cycles
            .iter()
            .map(|c| {
                c.iter()
                    .enumerate()
                    .filter(|(_, &x)| x != 0)
                    .map(|(e, &x)| (self.edge_ids[e].clone(), x))
                    .collect::<BTreeMap<_, _>>()
            })
            .collect();
        BasisReport {
            genus: g,
            graph_genus: self.graph_genus,
            labels: self.labels(),
            basis_ref: self.reference(),
            cycles,
            loop_classes: loops,
            weight_slots: self.weight_slots.iter().map(|&v| self.vertex_ids[v].clone()).collect(),
            twist_sign: self.twist_sign,
            twist_convention: TWIST_CONVENTION.to_string(),
            y_slots: self.cycle_beta_slots().iter().map(|s| format!("b{}", s - g + 1)).collect(),
        }
    }

    /// Change of basis to `other` (same curve): column `j` holds the `j`-th
    /// basis vector of `other` in this basis' coordinates.
    pub fn change_to(&self, other: &HomologyBasis) -> Result<IntMatrix> {
        if self.genus != other.genus || self.graph_genus != other.graph_genus || self.edge_ids != other.edge_ids {
            return Err(Error::BasisMismatch("bases belong to different curves".into()));
        }
        let (g, h) = (self.genus, self.graph_genus);
        let mut m = IntMatrix::zeros(2 * g, 2 * g);
        for j in 0..h {
            for i in 0..h {
                // α'_j = Σ_i γ'_j(e_i) α_i ; β'_j = Σ_i γ_i(e'_j) β_i
                m[(i, j)] = BigInt::from(other.cycles[j][self.cycle_edges[i]]);
                m[(g + i, g + j)] = BigInt::from(self.cycles[i][other.cycle_edges[j]]);
            }
        }
        for j in h..g {
            m[(j, j)] = BigInt::one();
            m[(g + j, g + j)] = BigInt::one();
        }
        Ok(m)
    }
}

/// +1 when walking tree edge `t` from `from` to `to` follows its orientation.
fn tree_sign(curve: &TropicalCurve, t: usize, from: usize, to: usize) -> i64 {
    let e = &curve.edges()[t];
    if e.tail == from && e.head == to {
        1
    } else {
        -1
    }
}

/// Serializable description of a basis, for interpreting Johnson tables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisReport {
    pub genus: usize,
    pub graph_genus: usize,
    pub labels: Vec<String>,
    pub basis_ref: BasisRef,
    /// Fundamental cycle of each α slot as edge id -> coefficient.
    pub cycles: Vec<BTreeMap<String, i64>>,
    /// Class of the loop around each edge, as β label -> coefficient.
    pub loop_classes: BTreeMap<String, BTreeMap<String, i64>>,
    /// Vertex owning each weight slot.
    pub weight_slots: Vec<String>,
    pub twist_sign: i8,
    pub twist_convention: String,
    /// β labels spanning `Y`.
    pub y_slots: Vec<String>,
}

/// `Q[i][j] = Σ_e c_e γ_i(e) γ_j(e)` on cycle slots, zero on weight slots.
///
/// Lengths must be integers; scale rational curves first.
pub fn polarization_q(curve: &TropicalCurve, basis: &HomologyBasis) -> Result<IntMatrix> {
    let mut c = Vec::with_capacity(curve.num_edges());
    for e in curve.edges() {
        if !e.length.is_integer() {
            return Err(Error::Precondition(format!("edge {} has non-integer length {}", e.id, e.length)));
        }
        c.push(e.length.to_integer());
    }
    Ok(polarization_from_lengths(basis, &c))
}

pub fn polarization_from_lengths(basis: &HomologyBasis, c: &[BigInt]) -> IntMatrix {
    let g = basis.genus;
    let mut q = IntMatrix::zeros(g, g);
    for (i, gi) in basis.cycles.iter().enumerate() {
        for (j, gj) in basis.cycles.iter().enumerate() {
            let mut s = BigInt::zero();
            for e in 0..c.len() {
                let p = gi[e] * gj[e];
                if p != 0 {
                    s += &c[e] * p;
                }
            }
            q[(i, j)] = s;
        }
    }
    q
}

/// Upper-left `h x h` block of `Q`.
pub fn cycle_block(q: &IntMatrix, h: usize) -> IntMatrix {
    q.block(0, 0, h, h)
}

/// `δ = [[I, 0], [Q, I]]` in the order `α_1..α_g, β_1..β_g`.
pub fn delta_from_q(q: &IntMatrix) -> IntMatrix {
    let g = q.nrows();
    let mut d = IntMatrix::identity(2 * g);
    d.set_block(g, 0, q);
    d
}

/// Standard form `Ω` with `i(x, y) = x^T Ω y` and `i(α_i, β_i) = 1`.
pub fn symplectic_form(g: usize) -> IntMatrix {
    let mut o = IntMatrix::zeros(2 * g, 2 * g);
    for i in 0..g {
        o[(i, g + i)] = BigInt::one();
        o[(g + i, i)] = -BigInt::one();
    }
    o
}

/// Algebraic intersection `i(x, y)` in the standard symplectic basis.
pub fn intersection(x: &[BigInt], y: &[BigInt]) -> BigInt {
    assert_eq!(x.len(), y.len());
    let g = x.len() / 2;
    let mut s = BigInt::zero();
    for i in 0..g {
        s += &x[i] * &y[g + i] - &x[g + i] * &y[i];
    }
    s
}

pub fn is_symplectic(m: &IntMatrix) -> bool {
    if !m.is_square() || !m.nrows().is_multiple_of(2) {
        return false;
    }
    let o = symplectic_form(m.nrows() / 2);
    m.transpose().mul(&o).mul(m) == o
}

/// Inverse of a symplectic matrix, `Ω^{-1} M^T Ω`.
pub fn symplectic_inverse(m: &IntMatrix) -> IntMatrix {
    let o = symplectic_form(m.nrows() / 2);
    o.neg().mul(&m.transpose()).mul(&o)
}

/// Matrix of `T_l^c : h -> h + c * i(h, l) * l`.
pub fn twist_action(l: &[BigInt], c: &BigInt) -> IntMatrix {
    let n = l.len();
    let mut m = IntMatrix::identity(n);
    for j in 0..n {
        let ej = unit_vector(n, j);
        let k = intersection(&ej, l) * c;
        if !k.is_zero() {
            for i in 0..n {
                m[(i, j)] += &k * &l[i];
            }
        }
    }
    m
}

/// Product of twists about pairwise orthogonal classes.
pub fn multitwist_action(twists: &[(Vec<BigInt>, BigInt)]) -> Result<IntMatrix> {
    let n = twists.first().map(|t| t.0.len()).ok_or_else(|| Error::Dimension("empty multitwist".into()))?;
    for (a, (la, _)) in twists.iter().enumerate() {
        for (lb, _) in &twists[a + 1..] {
            if !intersection(la, lb).is_zero() {
                return Err(Error::NonIsotropic);
            }
        }
    }
    let mut m = IntMatrix::identity(n);
    for (l, c) in twists {
        m = twist_action(l, c).mul(&m);
    }
    Ok(m)
}

/// The multitwist `Π_e T_{ℓ_e}^{c_e}` over all edges of the curve.
pub fn curve_multitwist(basis: &HomologyBasis, lengths: &[BigInt]) -> Result<IntMatrix> {
    let twists: Vec<(Vec<BigInt>, BigInt)> =
        (0..lengths.len()).map(|e| (basis.loop_class(e), lengths[e].clone())).collect();
    multitwist_action(&twists)
}

/// `(δ - I)^2 = 0` check.
pub fn is_unipotent_step2(delta: &IntMatrix) -> bool {
    let d = delta.sub(&IntMatrix::identity(delta.nrows()));
    d.mul(&d).is_zero()
}

/// Saturation of the image of `δ - I`.
pub fn image_saturation(delta: &IntMatrix) -> Result<Lattice> {
    if !delta.is_square() {
        return Err(Error::Dimension("δ must be square".into()));
    }
    if !is_unipotent_step2(delta) {
        return Err(Error::NotUnipotent);
    }
    let d = delta.sub(&IntMatrix::identity(delta.nrows()));
    Ok(Lattice::column_span(&d).saturation())
}

/// Lexicographically ordered spanning trees other than the basis tree, for re-choice tests.
pub fn alternative_trees(curve: &TropicalCurve, basis: &HomologyBasis, count: usize) -> Vec<Vec<usize>> {
    let mut trees = curve.spanning_trees();
    trees.sort_by(|a, b| {
        let ka: Vec<&str> = a.iter().map(|&i| curve.edges()[i].id.as_str()).collect();
        let kb: Vec<&str> = b.iter().map(|&i| curve.edges()[i].id.as_str()).collect();
        ka.iter().zip(&kb).map(|(x, y)| natural_cmp(x, y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    trees.into_iter().filter(|t| *t != basis.tree).take(count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::graph::TropicalCurve;
    use crate::lattice::{invariant_factors, Lattice};
    use crate::matrix::to_bigints;
    use num_rational::BigRational;
    use num_traits::Signed;
    use proptest::prelude::*;

    pub(crate) fn k4(c: [i64; 6]) -> TropicalCurve {
        let l: Vec<String> = c.iter().map(|x| x.to_string()).collect();
        TropicalCurve::build(
            &[("0", 0), ("A", 0), ("B", 0), ("C", 0)],
            &[
                ("e1", "B", "C", &l[0]),
                ("e2", "C", "A", &l[1]),
                ("e3", "A", "B", &l[2]),
                ("e4", "0", "A", &l[3]),
                ("e5", "0", "B", &l[4]),
                ("e6", "0", "C", &l[5]),
            ],
        )
        .unwrap()
    }

    fn k4_basis(curve: &TropicalCurve) -> HomologyBasis {
        HomologyBasis::from_ref(
            curve,
            &BasisRef {
                tree: vec!["e4".into(), "e5".into(), "e6".into()],
                cycle_order: vec!["e1".into(), "e2".into(), "e3".into()],
            },
        )
        .unwrap()
    }

    /// The polarization written out by hand for the K4 labeling.
    fn k4_q_closed_form(c: [i64; 6]) -> IntMatrix {
        let [c1, c2, c3, c4, c5, c6] = c;
        IntMatrix::from_i64(&[
            vec![c1 + c5 + c6, -c6, -c5],
            vec![-c6, c2 + c4 + c6, -c4],
            vec![-c5, -c4, c3 + c4 + c5],
        ])
    }

    #[test]
    fn k4_polarization_matches_closed_form() {
        for c in [[1, 1, 1, 1, 1, 1], [2, 3, 5, 7, 11, 13], [4, 1, 9, 2, 6, 3]] {
            let curve = k4(c);
            let b = k4_basis(&curve);
            assert_eq!(polarization_q(&curve, &b).unwrap(), k4_q_closed_form(c));
        }
    }

    #[test]
    fn k4_fundamental_cycles() {
        let curve = k4([1; 6]);
        let b = k4_basis(&curve);
        assert_eq!(b.cycles[0], vec![1, 0, 0, 0, 1, -1]);
        assert_eq!(b.cycles[1], vec![0, 1, 0, -1, 0, 1]);
        assert_eq!(b.cycles[2], vec![0, 0, 1, 1, -1, 0]);
    }

    #[test]
    fn basis_examples() {
        let two_loops = TropicalCurve::build(&[("v", 0)], &[("a", "v", "v", "2"), ("b", "v", "v", "5")]).unwrap();
        let b = HomologyBasis::new(&two_loops).unwrap();
        assert_eq!((b.genus, b.graph_genus), (2, 2));
        assert_eq!(b.cycle_beta_slots(), vec![2, 3]);
        assert_eq!(polarization_q(&two_loops, &b).unwrap(), IntMatrix::from_i64(&[vec![2, 0], vec![0, 5]]));

        let theta = TropicalCurve::build(
            &[("u", 1), ("v", 1)],
            &[("e1", "u", "v", "1"), ("e2", "u", "v", "1"), ("e3", "u", "v", "1")],
        )
        .unwrap();
        let b = HomologyBasis::new(&theta).unwrap();
        assert_eq!((b.genus, b.graph_genus, b.weight_slots.len()), (4, 2, 2));
        let q = polarization_q(&theta, &b).unwrap();
        let mut expect = IntMatrix::zeros(4, 4);
        expect.set_block(0, 0, &IntMatrix::from_i64(&[vec![2, 1], vec![1, 2]]));
        assert_eq!(q, expect);

        assert_eq!(HomologyBasis::new(&k4([1; 6])).unwrap().genus, 3);
        let single = TropicalCurve::build(&[("v", 1)], &[]).unwrap();
        assert_eq!(HomologyBasis::new(&single).unwrap_err(), Error::GenusTooSmall(1));
    }

    #[test]
    fn rational_lengths_rejected_for_q() {
        let c = TropicalCurve::build(&[("v", 0)], &[("a", "v", "v", "1/2"), ("b", "v", "v", "1")]).unwrap();
        let b = HomologyBasis::new(&c).unwrap();
        assert!(polarization_q(&c, &b).is_err());
    }

    #[test]
    fn delta_examples() {
        assert!(delta_from_q(&IntMatrix::zeros(2, 2)).is_identity());
        let d = delta_from_q(&IntMatrix::identity(2));
        assert_eq!(d.column(0), to_bigints(&[1, 0, 1, 0]));
        assert_eq!(d.column(2), to_bigints(&[0, 0, 1, 0]));
        let q = k4_q_closed_form([1; 6]);
        let d = delta_from_q(&q);
        assert_eq!(d.block(3, 0, 3, 3), IntMatrix::from_i64(&[vec![3, -1, -1], vec![-1, 3, -1], vec![-1, -1, 3]]));
        assert_eq!(invariant_factors(&q), to_bigints(&[1, 4, 4]));
    }

    #[test]
    fn twist_examples() {
        let b1 = to_bigints(&[0, 0, 1, 0]);
        let t = twist_action(&b1, &BigInt::one());
        assert_eq!(t.mul_vec(&to_bigints(&[1, 0, 0, 0])), to_bigints(&[1, 0, 1, 0]));
        assert_eq!(t.mul_vec(&to_bigints(&[0, 0, 0, 1])), to_bigints(&[0, 0, 0, 1]));
        assert!(is_symplectic(&t));
        let a1 = to_bigints(&[1, 0, 0, 0]);
        assert_eq!(multitwist_action(&[(a1, BigInt::one()), (b1, BigInt::one())]).unwrap_err(), Error::NonIsotropic);
    }

    #[test]
    fn k4_multitwist_is_delta() {
        let c = [2, 3, 5, 7, 11, 13];
        let curve = k4(c);
        let b = k4_basis(&curve);
        let lens: Vec<BigInt> = c.iter().map(|&x| BigInt::from(x)).collect();
        let m = curve_multitwist(&b, &lens).unwrap();
        assert_eq!(m, delta_from_q(&k4_q_closed_form(c)));
    }

    #[test]
    fn saturation_examples() {
        let mut q = IntMatrix::zeros(2, 2);
        q[(0, 0)] = BigInt::from(2);
        let y = image_saturation(&delta_from_q(&q)).unwrap();
        assert_eq!(y.basis(), &[to_bigints(&[0, 0, 1, 0])]);
        assert_eq!(image_saturation(&IntMatrix::identity(4)).unwrap().rank(), 0);
        let bad = IntMatrix::from_i64(&[vec![1, 1], vec![1, 1]]);
        assert_eq!(image_saturation(&bad).unwrap_err(), Error::NotUnipotent);
    }

    #[test]
    fn theta_with_weights_image_has_index_three() {
        let theta = TropicalCurve::build(
            &[("u", 1), ("v", 1)],
            &[("e1", "u", "v", "1"), ("e2", "u", "v", "1"), ("e3", "u", "v", "1")],
        )
        .unwrap();
        let b = HomologyBasis::new(&theta).unwrap();
        let d = delta_from_q(&polarization_q(&theta, &b).unwrap());
        let img = Lattice::column_span(&d.sub(&IntMatrix::identity(8)));
        let y = image_saturation(&d).unwrap();
        assert_eq!(y, Lattice::coordinate(8, [4, 5]));
        assert_eq!(img.saturation_index(), BigInt::from(3));
    }

    #[test]
    fn tree_rechoice_is_symplectic_and_transforms_q() {
        let c = [2, 3, 5, 7, 11, 13];
        let curve = k4(c);
        let b = k4_basis(&curve);
        let q = polarization_q(&curve, &b).unwrap();
        for t in alternative_trees(&curve, &b, 8) {
            let b2 = HomologyBasis::with_tree(&curve, &t, None).unwrap();
            let m = b.change_to(&b2).unwrap();
            assert!(is_symplectic(&m));
            let p = m.block(0, 0, 3, 3);
            let q2 = polarization_q(&curve, &b2).unwrap();
            assert_eq!(q2, p.transpose().mul(&q).mul(&p));
            let d1 = delta_from_q(&q);
            let d2 = delta_from_q(&q2);
            assert_eq!(d1.mul(&m), m.mul(&d2));
        }
    }

    #[test]
    fn basis_report_serializes() {
        let curve = k4([1; 6]);
        let r = k4_basis(&curve).report();
        let s = serde_json::to_string(&r).unwrap();
        let back: BasisReport = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.loop_classes["e5"], BTreeMap::from([("b1".to_string(), 1), ("b3".to_string(), -1)]));
    }

    pub(crate) fn random_graph() -> impl Strategy<Value = TropicalCurve> {
        (2usize..6, proptest::collection::vec((0usize..6, 0usize..6, 1i64..21), 1..9), proptest::collection::vec(0u64..2, 6))
            .prop_filter_map("connected genus >= 2", |(n, es, ws)| {
                let vs: Vec<crate::graph::Vertex> =
                    (0..n).map(|i| crate::graph::Vertex { id: format!("v{i}"), weight: ws[i] }).collect();
                let specs = es
                    .iter()
                    .enumerate()
                    .map(|(i, &(a, b, l))| crate::graph::EdgeSpec {
                        id: format!("e{i}"),
                        ends: [format!("v{}", a % n), format!("v{}", b % n)],
                        length: rat(l),
                    })
                    .collect();
                let c = TropicalCurve::new(vs, specs).ok()?;
                (c.genus() >= 2).then_some(c)
            })
    }

    fn leading_minors_positive(q: &IntMatrix) -> bool {
        (1..=q.nrows()).all(|k| q.block(0, 0, k, k).det().is_positive())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn delta_is_symplectic_unipotent(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let q = polarization_q(&c, &b).unwrap();
            prop_assert!(q.is_symmetric());
            let d = delta_from_q(&q);
            prop_assert!(is_symplectic(&d));
            prop_assert!(is_unipotent_step2(&d));
        }

        #[test]
        fn q_definiteness_tracks_weights(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let q = polarization_q(&c, &b).unwrap();
            let h = b.graph_genus;
            prop_assert!(leading_minors_positive(&cycle_block(&q, h)));
            prop_assert_eq!(leading_minors_positive(&q), c.total_weight() == 0);
        }

        #[test]
        fn symanzik_is_det_of_cycle_block(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let q = polarization_q(&c, &b).unwrap();
            let det = cycle_block(&q, b.graph_genus).det();
            prop_assert_eq!(BigRational::from_integer(det), c.symanzik());
        }

        #[test]
        fn saturation_is_cycle_beta_span(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let d = delta_from_q(&polarization_q(&c, &b).unwrap());
            let y = image_saturation(&d).unwrap();
            prop_assert_eq!(y, Lattice::coordinate(b.rank(), b.cycle_beta_slots()));
        }

        #[test]
        fn multitwist_matches_delta(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let (lens, _) = c.integer_lengths();
            let m = curve_multitwist(&b, &lens).unwrap();
            prop_assert_eq!(m, delta_from_q(&polarization_q(&c, &b).unwrap()));
        }

        #[test]
        fn connectivization_keeps_q_invariants(c in random_graph()) {
            let b = HomologyBasis::new(&c).unwrap();
            let q = polarization_q(&c, &b).unwrap();
            let t = c.two_edge_connectivization();
            let bt = HomologyBasis::new(&t).unwrap();
            let qt = polarization_q(&t, &bt).unwrap();
            prop_assert_eq!(invariant_factors(&q), invariant_factors(&qt));
            prop_assert_eq!(cycle_block(&q, b.graph_genus).det(), cycle_block(&qt, bt.graph_genus).det());
        }
    }

    #[test]
    fn twist_sign_recorded() {
        let r = HomologyBasis::new(&k4([1; 6])).unwrap().report();
        assert_eq!(r.twist_sign, 1);
        assert!(r.twist_convention.contains("[[I,0],[Q,I]]"));
        let _ = rat(1);
    }
}
