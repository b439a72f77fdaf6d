//! Johnson-homomorphism values: bounding pair maps, the crossed-cocycle
//! algebra on `L = ∧³H`, and tables of `J([T_ℓ, τ])` per edge.

use crate::arith::parse_rational;
use crate::error::{Error, Result};
use crate::exterior::WedgeVector;
use crate::graph::TropicalCurve;
use crate::lattice::{hermite_basis, unit_vector};
use crate::matrix::IntMatrix;
use crate::symplectic::{curve_multitwist, intersection, twist_action, BasisRef, HomologyBasis};
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A symplectic sublattice `W ⊆ H` and a class `a`; the bounding pair map
/// has Johnson image `ω_W ∧ a`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundingPairDatum {
    #[serde(with = "crate::arith::bigint_mat_json")]
    pub w: Vec<Vec<BigInt>>,
    #[serde(with = "crate::arith::bigint_vec_json")]
    pub a: Vec<BigInt>,
}

fn gram(vs: &[Vec<BigInt>]) -> IntMatrix {
    let mut m = IntMatrix::zeros(vs.len(), vs.len());
    for i in 0..vs.len() {
        for j in 0..vs.len() {
            m[(i, j)] = intersection(&vs[i], &vs[j]);
        }
    }
    m
}

fn axpy(y: &mut [BigInt], a: &BigInt, x: &[BigInt]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Symplectic basis `(e_1, f_1), ..., (e_r, f_r)` of a unimodular `W`, with
/// `î(e_i, f_i) = 1` and all other pairings zero.
pub fn symplectic_basis_of(w: &[Vec<BigInt>]) -> Result<Vec<(Vec<BigInt>, Vec<BigInt>)>> {
    let n = w.first().map_or(0, Vec::len);
    if !n.is_multiple_of(2) || w.iter().any(|v| v.len() != n) {
        return Err(Error::Dimension("W must live in an even-rank H".into()));
    }
    let (mut basis, _) = hermite_basis(n, w);
    if basis.len() != w.len() {
        return Err(Error::Dimension("generators of W are linearly dependent".into()));
    }
    let det = gram(&basis).det();
    if !det.is_one() {
        return Err(Error::NotUnimodular(det));
    }
    let mut out = Vec::new();
    while !basis.is_empty() {
        let e = basis.remove(0);
        let pairings: Vec<BigInt> = basis.iter().map(|v| intersection(&e, v)).collect();
        // Bezout combination of the rest pairing to 1 with e.
        let mut g = BigInt::zero();
        let mut coef: Vec<BigInt> = vec![BigInt::zero(); basis.len()];
        for (i, p) in pairings.iter().enumerate() {
            let ext = g.extended_gcd(p);
            for c in coef.iter_mut().take(i) {
                *c *= &ext.x;
            }
            coef[i] = ext.y.clone();
            g = ext.gcd;
        }
        if !g.is_one() {
            return Err(Error::NotUnimodular(det));
        }
        let mut f = vec![BigInt::zero(); n];
        for (c, v) in coef.iter().zip(&basis) {
            axpy(&mut f, c, v);
        }
        debug_assert!(intersection(&e, &f).is_one());
        // Project the rest onto the orthogonal complement of span(e, f).
        let projected: Vec<Vec<BigInt>> = basis
            .iter()
            .map(|v| {
                let mut p = v.clone();
                axpy(&mut p, &-intersection(v, &f), &e);
                axpy(&mut p, &intersection(v, &e), &f);
                p
            })
            .collect();
        basis = hermite_basis(n, &projected).0;
        out.push((e, f));
    }
    Ok(out)
}

/// `J(T_a T_b^{-1}) = ω_W ∧ [a]`.
pub fn johnson_bpm(datum: &BoundingPairDatum) -> Result<WedgeVector> {
    let n = datum.a.len();
    if datum.w.iter().any(|v| v.len() != n) {
        return Err(Error::Dimension("W and a live in different lattices".into()));
    }
    let pairs = symplectic_basis_of(&datum.w)?;
    let mut om = WedgeVector::zero(n, 2);
    for (e, f) in &pairs {
        om = om.add(&WedgeVector::from_vector(e).wedge(&WedgeVector::from_vector(f)));
    }
    Ok(om.wedge(&WedgeVector::from_vector(&datum.a)))
}

/// `μ(x^c)` from `μ(x)` by repeated squaring, `μ(x⁻¹) = −x⁻¹·μ(x)`.
/// Returns the pair `(x^c, μ(x^c))`.
pub fn cocycle_power(x: &IntMatrix, mu: &WedgeVector, c: i64) -> Result<(IntMatrix, WedgeVector)> {
    let (mut base, mut bmu) = if c < 0 {
        let inv = x.inverse_unimodular()?;
        let m = mu.apply(&inv).neg();
        (inv, m)
    } else {
        (x.clone(), mu.clone())
    };
    let mut e = c.unsigned_abs();
    let mut acc = (IntMatrix::identity(x.nrows()), WedgeVector::zero(mu.rank(), mu.degree()));
    while e > 0 {
        if e & 1 == 1 {
            acc = (acc.0.mul(&base), acc.1.add(&bmu.apply(&acc.0)));
        }
        e >>= 1;
        if e > 0 {
            bmu = bmu.add(&bmu.apply(&base));
            base = base.mul(&base);
        }
    }
    Ok(acc)
}

/// Evaluates a crossed homomorphism on a word by folding left to right:
/// `μ(xy) = μ(x) + x·μ(y)`. Letters are `(index, exponent)`.
pub fn cocycle_eval(values: &[(IntMatrix, WedgeVector)], word: &[(usize, i64)]) -> Result<WedgeVector> {
    let (n, k) = match values.first() {
        Some((m, w)) => (m.nrows(), w.degree()),
        None => return Err(Error::Dimension("no cocycle values".into())),
    };
    for (m, w) in values {
        if m.nrows() != n || m.ncols() != n || (!w.is_zero() && (w.rank() != n || w.degree() != k)) {
            return Err(Error::Dimension("cocycle values of inconsistent shape".into()));
        }
    }
    let mut mat = IntMatrix::identity(n);
    let mut mu = WedgeVector::zero(n, k);
    for &(i, c) in word {
        let (m, w) = values.get(i).ok_or_else(|| Error::Dimension(format!("letter {i} out of range")))?;
        let (p, pm) = cocycle_power(m, &w.clone().with_rank(n), c)?;
        mu = mu.add(&pm.apply(&mat));
        mat = mat.mul(&p);
    }
    Ok(mu)
}

/// Where a table came from. User tables are never topologically validated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Builtin,
    #[default]
    User,
}

/// Per-edge values `J([T_ℓ_e, τ])` relative to a declared homology basis.
///
/// `basis_change`, when present, has as columns the table's coordinate
/// vectors written in the basis named by `basis_ref`. `total` is
/// `J([T_Γ, τ])` for the lengths in `total_lengths`, for tables that only
/// know the whole multitwist.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JohnsonTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub basis_ref: BasisRef,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_change: Option<IntMatrix>,
    #[serde(default)]
    pub entries: BTreeMap<String, WedgeVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total: Option<WedgeVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_lengths: Option<BTreeMap<String, String>>,
    #[serde(skip)]
    pub provenance: Provenance,
}

/// A table rewritten in the coordinates of a concrete basis of a curve.
#[derive(Clone, Debug, PartialEq)]
pub struct ResolvedTable {
    pub name: Option<String>,
    pub provenance: Provenance,
    /// Entry per edge index; zero when absent.
    pub entries: Vec<WedgeVector>,
    pub has_entries: bool,
    pub total: Option<WedgeVector>,
    pub total_lengths: Option<Vec<BigRational>>,
}

impl JohnsonTable {
    pub fn from_json(s: &str) -> Result<Self> {
        let t: JohnsonTable = serde_json::from_str(s).map_err(|e| Error::Schema(format!("johnson table: {e}")))?;
        if t.entries.is_empty() && t.total.is_none() {
            return Err(Error::Schema("johnson table has neither entries nor total".into()));
        }
        if t.total.is_some() != t.total_lengths.is_some() {
            return Err(Error::Schema("total and total_lengths must be given together".into()));
        }
        for v in t.total_lengths.iter().flat_map(|m| m.values()) {
            parse_rational(v).map_err(|_| Error::Schema(format!("bad length {v:?} in total_lengths")))?;
        }
        for w in t.entries.values().chain(t.total.iter()) {
            if !w.is_zero() && w.degree() != 3 {
                return Err(Error::Schema("johnson table values must be 3-vectors".into()));
            }
        }
        Ok(t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    /// Rewrites the table in the coordinates of `target`.
    pub fn resolve(&self, curve: &TropicalCurve, target: &HomologyBasis) -> Result<ResolvedTable> {
        let native = HomologyBasis::from_ref(curve, &self.basis_ref)?;
        let n = native.rank();
        if target.rank() != n {
            return Err(Error::BasisMismatch("table and target basis have different genus".into()));
        }
        if let Some(b) = &self.basis_change {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::BasisMismatch(format!("basis_change must be {n}x{n}")));
            }
            if b.det().is_zero() {
                return Err(Error::BasisMismatch("basis_change is singular".into()));
            }
        }
        let to_target = if native.reference() == target.reference() {
            None
        } else {
            Some(native.change_to(target)?.inverse_unimodular()?)
        };
        let convert = |w: &WedgeVector| -> Result<WedgeVector> {
            if w.is_zero() {
                return Ok(WedgeVector::zero(n, 3));
            }
            if w.rank() > n {
                return Err(Error::BasisMismatch(format!("wedge index beyond rank {n}")));
            }
            let mut w = w.clone().with_rank(n);
            if let Some(b) = &self.basis_change {
                w = w.apply(b);
            }
            if let Some(c) = &to_target {
                w = w.apply(c);
            }
            Ok(w)
        };
        let mut entries = vec![WedgeVector::zero(n, 3); curve.num_edges()];
        let separating = curve.separating_edges();
        for (id, w) in &self.entries {
            let e = curve.edge_index(id).ok_or_else(|| Error::BasisMismatch(format!("table names unknown edge {id}")))?;
            let v = convert(w)?;
            if separating.contains(&e) && !v.is_zero() {
                return Err(Error::Precondition(format!("separating edge {id} has a nonzero Johnson value")));
            }
            entries[e] = v;
        }
        let total = self.total.as_ref().map(convert).transpose()?;
        let total_lengths = match &self.total_lengths {
            None => None,
            Some(m) => {
                let mut out = Vec::with_capacity(curve.num_edges());
                for e in curve.edges() {
                    let s = m.get(&e.id).ok_or_else(|| Error::Schema(format!("total_lengths misses edge {}", e.id)))?;
                    out.push(parse_rational(s).map_err(|_| Error::Schema(format!("bad length {s:?}")))?);
                }
                if m.len() != curve.num_edges() {
                    return Err(Error::Schema("total_lengths names unknown edges".into()));
                }
                Some(out)
            }
        };
        Ok(ResolvedTable {
            name: self.name.clone(),
            provenance: self.provenance,
            entries,
            has_entries: !self.entries.is_empty(),
            total,
            total_lengths,
        })
    }
}

impl ResolvedTable {
    pub fn rank(&self) -> usize {
        self.entries.first().map_or_else(|| self.total.as_ref().map_or(0, |t| t.rank()), |e| e.rank())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero()) && self.total.as_ref().is_none_or(|t| t.is_zero())
    }

    /// `Σ_e c_e · J([T_ℓ_e, τ])`; a total-only table contributes its total.
    pub fn linear_class(&self, lengths: &[BigInt]) -> WedgeVector {
        if !self.has_entries {
            return self.total.clone().unwrap_or_else(|| WedgeVector::zero(self.rank(), 3));
        }
        let mut v = WedgeVector::zero(self.rank(), 3);
        for (e, c) in self.entries.iter().zip(lengths) {
            if !e.is_zero() && !c.is_zero() {
                v = v.add(&e.scale(c));
            }
        }
        v
    }

    /// Exact `J([T_Γ, τ])` for integer lengths: the cocycle folded over
    /// `Π_e T_e^{c_e}` in edge order, or the stored total raised to the
    /// integer multiple relating `lengths` to `total_lengths`.
    pub fn cocycle_total(&self, basis: &HomologyBasis, lengths: &[BigRational]) -> Result<WedgeVector> {
        if let (Some(total), Some(tl)) = (&self.total, &self.total_lengths) {
            let ratios: Vec<BigRational> = lengths.iter().zip(tl).map(|(a, b)| a / b).collect();
            let m = &ratios[0];
            if ratios.iter().any(|r| r != m) || !m.is_integer() || !m.is_positive() {
                return Err(Error::Precondition(
                    "this table only knows J([T_Γ, τ]) for its recorded lengths and their integer multiples".into(),
                ));
            }
            if tl.iter().any(|c| !c.is_integer()) {
                return Err(Error::Precondition("total_lengths must be integers".into()));
            }
            let ints: Vec<BigInt> = tl.iter().map(|c| c.to_integer()).collect();
            let d = curve_multitwist(basis, &ints)?;
            let e = i64::try_from(m.to_integer()).map_err(|_| Error::Precondition("length multiple too large".into()))?;
            return Ok(cocycle_power(&d, total, e)?.1);
        }
        if lengths.iter().any(|c| !c.is_integer()) {
            return Err(Error::Precondition("cocycle evaluation needs integer lengths".into()));
        }
        let values: Vec<(IntMatrix, WedgeVector)> = (0..self.entries.len())
            .map(|e| (twist_action(&basis.loop_class(e), &BigInt::one()), self.entries[e].clone()))
            .collect();
        let mut word = Vec::new();
        for (e, c) in lengths.iter().enumerate() {
            let c = i64::try_from(c.to_integer()).map_err(|_| Error::Precondition("edge length too large".into()))?;
            word.push((e, c));
        }
        cocycle_eval(&values, &word)
    }

    /// Replaces `τ` by a conjugate: each entry `μ(x)` becomes `μ(x) + (x − 1)t`.
    pub fn coboundary_shift(&self, basis: &HomologyBasis, t: &WedgeVector) -> Result<ResolvedTable> {
        let n = self.rank();
        if !t.is_zero() && (t.rank() != n || t.degree() != 3) {
            return Err(Error::Dimension("shift must be a 3-vector in the table's rank".into()));
        }
        let shift = |m: &IntMatrix| t.apply(m).sub(t);
        let mut out = self.clone();
        for (e, entry) in out.entries.iter_mut().enumerate() {
            let l = basis.loop_class(e);
            if l.iter().all(Zero::is_zero) {
                continue;
            }
            *entry = entry.add(&shift(&twist_action(&l, &BigInt::one())));
        }
        if let (Some(total), Some(tl)) = (&mut out.total, &self.total_lengths) {
            let ints: Vec<BigInt> = tl.iter().map(|c| c.to_integer()).collect();
            *total = total.add(&shift(&curve_multitwist(basis, &ints)?));
        }
        Ok(out)
    }
}

/// Standard basis vector helper: `α_i` is `basis_vector(g, i)`, `β_i` is `basis_vector(g, g + i)`.
pub fn basis_vector(g: usize, i: usize) -> Vec<BigInt> {
    unit_vector(2 * g, i)
}
