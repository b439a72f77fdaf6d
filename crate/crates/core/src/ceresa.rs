//! The tropical Ceresa pipeline: `v_Γ`, `u_Γ`, verdict, order, the Zharkov
//! obstruction and the membership test for rank-deficient curves.

use crate::arith::format_rational;
use crate::error::{Error, Result};
use crate::exterior::{
    beta_graded_part, delta_inverse_gr2, predicted_orders, FilteredAction, RationalWedge, WedgeBasis, WedgeVector,
};
use crate::graph::TropicalCurve;
use crate::johnson::{JohnsonTable, Provenance, ResolvedTable};
use crate::lattice::{invariant_factors, AbelianGroup, Lattice};
use crate::matrix::IntMatrix;
use crate::symplectic::{delta_from_q, polarization_from_lengths, BasisRef, BasisReport, HomologyBasis};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Trivial,
    Nontrivial,
    HyperellipticTrivial,
    Indeterminate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(match self {
            Verdict::Trivial => "trivial",
            Verdict::Nontrivial => "nontrivial",
            Verdict::HyperellipticTrivial => "hyperelliptic-trivial",
            Verdict::Indeterminate => "indeterminate",
        })
    }
}

impl Verdict {
    pub fn is_trivial(self) -> bool {
        matches!(self, Verdict::Trivial | Verdict::HyperellipticTrivial)
    }
}

/// Which test settled the verdict.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecidedBy {
    Hyperelliptic,
    UIntegrality,
    BbarOrder,
    AbarMembership,
    ExactClass,
    Undecided,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankStatus {
    Maximal,
    Deficient,
}

fn serde_name<T: Serialize>(x: &T) -> String {
    serde_json::to_value(x).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

impl fmt::Display for DecidedBy {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&serde_name(self))
    }
}

impl fmt::Display for RankStatus {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&serde_name(self))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CurveSummary {
    pub vertices: usize,
    pub edges: usize,
    pub genus: usize,
    pub graph_genus: usize,
    pub total_weight: u64,
    pub stable: bool,
    /// Edges left after stabilization.
    pub stable_edges: usize,
    pub lengths: Vec<String>,
    /// Common denominator clearing the lengths to integers.
    #[serde(with = "crate::arith::bigint_json")]
    pub length_scale: BigInt,
}

impl CurveSummary {
    pub fn of(curve: &TropicalCurve) -> Result<Self> {
        let (_, scale) = curve.integer_lengths();
        Ok(CurveSummary {
            vertices: curve.num_vertices(),
            edges: curve.num_edges(),
            genus: curve.genus(),
            graph_genus: curve.first_betti(),
            total_weight: curve.total_weight(),
            stable: curve.is_stable(),
            stable_edges: curve.stabilize()?.num_edges(),
            lengths: curve.lengths().iter().map(format_rational).collect(),
            length_scale: scale,
        })
    }
}

/// Result of testing `J_total ∈ F_2 L + (δ − I)L + H`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbarTest {
    pub in_abar: bool,
    /// Least `n ≥ 1` with `n · J_total` in the lattice; `None` if no multiple is.
    #[serde(with = "crate::arith::opt_bigint_json")]
    pub least_multiple: Option<BigInt>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZharkovResult {
    pub obstructed: bool,
    /// `gr_3` part of `(δ − I) v`.
    pub w: WedgeVector,
    /// `gr_3` parts of `(δ − I)^2` on `gr_1` monomials (nonzero ones listed once).
    pub relation_generators: Vec<WedgeVector>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub a: AbelianGroup,
    pub abar: AbelianGroup,
    pub b: AbelianGroup,
    pub bbar: AbelianGroup,
    /// `(|A|, |B|, |Ā|, |B̄|)` from the closed formulas; maximal rank only.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "predicted_json")]
    pub predicted: Option<[BigInt; 4]>,
}

mod predicted_json {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    struct P {
        #[serde(with = "crate::arith::bigint_json")]
        a: BigInt,
        #[serde(with = "crate::arith::bigint_json")]
        b: BigInt,
        #[serde(with = "crate::arith::bigint_json")]
        abar: BigInt,
        #[serde(with = "crate::arith::bigint_json")]
        bbar: BigInt,
    }

    pub fn serialize<S: Serializer>(x: &Option<[BigInt; 4]>, s: S) -> Result<S::Ok, S::Error> {
        x.as_ref()
            .map(|[a, b, abar, bbar]| P { a: a.clone(), b: b.clone(), abar: abar.clone(), bbar: bbar.clone() })
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<[BigInt; 4]>, D::Error> {
        Ok(Option::<P>::deserialize(d)?.map(|p| [p.a, p.b, p.abar, p.bbar]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSummary {
    pub name: Option<String>,
    pub provenance: Provenance,
    pub verified: bool,
}

/// Everything the pipeline learned about one curve.
///
/// A `nontrivial` verdict is always backed by one of: a non-integral
/// qualifying coordinate of `u`, `order > 1`, `in_abar == false`, or
/// `h1_order != 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CeresaReport {
    pub curve: CurveSummary,
    pub basis: BasisReport,
    pub table: TableSummary,
    pub rank_status: RankStatus,
    pub q: IntMatrix,
    #[serde(with = "crate::arith::bigint_vec_json")]
    pub q_invariants: Vec<BigInt>,
    pub hyperelliptic: Option<bool>,
    pub v: WedgeVector,
    pub u: Option<RationalWedge>,
    /// Qualifying coordinates `a_i^a_j^b_k` (distinct indices) of `u` that are not integers.
    pub u_nonintegral: Vec<String>,
    /// Order of `v` in `B̄`; `None` when `v` is outside `F_2 L + H` or has infinite order.
    #[serde(with = "crate::arith::opt_bigint_json")]
    pub order: Option<BigInt>,
    pub abar: AbarTest,
    /// Order of `J([T_Γ, τ])` in `L / ((δ − I)L + H)`; `None` means infinite or unavailable.
    #[serde(with = "crate::arith::opt_bigint_json")]
    pub h1_order: Option<BigInt>,
    pub zharkov: Option<ZharkovResult>,
    pub groups: Option<GroupSummary>,
    pub verdict: Verdict,
    pub decided_by: DecidedBy,
    pub notes: Vec<String>,
}

impl CeresaReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }

    /// Human-readable rendering with `a_i`, `b_i` basis labels.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let c = &self.curve;
        out.push_str(&format!(
            "curve: {} vertices, {} edges, genus {} (graph genus {}, weight {})\n",
            c.vertices, c.edges, c.genus, c.graph_genus, c.total_weight
        ));
        out.push_str(&format!("lengths: {}\n", c.lengths.join(",")));
        out.push_str(&format!("basis: tree {:?}, cycles {:?}\n", self.basis.basis_ref.tree, self.basis.basis_ref.cycle_order));
        let inv: Vec<String> = self.q_invariants.iter().map(|x| x.to_string()).collect();
        out.push_str(&format!("rank: {}, invariant factors of Q: ({})\n", self.rank_status, inv.join(",")));
        if let Some(h) = self.hyperelliptic {
            out.push_str(&format!("hyperelliptic: {h}\n"));
        }
        out.push_str(&format!("v = {}\n", self.v.display_symplectic()));
        if let Some(u) = &self.u {
            out.push_str(&format!("u = {}\n", u.display_symplectic()));
        }
        match &self.order {
            Some(o) => out.push_str(&format!("order in Bbar: {o}\n")),
            None => out.push_str("order in Bbar: undefined\n"),
        }
        match (&self.abar.in_abar, &self.abar.least_multiple) {
            (true, _) => out.push_str("in Abar: yes\n"),
            (false, Some(m)) => out.push_str(&format!("in Abar: no (least multiple {m})\n")),
            (false, None) => out.push_str("in Abar: no (no multiple)\n"),
        }
        if let Some(z) = &self.zharkov {
            out.push_str(&format!("zharkov: w = {}, obstructed = {}\n", z.w.display_symplectic(), z.obstructed));
        }
        if let Some(g) = &self.groups {
            out.push_str(&format!("A = {}, Abar = {}, B = {}, Bbar = {}\n", g.a, g.abar, g.b, g.bbar));
        }
        out.push_str(&format!("verdict: {} (decided by {})\n", self.verdict, self.decided_by));
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

/// Knobs for [`analyze`].
#[derive(Clone, Debug)]
pub struct AnalysisOptions {
    /// Basis to compute in; defaults to the table's.
    pub basis: Option<BasisRef>,
    pub check_hyperelliptic: bool,
    pub groups: bool,
    pub zharkov: bool,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { basis: None, check_hyperelliptic: true, groups: true, zharkov: true }
    }
}

/// The linear-algebra data of a curve in a chosen basis.
#[derive(Clone, Debug)]
pub struct CurveData {
    pub basis: HomologyBasis,
    pub lengths: Vec<BigInt>,
    pub scale: BigInt,
    pub q: IntMatrix,
    pub delta: IntMatrix,
    pub action: FilteredAction,
}

impl CurveData {
    pub fn new(curve: &TropicalCurve, basis: HomologyBasis) -> Result<Self> {
        let g = curve.genus();
        if g < 2 {
            return Err(Error::GenusTooSmall(g));
        }
        let (lengths, scale) = curve.integer_lengths();
        let q = polarization_from_lengths(&basis, &lengths);
        let delta = delta_from_q(&q);
        let action = FilteredAction::new(&delta)?;
        Ok(CurveData { basis, lengths, scale, q, delta, action })
    }

    pub fn genus(&self) -> usize {
        self.q.nrows()
    }

    pub fn is_maximal(&self) -> bool {
        self.basis.graph_genus == self.basis.genus
    }

    pub fn rank_status(&self) -> RankStatus {
        if self.is_maximal() {
            RankStatus::Maximal
        } else {
            RankStatus::Deficient
        }
    }
}

/// `v_Γ = Σ_e c_e · J([T_ℓ_e, τ])` with lengths cleared to integers.
pub fn v_class(data: &CurveData, table: &ResolvedTable) -> WedgeVector {
    table.linear_class(&data.lengths)
}

/// `u_Γ = (δ − I)_Q^{-1}` applied to the `gr_2` part of `v`.
pub fn u_class(data: &CurveData, v: &WedgeVector) -> Result<RationalWedge> {
    if !data.is_maximal() {
        return Err(Error::SingularPolarization { genus: data.genus(), rank: data.basis.graph_genus });
    }
    delta_inverse_gr2(&data.q, &beta_graded_part(v, data.genus(), 2))
}

/// Labels of qualifying coordinates `α_i∧α_j∧β_k` (i, j, k distinct) with non-integral coefficient.
pub fn nonintegral_qualifying(u: &RationalWedge, g: usize) -> Vec<String> {
    u.terms()
        .filter(|(t, c)| {
            t[0] < g && t[1] < g && t[2] >= g && {
                let k = t[2] - g;
                k != t[0] && k != t[1]
            } && !c.is_integer()
        })
        .map(|(t, _)| format!("a{}^a{}^b{}", t[0] + 1, t[1] + 1, t[2] - g + 1))
        .collect()
}

/// Order of `v` in `B̄(δ)`.
pub fn ceresa_order(data: &CurveData, v: &WedgeVector) -> Result<Option<BigInt>> {
    data.action.bbar_order(v)
}

/// Membership of `J_total` in `F_2 L + (δ − I)L + H` and its least multiple there.
pub fn in_abar_test(data: &CurveData, j_total: &WedgeVector) -> Result<AbarTest> {
    let m = data.action.abar_membership(j_total)?;
    Ok(AbarTest { in_abar: m.as_ref().is_some_and(One::is_one), least_multiple: m })
}

/// Zharkov's obstruction: `w = (δ − I) v` in `gr_3` against `(δ − I)^2 gr_1`.
pub fn zharkov_test(data: &CurveData, v: &WedgeVector) -> Result<ZharkovResult> {
    if !data.is_maximal() {
        return Err(Error::SingularPolarization { genus: data.genus(), rank: data.basis.graph_genus });
    }
    let g = data.genus();
    let n = 2 * g;
    let fa = &data.action;
    let v2 = beta_graded_part(v, g, 2);
    let w = beta_graded_part(&fa.nilpotent_apply(&v2), g, 3);
    let basis = WedgeBasis::new(n, 3)?;
    let mut gens = Vec::new();
    for t in basis.tuples() {
        if t.iter().filter(|&&i| i >= g).count() != 1 {
            continue;
        }
        let x = WedgeVector::monomial(n, t);
        let r = beta_graded_part(&fa.nilpotent_apply(&fa.nilpotent_apply(&x)), g, 3);
        if !r.is_zero() && !gens.contains(&r) {
            gens.push(r);
        }
    }
    let dense: Vec<Vec<BigInt>> = gens.iter().map(|r| r.to_dense(&basis)).collect();
    let obstructed = !Lattice::from_generators(basis.len(), &dense).contains(&w.to_dense(&basis));
    Ok(ZharkovResult { obstructed, w, relation_generators: gens })
}

/// The four groups and, at maximal rank, their predicted orders.
pub fn group_summary(data: &CurveData) -> Result<GroupSummary> {
    let fa = &data.action;
    let predicted = data.is_maximal().then(|| {
        let (a, b, abar, bbar) = predicted_orders(&invariant_factors(&data.q));
        [a, b, abar, bbar]
    });
    Ok(GroupSummary { a: fa.a_group(2)?, abar: fa.abar_group()?, b: fa.b_group(2)?, bbar: fa.bbar_group()?, predicted })
}

fn default_basis(curve: &TropicalCurve, table: &JohnsonTable, opts: &AnalysisOptions) -> Result<HomologyBasis> {
    HomologyBasis::from_ref(curve, opts.basis.as_ref().unwrap_or(&table.basis_ref))
}

/// Runs the whole pipeline on one curve and table.
pub fn analyze(curve: &TropicalCurve, table: &JohnsonTable, opts: &AnalysisOptions) -> Result<CeresaReport> {
    let stable = curve.stabilize()?;
    let data = CurveData::new(curve, default_basis(curve, table, opts)?)?;
    let resolved = table.resolve(curve, &data.basis)?;
    analyze_resolved(curve, &stable, &data, &resolved, opts)
}

/// Pipeline on precomputed data; `stable` is the stabilization of `curve`.
pub fn analyze_resolved(
    curve: &TropicalCurve,
    stable: &TropicalCurve,
    data: &CurveData,
    table: &ResolvedTable,
    opts: &AnalysisOptions,
) -> Result<CeresaReport> {
    let g = data.genus();
    let mut notes = Vec::new();
    let verified = table.provenance == Provenance::Builtin;
    if !verified {
        notes.push("user-supplied Johnson table: accepted without topological validation".into());
    }
    let hyperelliptic = if opts.check_hyperelliptic { Some(stable.is_hyperelliptic()?) } else { None };
    let j_total = if table.has_entries {
        let ints: Vec<BigRational> = data.lengths.iter().map(|c| BigRational::from_integer(c.clone())).collect();
        match table.cocycle_total(&data.basis, &ints) {
            Ok(j) => Some(j),
            Err(e) => {
                notes.push(format!("exact class test skipped: {e}"));
                None
            }
        }
    } else {
        // A total-only table is meaningless at other lengths, so errors propagate.
        Some(table.cocycle_total(&data.basis, &curve.lengths())?)
    };
    let v = match (&j_total, table.has_entries) {
        (Some(j), false) => j.clone(),
        _ => v_class(data, table),
    };

    let (u, u_nonintegral) = if data.is_maximal() {
        let u = u_class(data, &v)?;
        let bad = nonintegral_qualifying(&u, g);
        (Some(u), bad)
    } else {
        (None, Vec::new())
    };

    let in_f2h = data.action.abar_ambient()?.contains(&data.action.adapted_coordinates(&v)?);
    let order = if in_f2h { ceresa_order(data, &v)? } else { None };

    let abar = match &j_total {
        Some(j) => in_abar_test(data, j)?,
        None => in_abar_test(data, &v)?,
    };
    let h1_order = match &j_total {
        Some(j) => data.action.h1_order(j)?,
        None => None,
    };

    let zharkov = if opts.zharkov && data.is_maximal() { Some(zharkov_test(data, &v)?) } else { None };
    let groups = if opts.groups { Some(group_summary(data)?) } else { None };

    let (verdict, decided_by) = if hyperelliptic == Some(true) {
        (Verdict::HyperellipticTrivial, DecidedBy::Hyperelliptic)
    } else if !u_nonintegral.is_empty() {
        (Verdict::Nontrivial, DecidedBy::UIntegrality)
    } else if order.as_ref().is_some_and(|o| !o.is_one()) {
        (Verdict::Nontrivial, DecidedBy::BbarOrder)
    } else if !abar.in_abar {
        (Verdict::Nontrivial, DecidedBy::AbarMembership)
    } else if j_total.is_some() {
        if h1_order.as_ref().is_some_and(One::is_one) {
            (Verdict::Trivial, DecidedBy::ExactClass)
        } else {
            (Verdict::Nontrivial, DecidedBy::ExactClass)
        }
    } else {
        (Verdict::Indeterminate, DecidedBy::Undecided)
    };
    if decided_by == DecidedBy::ExactClass || decided_by == DecidedBy::Undecided {
        notes.push("order 1 in Bbar; triviality checked on the class of J([T_G, tau]) modulo (delta - I)L + H".into());
    }
    if verdict == Verdict::Trivial && !verified {
        notes.push("triviality certifies the given table only; the table itself is unverified".into());
    }
    if !data.scale.is_one() {
        notes.push(format!("lengths scaled by {} to clear denominators", data.scale));
    }

    Ok(CeresaReport {
        curve: CurveSummary::of(curve)?,
        basis: data.basis.report(),
        table: TableSummary { name: table.name.clone(), provenance: table.provenance, verified },
        rank_status: data.rank_status(),
        q: data.q.clone(),
        q_invariants: invariant_factors(&data.q),
        hyperelliptic,
        v,
        u,
        u_nonintegral,
        order,
        abar,
        h1_order,
        zharkov,
        groups,
        verdict,
        decided_by,
        notes,
    })
}

/// Just the verdict, skipping the group computations.
pub fn verdict(curve: &TropicalCurve, table: &JohnsonTable) -> Result<Verdict> {
    let opts = AnalysisOptions { groups: false, zharkov: false, ..Default::default() };
    Ok(analyze(curve, table, &opts)?.verdict)
}

/// `det(Q) · u` with integer coefficients (maximal rank).
pub fn scaled_u(data: &CurveData, u: &RationalWedge) -> Result<WedgeVector> {
    let d = BigRational::from_integer(data.q.det());
    u.scale(&d).to_integer().ok_or_else(|| Error::Precondition("det(Q) u is not integral".into()))
}

/// Zero helper for callers building reports by hand.
pub fn zero_class(g: usize) -> WedgeVector {
    WedgeVector::zero(2 * g, 3)
}

impl fmt::Display for CeresaReport {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.render_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{builtin_graph, builtin_table, builtin_with_lengths, theta0};
    use num_traits::Zero;

    fn k4_data(c: [i64; 6]) -> (CurveData, ResolvedTable) {
        let curve = builtin_with_lengths("k4", &c).unwrap();
        let t = builtin_table("k4").unwrap();
        let data = CurveData::new(&curve, HomologyBasis::from_ref(&curve, &t.basis_ref).unwrap()).unwrap();
        let r = t.resolve(&curve, &data.basis).unwrap();
        (data, r)
    }

    fn w3(n: usize, terms: &[([usize; 3], i64)]) -> WedgeVector {
        WedgeVector::from_terms(n, 3, terms.iter().map(|(t, c)| (t.to_vec(), BigInt::from(*c))))
    }

    #[test]
    fn k4_q_matches_closed_form() {
        let c = [2, 3, 5, 7, 11, 13];
        let (data, _) = k4_data(c);
        let expect = IntMatrix::from_i64(&[
            vec![c[0] + c[4] + c[5], -c[5], -c[4]],
            vec![-c[5], c[1] + c[3] + c[5], -c[3]],
            vec![-c[4], -c[3], c[2] + c[3] + c[4]],
        ]);
        assert_eq!(data.q, expect);
    }

    #[test]
    fn k4_v_matches_closed_form() {
        let c = [2, 3, 5, 7, 11, 13];
        let (data, table) = k4_data(c);
        // c2 a1^b1^b2 + c5 (-a2^b1^b2 - a2^b2^b3 + a2^b1^b3), indices 0-based
        let expect = w3(6, &[([0, 3, 4], 3), ([1, 3, 4], -11), ([1, 4, 5], -11), ([1, 3, 5], 11)]);
        assert_eq!(v_class(&data, &table), expect);
    }

    #[test]
    fn k4_all_one_u_and_order() {
        let (data, table) = k4_data([1; 6]);
        let v = v_class(&data, &table);
        let u = u_class(&data, &v).unwrap();
        let su = scaled_u(&data, &u).unwrap();
        // 16 u; the published list repeats a1^a3^b1 where a1^a3^b3 is meant
        let expect = w3(
            6,
            &[
                ([0, 1, 3], -9),
                ([0, 2, 3], -3),
                ([1, 2, 3], -1),
                ([0, 1, 4], 7),
                ([0, 2, 4], 1),
                ([1, 2, 4], 3),
                ([0, 1, 5], -1),
                ([0, 2, 5], 1),
                ([1, 2, 5], -1),
            ],
        );
        assert_eq!(su, expect);
        assert_eq!(ceresa_order(&data, &v).unwrap(), Some(BigInt::from(16)));
        assert_eq!(ceresa_order(&data, &zero_class(3)).unwrap(), Some(BigInt::one()));
    }

    fn generator_gcd(z: &ZharkovResult) -> BigInt {
        let cs: Vec<BigInt> = z.relation_generators.iter().map(|r| r.coefficient(&[3, 4, 5])).collect();
        crate::arith::gcd_all(cs.iter())
    }

    #[test]
    fn k4_zharkov_generators_match_minors() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let c: [i64; 6] = std::array::from_fn(|_| rng.gen_range(1..=20));
            let (data, table) = k4_data(c);
            let z = zharkov_test(&data, &v_class(&data, &table)).unwrap();
            let [c1, c2, c3, c4, c5, c6] = c;
            let six = [
                c1 * c4 - c2 * c5,
                c1 * c4 - c3 * c6,
                c2 * c5 + c4 * c5 + c4 * c6 + c5 * c6,
                c2 * c5 + c1 * c2 + c1 * c6 + c2 * c6,
                c2 * c5 + c1 * c3 + c1 * c5 + c3 * c5,
                c2 * c5 + c2 * c3 + c2 * c4 + c3 * c4,
            ]
            .map(|x| BigInt::from(2 * x));
            assert_eq!(generator_gcd(&z), crate::arith::gcd_all(six.iter()));
            assert_eq!(z.w, w3(6, &[([3, 4, 5], -2 * c2 * c5)]));
            let minors_obstructed = !(BigInt::from(2 * c2 * c5) % crate::arith::gcd_all(six.iter())).is_zero();
            assert_eq!(z.obstructed, minors_obstructed);
        }
    }

    #[test]
    fn k4_all_one_zharkov() {
        let (data, table) = k4_data([1; 6]);
        let z = zharkov_test(&data, &v_class(&data, &table)).unwrap();
        assert_eq!(z.w, w3(6, &[([3, 4, 5], -2)]));
        assert_eq!(generator_gcd(&z), BigInt::from(8));
        assert!(z.obstructed);
        let z0 = zharkov_test(&data, &zero_class(3)).unwrap();
        assert!(!z0.obstructed);
    }

    #[test]
    fn k4_report() {
        let curve = builtin_graph("k4").unwrap();
        let r = analyze(&curve, &builtin_table("k4").unwrap(), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::Nontrivial);
        assert_eq!(r.decided_by, DecidedBy::UIntegrality);
        assert_eq!(r.order, Some(BigInt::from(16)));
        assert_eq!(r.q_invariants, vec![BigInt::from(1), BigInt::from(4), BigInt::from(4)]);
        assert_eq!(r.hyperelliptic, Some(false));
        let g = r.groups.as_ref().unwrap();
        assert_eq!(g.bbar.order(), Some(BigInt::from(512)));
        assert_eq!(r.h1_order, Some(BigInt::from(16)));
        let back = CeresaReport::from_json(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert!(r.render_text().contains("verdict: nontrivial"));
    }

    #[test]
    fn theta_with_weights_needs_three() {
        let curve = builtin_graph("theta-w1").unwrap();
        let r = analyze(&curve, &builtin_table("theta-w1").unwrap(), &AnalysisOptions::default()).unwrap();
        assert_eq!(r.rank_status, RankStatus::Deficient);
        assert_eq!(r.abar, AbarTest { in_abar: false, least_multiple: Some(BigInt::from(3)) });
        assert_eq!(r.verdict, Verdict::Nontrivial);
        assert_eq!(r.decided_by, DecidedBy::AbarMembership);
        assert_eq!(r.hyperelliptic, Some(false));
    }

    #[test]
    fn three_balloon() {
        let curve = builtin_graph("3-balloon").unwrap();
        let t = builtin_table("3-balloon").unwrap();
        let r = analyze(&curve, &t, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::HyperellipticTrivial);
        let opts = AnalysisOptions { check_hyperelliptic: false, ..Default::default() };
        let r = analyze(&curve, &t, &opts).unwrap();
        assert_eq!(r.verdict, Verdict::Trivial);
        assert_eq!(r.decided_by, DecidedBy::ExactClass);
    }

    #[test]
    fn theta0_is_hyperelliptic_trivial() {
        let curve = theta0([1, 2, 3]).unwrap();
        let t = JohnsonTable::from_json(
            r#"{"basis_ref":{"tree":["e1"],"cycle_order":["e2","e3"]},"entries":{"e2":{"(1,3,4)":"1"}}}"#,
        )
        .unwrap();
        let r = analyze(&curve, &t, &AnalysisOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::HyperellipticTrivial);
        assert_eq!(r.table.provenance, Provenance::User);
        assert!(!r.notes.is_empty());
    }

    #[test]
    fn membership_of_f1_kernel_wedge() {
        // α'_1∧β'_1∧β'_2 with β'_2 in the image of δ - I and the rest in its kernel.
        let curve = builtin_graph("theta-w1").unwrap();
        let t = builtin_table("theta-w1").unwrap();
        let data = CurveData::new(&curve, HomologyBasis::from_ref(&curve, &t.basis_ref).unwrap()).unwrap();
        let b = t.basis_change.as_ref().unwrap();
        let x = WedgeVector::monomial(8, &[0, 4, 5]).apply(b);
        assert_eq!(data.action.h1_order(&x).unwrap(), Some(BigInt::one()));
        let test = in_abar_test(&data, &x).unwrap();
        assert!(test.in_abar);
    }

    #[test]
    fn singular_q_rejected_for_u() {
        let curve = builtin_graph("theta-w1").unwrap();
        let t = builtin_table("theta-w1").unwrap();
        let data = CurveData::new(&curve, HomologyBasis::from_ref(&curve, &t.basis_ref).unwrap()).unwrap();
        assert!(matches!(u_class(&data, &zero_class(4)), Err(Error::SingularPolarization { .. })));
        assert!(matches!(zharkov_test(&data, &zero_class(4)), Err(Error::SingularPolarization { .. })));
    }
}
