//! Vertex-weighted metric graphs and their combinatorics.

use crate::arith::{lcm_all, rational_json};
use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BTreeMap;

/// Orders identifiers treating runs of digits as numbers, so `e2 < e10`.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    let (mut x, mut y) = (a.as_bytes(), b.as_bytes());
    loop {
        match (x.first(), y.first()) {
            (None, None) => return a.cmp(b),
            (None, _) => return Ordering::Less,
            (_, None) => return Ordering::Greater,
            (Some(c), Some(d)) if c.is_ascii_digit() && d.is_ascii_digit() => {
                let nx = x.iter().take_while(|c| c.is_ascii_digit()).count();
                let ny = y.iter().take_while(|c| c.is_ascii_digit()).count();
                let (dx, dy) = (&x[..nx], &y[..ny]);
                let tx = dx.iter().skip_while(|&&c| c == b'0').count();
                let ty = dy.iter().skip_while(|&&c| c == b'0').count();
                let o = tx.cmp(&ty).then_with(|| dx[nx - tx..].cmp(&dy[ny - ty..]));
                if o != Ordering::Equal {
                    return o;
                }
                x = &x[nx..];
                y = &y[ny..];
            }
            (Some(c), Some(d)) => {
                if c != d {
                    return c.cmp(d);
                }
                x = &x[1..];
                y = &y[1..];
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub weight: u64,
}

/// Edge as it appears in graph files: endpoints by vertex id.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: [String; 2],
    #[serde(with = "rational_json")]
    pub length: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: BigRational,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn other_end(&self, v: usize) -> usize {
        if self.tail == v {
            self.head
        } else {
            self.tail
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    vertices: Vec<VertexFile>,
    edges: Vec<EdgeSpec>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexFile {
    id: String,
    #[serde(default)]
    weight: i64,
}

/// A connected vertex-weighted graph with positive rational edge lengths.
///
/// Vertices and edges are kept sorted by id. Edges are oriented tail to head;
/// orientation only fixes the sign of cycle coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropicalCurve {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl TropicalCurve {
    pub fn new(mut vertices: Vec<Vertex>, mut specs: Vec<EdgeSpec>) -> Result<Self> {
        vertices.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        specs.sort_by(|a, b| natural_cmp(&a.id, &b.id));
        if vertices.is_empty() {
            return Err(Error::Schema("graph has no vertices".into()));
        }
        for w in vertices.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Schema(format!("duplicate vertex id {}", w[0].id)));
            }
        }
        for w in specs.windows(2) {
            if w[0].id == w[1].id {
                return Err(Error::Schema(format!("duplicate edge id {}", w[0].id)));
            }
        }
        let index: BTreeMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        let mut edges = Vec::with_capacity(specs.len());
        for s in specs {
            let find = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("edge {} references unknown vertex {id}", s.id)))
            };
            let (tail, head) = (find(&s.ends[0])?, find(&s.ends[1])?);
            if !s.length.is_positive() {
                return Err(Error::NonPositiveLength(s.id));
            }
            edges.push(Edge { id: s.id, tail, head, length: s.length });
        }
        let curve = TropicalCurve { vertices, edges };
        if !curve.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(curve)
    }

    /// Convenience constructor: `(id, weight)` vertices and `(id, tail, head, length)` edges.
    pub fn build(vertices: &[(&str, u64)], edges: &[(&str, &str, &str, &str)]) -> Result<Self> {
        let vs = vertices.iter().map(|&(id, w)| Vertex { id: id.into(), weight: w }).collect();
        let es = edges
            .iter()
            .map(|&(id, a, b, l)| {
                Ok(EdgeSpec { id: id.into(), ends: [a.into(), b.into()], length: crate::arith::parse_rational(l)? })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vs, es)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let f: GraphFile = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        let mut vs = Vec::with_capacity(f.vertices.len());
        for v in f.vertices {
            if v.weight < 0 {
                return Err(Error::NegativeWeight(v.id));
            }
            vs.push(Vertex { id: v.id, weight: v.weight as u64 });
        }
        Self::new(vs, f.edges)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let f = GraphFile {
            vertices: self.vertices.iter().map(|v| VertexFile { id: v.id.clone(), weight: v.weight as i64 }).collect(),
            edges: self.edge_specs(),
        };
        serde_json::to_value(f).expect("graph serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    pub fn edge_specs(&self) -> Vec<EdgeSpec> {
        self.edges
            .iter()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                ends: [self.vertices[e.tail].id.clone(), self.vertices[e.head].id.clone()],
                length: e.length.clone(),
            })
            .collect()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn lengths(&self) -> Vec<BigRational> {
        self.edges.iter().map(|e| e.length.clone()).collect()
    }

    /// Same graph with new edge lengths, given in edge order.
    pub fn with_lengths(&self, lengths: &[BigRational]) -> Result<Self> {
        if lengths.len() != self.edges.len() {
            return Err(Error::Schema(format!(
                "expected {} lengths, got {}",
                self.edges.len(),
                lengths.len()
            )));
        }
        let mut c = self.clone();
        for (e, l) in c.edges.iter_mut().zip(lengths) {
            if !l.is_positive() {
                return Err(Error::NonPositiveLength(e.id.clone()));
            }
            e.length = l.clone();
        }
        Ok(c)
    }

    /// Lengths multiplied by the least common denominator, with that scale factor.
    pub fn integer_lengths(&self) -> (Vec<BigInt>, BigInt) {
        let scale = lcm_all(self.edges.iter().map(|e| e.length.denom()));
        let ls = self.edges.iter().map(|e| (&e.length * BigRational::from_integer(scale.clone())).to_integer()).collect();
        (ls, scale)
    }

    pub fn total_weight(&self) -> u64 {
        self.vertices.iter().map(|v| v.weight).sum()
    }

    /// First Betti number `|E| - |V| + 1` of the underlying graph.
    pub fn first_betti(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    /// `|E| - |V| + 1 + sum of weights`.
    pub fn genus(&self) -> usize {
        self.first_betti() + self.total_weight() as usize
    }

    /// Valence with loops counted twice.
    pub fn valence(&self, v: usize) -> usize {
        self.edges.iter().map(|e| (e.tail == v) as usize + (e.head == v) as usize).sum()
    }

    pub fn is_stable(&self) -> bool {
        (0..self.vertices.len()).all(|v| 2 * self.vertices[v].weight as usize + self.valence(v) >= 3)
    }

    fn is_connected(&self) -> bool {
        self.components_without(&[]) == 1
    }

    /// Number of connected components after deleting the given edges.
    pub fn components_without(&self, removed: &[usize]) -> usize {
        let mut uf = UnionFind::new(self.vertices.len());
        for (i, e) in self.edges.iter().enumerate() {
            if !removed.contains(&i) {
                uf.union(e.tail, e.head);
            }
        }
        uf.count()
    }

    /// The unique stable model: weight-0 leaves are removed and weight-0
    /// 2-valent vertices suppressed until every vertex is stable.
    ///
    /// A suppressed vertex merges its two edges into the one with the smaller id.
    pub fn stabilize(&self) -> Result<TropicalCurve> {
        let g = self.genus();
        if g < 2 {
            return Err(Error::GenusTooSmall(g));
        }
        let mut vertices: Vec<Option<Vertex>> = self.vertices.iter().cloned().map(Some).collect();
        let mut edges: Vec<Option<Edge>> = self.edges.iter().cloned().map(Some).collect();
        let valence = |edges: &[Option<Edge>], v: usize| -> usize {
            edges.iter().flatten().map(|e| (e.tail == v) as usize + (e.head == v) as usize).sum()
        };
        loop {
            let leaf = (0..vertices.len()).find(|&v| {
                matches!(&vertices[v], Some(x) if x.weight == 0) && valence(&edges, v) == 1
            });
            if let Some(v) = leaf {
                let e = edges.iter().position(|e| matches!(e, Some(e) if e.tail == v || e.head == v)).unwrap();
                edges[e] = None;
                vertices[v] = None;
                continue;
            }
            let smooth = (0..vertices.len()).find(|&v| {
                matches!(&vertices[v], Some(x) if x.weight == 0)
                    && valence(&edges, v) == 2
                    && !edges.iter().flatten().any(|e| e.is_loop() && e.tail == v)
            });
            let Some(v) = smooth else { break };
            let inc: Vec<usize> = (0..edges.len())
                .filter(|&i| matches!(&edges[i], Some(e) if e.tail == v || e.head == v))
                .collect();
            let (a, b) = (inc[0], inc[1]);
            let (keep, drop) = if natural_cmp(&self.edges[a].id, &self.edges[b].id) == Ordering::Less {
                (a, b)
            } else {
                (b, a)
            };
            let ek = edges[keep].take().unwrap();
            let ed = edges[drop].take().unwrap();
            let far = ed.other_end(v);
            let (tail, head) = if ek.tail == v { (far, ek.head) } else { (ek.tail, far) };
            edges[keep] = Some(Edge { id: ek.id, tail, head, length: ek.length + ed.length });
            vertices[v] = None;
        }
        let vs: Vec<Vertex> = vertices.iter().flatten().cloned().collect();
        let specs = edges
            .iter()
            .flatten()
            .map(|e| EdgeSpec {
                id: e.id.clone(),
                ends: [self.vertices[e.tail].id.clone(), self.vertices[e.head].id.clone()],
                length: e.length.clone(),
            })
            .collect();
        TropicalCurve::new(vs, specs)
    }

    /// All spanning trees, each as a sorted list of edge indices.
    pub fn spanning_trees(&self) -> Vec<Vec<usize>> {
        let need = self.vertices.len() - 1;
        let candidates: Vec<usize> = (0..self.edges.len()).filter(|&i| !self.edges[i].is_loop()).collect();
        let mut out = Vec::new();
        let mut chosen = Vec::new();
        let uf = UnionFind::new(self.vertices.len());
        self.trees_rec(&candidates, 0, need, &mut chosen, uf, &mut out);
        out
    }

    fn trees_rec(
        &self,
        cand: &[usize],
        pos: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        uf: UnionFind,
        out: &mut Vec<Vec<usize>>,
    ) {
        if chosen.len() == need {
            out.push(chosen.clone());
            return;
        }
        if cand.len() - pos < need - chosen.len() {
            return;
        }
        let e = &self.edges[cand[pos]];
        if uf.find(e.tail) != uf.find(e.head) {
            let mut u2 = uf.clone();
            u2.union(e.tail, e.head);
            chosen.push(cand[pos]);
            self.trees_rec(cand, pos + 1, need, chosen, u2, out);
            chosen.pop();
        }
        self.trees_rec(cand, pos + 1, need, chosen, uf, out);
    }

    /// First Symanzik polynomial `sum over spanning trees T of prod_{e not in T} c_e`.
    pub fn symanzik(&self) -> BigRational {
        let mut total = BigRational::zero();
        for t in self.spanning_trees() {
            let mut p = BigRational::one();
            for (i, e) in self.edges.iter().enumerate() {
                if !t.contains(&i) {
                    p *= &e.length;
                }
            }
            total += p;
        }
        total
    }

    /// Indices of bridges (edges whose removal disconnects the graph).
    pub fn separating_edges(&self) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| !self.edges[i].is_loop() && self.components_without(&[i]) > 1)
            .collect()
    }

    /// Pairs `{e, σ(e)}` with `e ≠ σ(e)`, neither a bridge, whose joint removal disconnects.
    pub fn separating_pairs(&self, sigma: &Involution) -> Vec<(usize, usize)> {
        let bridges = self.separating_edges();
        let mut out = Vec::new();
        for e in 0..self.edges.len() {
            let f = sigma.edge_map[e];
            if e < f && !bridges.contains(&e) && !bridges.contains(&f) && self.components_without(&[e, f]) > 1 {
                out.push((e, f));
            }
        }
        out
    }

    /// Contracts every bridge; weights of merged vertices add up.
    ///
    /// Each merged vertex keeps the smallest id of its class.
    pub fn two_edge_connectivization(&self) -> TropicalCurve {
        let bridges = self.separating_edges();
        let mut uf = UnionFind::new(self.vertices.len());
        for &b in &bridges {
            uf.union(self.edges[b].tail, self.edges[b].head);
        }
        let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            rep.entry(uf.find(v)).or_insert(v);
        }
        let mut weight: BTreeMap<usize, u64> = BTreeMap::new();
        for v in 0..self.vertices.len() {
            *weight.entry(rep[&uf.find(v)]).or_default() += self.vertices[v].weight;
        }
        let vs = weight
            .iter()
            .map(|(&v, &w)| Vertex { id: self.vertices[v].id.clone(), weight: w })
            .collect();
        let specs = self
            .edges
            .iter()
            .enumerate()
            .filter(|(i, _)| !bridges.contains(i))
            .map(|(_, e)| EdgeSpec {
                id: e.id.clone(),
                ends: [
                    self.vertices[rep[&uf.find(e.tail)]].id.clone(),
                    self.vertices[rep[&uf.find(e.head)]].id.clone(),
                ],
                length: e.length.clone(),
            })
            .collect();
        TropicalCurve::new(vs, specs).expect("contraction keeps the graph connected")
    }

    /// Unordered endpoint pair of an edge.
    fn end_pair(&self, e: usize) -> (usize, usize) {
        let e = &self.edges[e];
        (e.tail.min(e.head), e.tail.max(e.head))
    }

    /// Every length-preserving automorphism of order at most two fixing the
    /// positive-weight vertices whose quotient is a tree.
    pub fn hyperelliptic_involutions(&self) -> Result<Vec<Involution>> {
        let mut out = Vec::new();
        self.search_involutions(&mut |inv| {
            if inv.quotient_betti(self) == 0 {
                out.push(inv.clone());
            }
            true
        })?;
        Ok(out)
    }

    pub fn is_hyperelliptic(&self) -> Result<bool> {
        let mut found = false;
        self.search_involutions(&mut |inv| {
            found = inv.quotient_betti(self) == 0;
            !found
        })?;
        Ok(found)
    }

    /// Every length-preserving involutive automorphism fixing positive-weight vertices.
    pub fn involutions(&self) -> Result<Vec<Involution>> {
        let mut out = Vec::new();
        self.search_involutions(&mut |inv| {
            out.push(inv.clone());
            true
        })?;
        Ok(out)
    }

    /// Calls `visit` for each involution until it returns `false`.
    fn search_involutions(&self, visit: &mut dyn FnMut(&Involution) -> bool) -> Result<()> {
        if !self.is_stable() {
            let v = (0..self.vertices.len())
                .find(|&v| 2 * self.vertices[v].weight as usize + self.valence(v) < 3)
                .unwrap();
            return Err(Error::NotStable(self.vertices[v].id.clone()));
        }
        let n = self.vertices.len();
        let sig: Vec<(u64, usize, usize)> = (0..n)
            .map(|v| {
                let loops = self.edges.iter().filter(|e| e.is_loop() && e.tail == v).count();
                (self.vertices[v].weight, self.valence(v), loops)
            })
            .collect();
        let mut vmap: Vec<Option<usize>> = vec![None; n];
        let mut keep_going = true;
        self.vertex_involutions(0, &sig, &mut vmap, &mut |vm| {
            if keep_going {
                keep_going = self.edge_involutions(vm, visit);
            }
            keep_going
        });
        Ok(())
    }

    fn vertex_involutions(
        &self,
        v: usize,
        sig: &[(u64, usize, usize)],
        vmap: &mut Vec<Option<usize>>,
        f: &mut dyn FnMut(&[usize]) -> bool,
    ) -> bool {
        let n = vmap.len();
        if v == n {
            let vm: Vec<usize> = vmap.iter().map(|x| x.unwrap()).collect();
            return f(&vm);
        }
        if vmap[v].is_some() {
            return self.vertex_involutions(v + 1, sig, vmap, f);
        }
        vmap[v] = Some(v);
        if !self.vertex_involutions(v + 1, sig, vmap, f) {
            return false;
        }
        vmap[v] = None;
        if sig[v].0 == 0 {
            for u in v + 1..n {
                if vmap[u].is_none() && sig[u] == sig[v] {
                    vmap[v] = Some(u);
                    vmap[u] = Some(v);
                    let go = self.vertex_involutions(v + 1, sig, vmap, f);
                    vmap[v] = None;
                    vmap[u] = None;
                    if !go {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Enumerates edge involutions compatible with a vertex involution.
    fn edge_involutions(&self, vm: &[usize], visit: &mut dyn FnMut(&Involution) -> bool) -> bool {
        let mut groups: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for e in 0..self.edges.len() {
            groups.entry(self.end_pair(e)).or_default().push(e);
        }
        let image = |p: (usize, usize)| {
            let (a, b) = (vm[p.0], vm[p.1]);
            (a.min(b), a.max(b))
        };
        // Quick rejection: each group must match its image in lengths.
        for (p, es) in &groups {
            let Some(img) = groups.get(&image(*p)) else { return true };
            let mut l1: Vec<&BigRational> = es.iter().map(|&e| &self.edges[e].length).collect();
            let mut l2: Vec<&BigRational> = img.iter().map(|&e| &self.edges[e].length).collect();
            l1.sort();
            l2.sort();
            if l1 != l2 {
                return true;
            }
        }
        let keys: Vec<(usize, usize)> = groups.keys().copied().filter(|p| *p <= image(*p)).collect();
        let mut emap: Vec<Option<usize>> = vec![None; self.edges.len()];
        self.match_groups(&keys, 0, &groups, &image, vm, &mut emap, visit)
    }

    #[allow(clippy::too_many_arguments)]
    fn match_groups(
        &self,
        keys: &[(usize, usize)],
        k: usize,
        groups: &BTreeMap<(usize, usize), Vec<usize>>,
        image: &dyn Fn((usize, usize)) -> (usize, usize),
        vm: &[usize],
        emap: &mut Vec<Option<usize>>,
        visit: &mut dyn FnMut(&Involution) -> bool,
    ) -> bool {
        if k == keys.len() {
            let edge_map: Vec<usize> = emap.iter().map(|x| x.unwrap()).collect();
            let flipped = (0..self.edges.len())
                .map(|e| {
                    let ed = &self.edges[e];
                    edge_map[e] == e && (ed.is_loop() || vm[ed.tail] == ed.head)
                })
                .collect();
            let inv = Involution { vertex_map: vm.to_vec(), edge_map, flipped };
            return visit(&inv);
        }
        let p = keys[k];
        let src = &groups[&p];
        let q = image(p);
        if q == p {
            self.pair_within(src, 0, emap, &mut |emap| {
                self.match_groups(keys, k + 1, groups, image, vm, emap, visit)
            })
        } else {
            let dst = &groups[&q];
            let mut used = vec![false; dst.len()];
            self.biject(src, 0, dst, &mut used, emap, &mut |emap| {
                self.match_groups(keys, k + 1, groups, image, vm, emap, visit)
            })
        }
    }

    fn pair_within(
        &self,
        es: &[usize],
        i: usize,
        emap: &mut Vec<Option<usize>>,
        f: &mut dyn FnMut(&mut Vec<Option<usize>>) -> bool,
    ) -> bool {
        if i == es.len() {
            return f(emap);
        }
        let e = es[i];
        if emap[e].is_some() {
            return self.pair_within(es, i + 1, emap, f);
        }
        emap[e] = Some(e);
        if !self.pair_within(es, i + 1, emap, f) {
            return false;
        }
        for &g in &es[i + 1..] {
            if emap[g].is_none() && self.edges[g].length == self.edges[e].length {
                emap[e] = Some(g);
                emap[g] = Some(e);
                let go = self.pair_within(es, i + 1, emap, f);
                emap[g] = None;
                if !go {
                    emap[e] = None;
                    return false;
                }
            }
        }
        emap[e] = None;
        true
    }

    fn biject(
        &self,
        src: &[usize],
        i: usize,
        dst: &[usize],
        used: &mut Vec<bool>,
        emap: &mut Vec<Option<usize>>,
        f: &mut dyn FnMut(&mut Vec<Option<usize>>) -> bool,
    ) -> bool {
        if i == src.len() {
            return f(emap);
        }
        let e = src[i];
        for j in 0..dst.len() {
            let g = dst[j];
            if !used[j] && self.edges[g].length == self.edges[e].length {
                used[j] = true;
                emap[e] = Some(g);
                emap[g] = Some(e);
                let go = self.biject(src, i + 1, dst, used, emap, f);
                used[j] = false;
                emap[e] = None;
                emap[g] = None;
                if !go {
                    return false;
                }
            }
        }
        true
    }
}

/// An automorphism of order at most two.
///
/// `flipped[e]` marks fixed edges whose interior is reflected: fixed edges with
/// swapped endpoints, and fixed loops.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Involution {
    pub vertex_map: Vec<usize>,
    pub edge_map: Vec<usize>,
    pub flipped: Vec<bool>,
}

impl Involution {
    pub fn identity(curve: &TropicalCurve) -> Self {
        Involution {
            vertex_map: (0..curve.num_vertices()).collect(),
            edge_map: (0..curve.num_edges()).collect(),
            flipped: curve.edges().iter().map(Edge::is_loop).collect(),
        }
    }

    /// Checks order two, incidence, lengths and weights.
    pub fn is_valid_for(&self, curve: &TropicalCurve) -> bool {
        let (vm, em) = (&self.vertex_map, &self.edge_map);
        if vm.len() != curve.num_vertices() || em.len() != curve.num_edges() {
            return false;
        }
        let order_two = vm.iter().enumerate().all(|(i, &j)| vm[j] == i) && em.iter().enumerate().all(|(i, &j)| em[j] == i);
        let weights = curve.vertices().iter().enumerate().all(|(i, v)| v.weight == 0 || vm[i] == i);
        let incidence = curve.edges().iter().enumerate().all(|(i, e)| {
            let f = &curve.edges()[em[i]];
            let (a, b) = (vm[e.tail], vm[e.head]);
            f.length == e.length && ((f.tail, f.head) == (a, b) || (f.tail, f.head) == (b, a))
        });
        order_two && weights && incidence
    }

    /// First Betti number of the quotient graph.
    pub fn quotient_betti(&self, curve: &TropicalCurve) -> usize {
        let n = curve.num_vertices();
        let orbit = |v: usize| v.min(self.vertex_map[v]);
        let mut uf = UnionFind::new(n);
        let mut nv = 0;
        for v in 0..n {
            if orbit(v) == v {
                nv += 1;
            }
        }
        let mut ne = 0;
        for (i, e) in curve.edges().iter().enumerate() {
            let j = self.edge_map[i];
            if j < i || (j == i && self.flipped[i]) {
                continue;
            }
            ne += 1;
            uf.union(orbit(e.tail), orbit(e.head));
        }
        let comps = (0..n).filter(|&v| orbit(v) == v && uf.find(v) == v).count();
        ne + comps - nv
    }
}

#[derive(Clone, Debug)]
struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&self, mut x: usize) -> usize {
        while self.parent[x] != x {
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = (ra.min(rb), ra.max(rb));
            self.parent[hi] = lo;
        }
    }

    fn count(&self) -> usize {
        (0..self.parent.len()).filter(|&i| self.find(i) == i).count()
    }
}

/// True when some weight-preserving vertex bijection carries the edge
/// multiset (endpoints and lengths) of `a` onto that of `b`.
pub fn is_isomorphic(a: &TropicalCurve, b: &TropicalCurve) -> bool {
    if a.num_vertices() != b.num_vertices() || a.num_edges() != b.num_edges() {
        return false;
    }
    let n = a.num_vertices();
    let key = |c: &TropicalCurve, v: usize| (c.vertices[v].weight, c.valence(v));
    let mut m: Vec<Option<usize>> = vec![None; n];
    let mut used = vec![false; n];
    fn edges_between(c: &TropicalCurve, x: usize, y: usize) -> Vec<BigRational> {
        let mut v: Vec<BigRational> = c
            .edges
            .iter()
            .filter(|e| (e.tail, e.head) == (x, y) || (e.tail, e.head) == (y, x))
            .map(|e| e.length.clone())
            .collect();
        v.sort();
        v
    }
    fn rec(
        a: &TropicalCurve,
        b: &TropicalCurve,
        v: usize,
        m: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        key: &dyn Fn(&TropicalCurve, usize) -> (u64, usize),
    ) -> bool {
        let n = m.len();
        if v == n {
            return true;
        }
        for w in 0..n {
            if used[w] || key(a, v) != key(b, w) {
                continue;
            }
            m[v] = Some(w);
            let ok = (0..=v).all(|u| edges_between(a, u, v) == edges_between(b, m[u].unwrap(), w));
            if ok {
                used[w] = true;
                if rec(a, b, v + 1, m, used, key) {
                    return true;
                }
                used[w] = false;
            }
            m[v] = None;
        }
        false
    }
    rec(a, b, 0, &mut m, &mut used, &key)
}
