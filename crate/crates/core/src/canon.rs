//! Canonical signatures and isomorphism of decorated graphs.
//!
//! Vertices are pieces and rays. A vertex is decorated by its kind and, for
//! fibered pieces, the base orbifold; a ray by the primitive period of its
//! (base, fiber intersection) sequence. Each torus carries the matrix of
//! intersection numbers between the distinguished slopes on its two sides:
//! the fiber of a fibered piece, the meridian of a solid torus, the two
//! fibers of K²×~I. Between two fibered pieces this is the single number
//! `|M[0][1]|`. Gluing matrices themselves are not part of the invariant,
//! since the section curves they are written in are not canonical; nor is
//! the base orientation flag of an edge, which depends on a choice of
//! orientation of each base.
//!
//! The signature is therefore an invariant of the decorated graph, not a
//! complete invariant of the manifold.
//!
//! Labels are found by colour refinement followed by individualisation with
//! backtracking, pruned by the automorphisms discovered along the way. The
//! signature is the smallest encoding over all leaves of the search tree.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::graph::{EdgeId, GraphStructure, PieceId, RayId};
use crate::lattice::{GluingMatrix, Slope};
use crate::seifert::{fiber_intersection, Piece};

/// A canonical byte string; equal for isomorphic decorated graphs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Signature(Vec<u8>);

impl Signature {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.0)
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

/// A decoration-preserving bijection between two structures.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Isomorphism {
    pub pieces: BTreeMap<PieceId, PieceId>,
    pub edges: BTreeMap<EdgeId, EdgeId>,
    pub rays: BTreeMap<RayId, RayId>,
}

/// Distinguished slopes of a piece in its own boundary basis.
fn slopes(piece: &Piece) -> Vec<Slope> {
    match piece {
        Piece::Fibered(_) => vec![Slope::FIBER],
        Piece::SolidTorus(v) => vec![v.meridian],
        Piece::K2I(_) => vec![Slope::FIBER, Slope::SECTION],
    }
}

/// `|(M·u) ∧ v|` for every pair of distinguished slopes.
fn intersections(us: &[Slope], m: &GluingMatrix, vs: &[Slope]) -> Vec<Vec<u128>> {
    us.iter()
        .map(|u| {
            let image = m.matrix().checked_apply(*u);
            vs.iter()
                .map(|v| match image {
                    Some(w) => w.intersection(v),
                    None => u128::MAX,
                })
                .collect()
        })
        .collect()
}

fn transpose(rows: &[Vec<u128>]) -> Vec<Vec<u128>> {
    let width = rows.first().map_or(0, Vec::len);
    (0..width)
        .map(|j| rows.iter().map(|r| r[j]).collect())
        .collect()
}

fn render(rows: &[Vec<u128>]) -> String {
    rows.iter()
        .map(|r| r.iter().map(u128::to_string).collect::<Vec<_>>().join(","))
        .collect::<Vec<_>>()
        .join(";")
}

fn piece_decoration(piece: &Piece) -> String {
    match piece {
        Piece::Fibered(p) => format!("F[{}]", p.base),
        Piece::SolidTorus(_) => "V".to_string(),
        Piece::K2I(_) => "K".to_string(),
    }
}

fn ray_decoration(period: &[(crate::seifert::FiberedPiece, GluingMatrix)]) -> String {
    let items: Vec<String> = period
        .iter()
        .map(|(p, m)| format!("{}/{}", p.base, fiber_intersection(m)))
        .collect();
    // The shortest block whose repetition gives the same infinite sequence.
    let n = items.len();
    let root = (1..=n)
        .find(|&k| n.is_multiple_of(k) && (0..n).all(|i| items[i] == items[i % k]))
        .unwrap_or(n);
    format!("R[{}]", items[..root].join("|"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum EdgeKind {
    Torus,
    Loop,
    RayAttach,
}

struct EdgeRec {
    u: usize,
    v: usize,
    /// Invariant read from `u` towards `v`, and from `v` towards `u`.
    uv: String,
    vu: String,
    kind: EdgeKind,
    id: String,
}

/// The decorated multigraph extracted from a structure.
struct Decorated {
    ids: Vec<String>,
    deco: Vec<String>,
    edges: Vec<EdgeRec>,
    /// Per vertex: (edge index, other endpoint, invariant rank from here).
    adj: Vec<Vec<(usize, usize, u32)>>,
    n_pieces: usize,
}

impl Decorated {
    fn new(g: &GraphStructure) -> Self {
        let mut ids = Vec::new();
        let mut deco = Vec::new();
        let mut index = HashMap::new();
        for (id, p) in g.pieces() {
            index.insert(id.clone(), ids.len());
            ids.push(id.clone());
            deco.push(piece_decoration(p));
        }
        let n_pieces = ids.len();
        let mut edges = Vec::new();
        for e in g.edges().values() {
            let (Some(&u), Some(&v)) = (index.get(&e.a.piece), index.get(&e.b.piece)) else {
                continue;
            };
            let pa = &g.pieces()[&e.a.piece];
            let pb = &g.pieces()[&e.b.piece];
            let rows = intersections(&slopes(pa), &e.matrix, &slopes(pb));
            let (uv, vu, kind) = if u == v {
                let a = render(&rows);
                let b = render(&transpose(&rows));
                let s = a.min(b);
                (s.clone(), s, EdgeKind::Loop)
            } else {
                (render(&rows), render(&transpose(&rows)), EdgeKind::Torus)
            };
            edges.push(EdgeRec {
                u,
                v,
                uv,
                vu,
                kind,
                id: e.id.clone(),
            });
        }
        for r in g.rays().values() {
            let Some(&u) = index.get(&r.attach.piece) else {
                continue;
            };
            let v = ids.len();
            ids.push(r.id.clone());
            deco.push(ray_decoration(&r.period));
            let anchor = &g.pieces()[&r.attach.piece];
            let rows = match r.period.first() {
                Some((_, m)) => intersections(&slopes(anchor), m, &[Slope::FIBER]),
                None => Vec::new(),
            };
            edges.push(EdgeRec {
                u,
                v,
                uv: render(&rows),
                vu: render(&transpose(&rows)),
                kind: EdgeKind::RayAttach,
                id: r.id.clone(),
            });
        }

        let mut labels: Vec<(EdgeKind, &str)> = edges
            .iter()
            .flat_map(|e| [(e.kind, e.uv.as_str()), (e.kind, e.vu.as_str())])
            .collect();
        labels.sort();
        labels.dedup();
        let rank =
            |k: EdgeKind, s: &str| labels.binary_search(&(k, s)).expect("label present") as u32;
        let mut adj = vec![Vec::new(); ids.len()];
        for (i, e) in edges.iter().enumerate() {
            adj[e.u].push((i, e.v, rank(e.kind, &e.uv)));
            if e.u != e.v {
                adj[e.v].push((i, e.u, rank(e.kind, &e.vu)));
            }
        }
        Decorated {
            ids,
            deco,
            edges,
            adj,
            n_pieces,
        }
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    fn initial_colors(&self) -> Vec<u32> {
        let mut distinct: Vec<&str> = self.deco.iter().map(String::as_str).collect();
        distinct.sort();
        distinct.dedup();
        self.deco
            .iter()
            .map(|d| distinct.binary_search(&d.as_str()).expect("present") as u32)
            .collect()
    }

    /// Colour refinement to a stable partition. Colours are ranks of
    /// label-independent signatures, so they are canonical.
    fn refine(&self, mut colors: Vec<u32>) -> Vec<u32> {
        let mut count = distinct_count(&colors);
        loop {
            let sigs: Vec<(u32, Vec<(u32, u32)>)> = (0..self.n())
                .map(|x| {
                    let mut nb: Vec<(u32, u32)> = self.adj[x]
                        .iter()
                        .map(|&(_, y, r)| (r, colors[y]))
                        .collect();
                    nb.sort_unstable();
                    (colors[x], nb)
                })
                .collect();
            let mut order: Vec<&(u32, Vec<(u32, u32)>)> = sigs.iter().collect();
            order.sort();
            order.dedup();
            let next: Vec<u32> = sigs
                .iter()
                .map(|s| order.binary_search(&s).expect("present") as u32)
                .collect();
            let next_count = order.len();
            colors = next;
            if next_count == count {
                return colors;
            }
            count = next_count;
        }
    }

    /// Encoding of the graph under a labelling (`label[v]` = position).
    fn encode(&self, label: &[u32]) -> Vec<u8> {
        let mut by_label = vec![0usize; self.n()];
        for (v, &l) in label.iter().enumerate() {
            by_label[l as usize] = v;
        }
        let mut out = String::from("gsig1\n");
        for &v in &by_label {
            out.push_str(&self.deco[v]);
            out.push('\n');
        }
        let mut edges: Vec<(u32, u32, EdgeKind, &str)> = self
            .edges
            .iter()
            .map(|e| {
                let (lu, lv) = (label[e.u], label[e.v]);
                if lu <= lv {
                    (lu, lv, e.kind, e.uv.as_str())
                } else {
                    (lv, lu, e.kind, e.vu.as_str())
                }
            })
            .collect();
        edges.sort();
        for (a, b, k, inv) in edges {
            let tag = match k {
                EdgeKind::Torus => 'e',
                EdgeKind::Loop => 'l',
                EdgeKind::RayAttach => 'r',
            };
            out.push_str(&format!("{tag} {a} {b} {inv}\n"));
        }
        out.into_bytes()
    }
}

fn distinct_count(colors: &[u32]) -> usize {
    let mut c = colors.to_vec();
    c.sort_unstable();
    c.dedup();
    c.len()
}

fn individualize(colors: &[u32], v: usize) -> Vec<u32> {
    let c = colors[v];
    colors
        .iter()
        .enumerate()
        .map(|(x, &k)| if k < c || x == v { k } else { k + 1 })
        .collect()
}

struct Search<'a> {
    g: &'a Decorated,
    best: Option<(Vec<u8>, Vec<u32>, Vec<usize>)>,
    autos: Vec<Vec<usize>>,
}

impl Search<'_> {
    /// Returns the depth to jump back to after an automorphism was found.
    fn run(&mut self, colors: Vec<u32>, path: &mut Vec<usize>) -> Option<usize> {
        let colors = self.g.refine(colors);
        let n = self.g.n();
        if distinct_count(&colors) == n {
            let enc = self.g.encode(&colors);
            match &self.best {
                None => self.best = Some((enc, colors, path.clone())),
                Some((best, best_label, best_path)) => {
                    if enc == *best {
                        // Same graph under two labellings: an automorphism.
                        let mut at_label = vec![0usize; n];
                        for (v, &l) in best_label.iter().enumerate() {
                            at_label[l as usize] = v;
                        }
                        let perm: Vec<usize> =
                            colors.iter().map(|&l| at_label[l as usize]).collect();
                        let diverge = path
                            .iter()
                            .zip(best_path)
                            .position(|(a, b)| a != b)
                            .unwrap_or(path.len().min(best_path.len()));
                        self.autos.push(perm);
                        return Some(diverge);
                    }
                    if enc < *best {
                        self.best = Some((enc, colors, path.clone()));
                    }
                }
            }
            return None;
        }

        // First smallest non-singleton cell.
        let mut sizes: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (v, &c) in colors.iter().enumerate() {
            sizes.entry(c).or_default().push(v);
        }
        let cell = sizes
            .values()
            .filter(|m| m.len() > 1)
            .min_by_key(|m| m.len())
            .cloned()
            .expect("non-discrete partition has a non-singleton cell");

        let depth = path.len();
        let mut visited: Vec<usize> = Vec::new();
        for v in cell {
            if !visited.is_empty() {
                let orbit_of = self.orbits(path);
                if visited.iter().any(|&w| orbit_of[w] == orbit_of[v]) {
                    continue;
                }
            }
            visited.push(v);
            path.push(v);
            let jump = self.run(individualize(&colors, v), path);
            path.pop();
            if let Some(d) = jump {
                if d < depth {
                    return Some(d);
                }
            }
        }
        None
    }

    /// Orbit representatives under the automorphisms found so far that fix
    /// every vertex of `path`.
    fn orbits(&self, path: &[usize]) -> Vec<usize> {
        let n = self.g.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for perm in &self.autos {
            if path.iter().any(|&v| perm[v] != v) {
                continue;
            }
            for (x, &y) in perm.iter().enumerate() {
                let (a, b) = (find(&mut parent, x), find(&mut parent, y));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
        (0..n).map(|x| find(&mut parent, x)).collect()
    }
}

/// Canonical labelling: the encoding and, per vertex, its label.
fn canonical(d: &Decorated) -> (Vec<u8>, Vec<u32>) {
    let mut search = Search {
        g: d,
        best: None,
        autos: Vec::new(),
    };
    search.run(d.initial_colors(), &mut Vec::new());
    match search.best {
        Some((enc, label, _)) => (enc, label),
        None => (d.encode(&[]), Vec::new()),
    }
}

/// The canonical signature of `g`.
pub fn signature(g: &GraphStructure) -> Signature {
    Signature(canonical(&Decorated::new(g)).0)
}

/// Decides isomorphism and, when the structures are isomorphic, returns a
/// decoration-preserving bijection of pieces, edges and rays.
pub fn isomorphic(g1: &GraphStructure, g2: &GraphStructure) -> Option<Isomorphism> {
    let d1 = Decorated::new(g1);
    let d2 = Decorated::new(g2);
    if d1.n() != d2.n() || d1.edges.len() != d2.edges.len() || d1.n_pieces != d2.n_pieces {
        return None;
    }
    let (e1, l1) = canonical(&d1);
    let (e2, l2) = canonical(&d2);
    if e1 != e2 {
        return None;
    }
    let mut at_label = vec![0usize; d2.n()];
    for (v, &l) in l2.iter().enumerate() {
        at_label[l as usize] = v;
    }
    let vmap: Vec<usize> = l1.iter().map(|&l| at_label[l as usize]).collect();

    let mut iso = Isomorphism::default();
    for (v, &w) in vmap.iter().enumerate() {
        if v < d1.n_pieces {
            iso.pieces.insert(d1.ids[v].clone(), d2.ids[w].clone());
        } else {
            iso.rays.insert(d1.ids[v].clone(), d2.ids[w].clone());
        }
    }
    // Parallel edges with equal invariants are interchangeable; pair them
    // in id order.
    let key = |e: &EdgeRec, u: usize, v: usize| {
        if u <= v {
            (u, v, e.kind, e.uv.clone())
        } else {
            (v, u, e.kind, e.vu.clone())
        }
    };
    let mut pool: BTreeMap<(usize, usize, EdgeKind, String), Vec<&str>> = BTreeMap::new();
    for e in d2.edges.iter().filter(|e| e.kind != EdgeKind::RayAttach) {
        pool.entry(key(e, e.u, e.v)).or_default().push(&e.id);
    }
    for e in d1.edges.iter().filter(|e| e.kind != EdgeKind::RayAttach) {
        let k = key(e, vmap[e.u], vmap[e.v]);
        let target = pool.get_mut(&k).and_then(|ids| {
            if ids.is_empty() {
                None
            } else {
                Some(ids.remove(0))
            }
        })?;
        iso.edges.insert(e.id.clone(), target.to_string());
    }
    Some(iso)
}
