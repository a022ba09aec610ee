//! Independent oracles shared by the integration tests.
//!
//! Nothing here calls the library's own invariants; the oracles recompute
//! from raw fields with their own arithmetic.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use graphmfd::graph::{Endpoint, GraphStructure, PeriodicRay, TorusEdge};
use graphmfd::lattice::{GluingMatrix, IntMatrix2};
use graphmfd::orbifold::BaseOrbifold;
use graphmfd::seifert::Piece;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

// ---------------------------------------------------------------------------
// Orbifold Euler characteristic from the defining formula.

pub fn euler_char(o: &BaseOrbifold) -> BigRational {
    let int = |n: i64| BigRational::from_integer(n.into());
    let surface = if o.orientable() {
        2 - 2 * i64::from(o.genus())
    } else {
        2 - i64::from(o.genus())
    } - i64::from(o.boundary_count())
        - i64::from(o.end_count());
    let mut chi = int(surface);
    for &q in o.cones() {
        chi -= BigRational::one() - BigRational::new(1.into(), i64::from(q).into());
    }
    chi
}

pub fn piece_euler_char(p: &Piece) -> BigRational {
    match p {
        Piece::Fibered(f) => euler_char(&f.base),
        Piece::SolidTorus(_) | Piece::K2I(_) => BigRational::zero(),
    }
}

pub fn total_euler_char(g: &GraphStructure) -> BigRational {
    g.pieces().values().map(piece_euler_char).sum()
}

pub fn total_ends(g: &GraphStructure) -> u64 {
    let pieces: u64 = g
        .pieces()
        .values()
        .map(|p| match p {
            Piece::Fibered(f) => u64::from(f.base.end_count()),
            _ => 0,
        })
        .sum();
    pieces + g.rays().len() as u64
}

/// The nine thin bases, written out by hand. `None` for every other base.
pub fn expected_thin(o: &BaseOrbifold) -> Option<&'static str> {
    let cones = o.cones();
    let (b, e) = (o.boundary_count(), o.end_count());
    if o.orientable() && o.genus() == 0 {
        let at_most_one = cones.len() <= 1;
        let two_twos = cones == [2, 2];
        match (b, e) {
            (1, 0) if at_most_one => Some("disk with at most one cone"),
            (0, 1) if at_most_one => Some("plane with at most one cone"),
            (1, 0) if two_twos => Some("disk with two order-2 cones"),
            (0, 1) if two_twos => Some("plane with two order-2 cones"),
            (2, 0) if cones.is_empty() => Some("annulus"),
            (1, 1) if cones.is_empty() => Some("half-infinite annulus"),
            (0, 2) if cones.is_empty() => Some("bi-infinite annulus"),
            _ => None,
        }
    } else if !o.orientable() && o.genus() == 1 && cones.is_empty() {
        match (b, e) {
            (1, 0) => Some("Moebius band"),
            (0, 1) => Some("open Moebius band"),
            _ => None,
        }
    } else {
        None
    }
}

// ---------------------------------------------------------------------------
// Smith normal form over the integers.

/// Diagonal of the Smith normal form of an integer matrix.
#[allow(clippy::needless_range_loop)]
pub fn smith_diagonal(mut a: Vec<Vec<i128>>) -> Vec<i128> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // Pivot: the smallest nonzero entry of the remaining block.
        let mut pivot = None;
        for i in t..rows {
            for j in t..cols {
                if a[i][j] != 0
                    && pivot.is_none_or(|(pi, pj): (usize, usize)| a[i][j].abs() < a[pi][pj].abs())
                {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = a[i][t] / p;
                for j in t..cols {
                    a[i][j] -= q * a[t][j];
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                for i in t..rows {
                    a[i][j] -= q * a[i][t];
                }
                dirty |= a[t][j] != 0;
            }
            if !dirty {
                // Divisibility of the rest of the block by the pivot.
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            // Move the smallest nonzero entry of row/column t to the pivot.
            let mut best = (t, t);
            for i in t..rows {
                if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            a.swap(t, best.0);
            for row in a.iter_mut() {
                row.swap(t, best.1);
            }
        }
        diag.push(a[t][t].abs());
        t += 1;
    }
    diag
}

/// Order of the fiber class in the first homology of the solid torus.
///
/// `H₁(V)` is `Z²` on the boundary basis of `V` modulo the meridian. The
/// fiber of the piece enters `V` as `M·(0,1)`. The quotient by the fiber is
/// presented by the two rows below; its order is the multiplicity of the
/// core as a fiber, and 0 means the quotient is infinite.
pub fn filling_torsion(meridian: (i64, i64), matrix: &IntMatrix2) -> u128 {
    let fiber_image = (i128::from(matrix.b), i128::from(matrix.d));
    let relations = vec![
        vec![i128::from(meridian.0), i128::from(meridian.1)],
        vec![fiber_image.0, fiber_image.1],
    ];
    let d = smith_diagonal(relations);
    if d.len() < 2 || d.contains(&0) {
        0
    } else {
        d.iter().map(|&x| x as u128).product()
    }
}

/// A random determinant −1 matrix, a product of elementary moves.
pub fn random_gluing(rng: &mut impl Rng, steps: usize) -> GluingMatrix {
    let mut m = IntMatrix2::new(1, 0, 0, -1);
    for _ in 0..steps {
        let k: i64 = rng.gen_range(-3..=3);
        let e = if rng.gen_bool(0.5) {
            IntMatrix2::new(1, k, 0, 1)
        } else {
            IntMatrix2::new(1, 0, k, 1)
        };
        m = if rng.gen_bool(0.5) {
            m.checked_mul(&e).unwrap()
        } else {
            e.checked_mul(&m).unwrap()
        };
    }
    GluingMatrix::from_matrix(m).unwrap()
}

// ---------------------------------------------------------------------------
// Relabelling.

/// The same structure with fresh ids, shuffled slots on every fibered piece,
/// and randomly reversed edges.
pub fn relabel(g: &GraphStructure, rng: &mut impl Rng) -> GraphStructure {
    let mut piece_names: Vec<String> = (0..g.pieces().len()).map(|i| format!("q{i}")).collect();
    piece_names.shuffle(rng);
    let rename: BTreeMap<&str, String> = g
        .pieces()
        .keys()
        .map(String::as_str)
        .zip(piece_names)
        .collect();
    let mut slot_perm: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (id, p) in g.pieces() {
        let mut perm: Vec<usize> = (0..p.slot_count()).collect();
        perm.shuffle(rng);
        slot_perm.insert(id, perm);
    }
    let map_ep = |ep: &Endpoint| {
        Endpoint::new(
            rename[ep.piece.as_str()].clone(),
            slot_perm[ep.piece.as_str()][ep.slot],
        )
    };

    let mut out = GraphStructure::new();
    for (id, p) in g.pieces() {
        out.add_piece(rename[id.as_str()].clone(), p.clone())
            .unwrap();
    }
    let mut edge_names: Vec<String> = (0..g.edges().len()).map(|i| format!("f{i}")).collect();
    edge_names.shuffle(rng);
    for (e, name) in g.edges().values().zip(edge_names) {
        let (a, b, matrix) = if rng.gen_bool(0.5) {
            (map_ep(&e.b), map_ep(&e.a), e.matrix.inverse())
        } else {
            (map_ep(&e.a), map_ep(&e.b), e.matrix)
        };
        out.add_edge(TorusEdge {
            id: name,
            a,
            b,
            matrix,
            base_reversing: e.base_reversing,
        })
        .unwrap();
    }
    let mut ray_names: Vec<String> = (0..g.rays().len()).map(|i| format!("s{i}")).collect();
    ray_names.shuffle(rng);
    for (r, name) in g.rays().values().zip(ray_names) {
        out.add_ray(PeriodicRay {
            id: name,
            attach: map_ep(&r.attach),
            period: r.period.clone(),
        })
        .unwrap();
    }
    out
}

// ---------------------------------------------------------------------------
// Exhaustive isomorphism search.

fn slopes(p: &Piece) -> Vec<(i128, i128)> {
    match p {
        Piece::Fibered(_) => vec![(0, 1)],
        Piece::SolidTorus(v) => {
            vec![(i128::from(v.meridian.section), i128::from(v.meridian.fiber))]
        }
        Piece::K2I(_) => vec![(0, 1), (1, 0)],
    }
}

fn invariant(us: &[(i128, i128)], m: &IntMatrix2, vs: &[(i128, i128)]) -> Vec<Vec<i128>> {
    let (a, b, c, d) = (
        i128::from(m.a),
        i128::from(m.b),
        i128::from(m.c),
        i128::from(m.d),
    );
    us.iter()
        .map(|&(s, f)| {
            let (x, y) = (a * s + b * f, c * s + d * f);
            vs.iter().map(|&(p, q)| (x * q - y * p).abs()).collect()
        })
        .collect()
}

fn vertex_label(p: &Piece) -> String {
    match p {
        Piece::Fibered(f) => {
            let o = &f.base;
            format!(
                "fibered {} {} {} {} {:?}",
                o.orientable(),
                o.genus(),
                o.boundary_count(),
                o.end_count(),
                o.cones()
            )
        }
        Piece::SolidTorus(_) => "solid torus".into(),
        Piece::K2I(_) => "k2i".into(),
    }
}

fn ray_label(r: &PeriodicRay) -> String {
    let items: Vec<String> = r
        .period
        .iter()
        .map(|(p, m)| {
            format!(
                "{} {}",
                vertex_label(&Piece::Fibered(p.clone())),
                m.matrix().b.abs()
            )
        })
        .collect();
    let n = items.len();
    let k = (1..=n)
        .find(|&k| n.is_multiple_of(k) && (0..n).all(|i| items[i] == items[i % k]))
        .unwrap_or(n);
    items[..k].join(" | ")
}

/// Edge list with invariants keyed by vertex index: pieces first in id
/// order, then rays in id order.
struct Flat {
    labels: Vec<String>,
    edges: Vec<(usize, usize, Vec<Vec<i128>>)>,
}

fn flatten(g: &GraphStructure) -> Flat {
    let ids: Vec<&String> = g.pieces().keys().collect();
    let index = |id: &str| ids.iter().position(|x| x.as_str() == id).unwrap();
    let mut labels: Vec<String> = g.pieces().values().map(vertex_label).collect();
    let mut edges = Vec::new();
    for e in g.edges().values() {
        let pa = &g.pieces()[&e.a.piece];
        let pb = &g.pieces()[&e.b.piece];
        edges.push((
            index(&e.a.piece),
            index(&e.b.piece),
            invariant(&slopes(pa), e.matrix.matrix(), &slopes(pb)),
        ));
    }
    for r in g.rays().values() {
        let v = labels.len();
        labels.push(format!("ray {}", ray_label(r)));
        let anchor = &g.pieces()[&r.attach.piece];
        edges.push((
            index(&r.attach.piece),
            v,
            invariant(&slopes(anchor), r.period[0].1.matrix(), &[(0, 1)]),
        ));
    }
    Flat { labels, edges }
}

fn transpose(m: &[Vec<i128>]) -> Vec<Vec<i128>> {
    let w = m.first().map_or(0, Vec::len);
    (0..w).map(|j| m.iter().map(|r| r[j]).collect()).collect()
}

/// Oriented so that the smaller endpoint comes first; loops take the
/// smaller of the two readings.
fn normalise(u: usize, v: usize, m: &[Vec<i128>]) -> (usize, usize, Vec<Vec<i128>>) {
    if u < v {
        (u, v, m.to_vec())
    } else if v < u {
        (v, u, transpose(m))
    } else {
        let t = transpose(m);
        (u, u, if t < m.to_vec() { t } else { m.to_vec() })
    }
}

/// Whether some bijection of vertices preserves labels and the edge
/// multiset with invariants. Tries every permutation.
pub fn brute_force_isomorphic(g1: &GraphStructure, g2: &GraphStructure) -> bool {
    let a = flatten(g1);
    let b = flatten(g2);
    if a.labels.len() != b.labels.len() || a.edges.len() != b.edges.len() {
        return false;
    }
    let mut target: Vec<_> = b
        .edges
        .iter()
        .map(|(u, v, m)| normalise(*u, *v, m))
        .collect();
    target.sort();
    let n = a.labels.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut used = vec![false; n];
    fn search(
        k: usize,
        a: &Flat,
        b: &Flat,
        target: &[(usize, usize, Vec<Vec<i128>>)],
        perm: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = a.labels.len();
        if k == n {
            let mut mapped: Vec<_> = a
                .edges
                .iter()
                .map(|(u, v, m)| normalise(perm[*u], perm[*v], m))
                .collect();
            mapped.sort();
            return mapped == target;
        }
        for w in 0..n {
            if !used[w] && a.labels[k] == b.labels[w] {
                used[w] = true;
                perm[k] = w;
                if search(k + 1, a, b, target, perm, used) {
                    return true;
                }
                used[w] = false;
            }
        }
        false
    }
    search(0, &a, &b, &target, &mut perm, &mut used)
}
