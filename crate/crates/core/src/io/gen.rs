//! Seeded random structures.
//!
//! A generated structure is a tree of thick pieces, optionally with a few
//! extra edges closing cycles and loops, decorated by
//!
//! - leaves: solid tori, K²×~I pieces, fibered K²×~I pieces and
//!   half-infinite annulus pieces, each hanging off a thick piece;
//! - chains of T²×I pieces subdividing edges;
//! - rays attached to thick pieces, either all-T²×I or thick periodic.
//!
//! The output always validates. Thick bases are chosen hyperbolic even
//! after every adjacent solid torus is filled, solid tori never have the
//! neighboring fiber as meridian, and at least one end is present, so by
//! default reduction succeeds.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{validate, Endpoint, GraphStructure, PeriodicRay, TorusEdge};
use crate::lattice::{GluingMatrix, IntMatrix2, Slope};
use crate::orbifold::BaseOrbifold;
use crate::seifert::{FiberedPiece, K2Fibration, K2IPiece, Piece, SolidTorusPiece};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenError {
    #[error("at least one piece is required")]
    NoPieces,
    #[error("proportions must not all be zero")]
    EmptyMix,
    #[error("matching fraction must lie in [0, 1], got {0}")]
    BadFraction(f64),
}

/// Relative weights of the piece kinds after the first (always thick) piece.
#[derive(Debug, Clone, PartialEq)]
pub struct Mix {
    pub thick: u32,
    pub t2xi: u32,
    pub solid_torus: u32,
    pub k2xi: u32,
    /// Fibered K²×~I: Moebius band or disk with two order-2 cones as base.
    pub fibered_k2xi: u32,
    pub half_infinite: u32,
    /// Probability that an edge between thick pieces has matching fibers.
    pub matching: f64,
    /// Probability, per thick piece, of an extra edge closing a cycle.
    pub extra_edges: f64,
}

impl Default for Mix {
    fn default() -> Self {
        Mix {
            thick: 8,
            t2xi: 5,
            solid_torus: 3,
            k2xi: 2,
            fibered_k2xi: 1,
            half_infinite: 1,
            matching: 0.35,
            extra_edges: 0.1,
        }
    }
}

impl Mix {
    /// Mostly T²×I chains between thick pieces; no cycles.
    pub fn chain_heavy() -> Self {
        Mix {
            thick: 3,
            t2xi: 12,
            solid_torus: 1,
            k2xi: 1,
            fibered_k2xi: 0,
            half_infinite: 1,
            matching: 0.35,
            extra_edges: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub pieces: usize,
    pub rays: usize,
    pub mix: Mix,
}

impl GenParams {
    pub fn new(seed: u64, pieces: usize) -> Self {
        GenParams {
            seed,
            pieces,
            rays: 0,
            mix: Mix::default(),
        }
    }

    pub fn with_rays(mut self, rays: usize) -> Self {
        self.rays = rays;
        self
    }

    pub fn with_mix(mut self, mix: Mix) -> Self {
        self.mix = mix;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Thick,
    T2xI,
    SolidTorus,
    K2xI,
    FiberedK2xI,
    HalfInfinite,
}

/// An edge of the skeleton, from a thick piece to `far`, possibly
/// subdivided later by T²×I pieces.
struct Link {
    host: usize,
    far: usize,
    chain: Vec<usize>,
}

const SIGNED_PERMUTATIONS: [IntMatrix2; 4] = [
    IntMatrix2::new(1, 0, 0, -1),
    IntMatrix2::new(-1, 0, 0, 1),
    IntMatrix2::new(0, 1, 1, 0),
    IntMatrix2::new(0, -1, -1, 0),
];

/// Shear links allowed per edge, to keep composites small.
const MAX_SHEARS_PER_EDGE: usize = 4;

struct Builder {
    rng: ChaCha8Rng,
    mix: Mix,
}

impl Builder {
    fn signed_permutation(&mut self) -> GluingMatrix {
        let m = *SIGNED_PERMUTATIONS
            .choose(&mut self.rng)
            .expect("non-empty");
        GluingMatrix::from_matrix(m).expect("determinant -1")
    }

    /// `[[1,0],[0,-1]]` conjugated by a small shear on one side.
    fn small_matrix(&mut self) -> GluingMatrix {
        let k: i64 = self.rng.gen_range(-2..=2);
        let base = self.signed_permutation();
        let shear = if self.rng.gen_bool(0.5) {
            IntMatrix2::new(1, k, 0, 1)
        } else {
            IntMatrix2::new(1, 0, k, 1)
        };
        let m = base.matrix().checked_mul(&shear).expect("small entries");
        GluingMatrix::from_matrix(m).expect("determinant -1")
    }

    /// A matrix with `M[0][1] = 0`: the fibers match.
    fn matching_matrix(&mut self) -> GluingMatrix {
        let c: i64 = self.rng.gen_range(-3..=3);
        if self.rng.gen_bool(0.5) {
            GluingMatrix::new(1, 0, c, -1).expect("determinant -1")
        } else {
            GluingMatrix::new(-1, 0, c, 1).expect("determinant -1")
        }
    }

    /// A matrix with `M[0][1] ≠ 0`.
    fn non_matching_matrix(&mut self) -> GluingMatrix {
        loop {
            let m = self.small_matrix();
            if m.matrix().b != 0 {
                return m;
            }
        }
    }

    fn thick_edge_matrix(&mut self) -> GluingMatrix {
        if self.rng.gen_bool(self.mix.matching) {
            self.matching_matrix()
        } else {
            self.non_matching_matrix()
        }
    }

    fn kind(&mut self) -> Kind {
        let m = &self.mix;
        let table = [
            (Kind::Thick, m.thick),
            (Kind::T2xI, m.t2xi),
            (Kind::SolidTorus, m.solid_torus),
            (Kind::K2xI, m.k2xi),
            (Kind::FiberedK2xI, m.fibered_k2xi),
            (Kind::HalfInfinite, m.half_infinite),
        ];
        let total: u32 = table.iter().map(|(_, w)| w).sum();
        let mut pick = self.rng.gen_range(0..total);
        for (k, w) in table {
            if pick < w {
                return k;
            }
            pick -= w;
        }
        unreachable!("pick is below the total weight")
    }

    /// A thick base with `boundary` slots, `capped` of which will be filled
    /// by solid tori; hyperbolic even with those slots removed.
    fn thick_base(&mut self, boundary: u32, capped: u32, ends: u32) -> BaseOrbifold {
        let orientable = self.rng.gen_bool(0.85);
        let genus = if orientable {
            u32::from(self.rng.gen_bool(0.2))
        } else {
            self.rng.gen_range(1..=2)
        };
        let mut cones: Vec<u32> = (0..self.rng.gen_range(0..=2))
            .map(|_| self.rng.gen_range(2..=7))
            .collect();
        loop {
            let probe =
                BaseOrbifold::new(orientable, genus, boundary - capped, ends, cones.clone())
                    .expect("valid parameters");
            if probe.euler_char_compactified() < num_rational::BigRational::from_integer(0.into()) {
                return BaseOrbifold::new(orientable, genus, boundary, ends, cones)
                    .expect("valid parameters");
            }
            cones.push(self.rng.gen_range(2..=7));
        }
    }

    /// A primitive slope `(α, β)` with `1 ≤ α ≤ 5`.
    fn host_meridian(&mut self) -> Slope {
        loop {
            let a: i64 = self.rng.gen_range(1..=5);
            let b: i64 = self.rng.gen_range(-4..=4);
            if let Ok(s) = Slope::primitive(a, b) {
                return s;
            }
        }
    }
}

/// Generates a random valid structure.
pub fn generate(params: &GenParams) -> Result<GraphStructure, GenError> {
    if params.pieces == 0 {
        return Err(GenError::NoPieces);
    }
    let m = &params.mix;
    if !(0.0..=1.0).contains(&m.matching) {
        return Err(GenError::BadFraction(m.matching));
    }
    if !(0.0..=1.0).contains(&m.extra_edges) {
        return Err(GenError::BadFraction(m.extra_edges));
    }
    if m.thick + m.t2xi + m.solid_torus + m.k2xi + m.fibered_k2xi + m.half_infinite == 0 {
        return Err(GenError::EmptyMix);
    }
    let mut b = Builder {
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        mix: params.mix.clone(),
    };

    let mut kinds = vec![Kind::Thick];
    kinds.extend((1..params.pieces).map(|_| b.kind()));
    let thick: Vec<usize> = (0..kinds.len())
        .filter(|&i| kinds[i] == Kind::Thick)
        .collect();

    // Skeleton: a random tree on the thick pieces, leaves hung off thick
    // pieces, a few extra edges, then chains distributed over the links.
    let mut links: Vec<Link> = Vec::new();
    for (n, &i) in thick.iter().enumerate().skip(1) {
        let parent = thick[b.rng.gen_range(0..n)];
        links.push(Link {
            host: parent,
            far: i,
            chain: Vec::new(),
        });
    }
    for (i, &k) in kinds.iter().enumerate() {
        if matches!(
            k,
            Kind::SolidTorus | Kind::K2xI | Kind::FiberedK2xI | Kind::HalfInfinite
        ) {
            let host = *thick.choose(&mut b.rng).expect("one thick piece");
            links.push(Link {
                host,
                far: i,
                chain: Vec::new(),
            });
        }
    }
    for &i in &thick {
        if b.rng.gen_bool(b.mix.extra_edges) {
            let other = *thick.choose(&mut b.rng).expect("one thick piece");
            links.push(Link {
                host: i,
                far: other,
                chain: Vec::new(),
            });
        }
    }
    let chains: Vec<usize> = (0..kinds.len())
        .filter(|&i| kinds[i] == Kind::T2xI)
        .collect();
    if !chains.is_empty() && links.is_empty() {
        // A lone thick piece: the T²×I pieces become a product ray-like
        // chain ending in a half-infinite annulus.
        let end = kinds.len();
        kinds.push(Kind::HalfInfinite);
        links.push(Link {
            host: 0,
            far: end,
            chain: Vec::new(),
        });
    }
    for i in chains {
        let l = b.rng.gen_range(0..links.len());
        links[l].chain.push(i);
    }

    // Slot bookkeeping.
    let n = kinds.len();
    let mut degree = vec![0u32; n];
    let mut capped = vec![0u32; n];
    for l in &links {
        degree[l.host] += 1;
        degree[l.far] += 1;
        if kinds[l.far] == Kind::SolidTorus {
            capped[l.host] += 1;
        }
    }
    let mut ray_hosts = Vec::new();
    for _ in 0..params.rays {
        let h = *thick.choose(&mut b.rng).expect("one thick piece");
        degree[h] += 1;
        ray_hosts.push(h);
    }
    let has_end = params.rays > 0 || kinds.contains(&Kind::HalfInfinite);
    let mut ends = vec![0u32; n];
    for &i in &thick {
        ends[i] = u32::from(b.rng.gen_bool(0.15));
    }
    if !has_end && ends.iter().all(|&e| e == 0) {
        ends[0] = 1;
    }

    let id = |i: usize| format!("p{i}");
    let mut g = GraphStructure::new();
    for i in 0..n {
        let piece = match kinds[i] {
            Kind::Thick => Piece::Fibered(FiberedPiece::new(
                b.thick_base(degree[i], capped[i], ends[i]),
            )),
            Kind::T2xI => Piece::Fibered(FiberedPiece::new(BaseOrbifold::annulus())),
            Kind::HalfInfinite => Piece::Fibered(FiberedPiece::new(BaseOrbifold::planar(1, 1, []))),
            Kind::FiberedK2xI => {
                let f = *K2Fibration::BOTH.choose(&mut b.rng).expect("non-empty");
                Piece::Fibered(FiberedPiece::new(f.base()))
            }
            Kind::K2xI => {
                let f = match b.rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(K2Fibration::Moebius),
                    _ => Some(K2Fibration::DiskTwoCones),
                };
                Piece::K2I(K2IPiece { fibration: f })
            }
            // The meridian is fixed once the gluing is known.
            Kind::SolidTorus => {
                Piece::SolidTorus(SolidTorusPiece::new(Slope::SECTION).expect("primitive"))
            }
        };
        g.add_piece(id(i), piece).expect("fresh id");
    }

    let mut next_slot = vec![0usize; n];
    let mut take = |p: usize| {
        let s = next_slot[p];
        next_slot[p] += 1;
        Endpoint::new(id(p), s)
    };
    let mut edge_count = 0usize;
    let mut solid_tori: Vec<(usize, Slope)> = Vec::new();
    for l in &links {
        let mut from = take(l.host);
        let mut composite: Option<GluingMatrix> = None;
        let mut shears = 0;
        let mut hops: Vec<usize> = l.chain.clone();
        hops.push(l.far);
        let last = hops.len() - 1;
        for (h, &to) in hops.iter().enumerate() {
            let is_last = h == last;
            let matrix = if is_last && composite.is_none() && kinds[to] == Kind::Thick {
                b.thick_edge_matrix()
            } else if shears < MAX_SHEARS_PER_EDGE && b.rng.gen_bool(0.3) {
                shears += 1;
                b.small_matrix()
            } else {
                b.signed_permutation()
            };
            composite = Some(match composite {
                None => matrix,
                Some(c) => c.through_product(&matrix).expect("bounded entries"),
            });
            let to_ep = take(to);
            let reversing = b.rng.gen_bool(0.2);
            g.add_edge(TorusEdge {
                id: format!("e{edge_count}"),
                a: from.clone(),
                b: to_ep.clone(),
                matrix,
                base_reversing: reversing,
            })
            .expect("fresh id");
            edge_count += 1;
            if !is_last {
                // Leave through the other slot of the T²×I piece.
                from = take(to);
            }
        }
        if kinds[l.far] == Kind::SolidTorus {
            let h = b.host_meridian();
            let c = composite.expect("at least one hop");
            solid_tori.push((l.far, c.apply(h).expect("bounded entries")));
        }
    }
    for (r, &h) in ray_hosts.iter().enumerate() {
        let attach = take(h);
        let len = b.rng.gen_range(1..=2);
        let product = b.rng.gen_bool(0.5);
        let period = (0..len)
            .map(|_| {
                let base = if product {
                    BaseOrbifold::annulus()
                } else {
                    let q = b.rng.gen_range(2..=5);
                    BaseOrbifold::planar(2, 0, [q, q + 1])
                };
                (FiberedPiece::new(base), b.signed_permutation())
            })
            .collect();
        g.add_ray(PeriodicRay {
            id: format!("r{r}"),
            attach,
            period,
        })
        .expect("fresh id");
    }

    let g = rebuild_with_meridians(g, &solid_tori);
    if let Err(v) = validate(&g) {
        unreachable!("generator produced an invalid structure: {v:?}");
    }
    Ok(g)
}

fn rebuild_with_meridians(g: GraphStructure, tori: &[(usize, Slope)]) -> GraphStructure {
    let mut pieces = g.pieces().clone();
    for (i, m) in tori {
        pieces.insert(
            format!("p{i}"),
            Piece::SolidTorus(SolidTorusPiece::new(*m).expect("image of a primitive slope")),
        );
    }
    GraphStructure::from_parts(pieces, g.edges().clone(), g.rays().clone())
}
