//! The decorated dual graph of a graph structure.
//!
//! Vertices are pieces, edges are gluing tori, and infinite half-line chains
//! are stored as eventually-periodic rays hanging off a boundary slot. A
//! valid structure uses every boundary slot exactly once and is connected,
//! so the modelled 3-manifold has empty boundary.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::lattice::GluingMatrix;
use crate::seifert::{FiberedPiece, SeifertError, ThinType};

pub use crate::seifert::Piece;

pub type PieceId = String;
pub type EdgeId = String;
pub type RayId = String;

/// A boundary slot of a piece.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Endpoint {
    pub piece: PieceId,
    pub slot: usize,
}

impl Endpoint {
    pub fn new(piece: impl Into<PieceId>, slot: usize) -> Self {
        Endpoint {
            piece: piece.into(),
            slot,
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.piece, self.slot)
    }
}

/// A gluing torus. `matrix` sends coordinates at `a` to coordinates at `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TorusEdge {
    pub id: EdgeId,
    pub a: Endpoint,
    pub b: Endpoint,
    pub matrix: GluingMatrix,
    pub base_reversing: bool,
}

impl TorusEdge {
    pub fn is_loop(&self) -> bool {
        self.a.piece == self.b.piece
    }

    /// The matrix from the side at `from` to the other side.
    pub fn matrix_from(&self, from: Side) -> GluingMatrix {
        match from {
            Side::A => self.matrix,
            Side::B => self.matrix.inverse(),
        }
    }

    pub fn endpoint(&self, side: Side) -> &Endpoint {
        match side {
            Side::A => &self.a,
            Side::B => &self.b,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// An infinite chain hanging off `attach`: the `period` sequence repeats
/// forever. Entry `i` is a two-slot piece together with the matrix gluing
/// the previous outgoing slot (the attach slot for `i = 0`) to its slot 0;
/// its slot 1 is the next outgoing slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodicRay {
    pub id: RayId,
    pub attach: Endpoint,
    pub period: Vec<(FiberedPiece, GluingMatrix)>,
}

impl PeriodicRay {
    /// Every piece of the period is a T²×I: the ray is a T²×[0,∞) end.
    pub fn is_product(&self) -> bool {
        !self.period.is_empty()
            && self
                .period
                .iter()
                .all(|(p, _)| p.classify().ok() == Some(ThinType::T2xI))
    }
}

/// What occupies a boundary slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Attachment {
    Edge(EdgeId, Side),
    Ray(RayId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
}

/// A graph structure as a decorated dual graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphStructure {
    pieces: BTreeMap<PieceId, Piece>,
    edges: BTreeMap<EdgeId, TorusEdge>,
    rays: BTreeMap<RayId, PeriodicRay>,
}

impl GraphStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn pieces(&self) -> &BTreeMap<PieceId, Piece> {
        &self.pieces
    }

    pub fn edges(&self) -> &BTreeMap<EdgeId, TorusEdge> {
        &self.edges
    }

    pub fn rays(&self) -> &BTreeMap<RayId, PeriodicRay> {
        &self.rays
    }

    pub fn piece(&self, id: &str) -> Option<&Piece> {
        self.pieces.get(id)
    }

    pub fn contains_id(&self, id: &str) -> bool {
        self.pieces.contains_key(id) || self.edges.contains_key(id) || self.rays.contains_key(id)
    }

    pub fn add_piece(&mut self, id: impl Into<PieceId>, piece: Piece) -> Result<(), GraphError> {
        let id = id.into();
        if self.contains_id(&id) {
            return Err(GraphError::DuplicateId(id));
        }
        self.pieces.insert(id, piece);
        Ok(())
    }

    pub fn add_edge(&mut self, edge: TorusEdge) -> Result<(), GraphError> {
        if self.contains_id(&edge.id) {
            return Err(GraphError::DuplicateId(edge.id));
        }
        self.edges.insert(edge.id.clone(), edge);
        Ok(())
    }

    pub fn add_ray(&mut self, ray: PeriodicRay) -> Result<(), GraphError> {
        if self.contains_id(&ray.id) {
            return Err(GraphError::DuplicateId(ray.id));
        }
        self.rays.insert(ray.id.clone(), ray);
        Ok(())
    }

    /// Assembles a structure from parts without checking ids; used by the
    /// reduction engine, whose ids are unique by construction.
    pub(crate) fn from_parts(
        pieces: BTreeMap<PieceId, Piece>,
        edges: BTreeMap<EdgeId, TorusEdge>,
        rays: BTreeMap<RayId, PeriodicRay>,
    ) -> Self {
        GraphStructure {
            pieces,
            edges,
            rays,
        }
    }

    /// For each piece, what sits on each of its slots. Slots referenced by
    /// nothing are `None`; slot conflicts and dangling references are
    /// ignored here and reported by [`validate`].
    pub fn slot_table(&self) -> HashMap<&str, Vec<Option<Attachment>>> {
        let mut table: HashMap<&str, Vec<Option<Attachment>>> = self
            .pieces
            .iter()
            .map(|(id, p)| (id.as_str(), vec![None; p.slot_count()]))
            .collect();
        let mut put = |ep: &Endpoint, att: Attachment| {
            if let Some(slot) = table
                .get_mut(ep.piece.as_str())
                .and_then(|slots| slots.get_mut(ep.slot))
            {
                if slot.is_none() {
                    *slot = Some(att);
                }
            }
        };
        for e in self.edges.values() {
            put(&e.a, Attachment::Edge(e.id.clone(), Side::A));
            put(&e.b, Attachment::Edge(e.id.clone(), Side::B));
        }
        for r in self.rays.values() {
            put(&r.attach, Attachment::Ray(r.id.clone()));
        }
        table
    }
}

/// One broken invariant, tied to the entity that breaks it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

fn violation(subject: &str, message: impl Into<String>) -> Violation {
    Violation {
        subject: subject.to_string(),
        message: message.into(),
    }
}

/// Checks every structural invariant and returns all violations found.
///
/// Gluing matrices cannot have the wrong determinant once built (the
/// [`GluingMatrix`] constructor refuses them), so the orientation convention
/// is enforced where matrices enter, e.g. by the GSF parser.
pub fn validate(g: &GraphStructure) -> Result<(), Vec<Violation>> {
    let mut out = Vec::new();

    for (id, piece) in &g.pieces {
        match piece {
            Piece::Fibered(p) => match p.classify() {
                Err(SeifertError::AmbiguousSolidTorus) => out.push(violation(
                    id,
                    "ambiguous solid torus encoding (use a solidtorus record with a meridian)",
                )),
                Err(SeifertError::ClosedPiece) if g.pieces.len() > 1 || !g.rays.is_empty() => {
                    out.push(violation(id, "closed piece inside a larger structure"))
                }
                _ => {}
            },
            Piece::SolidTorus(v) => {
                if !v.meridian.is_primitive() {
                    out.push(violation(id, "meridian is not primitive"));
                }
            }
            Piece::K2I(_) => {}
        }
    }

    let mut used: HashMap<(String, usize), String> = HashMap::new();
    let mut use_slot = |owner: &str, ep: &Endpoint, out: &mut Vec<Violation>| {
        let Some(piece) = g.pieces.get(&ep.piece) else {
            out.push(violation(
                owner,
                format!("dangling slot: unknown piece `{}`", ep.piece),
            ));
            return;
        };
        if ep.slot >= piece.slot_count() {
            out.push(violation(
                owner,
                format!(
                    "dangling slot: {} has only {} boundary slot(s)",
                    ep,
                    piece.slot_count()
                ),
            ));
            return;
        }
        if let Some(prev) = used.insert((ep.piece.clone(), ep.slot), owner.to_string()) {
            out.push(violation(
                owner,
                format!("slot {ep} is already used by `{prev}`"),
            ));
        }
    };

    for e in g.edges.values() {
        use_slot(&e.id, &e.a, &mut out);
        use_slot(&e.id, &e.b, &mut out);
    }
    for r in g.rays.values() {
        use_slot(&r.id, &r.attach, &mut out);
        if r.period.is_empty() {
            out.push(violation(&r.id, "ray period is empty"));
        }
        for (i, (p, _)) in r.period.iter().enumerate() {
            if p.base.boundary_count() != 2 || p.base.end_count() != 0 {
                out.push(violation(
                    &r.id,
                    format!("period piece {i} must have boundary=2 and ends=0"),
                ));
            }
        }
        if !r.period.is_empty() && !r.is_product() {
            let thick_anchor = matches!(
                g.pieces.get(&r.attach.piece),
                Some(Piece::Fibered(p)) if p.is_thick()
            );
            if !thick_anchor {
                out.push(violation(
                    &r.id,
                    "a ray whose period is not all T2xI must attach to a thick fibered piece",
                ));
            }
        }
    }

    for (id, piece) in &g.pieces {
        for slot in 0..piece.slot_count() {
            if !used.contains_key(&(id.clone(), slot)) {
                out.push(violation(id, format!("boundary slot {slot} is not glued")));
            }
        }
    }

    if !is_connected(g) {
        out.push(violation("graph", "structure is not connected"));
    }

    if out.is_empty() {
        Ok(())
    } else {
        Err(out)
    }
}

fn is_connected(g: &GraphStructure) -> bool {
    let Some(start) = g.pieces.keys().next() else {
        return g.rays.is_empty();
    };
    let mut adj: HashMap<&str, Vec<&str>> = HashMap::new();
    for e in g.edges.values() {
        adj.entry(&e.a.piece).or_default().push(&e.b.piece);
        adj.entry(&e.b.piece).or_default().push(&e.a.piece);
    }
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    let mut queue = VecDeque::from([start.as_str()]);
    seen.insert(start);
    while let Some(v) = queue.pop_front() {
        for &w in adj.get(v).into_iter().flatten() {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == g.pieces.len()
        && g.rays
            .values()
            .all(|r| g.pieces.contains_key(&r.attach.piece))
}

/// Number of ends of the modelled manifold: ends of the bases plus one per
/// ray.
pub fn ends(g: &GraphStructure) -> u64 {
    g.pieces
        .values()
        .map(|p| u64::from(p.end_count()))
        .sum::<u64>()
        + g.rays.len() as u64
}

/// Shape of a connected component of the T²×I subgraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ComponentShape {
    /// A finite chain whose two ends are glued to non-T²×I pieces (possibly
    /// the same piece).
    Path,
    /// A closed cycle of T²×I pieces; it is the whole structure.
    Cycle,
    /// A finite chain continuing into `rays` product rays (one or two).
    RayExtending { rays: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct T2xIComponent {
    /// Pieces in chain order.
    pub pieces: Vec<PieceId>,
    /// Edges between consecutive pieces of the chain.
    pub edges: Vec<EdgeId>,
    pub shape: ComponentShape,
}

/// The subgraph spanned by T²×I pieces, split into components.
pub fn dual_subgraph_t2xi(g: &GraphStructure) -> Vec<T2xIComponent> {
    let is_product = |id: &str| matches!(g.pieces.get(id), Some(Piece::Fibered(p)) if p.classify().ok() == Some(ThinType::T2xI));
    let table = g.slot_table();
    let step = |piece: &str, slot: usize| -> Step {
        match table
            .get(piece)
            .and_then(|s| s.get(slot))
            .cloned()
            .flatten()
        {
            Some(Attachment::Edge(eid, side)) => {
                let next = g.edges[&eid].endpoint(side.other()).clone();
                Step::Edge(eid, next)
            }
            Some(Attachment::Ray(_)) => Step::Ray,
            None => Step::Nothing,
        }
    };

    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut components = Vec::new();
    for id in g.pieces.keys().filter(|id| is_product(id)) {
        if seen.contains(id) {
            continue;
        }
        // Walk backwards out of slot 0 to one end of the chain.
        let mut start = id.clone();
        let mut outward = 0usize;
        let mut cyclic = false;
        while let Step::Edge(_, next) = step(&start, outward) {
            if !is_product(&next.piece) {
                break;
            }
            if next.piece == *id {
                cyclic = true;
                start = id.clone();
                outward = 0;
                break;
            }
            start = next.piece;
            outward = 1 - next.slot;
        }
        let mut rays = usize::from(!cyclic && matches!(step(&start, outward), Step::Ray));
        let mut pieces = vec![start.clone()];
        let mut edges = Vec::new();
        let mut current = start.clone();
        let mut out = 1 - outward;
        loop {
            match step(&current, out) {
                Step::Edge(eid, next) if is_product(&next.piece) => {
                    edges.push(eid);
                    if cyclic && next.piece == start {
                        break;
                    }
                    pieces.push(next.piece.clone());
                    current = next.piece;
                    out = 1 - next.slot;
                }
                Step::Ray => {
                    rays += 1;
                    break;
                }
                _ => break,
            }
        }
        seen.extend(pieces.iter().cloned());
        let shape = if cyclic {
            ComponentShape::Cycle
        } else if rays > 0 {
            ComponentShape::RayExtending { rays }
        } else {
            ComponentShape::Path
        };
        components.push(T2xIComponent {
            pieces,
            edges,
            shape,
        });
    }
    components
}

enum Step {
    Edge(EdgeId, Endpoint),
    Ray,
    Nothing,
}
