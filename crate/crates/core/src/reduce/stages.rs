//! Stages A–E of the reduction.

use std::collections::BTreeSet;

use super::engine::{Across, Engine};
use super::{DiagnosisKind, MoveKind, ReduceError};
use crate::graph::{Attachment, Endpoint, PieceId, Side, TorusEdge};
use crate::lattice::{GluingMatrix, IntMatrix2, LatticeError, Slope};
use crate::orbifold::BaseOrbifold;
use crate::seifert::{
    extend_over_solid_torus, fibrations_match, filling_order, merge_across, merge_loop,
    pulled_back_meridian, Extension, FiberedPiece, K2Fibration, K2IPiece, Piece, SolidTorusPiece,
    ThinType,
};

/// Change of basis from a piece fibered over the disk with two order-2
/// cone points to the K²×~I basis, in which that fibration's fiber is
/// `(1, 0)`.
const DISK22_TO_K2I: IntMatrix2 = IntMatrix2::new(0, 1, -1, 0);

fn stuck(what: impl Into<String>) -> ReduceError {
    ReduceError::Stuck(what.into())
}

fn thin_type(piece: &Piece) -> ThinType {
    match piece {
        Piece::Fibered(p) => p.classify_unchecked(),
        Piece::SolidTorus(_) => ThinType::SolidTorus,
        Piece::K2I(_) => ThinType::K2xI,
    }
}

fn compose(outer: &GluingMatrix, inner: &IntMatrix2) -> Result<GluingMatrix, ReduceError> {
    let m = outer
        .matrix()
        .checked_mul(inner)
        .ok_or(LatticeError::Overflow)?;
    Ok(GluingMatrix::from_matrix(m)?)
}

/// One side of a T²×I chain.
enum ChainExit {
    Edge {
        edge: String,
        piece: PieceId,
        slot: usize,
    },
    Ray(String),
}

struct Chain {
    /// Product pieces in order, each with the slot facing the previous one.
    pieces: Vec<(PieceId, usize)>,
    /// Edges between consecutive pieces (plus the closing edge of a cycle).
    inner_edges: Vec<String>,
    start: Option<ChainExit>,
    end: Option<ChainExit>,
}

impl Engine<'_> {
    fn is_product(&self, id: &str) -> bool {
        matches!(self.pieces.get(id), Some(Piece::Fibered(p)) if p.classify_unchecked() == ThinType::T2xI)
    }

    fn is_product_ray(&self, id: &str) -> bool {
        self.rays.get(id).is_some_and(|r| r.is_product())
    }

    // ---- Stage A -------------------------------------------------------

    pub(crate) fn stage_a(&mut self) -> Result<bool, ReduceError> {
        let mut changed = false;
        let tori: Vec<PieceId> = self
            .pieces
            .iter()
            .filter(|(_, p)| matches!(p, Piece::SolidTorus(_)))
            .map(|(id, _)| id.clone())
            .collect();
        if tori.is_empty() {
            return Ok(false);
        }

        // Phase 1: a solid torus swallows adjacent product pieces.
        let mut work = self.worklist(tori.iter().cloned());
        while let Some(v) = self.pop(&mut work) {
            while self.grow_solid_torus(&v)? {
                changed = true;
            }
        }

        // Phase 2: fill each solid torus into its fibered neighbor.
        let mut hosts = BTreeSet::new();
        for v in &tori {
            if let Across::Edge { far, .. } = self.across(v, 0) {
                hosts.insert(far.piece);
            }
        }
        let mut work = self.worklist(hosts);
        while let Some(n) = self.pop(&mut work) {
            changed |= self.fill_solid_tori(&n)?;
        }
        Ok(changed)
    }

    /// Merges the product piece next to solid torus `v` into it, if there
    /// is one. Diagnoses solid tori that meet rays or other closed-off
    /// configurations.
    fn grow_solid_torus(&mut self, v: &str) -> Result<bool, ReduceError> {
        let Some(Piece::SolidTorus(st)) = self.pieces.get(v).cloned() else {
            return Ok(false);
        };
        let (edge, far, to_far) = match self.across(v, 0) {
            Across::Ray(r) => {
                return Err(if self.is_product_ray(&r) {
                    self.diagnosis(
                        DiagnosisKind::ExhaustionBySolidTori,
                        vec![v.to_string(), r],
                        "a solid torus followed by an infinite chain of T2xI pieces is exhausted by solid tori",
                    )
                } else {
                    stuck("solid torus attached to a non-product ray")
                });
            }
            Across::Edge {
                id, far, to_far, ..
            } => (id, far, to_far),
        };
        match self.piece(&far.piece).clone() {
            Piece::SolidTorus(w) => {
                // Two solid tori glued along their boundary: a lens space,
                // or S²×S¹ when the meridians agree.
                let image = to_far.apply(st.meridian)?;
                let witnesses = vec![v.to_string(), edge, far.piece.clone()];
                Err(if image.parallel(&w.meridian) {
                    self.diagnosis(
                        DiagnosisKind::ReducibleWitness,
                        witnesses,
                        "two solid tori glued meridian to meridian form S2xS1, which is closed and reducible",
                    )
                } else {
                    self.diagnosis(
                        DiagnosisKind::ClosedSeifert,
                        witnesses,
                        "two solid tori glued along their boundary form a closed lens space",
                    )
                })
            }
            Piece::K2I(_) => Err(self.diagnosis(
                DiagnosisKind::ClosedSeifert,
                vec![v.to_string(), edge, far.piece.clone()],
                "a solid torus glued to K2xI is closed; one of the two fibrations extends",
            )),
            Piece::Fibered(p) if p.classify_unchecked() == ThinType::T2xI => {
                let t = far.piece;
                let other = 1 - far.slot;
                let meridian = IntMatrix2::PRODUCT_TRANSPORT
                    .checked_apply(to_far.apply(st.meridian)?)
                    .ok_or(LatticeError::Overflow)?;
                let outer = self.across(&t, other);
                let att = match &outer {
                    Across::Edge { id, side, .. } => Attachment::Edge(id.clone(), *side),
                    Across::Ray(r) => Attachment::Ray(r.clone()),
                };
                self.drop_edge(&edge);
                self.drop_piece(&t);
                self.pieces.insert(
                    v.to_string(),
                    Piece::SolidTorus(SolidTorusPiece::new(meridian)?),
                );
                self.put_slot(v, 0, att);
                self.mv(
                    MoveKind::AbsorbSolidTorus,
                    vec![v.to_string(), edge, t],
                    vec![v.to_string()],
                    None,
                );
                Ok(true)
            }
            Piece::Fibered(_) => Ok(false),
        }
    }

    /// Fills every solid torus adjacent to `n` into it.
    fn fill_solid_tori(&mut self, n: &str) -> Result<bool, ReduceError> {
        let host = match self.pieces.get(n) {
            None => return Ok(false),
            Some(Piece::Fibered(p)) => p.clone(),
            Some(Piece::K2I(_)) => {
                return Err(self.diagnosis(
                    DiagnosisKind::ClosedSeifert,
                    vec![n.to_string()],
                    "a solid torus glued to K2xI is closed; one of the two fibrations extends",
                ))
            }
            Some(Piece::SolidTorus(_)) => return Ok(false),
        };
        let mut fills = Vec::new();
        for (_, across) in self.neighbors(n) {
            if let Across::Edge {
                id, far, to_far, ..
            } = across
            {
                if let Piece::SolidTorus(st) = self.piece(&far.piece) {
                    let m = pulled_back_meridian(st, &to_far)?;
                    fills.push((far.piece.clone(), id, filling_order(m)));
                }
            }
        }
        if fills.is_empty() {
            return Ok(false);
        }

        let blocked: Vec<&(String, String, u64)> = fills.iter().filter(|f| f.2 == 0).collect();
        if !blocked.is_empty() {
            let mut base = host.base.clone();
            for (_, _, alpha) in fills.iter().filter(|f| f.2 > 0) {
                let alpha = u32::try_from(*alpha).map_err(|_| LatticeError::Overflow)?;
                base = base.cap_with_cone(0, alpha)?;
            }
            let s1xr2 = blocked.len() == 1
                && base.boundary_count() == 1
                && base.end_count() == 1
                && base.orientable()
                && base.genus() == 0
                && base.cones().is_empty();
            let mut witnesses = vec![n.to_string()];
            for (v, e, _) in &blocked {
                witnesses.push(e.clone());
                witnesses.push(v.clone());
            }
            return Err(if s1xr2 {
                self.diagnosis(
                    DiagnosisKind::S1xR2Like,
                    witnesses,
                    "the fiber bounds a meridian disk of the solid torus and the neighbor is a one-ended planar piece; the manifold is S1xR2-like",
                )
            } else {
                self.diagnosis(
                    DiagnosisKind::ReducibleWitness,
                    witnesses,
                    "the fiber bounds a meridian disk of the solid torus; the filled piece contains an essential sphere",
                )
            });
        }

        for (v, e, _) in fills {
            let edge = &self.edges[&e];
            let (slot, matrix) = if edge.a.piece == n {
                (edge.a.slot, edge.matrix)
            } else {
                (edge.b.slot, edge.matrix.inverse())
            };
            let Piece::SolidTorus(st) = *self.piece(&v) else {
                return Err(stuck("solid torus vanished while filling"));
            };
            let current = self.fibered(n).cloned().unwrap_or(host.clone());
            let (piece, alpha) = match extend_over_solid_torus(&current, slot, &st, &matrix)? {
                Extension::Extended { piece, alpha } => (piece, alpha),
                Extension::NoExtension => return Err(stuck("filling order changed while filling")),
            };
            self.pieces.insert(n.to_string(), Piece::Fibered(piece));
            self.remove_slot(n, slot);
            self.drop_edge(&e);
            self.drop_piece(&v);
            self.mv(
                MoveKind::AbsorbSolidTorus,
                vec![v, e, n.to_string()],
                vec![n.to_string()],
                Some(alpha),
            );
        }

        let base = &self.fibered(n).expect("host stays fibered").base;
        if base.is_disk_or_plane_with_at_most_one_cone() {
            let witnesses = vec![n.to_string()];
            return Err(if base.boundary_count() > 0 {
                self.diagnosis(
                    DiagnosisKind::NonMaximalSolidTorus,
                    witnesses,
                    "filling solid tori turned this piece into a solid torus whose meridian is not determined by the stored fibration data",
                )
            } else {
                self.diagnosis(
                    DiagnosisKind::S1xR2Like,
                    witnesses,
                    "filling solid tori left a fibered plane with at most one cone point; the manifold is S1xR2-like",
                )
            });
        }
        Ok(true)
    }

    // ---- Stage B -------------------------------------------------------

    pub(crate) fn stage_b(&mut self) -> Result<bool, ReduceError> {
        let products: Vec<PieceId> = self
            .pieces
            .keys()
            .filter(|id| self.is_product(id))
            .cloned()
            .collect();
        if products.is_empty() {
            return Ok(false);
        }
        let mut work = self.worklist(products);
        while let Some(t) = self.pop(&mut work) {
            if !self.is_product(&t) {
                continue;
            }
            let chain = self.chain_through(&t);
            self.collapse_chain(chain)?;
        }
        Ok(true)
    }

    fn exit(&self, piece: &str, slot: usize) -> Option<ChainExit> {
        match self.across(piece, slot) {
            Across::Ray(r) => Some(ChainExit::Ray(r)),
            Across::Edge { id, far, .. } if !self.is_product(&far.piece) => Some(ChainExit::Edge {
                edge: id,
                piece: far.piece,
                slot: far.slot,
            }),
            Across::Edge { .. } => None,
        }
    }

    fn chain_through(&self, t: &str) -> Chain {
        // Walk backwards out of slot 0 to one end, or all the way round.
        let mut start = t.to_string();
        let mut outward = 0usize;
        let mut cyclic = false;
        loop {
            match self.across(&start, outward) {
                Across::Edge { far, .. } if self.is_product(&far.piece) => {
                    if far.piece == t {
                        cyclic = true;
                        start = t.to_string();
                        outward = 0;
                        break;
                    }
                    start = far.piece;
                    outward = 1 - far.slot;
                }
                _ => break,
            }
        }
        let mut pieces = vec![(start.clone(), outward)];
        let mut inner_edges = Vec::new();
        let mut current = start.clone();
        let mut out = 1 - outward;
        loop {
            match self.across(&current, out) {
                Across::Edge { id, far, .. } if self.is_product(&far.piece) => {
                    inner_edges.push(id);
                    if cyclic && far.piece == start {
                        break;
                    }
                    pieces.push((far.piece.clone(), far.slot));
                    current = far.piece;
                    out = 1 - far.slot;
                }
                _ => break,
            }
        }
        if cyclic {
            return Chain {
                pieces,
                inner_edges,
                start: None,
                end: None,
            };
        }
        let start_exit = self.exit(&start, outward);
        let end_exit = self.exit(&current, out);
        Chain {
            pieces,
            inner_edges,
            start: start_exit,
            end: end_exit,
        }
    }

    fn collapse_chain(&mut self, chain: Chain) -> Result<(), ReduceError> {
        let piece_ids: Vec<String> = chain.pieces.iter().map(|(p, _)| p.clone()).collect();
        let (start, end) = match (chain.start, chain.end) {
            (Some(s), Some(e)) => (s, e),
            _ => {
                let mut w = piece_ids;
                w.extend(chain.inner_edges);
                return Err(self.diagnosis(
                    DiagnosisKind::ClosedNonSeifert,
                    w,
                    "a cycle of T2xI pieces closes up into a torus bundle over the circle",
                ));
            }
        };
        let mut affected = Vec::new();
        match (start, end) {
            (
                ChainExit::Edge {
                    edge: e0,
                    piece: x,
                    slot: sx,
                },
                ChainExit::Edge {
                    edge: e_last,
                    piece: y,
                    slot: sy,
                },
            ) => {
                // Compose the gluings from X to Y through every product piece.
                let first = &self.edges[&e0];
                let mut matrix = if first.a.piece == x && first.a.slot == sx {
                    first.matrix
                } else {
                    first.matrix.inverse()
                };
                let mut reversing = first.base_reversing;
                let mut path_edges = chain.inner_edges.clone();
                path_edges.push(e_last.clone());
                for ((p, entry), eid) in chain.pieces.iter().zip(&path_edges) {
                    let e = &self.edges[eid];
                    let exit_slot = 1 - entry;
                    let step = if e.a.piece == *p && e.a.slot == exit_slot {
                        e.matrix
                    } else {
                        e.matrix.inverse()
                    };
                    matrix = matrix.through_product(&step)?;
                    reversing ^= e.base_reversing;
                }
                affected.push(e0.clone());
                for ((p, _), eid) in chain.pieces.iter().zip(&path_edges) {
                    affected.push(p.clone());
                    affected.push(eid.clone());
                }
                for eid in &path_edges {
                    self.drop_edge(eid);
                }
                for p in &piece_ids {
                    self.drop_piece(p);
                }
                self.drop_edge(&e0);
                self.edges.insert(
                    e0.clone(),
                    TorusEdge {
                        id: e0.clone(),
                        a: Endpoint::new(x.clone(), sx),
                        b: Endpoint::new(y.clone(), sy),
                        matrix,
                        base_reversing: reversing,
                    },
                );
                self.put_slot(&x, sx, Attachment::Edge(e0.clone(), Side::A));
                self.put_slot(&y, sy, Attachment::Edge(e0.clone(), Side::B));
                self.mv(MoveKind::MergeT2xIChain, affected, vec![e0], None);
            }
            (ChainExit::Edge { edge, piece, slot }, ChainExit::Ray(r))
            | (ChainExit::Ray(r), ChainExit::Edge { edge, piece, slot }) => {
                // The chain becomes part of the ray.
                affected.push(edge.clone());
                affected.extend(piece_ids.iter().cloned());
                affected.extend(chain.inner_edges.iter().cloned());
                affected.push(r.clone());
                for eid in &chain.inner_edges {
                    self.drop_edge(eid);
                }
                self.drop_edge(&edge);
                for p in &piece_ids {
                    self.drop_piece(p);
                }
                self.put_slot(&piece, slot, Attachment::Ray(r.clone()));
                self.mv(MoveKind::MergeT2xIChain, affected, vec![r], None);
            }
            (ChainExit::Ray(r1), ChainExit::Ray(r2)) => {
                // A line of product pieces: the whole manifold is T²×ℝ.
                affected.push(r1.clone());
                affected.extend(piece_ids.iter().cloned());
                affected.extend(chain.inner_edges.iter().cloned());
                affected.push(r2.clone());
                for eid in &chain.inner_edges {
                    self.drop_edge(eid);
                }
                for p in &piece_ids {
                    self.drop_piece(p);
                }
                self.rays.remove(&r1);
                self.rays.remove(&r2);
                let id = piece_ids[0].clone();
                self.pieces.insert(
                    id.clone(),
                    Piece::Fibered(FiberedPiece::new(BaseOrbifold::planar(0, 2, []))),
                );
                self.mv(MoveKind::CollapseRay, affected, vec![id], None);
            }
        }
        Ok(())
    }

    // ---- Stage C -------------------------------------------------------

    pub(crate) fn stage_c(&mut self) -> Result<bool, ReduceError> {
        let mut changed = false;
        let rays: Vec<String> = self
            .rays
            .iter()
            .filter(|(_, r)| r.is_product())
            .map(|(id, _)| id.clone())
            .collect();
        let mut work = self.worklist(rays);
        while let Some(r) = self.pop(&mut work) {
            let attach = self.rays[&r].attach.clone();
            let base = self.base_for_end(&attach.piece, attach.slot)?;
            self.pieces.insert(
                attach.piece.clone(),
                Piece::Fibered(FiberedPiece::new(base)),
            );
            self.remove_slot(&attach.piece, attach.slot);
            self.rays.remove(&r);
            self.mv(
                MoveKind::CollapseRay,
                vec![r, attach.piece.clone()],
                vec![attach.piece],
                None,
            );
            changed = true;
        }

        let halves: Vec<PieceId> = self
            .pieces
            .iter()
            .filter(|(_, p)| thin_type(p) == ThinType::T2xRPlus)
            .map(|(id, _)| id.clone())
            .collect();
        let mut work = self.worklist(halves);
        while let Some(p) = self.pop(&mut work) {
            if self.pieces.get(&p).map(thin_type) != Some(ThinType::T2xRPlus) {
                continue;
            }
            let (edge, far) = match self.across(&p, 0) {
                Across::Edge { id, far, .. } => (id, far),
                Across::Ray(_) => return Err(stuck("ray left on a half-infinite annulus piece")),
            };
            let base = self.base_for_end(&far.piece, far.slot)?;
            self.drop_edge(&edge);
            self.drop_piece(&p);
            self.pieces
                .insert(far.piece.clone(), Piece::Fibered(FiberedPiece::new(base)));
            self.remove_slot(&far.piece, far.slot);
            self.mv(
                MoveKind::CollapseRay,
                vec![p, edge, far.piece.clone()],
                vec![far.piece],
                None,
            );
            changed = true;
        }
        Ok(changed)
    }

    /// Base of `piece` after turning boundary `slot` into an end.
    fn base_for_end(&self, piece: &str, slot: usize) -> Result<BaseOrbifold, ReduceError> {
        match self.piece(piece) {
            Piece::Fibered(p) => Ok(p.base.boundary_to_end(slot)?),
            // Either fibration of K²×~I extends over the collar; use the
            // Moebius one.
            Piece::K2I(_) => Ok(BaseOrbifold::moebius().boundary_to_end(0)?),
            Piece::SolidTorus(_) => Err(stuck("solid torus left next to a T2x[0,inf) end")),
        }
    }

    // ---- Stage D -------------------------------------------------------

    pub(crate) fn stage_d(&mut self) -> Result<bool, ReduceError> {
        let candidates: Vec<PieceId> = self
            .pieces
            .iter()
            .filter(|(id, p)| thin_type(p) == ThinType::K2xI && self.slot_count(id) == 1)
            .map(|(id, _)| id.clone())
            .collect();
        let mut changed = false;
        let mut work = self.worklist(candidates);
        while let Some(x) = self.pop(&mut work) {
            if !self.pieces.contains_key(&x) {
                continue;
            }
            changed |= self.resolve_k2xi(&x)?;
        }
        Ok(changed)
    }

    fn resolve_k2xi(&mut self, x: &str) -> Result<bool, ReduceError> {
        // Express everything in the K²×~I basis: F1 fiber (0,1), F2 fiber (1,0).
        let (decoration, to_k2i) = match self.piece(x) {
            Piece::K2I(k) => (k.fibration, IntMatrix2::IDENTITY),
            Piece::Fibered(p) if p.base == BaseOrbifold::moebius() => {
                (Some(K2Fibration::Moebius), IntMatrix2::IDENTITY)
            }
            Piece::Fibered(p) if p.base == BaseOrbifold::disk_two_cones() => {
                (Some(K2Fibration::DiskTwoCones), DISK22_TO_K2I)
            }
            _ => return Err(stuck("unexpected K2xI representation")),
        };
        let was_fibered = matches!(self.piece(x), Piece::Fibered(_));
        let (edge, side, far, to_far) = match self.across(x, 0) {
            Across::Edge {
                id,
                side,
                far,
                to_far,
            } => (id, side, far, to_far),
            Across::Ray(_) => return Err(stuck("ray attached to a K2xI piece")),
        };
        let from_k2i = to_k2i
            .unimodular_inverse()
            .expect("basis change is unimodular");
        let m = compose(&to_far, &from_k2i)?;

        let y = self.piece(&far.piece).clone();
        let neighbor = match &y {
            Piece::Fibered(p) if p.is_thick() => p.clone(),
            Piece::K2I(_) | Piece::Fibered(_) if thin_type(&y) == ThinType::K2xI => {
                // Two K²×~I pieces: a closed torus semi-bundle.
                let other = self.k2i_fibers_in_own_basis(&far.piece);
                let seifert = [Slope::FIBER, Slope::SECTION]
                    .iter()
                    .any(|f| other.iter().any(|g| fibrations_match(&m, *f, *g)));
                let witnesses = vec![x.to_string(), edge, far.piece.clone()];
                return Err(if seifert {
                    self.diagnosis(
                        DiagnosisKind::ClosedSeifert,
                        witnesses,
                        "two K2xI pieces glued so that fibrations match form a closed Seifert manifold",
                    )
                } else {
                    self.diagnosis(
                        DiagnosisKind::ClosedNonSeifert,
                        witnesses,
                        "two K2xI pieces glued with no matching fibrations form a closed non-Seifert manifold",
                    )
                });
            }
            _ => return Err(stuck("K2xI piece next to a thin piece after stages A-C")),
        };

        let y_fiber = m.inverse().apply(Slope::FIBER)?;
        let merged_with = if y_fiber.parallel(&K2Fibration::Moebius.fiber()) {
            Some(K2Fibration::Moebius)
        } else if y_fiber.parallel(&K2Fibration::DiskTwoCones.fiber()) {
            Some(K2Fibration::DiskTwoCones)
        } else {
            None
        };
        match merged_with {
            Some(f) => {
                let base = BaseOrbifold::merge_bases(
                    &neighbor.base,
                    far.slot,
                    &f.base(),
                    0,
                    self.edges[&edge].base_reversing,
                )?;
                self.pieces
                    .insert(far.piece.clone(), Piece::Fibered(FiberedPiece::new(base)));
                self.remove_slot(&far.piece, far.slot);
                self.drop_edge(&edge);
                self.drop_piece(x);
                self.mv(
                    MoveKind::ResolveK2xI,
                    vec![x.to_string(), edge, far.piece.clone()],
                    vec![far.piece],
                    None,
                );
                Ok(true)
            }
            None => {
                let fibration = decoration.or(Some(K2Fibration::Moebius));
                if was_fibered {
                    let e = self.edges.get_mut(&edge).expect("edge exists");
                    e.matrix = match side {
                        Side::A => m,
                        Side::B => m.inverse(),
                    };
                }
                let new_piece = Piece::K2I(K2IPiece { fibration });
                let changed = *self.piece(x) != new_piece;
                self.pieces.insert(x.to_string(), new_piece);
                Ok(changed)
            }
        }
    }

    fn k2i_fibers_in_own_basis(&self, id: &str) -> Vec<Slope> {
        match self.piece(id) {
            Piece::K2I(_) | Piece::Fibered(_) => vec![Slope::FIBER, Slope::SECTION],
            Piece::SolidTorus(_) => vec![],
        }
    }

    // ---- Stage E -------------------------------------------------------

    fn thick(&self, id: &str) -> bool {
        self.fibered(id).is_some_and(FiberedPiece::is_thick)
    }

    pub(crate) fn stage_e(&mut self) -> Result<bool, ReduceError> {
        let candidates: Vec<String> = self
            .edges
            .values()
            .filter(|e| {
                fibrations_match(&e.matrix, Slope::FIBER, Slope::FIBER)
                    && self.thick(&e.a.piece)
                    && self.thick(&e.b.piece)
            })
            .map(|e| e.id.clone())
            .collect();
        let mut changed = false;
        let mut work = self.worklist(candidates);
        while let Some(id) = self.pop(&mut work) {
            let Some(e) = self.edges.get(&id).cloned() else {
                continue;
            };
            if !(self.thick(&e.a.piece) && self.thick(&e.b.piece)) {
                continue;
            }
            self.merge_matching(e)?;
            changed = true;
        }
        Ok(changed)
    }

    fn merge_matching(&mut self, e: TorusEdge) -> Result<(), ReduceError> {
        let pa = self.fibered(&e.a.piece).expect("thick").clone();
        if e.is_loop() {
            let merged = merge_loop(&pa, e.a.slot, e.b.slot, &e.matrix, e.base_reversing)?;
            let (hi, lo) = if e.a.slot > e.b.slot {
                (e.a.slot, e.b.slot)
            } else {
                (e.b.slot, e.a.slot)
            };
            self.remove_slot(&e.a.piece, hi);
            self.remove_slot(&e.a.piece, lo);
            self.drop_edge(&e.id);
            self.pieces
                .insert(e.a.piece.clone(), Piece::Fibered(merged));
            self.mv(
                MoveKind::MergeMatchingTorus,
                vec![e.id.clone(), e.a.piece.clone()],
                vec![e.a.piece],
                None,
            );
            return Ok(());
        }
        let pb = self.fibered(&e.b.piece).expect("thick").clone();
        let merged = merge_across(&pa, e.a.slot, &pb, e.b.slot, &e.matrix, e.base_reversing)?;
        self.remove_slot(&e.a.piece, e.a.slot);
        self.remove_slot(&e.b.piece, e.b.slot);
        self.drop_edge(&e.id);
        let (keep, gone) = if self.slot_count(&e.a.piece) >= self.slot_count(&e.b.piece) {
            (e.a.piece.clone(), e.b.piece.clone())
        } else {
            (e.b.piece.clone(), e.a.piece.clone())
        };
        // Gluing across a base-reversing torus flips the orientation of the
        // absorbed base, which toggles the flag on its other edges.
        self.transfer_slots(&gone, &keep, e.base_reversing);
        self.drop_piece(&gone);
        self.pieces.insert(keep.clone(), Piece::Fibered(merged));
        self.mv(
            MoveKind::MergeMatchingTorus,
            vec![e.id, e.a.piece, e.b.piece],
            vec![keep],
            None,
        );
        Ok(())
    }
}
