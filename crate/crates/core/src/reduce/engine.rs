//! Mutable working copy of a structure and the bookkeeping primitives the
//! stages are written in terms of.
//!
//! Slots of a piece are kept dense: removing slot `s` moves the last slot
//! into position `s` and re-points whatever is attached there.

use std::collections::{BTreeMap, HashMap};

use super::policy::{Chooser, Worklist};
use super::{Diagnosis, DiagnosisKind, Move, MoveKind, Policy, ReduceError, Reduced};
use crate::graph::{
    ends, validate, Attachment, EdgeId, Endpoint, GraphStructure, PeriodicRay, PieceId, RayId,
    Side, TorusEdge,
};
use crate::lattice::GluingMatrix;
use crate::seifert::{FiberedPiece, Piece};

/// What lies across a slot, seen from that slot.
#[derive(Debug, Clone)]
pub(crate) enum Across {
    Edge {
        id: EdgeId,
        side: Side,
        far: Endpoint,
        /// From this slot's coordinates to the far slot's coordinates.
        to_far: GluingMatrix,
    },
    Ray(RayId),
}

/// Called after every move with the structure it produced.
pub(crate) type Observer<'o> = &'o mut dyn FnMut(&Move, &GraphStructure);

pub(crate) struct Engine<'o> {
    pub(crate) pieces: BTreeMap<PieceId, Piece>,
    pub(crate) edges: BTreeMap<EdgeId, TorusEdge>,
    pub(crate) rays: BTreeMap<RayId, PeriodicRay>,
    slots: HashMap<PieceId, Vec<Attachment>>,
    pub(crate) trace: Vec<Move>,
    pub(crate) chooser: Chooser,
    /// The input has no ends, so no reduced structure exists; the stages
    /// run only to work out which diagnosis applies.
    pub(crate) closed: bool,
    observer: Option<Observer<'o>>,
}

pub(crate) fn run(
    g: &GraphStructure,
    policy: &Policy,
    observer: Option<Observer<'_>>,
) -> Result<Reduced, ReduceError> {
    validate(g).map_err(ReduceError::Invalid)?;
    let mut engine = Engine::new(g, policy, observer);
    loop {
        let mut changed = engine.stage_a()?;
        changed |= engine.stage_b()?;
        changed |= engine.stage_c()?;
        changed |= engine.stage_d()?;
        changed |= engine.stage_e()?;
        if !changed {
            break;
        }
    }
    if engine.closed {
        return Err(ReduceError::Diagnosis(engine.closed_diagnosis()));
    }
    Ok(Reduced {
        reduced: engine.snapshot(),
        trace: engine.trace,
    })
}

impl<'o> Engine<'o> {
    fn new(g: &GraphStructure, policy: &Policy, observer: Option<Observer<'o>>) -> Self {
        let slots = g
            .slot_table()
            .into_iter()
            .map(|(id, s)| {
                let filled = s
                    .into_iter()
                    .map(|a| a.expect("validated structures use every slot"))
                    .collect();
                (id.to_string(), filled)
            })
            .collect();
        Engine {
            pieces: g.pieces().clone(),
            edges: g.edges().clone(),
            rays: g.rays().clone(),
            slots,
            trace: Vec::new(),
            chooser: Chooser::new(policy),
            closed: ends(g) == 0,
            observer,
        }
    }

    pub(crate) fn snapshot(&self) -> GraphStructure {
        GraphStructure::from_parts(self.pieces.clone(), self.edges.clone(), self.rays.clone())
    }

    pub(crate) fn record(&mut self, mv: Move) {
        if let Some(obs) = self.observer.take() {
            let snap = self.snapshot();
            obs(&mv, &snap);
            self.observer = Some(obs);
        }
        self.trace.push(mv);
    }

    pub(crate) fn mv(
        &mut self,
        kind: MoveKind,
        affected: Vec<String>,
        result: Vec<String>,
        alpha: Option<u32>,
    ) {
        self.record(Move {
            kind,
            affected,
            result,
            alpha,
        });
    }

    pub(crate) fn worklist<T: Ord + Clone>(
        &self,
        items: impl IntoIterator<Item = T>,
    ) -> Worklist<T> {
        self.chooser.worklist(items)
    }

    pub(crate) fn pop<T: Ord + Clone>(&mut self, list: &mut Worklist<T>) -> Option<T> {
        self.chooser.pop(list)
    }

    pub(crate) fn piece(&self, id: &str) -> &Piece {
        &self.pieces[id]
    }

    pub(crate) fn fibered(&self, id: &str) -> Option<&FiberedPiece> {
        self.pieces.get(id).and_then(Piece::as_fibered)
    }

    pub(crate) fn slot_count(&self, id: &str) -> usize {
        self.slots.get(id).map_or(0, Vec::len)
    }

    pub(crate) fn across(&self, piece: &str, slot: usize) -> Across {
        match &self.slots[piece][slot] {
            Attachment::Edge(id, side) => {
                let e = &self.edges[id];
                Across::Edge {
                    id: id.clone(),
                    side: *side,
                    far: e.endpoint(side.other()).clone(),
                    to_far: e.matrix_from(*side),
                }
            }
            Attachment::Ray(id) => Across::Ray(id.clone()),
        }
    }

    /// All slots of `piece`, each with what lies across it.
    pub(crate) fn neighbors(&self, piece: &str) -> Vec<(usize, Across)> {
        (0..self.slot_count(piece))
            .map(|s| (s, self.across(piece, s)))
            .collect()
    }

    fn set_endpoint(&mut self, att: &Attachment, ep: Endpoint) {
        match att {
            Attachment::Edge(id, side) => {
                let e = self.edges.get_mut(id).expect("attached edge exists");
                match side {
                    Side::A => e.a = ep,
                    Side::B => e.b = ep,
                }
            }
            Attachment::Ray(id) => {
                self.rays.get_mut(id).expect("attached ray exists").attach = ep;
            }
        }
    }

    /// Drops slot `slot` of `piece`; the last slot takes its index.
    pub(crate) fn remove_slot(&mut self, piece: &str, slot: usize) {
        let list = self.slots.get_mut(piece).expect("piece has a slot list");
        list.swap_remove(slot);
        if slot < list.len() {
            let moved = list[slot].clone();
            self.set_endpoint(&moved, Endpoint::new(piece, slot));
        }
    }

    /// Puts `att` on a fresh slot at the end of `piece`'s list.
    pub(crate) fn push_slot(&mut self, piece: &str, att: Attachment) {
        let list = self.slots.entry(piece.to_string()).or_default();
        list.push(att.clone());
        let slot = list.len() - 1;
        self.set_endpoint(&att, Endpoint::new(piece, slot));
    }

    /// Replaces whatever sits on `piece:slot` with `att`.
    pub(crate) fn put_slot(&mut self, piece: &str, slot: usize, att: Attachment) {
        self.slots.get_mut(piece).expect("piece has a slot list")[slot] = att.clone();
        self.set_endpoint(&att, Endpoint::new(piece, slot));
    }

    /// Removes a piece all of whose slots have already been detached or are
    /// about to be discarded.
    pub(crate) fn drop_piece(&mut self, piece: &str) -> Piece {
        self.slots.remove(piece);
        self.pieces.remove(piece).expect("piece exists")
    }

    pub(crate) fn drop_edge(&mut self, id: &str) -> TorusEdge {
        self.edges.remove(id).expect("edge exists")
    }

    /// Moves every remaining slot of `from` to the end of `into`'s list,
    /// optionally toggling the base orientation flag of moved edges.
    pub(crate) fn transfer_slots(&mut self, from: &str, into: &str, toggle_reversing: bool) {
        let moved = self.slots.remove(from).unwrap_or_default();
        for att in moved {
            if toggle_reversing {
                if let Attachment::Edge(id, _) = &att {
                    let e = self.edges.get_mut(id).expect("attached edge exists");
                    e.base_reversing = !e.base_reversing;
                }
            }
            self.push_slot(into, att);
        }
    }

    pub(crate) fn diagnosis(
        &self,
        kind: DiagnosisKind,
        witnesses: Vec<String>,
        message: impl Into<String>,
    ) -> ReduceError {
        ReduceError::Diagnosis(Diagnosis::new(kind, witnesses, message))
    }

    /// The diagnosis for a closed input whose stages ran to completion.
    fn closed_diagnosis(&self) -> Diagnosis {
        let ids: Vec<String> = self.pieces.keys().cloned().collect();
        if self.pieces.len() == 1 && self.edges.is_empty() {
            Diagnosis::new(
                DiagnosisKind::ClosedSeifert,
                ids,
                "the manifold is closed and carries a single Seifert fibration",
            )
        } else {
            let mut w: Vec<String> = self.edges.keys().cloned().collect();
            w.extend(ids);
            Diagnosis::new(
                DiagnosisKind::ClosedNonSeifert,
                w,
                "the manifold is closed; its remaining tori do not merge into one Seifert piece",
            )
        }
    }
}
