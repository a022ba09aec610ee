use super::*;
use crate::graph::ends;
use crate::io::gsf::parse;
use crate::lattice::IntMatrix2;
use crate::orbifold::{BaseOrbifold, Rational};
use crate::seifert::{K2Fibration, K2IPiece};
use num_traits::Zero;

fn run(text: &str) -> Result<Reduced, ReduceError> {
    reduce(&parse(text).unwrap(), &Policy::SmallestIdFirst)
}

fn diagnosis_kind(text: &str) -> DiagnosisKind {
    match run(text) {
        Err(ReduceError::Diagnosis(d)) => d.kind,
        other => panic!("expected a diagnosis, got {other:?}"),
    }
}

fn only_base(r: &Reduced) -> BaseOrbifold {
    assert_eq!(r.reduced.pieces().len(), 1, "{:?}", r.reduced);
    r.reduced
        .pieces()
        .values()
        .next()
        .unwrap()
        .as_fibered()
        .unwrap()
        .base
        .clone()
}

fn kinds(r: &Reduced) -> Vec<MoveKind> {
    r.trace.iter().map(|m| m.kind).collect()
}

#[test]
fn single_thick_piece_is_already_reduced() {
    let r = run("piece P genus=0 boundary=0 ends=1 cones=2,3,5\n").unwrap();
    assert!(r.trace.is_empty());
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 3, 5]));
    assert!(is_reduced(&r.reduced));
}

#[test]
fn solid_torus_with_meridian_crossing_fiber_once() {
    let r = run("\
piece X genus=0 boundary=1 ends=1 cones=2,3
solidtorus V meridian=1,0
edge e X:0 V:0 matrix=1,0,0,-1
")
    .unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 3]));
    assert_eq!(r.trace.len(), 1);
    assert_eq!(r.trace[0].kind, MoveKind::AbsorbSolidTorus);
    assert_eq!(r.trace[0].alpha, Some(1));
}

#[test]
fn solid_torus_adds_cone_of_order_alpha() {
    let r = run("\
piece X genus=0 boundary=2 ends=1 cones=2
solidtorus V meridian=3,-1
edge e X:1 V:0 matrix=1,0,0,-1
piece Y genus=0 boundary=1 ends=0 cones=2,3
edge f X:0 Y:0 matrix=0,1,1,0
")
    .unwrap();
    assert_eq!(r.trace[0].alpha, Some(3));
    let x = r.reduced.pieces()["X"].as_fibered().unwrap();
    assert_eq!(x.base, BaseOrbifold::planar(1, 1, [2, 3]));
}

#[test]
fn meridian_equal_to_fiber_over_one_ended_plane() {
    let text = "\
piece X genus=0 boundary=1 ends=1 cones=none
solidtorus V meridian=0,1
edge e X:0 V:0 matrix=1,0,0,-1
";
    // X alone would be T²×[0,∞); stage A sees the meridian disk first.
    assert_eq!(diagnosis_kind(text), DiagnosisKind::S1xR2Like);
    let with_cones = "\
piece X genus=0 boundary=1 ends=1 cones=2,3
solidtorus V meridian=0,1
edge e X:0 V:0 matrix=1,0,0,-1
";
    assert_eq!(diagnosis_kind(with_cones), DiagnosisKind::ReducibleWitness);
}

#[test]
fn two_solid_tori_are_closed() {
    let lens = "\
solidtorus V meridian=1,0
solidtorus W meridian=2,1
edge e V:0 W:0 matrix=0,1,1,0
";
    assert_eq!(diagnosis_kind(lens), DiagnosisKind::ClosedSeifert);
    let s2xs1 = "\
solidtorus V meridian=1,0
solidtorus W meridian=1,0
edge e V:0 W:0 matrix=1,0,0,-1
";
    assert_eq!(diagnosis_kind(s2xs1), DiagnosisKind::ReducibleWitness);
}

#[test]
fn product_cycle_is_a_torus_bundle() {
    let text = "\
piece T0 genus=0 boundary=2 ends=0 cones=none
piece T1 genus=0 boundary=2 ends=0 cones=none
piece T2 genus=0 boundary=2 ends=0 cones=none
edge a T0:1 T1:0 matrix=1,0,0,-1
edge b T1:1 T2:0 matrix=1,0,0,-1
edge c T2:1 T0:0 matrix=2,1,1,0
";
    assert_eq!(diagnosis_kind(text), DiagnosisKind::ClosedNonSeifert);
}

#[test]
fn chain_composes_through_product_pieces() {
    let r = run("\
piece A genus=0 boundary=1 ends=1 cones=2,3
piece T genus=0 boundary=2 ends=0 cones=none
piece B genus=0 boundary=1 ends=1 cones=2,5
edge e1 A:0 T:0 matrix=2,3,1,1
edge e2 T:1 B:0 matrix=0,1,1,0
")
    .unwrap();
    assert_eq!(kinds(&r), vec![MoveKind::MergeT2xIChain]);
    assert_eq!(r.reduced.edges().len(), 1);
    let e = r.reduced.edges().values().next().unwrap();
    let m1 = IntMatrix2::new(2, 3, 1, 1);
    let m2 = IntMatrix2::new(0, 1, 1, 0);
    let expected = m2
        .checked_mul(&IntMatrix2::PRODUCT_TRANSPORT)
        .unwrap()
        .checked_mul(&m1)
        .unwrap();
    assert_eq!((e.a.piece.as_str(), e.b.piece.as_str()), ("A", "B"));
    assert_eq!(*e.matrix.matrix(), expected);
    assert!(is_reduced(&r.reduced));
}

#[test]
fn chain_with_both_ends_on_one_piece_becomes_a_loop() {
    let r = run("\
piece A genus=0 boundary=2 ends=1 cones=2,3
piece T genus=0 boundary=2 ends=0 cones=none
edge e1 A:0 T:0 matrix=2,3,1,1
edge e2 T:1 A:1 matrix=1,1,1,0
")
    .unwrap();
    assert_eq!(r.reduced.edges().len(), 1);
    assert!(r.reduced.edges().values().next().unwrap().is_loop());
}

#[test]
fn product_ray_becomes_an_end() {
    let r = run("\
piece X genus=0 boundary=1 ends=0 cones=2,3,7
ray r attach=X:0 period=1
  piece genus=0 boundary=2 ends=0 cones=none matrix=1,0,0,-1
")
    .unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 3, 7]));
    assert_eq!(kinds(&r), vec![MoveKind::CollapseRay]);
}

#[test]
fn half_infinite_annulus_becomes_an_end() {
    let r = run("\
piece X genus=0 boundary=1 ends=0 cones=2,3,7
piece H genus=0 boundary=1 ends=1 cones=none
edge e X:0 H:0 matrix=0,1,1,0
")
    .unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 3, 7]));
}

#[test]
fn line_of_products_is_t2xr() {
    let r = run("\
piece T genus=0 boundary=2 ends=0 cones=none
ray r attach=T:0 period=1
  piece genus=0 boundary=2 ends=0 cones=none matrix=1,0,0,-1
ray s attach=T:1 period=1
  piece genus=0 boundary=2 ends=0 cones=none matrix=0,1,1,0
")
    .unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 2, []));
    assert!(r.reduced.rays().is_empty());
    assert!(is_reduced(&r.reduced));
}

#[test]
fn solid_torus_feeding_a_product_ray_is_an_exhaustion() {
    let text = "\
solidtorus V meridian=1,0
piece T genus=0 boundary=2 ends=0 cones=none
edge e V:0 T:0 matrix=1,0,0,-1
ray r attach=T:1 period=1
  piece genus=0 boundary=2 ends=0 cones=none matrix=1,0,0,-1
";
    assert_eq!(diagnosis_kind(text), DiagnosisKind::ExhaustionBySolidTori);
}

fn k2xi_with(matrix: &str) -> Reduced {
    run(&format!(
        "piece Y genus=0 boundary=1 ends=1 cones=2,3\nk2xi K\nedge e Y:0 K:0 matrix={matrix}\n"
    ))
    .unwrap()
}

#[test]
fn k2xi_merges_with_moebius_fibration() {
    let r = k2xi_with("1,0,0,-1");
    assert_eq!(
        only_base(&r),
        BaseOrbifold::new(false, 1, 0, 1, [2, 3]).unwrap()
    );
    assert_eq!(kinds(&r), vec![MoveKind::ResolveK2xI]);
}

#[test]
fn k2xi_merges_with_disk_fibration() {
    let r = k2xi_with("0,1,1,0");
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 2, 2, 3]));
}

#[test]
fn k2xi_without_match_keeps_its_torus() {
    let r = k2xi_with("0,1,1,2");
    assert!(r.trace.is_empty());
    assert_eq!(
        r.reduced.pieces()["K"],
        Piece::K2I(K2IPiece {
            fibration: Some(K2Fibration::Moebius)
        })
    );
    assert!(is_reduced(&r.reduced));
}

#[test]
fn fibered_k2xi_is_normalised() {
    // Over the disk with two order-2 cones, fiber (0,1). The neighbor's fiber
    // lands on (1,1): neither fibration matches.
    let r = run("\
piece Y genus=0 boundary=1 ends=1 cones=2,3
piece D genus=0 boundary=1 ends=0 cones=2,2
edge e Y:0 D:0 matrix=1,1,2,1
")
    .unwrap();
    assert_eq!(
        r.reduced.pieces()["D"],
        Piece::K2I(K2IPiece {
            fibration: Some(K2Fibration::DiskTwoCones)
        })
    );
    assert!(is_reduced(&r.reduced));
    let again = reduce(&r.reduced, &Policy::SmallestIdFirst).unwrap();
    assert!(again.trace.is_empty());
    assert_eq!(again.reduced, r.reduced);

    // (0,1) in the disk basis is (1,0) in the K²×~I basis: matching the
    // neighbor's fiber with it is a merge over the disk.
    let r = run("\
piece Y genus=0 boundary=1 ends=1 cones=2,3
piece D genus=0 boundary=1 ends=0 cones=2,2
edge e Y:0 D:0 matrix=1,0,0,-1
")
    .unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 2, 2, 3]));
}

#[test]
fn matching_tori_merge() {
    let r = run("\
piece A genus=0 boundary=3 ends=0 cones=none
piece B genus=0 boundary=3 ends=1 cones=none
edge e A:2 B:0 matrix=1,0,0,-1
edge f A:0 A:1 matrix=1,0,0,-1
edge g B:1 B:2 matrix=0,1,1,0
")
    .unwrap();
    assert_eq!(r.trace.len(), 2);
    assert!(r
        .trace
        .iter()
        .all(|m| m.kind == MoveKind::MergeMatchingTorus));
    let p = r
        .reduced
        .pieces()
        .values()
        .next()
        .unwrap()
        .as_fibered()
        .unwrap();
    assert_eq!(p.base, BaseOrbifold::new(true, 1, 2, 1, []).unwrap());
    assert_eq!(r.reduced.edges().len(), 1);
    assert!(is_reduced(&r.reduced));
}

#[test]
fn orientation_flags_do_not_depend_on_merge_order() {
    let text = "\
piece A genus=0 boundary=2 ends=1 cones=2
piece B genus=0 boundary=2 ends=0 cones=3
edge e1 A:0 B:0 matrix=1,0,0,-1 reversing
edge e2 A:1 B:1 matrix=1,0,0,-1
";
    let g = parse(text).unwrap();
    let bases: Vec<BaseOrbifold> = (0..8)
        .map(|s| {
            let r = reduce(&g, &Policy::Seeded(s)).unwrap();
            only_base(&r)
        })
        .collect();
    assert!(bases.iter().all(|b| *b == bases[0]));
    assert!(!bases[0].orientable());
    assert_eq!(bases[0].genus(), 2);
}

#[test]
fn non_maximal_solid_torus_is_reported() {
    let text = "\
piece P genus=0 boundary=3 ends=0 cones=none
solidtorus V meridian=1,0
solidtorus W meridian=1,0
piece X genus=0 boundary=1 ends=1 cones=2,3
edge a P:0 V:0 matrix=1,0,0,-1
edge b P:1 W:0 matrix=1,0,0,-1
edge c P:2 X:0 matrix=0,1,1,0
";
    assert_eq!(diagnosis_kind(text), DiagnosisKind::NonMaximalSolidTorus);
}

#[test]
fn invalid_input_is_rejected() {
    let g = parse("piece D genus=0 boundary=0 ends=1 cones=5\n").unwrap();
    assert!(matches!(
        reduce(&g, &Policy::SmallestIdFirst),
        Err(ReduceError::Invalid(_))
    ));
}

#[test]
fn ledger_and_ends_along_a_trace() {
    let text = "\
piece X genus=0 boundary=3 ends=0 cones=2
solidtorus V meridian=3,-1
piece T genus=0 boundary=2 ends=0 cones=none
solidtorus W meridian=2,1
edge a X:0 V:0 matrix=1,0,0,-1
edge b X:1 T:0 matrix=1,0,0,-1
edge c T:1 W:0 matrix=1,0,0,-1
ray r attach=X:2 period=1
  piece genus=0 boundary=2 ends=0 cones=none matrix=1,0,0,-1
";
    let g = parse(text).unwrap();
    let chi = |g: &GraphStructure| -> Rational {
        g.pieces()
            .values()
            .map(|p| p.euler_contribution())
            .fold(Rational::zero(), |a, b| a + b)
    };
    let mut prev = chi(&g);
    let start_ends = ends(&g);
    let mut audit = |m: &Move, after: &GraphStructure| {
        let now = chi(after);
        let expected = match (m.kind, m.alpha) {
            (MoveKind::AbsorbSolidTorus, Some(a)) => {
                prev.clone() + Rational::new(1.into(), a.into())
            }
            _ => prev.clone(),
        };
        assert_eq!(now, expected, "after {m}");
        assert_eq!(ends(after), start_ends, "after {m}");
        prev = now;
    };
    let r = reduce_with_observer(&g, &Policy::SmallestIdFirst, &mut audit).unwrap();
    assert_eq!(only_base(&r), BaseOrbifold::planar(0, 1, [2, 2, 3]));
}
