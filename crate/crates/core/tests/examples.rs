//! Worked examples, one test each.

use u21_core::flag::{act, canonicalize, enumerate_points, generation_check, orbits, point_from_index, Frame};
use u21_core::group::{
    coset_reps_s, coset_reps_theta, eta, iwasawa, hu_generators, make_element, t_elem, t_n, u_elem,
    verify_coset_system, verify_diag_identity, verify_theta_cosets, ElementKind, GroupElement,
};
use u21_core::pseries::{
    basis_certificate, verify_identities, CharacterSpec, Model, TorusCharacter,
};
use u21_core::scalar::rat;
use u21_core::whittaker::{newform_value, verify_phi_relations};
use u21_core::{FieldConfig, SubgroupSpec};

fn cfg(p: u64, w: u32) -> FieldConfig {
    FieldConfig::with_window(p, w).unwrap()
}

/// p = 5 with eps = 2.
fn cfg5(w: u32) -> FieldConfig {
    FieldConfig::new(5, Some(2), w).unwrap()
}

#[test]
fn field_arithmetic() {
    let c = cfg5(8);
    let a = c.elem(0, 1, 1);
    let b = c.elem(0, 1, -1);
    let prod = a.mul(&b);
    assert_eq!(prod, c.int(-1));
    assert_eq!(prod.valuation(), Some(0));
    let u = c.elem(0, 3, 2);
    assert_eq!(c.uniformizer_pow(2).mul(&u).valuation(), Some(2));
    assert_eq!(c.elem(0, 1, 2).conj(), c.elem(0, 1, -2));
    assert_eq!(a.norm(), c.int(-1));
    let c3 = cfg(3, 4);
    assert!(c3.elem(-1, 0, 1).trace().is_zero());
}

#[test]
fn inverse_against_brute_force() {
    let c = cfg5(3);
    let x = c.elem(0, 1, 1);
    let inv = x.inv().unwrap().residue(3).unwrap();
    let m = 125u64;
    let mut found = Vec::new();
    for a in 0..m {
        for b in 0..m {
            // (a + b r)(1 + r) = (a + 2b) + (a + b) r with r^2 = 2
            if (a + 2 * b) % m == 1 && (a + b) % m == 0 {
                found.push((a, b));
            }
        }
    }
    assert_eq!(found, vec![inv]);
}

#[test]
fn norm_one_from_unit() {
    let c = cfg5(3);
    assert_eq!(c.one().norm_one_from_unit().unwrap(), c.int(-1));
    assert_eq!(c.sqrt_eps().norm_one_from_unit().unwrap(), c.one());
    let l = c.elem(0, 1, 1).norm_one_from_unit().unwrap();
    assert_eq!(l.mul(&l.conj()).residue(3).unwrap(), (1, 0));
}

#[test]
fn named_elements() {
    let c = cfg(5, 10);
    let y = c.elem(0, 0, 3);
    let u = make_element(&c, ElementKind::U(c.zero(), y)).unwrap();
    assert_eq!(*u.entry(0, 2), y);
    assert!(u.is_unitary());
    let u1 = make_element(&c, ElementKind::U(c.one(), c.rational(-1, 2).unwrap())).unwrap();
    assert!(u1.is_unitary());
    assert!(make_element(&c, ElementKind::U(c.one(), c.one())).is_err());
    for n in 0..4 {
        assert!(eta(&c).mul(&t_n(&c, n)).eq_within(&t_n(&c, n + 1)));
    }
}

#[test]
fn iwasawa_decompositions() {
    let c = cfg(3, 12);
    let k0 = SubgroupSpec::Kn(0).generators(&c);
    let g = k0[1].mul(&k0[3]).mul(&k0[0]);
    let (b, k) = iwasawa(&c, &g).unwrap();
    assert!(SubgroupSpec::BK0.contains(&b) && SubgroupSpec::Kn(0).contains(&k));
    assert!(b.mul(&k).eq_within(&g));

    let x = c.uniformizer_pow(-1);
    let uh = make_element(&c, ElementKind::UHat(x, u21_core::group::forced_y(&c, &x))).unwrap();
    let (b, k) = iwasawa(&c, &uh).unwrap();
    assert!(b.is_upper_triangular() && SubgroupSpec::Kn(0).contains(&k));
    assert!(b.mul(&k).eq_within(&uh));

    for n in 1..4 {
        let g = t_n(&c, n);
        let (b, k) = iwasawa(&c, &g).unwrap();
        assert!(b.is_upper_triangular() && SubgroupSpec::Kn(0).contains(&k));
        assert_eq!(b.entry(0, 0).valuation(), Some(-n));
        assert_eq!(b.entry(2, 2).valuation(), Some(n));
        assert_eq!(b.entry(1, 1).valuation(), Some(0));
        assert!(b.mul(&k).eq_within(&g));
    }
}

#[test]
fn coset_representatives() {
    let c3 = cfg(3, 12);
    let reps = coset_reps_theta(&c3, 0);
    assert_eq!(reps.len(), 4);
    assert!(reps[0].eq_within(&t_n(&c3, 1)));
    assert_eq!(coset_reps_theta(&cfg(5, 12), 1).len(), 6);

    let s = coset_reps_s(&c3);
    assert_eq!(s.len(), 81);
    assert!(s[0].eq_within(&GroupElement::identity(&c3)));

    let r = verify_theta_cosets(&c3, 0);
    assert!(r.pass && r.index == 4);
    let r = verify_coset_system(&c3, SubgroupSpec::UPinv, SubgroupSpec::UO, &s);
    assert!(r.pass && r.index == 81, "{r:?}");

    let mut dup = reps.clone();
    dup.push(reps[2].clone());
    let r = verify_coset_system(&c3, SubgroupSpec::Kn(1), SubgroupSpec::KnCap(0), &dup);
    assert!(!r.pass);
    assert_eq!(r.collision, Some((2, 4)));
}

#[test]
fn diagonal_identity() {
    let c = cfg5(12);
    assert!(verify_diag_identity(&c, 0, &c.elem(0, 1, 1)).unwrap().displayed_holds);
    let z = c.one().add(&c.elem(-2, 0, 3));
    assert!(verify_diag_identity(&c, 2, &z).unwrap().displayed_holds);
    let c3 = cfg(3, 12);
    assert!(verify_diag_identity(&c3, 1, &c3.uniformizer_pow(-1)).is_err());
}

#[test]
fn canonical_points() {
    let c = cfg(3, 12);
    let one = GroupElement::identity(&c);
    let b = t_elem(&c, c.elem(0, 2, 1)).mul(&u_elem(&c, c.elem(0, 1, 2), c.int(1)));
    assert!(SubgroupSpec::BK0.contains(&b));
    for m in 1..=3 {
        assert_eq!(canonicalize(&c, &one, m).unwrap(), canonicalize(&c, &b, m).unwrap());
    }
    assert_ne!(canonicalize(&c, &t_n(&c, 0), 1).unwrap(), canonicalize(&c, &one, 1).unwrap());
}

#[test]
fn point_enumeration() {
    for (p, m, n) in [(3, 1, 28), (5, 1, 126), (3, 2, 756)] {
        assert_eq!(enumerate_points(&cfg(p, 12), m, 1_000_000).unwrap().len(), n);
    }
}

#[test]
fn action_by_identity_and_congruence_elements() {
    let c = cfg(3, 12);
    let chi = TorusCharacter::unramified(&c, (2, 3));
    let m = 2;
    // a principal congruence element of level m
    let gamma = u_elem(&c, c.elem(m as i64, 1, 1), c.elem(2 * m as i64, 1, 0));
    for i in [0u64, 5, 100, 500] {
        let x = point_from_index(&c, m, i).unwrap();
        let (y, b) = act(&c, &x, &GroupElement::identity(&c)).unwrap();
        assert_eq!(y, x);
        assert!(b.eq_within(&GroupElement::identity(&c)));
        let (y, b) = act(&c, &x, &gamma).unwrap();
        assert_eq!(y, x);
        assert_eq!(chi.on_borel(&b).unwrap(), (0, 0));
    }
}

#[test]
fn orbit_counts() {
    let c = cfg(3, 12);
    let k0 = SubgroupSpec::Kn(0).generators(&c);
    for m in 1..=3 {
        assert_eq!(orbits(&c, Frame::standard(), m, &k0, None, "K0", 10_000_000).unwrap().orbit_count(), 1);
    }
    let k1 = SubgroupSpec::Kn(1).generators(&c);
    assert_eq!(orbits(&c, Frame::for_level(1), 3, &k1, None, "K1", 10_000_000).unwrap().orbit_count(), 1);
    let k2 = SubgroupSpec::Kn(2).generators(&c);
    assert_eq!(orbits(&c, Frame::for_level(2), 4, &k2, None, "K2", 10_000_000).unwrap().orbit_count(), 2);
}

#[test]
fn generation() {
    let c = cfg(3, 12);
    let budget = 10_000_000;
    assert!(generation_check(&c, SubgroupSpec::Kn(0), &hu_generators(&c, 0), 2, budget).unwrap().pass);
    // K_1 at level 3 would enumerate K_1 mod p^2; levels 1 and 2 are checked
    for m in 1..=2 {
        assert!(generation_check(&c, SubgroupSpec::Kn(1), &hu_generators(&c, 1), m, budget).unwrap().pass);
    }
    let uo = SubgroupSpec::UO.generators(&c);
    assert!(!generation_check(&c, SubgroupSpec::Kn(0), &uo, 1, budget).unwrap().pass);
}

#[test]
fn fixed_space_dimensions() {
    let c = cfg(3, 12);
    let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
    assert_eq!(m.v(0).unwrap().dim(), 1);
    assert_eq!(m.v(1).unwrap().dim(), 1);
    let e1 = TorusCharacter::new(&c, CharacterSpec::e1_order_q_plus_1(), (2, 3)).unwrap();
    assert_eq!(e1.n_pi(), 1);
    assert_eq!(Model::new(&c, &e1).v(0).unwrap().dim(), 0);
}

#[test]
fn operators() {
    let c = cfg(3, 12);
    let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
    let x = rat(2, 3);
    let e = m.eta(0).unwrap();
    // V(0) -> V(2), dimensions 1 and 2
    assert_eq!((e.rows, e.cols), (2, 1));
    assert_eq!(e.specialize(&x).rank(), 1);
    let r = verify_identities(&m, 2, &x).unwrap();
    assert!(r.pass(), "{:?}", r.first_failure());
}

#[test]
fn basis_certificates() {
    let c = cfg(3, 12);
    let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
    let x = rat(2, 3);
    let b0 = basis_certificate(&m, 0, 0, None, &x).unwrap();
    assert_eq!((b0.dim, b0.rank), (1, 1));
    let b1 = basis_certificate(&m, 0, 1, None, &x).unwrap();
    assert_eq!((b1.exponents.clone(), b1.rank), (vec![(1, 0)], 1));
    let b2 = basis_certificate(&m, 0, 2, None, &x).unwrap();
    let mut ex = b2.exponents.clone();
    ex.sort();
    assert_eq!(ex, vec![(0, 1), (2, 0)]);
    assert_eq!((b2.dim, b2.rank), (2, 2));
}

#[test]
fn whittaker_examples() {
    let c = cfg(3, 12);
    let x = rat(2, 3);
    let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
    let w = newform_value(&m, 0, &x).unwrap();
    assert!(w.stabilized && !w.value.is_zero());
    for ch in verify_phi_relations(&m, 0, &x).unwrap() {
        assert!(ch.pass, "{ch:?}");
    }
    // conductor 2 > n_pi = 0
    let q = TorusCharacter::new(&c, CharacterSpec::quadratic(3), (2, 3)).unwrap();
    assert_eq!(q.n_pi(), 0);
    let w = newform_value(&Model::new(&c, &q), 2, &x).unwrap();
    assert!(w.stabilized && !w.value.is_zero());
}
