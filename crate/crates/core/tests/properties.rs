use proptest::prelude::*;

use u21_core::flag::{act, UnitCocycle, canonicalize, determinism_check, orbits, orbits_ordered, point_from_index, Frame, PointSpace};
use u21_core::group::{eta_pow, t_elem, u_elem, z_elem, GroupElement};
use u21_core::pseries::{CharacterSpec, TorusCharacter};
use u21_core::whittaker::AdditiveCharacter;
use u21_core::{EElement, FieldConfig, SubgroupSpec};

fn cfg(p: u64) -> FieldConfig {
    FieldConfig::with_window(p, 12).unwrap()
}

fn prime() -> impl Strategy<Value = u64> {
    prop_oneof![Just(3u64), Just(5u64)]
}

/// A non-zero element `p^v (a + b sqrt(eps))` with a unit mantissa.
fn elem(c: &FieldConfig, v: i64, a: i64, b: i64) -> EElement {
    let p = c.p as i64;
    let a = if a % p == 0 && b % p == 0 { a + 1 } else { a };
    c.elem(v, a, b)
}

fn unit(c: &FieldConfig, a: i64, b: i64) -> EElement {
    elem(c, 0, a, b)
}

fn word(c: &FieldConfig, gens: &[GroupElement], idx: &[usize]) -> GroupElement {
    idx.iter().fold(GroupElement::identity(c), |g, i| g.mul(&gens[i % gens.len()]))
}

fn integral_or_zero(c: &FieldConfig, v: i64, a: i64, b: i64) -> EElement {
    if v > 6 { c.zero() } else { elem(c, v, a, b) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuations(p in prime(), v1 in -4i64..4, v2 in -4i64..4, a in 0i64..50, b in 0i64..50, c_ in 0i64..50, d in 0i64..50) {
        let c = cfg(p);
        let (x, y) = (elem(&c, v1, a, b), elem(&c, v2, c_, d));
        prop_assert_eq!(x.mul(&y).valuation(), Some(v1 + v2));
        let s = x.add(&y);
        if v1 != v2 {
            prop_assert_eq!(s.valuation(), Some(v1.min(v2)));
        } else if let Some(vs) = s.valuation() {
            prop_assert!(vs >= v1);
        }
    }

    #[test]
    fn conj_norm_trace(p in prime(), v in -3i64..3, a in 0i64..80, b in 0i64..80, v2 in -3i64..3, c_ in 0i64..80, d in 0i64..80) {
        let c = cfg(p);
        let (x, y) = (elem(&c, v, a, b), elem(&c, v2, c_, d));
        prop_assert_eq!(x.conj().conj(), x.clone());
        prop_assert!(x.norm().is_in_f() && x.trace().is_in_f());
        prop_assert_eq!(x.mul(&y).norm(), x.norm().mul(&y.norm()));
        prop_assert_eq!(x.mul(&y).conj(), x.conj().mul(&y.conj()));
        let f = elem(&c, v, a, 0);
        prop_assert_eq!(f.conj(), f);
    }

    #[test]
    fn inverse(p in prime(), v in -3i64..3, a in 0i64..80, b in 0i64..80) {
        let c = cfg(p);
        let x = elem(&c, v, a, b);
        prop_assert_eq!(x.mul(&x.inv().unwrap()), c.one());
    }

    #[test]
    fn rational_oracle(p in prime(), n1 in -60i64..60, d1 in 1i64..60, n2 in -60i64..60, d2 in 1i64..60) {
        prop_assume!(n1 != 0 && n2 != 0 && n1 * d2 + n2 * d1 != 0);
        let c = cfg(p);
        let (x, y) = (c.rational(n1, d1).unwrap(), c.rational(n2, d2).unwrap());
        prop_assert_eq!(x.mul(&y), c.rational(n1 * n2, d1 * d2).unwrap());
        prop_assert_eq!(x.add(&y), c.rational(n1 * d2 + n2 * d1, d1 * d2).unwrap());
    }

    #[test]
    fn norm_one_filtration(p in prime(), n in 1i64..5, a in 0i64..80, b in 0i64..80) {
        let c = cfg(p);
        let z = c.one().add(&elem(&c, n, a, b));
        // -conj(z)/z is close to -1 here; sqrt(eps) z lands in E^1_n
        let l = z.norm_one_from_unit().unwrap();
        prop_assert_eq!(l.norm(), c.one());
        let d = l.add(&c.one());
        prop_assert!(d.is_zero() || d.valuation().unwrap() >= n);
        let l = c.sqrt_eps().mul(&z).norm_one_from_unit().unwrap();
        let d = l.sub(&c.one());
        prop_assert!(d.is_zero() || d.valuation().unwrap() >= n);
    }

    #[test]
    fn additive_character(p in prime(), va in -3i64..3, a in 0i64..80, b in 0i64..80, vb in -3i64..3, c_ in 0i64..80, d in 0i64..80) {
        let c = cfg(p);
        let psi = AdditiveCharacter { p };
        let (x, y) = (elem(&c, va, a, b), elem(&c, vb, c_, d));
        let m = 3;
        let q = p.pow(m);
        let s = x.add(&y);
        prop_assert_eq!(psi.exp(&s, m).unwrap(), (psi.exp(&x, m).unwrap() + psi.exp(&y, m).unwrap()) % q);
        if va >= 0 {
            prop_assert_eq!(psi.exp(&x, m).unwrap(), 0);
        }
    }

    #[test]
    fn unitary_inverse(p in prime(), idx in prop::collection::vec(0usize..64, 1..6)) {
        let c = cfg(p);
        let gens = SubgroupSpec::Kn(1).generators(&c);
        let g = word(&c, &gens, &idx).mul(&eta_pow(&c, idx[0] as i64 % 3 - 1));
        prop_assert!(g.is_unitary());
        prop_assert!(g.mul(&g.j_inverse()).eq_within(&GroupElement::identity(&c)));
    }

    #[test]
    fn canonicalize_left_invariant(
        p in prime(), idx in prop::collection::vec(0usize..64, 1..6),
        a in 0i64..80, b in 0i64..80, vx in 0i64..8, xa in 0i64..80, xb in 0i64..80, vs in 0i64..8, s in 1i64..80,
    ) {
        let c = cfg(p);
        let k = word(&c, &SubgroupSpec::Kn(0).generators(&c), &idx);
        let bk = t_elem(&c, unit(&c, a, b)).mul(&u_elem(&c, integral_or_zero(&c, vx, xa, xb), integral_or_zero(&c, vs, s, 0)));
        prop_assert!(SubgroupSpec::BK0.contains(&bk));
        for m in 1..=2 {
            prop_assert_eq!(canonicalize(&c, &bk.mul(&k), m).unwrap(), canonicalize(&c, &k, m).unwrap());
        }
    }

    #[test]
    fn act_is_a_right_action(p in prime(), i in 0u64..5000, g in prop::collection::vec(0usize..64, 1..4), h in prop::collection::vec(0usize..64, 1..4)) {
        let c = cfg(p);
        let m = 2;
        let x = point_from_index(&c, m, i % PointSpace::new(&c, 0, m).unwrap().count()).unwrap();
        let gens = SubgroupSpec::Kn(0).generators(&c);
        let (g, h) = (word(&c, &gens, &g), word(&c, &gens, &h));
        let step = act(&c, &act(&c, &x, &g).unwrap().0, &h).unwrap().0;
        prop_assert_eq!(step, act(&c, &x, &g.mul(&h)).unwrap().0);
    }

    #[test]
    fn character_multiplicative(
        spec in prop_oneof![Just("quadratic"), Just("e1"), Just("c=2,u=0:1:0"), Just("cp=2,v=1:0")],
        v1 in -3i64..3, a in 0i64..80, b in 0i64..80, v2 in -3i64..3, c_ in 0i64..80, d in 0i64..80,
        e in 0i64..80, f in 0i64..80,
    ) {
        let c = cfg(3);
        let chi = TorusCharacter::new(&c, CharacterSpec::parse(spec, 3).unwrap(), (2, 3)).unwrap();
        let l = unit(&c, e, f).norm_one_from_unit().unwrap();
        let t1 = t_elem(&c, elem(&c, v1, a, b)).mul(&z_elem(&c, l));
        let t2 = t_elem(&c, elem(&c, v2, c_, d));
        let (k1, j1) = chi.on_borel(&t1).unwrap();
        let (k2, j2) = chi.on_borel(&t2).unwrap();
        prop_assert_eq!(chi.on_borel(&t1.mul(&t2)).unwrap(), (k1 + k2, (j1 + j2) % chi.order()));
        // central character
        let lv = chi.level().max(1);
        prop_assert_eq!(chi.on_borel(&z_elem(&c, l)).unwrap(), (0, chi.central_exp(l.residue(lv).unwrap())));
    }

    #[test]
    fn eta_conjugation(p in prime(), n in 0u32..3, idx in prop::collection::vec(0usize..64, 1..5)) {
        let c = cfg(p);
        let k = word(&c, &SubgroupSpec::Kn(n + 2).generators(&c), &idx);
        let conj = eta_pow(&c, -1).mul(&k).mul(&eta_pow(&c, 1));
        prop_assert!(SubgroupSpec::Kn(n).contains(&conj));
    }

    #[test]
    fn eta_moves_unipotent_radical(p in prime(), vx in 0i64..4, xa in 0i64..80, xb in 0i64..80, vs in 0i64..4, s in 1i64..80) {
        let c = cfg(p);
        let u = u_elem(&c, integral_or_zero(&c, vx, xa, xb), integral_or_zero(&c, vs, s, 0));
        prop_assert!(SubgroupSpec::UO.contains(&u));
        let conj = eta_pow(&c, 1).mul(&u).mul(&eta_pow(&c, -1));
        prop_assert!(SubgroupSpec::UPinv.contains(&conj));
        let back = eta_pow(&c, -1).mul(&conj).mul(&eta_pow(&c, 1));
        prop_assert!(back.eq_within(&u));
    }
}

#[test]
fn orbit_counts_do_not_depend_on_traversal() {
    let c = cfg(3);
    for n in 0..=2 {
        let gens = SubgroupSpec::Kn(n).generators(&c);
        let frame = Frame::for_level(n);
        let a = orbits(&c, frame, n + 1, &gens, None, "K", 10_000_000).unwrap();
        let b = orbits_ordered(&c, frame, n + 1, &gens, None, "K", 10_000_000, true).unwrap();
        assert!(determinism_check(&a, &b));
    }
}

#[test]
fn additive_character_conductor() {
    let c = cfg(3);
    let psi = AdditiveCharacter { p: 3 };
    assert_ne!(psi.exp(&c.uniformizer_pow(-1), 1).unwrap(), 0);
}
