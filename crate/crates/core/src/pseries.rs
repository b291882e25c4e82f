//! The principal series `Ind_B^G chi` (unnormalized: `f(bg) = chi(b) f(g)`)
//! at finite level: characters of the torus, fixed spaces as orbit-indexed
//! functions, and evaluation of basis functions at arbitrary elements.

mod operators;

pub use operators::*;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flag::{self, decode, Frame, OrbitPartition, UnitCocycle};
use crate::group::{complete_isotropic, eta, residue_generator, row_times, t_elem, GroupElement, Row, SubgroupSpec};
use crate::localfield::{pow_u64, Ctx, EElement, FieldConfig, Res, ResidueRing};
use crate::scalar::MonoSum;

/// Finite-order data of a torus character
/// `chi(diag(a, b, conj(a)^-1)) = chi_1(a) chi_2(b)`, `a` in `E^x`, `b` in `E^1`.
///
/// `chi_1` on units is given by exponents on the Teichmuller lift of the
/// residue generator, `1 + p` and `1 + p sqrt(eps)` (the last two only for
/// level 2); `chi_2` by exponents on `zeta = T / conj(T)` and
/// `(1 + p sqrt(eps)) / (1 - p sqrt(eps))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CharacterSpec {
    pub unit_level: u32,
    pub unit_exps: [u64; 3],
    pub e1_level: u32,
    pub e1_exps: [u64; 2],
}

impl CharacterSpec {
    pub fn unramified() -> Self {
        Self { unit_level: 0, unit_exps: [0; 3], e1_level: 0, e1_exps: [0; 2] }
    }

    /// `chi_2` of order `q + 1`, `chi_1` unramified. Central conductor 1.
    pub fn e1_order_q_plus_1() -> Self {
        Self { e1_level: 1, e1_exps: [1, 0], ..Self::unramified() }
    }

    /// `chi_1` the quadratic character of the residue field units of E.
    /// Trivial on `E^1`, so the central character is unramified.
    pub fn quadratic(q: u64) -> Self {
        Self { unit_level: 1, unit_exps: [(q * q - 1) / 2, 0, 0], ..Self::unramified() }
    }

    /// Parses `unramified`, `e1`, `quadratic`, or
    /// `c=<0..2>,u=<e0>:<e1>:<e2>,cp=<0..2>,v=<f0>:<f1>`.
    pub fn parse(s: &str, q: u64) -> Result<Self> {
        match s.trim() {
            "unramified" => return Ok(Self::unramified()),
            "e1" => return Ok(Self::e1_order_q_plus_1()),
            "quadratic" => return Ok(Self::quadratic(q)),
            _ => {}
        }
        let mut out = Self::unramified();
        for part in s.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("bad character field `{part}`")))?;
            let nums = |v: &str| -> Result<Vec<u64>> {
                v.split(':')
                    .map(|x| x.trim().parse::<u64>().map_err(|e| Error::Config(format!("`{x}`: {e}"))))
                    .collect()
            };
            match k.trim() {
                "c" => out.unit_level = v.trim().parse().map_err(|e| Error::Config(format!("c: {e}")))?,
                "cp" => out.e1_level = v.trim().parse().map_err(|e| Error::Config(format!("cp: {e}")))?,
                "u" => {
                    for (i, x) in nums(v)?.into_iter().enumerate().take(3) {
                        out.unit_exps[i] = x;
                    }
                }
                "v" => {
                    for (i, x) in nums(v)?.into_iter().enumerate().take(2) {
                        out.e1_exps[i] = x;
                    }
                }
                other => return Err(Error::Config(format!("unknown character field `{other}`"))),
            }
        }
        if out.unit_level > 2 || out.e1_level > 2 {
            return Err(Error::Config("character levels above 2 are not supported".into()));
        }
        Ok(out)
    }
}

impl fmt::Display for CharacterSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c] = self.unit_exps;
        let [d, e] = self.e1_exps;
        write!(f, "c={},u={a}:{b}:{c},cp={},v={d}:{e}", self.unit_level, self.e1_level)
    }
}

/// A torus character together with a rational specialization of
/// `chi_1(p)`. Values are monomials `x^k zeta_N^j`.
#[derive(Clone, Debug)]
pub struct TorusCharacter {
    pub spec: CharacterSpec,
    pub x_value: (i64, i64),
    pub p: u64,
    ctx: Ctx,
    order: u64,
    unit_ring: Option<ResidueRing>,
    unit_table: HashMap<Res, u64>,
    e1_ring: Option<ResidueRing>,
    e1_table: HashMap<Res, u64>,
    n_pi: u32,
}

fn ring_pow(r: &ResidueRing, mut x: Res, mut k: u64) -> Res {
    let mut acc = (1 % r.modulus, 0);
    while k > 0 {
        if k & 1 == 1 {
            acc = r.mul(acc, x);
        }
        x = r.mul(x, x);
        k >>= 1;
    }
    acc
}

impl TorusCharacter {
    pub fn new(cfg: &FieldConfig, spec: CharacterSpec, x_value: (i64, i64)) -> Result<Self> {
        if x_value.0 == 0 || x_value.1 == 0 {
            return Err(Error::Config("x_value must be a non-zero rational".into()));
        }
        let q = cfg.q();
        let p = cfg.p;
        let ctx = cfg.ctx();
        let (c, cp) = (spec.unit_level, spec.e1_level);
        if c > 2 || cp > 2 {
            return Err(Error::Config("character levels above 2 are not supported".into()));
        }
        let order = if c == 2 || cp == 2 {
            (q * q - 1) * p
        } else if c == 1 || cp == 1 {
            q * q - 1
        } else {
            1
        };
        let g0 = residue_generator(cfg);
        let teich = |r: &ResidueRing| ring_pow(r, g0, pow_u64(q, 2 * (r.m - 1)));
        let mut unit_table = HashMap::new();
        let mut unit_ring = None;
        if c > 0 {
            let r = ResidueRing::new(ctx, c);
            let t = teich(&r);
            let (o1, o2) = if c == 2 { (p, p) } else { (1, 1) };
            let g1 = (1 + p, 0);
            let g2 = (1, p);
            for i in 0..q * q - 1 {
                for j in 0..o1 {
                    for k in 0..o2 {
                        let el = r.mul(ring_pow(&r, t, i), r.mul(ring_pow(&r, g1, j), ring_pow(&r, g2, k)));
                        let e = (spec.unit_exps[0] * i % (q * q - 1)) * (order / (q * q - 1))
                            + (spec.unit_exps[1] * j % p + spec.unit_exps[2] * k % p) * (order / p);
                        unit_table.insert(r.reduce(el, c), e % order);
                    }
                }
            }
            if unit_table.len() as u64 != (q * q - 1) * o1 * o2 {
                return Err(Error::Config("unit generators do not give a direct decomposition".into()));
            }
            unit_ring = Some(r);
        }
        let e1_elements = |r: &ResidueRing| -> Vec<(Res, u64, u64)> {
            let t = teich(r);
            let zeta = r.mul(t, r.inv(r.conj(t)).unwrap());
            let lam = r.mul((1, p % r.modulus), r.inv((1, (r.modulus - p) % r.modulus)).unwrap());
            let o = if r.m >= 2 { p } else { 1 };
            let mut out = Vec::new();
            for i in 0..q + 1 {
                for j in 0..o {
                    out.push((r.mul(ring_pow(r, zeta, i), ring_pow(r, lam, j)), i, j));
                }
            }
            out
        };
        let mut e1_table = HashMap::new();
        let mut e1_ring = None;
        if cp > 0 {
            let r = ResidueRing::new(ctx, cp);
            for (el, i, j) in e1_elements(&r) {
                let e = (spec.e1_exps[0] * i % (q + 1)) * (order / (q + 1)) + (spec.e1_exps[1] * j % p) * (order / p);
                e1_table.insert(el, e % order);
            }
            if e1_table.len() as u64 != (q + 1) * if cp == 2 { p } else { 1 } {
                return Err(Error::Config("norm-one generators do not give a direct decomposition".into()));
            }
            e1_ring = Some(r);
        }
        let mut chi = Self { spec, x_value, p, ctx, order, unit_ring, unit_table, e1_ring, e1_table, n_pi: 0 };
        let lv = c.max(cp);
        if lv > 0 {
            let r = ResidueRing::new(ctx, lv);
            let els = e1_elements(&r);
            chi.n_pi = (0..=lv)
                .find(|&n| {
                    els.iter().all(|(l, _, _)| {
                        let near_one = r.val(r.sub(*l, (1, 0))) >= n;
                        !near_one || chi.central_exp(*l) == 0
                    })
                })
                .unwrap();
        }
        Ok(chi)
    }

    pub fn unramified(cfg: &FieldConfig, x_value: (i64, i64)) -> Self {
        Self::new(cfg, CharacterSpec::unramified(), x_value).unwrap()
    }

    pub fn with_x(&self, x_value: (i64, i64)) -> Self {
        Self { x_value, ..self.clone() }
    }

    pub fn x(&self) -> num_rational::BigRational {
        crate::scalar::rat(self.x_value.0, self.x_value.1)
    }

    /// The cyclotomic order in which the finite parts take values.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn is_unramified(&self) -> bool {
        self.spec.unit_level == 0 && self.spec.e1_level == 0
    }

    /// Exponent `j` with `chi_1(u) = zeta^j` for a unit `u` (known modulo at
    /// least `p^c`).
    pub fn unit_exp(&self, u: Res) -> u64 {
        match &self.unit_ring {
            None => 0,
            Some(r) => *self.unit_table.get(&(u.0 % r.modulus, u.1 % r.modulus)).expect("unit residue"),
        }
    }

    /// Exponent of `chi_2` on a norm-one residue.
    pub fn e1_exp(&self, b: Res) -> u64 {
        match &self.e1_ring {
            None => 0,
            Some(r) => *self.e1_table.get(&(b.0 % r.modulus, b.1 % r.modulus)).expect("norm-one residue"),
        }
    }

    /// Exponent of the central character `omega = chi_1 chi_2` on `E^1`.
    pub fn central_exp(&self, l: Res) -> u64 {
        (self.unit_exp(l) + self.e1_exp(l)) % self.order
    }

    /// Least `n` with the central character trivial on `E^1_n`.
    pub fn n_pi(&self) -> u32 {
        self.n_pi
    }

    /// `chi(b)` for an upper triangular element of G, as `(k, j)` meaning
    /// `x^k zeta^j`.
    pub fn on_borel(&self, b: &GroupElement) -> Result<(i64, u64)> {
        let b11 = b.entry(0, 0);
        let v = b11.valuation().ok_or_else(|| Error::Precision("b11 vanishes".into()))?;
        let u = b11.shift(-v);
        let lv = self.level().max(1);
        let j1 = self.unit_exp(u.residue(lv)?);
        let j2 = self.e1_exp(b.entry(1, 1).residue(lv)?);
        Ok((v, (j1 + j2) % self.order))
    }

    pub fn describe(&self) -> String {
        format!("{} x={}/{}", self.spec, self.x_value.0, self.x_value.1)
    }
}

impl UnitCocycle for TorusCharacter {
    fn level(&self) -> u32 {
        self.spec.unit_level.max(self.spec.e1_level)
    }

    fn trivial_on(&self, b33: Res, b22: Res) -> bool {
        let r = ResidueRing::new(self.ctx, self.level());
        // chi_1(b11) with b11 = conj(b33)^-1.
        let j1 = self.unit_exp(r.conj(b33));
        let j2 = self.e1_exp(b22);
        (self.order - j1 + j2) % self.order == 0
    }
}

/// A compact open subgroup presented for orbit computations: generators,
/// the frame in which they act integrally, and the least level at which
/// the fibres of the point model lie inside single orbits.
#[derive(Clone, Debug)]
pub struct LevelGroup {
    pub label: String,
    pub frame: Frame,
    pub generators: Vec<GroupElement>,
    pub base_level: u32,
}

fn half_up(n: u32) -> u32 {
    n.div_ceil(2).max(1)
}

impl LevelGroup {
    pub fn kn(cfg: &FieldConfig, n: u32) -> Self {
        Self {
            label: format!("K{n}"),
            frame: Frame::for_level(n),
            generators: SubgroupSpec::Kn(n).generators(cfg),
            base_level: half_up(n),
        }
    }

    /// `K_n cap K_{n+1}`, in the frame of `K_{n+1}`.
    pub fn kn_cap(cfg: &FieldConfig, n: u32) -> Self {
        Self {
            label: format!("K{n}nK{}", n + 1),
            frame: Frame::for_level(n + 1),
            generators: SubgroupSpec::KnCap(n).generators(cfg),
            base_level: half_up(n + 1),
        }
    }

    /// The group generated by `T cap K_0`, `U(o_E)` and
    /// `eta Gamma(n-1) eta^-1`: it fixes both `v` and `S v` for `v` in
    /// `V(n)` once `n - 1 >= n_pi`.
    pub fn s_ambient(cfg: &FieldConfig, n: u32) -> Result<Self> {
        if n < 2 {
            return Err(Error::Rejected("the S-ambient group needs n >= 2".into()));
        }
        let e = eta(cfg);
        let ei = e.j_inverse();
        let (a, b) = residue_generator(cfg);
        let one = cfg.one();
        let mut gens: Vec<GroupElement> =
            [cfg.elem(0, a as i64, b as i64), one.add(&cfg.uniformizer_pow(1)), one.add(&cfg.elem(1, 0, 1))]
                .into_iter()
                .map(|a| t_elem(cfg, a))
                .collect();
        gens.extend(SubgroupSpec::UO.generators(cfg));
        for g in SubgroupSpec::PrincipalCongruence(n - 1).generators(cfg) {
            gens.push(e.mul(&g).mul(&ei));
        }
        Ok(Self { label: format!("S-ambient{n}"), frame: Frame { e: 0, s: 1 }, generators: gens, base_level: (n - 1).max(1) })
    }
}

/// The orbit root of a basis function: an element `g` of `K_0` whose line
/// is the root point, with the transport normalization at the root.
#[derive(Clone, Debug)]
pub struct Root {
    pub orbit: u32,
    pub g: GroupElement,
    pub line: Row,
    pub det: EElement,
    pub v_root: i64,
    pub mu_root: Res,
}

/// An element of G known through its bottom row and determinant, which is
/// all a function in the induced model depends on.
#[derive(Clone, Copy, Debug)]
pub struct Probe {
    pub line: Row,
    pub det: EElement,
}

impl Probe {
    pub fn of(g: &GroupElement) -> Self {
        Self { line: g.row(2), det: g.det() }
    }

    pub fn times(&self, h: &GroupElement) -> Self {
        Self { line: row_times(&self.line, h), det: self.det.mul(&h.det()) }
    }
}

/// Fixed vectors of a level group: one basis function per
/// cocycle-consistent orbit, supported on that orbit, equal to 1 at its
/// root.
#[derive(Clone, Debug)]
pub struct FixedSpace {
    pub label: String,
    pub m: u32,
    pub window: u32,
    pub chi: TorusCharacter,
    pub group: Arc<LevelGroup>,
    pub partition: OrbitPartition,
    pub basis: Vec<u32>,
    basis_of_orbit: Vec<Option<usize>>,
    pub roots: Vec<Root>,
    /// Roots of the inconsistent orbits: every fixed vector vanishes there.
    pub dead_roots: Vec<Root>,
}

/// Least level for a group and character.
pub fn auto_level(group: &LevelGroup, chi: &TorusCharacter) -> u32 {
    group.base_level.max(chi.level()).max(1)
}

fn root_data(cfg: &FieldConfig, part: &OrbitPartition, orbit: u32, cl: u32) -> Result<Root> {
    let idx = part.roots[orbit as usize];
    let y = part.space.exact_vector(cfg, idx);
    let l = part.frame.from_frame(&y);
    let v0 = l.iter().filter_map(|e| e.valuation()).min().ok_or_else(|| Error::Precision("zero root".into()))?;
    let ls = [l[0].shift(-v0), l[1].shift(-v0), l[2].shift(-v0)];
    let piv = if ls[0].valuation() == Some(0) { 0 } else { 2 };
    let pi0 = ls[piv];
    let pinv = pi0.inv()?;
    let ln = [ls[0].mul(&pinv), ls[1].mul(&pinv), ls[2].mul(&pinv)];
    let g = complete_isotropic(cfg, &ln)?;
    let mu_root = if cl > 0 { pinv.residue(cl)? } else { (1, 0) };
    Ok(Root { orbit, det: g.det(), line: ln, g, v_root: -v0, mu_root })
}

pub fn fixed_space(
    cfg: &FieldConfig,
    chi: &TorusCharacter,
    group: Arc<LevelGroup>,
    m: u32,
    budget: u64,
) -> Result<FixedSpace> {
    let cocycle: Option<&dyn UnitCocycle> = if chi.level() > 0 { Some(chi) } else { None };
    let part = flag::orbits(cfg, group.frame, m, &group.generators, cocycle, &group.label, budget)?;
    let cl = part.cocycle_level;
    let mut basis = Vec::new();
    let mut basis_of_orbit = vec![None; part.orbit_count()];
    let mut roots = Vec::new();
    let mut dead_roots = Vec::new();
    for o in 0..part.orbit_count() {
        let r = root_data(cfg, &part, o as u32, cl)?;
        if part.consistent[o] {
            basis_of_orbit[o] = Some(basis.len());
            basis.push(o as u32);
            roots.push(r);
        } else {
            dead_roots.push(r);
        }
    }
    Ok(FixedSpace {
        label: group.label.clone(),
        m,
        window: cfg.default_window,
        chi: chi.clone(),
        group,
        partition: part,
        basis,
        basis_of_orbit,
        roots,
        dead_roots,
    })
}

impl FixedSpace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn orbit_count(&self) -> usize {
        self.partition.orbit_count()
    }

    /// The basis function that is non-zero at the probe, with its value
    /// `x^k zeta^j`.
    pub fn eval(&self, g: &Probe) -> Result<Option<(usize, i64, u64)>> {
        let part = &self.partition;
        let w = part.frame.to_frame(&g.line);
        let mut vmin: Option<i64> = None;
        for e in &w {
            if e.is_exact_zero() {
                continue;
            }
            match e.valuation() {
                Some(v) => vmin = Some(vmin.map_or(v, |x: i64| x.min(v))),
                None => {}
            }
        }
        let vmin = vmin.ok_or_else(|| Error::Precision("probe line vanishes".into()))?;
        let m = part.space.m;
        let mut res = [(0, 0); 3];
        for j in 0..3 {
            let e = w[j].shift(-vmin);
            if !e.is_exact_zero() && e.valuation().is_none() && e.valuation_bound() < m as i64 {
                return Err(Error::Precision(format!("probe entry {e} below level {m}")));
            }
            res[j] = e.residue(m)?;
        }
        let (idx, lam) = part.space.locate(&res)?;
        let orbit = part.orbit_of[idx as usize];
        let Some(b) = self.basis_of_orbit[orbit as usize] else { return Ok(None) };
        let root = &self.roots[b];
        let k = root.v_root - vmin;
        let Some(cr) = part.cocycle_ring() else { return Ok(Some((b, k, 0))) };
        let mu = cr.mul(root.mu_root, decode(&cr, part.mu[idx as usize]));
        let delta = decode(&cr, part.delta[idx as usize]);
        let u = cr.mul(cr.reduce(lam, cr.m), cr.inv(mu).expect("unit"));
        let det_ratio = g.det.div(&root.det)?.residue(cr.m)?;
        let b22 = cr.mul(cr.mul(det_ratio, cr.inv(delta).unwrap()), cr.mul(cr.conj(u), cr.inv(u).unwrap()));
        let n = self.chi.order();
        let j = (n - self.chi.unit_exp(cr.conj(u)) + self.chi.e1_exp(b22)) % n;
        Ok(Some((b, k, j)))
    }

    /// `sum_h f_i(g h)` for every basis function `f_i`.
    pub fn sum_values(&self, g: &Probe, hs: &[GroupElement]) -> Result<Vec<MonoSum>> {
        let mut out = vec![MonoSum::new(self.chi.order()); self.dim()];
        for h in hs {
            if let Some((b, k, j)) = self.eval(&g.times(h))? {
                out[b].add_term(k, j, 1);
            }
        }
        Ok(out)
    }

    pub fn root_probes(&self) -> Vec<Probe> {
        self.roots.iter().map(|r| Probe { line: r.line, det: r.det }).collect()
    }

    pub fn dead_probes(&self) -> Vec<Probe> {
        self.dead_roots.iter().map(|r| Probe { line: r.line, det: r.det }).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{z_elem, norm_one_generators};
    use crate::scalar::rat;

    fn cfg(p: u64) -> FieldConfig {
        FieldConfig::with_window(p, 12).unwrap()
    }

    #[test]
    fn character_tables() {
        for p in [3, 5] {
            let c = cfg(p);
            let q = c.q();
            let un = TorusCharacter::unramified(&c, (2, 3));
            assert_eq!((un.order(), un.n_pi()), (1, 0));
            let e1 = TorusCharacter::new(&c, CharacterSpec::e1_order_q_plus_1(), (2, 3)).unwrap();
            assert_eq!((e1.order(), e1.n_pi()), (q * q - 1, 1));
            let quad = TorusCharacter::new(&c, CharacterSpec::quadratic(q), (2, 3)).unwrap();
            assert_eq!(quad.n_pi(), 0);
            let deep = TorusCharacter::new(&c, CharacterSpec::parse("c=0,cp=2,v=0:1", q).unwrap(), (2, 3)).unwrap();
            assert_eq!(deep.n_pi(), 2);
            // omega on z(lambda), lambda in E^1
            for l in norm_one_generators(&c, 0) {
                let z = z_elem(&c, l);
                let (k, j) = e1.on_borel(&z).unwrap();
                assert_eq!(k, 0);
                assert_eq!(j, e1.central_exp(l.residue(1).unwrap()));
            }
        }
    }

    #[test]
    fn parse_roundtrip() {
        let s = CharacterSpec::parse("c=2,u=1:2:0,cp=1,v=3:0", 3).unwrap();
        assert_eq!(CharacterSpec::parse(&s.to_string(), 3).unwrap(), s);
        assert!(CharacterSpec::parse("c=3", 3).is_err());
        assert!(CharacterSpec::parse("bogus", 3).is_err());
    }

    #[test]
    fn unramified_dimensions_p3() {
        let c = cfg(3);
        let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
        let t = dimension_table(&m, 0..=3).unwrap();
        assert_eq!(t.dims(), vec![1, 1, 2, 2]);
        assert_eq!(t.conductor, Some(0));
        assert!(t.pass(), "{:?}", t.checks);
    }

    #[test]
    fn ramified_center_kills_level_zero() {
        let c = cfg(3);
        let chi = TorusCharacter::new(&c, CharacterSpec::e1_order_q_plus_1(), (2, 3)).unwrap();
        let m = Model::new(&c, &chi);
        assert_eq!(m.v(0).unwrap().dim(), 0);
        let t = dimension_table(&m, 0..=3).unwrap();
        assert!(t.pass(), "{:?} {:?}", t.dims(), t.checks);
        let n = t.conductor.unwrap();
        assert!(n >= 1);
    }

    #[test]
    fn operators_small() {
        let c = cfg(3);
        let m = Model::new(&c, &TorusCharacter::unramified(&c, (2, 3)));
        let x = rat(2, 3);
        for n in 0..=1 {
            assert!(theta_decomposition_check(&m, n, &x).unwrap().pass);
            assert!(eta_injective_check(&m, n, &x).unwrap().pass);
            assert!(commutation_check(&m, n, &x).unwrap().pass);
        }
    }
}
