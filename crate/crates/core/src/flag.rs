//! Finite model of `B\G = (B cap K_0)\K_0`: isotropic lines modulo `p^m`,
//! canonical forms, the right action of `G`, orbit partitions with
//! character cocycles, and closure-based generation checks.
//!
//! A coset `B g` is the line spanned by the bottom row of `g`. For `K_n`
//! with `n > 0` the action is not integral on standard coordinates, so
//! lines are written in a frame `w = l * C` with
//! `C = diag(p^(-s-e), 1, p^s)`, `n = 2s + e`, in which `C^-1 K_n C` is
//! integral. The frame form is `p^e tr(w_1 conj(w_3)) + N(w_2)`.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{complete_isotropic, iwasawa, GroupElement, Row, SubgroupSpec};
use crate::localfield::{pow_u64, EElement, FieldConfig, Res, ResidueRing};

pub type ResMat = [[Res; 3]; 3];

/// Default cap on points and closure sizes.
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
pub struct Frame {
    pub e: u32,
    pub s: u32,
}

impl Frame {
    pub fn standard() -> Self {
        Self { e: 0, s: 0 }
    }

    /// The frame in which `K_n` acts integrally.
    pub fn for_level(n: u32) -> Self {
        Self { e: n % 2, s: n / 2 }
    }

    pub fn exps(&self) -> [i64; 3] {
        [-((self.s + self.e) as i64), 0, self.s as i64]
    }

    pub fn to_frame(&self, l: &Row) -> Row {
        let x = self.exps();
        [l[0].shift(x[0]), l[1], l[2].shift(x[2])]
    }

    pub fn from_frame(&self, w: &Row) -> Row {
        let x = self.exps();
        [w[0].shift(-x[0]), w[1], w[2].shift(-x[2])]
    }

    /// `C^-1 g C`.
    pub fn conjugate(&self, g: &GroupElement) -> GroupElement {
        let x = self.exps();
        let mut entries = g.entries;
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = e.shift(x[j] - x[i]);
            }
        }
        GroupElement { entries }
    }

    /// Residues modulo `p^m` of `C^-1 g C`; fails if that is not integral.
    pub fn residue_matrix(&self, g: &GroupElement, m: u32) -> Result<ResMat> {
        let c = self.conjugate(g);
        let mut out = [[(0, 0); 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                out[i][j] = c.entries[i][j].residue(m)?;
            }
        }
        Ok(out)
    }
}

/// The primitive isotropic vectors of a frame modulo `p^m`, up to units,
/// with a direct index.
///
/// Case A: `w_1 = 1`, `w_3 = -N(w_2)/(2p^e) + s sqrt(eps)`.
/// Case B: `w_3 = 1`, `w_1 = -N(w_2)/(2p^e) + s sqrt(eps)`, `w_2, s` in `p`
/// (for `e = 0`; `w_2` is always in `p` when `e = 1`).
#[derive(Clone, Debug)]
pub struct PointSpace {
    pub ring: ResidueRing,
    pub e: u32,
    pub m: u32,
    big: u64,
    small: u64,
    inv2: u64,
    count_a: u64,
    count: u64,
    inv_table: Vec<u64>,
}

impl PointSpace {
    pub fn new(cfg: &FieldConfig, e: u32, m: u32) -> Result<Self> {
        if m == 0 || e > 1 {
            return Err(Error::Config(format!("point space needs m >= 1 and e in {{0,1}}, got m={m} e={e}")));
        }
        if pow_u64(cfg.p, m) >= (1 << 16) {
            return Err(Error::Budget { what: "residue modulus".into(), required: pow_u64(cfg.p, m), cap: 1 << 16 });
        }
        let ring = ResidueRing::new(cfg.ctx(), m);
        let big = ring.modulus;
        let small = big / cfg.p;
        let count_a = if e == 0 { big * big * big } else { small * small * big };
        let count = count_a + small * small * small;
        let inv_table = (0..big).map(|x| crate::localfield::inv_mod(x, big).unwrap_or(0)).collect();
        Ok(Self { ring, e, m, big, small, inv2: (big + 1) / 2, count_a, count, inv_table })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn p(&self) -> u64 {
        self.ring.p
    }

    fn norm(&self, x: Res) -> u64 {
        let r = self.ring.mul(x, self.ring.conj(x));
        r.0
    }

    /// `-N(w_2)/(2p^e)` given `w_2` (or `z = w_2/p` when `e = 1`).
    fn forced(&self, z: Res) -> u64 {
        let b = self.big;
        let n = self.norm(z) * if self.e == 1 { self.ring.p } else { 1 } % b;
        (b - n * self.inv2 % b) % b
    }

    pub fn vector(&self, idx: u64) -> [Res; 3] {
        let (b, s0) = (self.big, self.small);
        let p = self.ring.p;
        if idx < self.count_a {
            let s = idx % b;
            let c = idx / b;
            let (z, w2) = if self.e == 0 {
                let w2 = (c / b, c % b);
                (w2, w2)
            } else {
                let z = (c / s0, c % s0);
                (z, (z.0 * p, z.1 * p))
            };
            [(1, 0), w2, (self.forced(z), s)]
        } else {
            let j = idx - self.count_a;
            let t = j % s0;
            let c = j / s0;
            let zz = (c / s0, c % s0);
            let w2 = (zz.0 * p, zz.1 * p);
            let z = if self.e == 0 { w2 } else { zz };
            [(self.forced(z), t * p), w2, (1, 0)]
        }
    }

    fn inv_unit(&self, x: Res) -> Res {
        let n = self.norm(x);
        let ni = self.inv_table[n as usize];
        let c = self.ring.conj(x);
        ((c.0 * ni) % self.big, (c.1 * ni) % self.big)
    }

    /// Index of the class of `w` and the unit `l` with `w = l * vector(index)`.
    pub fn locate(&self, w: &[Res; 3]) -> Result<(u64, Res)> {
        let r = &self.ring;
        let p = r.p;
        let (b, s0) = (self.big, self.small);
        if r.is_unit(w[0]) {
            let li = self.inv_unit(w[0]);
            let y2 = r.mul(w[1], li);
            let y3 = r.mul(w[2], li);
            let idx = if self.e == 0 {
                (y2.0 * b + y2.1) * b + y3.1
            } else {
                if y2.0 % p != 0 || y2.1 % p != 0 {
                    return Err(Error::Precision("middle entry not in p for odd frame".into()));
                }
                ((y2.0 / p) * s0 + y2.1 / p) * b + y3.1
            };
            Ok((idx, w[0]))
        } else if r.is_unit(w[2]) {
            let li = self.inv_unit(w[2]);
            let y1 = r.mul(w[0], li);
            let y2 = r.mul(w[1], li);
            if y2.0 % p != 0 || y2.1 % p != 0 || y1.1 % p != 0 {
                return Err(Error::Precision("vector is not isotropic at this level".into()));
            }
            Ok((self.count_a + ((y2.0 / p) * s0 + y2.1 / p) * s0 + y1.1 / p, w[2]))
        } else {
            Err(Error::Precision("vector is not primitive with a unit end entry".into()))
        }
    }

    /// The class representative as an exactly isotropic integral vector.
    pub fn exact_vector(&self, cfg: &FieldConfig, idx: u64) -> Row {
        let v = self.vector(idx);
        let ctx = cfg.ctx();
        let w = cfg.default_window;
        let p = self.ring.p;
        let el = |x: Res| EElement::from_parts(ctx, 0, x.0 as i64, x.1 as i64, w);
        let two = cfg.int(2);
        let pe = cfg.uniformizer_pow(self.e as i64);
        let forced = |w2: &EElement| w2.norm().neg().div(&two.mul(&pe)).expect("2p^e invertible");
        let w2 = el(v[1]);
        if idx < self.count_a {
            [cfg.one(), w2, forced(&w2).add(&cfg.elem(0, 0, v[2].1 as i64))]
        } else {
            let s = cfg.elem(1, 0, (v[0].1 / p) as i64);
            [forced(&w2).add(&s), w2, cfg.one()]
        }
    }
}

#[inline]
pub fn row_mul(r: &ResidueRing, w: &[Res; 3], g: &ResMat) -> [Res; 3] {
    let mut out = [(0, 0); 3];
    for (j, o) in out.iter_mut().enumerate() {
        let mut acc = r.mul(w[0], g[0][j]);
        acc = r.add(acc, r.mul(w[1], g[1][j]));
        acc = r.add(acc, r.mul(w[2], g[2][j]));
        *o = acc;
    }
    out
}

fn mat_mul(r: &ResidueRing, a: &ResMat, b: &ResMat) -> ResMat {
    let mut out = [[(0, 0); 3]; 3];
    for i in 0..3 {
        out[i] = row_mul(r, &a[i], b);
    }
    out
}

/// A canonicalized point of the standard-frame model at level `m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FlagPoint {
    pub level: u32,
    pub index: u64,
    pub canonical: Vec<u8>,
}

fn encode_vector(v: &[Res; 3]) -> Vec<u8> {
    let mut out = Vec::with_capacity(24);
    for x in v {
        out.extend_from_slice(&(x.0 as u32).to_be_bytes());
        out.extend_from_slice(&(x.1 as u32).to_be_bytes());
    }
    out
}

/// Canonical form of the coset `(B cap K_0) k` at level `m`: the bottom row
/// scaled so its leftmost unit entry is 1, reduced modulo `p^m`.
pub fn canonicalize(cfg: &FieldConfig, k: &GroupElement, m: u32) -> Result<FlagPoint> {
    let space = PointSpace::new(cfg, 0, m)?;
    let r = k.row(2);
    let mut w = [(0, 0); 3];
    for j in 0..3 {
        w[j] = r[j].residue(m)?;
    }
    let (index, _) = space.locate(&w)?;
    Ok(FlagPoint { level: m, index, canonical: encode_vector(&space.vector(index)) })
}

pub fn point_from_index(cfg: &FieldConfig, m: u32, index: u64) -> Result<FlagPoint> {
    let space = PointSpace::new(cfg, 0, m)?;
    if index >= space.count() {
        return Err(Error::Rejected(format!("index {index} out of range")));
    }
    Ok(FlagPoint { level: m, index, canonical: encode_vector(&space.vector(index)) })
}

/// A lift of the point to `K_0`.
pub fn lift(cfg: &FieldConfig, x: &FlagPoint) -> Result<GroupElement> {
    let space = PointSpace::new(cfg, 0, x.level)?;
    complete_isotropic(cfg, &space.exact_vector(cfg, x.index))
}

/// Right translation `x -> x g`: lift to `k`, decompose `k g = b k'`, and
/// return the class of `k'` together with the Borel part `b`.
pub fn act(cfg: &FieldConfig, x: &FlagPoint, g: &GroupElement) -> Result<(FlagPoint, GroupElement)> {
    let k = lift(cfg, x)?;
    let (b, k2) = iwasawa(cfg, &k.mul(g))?;
    Ok((canonicalize(cfg, &k2, x.level)?, b))
}

/// All standard-frame points at level `m`.
pub fn enumerate_points(cfg: &FieldConfig, m: u32, budget: u64) -> Result<Vec<FlagPoint>> {
    let space = PointSpace::new(cfg, 0, m)?;
    if space.count() > budget {
        return Err(Error::Budget { what: format!("points at level {m}"), required: space.count(), cap: budget });
    }
    Ok((0..space.count())
        .map(|index| FlagPoint { level: m, index, canonical: encode_vector(&space.vector(index)) })
        .collect())
}

/// Character data an orbit computation needs: whether `chi` is trivial on
/// the element `diag(conj(b33)^-1, b22, b33)` of the unit torus, with the
/// arguments known modulo `p^level`.
pub trait UnitCocycle: Sync {
    fn level(&self) -> u32;
    fn trivial_on(&self, b33: Res, b22: Res) -> bool;
}

/// Orbits of a generated subgroup on a point space, with per-point transport
/// data: `mu` (scalar relating the orbit root's transported vector to the
/// canonical one) and `delta` (determinant of the transport), both modulo
/// `p^cocycle_level` and only kept when that level is positive.
#[derive(Clone, Debug)]
pub struct OrbitPartition {
    pub space: PointSpace,
    pub frame: Frame,
    pub label: String,
    pub orbit_of: Vec<u32>,
    pub roots: Vec<u64>,
    pub sizes: Vec<u64>,
    pub consistent: Vec<bool>,
    pub cocycle_level: u32,
    pub mu: Vec<u16>,
    pub delta: Vec<u16>,
    pub generator_count: usize,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OrbitReport {
    pub level: u32,
    pub q: u64,
    pub subgroup: String,
    pub orbit_count: usize,
    pub point_count: u64,
    pub per_orbit_sizes: Vec<u64>,
}

pub fn code(r: &ResidueRing, x: Res) -> u16 {
    (x.0 * r.modulus + x.1) as u16
}

pub fn decode(r: &ResidueRing, c: u16) -> Res {
    let c = c as u64;
    (c / r.modulus, c % r.modulus)
}

impl OrbitPartition {
    pub fn orbit_count(&self) -> usize {
        self.roots.len()
    }

    pub fn consistent_count(&self) -> usize {
        self.consistent.iter().filter(|c| **c).count()
    }

    pub fn report(&self) -> OrbitReport {
        OrbitReport {
            level: self.space.m,
            q: self.space.p(),
            subgroup: self.label.clone(),
            orbit_count: self.orbit_count(),
            point_count: self.space.count(),
            per_orbit_sizes: self.sizes.clone(),
        }
    }

    pub fn cocycle_ring(&self) -> Option<ResidueRing> {
        (self.cocycle_level > 0).then(|| ResidueRing { m: self.cocycle_level, modulus: pow_u64(self.space.p(), self.cocycle_level), ..self.space.ring })
    }
}

/// The orbit partition of the frame's level-`m` points under `generators`.
pub fn orbits(
    cfg: &FieldConfig,
    frame: Frame,
    m: u32,
    generators: &[GroupElement],
    cocycle: Option<&dyn UnitCocycle>,
    label: &str,
    budget: u64,
) -> Result<OrbitPartition> {
    orbits_ordered(cfg, frame, m, generators, cocycle, label, budget, false)
}

/// As [`orbits`], traversing generators in reverse order. Used by the
/// determinism check.
#[allow(clippy::too_many_arguments)]
pub fn orbits_ordered(
    cfg: &FieldConfig,
    frame: Frame,
    m: u32,
    generators: &[GroupElement],
    cocycle: Option<&dyn UnitCocycle>,
    label: &str,
    budget: u64,
    reversed: bool,
) -> Result<OrbitPartition> {
    let space = PointSpace::new(cfg, frame.e, m)?;
    let n_pts = space.count();
    if n_pts > budget {
        return Err(Error::Budget { what: format!("{label} points at level {m}"), required: n_pts, cap: budget });
    }
    let mut gens: Vec<ResMat> = generators.iter().map(|g| frame.residue_matrix(g, m)).collect::<Result<_>>()?;
    let cl = cocycle.map_or(0, |c| c.level());
    let cring = ResidueRing::new(cfg.ctx(), cl.max(1));
    let mut dets: Vec<Res> = Vec::new();
    if cl > 0 {
        for g in generators {
            dets.push(g.det().residue(cl)?);
        }
    }
    if reversed {
        gens.reverse();
        dets.reverse();
    }
    let n = n_pts as usize;
    let mut orbit_of = vec![u32::MAX; n];
    let (mut mu, mut delta) = if cl > 0 { (vec![0u16; n], vec![0u16; n]) } else { (Vec::new(), Vec::new()) };
    let one = code(&cring, (1, 0));
    let (mut roots, mut sizes, mut consistent) = (Vec::new(), Vec::new(), Vec::new());
    let mut queue = VecDeque::new();
    for start in 0..n {
        if orbit_of[start] != u32::MAX {
            continue;
        }
        let id = roots.len() as u32;
        roots.push(start as u64);
        orbit_of[start] = id;
        if cl > 0 {
            mu[start] = one;
            delta[start] = one;
        }
        let mut ok = true;
        let mut size = 0u64;
        queue.push_back(start);
        while let Some(y) = queue.pop_front() {
            size += 1;
            let w = space.vector(y as u64);
            for (gi, g) in gens.iter().enumerate() {
                let w2 = row_mul(&space.ring, &w, g);
                let (idx, lam) = space.locate(&w2)?;
                let t = idx as usize;
                if cl == 0 {
                    if orbit_of[t] == u32::MAX {
                        orbit_of[t] = id;
                        queue.push_back(t);
                    }
                    continue;
                }
                let lam = cring.reduce(lam, cl);
                let new_mu = cring.mul(decode(&cring, mu[y]), lam);
                let new_delta = cring.mul(decode(&cring, delta[y]), dets[gi]);
                if orbit_of[t] == u32::MAX {
                    orbit_of[t] = id;
                    mu[t] = code(&cring, new_mu);
                    delta[t] = code(&cring, new_delta);
                    queue.push_back(t);
                } else if ok {
                    let old_mu = decode(&cring, mu[t]);
                    let old_delta = decode(&cring, delta[t]);
                    let b33 = cring.mul(new_mu, cring.inv(old_mu).expect("unit"));
                    let det_b = cring.mul(new_delta, cring.inv(old_delta).expect("unit"));
                    let b22 = cring.mul(det_b, cring.mul(cring.conj(b33), cring.inv(b33).unwrap()));
                    if !cocycle.unwrap().trivial_on(b33, b22) {
                        ok = false;
                    }
                }
            }
        }
        sizes.push(size);
        consistent.push(ok);
    }
    Ok(OrbitPartition {
        space,
        frame,
        label: label.to_string(),
        orbit_of,
        roots,
        sizes,
        consistent,
        cocycle_level: cl,
        mu,
        delta,
        generator_count: generators.len(),
    })
}

/// Both traversal orders give the same partition and consistency flags.
pub fn determinism_check(a: &OrbitPartition, b: &OrbitPartition) -> bool {
    a.orbit_of == b.orbit_of && a.roots == b.roots && a.consistent == b.consistent
}

#[derive(Clone, Debug, Serialize)]
pub struct GenerationReport {
    pub target: String,
    pub level: u32,
    pub frame: Frame,
    pub closure_given: u64,
    pub closure_full: u64,
    pub pass: bool,
}

/// Size of the subgroup generated by `gens` in `GL_3(o_E / p^m)` (frame
/// coordinates).
pub fn closure_size(cfg: &FieldConfig, frame: Frame, m: u32, gens: &[GroupElement], budget: u64) -> Result<u64> {
    let ring = ResidueRing::new(cfg.ctx(), m);
    let mats: Vec<ResMat> = gens.iter().map(|g| frame.residue_matrix(g, m)).collect::<Result<_>>()?;
    let key = |x: &ResMat| -> [u16; 18] {
        let mut k = [0u16; 18];
        for i in 0..3 {
            for j in 0..3 {
                k[6 * i + 2 * j] = x[i][j].0 as u16;
                k[6 * i + 2 * j + 1] = x[i][j].1 as u16;
            }
        }
        k
    };
    let mut id = [[(0, 0); 3]; 3];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = (1, 0);
    }
    let mut seen: HashSet<[u16; 18]> = HashSet::new();
    seen.insert(key(&id));
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in &mats {
            let y = mat_mul(&ring, &x, g);
            if seen.insert(key(&y)) {
                if seen.len() as u64 > budget {
                    return Err(Error::Budget { what: "closure".into(), required: seen.len() as u64, cap: budget });
                }
                queue.push_back(y);
            }
        }
    }
    Ok(seen.len() as u64)
}

fn mat_inv(r: &ResidueRing, a: &ResMat) -> Option<ResMat> {
    let minor = |i0: usize, i1: usize, j0: usize, j1: usize| {
        r.sub(r.mul(a[i0][j0], a[i1][j1]), r.mul(a[i0][j1], a[i1][j0]))
    };
    let mut adj = [[(0, 0); 3]; 3];
    for (i, row) in adj.iter_mut().enumerate() {
        for (j, c) in row.iter_mut().enumerate() {
            // cofactor of (j, i)
            let (r0, r1) = [(1, 2), (0, 2), (0, 1)][j];
            let (c0, c1) = [(1, 2), (0, 2), (0, 1)][i];
            let m = minor(r0, r1, c0, c1);
            *c = if (i + j) % 2 == 0 { m } else { r.neg(m) };
        }
    }
    let det = (0..3).fold((0, 0), |acc, k| r.add(acc, r.mul(a[0][k], adj[k][0])));
    let d = r.inv(det)?;
    for row in adj.iter_mut() {
        for c in row.iter_mut() {
            *c = r.mul(*c, d);
        }
    }
    Some(adj)
}

/// Echelon basis of a subspace of `F_p^18`.
struct Span {
    p: u64,
    rows: Vec<(usize, [u64; 18])>,
}

impl Span {
    fn insert(&mut self, mut v: [u64; 18]) {
        for (piv, row) in &self.rows {
            let c = v[*piv];
            if c != 0 {
                for k in 0..18 {
                    v[k] = (v[k] + (self.p - c) * row[k]) % self.p;
                }
            }
        }
        let Some(piv) = v.iter().position(|&c| c != 0) else { return };
        let inv = crate::localfield::inv_mod(v[piv], self.p).expect("p prime");
        for c in v.iter_mut() {
            *c = *c * inv % self.p;
        }
        for (_, row) in self.rows.iter_mut() {
            let c = row[piv];
            if c != 0 {
                for k in 0..18 {
                    row[k] = (row[k] + (self.p - c) * v[k]) % self.p;
                }
            }
        }
        self.rows.push((piv, v));
    }
}

/// Order of the subgroup generated by `gens` in `GL_3(o_E / p^m)`.
///
/// For `m >= 2` the image at level `m - 1` is enumerated with lifts, and
/// Schreier generators span the intersection with the reduction kernel
/// `1 + p^{m-1} M_3(o_E / p)`, an elementary abelian `p`-group.
pub fn closure_order(cfg: &FieldConfig, frame: Frame, m: u32, gens: &[GroupElement], budget: u64) -> Result<u64> {
    if m < 2 {
        return closure_size(cfg, frame, m, gens, budget);
    }
    let hi = ResidueRing::new(cfg.ctx(), m);
    let lo = ResidueRing::new(cfg.ctx(), m - 1);
    let low = ResidueRing::new(cfg.ctx(), 1);
    let step = pow_u64(cfg.p, m - 1);
    let mats: Vec<ResMat> = gens.iter().map(|g| frame.residue_matrix(g, m)).collect::<Result<_>>()?;
    let key = |x: &ResMat| -> [u16; 18] {
        let mut k = [0u16; 18];
        for i in 0..3 {
            for j in 0..3 {
                let (a, b) = lo.reduce(x[i][j], m - 1);
                k[6 * i + 2 * j] = a as u16;
                k[6 * i + 2 * j + 1] = b as u16;
            }
        }
        k
    };
    let mut id = [[(0, 0); 3]; 3];
    for (i, row) in id.iter_mut().enumerate() {
        row[i] = (1, 0);
    }
    let mut lift: HashMap<[u16; 18], ResMat> = HashMap::new();
    lift.insert(key(&id), id);
    let mut queue = VecDeque::from([id]);
    let mut span = Span { p: cfg.p, rows: Vec::new() };
    while let Some(x) = queue.pop_front() {
        for g in &mats {
            let y = mat_mul(&hi, &x, g);
            let k = key(&y);
            match lift.get(&k) {
                Some(l) => {
                    let mut d = [[(0, 0); 3]; 3];
                    for i in 0..3 {
                        for j in 0..3 {
                            let (a, b) = hi.sub(y[i][j], l[i][j]);
                            d[i][j] = ((a / step) % cfg.p, (b / step) % cfg.p);
                        }
                    }
                    let mut l1 = *l;
                    for row in l1.iter_mut() {
                        for c in row.iter_mut() {
                            *c = low.reduce(*c, 1);
                        }
                    }
                    let li = mat_inv(&low, &l1).ok_or_else(|| Error::Rejected("generator not invertible".into()))?;
                    let e = mat_mul(&low, &d, &li);
                    let mut v = [0u64; 18];
                    for i in 0..3 {
                        for j in 0..3 {
                            v[6 * i + 2 * j] = e[i][j].0;
                            v[6 * i + 2 * j + 1] = e[i][j].1;
                        }
                    }
                    if span.rows.len() < 18 {
                        span.insert(v);
                    }
                }
                None => {
                    if lift.len() as u64 >= budget {
                        return Err(Error::Budget { what: "closure".into(), required: lift.len() as u64 + 1, cap: budget });
                    }
                    lift.insert(k, y);
                    queue.push_back(y);
                }
            }
        }
    }
    Ok(lift.len() as u64 * pow_u64(cfg.p, span.rows.len() as u32))
}

/// The frame in which a subgroup acts integrally.
pub fn frame_for(target: SubgroupSpec) -> Frame {
    match target {
        SubgroupSpec::Kn(n) | SubgroupSpec::KnH(n) => Frame::for_level(n),
        SubgroupSpec::KnCap(n) => Frame::for_level(n + 1),
        SubgroupSpec::UPinv => Frame { e: 0, s: 1 },
        _ => Frame::standard(),
    }
}

/// Compares the closure of `generators` with the closure of the full
/// generating set of `target` in the finite quotient at level `m`.
pub fn generation_check(
    cfg: &FieldConfig,
    target: SubgroupSpec,
    generators: &[GroupElement],
    m: u32,
    budget: u64,
) -> Result<GenerationReport> {
    if let Some(bad) = generators.iter().position(|g| !target.contains(g)) {
        return Err(Error::Rejected(format!("generator {bad} is not in {target}")));
    }
    let frame = frame_for(target);
    let full = closure_order(cfg, frame, m, &target.generators(cfg), budget)?;
    let given = closure_order(cfg, frame, m, generators, budget)?;
    Ok(GenerationReport {
        target: target.to_string(),
        level: m,
        frame,
        closure_given: given,
        closure_full: full,
        pass: given == full,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{t_n, u_elem, uhat_elem, hu_generators};

    fn cfg(p: u64) -> FieldConfig {
        FieldConfig::with_window(p, 16).unwrap()
    }

    #[test]
    fn point_counts() {
        for (p, m, count) in [(3, 1, 28u64), (5, 1, 126), (3, 2, 756)] {
            let c = cfg(p);
            assert_eq!(PointSpace::new(&c, 0, m).unwrap().count(), count);
            assert_eq!(enumerate_points(&c, m, DEFAULT_BUDGET).unwrap().len() as u64, count);
        }
        let c = cfg(3);
        assert_eq!(PointSpace::new(&c, 1, 2).unwrap().count(), 4 * 27);
    }

    #[test]
    fn vector_locate_roundtrip() {
        for (p, e, m) in [(3, 0, 2), (3, 1, 2), (5, 1, 2), (5, 0, 1)] {
            let c = cfg(p);
            let sp = PointSpace::new(&c, e, m).unwrap();
            for i in 0..sp.count() {
                let v = sp.vector(i);
                assert_eq!(sp.locate(&v).unwrap(), (i, (1, 0)));
                let ex = sp.exact_vector(&c, i);
                for j in 0..3 {
                    assert_eq!(ex[j].residue(m).unwrap(), v[j]);
                }
                // frame form vanishes exactly
                let pe = c.uniformizer_pow(e as i64);
                let f = pe.mul(&ex[0].mul(&ex[2].conj()).trace()).add(&ex[1].norm());
                assert!(f.is_zero());
            }
        }
    }

    #[test]
    fn identity_and_weyl_classes() {
        let c = cfg(3);
        let one = GroupElement::identity(&c);
        let b = u_elem(&c, c.elem(0, 1, 1), c.elem(0, 2, 0));
        assert_eq!(canonicalize(&c, &one, 1).unwrap(), canonicalize(&c, &b, 1).unwrap());
        assert_ne!(canonicalize(&c, &one, 1).unwrap(), canonicalize(&c, &t_n(&c, 0), 1).unwrap());
    }

    #[test]
    fn act_matches_residue_action() {
        let c = cfg(3);
        let m = 2;
        let sp = PointSpace::new(&c, 0, m).unwrap();
        let g = uhat_elem(&c, c.elem(0, 1, 2), c.elem(0, 1, 0)).mul(&t_n(&c, 0));
        let gm = Frame::standard().residue_matrix(&g, m).unwrap();
        for i in (0..sp.count()).step_by(37) {
            let x = point_from_index(&c, m, i).unwrap();
            let (y, b) = act(&c, &x, &g).unwrap();
            assert!(b.is_upper_triangular());
            let (j, _) = sp.locate(&row_mul(&sp.ring, &sp.vector(i), &gm)).unwrap();
            assert_eq!(y.index, j);
        }
    }

    #[test]
    fn k0_is_transitive() {
        let c = cfg(3);
        let gens = SubgroupSpec::Kn(0).generators(&c);
        for m in 1..3 {
            let o = orbits(&c, Frame::standard(), m, &gens, None, "K0", DEFAULT_BUDGET).unwrap();
            assert_eq!(o.orbit_count(), 1);
        }
    }

    #[test]
    fn unipotents_alone_do_not_generate() {
        let c = cfg(3);
        let gens = SubgroupSpec::UO.generators(&c);
        let r = generation_check(&c, SubgroupSpec::Kn(0), &gens, 1, DEFAULT_BUDGET).unwrap();
        assert!(!r.pass && r.closure_given < r.closure_full);
        let r = generation_check(&c, SubgroupSpec::Kn(0), &hu_generators(&c, 0), 1, DEFAULT_BUDGET).unwrap();
        assert!(r.pass, "{r:?}");
        // |U(3, F_3)| = 27 * 28 * 8 * 4
        assert_eq!(r.closure_full, 24192);
    }

    #[test]
    fn lifted_closure_matches_enumeration() {
        let c = cfg(3);
        for (n, m) in [(2, 2)] {
            let frame = Frame::for_level(n);
            let gens = SubgroupSpec::Kn(n).generators(&c);
            let plain = closure_size(&c, frame, m, &gens, 3_000_000).unwrap();
            assert_eq!(closure_order(&c, frame, m, &gens, DEFAULT_BUDGET).unwrap(), plain);
            let lg = hu_generators(&c, n);
            assert_eq!(closure_order(&c, frame, m, &lg, DEFAULT_BUDGET).unwrap(), plain);
        }
        // the kernel of K0 (mod p^2) -> K0 (mod p) has order q^9 for U(2,1)
        let gens = SubgroupSpec::Kn(0).generators(&c);
        assert_eq!(closure_order(&c, Frame::standard(), 2, &gens, DEFAULT_BUDGET).unwrap(), 24192 * 3u64.pow(9));
        let uo = SubgroupSpec::UO.generators(&c);
        assert!(closure_order(&c, Frame::standard(), 2, &uo, DEFAULT_BUDGET).unwrap() < 24192 * 3u64.pow(9));
    }

    #[test]
    fn budget_refusal() {
        let c = cfg(3);
        assert!(matches!(enumerate_points(&c, 2, 100), Err(Error::Budget { required: 756, .. })));
    }
}
