//! Matrices in `G = U(2,1)(E/F) = { g : conj(g)^t J g = J }` with `J` the
//! antidiagonal form, the named elements and subgroups, the Iwasawa
//! decomposition `G = B K_0`, and the explicit coset systems used by the
//! level raising operators.

use std::fmt;

use crate::error::{Error, Result};
use crate::localfield::{solve_norm, EElement, FieldConfig};

pub type Row = [EElement; 3];

#[derive(Clone, Copy, Debug)]
pub struct GroupElement {
    pub entries: [[EElement; 3]; 3],
}

/// The hermitian form `h(u, v) = u_1 conj(v_3) + u_2 conj(v_2) + u_3 conj(v_1)`
/// attached to `J`.
pub fn hermitian(u: &Row, v: &Row) -> EElement {
    u[0].mul(&v[2].conj()).add(&u[1].mul(&v[1].conj())).add(&u[2].mul(&v[0].conj()))
}

/// Row vector times matrix.
pub fn row_times(r: &Row, g: &GroupElement) -> Row {
    let mut out = [r[0].mul(&g.entries[0][0]); 3];
    for j in 0..3 {
        let mut acc = r[0].mul(&g.entries[0][j]);
        for k in 1..3 {
            acc = acc.add(&r[k].mul(&g.entries[k][j]));
        }
        out[j] = acc;
    }
    out
}

impl GroupElement {
    pub fn from_entries(entries: [[EElement; 3]; 3]) -> Self {
        Self { entries }
    }

    pub fn identity(cfg: &FieldConfig) -> Self {
        Self::diag(cfg, [cfg.one(), cfg.one(), cfg.one()])
    }

    pub fn diag(cfg: &FieldConfig, d: [EElement; 3]) -> Self {
        let z = cfg.zero();
        Self { entries: [[d[0], z, z], [z, d[1], z], [z, z, d[2]]] }
    }

    pub fn entry(&self, i: usize, j: usize) -> &EElement {
        &self.entries[i][j]
    }

    pub fn row(&self, i: usize) -> Row {
        self.entries[i]
    }

    /// Weakest window among the non-zero entries.
    pub fn min_window(&self) -> u32 {
        self.entries.iter().flatten().map(|e| e.window()).min().unwrap_or(u32::MAX)
    }

    pub fn min_valuation(&self) -> i64 {
        self.entries.iter().flatten().map(|e| e.valuation_bound()).min().unwrap()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut entries = self.entries;
        for (i, row) in entries.iter_mut().enumerate() {
            *row = row_times(&self.entries[i], other);
        }
        Self { entries }
    }

    pub fn conj_transpose(&self) -> Self {
        let mut entries = self.entries;
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.entries[j][i].conj();
            }
        }
        Self { entries }
    }

    /// `J conj(g)^t J`, the inverse of a unitary element.
    pub fn j_inverse(&self) -> Self {
        let mut entries = self.entries;
        for (i, row) in entries.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.entries[2 - j][2 - i].conj();
            }
        }
        Self { entries }
    }

    pub fn det(&self) -> EElement {
        let m = &self.entries;
        let t1 = m[0][0].mul(&m[1][1].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][1])));
        let t2 = m[0][1].mul(&m[1][0].mul(&m[2][2]).sub(&m[1][2].mul(&m[2][0])));
        let t3 = m[0][2].mul(&m[1][0].mul(&m[2][1]).sub(&m[1][1].mul(&m[2][0])));
        t1.sub(&t2).add(&t3)
    }

    /// `conj(g)^t J g = J` entrywise within the known precision.
    pub fn is_unitary(&self) -> bool {
        self.is_unitary_for(&standard_form(self.entries[0][0]))
    }

    /// Unitarity against an arbitrary 3x3 form (used by the self-test that
    /// corrupts `J`).
    pub fn is_unitary_for(&self, form: &[[EElement; 3]; 3]) -> bool {
        let gh = self.conj_transpose();
        let f = GroupElement { entries: *form };
        let lhs = gh.mul(&f).mul(self);
        (0..3).all(|i| (0..3).all(|j| lhs.entries[i][j].eq_within(&form[i][j])))
    }

    pub fn eq_within(&self, other: &Self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j].eq_within(&other.entries[i][j])))
    }

    pub fn is_upper_triangular(&self) -> bool {
        self.entries[1][0].is_zero() && self.entries[2][0].is_zero() && self.entries[2][1].is_zero()
    }

    /// Truncate all entries to absolute precision `abs_prec`.
    pub fn truncate(&self, abs_prec: i64) -> Self {
        let mut entries = self.entries;
        for e in entries.iter_mut().flatten() {
            *e = e.truncate(abs_prec);
        }
        Self { entries }
    }

    /// Stable byte encoding of the integral element at level `m`: each entry
    /// as two fixed-width big-endian residues modulo `p^m`.
    pub fn encode(&self, m: u32) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(9 * 16);
        for e in self.entries.iter().flatten() {
            let (a, b) = e.residue(m)?;
            out.extend_from_slice(&a.to_be_bytes());
            out.extend_from_slice(&b.to_be_bytes());
        }
        Ok(out)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} {} {}", row[0], row[1], row[2])?;
        }
        Ok(())
    }
}

fn standard_form(sample: EElement) -> [[EElement; 3]; 3] {
    let ctx = sample.ctx();
    let w = 60.min(crate::localfield::max_window(ctx.p));
    let one = EElement::from_int(ctx, 1, w);
    let z = EElement::zero(ctx);
    [[z, z, one], [z, one, z], [one, z, z]]
}

/// Named elements of G.
#[derive(Clone, Copy, Debug)]
pub enum ElementKind {
    /// Upper unipotent `u(x, y)`, requires `y + conj(y) + x conj(x) = 0`.
    U(EElement, EElement),
    /// Lower unipotent `uhat(x, y)`, same constraint.
    UHat(EElement, EElement),
    /// `t(a) = diag(a, 1, conj(a)^-1)`.
    T(EElement),
    /// Central `z(lambda) = lambda * 1`, `lambda` of norm one.
    Z(EElement),
    /// Antidiagonal `t_n = antidiag(p^-n, 1, p^n)`.
    TN(i64),
    /// `eta = diag(p^-1, 1, p)`.
    Eta,
}

pub fn make_element(cfg: &FieldConfig, kind: ElementKind) -> Result<GroupElement> {
    let one = cfg.one();
    let z = cfg.zero();
    match kind {
        ElementKind::U(x, y) | ElementKind::UHat(x, y) => {
            let c = y.trace().add(&x.norm());
            if !c.is_zero() {
                return Err(Error::Rejected(format!("trace(y) + norm(x) = {c} is not zero")));
            }
            let m = if matches!(kind, ElementKind::U(..)) {
                [[one, x, y], [z, one, x.conj().neg()], [z, z, one]]
            } else {
                [[one, z, z], [x, one, z], [y, x.conj().neg(), one]]
            };
            Ok(GroupElement { entries: m })
        }
        ElementKind::T(a) => {
            let inv = a.conj().inv().map_err(|e| Error::Rejected(format!("t(a): {e}")))?;
            Ok(GroupElement::diag(cfg, [a, one, inv]))
        }
        ElementKind::Z(l) => {
            if !l.norm().eq_within(&one) {
                return Err(Error::Rejected(format!("z(lambda): norm of {l} is not 1")));
            }
            Ok(GroupElement::diag(cfg, [l, l, l]))
        }
        ElementKind::TN(n) => {
            let a = cfg.uniformizer_pow(-n);
            let b = cfg.uniformizer_pow(n);
            Ok(GroupElement { entries: [[z, z, a], [z, one, z], [b, z, z]] })
        }
        ElementKind::Eta => {
            Ok(GroupElement::diag(cfg, [cfg.uniformizer_pow(-1), one, cfg.uniformizer_pow(1)]))
        }
    }
}

/// `-x conj(x)/2`, the real part forced on `y` in `u(x, y)`.
pub fn forced_y(cfg: &FieldConfig, x: &EElement) -> EElement {
    let half = cfg.int(2).inv().expect("p odd");
    x.norm().neg().mul(&half)
}

/// `u(x, -x conj(x)/2 + s sqrt(eps))`.
pub fn u_elem(cfg: &FieldConfig, x: EElement, s: EElement) -> GroupElement {
    let y = forced_y(cfg, &x).add(&s.mul(&cfg.sqrt_eps()));
    make_element(cfg, ElementKind::U(x, y)).expect("constraint holds by construction")
}

pub fn uhat_elem(cfg: &FieldConfig, x: EElement, s: EElement) -> GroupElement {
    let y = forced_y(cfg, &x).add(&s.mul(&cfg.sqrt_eps()));
    make_element(cfg, ElementKind::UHat(x, y)).expect("constraint holds by construction")
}

/// The central unipotent `u(0, s sqrt(eps))`.
pub fn u_central(cfg: &FieldConfig, s: EElement) -> GroupElement {
    u_elem(cfg, cfg.zero(), s)
}

pub fn t_elem(cfg: &FieldConfig, a: EElement) -> GroupElement {
    make_element(cfg, ElementKind::T(a)).expect("non-zero torus parameter")
}

pub fn z_elem(cfg: &FieldConfig, l: EElement) -> GroupElement {
    make_element(cfg, ElementKind::Z(l)).expect("norm-one parameter")
}

pub fn t_n(cfg: &FieldConfig, n: i64) -> GroupElement {
    make_element(cfg, ElementKind::TN(n)).unwrap()
}

pub fn eta(cfg: &FieldConfig) -> GroupElement {
    make_element(cfg, ElementKind::Eta).unwrap()
}

/// `eta^k` for any integer k.
pub fn eta_pow(cfg: &FieldConfig, k: i64) -> GroupElement {
    GroupElement::diag(cfg, [cfg.uniformizer_pow(-k), cfg.one(), cfg.uniformizer_pow(k)])
}

/// Lift of a generator of the multiplicative group of the residue field of
/// E, found by search (smallest `a + b sqrt(eps)` in lexicographic order).
pub fn residue_generator(cfg: &FieldConfig) -> (u64, u64) {
    let p = cfg.p;
    let order = p * p - 1;
    let mul = |x: (u64, u64), y: (u64, u64)| {
        ((x.0 * y.0 + cfg.epsilon * x.1 * y.1) % p, (x.0 * y.1 + x.1 * y.0) % p)
    };
    for a in 0..p {
        for b in 0..p {
            if a == 0 && b == 0 {
                continue;
            }
            let mut acc = (a, b);
            let mut k = 1;
            while acc != (1, 0) {
                acc = mul(acc, (a, b));
                k += 1;
            }
            if k == order {
                return (a, b);
            }
        }
    }
    unreachable!("cyclic group has a generator")
}

/// Completes a primitive isotropic integral row whose leftmost unit entry is
/// 1 (at position 0 or 2) to an element of `K_0` with that bottom row.
pub fn complete_isotropic(cfg: &FieldConfig, r: &Row) -> Result<GroupElement> {
    let one = cfg.one();
    let z = cfg.zero();
    if r[0].valuation() == Some(0) {
        let r = [one, r[1], r[2]];
        Ok(GroupElement { entries: [[z, z, one], [z, one, r[1].conj().neg()], r] })
    } else if r[2].valuation() == Some(0) {
        let r = [r[0], r[1], one];
        Ok(GroupElement { entries: [[one, z, z], [r[1].conj().neg(), one, z], r] })
    } else {
        Err(Error::Rejected("row is not primitive isotropic with a unit end entry".into()))
    }
}

/// Index of the entry of minimal valuation, leftmost on ties.
pub fn pivot(r: &Row) -> Result<usize> {
    let mut best: Option<(usize, i64)> = None;
    for (i, e) in r.iter().enumerate() {
        if let Some(v) = e.valuation() {
            if best.map_or(true, |(_, bv)| v < bv) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i).ok_or_else(|| Error::Precision("row vanishes at working precision".into()))
}

/// Iwasawa decomposition `g = b k`, `b` upper triangular, `k` in `K_0`.
///
/// The bottom row of `g` is isotropic; it is divided by its entry of minimal
/// valuation (leftmost on ties) and completed to `k` by
/// [`complete_isotropic`]. Then `b = g k^-1`.
pub fn iwasawa(cfg: &FieldConfig, g: &GroupElement) -> Result<(GroupElement, GroupElement)> {
    let r = g.row(2);
    let pv = pivot(&r)?;
    let c = r[pv];
    let cinv = c.inv()?;
    let rn = [r[0].mul(&cinv), r[1].mul(&cinv), r[2].mul(&cinv)];
    if !hermitian(&rn, &rn).is_zero() {
        return Err(Error::Rejected("bottom row is not isotropic".into()));
    }
    let k = complete_isotropic(cfg, &rn)?;
    let b = g.mul(&k.j_inverse());
    if !b.is_upper_triangular() {
        return Err(Error::Precision(format!("Borel part not triangular at precision: {b}")));
    }
    Ok((b, k))
}

/// Subgroups of G named in the construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum SubgroupSpec {
    Kn(u32),
    /// `K_n cap K_{n+1}`.
    KnCap(u32),
    /// `(1 + M_3(p^m)) cap G`.
    PrincipalCongruence(u32),
    /// `U(o_E)`.
    UO,
    /// `U(p_E^-1)`.
    UPinv,
    /// `B cap K_0`.
    BK0,
    /// `K_n cap H`.
    KnH(u32),
    /// `T cap K_0`.
    TK0,
    /// Center `Z_n = iota(E^1_n)`.
    Zn(u32),
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SubgroupSpec::Kn(n) => write!(f, "K{n}"),
            SubgroupSpec::KnCap(n) => write!(f, "K{n}nK{}", n + 1),
            SubgroupSpec::PrincipalCongruence(m) => write!(f, "Gamma{m}"),
            SubgroupSpec::UO => write!(f, "U(o)"),
            SubgroupSpec::UPinv => write!(f, "U(p^-1)"),
            SubgroupSpec::BK0 => write!(f, "BnK0"),
            SubgroupSpec::KnH(n) => write!(f, "K{n}nH"),
            SubgroupSpec::TK0 => write!(f, "TnK0"),
            SubgroupSpec::Zn(n) => write!(f, "Z{n}"),
        }
    }
}

const NONE: i64 = i64::MAX;

impl SubgroupSpec {
    /// Lower bounds on entry valuations (`NONE` = entry must vanish), plus
    /// the depth `d` of the condition `g_22 in 1 + p^d` (0 for none).
    fn pattern(&self) -> ([[i64; 3]; 3], u32) {
        let n = |k: u32| k as i64;
        match *self {
            SubgroupSpec::Kn(k) => ([[0, 0, -n(k)], [n(k), 0, 0], [n(k), n(k), 0]], k),
            SubgroupSpec::KnCap(k) => {
                ([[0, 0, -n(k)], [n(k + 1), 0, 0], [n(k + 1), n(k + 1), 0]], k + 1)
            }
            SubgroupSpec::PrincipalCongruence(m) => ([[n(m); 3]; 3], m),
            SubgroupSpec::UO => ([[0, 0, 0], [NONE, 0, 0], [NONE, NONE, 0]], 0),
            SubgroupSpec::UPinv => ([[0, -1, -2], [NONE, 0, -1], [NONE, NONE, 0]], 0),
            SubgroupSpec::BK0 => ([[0, 0, 0], [NONE, 0, 0], [NONE, NONE, 0]], 0),
            SubgroupSpec::KnH(k) => ([[0, NONE, -n(k)], [NONE, 0, NONE], [n(k), NONE, 0]], 0),
            SubgroupSpec::TK0 => ([[0, NONE, NONE], [NONE, 0, NONE], [NONE, NONE, 0]], 0),
            SubgroupSpec::Zn(_) => ([[0, NONE, NONE], [NONE, 0, NONE], [NONE, NONE, 0]], 0),
        }
    }

    /// Membership test: entry valuation pattern plus unitarity.
    pub fn contains(&self, g: &GroupElement) -> bool {
        let (pat, depth) = self.pattern();
        for i in 0..3 {
            for j in 0..3 {
                let e = g.entries[i][j];
                let need = pat[i][j];
                let e = if i == j && matches!(self, SubgroupSpec::PrincipalCongruence(_)) {
                    e.sub(&EElement::from_int(e.ctx(), 1, 60.min(crate::localfield::max_window(e.ctx().p))))
                } else {
                    e
                };
                if need == NONE {
                    if !e.is_zero() {
                        return false;
                    }
                } else if e.valuation_bound() < need {
                    return false;
                }
            }
        }
        let one = EElement::from_int(g.entries[1][1].ctx(), 1, 60.min(crate::localfield::max_window(g.entries[1][1].ctx().p)));
        if depth > 0 && g.entries[1][1].sub(&one).valuation_bound() < depth as i64 {
            return false;
        }
        if matches!(self, SubgroupSpec::UO | SubgroupSpec::UPinv) {
            if !(0..3).all(|i| g.entries[i][i].eq_within(&one)) {
                return false;
            }
        }
        if matches!(self, SubgroupSpec::KnH(_)) && !g.entries[1][1].eq_within(&one) {
            return false;
        }
        if let SubgroupSpec::Zn(k) = *self {
            let l = g.entries[0][0];
            if !g.entries[1][1].eq_within(&l) || !g.entries[2][2].eq_within(&l) {
                return false;
            }
            if k > 0 && l.sub(&one).valuation_bound() < k as i64 {
                return false;
            }
        }
        g.is_unitary()
    }

    /// A generating set (topologically) of the subgroup.
    pub fn generators(&self, cfg: &FieldConfig) -> Vec<GroupElement> {
        match *self {
            SubgroupSpec::Kn(n) => kn_generators(cfg, n, false),
            SubgroupSpec::KnCap(n) => kn_generators(cfg, n, true),
            SubgroupSpec::UO => uo_generators(cfg, 0),
            SubgroupSpec::UPinv => uo_generators(cfg, 1),
            SubgroupSpec::KnH(n) => knh_generators(cfg, n),
            SubgroupSpec::TK0 => {
                let mut g = torus_generators(cfg);
                g.extend(norm_one_generators(cfg, 0).into_iter().map(|l| z_elem(cfg, l)));
                g
            }
            SubgroupSpec::BK0 => {
                let mut g = SubgroupSpec::TK0.generators(cfg);
                g.extend(uo_generators(cfg, 0));
                g
            }
            SubgroupSpec::Zn(n) => {
                norm_one_generators(cfg, n).into_iter().map(|l| z_elem(cfg, l)).collect()
            }
            SubgroupSpec::PrincipalCongruence(m) => {
                let pm = cfg.uniformizer_pow(m as i64);
                let mut g = vec![
                    t_elem(cfg, cfg.one().add(&pm)),
                    t_elem(cfg, cfg.one().add(&pm.mul(&cfg.sqrt_eps()))),
                    u_elem(cfg, pm, cfg.zero()),
                    u_elem(cfg, pm.mul(&cfg.sqrt_eps()), cfg.zero()),
                    u_central(cfg, pm),
                    uhat_elem(cfg, pm, cfg.zero()),
                    uhat_elem(cfg, pm.mul(&cfg.sqrt_eps()), cfg.zero()),
                    uhat_elem(cfg, cfg.zero(), pm),
                ];
                g.extend(norm_one_generators(cfg, m).into_iter().map(|l| z_elem(cfg, l)));
                g
            }
        }
    }
}

/// Generators of `o_E^x`: a residue generator lift, `1 + p`, `1 + p sqrt(eps)`.
fn unit_generators(cfg: &FieldConfig) -> Vec<EElement> {
    let (a, b) = residue_generator(cfg);
    vec![cfg.elem(0, a as i64, b as i64), cfg.elem(0, 1, 0).add(&cfg.uniformizer_pow(1)), cfg.elem(0, 1, 0).add(&cfg.elem(1, 0, 1))]
}

fn torus_generators(cfg: &FieldConfig) -> Vec<GroupElement> {
    unit_generators(cfg).into_iter().map(|a| t_elem(cfg, a)).collect()
}

/// Topological generators of `E^1_n` (`E^1` itself for n = 0).
pub fn norm_one_generators(cfg: &FieldConfig, n: u32) -> Vec<EElement> {
    let mut out = Vec::new();
    if n == 0 {
        let g = unit_generators(cfg)[0];
        out.push(g.div(&g.conj()).unwrap());
    }
    let k = n.max(1) as i64;
    let w = cfg.elem(k, 0, 1);
    let one = cfg.one();
    out.push(one.add(&w).div(&one.sub(&w)).unwrap());
    out
}

fn uo_generators(cfg: &FieldConfig, depth: i64) -> Vec<GroupElement> {
    let x = cfg.uniformizer_pow(-depth);
    vec![
        u_elem(cfg, x, cfg.zero()),
        u_elem(cfg, x.mul(&cfg.sqrt_eps()), cfg.zero()),
        u_central(cfg, cfg.uniformizer_pow(-2 * depth)),
    ]
}

fn knh_generators(cfg: &FieldConfig, n: u32) -> Vec<GroupElement> {
    let n = n as i64;
    let mut g = torus_generators(cfg);
    g.push(u_central(cfg, cfg.uniformizer_pow(-n)));
    g.push(uhat_elem(cfg, cfg.zero(), cfg.uniformizer_pow(n)));
    g.push(t_n(cfg, n));
    g
}

/// Generators of `K_n` from `K_n cap H` and `U(o_E)`.
pub fn hu_generators(cfg: &FieldConfig, n: u32) -> Vec<GroupElement> {
    let mut g = knh_generators(cfg, n);
    g.extend(uo_generators(cfg, 0));
    g
}

fn kn_generators(cfg: &FieldConfig, n: u32, cap: bool) -> Vec<GroupElement> {
    let low = if cap { n + 1 } else { n } as i64;
    let mut g = torus_generators(cfg);
    g.extend(norm_one_generators(cfg, low as u32).into_iter().map(|l| z_elem(cfg, l)));
    g.extend(uo_generators(cfg, 0));
    g.push(u_central(cfg, cfg.uniformizer_pow(-(n as i64))));
    let pl = cfg.uniformizer_pow(low);
    g.push(uhat_elem(cfg, pl, cfg.zero()));
    g.push(uhat_elem(cfg, pl.mul(&cfg.sqrt_eps()), cfg.zero()));
    g.push(uhat_elem(cfg, cfg.zero(), pl));
    if !cap {
        g.push(t_n(cfg, n as i64));
    }
    g
}

/// Representatives of `K_{n+1} / (K_{n+1} cap K_n)`: `t_{n+1}` followed by
/// `u(0, c p^{-1-n} sqrt(eps))` for `c = 0..p`.
pub fn coset_reps_theta(cfg: &FieldConfig, n: u32) -> Vec<GroupElement> {
    let mut out = vec![t_n(cfg, n as i64 + 1)];
    out.extend(theta_translations(cfg, n, 1));
    out
}

/// `u(0, x sqrt(eps))` for `x` over `p^{-k-n} / p^{-n}`, in the order
/// `x = sum_i c_i p^{-n-k+i}` with the digits `c` read little-endian.
pub fn theta_translations(cfg: &FieldConfig, n: u32, k: u32) -> Vec<GroupElement> {
    let p = cfg.p;
    let count = p.pow(k);
    (0..count)
        .map(|mut idx| {
            let mut x = cfg.zero();
            for i in 0..k {
                let c = (idx % p) as i64;
                idx /= p;
                x = x.add(&cfg.elem(-(n as i64) - (k as i64) + i as i64, c, 0));
            }
            u_central(cfg, x)
        })
        .collect()
}

/// The `q^4` representatives of `U(p^-1)/U(o_E)`:
/// `u(x, -x conj(x)/2 + s sqrt(eps))`, `x` over `p^-1 / o`, `s` over `p^-2/o`.
pub fn coset_reps_s(cfg: &FieldConfig) -> Vec<GroupElement> {
    let p = cfg.p as i64;
    let mut out = Vec::with_capacity((p * p * p * p) as usize);
    for c1 in 0..p {
        for c2 in 0..p {
            let x = cfg.elem(-1, c1, c2);
            for d0 in 0..p {
                for d1 in 0..p {
                    let s = cfg.elem(-2, d0, 0).add(&cfg.elem(-1, d1, 0));
                    out.push(u_elem(cfg, x, s));
                }
            }
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct CosetReport {
    pub big: String,
    pub small: String,
    pub index: usize,
    pub distinct: bool,
    /// First pair `(i, j)` with `r_i H = r_j H`.
    pub collision: Option<(usize, usize)>,
    /// The set `{r H}` is stable under left multiplication by generators of
    /// the big group (and contains `H`), hence is all of `big / H`.
    pub covering: bool,
    pub pass: bool,
}

/// Verifies that `reps` is a system of representatives for `big / small`.
pub fn verify_coset_system(
    cfg: &FieldConfig,
    big: SubgroupSpec,
    small: SubgroupSpec,
    reps: &[GroupElement],
) -> CosetReport {
    let invs: Vec<GroupElement> = reps.iter().map(|r| r.j_inverse()).collect();
    let all_in_big = reps.iter().all(|r| big.contains(r));
    let mut collision = None;
    'outer: for i in 0..reps.len() {
        for j in i + 1..reps.len() {
            if small.contains(&invs[i].mul(&reps[j])) {
                collision = Some((i, j));
                break 'outer;
            }
        }
    }
    let distinct = all_in_big && collision.is_none();
    let has_trivial = reps.iter().any(|r| small.contains(r));
    let covering = has_trivial
        && big.generators(cfg).iter().all(|g| {
            reps.iter().all(|r| {
                let gr = g.mul(r);
                invs.iter().any(|ri| small.contains(&ri.mul(&gr)))
            })
        });
    CosetReport {
        big: big.to_string(),
        small: small.to_string(),
        index: reps.len(),
        distinct,
        collision,
        covering,
        pass: distinct && covering,
    }
}

/// The coset system `K_{n+1} / (K_{n+1} cap K_n)` of size `q + 1`.
pub fn verify_theta_cosets(cfg: &FieldConfig, n: u32) -> CosetReport {
    verify_coset_system(cfg, SubgroupSpec::Kn(n + 1), SubgroupSpec::KnCap(n), &coset_reps_theta(cfg, n))
}

#[derive(Clone, Debug, serde::Serialize)]
pub struct DiagIdentityReport {
    pub n: u32,
    /// The identity as displayed (both middle arguments `1/conj(z)`).
    pub displayed_holds: bool,
    /// Which of the four `(1/z | 1/conj(z))` argument choices hold.
    pub variants: Vec<(String, bool)>,
}

/// Checks `diag(p^n z, -conj(z)/z, p^-n conj(z)^-1)
///   = uhat(conj(y)/z, a) u(y, z) uhat(conj(y)/conj(z), b) t_n`
/// for `(a, b) = (1/conj(z), 1/conj(z))` and the other three variants.
pub fn verify_diag_identity(cfg: &FieldConfig, n: u32, z: &EElement) -> Result<DiagIdentityReport> {
    if z.valuation() != Some(-(n as i64)) {
        return Err(Error::Rejected(format!("z = {z} must have valuation -{n}")));
    }
    let tr = z.trace();
    if tr.valuation() != Some(0) {
        return Err(Error::Rejected(format!("z + conj(z) = {tr} is not a unit")));
    }
    let y = solve_norm(cfg, &tr.neg())?;
    let zb = z.conj();
    let lhs = GroupElement::diag(
        cfg,
        [cfg.uniformizer_pow(n as i64).mul(z), zb.neg().div(z)?, cfg.uniformizer_pow(-(n as i64)).mul(&zb.inv()?)],
    );
    let mid = make_element(cfg, ElementKind::U(y, *z))?;
    let tn = t_n(cfg, n as i64);
    let inv_z = z.inv()?;
    let inv_zb = zb.inv()?;
    let mut variants = Vec::new();
    let mut displayed = false;
    for (name, a, b) in [
        ("1/zbar,1/zbar", inv_zb, inv_zb),
        ("1/z,1/zbar", inv_z, inv_zb),
        ("1/zbar,1/z", inv_zb, inv_z),
        ("1/z,1/z", inv_z, inv_z),
    ] {
        let holds = (|| -> Result<bool> {
            let left = make_element(cfg, ElementKind::UHat(y.conj().div(z)?, a))?;
            let right = make_element(cfg, ElementKind::UHat(y.conj().div(&zb)?, b))?;
            Ok(left.mul(&mid).mul(&right).mul(&tn).eq_within(&lhs))
        })()
        .unwrap_or(false);
        if name == "1/zbar,1/zbar" {
            displayed = holds;
        }
        variants.push((name.to_string(), holds));
    }
    Ok(DiagIdentityReport { n, displayed_holds: displayed, variants })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(p: u64) -> FieldConfig {
        FieldConfig::with_window(p, 12).unwrap()
    }

    #[test]
    fn named_elements_are_unitary() {
        let c = cfg(5);
        for n in 0..4 {
            assert!(t_n(&c, n).is_unitary());
            assert!(SubgroupSpec::Kn(n as u32).contains(&t_n(&c, n)));
        }
        assert!(eta(&c).is_unitary());
        let y = c.rational(-1, 2).unwrap();
        let u = make_element(&c, ElementKind::U(c.one(), y)).unwrap();
        assert!(u.is_unitary());
        assert!(make_element(&c, ElementKind::U(c.one(), c.zero())).is_err());
        let u0 = make_element(&c, ElementKind::U(c.zero(), c.sqrt_eps())).unwrap();
        assert!(u0.is_unitary() && u0.entry(0, 2).eq_within(&c.sqrt_eps()));
        assert!(make_element(&c, ElementKind::Z(c.int(2))).is_err());
    }

    #[test]
    fn eta_times_tn_is_next_tn() {
        let c = cfg(3);
        for n in 0..4 {
            assert!(eta(&c).mul(&t_n(&c, n)).eq_within(&t_n(&c, n + 1)));
        }
    }

    #[test]
    fn inverse_identity() {
        let c = cfg(5);
        let g = u_elem(&c, c.elem(-1, 2, 3), c.elem(-2, 1, 0)).mul(&t_n(&c, 2)).mul(&t_elem(&c, c.elem(0, 1, 1)));
        assert!(g.is_unitary());
        assert!(g.mul(&g.j_inverse()).eq_within(&GroupElement::identity(&c)));
    }

    #[test]
    fn iwasawa_examples() {
        let c = cfg(5);
        let k = uhat_elem(&c, c.elem(0, 1, 2), c.elem(0, 3, 0));
        let (b, kk) = iwasawa(&c, &k).unwrap();
        assert!(b.mul(&kk).eq_within(&k));
        assert!(SubgroupSpec::BK0.contains(&b));
        let g = uhat_elem(&c, c.elem(-1, 1, 1), c.elem(-2, 1, 0));
        let (b, kk) = iwasawa(&c, &g).unwrap();
        assert!(b.is_upper_triangular() && b.is_unitary());
        assert!(SubgroupSpec::Kn(0).contains(&kk));
        assert!(b.mul(&kk).eq_within(&g));
        for n in 1..4 {
            let g = t_n(&c, n);
            let (b, kk) = iwasawa(&c, &g).unwrap();
            assert!(b.mul(&kk).eq_within(&g));
            assert_eq!(b.entry(0, 0).valuation(), Some(-n));
            assert_eq!(b.entry(2, 2).valuation(), Some(n));
            assert!(SubgroupSpec::Kn(0).contains(&kk));
        }
    }

    #[test]
    fn theta_reps_shape() {
        for (p, n, count) in [(3, 0, 4), (5, 1, 6)] {
            let c = cfg(p);
            let reps = coset_reps_theta(&c, n);
            assert_eq!(reps.len(), count);
            let small = SubgroupSpec::KnCap(n);
            let inside = reps.iter().filter(|r| small.contains(r)).count();
            assert_eq!(inside, 1);
            assert!(reps.iter().all(|r| SubgroupSpec::Kn(n + 1).contains(r)));
        }
    }

    #[test]
    fn theta_coset_systems() {
        for p in [3, 5] {
            let c = cfg(p);
            for n in 0..4 {
                let r = verify_theta_cosets(&c, n);
                assert_eq!(r.index as u64, p + 1);
                assert!(r.pass, "{r:?}");
            }
        }
        let c = cfg(3);
        let mut reps = coset_reps_theta(&c, 1);
        reps.pop();
        assert!(!verify_coset_system(&c, SubgroupSpec::Kn(2), SubgroupSpec::KnCap(1), &reps).covering);
        reps.push(reps[1].clone());
        assert!(!verify_coset_system(&c, SubgroupSpec::Kn(2), SubgroupSpec::KnCap(1), &reps).distinct);
    }

    #[test]
    fn s_reps_shape() {
        let c = cfg(3);
        let reps = coset_reps_s(&c);
        assert_eq!(reps.len(), 81);
        assert!(reps[0].eq_within(&GroupElement::identity(&c)));
        assert!(reps.iter().all(|r| r.is_unitary() && SubgroupSpec::UPinv.contains(r)));
    }

    #[test]
    fn conjugation_relations() {
        let c = cfg(3);
        let e = eta(&c);
        let ei = e.j_inverse();
        for g in SubgroupSpec::UO.generators(&c) {
            assert!(SubgroupSpec::UPinv.contains(&e.mul(&g).mul(&ei)));
        }
        for n in 0..3u32 {
            for g in SubgroupSpec::Kn(n + 2).generators(&c) {
                // eta^-1 K_{n+2} eta lies in K_n
                assert!(SubgroupSpec::Kn(n).contains(&ei.mul(&g).mul(&e)), "n = {n}");
            }
        }
    }

    #[test]
    fn diag_identity_displayed_form_holds() {
        for (p, n, b) in [(5u64, 0u32, 1i64), (5, 2, 3), (3, 1, 1), (3, 2, 2)] {
            let c = cfg(p);
            let z = c.one().add(&c.elem(-(n as i64), 0, b));
            let r = verify_diag_identity(&c, n, &z).unwrap();
            assert!(r.displayed_holds);
            assert_eq!(r.variants.iter().filter(|v| v.1).count(), 1);
        }
    }

    #[test]
    fn diag_identity_preconditions() {
        let c = cfg(3);
        let z = c.uniformizer_pow(-1);
        assert!(matches!(verify_diag_identity(&c, 1, &z), Err(Error::Rejected(_))));
    }
}

