//! Operators between fixed spaces as matrices, and the exact checks built
//! on them.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::Serialize;

use super::{auto_level, fixed_space, FixedSpace, LevelGroup, Probe, TorusCharacter};
use crate::error::{Error, Result};
use crate::flag::DEFAULT_BUDGET;
use crate::group::{coset_reps_s, coset_reps_theta, eta, theta_translations, GroupElement};
use crate::localfield::FieldConfig;
use crate::scalar::{Cyclo, Matrix, MonoSum};

/// An operator matrix with entries kept as formal sums `sum c x^k zeta^j`,
/// so that one orbit computation serves every specialization of `x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpMatrix {
    pub rows: usize,
    pub cols: usize,
    pub n: u64,
    pub entries: Vec<MonoSum>,
    /// The image was checked to be fixed by the target group.
    pub invariant: bool,
}

impl OpMatrix {
    pub fn specialize(&self, x: &BigRational) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols, self.n);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(i, j, self.entries[i * self.cols + j].eval(x));
            }
        }
        m
    }

    fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (a, b) in out.entries.iter_mut().zip(&o.entries) {
            a.add(b);
        }
        out.invariant = false;
        out
    }
}

/// Values `sum_h f_b(g_i h)` for source basis functions `f_b` at the probes.
pub fn value_matrix(src: &FixedSpace, probes: &[Probe], hs: &[GroupElement]) -> Result<OpMatrix> {
    let mut entries = vec![MonoSum::new(src.chi.order()); probes.len() * src.dim()];
    for (i, g) in probes.iter().enumerate() {
        for (b, s) in src.sum_values(g, hs)?.into_iter().enumerate() {
            entries[i * src.dim() + b] = s;
        }
    }
    Ok(OpMatrix { rows: probes.len(), cols: src.dim(), n: src.chi.order(), entries, invariant: false })
}

/// Whether every `sum_h pi(h) f_b` is fixed by the generators of `tgt`'s
/// group (at its roots) and vanishes at the roots of inconsistent orbits.
pub fn image_is_fixed(src: &FixedSpace, tgt: &FixedSpace, hs: &[GroupElement], x: &BigRational) -> Result<bool> {
    for r in tgt.root_probes() {
        let base: Vec<Cyclo> = src.sum_values(&r, hs)?.iter().map(|s| s.eval(x)).collect();
        for k in &tgt.group.generators {
            let moved = src.sum_values(&r.times(k), hs)?;
            if moved.iter().zip(&base).any(|(a, b)| !a.eval(x).sub(b).is_zero()) {
                return Ok(false);
            }
        }
    }
    for r in tgt.dead_probes() {
        if src.sum_values(&r, hs)?.iter().any(|s| !s.eval(x).is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Fixed spaces and operator matrices for one character, computed at the
/// automatic level plus `offset`.
pub struct Model {
    pub cfg: FieldConfig,
    pub chi: TorusCharacter,
    pub offset: u32,
    pub budget: u64,
    /// Explicit level for every space instead of the automatic one.
    pub level: Option<u32>,
    spaces: RefCell<HashMap<String, Arc<FixedSpace>>>,
    ops: RefCell<HashMap<String, Arc<OpMatrix>>>,
}

impl Model {
    pub fn new(cfg: &FieldConfig, chi: &TorusCharacter) -> Self {
        Self::with_offset(cfg, chi, 0, DEFAULT_BUDGET)
    }

    pub fn with_offset(cfg: &FieldConfig, chi: &TorusCharacter, offset: u32, budget: u64) -> Self {
        Self {
            cfg: *cfg,
            chi: chi.clone(),
            offset,
            budget,
            level: None,
            spaces: RefCell::new(HashMap::new()),
            ops: RefCell::new(HashMap::new()),
        }
    }

    pub fn with_level(mut self, level: Option<u32>) -> Self {
        self.level = level;
        self
    }

    pub fn q(&self) -> u64 {
        self.cfg.q()
    }

    pub fn x(&self) -> BigRational {
        self.chi.x()
    }

    pub fn space(&self, group: LevelGroup) -> Result<Arc<FixedSpace>> {
        if let Some(s) = self.spaces.borrow().get(&group.label) {
            return Ok(s.clone());
        }
        let m = self.level.unwrap_or_else(|| auto_level(&group, &self.chi)) + self.offset;
        let label = group.label.clone();
        let s = Arc::new(fixed_space(&self.cfg, &self.chi, Arc::new(group), m, self.budget)?);
        self.spaces.borrow_mut().insert(label, s.clone());
        Ok(s)
    }

    /// `V(n)`.
    pub fn v(&self, n: u32) -> Result<Arc<FixedSpace>> {
        self.space(LevelGroup::kn(&self.cfg, n))
    }

    pub fn cap(&self, n: u32) -> Result<Arc<FixedSpace>> {
        self.space(LevelGroup::kn_cap(&self.cfg, n))
    }

    pub fn s_ambient(&self, n: u32) -> Result<Arc<FixedSpace>> {
        self.space(LevelGroup::s_ambient(&self.cfg, n)?)
    }

    fn cached(
        &self,
        key: String,
        build: impl FnOnce() -> Result<OpMatrix>,
    ) -> Result<Arc<OpMatrix>> {
        if let Some(m) = self.ops.borrow().get(&key) {
            return Ok(m.clone());
        }
        let m = Arc::new(build()?);
        self.ops.borrow_mut().insert(key, m.clone());
        Ok(m)
    }

    fn translate(&self, src: &FixedSpace, tgt: &FixedSpace, hs: &[GroupElement]) -> Result<OpMatrix> {
        let mut m = value_matrix(src, &tgt.root_probes(), hs)?;
        m.invariant = image_is_fixed(src, tgt, hs, &self.x())?;
        Ok(m)
    }

    /// `eta: V(n) -> V(n+2)`, `f -> f(. eta)`.
    pub fn eta(&self, n: u32) -> Result<Arc<OpMatrix>> {
        self.cached(format!("eta{n}"), || {
            let (s, t) = (self.v(n)?, self.v(n + 2)?);
            self.translate(&s, &t, &[eta(&self.cfg)])
        })
    }

    /// `theta': V(n) -> V(n+1)`, the sum over `K_{n+1} / (K_{n+1} cap K_n)`.
    pub fn theta(&self, n: u32) -> Result<Arc<OpMatrix>> {
        self.cached(format!("theta{n}"), || {
            let (s, t) = (self.v(n)?, self.v(n + 1)?);
            self.translate(&s, &t, &coset_reps_theta(&self.cfg, n))
        })
    }

    /// `theta'` assembled as (translation by `eta`, read at the roots of
    /// `V(n+1)`) plus the `q` central translations.
    pub fn theta_via_eta(&self, n: u32) -> Result<OpMatrix> {
        let (s, t) = (self.v(n)?, self.v(n + 1)?);
        let probes = t.root_probes();
        let e = value_matrix(&s, &probes, &[eta(&self.cfg)])?;
        let tr = value_matrix(&s, &probes, &theta_translations(&self.cfg, n, 1))?;
        Ok(e.add(&tr))
    }

    /// The inclusion of `src` into the fixed space of a smaller group.
    pub fn embed(&self, src: &FixedSpace, tgt: &FixedSpace) -> Result<OpMatrix> {
        self.translate(src, tgt, &[GroupElement::identity(&self.cfg)])
    }

    /// `S` on `V(n)`, landing in the fixed space of the S-ambient group.
    pub fn s_op(&self, n: u32) -> Result<Arc<OpMatrix>> {
        self.cached(format!("S{n}"), || {
            let (s, t) = (self.v(n)?, self.s_ambient(n)?);
            self.translate(&s, &t, &coset_reps_s(&self.cfg))
        })
    }

    /// The partial sum of central translations over `p^{-k-n} / p^{-n}` on
    /// `V(n)`, landing in the fixed space of `K_{n+k} cap K_{n+k+1}`.
    pub fn partial_sum(&self, n: u32, k: u32) -> Result<Arc<OpMatrix>> {
        self.cached(format!("L{n},{k}"), || {
            let (s, t) = (self.v(n)?, self.cap(n + k)?);
            self.translate(&s, &t, &theta_translations(&self.cfg, n, k))
        })
    }

    pub fn mat(&self, m: &OpMatrix, x: &BigRational) -> Matrix {
        m.specialize(x)
    }

    /// `theta'^k` on `V(n)`.
    pub fn theta_pow(&self, n: u32, k: u32, x: &BigRational) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.v(n)?.dim(), self.chi.order());
        for i in 0..k {
            acc = self.theta(n + i)?.specialize(x).mul(&acc);
        }
        Ok(acc)
    }

    /// `eta^j` on `V(n)`.
    pub fn eta_pow(&self, n: u32, j: u32, x: &BigRational) -> Result<Matrix> {
        let mut acc = Matrix::identity(self.v(n)?.dim(), self.chi.order());
        for i in 0..j {
            acc = self.eta(n + 2 * i)?.specialize(x).mul(&acc);
        }
        Ok(acc)
    }
}

fn q4(model: &Model) -> Cyclo {
    Cyclo::from_int(model.chi.order(), model.q().pow(4) as i64)
}

/// One exact statement, evaluated at one specialization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub n: u32,
    pub k: u32,
    pub pass: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, n: u32, k: u32, pass: bool, detail: String) -> Self {
        Self { name: name.into(), n, k, pass, detail }
    }
}

/// `theta'` from coset representatives equals `eta` plus translations;
/// also that both operators land in the target fixed spaces.
pub fn theta_decomposition_check(model: &Model, n: u32, x: &BigRational) -> Result<Check> {
    let a = model.theta(n)?;
    let b = model.theta_via_eta(n)?;
    let e = model.eta(n)?;
    let equal = a.specialize(x) == b.specialize(x) || a.specialize(x).sub(&b.specialize(x)).is_zero();
    let pass = equal && a.invariant && e.invariant;
    Ok(Check::new(
        "theta-decomposition",
        n,
        0,
        pass,
        format!("dims {}->{}, equal {equal}, theta fixed {}, eta fixed {}", a.cols, a.rows, a.invariant, e.invariant),
    ))
}

/// `theta'_{n+2} eta_n = eta_{n+1} theta'_n` on `V(n)`.
pub fn commutation_check(model: &Model, n: u32, x: &BigRational) -> Result<Check> {
    let l = model.theta(n + 2)?.specialize(x).mul(&model.eta(n)?.specialize(x));
    let r = model.eta(n + 1)?.specialize(x).mul(&model.theta(n)?.specialize(x));
    let pass = l.sub(&r).is_zero();
    Ok(Check::new("commutation", n, 0, pass, format!("{}x{} matrices", l.rows, l.cols)))
}

/// `eta` is injective on `V(n)`.
pub fn eta_injective_check(model: &Model, n: u32, x: &BigRational) -> Result<Check> {
    let e = model.eta(n)?;
    let r = e.specialize(x).rank();
    Ok(Check::new("eta-injective", n, 0, r == e.cols && e.invariant, format!("rank {r} of {}", e.cols)))
}

/// `{ v in V(n) : S v = q^4 v } = eta V(n-2)`, with a complement vector
/// as negative control.
pub fn s_eigenspace_check(model: &Model, n: u32, x: &BigRational) -> Result<Vec<Check>> {
    if n < 2.max(model.chi.n_pi() + 1) {
        return Err(Error::Rejected(format!("the S criterion needs n >= max(2, n_pi + 1), got n = {n}")));
    }
    let (v, amb) = (model.v(n)?, model.s_ambient(n)?);
    let s = model.s_op(n)?;
    let e = model.embed(&v, &amb)?;
    let diff = s.specialize(x).sub(&e.specialize(x).scale(&q4(model)));
    let ker = diff.nullspace();
    let img = model.eta(n - 2)?.specialize(x);
    let equal = ker.same_column_space(&img);
    let fixed = s.invariant && e.invariant;
    let emb_rank = e.specialize(x).rank();
    let mut out = vec![Check::new(
        "s-eigenspace",
        n,
        0,
        equal && fixed && emb_rank == v.dim(),
        format!("eigenspace dim {}, image dim {}, S fixed {fixed}, embedding rank {emb_rank}", ker.cols, img.rank()),
    )];
    // Negative control: a standard basis vector outside eta V(n-2).
    let control = (0..v.dim()).find_map(|i| {
        let mut c = Matrix::zeros(v.dim(), 1, img.n);
        c.set(i, 0, Cyclo::one(img.n));
        (!c.column_space_within(&img)).then_some(c)
    });
    out.push(match control {
        Some(c) => {
            let moved = !diff.mul(&c).is_zero();
            Check::new("s-eigenspace-control", n, 0, moved, format!("complement vector moved by S - q^4: {moved}"))
        }
        None => Check::new("s-eigenspace-control", n, 0, false, "eta V(n-2) fills V(n)".into()),
    });
    Ok(out)
}

/// `theta'^{-1}(eta V(n-1)) cap V(n) is inside eta V(n-2)`.
pub fn preimage_check(model: &Model, n: u32, x: &BigRational) -> Result<Check> {
    if n < 2.max(model.chi.n_pi() + 1) {
        return Err(Error::Rejected(format!("needs n >= max(2, n_pi + 1), got n = {n}")));
    }
    let th = model.theta(n)?.specialize(x);
    let e1 = model.eta(n - 1)?.specialize(x);
    let neg = e1.scale(&Cyclo::from_int(e1.n, -1));
    let null = th.hcat(&neg).nullspace();
    let d = th.cols;
    let mut top = Matrix::zeros(d, null.cols, null.n);
    for i in 0..d {
        for j in 0..null.cols {
            top.set(i, j, null.get(i, j).clone());
        }
    }
    let img = model.eta(n - 2)?.specialize(x);
    let pass = top.column_space_within(&img);
    Ok(Check::new("theta-preimage", n, 0, pass, format!("preimage dim {}, eta V(n-2) dim {}", top.rank(), img.rank())))
}

/// The partial translation sum on `V(n)` lies in
/// `theta'^k V(n) + eta V(n+k-2) + eta V(n+k-1)`.
pub fn partial_sum_check(model: &Model, n: u32, k: u32, x: &BigRational) -> Result<Check> {
    let amb = model.cap(n + k)?;
    let l = model.partial_sum(n, k)?;
    let vk = model.v(n + k)?;
    let vk1 = model.v(n + k + 1)?;
    let e = model.embed(&vk, &amb)?;
    let e1 = model.embed(&vk1, &amb)?;
    let mut span = e.specialize(x).mul(&model.theta_pow(n, k, x)?);
    if n + k >= 2 {
        span = span.hcat(&e.specialize(x).mul(&model.eta(n + k - 2)?.specialize(x)));
    }
    if n + k >= 1 {
        span = span.hcat(&e1.specialize(x).mul(&model.eta(n + k - 1)?.specialize(x)));
    }
    let lm = l.specialize(x);
    let within = lm.column_space_within(&span);
    let fixed = l.invariant && e.invariant && e1.invariant;
    Ok(Check::new(
        "partial-sum",
        n,
        k,
        within && fixed,
        format!("image rank {}, span rank {}, fixed {fixed}", lm.rank(), span.rank()),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityReport {
    pub x: String,
    pub checks: Vec<Check>,
}

impl IdentityReport {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn first_failure(&self) -> Option<&Check> {
        self.checks.iter().find(|c| !c.pass)
    }
}

/// Commutation for `n <= n_max`, the S criterion and the preimage
/// containment for `max(2, n_pi+1) <= n <= n_max`, and the partial sums for
/// `k = 1, 2`, `n <= n_max`.
pub fn verify_identities(model: &Model, n_max: u32, x: &BigRational) -> Result<IdentityReport> {
    let mut checks = Vec::new();
    for n in 0..=n_max {
        checks.push(commutation_check(model, n, x)?);
    }
    for n in 2.max(model.chi.n_pi() + 1)..=n_max {
        checks.extend(s_eigenspace_check(model, n, x)?);
        checks.push(preimage_check(model, n, x)?);
    }
    for n in 0..=n_max {
        for k in 1..=2 {
            checks.push(partial_sum_check(model, n, k, x)?);
        }
    }
    Ok(IdentityReport { x: x.to_string(), checks })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionRow {
    pub n: u32,
    pub m: u32,
    pub orbits: usize,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionTable {
    pub character: String,
    pub rows: Vec<DimensionRow>,
    /// First level with a non-zero space, if any in range.
    pub conductor: Option<u32>,
    pub central_conductor: u32,
    pub checks: Vec<Check>,
}

impl DimensionTable {
    pub fn dims(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.dim).collect()
    }

    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn floor_formula(n: u32, c: u32) -> usize {
    if n < c {
        0
    } else {
        ((n - c) / 2 + 1) as usize
    }
}

/// `dim V(n)` for `n` in `range` with the embedded checks: one-dimensional
/// newforms, the floor bound, steps of at most one between `n` and `n+2`,
/// `N >= n_pi`, and the floor equality when `N > n_pi` and `N >= 2`, or for
/// unramified characters.
pub fn dimension_table(model: &Model, range: std::ops::RangeInclusive<u32>) -> Result<DimensionTable> {
    let mut rows = Vec::new();
    for n in range {
        let v = model.v(n)?;
        rows.push(DimensionRow { n, m: v.m, orbits: v.orbit_count(), dim: v.dim() });
    }
    let conductor = rows.iter().find(|r| r.dim > 0).map(|r| r.n);
    let n_pi = model.chi.n_pi();
    let mut checks = Vec::new();
    if let Some(c) = conductor {
        let d = rows.iter().find(|r| r.n == c).unwrap().dim;
        checks.push(Check::new("newform-dimension", c, 0, d == 1, format!("dim V({c}) = {d}")));
        checks.push(Check::new("conductor-bound", c, 0, c >= n_pi, format!("N = {c}, n_pi = {n_pi}")));
        let eq = model.chi.is_unramified() || (c > n_pi && c >= 2);
        for r in &rows {
            let f = floor_formula(r.n, c);
            checks.push(Check::new("floor-bound", r.n, 0, r.dim <= f, format!("{} <= {f}", r.dim)));
            if eq {
                checks.push(Check::new("floor-equality", r.n, 0, r.dim == f, format!("{} = {f}", r.dim)));
            }
        }
    }
    for r in &rows {
        if let Some(r2) = rows.iter().find(|s| s.n == r.n + 2) {
            let ok = r2.dim >= r.dim && r2.dim - r.dim <= 1;
            checks.push(Check::new("step", r.n, 2, ok, format!("{} -> {}", r.dim, r2.dim)));
        }
    }
    if model.chi.is_unramified() {
        for r in &rows {
            checks.push(Check::new("unramified-orbits", r.n, 0, r.orbits == r.dim, format!("{} orbits", r.orbits)));
        }
    }
    Ok(DimensionTable {
        character: model.chi.describe(),
        rows,
        conductor,
        central_conductor: n_pi,
        checks,
    })
}

/// `(N_pi, n_pi)`, searching levels up to `n_max`.
pub fn conductor(model: &Model, n_max: u32) -> Result<(Option<u32>, u32)> {
    for n in 0..=n_max {
        if model.v(n)?.dim() > 0 {
            return Ok((Some(n), model.chi.n_pi()));
        }
    }
    Ok((None, model.chi.n_pi()))
}

/// Coordinates of the newform in `V(N)`, scaled to take the value 1 at the
/// identity when it does not vanish there.
pub fn newform(model: &Model, level: u32, x: &BigRational) -> Result<Matrix> {
    let v = model.v(level)?;
    if v.dim() != 1 {
        return Err(Error::Rejected(format!("V({level}) has dimension {}, not 1", v.dim())));
    }
    let n = model.chi.order();
    let mut c = Matrix::zeros(1, 1, n);
    let one = Probe::of(&GroupElement::identity(&model.cfg));
    let val = match v.eval(&one)? {
        Some((_, k, j)) => {
            let mut s = MonoSum::new(n);
            s.add_term(k, j, 1);
            s.eval(x).inv().expect("non-zero monomial")
        }
        None => Cyclo::one(n),
    };
    c.set(0, 0, val);
    Ok(c)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BasisCertificate {
    pub n: u32,
    pub conductor: u32,
    /// `(i, j)` for each vector `theta'^i eta^j v`.
    pub exponents: Vec<(u32, u32)>,
    pub dim: usize,
    pub rank: usize,
    /// The newform's Whittaker value at 1 is non-zero; `None` if not checked.
    pub gate: Option<bool>,
    pub certified: bool,
    pub dependency: Option<Vec<String>>,
}

/// The vectors `theta'^i eta^j v`, `i + 2j = n - N`, as columns in `V(n)`.
pub fn oldform_vectors(model: &Model, level: u32, n: u32, x: &BigRational) -> Result<(Vec<(u32, u32)>, Matrix)> {
    let v = newform(model, level, x)?;
    let d = n.checked_sub(level).ok_or_else(|| Error::Rejected(format!("n = {n} below conductor {level}")))?;
    let mut ex = Vec::new();
    let mut cols: Option<Matrix> = None;
    for j in 0..=d / 2 {
        let i = d - 2 * j;
        let w = model.theta_pow(level + 2 * j, i, x)?.mul(&model.eta_pow(level, j, x)?).mul(&v);
        ex.push((i, j));
        cols = Some(match cols {
            None => w,
            Some(c) => c.hcat(&w),
        });
    }
    Ok((ex, cols.unwrap()))
}

/// Rank certificate for the oldform basis at level `n`. `gate` is the
/// non-vanishing of the newform's Whittaker value at 1; without it the
/// certificate is not claimed.
pub fn basis_certificate(
    model: &Model,
    level: u32,
    n: u32,
    gate: Option<bool>,
    x: &BigRational,
) -> Result<BasisCertificate> {
    let (exponents, cols) = oldform_vectors(model, level, n, x)?;
    let dim = model.v(n)?.dim();
    let rank = cols.rank();
    let dependency = (rank < cols.cols).then(|| {
        let ns = cols.nullspace();
        ns.column(0).iter().map(|c| c.to_string()).collect()
    });
    let certified = gate == Some(true) && rank == dim && cols.cols == dim;
    Ok(BasisCertificate { n, conductor: level, exponents, dim, rank, gate, certified, dependency })
}
