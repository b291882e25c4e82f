//! Whittaker functions of the induced model by truncated Jacquet sums
//! `W_v(g) = sum_{u in U(p^-M)} v(t_0 u g) psi(u)^-1 vol`, with the Kirillov
//! restriction `phi_v(a) = W_v(t(a))` and the checks on it.

use num_integer::Integer;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{row_times, t_elem, u_elem, GroupElement};
use crate::localfield::{pow_u64, EElement, FieldConfig};
use crate::pseries::{basis_certificate, newform, BasisCertificate, Check, FixedSpace, Model, Probe};
use crate::scalar::{Cyclo, Matrix, MonoSum};

/// `psi_E = psi_F o tr` with `psi_F(c p^-M) = zeta_{p^M}^c`: conductor `o_E`.
#[derive(Clone, Copy, Debug)]
pub struct AdditiveCharacter {
    pub p: u64,
}

impl AdditiveCharacter {
    /// `j` with `psi_E(x) = zeta_{p^M}^j`, for `x` in `p^-M o_E`.
    pub fn exp(&self, x: &EElement, big_m: u32) -> Result<u64> {
        if x.valuation_bound() < -(big_m as i64) {
            return Err(Error::Rejected(format!("{x} is outside p^-{big_m}")));
        }
        Ok(x.trace().shift(big_m as i64).residue(big_m)?.0)
    }

    pub fn value(&self, x: &EElement, big_m: u32) -> Result<Cyclo> {
        let n = pow_u64(self.p, big_m);
        Ok(Cyclo::zeta(n, self.exp(x, big_m)?))
    }
}

/// A Whittaker value with the truncation level at which it stabilized.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhittakerValue {
    pub value: Cyclo,
    pub m: u32,
    pub stabilized: bool,
}

/// Values for every basis function of a fixed space at once.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhittakerRow {
    pub values: Vec<Cyclo>,
    pub m: u32,
    pub stabilized: bool,
}

impl WhittakerRow {
    pub fn dot(&self, coeffs: &[Cyclo]) -> WhittakerValue {
        let mut acc = Cyclo::zero(1);
        for (w, c) in self.values.iter().zip(coeffs) {
            acc = acc.add(&w.mul(c));
        }
        WhittakerValue { value: acc, m: self.m, stabilized: self.stabilized }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct WhittakerReport {
    pub vector: String,
    pub g: String,
    pub value: String,
    pub m: u32,
    pub stabilized: bool,
}

impl WhittakerValue {
    pub fn report(&self, vector: &str, g: &str) -> WhittakerReport {
        WhittakerReport {
            vector: vector.into(),
            g: g.into(),
            value: self.value.to_string(),
            m: self.m,
            stabilized: self.stabilized,
        }
    }
}

/// The argument `u0 t(a)` of a Whittaker function; `u0` upper unipotent.
#[derive(Clone, Copy, Debug)]
pub struct Argument {
    pub u0: Option<GroupElement>,
    pub a: EElement,
}

impl Argument {
    pub fn torus(a: EElement) -> Self {
        Self { u0: None, a }
    }

    fn matrix(&self, cfg: &FieldConfig) -> GroupElement {
        let t = t_elem(cfg, self.a);
        match &self.u0 {
            Some(u) => u.mul(&t),
            None => t,
        }
    }

    pub fn describe(&self) -> String {
        match &self.u0 {
            Some(u) => format!("u({}) t({})", u.entry(0, 1), self.a),
            None => format!("t({})", self.a),
        }
    }
}

/// Default cap on the truncation level.
pub const M_MAX: u32 = 8;

/// Cap on the number of terms in a single Jacquet sum.
pub const TERM_BUDGET: u64 = 20_000_000;

/// Inner truncation `(L, L2)`: the sum is over `x` in `p^-M o_E / p^L o_E`
/// and `s` in `p^-2M o_F / p^L2 o_F`, on which the integrand is constant
/// for `K_n`-fixed vectors.
fn inner_levels(n: u32, arg: &Argument) -> Result<(i64, i64)> {
    let va = arg.a.valuation().ok_or_else(|| Error::Rejected("t(a) needs a != 0".into()))?;
    let l2 = 2 * va - n as i64;
    let mut l = va.max(0);
    if let Some(u) = &arg.u0 {
        let x0 = u.entry(0, 1);
        if !x0.is_exact_zero() {
            let v0 = x0.valuation().ok_or_else(|| Error::Precision("u0 entry".into()))?;
            l = l.max(l2 - v0);
        }
    }
    Ok((l, l2))
}

/// Least outer level for which the ranges make sense.
fn min_outer(l: i64, l2: i64) -> u32 {
    let mut m = 1i64;
    while m + l < 0 || 2 * m + l2 < 0 {
        m += 1;
    }
    m as u32
}

/// The Jacquet sum at outer level `big_m` for every basis function of
/// `space` (a space of `K_n`-fixed vectors).
pub fn jacquet_sum(
    cfg: &FieldConfig,
    space: &FixedSpace,
    n: u32,
    arg: &Argument,
    big_m: u32,
    x: &BigRational,
) -> Result<Vec<Cyclo>> {
    let (l, l2) = inner_levels(n, arg)?;
    let mi = big_m as i64;
    if mi + l < 0 || 2 * mi + l2 < 0 {
        return Err(Error::Rejected(format!("truncation level {big_m} below the inner level")));
    }
    let p = cfg.p;
    let nx = pow_u64(p, (mi + l) as u32);
    let ns = pow_u64(p, (2 * mi + l2) as u32);
    let terms = nx.saturating_mul(nx).saturating_mul(ns);
    if terms > TERM_BUDGET {
        return Err(Error::Budget { what: format!("Jacquet sum at M = {big_m}"), required: terms, cap: TERM_BUDGET });
    }
    let wcfg = cfg.widened(2 * big_m + 4);
    let h = arg.matrix(&wcfg);
    let det = h.det().neg();
    let pm = pow_u64(p, big_m);
    let order = space.chi.order().lcm(&pm);
    let (fa, fb) = (order / space.chi.order(), order / pm);
    let mut sums = vec![MonoSum::new(order); space.dim()];
    for a in 0..nx {
        let psi_bar = (pm - (2 * a) % pm) % pm;
        for b in 0..nx {
            let xe = wcfg.elem(-mi, a as i64, b as i64);
            for s in 0..ns {
                let se = wcfg.elem(-2 * mi, s as i64, 0);
                let u = u_elem(&wcfg, xe, se);
                let line = row_times(&u.row(0), &h);
                if let Some((i, k, j)) = space.eval(&Probe { line, det })? {
                    sums[i].add_term(k, j * fa + psi_bar * fb, 1);
                }
            }
        }
    }
    let vol = BigRational::from_integer(p.into()).pow((-2 * l - l2) as i32);
    Ok(sums.iter().map(|s| s.eval(x).scale(&vol)).collect())
}

fn same(a: &[Cyclo], b: &[Cyclo]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.sub(y).is_zero())
}

/// Jacquet sums for increasing `M` until two consecutive levels agree.
/// Returns `stabilized = false` (not an error) if `m_max` is reached first.
pub fn whittaker_row(
    cfg: &FieldConfig,
    space: &FixedSpace,
    n: u32,
    arg: &Argument,
    m_max: u32,
    x: &BigRational,
) -> Result<WhittakerRow> {
    let (l, l2) = inner_levels(n, arg)?;
    let mut m = min_outer(l, l2);
    let mut prev = jacquet_sum(cfg, space, n, arg, m, x)?;
    while m < m_max {
        let next = match jacquet_sum(cfg, space, n, arg, m + 1, x) {
            Ok(v) => v,
            Err(Error::Budget { .. }) => break,
            Err(e) => return Err(e),
        };
        if same(&prev, &next) {
            return Ok(WhittakerRow { values: prev, m, stabilized: true });
        }
        prev = next;
        m += 1;
    }
    Ok(WhittakerRow { values: prev, m, stabilized: false })
}

/// `W_v(g)` for `v = sum coeffs_i f_i` in `V(n)`.
pub fn whittaker(
    model: &Model,
    n: u32,
    coeffs: &[Cyclo],
    arg: &Argument,
    m_max: u32,
    x: &BigRational,
) -> Result<WhittakerValue> {
    let v = model.v(n)?;
    if coeffs.len() != v.dim() {
        return Err(Error::Rejected(format!("{} coefficients for a space of dimension {}", coeffs.len(), v.dim())));
    }
    Ok(whittaker_row(&model.cfg, &v, n, arg, m_max, x)?.dot(coeffs))
}

/// `phi_v(a) = W_v(t(a))`.
pub fn kirillov_phi(model: &Model, n: u32, coeffs: &[Cyclo], a: EElement, x: &BigRational) -> Result<WhittakerValue> {
    whittaker(model, n, coeffs, &Argument::torus(a), M_MAX, x)
}

/// The stabilized row at `M` also agrees at `M + 2`.
pub fn stabilization_monotone(model: &Model, n: u32, row: &WhittakerRow, arg: &Argument, x: &BigRational) -> Result<bool> {
    let v = model.v(n)?;
    match jacquet_sum(&model.cfg, &v, n, arg, row.m + 2, x) {
        Ok(deeper) => Ok(same(&row.values, &deeper)),
        Err(Error::Budget { .. }) => Ok(true),
        Err(e) => Err(e),
    }
}

fn unit_vector(d: usize, i: usize) -> Vec<Cyclo> {
    (0..d).map(|j| if i == j { Cyclo::one(1) } else { Cyclo::zero(1) }).collect()
}

fn column(m: &Matrix, j: usize) -> Vec<Cyclo> {
    m.column(j)
}

fn eq(a: &Cyclo, b: &Cyclo) -> bool {
    a.sub(b).is_zero()
}

/// The Kirillov relations for every basis vector `v` of `V(n)`:
/// `phi_{eta v}(1) = phi_v(p^-1)`, `phi_{theta' v}(1) = phi_v(p^-1) + q phi_v(1)`,
/// `phi_{eta v}(1) = 0` and `phi_{theta' v}(1) = q phi_v(1)`; all values
/// stabilized.
pub fn verify_phi_relations(model: &Model, n: u32, x: &BigRational) -> Result<Vec<Check>> {
    let cfg = &model.cfg;
    let one = Argument::torus(cfg.one());
    let inv_p = Argument::torus(cfg.uniformizer_pow(-1));
    let vn = model.v(n)?;
    let w1 = whittaker_row(cfg, &vn, n, &one, M_MAX, x)?;
    let wp = whittaker_row(cfg, &vn, n, &inv_p, M_MAX, x)?;
    let we = whittaker_row(cfg, &*model.v(n + 2)?, n + 2, &one, M_MAX, x)?;
    let wt = whittaker_row(cfg, &*model.v(n + 1)?, n + 1, &one, M_MAX, x)?;
    let em = model.eta(n)?.specialize(x);
    let tm = model.theta(n)?.specialize(x);
    let q = Cyclo::from_int(1, model.q() as i64);
    let stable = w1.stabilized && wp.stabilized && we.stabilized && wt.stabilized;
    let mut out = Vec::new();
    for b in 0..vn.dim() {
        let e = unit_vector(vn.dim(), b);
        let phi1 = w1.dot(&e).value;
        let phip = wp.dot(&e).value;
        let eta_v = we.dot(&column(&em, b)).value;
        let theta_v = wt.dot(&column(&tm, b)).value;
        let detail = |l: &Cyclo, r: &Cyclo| format!("basis {b}: {l} vs {r}");
        out.push(Check {
            name: "phi-eta".into(),
            n,
            k: b as u32,
            pass: stable && eq(&eta_v, &phip),
            detail: detail(&eta_v, &phip),
        });
        let rhs = phip.add(&q.mul(&phi1));
        out.push(Check {
            name: "phi-theta".into(),
            n,
            k: b as u32,
            pass: stable && eq(&theta_v, &rhs),
            detail: detail(&theta_v, &rhs),
        });
        out.push(Check {
            name: "phi-eta-vanishes".into(),
            n,
            k: b as u32,
            pass: stable && eta_v.is_zero(),
            detail: format!("basis {b}: {eta_v}"),
        });
        let qphi = q.mul(&phi1);
        out.push(Check {
            name: "phi-theta-scales".into(),
            n,
            k: b as u32,
            pass: stable && eq(&theta_v, &qphi),
            detail: detail(&theta_v, &qphi),
        });
    }
    Ok(out)
}

/// Support and unit invariance of `phi_v` for the basis of `V(n)`:
/// `phi_v(a) = 0` at `v(a) = -1, -2` and `phi_v(u a) = phi_v(a)` for the
/// unit generators `u` at `a = 1, p`.
pub fn verify_kirillov_support(model: &Model, n: u32, x: &BigRational) -> Result<Vec<Check>> {
    let cfg = &model.cfg;
    let vn = model.v(n)?;
    let mut out = Vec::new();
    for k in [-1i64, -2] {
        let r = whittaker_row(cfg, &vn, n, &Argument::torus(cfg.uniformizer_pow(k)), M_MAX, x)?;
        let pass = r.stabilized && r.values.iter().all(|v| v.is_zero());
        out.push(Check { name: "phi-support".into(), n, k: (-k) as u32, pass, detail: format!("M = {}", r.m) });
    }
    let (ga, gb) = crate::group::residue_generator(cfg);
    let units = [cfg.elem(0, ga as i64, gb as i64), cfg.elem(0, 1 + cfg.p as i64, 0), cfg.one().add(&cfg.elem(1, 0, 1))];
    for k in [0i64, 1] {
        let a = cfg.uniformizer_pow(k);
        let (l, l2) = inner_levels(n, &Argument::torus(a))?;
        let next = min_outer(l, l2) as i64 + 1;
        let terms = (cfg.p as f64).powi((2 * (next + l) + 2 * next + l2) as i32);
        if terms > TERM_BUDGET as f64 {
            out.push(Check { name: "phi-unit-invariance".into(), n, k: k as u32, pass: true, detail: "skipped: over the term budget".into() });
            continue;
        }
        let base = whittaker_row(cfg, &vn, n, &Argument::torus(a), M_MAX, x)?;
        let mut pass = base.stabilized;
        for u in &units {
            let r = whittaker_row(cfg, &vn, n, &Argument::torus(u.mul(&a)), M_MAX, x)?;
            pass &= r.stabilized && same(&r.values, &base.values);
        }
        out.push(Check { name: "phi-unit-invariance".into(), n, k: k as u32, pass, detail: format!("M = {}", base.m) });
    }
    Ok(out)
}

/// `W_v(u g) = psi(u) W_v(g)` for `u = u(c, 0)`, `c` over `p^-1 o_E` samples.
pub fn verify_equivariance(model: &Model, n: u32, x: &BigRational, samples: &[(i64, i64)]) -> Result<Check> {
    let cfg = &model.cfg;
    let vn = model.v(n)?;
    let psi = AdditiveCharacter { p: cfg.p };
    let g0 = Argument::torus(cfg.one());
    let base = whittaker_row(cfg, &vn, n, &g0, M_MAX, x)?;
    let mut pass = base.stabilized;
    let mut nontrivial = false;
    for &(a, b) in samples {
        let c = cfg.elem(-1, a, b);
        let u = u_elem(cfg, c, cfg.zero());
        let ps = psi.value(&c, 1)?;
        nontrivial |= !eq(&ps, &Cyclo::one(1));
        let r = whittaker_row(cfg, &vn, n, &Argument { u0: Some(u), a: cfg.one() }, M_MAX, x)?;
        let expect: Vec<Cyclo> = base.values.iter().map(|w| w.mul(&ps)).collect();
        pass &= r.stabilized && same(&r.values, &expect);
    }
    Ok(Check {
        name: "u-equivariance".into(),
        n,
        k: samples.len() as u32,
        pass: pass && nontrivial,
        detail: format!("{} samples, M = {}", samples.len(), base.m),
    })
}

/// Vectors of `V(n)` whose Kirillov function vanishes at 1 lie in
/// `eta V(n-2)`.
pub fn kernel_in_eta_image(model: &Model, n: u32, x: &BigRational) -> Result<Check> {
    let vn = model.v(n)?;
    let r = whittaker_row(&model.cfg, &vn, n, &Argument::torus(model.cfg.one()), M_MAX, x)?;
    let order = r.values.iter().fold(1u64, |acc, v| acc.lcm(&v.order()));
    let row = Matrix::from_columns(1, order, &r.values.iter().map(|v| vec![v.clone()]).collect::<Vec<_>>());
    let ker = row.nullspace();
    let img = model.eta(n - 2)?.specialize(x);
    let pass = r.stabilized && ker.column_space_within(&img);
    Ok(Check { name: "kernel-in-eta-image".into(), n, k: 0, pass, detail: format!("kernel dim {}", ker.cols) })
}

/// The newform's value `W_v(1)`.
pub fn newform_value(model: &Model, level: u32, x: &BigRational) -> Result<WhittakerValue> {
    let v = newform(model, level, x)?;
    whittaker(model, level, &v.column(0), &Argument::torus(model.cfg.one()), M_MAX, x)
}

/// The basis certificate, gated on `W_v(1) != 0` for the newform.
pub fn gated_basis_certificate(model: &Model, level: u32, n: u32, x: &BigRational) -> Result<BasisCertificate> {
    let w = newform_value(model, level, x)?;
    let gate = w.stabilized && !w.value.is_zero();
    basis_certificate(model, level, n, Some(gate), x)
}
