//! Finite-precision arithmetic in `F = Q_p` and in the unramified quadratic
//! extension `E = F[sqrt(eps)]`.
//!
//! An [`EElement`] is `(a + b*sqrt(eps)) * p^val` with `(a, b)` known modulo
//! `p^window`. Results never claim more digits than their inputs justify.

use std::fmt;

use crate::error::{Error, Result};

/// Largest window for which `p^window` fits a `u64` with headroom for
/// `u128` products.
pub fn max_window(p: u64) -> u32 {
    let mut w = 0u32;
    let mut acc: u128 = 1;
    while acc * (p as u128) < (1u128 << 63) {
        acc *= p as u128;
        w += 1;
    }
    w
}

pub fn pow_u64(p: u64, k: u32) -> u64 {
    p.checked_pow(k).expect("p^k overflows u64")
}

/// p-adic valuation of a non-zero integer.
pub fn vp(mut n: u64, p: u64) -> u32 {
    debug_assert!(n != 0);
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut t, mut new_t) = (0i128, 1i128);
    let (mut r, mut new_r) = (m as i128, (a % m) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    if r != 1 {
        return None;
    }
    Some(t.rem_euclid(m as i128) as u64)
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = ((acc as u128 * base as u128) % m as u128) as u64;
        }
        base = ((base as u128 * base as u128) % m as u128) as u64;
        exp >>= 1;
    }
    acc
}

/// Smallest positive quadratic non-residue modulo an odd prime.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p).find(|&e| pow_mod(e, (p - 1) / 2, p) == p - 1).expect("odd prime has a non-residue")
}

/// Solves `N(y) = u` for a unit `u` of F: a residue solution is found by
/// search, then scaled by the square root of the remaining 1-unit.
pub fn solve_norm(cfg: &FieldConfig, u: &EElement) -> Result<EElement> {
    if u.valuation() != Some(0) || !u.is_in_f() {
        return Err(Error::Rejected(format!("{u} is not a unit of F")));
    }
    let p = cfg.p;
    let w = u.window();
    let (ua, _) = u.residue(1)?;
    let mut y0 = None;
    'search: for a in 0..p {
        for b in 0..p {
            let n = (a * a + p * p - (cfg.epsilon * b * b) % p) % p;
            if n == ua {
                y0 = Some(EElement::from_parts(cfg.ctx(), 0, a as i64, b as i64, w));
                break 'search;
            }
        }
    }
    let y0 = y0.ok_or_else(|| Error::Rejected("no residue solution".into()))?;
    let ratio = u.div(&y0.norm())?;
    // Newton iteration for sqrt(ratio), ratio = 1 mod p.
    let two_inv = EElement::from_int(cfg.ctx(), 2, w).inv()?;
    let mut s = EElement::from_int(cfg.ctx(), 1, w);
    for _ in 0..(w as usize + 2) {
        s = s.add(&ratio.div(&s)?).mul(&two_inv);
    }
    Ok(y0.mul(&s))
}

/// Residue characteristic, the non-square `eps`, and the working window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FieldConfig {
    pub p: u64,
    pub epsilon: u64,
    pub default_window: u32,
}

impl FieldConfig {
    pub fn new(p: u64, epsilon: Option<u64>, default_window: u32) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::Config(format!("p = {p} must be an odd prime")));
        }
        let epsilon = epsilon.unwrap_or_else(|| smallest_nonresidue(p));
        if epsilon % p == 0 || pow_mod(epsilon, (p - 1) / 2, p) != p - 1 {
            return Err(Error::Config(format!("epsilon = {epsilon} is a square mod {p}")));
        }
        if default_window == 0 || default_window > max_window(p) {
            return Err(Error::Config(format!(
                "window {default_window} outside 1..={} for p = {p}",
                max_window(p)
            )));
        }
        Ok(Self { p, epsilon: epsilon % p, default_window })
    }

    /// `p` with the smallest non-residue and the given window.
    pub fn with_window(p: u64, window: u32) -> Result<Self> {
        Self::new(p, None, window)
    }

    pub fn q(&self) -> u64 {
        self.p
    }

    pub fn ctx(&self) -> Ctx {
        Ctx { p: self.p, eps: self.epsilon }
    }

    /// Same field, window widened by `extra` digits (capped at the maximum).
    pub fn widened(&self, extra: u32) -> Self {
        Self { default_window: (self.default_window + extra).min(max_window(self.p)), ..*self }
    }

    pub fn int(&self, n: i64) -> EElement {
        EElement::from_int(self.ctx(), n, self.default_window)
    }

    /// `a + b*sqrt(eps)` for integers a, b, times `p^val`.
    pub fn elem(&self, val: i64, a: i64, b: i64) -> EElement {
        EElement::from_parts(self.ctx(), val, a, b, self.default_window)
    }

    pub fn sqrt_eps(&self) -> EElement {
        self.elem(0, 0, 1)
    }

    pub fn uniformizer_pow(&self, k: i64) -> EElement {
        self.elem(k, 1, 0)
    }

    /// The rational number `num/den` as an element of F.
    pub fn rational(&self, num: i64, den: i64) -> Result<EElement> {
        self.int(num).div(&self.int(den))
    }

    pub fn zero(&self) -> EElement {
        EElement::zero(self.ctx())
    }

    pub fn one(&self) -> EElement {
        self.int(1)
    }
}

/// The arithmetic context carried by every element: prime and non-square.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Ctx {
    pub p: u64,
    pub eps: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    /// Exact zero, valuation +infinity.
    Zero,
    /// Known to vanish modulo `p^val`, nothing more.
    ZeroAt,
    Unit,
}

/// Finite-precision element of E. Immutable; all operations return new
/// values.
#[derive(Clone, Copy, Debug)]
pub struct EElement {
    ctx: Ctx,
    kind: Kind,
    val: i64,
    a: u64,
    b: u64,
    window: u32,
}

impl EElement {
    pub fn zero(ctx: Ctx) -> Self {
        Self { ctx, kind: Kind::Zero, val: 0, a: 0, b: 0, window: 0 }
    }

    /// An element known only to be divisible by `p^abs_prec`.
    pub fn zero_at(ctx: Ctx, abs_prec: i64) -> Self {
        Self { ctx, kind: Kind::ZeroAt, val: abs_prec, a: 0, b: 0, window: 0 }
    }

    pub fn from_int(ctx: Ctx, n: i64, window: u32) -> Self {
        Self::from_parts(ctx, 0, n, 0, window)
    }

    /// `(a + b*sqrt(eps)) * p^val`, with `a, b` given modulo `p^window`.
    pub fn from_parts(ctx: Ctx, val: i64, a: i64, b: i64, window: u32) -> Self {
        if a == 0 && b == 0 {
            return Self::zero(ctx);
        }
        // The integers are exact: strip common factors of p before reducing.
        let (mut a, mut b, mut val) = (a as i128, b as i128, val);
        let p = ctx.p as i128;
        while a % p == 0 && b % p == 0 {
            a /= p;
            b /= p;
            val += 1;
        }
        let modulus = pow_u64(ctx.p, window) as i128;
        let a = a.rem_euclid(modulus) as u64;
        let b = b.rem_euclid(modulus) as u64;
        Self::normalize(ctx, val, a, b, window)
    }

    /// Builds from residues modulo `p^window`, shifting out common factors
    /// of p (which consumes window digits).
    pub fn from_residues(ctx: Ctx, val: i64, a: u64, b: u64, window: u32) -> Self {
        Self::normalize(ctx, val, a, b, window)
    }

    fn normalize(ctx: Ctx, val: i64, a: u64, b: u64, window: u32) -> Self {
        let p = ctx.p;
        let modulus = pow_u64(p, window);
        let (mut a, mut b) = (a % modulus, b % modulus);
        if a == 0 && b == 0 {
            return Self::zero_at(ctx, val + window as i64);
        }
        let k = match (a, b) {
            (0, b) => vp(b, p),
            (a, 0) => vp(a, p),
            (a, b) => vp(a, p).min(vp(b, p)),
        };
        let d = pow_u64(p, k);
        a /= d;
        b /= d;
        Self { ctx, kind: Kind::Unit, val: val + k as i64, a, b, window: window - k }
    }

    pub fn ctx(&self) -> Ctx {
        self.ctx
    }

    pub fn is_exact_zero(&self) -> bool {
        self.kind == Kind::Zero
    }

    /// True when every known digit vanishes (exact zero included).
    pub fn is_zero(&self) -> bool {
        self.kind != Kind::Unit
    }

    /// Valuation of a non-zero element; `None` for zero at any precision.
    pub fn valuation(&self) -> Option<i64> {
        (self.kind == Kind::Unit).then_some(self.val)
    }

    /// Lower bound on the valuation; `i64::MAX` for exact zero.
    pub fn valuation_bound(&self) -> i64 {
        match self.kind {
            Kind::Zero => i64::MAX,
            _ => self.val,
        }
    }

    /// The element is known modulo `p^abs_precision()`.
    pub fn abs_precision(&self) -> i64 {
        match self.kind {
            Kind::Zero => i64::MAX,
            Kind::ZeroAt => self.val,
            Kind::Unit => self.val + self.window as i64,
        }
    }

    pub fn window(&self) -> u32 {
        match self.kind {
            Kind::Zero => u32::MAX,
            _ => self.window,
        }
    }

    /// Normalized mantissa `(a, b)` modulo `p^window`.
    pub fn mantissa(&self) -> (u64, u64) {
        (self.a, self.b)
    }

    pub fn is_integral(&self) -> bool {
        self.valuation_bound() >= 0
    }

    /// Rational component (b = 0) up to the known precision.
    pub fn is_in_f(&self) -> bool {
        self.kind != Kind::Unit || self.b == 0
    }

    /// Mantissa rescaled to `p^at`: `(a, b)` residues with value
    /// `(a + b*sqrt(eps)) * p^at` modulo `p^(abs_prec)`, for `at <= val`.
    fn shifted(&self, at: i64, abs_prec: i64) -> (u64, u64) {
        if self.kind != Kind::Unit {
            return (0, 0);
        }
        let digits = (abs_prec - at) as u32;
        let modulus = pow_u64(self.ctx.p, digits) as u128;
        let s = pow_u64(self.ctx.p, (self.val - at) as u32) as u128;
        (((self.a as u128 * s) % modulus) as u64, ((self.b as u128 * s) % modulus) as u64)
    }

    /// Residues `(a, b)` with `self = a + b*sqrt(eps) mod p^digits`; requires
    /// an integral element known to at least `digits` digits.
    pub fn residue(&self, digits: u32) -> Result<(u64, u64)> {
        match self.kind {
            Kind::Zero => Ok((0, 0)),
            _ if self.abs_precision() < digits as i64 => Err(Error::Precision(format!(
                "need {digits} digits, element known to {}",
                self.abs_precision()
            ))),
            Kind::ZeroAt => Ok((0, 0)),
            Kind::Unit if self.val < 0 => {
                Err(Error::Rejected(format!("element of valuation {} is not integral", self.val)))
            }
            Kind::Unit if self.val >= digits as i64 => Ok((0, 0)),
            Kind::Unit => Ok(self.shifted(0, digits as i64)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        if self.is_exact_zero() {
            return *other;
        }
        if other.is_exact_zero() {
            return *self;
        }
        let abs = self.abs_precision().min(other.abs_precision());
        let at = self.valuation_bound().min(other.valuation_bound());
        if abs <= at {
            return Self::zero_at(self.ctx, abs);
        }
        let (a1, b1) = self.shifted(at, abs);
        let (a2, b2) = other.shifted(at, abs);
        let modulus = pow_u64(self.ctx.p, (abs - at) as u32);
        let a = ((a1 as u128 + a2 as u128) % modulus as u128) as u64;
        let b = ((b1 as u128 + b2 as u128) % modulus as u128) as u64;
        Self::normalize(self.ctx, at, a, b, (abs - at) as u32)
    }

    pub fn neg(&self) -> Self {
        if self.kind != Kind::Unit {
            return *self;
        }
        let modulus = pow_u64(self.ctx.p, self.window);
        let a = (modulus - self.a) % modulus;
        let b = (modulus - self.b) % modulus;
        Self { a, b, ..*self }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.ctx, other.ctx);
        match (self.kind, other.kind) {
            (Kind::Zero, _) | (_, Kind::Zero) => Self::zero(self.ctx),
            (Kind::ZeroAt, Kind::ZeroAt) => Self::zero_at(self.ctx, self.val + other.val),
            (Kind::ZeroAt, Kind::Unit) => Self::zero_at(self.ctx, self.val + other.val),
            (Kind::Unit, Kind::ZeroAt) => Self::zero_at(self.ctx, self.val + other.val),
            (Kind::Unit, Kind::Unit) => {
                let w = self.window.min(other.window);
                let m = pow_u64(self.ctx.p, w) as u128;
                let (a1, b1) = (self.a as u128 % m, self.b as u128 % m);
                let (a2, b2) = (other.a as u128 % m, other.b as u128 % m);
                let eps = self.ctx.eps as u128;
                let a = (a1 * a2 % m + (b1 * b2 % m) * eps % m) % m;
                let b = (a1 * b2 % m + b1 * a2 % m) % m;
                Self::normalize(self.ctx, self.val + other.val, a as u64, b as u64, w)
            }
        }
    }

    /// Multiplicative inverse; fails on anything indistinguishable from zero.
    pub fn inv(&self) -> Result<Self> {
        match self.kind {
            Kind::Zero => Err(Error::Rejected("inverse of exact zero".into())),
            Kind::ZeroAt => Err(Error::Precision(format!(
                "inverse of an element that vanishes to precision {}",
                self.val
            ))),
            Kind::Unit => {
                let m = pow_u64(self.ctx.p, self.window);
                let mm = m as u128;
                let (a, b) = (self.a as u128, self.b as u128);
                let nrm = (a * a % mm + mm - (b * b % mm) * self.ctx.eps as u128 % mm) % mm;
                let ninv = inv_mod(nrm as u64, m)
                    .ok_or_else(|| Error::Precision("norm of mantissa not a unit".into()))?
                    as u128;
                let ia = a * ninv % mm;
                let ib = (mm - b % mm) % mm * ninv % mm;
                Ok(Self {
                    ctx: self.ctx,
                    kind: Kind::Unit,
                    val: -self.val,
                    a: ia as u64,
                    b: ib as u64,
                    window: self.window,
                })
            }
        }
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inv()?))
    }

    /// Galois conjugate `a - b*sqrt(eps)`.
    pub fn conj(&self) -> Self {
        if self.kind != Kind::Unit {
            return *self;
        }
        let modulus = pow_u64(self.ctx.p, self.window);
        Self { b: (modulus - self.b) % modulus, ..*self }
    }

    pub fn norm(&self) -> Self {
        self.mul(&self.conj())
    }

    pub fn trace(&self) -> Self {
        self.add(&self.conj())
    }

    /// `(conj(x), x*conj(x), x + conj(x))`.
    pub fn conj_norm_trace(&self) -> (Self, Self, Self) {
        (self.conj(), self.norm(), self.trace())
    }

    /// `-conj(z)/z`, an element of the norm-one group.
    pub fn norm_one_from_unit(&self) -> Result<Self> {
        self.conj().neg().div(self)
    }

    /// Multiply by `p^k` (exact shift, no loss of digits).
    pub fn shift(&self, k: i64) -> Self {
        match self.kind {
            Kind::Zero => *self,
            _ => Self { val: self.val + k, ..*self },
        }
    }

    /// Drop digits so the element is known only modulo `p^abs_prec`.
    pub fn truncate(&self, abs_prec: i64) -> Self {
        if abs_prec >= self.abs_precision() {
            return *self;
        }
        match self.kind {
            Kind::Unit if abs_prec > self.val => {
                let w = (abs_prec - self.val) as u32;
                let m = pow_u64(self.ctx.p, w);
                Self { a: self.a % m, b: self.b % m, window: w, ..*self }
            }
            _ => Self::zero_at(self.ctx, abs_prec),
        }
    }

    /// Equality up to the precision both sides justify.
    pub fn eq_within(&self, other: &Self) -> bool {
        self.sub(other).is_zero()
    }

    /// Rational integer `x` read off an element of `Z_p` known to
    /// `digits` digits, in `[0, p^digits)`. Used by canonical encodings.
    pub fn digits_pair(&self, digits: u32) -> Result<(u64, u64)> {
        self.residue(digits)
    }
}

impl PartialEq for EElement {
    fn eq(&self, other: &Self) -> bool {
        self.eq_within(other)
    }
}

impl fmt::Display for EElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            Kind::Zero => write!(f, "0"),
            Kind::ZeroAt => write!(f, "O(p^{})", self.val),
            Kind::Unit => write!(f, "{}:{}+{}*s", self.val, self.a, self.b),
        }
    }
}

/// Arithmetic in the finite ring `o_E / p^m`, elements as residue pairs.
/// Used on hot paths where every quantity is integral.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ResidueRing {
    pub p: u64,
    pub m: u32,
    pub modulus: u64,
    pub eps: u64,
}

pub type Res = (u64, u64);

impl ResidueRing {
    pub fn new(ctx: Ctx, m: u32) -> Self {
        Self { p: ctx.p, m, modulus: pow_u64(ctx.p, m), eps: ctx.eps }
    }

    #[inline]
    pub fn add(&self, x: Res, y: Res) -> Res {
        ((x.0 + y.0) % self.modulus, (x.1 + y.1) % self.modulus)
    }

    #[inline]
    pub fn neg(&self, x: Res) -> Res {
        ((self.modulus - x.0) % self.modulus, (self.modulus - x.1) % self.modulus)
    }

    #[inline]
    pub fn sub(&self, x: Res, y: Res) -> Res {
        self.add(x, self.neg(y))
    }

    #[inline]
    pub fn mul(&self, x: Res, y: Res) -> Res {
        if self.modulus < (1 << 28) {
            let m = self.modulus;
            let a = (x.0 * y.0 + (x.1 * y.1 % m) * self.eps) % m;
            let b = (x.0 * y.1 + x.1 * y.0) % m;
            return (a, b);
        }
        let m = self.modulus as u128;
        let (a1, b1, a2, b2) = (x.0 as u128, x.1 as u128, y.0 as u128, y.1 as u128);
        let a = (a1 * a2 + (b1 * b2 % m) * self.eps as u128) % m;
        let b = (a1 * b2 + b1 * a2) % m;
        (a as u64, b as u64)
    }

    #[inline]
    pub fn conj(&self, x: Res) -> Res {
        (x.0, (self.modulus - x.1) % self.modulus)
    }

    #[inline]
    pub fn is_unit(&self, x: Res) -> bool {
        x.0 % self.p != 0 || x.1 % self.p != 0
    }

    pub fn inv(&self, x: Res) -> Option<Res> {
        let m = self.modulus as u128;
        let (a, b) = (x.0 as u128, x.1 as u128);
        let nrm = (a * a % m + m - (b * b % m) * self.eps as u128 % m) % m;
        let ninv = inv_mod(nrm as u64, self.modulus)? as u128;
        Some(((a * ninv % m) as u64, ((m - b) % m * ninv % m) as u64))
    }

    /// Valuation of a residue, `m` if it vanishes.
    pub fn val(&self, x: Res) -> u32 {
        match (x.0, x.1) {
            (0, 0) => self.m,
            (0, b) => vp(b, self.p),
            (a, 0) => vp(a, self.p),
            (a, b) => vp(a, self.p).min(vp(b, self.p)),
        }
    }

    /// Reduce to a coarser ring `o_E / p^k`.
    #[inline]
    pub fn reduce(&self, x: Res, k: u32) -> Res {
        let m = pow_u64(self.p, k);
        (x.0 % m, x.1 % m)
    }
}
