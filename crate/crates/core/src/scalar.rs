//! Exact scalars in cyclotomic fields `Q(zeta_n)` and the small amount of
//! linear algebra the operator checks need.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
pub use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

fn cyclotomic_cache() -> &'static Mutex<HashMap<u64, Vec<BigInt>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Coefficients (low degree first) of the `n`-th cyclotomic polynomial.
pub fn cyclotomic(n: u64) -> Vec<BigInt> {
    if let Some(c) = cyclotomic_cache().lock().unwrap().get(&n) {
        return c.clone();
    }
    // x^n - 1 divided by Phi_d for every proper divisor d.
    let mut num: Vec<BigInt> = vec![BigInt::zero(); n as usize + 1];
    num[0] = BigInt::from(-1);
    num[n as usize] = BigInt::one();
    for d in 1..n {
        if n % d == 0 {
            num = exact_div_monic(&num, &cyclotomic(d));
        }
    }
    cyclotomic_cache().lock().unwrap().insert(n, num.clone());
    num
}

fn exact_div_monic(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let dq = r.len() - 1 - db;
    let mut q = vec![BigInt::zero(); dq + 1];
    for i in (0..=dq).rev() {
        let c = r[i + db].clone();
        if !c.is_zero() {
            for (k, bk) in b.iter().enumerate() {
                r[i + k] -= &c * bk;
            }
        }
        q[i] = c;
    }
    debug_assert!(r.iter().all(|x| x.is_zero()));
    q
}

/// Euler's phi.
pub fn phi(n: u64) -> u64 {
    let mut n0 = n;
    let mut out = n;
    let mut d = 2;
    while d * d <= n0 {
        if n0 % d == 0 {
            while n0 % d == 0 {
                n0 /= d;
            }
            out = out / d * (d - 1);
        }
        d += 1;
    }
    if n0 > 1 {
        out = out / n0 * (n0 - 1);
    }
    out
}

type Poly = Vec<BigRational>;

fn trim(p: &mut Poly) {
    while p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

fn poly_divrem(a: &Poly, b: &Poly) -> (Poly, Poly) {
    let mut r = a.clone();
    trim(&mut r);
    let db = b.len() - 1;
    if r.len() <= db {
        return (vec![], r);
    }
    let lead = b[db].clone();
    let mut q = vec![BigRational::zero(); r.len() - db];
    for i in (0..q.len()).rev() {
        let c = &r[i + db] / &lead;
        if !c.is_zero() {
            for (k, bk) in b.iter().enumerate() {
                r[i + k] = &r[i + k] - &c * bk;
            }
        }
        q[i] = c;
    }
    trim(&mut r);
    (q, r)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_sub(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    if out.len() < b.len() {
        out.resize(b.len(), BigRational::zero());
    }
    for (i, y) in b.iter().enumerate() {
        out[i] = &out[i] - y;
    }
    trim(&mut out);
    out
}

/// An element of `Q(zeta_n)` in the power basis `1, z, .., z^(phi(n)-1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cyclo {
    n: u64,
    c: Vec<BigRational>,
}

impl Cyclo {
    pub fn zero(n: u64) -> Self {
        Self { n, c: vec![BigRational::zero(); phi(n) as usize] }
    }

    pub fn one(n: u64) -> Self {
        Self::from_rational(n, BigRational::one())
    }

    pub fn from_rational(n: u64, r: BigRational) -> Self {
        let mut z = Self::zero(n);
        z.c[0] = r;
        z
    }

    pub fn from_int(n: u64, k: i64) -> Self {
        Self::from_rational(n, BigRational::from_integer(k.into()))
    }

    /// `zeta_n^j`.
    pub fn zeta(n: u64, j: u64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(j % n, BigRational::one());
        Self::from_terms(n, &terms)
    }

    /// `sum c_j zeta_n^j`, reduced.
    pub fn from_terms(n: u64, terms: &BTreeMap<u64, BigRational>) -> Self {
        let d = phi(n) as usize;
        let top = terms.keys().next_back().map_or(0, |k| *k as usize);
        let mut p = vec![BigRational::zero(); (top + 1).max(d)];
        for (j, v) in terms {
            p[(*j % n) as usize] += v;
        }
        Self { n, c: Self::reduce(n, p) }
    }

    fn reduce(n: u64, mut p: Poly) -> Vec<BigRational> {
        let phi_n = cyclotomic(n);
        let d = phi_n.len() - 1;
        let phi_q: Vec<BigRational> = phi_n.iter().map(|x| BigRational::from_integer(x.clone())).collect();
        for i in (d..p.len()).rev() {
            let c = p[i].clone();
            if c.is_zero() {
                continue;
            }
            for k in 0..=d {
                p[i - d + k] = &p[i - d + k] - &c * &phi_q[k];
            }
        }
        p.truncate(d);
        p.resize(d, BigRational::zero());
        p
    }

    pub fn order(&self) -> u64 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.c
    }

    pub fn is_zero(&self) -> bool {
        self.c.iter().all(|x| x.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        self.c.iter().skip(1).all(|x| x.is_zero())
    }

    /// The same number viewed in `Q(zeta_k)`, `n | k`.
    pub fn lift(&self, k: u64) -> Self {
        if k == self.n {
            return self.clone();
        }
        assert!(k % self.n == 0, "cannot embed Q(zeta_{}) in Q(zeta_{k})", self.n);
        let f = k / self.n;
        let mut terms = BTreeMap::new();
        for (i, v) in self.c.iter().enumerate() {
            if !v.is_zero() {
                terms.insert(i as u64 * f, v.clone());
            }
        }
        Self::from_terms(k, &terms)
    }

    fn common(a: &Self, b: &Self) -> (Self, Self) {
        if a.n == b.n {
            return (a.clone(), b.clone());
        }
        let l = a.n.lcm(&b.n);
        (a.lift(l), b.lift(l))
    }

    pub fn add(&self, o: &Self) -> Self {
        if self.n != o.n {
            let (a, b) = Self::common(self, o);
            return a.add(&b);
        }
        Self { n: self.n, c: self.c.iter().zip(&o.c).map(|(x, y)| x + y).collect() }
    }

    pub fn neg(&self) -> Self {
        Self { n: self.n, c: self.c.iter().map(|x| -x).collect() }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        Self { n: self.n, c: self.c.iter().map(|x| x * r).collect() }
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.n != o.n {
            let (a, b) = Self::common(self, o);
            return a.mul(&b);
        }
        if self.n <= 2 {
            return Self { n: self.n, c: vec![&self.c[0] * &o.c[0]] };
        }
        let p = poly_mul(&self.c, &o.c);
        Self { n: self.n, c: Self::reduce(self.n, p) }
    }

    pub fn inv(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        if self.n <= 2 {
            return Some(Self { n: self.n, c: vec![self.c[0].recip()] });
        }
        // Extended Euclid: s*a + t*Phi = 1.
        let phi_n: Poly = cyclotomic(self.n).into_iter().map(BigRational::from_integer).collect();
        let mut a = self.c.clone();
        trim(&mut a);
        let (mut r0, mut r1) = (phi_n, a);
        let (mut s0, mut s1): (Poly, Poly) = (vec![], vec![BigRational::one()]);
        while !r1.is_empty() {
            let (q, r) = poly_divrem(&r0, &r1);
            let s2 = poly_sub(&s0, &poly_mul(&q, &s1));
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s2;
        }
        // r0 is a non-zero constant since Phi_n is irreducible.
        if r0.len() != 1 {
            return None;
        }
        let k = r0[0].recip();
        let s: Poly = s0.iter().map(|x| x * &k).collect();
        Some(Self { n: self.n, c: Self::reduce(self.n, s) })
    }

    pub fn div(&self, o: &Self) -> Option<Self> {
        Some(self.mul(&o.inv()?))
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.c.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            match i {
                0 => write!(f, "{a}")?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{a}*")?;
                    }
                    write!(f, "z{}", if i == 1 { String::new() } else { format!("^{i}") })?;
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        if self.n > 2 {
            write!(f, " [z=zeta_{}]", self.n)?;
        }
        Ok(())
    }
}

/// Integer combination of monomials `x^k zeta_n^j`; the form every model
/// value and every sum of them takes before `x` is specialized.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MonoSum {
    pub n: u64,
    pub terms: BTreeMap<(i64, u64), i64>,
}

impl MonoSum {
    pub fn new(n: u64) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn add_term(&mut self, k: i64, j: u64, c: i64) {
        let e = self.terms.entry((k, j % self.n)).or_insert(0);
        *e += c;
        if *e == 0 {
            self.terms.remove(&(k, j % self.n));
        }
    }

    pub fn add(&mut self, o: &MonoSum) {
        assert_eq!(self.n, o.n);
        for ((k, j), c) in &o.terms {
            self.add_term(*k, *j, *c);
        }
    }

    /// Value at `x`.
    pub fn eval(&self, x: &BigRational) -> Cyclo {
        let mut by_j: BTreeMap<u64, BigRational> = BTreeMap::new();
        for ((k, j), c) in &self.terms {
            let xp = if *k >= 0 { x.pow(*k as i32) } else { x.recip().pow((-*k) as i32) };
            *by_j.entry(*j).or_insert_with(BigRational::zero) += xp * BigRational::from_integer((*c).into());
        }
        Cyclo::from_terms(self.n, &by_j)
    }
}

/// Dense matrix over `Q(zeta_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub n: u64,
    pub data: Vec<Cyclo>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, n: u64) -> Self {
        Self { rows, cols, n, data: vec![Cyclo::zero(n); rows * cols] }
    }

    pub fn identity(k: usize, n: u64) -> Self {
        let mut m = Self::zeros(k, k, n);
        for i in 0..k {
            m.set(i, i, Cyclo::one(n));
        }
        m
    }

    pub fn from_columns(rows: usize, n: u64, cols: &[Vec<Cyclo>]) -> Self {
        let mut m = Self::zeros(rows, cols.len(), n);
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for (i, v) in c.iter().enumerate() {
                m.set(i, j, v.lift(n));
            }
        }
        m
    }

    pub fn get(&self, i: usize, j: usize) -> &Cyclo {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Cyclo) {
        self.data[i * self.cols + j] = v;
    }

    pub fn column(&self, j: usize) -> Vec<Cyclo> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<Cyclo>> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    /// Brings every entry into `Q(zeta_k)`.
    pub fn lift(&self, k: u64) -> Self {
        Self { n: k, data: self.data.iter().map(|x| x.lift(k)).collect(), ..self.clone() }
    }

    fn unify(a: &Self, b: &Self) -> (Self, Self) {
        let l = a.n.lcm(&b.n);
        (a.lift(l), b.lift(l))
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "shape mismatch");
        let (a, b) = Self::unify(self, o);
        let mut out = Self::zeros(a.rows, b.cols, a.n);
        for i in 0..a.rows {
            for j in 0..b.cols {
                let mut acc = Cyclo::zero(a.n);
                for k in 0..a.cols {
                    let x = a.get(i, k);
                    if x.is_zero() {
                        continue;
                    }
                    acc = acc.add(&x.mul(b.get(k, j)));
                }
                out.set(i, j, acc);
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let (a, b) = Self::unify(self, o);
        Self { data: a.data.iter().zip(&b.data).map(|(x, y)| x.add(y)).collect(), ..a }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        let (a, b) = Self::unify(self, o);
        Self { data: a.data.iter().zip(&b.data).map(|(x, y)| x.sub(y)).collect(), ..a }
    }

    pub fn scale(&self, c: &Cyclo) -> Self {
        let l = self.n.lcm(&c.order());
        let a = self.lift(l);
        let c = c.lift(l);
        Self { data: a.data.iter().map(|x| x.mul(&c)).collect(), ..a }
    }

    /// `[self | o]`.
    pub fn hcat(&self, o: &Self) -> Self {
        assert_eq!(self.rows, o.rows);
        let (a, b) = Self::unify(self, o);
        let mut out = Self::zeros(a.rows, a.cols + b.cols, a.n);
        for i in 0..a.rows {
            for j in 0..a.cols {
                out.set(i, j, a.get(i, j).clone());
            }
            for j in 0..b.cols {
                out.set(i, a.cols + j, b.get(i, j).clone());
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Reduced row echelon form and pivot columns.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(pr) = (r..m.rows).find(|&i| !m.get(i, c).is_zero()) else { continue };
            if pr != r {
                for j in 0..m.cols {
                    m.data.swap(pr * m.cols + j, r * m.cols + j);
                }
            }
            let inv = m.get(r, c).inv().unwrap();
            for j in c..m.cols {
                let v = m.get(r, j).mul(&inv);
                m.set(r, j, v);
            }
            for i in 0..m.rows {
                if i == r || m.get(i, c).is_zero() {
                    continue;
                }
                let f = m.get(i, c).clone();
                for j in c..m.cols {
                    let v = m.get(i, j).sub(&f.mul(m.get(r, j)));
                    m.set(i, j, v);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right null space, as columns of the returned matrix.
    pub fn nullspace(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(self.cols, free.len(), r.n);
        for (k, &f) in free.iter().enumerate() {
            out.set(f, k, Cyclo::one(r.n));
            for (i, &pc) in pivots.iter().enumerate() {
                out.set(pc, k, r.get(i, f).neg());
            }
        }
        out
    }

    /// Column space of `self` is contained in that of `o`.
    pub fn column_space_within(&self, o: &Self) -> bool {
        o.rank() == o.hcat(self).rank()
    }

    pub fn same_column_space(&self, o: &Self) -> bool {
        let r = self.hcat(o).rank();
        r == self.rank() && r == o.rank()
    }

    /// Sparse triples `(row, col, value)` of the non-zero entries.
    pub fn triples(&self) -> Vec<(usize, usize, String)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let v = self.get(i, j);
                if !v.is_zero() {
                    out.push((i, j, v.to_string()));
                }
            }
        }
        out
    }
}

pub fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polys() {
        let show = |n| cyclotomic(n).iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",");
        assert_eq!(show(1), "-1,1");
        assert_eq!(show(3), "1,1,1");
        assert_eq!(show(8), "1,0,0,0,1");
        assert_eq!(show(12), "1,0,-1,0,1");
        assert_eq!(cyclotomic(24).len() as u64 - 1, phi(24));
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for n in [3u64, 8, 9, 24, 72] {
            let mut s = Cyclo::zero(n);
            for j in 0..n {
                s = s.add(&Cyclo::zeta(n, j));
            }
            assert!(s.is_zero(), "n = {n}");
            assert_eq!(Cyclo::zeta(n, 1).mul(&Cyclo::zeta(n, n - 1)), Cyclo::one(n));
        }
    }

    #[test]
    fn inverse_and_lift() {
        let a = Cyclo::one(9).add(&Cyclo::zeta(9, 2).scale(&rat(3, 2)));
        let b = a.inv().unwrap();
        assert_eq!(a.mul(&b), Cyclo::one(9));
        let z3 = Cyclo::zeta(3, 1);
        assert_eq!(z3.lift(9), Cyclo::zeta(9, 3));
        assert_eq!(z3.add(&Cyclo::zeta(9, 0)), Cyclo::zeta(9, 3).add(&Cyclo::one(9)));
    }

    #[test]
    fn linear_algebra() {
        let q = |a: i64| Cyclo::from_int(1, a);
        let m = Matrix::from_columns(3, 1, &[vec![q(1), q(2), q(3)], vec![q(2), q(4), q(6)], vec![q(0), q(1), q(1)]]);
        assert_eq!(m.rank(), 2);
        let ns = m.nullspace();
        assert_eq!(ns.cols, 1);
        assert!(m.mul(&ns).is_zero());
        let sub = Matrix::from_columns(3, 1, &[vec![q(1), q(3), q(4)]]);
        assert!(sub.column_space_within(&m));
        let out = Matrix::from_columns(3, 1, &[vec![q(1), q(0), q(0)]]);
        assert!(!out.column_space_within(&m));
    }

    #[test]
    fn monosum_eval() {
        let mut s = MonoSum::new(4);
        s.add_term(-1, 1, 3);
        s.add_term(2, 3, 1);
        s.add_term(2, 3, -1);
        assert_eq!(s.terms.len(), 1);
        let v = s.eval(&rat(2, 3));
        assert_eq!(v, Cyclo::zeta(4, 1).scale(&rat(9, 2)));
    }
}
