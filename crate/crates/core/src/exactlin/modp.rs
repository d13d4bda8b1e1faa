//! Word-size modular arithmetic used as an internal accelerator: 62-bit
//! primes, Hessenberg characteristic polynomials mod p, and p-adic lifting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

#[inline]
pub fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

#[inline]
pub fn addmod(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn submod(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

pub fn powmod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, a, p);
        }
        a = mulmod(a, a, p);
        e >>= 1;
    }
    acc
}

pub fn invmod(a: u64, p: u64) -> u64 {
    powmod(a, p - 2, p)
}

/// Deterministic Miller–Rabin for 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % sp == 0 {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'outer: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// Iterator over primes just below 2^62, largest first.
pub struct PrimeStream {
    next: u64,
}

impl PrimeStream {
    pub fn new() -> Self {
        PrimeStream { next: (1u64 << 62) - 1 }
    }
}

impl Default for PrimeStream {
    fn default() -> Self {
        Self::new()
    }
}

impl Iterator for PrimeStream {
    type Item = u64;
    fn next(&mut self) -> Option<u64> {
        while !is_prime_u64(self.next) {
            self.next -= 2;
        }
        let p = self.next;
        self.next -= 2;
        Some(p)
    }
}

pub fn reduce_i64(v: i64, p: u64) -> u64 {
    (v as i128).rem_euclid(p as i128) as u64
}

pub fn reduce_big(v: &BigInt, p: u64) -> u64 {
    let r = v.mod_floor(&BigInt::from(p));
    r.iter_u64_digits().next().unwrap_or(0)
}

/// Characteristic polynomial mod p of a dense matrix (row-major), constant
/// term first, via reduction to upper Hessenberg form.
pub fn charpoly_mod(a: &[u64], n: usize, p: u64) -> Vec<u64> {
    let mut h = a.to_vec();
    let at = |i: usize, j: usize| i * n + j;
    for j in 0..n.saturating_sub(2) {
        let piv = (j + 1..n).find(|&i| h[at(i, j)] != 0);
        let Some(i) = piv else { continue };
        if i != j + 1 {
            for c in 0..n {
                h.swap(at(i, c), at(j + 1, c));
            }
            for r in 0..n {
                h.swap(at(r, i), at(r, j + 1));
            }
        }
        let inv = invmod(h[at(j + 1, j)], p);
        for k in j + 2..n {
            if h[at(k, j)] == 0 {
                continue;
            }
            let u = mulmod(h[at(k, j)], inv, p);
            for c in 0..n {
                let t = mulmod(u, h[at(j + 1, c)], p);
                h[at(k, c)] = submod(h[at(k, c)], t, p);
            }
            for r in 0..n {
                let t = mulmod(u, h[at(r, k)], p);
                h[at(r, j + 1)] = addmod(h[at(r, j + 1)], t, p);
            }
        }
    }
    // p_m = (x - h_mm) p_{m-1} - sum_{i<m} h_im * prod_{j=i+1..m} h_{j,j-1} * p_{i-1}
    let mut polys: Vec<Vec<u64>> = Vec::with_capacity(n + 1);
    polys.push(vec![1]);
    for m in 0..n {
        let prev = &polys[m];
        let mut cur = vec![0u64; m + 2];
        for (k, &c) in prev.iter().enumerate() {
            cur[k + 1] = addmod(cur[k + 1], c, p);
            cur[k] = submod(cur[k], mulmod(h[at(m, m)], c, p), p);
        }
        let mut prod = 1u64;
        for i in (0..m).rev() {
            prod = mulmod(prod, h[at(i + 1, i)], p);
            if prod == 0 {
                break;
            }
            let coef = mulmod(h[at(i, m)], prod, p);
            if coef == 0 {
                continue;
            }
            for (k, &c) in polys[i].iter().enumerate() {
                cur[k] = submod(cur[k], mulmod(coef, c, p), p);
            }
        }
        polys.push(cur);
    }
    polys.pop().unwrap()
}

/// LU factorization mod p with row pivoting. Returns None when singular mod p.
pub struct LuMod {
    n: usize,
    p: u64,
    lu: Vec<u64>,
    perm: Vec<usize>,
}

impl LuMod {
    pub fn new(a: &[u64], n: usize, p: u64) -> Option<Self> {
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let piv = (k..n).find(|&i| lu[i * n + k] != 0)?;
            if piv != k {
                for c in 0..n {
                    lu.swap(piv * n + c, k * n + c);
                }
                perm.swap(piv, k);
            }
            let inv = invmod(lu[k * n + k], p);
            for i in k + 1..n {
                let f = mulmod(lu[i * n + k], inv, p);
                lu[i * n + k] = f;
                if f == 0 {
                    continue;
                }
                for c in k + 1..n {
                    let t = mulmod(f, lu[k * n + c], p);
                    lu[i * n + c] = submod(lu[i * n + c], t, p);
                }
            }
        }
        Some(LuMod { n, p, lu, perm })
    }

    pub fn solve(&self, b: &[u64]) -> Vec<u64> {
        let (n, p) = (self.n, self.p);
        let mut y: Vec<u64> = self.perm.iter().map(|&i| b[i]).collect();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = submod(s, mulmod(self.lu[i * n + k], y[k], p), p);
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s = submod(s, mulmod(self.lu[i * n + k], y[k], p), p);
            }
            y[i] = mulmod(s, invmod(self.lu[i * n + i], p), p);
        }
        y
    }
}

/// Rational reconstruction: finds a/b ≡ u (mod m) with |a| ≤ bound and
/// 0 < b ≤ bound, if one exists.
pub fn rational_reconstruct(u: &BigInt, m: &BigInt, bound: &BigInt) -> Option<(BigInt, BigInt)> {
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while &r1 > bound {
        let q = &r0 / &r1;
        let r2 = &r0 - &q * &r1;
        let t2 = &t0 - &q * &t1;
        r0 = std::mem::replace(&mut r1, r2);
        t0 = std::mem::replace(&mut t1, t2);
    }
    if t1.is_zero() || t1.abs() > *bound {
        return None;
    }
    if t1.is_negative() {
        Some((-r1, -t1))
    } else {
        Some((r1, t1))
    }
}

/// Symmetric residue of `x` modulo `m`.
pub fn symmetric(x: &BigInt, m: &BigInt) -> BigInt {
    let r = x.mod_floor(m);
    if &r + &r > *m {
        r - m
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_below_2_62() {
        let ps: Vec<u64> = PrimeStream::new().take(3).collect();
        assert!(ps.iter().all(|&p| is_prime_u64(p) && p < 1 << 62));
        assert!(ps[0] > ps[1] && ps[1] > ps[2]);
        assert!(is_prime_u64(1_000_000_007));
        assert!(!is_prime_u64(1_000_000_007u64 * 3));
    }

    #[test]
    fn hessenberg_charpoly_small() {
        let p = 1_000_000_007u64;
        // [[0,-q],[1,a]] with q=5, a=3 -> x^2 - 3x + 5
        let a = [0, p - 5, 1, 3];
        assert_eq!(charpoly_mod(&a, 2, p), vec![5, p - 3, 1]);
    }

    #[test]
    fn lu_solve_mod() {
        let p = 101u64;
        let a = [2, 1, 1, 3];
        let lu = LuMod::new(&a, 2, p).unwrap();
        let x = lu.solve(&[3, 4]);
        assert_eq!(addmod(mulmod(2, x[0], p), x[1], p), 3);
        assert_eq!(addmod(x[0], mulmod(3, x[1], p), p), 4);
        assert!(LuMod::new(&[1, 2, 2, 4], 2, p).is_none());
    }

    #[test]
    fn reconstruct_fraction() {
        let m = BigInt::from(1_000_003u64);
        // 3/7 mod m
        let inv7 = BigInt::from(invmod(7, 1_000_003));
        let u = (BigInt::from(3) * inv7) % &m;
        let (a, b) = rational_reconstruct(&u, &m, &BigInt::from(700)).unwrap();
        assert_eq!((a, b), (BigInt::from(3), BigInt::from(7)));
    }
}
