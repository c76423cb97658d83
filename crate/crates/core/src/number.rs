//! Elementary number theory used by the exponential sums and the count oracles.

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// `gcd(q, |n|)` with the convention `gcd(q, 0) = q`.
pub fn gcd_signed(q: u64, n: i64) -> u64 {
    gcd(q, n.unsigned_abs())
}

/// Prime factorization as `(prime, exponent)` pairs in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn mobius(n: u64) -> i64 {
    assert!(n >= 1, "mobius(0) is undefined");
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Positive divisors of `n`, sorted.
pub fn divisors(n: u64) -> Vec<u64> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Sum of the positive divisors of `n`.
pub fn divisor_sum(n: u64) -> u128 {
    divisors(n).into_iter().map(u128::from).sum()
}

pub fn totient(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

/// The residues `a` in `0..q` with `gcd(a, q) = 1`. For `q = 1` this is `[0]`.
pub fn units(q: u64) -> Vec<u64> {
    (0..q).filter(|&a| gcd(a, q) == 1).collect()
}

/// Jacobi's four-square count `r_4(n) = 8 * sum_{d | n, 4 ∤ d} d`, valid for all `n >= 1`.
pub fn jacobi_r4(n: u64) -> u128 {
    if n == 0 {
        return 1;
    }
    8 * divisors(n)
        .into_iter()
        .filter(|d| d % 4 != 0)
        .map(u128::from)
        .sum::<u128>()
}

/// `x mod q` in `0..q` for signed `x`.
pub fn rem(x: i64, q: u64) -> u64 {
    x.rem_euclid(q as i64) as u64
}
