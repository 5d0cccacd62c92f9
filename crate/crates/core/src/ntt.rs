//! Number Theoretic Transform over `Z_q` for power-of-two sizes.
//!
//! The fast forward transform is an in-place iterative Cooley-Tukey pass that
//! takes coefficients in natural order and leaves evaluations in bit-reversed
//! order; the inverse is the matching Gentleman-Sande pass that consumes
//! bit-reversed evaluations and restores natural order. [`poly_mul_ntt`]
//! chains the two without any permutation. The public [`ntt_fast`] and
//! [`intt_fast`] add the bit-reversal permutation so their outputs line up
//! index-for-index with [`ntt_direct`].
//!
//! Convolution here is cyclic, i.e. modulo `x^n - 1`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::modarith::{add_mod, bit_reverse, inv_mod, is_prime, mul_mod, pow_mod, sub_mod};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NttError {
    #[error("modulus {0} is not prime")]
    NotPrime(u64),
    #[error("transform size {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("modulus {q} is not congruent to 1 mod {n}")]
    IncompatibleModulus { q: u64, n: usize },
    #[error("polynomial has {found} coefficients, context expects {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("coefficient {value} at index {index} is not reduced mod {q}")]
    CoefficientOutOfRange { index: usize, value: u64, q: u64 },
    #[error("polynomial bound to modulus {found}, context uses {expected}")]
    ContextMismatch { expected: u64, found: u64 },
}

/// Per-context twiddle tables, indexed by node of the butterfly tree
/// (node 1 is the first stage, nodes `2^s .. 2^(s+1)` belong to stage `s`).
#[derive(Debug)]
struct Twiddles {
    forward: Vec<u64>,
    inverse: Vec<u64>,
}

impl Twiddles {
    fn build(q: u64, n: usize, omega: u64) -> Self {
        if n < 2 {
            return Twiddles {
                forward: vec![0; 1],
                inverse: vec![0; 1],
            };
        }
        // exponent[k]: node k reduces modulo x^len - omega^exponent[k].
        // Splitting it with r = omega^(exponent/2) yields the children
        // x^(len/2) - r and x^(len/2) + r = x^(len/2) - omega^(exponent/2 + n/2).
        let half = n / 2;
        let mut exponent = vec![0usize; n];
        let mut forward = vec![0u64; n];
        let mut inverse = vec![0u64; n];
        for k in 1..n {
            let z = exponent[k] / 2;
            forward[k] = pow_mod(omega, z as u64, q);
            inverse[k] = pow_mod(omega, ((n - z) % n) as u64, q);
            if 2 * k + 1 < n {
                exponent[2 * k] = z;
                exponent[2 * k + 1] = z + half;
            }
        }
        Twiddles { forward, inverse }
    }
}

/// Modulus, transform size, root of unity and the derived inverses.
///
/// Immutable once built. Cloning shares the twiddle tables.
#[derive(Clone)]
pub struct ModulusContext {
    q: u64,
    n: usize,
    log_n: u32,
    omega: u64,
    omega_inv: u64,
    n_inv: u64,
    twiddles: Arc<Twiddles>,
}

impl fmt::Debug for ModulusContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModulusContext")
            .field("q", &self.q)
            .field("n", &self.n)
            .field("omega", &self.omega)
            .field("omega_inv", &self.omega_inv)
            .field("n_inv", &self.n_inv)
            .finish()
    }
}

impl ModulusContext {
    /// Builds a context for prime `q` and power-of-two `n` with `q = 1 mod n`.
    ///
    /// `omega` is the numerically smallest primitive `n`-th root of unity.
    pub fn new(q: u64, n: usize) -> Result<Self, NttError> {
        if n == 0 || !n.is_power_of_two() {
            return Err(NttError::NotPowerOfTwo(n));
        }
        if !is_prime(q) {
            return Err(NttError::NotPrime(q));
        }
        if !(q - 1).is_multiple_of(n as u64) {
            return Err(NttError::IncompatibleModulus { q, n });
        }
        let omega = smallest_primitive_root(q, n);
        let omega_inv = inv_mod(omega, q).expect("root of unity is a unit");
        let n_inv = inv_mod(n as u64 % q, q).expect("n divides q - 1, so gcd(n, q) = 1");
        Ok(ModulusContext {
            q,
            n,
            log_n: n.trailing_zeros(),
            omega,
            omega_inv,
            n_inv,
            twiddles: Arc::new(Twiddles::build(q, n, omega)),
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_n(&self) -> u32 {
        self.log_n
    }

    pub fn omega(&self) -> u64 {
        self.omega
    }

    pub fn omega_inv(&self) -> u64 {
        self.omega_inv
    }

    pub fn n_inv(&self) -> u64 {
        self.n_inv
    }

    /// Validates `coeffs` and binds them to this context's modulus.
    pub fn polynomial(&self, coeffs: Vec<u64>) -> Result<Polynomial, NttError> {
        let p = Polynomial::new(coeffs);
        self.check(&p)?;
        Ok(self.bind(p.coeffs))
    }

    pub fn zero(&self) -> Polynomial {
        self.bind(vec![0; self.n])
    }

    /// Returns a copy whose forward twiddle table has one wrong entry.
    ///
    /// Only meant as a negative control for self-tests; has no effect for `n = 1`.
    #[doc(hidden)]
    pub fn with_corrupted_twiddle(&self) -> Self {
        let mut forward = self.twiddles.forward.clone();
        if self.n >= 2 {
            let k = self.n - 1;
            forward[k] = add_mod(forward[k], 1, self.q);
        }
        ModulusContext {
            twiddles: Arc::new(Twiddles {
                forward,
                inverse: self.twiddles.inverse.clone(),
            }),
            ..self.clone()
        }
    }

    fn bind(&self, coeffs: Vec<u64>) -> Polynomial {
        Polynomial {
            coeffs,
            modulus: Some(self.q),
        }
    }

    fn check(&self, p: &Polynomial) -> Result<(), NttError> {
        if let Some(m) = p.modulus {
            if m != self.q {
                return Err(NttError::ContextMismatch {
                    expected: self.q,
                    found: m,
                });
            }
        }
        if p.coeffs.len() != self.n {
            return Err(NttError::LengthMismatch {
                expected: self.n,
                found: p.coeffs.len(),
            });
        }
        if let Some((index, &value)) = p.coeffs.iter().enumerate().find(|(_, &c)| c >= self.q) {
            return Err(NttError::CoefficientOutOfRange {
                index,
                value,
                q: self.q,
            });
        }
        Ok(())
    }
}

fn smallest_primitive_root(q: u64, n: usize) -> u64 {
    if n == 1 {
        return 1;
    }
    let cofactor = (q - 1) / n as u64;
    let half = (n / 2) as u64;
    // omega has order exactly n iff omega^(n/2) = -1.
    let first = (2..q)
        .map(|g| pow_mod(g, cofactor, q))
        .find(|&w| pow_mod(w, half, q) == q - 1)
        .expect("a prime q = 1 mod n has a primitive n-th root");
    // Every primitive n-th root is first^k for odd k.
    let step = mul_mod(first, first, q);
    let mut root = first;
    let mut best = first;
    for _ in 1..half {
        root = mul_mod(root, step, q);
        best = best.min(root);
    }
    best
}

/// Residue vector of length `n`, optionally bound to the modulus it was
/// validated against.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<u64>,
    #[serde(skip)]
    modulus: Option<u64>,
}

impl Polynomial {
    /// Unchecked, unbound polynomial; operations validate it on use.
    pub fn new(coeffs: Vec<u64>) -> Self {
        Polynomial {
            coeffs,
            modulus: None,
        }
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn modulus(&self) -> Option<u64> {
        self.modulus
    }
}

impl From<Vec<u64>> for Polynomial {
    fn from(coeffs: Vec<u64>) -> Self {
        Polynomial::new(coeffs)
    }
}

/// Smallest prime `q >= at_least` with `q = 1 mod n`.
pub fn ntt_friendly_prime(n: usize, at_least: u64) -> Option<u64> {
    let n = n.max(1) as u64;
    let start = at_least.saturating_sub(1).div_ceil(n).max(1);
    (start..)
        .map_while(|k| k.checked_mul(n)?.checked_add(1))
        .find(|&q| is_prime(q))
}

/// `(n/2) * log2(n)`
pub fn butterfly_count(n: usize) -> u64 {
    if n < 2 {
        0
    } else {
        (n as u64 / 2) * n.trailing_zeros() as u64
    }
}

/// Index pairs touched by each stage of the forward transform, in issue order.
pub fn butterfly_plan(n: usize) -> Vec<Vec<(usize, usize)>> {
    let mut stages = Vec::new();
    let mut len = n / 2;
    while len >= 1 {
        let mut stage = Vec::with_capacity(n / 2);
        for start in (0..n).step_by(2 * len) {
            for j in start..start + len {
                stage.push((j, j + len));
            }
        }
        stages.push(stage);
        len >>= 1;
    }
    stages
}

/// Textbook `O(n^2)` evaluation of `sum_j a_j * omega^(i*j)`.
pub fn ntt_direct(ctx: &ModulusContext, a: &Polynomial) -> Result<Polynomial, NttError> {
    ctx.check(a)?;
    let (q, n) = (ctx.q, ctx.n);
    let out = (0..n)
        .map(|i| {
            let w = pow_mod(ctx.omega, i as u64, q);
            let mut acc = 0u64;
            let mut wij = 1u64;
            for &c in &a.coeffs {
                acc = add_mod(acc, mul_mod(c, wij, q), q);
                wij = mul_mod(wij, w, q);
            }
            acc
        })
        .collect();
    Ok(ctx.bind(out))
}

/// Cooley-Tukey forward pass: natural order in, bit-reversed order out.
/// Returns the number of butterflies executed.
fn forward_in_place(ctx: &ModulusContext, a: &mut [u64]) -> u64 {
    let q = ctx.q;
    let tw = &ctx.twiddles.forward;
    let mut count = 0u64;
    let mut node = 1;
    let mut len = ctx.n / 2;
    while len >= 1 {
        for start in (0..ctx.n).step_by(2 * len) {
            let zeta = tw[node];
            node += 1;
            for j in start..start + len {
                let t = mul_mod(zeta, a[j + len], q);
                a[j + len] = sub_mod(a[j], t, q);
                a[j] = add_mod(a[j], t, q);
                count += 1;
            }
        }
        len >>= 1;
    }
    count
}

/// Gentleman-Sande inverse pass: bit-reversed order in, natural order out,
/// including the final `n^-1` scaling.
fn inverse_in_place(ctx: &ModulusContext, a: &mut [u64]) -> u64 {
    let q = ctx.q;
    let tw = &ctx.twiddles.inverse;
    let mut count = 0u64;
    let mut len = 1;
    let mut stage_first = ctx.n / 2;
    while len < ctx.n {
        for (node, start) in (stage_first..).zip((0..ctx.n).step_by(2 * len)) {
            let zeta_inv = tw[node];
            for j in start..start + len {
                let (lo, hi) = (a[j], a[j + len]);
                a[j] = add_mod(lo, hi, q);
                a[j + len] = mul_mod(sub_mod(lo, hi, q), zeta_inv, q);
                count += 1;
            }
        }
        len <<= 1;
        stage_first /= 2;
    }
    for c in a.iter_mut() {
        *c = mul_mod(*c, ctx.n_inv, q);
    }
    count
}

fn bit_reverse_permute(a: &mut [u64], bits: u32) {
    for i in 0..a.len() {
        let j = bit_reverse(i, bits);
        if i < j {
            a.swap(i, j);
        }
    }
}

/// Fast forward transform together with the number of butterflies it ran.
pub fn ntt_fast_counted(
    ctx: &ModulusContext,
    a: &Polynomial,
) -> Result<(Polynomial, u64), NttError> {
    ctx.check(a)?;
    let mut v = a.coeffs.clone();
    let count = forward_in_place(ctx, &mut v);
    bit_reverse_permute(&mut v, ctx.log_n);
    Ok((ctx.bind(v), count))
}

/// Fast forward transform; output is index-compatible with [`ntt_direct`].
pub fn ntt_fast(ctx: &ModulusContext, a: &Polynomial) -> Result<Polynomial, NttError> {
    ntt_fast_counted(ctx, a).map(|(p, _)| p)
}

pub fn intt_fast_counted(
    ctx: &ModulusContext,
    a_hat: &Polynomial,
) -> Result<(Polynomial, u64), NttError> {
    ctx.check(a_hat)?;
    let mut v = a_hat.coeffs.clone();
    bit_reverse_permute(&mut v, ctx.log_n);
    let count = inverse_in_place(ctx, &mut v);
    Ok((ctx.bind(v), count))
}

/// Inverse of [`ntt_fast`]: `intt_fast(ntt_fast(x)) == x`.
pub fn intt_fast(ctx: &ModulusContext, a_hat: &Polynomial) -> Result<Polynomial, NttError> {
    intt_fast_counted(ctx, a_hat).map(|(p, _)| p)
}

fn check_pair(ctx: &ModulusContext, a: &Polynomial, b: &Polynomial) -> Result<(), NttError> {
    if let (Some(ma), Some(mb)) = (a.modulus, b.modulus) {
        if ma != mb {
            return Err(NttError::ContextMismatch {
                expected: ma,
                found: mb,
            });
        }
    }
    ctx.check(a)?;
    ctx.check(b)
}

/// Cyclic product `a * b mod (x^n - 1, q)` via forward transforms, a pointwise
/// product and one inverse transform.
pub fn poly_mul_ntt(
    ctx: &ModulusContext,
    a: &Polynomial,
    b: &Polynomial,
) -> Result<Polynomial, NttError> {
    check_pair(ctx, a, b)?;
    let q = ctx.q;
    let mut fa = a.coeffs.clone();
    let mut fb = b.coeffs.clone();
    forward_in_place(ctx, &mut fa);
    forward_in_place(ctx, &mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x = mul_mod(*x, *y, q);
    }
    inverse_in_place(ctx, &mut fa);
    Ok(ctx.bind(fa))
}

/// Schoolbook cyclic convolution mod `q`.
pub fn poly_mul_naive(
    ctx: &ModulusContext,
    a: &Polynomial,
    b: &Polynomial,
) -> Result<Polynomial, NttError> {
    check_pair(ctx, a, b)?;
    let (q, n) = (ctx.q, ctx.n);
    let mut out = vec![0u64; n];
    for (i, &x) in a.coeffs.iter().enumerate() {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.coeffs.iter().enumerate() {
            let k = (i + j) % n;
            out[k] = add_mod(out[k], mul_mod(x, y, q), q);
        }
    }
    Ok(ctx.bind(out))
}
