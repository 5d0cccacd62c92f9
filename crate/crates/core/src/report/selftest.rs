use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{csv_artifact, json_artifact, Artifact, OutputFormat};
use crate::modarith::{add_mod, mul_mod, pow_mod};
use crate::ntt::{
    butterfly_count, intt_fast, ntt_direct, ntt_fast, ntt_fast_counted, ntt_friendly_prime,
    poly_mul_naive, poly_mul_ntt, ModulusContext, NttError, Polynomial,
};

const SEED: u64 = 0x0971_c0de;
/// Largest size checked against the full `O(n^2)` transform; above it a
/// sample of output indices is evaluated directly instead.
const FULL_ORACLE_MAX_N: usize = 1024;
const SPOT_INDICES: usize = 64;
const CONVOLUTION_MAX_N: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestCheck {
    pub property: &'static str,
    pub n: usize,
    pub q: u64,
    pub cases: usize,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelftestReport {
    pub max_n: usize,
    pub fault_injected: bool,
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self, format: OutputFormat, stamp: &str) -> Vec<Artifact> {
        let mut out = Vec::new();
        if format.csv() {
            out.push(csv_artifact(
                "ntt_selftest",
                "ntt-selftest",
                stamp,
                &self.checks,
            ));
        }
        if format.json() {
            out.push(json_artifact("ntt_selftest", "ntt-selftest", stamp, self));
        }
        out
    }
}

fn random_poly(rng: &mut ChaCha8Rng, n: usize, q: u64) -> Polynomial {
    Polynomial::new((0..n).map(|_| rng.gen_range(0..q)).collect())
}

fn eval_at(a: &[u64], x: u64, q: u64) -> u64 {
    // Horner
    a.iter()
        .rev()
        .fold(0, |acc, &c| add_mod(mul_mod(acc, x, q), c, q))
}

/// Runs the transform properties for every power of two up to `max_n`, over
/// a small and a ~62-bit modulus. `inject_fault` corrupts the fast path's
/// twiddle table as a negative control.
pub fn ntt_selftest(max_n: usize, inject_fault: bool) -> Result<SelftestReport, NttError> {
    if max_n == 0 || !max_n.is_power_of_two() {
        return Err(NttError::NotPowerOfTwo(max_n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checks = Vec::new();
    let mut n = 1;
    while n <= max_n {
        let small = ntt_friendly_prime(n, 17).expect("small NTT prime exists");
        let large = ntt_friendly_prime(n, 1 << 61).expect("62-bit NTT prime exists");
        for q in [small, large] {
            let clean = ModulusContext::new(q, n)?;
            let ctx = if inject_fault {
                clean.with_corrupted_twiddle()
            } else {
                clean.clone()
            };

            let cases = if n <= 64 { 64 } else { 16 };
            let mut ok = true;
            for _ in 0..cases {
                let a = random_poly(&mut rng, n, q);
                let fast = ntt_fast(&ctx, &a)?;
                if n <= FULL_ORACLE_MAX_N {
                    ok &= fast.coeffs() == ntt_direct(&clean, &a)?.coeffs();
                } else {
                    for _ in 0..SPOT_INDICES {
                        let i = rng.gen_range(0..n);
                        let x = pow_mod(clean.omega(), i as u64, q);
                        ok &= fast.coeffs()[i] == eval_at(a.coeffs(), x, q);
                    }
                }
            }
            checks.push(SelftestCheck {
                property: "fast_equals_direct",
                n,
                q,
                cases,
                passed: ok,
            });

            let mut ok = true;
            for _ in 0..cases {
                let a = random_poly(&mut rng, n, q);
                ok &= intt_fast(&ctx, &ntt_fast(&ctx, &a)?)?.coeffs() == a.coeffs();
            }
            checks.push(SelftestCheck {
                property: "round_trip",
                n,
                q,
                cases,
                passed: ok,
            });

            if n <= CONVOLUTION_MAX_N {
                let mut ok = true;
                for _ in 0..cases {
                    let a = random_poly(&mut rng, n, q);
                    let b = random_poly(&mut rng, n, q);
                    ok &= poly_mul_ntt(&ctx, &a, &b)?.coeffs()
                        == poly_mul_naive(&clean, &a, &b)?.coeffs();
                }
                checks.push(SelftestCheck {
                    property: "convolution",
                    n,
                    q,
                    cases,
                    passed: ok,
                });
            }

            let (_, count) = ntt_fast_counted(&ctx, &clean.zero())?;
            checks.push(SelftestCheck {
                property: "butterfly_count",
                n,
                q,
                cases: 1,
                passed: count == butterfly_count(n)
                    && count == (n as u64 / 2) * n.trailing_zeros() as u64,
            });
        }
        n *= 2;
    }
    Ok(SelftestReport {
        max_n,
        fault_injected: inject_fault,
        checks,
    })
}
