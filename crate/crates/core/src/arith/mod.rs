//! Exact 64-bit integer and modular arithmetic, factorization and prime generation.
//!
//! Every modulus in play is below 2^63, so products are formed in `u128`
//! and reduced; nothing here needs arbitrary precision.

pub mod factor;
pub mod modular;
pub mod sieve;

pub use factor::{factorize, factorize_bounded, gcd, is_prime, isqrt, lcm};
pub use modular::{euler_phi, inv_mod, legendre, multiplicative_order, pow_mod, reduce, sqrt_mod};
pub use sieve::{sieve_primes, sieve_primes_with_limit, PrimeRange, DEFAULT_SIEVE_MAX};
