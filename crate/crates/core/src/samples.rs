//! Seeded sample generators shared by tests, the CLI and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::LogLift;
use crate::complex::{c, ComplexValue};
use crate::conjugacy::OrbitSeed;
use crate::error::Result;
use crate::orbits::{point_with_address, ExternalAddress};
use crate::semiconj::HyperbolicSetup;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Periodic address with period in `1..=max_period` and entries drawn from
/// `lo..=hi`.
pub fn random_periodic_address<R: Rng>(rng: &mut R, max_period: usize, lo: i64, hi: i64) -> ExternalAddress {
    let period = rng.gen_range(1..=max_period.max(1));
    let indices: Vec<i64> = (0..period).map(|_| rng.gen_range(lo..=hi)).collect();
    ExternalAddress::from_indices(&indices)
}

/// Periodic cycles of `model` with random addresses, certified in `Re >= q`.
/// Addresses whose cycle would leave `Re >= q` are redrawn.
pub fn periodic_samples<M: LogLift + ?Sized>(
    model: &M,
    count: usize,
    max_period: usize,
    entries: (i64, i64),
    q: f64,
    seed: u64,
) -> Result<Vec<OrbitSeed>> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 100 * count.max(1) {
            return Err(crate::error::Error::Precondition(format!(
                "only {} of {count} periodic samples found",
                out.len()
            )));
        }
        let address = random_periodic_address(&mut r, max_period, entries.0, entries.1);
        if let Ok(p) = point_with_address(model, &address, q, 1e-14) {
            out.push(OrbitSeed::Cycle(p.cycle));
        }
    }
    Ok(out)
}

/// Real-axis neighbourhood points `Re z in [re.0, re.1]`, `|Im z| <= im`.
pub fn box_samples(count: usize, re: (f64, f64), im: f64, seed: u64) -> Vec<ComplexValue> {
    let mut r = rng(seed);
    (0..count).map(|_| c(r.gen_range(re.0..=re.1), if im > 0.0 { r.gen_range(-im..=im) } else { 0.0 })).collect()
}

/// Points whose orbit under the rescaled model escapes: `Re z in [26, 80]`,
/// `|Im z| <= 0.2`, kept only if `|g^j(z)|` increases until it saturates.
pub fn escaping_samples(setup: &HyperbolicSetup, count: usize, seed: u64) -> Vec<ComplexValue> {
    let mut r = rng(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let z = c(r.gen_range(26.0..=80.0), r.gen_range(-0.2..=0.2));
        if escapes(setup, z) {
            out.push(z);
        }
    }
    out
}

fn escapes(setup: &HyperbolicSetup, z: ComplexValue) -> bool {
    let mut u = z;
    for _ in 0..8 {
        if (u / setup.m).re > 700.0 {
            return true;
        }
        let w = setup.g(u);
        if !(w.norm() > u.norm()) || !(w.norm() > setup.r) {
            return false;
        }
        if !w.norm().is_finite() || w.norm() > 1e20 {
            return true;
        }
        u = w;
    }
    true
}
