//! Fixtures shared by the benchmarks.

use tractlab_core::catalog::{EntireMapSpec, LogLiftModel};
use tractlab_core::complex::{c, ComplexValue};
use tractlab_core::conjugacy::OrbitSeed;
use tractlab_core::orbits::Window;
use tractlab_core::render::RenderSpec;
use tractlab_core::samples::periodic_samples;

pub const KAPPA: ComplexValue = ComplexValue::new(0.3, 0.2);
pub const Q: f64 = 2.0;

pub fn shifted_exp() -> LogLiftModel {
    LogLiftModel::shifted_exp(10.0).expect("R = 10 is valid")
}

/// Periodic cycles of `e^z - 10` with period at most 3.
pub fn cycles(count: usize) -> Vec<OrbitSeed> {
    periodic_samples(&shifted_exp(), count, 3, (-5, 5), Q, 2024).expect("samples exist")
}

/// `e^z + kappa` on `[-4, 4]^2`.
pub fn render_spec(side: usize) -> RenderSpec {
    RenderSpec {
        map: EntireMapSpec::ExpPlusKappa { kappa: c(1.0038, 2.8999) },
        window: Window { re_min: -4.0, re_max: 4.0, im_min: -4.0, im_max: 4.0 },
        resolution: (side, side),
        escape_radius: 50.0,
        horizon: 30,
    }
}
