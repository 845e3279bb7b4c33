#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use satfront::{Grid, GridField, GrowthLaw};

/// Maximum of a few random tents, clamped to `[0, 1]`. Amplitudes above one
/// produce saturated plateaus. The support stays inside `B_support`.
pub fn random_lipschitz(rng: &mut ChaCha8Rng, grid: Grid, support: f64) -> GridField {
    let bumps: Vec<([f64; 2], f64, f64)> = (0..rng.random_range(1..=4))
        .map(|_| {
            let w = rng.random_range(0.2..0.6) * support;
            let reach = (support - w).max(0.0);
            let mut c = [rng.random_range(-reach..=reach), 0.0];
            if grid.dim() == 2 {
                c[1] = rng.random_range(-reach..=reach);
                let n = c[0].hypot(c[1]);
                if n > reach && n > 0.0 {
                    c = [c[0] * reach / n, c[1] * reach / n];
                }
            }
            (c, w, rng.random_range(0.2..1.8))
        })
        .collect();
    GridField::from_fn(grid, |x| {
        bumps
            .iter()
            .map(|&(c, w, a)| a * (1.0 - (x[0] - c[0]).hypot(x[1] - c[1]) / w).max(0.0))
            .fold(0.0, f64::max)
            .min(1.0)
    })
    .unwrap()
}

pub fn random_capped_growth(rng: &mut ChaCha8Rng) -> GrowthLaw {
    if rng.random_bool(0.5) {
        GrowthLaw::linear(rng.random_range(0.5..2.0)).unwrap()
    } else {
        GrowthLaw::logistic(rng.random_range(0.5..2.0), rng.random_range(2.0..6.0)).unwrap()
    }
}
