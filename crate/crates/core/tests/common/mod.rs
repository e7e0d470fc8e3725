#![allow(dead_code)]

use lognls::{Grid, GridFunction};
use num_complex::Complex64;
use rand::Rng;

/// A sum of 1–4 Gaussian packets with random centres, widths, carrier
/// wavenumbers and complex amplitudes; the overall amplitude spans
/// `10^[-log_span, log_span]`. Vanishes at the Dirichlet ends to roundoff.
pub fn random_smooth(grid: Grid, rng: &mut impl Rng, log_span: f64) -> GridFunction {
    let scale = 10f64.powf(rng.gen_range(-log_span..=log_span));
    let count = rng.gen_range(1..=4);
    let reach = 0.4 * grid.half_width();
    let packets: Vec<(f64, f64, f64, Complex64)> = (0..count)
        .map(|_| {
            (
                rng.gen_range(-reach..reach),
                rng.gen_range(0.3..2.0),
                rng.gen_range(-2.0..2.0),
                Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
            )
        })
        .collect();
    GridFunction::sample(grid, |x| {
        scale
            * packets
                .iter()
                .map(|&(c, w, k, a)| a * Complex64::cis(k * x) * (-0.5 * ((x - c) / w).powi(2)).exp())
                .sum::<Complex64>()
    })
    .with_dirichlet()
}

/// Real, positive-leaning variant for inequalities stated on real `f`.
pub fn random_real(grid: Grid, rng: &mut impl Rng, log_span: f64) -> GridFunction {
    let u = random_smooth(grid, rng, log_span);
    u.map(|z| Complex64::new(z.norm(), 0.0))
}
