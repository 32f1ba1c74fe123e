//! Oracles that do not share code paths with the library under test.

use std::path::PathBuf;

/// Path of a file in the core crate's `fixtures/` directory.
pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

// Central finite-difference weights for offsets 1..=4 (antisymmetric) or
// 0..=4 (symmetric), from the Fornberg tables.
const D1_8: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2_8: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];
const D3_6: [f64; 4] = [-61.0 / 30.0, 169.0 / 120.0, -3.0 / 10.0, 7.0 / 240.0];

/// Steps used for the first, second and third derivative.
pub const FD_STEPS: [f64; 3] = [1e-4, 1e-3, 5e-3];

/// First three derivatives of `f` at `x` by 9-point central differences
/// (8th order for f' and f'', 6th order for f''').
pub fn central_derivatives<F: Fn(f64) -> f64>(f: F, x: f64) -> [f64; 3] {
    let odd = |w: &[f64; 4], h: f64| -> f64 {
        w.iter().enumerate().map(|(k, c)| {
            let s = (k + 1) as f64 * h;
            c * (f(x + s) - f(x - s))
        }).sum()
    };
    let [h1, h2, h3] = FD_STEPS;
    let d1 = odd(&D1_8, h1) / h1;
    let d2 = (D2_8[0] * f(x)
        + D2_8[1..].iter().enumerate().map(|(k, c)| {
            let s = (k + 1) as f64 * h2;
            c * (f(x + s) + f(x - s))
        }).sum::<f64>())
        / (h2 * h2);
    let d3 = odd(&D3_6, h3) / (h3 * h3 * h3);
    [d1, d2, d3]
}

/// |got − want| / max(|want|, 1).
pub fn scaled_error(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(1.0)
}

/// Schwarzian F'''/F' − 1.5 (F''/F')² from plain derivative values.
pub fn schwarzian(d: [f64; 3]) -> f64 {
    let q = d[1] / d[0];
    d[2] / d[0] - 1.5 * q * q
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_polynomials_and_sine() {
        let d = central_derivatives(|x| x.powi(3), 0.7);
        assert!((d[0] - 3.0 * 0.49).abs() < 1e-10);
        assert!((d[1] - 4.2).abs() < 1e-7);
        assert!((d[2] - 6.0).abs() < 1e-8);
        let d = central_derivatives(f64::sin, 0.3);
        assert!((d[0] - 0.3_f64.cos()).abs() < 1e-11);
        assert!((d[1] + 0.3_f64.sin()).abs() < 1e-9);
        assert!((d[2] + 0.3_f64.cos()).abs() < 1e-9);
    }

    #[test]
    fn fixture_exists() {
        assert!(fixture("appendix1.csv").is_file());
    }
}
