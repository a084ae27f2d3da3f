//! Airy function Ai and its derivative on the real line.
//!
//! Maclaurin series for x < 7, Poincaré asymptotic expansion for x ≥ 7
//! (truncated at its smallest term, relative error below 1e-10 there).

use std::f64::consts::PI;

/// Ai(0) = 3^(-2/3) / Γ(2/3)
const AI0: f64 = 0.355_028_053_887_817_2;
/// -Ai'(0) = 3^(-1/3) / Γ(1/3)
const NEG_AIP0: f64 = 0.258_819_403_792_806_8;

const ASYMPTOTIC_FROM: f64 = 7.0;
const MAX_TERMS: usize = 200;

/// Returns `(Ai(x), Ai'(x))`.
pub fn airy_ai(x: f64) -> (f64, f64) {
    if x >= ASYMPTOTIC_FROM {
        asymptotic(x)
    } else {
        series(x)
    }
}

fn series(x: f64) -> (f64, f64) {
    let x3 = x * x * x;
    // f = Σ t_k, g = Σ u_k, with f', g' from their own recurrences.
    let (mut f, mut g) = (1.0, x);
    let (mut df, mut dg) = (0.0, 1.0);
    let (mut t, mut u) = (1.0, x);
    let (mut p, mut r) = (x * x / 2.0, 1.0);
    df += p;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        t *= x3 / ((3.0 * kf - 1.0) * (3.0 * kf));
        u *= x3 / ((3.0 * kf) * (3.0 * kf + 1.0));
        r *= x3 / ((3.0 * kf) * (3.0 * kf - 2.0));
        f += t;
        g += u;
        dg += r;
        if k >= 2 {
            p *= x3 / ((3.0 * (kf - 1.0)) * (3.0 * kf - 1.0));
            df += p;
        }
        let scale = f.abs() + g.abs() + 1.0;
        if t.abs() + u.abs() + r.abs() + p.abs() < 1e-17 * scale {
            break;
        }
    }
    (AI0 * f - NEG_AIP0 * g, AI0 * df - NEG_AIP0 * dg)
}

fn asymptotic(x: f64) -> (f64, f64) {
    let zeta = 2.0 / 3.0 * x * x.sqrt();
    let (mut sum_u, mut sum_v) = (1.0, 1.0);
    let mut u = 1.0f64;
    let mut zpow = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..MAX_TERMS {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let v = -(6.0 * kf + 1.0) / (6.0 * kf - 1.0) * u;
        zpow *= -zeta;
        let term_u = u / zpow;
        if term_u.abs() >= last || term_u.abs() < 1e-17 {
            break;
        }
        last = term_u.abs();
        sum_u += term_u;
        sum_v += v / zpow;
    }
    let e = (-zeta).exp() / (2.0 * PI.sqrt());
    let x4 = x.powf(0.25);
    (e / x4 * sum_u, -e * x4 * sum_v)
}

/// ∫ₓ^∞ Ai(t) dt for x ≥ 7, by composite Simpson on the asymptotic branch.
pub(crate) fn airy_tail_integral(x: f64) -> f64 {
    assert!(x >= ASYMPTOTIC_FROM, "tail integral needs the asymptotic regime");
    // Ai decays like exp(-2/3 t^1.5); 12 units past x leaves < 1e-30.
    let span = 12.0;
    let panels = 24_000usize;
    let h = span / panels as f64;
    let mut acc = airy_ai(x).0 + airy_ai(x + span).0;
    for i in 1..panels {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * airy_ai(x + i as f64 * h).0;
    }
    acc * h / 3.0
}

/// ∫ₓ^∞ Ai(t)² dt = Ai'(x)² − x·Ai(x)².
pub(crate) fn airy_sq_tail_integral(x: f64) -> f64 {
    let (a, ap) = airy_ai(x);
    ap * ap - x * a * a
}

/// ∫ₓ^∞ (t − x)·Ai(t)² dt = ⅔x²Ai² − ⅔x·Ai'² − ⅓Ai·Ai'.
pub(crate) fn airy_weighted_sq_tail_integral(x: f64) -> f64 {
    let (a, ap) = airy_ai(x);
    2.0 / 3.0 * x * x * a * a - 2.0 / 3.0 * x * ap * ap - a * ap / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values: 30-digit evaluations.
    const REFERENCE: &[(f64, f64, f64)] = &[
        (0.0, 0.355_028_053_887_817_24, -0.258_819_403_792_806_8),
        (1.0, 0.135_292_416_312_881_42, -0.159_147_441_296_793_21),
        (-2.0, 0.227_407_428_201_685_58, 0.618_259_020_741_691_04),
        (-5.0, 0.350_761_009_024_114_32, 0.327_192_818_554_443_14),
        (3.0, 6.591_139_357_460_719_1e-3, -1.191_297_670_595_131_8e-2),
        (6.5, 2.795_882_343_204_913_6e-6, -7.231_931_466_601_792_6e-6),
        (7.0, 7.492_128_863_997_167_1e-7, -2.008_150_894_738_792e-6),
        (8.0, 4.692_207_616_099_231_6e-8, -1.341_439_297_906_786_6e-7),
        (10.0, 1.104_753_255_289_868_6e-10, -3.520_633_676_738_923_6e-10),
    ];

    #[test]
    fn matches_reference_values() {
        for &(x, ai, aip) in REFERENCE {
            let (a, ap) = airy_ai(x);
            // Absolute accuracy on the series branch, relative on the asymptotic one.
            let tol = if x >= ASYMPTOTIC_FROM { 1e-10 * ai.abs() } else { 1e-12 };
            assert!((a - ai).abs() <= tol, "Ai({x}) = {a}, want {ai}");
            let tol = if x >= ASYMPTOTIC_FROM { 1e-10 * aip.abs() } else { 1e-11 };
            assert!((ap - aip).abs() <= tol, "Ai'({x}) = {ap}, want {aip}");
        }
    }

    #[test]
    fn tail_integrals_at_eight() {
        let w = airy_tail_integral(8.0);
        assert!((w / 1.609_084_975_913_270_7e-8 - 1.0).abs() < 1e-9, "{w}");
        let u = airy_sq_tail_integral(8.0);
        assert!((u / 3.811_440_496_228_176e-16 - 1.0).abs() < 1e-6, "{u}");
        let v = airy_weighted_sq_tail_integral(8.0);
        assert!((v / 6.533_563_206_931_611_5e-17 - 1.0).abs() < 1e-3, "{v}");
    }

    #[test]
    fn satisfies_airy_equation() {
        // Ai'' = x Ai, checked by central differences of Ai'.
        for &x in &[-3.0, 0.5, 2.0, 5.0, 9.0] {
            let h = 1e-5;
            let d2 = (airy_ai(x + h).1 - airy_ai(x - h).1) / (2.0 * h);
            let a = airy_ai(x).0;
            assert!((d2 - x * a).abs() < 1e-8 * (1.0 + (x * a).abs()), "x = {x}");
        }
    }
}
