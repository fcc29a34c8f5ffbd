//! The lattice bubble ∫_{[−π,π]^d} (λ(k)+m²)⁻² dk/(2π)^d, λ(k) = Σ(2 − 2cos k_i).

use crate::error::{Error, Result};
use crate::quad::Legendre;

/// e^{−x} I₀(x) for x ≥ 0.
pub fn bessel_i0e(x: f64) -> f64 {
    if x <= 30.0 {
        let q = 0.25 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while term > 1e-17 * sum {
            term *= q / (k * k);
            sum += term;
            k += 1.0;
        }
        sum * (-x).exp()
    } else {
        // asymptotic series Σ ((2k−1)!!)² / (k! (8x)^k)
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..30 {
            let kf = k as f64;
            let next = term * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        sum / (2.0 * std::f64::consts::PI * x).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleValue {
    pub value: f64,
    /// B·m^{4−d} for d < 4, B / log m⁻² for d = 4, B for d > 4.
    pub normalised: f64,
}

/// B = ∫₀^∞ t e^{−tm²} (e^{−2t}I₀(2t))^d dt, integrated in log t.
pub fn euclid_bubble(m2: f64, d: usize) -> Result<BubbleValue> {
    if d == 0 {
        return Err(Error::InvalidParam("d must be positive".into()));
    }
    if !(m2 > 0.0) {
        if d > 4 && m2 == 0.0 {
            return euclid_bubble_massless(d);
        }
        return Err(Error::BubbleDiverges);
    }
    let rule = Legendre::new(32);
    let smin = -30.0f64;
    let smax = (60.0 / m2).ln();
    let panels = ((smax - smin) * 4.0).ceil() as usize;
    let value = rule.integrate_panels(smin, smax, panels, |s| {
        let t = s.exp();
        t * t * (-t * m2).exp() * bessel_i0e(2.0 * t).powi(d as i32)
    });
    let normalised = match d {
        4 => value / (1.0 / m2).ln(),
        d if d < 4 => value * m2.powf((4.0 - d as f64) / 2.0),
        _ => value,
    };
    Ok(BubbleValue { value, normalised })
}

fn euclid_bubble_massless(d: usize) -> Result<BubbleValue> {
    let rule = Legendre::new(32);
    // the integrand decays like t^{1−d/2}; add the tail analytically
    let smax = 30.0f64;
    let panels = ((smax + 30.0) * 4.0) as usize;
    let head = rule.integrate_panels(-30.0, smax, panels, |s| {
        let t = s.exp();
        t * t * bessel_i0e(2.0 * t).powi(d as i32)
    });
    let tm = smax.exp();
    let c = (4.0 * std::f64::consts::PI).powf(-(d as f64) / 2.0);
    let tail = c * tm.powf(2.0 - d as f64 / 2.0) / (d as f64 / 2.0 - 2.0);
    let value = head + tail;
    Ok(BubbleValue { value, normalised: value })
}

/// Tensor trapezoid rule on the torus of momenta, for checking.
pub fn euclid_bubble_tensor(m2: f64, d: usize, points: usize) -> f64 {
    let h = 2.0 * std::f64::consts::PI / points as f64;
    let lam1: Vec<f64> = (0..points).map(|i| 2.0 - 2.0 * (h * i as f64).cos()).collect();
    let total = points.pow(d as u32);
    let mut acc = 0.0;
    for idx in 0..total {
        let mut l = m2;
        let mut r = idx;
        for _ in 0..d {
            l += lam1[r % points];
            r /= points;
        }
        acc += 1.0 / (l * l);
    }
    acc / total as f64
}
