use crate::state::C64;

/// Evaluates `φ_k(z)` for `k ≤ 3`.
///
/// `φ_0 = exp`, `φ_{k+1}(z) = (φ_k(z) - 1/k!) / z`. Small arguments use the Taylor series
/// `φ_k(z) = Σ_m z^m / (m + k)!`, larger ones the recurrence started from a complex `expm1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiEvaluator {
    pub taylor_cutoff: f64,
    pub taylor_terms: usize,
}

impl Default for PhiEvaluator {
    fn default() -> Self {
        PhiEvaluator { taylor_cutoff: 0.1, taylor_terms: 12 }
    }
}

const INV_FACT: [f64; 4] = [1.0, 1.0, 0.5, 1.0 / 6.0];

impl PhiEvaluator {
    pub const MAX_K: usize = 3;

    /// `φ_k(z)`. Panics if `k > 3`.
    pub fn eval(&self, k: usize, z: C64) -> C64 {
        assert!(k <= Self::MAX_K, "phi is implemented for k <= 3");
        if k == 0 {
            return z.exp();
        }
        if z.norm() <= self.taylor_cutoff {
            self.taylor(k, z)
        } else {
            self.recurrence(k, z)
        }
    }

    /// `[φ_0(z), φ_1(z), φ_2(z), φ_3(z)]`.
    pub fn eval_all(&self, z: C64) -> [C64; 4] {
        if z.norm() <= self.taylor_cutoff {
            [z.exp(), self.taylor(1, z), self.taylor(2, z), self.taylor(3, z)]
        } else {
            let p1 = expm1(z) / z;
            let p2 = (p1 - 1.0) / z;
            let p3 = (p2 - 0.5) / z;
            [z.exp(), p1, p2, p3]
        }
    }

    /// Truncated Taylor series, summed from the highest power down.
    pub fn taylor(&self, k: usize, z: C64) -> C64 {
        // coefficient of z^m is 1/(m+k)!
        let mut coef = vec![0.0; self.taylor_terms];
        let mut c = INV_FACT[k.min(3)];
        for kk in 4..=k {
            c /= kk as f64;
        }
        for (m, slot) in coef.iter_mut().enumerate() {
            if m > 0 {
                c /= (m + k) as f64;
            }
            *slot = c;
        }
        coef.iter().rev().fold(C64::new(0.0, 0.0), |acc, &a| acc * z + a)
    }

    /// The recurrence branch, valid for `z != 0`.
    pub fn recurrence(&self, k: usize, z: C64) -> C64 {
        if k == 0 {
            return z.exp();
        }
        let mut p = expm1(z) / z;
        for j in 1..k {
            p = (p - INV_FACT[j]) / z;
        }
        p
    }
}

/// `φ_k(z)` with the default evaluator.
pub fn phi(k: usize, z: C64) -> C64 {
    PhiEvaluator::default().eval(k, z)
}

/// `e^z - 1` without cancellation near zero.
fn expm1(z: C64) -> C64 {
    let (x, y) = (z.re, z.im);
    if y == 0.0 {
        return C64::new(x.exp_m1(), 0.0);
    }
    let s = (0.5 * y).sin();
    C64::new(x.exp_m1() * y.cos() - 2.0 * s * s, x.exp() * y.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64, y: f64) -> C64 {
        C64::new(x, y)
    }

    // φ_k(z) = 1/(k-1)! ∫_0^1 e^{(1-s) z} s^{k-1} ds, by composite Gauss-Legendre.
    fn quad(k: usize, z: C64) -> C64 {
        let nodes = [
            -0.906_179_845_938_664,
            -0.538_469_310_105_683,
            0.0,
            0.538_469_310_105_683,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.236_926_885_056_189,
            0.478_628_670_499_366,
            0.568_888_888_888_889,
            0.478_628_670_499_366,
            0.236_926_885_056_189,
        ];
        let panels = 4000;
        let h = 1.0 / panels as f64;
        let mut acc = c(0.0, 0.0);
        for p in 0..panels {
            let mid = (p as f64 + 0.5) * h;
            for (x, w) in nodes.iter().zip(weights) {
                let s = mid + 0.5 * h * x;
                acc += ((1.0 - s) * z).exp() * s.powi(k as i32 - 1) * (0.5 * h * w);
            }
        }
        let fact = [1.0, 1.0, 1.0, 2.0][k];
        acc / fact
    }

    #[test]
    fn spot_values() {
        assert_eq!(phi(1, c(0.0, 0.0)), c(1.0, 0.0));
        assert_eq!(phi(2, c(0.0, 0.0)), c(0.5, 0.0));
        assert!((phi(1, c(1.0, 0.0)).re - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        let v = phi(1, c(-1000.0, 0.0));
        assert!((v.re - 1.0e-3).abs() < 1e-18 && v.im == 0.0);
    }

    #[test]
    fn matches_quadrature_oracle() {
        let zs = [
            c(0.05, 0.02),
            c(-0.3, 0.0),
            c(0.7, -1.1),
            c(-2.5, 3.0),
            c(-12.0, 0.5),
            c(4.0, 0.0),
            c(0.0, 6.0),
        ];
        for z in zs {
            for k in 1..=3 {
                let a = phi(k, z);
                let b = quad(k, z);
                assert!((a - b).norm() <= 1e-12 * b.norm(), "k={k} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn frozen_high_precision_values() {
        // 30-digit values computed offline with an arbitrary-precision library.
        let cases: [(usize, C64, C64); 6] = [
            (3, c(0.15, 0.0), c(0.173_108_956_528_332_63, 0.0)),
            (3, c(-50.0, 0.0), c(0.009_608, 0.0)),
            (2, c(-30.0, 20.0), c(0.022_781_065_088_757_347, 0.014_674_556_213_017_804)),
            (1, c(1e-9, 0.0), c(1.000_000_000_5, 0.0)),
            (3, c(0.1, 0.1), c(0.170_830_475_198_637_2, 0.004_336_110_096_781_339_3)),
            (2, c(-0.1000001, 0.0), c(0.483_741_787_738_170_16, 0.0)),
        ];
        for (k, z, want) in cases {
            let got = phi(k, z);
            assert!((got - want).norm() <= 1e-13 * want.norm(), "k={k} z={z}: {got} vs {want}");
        }
    }

    #[test]
    fn seam_agreement() {
        let e = PhiEvaluator::default();
        for i in 0..64 {
            let ang = i as f64 * std::f64::consts::TAU / 64.0;
            for r in [0.099, 0.1, 0.101] {
                let z = C64::from_polar(r, ang);
                for k in 1..=3 {
                    let t = e.taylor(k, z);
                    let q = e.recurrence(k, z);
                    assert!((t - q).norm() <= 1e-12 * t.norm(), "k={k} z={z}");
                }
            }
        }
    }

    #[test]
    fn eval_all_consistent() {
        let e = PhiEvaluator::default();
        for z in [c(0.01, 0.0), c(-3.0, 0.2), c(-1e8, 0.0)] {
            let all = e.eval_all(z);
            for k in 0..=3 {
                assert!((all[k] - e.eval(k, z)).norm() <= 1e-15 * (1.0 + all[k].norm()));
            }
        }
    }
}
