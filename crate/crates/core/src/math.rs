//! Scalar helpers shared by the numerical modules: `libm` wrappers, special
//! functions, compensated summation and fixed quadrature rules.

pub(crate) fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

pub(crate) fn powi(x: f64, n: usize) -> f64 {
    let mut acc = 1.0;
    for _ in 0..n {
        acc *= x;
    }
    acc
}

#[cfg(test)]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

pub(crate) fn sin(x: f64) -> f64 {
    libm::sin(x)
}

/// Gamma function.
pub fn gamma(x: f64) -> f64 {
    libm::tgamma(x)
}

/// Euler Beta function `B(a, b) = Γ(a)Γ(b)/Γ(a+b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> f64 {
    if a + b < 170.0 {
        gamma(a) * gamma(b) / gamma(a + b)
    } else {
        libm::exp(libm::lgamma(a) + libm::lgamma(b) - libm::lgamma(a + b))
    }
}

/// Binomial coefficient for small arguments.
pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

/// Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Compensated sum of an iterator of terms.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for t in terms {
        acc.add(t);
    }
    acc.value()
}

/// Compensated dot product.
pub fn compensated_dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

// 24-point Gauss-Legendre rule on [-1, 1], positive half (node, weight).
const GAUSS_LEGENDRE_24: [(f64, f64); 12] = [
    (0.995_187_219_997_021_360_2, 0.012_341_229_799_987_199_547),
    (0.974_728_555_971_309_498_2, 0.028_531_388_628_933_663_181),
    (0.938_274_552_002_732_758_5, 0.044_277_438_817_419_806_169),
    (0.886_415_527_004_401_034_2, 0.059_298_584_915_436_780_746),
    (0.820_001_985_973_902_921_9, 0.073_346_481_411_080_305_734),
    (0.740_124_191_578_554_364_2, 0.086_190_161_531_953_275_917),
    (0.648_093_651_936_975_569_2, 0.097_618_652_104_113_888_27),
    (0.545_421_471_388_839_535_6, 0.107_444_270_115_965_634_78),
    (0.433_793_507_626_045_138_4, 0.115_505_668_053_725_601_35),
    (0.315_042_679_696_163_374_3, 0.121_670_472_927_803_391_2),
    (0.191_118_867_473_616_309_1, 0.125_837_456_346_828_296_12),
    (0.064_056_892_862_605_626_08, 0.127_938_195_346_752_156_97),
];

/// Nodes and weights of the 24-point Gauss-Legendre rule mapped to `[a, b]`.
pub(crate) fn gauss_legendre_24(a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS_LEGENDRE_24.iter().flat_map(move |&(x, w)| {
        [(mid - half * x, half * w), (mid + half * x, half * w)]
    })
}

const KRONROD_15_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_838_258_730,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const KRONROD_15_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

// Gauss 7-point weights for Kronrod nodes 1, 3, 5 (symmetric) and 7 (center).
const GAUSS_7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One application of the G7/K15 pair: returns (Kronrod estimate, error
/// estimate). The error is `|K - G|` rescaled as in QUADPACK's `qk15`.
pub(crate) fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(mid);
    let mut kronrod = KRONROD_15_WEIGHTS[7] * fc;
    let mut gauss = GAUSS_7_WEIGHTS[3] * fc;
    let mut abs_sum = KRONROD_15_WEIGHTS[7] * fc.abs();
    let mut pairs = [(0.0, 0.0); 7];
    for i in 0..7 {
        let dx = half * KRONROD_15_NODES[i];
        let (f1, f2) = (f(mid - dx), f(mid + dx));
        pairs[i] = (f1, f2);
        kronrod += KRONROD_15_WEIGHTS[i] * (f1 + f2);
        abs_sum += KRONROD_15_WEIGHTS[i] * (f1.abs() + f2.abs());
        if i % 2 == 1 {
            gauss += GAUSS_7_WEIGHTS[i / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = KRONROD_15_WEIGHTS[7] * (fc - mean).abs();
    for (i, (f1, f2)) in pairs.iter().enumerate() {
        asc += KRONROD_15_WEIGHTS[i] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let half_abs = half.abs();
    let (abs_sum, asc) = (abs_sum * half_abs, asc * half_abs);
    let mut err = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && err != 0.0 {
        err = asc * libm::pow(200.0 * err / asc, 1.5).min(1.0);
    }
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * abs_sum);
    }
    (kronrod * half, err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_degree_47() {
        for p in [0usize, 1, 7, 30, 47] {
            let q: f64 = gauss_legendre_24(0.0, 1.0).map(|(x, w)| w * powi(x, p)).sum();
            assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-15, "p = {p}: {q}");
        }
    }

    #[test]
    fn kronrod_integrates_smooth_functions() {
        let (v, err) = gauss_kronrod_15(&|x: f64| libm::exp(x), 0.0, 1.0);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-15);
        assert!(err < 1e-10);
    }

    #[test]
    fn beta_matches_known_values() {
        assert!((beta(4.0, 0.5) - 32.0 / 35.0).abs() < 1e-14);
        assert!((beta(1.0, 1.0) - 1.0).abs() < 1e-15);
        assert!((gamma(0.5) - sqrt(core::f64::consts::PI)).abs() < 1e-14);
    }

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let s = compensated_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(s, 2.0);
    }
}
