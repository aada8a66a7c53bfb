//! Gauss-Kronrod panel rules (nodes and weights from QUADPACK).

/// A symmetric Gauss-Kronrod pair on [-1, 1].
///
/// `xgk` lists the non-negative Kronrod nodes in decreasing order, the last
/// being the centre 0. Entries at odd indices are the embedded Gauss nodes.
#[derive(Debug)]
pub(crate) struct KronrodRule {
    pub gauss_points: usize,
    xgk: &'static [f64],
    wgk: &'static [f64],
    /// Gauss weights, matched to `xgk[1], xgk[3], ...` and, for odd Gauss
    /// orders, the centre as the final entry.
    wg: &'static [f64],
}

const XGK15: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK15: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG7: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const XGK21: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK21: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_532_425,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG10: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

pub(crate) static GK15: KronrodRule = KronrodRule {
    gauss_points: 7,
    xgk: &XGK15,
    wgk: &WGK15,
    wg: &WG7,
};

pub(crate) static GK21: KronrodRule = KronrodRule {
    gauss_points: 10,
    xgk: &XGK21,
    wgk: &WGK21,
    wg: &WG10,
};

/// Result of applying a rule to one panel.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PanelEstimate {
    pub value: f64,
    pub error: f64,
    /// The error estimate sits at the rounding floor of the panel.
    pub roundoff_floor: bool,
    pub bad_x: Option<f64>,
}

impl KronrodRule {
    pub fn by_order(order: usize) -> Option<&'static KronrodRule> {
        match order {
            7 => Some(&GK15),
            10 => Some(&GK21),
            _ => None,
        }
    }

    pub fn evaluations(&self) -> usize {
        2 * self.xgk.len() - 1
    }

    /// Kronrod nodes and weights on [-1, 1], for the rule-exactness tests.
    #[cfg(test)]
    pub fn kronrod_nodes(&self) -> Vec<(f64, f64)> {
        let last = self.xgk.len() - 1;
        let mut out = Vec::with_capacity(2 * last + 1);
        for j in 0..last {
            out.push((-self.xgk[j], self.wgk[j]));
            out.push((self.xgk[j], self.wgk[j]));
        }
        out.push((0.0, self.wgk[last]));
        out
    }

    #[cfg(test)]
    pub fn gauss_nodes(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for (k, j) in (1..self.xgk.len()).step_by(2).enumerate() {
            if j == self.xgk.len() - 1 {
                break;
            }
            out.push((-self.xgk[j], self.wg[k]));
            out.push((self.xgk[j], self.wg[k]));
        }
        if self.gauss_points % 2 == 1 {
            out.push((0.0, self.wg[self.wg.len() - 1]));
        }
        out
    }

    /// QUADPACK-style panel evaluation with the scaled error estimate.
    pub fn apply(&self, f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> PanelEstimate {
        let centre = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let last = self.xgk.len() - 1;
        let odd_gauss = self.gauss_points % 2 == 1;

        let mut bad_x = None;
        let mut eval = |x: f64| {
            let y = f(x);
            if !y.is_finite() && bad_x.is_none() {
                bad_x = Some(x);
            }
            y
        };

        let fc = eval(centre);
        let mut resk = fc * self.wgk[last];
        let mut resg = if odd_gauss {
            fc * self.wg[self.wg.len() - 1]
        } else {
            0.0
        };
        let mut resabs = resk.abs();
        let mut fv1 = [0.0; 16];
        let mut fv2 = [0.0; 16];
        for j in 0..last {
            let dx = half * self.xgk[j];
            let f1 = eval(centre - dx);
            let f2 = eval(centre + dx);
            fv1[j] = f1;
            fv2[j] = f2;
            resk += self.wgk[j] * (f1 + f2);
            resabs += self.wgk[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                resg += self.wg[j / 2] * (f1 + f2);
            }
        }
        let reskh = 0.5 * resk;
        let mut resasc = self.wgk[last] * (fc - reskh).abs();
        for j in 0..last {
            resasc += self.wgk[j] * ((fv1[j] - reskh).abs() + (fv2[j] - reskh).abs());
        }

        let scale = half.abs();
        let value = resk * half;
        resabs *= scale;
        resasc *= scale;
        let mut error = ((resk - resg) * half).abs();
        if resasc != 0.0 && error != 0.0 {
            error = resasc * (200.0 * error / resasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * resabs;
        let mut roundoff_floor = false;
        if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && floor >= error {
            error = floor;
            roundoff_floor = true;
        }
        PanelEstimate {
            value,
            error,
            roundoff_floor,
            bad_x,
        }
    }
}
