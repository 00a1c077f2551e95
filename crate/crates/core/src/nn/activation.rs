//! Elementwise hyperbolic tangent.
//!
//! Written as straight-line arithmetic so the loop over a slice vectorizes;
//! agrees with `libm::tanh` to within a few ulps.

const LN2_HI: f64 = 6.931_471_803_691_238e-1;
const LN2_LO: f64 = 1.908_214_929_270_587_7e-10;
const INV_LN2: f64 = core::f64::consts::LOG2_E;
// 1.5·2⁵²: adding it rounds to an integer held in the low mantissa bits.
const SHIFTER: f64 = 6_755_399_441_055_744.0;

#[inline(always)]
pub(crate) fn tanh(x: f64) -> f64 {
    // tanh(20) rounds to 1.
    let a = x.abs().min(20.0);
    let y = 2.0 * a;
    let shifted = y * INV_LN2 + SHIFTER;
    let k = shifted - SHIFTER;
    let r = (y - k * LN2_HI) - k * LN2_LO;
    // expm1(r) for |r| ≤ ln2/2, Taylor series through r¹³.
    let mut q = 1.0 / 6_227_020_800.0;
    q = q * r + 1.0 / 479_001_600.0;
    q = q * r + 1.0 / 39_916_800.0;
    q = q * r + 1.0 / 3_628_800.0;
    q = q * r + 1.0 / 362_880.0;
    q = q * r + 1.0 / 40_320.0;
    q = q * r + 1.0 / 5_040.0;
    q = q * r + 1.0 / 720.0;
    q = q * r + 1.0 / 120.0;
    q = q * r + 1.0 / 24.0;
    q = q * r + 1.0 / 6.0;
    q = q * r + 0.5;
    q = q * r * r + r;
    let scale = f64::from_bits(shifted.to_bits().wrapping_add(1023) << 52);
    // e^y − 1 = 2^k·expm1(r) + (2^k − 1), free of cancellation for y ≥ 0.
    let em1 = scale * q + (scale - 1.0);
    (em1 / (em1 + 2.0)).copysign(x)
}

pub(crate) fn tanh_in_place(values: &mut [f64]) {
    for v in values {
        *v = tanh(*v);
    }
}
