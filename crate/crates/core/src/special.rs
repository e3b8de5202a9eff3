//! Cylindrical Bessel/Hankel functions and the 2D free-space Green's function.
//!
//! `J0`, `Y0`, `J1`, `Y1` are evaluated by piecewise Chebyshev expansions of
//! their analytic parts plus the large-argument asymptotic series (relative
//! error well below 1e-10 for the range used here, `x` up to ~1e4). Hankel
//! functions of the first kind combine them as `H = J + iY`, which matches
//! outgoing waves under the `exp(-i w t)` time convention.
//!
//! The Green's function carries the `i/4` constant so that
//! `(lap + k^2) g = -delta` holds exactly; downstream quadratures then need
//! no compensating prefactors.

use crate::{Error, Point, Result};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, PI};

const TWO_OVER_PI: f64 = 2.0 / PI;
const SQ2OPI: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)

/// Small/mid range split: Chebyshev tables below, phase-factored tables above.
const X_SMALL: f64 = 13.0;
/// Mid/large split: plain asymptotic series above (optimal truncation is
/// far below f64 precision there).
const X_MID: f64 = 45.0;
const W_MIN: f64 = X_SMALL / X_MID;

/// Clenshaw evaluation of a Chebyshev series at t in [-1, 1].
#[inline]
fn clenshaw(coef: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &a in coef[1..].iter().rev() {
        let b0 = 2.0 * t * b1 - b2 + a;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + coef[0]
}

// Chebyshev coefficients generated from a 50-digit reference evaluation.
// Small range (x <= 13): expansions in t = 2 (x/13)^2 - 1 of the
// even-analytic parts; the lnx terms of Y0/Y1 are added back explicitly.
// Mid range (13 < x <= 45): expansions in the scaled reciprocal argument of
// the slowly-varying complex factor F with
// H_nu(x) = sqrt(2/(pi x)) e^{i(x - nu pi/2 - pi/4)} F_nu(x).
const CHEB_J0: [f64; 22] = [
    0.067649203852651389409,
    -0.047334292039027605513,
    0.18902689016684758962,
    -0.0024987686865259268703,
    0.15103308191064368667,
    -0.27910218195108067219,
    0.17989589562004664047,
    -0.06488685603605832444,
    0.015501665058963544974,
    -0.0026777045593695878432,
    0.00035315550584181763528,
    -0.000036921745081642217382,
    3.1456441411631181136e-6,
    -2.2310221227881343862e-7,
    1.3398407384332700108e-8,
    -6.9089245101201570622e-10,
    3.0948354523733756202e-11,
    -1.2162933195274686354e-12,
    4.2298238900188988369e-14,
    -1.3113652459848793648e-15,
    3.6482943379547215678e-17,
    -9.1611262941013450871e-19,
];
const CHEB_Y0R: [f64; 22] = [
    -0.037250041078942712941,
    -0.24913493849393029739,
    -0.11849962899486094547,
    -0.21659317564791184584,
    0.1475484510871859243,
    0.19771710430306269795,
    -0.21153976507160012594,
    0.092223024647303312276,
    -0.024565810478181279993,
    0.0045714841929066959025,
    -0.00063764963425553039224,
    0.000069708558419594959405,
    -6.1628888292549036889e-6,
    4.511033087715549179e-7,
    -2.7844809156084423393e-8,
    1.4710925310850907718e-9,
    -6.7344770409886053075e-11,
    2.6992446473759963651e-12,
    -9.5568847883012603768e-14,
    3.0121518554990677527e-15,
    -8.5086865064796974979e-17,
    2.1670765784694640918e-18,
];
const CHEB_J1X: [f64; 21] = [
    0.045658174936082596083,
    -0.10362813221443831545,
    0.089075673325939033325,
    -0.085732095275565170866,
    0.088720818601225292231,
    -0.057134115268816070431,
    0.022661130565466553251,
    -0.006039423021702231717,
    0.001160160518015274147,
    -0.00016896998162136261426,
    0.000019363309289769267035,
    -1.7957776725732011056e-6,
    1.3778522358870413809e-7,
    -8.9028941610156682509e-9,
    4.9155449404971431912e-10,
    -2.3476249505239777132e-11,
    9.7997262106411352664e-13,
    -3.60756647787073459e-14,
    1.1803639295825537837e-15,
    -3.456181049897711236e-17,
    9.1116396301731352384e-19,
];
const CHEB_Y1R: [f64; 21] = [
    0.012632336131438826923,
    0.0049672604553821369189,
    -0.013912649251558105688,
    0.017570840076806273701,
    -0.065608028838074057109,
    0.064132187545728679379,
    -0.030953014993504513135,
    0.0092756733582227319697,
    -0.0019313243837059125094,
    0.00029877459246831024516,
    -0.000035914518078605352988,
    3.4645455964360046919e-6,
    -2.7485012249096618523e-7,
    1.8280270441991942408e-8,
    -1.0353370263010919839e-9,
    5.0583226683535154094e-11,
    -2.1552212605043172352e-12,
    8.0833480357406522253e-14,
    -2.690408032118654139e-15,
    8.0029437052860173985e-17,
    -2.140946437456481949e-18,
];
const CHEB_A0: [f64; 12] = [
    0.99980220077214672775,
    -0.00018887654327320736143,
    -0.000025672442226540926057,
    1.0644531461940128454e-7,
    6.5067910415117736354e-9,
    -1.2818995925048484528e-10,
    -3.4367183320553026405e-12,
    2.302536640118149146e-13,
    -8.2449367613860313685e-16,
    -4.4949649000392804778e-16,
    2.0494335581979548279e-17,
    3.9391731231223502212e-19,
];
const CHEB_B0: [f64; 12] = [
    -0.0061837614385392646827,
    -0.0034031760130003828269,
    3.9605429835349887056e-6,
    3.4707104681083610726e-7,
    -3.4466794405982592144e-9,
    -1.4629858069211020102e-10,
    5.2645796392458236573e-12,
    6.3037347034959821092e-14,
    -1.0317255148980754753e-14,
    2.2288505061762233785e-16,
    1.7206308571160522143e-17,
    -1.4997937135169647607e-18,
];
const CHEB_A1: [f64; 13] = [
    1.0003301531293451057,
    0.00031547027777707300209,
    0.000043023493184670561893,
    -1.3758763191823483559e-7,
    -8.4967285942231191412e-9,
    1.5298690156805176744e-10,
    4.2227329689752823581e-12,
    -2.6516644635368803164e-13,
    6.7451570488047787171e-16,
    5.1047395177677550204e-16,
    -2.2357849313658217002e-17,
    -4.691907888001773888e-19,
    1.0376200021147630581e-19,
];
const CHEB_B1: [f64; 12] = [
    0.018571764929132027515,
    0.010234485514808530107,
    -5.5645563434176699119e-6,
    -4.9066247473384701317e-7,
    4.2438251097490250808e-9,
    1.8313716493082697281e-10,
    -6.1515275033868979417e-12,
    -7.9156679036552693599e-14,
    1.1769538433865847899e-14,
    -2.3920286489722535667e-16,
    -1.9615307448706696065e-17,
    1.6426447010417614544e-18,
];

/// Asymptotic Hankel evaluation for x > X_MID, truncated at the smallest
/// term (which is far below 1e-20 there).
fn hankel_asymptotic(nu: f64, x: f64) -> Complex64 {
    let mut sum = Complex64::new(1.0, 0.0);
    let mut a = 1.0;
    let mut prev = f64::INFINITY;
    let mut ipow = Complex64::new(1.0, 0.0);
    for k in 1..40u32 {
        let kf = k as f64;
        a *= (4.0 * nu * nu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        let mag = (a / x.powi(k as i32)).abs();
        if mag > prev {
            break;
        }
        prev = mag;
        ipow *= Complex64::new(0.0, 1.0);
        sum += ipow * a / x.powi(k as i32);
        if mag < 1e-20 {
            break;
        }
    }
    let phase = x - nu * std::f64::consts::FRAC_PI_2 - FRAC_PI_4;
    SQ2OPI / x.sqrt() * Complex64::new(0.0, phase).exp() * sum
}

fn hankel_mid(a: &[f64], b: &[f64], nu: f64, x: f64) -> Complex64 {
    let w = X_SMALL / x;
    let u = (2.0 * w - (1.0 + W_MIN)) / (1.0 - W_MIN);
    let f = Complex64::new(clenshaw(a, u), clenshaw(b, u));
    let phase = x - nu * std::f64::consts::FRAC_PI_2 - FRAC_PI_4;
    SQ2OPI / x.sqrt() * Complex64::new(0.0, phase).exp() * f
}

/// Bessel function of the first kind, order zero, for x >= 0.
pub fn bessel_j0(x: f64) -> f64 {
    let x = x.abs();
    if x <= X_SMALL {
        clenshaw(&CHEB_J0, 2.0 * (x / X_SMALL).powi(2) - 1.0)
    } else if x <= X_MID {
        hankel_mid(&CHEB_A0, &CHEB_B0, 0.0, x).re
    } else {
        hankel_asymptotic(0.0, x).re
    }
}

/// Bessel function of the second kind, order zero. Requires x > 0.
pub fn bessel_y0(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= X_SMALL {
        let t = 2.0 * (x / X_SMALL).powi(2) - 1.0;
        clenshaw(&CHEB_Y0R, t) + TWO_OVER_PI * x.ln() * clenshaw(&CHEB_J0, t)
    } else if x <= X_MID {
        hankel_mid(&CHEB_A0, &CHEB_B0, 0.0, x).im
    } else {
        hankel_asymptotic(0.0, x).im
    }
}

/// Bessel function of the first kind, order one.
pub fn bessel_j1(x: f64) -> f64 {
    let sign = if x < 0.0 { -1.0 } else { 1.0 };
    let x = x.abs();
    sign * if x <= X_SMALL {
        x * clenshaw(&CHEB_J1X, 2.0 * (x / X_SMALL).powi(2) - 1.0)
    } else if x <= X_MID {
        hankel_mid(&CHEB_A1, &CHEB_B1, 1.0, x).re
    } else {
        hankel_asymptotic(1.0, x).re
    }
}

/// Bessel function of the second kind, order one. Requires x > 0.
pub fn bessel_y1(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= X_SMALL {
        let t = 2.0 * (x / X_SMALL).powi(2) - 1.0;
        x * clenshaw(&CHEB_Y1R, t)
            + TWO_OVER_PI * (x.ln() * x * clenshaw(&CHEB_J1X, t) - 1.0 / x)
    } else if x <= X_MID {
        hankel_mid(&CHEB_A1, &CHEB_B1, 1.0, x).im
    } else {
        hankel_asymptotic(1.0, x).im
    }
}

// --- Hankel / Green ----------------------------------------------------

/// Zero-order Hankel function of the first kind, `H0 = J0 + i Y0`.
///
/// Errors for `x <= 0` where `Y0` is singular or undefined.
pub fn hankel1_0(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "hankel1_0 requires x > 0, got {x}"
        )));
    }
    Ok(Complex64::new(bessel_j0(x), bessel_y0(x)))
}

/// First-order Hankel function of the first kind, `H1 = J1 + i Y1`.
///
/// Satisfies `d/dx H0(x) = -H1(x)`.
pub fn hankel1_1(x: f64) -> Result<Complex64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "hankel1_1 requires x > 0, got {x}"
        )));
    }
    Ok(Complex64::new(bessel_j1(x), bessel_y1(x)))
}

/// Outgoing 2D Helmholtz Green's function `(i/4) H0(k |r - rp|)`.
///
/// Depends only on the separation, so it is symmetric in its point
/// arguments. Coincident points are a domain error.
pub fn green2d(k: f64, r: Point, rp: Point) -> Result<Complex64> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!("green2d requires k > 0, got {k}")));
    }
    let d = r.dist(rp);
    if d == 0.0 {
        return Err(Error::Domain(
            "green2d is singular at coincident points".into(),
        ));
    }
    let h = hankel1_0(k * d)?;
    Ok(Complex64::new(0.0, 0.25) * h)
}

/// Gradient of [`green2d`] with respect to its second argument `rp`.
///
/// `grad_rp g = -(i k / 4) H1(k |r - rp|) * unit(rp - r)`; dotting with a
/// boundary normal at `rp` gives the normal derivative of the Green's
/// function on the curve.
pub fn green2d_grad(k: f64, r: Point, rp: Point) -> Result<[Complex64; 2]> {
    if !(k > 0.0) {
        return Err(Error::Domain(format!(
            "green2d_grad requires k > 0, got {k}"
        )));
    }
    let d = r.dist(rp);
    if d == 0.0 {
        return Err(Error::Domain(
            "green2d_grad is singular at coincident points".into(),
        ));
    }
    let h1 = hankel1_1(k * d)?;
    let scale = Complex64::new(0.0, -0.25 * k) * h1 / d;
    Ok([scale * (rp.x - r.x), scale * (rp.z - r.z)])
}

/// Normal derivative of [`green2d`] at boundary point `rp` with unit
/// outward normal `n`: `n . grad_rp g`.
pub fn green2d_dn(k: f64, r: Point, rp: Point, n: Point) -> Result<Complex64> {
    let g = green2d_grad(k, r, rp)?;
    Ok(g[0] * n.x + g[1] * n.z)
}
