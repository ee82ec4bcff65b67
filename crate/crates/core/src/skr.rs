//! Secret-key-rate arithmetic: mutual information, Holevo bound,
//! reconciliation-efficiency bounds and the two-step key rate.
//!
//! Rates are per quadrature use: `I_AB = log2(1 + SNR) / 2`, matching one
//! BPSK code bit per real sample. Multiply by 2 for rates per complex
//! symbol.
//!
//! # Holevo bound
//!
//! Collective attack, reverse reconciliation, homodyne detection with
//! trusted detector noise. With `V = V_A + 1`,
//! `chi_line = 1/T - 1 + xi`, `chi_hom = (1 - eta + v_el) / eta` and
//! `chi_tot = chi_line + chi_hom / T`:
//!
//! ```text
//! A = V^2 (1 - 2T) + 2T + T^2 (V + chi_line)^2
//! B = T^2 (V chi_line + 1)^2
//! l1,2^2 = (A +- sqrt(A^2 - 4B)) / 2
//! C = (A chi_hom + V sqrt(B) + T (V + chi_line)) / (T (V + chi_tot))
//! D = sqrt(B) (V + sqrt(B) chi_hom) / (T (V + chi_tot))
//! l3,4^2 = (C +- sqrt(C^2 - 4D)) / 2
//! chi_BE = g(l1) + g(l2) - g(l3) - g(l4)
//! ```

use serde::Serialize;

use crate::channel::{effective_snr, transmittance, LinkParams};
use crate::error::{Error, Result};

/// Tolerance below 1 accepted for a symplectic eigenvalue.
pub const SYMPLECTIC_TOLERANCE: f64 = 1e-9;

/// A bound that may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    /// No finite bound exists (FER = 1, or a lossless channel).
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<f64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }
}

fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{p} is not in [0, 1]")))
    }
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`, with `h(0) = h(1) = 0`.
pub fn binary_entropy(p: f64) -> Result<f64> {
    check_probability("p", p)?;
    if p == 0.0 || p == 1.0 {
        return Ok(0.0);
    }
    Ok(-p * p.log2() - (1.0 - p) * (1.0 - p).log2())
}

/// `I_AB = log2(1 + snr) / 2` per quadrature use.
pub fn mutual_info_awgn(snr: f64) -> f64 {
    0.5 * snr.ln_1p() / std::f64::consts::LN_2
}

/// `g(nu) = ((nu+1)/2) log2((nu+1)/2) - ((nu-1)/2) log2((nu-1)/2)`,
/// the von Neumann entropy of a thermal mode with symplectic eigenvalue
/// `nu >= 1`. Values within [`SYMPLECTIC_TOLERANCE`] below 1 count as 1.
pub fn g(nu: f64) -> Result<f64> {
    if !(nu >= 1.0 - SYMPLECTIC_TOLERANCE) {
        return Err(Error::param(
            "symplectic eigenvalue",
            format!("{nu} < 1: covariance matrix is not physical"),
        ));
    }
    if nu <= 1.0 {
        return Ok(0.0);
    }
    let a = (nu + 1.0) / 2.0;
    let b = (nu - 1.0) / 2.0;
    Ok(a * a.log2() - b * b.log2())
}

/// Symplectic eigenvalues of the two-mode and conditional states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolevoTerms {
    pub lambda: [f64; 4],
    pub chi_be: f64,
}

/// Roots `x1 >= x2` of `x^2 - s x + p = 0`, as square roots.
fn symplectic_pair(s: f64, p: f64) -> [f64; 2] {
    let disc = (s * s - 4.0 * p).max(0.0).sqrt();
    let hi = 0.5 * (s + disc);
    // product form avoids cancellation in the smaller root
    let lo = if hi > 0.0 { p / hi } else { 0.0 };
    [hi.max(0.0).sqrt(), lo.max(0.0).sqrt()]
}

/// Holevo bound `chi_BE` with its symplectic eigenvalues.
pub fn holevo_terms(link: &LinkParams) -> Result<HolevoTerms> {
    link.validate()?;
    let t = link.transmittance();
    if !(t > 0.0) {
        return Err(Error::param("distance_km", "transmittance underflows to zero"));
    }
    let eta = link.quantum_efficiency;
    let v = link.modulation_variance + 1.0;
    let chi_line = 1.0 / t - 1.0 + link.excess_noise;
    let chi_hom = (1.0 - eta + link.electronic_noise) / eta;
    let chi_tot = chi_line + chi_hom / t;

    let a = v * v * (1.0 - 2.0 * t) + 2.0 * t + t * t * (v + chi_line).powi(2);
    let b = t * t * (v * chi_line + 1.0).powi(2);
    let [l1, l2] = symplectic_pair(a, b);
    let sb = b.sqrt();
    let c = (a * chi_hom + v * sb + t * (v + chi_line)) / (t * (v + chi_tot));
    let d = sb * (v + sb * chi_hom) / (t * (v + chi_tot));
    let [l3, l4] = symplectic_pair(c, d);
    let chi_be = g(l1)? + g(l2)? - g(l3)? - g(l4)?;
    Ok(HolevoTerms {
        lambda: [l1, l2, l3, l4],
        chi_be,
    })
}

/// Holevo bound on Eve's information, bits per quadrature use.
pub fn holevo_gaussian(link: &LinkParams) -> Result<f64> {
    holevo_terms(link).map(|h| h.chi_be)
}

/// `SKR = (1 - FER)(beta I_AB - chi_BE)`. May be negative.
pub fn skr_single(beta: f64, fer: f64, i_ab: f64, chi_be: f64) -> f64 {
    (1.0 - fer) * (beta * i_ab - chi_be)
}

/// Inputs of the two-step key rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoStepInputs {
    pub afr: f64,
    pub fer_h: f64,
    pub beta_l: f64,
    pub beta_h: f64,
    pub ber_af: f64,
    pub i_ab: f64,
    pub chi_be: f64,
}

/// Two-step rate breakdown.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SkrReport {
    pub beta_l: f64,
    pub beta_h: f64,
    pub beta_t: f64,
    pub afr: f64,
    pub fer_l: f64,
    pub fer_h: f64,
    pub fer_t: f64,
    pub ber_af: f64,
    pub i_ab: f64,
    pub chi_be: f64,
    /// Single-step rate of stage 1 alone, `(1 - FER_l)(beta_l I_AB - chi)`.
    pub skr: f64,
    /// Two-step rate, compact form.
    pub skr_t: f64,
    /// Two-step rate from the key-consumption bookkeeping.
    pub skr_t_explicit: f64,
    /// One-time-pad key spent per transmitted code bit.
    pub key_consumed: f64,
}

impl SkrReport {
    /// Relative disagreement of the two key-rate forms, scaled by the
    /// largest magnitude entering either form.
    pub fn form_mismatch(&self) -> f64 {
        let scale = [
            self.skr_t.abs(),
            self.skr_t_explicit.abs(),
            self.afr * self.beta_l * self.i_ab,
            self.afr * self.chi_be,
        ]
        .into_iter()
        .fold(f64::MIN_POSITIVE, f64::max);
        (self.skr_t - self.skr_t_explicit).abs() / scale
    }
}

/// Two-step key rate, computed both from the key-consumption bookkeeping
/// and in the compact form `(1 - FER_t)(beta_t I_AB - chi_BE)`.
///
/// Bookkeeping: per transmitted code bit, `AFR beta_l I_AB` bits enter
/// stage 2, the syndrome costs `1 - R_h` of them with
/// `R_h = beta_h (1 - h(BER_AF))`, and the stage-2 frame succeeds with
/// probability `1 - FER_h`.
pub fn skr_two_step(inp: &TwoStepInputs) -> Result<SkrReport> {
    check_probability("afr", inp.afr)?;
    check_probability("fer_h", inp.fer_h)?;
    let h = binary_entropy(inp.ber_af)?;
    let ok_h = 1.0 - inp.fer_h;
    let r_h = inp.beta_h * (1.0 - h);
    let stage2_bits = inp.afr * inp.beta_l * inp.i_ab;
    let key_consumed = stage2_bits * (1.0 - r_h);
    let skr_t_explicit = ok_h * (inp.afr * (inp.beta_l * inp.i_ab - inp.chi_be) - key_consumed);

    let beta_t = inp.beta_l * inp.beta_h * (1.0 - h);
    // 1 - FER_t taken directly: forming FER_t first cancels badly at small AFR
    let success = inp.afr * ok_h;
    let fer_t = 1.0 - success;
    let skr_t = success * (beta_t * inp.i_ab - inp.chi_be);

    let fer_l = 1.0 - inp.afr;
    let report = SkrReport {
        beta_l: inp.beta_l,
        beta_h: inp.beta_h,
        beta_t,
        afr: inp.afr,
        fer_l,
        fer_h: inp.fer_h,
        fer_t,
        ber_af: inp.ber_af,
        i_ab: inp.i_ab,
        chi_be: inp.chi_be,
        skr: skr_single(inp.beta_l, fer_l, inp.i_ab, inp.chi_be),
        skr_t,
        skr_t_explicit,
        key_consumed,
    };
    debug_assert!(report.form_mismatch() <= 1e-12, "{report:?}");
    Ok(report)
}

/// `beta <= 1 / (1 - FER)`.
pub fn beta_bound(fer: f64) -> Result<Bound> {
    check_probability("fer", fer)?;
    if fer == 1.0 {
        return Ok(Bound::Unbounded);
    }
    Ok(Bound::Finite(1.0 / (1.0 - fer)))
}

/// Repeaterless bound `-log2(1 - T)`.
pub fn plob(distance_km: f64, attenuation_db_per_km: f64) -> Result<Bound> {
    if !(distance_km >= 0.0) || !(attenuation_db_per_km >= 0.0) {
        return Err(Error::param("distance_km", "distance and attenuation must be >= 0"));
    }
    let t = transmittance(distance_km, attenuation_db_per_km);
    if t >= 1.0 {
        return Ok(Bound::Unbounded);
    }
    Ok(Bound::Finite(-(-t).ln_1p() / std::f64::consts::LN_2))
}

/// `min(1 / (1 - FER), 1 / I_AB)` over a FER grid: the efficiency ceiling
/// from the FER bound combined with `R <= 1`.
pub fn fer_beta_curve(i_ab: f64, fer_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(i_ab > 0.0) {
        return Err(Error::param("i_ab", "must be > 0"));
    }
    let cap = 1.0 / i_ab;
    fer_grid
        .iter()
        .map(|&fer| {
            if !(0.0..1.0).contains(&fer) {
                return Err(Error::param("fer", format!("{fer} is not in [0, 1)")));
            }
            Ok((fer, (1.0 / (1.0 - fer)).min(cap)))
        })
        .collect()
}

/// Key rate of a link at a given efficiency and success probability,
/// `success (beta I_AB - chi_BE)`.
pub fn link_skr(link: &LinkParams, beta: f64, success: f64) -> Result<f64> {
    let i_ab = mutual_info_awgn(effective_snr(link));
    let chi = holevo_gaussian(link)?;
    Ok(success * (beta * i_ab - chi))
}

/// Result of a modulation-variance search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Optimum {
    pub modulation_variance: f64,
    pub skr: f64,
}

/// Maximises [`link_skr`] over `V_A` in `[lo, hi]` by golden-section
/// search on a log scale. Assumes a single interior maximum, which holds
/// for the Gaussian-modulation rate at fixed efficiency.
pub fn optimize_modulation_variance(
    link: &LinkParams,
    beta: f64,
    success: f64,
    lo: f64,
    hi: f64,
) -> Result<Optimum> {
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::param("modulation_variance range", "need 0 < lo < hi"));
    }
    let f = |log_va: f64| link_skr(&link.with_modulation_variance(log_va.exp()), beta, success);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    for _ in 0..200 {
        if (b - a).abs() < 1e-10 {
            break;
        }
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    // the endpoints may beat the interior when the optimum sits on a bound
    let mut best = Optimum {
        modulation_variance: (0.5 * (a + b)).exp(),
        skr: f(0.5 * (a + b))?,
    };
    for edge in [lo, hi] {
        let v = f(edge.ln())?;
        if v > best.skr {
            best = Optimum {
                modulation_variance: edge,
                skr: v,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn paper_link() -> LinkParams {
        LinkParams::default()
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        // 0.11 log2(1/0.11) + 0.89 log2(1/0.89)
        let direct = 0.11 * (1.0f64 / 0.11).log2() + 0.89 * (1.0f64 / 0.89).log2();
        assert!((binary_entropy(0.11).unwrap() - direct).abs() < 1e-15);
        assert!((binary_entropy(0.11).unwrap() - 0.49992).abs() < 1e-5);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.5).is_err());
    }

    #[test]
    fn awgn_information() {
        assert_eq!(mutual_info_awgn(0.0), 0.0);
        assert!((mutual_info_awgn(3.0) - 1.0).abs() < 1e-15);
        assert!((mutual_info_awgn(1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn g_function() {
        assert_eq!(g(1.0).unwrap(), 0.0);
        assert_eq!(g(1.0 - 1e-12).unwrap(), 0.0);
        assert!(g(0.9).is_err());
        // g(3) = 2 log2 2 - 1 log2 1 = 2
        assert!((g(3.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn lossless_noiseless_channel_leaks_nothing() {
        let link = LinkParams {
            distance_km: 0.0,
            excess_noise: 0.0,
            ..paper_link()
        };
        assert!(holevo_gaussian(&link).unwrap().abs() < 1e-9);
    }

    #[test]
    fn holevo_monotone_in_excess_noise() {
        let mut last = f64::NEG_INFINITY;
        for xi in [0.0, 0.001, 0.01, 0.05, 0.1] {
            let chi = holevo_gaussian(&LinkParams {
                excess_noise: xi,
                ..paper_link()
            })
            .unwrap();
            assert!(chi >= last);
            last = chi;
        }
    }

    #[test]
    fn devetak_winter_positive_at_short_range() {
        let link = paper_link().with_distance(10.0);
        assert!(link_skr(&link, 1.0, 1.0).unwrap() > 0.0);
    }

    #[test]
    fn single_step_examples() {
        assert_eq!(skr_single(1.3, 1.0, 0.2, 0.1), 0.0);
        let v = skr_single(1.09, 0.9999, 0.1, 0.05);
        assert!((v - 5.9e-6).abs() < 1e-15);
        assert_eq!(skr_single(1.0, 0.0, 0.3, 0.1), 0.3 - 0.1);
    }

    #[test]
    fn two_step_examples() {
        let base = TwoStepInputs {
            afr: 0.003,
            fer_h: 0.0,
            beta_l: 1.6,
            beta_h: 1.0,
            ber_af: 0.0,
            i_ab: 0.05,
            chi_be: 0.06,
        };
        let r = skr_two_step(&base).unwrap();
        assert!((r.skr_t - 0.003 * (1.6 * 0.05 - 0.06)).abs() < 1e-15);
        assert!((1.0 - r.fer_t - 0.003).abs() < 1e-15);

        let r = skr_two_step(&TwoStepInputs { ber_af: 0.01, ..base }).unwrap();
        assert!((r.beta_t - 1.6 * (1.0 - binary_entropy(0.01).unwrap())).abs() < 1e-15);
        assert!((r.beta_t - 1.4707).abs() < 1e-4);
        assert!(r.form_mismatch() < 1e-12);
    }

    #[test]
    fn beyond_capacity_beats_devetak_winter() {
        // fixed witness: beta_t ~ 1.47 at AFR 0.5 against beta = 1, FER = 0
        let inp = TwoStepInputs {
            afr: 0.5,
            fer_h: 0.0,
            beta_l: 1.6,
            beta_h: 1.0,
            ber_af: 0.01,
            i_ab: 0.1,
            chi_be: 0.095,
        };
        let r = skr_two_step(&inp).unwrap();
        assert!(r.beta_t > 1.0);
        assert!(r.skr_t > skr_single(1.0, 0.0, 0.1, 0.095));
    }

    #[test]
    fn bounds() {
        assert_eq!(beta_bound(0.0).unwrap(), Bound::Finite(1.0));
        let b = beta_bound(0.9).unwrap().finite().unwrap();
        assert!((b - 10.0).abs() < 1e-12);
        assert_eq!(beta_bound(1.0).unwrap(), Bound::Unbounded);
        assert!(beta_bound(1.1).is_err());

        let p50 = plob(50.0, 0.2).unwrap().finite().unwrap();
        assert!((p50 - 0.152003).abs() < 1e-6);
        let p100 = plob(100.0, 0.2).unwrap().finite().unwrap();
        assert!((p100 - 0.014500).abs() < 1e-6);
        assert_eq!(plob(10.0, 0.0).unwrap(), Bound::Unbounded);
        assert_eq!(plob(0.0, 0.2).unwrap(), Bound::Unbounded);
    }

    #[test]
    fn fer_curve_ceiling() {
        let curve = fer_beta_curve(0.02, &[0.0, 0.5, 0.99, 0.999]).unwrap();
        assert_eq!(curve[0].1, 1.0);
        assert_eq!(curve[1].1, 2.0);
        assert_eq!(curve[3].1, 50.0);
        assert!(fer_beta_curve(0.1, &[1.0]).is_err());
        assert!(fer_beta_curve(0.0, &[0.1]).is_err());
    }

    #[test]
    fn optimizer_finds_interior_maximum() {
        let link = paper_link().with_distance(20.0);
        let opt = optimize_modulation_variance(&link, 0.95, 1.0, 0.1, 100.0).unwrap();
        for va in [0.5, 2.0, 5.0, 20.0, 60.0] {
            let v = link_skr(&link.with_modulation_variance(va), 0.95, 1.0).unwrap();
            assert!(opt.skr >= v - 1e-12, "V_A = {va}");
        }
    }
}
