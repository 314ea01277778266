//! Matched filter bound: BER with every interfering term removed and all
//! path energy combined coherently, for QPSK over `P` Rayleigh paths of
//! power `1/P` each.

mod special;

pub use special::{gauss_2f1, hyp2f1_series, ln_gamma, ln_hyp2f1_pfaff, MAX_SERIES_TERMS};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::rng::complex_normal;

/// How the combined gain `g = Σ|h_p|^2` enters the received sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GainModel {
    /// `y = √g x + z`: instantaneous SNR `g · SNR`. Consistent with the
    /// closed form.
    #[default]
    MatchedFilter,
    /// `y = g x + z`: instantaneous SNR `g^2 · SNR`.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfbQuery {
    pub paths: usize,
    /// Linear `Es/N0`.
    pub snr: f64,
    /// Symbols simulated by the Monte Carlo estimator.
    pub trials: u64,
    #[serde(default)]
    pub model: GainModel,
}

impl MfbQuery {
    pub fn new(paths: usize, snr: f64, trials: u64) -> Result<Self> {
        if paths == 0 {
            return Err(Error::InvalidParameter("MFB needs at least one path".into()));
        }
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidParameter(format!("SNR {snr} must be positive")));
        }
        Ok(Self {
            paths,
            snr,
            trials,
            model: GainModel::MatchedFilter,
        })
    }

    pub fn with_model(mut self, model: GainModel) -> Self {
        self.model = model;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MfbEstimate {
    pub ber: f64,
    /// Binomial standard error `sqrt(ber (1 - ber) / bits)`.
    pub stderr: f64,
    pub bit_errors: u64,
    pub bits: u64,
}

/// Monte Carlo bound: draw `g`, send a random symbol, slice, count bit errors.
pub fn mfb_monte_carlo<R: Rng + ?Sized>(
    q: &MfbQuery,
    constellation: &Constellation,
    rng: &mut R,
) -> Result<MfbEstimate> {
    if q.trials == 0 {
        return Err(Error::InvalidParameter("Monte Carlo needs at least one trial".into()));
    }
    let n0 = 1.0 / q.snr;
    let path_var = 1.0 / q.paths as f64;
    let size = constellation.len();
    let mut errors = 0u64;
    for _ in 0..q.trials {
        let mut g = 0.0;
        for _ in 0..q.paths {
            g += complex_normal(rng, path_var).norm_sqr();
        }
        let amp = match q.model {
            GainModel::MatchedFilter => g.sqrt(),
            GainModel::Literal => g,
        };
        let sent = rng.random_range(0..size);
        let z = complex_normal(rng, n0);
        let y = constellation.point(sent) * amp + z;
        // coherent receiver: removing the real gain does not move the decision
        let got = constellation.nearest(y / amp);
        errors += u64::from(constellation.bit_distance(sent, got));
    }
    let bits = q.trials * constellation.bits_per_symbol() as u64;
    let ber = errors as f64 / bits as f64;
    Ok(MfbEstimate {
        ber,
        stderr: (ber * (1.0 - ber) / bits as f64).sqrt(),
        bit_errors: errors,
        bits,
    })
}

/// Closed-form bound for QPSK:
///
/// `1/(2√π) · Γ(P+1/2)/Γ(P+1) · (2P/SNR)^P · 2F1(P, P+1/2; P+1; -2P/SNR)`,
///
/// evaluated in the log domain.
pub fn mfb_closed_form(paths: usize, snr: f64) -> Result<f64> {
    if paths == 0 {
        return Err(Error::InvalidParameter("MFB needs at least one path".into()));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidParameter(format!("SNR {snr} must be positive")));
    }
    let p = paths as f64;
    let x = 2.0 * p / snr;
    let (a, b, c, z) = (p, p + 0.5, p + 1.0, -x);
    let ln_f = ln_hyp2f1_pfaff(a, b, c, z)?;
    let ln_mfb = -(2.0 * std::f64::consts::PI.sqrt()).ln() + ln_gamma(p + 0.5) - ln_gamma(p + 1.0) + p * x.ln() + ln_f;
    Ok(ln_mfb.exp())
}

/// Fixed-gain QPSK bit error probability `Q(sqrt(g · SNR))`.
pub fn qpsk_awgn_ber(snr: f64) -> f64 {
    0.5 * erfc((snr / 2.0).sqrt())
}

/// Complementary error function (Numerical Recipes `erfcc`, relative error
/// below 1.2e-7).
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t
        * (-z * z - 1.265_512_23
            + t * (1.000_023_68
                + t * (0.374_091_96
                    + t * (0.096_784_18
                        + t * (-0.186_288_06
                            + t * (0.278_868_07
                                + t * (-1.135_203_98
                                    + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77)))))))))
            .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}
