//! Loss-cause estimators from related end-to-end schemes: Westwood
//! bandwidth sampling and filtering, Vegas backlog, the Veno threshold
//! rule and JTCP inter-arrival jitter. Pure formulas, no protocol state.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum EstimatorError {
    #[error("ACK interval must be positive (got {0} s)")]
    NonPositiveInterval(f64),
    #[error("filter factor {0} outside [0, 1]")]
    FilterFactorOutOfRange(f64),
    #[error("base RTT must be positive (got {0} s)")]
    NonPositiveBaseRtt(f64),
    #[error("actual RTT {actual} below base RTT {base}")]
    RttBelowBase { base: f64, actual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WestwoodSample {
    pub packet_size: f64,
    pub current_time: f64,
    pub prev_ack_time: f64,
}

/// Bandwidth sample: bytes acknowledged over the inter-ACK interval.
pub fn westwood_sbw(w: WestwoodSample) -> Result<f64, EstimatorError> {
    let dt = w.current_time - w.prev_ack_time;
    if dt > 0.0 {
        Ok(w.packet_size / dt)
    } else {
        Err(EstimatorError::NonPositiveInterval(dt))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WestwoodFilter {
    pub sbw: f64,
    pub sbw_prev: f64,
    pub bwe_prev: f64,
    /// Low-pass factor; 0 passes the two-sample mean, 1 holds the old estimate.
    pub t: f64,
}

pub fn westwood_bwe(f: WestwoodFilter) -> Result<f64, EstimatorError> {
    if !(0.0..=1.0).contains(&f.t) {
        return Err(EstimatorError::FilterFactorOutOfRange(f.t));
    }
    Ok((1.0 - f.t) * (f.sbw + f.sbw_prev) / 2.0 + f.t * f.bwe_prev)
}

/// Running Westwood estimate over a stream of bandwidth samples.
///
/// Both the previous sample and the previous estimate start at the first
/// sample seen.
#[derive(Debug, Clone)]
pub struct WestwoodEstimator {
    t: f64,
    last: Option<(f64, f64)>,
}

impl WestwoodEstimator {
    pub fn new(t: f64) -> Result<Self, EstimatorError> {
        if !(0.0..=1.0).contains(&t) {
            return Err(EstimatorError::FilterFactorOutOfRange(t));
        }
        Ok(WestwoodEstimator { t, last: None })
    }

    /// Feeds one sample and returns the updated estimate.
    pub fn update(&mut self, sbw: f64) -> f64 {
        let (sbw_prev, bwe_prev) = self.last.unwrap_or((sbw, sbw));
        let bwe = westwood_bwe(WestwoodFilter {
            sbw,
            sbw_prev,
            bwe_prev,
            t: self.t,
        })
        .expect("t validated at construction");
        self.last = Some((sbw, bwe));
        bwe
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VegasSample {
    pub cwnd: f64,
    pub base_rtt: f64,
    pub actual_rtt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VegasResult {
    pub expected: f64,
    pub actual: f64,
    pub diff: f64,
    /// Estimated backlog in cwnd units.
    pub n: f64,
}

impl VegasResult {
    /// Backlog computed from the actual rate and the extra delay; agrees
    /// with [`VegasResult::n`] up to rounding.
    pub fn n_from_delay(&self, v: &VegasSample) -> f64 {
        self.actual * (v.actual_rtt - v.base_rtt)
    }
}

pub fn vegas_backlog(v: VegasSample) -> Result<VegasResult, EstimatorError> {
    if v.base_rtt.is_nan() || v.base_rtt <= 0.0 {
        return Err(EstimatorError::NonPositiveBaseRtt(v.base_rtt));
    }
    if v.actual_rtt < v.base_rtt {
        return Err(EstimatorError::RttBelowBase {
            base: v.base_rtt,
            actual: v.actual_rtt,
        });
    }
    let expected = v.cwnd / v.base_rtt;
    let actual = v.cwnd / v.actual_rtt;
    let diff = expected - actual;
    Ok(VegasResult {
        expected,
        actual,
        diff,
        n: diff * v.base_rtt,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossClass {
    CongestionLoss,
    ErrorLoss,
}

impl LossClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LossClass::CongestionLoss => "congestion",
            LossClass::ErrorLoss => "error",
        }
    }
}

/// Veno rule: a backlog strictly above `thres` means congestion.
pub fn veno_classify(n: f64, thres: f64) -> LossClass {
    if n > thres {
        LossClass::CongestionLoss
    } else {
        LossClass::ErrorLoss
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterPair {
    pub s_i: f64,
    pub r_i: f64,
    pub s_j: f64,
    pub r_j: f64,
}

/// Change in receive spacing relative to send spacing, `(R_j - R_i) - (S_j - S_i)`.
pub fn jtcp_jitter(p: JitterPair) -> f64 {
    (p.r_j - p.r_i) - (p.s_j - p.s_i)
}
