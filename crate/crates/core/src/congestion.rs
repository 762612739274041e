//! Window-based congestion controllers.
//!
//! Both controllers share the same growth rule: one segment per
//! acknowledgment, capped by the receiver window, which doubles the window
//! every fully acknowledged round trip. They differ only on timeout:
//! the halve-on-timeout baseline always halves, while the SNR scheme
//! halves only when the link is wired or the wireless SNR is at or above
//! the threshold, and otherwise keeps the window and just retransmits.

use thiserror::Error;

use crate::header::LinkMode;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum CongestionError {
    #[error("signal and noise power must be positive (got signal={signal}, noise={noise})")]
    NonPositivePower { signal: f64, noise: f64 },
    #[error("wireless timeout decision needs an SNR measurement")]
    MissingSnr,
    #[error("invalid window: cwnd={cwnd}, mss={mss}, rwnd={rwnd}")]
    InvalidWindow { cwnd: u64, mss: u64, rwnd: u64 },
    #[error("SNR threshold must be finite")]
    NonFiniteThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrMeasure {
    pub p_signal: f64,
    pub p_noise: f64,
}

impl SnrMeasure {
    pub fn new(p_signal: f64, p_noise: f64) -> Result<Self, CongestionError> {
        if p_signal > 0.0 && p_noise > 0.0 {
            Ok(SnrMeasure { p_signal, p_noise })
        } else {
            Err(CongestionError::NonPositivePower {
                signal: p_signal,
                noise: p_noise,
            })
        }
    }
}

pub fn snr_linear(m: SnrMeasure) -> Result<f64, CongestionError> {
    if m.p_noise > 0.0 {
        Ok(m.p_signal / m.p_noise)
    } else {
        Err(CongestionError::NonPositivePower {
            signal: m.p_signal,
            noise: m.p_noise,
        })
    }
}

pub fn snr_db(m: SnrMeasure) -> Result<f64, CongestionError> {
    if m.p_signal > 0.0 && m.p_noise > 0.0 {
        Ok(10.0 * (m.p_signal / m.p_noise).log10())
    } else {
        Err(CongestionError::NonPositivePower {
            signal: m.p_signal,
            noise: m.p_noise,
        })
    }
}

/// SNR (dB) at or above which a wireless timeout is treated as congestion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrThreshold(f64);

impl SnrThreshold {
    pub const DEFAULT_DB: f64 = 5.0;

    pub fn new(threshold_db: f64) -> Result<Self, CongestionError> {
        if threshold_db.is_finite() {
            Ok(SnrThreshold(threshold_db))
        } else {
            Err(CongestionError::NonFiniteThreshold)
        }
    }

    pub fn db(self) -> f64 {
        self.0
    }
}

impl Default for SnrThreshold {
    fn default() -> Self {
        SnrThreshold(Self::DEFAULT_DB)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeoutDecision {
    HalveWindow,
    RetransmitSameWindow,
}

/// Sender window state. All sizes are bytes.
///
/// Invariant: `mss <= cwnd <= rwnd`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CongestionState {
    cwnd: u64,
    mss: u64,
    rwnd: u64,
    halve_count: u64,
    retransmit_only_count: u64,
}

impl CongestionState {
    /// Fresh connection state: the window starts at one segment.
    pub fn new(mss: u64, rwnd: u64) -> Result<Self, CongestionError> {
        Self::with_cwnd(mss, rwnd, mss)
    }

    pub fn with_cwnd(mss: u64, rwnd: u64, cwnd: u64) -> Result<Self, CongestionError> {
        if mss == 0 || cwnd < mss || cwnd > rwnd {
            return Err(CongestionError::InvalidWindow { cwnd, mss, rwnd });
        }
        Ok(CongestionState {
            cwnd,
            mss,
            rwnd,
            halve_count: 0,
            retransmit_only_count: 0,
        })
    }

    pub fn cwnd(&self) -> u64 {
        self.cwnd
    }

    pub fn mss(&self) -> u64 {
        self.mss
    }

    pub fn rwnd(&self) -> u64 {
        self.rwnd
    }

    pub fn halve_count(&self) -> u64 {
        self.halve_count
    }

    pub fn retransmit_only_count(&self) -> u64 {
        self.retransmit_only_count
    }

    pub fn effective_window(&self) -> u64 {
        effective_window(self.cwnd, self.rwnd)
    }

    #[must_use]
    pub fn on_ack(self) -> Self {
        CongestionState {
            cwnd: (self.cwnd + self.mss).min(self.rwnd),
            ..self
        }
    }

    /// Halve, rounding down to whole segments, never below one segment.
    #[must_use]
    pub fn on_timeout_baseline(self) -> Self {
        let halved = (self.cwnd / 2) / self.mss * self.mss;
        CongestionState {
            cwnd: halved.max(self.mss),
            halve_count: self.halve_count + 1,
            ..self
        }
    }

    #[must_use]
    pub fn apply_decision(self, decision: TimeoutDecision) -> Self {
        match decision {
            TimeoutDecision::HalveWindow => self.on_timeout_baseline(),
            TimeoutDecision::RetransmitSameWindow => CongestionState {
                retransmit_only_count: self.retransmit_only_count + 1,
                ..self
            },
        }
    }
}

/// Bytes the sender may have outstanding: the smaller of the two windows.
pub fn effective_window(cwnd: u64, rwnd: u64) -> u64 {
    cwnd.min(rwnd)
}

/// Classifies a timeout from the link-mode bit and the link SNR.
///
/// SNR exactly at the threshold counts as congestion.
pub fn decide_timeout(
    mode: LinkMode,
    snr_db: Option<f64>,
    threshold: SnrThreshold,
) -> Result<TimeoutDecision, CongestionError> {
    match mode {
        LinkMode::Wired => Ok(TimeoutDecision::HalveWindow),
        LinkMode::Wireless => {
            let snr = snr_db.ok_or(CongestionError::MissingSnr)?;
            if snr >= threshold.db() {
                Ok(TimeoutDecision::HalveWindow)
            } else {
                Ok(TimeoutDecision::RetransmitSameWindow)
            }
        }
    }
}

/// Which timeout rule a sender runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Controller {
    /// Halve on every timeout.
    Rfc793,
    /// Link-mode bit plus SNR differentiation.
    SnrScheme { threshold: SnrThreshold },
}

impl Controller {
    pub fn name(&self) -> &'static str {
        match self {
            Controller::Rfc793 => "rfc793",
            Controller::SnrScheme { .. } => "snr",
        }
    }

    pub fn on_timeout(
        &self,
        state: CongestionState,
        mode: LinkMode,
        snr_db: Option<f64>,
    ) -> Result<(CongestionState, TimeoutDecision), CongestionError> {
        let decision = match self {
            Controller::Rfc793 => TimeoutDecision::HalveWindow,
            Controller::SnrScheme { threshold } => decide_timeout(mode, snr_db, *threshold)?,
        };
        Ok((state.apply_decision(decision), decision))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MSS: u64 = 1000;

    fn state(cwnd_segs: u64, rwnd_segs: u64) -> CongestionState {
        CongestionState::with_cwnd(MSS, rwnd_segs * MSS, cwnd_segs * MSS).unwrap()
    }

    #[test]
    fn snr_linear_examples() {
        let r = |s, n| {
            snr_linear(SnrMeasure {
                p_signal: s,
                p_noise: n,
            })
            .unwrap()
        };
        assert_eq!(r(10.0, 1.0), 10.0);
        assert_eq!(r(1.0, 1.0), 1.0);
        assert_eq!(r(0.5, 2.0), 0.25);
        assert!(snr_linear(SnrMeasure {
            p_signal: 1.0,
            p_noise: 0.0
        })
        .is_err());
    }

    #[test]
    fn snr_db_examples() {
        let db = |s, n| snr_db(SnrMeasure::new(s, n).unwrap()).unwrap();
        assert_eq!(db(10.0, 1.0), 10.0);
        assert_eq!(db(1.0, 1.0), 0.0);
        assert!((db(2.0, 1.0) - 3.0103).abs() < 1e-4);
        assert!(SnrMeasure::new(-1.0, 1.0).is_err());
        assert!(snr_db(SnrMeasure {
            p_signal: 0.0,
            p_noise: 1.0
        })
        .is_err());
    }

    #[test]
    fn snr_db_is_difference_of_db_powers() {
        let (s, n) = (0.37_f64, 0.021_f64);
        let direct = snr_db(SnrMeasure::new(s, n).unwrap()).unwrap();
        let diff = 10.0 * s.log10() - 10.0 * n.log10();
        assert!((direct - diff).abs() < 1e-12);
    }

    #[test]
    fn effective_window_examples() {
        assert_eq!(effective_window(8_000, 16_000), 8_000);
        assert_eq!(effective_window(16_000, 8_000), 8_000);
        assert_eq!(effective_window(4_000, 4_000), 4_000);
    }

    #[test]
    fn ack_growth() {
        assert_eq!(state(1, 16).on_ack().cwnd(), 2 * MSS);
        assert_eq!(state(16, 16).on_ack().cwnd(), 16 * MSS);
        let mut s = state(4, 16);
        for _ in 0..4 {
            s = s.on_ack();
        }
        assert_eq!(s.cwnd(), 8 * MSS);
        assert_eq!(s.halve_count(), 0);
    }

    #[test]
    fn baseline_timeout() {
        assert_eq!(state(4, 16).on_timeout_baseline().cwnd(), 2 * MSS);
        assert_eq!(state(1, 16).on_timeout_baseline().cwnd(), MSS);
        let s = state(16, 16).on_timeout_baseline();
        assert_eq!(s.cwnd(), 8 * MSS);
        assert_eq!(s.halve_count(), 1);
        // odd segment counts round down
        assert_eq!(state(5, 16).on_timeout_baseline().cwnd(), 2 * MSS);
    }

    #[test]
    fn decide_examples() {
        let th = SnrThreshold::default();
        assert_eq!(
            decide_timeout(LinkMode::Wired, Some(0.0), th),
            Ok(TimeoutDecision::HalveWindow)
        );
        assert_eq!(
            decide_timeout(LinkMode::Wired, None, th),
            Ok(TimeoutDecision::HalveWindow)
        );
        assert_eq!(
            decide_timeout(LinkMode::Wireless, Some(10.0), th),
            Ok(TimeoutDecision::HalveWindow)
        );
        assert_eq!(
            decide_timeout(LinkMode::Wireless, Some(3.0), th),
            Ok(TimeoutDecision::RetransmitSameWindow)
        );
        assert_eq!(
            decide_timeout(LinkMode::Wireless, Some(5.0), th),
            Ok(TimeoutDecision::HalveWindow)
        );
        assert_eq!(
            decide_timeout(LinkMode::Wireless, None, th),
            Err(CongestionError::MissingSnr)
        );
    }

    #[test]
    fn apply_examples() {
        let s = state(8, 16).apply_decision(TimeoutDecision::HalveWindow);
        assert_eq!((s.cwnd(), s.halve_count()), (4 * MSS, 1));
        let s = state(8, 16).apply_decision(TimeoutDecision::RetransmitSameWindow);
        assert_eq!((s.cwnd(), s.retransmit_only_count()), (8 * MSS, 1));
        let s = state(1, 16).apply_decision(TimeoutDecision::HalveWindow);
        assert_eq!(s.cwnd(), MSS);
    }

    #[test]
    fn invalid_states_rejected() {
        assert!(CongestionState::with_cwnd(MSS, 4 * MSS, 5 * MSS).is_err());
        assert!(CongestionState::with_cwnd(MSS, 4 * MSS, 500).is_err());
        assert!(CongestionState::new(0, 4 * MSS).is_err());
        assert!(SnrThreshold::new(f64::NAN).is_err());
    }

    #[test]
    fn rfc793_always_halves() {
        let (s, d) = Controller::Rfc793
            .on_timeout(state(8, 16), LinkMode::Wireless, Some(-20.0))
            .unwrap();
        assert_eq!(d, TimeoutDecision::HalveWindow);
        assert_eq!(s.cwnd(), 4 * MSS);
    }

    #[test]
    fn loss_free_growth_reaches_rwnd_in_log2_rounds() {
        for ratio in [2u64, 4, 8, 16] {
            let mut s = state(1, ratio);
            let mut rounds = 0;
            while s.cwnd() < s.rwnd() {
                // one ACK per segment sent this round
                let acks = s.effective_window() / MSS;
                for _ in 0..acks {
                    s = s.on_ack();
                }
                rounds += 1;
            }
            assert_eq!(rounds, ratio.trailing_zeros(), "rwnd/mss = {ratio}");
        }
    }

    #[derive(Debug, Clone)]
    enum Op {
        Ack,
        Timeout(bool, f64),
    }

    fn arb_op() -> impl Strategy<Value = Op> {
        prop_oneof![
            3 => Just(Op::Ack),
            1 => (any::<bool>(), -10.0f64..20.0).prop_map(|(w, s)| Op::Timeout(w, s)),
        ]
    }

    proptest! {
        #[test]
        fn window_bounds_hold(
            rwnd_segs in 1u64..200,
            ops in proptest::collection::vec(arb_op(), 0..300),
            snr_scheme in any::<bool>(),
        ) {
            let ctl = if snr_scheme {
                Controller::SnrScheme { threshold: SnrThreshold::default() }
            } else {
                Controller::Rfc793
            };
            let mut s = CongestionState::new(MSS, rwnd_segs * MSS).unwrap();
            for op in ops {
                s = match op {
                    Op::Ack => s.on_ack(),
                    Op::Timeout(wireless, snr) => {
                        let mode = if wireless { LinkMode::Wireless } else { LinkMode::Wired };
                        ctl.on_timeout(s, mode, Some(snr)).unwrap().0
                    }
                };
                prop_assert!(s.cwnd() >= MSS);
                prop_assert!(s.cwnd() <= s.rwnd());
            }
        }

        #[test]
        fn wireless_decision_monotone_in_snr(a in -50.0f64..50.0, b in -50.0f64..50.0, th in -10.0f64..20.0) {
            let th = SnrThreshold::new(th).unwrap();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            if decide_timeout(LinkMode::Wireless, Some(lo), th) == Ok(TimeoutDecision::HalveWindow) {
                prop_assert_eq!(decide_timeout(LinkMode::Wireless, Some(hi), th), Ok(TimeoutDecision::HalveWindow));
            }
        }

        #[test]
        fn wired_decision_ignores_snr(snr in proptest::option::of(-100.0f64..100.0)) {
            prop_assert_eq!(
                decide_timeout(LinkMode::Wired, snr, SnrThreshold::default()),
                Ok(TimeoutDecision::HalveWindow)
            );
        }

        #[test]
        fn retransmit_only_touches_its_counter(cwnd in 1u64..64, extra in 0u64..64) {
            let s = state(cwnd, cwnd + extra);
            let t = s.apply_decision(TimeoutDecision::RetransmitSameWindow);
            prop_assert_eq!(t.cwnd(), s.cwnd());
            prop_assert_eq!(t.rwnd(), s.rwnd());
            prop_assert_eq!(t.mss(), s.mss());
            prop_assert_eq!(t.halve_count(), s.halve_count());
            prop_assert_eq!(t.retransmit_only_count(), s.retransmit_only_count() + 1);
        }
    }
}
