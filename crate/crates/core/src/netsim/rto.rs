//! Retransmission timer: EWMA smoothed RTT, `rto = max(2 * srtt, rto_min)`.

/// One EWMA step. Returns `(srtt', rto)` in seconds.
pub fn rto_update(srtt: Option<f64>, sample_rtt: f64, weight: f64, rto_min: f64) -> (f64, f64) {
    let srtt = match srtt {
        None => sample_rtt,
        Some(prev) => weight * prev + (1.0 - weight) * sample_rtt,
    };
    (srtt, (2.0 * srtt).max(rto_min))
}

#[derive(Debug, Clone)]
pub struct RtoEstimator {
    srtt: Option<f64>,
    rto: f64,
    weight: f64,
    rto_min: f64,
}

impl RtoEstimator {
    pub fn new(rto_initial: f64, weight: f64, rto_min: f64) -> Self {
        RtoEstimator {
            srtt: None,
            rto: rto_initial,
            weight,
            rto_min,
        }
    }

    pub fn on_sample(&mut self, sample_rtt: f64) {
        let (srtt, rto) = rto_update(self.srtt, sample_rtt, self.weight, self.rto_min);
        self.srtt = Some(srtt);
        self.rto = rto;
    }

    pub fn srtt(&self) -> Option<f64> {
        self.srtt
    }

    pub fn rto(&self) -> f64 {
        self.rto
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_sample() {
        let (srtt, rto) = rto_update(None, 0.00718, 0.875, 0.01);
        assert_eq!(srtt, 0.00718);
        assert!((rto - 0.01436).abs() < 1e-12);
    }

    #[test]
    fn floor_applies() {
        let (_, rto) = rto_update(None, 0.001, 0.875, 0.01);
        assert_eq!(rto, 0.01);
    }

    #[test]
    fn memoryless_weight() {
        let (srtt, _) = rto_update(Some(0.5), 0.02, 0.0, 0.01);
        assert_eq!(srtt, 0.02);
    }

    #[test]
    fn converges_to_constant_sample() {
        let mut est = RtoEstimator::new(1.0, 0.875, 0.01);
        assert_eq!(est.rto(), 1.0);
        est.on_sample(0.1);
        for _ in 0..400 {
            est.on_sample(0.03);
        }
        assert!((est.srtt().unwrap() - 0.03).abs() < 1e-12);
        assert!((est.rto() - 0.06).abs() < 1e-12);
    }
}
