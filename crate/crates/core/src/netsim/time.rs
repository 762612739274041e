use std::fmt;
use std::ops::{Add, Sub};

/// Simulated time in integer nanoseconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SimTime(pub u64);

impl SimTime {
    pub const ZERO: SimTime = SimTime(0);
    pub const NANOS_PER_SEC: u64 = 1_000_000_000;

    /// Rounds to the nearest nanosecond. Negative and NaN inputs map to zero.
    pub fn from_secs_f64(secs: f64) -> SimTime {
        SimTime((secs * Self::NANOS_PER_SEC as f64).round() as u64)
    }

    pub fn from_millis(ms: u64) -> SimTime {
        SimTime(ms * 1_000_000)
    }

    pub fn from_micros(us: u64) -> SimTime {
        SimTime(us * 1_000)
    }

    pub fn as_nanos(self) -> u64 {
        self.0
    }

    pub fn as_secs_f64(self) -> f64 {
        self.0 as f64 / Self::NANOS_PER_SEC as f64
    }
}

impl Add for SimTime {
    type Output = SimTime;
    fn add(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 + rhs.0)
    }
}

impl Sub for SimTime {
    type Output = SimTime;
    fn sub(self, rhs: SimTime) -> SimTime {
        SimTime(self.0 - rhs.0)
    }
}

/// Seconds with six decimals, rounded to the nearest microsecond.
impl fmt::Display for SimTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let micros = (self.0 + 500) / 1_000;
        write!(f, "{}.{:06}", micros / 1_000_000, micros % 1_000_000)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions() {
        assert_eq!(SimTime::from_secs_f64(0.005), SimTime(5_000_000));
        assert_eq!(SimTime::from_secs_f64(350.0).as_nanos(), 350_000_000_000);
        assert_eq!(
            SimTime::from_millis(7) + SimTime::from_micros(180),
            SimTime(7_180_000)
        );
    }

    #[test]
    fn display_six_decimals() {
        assert_eq!(SimTime(7_180_000).to_string(), "0.007180");
        assert_eq!(SimTime(1_234_567_499).to_string(), "1.234567");
        assert_eq!(SimTime(1_234_567_500).to_string(), "1.234568");
        assert_eq!(SimTime::ZERO.to_string(), "0.000000");
    }
}
