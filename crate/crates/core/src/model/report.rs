use serde::Serialize;

/// Timing, size and ratio record for one operation run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpReport {
    pub op_name: String,
    pub elapsed_seconds: f64,
    pub bytes_in: u64,
    pub bytes_out: u64,
    pub compression_ratio: f64,
}

impl OpReport {
    pub fn new(
        op_name: impl Into<String>,
        elapsed_seconds: f64,
        bytes_in: u64,
        bytes_out: u64,
        compression_ratio: f64,
    ) -> Self {
        Self {
            op_name: op_name.into(),
            elapsed_seconds: elapsed_seconds.max(0.0),
            bytes_in,
            bytes_out,
            compression_ratio,
        }
    }

    /// Bytes processed per second; `None` when no time was measured.
    pub fn throughput(&self) -> Option<f64> {
        (self.elapsed_seconds > 0.0).then(|| self.bytes_in as f64 / self.elapsed_seconds)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn throughput_definition() {
        let r = OpReport::new("compress", 2.0, 1000, 100, 10.0);
        assert_eq!(r.throughput(), Some(500.0));
        assert_eq!(OpReport::new("noop", 0.0, 1, 1, 1.0).throughput(), None);
    }
}
