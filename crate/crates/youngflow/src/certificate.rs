use serde::{Deserialize, Serialize};

/// A checked inequality `lhs <= rhs` over a time window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
    pub window: (f64, f64),
}

impl Certificate {
    /// Builds a certificate that holds when `lhs <= rhs + tol`.
    pub fn check(name: impl Into<String>, lhs: f64, rhs: f64, tol: f64, window: (f64, f64)) -> Self {
        let ok = lhs.is_finite() && !rhs.is_nan() && lhs <= rhs + tol;
        Certificate {
            name: name.into(),
            lhs,
            rhs,
            ok,
            window,
        }
    }

    /// Builds a certificate from logarithms of both sides, for bounds that
    /// overflow in linear scale. `rhs` is reported as `exp(log_rhs)`.
    pub fn check_log(
        name: impl Into<String>,
        lhs: f64,
        log_rhs: f64,
        window: (f64, f64),
    ) -> Self {
        let ok = lhs.is_finite() && !log_rhs.is_nan() && (lhs <= 0.0 || lhs.ln() <= log_rhs + 1e-12);
        Certificate {
            name: name.into(),
            lhs,
            rhs: log_rhs.exp(),
            ok,
            window,
        }
    }
}
