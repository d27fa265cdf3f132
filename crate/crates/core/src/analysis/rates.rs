use crate::{DgError, Result};

/// Errors below this are treated as round-off (the exact solution lies in
/// the discrete space) and produce no rate.
pub const EXACTNESS_FLOOR: f64 = 1e-11;

/// `log(coarse / fine) / log 2`, or `None` when either error is zero or not finite.
pub fn convergence_rate(coarse: f64, fine: f64) -> Option<f64> {
    if !(coarse.is_finite() && fine.is_finite()) || coarse <= 0.0 || fine <= 0.0 {
        return None;
    }
    Some((coarse / fine).ln() / 2f64.ln())
}

/// Rates between consecutive entries of an error sequence (one fewer than `errors`).
pub fn convergence_rates(errors: &[f64]) -> Vec<Option<f64>> {
    errors
        .windows(2)
        .map(|w| convergence_rate(w[0], w[1]))
        .collect()
}

fn floored_rate(coarse: f64, fine: f64) -> Option<f64> {
    if coarse < EXACTNESS_FLOOR || fine < EXACTNESS_FLOOR {
        return None;
    }
    convergence_rate(coarse, fine)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelErrors {
    pub n: usize,
    pub h: f64,
    pub dofs: usize,
    pub l2: f64,
    pub h1: f64,
    pub triple: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelRates {
    pub beta_l2: Option<f64>,
    pub beta_h1: Option<f64>,
    pub beta_triple: Option<f64>,
}

/// Per-level errors, sorted by decreasing `h`, with the rates between neighbours.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub levels: Vec<LevelErrors>,
    /// `rates[i]` compares `levels[i]` and `levels[i + 1]`.
    pub rates: Vec<LevelRates>,
}

impl ErrorReport {
    pub fn new(mut levels: Vec<LevelErrors>) -> Result<Self> {
        levels.sort_by_key(|l| l.n);
        for w in levels.windows(2) {
            if w[1].n != 2 * w[0].n {
                return Err(DgError::InvalidParameter(format!(
                    "levels {} and {} are not related by a factor of 2",
                    w[0].n, w[1].n
                )));
            }
        }
        let rates = levels
            .windows(2)
            .map(|w| LevelRates {
                beta_l2: floored_rate(w[0].l2, w[1].l2),
                beta_h1: floored_rate(w[0].h1, w[1].h1),
                beta_triple: floored_rate(w[0].triple, w[1].triple),
            })
            .collect();
        Ok(Self { levels, rates })
    }

    pub fn final_rates(&self) -> Option<&LevelRates> {
        self.rates.last()
    }
}
