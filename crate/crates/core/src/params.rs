//! Model constants and the characteristic roots of the generator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `r * b` allowed for a payout barrier; keeps `exp(r * b)` finite.
const MAX_EXPONENT: f64 = 700.0;

/// Parameters of the controlled surplus `dX = mu dt + sigma dW + dC - dD`.
///
/// Fields are validated on construction and on deserialization, so a value of
/// this type always satisfies `mu, sigma, alpha > 0`, `k > 1` and `b_r >= 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct ModelParams {
    /// Drift per unit time.
    pub mu: f64,
    /// Volatility per square-root time.
    pub sigma: f64,
    /// Discount rate.
    pub alpha: f64,
    /// Proportional cost of each unit of injected capital.
    pub k: f64,
    /// Dividend payout barrier: no dividends while the surplus is below it.
    pub b_r: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mu: f64,
    sigma: f64,
    alpha: f64,
    k: f64,
    #[serde(default)]
    b_r: f64,
}

impl TryFrom<RawParams> for ModelParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        ModelParams::new(raw.mu, raw.sigma, raw.alpha, raw.k, raw.b_r)
    }
}

fn require(name: &'static str, value: f64, requirement: &'static str, ok: bool) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            requirement,
            value,
        })
    }
}

impl ModelParams {
    pub fn new(mu: f64, sigma: f64, alpha: f64, k: f64, b_r: f64) -> Result<Self> {
        require("mu", mu, "be positive", mu > 0.0)?;
        require("sigma", sigma, "be positive", sigma > 0.0)?;
        require("alpha", alpha, "be positive", alpha > 0.0)?;
        require("k", k, "exceed 1", k > 1.0)?;
        require("b_r", b_r, "be nonnegative", b_r >= 0.0)?;
        let params = ModelParams {
            mu,
            sigma,
            alpha,
            k,
            b_r,
        };
        let roots = Roots::new(&params);
        let limit = MAX_EXPONENT / roots.r1.max(-roots.r2);
        require("b_r", b_r, "stay below 700 / max(r1, |r2|)", b_r <= limit)?;
        Ok(params)
    }

    /// Same as [`ModelParams::new`] but takes the variance `sigma^2`.
    pub fn from_variance(mu: f64, sigma2: f64, alpha: f64, k: f64, b_r: f64) -> Result<Self> {
        require("sigma2", sigma2, "be positive", sigma2 > 0.0)?;
        Self::new(mu, sigma2.sqrt(), alpha, k, b_r)
    }

    /// The worked example with `mu = 0.04`, `sigma^2 = 0.15`, `alpha = 0.05`, `k = 1.01`.
    pub fn reference(b_r: f64) -> Result<Self> {
        Self::from_variance(0.04, 0.15, 0.05, 1.01, b_r)
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma * self.sigma
    }

    pub fn with_payout_barrier(&self, b_r: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.alpha, self.k, b_r)
    }

    pub fn with_cost(&self, k: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, self.alpha, k, self.b_r)
    }

    pub fn roots(&self) -> Roots {
        Roots::new(self)
    }
}

/// Roots `r2 < 0 < r1` of `sigma^2 r^2 / 2 + mu r - alpha = 0`.
///
/// Every solution of `alpha f = mu f' + sigma^2 f'' / 2` is a combination of
/// `exp(r1 x)` and `exp(r2 x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Roots {
    pub r1: f64,
    pub r2: f64,
}

impl Roots {
    pub fn new(params: &ModelParams) -> Self {
        let s2 = params.sigma2();
        let shift = params.mu / s2;
        let disc = (shift * shift + 2.0 * params.alpha / s2).sqrt();
        let r2 = -shift - disc;
        // r1 via the product of the roots: -shift + disc cancels badly when mu^2/sigma^4 dominates.
        let r1 = (2.0 * params.alpha / s2) / (shift + disc);
        Roots { r1, r2 }
    }

    /// `r1 - r2`, always positive.
    pub fn spread(&self) -> f64 {
        self.r1 - self.r2
    }

    /// Residual of the characteristic polynomial at `r`, relative to its largest term.
    pub fn relative_residual(params: &ModelParams, r: f64) -> f64 {
        let quad = 0.5 * params.sigma2() * r * r;
        let lin = params.mu * r;
        let scale = quad.abs().max(lin.abs()).max(params.alpha);
        (quad + lin - params.alpha).abs() / scale
    }
}
