//! Moreau envelopes `F_λ(x) = inf_y f(y) + ‖y − x‖²/(2λ)` of convex bases
//! with closed-form proximal maps.

use crate::error::{Error, Result};
use crate::linalg::{check_dim, Vector};
use crate::losses::LossKind;
use crate::objective::CompositeObjective;
use crate::regularizers::Regularizer;

#[derive(Clone, Debug, PartialEq)]
pub enum EnvelopeBase {
    /// A convex member of the penalty catalog.
    Regularizer(Regularizer),
    /// `c‖x‖²` on `ℝⁿ`, `c > 0`.
    ScaledSquare { c: f64, dim: usize },
}

#[derive(Clone, Debug)]
pub struct MoreauEnvelope {
    base: EnvelopeBase,
    lambda: f64,
}

impl MoreauEnvelope {
    pub fn new(base: EnvelopeBase, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Config(format!("envelope parameter must be positive, got {lambda}")));
        }
        match &base {
            EnvelopeBase::Regularizer(p) => {
                p.validate()?;
                if !p.is_convex() {
                    return Err(Error::Config(format!(
                        "the Moreau envelope needs a convex base; {} is nonconvex",
                        p.name()
                    )));
                }
            }
            EnvelopeBase::ScaledSquare { c, .. } => {
                if !(*c > 0.0 && c.is_finite()) {
                    return Err(Error::Config(format!("quadratic coefficient must be positive, got {c}")));
                }
            }
        }
        Ok(MoreauEnvelope { base, lambda })
    }

    /// Envelope of a composite objective whose smooth part is identically zero.
    pub fn from_objective(obj: &CompositeObjective, lambda: f64) -> Result<Self> {
        if obj.smooth().kind() != LossKind::Zero {
            return Err(Error::Config("envelope bases must have a zero smooth part".into()));
        }
        Self::new(EnvelopeBase::Regularizer(obj.reg().clone()), lambda)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn base(&self) -> &EnvelopeBase {
        &self.base
    }

    fn base_value(&self, y: &Vector) -> Result<f64> {
        match &self.base {
            EnvelopeBase::Regularizer(p) => Ok(p.value(y)?.to_f64()),
            EnvelopeBase::ScaledSquare { c, dim } => {
                check_dim(*dim, y.len())?;
                Ok(c * y.dot(y))
            }
        }
    }

    /// `prox_{λf}(x)`.
    pub fn prox_point(&self, x: &Vector) -> Result<Vector> {
        match &self.base {
            EnvelopeBase::Regularizer(p) => p.prox(x, self.lambda),
            EnvelopeBase::ScaledSquare { c, dim } => {
                check_dim(*dim, x.len())?;
                Ok(x / (1.0 + 2.0 * self.lambda * c))
            }
        }
    }

    pub fn value(&self, x: &Vector) -> Result<f64> {
        let p = self.prox_point(x)?;
        let d = &p - x;
        Ok(self.base_value(&p)? + d.dot(&d) / (2.0 * self.lambda))
    }

    /// `(x − prox_{λf}(x))/λ`.
    pub fn gradient(&self, x: &Vector) -> Result<Vector> {
        let p = self.prox_point(x)?;
        Ok((x - &p) / self.lambda)
    }
}
