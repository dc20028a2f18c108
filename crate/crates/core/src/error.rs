use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid interval at component {component}: lower {lower} > upper {upper}")]
    InvalidInterval {
        component: usize,
        lower: f64,
        upper: f64,
    },

    #[error("{name} must lie in {range}, got {value}")]
    InvalidProbability {
        name: &'static str,
        range: &'static str,
        value: f64,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in component {component} of {context}")]
    NonFinite {
        component: usize,
        context: &'static str,
    },

    #[error("decomposition is unsound: component {component} has lower {lower} > upper {upper}")]
    UnsoundDecomposition {
        component: usize,
        lower: f64,
        upper: f64,
    },

    #[error("arguments are neither x <= x_hat nor x >= x_hat componentwise")]
    MixedOrder,

    #[error("Riccati iteration did not converge within {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("step {step}: {source}")]
    AtStep {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite state in trajectory {trajectory} at step {step}")]
    TrajectoryNonFinite { trajectory: usize, step: usize },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        Error::AtStep {
            step,
            source: Box::new(self),
        }
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

pub(crate) fn check_finite(v: &[f64], context: &'static str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(component) => Err(Error::NonFinite { component, context }),
        None => Ok(()),
    }
}
