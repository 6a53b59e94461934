use serde::{Deserialize, Serialize};

use crate::{Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlasmonicDirection {
    LambdaToEps,
    EpsToLambda,
}

/// Converts between the spectral parameter `λ` and the permittivity ratio
/// `ε`: `ε = (1 + 2λ)/(2λ − 1)` and `λ = (ε + 1)/(2(ε − 1))`.
pub fn plasmonic_map(value: C64, direction: PlasmonicDirection) -> Result<C64> {
    let one = C64::new(1.0, 0.0);
    match direction {
        PlasmonicDirection::LambdaToEps => {
            let den = 2.0 * value - one;
            if den.norm() == 0.0 {
                return Err(Error::PoleInput("lambda = 1/2".into()));
            }
            Ok((one + 2.0 * value) / den)
        }
        PlasmonicDirection::EpsToLambda => {
            let den = 2.0 * (value - one);
            if den.norm() == 0.0 {
                return Err(Error::PoleInput("epsilon = 1".into()));
            }
            Ok((value + one) / den)
        }
    }
}
