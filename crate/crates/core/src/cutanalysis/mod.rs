//! Cut-locus phenomenology: the antipodal constant of the round sphere, the
//! Hessian blow-up classifier, the singular density ρ on P with an
//! independent gradient-jump oracle, and mollified pairings.

pub mod blowup;
pub mod pairing;
pub mod rho;

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::heatkernel::hess_energy_t;
use crate::manifold::ModelManifold;

pub use blowup::{blowup_classifier, regular_hessian, BlowupReport, Verdict, DEFAULT_T_GRID};
pub use pairing::{jump_pairing, mollified_pairing, Bump, PairingReport};
pub use rho::{jump_oracle, rho_on_p, rho_pushforward, JumpDensity, RhoIngredients, RhoSample};

/// Coefficient `c` in `∇²_{A,A}E_t(N,S) ∼ c |A|²/t` on the unit `Sⁿ`.
pub fn sphere_antipodal_hessian(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Usage("n must be at least 1".into()));
    }
    Ok(-PI * PI / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntipodalCheck {
    pub n: usize,
    /// `(t, t·∇²_{A,A}E_t(N,S))`
    pub samples: Vec<(f64, f64)>,
    pub extrapolated: f64,
    pub expected: f64,
    pub relative_error: f64,
}

/// `t·∇²_{A,A}E_t` at an antipodal pair of the unit circle (`n = 1`) or
/// sphere, linearly extrapolated to `t = 0` from the last two times.
pub fn antipodal_check(n: usize, times: &[f64]) -> Result<AntipodalCheck> {
    if times.len() < 2 {
        return Err(Error::Usage("need at least two times".into()));
    }
    let (m, x, y, a) = if n == 1 {
        let m = ModelManifold::circle(1.0)?;
        let x = m.point(vec![0.0])?;
        let y = m.point(vec![PI])?;
        (m, x, y, vec![1.0])
    } else {
        let m = ModelManifold::sphere(n, 1.0)?;
        let a = m.tangent_frame(&m.south())[0].clone();
        (m.clone(), m.north(), m.south(), a)
    };
    let samples = times
        .iter()
        .map(|&t| Ok((t, t * hess_energy_t(&m, t, &x, &y, &a)?.value)))
        .collect::<Result<Vec<_>>>()?;
    let (t1, v1) = samples[samples.len() - 2];
    let (t2, v2) = samples[samples.len() - 1];
    let extrapolated = (t1 * v2 - t2 * v1) / (t1 - t2);
    let expected = sphere_antipodal_hessian(n)?;
    Ok(AntipodalCheck {
        n,
        samples,
        extrapolated,
        expected,
        relative_error: (extrapolated / expected - 1.0).abs(),
    })
}
