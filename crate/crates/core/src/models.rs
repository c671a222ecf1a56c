//! Preset builders for the two benchmark systems.

use crate::error::{Error, Result};
use crate::polynomial::Polynomial;
use crate::generator::SdeModel;

/// Ornstein-Uhlenbeck process `dX = -gamma X dt + sigma dW(t)`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct OuParams {
    pub gamma: f64,
    pub sigma: f64,
    pub x_ini: f64,
}

impl OuParams {
    pub fn origin(&self) -> Vec<f64> {
        vec![self.x_ini]
    }
}

/// Noisy van der Pol system
/// `dX1 = X2 dt + nu11 dW1(t)`,
/// `dX2 = (eps X2 (1 - X1^2) - X1) dt + nu22 dW2(t)`.
#[derive(Clone, Copy, PartialEq, Debug)]
pub struct VanDerPolParams {
    pub epsilon: f64,
    pub nu11: f64,
    pub nu22: f64,
    pub x_ini: [f64; 2],
}

impl VanDerPolParams {
    pub fn origin(&self) -> Vec<f64> {
        self.x_ini.to_vec()
    }
}

fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if !(value > 0.0) {
        return Err(Error::NonPositiveParameter { name, value });
    }
    Ok(())
}

/// Drift `[-gamma x]`, diffusion `[[sigma^2]]`.
pub fn build_ou(params: &OuParams) -> Result<SdeModel> {
    require_positive("gamma", params.gamma)?;
    require_positive("sigma", params.sigma)?;
    let drift = vec![Polynomial::monomial(1, &[1], -params.gamma)?];
    let diffusion = vec![vec![Polynomial::constant(1, params.sigma * params.sigma)]];
    SdeModel::new(drift, diffusion)
}

/// Drift `[x2, eps x2 - eps x1^2 x2 - x1]`, diffusion
/// `diag(nu11^2, nu22^2)`.
pub fn build_van_der_pol(params: &VanDerPolParams) -> Result<SdeModel> {
    require_positive("epsilon", params.epsilon)?;
    require_positive("nu11", params.nu11)?;
    require_positive("nu22", params.nu22)?;
    let eps = params.epsilon;
    let drift = vec![
        Polynomial::monomial(2, &[0, 1], 1.0)?,
        Polynomial::from_terms(
            2,
            [
                (&[0u32, 1][..], eps),
                (&[2, 1][..], -eps),
                (&[1, 0][..], -1.0),
            ],
        )?,
    ];
    let diffusion = vec![
        vec![
            Polynomial::constant(2, params.nu11 * params.nu11),
            Polynomial::zero(2),
        ],
        vec![
            Polynomial::zero(2),
            Polynomial::constant(2, params.nu22 * params.nu22),
        ],
    ];
    SdeModel::new(drift, diffusion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generator::Generator;
    use crate::index::MultiIndex;
    use crate::propagator::{run, RunPlan, StepScheme};

    #[test]
    fn ou_paper_parameters() {
        let model = build_ou(&OuParams {
            gamma: 1.0,
            sigma: 0.5,
            x_ini: 1.0,
        })
        .unwrap();
        assert_eq!(
            model.drift(0),
            &Polynomial::monomial(1, &[1], -1.0).unwrap()
        );
        assert_eq!(model.diffusion(0, 0), &Polynomial::constant(1, 0.25));
    }

    #[test]
    fn non_positive_parameters_are_rejected() {
        let err = build_ou(&OuParams {
            gamma: 0.0,
            sigma: 0.5,
            x_ini: 1.0,
        })
        .unwrap_err();
        assert!(matches!(err, Error::NonPositiveParameter { name: "gamma", .. }));
        assert!(build_van_der_pol(&VanDerPolParams {
            epsilon: 1.0,
            nu11: -0.5,
            nu22: 0.5,
            x_ini: [0.0, 0.0],
        })
        .is_err());
    }

    #[test]
    fn van_der_pol_compiles_to_ten_events() {
        let params = VanDerPolParams {
            epsilon: 1.0,
            nu11: 0.5,
            nu22: 0.5,
            x_ini: [0.5, 1.0],
        };
        let g = Generator::compile(&build_van_der_pol(&params).unwrap(), &params.x_ini).unwrap();
        assert_eq!(g.num_events(), 10);
    }

    #[test]
    fn origin_at_zero_drops_origin_weighted_rows() {
        let params = VanDerPolParams {
            epsilon: 1.0,
            nu11: 0.5,
            nu22: 0.5,
            x_ini: [0.0, 0.0],
        };
        let g = Generator::compile(&build_van_der_pol(&params).unwrap(), &params.x_ini).unwrap();
        // rows carrying x_ini factors vanish: [-1,0], [0,-1], [1,0], [2,-1];
        // [1,-1] loses its x_ini part but keeps -n2
        assert!(g.event_with_shift(&[-1, 0]).is_none());
        assert!(g.event_with_shift(&[0, -1]).is_none());
        assert!(g.event_with_shift(&[1, 0]).is_none());
        assert!(g.event_with_shift(&[2, -1]).is_none());
        let row = g.event_with_shift(&[1, -1]).unwrap();
        assert_eq!(
            row.gamma(),
            &Polynomial::monomial(2, &[0, 1], -1.0).unwrap()
        );
        assert_eq!(g.num_events(), 6);
    }

    #[test]
    fn vanishing_noise_approaches_deterministic_decay() {
        // sigma -> 0: first moment estimate tends to exp(-T) - 1
        let params = OuParams {
            gamma: 1.0,
            sigma: 1e-9,
            x_ini: 1.0,
        };
        let g = Generator::compile(&build_ou(&params).unwrap(), &params.origin()).unwrap();
        let plan = RunPlan::new(
            1.0,
            512,
            MultiIndex::from_slice(&[1]),
            StepScheme::Implicit2 {
                keep_two_hop_denominator: false,
            },
        );
        let estimate = run(&g, &plan).unwrap();
        assert!((estimate - (f64::exp(-1.0) - 1.0)).abs() < 1e-5);
    }
}
