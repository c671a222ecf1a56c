//! Compilation of an SDE model into lattice events.
//!
//! The adjoint (backward Kolmogorov) generator of
//!
//! ```text
//! dX = a(X) dt + B(X) dW(t)
//! ```
//!
//! is
//!
//! ```text
//! L = sum_i a_i(x) d/dx_i + 1/2 sum_ij [B B^T]_ij d^2/dx_i dx_j.
//! ```
//!
//! Rewriting every coefficient polynomial around the initial coordinate
//! `x_ini` and acting on the monomial basis `(x - x_ini)^n` turns each
//! monomial of each operator term into an *event*: a state-dependent weight
//! `gamma_r(n)` together with a lattice displacement `v_r`. The matrix
//! element for the move `n -> n'` is then
//!
//! ```text
//! [L]_{n'n} = sum_r gamma_r(n) * [v_r == n' - n].
//! ```
//!
//! A drift monomial `c * y^m` acting through `d/dx_i` contributes
//! `gamma(n) = c * n_i` with displacement `m - e_i`; a diffusion monomial
//! `c * y^m` acting through `d^2/dx_i dx_j` contributes
//! `gamma(n) = c * n_i * (n_j - delta_ij)` with displacement `m - e_i - e_j`.
//! Every weight carries a factor that vanishes on lattice boundaries, so no
//! event can ever step outside the non-negative orthant with nonzero weight.

use crate::error::{Error, Result};
use crate::index::MultiIndex;
use crate::polynomial::Polynomial;
use crate::weight_map::WeightMap;
use smallvec::SmallVec;
use std::fmt;

type Shift = SmallVec<[i32; 4]>;

/// A polynomial-coefficient SDE: drift vector `a(x)` and diffusion matrix
/// `B(x) B(x)^T` (the product is supplied directly; the generator never
/// needs `B` itself).
#[derive(Clone, PartialEq, Debug)]
pub struct SdeModel {
    dimension: usize,
    drift: Vec<Polynomial>,
    diffusion: Vec<Vec<Polynomial>>,
}

impl SdeModel {
    /// Validates dimensions and the term-wise symmetry of the diffusion
    /// matrix.
    pub fn new(drift: Vec<Polynomial>, diffusion: Vec<Vec<Polynomial>>) -> Result<Self> {
        let dimension = drift.len();
        for p in &drift {
            if p.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: p.dimension(),
                });
            }
        }
        if diffusion.len() != dimension {
            return Err(Error::DimensionMismatch {
                expected: dimension,
                got: diffusion.len(),
            });
        }
        for row in &diffusion {
            if row.len() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    got: row.len(),
                });
            }
            for p in row {
                if p.dimension() != dimension {
                    return Err(Error::DimensionMismatch {
                        expected: dimension,
                        got: p.dimension(),
                    });
                }
            }
        }
        for i in 0..dimension {
            for j in (i + 1)..dimension {
                if diffusion[i][j] != diffusion[j][i] {
                    return Err(Error::AsymmetricDiffusion { i, j });
                }
            }
        }
        Ok(SdeModel {
            dimension,
            drift,
            diffusion,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn drift(&self, i: usize) -> &Polynomial {
        &self.drift[i]
    }

    pub fn drift_vector(&self) -> &[Polynomial] {
        &self.drift
    }

    pub fn diffusion(&self, i: usize, j: usize) -> &Polynomial {
        &self.diffusion[i][j]
    }

    pub fn diffusion_matrix(&self) -> &[Vec<Polynomial>] {
        &self.diffusion
    }
}

/// One generator term: weight polynomial in the lattice coordinates `n` and
/// a signed displacement.
#[derive(Clone, PartialEq, Debug)]
pub struct Event {
    gamma: Polynomial,
    shift: Shift,
}

impl Event {
    pub fn gamma(&self) -> &Polynomial {
        &self.gamma
    }

    pub fn shift(&self) -> &[i32] {
        &self.shift
    }

    pub fn is_diagonal(&self) -> bool {
        self.shift.iter().all(|&c| c == 0)
    }
}

/// The compiled event table of the adjoint generator at a fixed origin.
///
/// Events sharing a displacement are merged (their weights summed), so each
/// displacement appears at most once; the list is ordered lexicographically
/// by displacement.
#[derive(Clone, PartialEq, Debug)]
pub struct Generator {
    dimension: usize,
    origin: Vec<f64>,
    events: Vec<Event>,
    diagonal: Option<usize>,
}

impl Generator {
    pub fn compile(model: &SdeModel, origin: &[f64]) -> Result<Self> {
        if origin.len() != model.dimension() {
            return Err(Error::DimensionMismatch {
                expected: model.dimension(),
                got: origin.len(),
            });
        }
        let raw = Self::raw_events(model, origin)?;
        let mut merged: std::collections::BTreeMap<Shift, Polynomial> =
            std::collections::BTreeMap::new();
        for event in raw {
            match merged.get_mut(&event.shift) {
                Some(gamma) => *gamma = gamma.add(&event.gamma)?,
                None => {
                    merged.insert(event.shift, event.gamma);
                }
            }
        }
        let events: Vec<Event> = merged
            .into_iter()
            .filter(|(_, gamma)| !gamma.is_zero())
            .map(|(shift, gamma)| Event { gamma, shift })
            .collect();
        let diagonal = events.iter().position(Event::is_diagonal);
        Ok(Generator {
            dimension: model.dimension(),
            origin: origin.to_vec(),
            events,
            diagonal,
        })
    }

    /// One event per monomial of each shifted operator term, before merging.
    pub(crate) fn raw_events(model: &SdeModel, origin: &[f64]) -> Result<Vec<Event>> {
        let d = model.dimension();
        let mut events = Vec::new();
        for i in 0..d {
            let shifted = model.drift(i).shift(origin)?;
            for (m, c) in shifted.terms() {
                let mut shift: Shift = m.iter().map(|e| e as i32).collect();
                shift[i] -= 1;
                let gamma = Polynomial::monomial(d, MultiIndex::unit(d, i).entries(), c)?;
                events.push(Event { gamma, shift });
            }
        }
        for i in 0..d {
            for j in 0..d {
                let shifted = model.diffusion(i, j).scale(0.5).shift(origin)?;
                for (m, c) in shifted.terms() {
                    let mut shift: Shift = m.iter().map(|e| e as i32).collect();
                    shift[i] -= 1;
                    shift[j] -= 1;
                    // gamma = c * n_i * (n_j - delta_ij)
                    let gamma = if i == j {
                        let mut sq = vec![0u32; d];
                        sq[i] = 2;
                        Polynomial::from_terms(
                            d,
                            [
                                (sq.as_slice(), c),
                                (MultiIndex::unit(d, i).entries(), -c),
                            ],
                        )?
                    } else {
                        let mut cross = vec![0u32; d];
                        cross[i] = 1;
                        cross[j] = 1;
                        Polynomial::monomial(d, &cross, c)?
                    };
                    events.push(Event { gamma, shift });
                }
            }
        }
        Ok(events)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn num_events(&self) -> usize {
        self.events.len()
    }

    /// Events with a nonzero displacement, in table order.
    pub(crate) fn hopping_events(&self) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(|e| !e.is_diagonal())
    }

    /// Looks up the merged event with the given displacement.
    pub(crate) fn event_with_shift(&self, shift: &[i32]) -> Option<&Event> {
        self.events
            .binary_search_by(|e| e.shift.as_slice().cmp(shift))
            .ok()
            .map(|i| &self.events[i])
    }

    /// The matrix element `[L]_{nn}`.
    pub fn diag_element(&self, n: &MultiIndex) -> f64 {
        self.diagonal
            .map(|i| self.events[i].gamma.eval_lattice(n))
            .unwrap_or(0.0)
    }

    /// All states reachable from `n` in one event, with the matrix elements
    /// `[L]_{n'n}`. States outside the lattice are excluded; their weights
    /// are identically zero by construction.
    pub fn offdiag_targets(&self, n: &MultiIndex) -> Vec<(MultiIndex, f64)> {
        let mut out = Vec::new();
        for event in self.hopping_events() {
            let value = event.gamma.eval_lattice(n);
            if value == 0.0 {
                continue;
            }
            let target = n
                .offset(event.shift())
                .expect("nonzero event weight cannot leave the lattice");
            out.push((target, value));
        }
        out
    }

    /// Applies the bare generator: `out[n'] = sum_n [L]_{n'n} w[n]`.
    pub fn apply(&self, w: &WeightMap) -> WeightMap {
        let mut out = WeightMap::new();
        for (n, wn) in w.iter() {
            let diag = self.diag_element(n);
            if diag != 0.0 {
                out.accumulate(n.clone(), diag * wn);
            }
            for (target, value) in self.offdiag_targets(n) {
                out.accumulate(target, value * wn);
            }
        }
        out.prune_zeros();
        out
    }
}

impl fmt::Display for Generator {
    /// Renders the merged event table: number, weight, displacement.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "no.  gamma(n)  v")?;
        for (i, event) in self.events.iter().enumerate() {
            let v: Vec<String> = event.shift().iter().map(|c| c.to_string()).collect();
            writeln!(f, "{}  {}  [{}]", i + 1, event.gamma(), v.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{build_ou, build_van_der_pol, OuParams, VanDerPolParams};
    use crate::weight_map::WeightMap;
    use proptest::prelude::*;

    fn ou() -> (SdeModel, Vec<f64>) {
        let params = OuParams {
            gamma: 1.0,
            sigma: 0.5,
            x_ini: 1.0,
        };
        (build_ou(&params).unwrap(), vec![params.x_ini])
    }

    fn vdp() -> (SdeModel, Vec<f64>) {
        let params = VanDerPolParams {
            epsilon: 1.0,
            nu11: 0.5,
            nu22: 0.5,
            x_ini: [0.5, 1.0],
        };
        (build_van_der_pol(&params).unwrap(), params.x_ini.to_vec())
    }

    fn poly(dim: usize, terms: &[(&[u32], f64)]) -> Polynomial {
        Polynomial::from_terms(dim, terms.iter().copied()).unwrap()
    }

    #[test]
    fn ou_event_table_is_golden() {
        let (model, origin) = ou();
        let g = Generator::compile(&model, &origin).unwrap();
        let (gamma, sigma, x_ini) = (1.0, 0.5, 1.0);
        let rows: Vec<(&[i32], Polynomial)> = vec![
            (
                &[-2],
                poly(1, &[(&[2], sigma * sigma / 2.0), (&[1], -sigma * sigma / 2.0)]),
            ),
            (&[-1], poly(1, &[(&[1], -gamma * x_ini)])),
            (&[0], poly(1, &[(&[1], -gamma)])),
        ];
        assert_eq!(g.num_events(), rows.len());
        for (event, (shift, expect)) in g.events().iter().zip(&rows) {
            assert_eq!(event.shift(), *shift);
            assert_eq!(event.gamma(), expect);
        }
    }

    #[test]
    fn van_der_pol_event_table_is_golden() {
        let (model, origin) = vdp();
        let g = Generator::compile(&model, &origin).unwrap();
        let (eps, nu11, nu22) = (1.0, 0.5, 0.5);
        let (c1, c2) = (0.5, 1.0);
        let n1: &[u32] = &[1, 0];
        let n2: &[u32] = &[0, 1];
        let rows: Vec<(&[i32], Polynomial)> = vec![
            (
                &[-2, 0],
                poly(2, &[(&[2, 0], nu11 * nu11 / 2.0), (n1, -nu11 * nu11 / 2.0)]),
            ),
            (&[-1, 0], poly(2, &[(n1, c2)])),
            (&[-1, 1], poly(2, &[(n1, 1.0)])),
            (
                &[0, -2],
                poly(2, &[(&[0, 2], nu22 * nu22 / 2.0), (n2, -nu22 * nu22 / 2.0)]),
            ),
            (
                &[0, -1],
                poly(2, &[(n2, -c1 - eps * c1 * c1 * c2 + eps * c2)]),
            ),
            (&[0, 0], poly(2, &[(n2, eps - eps * c1 * c1)])),
            (&[1, -1], poly(2, &[(n2, -2.0 * eps * c1 * c2 - 1.0)])),
            (&[1, 0], poly(2, &[(n2, -2.0 * eps * c1)])),
            (&[2, -1], poly(2, &[(n2, -eps * c2)])),
            (&[2, 0], poly(2, &[(n2, -eps)])),
        ];
        assert_eq!(g.num_events(), 10);
        for (event, (shift, expect)) in g.events().iter().zip(&rows) {
            assert_eq!(event.shift(), *shift, "row order");
            assert_eq!(event.gamma(), expect, "gamma at shift {:?}", shift);
        }
    }

    #[test]
    fn zero_model_compiles_to_empty_table() {
        let model = SdeModel::new(
            vec![Polynomial::zero(1)],
            vec![vec![Polynomial::zero(1)]],
        )
        .unwrap();
        let g = Generator::compile(&model, &[0.3]).unwrap();
        assert_eq!(g.num_events(), 0);
        assert_eq!(g.diag_element(&MultiIndex::from_slice(&[4])), 0.0);
    }

    #[test]
    fn asymmetric_diffusion_is_rejected() {
        let err = SdeModel::new(
            vec![Polynomial::zero(2), Polynomial::zero(2)],
            vec![
                vec![Polynomial::constant(2, 1.0), Polynomial::constant(2, 0.5)],
                vec![Polynomial::constant(2, 0.25), Polynomial::constant(2, 1.0)],
            ],
        )
        .unwrap_err();
        assert_eq!(err, Error::AsymmetricDiffusion { i: 0, j: 1 });
    }

    #[test]
    fn diag_element_examples() {
        let (model, origin) = ou();
        let g = Generator::compile(&model, &origin).unwrap();
        assert_eq!(g.diag_element(&MultiIndex::from_slice(&[2])), -2.0);
        assert_eq!(g.diag_element(&MultiIndex::zeros(1)), 0.0);

        let (model, origin) = vdp();
        let g = Generator::compile(&model, &origin).unwrap();
        assert_eq!(g.diag_element(&MultiIndex::from_slice(&[0, 1])), 0.75);
        assert_eq!(g.diag_element(&MultiIndex::zeros(2)), 0.0);
    }

    #[test]
    fn offdiag_targets_examples() {
        let (model, origin) = ou();
        let g = Generator::compile(&model, &origin).unwrap();

        let t1 = g.offdiag_targets(&MultiIndex::from_slice(&[1]));
        assert_eq!(t1, vec![(MultiIndex::zeros(1), -1.0)]);

        let t2 = g.offdiag_targets(&MultiIndex::from_slice(&[2]));
        assert_eq!(
            t2,
            vec![
                (MultiIndex::zeros(1), 0.25),
                (MultiIndex::from_slice(&[1]), -2.0),
            ]
        );

        assert!(g.offdiag_targets(&MultiIndex::zeros(1)).is_empty());
    }

    #[test]
    fn apply_annihilates_constants() {
        for (model, origin) in [ou(), vdp()] {
            let g = Generator::compile(&model, &origin).unwrap();
            let w = WeightMap::unit(MultiIndex::zeros(g.dimension()));
            assert!(g.apply(&w).is_empty());
        }
    }

    #[test]
    fn apply_first_order_example() {
        let (model, origin) = ou();
        let g = Generator::compile(&model, &origin).unwrap();
        let out = g.apply(&WeightMap::unit(MultiIndex::from_slice(&[1])));
        assert_eq!(out.get(&MultiIndex::from_slice(&[1])), -1.0);
        assert_eq!(out.get(&MultiIndex::zeros(1)), -1.0);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn boundary_weights_vanish() {
        for (model, origin) in [ou(), vdp()] {
            let g = Generator::compile(&model, &origin).unwrap();
            let d = g.dimension();
            let upper = MultiIndex::new(std::iter::repeat(6u32).take(d));
            for n in crate::index::multi_range(&upper) {
                for event in g.events() {
                    if n.offset(event.shift()).is_none() {
                        assert_eq!(
                            event.gamma().eval_lattice(&n),
                            0.0,
                            "event {:?} at {}",
                            event.shift(),
                            n
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn merged_events_match_raw_events() {
        // model chosen so a drift monomial and a diffusion monomial land on
        // the same displacement and must be merged
        let drift = poly(1, &[(&[2], 0.7)]);
        let diffusion = poly(1, &[(&[3], 2.0)]);
        let model = SdeModel::new(vec![drift], vec![vec![diffusion]]).unwrap();
        let origin = [0.25];
        let g = Generator::compile(&model, &origin).unwrap();
        let raw = Generator::raw_events(&model, &origin).unwrap();
        assert!(raw.len() > g.num_events(), "merge must collapse rows");

        for k in 0..100u32 {
            let n = MultiIndex::from_slice(&[k % 10]);
            // diagonal element from both representations
            let merged_diag = g.diag_element(&n);
            let raw_diag: f64 = raw
                .iter()
                .filter(|e| e.is_diagonal())
                .map(|e| e.gamma().eval_lattice(&n))
                .sum();
            assert!((merged_diag - raw_diag).abs() <= 1e-12 * raw_diag.abs().max(1.0));
            // off-diagonal elements indexed by displacement
            for event in g.hopping_events() {
                let raw_sum: f64 = raw
                    .iter()
                    .filter(|e| e.shift() == event.shift())
                    .map(|e| e.gamma().eval_lattice(&n))
                    .sum();
                let merged = event.gamma().eval_lattice(&n);
                assert!((merged - raw_sum).abs() <= 1e-12 * raw_sum.abs().max(1.0));
            }
        }
    }

    #[test]
    fn event_table_renders_like_a_table() {
        let (model, origin) = ou();
        let g = Generator::compile(&model, &origin).unwrap();
        let table = g.to_string();
        assert!(table.contains("no."));
        assert!(table.contains("[-2]"));
        assert!(table.lines().count() == 4);
    }

    proptest! {
        // apply is linear in the weight map
        #[test]
        fn apply_is_linear(
            entries in prop::collection::vec(((0u32..5, 0u32..5), -2.0f64..2.0), 1..6),
            a in -3.0f64..3.0,
            b in -3.0f64..3.0,
        ) {
            let (model, origin) = vdp();
            let g = Generator::compile(&model, &origin).unwrap();
            let mut w1 = WeightMap::new();
            let mut w2 = WeightMap::new();
            for (i, ((n1, n2), c)) in entries.iter().enumerate() {
                let n = MultiIndex::from_slice(&[*n1, *n2]);
                if i % 2 == 0 {
                    w1.accumulate(n, *c);
                } else {
                    w2.accumulate(n, *c);
                }
            }
            let mut combined = WeightMap::new();
            for (n, c) in w1.iter() {
                combined.accumulate(n.clone(), a * c);
            }
            for (n, c) in w2.iter() {
                combined.accumulate(n.clone(), b * c);
            }
            let lhs = g.apply(&combined);
            let r1 = g.apply(&w1);
            let r2 = g.apply(&w2);
            let mut rhs = WeightMap::new();
            for (n, c) in r1.iter() {
                rhs.accumulate(n.clone(), a * c);
            }
            for (n, c) in r2.iter() {
                rhs.accumulate(n.clone(), b * c);
            }
            for (n, c) in lhs.iter() {
                prop_assert!((c - rhs.get(n)).abs() <= 1e-10 * c.abs().max(1.0));
            }
            for (n, c) in rhs.iter() {
                prop_assert!((c - lhs.get(n)).abs() <= 1e-10 * c.abs().max(1.0));
            }
        }
    }
}
