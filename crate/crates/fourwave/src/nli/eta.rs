//! NLI power coefficients: pairing χ tables with modulation coefficients.
//!
//! η for one interference family is the dot product of the family's χ
//! vector against a modulation coefficient vector whose slot 0 holds the
//! constant 1 for the modulation-independent Gaussian baseline. Every
//! model shares this pairing; they differ only in where the coefficients
//! come from — zeros for the Gaussian-noise baseline, lifted
//! per-polarization excesses for the factorized paths, the full
//! joint-cumulant table for the 4D paths, and windowed moments feeding
//! either of the latter two for the windowed variants.

use super::chi::ChiIntegrals;
use crate::moments::CoefficientSet;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EtaError {
    #[error("dimension mismatch: χ vector has {chi} slots, coefficient vector has {coeffs}")]
    DimensionMismatch { chi: usize, coeffs: usize },
}

/// Per-family NLI power coefficients, 1/W²: the NLI power on the channel
/// of interest is (η_SCI + η_XCI + η_MCI)·P³ at total launch power P.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EtaCoefficients {
    pub sci: f64,
    pub xci: f64,
    pub mci: f64,
}

impl EtaCoefficients {
    /// η_total = η_SCI + η_XCI + η_MCI, the coefficient of P³.
    pub fn total(&self) -> f64 {
        self.sci + self.xci + self.mci
    }
}

/// Slice-level pairing: η = Σᵢ χᵢ·cᵢ over equal-length vectors, with the
/// Gaussian baseline in slot 0 of both (its coefficient is the constant 1,
/// see [`coefficient_vector`]). Errors when the lengths disagree.
pub fn eta(chi: &[f64], coeffs: &[f64]) -> Result<f64, EtaError> {
    if chi.len() != coeffs.len() {
        return Err(EtaError::DimensionMismatch {
            chi: chi.len(),
            coeffs: coeffs.len(),
        });
    }
    Ok(chi.iter().zip(coeffs).map(|(x, c)| x * c).sum())
}

/// The coefficient vector paired against a family's χ vector: the constant
/// 1 in the Gaussian baseline slot, then the fourteen correction
/// coefficients in the canonical slot order.
pub fn coefficient_vector(c: &CoefficientSet) -> [f64; 15] {
    let mut v = [1.0; 15];
    for (slot, (_, value)) in v[1..].iter_mut().zip(c.fields()) {
        *slot = value;
    }
    v
}

/// All three family η from one χ table and one coefficient set.
pub fn eta_coefficients(table: &ChiIntegrals, coeffs: &CoefficientSet) -> EtaCoefficients {
    EtaCoefficients {
        sci: table.sci.dot(coeffs),
        xci: table.xci.dot(coeffs),
        mci: table.mci.dot(coeffs),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{coefficients_4d, coefficients_egn, MomentSet};
    use crate::nli::chi::ChiVector;
    use crate::shaping::{Distribution1D, PermutationAssignment};

    /// A χ table with realistic magnitudes and the improper-cumulant slots
    /// zero, as produced by the quadrature engine for a proper input
    /// premise.
    fn synthetic_table() -> ChiIntegrals {
        let vec = |gn: f64, scale: f64| ChiVector {
            gn,
            phi1: 0.25 * gn * scale,
            phi2: 0.25 * gn * scale,
            phi3: 0.5 * gn * scale,
            psi1: 0.015 * gn * scale,
            psi2: 0.015 * gn * scale,
            psi3: 0.02 * gn * scale,
            psi4: 0.045 * gn * scale,
            ..ChiVector::default()
        };
        ChiIntegrals {
            sci: vec(750.0, 1.0),
            xci: vec(550.0, 0.9),
            mci: vec(7.0, 0.1),
        }
    }

    #[test]
    fn slice_pairing_sums_products_and_rejects_mismatch() {
        assert_eq!(eta(&[2.0, 3.0], &[1.0, 4.0]), Ok(14.0));
        assert_eq!(
            eta(&[1.0; 15], &[1.0; 14]),
            Err(EtaError::DimensionMismatch {
                chi: 15,
                coeffs: 14
            })
        );
        assert_eq!(eta(&[], &[]), Ok(0.0));
    }

    #[test]
    fn slice_pairing_agrees_with_structured_dot() {
        let table = synthetic_table();
        let mut c = CoefficientSet::default();
        c.phi1 = -0.6;
        c.phi2 = -0.55;
        c.phi3 = 0.1;
        c.psi1 = 3.2;
        c.psi4 = -0.4;
        c.lambda2 = 0.7; // multiplies a zero slot in the synthetic table
        for fam in [&table.sci, &table.xci, &table.mci] {
            let via_slices = eta(&fam.as_array(), &coefficient_vector(&c)).expect("lengths");
            assert!((via_slices - fam.dot(&c)).abs() < 1e-12 * fam.gn);
        }
    }

    #[test]
    fn gaussian_coefficients_leave_only_the_baseline() {
        let table = synthetic_table();
        let e = eta_coefficients(&table, &CoefficientSet::default());
        assert_eq!(e.sci, table.sci.gn);
        assert_eq!(e.xci, table.xci.gn);
        assert_eq!(e.mci, table.mci.gn);
        assert_eq!(e.total(), table.sci.gn + table.xci.gn + table.mci.gn);
    }

    #[test]
    fn factorized_lift_places_per_polarization_excesses() {
        let d = Distribution1D::four_level([0.4, 0.3, 0.2, 0.1]).expect("dist");
        let law = MomentSet::iid_shaped(&d, &PermutationAssignment::identity(4)).expect("law");
        let e = coefficients_egn(&law).expect("egn");
        let lifted: CoefficientSet = e.into();
        assert_eq!(lifted.phi1, e.phi_x);
        assert_eq!(lifted.phi2, e.phi_y);
        assert_eq!(lifted.psi1, e.psi_x);
        assert_eq!(lifted.psi2, e.psi_y);
        for (name, v) in lifted.fields() {
            if !matches!(name, "phi1" | "phi2" | "psi1" | "psi2") {
                assert_eq!(v, 0.0, "{name} must stay zero under the lift");
            }
        }
    }

    #[test]
    fn pm_2d_iid_law_ties_factorized_and_joint_paths() {
        // For a polarization-independent proper i.i.d. law the joint
        // cumulant table collapses onto the per-polarization excesses, so
        // the two coefficient routes (deliberately implemented apart) must
        // give the same η in every family.
        let d = Distribution1D::four_level([0.35, 0.3, 0.2, 0.15]).expect("dist");
        let law = MomentSet::iid_shaped(&d, &PermutationAssignment::identity(4)).expect("law");
        let table = synthetic_table();
        let joint = eta_coefficients(&table, &coefficients_4d(&law).expect("4d"));
        let fact = eta_coefficients(
            &table,
            &coefficients_egn(&law).expect("egn").into(),
        );
        for (a, b) in [
            (joint.sci, fact.sci),
            (joint.xci, fact.xci),
            (joint.mci, fact.mci),
        ] {
            assert!((a - b).abs() <= 1e-6 * b.abs(), "{a} vs {b}");
        }
    }
}
