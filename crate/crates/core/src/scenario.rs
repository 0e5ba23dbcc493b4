//! Physical objects of the entanglement-swapping network.
//!
//! Angles use the amplitude convention `|φ(α)⟩ = cos α |HH⟩ + sin α |VV⟩`, so
//! `α = π/4` is the Bell state `|Φ⁺⟩` and `α = 0` the product state `|HH⟩`.
//! A half-wave-plate angle `θ` corresponds to `α = 2θ`.
//!
//! Bell basis ordering is `{Φ⁺, Φ⁻, Ψ⁺, Ψ⁻}` with `|H⟩ = (1, 0)`, `|V⟩ = (0, 1)`.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, Result};
use crate::linalg::{pauli, ComplexMatrix};

/// Source visibility of S1 measured in the diagonal basis.
pub const MEASURED_V1: f64 = 0.9710;
/// Source visibility of S2 measured in the diagonal basis.
pub const MEASURED_V2: f64 = 0.9860;
/// Fitted Hong-Ou-Mandel visibility at Bob.
pub const MEASURED_VH: f64 = 0.943;

const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSpec {
    /// Amplitude angle α in `[0, π/2]`.
    pub amplitude_angle: f64,
    /// White-noise visibility in `[0, 1]`.
    pub visibility: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsmSpec {
    pub hom_visibility: f64,
}

/// Dichotomic observable `n·σ` on a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservableSpec {
    pub bloch: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub source1: SourceSpec,
    pub source2: SourceSpec,
    pub bsm: BsmSpec,
    pub alice_settings: [ObservableSpec; 2],
    pub charlie_settings: [ObservableSpec; 2],
}

fn check_unit_interval(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(out_of_range(field, format!("visibility {v} outside [0, 1]")))
    }
}

impl SourceSpec {
    pub fn new(amplitude_angle: f64, visibility: f64) -> Result<Self> {
        let s = Self {
            amplitude_angle,
            visibility,
        };
        s.validate("source")?;
        Ok(s)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let a = self.amplitude_angle;
        if !(a.is_finite() && (0.0..=FRAC_PI_2 + 1e-12).contains(&a)) {
            return Err(out_of_range(
                &format!("{field}.amplitude_angle"),
                format!("angle {a} outside [0, π/2]"),
            ));
        }
        check_unit_interval(&format!("{field}.visibility"), self.visibility)
    }
}

impl BsmSpec {
    pub fn new(hom_visibility: f64) -> Result<Self> {
        let b = Self { hom_visibility };
        b.validate("bsm")?;
        Ok(b)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        check_unit_interval(&format!("{field}.hom_visibility"), self.hom_visibility)
    }
}

impl ObservableSpec {
    pub fn new(bloch: [f64; 3]) -> Result<Self> {
        let o = Self { bloch };
        o.validate("observable")?;
        Ok(o)
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        let norm = self.bloch.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(out_of_range(
                &format!("{field}.bloch"),
                format!("Bloch vector norm {norm} is not 1"),
            ));
        }
        Ok(())
    }

    /// `X`
    pub fn x() -> Self {
        Self { bloch: [1.0, 0.0, 0.0] }
    }

    /// `Z`
    pub fn z() -> Self {
        Self { bloch: [0.0, 0.0, 1.0] }
    }

    /// `(Z + X)/√2`
    pub fn z_plus_x() -> Self {
        Self {
            bloch: [FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2],
        }
    }

    /// `(Z − X)/√2`
    pub fn z_minus_x() -> Self {
        Self {
            bloch: [-FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2],
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.source1.validate("source1")?;
        self.source2.validate("source2")?;
        self.bsm.validate("bsm")?;
        for (i, o) in self.alice_settings.iter().enumerate() {
            o.validate(&format!("alice_settings[{i}]"))?;
        }
        for (i, o) in self.charlie_settings.iter().enumerate() {
            o.validate(&format!("charlie_settings[{i}]"))?;
        }
        Ok(())
    }
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Bell vectors in the order `Φ⁺, Φ⁻, Ψ⁺, Ψ⁻`.
pub fn bell_vector(index: usize) -> [Complex64; 4] {
    let h = FRAC_1_SQRT_2;
    match index {
        0 => [re(h), re(0.0), re(0.0), re(h)],
        1 => [re(h), re(0.0), re(0.0), re(-h)],
        2 => [re(0.0), re(h), re(h), re(0.0)],
        3 => [re(0.0), re(h), re(-h), re(0.0)],
        _ => panic!("Bell index {index} out of range"),
    }
}

pub fn bell_projector(index: usize) -> ComplexMatrix {
    ComplexMatrix::projector(&bell_vector(index))
}

/// `v |φ(α)⟩⟨φ(α)| + (1 − v)/4 · I₄`
pub fn build_source_state(s: &SourceSpec) -> Result<ComplexMatrix> {
    s.validate("source")?;
    let (sin, cos) = s.amplitude_angle.sin_cos();
    let phi = [re(cos), re(0.0), re(0.0), re(sin)];
    let pure = ComplexMatrix::projector(&phi).scale(s.visibility);
    let noise = ComplexMatrix::identity(4).scale((1.0 - s.visibility) / 4.0);
    pure.add(&noise)
}

/// Partial Bell-state measurement `(Π₀, Π₁, Π₂)` with HOM visibility `v_h`.
pub fn build_bsm_povm(b: &BsmSpec) -> Result<[ComplexMatrix; 3]> {
    b.validate("bsm")?;
    let vh = b.hom_visibility;
    let phi_p = bell_projector(0);
    let phi_m = bell_projector(1);
    let blur = phi_p.add(&phi_m)?.scale((1.0 - vh) / 2.0);
    let pi0 = phi_p.scale(vh).add(&blur)?;
    let pi1 = phi_m.scale(vh).add(&blur)?;
    let pi2 = ComplexMatrix::identity(4).sub(&pi0)?.sub(&pi1)?;
    Ok([pi0, pi1, pi2])
}

/// `n_x X + n_y Y + n_z Z`
pub fn build_observable(o: &ObservableSpec) -> Result<ComplexMatrix> {
    o.validate("observable")?;
    let [nx, ny, nz] = o.bloch;
    pauli::x()
        .scale(nx)
        .add(&pauli::y().scale(ny))?
        .add(&pauli::z().scale(nz))
}

/// Both sources near `|Φ⁺⟩`-type states with `A ∈ {X, Z}` and `C ∈ {(Z±X)/√2}`.
pub fn default_paper_scenario(v1: f64, v2: f64, vh: f64, alpha1: f64, alpha2: f64) -> Result<Scenario> {
    let s = Scenario {
        source1: SourceSpec::new(alpha1, v1)?,
        source2: SourceSpec::new(alpha2, v2)?,
        bsm: BsmSpec::new(vh)?,
        alice_settings: [ObservableSpec::x(), ObservableSpec::z()],
        charlie_settings: [ObservableSpec::z_plus_x(), ObservableSpec::z_minus_x()],
    };
    s.validate()?;
    Ok(s)
}

/// Noise-free `|Φ⁺⟩ ⊗ |Φ⁺⟩` scenario.
pub fn ideal_scenario() -> Scenario {
    default_paper_scenario(1.0, 1.0, 1.0, FRAC_PI_4, FRAC_PI_4).expect("ideal parameters are valid")
}

/// Scenario at the measured visibilities with both sources at `α = π/4`.
pub fn measured_noise_scenario() -> Scenario {
    default_paper_scenario(MEASURED_V1, MEASURED_V2, MEASURED_VH, FRAC_PI_4, FRAC_PI_4)
        .expect("measured parameters are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::linalg::DEFAULT_TOL;

    #[test]
    fn bell_source_at_quarter_pi() {
        let rho = build_source_state(&SourceSpec::new(FRAC_PI_4, 1.0).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&bell_projector(0)).unwrap() < 1e-15);
    }

    #[test]
    fn fully_depolarised_source() {
        for alpha in [0.0, 0.3, FRAC_PI_2] {
            let rho = build_source_state(&SourceSpec::new(alpha, 0.0).unwrap()).unwrap();
            let mixed = ComplexMatrix::identity(4).scale(0.25);
            assert!(rho.max_abs_diff(&mixed).unwrap() < 1e-16);
        }
    }

    #[test]
    fn product_state_endpoint() {
        let rho = build_source_state(&SourceSpec::new(0.0, 1.0).unwrap()).unwrap();
        assert!(rho.max_abs_diff(&ComplexMatrix::diag(&[1.0, 0.0, 0.0, 0.0])).unwrap() < 1e-16);
    }

    #[test]
    fn source_rejects_out_of_range() {
        assert!(matches!(SourceSpec::new(2.0, 0.5), Err(Error::OutOfRange { .. })));
        let err = SourceSpec::new(0.1, 1.2).unwrap_err();
        assert!(err.to_string().contains("visibility"));
    }

    #[test]
    fn ideal_bsm_is_partial_bell_measurement() {
        let [p0, p1, p2] = build_bsm_povm(&BsmSpec::new(1.0).unwrap()).unwrap();
        assert!(p0.max_abs_diff(&bell_projector(0)).unwrap() < 1e-15);
        assert!(p1.max_abs_diff(&bell_projector(1)).unwrap() < 1e-15);
        let rest = bell_projector(2).add(&bell_projector(3)).unwrap();
        assert!(p2.max_abs_diff(&rest).unwrap() < 1e-15);
    }

    #[test]
    fn blind_bsm_endpoint() {
        let [p0, p1, _] = build_bsm_povm(&BsmSpec::new(0.0).unwrap()).unwrap();
        let half = bell_projector(0).add(&bell_projector(1)).unwrap().scale(0.5);
        assert!(p0.max_abs_diff(&half).unwrap() < 1e-15);
        assert!(p1.max_abs_diff(&half).unwrap() < 1e-15);
        assert!(BsmSpec::new(-0.1).is_err());
    }

    #[test]
    fn povm_grid_is_complete_and_positive() {
        for k in 0..=100 {
            let vh = k as f64 / 100.0;
            let povm = build_bsm_povm(&BsmSpec::new(vh).unwrap()).unwrap();
            let sum = povm[0].add(&povm[1]).unwrap().add(&povm[2]).unwrap();
            assert!(sum.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() <= 1e-14);
            for p in &povm {
                let chk = p.check_hermitian_psd(DEFAULT_TOL).unwrap();
                assert!(chk.is_psd, "vh={vh}: {chk:?}");
            }
        }
    }

    #[test]
    fn source_grid_is_a_state() {
        for i in 0..=100 {
            for j in 0..=100 {
                if (i * 101 + j) % 7 != 0 {
                    continue;
                }
                let alpha = FRAC_PI_2 * i as f64 / 100.0;
                let v = j as f64 / 100.0;
                let rho = build_source_state(&SourceSpec::new(alpha, v).unwrap()).unwrap();
                assert!((rho.trace().unwrap() - re(1.0)).norm() <= 1e-12);
                assert!(rho.check_hermitian_psd(1e-12).unwrap().min_eigenvalue >= -1e-12);
            }
        }
    }

    #[test]
    fn settings_observables() {
        let a0 = build_observable(&ObservableSpec::x()).unwrap();
        assert_eq!(a0, pauli::x());
        let c0 = build_observable(&ObservableSpec::new([FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2]).unwrap()).unwrap();
        let expected = pauli::z().add(&pauli::x()).unwrap().scale(FRAC_1_SQRT_2);
        assert!(c0.max_abs_diff(&expected).unwrap() < 1e-15);
        assert_eq!(build_observable(&ObservableSpec::z()).unwrap(), pauli::z());
        assert!(ObservableSpec::new([1.0, 1.0, 0.0]).is_err());
    }

    #[test]
    fn observables_square_to_identity() {
        let specs = [
            ObservableSpec::x(),
            ObservableSpec::z(),
            ObservableSpec::z_plus_x(),
            ObservableSpec::z_minus_x(),
            ObservableSpec::new([0.6, 0.0, 0.8]).unwrap(),
            ObservableSpec::new([0.0, 1.0, 0.0]).unwrap(),
        ];
        for o in specs {
            let m = build_observable(&o).unwrap();
            let sq = m.matmul(&m).unwrap();
            assert!(sq.max_abs_diff(&ComplexMatrix::identity(2)).unwrap() <= 1e-12);
        }
    }

    #[test]
    fn default_scenarios() {
        let s = default_paper_scenario(MEASURED_V1, MEASURED_V2, MEASURED_VH, FRAC_PI_4, FRAC_PI_4).unwrap();
        assert_eq!(s.alice_settings, [ObservableSpec::x(), ObservableSpec::z()]);
        assert!(default_paper_scenario(1.0, 1.0, 1.0, 0.0, 0.0).is_ok());
        assert!(default_paper_scenario(1.0, 1.0, 1.5, 0.0, 0.0).is_err());
    }
}
