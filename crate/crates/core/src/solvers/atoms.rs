//! Convex constraint atoms and their exact Euclidean projections.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{inner_unchecked, Scalar, SelfAdjoint};

/// One convex set in an intersection `C = S₁ ∩ … ∩ S_J`.
///
/// Entrywise order constraints (`NonNeg`, `Box01`) only make sense for real
/// matrices and report [`Error::Unsupported`] on complex input.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstraintAtom<T: Scalar> {
    Psd,
    NonNeg,
    Box01,
    DiagLeqOne,
    DiagEqOne,
    /// `Σ_ij Z_ij ≤ λ`.
    TotalSumLeq(f64),
    /// `⟨C, Z⟩ ≤ rhs`.
    AffineHalfspace {
        normal: SelfAdjoint<T>,
        rhs: f64,
    },
    /// `‖Z − Z₀‖₁ ≤ radius` (entrywise ℓ₁ over all n² entries).
    L1BallAround {
        center: SelfAdjoint<T>,
        radius: f64,
    },
    /// `‖Z − Z₀‖_F ≤ radius`.
    L2BallAround {
        center: SelfAdjoint<T>,
        radius: f64,
    },
}

impl<T: Scalar> ConstraintAtom<T> {
    pub fn halfspace(normal: SelfAdjoint<T>, rhs: f64) -> Self {
        Self::AffineHalfspace { normal, rhs }
    }

    pub fn l1_ball(center: SelfAdjoint<T>, radius: f64) -> Self {
        Self::L1BallAround { center, radius }
    }

    pub fn l2_ball(center: SelfAdjoint<T>, radius: f64) -> Self {
        Self::L2BallAround { center, radius }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Psd => "psd",
            Self::NonNeg => "nonneg",
            Self::Box01 => "box01",
            Self::DiagLeqOne => "diag_leq_one",
            Self::DiagEqOne => "diag_eq_one",
            Self::TotalSumLeq(_) => "total_sum_leq",
            Self::AffineHalfspace { .. } => "affine_halfspace",
            Self::L1BallAround { .. } => "l1_ball",
            Self::L2BallAround { .. } => "l2_ball",
        }
    }

    pub fn is_psd(&self) -> bool {
        matches!(self, Self::Psd)
    }

    /// Euclidean projection of `z` onto the atom.
    pub fn project(&self, z: &SelfAdjoint<T>) -> Result<SelfAdjoint<T>> {
        let zero = T::from_real(0.0);
        match self {
            Self::Psd => z.project_psd(),
            Self::NonNeg => {
                self.real_only()?;
                Ok(z.map(|x| if x.real() < 0.0 { zero } else { x }))
            }
            Self::Box01 => {
                self.real_only()?;
                Ok(z.map(|x| T::from_real(x.real().clamp(0.0, 1.0))))
            }
            Self::DiagLeqOne => {
                Ok(z.map_upper(|i, j, x| if i == j && x.real() > 1.0 { T::from_real(1.0) } else { x }))
            }
            Self::DiagEqOne => Ok(z.map_upper(|i, j, x| if i == j { T::from_real(1.0) } else { x })),
            Self::TotalSumLeq(lambda) => {
                let excess = z.entry_sum() - lambda;
                if excess <= 0.0 {
                    return Ok(z.clone());
                }
                let n = z.dim() as f64;
                let c = T::from_real(excess / (n * n));
                Ok(z.map(|x| x - c))
            }
            Self::AffineHalfspace { normal, rhs } => {
                let c = Self::operand(normal, z)?;
                let nn = inner_unchecked(c, c);
                let gap = inner_unchecked(c, z) - rhs;
                if gap <= 0.0 || nn == 0.0 {
                    return Ok(z.clone());
                }
                Ok(z.add_scaled(-gap / nn, c))
            }
            Self::L1BallAround { center, radius } => {
                let c = Self::operand(center, z)?;
                let d = z - c;
                let moduli: Vec<f64> = d.as_matrix().iter().map(|x| x.modulus()).collect();
                let tau = l1_threshold(&moduli, *radius);
                if tau == 0.0 {
                    return Ok(z.clone());
                }
                Ok(d
                    .map(|x| {
                        let m = x.modulus();
                        if m <= tau {
                            zero
                        } else {
                            x * T::from_real((m - tau) / m)
                        }
                    })
                    .add_scaled(1.0, c))
            }
            Self::L2BallAround { center, radius } => {
                let c = Self::operand(center, z)?;
                let d = z - c;
                let norm = d.frobenius_norm();
                if norm <= *radius {
                    return Ok(z.clone());
                }
                Ok(c.add_scaled(radius / norm, &d))
            }
        }
    }

    /// `‖P(Z) − Z‖_F / (1 + ‖Z‖_F)`.
    pub fn residual(&self, z: &SelfAdjoint<T>) -> Result<f64> {
        let p = self.project(z)?;
        Ok((&p - z).frobenius_norm() / (1.0 + z.frobenius_norm()))
    }

    fn real_only(&self) -> Result<()> {
        if T::IS_COMPLEX {
            Err(Error::Unsupported(format!("{} is only defined for real matrices", self.name())))
        } else {
            Ok(())
        }
    }

    fn operand<'a>(m: &'a SelfAdjoint<T>, z: &SelfAdjoint<T>) -> Result<&'a SelfAdjoint<T>> {
        check_dim(m.dim(), z.dim())?;
        Ok(m)
    }
}

/// Soft-threshold level `τ` such that `Σ max(|v_i| − τ, 0) = radius`, or 0
/// when `v` already lies in the ball (sort-and-threshold algorithm).
fn l1_threshold(moduli: &[f64], radius: f64) -> f64 {
    let total: f64 = moduli.iter().sum();
    if total <= radius {
        return 0.0;
    }
    if radius <= 0.0 {
        return f64::INFINITY;
    }
    let mut u = moduli.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (k, &x) in u.iter().enumerate() {
        cum += x;
        let t = (cum - radius) / (k + 1) as f64;
        if x > t {
            tau = t;
        } else {
            break;
        }
    }
    tau
}

/// Largest per-atom residual.
pub fn max_residual<T: Scalar>(atoms: &[ConstraintAtom<T>], z: &SelfAdjoint<T>) -> Result<f64> {
    atoms.iter().try_fold(0.0_f64, |acc, a| Ok(acc.max(a.residual(z)?)))
}

/// Applies every projection once in the given order, PSD atoms last.
pub fn final_sweep<T: Scalar>(atoms: &[ConstraintAtom<T>], z: &SelfAdjoint<T>) -> Result<SelfAdjoint<T>> {
    let mut out = z.clone();
    for atom in atoms.iter().filter(|a| !a.is_psd()) {
        out = atom.project(&out)?;
    }
    for atom in atoms.iter().filter(|a| a.is_psd()) {
        out = atom.project(&out)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{HermitianMatrix, SymmetricMatrix};
    use nalgebra::DMatrix;
    use num_complex::Complex64;

    fn sym(rows: &[&[f64]]) -> SymmetricMatrix {
        let n = rows.len();
        SymmetricMatrix::new(DMatrix::from_fn(n, n, |i, j| rows[i][j])).unwrap()
    }

    #[test]
    fn box_clamps() {
        let z = sym(&[&[2.0, -1.0], &[-1.0, 2.0]]);
        assert_eq!(ConstraintAtom::Box01.project(&z).unwrap(), SymmetricMatrix::identity(2));
    }

    #[test]
    fn diag_eq_one_resets_diagonal() {
        let z = SymmetricMatrix::from_diagonal(&[3.0, 5.0]);
        assert_eq!(ConstraintAtom::DiagEqOne.project(&z).unwrap(), SymmetricMatrix::identity(2));
        let leq = ConstraintAtom::DiagLeqOne.project(&SymmetricMatrix::from_diagonal(&[3.0, 0.5])).unwrap();
        assert_eq!(leq.diagonal(), vec![1.0, 0.5]);
    }

    #[test]
    fn total_sum_shift_matches_halfspace_formula() {
        let j = SymmetricMatrix::ones(2);
        let p = ConstraintAtom::TotalSumLeq(2.0).project(&j).unwrap();
        assert_eq!(p, SymmetricMatrix::ones(2).scale(0.5));
        let h = ConstraintAtom::halfspace(SymmetricMatrix::ones(2), 2.0).project(&j).unwrap();
        assert!((&p - &h).max_abs() < 1e-15);
        assert_eq!(ConstraintAtom::TotalSumLeq(10.0).project(&j).unwrap(), j);
    }

    #[test]
    fn l1_ball_threshold() {
        assert_eq!(l1_threshold(&[3.0, 1.0], 2.0), 1.0);
        assert_eq!(l1_threshold(&[0.5, 0.5], 2.0), 0.0);
        let c = SymmetricMatrix::zeros(2);
        let z = sym(&[&[3.0, 0.0], &[0.0, -1.0]]);
        let p = ConstraintAtom::l1_ball(c, 2.0).project(&z).unwrap();
        assert_eq!(p, sym(&[&[2.0, 0.0], &[0.0, 0.0]]));
    }

    #[test]
    fn l2_ball_scales_toward_center() {
        let c = SymmetricMatrix::identity(2);
        let z = sym(&[&[1.0, 3.0], &[3.0, 1.0]]);
        let p = ConstraintAtom::l2_ball(c.clone(), 1.0).project(&z).unwrap();
        assert!(((&p - &c).frobenius_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_order_atoms_are_rejected() {
        let z = HermitianMatrix::identity(2);
        assert!(matches!(ConstraintAtom::<Complex64>::Box01.project(&z), Err(Error::Unsupported(_))));
        assert!(ConstraintAtom::<Complex64>::DiagEqOne.project(&z).is_ok());
    }

    #[test]
    fn localization_atoms_check_dimensions() {
        let atom = ConstraintAtom::l1_ball(SymmetricMatrix::zeros(3), 1.0);
        assert!(matches!(atom.project(&SymmetricMatrix::zeros(2)), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn sweep_ends_psd() {
        let z = sym(&[&[2.0, 3.0], &[3.0, -1.0]]);
        let atoms = vec![ConstraintAtom::Psd, ConstraintAtom::DiagEqOne];
        let out = final_sweep(&atoms, &z).unwrap();
        assert!(out.min_eigenvalue().unwrap() >= -1e-12);
    }
}
