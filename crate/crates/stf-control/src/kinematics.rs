//! Task-space to joint-space velocity mapping.
//!
//! The admittance layer produces a task-space velocity command; a robot
//! executes joint velocities. `task_to_joint` inverts the manipulator
//! Jacobian with a damped least-squares fallback near singular
//! configurations: far from singularities the exact right pseudoinverse
//! Jᵀ(JJᵀ)⁻¹ is used, and once the smallest singular value drops to the
//! threshold the damped form Jᵀ(JJᵀ + λI)⁻¹ takes over, trading tracking
//! accuracy for bounded joint speeds.
//!
//! Only the under- or exactly-determined case (task dimension ≤ joint
//! dimension) is supported; a task space wider than the joint space has no
//! velocity solution in general.

use nalgebra::RealField;
// Re-exported so downstream tools can build Jacobians and task velocities
// without depending on the linear-algebra crate directly.
pub use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lit, Scalar};

/// Manipulator Jacobian: rows are task coordinates, columns are joints.
pub type Jacobian<T> = DMatrix<T>;

// ==================== Configuration ====================

/// Damped least-squares inversion settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DlsConfig<T = f64> {
    /// Smallest-singular-value threshold below which damping engages [1/s
    /// per task unit — same scale as the Jacobian's singular values].
    pub epsilon: T,
    /// Damping factor λ added to JJᵀ in the singular branch.
    pub lambda: T,
}

impl<T: Scalar> Default for DlsConfig<T> {
    fn default() -> Self {
        DlsConfig { epsilon: lit::<T>(1e-3), lambda: lit::<T>(1e-2) }
    }
}

impl<T: Scalar> DlsConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.lambda.is_finite()) {
            return Err(Error::NonFinite { quantity: "DLS configuration" });
        }
        if self.epsilon <= T::zero() || self.lambda <= T::zero() {
            return Err(Error::invalid_params(format!(
                "DLS thresholds must be positive, got epsilon={} lambda={}",
                self.epsilon, self.lambda
            )));
        }
        Ok(())
    }
}

// ==================== Inversion ====================

/// Right pseudoinverse of `j`, damped near singularities.
///
/// Returns an `n×m` matrix for an `m×n` Jacobian. The branch switch is a
/// hard threshold on the smallest singular value, so the map is
/// intentionally discontinuous across σ_min = ε: continuity matters less
/// than a guaranteed bound on the damped branch, whose operator norm never
/// exceeds 1/(2√λ).
pub fn dls_pseudoinverse<T: Scalar + RealField>(
    j: &Jacobian<T>,
    cfg: &DlsConfig<T>,
) -> Result<DMatrix<T>> {
    cfg.validate()?;
    let (m, n) = j.shape();
    if m == 0 || n == 0 {
        return Err(Error::domain("Jacobian must be non-empty"));
    }
    if m > n {
        return Err(Error::domain(format!(
            "task dimension {m} exceeds joint dimension {n}; only redundant \
             or square Jacobians can be inverted"
        )));
    }
    if j.iter().any(|x| !num_traits::Float::is_finite(*x)) {
        return Err(Error::NonFinite { quantity: "Jacobian entry" });
    }

    let svd = j.clone().svd(false, false);
    let sigma_min = svd
        .singular_values
        .iter()
        .cloned()
        .fold(None::<T>, |acc, s| match acc {
            Some(prev) if prev <= s => Some(prev),
            _ => Some(s),
        })
        .expect("non-empty Jacobian has at least one singular value");

    let jjt = j * j.transpose();
    let gram = if sigma_min > cfg.epsilon {
        jjt
    } else {
        let mut damped = jjt;
        for i in 0..m {
            damped[(i, i)] = damped[(i, i)] + cfg.lambda;
        }
        damped
    };
    let inverse = gram.try_inverse().ok_or_else(|| {
        Error::Numeric(format!(
            "JJᵀ inversion failed for a {m}x{n} Jacobian with sigma_min={sigma_min}; \
             the matrix is numerically singular despite sigma_min > epsilon"
        ))
    })?;
    Ok(j.transpose() * inverse)
}

/// Maps a task-space velocity to joint velocities through the (damped)
/// pseudoinverse of `j`.
pub fn task_to_joint<T: Scalar + RealField>(
    j: &Jacobian<T>,
    cfg: &DlsConfig<T>,
    v_task: &DVector<T>,
) -> Result<DVector<T>> {
    if v_task.len() != j.nrows() {
        return Err(Error::domain(format!(
            "task velocity has {} components but the Jacobian has {} rows",
            v_task.len(),
            j.nrows()
        )));
    }
    Ok(dls_pseudoinverse(j, cfg)? * v_task)
}

// ==================== Fixtures ====================

/// Jacobian of a planar two-revolute-joint arm.
///
/// Link lengths `l1`, `l2` [m], joint angles `q1`, `q2` [rad]; maps joint
/// rates to end-effector (ẋ, ẏ).
pub fn planar_two_link_jacobian<T: Scalar + RealField>(
    l1: T,
    l2: T,
    q1: T,
    q2: T,
) -> Jacobian<T> {
    let (s1, c1) = num_traits::Float::sin_cos(q1);
    let (s12, c12) = num_traits::Float::sin_cos(q1 + q2);
    DMatrix::from_row_slice(
        2,
        2,
        &[
            -l1 * s1 - l2 * s12,
            -l2 * s12,
            l1 * c1 + l2 * c12,
            l2 * c12,
        ],
    )
}

// ==================== Tests ====================
