use crate::spin::{Observable, SpinParams};
use crate::{CMatrix, Result, C64};

/// The three spin-j angular momentum components.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularMomentum {
    pub x: Observable,
    pub y: Observable,
    pub z: Observable,
}

/// Spin-j matrices in the `J_z` eigenbasis ordered `m = j, j-1, …, -j`,
/// built from the ladder operator `J_+ |m⟩ = √(j(j+1) - m(m+1)) |m+1⟩`.
pub fn angular_momentum_ops(p: SpinParams) -> Result<AngularMomentum> {
    let d = p.dim();
    let j = p.j();
    let m = |k: usize| j - k as f64;

    let mut raise = CMatrix::zeros(d, d);
    for k in 1..d {
        let mk = m(k);
        raise[(k - 1, k)] = C64::new(libm::sqrt(j * (j + 1.0) - mk * (mk + 1.0)), 0.0);
    }
    let lower = raise.adjoint();

    let x = (&raise + &lower) * C64::new(0.5, 0.0);
    let y = (&raise - &lower) * C64::new(0.0, -0.5);
    let z = CMatrix::from_fn(d, d, |a, b| {
        if a == b {
            C64::new(m(a), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });

    Ok(AngularMomentum {
        x: Observable::new(x)?,
        y: Observable::new(y)?,
        z: Observable::new(z)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg;

    #[test]
    fn spin_half_is_half_pauli() {
        let ops = angular_momentum_ops(SpinParams::new(0.5).unwrap()).unwrap();
        let z = ops.z.matrix();
        assert_eq!(z[(0, 0)].re, 0.5);
        assert_eq!(z[(1, 1)].re, -0.5);
        assert_eq!(ops.x.matrix()[(0, 1)].re, 0.5);
        assert_eq!(ops.y.matrix()[(0, 1)].im, -0.5);
    }

    #[test]
    fn commutation_relation_holds_at_j10() {
        let ops = angular_momentum_ops(SpinParams::new(10.0).unwrap()).unwrap();
        let (x, y, z) = (ops.x.matrix(), ops.y.matrix(), ops.z.matrix());
        let residual = x * y - y * x - z * C64::new(0.0, 1.0);
        assert!(linalg::max_abs(&residual) < 1e-12);
    }

    #[test]
    fn trace_jz_squared_matches_closed_form() {
        // Σ_{m=-j}^{j} m² = j(j+1)(2j+1)/3, evaluated independently.
        let j = 10.0f64;
        let closed = j * (j + 1.0) * (2.0 * j + 1.0) / 3.0;
        assert_eq!(closed, 770.0);
        let ops = angular_momentum_ops(SpinParams::new(j).unwrap()).unwrap();
        assert!((ops.z.hs_norm_sq() - closed).abs() < 1e-9);
        // Casimir: J² = j(j+1) I.
        let (x, y, z) = (ops.x.matrix(), ops.y.matrix(), ops.z.matrix());
        let casimir = x * x + y * y + z * z;
        let expected = CMatrix::identity(21, 21) * C64::new(j * (j + 1.0), 0.0);
        assert!(linalg::max_abs(&(casimir - expected)) < 1e-10);
    }
}
