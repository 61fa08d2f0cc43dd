//! Catalog of proximity operators: scalar functions with known proxes and
//! the calculus rules that combine them.

mod calculus;
mod scalar_kind;
mod separable;

use std::sync::Arc;

pub use calculus::{
    Conjugate, Distance, DistanceFunction, DistanceVariant, MoreauComplement, MoreauEnvelope,
    MoreauVariant, ProductProx, QuadraticPerturbation, QuadraticProx, Reflection, Scaling,
    Semiorthogonal, SquaredDistance, SupportFunction, Thresholding, Translation,
};
pub use scalar_kind::{scalar_prox, soft_threshold, ScalarKind};
pub use separable::{OrthonormalSeparable, SeparableProx};

use crate::error::{Error, Result};
use crate::func::{SharedProx, Vector};
use crate::linear::SharedMap;
use crate::sets::ConvexSet;

/// Affine change of variables or quadratic perturbation of a base function.
#[derive(Debug, Clone, PartialEq)]
pub enum AffineTransform {
    Translation(Vector),
    Scaling(f64),
    Reflection,
    QuadraticPerturbation { alpha: f64, u: Vector, c: f64 },
}

pub fn separable_prox(kinds: Vec<ScalarKind>) -> Result<SharedProx> {
    Ok(Arc::new(SeparableProx::new(kinds)?))
}

pub fn prox_affine_calculus(base: SharedProx, transform: AffineTransform) -> Result<SharedProx> {
    Ok(match transform {
        AffineTransform::Translation(z) => Arc::new(Translation::new(base, z)?),
        AffineTransform::Scaling(rho) => Arc::new(Scaling::new(base, rho)?),
        AffineTransform::Reflection => Arc::new(Reflection::new(base)),
        AffineTransform::QuadraticPerturbation { alpha, u, c } => {
            Arc::new(QuadraticPerturbation::new(base, alpha, u, c)?)
        }
    })
}

pub fn prox_conjugate(base: SharedProx) -> SharedProx {
    Arc::new(Conjugate::new(base))
}

pub fn prox_moreau(base: SharedProx, variant: MoreauVariant) -> Result<SharedProx> {
    Ok(match variant {
        MoreauVariant::SquaredDistance => {
            let set = base.as_set().cloned().ok_or_else(|| {
                Error::InvalidParameter("squared distance needs an indicator base".into())
            })?;
            Arc::new(SquaredDistance::new(set))
        }
        MoreauVariant::Envelope => Arc::new(MoreauEnvelope::new(base)),
        MoreauVariant::Complement => Arc::new(MoreauComplement::new(base)),
    })
}

pub fn prox_semiorthogonal(base: SharedProx, map: SharedMap) -> Result<SharedProx> {
    Ok(Arc::new(Semiorthogonal::new(base, map)?))
}

pub fn prox_quadratic(map: SharedMap, y: Vector, weight: f64) -> Result<SharedProx> {
    Ok(Arc::new(QuadraticProx::new(map, y, weight)?))
}

pub fn prox_distance_family(set: ConvexSet, variant: DistanceVariant) -> Result<SharedProx> {
    Ok(match variant {
        DistanceVariant::Distance { weight } => Arc::new(Distance::new(set, weight)?),
        DistanceVariant::FunctionOfDistance { phi } => Arc::new(DistanceFunction::new(set, phi)?),
        DistanceVariant::Support => Arc::new(SupportFunction::new(set)),
        DistanceVariant::Thresholding { phi } => Arc::new(Thresholding::new(set, phi)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linear::{LinearMap, Matrix};
    use crate::scalar::{scalar_prox_oracle, Bracket};
    use crate::sets::Indicator;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_vec(xs.to_vec())
    }

    fn unit_box() -> SharedProx {
        Arc::new(Indicator::new(ConvexSet::boxed(vec![0.0], vec![1.0]).unwrap()))
    }

    fn abs1() -> SharedProx {
        separable_prox(vec![ScalarKind::abs(1.0)]).unwrap()
    }

    #[test]
    fn affine_examples() {
        let t = prox_affine_calculus(unit_box(), AffineTransform::Translation(v(&[5.0]))).unwrap();
        assert_eq!(t.prox(1.0, &v(&[7.0]))[0], 6.0);

        let r = prox_affine_calculus(abs1(), AffineTransform::Reflection).unwrap();
        let base = abs1();
        assert_eq!(r.prox(1.0, &v(&[3.0]))[0], -base.prox(1.0, &v(&[-3.0]))[0]);

        let q = prox_affine_calculus(
            abs1(),
            AffineTransform::QuadraticPerturbation {
                alpha: 1.0,
                u: v(&[0.0]),
                c: 0.0,
            },
        )
        .unwrap();
        assert!((q.prox(1.0, &v(&[4.0]))[0] - 1.5).abs() < 1e-15);

        assert!(prox_affine_calculus(abs1(), AffineTransform::Scaling(0.0)).is_err());
    }

    #[test]
    fn negative_scaling_is_reflection() {
        let s = prox_affine_calculus(abs1(), AffineTransform::Scaling(-1.0)).unwrap();
        let r = prox_affine_calculus(abs1(), AffineTransform::Reflection).unwrap();
        for x in [-3.0, -0.2, 0.7, 4.0] {
            assert_eq!(s.prox(0.8, &v(&[x])), r.prox(0.8, &v(&[x])));
        }
    }

    #[test]
    fn conjugate_examples() {
        let b: SharedProx = Arc::new(Indicator::new(ConvexSet::boxed(vec![-1.0], vec![1.0]).unwrap()));
        let c = prox_conjugate(b.clone());
        assert_eq!(c.prox(1.0, &v(&[3.0]))[0], 2.0);
        assert_eq!(c.eval(&v(&[-2.5])), 2.5);
        let cc = prox_conjugate(c.clone());
        for x in [-3.0, 0.4, 2.0] {
            let x = v(&[x]);
            assert!((cc.prox(0.6, &x) - b.prox(0.6, &x)).norm() < 1e-15);
            assert_eq!(b.prox(1.0, &x) + c.prox(1.0, &x), x);
        }
    }

    #[test]
    fn moreau_examples() {
        let sq = prox_moreau(unit_box(), MoreauVariant::SquaredDistance).unwrap();
        assert_eq!(sq.prox(1.0, &v(&[3.0]))[0], 2.0);
        let env = prox_moreau(unit_box(), MoreauVariant::Envelope).unwrap();
        assert_eq!(env.prox(1.0, &v(&[3.0]))[0], 2.0);
        assert_eq!(env.eval(&v(&[3.0])), sq.eval(&v(&[3.0])));
        let comp = prox_moreau(abs1(), MoreauVariant::Complement).unwrap();
        assert_eq!(comp.prox(1.0, &v(&[0.0]))[0], 0.0);
        assert!(matches!(
            prox_moreau(abs1(), MoreauVariant::SquaredDistance),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn semiorthogonal_examples() {
        let id: SharedMap = Arc::new(Matrix::identity(3));
        let base = separable_prox(vec![ScalarKind::abs(0.7); 3]).unwrap();
        let so = prox_semiorthogonal(base.clone(), id).unwrap();
        let x = v(&[1.2, -0.3, 4.0]);
        assert!((so.prox(1.3, &x) - base.prox(1.3, &x)).amax() <= 1e-12);

        let root2: SharedMap = Arc::new(Matrix::scaled_identity(1, 2f64.sqrt()));
        let so = prox_semiorthogonal(abs1(), root2).unwrap();
        let b = Bracket::new(-10.0, 10.0).unwrap();
        let oracle = scalar_prox_oracle(|p| (2f64.sqrt() * p).abs(), 3.0, b, 1e-13).unwrap();
        assert!((so.prox(1.0, &v(&[3.0]))[0] - oracle).abs() < 1e-6);

        let plain: SharedMap = Arc::new(Matrix::from_rows(&[vec![1.0, 1.0]]).unwrap());
        assert!(matches!(
            prox_semiorthogonal(abs1(), plain),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn quadratic_examples() {
        let q = prox_quadratic(Arc::new(Matrix::identity(2)), v(&[0.0, 0.0]), 1.0).unwrap();
        assert!((q.prox(1.0, &v(&[3.0, -1.0])) - v(&[1.5, -0.5])).norm() < 1e-15);
        let zero = Matrix::new(nalgebra::DMatrix::zeros(1, 2)).unwrap();
        let q = prox_quadratic(Arc::new(zero), v(&[0.0]), 1.0).unwrap();
        assert_eq!(q.prox(2.0, &v(&[3.0, -1.0])), v(&[3.0, -1.0]));
    }

    #[test]
    fn quadratic_prox_solves_its_linear_system() {
        let l = Matrix::from_rows(&[
            vec![0.3, -1.2, 0.5],
            vec![1.0, 0.0, 2.0],
            vec![-0.7, 0.4, 0.1],
            vec![0.0, 1.5, -0.3],
            vec![2.2, 0.6, 0.9],
        ])
        .unwrap();
        let y = v(&[1.0, -2.0, 0.5, 0.0, 3.0]);
        let (w, gamma) = (0.8, 1.7);
        let q = prox_quadratic(Arc::new(l.clone()), y.clone(), w).unwrap();
        let x = v(&[0.2, -1.0, 4.0]);
        let p = q.prox(gamma, &x);
        let g = gamma * w;
        let lhs = &p + l.adjoint(&l.apply(&p)) * g;
        let rhs = &x + l.adjoint(&y) * g;
        assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn distance_family_examples() {
        let origin = ConvexSet::boxed(vec![0.0], vec![0.0]).unwrap();
        let d = prox_distance_family(origin.clone(), DistanceVariant::Distance { weight: 1.0 }).unwrap();
        assert_eq!(d.prox(1.0, &v(&[3.0]))[0], 2.0);
        assert_eq!(d.prox(1.0, &v(&[0.5]))[0], 0.0);

        let cube = ConvexSet::cube(3, -1.0, 1.0).unwrap();
        let s = prox_distance_family(cube, DistanceVariant::Support).unwrap();
        let x = v(&[2.5, -0.3, -4.0]);
        let p = s.prox(1.0, &x);
        for k in 0..3 {
            assert_eq!(p[k], x[k] - x[k].clamp(-1.0, 1.0));
        }

        let half_sq = ScalarKind::Power { kappa: 0.5, q: 2.0 };
        let f = prox_distance_family(
            ConvexSet::boxed(vec![0.0, 0.0], vec![0.0, 0.0]).unwrap(),
            DistanceVariant::FunctionOfDistance { phi: half_sq },
        )
        .unwrap();
        let x = v(&[3.0, -1.0]);
        assert!((f.prox(1.0, &x) - &x / 2.0).norm() < 1e-15);

        assert!(prox_distance_family(
            origin.clone(),
            DistanceVariant::FunctionOfDistance { phi: ScalarKind::abs(1.0) }
        )
        .is_err());
        assert!(prox_distance_family(
            origin,
            DistanceVariant::Thresholding { phi: ScalarKind::Entropy }
        )
        .is_err());
    }

    #[test]
    fn thresholding_on_a_ball_shrinks_the_norm() {
        // sigma_B(x) = |x| for the unit ball, plus |x|: prox shrinks |x| by 2 gamma
        let ball = ConvexSet::ball(vec![0.0, 0.0], 1.0).unwrap();
        let f = prox_distance_family(ball, DistanceVariant::Thresholding { phi: ScalarKind::abs(1.0) })
            .unwrap();
        let x = v(&[3.0, 4.0]);
        let gamma = 0.5;
        let expect = &x * ((5.0 - 2.0 * gamma) / 5.0);
        assert!((f.prox(gamma, &x) - expect).norm() < 1e-14);
        assert_eq!(f.prox(gamma, &v(&[0.3, 0.4])), v(&[0.0, 0.0]));
    }
}
