//! Parametric representation of an amplitude: loop basis, exact graph
//! polynomials, and the pointwise Gaussian-reduced integrand.

pub mod basis;
pub mod gaussian;
pub mod kirchhoff;
pub mod symanzik;

pub use basis::{ExternalMomenta, LoopBasis};
pub use gaussian::{
    gaussian_core, gaussian_reduce, moment_factor_terms, ops_homogeneous, quadratic_form,
    scale_lambda, GaussianCore, QuadraticForm,
};
pub use kirchhoff::{
    kirchhoff_solve, maximum_principle_constant, min_eigenvalue_bound_check, EigenBoundReport,
};
pub use symanzik::{eval_forest_terms, f_from_forests, u_from_det, u_from_trees, AlphaPoly, ForestTerm};

use crate::error::Result;
use crate::float::{Real, C};
use crate::graph::{FeynmanDiagram, VertexId};
use std::collections::BTreeMap;

/// A diagram prepared for parametric evaluation: loop basis, exact `U` and
/// momentum polynomial, masses in line-index order.
#[derive(Clone, Debug)]
pub struct ParametricIntegrand<R: Real> {
    pub diagram: FeynmanDiagram<R>,
    pub basis: LoopBasis<R>,
    pub u: AlphaPoly,
    pub f: Vec<ForestTerm>,
    pub masses: Vec<R>,
    pub loops: usize,
}

impl<R: Real> ParametricIntegrand<R> {
    pub fn new(diagram: &FeynmanDiagram<R>) -> Result<Self> {
        let basis = LoopBasis::build(diagram)?;
        let u = u_from_trees(&basis);
        // the determinant route is the independent cross-check
        if basis.loop_count() <= 6 {
            let udet = u_from_det(&basis)?;
            if u != udet {
                return Err(crate::error::Error::Graph(
                    "tree and determinant Symanzik polynomials disagree".into(),
                ));
            }
        }
        let f = f_from_forests(&basis);
        let masses = basis
            .lines
            .iter()
            .map(|l| diagram.masses[l])
            .collect();
        let loops = basis.loop_count();
        Ok(ParametricIntegrand {
            diagram: diagram.clone(),
            basis,
            u,
            f,
            masses,
            loops,
        })
    }

    pub fn line_count(&self) -> usize {
        self.basis.lines.len()
    }

    pub fn eval_u(&self, alpha: &[R]) -> R {
        self.u.eval(alpha)
    }

    pub fn eval_f(&self, alpha: &[R], inflows: &BTreeMap<VertexId, [R; 4]>) -> R {
        eval_forest_terms(&self.f, alpha, inflows)
    }

    pub fn mass_term(&self, alpha: &[R]) -> R {
        let mut s = R::zero();
        for (a, m) in alpha.iter().zip(self.masses.iter()) {
            s += *a * *m * *m;
        }
        s
    }

    /// The regulated integrand at one parameter point.
    pub fn value(&self, alpha: &[R], p: &ExternalMomenta<R>, z: C<R>) -> Result<C<R>> {
        gaussian_reduce(&self.diagram, &self.basis, alpha, p, z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, lid, nested_double_bubble};

    #[test]
    fn f_over_u_equals_minimized_quadratic() {
        let d = banana::<f64>(3, 1.0);
        let integ = ParametricIntegrand::new(&d).unwrap();
        let mut p = ExternalMomenta::zero::<f64>(&d);
        p.set(&lid("x1"), [0.7, 0.1, -0.4, 0.2]);
        p.set(&lid("x2"), [0.7, 0.1, -0.4, 0.2]);
        for alpha in [[0.5, 1.0, 2.0], [1.3, 0.2, 0.9]] {
            let core = gaussian_core(&integ.basis, &alpha, &p).unwrap();
            let inflows = p.vertex_inflows(&d);
            let f = integ.eval_f(&alpha, &inflows);
            let u = integ.eval_u(&alpha);
            assert!((core.vmin - f / u).abs() < 1e-12 * (f / u).abs().max(1.0));
            assert!((core.u - u).abs() < 1e-12 * u.abs());
        }
    }

    #[test]
    fn quadratic_form_matrices_by_hand() {
        // our deterministic basis for the sunset: tree {l1}, loops l2, l3
        let d = banana::<f64>(3, 1.0);
        let integ = ParametricIntegrand::new(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        let (a1, a2, a3) = (0.5, 0.7, 1.1);
        let form = quadratic_form(&integ.basis, &[a1, a2, a3], &p).unwrap();
        assert_eq!(form.q.n, 2);
        let det = form.q.get(0, 0) * form.q.get(1, 1) - form.q.get(0, 1) * form.q.get(1, 0);
        let u = a1 * a2 + a1 * a3 + a2 * a3;
        assert!((det - u).abs() < 1e-12);
        // with unit alphas this is the unweighted cycle Gram matrix
        let form1 = quadratic_form(&integ.basis, &[1.0, 1.0, 1.0], &p).unwrap();
        assert!((form1.q.get(0, 0) - 2.0).abs() < 1e-14);
        assert!((form1.q.get(1, 1) - 2.0).abs() < 1e-14);
        assert!((form1.q.get(0, 1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        let d = banana::<f64>(2, 1.0);
        let integ = ParametricIntegrand::new(&d).unwrap();
        let p = ExternalMomenta::zero::<f64>(&d);
        assert!(integ.value(&[1.0, 0.0], &p, num_complex::Complex64::new(0.0, 0.0)).is_err());
        assert!(integ.value(&[1.0, -0.5], &p, num_complex::Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn ndb_f_vanishes_at_zero_momentum_and_scales_quadratically() {
        let d = nested_double_bubble::<f64>(1.0);
        let integ = ParametricIntegrand::new(&d).unwrap();
        let alpha = [0.4, 0.6, 0.8, 1.0, 1.2];
        let mk = |s: f64| {
            let mut p = ExternalMomenta::zero::<f64>(&d);
            p.set(&lid("x1"), [s, 0.0, 0.0, 0.0]);
            p.set(&lid("x2"), [s, 0.0, 0.0, 0.0]);
            p.vertex_inflows(&d)
        };
        let f0 = integ.eval_f(&alpha, &mk(0.0));
        let f1 = integ.eval_f(&alpha, &mk(1.0));
        let f2 = integ.eval_f(&alpha, &mk(2.0));
        assert!(f0.abs() < 1e-14);
        assert!((f2 - 4.0 * f1).abs() < 1e-12 * f2.abs());
    }
}
