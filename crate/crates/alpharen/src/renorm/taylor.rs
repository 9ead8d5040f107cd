//! Taylor data in the external momenta by central finite differences with
//! Richardson refinement.

use crate::error::{Error, Result};
use crate::float::{r, Real, C};
use crate::graph::{Direction, FeynmanDiagram, LineId};
use crate::parametric::basis::ExternalMomenta;
use num_complex::Complex;

/// Offsets (in units of the base step) a stencil needs for the given
/// maximal degree; zero is handled separately.
pub fn stencil_offsets(degree: usize) -> Vec<f64> {
    let mut ts = vec![1.0, -1.0, 0.5, -0.5];
    if degree >= 3 {
        ts.push(2.0);
        ts.push(-2.0);
    }
    ts
}

/// One directional Taylor coefficient set from sampled values.
/// `at(t)` must return the sample at parameter `t * h`; available `t` are
/// `0` and the entries of [`stencil_offsets`].
pub fn coefficients_from_samples<R: Real, F>(
    at: &F,
    h: R,
    degree: usize,
) -> (Vec<C<R>>, Vec<R>)
where
    F: Fn(f64) -> C<R>,
{
    let f0 = at(0.0);
    let fp = at(1.0);
    let fm = at(-1.0);
    let fph = at(0.5);
    let fmh = at(-0.5);
    let two = r::<R>(2.0);
    let two_c: C<R> = Complex::new(two, R::zero());
    let h2 = h * h;

    let mut coeffs = vec![Complex::new(R::zero(), R::zero()); degree + 1];
    let mut errs = vec![R::zero(); degree + 1];
    coeffs[0] = f0;

    let rich = |d_h: C<R>, d_h2: C<R>| -> (C<R>, R) {
        let third = Complex::new(r::<R>(1.0 / 3.0), R::zero());
        let four = Complex::new(r::<R>(4.0), R::zero());
        let e = (four * d_h2 - d_h) * third;
        (e, (e - d_h2).norm())
    };

    if degree >= 1 {
        let d1 = (fp - fm) / Complex::new(two * h, R::zero());
        let d1h = (fph - fmh) / Complex::new(h, R::zero());
        let (v, e) = rich(d1, d1h);
        coeffs[1] = v;
        errs[1] = e;
    }
    if degree >= 2 {
        let d2 = (fp - f0 * two_c + fm) / Complex::new(h2, R::zero());
        let d2h = (fph - f0 * two_c + fmh) / Complex::new(h2 / r::<R>(4.0), R::zero());
        let (v, e) = rich(d2, d2h);
        coeffs[2] = v / Complex::new(r::<R>(2.0), R::zero());
        errs[2] = e / r::<R>(2.0);
    }
    if degree >= 3 {
        let fpp = at(2.0);
        let fmm = at(-2.0);
        let d3 = (fpp - fp * two_c + fm * two_c - fmm)
            / Complex::new(two * h * h2, R::zero());
        let d3h = (fp - fph * two_c + fmh * two_c - fm)
            / Complex::new(two * (h / two) * (h2 / r::<R>(4.0)), R::zero());
        let (v, e) = rich(d3, d3h);
        coeffs[3] = v / Complex::new(r::<R>(6.0), R::zero());
        errs[3] = e / r::<R>(6.0);
        if degree >= 4 {
            let six = Complex::new(r::<R>(6.0), R::zero());
            let four_c = Complex::new(r::<R>(4.0), R::zero());
            let d4 = (fpp - fp * four_c + f0 * six - fm * four_c + fmm)
                / Complex::new(h2 * h2, R::zero());
            let d4h = (fp - fph * four_c + f0 * six - fmh * four_c + fm)
                / Complex::new(h2 * h2 / r::<R>(16.0), R::zero());
            let (v, e) = rich(d4, d4h);
            coeffs[4] = v / Complex::new(r::<R>(24.0), R::zero());
            errs[4] = e / r::<R>(24.0);
        }
    }
    if degree >= 5 {
        // not needed by the subtraction machinery
        for k in 5..=degree {
            errs[k] = R::infinity();
        }
    }
    (coeffs, errs)
}

/// Taylor coefficients through `degree` of a black-box amplitude along a set
/// of conserving momentum directions, with per-coefficient error estimates.
pub fn taylor_project<R: Real, F>(
    eval: &mut F,
    degree: usize,
    directions: &[ExternalMomenta<R>],
    h: R,
) -> Result<Vec<(Vec<C<R>>, Vec<R>)>>
where
    F: FnMut(&ExternalMomenta<R>) -> Result<C<R>>,
{
    let mut out = Vec::with_capacity(directions.len());
    for u in directions.iter() {
        let mut cache: Vec<(f64, C<R>)> = Vec::new();
        let mut ts = vec![0.0];
        ts.extend(stencil_offsets(degree));
        for t in ts.iter() {
            let p = u.scaled(h * r::<R>(*t));
            cache.push((*t, eval(&p)?));
        }
        let lookup = |t: f64| -> C<R> {
            cache
                .iter()
                .find(|(tt, _)| (*tt - t).abs() < 1e-12)
                .map(|(_, v)| *v)
                .expect("stencil sample present")
        };
        let (coeffs, errs) = coefficients_from_samples(&lookup, h, degree);
        for (k, e) in errs.iter().enumerate() {
            let scale = coeffs[k].norm().max(coeffs[0].norm()).max(R::min_positive_value());
            if *e > scale * r(0.2) && *e > r(1e-6) {
                return Err(Error::StencilNonConverging(format!(
                    "degree {k}: error estimate {:e} vs scale {:e}",
                    e.to_f64().unwrap_or(f64::NAN),
                    scale.to_f64().unwrap_or(f64::NAN)
                )));
            }
        }
        out.push((coeffs, errs));
    }
    Ok(out)
}

/// A conserving unit assignment: the given externals carry the listed
/// vectors and the lexicographically last external balances the total.
pub fn conserving_assignment<R: Real>(
    d: &FeynmanDiagram<R>,
    parts: &[(LineId, [R; 4])],
) -> Result<ExternalMomenta<R>> {
    let exts = d.graph.external_lines();
    let Some((last_id, _, last_dir)) = exts.last().cloned() else {
        return Err(Error::ParamConstraint("diagram has no external lines".into()));
    };
    let mut p = ExternalMomenta::zero::<R>(d);
    for (id, v) in parts.iter() {
        if *id == last_id {
            return Err(Error::ParamConstraint(
                "the last external line is reserved for balancing".into(),
            ));
        }
        p.set(id, *v);
    }
    let mut total = [R::zero(); 4];
    for (id, _, dir) in exts.iter() {
        if *id == last_id {
            continue;
        }
        let s = match dir {
            Direction::In => R::one(),
            Direction::Out => -R::one(),
        };
        let v = p.get(id);
        for k in 0..4 {
            total[k] += s * v[k];
        }
    }
    let s_last = match last_dir {
        Direction::In => -R::one(),
        Direction::Out => R::one(),
    };
    p.set(
        &last_id,
        [
            s_last * total[0],
            s_last * total[1],
            s_last * total[2],
            s_last * total[3],
        ],
    );
    p.check_conservation(d, r(1e-9))?;
    Ok(p)
}

/// The default direction set: one axis per independent external line plus
/// the pairwise sums.
pub fn default_directions<R: Real>(d: &FeynmanDiagram<R>) -> Result<Vec<ExternalMomenta<R>>> {
    let exts = d.graph.external_lines();
    if exts.len() < 2 {
        return Ok(Vec::new());
    }
    let independent: Vec<LineId> = exts[..exts.len() - 1]
        .iter()
        .map(|(id, _, _)| id.clone())
        .collect();
    let unit = [R::one(), R::zero(), R::zero(), R::zero()];
    let mut dirs = Vec::new();
    for e in independent.iter() {
        dirs.push(conserving_assignment(d, &[(e.clone(), unit)])?);
    }
    for i in 0..independent.len() {
        for j in (i + 1)..independent.len() {
            dirs.push(conserving_assignment(
                d,
                &[(independent[i].clone(), unit), (independent[j].clone(), unit)],
            )?);
        }
    }
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{banana, lid};
    use num_complex::Complex64;

    #[test]
    fn gaussian_profile_derivatives() {
        // f(p) = exp(-c t^2) along a ray: taylor c0=1, c2=-c, c4=c^2/2
        let c = 0.8;
        let at = |t: f64| {
            let x = t * 0.4;
            Complex64::new((-c * x * x).exp(), 0.0)
        };
        let (coeffs, errs) = coefficients_from_samples(&at, 0.4f64, 4);
        assert!((coeffs[0].re - 1.0).abs() < 1e-14);
        assert!(coeffs[1].norm() < 1e-10);
        assert!(
            (coeffs[2].re + c).abs() < 1e-8,
            "c2 = {} want {}",
            coeffs[2].re,
            -c
        );
        assert!(coeffs[3].norm() < 1e-8);
        assert!((coeffs[4].re - c * c / 2.0).abs() < 1e-5);
        assert!(errs[2] < 1e-6);
    }

    #[test]
    fn degree_zero_is_value_at_origin() {
        let at = |t: f64| Complex64::new(3.0 + t, 0.0);
        let (coeffs, _) = coefficients_from_samples(&at, 0.3f64, 0);
        assert_eq!(coeffs[0], Complex64::new(3.0, 0.0));
    }

    #[test]
    fn even_function_has_tiny_odd_coefficients() {
        let at = |t: f64| Complex64::new((t * t).cos(), 0.1 * (t * t));
        let (coeffs, _) = coefficients_from_samples(&at, 0.5f64, 4);
        assert!(coeffs[1].norm() < 1e-10);
        assert!(coeffs[3].norm() < 1e-8);
    }

    #[test]
    fn taylor_project_on_closed_form() {
        let d = banana::<f64>(3, 1.0);
        let dirs = default_directions(&d).unwrap();
        assert_eq!(dirs.len(), 1);
        // amplitude stand-in: exp(-0.3 |p_x1|^2)
        let mut eval = |p: &ExternalMomenta<f64>| -> crate::error::Result<Complex64> {
            let v = p.get(&lid("x1"));
            let sq: f64 = v.iter().map(|x| x * x).sum();
            Ok(Complex64::new((-0.3 * sq).exp(), 0.0))
        };
        let data = taylor_project(&mut eval, 2, &dirs, 0.4).unwrap();
        let (coeffs, _) = &data[0];
        assert!((coeffs[0].re - 1.0).abs() < 1e-12);
        assert!((coeffs[2].re + 0.3).abs() < 1e-8);
    }

    #[test]
    fn conserving_assignment_balances() {
        let d = banana::<f64>(3, 1.0);
        let p = conserving_assignment(&d, &[(lid("x1"), [2.0, 1.0, 0.0, 0.0])]).unwrap();
        // x2 is outgoing, so it must carry the same vector
        assert_eq!(p.get(&lid("x2")), [2.0, 1.0, 0.0, 0.0]);
    }
}
