use super::select::within_simplex;
use super::{PlanContext, PlanError, Variant};
use crate::linalg;
use crate::polytope::{clip_to_simplex, GeometryError, max_shrink_then_min_shift, AffineTracingMap, Polytope, Simplex};

/// The successor's state-aspiration after `a` was taken with aspiration
/// `ea` and `s2` was reached.
pub fn propagate_to_state(
    ctx: &PlanContext<'_>,
    s: usize,
    a: usize,
    ea: &Polytope,
    s2: usize,
) -> Result<Polytope, PlanError> {
    let d = ctx.dim();
    if ctx.env.is_terminal(s2) {
        return Ok(Polytope::point(vec![0.0; d]));
    }
    let qr = ctx.frame.qr(ctx.env, s, a);
    let target = ctx.frame.vr_vertices(s2);
    let rho = AffineTracingMap::new(&qr, &target);
    let vr = Simplex::new(target.clone())?;
    let e = ea.centroid();
    let out = match ctx.config.variant {
        Variant::Shrink => {
            let image = rho.apply(&e)?;
            if ea.is_point() {
                Polytope::point(image)
            } else {
                let shape = ea.vpolytope().map_points(|p| linalg::sub(p, &e));
                let (r, _) = max_shrink_then_min_shift(&shape, &image, &vec![0.0; d], &vr, 1.0)?;
                ea.homothety(&e, r, &image)
            }
        }
        Variant::Clip => {
            let image = rho.apply(&e)?;
            let shifted = ea.translate(&linalg::sub(&image, &e));
            if ea.is_point() {
                shifted
            } else {
                match clip_to_simplex(&shifted, &vr) {
                    Err(GeometryError::EmptyIntersection) => Polytope::point(image),
                    other => other?,
                }
            }
        }
        Variant::TraceInterval => {
            let images = ea.vertices().iter().map(|v| rho.apply(v)).collect::<Result<Vec<_>, _>>()?;
            Polytope::from_vertices(images)?
        }
    };
    if ctx.config.check_invariants && !within_simplex(&vr, &out) {
        return Err(PlanError::Invariant {
            state: ctx.env.state_name(s2).into_owned(),
            what: "state-aspiration leaves its reference simplex".into(),
        });
    }
    Ok(out)
}
