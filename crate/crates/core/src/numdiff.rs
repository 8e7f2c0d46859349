//! Fourth-order central difference stencils on a two-variable function.

/// Value and derivatives up to second order of `f` at `(x0, y0)`:
/// `[f, f_x, f_y, f_xx, f_xy, f_yy]`.
pub(crate) fn jet2<F>(mut f: F, x0: f64, y0: f64, hx: f64, hy: f64) -> [f64; 6]
where
    F: FnMut(f64, f64) -> f64,
{
    let mut v = |i: f64, j: f64| f(x0 + i * hx, y0 + j * hy);
    let c = v(0.0, 0.0);
    let (xp1, xm1, xp2, xm2) = (v(1.0, 0.0), v(-1.0, 0.0), v(2.0, 0.0), v(-2.0, 0.0));
    let (yp1, ym1, yp2, ym2) = (v(0.0, 1.0), v(0.0, -1.0), v(0.0, 2.0), v(0.0, -2.0));
    let fx = (-xp2 + 8.0 * xp1 - 8.0 * xm1 + xm2) / (12.0 * hx);
    let fy = (-yp2 + 8.0 * yp1 - 8.0 * ym1 + ym2) / (12.0 * hy);
    let fxx = (-xp2 + 16.0 * xp1 - 30.0 * c + 16.0 * xm1 - xm2) / (12.0 * hx * hx);
    let fyy = (-yp2 + 16.0 * yp1 - 30.0 * c + 16.0 * ym1 - ym2) / (12.0 * hy * hy);
    // fourth-order mixed stencil: Richardson combination of steps h and 2h
    let mut mixed = |s: f64| (v(s, s) - v(s, -s) - v(-s, s) + v(-s, -s)) / (4.0 * s * s * hx * hy);
    let m1 = mixed(1.0);
    let m2 = mixed(2.0);
    let fxy = (4.0 * m1 - m2) / 3.0;
    [c, fx, fy, fxx, fxy, fyy]
}
