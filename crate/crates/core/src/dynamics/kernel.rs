//! Shared machinery for the boundary integrals: source tables on spline
//! pieces, per-target adaptive integration, and local series windows.
//!
//! Every integral is over the source point `s` of a spline representation.
//! Panels are aligned with spline pieces, so the integrand is analytic on
//! each panel. The seven Kronrod samples of every piece are computed once and
//! shared by all targets; only refinement evaluates the spline again.

use rayon::prelude::*;

use crate::error::QuadratureError;
use crate::evolve::spline::{Cubic, PeriodicSpline};
use crate::quadrature::lobatto::{self, Outcome, Panel};
use crate::quadrature::{QuadratureSpec, Series};

/// Data of a source point. `hs`, `hc` are `sin`/`cos` of half the angle
/// variable (`s` for graphs, `z₁(s)` for contours).
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Point {
    pub s: f64,
    pub hs: f64,
    pub hc: f64,
    pub v: [f64; 2],
    pub dv: [f64; 2],
    pub ddv: [f64; 2],
    /// exponentials of the heights, so kernels need no transcendental calls:
    /// `e^{v₀}` for graphs, `(e^{v₁/2}, e^{-v₁/2})` for contours
    pub ex: [f64; 2],
}

/// How the angle variable is formed from the abscissa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Angle {
    /// `θ = s` (graphs on the circle)
    Abscissa,
    /// `θ = s + v₀(s)` (contours, `v₀ = z₁ - α`)
    Shifted,
    /// no angle (real line)
    None,
}

pub(crate) struct Sources {
    splines: Vec<PeriodicSpline>,
    /// splines through the nodal slopes, one order more accurate off the
    /// nodes than the derivative of the value spline
    slopes: Vec<PeriodicSpline>,
    angle: Angle,
    table: Vec<[Point; 7]>,
}

/// Where a target sits relative to the source pieces when the integral is
/// singular at the target.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Site {
    pub piece: usize,
    pub offset: f64,
}

impl Sources {
    pub fn new(splines: Vec<PeriodicSpline>, angle: Angle) -> Self {
        assert!(!splines.is_empty() && splines.len() <= 2);
        let slopes = splines
            .iter()
            .map(|s| PeriodicSpline::new(s.nodes().to_vec(), s.node_derivatives(), s.period()).expect("nodes of a valid spline"))
            .collect();
        let mut me = Self { splines, slopes, angle, table: Vec::new() };
        let n = me.splines[0].len();
        me.table = (0..n)
            .map(|j| {
                let h = me.splines[0].width(j);
                let mut row = [Point::default(); 7];
                for (k, p) in row.iter_mut().enumerate() {
                    *p = me.point_in_piece(j, lobatto::node(0.0, h, k));
                }
                row
            })
            .collect();
        me
    }

    pub fn len(&self) -> usize {
        self.splines[0].len()
    }

    pub fn spline(&self, m: usize) -> &PeriodicSpline {
        &self.splines[m]
    }

    fn node(&self, j: usize) -> f64 {
        self.splines[0].nodes()[j]
    }

    fn finish(&self, mut p: Point) -> Point {
        let theta = match self.angle {
            Angle::Abscissa => {
                p.ex[0] = p.v[0].exp();
                p.s
            }
            Angle::Shifted => {
                let e = (0.5 * p.v[1]).exp();
                p.ex = [e, 1.0 / e];
                p.s + p.v[0]
            }
            Angle::None => return p,
        };
        let (hs, hc) = (0.5 * theta).sin_cos();
        p.hs = hs;
        p.hc = hc;
        p
    }

    pub fn point_in_piece(&self, j: usize, t: f64) -> Point {
        let mut p = Point { s: self.node(j) + t, ..Default::default() };
        for (m, (spl, slope)) in self.splines.iter().zip(&self.slopes).enumerate() {
            let d = slope.piece(j);
            p.v[m] = spl.piece(j).eval(t);
            p.dv[m] = d.eval(t);
            p.ddv[m] = d.deriv(t);
        }
        self.finish(p)
    }

    /// Source data at an arbitrary (unwrapped) abscissa.
    pub fn at(&self, s: f64) -> Point {
        let (j, t) = self.splines[0].locate(s);
        let mut p = self.point_in_piece(j, t);
        p.s = s;
        self.finish(p)
    }

    /// Target data at an arbitrary abscissa together with its site.
    pub fn target(&self, alpha: f64) -> (Point, Site) {
        let (mut j, mut t) = self.splines[0].locate(alpha);
        // snap to a node when within roundoff of one
        let h = self.splines[0].width(j);
        if t <= 1e-12 * h {
            t = 0.0;
        } else if h - t <= 1e-12 * h {
            j = (j + 1) % self.len();
            t = 0.0;
        }
        let mut p = self.point_in_piece(j, t);
        p.s = alpha;
        (self.finish(p), Site { piece: j, offset: t })
    }

    pub fn node_target(&self, i: usize) -> (Point, Site) {
        (self.table[i][0], Site { piece: i, offset: 0.0 })
    }
}

/// Local model of one component about a target: the value piece and the
/// piece of the slope spline.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Local {
    pub value: Cubic,
    pub slope: Cubic,
}

/// An integrand `K(target, source)` with an optional local model for the
/// window around `s = target`.
pub(crate) trait Kernel<const M: usize>: Sync {
    fn eval(&self, t: &Point, s: &Point) -> [f64; M];

    /// Integral over `τ ∈ [lo, hi]` (source at `target + τ`) of the series
    /// expansion built from the local models, and an estimate of its error.
    fn window(&self, _t: &Point, _local: &[Local], _lo: f64, _hi: f64, _order: usize) -> ([f64; M], f64) {
        unreachable!("kernel has no singular window")
    }
}

/// Integrate the kernel for one target over the whole source curve.
///
/// With `site = Some(..)` the integrand is singular (0/0) at the target and
/// a local window on each side is replaced by a series model. `periodic`
/// controls whether the piece to the left of node 0 exists.
pub(crate) fn integrate_target<const M: usize, K: Kernel<M>>(
    kernel: &K,
    src: &Sources,
    target: &Point,
    site: Option<Site>,
    periodic: bool,
    spec: &QuadratureSpec,
) -> Result<Outcome<M>, QuadratureError> {
    let n = src.len();
    let eval = |s: f64| kernel.eval(target, &src.at(s));
    let mut panels: Vec<Panel<M>> = Vec::with_capacity(n + 2);
    let mut offset = [0.0; M];
    let mut window_err = 0.0;

    let (skip_a, skip_b) = match site {
        None => (usize::MAX, usize::MAX),
        Some(site) => {
            let j = site.piece;
            let h = src.spline(0).width(j);
            let (left, right, len_l, len_r, skip_l) = if site.offset == 0.0 {
                let left_ok = periodic || j > 0;
                let jm = (j + n - 1) % n;
                let left: Vec<Local> = (0..src.splines.len())
                    .map(|m| Local { value: src.splines[m].left_piece_about(j), slope: src.slopes[m].left_piece_about(j) })
                    .collect();
                let right: Vec<Local> =
                    (0..src.splines.len()).map(|m| Local { value: *src.splines[m].piece(j), slope: *src.slopes[m].piece(j) }).collect();
                let len_l = if left_ok { src.spline(0).width(jm) } else { 0.0 };
                (left, right, len_l, h, if left_ok { jm } else { usize::MAX })
            } else {
                let c: Vec<Local> = (0..src.splines.len())
                    .map(|m| Local { value: src.splines[m].piece(j).shifted(site.offset), slope: src.slopes[m].piece(j).shifted(site.offset) })
                    .collect();
                (c.clone(), c, site.offset, h - site.offset, usize::MAX)
            };
            let order = spec.taylor_order;
            let a = target.s;
            if len_r > 0.0 {
                let w = spec.local_window.min(0.25 * len_r);
                let (v, e) = kernel.window(target, &right, 0.0, w, order);
                add(&mut offset, &v);
                window_err += e;
                panels.push(Panel::sample(&eval, a + w, a + len_r));
            }
            if len_l > 0.0 {
                let w = spec.local_window.min(0.25 * len_l);
                let (v, e) = kernel.window(target, &left, -w, 0.0, order);
                add(&mut offset, &v);
                window_err += e;
                panels.push(Panel::sample(&eval, a - len_l, a - w));
            }
            (j, skip_l)
        }
    };

    for (k, row) in src.table.iter().enumerate() {
        if k == skip_a || k == skip_b {
            continue;
        }
        let mut f = [[0.0; M]; 7];
        for (dst, p) in f.iter_mut().zip(row) {
            *dst = kernel.eval(target, p);
        }
        let b = row[0].s + src.spline(0).width(k);
        panels.push(Panel { a: row[0].s, b, f });
    }

    let out = lobatto::refine(&eval, panels, offset, spec.tolerance())?;
    let mut value = out.value;
    add(&mut value, &offset);
    Ok(Outcome { value, error: out.error + window_err, panels: out.panels })
}

fn add<const M: usize>(acc: &mut [f64; M], v: &[f64; M]) {
    for m in 0..M {
        acc[m] += v[m];
    }
}

/// Integrate for every node of the source curve (self-interaction).
pub(crate) fn integrate_nodes<const M: usize, K: Kernel<M>>(
    kernel: &K,
    src: &Sources,
    periodic: bool,
    spec: &QuadratureSpec,
) -> Result<Vec<[f64; M]>, QuadratureError> {
    (0..src.len())
        .into_par_iter()
        .map(|i| {
            let (t, site) = src.node_target(i);
            integrate_target(kernel, src, &t, Some(site), periodic, spec).map(|o| o.value)
        })
        .collect()
}

/// Integrate for externally supplied targets with no singular point.
pub(crate) fn integrate_regular<const M: usize, K: Kernel<M>>(
    kernel: &K,
    src: &Sources,
    targets: &[Point],
    spec: &QuadratureSpec,
) -> Result<Vec<[f64; M]>, QuadratureError> {
    targets
        .par_iter()
        .map(|t| integrate_target(kernel, src, t, None, true, spec).map(|o| o.value))
        .collect()
}

/// Integrate the series `num / den` (both vanishing to order `shift` at the
/// origin) over `[lo, hi]`; returns the value and the size of the last
/// retained term as an error estimate.
pub(crate) fn series_quotient_integral(num: &Series, den: &Series, shift: usize, lo: f64, hi: f64) -> (f64, f64) {
    let q = num.shift_down(shift).div(&den.shift_down(shift)).expect("nondegenerate local denominator");
    let value = q.integrate(lo, hi);
    let k = q.order();
    let last = q.coeffs()[k];
    let p = (k + 1) as i32;
    let err = (last * (hi.powi(p) - lo.powi(p)) / (k + 1) as f64).abs();
    (value, err)
}

/// `v(0) - v(τ)` as a series (vanishes at the origin).
pub(crate) fn value_drop(l: &Local, order: usize) -> Series {
    let c = &l.value;
    Series::polynomial(&[0.0, -c.c1, -c.c2, -c.c3], order)
}

/// `v'(0) - v'(τ)` as a series, from the slope spline.
pub(crate) fn slope_drop(l: &Local, order: usize) -> Series {
    let c = &l.slope;
    Series::polynomial(&[0.0, -c.c1, -c.c2, -c.c3], order)
}

/// `v''(0) - v''(τ)` as a series, from the slope spline.
pub(crate) fn curv_drop(l: &Local, order: usize) -> Series {
    let c = &l.slope;
    Series::polynomial(&[0.0, -2.0 * c.c2, -3.0 * c.c3], order)
}
