//! Deformed integration paths in the upper half plane and their quadrature.
//!
//! A contour is two rays leaving the vertex `i·h`: the left one at angle
//! `π − θ`, traversed inwards, and the right one at angle `θ`, traversed
//! outwards. Nodes are Gauss–Legendre points on panels graded geometrically
//! towards the vertex, with wide panels split so the phase of the integrand
//! changes by a bounded amount across each.

use alloc::vec::Vec;

use crate::math::{self, c, C64, PI};
use crate::params::ProblemParams;
use crate::quad;
use crate::spectral::{omega, RootReport};
use crate::{Error, Result};

/// Quadrature node paired with its weight.
type Weighted = (C64, C64);

/// `ln(10¹⁶)`: decay required at the truncation point.
pub const DECAY_EXPONENT: f64 = 36.841_361_487_904_734;

/// Tunable numerical settings shared by all integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyProfile {
    pub ray_angle: f64,
    pub panels: usize,
    pub order: usize,
    pub grading: f64,
    pub rel_quad_tol: f64,
    pub s_cap: f64,
    /// Base pole clearance; scaled by `1/max(L, 1)`.
    pub clearance: f64,
    /// Base vertex height; scaled by `1/max(L, 1)`.
    pub offset: f64,
    pub max_refinements: usize,
    /// Largest phase change of the integrand across one panel, radians.
    pub max_panel_phase: f64,
    /// `−ln` of the relative size of the neglected integrand at the
    /// truncation point.
    pub decay_exponent: f64,
}

impl AccuracyProfile {
    pub const fn standard() -> Self {
        AccuracyProfile {
            ray_angle: PI / 8.0,
            panels: 24,
            order: 16,
            grading: 1.3,
            rel_quad_tol: 1e-10,
            s_cap: 200.0,
            clearance: 0.25,
            offset: 0.5,
            max_refinements: 3,
            max_panel_phase: 3.0,
            decay_exponent: DECAY_EXPONENT,
        }
    }

    pub const fn fast() -> Self {
        AccuracyProfile { panels: 16, order: 12, rel_quad_tol: 1e-8, max_refinements: 2, ..Self::standard() }
    }

    /// Tighter settings for table reproduction.
    pub const fn paper() -> Self {
        AccuracyProfile { panels: 32, order: 20, rel_quad_tol: 1e-12, max_refinements: 4, max_panel_phase: 2.0, ..Self::standard() }
    }

    /// Settings for double-double evaluation: truncation at `10⁻³²` and a
    /// quadrature tolerance near that precision.
    pub const fn extended() -> Self {
        AccuracyProfile {
            panels: 32,
            order: 24,
            rel_quad_tol: 1e-27,
            s_cap: 400.0,
            max_refinements: 4,
            max_panel_phase: 2.0,
            decay_exponent: 2.0 * DECAY_EXPONENT,
            ..Self::standard()
        }
    }

    pub fn by_name(name: &str) -> Option<Self> {
        match name {
            "fast" => Some(Self::fast()),
            "default" => Some(Self::standard()),
            "paper" => Some(Self::paper()),
            _ => None,
        }
    }
}

impl Default for AccuracyProfile {
    fn default() -> Self {
        Self::standard()
    }
}

/// Admissible two-ray contour with cached quadrature rules.
#[derive(Debug, Clone)]
pub struct Contour {
    pub offset_h: f64,
    pub ray_angle: f64,
    pub truncation_s: f64,
    /// `(λ, weight·dλ)` pairs of the base rule.
    pub nodes: Vec<(C64, C64)>,
    refined: Vec<(C64, C64)>,
    /// Vertical tails from the ray ends; empty unless requested.
    pub tail_nodes: Vec<(C64, C64)>,
    tail_refined: Vec<(C64, C64)>,
    profile: AccuracyProfile,
    max_width: f64,
}

/// Which portion of the path a node belongs to.
///
/// On [`Part::Tail`] only integrand terms without an `e^{−ωt}` factor may be
/// evaluated: the tails leave the sector where that factor decays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    Ray,
    Tail,
}

impl Contour {
    /// Contour with explicit geometry. `phase_rate` bounds the integrand's
    /// phase derivative along the rays and sets the widest panel.
    pub fn new(offset_h: f64, ray_angle: f64, truncation_s: f64, phase_rate: f64, profile: AccuracyProfile) -> Result<Self> {
        if !(offset_h > 0.0) || !(ray_angle > 0.0 && ray_angle < PI / 4.0) || !(truncation_s > 0.0) {
            return Err(Error::InvalidParams("contour needs h > 0, 0 < angle < π/4 and S > 0".into()));
        }
        let max_width = profile.max_panel_phase / phase_rate.max(1e-12);
        let mut ct = Contour {
            offset_h,
            ray_angle,
            truncation_s,
            nodes: Vec::new(),
            refined: Vec::new(),
            tail_nodes: Vec::new(),
            tail_refined: Vec::new(),
            profile,
            max_width,
        };
        ct.nodes = ct.rule(0);
        ct.refined = ct.rule(1);
        Ok(ct)
    }

    /// Adds vertical tails `λ_end + is`, `s ≥ 0`, at both ray ends. Terms
    /// that decay only algebraically along the rays are integrated to
    /// infinity along them.
    pub fn with_tails(mut self) -> Self {
        self.tail_nodes = self.tail_rule(0);
        self.tail_refined = self.tail_rule(1);
        self
    }

    pub fn has_tails(&self) -> bool {
        !self.tail_nodes.is_empty()
    }

    /// Tail edges at refinement `level`: `d(g^k − 1)` with
    /// `g = 2^{1/2^level}`, out to `e^{decay/2}·max(1, |λ_end|)`, enough for
    /// integrands decaying like `s⁻³`.
    pub fn tail_edges(&self, level: usize) -> Vec<f64> {
        let end = self.point(self.truncation_s, true).norm();
        let d = 0.25 * end.clamp(1e-3, 1.0);
        let s_max = math::exp(0.5 * self.profile.decay_exponent) * end.max(1.0);
        let g = math::exp(math::ln(2.0) / (1usize << level) as f64);
        let mut edges = alloc::vec![0.0];
        let mut gk = g;
        while *edges.last().unwrap() < s_max {
            edges.push(d * (gk - 1.0));
            gk *= g;
        }
        edges
    }

    /// Tail rule at refinement `level` on [`Self::tail_edges`].
    pub fn tail_rule(&self, level: usize) -> Vec<(C64, C64)> {
        let right_end = self.point(self.truncation_s, true);
        let left_end = self.point(self.truncation_s, false);
        let (gx, gw) = quad::gauss_legendre(self.profile.order);
        let mut radial = Vec::new();
        for pair in self.tail_edges(level).windows(2) {
            let (mid, half) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
            for (xi, wi) in gx.iter().zip(&gw) {
                radial.push((mid + half * xi, half * wi));
            }
        }
        let up = C64::new(0.0, 1.0);
        let mut out = Vec::with_capacity(2 * radial.len());
        // Left tail runs downwards into the left ray, right tail upwards.
        for &(r, w) in radial.iter().rev() {
            out.push((left_end + up * r, -up * w));
        }
        for &(r, w) in &radial {
            out.push((right_end + up * r, up * w));
        }
        out
    }

    pub fn profile(&self) -> &AccuracyProfile {
        &self.profile
    }

    pub fn vertex(&self) -> C64 {
        c(0.0, self.offset_h)
    }

    /// Point at arclength `r` on the right (`right = true`) or left ray.
    pub fn point(&self, r: f64, right: bool) -> C64 {
        let a = if right { self.ray_angle } else { PI - self.ray_angle };
        self.vertex() + C64::from_polar(r, a)
    }

    /// Radial panel edges on `[0, S]` at refinement `level`; each level
    /// doubles the geometric panels (ratio square-rooted) and halves the
    /// widest panel.
    pub fn ray_edges(&self, level: usize) -> Vec<f64> {
        let p = &self.profile;
        let factor = 1usize << level;
        let panels = p.panels * factor;
        let g = math::exp(math::ln(p.grading) / factor as f64);
        let s = self.truncation_s;
        let denom = math::exp(panels as f64 * math::ln(g)) - 1.0;
        let max_w = self.max_width / factor as f64;
        let mut geometric = Vec::with_capacity(panels + 1);
        let mut gk = 1.0;
        for k in 0..=panels {
            geometric.push(if k == panels { s } else { s * (gk - 1.0) / denom });
            gk *= g;
        }
        let mut edges = alloc::vec![0.0];
        for pair in geometric.windows(2) {
            let (lo, hi) = (pair[0], pair[1]);
            let pieces = math::ceil((hi - lo) / max_w).max(1.0) as usize;
            for j in 1..=pieces {
                edges.push(if j == pieces { hi } else { lo + (hi - lo) * j as f64 / pieces as f64 });
            }
        }
        edges
    }

    /// Quadrature rule at refinement `level` on the panels of
    /// [`Self::ray_edges`].
    pub fn rule(&self, level: usize) -> Vec<(C64, C64)> {
        let (gx, gw) = quad::gauss_legendre(self.profile.order);
        let mut radial: Vec<(f64, f64)> = Vec::new();
        for pair in self.ray_edges(level).windows(2) {
            let (mid, half) = (0.5 * (pair[0] + pair[1]), 0.5 * (pair[1] - pair[0]));
            for (xi, wi) in gx.iter().zip(&gw) {
                radial.push((mid + half * xi, half * wi));
            }
        }
        let dir_r = C64::from_polar(1.0, self.ray_angle);
        let dir_l = C64::from_polar(1.0, PI - self.ray_angle);
        let mut out = Vec::with_capacity(2 * radial.len());
        // Left ray runs from infinity to the vertex: dλ = −e^{i(π−θ)} dr.
        for &(r, w) in radial.iter().rev() {
            out.push((self.vertex() + dir_l * r, -dir_l * w));
        }
        for &(r, w) in &radial {
            out.push((self.vertex() + dir_r * r, dir_r * w));
        }
        out
    }

    /// Distance from `p` to the truncated path.
    pub fn distance_to(&self, p: C64) -> f64 {
        let v = self.vertex();
        let mut best = f64::INFINITY;
        for right in [true, false] {
            let a = if right { self.ray_angle } else { PI - self.ray_angle };
            let d = C64::from_polar(1.0, a);
            let rel = p - v;
            let along = (rel.re * d.re + rel.im * d.im).clamp(0.0, self.truncation_s);
            best = best.min((rel - d * along).norm());
        }
        best
    }

    /// True when every node lies strictly in the upper half plane.
    pub fn in_upper_half_plane(&self) -> bool {
        self.nodes.iter().all(|n| n.0.im > 0.0)
    }
}

/// Arclength beyond which `|e^{−ω(λ)t}| < 10⁻¹⁶` along a ray at `angle`
/// from the vertex `i·h`.
pub fn truncation_length(d0: f64, k0: f64, h: f64, angle: f64, t: f64) -> f64 {
    truncation_for_decay(d0, k0, h, angle, t, DECAY_EXPONENT)
}

/// Arclength beyond which `|e^{−ω(λ)t}| < e^{−decay}`.
pub fn truncation_for_decay(d0: f64, k0: f64, h: f64, angle: f64, t: f64, decay: f64) -> f64 {
    // Re ω(ih + r e^{iθ}) = D₀ cos2θ r² − (2D₀h + K₀) sinθ r − (D₀h² + K₀h)
    let a = d0 * math::cos(2.0 * angle);
    let b = (2.0 * d0 * h + k0) * math::sin(angle);
    let c0 = d0 * h * h + k0 * h + decay / t;
    (b + math::sqrt(b * b + 4.0 * a * c0)) / (2.0 * a)
}

/// Vertex height: `h₀/max(L,1)` lowered so `|e^{−ω(ih)t_max}| ≤ e²`, then
/// raised above every upper-half-plane root with room to spare.
pub fn offset_height(params: &ProblemParams, roots: &RootReport, t_max: f64, profile: &AccuracyProfile) -> f64 {
    let scale = params.length.max(1.0);
    let base = profile.offset / scale;
    let clearance = profile.clearance / scale;
    let (d0, k0) = (params.d0, params.k0);
    let growth = if t_max > 0.0 {
        // D₀h² + K₀h = 2/t_max
        let q = 2.0 / t_max;
        (-k0 + math::sqrt(k0 * k0 + 4.0 * d0 * q)) / (2.0 * d0)
    } else {
        f64::INFINITY
    };
    let mut h = base.min(growth);
    if let Some(top) = roots.max_upper_imag {
        h = h.max(1.5 * top).max(top + 2.0 * clearance);
    }
    h
}

/// Builds the contour for times in `[t_min, t_max]`.
pub fn make_contour_window(
    params: &ProblemParams,
    roots: &RootReport,
    t_min: f64,
    t_max: f64,
    profile: &AccuracyProfile,
) -> Result<Contour> {
    build(params, roots, t_min, t_max, 0.0, profile)
}

/// Like [`make_contour_window`], with vertical tails and rays at least
/// `min_s` long. `min_s` must exceed the modulus of every singularity of
/// the tail integrands so that swinging the ray ends up crosses none.
pub fn make_tailed_contour(
    params: &ProblemParams,
    roots: &RootReport,
    t_min: f64,
    t_max: f64,
    min_s: f64,
    profile: &AccuracyProfile,
) -> Result<Contour> {
    Ok(build(params, roots, t_min, t_max, min_s, profile)?.with_tails())
}

fn build(params: &ProblemParams, roots: &RootReport, t_min: f64, t_max: f64, min_s: f64, profile: &AccuracyProfile) -> Result<Contour> {
    if t_min < 0.0 || !(t_max >= t_min) {
        return Err(Error::InvalidParams("need 0 <= t_min <= t_max".into()));
    }
    if t_min == 0.0 {
        return Err(Error::ZeroTimeUnbounded);
    }
    let h = offset_height(params, roots, t_max, profile);
    let angle = profile.ray_angle;
    let mut s = truncation_for_decay(params.d0, params.k0, h, angle, t_min, profile.decay_exponent);
    if s > profile.s_cap {
        s = profile.s_cap;
        let tail = omega(c(0.0, h) + C64::from_polar(s, angle), params).re * t_min;
        if tail < -math::ln(profile.rel_quad_tol) {
            return Err(Error::NotConverged { change: math::exp(-tail), tolerance: profile.rel_quad_tol });
        }
    }
    s = s.max(min_s);
    // Phase rate of e^{iλx − ωt}-type factors along the ray at r = S.
    let rate =
        params.length + t_min * (2.0 * params.d0 * (s * math::sin(2.0 * angle) + h * math::cos(angle)) + params.k0 * math::cos(angle));
    let contour = Contour::new(h, angle, s, rate, *profile)?;
    certify_clearance(&contour, params, roots, profile)?;
    Ok(contour)
}

/// Builds the contour for a single evaluation time `t_min`.
pub fn make_contour(params: &ProblemParams, roots: &RootReport, t_min: f64, profile: &AccuracyProfile) -> Result<Contour> {
    make_contour_window(params, roots, t_min, t_min, profile)
}

/// Checks the path against the listed roots, the line `Im λ = −κ` carrying
/// the infinite root family, and the zeros of `ω`.
pub fn certify_clearance(contour: &Contour, params: &ProblemParams, roots: &RootReport, profile: &AccuracyProfile) -> Result<()> {
    let clearance = profile.clearance / params.length.max(1.0);
    let kappa = params.kappa();
    let mut hazards: Vec<C64> = roots.roots.clone();
    hazards.push(C64::new(0.0, 0.0));
    hazards.push(c(0.0, -2.0 * kappa));
    for r in hazards {
        let d = contour.distance_to(r);
        if d < clearance {
            return Err(Error::PoleOnContour { root: r, distance: d });
        }
    }
    let line = contour.offset_h + kappa;
    if line < clearance {
        return Err(Error::PoleOnContour { root: c(0.0, -kappa), distance: line });
    }
    Ok(())
}

fn sum_rule<F: Fn(C64, Part, &mut [C64])>(rules: [(&[(C64, C64)], Part); 2], m: usize, f: &F, out: &mut [C64], mag: &mut [f64]) {
    let mut buf = alloc::vec![C64::new(0.0, 0.0); m];
    out.iter_mut().for_each(|o| *o = C64::new(0.0, 0.0));
    mag.iter_mut().for_each(|v| *v = 0.0);
    for (rule, part) in rules {
        for &(z, w) in rule {
            buf.iter_mut().for_each(|b| *b = C64::new(0.0, 0.0));
            f(z, part, &mut buf);
            for (k, v) in buf.iter().enumerate() {
                let term = *v * w;
                out[k] += term;
                mag[k] += term.norm();
            }
        }
    }
}

/// Integrates `m` integrands sharing one evaluation callback, which fills a
/// slice of length `m` for each `λ` and path portion. Each result is
/// accepted once one panel doubling changes it by less than
/// `rel_quad_tol · Σ|w f|`.
pub fn integrate_parts<F: Fn(C64, Part, &mut [C64])>(contour: &Contour, m: usize, f: F) -> Result<Vec<C64>> {
    let tol = contour.profile.rel_quad_tol;
    let mut prev = alloc::vec![C64::new(0.0, 0.0); m];
    let mut mag = alloc::vec![0.0; m];
    sum_rule([(&contour.nodes, Part::Ray), (&contour.tail_nodes, Part::Tail)], m, &f, &mut prev, &mut mag);
    let mut cur = alloc::vec![C64::new(0.0, 0.0); m];
    let mut worst = 0.0;
    for level in 1..=contour.profile.max_refinements.max(1) {
        let (owned, owned_tail);
        let (rule, tail): (&[Weighted], &[Weighted]) = if level == 1 {
            (&contour.refined, &contour.tail_refined)
        } else {
            owned = contour.rule(level);
            owned_tail = if contour.has_tails() { contour.tail_rule(level) } else { Vec::new() };
            (&owned, &owned_tail)
        };
        sum_rule([(rule, Part::Ray), (tail, Part::Tail)], m, &f, &mut cur, &mut mag);
        worst = 0.0;
        let mut ok = true;
        for k in 0..m {
            let scale = mag[k].max(f64::MIN_POSITIVE);
            let change = (cur[k] - prev[k]).norm() / scale;
            if !change.is_finite() {
                return Err(Error::NotConverged { change, tolerance: tol });
            }
            worst = f64::max(worst, change);
            ok &= change <= tol;
        }
        if ok {
            return Ok(cur);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    Err(Error::NotConverged { change: worst, tolerance: tol })
}

/// [`integrate_parts`] for integrands that need no tail treatment.
pub fn integrate_many<F: Fn(C64, &mut [C64])>(contour: &Contour, m: usize, f: F) -> Result<Vec<C64>> {
    integrate_parts(contour, m, |z, part, out| {
        if part == Part::Ray {
            f(z, out)
        }
    })
}

/// `∫ f(λ) dλ` along the contour.
pub fn integrate<F: Fn(C64) -> C64>(contour: &Contour, f: F) -> Result<C64> {
    integrate_many(contour, 1, |z, out| out[0] = f(z)).map(|v| v[0])
}

/// `∫_ℝ f(λ) dλ` for an integrand carrying `e^{−ω(λ)t}`; truncated where
/// that factor drops below `10⁻¹⁶` and split into panels of half a
/// wavelength of `e^{iλ(x−L) − iK₀λt}`.
pub fn integrate_real_line<F: Fn(C64) -> C64>(f: F, params: &ProblemParams, t: f64, profile: &AccuracyProfile) -> Result<C64> {
    if t <= 0.0 {
        return Err(Error::ZeroTimeUnbounded);
    }
    let lim = math::sqrt(profile.decay_exponent / (params.d0 * t));
    let width = PI / (params.length + params.k0 * t);
    let tol = profile.rel_quad_tol;
    let (gx, gw) = quad::gauss_legendre(profile.order);
    let eval = |panels: usize| -> (C64, f64) {
        let h = 2.0 * lim / panels as f64;
        let mut sum = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        for j in 0..panels {
            let mid = -lim + (j as f64 + 0.5) * h;
            for (xi, wi) in gx.iter().zip(&gw) {
                let term = f(C64::new(mid + 0.5 * h * xi, 0.0)) * (0.5 * h * wi);
                sum += term;
                mag += term.norm();
            }
        }
        (sum, mag)
    };
    let mut panels = math::ceil(2.0 * lim / width).max(8.0) as usize;
    let (mut prev, _) = eval(panels);
    let mut worst = 0.0;
    for _ in 0..profile.max_refinements.max(1) {
        panels *= 2;
        let (cur, mag) = eval(panels);
        let change = (cur - prev).norm() / mag.max(f64::MIN_POSITIVE);
        if !change.is_finite() {
            return Err(Error::NotConverged { change, tolerance: tol });
        }
        if change <= tol {
            return Ok(cur);
        }
        worst = change;
        prev = cur;
    }
    Err(Error::NotConverged { change: worst, tolerance: tol })
}
