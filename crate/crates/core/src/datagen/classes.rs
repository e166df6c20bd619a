//! Parametric feature surfaces for the 24 classes, built in the stock frame
//! `[0, STOCK]^3` with material removed from the top face (`z = STOCK`) or
//! from the edges adjacent to it. Every boundary edge of a generated surface
//! lies exactly on one stock face, which is what block assembly relies on.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::builder::{levels, SurfaceBuilder};
use crate::error::{Error, Result};
use crate::geom::Vec3;
use crate::mesh::TriangleMesh;

/// Edge length of the cubic stock.
pub const STOCK: f64 = 10.0;
const S: f64 = STOCK;
/// Clearance kept between a feature and the stock sides it does not cut.
const MARGIN: f64 = 0.05 * STOCK;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParamKind {
    /// Fraction of the stock edge, multiplied by the dimension scale.
    Length,
    /// Degrees.
    Angle,
    /// Dimensionless.
    Fraction,
}

/// One uniformly drawn generator parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: ParamKind,
    pub lo: f64,
    pub hi: f64,
}

const fn len(name: &'static str, lo: f64, hi: f64) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Length, lo, hi }
}

const fn deg(name: &'static str, lo: f64, hi: f64) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Angle, lo, hi }
}

const fn frac(name: &'static str, lo: f64, hi: f64) -> ParamSpec {
    ParamSpec { name, kind: ParamKind::Fraction, lo, hi }
}

pub(crate) const CLASS_TABLE: [(&str, &[ParamSpec]); 24] = [
    ("O-ring", &[len("outer_radius", 0.18, 0.35), len("width", 0.05, 0.12), len("depth", 0.08, 0.4)]),
    ("through hole", &[len("radius", 0.06, 0.3)]),
    ("blind hole", &[len("radius", 0.06, 0.3), len("depth", 0.1, 0.7)]),
    ("triangular passage", &[len("circumradius", 0.18, 0.38), deg("vertex_jitter", 0.0, 25.0)]),
    ("rectangular passage", &[len("width", 0.12, 0.6), len("length", 0.12, 0.6)]),
    ("circular through slot", &[len("radius", 0.08, 0.3)]),
    ("triangular through slot", &[len("width", 0.15, 0.5), len("depth", 0.1, 0.45), frac("apex_offset", -0.3, 0.3)]),
    ("rectangular through slot", &[len("width", 0.1, 0.45), len("depth", 0.1, 0.5)]),
    ("rectangular blind slot", &[len("length", 0.25, 0.75), len("width", 0.12, 0.4), len("depth", 0.1, 0.5)]),
    ("triangular pocket", &[len("circumradius", 0.18, 0.38), deg("vertex_jitter", 0.0, 25.0), len("depth", 0.1, 0.6)]),
    ("rectangular pocket", &[len("width", 0.15, 0.6), len("length", 0.15, 0.6), len("depth", 0.1, 0.6)]),
    ("circular end pocket", &[len("radius", 0.08, 0.2), len("straight_length", 0.1, 0.4), len("depth", 0.1, 0.6)]),
    ("triangular blind step", &[len("reach", 0.2, 0.45), deg("half_angle", 20.0, 37.5), len("depth", 0.1, 0.5)]),
    ("circular blind step", &[len("radius", 0.12, 0.35), len("depth", 0.1, 0.5)]),
    ("rectangular blind step", &[len("reach_x", 0.15, 0.5), len("reach_y", 0.15, 0.5), len("depth", 0.1, 0.5)]),
    ("rectangular through step", &[len("reach", 0.12, 0.5), len("depth", 0.1, 0.5)]),
    ("2-sides through step", &[len("reach_x", 0.1, 0.4), len("reach_y", 0.1, 0.4), len("depth", 0.1, 0.5)]),
    ("slanted through step", &[len("reach", 0.2, 0.5), len("depth", 0.1, 0.45), deg("slant", 20.0, 50.0)]),
    ("chamfer", &[len("leg_top", 0.08, 0.4), len("leg_side", 0.08, 0.4)]),
    ("round", &[len("radius", 0.08, 0.4)]),
    ("vertical circular end blind slot", &[len("radius", 0.06, 0.18), len("straight_length", 0.2, 0.6), len("depth", 0.1, 0.5)]),
    ("horizontal circular end blind slot", &[len("width", 0.12, 0.4), len("straight_length", 0.15, 0.5), len("depth", 0.08, 0.3)]),
    ("6-sides passage", &[len("circumradius", 0.15, 0.38), deg("vertex_jitter", 0.0, 8.0)]),
    ("6-sides pocket", &[len("circumradius", 0.15, 0.38), deg("vertex_jitter", 0.0, 8.0), len("depth", 0.1, 0.6)]),
];

/// Tessellation density of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Tess {
    /// Segments per full circle.
    pub segments: usize,
    /// Rows along the height of vertical walls.
    pub rows: usize,
}

/// Draws the class parameters, then places and tessellates the feature.
pub(crate) fn generate(class: usize, scale: f64, tess: Tess, rng: &mut dyn RngCore) -> Result<TriangleMesh> {
    let (_, specs) = CLASS_TABLE
        .get(class)
        .ok_or_else(|| Error::Registry(format!("id {class}")))?;
    let p: Vec<f64> = specs
        .iter()
        .map(|s| {
            let v = rng.gen_range(s.lo..=s.hi);
            match s.kind {
                ParamKind::Length => v * S * scale,
                ParamKind::Angle => v.to_radians(),
                ParamKind::Fraction => v,
            }
        })
        .collect();
    let mut g = Gen { p, tess, rng, b: SurfaceBuilder::new() };
    match class {
        0 => g.o_ring(),
        1 => g.hole(false),
        2 => g.hole(true),
        3 => g.polygon_cut(3, false),
        4 => g.rect_cut(false),
        5 => g.circular_through_slot(),
        6 => g.triangular_through_slot(),
        7 => g.rect_through_slot(),
        8 => g.rect_blind_slot(),
        9 => g.polygon_cut(3, true),
        10 => g.rect_cut(true),
        11 => g.circular_end_pocket(),
        12 => g.triangular_blind_step(),
        13 => g.circular_blind_step(),
        14 => g.rect_blind_step(),
        15 => g.rect_through_step(),
        16 => g.two_sides_through_step(),
        17 => g.slanted_through_step(),
        18 => g.chamfer(),
        19 => g.round(),
        20 => g.vertical_end_slot(),
        21 => g.horizontal_end_slot(),
        22 => g.polygon_cut(6, false),
        _ => g.polygon_cut(6, true),
    }?;
    g.b.finish()
}

/// Explicit-parameter shapes used by block placement.
pub(crate) fn hole(center: [f64; 2], radius: f64, depth: Option<f64>, tess: Tess, phase: f64) -> Result<TriangleMesh> {
    let mut b = SurfaceBuilder::new();
    let profile = circle(center, radius, tess.segments, phase);
    let z0 = depth.map_or(0.0, |d| S - d);
    let rows = vertical_walls(&mut b, &profile, true, &levels(z0, S, tess.rows), true);
    if depth.is_some() {
        b.planar(&[rows[0].clone()], Vec3::z())?;
    }
    b.finish()
}

pub(crate) fn rectangle(lo: [f64; 2], hi: [f64; 2], depth: Option<f64>, rows: usize) -> Result<TriangleMesh> {
    let mut b = SurfaceBuilder::new();
    let profile = [[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]];
    let z0 = depth.map_or(0.0, |d| S - d);
    let r = vertical_walls(&mut b, &profile, true, &levels(z0, S, rows), true);
    if depth.is_some() {
        b.planar(&[r[0].clone()], Vec3::z())?;
    }
    b.finish()
}

/// Open slot along y with vertical walls at `x0`, `x1` and floor at `S - depth`.
pub(crate) fn through_slot(x0: f64, x1: f64, depth: f64) -> Result<TriangleMesh> {
    let mut b = SurfaceBuilder::new();
    let z = S - depth;
    sweep_y(&mut b, &[[x0, S], [x0, z], [x1, z], [x1, S]], &[0.0, S], true);
    b.finish()
}

struct Gen<'a> {
    p: Vec<f64>,
    tess: Tess,
    rng: &'a mut dyn RngCore,
    b: SurfaceBuilder,
}

impl Gen<'_> {
    /// Uniform position in `[lo, hi]`, collapsing to the midpoint if the
    /// interval is empty.
    fn pos(&mut self, lo: f64, hi: f64) -> f64 {
        if hi > lo {
            self.rng.gen_range(lo..=hi)
        } else {
            0.5 * (lo + hi)
        }
    }

    fn phase(&mut self) -> f64 {
        self.rng.gen_range(0.0..TAU)
    }

    fn centre(&mut self, reach: f64) -> [f64; 2] {
        [self.pos(reach + MARGIN, S - reach - MARGIN), self.pos(reach + MARGIN, S - reach - MARGIN)]
    }

    fn half(&self) -> usize {
        (self.tess.segments / 2).max(4)
    }

    fn quarter(&self) -> usize {
        (self.tess.segments / 4).max(2)
    }

    fn floor(&mut self, ring: &[usize]) -> Result<()> {
        self.b.planar(&[ring.to_vec()], Vec3::z())
    }

    fn o_ring(&mut self) -> Result<()> {
        let (r2, w, d) = (self.p[0], self.p[1], self.p[2]);
        let r1 = r2 - w;
        let c = self.centre(r2);
        let phase = self.phase();
        let n = self.tess.segments;
        let inner_n = ((n as f64 * r1 / r2).round() as usize).max(12);
        let lv = wall_levels(self.tess.rows, Some(d));
        let outer = vertical_walls(&mut self.b, &circle(c, r2, n, phase), true, &lv, true);
        let inner = vertical_walls(&mut self.b, &circle(c, r1, inner_n, phase), true, &lv, false);
        self.b.planar(&[outer[0].clone(), inner[0].clone()], Vec3::z())
    }

    fn hole(&mut self, blind: bool) -> Result<()> {
        let r = self.p[0];
        let depth = blind.then(|| self.p[1]);
        let c = self.centre(r);
        let phase = self.phase();
        let rows = vertical_walls(&mut self.b, &circle(c, r, self.tess.segments, phase), true, &wall_levels(self.tess.rows, depth), true);
        if blind {
            self.floor(&rows[0])?;
        }
        Ok(())
    }

    /// Triangle (`k = 3`) or hexagon (`k = 6`) with jittered vertex angles.
    fn polygon_cut(&mut self, k: usize, blind: bool) -> Result<()> {
        let (rho, jitter) = (self.p[0], self.p[1]);
        let depth = blind.then(|| self.p[2]);
        let c = self.centre(rho);
        let t0 = self.phase();
        let profile: Vec<[f64; 2]> = (0..k)
            .map(|i| {
                let t = t0 + TAU * i as f64 / k as f64 + self.pos(-jitter, jitter);
                let r = rho * self.pos(0.85, 1.0);
                [c[0] + r * t.cos(), c[1] + r * t.sin()]
            })
            .collect();
        let rows = vertical_walls(&mut self.b, &profile, true, &wall_levels(self.tess.rows, depth), true);
        if blind {
            self.floor(&rows[0])?;
        }
        Ok(())
    }

    fn rect_cut(&mut self, blind: bool) -> Result<()> {
        let (w, l) = (self.p[0], self.p[1]);
        let depth = blind.then(|| self.p[2]);
        let x0 = self.pos(MARGIN, S - MARGIN - w);
        let y0 = self.pos(MARGIN, S - MARGIN - l);
        let profile = [[x0, y0], [x0 + w, y0], [x0 + w, y0 + l], [x0, y0 + l]];
        let rows = vertical_walls(&mut self.b, &profile, true, &wall_levels(self.tess.rows, depth), true);
        if blind {
            self.floor(&rows[0])?;
        }
        Ok(())
    }

    fn circular_through_slot(&mut self) -> Result<()> {
        let r = self.p[0];
        let c = self.pos(r + MARGIN, S - r - MARGIN);
        let mut profile = arc([c, S], r, PI, TAU, self.half());
        snap_ends(&mut profile, [c - r, S], [c + r, S]);
        sweep_y(&mut self.b, &profile, &[0.0, S], true);
        Ok(())
    }

    fn triangular_through_slot(&mut self) -> Result<()> {
        let (w, d, off) = (self.p[0], self.p[1], self.p[2]);
        let c = self.pos(0.5 * w + MARGIN, S - 0.5 * w - MARGIN);
        let profile = [[c - 0.5 * w, S], [c + off * w, S - d], [c + 0.5 * w, S]];
        sweep_y(&mut self.b, &profile, &[0.0, S], true);
        Ok(())
    }

    fn rect_through_slot(&mut self) -> Result<()> {
        let (w, d) = (self.p[0], self.p[1]);
        let x0 = self.pos(MARGIN, S - MARGIN - w);
        let z = S - d;
        sweep_y(&mut self.b, &[[x0, S], [x0, z], [x0 + w, z], [x0 + w, S]], &[0.0, S], true);
        Ok(())
    }

    fn rect_blind_slot(&mut self) -> Result<()> {
        let (l, w, d) = (self.p[0], self.p[1], self.p[2]);
        let y0 = self.pos(MARGIN, S - MARGIN - w);
        let profile = [[0.0, y0], [l, y0], [l, y0 + w], [0.0, y0 + w]];
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), true);
        self.floor(&rows[0])
    }

    fn circular_end_pocket(&mut self) -> Result<()> {
        let (r, l, d) = (self.p[0], self.p[1], self.p[2]);
        let x0 = self.pos(MARGIN + r, S - MARGIN - r - l);
        let yc = self.pos(MARGIN + r, S - MARGIN - r);
        let n = self.half();
        let mut profile = vec![[x0, yc - r]];
        let mut right = arc([x0 + l, yc], r, -FRAC_PI_2, FRAC_PI_2, n);
        snap_ends(&mut right, [x0 + l, yc - r], [x0 + l, yc + r]);
        profile.extend(right);
        let mut left = arc([x0, yc], r, FRAC_PI_2, 1.5 * PI, n);
        snap_ends(&mut left, [x0, yc + r], [x0, yc - r]);
        profile.extend(&left[..n]);
        let rows = vertical_walls(&mut self.b, &profile, true, &wall_levels(self.tess.rows, Some(d)), true);
        self.floor(&rows[0])
    }

    /// Triangle whose base lies on the edge `x = S` of the top face.
    fn triangular_blind_step(&mut self) -> Result<()> {
        let (a, alpha, d) = (self.p[0], self.p[1], self.p[2]);
        let base = (2.0 * a * alpha.tan()).min(S - 2.0 * MARGIN);
        let y0 = self.pos(MARGIN, S - MARGIN - base);
        let ya = y0 + base * self.pos(0.35, 0.65);
        let profile = [[S, y0 + base], [S - a, ya], [S, y0]];
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), true);
        self.floor(&rows[0])
    }

    /// Half disc centred on the edge `x = S` of the top face.
    fn circular_blind_step(&mut self) -> Result<()> {
        let (r, d) = (self.p[0], self.p[1]);
        let yc = self.pos(r + MARGIN, S - r - MARGIN);
        let mut profile = arc([S, yc], r, FRAC_PI_2, 1.5 * PI, self.half());
        snap_ends(&mut profile, [S, yc + r], [S, yc - r]);
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), true);
        self.floor(&rows[0])
    }

    /// Rectangle at the top-face corner `(S, 0)`.
    fn rect_blind_step(&mut self) -> Result<()> {
        let (a, bw, d) = (self.p[0], self.p[1], self.p[2]);
        let profile = [[S - a, 0.0], [S - a, bw], [S, bw]];
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), false);
        let z = S - d;
        let corner = self.b.vertex(Vec3::new(S, 0.0, z));
        let mut ring = rows[0].clone();
        ring.push(corner);
        self.floor(&ring)
    }

    fn rect_through_step(&mut self) -> Result<()> {
        let (a, d) = (self.p[0], self.p[1]);
        sweep_y(&mut self.b, &[[S - a, S], [S - a, S - d], [S, S - d]], &[0.0, S], true);
        Ok(())
    }

    /// Step of one depth running along the two top edges meeting at `(S, 0)`.
    fn two_sides_through_step(&mut self) -> Result<()> {
        let (a, bw, d) = (self.p[0], self.p[1], self.p[2]);
        let profile = [[0.0, bw], [S - a, bw], [S - a, S]];
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), false);
        let z = S - d;
        let mut ring = rows[0].clone();
        for p in [[S, S], [S, 0.0], [0.0, 0.0]] {
            ring.push(self.b.vertex(Vec3::new(p[0], p[1], z)));
        }
        self.floor(&ring)
    }

    fn slanted_through_step(&mut self) -> Result<()> {
        let (a, d, phi) = (self.p[0], self.p[1], self.p[2]);
        let run = (d * phi.tan()).min(0.7 * a);
        sweep_y(&mut self.b, &[[S - a, S], [S - a + run, S - d], [S, S - d]], &[0.0, S], true);
        Ok(())
    }

    fn chamfer(&mut self) -> Result<()> {
        let (a, c) = (self.p[0], self.p[1]);
        sweep_y(&mut self.b, &[[S - a, S], [S, S - c]], &[0.0, S], true);
        Ok(())
    }

    fn round(&mut self) -> Result<()> {
        let r = self.p[0];
        let mut profile = arc([S - r, S - r], r, FRAC_PI_2, 0.0, self.quarter());
        snap_ends(&mut profile, [S - r, S], [S, S - r]);
        sweep_y(&mut self.b, &profile, &[0.0, S], true);
        Ok(())
    }

    fn vertical_end_slot(&mut self) -> Result<()> {
        let (r, l, d) = (self.p[0], self.p[1], self.p[2]);
        let yc = self.pos(r + MARGIN, S - r - MARGIN);
        let mut end = arc([l, yc], r, -FRAC_PI_2, FRAC_PI_2, self.half());
        snap_ends(&mut end, [l, yc - r], [l, yc + r]);
        let mut profile = vec![[0.0, yc - r]];
        profile.extend(end);
        profile.push([0.0, yc + r]);
        let rows = vertical_walls(&mut self.b, &profile, false, &wall_levels(self.tess.rows, Some(d)), true);
        self.floor(&rows[0])
    }

    /// Blind slot from `x = 0` whose floor runs out to the top face along a
    /// quarter cylinder with horizontal axis.
    fn horizontal_end_slot(&mut self) -> Result<()> {
        let (w, l, d) = (self.p[0], self.p[1], self.p[2]);
        let y0 = self.pos(MARGIN, S - MARGIN - w);
        let mut end = arc([l, S], d, -FRAC_PI_2, 0.0, self.quarter());
        snap_ends(&mut end, [l, S - d], [l + d, S]);
        let mut profile = vec![[0.0, S - d]];
        profile.extend(end);
        let rows = sweep_y(&mut self.b, &profile, &[y0, y0 + w], true);
        for (row, normal) in [(&rows[0], Vec3::y()), (&rows[1], -Vec3::y())] {
            let y = self.b.point(row[0]).y;
            let mut ring = row.clone();
            ring.push(self.b.vertex(Vec3::new(0.0, y, S)));
            self.b.planar(&[ring], normal)?;
        }
        Ok(())
    }
}

fn wall_levels(rows: usize, depth: Option<f64>) -> Vec<f64> {
    levels(depth.map_or(0.0, |d| S - d), S, rows)
}

/// `n` points of a counter-clockwise circle starting at angle `phase`.
fn circle(c: [f64; 2], r: f64, n: usize, phase: f64) -> Vec<[f64; 2]> {
    (0..n)
        .map(|k| {
            let t = phase + TAU * k as f64 / n as f64;
            [c[0] + r * t.cos(), c[1] + r * t.sin()]
        })
        .collect()
}

/// `n + 1` points from angle `a0` to `a1`.
fn arc(c: [f64; 2], r: f64, a0: f64, a1: f64, n: usize) -> Vec<[f64; 2]> {
    (0..=n)
        .map(|k| {
            let t = a0 + (a1 - a0) * k as f64 / n as f64;
            [c[0] + r * t.cos(), c[1] + r * t.sin()]
        })
        .collect()
}

/// Replaces computed arc endpoints by exact ones so they sit on stock planes.
fn snap_ends(points: &mut [[f64; 2]], first: [f64; 2], last: [f64; 2]) {
    points[0] = first;
    let n = points.len();
    points[n - 1] = last;
}

/// Vertical walls over a top-view profile; `void_left` says which side of
/// the walking direction the removed material is on. Returns one vertex
/// row per level, bottom first.
fn vertical_walls(
    b: &mut SurfaceBuilder,
    profile: &[[f64; 2]],
    closed: bool,
    levels: &[f64],
    void_left: bool,
) -> Vec<Vec<usize>> {
    let rows = b.extrude_columns(profile, levels);
    let sign = if void_left { 1.0 } else { -1.0 };
    for w in rows.windows(2) {
        b.strip(&w[0], &w[1], closed, |q| {
            let d = q[1] - q[0];
            Vec3::new(-d.y, d.x, 0.0) * sign
        });
    }
    rows
}

/// Sweeps a side-view profile `(x, z)` along y through the given stations.
fn sweep_y(b: &mut SurfaceBuilder, profile: &[[f64; 2]], ys: &[f64], void_left: bool) -> Vec<Vec<usize>> {
    let rows: Vec<Vec<usize>> = ys
        .iter()
        .map(|&y| profile.iter().map(|p| b.vertex(Vec3::new(p[0], y, p[1]))).collect())
        .collect();
    let sign = if void_left { 1.0 } else { -1.0 };
    for w in rows.windows(2) {
        b.strip(&w[0], &w[1], false, |q| {
            let d = q[1] - q[0];
            Vec3::new(-d.z, 0.0, d.x) * sign
        });
    }
    rows
}
