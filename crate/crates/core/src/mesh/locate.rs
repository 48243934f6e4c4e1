//! Point location by uniform grid binning over triangle bounding boxes.

use super::{Mesh, Triangle};
use crate::geom::Pt;
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub(crate) struct Locator {
    nx: usize,
    ny: usize,
    x0: f64,
    y0: f64,
    inv_dx: f64,
    inv_dy: f64,
    cells: Vec<Vec<u32>>,
    scale: f64,
}

impl Locator {
    pub(crate) fn build(vertices: &[Pt], triangles: &[Triangle]) -> Locator {
        let mut lo = Pt { x: f64::INFINITY, y: f64::INFINITY };
        let mut hi = Pt { x: f64::NEG_INFINITY, y: f64::NEG_INFINITY };
        for v in vertices {
            lo.x = lo.x.min(v.x);
            lo.y = lo.y.min(v.y);
            hi.x = hi.x.max(v.x);
            hi.y = hi.y.max(v.y);
        }
        let n = (triangles.len() as f64).sqrt().ceil() as usize;
        let (nx, ny) = (n.max(1), n.max(1));
        let dx = ((hi.x - lo.x) / nx as f64).max(1e-300);
        let dy = ((hi.y - lo.y) / ny as f64).max(1e-300);
        let mut cells = vec![Vec::new(); nx * ny];
        let clampi = |v: f64, n: usize| (v.max(0.0) as usize).min(n - 1);
        for (t, tri) in triangles.iter().enumerate() {
            let ps = [vertices[tri.v[0]], vertices[tri.v[1]], vertices[tri.v[2]]];
            let bx0 = clampi((ps.iter().map(|p| p.x).fold(f64::INFINITY, f64::min) - lo.x) / dx, nx);
            let bx1 = clampi((ps.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max) - lo.x) / dx, nx);
            let by0 = clampi((ps.iter().map(|p| p.y).fold(f64::INFINITY, f64::min) - lo.y) / dy, ny);
            let by1 = clampi((ps.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max) - lo.y) / dy, ny);
            for iy in by0..=by1 {
                for ix in bx0..=bx1 {
                    cells[iy * nx + ix].push(t as u32);
                }
            }
        }
        let scale = (hi.x - lo.x).max(hi.y - lo.y);
        Locator { nx, ny, x0: lo.x, y0: lo.y, inv_dx: 1.0 / dx, inv_dy: 1.0 / dy, cells, scale }
    }

    pub(crate) fn locate(&self, mesh: &Mesh, p: Pt) -> Result<(usize, [f64; 3])> {
        let ix = (((p.x - self.x0) * self.inv_dx).max(0.0) as usize).min(self.nx - 1);
        let iy = (((p.y - self.y0) * self.inv_dy).max(0.0) as usize).min(self.ny - 1);
        let tol = 1e-12_f64;
        let mut best: Option<(usize, [f64; 3], f64)> = None;
        for &t in &self.cells[iy * self.nx + ix] {
            let t = t as usize;
            let [a, b, c] = mesh.triangle_points(t);
            let area2 = (b - a).cross(c - a);
            if area2 <= 0.0 {
                continue;
            }
            let l0 = (b - p).cross(c - p) / area2;
            let l1 = (c - p).cross(a - p) / area2;
            let l2 = 1.0 - l0 - l1;
            let min_l = l0.min(l1).min(l2);
            if min_l >= -tol {
                match best {
                    Some((_, _, m)) if m >= min_l => {}
                    _ => best = Some((t, [l0, l1, l2], min_l)),
                }
            }
        }
        if best.is_none() {
            // the point may sit on a cell border; scan the 3x3 neighborhood
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    let jx = ix as i64 + dx;
                    let jy = iy as i64 + dy;
                    if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
                        continue;
                    }
                    for &t in &self.cells[jy as usize * self.nx + jx as usize] {
                        let t = t as usize;
                        let [a, b, c] = mesh.triangle_points(t);
                        let area2 = (b - a).cross(c - a);
                        if area2 <= 0.0 {
                            continue;
                        }
                        let rel = tol * (1.0 + self.scale / area2.sqrt());
                        let l0 = (b - p).cross(c - p) / area2;
                        let l1 = (c - p).cross(a - p) / area2;
                        let l2 = 1.0 - l0 - l1;
                        let min_l = l0.min(l1).min(l2);
                        if min_l >= -rel {
                            match best {
                                Some((_, _, m)) if m >= min_l => {}
                                _ => best = Some((t, [l0, l1, l2], min_l)),
                            }
                        }
                    }
                }
            }
        }
        match best {
            Some((t, bary, _)) => Ok((t, bary)),
            None => Err(Error::PointNotFound(p.x, p.y)),
        }
    }
}
