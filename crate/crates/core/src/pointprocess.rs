//! Finite-window realizations of the base-station, mobile and
//! switching-center processes, nearest-BS association and per-slot
//! scheduling of one mobile per nonempty cell.

use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::error::{require, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Rectangular observation window `[0, width) × [0, height)`, optionally with
/// periodic (torus) boundaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub width: f64,
    pub height: f64,
    pub torus: bool,
}

impl Window {
    pub fn new(width: f64, height: f64, torus: bool) -> Result<Self> {
        let w = Window {
            width,
            height,
            torus,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn square(side: f64) -> Result<Self> {
        Self::new(side, side, true)
    }

    pub fn validate(&self) -> Result<()> {
        require(
            self.width > 0.0 && self.width.is_finite(),
            "width",
            "must be > 0",
        )?;
        require(
            self.height > 0.0 && self.height.is_finite(),
            "height",
            "must be > 0",
        )
    }

    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    pub fn contains(&self, p: Point) -> bool {
        (0.0..self.width).contains(&p.x) && (0.0..self.height).contains(&p.y)
    }

    /// Squared distance under the window metric.
    #[inline]
    pub fn distance_sq(&self, a: Point, b: Point) -> f64 {
        let mut dx = (a.x - b.x).abs();
        let mut dy = (a.y - b.y).abs();
        if self.torus {
            dx = dx.min(self.width - dx);
            dy = dy.min(self.height - dy);
        }
        dx * dx + dy * dy
    }

    /// Euclidean distance, or on a torus the shortest distance over the
    /// periodic images.
    #[inline]
    pub fn distance(&self, a: Point, b: Point) -> f64 {
        self.distance_sq(a, b).sqrt()
    }

    /// Shifts `p` by `(dx, dy)` modulo the window.
    pub fn translate(&self, p: Point, dx: f64, dy: f64) -> Point {
        let wrap = |v: f64, len: f64| {
            let r = v.rem_euclid(len);
            if r >= len {
                0.0
            } else {
                r
            }
        };
        Point::new(wrap(p.x + dx, self.width), wrap(p.y + dy, self.height))
    }
}

/// Free-function form of [`Window::distance`].
pub fn distance(a: Point, b: Point, window: &Window) -> f64 {
    window.distance(a, b)
}

/// Seeded random stream. Equal `(seed, stream_id)` pairs replay the same
/// sequence; different stream ids select disjoint ChaCha streams.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<Point>,
    pub window: Window,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn uniform_coord<R: Rng + ?Sized>(rng: &mut R, len: f64) -> f64 {
    let v = rng.random::<f64>() * len;
    // u·len can round up to len itself
    if v >= len {
        0.0
    } else {
        v
    }
}

pub fn uniform_point<R: Rng + ?Sized>(rng: &mut R, window: &Window) -> Point {
    let x = uniform_coord(rng, window.width);
    let y = uniform_coord(rng, window.height);
    Point::new(x, y)
}

/// Homogeneous PPP of the given density on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(
    density: f64,
    window: &Window,
    rng: &mut R,
) -> Result<PointPattern> {
    require(
        density >= 0.0 && density.is_finite(),
        "density",
        "must be >= 0",
    )?;
    window.validate()?;
    let mean = density * window.area();
    let n = if mean > 0.0 {
        let poisson = Poisson::new(mean).map_err(|e| Error::invalid("density", e.to_string()))?;
        poisson.sample(rng) as usize
    } else {
        0
    };
    let points = (0..n).map(|_| uniform_point(rng, window)).collect();
    Ok(PointPattern {
        points,
        window: *window,
    })
}

/// Bucket grid over a point pattern for nearest-neighbor queries under the
/// window metric.
#[derive(Debug, Clone)]
pub struct NearestIndex<'a> {
    pattern: &'a PointPattern,
    nx: usize,
    ny: usize,
    cell_w: f64,
    cell_h: f64,
    starts: Vec<usize>,
    items: Vec<usize>,
}

impl<'a> NearestIndex<'a> {
    const POINTS_PER_CELL: f64 = 2.0;

    pub fn new(pattern: &'a PointPattern) -> Self {
        let w = pattern.window;
        let n = pattern.len();
        let cells = (n as f64 / Self::POINTS_PER_CELL).max(1.0);
        let aspect = w.width / w.height;
        let nx = ((cells * aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let ny = ((cells / aspect).sqrt().ceil() as usize).clamp(1, 4096);
        let cell_w = w.width / nx as f64;
        let cell_h = w.height / ny as f64;

        let cell_of = |p: &Point| {
            let i = ((p.x / cell_w) as usize).min(nx - 1);
            let j = ((p.y / cell_h) as usize).min(ny - 1);
            j * nx + i
        };
        let mut counts = vec![0usize; nx * ny + 1];
        for p in &pattern.points {
            counts[cell_of(p) + 1] += 1;
        }
        for c in 1..counts.len() {
            counts[c] += counts[c - 1];
        }
        let mut fill = counts.clone();
        let mut items = vec![0usize; n];
        for (idx, p) in pattern.points.iter().enumerate() {
            let c = cell_of(p);
            items[fill[c]] = idx;
            fill[c] += 1;
        }
        NearestIndex {
            pattern,
            nx,
            ny,
            cell_w,
            cell_h,
            starts: counts,
            items,
        }
    }

    fn brute_force(&self, q: Point) -> Option<(usize, f64)> {
        let w = &self.pattern.window;
        let mut best: Option<(usize, f64)> = None;
        for (idx, p) in self.pattern.points.iter().enumerate() {
            let d2 = w.distance_sq(q, *p);
            if best.is_none_or(|(_, b)| d2 < b) {
                best = Some((idx, d2));
            }
        }
        best
    }

    #[inline]
    fn scan_cell(&self, cell: usize, q: Point, best: &mut Option<(usize, f64)>) {
        let w = &self.pattern.window;
        for &idx in &self.items[self.starts[cell]..self.starts[cell + 1]] {
            let d2 = w.distance_sq(q, self.pattern.points[idx]);
            let better = match *best {
                None => true,
                Some((bi, bd)) => d2 < bd || (d2 == bd && idx < bi),
            };
            if better {
                *best = Some((idx, d2));
            }
        }
    }

    /// Index of the nearest point and the squared distance to it. Ties go to
    /// the lowest index. `None` when the pattern is empty.
    pub fn nearest(&self, q: Point) -> Option<(usize, f64)> {
        if self.pattern.is_empty() {
            return None;
        }
        let torus = self.pattern.window.torus;
        let ci = ((q.x / self.cell_w) as isize).clamp(0, self.nx as isize - 1);
        let cj = ((q.y / self.cell_h) as isize).clamp(0, self.ny as isize - 1);
        let min_cell = self.cell_w.min(self.cell_h);
        let max_ring = self.nx.max(self.ny) as isize;
        let (nx, ny) = (self.nx as isize, self.ny as isize);

        let mut best = None;
        for r in 0..=max_ring {
            if torus && 2 * r + 1 > nx.min(ny) {
                // rings would start revisiting wrapped cells
                return self.brute_force(q);
            }
            for dj in -r..=r {
                let edge_row = dj.abs() == r;
                let step = if edge_row { 1 } else { 2 * r.max(1) };
                let mut di = -r;
                while di <= r {
                    let (mut i, mut j) = (ci + di, cj + dj);
                    if torus {
                        i = i.rem_euclid(nx);
                        j = j.rem_euclid(ny);
                    }
                    if (0..nx).contains(&i) && (0..ny).contains(&j) {
                        self.scan_cell((j * nx + i) as usize, q, &mut best);
                    }
                    di += step;
                }
            }
            if let Some((_, d2)) = best {
                let reach = r as f64 * min_cell;
                if d2 <= reach * reach {
                    break;
                }
            }
        }
        best
    }
}

/// Mobile-to-BS association and the resulting set of active base stations.
#[derive(Debug, Clone, PartialEq)]
pub struct Association {
    /// Serving BS index for every mobile.
    pub assoc: Vec<usize>,
    /// Number of mobiles in each BS's cell.
    pub cell_load: Vec<usize>,
}

impl Association {
    pub fn is_active(&self, bs: usize) -> bool {
        self.cell_load[bs] > 0
    }

    /// Indices of BSs with at least one associated mobile, ascending.
    pub fn active_bs(&self) -> Vec<usize> {
        (0..self.cell_load.len())
            .filter(|&b| self.is_active(b))
            .collect()
    }

    pub fn active_count(&self) -> usize {
        self.cell_load.iter().filter(|&&l| l > 0).count()
    }
}

/// Assigns each mobile to its nearest BS under the window metric.
pub fn associate(mobiles: &PointPattern, bs: &PointPattern) -> Result<Association> {
    if bs.is_empty() {
        return Err(Error::EmptyBs);
    }
    let index = NearestIndex::new(bs);
    let mut cell_load = vec![0usize; bs.len()];
    let assoc = mobiles
        .points
        .iter()
        .map(|&m| {
            let (b, _) = index.nearest(m).expect("bs is nonempty");
            cell_load[b] += 1;
            b
        })
        .collect();
    Ok(Association { assoc, cell_load })
}

/// Per-slot schedule: one served mobile per active BS plus the measurement
/// mobile.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// `served_mobile[b]` is the mobile served by BS `b`, `None` if silent.
    pub served_mobile: Vec<Option<usize>>,
    pub typical_mobile: usize,
}

/// Picks one mobile uniformly from every nonempty cell, then one of the
/// served mobiles uniformly as the typical active mobile.
pub fn select_served<R: Rng + ?Sized>(association: &Association, rng: &mut R) -> Result<Schedule> {
    let mut served_mobile = vec![None; association.cell_load.len()];
    let mut seen = vec![0u32; association.cell_load.len()];
    // reservoir sampling keeps each cell's pick uniform in one pass
    for (m, &b) in association.assoc.iter().enumerate() {
        seen[b] += 1;
        if rng.random_range(0..seen[b]) == 0 {
            served_mobile[b] = Some(m);
        }
    }
    let active = association.active_count();
    if active == 0 {
        return Err(Error::NoActiveBs);
    }
    let pick = rng.random_range(0..active);
    let typical_mobile = served_mobile
        .iter()
        .flatten()
        .nth(pick)
        .copied()
        .expect("pick < active count");
    Ok(Schedule {
        served_mobile,
        typical_mobile,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Densities {
    pub lambda_b: f64,
    pub lambda_u: f64,
    pub lambda_s: f64,
}

/// One sampled network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    pub bs: PointPattern,
    pub mobiles: PointPattern,
    pub switching_centers: PointPattern,
    pub association: Association,
    pub schedule: Schedule,
    /// Exp(1) power gain of every BS's signal toward the typical mobile.
    pub fading: Vec<f64>,
}

impl NetworkRealization {
    /// Draws BSs, mobiles, fading, the schedule and finally switching
    /// centers, in that order, from `rng`.
    ///
    /// Realizations without BSs or without mobiles fail with
    /// [`Error::EmptyBs`] / [`Error::NoActiveBs`]; callers discard and redraw.
    pub fn sample<R: Rng + ?Sized>(
        densities: &Densities,
        window: &Window,
        rng: &mut R,
    ) -> Result<Self> {
        let bs = sample_ppp(densities.lambda_b, window, rng)?;
        let mobiles = sample_ppp(densities.lambda_u, window, rng)?;
        let association = associate(&mobiles, &bs)?;
        let fading: Vec<f64> = (0..bs.len()).map(|_| Exp1.sample(rng)).collect();
        let schedule = select_served(&association, rng)?;
        let switching_centers = sample_ppp(densities.lambda_s, window, rng)?;
        Ok(NetworkRealization {
            bs,
            mobiles,
            switching_centers,
            association,
            schedule,
            fading,
        })
    }

    pub fn window(&self) -> Window {
        self.bs.window
    }

    pub fn typical_point(&self) -> Point {
        self.mobiles.points[self.schedule.typical_mobile]
    }

    pub fn serving_bs(&self) -> usize {
        self.association.assoc[self.schedule.typical_mobile]
    }

    /// CSV dump with columns `kind,x,y,assoc_bs_index,active_flag,served_flag`.
    ///
    /// BS rows carry their own index; switching-center rows leave the
    /// association and flag columns empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,x,y,assoc_bs_index,active_flag,served_flag\n");
        let flag = |b: bool| if b { 1 } else { 0 };
        for (i, p) in self.bs.points.iter().enumerate() {
            let active = self.association.is_active(i);
            let _ = writeln!(
                out,
                "bs,{:.17e},{:.17e},{},{},{}",
                p.x,
                p.y,
                i,
                flag(active),
                flag(self.schedule.served_mobile[i].is_some())
            );
        }
        for (m, p) in self.mobiles.points.iter().enumerate() {
            let b = self.association.assoc[m];
            let _ = writeln!(
                out,
                "mobile,{:.17e},{:.17e},{},1,{}",
                p.x,
                p.y,
                b,
                flag(self.schedule.served_mobile[b] == Some(m))
            );
        }
        for p in &self.switching_centers.points {
            let _ = writeln!(out, "sc,{:.17e},{:.17e},,,", p.x, p.y);
        }
        out
    }
}
