//! The periodic box `[0, sqrt(2)] x [0, 1]` and its dyadic tilings.
//!
//! Level-`n` tiles have dims `(sqrt(2) * 2^-ceil(n/2), 2^-floor(n/2))`: each
//! level-`(n+1)` tile is one of the two halves of a level-`n` tile split
//! across its long axis, so every tile keeps the aspect ratio `sqrt(2) : 1`
//! up to orientation. Only the partition and the split axis matter downstream,
//! so tiles are kept axis-aligned.

use crate::error::{CascadeError, Result};

/// Domain width (periodic in x).
pub const WIDTH: f64 = std::f64::consts::SQRT_2;
/// Domain height (periodic in y).
pub const HEIGHT: f64 = 1.0;

/// Coordinate axis of the torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    /// The other axis.
    pub fn perp(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }

    /// Domain extent along this axis.
    pub fn extent(self) -> f64 {
        match self {
            Axis::X => WIDTH,
            Axis::Y => HEIGHT,
        }
    }
}

/// Reduces `v` modulo `len` into `[0, len)`.
pub fn wrap_coord(v: f64, len: f64) -> f64 {
    let w = v.rem_euclid(len);
    if w >= len {
        w - len
    } else {
        w
    }
}

/// A point with coordinates always reduced into `[0, WIDTH) x [0, HEIGHT)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusPoint {
    x: f64,
    y: f64,
}

impl TorusPoint {
    /// Builds a point, reducing the coordinates modulo the domain.
    pub fn new(x: f64, y: f64) -> TorusPoint {
        TorusPoint { x: wrap_coord(x, WIDTH), y: wrap_coord(y, HEIGHT) }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    /// Coordinate along `axis`.
    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }
}

/// Geodesic distance on the torus: per-coordinate wrapped distances
/// (`d_x <= WIDTH/2`, `d_y <= HEIGHT/2`) combined in Euclidean norm.
pub fn torus_dist(p: TorusPoint, q: TorusPoint) -> f64 {
    let dx = wrap_coord(p.x - q.x, WIDTH);
    let dx = dx.min(WIDTH - dx);
    let dy = wrap_coord(p.y - q.y, HEIGHT);
    let dy = dy.min(HEIGHT - dy);
    (dx * dx + dy * dy).sqrt()
}

/// Tile dims at level `n`: `(sqrt(2) * 2^-ceil(n/2), 2^-floor(n/2))`.
pub fn box_dims(n: u32) -> (f64, f64) {
    let (cx, cy) = box_counts(n);
    (WIDTH / cx as f64, HEIGHT / cy as f64)
}

/// Tile counts per axis at level `n`: `(2^ceil(n/2), 2^floor(n/2))`,
/// `2^n` tiles in total.
pub fn box_counts(n: u32) -> (u64, u64) {
    assert!(n <= 64, "tiling level {n} exceeds supported depth");
    (1u64 << n.div_ceil(2), 1u64 << (n / 2))
}

/// Axis along which a level-`n` tile splits into its two children:
/// x when `n` is even, y when odd (always the tile's long side).
pub fn long_axis(n: u32) -> Axis {
    if n % 2 == 0 {
        Axis::X
    } else {
        Axis::Y
    }
}

/// Identifier of one tile of the level-`n` lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoxId {
    pub level: u32,
    pub ix: u64,
    pub iy: u64,
}

/// The unique level-`n` tile containing `p` (tiles are half-open at their
/// upper edges).
pub fn box_index(p: TorusPoint, n: u32) -> BoxId {
    let (cx, cy) = box_counts(n);
    let ix = ((p.x / WIDTH * cx as f64).floor() as u64).min(cx - 1);
    let iy = ((p.y / HEIGHT * cy as f64).floor() as u64).min(cy - 1);
    BoxId { level: n, ix, iy }
}

/// Lower-left corner of a tile.
pub fn box_origin(id: BoxId) -> TorusPoint {
    let (w, h) = box_dims(id.level);
    TorusPoint::new(id.ix as f64 * w, id.iy as f64 * h)
}

/// Cells per tile on a `2^q x 2^q` grid, or an error when level-`n` tile
/// edges do not land on grid lines (requires `ceil(n/2) <= q`).
pub fn cells_per_tile(n: u32, q: u32) -> Result<(usize, usize)> {
    let (cx, cy) = box_counts(n);
    let cells = 1u64 << q;
    if cx > cells || cy > cells {
        return Err(CascadeError::MisalignedLevel { level: n, q });
    }
    Ok(((cells / cx) as usize, (cells / cy) as usize))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_of_first_levels() {
        assert_eq!(box_dims(0), (WIDTH, 1.0));
        assert_eq!(box_dims(1), (WIDTH / 2.0, 1.0));
        assert_eq!(box_dims(2), (WIDTH / 2.0, 0.5));
        assert_eq!(box_dims(3), (WIDTH / 4.0, 0.5));
    }

    #[test]
    fn tile_area_halves_per_level() {
        for n in 0..=40u32 {
            let (w, h) = box_dims(n);
            let want = WIDTH * (-(n as f64)).exp2();
            assert!(
                (w * h - want).abs() <= 1e-14 * want,
                "area at level {n}: got {}, want {want}",
                w * h
            );
        }
    }

    #[test]
    fn split_axis_alternates_starting_along_x() {
        assert_eq!(long_axis(0), Axis::X);
        assert_eq!(long_axis(1), Axis::Y);
        for n in 0..32 {
            assert_ne!(long_axis(n), long_axis(n + 1), "no alternation at {n}");
        }
    }

    #[test]
    fn wrapped_distance_examples() {
        let o = TorusPoint::new(0.0, 0.0);
        assert_eq!(torus_dist(o, o), 0.0);
        let near_wrap = TorusPoint::new(WIDTH - 0.01, 0.0);
        assert!((torus_dist(o, near_wrap) - 0.01).abs() <= 1e-12);
        let far = TorusPoint::new(WIDTH / 2.0, 0.5);
        assert!((torus_dist(o, far) - 0.75f64.sqrt()).abs() <= 1e-12);
    }

    #[test]
    fn index_origin_round_trip() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10_000 {
            let p = TorusPoint::new(rng.gen_range(0.0..WIDTH), rng.gen_range(0.0..1.0));
            let n = rng.gen_range(0u32..20);
            let id = box_index(p, n);
            let corner = box_origin(id);
            let (w, h) = box_dims(n);
            assert!(p.x() - corner.x() >= -1e-12 && p.x() - corner.x() < w + 1e-12);
            assert!(p.y() - corner.y() >= -1e-12 && p.y() - corner.y() < h + 1e-12);
        }
    }

    #[test]
    fn second_tile_across_x_at_level_one() {
        let p = TorusPoint::new(WIDTH / 2.0 + 0.01, 0.5);
        assert_eq!(box_index(p, 1), BoxId { level: 1, ix: 1, iy: 0 });
        assert_eq!(box_index(TorusPoint::new(0.1, 0.1), 0), BoxId { level: 0, ix: 0, iy: 0 });
    }

    #[test]
    fn tile_grid_alignment_is_exact_up_to_twice_q() {
        for q in 3..=10u32 {
            for n in 0..=2 * q {
                let (cw, ch) = cells_per_tile(n, q).unwrap();
                let (cx, cy) = box_counts(n);
                assert_eq!(cw as u64 * cx, 1 << q);
                assert_eq!(ch as u64 * cy, 1 << q);
            }
            assert!(cells_per_tile(2 * q + 1, q).is_err(), "q={q} must reject over-deep level");
        }
    }

    #[test]
    fn points_always_reduced() {
        let p = TorusPoint::new(-0.25, 2.5);
        assert!((p.x() - (WIDTH - 0.25)).abs() <= 1e-12);
        assert!((p.y() - 0.5).abs() <= 1e-12);
        let q = TorusPoint::new(WIDTH, 1.0);
        assert_eq!((q.x(), q.y()), (0.0, 0.0));
    }
}
