//! One-dimensional to two-dimensional index layouts.
//!
//! Two layouts are provided: the Hilbert curve, which keeps bytes that are
//! close in the stream close on the grid, and the row-major scanline used as
//! a baseline. The Hilbert orientation is fixed: index 0 sits at `(0, 0)`, the
//! order-1 curve visits `(0,0) (0,1) (1,1) (1,0)`, and every order ends at
//! `(side - 1, 0)`. `y` grows downward when rendered.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest supported Hilbert order (coordinates fit in `u32`, indices in `u64`).
pub const MAX_HILBERT_ORDER: u32 = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CurveError {
    #[error("index {index} out of range for capacity {capacity}")]
    IndexOutOfRange { index: u64, capacity: u64 },
    #[error("hilbert order must be in 1..={MAX_HILBERT_ORDER}, got {0}")]
    BadOrder(u32),
    #[error("layout dimensions must be positive")]
    EmptyLayout,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    Hilbert,
    Scanline,
}

impl LayoutKind {
    pub fn name(self) -> &'static str {
        match self {
            LayoutKind::Hilbert => "hilbert",
            LayoutKind::Scanline => "scanline",
        }
    }
}

impl fmt::Display for LayoutKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LayoutKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "hilbert" => Ok(LayoutKind::Hilbert),
            "scanline" => Ok(LayoutKind::Scanline),
            _ => Err(format!("unknown layout {s:?}, expected hilbert or scanline")),
        }
    }
}

// Reflect/transpose a sub-square so the child curve joins its neighbours.
#[inline]
fn rotate(s: u32, x: &mut u32, y: &mut u32, rx: u32, ry: u32) {
    if ry == 0 {
        if rx == 1 {
            *x = s.wrapping_sub(1).wrapping_sub(*x);
            *y = s.wrapping_sub(1).wrapping_sub(*y);
        }
        std::mem::swap(x, y);
    }
}

/// Hilbert index to grid coordinate, `O(order)`.
pub fn hilbert_d_to_xy(order: u32, d: u64) -> Result<(u32, u32), CurveError> {
    if !(1..=MAX_HILBERT_ORDER).contains(&order) {
        return Err(CurveError::BadOrder(order));
    }
    let capacity = 1u64 << (2 * order);
    if d >= capacity {
        return Err(CurveError::IndexOutOfRange { index: d, capacity });
    }
    Ok(hilbert_d_to_xy_unchecked(order, d))
}

#[inline]
fn hilbert_d_to_xy_unchecked(order: u32, d: u64) -> (u32, u32) {
    let (mut x, mut y) = (0u32, 0u32);
    let mut t = d;
    for level in 0..order {
        let s = 1u32 << level;
        let rx = (1 & (t >> 1)) as u32;
        let ry = (1 & (t ^ u64::from(rx))) as u32;
        rotate(s, &mut x, &mut y, rx, ry);
        x += s * rx;
        y += s * ry;
        t >>= 2;
    }
    (x, y)
}

/// Inverse of [`hilbert_d_to_xy`].
pub fn hilbert_xy_to_d(order: u32, x: u32, y: u32) -> Result<u64, CurveError> {
    if !(1..=MAX_HILBERT_ORDER).contains(&order) {
        return Err(CurveError::BadOrder(order));
    }
    let side = 1u64 << order;
    if u64::from(x) >= side || u64::from(y) >= side {
        let capacity = side * side;
        return Err(CurveError::IndexOutOfRange {
            index: u64::from(y) * side + u64::from(x),
            capacity,
        });
    }
    let (mut x, mut y) = (x, y);
    let mut d = 0u64;
    for level in (0..order).rev() {
        let s = 1u32 << level;
        let rx = u32::from(x & s > 0);
        let ry = u32::from(y & s > 0);
        d += u64::from(s) * u64::from(s) * u64::from((3 * rx) ^ ry);
        rotate(side as u32, &mut x, &mut y, rx, ry);
    }
    Ok(d)
}

/// Row-major placement: `(d mod width, d div width)`.
///
/// # Panics
///
/// Panics if `width` is zero.
pub fn scanline_d_to_xy(width: u64, d: u64) -> (u64, u64) {
    assert!(width >= 1, "scanline width must be at least 1");
    (d % width, d / width)
}

/// A bijection between `0..capacity` and a `width x height` grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveLayout {
    kind: LayoutKind,
    width: u32,
    height: u32,
    /// Hilbert order, or for square power-of-two scanlines the matching order.
    order: Option<u32>,
}

impl CurveLayout {
    pub fn hilbert(order: u32) -> Result<Self, CurveError> {
        if !(1..=MAX_HILBERT_ORDER).contains(&order) {
            return Err(CurveError::BadOrder(order));
        }
        let side = 1u32 << order;
        Ok(CurveLayout {
            kind: LayoutKind::Hilbert,
            width: side,
            height: side,
            order: Some(order),
        })
    }

    pub fn scanline(width: u32, height: u32) -> Result<Self, CurveError> {
        if width == 0 || height == 0 {
            return Err(CurveError::EmptyLayout);
        }
        let order = (width == height && width.is_power_of_two()).then(|| width.trailing_zeros());
        Ok(CurveLayout {
            kind: LayoutKind::Scanline,
            width,
            height,
            order: order.filter(|&o| o >= 1),
        })
    }

    /// A layout of either kind on the `2^order` square.
    pub fn square(kind: LayoutKind, order: u32) -> Result<Self, CurveError> {
        match kind {
            LayoutKind::Hilbert => Self::hilbert(order),
            LayoutKind::Scanline => {
                if !(1..=MAX_HILBERT_ORDER).contains(&order) {
                    return Err(CurveError::BadOrder(order));
                }
                Self::scanline(1 << order, 1 << order)
            }
        }
    }

    pub fn kind(&self) -> LayoutKind {
        self.kind
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn order(&self) -> Option<u32> {
        self.order
    }

    pub fn capacity(&self) -> u64 {
        u64::from(self.width) * u64::from(self.height)
    }

    pub fn d_to_xy(&self, d: u64) -> Result<(u32, u32), CurveError> {
        let capacity = self.capacity();
        if d >= capacity {
            return Err(CurveError::IndexOutOfRange { index: d, capacity });
        }
        Ok(self.d_to_xy_unchecked(d))
    }

    #[inline]
    fn d_to_xy_unchecked(&self, d: u64) -> (u32, u32) {
        match self.kind {
            LayoutKind::Hilbert => hilbert_d_to_xy_unchecked(self.order.expect("hilbert order"), d),
            LayoutKind::Scanline => {
                let (x, y) = scanline_d_to_xy(u64::from(self.width), d);
                (x as u32, y as u32)
            }
        }
    }

    /// Precomputed index-to-coordinate table. Tables for square layouts up
    /// to order 8 are built once per process and shared.
    pub fn table(&self) -> Arc<LayoutTable> {
        const CACHED: usize = 9;
        static HILBERT: [OnceLock<Arc<LayoutTable>>; CACHED] = [const { OnceLock::new() }; CACHED];
        static SCANLINE: [OnceLock<Arc<LayoutTable>>; CACHED] = [const { OnceLock::new() }; CACHED];
        let slot = match (self.kind, self.order) {
            (LayoutKind::Hilbert, Some(o)) if (o as usize) < CACHED => Some(&HILBERT[o as usize]),
            (LayoutKind::Scanline, Some(o)) if (o as usize) < CACHED => Some(&SCANLINE[o as usize]),
            _ => None,
        };
        match slot {
            Some(cell) => Arc::clone(cell.get_or_init(|| Arc::new(LayoutTable::build(self)))),
            None => Arc::new(LayoutTable::build(self)),
        }
    }
}

impl fmt::Display for CurveLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.order) {
            (LayoutKind::Hilbert, Some(o)) => write!(f, "hilbert order {o} ({0}x{0})", self.width),
            _ => write!(f, "{} {}x{}", self.kind, self.width, self.height),
        }
    }
}

/// Coordinates of every index of a layout, in index order.
#[derive(Debug, Clone)]
pub struct LayoutTable {
    layout: CurveLayout,
    coords: Vec<(u32, u32)>,
}

impl LayoutTable {
    pub fn build(layout: &CurveLayout) -> Self {
        let coords = (0..layout.capacity()).map(|d| layout.d_to_xy_unchecked(d)).collect();
        LayoutTable {
            layout: *layout,
            coords,
        }
    }

    pub fn layout(&self) -> &CurveLayout {
        &self.layout
    }

    pub fn coords(&self) -> &[(u32, u32)] {
        &self.coords
    }

    /// Row-major pixel index of stream position `d`.
    #[inline]
    pub fn pixel_index(&self, d: usize) -> usize {
        let (x, y) = self.coords[d];
        y as usize * self.layout.width as usize + x as usize
    }
}

/// Mean Euclidean grid distance between positions `i` and `i + window`,
/// over every `i` in `0..capacity - window`. Lower is better locality.
pub fn locality_score(layout: &CurveLayout, window: u64) -> Result<f64, CurveError> {
    let capacity = layout.capacity();
    if window == 0 || window >= capacity {
        return Err(CurveError::IndexOutOfRange {
            index: window,
            capacity,
        });
    }
    Ok(locality_over(layout.table().coords(), window as usize))
}

fn locality_over(coords: &[(u32, u32)], window: usize) -> f64 {
    let pairs = coords.len() - window;
    let total: f64 = coords
        .iter()
        .zip(&coords[window..])
        .map(|(&(x0, y0), &(x1, y1))| {
            let dx = f64::from(x0) - f64::from(x1);
            let dy = f64::from(y0) - f64::from(y1);
            dx.hypot(dy)
        })
        .sum();
    total / pairs as f64
}

/// `"d x y"` lines for every index of the layout.
pub fn curve_dump(layout: &CurveLayout, mut out: impl std::io::Write) -> std::io::Result<()> {
    for (d, (x, y)) in layout.table().coords().iter().enumerate() {
        writeln!(out, "{d} {x} {y}")?;
    }
    Ok(())
}
