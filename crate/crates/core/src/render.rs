//! Parameter-plane and dynamical-plane rasters, and the binary PPM writer.

use crate::dynamics::{DynamicsError, FiberMap, GenPolyMap};
use crate::parallel::{self, Execution};
use crate::poly::C64;
use crate::scheme::MappingScheme;
use crate::window::{Window, WindowError};
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error(transparent)]
    BadWindow(#[from] WindowError),
    #[error("resolution must be positive")]
    BadResolution,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Tricorn,
    Top,
    Product,
    Capture,
    CubicSlice,
    RealCubicPlus,
    RealCubicMinus,
    RationalA,
}

impl Family {
    pub const ALL: [Family; 8] = [
        Family::Tricorn,
        Family::Top,
        Family::Product,
        Family::Capture,
        Family::CubicSlice,
        Family::RealCubicPlus,
        Family::RealCubicMinus,
        Family::RationalA,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Tricorn => "tricorn",
            Family::Top => "top",
            Family::Product => "product",
            Family::Capture => "capture",
            Family::CubicSlice => "cubic_slice",
            Family::RealCubicPlus => "real_cubic_plus",
            Family::RealCubicMinus => "real_cubic_minus",
            Family::RationalA => "rational_a",
        }
    }

    pub fn default_window(self) -> Window {
        let (x0, x1, y0, y1) = match self {
            Family::Tricorn => (-2.2, 2.2, -2.2, 2.2),
            Family::Top => (-3.0, 1.5, -3.0, 1.5),
            Family::Product => (-2.5, 0.75, -2.5, 0.75),
            Family::Capture => (-3.0, 2.0, -2.5, 0.75),
            Family::CubicSlice => (-1.5, 1.5, -1.2, 1.2),
            Family::RealCubicPlus => (-1.5, 2.0, -2.5, 2.5),
            Family::RealCubicMinus => (-2.0, 1.5, -2.5, 2.5),
            Family::RationalA => (-3.0, 5.0, -4.0, 4.0),
        };
        Window { x0, x1, y0, y1 }
    }

    /// The polynomial member at a parameter; real two-parameter families read
    /// `(re, im)` as their two real coordinates. `None` for the rational family.
    pub fn poly_map(self, p: C64) -> Option<GenPolyMap> {
        let c = |x: f64| C64::new(x, 0.0);
        let (pairs, coeffs): (&[(u32, usize)], Vec<Vec<C64>>) = match self {
            Family::Tricorn => (&[(1, 1), (1, 0)], vec![vec![p], vec![p.conj()]]),
            Family::Top => (&[(1, 1), (1, 0)], vec![vec![c(p.re)], vec![c(p.im)]]),
            Family::Product => (&[(1, 0), (1, 1)], vec![vec![c(p.re)], vec![c(p.im)]]),
            Family::Capture => (&[(1, 1), (1, 1)], vec![vec![c(p.re)], vec![c(p.im)]]),
            Family::CubicSlice => (&[(2, 0)], vec![vec![p, c(-1.5)]]),
            Family::RealCubicPlus => (&[(2, 0)], vec![vec![c(p.im), c(-3.0 * p.re)]]),
            // −x³ − 3Ax + b conjugated by z ↦ iz is z³ − 3Az − ib.
            Family::RealCubicMinus => (&[(2, 0)], vec![vec![C64::new(0.0, -p.im), c(-3.0 * p.re)]]),
            Family::RationalA => return None,
        };
        let scheme = MappingScheme::from_pairs(pairs).expect("family scheme");
        Some(GenPolyMap::new(scheme, coeffs).expect("family coefficients"))
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PixelClass {
    /// Every critical orbit stays bounded.
    AllBounded,
    /// Some, not all, critical orbits escape.
    PartialEscape,
    AllEscape,
    /// Rational family: `a/2` falls into the superattracting orbit `0 ↔ ∞`.
    Absorbed,
    /// Rational family: anything else.
    Other,
    /// Parameter outside the family (`a = 1`).
    Excluded,
}

impl PixelClass {
    pub fn rgb(self) -> [u8; 3] {
        match self {
            PixelClass::AllBounded | PixelClass::Other => [0, 0, 0],
            PixelClass::PartialEscape => [200, 200, 200],
            PixelClass::AllEscape | PixelClass::Absorbed => [255, 255, 255],
            PixelClass::Excluded => [255, 0, 0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    /// Row-major, top row first.
    pub classes: Vec<PixelClass>,
}

impl RasterImage {
    pub fn filled(width: usize, height: usize, class: PixelClass) -> Self {
        RasterImage {
            width,
            height,
            classes: vec![class; width * height],
        }
    }

    pub fn get(&self, i: usize, j: usize) -> PixelClass {
        self.classes[j * self.width + i]
    }

    pub fn count(&self, class: PixelClass) -> usize {
        self.classes.iter().filter(|&&c| c == class).count()
    }

    pub fn ppm_bytes(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.reserve(3 * self.classes.len());
        for c in &self.classes {
            out.extend_from_slice(&c.rgb());
        }
        out
    }
}

pub fn write_ppm(image: &RasterImage, path: &Path) -> Result<(), RenderError> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(&image.ppm_bytes())?;
    file.flush()?;
    Ok(())
}

/// Number of critical points (with multiplicity) whose orbit leaves the disk
/// of radius `radius` within `max_iter` steps, out of the total.
pub fn escape_count(f: &GenPolyMap, max_iter: usize, radius: f64) -> Result<(u32, u32), DynamicsError> {
    let crit = f.critical_points()?;
    let mut escaped = 0;
    let mut total = 0;
    for cp in crit {
        total += cp.multiplicity;
        if escapes(f, cp.vertex, cp.z, max_iter, radius) {
            escaped += cp.multiplicity;
        }
    }
    Ok((escaped, total))
}

fn escapes(f: &GenPolyMap, s: usize, z: C64, max_iter: usize, radius: f64) -> bool {
    let mut cur = (s, z);
    for _ in 0..=max_iter {
        if !(cur.1.norm() <= radius) {
            return true;
        }
        cur = f.step(cur.0, cur.1);
    }
    false
}

pub fn classify_poly(f: &GenPolyMap, max_iter: usize) -> Result<PixelClass, DynamicsError> {
    let (escaped, total) = escape_count(f, max_iter, f.escape_radius())?;
    Ok(if escaped == 0 {
        PixelClass::AllBounded
    } else if escaped == total {
        PixelClass::AllEscape
    } else {
        PixelClass::PartialEscape
    })
}

/// `f_a(z) = (a − 1)/(z (a − z))`.
pub fn rational_a(a: C64, z: C64) -> C64 {
    (a - 1.0) / (z * (a - z))
}

/// Whether the free critical point `a/2` lands in the basin of `0 ↔ ∞`.
pub fn rational_absorbed(a: C64, max_iter: usize) -> bool {
    const NEAR: f64 = 1e-12;
    let mut z = a / 2.0;
    for _ in 0..=max_iter {
        let r = z.norm();
        if !r.is_finite() || !(r >= NEAR && r <= 1.0 / NEAR) {
            return true;
        }
        z = rational_a(a, z);
    }
    false
}

pub fn classify_parameter(family: Family, p: C64, max_iter: usize) -> Result<PixelClass, DynamicsError> {
    match family.poly_map(p) {
        Some(f) => classify_poly(&f, max_iter),
        None if p == C64::new(1.0, 0.0) => Ok(PixelClass::Excluded),
        None if rational_absorbed(p, max_iter) => Ok(PixelClass::Absorbed),
        None => Ok(PixelClass::Other),
    }
}

fn check_size(width: usize, height: usize) -> Result<(), RenderError> {
    if width == 0 || height == 0 {
        Err(RenderError::BadResolution)
    } else {
        Ok(())
    }
}

/// Row-parallel raster of `class_at(pixel center)`.
fn raster<F>(window: &Window, width: usize, height: usize, exec: Execution, class_at: F) -> Result<RasterImage, RenderError>
where
    F: Fn(C64) -> Result<PixelClass, DynamicsError> + Sync + Send,
{
    window.check()?;
    check_size(width, height)?;
    let rows = parallel::map_range(exec, height, |j| {
        (0..width)
            .map(|i| class_at(window.pixel_center(i, j, width, height)))
            .collect::<Result<Vec<_>, _>>()
    });
    let mut classes = Vec::with_capacity(width * height);
    for row in rows {
        classes.extend(row?);
    }
    Ok(RasterImage {
        width,
        height,
        classes,
    })
}

pub fn render_parameter_plane(
    family: Family,
    window: &Window,
    width: usize,
    height: usize,
    max_iter: usize,
    exec: Execution,
) -> Result<RasterImage, RenderError> {
    let mut img = raster(window, width, height, exec, |p| classify_parameter(family, p, max_iter))?;
    if family == Family::RationalA {
        if let Some((i, j)) = window.pixel_of(C64::new(1.0, 0.0), width, height) {
            img.classes[j * width + i] = PixelClass::Excluded;
        }
    }
    Ok(img)
}

/// Filled Julia set in the fiber over `vertex`: black iff the orbit stays below
/// the escape radius through `max_iter` steps.
pub fn render_dynamical_plane(
    f: &GenPolyMap,
    vertex: usize,
    window: &Window,
    width: usize,
    height: usize,
    max_iter: usize,
    exec: Execution,
) -> Result<RasterImage, RenderError> {
    let radius = f.escape_radius();
    raster(window, width, height, exec, |z| {
        Ok(if escapes(f, vertex, z, max_iter, radius) {
            PixelClass::AllEscape
        } else {
            PixelClass::AllBounded
        })
    })
}
