//! Axis-aligned rectangles in the plane and their pixel grids.

use num_complex::Complex64;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum WindowError {
    #[error("bad window: {0}")]
    BadWindow(String),
}

/// `[x0, x1] × [y0, y1]`; pixel rows run top (`y1`) to bottom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Window {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self, WindowError> {
        let w = Window { x0, x1, y0, y1 };
        w.check()?;
        Ok(w)
    }

    pub fn square(center: Complex64, radius: f64) -> Self {
        Window {
            x0: center.re - radius,
            x1: center.re + radius,
            y0: center.im - radius,
            y1: center.im + radius,
        }
    }

    pub fn check(&self) -> Result<(), WindowError> {
        let all_finite = [self.x0, self.x1, self.y0, self.y1]
            .iter()
            .all(|v| v.is_finite());
        if !all_finite || self.x0 >= self.x1 || self.y0 >= self.y1 {
            return Err(WindowError::BadWindow(format!(
                "{},{},{},{}",
                self.x0, self.x1, self.y0, self.y1
            )));
        }
        Ok(())
    }

    pub fn pixel_center(&self, i: usize, j: usize, width: usize, height: usize) -> Complex64 {
        let dx = (self.x1 - self.x0) / width as f64;
        let dy = (self.y1 - self.y0) / height as f64;
        Complex64::new(
            self.x0 + (i as f64 + 0.5) * dx,
            self.y1 - (j as f64 + 0.5) * dy,
        )
    }

    /// Column and row of the pixel containing `z`, if inside.
    pub fn pixel_of(&self, z: Complex64, width: usize, height: usize) -> Option<(usize, usize)> {
        let fx = (z.re - self.x0) / (self.x1 - self.x0) * width as f64;
        let fy = (self.y1 - z.im) / (self.y1 - self.y0) * height as f64;
        if !(fx >= 0.0 && fy >= 0.0) {
            return None;
        }
        let (i, j) = (fx as usize, fy as usize);
        (i < width && j < height).then_some((i, j))
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.x0 && z.re <= self.x1 && z.im >= self.y0 && z.im <= self.y1
    }
}

impl FromStr for Window {
    type Err = WindowError;

    /// Parses `x0,x1,y0,y1`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v: Vec<f64> = s
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| WindowError::BadWindow(s.to_string()))?;
        if v.len() != 4 {
            return Err(WindowError::BadWindow(s.to_string()));
        }
        Window::new(v[0], v[1], v[2], v[3])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pixel_round_trip() {
        let w = Window::new(-2.0, 2.0, -1.0, 1.0).unwrap();
        for (i, j) in [(0, 0), (7, 3), (15, 7)] {
            let z = w.pixel_center(i, j, 16, 8);
            assert_eq!(w.pixel_of(z, 16, 8), Some((i, j)));
        }
        assert_eq!(w.pixel_of(Complex64::new(3.0, 0.0), 16, 8), None);
    }

    #[test]
    fn parse_and_reject() {
        assert!("0,1,0,1".parse::<Window>().is_ok());
        assert!("1,0,0,1".parse::<Window>().is_err());
        assert!("0,1,0".parse::<Window>().is_err());
    }
}
