//! Sampled radial space-time fields on tensor grids.

use std::io::Write;
use std::path::Path;

use ndarray::{Array2, Zip};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldOrigin {
    Linear,
    Picard,
    FiniteDifference,
    Synthetic,
}

/// A strictly increasing, non-negative sample axis.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    points: Vec<f64>,
    /// `(start, step)` when the axis is uniform, for O(1) lookup.
    uniform: Option<(f64, f64)>,
}

impl Axis {
    pub fn from_points(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("grid axis is empty".into()));
        }
        if points.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::Domain("grid points must be finite and non-negative".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("grid points must be strictly increasing".into()));
        }
        let uniform = detect_uniform(&points);
        Ok(Self { points, uniform })
    }

    /// `count` points from `start` to `end` inclusive.
    pub fn uniform(start: f64, end: f64, count: usize) -> Result<Self> {
        if count < 2 || !(end > start) {
            return Err(Error::Domain(format!(
                "uniform axis needs end > start and at least two points (got [{start}, {end}], {count})"
            )));
        }
        let step = (end - start) / (count - 1) as f64;
        let points = (0..count).map(|i| start + step * i as f64).collect();
        Self::from_points(points)
    }

    /// Points `start, start + h, ...` up to `end` (included when it is a multiple).
    pub fn with_step(start: f64, end: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::Domain(format!("grid step must be positive, got {h}")));
        }
        let count = ((end - start) / h + 1e-9).floor() as usize + 1;
        let points = (0..count).map(|i| start + h * i as f64).collect();
        Self::from_points(points)
    }

    /// Non-uniform axis on `[0, end]` with spacing `h_fine` within `width` of
    /// any focus point, growing linearly to `h_coarse` away from them.
    pub fn graded(end: f64, h_fine: f64, h_coarse: f64, focus: &[f64], width: f64) -> Result<Self> {
        if !(h_fine > 0.0 && h_coarse >= h_fine && width > 0.0 && end > 0.0) {
            return Err(Error::Domain("graded axis needs 0 < h_fine <= h_coarse, width > 0".into()));
        }
        let spacing = |x: f64| {
            let dist = focus
                .iter()
                .map(|f| (x - f).abs())
                .fold(f64::INFINITY, f64::min);
            let frac = if dist.is_finite() { (dist / width).min(1.0) } else { 1.0 };
            h_fine + (h_coarse - h_fine) * frac
        };
        let mut points = vec![0.0];
        let mut x = 0.0;
        while x < end {
            x = (x + spacing(x)).min(end);
            if end - x < 0.5 * h_fine {
                x = end;
            }
            points.push(x);
        }
        points.dedup();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.points[0]
    }

    pub fn last(&self) -> f64 {
        self.points[self.points.len() - 1]
    }

    pub fn step(&self) -> Option<f64> {
        self.uniform.map(|(_, h)| h)
    }

    /// Cell index `i` and weight `w` with `x = (1-w) x_i + w x_{i+1}`.
    pub fn locate(&self, x: f64) -> Option<(usize, f64)> {
        let n = self.points.len();
        let (lo, hi) = (self.first(), self.last());
        let slack = 1e-12 * hi.abs().max(1.0);
        if !(x >= lo - slack && x <= hi + slack) {
            return None;
        }
        if n == 1 {
            return Some((0, 0.0));
        }
        let x = x.clamp(lo, hi);
        let i = match self.uniform {
            Some((start, step)) => (((x - start) / step).floor() as usize).min(n - 2),
            None => self.points.partition_point(|p| *p <= x).saturating_sub(1).min(n - 2),
        };
        let (a, b) = (self.points[i], self.points[i + 1]);
        Some((i, ((x - a) / (b - a)).clamp(0.0, 1.0)))
    }

    /// Index of a grid point within `tol` of `x`.
    pub fn index_of(&self, x: f64, tol: f64) -> Option<usize> {
        let (i, w) = self.locate(x)?;
        let cand = if w < 0.5 { i } else { (i + 1).min(self.points.len() - 1) };
        ((self.points[cand] - x).abs() <= tol).then_some(cand)
    }
}

fn detect_uniform(points: &[f64]) -> Option<(f64, f64)> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len();
    let step = (points[n - 1] - points[0]) / (n - 1) as f64;
    let uniform = points
        .iter()
        .enumerate()
        .all(|(i, x)| (x - (points[0] + step * i as f64)).abs() <= 1e-9 * step);
    uniform.then_some((points[0], step))
}

/// `u(t, r)` and `∂_r(r u)(t, r)` on a tensor grid `t × r`, `r >= 0`.
/// The field is even in `r`: values at `-r` are those at `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpaceTimeField {
    t: Axis,
    r: Axis,
    u: Array2<f64>,
    dr_ru: Array2<f64>,
    origin: FieldOrigin,
}

impl SpaceTimeField {
    pub fn new(t: Axis, r: Axis, u: Array2<f64>, dr_ru: Array2<f64>, origin: FieldOrigin) -> Result<Self> {
        let shape = [t.len(), r.len()];
        if u.shape() != shape || dr_ru.shape() != shape {
            return Err(Error::Domain(format!(
                "field arrays have shape {:?}/{:?}, grid is {shape:?}",
                u.shape(),
                dr_ru.shape()
            )));
        }
        if u.iter().chain(dr_ru.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("field contains non-finite values".into()));
        }
        Ok(Self {
            t,
            r,
            u,
            dr_ru,
            origin,
        })
    }

    pub fn zeros(t: Axis, r: Axis, origin: FieldOrigin) -> Self {
        let shape = (t.len(), r.len());
        Self {
            t,
            r,
            u: Array2::zeros(shape),
            dr_ru: Array2::zeros(shape),
            origin,
        }
    }

    /// Fill every cell independently (in parallel) from `f(t, r) -> (u, dr_ru)`.
    pub fn try_from_fn<F>(t: Axis, r: Axis, origin: FieldOrigin, f: F) -> Result<Self>
    where
        F: Fn(f64, f64) -> Result<(f64, f64)> + Sync,
    {
        let (nt, nr) = (t.len(), r.len());
        let cells: Vec<(f64, f64)> = (0..nt * nr)
            .into_par_iter()
            .map(|k| f(t.points[k / nr], r.points[k % nr]))
            .collect::<Result<_>>()?;
        let u = Array2::from_shape_fn((nt, nr), |(i, j)| cells[i * nr + j].0);
        let dr_ru = Array2::from_shape_fn((nt, nr), |(i, j)| cells[i * nr + j].1);
        Self::new(t, r, u, dr_ru, origin)
    }

    pub fn t_axis(&self) -> &Axis {
        &self.t
    }

    pub fn r_axis(&self) -> &Axis {
        &self.r
    }

    pub fn t(&self) -> &[f64] {
        self.t.points()
    }

    pub fn r(&self) -> &[f64] {
        self.r.points()
    }

    pub fn u(&self) -> &Array2<f64> {
        &self.u
    }

    pub fn dr_ru(&self) -> &Array2<f64> {
        &self.dr_ru
    }

    pub fn origin(&self) -> FieldOrigin {
        self.origin
    }

    pub fn into_parts(self) -> (Axis, Axis, Array2<f64>, Array2<f64>) {
        (self.t, self.r, self.u, self.dr_ru)
    }

    fn bilinear(&self, data: &Array2<f64>, t: f64, r: f64) -> Result<f64> {
        let s = r.abs();
        let (i, wt) = self.t.locate(t).ok_or_else(|| {
            Error::Domain(format!("t={t} outside field range [{}, {}]", self.t.first(), self.t.last()))
        })?;
        let (j, wr) = self.r.locate(s).ok_or_else(|| {
            Error::Domain(format!("r={s} outside field range [{}, {}]", self.r.first(), self.r.last()))
        })?;
        let i1 = (i + 1).min(self.t.len() - 1);
        let j1 = (j + 1).min(self.r.len() - 1);
        let lo = (1.0 - wr) * data[[i, j]] + wr * data[[i, j1]];
        let hi = (1.0 - wr) * data[[i1, j]] + wr * data[[i1, j1]];
        Ok((1.0 - wt) * lo + wt * hi)
    }

    /// Bilinear interpolation of `u` at `(t, |r|)`.
    pub fn u_at(&self, t: f64, r: f64) -> Result<f64> {
        self.bilinear(&self.u, t, r)
    }

    /// Bilinear interpolation of `∂_r(r u)` at `(t, |r|)`; it is even in `r`
    /// because `r u` is odd.
    pub fn dr_ru_at(&self, t: f64, r: f64) -> Result<f64> {
        self.bilinear(&self.dr_ru, t, r)
    }

    /// Resample onto another tensor grid by bilinear interpolation.
    pub fn resample(&self, t: &Axis, r: &Axis) -> Result<SpaceTimeField> {
        SpaceTimeField::try_from_fn(t.clone(), r.clone(), self.origin, |tt, rr| {
            Ok((self.u_at(tt, rr)?, self.dr_ru_at(tt, rr)?))
        })
    }

    /// Keep the columns with `r <= r_max`.
    pub fn crop_r(&self, r_max: f64) -> Result<SpaceTimeField> {
        let keep = self.r.points().partition_point(|r| *r <= r_max * (1.0 + 1e-14));
        if keep == 0 {
            return Err(Error::Domain(format!("cropping at r={r_max} leaves no columns")));
        }
        let r = Axis::from_points(self.r.points()[..keep].to_vec())?;
        let u = self.u.slice(ndarray::s![.., ..keep]).to_owned();
        let dr_ru = self.dr_ru.slice(ndarray::s![.., ..keep]).to_owned();
        SpaceTimeField::new(self.t.clone(), r, u, dr_ru, self.origin)
    }

    /// Keep the rows with `t <= t_max`.
    pub fn crop_t(&self, t_max: f64) -> Result<SpaceTimeField> {
        let keep = self.t.points().partition_point(|t| *t <= t_max * (1.0 + 1e-14));
        if keep == 0 {
            return Err(Error::Domain(format!("cropping at t={t_max} leaves no rows")));
        }
        let t = Axis::from_points(self.t.points()[..keep].to_vec())?;
        let u = self.u.slice(ndarray::s![..keep, ..]).to_owned();
        let dr_ru = self.dr_ru.slice(ndarray::s![..keep, ..]).to_owned();
        SpaceTimeField::new(t, self.r.clone(), u, dr_ru, self.origin)
    }

    /// `self - other` on a shared grid.
    pub fn difference(&self, other: &SpaceTimeField) -> Result<SpaceTimeField> {
        if self.t != other.t || self.r != other.r {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        SpaceTimeField::new(
            self.t.clone(),
            self.r.clone(),
            &self.u - &other.u,
            &self.dr_ru - &other.dr_ru,
            FieldOrigin::Synthetic,
        )
    }

    /// `sup|u - v| / sup|v|` over the shared grid, with `v = reference`.
    pub fn relative_sup_diff(&self, reference: &SpaceTimeField) -> Result<f64> {
        if self.t != reference.t || self.r != reference.r {
            return Err(Error::Domain("fields live on different grids".into()));
        }
        let mut diff: f64 = 0.0;
        let mut scale: f64 = 0.0;
        Zip::from(&self.u).and(&reference.u).for_each(|a, b| {
            diff = diff.max((a - b).abs());
            scale = scale.max(b.abs());
        });
        if scale == 0.0 {
            return Ok(if diff == 0.0 { 0.0 } else { f64::INFINITY });
        }
        Ok(diff / scale)
    }

    /// Multiply each row by `weight(t)`.
    pub fn scale_rows<F: Fn(f64) -> f64>(&self, weight: F) -> SpaceTimeField {
        let mut out = self.clone();
        for (i, &t) in self.t.points().iter().enumerate() {
            let w = weight(t);
            out.u.row_mut(i).mapv_inplace(|v| v * w);
            out.dr_ru.row_mut(i).mapv_inplace(|v| v * w);
        }
        out.origin = FieldOrigin::Synthetic;
        out
    }

    /// CSV dump with columns `t,r,u,dr_ru`, rows in `(t, r)` lexicographic order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,r,u,dr_ru")?;
        for (i, t) in self.t.points().iter().enumerate() {
            for (j, r) in self.r.points().iter().enumerate() {
                // adding 0.0 turns -0 into 0
                writeln!(w, "{t:e},{r:e},{:e},{:e}", self.u[[i, j]] + 0.0, self.dr_ru[[i, j]] + 0.0)?;
            }
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut buf = std::io::BufWriter::new(file);
        self.write_csv(&mut buf)?;
        buf.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn axis_validation() {
        assert!(Axis::from_points(vec![0.0, 1.0, 1.0]).is_err());
        assert!(Axis::from_points(vec![-1.0, 1.0]).is_err());
        let a = Axis::uniform(0.0, 10.0, 11).unwrap();
        assert_eq!(a.step(), Some(1.0));
        assert_eq!(a.locate(3.25), Some((3, 0.25)));
        assert_eq!(a.locate(10.0), Some((9, 1.0)));
        assert_eq!(a.locate(10.5), None);
        assert_eq!(a.index_of(7.0, 1e-12), Some(7));
        let b = Axis::with_step(0.0, 1.0, 0.25).unwrap();
        assert_eq!(b.len(), 5);
    }

    #[test]
    fn graded_axis_is_finer_near_focus() {
        let a = Axis::graded(100.0, 0.1, 2.0, &[50.0], 10.0).unwrap();
        assert_eq!(a.first(), 0.0);
        assert_eq!(a.last(), 100.0);
        let (i, _) = a.locate(50.0).unwrap();
        let pts = a.points();
        assert!(pts[i + 1] - pts[i] <= 0.2);
        assert!(pts[1] - pts[0] > 1.5);
        assert!(a.step().is_none());
        assert!(a.locate(73.3).is_some());
    }

    #[test]
    fn bilinear_is_exact_for_bilinear_data() {
        let t = Axis::uniform(0.0, 2.0, 5).unwrap();
        let r = Axis::from_points(vec![0.0, 0.3, 1.0, 2.5]).unwrap();
        let f = SpaceTimeField::try_from_fn(t, r, FieldOrigin::Synthetic, |t, r| Ok((1.0 + 2.0 * t + 3.0 * r + t * r, t))).unwrap();
        assert_abs_diff_eq!(f.u_at(1.3, 0.7).unwrap(), 1.0 + 2.6 + 2.1 + 0.91, epsilon = 1e-12);
        assert_abs_diff_eq!(f.u_at(1.3, -0.7).unwrap(), f.u_at(1.3, 0.7).unwrap());
        assert!(matches!(f.u_at(2.5, 0.0), Err(Error::Domain(_))));
        assert!(matches!(f.u_at(1.0, 3.0), Err(Error::Domain(_))));
    }

    #[test]
    fn csv_layout() {
        let t = Axis::uniform(0.0, 1.0, 2).unwrap();
        let r = Axis::uniform(0.0, 1.0, 2).unwrap();
        let f = SpaceTimeField::zeros(t, r, FieldOrigin::Linear);
        let mut out = Vec::new();
        f.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("t,r,u,dr_ru\n"));
    }
}
