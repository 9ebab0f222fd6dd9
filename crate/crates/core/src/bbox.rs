use crate::Vec3;

/// Axis-aligned box in 2D or 3D. In 2D the third coordinate is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec3,
    pub hi: Vec3,
    pub dim: usize,
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum BoxError {
    #[error("bounding box dimension must be 2 or 3, got {0}")]
    Dimension(usize),
    #[error("bounding box is empty along axis {axis}: lo={lo} hi={hi}")]
    Empty { axis: usize, lo: f64, hi: f64 },
}

impl BoundingBox {
    pub fn new(lo: &[f64], hi: &[f64]) -> Result<Self, BoxError> {
        let dim = lo.len();
        if !(2..=3).contains(&dim) || hi.len() != dim {
            return Err(BoxError::Dimension(dim));
        }
        let mut l = Vec3::zeros();
        let mut h = Vec3::zeros();
        for i in 0..dim {
            if !(hi[i] > lo[i]) || !lo[i].is_finite() || !hi[i].is_finite() {
                return Err(BoxError::Empty {
                    axis: i,
                    lo: lo[i],
                    hi: hi[i],
                });
            }
            l[i] = lo[i];
            h[i] = hi[i];
        }
        Ok(Self { lo: l, hi: h, dim })
    }

    pub fn unit(dim: usize) -> Self {
        let lo = vec![0.0; dim];
        let hi = vec![1.0; dim];
        Self::new(&lo, &hi).expect("unit box is valid")
    }

    pub fn extent(&self, axis: usize) -> f64 {
        self.hi[axis] - self.lo[axis]
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.extent(i).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn center(&self) -> Vec3 {
        (self.lo + self.hi) * 0.5
    }

    pub fn contains(&self, p: &Vec3) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lo[i] && p[i] <= self.hi[i])
    }

    pub fn contains_box(&self, other: &BoundingBox) -> bool {
        other.dim == self.dim
            && (0..self.dim).all(|i| other.lo[i] >= self.lo[i] && other.hi[i] <= self.hi[i])
    }

    /// Cube centred on this box whose side is the largest extent grown by
    /// `fraction` on each side. Cubic boxes give cubic elements.
    pub fn padded_cube(&self, fraction: f64) -> Self {
        let side = (0..self.dim).map(|i| self.extent(i)).fold(0.0, f64::max) * (1.0 + 2.0 * fraction);
        let c = self.center();
        let mut lo = Vec3::zeros();
        let mut hi = Vec3::zeros();
        for i in 0..self.dim {
            lo[i] = c[i] - 0.5 * side;
            hi[i] = c[i] + 0.5 * side;
        }
        Self {
            lo,
            hi,
            dim: self.dim,
        }
    }

    /// Smallest box containing all `points`.
    pub fn around<'a>(points: impl IntoIterator<Item = &'a Vec3>, dim: usize) -> Option<Self> {
        let mut lo = Vec3::repeat(f64::INFINITY);
        let mut hi = Vec3::repeat(f64::NEG_INFINITY);
        let mut any = false;
        for p in points {
            any = true;
            for i in 0..dim {
                lo[i] = lo[i].min(p[i]);
                hi[i] = hi[i].max(p[i]);
            }
        }
        if !any {
            return None;
        }
        for i in dim..3 {
            lo[i] = 0.0;
            hi[i] = 0.0;
        }
        Some(Self { lo, hi, dim })
    }
}
