use crate::autodiff::{NodeRef, Tape};
use crate::scalar::Scalar;

/// Row-major grayscale image.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn filled(width: usize, height: usize, value: T) -> Self {
        Self {
            width,
            height,
            data: vec![value; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let data = (0..height).flat_map(|y| (0..width).map(move |x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Self { width, height, data }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.width + x]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    /// Mean absolute difference. Panics on a size mismatch.
    pub fn mean_abs_diff(&self, other: &Self) -> T {
        assert_eq!((self.width, self.height), (other.width, other.height), "image size mismatch");
        let s = self
            .data
            .iter()
            .zip(&other.data)
            .fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
        s / T::lit(self.data.len().max(1) as f64)
    }

    pub fn cast<U: Scalar>(&self) -> Image<U> {
        Image {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|&v| U::lit(v.to_f64_lossy())).collect(),
        }
    }
}

/// A rendered image whose pixels live on a tape.
#[derive(Debug, Clone, PartialEq)]
pub struct TapeImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<NodeRef>,
}

impl TapeImage {
    pub fn values<T: Scalar>(&self, tape: &Tape<T>) -> Image<T> {
        Image {
            width: self.width,
            height: self.height,
            data: tape.values(&self.pixels),
        }
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> NodeRef {
        self.pixels[y * self.width + x]
    }
}
