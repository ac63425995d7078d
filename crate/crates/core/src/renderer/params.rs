use crate::scalar::Scalar;
use crate::SMOOTH_EPS;

use super::RenderError;

/// Grayscale Blinn-Phong coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lighting<T> {
    /// Unit direction pointing from the surface toward the light.
    pub light_dir: [T; 3],
    pub k_ambient: T,
    pub k_diffuse: T,
    pub k_specular: T,
    pub shininess: T,
}

impl<T: Scalar> Default for Lighting<T> {
    fn default() -> Self {
        Self {
            light_dir: [T::lit(-0.36), T::lit(0.48), T::lit(-0.8)],
            k_ambient: T::lit(0.3),
            k_diffuse: T::lit(0.6),
            k_specular: T::lit(0.1),
            shininess: T::lit(16.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderParams<T> {
    /// Edge steepness.
    pub s: T,
    /// Opacity, in inverse view-depth units.
    pub o: T,
    pub lighting: Lighting<T>,
    pub background_intensity: T,
    /// View depth of the two background triangles. `None` resolves it from the
    /// scene at the start of each render call; see [`resolve_background_depth`](super::resolve_background_depth).
    pub background_depth: Option<T>,
    pub eps: T,
    /// Use only `Π σ(a)` coverage and `max(n·l, 0)`-style lighting.
    pub single_sided: bool,
    /// Optional visibility decay `exp(−|p − centroid|² / τ)`, τ in squared pixels.
    pub distance_decay: Option<T>,
}

impl<T: Scalar> Default for RenderParams<T> {
    fn default() -> Self {
        Self {
            s: T::lit(25.0),
            o: T::lit(25.0),
            lighting: Lighting::default(),
            background_intensity: T::one(),
            background_depth: None,
            eps: T::lit(SMOOTH_EPS),
            single_sided: false,
            distance_decay: None,
        }
    }
}

impl<T: Scalar> RenderParams<T> {
    pub fn with_so(mut self, s: T, o: T) -> Self {
        self.s = s;
        self.o = o;
        self
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        let bad = |what: &str, v: T| Err(RenderError::Params(format!("{what} = {v} out of range")));
        if !(self.s > T::zero() && self.s.is_finite()) {
            return bad("s", self.s);
        }
        if !(self.o > T::zero() && self.o.is_finite()) {
            return bad("o", self.o);
        }
        let l = &self.lighting;
        for (name, v) in [
            ("k_ambient", l.k_ambient),
            ("k_diffuse", l.k_diffuse),
            ("k_specular", l.k_specular),
            ("background_intensity", self.background_intensity),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return bad(name, v);
            }
        }
        if !(l.shininess > T::zero() && l.shininess.is_finite()) {
            return bad("shininess", l.shininess);
        }
        let n = l.light_dir.iter().fold(T::zero(), |a, &c| a + c * c).sqrt();
        if !((n - T::one()).abs() <= T::lit(1e-9).max(T::lit(8.0) * T::epsilon())) {
            return bad("|light_dir|", n);
        }
        if let Some(d) = self.background_depth {
            if !(d > T::zero() && d.is_finite()) {
                return bad("background_depth", d);
            }
        }
        if let Some(t) = self.distance_decay {
            if !(t > T::zero()) {
                return bad("distance_decay", t);
            }
        }
        if !(self.eps > T::zero()) {
            return bad("eps", self.eps);
        }
        Ok(())
    }

    pub fn cast<U: Scalar>(&self) -> RenderParams<U> {
        let c = |x: T| U::lit(x.to_f64_lossy());
        let l = &self.lighting;
        RenderParams {
            s: c(self.s),
            o: c(self.o),
            lighting: Lighting {
                light_dir: l.light_dir.map(c),
                k_ambient: c(l.k_ambient),
                k_diffuse: c(l.k_diffuse),
                k_specular: c(l.k_specular),
                shininess: c(l.shininess),
            },
            background_intensity: c(self.background_intensity),
            background_depth: self.background_depth.map(c),
            eps: c(self.eps),
            single_sided: self.single_sided,
            distance_decay: self.distance_decay.map(c),
        }
    }
}

/// Normalizes a direction, for building [`Lighting::light_dir`] from loose input.
pub fn unit<T: Scalar>(v: [T; 3]) -> [T; 3] {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    v.map(|c| c / n)
}
