//! Equal-area Ziggurat tables for monotone densities on `[0, inf)`.
//!
//! Layer 0 is the base strip: the rectangle `[0, r] x [0, f(r)]` plus the
//! tail beyond `r`, drawn as a virtual rectangle of width `x[0] = v / f(r)`.
//! Layers `1..LAYERS` are rectangles `[0, x[i]] x [f(x[i]), f(x[i+1])]`, all
//! of area `v`, with `x[1] = r` and `x[LAYERS] = 0`.

use std::sync::OnceLock;

use crate::error::{ArrayError, Result};

pub const LAYERS: usize = 128;

/// Unnormalized density the tables are built for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Density {
    /// `exp(-x^2 / 2)`, sampled symmetrically.
    Normal,
    /// `exp(-x)`.
    Exponential,
}

impl Density {
    pub fn pdf(self, x: f64) -> f64 {
        match self {
            Density::Normal => (-0.5 * x * x).exp(),
            Density::Exponential => (-x).exp(),
        }
    }

    pub fn inverse_pdf(self, y: f64) -> f64 {
        match self {
            Density::Normal => (-2.0 * y.ln()).sqrt(),
            Density::Exponential => -y.ln(),
        }
    }

    /// Mass beyond `r`.
    pub fn tail_mass(self, r: f64) -> f64 {
        match self {
            Density::Normal => (std::f64::consts::PI / 2.0).sqrt() * libm::erfc(r / std::f64::consts::SQRT_2),
            Density::Exponential => (-r).exp(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ZigguratTable {
    pub density: Density,
    /// Start of the tail.
    pub r: f64,
    /// Common layer area.
    pub v: f64,
    /// Layer right edges, `x[0] = v / f(r)`, `x[1] = r`, `x[LAYERS] = 0`.
    pub x: [f64; LAYERS + 1],
    /// `f(x[i])`, with `f[0] = 0` standing in for the unbounded base.
    pub f: [f64; LAYERS + 1],
}

/// Top of the stack built from a tail start `r`, minus the density peak.
///
/// Positive when the layers overshoot the peak (r too small), negative when
/// they fall short.
fn closure(d: Density, r: f64) -> f64 {
    let v = r * d.pdf(r) + d.tail_mass(r);
    let mut x = r;
    for _ in 0..LAYERS - 2 {
        let y = d.pdf(x) + v / x;
        if y >= 1.0 {
            return 1.0;
        }
        x = d.inverse_pdf(y);
    }
    d.pdf(x) + v / x - 1.0
}

/// Solves for the tail start by bisection and fills the layer tables.
pub fn build_ziggurat(density: Density) -> Result<ZigguratTable> {
    let (mut lo, mut hi) = (1.0f64, 12.0f64);
    if !(closure(density, lo) > 0.0 && closure(density, hi) < 0.0) {
        return Err(ArrayError::Init(format!("tail start for {density:?} is not bracketed")));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if closure(density, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let r = if closure(density, lo).abs() <= closure(density, hi).abs() { lo } else { hi };
    if closure(density, r).abs() > 1e-12 {
        return Err(ArrayError::Init(format!("{density:?} ziggurat did not close")));
    }

    let v = r * density.pdf(r) + density.tail_mass(r);
    let mut x = [0.0; LAYERS + 1];
    let mut f = [0.0; LAYERS + 1];
    x[0] = v / density.pdf(r);
    x[1] = r;
    for i in 1..LAYERS - 1 {
        x[i + 1] = density.inverse_pdf(density.pdf(x[i]) + v / x[i]);
    }
    x[LAYERS] = 0.0;
    for i in 1..=LAYERS {
        f[i] = density.pdf(x[i]);
    }
    Ok(ZigguratTable { density, r, v, x, f })
}

impl ZigguratTable {
    /// How far the top layer misses the density peak.
    pub fn closure_residual(&self) -> f64 {
        closure(self.density, self.r)
    }

    /// Area of every layer, base strip included.
    pub fn layer_areas(&self) -> Vec<f64> {
        let mut areas = vec![self.r * self.f[1] + self.density.tail_mass(self.r)];
        for i in 1..LAYERS {
            areas.push(self.x[i] * (self.f[i + 1] - self.f[i]));
        }
        areas
    }
}

pub fn normal_table() -> &'static ZigguratTable {
    static T: OnceLock<ZigguratTable> = OnceLock::new();
    T.get_or_init(|| build_ziggurat(Density::Normal).expect("normal ziggurat"))
}

pub fn exponential_table() -> &'static ZigguratTable {
    static T: OnceLock<ZigguratTable> = OnceLock::new();
    T.get_or_init(|| build_ziggurat(Density::Exponential).expect("exponential ziggurat"))
}
