//! Radial cutoff `φ` with `φ = r²/2` near the origin and `φ'' <= 1`.
//!
//! `φ''` is prescribed: 1 on `[0, 2]`, a C¹ cubic Hermite profile `q` on
//! `[2, 4]` through `q(2) = 1`, `q(m) = q_m`, `q(4) = 0` with flat knots,
//! and 0 beyond 4. `q_m` is fixed by `∫₂⁴ q = -2`, so `φ'(4) = 0` and `φ` is
//! constant for `r >= 4`.

use alloc::format;

use crate::{Error, Result};

const VERIFY_POINTS: usize = 100_000;
const VERIFY_RMAX: f64 = 6.0;

#[derive(Clone, Debug)]
pub struct CutoffPhi {
    pub dim: usize,
    /// Interior knot of the transition profile.
    pub knot: f64,
    /// `φ''` at the interior knot.
    pub q_knot: f64,
    /// Verified constant in `|φ'|² <= c_phi φ`.
    pub c_phi: f64,
    /// Largest `φ''` seen on the verification mesh.
    pub max_phi2: f64,
    /// `φ(4)`, the plateau value.
    pub plateau: f64,
    seg: [Segment; 2],
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    len: f64,
    y0: f64,
    dy: f64,
    phi_a: f64,
    dphi_a: f64,
}

impl Segment {
    fn t(&self, r: f64) -> f64 {
        (r - self.a) / self.len
    }
    fn q(&self, r: f64) -> f64 {
        let t = self.t(r);
        self.y0 + self.dy * t * t * (3.0 - 2.0 * t)
    }
    fn q1(&self, r: f64) -> f64 {
        let t = self.t(r);
        self.dy * 6.0 * t * (1.0 - t) / self.len
    }
    fn q2(&self, r: f64) -> f64 {
        let t = self.t(r);
        self.dy * (6.0 - 12.0 * t) / (self.len * self.len)
    }
    fn dphi(&self, r: f64) -> f64 {
        let t = self.t(r);
        self.dphi_a + self.len * (self.y0 * t + self.dy * (t * t * t - 0.5 * t * t * t * t))
    }
    fn phi(&self, r: f64) -> f64 {
        let t = self.t(r);
        let l2 = self.len * self.len;
        let t2 = t * t;
        self.phi_a
            + self.dphi_a * (r - self.a)
            + l2 * (0.5 * self.y0 * t2 + self.dy * (0.25 * t2 * t2 - 0.1 * t2 * t2 * t))
    }
}

/// Value and the first four derivatives of `φ` at `r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiJet {
    pub phi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl CutoffPhi {
    fn with_knot(dim: usize, knot: f64) -> Self {
        let q_knot = -2.0 - (knot - 2.0) / 2.0;
        let first = Segment { a: 2.0, len: knot - 2.0, y0: 1.0, dy: q_knot - 1.0, phi_a: 2.0, dphi_a: 2.0 };
        let end = knot;
        let second =
            Segment { a: end, len: 4.0 - end, y0: q_knot, dy: -q_knot, phi_a: first.phi(end), dphi_a: first.dphi(end) };
        let plateau = second.phi(4.0);
        CutoffPhi { dim, knot, q_knot, c_phi: 0.0, max_phi2: 0.0, plateau, seg: [first, second] }
    }

    pub fn jet(&self, r: f64) -> PhiJet {
        let r = r.abs();
        if r <= 2.0 {
            PhiJet { phi: 0.5 * r * r, d1: r, d2: 1.0, d3: 0.0, d4: 0.0 }
        } else if r >= 4.0 {
            PhiJet { phi: self.plateau, d1: 0.0, d2: 0.0, d3: 0.0, d4: 0.0 }
        } else {
            let s = if r < self.knot { &self.seg[0] } else { &self.seg[1] };
            PhiJet { phi: s.phi(r), d1: s.dphi(r), d2: s.q(r), d3: s.q1(r), d4: s.q2(r) }
        }
    }

    pub fn phi(&self, r: f64) -> f64 {
        self.jet(r).phi
    }

    pub fn dphi(&self, r: f64) -> f64 {
        self.jet(r).d1
    }

    pub fn d2phi(&self, r: f64) -> f64 {
        self.jet(r).d2
    }

    /// `Δφ = φ'' + (N-1) φ'/r`.
    pub fn lap(&self, r: f64) -> f64 {
        if r <= 2.0 {
            return self.dim as f64;
        }
        let j = self.jet(r);
        j.d2 + (self.dim as f64 - 1.0) * j.d1 / r
    }

    /// `Δ²φ = ψ'' + (N-1) ψ'/r` with `ψ = Δφ`.
    pub fn bilap(&self, r: f64) -> f64 {
        if r <= 2.0 {
            return 0.0;
        }
        let j = self.jet(r);
        let k = self.dim as f64 - 1.0;
        let psi1 = j.d3 + k * (j.d2 / r - j.d1 / (r * r));
        let psi2 = j.d4 + k * (j.d3 / r - 2.0 * j.d2 / (r * r) + 2.0 * j.d1 / (r * r * r));
        psi2 + k * psi1 / r
    }

    fn verify(mut self) -> core::result::Result<Self, (&'static str, f64)> {
        let mut c: f64 = 0.0;
        let mut max2 = f64::NEG_INFINITY;
        for i in 0..=VERIFY_POINTS {
            let r = VERIFY_RMAX * i as f64 / VERIFY_POINTS as f64;
            let j = self.jet(r);
            if j.phi < 0.0 {
                return Err(("phi >= 0", r));
            }
            if j.d2 > 1.0 + 1e-9 {
                return Err(("phi'' <= 1", r));
            }
            max2 = max2.max(j.d2);
            if j.phi > 1e-14 {
                c = c.max(j.d1 * j.d1 / j.phi);
            } else if j.d1.abs() > 1e-7 {
                return Err(("|phi'|^2 <= c phi", r));
            }
            if r <= 2.0 && (j.phi - 0.5 * r * r).abs() > 0.0 {
                return Err(("phi = r^2/2 on [0,2]", r));
            }
            if r >= 4.0 && (j.d1 != 0.0 || j.d2 != 0.0) {
                return Err(("phi' = 0 on [4,inf)", r));
            }
        }
        if !c.is_finite() {
            return Err(("finite c_phi", 0.0));
        }
        self.c_phi = c * (1.0 + 1e-9);
        self.max_phi2 = max2;
        Ok(self)
    }
}

/// Build and verify the cutoff for dimension `N`.
pub fn build_cutoff(dim: usize) -> Result<CutoffPhi> {
    if dim < 3 {
        return Err(Error::CutoffConstructionFailure(format!("dimension {dim} below 3")));
    }
    let mut last = ("none", 0.0);
    // first pass at the midpoint knot, then a scan over interior knots
    let knots = core::iter::once(3.0).chain((1..40).map(|i| 2.0 + 2.0 * i as f64 / 40.0));
    for knot in knots {
        match CutoffPhi::with_knot(dim, knot).verify() {
            Ok(c) => return Ok(c),
            Err(e) => last = e,
        }
    }
    Err(Error::CutoffConstructionFailure(format!("property {} fails at r = {}", last.0, last.1)))
}
