//! Full-dimensional Monte Carlo for the potential and the bilinear form.
//!
//! Samples live in `R^d` itself (`d <= 3`), so agreement with the radial
//! quadrature in [`crate::operator`] is an independent check of the
//! reduction. The proposal is an equal mixture of a radial density fitted
//! to the support and decay of the profile and a density concentrated near
//! the evaluation point with local exponent `-λ`.

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, RieszError};
use crate::exponents::RieszParams;
use crate::operator::asymptotic_exponents;
use crate::profile::RadialProfile;
use crate::special::sphere_area;

const BLOCK: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_err: f64,
    pub n_samples: u64,
    pub seed: u64,
}

impl McEstimate {
    /// `|value - reference| / std_err` (0 when both agree exactly).
    pub fn z_score(&self, reference: f64) -> f64 {
        let diff = (self.value - reference).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_err
        }
    }
}

fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `(0, 1]`, safe for logarithms and negative powers.
fn unit_open(rng: &mut ChaCha8Rng) -> f64 {
    1.0 - rng.random::<f64>()
}

fn random_direction(d: usize, rng: &mut ChaCha8Rng) -> [f64; 3] {
    match d {
        1 => [if rng.random::<bool>() { 1.0 } else { -1.0 }, 0.0, 0.0],
        2 => {
            let t = std::f64::consts::TAU * rng.random::<f64>();
            [t.cos(), t.sin(), 0.0]
        }
        _ => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let t = std::f64::consts::TAU * rng.random::<f64>();
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * t.cos(), s * t.sin(), z]
        }
    }
}

fn norm(v: &[f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Density on `ρ = ln r` over one interval, uniform when bounded and
/// exponential toward unbounded ends.
#[derive(Debug, Clone, Copy)]
enum LogDensity {
    Uniform { a: f64, b: f64 },
    /// `rate * exp(rate (ρ - b))` on `(-∞, b]`.
    Head { b: f64, rate: f64 },
    /// `rate * exp(-rate (ρ - a))` on `[a, ∞)`.
    Tail { a: f64, rate: f64 },
    /// Half `Head` below 0, half `Tail` above 0.
    Both { head: f64, tail: f64 },
}

impl LogDensity {
    fn new(a: f64, b: f64, head: f64, tail: f64) -> Self {
        match (a.is_finite(), b.is_finite()) {
            (true, true) => LogDensity::Uniform { a, b },
            (false, true) => LogDensity::Head { b, rate: head },
            (true, false) => LogDensity::Tail { a, rate: tail },
            (false, false) => LogDensity::Both { head, tail },
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        let u = unit_open(rng);
        match *self {
            LogDensity::Uniform { a, b } => a + (b - a) * rng.random::<f64>(),
            LogDensity::Head { b, rate } => b + u.ln() / rate,
            LogDensity::Tail { a, rate } => a - u.ln() / rate,
            LogDensity::Both { head, tail } => {
                if rng.random::<bool>() {
                    u.ln() / head
                } else {
                    -u.ln() / tail
                }
            }
        }
    }

    fn density(&self, rho: f64) -> f64 {
        match *self {
            LogDensity::Uniform { a, b } => {
                if rho > a && rho < b {
                    1.0 / (b - a)
                } else {
                    0.0
                }
            }
            LogDensity::Head { b, rate } => {
                if rho < b {
                    rate * (rate * (rho - b)).exp()
                } else {
                    0.0
                }
            }
            LogDensity::Tail { a, rate } => {
                if rho > a {
                    rate * (-rate * (rho - a)).exp()
                } else {
                    0.0
                }
            }
            LogDensity::Both { head, tail } => {
                if rho < 0.0 {
                    0.5 * head * (head * rho).exp()
                } else {
                    0.5 * tail * (-tail * rho).exp()
                }
            }
        }
    }
}

/// Radial proposal over the pieces of a profile, equal weight per piece.
struct RadialSampler {
    d: usize,
    omega: f64,
    parts: Vec<(f64, f64, LogDensity)>,
}

impl RadialSampler {
    /// `head_rate(piece)` and `tail_rate(piece)` give the exponential decay
    /// in `ln r` of the target integrand at each unbounded end.
    fn new(d: usize, f: &RadialProfile, rates: impl Fn(usize) -> (f64, f64)) -> Result<Self> {
        let mut parts = Vec::new();
        for (i, pc) in f.pieces().iter().enumerate() {
            if pc.coef == 0.0 {
                continue;
            }
            let a = if pc.r_lo == 0.0 { f64::NEG_INFINITY } else { pc.r_lo.ln() };
            let b = if pc.r_hi.is_infinite() { f64::INFINITY } else { pc.r_hi.ln() };
            let (mut h, mut t) = rates(i);
            // log factors fatten the tails; undershoot the rate to keep the
            // variance finite
            if pc.log_power > 0 {
                h *= 0.75;
                t *= 0.75;
            }
            if (!a.is_finite() && !(h > 0.0)) || (!b.is_finite() && !(t > 0.0)) {
                return Err(RieszError::InvalidProfile(format!(
                    "piece {i} of '{}' is not integrable against the kernel",
                    f.label()
                )));
            }
            parts.push((a, b, LogDensity::new(a, b, h, t)));
        }
        Ok(RadialSampler { d, omega: sphere_area(d), parts })
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 3] {
        let k = if self.parts.len() == 1 { 0 } else { (rng.random::<f64>() * self.parts.len() as f64) as usize };
        let k = k.min(self.parts.len() - 1);
        let r = self.parts[k].2.sample(rng).exp();
        let dir = random_direction(self.d, rng);
        [r * dir[0], r * dir[1], r * dir[2]]
    }

    /// Density with respect to Lebesgue measure on `R^d`.
    fn density(&self, y: &[f64; 3]) -> f64 {
        let r = norm(y);
        if r == 0.0 {
            return 0.0;
        }
        let rho = r.ln();
        let n = self.parts.len() as f64;
        let mut s = 0.0;
        for (a, b, dens) in &self.parts {
            if rho > *a && rho < *b {
                s += dens.density(rho);
            }
        }
        s / n / (self.omega * r.powi(self.d as i32))
    }
}

/// Mixture sampler for `y ↦ f(y) |y|^{-α} |x - y|^{-λ}` at a fixed `x`.
struct PointSampler<'a> {
    params: &'a RieszParams,
    f: &'a RadialProfile,
    radial: RadialSampler,
    x: [f64; 3],
    r0: f64,
    near_norm: f64,
}

impl<'a> PointSampler<'a> {
    fn new(params: &'a RieszParams, f: &'a RadialProfile, x_norm: f64) -> Result<Self> {
        let (d, a, l) = (params.dim(), params.alpha(), params.lambda());
        let radial = RadialSampler::new(params.d(), f, |i| {
            let b = f.pieces()[i].power;
            (b + d - a, -(b + d - a - l))
        })?;
        let dl = d - l;
        let r0 = x_norm;
        Ok(PointSampler {
            params,
            f,
            radial,
            x: [x_norm, 0.0, 0.0],
            r0,
            near_norm: dl / (sphere_area(params.d()) * r0.powf(dl)),
        })
    }

    fn near_density(&self, y: &[f64; 3]) -> f64 {
        let t = norm(&[y[0] - self.x[0], y[1] - self.x[1], y[2] - self.x[2]]);
        if t < self.r0 && t > 0.0 {
            self.near_norm * t.powf(-self.params.lambda())
        } else {
            0.0
        }
    }

    /// One importance weight for `∫ f(y) |y|^{-α} |x - y|^{-λ} dy`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> f64 {
        let d = self.params.d();
        let y = if rng.random::<bool>() {
            self.radial.sample(rng)
        } else {
            let t = self.r0 * unit_open(rng).powf(1.0 / (self.params.dim() - self.params.lambda()));
            let dir = random_direction(d, rng);
            [self.x[0] + t * dir[0], self.x[1] + t * dir[1], self.x[2] + t * dir[2]]
        };
        let ry = norm(&y);
        let fy = self.f.value(ry);
        if fy == 0.0 {
            return 0.0;
        }
        let dist = norm(&[y[0] - self.x[0], y[1] - self.x[1], y[2] - self.x[2]]);
        let target = fy * ry.powf(-self.params.alpha()) * dist.powf(-self.params.lambda());
        let q = 0.5 * self.radial.density(&y) + 0.5 * self.near_density(&y);
        target / q
    }
}

/// Run `n` draws in fixed-size blocks with one RNG stream per block.
fn run_blocks(n: u64, seed: u64, draw: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> McEstimate {
    let blocks = n.div_ceil(BLOCK as u64);
    let partial: Vec<(f64, f64)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, b);
            let count = (n - b * BLOCK as u64).min(BLOCK as u64);
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..count {
                let w = draw(&mut rng);
                s += w;
                s2 += w * w;
            }
            (s, s2)
        })
        .collect();
    let (s, s2) = partial.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let nf = n as f64;
    let mean = s / nf;
    let var = (s2 / nf - mean * mean).max(0.0) * nf / (nf - 1.0);
    McEstimate { value: mean, std_err: (var / nf).sqrt(), n_samples: n, seed }
}

fn check_inputs(params: &RieszParams, n: u64, profiles: &[&RadialProfile]) -> Result<()> {
    if params.d() > 3 {
        return Err(RieszError::UnsupportedDimension(params.d()));
    }
    if n < 2 {
        return Err(RieszError::Config("Monte Carlo needs at least 2 samples".into()));
    }
    for f in profiles {
        if !f.is_nonnegative() {
            return Err(RieszError::InvalidProfile(format!("'{}' must be nonnegative for the oracle", f.label())));
        }
    }
    Ok(())
}

fn zero_estimate(n: u64, seed: u64) -> McEstimate {
    McEstimate { value: 0.0, std_err: 0.0, n_samples: n, seed }
}

/// Estimate of `|x|^{-β} ∫ f(y) |y|^{-α} |x - y|^{-λ} dy` at `|x| = x_norm`.
pub fn potential_at_point_mc(params: &RieszParams, f: &RadialProfile, x_norm: f64, n: u64, seed: u64) -> Result<McEstimate> {
    check_inputs(params, n, &[f])?;
    if !(x_norm > 0.0 && x_norm.is_finite()) {
        return Err(RieszError::Config(format!("radius must be positive, got {x_norm}")));
    }
    if f.is_zero() {
        return Ok(zero_estimate(n, seed));
    }
    let sampler = PointSampler::new(params, f, x_norm)?;
    let est = run_blocks(n, seed, |rng| sampler.draw(rng));
    let w = x_norm.powf(-params.beta());
    Ok(McEstimate { value: est.value * w, std_err: est.std_err * w, ..est })
}

/// Estimate of `B(f, g)`: `x` from a radial proposal fitted to `g` and the
/// potential, then one inner draw of `y` at that `x`.
pub fn bilinear_mc(params: &RieszParams, f: &RadialProfile, g: &RadialProfile, n: u64, seed: u64) -> Result<McEstimate> {
    check_inputs(params, n, &[f, g])?;
    if f.is_zero() || g.is_zero() {
        return Ok(zero_estimate(n, seed));
    }
    let d = params.dim();
    let head_u = asymptotic_exponents(params, f, false).iter().map(|e| e.0).fold(f64::INFINITY, f64::min);
    let tail_u = asymptotic_exponents(params, f, true).iter().map(|e| e.0).fold(f64::NEG_INFINITY, f64::max);
    let outer = RadialSampler::new(params.d(), g, |i| {
        let b = g.pieces()[i].power;
        (b + d + head_u, -(b + d + tail_u))
    })?;
    let est = run_blocks(n, seed, |rng| {
        let x = outer.sample(rng);
        let rx = norm(&x);
        let gx = g.value(rx);
        if gx == 0.0 {
            return 0.0;
        }
        // rotational invariance: evaluate the inner integral at |x| e_1
        let inner = match PointSampler::new(params, f, rx) {
            Ok(s) => s.draw(rng),
            Err(_) => return f64::NAN,
        };
        gx * rx.powf(-params.beta()) * inner / outer.density(&x)
    });
    if !est.value.is_finite() {
        return Err(RieszError::Quadrature("bilinear sampler produced a non-finite weight".into()));
    }
    Ok(est)
}

/// Sphere-average estimate of `Φ(r, s) = ∫_{S^{d-1}} |r e_1 - s ω|^{-λ} dσ(ω)`
/// from uniform directions.
pub fn angular_kernel_mc(d: usize, lambda: f64, r: f64, s: f64, n: u64, seed: u64) -> Result<McEstimate> {
    if !(1..=3).contains(&d) {
        return Err(RieszError::UnsupportedDimension(d));
    }
    let omega = sphere_area(d);
    Ok(run_blocks(n, seed, |rng| {
        let w = random_direction(d, rng);
        let v = [r - s * w[0], -s * w[1], -s * w[2]];
        omega * norm(&v).powf(-lambda)
    }))
}
