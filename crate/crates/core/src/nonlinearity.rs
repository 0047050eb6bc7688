//! Odd, sign-preserving link nonlinearities with sector bounds.
//!
//! A map `g` lies in the sector `[κ̲, κ̄]` on `[−Z, Z]` when
//! `κ̲ z² ≤ z g(z) ≤ κ̄ z²` for every `|z| ≤ Z`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum NonlinearityError {
    #[error("quantisation/saturation level must be positive and finite, got {0}")]
    InvalidLevel(f64),
    #[error("sector domain bound must be positive and finite, got {0}")]
    InvalidDomain(f64),
}

/// Anything usable as a link map by [`verify_sector`].
pub trait LinkMap {
    fn apply(&self, z: f64) -> f64;
    /// Sector `(κ̲, κ̄)` claimed on `[−domain, domain]`.
    fn sector_bounds(&self, domain: f64) -> Result<(f64, f64), NonlinearityError>;
}

/// The built-in link maps.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SectorMap {
    #[default]
    Identity,
    /// Logarithmic quantiser `sgn(z) exp(ρ round(ln|z| / ρ))`.
    #[serde(rename = "logq")]
    LogQuantizer { rho: f64 },
    /// Saturation `sgn(z) min(|z|, ρ)`.
    Clip { rho: f64 },
}

impl SectorMap {
    pub fn log_quantizer(rho: f64) -> Result<Self, NonlinearityError> {
        check_level(rho)?;
        Ok(SectorMap::LogQuantizer { rho })
    }

    pub fn clip(rho: f64) -> Result<Self, NonlinearityError> {
        check_level(rho)?;
        Ok(SectorMap::Clip { rho })
    }

    pub fn validate(&self) -> Result<(), NonlinearityError> {
        match *self {
            SectorMap::Identity => Ok(()),
            SectorMap::LogQuantizer { rho } | SectorMap::Clip { rho } => check_level(rho),
        }
    }

    pub fn rho(&self) -> Option<f64> {
        match *self {
            SectorMap::Identity => None,
            SectorMap::LogQuantizer { rho } | SectorMap::Clip { rho } => Some(rho),
        }
    }

    /// Same kind with a different level; identity is returned unchanged.
    pub fn with_rho(&self, rho: f64) -> Self {
        match self {
            SectorMap::Identity => SectorMap::Identity,
            SectorMap::LogQuantizer { .. } => SectorMap::LogQuantizer { rho },
            SectorMap::Clip { .. } => SectorMap::Clip { rho },
        }
    }

    pub fn is_identity(&self) -> bool {
        matches!(self, SectorMap::Identity)
    }

    #[inline]
    pub fn apply(&self, z: f64) -> f64 {
        match *self {
            SectorMap::Identity => z,
            SectorMap::LogQuantizer { rho } => {
                if z == 0.0 {
                    0.0
                } else {
                    let level = (rho * (z.abs().ln() / rho).round()).exp();
                    level.copysign(z)
                }
            }
            SectorMap::Clip { rho } => z.abs().min(rho).copysign(z),
        }
    }

    pub fn apply_slice(&self, input: &[f64], out: &mut [f64]) {
        for (o, &z) in out.iter_mut().zip(input) {
            *o = self.apply(z);
        }
    }

    /// Tight sector on `[−domain, domain]`.
    pub fn sector_bounds(&self, domain: f64) -> Result<(f64, f64), NonlinearityError> {
        if !(domain.is_finite() && domain > 0.0) {
            return Err(NonlinearityError::InvalidDomain(domain));
        }
        self.validate()?;
        Ok(match *self {
            SectorMap::Identity => (1.0, 1.0),
            SectorMap::LogQuantizer { rho } => ((-rho / 2.0).exp(), (rho / 2.0).exp()),
            SectorMap::Clip { rho } => ((rho / domain).min(1.0), 1.0),
        })
    }

    /// First-order sector `(1 − ρ/2, 1 + ρ/2)` of the logarithmic quantiser,
    /// the form usually quoted for small ρ. Its lower end is looser than the
    /// tight bound, while its upper end undershoots `e^(ρ/2)` by `O(ρ²)`.
    /// `None` for the other maps.
    pub fn linearized_bounds(&self) -> Option<(f64, f64)> {
        match *self {
            SectorMap::LogQuantizer { rho } => Some((1.0 - rho / 2.0, 1.0 + rho / 2.0)),
            _ => None,
        }
    }

    pub fn describe(&self) -> String {
        match *self {
            SectorMap::Identity => "identity".into(),
            SectorMap::LogQuantizer { rho } => format!("logq(rho={rho})"),
            SectorMap::Clip { rho } => format!("clip(rho={rho})"),
        }
    }
}

impl LinkMap for SectorMap {
    fn apply(&self, z: f64) -> f64 {
        SectorMap::apply(self, z)
    }

    fn sector_bounds(&self, domain: f64) -> Result<(f64, f64), NonlinearityError> {
        SectorMap::sector_bounds(self, domain)
    }
}

fn check_level(rho: f64) -> Result<(), NonlinearityError> {
    if rho.is_finite() && rho > 0.0 {
        Ok(())
    } else {
        Err(NonlinearityError::InvalidLevel(rho))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Property {
    Origin,
    Oddness,
    SignPreservation,
    Monotonicity,
    Sector,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub z: f64,
    pub property: Property,
}

#[derive(Debug, Clone, Serialize)]
pub struct SectorReport {
    pub passed: bool,
    pub bounds: (f64, f64),
    /// `min (g(z)/z − κ̲)` over the samples.
    pub lower_margin: f64,
    /// `min (κ̄ − g(z)/z)` over the samples.
    pub upper_margin: f64,
    pub samples: usize,
    pub violation_count: usize,
    /// The first few violations, for diagnostics.
    pub violations: Vec<Violation>,
}

const MAX_LISTED: usize = 32;

/// Samples `g` on `[−domain, domain]` and checks `g(0) = 0`, exact oddness,
/// sign preservation, monotonicity and the claimed sector.
pub fn verify_sector(
    map: &dyn LinkMap,
    domain: f64,
    samples: usize,
    seed: u64,
) -> Result<SectorReport, NonlinearityError> {
    let (low, high) = map.sector_bounds(domain)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut zs: Vec<f64> = (0..samples)
        .map(|_| rng.random_range(-domain..=domain))
        .collect();
    let mut violations = Vec::new();
    let mut count = 0usize;
    let mut flag = |z: f64, property: Property, list: &mut Vec<Violation>| {
        count += 1;
        if list.len() < MAX_LISTED {
            list.push(Violation { z, property });
        }
    };

    if map.apply(0.0) != 0.0 {
        flag(0.0, Property::Origin, &mut violations);
    }
    let mut lower_margin = f64::INFINITY;
    let mut upper_margin = f64::INFINITY;
    for &z in &zs {
        let g = map.apply(z);
        if map.apply(-z).to_bits() != (-g).to_bits() {
            flag(z, Property::Oddness, &mut violations);
        }
        if z == 0.0 {
            continue;
        }
        if !(z * g > 0.0) {
            flag(z, Property::SignPreservation, &mut violations);
        }
        let slope = g / z;
        lower_margin = lower_margin.min(slope - low);
        upper_margin = upper_margin.min(high - slope);
        if slope < low || slope > high || !slope.is_finite() {
            flag(z, Property::Sector, &mut violations);
        }
    }
    zs.sort_by(|a, b| a.total_cmp(b));
    for pair in zs.windows(2) {
        if map.apply(pair[1]) < map.apply(pair[0]) {
            flag(pair[1], Property::Monotonicity, &mut violations);
        }
    }
    Ok(SectorReport {
        passed: count == 0,
        bounds: (low, high),
        lower_margin,
        upper_margin,
        samples,
        violation_count: count,
        violations,
    })
}
