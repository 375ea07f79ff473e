//! The characteristic triple `(b, c, F)` and what can be computed from it
//! in closed form or by one-dimensional quadrature.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::numerics::{integrate_with_breaks, normal_expectation, QuadratureOptions};

/// `φ_r(x) = 1 ∧ |x|^r` for `r > 0` and `φ_0 ≡ 1`.
pub fn phi_r(x: f64, r: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(invalid("r", format!("phi_r needs r >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    Ok(x.abs().powf(r).min(1.0))
}

/// `μ_r = E|U|^r = 2^{r/2} Γ((r+1)/2) / √π` for a standard normal `U`.
pub fn abs_normal_moment(r: f64) -> f64 {
    assert!(r >= 0.0, "absolute moment of negative order {r}");
    2f64.powf(r / 2.0) * gamma((r + 1.0) / 2.0) / std::f64::consts::PI.sqrt()
}

/// Law of the jump sizes of a compound Poisson measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpLaw {
    PointMasses { atoms: Vec<(f64, f64)> },
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl JumpLaw {
    pub fn point_masses(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let law = JumpLaw::PointMasses { atoms };
        law.validate()?;
        Ok(law)
    }

    /// Jumps `±size` with probability ½ each.
    pub fn symmetric_pair(size: f64) -> Result<Self> {
        Self::point_masses(vec![(size, 0.5), (-size, 0.5)])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JumpLaw::PointMasses { atoms } => {
                if atoms.is_empty() {
                    return Err(invalid("atoms", "at least one atom is required"));
                }
                if atoms.iter().any(|&(v, w)| !(w > 0.0) || !v.is_finite()) {
                    return Err(invalid("atoms", "weights must be positive and values finite"));
                }
                if atoms.iter().any(|&(v, _)| v == 0.0) {
                    return Err(invalid("atoms", "a Lévy measure does not charge 0"));
                }
                let total: f64 = atoms.iter().map(|a| a.1).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid("atoms", format!("weights sum to {total}, not 1")));
                }
            }
            JumpLaw::Gaussian { mean, sd } => {
                if !(mean.is_finite() && *sd > 0.0 && sd.is_finite()) {
                    return Err(invalid("sd", format!("needs finite mean and sd > 0, got sd = {sd}")));
                }
            }
            JumpLaw::Uniform { lo, hi } => {
                if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                    return Err(invalid("hi", format!("needs lo < hi, got [{lo}, {hi}]")));
                }
            }
        }
        Ok(())
    }

    /// `E g(J)`; `breaks` are irregular points of `g`.
    pub fn expect<G: Fn(f64) -> f64>(&self, g: G, breaks: &[f64], opts: QuadratureOptions) -> Result<f64> {
        match self {
            JumpLaw::PointMasses { atoms } => Ok(atoms.iter().map(|&(v, w)| w * g(v)).sum()),
            JumpLaw::Gaussian { mean, sd } => normal_expectation(g, *mean, *sd, breaks, opts),
            JumpLaw::Uniform { lo, hi } => {
                integrate_with_breaks(&g, *lo, *hi, breaks, opts).map(|v| v / (hi - lo))
            }
        }
    }

    fn has_atom_at(&self, x: f64) -> bool {
        match self {
            JumpLaw::PointMasses { atoms } => atoms.iter().any(|&(v, _)| v == x),
            _ => false,
        }
    }
}

/// Lévy measure families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum JumpMeasure {
    NoJumps,
    /// `F = λ · law`.
    CompoundPoisson { intensity: f64, jump_law: JumpLaw },
    /// Density `scale · |x|^{-1-α}` on `0 < |x| ≤ cutoff` (positive side
    /// only when not symmetric).
    PowerLawSmallJumps {
        alpha: f64,
        scale: f64,
        cutoff: f64,
        symmetric: bool,
    },
}

/// The index set `I = {r ≥ 0 : F(φ_r) < ∞}`, an interval `[lower, ∞)` or
/// `(lower, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexSet {
    pub lower: f64,
    pub closed: bool,
}

impl IndexSet {
    pub fn contains(&self, r: f64) -> bool {
        r >= 0.0 && (r > self.lower || (self.closed && r == self.lower))
    }

    /// Whether `I` meets the interval from `lo` to `hi`, each end open or
    /// closed as flagged.
    pub fn meets(&self, lo: f64, lo_open: bool, hi: f64, hi_open: bool) -> bool {
        let lo = lo.max(0.0);
        if hi < lo || (hi == lo && (lo_open || hi_open)) {
            return false;
        }
        if hi > self.lower {
            // (max(lo, lower), hi] is a non-empty stretch of I unless it
            // degenerates to the single point `lo` with `lo` excluded.
            return !(lo_open && hi == lo);
        }
        hi == self.lower && self.closed && !hi_open
    }
}

impl JumpMeasure {
    pub fn compound_poisson(intensity: f64, jump_law: JumpLaw) -> Result<Self> {
        let m = JumpMeasure::CompoundPoisson { intensity, jump_law };
        m.validate()?;
        Ok(m)
    }

    pub fn power_law(alpha: f64, scale: f64, cutoff: f64, symmetric: bool) -> Result<Self> {
        let m = JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            JumpMeasure::NoJumps => Ok(()),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                if !(*intensity > 0.0 && intensity.is_finite()) {
                    return Err(invalid("intensity", format!("must be positive, got {intensity}")));
                }
                jump_law.validate()
            }
            JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, .. } => {
                if !(*alpha > 0.0 && *alpha < 2.0) {
                    return Err(invalid("alpha", format!("must lie in (0, 2), got {alpha}")));
                }
                if !(*scale > 0.0 && scale.is_finite()) {
                    return Err(invalid("scale", format!("must be positive, got {scale}")));
                }
                if !(*cutoff > 0.0 && cutoff.is_finite()) {
                    return Err(invalid("cutoff", format!("must be positive, got {cutoff}")));
                }
                Ok(())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, JumpMeasure::NoJumps)
    }

    pub fn has_atom_at(&self, x: f64) -> bool {
        match self {
            JumpMeasure::CompoundPoisson { jump_law, .. } => jump_law.has_atom_at(x),
            _ => false,
        }
    }

    pub fn index_set(&self) -> IndexSet {
        match self {
            JumpMeasure::NoJumps | JumpMeasure::CompoundPoisson { .. } => IndexSet { lower: 0.0, closed: true },
            JumpMeasure::PowerLawSmallJumps { alpha, .. } => IndexSet { lower: *alpha, closed: false },
        }
    }

    /// `r ∈ I`.
    pub fn in_index_set(&self, r: f64) -> bool {
        self.index_set().contains(r)
    }

    /// Number of sides (1 or 2) carrying power-law mass.
    fn sides(symmetric: bool) -> f64 {
        if symmetric {
            2.0
        } else {
            1.0
        }
    }

    /// `F({|x| > ε})`, the intensity of jumps above `ε`.
    pub fn mass_above(&self, eps: f64) -> Result<f64> {
        match self {
            JumpMeasure::NoJumps => Ok(0.0),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                let p = jump_law.expect(
                    |x| if x.abs() > eps { 1.0 } else { 0.0 },
                    &[-eps, eps],
                    QuadratureOptions::default(),
                )?;
                Ok(intensity * p)
            }
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                if eps >= cutoff {
                    return Ok(0.0);
                }
                Ok(Self::sides(symmetric) * scale * (eps.powf(-alpha) - cutoff.powf(-alpha)) / alpha)
            }
        }
    }

    /// `∫_{|x|≤ε} |x|^p F(dx)` for `p > α` (finite) or `+∞`.
    pub fn small_power_moment(&self, eps: f64, p: f64) -> Result<f64> {
        match self {
            JumpMeasure::NoJumps => Ok(0.0),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                let v = jump_law.expect(
                    |x| if x.abs() <= eps { x.abs().powf(p) } else { 0.0 },
                    &[-eps, 0.0, eps],
                    QuadratureOptions::default(),
                )?;
                Ok(intensity * v)
            }
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                if p <= alpha {
                    return Ok(f64::INFINITY);
                }
                let m = eps.min(cutoff);
                Ok(Self::sides(symmetric) * scale * m.powf(p - alpha) / (p - alpha))
            }
        }
    }

    /// `∫_{ε<|x|≤1} x F(dx)` (signed). `ε = 0` gives the full compensator
    /// integral, which is finite iff `1 ∈ I`.
    pub fn compensator_mean(&self, eps: f64) -> Result<f64> {
        match self {
            JumpMeasure::NoJumps => Ok(0.0),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                let v = jump_law.expect(
                    |x| if x.abs() > eps && x.abs() <= 1.0 { x } else { 0.0 },
                    &[-1.0, -eps, eps, 1.0],
                    QuadratureOptions::default(),
                )?;
                Ok(intensity * v)
            }
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                if symmetric {
                    return Ok(0.0);
                }
                let hi = cutoff.min(1.0);
                if eps >= hi {
                    return Ok(0.0);
                }
                // ∫_ε^hi x · scale x^{-1-α} dx
                if alpha == 1.0 {
                    if eps == 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    return Ok(scale * (hi / eps).ln());
                }
                if eps == 0.0 && alpha > 1.0 {
                    return Ok(f64::INFINITY);
                }
                Ok(scale * (hi.powf(1.0 - alpha) - eps.powf(1.0 - alpha)) / (1.0 - alpha))
            }
        }
    }

    /// `F(g)` for a function with `|g(x)| = O(|x|^order)` at 0, or `+∞`
    /// when the integrability rule fails. `breaks` are irregular points of
    /// `g`.
    pub fn integrate<G: Fn(f64) -> f64>(&self, g: G, order: Option<f64>, breaks: &[f64]) -> Result<f64> {
        let opts = QuadratureOptions::default();
        match self {
            JumpMeasure::NoJumps => Ok(0.0),
            JumpMeasure::CompoundPoisson { intensity, jump_law } => {
                Ok(intensity * jump_law.expect(g, breaks, opts)?)
            }
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                let r = match order {
                    Some(r) if r > alpha => r,
                    Some(_) => return Ok(f64::INFINITY),
                    None => {
                        // not O(|x|^r) for any r > α; finite only if g vanishes
                        // near 0, which none of the supported forms does
                        if g(1e-300) == 0.0 && g(-1e-300) == 0.0 {
                            return Err(Error::Degenerate(
                                "F(g) for g vanishing near 0 without a growth order".into(),
                            ));
                        }
                        return Ok(f64::INFINITY);
                    }
                };
                // x = u^{1/(r-α)} turns g(x) x^{-1-α} dx into
                // g(x)/x^r · du/(r-α), bounded near u = 0.
                let k = r - alpha;
                let u_max = cutoff.powf(k);
                let side = |sign: f64| -> Result<f64> {
                    let h = |u: f64| {
                        if u <= 0.0 {
                            return 0.0;
                        }
                        let x = u.powf(1.0 / k);
                        let gx = g(sign * x);
                        if gx == 0.0 {
                            0.0
                        } else {
                            gx / x.powf(r)
                        }
                    };
                    let ubreaks: Vec<f64> = breaks
                        .iter()
                        .filter(|b| b.signum() == sign && b.abs() > 0.0)
                        .map(|b| b.abs().powf(k))
                        .collect();
                    let v = integrate_with_breaks(h, 0.0, u_max, &ubreaks, opts)?;
                    Ok(scale * v / k)
                };
                let mut total = side(1.0)?;
                if symmetric {
                    total += side(-1.0)?;
                }
                Ok(total)
            }
        }
    }

    /// Closed form of `F(φ_r)`, used as an independent check on
    /// [`JumpMeasure::integrate`].
    pub fn phi_integral_closed_form(&self, r: f64) -> Option<f64> {
        match self {
            JumpMeasure::NoJumps => Some(0.0),
            JumpMeasure::CompoundPoisson { intensity, jump_law: JumpLaw::PointMasses { atoms } } => Some(
                intensity * atoms.iter().map(|&(v, w)| w * phi_r(v, r).unwrap()).sum::<f64>(),
            ),
            JumpMeasure::CompoundPoisson { .. } => None,
            &JumpMeasure::PowerLawSmallJumps { alpha, scale, cutoff, symmetric } => {
                if r <= alpha {
                    return Some(f64::INFINITY);
                }
                let m = cutoff.min(1.0);
                let mut side = m.powf(r - alpha) / (r - alpha);
                if cutoff > 1.0 {
                    side += (1.0 - cutoff.powf(-alpha)) / alpha;
                }
                Some(Self::sides(symmetric) * scale * side)
            }
        }
    }
}

/// The characteristic triple of a one-dimensional Lévy process.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyTriple {
    /// Drift `b` relative to the truncation `x 1{|x| ≤ 1}`.
    pub drift_b: f64,
    /// Variance `c` of the Gaussian part per unit time.
    pub gauss_var_c: f64,
    #[serde(default = "no_jumps")]
    pub jump_measure: JumpMeasure,
}

fn no_jumps() -> JumpMeasure {
    JumpMeasure::NoJumps
}

impl LevyTriple {
    pub fn new(drift_b: f64, gauss_var_c: f64, jump_measure: JumpMeasure) -> Result<Self> {
        let t = LevyTriple { drift_b, gauss_var_c, jump_measure };
        t.validate()?;
        Ok(t)
    }

    pub fn brownian(gauss_var_c: f64) -> Result<Self> {
        Self::new(0.0, gauss_var_c, JumpMeasure::NoJumps)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.drift_b.is_finite() {
            return Err(invalid("drift_b", format!("must be finite, got {}", self.drift_b)));
        }
        if !(self.gauss_var_c >= 0.0 && self.gauss_var_c.is_finite()) {
            return Err(invalid(
                "gauss_var_c",
                format!("must be finite and >= 0, got {}", self.gauss_var_c),
            ));
        }
        self.jump_measure.validate()
    }

    pub fn sigma(&self) -> f64 {
        self.gauss_var_c.sqrt()
    }

    /// The genuine drift `b̄ = b − ∫_{|x|≤1} x F(dx)`, defined when `1 ∈ I`.
    pub fn genuine_drift(&self) -> Option<f64> {
        if !self.jump_measure.in_index_set(1.0) {
            return None;
        }
        let comp = self.jump_measure.compensator_mean(0.0).ok()?;
        comp.is_finite().then_some(self.drift_b - comp)
    }

    /// `b̄ = 0`, treating an undefined `b̄` as "not zero".
    pub fn genuine_drift_vanishes(&self) -> bool {
        self.genuine_drift().is_some_and(|b| b.abs() < 1e-14)
    }
}
