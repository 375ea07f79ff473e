//! Which limit theorem governs a given `(triple, f, horizon)` and what its
//! limit is.
//!
//! A [`RegimeVerdict`] packages the normalisation `Δ^a · T^h · κ` (with an
//! optional non-explicit factor κ such as `1/H_Δ(φ_r)`), the per-step
//! centering, and the predicted limit. [`crate::variation_stats::center_and_scale`]
//! applies the first two, [`crate::mc_harness`] checks the third.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levy_model::{abs_normal_moment, JumpLaw, JumpMeasure, LevyTriple};
use crate::numerics::quadrature::{normal_expectation, QuadratureOptions};
use crate::numerics::stats::min_eigenvalue;
use crate::path_simulator::{HorizonMode, Jump};
use crate::test_functions::{CutoffFamily, TestFunction};
use crate::variation_stats::SeriesKind;

#[allow(non_camel_case_types)]
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Theorem {
    T2_1a,
    T2_1b,
    T2_1c,
    T2_1iii,
    T2_2i,
    T2_2ii,
    T2_3,
    T2_4i,
    T2_4ii,
    T2_5i,
    T2_5ii,
    T2_6b,
    T2_6c,
    T2_7,
    T3_1,
    T3_2,
    T3_3,
    NotCovered,
}

impl Theorem {
    pub fn is_clt(self) -> bool {
        use Theorem::*;
        matches!(self, T2_4i | T2_4ii | T2_5i | T2_5ii | T2_6b | T2_6c | T2_7 | T3_2 | T3_3)
    }
}

/// `f(x) · ψ_η(x)`, or `f` alone when no cutoff is needed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterFunction {
    pub function: TestFunction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_eta: Option<f64>,
}

impl CenterFunction {
    pub fn plain(function: TestFunction) -> Self {
        Self { function, cutoff_eta: None }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let v = self.function.eval(x);
        match self.cutoff_eta {
            Some(eta) if v != 0.0 => v * CutoffFamily { eta }.eval(x),
            _ => v,
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.function.breakpoints();
        if let Some(eta) = self.cutoff_eta {
            b.extend([-2.0 * eta, -eta, eta, 2.0 * eta]);
        }
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

/// Where the number behind an `H`-type centering comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CenteringSource {
    /// Closed form or quadrature against the exact law of `X_Δ`.
    Exact,
    /// Leading-order small-time asymptotics.
    Analytic,
    MonteCarlo,
}

/// Centering, as a per-step amount subtracted from the raw series: the
/// centering at a grid time with `k` steps is `k · h` (or the discretised
/// jump functional).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Centering {
    None,
    /// `h = H_Δ(g)`, or `E g(X_Δ/√Δ)` when `rescaled`.
    HCenter { function: CenterFunction, rescaled: bool, source: CenteringSource },
    /// `h = value · Δ^delta_power`.
    DeterministicSlope { value: f64, delta_power: f64 },
    /// `V(f)^{(n)}`: `f⋆μ` at the last grid time plus `drift_rate · Δ[t/Δ]`.
    JumpFunctional { drift_rate: f64 },
    /// `h = E f(σU)`.
    GaussianExpectation { value: f64 },
}

/// Extra, non-explicit factor in the normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RateNormalizer {
    None,
    /// Multiply by `1 / H_Δ(g)`.
    InverseH { function: CenterFunction },
    /// Multiply by `1 / √Γ_Δ(g)`.
    InverseSqrtGamma { function: CenterFunction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Limit {
    /// `value · t`.
    DeterministicSlope { value: f64 },
    /// `f⋆μ`, or the compensated sum `Σ(f, φ)` for centred statements.
    RandomJumpFunctional,
    JumpFunctionalPlusDrift { rate: f64 },
    /// Wiener process with this variance per unit time.
    CltVariance { v: f64 },
    CltCovariance { matrix: Vec<Vec<f64>> },
    /// `Z(f')`, plus `c√2 W'` when `brownian_part`.
    RandomCltZ { brownian_part: bool },
    /// Only `Δ^{-exponent} · (statistic) → 0` is known.
    VanishingBound { exponent: f64 },
    Divergent,
    None,
}

/// Role of a component in the joint CLT.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "set", rename_all = "snake_case")]
pub enum JointRole {
    /// Power-class component, `V^n`.
    JPrime { r: f64 },
    /// Bounded `f`, `V'^n`.
    JDoublePrime,
    /// Jump-functional-centred component.
    JumpCentred,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeVerdict {
    pub theorem: Theorem,
    pub series: SeriesKind,
    /// Power of `Δ` in the normalisation.
    pub normalization_exponent: f64,
    /// Power of the horizon `T = nΔ` in the normalisation.
    pub horizon_exponent: f64,
    pub normalizer: RateNormalizer,
    pub centering: Centering,
    pub limit: Limit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub joint_role: Option<JointRole>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl RegimeVerdict {
    fn new(theorem: Theorem, series: SeriesKind, a: f64, centering: Centering, limit: Limit) -> Self {
        RegimeVerdict {
            theorem,
            series,
            normalization_exponent: a,
            horizon_exponent: 0.0,
            normalizer: RateNormalizer::None,
            centering,
            limit,
            joint_role: None,
            reason: None,
            notes: Vec::new(),
        }
    }

    pub fn not_covered(series: SeriesKind, reason: impl Into<String>) -> Self {
        RegimeVerdict {
            reason: Some(reason.into()),
            ..Self::new(Theorem::NotCovered, series, 0.0, Centering::None, Limit::None)
        }
    }

    fn horizon(mut self, h: f64) -> Self {
        self.horizon_exponent = h;
        self
    }

    fn normalizer(mut self, n: RateNormalizer) -> Self {
        self.normalizer = n;
        self
    }

    fn role(mut self, role: JointRole) -> Self {
        self.joint_role = Some(role);
        self
    }

    fn note(mut self, n: impl Into<String>) -> Self {
        self.notes.push(n.into());
        self
    }

    pub fn is_covered(&self) -> bool {
        self.theorem != Theorem::NotCovered
    }

    pub fn is_clt(&self) -> bool {
        self.theorem.is_clt()
    }

    /// Check the invariants a verdict must satisfy.
    pub fn check(&self) -> Result<()> {
        if self.theorem == Theorem::NotCovered && self.reason.is_none() {
            return Err(Error::Degenerate("NotCovered verdict without a reason".into()));
        }
        match &self.limit {
            Limit::CltVariance { v } if !(*v >= 0.0) => {
                Err(Error::Degenerate(format!("negative CLT variance {v}")))
            }
            Limit::CltCovariance { matrix } => {
                let m = to_matrix(matrix);
                let e = min_eigenvalue(&m);
                if e < -1e-10 {
                    Err(Error::Degenerate(format!("covariance not PSD, min eigenvalue {e}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }
}

fn to_matrix(rows: &[Vec<f64>]) -> nalgebra::DMatrix<f64> {
    let d = rows.len();
    nalgebra::DMatrix::from_fn(d, d, |i, j| rows[i][j])
}

fn eq(a: f64, b: f64) -> bool {
    (a - b).abs() < 1e-12
}

fn quad() -> QuadratureOptions {
    QuadratureOptions::default()
}

/// `E f(σU)`.
pub fn gaussian_expectation(triple: &LevyTriple, f: &TestFunction) -> Result<f64> {
    normal_expectation(|x| f.eval(x), 0.0, triple.sigma(), &f.breakpoints(), quad())
}

/// `Var f(σU)`.
pub fn gaussian_variance(triple: &LevyTriple, f: &TestFunction) -> Result<f64> {
    let m = gaussian_expectation(triple, f)?;
    let m2 = normal_expectation(|x| f.eval(x).powi(2), 0.0, triple.sigma(), &f.breakpoints(), quad())?;
    Ok((m2 - m * m).max(0.0))
}

/// `F(f)`.
pub fn jump_integral(jm: &JumpMeasure, f: &TestFunction) -> Result<f64> {
    jm.integrate(|x| f.eval(x), f.class_r(), &f.breakpoints())
}

/// `F(f²)`.
pub fn jump_integral_sq(jm: &JumpMeasure, f: &TestFunction) -> Result<f64> {
    jm.integrate(|x| f.eval(x).powi(2), f.class_r().map(|r| 2.0 * r), &f.breakpoints())
}

fn phi(r: f64) -> Result<TestFunction> {
    TestFunction::phi(r)
}

/// `f φ` for the compensated-sum statements: `f` itself when bounded,
/// otherwise `f ψ_1` with the smooth cutoff equal to 1 on `[-1, 1]`.
fn centred_product(f: &TestFunction) -> CenterFunction {
    if f.is_bounded() {
        CenterFunction::plain(*f)
    } else {
        CenterFunction { function: *f, cutoff_eta: Some(1.0) }
    }
}

struct Facts<'a> {
    triple: &'a LevyTriple,
    jm: &'a JumpMeasure,
    c: f64,
    r: Option<f64>,
    bounded: bool,
    ae_cont: bool,
    no_jumps: bool,
    one_in_i: bool,
    bbar: Option<f64>,
    bbar_zero: bool,
}

impl<'a> Facts<'a> {
    fn new(triple: &'a LevyTriple, f: &TestFunction) -> Result<Self> {
        triple.validate()?;
        let jm = &triple.jump_measure;
        let bbar = triple.genuine_drift();
        Ok(Facts {
            triple,
            jm,
            c: triple.gauss_var_c,
            r: f.class_r(),
            bounded: f.is_bounded(),
            ae_cont: f.is_f_ae_continuous(jm),
            no_jumps: jm.is_zero(),
            one_in_i: jm.in_index_set(1.0),
            bbar,
            bbar_zero: triple.genuine_drift_vanishes(),
        })
    }

    fn in_i(&self, r: f64) -> bool {
        self.jm.in_index_set(r)
    }

    /// `r` lies in the list of part (ii) of the unnormalised LLN.
    fn in_unnormalised_list(&self, r: f64) -> bool {
        r >= 2.0
            || (self.c == 0.0 && self.in_i(r) && (1.0..2.0).contains(&r))
            || (self.c == 0.0 && self.in_i(r) && r < 1.0 && self.bbar_zero)
    }
}

/// Part (i) of the unnormalised LLN: the random-limit cases.
fn unnormalised_random_limit(x: &Facts, r: f64) -> Option<(Theorem, Limit, &'static str)> {
    if !x.ae_cont {
        return None;
    }
    let c = x.c;
    if eq(r, 2.0) {
        return Some((Theorem::T2_1b, Limit::JumpFunctionalPlusDrift { rate: c }, "f in E_2"));
    }
    if r > 2.0 {
        return Some((Theorem::T2_1a, Limit::RandomJumpFunctional, "[a-1] f in E''_2"));
    }
    if c != 0.0 {
        return None;
    }
    if eq(r, 1.0) && x.one_in_i {
        let rate = x.bbar.map_or(0.0, f64::abs);
        return Some((Theorem::T2_1c, Limit::JumpFunctionalPlusDrift { rate }, "f in E_1, c = 0"));
    }
    if r > 1.0 && x.one_in_i {
        return Some((Theorem::T2_1a, Limit::RandomJumpFunctional, "[a-3] f in E''_1, c = 0"));
    }
    if r > 1.0 && r < 2.0 && x.in_i(r) {
        return Some((Theorem::T2_1a, Limit::RandomJumpFunctional, "[a-2] r in I, c = 0"));
    }
    if r <= 1.0 && x.in_i(r) && x.bbar_zero {
        return Some((Theorem::T2_1a, Limit::RandomJumpFunctional, "[a-4] r in I, c = 0, genuine drift 0"));
    }
    None
}

fn lln_fixed(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let s = SeriesKind::Vn;
    let Some(r) = x.r else {
        return Ok(vec![RegimeVerdict::not_covered(s, "f has no power behaviour at 0")]);
    };
    let mut out = Vec::new();
    if let Some((th, limit, why)) = unnormalised_random_limit(x, r) {
        out.push(RegimeVerdict::new(th, s, 0.0, Centering::None, limit).note(why));
    }
    if x.c > 0.0 && (r < 2.0 || x.no_jumps) {
        let slope = x.c.powf(r / 2.0) * abs_normal_moment(r);
        out.push(RegimeVerdict::new(
            Theorem::T2_2i,
            s,
            1.0 - r / 2.0,
            Centering::None,
            Limit::DeterministicSlope { value: slope },
        ));
    }
    let t23 = (r > 1.0 && r < 2.0) || (r <= 1.0 && x.c == 0.0 && x.in_i(2.0 * r));
    if t23 && x.ae_cont {
        out.push(
            RegimeVerdict::new(
                Theorem::T2_3,
                s,
                0.0,
                Centering::HCenter { function: centred_product(f), rescaled: false, source: CenteringSource::Exact },
                Limit::RandomJumpFunctional,
            )
            .note("limit is the compensated jump sum Sigma(f, phi)"),
        );
    }
    if !x.in_unnormalised_list(r) {
        let g = CenterFunction::plain(phi(r)?);
        out.push(
            RegimeVerdict::new(Theorem::T2_1iii, s, 1.0, Centering::None, Limit::DeterministicSlope { value: 1.0 })
                .normalizer(RateNormalizer::InverseH { function: g })
                .note("rate 1/H_delta(phi_r) is not explicit; checked empirically"),
        );
    }
    if out.is_empty() {
        out.push(RegimeVerdict::not_covered(
            s,
            format!("f is not F-a.e. continuous and r = {r} admits no normalised statement"),
        ));
    }
    Ok(out)
}

fn lln_growing(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let s = SeriesKind::VnBar;
    if !f.is_bounded() {
        return Ok(vec![RegimeVerdict::not_covered(s, "growing-horizon statements need bounded f")]);
    }
    let Some(r) = x.r else {
        return Ok(vec![RegimeVerdict::not_covered(s, "f has no power behaviour at 0")]);
    };
    let mut out = Vec::new();
    if let Some((th, _, why)) = unnormalised_random_limit(x, r) {
        let ff = jump_integral(x.jm, f)?;
        let v = match th {
            Theorem::T2_1b => ff + x.c,
            Theorem::T2_1c => ff + x.bbar.map_or(0.0, f64::abs),
            _ => ff,
        };
        out.push(
            RegimeVerdict::new(Theorem::T3_1, s, 0.0, Centering::None, Limit::DeterministicSlope { value: v })
                .horizon(-1.0)
                .note(format!("(i): {why}")),
        );
    }
    if x.c > 0.0 && (r < 2.0 || x.no_jumps) {
        let slope = x.c.powf(r / 2.0) * abs_normal_moment(r);
        out.push(
            RegimeVerdict::new(Theorem::T3_1, s, 1.0 - r / 2.0, Centering::None, Limit::DeterministicSlope { value: slope })
                .horizon(-1.0)
                .note("(ii)"),
        );
    }
    if out.is_empty() {
        out.push(RegimeVerdict::not_covered(s, format!("no growing-horizon LLN for r = {r} here")));
    }
    Ok(out)
}

fn primary(list: Vec<RegimeVerdict>) -> RegimeVerdict {
    let all: Vec<String> = list.iter().map(|v| format!("{:?}", v.theorem)).collect();
    let mut first = list.into_iter().next().expect("non-empty verdict list");
    if all.len() > 1 {
        first.notes.push(format!("applicable: {}", all.join(", ")));
    }
    first
}

/// LLN verdict for `V^n(f)` (fixed horizon) or `V̄^n(f)` (growing horizon).
/// The strongest statement comes first; `notes` lists every applicable one.
pub fn classify(triple: &LevyTriple, f: &TestFunction, mode: HorizonMode) -> Result<RegimeVerdict> {
    Ok(primary(applicable_lln(triple, f, mode)?))
}

pub fn applicable_lln(triple: &LevyTriple, f: &TestFunction, mode: HorizonMode) -> Result<Vec<RegimeVerdict>> {
    let x = Facts::new(triple, f)?;
    match mode {
        HorizonMode::FixedHorizon => lln_fixed(&x, f),
        HorizonMode::GrowingHorizon => lln_growing(&x, f),
    }
}

/// LLN verdict for `V'^n(f)` / `V̄'^n(f)`.
pub fn classify_rescaled(triple: &LevyTriple, f: &TestFunction, mode: HorizonMode) -> Result<RegimeVerdict> {
    let x = Facts::new(triple, f)?;
    let (series, horizon) = match mode {
        HorizonMode::FixedHorizon => (SeriesKind::VnPrime, 0.0),
        HorizonMode::GrowingHorizon => (SeriesKind::VnBarPrime, -1.0),
    };
    if x.c == 0.0 {
        return Ok(RegimeVerdict::not_covered(series, "rescaled statements need c > 0"));
    }
    if !x.bounded {
        return Ok(RegimeVerdict::not_covered(series, "rescaled statements need bounded f"));
    }
    let th = match mode {
        HorizonMode::FixedHorizon => Theorem::T2_2ii,
        HorizonMode::GrowingHorizon => Theorem::T3_1,
    };
    let v = gaussian_expectation(triple, f)?;
    Ok(RegimeVerdict::new(th, series, 1.0, Centering::None, Limit::DeterministicSlope { value: v }).horizon(horizon))
}

/// Every CLT that applies to `series` (one of `Vn`, `VnPrime`, `VnBar`,
/// `VnBarPrime`). May be empty.
pub fn clt_verdicts(triple: &LevyTriple, f: &TestFunction, series: SeriesKind) -> Result<Vec<RegimeVerdict>> {
    let x = Facts::new(triple, f)?;
    match series {
        SeriesKind::Vn | SeriesKind::PiN | SeriesKind::PiNTrunc => clt_fixed(&x, f),
        SeriesKind::VnPrime => clt_fixed_rescaled(&x, f),
        SeriesKind::VnBar => clt_growing(&x, f),
        SeriesKind::VnBarPrime => clt_growing_rescaled(&x, f),
        SeriesKind::Discretized => Ok(Vec::new()),
    }
}

/// The first applicable CLT, or `NotCovered` with the reason.
pub fn classify_clt(triple: &LevyTriple, f: &TestFunction, series: SeriesKind) -> Result<RegimeVerdict> {
    let list = clt_verdicts(triple, f, series)?;
    if list.is_empty() {
        let x = Facts::new(triple, f)?;
        let reason = if x.c == 0.0 {
            "c = 0: a CLT around a random limit does not exist in general".to_string()
        } else if f.class_r().is_some_and(|r| r > 2.0 && r <= 3.0) {
            "f in E_r for 2 < r <= 3: no CLT statement (tight only at r = 3)".to_string()
        } else {
            format!("no CLT statement for {f} under this model")
        };
        return Ok(RegimeVerdict::not_covered(series, reason));
    }
    Ok(primary(list))
}

/// Choose `s ∈ I ∩ (1, 2)` for the o(1) bounds when `1 ∉ I`.
fn bound_exponent(jm: &JumpMeasure) -> Option<f64> {
    let i = jm.index_set();
    if i.lower >= 2.0 || i.contains(1.0) {
        return None;
    }
    let lo = i.lower.max(1.0);
    Some(if i.closed && i.lower > 1.0 { lo } else { lo + 0.1 * (2.0 - lo) })
}

fn clt_fixed(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let s = SeriesKind::Vn;
    let mut out = Vec::new();
    let Some(r) = x.r else { return Ok(out) };
    let c = x.c;
    let class = f.class();
    if c > 0.0 {
        if eq(r, 2.0) && class.equals_power_near_zero && class.c1_everywhere {
            out.push(
                RegimeVerdict::new(
                    Theorem::T2_6c,
                    s,
                    -0.5,
                    Centering::JumpFunctional { drift_rate: c },
                    Limit::RandomCltZ { brownian_part: true },
                )
                .role(JointRole::JumpCentred),
            );
        } else if class.c1_everywhere && class.second_derivative_small && r > 3.0 {
            out.push(
                RegimeVerdict::new(
                    Theorem::T2_6b,
                    s,
                    -0.5,
                    Centering::JumpFunctional { drift_rate: 0.0 },
                    Limit::RandomCltZ { brownian_part: false },
                )
                .role(JointRole::JumpCentred),
            );
        }
        if r < 1.0 || x.no_jumps {
            let var = c.powf(r) * (abs_normal_moment(2.0 * r) - abs_normal_moment(r).powi(2));
            let g = if f.is_bounded() { *f } else { phi(r)? };
            let a = 0.5 - r / 2.0;
            out.push(
                RegimeVerdict::new(
                    Theorem::T2_5i,
                    s,
                    a,
                    Centering::HCenter { function: CenterFunction::plain(g), rescaled: false, source: CenteringSource::Exact },
                    Limit::CltVariance { v: var },
                )
                .role(JointRole::JPrime { r })
                .note("(i1) H-centred"),
            );
            let slope = Centering::DeterministicSlope { value: c.powf(r / 2.0) * abs_normal_moment(r), delta_power: r / 2.0 };
            if x.one_in_i {
                out.push(
                    RegimeVerdict::new(Theorem::T2_5i, s, a, slope, Limit::CltVariance { v: var })
                        .role(JointRole::JPrime { r })
                        .note("(i2) deterministic centering"),
                );
            } else if let Some(sx) = bound_exponent(x.jm) {
                out.push(
                    RegimeVerdict::new(Theorem::T2_5i, s, (sx - r) / 2.0, slope, Limit::VanishingBound { exponent: 1.0 - sx / 2.0 })
                        .note(format!("(i2) 1 not in I: only the o(1) bound with s = {sx}")),
                );
            }
        }
        if eq(r, 1.0) && x.ae_cont {
            let mut v = RegimeVerdict::new(
                Theorem::T2_4ii,
                s,
                0.0,
                Centering::HCenter { function: centred_product(f), rescaled: false, source: CenteringSource::Exact },
                Limit::CltVariance { v: c * (1.0 - 2.0 / PI) },
            );
            if !x.no_jumps {
                v = v.note("limit is Sigma(f, phi) + W'; the variance is that of W'");
            }
            out.push(v);
        }
    } else if r < 1.0 && !x.in_i(2.0 * r) {
        let g = CenterFunction::plain(phi(r)?);
        out.push(
            RegimeVerdict::new(
                Theorem::T2_4i,
                s,
                1.0,
                Centering::HCenter { function: g, rescaled: false, source: CenteringSource::Exact },
                Limit::CltVariance { v: 1.0 },
            )
            .normalizer(RateNormalizer::InverseSqrtGamma { function: g })
            .note("normalisation by Gamma_delta(phi_r) is estimated; its noise is outside the statement"),
        );
    }
    Ok(out)
}

fn clt_fixed_rescaled(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let s = SeriesKind::VnPrime;
    let mut out = Vec::new();
    if x.c == 0.0 || !x.bounded {
        return Ok(out);
    }
    let var = gaussian_variance(x.triple, f)?;
    out.push(
        RegimeVerdict::new(
            Theorem::T2_5ii,
            s,
            0.5,
            Centering::HCenter { function: CenterFunction::plain(*f), rescaled: true, source: CenteringSource::Exact },
            Limit::CltVariance { v: var },
        )
        .role(JointRole::JDoublePrime)
        .note("(ii1)"),
    );
    if f.is_even() {
        let g = Centering::GaussianExpectation { value: gaussian_expectation(x.triple, f)? };
        if x.one_in_i {
            out.push(
                RegimeVerdict::new(Theorem::T2_5ii, s, 0.5, g, Limit::CltVariance { v: var })
                    .role(JointRole::JDoublePrime)
                    .note("(ii2) deterministic centering"),
            );
        } else if let Some(sx) = bound_exponent(x.jm) {
            out.push(
                RegimeVerdict::new(Theorem::T2_5ii, s, 1.0 - (1.0 - sx / 2.0), g, Limit::VanishingBound { exponent: 1.0 - sx / 2.0 })
                    .note(format!("(ii2) 1 not in I: only the o(1) bound with s = {sx}")),
            );
        }
    }
    Ok(out)
}

fn clt_growing(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let s = SeriesKind::VnBar;
    let mut out = Vec::new();
    let Some(r) = x.r else { return Ok(out) };
    if !x.bounded {
        return Ok(out);
    }
    let hf = Centering::HCenter { function: CenterFunction::plain(*f), rescaled: false, source: CenteringSource::Exact };
    let c = x.c;
    if x.ae_cont && (r > 1.0 || (r < 1.0 && x.in_i(2.0 * r) && c == 0.0)) {
        let v = jump_integral_sq(x.jm, f)?;
        out.push(RegimeVerdict::new(Theorem::T3_2, s, 0.0, hf.clone(), Limit::CltVariance { v }).horizon(-0.5).note("(i)"));
    }
    if eq(r, 1.0) && x.ae_cont {
        let v = jump_integral_sq(x.jm, f)? + c * (1.0 - 2.0 / PI);
        out.push(RegimeVerdict::new(Theorem::T3_2, s, 0.0, hf.clone(), Limit::CltVariance { v }).horizon(-0.5).note("(ii)"));
    }
    if r < 1.0 && (c > 0.0 || !x.in_i(2.0 * r)) {
        let g = CenterFunction::plain(*f);
        out.push(
            RegimeVerdict::new(Theorem::T3_2, s, 0.5, hf, Limit::CltVariance { v: 1.0 })
                .horizon(-0.5)
                .normalizer(RateNormalizer::InverseSqrtGamma { function: g })
                .note("(iii)"),
        );
    }
    if c > 0.0 && (r < 1.0 || x.no_jumps) {
        let var = c.powf(r) * (abs_normal_moment(2.0 * r) - abs_normal_moment(r).powi(2));
        out.push(
            RegimeVerdict::new(
                Theorem::T3_3,
                s,
                0.5 - r / 2.0,
                Centering::HCenter { function: CenterFunction::plain(phi(r)?), rescaled: false, source: CenteringSource::Exact },
                Limit::CltVariance { v: var },
            )
            .horizon(-0.5)
            .role(JointRole::JPrime { r }),
        );
    }
    Ok(out)
}

fn clt_growing_rescaled(x: &Facts, f: &TestFunction) -> Result<Vec<RegimeVerdict>> {
    let mut out = Vec::new();
    if x.c == 0.0 || !x.bounded {
        return Ok(out);
    }
    let var = gaussian_variance(x.triple, f)?;
    out.push(
        RegimeVerdict::new(
            Theorem::T3_3,
            SeriesKind::VnBarPrime,
            0.5,
            Centering::HCenter { function: CenterFunction::plain(*f), rescaled: true, source: CenteringSource::Exact },
            Limit::CltVariance { v: var },
        )
        .horizon(-0.5)
        .role(JointRole::JDoublePrime),
    );
    Ok(out)
}

/// `Var` of a CLT verdict's limit per unit time.
pub fn predicted_clt_variance(verdict: &RegimeVerdict) -> Result<f64> {
    match &verdict.limit {
        Limit::CltVariance { v } => Ok(*v),
        _ => Err(Error::NotClt(format!("{:?} has no scalar CLT variance", verdict.theorem))),
    }
}

/// Joint covariance of `J'` and `J''` components.
pub fn predicted_clt_covariance(
    verdicts: &[RegimeVerdict],
    triple: &LevyTriple,
    fs: &[TestFunction],
) -> Result<Vec<Vec<f64>>> {
    if verdicts.len() != fs.len() {
        return Err(Error::Config(format!("{} verdicts for {} functions", verdicts.len(), fs.len())));
    }
    let c = triple.gauss_var_c;
    let sigma = triple.sigma();
    let roles: Vec<JointRole> = verdicts
        .iter()
        .enumerate()
        .map(|(i, v)| match v.joint_role {
            Some(role @ (JointRole::JPrime { .. } | JointRole::JDoublePrime)) if !matches!(v.limit, Limit::VanishingBound { .. }) => Ok(role),
            _ => Err(Error::NotJointComponent { index: i, reason: format!("{:?} is neither J' nor J''", v.theorem) }),
        })
        .collect::<Result<_>>()?;
    let d = fs.len();
    let mut m = vec![vec![0.0; d]; d];
    let mean_f: Vec<Option<f64>> = roles
        .iter()
        .zip(fs)
        .map(|(role, f)| match role {
            JointRole::JDoublePrime => gaussian_expectation(triple, f).map(Some),
            _ => Ok(None),
        })
        .collect::<Result<_>>()?;
    for j in 0..d {
        for k in j..d {
            let v = match (roles[j], roles[k]) {
                (JointRole::JPrime { r: rj }, JointRole::JPrime { r: rk }) => {
                    c.powf((rj + rk) / 2.0)
                        * (abs_normal_moment(rj + rk) - abs_normal_moment(rj) * abs_normal_moment(rk))
                }
                (JointRole::JDoublePrime, JointRole::JDoublePrime) => {
                    let mut b = fs[j].breakpoints();
                    b.extend(fs[k].breakpoints());
                    let e = normal_expectation(|x| fs[j].eval(x) * fs[k].eval(x), 0.0, sigma, &b, quad())?;
                    e - mean_f[j].unwrap() * mean_f[k].unwrap()
                }
                (JointRole::JPrime { r }, JointRole::JDoublePrime) => cross(c, r, &fs[k], mean_f[k].unwrap())?,
                (JointRole::JDoublePrime, JointRole::JPrime { r }) => cross(c, r, &fs[j], mean_f[j].unwrap())?,
                _ => unreachable!(),
            };
            m[j][k] = v;
            m[k][j] = v;
        }
    }
    Ok(m)
}

/// `E(|σU|^r g(σU)) − c^{r/2} μ_r E g(σU)`.
fn cross(c: f64, r: f64, g: &TestFunction, mean_g: f64) -> Result<f64> {
    let e = normal_expectation(|x| x.abs().powf(r) * g.eval(x), 0.0, c.sqrt(), &g.breakpoints(), quad())?;
    Ok(e - c.powf(r / 2.0) * abs_normal_moment(r) * mean_g)
}

/// Joint verdict for `J' ∪ J''` components.
pub fn joint_verdict(triple: &LevyTriple, fs: &[TestFunction], series: &[SeriesKind]) -> Result<RegimeVerdict> {
    if fs.len() != series.len() || fs.len() < 2 {
        return Err(Error::Config("a joint CLT needs at least two components".into()));
    }
    let growing = series.iter().any(|s| matches!(s, SeriesKind::VnBar | SeriesKind::VnBarPrime));
    let mut comps = Vec::with_capacity(fs.len());
    for (i, (f, s)) in fs.iter().zip(series).enumerate() {
        let v = clt_verdicts(triple, f, *s)?
            .into_iter()
            .find(|v| matches!(v.joint_role, Some(JointRole::JPrime { .. } | JointRole::JDoublePrime)) && v.notes.iter().all(|n| !n.starts_with("(i2)") && !n.starts_with("(ii2)")))
            .ok_or_else(|| Error::NotJointComponent { index: i, reason: format!("{f} on {s:?} is neither J' nor J''") })?;
        comps.push(v);
    }
    let matrix = predicted_clt_covariance(&comps, triple, fs)?;
    let th = if growing { Theorem::T3_3 } else { Theorem::T2_7 };
    let mut v = RegimeVerdict::new(th, series[0], 0.0, Centering::None, Limit::CltCovariance { matrix });
    v.notes = comps.iter().map(|c| format!("{:?} {:?}", c.theorem, c.joint_role)).collect();
    Ok(v)
}

/// Which statement governs `(V^n(f) − V(f)^{(n)})/√Δ`.
pub fn conditional_clt_kind(triple: &LevyTriple, f: &TestFunction) -> Result<Theorem> {
    let list = clt_verdicts(triple, f, SeriesKind::Vn)?;
    list.iter()
        .map(|v| v.theorem)
        .find(|t| matches!(t, Theorem::T2_6b | Theorem::T2_6c))
        .ok_or_else(|| {
            Error::Inadmissible(format!(
                "{f}: needs C1 with f = x^2 near 0, or C1 and C2 near 0 with f'' = o(|x|), and c > 0"
            ))
        })
}

/// Conditional variance, given the jumps, of the limit at time `t`:
/// `c Σ f'(ΔX_s)²` over jumps up to `t`, plus `2c²t` when `f = x²` near 0.
pub fn conditional_z_variance(triple: &LevyTriple, f: &TestFunction, jumps: &[Jump], t: f64) -> Result<f64> {
    let kind = conditional_clt_kind(triple, f)?;
    let c = triple.gauss_var_c;
    let mut v = 0.0;
    for j in jumps.iter().filter(|j| j.time <= t) {
        v += f.eval_deriv(j.size)?.powi(2);
    }
    v *= c;
    if kind == Theorem::T2_6c {
        v += 2.0 * c * c * t;
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmallTimeRegime {
    /// `H_t(f)/t → c + F(f)`, `|b̄| + F(f)` or `F(f)`.
    Linear,
    /// `t^{-r/2} H_t(f) → c^{r/2} μ_r`.
    Brownian,
    /// `t^{-r} H_t(f) → |b̄|^r`.
    Drift,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallTimePrediction {
    pub value: f64,
    pub regime: SmallTimeRegime,
}

/// Leading-order prediction of `H_t(f)` as `t → 0`.
pub fn h_small_time(triple: &LevyTriple, f: &TestFunction, t: f64) -> Result<SmallTimePrediction> {
    let x = Facts::new(triple, f)?;
    let Some(r) = x.r else {
        return Err(Error::NoSmallTimeRegime(format!("{f} has no power behaviour at 0")));
    };
    let c = x.c;
    if c > 0.0 && ((r < 2.0 && (x.bounded || x.no_jumps)) || x.no_jumps) {
        return Ok(SmallTimePrediction {
            value: t.powf(r / 2.0) * c.powf(r / 2.0) * abs_normal_moment(r),
            regime: SmallTimeRegime::Brownian,
        });
    }
    if c == 0.0 && x.one_in_i && r < 1.0 && x.bounded && !x.bbar_zero {
        let b = x.bbar.unwrap_or(0.0).abs();
        return Ok(SmallTimePrediction { value: t.powf(r) * b.powf(r), regime: SmallTimeRegime::Drift });
    }
    if x.ae_cont {
        let linear = |k: f64| -> Result<SmallTimePrediction> {
            Ok(SmallTimePrediction { value: t * (k + jump_integral(x.jm, f)?), regime: SmallTimeRegime::Linear })
        };
        if eq(r, 2.0) && x.bounded {
            return linear(c);
        }
        if c == 0.0 && eq(r, 1.0) && x.bounded && x.one_in_i {
            return linear(x.bbar.unwrap_or(0.0).abs());
        }
        let zero_rate = r > 2.0
            || (c == 0.0 && r > 1.0 && r < 2.0 && x.in_i(r))
            || (c == 0.0 && r > 1.0 && x.one_in_i)
            || (c == 0.0 && r < 1.0 && x.in_i(r) && x.bbar_zero);
        if zero_rate {
            return linear(0.0);
        }
    }
    Err(Error::NoSmallTimeRegime(format!("{f} under this model")))
}

/// Largest support of the jump-sum law kept in the exact computation.
const MAX_ATOMS: usize = 20_000;

/// `E g(X_t)` computed from the exact law of `X_t`, when the model allows:
/// no jumps, or compound Poisson with point-mass or Gaussian jumps (a
/// Poisson mixture of convolutions). `None` otherwise.
pub fn exact_h<G: Fn(f64) -> f64>(triple: &LevyTriple, g: G, breaks: &[f64], t: f64) -> Option<Result<f64>> {
    let c = triple.gauss_var_c;
    let opts = QuadratureOptions::tight();
    let opts = QuadratureOptions { rel_tol: 1e-11, abs_tol: 1e-15, ..opts };
    let gauss = |mean: f64, var: f64| normal_expectation(&g, mean, var.max(0.0).sqrt(), breaks, opts);
    match &triple.jump_measure {
        JumpMeasure::NoJumps => Some(gauss(triple.drift_b * t, c * t)),
        JumpMeasure::CompoundPoisson { intensity, jump_law } => {
            let bbar = triple.genuine_drift()?;
            let lam = intensity * t;
            if lam > 700.0 {
                return None;
            }
            let mut total = 0.0;
            let mut pmf = (-lam).exp();
            let mut atoms: Vec<(f64, f64)> = vec![(0.0, 1.0)];
            let mut k = 0u32;
            loop {
                let term = match jump_law {
                    JumpLaw::PointMasses { .. } => {
                        let mut s = 0.0;
                        for &(v, w) in &atoms {
                            match gauss(bbar * t + v, c * t) {
                                Ok(e) => s += w * e,
                                Err(e) => return Some(Err(e)),
                            }
                        }
                        s
                    }
                    JumpLaw::Gaussian { mean, sd } => {
                        match gauss(bbar * t + k as f64 * mean, c * t + k as f64 * sd * sd) {
                            Ok(e) => e,
                            Err(e) => return Some(Err(e)),
                        }
                    }
                    JumpLaw::Uniform { .. } => return None,
                };
                total += pmf * term;
                // Poisson tail beyond k is at most pmf·(k+1)/(k+1−λ) once k+1 > λ
                let kk = k as f64 + 1.0;
                if (kk > lam && pmf * kk / (kk - lam) < 1e-17) || k > 10_000 {
                    break;
                }
                k += 1;
                pmf *= lam / k as f64;
                if let JumpLaw::PointMasses { atoms: law } = jump_law {
                    atoms = convolve(&atoms, law);
                    if atoms.len() > MAX_ATOMS {
                        return None;
                    }
                }
            }
            Some(Ok(total))
        }
        JumpMeasure::PowerLawSmallJumps { .. } => None,
    }
}

fn convolve(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(a.len() * b.len());
    for &(x, p) in a {
        for &(y, q) in b {
            out.push((x + y, p * q));
        }
    }
    out.sort_by(|l, r| l.0.total_cmp(&r.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (v, w) in out {
        match merged.last_mut() {
            Some(last) if (last.0 - v).abs() <= 1e-12 * (1.0 + v.abs()) => last.1 += w,
            _ => merged.push((v, w)),
        }
    }
    merged
}

/// Exact per-step centering `H_Δ(g)` or `E g(X_Δ/√Δ)`, when available.
pub fn exact_center(triple: &LevyTriple, g: &CenterFunction, rescaled: bool, delta: f64) -> Option<Result<f64>> {
    if rescaled {
        let s = delta.sqrt();
        let breaks: Vec<f64> = g.breakpoints().iter().map(|b| b * s).collect();
        exact_h(triple, |x| g.eval(x / s), &breaks, delta)
    } else {
        exact_h(triple, |x| g.eval(x), &g.breakpoints(), delta)
    }
}

/// Exact `Γ_t(g) = H_t(g²) − H_t(g)²`, when available.
pub fn exact_gamma(triple: &LevyTriple, g: &CenterFunction, t: f64) -> Option<Result<f64>> {
    let b = g.breakpoints();
    let m = exact_h(triple, |x| g.eval(x), &b, t)?;
    let m2 = exact_h(triple, |x| g.eval(x).powi(2), &b, t)?;
    Some(m.and_then(|m| m2.map(|m2| (m2 - m * m).max(0.0))))
}

/// Limit of the `T2_3` centering slope `H_Δ(fφ)/Δ`: `F(fφ)`, plus `|b̄|`
/// when `r = 1` and `c = 0`.
pub fn centering_slope_limit(triple: &LevyTriple, f: &TestFunction) -> Result<f64> {
    let g = centred_product(f);
    let order = f.class_r();
    let ff = triple.jump_measure.integrate(|x| g.eval(x), order, &g.breakpoints())?;
    let extra = match (f.class_r(), triple.genuine_drift()) {
        (Some(r), Some(b)) if eq(r, 1.0) && triple.gauss_var_c == 0.0 => b.abs(),
        _ => 0.0,
    };
    Ok(ff + extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy_model::JumpLaw;

    fn cp_pair() -> JumpMeasure {
        JumpMeasure::compound_poisson(1.0, JumpLaw::symmetric_pair(1.0).unwrap()).unwrap()
    }

    #[test]
    fn classify_examples() {
        let t = LevyTriple::new(0.0, 1.0, cp_pair()).unwrap();
        let v = classify(&t, &TestFunction::power_abs(2.0).unwrap(), HorizonMode::FixedHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T2_1b);
        assert_eq!(v.limit, Limit::JumpFunctionalPlusDrift { rate: 1.0 });

        // b̄ = 2 with symmetric jumps
        let t = LevyTriple::new(2.0, 0.0, cp_pair()).unwrap();
        let v = classify(&t, &TestFunction::power_abs(1.0).unwrap(), HorizonMode::FixedHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T2_1c);
        assert_eq!(v.limit, Limit::JumpFunctionalPlusDrift { rate: 2.0 });

        let t = LevyTriple::brownian(1.0).unwrap();
        let v = classify(&t, &TestFunction::power_abs(0.5).unwrap(), HorizonMode::FixedHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T2_2i);
        assert!((v.normalization_exponent - 0.75).abs() < 1e-15);
        let Limit::DeterministicSlope { value } = v.limit else { panic!() };
        assert!((value - abs_normal_moment(0.5)).abs() < 1e-15);
    }

    #[test]
    fn clt_variance_examples() {
        let t = LevyTriple::brownian(1.0).unwrap();
        let v = classify_clt(&t, &TestFunction::power_abs(0.5).unwrap(), SeriesKind::Vn).unwrap();
        assert_eq!(v.theorem, Theorem::T2_5i);
        let oracle = normal_expectation(|x| x.abs(), 0.0, 1.0, &[0.0], QuadratureOptions::tight()).unwrap()
            - normal_expectation(|x| x.abs().sqrt(), 0.0, 1.0, &[0.0], QuadratureOptions::tight()).unwrap().powi(2);
        assert!((predicted_clt_variance(&v).unwrap() - oracle).abs() < 1e-12);
        assert!((oracle - 0.121_906).abs() < 1e-6);

        let v = classify_clt(&t, &TestFunction::phi(1.0).unwrap(), SeriesKind::Vn).unwrap();
        let all = clt_verdicts(&t, &TestFunction::phi(1.0).unwrap(), SeriesKind::Vn).unwrap();
        let t24 = all.iter().find(|v| v.theorem == Theorem::T2_4ii).unwrap();
        assert!((predicted_clt_variance(t24).unwrap() - 0.363_38).abs() < 5e-6);
        assert!(v.is_clt());
    }

    #[test]
    fn rescaled_variance_matches_quadrature() {
        let t = LevyTriple::brownian(1.0).unwrap();
        let f = TestFunction::phi(2.0).unwrap();
        let v = classify_clt(&t, &f, SeriesKind::VnPrime).unwrap();
        assert_eq!(v.theorem, Theorem::T2_5ii);
        // E(1∧U²) = 1 − 2[φ(1) − (1 − Φ(1))]... checked against a plain
        // trapezoid sum over a fine grid
        let h = 1e-4;
        let (mut m1, mut m2) = (0.0, 0.0);
        let mut x = -12.0;
        while x < 12.0 {
            let w = (-x * x / 2.0f64).exp() / (2.0 * PI).sqrt() * h;
            let fx = (x * x).min(1.0);
            m1 += w * fx;
            m2 += w * fx * fx;
            x += h;
        }
        assert!((predicted_clt_variance(&v).unwrap() - (m2 - m1 * m1)).abs() < 1e-6);
    }

    #[test]
    fn cross_covariance_matches_trapezoid_oracle() {
        let t = LevyTriple::brownian(1.0).unwrap();
        let fs = [TestFunction::power_abs(0.5).unwrap(), TestFunction::phi(2.0).unwrap()];
        let v = joint_verdict(&t, &fs, &[SeriesKind::Vn, SeriesKind::VnPrime]).unwrap();
        let Limit::CltCovariance { matrix } = &v.limit else { panic!() };
        let h = 1e-5;
        let (mut a, mut b, mut m) = (0.0, 0.0, 0.0);
        let mut x = -12.0;
        while x < 12.0 {
            let w = (-x * x / 2.0f64).exp() / (2.0 * PI).sqrt() * h;
            let g = (x * x).min(1.0);
            a += w * x.abs().sqrt() * g;
            b += w * g;
            m += w * x.abs().sqrt();
            x += h;
        }
        let expect = a - m * b;
        assert!((matrix[0][1] - expect).abs() < 1e-5, "{} vs {expect}", matrix[0][1]);
        assert!((matrix[0][0] - 0.121_906).abs() < 1e-6);
        v.check().unwrap();
    }

    #[test]
    fn conditional_variance_examples() {
        let f = TestFunction::square_near_zero(2.0).unwrap();
        let bm = LevyTriple::brownian(1.0).unwrap();
        assert_eq!(conditional_z_variance(&bm, &f, &[], 1.0).unwrap(), 2.0);
        let t = LevyTriple::new(0.0, 1.0, cp_pair()).unwrap();
        let jumps = [Jump { time: 0.2, size: 1.0 }, Jump { time: 0.6, size: -1.0 }];
        assert_eq!(conditional_z_variance(&t, &f, &jumps, 1.0).unwrap(), 10.0);
        let p4 = TestFunction::cubic_plus(4.0).unwrap();
        assert_eq!(conditional_z_variance(&bm, &p4, &[], 1.0).unwrap(), 0.0);
        let p25 = TestFunction::power_abs(2.5).unwrap();
        assert!(matches!(conditional_z_variance(&bm, &p25, &[], 1.0), Err(Error::Inadmissible(_))));
    }

    #[test]
    fn remark_6_range_is_refused() {
        let bm = LevyTriple::brownian(1.0).unwrap();
        let v = classify_clt(&bm, &TestFunction::power_abs(2.5).unwrap(), SeriesKind::Vn).unwrap();
        // no jumps: T2_5i covers every r; with jumps the range is refused
        assert_eq!(v.theorem, Theorem::T2_5i);
        let t = LevyTriple::new(0.0, 1.0, cp_pair()).unwrap();
        let v = classify_clt(&t, &TestFunction::power_abs(2.5).unwrap(), SeriesKind::Vn).unwrap();
        assert_eq!(v.theorem, Theorem::NotCovered);
        assert!(v.reason.unwrap().contains("2 < r <= 3"));
    }

    #[test]
    fn c_zero_random_limit_clt_is_not_covered() {
        let t = LevyTriple::new(0.0, 0.0, cp_pair()).unwrap();
        let v = classify_clt(&t, &TestFunction::power_abs(2.0).unwrap(), SeriesKind::Vn).unwrap();
        assert_eq!(v.theorem, Theorem::NotCovered);
    }

    #[test]
    fn t2_4i_for_high_activity_pure_jump() {
        let pl = JumpMeasure::power_law(1.1, 1.0, 1.0, true).unwrap();
        let t = LevyTriple::new(0.0, 0.0, pl).unwrap();
        let v = classify_clt(&t, &TestFunction::phi(0.5).unwrap(), SeriesKind::Vn).unwrap();
        assert_eq!(v.theorem, Theorem::T2_4i);
        assert!(matches!(v.normalizer, RateNormalizer::InverseSqrtGamma { .. }));
    }

    #[test]
    fn t2_1iii_when_nothing_else_applies() {
        let pl = JumpMeasure::power_law(1.5, 1.0, 1.0, true).unwrap();
        let t = LevyTriple::new(0.0, 0.0, pl).unwrap();
        let v = classify(&t, &TestFunction::power_abs(0.5).unwrap(), HorizonMode::FixedHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T2_1iii);
        // r = 1: the centred statement applies as well and takes precedence
        let all = applicable_lln(&t, &TestFunction::power_abs(1.0).unwrap(), HorizonMode::FixedHorizon).unwrap();
        let kinds: Vec<Theorem> = all.iter().map(|v| v.theorem).collect();
        assert_eq!(kinds, vec![Theorem::T2_3, Theorem::T2_1iii]);
    }

    #[test]
    fn small_time_examples() {
        let bm = LevyTriple::brownian(1.0).unwrap();
        let p = h_small_time(&bm, &TestFunction::phi(0.5).unwrap(), 0.01).unwrap();
        assert_eq!(p.regime, SmallTimeRegime::Brownian);
        assert!((p.value - 0.01f64.powf(0.25) * abs_normal_moment(0.5)).abs() < 1e-15);

        let t = LevyTriple::new(2.0, 0.0, cp_pair()).unwrap();
        let p = h_small_time(&t, &TestFunction::phi(0.5).unwrap(), 1e-4).unwrap();
        assert_eq!(p.regime, SmallTimeRegime::Drift);
        assert!((p.value - 1e-2 * 2f64.sqrt()).abs() < 1e-15);

        let t = LevyTriple::new(0.0, 0.0, cp_pair()).unwrap();
        let p = h_small_time(&t, &TestFunction::phi(2.0).unwrap(), 1e-3).unwrap();
        assert_eq!(p.regime, SmallTimeRegime::Linear);
        assert!((p.value - 1e-3).abs() < 1e-12);
    }

    #[test]
    fn small_time_prediction_matches_exact_law() {
        let t = LevyTriple::new(2.0, 0.0, cp_pair()).unwrap();
        let f = TestFunction::phi(0.5).unwrap();
        for dt in [1e-3, 1e-4, 1e-5] {
            let exact = exact_h(&t, |x| f.eval(x), &f.breakpoints(), dt).unwrap().unwrap();
            let approx = h_small_time(&t, &f, dt).unwrap().value;
            // the correction is t·F(f), relative size √t here
            assert!((exact / approx - 1.0).abs() < 2.0 * dt.sqrt(), "{dt}: {exact} {approx}");
        }
    }

    #[test]
    fn exact_h_brownian_moments() {
        let t = LevyTriple::brownian(2.0).unwrap();
        let v = exact_h(&t, |x| x * x, &[0.0], 0.5).unwrap().unwrap();
        assert!((v - 1.0).abs() < 1e-12);
        let v = exact_h(&t, |x| x.abs().sqrt(), &[0.0], 0.5).unwrap().unwrap();
        assert!((v - abs_normal_moment(0.5)).abs() < 1e-11);
    }

    #[test]
    fn exact_h_compound_poisson_second_moment() {
        // E X_t² = t(c + λ E J²) + (b̄t)² for symmetric jumps
        let law = JumpLaw::Gaussian { mean: 0.0, sd: 1.0 };
        let t = LevyTriple::new(0.5, 2.0, JumpMeasure::compound_poisson(3.0, law).unwrap()).unwrap();
        let v = exact_h(&t, |x| x * x, &[0.0], 0.25).unwrap().unwrap();
        assert!((v - (0.25 * (2.0 + 3.0) + 0.125f64.powi(2))).abs() < 1e-10, "{v}");

        let pm = LevyTriple::new(0.0, 1.0, cp_pair()).unwrap();
        let v = exact_h(&pm, |x| x * x, &[0.0], 0.5).unwrap().unwrap();
        assert!((v - 0.5 * 2.0).abs() < 1e-10, "{v}");
    }

    #[test]
    fn remark1_centering_slope_agrees_with_lln() {
        // r = 1.5, c = 0, CP: T2_1a and T2_3 both apply
        let law = JumpLaw::Gaussian { mean: 0.3, sd: 0.8 };
        let t = LevyTriple::new(0.0, 0.0, JumpMeasure::compound_poisson(2.0, law).unwrap()).unwrap();
        let f = TestFunction::phi(1.5).unwrap();
        let kinds: Vec<Theorem> = applicable_lln(&t, &f, HorizonMode::FixedHorizon).unwrap().iter().map(|v| v.theorem).collect();
        assert!(kinds.contains(&Theorem::T2_1a) && kinds.contains(&Theorem::T2_3));
        let slope = centering_slope_limit(&t, &f).unwrap();
        let dt = 1e-6;
        let h = exact_h(&t, |x| f.eval(x), &f.breakpoints(), dt).unwrap().unwrap();
        assert!((h / dt - slope).abs() < 1e-3 * slope, "{} vs {slope}", h / dt);
        let ff = jump_integral(&t.jump_measure, &f).unwrap();
        assert!((slope - ff).abs() < 1e-9);
    }

    #[test]
    fn long_horizon_slope() {
        let t = LevyTriple::new(0.0, 1.0, cp_pair()).unwrap();
        let v = classify(&t, &TestFunction::phi(2.0).unwrap(), HorizonMode::GrowingHorizon).unwrap();
        assert_eq!(v.theorem, Theorem::T3_1);
        assert_eq!(v.horizon_exponent, -1.0);
        let Limit::DeterministicSlope { value } = v.limit else { panic!() };
        assert!((value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn verdict_serialises() {
        let t = LevyTriple::brownian(1.0).unwrap();
        let v = classify_clt(&t, &TestFunction::power_abs(0.5).unwrap(), SeriesKind::Vn).unwrap();
        let s = serde_json::to_string(&v).unwrap();
        let back: RegimeVerdict = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
