//! Test functions `f` fed to the variation functionals, with the growth and
//! smoothness metadata the regime oracle branches on.
//!
//! Metadata is derived from the functional form and then checked against
//! sampled values, so a mis-tagged function is rejected at construction.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::levy_model::{phi_r, JumpMeasure};

/// Functional form of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum FunctionForm {
    /// `|x|^r`
    PowerAbs { r: f64 },
    /// `|x|^r 1{|x| ≤ a}`; `a = inf` gives `PowerAbs`.
    TruncatedPower { r: f64, a: f64 },
    /// `1 ∧ |x|^r`, and the constant 1 when `r = 0`.
    PhiR { r: f64 },
    /// `|x|^r ψ_η(x)` with the smooth cutoff of [`CutoffFamily`].
    SmoothTruncatedPower { r: f64, eta: f64 },
    /// `x²` on `[-k, k]`, continued linearly with matching value and slope.
    SquareNearZero { k: f64 },
    /// `|x|^p` with `p > 3`.
    CubicPlus { p: f64 },
}

impl fmt::Display for FunctionForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FunctionForm::PowerAbs { r } => write!(f, "|x|^{r}"),
            FunctionForm::TruncatedPower { r, a } => write!(f, "|x|^{r}·1{{|x|<={a}}}"),
            FunctionForm::PhiR { r } => write!(f, "phi_{r}"),
            FunctionForm::SmoothTruncatedPower { r, eta } => write!(f, "|x|^{r}·psi_{eta}"),
            FunctionForm::SquareNearZero { k } => write!(f, "square_near_zero(k={k})"),
            FunctionForm::CubicPlus { p } => write!(f, "|x|^{p} (p>3)"),
        }
    }
}

/// Regularity of `f` on a neighbourhood of the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Smoothness {
    C0,
    C1,
    C2,
}

/// What the oracle needs to know about `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionClass {
    /// The `r` with `f(x) ~ |x|^r` at the origin (`f ∈ E_r`), if any.
    pub class_r: Option<f64>,
    pub bounded: bool,
    pub even: bool,
    /// Regularity near 0.
    pub smoothness: Smoothness,
    /// `f ∈ C¹(ℝ)`.
    pub c1_everywhere: bool,
    /// `f''(x) = o(|x|)` as `x → 0`.
    pub second_derivative_small: bool,
    /// `f(x) = |x|^r` exactly on a neighbourhood of 0.
    pub equals_power_near_zero: bool,
    /// Continuous on all of ℝ.
    pub continuous: bool,
}

/// The `C²` bump family `ψ_η(x) = ψ(x/η)`, equal to 1 on `[-η, η]` and 0
/// outside `[-2η, 2η]`, with a quintic smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffFamily {
    pub eta: f64,
}

impl CutoffFamily {
    pub fn new(eta: f64) -> Result<Self> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(invalid("eta", format!("must be positive and finite, got {eta}")));
        }
        Ok(Self { eta })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x.abs() / self.eta - 1.0;
        if u <= 0.0 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            1.0 - smoothstep(u)
        }
    }

    pub fn deriv(&self, x: f64) -> f64 {
        let u = x.abs() / self.eta - 1.0;
        if u <= 0.0 || u >= 1.0 {
            0.0
        } else {
            -x.signum() * smoothstep_deriv(u) / self.eta
        }
    }

    /// `sup |ψ'_η| · η`.
    pub const DERIV_BOUND: f64 = 1.875;
}

fn smoothstep(u: f64) -> f64 {
    u * u * u * (10.0 + u * (-15.0 + 6.0 * u))
}

fn smoothstep_deriv(u: f64) -> f64 {
    30.0 * u * u * (1.0 - u) * (1.0 - u)
}

/// A test function with validated class metadata.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionForm", into = "FunctionForm")]
pub struct TestFunction {
    form: FunctionForm,
    class: FunctionClass,
}

impl TryFrom<FunctionForm> for TestFunction {
    type Error = Error;
    fn try_from(form: FunctionForm) -> Result<Self> {
        TestFunction::new(form)
    }
}

impl From<TestFunction> for FunctionForm {
    fn from(f: TestFunction) -> Self {
        f.form
    }
}

impl fmt::Display for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.form.fmt(f)
    }
}

fn positive(field: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

impl TestFunction {
    pub fn new(form: FunctionForm) -> Result<Self> {
        let class = derive_class(&form)?;
        let f = TestFunction { form, class };
        f.validate_class()?;
        Ok(f)
    }

    /// Build from a form plus externally claimed metadata; the claim is
    /// checked numerically and rejected if it disagrees with the form.
    pub fn with_claimed_class(form: FunctionForm, claimed: FunctionClass) -> Result<Self> {
        derive_class(&form)?;
        let f = TestFunction { form, class: claimed };
        f.validate_class()?;
        Ok(f)
    }

    pub fn power_abs(r: f64) -> Result<Self> {
        Self::new(FunctionForm::PowerAbs { r })
    }

    pub fn truncated_power(r: f64, a: f64) -> Result<Self> {
        Self::new(FunctionForm::TruncatedPower { r, a })
    }

    pub fn phi(r: f64) -> Result<Self> {
        Self::new(FunctionForm::PhiR { r })
    }

    pub fn smooth_truncated_power(r: f64, eta: f64) -> Result<Self> {
        Self::new(FunctionForm::SmoothTruncatedPower { r, eta })
    }

    pub fn square_near_zero(k: f64) -> Result<Self> {
        Self::new(FunctionForm::SquareNearZero { k })
    }

    pub fn cubic_plus(p: f64) -> Result<Self> {
        Self::new(FunctionForm::CubicPlus { p })
    }

    pub fn form(&self) -> &FunctionForm {
        &self.form
    }

    pub fn class(&self) -> &FunctionClass {
        &self.class
    }

    pub fn class_r(&self) -> Option<f64> {
        self.class.class_r
    }

    pub fn is_bounded(&self) -> bool {
        self.class.bounded
    }

    pub fn is_even(&self) -> bool {
        self.class.even
    }

    /// `f ∈ E_s`.
    pub fn in_e(&self, s: f64) -> bool {
        self.class.class_r == Some(s)
    }

    /// `f ∈ E'_s`, i.e. `f = O(|x|^s)` at 0.
    pub fn in_e_prime(&self, s: f64) -> bool {
        self.class.class_r.is_some_and(|r| r >= s)
    }

    /// `f ∈ E''_s`, i.e. `f = o(|x|^s)` at 0.
    pub fn in_e_double_prime(&self, s: f64) -> bool {
        self.class.class_r.is_some_and(|r| r > s)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.form {
            FunctionForm::PowerAbs { r } | FunctionForm::CubicPlus { p: r } => x.abs().powf(r),
            FunctionForm::TruncatedPower { r, a } => {
                if x.abs() <= a {
                    x.abs().powf(r)
                } else {
                    0.0
                }
            }
            FunctionForm::PhiR { r } => phi_r(x, r).unwrap_or(f64::NAN),
            FunctionForm::SmoothTruncatedPower { r, eta } => {
                let psi = CutoffFamily { eta }.eval(x);
                if psi == 0.0 {
                    0.0
                } else {
                    x.abs().powf(r) * psi
                }
            }
            FunctionForm::SquareNearZero { k } => {
                let ax = x.abs();
                if ax <= k {
                    x * x
                } else {
                    k * k + 2.0 * k * (ax - k)
                }
            }
        }
    }

    /// `f'(x)`, with the convention `f'(0) = 0` for power-like forms of
    /// order `r ≤ 1`. Forms with a jump or a kink away from 0 have no
    /// derivative.
    pub fn eval_deriv(&self, x: f64) -> Result<f64> {
        let power_deriv = |r: f64, x: f64| {
            if x == 0.0 {
                0.0
            } else {
                x.signum() * r * x.abs().powf(r - 1.0)
            }
        };
        match self.form {
            FunctionForm::PowerAbs { r } | FunctionForm::CubicPlus { p: r } => Ok(power_deriv(r, x)),
            FunctionForm::SmoothTruncatedPower { r, eta } => {
                let cut = CutoffFamily { eta };
                let psi = cut.eval(x);
                let dpsi = cut.deriv(x);
                let fx = if dpsi == 0.0 { 0.0 } else { x.abs().powf(r) };
                Ok(power_deriv(r, x) * psi + fx * dpsi)
            }
            FunctionForm::SquareNearZero { k } => {
                if x.abs() <= k {
                    Ok(2.0 * x)
                } else {
                    Ok(2.0 * k * x.signum())
                }
            }
            FunctionForm::TruncatedPower { r, a } if a.is_infinite() => Ok(power_deriv(r, x)),
            FunctionForm::PhiR { r: 0.0 } => Ok(0.0),
            FunctionForm::TruncatedPower { .. } | FunctionForm::PhiR { .. } => {
                Err(Error::NotDifferentiable(self.form.to_string()))
            }
        }
    }

    /// Points where `f` jumps.
    pub fn discontinuities(&self) -> Vec<f64> {
        match self.form {
            FunctionForm::TruncatedPower { a, .. } if a.is_finite() => vec![-a, a],
            _ => Vec::new(),
        }
    }

    /// Points where `f` or one of its low derivatives is irregular; used to
    /// split quadrature intervals.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts = vec![0.0];
        match self.form {
            FunctionForm::TruncatedPower { a, .. } if a.is_finite() => pts.extend([-a, a]),
            FunctionForm::PhiR { r } if r > 0.0 => pts.extend([-1.0, 1.0]),
            FunctionForm::SmoothTruncatedPower { eta, .. } => {
                pts.extend([-2.0 * eta, -eta, eta, 2.0 * eta])
            }
            FunctionForm::SquareNearZero { k } => pts.extend([-k, k]),
            _ => {}
        }
        pts
    }

    /// Continuous outside an `F`-null set.
    pub fn is_f_ae_continuous(&self, jumps: &JumpMeasure) -> bool {
        self.discontinuities().iter().all(|&x| !jumps.has_atom_at(x))
    }

    /// `sup_{0<|x|≤ε} |f(x)| / |x|^r` on a logarithmic mesh; the constant in
    /// the neglected small-jump bound.
    pub fn dominating_constant(&self, eps: f64) -> Option<f64> {
        let r = self.class.class_r?;
        let mut sup: f64 = 0.0;
        for k in 0..=200 {
            let x = eps * 10f64.powf(-(k as f64) * 0.06);
            for s in [x, -x] {
                sup = sup.max(self.eval(s).abs() / x.powf(r));
            }
        }
        Some(sup)
    }

    fn validate_class(&self) -> Result<()> {
        let c = &self.class;
        let bad = |what: String| Err(Error::Inadmissible(format!("{}: {what}", self.form)));
        if let Some(r) = c.class_r {
            for x in [1e-6, -1e-6, 1e-5, 1e-4] {
                let ratio = self.eval(x).abs() / x.abs().powf(r);
                if !((ratio - 1.0).abs() < 1e-6) {
                    return bad(format!("claimed class E_{r} but |f(x)|/|x|^r = {ratio} at x = {x}"));
                }
            }
        }
        if c.even {
            for x in [0.137, 0.9, 1.3, 2.71, 7.5] {
                if self.eval(x) != self.eval(-x) {
                    return bad(format!("claimed even but f({x}) != f(-{x})"));
                }
            }
        }
        if c.bounded {
            let near: f64 = (0..=100)
                .map(|i| self.eval(-10.0 + 0.2 * i as f64).abs())
                .fold(0.0, f64::max);
            let far = self.eval(1e6).abs().max(self.eval(-1e6).abs());
            if far > 2.0 * near + 1.0 {
                return bad(format!("claimed bounded but |f(1e6)| = {far}"));
            }
        }
        if c.continuous && !self.discontinuities().is_empty() {
            return bad("claimed continuous but has jump points".into());
        }
        if c.c1_everywhere && self.eval_deriv(0.5).is_err() {
            return bad("claimed C1 but has no derivative".into());
        }
        Ok(())
    }
}

fn derive_class(form: &FunctionForm) -> Result<FunctionClass> {
    let near_zero = |r: f64| {
        if r > 2.0 {
            Smoothness::C2
        } else if r > 1.0 || r == 2.0 {
            Smoothness::C1
        } else {
            Smoothness::C0
        }
    };
    let class = match *form {
        FunctionForm::PowerAbs { r } => {
            positive("r", r)?;
            FunctionClass {
                class_r: Some(r),
                bounded: false,
                even: true,
                smoothness: if r == 2.0 { Smoothness::C2 } else { near_zero(r) },
                c1_everywhere: r > 1.0,
                second_derivative_small: r > 3.0,
                equals_power_near_zero: true,
                continuous: true,
            }
        }
        FunctionForm::CubicPlus { p } => {
            positive("p", p)?;
            if p <= 3.0 {
                return Err(invalid("p", format!("must exceed 3, got {p}")));
            }
            FunctionClass {
                class_r: Some(p),
                bounded: false,
                even: true,
                smoothness: Smoothness::C2,
                c1_everywhere: true,
                second_derivative_small: true,
                equals_power_near_zero: true,
                continuous: true,
            }
        }
        FunctionForm::TruncatedPower { r, a } => {
            positive("r", r)?;
            if !(a > 0.0) {
                return Err(invalid("a", format!("must be positive, got {a}")));
            }
            let finite = a.is_finite();
            FunctionClass {
                class_r: Some(r),
                bounded: finite,
                even: true,
                smoothness: if r == 2.0 { Smoothness::C2 } else { near_zero(r) },
                c1_everywhere: !finite && r > 1.0,
                second_derivative_small: r > 3.0,
                equals_power_near_zero: true,
                continuous: !finite,
            }
        }
        FunctionForm::PhiR { r } => {
            if !(r >= 0.0 && r.is_finite()) {
                return Err(invalid("r", format!("must be non-negative, got {r}")));
            }
            FunctionClass {
                class_r: (r > 0.0).then_some(r),
                bounded: true,
                even: true,
                smoothness: if r == 0.0 || r == 2.0 { Smoothness::C2 } else { near_zero(r) },
                c1_everywhere: r == 0.0,
                second_derivative_small: r == 0.0 || r > 3.0,
                equals_power_near_zero: r > 0.0,
                continuous: true,
            }
        }
        FunctionForm::SmoothTruncatedPower { r, eta } => {
            positive("r", r)?;
            positive("eta", eta)?;
            FunctionClass {
                class_r: Some(r),
                bounded: true,
                even: true,
                smoothness: if r == 2.0 { Smoothness::C2 } else { near_zero(r) },
                c1_everywhere: r > 1.0,
                second_derivative_small: r > 3.0,
                equals_power_near_zero: true,
                continuous: true,
            }
        }
        FunctionForm::SquareNearZero { k } => {
            positive("k", k)?;
            FunctionClass {
                class_r: Some(2.0),
                bounded: false,
                even: true,
                smoothness: Smoothness::C2,
                c1_everywhere: true,
                second_derivative_small: false,
                equals_power_near_zero: true,
                continuous: true,
            }
        }
    };
    Ok(class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn eval_examples() {
        let t = TestFunction::truncated_power(2.0, 2.0).unwrap();
        assert_eq!(t.eval(-2.0), 4.0);
        assert_eq!(TestFunction::phi(1.0).unwrap().eval(5.0), 1.0);
        assert_eq!(TestFunction::square_near_zero(1.0).unwrap().eval(0.5), 0.25);
    }

    #[test]
    fn deriv_examples() {
        let sq = TestFunction::square_near_zero(1.0).unwrap();
        assert!((sq.eval_deriv(0.3).unwrap() - 0.6).abs() < 1e-15);
        assert_eq!(TestFunction::power_abs(3.0).unwrap().eval_deriv(-1.0).unwrap(), -3.0);
        assert_eq!(TestFunction::power_abs(1.0).unwrap().eval_deriv(0.0).unwrap(), 0.0);
    }

    #[test]
    fn deriv_of_non_c1_forms_is_refused() {
        let t = TestFunction::truncated_power(2.0, 1.0).unwrap();
        assert!(matches!(t.eval_deriv(0.2), Err(Error::NotDifferentiable(_))));
        let p = TestFunction::phi(0.5).unwrap();
        assert!(p.eval_deriv(0.2).is_err());
    }

    #[test]
    fn square_near_zero_extension_is_c1() {
        let k = 1.5;
        let f = TestFunction::square_near_zero(k).unwrap();
        let h = 1e-7;
        let left = (f.eval(k) - f.eval(k - h)) / h;
        let right = (f.eval(k + h) - f.eval(k)) / h;
        assert!((left - right).abs() < 1e-5);
        assert!((f.eval(k + 1.0) - (k * k + 2.0 * k)).abs() < 1e-12);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(TestFunction::power_abs(0.0).is_err());
        assert!(TestFunction::power_abs(-1.0).is_err());
        assert!(TestFunction::truncated_power(1.0, 0.0).is_err());
        assert!(TestFunction::cubic_plus(3.0).is_err());
        assert!(TestFunction::phi(-0.5).is_err());
        assert!(TestFunction::square_near_zero(0.0).is_err());
    }

    #[test]
    fn mis_tagged_class_is_rejected() {
        let form = FunctionForm::PowerAbs { r: 0.5 };
        let mut claimed = *TestFunction::new(form).unwrap().class();
        claimed.class_r = Some(1.0);
        assert!(TestFunction::with_claimed_class(form, claimed).is_err());

        let form = FunctionForm::PowerAbs { r: 2.0 };
        let mut claimed = *TestFunction::new(form).unwrap().class();
        claimed.bounded = true;
        assert!(TestFunction::with_claimed_class(form, claimed).is_err());

        let form = FunctionForm::TruncatedPower { r: 2.0, a: 1.0 };
        let mut claimed = *TestFunction::new(form).unwrap().class();
        claimed.continuous = true;
        assert!(TestFunction::with_claimed_class(form, claimed).is_err());
    }

    #[test]
    fn cutoff_sandwich_and_derivative_bound() {
        let cut = CutoffFamily::new(0.3).unwrap();
        for i in -1000..=1000 {
            let x = i as f64 * 0.001;
            let v = cut.eval(x);
            let lower = if x.abs() <= 0.3 { 1.0 } else { 0.0 };
            let upper = if x.abs() <= 0.6 { 1.0 } else { 0.0 };
            assert!(lower <= v && v <= upper, "x = {x}");
            assert_eq!(v, cut.eval(-x));
            assert!(cut.deriv(x).abs() <= CutoffFamily::DERIV_BOUND / 0.3 + 1e-12);
        }
    }

    #[test]
    fn infinite_truncation_is_power() {
        let t = TestFunction::truncated_power(1.5, f64::INFINITY).unwrap();
        assert!(!t.is_bounded());
        assert!(t.class().continuous);
        assert_eq!(t.eval(1e3), 1e3f64.powf(1.5));
    }

    #[test]
    fn serde_by_form_name() {
        let f: TestFunction = serde_json::from_str(r#"{"form":"truncated_power","r":2.0,"a":1.0}"#).unwrap();
        assert_eq!(f, TestFunction::truncated_power(2.0, 1.0).unwrap());
        let back = serde_json::to_string(&f).unwrap();
        assert_eq!(back, r#"{"form":"truncated_power","r":2.0,"a":1.0}"#);
        assert!(serde_json::from_str::<TestFunction>(r#"{"form":"cubic_plus","p":2.0}"#).is_err());
    }

    fn c1_forms() -> Vec<TestFunction> {
        vec![
            TestFunction::power_abs(1.5).unwrap(),
            TestFunction::power_abs(2.0).unwrap(),
            TestFunction::power_abs(4.0).unwrap(),
            TestFunction::cubic_plus(3.5).unwrap(),
            TestFunction::smooth_truncated_power(2.0, 0.5).unwrap(),
            TestFunction::smooth_truncated_power(1.5, 1.0).unwrap(),
            TestFunction::square_near_zero(1.0).unwrap(),
        ]
    }

    proptest! {
        #[test]
        fn derivative_matches_central_differences(x in -3.0f64..3.0) {
            for f in c1_forms() {
                if f.breakpoints().iter().any(|b| (x - b).abs() < 1e-3) {
                    continue;
                }
                let h = 1e-6;
                let fd = (f.eval(x + h) - f.eval(x - h)) / (2.0 * h);
                let d = f.eval_deriv(x).unwrap();
                prop_assert!((fd - d).abs() < 1e-6 * (1.0 + d.abs()), "{f} at {x}: {fd} vs {d}");
            }
        }

        #[test]
        fn truncation_identity(r in 0.1f64..4.0, a in 0.1f64..5.0, x in -10.0f64..10.0) {
            let t = TestFunction::truncated_power(r, a).unwrap();
            let p = TestFunction::power_abs(r).unwrap();
            let ind = if x.abs() <= a { 1.0 } else { 0.0 };
            prop_assert_eq!(t.eval(x), p.eval(x) * ind);
        }

        #[test]
        fn even_forms_are_even(x in -10.0f64..10.0, r in 0.1f64..4.0) {
            for f in [
                TestFunction::power_abs(r).unwrap(),
                TestFunction::phi(r).unwrap(),
                TestFunction::truncated_power(r, 1.0).unwrap(),
                TestFunction::smooth_truncated_power(r, 0.7).unwrap(),
                TestFunction::square_near_zero(1.3).unwrap(),
            ] {
                prop_assert!(f.is_even());
                prop_assert_eq!(f.eval(x), f.eval(-x));
            }
        }
    }
}
