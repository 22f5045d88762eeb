//! Problem parameters and radial initial profiles.
//!
//! The equation `u_t = Δu + |u|^{p-1} u` on `R^d` is parametrized by the
//! integer dimension `d ≥ 1` and the real exponent `p > 1`. Two derived
//! quantities recur everywhere: the scaling exponent `γ = 2/(p-1)` and, when
//! `d ≥ 3` and `p > d/(d-2)`, the constant `c` of the singular steady state
//! `u_C(x) = c |x|^{-γ}`, fixed by `c^{p-1} = γ(d-2-γ)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::log_gamma;

/// Scaling exponent γ = 2/(p−1).
pub fn gamma_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::domain(format!("exponent p must exceed 1, got {p}")));
    }
    Ok(2.0 / (p - 1.0))
}

/// Amplitude of the singular steady state, `c^{p-1} = γ(d-2-γ)`.
/// Defined only for d ≥ 3 and p > d/(d−2).
pub fn singular_constant(d: u32, p: f64) -> Result<f64> {
    let gamma = gamma_exponent(p)?;
    if d < 3 || !(gamma < (d - 2) as f64) {
        return Err(Error::domain(format!(
            "singular solution requires p > d/(d-2) and d >= 3 (d = {d}, p = {p})"
        )));
    }
    Ok((gamma * (d as f64 - 2.0 - gamma)).powf(1.0 / (p - 1.0)))
}

/// Surface area of the unit sphere in `R^d`: σ_d = 2 π^{d/2} / Γ(d/2).
pub fn surface_area(d: u32) -> Result<f64> {
    if d == 0 {
        return Err(Error::domain("surface_area requires d >= 1"));
    }
    let half_d = d as f64 / 2.0;
    Ok((std::f64::consts::PI.ln() * half_d + std::f64::consts::LN_2 - log_gamma(half_d)?).exp())
}

/// Where `(d, p)` sits relative to the Fujita exponent `1 + 2/d` and the
/// existence range of the singular steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeFlags {
    pub fujita_subcritical: bool,
    pub fujita_critical: bool,
    pub singular_solution_exists: bool,
}

/// Classify with floating-point `p`; criticality `d(p-1) = 2` is decided to
/// absolute tolerance 1e-12. Supply `p` as a ratio through
/// [`ModelParams::from_ratio`] for an exact test.
pub fn classify_regime(d: u32, p: f64) -> RegimeFlags {
    let gap = d as f64 * (p - 1.0) - 2.0;
    RegimeFlags {
        fujita_subcritical: gap < -1e-12,
        fujita_critical: gap.abs() <= 1e-12,
        singular_solution_exists: d >= 3 && p * (d as f64 - 2.0) > d as f64,
    }
}

/// Exponent `p` as given in configuration: a plain real or an exact ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PExponent {
    Real(f64),
    Ratio { num: u64, den: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub d: u32,
    pub p: f64,
    /// γ = 2/(p−1).
    pub gamma: f64,
    /// Singular-state amplitude, present iff d ≥ 3 and p > d/(d−2).
    pub c_sing: Option<f64>,
    p_ratio: Option<(u64, u64)>,
}

impl ModelParams {
    pub fn new(d: u32, p: f64) -> Result<Self> {
        if d < 1 {
            return Err(Error::domain("dimension d must be a positive integer"));
        }
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::domain(format!("exponent p must exceed 1, got {p}")));
        }
        let gamma = gamma_exponent(p)?;
        let c_sing = singular_constant(d, p).ok();
        Ok(ModelParams {
            d,
            p,
            gamma,
            c_sing,
            p_ratio: None,
        })
    }

    /// Construct with `p = num/den` given exactly; the Fujita-critical test
    /// `d(p-1) = 2` is then performed in integer arithmetic.
    pub fn from_ratio(d: u32, num: u64, den: u64) -> Result<Self> {
        if den == 0 || num <= den {
            return Err(Error::domain(format!(
                "exponent ratio must satisfy num > den >= 1, got {num}/{den}"
            )));
        }
        let mut params = Self::new(d, num as f64 / den as f64)?;
        params.p_ratio = Some((num, den));
        Ok(params)
    }

    pub fn from_spec(d: u32, p: PExponent) -> Result<Self> {
        match p {
            PExponent::Real(p) => Self::new(d, p),
            PExponent::Ratio { num, den } => Self::from_ratio(d, num, den),
        }
    }

    pub fn regime(&self) -> RegimeFlags {
        let mut flags = classify_regime(self.d, self.p);
        if let Some((num, den)) = self.p_ratio {
            // d(num - den) vs 2 den, exactly
            let lhs = self.d as u128 * (num - den) as u128;
            let rhs = 2u128 * den as u128;
            flags.fujita_subcritical = lhs < rhs;
            flags.fujita_critical = lhs == rhs;
        }
        flags
    }

    pub fn surface_area(&self) -> f64 {
        surface_area(self.d).expect("d >= 1 by construction")
    }

    /// The singular amplitude, or the canonical domain error.
    pub fn require_c_sing(&self) -> Result<f64> {
        self.c_sing.ok_or_else(|| {
            Error::domain(format!(
                "singular solution requires p > d/(d-2) and d >= 3 (d = {}, p = {})",
                self.d, self.p
            ))
        })
    }
}

// ---------------------------------------------------------------------------
// Radial profiles
// ---------------------------------------------------------------------------

/// Radial initial datum `u_0(r)`, r ≥ 0.
///
/// `singular` and `truncated_singular` are multiples of the singular steady
/// state (the latter capped at a level), so their evaluation depends on the
/// model parameters. `sampled` interpolates tabulated values piecewise
/// linearly in log r and extrapolates beyond the last knot with the power law
/// `u_n (r/r_n)^{-tail_exponent}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RadialProfile {
    /// `scale · c · r^{-γ}`.
    Singular {
        scale: f64,
    },
    /// `min(scale · c · r^{-γ}, cap)`.
    TruncatedSingular {
        scale: f64,
        cap: f64,
    },
    /// `amplitude · exp(-(r/width)²)`.
    Gaussian {
        amplitude: f64,
        width: f64,
    },
    /// `amplitude` on `r ≤ radius`, zero outside.
    Indicator {
        amplitude: f64,
        radius: f64,
    },
    Constant {
        level: f64,
    },
    /// `amplitude · r^{-exponent}` (unbounded at the origin when exponent > 0).
    PowerTail {
        amplitude: f64,
        exponent: f64,
    },
    Sampled {
        r: Vec<f64>,
        u: Vec<f64>,
        tail_exponent: f64,
    },
}

impl RadialProfile {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::domain(msg));
        match self {
            RadialProfile::Singular { scale } => {
                if !(*scale >= 0.0) {
                    return bad(format!("singular scale must be >= 0, got {scale}"));
                }
            }
            RadialProfile::TruncatedSingular { scale, cap } => {
                if !(*scale >= 0.0) || !(*cap > 0.0) {
                    return bad(format!(
                        "truncated_singular needs scale >= 0 and cap > 0, got {scale}, {cap}"
                    ));
                }
            }
            RadialProfile::Gaussian { amplitude, width } => {
                if !(*amplitude >= 0.0) || !(*width > 0.0) {
                    return bad(format!(
                        "gaussian needs amplitude >= 0 and width > 0, got {amplitude}, {width}"
                    ));
                }
            }
            RadialProfile::Indicator { amplitude, radius } => {
                if !(*amplitude >= 0.0) || !(*radius > 0.0) {
                    return bad(format!(
                        "indicator needs amplitude >= 0 and radius > 0, got {amplitude}, {radius}"
                    ));
                }
            }
            RadialProfile::Constant { level } => {
                if !(*level >= 0.0) {
                    return bad(format!("constant level must be >= 0, got {level}"));
                }
            }
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } => {
                if !(*amplitude >= 0.0) || !exponent.is_finite() {
                    return bad(format!("power_tail needs amplitude >= 0 and finite exponent, got {amplitude}, {exponent}"));
                }
            }
            RadialProfile::Sampled {
                r,
                u,
                tail_exponent,
            } => {
                if r.len() != u.len() || r.len() < 2 {
                    return bad(
                        "sampled profile needs matching r/u columns with at least 2 rows".into(),
                    );
                }
                if tail_exponent.is_nan() {
                    return bad("sampled tail_exponent must not be NaN".into());
                }
                let mut prev = 0.0;
                for (&ri, &ui) in r.iter().zip(u) {
                    if !(ri > prev) || !ri.is_finite() {
                        return bad(
                            "sampled radii must be finite, positive, strictly increasing".into(),
                        );
                    }
                    if !(ui >= 0.0) || !ui.is_finite() {
                        return bad("sampled values must be finite and nonnegative".into());
                    }
                    prev = ri;
                }
            }
        }
        Ok(())
    }

    /// False for kinds with an algebraic singularity at r = 0.
    pub fn is_bounded_at_origin(&self) -> bool {
        match self {
            RadialProfile::Singular { scale } => *scale == 0.0,
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } => *amplitude == 0.0 || *exponent <= 0.0,
            _ => true,
        }
    }

    /// The Dirichlet value at the far boundary: the r → ∞ limit where it
    /// exists (None for growing power tails).
    pub fn far_field_value(&self) -> Option<f64> {
        match self {
            RadialProfile::Constant { level } => Some(*level),
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } => {
                if *amplitude == 0.0 || *exponent > 0.0 {
                    Some(0.0)
                } else if *exponent == 0.0 {
                    Some(*amplitude)
                } else {
                    None
                }
            }
            RadialProfile::Sampled {
                u, tail_exponent, ..
            } => {
                let last = *u.last().unwrap_or(&0.0);
                if last == 0.0 || *tail_exponent > 0.0 {
                    Some(0.0)
                } else if *tail_exponent == 0.0 {
                    Some(last)
                } else {
                    None
                }
            }
            _ => Some(0.0),
        }
    }

    /// Evaluate `u_0(r)`. Errors: r < 0, r = 0 for unbounded kinds, and
    /// singular kinds outside the existence range of `u_C`.
    pub fn eval(&self, params: &ModelParams, r: f64) -> Result<f64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!(
                "profile argument must satisfy r >= 0, got {r}"
            )));
        }
        if r == 0.0 && !self.is_bounded_at_origin() {
            return Err(Error::Singularity(
                "profile is unbounded at r = 0; evaluate at r > 0 or use a truncated kind".into(),
            ));
        }
        let resolved = self.resolve(params)?;
        Ok(resolved.eval(r))
    }

    /// Resolve against the model parameters: validates fields, resolves the
    /// singular amplitude where needed, and splits off the origin power
    /// `u(r) = bounded(r) · r^{-offset}`.
    pub fn resolve<'a>(&'a self, params: &ModelParams) -> Result<ResolvedProfile<'a>> {
        self.validate()?;
        let gamma = params.gamma;
        let c_scaled = match self {
            RadialProfile::Singular { scale } | RadialProfile::TruncatedSingular { scale, .. } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    *scale * params.require_c_sing()?
                }
            }
            _ => 0.0,
        };
        let offset = match self {
            RadialProfile::Singular { scale } if *scale > 0.0 => gamma,
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } if *amplitude > 0.0 && *exponent > 0.0 => *exponent,
            _ => 0.0,
        };
        Ok(ResolvedProfile {
            profile: self,
            gamma,
            c_scaled,
            offset,
        })
    }

    /// Parabolic rescaling `u_λ(r) = λ^γ u(λ r)`, expressed within the same
    /// profile family.
    pub fn rescaled(&self, lambda: f64, gamma: f64) -> RadialProfile {
        let lg = lambda.powf(gamma);
        match self {
            RadialProfile::Singular { scale } => RadialProfile::Singular { scale: *scale },
            RadialProfile::TruncatedSingular { scale, cap } => RadialProfile::TruncatedSingular {
                scale: *scale,
                cap: lg * cap,
            },
            RadialProfile::Gaussian { amplitude, width } => RadialProfile::Gaussian {
                amplitude: lg * amplitude,
                width: width / lambda,
            },
            RadialProfile::Indicator { amplitude, radius } => RadialProfile::Indicator {
                amplitude: lg * amplitude,
                radius: radius / lambda,
            },
            RadialProfile::Constant { level } => RadialProfile::Constant { level: lg * level },
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } => RadialProfile::PowerTail {
                amplitude: lambda.powf(gamma - exponent) * amplitude,
                exponent: *exponent,
            },
            RadialProfile::Sampled {
                r,
                u,
                tail_exponent,
            } => RadialProfile::Sampled {
                r: r.iter().map(|ri| ri / lambda).collect(),
                u: u.iter().map(|ui| lg * ui).collect(),
                tail_exponent: *tail_exponent,
            },
        }
    }

    /// Load a sampled profile from two-column CSV text (`r,u` per line, an
    /// optional header row is skipped).
    pub fn sampled_from_csv(text: &str, tail_exponent: f64) -> Result<RadialProfile> {
        let mut r = Vec::new();
        let mut u = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut cols = line.split(',').map(str::trim);
            let (a, b) = (cols.next().unwrap_or(""), cols.next().unwrap_or(""));
            match (a.parse::<f64>(), b.parse::<f64>()) {
                (Ok(ri), Ok(ui)) => {
                    r.push(ri);
                    u.push(ui);
                }
                _ if lineno == 0 => continue, // header row
                _ => {
                    return Err(Error::Parse(format!(
                        "sampled profile CSV line {}: expected two numeric columns, got {line:?}",
                        lineno + 1
                    )))
                }
            }
        }
        let profile = RadialProfile::Sampled {
            r,
            u,
            tail_exponent,
        };
        profile.validate()?;
        Ok(profile)
    }
}

/// A profile resolved against model parameters; evaluation is total on r ≥ 0
/// once the bounded/singular split is taken into account.
#[derive(Debug, Clone)]
pub struct ResolvedProfile<'a> {
    profile: &'a RadialProfile,
    gamma: f64,
    c_scaled: f64,
    /// `u(r) = bounded(r) · r^{-offset}` with `bounded` bounded near 0.
    pub offset: f64,
}

impl ResolvedProfile<'_> {
    /// The bounded factor `u(r) · r^{offset}`.
    pub fn bounded(&self, r: f64) -> f64 {
        match self.profile {
            RadialProfile::Singular { .. } => self.c_scaled,
            RadialProfile::TruncatedSingular { cap, .. } => {
                if self.c_scaled == 0.0 {
                    0.0
                } else if r <= 0.0 {
                    *cap
                } else {
                    (self.c_scaled * r.powf(-self.gamma)).min(*cap)
                }
            }
            RadialProfile::Gaussian { amplitude, width } => {
                let s = r / width;
                amplitude * (-s * s).exp()
            }
            RadialProfile::Indicator { amplitude, radius } => {
                if r <= *radius {
                    *amplitude
                } else {
                    0.0
                }
            }
            RadialProfile::Constant { level } => *level,
            RadialProfile::PowerTail {
                amplitude,
                exponent,
            } => {
                if self.offset > 0.0 {
                    *amplitude
                } else if r <= 0.0 {
                    if *exponent == 0.0 {
                        *amplitude
                    } else {
                        0.0
                    }
                } else {
                    amplitude * r.powf(-exponent)
                }
            }
            RadialProfile::Sampled {
                r: knots,
                u,
                tail_exponent,
            } => interp_sampled(knots, u, *tail_exponent, r),
        }
    }

    /// `u(r)`; infinite at r = 0 for unbounded kinds.
    pub fn eval(&self, r: f64) -> f64 {
        if self.offset == 0.0 {
            self.bounded(r)
        } else {
            self.bounded(r) * r.powf(-self.offset)
        }
    }

    /// Radii where the profile is not smooth (caps, jumps, knots); quadrature
    /// panels should break there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.profile {
            RadialProfile::TruncatedSingular { cap, .. } => {
                if self.c_scaled > 0.0 {
                    vec![(self.c_scaled / cap).powf(1.0 / self.gamma)]
                } else {
                    Vec::new()
                }
            }
            RadialProfile::Indicator { radius, .. } => vec![*radius],
            RadialProfile::Sampled { r, .. } => r.clone(),
            _ => Vec::new(),
        }
    }
}

fn interp_sampled(knots: &[f64], u: &[f64], tail_exponent: f64, r: f64) -> f64 {
    let n = knots.len();
    if r <= knots[0] {
        return u[0];
    }
    if r >= knots[n - 1] {
        let last = u[n - 1];
        if r == knots[n - 1] || last == 0.0 {
            return last;
        }
        return last * (r / knots[n - 1]).powf(-tail_exponent);
    }
    let i = match knots.binary_search_by(|k| k.partial_cmp(&r).unwrap()) {
        Ok(i) => return u[i],
        Err(i) => i - 1,
    };
    let (r0, r1, u0, u1) = (knots[i], knots[i + 1], u[i], u[i + 1]);
    if u0 > 0.0 && u1 > 0.0 {
        let t = (r / r0).ln() / (r1 / r0).ln();
        (u0.ln() + t * (u1.ln() - u0.ln())).exp()
    } else {
        // log-interpolation is undefined at zeros; fall back to linear in r
        u0 + (u1 - u0) * (r - r0) / (r1 - r0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn gamma_exponent_values() {
        assert_relative_eq!(gamma_exponent(3.0).unwrap(), 1.0);
        assert_relative_eq!(gamma_exponent(2.0).unwrap(), 2.0);
        assert_relative_eq!(gamma_exponent(5.0).unwrap(), 0.5);
        assert!(gamma_exponent(1.0).is_err());
        assert!(gamma_exponent(0.5).is_err());
    }

    #[test]
    fn singular_constant_values() {
        assert_relative_eq!(
            singular_constant(4, 3.0).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        // c^4 = (1/2)(1/2) at (3, 5), so c is exactly 1/sqrt(2)
        assert_relative_eq!(
            singular_constant(3, 5.0).unwrap(),
            std::f64::consts::FRAC_1_SQRT_2,
            max_relative = 1e-14
        );
        // boundary and below: p = d/(d-2) has no singular state
        assert!(singular_constant(3, 3.0).is_err());
        assert!(singular_constant(2, 5.0).is_err());
    }

    #[test]
    fn singular_constant_defining_relation() {
        for d in 3..=12u32 {
            for &p in &[2.2, 2.5, 3.0, 4.0, 5.0] {
                if p * (d as f64 - 2.0) <= d as f64 {
                    continue;
                }
                let gamma = gamma_exponent(p).unwrap();
                let c = singular_constant(d, p).unwrap();
                let lhs = c.powf(p - 1.0);
                let rhs = gamma * (d as f64 - 2.0 - gamma);
                assert_relative_eq!(lhs, rhs, max_relative = 1e-12);
                // the two factorizations of the defining product agree
                assert_relative_eq!(rhs, gamma * (d as f64 - p * gamma), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn regime_examples() {
        let r = classify_regime(1, 2.0);
        assert!(r.fujita_subcritical && !r.fujita_critical && !r.singular_solution_exists);
        let r = classify_regime(2, 2.0);
        assert!(!r.fujita_subcritical && r.fujita_critical && !r.singular_solution_exists);
        let r = classify_regime(4, 3.0);
        assert!(!r.fujita_subcritical && !r.fujita_critical && r.singular_solution_exists);
    }

    #[test]
    fn regime_exact_ratio() {
        // p = 5/3, d = 3: d(p-1) = 2 exactly
        let params = ModelParams::from_ratio(3, 5, 3).unwrap();
        assert!(params.regime().fujita_critical);
        let params = ModelParams::from_ratio(3, 2, 1).unwrap();
        let r = params.regime();
        assert!(!r.fujita_critical && !r.fujita_subcritical);
        assert!(ModelParams::from_ratio(3, 3, 3).is_err());
        assert!(ModelParams::from_ratio(3, 1, 0).is_err());
    }

    #[test]
    fn surface_area_values() {
        assert_relative_eq!(surface_area(1).unwrap(), 2.0, max_relative = 1e-13);
        assert_relative_eq!(surface_area(2).unwrap(), 2.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(surface_area(3).unwrap(), 4.0 * PI, max_relative = 1e-13);
        assert_relative_eq!(
            surface_area(4).unwrap(),
            2.0 * PI * PI,
            max_relative = 1e-13
        );
        assert!(surface_area(0).is_err());
    }

    #[test]
    fn surface_area_recurrence() {
        // σ_{d+2} = (2π/d) σ_d
        for d in 1..=40u32 {
            let lhs = surface_area(d + 2).unwrap();
            let rhs = 2.0 * PI / d as f64 * surface_area(d).unwrap();
            assert_relative_eq!(lhs, rhs, max_relative = 1e-10);
        }
    }

    fn p43() -> ModelParams {
        ModelParams::new(4, 3.0).unwrap()
    }

    #[test]
    fn eval_singular_family() {
        let params = p43();
        let u = RadialProfile::Singular { scale: 1.0 };
        assert_relative_eq!(u.eval(&params, 2.0).unwrap(), 0.5, max_relative = 1e-14);
        assert!(matches!(u.eval(&params, 0.0), Err(Error::Singularity(_))));

        let t = RadialProfile::TruncatedSingular {
            scale: 2.0,
            cap: 10.0,
        };
        assert_relative_eq!(t.eval(&params, 0.1).unwrap(), 10.0);
        assert_relative_eq!(t.eval(&params, 1.0).unwrap(), 2.0);
        assert_relative_eq!(t.eval(&params, 0.0).unwrap(), 10.0);

        // singular kinds need u_C to exist
        let low = ModelParams::new(2, 3.0).unwrap();
        assert!(u.eval(&low, 1.0).is_err());
    }

    #[test]
    fn eval_bounded_kinds() {
        let params = p43();
        let g = RadialProfile::Gaussian {
            amplitude: 2.0,
            width: 3.0,
        };
        assert_relative_eq!(
            g.eval(&params, 3.0).unwrap(),
            2.0 * (-1.0f64).exp(),
            max_relative = 1e-14
        );
        let i = RadialProfile::Indicator {
            amplitude: 1.5,
            radius: 2.0,
        };
        assert_relative_eq!(i.eval(&params, 2.0).unwrap(), 1.5);
        assert_relative_eq!(i.eval(&params, 2.0000001).unwrap(), 0.0);
        let k = RadialProfile::Constant { level: 3.0 };
        assert_relative_eq!(k.eval(&params, 17.0).unwrap(), 3.0);
        let pt = RadialProfile::PowerTail {
            amplitude: 1.0,
            exponent: 0.5,
        };
        assert_relative_eq!(pt.eval(&params, 4.0).unwrap(), 0.5, max_relative = 1e-14);
        assert!(pt.eval(&params, 0.0).is_err());
        // negative exponent grows and is fine at the origin
        let gr = RadialProfile::PowerTail {
            amplitude: 2.0,
            exponent: -1.0,
        };
        assert_relative_eq!(gr.eval(&params, 0.0).unwrap(), 0.0);
        assert_relative_eq!(gr.eval(&params, 3.0).unwrap(), 6.0);
    }

    #[test]
    fn eval_sampled_profile() {
        let params = p43();
        let s = RadialProfile::Sampled {
            r: vec![1.0, 100.0],
            u: vec![1.0, 0.01],
            tail_exponent: 2.0,
        };
        // log-linear between knots: power law r^{-1} here
        assert_relative_eq!(s.eval(&params, 10.0).unwrap(), 0.1, max_relative = 1e-12);
        // clamped below the first knot
        assert_relative_eq!(s.eval(&params, 0.5).unwrap(), 1.0);
        assert_relative_eq!(s.eval(&params, 0.0).unwrap(), 1.0);
        // power tail beyond the last knot: 0.01 * (1000/100)^{-2}
        assert_relative_eq!(s.eval(&params, 1000.0).unwrap(), 1e-4, max_relative = 1e-12);

        // zero endpoint forces linear interpolation on that cell
        let z = RadialProfile::Sampled {
            r: vec![1.0, 2.0, 3.0],
            u: vec![1.0, 0.0, 0.0],
            tail_exponent: f64::INFINITY,
        };
        assert_relative_eq!(z.eval(&params, 1.5).unwrap(), 0.5);
        assert_relative_eq!(z.eval(&params, 10.0).unwrap(), 0.0);
    }

    #[test]
    fn sampled_validation() {
        let bad = RadialProfile::Sampled {
            r: vec![1.0, 1.0],
            u: vec![1.0, 1.0],
            tail_exponent: 1.0,
        };
        assert!(bad.validate().is_err());
        let bad = RadialProfile::Sampled {
            r: vec![1.0, 2.0],
            u: vec![1.0, -1.0],
            tail_exponent: 1.0,
        };
        assert!(bad.validate().is_err());
        let bad = RadialProfile::Sampled {
            r: vec![1.0],
            u: vec![1.0],
            tail_exponent: 1.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_loader() {
        let text = "r,u\n0.5,2.0\n1.0,1.0\n2.0,0.25\n";
        let p = RadialProfile::sampled_from_csv(text, 3.0).unwrap();
        match &p {
            RadialProfile::Sampled {
                r,
                u,
                tail_exponent,
            } => {
                assert_eq!(r, &[0.5, 1.0, 2.0]);
                assert_eq!(u, &[2.0, 1.0, 0.25]);
                assert_eq!(*tail_exponent, 3.0);
            }
            _ => unreachable!(),
        }
        assert!(RadialProfile::sampled_from_csv("1.0,1.0\nbroken line\n", 1.0).is_err());
    }

    #[test]
    fn profile_json_grammar() {
        let p: RadialProfile =
            serde_json::from_str(r#"{"kind": "truncated_singular", "scale": 2.0, "cap": 10.0}"#)
                .unwrap();
        assert_eq!(
            p,
            RadialProfile::TruncatedSingular {
                scale: 2.0,
                cap: 10.0
            }
        );
        let text = serde_json::to_string(&p).unwrap();
        let back: RadialProfile = serde_json::from_str(&text).unwrap();
        assert_eq!(back, p);
        let g: RadialProfile =
            serde_json::from_str(r#"{"kind": "gaussian", "amplitude": 1.0, "width": 1.0}"#)
                .unwrap();
        assert_eq!(
            g,
            RadialProfile::Gaussian {
                amplitude: 1.0,
                width: 1.0
            }
        );
    }

    #[test]
    fn far_field_values() {
        assert_eq!(
            RadialProfile::Constant { level: 2.0 }.far_field_value(),
            Some(2.0)
        );
        assert_eq!(
            RadialProfile::Gaussian {
                amplitude: 1.0,
                width: 1.0
            }
            .far_field_value(),
            Some(0.0)
        );
        assert_eq!(
            RadialProfile::PowerTail {
                amplitude: 1.0,
                exponent: -0.5
            }
            .far_field_value(),
            None
        );
        assert_eq!(
            RadialProfile::TruncatedSingular {
                scale: 2.0,
                cap: 10.0
            }
            .far_field_value(),
            Some(0.0)
        );
    }

    #[test]
    fn truncated_breakpoint_is_cap_crossing() {
        let params = p43();
        let t = RadialProfile::TruncatedSingular {
            scale: 2.0,
            cap: 10.0,
        };
        let resolved = t.resolve(&params).unwrap();
        let breaks = resolved.breakpoints();
        assert_eq!(breaks.len(), 1);
        // 2 c r^{-1} = 10 at r = 0.2
        assert_relative_eq!(breaks[0], 0.2, max_relative = 1e-14);
        let just_in = t.eval(&params, 0.1999).unwrap();
        let just_out = t.eval(&params, 0.2001).unwrap();
        assert_eq!(just_in, 10.0);
        assert!(just_out < 10.0);
    }

    fn arb_profile() -> impl Strategy<Value = RadialProfile> {
        prop_oneof![
            (0.1f64..3.0).prop_map(|scale| RadialProfile::Singular { scale }),
            ((0.1f64..3.0), (0.5f64..20.0))
                .prop_map(|(scale, cap)| RadialProfile::TruncatedSingular { scale, cap }),
            ((0.1f64..3.0), (0.2f64..5.0))
                .prop_map(|(amplitude, width)| RadialProfile::Gaussian { amplitude, width }),
            ((0.1f64..3.0), (0.2f64..5.0))
                .prop_map(|(amplitude, radius)| RadialProfile::Indicator { amplitude, radius }),
            (0.0f64..3.0).prop_map(|level| RadialProfile::Constant { level }),
            ((0.1f64..3.0), (-1.0f64..2.0)).prop_map(|(amplitude, exponent)| {
                RadialProfile::PowerTail {
                    amplitude,
                    exponent,
                }
            }),
        ]
    }

    proptest! {
        #[test]
        fn eval_nonnegative(profile in arb_profile(), r in 1e-3f64..100.0) {
            let params = p43();
            let v = profile.eval(&params, r).unwrap();
            prop_assert!(v >= 0.0);
            prop_assert!(v.is_finite());
        }

        #[test]
        fn rescaling_matches_pointwise_law(profile in arb_profile(), r in 1e-2f64..50.0, lambda in 0.1f64..10.0) {
            // u_λ(r) = λ^γ u(λ r)
            let params = p43();
            let gamma = params.gamma;
            let scaled = profile.rescaled(lambda, gamma);
            let lhs = scaled.eval(&params, r).unwrap();
            let rhs = lambda.powf(gamma) * profile.eval(&params, lambda * r).unwrap();
            let tol = 1e-12 * lhs.abs().max(rhs.abs()).max(1e-12);
            prop_assert!((lhs - rhs).abs() <= tol, "lhs {lhs} rhs {rhs}");
        }

        #[test]
        fn singular_profile_scale_linearity(n in 0.1f64..5.0, r in 1e-2f64..100.0) {
            let params = p43();
            let base = RadialProfile::Singular { scale: 1.0 }.eval(&params, r).unwrap();
            let scaled = RadialProfile::Singular { scale: n }.eval(&params, r).unwrap();
            prop_assert!((scaled - n * base).abs() <= 1e-12 * scaled.abs());
        }
    }
}
