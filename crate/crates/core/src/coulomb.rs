//! Hydrogenic fast sub-system driven through its coupling `g`.
//!
//! Radial states use `x = 2m_F g r/(ħ²n)`:
//! `R_{n,l}(r) = N e^{−x/2} x^l L^{2l+1}_{n−l−1}(x)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::quadrature::LaguerreRule;

const QUADRATURE_NODES: usize = 32;
const CHECK_NODES: usize = 24;
const QUADRATURE_TOL: f64 = 1e-10;
const POLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HydrogenicState {
    n: u32,
    l: u32,
    g: f64,
    m_fast: f64,
    hbar: f64,
}

impl HydrogenicState {
    pub fn new(n: u32, l: u32, g: f64, m_fast: f64) -> Result<Self> {
        Self::with_hbar(n, l, g, m_fast, 1.0)
    }

    pub fn with_hbar(n: u32, l: u32, g: f64, m_fast: f64, hbar: f64) -> Result<Self> {
        if n == 0 || l >= n {
            return Err(Error::InvalidQuantumNumbers { n, l });
        }
        for (name, v) in [("g", g), ("m_fast", m_fast), ("hbar", hbar)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive and finite, got {v}")));
            }
        }
        Ok(Self { n, l, g, m_fast, hbar })
    }

    /// Same quantum numbers at another coupling.
    pub fn with_coupling(&self, g: f64) -> Result<Self> {
        Self::with_hbar(self.n, self.l, g, self.m_fast, self.hbar)
    }

    pub fn n(&self) -> u32 {
        self.n
    }
    pub fn l(&self) -> u32 {
        self.l
    }
    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn m_fast(&self) -> f64 {
        self.m_fast
    }
    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// `dx/dr`; `R²r²` decays like `e^{−rate·r}`.
    pub fn rate(&self) -> f64 {
        2.0 * self.m_fast * self.g / (self.hbar * self.hbar * self.n as f64)
    }

    fn degree(&self) -> u32 {
        self.n - self.l - 1
    }

    fn laguerre_alpha(&self) -> f64 {
        (2 * self.l + 1) as f64
    }

    fn normalization(&self) -> f64 {
        let (n, l) = (self.n as u64, self.l as u64);
        let ln = 0.5 * (ln_factorial(n - l - 1) - ln_factorial(n + l) - (2.0 * n as f64).ln());
        self.rate().powf(1.5) * ln.exp()
    }
}

fn ln_factorial(k: u64) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// `(a)_k = Γ(a+k)/Γ(a)` for positive integer `a`, in log form.
fn ln_pochhammer(a: u64, k: u64) -> f64 {
    ln_factorial(a + k - 1) - ln_factorial(a - 1)
}

/// `L^α_k(x)` together with `L^α_{k−1}(x)` (zero for `k = 0`) and the size of the
/// terms that cancel in the last recurrence step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaguerreValue {
    pub value: f64,
    pub previous: f64,
    pub scale: f64,
}

pub fn laguerre(k: u32, alpha: f64, x: f64) -> LaguerreValue {
    let (mut prev, mut cur, mut scale) = (0.0, 1.0, 1.0);
    for j in 0..k {
        let j = j as f64;
        let a = (2.0 * j + 1.0 + alpha - x) * cur;
        let b = (j + alpha) * prev;
        scale = ((2.0 * j + 1.0 + alpha).abs() + x.abs()) * cur.abs() + b.abs();
        scale /= j + 1.0;
        (prev, cur) = (cur, (a - b) / (j + 1.0));
    }
    LaguerreValue { value: cur, previous: prev, scale }
}

pub fn radial_wavefunction(s: &HydrogenicState, r: f64) -> f64 {
    let x = s.rate() * r;
    let lag = laguerre(s.degree(), s.laguerre_alpha(), x);
    s.normalization() * (-0.5 * x).exp() * x.powi(s.l as i32) * lag.value
}

/// `ε_n = −m_F g²/(2ħ²n²)`.
pub fn hydrogenic_energy(s: &HydrogenicState) -> f64 {
    let n = s.n as f64;
    -s.m_fast * s.g * s.g / (2.0 * s.hbar * s.hbar * n * n)
}

/// `E_{u,n} = ħω_S(u + 3/2) + ε_n` for the trapped slow particle.
pub fn slow_total_energy(s: &HydrogenicState, omega_slow: f64, u: u32) -> f64 {
    s.hbar * omega_slow * (u as f64 + 1.5) + hydrogenic_energy(s)
}

/// Radii where `R_{n,l}` vanishes for `r > 0`, ascending.
pub fn radial_nodes(s: &HydrogenicState) -> Result<Vec<f64>> {
    let k = s.degree() as usize;
    if k == 0 {
        return Ok(Vec::new());
    }
    let rule = LaguerreRule::new(k, s.laguerre_alpha())?;
    Ok(rule.nodes().map(|x| x / s.rate()).collect())
}

fn bracket_parts(s: &HydrogenicState, x: f64) -> (f64, LaguerreValue) {
    let lag = laguerre(s.degree(), s.laguerre_alpha(), x);
    (1.5 - 0.5 * x + (s.n as f64 - 1.0), lag)
}

/// `B(r)` with `∂_g R = (B/g) R`.
pub fn radial_g_derivative(s: &HydrogenicState, r: f64) -> Result<f64> {
    let x = s.rate() * r;
    let (smooth, lag) = bracket_parts(s, x);
    if s.degree() == 0 {
        return Ok(smooth);
    }
    if lag.value.abs() < POLE_TOL * lag.scale {
        return Err(Error::RadialNode { r });
    }
    Ok(smooth - (s.n + s.l) as f64 * lag.previous / lag.value)
}

/// `B(r) R(r)²`, finite at the nodes.
fn weighted_bracket(s: &HydrogenicState, r: f64) -> f64 {
    let x = s.rate() * r;
    let (smooth, lag) = bracket_parts(s, x);
    let envelope = s.normalization() * (-0.5 * x).exp() * x.powi(s.l as i32);
    envelope * envelope * lag.value * (smooth * lag.value - (s.n + s.l) as f64 * lag.previous)
}

fn rule(nodes: usize) -> &'static LaguerreRule {
    static FINE: OnceLock<LaguerreRule> = OnceLock::new();
    static COARSE: OnceLock<LaguerreRule> = OnceLock::new();
    let cell = if nodes == QUADRATURE_NODES { &FINE } else { &COARSE };
    cell.get_or_init(|| LaguerreRule::new(nodes, 0.0).expect("alpha = 0 is valid"))
}

/// `∫₀^∞ f(r) dr` for `f` decaying like `e^{−rate·r}`, checked against a coarser rule.
fn radial_integral(rate: f64, f: impl Fn(f64) -> f64) -> Result<f64> {
    let fine = rule(QUADRATURE_NODES).integrate_scaled(rate, &f);
    let coarse = rule(CHECK_NODES).integrate_scaled(rate, &f);
    let change = (fine - coarse).abs();
    if !fine.is_finite() || change > QUADRATURE_TOL * fine.abs().max(1.0) {
        return Err(Error::QuadratureFailure { estimate: fine, change });
    }
    Ok(fine)
}

/// `∫ R² r² dr`.
pub fn radial_norm(s: &HydrogenicState) -> Result<f64> {
    radial_integral(s.rate(), |r| {
        let v = radial_wavefunction(s, r);
        v * v * r * r
    })
}

/// `∫ R_a R_b r² dr`.
pub fn radial_overlap(a: &HydrogenicState, b: &HydrogenicState) -> Result<f64> {
    radial_integral(0.5 * (a.rate() + b.rate()), |r| {
        radial_wavefunction(a, r) * radial_wavefunction(b, r) * r * r
    })
}

/// Closed-form connection `ġ⟨R|∂_gR⟩` with `1/(negative)! ≡ 0`.
pub fn berry_connection_formula(s: &HydrogenicState, gdot: f64) -> f64 {
    let (n, l) = (s.n as f64, s.l as f64);
    let mut bracket = 0.5 - 0.5 * n - l * (l + 1.0) / (2.0 * n);
    if s.n >= s.l + 2 {
        let (nn, ll) = (s.n as u64, s.l as u64);
        let k = nn - ll - 2;
        let ln_ratio = ln_factorial(2 * ll + 1) + ln_pochhammer(1, k) + ln_pochhammer(2 * ll + 2, k + 1)
            - ln_factorial(k)
            - ln_factorial(nn + ll);
        let h2 = s.hbar * s.hbar;
        bracket -= 2.0 * s.g * s.g * s.m_fast * s.m_fast * (n + 1.0) / (h2 * h2 * n * n * n) * ln_ratio.exp();
    }
    gdot / s.g * bracket
}

/// `ġ∫ R ∂_gR r² dr` by Gauss–Laguerre quadrature.
pub fn berry_connection_numeric(s: &HydrogenicState, gdot: f64) -> Result<f64> {
    let integral = radial_integral(s.rate(), |r| weighted_bracket(s, r) * r * r)?;
    Ok(gdot / s.g * integral)
}

/// Single-state CD coefficient `(B(r) − g⟨R|∂_gR⟩)·ġ/g` on a set of radii.
#[derive(Debug, Clone, PartialEq)]
pub struct CDProfile {
    pub radii: Vec<f64>,
    /// `None` where the radius sits on a radial node.
    pub coefficients: Vec<Option<f64>>,
    pub poles: Vec<f64>,
}

impl CDProfile {
    pub fn has_poles(&self) -> bool {
        !self.poles.is_empty()
    }
}

pub fn cd_potential(s: &HydrogenicState, gdot: f64, radii: &[f64]) -> Result<CDProfile> {
    let poles = radial_nodes(s)?;
    if gdot == 0.0 {
        return Ok(CDProfile {
            radii: radii.to_vec(),
            coefficients: vec![Some(0.0); radii.len()],
            poles,
        });
    }
    let berry = berry_connection_numeric(s, gdot)? * s.g / gdot;
    let coefficients = radii
        .iter()
        .map(|&r| match radial_g_derivative(s, r) {
            Ok(b) => Ok(Some((b - berry) * gdot / s.g)),
            Err(Error::RadialNode { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    Ok(CDProfile { radii: radii.to_vec(), coefficients, poles })
}

/// `∫ R² (B − g⟨R|∂_gR⟩) r² dr · ġ/g`.
pub fn diagonal_cd_expectation(s: &HydrogenicState, gdot: f64) -> Result<f64> {
    let berry = berry_connection_numeric(s, gdot)?;
    let mean_b = radial_integral(s.rate(), |r| {
        let density = radial_wavefunction(s, r).powi(2);
        let weighted = match radial_g_derivative(s, r) {
            Ok(b) => b * density,
            Err(_) => weighted_bracket(s, r),
        };
        weighted * r * r
    })?;
    Ok(gdot / s.g * mean_b - berry * radial_norm(s)?)
}

/// Bracket of the printed single-state CD term, for the states where one is given.
pub fn printed_cd_bracket(s: &HydrogenicState, r: f64) -> Option<f64> {
    let h2 = s.hbar * s.hbar;
    let gm = s.g * s.m_fast;
    match (s.n, s.l) {
        (1, 0) => Some(1.5 - gm * r / h2),
        (2, 0) => Some(3.0 - gm * (gm + h2 * r) / (2.0 * h2 * h2) - 2.0 * h2 / (h2 - gm * r)),
        (2, 1) => Some(3.5 - gm * r / (2.0 * h2)),
        _ => None,
    }
}

fn printed_pole(s: &HydrogenicState) -> Option<f64> {
    ((s.n, s.l) == (2, 0)).then(|| s.hbar * s.hbar / (s.g * s.m_fast))
}

/// One state's comparison of the printed closed forms with the recurrence-based ones.
#[derive(Debug, Clone, PartialEq)]
pub struct StateReport {
    pub n: u32,
    pub l: u32,
    pub berry_formula: f64,
    pub berry_numeric: f64,
    pub diagonal_cd: f64,
    /// Largest `|printed − canonical|` bracket difference on the sample radii.
    pub printed_deviation: Option<f64>,
    pub canonical_poles: Vec<f64>,
    pub printed_poles: Vec<f64>,
}

impl StateReport {
    pub fn berry_discrepancy(&self, tol: f64) -> bool {
        (self.berry_formula - self.berry_numeric).abs() > tol
    }

    pub fn printed_discrepancy(&self, tol: f64) -> bool {
        self.printed_deviation.is_some_and(|d| d > tol)
    }

    /// Human-readable disagreements; empty when everything matches within `tol`.
    pub fn discrepancies(&self, tol: f64) -> Vec<String> {
        let mut out = Vec::new();
        if self.berry_discrepancy(tol) {
            out.push(format!(
                "({},{}) Berry connection: closed form {} vs quadrature {}",
                self.n, self.l, self.berry_formula, self.berry_numeric
            ));
        }
        if let Some(d) = self.printed_deviation.filter(|d| *d > tol) {
            out.push(format!("({},{}) printed CD bracket differs from recurrence form by up to {d}", self.n, self.l));
        }
        if self.printed_poles != self.canonical_poles && self.printed_deviation.is_some() {
            out.push(format!(
                "({},{}) printed CD poles {:?} vs radial nodes {:?}",
                self.n, self.l, self.printed_poles, self.canonical_poles
            ));
        }
        out
    }
}

pub fn state_report(s: &HydrogenicState, gdot: f64) -> Result<StateReport> {
    let berry_numeric = berry_connection_numeric(s, gdot)?;
    let canonical_poles = radial_nodes(s)?;
    let printed_poles: Vec<f64> = printed_pole(s).into_iter().collect();
    let berry = if gdot == 0.0 { 0.0 } else { berry_numeric * s.g / gdot };
    // Sample a few Bohr lengths while staying clear of either set of poles.
    let reach = 4.0 * s.n as f64 / s.rate();
    let printed_deviation = printed_cd_bracket(s, 1.0).map(|_| {
        (1..=400)
            .map(|i| reach * i as f64 / 400.0)
            .filter(|r| canonical_poles.iter().chain(&printed_poles).all(|p| (r - p).abs() > 1e-3 * reach))
            .filter_map(|r| {
                let canonical = radial_g_derivative(s, r).ok()? - berry;
                Some((printed_cd_bracket(s, r)? - canonical).abs())
            })
            .fold(0.0, f64::max)
    });
    Ok(StateReport {
        n: s.n,
        l: s.l,
        berry_formula: berry_connection_formula(s, gdot),
        berry_numeric,
        diagonal_cd: diagonal_cd_expectation(s, gdot)?,
        printed_deviation,
        canonical_poles,
        printed_poles,
    })
}

/// Reports for every `(n, l)` with `n ≤ max_n`.
pub fn coulomb_report(g: f64, m_fast: f64, hbar: f64, gdot: f64, max_n: u32) -> Result<Vec<StateReport>> {
    let mut rows = Vec::new();
    for n in 1..=max_n {
        for l in 0..n {
            rows.push(state_report(&HydrogenicState::with_hbar(n, l, g, m_fast, hbar)?, gdot)?);
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state(n: u32, l: u32) -> HydrogenicState {
        HydrogenicState::new(n, l, 1.0, 1.0).unwrap()
    }

    #[test]
    fn ground_state_value_and_energies() {
        assert!((radial_wavefunction(&state(1, 0), 0.0) - 2.0).abs() < 1e-14);
        assert!((hydrogenic_energy(&state(1, 0)) + 0.5).abs() < 1e-15);
        assert!((hydrogenic_energy(&state(2, 0)) + 0.125).abs() < 1e-15);
        assert!((slow_total_energy(&state(1, 0), 2.0, 1) - (5.0 - 0.5)).abs() < 1e-14);
    }

    #[test]
    fn explicit_low_states() {
        // R₂₀ = (1/√2)(1 − r/2)e^{−r/2}, R₂₁ = (1/√24) r e^{−r/2} in atomic units.
        for &r in &[0.0, 0.3, 1.7, 4.0, 9.5] {
            let r20 = (1.0 - r / 2.0) * (-r / 2.0_f64).exp() / 2.0_f64.sqrt();
            let r21 = r * (-r / 2.0_f64).exp() / 24.0_f64.sqrt();
            assert!((radial_wavefunction(&state(2, 0), r) - r20).abs() < 1e-14);
            assert!((radial_wavefunction(&state(2, 1), r) - r21).abs() < 1e-14);
        }
    }

    #[test]
    fn second_state_node() {
        let s = HydrogenicState::with_hbar(2, 0, 1.5, 2.0, 0.8).unwrap();
        let nodes = radial_nodes(&s).unwrap();
        let expected = 2.0 * 0.64 / (2.0 * 1.5);
        assert_eq!(nodes.len(), 1);
        assert!((nodes[0] - expected).abs() < 1e-12);
        assert!(radial_wavefunction(&s, expected).abs() < 1e-12);
        assert!(matches!(radial_g_derivative(&s, expected), Err(Error::RadialNode { .. })));
    }

    #[test]
    fn norms_and_orthogonality() {
        for n in 1..=4 {
            for l in 0..n {
                let s = HydrogenicState::with_hbar(n, l, 0.7, 1.3, 1.1).unwrap();
                assert!((radial_norm(&s).unwrap() - 1.0).abs() < 1e-8, "({n},{l})");
            }
        }
        for l in 0..3 {
            for n in (l + 1)..=3 {
                for m in (l + 1)..=3 {
                    let o = radial_overlap(&state(n, l), &state(m, l)).unwrap();
                    let expected = if n == m { 1.0 } else { 0.0 };
                    assert!((o - expected).abs() < 1e-8, "<{n}{l}|{m}{l}> = {o}");
                }
            }
        }
    }

    #[test]
    fn bracket_examples() {
        let s = HydrogenicState::with_hbar(1, 0, 1.4, 0.6, 0.9).unwrap();
        let s21 = HydrogenicState::with_hbar(2, 1, 1.4, 0.6, 0.9).unwrap();
        let h2 = 0.81;
        for &r in &[0.1, 1.0, 3.3] {
            let b = radial_g_derivative(&s, r).unwrap();
            assert!((b - (1.5 - 0.6 * 1.4 * r / h2)).abs() < 1e-13);
            assert!((printed_cd_bracket(&s, r).unwrap() - b).abs() < 1e-13);
            let b21 = radial_g_derivative(&s21, r).unwrap();
            assert!((b21 - (2.5 - 0.6 * 1.4 * r / (2.0 * h2))).abs() < 1e-13);
        }
    }

    #[test]
    fn bracket_matches_finite_differences() {
        let h = 1e-5;
        for n in 1..=3 {
            for l in 0..n {
                let s = HydrogenicState::new(n, l, 1.2, 0.9).unwrap();
                for i in 1..=50 {
                    let r = 0.173 * i as f64;
                    let Ok(b) = radial_g_derivative(&s, r) else { continue };
                    let at = |g: f64| radial_wavefunction(&s.with_coupling(g).unwrap(), r);
                    let fd = (at(1.2 + h) - at(1.2 - h)) / (2.0 * h);
                    let value = b / 1.2 * at(1.2);
                    // Near a node both sides are small; compare on the wavefunction scale.
                    assert!((fd - value).abs() <= 1e-6 * fd.abs().max(1e-3), "({n},{l}) r={r}: {fd} vs {value}");
                }
            }
        }
    }

    #[test]
    fn berry_formula_conventions() {
        let gdot = 0.3;
        let s = HydrogenicState::new(1, 0, 2.0, 1.0).unwrap();
        assert_eq!(berry_connection_formula(&s, gdot), 0.0);
        let s21 = HydrogenicState::new(2, 1, 2.0, 1.0).unwrap();
        assert!((berry_connection_formula(&s21, gdot) + gdot / 2.0).abs() < 1e-15);
        let s20 = HydrogenicState::new(2, 0, 2.0, 1.0).unwrap();
        let expected = gdot / 2.0 * (0.5 - 1.0 - 3.0 * 4.0 / 4.0);
        assert!((berry_connection_formula(&s20, gdot) - expected).abs() < 1e-14);
    }

    #[test]
    fn connection_and_diagonal_cd_vanish() {
        for n in 1..=4 {
            for l in 0..n {
                let s = HydrogenicState::new(n, l, 0.8, 1.7).unwrap();
                assert!(berry_connection_numeric(&s, 1.3).unwrap().abs() < 1e-8, "({n},{l})");
                assert!(diagonal_cd_expectation(&s, 1.3).unwrap().abs() < 1e-8, "({n},{l})");
            }
        }
    }

    #[test]
    fn ground_state_mean_radius_cancels_bracket() {
        let s = HydrogenicState::with_hbar(1, 0, 1.1, 0.7, 1.2).unwrap();
        let mean_r = radial_integral(s.rate(), |r| radial_wavefunction(&s, r).powi(2) * r.powi(3)).unwrap();
        assert!((mean_r - 1.5 * 1.44 / (0.7 * 1.1)).abs() < 1e-10);
    }

    #[test]
    fn cd_profile() {
        let s = state(2, 0);
        let radii = [0.5, 2.0, 3.0];
        let p = cd_potential(&s, 0.4, &radii).unwrap();
        assert!(p.has_poles());
        assert_eq!(p.coefficients[1], None);
        let expected = (2.5 - 0.25 - 2.0 / 1.5) * 0.4;
        assert!((p.coefficients[0].unwrap() - expected).abs() < 1e-8);
        let idle = cd_potential(&s, 0.0, &radii).unwrap();
        assert!(idle.coefficients.iter().all(|c| *c == Some(0.0)));
    }

    #[test]
    fn report_flags_printed_forms() {
        let rows = coulomb_report(1.0, 1.0, 1.0, 1.0, 2).unwrap();
        let flagged: Vec<String> = rows.iter().flat_map(|r| r.discrepancies(1e-8)).collect();
        assert!(rows[0].discrepancies(1e-8).is_empty());
        assert!(flagged.iter().any(|m| m.starts_with("(2,0)")));
        assert!(flagged.iter().any(|m| m.starts_with("(2,1)")));
        let r21 = rows.iter().find(|r| (r.n, r.l) == (2, 1)).unwrap();
        assert!((r21.printed_deviation.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn radial_grid_reproduces_ground_energy() {
        use crate::grid::{build_hamiltonian, lowest_eigenpairs, Axis, Grid};
        // u = rR obeys −½u'' − u/r = εu with u(0) = 0.
        let energy = |n: usize| {
            let grid = Grid::line(Axis::radial(20.0, n).unwrap());
            let h = build_hamiltonian(&grid, &[1.0], 1.0, |x| -1.0 / x[0]).unwrap();
            lowest_eigenpairs(&h, 1).unwrap().values[0]
        };
        let e = energy(1000);
        assert!((e + 0.5).abs() < 1e-3 * 0.5, "{e}");
    }

    #[test]
    fn invalid_states() {
        assert!(matches!(HydrogenicState::new(0, 0, 1.0, 1.0), Err(Error::InvalidQuantumNumbers { .. })));
        assert!(matches!(HydrogenicState::new(2, 2, 1.0, 1.0), Err(Error::InvalidQuantumNumbers { .. })));
        assert!(HydrogenicState::new(1, 0, -1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn norm_is_independent_of_coupling(g in 0.1f64..5.0, m in 0.2f64..3.0, n in 1u32..5) {
            let s = HydrogenicState::new(n, n - 1, g, m).unwrap();
            prop_assert!((radial_norm(&s).unwrap() - 1.0).abs() < 1e-8);
        }
    }
}
