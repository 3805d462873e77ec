//! Independent numerical references for the closed forms: classical RK4 on the
//! 2x2 fundamental matrix, and explicit Fock-space enumeration of the input
//! correlators on a discretized mode basis.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::config::TimeGrid;
use crate::error::{invalid, Error, Result};
use crate::propagator::Propagator;
use crate::source::{pulse_envelope, PulseTrainSpec};

pub type Matrix2 = [[Complex64; 2]; 2];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn identity() -> Matrix2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

fn mul(a: &Matrix2, b: &Matrix2) -> Matrix2 {
    let mut out = [[ZERO; 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn axpy(m: &Matrix2, k: &Matrix2, s: f64) -> Matrix2 {
    let mut out = *m;
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] += k[i][j] * s;
        }
    }
    out
}

fn max_abs_diff(a: &Matrix2, b: &Matrix2) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            d = d.max((a[i][j] - b[i][j]).norm());
        }
    }
    d
}

/// Result of integrating `M' = A M`, `M(0) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub tau: f64,
    pub step: f64,
    pub steps: usize,
    pub matrix: Matrix2,
    /// Richardson estimate `|M_h - M_2h| / 15`.
    pub error_estimate: f64,
}

impl OdeSolution {
    /// `(f1p, f1i, f2)` read off `M = [[f1p, -f2], [f2*, f1i]]`.
    pub fn coefficients(&self) -> (Complex64, Complex64, Complex64) {
        (self.matrix[0][0], self.matrix[1][1], -self.matrix[0][1])
    }

    /// `f2` recovered from the first column instead of the second.
    pub fn f2_from_first_column(&self) -> Complex64 {
        self.matrix[1][0].conj()
    }
}

fn integrate_rk4(a: &Matrix2, tau: f64, steps: usize) -> Matrix2 {
    let h = tau / steps as f64;
    let mut m = identity();
    for _ in 0..steps {
        let k1 = mul(a, &m);
        let k2 = mul(a, &axpy(&m, &k1, 0.5 * h));
        let k3 = mul(a, &axpy(&m, &k2, 0.5 * h));
        let k4 = mul(a, &axpy(&m, &k3, h));
        for i in 0..2 {
            for j in 0..2 {
                m[i][j] += (k1[i][j] + 2.0 * k2[i][j] + 2.0 * k3[i][j] + k4[i][j]) * (h / 6.0);
            }
        }
    }
    m
}

/// Largest step admitted for a given delay and set of rates.
pub fn max_step(omega0: f64, kappa_p: f64, kappa_i: f64, tau: f64) -> f64 {
    let rate = omega0
        .abs()
        .max(kappa_p.abs())
        .max(kappa_i.abs())
        .max(1e-300);
    (tau / 100.0).min(0.01 / rate)
}

/// Classical fourth-order Runge-Kutta for the fundamental matrix of
/// `d/dy [psi_p, psi_i] = [[-kappa_p, -Omega], [Omega*, -kappa_i]] [psi_p, psi_i]`.
pub fn rk4_fundamental_matrix(
    omega0: f64,
    phi_s: f64,
    kappa_p: f64,
    kappa_i: f64,
    tau: f64,
    h: f64,
) -> Result<OdeSolution> {
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::Domain(format!(
            "delay must be non-negative, got {tau}"
        )));
    }
    if tau == 0.0 {
        return Ok(OdeSolution {
            tau,
            step: 0.0,
            steps: 0,
            matrix: identity(),
            error_estimate: 0.0,
        });
    }
    let bound = max_step(omega0, kappa_p, kappa_i, tau);
    if !(h.is_finite() && h > 0.0) || h > bound * (1.0 + 1e-12) {
        return Err(Error::StepSize { h, bound });
    }
    let omega = Complex64::from_polar(omega0, phi_s);
    let a: Matrix2 = [
        [Complex64::new(-kappa_p, 0.0), -omega],
        [omega.conj(), Complex64::new(-kappa_i, 0.0)],
    ];
    let mut steps = (tau / h).ceil() as usize;
    steps += steps % 2;
    let fine = integrate_rk4(&a, tau, steps);
    let coarse = integrate_rk4(&a, tau, steps / 2);
    Ok(OdeSolution {
        tau,
        step: tau / steps as f64,
        steps,
        matrix: fine,
        error_estimate: max_abs_diff(&fine, &coarse) / 15.0,
    })
}

/// RK4 coefficient triple `(f1p, f1i, f2)`.
pub fn rk4_propagator(
    omega0: f64,
    phi_s: f64,
    kappa_p: f64,
    kappa_i: f64,
    tau: f64,
    h: f64,
) -> Result<(Complex64, Complex64, Complex64)> {
    Ok(rk4_fundamental_matrix(omega0, phi_s, kappa_p, kappa_i, tau, h)?.coefficients())
}

/// Largest coefficient deviation between the closed form and RK4 at `tau`,
/// using a step ten times finer than the admissible bound.
pub fn coefficient_deviation(prop: &Propagator, tau: f64) -> Result<f64> {
    let (kp, ki) = (prop.rates.kappa_p, prop.rates.kappa_i);
    let closed = prop.coefficients(tau)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    let h = 0.1 * max_step(prop.omega0, kp, ki, tau);
    let (f1p, f1i, f2) = rk4_propagator(prop.omega0, prop.phi_s, kp, ki, tau, h)?;
    Ok((f1p - closed.f1p)
        .norm()
        .max((f1i - closed.f1i).norm())
        .max((f2 - closed.f2).norm()))
}

/// Discrete time bins standing in for the continuum field,
/// `psi(t_m) = b_m / sqrt(w_m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeGrid {
    pub times: Vec<f64>,
    pub weights: Vec<f64>,
}

impl ModeGrid {
    pub fn uniform(grid: TimeGrid) -> Self {
        let w = grid.dt();
        Self {
            times: grid.to_vec(),
            weights: vec![w; grid.len()],
        }
    }

    /// Concatenation of disjoint uniform windows.
    pub fn windows(grids: &[TimeGrid]) -> Result<Self> {
        let mut out = Self {
            times: Vec::new(),
            weights: Vec::new(),
        };
        for g in grids {
            if out.times.last().is_some_and(|&t| g.t_start() <= t) {
                return Err(invalid("mode windows must be sorted and disjoint"));
            }
            let part = Self::uniform(*g);
            out.times.extend(part.times);
            out.weights.extend(part.weights);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Correlators of the discretized state, converted back to continuum units.
#[derive(Debug, Clone, PartialEq)]
pub struct FockCorrelators {
    pub times: Vec<f64>,
    /// `n_p(t_a)` (1/s).
    pub rate: Vec<f64>,
    /// `<psi^+(t_a) psi(t_b)>` (1/s), indexed `[a][b]`.
    pub g1: Vec<Vec<Complex64>>,
    /// `<psi^+(t_a) psi^+(t_b) psi(t_b) psi(t_a)>` (1/s^2), indexed `[a][b]`.
    pub g2: Vec<Vec<f64>>,
    /// Norm of the discretized state before normalization.
    pub raw_norm: f64,
}

pub const MAX_ENUMERATED_PULSES: usize = 3;

type Occupation = Vec<u16>;
type State = HashMap<Occupation, Complex64>;

fn create(state: &State, mode: u16, amp: Complex64, out: &mut State) {
    for (occ, &a) in state {
        let n = occ.iter().filter(|&&m| m == mode).count();
        let mut next = occ.clone();
        let pos = next.partition_point(|&m| m <= mode);
        next.insert(pos, mode);
        *out.entry(next).or_insert(ZERO) += a * amp * ((n + 1) as f64).sqrt();
    }
}

fn annihilate(state: &State, mode: u16) -> State {
    let mut out = State::new();
    for (occ, &a) in state {
        let n = occ.iter().filter(|&&m| m == mode).count();
        if n == 0 {
            continue;
        }
        let mut next = occ.clone();
        let pos = next
            .iter()
            .position(|&m| m == mode)
            .expect("mode is occupied");
        next.remove(pos);
        *out.entry(next).or_insert(ZERO) += a * (n as f64).sqrt();
    }
    out
}

fn inner(a: &State, b: &State) -> Complex64 {
    let (small, large, flip) = if a.len() <= b.len() {
        (a, b, false)
    } else {
        (b, a, true)
    };
    let mut acc = ZERO;
    for (occ, &x) in small {
        if let Some(&y) = large.get(occ) {
            acc += if flip { y.conj() * x } else { x.conj() * y };
        }
    }
    acc
}

fn norm_sqr(s: &State) -> f64 {
    s.values().map(Complex64::norm_sqr).sum()
}

/// Builds `prod_j (sum_m u_j(t_m) sqrt(w_m) b_m^+) |vac>` explicitly and
/// evaluates the two- and four-operator expectations by direct summation.
pub fn brute_force_fock_correlators(
    spec: &PulseTrainSpec,
    grid: &ModeGrid,
) -> Result<FockCorrelators> {
    if spec.n_pulses > MAX_ENUMERATED_PULSES {
        return Err(Error::TooManyPulses {
            got: spec.n_pulses,
            max: MAX_ENUMERATED_PULSES,
        });
    }
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if grid.len() > u16::MAX as usize {
        return Err(invalid("too many modes for enumeration"));
    }
    let m_count = grid.len();

    let mut psi = State::new();
    psi.insert(Vec::new(), ONE);
    for j in 1..=spec.n_pulses {
        let mut next = State::new();
        for m in 0..m_count {
            let c = pulse_envelope(spec, j, grid.times[m]) * grid.weights[m].sqrt();
            if c != ZERO {
                create(&psi, m as u16, c, &mut next);
            }
        }
        psi = next;
    }
    let raw_norm = norm_sqr(&psi);
    let scale = 1.0 / raw_norm.sqrt();
    psi.values_mut().for_each(|a| *a *= scale);

    let lowered: Vec<State> = (0..m_count).map(|a| annihilate(&psi, a as u16)).collect();
    let mut g1 = vec![vec![ZERO; m_count]; m_count];
    let mut g2 = vec![vec![0.0; m_count]; m_count];
    for a in 0..m_count {
        for b in 0..m_count {
            let w = (grid.weights[a] * grid.weights[b]).sqrt();
            g1[a][b] = inner(&lowered[a], &lowered[b]) / w;
            g2[a][b] = norm_sqr(&annihilate(&lowered[a], b as u16)) / (w * w);
        }
    }
    let rate = (0..m_count).map(|a| g1[a][a].re).collect();
    Ok(FockCorrelators {
        times: grid.times.clone(),
        rate,
        g1,
        g2,
        raw_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::propagator_coeffs;
    use crate::source::{input_g2, input_rate};
    use std::f64::consts::PI;

    #[test]
    fn lossless_quarter_rotation() {
        let phi = 0.7;
        let tau = PI / 2.0;
        let h = max_step(1.0, 0.0, 0.0, tau);
        let (f1p, f1i, f2) = rk4_propagator(1.0, phi, 0.0, 0.0, tau, h).unwrap();
        assert!(f1p.norm() < 1e-9 && f1i.norm() < 1e-9);
        assert!((f2 - Complex64::from_polar(1.0, phi)).norm() < 1e-9);
    }

    #[test]
    fn zero_delay_is_identity() {
        let (f1p, f1i, f2) = rk4_propagator(1.0, 0.0, 0.1, 0.2, 0.0, 1.0).unwrap();
        assert_eq!((f1p, f1i, f2), (ONE, ONE, ZERO));
    }

    #[test]
    fn step_size_guard() {
        assert!(matches!(
            rk4_propagator(1.0, 0.0, 0.0, 0.0, 1.0, 0.1),
            Err(Error::StepSize { .. })
        ));
    }

    #[test]
    fn both_columns_agree_and_error_is_small() {
        let sol = rk4_fundamental_matrix(1.2, 0.3, 0.4, -0.2, 2.0, 1e-3).unwrap();
        assert!((sol.f2_from_first_column() - sol.coefficients().2).norm() < 1e-12);
        assert!(sol.error_estimate < 1e-12);
        let closed = propagator_coeffs(1.2, 0.3, 0.4, -0.2, 2.0).unwrap();
        assert!((sol.coefficients().2 - closed.f2).norm() < 1e-10);
    }

    fn small_train(n: usize) -> (PulseTrainSpec, ModeGrid) {
        let spec = PulseTrainSpec::new(n, 10.0, 1.0).unwrap();
        let grid =
            TimeGrid::new(10.0 - 7.0, n as f64 * 10.0 + 7.0, ((n - 1) * 20 + 28) + 1).unwrap();
        (spec, ModeGrid::uniform(grid))
    }

    #[test]
    fn single_photon_has_no_pairs() {
        let (spec, grid) = small_train(1);
        let fc = brute_force_fock_correlators(&spec, &grid).unwrap();
        assert!(fc.g2.iter().flatten().all(|&v| v == 0.0));
        let total: f64 = fc.rate.iter().zip(&grid.weights).map(|(r, w)| r * w).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_pulses_match_closed_form() {
        let (spec, grid) = small_train(2);
        let fc = brute_force_fock_correlators(&spec, &grid).unwrap();
        let total: f64 = fc.rate.iter().zip(&grid.weights).map(|(r, w)| r * w).sum();
        assert!((total - 2.0).abs() < 1e-10);
        let a = grid
            .times
            .iter()
            .position(|&t| (t - 10.0).abs() < 1e-9)
            .unwrap();
        let b = grid
            .times
            .iter()
            .position(|&t| (t - 20.0).abs() < 1e-9)
            .unwrap();
        let want = input_g2(&spec, 10.0, 10.0);
        assert!((fc.g2[a][b] - want).abs() <= 1e-6 * want);
        assert!((fc.rate[a] - input_rate(&spec, 10.0)).abs() <= 1e-6 * fc.rate[a]);
    }

    #[test]
    fn rejects_large_trains() {
        let spec = PulseTrainSpec::new(4, 10.0, 1.0).unwrap();
        let grid = ModeGrid::uniform(TimeGrid::new(0.0, 1.0, 3).unwrap());
        assert!(matches!(
            brute_force_fock_correlators(&spec, &grid),
            Err(Error::TooManyPulses { got: 4, max: 3 })
        ));
    }
}
