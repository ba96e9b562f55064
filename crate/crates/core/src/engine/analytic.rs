// Copyright 2026 The galton-dnp Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form exit populations of the uniform board.
//!
//! On a board whose anti-diagonal is fully adiabatic and whose other nodes
//! send population down with probability `q` and right with probability `p`,
//! the readout of nuclear state `n` (board side `M = 2^N`) is
//!
//! ```text
//! P_n = 1/M * ( sum_{l=1}^{M-1} [ C(n-3+M-l, n-2) p^(M-l) q^(n-2)
//!                               + C(2M-n-l-2, M-n-l) p^(M-n-l) q^(M-1) ]
//!               + [n == 1] )
//! ```
//!
//! with `C(a, b) = 0` outside `0 <= b <= a`. The first sum plus the `n == 1`
//! term is the `m_s = +1` occupation and the second sum the `m_s = 0`
//! occupation. Both sums are negative-binomial tails:
//!
//! ```text
//! first(n)  = (p / q) * I_q(n - 1, M - 1)      (n >= 2)
//! second(n) = I_q(M - 1, M - n)                (n <= M - 1)
//! ```
//!
//! where `I_x(a, b)` is the regularised incomplete beta function. Small boards
//! are summed term by term in log space; large boards evaluate the tails with
//! an O(M) recurrence over saddle-point binomial probabilities.

use statrs::function::gamma::ln_gamma;

use super::population::PopulationVector;
use super::EngineError;

/// Largest spin count accepted.
pub const MAX_ANALYTIC_SPINS: usize = 20;
/// Boards up to this spin count are summed term by term.
pub const DIRECT_SUM_SPINS: usize = 10;

/// Exit populations of the uniform board with side `n_states = 2^N`.
pub fn analytic_full_sweep(
    n_states: usize,
    p: f64,
    q: f64,
) -> Result<PopulationVector, EngineError> {
    check_inputs(n_states, p, q)?;
    if n_states.trailing_zeros() as usize <= DIRECT_SUM_SPINS {
        Ok(direct(n_states, p, q))
    } else {
        Ok(via_tails(n_states, p, q))
    }
}

fn check_inputs(n_states: usize, p: f64, q: f64) -> Result<(), EngineError> {
    for v in [p, q] {
        if !(0.0..=1.0).contains(&v) {
            return Err(EngineError::ProbabilityOutOfRange(v));
        }
    }
    if (p + q - 1.0).abs() > 1e-12 {
        return Err(EngineError::ProbabilitySum(p + q));
    }
    if n_states < 2 || !n_states.is_power_of_two() {
        return Err(EngineError::BadBoardSize(n_states));
    }
    if n_states.trailing_zeros() as usize > MAX_ANALYTIC_SPINS {
        return Err(EngineError::TooManySpins(n_states.trailing_zeros() as usize));
    }
    Ok(())
}

/// `ln C(a, b)`, or `None` where the binomial vanishes.
fn ln_choose(a: i64, b: i64) -> Option<f64> {
    if b < 0 || a < 0 || b > a {
        return None;
    }
    Some(ln_gamma(a as f64 + 1.0) - ln_gamma(b as f64 + 1.0) - ln_gamma((a - b) as f64 + 1.0))
}

/// `C(a, b) x^i y^j` evaluated in log space; `0^0 = 1`.
fn term(a: i64, b: i64, x: f64, i: i64, y: f64, j: i64) -> f64 {
    let Some(lc) = ln_choose(a, b) else {
        return 0.0;
    };
    let pow = |base: f64, e: i64| -> Option<f64> {
        match (base == 0.0, e) {
            (_, 0) => Some(0.0),
            (true, _) => None,
            (false, _) => Some(e as f64 * base.ln()),
        }
    };
    match (pow(x, i), pow(y, j)) {
        (Some(lx), Some(ly)) => (lc + lx + ly).exp(),
        _ => 0.0,
    }
}

/// The two bracketed sums for every `n`, term by term.
fn direct(m: usize, p: f64, q: f64) -> PopulationVector {
    let mi = m as i64;
    let mut plus = vec![0.0; m];
    let mut zero = vec![0.0; m];
    for n in 1..=mi {
        let mut first = 0.0;
        let mut second = 0.0;
        for l in 1..mi {
            first += term(n - 3 + mi - l, n - 2, p, mi - l, q, n - 2);
            let e = mi - n - l;
            if e >= 0 {
                second += term(e + mi - 2, e, p, e, q, mi - 1);
            }
        }
        if n == 1 {
            first += 1.0;
        }
        plus[(n - 1) as usize] = first / m as f64;
        zero[(n - 1) as usize] = second / m as f64;
    }
    PopulationVector {
        manifold0: zero,
        manifold1: plus,
    }
}

fn via_tails(m: usize, p: f64, q: f64) -> PopulationVector {
    let mf = m as f64;
    let mut plus = vec![0.0; m];
    let mut zero = vec![0.0; m];
    plus[0] = 1.0 / mf;
    if q == 0.0 {
        // only the q^0 term survives
        plus[1] = (mf - 1.0) / mf;
        return PopulationVector {
            manifold0: zero,
            manifold1: plus,
        };
    }
    if p == 0.0 {
        for z in zero.iter_mut().take(m - 1) {
            *z = 1.0 / mf;
        }
        return PopulationVector {
            manifold0: zero,
            manifold1: plus,
        };
    }
    // second(n) = sum_{e=0}^{M-n-1} q * b(M-2; e+M-2, q), accumulated upwards in e
    let r = m - 1;
    let mut acc = 0.0;
    for n in (1..m).rev() {
        let e = m - n - 1;
        acc += q * ln_binomial_pmf(r - 1, e + r - 1, p, q).exp();
        zero[n - 1] = acc / mf;
    }
    // first(n) = (p/q) F(n-1) with F(s) = P[Bin(M-2+s, q) >= s] and
    // F(s) = F(s+1) + p * b(s; M-2+s, q)
    let k = m - 2;
    let top = m - 1;
    let trials = k + top;
    let mut f: f64 = (top..=trials)
        .map(|i| ln_binomial_pmf(i, trials, p, q).exp())
        .sum();
    plus[top] = p / q * f / mf;
    for s in (1..top).rev() {
        f += p * ln_binomial_pmf(s, k + s, p, q).exp();
        plus[s] = p / q * f / mf;
    }
    PopulationVector {
        manifold0: zero,
        manifold1: plus,
    }
}

/// `ln[C(n, x) q^x p^(n-x)]` by the saddle-point expansion, accurate for
/// large `n` where differences of log-gamma values lose digits. Note the
/// success probability is `q`.
fn ln_binomial_pmf(x: usize, n: usize, p: f64, q: f64) -> f64 {
    if x == 0 {
        return n as f64 * p.ln();
    }
    if x == n {
        return n as f64 * q.ln();
    }
    let (xf, nf) = (x as f64, n as f64);
    let y = nf - xf;
    let lc = stirling_error(nf)
        - stirling_error(xf)
        - stirling_error(y)
        - deviance(xf, nf * q)
        - deviance(y, nf * p);
    let lf = (2.0 * std::f64::consts::PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)]`.
fn stirling_error(n: f64) -> f64 {
    if n <= 15.0 {
        let half_ln_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        return ln_gamma(n + 1.0) - (n + 0.5) * n.ln() + n - half_ln_2pi;
    }
    let nn = n * n;
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
}

/// `x ln(x / np) + np - x`, evaluated without cancellation near `x = np`.
fn deviance(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s;
            }
            s = s1;
        }
        return s;
    }
    x * (x / np).ln() + np - x
}
