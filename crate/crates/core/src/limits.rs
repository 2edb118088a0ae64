//! Closed-form spectra, limiting spectral measures, the covering functional
//! `J = -int ln(1 - x) nu(dx)` and the predicted covering limits.

use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::graph::DegreeWeightBounds;
use crate::rng::replicate_rng;
use crate::spectral::Spectrum;

/// Eigenvalues `(1/d) sum_i cos(2 pi p_i / side)` of the walk on the torus.
pub fn torus_eigenvalues(dim: usize, side: usize) -> Result<Spectrum> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    if side < 3 {
        return Err(Error::InvalidArgument(format!(
            "side must be >= 3 for the cosine formula, got {side}"
        )));
    }
    let count = side
        .checked_pow(dim as u32)
        .ok_or_else(|| Error::Infeasible("torus too large".into()))?;
    let cosines: Vec<f64> = (0..side)
        .map(|p| (2.0 * PI * p as f64 / side as f64).cos())
        .collect();
    let values = (0..count)
        .map(|mut idx| {
            let mut s = 0.0;
            for _ in 0..dim {
                s += cosines[idx % side];
                idx /= side;
            }
            s / dim as f64
        })
        .collect();
    Ok(Spectrum::from_values(values))
}

/// A numerical value with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TorusJMethod {
    /// Midpoint rule with Romberg extrapolation after subtracting the
    /// logarithmic singularity at the origin.
    Quadrature,
    /// `sum_k m_{2k} / (2k)` over the return probabilities of the walk on `Z^d`,
    /// with an asymptotic tail; dimensions 1 and 2.
    Series,
}

const QUADRATURE_TOL: f64 = 1e-10;
/// From dimension 3 on the cell cap allows at most 2^8 cells per side.
const QUADRATURE_TOL_HIGH_DIM: f64 = 1e-8;
const QUADRATURE_MAX_CELLS: usize = 1 << 24;

/// Midpoint sum of `f` over the cells of the grid with `n` cells per side on
/// `[-1/2, 1/2]^dim`, skipping cells where `skip` holds.
fn midpoint_sum(dim: usize, n: usize, f: &dyn Fn(&[f64]) -> f64, skip: &dyn Fn(&[usize]) -> bool) -> f64 {
    let h = 1.0 / n as f64;
    let mut idx = vec![0usize; dim];
    let mut x = vec![0.0; dim];
    let mut slabs = vec![0.0; n];
    let total = n.pow(dim as u32);
    for _ in 0..total {
        if !skip(&idx) {
            for (xi, &i) in x.iter_mut().zip(&idx) {
                *xi = -0.5 + (i as f64 + 0.5) * h;
            }
            slabs[idx[0]] += f(&x);
        }
        for i in idx.iter_mut() {
            *i += 1;
            if *i < n {
                break;
            }
            *i = 0;
        }
    }
    pairwise_sum(&slabs) * h.powi(dim as i32)
}

fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        v.iter().sum()
    } else {
        let (a, b) = v.split_at(v.len() / 2);
        pairwise_sum(a) + pairwise_sum(b)
    }
}

/// Romberg extrapolation of the midpoint rule, doubling `n` from `n0` until two
/// successive diagonal entries agree to `tol`.
fn romberg(dim: usize, n0: usize, f: &dyn Fn(&[f64]) -> f64, skip_inner_quarter: bool, tol: f64) -> Result<Estimate> {
    let mut table: Vec<Vec<f64>> = Vec::new();
    let mut n = n0;
    loop {
        let skip = |idx: &[usize]| {
            skip_inner_quarter && idx.iter().all(|&i| i >= n / 4 && i < 3 * n / 4)
        };
        let base = midpoint_sum(dim, n, f, &skip);
        let mut row = vec![base];
        if let Some(prev) = table.last() {
            for j in 0..prev.len() {
                let factor = 4f64.powi(j as i32 + 1);
                row.push((factor * row[j] - prev[j]) / (factor - 1.0));
            }
            let error = (row[row.len() - 1] - prev[prev.len() - 1]).abs();
            if error < tol {
                return Ok(Estimate {
                    value: row[row.len() - 1],
                    error,
                });
            }
            if (2 * n).pow(dim as u32) > QUADRATURE_MAX_CELLS {
                return Err(Error::Quadrature {
                    estimate: row[row.len() - 1],
                    error,
                });
            }
        }
        table.push(row);
        n *= 2;
    }
}

/// `int_{[-1/2,1/2]^d} ln |x|^2 dx`, from the self-similar identity
/// `U (1 - 2^{-d}) = int_{shell} ln |x|^2 - 2^{1-d} ln 2` where the shell is the
/// cube minus `[-1/4, 1/4]^d`.
fn log_norm_integral(dim: usize, tol: f64) -> Result<Estimate> {
    let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().ln();
    let shell = romberg(dim, 8, &f, true, tol)?;
    let scale = 1.0 - 0.5f64.powi(dim as i32);
    Ok(Estimate {
        value: (shell.value - 2.0 * 0.5f64.powi(dim as i32) * 2f64.ln()) / scale,
        error: shell.error / scale,
    })
}

/// `J_d = int_{[0,1]^d} -ln(1 - (cos 2 pi x_1 + ... + cos 2 pi x_d)/d) dx`.
pub fn torus_limit_j(dim: usize, method: TorusJMethod) -> Result<Estimate> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be >= 1".into()));
    }
    match method {
        TorusJMethod::Quadrature => torus_j_quadrature(dim),
        TorusJMethod::Series => torus_j_series(dim, 100_000),
    }
}

// 1 - phi(x) = (2/d) sum_i sin^2(pi x_i), which behaves like (2 pi^2/d) |x|^2 at
// the origin. The integrand splits into the smooth -ln((1 - phi)/((2 pi^2/d)|x|^2))
// and the model term -ln(2 pi^2/d) - ln |x|^2.
fn torus_j_quadrature(dim: usize) -> Result<Estimate> {
    let d = dim as f64;
    let smooth = |x: &[f64]| {
        let mut s = 0.0;
        let mut r2 = 0.0;
        for &v in x {
            let t = PI * v;
            let sinc = if t == 0.0 { 1.0 } else { t.sin() / t };
            s += (t * sinc).powi(2);
            r2 += t * t;
        }
        -(s / r2).ln()
    };
    let tol = if dim <= 2 { QUADRATURE_TOL } else { QUADRATURE_TOL_HIGH_DIM };
    let g = romberg(dim, 8, &smooth, false, tol)?;
    let u = log_norm_integral(dim, tol)?;
    Ok(Estimate {
        value: g.value - (2.0 * PI * PI / d).ln() - u.value,
        error: g.error + u.error,
    })
}

/// Asymptotic coefficients of `C(2k, k) / 4^k = (pi k)^{-1/2} sum_j c_j k^{-j}`.
const CENTRAL_BINOMIAL_SERIES: [f64; 5] = [1.0, -1.0 / 8.0, 1.0 / 128.0, 5.0 / 1024.0, -21.0 / 32768.0];

/// `sum_{k > K} k^{-s}` by Euler-Maclaurin.
fn zeta_tail(s: f64, k: f64) -> f64 {
    k.powf(1.0 - s) / (s - 1.0) - k.powf(-s) / 2.0 + s * k.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * k.powf(-s - 3.0) / 720.0
}

fn torus_j_series(dim: usize, terms: usize) -> Result<Estimate> {
    if dim > 2 {
        return Err(Error::InvalidArgument(format!(
            "the series route covers dimensions 1 and 2, got {dim}"
        )));
    }
    // P(S_{2k} = 0) on Z^d is (C(2k,k)/4^k)^d for d = 1, 2
    let mut m1 = 1.0;
    let mut head = Vec::with_capacity(terms);
    for k in 1..=terms {
        m1 *= (2 * k - 1) as f64 / (2 * k) as f64;
        head.push(m1.powi(dim as i32) / (2 * k) as f64);
    }
    let mut coeffs = vec![1.0];
    for _ in 0..dim {
        let mut next = vec![0.0; CENTRAL_BINOMIAL_SERIES.len()];
        for (i, a) in coeffs.iter().enumerate() {
            for (j, b) in CENTRAL_BINOMIAL_SERIES.iter().enumerate() {
                if i + j < next.len() {
                    next[i + j] += a * b;
                }
            }
        }
        coeffs = next;
    }
    let k = terms as f64;
    let prefactor = PI.powf(-(dim as f64) / 2.0) / 2.0;
    let s0 = dim as f64 / 2.0 + 1.0;
    let parts: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(j, c)| prefactor * c * zeta_tail(s0 + j as f64, k))
        .collect();
    let tail: f64 = parts.iter().sum();
    Ok(Estimate {
        value: pairwise_sum(&head) + tail,
        error: parts.last().unwrap().abs() * 10.0 + 1e-15 * k,
    })
}

/// The same integral as a randomly shifted rank-1 lattice average: `shifts`
/// Cranley-Patterson shifts of a Kronecker sequence with `points` nodes each.
/// The error estimate is the standard error across shifts.
pub fn torus_limit_j_qmc(dim: usize, points: usize, shifts: u64, seed: u64) -> Result<Estimate> {
    if dim == 0 || points == 0 || shifts < 2 {
        return Err(Error::InvalidArgument("need dim >= 1, points >= 1, shifts >= 2".into()));
    }
    // generalized golden ratio: the root > 1 of x^{d+1} = x + 1
    let mut phi = 2.0f64;
    for _ in 0..64 {
        phi = (1.0 + phi).powf(1.0 / (dim as f64 + 1.0));
    }
    let alpha: Vec<f64> = (1..=dim).map(|i| phi.powi(-(i as i32)).fract()).collect();
    let d = dim as f64;
    let estimates: Vec<f64> = (0..shifts)
        .map(|s| {
            let mut rng = replicate_rng(seed, s);
            let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
            let mut chunks = Vec::with_capacity(points / 4096 + 1);
            let mut acc = 0.0;
            for i in 0..points {
                let mut s2 = 0.0;
                for j in 0..dim {
                    let x = (shift[j] + alpha[j] * (i + 1) as f64).fract();
                    s2 += (PI * x).sin().powi(2);
                }
                acc += -(2.0 * s2 / d).ln();
                if i % 4096 == 4095 {
                    chunks.push(acc);
                    acc = 0.0;
                }
            }
            chunks.push(acc);
            pairwise_sum(&chunks) / points as f64
        })
        .collect();
    let n = estimates.len() as f64;
    let mean = estimates.iter().sum::<f64>() / n;
    let var = estimates.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(Estimate {
        value: mean,
        error: (var / n).sqrt(),
    })
}

/// Moment `m_{2k} = C(2k, k) / 4^k` of the arcsine law on `[-1, 1]`.
pub fn arcsine_even_moment(k: usize) -> f64 {
    (1..=k).fold(1.0, |m, j| m * (2 * j - 1) as f64 / (2 * j) as f64)
}

/// `B_M(lambda)` from `B_0 = lambda`, `B_1 = lambda^2 - 1/d` and
/// `B_{M+2} = lambda B_{M+1} - ((d-1)/d^2) B_M`.
pub fn tree_char_poly(m: usize, lambda: f64, d: usize) -> f64 {
    let df = d as f64;
    let k = (df - 1.0) / (df * df);
    let (mut b0, mut b1) = (lambda, lambda * lambda - 1.0 / df);
    if m == 0 {
        return b0;
    }
    for _ in 1..m {
        (b0, b1) = (b1, lambda * b1 - k * b0);
    }
    b1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitKind {
    Atomic,
    TorusProduct { dim: usize },
    Arcsine,
}

/// One atom `lambda(M, i)` of an atomic limit measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitAtom {
    pub m: usize,
    pub i: usize,
    /// `theta(M, i)` when the atom comes from the angle equation.
    pub theta: Option<f64>,
    pub lambda: f64,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitSpectrum {
    pub kind: LimitKind,
    pub atoms: Vec<LimitAtom>,
    /// Mass of the levels `M > M_max`, in closed form.
    pub tail_mass: f64,
    /// Atoms and tail lie in `[-support, support]`.
    pub support: f64,
}

impl LimitSpectrum {
    pub fn torus(dim: usize) -> Self {
        Self {
            kind: LimitKind::TorusProduct { dim },
            atoms: Vec::new(),
            tail_mass: 0.0,
            support: 1.0,
        }
    }

    pub fn arcsine() -> Self {
        Self {
            kind: LimitKind::Arcsine,
            atoms: Vec::new(),
            tail_mass: 0.0,
            support: 1.0,
        }
    }

    pub fn atomic_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `(location, mass)` pairs.
    pub fn atom_pairs(&self) -> Vec<(f64, f64)> {
        self.atoms.iter().map(|a| (a.lambda, a.mass)).collect()
    }

    /// `-sum mass ln(1 - lambda)` over the atoms.
    pub fn atomic_j(&self) -> f64 {
        self.atoms.iter().map(|a| -a.mass * (-a.lambda).ln_1p()).sum()
    }

    /// Bracket on `J` with the tail mass placed at either end of the support.
    pub fn j_bracket(&self) -> (f64, f64) {
        let j = self.atomic_j();
        (
            j - self.tail_mass * self.support.ln_1p(),
            j - self.tail_mass * (-self.support).ln_1p(),
        )
    }

    /// CSV with header `M,i,theta,lambda,mass` and a final `tail` row.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("M,i,theta,lambda,mass\n");
        for a in &self.atoms {
            let theta = a.theta.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(s, "{},{},{theta},{},{}", a.m, a.i, a.lambda, a.mass);
        }
        let _ = writeln!(s, "tail,,,,{}", self.tail_mass);
        s
    }
}

/// `sum_{M > M_max} (M+1) (d-2)^2 / (d-1)^{M+2}`.
pub fn tree_tail_mass(d: usize, m_max: usize) -> f64 {
    let r = 1.0 / (d as f64 - 1.0);
    let n = (m_max + 1) as f64;
    let w = (d as f64 - 2.0).powi(2);
    // sum_{j >= n} (j+1) r^j = r^n (n + 1 - n r) / (1 - r)^2
    w * r * r * r.powf(n) * (n + 1.0 - n * r) / (1.0 - r).powi(2)
}

fn check_tree_degree(d: usize) -> Result<()> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("degree must be >= 3, got {d}")));
    }
    Ok(())
}

const THETA_TOL: f64 = 1e-13;

/// Roots of `F_M(theta) = (d-1) sin((M+2) theta) - sin(M theta)`, one in each
/// bracket `]pi (2j+1)/(2M+4), pi (2j+3)/(2M+4)[`, `j = 0..=M`, after checking the
/// sign change at both ends.
pub fn tree_angle_roots(d: usize, m: usize) -> Result<Vec<f64>> {
    check_tree_degree(d)?;
    let df = d as f64;
    let mf = m as f64;
    let f = |t: f64| (df - 1.0) * ((mf + 2.0) * t).sin() - (mf * t).sin();
    let step = PI / (2.0 * mf + 4.0);
    (0..=m)
        .map(|j| {
            let (mut lo, mut hi) = (step * (2 * j + 1) as f64, step * (2 * j + 3) as f64);
            let (f_lo, f_hi) = (f(lo), f(hi));
            if f_lo == 0.0 || f_hi == 0.0 || f_lo.signum() == f_hi.signum() {
                return Err(Error::BracketSign {
                    m,
                    j,
                    lo,
                    hi,
                    f_lo,
                    f_hi,
                });
            }
            let lo_sign = f_lo.signum();
            while hi - lo > THETA_TOL {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 {
                    return Ok(mid);
                }
                if fm.signum() == lo_sign {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            Ok(0.5 * (lo + hi))
        })
        .collect()
}

/// Atoms `lambda(M, i) = 2 sqrt(d-1)/d cos theta(M, i)` with mass
/// `(d-2)^2/(d-1)^{M+2}` for `M <= M_max`, as published.
pub fn tree_ball_limit_spectrum(d: usize, m_max: usize) -> Result<LimitSpectrum> {
    check_tree_degree(d)?;
    let df = d as f64;
    let scale = 2.0 * (df - 1.0).sqrt() / df;
    let mut atoms = Vec::new();
    for m in 0..=m_max {
        let mass = (df - 2.0).powi(2) / (df - 1.0).powi(m as i32 + 2);
        for (i, theta) in tree_angle_roots(d, m)?.into_iter().enumerate() {
            atoms.push(LimitAtom {
                m,
                i,
                theta: Some(theta),
                lambda: scale * theta.cos(),
                mass,
            });
        }
    }
    Ok(LimitSpectrum {
        kind: LimitKind::Atomic,
        atoms,
        tail_mass: tree_tail_mass(d, m_max),
        support: scale,
    })
}

/// `(1/(d-1)) ln(d/(d-1))` for `d >= 3`, and `ln 2` for `d = 2`.
pub fn tree_ball_j(d: usize) -> Result<f64> {
    match d {
        0 | 1 => Err(Error::InvalidArgument(format!("degree must be >= 2, got {d}"))),
        2 => Ok(2f64.ln()),
        _ => {
            let df = d as f64;
            Ok((df / (df - 1.0)).ln() / (df - 1.0))
        }
    }
}

/// Off-diagonal entries of the symmetrized level chain of length `M+1` seen from a
/// leaf: the first step from a leaf's parent reaches the leaf level with
/// probability `(d-1)/d`, so the first entry is `sqrt((d-1)/d)` and the others
/// are `sqrt(d-1)/d`.
pub fn leaf_chain_offdiagonal(d: usize, m: usize) -> Vec<f64> {
    let df = d as f64;
    (0..m)
        .map(|i| {
            if i == 0 {
                ((df - 1.0) / df).sqrt()
            } else {
                (df - 1.0).sqrt() / df
            }
        })
        .collect()
}

/// Number of eigenvalues below `x` of the zero-diagonal symmetric tridiagonal
/// matrix with off-diagonal `b`, by the Sturm sequence of its LDL^T pivots.
fn sturm_count(b: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    if q < 0.0 {
        count += 1;
    }
    for &bi in b {
        let prev = if q == 0.0 { f64::MIN_POSITIVE } else { q };
        q = -x - bi * bi / prev;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_eigenvalues(b: &[f64]) -> Vec<f64> {
    let n = b.len() + 1;
    let bound = b.iter().fold(0.0f64, |a, &v| a.max(v)) * 2.0 + 1e-12;
    (0..n)
        .map(|k| {
            // the (k+1)-th smallest eigenvalue: count(x) > k exactly when x is above it
            let (mut lo, mut hi) = (-bound, bound);
            while hi - lo > THETA_TOL {
                let mid = 0.5 * (lo + hi);
                if sturm_count(b, mid) > k {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            0.5 * (lo + hi)
        })
        .collect()
}

/// `ln det(I - S_M) = -M ln d`. The three-term determinant recurrence has
/// `((d-1)/d)^M` as its dominant mode, so it is not used for large `M`.
pub fn leaf_chain_log_det(d: usize, m: usize) -> f64 {
    -(m as f64) * (d as f64).ln()
}

/// Atomic limit of the walk spectrum on growing tree balls with the leaf
/// boundary above, levels `M <= M_max`, by Sturm bisection.
pub fn leaf_chain_limit_spectrum(d: usize, m_max: usize) -> Result<LimitSpectrum> {
    check_tree_degree(d)?;
    let df = d as f64;
    let scale = 2.0 * (df - 1.0).sqrt() / df;
    let mut atoms = Vec::new();
    let mut support: f64 = scale;
    for m in 0..=m_max {
        let mass = (df - 2.0).powi(2) / (df - 1.0).powi(m as i32 + 2);
        for (i, lambda) in tridiagonal_eigenvalues(&leaf_chain_offdiagonal(d, m)).into_iter().enumerate() {
            support = support.max(lambda.abs());
            let theta = (lambda.abs() <= scale).then(|| (lambda / scale).acos());
            atoms.push(LimitAtom {
                m,
                i,
                theta,
                lambda,
                mass,
            });
        }
    }
    Ok(LimitSpectrum {
        kind: LimitKind::Atomic,
        atoms,
        tail_mass: tree_tail_mass(d, m_max),
        support: support.min(1.0),
    })
}

/// `ln d / (d-1)`: since `det(I - S_M) = d^{-M}`.
pub fn leaf_chain_j(d: usize) -> Result<f64> {
    check_tree_degree(d)?;
    let df = d as f64;
    Ok(df.ln() / (df - 1.0))
}

/// `-(1/m) sum ln(1 - lambda)` over the spectrum of a finite connected graph,
/// leaving out the Perron eigenvalue 1.
pub fn empirical_j(spectrum: &Spectrum) -> f64 {
    let values = spectrum.eigenvalues();
    let m = values.len() as f64;
    -values[..values.len() - 1].iter().map(|&l| (-l).ln_1p()).sum::<f64>() / m
}

/// `Tr Q^k = 1 + (-1)^k / (n-1)^{k-1}` on the complete graph.
pub fn complete_trace(n: usize, k: u32) -> Result<f64> {
    if n < 2 || k == 0 {
        return Err(Error::InvalidArgument(format!("need n >= 2 and k >= 1, got n={n}, k={k}")));
    }
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    Ok(1.0 + sign / (n as f64 - 1.0).powi(k as i32 - 1))
}

/// The rate `a = lim -ln(c_n)/m_n` and the covering functional `J`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseParameters {
    pub a: f64,
    pub j: f64,
}

impl PhaseParameters {
    pub fn new(a: f64, j: f64) -> Result<Self> {
        if !(j > 0.0 && j.is_finite()) || a.is_nan() {
            return Err(Error::InvalidArgument(format!("need J > 0 and a not NaN, got a={a}, J={j}")));
        }
        Ok(Self { a, j })
    }
}

/// `0` for `a <= 0`, `1` for `a = +inf`, `a/(a+J)` otherwise.
pub fn predicted_cover_limit(p: PhaseParameters) -> f64 {
    if p.a <= 0.0 {
        0.0
    } else if p.a == f64::INFINITY {
        1.0
    } else {
        p.a / (p.a + p.j)
    }
}

/// Mean `max(a, 0)` of the number of covering loops in the soup.
pub fn predicted_soup_covering_law(a: f64) -> f64 {
    a.max(0.0)
}

/// Limit `1 - 1/d` of the complete-graph covering probability for `c_n = n^{-d}`.
pub fn complete_predicted_limit(dexp: f64) -> f64 {
    if dexp <= 1.0 {
        0.0
    } else if dexp == f64::INFINITY {
        1.0
    } else {
        1.0 - 1.0 / dexp
    }
}

/// `Gamma(1+beta) / (beta n^beta (ln n)^2)`.
pub fn complete_beta_asymptotic(beta: f64, n: usize) -> Result<f64> {
    if !(beta > 0.0) || n < 3 {
        return Err(Error::InvalidArgument(format!("need beta > 0 and n >= 3, got {beta}, {n}")));
    }
    let nf = n as f64;
    let g = if beta == 1.0 { 1.0 } else { gamma(1.0 + beta) };
    Ok(g / (beta * nf.powf(beta) * nf.ln().powi(2)))
}

/// `J in [r^2/(2 R^2 D^2), 28 D^2 R^2/(d^2 r^2)]`, closed, with `1e-12` slack.
pub fn j_range_check(j: f64, b: &DegreeWeightBounds) -> bool {
    let (dmax, dmin) = (b.max_degree as f64, b.min_degree as f64);
    let (r, rr) = (b.weight_inv_min, b.weight_inv_max);
    let lo = r * r / (2.0 * rr * rr * dmax * dmax);
    let hi = 28.0 * dmax * dmax * rr * rr / (dmin * dmin * r * r);
    j >= lo - 1e-12 && j <= hi + 1e-12
}
