//! Discretized singular eigenproblems in the logarithmic variable.
//!
//! With `psi = r^{-(q-2)/2} phi(log r)` the one-dimensional linearized problem becomes the
//! Schroedinger operator `-phi'' + [(q-2)^2/4 - q(q+2)/(4 cosh^2 t)] phi`, a Poeschl-Teller
//! well with levels `(q-2)^2/4 - (q/2 - n)^2`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::w_kernel_radial;
use crate::error::{Error, Result};
use crate::grid::UniformGrid;
use crate::params::{
    harmonic_multiplicity, hardy_threshold, mu_j, ProblemParams, SymmetryClass,
};
use crate::tridiag::SymTridiag;

/// Potential of a one-dimensional Schroedinger problem on the real line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `(q-2)^2/4 - q(q+2) / (4 cosh^2 t)`.
    PoschlTeller { q: f64 },
    /// Radial singular linearization at `U_gamma` plus the degree-`j` shift, in the physical
    /// log variable: `(N-2)^2 nu^2/4 + mu_j - C_gamma (p_s-1) / (4 cosh^2((2-s) nu t/2))`.
    SingularRadial { params: ProblemParams, j: u32 },
}

impl Potential {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Potential::PoschlTeller { q } => {
                let ch = t.cosh();
                (q - 2.0).powi(2) / 4.0 - q * (q + 2.0) / (4.0 * ch * ch)
            }
            Potential::SingularRadial { params, j } => {
                let c = params.constants();
                let k = (2.0 - params.s) * c.nu;
                let ch = (k * t / 2.0).cosh();
                (params.nf() - 2.0).powi(2) * c.nu * c.nu / 4.0 + mu_j(params.n, j)
                    - c.c_gamma * (c.p_s - 1.0) / (4.0 * ch * ch)
            }
        }
    }

    /// Bottom of the essential spectrum.
    pub fn threshold(&self) -> f64 {
        match *self {
            Potential::PoschlTeller { q } => (q - 2.0).powi(2) / 4.0,
            Potential::SingularRadial { params, j } => {
                let c = params.constants();
                (params.nf() - 2.0).powi(2) * c.nu * c.nu / 4.0 + mu_j(params.n, j)
            }
        }
    }
}

/// Boundary treatment at `t = +-T`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Dirichlet,
}

/// `-phi'' + V phi = mu phi` on `[-T, T]`, discretized with `m` intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SturmLiouvilleProblem {
    /// Effective dimension.
    pub q: f64,
    pub potential: Potential,
    pub half_width: f64,
    pub m: usize,
    pub boundary: Boundary,
}

/// The Schroedinger form of the one-dimensional linearized problem in dimension `q`.
pub fn reduce_to_schroedinger(q: f64) -> Result<Potential> {
    if !(q > 2.0 && q.is_finite()) {
        return Err(Error::InvalidArgument(format!("effective dimension q = {q} must exceed 2")));
    }
    Ok(Potential::PoschlTeller { q })
}

/// Exact bound state levels `(q-2)^2/4 - (q/2 - n)^2` for `0 <= n < q/2`.
pub fn poschl_teller_levels(q: f64) -> Vec<f64> {
    (0..)
        .map(f64::from)
        .take_while(|&n| n < q / 2.0)
        .map(|n| (q - 2.0).powi(2) / 4.0 - (q / 2.0 - n).powi(2))
        .collect()
}

impl SturmLiouvilleProblem {
    pub fn new(potential: Potential, q: f64, half_width: f64, m: usize) -> Result<Self> {
        if m < 200 {
            return Err(Error::InvalidArgument(format!("need at least 200 intervals, got {m}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("bad half-width {half_width}")));
        }
        Ok(Self {
            q,
            potential,
            half_width,
            m,
            boundary: Boundary::Dirichlet,
        })
    }

    pub fn grid(&self) -> UniformGrid {
        UniformGrid {
            lo: -self.half_width,
            hi: self.half_width,
            m: self.m + 1,
        }
    }

    /// Interior-node matrix of the centered second-order discretization.
    pub fn matrix(&self) -> SymTridiag {
        let g = self.grid();
        let h = g.h();
        let inv = 1.0 / (h * h);
        let d = (1..g.m - 1).map(|i| 2.0 * inv + self.potential.eval(g.node(i))).collect();
        let e = vec![-inv; g.m - 3];
        SymTridiag { d, e }
    }

    pub fn with_intervals(&self, m: usize) -> Self {
        Self { m, ..self.clone() }
    }
}

/// Eigen-solution of a [`SturmLiouvilleProblem`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlSolution {
    /// Richardson-extrapolated eigenvalues from `m` and `2m` intervals.
    pub eigenvalues: Vec<f64>,
    /// Raw eigenvalues at `m` intervals.
    pub coarse: Vec<f64>,
    /// Raw eigenvalues at `2m` intervals.
    pub fine: Vec<f64>,
    /// Unit eigenvectors on the interior nodes of the `m`-interval grid, first entry of
    /// largest magnitude made positive.
    pub vectors: Vec<Vec<f64>>,
    /// Interior nodes matching `vectors`.
    pub nodes: Vec<f64>,
    pub max_residual: f64,
}

const EIG_TOL: f64 = 1e-13;

/// Lowest `count` eigenpairs. Eigenvalues are reported after one Richardson step
/// (`(4 mu_{2m} - mu_m) / 3`); raw values at both levels are kept.
pub fn solve_sl(prob: &SturmLiouvilleProblem, count: usize) -> Result<SlSolution> {
    let a = prob.matrix();
    let scale = a.gershgorin().1.abs().max(1.0);
    let pairs = a.lowest_pairs(count, EIG_TOL, 1e-7 * scale)?;
    let fine_prob = prob.with_intervals(2 * prob.m);
    let fine = fine_prob.matrix().lowest(count, EIG_TOL);
    let coarse: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let eigenvalues = coarse
        .iter()
        .zip(&fine)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    let mut max_residual: f64 = 0.0;
    let vectors = pairs
        .into_iter()
        .map(|(l, mut v)| {
            let av = a.matvec(&v);
            let r = av.iter().zip(&v).map(|(x, y)| (x - l * y).powi(2)).sum::<f64>().sqrt();
            max_residual = max_residual.max(r);
            let big = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            if big < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            v
        })
        .collect();
    let g = prob.grid();
    Ok(SlSolution {
        eigenvalues,
        coarse,
        fine,
        vectors,
        nodes: (1..g.m - 1).map(|i| g.node(i)).collect(),
        max_residual,
    })
}

/// Discretization settings for [`singular_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumOptions {
    /// Half-width in the rescaled variable `(2-s) nu t / 2`.
    pub scaled_half_width: f64,
    pub m: usize,
    /// Allowed formula/discrete disagreement, relative to `max(1, |Lambda_1^rad|)`.
    pub tolerance: f64,
    /// Eigenvalues with `|Lambda| <= zero_tol` count as zero.
    pub zero_tol: f64,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            scaled_half_width: 20.0,
            m: 2000,
            tolerance: 1e-6,
            zero_tol: 1e-8,
        }
    }
}

/// Negative singular eigenvalues of one harmonic degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeSpectrum {
    pub j: u32,
    pub mu: f64,
    pub multiplicity: u128,
    /// `Lambda_1^rad + mu_j`
    pub formula: f64,
    pub discrete: f64,
    pub disagreement: f64,
    /// Discrete eigenvalues below `-zero_tol` (at most one per degree).
    pub negative: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub half_width: f64,
    pub m: usize,
    pub richardson: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MorseTotals {
    pub full: u128,
    pub axial: u128,
    pub axial_even: u128,
}

/// Singular spectrum of the linearization at `U_gamma`, per harmonic degree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub params: ProblemParams,
    pub lambda1_rad: f64,
    pub degrees: Vec<DegreeSpectrum>,
    pub morse: MorseTotals,
    pub grid: GridMeta,
}

fn degree_problem(p: &ProblemParams, j: u32, opts: &SpectrumOptions) -> Result<SturmLiouvilleProblem> {
    let c = p.constants();
    let k2 = (2.0 - p.s) * c.nu / 2.0;
    SturmLiouvilleProblem::new(
        Potential::SingularRadial { params: *p, j },
        c.q_s,
        opts.scaled_half_width / k2,
        opts.m,
    )
}

/// Lowest discrete singular eigenvalue of degree `j` (extrapolated) with its eigenvector.
pub fn degree_ground_state(
    p: &ProblemParams,
    j: u32,
    opts: &SpectrumOptions,
) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let sol = solve_sl(&degree_problem(p, j, opts)?, 1)?;
    Ok((sol.eigenvalues[0], sol.vectors[0].clone(), sol.nodes))
}

/// Cosine similarity between the discrete degree-`j` ground state and the sampled
/// Emden-Fowler image of the closed-form kernel factor.
pub fn kernel_cosine(p: &ProblemParams, j: u32, opts: &SpectrumOptions) -> Result<f64> {
    let (_, v, nodes) = degree_ground_state(p, j, opts)?;
    let z: Vec<f64> = nodes.iter().map(|&t| w_kernel_radial(p, t)).collect();
    let dot: f64 = v.iter().zip(&z).map(|(a, b)| a * b).sum();
    let nz = z.iter().map(|x| x * x).sum::<f64>().sqrt();
    Ok(dot / nz)
}

/// Compute `Lambda(j) = Lambda_1^rad + mu_j` both from the formula and from the discretized
/// problem for `j <= j_max`, and assemble Morse totals from the discrete values.
pub fn singular_spectrum(
    p: &ProblemParams,
    j_max: u32,
    opts: &SpectrumOptions,
) -> Result<SpectrumReport> {
    p.validate()?;
    let lam1 = p.lambda1_rad();
    let tol = opts.tolerance * lam1.abs().max(1.0);
    let degrees = (0..=j_max)
        .into_par_iter()
        .map(|j| -> Result<DegreeSpectrum> {
            let formula = lam1 + mu_j(p.n, j);
            let (discrete, _, _) = degree_ground_state(p, j, opts)?;
            let disagreement = (discrete - formula).abs();
            if disagreement > tol {
                return Err(Error::GridResolution {
                    disagreement,
                    tolerance: tol,
                });
            }
            let negative = if discrete < -opts.zero_tol { vec![discrete] } else { vec![] };
            Ok(DegreeSpectrum {
                j,
                mu: mu_j(p.n, j),
                multiplicity: harmonic_multiplicity(p.n, j)?,
                formula,
                discrete,
                disagreement,
                negative,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = |sym: SymmetryClass| -> Result<u128> {
        degrees.iter().try_fold(0u128, |acc, d| {
            Ok(acc + d.negative.len() as u128 * sym.invariant_dimension(p.n, d.j)?)
        })
    };
    let morse = MorseTotals {
        full: total(SymmetryClass::Full)?,
        axial: total(SymmetryClass::Axial)?,
        axial_even: total(SymmetryClass::AxialEven)?,
    };
    let c = p.constants();
    Ok(SpectrumReport {
        params: *p,
        lambda1_rad: lam1,
        degrees,
        morse,
        grid: GridMeta {
            half_width: opts.scaled_half_width / ((2.0 - p.s) * c.nu / 2.0),
            m: opts.m,
            richardson: true,
        },
    })
}

/// Smallest degree whose formula eigenvalue is non-negative; every degree that can be
/// negative lies below it.
pub fn default_j_max(p: &ProblemParams) -> u32 {
    let lam1 = p.lambda1_rad();
    let mut j = 0;
    while lam1 + mu_j(p.n, j) < 0.0 {
        j += 1;
    }
    j
}

/// Roots of `gamma -> Lambda_1^rad(gamma) + mu_j` in `[lo, hi]`: bisection on the formula,
/// confirmed by a sign change of the discrete eigenvalue at `gamma* -+ delta`.
/// The function is strictly increasing in `gamma`, so there is at most one root; an empty
/// list means none lies in the range.
pub fn locate_degeneracies(
    n: u32,
    s: f64,
    range: (f64, f64),
    j: u32,
    opts: &SpectrumOptions,
) -> Result<Vec<f64>> {
    let (lo, hi) = range;
    if !(lo < hi) || hi >= hardy_threshold(n) {
        return Err(Error::Domain(format!(
            "gamma range [{lo}, {hi}] must be non-empty and below (N-2)^2/4"
        )));
    }
    ProblemParams::new(n, s, lo)?;
    let f = |g: f64| {
        let p = ProblemParams { n, s, gamma: g };
        p.lambda1_rad() + mu_j(n, j)
    };
    let (mut a, mut b) = (lo, hi);
    let (fa, fb) = (f(a), f(b));
    if fa == 0.0 {
        b = a;
    } else if fb == 0.0 {
        a = b;
    } else if fa.signum() == fb.signum() {
        return Ok(Vec::new());
    }
    while b - a > 1e-15 * a.abs().max(1.0) {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if f(mid).signum() == fa.signum() {
            a = mid;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);

    let delta = 1e-5 * root.abs().max(1.0);
    let below = degree_ground_state(&ProblemParams::new(n, s, root - delta)?, j, opts)?.0;
    let above_g = (root + delta).min(0.5 * (root + hardy_threshold(n)));
    let above = degree_ground_state(&ProblemParams::new(n, s, above_g)?, j, opts)?.0;
    if !(below < 0.0 && above > 0.0) {
        return Err(Error::GridResolution {
            disagreement: below.abs().min(above.abs()),
            tolerance: opts.zero_tol,
        });
    }
    Ok(vec![root])
}
