//! Parameter algebra for the Hardy-Sobolev problem.
//!
//! Everything here is a closed formula in `(N, s, gamma)`: derived constants,
//! degeneracy points `gamma_j`, spherical-harmonic eigenvalues and
//! multiplicities, and the Morse index of the radial solution (full and
//! restricted to symmetry classes).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used to decide that `gamma` sits exactly on a degeneracy point.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// The triple `(N, s, gamma)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    pub n: u32,
    pub s: f64,
    pub gamma: f64,
}

/// Constants derived from [`ProblemParams`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// `sqrt(1 - 4 gamma / (N-2)^2)`
    pub nu: f64,
    /// Critical exponent `2(N-s)/(N-2)`.
    pub p_s: f64,
    /// Fractional dimension `2(N-s)/(2-s)` of the one-dimensional problem.
    pub q_s: f64,
    /// Coefficient of the nonlinearity, `(N-s)(N-2) nu^2`.
    pub c_gamma: f64,
    pub a_gamma: f64,
    pub b_gamma_s: f64,
}

fn check_dimension(n: u32, s: f64) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension N = {n} must be >= 3")));
    }
    if !(s.is_finite() && (0.0..2.0).contains(&s)) {
        return Err(Error::Domain(format!("s = {s} must lie in [0, 2)")));
    }
    Ok(())
}

/// Hardy threshold `(N-2)^2/4`.
pub fn hardy_threshold(n: u32) -> f64 {
    let m = f64::from(n) - 2.0;
    m * m / 4.0
}

impl ProblemParams {
    pub fn new(n: u32, s: f64, gamma: f64) -> Result<Self> {
        check_dimension(n, s)?;
        if !gamma.is_finite() || gamma >= hardy_threshold(n) {
            return Err(Error::Domain(format!(
                "gamma = {gamma} must be finite and < (N-2)^2/4 = {}",
                hardy_threshold(n)
            )));
        }
        Ok(Self { n, s, gamma })
    }

    /// Same `(N, s)` with a different `gamma`.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        Self::new(self.n, self.s, gamma)
    }

    pub fn validate(&self) -> Result<()> {
        Self::new(self.n, self.s, self.gamma).map(|_| ())
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    pub fn constants(&self) -> DerivedConstants {
        derive_unchecked(self)
    }

    /// `gamma_j` for the same `(N, s)`.
    pub fn gamma_j(&self, j: u32) -> f64 {
        gamma_j_unchecked(self.n, self.s, j)
    }

    /// The unique negative radial singular eigenvalue `-(2-s)^2 nu^2 (q_s - 1) / 4`.
    pub fn lambda1_rad(&self) -> f64 {
        let c = self.constants();
        let k = 2.0 - self.s;
        -k * k * c.nu * c.nu * (c.q_s - 1.0) / 4.0
    }

    /// Right end of the half-open interval of harmonic degrees that contribute
    /// to the Morse index.
    pub fn morse_endpoint(&self) -> f64 {
        let nf = self.nf();
        let s = self.s;
        let m = nf - 2.0;
        let disc =
            (nf - s).powi(2) - 4.0 * self.gamma / (m * m) * (2.0 - s) * (2.0 * nf - 2.0 - s);
        -m / 2.0 + 0.5 * disc.sqrt()
    }
}

fn derive_unchecked(p: &ProblemParams) -> DerivedConstants {
    let nf = p.nf();
    let s = p.s;
    let m = nf - 2.0;
    let nu = (1.0 - 4.0 * p.gamma / (m * m)).sqrt();
    DerivedConstants {
        nu,
        p_s: 2.0 * (nf - s) / m,
        q_s: 2.0 * (nf - s) / (2.0 - s),
        c_gamma: (nf - s) * m * nu * nu,
        a_gamma: m * (1.0 - nu) / 2.0,
        b_gamma_s: 2.0 / ((2.0 - s) * nu),
    }
}

/// All derived constants for `p`; fails if `p` is outside the admissible range.
pub fn derive_constants(p: &ProblemParams) -> Result<DerivedConstants> {
    p.validate()?;
    Ok(derive_unchecked(p))
}

fn gamma_j_unchecked(n: u32, s: f64, j: u32) -> f64 {
    let nf = f64::from(n);
    let jf = f64::from(j);
    let m = nf - 2.0;
    m * m / 4.0 - jf * (m + jf) * m * m / ((2.0 - s) * (2.0 * nf - 2.0 - s))
}

/// Degeneracy point `gamma_j`: the radial solution acquires degree-`j` kernel functions there.
pub fn gamma_j(n: u32, s: f64, j: u32) -> Result<f64> {
    check_dimension(n, s)?;
    Ok(gamma_j_unchecked(n, s, j))
}

/// Eigenvalue `j(N-2+j)` of the Laplace-Beltrami operator on `S^{N-1}`.
pub fn mu_j(n: u32, j: u32) -> f64 {
    let jf = f64::from(j);
    jf * (f64::from(n) - 2.0 + jf)
}

fn binomial(n: u64, k: u64) -> Result<u128> {
    if k > n {
        return Ok(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) because acc = C(n, i).
        acc = acc
            .checked_mul(u128::from(n - i))
            .ok_or(Error::Overflow("binomial coefficient"))?
            / u128::from(i + 1);
    }
    Ok(acc)
}

/// Dimension of the degree-`j` spherical harmonics in `R^N`,
/// `(N+2j-2)(N+j-3)! / ((N-2)! j!)`, computed exactly.
pub fn harmonic_multiplicity(n: u32, j: u32) -> Result<u128> {
    if n < 3 {
        return Err(Error::Domain(format!("dimension N = {n} must be >= 3")));
    }
    // C(N+j-1, N-1) - C(N+j-3, N-1): homogeneous polynomials minus |x|^2 times degree j-2.
    let n = u64::from(n);
    let j = u64::from(j);
    let all = binomial(n + j - 1, n - 1)?;
    let lower = if j >= 2 { binomial(n + j - 3, n - 1)? } else { 0 };
    Ok(all - lower)
}

/// Symmetry classes in which the Morse index can be restricted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum SymmetryClass {
    /// No symmetry constraint.
    Full,
    /// Invariant under `O(N-1)` acting on `(x_1, ..., x_{N-1})`.
    Axial,
    /// `O(N-1)`-invariant and even in `x_N`.
    AxialEven,
    /// Invariant under rotations by `2 pi / k` in the `(x_1, x_2)` plane and the
    /// reflection `x_2 -> -x_2`.
    Dihedral(u32),
}

impl fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymmetryClass::Full => write!(f, "full"),
            SymmetryClass::Axial => write!(f, "axial"),
            SymmetryClass::AxialEven => write!(f, "axial-even"),
            SymmetryClass::Dihedral(k) => write!(f, "dihedral-{k}"),
        }
    }
}

impl FromStr for SymmetryClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "full" | "o(n)" => Ok(SymmetryClass::Full),
            "axial" | "o(n-1)" => Ok(SymmetryClass::Axial),
            "axial-even" | "o(n-1)-even" | "even" => Ok(SymmetryClass::AxialEven),
            _ => {
                let k = t
                    .strip_prefix("dihedral-")
                    .or_else(|| t.strip_prefix('g'))
                    .and_then(|k| k.parse::<u32>().ok())
                    .filter(|&k| k >= 1);
                k.map(SymmetryClass::Dihedral)
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown symmetry class '{s}'")))
            }
        }
    }
}

impl From<SymmetryClass> for String {
    fn from(c: SymmetryClass) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for SymmetryClass {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl SymmetryClass {
    /// Dimension of the degree-`j` harmonics invariant under this class.
    pub fn invariant_dimension(&self, n: u32, j: u32) -> Result<u128> {
        match *self {
            SymmetryClass::Full => harmonic_multiplicity(n, j),
            SymmetryClass::Axial => Ok(1),
            SymmetryClass::AxialEven => Ok(u128::from(j % 2 == 0)),
            SymmetryClass::Dihedral(k) => {
                if k == 0 {
                    return Err(Error::InvalidArgument("dihedral order must be >= 1".into()));
                }
                // Azimuthal frequency l contributes C(j-l+N-3, N-3) harmonics (cosine part only).
                let (n, j, k) = (u64::from(n), u64::from(j), u64::from(k));
                let mut total: u128 = 0;
                let mut l = 0;
                while l <= j {
                    total = total
                        .checked_add(binomial(j - l + n - 3, n - 3)?)
                        .ok_or(Error::Overflow("dihedral harmonic count"))?;
                    l += k;
                }
                Ok(total)
            }
        }
    }
}

/// Classification of `gamma` relative to the degeneracy point of degree `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegreeStatus {
    /// `gamma < gamma_j`: degree `j` contributes negative directions.
    Negative,
    /// `gamma == gamma_j` to within [`DEGENERACY_TOL`].
    Degenerate,
    Positive,
}

/// Sign of `Lambda_1^rad + mu_j` decided through the equivalent comparison
/// `gamma` vs `gamma_j`; equality within tolerance is degenerate.
pub fn degree_status(p: &ProblemParams, j: u32) -> DegreeStatus {
    let gj = p.gamma_j(j);
    let tol = DEGENERACY_TOL * gj.abs().max(1.0);
    if (p.gamma - gj).abs() <= tol {
        DegreeStatus::Degenerate
    } else if p.gamma < gj {
        DegreeStatus::Negative
    } else {
        DegreeStatus::Positive
    }
}

/// Harmonic degrees contributing to the Morse index at `p` (the degenerate one excluded).
pub fn negative_degrees(p: &ProblemParams) -> Vec<u32> {
    let mut out = Vec::new();
    let mut j = 0;
    // gamma_j is strictly decreasing, so stop at the first non-negative degree.
    while degree_status(p, j) == DegreeStatus::Negative {
        out.push(j);
        j += 1;
    }
    out
}

/// Morse index `m(gamma)` of the radial solution.
pub fn morse_index(p: &ProblemParams) -> Result<u128> {
    morse_index_symmetric(p, SymmetryClass::Full)
}

/// Morse index restricted to functions invariant under `sym`.
pub fn morse_index_symmetric(p: &ProblemParams, sym: SymmetryClass) -> Result<u128> {
    p.validate()?;
    negative_degrees(p).into_iter().try_fold(0u128, |acc, j| {
        acc.checked_add(sym.invariant_dimension(p.n, j)?)
            .ok_or(Error::Overflow("Morse index"))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn constants_n3_s0_gamma0() {
        let c = derive_constants(&ProblemParams::new(3, 0.0, 0.0).unwrap()).unwrap();
        assert_eq!(c.nu, 1.0);
        assert_eq!(c.p_s, 6.0);
        assert_eq!(c.q_s, 3.0);
        assert_eq!(c.c_gamma, 3.0);
        assert_eq!(c.a_gamma, 0.0);
        assert_eq!(c.b_gamma_s, 1.0);
    }

    #[test]
    fn constants_n4_s1_gamma0() {
        let c = derive_constants(&ProblemParams::new(4, 1.0, 0.0).unwrap()).unwrap();
        assert!(close(c.nu, 1.0, 1e-15));
        assert!(close(c.p_s, 3.0, 1e-15));
        assert!(close(c.q_s, 6.0, 1e-15));
        assert!(close(c.c_gamma, 6.0, 1e-15));
        assert!(close(c.a_gamma, 0.0, 1e-15));
        assert!(close(c.b_gamma_s, 2.0, 1e-15));
    }

    #[test]
    fn constants_negative_gamma() {
        let c = ProblemParams::new(3, 0.0, -0.75).unwrap().constants();
        assert!(close(c.nu, 2.0, 1e-15));
        assert!(close(c.a_gamma, -0.5, 1e-15));
        assert!(close(c.b_gamma_s, 0.5, 1e-15));
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ProblemParams::new(2, 0.0, 0.0).is_err());
        assert!(ProblemParams::new(3, 2.0, 0.0).is_err());
        assert!(ProblemParams::new(3, -0.1, 0.0).is_err());
        assert!(ProblemParams::new(3, 0.0, 0.25).is_err());
        assert!(ProblemParams::new(3, 0.0, 0.3).is_err());
        assert!(ProblemParams::new(3, 0.0, f64::NAN).is_err());
        assert!(ProblemParams::new(3, 0.0, 0.2499).is_ok());
    }

    #[test]
    fn gamma_j_values() {
        assert_eq!(gamma_j(3, 0.0, 0).unwrap(), 0.25);
        assert_eq!(gamma_j(3, 0.0, 1).unwrap(), 0.0);
        assert_eq!(gamma_j(3, 0.0, 2).unwrap(), -0.5);
        assert!(gamma_j(3, 0.5, 1).unwrap() < 0.0);
    }

    #[test]
    fn mu_and_multiplicity() {
        assert_eq!(mu_j(5, 0), 0.0);
        assert_eq!(mu_j(3, 1), 2.0);
        assert_eq!(mu_j(4, 2), 8.0);
        for n in 3..8 {
            assert_eq!(harmonic_multiplicity(n, 0).unwrap(), 1);
        }
        for j in 0..30 {
            assert_eq!(harmonic_multiplicity(3, j).unwrap(), u128::from(2 * j + 1));
        }
        assert_eq!(harmonic_multiplicity(4, 2).unwrap(), 9);
        // (N+2j-2)(N+j-3)!/((N-2)! j!) at N = 10, j = 20: 48 * 27! / (8! 20!) = 6 * C(27, 7)
        assert_eq!(harmonic_multiplicity(10, 20).unwrap(), 6 * 888_030);
    }

    #[test]
    fn morse_examples() {
        let m = |g: f64| morse_index(&ProblemParams::new(3, 0.0, g).unwrap()).unwrap();
        assert_eq!(m(0.1), 1);
        assert_eq!(m(-0.25), 4);
        assert_eq!(m(-0.6), 9);
        // exactly degenerate: gamma_1 = 0 is excluded
        assert_eq!(m(0.0), 1);
        assert_eq!(m(-0.5), 4);
    }

    #[test]
    fn symmetric_morse_examples() {
        let p = ProblemParams::new(3, 0.0, -0.25).unwrap();
        assert_eq!(morse_index_symmetric(&p, SymmetryClass::Axial).unwrap(), 2);
        assert_eq!(morse_index_symmetric(&p, SymmetryClass::AxialEven).unwrap(), 1);
        for (n, s) in [(3, 0.0), (4, 0.5), (5, 1.5)] {
            let g1 = gamma_j(n, s, 1).unwrap();
            let g = 0.5 * (g1 + hardy_threshold(n));
            let p = ProblemParams::new(n, s, g).unwrap();
            assert_eq!(morse_index(&p).unwrap(), 1);
        }
    }

    #[test]
    fn dihedral_counts_sum_to_multiplicity_when_k_is_one() {
        // k = 1 keeps every azimuthal frequency's cosine part: for N = 3 that is j + 1.
        assert_eq!(SymmetryClass::Dihedral(1).invariant_dimension(3, 4).unwrap(), 5);
        assert_eq!(SymmetryClass::Dihedral(2).invariant_dimension(3, 4).unwrap(), 3);
        // N = 4, degree 2: frequencies 0 and 2 give C(3,1) + C(1,1).
        assert_eq!(SymmetryClass::Dihedral(2).invariant_dimension(4, 2).unwrap(), 4);
    }

    #[test]
    fn symmetry_class_parsing() {
        for c in [
            SymmetryClass::Full,
            SymmetryClass::Axial,
            SymmetryClass::AxialEven,
            SymmetryClass::Dihedral(3),
        ] {
            assert_eq!(c.to_string().parse::<SymmetryClass>().unwrap(), c);
        }
        assert_eq!("O(N-1)".parse::<SymmetryClass>().unwrap(), SymmetryClass::Axial);
        assert!("weird".parse::<SymmetryClass>().is_err());
        assert!("dihedral-0".parse::<SymmetryClass>().is_err());
    }

    #[test]
    fn lambda_rad_plus_mu_vanishes_at_gamma_j() {
        for n in 3..7 {
            for s in [0.0, 0.3, 1.0, 1.7] {
                for j in 1..6 {
                    let g = gamma_j(n, s, j).unwrap();
                    let p = ProblemParams::new(n, s, g).unwrap();
                    let v = p.lambda1_rad() + mu_j(n, j);
                    assert!(v.abs() < 1e-9 * mu_j(n, j), "N={n} s={s} j={j}: {v}");
                }
            }
        }
    }
}
