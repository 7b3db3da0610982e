//! Numerical certification of harmonicity, the extended-solution law, the
//! `Λ₊` property of the flow quotient `η`, `S¹`-invariance and Grassmannian values.
//!
//! Derivatives use centred differences for the Wirtinger operators; each
//! residual is computed at steps `h` and `h/2` and the ratio of the two is the
//! empirical convergence order (nominally 4 for an `O(h²)` scheme).

use std::f64::consts::PI;

use serde::Serialize;

use crate::cxlinalg::CMatrix;
use crate::error::Result;
use crate::harmonic_builder::{HarmonicBuilder, LaurentMatrix, ProjectionChain};
use crate::ratfun::C64;
use crate::spectral_flow::{deform, FlowParam};
use crate::uniton_array::{ConstantLeftFactor, UnitonArray};

/// Default finite-difference step.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Accepted band for `residual(h) / residual(h/2)`.
pub const RATIO_BAND: (f64, f64) = (2.5, 6.0);
/// Residuals below this at both steps are at the rounding floor.
pub const VANISH_FLOOR: f64 = 1e-9;
/// Tolerance for Grassmannian values.
pub const GRASSMANN_TOL: f64 = 1e-8;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `(∂_z f, ∂_z̄ f)` by centred differences along the real and imaginary axes.
pub fn wirtinger(f: impl Fn(C64) -> Result<CMatrix>, z: C64, h: f64) -> Result<(CMatrix, CMatrix)> {
    let dx = (&f(z + h)? - &f(z - h)?).scale(C64::new(0.5 / h, 0.0));
    let dy = (&f(z + I * h)? - &f(z - I * h)?).scale(C64::new(0.5 / h, 0.0));
    Ok(wirtinger_combine(&dx, &dy))
}

fn wirtinger_combine(dx: &CMatrix, dy: &CMatrix) -> (CMatrix, CMatrix) {
    let half = C64::new(0.5, 0.0);
    let idy = dy.scale(I);
    ((dx - &idy).scale(half), (dx + &idy).scale(half))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConvergenceStatus {
    /// Ratio within the accepted band.
    Converging,
    /// Both residuals at the rounding floor.
    Vanishing,
    Failing,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub quantity: String,
    pub z: [f64; 2],
    pub h: f64,
    pub residual: f64,
    pub residual_half: f64,
    pub ratio: Option<f64>,
    pub status: ConvergenceStatus,
}

impl ResidualReport {
    pub fn new(quantity: &str, z: C64, h: f64, residual: f64, residual_half: f64) -> Self {
        let ratio = (residual_half > 0.0).then(|| residual / residual_half);
        let status = if residual < VANISH_FLOOR && residual_half < VANISH_FLOOR {
            ConvergenceStatus::Vanishing
        } else if ratio.is_some_and(|r| r >= RATIO_BAND.0 && r <= RATIO_BAND.1) {
            ConvergenceStatus::Converging
        } else {
            ConvergenceStatus::Failing
        };
        ResidualReport {
            quantity: quantity.to_string(),
            z: [z.re, z.im],
            h,
            residual,
            residual_half,
            ratio,
            status,
        }
    }

    pub fn pass(&self) -> bool {
        self.status != ConvergenceStatus::Failing
    }
}

/// Offsets `(a, b)` of the nested stencil, meaning `z + (a + ib)h`.
const STENCIL: [(i32, i32); 13] = [
    (0, 0),
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (2, 0),
    (-2, 0),
    (0, 2),
    (0, -2),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

fn stencil_index(a: i32, b: i32) -> usize {
    STENCIL.iter().position(|&p| p == (a, b)).expect("offset in stencil")
}

/// `‖(f^{-1} f_z̄)_z + (f^{-1} f_z)_z̄‖_F` from values on the 13-point stencil.
fn euler_lagrange_from_stencil(vals: &[CMatrix], h: f64) -> Result<f64> {
    let scale = C64::new(0.5 / h, 0.0);
    let at = |a: i32, b: i32| &vals[stencil_index(a, b)];
    // f^{-1} f_z̄ and f^{-1} f_z at the four neighbours of the centre.
    let inner = |a: i32, b: i32| -> Result<(CMatrix, CMatrix)> {
        let dx = (at(a + 1, b) - at(a - 1, b)).scale(scale);
        let dy = (at(a, b + 1) - at(a, b - 1)).scale(scale);
        let (fz, fzb) = wirtinger_combine(&dx, &dy);
        let inv = at(a, b).inverse()?;
        Ok((&inv * &fzb, &inv * &fz))
    };
    let (bp, cp) = inner(1, 0)?;
    let (bm, cm) = inner(-1, 0)?;
    let (bpi, cpi) = inner(0, 1)?;
    let (bmi, cmi) = inner(0, -1)?;
    let (bz, _) = wirtinger_combine(&(&bp - &bm).scale(scale), &(&bpi - &bmi).scale(scale));
    let (_, czb) = wirtinger_combine(&(&cp - &cm).scale(scale), &(&cpi - &cmi).scale(scale));
    Ok((&bz + &czb).norm_fro())
}

fn stencil_values(f: &impl Fn(C64) -> Result<CMatrix>, z: C64, h: f64) -> Result<Vec<CMatrix>> {
    STENCIL
        .iter()
        .map(|&(a, b)| f(z + C64::new(a as f64 * h, b as f64 * h)))
        .collect()
}

/// Euler-Lagrange residual of an arbitrary map at steps `h` and `h/2`.
pub fn harmonicity_residual_of(f: impl Fn(C64) -> Result<CMatrix>, z: C64, h: f64) -> Result<ResidualReport> {
    let r1 = euler_lagrange_from_stencil(&stencil_values(&f, z, h)?, h)?;
    let r2 = euler_lagrange_from_stencil(&stencil_values(&f, z, h / 2.0)?, h / 2.0)?;
    Ok(ResidualReport::new("harmonicity", z, h, r1, r2))
}

/// Euler-Lagrange residual of `φ = Q Π (π_i − π_i^⊥)` built from an array.
pub fn harmonicity_residual(
    builder: &HarmonicBuilder,
    q: &ConstantLeftFactor,
    z: C64,
    h: f64,
) -> Result<ResidualReport> {
    harmonicity_residual_of(|w| builder.evaluate_phi(q, w), z, h)
}

/// `λ = e^{iπ(2m+1)/count}`, `m = 0..count`: unit-circle samples avoiding `λ = 1`.
pub fn unit_circle_samples(count: usize) -> Vec<C64> {
    (0..count)
        .map(|m| C64::from_polar(1.0, PI * (2 * m + 1) as f64 / count as f64))
        .collect()
}

fn maurer_cartan_at(chains: &[ProjectionChain], lambdas: &[C64], h: f64) -> Result<f64> {
    let scale = C64::new(0.5 / h, 0.0);
    // chains: centre, +h, -h, +ih, -ih
    let phi: Vec<CMatrix> = chains.iter().map(ProjectionChain::product).collect();
    let (pz, pzb) = wirtinger_combine(&(&phi[1] - &phi[2]).scale(scale), &(&phi[3] - &phi[4]).scale(scale));
    let inv = phi[0].inverse()?;
    let a_z = (&inv * &pz).scale(C64::new(0.5, 0.0));
    let a_zb = (&inv * &pzb).scale(C64::new(0.5, 0.0));
    let mut worst: f64 = 0.0;
    for &lam in lambdas {
        let ext: Vec<CMatrix> = chains.iter().map(|c| c.extended_at(lam)).collect();
        let (ez, ezb) = wirtinger_combine(&(&ext[1] - &ext[2]).scale(scale), &(&ext[3] - &ext[4]).scale(scale));
        let einv = ext[0].inverse()?;
        let one = C64::new(1.0, 0.0);
        let rz = (&(&einv * &ez) - &a_z.scale(one - one / lam)).norm_fro();
        let rzb = (&(&einv * &ezb) - &a_zb.scale(one - lam)).norm_fro();
        worst = worst.max(rz + rzb);
    }
    Ok(worst)
}

/// Residual of `Φ_λ^{-1} dΦ_λ = (1 − λ^{-1}) A_z dz + (1 − λ) A_z̄ dz̄`, maximized over `λ`.
pub fn maurer_cartan_check(builder: &HarmonicBuilder, z: C64, lambdas: &[C64], h: f64) -> Result<ResidualReport> {
    let at_step = |h: f64| -> Result<f64> {
        let pts = [z, z + h, z - h, z + I * h, z - I * h];
        let chains = pts
            .iter()
            .map(|&w| builder.build_chain(w))
            .collect::<Result<Vec<_>>>()?;
        maurer_cartan_at(&chains, lambdas, h)
    };
    Ok(ResidualReport::new(
        "maurer_cartan",
        z,
        h,
        at_step(h)?,
        at_step(h / 2.0)?,
    ))
}

/// `η(λ) = Π_{i=r}^{1} (π_{i,t} + λ^{-1} π_{i,t}^⊥) · Π_{i=1}^{r} (π_i + λ t π_i^⊥)`,
/// coefficients extracted from `4r+1` samples at roots of unity.
pub fn eta_from_chains(chain: &ProjectionChain, chain_t: &ProjectionChain, t: f64) -> LaurentMatrix {
    let r = chain.r().max(chain_t.r());
    let n = chain.n();
    let samples = 4 * r + 1;
    LaurentMatrix::by_dft(samples, -2 * r as i32, |lam| {
        let left = chain_t
            .projectors()
            .iter()
            .zip(chain_t.complements())
            .rev()
            .fold(CMatrix::identity(n), |acc, (p, q)| &acc * &(p + &q.scale(lam.inv())));
        &left * &chain.extended_at(lam * t)
    })
}

/// `η` for an array and its deformation at `t`, at one point.
pub fn eta(arr: &UnitonArray, t: FlowParam, z: C64, tol: f64) -> Result<LaurentMatrix> {
    let chain = HarmonicBuilder::with_tol(arr.clone(), tol).build_chain(z)?;
    let chain_t = HarmonicBuilder::with_tol(deform(arr, t)?, tol).build_chain(z)?;
    Ok(eta_from_chains(&chain, &chain_t, t.value()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LambdaPlusResult {
    pub pass: bool,
    /// Largest Frobenius norm of a coefficient at a negative exponent.
    pub worst_negative: f64,
}

/// True iff every negative-exponent coefficient has norm below `tol`.
pub fn lambda_plus_check(eta: &LaurentMatrix, tol: f64) -> LambdaPlusResult {
    let worst_negative = eta
        .support()
        .filter(|(k, _)| *k < 0)
        .map(|(_, c)| c.norm_fro())
        .fold(0.0, f64::max);
    LambdaPlusResult {
        pass: worst_negative < tol,
        worst_negative,
    }
}

/// `max ‖Φ(μλ) Φ(μ)^{-1} − Φ(λ)‖_F` over `μ ∈ mus` and eight `λ` on the circle.
pub fn s1_invariance_check(chain: &ProjectionChain, mus: &[C64]) -> Result<f64> {
    let lambdas = unit_circle_samples(8);
    let mut worst: f64 = 0.0;
    for &mu in mus {
        let inv = chain.extended_at(mu).inverse()?;
        for &lam in &lambdas {
            let lhs = &chain.extended_at(mu * lam) * &inv;
            worst = worst.max((&lhs - &chain.extended_at(lam)).norm_fro());
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrassmannReport {
    pub involution: f64,
    pub hermitian: f64,
    pub pass: bool,
}

/// `φ² = I` and `φ = φ*` to [`GRASSMANN_TOL`].
pub fn grassmann_check(phi: &CMatrix) -> GrassmannReport {
    let involution = (&(phi * phi) - &CMatrix::identity(phi.rows())).norm_fro();
    let hermitian = (phi - &phi.adjoint()).norm_fro();
    GrassmannReport {
        involution,
        hermitian,
        pass: involution < GRASSMANN_TOL && hermitian < GRASSMANN_TOL,
    }
}

/// A serialized verification outcome.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationRecord {
    pub check: String,
    pub params: serde_json::Value,
    pub residual: f64,
    pub ratio: Option<f64>,
    pub pass: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn scalar(f: impl Fn(C64) -> C64) -> impl Fn(C64) -> Result<CMatrix> {
        move |z| Ok(CMatrix::identity(2).scale(f(z)))
    }

    #[test]
    fn wirtinger_examples() {
        let id = CMatrix::identity(2);
        let zero = CMatrix::zeros(2, 2);
        let z0 = c(0.4, -0.3);
        let (dz, dzb) = wirtinger(scalar(|z| z), z0, 1e-3).unwrap();
        assert!((&dz - &id).norm_fro() < 1e-12 && (&dzb - &zero).norm_fro() < 1e-12);
        let (dz, dzb) = wirtinger(scalar(|z| z.conj()), z0, 1e-3).unwrap();
        assert!((&dz - &zero).norm_fro() < 1e-12 && (&dzb - &id).norm_fro() < 1e-12);
        let (dz, dzb) = wirtinger(scalar(|z| z * z.conj()), c(1.0, 0.0), 1e-3).unwrap();
        assert!((&dz - &id).norm_fro() < 1e-9 && (&dzb - &id).norm_fro() < 1e-9);
    }

    #[test]
    fn constant_map_vanishes() {
        let q = CMatrix::diag(&[c(1.0, 0.0), c(-1.0, 0.0)]);
        let rep = harmonicity_residual_of(|_| Ok(q.clone()), c(0.5, 0.5), 1e-3).unwrap();
        assert_eq!(rep.residual, 0.0);
        assert_eq!(rep.status, ConvergenceStatus::Vanishing);
    }

    #[test]
    fn holomorphic_scalar_is_harmonic() {
        // A scalar unitary map e^{i(z^2 + z̄^2)} is harmonic since its phase is.
        let f = scalar(|z| (I * (z * z + z.conj() * z.conj())).exp());
        let rep = harmonicity_residual_of(f, c(0.3, 0.2), 1e-3).unwrap();
        assert!(rep.pass(), "{rep:?}");
    }

    #[test]
    fn non_harmonic_scalar_fails() {
        let f = scalar(|z| (I * (z * z.conj())).exp());
        let rep = harmonicity_residual_of(f, c(0.3, 0.2), 1e-3).unwrap();
        assert_eq!(rep.status, ConvergenceStatus::Failing);
        assert!(rep.residual > 1.0);
    }

    #[test]
    fn identity_is_lambda_plus() {
        let r = lambda_plus_check(&LaurentMatrix::identity(3), 1e-7);
        assert!(r.pass);
        assert_eq!(r.worst_negative, 0.0);
    }

    #[test]
    fn projector_reflection_is_grassmannian() {
        let p = CMatrix::diag(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(grassmann_check(&(&p - &p.complement())).pass);
        let rot = CMatrix::from_rows(&[vec![c(0.0, 0.0), c(-1.0, 0.0)], vec![c(1.0, 0.0), c(0.0, 0.0)]]).unwrap();
        assert!(!grassmann_check(&rot).pass);
    }

    #[test]
    fn samples_avoid_one() {
        for l in unit_circle_samples(8) {
            assert!((l - 1.0).norm() > 0.1);
            assert!((l.norm() - 1.0).abs() < 1e-15);
        }
    }
}
