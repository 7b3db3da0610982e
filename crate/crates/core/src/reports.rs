//! JSON reports for construction, verification and the identity suite.
//!
//! Every random choice is derived from [`RunConfig::seed`], and results are
//! collected in a fixed order, so equal configurations give byte-identical
//! output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::cxlinalg::{orthonormalize, CMatrix, DEFAULT_RANK_TOL};
use crate::error::{Error, Result};
use crate::golden::random_echelon;
use crate::harmonic_builder::HarmonicBuilder;
use crate::lemma_oracles::{check_identities, column_families, ChainPair, LemmaSuite, VFamily};
use crate::ratfun::C64;
use crate::sampling::{chains_defined, generic_points, random_vector};
use crate::spectral_flow::{deform, FlowParam};
use crate::uniton_array::{ConstantLeftFactor, UnitonArray};
use crate::verifier::{
    eta_from_chains, grassmann_check, harmonicity_residual, harmonicity_residual_of, lambda_plus_check,
    maurer_cartan_check, s1_invariance_check, unit_circle_samples, VerificationRecord, DEFAULT_STEP,
};

pub const LAMBDA_PLUS_TOL: f64 = 1e-7;
pub const IDENTITY_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-9;
pub const S1_TOL: f64 = 1e-9;

/// Settings shared by all report producers.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    /// Rank tolerance for orthonormalization.
    pub tol: f64,
    /// Number of generic points.
    pub samples: usize,
    pub t_grid: Vec<f64>,
    /// Replace the data of each check by a deliberately wrong counterpart.
    pub corrupt: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 0,
            tol: DEFAULT_RANK_TOL,
            samples: 5,
            t_grid: vec![0.25, 0.5, 0.75],
            corrupt: false,
        }
    }
}

impl RunConfig {
    pub fn flow_params(&self) -> Result<Vec<FlowParam>> {
        let mut ts = self
            .t_grid
            .iter()
            .map(|&t| FlowParam::new(t))
            .collect::<Result<Vec<_>>>()?;
        ts.sort_by(|a, b| a.value().total_cmp(&b.value()));
        Ok(ts)
    }

    /// Generic points for `arr` and its deformations over the grid.
    pub fn points(&self, arr: &UnitonArray) -> Result<Vec<C64>> {
        let mut builders = vec![HarmonicBuilder::with_tol(arr.clone(), self.tol)];
        for t in self.flow_params()? {
            builders.push(HarmonicBuilder::with_tol(deform(arr, t)?, self.tol));
        }
        let refs: Vec<&HarmonicBuilder> = builders.iter().collect();
        generic_points(self.seed, self.samples, |z| {
            chains_defined(&refs, z, 2.0 * DEFAULT_STEP)
        })
    }
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_json(m: &CMatrix) -> MatrixJson {
    m.to_rows()
        .iter()
        .map(|r| r.iter().map(|c| [c.re, c.im]).collect())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LaurentTerm {
    pub power: i32,
    pub matrix: MatrixJson,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildPoint {
    pub z: [f64; 2],
    pub ranks: Vec<usize>,
    pub projectors: Vec<MatrixJson>,
    pub phi: MatrixJson,
    pub extended_solution: Vec<LaurentTerm>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BuildReport {
    pub n: usize,
    pub r: usize,
    pub points: Vec<BuildPoint>,
}

/// Chain, map and extended solution at each point.
pub fn build_report(arr: &UnitonArray, q: &ConstantLeftFactor, zs: &[C64], tol: f64) -> Result<BuildReport> {
    let b = HarmonicBuilder::with_tol(arr.clone(), tol);
    let points = zs
        .iter()
        .map(|&z| {
            let chain = b.build_chain(z)?;
            Ok(BuildPoint {
                z: [z.re, z.im],
                ranks: chain.ranks(),
                projectors: chain.projectors().iter().map(matrix_json).collect(),
                phi: matrix_json(&chain.phi(q)),
                extended_solution: chain
                    .extended_solution()
                    .support()
                    .map(|(k, m)| LaurentTerm {
                        power: k,
                        matrix: matrix_json(m),
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BuildReport {
        n: arr.n(),
        r: arr.r(),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Harmonic,
    Extended,
    LambdaPlus,
    Grassmann,
    S1,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Harmonic,
        Suite::Extended,
        Suite::LambdaPlus,
        Suite::Grassmann,
        Suite::S1,
    ];

    pub fn parse(s: &str) -> Result<Suite> {
        match s {
            "harmonic" => Ok(Suite::Harmonic),
            "extended" => Ok(Suite::Extended),
            "lambda_plus" | "lambda-plus" => Ok(Suite::LambdaPlus),
            "grassmann" => Ok(Suite::Grassmann),
            "s1" => Ok(Suite::S1),
            other => Err(Error::Invalid(format!("unknown suite {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: RunConfig,
    pub suites: Vec<Suite>,
    pub points: Vec<[f64; 2]>,
    pub records: Vec<VerificationRecord>,
    pub pass: bool,
}

fn record(check: &str, params: serde_json::Value, residual: f64, ratio: Option<f64>, pass: bool) -> VerificationRecord {
    VerificationRecord {
        check: check.into(),
        params,
        residual,
        ratio,
        pass,
    }
}

/// Reflection through a line spanned by `a + b z + c z̄`: a non-holomorphic factor.
fn non_holomorphic_factor(seed: u64, n: usize) -> impl Fn(C64) -> Result<CMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x6e6f_6e68);
    let (a, b, c) = (
        random_vector(&mut rng, n),
        random_vector(&mut rng, n),
        random_vector(&mut rng, n),
    );
    move |z| {
        let v: Vec<C64> = (0..n).map(|i| a[i] + b[i] * z + c[i] * z.conj()).collect();
        let p = orthonormalize(n, &[v], DEFAULT_RANK_TOL)?.projector();
        Ok(&p.scale(C64::new(2.0, 0.0)) - &CMatrix::identity(n))
    }
}

/// An array of the same shape built from unrelated seeded data.
fn mismatched(arr: &UnitonArray, seed: u64) -> UnitonArray {
    random_echelon(seed ^ 0x6d69_736d, arr.n(), arr.r().max(1))
}

/// Runs the selected suites at generic points.
pub fn verify_report(
    arr: &UnitonArray,
    q: &ConstantLeftFactor,
    suites: &[Suite],
    cfg: &RunConfig,
) -> Result<VerifyReport> {
    let mut suites = suites.to_vec();
    suites.sort();
    suites.dedup();
    let zs = cfg.points(arr)?;
    let ts = cfg.flow_params()?;
    let b = HarmonicBuilder::with_tol(arr.clone(), cfg.tol);
    let n = arr.n();
    let mut records = Vec::new();
    for suite in &suites {
        for &z in &zs {
            let zj = [z.re, z.im];
            match suite {
                Suite::Harmonic => {
                    let rep = if cfg.corrupt {
                        let bad = non_holomorphic_factor(cfg.seed, n);
                        harmonicity_residual_of(|w| Ok(&b.evaluate_phi(q, w)? * &bad(w)?), z, DEFAULT_STEP)?
                    } else {
                        harmonicity_residual(&b, q, z, DEFAULT_STEP)?
                    };
                    let phi = b.evaluate_phi(q, z)?;
                    let unitarity = (&(&phi * &phi.adjoint()) - &CMatrix::identity(n)).norm_fro();
                    records.push(record(
                        "unitarity",
                        json!({ "z": zj }),
                        unitarity,
                        None,
                        unitarity < UNITARY_TOL,
                    ));
                    records.push(record(
                        "harmonicity",
                        json!({ "z": zj, "h": DEFAULT_STEP }),
                        rep.residual,
                        rep.ratio,
                        rep.pass(),
                    ));
                }
                Suite::Extended => {
                    let rep = maurer_cartan_check(&b, z, &unit_circle_samples(8), DEFAULT_STEP)?;
                    records.push(record(
                        "maurer_cartan",
                        json!({ "z": zj, "h": DEFAULT_STEP }),
                        rep.residual,
                        rep.ratio,
                        rep.pass(),
                    ));
                    let chain = b.build_chain(z)?;
                    let at_one = (&chain.extended_at(C64::new(1.0, 0.0)) - &CMatrix::identity(n)).norm_fro();
                    records.push(record(
                        "extended_at_one",
                        json!({ "z": zj }),
                        at_one,
                        None,
                        at_one < 1e-10,
                    ));
                }
                Suite::LambdaPlus => {
                    let chain = b.build_chain(z)?;
                    for &t in &ts {
                        let other = if cfg.corrupt {
                            mismatched(arr, cfg.seed)
                        } else {
                            arr.clone()
                        };
                        let chain_t = HarmonicBuilder::with_tol(deform(&other, t)?, cfg.tol).build_chain(z)?;
                        let res = lambda_plus_check(&eta_from_chains(&chain, &chain_t, t.value()), LAMBDA_PLUS_TOL);
                        records.push(record(
                            "lambda_plus",
                            json!({ "z": zj, "t": t.value() }),
                            res.worst_negative,
                            None,
                            res.pass,
                        ));
                    }
                }
                Suite::Grassmann => {
                    let rep = grassmann_check(&b.evaluate_phi(q, z)?);
                    let residual = rep.involution.max(rep.hermitian);
                    records.push(record(
                        "grassmann",
                        json!({ "z": zj, "t": 1.0 }),
                        residual,
                        None,
                        rep.pass,
                    ));
                    for &t in &ts {
                        let bt = HarmonicBuilder::with_tol(deform(arr, t)?, cfg.tol);
                        let rep = grassmann_check(&bt.evaluate_phi(q, z)?);
                        let residual = rep.involution.max(rep.hermitian);
                        records.push(record(
                            "grassmann",
                            json!({ "z": zj, "t": t.value() }),
                            residual,
                            None,
                            rep.pass,
                        ));
                    }
                }
                Suite::S1 => {
                    let mus = unit_circle_samples(5);
                    let residual = s1_invariance_check(&b.build_chain(z)?, &mus)?;
                    records.push(record(
                        "s1_invariance",
                        json!({ "z": zj }),
                        residual,
                        None,
                        residual < S1_TOL,
                    ));
                }
            }
        }
    }
    let pass = records.iter().all(|r| r.pass);
    Ok(VerifyReport {
        config: cfg.clone(),
        suites,
        points: zs.iter().map(|z| [z.re, z.im]).collect(),
        records,
        pass,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRow {
    pub t: f64,
    pub suite: LemmaSuite,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaReport {
    pub config: RunConfig,
    pub points: Vec<[f64; 2]>,
    pub rows: Vec<LemmaRow>,
    pub combined: LemmaSuite,
    pub pass: bool,
}

/// Families used at each point: the array columns, two random families with
/// different start indices, and a zero family.
pub fn lemma_families(b: &HarmonicBuilder, z: C64, seed: u64) -> Result<Vec<VFamily>> {
    let n = b.array().n();
    let len = b.array().r() + 3;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fams = column_families(b, z)?;
    for start in [0, 2] {
        fams.push(VFamily::new(
            start,
            n,
            (0..len).map(|_| random_vector(&mut rng, n)).collect(),
        )?);
    }
    fams.push(VFamily::zeros(0, n, len));
    Ok(fams)
}

/// The identity suite for every `t` in the grid and every generic point.
pub fn lemma_report(arr: &UnitonArray, cfg: &RunConfig) -> Result<LemmaReport> {
    let zs = cfg.points(arr)?;
    let b = HarmonicBuilder::with_tol(arr.clone(), cfg.tol);
    let mut rows = Vec::new();
    let mut combined: Option<LemmaSuite> = None;
    for t in cfg.flow_params()? {
        let bt = HarmonicBuilder::with_tol(deform(arr, t)?, cfg.tol);
        let mut row: Option<LemmaSuite> = None;
        for (m, &z) in zs.iter().enumerate() {
            let pair = ChainPair::new(b.build_chain(z)?, bt.build_chain(z)?, t.value())?;
            let fams = lemma_families(&b, z, cfg.seed.wrapping_add(m as u64))?;
            let s = check_identities(&pair, &b, &bt, &fams, IDENTITY_TOL)?;
            match row.as_mut() {
                Some(x) => x.merge(&s),
                None => row = Some(s),
            }
        }
        let suite = row.ok_or_else(|| Error::Invalid("no sample points".into()))?;
        match combined.as_mut() {
            Some(x) => x.merge(&suite),
            None => combined = Some(suite.clone()),
        }
        rows.push(LemmaRow { t: t.value(), suite });
    }
    let combined = combined.ok_or_else(|| Error::Invalid("empty t grid".into()))?;
    Ok(LemmaReport {
        config: cfg.clone(),
        points: zs.iter().map(|z| [z.re, z.im]).collect(),
        pass: combined.all_pass(),
        rows,
        combined,
    })
}

pub fn to_json<T: Serialize>(report: &T) -> String {
    serde_json::to_string_pretty(report).expect("reports serialize")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::golden::golden_set;

    #[test]
    fn suite_names() {
        assert_eq!(Suite::parse("lambda-plus").unwrap(), Suite::LambdaPlus);
        assert!(Suite::parse("nope").is_err());
    }

    #[test]
    fn verify_is_deterministic() {
        let g = &golden_set()[1];
        let cfg = RunConfig {
            samples: 2,
            t_grid: vec![0.5],
            ..RunConfig::default()
        };
        let a = to_json(&verify_report(&g.array, &g.q, &[Suite::Extended, Suite::LambdaPlus], &cfg).unwrap());
        let b = to_json(&verify_report(&g.array, &g.q, &[Suite::LambdaPlus, Suite::Extended], &cfg).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn corruption_fails_lambda_plus() {
        let g = &golden_set()[1];
        let cfg = RunConfig {
            samples: 2,
            t_grid: vec![0.5],
            corrupt: true,
            ..RunConfig::default()
        };
        let rep = verify_report(&g.array, &g.q, &[Suite::LambdaPlus, Suite::Harmonic], &cfg).unwrap();
        assert!(!rep.pass);
        assert!(rep.records.iter().filter(|r| r.check == "harmonicity").all(|r| !r.pass));
    }
}
