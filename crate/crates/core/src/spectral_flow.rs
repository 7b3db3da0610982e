//! The deformation `t ↦ ℋ(t)` of an echelon array toward its diagonal limit.
//!
//! For a column with lead row `k`,
//!
//! ```text
//! H_{i,j}(t) = Σ_{s=k}^{i} C(i,s) t^{s−k} (t−1)^{i−s} H_{s,j},
//! ```
//!
//! so `ℋ(1) = ℋ` and `H_{i,j}(0) = (−1)^{i−k} C(i,k) H_{k,j}`.

use std::io::Write;

use rayon::prelude::*;

use crate::cxlinalg::CMatrix;
use crate::error::{Error, Result};
use crate::harmonic_builder::{HarmonicBuilder, ProjectionChain};
use crate::ratfun::{MeroVector, C64};
use crate::uniton_array::{binomial, ArrayColumn, ConstantLeftFactor, FZeroArray, UnitonArray, ViolationKind};
use crate::verifier::{harmonicity_residual, ResidualReport};

/// A flow time in `(0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct FlowParam(f64);

impl FlowParam {
    pub fn new(t: f64) -> Result<Self> {
        if t > 0.0 && t <= 1.0 {
            Ok(FlowParam(t))
        } else {
            Err(Error::InvalidParameter(t))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn require_echelon(arr: &UnitonArray) -> Result<()> {
    let bad = arr.validate().into_iter().find(|v| {
        matches!(
            v.kind,
            ViolationKind::Echelon | ViolationKind::LeadRow | ViolationKind::ColumnOrder | ViolationKind::Shape
        )
    });
    match bad {
        Some(v) => Err(Error::NotEchelon(v.to_string())),
        None => Ok(()),
    }
}

fn map_columns(arr: &UnitonArray, coeff: impl Fn(usize, usize, usize) -> f64) -> UnitonArray {
    let n = arr.n();
    let columns = arr
        .columns()
        .iter()
        .map(|col| {
            let k = col.lead_row;
            let rows = (0..arr.r())
                .map(|i| {
                    if i < k {
                        return MeroVector::zeros(n);
                    }
                    (k..=i).fold(MeroVector::zeros(n), |acc, s| {
                        let c = coeff(i, s, k);
                        if c == 0.0 {
                            acc
                        } else {
                            acc.add(&col.rows[s].scale(C64::new(c, 0.0)))
                        }
                    })
                })
                .collect();
            ArrayColumn { lead_row: k, rows }
        })
        .collect();
    UnitonArray::new(n, arr.r(), columns).expect("shape preserved")
}

/// `ℋ(t)`
pub fn deform(arr: &UnitonArray, t: FlowParam) -> Result<UnitonArray> {
    require_echelon(arr)?;
    let t = t.value();
    if t == 1.0 {
        return Ok(arr.clone());
    }
    Ok(map_columns(arr, |i, s, k| {
        binomial(i, s) * t.powi((s - k) as i32) * (t - 1.0).powi((i - s) as i32)
    }))
}

/// `ℋ(0)`: only the lead-row term survives.
pub fn limit_array(arr: &UnitonArray) -> Result<UnitonArray> {
    require_echelon(arr)?;
    Ok(map_columns(arr, |i, s, k| {
        if s != k {
            return 0.0;
        }
        let sign = if (i - k) % 2 == 0 { 1.0 } else { -1.0 };
        sign * binomial(i, k)
    }))
}

/// `K_{i,j}(t) = t^{i−k} K_{i,j}` where `k` is the lead row of column `j`.
pub fn deform_k(karr: &FZeroArray, t: FlowParam) -> Result<FZeroArray> {
    karr.validate()?;
    let t = t.value();
    let columns = karr
        .columns()
        .iter()
        .enumerate()
        .map(|(j, col)| {
            let k = karr.lead_row(j).unwrap_or(0);
            col.iter()
                .enumerate()
                .map(|(i, v)| {
                    if i < k {
                        v.clone()
                    } else {
                        v.scale(C64::new(t.powi((i - k) as i32), 0.0))
                    }
                })
                .collect()
        })
        .collect();
    FZeroArray::new(karr.n(), karr.r(), karr.f0().clone(), columns)
}

/// One row of a flow table.
#[derive(Clone, Debug)]
pub struct FlowRow {
    pub t: f64,
    pub z: C64,
    pub phi: CMatrix,
    pub unitarity: f64,
    pub harmonicity: ResidualReport,
}

/// `φ_t(z)` for every `(t, z)`, ordered by `t` then by the order of `z_samples`.
pub fn flow_family(
    arr: &UnitonArray,
    q: &ConstantLeftFactor,
    t_grid: &[FlowParam],
    z_samples: &[C64],
    tol: f64,
    h: f64,
) -> Result<Vec<FlowRow>> {
    let mut ts: Vec<FlowParam> = t_grid.to_vec();
    ts.sort_by(|a, b| a.value().total_cmp(&b.value()));
    let builders = ts
        .iter()
        .map(|&t| Ok((t.value(), HarmonicBuilder::with_tol(deform(arr, t)?, tol))))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, C64)> = (0..builders.len())
        .flat_map(|b| z_samples.iter().map(move |&z| (b, z)))
        .collect();
    jobs.par_iter()
        .map(|&(b, z)| {
            let (t, builder) = &builders[b];
            let phi = builder.evaluate_phi(q, z)?;
            let unitarity = (&(&phi * &phi.adjoint()) - &CMatrix::identity(phi.rows())).norm_fro();
            let harmonicity = harmonicity_residual(builder, q, z, h)?;
            Ok(FlowRow {
                t: *t,
                z,
                phi,
                unitarity,
                harmonicity,
            })
        })
        .collect()
}

/// Writes a flow table as CSV: `t, z_re, z_im`, the entries of `φ` in row-major
/// order as `(re, im)` pairs, then the unitarity and harmonicity residuals.
pub fn write_flow_csv(rows: &[FlowRow], n: usize, mut out: impl Write) -> std::io::Result<()> {
    let mut header = vec!["t".to_string(), "z_re".into(), "z_im".into()];
    for a in 0..n {
        for b in 0..n {
            header.push(format!("phi_{a}_{b}_re"));
            header.push(format!("phi_{a}_{b}_im"));
        }
    }
    header.extend(["unitarity".into(), "harmonicity".into(), "harmonicity_ratio".into()]);
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let mut fields = vec![
            format!("{}", row.t),
            format!("{:e}", row.z.re),
            format!("{:e}", row.z.im),
        ];
        for a in 0..n {
            for b in 0..n {
                let v = row.phi[(a, b)];
                fields.push(format!("{:e}", v.re));
                fields.push(format!("{:e}", v.im));
            }
        }
        fields.push(format!("{:e}", row.unitarity));
        fields.push(format!("{:e}", row.harmonicity.residual));
        fields.push(match row.harmonicity.ratio {
            Some(r) => format!("{r:e}"),
            None => String::new(),
        });
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// Estimated constant `C` in `‖chain(t+δ) − chain(t)‖ ≤ C δ` at a fixed point.
pub fn continuity_constant(arr: &UnitonArray, z: C64, t: FlowParam, delta: f64, tol: f64) -> Result<f64> {
    let t2 = FlowParam::new((t.value() + delta).min(1.0))?;
    let t1 = FlowParam::new(t2.value() - delta)?;
    let a = HarmonicBuilder::with_tol(deform(arr, t1)?, tol).build_chain(z)?;
    let b = HarmonicBuilder::with_tol(deform(arr, t2)?, tol).build_chain(z)?;
    Ok(a.distance(&b) / delta)
}

/// Chains of `ℋ(t)` and of the limit `ℋ(0)` at `z`.
pub fn limit_chains(arr: &UnitonArray, z: C64, t: FlowParam, tol: f64) -> Result<(ProjectionChain, ProjectionChain)> {
    let at_t = HarmonicBuilder::with_tol(deform(arr, t)?, tol).build_chain(z)?;
    let limit = HarmonicBuilder::with_tol(limit_array(arr)?, tol).build_chain(z)?;
    Ok((at_t, limit))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn col(seed: f64) -> MeroVector {
        MeroVector::from_polys(&[
            &[c(seed, 0.0), c(1.0, 0.0)],
            &[c(0.0, seed)],
            &[c(1.0, 1.0), c(0.0, 0.0), c(seed, 0.0)],
            &[c(0.5, 0.0), c(-seed, 0.0)],
        ])
    }

    fn two_row() -> UnitonArray {
        UnitonArray::new(
            4,
            2,
            vec![
                ArrayColumn {
                    lead_row: 0,
                    rows: vec![col(1.0), col(2.0)],
                },
                ArrayColumn {
                    lead_row: 1,
                    rows: vec![MeroVector::zeros(4), col(3.0)],
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn flow_param_range() {
        assert!(FlowParam::new(0.0).is_err());
        assert!(FlowParam::new(1.5).is_err());
        assert_eq!(FlowParam::new(1.0).unwrap().value(), 1.0);
    }

    #[test]
    fn deform_at_one_is_identity() {
        let a = two_row();
        assert_eq!(deform(&a, FlowParam::new(1.0).unwrap()).unwrap(), a);
    }

    #[test]
    fn deform_rows() {
        let a = two_row();
        let t = 0.3;
        let d = deform(&a, FlowParam::new(t).unwrap()).unwrap();
        assert!(d.entry(0, 0).approx_eq(&col(1.0), 1e-12));
        let expected = col(1.0).scale(c(t - 1.0, 0.0)).add(&col(2.0).scale(c(t, 0.0)));
        assert!(d.entry(1, 0).approx_eq(&expected, 1e-12));
        assert!(d.entry(1, 1).approx_eq(&col(3.0), 1e-12));
    }

    #[test]
    fn limit_closed_form() {
        let l = limit_array(&two_row()).unwrap();
        assert!(l.entry(1, 0).approx_eq(&col(1.0).scale(c(-1.0, 0.0)), 1e-12));
        assert!(l.entry(1, 1).approx_eq(&col(3.0), 1e-12));
        assert!(crate::uniton_array::is_diagonal(&l));
    }

    #[test]
    fn non_echelon_rejected() {
        let mut cols = two_row().columns().to_vec();
        cols[1].rows[0] = col(5.0);
        let a = UnitonArray::new(4, 2, cols).unwrap();
        assert!(matches!(
            deform(&a, FlowParam::new(0.5).unwrap()),
            Err(Error::NotEchelon(_))
        ));
        assert!(matches!(limit_array(&a), Err(Error::NotEchelon(_))));
    }
}
