//! JSON and CSV interchange.
//!
//! CSV values are written with the shortest round-trip representation, so
//! identical inputs produce byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::{self, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charfun::{CharFun, CharFunError};
use crate::kernels::DelayKernel;
use crate::networks::Spectrum;
use crate::poly::ComplexPoly;
use crate::regions::NuMap;
use crate::scalar::{Real, C};
use crate::scc::{polar_profile, SccBranch};
use crate::simulate::{KuramotoRun, Trajectory};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    CharFun(#[from] CharFunError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermDoc<T> {
    pub k: usize,
    pub j: usize,
    /// Coefficients in ascending powers of `L`, as `[re, im]`.
    pub poly: Vec<[T; 2]>,
}

/// Serialized characteristic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharFunDoc<T> {
    pub q: usize,
    pub kernel: DelayKernel<T>,
    pub terms: Vec<TermDoc<T>>,
}

impl<T: Real> CharFunDoc<T> {
    pub fn from_charfun(f: &CharFun<T>) -> Self {
        CharFunDoc {
            q: f.dim(),
            kernel: *f.kernel(),
            terms: f
                .terms()
                .iter()
                .map(|(&(k, j), p)| TermDoc {
                    k,
                    j,
                    poly: p.coeffs().iter().map(|c| [c.re, c.im]).collect(),
                })
                .collect(),
        }
    }

    pub fn to_charfun(&self) -> Result<CharFun<T>, CharFunError> {
        let mut terms = BTreeMap::new();
        for t in &self.terms {
            let p = ComplexPoly::new(t.poly.iter().map(|c| Complex::new(c[0], c[1])).collect());
            let slot = terms.entry((t.k, t.j)).or_insert_with(ComplexPoly::zero);
            *slot = &*slot + &p;
        }
        CharFun::from_terms(self.q, self.kernel, terms)
    }
}

pub fn charfun_to_json(f: &CharFun<f64>) -> String {
    serde_json::to_string(&CharFunDoc::from_charfun(f)).expect("plain data serializes")
}

pub fn charfun_from_json(s: &str) -> Result<CharFun<f64>, IoError> {
    let doc: CharFunDoc<f64> = serde_json::from_str(s)?;
    Ok(doc.to_charfun()?)
}

fn row<W: Write, D: Display>(w: &mut W, cells: impl IntoIterator<Item = D>) -> io::Result<()> {
    let line: Vec<String> = cells.into_iter().map(|c| c.to_string()).collect();
    writeln!(w, "{}", line.join(","))
}

/// Columns `beta, re_L, im_L, r, theta, theta_prime`.
pub fn write_branch_csv<T: Real, W: Write>(w: &mut W, branch: &SccBranch<T>) -> io::Result<()> {
    writeln!(w, "beta,re_L,im_L,r,theta,theta_prime")?;
    for ((b, l), p) in branch.beta.iter().zip(&branch.points).zip(polar_profile(branch)) {
        row(w, [*b, l.re, l.im, p.r, p.theta, p.theta_prime])?;
    }
    Ok(())
}

/// Columns `re_L, im_L, nu`, row-major from the lower-left cell.
pub fn write_numap_csv<T: Real, W: Write>(w: &mut W, map: &NuMap<T>) -> io::Result<()> {
    writeln!(w, "re_L,im_L,nu")?;
    for iy in 0..map.ny {
        for ix in 0..map.nx {
            let c = map.cell_center(ix, iy);
            writeln!(w, "{},{},{}", c.re, c.im, map.label(ix, iy))?;
        }
    }
    Ok(())
}

/// Curve polylines as nested `[re, im]` arrays.
pub fn polylines_json<T: Real + Serialize>(curves: &[Vec<C<T>>]) -> String {
    let v: Vec<Vec<[T; 2]>> = curves
        .iter()
        .map(|c| c.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    serde_json::to_string(&v).expect("plain data serializes")
}

/// Columns `t`, then `re_i, im_i` per state component.
pub fn write_trajectory_csv<T: Real, W: Write>(w: &mut W, traj: &Trajectory<T>) -> io::Result<()> {
    let dim = traj.states.first().map_or(0, |s| s.len());
    let mut header = vec!["t".to_string()];
    for i in 0..dim {
        header.push(format!("re_{i}"));
        header.push(format!("im_{i}"));
    }
    writeln!(w, "{}", header.join(","))?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let mut cells = vec![*t];
        for z in s {
            cells.push(z.re);
            cells.push(z.im);
        }
        row(w, cells)?;
    }
    Ok(())
}

/// Columns `t, abs_r, arg_r`.
pub fn write_order_parameter_csv<T: Real, W: Write>(w: &mut W, run: &KuramotoRun<T>) -> io::Result<()> {
    writeln!(w, "t,abs_r,arg_r")?;
    for (t, r) in run.times.iter().zip(&run.r) {
        row(w, [*t, r.norm(), r.arg()])?;
    }
    Ok(())
}

/// Phase snapshots: `t` followed by one column per oscillator.
pub fn write_phase_snapshots_csv<T: Real, W: Write>(w: &mut W, run: &KuramotoRun<T>) -> io::Result<()> {
    let n = run.snapshots.first().map_or(0, |s| s.1.len());
    let header: Vec<String> = std::iter::once("t".to_string())
        .chain((0..n).map(|i| format!("theta_{i}")))
        .collect();
    writeln!(w, "{}", header.join(","))?;
    for (t, phases) in &run.snapshots {
        row(w, std::iter::once(*t).chain(phases.iter().copied()))?;
    }
    Ok(())
}

/// Columns `re, im`.
pub fn write_spectrum_csv<T: Real, W: Write>(w: &mut W, s: &Spectrum<T>) -> io::Result<()> {
    writeln!(w, "re,im")?;
    for z in &s.eigenvalues {
        row(w, [z.re, z.im])?;
    }
    Ok(())
}
