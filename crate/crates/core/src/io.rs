//! Potential description files and plain-text output helpers.

use crate::error::{Error, Result};
use crate::potential::Potential;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// A potential description as stored on disk.
///
/// ```json
/// {"c_minus": 0, "c_plus": 1, "kind": "step", "jump_at": 0, "m": 8, "n": 0}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    pub c_minus: f64,
    pub c_plus: f64,
    #[serde(flatten)]
    pub kind: KindSpec,
    /// Moment index; kind default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    /// Smoothness index; kind default when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum KindSpec {
    #[serde(alias = "constant")]
    Free,
    #[serde(alias = "heaviside")]
    Step {
        #[serde(default)]
        jump_at: f64,
    },
    #[serde(alias = "soliton")]
    Sech2 {
        #[serde(default = "one")]
        kappa: f64,
        #[serde(default)]
        center: f64,
    },
    #[serde(alias = "reflectionless")]
    Bargmann { kappas: Vec<f64>, gammas: Vec<f64> },
    #[serde(alias = "expr")]
    Expression {
        expr: String,
        #[serde(default)]
        breakpoints: Vec<f64>,
    },
    #[serde(alias = "grid")]
    Sampled { x: Vec<f64>, q: Vec<f64> },
}

fn one() -> f64 {
    1.0
}

impl PotentialSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn build(&self) -> Result<Potential> {
        let (cm, cp) = (self.c_minus, self.c_plus);
        let same_background = || {
            if cm != cp {
                Err(Error::InvalidInput(format!("this kind needs c_minus = c_plus, got {cm} and {cp}")))
            } else {
                Ok(cp)
            }
        };
        let p = match &self.kind {
            KindSpec::Free => Potential::free(same_background()?),
            KindSpec::Step { jump_at } => Potential::step(cm, cp, *jump_at),
            KindSpec::Sech2 { kappa, center } => Potential::sech2(same_background()?, *kappa, *center)?,
            KindSpec::Bargmann { kappas, gammas } => Potential::bargmann(same_background()?, kappas.clone(), gammas.clone())?,
            KindSpec::Expression { expr, breakpoints } => {
                let n = self.n.ok_or_else(|| Error::InvalidInput("expression potentials must declare n".into()))?;
                Potential::expression(cm, cp, expr, breakpoints.clone(), n, self.m.unwrap_or(1))?
            }
            KindSpec::Sampled { x, q } => Potential::sampled(cm, cp, x.clone(), q.clone(), self.n.unwrap_or(3), self.m.unwrap_or(1))?,
        };
        match (self.n, self.m) {
            (None, None) => Ok(p),
            (n, m) => {
                let (n0, m0) = (p.smoothness, p.moments);
                p.with_class(n.unwrap_or(n0), m.unwrap_or(m0))
            }
        }
    }
}

pub fn read_potential(path: &Path) -> Result<Potential> {
    let text = read_text(path)?;
    PotentialSpec::from_json(&text).map_err(|e| locate(path, e))?.build()
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn locate(path: &Path, e: Error) -> Error {
    match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    }
}

/// Writes `contents` to `dir/name`, creating `dir` if needed.
pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Two-column CSV of a sampled function.
pub fn series_csv(header: (&str, &str), rows: &[(f64, f64)]) -> String {
    let mut out = format!("{},{}\n", header.0, header.1);
    for (x, y) in rows {
        out.push_str(&format!("{x},{y}\n"));
    }
    out
}

/// x, q_input, q_recovered, abs_error on the reconstruction window.
pub fn comparison_csv(potential: &Potential, recovered: &[(f64, f64)]) -> String {
    let mut out = String::from("x,q_input,q_recovered,abs_error\n");
    for &(x, q) in recovered {
        let q0 = potential.value(x);
        out.push_str(&format!("{x},{q0},{q},{}\n", (q - q0).abs()));
    }
    out
}
