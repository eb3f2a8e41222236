//! Target and parameter parsing for the command line.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use stabex::gate_library::{
    fsim, generalized_hypergraph_unitary, hypergraph_unitary, multi_controlled_phase, multi_controlled_s,
    multi_controlled_z, qft_block, t_gate, Angle, AngleAssignment, Hypergraph,
};
use stabex::operator::DenseOperator;
use stabex::symmetry_reduction::Permutation;

use crate::CliError;

/// Plain radians this close to a multiple of pi/4 are read as that multiple.
const SNAP_TOL: f64 = 1e-5;

/// A parsed angle plus a note when a float was snapped.
pub struct ParsedAngle {
    pub angle: Angle,
    pub note: Option<String>,
}

/// Accepts radians (`0.3`), or multiples of pi (`pi`, `-pi/2`, `3pi/4`,
/// `0.7048pi`, `0.25*pi`).
pub fn parse_angle(s: &str) -> Result<ParsedAngle, CliError> {
    let t = s.trim().to_ascii_lowercase().replace(' ', "");
    let bad = || CliError::Input(format!("cannot parse angle '{s}'"));
    if let Some(pos) = t.find("pi") {
        let (coef, rest) = (&t[..pos], &t[pos + 2..]);
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let den: i64 = match rest.strip_prefix('/') {
            Some(d) => d.parse().map_err(|_| bad())?,
            None if rest.is_empty() => 1,
            None => return Err(bad()),
        };
        if den == 0 {
            return Err(bad());
        }
        let num = match coef {
            "" | "+" => Some(1),
            "-" => Some(-1),
            c => c.parse::<i64>().ok(),
        };
        if let Some(num) = num {
            return Ok(ParsedAngle { angle: Angle::pi_fraction(num, den), note: None });
        }
        let c: f64 = coef.parse().map_err(|_| bad())?;
        return Ok(ParsedAngle { angle: Angle::from_radians(c * PI / den as f64), note: None });
    }
    let x: f64 = t.parse().map_err(|_| bad())?;
    if !x.is_finite() {
        return Err(bad());
    }
    let q = (x / (PI / 4.0)).round();
    if q != 0.0 && (x - q * PI / 4.0).abs() < SNAP_TOL {
        let angle = Angle::pi_fraction(q as i64, 4);
        let note = format!("angle {s} read as {}", describe_pi_quarter(q as i64));
        return Ok(ParsedAngle { angle, note: Some(note) });
    }
    Ok(ParsedAngle { angle: Angle::from_radians(x), note: None })
}

fn describe_pi_quarter(q: i64) -> String {
    let g = gcd(q.unsigned_abs(), 4) as i64;
    let (num, den) = (q / g, 4 / g);
    let head = match num {
        1 => "pi".to_string(),
        -1 => "-pi".to_string(),
        k => format!("{k}pi"),
    };
    if den == 1 {
        head
    } else {
        format!("{head}/{den}")
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `order=angle` pairs separated by commas, e.g. `3=0.6476pi,4=0.7048pi`.
pub fn parse_angle_assignment(s: &str) -> Result<AngleAssignment, CliError> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| CliError::Input(format!("expected order=angle, got '{part}'")))?;
        let k: usize = k.trim().parse().map_err(|_| CliError::Input(format!("bad edge order '{k}'")))?;
        out.insert(k, parse_angle(v)?.angle);
    }
    if out.is_empty() {
        return Err(CliError::Input("empty angle assignment".into()));
    }
    Ok(out)
}

/// Dense matrix text: one row per line, entries like `0.5`, `-1j`,
/// `0.7071+0.7071j`, separated by whitespace or commas; `#` comments.
pub fn parse_matrix(text: &str) -> Result<DenseOperator, CliError> {
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| Complex64::from_str(t).map_err(|_| CliError::Input(format!("bad matrix entry '{t}'"))))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(DenseOperator::from_rows(&rows)?)
}

/// Permutation generators, one per line in one-line notation with 1-based
/// images (`2,1,3` swaps the first two qubits).
pub fn parse_permutations(text: &str) -> Result<Vec<Permutation>, CliError> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let p = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| match t.parse::<usize>() {
                Ok(v) if v >= 1 => Ok(v - 1),
                _ => Err(CliError::Input(format!("bad permutation entry '{t}'"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        out.push(p);
    }
    if out.is_empty() {
        return Err(CliError::Input("no permutations in subgroup file".into()));
    }
    Ok(out)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Where a target comes from.
pub struct TargetSpec<'a> {
    pub gate: Option<&'a str>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub theta: Option<&'a str>,
    pub phi: Option<&'a str>,
    pub hypergraph: Option<&'a Path>,
    pub angles: Option<&'a str>,
    pub matrix: Option<&'a Path>,
}

pub struct Target {
    pub label: String,
    pub unitary: DenseOperator,
    pub notes: Vec<String>,
}

impl TargetSpec<'_> {
    pub fn resolve(&self) -> Result<Target, CliError> {
        let sources = [self.gate.is_some(), self.hypergraph.is_some(), self.matrix.is_some()];
        if sources.iter().filter(|s| **s).count() != 1 {
            return Err(CliError::Input("give exactly one of --gate, --hypergraph, --matrix".into()));
        }
        let mut notes = Vec::new();
        if let Some(path) = self.matrix {
            let unitary = parse_matrix(&read_text(path)?)?;
            return Ok(Target { label: format!("matrix:{}", path.display()), unitary, notes });
        }
        if let Some(path) = self.hypergraph {
            let h = Hypergraph::parse(&read_text(path)?)?;
            let (label, u) = match self.angles {
                None => ("hypergraph".to_string(), hypergraph_unitary(&h)),
                Some(a) => {
                    let angles = parse_angle_assignment(a)?;
                    ("generalized-hypergraph".to_string(), generalized_hypergraph_unitary(&h, &angles)?)
                }
            };
            return Ok(Target { label: format!("{label}:{}", path.display()), unitary: u.to_dense(), notes });
        }
        let gate = self.gate.expect("checked above");
        let need_n = || self.n.ok_or_else(|| CliError::Input(format!("--gate {gate} needs --n")));
        let mut angle = |name: &str, v: Option<&str>| -> Result<Angle, CliError> {
            let v = v.ok_or_else(|| CliError::Input(format!("--gate {gate} needs --{name}")))?;
            let p = parse_angle(v)?;
            notes.extend(p.note);
            Ok(p.angle)
        };
        let (label, unitary) = match gate {
            "t" => ("t".to_string(), t_gate().to_dense()),
            "cs" => ("cs".to_string(), multi_controlled_s(2)?.to_dense()),
            "ccz" => ("ccz".to_string(), multi_controlled_z(3)?.to_dense()),
            "cnz" => {
                let n = need_n()?;
                (format!("cnz(n={n})"), multi_controlled_z(n)?.to_dense())
            }
            "cns" => {
                let n = need_n()?;
                (format!("cns(n={n})"), multi_controlled_s(n)?.to_dense())
            }
            "cnp" => {
                let n = need_n()?;
                let a = angle("theta", self.theta)?;
                (format!("cnp(n={n})"), multi_controlled_phase(n, a)?.to_dense())
            }
            "fsim" => {
                let t = angle("theta", self.theta)?.as_radians();
                let p = angle("phi", self.phi)?.as_radians();
                ("fsim".to_string(), fsim(t, p))
            }
            "qft-block" => {
                let k = self.k.ok_or_else(|| CliError::Input("--gate qft-block needs --k".into()))?;
                (format!("qft-block(k={k})"), qft_block(k)?.to_dense())
            }
            other => {
                return Err(CliError::Input(format!(
                    "unknown gate '{other}' (t, cs, ccz, cnz, cns, cnp, fsim, qft-block)"
                )))
            }
        };
        Ok(Target { label, unitary, notes })
    }
}
