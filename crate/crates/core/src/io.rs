//! JSON file formats and the compact `name:param` input specs used on the
//! command line.
//!
//! Matrices are nested row-major arrays of `[re, im]` pairs. A channel file
//! looks like
//!
//! ```json
//! { "name": "bit_flip", "trace_preserving": true,
//!   "kraus": [ [[[0.9,0],[0,0]], [[0,0],[0.9,0]]], ... ] }
//! ```
//!
//! and a state file is a bare 4x4 matrix.

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channels::{
    make_amplitude_damping, make_depolarizing, make_filter, make_phase_flip, random_channel,
    KrausChannel,
};
use crate::error::{Error, Result};
use crate::linalg::{c, ComplexMatrix};
use crate::states::{
    bell_phi_plus, density_from_pure, pure_chi, random_mixed, random_pure, DensityMatrix,
};

pub type JsonMatrix = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &ComplexMatrix) -> JsonMatrix {
    (0..m.rows())
        .map(|i| {
            (0..m.cols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_json(rows: &JsonMatrix) -> Result<ComplexMatrix> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::Parse("ragged matrix rows".into()));
    }
    let data = rows.iter().flatten().map(|&[x, y]| c(x, y)).collect();
    ComplexMatrix::new(n, m, data)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub trace_preserving: bool,
    pub kraus: Vec<JsonMatrix>,
}

impl From<&KrausChannel> for ChannelFile {
    fn from(ch: &KrausChannel) -> Self {
        Self {
            name: ch.name.clone(),
            trace_preserving: ch.trace_preserving,
            kraus: ch.kraus.iter().map(matrix_to_json).collect(),
        }
    }
}

impl TryFrom<ChannelFile> for KrausChannel {
    type Error = Error;

    fn try_from(file: ChannelFile) -> Result<Self> {
        let kraus = file
            .kraus
            .iter()
            .map(matrix_from_json)
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(file.name, kraus, file.trace_preserving)
    }
}

pub fn channel_from_json(text: &str) -> Result<KrausChannel> {
    let file: ChannelFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.try_into()
}

pub fn channel_to_json(ch: &KrausChannel) -> String {
    serde_json::to_string_pretty(&ChannelFile::from(ch)).expect("channel serializes")
}

pub fn density_from_json(text: &str) -> Result<DensityMatrix> {
    let rows: JsonMatrix = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    DensityMatrix::two_qubit(matrix_from_json(&rows)?)
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn split_spec(spec: &str) -> (String, Vec<&str>) {
    let mut parts = spec.split(':');
    let name = parts
        .next()
        .unwrap_or("")
        .trim()
        .to_ascii_lowercase()
        .replace('-', "_");
    (name, parts.map(str::trim).collect())
}

fn number<T: FromStr>(args: &[&str], idx: usize, what: &str) -> Result<T> {
    let raw = args
        .get(idx)
        .ok_or_else(|| Error::Parse(format!("missing {what}")))?;
    raw.parse()
        .map_err(|_| Error::Parse(format!("cannot parse {what} from '{raw}'")))
}

/// One-parameter channel families with a closed-form Choi concurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    AmplitudeDamping,
    PhaseFlip,
    Depolarizing,
}

impl Family {
    pub fn channel(self, x: f64) -> Result<KrausChannel> {
        match self {
            Family::AmplitudeDamping => make_amplitude_damping(x),
            Family::PhaseFlip => make_phase_flip(x),
            Family::Depolarizing => make_depolarizing(x),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::AmplitudeDamping => "amplitude_damping",
            Family::PhaseFlip => "phase_flip",
            Family::Depolarizing => "depolarizing",
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, _) = split_spec(s);
        match name.as_str() {
            "amplitude_damping" | "ad" => Ok(Family::AmplitudeDamping),
            "phase_flip" | "dephasing" | "pf" => Ok(Family::PhaseFlip),
            "depolarizing" | "depol" => Ok(Family::Depolarizing),
            _ => Err(Error::UnknownFamily(s.to_string())),
        }
    }
}

/// Parses `identity`, `amplitude_damping:G`, `phase_flip:P`,
/// `depolarizing:P`, `filter:W`, `random:SEED[:RANK]`, or a path to a
/// channel JSON file.
pub fn parse_channel_spec(spec: &str) -> Result<KrausChannel> {
    let path = Path::new(spec);
    if path.is_file() {
        return channel_from_json(&read_file(path)?);
    }
    let (name, args) = split_spec(spec);
    match name.as_str() {
        "identity" | "id" => Ok(KrausChannel::identity()),
        "filter" => make_filter(number(&args, 0, "filter omega")?),
        "random" => {
            let seed = number(&args, 0, "random channel seed")?;
            let rank = if args.len() > 1 {
                number(&args, 1, "Kraus rank")?
            } else {
                2
            };
            random_channel(seed, rank)
        }
        _ => match Family::from_str(&name) {
            Ok(family) => family.channel(number(&args, 0, "channel parameter")?),
            Err(_) => Err(Error::Parse(format!(
                "unknown channel '{spec}' (not a builtin and no such file)"
            ))),
        },
    }
}

/// Parses `phi_plus`, `chi:W`, `maximally_mixed`, `random_pure:SEED`,
/// `random_mixed:SEED:RANK`, or a path to a 4x4 density-matrix JSON file.
pub fn parse_state_spec(spec: &str) -> Result<DensityMatrix> {
    let path = Path::new(spec);
    if path.is_file() {
        return density_from_json(&read_file(path)?);
    }
    let (name, args) = split_spec(spec);
    match name.as_str() {
        "phi_plus" | "bell" => Ok(density_from_pure(&bell_phi_plus())),
        "chi" => Ok(density_from_pure(&pure_chi(number(
            &args,
            0,
            "chi omega",
        )?)?)),
        "maximally_mixed" => Ok(DensityMatrix::maximally_mixed((1, 1))),
        "random_pure" => Ok(density_from_pure(&random_pure(number(&args, 0, "seed")?))),
        "random_mixed" => random_mixed(number(&args, 0, "seed")?, number(&args, 1, "rank")?),
        _ => Err(Error::Parse(format!(
            "unknown state '{spec}' (not a builtin and no such file)"
        ))),
    }
}
