//! JSON formats for matrices, diagrams, circuits, observables and reports.
//!
//! Complex numbers are `[re, im]` arrays and matrices are row-major arrays of
//! rows. Floats are written with 17 significant digits so that every `f64`
//! round-trips exactly; object fields keep declaration order.

use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::circuits::{Gate, MeshDecomposition, ParamCircuit, PhaseValue};
use crate::dilation::Dilation;
use crate::error::{Error, Result};
use crate::expectation::{NormalObservable, OutputDistribution, ShotRecord};
use crate::fock::OccupationState;
use crate::gradient::GradientReport;
use crate::linalg::{ensure_finite, unitarity_residual};
use crate::optimize::{Termination, Trajectory};
use crate::qpath::QPathDiagram;
use crate::scalar::CMat;
use num_complex::Complex;

/// A complex entry; a bare number is read as a real value.
#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Pair([f64; 2]),
    Real(f64),
}

pub type MatrixJson = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_json(m: &CMat<f64>) -> MatrixJson {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn matrix_from_entries(rows: Vec<Vec<EntryJson>>, what: &'static str) -> Result<CMat<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 {
        return Err(Error::InvalidArgument(format!("{what}: matrix is empty")));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(Error::DimensionMismatch {
            what: "matrix row length",
            expected: ncols,
            found: bad.len(),
        });
    }
    let m = CMat::from_fn(nrows, ncols, |r, c| match rows[r][c] {
        EntryJson::Pair([re, im]) => Complex::new(re, im),
        EntryJson::Real(re) => Complex::new(re, 0.0),
    });
    ensure_finite(&m, what)?;
    Ok(m)
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixDoc {
    Bare(Vec<Vec<EntryJson>>),
    Wrapped { matrix: Vec<Vec<EntryJson>> },
}

/// A matrix given either bare or as `{"matrix": ...}`.
pub fn parse_matrix(text: &str) -> Result<CMat<f64>> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    let rows = match doc {
        MatrixDoc::Bare(rows) | MatrixDoc::Wrapped { matrix: rows } => rows,
    };
    matrix_from_entries(rows, "matrix")
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagramDoc {
    matrix: Vec<Vec<EntryJson>>,
    #[serde(default)]
    created: Vec<usize>,
    #[serde(default)]
    postselected: Vec<usize>,
}

/// `{"matrix", "created", "postselected"}`; a bare matrix is a diagram with no ancillas.
pub fn parse_diagram(text: &str) -> Result<QPathDiagram<f64>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    if value.is_array() {
        return Ok(QPathDiagram::from_matrix(parse_matrix(text)?));
    }
    let doc: DiagramDoc = serde_json::from_value(value)?;
    QPathDiagram::new(
        matrix_from_entries(doc.matrix, "diagram matrix")?,
        OccupationState::new(doc.created)?,
        OccupationState::new(doc.postselected)?,
    )
}

pub fn parse_observable(text: &str) -> Result<NormalObservable<f64>> {
    NormalObservable::new(parse_matrix(text)?)
}

pub fn parse_state(text: &str) -> Result<OccupationState> {
    text.trim().parse()
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum GateJson {
    Ps {
        mode: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        param: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        value: Option<f64>,
    },
    Bs {
        modes: [usize; 2],
    },
    U {
        modes: Vec<usize>,
        matrix: MatrixJson,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircuitJson {
    pub modes: usize,
    pub gates: Vec<GateJson>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
}

impl CircuitJson {
    pub fn from_circuit(c: &ParamCircuit<f64>) -> Self {
        let gates = c
            .gates()
            .iter()
            .map(|g| match g {
                Gate::PhaseShift { mode, phase } => match phase {
                    PhaseValue::Param(name) => GateJson::Ps {
                        mode: *mode,
                        param: Some(name.clone()),
                        value: None,
                    },
                    PhaseValue::Fixed(v) => GateJson::Ps {
                        mode: *mode,
                        param: None,
                        value: Some(*v),
                    },
                },
                Gate::BeamSplitter { modes } => GateJson::Bs { modes: *modes },
                Gate::FixedUnitary { modes, matrix } => GateJson::U {
                    modes: modes.clone(),
                    matrix: matrix_to_json(matrix),
                },
            })
            .collect();
        let params = c
            .params()
            .iter()
            .filter_map(|p| p.value.map(|v| (p.name.clone(), v)))
            .collect();
        Self {
            modes: c.modes(),
            gates,
            params,
        }
    }

    pub fn to_circuit(&self) -> Result<ParamCircuit<f64>> {
        let mut c = ParamCircuit::new(self.modes)?;
        for g in &self.gates {
            match g {
                GateJson::Ps { mode, param, value } => match (param, value) {
                    (Some(name), None) => {
                        c.phase(*mode, name, self.params.get(name).copied())?;
                    }
                    (None, Some(v)) => {
                        if !v.is_finite() {
                            return Err(Error::NonFinite("phase value"));
                        }
                        c.fixed_phase(*mode, *v)?;
                    }
                    _ => {
                        return Err(Error::InvalidArgument(
                            "phase gate needs exactly one of \"param\" or \"value\"".into(),
                        ))
                    }
                },
                GateJson::Bs { modes: [a, b] } => {
                    c.beam_splitter(*a, *b)?;
                }
                GateJson::U { modes, matrix } => {
                    let rows = matrix
                        .iter()
                        .map(|r| r.iter().map(|&p| EntryJson::Pair(p)).collect())
                        .collect();
                    c.unitary(modes.clone(), matrix_from_entries(rows, "gate matrix")?)?;
                }
            }
        }
        for (name, v) in &self.params {
            if !v.is_finite() {
                return Err(Error::NonFinite("parameter value"));
            }
            c.param_index(name)?;
        }
        Ok(c)
    }
}

pub fn parse_circuit(text: &str) -> Result<ParamCircuit<f64>> {
    serde_json::from_str::<CircuitJson>(text)?.to_circuit()
}

/// Serializes with `{:.16e}` floats and two-space indentation.
pub fn to_json_string<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Precise(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out).expect("serde_json emits UTF-8"))
}

struct Precise<'a>(PrettyFormatter<'a>);

impl Formatter for Precise<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{value:.16e}")
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, f64::from(value))
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn pair(z: Complex<f64>) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Serialize, Debug)]
pub struct Metadata {
    pub modes: usize,
    pub photons: usize,
    pub shots: Option<u64>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Debug)]
pub struct AmplitudeReport {
    pub input: OccupationState,
    pub output: OccupationState,
    pub re: f64,
    pub im: f64,
}

impl AmplitudeReport {
    pub fn new(input: OccupationState, output: OccupationState, z: Complex<f64>) -> Self {
        Self {
            input,
            output,
            re: z.re,
            im: z.im,
        }
    }
}

#[derive(Serialize, Debug)]
pub struct DistributionReport {
    pub metadata: Metadata,
    pub input: OccupationState,
    pub states: Vec<OccupationState>,
    pub probabilities: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counts: Option<Vec<u64>>,
}

impl DistributionReport {
    pub fn exact(input: &OccupationState, dist: &OutputDistribution<f64>) -> Self {
        Self {
            metadata: Metadata {
                modes: dist.basis.modes(),
                photons: dist.basis.photons(),
                shots: None,
                seed: None,
            },
            input: input.clone(),
            states: dist.basis.states().to_vec(),
            probabilities: dist.probabilities.clone(),
            counts: None,
        }
    }

    /// Empirical frequencies in place of probabilities.
    pub fn sampled(input: &OccupationState, dist: &OutputDistribution<f64>, shots: &ShotRecord) -> Self {
        Self {
            metadata: Metadata {
                modes: dist.basis.modes(),
                photons: dist.basis.photons(),
                shots: Some(shots.shots),
                seed: Some(shots.seed),
            },
            input: input.clone(),
            states: dist.basis.states().to_vec(),
            probabilities: shots.frequencies(),
            counts: Some(shots.counts.clone()),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct ExpectationReport {
    pub metadata: Metadata,
    pub input: OccupationState,
    pub value: [f64; 2],
}

impl ExpectationReport {
    pub fn new(metadata: Metadata, input: OccupationState, value: Complex<f64>) -> Self {
        Self {
            metadata,
            input,
            value: pair(value),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct ParamValueJson {
    pub name: String,
    pub value: [f64; 2],
}

#[derive(Serialize, Debug)]
pub struct QueryJson {
    pub name: String,
    pub width: usize,
    pub photons: usize,
    pub distributions_evaluated: usize,
    pub shots: u64,
}

#[derive(Serialize, Debug)]
pub struct TimingJson {
    pub build_seconds: f64,
    pub evaluate_seconds: f64,
    pub total_seconds: f64,
}

#[derive(Serialize, Debug)]
pub struct GradientJson {
    pub metadata: Metadata,
    pub input: OccupationState,
    pub values: Vec<ParamValueJson>,
    pub query_log: Vec<QueryJson>,
    pub distributions_evaluated: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingJson>,
}

impl GradientJson {
    /// Wall time is included only on request, so seeded runs stay byte-identical.
    pub fn new(
        report: &GradientReport<f64>,
        metadata: Metadata,
        input: OccupationState,
        with_timing: bool,
    ) -> Self {
        let values = report
            .values
            .iter()
            .map(|(name, v)| ParamValueJson {
                name: name.clone(),
                value: pair(*v),
            })
            .collect();
        let query_log = report
            .values
            .iter()
            .zip(&report.query_log)
            .map(|((name, _), r)| QueryJson {
                name: name.clone(),
                width: r.width,
                photons: r.photons,
                distributions_evaluated: r.distributions_evaluated,
                shots: r.shots,
            })
            .collect();
        let timing = with_timing.then(|| TimingJson {
            build_seconds: report.timing.build.as_secs_f64(),
            evaluate_seconds: report.timing.evaluate.as_secs_f64(),
            total_seconds: report.timing.total.as_secs_f64(),
        });
        Self {
            metadata,
            input,
            values,
            query_log,
            distributions_evaluated: report.distributions_evaluated(),
            timing,
        }
    }
}

#[derive(Serialize, Debug)]
pub struct IterationJson {
    pub theta: Vec<f64>,
    pub objective: f64,
    pub gradient_norm: f64,
}

#[derive(Serialize, Debug)]
pub struct TrajectoryJson {
    pub metadata: Metadata,
    pub params: Vec<String>,
    pub termination: &'static str,
    pub objective_increased: bool,
    pub final_theta: Vec<f64>,
    pub final_objective: f64,
    pub iterations: Vec<IterationJson>,
}

impl TrajectoryJson {
    pub fn new(traj: &Trajectory<f64>, params: Vec<String>, metadata: Metadata) -> Self {
        let last = traj.last();
        Self {
            metadata,
            params,
            termination: match traj.termination {
                Termination::Converged => "converged",
                Termination::MaxIterations => "max_iters",
            },
            objective_increased: traj.objective_increased,
            final_theta: last.theta.clone(),
            final_objective: last.objective,
            iterations: traj
                .iterations
                .iter()
                .map(|it| IterationJson {
                    theta: it.theta.clone(),
                    objective: it.objective,
                    gradient_norm: it.gradient_norm,
                })
                .collect(),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct DilationJson {
    pub scale: f64,
    pub input_padding: usize,
    pub output_padding: usize,
    pub unitarity_residual: f64,
    pub unitary: MatrixJson,
}

impl DilationJson {
    pub fn new(d: &Dilation<f64>) -> Result<Self> {
        Ok(Self {
            scale: d.scale(),
            input_padding: d.input_padding(),
            output_padding: d.output_padding(),
            unitarity_residual: unitarity_residual(d.unitary())?,
            unitary: matrix_to_json(d.unitary()),
        })
    }
}

#[derive(Serialize, Debug)]
pub struct CellJson {
    pub mode: usize,
    pub theta: f64,
    pub phi: f64,
}

#[derive(Serialize, Debug)]
pub struct DecompositionJson {
    pub residual: f64,
    pub num_params: usize,
    pub cells: Vec<CellJson>,
    pub output_phases: Vec<f64>,
    pub circuit: CircuitJson,
}

impl DecompositionJson {
    pub fn new(d: &MeshDecomposition<f64>) -> Self {
        Self {
            residual: d.residual,
            num_params: d.circuit.num_params(),
            cells: d
                .cells
                .iter()
                .map(|c| CellJson {
                    mode: c.mode,
                    theta: c.theta,
                    phi: c.phi,
                })
                .collect(),
            output_phases: d.output_phases.clone(),
            circuit: CircuitJson::from_circuit(&d.circuit),
        }
    }
}

#[derive(Serialize, Debug)]
pub struct ErrorJson {
    pub error: ErrorBody,
}

#[derive(Serialize, Debug)]
pub struct ErrorBody {
    pub kind: &'static str,
    pub message: String,
}

impl ErrorJson {
    pub fn new(e: &Error, numerical: bool) -> Self {
        Self {
            error: ErrorBody {
                kind: if numerical { "numerical" } else { "input" },
                message: e.to_string(),
            },
        }
    }
}

/// Names accepted by [`schema`].
pub const SCHEMAS: &[&str] = &[
    "state",
    "matrix",
    "diagram",
    "circuit",
    "observable",
    "amplitude",
    "distribution",
    "expectation",
    "gradient",
    "trajectory",
    "dilation",
    "decomposition",
    "error",
];

/// Plain-text description of one format.
pub fn schema(name: &str) -> Option<&'static str> {
    Some(match name {
        "state" => "Occupation state: JSON array of photon counts per mode, e.g. [1,0,2].",
        "matrix" => {
            "Complex matrix: array of rows, each an array of [re, im] pairs (a bare number \
             is read as a real entry). May be wrapped as {\"matrix\": ...}. Columns are input \
             modes, rows are output modes."
        }
        "diagram" => {
            "Diagram: {\"matrix\": <matrix>, \"created\": [ints], \"postselected\": [ints]}. \
             Ancilla modes are the trailing columns (created) and rows (postselected)."
        }
        "circuit" => {
            "Circuit: {\"modes\": m, \"gates\": [...], \"params\": {name: value}}. Gates apply \
             in list order: {\"type\": \"ps\", \"mode\": j, \"param\": name} or \
             {\"type\": \"ps\", \"mode\": j, \"value\": phase}; {\"type\": \"bs\", \"modes\": [a, b]} \
             for (1/sqrt2)[[1, i], [i, 1]]; {\"type\": \"u\", \"modes\": [..], \"matrix\": <matrix>}. \
             Each named parameter appears in one gate."
        }
        "observable" => "Observable: {\"matrix\": <matrix>} with a normal matrix.",
        "amplitude" => "Amplitude: {\"input\", \"output\", \"re\", \"im\"}.",
        "distribution" => {
            "Distribution: {\"metadata\": {modes, photons, shots, seed}, \"input\", \"states\": \
             [states], \"probabilities\": [floats], \"counts\"?: [ints]}. States are in \
             reverse-lexicographic order starting from (n,0,...,0)."
        }
        "expectation" => "Expectation: {\"metadata\", \"input\", \"value\": [re, im]}.",
        "gradient" => {
            "Gradient: {\"metadata\", \"input\", \"values\": [{name, value: [re, im]}], \
             \"query_log\": [{name, width, photons, distributions_evaluated, shots}], \
             \"distributions_evaluated\", \"timing\"?: {build_seconds, evaluate_seconds, \
             total_seconds}}. Timing appears only with --timing."
        }
        "trajectory" => {
            "Trajectory: {\"metadata\", \"params\", \"termination\": \"converged\" | \
             \"max_iters\", \"objective_increased\", \"final_theta\", \"final_objective\", \
             \"iterations\": [{theta, objective, gradient_norm}]}."
        }
        "dilation" => {
            "Dilation: {\"scale\", \"input_padding\", \"output_padding\", \
             \"unitarity_residual\", \"unitary\": <matrix>}. Amplitudes of A equal \
             scale^n times those of the unitary on zero-padded patterns."
        }
        "decomposition" => {
            "Decomposition: {\"residual\", \"num_params\", \"cells\": [{mode, theta, phi}], \
             \"output_phases\", \"circuit\": <circuit>}. Each cell is ps(phi), bs, ps(theta), \
             bs on (mode, mode+1)."
        }
        "error" => {
            "Error: {\"error\": {\"kind\": \"input\" | \"numerical\", \"message\"}}. Exit code 2 \
             for input errors, 3 for numerical failures."
        }
        _ => return None,
    })
}
