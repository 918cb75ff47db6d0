//! Parametrized linear optical circuits and Clements mesh routing.
//!
//! Conventions:
//! - gates are listed in the order light traverses them, so the circuit
//!   unitary is `G_k ... G_2 G_1`;
//! - the 50:50 beam splitter is `(1/sqrt 2) [[1, i], [i, 1]]`;
//! - a Mach-Zehnder cell `T(theta, phi)` on modes `(k, k+1)` is the gate sequence
//!   `ps(phi) on k, bs, ps(theta) on k, bs`, i.e. `BS P(theta) BS P(phi)`.

use std::collections::HashMap;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, unitarity_residual};
use crate::scalar::{cis, CMat, Real};
use crate::tol;

/// Phase of a phase-shift gate: a named parameter or a constant.
#[derive(Clone, Debug, PartialEq)]
pub enum PhaseValue<T> {
    Param(String),
    Fixed(T),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Gate<T: Real> {
    PhaseShift { mode: usize, phase: PhaseValue<T> },
    /// Fixed 50:50 splitter between two distinct modes.
    BeamSplitter { modes: [usize; 2] },
    /// Arbitrary unitary on the listed modes (row/column order follows `modes`).
    FixedUnitary { modes: Vec<usize>, matrix: CMat<T> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Parameter<T> {
    pub name: String,
    pub value: Option<T>,
}

/// Ordered gate list over `modes` modes with a table of named phases.
///
/// Every named parameter appears in exactly one gate.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamCircuit<T: Real> {
    modes: usize,
    gates: Vec<Gate<T>>,
    params: Vec<Parameter<T>>,
    lookup: HashMap<String, usize>,
}

/// Wraps an angle into `[0, 2 pi)`.
pub fn wrap_phase<T: Real>(theta: T) -> T {
    let two_pi = T::two_pi();
    let mut r = theta % two_pi;
    if r < T::zero() {
        r += two_pi;
    }
    if r >= two_pi {
        r -= two_pi;
    }
    r
}

impl<T: Real> ParamCircuit<T> {
    pub fn new(modes: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::TooFewModes { min: 1, found: 0 });
        }
        Ok(Self {
            modes,
            gates: Vec::new(),
            params: Vec::new(),
            lookup: HashMap::new(),
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn gates(&self) -> &[Gate<T>] {
        &self.gates
    }

    pub fn params(&self) -> &[Parameter<T>] {
        &self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn param_names(&self) -> impl Iterator<Item = &str> {
        self.params.iter().map(|p| p.name.as_str())
    }

    pub fn param_index(&self, name: &str) -> Result<usize> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode < self.modes {
            Ok(())
        } else {
            Err(Error::ModeOutOfRange {
                mode,
                modes: self.modes,
            })
        }
    }

    /// Phase shift controlled by a new named parameter.
    pub fn phase(&mut self, mode: usize, name: &str, value: Option<T>) -> Result<&mut Self> {
        self.check_mode(mode)?;
        if self.lookup.contains_key(name) {
            return Err(Error::DuplicateParameter(name.to_string()));
        }
        self.lookup.insert(name.to_string(), self.params.len());
        self.params.push(Parameter {
            name: name.to_string(),
            value: value.map(wrap_phase),
        });
        self.gates.push(Gate::PhaseShift {
            mode,
            phase: PhaseValue::Param(name.to_string()),
        });
        Ok(self)
    }

    pub fn fixed_phase(&mut self, mode: usize, theta: T) -> Result<&mut Self> {
        self.check_mode(mode)?;
        self.gates.push(Gate::PhaseShift {
            mode,
            phase: PhaseValue::Fixed(theta),
        });
        Ok(self)
    }

    pub fn beam_splitter(&mut self, a: usize, b: usize) -> Result<&mut Self> {
        self.check_mode(a)?;
        self.check_mode(b)?;
        if a == b {
            return Err(Error::InvalidArgument(format!(
                "beam splitter needs two distinct modes, got {a} twice"
            )));
        }
        self.gates.push(Gate::BeamSplitter { modes: [a, b] });
        Ok(self)
    }

    pub fn unitary(&mut self, modes: Vec<usize>, matrix: CMat<T>) -> Result<&mut Self> {
        for &m in &modes {
            self.check_mode(m)?;
        }
        let mut sorted = modes.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != modes.len() {
            return Err(Error::InvalidArgument("fixed unitary modes repeat".into()));
        }
        if matrix.nrows() != modes.len() || matrix.ncols() != modes.len() {
            return Err(Error::DimensionMismatch {
                what: "fixed unitary size vs its mode list",
                expected: modes.len(),
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        let residual = unitarity_residual(&matrix)?;
        if residual > T::tol(tol::UNITARY_INPUT) {
            return Err(Error::NotUnitary {
                residual: residual.as_f64(),
            });
        }
        self.gates.push(Gate::FixedUnitary { modes, matrix });
        Ok(self)
    }

    /// Mach-Zehnder cell on `(mode, mode + 1)` with named internal and external phases.
    pub fn mzi(
        &mut self,
        mode: usize,
        theta: (&str, Option<T>),
        phi: (&str, Option<T>),
    ) -> Result<&mut Self> {
        self.check_mode(mode + 1)?;
        self.phase(mode, phi.0, phi.1)?
            .beam_splitter(mode, mode + 1)?
            .phase(mode, theta.0, theta.1)?
            .beam_splitter(mode, mode + 1)
    }

    pub fn bind(&mut self, name: &str, value: T) -> Result<&mut Self> {
        let k = self.param_index(name)?;
        self.params[k].value = Some(wrap_phase(value));
        Ok(self)
    }

    /// Bound values in parameter order; fails on the first unbound one.
    pub fn values(&self) -> Result<Vec<T>> {
        self.params
            .iter()
            .map(|p| p.value.ok_or_else(|| Error::UnboundParameter(p.name.clone())))
            .collect()
    }

    pub fn set_values(&mut self, values: &[T]) -> Result<()> {
        self.check_len(values)?;
        for (p, &v) in self.params.iter_mut().zip(values) {
            p.value = Some(wrap_phase(v));
        }
        Ok(())
    }

    fn check_len(&self, values: &[T]) -> Result<()> {
        if values.len() == self.params.len() {
            Ok(())
        } else {
            Err(Error::ParameterCount {
                expected: self.params.len(),
                found: values.len(),
            })
        }
    }

    /// Index of the parameter controlling `gate`, if any.
    pub fn gate_param(&self, gate: &Gate<T>) -> Option<usize> {
        match gate {
            Gate::PhaseShift {
                phase: PhaseValue::Param(name),
                ..
            } => self.lookup.get(name).copied(),
            _ => None,
        }
    }

    /// Left-multiplies `acc` by the matrix of `gate`.
    pub fn apply_gate(&self, acc: &mut CMat<T>, gate: &Gate<T>, values: &[T]) {
        match gate {
            Gate::PhaseShift { mode, phase } => {
                let theta = match phase {
                    PhaseValue::Fixed(t) => *t,
                    PhaseValue::Param(name) => values[self.lookup[name]],
                };
                let z = cis(theta);
                for x in acc.row_mut(*mode).iter_mut() {
                    *x *= z;
                }
            }
            Gate::BeamSplitter { modes: [a, b] } => {
                let h = T::one() / T::lit(2.0).sqrt();
                let ih = Complex::new(T::zero(), h);
                let rh = Complex::new(h, T::zero());
                for c in 0..acc.ncols() {
                    let (x, y) = (acc[(*a, c)], acc[(*b, c)]);
                    acc[(*a, c)] = rh * x + ih * y;
                    acc[(*b, c)] = ih * x + rh * y;
                }
            }
            Gate::FixedUnitary { modes, matrix } => {
                for c in 0..acc.ncols() {
                    let col: Vec<Complex<T>> = modes.iter().map(|&r| acc[(r, c)]).collect();
                    for (i, &r) in modes.iter().enumerate() {
                        acc[(r, c)] = (0..modes.len())
                            .fold(Complex::new(T::zero(), T::zero()), |s, j| {
                                s + matrix[(i, j)] * col[j]
                            });
                    }
                }
            }
        }
    }

    /// Product of the gates in `range`, applied in circuit order.
    pub fn product(&self, gates: &[Gate<T>], values: &[T]) -> CMat<T> {
        let mut acc = CMat::identity(self.modes, self.modes);
        for g in gates {
            self.apply_gate(&mut acc, g, values);
        }
        acc
    }

    /// Circuit unitary at the given parameter values (in parameter order).
    pub fn to_unitary(&self, values: &[T]) -> Result<CMat<T>> {
        self.check_len(values)?;
        Ok(self.product(&self.gates, values))
    }

    /// Circuit unitary at the bound parameter values.
    pub fn to_unitary_bound(&self) -> Result<CMat<T>> {
        self.to_unitary(&self.values()?)
    }

    /// Appends every gate of `other`, shifting modes by `offset` and
    /// prefixing parameter names with `prefix`.
    pub fn append(&mut self, other: &ParamCircuit<T>, offset: usize, prefix: &str) -> Result<()> {
        if other.modes + offset > self.modes {
            return Err(Error::ModeOutOfRange {
                mode: other.modes + offset - 1,
                modes: self.modes,
            });
        }
        for g in &other.gates {
            match g {
                Gate::PhaseShift { mode, phase } => match phase {
                    PhaseValue::Fixed(t) => {
                        self.fixed_phase(mode + offset, *t)?;
                    }
                    PhaseValue::Param(name) => {
                        let value = other.params[other.lookup[name]].value;
                        self.phase(mode + offset, &format!("{prefix}{name}"), value)?;
                    }
                },
                Gate::BeamSplitter { modes: [a, b] } => {
                    self.beam_splitter(a + offset, b + offset)?;
                }
                Gate::FixedUnitary { modes, matrix } => {
                    self.gates.push(Gate::FixedUnitary {
                        modes: modes.iter().map(|m| m + offset).collect(),
                        matrix: matrix.clone(),
                    });
                }
            }
        }
        Ok(())
    }
}

/// Closed form of the cell `BS P(theta) BS P(phi)`:
/// `i e^{i theta/2} [[e^{i phi} sin(theta/2), cos(theta/2)], [e^{i phi} cos(theta/2), -sin(theta/2)]]`.
pub fn mzi_block<T: Real>(theta: T, phi: T) -> [[Complex<T>; 2]; 2] {
    let half = theta / T::lit(2.0);
    let (s, c) = (half.sin(), half.cos());
    let g = Complex::new(T::zero(), T::one()) * cis(half);
    let e = cis(phi);
    [
        [g * e * s, g * c],
        [g * e * c, -(g * s)],
    ]
}

/// One Mach-Zehnder cell of a mesh.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MziSetting<T> {
    /// Upper mode of the pair `(mode, mode + 1)`.
    pub mode: usize,
    pub theta: T,
    pub phi: T,
}

/// A circuit realizing a target unitary.
#[derive(Clone, Debug)]
pub struct MeshDecomposition<T: Real> {
    /// MZI cells in circuit order followed by constant output phases.
    pub circuit: ParamCircuit<T>,
    pub cells: Vec<MziSetting<T>>,
    pub output_phases: Vec<T>,
    /// `||to_unitary(circuit) - U||_F`.
    pub residual: T,
}

/// Upper modes of the cells in a Clements mesh, in circuit order.
pub fn clements_layout(m: usize) -> Vec<usize> {
    let (right, left): (Vec<Nulling>, Vec<Nulling>) =
        nulling_schedule(m).into_iter().partition(|n| n.from_right);
    right
        .into_iter()
        .map(|n| n.mode)
        .chain(left.into_iter().rev().map(|n| n.mode))
        .collect()
}

/// One elimination step on the pair `(mode, mode + 1)`.
#[derive(Clone, Copy, Debug)]
struct Nulling {
    /// Column operation `w T^†` when true, row operation `T w` otherwise.
    from_right: bool,
    mode: usize,
    /// Row (column operations) or column (row operations) of the nulled entry.
    line: usize,
}

/// Elimination order: alternating diagonals of column and row operations.
fn nulling_schedule(m: usize) -> Vec<Nulling> {
    let mut out = Vec::new();
    for i in 0..m.saturating_sub(1) {
        if i % 2 == 0 {
            for j in 0..=i {
                out.push(Nulling {
                    from_right: true,
                    mode: i - j,
                    line: m - 1 - j,
                });
            }
        } else {
            for j in 1..=i + 1 {
                out.push(Nulling {
                    from_right: false,
                    mode: m + j - i - 3,
                    line: j - 1,
                });
            }
        }
    }
    out
}

fn arg<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

fn modulus<T: Real>(z: Complex<T>) -> T {
    (z.re * z.re + z.im * z.im).sqrt()
}

/// `2 atan2(num, den)`, choosing the bar state when both vanish.
fn cell_angle<T: Real>(num: T, den: T) -> T {
    if num == T::zero() && den == T::zero() {
        T::pi()
    } else {
        T::lit(2.0) * num.atan2(den)
    }
}

/// Routes a unitary into a rectangular mesh of `m(m-1)/2` MZI cells plus
/// output phases, following Clements et al.: alternate column and row
/// eliminations, then commute the row cells through the diagonal.
pub fn clements_decompose<T: Real>(u: &CMat<T>) -> Result<MeshDecomposition<T>> {
    let residual = unitarity_residual(u)?;
    if residual > T::tol(tol::UNITARY_INPUT) {
        return Err(Error::NotUnitary {
            residual: residual.as_f64(),
        });
    }
    let m = u.nrows();
    if m == 0 {
        return Err(Error::TooFewModes { min: 1, found: 0 });
    }
    let schedule = nulling_schedule(m);
    let mut w = u.clone();
    let mut right = Vec::new();
    let mut left = Vec::new();

    for step in schedule {
        let k = step.mode;
        if step.from_right {
            let r = step.line;
            let (a, b) = (w[(r, k)], w[(r, k + 1)]);
            let theta = cell_angle(modulus(b), modulus(a));
            let phi = if modulus(a) == T::zero() || modulus(b) == T::zero() {
                T::zero()
            } else {
                arg(a) - arg(b) - T::pi()
            };
            let t = mzi_block(theta, phi);
            // w <- w T^†
            for row in 0..m {
                let (x, y) = (w[(row, k)], w[(row, k + 1)]);
                w[(row, k)] = x * t[0][0].conj() + y * t[0][1].conj();
                w[(row, k + 1)] = x * t[1][0].conj() + y * t[1][1].conj();
            }
            right.push(MziSetting { mode: k, theta, phi });
        } else {
            let c = step.line;
            let (a, b) = (w[(k, c)], w[(k + 1, c)]);
            let theta = cell_angle(modulus(a), modulus(b));
            let phi = if modulus(a) == T::zero() || modulus(b) == T::zero() {
                T::zero()
            } else {
                arg(b) - arg(a)
            };
            let t = mzi_block(theta, phi);
            // w <- T w
            for col in 0..m {
                let (x, y) = (w[(k, col)], w[(k + 1, col)]);
                w[(k, col)] = t[0][0] * x + t[0][1] * y;
                w[(k + 1, col)] = t[1][0] * x + t[1][1] * y;
            }
            left.push(MziSetting { mode: k, theta, phi });
        }
    }

    let mut diag: Vec<Complex<T>> = (0..m).map(|k| w[(k, k)]).collect();
    // Commute each inverse row cell through the diagonal:
    // T^{-1} D = D' T'.
    let mut commuted = Vec::with_capacity(left.len());
    for cell in left.iter().rev() {
        let k = cell.mode;
        let t = mzi_block(cell.theta, cell.phi);
        // V = T^† diag(d_k, d_{k+1})
        let (dk, dl) = (diag[k], diag[k + 1]);
        let v = [
            [t[0][0].conj() * dk, t[1][0].conj() * dl],
            [t[0][1].conj() * dk, t[1][1].conj() * dl],
        ];
        let (setting, alpha, beta) = split_cell(v, k);
        diag[k] = cis(alpha);
        diag[k + 1] = cis(beta);
        commuted.push(setting);
    }
    // Circuit order: column cells, then commuted cells innermost-first.
    let cells: Vec<MziSetting<T>> = right.into_iter().chain(commuted).collect();
    let output_phases: Vec<T> = diag.iter().map(|&d| wrap_phase(arg(d))).collect();

    let mut circuit = ParamCircuit::new(m)?;
    for (i, cell) in cells.iter().enumerate() {
        circuit.mzi(
            cell.mode,
            (&format!("theta_{i}"), Some(cell.theta)),
            (&format!("phi_{i}"), Some(cell.phi)),
        )?;
    }
    for (k, &p) in output_phases.iter().enumerate() {
        circuit.fixed_phase(k, p)?;
    }
    let cells: Vec<MziSetting<T>> = cells
        .into_iter()
        .map(|c| MziSetting {
            theta: wrap_phase(c.theta),
            phi: wrap_phase(c.phi),
            ..c
        })
        .collect();
    let rebuilt = circuit.to_unitary_bound()?;
    let residual = frobenius(&(rebuilt - u));
    Ok(MeshDecomposition {
        circuit,
        cells,
        output_phases,
        residual,
    })
}

/// Writes a 2x2 unitary `v` as `diag(e^{i alpha}, e^{i beta}) T(theta, phi)`.
fn split_cell<T: Real>(v: [[Complex<T>; 2]; 2], mode: usize) -> (MziSetting<T>, T, T) {
    let half_pi = T::frac_pi_2();
    let (m00, m01) = (modulus(v[0][0]), modulus(v[0][1]));
    let (m10, m11) = (modulus(v[1][0]), modulus(v[1][1]));
    let theta = T::lit(2.0) * m00.atan2(m01);
    let half = theta / T::lit(2.0);
    let phi = if m00 == T::zero() || m01 == T::zero() {
        T::zero()
    } else {
        arg(v[0][0]) - arg(v[0][1])
    };
    let alpha = if m01 >= m00 {
        arg(v[0][1]) - half_pi - half
    } else {
        arg(v[0][0]) - half_pi - half - phi
    };
    let beta = if m10 >= m11 {
        arg(v[1][0]) - half_pi - half - phi
    } else {
        arg(-v[1][1]) - half_pi - half
    };
    (MziSetting { mode, theta, phi }, alpha, beta)
}

/// Clements mesh with `m(m-1)` named phases `theta_i`, `phi_i`, all bound to 0.
///
/// Cell order matches [`clements_decompose`], so the settings it returns can
/// be bound by name; the mesh then reproduces any unitary up to a diagonal
/// phase screen on the outputs.
pub fn universal_interferometer<T: Real>(m: usize) -> Result<ParamCircuit<T>> {
    if m < 2 {
        return Err(Error::TooFewModes { min: 2, found: m });
    }
    let mut c = ParamCircuit::new(m)?;
    for (i, k) in clements_layout(m).into_iter().enumerate() {
        c.mzi(
            k,
            (&format!("theta_{i}"), Some(T::zero())),
            (&format!("phi_{i}"), Some(T::zero())),
        )?;
    }
    Ok(c)
}
