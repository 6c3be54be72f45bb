//! Problem model: parameters, potential fields, the fold onto `(0, π/2)`,
//! matrix averages, and spectral-parameter bookkeeping.
//!
//! # Problem definition files
//!
//! Problems are described by a JSON document:
//!
//! ```json
//! {
//!   "N": 2,
//!   "alpha": 0.5,
//!   "a": 2.0,
//!   "potential": { "type": "zero" }
//! }
//! ```
//!
//! The `potential` object takes one of four forms:
//!
//! * `{ "type": "zero" }`
//! * `{ "type": "constant", "matrix": [q11, q12, q21, q22] }` — row-major
//!   `N×N` symmetric matrix.
//! * `{ "type": "grid", "nodes": [x0, ...], "values": [[...], ...] }` —
//!   uniformly spaced sample points strictly inside `(0, π)`, symmetric under
//!   `x ↦ π−x`, with an even count of at least 6 so that `x = π/2` is never a
//!   node and each half-interval holds at least 3; one row-major matrix per
//!   node, interpolated piecewise-linearly (clamped beyond the outermost
//!   nodes).
//! * `{ "type": "builtin", "name": "...", "params": { ... } }` — analytic
//!   families: `scaled-identity` with `{ "c": real }` for `c·I`, and
//!   `sin2x-diag` with `{ "amplitudes": [c1, ..., cN] }` for
//!   `diag(c_i · sin 2x)`.
//!
//! Parse and validation errors cite the offending field path.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::ser::{Serialize, Serializer};
use serde_json::{Map as JsonMap, Value};

use crate::error::ConfigError;

/// Relative slack for grid-layout checks (uniform spacing, mirror symmetry).
const GRID_LAYOUT_TOL: f64 = 1e-9;

/// Largest supported block dimension. The propagation kernels are tuned for
/// small systems; this cap keeps accidental huge inputs from tying up the
/// dense determinant path.
pub const MAX_DIMENSION: usize = 16;

/// Full description of one spectral problem: block dimension `N`, weight
/// parameter `alpha` (the weight is `1` on `(0, π/2)` and `alpha²` on
/// `(π/2, π)`), interface jump `a` (`Y(π/2+0) = a·Y(π/2−0)`,
/// `Y'(π/2+0) = a⁻¹·Y'(π/2−0)`), and the matrix potential `Q`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemSpec {
    n: usize,
    alpha: f64,
    a: f64,
    potential: Potential,
}

impl ProblemSpec {
    /// Validates all parameters and the potential's shape against `n`.
    pub fn new(n: usize, alpha: f64, a: f64, potential: Potential) -> Result<Self, ConfigError> {
        if n == 0 {
            return Err(ConfigError::new("N", "dimension must be at least 1"));
        }
        if n > MAX_DIMENSION {
            return Err(ConfigError::new(
                "N",
                format!("dimension {n} exceeds the supported maximum {MAX_DIMENSION}"),
            ));
        }
        if !alpha.is_finite() || alpha <= 0.0 || alpha > 1.0 {
            return Err(ConfigError::new(
                "alpha",
                format!("weight parameter must lie in (0, 1], got {alpha}"),
            ));
        }
        if !a.is_finite() || a <= 0.0 {
            return Err(ConfigError::new(
                "a",
                format!("jump parameter must be positive, got {a}"),
            ));
        }
        potential.validate(n, "potential")?;
        Ok(Self { n, alpha, a, potential })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    /// Weight `ρ(x)`: `1` left of `π/2`, `alpha²` right of it.
    pub fn rho(&self, x: f64) -> f64 {
        if x < FRAC_PI_2 {
            1.0
        } else {
            self.alpha * self.alpha
        }
    }

    /// Weight value on the right half-interval, `alpha²`.
    pub fn weight_right(&self) -> f64 {
        self.alpha * self.alpha
    }

    /// `alpha = 1` reproduces the unweighted Neumann problem and is admitted
    /// purely as a cross-check configuration; outputs flag it.
    pub fn is_classical_limit(&self) -> bool {
        self.alpha == 1.0
    }

    /// Upper bound on `sup_x ‖Q(x)‖₂` over `(0, π)`, used to bracket how far
    /// below zero eigenvalues can sit.
    pub fn sup_potential_norm(&self) -> f64 {
        self.potential.sup_norm_bound(self.n)
    }

    /// Folds the potential onto `(0, π/2)`: see [`reflect_potential`].
    pub fn half_potentials(&self) -> HalfPotentials {
        reflect_potential(self)
    }

    /// Parses and validates a problem definition document.
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let value: Value = serde_json::from_str(text)
            .map_err(|e| ConfigError::new(".", format!("not valid JSON: {e}")))?;
        Self::from_json_value(&value)
    }

    /// Validates an already-parsed JSON value as a problem definition.
    pub fn from_json_value(value: &Value) -> Result<Self, ConfigError> {
        let obj = expect_object(value, ".")?;
        expect_keys(obj, "", &["N", "alpha", "a", "potential"])?;
        let n = expect_dimension(obj)?;
        let alpha = expect_f64(obj, "", "alpha")?;
        let a = expect_f64(obj, "", "a")?;
        let potential_value = obj
            .get("potential")
            .ok_or_else(|| ConfigError::new("potential", "missing required field"))?;
        let potential = Potential::from_json_value(potential_value, n)?;
        Self::new(n, alpha, a, potential)
    }

    pub fn to_json_value(&self) -> Value {
        serde_json::to_value(self).expect("problem serialization cannot fail")
    }

    pub fn to_json_string_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("serialization cannot fail")
    }
}

impl Serialize for ProblemSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(4))?;
        map.serialize_entry("N", &self.n)?;
        map.serialize_entry("alpha", &self.alpha)?;
        map.serialize_entry("a", &self.a)?;
        map.serialize_entry("potential", &self.potential.to_json_value(self.n))?;
        map.end()
    }
}

/// Matrix potential `Q(x)` on `(0, π)`: real, symmetric at every point.
#[derive(Clone, Debug, PartialEq)]
pub enum Potential {
    /// `Q ≡ 0`.
    Zero,
    /// `Q(x) = C` for a fixed symmetric matrix `C`.
    Constant(DMatrix<f64>),
    /// Piecewise-linear interpolation of uniformly spaced samples.
    Grid(GridPotential),
    /// Analytic one-parameter families.
    Builtin(BuiltinPotential),
}

#[derive(Clone, Debug, PartialEq)]
pub enum BuiltinPotential {
    /// `Q(x) = c·I`.
    ScaledIdentity { c: f64 },
    /// `Q(x) = diag(c_1, ..., c_N) · sin(2x)`.
    Sin2xDiag { amplitudes: Vec<f64> },
}

impl Potential {
    pub fn constant(matrix: DMatrix<f64>) -> Self {
        Potential::Constant(matrix)
    }

    pub fn scaled_identity(c: f64) -> Self {
        Potential::Builtin(BuiltinPotential::ScaledIdentity { c })
    }

    pub fn sin2x_diag(amplitudes: Vec<f64>) -> Self {
        Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes })
    }

    /// Samples `f` on the standard cell-centered layout `x_k = (k+½)·π/m`,
    /// which satisfies every grid-layout rule for even `m ≥ 6`.
    pub fn sample_uniform(m: usize, mut f: impl FnMut(f64) -> DMatrix<f64>) -> Self {
        let nodes: Vec<f64> = (0..m).map(|k| (k as f64 + 0.5) * PI / m as f64).collect();
        let values = nodes.iter().map(|&x| f(x)).collect();
        Potential::Grid(GridPotential { nodes, values })
    }

    /// Writes `Q(x)` into `out` (row-major, length `n²`).
    pub fn eval_into(&self, n: usize, x: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), n * n);
        match self {
            Potential::Zero => out.fill(0.0),
            Potential::Constant(m) => {
                for i in 0..n {
                    for j in 0..n {
                        out[i * n + j] = m[(i, j)];
                    }
                }
            }
            Potential::Grid(g) => g.eval_into(x, out),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => {
                out.fill(0.0);
                for i in 0..n {
                    out[i * n + i] = *c;
                }
            }
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => {
                out.fill(0.0);
                let s = (2.0 * x).sin();
                for (i, &amp) in amplitudes.iter().enumerate() {
                    out[i * n + i] = amp * s;
                }
            }
        }
    }

    pub fn eval(&self, n: usize, x: f64) -> DMatrix<f64> {
        let mut out = vec![0.0; n * n];
        self.eval_into(n, x, &mut out);
        DMatrix::from_row_slice(n, n, &out)
    }

    /// The reflected field `x ↦ Q(π−x)`, as a representation of the same
    /// kind: analytic families reflect in closed form, grids by reversing the
    /// sample order (exact, since the node layout is mirror-symmetric).
    pub fn reflected(&self) -> Potential {
        match self {
            Potential::Zero => Potential::Zero,
            Potential::Constant(m) => Potential::Constant(m.clone()),
            Potential::Grid(g) => Potential::Grid(GridPotential {
                nodes: g.nodes.clone(),
                values: g.values.iter().rev().cloned().collect(),
            }),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => {
                Potential::Builtin(BuiltinPotential::ScaledIdentity { c: *c })
            }
            // sin(2(π−x)) = −sin(2x)
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => {
                Potential::Builtin(BuiltinPotential::Sin2xDiag {
                    amplitudes: amplitudes.iter().map(|&c| -c).collect(),
                })
            }
        }
    }

    /// Abscissae in the open interval `(0, π/2)` where the field may lose
    /// smoothness; quadrature panels are aligned to these.
    pub fn breakpoints_in_half(&self) -> Vec<f64> {
        match self {
            Potential::Grid(g) => g
                .nodes
                .iter()
                .copied()
                .filter(|&t| t > 0.0 && t < FRAC_PI_2)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Upper bound on `sup_x ‖Q(x)‖₂` (via the row-sum norm, which dominates
    /// the spectral norm for symmetric matrices).
    pub fn sup_norm_bound(&self, n: usize) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Constant(m) => row_sum_norm(m),
            Potential::Grid(g) => g
                .values
                .iter()
                .map(row_sum_norm)
                .fold(0.0, f64::max),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => c.abs(),
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => {
                let _ = n;
                amplitudes.iter().map(|c| c.abs()).fold(0.0, f64::max)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Potential::Zero => true,
            Potential::Constant(m) => m.iter().all(|&v| v == 0.0),
            Potential::Grid(g) => g.values.iter().all(|m| m.iter().all(|&v| v == 0.0)),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => *c == 0.0,
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => {
                amplitudes.iter().all(|&c| c == 0.0)
            }
        }
    }

    fn validate(&self, n: usize, path: &str) -> Result<(), ConfigError> {
        match self {
            Potential::Zero => Ok(()),
            Potential::Constant(m) => validate_matrix(m, n, &format!("{path}.matrix")),
            Potential::Grid(g) => g.validate(n, path),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => {
                if !c.is_finite() {
                    return Err(ConfigError::new(
                        format!("{path}.params.c"),
                        "value must be finite",
                    ));
                }
                Ok(())
            }
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => {
                let p = format!("{path}.params.amplitudes");
                if amplitudes.len() != n {
                    return Err(ConfigError::new(
                        p,
                        format!("expected N = {n} entries, got {}", amplitudes.len()),
                    ));
                }
                if let Some(i) = amplitudes.iter().position(|c| !c.is_finite()) {
                    return Err(ConfigError::new(
                        format!("{p}[{i}]"),
                        "value must be finite",
                    ));
                }
                Ok(())
            }
        }
    }

    fn from_json_value(value: &Value, n: usize) -> Result<Self, ConfigError> {
        let obj = expect_object(value, "potential")?;
        let ty = obj
            .get("type")
            .ok_or_else(|| ConfigError::new("potential.type", "missing required field"))?;
        let ty = ty.as_str().ok_or_else(|| {
            ConfigError::new("potential.type", "expected a string")
        })?;
        match ty {
            "zero" => {
                expect_keys(obj, "potential", &["type"])?;
                Ok(Potential::Zero)
            }
            "constant" => {
                expect_keys(obj, "potential", &["type", "matrix"])?;
                let raw = expect_f64_array(obj, "potential", "matrix")?;
                if raw.len() != n * n {
                    return Err(ConfigError::new(
                        "potential.matrix",
                        format!("expected N² = {} entries (row-major), got {}", n * n, raw.len()),
                    ));
                }
                Ok(Potential::Constant(DMatrix::from_row_slice(n, n, &raw)))
            }
            "grid" => {
                expect_keys(obj, "potential", &["type", "nodes", "values"])?;
                let nodes = expect_f64_array(obj, "potential", "nodes")?;
                let rows = obj
                    .get("values")
                    .ok_or_else(|| ConfigError::new("potential.values", "missing required field"))?
                    .as_array()
                    .ok_or_else(|| ConfigError::new("potential.values", "expected an array"))?;
                let mut values = Vec::with_capacity(rows.len());
                for (k, row) in rows.iter().enumerate() {
                    let path = format!("potential.values[{k}]");
                    let flat = value_as_f64_array(row, &path)?;
                    if flat.len() != n * n {
                        return Err(ConfigError::new(
                            path,
                            format!("expected N² = {} entries (row-major), got {}", n * n, flat.len()),
                        ));
                    }
                    values.push(DMatrix::from_row_slice(n, n, &flat));
                }
                Ok(Potential::Grid(GridPotential { nodes, values }))
            }
            "builtin" => {
                expect_keys(obj, "potential", &["type", "name", "params"])?;
                let name = obj
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| ConfigError::new("potential.name", "expected a string"))?;
                let empty = JsonMap::new();
                let params = match obj.get("params") {
                    None => &empty,
                    Some(v) => expect_object(v, "potential.params")?,
                };
                match name {
                    "scaled-identity" => {
                        expect_keys(params, "potential.params", &["c"])?;
                        let c = expect_f64(params, "potential.params", "c")?;
                        Ok(Potential::scaled_identity(c))
                    }
                    "sin2x-diag" => {
                        expect_keys(params, "potential.params", &["amplitudes"])?;
                        let amplitudes =
                            expect_f64_array(params, "potential.params", "amplitudes")?;
                        Ok(Potential::sin2x_diag(amplitudes))
                    }
                    other => Err(ConfigError::new(
                        "potential.name",
                        format!(
                            "unknown builtin `{other}`; available: scaled-identity, sin2x-diag"
                        ),
                    )),
                }
            }
            other => Err(ConfigError::new(
                "potential.type",
                format!("unknown variant `{other}`; expected zero | constant | grid | builtin"),
            )),
        }
    }

    fn to_json_value(&self, n: usize) -> Value {
        match self {
            Potential::Zero => serde_json::json!({ "type": "zero" }),
            Potential::Constant(m) => serde_json::json!({
                "type": "constant",
                "matrix": row_major(m, n),
            }),
            Potential::Grid(g) => serde_json::json!({
                "type": "grid",
                "nodes": g.nodes,
                "values": g.values.iter().map(|m| row_major(m, n)).collect::<Vec<_>>(),
            }),
            Potential::Builtin(BuiltinPotential::ScaledIdentity { c }) => serde_json::json!({
                "type": "builtin",
                "name": "scaled-identity",
                "params": { "c": c },
            }),
            Potential::Builtin(BuiltinPotential::Sin2xDiag { amplitudes }) => serde_json::json!({
                "type": "builtin",
                "name": "sin2x-diag",
                "params": { "amplitudes": amplitudes },
            }),
        }
    }
}

fn row_major(m: &DMatrix<f64>, n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(m[(i, j)]);
        }
    }
    out
}

fn row_sum_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn validate_matrix(m: &DMatrix<f64>, n: usize, path: &str) -> Result<(), ConfigError> {
    if m.nrows() != n || m.ncols() != n {
        return Err(ConfigError::new(
            path,
            format!("expected an {n}×{n} matrix, got {}×{}", m.nrows(), m.ncols()),
        ));
    }
    for i in 0..n {
        for j in 0..n {
            let v = m[(i, j)];
            if !v.is_finite() {
                return Err(ConfigError::new(
                    path,
                    format!("entry ({i}, {j}) is not finite"),
                ));
            }
            if j > i && v != m[(j, i)] {
                return Err(ConfigError::new(
                    path,
                    format!(
                        "matrix must be symmetric: entries ({i}, {j}) = {v} and ({j}, {i}) = {} differ",
                        m[(j, i)]
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Uniform mirror-symmetric samples on `(0, π)` with piecewise-linear
/// interpolation and clamped extrapolation past the outermost nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GridPotential {
    nodes: Vec<f64>,
    values: Vec<DMatrix<f64>>,
}

impl GridPotential {
    pub fn new(nodes: Vec<f64>, values: Vec<DMatrix<f64>>) -> Self {
        Self { nodes, values }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn values(&self) -> &[DMatrix<f64>] {
        &self.values
    }

    fn eval_into(&self, x: f64, out: &mut [f64]) {
        let m = self.nodes.len();
        if x <= self.nodes[0] {
            out.copy_from_slice(self.values[0].as_slice());
            return;
        }
        if x >= self.nodes[m - 1] {
            out.copy_from_slice(self.values[m - 1].as_slice());
            return;
        }
        let k = self.nodes.partition_point(|&t| t <= x) - 1;
        let t = (x - self.nodes[k]) / (self.nodes[k + 1] - self.nodes[k]);
        let a = self.values[k].as_slice();
        let b = self.values[k + 1].as_slice();
        // Entrywise lerp; storage order is immaterial because every sample is
        // symmetric, and identical arithmetic per mirrored entry keeps the
        // result symmetric to the last bit.
        for ((o, &av), &bv) in out.iter_mut().zip(a).zip(b) {
            *o = av + t * (bv - av);
        }
    }

    fn validate(&self, n: usize, path: &str) -> Result<(), ConfigError> {
        let nodes_path = format!("{path}.nodes");
        let m = self.nodes.len();
        if m < 6 {
            return Err(ConfigError::new(
                nodes_path,
                format!("at least 6 nodes required (3 per half-interval), got {m}"),
            ));
        }
        if !m.is_multiple_of(2) {
            return Err(ConfigError::new(
                nodes_path,
                format!("node count must be even so that x = π/2 is never a sample point, got {m}"),
            ));
        }
        if let Some(i) = self.nodes.iter().position(|t| !t.is_finite()) {
            return Err(ConfigError::new(
                format!("{nodes_path}[{i}]"),
                "value must be finite",
            ));
        }
        if self.nodes[0] <= 0.0 || self.nodes[m - 1] >= PI {
            return Err(ConfigError::new(
                nodes_path,
                "nodes must lie strictly inside (0, π)",
            ));
        }
        for i in 0..m - 1 {
            if self.nodes[i + 1] <= self.nodes[i] {
                return Err(ConfigError::new(
                    nodes_path,
                    format!(
                        "nodes must be strictly increasing (nodes[{i}] = {}, nodes[{}] = {})",
                        self.nodes[i],
                        i + 1,
                        self.nodes[i + 1]
                    ),
                ));
            }
        }
        let h = (self.nodes[m - 1] - self.nodes[0]) / (m - 1) as f64;
        for i in 0..m - 1 {
            let d = self.nodes[i + 1] - self.nodes[i];
            if (d - h).abs() > GRID_LAYOUT_TOL * PI {
                return Err(ConfigError::new(
                    nodes_path,
                    format!("nodes must be uniformly spaced (spacing {d} at index {i}, expected {h})"),
                ));
            }
        }
        for i in 0..m / 2 {
            let sum = self.nodes[i] + self.nodes[m - 1 - i];
            if (sum - PI).abs() > GRID_LAYOUT_TOL * PI {
                return Err(ConfigError::new(
                    nodes_path,
                    format!(
                        "node layout must be symmetric under x ↦ π−x (nodes[{i}] + nodes[{}] = {sum}, expected π)",
                        m - 1 - i
                    ),
                ));
            }
        }
        if self.values.len() != m {
            return Err(ConfigError::new(
                format!("{path}.values"),
                format!("expected one matrix per node ({m}), got {}", self.values.len()),
            ));
        }
        for (k, v) in self.values.iter().enumerate() {
            validate_matrix(v, n, &format!("{path}.values[{k}]"))?;
        }
        Ok(())
    }
}

/// Which side of the interface `x = π/2` a folded quantity came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Half {
    /// `(0, π/2)`: weight 1, potential `Q₁(x) = Q(x)`.
    Left,
    /// `(π/2, π)` folded back: weight `alpha²`, potential `Q₂(x) = Q(π−x)`.
    Right,
}

/// The potential folded onto `(0, π/2)`: direct restriction `Q₁`, reflected
/// restriction `Q₂(x) = Q(π−x)`, and their matrix averages
/// `[Q_j] = ½∫₀^{π/2} Q_j(x) dx`.
#[derive(Clone, Debug)]
pub struct HalfPotentials {
    n: usize,
    q1: Potential,
    q2: Potential,
    avg_q1: MatrixAverage,
    avg_q2: MatrixAverage,
}

/// Folds `spec`'s potential onto `(0, π/2)` and precomputes both matrix
/// averages. Reflection is in closed form for analytic representations and an
/// exact sample-order reversal for grids.
pub fn reflect_potential(spec: &ProblemSpec) -> HalfPotentials {
    let n = spec.n();
    let q1 = spec.potential().clone();
    let q2 = spec.potential().reflected();
    let avg_q1 = matrix_average(n, &q1);
    let avg_q2 = matrix_average(n, &q2);
    HalfPotentials { n, q1, q2, avg_q1, avg_q2 }
}

impl HalfPotentials {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Evaluation accessor for one folded half (both live on `(0, π/2)`).
    pub fn q(&self, half: Half) -> &Potential {
        match half {
            Half::Left => &self.q1,
            Half::Right => &self.q2,
        }
    }

    pub fn q1(&self) -> &Potential {
        &self.q1
    }

    pub fn q2(&self) -> &Potential {
        &self.q2
    }

    pub fn avg(&self, half: Half) -> &MatrixAverage {
        match half {
            Half::Left => &self.avg_q1,
            Half::Right => &self.avg_q2,
        }
    }

    pub fn avg_q1(&self) -> &MatrixAverage {
        &self.avg_q1
    }

    pub fn avg_q2(&self) -> &MatrixAverage {
        &self.avg_q2
    }

    pub fn eval_into(&self, half: Half, x: f64, out: &mut [f64]) {
        self.q(half).eval_into(self.n, x, out);
    }
}

/// A matrix average `½∫₀^{π/2} Q_j(x) dx` together with quadrature metadata.
#[derive(Clone, Debug)]
pub struct MatrixAverage {
    pub matrix: DMatrix<f64>,
    /// Quadrature rule identifier.
    pub rule: &'static str,
    /// Panel count of the fine pass.
    pub panels: usize,
    /// `‖fine − coarse‖ / 15` relative to the extrapolated value.
    pub est_rel_err: f64,
}

/// Computes `½∫₀^{π/2} q(x) dx` by composite Simpson panels aligned to the
/// representation's breakpoints, with one Richardson refinement.
pub fn matrix_average(n: usize, q: &Potential) -> MatrixAverage {
    let mut cuts = vec![0.0];
    cuts.extend(q.breakpoints_in_half());
    cuts.push(FRAC_PI_2);
    cuts.dedup_by(|b, a| (*b - *a).abs() < 1e-14);

    const BASE_PANELS: usize = 256;
    let mut coarse = vec![0.0; n * n];
    let mut fine = vec![0.0; n * n];
    let mut total_panels = 0usize;
    for w in cuts.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        let frac = (x1 - x0) / FRAC_PI_2;
        let panels = ((BASE_PANELS as f64 * frac).ceil() as usize).max(2);
        simpson_into(n, q, x0, x1, panels, &mut coarse);
        simpson_into(n, q, x0, x1, 2 * panels, &mut fine);
        total_panels += 2 * panels;
    }

    // Richardson step for the O(h⁴) Simpson error: R = (16·fine − coarse)/15.
    let mut extrap = vec![0.0; n * n];
    let mut diff_norm = 0.0f64;
    let mut extrap_norm = 0.0f64;
    for k in 0..n * n {
        extrap[k] = (16.0 * fine[k] - coarse[k]) / 15.0;
        diff_norm = diff_norm.max((fine[k] - coarse[k]).abs() / 15.0);
        extrap_norm = extrap_norm.max(extrap[k].abs());
    }
    let est_rel_err = if extrap_norm > 0.0 { diff_norm / extrap_norm } else { 0.0 };

    for v in &mut extrap {
        *v *= 0.5;
    }
    MatrixAverage {
        matrix: DMatrix::from_row_slice(n, n, &extrap),
        rule: "composite-simpson+richardson",
        panels: total_panels,
        est_rel_err,
    }
}

/// Accumulates `∫ₓ₀^ₓ₁ q` into `acc` with `panels` Simpson panels.
fn simpson_into(n: usize, q: &Potential, x0: f64, x1: f64, panels: usize, acc: &mut [f64]) {
    let h = (x1 - x0) / panels as f64;
    let mut fa = vec![0.0; n * n];
    let mut fm = vec![0.0; n * n];
    let mut fb = vec![0.0; n * n];
    for p in 0..panels {
        let a = x0 + p as f64 * h;
        q.eval_into(n, a, &mut fa);
        q.eval_into(n, a + 0.5 * h, &mut fm);
        q.eval_into(n, a + h, &mut fb);
        let w = h / 6.0;
        for k in 0..n * n {
            acc[k] += w * (fa[k] + 4.0 * fm[k] + fb[k]);
        }
    }
}

/// Bookkeeping for the spectral parameter: `λ`, its principal square root
/// `s = √λ` (so `Re s ≥ 0`, and `s = iκ` with `κ > 0` on the negative real
/// axis), and `τ = |Im s|`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralParameter {
    pub lambda: Complex64,
    pub s: Complex64,
}

impl SpectralParameter {
    pub fn from_lambda(lambda: Complex64) -> Self {
        Self { lambda, s: lambda.sqrt() }
    }

    /// Real-axis constructor that keeps both rays exact: `s = √λ` for
    /// `λ ≥ 0`, `s = i·√(−λ)` for `λ < 0`.
    pub fn from_lambda_real(lambda: f64) -> Self {
        let s = if lambda >= 0.0 {
            Complex64::new(lambda.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-lambda).sqrt())
        };
        Self { lambda: Complex64::new(lambda, 0.0), s }
    }

    pub fn from_s(s: Complex64) -> Self {
        Self { lambda: s * s, s }
    }

    pub fn from_s_real(s: f64) -> Self {
        Self { lambda: Complex64::new(s * s, 0.0), s: Complex64::new(s, 0.0) }
    }

    /// `τ = |Im √λ|`, the exponential growth rate of the frames.
    pub fn tau(&self) -> f64 {
        self.s.im.abs()
    }

    /// `κ` with `λ = −κ²` when `λ` lies on the negative real axis.
    pub fn kappa(&self) -> Option<f64> {
        (self.lambda.im == 0.0 && self.lambda.re < 0.0).then(|| (-self.lambda.re).sqrt())
    }

    pub fn is_real(&self) -> bool {
        self.lambda.im == 0.0
    }
}

fn expect_object<'v>(value: &'v Value, path: &str) -> Result<&'v JsonMap<String, Value>, ConfigError> {
    value
        .as_object()
        .ok_or_else(|| ConfigError::new(path, "expected a JSON object"))
}

fn expect_keys(
    obj: &JsonMap<String, Value>,
    prefix: &str,
    allowed: &[&str],
) -> Result<(), ConfigError> {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
            return Err(ConfigError::new(
                path,
                format!("unknown field (expected one of: {})", allowed.join(", ")),
            ));
        }
    }
    Ok(())
}

fn join_path(prefix: &str, key: &str) -> String {
    if prefix.is_empty() {
        key.to_string()
    } else {
        format!("{prefix}.{key}")
    }
}

fn expect_dimension(obj: &JsonMap<String, Value>) -> Result<usize, ConfigError> {
    let v = obj
        .get("N")
        .ok_or_else(|| ConfigError::new("N", "missing required field"))?;
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| ConfigError::new("N", "expected a positive integer"))
}

fn expect_f64(obj: &JsonMap<String, Value>, prefix: &str, key: &str) -> Result<f64, ConfigError> {
    let path = join_path(prefix, key);
    let v = obj
        .get(key)
        .ok_or_else(|| ConfigError::new(path.clone(), "missing required field"))?;
    v.as_f64().ok_or_else(|| ConfigError::new(path, "expected a number"))
}

fn expect_f64_array(
    obj: &JsonMap<String, Value>,
    prefix: &str,
    key: &str,
) -> Result<Vec<f64>, ConfigError> {
    let path = join_path(prefix, key);
    let v = obj
        .get(key)
        .ok_or_else(|| ConfigError::new(path.clone(), "missing required field"))?;
    value_as_f64_array(v, &path)
}

fn value_as_f64_array(v: &Value, path: &str) -> Result<Vec<f64>, ConfigError> {
    let arr = v
        .as_array()
        .ok_or_else(|| ConfigError::new(path, "expected an array of numbers"))?;
    arr.iter()
        .enumerate()
        .map(|(i, x)| {
            x.as_f64()
                .ok_or_else(|| ConfigError::new(format!("{path}[{i}]"), "expected a number"))
        })
        .collect()
}
