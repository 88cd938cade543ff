// Copyright 2026 The ionpulse Authors
// SPDX-License-Identifier: Apache-2.0

//! Gate specifications, target unitaries and the plugin registry.
//!
//! The three built-in primitives are spin-conditioned phase-space operations
//! on one qubit and one motional mode:
//!
//! * `CD(α)  = |+⟩⟨+| ⊗ D(α)  + |−⟩⟨−| ⊗ D(−α)`
//! * `CR(θ)  = |0⟩⟨0| ⊗ e^{−iθn} + |1⟩⟨1| ⊗ e^{+iθn}`
//! * `CS(ζ)  = |+⟩⟨+| ⊗ S(ζ)  + |−⟩⟨−| ⊗ S(−ζ)`
//!
//! New primitives plug in through [`GatePlugin`]; the codebook, assembler and
//! exporters only ever talk to plugins through the [`GateRegistry`].

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::codebook::{request_hash, ModelSpec};
use crate::device::DeviceSpec;
use crate::linalg::{annihilation, expm, kron, number, sigma_x, ComplexMatrix, FockSpace, LinalgError};
use crate::synth::{self, ControlProblem, GrapeOutcome, Waveforms};
use crate::Error;

pub const CD: &str = "CD";
pub const CR: &str = "CR";
pub const CS: &str = "CS";

/// CR angles are stored in `[0, 4π)`.
pub const CR_PERIOD: f64 = 2.0 * TAU;

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
pub enum GateError {
    #[error("non-finite value for parameter '{0}'")]
    NonFinite(String),
    #[error("gate {gate} is missing parameter '{param}'")]
    MissingParam { gate: String, param: String },
    #[error("gate {gate} does not take parameter '{param}'")]
    UnknownParam { gate: String, param: String },
    #[error("parameter '{param}' of {gate} must be {expected}")]
    WrongKind { gate: String, param: String, expected: &'static str },
    #[error("unknown gate type '{gate}' (registered: {registered})")]
    UnknownGate { gate: String, registered: String },
    #[error("gate type '{0}' is already registered")]
    Duplicate(String),
}

/// A gate parameter. Complex values are always an ordered (real, imaginary)
/// pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Real(f64),
    Complex([f64; 2]),
}

impl ParamValue {
    pub fn complex(z: Complex64) -> Self {
        ParamValue::Complex([z.re, z.im])
    }

    pub fn is_finite(&self) -> bool {
        match self {
            ParamValue::Real(x) => x.is_finite(),
            ParamValue::Complex([re, im]) => re.is_finite() && im.is_finite(),
        }
    }
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Real(x) => write!(f, "{x}"),
            ParamValue::Complex([re, im]) => write!(f, "{re}{im:+}j"),
        }
    }
}

pub type ParamMap = BTreeMap<String, ParamValue>;

/// What to synthesize: a gate type, its continuous parameters and the
/// (qubit, qumode) pair it acts on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSpec {
    #[serde(rename = "type")]
    pub gate_type: String,
    pub params: ParamMap,
    #[serde(default)]
    pub qubit: usize,
    #[serde(default)]
    pub qumode: usize,
}

impl GateSpec {
    pub fn new(gate_type: impl Into<String>, params: ParamMap) -> Self {
        Self { gate_type: gate_type.into(), params, qubit: 0, qumode: 0 }
    }

    pub fn on(mut self, qubit: usize, qumode: usize) -> Self {
        self.qubit = qubit;
        self.qumode = qumode;
        self
    }

    /// Controlled displacement, already normalized.
    pub fn cd(alpha: Complex64) -> Result<Self, GateError> {
        let raw = Self::new(CD, [("alpha".to_string(), ParamValue::complex(alpha))].into());
        Ok(Self { params: CdPlugin.validate_and_normalize(&raw.params)?, ..raw })
    }

    pub fn cr(theta: f64) -> Result<Self, GateError> {
        let raw = Self::new(CR, [("theta".to_string(), ParamValue::Real(theta))].into());
        Ok(Self { params: CrPlugin.validate_and_normalize(&raw.params)?, ..raw })
    }

    pub fn cs(zeta: Complex64) -> Result<Self, GateError> {
        let raw = Self::new(CS, [("zeta".to_string(), ParamValue::complex(zeta))].into());
        Ok(Self { params: CsPlugin.validate_and_normalize(&raw.params)?, ..raw })
    }

    pub fn real(&self, name: &str) -> Result<f64, GateError> {
        match self.params.get(name) {
            Some(ParamValue::Real(x)) => Ok(*x),
            Some(_) => Err(GateError::WrongKind { gate: self.gate_type.clone(), param: name.into(), expected: "real" }),
            None => Err(GateError::MissingParam { gate: self.gate_type.clone(), param: name.into() }),
        }
    }

    pub fn complex(&self, name: &str) -> Result<Complex64, GateError> {
        match self.params.get(name) {
            Some(ParamValue::Complex([re, im])) => Ok(Complex64::new(*re, *im)),
            Some(ParamValue::Real(x)) => Ok(Complex64::new(*x, 0.0)),
            None => Err(GateError::MissingParam { gate: self.gate_type.clone(), param: name.into() }),
        }
    }

    pub fn label(&self) -> String {
        let params: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
        format!("{}({})", self.gate_type, params.join(", "))
    }
}

/// Folds negative zero into positive zero so physically identical values
/// canonicalize identically.
pub fn clean_zero(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

fn only_param(gate: &str, params: &ParamMap, name: &str) -> Result<ParamValue, GateError> {
    if let Some(extra) = params.keys().find(|k| k.as_str() != name) {
        return Err(GateError::UnknownParam { gate: gate.into(), param: extra.clone() });
    }
    let value =
        params.get(name).copied().ok_or_else(|| GateError::MissingParam { gate: gate.into(), param: name.into() })?;
    if !value.is_finite() {
        return Err(GateError::NonFinite(name.into()));
    }
    Ok(value)
}

fn normalized_complex(gate: &str, params: &ParamMap, name: &str) -> Result<ParamMap, GateError> {
    let [re, im] = match only_param(gate, params, name)? {
        ParamValue::Complex(pair) => pair,
        ParamValue::Real(x) => [x, 0.0],
    };
    Ok([(name.to_string(), ParamValue::Complex([clean_zero(re), clean_zero(im)]))].into())
}

/// Maps θ into `[0, 4π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(CR_PERIOD);
    // rem_euclid can round up to the period itself
    clean_zero(if r >= CR_PERIOD { 0.0 } else { r })
}

fn joint_generator(space: FockSpace, qubit_op: &ComplexMatrix, osc_op: &ComplexMatrix) -> ComplexMatrix {
    debug_assert_eq!(osc_op.nrows(), space.dim());
    kron(qubit_op, osc_op)
}

/// `exp[σ_x ⊗ (α a† − α* a)]`.
pub fn target_unitary_cd(alpha: Complex64, space: FockSpace) -> Result<ComplexMatrix, LinalgError> {
    if !(alpha.re.is_finite() && alpha.im.is_finite()) {
        return Err(LinalgError::NonFinite("CD amplitude"));
    }
    let a = annihilation(space);
    let osc = a.adjoint() * alpha - &a * alpha.conj();
    expm(&joint_generator(space, &sigma_x(), &osc))
}

/// `diag(e^{−iθn}, e^{+iθn})`, built entry by entry.
pub fn target_unitary_cr(theta: f64, space: FockSpace) -> Result<ComplexMatrix, LinalgError> {
    if !theta.is_finite() {
        return Err(LinalgError::NonFinite("CR angle"));
    }
    let d = space.dim();
    let mut u = ComplexMatrix::zeros(2 * d, 2 * d);
    for n in 0..d {
        let phase = theta * n as f64;
        u[(n, n)] = Complex64::from_polar(1.0, -phase);
        u[(d + n, d + n)] = Complex64::from_polar(1.0, phase);
    }
    Ok(u)
}

/// `exp[½ σ_x ⊗ (ζ* a² − ζ a†²)]`.
pub fn target_unitary_cs(zeta: Complex64, space: FockSpace) -> Result<ComplexMatrix, LinalgError> {
    if !(zeta.re.is_finite() && zeta.im.is_finite()) {
        return Err(LinalgError::NonFinite("CS squeezing"));
    }
    let a = annihilation(space);
    let a2 = &a * &a;
    let osc = (&a2 * zeta.conj() - a2.adjoint() * zeta).scale(0.5);
    expm(&joint_generator(space, &sigma_x(), &osc))
}

/// A gate primitive.
///
/// Implementors describe how parameters are validated, which Hamiltonian
/// realizes the gate and how its target unitary looks. Caching, assembly and
/// export come for free once the plugin is registered.
pub trait GatePlugin: Send + Sync {
    fn gate_type(&self) -> &str;

    /// Checks parameters and returns their canonical form. Must be
    /// idempotent.
    fn validate_and_normalize(&self, params: &ParamMap) -> Result<ParamMap, GateError>;

    /// Library key for a normalized gate.
    fn pulse_lookup_key(&self, gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<String, Error> {
        Ok(request_hash(gate, device, model)?)
    }

    fn build_hamiltonian(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<ControlProblem, Error>;

    /// Starting waveform for the optimizer, when one is known in closed form.
    fn initial_guess(&self, _problem: &ControlProblem, _gate: &GateSpec) -> Option<Waveforms> {
        None
    }

    fn synthesize(&self, gate: &GateSpec, device: &DeviceSpec, model: &ModelSpec) -> Result<GrapeOutcome, Error> {
        let problem = self.build_hamiltonian(gate, device, model)?;
        let guess = self.initial_guess(&problem, gate);
        Ok(synth::grape_optimize(&problem, model.seed, guess.as_ref())?)
    }

    fn default_duration_us(&self) -> f64;

    fn default_fid_tol(&self) -> f64 {
        1e-3
    }
}

pub struct CdPlugin;
pub struct CrPlugin;
pub struct CsPlugin;

impl GatePlugin for CdPlugin {
    fn gate_type(&self) -> &str {
        CD
    }

    fn validate_and_normalize(&self, params: &ParamMap) -> Result<ParamMap, GateError> {
        normalized_complex(CD, params, "alpha")
    }

    fn build_hamiltonian(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<ControlProblem, Error> {
        synth::build_hamiltonian_cd(gate, device, model)
    }

    fn initial_guess(&self, problem: &ControlProblem, gate: &GateSpec) -> Option<Waveforms> {
        synth::hamiltonian::cd_initial_guess(problem, gate.complex("alpha").ok()?)
    }

    fn default_duration_us(&self) -> f64 {
        100.0
    }
}

impl GatePlugin for CrPlugin {
    fn gate_type(&self) -> &str {
        CR
    }

    fn validate_and_normalize(&self, params: &ParamMap) -> Result<ParamMap, GateError> {
        match only_param(CR, params, "theta")? {
            ParamValue::Real(theta) => Ok([("theta".to_string(), ParamValue::Real(canonical_angle(theta)))].into()),
            ParamValue::Complex(_) => {
                Err(GateError::WrongKind { gate: CR.into(), param: "theta".into(), expected: "real" })
            }
        }
    }

    fn build_hamiltonian(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<ControlProblem, Error> {
        synth::build_hamiltonian_cr(gate, device, model)
    }

    fn initial_guess(&self, problem: &ControlProblem, gate: &GateSpec) -> Option<Waveforms> {
        // e^{−iθn} only depends on θ mod 2π; take the shortest rotation
        let theta = gate.real("theta").ok()?;
        let wrapped = (theta + PI).rem_euclid(TAU) - PI;
        synth::hamiltonian::cr_initial_guess(problem, wrapped)
    }

    fn default_duration_us(&self) -> f64 {
        300.0
    }
}

impl GatePlugin for CsPlugin {
    fn gate_type(&self) -> &str {
        CS
    }

    fn validate_and_normalize(&self, params: &ParamMap) -> Result<ParamMap, GateError> {
        normalized_complex(CS, params, "zeta")
    }

    fn build_hamiltonian(
        &self,
        gate: &GateSpec,
        device: &DeviceSpec,
        model: &ModelSpec,
    ) -> Result<ControlProblem, Error> {
        synth::build_hamiltonian_cs(gate, device, model)
    }

    fn initial_guess(&self, problem: &ControlProblem, gate: &GateSpec) -> Option<Waveforms> {
        synth::hamiltonian::cs_initial_guess(problem, gate.complex("zeta").ok()?)
    }

    fn default_duration_us(&self) -> f64 {
        1300.0
    }

    fn default_fid_tol(&self) -> f64 {
        1e-5
    }
}

/// Registered gate primitives, keyed by gate type.
///
/// Populate once at startup, then share behind an `Arc`; lookups take `&self`.
#[derive(Clone, Default)]
pub struct GateRegistry {
    plugins: BTreeMap<String, Arc<dyn GatePlugin>>,
}

impl fmt::Debug for GateRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GateRegistry").field("gate_types", &self.gate_types()).finish()
    }
}

impl GateRegistry {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Registry holding CD, CR and CS.
    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        for plugin in [Arc::new(CdPlugin) as Arc<dyn GatePlugin>, Arc::new(CrPlugin), Arc::new(CsPlugin)] {
            reg.register(plugin).expect("built-in gate types are distinct");
        }
        reg
    }

    pub fn register(&mut self, plugin: Arc<dyn GatePlugin>) -> Result<(), GateError> {
        let key = plugin.gate_type().to_string();
        if self.plugins.contains_key(&key) {
            return Err(GateError::Duplicate(key));
        }
        self.plugins.insert(key, plugin);
        Ok(())
    }

    pub fn get(&self, gate_type: &str) -> Result<&Arc<dyn GatePlugin>, GateError> {
        self.plugins.get(gate_type).ok_or_else(|| GateError::UnknownGate {
            gate: gate_type.to_string(),
            registered: self.gate_types().join(", "),
        })
    }

    pub fn gate_types(&self) -> Vec<&str> {
        self.plugins.keys().map(String::as_str).collect()
    }

    pub fn normalize(&self, gate: &GateSpec) -> Result<GateSpec, GateError> {
        let plugin = self.get(&gate.gate_type)?;
        Ok(GateSpec { params: plugin.validate_and_normalize(&gate.params)?, ..gate.clone() })
    }

    /// Model defaults for a gate type: per-gate duration and fidelity
    /// tolerance on top of [`ModelSpec::default`].
    pub fn default_model(&self, gate_type: &str) -> Result<ModelSpec, GateError> {
        let plugin = self.get(gate_type)?;
        Ok(ModelSpec {
            duration_us: plugin.default_duration_us(),
            fid_tol: plugin.default_fid_tol(),
            ..ModelSpec::default()
        })
    }
}

/// Ideal target unitary of a built-in gate.
pub fn builtin_target(gate: &GateSpec, space: FockSpace) -> Result<ComplexMatrix, Error> {
    let u = match gate.gate_type.as_str() {
        CD => target_unitary_cd(gate.complex("alpha")?, space)?,
        CR => target_unitary_cr(gate.real("theta")?, space)?,
        CS => target_unitary_cs(gate.complex("zeta")?, space)?,
        other => return Err(GateError::UnknownGate { gate: other.to_string(), registered: "CD, CR, CS".into() }.into()),
    };
    Ok(u)
}

/// `I₂ ⊗ a†a`.
pub fn joint_number(space: FockSpace) -> ComplexMatrix {
    kron(&crate::linalg::identity(2), &number(space))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        c, displacement, identity, max_abs_diff, minus_projector, plus_projector, quadrature_p, quadrature_x,
        squeezing, unitarity_error, variance,
    };

    fn space() -> FockSpace {
        FockSpace::from_n_max(15).unwrap()
    }

    fn sqrt_pi() -> Complex64 {
        c(PI.sqrt(), 0.0)
    }

    /// Unitarity restricted to Fock levels that stay clear of the cutoff.
    fn interior_unitarity(u: &ComplexMatrix, sp: FockSpace, skip_top: usize) -> f64 {
        let d = sp.dim();
        let keep: Vec<usize> = (0..2 * d).filter(|i| i % d < d - skip_top).collect();
        let uu = u.adjoint() * u;
        keep.iter()
            .flat_map(|&r| keep.iter().map(move |&col| (r, col)))
            .map(|(r, col)| (uu[(r, col)] - if r == col { c(1.0, 0.0) } else { c(0.0, 0.0) }).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn zero_parameters_give_identity() {
        let sp = space();
        assert_eq!(target_unitary_cd(c(0.0, 0.0), sp).unwrap(), identity(32));
        assert_eq!(target_unitary_cr(0.0, sp).unwrap(), identity(32));
        assert_eq!(target_unitary_cs(c(0.0, 0.0), sp).unwrap(), identity(32));
    }

    #[test]
    fn cd_block_form_and_inverse() {
        let sp = space();
        let alpha = c(0.4, -0.3);
        let u = target_unitary_cd(alpha, sp).unwrap();
        let blocks = kron(&plus_projector(), &displacement(alpha, sp).unwrap())
            + kron(&minus_projector(), &displacement(-alpha, sp).unwrap());
        assert!(max_abs_diff(&u, &blocks) < 1e-12);
        let inv = target_unitary_cd(-alpha, sp).unwrap();
        assert!(max_abs_diff(&(&u * &inv), &identity(32)) < 1e-12);
        assert!(unitarity_error(&target_unitary_cd(sqrt_pi(), sp).unwrap()) < 1e-9);
    }

    #[test]
    fn cd_moves_plus_branch_to_coherent_state() {
        let sp = space();
        let u = target_unitary_cd(sqrt_pi(), sp).unwrap();
        let d = sp.dim();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut psi = crate::linalg::ComplexVector::zeros(2 * d);
        psi[0] = c(h, 0.0);
        psi[d] = c(h, 0.0);
        let out = &u * psi;
        let coherent = displacement(sqrt_pi(), sp).unwrap().column(0).into_owned();
        // project on |+⟩: (ψ₀ + ψ₁)/√2
        let plus: crate::linalg::ComplexVector =
            crate::linalg::ComplexVector::from_fn(d, |n, _| (out[n] + out[d + n]) * h);
        let overlap = coherent.dotc(&plus).norm();
        assert!((overlap - 1.0).abs() < 1e-10, "{overlap}");
    }

    #[test]
    fn cr_diagonal_entries() {
        let sp = space();
        let theta = 0.382;
        let u = target_unitary_cr(theta, sp).unwrap();
        assert!((u[(2, 2)] - Complex64::from_polar(1.0, -2.0 * theta)).norm() < 1e-15);
        // generator route agrees with the explicit diagonal
        let gen = kron(&crate::linalg::sigma_z(), &number(sp)) * c(0.0, -theta);
        assert!(max_abs_diff(&expm(&gen).unwrap(), &u) < 1e-12);
        let inv = target_unitary_cr(-theta, sp).unwrap();
        assert!(max_abs_diff(&(&u * &inv), &identity(32)) < 1e-12);
    }

    #[test]
    fn cs_branches_squeeze_orthogonal_quadratures() {
        let sp = FockSpace::with_dim(30).unwrap();
        let zeta = c(0.5, 0.0);
        let u = target_unitary_cs(zeta, sp).unwrap();
        let blocks = kron(&plus_projector(), &squeezing(zeta, sp).unwrap())
            + kron(&minus_projector(), &squeezing(-zeta, sp).unwrap());
        assert!(max_abs_diff(&u, &blocks) < 1e-12);
        let vac = crate::linalg::fock_state(sp, 0);
        let plus_branch = squeezing(zeta, sp).unwrap() * &vac;
        let minus_branch = squeezing(-zeta, sp).unwrap() * &vac;
        let (x, p) = (quadrature_x(sp), quadrature_p(sp));
        let e = (-1.0f64).exp() / 2.0;
        assert!((variance(&x, &plus_branch) - e).abs() < 1e-4);
        assert!((variance(&p, &minus_branch) - e).abs() < 1e-4);
        assert!(variance(&p, &plus_branch) > 1.0);
        let dag = target_unitary_cs(-zeta, sp).unwrap();
        assert!(max_abs_diff(&u.adjoint(), &dag) < 1e-10);
    }

    #[test]
    fn interior_unitarity_at_paper_parameters() {
        let sp = space();
        for u in [
            target_unitary_cd(sqrt_pi(), sp).unwrap(),
            target_unitary_cs(c(0.5, 0.0), sp).unwrap(),
            target_unitary_cr(0.382, sp).unwrap(),
        ] {
            assert!(interior_unitarity(&u, sp, 2) < 1e-9);
        }
    }

    #[test]
    fn normalization_rules() {
        let g = GateSpec::cd(c(0.5, 0.5)).unwrap();
        assert_eq!(g.params["alpha"], ParamValue::Complex([0.5, 0.5]));
        assert!(matches!(GateSpec::cr(f64::NAN), Err(GateError::NonFinite(_))));
        assert!(matches!(GateSpec::cs(c(0.1, f64::INFINITY)), Err(GateError::NonFinite(_))));
        let neg = GateSpec::cr(-0.5).unwrap().real("theta").unwrap();
        assert!((neg - (CR_PERIOD - 0.5)).abs() < 1e-12);
        assert_eq!(GateSpec::cr(CR_PERIOD).unwrap().real("theta").unwrap(), 0.0);
        let z = GateSpec::cd(c(-0.0, -0.0)).unwrap();
        assert!(
            matches!(z.params["alpha"], ParamValue::Complex([re, im]) if re.is_sign_positive() && im.is_sign_positive())
        );
        let bad = GateSpec::new(CD, [("beta".to_string(), ParamValue::Real(1.0))].into());
        assert!(CdPlugin.validate_and_normalize(&bad.params).is_err());
    }

    #[test]
    fn normalize_is_idempotent() {
        let reg = GateRegistry::with_builtins();
        for g in [
            GateSpec::new(CR, [("theta".into(), ParamValue::Real(-13.7))].into()),
            GateSpec::new(CD, [("alpha".into(), ParamValue::Real(1.25))].into()),
            GateSpec::new(CS, [("zeta".into(), ParamValue::Complex([0.5, -0.0]))].into()),
        ] {
            let once = reg.normalize(&g).unwrap();
            assert_eq!(reg.normalize(&once).unwrap(), once);
        }
    }

    #[test]
    fn registry_rejects_duplicates() {
        let mut reg = GateRegistry::with_builtins();
        assert_eq!(reg.gate_types(), vec!["CD", "CR", "CS"]);
        assert!(reg.get("CD").is_ok());
        assert_eq!(reg.register(Arc::new(CdPlugin)), Err(GateError::Duplicate("CD".into())));
        assert!(matches!(reg.get("CParity"), Err(GateError::UnknownGate { .. })));
    }
}
