//! Noiseless statevector simulation of layered parameterized circuits.
//!
//! Basis ordering: qubit 0 is the most significant bit of a basis-state
//! index, so on three qubits `|q0 q1 q2>` lives at index `4*q0 + 2*q1 + q2`.
//!
//! A circuit is an `Rx` embedding of the input angle on every wire followed by
//! `n_layers` layers, each made of one [`rot`] gate per qubit and then the
//! entangling CNOTs of the [`CircuitSpec`]. Parameters are laid out flat as
//! `(layer, qubit, [phi, theta, omega])`, row-major.

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

pub type Matrix2 = [[Complex64; 2]; 2];

/// `Rx(angle) = exp(-i angle X / 2)`.
pub fn rx(angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    let ms = Complex64::new(0.0, -s);
    [[Complex64::new(c, 0.0), ms], [ms, Complex64::new(c, 0.0)]]
}

/// `Ry(angle) = exp(-i angle Y / 2)`.
pub fn ry(angle: f64) -> Matrix2 {
    let (s, c) = (angle / 2.0).sin_cos();
    [
        [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
        [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
    ]
}

/// `Rz(angle) = exp(-i angle Z / 2)`.
pub fn rz(angle: f64) -> Matrix2 {
    let half = angle / 2.0;
    [
        [Complex64::from_polar(1.0, -half), ZERO],
        [ZERO, Complex64::from_polar(1.0, half)],
    ]
}

/// The general rotation `Rz(omega) Ry(theta) Rz(phi)` written out in closed form.
pub fn rot(phi: f64, theta: f64, omega: f64) -> Matrix2 {
    let (s, c) = (theta / 2.0).sin_cos();
    let a = Complex64::from_polar(1.0, -(phi + omega) / 2.0);
    let b = Complex64::from_polar(1.0, (phi - omega) / 2.0);
    [[a * c, -b * s], [b.conj() * s, a.conj() * c]]
}

/// Partial derivatives of [`rot`] with respect to `(phi, theta, omega)`.
fn rot_derivatives(phi: f64, theta: f64, omega: f64) -> [Matrix2; 3] {
    let (s, c) = (theta / 2.0).sin_cos();
    let a = Complex64::from_polar(1.0, -(phi + omega) / 2.0);
    let b = Complex64::from_polar(1.0, (phi - omega) / 2.0);
    let (ac, bc) = (a.conj(), b.conj());
    let mi2 = Complex64::new(0.0, -0.5);
    let pi2 = Complex64::new(0.0, 0.5);
    let d_phi = [[mi2 * a * c, mi2 * b * s], [mi2 * bc * s, pi2 * ac * c]];
    let d_theta = [
        [-a * (s / 2.0), -b * (c / 2.0)],
        [bc * (c / 2.0), -ac * (s / 2.0)],
    ];
    let d_omega = [[mi2 * a * c, pi2 * b * s], [pi2 * bc * s, pi2 * ac * c]];
    [d_phi, d_theta, d_omega]
}

fn dagger(m: &Matrix2) -> Matrix2 {
    [
        [m[0][0].conj(), m[1][0].conj()],
        [m[0][1].conj(), m[1][1].conj()],
    ]
}

#[inline]
fn mul2(m: &Matrix2, a0: Complex64, a1: Complex64) -> (Complex64, Complex64) {
    (m[0][0] * a0 + m[0][1] * a1, m[1][0] * a0 + m[1][1] * a1)
}

/// The `2^n` complex amplitudes of an `n`-qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The computational basis state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 20 {
            return Err(Error::InvalidArgument(format!(
                "register size must be in 1..=20 qubits, got {n_qubits}"
            )));
        }
        let mut amplitudes = vec![ZERO; 1 << n_qubits];
        amplitudes[0] = ONE;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// The basis state with the given index (qubit 0 is the most significant bit).
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.amplitudes.len() {
            return Err(Error::InvalidArgument(format!(
                "basis index {index} out of range for {n_qubits} qubits"
            )));
        }
        state.amplitudes[0] = ZERO;
        state.amplitudes[index] = ONE;
        Ok(state)
    }

    /// Wraps raw amplitudes. The length must be a power of two and the vector
    /// must be normalized within `1e-10`.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let state = Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidArgument(format!(
                "state is not normalized (norm^2 = {norm})"
            )));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Exact measurement probabilities `|a_i|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit >= self.n_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                n_qubits: self.n_qubits,
            });
        }
        Ok(())
    }

    fn bit(&self, qubit: usize) -> usize {
        1 << (self.n_qubits - 1 - qubit)
    }

    /// Applies an arbitrary 2x2 matrix to one qubit.
    pub fn apply_single(&mut self, qubit: usize, m: &Matrix2) -> Result<()> {
        self.check_qubit(qubit)?;
        let bit = self.bit(qubit);
        apply_matrix(&mut self.amplitudes, bit, m);
        Ok(())
    }

    pub fn apply_rx(&mut self, qubit: usize, angle: f64) -> Result<()> {
        self.apply_single(qubit, &rx(angle))
    }

    pub fn apply_rot(&mut self, qubit: usize, phi: f64, theta: f64, omega: f64) -> Result<()> {
        self.apply_single(qubit, &rot(phi, theta, omega))
    }

    /// Toggles the target bit of every basis state whose control bit is set.
    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_qubit(control)?;
        self.check_qubit(target)?;
        if control == target {
            return Err(Error::SameControlTarget(control));
        }
        let (c, t) = (self.bit(control), self.bit(target));
        apply_cnot_raw(&mut self.amplitudes, c, t);
        Ok(())
    }
}

fn apply_matrix(amps: &mut [Complex64], bit: usize, m: &Matrix2) {
    for i in 0..amps.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (a0, a1) = mul2(m, amps[i], amps[j]);
            amps[i] = a0;
            amps[j] = a1;
        }
    }
}

fn apply_cnot_raw(amps: &mut [Complex64], control_bit: usize, target_bit: usize) {
    for i in 0..amps.len() {
        if i & control_bit != 0 && i & target_bit == 0 {
            amps.swap(i, i | target_bit);
        }
    }
}

/// Fixed entangling pattern applied after the rotations of every layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Entangler {
    /// `(0->1), (1->2), ..., (n-1 -> 0)`.
    Ring,
    /// `(0->1), (1->2), ..., (n-2 -> n-1)`.
    Chain,
}

impl Entangler {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        let mut pairs: Vec<_> = (0..n_qubits.saturating_sub(1)).map(|q| (q, q + 1)).collect();
        if self == Entangler::Ring && n_qubits > 2 {
            pairs.push((n_qubits - 1, 0));
        }
        pairs
    }
}

/// Shape of a layered circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    n_qubits: usize,
    n_layers: usize,
    entangler: Vec<(usize, usize)>,
}

impl CircuitSpec {
    pub fn new(n_qubits: usize, n_layers: usize, entangler: Vec<(usize, usize)>) -> Result<Self> {
        if n_qubits == 0 || n_qubits > 8 {
            return Err(Error::InvalidArgument(format!(
                "circuits support 1..=8 qubits, got {n_qubits}"
            )));
        }
        for &(c, t) in &entangler {
            if c >= n_qubits || t >= n_qubits {
                return Err(Error::QubitOutOfRange {
                    index: c.max(t),
                    n_qubits,
                });
            }
            if c == t {
                return Err(Error::SameControlTarget(c));
            }
        }
        Ok(Self {
            n_qubits,
            n_layers,
            entangler,
        })
    }

    pub fn with_entangler(n_qubits: usize, n_layers: usize, entangler: Entangler) -> Result<Self> {
        Self::new(n_qubits, n_layers, entangler.pairs(n_qubits))
    }

    /// Three qubits, four layers, ring entangler.
    pub fn default_qmdn() -> Self {
        Self::with_entangler(3, 4, Entangler::Ring).expect("valid default circuit")
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn entangler(&self) -> &[(usize, usize)] {
        &self.entangler
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    /// `3 * n_qubits * n_layers`.
    pub fn param_count(&self) -> usize {
        3 * self.n_qubits * self.n_layers
    }

    /// Flat index of angle `k` (0 = phi, 1 = theta, 2 = omega) of the rotation
    /// on `qubit` in `layer`.
    pub fn param_index(&self, layer: usize, qubit: usize, k: usize) -> usize {
        (layer * self.n_qubits + qubit) * 3 + k
    }

    fn check_len(&self, what: &'static str, len: usize, expected: usize) -> Result<()> {
        if len != expected {
            return Err(Error::LengthMismatch {
                what,
                expected,
                actual: len,
            });
        }
        Ok(())
    }

    /// Final statevector of the circuit for one input angle.
    pub fn state(&self, params: &[f64], x_angle: f64) -> Result<StateVector> {
        self.check_len("circuit parameters", params.len(), self.param_count())?;
        let mut state = StateVector::zero(self.n_qubits)?;
        self.evolve(&mut state.amplitudes, params, x_angle);
        Ok(state)
    }

    fn evolve(&self, amps: &mut [Complex64], params: &[f64], x_angle: f64) {
        let n = self.n_qubits;
        let bit = |q: usize| 1usize << (n - 1 - q);
        let embed = rx(x_angle);
        for q in 0..n {
            apply_matrix(amps, bit(q), &embed);
        }
        for layer in 0..self.n_layers {
            for q in 0..n {
                let i = self.param_index(layer, q, 0);
                let m = rot(params[i], params[i + 1], params[i + 2]);
                apply_matrix(amps, bit(q), &m);
            }
            for &(c, t) in &self.entangler {
                apply_cnot_raw(amps, bit(c), bit(t));
            }
        }
    }

    /// Adjoint-mode vector-Jacobian product: given the final state and
    /// `cotangent[i] = dL/dp_i`, accumulates `dL/d angle` into `grad`.
    ///
    /// `state` is consumed as scratch space and rewound gate by gate.
    fn pullback(
        &self,
        state: &mut [Complex64],
        params: &[f64],
        cotangent: &[f64],
        grad: &mut [f64],
    ) {
        let n = self.n_qubits;
        let bit = |q: usize| 1usize << (n - 1 - q);
        // dL/dtheta = 2 Re <lambda | dG psi_before>, with lambda = U_after^dag (c * psi).
        let mut lambda: Vec<Complex64> = state
            .iter()
            .zip(cotangent)
            .map(|(a, &c)| a * c)
            .collect();
        for layer in (0..self.n_layers).rev() {
            for &(c, t) in self.entangler.iter().rev() {
                apply_cnot_raw(state, bit(c), bit(t));
                apply_cnot_raw(&mut lambda, bit(c), bit(t));
            }
            for q in (0..n).rev() {
                let idx = self.param_index(layer, q, 0);
                let (phi, theta, omega) = (params[idx], params[idx + 1], params[idx + 2]);
                let inv = dagger(&rot(phi, theta, omega));
                let ders = rot_derivatives(phi, theta, omega);
                let b = bit(q);
                let mut acc = [0.0; 3];
                for i in 0..state.len() {
                    if i & b != 0 {
                        continue;
                    }
                    let j = i | b;
                    let (p0, p1) = mul2(&inv, state[i], state[j]);
                    let (l0, l1) = (lambda[i], lambda[j]);
                    for (k, d) in ders.iter().enumerate() {
                        let (d0, d1) = mul2(d, p0, p1);
                        acc[k] += (l0.conj() * d0 + l1.conj() * d1).re;
                    }
                    state[i] = p0;
                    state[j] = p1;
                    let (m0, m1) = mul2(&inv, l0, l1);
                    lambda[i] = m0;
                    lambda[j] = m1;
                }
                for k in 0..3 {
                    grad[idx + k] += 2.0 * acc[k];
                }
            }
        }
    }
}

/// Flat rotation angles for one circuit.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitParams {
    angles: Vec<f64>,
}

impl CircuitParams {
    pub fn new(spec: &CircuitSpec, angles: Vec<f64>) -> Result<Self> {
        spec.check_len("circuit parameters", angles.len(), spec.param_count())?;
        Ok(Self { angles })
    }

    pub fn zeros(spec: &CircuitSpec) -> Self {
        Self {
            angles: vec![0.0; spec.param_count()],
        }
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }
}

/// Output probabilities of the circuit started from `|0...0>`.
pub fn run_circuit(spec: &CircuitSpec, params: &[f64], x_angle: f64) -> Result<Vec<f64>> {
    Ok(spec.state(params, x_angle)?.probabilities())
}

/// Gradient of `sum_i cotangent[i] * p_i` with respect to every rotation angle.
/// The embedding angle is not a trainable parameter and gets no gradient.
pub fn circuit_gradient(
    spec: &CircuitSpec,
    params: &[f64],
    x_angle: f64,
    cotangent: &[f64],
) -> Result<Vec<f64>> {
    let mut grad = vec![0.0; spec.param_count()];
    let state = spec.state(params, x_angle)?;
    accumulate_gradient(spec, params, state, cotangent, &mut grad)?;
    Ok(grad)
}

/// Like [`circuit_gradient`] but reuses an already computed final state and
/// adds into `grad`.
pub fn accumulate_gradient(
    spec: &CircuitSpec,
    params: &[f64],
    mut state: StateVector,
    cotangent: &[f64],
    grad: &mut [f64],
) -> Result<()> {
    spec.check_len("circuit parameters", params.len(), spec.param_count())?;
    spec.check_len("cotangent", cotangent.len(), spec.dim())?;
    spec.check_len("gradient buffer", grad.len(), spec.param_count())?;
    spec.check_len("state", state.amplitudes.len(), spec.dim())?;
    spec.pullback(&mut state.amplitudes, params, cotangent, grad);
    Ok(())
}
