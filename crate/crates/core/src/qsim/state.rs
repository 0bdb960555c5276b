use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance for every state the simulator produces.
pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulatorCaps {
    pub max_amplitudes: usize,
}

impl Default for SimulatorCaps {
    fn default() -> Self {
        SimulatorCaps { max_amplitudes: 1 << 22 }
    }
}

/// Amplitudes over a product of registers with arbitrary dimensions.
///
/// Basis index is mixed-radix with the first register most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    dims: Vec<usize>,
    strides: Vec<usize>,
    amps: Vec<Complex64>,
}

impl Statevector {
    /// `|0, 0, ..., 0⟩` over registers of the given dimensions.
    pub fn zero(dims: &[usize], caps: &SimulatorCaps) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::Dimension(format!("register dimensions must be positive: {dims:?}")));
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&l| l <= caps.max_amplitudes)
            .ok_or_else(|| {
                Error::SimulatorCap(format!("registers {dims:?} exceed {} amplitudes", caps.max_amplitudes))
            })?;
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); len];
        amps[0] = Complex64::new(1.0, 0.0);
        Ok(Statevector { dims: dims.to_vec(), strides, amps })
    }

    pub fn basis(dims: &[usize], digits: &[usize], caps: &SimulatorCaps) -> Result<Self> {
        let mut s = Self::zero(dims, caps)?;
        let idx = s.index_of(digits)?;
        s.amps[0] = Complex64::new(0.0, 0.0);
        s.amps[idx] = Complex64::new(1.0, 0.0);
        Ok(s)
    }

    /// Builds a state from raw amplitudes; they must already be normalized.
    pub fn from_amplitudes(dims: &[usize], amps: Vec<Complex64>, caps: &SimulatorCaps) -> Result<Self> {
        let mut s = Self::zero(dims, caps)?;
        if amps.len() != s.amps.len() {
            return Err(Error::Dimension(format!("{} amplitudes for {} basis states", amps.len(), s.amps.len())));
        }
        s.amps = amps;
        if (s.norm_sqr() - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::Parameter(format!("state has squared norm {}", s.norm_sqr())));
        }
        Ok(s)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn stride(&self, reg: usize) -> usize {
        self.strides[reg]
    }

    #[inline]
    pub fn digit(&self, index: usize, reg: usize) -> usize {
        (index / self.strides[reg]) % self.dims[reg]
    }

    pub fn digits(&self, index: usize) -> Vec<usize> {
        (0..self.dims.len()).map(|r| self.digit(index, r)).collect()
    }

    pub fn index_of(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() || digits.iter().zip(&self.dims).any(|(d, n)| d >= n) {
            return Err(Error::Dimension(format!("basis label {digits:?} does not fit {:?}", self.dims)));
        }
        Ok(digits.iter().zip(&self.strides).map(|(d, s)| d * s).sum())
    }

    pub fn amplitude(&self, digits: &[usize]) -> Result<Complex64> {
        Ok(self.amps[self.index_of(digits)?])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() <= NORM_TOLERANCE
    }

    pub(crate) fn check_register(&self, reg: usize) -> Result<()> {
        if reg >= self.dims.len() {
            return Err(Error::Dimension(format!("no register {reg} in {:?}", self.dims)));
        }
        Ok(())
    }

    /// Moves the amplitude of basis state `i` to `target(i)`. `target`
    /// must be a bijection on basis indices.
    pub fn permute_basis(&mut self, target: impl Fn(usize) -> usize) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, a) in self.amps.iter().enumerate() {
            out[target(i)] = *a;
        }
        self.amps = out;
    }

    /// Multiplies each amplitude by `phase(index)`.
    pub fn apply_phase(&mut self, phase: impl Fn(usize) -> Complex64) {
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= phase(i);
        }
    }

    /// Applies a `d x d` unitary (row-major) to one register.
    pub fn apply_register_unitary(&mut self, reg: usize, matrix: &[Complex64]) -> Result<()> {
        self.check_register(reg)?;
        let (d, stride) = (self.dims[reg], self.strides[reg]);
        if matrix.len() != d * d {
            return Err(Error::Dimension(format!("{}-entry matrix for a register of dimension {d}", matrix.len())));
        }
        let block = d * stride;
        let mut column = vec![Complex64::new(0.0, 0.0); d];
        for start in (0..self.amps.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                for (k, c) in column.iter_mut().enumerate() {
                    *c = self.amps[base + k * stride];
                }
                for row in 0..d {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (k, c) in column.iter().enumerate() {
                        acc += matrix[row * d + k] * c;
                    }
                    self.amps[base + row * stride] = acc;
                }
            }
        }
        Ok(())
    }

    /// Reflects one register about the real unit vector `axis`
    /// (`ψ -> 2|s⟩⟨s|ψ - ψ`), independently in every slice of the others.
    pub fn reflect_register(&mut self, reg: usize, axis: &[f64]) -> Result<()> {
        self.check_register(reg)?;
        let (d, stride) = (self.dims[reg], self.strides[reg]);
        if axis.len() != d {
            return Err(Error::Dimension(format!("axis of length {} for register dimension {d}", axis.len())));
        }
        let block = d * stride;
        for start in (0..self.amps.len()).step_by(block) {
            for offset in 0..stride {
                let base = start + offset;
                let inner: Complex64 = (0..d).map(|k| self.amps[base + k * stride] * axis[k]).sum();
                for (k, s) in axis.iter().enumerate() {
                    let a = &mut self.amps[base + k * stride];
                    *a = inner * (2.0 * s) - *a;
                }
            }
        }
        Ok(())
    }

    /// Marginal distribution of one register.
    pub fn register_probabilities(&self, reg: usize) -> Result<Vec<f64>> {
        self.check_register(reg)?;
        let mut p = vec![0.0; self.dims[reg]];
        for (i, a) in self.amps.iter().enumerate() {
            p[self.digit(i, reg)] += a.norm_sqr();
        }
        Ok(p)
    }

    /// Samples a full basis label from the Born distribution.
    pub fn sample_basis(&self, rng: &mut impl Rng) -> Vec<usize> {
        let target: f64 = rng.random::<f64>() * self.norm_sqr();
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if acc > target {
                return self.digits(i);
            }
        }
        self.digits(last_nonzero)
    }

    /// Samples the listed registers from their joint marginal.
    pub fn sample_registers(&self, regs: &[usize], rng: &mut impl Rng) -> Result<Vec<usize>> {
        for &r in regs {
            self.check_register(r)?;
        }
        let full = self.sample_basis(rng);
        Ok(regs.iter().map(|&r| full[r]).collect())
    }
}

/// Unitary discrete Fourier transform of dimension `d`; maps `|0⟩` to the
/// uniform superposition.
pub fn dft_matrix(d: usize) -> Vec<Complex64> {
    let norm = 1.0 / (d as f64).sqrt();
    let mut m = Vec::with_capacity(d * d);
    for row in 0..d {
        for col in 0..d {
            let angle = 2.0 * std::f64::consts::PI * ((row * col) % d) as f64 / d as f64;
            m.push(Complex64::from_polar(norm, angle));
        }
    }
    m
}
