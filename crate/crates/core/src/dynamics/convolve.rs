//! Discrete convolution `(k * f)_i = sum_j dx w_j f_{i - s_j}` with zero
//! extension outside the grid, by direct summation or zero-padded FFT.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::kernels::{Kernel, KernelError, Tabulated};
use crate::scalar::Scalar;

/// Stencils longer than this go through the FFT under [`ConvolutionMethod::Auto`].
const AUTO_SPECTRAL_TAPS: usize = 48;

/// Spectral outputs below `FLUSH_ULPS * eps * log2(len) * |taps|_1 * max|f|`
/// are round-off and are set to 0. Left in place, that noise is amplified
/// by the unstable zero state and reaches the boundary long before the front.
const FLUSH_ULPS: f64 = 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ConvolutionMethod {
    Direct,
    Spectral,
    #[default]
    Auto,
}

impl std::str::FromStr for ConvolutionMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "direct" => Ok(Self::Direct),
            "spectral" | "fft" => Ok(Self::Spectral),
            "auto" => Ok(Self::Auto),
            other => Err(format!("unknown convolution method {other:?}")),
        }
    }
}

impl std::fmt::Display for ConvolutionMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Direct => "direct",
            Self::Spectral => "spectral",
            Self::Auto => "auto",
        })
    }
}

/// Kernel as a grid stencil: `taps[j]` (already multiplied by `dx`) acts at
/// cell shift `offset + j`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteKernel<T = f64> {
    offset: isize,
    taps: Vec<T>,
    identity: bool,
    analysis: Kernel<T>,
}

impl<T: Scalar> DiscreteKernel<T> {
    /// Samples `k` on the grid spacing `dx`. A tabulated kernel must already
    /// sit on that spacing; a Dirac mass becomes the identity.
    pub fn new(k: &Kernel<T>, dx: T) -> Result<Self, KernelError> {
        let table: Tabulated<T> = match k {
            Kernel::Dirac => {
                return Ok(Self {
                    offset: 0,
                    taps: vec![T::one()],
                    identity: true,
                    analysis: Kernel::Dirac,
                })
            }
            Kernel::Tabulated(t) => t.clone(),
            _ => k.discretize(dx, k.default_truncation_radius())?,
        };
        let offset = table.first_offset(dx)?;
        let taps = table.weights().iter().map(|w| *w * dx).collect();
        Ok(Self {
            offset,
            taps,
            identity: false,
            analysis: Kernel::tabulated(table)?,
        })
    }

    /// The sampled kernel as seen by the dispersion analysis.
    pub fn analysis_kernel(&self) -> &Kernel<T> {
        &self.analysis
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn offset(&self) -> isize {
        self.offset
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }

    /// Largest `|shift|` in cells.
    pub fn reach(&self) -> usize {
        let last = self.offset + self.taps.len() as isize - 1;
        self.offset.unsigned_abs().max(last.unsigned_abs())
    }

    /// Direct summation into `out`.
    pub fn apply_direct(&self, f: &[T], out: &mut [T]) {
        let n = f.len() as isize;
        if self.identity {
            out.copy_from_slice(f);
            return;
        }
        out.iter_mut().for_each(|o| *o = T::zero());
        for (j, &w) in self.taps.iter().enumerate() {
            let s = self.offset + j as isize;
            let lo = s.max(0);
            let hi = (n + s).min(n);
            if lo >= hi {
                continue;
            }
            let src = &f[(lo - s) as usize..(hi - s) as usize];
            for (o, x) in out[lo as usize..hi as usize].iter_mut().zip(src) {
                *o = *o + w * *x;
            }
        }
    }
}

struct Spectral<T: Scalar> {
    len: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
    k1_hat: Vec<Complex<T>>,
    k2_hat: Vec<Complex<T>>,
    mass: (T, T),
    buf: Vec<Complex<T>>,
    spec: Vec<Complex<T>>,
    scratch: Vec<Complex<T>>,
}

impl<T: Scalar> Clone for Spectral<T> {
    fn clone(&self) -> Self {
        Self {
            len: self.len,
            forward: Arc::clone(&self.forward),
            inverse: Arc::clone(&self.inverse),
            k1_hat: self.k1_hat.clone(),
            k2_hat: self.k2_hat.clone(),
            mass: self.mass,
            buf: self.buf.clone(),
            spec: self.spec.clone(),
            scratch: self.scratch.clone(),
        }
    }
}

impl<T: Scalar> Spectral<T> {
    fn new(n: usize, k1: &DiscreteKernel<T>, k2: &DiscreteKernel<T>) -> Self {
        // wrap-around lands in the zero padding when len >= n + reach
        let len = (n + k1.reach().max(k2.reach()) + 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
        let mut transform = |k: &DiscreteKernel<T>| {
            let mut h = vec![Complex::new(T::zero(), T::zero()); len];
            for (j, &w) in k.taps.iter().enumerate() {
                let s = (k.offset + j as isize).rem_euclid(len as isize) as usize;
                h[s] = Complex::new(w, T::zero());
            }
            forward.process_with_scratch(&mut h, &mut scratch);
            h
        };
        let k1_hat = transform(k1);
        let k2_hat = transform(k2);
        let l1 = |k: &DiscreteKernel<T>| k.taps.iter().fold(T::zero(), |a, w| a + w.abs());
        Self {
            len,
            forward,
            inverse,
            k1_hat,
            k2_hat,
            mass: (l1(k1), l1(k2)),
            buf: vec![Complex::new(T::zero(), T::zero()); len],
            spec: vec![Complex::new(T::zero(), T::zero()); len],
            scratch,
        }
    }

    /// Both convolutions from one complex transform of `u + i v`.
    fn apply(&mut self, u: &[T], v: &[T], out_u: &mut [T], out_v: &mut [T]) {
        let n = u.len();
        let zero = Complex::new(T::zero(), T::zero());
        for (i, b) in self.buf.iter_mut().enumerate() {
            *b = if i < n { Complex::new(u[i], v[i]) } else { zero };
        }
        self.forward.process_with_scratch(&mut self.buf, &mut self.scratch);
        let half = T::lit(0.5);
        for k in 0..self.len {
            let f = self.buf[k];
            let g = self.buf[(self.len - k) % self.len].conj();
            let u_hat = (f + g) * half;
            // (f - g) / (2i)
            let d = (f - g) * half;
            let v_hat = Complex::new(d.im, -d.re);
            let w = v_hat * self.k2_hat[k];
            self.spec[k] = u_hat * self.k1_hat[k] + Complex::new(-w.im, w.re);
        }
        self.inverse.process_with_scratch(&mut self.spec, &mut self.scratch);
        let scale = T::one() / T::from_usize_lossy(self.len);
        let sup = |f: &[T]| f.iter().fold(T::zero(), |a, x| a.max(x.abs()));
        let unit = T::lit(FLUSH_ULPS) * T::epsilon() * T::from_usize_lossy(self.len).log2();
        let (floor_u, floor_v) = (unit * self.mass.0 * sup(u), unit * self.mass.1 * sup(v));
        let flush = |x: T, floor: T| if x.abs() <= floor { T::zero() } else { x };
        for i in 0..n {
            out_u[i] = flush(self.spec[i].re * scale, floor_u);
            out_v[i] = flush(self.spec[i].im * scale, floor_v);
        }
    }
}

/// Applies the two model kernels to `(u, v)` on a fixed grid.
#[derive(Clone)]
pub struct Convolver<T: Scalar> {
    n: usize,
    k1: DiscreteKernel<T>,
    k2: DiscreteKernel<T>,
    spectral: Option<Spectral<T>>,
}

impl<T: Scalar> std::fmt::Debug for Convolver<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Convolver")
            .field("n", &self.n)
            .field("spectral", &self.spectral.is_some())
            .finish()
    }
}

impl<T: Scalar> Convolver<T> {
    pub fn new(n: usize, k1: DiscreteKernel<T>, k2: DiscreteKernel<T>, method: ConvolutionMethod) -> Self {
        let both_identity = k1.identity && k2.identity;
        let use_fft = match method {
            ConvolutionMethod::Direct => false,
            ConvolutionMethod::Spectral => !both_identity,
            ConvolutionMethod::Auto => k1.taps.len().max(k2.taps.len()) > AUTO_SPECTRAL_TAPS,
        };
        let spectral = use_fft.then(|| Spectral::new(n, &k1, &k2));
        Self { n, k1, k2, spectral }
    }

    /// Same kernels and length under another method.
    pub fn with_method(&self, method: ConvolutionMethod) -> Self {
        Self::new(self.n, self.k1.clone(), self.k2.clone(), method)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn is_spectral(&self) -> bool {
        self.spectral.is_some()
    }

    pub fn k1(&self) -> &DiscreteKernel<T> {
        &self.k1
    }

    pub fn k2(&self) -> &DiscreteKernel<T> {
        &self.k2
    }

    /// Writes `k1 * u` and `k2 * v`. Identity kernels are copied exactly on
    /// either path.
    pub fn apply(&mut self, u: &[T], v: &[T], out_u: &mut [T], out_v: &mut [T]) {
        match self.spectral.as_mut() {
            Some(s) => {
                s.apply(u, v, out_u, out_v);
                if self.k1.identity {
                    out_u.copy_from_slice(u);
                }
                if self.k2.identity {
                    out_v.copy_from_slice(v);
                }
            }
            None => {
                self.k1.apply_direct(u, out_u);
                self.k2.apply_direct(v, out_v);
            }
        }
    }
}
