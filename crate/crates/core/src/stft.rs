//! Translation, modulation, the short-time Fourier transform, window
//! autocorrelations `g_s`, and the correlation operator matrix `C(g, s)`.
//!
//! The conjugation convention is pinned by the spectrogram expansion: for
//! `f` supported in `K`,
//!
//! ```text
//! |V_g f(lambda, xi)|^2 = w^2 sum_{s in K-K} A_lambda(s) conj(<s, xi>)
//! A_lambda(s) = sum_t f(t) conj(f(t-s)) conj(g(t-lambda)) g(t-s-lambda)
//! ```
//!
//! The bracket `conj(g(t-lambda)) g(t-s-lambda)` equals the translated
//! autocorrelation `T_lambda g_s(t)` with `g_s(y) = conj(g(y)) g(y-s)`;
//! every retrieval step uses this single convention.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::group::{group_op, group_sub, pairing, DualElement, Element};
use crate::harmonic::Signal;

/// Phaseless STFT samples on a rectangular grid `Lambda x Gamma`,
/// magnitudes stored row-major with the `lambda` index outermost.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaselessGrid {
    lambda: Vec<Element>,
    gamma: Vec<DualElement>,
    magnitudes: Vec<f64>,
}

impl PhaselessGrid {
    pub fn new(
        lambda: Vec<Element>,
        gamma: Vec<DualElement>,
        magnitudes: Vec<f64>,
    ) -> Result<PhaselessGrid> {
        if magnitudes.len() != lambda.len() * gamma.len() {
            return Err(Error::InvalidInput(
                "magnitude count does not match the grid".into(),
            ));
        }
        if magnitudes.iter().any(|m| m.is_nan() || *m < 0.0) {
            return Err(Error::InvalidInput(
                "magnitudes must be nonnegative and finite".into(),
            ));
        }
        Ok(PhaselessGrid {
            lambda,
            gamma,
            magnitudes,
        })
    }

    pub fn lambda(&self) -> &[Element] {
        &self.lambda
    }

    pub fn gamma(&self) -> &[DualElement] {
        &self.gamma
    }

    pub fn magnitudes(&self) -> &[f64] {
        &self.magnitudes
    }

    pub fn magnitude(&self, lambda_idx: usize, gamma_idx: usize) -> f64 {
        self.magnitudes[lambda_idx * self.gamma.len() + gamma_idx]
    }

    /// Returns a copy with `apply` mapped over the magnitudes (noise
    /// injection); results are clipped at zero.
    pub fn map_magnitudes(&self, mut apply: impl FnMut(usize, f64) -> f64) -> PhaselessGrid {
        let magnitudes = self
            .magnitudes
            .iter()
            .enumerate()
            .map(|(i, &m)| apply(i, m).max(0.0))
            .collect();
        PhaselessGrid {
            lambda: self.lambda.clone(),
            gamma: self.gamma.clone(),
            magnitudes,
        }
    }

    /// CSV rows `lambda coords..., gamma coords..., magnitude`.
    pub fn write_csv(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let la = self.lambda.first().map_or(0, |e| e.coords().len());
        let ga = self.gamma.first().map_or(0, |e| e.coords().len());
        let mut header: Vec<String> = (0..la).map(|i| format!("lambda_{i}")).collect();
        header.extend((0..ga).map(|i| format!("gamma_{i}")));
        header.push("magnitude".into());
        writeln!(out, "{}", header.join(","))?;
        for (i, l) in self.lambda.iter().enumerate() {
            for (j, c) in self.gamma.iter().enumerate() {
                let mut row: Vec<String> = l.coords().iter().map(|c| c.to_string()).collect();
                row.extend(c.coords().iter().map(|c| c.to_string()));
                row.push(format!("{:.17e}", self.magnitude(i, j)));
                writeln!(out, "{}", row.join(","))?;
            }
        }
        Ok(())
    }
}

/// The windowed autocorrelation `g_s(y) = conj(g(y)) g(y-s)` evaluated on
/// its natural support `supp(g) intersect (supp(g) + s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowAutocorr {
    pub shift: Element,
    pub function: Signal,
}

/// `(T_x f)(y) = f(y - x)`.
pub fn translate(f: &Signal, x: &Element) -> Result<Signal> {
    let g = f.group().clone();
    let support = f
        .support()
        .iter()
        .map(|t| group_op(&g, t, x))
        .collect::<Result<Vec<_>>>()?;
    Signal::new(g, support, f.values().to_vec(), f.weights())
}

/// `(M_xi f)(y) = <y, xi> f(y)`.
pub fn modulate(f: &Signal, xi: &DualElement) -> Result<Signal> {
    let g = f.group().clone();
    let values = f
        .support()
        .iter()
        .zip(f.values())
        .map(|(t, v)| Ok(v * pairing(&g, t, xi)?))
        .collect::<Result<Vec<_>>>()?;
    Signal::new(g, f.support().to_vec(), values, f.weights())
}

/// The short-time Fourier transform
/// `V_g f(x, xi) = w sum_t f(t) conj(g(t-x)) conj(<t, xi>)`
/// evaluated at the requested points.
pub fn stft(
    f: &Signal,
    window: &Signal,
    points: &[(Element, DualElement)],
) -> Result<Vec<Complex64>> {
    if f.group() != window.group() {
        return Err(Error::GroupMismatch);
    }
    if f.weights() != window.weights() {
        return Err(Error::WeightMismatch);
    }
    let g = f.group().clone();
    let w = f.weight();
    let mut out = Vec::with_capacity(points.len());
    for (x, xi) in points {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, v) in f.support().iter().zip(f.values()) {
            let gv = window.value_at(&group_sub(&g, t, x)?);
            if gv != Complex64::new(0.0, 0.0) {
                acc += v * gv.conj() * pairing(&g, t, xi)?.conj();
            }
        }
        out.push(w * acc);
    }
    Ok(out)
}

/// `g_s(y) = conj(g(y)) g(y - s)` pointwise.
pub fn window_autocorr(window: &Signal, s: &Element) -> Result<WindowAutocorr> {
    let g = window.group().clone();
    let mut support = Vec::new();
    let mut values = Vec::new();
    for (y, v) in window.support().iter().zip(window.values()) {
        let shifted = window.value_at(&group_sub(&g, y, s)?);
        if shifted != Complex64::new(0.0, 0.0) {
            support.push(y.clone());
            values.push(v.conj() * shifted);
        }
    }
    Ok(WindowAutocorr {
        shift: s.clone(),
        function: Signal::new(g, support, values, window.weights())?,
    })
}

/// The correlation operator matrix for shift `s`: rows indexed by
/// `lambda`, columns by `t` in `k_set`, entries
/// `w conj(g(t-lambda)) g(t-s-lambda) = w T_lambda g_s(t)`.
/// Applied to the value vector of `h` it yields the Haar integrals of `h`
/// against the translated autocorrelations.
pub fn cgs_matrix(
    window: &Signal,
    s: &Element,
    k_set: &[Element],
    lambda: &[Element],
) -> Result<DMatrix<Complex64>> {
    if k_set.is_empty() {
        return Err(Error::EmptySet("K"));
    }
    if lambda.is_empty() {
        return Err(Error::EmptySet("Lambda"));
    }
    let g = window.group().clone();
    let w = window.weight();
    let mut m = DMatrix::<Complex64>::zeros(lambda.len(), k_set.len());
    for (i, l) in lambda.iter().enumerate() {
        for (j, t) in k_set.iter().enumerate() {
            let a = window.value_at(&group_sub(&g, t, l)?).conj();
            let b = window.value_at(&group_sub(&g, &group_sub(&g, t, s)?, l)?);
            m[(i, j)] = w * a * b;
        }
    }
    Ok(m)
}
