//! Fourier analysis under the `m_G(H) = 1` normalization: signals as
//! finitely supported functions, the Fourier transform and its inverse,
//! Paley-Wiener sampling along coset sections, and the uniqueness-set
//! rank oracle.
//!
//! On a finite group the Paley-Wiener space `PW_Omega` is exactly the span
//! of the characters indexed by `Omega`, so uniqueness of an evaluation
//! set is a finite-dimensional rank question; the oracle decides it from
//! the singular values of the character evaluation matrix.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{
    group_op, pairing, CosetSection, DualElement, Element, GroupSpec, HaarWeights,
    SubgroupData,
};
use crate::numeric;

/// A finitely supported complex-valued function on a group, stored as a
/// sorted support list plus values, with the Haar weight of its domain
/// attached. Values may be zero; support entries are distinct.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    group: GroupSpec,
    support: Vec<Element>,
    values: Vec<Complex64>,
    weights: HaarWeights,
}

/// A signal living on a dual group; it carries the dual weight as its own
/// pointwise weight via [`HaarWeights::swapped`].
pub type DualSignal = Signal;

impl Signal {
    pub fn new(
        group: GroupSpec,
        support: Vec<Element>,
        values: Vec<Complex64>,
        weights: HaarWeights,
    ) -> Result<Signal> {
        if support.len() != values.len() {
            return Err(Error::InvalidInput(
        "support and value lists differ in length".into(),
            ));
        }
        for e in &support {
            if !group.contains(e) {
                return Err(Error::InvalidInput(format!(
                    "support point {e} does not belong to the group"
                )));
            }
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidInput("signal values must be finite".into()));
        }
        let mut paired: Vec<(Element, Complex64)> =
            support.into_iter().zip(values).collect();
        paired.sort_by(|a, b| a.0.cmp(&b.0));
        for w in paired.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidInput(format!(
                    "duplicate support point {}",
                    w[0].0
                )));
            }
        }
        let (support, values) = paired.into_iter().unzip();
        Ok(Signal {
            group,
            support,
            values,
            weights,
        })
    }

    /// The zero signal (empty support).
    pub fn zero(group: GroupSpec, weights: HaarWeights) -> Signal {
        Signal {
            group,
            support: vec![],
            values: vec![],
            weights,
        }
    }

    /// Point mass at `t`.
    pub fn delta(group: GroupSpec, t: Element, weights: HaarWeights) -> Result<Signal> {
        Signal::new(group, vec![t], vec![Complex64::new(1.0, 0.0)], weights)
    }

    /// Indicator of a point set.
    pub fn indicator(group: GroupSpec, points: &[Element], weights: HaarWeights) -> Result<Signal> {
        Signal::new(
            group,
            points.to_vec(),
            vec![Complex64::new(1.0, 0.0); points.len()],
            weights,
        )
    }

    /// Seeded complex standard-normal values on the given support.
    pub fn gaussian_random(
        group: GroupSpec,
        support: &[Element],
        weights: HaarWeights,
        seed: u64,
    ) -> Result<Signal> {
        let values = (0..support.len())
            .map(|i| {
                let (re, im) = crate::windows::streams::std_normal_pair(seed, 1, i as u64);
                Complex64::new(re, im)
            })
            .collect();
        Signal::new(group, support.to_vec(), values, weights)
    }

    pub fn group(&self) -> &GroupSpec {
        &self.group
    }

    pub fn support(&self) -> &[Element] {
        &self.support
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn weights(&self) -> HaarWeights {
        self.weights
    }

    /// Mass of one point of the signal's own domain.
    pub fn weight(&self) -> f64 {
        self.weights.primal_weight
    }

    /// Value at `t`, zero off the support.
    pub fn value_at(&self, t: &Element) -> Complex64 {
        match self.support.binary_search(t) {
            Ok(i) => self.values[i],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    /// `||f||^2 = w * sum |f(t)|^2`.
    pub fn norm_sqr(&self) -> f64 {
        self.weights.primal_weight * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<f, g> = w * sum f(t) conj(g(t))`.
    pub fn inner(&self, other: &Signal) -> Result<Complex64> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        if self.weights != other.weights {
            return Err(Error::WeightMismatch);
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, v) in self.support.iter().zip(&self.values) {
            acc += v * other.value_at(t).conj();
        }
        Ok(self.weights.primal_weight * acc)
    }

    pub fn scaled(&self, c: Complex64) -> Signal {
        Signal {
            group: self.group.clone(),
            support: self.support.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            weights: self.weights,
        }
    }

    pub fn add(&self, other: &Signal) -> Result<Signal> {
        if self.group != other.group {
            return Err(Error::GroupMismatch);
        }
        if self.weights != other.weights {
            return Err(Error::WeightMismatch);
        }
        let mut support: Vec<Element> = self.support.clone();
        support.extend(other.support.iter().cloned());
        support.sort();
        support.dedup();
        let values = support
            .iter()
            .map(|t| self.value_at(t) + other.value_at(t))
            .collect();
        Signal::new(self.group.clone(), support, values, self.weights)
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.values.iter().all(|v| v.norm() <= tol)
    }

    /// Serializable record: group, support coordinates, `(re, im)` value
    /// pairs, and the designated subgroup `H` behind the Haar weights.
    pub fn record(&self, subgroup_h: Option<&SubgroupData>) -> SignalRecord {
        SignalRecord {
            group: self.group.clone(),
            support: self.support.clone(),
            values: self.values.iter().map(|v| (v.re, v.im)).collect(),
            subgroup_h: subgroup_h
                .and_then(|h| h.elements().map(|e| e.to_vec())),
            primal_weight: self.weights.primal_weight,
            dual_weight: self.weights.dual_weight,
        }
    }
}

/// JSON-facing record for a [`Signal`].
#[derive(Debug, Clone, Serialize)]
pub struct SignalRecord {
    pub group: GroupSpec,
    pub support: Vec<Element>,
    pub values: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subgroup_h: Option<Vec<Element>>,
    pub primal_weight: f64,
    pub dual_weight: f64,
}

/// A finite set of distinct dual points, the spectrum `Omega` of a
/// Paley-Wiener space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct SpectrumSet {
    elements: Vec<DualElement>,
}

impl SpectrumSet {
    pub fn new(elements: Vec<DualElement>) -> Result<SpectrumSet> {
        if elements.is_empty() {
            return Err(Error::EmptySpectrum);
        }
        let mut sorted = elements;
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidInput(format!(
                    "duplicate spectrum point {}",
                    w[0]
                )));
            }
        }
        Ok(SpectrumSet { elements: sorted })
    }

    pub fn elements(&self) -> &[DualElement] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// Fourier transform evaluated on an explicit list of dual points:
/// `fhat(xi) = w * sum_t f(t) conj(<t, xi>)`.
pub fn fourier_at(f: &Signal, points: &[DualElement]) -> Result<DualSignal> {
    let g = f.group().clone();
    let dual = g.dual();
    let w = f.weight();
    let mut values = Vec::with_capacity(points.len());
    for xi in points {
        let mut acc = Complex64::new(0.0, 0.0);
        for (t, v) in f.support().iter().zip(f.values()) {
            acc += v * pairing(&g, t, xi)?.conj();
        }
        values.push(w * acc);
    }
    Signal::new(dual, points.to_vec(), values, f.weights().swapped())
}

/// Fourier transform on a group with finite dual, evaluated at every dual
/// point. Errors with [`Error::InfiniteDual`] when the dual is infinite;
/// use [`fourier_at`] with an explicit point list in that case.
pub fn fourier(f: &Signal) -> Result<DualSignal> {
    let dual = f.group().dual();
    let points = dual.elements().map_err(|_| Error::InfiniteDual)?;
    fourier_at(f, &points)
}

/// Inverse transform evaluated on an explicit list of primal points:
/// `f(t) = w_dual * sum_xi F(xi) <t, xi>`.
pub fn inverse_fourier_at(fhat: &DualSignal, points: &[Element]) -> Result<Signal> {
    // `fhat` lives on the dual group; the primal group is its dual.
    let dual = fhat.group().clone();
    let primal = dual.dual();
    let w = fhat.weight();
    let mut values = Vec::with_capacity(points.len());
    for t in points {
        let mut acc = Complex64::new(0.0, 0.0);
        for (xi, v) in fhat.support().iter().zip(fhat.values()) {
            // <t, xi> with t in the primal group and xi in its dual.
            acc += v * pairing(&primal, t, xi)?;
        }
        values.push(w * acc);
    }
    Signal::new(primal, points.to_vec(), values, fhat.weights().swapped())
}

/// Inverse transform on a finite primal group, evaluated everywhere.
pub fn inverse_fourier(fhat: &DualSignal) -> Result<Signal> {
    let primal = fhat.group().dual();
    let points = primal.elements().map_err(|_| Error::InfiniteDual)?;
    inverse_fourier_at(fhat, &points)
}

/// Reconstructs the unique `PW_{H_perp}` function from its values on a
/// section of `G/H`: `f = sum_c f(c) chi_{H+c}`.
///
/// `samples[i]` is the value at `section.representatives()[i]`. The section
/// must cover the quotient (`|section| * |H| = |G|` on finite groups).
pub fn pw_sample_reconstruct(section: &CosetSection, samples: &[Complex64]) -> Result<Signal> {
    let h = section.subgroup();
    let g = h.parent().clone();
    if samples.len() != section.len() {
        return Err(Error::NotASection);
    }
    let order = g.order().ok_or(Error::InfiniteQuotient)?;
    let h_elems = h
        .elements()
        .ok_or(Error::UnsupportedInfiniteSubgroup)?
        .to_vec();
    if section.len() * h_elems.len() != order {
        return Err(Error::NotASection);
    }
    let weights = HaarWeights::for_subgroup(&g, h)?;
    let mut support = Vec::with_capacity(order);
    let mut values = Vec::with_capacity(order);
    for (c, sample) in section.representatives().iter().zip(samples) {
        for x in &h_elems {
            support.push(group_op(&g, c, x)?);
            values.push(*sample);
        }
    }
    Signal::new(g, support, values, weights)
}

/// Verdict of the uniqueness-set rank oracle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UniquenessOutcome {
    pub is_unique: bool,
    pub rank: usize,
    pub condition: f64,
}

/// Decides whether `upsilon` is a uniqueness set for `PW_Omega(g)` by the
/// column rank of the character evaluation matrix `(<u, xi>)` with rows
/// indexed by `upsilon` and columns by `omega`. Exact on finite groups,
/// where `PW_Omega` is the span of the characters in `Omega`; rank is
/// decided by singular values above `1e-9` times the largest.
pub fn uniqueness_rank_oracle(
    g: &GroupSpec,
    upsilon: &[Element],
    omega: &SpectrumSet,
) -> Result<UniquenessOutcome> {
    if omega.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if upsilon.is_empty() {
        return Err(Error::EmptySet("evaluation points"));
    }
    let m = character_matrix(g, upsilon, omega.elements())?;
    let (rank, _) = numeric::rank_and_condition(&m, numeric::RANK_TOL);
    // Condition of the column space: sigma_1 / sigma_{|Omega|}.
    let sv = numeric::singular_values(&m);
    let k = omega.len();
    let condition = if rank >= k && sv.len() >= k && sv[k - 1] > 0.0 {
        sv[0] / sv[k - 1]
    } else {
        f64::INFINITY
    };
    Ok(UniquenessOutcome {
        is_unique: rank == k,
        rank,
        condition,
    })
}

/// Evaluation matrix `(<u_i, xi_j>)`.
pub(crate) fn character_matrix(
    g: &GroupSpec,
    points: &[Element],
    spectrum: &[DualElement],
) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::<Complex64>::zeros(points.len(), spectrum.len());
    for (i, u) in points.iter().enumerate() {
        for (j, xi) in spectrum.iter().enumerate() {
            m[(i, j)] = pairing(g, u, xi)?;
        }
    }
    Ok(m)
}
