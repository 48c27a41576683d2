//! The two random window constructions: the Steinhaus window on groups
//! with a designated compact-open subgroup, built coset by coset from
//! scaled unit-modulus draws, and the Gaussian window on discrete groups
//! with the inductive translation-index selection.
//!
//! All randomness comes from counter-based streams derived from a master
//! seed, so windows are reproducible and draws for distinct `(mu, k)` are
//! independent by construction. The almost-sure statements behind the
//! constructions are exercised as seeded diagnostics: the empirical
//! averages of the draw products converge to their limits, and the
//! translated-autocorrelation systems span with high seeded pass rates.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{
    annihilator, group_neg, group_sub, pairing, Coord, CosetSection, DualElement,
    Element, Factor, GroupSpec, HaarWeights, SubgroupData,
};
use crate::harmonic::Signal;

/// Counter-based random streams: a SplitMix-style finalizer applied to a
/// (seed, stream, counter) triple. Deterministic across runs and
/// platforms; distinct triples give independent-quality draws.
pub(crate) mod streams {
    const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

    fn mix64(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub(crate) fn stream_u64(seed: u64, stream: u64, counter: u64) -> u64 {
        let a = mix64(seed.wrapping_add(GOLDEN));
        let b = mix64(a ^ stream.wrapping_add(GOLDEN));
        mix64(b ^ counter.wrapping_mul(GOLDEN).wrapping_add(GOLDEN))
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub(crate) fn unit_uniform(seed: u64, stream: u64, counter: u64) -> f64 {
        (stream_u64(seed, stream, counter) >> 11) as f64 * 2f64.powi(-53)
    }

    /// One standard normal pair via Box-Muller; consumes counters
    /// `2*counter` and `2*counter + 1` of the stream.
    pub(crate) fn std_normal_pair(seed: u64, stream: u64, counter: u64) -> (f64, f64) {
        let bits1 = stream_u64(seed, stream, counter.wrapping_mul(2));
        let bits2 = stream_u64(seed, stream, counter.wrapping_mul(2).wrapping_add(1));
        // u1 in (0, 1] keeps the logarithm finite.
        let u1 = ((bits1 >> 11) + 1) as f64 * 2f64.powi(-53);
        let u2 = (bits2 >> 11) as f64 * 2f64.powi(-53);
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        (r * theta.cos(), r * theta.sin())
    }

    /// Derives an independent master seed for a named purpose.
    pub(crate) fn derive_seed(seed: u64, tag: u64) -> u64 {
        stream_u64(seed, tag ^ 0x5eed_5eed_5eed_5eed, 0)
    }
}

/// Derives an independent master seed for a named purpose (window draws,
/// signal draws, noise draws) from one run seed.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    streams::derive_seed(seed, tag)
}

/// Coefficient profile `{a_mu}` over the characters of `H`, enumerated by
/// a section of `G-hat / H-perp`. All entries are positive and satisfy the
/// strict dominance `a_0^2 > sum_{mu != 0} a_mu^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffProfile {
    dual_section: CosetSection,
    a: Vec<f64>,
    zero_index: usize,
}

impl CoeffProfile {
    pub fn new(dual_section: CosetSection, a: Vec<f64>) -> Result<CoeffProfile> {
        if a.len() != dual_section.len() {
            return Err(Error::InvalidCoeffProfile(
                "coefficient count does not match the dual section".into(),
            ));
        }
        if a.iter().any(|&v| !v.is_finite() || v <= 0.0) {
            return Err(Error::InvalidCoeffProfile(
                "coefficients must be positive and finite".into(),
            ));
        }
        let dual_zero = dual_section.subgroup().parent().zero();
        let zero_index = dual_section
            .coset_index_of(&dual_zero)?
            .ok_or_else(|| Error::InvalidCoeffProfile("section misses the zero coset".into()))?;
        let rest: f64 = a
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != zero_index)
            .map(|(_, v)| v * v)
            .sum();
        if a[zero_index] * a[zero_index] <= rest {
            return Err(Error::InvalidCoeffProfile(format!(
                "a_0^2 = {:.6} must strictly dominate the tail sum {:.6}",
                a[zero_index] * a[zero_index],
                rest
            )));
        }
        Ok(CoeffProfile {
            dual_section,
            a,
            zero_index,
        })
    }

    /// Enumeration of the characters of `H` as dual-group representatives.
    pub fn dual_reps(&self) -> &[DualElement] {
        self.dual_section.representatives()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.a
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn max_coeff(&self) -> f64 {
        self.a.iter().cloned().fold(0.0, f64::max)
    }

    /// Index of the character represented by `xi` (any member of its
    /// `H-perp` coset).
    pub fn index_of(&self, xi: &DualElement) -> Result<usize> {
        self.dual_section
            .coset_index_of(xi)?
            .ok_or_else(|| Error::InvalidInput(format!("{xi} is not enumerated by the profile")))
    }

    /// Index of the difference character `rep_i - rep_j`.
    pub fn sub_index(&self, i: usize, j: usize) -> Result<usize> {
        let dual = self.dual_section.subgroup().parent().clone();
        let d = group_sub(&dual, &self.dual_reps()[i], &self.dual_reps()[j])?;
        self.index_of(&d)
    }

    /// Index of `-rep_i`.
    pub fn neg_index(&self, i: usize) -> Result<usize> {
        let dual = self.dual_section.subgroup().parent().clone();
        let n = group_neg(&dual, &self.dual_reps()[i])?;
        self.index_of(&n)
    }

    pub fn dual_section(&self) -> &CosetSection {
        &self.dual_section
    }

    /// Serializable summary for provenance records.
    pub fn summary(&self) -> CoeffProfileSummary {
        CoeffProfileSummary {
            reps: self.dual_reps().to_vec(),
            a: self.a.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoeffProfileSummary {
    pub reps: Vec<DualElement>,
    pub a: Vec<f64>,
}

/// The default profile: `a_0 = 1` and `a_mu = 1 / (2 sqrt(|H-hat| - 1))`
/// for `mu != 0`, so the tail sum is exactly `1/4 < 1`.
pub fn default_coeffs(dual_section: &CosetSection) -> Result<CoeffProfile> {
    let m = dual_section.len();
    if m == 0 {
        return Err(Error::EmptySet("dual section"));
    }
    let dual_zero = dual_section.subgroup().parent().zero();
    let zero_index = dual_section
        .coset_index_of(&dual_zero)?
        .ok_or_else(|| Error::InvalidCoeffProfile("section misses the zero coset".into()))?;
    let tail = if m > 1 {
        1.0 / (2.0 * ((m - 1) as f64).sqrt())
    } else {
        1.0
    };
    let a: Vec<f64> = (0..m)
        .map(|i| if i == zero_index { 1.0 } else { tail })
        .collect();
    CoeffProfile::new(dual_section.clone(), a)
}

/// Seeded Steinhaus draws `lambda_{mu, k}` with `|lambda_{mu, k}| = a_mu`;
/// distinct `(mu, k)` pairs come from independent counter-based streams.
#[derive(Debug, Clone)]
pub struct SteinhausDraw<'p> {
    seed: u64,
    profile: &'p CoeffProfile,
}

impl<'p> SteinhausDraw<'p> {
    pub fn new(profile: &'p CoeffProfile, seed: u64) -> SteinhausDraw<'p> {
        SteinhausDraw { seed, profile }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Modulus (exactly `a_mu`) and phase in turns of `lambda_{mu, k}`.
    pub fn lambda_polar(&self, mu_index: usize, k: usize) -> (f64, f64) {
        let u = streams::unit_uniform(self.seed, mu_index as u64, k as u64);
        (self.profile.coefficients()[mu_index], u)
    }

    pub fn lambda(&self, mu_index: usize, k: usize) -> Complex64 {
        let (m, turns) = self.lambda_polar(mu_index, k);
        Complex64::from_polar(m, 2.0 * std::f64::consts::PI * turns)
    }
}

/// Seeded standard-normal window values `gamma_k`, one per enumeration
/// index.
#[derive(Debug, Clone, Copy)]
pub struct GaussianWindowDraw {
    seed: u64,
}

impl GaussianWindowDraw {
    pub fn new(seed: u64) -> GaussianWindowDraw {
        GaussianWindowDraw { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn gamma(&self, k: usize) -> f64 {
        streams::std_normal_pair(self.seed, 0, k as u64).0
    }
}

/// Provenance record attached to serialized windows.
#[derive(Debug, Clone, Serialize)]
pub struct WindowProvenance {
    pub construction: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<CoeffProfileSummary>,
}

/// The random Steinhaus window
/// `g = sum_{eta, k} lambda_{eta, k} T_{-x_k} eta chi_{H - x_k}`:
/// on the coset `H - x_k`, `g(y) = sum_eta lambda_{eta, k} eta(y + x_k)`.
/// The support is the union of the cosets listed in `section`; the
/// characters of `H` are enumerated by the profile's dual section.
pub fn steinhaus_window(
    g: &GroupSpec,
    h: &SubgroupData,
    section: &CosetSection,
    coeffs: &CoeffProfile,
    seed: u64,
) -> Result<Signal> {
    if h.parent() != g || section.subgroup() != h {
        return Err(Error::GroupMismatch);
    }
    let h_elems = h
        .elements()
        .ok_or(Error::UnsupportedInfiniteSubgroup)?
        .to_vec();
    for e in &h_elems {
        for (i, c) in e.coords().iter().enumerate() {
            let bad = match c {
                Coord::Int(v) => *v != 0,
                Coord::Rot(r) => r.numer() != &0,
                Coord::Residue(_) => false,
            };
            if bad {
                return Err(Error::InvalidInput(format!(
                    "subgroup coordinate {i} leaves the finite factors"
                )));
            }
        }
    }
    // The profile must enumerate H-hat = G-hat / H-perp.
    let perp = annihilator(g, h)?;
    if coeffs.dual_section().subgroup() != &perp || coeffs.len() != h_elems.len() {
        return Err(Error::InvalidCoeffProfile(
            "profile section does not enumerate the characters of H".into(),
        ));
    }
    let weights = HaarWeights::for_subgroup(g, h)?;
    let draw = SteinhausDraw::new(coeffs, seed);
    let reps = coeffs.dual_reps().to_vec();
    let mut support = Vec::with_capacity(section.len() * h_elems.len());
    let mut values = Vec::with_capacity(section.len() * h_elems.len());
    for (k, x_k) in section.representatives().iter().enumerate() {
        for y0 in &h_elems {
            // y = y0 - x_k runs over the coset H - x_k; eta(y + x_k) = <y0, rep_eta>.
            let y = group_sub(g, y0, x_k)?;
            let mut val = Complex64::new(0.0, 0.0);
            for (mu, rep) in reps.iter().enumerate() {
                val += draw.lambda(mu, k) * pairing(g, y0, rep)?;
            }
            support.push(y);
            values.push(val);
        }
    }
    Signal::new(g.clone(), support, values, weights)
}

/// Spiral index of an integer: 0, 1, -1, 2, -2, ... map to 0, 1, 2, 3, 4.
fn spiral_rank(v: i64) -> u64 {
    if v > 0 {
        (2 * v - 1) as u64
    } else {
        (-2 * v) as u64
    }
}

/// Default enumeration of a discrete group: finite factors in full,
/// integer-line factors in spiral order `0, 1, -1, 2, -2, ...`, elements
/// ordered by their largest per-line spiral rank and canonically within a
/// ring. Errors on torus factors.
pub fn spiral_enumeration(g: &GroupSpec, len: usize) -> Result<Vec<Element>> {
    if g.factors().iter().any(|f| matches!(f, Factor::Torus)) {
        return Err(Error::InvalidInput(
            "spiral enumeration is defined for discrete groups only".into(),
        ));
    }
    let finite_count: usize = g
        .factors()
        .iter()
        .filter_map(|f| f.order().map(|n| n as usize))
        .product();
    let line_count = g
        .factors()
        .iter()
        .filter(|f| matches!(f, Factor::IntegerLine))
        .count();
    if line_count == 0 {
        let mut all = g.elements()?;
        all.truncate(len);
        return Ok(all);
    }
    // Smallest ring bound B with finite_count * B^lines >= len.
    let mut bound: u64 = 1;
    while finite_count * (bound as usize).pow(line_count as u32) < len {
        bound += 1;
    }
    let mut elems: Vec<Element> = vec![g.zero()];
    for (slot, f) in g.factors().iter().enumerate() {
        let coords: Vec<Coord> = match f {
            Factor::Cyclic(n) => (0..*n).map(Coord::Residue).collect(),
            Factor::IntegerLine => (0..bound)
                .map(|r| {
                    // Inverse of spiral_rank.
                    let v = if r % 2 == 1 {
                        r.div_ceil(2) as i64
                    } else {
                        -((r / 2) as i64)
                    };
                    Coord::Int(v)
                })
                .collect(),
            Factor::Torus => unreachable!("checked above"),
        };
        let mut next = Vec::with_capacity(elems.len() * coords.len());
        for e in &elems {
            for c in &coords {
                let mut cs = e.coords().to_vec();
                cs[slot] = *c;
                next.push(Element::new(g, cs)?);
            }
        }
        elems = next;
    }
    elems.sort_by(|a, b| {
        let ring = |e: &Element| {
            e.coords()
                .iter()
                .map(|c| match c {
                    Coord::Int(v) => spiral_rank(*v),
                    _ => 0,
                })
                .max()
                .unwrap_or(0)
        };
        ring(a).cmp(&ring(b)).then_with(|| a.cmp(b))
    });
    elems.truncate(len);
    if elems.len() < len {
        return Err(Error::EnumerationExhausted {
            selected: elems.len(),
            requested: len,
        });
    }
    Ok(elems)
}

/// Greedy-inductive selection of translation indices `j_1, ..., j_n` from
/// an enumeration: a candidate `j` is accepted when, for every row point
/// `y_k` (the first `n` enumeration entries), every shift `s`, and every
/// previously accepted `j_m`, the entry arguments `y_k - y_j` and
/// `y_k - s - y_j` avoid the arguments `y_k - y_{j_m}` and
/// `y_k - s - y_{j_m}`. This makes the entries of the translate matrices
/// built from the selected columns draw on disjoint window values row by
/// row, the avoidance behind the independence of the matrix entries.
pub fn select_translation_indices(
    g: &GroupSpec,
    enumeration: &[Element],
    n: usize,
    shifts: &[Element],
) -> Result<Vec<usize>> {
    if n == 0 {
        return Ok(vec![]);
    }
    {
        let mut sorted = enumeration.to_vec();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != enumeration.len() {
            return Err(Error::InvalidInput(
                "enumeration entries must be pairwise distinct".into(),
            ));
        }
    }
    let rows = &enumeration[..n.min(enumeration.len())];
    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    for j in 0..enumeration.len() {
        let yj = &enumeration[j];
        let mut feasible = true;
        'check: for &m in &chosen {
            let ym = &enumeration[m];
            for s in shifts {
                for yk in rows {
                    let a1 = group_sub(g, yk, yj)?;
                    let a2 = group_sub(g, &group_sub(g, yk, s)?, yj)?;
                    let b1 = group_sub(g, yk, ym)?;
                    let b2 = group_sub(g, &group_sub(g, yk, s)?, ym)?;
                    if a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2 {
                        feasible = false;
                        break 'check;
                    }
                }
            }
        }
        if feasible {
            chosen.push(j);
            if chosen.len() == n {
                return Ok(chosen);
            }
        }
    }
    Err(Error::EnumerationExhausted {
        selected: chosen.len(),
        requested: n,
    })
}

/// The random Gaussian window on a discrete group: `g(y_k) = gamma_k`
/// standard normal, real-valued, with counting Haar weight.
pub fn gaussian_discrete_window(
    g: &GroupSpec,
    enumeration: &[Element],
    seed: u64,
) -> Result<Signal> {
    let draw = GaussianWindowDraw::new(seed);
    let values: Vec<Complex64> = (0..enumeration.len())
        .map(|k| Complex64::new(draw.gamma(k), 0.0))
        .collect();
    Signal::new(
        g.clone(),
        enumeration.to_vec(),
        values,
        HaarWeights::counting(),
    )
}

/// Empirical averages `1/N sum_k lambda_{mu,k} conj(lambda_{mu-eta,k})
/// conj(lambda_{0,k}) lambda_{-eta0,k}` recorded at the requested
/// checkpoints. The limit is `a_0^2 a_{-eta0}^2` when `mu = 0, eta = eta0`
/// and zero otherwise (for `eta0 != 0`).
pub fn lln_quartic_trajectory(
    profile: &CoeffProfile,
    seed: u64,
    mu: &DualElement,
    eta: &DualElement,
    eta0: &DualElement,
    checkpoints: &[usize],
) -> Result<Vec<Complex64>> {
    let dual = profile.dual_section().subgroup().parent().clone();
    let i_mu = profile.index_of(mu)?;
    let i_mu_eta = profile.index_of(&group_sub(&dual, mu, eta)?)?;
    let i_zero = profile.zero_index();
    let i_neg_eta0 = profile.index_of(&group_neg(&dual, eta0)?)?;
    let a = profile.coefficients();
    let modulus = a[i_mu] * a[i_mu_eta] * a[i_zero] * a[i_neg_eta0];
    lln_run(seed, modulus, checkpoints, |k| {
        let u1 = streams::unit_uniform(seed, i_mu as u64, k);
        let u2 = streams::unit_uniform(seed, i_mu_eta as u64, k);
        let u3 = streams::unit_uniform(seed, i_zero as u64, k);
        let u4 = streams::unit_uniform(seed, i_neg_eta0 as u64, k);
        // Grouped so that coinciding indices cancel exactly.
        (u1 - u3) + (u4 - u2)
    })
}

/// The quartic average's limit.
pub fn lln_quartic_limit(
    profile: &CoeffProfile,
    mu: &DualElement,
    eta: &DualElement,
    eta0: &DualElement,
) -> Result<Complex64> {
    let dual = profile.dual_section().subgroup().parent().clone();
    let i_eta0 = profile.index_of(eta0)?;
    if i_eta0 == profile.zero_index() {
        return Err(Error::InvalidInput("eta0 must be a nonzero character".into()));
    }
    let i_mu = profile.index_of(mu)?;
    let i_eta = profile.index_of(eta)?;
    let a = profile.coefficients();
    if i_mu == profile.zero_index() && i_eta == i_eta0 {
        let a0 = a[profile.zero_index()];
        let an = a[profile.index_of(&group_neg(&dual, eta0)?)?];
        Ok(Complex64::new((a0 * a0) * (an * an), 0.0))
    } else {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// Empirical averages `1/N sum_k lambda_{mu,k} conj(lambda_{mu-eta,k})`;
/// the limit is `a_mu^2` when `eta = 0` and zero otherwise.
pub fn lln_pair_trajectory(
    profile: &CoeffProfile,
    seed: u64,
    mu: &DualElement,
    eta: &DualElement,
    checkpoints: &[usize],
) -> Result<Vec<Complex64>> {
    let dual = profile.dual_section().subgroup().parent().clone();
    let i_mu = profile.index_of(mu)?;
    let i_mu_eta = profile.index_of(&group_sub(&dual, mu, eta)?)?;
    let a = profile.coefficients();
    let modulus = a[i_mu] * a[i_mu_eta];
    lln_run(seed, modulus, checkpoints, |k| {
        let u1 = streams::unit_uniform(seed, i_mu as u64, k);
        let u2 = streams::unit_uniform(seed, i_mu_eta as u64, k);
        u1 - u2
    })
}

/// The pair average's limit.
pub fn lln_pair_limit(
    profile: &CoeffProfile,
    mu: &DualElement,
    eta: &DualElement,
) -> Result<Complex64> {
    let i_mu = profile.index_of(mu)?;
    let i_eta = profile.index_of(eta)?;
    let a = profile.coefficients();
    if i_eta == profile.zero_index() {
        Ok(Complex64::new(a[i_mu] * a[i_mu], 0.0))
    } else {
        Ok(Complex64::new(0.0, 0.0))
    }
}

fn lln_run(
    _seed: u64,
    modulus: f64,
    checkpoints: &[usize],
    mut phase_turns: impl FnMut(u64) -> f64,
) -> Result<Vec<Complex64>> {
    let n_max = checkpoints.iter().copied().max().unwrap_or(0);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..n_max as u64 {
        let turns = phase_turns(k);
        let angle = 2.0 * std::f64::consts::PI * turns;
        sum += Complex64::new(modulus * angle.cos(), modulus * angle.sin());
        let n = (k + 1) as usize;
        if checkpoints.contains(&n) {
            out.push(sum / n as f64);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{coset_section, subgroup_closure};
    use crate::numeric;
    use crate::stft::cgs_matrix;

    fn z4_setup() -> (GroupSpec, SubgroupData, CosetSection, CoeffProfile) {
        let g = GroupSpec::cyclic(4);
        let h = subgroup_closure(&g, &[Element::from_ints(&g, &[2]).unwrap()]).unwrap();
        let section = coset_section(&g, &h).unwrap();
        let perp = annihilator(&g, &h).unwrap();
        let dual_section = coset_section(&g.dual(), &perp).unwrap();
        let coeffs = default_coeffs(&dual_section).unwrap();
        (g, h, section, coeffs)
    }

    fn z4xz9_setup() -> (GroupSpec, SubgroupData, CosetSection, CoeffProfile) {
        let g = GroupSpec::new(vec![Factor::Cyclic(4), Factor::Cyclic(9)]).unwrap();
        let h = subgroup_closure(
            &g,
            &[
                Element::from_ints(&g, &[2, 0]).unwrap(),
                Element::from_ints(&g, &[0, 3]).unwrap(),
            ],
        )
        .unwrap();
        let section = coset_section(&g, &h).unwrap();
        let perp = annihilator(&g, &h).unwrap();
        let dual_section = coset_section(&g.dual(), &perp).unwrap();
        let coeffs = default_coeffs(&dual_section).unwrap();
        (g, h, section, coeffs)
    }

    #[test]
    fn default_profile_values() {
        let (_g, _h, _section, coeffs) = z4_setup();
        // |H-hat| = 2: a = (1, 1/2).
        assert_eq!(coeffs.len(), 2);
        assert_eq!(coeffs.coefficients()[coeffs.zero_index()], 1.0);
        let other = (0..2).find(|&i| i != coeffs.zero_index()).unwrap();
        assert_eq!(coeffs.coefficients()[other], 0.5);

        // |H-hat| = 1: single coefficient.
        let g = GroupSpec::cyclic(3);
        let h = crate::group::SubgroupData::full(&g);
        let perp = annihilator(&g, &h).unwrap();
        let ds = coset_section(&g.dual(), &perp).unwrap();
        // Full H makes H-perp trivial, so the dual section has |G| reps:
        // instead take H trivial to get a single character class.
        assert_eq!(ds.len(), 3);
        let trivial = crate::group::SubgroupData::trivial(&g);
        let perp = annihilator(&g, &trivial).unwrap();
        let ds = coset_section(&g.dual(), &perp).unwrap();
        assert_eq!(ds.len(), 1);
        let c = default_coeffs(&ds).unwrap();
        assert_eq!(c.coefficients(), &[1.0]);
    }

    #[test]
    fn profile_rejects_boundary() {
        let (_g, _h, _section, coeffs) = z4_setup();
        let ds = coeffs.dual_section().clone();
        // a_0^2 == tail: rejected (strict inequality required).
        let bad = CoeffProfile::new(ds.clone(), vec![1.0; 2]);
        assert!(bad.is_err());
        let good = CoeffProfile::new(ds, vec![1.0, 0.99]);
        assert!(good.is_ok());
    }

    #[test]
    fn steinhaus_bounds_and_determinism() {
        let (g, h, section, coeffs) = z4xz9_setup();
        let w1 = steinhaus_window(&g, &h, &section, &coeffs, 42).unwrap();
        let w2 = steinhaus_window(&g, &h, &section, &coeffs, 42).unwrap();
        assert_eq!(w1, w2);
        let w3 = steinhaus_window(&g, &h, &section, &coeffs, 43).unwrap();
        assert_ne!(w1, w3);

        // Support is the whole group (the section covers every coset) and
        // |g| <= sum a_mu pointwise.
        assert_eq!(w1.support().len(), g.order().unwrap());
        let bound: f64 = coeffs.coefficients().iter().sum();
        for v in w1.values() {
            assert!(v.norm() <= bound + 1e-12);
        }
    }

    #[test]
    fn steinhaus_single_character_class() {
        // H = {0}: one character class, so g is a unimodular constant per coset.
        let g = GroupSpec::cyclic(3);
        let h = crate::group::SubgroupData::trivial(&g);
        let section = coset_section(&g, &h).unwrap();
        let perp = annihilator(&g, &h).unwrap();
        let ds = coset_section(&g.dual(), &perp).unwrap();
        let coeffs = default_coeffs(&ds).unwrap();
        let w = steinhaus_window(&g, &h, &section, &coeffs, 7).unwrap();
        for v in w.values() {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn translate_expansion_identity() {
        // T_{x_k} g_s restricted to H equals
        // sum_eta ( sum_mu lambda_{mu,k} conj(lambda_{mu-eta,k}) mu(-s) ) eta.
        let (g, h, section, coeffs) = z4xz9_setup();
        for seed in [1u64, 9, 77] {
            let window = steinhaus_window(&g, &h, &section, &coeffs, seed).unwrap();
            let draw = SteinhausDraw::new(&coeffs, seed);
            for (k, x_k) in section.representatives().iter().enumerate().take(3) {
                for s in h.elements().unwrap().iter().take(4) {
                    let neg_s = group_neg(&g, s).unwrap();
                    for t in h.elements().unwrap() {
                        // Direct: conj(g(t - x_k)) g(t - s - x_k).
                        let t1 = group_sub(&g, t, x_k).unwrap();
                        let t2 = group_sub(&g, &group_sub(&g, t, s).unwrap(), x_k).unwrap();
                        let direct =
                            window.value_at(&t1).conj() * window.value_at(&t2);
                        // Expansion over eta.
                        let mut expansion = Complex64::new(0.0, 0.0);
                        for (eta, eta_rep) in coeffs.dual_reps().iter().enumerate() {
                            let mut c = Complex64::new(0.0, 0.0);
                            for (mu, mu_rep) in coeffs.dual_reps().iter().enumerate() {
                                let i_mu_eta = coeffs.sub_index(mu, eta).unwrap();
                                c += draw.lambda(mu, k)
                                    * draw.lambda(i_mu_eta, k).conj()
                                    * pairing(&g, &neg_s, mu_rep).unwrap();
                            }
                            expansion += c * pairing(&g, t, eta_rep).unwrap();
                        }
                        assert!(
                            (direct - expansion).norm() <= 1e-9,
                            "seed {seed}, k {k}, s {s}, t {t}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn completeness_realization_seeded() {
        // For every s in H the translate matrix has rank |H| with a high
        // seeded pass rate.
        let (g, h, section, coeffs) = z4xz9_setup();
        let k_set = h.elements().unwrap().to_vec();
        let lambda: Vec<Element> = section.representatives().to_vec();
        let mut passes = 0;
        for seed in 0..100u64 {
            let window = steinhaus_window(&g, &h, &section, &coeffs, seed).unwrap();
            let ok = k_set.iter().all(|s| {
                let m = cgs_matrix(&window, s, &k_set, &lambda).unwrap();
                let (rank, _) = numeric::rank_and_condition(&m, numeric::RANK_TOL);
                rank == k_set.len()
            });
            if ok {
                passes += 1;
            }
        }
        assert!(passes >= 95, "only {passes}/100 seeds spanned");
    }

    #[test]
    fn spiral_enumeration_of_z() {
        let z = GroupSpec::integer_line();
        let e = spiral_enumeration(&z, 7).unwrap();
        let want: Vec<Element> = [0i64, 1, -1, 2, -2, 3, -3]
            .iter()
            .map(|&v| Element::from_ints(&z, &[v]).unwrap())
            .collect();
        assert_eq!(e, want);
    }

    #[test]
    fn spiral_enumeration_of_product() {
        // Finite factors enumerate in full inside each ring.
        let g = GroupSpec::new(vec![Factor::Cyclic(2), Factor::IntegerLine]).unwrap();
        let e = spiral_enumeration(&g, 6).unwrap();
        let want: Vec<Element> = [(0, 0), (1, 0), (0, 1), (1, 1), (0, -1), (1, -1)]
            .iter()
            .map(|&(a, b)| Element::from_ints(&g, &[a, b]).unwrap())
            .collect();
        assert_eq!(e, want);
    }

    #[test]
    fn select_indices_frozen_example() {
        // Z, spiral enumeration, n = 4, shifts {0, 1, -1}: accepted values
        // are 0, 2, -2, 4 at positions 0, 3, 4, 7.
        let z = GroupSpec::integer_line();
        let enumeration = spiral_enumeration(&z, 32).unwrap();
        let shifts: Vec<Element> = [0i64, 1, -1]
            .iter()
            .map(|&v| Element::from_ints(&z, &[v]).unwrap())
            .collect();
        let idx = select_translation_indices(&z, &enumeration, 4, &shifts).unwrap();
        assert_eq!(idx, vec![0, 3, 4, 7]);

        // Brute-force collision check on the returned indices: per row and
        // shift, the entry-argument pairs are disjoint across columns.
        let rows = &enumeration[..4];
        for s in &shifts {
            for yk in rows {
                let mut args: Vec<(Element, Element)> = Vec::new();
                for &j in &idx {
                    let a1 = group_sub(&z, yk, &enumeration[j]).unwrap();
                    let a2 = group_sub(&z, &group_sub(&z, yk, s).unwrap(), &enumeration[j])
                        .unwrap();
                    for (b1, b2) in &args {
                        assert!(a1 != *b1 && a1 != *b2 && a2 != *b1 && a2 != *b2);
                    }
                    args.push((a1, a2));
                }
            }
        }
    }

    #[test]
    fn select_indices_zero_shift_only() {
        let z = GroupSpec::integer_line();
        let enumeration = spiral_enumeration(&z, 16).unwrap();
        let shifts = vec![Element::from_ints(&z, &[0]).unwrap()];
        let idx = select_translation_indices(&z, &enumeration, 5, &shifts).unwrap();
        // With only the zero shift any distinct indices pass; greedy takes
        // the first five.
        assert_eq!(idx, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn select_indices_exhaustion() {
        let z = GroupSpec::integer_line();
        let enumeration = spiral_enumeration(&z, 5).unwrap();
        let shifts: Vec<Element> = [0i64, 1, -1, 2, -2]
            .iter()
            .map(|&v| Element::from_ints(&z, &[v]).unwrap())
            .collect();
        let err = select_translation_indices(&z, &enumeration, 3, &shifts);
        assert!(matches!(err, Err(Error::EnumerationExhausted { .. })));
    }

    #[test]
    fn gaussian_window_determinism_and_realness() {
        let z = GroupSpec::integer_line();
        let enumeration = spiral_enumeration(&z, 21).unwrap();
        let w1 = gaussian_discrete_window(&z, &enumeration, 5).unwrap();
        let w2 = gaussian_discrete_window(&z, &enumeration, 5).unwrap();
        assert_eq!(w1, w2);
        let w3 = gaussian_discrete_window(&z, &enumeration, 6).unwrap();
        assert_ne!(w1, w3);
        for v in w1.values() {
            assert_eq!(v.im, 0.0);
        }
        // Extending the enumeration preserves the prefix draws.
        let longer = spiral_enumeration(&z, 41).unwrap();
        let w4 = gaussian_discrete_window(&z, &longer, 5).unwrap();
        for (k, y) in enumeration.iter().enumerate() {
            let _ = k;
            assert_eq!(w1.value_at(y), w4.value_at(y));
        }
    }

    #[test]
    fn translate_matrices_invertible_across_seeds() {
        // A^s_N built from selected indices is invertible (finite condition)
        // for nearly all seeds at N = 8.
        let z = GroupSpec::integer_line();
        let n = 8usize;
        let enumeration = spiral_enumeration(&z, 256).unwrap();
        let shifts: Vec<Element> = enumeration[..n].to_vec();
        let idx = select_translation_indices(&z, &enumeration, n, &shifts).unwrap();
        // Window must cover every argument y_k - y_j and y_k - s - y_j.
        let cover = spiral_enumeration(&z, 4096).unwrap();
        let mut ok = 0;
        for seed in 0..50u64 {
            let window = gaussian_discrete_window(&z, &cover, seed).unwrap();
            let all_finite = shifts.iter().all(|s| {
                let mut m = nalgebra::DMatrix::<Complex64>::zeros(n, n);
                for (row, yk) in enumeration[..n].iter().enumerate() {
                    for (col, &j) in idx.iter().enumerate() {
                        let a = group_sub(&z, yk, &enumeration[j]).unwrap();
                        let b = group_sub(&z, &group_sub(&z, yk, s).unwrap(), &enumeration[j])
                            .unwrap();
                        m[(row, col)] =
                            window.value_at(&a) * window.value_at(&b).conj();
                    }
                }
                let (rank, cond) = numeric::rank_and_condition(&m, numeric::RANK_TOL);
                rank == n && cond.is_finite()
            });
            if all_finite {
                ok += 1;
            }
        }
        assert!(ok >= 48, "only {ok}/50 seeds gave invertible matrices");
    }

    #[test]
    fn lln_constant_cases_are_flat() {
        let (_g, _h, _section, coeffs) = z4xz9_setup();
        let dual = coeffs.dual_section().subgroup().parent().clone();
        let zero = dual.zero();
        let eta0 = coeffs.dual_reps()[1].clone();
        let checkpoints = [1usize, 10, 100, 1000];
        let traj =
            lln_quartic_trajectory(&coeffs, 3, &zero, &eta0, &eta0, &checkpoints).unwrap();
        let limit = lln_quartic_limit(&coeffs, &zero, &eta0, &eta0).unwrap();
        assert!(limit.re > 0.0);
        for avg in traj {
            assert!((avg - limit).norm() <= 1e-13 * (1.0 + limit.norm()));
        }

        // Pair case with eta = 0 is constant a_mu^2.
        let mu = coeffs.dual_reps()[2].clone();
        let traj = lln_pair_trajectory(&coeffs, 4, &mu, &zero, &checkpoints).unwrap();
        let limit = lln_pair_limit(&coeffs, &mu, &zero).unwrap();
        for avg in traj {
            assert!((avg - limit).norm() <= 1e-13 * (1.0 + limit.norm()));
        }
    }

    #[test]
    fn lln_zero_cases_decay() {
        let (_g, _h, _section, coeffs) = z4xz9_setup();
        let dual = coeffs.dual_section().subgroup().parent().clone();
        let zero = dual.zero();
        let reps = coeffs.dual_reps().to_vec();
        let eta0 = reps[1].clone();
        let n = 20000usize;
        let bound = 6.0 * coeffs.max_coeff().powi(4) / (n as f64).sqrt();
        // A zero-limit case: mu nonzero, eta = eta0.
        let mu = reps[2].clone();
        let mut passes = 0;
        for seed in 0..100u64 {
            let avg =
                lln_quartic_trajectory(&coeffs, seed, &mu, &eta0, &eta0, &[n]).unwrap()[0];
            if avg.norm() <= bound {
                passes += 1;
            }
        }
        assert!(passes >= 99, "only {passes}/100 seeds within the LLN bound");
        let _ = zero;
    }
}
