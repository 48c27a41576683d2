//! Experiment configuration: a flat TOML file with typed sections, parsed
//! into core objects. Semantic errors name the section and field they come
//! from; TOML syntax errors carry line/column diagnostics from the parser.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use phaseret_core::group::{
    annihilator, coset_section, subgroup_closure, CosetSection, Element, GroupSpec, HaarWeights,
    RawCoord, SubgroupData,
};
use phaseret_core::harmonic::{Signal, SpectrumSet};
use phaseret_core::retrieval::k_minus_k;
use phaseret_core::sets::{default_greedy_pool, greedy_uniqueness_compact};
use phaseret_core::windows::{
    default_coeffs, gaussian_discrete_window, select_translation_indices, spiral_enumeration,
    steinhaus_window, CoeffProfile,
};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub group: GroupSection,
    #[serde(default)]
    pub subgroup: Option<SubgroupSection>,
    #[serde(default)]
    pub chain: Option<ChainSection>,
    #[serde(default)]
    pub k: Option<KSection>,
    #[serde(default)]
    pub window: Option<WindowSection>,
    #[serde(default)]
    pub lambda: Option<PointsSection>,
    #[serde(default)]
    pub gamma: Option<PointsSection>,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub lln: Option<LlnSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSection {
    pub factors: GroupSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubgroupSection {
    pub generators: Vec<Vec<RawCoord>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    /// Generator lists, one per chain member, increasing.
    pub members: Vec<Vec<Vec<RawCoord>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KSection {
    #[serde(default = "default_k_mode")]
    pub mode: String,
    #[serde(default)]
    pub points: Vec<Vec<RawCoord>>,
}

fn default_k_mode() -> String {
    "subgroup".into()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSection {
    pub kind: String,
    /// Size of the translate set for the Gaussian construction.
    #[serde(default)]
    pub translate_count: Option<usize>,
    /// Explicit window support length for the Gaussian construction;
    /// derived from the reach of the experiment when omitted.
    #[serde(default)]
    pub enumeration_len: Option<usize>,
    /// Steinhaus coefficient profile, ordered like the canonical dual
    /// section; the default profile is used when omitted.
    #[serde(default)]
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointsSection {
    pub mode: String,
    #[serde(default)]
    pub points: Vec<Vec<RawCoord>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_seeds")]
    pub seeds: SeedSpec,
    #[serde(default = "default_noise")]
    pub noise_levels: Vec<f64>,
    #[serde(default = "default_error_threshold")]
    pub error_threshold: f64,
    #[serde(default = "default_condition_limit")]
    pub condition_limit: f64,
    /// Output directory; the --out-dir flag takes precedence.
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            seeds: default_seeds(),
            noise_levels: default_noise(),
            error_threshold: default_error_threshold(),
            condition_limit: default_condition_limit(),
            out_dir: None,
        }
    }
}

fn default_seeds() -> SeedSpec {
    SeedSpec::Range { start: 0, count: 10 }
}

fn default_noise() -> Vec<f64> {
    vec![0.0]
}

fn default_error_threshold() -> f64 {
    1e-6
}

fn default_condition_limit() -> f64 {
    1e6
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    List(Vec<u64>),
    Range { start: u64, count: u64 },
}

impl SeedSpec {
    pub fn seeds(&self) -> Vec<u64> {
        match self {
            SeedSpec::List(v) => v.clone(),
            SeedSpec::Range { start, count } => (*start..start + count).collect(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LlnSection {
    #[serde(default = "default_checkpoints")]
    pub checkpoints: Vec<usize>,
    #[serde(default)]
    pub quartic: Vec<QuarticCase>,
    #[serde(default)]
    pub pair: Vec<PairCase>,
}

fn default_checkpoints() -> Vec<usize> {
    vec![100, 1000, 20000]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuarticCase {
    pub mu: Vec<RawCoord>,
    pub eta: Vec<RawCoord>,
    pub eta0: Vec<RawCoord>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairCase {
    pub mu: Vec<RawCoord>,
    pub eta: Vec<RawCoord>,
}

/// A config resolved into core objects, ready to run.
#[derive(Debug)]
pub struct ResolvedExperiment {
    pub group: GroupSpec,
    pub subgroup: SubgroupData,
    pub chain: Option<Vec<SubgroupData>>,
    pub weights: HaarWeights,
    pub k_set: Vec<Element>,
    pub k_minus_k: Vec<Element>,
    pub window_kind: WindowKind,
    pub lambda: Vec<Element>,
    pub gamma: Vec<Element>,
    pub seeds: Vec<u64>,
    pub noise_levels: Vec<f64>,
    pub error_threshold: f64,
    pub condition_limit: f64,
    pub coeffs: Option<CoeffProfile>,
    pub section: Option<CosetSection>,
    pub gaussian_cover: Option<Vec<Element>>,
    pub out_dir: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WindowKind {
    Steinhaus,
    Gaussian,
    Zero,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).context("config parse error")
    }

    /// Resolves sections into core objects, validating cross-references.
    pub fn resolve(&self) -> Result<ResolvedExperiment> {
        let group = self.group.factors.clone();

        // Subgroup or chain.
        let chain: Option<Vec<SubgroupData>> = match &self.chain {
            Some(c) => {
                let mut members = Vec::new();
                for (i, gens) in c.members.iter().enumerate() {
                    let gens = parse_elements(&group, gens)
                        .with_context(|| format!("[chain].members[{i}]"))?;
                    members.push(
                        subgroup_closure(&group, &gens)
                            .with_context(|| format!("[chain].members[{i}]"))?,
                    );
                }
                if members.is_empty() {
                    bail!("[chain].members must be non-empty");
                }
                Some(members)
            }
            None => None,
        };
        let tentative_subgroup = match (&self.subgroup, &chain) {
            (Some(s), _) => {
                let gens =
                    parse_elements(&group, &s.generators).context("[subgroup].generators")?;
                subgroup_closure(&group, &gens).context("[subgroup].generators")?
            }
            (None, Some(c)) => c[0].clone(),
            (None, None) => SubgroupData::trivial(&group),
        };

        // K.
        let k_set: Vec<Element> = match &self.k {
            None => subgroup_elements(&tentative_subgroup)?,
            Some(k) => match k.mode.as_str() {
                "subgroup" => subgroup_elements(&tentative_subgroup)?,
                "explicit" => {
                    if k.points.is_empty() {
                        bail!("[k].points must be non-empty in explicit mode");
                    }
                    parse_elements(&group, &k.points).context("[k].points")?
                }
                other => bail!("[k].mode: unknown mode `{other}`"),
            },
        };
        let kk = k_minus_k(&group, &k_set).context("[k]: difference set")?;

        // With a chain and no explicit subgroup, the working compact-open
        // subgroup is the minimal chain member containing K - K, so the
        // window construction and the sample sets share one subgroup.
        let subgroup = match (&self.subgroup, &chain) {
            (None, Some(c)) => phaseret_core::group::minimal_chain_member(c, &kk)
                .context("[chain]: no member contains K - K")?
                .clone(),
            _ => tentative_subgroup,
        };
        let weights = HaarWeights::for_subgroup(&group, &subgroup)
            .context("[subgroup]: Haar weights require a finite subgroup")?;

        // Window.
        let window_kind = match self.window.as_ref().map(|w| w.kind.as_str()) {
            None | Some("steinhaus") => WindowKind::Steinhaus,
            Some("gaussian") => WindowKind::Gaussian,
            Some("zero") => WindowKind::Zero,
            Some(other) => bail!("[window].kind: unknown kind `{other}`"),
        };

        // Sections used by the auto modes.
        let section = coset_section(&group, &subgroup).ok();
        let dual_section = annihilator(&group, &subgroup)
            .ok()
            .and_then(|perp| coset_section(&group.dual(), &perp).ok());
        let coeffs = match (&window_kind, &dual_section) {
            (WindowKind::Steinhaus, Some(ds)) => {
                let profile = match self.window.as_ref().and_then(|w| w.coefficients.clone()) {
                    Some(a) => CoeffProfile::new(ds.clone(), a)
                        .map_err(|e| anyhow!("[window].coefficients: {e}"))?,
                    None => default_coeffs(ds).context("[window]: coefficient profile")?,
                };
                Some(profile)
            }
            _ => None,
        };

        // Lambda.
        let translate_count = self
            .window
            .as_ref()
            .and_then(|w| w.translate_count)
            .unwrap_or(k_set.len() + 2);
        let lambda_mode = self.lambda.as_ref().map(|l| l.mode.as_str());
        let lambda: Vec<Element> = match lambda_mode {
            None | Some("auto-section") => match lambda_mode {
                None if window_kind == WindowKind::Gaussian => {
                    auto_translates(&group, translate_count, &kk)?
                }
                _ => section
                    .as_ref()
                    .ok_or_else(|| anyhow!("[lambda]: auto-section needs a finite quotient"))?
                    .representatives()
                    .to_vec(),
            },
            Some("auto-translates") => auto_translates(&group, translate_count, &kk)?,
            Some("explicit") => parse_elements(
                &group,
                &self.lambda.as_ref().expect("mode read from it").points,
            )
            .context("[lambda].points")?,
            Some(other) => bail!("[lambda].mode: unknown mode `{other}`"),
        };
        if lambda.is_empty() {
            bail!("[lambda]: empty translate set");
        }

        // Gamma.
        let dual = group.dual();
        let gamma_mode = self.gamma.as_ref().map(|g| g.mode.as_str());
        let gamma: Vec<Element> = match gamma_mode {
            Some("auto-greedy") => {
                let spectrum = SpectrumSet::new(kk.clone()).context("[gamma]: spectrum K - K")?;
                let pool = default_greedy_pool(&dual, spectrum.len())
                    .context("[gamma]: greedy pool")?;
                greedy_uniqueness_compact(&dual, &spectrum, &pool)
                    .context("[gamma]: greedy construction")?
            }
            Some("auto-chain") => {
                let chain = chain
                    .as_ref()
                    .ok_or_else(|| anyhow!("[gamma]: auto-chain requires a [chain] section"))?;
                phaseret_core::sets::chain_uniqueness(&group, chain, &kk)
                    .context("[gamma]: chain construction")?
            }
            Some("explicit") => parse_elements(
                &dual,
                &self.gamma.as_ref().expect("mode read from it").points,
            )
            .context("[gamma].points")?,
            None | Some("auto-section") => match gamma_mode {
                None if window_kind == WindowKind::Gaussian => {
                    let spectrum =
                        SpectrumSet::new(kk.clone()).context("[gamma]: spectrum K - K")?;
                    let pool = default_greedy_pool(&dual, spectrum.len())
                        .context("[gamma]: greedy pool")?;
                    greedy_uniqueness_compact(&dual, &spectrum, &pool)
                        .context("[gamma]: greedy construction")?
                }
                _ => {
                    let perp = annihilator(&group, &subgroup).context("[gamma]: annihilator")?;
                    phaseret_core::sets::section_uniqueness(&dual, &perp)
                        .context("[gamma]: dual section")?
                }
            },
            Some(other) => bail!("[gamma].mode: unknown mode `{other}`"),
        };
        if gamma.is_empty() {
            bail!("[gamma]: empty sample set");
        }

        // Gaussian window cover: reach of every argument the pipeline needs.
        let gaussian_cover = if window_kind == WindowKind::Gaussian {
            let len = match self.window.as_ref().and_then(|w| w.enumeration_len) {
                Some(len) => len,
                None => {
                    let reach = max_abs_int(&k_set) + max_abs_int(&lambda) + max_abs_int(&kk);
                    (2 * reach + 1) as usize
                }
            };
            Some(spiral_enumeration(&group, len).context("[window]: spiral enumeration")?)
        } else {
            None
        };

        let seeds = self.run.seeds.seeds();
        if seeds.is_empty() {
            bail!("[run].seeds must be non-empty");
        }
        Ok(ResolvedExperiment {
            group,
            subgroup,
            chain,
            weights,
            k_set,
            k_minus_k: kk,
            window_kind,
            lambda,
            gamma,
            seeds,
            noise_levels: self.run.noise_levels.clone(),
            error_threshold: self.run.error_threshold,
            condition_limit: self.run.condition_limit,
            coeffs,
            section,
            gaussian_cover,
            out_dir: self.run.out_dir.clone(),
        })
    }
}

impl ResolvedExperiment {
    /// Builds the window for one seed.
    pub fn window(&self, window_seed: u64) -> Result<Signal> {
        match self.window_kind {
            WindowKind::Steinhaus => {
                let section = self
                    .section
                    .as_ref()
                    .ok_or_else(|| anyhow!("[window]: steinhaus needs a finite quotient"))?;
                let coeffs = self
                    .coeffs
                    .as_ref()
                    .ok_or_else(|| anyhow!("[window]: missing coefficient profile"))?;
                Ok(steinhaus_window(
                    &self.group,
                    &self.subgroup,
                    section,
                    coeffs,
                    window_seed,
                )?)
            }
            WindowKind::Gaussian => {
                let cover = self
                    .gaussian_cover
                    .as_ref()
                    .ok_or_else(|| anyhow!("[window]: missing enumeration"))?;
                Ok(gaussian_discrete_window(&self.group, cover, window_seed)?)
            }
            WindowKind::Zero => Ok(Signal::zero(self.group.clone(), self.weights)),
        }
    }
}

fn subgroup_elements(h: &SubgroupData) -> Result<Vec<Element>> {
    h.elements()
        .map(|e| e.to_vec())
        .ok_or_else(|| anyhow!("[k]: mode `subgroup` needs a finite subgroup"))
}

fn parse_elements(group: &GroupSpec, raw: &[Vec<RawCoord>]) -> Result<Vec<Element>> {
    raw.iter()
        .enumerate()
        .map(|(i, coords)| {
            Element::from_raw(group, coords).map_err(|e| anyhow!("entry {i}: {e}"))
        })
        .collect()
}

fn auto_translates(group: &GroupSpec, count: usize, shifts: &[Element]) -> Result<Vec<Element>> {
    // Enumeration long enough for the avoidance constraints: they thin the
    // line out by at most |shifts| per accepted index.
    let len = (count * (2 * shifts.len() + 2)).max(64);
    let enumeration = spiral_enumeration(group, len).context("[lambda]: enumeration")?;
    let idx = select_translation_indices(group, &enumeration, count, shifts)
        .context("[lambda]: translation-index selection")?;
    Ok(idx.into_iter().map(|j| enumeration[j].clone()).collect())
}

fn max_abs_int(els: &[Element]) -> i64 {
    els.iter()
        .flat_map(|e| e.coords().iter())
        .map(|c| match c {
            phaseret_core::group::Coord::Int(v) => v.abs(),
            _ => 0,
        })
        .max()
        .unwrap_or(0)
}
