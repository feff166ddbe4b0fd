//! Coverage criteria on scenarios and transport of witness cycles through a
//! perturbation.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::homology::{boundary, persistence, push_forward, Chain, ChainJson, HomologyError, Persistence, Witness};
use crate::rips::{build_filtered_rips, FilteredComplex, RipsError, CUTOFF_SLACK};
use crate::scenario::{
    fence_sensors, validate_assumptions, validate_perturbation, AssumptionReport, Perturbation, PerturbationCheck,
    PerturbationClause, Scenario, ScenarioError,
};

/// Homological degree of the planar criteria.
pub const DEGREE: usize = 2;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CriterionError {
    #[error("assumptions violated:\n{0}")]
    AssumptionFailure(AssumptionReport),
    #[error("perturbation fails at sensor {index}: {clause:?}")]
    BadPerturbation { index: usize, clause: PerturbationClause },
    #[error("transported simplex missing: {0}")]
    SimplexMissing(String),
    #[error("transported cycle has zero class at r_w")]
    TransportLostClass,
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Rips(#[from] RipsError),
    #[error(transparent)]
    Homology(#[from] HomologyError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Dsg,
    Stable,
}

impl Criterion {
    /// `(s, w)` for the induced map `H_2(slice s) → H_2(slice w)`.
    pub fn params(self, s: &Scenario) -> (f64, f64) {
        let r = s.radii();
        match self {
            Criterion::Dsg => (r.r_s, r.r_w),
            Criterion::Stable => (r.r_s - s.epsilon(), r.r_w + s.epsilon()),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Criterion::Dsg => "dsg",
            Criterion::Stable => "stable",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<F> {
    pub criterion: Criterion,
    pub holds: bool,
    pub s: f64,
    pub w: f64,
    pub witness: Option<Witness<F>>,
}

/// `{"criterion":..,"holds":..,"degree":2,"s":..,"w":..,"witness":..,"barcode_path":..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub criterion: Criterion,
    pub holds: bool,
    pub degree: usize,
    pub s: f64,
    pub w: f64,
    pub witness: Option<ChainJson>,
    pub barcode_path: Option<String>,
}

impl<F: Field> Verdict<F> {
    pub fn to_json(&self, k: &FilteredComplex, barcode_path: Option<String>) -> VerdictJson {
        VerdictJson {
            criterion: self.criterion,
            holds: self.holds,
            degree: DEGREE,
            s: self.s,
            w: self.w,
            witness: self.witness.as_ref().map(|w| w.cycle.to_json(k)),
            barcode_path,
        }
    }
}

/// Relative Rips complex of a scenario and its degree-2 persistence, reusable
/// across criteria.
#[derive(Debug, Clone)]
pub struct Evaluation<F> {
    pub report: AssumptionReport,
    pub fence: BTreeSet<usize>,
    pub complex: FilteredComplex,
    pub persistence: Persistence<F>,
}

impl<F: Field> Evaluation<F> {
    /// Complex up to `r_w + ε`, enough for both criteria.
    pub fn prepare(s: &Scenario, grid_step: f64) -> Result<Self, CriterionError> {
        let cutoff = s.radii().r_w + s.epsilon() + CUTOFF_SLACK;
        Self::prepare_with(s, grid_step, fence_sensors(s), cutoff)
    }

    /// As [`Evaluation::prepare`] with an explicit fence and cutoff.
    pub fn prepare_with(s: &Scenario, grid_step: f64, fence: BTreeSet<usize>, cutoff: f64) -> Result<Self, CriterionError> {
        let report = validate_assumptions(s, grid_step)?;
        if !report.holds() {
            return Err(CriterionError::AssumptionFailure(report));
        }
        let complex = build_filtered_rips(&s.metric(), &fence, DEGREE + 1, cutoff)?;
        let persistence = persistence::<F>(&complex, DEGREE, true)?;
        Ok(Evaluation { report, fence, complex, persistence })
    }

    pub fn verdict(&self, c: Criterion, s: &Scenario) -> Result<Verdict<F>, CriterionError> {
        let (lo, hi) = c.params(s);
        let witness = self.persistence.induced_map_nonzero(lo, hi)?;
        Ok(Verdict { criterion: c, holds: witness.is_some(), s: lo, w: hi, witness })
    }
}

pub fn dsg_criterion<F: Field>(s: &Scenario, grid_step: f64) -> Result<Verdict<F>, CriterionError> {
    let cutoff = s.radii().r_w + CUTOFF_SLACK;
    Evaluation::prepare_with(s, grid_step, fence_sensors(s), cutoff)?.verdict(Criterion::Dsg, s)
}

pub fn stable_criterion<F: Field>(s: &Scenario, grid_step: f64) -> Result<Verdict<F>, CriterionError> {
    Evaluation::prepare(s, grid_step)?.verdict(Criterion::Stable, s)
}

/// Image of a witness in the perturbed complex.
#[derive(Debug, Clone)]
pub struct Transported<F> {
    /// Perturbed scenario `f(X)`.
    pub scenario: Scenario,
    /// Evaluation of the perturbed scenario with fence `f(F)`.
    pub evaluation: Evaluation<F>,
    /// `f(z)` as a relative cycle at `r_s`.
    pub chain: Chain<F>,
}

/// Pushes `z` (a relative cycle of `eval.complex` at `r_s − ε`) through the
/// vertex map of `p` and checks that its class survives to `r_w`.
pub fn transport_cycle<F: Field>(
    eval: &Evaluation<F>,
    s: &Scenario,
    z: &Chain<F>,
    p: &Perturbation,
    grid_step: f64,
) -> Result<Transported<F>, CriterionError> {
    if let PerturbationCheck::Fail { index, clause } = validate_perturbation(s, p)? {
        return Err(CriterionError::BadPerturbation { index, clause });
    }
    let moved = s.with_sensors(p.targets.clone())?;
    let r = s.radii();
    let evaluation = Evaluation::prepare_with(&moved, grid_step, eval.fence.clone(), r.r_w + CUTOFF_SLACK)?;
    let f: Vec<usize> = (0..s.len()).collect();
    let chain = push_forward(&f, &eval.complex, &evaluation.complex, z, true, r.r_s).map_err(|e| match e {
        HomologyError::NotSimplicial(msg) => CriterionError::SimplexMissing(msg),
        e => e.into(),
    })?;
    if !boundary(&evaluation.complex, &chain, true).is_zero() {
        return Err(HomologyError::NotACycle.into());
    }
    if !evaluation.persistence.class_nonzero_at(&evaluation.complex, &chain, r.r_w)? {
        return Err(CriterionError::TransportLostClass);
    }
    Ok(Transported { scenario: moved, evaluation, chain })
}

/// Whether the classes of two relative cycles at `w` are proportional,
/// i.e. span at most a line. Both zero counts as proportional.
pub fn classes_proportional<F: Field>(
    k: &FilteredComplex,
    pers: &Persistence<F>,
    a: &Chain<F>,
    b: &Chain<F>,
    w: f64,
) -> Result<bool, HomologyError> {
    let alive: BTreeSet<usize> = pers.alive_at(w)?.into_iter().collect();
    let at_w = |c: &Chain<F>| -> Result<Vec<(usize, F)>, HomologyError> {
        Ok(pers.coordinates(k, c)?.into_iter().filter(|(bar, _)| alive.contains(bar)).collect())
    };
    let (ca, cb) = (at_w(a)?, at_w(b)?);
    if ca.is_empty() || cb.is_empty() {
        return Ok(true);
    }
    if ca.len() != cb.len() || ca.iter().zip(&cb).any(|(x, y)| x.0 != y.0) {
        return Ok(false);
    }
    let ratio = cb[0].1.div(&ca[0].1);
    Ok(ca.iter().zip(&cb).all(|(x, y)| x.1.mul(&ratio) == y.1))
}
