use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::enumerate::{hyperplane_points, tangent_section_points};
use super::{HeightBound, PointSet, SpanError};
use crate::forms::{primitive_integer_vector, HomogeneousForm, ProjectivePoint};
use crate::geometry::{
    is_eckardt, is_on_hypersurface, line_cubic_divisor, smooth_gradient, tangent_hyperplane_basis,
    tangent_residual, third_point, GeometryError, LineDivisor, ProjectiveLine,
};

/// Environment variable capping the worker count of the closure.
pub const THREADS_ENV: &str = "CUBIC_SPAN_THREADS";

/// Closure limits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanConfig {
    /// `G`: number of generations after the seeds.
    pub max_generations: usize,
    /// `H_max`: residuals of larger naive height are discarded.
    pub residual_height_cap: BigInt,
    /// `H_dir`: height bound on tangent directions when `n ≥ 2`.
    pub direction_height: u64,
}

impl Default for SpanConfig {
    fn default() -> Self {
        Self {
            max_generations: 6,
            residual_height_cap: BigInt::from(1_000_000),
            direction_height: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    Secant,
    Tangent,
}

/// One secant or tangent construction. For a secant `p, q` are the two
/// parents; for a tangent `q` is a second point of the tangent line at `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpanStep {
    pub generation: usize,
    pub kind: StepKind,
    pub p: ProjectivePoint,
    pub q: ProjectivePoint,
    pub line: ProjectiveLine,
    pub residual: ProjectivePoint,
}

impl SpanStep {
    fn merge_key(&self) -> (&ProjectivePoint, StepKind, &ProjectivePoint, &ProjectivePoint) {
        (&self.residual, self.kind, &self.p, &self.q)
    }

    /// Expected `ℓ·X`: `P + Q + R` or `2P + R`.
    pub fn expected_divisor(&self) -> LineDivisor {
        match self.kind {
            StepKind::Secant => {
                LineDivisor::from_points(&[self.p.clone(), self.q.clone(), self.residual.clone()])
            }
            StepKind::Tangent => {
                LineDivisor::from_points(&[self.p.clone(), self.p.clone(), self.residual.clone()])
            }
        }
    }

    /// Points the step was built from.
    pub fn parents(&self) -> Vec<&ProjectivePoint> {
        match self.kind {
            StepKind::Secant => vec![&self.p, &self.q],
            StepKind::Tangent => vec![&self.p],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanState {
    pub config: SpanConfig,
    /// `S₀ ⊆ S₁ ⊆ …`; a final generation equal to its predecessor is not
    /// stored.
    pub generations: Vec<PointSet>,
    pub provenance: BTreeMap<ProjectivePoint, SpanStep>,
    /// The last expansion produced nothing new within the caps.
    pub fixed_point: bool,
    /// Distinct residuals rejected by the height cap.
    pub capped_residuals: usize,
}

impl SpanState {
    pub fn seeds(&self) -> &PointSet {
        &self.generations[0]
    }

    pub fn points(&self) -> &PointSet {
        self.generations.last().expect("at least the seed generation")
    }

    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        self.points().contains(p)
    }

    /// Fixed point with no residual lost to the height cap.
    pub fn is_exact_fixed_point(&self) -> bool {
        self.fixed_point && self.capped_residuals == 0
    }

    /// Generation in which `p` first appears.
    pub fn generation_of(&self, p: &ProjectivePoint) -> Option<usize> {
        self.generations.iter().position(|g| g.contains(p))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanMembership {
    pub member: bool,
    /// Steps from the seeds to the point, parents before children.
    pub chain: Vec<SpanStep>,
}

enum Outcome {
    Step(SpanStep),
    Capped(ProjectivePoint),
}

fn configured_threads() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .filter(|&n: &usize| n > 0)
}

/// Secant/tangent closure of `seeds`, with worker count taken from
/// `CUBIC_SPAN_THREADS` when set.
pub fn span_closure(
    f: &HomogeneousForm,
    seeds: &PointSet,
    config: SpanConfig,
) -> Result<SpanState, SpanError> {
    span_closure_with_threads(f, seeds, config, configured_threads())
}

pub fn span_closure_with_threads(
    f: &HomogeneousForm,
    seeds: &PointSet,
    config: SpanConfig,
    threads: Option<usize>,
) -> Result<SpanState, SpanError> {
    crate::geometry::ensure_cubic(f)?;
    for p in seeds {
        if p.dim() != f.num_vars() || !is_on_hypersurface(f, p)? {
            return Err(SpanError::SeedNotOnHypersurface(p.clone()));
        }
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .expect("thread pool construction");
    pool.install(|| run_closure(f, seeds, config))
}

fn run_closure(f: &HomogeneousForm, seeds: &PointSet, config: SpanConfig) -> Result<SpanState, SpanError> {
    let cap = config.residual_height_cap.clone();
    let mut generations = vec![seeds.clone()];
    let mut provenance = BTreeMap::new();
    let mut capped = BTreeSet::new();
    let mut fresh = seeds.clone();
    let mut fixed_point = seeds.is_empty();
    for generation in 1..=config.max_generations {
        if fixed_point {
            break;
        }
        let current = generations.last().expect("seed generation").clone();
        let members: Vec<&ProjectivePoint> = current.iter().collect();
        let is_fresh: Vec<bool> = members.iter().map(|p| fresh.contains(*p)).collect();

        let mut work = Vec::new();
        for i in 0..members.len() {
            if !is_fresh[i] {
                continue;
            }
            work.push((i, None));
            for j in 0..members.len() {
                if j != i && (!is_fresh[j] || j < i) {
                    work.push((i, Some(j)));
                }
            }
        }

        let outcomes: Vec<Outcome> = work
            .par_iter()
            .flat_map_iter(|&(i, j)| {
                let produced: Vec<SpanStep> = match j {
                    Some(j) => secant_step(f, members[i], members[j], generation).into_iter().collect(),
                    None => tangent_steps(f, members[i], &config, generation),
                };
                produced.into_iter().filter_map(|step| {
                    if current.contains(&step.residual) {
                        None
                    } else if step.residual.naive_height() > cap {
                        Some(Outcome::Capped(step.residual))
                    } else {
                        Some(Outcome::Step(step))
                    }
                })
            })
            .collect();

        let mut candidates = Vec::new();
        for outcome in outcomes {
            match outcome {
                Outcome::Step(step) => candidates.push(step),
                Outcome::Capped(p) => {
                    capped.insert(p);
                }
            }
        }
        candidates.sort_by(|a, b| a.merge_key().cmp(&b.merge_key()));

        let mut next = current.clone();
        let mut added = PointSet::new();
        for step in candidates {
            if next.insert(step.residual.clone()) {
                added.insert(step.residual.clone());
                provenance.insert(step.residual.clone(), step);
            }
        }
        if added.is_empty() {
            fixed_point = true;
        } else {
            debug_assert!(current.is_subset(&next));
            generations.push(next);
            fresh = added;
        }
    }
    Ok(SpanState {
        config,
        generations,
        provenance,
        fixed_point,
        capped_residuals: capped.len(),
    })
}

fn secant_step(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    q: &ProjectivePoint,
    generation: usize,
) -> Option<SpanStep> {
    let (p, q) = if p < q { (p, q) } else { (q, p) };
    let residual = third_point(f, p, q).ok()?;
    Some(SpanStep {
        generation,
        kind: StepKind::Secant,
        p: p.clone(),
        q: q.clone(),
        line: ProjectiveLine::through(p, q).ok()?,
        residual,
    })
}

/// Directions of the tangent lines used at `p`, one per line: the unique
/// tangent line on a plane curve, otherwise all lines to points of
/// `T_P X` of height at most `H_dir`.
fn tangent_directions(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    config: &SpanConfig,
) -> Vec<(ProjectivePoint, ProjectiveLine)> {
    let n = f.num_vars();
    let Ok(grad) = smooth_gradient(f, p) else {
        return vec![];
    };
    let directions = if n < 3 {
        return vec![];
    } else if n == 3 {
        tangent_hyperplane_basis(f, p).unwrap_or_default()
    } else {
        let Ok(bound) = HeightBound::new(config.direction_height) else {
            return vec![];
        };
        let l = primitive_integer_vector(&grad).expect("nonzero gradient");
        hyperplane_points(&l, bound)
    };
    let mut lines = BTreeMap::new();
    for d in directions {
        if let Ok(line) = ProjectiveLine::through(p, &d) {
            lines.entry(line).or_insert(d);
        }
    }
    lines.into_iter().map(|(line, d)| (d, line)).collect()
}

fn tangent_steps(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    config: &SpanConfig,
    generation: usize,
) -> Vec<SpanStep> {
    tangent_directions(f, p, config)
        .into_iter()
        .filter_map(|(d, line)| {
            let divisor = tangent_residual(f, p, &d).ok()?;
            let residual = divisor
                .rational_points
                .iter()
                .find(|(r, _)| r != p)
                .map(|(r, _)| r.clone())?;
            Some(SpanStep {
                generation,
                kind: StepKind::Tangent,
                p: p.clone(),
                q: d,
                line,
                residual,
            })
        })
        .collect()
}

/// Re-derives `ℓ·X` for the recorded line and compares it with the step.
pub fn replay_step(f: &HomogeneousForm, step: &SpanStep) -> Result<bool, GeometryError> {
    if !step.line.contains(&step.p) || !step.line.contains(&step.q) {
        return Ok(false);
    }
    Ok(line_cubic_divisor(f, &step.line)? == step.expected_divisor())
}

/// Points whose provenance fails to replay, or whose parents are not in
/// an earlier generation.
pub fn verify_provenance(
    f: &HomogeneousForm,
    state: &SpanState,
) -> Result<Vec<ProjectivePoint>, GeometryError> {
    let mut failures = Vec::new();
    for (point, step) in &state.provenance {
        let generation = state.generation_of(point);
        let parents_earlier = step
            .parents()
            .iter()
            .all(|q| state.generation_of(q).is_some_and(|g| Some(g) < generation));
        if &step.residual != point
            || generation != Some(step.generation)
            || !parents_earlier
            || !replay_step(f, step)?
        {
            failures.push(point.clone());
        }
    }
    for point in state.points() {
        if !state.seeds().contains(point) && !state.provenance.contains_key(point) {
            failures.push(point.clone());
        }
    }
    Ok(failures)
}

/// Membership in the computed truncation, with the chain of steps that
/// builds `r` from the seeds.
pub fn is_in_span(r: &ProjectivePoint, state: &SpanState) -> SpanMembership {
    if !state.contains(r) {
        return SpanMembership {
            member: false,
            chain: vec![],
        };
    }
    let mut seen = BTreeSet::new();
    let mut chain = Vec::new();
    collect_chain(r, state, &mut seen, &mut chain);
    SpanMembership { member: true, chain }
}

fn collect_chain<'a>(
    p: &'a ProjectivePoint,
    state: &'a SpanState,
    seen: &mut BTreeSet<&'a ProjectivePoint>,
    chain: &mut Vec<SpanStep>,
) {
    if !seen.insert(p) {
        return;
    }
    if let Some(step) = state.provenance.get(p) {
        for parent in step.parents() {
            collect_chain(parent, state, seen, chain);
        }
        chain.push(step.clone());
    }
}

/// Pairs `(P, Q, R)` of closure points whose secant residual `R` is within
/// the height cap but missing from the closure.
pub fn secant_closedness_violations(
    f: &HomogeneousForm,
    state: &SpanState,
) -> Vec<(ProjectivePoint, ProjectivePoint, ProjectivePoint)> {
    let cap = state.config.residual_height_cap.clone();
    let points: Vec<&ProjectivePoint> = state.points().iter().collect();
    let pairs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|i| (i + 1..points.len()).map(move |j| (i, j)))
        .collect();
    let mut out: Vec<_> = pairs
        .par_iter()
        .filter_map(|&(i, j)| {
            let r = third_point(f, points[i], points[j]).ok()?;
            (r.naive_height() <= cap && !state.contains(&r))
                .then(|| (points[i].clone(), points[j].clone(), r))
        })
        .collect();
    out.sort();
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SectionStatus {
    Reached,
    /// Not reached, but not guaranteed by a single construction within
    /// the caps.
    Inconclusive,
    /// Reachable by one tangent construction within the caps, yet missing.
    Violation,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionEntry {
    pub point: ProjectivePoint,
    pub status: SectionStatus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionCheck {
    pub point: ProjectivePoint,
    pub eckardt: bool,
    pub entries: Vec<SectionEntry>,
    pub closure: SpanState,
}

impl SectionCheck {
    pub fn count(&self, status: SectionStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }
}

/// Compares `X_P(ℚ)` up to height `H` with the closure of `{P}`.
///
/// A missing point `Q` counts as a violation only when the tangent line
/// `PQ` is not contained in `X` and `Q` is within both the direction and
/// residual height caps: that line is then scanned in the first
/// generation and meets `X` in `2P + Q`.
pub fn check_tangent_section_containment(
    f: &HomogeneousForm,
    p: &ProjectivePoint,
    section_height: HeightBound,
    config: SpanConfig,
) -> Result<SectionCheck, SpanError> {
    let section = tangent_section_points(f, p, section_height)?;
    let eckardt = is_eckardt(f, p)?;
    let seeds: PointSet = [p.clone()].into_iter().collect();
    let closure = span_closure(f, &seeds, config.clone())?;
    let dir_cap = BigInt::from(config.direction_height);
    let residual_cap = config.residual_height_cap.clone();
    let mut entries = Vec::with_capacity(section.len());
    for q in section {
        let status = if closure.contains(&q) {
            SectionStatus::Reached
        } else {
            let line = ProjectiveLine::through(p, &q)?;
            let contained = line_cubic_divisor(f, &line).is_err();
            let h = q.naive_height();
            let obligated = config.max_generations >= 1
                && f.num_vars() >= 4
                && !contained
                && h <= dir_cap
                && h <= residual_cap;
            if obligated {
                SectionStatus::Violation
            } else {
                SectionStatus::Inconclusive
            }
        };
        entries.push(SectionEntry { point: q, status });
    }
    Ok(SectionCheck {
        point: p.clone(),
        eckardt,
        entries,
        closure,
    })
}
