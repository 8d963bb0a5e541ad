//! Partitions under a probability measure, and the teacher/student loop
//! that learns rules as cell marginals of a target distribution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::space::HypercubeWindow;

const NORMALIZATION_TOL: f64 = 1e-12;
/// Stop tolerance for iterative proportional fitting.
pub const IPF_TOLERANCE: f64 = 1e-10;
pub const IPF_MAX_SWEEPS: usize = 10_000;
const TIE_TOL: f64 = 1e-12;

/// A probability distribution over the points of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct Measure {
    window: HypercubeWindow,
    weights: Vec<f64>,
}

impl Measure {
    pub fn new(window: &HypercubeWindow, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != window.len() {
            return Err(Error::InvalidArgument(format!("{} weights for {} points", weights.len(), window.len())));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::InvalidArgument(format!("weights sum to {total}, not 1")));
        }
        Ok(Measure { window: window.clone(), weights })
    }

    pub fn uniform(window: &HypercubeWindow) -> Self {
        let w = 1.0 / window.len() as f64;
        Measure { window: window.clone(), weights: vec![w; window.len()] }
    }

    pub fn point_mass(window: &HypercubeWindow, index: usize) -> Result<Self> {
        if index >= window.len() {
            return Err(Error::InvalidArgument(format!("point index {index} outside window")));
        }
        let mut weights = vec![0.0; window.len()];
        weights[index] = 1.0;
        Ok(Measure { window: window.clone(), weights })
    }

    /// Normalizes non-negative counts.
    pub fn from_counts(window: &HypercubeWindow, counts: &[f64]) -> Result<Self> {
        let total: f64 = counts.iter().sum();
        if !(total > 0.0) {
            return Err(Error::NoData);
        }
        let weights: Vec<f64> = counts.iter().map(|c| c / total).collect();
        if weights.len() != window.len() || weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("counts must be non-negative, one per point".into()));
        }
        Ok(Measure { window: window.clone(), weights })
    }

    pub fn window(&self) -> &HypercubeWindow {
        &self.window
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.weights)
    }
}

/// Cell masses of `m` under `p`.
pub fn project(m: &Measure, p: &Partition) -> Result<Vec<f64>> {
    if m.window() != p.window() {
        return Err(Error::WindowMismatch);
    }
    let mut out = vec![0.0; p.cell_count()];
    for (&l, &w) in p.labels().iter().zip(&m.weights) {
        out[l as usize] += w;
    }
    Ok(out)
}

/// Shannon entropy in bits, with `0 log 0 = 0`.
pub fn entropy(d: &[f64]) -> f64 {
    let h = -d.iter().filter(|&&p| p > 0.0).map(|&p| p * p.log2()).sum::<f64>();
    // a point mass sums to -0.0
    h.max(0.0) + 0.0
}

/// `KL(p || q)` in bits; `+inf` when `q` vanishes where `p` does not.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> f64 {
    let mut total = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            total += a * (a / b).log2();
        }
    }
    total.max(0.0)
}

/// A partition together with the cell masses of a measure.
#[derive(Clone, Debug, PartialEq)]
pub struct InfoElement {
    pub partition: Partition,
    pub masses: Vec<f64>,
}

impl InfoElement {
    pub fn new(partition: Partition, m: &Measure) -> Result<Self> {
        let masses = project(m, &partition)?;
        Ok(InfoElement { partition, masses })
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.masses)
    }
}

/// `H(Y | X)` in bits for the cell variables of `py` and `px` under `m`.
pub fn conditional_entropy(py: &Partition, px: &Partition, m: &Measure) -> Result<f64> {
    if py.window() != m.window() || px.window() != m.window() {
        return Err(Error::WindowMismatch);
    }
    let mut joint = std::collections::HashMap::new();
    for ((&ly, &lx), &w) in py.labels().iter().zip(px.labels()).zip(m.weights()) {
        if w > 0.0 {
            *joint.entry((lx, ly)).or_insert(0.0) += w;
        }
    }
    let mut jvals: Vec<((u32, u32), f64)> = joint.into_iter().collect();
    jvals.sort_by_key(|e| e.0);
    let joint_h = entropy(&jvals.iter().map(|(_, w)| *w).collect::<Vec<_>>());
    let hx = entropy(&project(m, px)?);
    Ok((joint_h - hx).max(0.0))
}

/// `rho(x, y) = H(x|y) + H(y|x)`.
pub fn information_distance(a: &InfoElement, b: &InfoElement, m: &Measure) -> Result<f64> {
    Ok(conditional_entropy(&a.partition, &b.partition, m)? + conditional_entropy(&b.partition, &a.partition, m)?)
}

/// True when every positive-mass cell of `px` sits inside one cell of `py`
/// once mass-zero points are ignored, i.e. `H(py | px) = 0`.
pub fn info_leq(py: &Partition, px: &Partition, m: &Measure) -> Result<bool> {
    if py.window() != m.window() || px.window() != m.window() {
        return Err(Error::WindowMismatch);
    }
    let mut target = vec![u32::MAX; px.cell_count()];
    for ((&ly, &lx), &w) in py.labels().iter().zip(px.labels()).zip(m.weights()) {
        if w > 0.0 {
            let t = &mut target[lx as usize];
            if *t == u32::MAX {
                *t = ly;
            } else if *t != ly {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TeacherPick {
    pub index: usize,
    pub divergence: f64,
}

/// The family member exposing the largest gap `KL(target || student)`.
///
/// Ties (within 1e-12, or both infinite) go to fewer cells, then lower index.
pub fn teacher_pick(target: &Measure, student: &Measure, family: &[Partition]) -> Result<TeacherPick> {
    if family.is_empty() {
        return Err(Error::InvalidArgument("teacher needs a non-empty family".into()));
    }
    if target.window() != student.window() {
        return Err(Error::WindowMismatch);
    }
    let gaps: Vec<f64> = family
        .par_iter()
        .map(|p| Ok(kl_divergence(&project(target, p)?, &project(student, p)?)))
        .collect::<Result<_>>()?;
    let mut best = 0usize;
    for i in 1..family.len() {
        let (a, b) = (gaps[i], gaps[best]);
        let tie = (a.is_infinite() && b.is_infinite()) || (a - b).abs() <= TIE_TOL;
        let better = if tie { family[i].cell_count() < family[best].cell_count() } else { a > b };
        if better {
            best = i;
        }
    }
    Ok(TeacherPick { index: best, divergence: gaps[best] })
}

/// A constraint: the student's cell masses on `partition` must equal `target`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rule {
    pub partition: Partition,
    pub target: Vec<f64>,
}

impl Rule {
    pub fn new(partition: Partition, target: Vec<f64>) -> Result<Self> {
        if target.len() != partition.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "{} masses for {} cells",
                target.len(),
                partition.cell_count()
            )));
        }
        if target.iter().any(|w| !w.is_finite() || *w < 0.0) || (target.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument("rule target is not a distribution".into()));
        }
        Ok(Rule { partition, target })
    }

    /// The rule `target` satisfies on `p`.
    pub fn from_measure(p: &Partition, target: &Measure) -> Result<Self> {
        Ok(Rule { partition: p.clone(), target: project(target, p)? })
    }

    fn max_error(&self, weights: &[f64]) -> f64 {
        let mut m = vec![0.0; self.target.len()];
        for (&l, &w) in self.partition.labels().iter().zip(weights) {
            m[l as usize] += w;
        }
        m.iter().zip(&self.target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Maximum-entropy measure matching every rule, by iterative proportional
/// fitting from the uniform measure (exact closed form for one rule).
pub fn student_update(rules: &[Rule], window: &HypercubeWindow) -> Result<Measure> {
    if rules.iter().any(|r| r.partition.window() != window) {
        return Err(Error::WindowMismatch);
    }
    match rules {
        [] => return Ok(Measure::uniform(window)),
        [rule] => {
            let sizes = rule.partition.cell_sizes();
            let weights =
                rule.partition.labels().iter().map(|&l| rule.target[l as usize] / sizes[l as usize] as f64).collect();
            return Ok(Measure { window: window.clone(), weights });
        }
        _ => {}
    }
    let mut x = vec![1.0 / window.len() as f64; window.len()];
    let mut err = f64::INFINITY;
    for sweep in 1..=IPF_MAX_SWEEPS {
        for rule in rules {
            let mut m = vec![0.0; rule.target.len()];
            for (&l, &w) in rule.partition.labels().iter().zip(&x) {
                m[l as usize] += w;
            }
            let scale: Vec<f64> =
                m.iter().zip(&rule.target).map(|(&have, &want)| if have > 0.0 { want / have } else { 0.0 }).collect();
            for (w, &l) in x.iter_mut().zip(rule.partition.labels()) {
                *w *= scale[l as usize];
            }
        }
        err = rules.iter().map(|r| r.max_error(&x)).fold(0.0, f64::max);
        if err < IPF_TOLERANCE {
            let total: f64 = x.iter().sum();
            x.iter_mut().for_each(|w| *w /= total);
            return Ok(Measure { window: window.clone(), weights: x });
        }
        if !err.is_finite() {
            return Err(Error::Infeasible { max_error: err, iterations: sweep });
        }
    }
    Err(Error::Infeasible { max_error: err, iterations: IPF_MAX_SWEEPS })
}

/// One learned rule in the loop's trace.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub subset: String,
    /// Gap at pick time; `None` encodes an infinite divergence.
    pub divergence: Option<f64>,
    #[serde(rename = "studentEntropy")]
    pub student_entropy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    /// The largest gap fell below the threshold.
    Converged,
    MaxRules,
}

#[derive(Clone, Debug)]
pub struct LearnOutcome {
    pub rules: Vec<Rule>,
    /// Family index behind every rule.
    pub picks: Vec<usize>,
    pub trace: Vec<TraceRecord>,
    pub student: Measure,
    pub stop: StopReason,
    /// The gap that ended the loop, when it ended on the threshold.
    pub final_gap: Option<f64>,
}

/// Teacher picks the widest gap, the rule is added, the student refits;
/// stops after `max_rules` rules or once the widest gap is below `epsilon`.
pub fn learn_loop(
    target: &Measure,
    family: &[Partition],
    labels: &[String],
    max_rules: usize,
    epsilon: f64,
) -> Result<LearnOutcome> {
    if labels.len() != family.len() {
        return Err(Error::InvalidArgument("one label per family member".into()));
    }
    let window = target.window();
    let mut rules = Vec::new();
    let mut picks = Vec::new();
    let mut trace = Vec::new();
    let mut student = Measure::uniform(window);
    loop {
        if rules.len() >= max_rules {
            return Ok(LearnOutcome { rules, picks, trace, student, stop: StopReason::MaxRules, final_gap: None });
        }
        let pick = teacher_pick(target, &student, family)?;
        if pick.divergence < epsilon {
            return Ok(LearnOutcome {
                rules,
                picks,
                trace,
                student,
                stop: StopReason::Converged,
                final_gap: Some(pick.divergence),
            });
        }
        rules.push(Rule::from_measure(&family[pick.index], target)?);
        picks.push(pick.index);
        student = student_update(&rules, window)?;
        trace.push(TraceRecord {
            k: rules.len(),
            subset: labels[pick.index].clone(),
            divergence: pick.divergence.is_finite().then_some(pick.divergence),
            student_entropy: student.entropy(),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize) -> HypercubeWindow {
        HypercubeWindow::finite_set(n).unwrap()
    }

    #[test]
    fn projection_examples() {
        let w = set(3);
        let m = Measure::new(&w, vec![0.5, 0.25, 0.25]).unwrap();
        let p = Partition::from_cells(&w, &[vec![0, 1], vec![2]]).unwrap();
        assert_eq!(project(&m, &p).unwrap(), vec![0.75, 0.25]);
        let pm = Measure::point_mass(&w, 2).unwrap();
        assert_eq!(project(&pm, &p).unwrap(), vec![0.0, 1.0]);
        assert!(Measure::new(&w, vec![0.5, 0.5, 0.5]).is_err());
        assert!(Measure::new(&w, vec![1.5, -0.5, 0.0]).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert!((entropy(&[0.25; 4]) - 2.0).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kl_guard() {
        assert_eq!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]), f64::INFINITY);
        assert_eq!(kl_divergence(&[0.0, 1.0], &[0.5, 0.5]), 1.0);
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]), 0.0);
    }

    #[test]
    fn student_closed_form_and_product() {
        let w = set(3);
        let p = Partition::from_cells(&w, &[vec![0, 1], vec![2]]).unwrap();
        let s = student_update(&[Rule::new(p, vec![0.8, 0.2]).unwrap()], &w).unwrap();
        assert_eq!(s.weights(), &[0.4, 0.4, 0.2]);
        assert_eq!(student_update(&[], &w).unwrap(), Measure::uniform(&w));

        let g = HypercubeWindow::cube(2, 0, 1).unwrap();
        let rows = Partition::from_labels(&g, &[0u32, 0, 1, 1]).unwrap();
        let cols = Partition::from_labels(&g, &[0u32, 1, 0, 1]).unwrap();
        let s = student_update(
            &[Rule::new(rows, vec![0.7, 0.3]).unwrap(), Rule::new(cols, vec![0.6, 0.4]).unwrap()],
            &g,
        )
        .unwrap();
        for (a, b) in s.weights().iter().zip([0.42, 0.28, 0.18, 0.12]) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn inconsistent_rules_are_infeasible() {
        let w = set(2);
        let whole = Partition::coarsest(&w);
        let singles = Partition::finest(&w);
        let a = Rule::new(singles.clone(), vec![1.0, 0.0]).unwrap();
        let b = Rule::new(singles, vec![0.0, 1.0]).unwrap();
        let c = Rule::new(whole, vec![1.0]).unwrap();
        assert!(matches!(student_update(&[a, b, c], &w), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn teacher_tie_break() {
        let w = set(4);
        let m = Measure::uniform(&w);
        let fam = vec![Partition::finest(&w), Partition::coarsest(&w)];
        let pick = teacher_pick(&m, &m, &fam).unwrap();
        assert_eq!(pick, TeacherPick { index: 1, divergence: 0.0 });
        assert_eq!(teacher_pick(&m, &m, &fam[..1]).unwrap().index, 0);
        assert!(teacher_pick(&m, &m, &[]).is_err());
    }

    #[test]
    fn info_order() {
        let w = set(3);
        let m = Measure::uniform(&w);
        let p = Partition::from_cells(&w, &[vec![0, 1], vec![2]]).unwrap();
        assert!(info_leq(&Partition::coarsest(&w), &p, &m).unwrap());
        assert!(info_leq(&p, &p, &m).unwrap());
        assert!(!info_leq(&p, &Partition::coarsest(&w), &m).unwrap());
        assert!(conditional_entropy(&p, &Partition::finest(&w), &m).unwrap().abs() < 1e-12);
        let e = InfoElement::new(p.clone(), &m).unwrap();
        let f = InfoElement::new(Partition::finest(&w), &m).unwrap();
        let d = information_distance(&e, &f, &m).unwrap();
        assert!((d - (3f64.log2() - e.entropy())).abs() < 1e-12);
    }

    #[test]
    fn loop_stops_on_uniform_target() {
        let w = set(4);
        let fam = vec![Partition::finest(&w)];
        let out = learn_loop(&Measure::uniform(&w), &fam, &["f".into()], 5, 1e-9).unwrap();
        assert!(out.rules.is_empty());
        assert_eq!(out.stop, StopReason::Converged);
    }
}
