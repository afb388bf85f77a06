//! The pseudo-MUB linear program on an `m`-grid.
//!
//! Unknowns are the values of an even function `f` on the allowed grid
//! points with `f(0) = 1`. Its transform must be nonnegative at every
//! character `γ ∈ Z_m^{d-1}`, and the objective is `M = Σ_y f(y)`. A complete
//! set of `d + 1` MUBs would give `M = d²`.
//!
//! The symmetry group (negation, coordinate permutations and optionally the
//! phase shift `x ↦ (-x_1, x_2 - x_1, …)`) acts on the grid; `f` is constant
//! on orbits and constraints are taken once per orbit of the dual action.
//! The solver generates constraints lazily: it solves a restricted problem,
//! evaluates the full transform with a separable grid DFT, and adds the most
//! violated characters.

use std::collections::{HashSet, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constructions::unit_root;
use crate::numfmt::{self, Num17};
use crate::simplex::{self, DenseLp, SimplexError, SimplexStatus};
use crate::torus::{self, decode_index, encode_index, GridClassifier, PointClass, TorusError, TorusPoint};
use crate::witness::{self, DelsarteReport, TrigPolynomial, WitnessError};

pub const DEFAULT_EPS_FEAS: f64 = 1e-7;
pub const DEFAULT_BATCH: usize = 64;
pub const DEFAULT_MAX_ITERATIONS: usize = 5_000_000;
/// Upper bound on every orbit weight. Feasible weights satisfy `f(y) <= f(0) = 1`,
/// so this bound never binds at an optimum of the full problem.
pub const WEIGHT_UPPER: f64 = 2.0;
/// Tolerance used when validating a dual certificate.
pub const CERTIFICATE_EPS: f64 = 1e-6;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("dimension must be at least 2, got {0}")]
    Dimension(usize),
    #[error("optimum {value} exceeds d² = {limit}")]
    BoundExceeded { value: f64, limit: f64 },
    #[error("solution is not optimal ({0:?})")]
    NotOptimal(LpStatus),
    #[error("certificate rejected: {0}")]
    Certificate(String),
    #[error("checkpoint {path}: {msg}")]
    Checkpoint { path: PathBuf, msg: String },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("function is not a grid function of dimension {0}")]
    IncompatibleFunction(usize),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Witness(#[from] WitnessError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Generators used besides negation, which is always present so that `f` is even.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    pub permutations: bool,
    pub shift: bool,
}

impl Default for Symmetry {
    fn default() -> Self {
        Symmetry { permutations: true, shift: false }
    }
}

impl Symmetry {
    pub fn negation_only() -> Self {
        Symmetry { permutations: false, shift: false }
    }

    pub fn with_shift() -> Self {
        Symmetry { permutations: true, shift: true }
    }
}

#[derive(Clone, Copy, Debug)]
enum Generator {
    Negate,
    Transpose,
    Cycle,
    Shift,
    DualShift,
}

impl Generator {
    fn apply(self, x: &[u32], m: u32, out: &mut [u32]) {
        let n = x.len();
        match self {
            Generator::Negate => {
                for (o, &a) in out.iter_mut().zip(x) {
                    *o = (m - a) % m;
                }
            }
            Generator::Transpose => {
                out.copy_from_slice(x);
                out.swap(0, 1);
            }
            Generator::Cycle => {
                for i in 0..n {
                    out[i] = x[(i + 1) % n];
                }
            }
            Generator::Shift => {
                out[0] = (m - x[0]) % m;
                for i in 1..n {
                    out[i] = (x[i] + m - x[0]) % m;
                }
            }
            Generator::DualShift => {
                let s = x.iter().fold(0u64, |acc, &a| acc + a as u64) % m as u64;
                out[0] = ((m as u64 - s) % m as u64) as u32;
                out[1..].copy_from_slice(&x[1..]);
            }
        }
    }
}

fn generators(sym: Symmetry, n: usize, dual: bool) -> Vec<Generator> {
    let mut g = vec![Generator::Negate];
    if sym.permutations && n >= 2 {
        g.push(Generator::Transpose);
        g.push(Generator::Cycle);
    }
    if sym.shift {
        g.push(if dual { Generator::DualShift } else { Generator::Shift });
    }
    g
}

/// Orbit of `start`, sorted by grid index.
fn closure(start: u64, m: u32, n: usize, gens: &[Generator]) -> Vec<u64> {
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    let mut x = vec![0u32; n];
    let mut y = vec![0u32; n];
    while let Some(idx) = queue.pop_front() {
        decode_index(idx, m, &mut x);
        for g in gens {
            g.apply(&x, m, &mut y);
            let j = encode_index(&y, m);
            if seen.insert(j) {
                queue.push_back(j);
            }
        }
    }
    let mut v: Vec<u64> = seen.into_iter().collect();
    v.sort_unstable();
    v
}

/// Labels orbits of the points selected by `keep`, in order of their least
/// index; returns `(labels, orbits)`.
fn label_orbits(
    total: u64,
    m: u32,
    n: usize,
    gens: &[Generator],
    keep: impl Fn(u64) -> bool,
) -> (Vec<u32>, Vec<Vec<u64>>) {
    let mut label = vec![NONE; total as usize];
    let mut orbits = Vec::new();
    let mut x = vec![0u32; n];
    let mut y = vec![0u32; n];
    for start in 0..total {
        if label[start as usize] != NONE || !keep(start) {
            continue;
        }
        let id = orbits.len() as u32;
        let mut members = vec![start];
        label[start as usize] = id;
        let mut k = 0;
        while k < members.len() {
            decode_index(members[k], m, &mut x);
            for g in gens {
                g.apply(&x, m, &mut y);
                let j = encode_index(&y, m);
                if label[j as usize] == NONE {
                    label[j as usize] = id;
                    members.push(j);
                }
            }
            k += 1;
        }
        members.sort_unstable();
        orbits.push(members);
    }
    (label, orbits)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Orbit {
    /// Grid index of the lexicographically least member.
    pub representative: u64,
    pub members: Vec<u64>,
    pub class: PointClass,
}

impl Orbit {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

/// Partition of the allowed grid points into symmetry orbits.
#[derive(Clone, Debug)]
pub struct OrbitTable {
    pub d: usize,
    pub m: u32,
    pub symmetry: Symmetry,
    pub orbits: Vec<Orbit>,
    label: Vec<u32>,
}

impl OrbitTable {
    pub fn dim(&self) -> usize {
        self.d - 1
    }

    pub fn grid_points(&self) -> u64 {
        self.label.len() as u64
    }

    /// Orbit containing the grid point with index `idx`, if it is allowed.
    pub fn orbit_of(&self, idx: u64) -> Option<usize> {
        match self.label.get(idx as usize) {
            Some(&l) if l != NONE => Some(l as usize),
            _ => None,
        }
    }

    pub fn numerators(&self, idx: u64) -> Vec<u32> {
        let mut v = vec![0; self.dim()];
        decode_index(idx, self.m, &mut v);
        v
    }

    pub fn point(&self, idx: u64) -> TorusPoint {
        TorusPoint::Exact { m: self.m, num: self.numerators(idx) }
    }

    pub fn representatives(&self) -> Vec<TorusPoint> {
        self.orbits.iter().map(|o| self.point(o.representative)).collect()
    }

    pub fn count(&self, class: PointClass) -> usize {
        self.orbits.iter().filter(|o| o.class == class).count()
    }

    pub fn allowed_points(&self) -> usize {
        self.orbits.iter().map(Orbit::len).sum()
    }
}

/// Partitions the allowed points of the `m`-grid into orbits of the group
/// generated by negation and the generators selected in `symmetry`.
pub fn build_orbits(d: usize, m: u32, symmetry: Symmetry, budget: u64) -> Result<OrbitTable, LpError> {
    if d < 2 {
        return Err(LpError::Dimension(d));
    }
    let total = torus::grid_size(d, m, budget)?;
    let n = d - 1;
    let classifier = GridClassifier::new(d, m)?;
    let classes: Vec<PointClass> = (0..total)
        .into_par_iter()
        .map_init(
            || (classifier.scratch(), vec![0u32; n]),
            |(s, num), idx| {
                decode_index(idx, m, num);
                classifier.classify_exact(num, s)
            },
        )
        .collect();
    let gens = generators(symmetry, n, false);
    let (label, members) = label_orbits(total, m, n, &gens, |i| classes[i as usize].is_allowed());
    let orbits = members
        .into_iter()
        .map(|members| Orbit { representative: members[0], class: classes[members[0] as usize], members })
        .collect();
    Ok(OrbitTable { d, m, symmetry, orbits, label })
}

/// `F(γ) = Σ_y data(y) e^{2πi⟨γ, y⟩/m}` over `Z_m^n`, one axis at a time.
/// Every output entry is summed in a fixed order, so the result does not
/// depend on the number of worker threads.
pub fn grid_transform(data: &[Complex64], m: u32, n: usize) -> Vec<Complex64> {
    let mu = m as usize;
    let tw: Vec<Complex64> = (0..mu).map(|k| unit_root(m as u64, k as i64)).collect();
    let mut cur = data.to_vec();
    let mut next = vec![Complex64::new(0.0, 0.0); cur.len()];
    let mut stride = 1usize;
    for _ in 0..n {
        let s = stride;
        next.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let c = (idx / s) % mu;
            let base = idx - c * s;
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..mu {
                acc += cur[base + k * s] * tw[(c * k) % mu];
            }
            *out = acc;
        });
        std::mem::swap(&mut cur, &mut next);
        stride *= mu;
    }
    cur
}

/// The restricted-orbit form of the pseudo-MUB program.
#[derive(Clone, Debug)]
pub struct LpProblem {
    pub d: usize,
    pub m: u32,
    pub orbits: OrbitTable,
    /// Least index of each nonzero dual orbit; one constraint each.
    pub characters: Vec<u64>,
    dual_sizes: Vec<u32>,
    dual_label: Vec<u32>,
    cos: Vec<f64>,
}

/// Builds the program: one weight per orbit, one constraint per nonzero
/// orbit of characters under the dual action.
pub fn build_pseudo_mub_lp(orbits: OrbitTable) -> LpProblem {
    let (d, m) = (orbits.d, orbits.m);
    let n = d - 1;
    let gens = generators(orbits.symmetry, n, true);
    let (dual_label, dual) = label_orbits(orbits.grid_points(), m, n, &gens, |i| i != 0);
    let characters = dual.iter().map(|o| o[0]).collect();
    let dual_sizes = dual.iter().map(|o| o.len() as u32).collect();
    let cos = (0..m).map(|k| unit_root(m as u64, k as i64).re).collect();
    LpProblem { d, m, orbits, characters, dual_sizes, dual_label, cos }
}

impl LpProblem {
    pub fn dim(&self) -> usize {
        self.d - 1
    }

    pub fn variables(&self) -> usize {
        self.orbits.orbits.len()
    }

    /// Objective coefficients `|o|` (the fixed `f(0) = 1` is left out).
    pub fn objective(&self) -> Vec<f64> {
        self.orbits.orbits.iter().map(|o| o.len() as f64).collect()
    }

    /// Row of the constraint at character `gamma`: `Σ_{y∈o} cos(2π⟨γ, y⟩/m)`.
    pub fn row(&self, gamma: u64) -> Vec<f64> {
        let m = self.m as u64;
        let g = self.orbits.numerators(gamma);
        let mut y = vec![0u32; self.dim()];
        self.orbits
            .orbits
            .iter()
            .map(|o| {
                o.members
                    .iter()
                    .map(|&idx| {
                        decode_index(idx, self.m, &mut y);
                        let dot = g.iter().zip(&y).fold(0u64, |a, (&p, &q)| (a + p as u64 * q as u64) % m);
                        self.cos[dot as usize]
                    })
                    .sum()
            })
            .collect()
    }

    /// Members of the dual orbit of `gamma`.
    pub fn dual_orbit(&self, gamma: u64) -> Vec<u64> {
        closure(gamma, self.m, self.dim(), &generators(self.orbits.symmetry, self.dim(), true))
    }

    /// Size of the dual orbit containing `gamma`, if nonzero.
    pub fn dual_orbit_size(&self, gamma: u64) -> Option<usize> {
        match self.dual_label.get(gamma as usize) {
            Some(&l) if l != NONE => Some(self.dual_sizes[l as usize] as usize),
            _ => None,
        }
    }

    /// Representative of the dual orbit containing `gamma`.
    pub fn canonical_character(&self, gamma: u64) -> Option<u64> {
        match self.dual_label.get(gamma as usize) {
            Some(&l) if l != NONE => Some(self.characters[l as usize]),
            _ => None,
        }
    }

    /// `f` on the whole grid: 1 at the origin, `weights[o]` on orbit `o`.
    pub fn dense_function(&self, weights: &[f64]) -> Vec<Complex64> {
        let mut f = vec![Complex64::new(0.0, 0.0); self.orbits.grid_points() as usize];
        f[0] = Complex64::new(1.0, 0.0);
        for (o, &w) in self.orbits.orbits.iter().zip(weights) {
            for &idx in &o.members {
                f[idx as usize] = Complex64::new(w, 0.0);
            }
        }
        f
    }

    /// `f̂(γ)` at every character, for the function with the given weights.
    pub fn transform(&self, weights: &[f64]) -> Vec<f64> {
        grid_transform(&self.dense_function(weights), self.m, self.dim()).into_iter().map(|z| z.re).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Unbounded,
    BudgetExceeded,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Start empty and add up to `batch` most violated constraints per round.
    ConstraintGeneration { batch: usize },
    /// Use every constraint from the start.
    Eager,
}

/// Summary of one constraint-generation round.
#[derive(Clone, Debug)]
pub struct RoundProgress {
    pub round: usize,
    pub active: usize,
    pub added: usize,
    pub objective: f64,
    pub min_constraint: f64,
    pub iterations: usize,
}

pub type ProgressFn = Box<dyn Fn(&RoundProgress) + Send + Sync>;

pub struct SolveOptions {
    pub eps_feas: f64,
    /// Total simplex pivots across all rounds.
    pub max_iterations: usize,
    pub strategy: Strategy,
    /// Directory for the active-set checkpoint; resumed from when present.
    pub checkpoint_dir: Option<PathBuf>,
    pub progress: Option<ProgressFn>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            eps_feas: DEFAULT_EPS_FEAS,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            strategy: Strategy::ConstraintGeneration { batch: DEFAULT_BATCH },
            checkpoint_dir: None,
            progress: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub d: usize,
    pub m: u32,
    pub status: LpStatus,
    /// `M = 1 + Σ_o |o| w_o`.
    pub value: f64,
    pub weights: Vec<f64>,
    /// Characters of the final restricted problem, in insertion order.
    pub active: Vec<u64>,
    /// Row multipliers aligned with `active`.
    pub duals: Vec<f64>,
    /// Reduced costs of the orbit weights.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    pub rounds: usize,
    /// Least `f̂(γ)` over the whole cube of characters.
    pub min_constraint: f64,
    /// Largest `|λ_i · slack_i|` over the active rows.
    pub complementarity: f64,
}

impl LpSolution {
    pub fn feasible(&self, eps_feas: f64) -> bool {
        self.min_constraint >= -eps_feas && self.weights.iter().all(|&w| w >= -eps_feas)
    }
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    d: usize,
    m: u32,
    symmetry: Symmetry,
    active: Vec<Vec<u32>>,
}

fn checkpoint_path(dir: &Path, p: &LpProblem) -> PathBuf {
    let s = p.orbits.symmetry;
    let tag = match (s.permutations, s.shift) {
        (true, true) => "full",
        (true, false) => "perm",
        (false, true) => "shift",
        (false, false) => "neg",
    };
    dir.join(format!("lp-d{}-m{}-{tag}.json", p.d, p.m))
}

fn load_checkpoint(path: &Path, p: &LpProblem) -> Result<Option<Vec<u64>>, LpError> {
    if !path.exists() {
        return Ok(None);
    }
    let bad = |msg: String| LpError::Checkpoint { path: path.to_path_buf(), msg };
    let c: Checkpoint = serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| bad(e.to_string()))?;
    if c.d != p.d || c.m != p.m || c.symmetry != p.orbits.symmetry {
        return Err(bad(format!("written for d = {}, m = {}, {:?}", c.d, c.m, c.symmetry)));
    }
    let mut seen = HashSet::new();
    let mut active = Vec::new();
    for g in c.active {
        if g.len() != p.dim() || g.iter().any(|&a| a >= p.m) {
            return Err(bad(format!("character {g:?} is not on the grid")));
        }
        if let Some(rep) = p.canonical_character(encode_index(&g, p.m)) {
            if seen.insert(rep) {
                active.push(rep);
            }
        }
    }
    Ok(Some(active))
}

fn save_checkpoint(path: &Path, p: &LpProblem, active: &[u64]) -> Result<(), LpError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let c = Checkpoint {
        d: p.d,
        m: p.m,
        symmetry: p.orbits.symmetry,
        active: active.iter().map(|&g| p.orbits.numerators(g)).collect(),
    };
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, numfmt::to_json_pretty(&c)?)?;
    fs::rename(tmp, path)?;
    Ok(())
}

/// Solves the program by constraint generation over the restricted
/// problem, finishing with a scan of every character.
pub fn solve_lp(p: &LpProblem, opts: &SolveOptions) -> Result<LpSolution, LpError> {
    let nvar = p.variables();
    let objective = p.objective();
    let ckpt = opts.checkpoint_dir.as_ref().map(|d| checkpoint_path(d, p));
    let mut active: Vec<u64> = match opts.strategy {
        Strategy::Eager => p.characters.clone(),
        Strategy::ConstraintGeneration { .. } => match &ckpt {
            Some(path) => load_checkpoint(path, p)?.unwrap_or_default(),
            None => Vec::new(),
        },
    };
    let batch = match opts.strategy {
        Strategy::ConstraintGeneration { batch } => batch.max(1),
        Strategy::Eager => usize::MAX,
    };
    let mut in_active: HashSet<u64> = active.iter().copied().collect();
    let mut rows: Vec<Vec<f64>> = active.par_iter().map(|&g| p.row(g)).collect();
    let mut iterations = 0usize;
    let mut rounds = 0usize;

    loop {
        rounds += 1;
        let lp = DenseLp {
            rows: rows.len(),
            columns: (0..nvar).map(|j| rows.iter().map(|r| -r[j]).collect()).collect(),
            rhs: vec![1.0; rows.len()],
            cost: objective.clone(),
            upper: vec![WEIGHT_UPPER; nvar],
        };
        let res = simplex::solve(&lp, opts.max_iterations.saturating_sub(iterations))?;
        iterations += res.iterations;
        let fhat = p.transform(&res.x);
        let min_constraint = fhat.iter().copied().fold(f64::INFINITY, f64::min);
        let status = match res.status {
            SimplexStatus::Optimal => None,
            SimplexStatus::Unbounded => Some(LpStatus::Unbounded),
            SimplexStatus::IterationLimit => Some(LpStatus::BudgetExceeded),
        };
        let mut violated: Vec<(f64, u64)> = if status.is_none() {
            p.characters
                .par_iter()
                .filter_map(|&g| {
                    let v = fhat[g as usize];
                    (v < -opts.eps_feas && !in_active.contains(&g)).then_some((v, g))
                })
                .collect()
        } else {
            Vec::new()
        };
        violated.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        violated.truncate(batch);
        if let Some(cb) = &opts.progress {
            cb(&RoundProgress {
                round: rounds,
                active: active.len(),
                added: violated.len(),
                objective: 1.0 + res.objective,
                min_constraint,
                iterations,
            });
        }
        if status.is_some() || violated.is_empty() {
            let value = 1.0 + res.objective;
            let status = status.unwrap_or(LpStatus::Optimal);
            let limit = (p.d * p.d) as f64;
            if status == LpStatus::Optimal && value > limit + 1e-6 {
                return Err(LpError::BoundExceeded { value, limit });
            }
            let complementarity = rows
                .iter()
                .zip(&res.duals)
                .map(|(r, y)| {
                    let slack = 1.0 + r.iter().zip(&res.x).map(|(a, w)| a * w).sum::<f64>();
                    (y * slack).abs()
                })
                .fold(0.0, f64::max);
            return Ok(LpSolution {
                d: p.d,
                m: p.m,
                status,
                value,
                weights: res.x,
                active,
                duals: res.duals,
                reduced_costs: res.reduced_costs,
                iterations,
                rounds,
                min_constraint,
                complementarity,
            });
        }
        let new_rows: Vec<Vec<f64>> = violated.par_iter().map(|&(_, g)| p.row(g)).collect();
        for ((_, g), r) in violated.into_iter().zip(new_rows) {
            in_active.insert(g);
            active.push(g);
            rows.push(r);
        }
        if let Some(path) = &ckpt {
            save_checkpoint(path, p, &active)?;
        }
    }
}

#[derive(Serialize)]
pub struct WeightJson {
    pub orbit: usize,
    pub representative: Vec<u32>,
    pub size: usize,
    pub class: PointClass,
    pub value: Num17,
}

#[derive(Serialize)]
pub struct DualJson {
    pub gamma: Vec<u32>,
    pub orbit_size: usize,
    pub value: Num17,
}

/// `{d, m, status, M, weights, dual, …}`.
#[derive(Serialize)]
pub struct LpSolutionJson {
    pub d: usize,
    pub m: u32,
    pub symmetry: Symmetry,
    pub status: LpStatus,
    #[serde(rename = "M")]
    pub value: Num17,
    pub iterations: usize,
    pub rounds: usize,
    pub active_constraints: usize,
    pub min_constraint: Num17,
    pub complementarity: Num17,
    pub weights: Vec<WeightJson>,
    pub dual: Vec<DualJson>,
}

pub fn solution_json(sol: &LpSolution, p: &LpProblem) -> LpSolutionJson {
    let weights = p
        .orbits
        .orbits
        .iter()
        .zip(&sol.weights)
        .enumerate()
        .map(|(i, (o, &w))| WeightJson {
            orbit: i,
            representative: p.orbits.numerators(o.representative),
            size: o.len(),
            class: o.class,
            value: Num17(w),
        })
        .collect();
    let mut dual: Vec<DualJson> = sol
        .active
        .iter()
        .zip(&sol.duals)
        .map(|(&g, &y)| DualJson {
            gamma: p.orbits.numerators(g),
            orbit_size: p.dual_orbit_size(g).unwrap_or(0),
            value: Num17(y),
        })
        .collect();
    dual.sort_by(|a, b| a.gamma.cmp(&b.gamma));
    LpSolutionJson {
        d: sol.d,
        m: sol.m,
        symmetry: p.orbits.symmetry,
        status: sol.status,
        value: Num17(sol.value),
        iterations: sol.iterations,
        rounds: sol.rounds,
        active_constraints: sol.active.len(),
        min_constraint: Num17(sol.min_constraint),
        complementarity: Num17(sol.complementarity),
        weights,
        dual,
    }
}

/// A dual witness together with its independent validation.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    pub polynomial: TrigPolynomial,
    pub report: DelsarteReport,
    /// `|h'(0) - M|` before validation.
    pub duality_gap: f64,
    /// Largest value of the witness over every allowed grid point.
    pub max_on_grid: f64,
    pub valid: bool,
}

#[derive(Serialize)]
pub struct CertificateJson<'a> {
    pub valid: bool,
    pub bound: Num17,
    pub duality_gap: Num17,
    pub max_on_grid: Num17,
    pub report: &'a DelsarteReport,
    pub witness: witness::TrigPolynomialJson,
}

impl DualCertificate {
    pub fn bound(&self) -> f64 {
        self.report.bound.0
    }

    pub fn to_json(&self) -> CertificateJson<'_> {
        CertificateJson {
            valid: self.valid,
            bound: self.report.bound,
            duality_gap: Num17(self.duality_gap),
            max_on_grid: Num17(self.max_on_grid),
            report: &self.report,
            witness: (&self.polynomial).into(),
        }
    }
}

/// Assembles the grid witness `h'` with `ĥ'(0) = 1` and `ĥ'(γ) = λ_γ / |O(γ)|`
/// spread over each dual orbit, then validates it with
/// [`witness::delsarte_bound`] on the orbit representatives and by a full
/// transform over the grid.
pub fn extract_dual_witness(sol: &LpSolution, p: &LpProblem) -> Result<DualCertificate, LpError> {
    if sol.status != LpStatus::Optimal {
        return Err(LpError::NotOptimal(sol.status));
    }
    if let Some(o) = sol.weights.iter().position(|&w| w >= WEIGHT_UPPER - 1e-9) {
        return Err(LpError::Certificate(format!("weight of orbit {o} sits at its upper bound")));
    }
    let lambda: Vec<f64> = sol.duals.iter().map(|&y| y.max(0.0)).collect();
    let h0 = 1.0 + lambda.iter().sum::<f64>();
    let duality_gap = (h0 - sol.value).abs();
    if duality_gap > CERTIFICATE_EPS * sol.value.max(1.0) {
        return Err(LpError::Certificate(format!("duality gap {duality_gap:e}")));
    }
    let n = p.dim();
    let mut dense = vec![Complex64::new(0.0, 0.0); p.orbits.grid_points() as usize];
    dense[0] = Complex64::new(1.0, 0.0);
    let mut terms = vec![(vec![0i64; n], 1.0)];
    for (&g, &l) in sol.active.iter().zip(&lambda) {
        if l <= 0.0 {
            continue;
        }
        let orbit = p.dual_orbit(g);
        let c = l / orbit.len() as f64;
        for idx in orbit {
            dense[idx as usize] = Complex64::new(c, 0.0);
            terms.push((p.orbits.numerators(idx).into_iter().map(i64::from).collect(), c));
        }
    }
    let polynomial = TrigPolynomial::grid(n, p.m, terms)?;
    let report = witness::delsarte_bound(&polynomial, &p.orbits.representatives(), CERTIFICATE_EPS)?;
    let values = grid_transform(&dense, p.m, n);
    let max_on_grid = p
        .orbits
        .orbits
        .iter()
        .flat_map(|o| &o.members)
        .map(|&i| values[i as usize].re)
        .fold(f64::NEG_INFINITY, f64::max);
    let valid = report.valid && max_on_grid <= CERTIFICATE_EPS && (report.bound.0 - sol.value).abs() <= 1e-4;
    Ok(DualCertificate { polynomial, report, duality_gap, max_on_grid, valid })
}

/// The grid function `y ↦ #{(j, k) : u_j - u_k = y}` of a point set.
pub fn difference_function(points: &[TorusPoint], m: u32) -> Result<TrigPolynomial, LpError> {
    let dim = points.first().map_or(0, TorusPoint::dim);
    let mut nums = Vec::with_capacity(points.len());
    for p in points {
        match p.lift(m) {
            Some(TorusPoint::Exact { num, .. }) if num.len() == dim => nums.push(num),
            _ => return Err(LpError::IncompatibleFunction(dim + 1)),
        }
    }
    let mut terms = Vec::with_capacity(nums.len() * nums.len());
    for a in &nums {
        for b in &nums {
            terms.push((a.iter().zip(b).map(|(&x, &y)| x as i64 - y as i64).collect(), 1.0));
        }
    }
    Ok(TrigPolynomial::grid(dim, m, terms)?)
}

/// The LP solution as a grid function, scaled so that `f(0) = scale`.
pub fn solution_function(sol: &LpSolution, p: &LpProblem, scale: f64) -> Result<TrigPolynomial, LpError> {
    let mut terms = vec![(vec![0i64; p.dim()], scale)];
    for (o, &w) in p.orbits.orbits.iter().zip(&sol.weights) {
        for &idx in &o.members {
            terms.push((p.orbits.numerators(idx).into_iter().map(i64::from).collect(), w * scale));
        }
    }
    Ok(TrigPolynomial::grid(p.dim(), p.m, terms)?)
}

/// One line per condition of a complete pseudo-MUB system.
#[derive(Clone, Debug, Serialize)]
pub struct PseudoMubReport {
    pub d: usize,
    pub m: u32,
    pub support_allowed: bool,
    pub offending_point: Option<Vec<u32>>,
    pub transform_nonnegative: bool,
    pub min_transform: Num17,
    pub total_correct: bool,
    pub total: Num17,
    pub origin_correct: bool,
    pub origin: Num17,
    pub is_pseudo_mub: bool,
}

/// Checks the four defining conditions: support in `ORT ∪ UB ∪ {0}`,
/// `f̂ >= -eps`, `Σ f = d⁴` and `f(0) = d²` (the last two relative to `d⁴`).
pub fn pseudo_mub_check(f: &TrigPolynomial, d: usize, eps: f64, budget: u64) -> Result<PseudoMubReport, LpError> {
    let m = match f.mode() {
        witness::Mode::Grid(m) if d >= 2 && f.dim() == d - 1 => m,
        _ => return Err(LpError::IncompatibleFunction(d)),
    };
    let total_points = torus::grid_size(d, m, budget)?;
    let n = d - 1;
    let classifier = GridClassifier::new(d, m)?;
    let mut scratch = classifier.scratch();
    let mut dense = vec![Complex64::new(0.0, 0.0); total_points as usize];
    let mut offending = None;
    for (g, c) in f.float_terms() {
        let num: Vec<u32> = g.iter().map(|&a| a as u32).collect();
        dense[encode_index(&num, m) as usize] = Complex64::new(*c, 0.0);
        if offending.is_none() && !classifier.classify_exact(&num, &mut scratch).is_allowed() && num.iter().any(|&a| a != 0) {
            offending = Some(num);
        }
    }
    let min_transform = grid_transform(&dense, m, n).iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let total: f64 = f.float_terms().iter().map(|(_, c)| c).sum();
    let origin = f.constant_term();
    let d2 = (d * d) as f64;
    let scale = d2 * d2;
    let support_allowed = offending.is_none();
    let transform_nonnegative = min_transform >= -eps;
    let total_correct = (total - scale).abs() <= eps * scale;
    let origin_correct = (origin - d2).abs() <= eps * scale;
    Ok(PseudoMubReport {
        d,
        m,
        support_allowed,
        offending_point: offending,
        transform_nonnegative,
        min_transform: Num17(min_transform),
        total_correct,
        total: Num17(total),
        origin_correct,
        origin: Num17(origin),
        is_pseudo_mub: support_allowed && transform_nonnegative && total_correct && origin_correct,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::DEFAULT_GRID_BUDGET;

    fn problem(d: usize, m: u32, s: Symmetry) -> LpProblem {
        build_pseudo_mub_lp(build_orbits(d, m, s, DEFAULT_GRID_BUDGET).unwrap())
    }

    #[test]
    fn orbit_examples() {
        let t = build_orbits(3, 3, Symmetry::default(), DEFAULT_GRID_BUDGET).unwrap();
        assert_eq!(t.count(PointClass::Ort), 1);
        assert_eq!(t.count(PointClass::Ub), 2);
        assert_eq!(t.orbits[0].members.len() + t.orbits[1].members.len() + t.orbits[2].members.len(), 8);
        let t = build_orbits(2, 2, Symmetry::default(), DEFAULT_GRID_BUDGET).unwrap();
        assert_eq!(t.orbits.len(), 1);
        assert_eq!(t.orbits[0].members, vec![1]);
        let t = build_orbits(6, 4, Symmetry::default(), DEFAULT_GRID_BUDGET).unwrap();
        assert!(t.orbits.iter().all(|o| o.class == PointClass::Ort));
    }

    #[test]
    fn orbits_partition_the_allowed_set() {
        for (d, m) in [(3, 6), (4, 4), (4, 6), (5, 5)] {
            let grid = torus::enumerate_grid(d, m, DEFAULT_GRID_BUDGET).unwrap();
            for s in [Symmetry::default(), Symmetry::negation_only(), Symmetry::with_shift()] {
                let t = build_orbits(d, m, s, DEFAULT_GRID_BUDGET).unwrap();
                assert_eq!(t.allowed_points(), grid.len());
                for o in &t.orbits {
                    assert_eq!(o.representative, o.members[0]);
                    for &i in &o.members {
                        assert_eq!(torus::classify(&t.point(i), d).unwrap(), o.class);
                    }
                }
            }
        }
    }

    #[test]
    fn transform_matches_direct_sum() {
        let p = problem(4, 5, Symmetry::default());
        let w: Vec<f64> = (0..p.variables()).map(|i| 0.1 * (i % 7) as f64).collect();
        let fhat = p.transform(&w);
        for &g in p.characters.iter().take(20) {
            let direct = 1.0 + p.row(g).iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
            assert!((fhat[g as usize] - direct).abs() < 1e-10);
            for h in p.dual_orbit(g) {
                assert!((fhat[h as usize] - direct).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn small_optima() {
        let s = solve_lp(&problem(3, 3, Symmetry::default()), &SolveOptions::default()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.value - 9.0).abs() < 1e-6);
        // One variable, one constraint 1 - w >= 0.
        let p = problem(2, 2, Symmetry::default());
        assert_eq!(p.variables(), 1);
        assert_eq!(p.characters.len(), 1);
        assert_eq!(p.row(1), vec![-1.0]);
        let s = solve_lp(&p, &SolveOptions::default()).unwrap();
        assert!((s.value - 2.0).abs() < 1e-9);
    }

    #[test]
    fn symmetrization_is_sound() {
        for (d, m) in [(3, 3), (2, 4), (3, 6), (4, 4)] {
            let a = solve_lp(&problem(d, m, Symmetry::default()), &SolveOptions::default()).unwrap();
            let b = solve_lp(&problem(d, m, Symmetry::negation_only()), &SolveOptions::default()).unwrap();
            let c = solve_lp(&problem(d, m, Symmetry::with_shift()), &SolveOptions::default()).unwrap();
            assert!((a.value - b.value).abs() < 1e-6, "{d} {m}: {} vs {}", a.value, b.value);
            assert!((a.value - c.value).abs() < 1e-6, "{d} {m}: {} vs {}", a.value, c.value);
        }
    }

    #[test]
    fn eager_and_generated_agree() {
        let p = problem(4, 6, Symmetry::default());
        let a = solve_lp(&p, &SolveOptions::default()).unwrap();
        let b = solve_lp(&p, &SolveOptions { strategy: Strategy::Eager, ..Default::default() }).unwrap();
        assert!((a.value - b.value).abs() < 1e-7);
        assert!(a.feasible(DEFAULT_EPS_FEAS) && b.feasible(DEFAULT_EPS_FEAS));
    }

    #[test]
    fn certificates() {
        for (d, m) in [(2, 2), (3, 3), (4, 6), (5, 5)] {
            let p = problem(d, m, Symmetry::default());
            let s = solve_lp(&p, &SolveOptions::default()).unwrap();
            let c = extract_dual_witness(&s, &p).unwrap();
            assert!(c.valid, "{d} {m}: {:?}", c.report.violations);
            assert!((c.bound() - s.value).abs() < 1e-4);
        }
    }

    #[test]
    fn iteration_budget() {
        let p = problem(4, 6, Symmetry::default());
        let s = solve_lp(&p, &SolveOptions { max_iterations: 1, ..Default::default() }).unwrap();
        assert_eq!(s.status, LpStatus::BudgetExceeded);
        assert!(extract_dual_witness(&s, &p).is_err());
    }

    #[test]
    fn checkpoint_resume() {
        let dir = tempfile::tempdir().unwrap();
        let p = problem(4, 6, Symmetry::default());
        let opts = SolveOptions { checkpoint_dir: Some(dir.path().into()), ..Default::default() };
        let a = solve_lp(&p, &opts).unwrap();
        let b = solve_lp(&p, &opts).unwrap();
        assert!((a.value - b.value).abs() < 1e-9);
        assert!(b.rounds <= 2);
        let other = problem(4, 6, Symmetry::negation_only());
        let path = checkpoint_path(dir.path(), &p);
        assert!(matches!(load_checkpoint(&path, &other), Err(LpError::Checkpoint { .. })));
    }

    #[test]
    fn pseudo_mub_examples() {
        let fam = crate::constructions::prime_mubs(3).unwrap();
        let pts = crate::hadamard::family_to_points(&fam, Some(3), 1e-9).unwrap();
        let f = difference_function(&pts, 3).unwrap();
        let r = pseudo_mub_check(&f, 3, 1e-9, DEFAULT_GRID_BUDGET).unwrap();
        assert!(r.is_pseudo_mub, "{r:?}");

        let delta = TrigPolynomial::grid(2, 3, [(vec![0, 0], 9.0)]).unwrap();
        let r = pseudo_mub_check(&delta, 3, 1e-9, DEFAULT_GRID_BUDGET).unwrap();
        assert!(!r.is_pseudo_mub && !r.total_correct && r.origin_correct);

        let bad = TrigPolynomial::grid(5, 2, [(vec![0, 0, 0, 0, 0], 36.0), (vec![0, 0, 0, 0, 1], 1.0)]).unwrap();
        let r = pseudo_mub_check(&bad, 6, 1e-9, DEFAULT_GRID_BUDGET).unwrap();
        assert_eq!(r.offending_point, Some(vec![0, 0, 0, 0, 1]));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(24))]
        #[test]
        fn optimum_respects_the_witness_bound(d in 2usize..=4, m in 1u32..=9, shift in proptest::bool::ANY) {
            let s = if shift { Symmetry::with_shift() } else { Symmetry::default() };
            let p = problem(d, m, s);
            let total: usize = p.orbits.orbits.iter().map(Orbit::len).sum();
            proptest::prop_assert_eq!(total, torus::enumerate_grid(d, m, DEFAULT_GRID_BUDGET).unwrap().len());
            let sol = solve_lp(&p, &SolveOptions::default()).unwrap();
            proptest::prop_assert_eq!(sol.status, LpStatus::Optimal);
            proptest::prop_assert!(sol.value <= (d * d) as f64 + 1e-6);
            proptest::prop_assert!(sol.value >= 1.0);
            proptest::prop_assert!(sol.feasible(DEFAULT_EPS_FEAS));
            let c = extract_dual_witness(&sol, &p).unwrap();
            proptest::prop_assert!(c.valid);
        }
    }
}
