//! Control policies, their costs, and exact feasibility checks.
//!
//! A static policy holds a fixed set of players at fixed actions forever.
//! A dynamic policy here is eventually constant: an explicit `head` of
//! per-step controls followed by a `tail` control repeated forever.
//!
//! Costs use the convention `J_d = (1/n) * sum_{t<n} |X^t| + |tail|`, so a
//! control at `t = 0, 1` costs `2/n` and a control held from `t = n` on
//! costs its size. Holding a static policy forever costs `2 |X|`.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact;
use crate::game::{Action, ActionProfile, Game};
use crate::learning::{self, check_forced};
use crate::sim::Sim;
use crate::Rational;

/// A set of controlled players with their forced actions.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "ControlFile", into = "ControlFile")]
pub struct Control {
    forced: BTreeMap<usize, Action>,
}

/// On-disk layout: `{"controlled": [2, 4], "forced": {"2": 0, "4": 1}}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControlFile {
    pub controlled: Vec<usize>,
    pub forced: BTreeMap<usize, Action>,
}

impl TryFrom<ControlFile> for Control {
    type Error = Error;

    fn try_from(file: ControlFile) -> Result<Self> {
        let mut ids = file.controlled.clone();
        ids.sort_unstable();
        ids.dedup();
        if ids.len() != file.controlled.len() {
            return Err(Error::InvalidPolicy("controlled players repeat".into()));
        }
        if !ids.iter().copied().eq(file.forced.keys().copied()) {
            return Err(Error::InvalidPolicy(
                "forced actions must be given for exactly the controlled players".into(),
            ));
        }
        Control::from_pairs(file.forced)
    }
}

impl From<Control> for ControlFile {
    fn from(c: Control) -> Self {
        ControlFile {
            controlled: c.forced.keys().copied().collect(),
            forced: c.forced,
        }
    }
}

impl Control {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (usize, Action)>) -> Result<Self> {
        let mut forced = BTreeMap::new();
        for (i, a) in pairs {
            check_forced(i, a)?;
            forced.insert(i, a);
        }
        Ok(Self { forced })
    }

    /// No validation; callers must check with [`Control::check`].
    pub(crate) fn unchecked(pairs: impl IntoIterator<Item = (usize, Action)>) -> Self {
        Self {
            forced: pairs.into_iter().collect(),
        }
    }

    /// Every listed player forced to 0.
    pub fn zeros(players: impl IntoIterator<Item = usize>) -> Self {
        Self::uniform(players, Action::Zero)
    }

    /// Every listed player forced to 1.
    pub fn ones(players: impl IntoIterator<Item = usize>) -> Self {
        Self::uniform(players, Action::One)
    }

    fn uniform(players: impl IntoIterator<Item = usize>, a: Action) -> Self {
        Self {
            forced: players.into_iter().map(|i| (i, a)).collect(),
        }
    }

    pub fn get(&self, i: usize) -> Option<Action> {
        self.forced.get(&i).copied()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.forced.contains_key(&i)
    }

    pub fn insert(&mut self, i: usize, a: Action) -> Result<()> {
        check_forced(i, a)?;
        self.forced.insert(i, a);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Action)> + '_ {
        self.forced.iter().map(|(&i, &a)| (i, a))
    }

    pub fn players(&self) -> Vec<usize> {
        self.forced.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.forced.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forced.is_empty()
    }

    /// Union; on overlap the entries of `other` win.
    pub fn union(&self, other: &Control) -> Control {
        let mut forced = self.forced.clone();
        forced.extend(other.forced.iter().map(|(&i, &a)| (i, a)));
        Control { forced }
    }

    pub fn check(&self, n: usize) -> Result<()> {
        for (i, a) in self.iter() {
            if i >= n {
                return Err(Error::PlayerOutOfRange { player: i, n });
            }
            check_forced(i, a)?;
        }
        Ok(())
    }

    /// Overrides `profile` with the forced actions.
    pub fn apply(&self, profile: &mut ActionProfile) {
        let actions = profile.actions_mut();
        for (i, a) in self.iter() {
            actions[i] = a;
        }
    }
}

/// Control `head[t]` at step `t < head.len()`, then `tail` forever.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DynamicPolicy {
    pub head: Vec<Control>,
    pub tail: Control,
}

impl DynamicPolicy {
    pub fn new(head: Vec<Control>, tail: Control) -> Self {
        Self { head, tail }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// A static policy held at every step.
    pub fn repeat(control: Control) -> Self {
        Self {
            head: Vec::new(),
            tail: control,
        }
    }

    /// `control` at `t = 0, 1`, nothing afterwards.
    pub fn two_step(control: Control) -> Self {
        Self {
            head: vec![control.clone(), control],
            tail: Control::default(),
        }
    }

    /// Nothing before `t = n`, then `tail` forever.
    pub fn from_time(n: usize, tail: Control) -> Self {
        Self {
            head: vec![Control::default(); n],
            tail,
        }
    }

    pub fn at(&self, t: usize) -> &Control {
        self.head.get(t).unwrap_or(&self.tail)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        self.head
            .iter()
            .chain(std::iter::once(&self.tail))
            .try_for_each(|c| c.check(n))
    }

    /// No player is ever controlled.
    pub fn is_empty(&self) -> bool {
        self.tail.is_empty() && self.head.iter().all(Control::is_empty)
    }
}

/// Policy file: `{"static": {...}}` or `{"dynamic": {"head": [...], "tail": {...}}}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Static(Control),
    Dynamic(DynamicPolicy),
}

impl Policy {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// First violated constraint of an infeasible policy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    ActiveEdge { time: usize, edge: (usize, usize) },
    Undecided { time: usize, player: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CostReport {
    /// `|X_s|` for static policies.
    pub static_cost: Option<usize>,
    /// `J_d`; for a static policy, that of holding it forever.
    #[serde(serialize_with = "ratio_string")]
    pub dynamic_cost: Rational,
    pub feasible: bool,
    pub witness: Option<Violation>,
}

fn ratio_string<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

pub fn cost_static(policy: &Control) -> usize {
    policy.len()
}

pub fn cost_dynamic(policy: &DynamicPolicy, n: usize) -> Rational {
    let early: usize = (0..n).map(|t| policy.at(t).len()).sum();
    let n = n.max(1) as u64;
    Rational::new(early as u64, n) + Rational::from_integer(policy.tail.len() as u64)
}

/// Checks that `actions` is decided with no active edge.
fn violation(game: &Game, actions: &[Action], time: usize) -> Option<Violation> {
    let g = game.graph();
    if let Some(&edge) = g
        .edges()
        .iter()
        .find(|&&(i, j)| actions[i].is_active() && actions[j].is_active())
    {
        return Some(Violation::ActiveEdge { time, edge });
    }
    actions
        .iter()
        .position(|a| !a.is_decided())
        .map(|player| Violation::Undecided { time, player })
}

/// Profile at time `n` of a static policy started from all-undecided.
pub fn static_outcome(game: &Game, policy: &Control) -> Result<ActionProfile> {
    policy.check(game.n())?;
    Ok(ActionProfile::new(static_outcome_unchecked(game, policy)))
}

pub(crate) fn static_outcome_unchecked(game: &Game, policy: &Control) -> Vec<Action> {
    let n = game.n();
    let mut sim = Sim::new(game, vec![Action::Undecided; n]);
    sim.impose(policy);
    for _ in 0..n {
        if sim.step(policy) == 0 {
            break;
        }
    }
    sim.actions().to_vec()
}

pub(crate) fn static_feasible(game: &Game, policy: &Control) -> bool {
    violation(game, &static_outcome_unchecked(game, policy), game.n()).is_none()
}

/// Holds `policy` from all-undecided and checks the profile at `t = n`.
pub fn validate_static(game: &Game, policy: &Control) -> Result<CostReport> {
    let n = game.n();
    let a = static_outcome(game, policy)?;
    let witness = violation(game, a.actions(), n);
    Ok(CostReport {
        static_cost: Some(cost_static(policy)),
        dynamic_cost: cost_dynamic(&DynamicPolicy::repeat(policy.clone()), n),
        feasible: witness.is_none(),
        witness,
    })
}

/// First violation at some `t >= n`, if any. Exact: once the policy is in
/// its tail the dynamics are autonomous, so the check ends at the first
/// repeated profile.
pub(crate) fn dynamic_violation(game: &Game, policy: &DynamicPolicy) -> Option<Violation> {
    let n = game.n();
    let autonomous_from = n.max(policy.head.len());
    let mut sim = Sim::new(game, vec![Action::Undecided; n]);
    sim.impose(policy.at(0));
    let mut seen: HashSet<Vec<Action>> = HashSet::new();
    let mut t = 0;
    loop {
        if t >= n {
            if let Some(v) = violation(game, sim.actions(), t) {
                return Some(v);
            }
        }
        if t >= autonomous_from && !seen.insert(sim.actions().to_vec()) {
            return None;
        }
        let changed = sim.step(policy.at(t + 1));
        t += 1;
        if changed == 0 && t > autonomous_from {
            return None;
        }
    }
}

/// Checks maximum anti-coordination at every `t >= n`.
pub fn validate_dynamic(game: &Game, policy: &DynamicPolicy) -> Result<CostReport> {
    policy.check(game.n())?;
    let witness = dynamic_violation(game, policy);
    Ok(CostReport {
        static_cost: None,
        dynamic_cost: cost_dynamic(policy, game.n()),
        feasible: witness.is_none(),
        witness,
    })
}

/// Outcome of the structural checks on a set of candidate policies. Each
/// entry is `None` when its premise does not apply.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    /// Feasible static policies keep anti-coordination on `(n, 3n]`.
    pub persistence: Option<bool>,
    /// Best dynamic cost is at most twice the best static cost.
    pub dynamic_within_twice_static: Option<bool>,
    /// On dominance-solvable games the best dynamic policy is either
    /// empty or controls someone forever.
    pub dominance_solvable_dichotomy: Option<bool>,
    /// If anti-coordinating equilibria exist, the best dynamic policy
    /// reaches one.
    pub reaches_equilibrium: Option<bool>,
    pub best_static: Option<usize>,
    #[serde(serialize_with = "opt_ratio_string")]
    pub best_dynamic: Option<Rational>,
    pub best_dynamic_policy: Option<DynamicPolicy>,
}

fn opt_ratio_string<S: Serializer>(
    r: &Option<Rational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match r {
        Some(r) => s.serialize_str(&r.to_string()),
        None => s.serialize_none(),
    }
}

/// Largest game for which equilibria are enumerated.
pub const EQUILIBRIUM_ENUMERATION_MAX: usize = 20;

/// Evaluates the four structural properties on the given candidates.
///
/// The best dynamic policy is the cheapest feasible one among `dynamics`
/// and the hold-forever embeddings of the feasible `statics`.
pub fn check_lemma_properties(
    game: &Game,
    statics: &[Control],
    dynamics: &[DynamicPolicy],
) -> Result<LemmaReport> {
    let n = game.n();
    let mut feasible_statics = Vec::new();
    for s in statics {
        if validate_static(game, s)?.feasible {
            feasible_statics.push(s);
        }
    }

    let persistence = (!feasible_statics.is_empty()).then(|| {
        feasible_statics.iter().all(|s| {
            let mut sim = Sim::new(game, vec![Action::Undecided; n]);
            sim.impose(s);
            (1..=3 * n).all(|t| {
                sim.step(s);
                t <= n || violation(game, sim.actions(), t).is_none()
            })
        })
    });
    let best_static = feasible_statics.iter().map(|s| s.len()).min();

    let mut best: Option<(Rational, DynamicPolicy)> = None;
    let embedded = feasible_statics
        .iter()
        .map(|&s| DynamicPolicy::repeat(s.clone()));
    for p in dynamics.iter().cloned().chain(embedded) {
        let report = validate_dynamic(game, &p)?;
        if report.feasible && best.as_ref().is_none_or(|(c, _)| report.dynamic_cost < *c) {
            best = Some((report.dynamic_cost, p));
        }
    }

    let dynamic_within_twice_static = match (&best, best_static) {
        (Some((c, _)), Some(s)) => Some(*c <= Rational::from_integer(2 * s as u64)),
        _ => None,
    };

    let solvable = learning::run_from_undecided(game).last().is_decided();
    let dominance_solvable_dichotomy = match (&best, solvable) {
        (Some((_, p)), true) => Some(p.is_empty() || !p.tail.is_empty()),
        _ => None,
    };

    let reaches_equilibrium = match &best {
        Some((_, p)) if n <= EQUILIBRIUM_ENUMERATION_MAX => {
            let targets: HashSet<ActionProfile> = exact::anticoordinating_equilibria(game)?
                .into_iter()
                .collect();
            if targets.is_empty() {
                None
            } else {
                let horizon = 2 * n.max(p.head.len()) + 2;
                let tr = learning::controlled_run(game, &ActionProfile::undecided(n), p, horizon)?;
                let last = tr.profiles.len() - 1;
                Some((n..=horizon).any(|t| targets.contains(&tr.profiles[t.min(last)])))
            }
        }
        _ => None,
    };

    Ok(LemmaReport {
        persistence,
        dynamic_within_twice_static,
        dominance_solvable_dichotomy,
        reaches_equilibrium,
        best_static,
        best_dynamic: best.as_ref().map(|(c, _)| *c),
        best_dynamic_policy: best.map(|(_, p)| p),
    })
}
