//! Exhaustive oracles for small instances.
//!
//! These are deliberately simple and written apart from the fast paths so
//! that tests can cross-check one against the other.

use std::collections::HashMap;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::game::{Action, ActionProfile, Game};
use crate::policy::{self, Control, DynamicPolicy};
use crate::sim::Sim;
use crate::Rational;

pub const BRUTE_STATIC_MAX: usize = 14;
pub const BRUTE_DYNAMIC_MAX: usize = 10;
pub const BRUTE_COVER_MAX: usize = 20;

/// Actions of a player that survive iterated elimination.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Survivor {
    Zero,
    One,
    Interval,
}

impl Survivor {
    pub fn to_action(self) -> Action {
        match self {
            Survivor::Zero => Action::Zero,
            Survivor::One => Action::One,
            Survivor::Interval => Action::Undecided,
        }
    }
}

impl fmt::Display for Survivor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Survivor::Zero => "{0}",
            Survivor::One => "{1}",
            Survivor::Interval => "[0,1]",
        })
    }
}

impl Serialize for Survivor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Iterated elimination of strictly dominated actions.
///
/// Each player keeps an interval `[lo, hi]` of surviving actions. Action 1
/// strictly dominates when `c_i * sum(hi_j) < 1`; action 0 strictly
/// dominates when `c_i * sum(lo_j) > 1`. Eliminations are applied in
/// place, player by player, until a full sweep changes nothing.
pub fn iterated_elimination_oracle(game: &Game) -> Vec<Survivor> {
    let n = game.n();
    let g = game.graph();
    let mut lo = vec![0u32; n];
    let mut hi = vec![1u32; n];
    loop {
        let mut changed = false;
        for i in 0..n {
            if lo[i] == hi[i] {
                continue;
            }
            let worst: u32 = g.neighbors(i).iter().map(|&j| hi[j]).sum();
            let best: u32 = g.neighbors(i).iter().map(|&j| lo[j]).sum();
            let c = game.c(i);
            if 1.0 > c * worst as f64 {
                lo[i] = 1;
                changed = true;
            } else if 1.0 < c * best as f64 {
                hi[i] = 0;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    (0..n)
        .map(|i| match (lo[i], hi[i]) {
            (1, 1) => Survivor::One,
            (0, 0) => Survivor::Zero,
            _ => Survivor::Interval,
        })
        .collect()
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order until it
/// returns `true`.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut f: impl FnMut(&[usize]) -> bool,
) -> bool {
    if k > n {
        return false;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if f(&idx) {
            return true;
        }
        // Rightmost position that can still advance.
        let mut p = k;
        while p > 0 && idx[p - 1] == n - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            return false;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Every assignment of forced actions to `players`, all-zero first, in
/// lexicographic order with 0 before 1.
fn for_each_assignment(players: &[usize], mut f: impl FnMut(Control) -> bool) -> bool {
    let k = players.len();
    for mask in 0u64..(1u64 << k) {
        let control = Control::unchecked(players.iter().enumerate().map(|(b, &i)| {
            let bit = (mask >> (k - 1 - b)) & 1 == 1;
            (i, Action::from_bit(bit))
        }));
        if f(control) {
            return true;
        }
    }
    false
}

fn check_size(n: usize, max: usize) -> Result<()> {
    if n > max {
        Err(Error::TooLarge { n, max })
    } else {
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StaticSolution {
    pub policy: Control,
    pub cost: usize,
}

/// Minimum static policy by enumeration in increasing size.
///
/// The witness is the first feasible policy in (size, subset, forced
/// actions) lexicographic order.
pub fn brute_static(game: &Game) -> Result<StaticSolution> {
    let n = game.n();
    check_size(n, BRUTE_STATIC_MAX)?;
    for k in 0..=n {
        let mut found = None;
        for_each_combination(n, k, |players| {
            for_each_assignment(players, |control| {
                if policy::static_feasible(game, &control) {
                    found = Some(control);
                    true
                } else {
                    false
                }
            })
        });
        if let Some(policy) = found {
            return Ok(StaticSolution { policy, cost: k });
        }
    }
    unreachable!("forcing every player to 0 is always feasible")
}

/// Best policy found in the two-phase class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RestrictedDynamicSolution {
    pub policy: DynamicPolicy,
    #[serde(serialize_with = "ratio_string")]
    pub cost: Rational,
    /// Controlled at `t = 0, 1`.
    pub head: Control,
    /// Forced to 0 at every `t >= n`.
    pub tail: Control,
    pub class: &'static str,
}

fn ratio_string<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

pub const RESTRICTED_CLASS: &str = "head control at t=0,1 plus zero-forced tail for t>=n";

fn two_phase(n: usize, head: &Control, tail: Control) -> DynamicPolicy {
    let steps = (0..n).map(|t| {
        if t < 2 {
            head.clone()
        } else {
            Control::default()
        }
    });
    DynamicPolicy::new(steps.collect(), tail)
}

/// Whether holding `tail` from a start whose unforced profile is `y`
/// keeps maximum anti-coordination forever.
fn tail_feasible(game: &Game, y: &[Action], tail: &Control) -> bool {
    let mut sim = Sim::new(game, y.to_vec());
    sim.impose(tail);
    let mut seen = std::collections::HashSet::new();
    loop {
        let a = sim.actions();
        if !game
            .graph()
            .is_max_anticoordination(&ActionProfile::new(a.to_vec()))
        {
            return false;
        }
        if !seen.insert(a.to_vec()) {
            return true;
        }
        if sim.step(tail) == 0 {
            return true;
        }
    }
}

#[derive(Default)]
struct TailMemo {
    /// All tails smaller than this are infeasible.
    checked_below: usize,
    found: Option<Control>,
}

impl TailMemo {
    /// Smallest feasible tail with fewer than `limit` players.
    fn query(&mut self, game: &Game, y: &[Action], limit: usize) -> Option<Control> {
        if let Some(t) = &self.found {
            return (t.len() < limit).then(|| t.clone());
        }
        let n = game.n();
        while self.checked_below < limit.min(n + 1) {
            let k = self.checked_below;
            let mut hit = None;
            for_each_combination(n, k, |players| {
                let t = Control::zeros(players.iter().copied());
                if tail_feasible(game, y, &t) {
                    hit = Some(t);
                    true
                } else {
                    false
                }
            });
            if let Some(t) = hit {
                self.found = Some(t.clone());
                return Some(t);
            }
            self.checked_below += 1;
        }
        None
    }
}

/// Cheapest policy of the form "control `H` at `t = 0, 1`, then force a
/// set `T` to 0 for all `t >= n`", over all `H`, forced actions on `H`,
/// and `T`.
///
/// This is an upper bound on the unrestricted dynamic optimum.
pub fn brute_dynamic_restricted(game: &Game) -> Result<RestrictedDynamicSolution> {
    let n = game.n();
    check_size(n, BRUTE_DYNAMIC_MAX)?;
    let nn = n.max(1) as u64;
    let mut memo: HashMap<Vec<Action>, TailMemo> = HashMap::new();
    let mut best: Option<(Rational, Control, Control)> = None;
    for h in 0..=n {
        let head_cost = Rational::new(2 * h as u64, nn);
        if best.as_ref().is_some_and(|(c, _, _)| head_cost >= *c) {
            break;
        }
        for_each_combination(n, h, |players| {
            for_each_assignment(players, |head| {
                let head_cost = Rational::new(2 * h as u64, nn);
                // Tail sizes that would still improve on the best so far.
                let limit = match &best {
                    None => n + 1,
                    Some((c, _, _)) => {
                        let room = *c - head_cost;
                        (room.ceil().to_integer() as usize).min(n + 1)
                    }
                };
                if limit == 0 {
                    return false;
                }
                let probe = two_phase(n, &head, Control::default());
                let mut sim = Sim::new(game, vec![Action::Undecided; n]);
                sim.impose(probe.at(0));
                for t in 1..=n {
                    sim.step(probe.at(t));
                }
                // Unforced profile y^n; the tail is imposed on top of it.
                let y = sim.actions().to_vec();
                let entry = memo.entry(y.clone()).or_default();
                if let Some(tail) = entry.query(game, &y, limit) {
                    let cost = head_cost + Rational::from_integer(tail.len() as u64);
                    if best.as_ref().is_none_or(|(c, _, _)| cost < *c) {
                        best = Some((cost, head, tail));
                    }
                }
                false
            })
        });
    }
    let (cost, head, tail) = best.expect("the all-zero tail is always feasible");
    let policy = two_phase(n, &head, tail.clone());
    debug_assert!(policy::validate_dynamic(game, &policy)
        .map(|r| r.feasible)
        .unwrap_or(false));
    Ok(RestrictedDynamicSolution {
        policy,
        cost,
        head,
        tail,
        class: RESTRICTED_CLASS,
    })
}

/// Minimum vertex cover of `edges` over `nodes` by exhaustive search.
pub fn brute_min_vertex_cover(nodes: &[usize], edges: &[(usize, usize)]) -> Result<Vec<usize>> {
    check_size(nodes.len(), BRUTE_COVER_MAX)?;
    for k in 0..=nodes.len() {
        let mut found = None;
        for_each_combination(nodes.len(), k, |pick| {
            let chosen: Vec<usize> = pick.iter().map(|&p| nodes[p]).collect();
            let covers = edges
                .iter()
                .all(|(i, j)| chosen.contains(i) || chosen.contains(j));
            if covers {
                found = Some(chosen);
            }
            covers
        });
        if let Some(cover) = found {
            return Ok(cover);
        }
    }
    unreachable!("the full node set covers every edge between its members")
}

/// All Nash equilibria with no active edge, in lexicographic order with
/// 0 before 1.
pub fn anticoordinating_equilibria(game: &Game) -> Result<Vec<ActionProfile>> {
    let n = game.n();
    check_size(n, policy::EQUILIBRIUM_ENUMERATION_MAX)?;
    let mut out = Vec::new();
    let mut ones = vec![false; n];

    // Players at 1 form an independent set; enumerate those by
    // backtracking and keep the profiles that are equilibria.
    fn rec(i: usize, ones: &mut Vec<bool>, game: &Game, out: &mut Vec<ActionProfile>) {
        let n = ones.len();
        if i == n {
            let p = ActionProfile::new(ones.iter().map(|&b| Action::from_bit(b)).collect());
            if game.is_nash(&p).unwrap_or(false) {
                out.push(p);
            }
            return;
        }
        rec(i + 1, ones, game, out);
        if game.graph().neighbors(i).iter().all(|&j| j > i || !ones[j]) {
            ones[i] = true;
            rec(i + 1, ones, game, out);
            ones[i] = false;
        }
    }
    rec(0, &mut ones, game, &mut out);
    Ok(out)
}
