//! Greedy control selection driven by cascade potentials, plus the
//! max-degree, random and vertex-cover baselines.
//!
//! Each round lets the dynamics settle under the control chosen so far,
//! then adds one player. Selected players stay controlled for good.
//!
//! The settled state depends on the order of selections, so the final set
//! can end on a profile that the same set, held from the start, does not
//! reach. In that case selection resumes from the static outcome until the
//! set is feasible on its own. The dynamic policy replays the selection
//! schedule when that schedule is feasible, and otherwise holds the static
//! set forever.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{Action, ActionProfile, Game};
use crate::learning::check_forced;
use crate::policy::{dynamic_violation, static_feasible, Control, DynamicPolicy};
use crate::sim::Sim;
use crate::vertex_cover;
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "cp")]
    Cp,
    #[serde(rename = "cp2")]
    Cp2,
    #[serde(rename = "maxdeg")]
    MaxDegree,
    #[serde(rename = "rand")]
    Rand,
    #[serde(rename = "vc")]
    Vc,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::Cp,
        Variant::Cp2,
        Variant::MaxDegree,
        Variant::Rand,
        Variant::Vc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Cp => "cp",
            Variant::Cp2 => "cp2",
            Variant::MaxDegree => "maxdeg",
            Variant::Rand => "rand",
            Variant::Vc => "vc",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidPolicy(format!("unknown greedy variant {s:?}")))
    }
}

/// How ties between equally good candidates are resolved.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    /// Lowest player index, then 0 before 1.
    Lowest,
    /// Uniform among the best, from a seeded generator.
    Seeded(u64),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GreedyResult {
    pub variant: Variant,
    /// Players in selection order.
    pub controlled: Vec<usize>,
    pub forced: Control,
    /// Steps the dynamics needed to settle before each selection and after
    /// the last one.
    pub convergence_times: Vec<usize>,
    pub static_policy: Control,
    pub dynamic_policy: DynamicPolicy,
}

impl GreedyResult {
    pub fn selections(&self) -> usize {
        self.controlled.len()
    }
}

pub fn control_effort(result: &GreedyResult, n: usize) -> Rational {
    Rational::new(result.controlled.len() as u64, n as u64)
}

/// Active edges removed by holding `i` at `force` for `n` steps from
/// `profile`. Negative when the cascade re-activates more than it kills.
pub fn cascade_potential(
    game: &Game,
    profile: &ActionProfile,
    i: usize,
    force: Action,
) -> Result<i64> {
    game.graph().check_profile(profile)?;
    game.graph().check_player(i)?;
    check_forced(i, force)?;
    let sim = Sim::new(game, profile.actions().to_vec());
    let before = game.graph().count_active_edges(profile.actions()) as i64;
    let mut control = Control::default();
    control.insert(i, force)?;
    let (after, _) = held_outcome(&sim, &control, game.n());
    Ok(before - after as i64)
}

/// Imposes `control` on a copy of `sim` and runs at most `steps` steps.
/// Returns the active edge count and the number of players whose action
/// differs from the starting profile.
fn held_outcome(sim: &Sim, control: &Control, steps: usize) -> (usize, usize) {
    let mut trial = sim.clone();
    trial.impose(control);
    trial.settle(control, steps.saturating_sub(1));
    let changed = trial
        .actions()
        .iter()
        .zip(sim.actions())
        .filter(|(a, b)| a != b)
        .count();
    (trial.count_active_edges(), changed)
}

struct Picker {
    rng: Option<ChaCha8Rng>,
}

impl Picker {
    fn new(tie: TieBreak) -> Self {
        Self {
            rng: match tie {
                TieBreak::Lowest => None,
                TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
        }
    }

    /// `options` are in (index, Zero-first) order.
    fn pick<T: Copy>(&mut self, options: &[T]) -> Option<T> {
        match &mut self.rng {
            None => options.first().copied(),
            Some(rng) => options.choose(rng).copied(),
        }
    }

    fn argmax<T: Copy, K: PartialOrd + Copy>(
        &mut self,
        options: &[T],
        key: impl Fn(&T) -> K,
    ) -> Option<T> {
        let best = options
            .iter()
            .map(&key)
            .fold(None, |m: Option<K>, k| match m {
                Some(m) if m >= k => Some(m),
                _ => Some(k),
            })?;
        let tied: Vec<T> = options.iter().copied().filter(|o| key(o) == best).collect();
        self.pick(&tied)
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    player: usize,
    action: Action,
    cp: i64,
    score: i64,
}

pub fn run_greedy(game: &Game, variant: Variant, tie: TieBreak) -> Result<GreedyResult> {
    if variant == Variant::Vc {
        return Ok(run_vc(game));
    }
    let n = game.n();
    let g = game.graph();
    let cap = 2 * n + 2;
    let mut picker = Picker::new(tie);
    let mut sim = Sim::new(game, vec![Action::Undecided; n]);
    let mut control = Control::default();
    let mut controlled = Vec::new();
    let mut times = Vec::new();
    let mut head = Vec::new();
    let mut restarted_at = None;

    loop {
        let settled = sim.settle(&control, cap);
        let (steps, span) = match settled {
            Some(k) => (k, k + 1),
            None => (cap + 1, cap + 1),
        };
        times.push(steps);
        if settled.is_some() && sim.count_active_edges() == 0 {
            if static_feasible(game, &control) {
                break;
            }
            if restarted_at == Some(controlled.len()) {
                return Err(Error::NonTermination(n));
            }
            restarted_at = Some(controlled.len());
            sim = Sim::new(game, vec![Action::Undecided; n]);
            sim.impose(&control);
            continue;
        }
        if controlled.len() >= n {
            return Err(Error::NonTermination(n));
        }
        head.extend(std::iter::repeat_n(control.clone(), span));

        let actions = sim.actions().to_vec();
        let eligible = |i: usize| actions[i].is_active() && !control.contains(i);
        let on_active_edge = {
            let mut mark = vec![false; n];
            for (i, j) in g.active_edges(&actions.clone().into()) {
                mark[i] = true;
                mark[j] = true;
            }
            mark
        };
        let endpoints: Vec<usize> = (0..n)
            .filter(|&i| on_active_edge[i] && !control.contains(i))
            .collect();

        let (player, action) = match variant {
            Variant::MaxDegree => {
                let options: Vec<usize> = (0..n).filter(|&i| eligible(i)).collect();
                let active_degree = |&i: &usize| {
                    g.neighbors(i)
                        .iter()
                        .filter(|&&j| actions[j].is_active())
                        .count()
                };
                (
                    picker
                        .argmax(&options, active_degree)
                        .ok_or(Error::NonTermination(n))?,
                    Action::Zero,
                )
            }
            Variant::Rand => (
                picker.pick(&endpoints).ok_or(Error::NonTermination(n))?,
                Action::Zero,
            ),
            Variant::Cp | Variant::Cp2 => {
                let before = sim.count_active_edges() as i64;
                let mut options = Vec::new();
                for i in (0..n).filter(|&i| eligible(i)) {
                    for action in [Action::Zero, Action::One] {
                        let blocked = action == Action::One
                            && g.neighbors(i)
                                .iter()
                                .any(|&j| control.get(j) == Some(Action::One));
                        if blocked {
                            continue;
                        }
                        let mut trial = control.clone();
                        trial.insert(i, action)?;
                        let (after, changed) = held_outcome(&sim, &trial, n);
                        let cp = before - after as i64;
                        let score = if variant == Variant::Cp2 {
                            cp + changed as i64
                        } else {
                            cp
                        };
                        options.push(Candidate {
                            player: i,
                            action,
                            cp,
                            score,
                        });
                    }
                }
                let mut best = picker.argmax(&options, |c| c.score);
                if best.is_none_or(|c| c.cp <= 0) {
                    let fallback: Vec<Candidate> = options
                        .iter()
                        .copied()
                        .filter(|c| c.action == Action::Zero && on_active_edge[c.player])
                        .collect();
                    best = picker.argmax(&fallback, |c| c.score);
                }
                let best = best.ok_or(Error::NonTermination(n))?;
                (best.player, best.action)
            }
            Variant::Vc => unreachable!(),
        };
        control.insert(player, action)?;
        controlled.push(player);
        sim.impose(&control);
    }

    let dynamic_policy = if control.is_empty() {
        DynamicPolicy::empty()
    } else {
        let staged = DynamicPolicy::new(head, control.clone());
        if restarted_at.is_none() && dynamic_violation(game, &staged).is_none() {
            staged
        } else {
            DynamicPolicy::repeat(control.clone())
        }
    };
    Ok(GreedyResult {
        variant,
        controlled,
        forced: control.clone(),
        convergence_times: times,
        static_policy: control,
        dynamic_policy,
    })
}

fn run_vc(game: &Game) -> GreedyResult {
    let solution = vertex_cover::solve(game);
    let forced = solution.controlled();
    let mut controlled = solution.cover.clone();
    controlled.extend(&solution.rho_positive);
    let uncontrolled = crate::learning::run_from_undecided(game)
        .convergence_time
        .unwrap_or(game.n());
    GreedyResult {
        variant: Variant::Vc,
        controlled,
        forced: forced.clone(),
        convergence_times: vec![uncontrolled],
        static_policy: forced,
        dynamic_policy: solution.policy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_benchmark, Kind};
    use crate::fixtures::eight_player;
    use crate::game::PayoffConstants;
    use crate::learning;
    use crate::policy::{validate_dynamic, validate_static};

    fn bench(kind: Kind, n: usize, c0: f64, c1: f64) -> Game {
        Game::new(
            make_benchmark(kind, n).unwrap(),
            PayoffConstants::new(c0, c1).unwrap(),
        )
    }

    fn assert_feasible(game: &Game, r: &GreedyResult) {
        assert!(
            validate_static(game, &r.static_policy).unwrap().feasible,
            "{r:?}"
        );
        assert!(
            validate_dynamic(game, &r.dynamic_policy).unwrap().feasible,
            "{r:?}"
        );
    }

    #[test]
    fn star_center_potential() {
        let game = bench(Kind::Star, 5, 1.5, 0.3);
        let cp = cascade_potential(&game, &ActionProfile::undecided(5), 0, Action::Zero).unwrap();
        assert_eq!(cp, 4);
    }

    #[test]
    fn eight_player_negative_potential() {
        let game = eight_player();
        let a = learning::run_from_undecided(&game).last().clone();
        assert_eq!(cascade_potential(&game, &a, 2, Action::Zero).unwrap(), -1);
    }

    #[test]
    fn holding_current_action_is_neutral() {
        let game = eight_player();
        let a = learning::run_from_undecided(&game).last().clone();
        for i in 0..8 {
            assert_eq!(cascade_potential(&game, &a, i, a[i]).unwrap(), 0);
        }
    }

    #[test]
    fn potential_rejects_undecided_force() {
        let game = eight_player();
        assert!(
            cascade_potential(&game, &ActionProfile::undecided(8), 0, Action::Undecided).is_err()
        );
    }

    #[test]
    fn star_cp_picks_center() {
        let game = bench(Kind::Star, 5, 1.5, 0.3);
        let r = run_greedy(&game, Variant::Cp, TieBreak::Lowest).unwrap();
        assert_eq!(r.controlled, vec![0]);
        assert_eq!(r.forced, Control::zeros([0]));
        assert_eq!(control_effort(&r, 5), Rational::new(1, 5));
        assert_feasible(&game, &r);
    }

    #[test]
    fn eight_player_max_degree() {
        let game = eight_player();
        let r = run_greedy(&game, Variant::MaxDegree, TieBreak::Lowest).unwrap();
        assert_eq!(r.controlled, vec![2, 4]);
        assert_eq!(control_effort(&r, 8), Rational::new(2, 8));
        assert_feasible(&game, &r);
    }

    #[test]
    fn ring_cp_single_selection() {
        let game = bench(Kind::Ring, 8, 1.5, 0.6);
        let r = run_greedy(&game, Variant::Cp, TieBreak::Lowest).unwrap();
        assert_eq!(r.selections(), 1);
        assert_eq!(control_effort(&r, 8), Rational::new(1, 8));
        assert_feasible(&game, &r);
    }

    #[test]
    fn nothing_to_control() {
        let game = bench(Kind::Line, 5, 0.4, 1.5);
        for v in Variant::ALL {
            let r = run_greedy(&game, v, TieBreak::Lowest).unwrap();
            assert_eq!(control_effort(&r, 5), Rational::from_integer(0), "{v}");
            assert!(r.dynamic_policy.is_empty());
        }
    }

    #[test]
    fn all_variants_feasible_on_eight_player() {
        let game = eight_player();
        for v in Variant::ALL {
            for tie in [TieBreak::Lowest, TieBreak::Seeded(3)] {
                let r = run_greedy(&game, v, tie).unwrap();
                assert_feasible(&game, &r);
            }
        }
    }

    #[test]
    fn vc_effort_is_cover_plus_rho() {
        let game = eight_player();
        let r = run_greedy(&game, Variant::Vc, TieBreak::Lowest).unwrap();
        assert_eq!(r.controlled, vec![2, 4]);
    }

    #[test]
    fn seeded_runs_repeat() {
        let game = bench(Kind::Ring, 10, 0.6, 0.6);
        for v in Variant::ALL {
            assert_eq!(
                run_greedy(&game, v, TieBreak::Seeded(9)).unwrap(),
                run_greedy(&game, v, TieBreak::Seeded(9)).unwrap()
            );
        }
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("nope".parse::<Variant>().is_err());
    }
}
