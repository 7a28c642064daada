//! The decentralized learning dynamics, uncontrolled and controlled.
//!
//! Every player updates simultaneously from the previous profile:
//!
//! * `1` if `c_i * sum(ceil(a_j)) < 1` (1 is best even if every undecided
//!   neighbor ends at 1),
//! * else `0` if `c_i * sum(floor(a_j)) > 1` (0 is best even if every
//!   undecided neighbor ends at 0),
//! * else undecided.
//!
//! Under control, `a^t` takes the forced action for controlled players and
//! the unforced response `y^t` otherwise, and `y^{t+1}` is the one-step
//! response to `a^t`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{prefers_one, prefers_zero, Action, ActionProfile, Game};
use crate::policy::DynamicPolicy;
use crate::sim::Sim;

/// Recorded profiles `a^0, a^1, ...` of a run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trajectory {
    pub profiles: Vec<ActionProfile>,
    /// Smallest `k` such that `a^k` repeats forever, if reached within the
    /// horizon.
    pub convergence_time: Option<usize>,
}

impl Trajectory {
    pub fn last(&self) -> &ActionProfile {
        self.profiles
            .last()
            .expect("trajectories hold at least a^0")
    }

    /// Profile at time `t`; past the recorded end of a converged run this
    /// is the fixed point.
    pub fn at(&self, t: usize) -> Option<&ActionProfile> {
        match self.profiles.get(t) {
            Some(p) => Some(p),
            None if self.convergence_time.is_some() => self.profiles.last(),
            None => None,
        }
    }

    /// One JSON array per line, actions encoded as `0`, `1` or `"e"`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.profiles {
            serde_json::to_writer(&mut out, p)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// One simultaneous update of every player.
pub fn step(game: &Game, profile: &ActionProfile) -> ActionProfile {
    let g = game.graph();
    (0..game.n())
        .map(|i| {
            let (ceil, floor) = g.neighbors(i).iter().fold((0, 0), |(c, f), &j| {
                (c + profile[j].ceil(), f + profile[j].floor())
            });
            if prefers_one(game.c(i), ceil) {
                Action::One
            } else if prefers_zero(game.c(i), floor) {
                Action::Zero
            } else {
                Action::Undecided
            }
        })
        .collect::<Vec<_>>()
        .into()
}

/// Iterates [`step`] from `a0` until a fixed point or `horizon` steps.
///
/// The trajectory stops at the first fixed point `a^k`, whose repeat is
/// not stored. When the horizon is hit, one extra step decides whether
/// `a^horizon` is already fixed.
pub fn run(game: &Game, a0: &ActionProfile, horizon: usize) -> Result<Trajectory> {
    game.graph().check_profile(a0)?;
    let mut profiles = vec![a0.clone()];
    let mut k = 0;
    loop {
        let next = step(game, &profiles[k]);
        if next == profiles[k] {
            return Ok(Trajectory {
                profiles,
                convergence_time: Some(k),
            });
        }
        if k == horizon {
            return Ok(Trajectory {
                profiles,
                convergence_time: None,
            });
        }
        profiles.push(next);
        k += 1;
    }
}

/// Runs from all-undecided with the default horizon `n`.
pub fn run_from_undecided(game: &Game) -> Trajectory {
    run(game, &ActionProfile::undecided(game.n()), game.n()).expect("profile length matches")
}

/// Controlled dynamics from the unforced start `y0`.
///
/// Records `a^0 ..= a^horizon`, stopping early once the policy has
/// reached its tail and the profile repeats.
pub fn controlled_run(
    game: &Game,
    y0: &ActionProfile,
    policy: &DynamicPolicy,
    horizon: usize,
) -> Result<Trajectory> {
    game.graph().check_profile(y0)?;
    policy.check(game.n())?;
    let mut sim = Sim::new(game, y0.actions().to_vec());
    sim.impose(policy.at(0));
    let mut profiles = vec![ActionProfile::new(sim.actions().to_vec())];
    let mut t = 0;
    loop {
        let changed = sim.step(policy.at(t + 1));
        if changed == 0 && t + 1 >= policy.head.len() {
            return Ok(Trajectory {
                profiles,
                convergence_time: Some(t),
            });
        }
        if t == horizon {
            return Ok(Trajectory {
                profiles,
                convergence_time: None,
            });
        }
        profiles.push(ActionProfile::new(sim.actions().to_vec()));
        t += 1;
    }
}

/// Checks that a forced action is decided.
pub(crate) fn check_forced(player: usize, action: Action) -> Result<()> {
    if action.is_decided() {
        Ok(())
    } else {
        Err(Error::UndecidedForcedAction(player))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{make_benchmark, Kind};
    use crate::fixtures::eight_player;
    use crate::game::{Graph, PayoffConstants};
    use crate::policy::Control;

    fn parse(s: &str) -> ActionProfile {
        ActionProfile::parse(s).unwrap()
    }

    fn game(kind: Kind, n: usize, c0: f64, c1: f64) -> Game {
        Game::new(
            make_benchmark(kind, n).unwrap(),
            PayoffConstants::new(c0, c1).unwrap(),
        )
    }

    #[test]
    fn eight_player_first_step_decides_low_degree_players() {
        let game = eight_player();
        let a1 = step(&game, &ActionProfile::undecided(8));
        assert_eq!(a1, parse("111ee111"));
        let a2 = step(&game, &a1);
        assert_eq!(a2, parse("11100111"));
    }

    #[test]
    fn isolated_player_plays_one() {
        let g = Graph::new(vec![0], []).unwrap();
        let game = Game::new(g, PayoffConstants::new(3.0, 3.0).unwrap());
        assert_eq!(step(&game, &ActionProfile::undecided(1)), parse("1"));
    }

    #[test]
    fn eight_player_run_converges_in_two_steps() {
        let tr = run_from_undecided(&eight_player());
        assert_eq!(tr.convergence_time, Some(2));
        assert_eq!(tr.last(), &parse("11100111"));
        assert_eq!(tr.profiles.len(), 3);
    }

    #[test]
    fn star_all_one_in_one_step() {
        let tr = run_from_undecided(&game(Kind::Star, 4, 0.5, 0.2));
        assert_eq!(tr.convergence_time, Some(1));
        assert_eq!(tr.last(), &parse("1111"));
    }

    #[test]
    fn line_interior_stays_undecided() {
        let tr = run_from_undecided(&game(Kind::Line, 5, 0.6, 0.6));
        assert_eq!(tr.last(), &parse("1eee1"));
        assert_eq!(tr.convergence_time, Some(1));
    }

    #[test]
    fn horizon_without_fixed_point() {
        let g = game(Kind::Line, 5, 0.6, 0.6);
        let tr = run(&g, &ActionProfile::undecided(5), 0).unwrap();
        assert_eq!(tr.convergence_time, None);
        assert_eq!(tr.profiles.len(), 1);
    }

    #[test]
    fn eight_player_two_step_control_reaches_anticoordination() {
        let game = eight_player();
        let c = Control::zeros([2, 4]);
        let policy = DynamicPolicy::new(vec![c.clone(), c], Control::default());
        let tr = controlled_run(&game, &ActionProfile::undecided(8), &policy, 8).unwrap();
        // Released at t=2, players 2 and 4 both answer 1; player 4 falls
        // back to 0 and edge (2,5) is active again.
        assert_eq!(tr.profiles[1], parse("110e0111"));
        assert_eq!(tr.profiles[2], parse("11101111"));
        assert_eq!(tr.last(), &parse("11100111"));
        assert!(tr.convergence_time.is_some());

        let held = DynamicPolicy::repeat(Control::zeros([2, 4]));
        let tr = controlled_run(&game, &ActionProfile::undecided(8), &held, 8).unwrap();
        assert_eq!(tr.last(), &parse("11000111"));
        assert!(game.graph().is_max_anticoordination(tr.last()));
    }

    #[test]
    fn star_two_step_control_consolidates() {
        let game = game(Kind::Star, 4, 1.5, 0.5);
        let c = Control::zeros([0]);
        let policy = DynamicPolicy::new(vec![c.clone(), c], Control::default());
        let tr = controlled_run(&game, &ActionProfile::undecided(4), &policy, 4).unwrap();
        assert_eq!(tr.profiles[0], parse("0eee"));
        assert_eq!(tr.profiles[1], parse("0111"));
        assert_eq!(tr.last(), &parse("0111"));
        assert_eq!(tr.convergence_time, Some(1));
    }

    #[test]
    fn empty_policy_matches_run() {
        let game = eight_player();
        let y0 = ActionProfile::undecided(8);
        let a = controlled_run(&game, &y0, &DynamicPolicy::empty(), 8).unwrap();
        assert_eq!(a, run(&game, &y0, 8).unwrap());
    }

    #[test]
    fn controlled_run_rejects_undecided_force() {
        let game = eight_player();
        let bad = DynamicPolicy::repeat(Control::unchecked([(1, Action::Undecided)]));
        let err = controlled_run(&game, &ActionProfile::undecided(8), &bad, 8).unwrap_err();
        assert!(matches!(err, Error::UndecidedForcedAction(1)));
    }

    #[test]
    fn forcing_can_flip_decided_players() {
        let game = eight_player();
        let mut y = parse("11100111");
        y.actions_mut()[2] = Action::Zero;
        let next = step(&game, &y);
        assert_eq!(next[4], Action::One);
    }

    #[test]
    fn jsonl_export() {
        let tr = run_from_undecided(&eight_player());
        let text = tr.to_jsonl();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], r#"["e","e","e","e","e","e","e","e"]"#);
        assert_eq!(lines[2], "[1,1,1,0,0,1,1,1]");
    }
}
