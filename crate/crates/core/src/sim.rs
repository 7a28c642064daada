//! Incremental simulator for the controlled dynamics.
//!
//! Keeps per-player counts of non-zero and one-valued neighbors so a step
//! only re-evaluates players whose neighborhood changed since the last
//! step, plus players whose control status changed.

use crate::game::{prefers_one, prefers_zero, Action, Game};
use crate::policy::Control;

#[derive(Clone, Debug)]
pub(crate) struct Sim<'g> {
    game: &'g Game,
    actions: Vec<Action>,
    /// Neighbors playing 1 or undecided.
    ceil: Vec<u32>,
    /// Neighbors playing 1.
    floor: Vec<u32>,
    forced: Vec<Option<Action>>,
    forced_list: Vec<usize>,
    dirty: Vec<usize>,
    mark: Vec<bool>,
}

impl<'g> Sim<'g> {
    /// Starts from an arbitrary profile; every unforced player is
    /// re-evaluated on the first step.
    pub fn new(game: &'g Game, actions: Vec<Action>) -> Self {
        let n = game.n();
        let mut sim = Self::settled(game, actions);
        sim.dirty = (0..n).collect();
        sim.mark = vec![true; n];
        sim
    }

    /// Starts from a profile known to be the unforced image of its
    /// predecessor, so nothing is dirty yet.
    pub fn settled(game: &'g Game, actions: Vec<Action>) -> Self {
        let n = game.n();
        debug_assert_eq!(actions.len(), n);
        let g = game.graph();
        let mut ceil = vec![0; n];
        let mut floor = vec![0; n];
        for &(i, j) in g.edges() {
            ceil[i] += actions[j].ceil();
            floor[i] += actions[j].floor();
            ceil[j] += actions[i].ceil();
            floor[j] += actions[i].floor();
        }
        Self {
            game,
            actions,
            ceil,
            floor,
            forced: vec![None; n],
            forced_list: Vec::new(),
            dirty: Vec::new(),
            mark: vec![false; n],
        }
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    /// One-step unforced response of player `i` to the current profile.
    #[inline]
    pub fn response(&self, i: usize) -> Action {
        let c = self.game.c(i);
        if prefers_one(c, self.ceil[i]) {
            Action::One
        } else if prefers_zero(c, self.floor[i]) {
            Action::Zero
        } else {
            Action::Undecided
        }
    }

    fn set(&mut self, i: usize, a: Action) -> bool {
        let old = self.actions[i];
        if old == a {
            return false;
        }
        self.actions[i] = a;
        let dc = a.ceil() as i32 - old.ceil() as i32;
        let df = a.floor() as i32 - old.floor() as i32;
        for &j in self.game.graph().neighbors(i) {
            self.ceil[j] = (self.ceil[j] as i32 + dc) as u32;
            self.floor[j] = (self.floor[j] as i32 + df) as u32;
            if !self.mark[j] {
                self.mark[j] = true;
                self.dirty.push(j);
            }
        }
        true
    }

    /// Overrides the current profile with a control, as done at time 0.
    /// Players released by the change are re-evaluated on the next step.
    pub fn impose(&mut self, control: &Control) {
        let previous = std::mem::take(&mut self.forced_list);
        for i in previous {
            self.forced[i] = None;
            if control.get(i).is_none() && !self.mark[i] {
                self.mark[i] = true;
                self.dirty.push(i);
            }
        }
        for (i, a) in control.iter() {
            self.forced[i] = Some(a);
            self.forced_list.push(i);
            self.set(i, a);
        }
    }

    /// Advances one step: every player answers the current profile, then
    /// `control` overrides the controlled players. Returns how many
    /// entries changed.
    pub fn step(&mut self, control: &Control) -> usize {
        let mut candidates = std::mem::take(&mut self.dirty);
        for &i in &self.forced_list {
            if control.get(i).is_none() && !self.mark[i] {
                self.mark[i] = true;
                candidates.push(i);
            }
        }
        let mut updates: Vec<(usize, Action)> =
            Vec::with_capacity(candidates.len() + control.len());
        for &i in &candidates {
            self.mark[i] = false;
            if control.get(i).is_none() {
                updates.push((i, self.response(i)));
            }
        }
        for &i in &self.forced_list {
            self.forced[i] = None;
        }
        self.forced_list.clear();
        for (i, a) in control.iter() {
            self.forced[i] = Some(a);
            self.forced_list.push(i);
            updates.push((i, a));
        }
        let mut changed = 0;
        for (i, a) in updates {
            if self.set(i, a) {
                changed += 1;
            }
        }
        changed
    }

    /// Steps under a constant control until nothing changes, at most
    /// `cap` times. Returns the number of steps that changed something,
    /// or `None` if the cap was hit.
    pub fn settle(&mut self, control: &Control, cap: usize) -> Option<usize> {
        (0..=cap).find(|_| self.step(control) == 0)
    }

    pub fn count_active_edges(&self) -> usize {
        self.game.graph().count_active_edges(&self.actions)
    }

    /// True when the current profile would survive one more step unchanged.
    pub fn is_stationary(&self, control: &Control) -> bool {
        let mut clone = self.clone();
        clone.step(control) == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::eight_player;
    use crate::learning;

    #[test]
    fn incremental_steps_match_full_steps() {
        let game = eight_player();
        let control = Control::from_pairs([(2, Action::Zero)]).unwrap();
        let mut sim = Sim::new(&game, vec![Action::Undecided; 8]);
        sim.impose(&control);
        let mut reference = sim.actions().to_vec();
        for _ in 0..6 {
            sim.step(&control);
            let mut next = learning::step(&game, &reference.clone().into()).into_inner();
            for (i, a) in control.iter() {
                next[i] = a;
            }
            reference = next;
            assert_eq!(sim.actions(), reference.as_slice());
        }
    }

    #[test]
    fn settle_reports_changing_steps() {
        let game = eight_player();
        let mut sim = Sim::new(&game, vec![Action::Undecided; 8]);
        assert_eq!(sim.settle(&Control::default(), 16), Some(2));
        assert_eq!(sim.count_active_edges(), 1);
    }
}
