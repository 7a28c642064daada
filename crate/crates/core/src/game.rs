//! Typed bipartite network games with the anti-coordination payoff
//! `u_i = a_i (1 - c_i * sum_{j in N_i} a_j)`.
//!
//! Actions are kept ternary. The learning dynamics and every control policy
//! only ever emit `0`, `1` or "undecided", so profiles stay exact and
//! hashable.

use std::fmt;
use std::fs;
use std::ops::Index;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A player's current action.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Action {
    Zero,
    One,
    /// No action in `[0, 1]` has been eliminated yet.
    Undecided,
}

impl Action {
    pub fn is_decided(self) -> bool {
        self != Action::Undecided
    }

    /// Worst-case reading: an undecided player may still end up at 1.
    pub fn ceil(self) -> u32 {
        match self {
            Action::Zero => 0,
            Action::One | Action::Undecided => 1,
        }
    }

    /// Best-case reading: an undecided player may still end up at 0.
    pub fn floor(self) -> u32 {
        match self {
            Action::One => 1,
            Action::Zero | Action::Undecided => 0,
        }
    }

    /// Whether an edge touching this endpoint can still carry a failed
    /// anti-coordination.
    pub fn is_active(self) -> bool {
        self != Action::Zero
    }

    pub fn value(self) -> Option<u32> {
        match self {
            Action::Zero => Some(0),
            Action::One => Some(1),
            Action::Undecided => None,
        }
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Action::One
        } else {
            Action::Zero
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Action::Zero => '0',
            Action::One => '1',
            Action::Undecided => 'e',
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

// Wire encoding: 0, 1, or the string "e".
impl Serialize for Action {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Action::Zero => s.serialize_u8(0),
            Action::One => s.serialize_u8(1),
            Action::Undecided => s.serialize_str("e"),
        }
    }
}

impl<'de> Deserialize<'de> for Action {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Int(u8),
            Str(String),
        }
        match Wire::deserialize(d)? {
            Wire::Int(0) => Ok(Action::Zero),
            Wire::Int(1) => Ok(Action::One),
            Wire::Str(s) if s == "e" => Ok(Action::Undecided),
            Wire::Str(s) if s == "0" => Ok(Action::Zero),
            Wire::Str(s) if s == "1" => Ok(Action::One),
            _ => Err(serde::de::Error::custom("action must be 0, 1 or \"e\"")),
        }
    }
}

/// One action per player.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ActionProfile(Vec<Action>);

impl ActionProfile {
    pub fn new(actions: Vec<Action>) -> Self {
        Self(actions)
    }

    pub fn undecided(n: usize) -> Self {
        Self(vec![Action::Undecided; n])
    }

    pub fn uniform(n: usize, action: Action) -> Self {
        Self(vec![action; n])
    }

    /// Parses a compact string such as `"11e00"`; separators are ignored.
    pub fn parse(text: &str) -> Option<Self> {
        text.chars()
            .filter(|c| !matches!(c, ',' | ' ' | '(' | ')'))
            .map(|c| match c {
                '0' => Some(Action::Zero),
                '1' => Some(Action::One),
                'e' | 'E' => Some(Action::Undecided),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn actions_mut(&mut self) -> &mut [Action] {
        &mut self.0
    }

    pub fn into_inner(self) -> Vec<Action> {
        self.0
    }

    pub fn is_decided(&self) -> bool {
        self.0.iter().all(|a| a.is_decided())
    }

    pub fn iter(&self) -> impl Iterator<Item = Action> + '_ {
        self.0.iter().copied()
    }

    pub fn count(&self, action: Action) -> usize {
        self.0.iter().filter(|&&a| a == action).count()
    }
}

impl Index<usize> for ActionProfile {
    type Output = Action;

    fn index(&self, i: usize) -> &Action {
        &self.0[i]
    }
}

impl From<Vec<Action>> for ActionProfile {
    fn from(actions: Vec<Action>) -> Self {
        Self(actions)
    }
}

impl fmt::Display for ActionProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, ")")
    }
}

/// Bipartite interaction graph. Every edge joins players of opposite type.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphFile", into = "GraphFile")]
pub struct Graph {
    types: Vec<u8>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

/// On-disk graph layout: `{"n": 3, "types": [0, 1, 0], "edges": [[0, 1]]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphFile {
    pub n: usize,
    pub types: Vec<u8>,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphFile> for Graph {
    type Error = Error;

    fn try_from(file: GraphFile) -> Result<Self> {
        if file.types.len() != file.n {
            return Err(Error::ProfileLength {
                got: file.types.len(),
                expected: file.n,
            });
        }
        Graph::new(file.types, file.edges.into_iter().map(|[i, j]| (i, j)))
    }
}

impl From<Graph> for GraphFile {
    fn from(g: Graph) -> Self {
        GraphFile {
            n: g.n(),
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
            types: g.types,
        }
    }
}

impl Graph {
    /// Builds a graph, rejecting self-loops, duplicates, out-of-range
    /// endpoints and same-type edges.
    pub fn new(types: Vec<u8>, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let n = types.len();
        if let Some((player, &value)) = types.iter().enumerate().find(|(_, &t)| t > 1) {
            return Err(Error::InvalidType { player, value });
        }
        let mut normalized = Vec::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidEdge(i, j, "endpoint out of range"));
            }
            if i == j {
                return Err(Error::InvalidEdge(i, j, "self-loop"));
            }
            if types[i] == types[j] {
                return Err(Error::InvalidEdge(i, j, "endpoints share a type"));
            }
            normalized.push((i.min(j), i.max(j)));
        }
        normalized.sort_unstable();
        if let Some(w) = normalized.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidEdge(w[0].0, w[0].1, "duplicate edge"));
        }
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j) in &normalized {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Self {
            types,
            edges: normalized,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.types.len()
    }

    pub fn types(&self) -> &[u8] {
        &self.types
    }

    pub fn player_type(&self, i: usize) -> u8 {
        self.types[i]
    }

    /// Edges as `(low, high)` pairs in sorted order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn players_of_type(&self, t: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.types[i] == t).collect()
    }

    /// Edges whose endpoints both play 1 or are undecided.
    pub fn active_edges(&self, profile: &ActionProfile) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .copied()
            .filter(|&(i, j)| profile[i].is_active() && profile[j].is_active())
            .collect()
    }

    pub fn count_active_edges(&self, actions: &[Action]) -> usize {
        self.edges
            .iter()
            .filter(|&&(i, j)| actions[i].is_active() && actions[j].is_active())
            .count()
    }

    /// Decided and no active edge.
    pub fn is_max_anticoordination(&self, profile: &ActionProfile) -> bool {
        profile.len() == self.n()
            && profile.is_decided()
            && self.count_active_edges(profile.actions()) == 0
    }

    pub fn check_player(&self, player: usize) -> Result<()> {
        if player < self.n() {
            Ok(())
        } else {
            Err(Error::PlayerOutOfRange {
                player,
                n: self.n(),
            })
        }
    }

    pub fn check_profile(&self, profile: &ActionProfile) -> Result<()> {
        if profile.len() == self.n() {
            Ok(())
        } else {
            Err(Error::ProfileLength {
                got: profile.len(),
                expected: self.n(),
            })
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("graph serialization is infallible")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }
}

/// The two sensitivity constants of the payoff.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PayoffConstants {
    c0: f64,
    c1: f64,
}

impl PayoffConstants {
    /// Any positive finite values are accepted; the benchmark regimes need
    /// constants above 1.
    pub fn new(c0: f64, c1: f64) -> Result<Self> {
        let ok = |c: f64| c.is_finite() && c > 0.0;
        if ok(c0) && ok(c1) {
            Ok(Self { c0, c1 })
        } else {
            Err(Error::InvalidConstants { c0, c1 })
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    /// `c_i = c0 (1 - s_i) + c1 s_i`.
    pub fn for_type(&self, t: u8) -> f64 {
        if t == 0 {
            self.c0
        } else {
            self.c1
        }
    }
}

/// `1 > c * sum`: action 1 is a strict best response.
#[inline]
pub(crate) fn prefers_one(c: f64, sum: u32) -> bool {
    c * f64::from(sum) < 1.0
}

/// `1 < c * sum`: action 0 is a strict best response.
#[inline]
pub(crate) fn prefers_zero(c: f64, sum: u32) -> bool {
    c * f64::from(sum) > 1.0
}

/// A graph together with its payoff constants.
#[derive(Clone, Debug)]
pub struct Game {
    graph: Graph,
    constants: PayoffConstants,
    per_player: Vec<f64>,
}

impl Game {
    pub fn new(graph: Graph, constants: PayoffConstants) -> Self {
        let per_player = graph
            .types()
            .iter()
            .map(|&t| constants.for_type(t))
            .collect();
        Self {
            graph,
            constants,
            per_player,
        }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn constants(&self) -> PayoffConstants {
        self.constants
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Per-player constant `c_i`.
    pub fn c(&self, i: usize) -> f64 {
        self.per_player[i]
    }

    fn decided_neighbor_sum(&self, profile: &ActionProfile, i: usize) -> Result<u32> {
        self.graph.neighbors(i).iter().try_fold(0, |acc, &j| {
            profile[j]
                .value()
                .map(|v| acc + v)
                .ok_or(Error::UndecidedNeighbor {
                    player: i,
                    neighbor: j,
                })
        })
    }

    pub fn utility(&self, profile: &ActionProfile, i: usize) -> Result<f64> {
        self.graph.check_profile(profile)?;
        self.graph.check_player(i)?;
        if !profile.is_decided() {
            return Err(Error::UndecidedProfile);
        }
        let own = f64::from(profile[i].value().unwrap_or_default());
        let sum = self.decided_neighbor_sum(profile, i)?;
        Ok(own * (1.0 - self.c(i) * f64::from(sum)))
    }

    /// Strict indicator: exactly `c_i * sum == 1` answers `Zero`.
    pub fn best_response(&self, profile: &ActionProfile, i: usize) -> Result<Action> {
        self.graph.check_profile(profile)?;
        self.graph.check_player(i)?;
        let sum = self.decided_neighbor_sum(profile, i)?;
        Ok(Action::from_bit(prefers_one(self.c(i), sum)))
    }

    /// Every player already plays its best response. Checking 0/1 profiles
    /// suffices because the payoff is linear in the own action.
    pub fn is_nash(&self, profile: &ActionProfile) -> Result<bool> {
        self.graph.check_profile(profile)?;
        if !profile.is_decided() {
            return Err(Error::UndecidedProfile);
        }
        for i in 0..self.n() {
            if self.best_response(profile, i)? != profile[i] {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eight_player() -> Game {
        crate::fixtures::eight_player()
    }

    #[test]
    fn utility_matches_direct_substitution() {
        // Type-0 player 0 with three neighbors all playing 1.
        let g = Graph::new(vec![0, 1, 1, 1], [(0, 1), (0, 2), (0, 3)]).unwrap();
        let game = Game::new(g, PayoffConstants::new(0.4, 0.6).unwrap());
        let p = ActionProfile::parse("1111").unwrap();
        assert!((game.utility(&p, 0).unwrap() - (-0.2)).abs() < 1e-12);
        // Type-1 player with one neighbor at 1.
        assert!((game.utility(&p, 1).unwrap() - 0.4).abs() < 1e-12);
        let p = ActionProfile::parse("0111").unwrap();
        assert_eq!(game.utility(&p, 0).unwrap(), 0.0);
    }

    #[test]
    fn utility_rejects_undecided() {
        let game = eight_player();
        let p = ActionProfile::undecided(8);
        assert!(matches!(game.utility(&p, 0), Err(Error::UndecidedProfile)));
    }

    #[test]
    fn best_response_thresholds() {
        let game = eight_player();
        // Player 5 (0-based) has degree 2: 0.8 < 1.
        let p = ActionProfile::parse("11111111").unwrap();
        assert_eq!(game.best_response(&p, 5).unwrap(), Action::One);
        // Player 3 has degree 3: 1.2 > 1.
        assert_eq!(game.best_response(&p, 3).unwrap(), Action::Zero);

        let g = Graph::new(vec![0, 1, 1], [(0, 1), (0, 2)]).unwrap();
        let game = Game::new(g, PayoffConstants::new(0.5, 0.5).unwrap());
        let p = ActionProfile::parse("011").unwrap();
        assert_eq!(game.best_response(&p, 0).unwrap(), Action::Zero);
    }

    #[test]
    fn best_response_needs_decided_neighbors() {
        let game = eight_player();
        let mut p = ActionProfile::parse("11111111").unwrap();
        p.actions_mut()[4] = Action::Undecided;
        assert!(matches!(
            game.best_response(&p, 0),
            Err(Error::UndecidedNeighbor {
                player: 0,
                neighbor: 4
            })
        ));
        // Player 7 does not touch player 4.
        assert!(game.best_response(&p, 7).is_ok());
    }

    #[test]
    fn active_edges_and_anticoordination() {
        let game = eight_player();
        let g = game.graph();
        let converged = ActionProfile::parse("11100111").unwrap();
        assert_eq!(g.active_edges(&converged), vec![(2, 5)]);
        assert!(!g.is_max_anticoordination(&converged));
        assert_eq!(
            g.active_edges(&ActionProfile::undecided(8)),
            g.edges().to_vec()
        );
        assert!(g
            .active_edges(&ActionProfile::uniform(8, Action::Zero))
            .is_empty());

        let fixed = ActionProfile::parse("11000111").unwrap();
        assert!(g.is_max_anticoordination(&fixed));
        let mut partial = fixed.clone();
        partial.actions_mut()[0] = Action::Undecided;
        assert!(!g.is_max_anticoordination(&partial));
    }

    #[test]
    fn nash_checks() {
        // Line 0-1-2-3 with types 0,1,0,1.
        let g = Graph::new(vec![0, 1, 0, 1], [(0, 1), (1, 2), (2, 3)]).unwrap();
        let game = Game::new(g, PayoffConstants::new(0.4, 0.6).unwrap());
        assert!(game
            .is_nash(&ActionProfile::parse("1011").unwrap())
            .unwrap());
        assert!(!game
            .is_nash(&ActionProfile::parse("1010").unwrap())
            .unwrap());

        let game = eight_player();
        assert!(!game
            .is_nash(&ActionProfile::parse("11000111").unwrap())
            .unwrap());
        assert!(game
            .is_nash(&ActionProfile::parse("11100111").unwrap())
            .unwrap());

        let g = Graph::new(vec![0, 1, 0], []).unwrap();
        let game = Game::new(g, PayoffConstants::new(0.4, 0.4).unwrap());
        assert!(game.is_nash(&ActionProfile::parse("111").unwrap()).unwrap());
    }

    #[test]
    fn graph_validation_names_offending_edge() {
        let err = Graph::new(vec![0, 0, 1], [(0, 2), (0, 1)]).unwrap_err();
        assert_eq!(
            err.to_string(),
            "invalid edge (0, 1): endpoints share a type"
        );
        assert!(Graph::new(vec![0, 1], [(0, 0)]).is_err());
        assert!(Graph::new(vec![0, 1], [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(vec![0, 1], [(0, 5)]).is_err());
        assert!(Graph::new(vec![0, 2], []).is_err());
    }

    #[test]
    fn graph_json_round_trip() {
        let text = r#"{"n": 3, "types": [0, 1, 0], "edges": [[1, 0], [2, 1]]}"#;
        let g = Graph::from_json_str(text).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
        let back = Graph::from_json_str(&g.to_json_string()).unwrap();
        assert_eq!(back, g);

        let bad = r#"{"n": 2, "types": [0, 0], "edges": [[0, 1]]}"#;
        let err = Graph::from_json_str(bad).unwrap_err().to_string();
        assert!(err.contains("(0, 1)"), "{err}");
        let short = r#"{"n": 3, "types": [0, 1], "edges": []}"#;
        assert!(Graph::from_json_str(short).is_err());
    }

    #[test]
    fn constants_must_be_positive() {
        assert!(PayoffConstants::new(0.0, 0.5).is_err());
        assert!(PayoffConstants::new(0.5, f64::NAN).is_err());
        assert!(PayoffConstants::new(1.5, 2.0).is_ok());
    }

    #[test]
    fn action_wire_format() {
        let p = ActionProfile::parse("10e").unwrap();
        assert_eq!(serde_json::to_string(&p).unwrap(), r#"[1,0,"e"]"#);
        let back: ActionProfile = serde_json::from_str(r#"[1,0,"e"]"#).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<ActionProfile>("[2]").is_err());
        assert_eq!(p.to_string(), "(1,0,e)");
    }
}
