use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("utility undefined on undecided profile")]
    UndecidedProfile,

    #[error("player {player} has undecided neighbor {neighbor}")]
    UndecidedNeighbor { player: usize, neighbor: usize },

    #[error("player {player} out of range for a game with {n} players")]
    PlayerOutOfRange { player: usize, n: usize },

    #[error("profile has {got} entries but the game has {expected} players")]
    ProfileLength { got: usize, expected: usize },

    #[error("invalid edge ({0}, {1}): {2}")]
    InvalidEdge(usize, usize, &'static str),

    #[error("player {player} has type {value}, expected 0 or 1")]
    InvalidType { player: usize, value: u8 },

    #[error("payoff constants must be positive and finite (c0={c0}, c1={c1})")]
    InvalidConstants { c0: f64, c1: f64 },

    #[error("forced action for player {0} must be 0 or 1")]
    UndecidedForcedAction(usize),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("instance too large for exhaustive search: n={n} exceeds {max}")]
    TooLarge { n: usize, max: usize },

    #[error("player count must be even, got {0}")]
    OddPlayerCount(usize),

    #[error("edge probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("constants lie on a regime boundary: {0}")]
    RegimeBoundary(String),

    #[error("no closed-form case covers these constants: {0}")]
    UncoveredRegime(String),

    #[error("benchmark needs at least {min} players, got {n}")]
    BenchmarkTooSmall { n: usize, min: usize },

    #[error("greedy selection made no progress after {0} iterations")]
    NonTermination(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
