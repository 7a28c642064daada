//! Small hand-checked instances shared by tests, examples and the CLI.

use crate::game::{Game, Graph, PayoffConstants};

/// The 8-player instance with a single surviving active edge.
///
/// Players 0..=3 have type 1 and 4..=7 type 0; both constants are 0.4.
/// Learning from all-undecided ends at `(1,1,1,0,0,1,1,1)` with edge
/// `(2, 5)` still active.
pub fn eight_player_graph() -> Graph {
    Graph::new(
        vec![1, 1, 1, 1, 0, 0, 0, 0],
        [(0, 4), (1, 4), (2, 4), (2, 5), (3, 5), (3, 6), (3, 7)],
    )
    .expect("fixture graph is bipartite")
}

pub fn eight_player() -> Game {
    Game::new(
        eight_player_graph(),
        PayoffConstants::new(0.4, 0.4).expect("valid constants"),
    )
}
