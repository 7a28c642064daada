//! Star, line and ring networks with closed-form optimal policies.
//!
//! Indices are 0-based. The star center is player 0 with type 1 and the
//! fringe has type 0. Lines and rings alternate types starting with type 0
//! at index 0, so `S_0` holds the even indices and `S_1` the odd ones.
//!
//! `S_m^odd` and `S_m^even` are the odd- and even-ranked members of `S_m`
//! counted from 1 in index order.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exact;
use crate::game::{Action, Game, Graph, PayoffConstants};
use crate::policy::{cost_dynamic, validate_dynamic, validate_static, Control, DynamicPolicy};
use crate::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Star,
    Line,
    Ring,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Star => "star",
            Kind::Line => "line",
            Kind::Ring => "ring",
        })
    }
}

impl FromStr for Kind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "star" => Ok(Kind::Star),
            "line" => Ok(Kind::Line),
            "ring" => Ok(Kind::Ring),
            _ => Err(Error::InvalidPolicy(format!("unknown network kind {s:?}"))),
        }
    }
}

/// Payoff regime of a benchmark network; `case` is one of `a..=f`
/// (`a..=c` for stars).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RegimeLabel {
    pub kind: Kind,
    pub case: char,
}

impl fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.kind, self.case)
    }
}

fn min_players(kind: Kind) -> usize {
    match kind {
        Kind::Star | Kind::Line => 2,
        Kind::Ring => 4,
    }
}

pub fn make_benchmark(kind: Kind, n: usize) -> Result<Graph> {
    let min = min_players(kind);
    if n < min {
        return Err(Error::BenchmarkTooSmall { n, min });
    }
    match kind {
        Kind::Star => {
            let mut types = vec![0; n];
            types[0] = 1;
            Graph::new(types, (1..n).map(|j| (0, j)))
        }
        Kind::Line => Graph::new(alternating(n), (1..n).map(|i| (i - 1, i))),
        Kind::Ring => {
            if n % 2 == 1 {
                return Err(Error::OddPlayerCount(n));
            }
            Graph::new(alternating(n), (0..n).map(|i| (i, (i + 1) % n)))
        }
    }
}

fn alternating(n: usize) -> Vec<u8> {
    (0..n).map(|i| (i % 2) as u8).collect()
}

/// Strictly below or above 1; equality is a boundary.
fn side(x: f64, what: &str) -> Result<bool> {
    if x == 1.0 {
        Err(Error::RegimeBoundary(format!("{what} = 1")))
    } else {
        Ok(x > 1.0)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Band {
    /// `2c < 1`
    Low,
    /// `2c > 1 > c`
    Mid,
    /// `c > 1`
    High,
}

fn band(c: f64, name: &str) -> Result<Band> {
    let above_half = side(2.0 * c, &format!("2*{name}"))?;
    let above_one = side(c, name)?;
    Ok(match (above_half, above_one) {
        (false, _) => Band::Low,
        (true, false) => Band::Mid,
        (true, true) => Band::High,
    })
}

pub fn classify(kind: Kind, n: usize, constants: PayoffConstants) -> Result<RegimeLabel> {
    let (c0, c1) = (constants.c0(), constants.c1());
    let case = match kind {
        Kind::Star => {
            let fringe_high = side(c0, "c0")?;
            let center_high = side(c1 * (n as f64 - 1.0), "c1*(n-1)")?;
            match (fringe_high, center_high) {
                (false, false) => 'a',
                (true, true) => 'c',
                _ => 'b',
            }
        }
        Kind::Line | Kind::Ring => {
            use Band::*;
            match (band(c0, "c0")?, band(c1, "c1")?) {
                (Low, Low) => 'a',
                (Low, Mid) => 'b',
                (Low, High) => 'c',
                (Mid, Mid) => 'd',
                (High, Mid) => 'e',
                (High, High) => 'f',
                (b0, b1) => {
                    return Err(Error::UncoveredRegime(format!(
                        "c0={c0} ({b0:?}) with c1={c1} ({b1:?})"
                    )))
                }
            }
        }
    };
    Ok(RegimeLabel { kind, case })
}

/// Members of `S_m` in index order.
pub fn type_set(graph: &Graph, m: u8) -> Vec<usize> {
    graph.players_of_type(m)
}

/// Members at odd ranks (1st, 3rd, ...).
pub fn odd_ranked(set: &[usize]) -> Vec<usize> {
    set.iter().copied().step_by(2).collect()
}

/// Members at even ranks (2nd, 4th, ...).
pub fn even_ranked(set: &[usize]) -> Vec<usize> {
    set.iter().copied().skip(1).step_by(2).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StaticClosedForm {
    pub label: RegimeLabel,
    pub policy: Control,
    pub cost: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DynamicClosedForm {
    pub label: RegimeLabel,
    pub policy: DynamicPolicy,
    #[serde(serialize_with = "ratio_string")]
    pub cost: Rational,
}

fn ratio_string<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(r)
}

fn div_ceil(a: usize, b: usize) -> usize {
    a.div_ceil(b)
}

/// Stated optimal static policy and its cost.
pub fn closed_form_static(
    kind: Kind,
    n: usize,
    constants: PayoffConstants,
) -> Result<StaticClosedForm> {
    let label = classify(kind, n, constants)?;
    let g = make_benchmark(kind, n)?;
    let s0 = type_set(&g, 0);
    let s1 = type_set(&g, 1);
    // Player 0 held at its own type: 0 for type 0, 1 for type 1.
    let own_type =
        || Control::from_pairs([(0, Action::from_bit(g.player_type(0) == 1))]).expect("decided");
    let (policy, cost) = match (kind, label.case) {
        (Kind::Star, 'a') | (Kind::Star, 'c') => (Control::zeros([0]), 1),
        (Kind::Star, _) => (Control::default(), 0),

        (_, 'a') => (Control::zeros(s1.iter().copied()), n / 2),
        (Kind::Line, 'b') if n.is_multiple_of(2) => (Control::zeros([n - 1]), 1),
        (_, 'b') | (_, 'c') => (Control::default(), 0),

        (Kind::Line, 'd') if n % 2 == 1 => (Control::zeros(even_ranked(&s1)), n / 4),
        // The type-1 players n, n-4, n-8, ... counted from the far end.
        (Kind::Line, 'd') => (Control::zeros(anchored_at_end(&s1, n)), div_ceil(n, 4)),
        (Kind::Ring, 'd') => (Control::zeros(odd_ranked(&s1)), div_ceil(n, 4)),

        (Kind::Line, 'e') if n.is_multiple_of(2) => (Control::default(), 0),
        (_, 'e') => (own_type(), 1),

        (Kind::Line, 'f') if n % 2 == 1 => (Control::ones(even_ranked(&s0)), div_ceil(n - 1, 4)),
        (_, 'f') => (Control::ones(odd_ranked(&s1)), div_ceil(n, 4)),

        _ => unreachable!("classify returns a..=f"),
    };
    Ok(StaticClosedForm {
        label,
        policy,
        cost,
    })
}

/// `S_1^odd` or `S_1^even`, whichever contains the last player.
fn anchored_at_end(s1: &[usize], n: usize) -> Vec<usize> {
    if n % 4 == 2 {
        odd_ranked(s1)
    } else {
        even_ranked(s1)
    }
}

/// Stated optimal dynamic policy and its stated cost.
pub fn closed_form_dynamic(
    kind: Kind,
    n: usize,
    constants: PayoffConstants,
) -> Result<DynamicClosedForm> {
    let label = classify(kind, n, constants)?;
    let g = make_benchmark(kind, n)?;
    let s0 = type_set(&g, 0);
    let s1 = type_set(&g, 1);
    let nn = n as u64;
    let frac = |k: usize| Rational::new(2 * k as u64, nn);
    let int = |k: usize| Rational::from_integer(k as u64);
    let own_type =
        || Control::from_pairs([(0, Action::from_bit(g.player_type(0) == 1))]).expect("decided");
    let (policy, cost) = match (kind, label.case) {
        (Kind::Star, 'a') => (DynamicPolicy::from_time(n, Control::zeros([0])), int(1)),
        (Kind::Star, 'b') => (DynamicPolicy::empty(), int(0)),
        (Kind::Star, _) => (DynamicPolicy::two_step(Control::zeros([0])), frac(1)),

        (_, 'a') => (
            DynamicPolicy::from_time(n, Control::zeros(s1.iter().copied())),
            int(n / 2),
        ),
        (Kind::Line, 'b') if n.is_multiple_of(2) => {
            (DynamicPolicy::from_time(n, Control::zeros([n - 1])), int(1))
        }
        (_, 'b') | (_, 'c') => (DynamicPolicy::empty(), int(0)),

        (Kind::Line, 'd') if n % 2 == 1 => (
            DynamicPolicy::two_step(Control::zeros(even_ranked(&s1))),
            frac(n / 4),
        ),
        (Kind::Line, 'd') => {
            let mut x = odd_ranked(&s1);
            x.push(n - 1);
            (
                DynamicPolicy::two_step(Control::zeros(x)),
                frac(div_ceil(n, 4)),
            )
        }
        (Kind::Ring, 'd') => (
            DynamicPolicy::two_step(Control::zeros(odd_ranked(&s1))),
            frac(div_ceil(n, 4)),
        ),

        (_, 'e') => (DynamicPolicy::two_step(own_type()), frac(1)),

        (Kind::Line, 'f') if n % 2 == 1 => (
            DynamicPolicy::two_step(Control::ones(even_ranked(&s0))),
            frac(div_ceil(n - 1, 4)),
        ),
        (_, 'f') => (
            DynamicPolicy::two_step(Control::ones(odd_ranked(&s1))),
            frac(div_ceil(n, 4)),
        ),

        _ => unreachable!("classify returns a..=f"),
    };
    Ok(DynamicClosedForm {
        label,
        policy,
        cost,
    })
}

/// Constants inside each line/ring regime, in case order `a..=f`.
pub const REPRESENTATIVES: [(f64, f64); 6] = [
    (0.4, 0.4),
    (0.4, 0.6),
    (0.4, 1.5),
    (0.6, 0.6),
    (1.5, 0.6),
    (1.5, 1.5),
];

/// Network sizes covered by the verification table.
pub fn table_sizes(kind: Kind) -> Vec<usize> {
    match kind {
        Kind::Star => (3..=9).collect(),
        Kind::Line => vec![5, 7, 9, 4, 6, 8, 10],
        Kind::Ring => vec![4, 6, 8, 10],
    }
}

/// Everything needed to reproduce a mismatch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Discrepancy {
    pub graph: Graph,
    pub c0: f64,
    pub c1: f64,
    pub stated_static: StaticClosedForm,
    pub brute_static: exact::StaticSolution,
    pub stated_dynamic: DynamicClosedForm,
    pub stated_dynamic_report: crate::policy::CostReport,
    pub restricted_dynamic: exact::RestrictedDynamicSolution,
}

/// One line of the verification table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationRow {
    pub label: RegimeLabel,
    pub n: usize,
    pub c0: f64,
    pub c1: f64,
    /// Stated static policy is feasible and as cheap as exhaustive search.
    pub static_ok: bool,
    /// Stated dynamic policy is feasible and costs the stated amount.
    pub dynamic_ok: bool,
    /// No two-phase policy beats the stated dynamic cost.
    pub restricted_ok: bool,
    pub discrepancy: Option<Box<Discrepancy>>,
}

impl VerificationRow {
    pub fn passed(&self) -> bool {
        self.static_ok && self.dynamic_ok && self.restricted_ok
    }
}

/// Checks both closed forms against exhaustive search.
pub fn verify(kind: Kind, n: usize, constants: PayoffConstants) -> Result<VerificationRow> {
    let game = Game::new(make_benchmark(kind, n)?, constants);
    let stated_static = closed_form_static(kind, n, constants)?;
    let stated_dynamic = closed_form_dynamic(kind, n, constants)?;
    let brute_static = exact::brute_static(&game)?;
    let restricted = exact::brute_dynamic_restricted(&game)?;

    let static_report = validate_static(&game, &stated_static.policy)?;
    let static_ok = static_report.feasible
        && stated_static.policy.len() == stated_static.cost
        && stated_static.cost == brute_static.cost;

    let dynamic_report = validate_dynamic(&game, &stated_dynamic.policy)?;
    let dynamic_ok =
        dynamic_report.feasible && cost_dynamic(&stated_dynamic.policy, n) == stated_dynamic.cost;
    let restricted_ok = restricted.cost >= stated_dynamic.cost;

    let mut row = VerificationRow {
        label: stated_static.label,
        n,
        c0: constants.c0(),
        c1: constants.c1(),
        static_ok,
        dynamic_ok,
        restricted_ok,
        discrepancy: None,
    };
    if !row.passed() {
        row.discrepancy = Some(Box::new(Discrepancy {
            graph: game.graph().clone(),
            c0: constants.c0(),
            c1: constants.c1(),
            stated_static,
            brute_static,
            stated_dynamic,
            stated_dynamic_report: dynamic_report,
            restricted_dynamic: restricted,
        }));
    }
    Ok(row)
}

/// Every (kind, size, representative constants) combination.
pub fn table_instances() -> Vec<(Kind, usize, PayoffConstants)> {
    let mut out = Vec::new();
    for kind in [Kind::Star, Kind::Line, Kind::Ring] {
        for n in table_sizes(kind) {
            for (c0, c1) in REPRESENTATIVES {
                out.push((kind, n, PayoffConstants::new(c0, c1).expect("positive")));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn k(c0: f64, c1: f64) -> PayoffConstants {
        PayoffConstants::new(c0, c1).unwrap()
    }

    #[test]
    fn shapes() {
        let star = make_benchmark(Kind::Star, 4).unwrap();
        assert_eq!(star.edges(), &[(0, 1), (0, 2), (0, 3)]);
        assert_eq!(star.types(), &[1, 0, 0, 0]);
        let line = make_benchmark(Kind::Line, 4).unwrap();
        assert_eq!(line.edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(line.types(), &[0, 1, 0, 1]);
        let ring = make_benchmark(Kind::Ring, 4).unwrap();
        assert_eq!(ring.edges(), &[(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(matches!(
            make_benchmark(Kind::Ring, 5),
            Err(Error::OddPlayerCount(5))
        ));
        assert!(make_benchmark(Kind::Line, 1).is_err());
    }

    #[test]
    fn classification() {
        assert_eq!(classify(Kind::Star, 4, k(0.5, 0.2)).unwrap().case, 'a');
        assert_eq!(classify(Kind::Line, 5, k(0.6, 0.6)).unwrap().case, 'd');
        assert_eq!(classify(Kind::Line, 5, k(1.5, 1.5)).unwrap().case, 'f');
        for (case, (c0, c1)) in ('a'..='f').zip(REPRESENTATIVES) {
            assert_eq!(classify(Kind::Ring, 8, k(c0, c1)).unwrap().case, case);
        }
        assert!(matches!(
            classify(Kind::Line, 5, k(0.5, 0.6)),
            Err(Error::RegimeBoundary(_))
        ));
        assert!(matches!(
            classify(Kind::Star, 3, k(0.4, 0.5)),
            Err(Error::RegimeBoundary(_))
        ));
        assert!(matches!(
            classify(Kind::Line, 5, k(0.6, 0.4)),
            Err(Error::UncoveredRegime(_))
        ));
    }

    #[test]
    fn ranked_subsets() {
        let g = make_benchmark(Kind::Line, 9).unwrap();
        let s1 = type_set(&g, 1);
        assert_eq!(s1, vec![1, 3, 5, 7]);
        assert_eq!(odd_ranked(&s1), vec![1, 5]);
        assert_eq!(even_ranked(&s1), vec![3, 7]);
    }

    #[test]
    fn stated_static_policies() {
        let sf = closed_form_static(Kind::Line, 9, k(0.6, 0.6)).unwrap();
        assert_eq!(sf.policy, Control::zeros([3, 7]));
        assert_eq!(sf.cost, 2);
        let sf = closed_form_static(Kind::Line, 4, k(0.4, 0.6)).unwrap();
        assert_eq!(sf.policy, Control::zeros([3]));
        let sf = closed_form_static(Kind::Ring, 8, k(1.5, 0.6)).unwrap();
        assert_eq!(sf.policy, Control::zeros([0]));
        assert_eq!(sf.cost, 1);
    }

    #[test]
    fn stated_dynamic_policies() {
        let df = closed_form_dynamic(Kind::Star, 4, k(1.5, 0.45)).unwrap();
        assert_eq!(df.policy, DynamicPolicy::two_step(Control::zeros([0])));
        assert_eq!(df.cost, Rational::new(2, 4));
        let df = closed_form_dynamic(Kind::Line, 8, k(0.4, 0.4)).unwrap();
        assert_eq!(df.policy.tail, Control::zeros([1, 3, 5, 7]));
        assert_eq!(df.cost, Rational::from_integer(4));
        let df = closed_form_dynamic(Kind::Ring, 8, k(0.6, 0.6)).unwrap();
        assert_eq!(df.cost, Rational::new(4, 8));
    }

    #[test]
    fn verify_single_rows() {
        let row = verify(Kind::Star, 4, k(1.5, 0.45)).unwrap();
        assert!(row.passed(), "{row:?}");
        let row = verify(Kind::Line, 9, k(0.6, 0.6)).unwrap();
        assert!(row.passed(), "{row:?}");
    }
}
