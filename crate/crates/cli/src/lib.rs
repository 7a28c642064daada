//! Seeded Monte-Carlo sweeps of the greedy control variants over random
//! bipartite games, written as CSV.
//!
//! Every realization gets its own seed derived from the master seed and
//! the realization's position in the sweep, so the output does not depend
//! on how many workers run it.

use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use anticoord::greedy::{run_greedy, TieBreak, Variant};
use anticoord::random::{gen_random_bipartite, gen_random_typed_bipartite};
use anticoord::{Game, Graph, PayoffConstants};
use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Edge probability between opposite-type players.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    Fixed(f64),
    /// `p = k / n`.
    OverN(f64),
}

impl Density {
    pub fn at(self, n: usize) -> f64 {
        match self {
            Density::Fixed(p) => p,
            Density::OverN(k) => k / n as f64,
        }
    }
}

/// How player types are assigned in random instances.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// First half type 0, second half type 1; `n` must be even.
    #[default]
    Halves,
    /// Each type drawn with probability one half.
    Typed,
}

/// Payoff constants to sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constants {
    /// Every `(m0, m1)` cell of the `m_max x m_max` grid at its midpoint.
    Grid(usize),
    /// Selected grid cells `(m0, m1)`.
    Cells(Vec<(usize, usize)>),
    /// Explicit `(c0, c1)` pairs.
    Values(Vec<(f64, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cell {
    pub c0: f64,
    pub c1: f64,
    pub m0: usize,
    pub m1: usize,
}

/// Midpoints of the cells `m * c > 1 > (m - 1) * c`, for `m = 1..=m_max`.
pub fn grid_constants(m_max: usize) -> Vec<f64> {
    (1..=m_max).map(grid_value).collect()
}

fn grid_value(m: usize) -> f64 {
    2.0 / (2 * m - 1) as f64
}

/// The `m` with `m * c > 1 >= (m - 1) * c`.
pub fn cell_of(c: f64) -> usize {
    (1.0 / c).floor() as usize + 1
}

impl Constants {
    pub fn cells(&self) -> Result<Vec<Cell>> {
        let from_m = |m0: usize, m1: usize| -> Result<Cell> {
            if m0 == 0 || m1 == 0 {
                bail!("grid cells start at 1, got ({m0}, {m1})");
            }
            Ok(Cell {
                c0: grid_value(m0),
                c1: grid_value(m1),
                m0,
                m1,
            })
        };
        match self {
            Constants::Grid(m_max) => {
                let mut out = Vec::new();
                for m0 in 1..=*m_max {
                    for m1 in 1..=*m_max {
                        out.push(from_m(m0, m1)?);
                    }
                }
                Ok(out)
            }
            Constants::Cells(cells) => cells.iter().map(|&(m0, m1)| from_m(m0, m1)).collect(),
            Constants::Values(values) => values
                .iter()
                .map(|&(c0, c1)| {
                    PayoffConstants::new(c0, c1)?;
                    Ok(Cell {
                        c0,
                        c1,
                        m0: cell_of(c0),
                        m1: cell_of(c1),
                    })
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub sizes: Vec<usize>,
    pub density: Density,
    pub constants: Constants,
    pub variants: Vec<Variant>,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub generator: Generator,
    /// Lowest-index tie-breaking instead of seeded random choice.
    #[serde(default)]
    pub deterministic: bool,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.variants.is_empty() {
            bail!("no variants selected");
        }
        for &n in &self.sizes {
            let p = self.density.at(n);
            if !(p > 0.0 && p < 1.0) {
                bail!("edge probability {p} at n = {n} is outside (0, 1)");
            }
            if self.generator == Generator::Halves && n % 2 == 1 {
                bail!("n = {n} is odd; use the typed generator");
            }
        }
        self.constants.cells()?;
        Ok(())
    }
}

/// SplitMix64 finalizer over `master + (index + 1) * golden`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    let mut z = master.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One random instance of the sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Realization {
    pub n: usize,
    pub p: f64,
    pub cell: Cell,
    pub rep: usize,
    pub seed: u64,
}

impl Realization {
    pub fn graph(&self, generator: Generator) -> Result<Graph> {
        Ok(match generator {
            Generator::Halves => gen_random_bipartite(self.n, self.p, self.seed)?,
            Generator::Typed => gen_random_typed_bipartite(self.n, self.p, self.seed)?,
        })
    }

    pub fn game(&self, generator: Generator) -> Result<Game> {
        Ok(Game::new(
            self.graph(generator)?,
            PayoffConstants::new(self.cell.c0, self.cell.c1)?,
        ))
    }

    /// Tie-break seed of a variant, independent of which variants run.
    pub fn tie_seed(&self, variant: Variant) -> u64 {
        let k = Variant::ALL
            .iter()
            .position(|&v| v == variant)
            .expect("listed") as u64;
        derive_seed(self.seed, k)
    }
}

/// Realizations in output order: size, then cell, then repetition.
pub fn realizations(config: &SweepConfig) -> Result<Vec<Realization>> {
    let cells = config.constants.cells()?;
    let mut out = Vec::new();
    for &n in &config.sizes {
        for &cell in &cells {
            for rep in 0..config.reps {
                let seed = derive_seed(config.seed, out.len() as u64);
                out.push(Realization {
                    n,
                    p: config.density.at(n),
                    cell,
                    rep,
                    seed,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub variant: Variant,
    pub n: usize,
    #[serde(rename = "p_B")]
    pub p_b: f64,
    pub c0: f64,
    pub c1: f64,
    pub m0: usize,
    pub m1: usize,
    pub seed: u64,
    pub effort: f64,
    pub selections: usize,
    pub runtime_ms: f64,
}

pub fn run_realization(config: &SweepConfig, r: &Realization) -> Result<Vec<Row>> {
    let game = r.game(config.generator)?;
    config
        .variants
        .iter()
        .map(|&variant| {
            let tie = if config.deterministic {
                TieBreak::Lowest
            } else {
                TieBreak::Seeded(r.tie_seed(variant))
            };
            let start = Instant::now();
            let result = run_greedy(&game, variant, tie)
                .with_context(|| format!("{variant} on seed {}", r.seed))?;
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            Ok(Row {
                variant,
                n: r.n,
                p_b: r.p,
                c0: r.cell.c0,
                c1: r.cell.c1,
                m0: r.cell.m0,
                m1: r.cell.m1,
                seed: r.seed,
                effort: result.selections() as f64 / r.n as f64,
                selections: result.selections(),
                runtime_ms: (runtime_ms * 1e3).round() / 1e3,
            })
        })
        .collect()
}

/// Runs the sweep on `workers` threads; rows come back in output order.
pub fn run_experiment(config: &SweepConfig, workers: usize) -> Result<Vec<Row>> {
    config.validate()?;
    let jobs = realizations(config)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()?;
    let per_job: Vec<Result<Vec<Row>>> = pool.install(|| {
        jobs.par_iter()
            .map(|r| run_realization(config, r))
            .collect()
    });
    let mut rows = Vec::with_capacity(jobs.len() * config.variants.len());
    for chunk in per_job {
        rows.extend(chunk?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(rows: &[Row], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(rows: &[Row], path: &Path) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(rows, file).with_context(|| format!("writing {}", path.display()))
}

pub fn read_csv_file(path: &Path) -> Result<Vec<Row>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<Row>, _>>()
        .with_context(|| format!("reading {}", path.display()))
}

/// Mean effort of `variant` over the rows matching `keep`.
pub fn mean_effort(rows: &[Row], variant: Variant, keep: impl Fn(&Row) -> bool) -> Option<f64> {
    let picked: Vec<f64> = rows
        .iter()
        .filter(|r| r.variant == variant && keep(r))
        .map(|r| r.effort)
        .collect();
    if picked.is_empty() {
        None
    } else {
        Some(picked.iter().sum::<f64>() / picked.len() as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(reps: usize) -> SweepConfig {
        SweepConfig {
            sizes: vec![10],
            density: Density::Fixed(0.3),
            constants: Constants::Cells(vec![(1, 10), (3, 3)]),
            variants: Variant::ALL.to_vec(),
            reps,
            seed: 5,
            generator: Generator::Halves,
            deterministic: false,
        }
    }

    #[test]
    fn grid_midpoints() {
        let c = grid_constants(10);
        assert_eq!(c[0], 2.0);
        assert_eq!(c[1], 2.0 / 3.0);
        assert_eq!(c[9], 2.0 / 19.0);
        for (k, &c) in c.iter().enumerate() {
            let m = (k + 1) as f64;
            assert!(m * c > 1.0 && 1.0 > (m - 1.0) * c);
            assert_eq!(cell_of(c), k + 1);
        }
    }

    #[test]
    fn one_row_per_variant() {
        let rows = run_experiment(
            &SweepConfig {
                reps: 1,
                constants: Constants::Cells(vec![(2, 2)]),
                ..small(1)
            },
            1,
        )
        .unwrap();
        assert_eq!(rows.len(), 5);
        let names: Vec<_> = rows.iter().map(|r| r.variant).collect();
        assert_eq!(names, Variant::ALL.to_vec());
    }

    #[test]
    fn row_count_and_order() {
        let rows = run_experiment(&small(3), 1).unwrap();
        assert_eq!(rows.len(), 2 * 3 * 5);
        assert!(rows[..15].iter().all(|r| (r.m0, r.m1) == (1, 10)));
        assert!(rows[15..].iter().all(|r| (r.m0, r.m1) == (3, 3)));
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(7, 0), derive_seed(8, 0));
    }

    #[test]
    fn config_round_trip() {
        let cfg = small(2);
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<SweepConfig>(&text).unwrap(), cfg);
        let parsed: SweepConfig = serde_json::from_str(
            r#"{"sizes":[15],"density":{"over_n":6.0},"constants":{"values":[[2.0,2.0]]},
                "variants":["cp","vc"],"reps":1,"seed":0,"generator":"typed"}"#,
        )
        .unwrap();
        assert_eq!(parsed.density.at(15), 0.4);
        parsed.validate().unwrap();
    }

    #[test]
    fn rejects_odd_halves() {
        let cfg = SweepConfig {
            sizes: vec![15],
            ..small(1)
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let rows = run_experiment(&small(1), 1).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("variant,n,p_B,c0,c1,m0,m1,seed,effort,selections,runtime_ms\n"));
        let back: Vec<Row> = csv::Reader::from_reader(buf.as_slice())
            .deserialize()
            .collect::<Result<_, _>>()
            .unwrap();
        assert_eq!(back, rows);
    }
}
