//! Randomized identity suites behind `verify`.
//!
//! Sample inputs are drawn sequentially from one seeded stream per suite, so
//! a `(suite, genus, samples, seed)` tuple always produces the same inputs;
//! evaluation then fans out over threads and is collected in sample order.

use std::fmt;
use std::str::FromStr;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thetanull::fubini::{heat_residual, nullwert_jet, veronese_pullback_residual, MapId};
use thetanull::nullwerte::{prime_block_residual, sj_factorization_residual_high, sj_factorization_residual_low};
use thetanull::num_complex::Complex64;
use thetanull::siegel::{random_siegel, SiegelPoint};
use thetanull::theta::{
    addition_residual, block_factorization_residual, parity_residual, theta_second_order_jet, Characteristic, Precision,
};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Parity,
    Addition,
    Blocks,
    Heat,
    SjLow,
    SjHigh,
    Veronese,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Parity,
        Suite::Addition,
        Suite::Blocks,
        Suite::Heat,
        Suite::SjLow,
        Suite::SjHigh,
        Suite::Veronese,
    ];

    /// Default pass threshold for the residual.
    pub fn threshold(self) -> f64 {
        match self {
            Suite::Parity | Suite::Blocks => 1e-10,
            Suite::Addition | Suite::SjLow | Suite::SjHigh | Suite::Veronese => 1e-9,
            Suite::Heat => 1e-8,
        }
    }

    pub fn min_genus(self) -> usize {
        match self {
            Suite::Blocks | Suite::SjHigh => 2,
            _ => 1,
        }
    }

    fn stream(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).unwrap() as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Parity => "parity",
            Suite::Addition => "addition",
            Suite::Blocks => "blocks",
            Suite::Heat => "heat",
            Suite::SjLow => "sj-low",
            Suite::SjHigh => "sj-high",
            Suite::Veronese => "veronese",
        })
    }
}

impl FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.to_string() == s)
            .ok_or_else(|| CliError::Parse(format!("unknown suite {s:?}")))
    }
}

/// Inputs of one sample.
#[derive(Debug, Clone)]
enum Input {
    Parity {
        ch: Characteristic,
        z_mat: SiegelPoint,
        z: Vec<Complex64>,
    },
    Addition {
        alpha: Vec<i64>,
        beta: Vec<i64>,
        eps: Vec<i64>,
        z_mat: SiegelPoint,
        z: Vec<Complex64>,
        x: Vec<Complex64>,
    },
    Blocks {
        c1: Characteristic,
        z1: SiegelPoint,
        w1: Vec<Complex64>,
        c2: Characteristic,
        z2: SiegelPoint,
        w2: Vec<Complex64>,
    },
    Heat {
        u: Vec<i64>,
        z_mat: SiegelPoint,
    },
    Point(SiegelPoint),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleResult {
    pub suite: Suite,
    pub index: usize,
    pub genus: usize,
    pub residual: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub genus: usize,
    pub seed: u64,
    pub threshold: f64,
    pub samples: Vec<SampleResult>,
    pub passed: usize,
    pub max_residual: f64,
}

impl SuiteReport {
    pub fn all_pass(&self) -> bool {
        self.passed == self.samples.len()
    }
}

fn bits(rng: &mut ChaCha8Rng, g: usize) -> Vec<i64> {
    (0..g).map(|_| rng.gen_range(0..2)).collect()
}

fn char_bits(rng: &mut ChaCha8Rng, g: usize) -> Characteristic {
    let eps = bits(rng, g);
    Characteristic::new(eps, bits(rng, g)).expect("equal lengths")
}

fn vector(rng: &mut ChaCha8Rng, g: usize, re: f64, im: f64) -> Vec<Complex64> {
    (0..g)
        .map(|_| Complex64::new(rng.gen_range(-re..=re), rng.gen_range(-im..=im)))
        .collect()
}

fn point(rng: &mut ChaCha8Rng, g: usize) -> SiegelPoint {
    random_siegel(g, rng.gen(), 1.0)
}

fn draw(suite: Suite, g: usize, rng: &mut ChaCha8Rng) -> Input {
    match suite {
        Suite::Parity => {
            let z_mat = point(rng, g);
            Input::Parity {
                ch: char_bits(rng, g),
                z_mat,
                z: vector(rng, g, 1.0, 0.5),
            }
        }
        Suite::Addition => {
            let z_mat = point(rng, g);
            Input::Addition {
                alpha: bits(rng, g),
                beta: bits(rng, g),
                eps: bits(rng, g),
                z_mat,
                z: vector(rng, g, 1.0, 0.3),
                x: vector(rng, g, 1.0, 0.3),
            }
        }
        Suite::Blocks => {
            let a = rng.gen_range(1..g);
            let b = g - a;
            let (z1, z2) = (point(rng, a), point(rng, b));
            Input::Blocks {
                c1: char_bits(rng, a),
                w1: vector(rng, a, 0.5, 0.2),
                c2: char_bits(rng, b),
                w2: vector(rng, b, 0.5, 0.2),
                z1,
                z2,
            }
        }
        Suite::Heat => {
            let z_mat = point(rng, g);
            // Representatives beyond {0, 1} exercise independence of the choice.
            let u = (0..g).map(|_| rng.gen_range(-2..=3)).collect();
            Input::Heat { u, z_mat }
        }
        Suite::SjLow | Suite::SjHigh | Suite::Veronese => Input::Point(point(rng, g)),
    }
}

fn evaluate(suite: Suite, input: &Input, prec: &Precision) -> Result<f64, CliError> {
    let domain = |e: &dyn fmt::Display| CliError::Domain(e.to_string());
    match (suite, input) {
        (Suite::Parity, Input::Parity { ch, z_mat, z }) => parity_residual(ch, z_mat, z, prec).map_err(|e| domain(&e)),
        (
            Suite::Addition,
            Input::Addition {
                alpha,
                beta,
                eps,
                z_mat,
                z,
                x,
            },
        ) => addition_residual(alpha, beta, eps, z_mat, z, x, prec).map_err(|e| domain(&e)),
        (Suite::Blocks, Input::Blocks { c1, z1, w1, c2, z2, w2 }) => {
            let theta = block_factorization_residual(c1, z1, w1, c2, z2, w2, prec).map_err(|e| domain(&e))?;
            let nulls = prime_block_residual(z1, z2, prec).map_err(|e| domain(&e))?;
            Ok(theta.max(nulls))
        }
        (Suite::Heat, Input::Heat { u, z_mat }) => {
            let zero = vec![Complex64::new(0.0, 0.0); u.len()];
            let jet = theta_second_order_jet(u, z_mat, &zero, prec).map_err(|e| domain(&e))?;
            Ok(heat_residual(&jet))
        }
        (Suite::SjLow, Input::Point(tau)) => sj_factorization_residual_low(tau, prec).map_err(|e| domain(&e)),
        (Suite::SjHigh, Input::Point(pi)) => sj_factorization_residual_high(pi, prec).map_err(|e| domain(&e)),
        (Suite::Veronese, Input::Point(tau)) => {
            let jet = nullwert_jet(MapId::Second, tau, prec).map_err(|e| domain(&e))?;
            veronese_pullback_residual(&jet).map_err(|e| domain(&e))
        }
        _ => unreachable!("inputs are drawn per suite"),
    }
}

/// Runs `samples` random instances of `suite` at genus `genus`.
///
/// `threshold` overrides [`Suite::threshold`]. A residual passes when it is
/// finite and at most the threshold.
pub fn run_suite(
    suite: Suite,
    genus: usize,
    samples: usize,
    seed: u64,
    threshold: Option<f64>,
    prec: &Precision,
) -> Result<SuiteReport, CliError> {
    if genus < suite.min_genus() {
        return Err(CliError::Domain(format!(
            "suite {suite} needs genus >= {}, got {genus}",
            suite.min_genus()
        )));
    }
    let threshold = threshold.unwrap_or(suite.threshold());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(suite.stream());
    let inputs: Vec<Input> = (0..samples).map(|_| draw(suite, genus, &mut rng)).collect();

    let workers = thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(samples.max(1));
    let chunk = samples.div_ceil(workers).max(1);
    let residuals: Vec<Result<f64, CliError>> = thread::scope(|scope| {
        let handles: Vec<_> = inputs
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|input| evaluate(suite, input, prec))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });

    let mut results = Vec::with_capacity(samples);
    for (index, r) in residuals.into_iter().enumerate() {
        let residual = r?;
        results.push(SampleResult {
            suite,
            index,
            genus,
            residual,
            pass: residual.is_finite() && residual <= threshold,
        });
    }
    let passed = results.iter().filter(|r| r.pass).count();
    let max_residual = results.iter().map(|r| r.residual).fold(0.0, f64::max);
    Ok(SuiteReport {
        suite,
        genus,
        seed,
        threshold,
        samples: results,
        passed,
        max_residual,
    })
}
