//! Combinational equivalence checking by simulation.
//!
//! Exhaustive simulation is a complete check for up to 16 inputs. Random
//! simulation can only refute equivalence; a clean run is reported as
//! [`Verdict::NoMismatchObserved`], never as [`Verdict::Equivalent`].

use rand::Rng;
use thiserror::Error;

use crate::aig::{simulate, var_word, AigNetwork};
use crate::rng::rng_from;

/// Largest input count accepted by [`cec_exhaustive`].
pub const MAX_EXHAUSTIVE_INPUTS: usize = 16;

/// Words simulated per batch, bounding memory on large networks.
const CHUNK_WORDS: usize = 64;

/// Anything that maps input pattern words to output pattern words.
pub trait Evaluate {
    fn num_inputs(&self) -> usize;
    fn num_outputs(&self) -> usize;
    /// One word vector per output, `n_words` long, for the given per-input
    /// pattern words.
    fn evaluate(&self, patterns: &[Vec<u64>], n_words: usize) -> Vec<Vec<u64>>;
}

impl Evaluate for AigNetwork {
    fn num_inputs(&self) -> usize {
        AigNetwork::num_inputs(self)
    }

    fn num_outputs(&self) -> usize {
        AigNetwork::num_outputs(self)
    }

    fn evaluate(&self, patterns: &[Vec<u64>], n_words: usize) -> Vec<Vec<u64>> {
        let sim = simulate(self, patterns, n_words).expect("pattern shape checked by caller");
        self.outputs().iter().map(|&o| sim.edge(o)).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum VerifyError {
    #[error("arity mismatch: {a_in}/{a_out} vs {b_in}/{b_out} inputs/outputs")]
    ArityMismatch { a_in: usize, a_out: usize, b_in: usize, b_out: usize },
    #[error("{0} inputs exceed the exhaustive limit of {MAX_EXHAUSTIVE_INPUTS}")]
    TooManyInputs(usize),
}

/// An input assignment on which two networks disagree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    /// Value of each input, in input order.
    pub pattern: Vec<bool>,
    /// Lowest-index output that differs.
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Equivalent,
    /// Random simulation found no difference; this is not a proof.
    NoMismatchObserved,
    Counterexample(Counterexample),
}

impl Verdict {
    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::Counterexample(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Equivalent => "equivalent",
            Verdict::NoMismatchObserved => "no-mismatch-observed",
            Verdict::Counterexample(_) => "counterexample",
        }
    }
}

fn check_arity(a: &dyn Evaluate, b: &dyn Evaluate) -> Result<(), VerifyError> {
    if a.num_inputs() != b.num_inputs() || a.num_outputs() != b.num_outputs() {
        return Err(VerifyError::ArityMismatch {
            a_in: a.num_inputs(),
            a_out: a.num_outputs(),
            b_in: b.num_inputs(),
            b_out: b.num_outputs(),
        });
    }
    Ok(())
}

/// Earliest differing bit over a batch: (bit position in the batch, output).
fn first_mismatch(oa: &[Vec<u64>], ob: &[Vec<u64>], n_words: usize) -> Option<(usize, usize)> {
    for w in 0..n_words {
        let mut best: Option<(u32, usize)> = None;
        for (o, (va, vb)) in oa.iter().zip(ob).enumerate() {
            let diff = va[w] ^ vb[w];
            if diff != 0 {
                let bit = diff.trailing_zeros();
                if best.is_none_or(|(b, _)| bit < b) {
                    best = Some((bit, o));
                }
            }
        }
        if let Some((bit, o)) = best {
            return Some((w * 64 + bit as usize, o));
        }
    }
    None
}

fn pattern_at(patterns: &[Vec<u64>], bit: usize) -> Vec<bool> {
    patterns.iter().map(|p| (p[bit / 64] >> (bit % 64)) & 1 == 1).collect()
}

/// Complete check over all `2^n` input assignments. A counterexample is the
/// lowest-numbered differing assignment (input `i` is bit `i`).
pub fn cec_exhaustive(a: &dyn Evaluate, b: &dyn Evaluate) -> Result<Verdict, VerifyError> {
    check_arity(a, b)?;
    let n = a.num_inputs();
    if n > MAX_EXHAUSTIVE_INPUTS {
        return Err(VerifyError::TooManyInputs(n));
    }
    let total_words = if n <= 6 { 1 } else { 1usize << (n - 6) };
    let mut start = 0;
    while start < total_words {
        let len = CHUNK_WORDS.min(total_words - start);
        let patterns: Vec<Vec<u64>> = (0..n).map(|i| (start..start + len).map(|w| var_word(i, w)).collect()).collect();
        let (oa, ob) = (a.evaluate(&patterns, len), b.evaluate(&patterns, len));
        if let Some((bit, output)) = first_mismatch(&oa, &ob, len) {
            return Ok(Verdict::Counterexample(Counterexample { pattern: pattern_at(&patterns, bit), output }));
        }
        start += len;
    }
    Ok(Verdict::Equivalent)
}

/// `64 * n_words` random patterns drawn from a ChaCha8 stream seeded by `seed`.
pub fn cec_random(a: &dyn Evaluate, b: &dyn Evaluate, n_words: usize, seed: u64) -> Result<Verdict, VerifyError> {
    check_arity(a, b)?;
    let n = a.num_inputs();
    let mut rng = rng_from(seed);
    let mut done = 0;
    while done < n_words {
        let len = CHUNK_WORDS.min(n_words - done);
        let patterns: Vec<Vec<u64>> = (0..n).map(|_| (0..len).map(|_| rng.gen()).collect()).collect();
        let (oa, ob) = (a.evaluate(&patterns, len), b.evaluate(&patterns, len));
        if let Some((bit, output)) = first_mismatch(&oa, &ob, len) {
            return Ok(Verdict::Counterexample(Counterexample { pattern: pattern_at(&patterns, bit), output }));
        }
        done += len;
    }
    Ok(Verdict::NoMismatchObserved)
}

/// Exhaustive when the input count allows it, random otherwise.
pub fn cec_auto(a: &dyn Evaluate, b: &dyn Evaluate, n_words: usize, seed: u64) -> Result<Verdict, VerifyError> {
    if a.num_inputs() <= MAX_EXHAUSTIVE_INPUTS {
        cec_exhaustive(a, b)
    } else {
        cec_random(a, b, n_words, seed)
    }
}

/// Evaluates a single input assignment.
pub fn eval_pattern(net: &dyn Evaluate, pattern: &[bool]) -> Vec<bool> {
    let pats: Vec<Vec<u64>> = pattern.iter().map(|&v| vec![if v { 1 } else { 0 }]).collect();
    net.evaluate(&pats, 1).into_iter().map(|w| w[0] & 1 == 1).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aig::{truth_table, NodeRef};
    use crate::gen;

    fn and2(swap: bool) -> AigNetwork {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = if swap { net.and(b, a) } else { net.and(a, b) };
        net.add_output(x);
        net
    }

    fn or2() -> AigNetwork {
        let mut net = AigNetwork::with_inputs(2);
        let (a, b) = (net.input(0), net.input(1));
        let x = net.or(a, b);
        net.add_output(x);
        net
    }

    #[test]
    fn identical_and_commuted() {
        let a = and2(false);
        assert_eq!(cec_exhaustive(&a, &a), Ok(Verdict::Equivalent));
        assert_eq!(cec_exhaustive(&a, &and2(true)), Ok(Verdict::Equivalent));
    }

    #[test]
    fn and_vs_or_counterexample() {
        // truth-table oracle: rows (a,b) in assignment order 00,10,01,11
        let and_rows = [false, false, false, true];
        let or_rows = [false, true, true, true];
        let first = (0..4).find(|&m| and_rows[m] != or_rows[m]).unwrap();
        let expect = vec![first & 1 == 1, first & 2 == 2];
        assert_eq!(expect, vec![true, false]);
        match cec_exhaustive(&and2(false), &or2()).unwrap() {
            Verdict::Counterexample(cex) => {
                assert_eq!(cex.pattern, expect);
                assert_eq!(cex.output, 0);
            }
            v => panic!("expected counterexample, got {v:?}"),
        }
    }

    #[test]
    fn arity_and_size_errors() {
        let a = and2(false);
        let b = AigNetwork::with_inputs(3);
        assert!(matches!(cec_exhaustive(&a, &b), Err(VerifyError::ArityMismatch { .. })));
        let big = AigNetwork::with_inputs(17);
        assert_eq!(cec_exhaustive(&big, &big), Err(VerifyError::TooManyInputs(17)));
        assert!(matches!(cec_random(&a, &b, 1, 0), Err(VerifyError::ArityMismatch { .. })));
    }

    #[test]
    fn random_finds_half_difference() {
        // outputs differ exactly when input 0 is set
        let mut x = AigNetwork::with_inputs(20);
        let mut y = AigNetwork::with_inputs(20);
        let (a1, b1) = (x.input(1), x.input(2));
        let o = x.and(a1, b1);
        x.add_output(o);
        let (a0, a1, b1) = (y.input(0), y.input(1), y.input(2));
        let t = y.and(a1, b1);
        let o = y.xor(t, a0);
        y.add_output(o);
        let v = cec_random(&x, &y, 16, 7).unwrap();
        let Verdict::Counterexample(cex) = v.clone() else { panic!("{v:?}") };
        assert!(cex.pattern[0]);
        assert_ne!(eval_pattern(&x, &cex.pattern), eval_pattern(&y, &cex.pattern));
        assert_eq!(cec_random(&x, &y, 16, 7).unwrap(), v);
        assert_eq!(cec_random(&x, &x, 16, 3).unwrap(), Verdict::NoMismatchObserved);
    }

    #[test]
    fn exhaustive_agrees_with_truth_tables() {
        for seed in 0..20 {
            let a = gen::random_network(8, 40, 1, seed);
            let b = gen::random_network(8, 40, 1, seed + 100);
            let ta = truth_table(&a, a.output(0), a.inputs()).unwrap();
            let tb = truth_table(&b, b.output(0), b.inputs()).unwrap();
            let v = cec_exhaustive(&a, &b).unwrap();
            assert_eq!(ta == tb, v == Verdict::Equivalent);
            if let Verdict::Counterexample(cex) = v {
                let m: usize = cex.pattern.iter().enumerate().map(|(i, &v)| (v as usize) << i).sum();
                assert_ne!(ta.bit(m), tb.bit(m));
                // no earlier assignment differs
                assert!((0..m).all(|k| ta.bit(k) == tb.bit(k)));
            }
        }
    }

    #[test]
    fn exhaustive_spans_multiple_chunks() {
        // 16 inputs: 1024 words, 16 batches; difference only on the last assignment
        let a = gen::balanced_and(16);
        let mut b = AigNetwork::with_inputs(16);
        b.add_output(NodeRef::FALSE);
        let Verdict::Counterexample(cex) = cec_exhaustive(&a, &b).unwrap() else { panic!() };
        assert!(cex.pattern.iter().all(|&v| v));
    }
}
