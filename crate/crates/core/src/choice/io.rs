//! Extended AIGER for choice networks.
//!
//! The body is plain AIGER whose outputs are the subject outputs followed
//! by one output per choice root. The comment section carries one record
//! per class, `c CHOICE <rep-lit> <choice-lit>...`, where each choice
//! literal is equivalent to the representative literal, and a record
//! `c SUBJECT <n>` giving the number of subject outputs.

use std::io::Write;

use super::{ChoiceError, ChoiceNetwork, EquivalenceClass};
use crate::aig::{aiger_variables, map_lit, parse_aiger_full, write_aiger_with_outputs, NodeRef};

pub fn write_choice_aiger(cn: &ChoiceNetwork, ascii: bool) -> Vec<u8> {
    let mut outputs = cn.net.outputs().to_vec();
    outputs.extend(cn.choice_roots());
    let mut out = write_aiger_with_outputs(&cn.net, &outputs, ascii);
    let var = aiger_variables(&cn.net);
    writeln!(out, "c").unwrap();
    for c in &cn.classes {
        write!(out, "c CHOICE {}", map_lit(&var, NodeRef::new(c.representative, false))).unwrap();
        for &(n, phase) in &c.choices {
            write!(out, " {}", map_lit(&var, NodeRef::new(n, phase))).unwrap();
        }
        writeln!(out).unwrap();
    }
    writeln!(out, "c SUBJECT {}", cn.net.num_outputs()).unwrap();
    out
}

/// Reads the format written by [`write_choice_aiger`]. A file without
/// records parses as a choice-free network.
pub fn parse_choice_aiger(bytes: &[u8]) -> Result<ChoiceNetwork, ChoiceError> {
    let parsed = parse_aiger_full(bytes)?;
    let mut subject_outputs = None;
    let mut classes = Vec::new();
    for line in &parsed.comments {
        let rec = line.strip_prefix("c ").unwrap_or(line).trim();
        let mut toks = rec.split_ascii_whitespace();
        let bad = || ChoiceError::BadRecord(rec.to_string());
        match toks.next() {
            Some("SUBJECT") => {
                let n: usize = toks.next().and_then(|t| t.parse().ok()).ok_or_else(bad)?;
                subject_outputs = Some(n);
            }
            Some("CHOICE") => {
                let lits: Vec<u32> = toks.map(|t| t.parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
                let (&rep_lit, choice_lits) = lits.split_first().ok_or_else(bad)?;
                let rep = parsed.literal(rep_lit)?;
                let mut choices = Vec::new();
                for &l in choice_lits {
                    let r = parsed.literal(l)?;
                    // the node computes rep ^ phase
                    choices.push((r.index(), r.is_complemented() ^ rep.is_complemented()));
                }
                classes.push(EquivalenceClass { representative: rep.index(), choices });
            }
            _ => {}
        }
    }
    let mut net = parsed.net;
    if let Some(n) = subject_outputs {
        if n > net.num_outputs() {
            return Err(ChoiceError::BadRecord(format!("SUBJECT {n} exceeds {} outputs", net.num_outputs())));
        }
        net.truncate_outputs(n);
    }
    Ok(ChoiceNetwork::new(net, classes))
}
