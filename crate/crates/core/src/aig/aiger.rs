//! AIGER reader and writer (ASCII `aag` and binary `aig`, format 1.x).
//!
//! Latches are cut: each latch output becomes an extra primary input
//! (after the real inputs) and each latch next-state literal becomes an
//! extra primary output (after the real, bad-state and constraint outputs).
//! Symbol tables are skipped on read and never written; comment lines are
//! available through [`parse_aiger_full`].

use thiserror::Error;

use super::{AigNetwork, Node, NodeRef};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AigerError {
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("line {line}: {msg}")]
    BadLine { line: usize, msg: String },
    #[error("literal {lit} exceeds declared maximum variable {max_var}")]
    LiteralOutOfRange { lit: u32, max_var: u32 },
    #[error("literal {0} refers to an undefined variable")]
    UndefinedLiteral(u32),
    #[error("variable {0} defined more than once")]
    Redefined(u32),
    #[error("AND definitions form a cycle through variable {0}")]
    Cycle(u32),
    #[error("unexpected end of file while reading {0}")]
    Truncated(&'static str),
    #[error("unsupported AIGER feature: {0}")]
    Unsupported(&'static str),
}

struct Header {
    binary: bool,
    max_var: u32,
    inputs: u32,
    latches: u32,
    outputs: u32,
    ands: u32,
    bad: u32,
    constraints: u32,
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
    line: usize,
}

impl<'a> Cursor<'a> {
    fn next_line(&mut self, what: &'static str) -> Result<&'a str, AigerError> {
        if self.pos >= self.data.len() {
            return Err(AigerError::Truncated(what));
        }
        let rest = &self.data[self.pos..];
        let end = rest.iter().position(|&b| b == b'\n').unwrap_or(rest.len());
        let line = &rest[..end];
        self.pos += end + 1;
        self.line += 1;
        let line = std::str::from_utf8(line)
            .map_err(|_| AigerError::BadLine { line: self.line, msg: "not valid UTF-8".into() })?;
        Ok(line.trim_end_matches('\r'))
    }

    fn numbers(&mut self, what: &'static str, min: usize, max: usize) -> Result<Vec<u32>, AigerError> {
        let line_no = self.line + 1;
        let line = self.next_line(what)?;
        let nums = line
            .split_ascii_whitespace()
            .map(|t| t.parse::<u32>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| AigerError::BadLine { line: line_no, msg: format!("expected {what}") })?;
        if nums.len() < min || nums.len() > max {
            return Err(AigerError::BadLine { line: line_no, msg: format!("expected {what}") });
        }
        Ok(nums)
    }

    fn delta(&mut self) -> Result<u32, AigerError> {
        let mut x: u32 = 0;
        let mut shift = 0;
        loop {
            let byte = *self.data.get(self.pos).ok_or(AigerError::Truncated("binary AND section"))?;
            self.pos += 1;
            if shift > 28 {
                return Err(AigerError::BadLine { line: self.line, msg: "delta overflows 32 bits".into() });
            }
            x |= ((byte & 0x7f) as u32) << shift;
            if byte & 0x80 == 0 {
                return Ok(x);
            }
            shift += 7;
        }
    }
}

fn parse_header(cur: &mut Cursor<'_>) -> Result<Header, AigerError> {
    let line = cur.next_line("header")?;
    let mut toks = line.split_ascii_whitespace();
    let binary = match toks.next() {
        Some("aag") => false,
        Some("aig") => true,
        _ => return Err(AigerError::MalformedHeader(line.to_string())),
    };
    let nums = toks
        .map(|t| t.parse::<u32>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| AigerError::MalformedHeader(line.to_string()))?;
    if nums.len() < 5 || nums.len() > 9 {
        return Err(AigerError::MalformedHeader(line.to_string()));
    }
    let get = |i: usize| nums.get(i).copied().unwrap_or(0);
    if get(7) != 0 || get(8) != 0 {
        return Err(AigerError::Unsupported("justice or fairness properties"));
    }
    let h = Header {
        binary,
        max_var: nums[0],
        inputs: nums[1],
        latches: nums[2],
        outputs: nums[3],
        ands: nums[4],
        bad: get(5),
        constraints: get(6),
    };
    let declared = h.inputs as u64 + h.latches as u64 + h.ands as u64;
    if declared > h.max_var as u64 || (binary && declared != h.max_var as u64) {
        return Err(AigerError::MalformedHeader(format!("M={} inconsistent with I+L+A={}", h.max_var, declared)));
    }
    Ok(h)
}

/// Parses an AIGER file (ASCII or binary) into a combinational network.
/// Parses an AIGER file (ASCII or binary) into a combinational network.
pub fn parse_aiger(bytes: &[u8]) -> Result<AigNetwork, AigerError> {
    parse_aiger_full(bytes).map(|p| p.net)
}

/// A parsed file with its variable map and comment lines.
pub struct ParsedAiger {
    pub net: AigNetwork,
    /// Node literal for each AIGER variable.
    pub var_map: Vec<Option<NodeRef>>,
    /// Lines of the comment section; text after a leading `c ` on the
    /// opening line counts as a comment line too.
    pub comments: Vec<String>,
}

impl ParsedAiger {
    /// Resolves an AIGER literal against the variable map.
    pub fn literal(&self, lit: u32) -> Result<NodeRef, AigerError> {
        if (lit >> 1) as usize >= self.var_map.len() {
            return Err(AigerError::UndefinedLiteral(lit));
        }
        lookup(&self.var_map, lit)
    }
}

pub fn parse_aiger_full(bytes: &[u8]) -> Result<ParsedAiger, AigerError> {
    let mut cur = Cursor { data: bytes, pos: 0, line: 0 };
    let h = parse_header(&mut cur)?;
    let max_lit = 2 * h.max_var + 1;
    let check = |lit: u32| -> Result<u32, AigerError> {
        if lit > max_lit {
            Err(AigerError::LiteralOutOfRange { lit, max_var: h.max_var })
        } else {
            Ok(lit)
        }
    };

    let mut net = AigNetwork::new();
    let mut var_map: Vec<Option<NodeRef>> = vec![None; h.max_var as usize + 1];
    var_map[0] = Some(NodeRef::FALSE);

    let define = |var_map: &mut Vec<Option<NodeRef>>, lit: u32, line: usize| -> Result<u32, AigerError> {
        let lit = check(lit)?;
        if lit & 1 == 1 || lit == 0 {
            return Err(AigerError::BadLine { line, msg: format!("{lit} cannot be defined") });
        }
        let var = lit >> 1;
        if var_map[var as usize].is_some() {
            return Err(AigerError::Redefined(var));
        }
        Ok(var)
    };

    // inputs
    for i in 0..h.inputs {
        let var = if h.binary {
            i + 1
        } else {
            let lit = cur.numbers("input literal", 1, 1)?[0];
            define(&mut var_map, lit, cur.line)?
        };
        var_map[var as usize] = Some(net.add_input());
    }

    // latches: outputs become inputs, next-state functions become outputs
    let mut latch_next = Vec::with_capacity(h.latches as usize);
    let mut latch_vars = Vec::with_capacity(h.latches as usize);
    for i in 0..h.latches {
        let (var, next) = if h.binary {
            let nums = cur.numbers("latch definition", 1, 2)?;
            (h.inputs + i + 1, nums[0])
        } else {
            let nums = cur.numbers("latch definition", 2, 3)?;
            (define(&mut var_map, nums[0], cur.line)?, nums[1])
        };
        latch_vars.push(var);
        latch_next.push(check(next)?);
    }
    for &var in &latch_vars {
        var_map[var as usize] = Some(net.add_input());
    }

    let mut out_lits = Vec::new();
    for _ in 0..(h.outputs + h.bad + h.constraints) {
        out_lits.push(check(cur.numbers("output literal", 1, 1)?[0])?);
    }

    if h.binary {
        for i in 0..h.ands {
            let lhs = 2 * (h.inputs + h.latches + i + 1);
            let d0 = cur.delta()?;
            let d1 = cur.delta()?;
            if d0 == 0 || d0 > lhs || d1 > lhs - d0 {
                return Err(AigerError::BadLine { line: cur.line, msg: format!("invalid delta for AND {lhs}") });
            }
            let r0 = lhs - d0;
            let r1 = r0 - d1;
            let a = lookup(&var_map, r0)?;
            let b = lookup(&var_map, r1)?;
            var_map[(lhs >> 1) as usize] = Some(net.add_and_raw(a, b));
        }
    } else {
        let mut defs: Vec<(u32, u32, u32)> = Vec::with_capacity(h.ands as usize);
        let mut def_of: Vec<u32> = vec![u32::MAX; h.max_var as usize + 1];
        for i in 0..h.ands {
            let nums = cur.numbers("AND definition", 3, 3)?;
            let var = define(&mut var_map, nums[0], cur.line)?;
            if def_of[var as usize] != u32::MAX {
                return Err(AigerError::Redefined(var));
            }
            def_of[var as usize] = i;
            defs.push((var, check(nums[1])?, check(nums[2])?));
        }
        // ASCII files may list ANDs out of order; resolve depth-first.
        let mut state = vec![0u8; defs.len()]; // 0 new, 1 on stack, 2 done
        for start in 0..defs.len() {
            let mut stack = vec![(start, false)];
            while let Some((d, expanded)) = stack.pop() {
                if state[d] == 2 {
                    continue;
                }
                let (var, r0, r1) = defs[d];
                if expanded {
                    let a = lookup(&var_map, r0)?;
                    let b = lookup(&var_map, r1)?;
                    var_map[var as usize] = Some(net.add_and_raw(a, b));
                    state[d] = 2;
                    continue;
                }
                if state[d] == 1 {
                    return Err(AigerError::Cycle(var));
                }
                state[d] = 1;
                stack.push((d, true));
                for r in [r1, r0] {
                    let v = (r >> 1) as usize;
                    if var_map[v].is_none() {
                        let dep = def_of[v];
                        if dep == u32::MAX {
                            return Err(AigerError::UndefinedLiteral(r));
                        }
                        if state[dep as usize] == 1 {
                            return Err(AigerError::Cycle(v as u32));
                        }
                        stack.push((dep as usize, false));
                    }
                }
            }
        }
    }

    for lit in out_lits.into_iter().chain(latch_next) {
        let r = lookup(&var_map, lit)?;
        net.add_output(r);
    }

    // symbol table, then an optional comment section
    let mut comments = Vec::new();
    let mut in_comments = false;
    while cur.pos < cur.data.len() {
        let Ok(line) = cur.next_line("comment") else { break };
        if in_comments {
            comments.push(line.to_string());
        } else if line == "c" || line.starts_with("c ") {
            in_comments = true;
            let rest = line[1..].trim();
            if !rest.is_empty() {
                comments.push(rest.to_string());
            }
        }
    }
    Ok(ParsedAiger { net, var_map, comments })
}

fn lookup(var_map: &[Option<NodeRef>], lit: u32) -> Result<NodeRef, AigerError> {
    var_map[(lit >> 1) as usize].map(|r| r.complement_if(lit & 1 == 1)).ok_or(AigerError::UndefinedLiteral(lit))
}

/// AIGER variable assigned to each node when writing: inputs first, then
/// AND nodes in index order.
pub(crate) fn aiger_variables(net: &AigNetwork) -> Vec<u32> {
    let mut var = vec![0u32; net.node_count()];
    for (pos, &idx) in net.inputs().iter().enumerate() {
        var[idx as usize] = pos as u32 + 1;
    }
    for (next, idx) in (net.num_inputs() as u32 + 1..).zip(net.and_nodes()) {
        var[idx as usize] = next;
    }
    var
}

pub(crate) fn map_lit(var: &[u32], r: NodeRef) -> u32 {
    2 * var[r.index() as usize] + r.is_complemented() as u32
}

/// Serializes `net` as AIGER. Inputs are numbered first, then AND nodes in
/// topological order, so a parsed file is written back unchanged.
pub fn write_aiger(net: &AigNetwork, ascii: bool) -> Vec<u8> {
    write_aiger_with_outputs(net, net.outputs(), ascii)
}

pub(crate) fn write_aiger_with_outputs(net: &AigNetwork, outputs: &[NodeRef], ascii: bool) -> Vec<u8> {
    use std::io::Write;

    let var = aiger_variables(net);
    let ni = net.num_inputs();
    let na = net.and_count();
    let mut out = Vec::new();
    let tag = if ascii { "aag" } else { "aig" };
    writeln!(out, "{tag} {} {ni} 0 {} {na}", ni + na, outputs.len()).unwrap();
    if ascii {
        for i in 0..ni {
            writeln!(out, "{}", 2 * (i + 1)).unwrap();
        }
    }
    for &o in outputs {
        writeln!(out, "{}", map_lit(&var, o)).unwrap();
    }
    for idx in net.and_nodes() {
        let Node::And(a, b) = net.node(idx) else { unreachable!() };
        let lhs = 2 * var[idx as usize];
        let (la, lb) = (map_lit(&var, a), map_lit(&var, b));
        let (lo, hi) = if la <= lb { (la, lb) } else { (lb, la) };
        if ascii {
            writeln!(out, "{lhs} {lo} {hi}").unwrap();
        } else {
            encode_delta(&mut out, lhs - hi);
            encode_delta(&mut out, hi - lo);
        }
    }
    out
}

fn encode_delta(out: &mut Vec<u8>, mut x: u32) {
    while x & !0x7f != 0 {
        out.push((x & 0x7f) as u8 | 0x80);
        x >>= 7;
    }
    out.push(x as u8);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file() {
        let net = parse_aiger(b"aag 0 0 0 0 0\n").unwrap();
        assert_eq!(net.num_inputs(), 0);
        assert_eq!(net.num_outputs(), 0);
        assert_eq!(net.node_count(), 1);
        assert_eq!(write_aiger(&net, true), b"aag 0 0 0 0 0\n");
    }

    #[test]
    fn single_and() {
        let src = b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\n";
        let net = parse_aiger(src).unwrap();
        assert_eq!(net.num_inputs(), 2);
        assert_eq!(net.and_count(), 1);
        assert_eq!(net.fanins(3), Some((net.input(0), net.input(1))));
        assert_eq!(net.output(0), NodeRef::new(3, false));
        assert_eq!(write_aiger(&net, true), src.to_vec());
    }

    #[test]
    fn binary_roundtrip_and_deltas() {
        let src = b"aag 5 3 0 2 2\n2\n4\n6\n10\n11\n8 2 5\n10 8 6\n";
        let net = parse_aiger(src).unwrap();
        let bin = write_aiger(&net, false);
        assert!(bin.starts_with(b"aig 5 3 0 2 2\n10\n11\n"));
        let back = parse_aiger(&bin).unwrap();
        assert!(back.structurally_equal(&net));
    }

    #[test]
    fn large_delta_encoding() {
        let mut buf = Vec::new();
        encode_delta(&mut buf, 300);
        assert_eq!(buf, vec![0xac, 0x02]);
        let mut cur = Cursor { data: &buf, pos: 0, line: 0 };
        assert_eq!(cur.delta().unwrap(), 300);
    }

    #[test]
    fn latches_are_cut() {
        // one input, one latch whose next state is input AND latch
        let src = b"aag 3 1 1 1 1\n2\n4 6\n6\n6 2 4\n";
        let net = parse_aiger(src).unwrap();
        assert_eq!(net.num_inputs(), 2);
        assert_eq!(net.num_outputs(), 2);
        assert_eq!(net.output(0), net.output(1));
    }

    #[test]
    fn out_of_order_ascii_ands() {
        let src = b"aag 5 2 0 1 2\n2\n4\n10\n10 8 2\n8 2 4\n";
        let net = parse_aiger(src).unwrap();
        assert_eq!(net.and_count(), 2);
        let out = net.output(0).index();
        let (f0, f1) = net.fanins(out).unwrap();
        assert_eq!(f0, net.input(0));
        assert!(net.is_and(f1.index()));
    }

    #[test]
    fn errors() {
        assert!(matches!(parse_aiger(b"aug 1 1 0 0 0\n"), Err(AigerError::MalformedHeader(_))));
        assert!(matches!(parse_aiger(b"aag 1 1 0 0\n"), Err(AigerError::MalformedHeader(_))));
        assert!(matches!(
            parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n6 2 9\n"),
            Err(AigerError::LiteralOutOfRange { lit: 9, .. })
        ));
        assert!(matches!(parse_aiger(b"aag 3 2 0 1 1\n2\n4\n6\n"), Err(AigerError::Truncated(_))));
        assert!(matches!(parse_aiger(b"aig 3 2 0 1 1\n6\n\x02"), Err(AigerError::Truncated(_))));
        assert!(matches!(parse_aiger(b"aag 4 1 0 1 2\n2\n6\n6 8 2\n8 6 2\n"), Err(AigerError::Cycle(_))));
        assert!(matches!(parse_aiger(b"aag 2 1 0 1 0\n2\n4\n"), Err(AigerError::UndefinedLiteral(4))));
    }

    #[test]
    fn comments_and_symbols_ignored() {
        let src = b"aag 3 2 0 1 1\n2\n4\n6\n6 2 4\ni0 a\ni1 b\no0 y\nc\nhello\n";
        let net = parse_aiger(src).unwrap();
        assert_eq!(net.and_count(), 1);
        let full = parse_aiger_full(src).unwrap();
        assert_eq!(full.comments, vec!["hello".to_string()]);
        assert_eq!(full.literal(7), Ok(!full.net.output(0)));
        let inline = parse_aiger_full(b"aag 1 1 0 1 0\n2\n2\nc note\nmore\n").unwrap();
        assert_eq!(inline.comments, vec!["note".to_string(), "more".to_string()]);
    }
}
