//! LUT netlists, their simulation and BLIF serialization.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::cuts::{CutFunction, MAX_CUT_SIZE};
use crate::verify::Evaluate;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Signal {
    Const(bool),
    Input(u32),
    Lut(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Lut {
    pub inputs: Vec<Signal>,
    /// Bit `m` is the output when input `i` carries bit `i` of `m`.
    pub function: CutFunction,
}

impl Lut {
    pub fn bit(&self, m: usize) -> bool {
        (self.function[m / 64] >> (m % 64)) & 1 == 1
    }
}

/// LUTs in topological order: a LUT reads only inputs, constants and
/// earlier LUTs. Outputs may be inverted.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LutNetwork {
    pub num_inputs: usize,
    pub luts: Vec<Lut>,
    pub outputs: Vec<(Signal, bool)>,
}

impl LutNetwork {
    pub fn lut_count(&self) -> usize {
        self.luts.len()
    }

    /// Longest LUT path from any input to any output.
    pub fn depth(&self) -> u32 {
        let mut level = vec![0u32; self.luts.len()];
        let lv = |s: &Signal, level: &[u32]| match s {
            Signal::Lut(i) => level[*i as usize],
            _ => 0,
        };
        for (i, l) in self.luts.iter().enumerate() {
            level[i] = 1 + l.inputs.iter().map(|s| lv(s, &level)).max().unwrap_or(0);
        }
        self.outputs.iter().map(|(s, _)| lv(s, &level)).max().unwrap_or(0)
    }
}

/// Mux-tree evaluation of a LUT on one word per input.
fn eval_lut_word(lut: &Lut, xs: &[u64]) -> u64 {
    let n = xs.len();
    let mut vals: Vec<u64> = (0..1usize << n).map(|m| if lut.bit(m) { !0 } else { 0 }).collect();
    for i in (0..n).rev() {
        let half = 1usize << i;
        for j in 0..half {
            vals[j] = (xs[i] & vals[j + half]) | (!xs[i] & vals[j]);
        }
        vals.truncate(half);
    }
    vals[0]
}

impl Evaluate for LutNetwork {
    fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    fn evaluate(&self, patterns: &[Vec<u64>], n_words: usize) -> Vec<Vec<u64>> {
        let mut values: Vec<Vec<u64>> = Vec::with_capacity(self.luts.len());
        let word = |s: Signal, w: usize, values: &[Vec<u64>]| match s {
            Signal::Const(b) => {
                if b {
                    !0
                } else {
                    0
                }
            }
            Signal::Input(i) => patterns[i as usize][w],
            Signal::Lut(i) => values[i as usize][w],
        };
        let mut xs = Vec::with_capacity(MAX_CUT_SIZE);
        for lut in &self.luts {
            let mut out = vec![0u64; n_words];
            for (w, o) in out.iter_mut().enumerate() {
                xs.clear();
                xs.extend(lut.inputs.iter().map(|&s| word(s, w, &values)));
                *o = eval_lut_word(lut, &xs);
            }
            values.push(out);
        }
        self.outputs
            .iter()
            .map(|&(s, inv)| (0..n_words).map(|w| word(s, w, &values) ^ if inv { !0 } else { 0 }).collect())
            .collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BlifError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("signal `{0}` is never driven")]
    Undriven(String),
    #[error("signal `{0}` is driven twice")]
    Redriven(String),
    #[error("combinational cycle through `{0}`")]
    Cycle(String),
    #[error(".names with {0} inputs exceeds the {MAX_CUT_SIZE}-input limit")]
    TooWide(usize),
}

fn signal_name(s: Signal) -> String {
    match s {
        Signal::Const(false) => "$false".into(),
        Signal::Const(true) => "$true".into(),
        Signal::Input(i) => format!("i{i}"),
        Signal::Lut(i) => format!("n{i}"),
    }
}

/// Writes the netlist as BLIF with one `.names` block per LUT (on-set
/// minterms) and a buffer or inverter per output.
pub fn write_blif(net: &LutNetwork, model: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, ".model {model}");
    let ins: Vec<String> = (0..net.num_inputs).map(|i| format!("i{i}")).collect();
    let _ = writeln!(s, ".inputs {}", ins.join(" "));
    let outs: Vec<String> = (0..net.outputs.len()).map(|i| format!("o{i}")).collect();
    let _ = writeln!(s, ".outputs {}", outs.join(" "));
    let uses_const = |b: bool| {
        net.luts.iter().any(|l| l.inputs.contains(&Signal::Const(b)))
            || net.outputs.iter().any(|o| o.0 == Signal::Const(b))
    };
    if uses_const(false) {
        s.push_str(".names $false\n");
    }
    if uses_const(true) {
        s.push_str(".names $true\n1\n");
    }
    for (i, lut) in net.luts.iter().enumerate() {
        let names: Vec<String> = lut.inputs.iter().map(|&x| signal_name(x)).collect();
        let _ = writeln!(s, ".names {} n{i}", names.join(" "));
        if names.is_empty() {
            if lut.bit(0) {
                s.push_str("1\n");
            }
            continue;
        }
        for m in 0..1usize << lut.inputs.len() {
            if lut.bit(m) {
                let row: String = (0..lut.inputs.len()).map(|j| if (m >> j) & 1 == 1 { '1' } else { '0' }).collect();
                let _ = writeln!(s, "{row} 1");
            }
        }
    }
    for (i, &(sig, inv)) in net.outputs.iter().enumerate() {
        let _ = writeln!(s, ".names {} o{i}", signal_name(sig));
        s.push_str(if inv { "0 1\n" } else { "1 1\n" });
    }
    s.push_str(".end\n");
    s
}

struct NamesBlock {
    inputs: Vec<String>,
    output: String,
    rows: Vec<(String, bool)>,
    line: usize,
}

/// Reads a combinational single-model BLIF made of `.names` blocks (cubes
/// may use `-`). Buffers are kept as LUTs, so the result is functionally,
/// not structurally, equal to what [`write_blif`] was given.
pub fn parse_blif(text: &str) -> Result<LutNetwork, BlifError> {
    let mut inputs: Vec<String> = Vec::new();
    let mut outputs: Vec<String> = Vec::new();
    let mut blocks: Vec<NamesBlock> = Vec::new();
    // join continuation lines
    let mut logical: Vec<(usize, String)> = Vec::new();
    let mut pending = String::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end();
        if let Some(stripped) = line.strip_suffix('\\') {
            pending.push_str(stripped);
            pending.push(' ');
            continue;
        }
        pending.push_str(line);
        let full = std::mem::take(&mut pending);
        if !full.trim().is_empty() {
            logical.push((no + 1, full.trim().to_string()));
        }
    }
    let syntax = |line: usize, msg: &str| BlifError::Syntax { line, msg: msg.to_string() };
    for (line, text) in logical {
        let mut toks = text.split_whitespace();
        let head = toks.next().unwrap();
        match head {
            ".model" | ".end" => {}
            ".inputs" => inputs.extend(toks.map(str::to_string)),
            ".outputs" => outputs.extend(toks.map(str::to_string)),
            ".names" => {
                let mut sigs: Vec<String> = toks.map(str::to_string).collect();
                let output = sigs.pop().ok_or_else(|| syntax(line, ".names without signals"))?;
                blocks.push(NamesBlock { inputs: sigs, output, rows: Vec::new(), line });
            }
            h if h.starts_with('.') => return Err(syntax(line, &format!("unsupported directive {h}"))),
            _ => {
                let block = blocks.last_mut().ok_or_else(|| syntax(line, "cube outside .names"))?;
                let parts: Vec<&str> = text.split_whitespace().collect();
                let (cube, val) = match (block.inputs.len(), parts.as_slice()) {
                    (0, [v]) => (String::new(), *v),
                    (_, [c, v]) => (c.to_string(), *v),
                    _ => return Err(syntax(line, "malformed cube")),
                };
                if cube.len() != block.inputs.len() || !cube.chars().all(|c| matches!(c, '0' | '1' | '-')) {
                    return Err(syntax(line, "cube width or characters"));
                }
                let v = match val {
                    "1" => true,
                    "0" => false,
                    _ => return Err(syntax(line, "output value must be 0 or 1")),
                };
                block.rows.push((cube, v));
            }
        }
    }

    let mut driver: HashMap<&str, usize> = HashMap::new();
    for (i, b) in blocks.iter().enumerate() {
        if b.inputs.len() > MAX_CUT_SIZE {
            return Err(BlifError::TooWide(b.inputs.len()));
        }
        if inputs.contains(&b.output) || driver.insert(&b.output, i).is_some() {
            return Err(BlifError::Redriven(b.output.clone()));
        }
        let polarities: Vec<bool> = b.rows.iter().map(|r| r.1).collect();
        if polarities.windows(2).any(|w| w[0] != w[1]) {
            return Err(syntax(b.line, "mixed on-set and off-set rows"));
        }
    }
    let input_pos: HashMap<&str, u32> = inputs.iter().enumerate().map(|(i, s)| (s.as_str(), i as u32)).collect();

    // depth-first topological placement of blocks
    let mut placed: Vec<Option<u32>> = vec![None; blocks.len()];
    let mut on_stack = vec![false; blocks.len()];
    let mut luts: Vec<Lut> = Vec::new();
    let resolve = |name: &str, placed: &[Option<u32>]| -> Result<Signal, BlifError> {
        if let Some(&p) = input_pos.get(name) {
            return Ok(Signal::Input(p));
        }
        match driver.get(name) {
            Some(&b) => Ok(Signal::Lut(placed[b].expect("placed before use"))),
            None => Err(BlifError::Undriven(name.to_string())),
        }
    };
    for start in 0..blocks.len() {
        let mut stack = vec![(start, false)];
        while let Some((b, expanded)) = stack.pop() {
            if placed[b].is_some() {
                continue;
            }
            if expanded {
                let block = &blocks[b];
                let ins = block.inputs.iter().map(|n| resolve(n, &placed)).collect::<Result<Vec<_>, _>>()?;
                let mut function = [0u64; 4];
                let onset = block.rows.first().is_none_or(|r| r.1);
                for m in 0..1usize << ins.len() {
                    let hit = block.rows.iter().any(|(cube, _)| {
                        cube.chars().enumerate().all(|(j, c)| c == '-' || ((m >> j) & 1 == 1) == (c == '1'))
                    });
                    if hit == onset {
                        function[m / 64] |= 1 << (m % 64);
                    }
                }
                placed[b] = Some(luts.len() as u32);
                on_stack[b] = false;
                luts.push(Lut { inputs: ins, function });
                continue;
            }
            if on_stack[b] {
                return Err(BlifError::Cycle(blocks[b].output.clone()));
            }
            on_stack[b] = true;
            stack.push((b, true));
            for name in &blocks[b].inputs {
                if let Some(&d) = driver.get(name.as_str()) {
                    if placed[d].is_none() {
                        if on_stack[d] {
                            return Err(BlifError::Cycle(name.clone()));
                        }
                        stack.push((d, false));
                    }
                } else if !input_pos.contains_key(name.as_str()) {
                    return Err(BlifError::Undriven(name.clone()));
                }
            }
        }
    }
    let outs = outputs.iter().map(|o| resolve(o, &placed).map(|s| (s, false))).collect::<Result<Vec<_>, _>>()?;
    Ok(LutNetwork { num_inputs: inputs.len(), luts, outputs: outs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{cec_exhaustive, Verdict};

    fn xor_net() -> LutNetwork {
        LutNetwork {
            num_inputs: 3,
            luts: vec![
                Lut { inputs: vec![Signal::Input(0), Signal::Input(1)], function: [0b0110, 0, 0, 0] },
                Lut { inputs: vec![Signal::Lut(0), Signal::Input(2)], function: [0b1000, 0, 0, 0] },
            ],
            outputs: vec![(Signal::Lut(1), false), (Signal::Lut(0), true), (Signal::Const(true), false)],
        }
    }

    #[test]
    fn evaluates_luts() {
        let net = xor_net();
        let pats = vec![vec![0b1010_1010], vec![0b1100_1100], vec![0b1111_0000]];
        let out = net.evaluate(&pats, 1);
        assert_eq!(out[0][0] & 0xff, (0b1010_1010 ^ 0b1100_1100) & 0b1111_0000);
        assert_eq!(out[1][0] & 0xff, !(0b1010_1010u64 ^ 0b1100_1100) & 0xff);
        assert_eq!(out[2][0], !0);
        assert_eq!(net.depth(), 2);
    }

    #[test]
    fn blif_round_trip() {
        let net = xor_net();
        let text = write_blif(&net, "t");
        let back = parse_blif(&text).unwrap();
        assert_eq!(cec_exhaustive(&net, &back), Ok(Verdict::Equivalent));
    }

    #[test]
    fn blif_dont_cares_and_offset() {
        let text = ".model m\n.inputs a b c\n.outputs y z\n.names t c y\n1- 1\n-1 1\n.names a b t\n11 1\n.names a z\n1 0\n.end\n";
        let net = parse_blif(text).unwrap();
        let out = net.evaluate(&[vec![0b1010_1010], vec![0b1100_1100], vec![0b1111_0000]], 1);
        assert_eq!(out[0][0] & 0xff, (0b1010_1010 & 0b1100_1100) | 0b1111_0000);
        assert_eq!(out[1][0] & 0xff, !0b1010_1010u64 & 0xff);
    }

    #[test]
    fn blif_errors() {
        assert!(matches!(parse_blif(".inputs a\n.outputs y\n.names q y\n1 1\n"), Err(BlifError::Undriven(_))));
        assert!(matches!(
            parse_blif(".inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n"),
            Err(BlifError::Redriven(_))
        ));
        assert!(matches!(
            parse_blif(".inputs a\n.outputs y\n.names z y\n1 1\n.names y z\n1 1\n"),
            Err(BlifError::Cycle(_))
        ));
        assert!(matches!(parse_blif(".inputs a\n.outputs y\n.names a y\n12 1\n"), Err(BlifError::Syntax { .. })));
    }
}
