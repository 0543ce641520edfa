//! Choice-aware LUT mapping.
//!
//! Cuts of a class representative are the union of the cuts of all class
//! members, so alternative structures enlarge the match space. Delay mode
//! minimizes LUT depth; area mode minimizes area flow and then refines the
//! cover with exact local area.

mod cuts;
mod lut;

pub use cuts::{enumerate_cuts, Cut, CutFunction, CutSets, MAX_CUT_SIZE};
pub use lut::{parse_blif, write_blif, BlifError, Lut, LutNetwork, Signal};

use thiserror::Error;

use crate::aig::AigNetwork;
use crate::choice::ChoiceNetwork;
use crate::verify::{cec_exhaustive, cec_random, Verdict, VerifyError, MAX_EXHAUSTIVE_INPUTS};
use crate::Mode;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapError {
    #[error("cut size {0} outside 2..={MAX_CUT_SIZE}")]
    CutSize(usize),
    #[error("cut limit must be at least 1")]
    CutLimit,
    #[error("choice network has a cycle in its quotient graph")]
    Cyclic,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MapConfig {
    pub k: usize,
    pub cut_limit: usize,
    /// Exact-area refinement passes (area mode only).
    pub rounds: usize,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { k: 6, cut_limit: 8, rounds: 2 }
    }
}

impl MapConfig {
    pub fn validate(&self) -> Result<(), MapError> {
        if !(2..=MAX_CUT_SIZE).contains(&self.k) {
            return Err(MapError::CutSize(self.k));
        }
        if self.cut_limit == 0 {
            return Err(MapError::CutLimit);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct MappingResult {
    /// Node implemented by each LUT, with the cut used, in netlist order.
    pub selected: Vec<(u32, Cut)>,
    pub lut_count: usize,
    pub mapped_depth: u32,
    pub netlist: LutNetwork,
}

pub fn map_depth(cn: &ChoiceNetwork, cfg: &MapConfig) -> Result<MappingResult, MapError> {
    map(cn, Mode::Delay, cfg)
}

pub fn map_area(cn: &ChoiceNetwork, cfg: &MapConfig) -> Result<MappingResult, MapError> {
    map(cn, Mode::Area, cfg)
}

/// Maps the outputs of `cn` into k-LUTs. With choices present, the cut sets
/// also receive the best cut of a choice-free enumeration, so the mapped
/// depth in delay mode never exceeds that of the plain subject.
pub fn map(cn: &ChoiceNetwork, mode: Mode, cfg: &MapConfig) -> Result<MappingResult, MapError> {
    cfg.validate()?;
    let floor = if cn.classes.is_empty() {
        None
    } else {
        let plain = ChoiceNetwork::plain(cn.net.clone());
        let base = enumerate_cuts(&plain, cfg.k, cfg.cut_limit, mode, None).ok_or(MapError::Cyclic)?;
        let floor: Vec<Option<Cut>> = (0..cn.net.node_count() as u32)
            .map(|n| if cn.net.is_and(n) { base.implementable(n).first().cloned() } else { None })
            .collect();
        Some(floor)
    };
    let cs = enumerate_cuts(cn, cfg.k, cfg.cut_limit, mode, floor.as_deref()).ok_or(MapError::Cyclic)?;
    let mut choice = vec![0usize; cn.net.node_count()];
    if mode == Mode::Area {
        refine_exact_area(cn, &cs, &mut choice, cfg.rounds);
    }
    Ok(build_netlist(cn, &cs, &choice))
}

/// Selected cut of `n` under the current choice vector.
fn chosen<'a>(cs: &'a CutSets, choice: &[usize], n: u32) -> &'a Cut {
    &cs.implementable(n)[choice[n as usize]]
}

struct AreaState<'a> {
    net: &'a AigNetwork,
    cs: &'a CutSets,
    refs: Vec<u32>,
}

impl AreaState<'_> {
    /// References the leaves of `leaves` and, recursively, the cuts of
    /// newly referenced nodes. Returns the number of LUTs this adds.
    fn reference(&mut self, leaves: &[u32], choice: &[usize]) -> u32 {
        let mut area = 0;
        let mut stack: Vec<u32> = leaves.to_vec();
        while let Some(l) = stack.pop() {
            if !self.net.is_and(l) {
                continue;
            }
            self.refs[l as usize] += 1;
            if self.refs[l as usize] == 1 {
                area += 1;
                stack.extend_from_slice(&chosen(self.cs, choice, l).leaves);
            }
        }
        area
    }

    fn dereference(&mut self, leaves: &[u32], choice: &[usize]) -> u32 {
        let mut area = 0;
        let mut stack: Vec<u32> = leaves.to_vec();
        while let Some(l) = stack.pop() {
            if !self.net.is_and(l) {
                continue;
            }
            self.refs[l as usize] -= 1;
            if self.refs[l as usize] == 0 {
                area += 1;
                stack.extend_from_slice(&chosen(self.cs, choice, l).leaves);
            }
        }
        area
    }
}

/// Exact-area passes: every node in the cover re-picks the cut that adds the
/// fewest LUTs given the rest of the cover. A pass never grows the cover.
fn refine_exact_area(cn: &ChoiceNetwork, cs: &CutSets, choice: &mut [usize], rounds: usize) {
    let net = &cn.net;
    let mut st = AreaState { net, cs, refs: vec![0; net.node_count()] };
    let drivers: Vec<u32> = net.outputs().iter().map(|o| o.index()).collect();
    st.reference(&drivers, choice);
    for _ in 0..rounds {
        for &n in cs.order() {
            if !net.is_and(n) || st.refs[n as usize] == 0 {
                continue;
            }
            let current = choice[n as usize];
            st.dereference(&cs.implementable(n)[current].leaves.clone(), choice);
            let mut best = (u32::MAX, u32::MAX, current);
            for (i, cut) in cs.implementable(n).iter().enumerate() {
                let a = st.reference(&cut.leaves, choice);
                st.dereference(&cut.leaves, choice);
                let key = (a, cut.depth, i);
                if (key.0, key.1) < (best.0, best.1) || ((key.0, key.1) == (best.0, best.1) && i == current) {
                    best = key;
                }
            }
            choice[n as usize] = best.2;
            st.reference(&cs.implementable(n)[best.2].leaves.clone(), choice);
        }
    }
}

fn build_netlist(cn: &ChoiceNetwork, cs: &CutSets, choice: &[usize]) -> MappingResult {
    let net = &cn.net;
    let mut required = vec![false; net.node_count()];
    let mut stack: Vec<u32> = net.outputs().iter().map(|o| o.index()).collect();
    while let Some(n) = stack.pop() {
        if !net.is_and(n) || std::mem::replace(&mut required[n as usize], true) {
            continue;
        }
        stack.extend_from_slice(&chosen(cs, choice, n).leaves);
    }
    let input_pos = {
        let mut pos = vec![u32::MAX; net.node_count()];
        for (i, &idx) in net.inputs().iter().enumerate() {
            pos[idx as usize] = i as u32;
        }
        pos
    };
    let mut lut_of = vec![u32::MAX; net.node_count()];
    let signal = |n: u32, lut_of: &[u32]| -> Signal {
        if n == 0 {
            Signal::Const(false)
        } else if net.is_input(n) {
            Signal::Input(input_pos[n as usize])
        } else {
            Signal::Lut(lut_of[n as usize])
        }
    };
    let mut netlist = LutNetwork { num_inputs: net.num_inputs(), ..Default::default() };
    let mut selected = Vec::new();
    for &n in cs.order() {
        if !required[n as usize] {
            continue;
        }
        let cut = chosen(cs, choice, n);
        let inputs = cut.leaves.iter().map(|&l| signal(l, &lut_of)).collect();
        lut_of[n as usize] = netlist.luts.len() as u32;
        netlist.luts.push(Lut { inputs, function: cut.function });
        selected.push((n, cut.clone()));
    }
    netlist.outputs = net.outputs().iter().map(|o| (signal(o.index(), &lut_of), o.is_complemented())).collect();
    MappingResult { selected, lut_count: netlist.lut_count(), mapped_depth: netlist.depth(), netlist }
}

/// Random words used when the subject is too wide for exhaustive checking
/// (1024 words = 65536 patterns).
pub const VERIFY_RANDOM_WORDS: usize = 1024;

/// Compares the mapped netlist against the subject: exhaustively up to 16
/// inputs, otherwise on 65536 random patterns.
pub fn verify_mapping(subject: &AigNetwork, result: &MappingResult, seed: u64) -> Result<Verdict, VerifyError> {
    if subject.num_inputs() <= MAX_EXHAUSTIVE_INPUTS {
        cec_exhaustive(subject, &result.netlist)
    } else {
        cec_random(subject, &result.netlist, VERIFY_RANDOM_WORDS, seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::choice::tests_support::balanced_choice_network;
    use crate::gen;

    fn cfg(k: usize) -> MapConfig {
        MapConfig { k, ..Default::default() }
    }

    #[test]
    fn chain8_depth() {
        let cn = ChoiceNetwork::plain(gen::and_chain(8));
        assert_eq!(map_depth(&cn, &cfg(6)).unwrap().mapped_depth, 2);
        assert_eq!(map_depth(&cn, &cfg(2)).unwrap().mapped_depth, 7);
    }

    #[test]
    fn balanced_choice_reduces_depth() {
        let cn = balanced_choice_network();
        let with = map_depth(&cn, &cfg(2)).unwrap();
        let without = map_depth(&ChoiceNetwork::plain(cn.net.clone()), &cfg(2)).unwrap();
        assert_eq!(with.mapped_depth, 3);
        assert_eq!(without.mapped_depth, 7);
        assert_eq!(verify_mapping(&gen::and_chain(8), &with, 0), Ok(Verdict::Equivalent));
    }

    #[test]
    fn single_and_is_one_lut() {
        let cn = ChoiceNetwork::plain(gen::and_chain(2));
        for mode in [Mode::Delay, Mode::Area] {
            let r = map(&cn, mode, &MapConfig::default()).unwrap();
            assert_eq!(r.lut_count, 1);
            assert_eq!(r.mapped_depth, 1);
        }
    }

    #[test]
    fn wire_and_constant_outputs() {
        let mut net = AigNetwork::with_inputs(2);
        let a = net.input(0);
        net.add_output(a);
        net.add_output(!a);
        net.add_output(crate::aig::NodeRef::TRUE);
        let r = map_depth(&ChoiceNetwork::plain(net.clone()), &MapConfig::default()).unwrap();
        assert_eq!(r.lut_count, 0);
        assert_eq!(verify_mapping(&net, &r, 0), Ok(Verdict::Equivalent));
    }

    #[test]
    fn corrupted_lut_is_caught() {
        let net = gen::ripple_adder(4);
        let mut r = map_area(&ChoiceNetwork::plain(net.clone()), &MapConfig::default()).unwrap();
        r.netlist.luts[0].function[0] ^= 1;
        assert!(verify_mapping(&net, &r, 0).unwrap().is_counterexample());
    }

    #[test]
    fn mappings_are_correct() {
        let nets =
            [gen::ripple_adder(6), gen::array_multiplier(4), gen::mux_tree(3), gen::random_network(14, 300, 6, 2)];
        for net in nets {
            for mode in [Mode::Delay, Mode::Area] {
                for k in [2, 4, 6, 8] {
                    let r = map(&ChoiceNetwork::plain(net.clone()), mode, &cfg(k)).unwrap();
                    assert_eq!(verify_mapping(&net, &r, 1), Ok(Verdict::Equivalent), "{mode} k={k}");
                    assert!(r.selected.iter().all(|(_, c)| c.leaves.len() <= k));
                }
            }
        }
    }

    #[test]
    fn refinement_does_not_grow_cover() {
        for seed in 0..8 {
            let net = gen::random_network(16, 400, 8, seed);
            let cn = ChoiceNetwork::plain(net);
            let r1 = map_area(&cn, &MapConfig { rounds: 1, ..Default::default() }).unwrap();
            let r3 = map_area(&cn, &MapConfig { rounds: 3, ..Default::default() }).unwrap();
            assert!(r3.lut_count <= r1.lut_count);
        }
    }

    #[test]
    fn bad_config_rejected() {
        let cn = ChoiceNetwork::plain(gen::and_chain(3));
        assert_eq!(map_depth(&cn, &cfg(1)).err(), Some(MapError::CutSize(1)));
        assert_eq!(map_depth(&cn, &cfg(9)).err(), Some(MapError::CutSize(9)));
        assert_eq!(map_depth(&cn, &MapConfig { cut_limit: 0, ..Default::default() }).err(), Some(MapError::CutLimit));
    }
}
