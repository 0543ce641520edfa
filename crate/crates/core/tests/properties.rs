use std::collections::{BTreeSet, HashMap};

use aigchoice::aig::{compute_fanout, parse_aiger, write_aiger, AigNetwork, NodeRef};
use aigchoice::choice::{
    build_choice_network, parse_choice_aiger, remove_bad_choices, validate_choice_network, write_choice_aiger,
    ChoiceNetwork,
};
use aigchoice::cone::{extract_cone_aig, mffc_cone_supp, select_representative_cones, SelectionConfig};
use aigchoice::gen;
use aigchoice::mapper::{enumerate_cuts, map, map_area, parse_blif, write_blif, MapConfig};
use aigchoice::mutate::{
    cone_to_term, default_rules, extract_variants, generate_candidates, saturate, EGraph, MutateConfig,
    SaturationLimits,
};
use aigchoice::rank::{and_disparity, pearson, pearson_dissimilarity, sim_dissimilarity};
use aigchoice::verify::{cec_exhaustive, Verdict};
use aigchoice::Mode;
use proptest::prelude::*;

fn small_net() -> impl Strategy<Value = AigNetwork> {
    (2usize..10, 1usize..60, 1usize..4, any::<u64>()).prop_map(|(ni, na, no, s)| gen::random_network(ni, na, no, s))
}

fn choice_net(mode: Mode) -> impl Strategy<Value = ChoiceNetwork> {
    (4usize..12, 20usize..120, any::<u64>()).prop_map(move |(ni, na, s)| {
        let net = gen::random_network(ni, na, 3, s).cleanup();
        let sel = SelectionConfig { mode, thresholds: vec![12, 6, 3], ..SelectionConfig::default() };
        let selections: Vec<_> = select_representative_cones(&net, &sel)
            .into_iter()
            .map(|c| {
                let rc = extract_cone_aig(&net, &c).unwrap();
                let pool = generate_candidates(&rc, mode, 4, s, &MutateConfig::default()).unwrap();
                (c, pool)
            })
            .collect();
        build_choice_network(&net, &selections).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dissimilarities_are_bounded_and_zero_on_self(a in small_net(), s in any::<u64>()) {
        let b = gen::random_network(a.num_inputs(), 1 + (s % 50) as usize, 2, s);
        let x = sim_dissimilarity(&a, &b, 4, s).unwrap();
        let y = and_disparity(&a, &b);
        let (z, _) = pearson_dissimilarity(&a, &b);
        for v in [x, y, z] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert_eq!(sim_dissimilarity(&a, &a, 4, s).unwrap(), 0.0);
        prop_assert_eq!(and_disparity(&a, &a), 0.0);
        prop_assert_eq!(pearson_dissimilarity(&a, &a).0, 0.0);
        prop_assert_eq!(and_disparity(&a, &b), and_disparity(&b, &a));
    }

    #[test]
    fn pearson_is_affine_invariant(
        xs in prop::collection::vec(-100.0f64..100.0, 3..30),
        scale in 0.1f64..10.0,
        shift in -50.0f64..50.0,
    ) {
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + (i as f64).sin()).collect();
        let moved: Vec<f64> = xs.iter().map(|x| x * scale + shift).collect();
        if let (Some(r1), Some(r2)) = (pearson(&xs, &ys), pearson(&moved, &ys)) {
            prop_assert!((r1 - r2).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r1));
        }
    }

    #[test]
    fn mffc_agrees_with_reachability(net in small_net()) {
        let net = net.cleanup();
        let fo = compute_fanout(&net);
        let po: BTreeSet<u32> = net.outputs().iter().map(|o| o.index()).collect();
        let mut fanouts: HashMap<u32, Vec<u32>> = HashMap::new();
        for idx in net.and_nodes() {
            let (a, b) = net.fanins(idx).unwrap();
            fanouts.entry(a.index()).or_default().push(idx);
            fanouts.entry(b.index()).or_default().push(idx);
        }
        for root in net.and_nodes() {
            let (internal, _) = mffc_cone_supp(&net, &fo, root);
            // v belongs iff it is an AND in the fanin cone that cannot reach
            // an output around the root
            let mut escapes = vec![false; net.node_count()];
            for v in (0..net.node_count() as u32).rev() {
                if v != root {
                    escapes[v as usize] = po.contains(&v)
                        || fanouts.get(&v).is_some_and(|f| f.iter().any(|&w| w != root && escapes[w as usize]));
                }
            }
            let mut tfi = BTreeSet::new();
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                if net.is_and(v) && tfi.insert(v) {
                    let (a, b) = net.fanins(v).unwrap();
                    stack.extend([a.index(), b.index()]);
                }
            }
            let expected: Vec<u32> = tfi.into_iter().filter(|&v| v == root || !escapes[v as usize]).collect();
            prop_assert_eq!(internal, expected);
        }
    }

    #[test]
    fn aiger_round_trip(net in small_net(), ascii in any::<bool>()) {
        let back = parse_aiger(&write_aiger(&net, ascii)).unwrap();
        prop_assert!(back.structurally_equal(&net));
    }

    #[test]
    fn saturation_preserves_function(ni in 2usize..8, s in any::<u64>()) {
        let rc = gen::random_tree(ni, s);
        let term = cone_to_term(&rc).unwrap();
        let mut eg = EGraph::new();
        let root = eg.add_term(&term).unwrap();
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        for mode in [Mode::Delay, Mode::Area] {
            for v in extract_variants(&eg, root, ni, mode, 4, s).unwrap() {
                prop_assert_eq!(cec_exhaustive(&rc, &v.net), Ok(Verdict::Equivalent));
            }
        }
    }

    #[test]
    fn filtered_choice_networks_are_valid(cn in choice_net(Mode::Delay)) {
        let filtered = remove_bad_choices(&cn);
        prop_assert!(validate_choice_network(&filtered, 1).is_valid());
        let again = remove_bad_choices(&filtered);
        prop_assert!(again.net.structurally_equal(&filtered.net));
        prop_assert_eq!(&again.classes, &filtered.classes);
    }

    #[test]
    fn choice_aiger_round_trip(cn in choice_net(Mode::Area)) {
        let cn = remove_bad_choices(&cn);
        let back = parse_choice_aiger(&write_choice_aiger(&cn, false)).unwrap();
        prop_assert_eq!(&back.classes, &cn.classes);
        prop_assert!(back.net.structurally_equal(&cn.net));
    }

    #[test]
    fn choices_never_deepen_mapping(cn in choice_net(Mode::Delay), k in 2usize..7) {
        let cn = remove_bad_choices(&cn);
        let cfg = MapConfig { k, ..MapConfig::default() };
        let with = map(&cn, Mode::Delay, &cfg).unwrap();
        let without = map(&ChoiceNetwork::plain(cn.net.clone()), Mode::Delay, &cfg).unwrap();
        prop_assert!(with.mapped_depth <= without.mapped_depth);
        prop_assert_eq!(cec_exhaustive(&cn.net, &with.netlist), Ok(Verdict::Equivalent));
        for (_, cut) in &with.selected {
            prop_assert!(cut.leaves.len() <= k);
        }
    }

    #[test]
    fn blif_round_trip(net in small_net(), area in any::<bool>()) {
        let mode = if area { Mode::Area } else { Mode::Delay };
        let r = map(&ChoiceNetwork::plain(net.clone()), mode, &MapConfig::default()).unwrap();
        let back = parse_blif(&write_blif(&r.netlist, "p")).unwrap();
        prop_assert_eq!(cec_exhaustive(&net, &back), Ok(Verdict::Equivalent));
    }

    #[test]
    fn tree_area_cover_is_minimal(ni in 2usize..14, s in any::<u64>(), k in 2usize..7) {
        let net = gen::random_tree(ni, s);
        let cfg = MapConfig { k, cut_limit: 10_000, rounds: 2 };
        let r = map_area(&ChoiceNetwork::plain(net.clone()), &cfg).unwrap();
        prop_assert_eq!(r.lut_count, min_tree_cover(&net, k));
    }

    #[test]
    fn union_contains_choice_free_cuts(cn in choice_net(Mode::Delay)) {
        let cn = remove_bad_choices(&cn);
        let big = 100_000;
        let with = enumerate_cuts(&cn, 4, big, Mode::Delay, None).unwrap();
        let without = enumerate_cuts(&ChoiceNetwork::plain(cn.net.clone()), 4, big, Mode::Delay, None).unwrap();
        for c in &cn.classes {
            let r = c.representative;
            let have: BTreeSet<&Vec<u32>> = with.cuts(r).iter().map(|c| &c.leaves).collect();
            for cut in without.cuts(r) {
                // a missing cut must be dominated by a kept subset
                prop_assert!(have.contains(&cut.leaves)
                    || have.iter().any(|h| h.iter().all(|l| cut.leaves.contains(l))));
            }
        }
    }
}

/// Minimum number of k-LUTs covering a tree, by complete cut enumeration
/// and dynamic programming over subtrees.
fn min_tree_cover(net: &AigNetwork, k: usize) -> usize {
    let mut cuts: HashMap<u32, Vec<BTreeSet<u32>>> = HashMap::new();
    let mut best: HashMap<u32, usize> = HashMap::new();
    for n in net.and_nodes() {
        let (a, b) = net.fanins(n).unwrap();
        let side = |x: NodeRef, cuts: &HashMap<u32, Vec<BTreeSet<u32>>>| -> Vec<BTreeSet<u32>> {
            let mut v = cuts.get(&x.index()).cloned().unwrap_or_default();
            v.push(BTreeSet::from([x.index()]));
            v
        };
        let mut mine = Vec::new();
        for ca in side(a, &cuts) {
            for cb in side(b, &cuts) {
                let u: BTreeSet<u32> = ca.union(&cb).copied().collect();
                if u.len() <= k && !mine.contains(&u) {
                    mine.push(u);
                }
            }
        }
        let cost =
            mine.iter().map(|c| 1 + c.iter().map(|l| best.get(l).copied().unwrap_or(0)).sum::<usize>()).min().unwrap();
        best.insert(n, cost);
        cuts.insert(n, mine);
    }
    net.outputs().iter().map(|o| best.get(&o.index()).copied().unwrap_or(0)).sum()
}
