//! Rewrite rules, pattern matching and the saturation loop.

use std::time::{Duration, Instant};

use thiserror::Error;

use super::egraph::{EGraph, ENode, Id};
use crate::aig::var_word;

/// Pattern variables per rule; enough for every associativity-style rule.
pub const MAX_PATTERN_VARS: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("pattern `{0}`: {1}")]
    Parse(String, &'static str),
    #[error("rule {0}: right-hand side uses a variable not bound by the left-hand side")]
    UnboundVariable(String),
    #[error("rule {0}: left-hand side must not be a bare variable")]
    BareVariable(String),
    #[error("rule {0}: more than {MAX_PATTERN_VARS} pattern variables")]
    TooManyVariables(String),
    #[error("rule {0}: sides differ under assignment {1:#b}")]
    NotEquivalent(String, usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum PNode {
    Var(usize),
    False,
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
}

/// A term pattern; the last node is the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    nodes: Vec<PNode>,
}

type Subst = [Option<Id>; MAX_PATTERN_VARS];

impl Pattern {
    fn root(&self) -> usize {
        self.nodes.len() - 1
    }

    fn eval(&self, at: usize, vars: &[u64]) -> u64 {
        match self.nodes[at] {
            PNode::Var(v) => vars[v],
            PNode::False => 0,
            PNode::Not(a) => !self.eval(a, vars),
            PNode::And(a, b) => self.eval(a, vars) & self.eval(b, vars),
            PNode::Or(a, b) => self.eval(a, vars) | self.eval(b, vars),
        }
    }

    fn vars(&self) -> Vec<usize> {
        let mut v: Vec<usize> =
            self.nodes.iter().filter_map(|n| if let PNode::Var(i) = n { Some(*i) } else { None }).collect();
        v.sort_unstable();
        v.dedup();
        v
    }

    /// All substitutions under which the pattern matches class `id`,
    /// stopping once more than `limit` are found.
    fn search(&self, eg: &EGraph, id: Id, limit: usize, out: &mut Vec<(Id, Subst)>) {
        let found = self.match_at(eg, self.root(), id, vec![[None; MAX_PATTERN_VARS]], limit);
        out.extend(found.into_iter().map(|s| (id, s)));
    }

    fn match_at(&self, eg: &EGraph, at: usize, id: Id, substs: Vec<Subst>, limit: usize) -> Vec<Subst> {
        if substs.is_empty() {
            return substs;
        }
        let id = eg.find(id);
        match self.nodes[at] {
            PNode::Var(v) => substs
                .into_iter()
                .filter_map(|mut s| match s[v] {
                    None => {
                        s[v] = Some(id);
                        Some(s)
                    }
                    Some(x) => (eg.find(x) == id).then_some(s),
                })
                .collect(),
            PNode::False => {
                if eg.nodes(id).contains(&ENode::False) {
                    substs
                } else {
                    Vec::new()
                }
            }
            PNode::Not(p) => {
                let mut res = Vec::new();
                for n in eg.nodes(id) {
                    if let ENode::Not(c) = *n {
                        res.extend(self.match_at(eg, p, c, substs.clone(), limit));
                        if res.len() > limit {
                            break;
                        }
                    }
                }
                res
            }
            PNode::And(p, q) | PNode::Or(p, q) => {
                let want_and = matches!(self.nodes[at], PNode::And(..));
                let mut res = Vec::new();
                for n in eg.nodes(id) {
                    let kids = match (*n, want_and) {
                        (ENode::And(k), true) | (ENode::Or(k), false) => k,
                        _ => continue,
                    };
                    let left = self.match_at(eg, p, kids[0], substs.clone(), limit);
                    res.extend(self.match_at(eg, q, kids[1], left, limit));
                    if res.len() > limit {
                        break;
                    }
                }
                res
            }
        }
    }

    fn instantiate(&self, eg: &mut EGraph, at: usize, subst: &Subst) -> Id {
        match self.nodes[at] {
            PNode::Var(v) => subst[v].expect("rhs variables are bound by the lhs"),
            PNode::False => eg.add(ENode::False),
            PNode::Not(a) => {
                let a = self.instantiate(eg, a, subst);
                eg.add(ENode::Not(a))
            }
            PNode::And(a, b) => {
                let (a, b) = (self.instantiate(eg, a, subst), self.instantiate(eg, b, subst));
                eg.add(ENode::And([a, b]))
            }
            PNode::Or(a, b) => {
                let (a, b) = (self.instantiate(eg, a, subst), self.instantiate(eg, b, subst));
                eg.add(ENode::Or([a, b]))
            }
        }
    }
}

/// Parses `(& ?a (! ?b))`-style patterns. Operators: `&`, `|`, `!`; the
/// constant false is `0`. Variable names map to slots in order of first use
/// through the shared `names` table.
fn parse_pattern(src: &str, names: &mut Vec<String>) -> Result<Pattern, RuleError> {
    let err = |m| RuleError::Parse(src.to_string(), m);
    let spaced = src.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut nodes = Vec::new();
    let mut pos = 0;
    fn go(
        tokens: &[&str],
        pos: &mut usize,
        nodes: &mut Vec<PNode>,
        names: &mut Vec<String>,
    ) -> Result<usize, &'static str> {
        let tok = *tokens.get(*pos).ok_or("unexpected end")?;
        *pos += 1;
        let node = match tok {
            "(" => {
                let op = *tokens.get(*pos).ok_or("missing operator")?;
                *pos += 1;
                let mut args = Vec::new();
                while tokens.get(*pos) != Some(&")") {
                    if *pos >= tokens.len() {
                        return Err("unbalanced parentheses");
                    }
                    args.push(go(tokens, pos, nodes, names)?);
                }
                *pos += 1;
                match (op, args.as_slice()) {
                    ("!", [a]) => PNode::Not(*a),
                    ("&", [a, b]) => PNode::And(*a, *b),
                    ("|", [a, b]) => PNode::Or(*a, *b),
                    _ => return Err("bad operator or arity"),
                }
            }
            "0" => PNode::False,
            v if v.starts_with('?') && v.len() > 1 => {
                let slot = match names.iter().position(|n| n == v) {
                    Some(i) => i,
                    None => {
                        names.push(v.to_string());
                        names.len() - 1
                    }
                };
                PNode::Var(slot)
            }
            _ => return Err("unexpected token"),
        };
        nodes.push(node);
        Ok(nodes.len() - 1)
    }
    go(&tokens, &mut pos, &mut nodes, names).map_err(err)?;
    if pos != tokens.len() {
        return Err(err("trailing tokens"));
    }
    Ok(Pattern { nodes })
}

/// A validated, one-directional rewrite.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    name: String,
    lhs: Pattern,
    rhs: Pattern,
}

impl RewriteRule {
    /// Parses both sides and checks them for equivalence over all `2^vars`
    /// assignments.
    pub fn new(name: &str, lhs: &str, rhs: &str) -> Result<Self, RuleError> {
        let mut names = Vec::new();
        let lhs = parse_pattern(lhs, &mut names)?;
        let lhs_vars = names.len();
        let rhs = parse_pattern(rhs, &mut names)?;
        if names.len() > lhs_vars {
            return Err(RuleError::UnboundVariable(name.to_string()));
        }
        if names.len() > MAX_PATTERN_VARS {
            return Err(RuleError::TooManyVariables(name.to_string()));
        }
        if matches!(lhs.nodes[lhs.root()], PNode::Var(_)) {
            return Err(RuleError::BareVariable(name.to_string()));
        }
        let vars: Vec<u64> = (0..MAX_PATTERN_VARS).map(|i| var_word(i, 0)).collect();
        let diff = lhs.eval(lhs.root(), &vars) ^ rhs.eval(rhs.root(), &vars);
        let mask = (1u64 << (1 << names.len())) - 1;
        if diff & mask != 0 {
            return Err(RuleError::NotEquivalent(name.to_string(), (diff & mask).trailing_zeros() as usize));
        }
        debug_assert!(rhs.vars().iter().all(|v| lhs.vars().contains(v)));
        Ok(RewriteRule { name: name.to_string(), lhs, rhs })
    }

    /// Both directions of an equation.
    pub fn bidirectional(name: &str, a: &str, b: &str) -> Result<[Self; 2], RuleError> {
        Ok([RewriteRule::new(&format!("{name}-l"), a, b)?, RewriteRule::new(&format!("{name}-r"), b, a)?])
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// The default rule set: AND/OR commutativity and associativity, double
/// negation, idempotence, complement annihilation, constants and De Morgan
/// in both directions. Distributivity is left out since it grows terms.
pub fn default_rules() -> Vec<RewriteRule> {
    let mut rules = Vec::new();
    let mut one = |n: &str, l: &str, r: &str| rules.push(RewriteRule::new(n, l, r).expect("built-in rule"));
    one("and-comm", "(& ?a ?b)", "(& ?b ?a)");
    one("or-comm", "(| ?a ?b)", "(| ?b ?a)");
    one("double-neg", "(! (! ?a))", "?a");
    one("and-idem", "(& ?a ?a)", "?a");
    one("or-idem", "(| ?a ?a)", "?a");
    one("and-compl", "(& ?a (! ?a))", "0");
    one("or-compl", "(| ?a (! ?a))", "(! 0)");
    one("and-false", "(& ?a 0)", "0");
    one("and-true", "(& ?a (! 0))", "?a");
    one("or-false", "(| ?a 0)", "?a");
    one("or-true", "(| ?a (! 0))", "(! 0)");
    for pair in [
        RewriteRule::bidirectional("and-assoc", "(& ?a (& ?b ?c))", "(& (& ?a ?b) ?c)"),
        RewriteRule::bidirectional("or-assoc", "(| ?a (| ?b ?c))", "(| (| ?a ?b) ?c)"),
        RewriteRule::bidirectional("de-morgan-and", "(! (& ?a ?b))", "(| (! ?a) (! ?b))"),
        RewriteRule::bidirectional("de-morgan-or", "(! (| ?a ?b))", "(& (! ?a) (! ?b))"),
    ] {
        rules.extend(pair.expect("built-in rule"));
    }
    rules
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("saturation limits must be positive")]
pub struct LimitsError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationLimits {
    pub max_iterations: usize,
    pub max_enodes: usize,
    pub time_budget: Duration,
}

impl Default for SaturationLimits {
    fn default() -> Self {
        SaturationLimits { max_iterations: 8, max_enodes: 50_000, time_budget: Duration::from_secs(5) }
    }
}

impl SaturationLimits {
    pub fn validate(&self) -> Result<(), LimitsError> {
        if self.max_iterations == 0 || self.max_enodes == 0 || self.time_budget.is_zero() {
            return Err(LimitsError);
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Saturated,
    IterationLimit,
    NodeLimit,
    TimeLimit,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SaturationReport {
    pub iterations: usize,
    pub stop_reason: StopReason,
    pub num_nodes: usize,
    pub num_classes: usize,
}

/// Base match budget per rule and iteration; doubled after every ban.
const MATCH_LIMIT: usize = 1000;
/// Base ban length in iterations; doubled after every ban.
const BAN_LENGTH: usize = 5;

#[derive(Clone, Copy, Default)]
struct RuleStats {
    times_banned: u32,
    banned_until: usize,
}

/// Applies `rules` until fixpoint or a limit is hit. Rules that match too
/// often are banned for a while with exponential backoff, so the cheap
/// rules keep firing when associativity explodes.
pub fn saturate(eg: &mut EGraph, rules: &[RewriteRule], limits: &SaturationLimits) -> SaturationReport {
    let start = Instant::now();
    let mut stats = vec![RuleStats::default(); rules.len()];
    eg.rebuild();
    let mut stop = StopReason::IterationLimit;
    let mut iterations = 0;
    'outer: for iter in 0..limits.max_iterations {
        if start.elapsed() >= limits.time_budget {
            stop = StopReason::TimeLimit;
            break;
        }
        iterations = iter + 1;
        let classes = eg.class_ids();
        let mut any_banned = false;
        let mut all_matches: Vec<(usize, Vec<(Id, Subst)>)> = Vec::new();
        for (ri, rule) in rules.iter().enumerate() {
            let st = &mut stats[ri];
            if iter < st.banned_until {
                any_banned = true;
                continue;
            }
            let threshold = MATCH_LIMIT << st.times_banned;
            let mut matches = Vec::new();
            for &c in &classes {
                rule.lhs.search(eg, c, threshold, &mut matches);
                if matches.len() > threshold {
                    break;
                }
            }
            if matches.len() > threshold {
                st.banned_until = iter + (BAN_LENGTH << st.times_banned);
                st.times_banned += 1;
                any_banned = true;
                continue;
            }
            all_matches.push((ri, matches));
            if start.elapsed() >= limits.time_budget {
                stop = StopReason::TimeLimit;
                break 'outer;
            }
        }

        let nodes_before = eg.num_nodes();
        let mut changed = false;
        for (ri, matches) in &all_matches {
            let rule = &rules[*ri];
            for (class, subst) in matches {
                let new = rule.rhs.instantiate(eg, rule.rhs.root(), subst);
                changed |= eg.union(*class, new);
                if eg.num_nodes() > limits.max_enodes {
                    eg.rebuild();
                    stop = StopReason::NodeLimit;
                    break 'outer;
                }
            }
        }
        eg.rebuild();
        if eg.num_nodes() > limits.max_enodes {
            stop = StopReason::NodeLimit;
            break;
        }
        if !changed && eg.num_nodes() == nodes_before && !any_banned {
            stop = StopReason::Saturated;
            break;
        }
    }
    SaturationReport { iterations, stop_reason: stop, num_nodes: eg.num_nodes(), num_classes: eg.num_classes() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_rules_validate() {
        let rules = default_rules();
        assert_eq!(rules.len(), 19);
        let mut names: Vec<&str> = rules.iter().map(|r| r.name()).collect();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), rules.len());
    }

    #[test]
    fn unsound_rules_rejected() {
        assert!(matches!(RewriteRule::new("bad", "(& ?a ?b)", "(| ?a ?b)"), Err(RuleError::NotEquivalent(..))));
        assert!(matches!(RewriteRule::new("bad", "(& ?a ?a)", "?b"), Err(RuleError::UnboundVariable(_))));
        assert!(matches!(RewriteRule::new("bad", "?a", "(& ?a ?a)"), Err(RuleError::BareVariable(_))));
        assert!(matches!(RewriteRule::new("bad", "(& ?a", "?a"), Err(RuleError::Parse(..))));
        assert!(matches!(RewriteRule::new("bad", "(^ ?a ?b)", "?a"), Err(RuleError::Parse(..))));
    }

    #[test]
    fn distributivity_is_sound_but_not_default() {
        assert!(RewriteRule::new("dist", "(& ?a (| ?b ?c))", "(| (& ?a ?b) (& ?a ?c))").is_ok());
        assert!(default_rules().iter().all(|r| !r.name().starts_with("dist")));
    }

    #[test]
    fn commutativity_merges_orderings() {
        let mut eg = EGraph::new();
        let a = eg.add(ENode::Var(0));
        let b = eg.add(ENode::Var(1));
        let ab = eg.add(ENode::And([a, b]));
        let rules = vec![RewriteRule::new("and-comm", "(& ?a ?b)", "(& ?b ?a)").unwrap()];
        let rep = saturate(&mut eg, &rules, &SaturationLimits::default());
        assert_eq!(rep.stop_reason, StopReason::Saturated);
        assert_eq!(eg.lookup(&ENode::And([b, a])), Some(eg.find(ab)));
    }

    #[test]
    fn idempotence_and_associativity_collapse() {
        // AND(a, AND(a, b)) == AND(a, b)
        let mut eg = EGraph::new();
        let a = eg.add(ENode::Var(0));
        let b = eg.add(ENode::Var(1));
        let ab = eg.add(ENode::And([a, b]));
        let root = eg.add(ENode::And([a, ab]));
        saturate(&mut eg, &default_rules(), &SaturationLimits::default());
        assert_eq!(eg.find(root), eg.find(ab));
    }

    #[test]
    fn node_limit_stops_saturation() {
        let mut eg = EGraph::new();
        let mut acc = eg.add(ENode::Var(0));
        for i in 1..12 {
            let v = eg.add(ENode::Var(i));
            acc = eg.add(ENode::And([acc, v]));
        }
        let limits = SaturationLimits { max_enodes: 500, ..Default::default() };
        let rep = saturate(&mut eg, &default_rules(), &limits);
        assert_eq!(rep.stop_reason, StopReason::NodeLimit);
        assert!(eg.nodes(acc).len() > 1);
    }

    #[test]
    fn limits_validation() {
        assert!(SaturationLimits::default().validate().is_ok());
        assert!(SaturationLimits { max_iterations: 0, ..Default::default() }.validate().is_err());
    }
}
