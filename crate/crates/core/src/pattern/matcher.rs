//! Thompson-style NFA compilation and simulation over coarse-tag sequences.

use crate::textpipe::CoarseTag;

use super::PatternAst;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edge {
    Eps,
    Tag(CoarseTag),
    /// Consumes one token of any tag.
    Any,
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    edge: Edge,
    to: usize,
}

/// Compiled finite-state matcher.
///
/// The accepted language is exactly the pattern's, except that the empty
/// sequence is always rejected: a candidate keyphrase must contain at least
/// one token. Immutable after compilation and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Matcher {
    transitions: Vec<Vec<Transition>>,
    start: usize,
    accept: usize,
}

impl Matcher {
    pub(super) fn compile(ast: &PatternAst) -> Matcher {
        let mut builder = Builder {
            transitions: Vec::new(),
        };
        let (start, accept) = builder.fragment(ast);
        Matcher {
            transitions: builder.transitions,
            start,
            accept,
        }
    }

    /// Does the matcher accept exactly this tag sequence?
    pub fn accepts(&self, tags: &[CoarseTag]) -> bool {
        !tags.is_empty() && self.longest_match_at(tags, 0) == Some(tags.len())
    }

    /// End index (exclusive) of the longest span starting at `start` whose
    /// tag sequence is accepted, or `None` if no non-empty span matches.
    pub fn longest_match_at(&self, tags: &[CoarseTag], start: usize) -> Option<usize> {
        let mut current = vec![false; self.transitions.len()];
        self.add_state(&mut current, self.start);

        let mut best = None;
        for (offset, &tag) in tags[start..].iter().enumerate() {
            let mut next = vec![false; self.transitions.len()];
            let mut any_live = false;
            for (state, &live) in current.iter().enumerate() {
                if !live {
                    continue;
                }
                for t in &self.transitions[state] {
                    let steps = match t.edge {
                        Edge::Tag(expected) if expected == tag => true,
                        Edge::Any => true,
                        _ => false,
                    };
                    if steps {
                        self.add_state(&mut next, t.to);
                        any_live = true;
                    }
                }
            }
            if !any_live {
                break;
            }
            if next[self.accept] {
                best = Some(start + offset + 1);
            }
            current = next;
        }
        best
    }

    /// Follow epsilon edges from `state`, marking everything reachable.
    fn add_state(&self, set: &mut [bool], state: usize) {
        if set[state] {
            return;
        }
        set[state] = true;
        for t in &self.transitions[state] {
            if t.edge == Edge::Eps {
                self.add_state(set, t.to);
            }
        }
    }

    pub fn state_count(&self) -> usize {
        self.transitions.len()
    }
}

struct Builder {
    transitions: Vec<Vec<Transition>>,
}

impl Builder {
    fn state(&mut self) -> usize {
        self.transitions.push(Vec::new());
        self.transitions.len() - 1
    }

    fn edge(&mut self, from: usize, edge: Edge, to: usize) {
        self.transitions[from].push(Transition { edge, to });
    }

    /// Build a fragment for `ast`, returning (start, accept).
    fn fragment(&mut self, ast: &PatternAst) -> (usize, usize) {
        match ast {
            PatternAst::Literal(tag) => {
                let s = self.state();
                let e = self.state();
                self.edge(s, Edge::Tag(*tag), e);
                (s, e)
            }
            PatternAst::Wildcard => {
                // One or more arbitrary tags.
                let s = self.state();
                let e = self.state();
                self.edge(s, Edge::Any, e);
                self.edge(e, Edge::Any, e);
                (s, e)
            }
            PatternAst::Concat(parts) => {
                debug_assert!(!parts.is_empty());
                let mut iter = parts.iter();
                let (start, mut end) = self.fragment(iter.next().expect("non-empty concat"));
                for part in iter {
                    let (s, e) = self.fragment(part);
                    self.edge(end, Edge::Eps, s);
                    end = e;
                }
                (start, end)
            }
            PatternAst::Alternation(branches) => {
                let s = self.state();
                let e = self.state();
                for branch in branches {
                    let (bs, be) = self.fragment(branch);
                    self.edge(s, Edge::Eps, bs);
                    self.edge(be, Edge::Eps, e);
                }
                (s, e)
            }
            PatternAst::Repeat(child, min, max) => {
                let s = self.state();
                let mut end = s;
                for _ in 0..*min {
                    let (cs, ce) = self.fragment(child);
                    self.edge(end, Edge::Eps, cs);
                    end = ce;
                }
                match max {
                    None => {
                        // Kleene closure over one more copy.
                        let (cs, ce) = self.fragment(child);
                        let out = self.state();
                        self.edge(end, Edge::Eps, cs);
                        self.edge(end, Edge::Eps, out);
                        self.edge(ce, Edge::Eps, cs);
                        self.edge(ce, Edge::Eps, out);
                        (s, out)
                    }
                    Some(max) => {
                        let out = self.state();
                        self.edge(end, Edge::Eps, out);
                        for _ in *min..*max {
                            let (cs, ce) = self.fragment(child);
                            self.edge(end, Edge::Eps, cs);
                            self.edge(ce, Edge::Eps, out);
                            end = ce;
                        }
                        (s, out)
                    }
                }
            }
        }
    }
}
