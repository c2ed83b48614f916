//! Boykov-Kolmogorov augmenting-path max-flow.
//!
//! Two search trees grow from the terminals and are reused between
//! augmentations; orphans created by saturation are re-adopted instead of
//! rebuilding the trees. This is the solver class that performs best on
//! the 4-connected grids produced by seam search.

use std::collections::VecDeque;

const NONE: u32 = u32::MAX;
const TERMINAL: u32 = u32::MAX - 1;
const ORPHAN: u32 = u32::MAX - 2;
const INFINITE_DIST: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Segment {
    Source,
    Sink,
}

#[derive(Clone)]
struct Node {
    first: u32,
    /// Arc toward the parent, or one of NONE / TERMINAL / ORPHAN.
    parent: u32,
    ts: u32,
    dist: u32,
    is_sink: bool,
    active: bool,
    /// Positive: residual capacity from the source; negative: to the sink.
    tr_cap: f64,
}

#[derive(Clone)]
struct Arc {
    head: u32,
    next: u32,
    r_cap: f64,
}

/// Directed graph with two implicit terminals.
pub struct Graph {
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
    flow: f64,
    time: u32,
    active: VecDeque<u32>,
    orphans: VecDeque<u32>,
}

#[inline]
fn sister(a: u32) -> u32 {
    a ^ 1
}

impl Graph {
    pub fn new(node_count: usize) -> Self {
        let node = Node {
            first: NONE,
            parent: NONE,
            ts: 0,
            dist: 0,
            is_sink: false,
            active: false,
            tr_cap: 0.0,
        };
        Self {
            nodes: vec![node; node_count],
            arcs: Vec::new(),
            flow: 0.0,
            time: 0,
            active: VecDeque::new(),
            orphans: VecDeque::new(),
        }
    }

    pub fn with_edge_capacity(node_count: usize, edges: usize) -> Self {
        let mut g = Self::new(node_count);
        g.arcs.reserve(2 * edges);
        g
    }

    /// Adds the arc pair `i -> j` (capacity `cap`) and `j -> i` (`rev_cap`).
    pub fn add_edge(&mut self, i: usize, j: usize, cap: f64, rev_cap: f64) {
        debug_assert!(cap >= 0.0 && rev_cap >= 0.0);
        let a = self.arcs.len() as u32;
        self.arcs.push(Arc { head: j as u32, next: self.nodes[i].first, r_cap: cap });
        self.nodes[i].first = a;
        self.arcs.push(Arc { head: i as u32, next: self.nodes[j].first, r_cap: rev_cap });
        self.nodes[j].first = a + 1;
    }

    /// Adds terminal capacities; either may be infinite.
    pub fn add_tweights(&mut self, i: usize, cap_source: f64, cap_sink: f64) {
        let n = &mut self.nodes[i];
        let delta = n.tr_cap;
        let (mut s, mut t) = (cap_source, cap_sink);
        if delta > 0.0 {
            s += delta;
        } else {
            t -= delta;
        }
        if s.is_infinite() || t.is_infinite() {
            // Flow through a node tied to both terminals with infinite
            // capacity is unbounded; callers never do this.
            debug_assert!(!(s.is_infinite() && t.is_infinite()));
            n.tr_cap = if s.is_infinite() { f64::INFINITY } else { f64::NEG_INFINITY };
            self.flow += if s.is_infinite() { t } else { s };
            return;
        }
        self.flow += s.min(t);
        n.tr_cap = s - t;
    }

    pub fn flow(&self) -> f64 {
        self.flow
    }

    /// Which side of the minimum cut a node ended on. Nodes not reachable
    /// from the source in the residual graph report `Sink`.
    pub fn segment(&self, i: usize) -> Segment {
        let n = &self.nodes[i];
        if n.parent != NONE && !n.is_sink {
            Segment::Source
        } else {
            Segment::Sink
        }
    }

    fn set_active(&mut self, i: u32) {
        let n = &mut self.nodes[i as usize];
        if !n.active {
            n.active = true;
            self.active.push_back(i);
        }
    }

    fn next_active(&mut self) -> Option<u32> {
        while let Some(i) = self.active.pop_front() {
            let n = &mut self.nodes[i as usize];
            n.active = false;
            if n.parent != NONE {
                return Some(i);
            }
        }
        None
    }

    fn set_orphan_front(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_front(i);
    }

    fn set_orphan_rear(&mut self, i: u32) {
        self.nodes[i as usize].parent = ORPHAN;
        self.orphans.push_back(i);
    }

    /// Runs the solver and returns the max-flow value.
    pub fn maxflow(&mut self) -> f64 {
        self.active.clear();
        for i in 0..self.nodes.len() {
            let n = &mut self.nodes[i];
            n.active = false;
            n.ts = 0;
            if n.tr_cap != 0.0 {
                n.is_sink = n.tr_cap < 0.0;
                n.parent = TERMINAL;
                n.dist = 1;
                self.set_active(i as u32);
            } else {
                n.parent = NONE;
            }
        }
        self.time = 0;

        let mut current: Option<u32> = None;
        loop {
            let i = match current.take() {
                Some(i) if self.nodes[i as usize].parent != NONE => i,
                _ => match self.next_active() {
                    Some(i) => i,
                    None => break,
                },
            };

            let middle = self.grow(i);
            self.time += 1;
            if let Some(a) = middle {
                // Keep growing from the same node after the augmentation.
                current = Some(i);
                self.augment(a);
                while let Some(o) = self.orphans.pop_front() {
                    if self.nodes[o as usize].is_sink {
                        self.process_sink_orphan(o);
                    } else {
                        self.process_source_orphan(o);
                    }
                }
            }
        }
        self.flow
    }

    /// Expands the tree of `i`; returns an arc from the source tree to the
    /// sink tree if the trees touch.
    fn grow(&mut self, i: u32) -> Option<u32> {
        let (i_sink, i_ts, i_dist) = {
            let n = &self.nodes[i as usize];
            (n.is_sink, n.ts, n.dist)
        };
        let mut a = self.nodes[i as usize].first;
        while a != NONE {
            let residual = if i_sink { self.arcs[sister(a) as usize].r_cap } else { self.arcs[a as usize].r_cap };
            if residual > 0.0 {
                let j = self.arcs[a as usize].head;
                let nj = &self.nodes[j as usize];
                if nj.parent == NONE {
                    let nj = &mut self.nodes[j as usize];
                    nj.is_sink = i_sink;
                    nj.parent = sister(a);
                    nj.ts = i_ts;
                    nj.dist = i_dist + 1;
                    self.set_active(j);
                } else if nj.is_sink != i_sink {
                    return Some(if i_sink { sister(a) } else { a });
                } else if nj.ts <= i_ts && nj.dist > i_dist {
                    let nj = &mut self.nodes[j as usize];
                    nj.parent = sister(a);
                    nj.ts = i_ts;
                    nj.dist = i_dist + 1;
                }
            }
            a = self.arcs[a as usize].next;
        }
        None
    }

    fn augment(&mut self, middle: u32) {
        let mut bottleneck = self.arcs[middle as usize].r_cap;

        // Source side: walk toward the root.
        let mut i = self.arcs[sister(middle) as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[sister(a) as usize].r_cap);
            i = self.arcs[a as usize].head;
        }
        bottleneck = bottleneck.min(self.nodes[i as usize].tr_cap);

        // Sink side.
        let mut i = self.arcs[middle as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            bottleneck = bottleneck.min(self.arcs[a as usize].r_cap);
            i = self.arcs[a as usize].head;
        }
        bottleneck = bottleneck.min(-self.nodes[i as usize].tr_cap);

        self.arcs[sister(middle) as usize].r_cap += bottleneck;
        self.arcs[middle as usize].r_cap -= bottleneck;

        let mut i = self.arcs[sister(middle) as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            self.arcs[a as usize].r_cap += bottleneck;
            self.arcs[sister(a) as usize].r_cap -= bottleneck;
            if self.arcs[sister(a) as usize].r_cap <= 0.0 {
                self.arcs[sister(a) as usize].r_cap = 0.0;
                self.set_orphan_front(i);
            }
            i = self.arcs[a as usize].head;
        }
        self.nodes[i as usize].tr_cap -= bottleneck;
        if self.nodes[i as usize].tr_cap <= 0.0 {
            self.nodes[i as usize].tr_cap = 0.0;
            self.set_orphan_front(i);
        }

        let mut i = self.arcs[middle as usize].head;
        loop {
            let a = self.nodes[i as usize].parent;
            if a == TERMINAL {
                break;
            }
            self.arcs[sister(a) as usize].r_cap += bottleneck;
            self.arcs[a as usize].r_cap -= bottleneck;
            if self.arcs[a as usize].r_cap <= 0.0 {
                self.arcs[a as usize].r_cap = 0.0;
                self.set_orphan_front(i);
            }
            i = self.arcs[a as usize].head;
        }
        self.nodes[i as usize].tr_cap += bottleneck;
        if self.nodes[i as usize].tr_cap >= 0.0 {
            self.nodes[i as usize].tr_cap = 0.0;
            self.set_orphan_front(i);
        }

        self.flow += bottleneck;
    }

    /// Distance from `j` to its terminal along parent links, or None when
    /// the chain ends in an orphan. Uses and refreshes the timestamp cache.
    fn origin_distance(&mut self, mut j: u32) -> Option<u32> {
        let mut d: u32 = 0;
        loop {
            let n = &self.nodes[j as usize];
            if n.ts == self.time {
                return Some(d + n.dist);
            }
            let a = n.parent;
            d += 1;
            if a == TERMINAL {
                let n = &mut self.nodes[j as usize];
                n.ts = self.time;
                n.dist = 1;
                return Some(d);
            }
            if a == ORPHAN {
                return None;
            }
            j = self.arcs[a as usize].head;
        }
    }

    fn mark_path(&mut self, start: u32, mut d: u32) {
        let mut j = start;
        while self.nodes[j as usize].ts != self.time {
            let n = &mut self.nodes[j as usize];
            n.ts = self.time;
            n.dist = d;
            d = d.saturating_sub(1);
            j = self.arcs[n.parent as usize].head;
        }
    }

    fn process_source_orphan(&mut self, i: u32) {
        self.process_orphan(i, false);
    }

    fn process_sink_orphan(&mut self, i: u32) {
        self.process_orphan(i, true);
    }

    fn process_orphan(&mut self, i: u32, sink: bool) {
        let mut best_arc = NONE;
        let mut best_dist = INFINITE_DIST;

        let mut a0 = self.nodes[i as usize].first;
        while a0 != NONE {
            // Source tree: need residual j -> i; sink tree: i -> j.
            let residual = if sink { self.arcs[a0 as usize].r_cap } else { self.arcs[sister(a0) as usize].r_cap };
            if residual > 0.0 {
                let j = self.arcs[a0 as usize].head;
                let nj = &self.nodes[j as usize];
                if nj.is_sink == sink && nj.parent != NONE {
                    if let Some(d) = self.origin_distance(j) {
                        if d < best_dist {
                            best_arc = a0;
                            best_dist = d;
                        }
                        self.mark_path(j, d);
                    }
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }

        if best_arc != NONE {
            let n = &mut self.nodes[i as usize];
            n.parent = best_arc;
            n.ts = self.time;
            n.dist = best_dist + 1;
            return;
        }

        // No parent found: free the node and orphan its children.
        let mut a0 = self.nodes[i as usize].first;
        while a0 != NONE {
            let j = self.arcs[a0 as usize].head;
            let (j_sink, parent) = {
                let nj = &self.nodes[j as usize];
                (nj.is_sink, nj.parent)
            };
            if j_sink == sink && parent != NONE {
                let residual = if sink { self.arcs[a0 as usize].r_cap } else { self.arcs[sister(a0) as usize].r_cap };
                if residual > 0.0 {
                    self.set_active(j);
                }
                if parent != TERMINAL && parent != ORPHAN && self.arcs[parent as usize].head == i {
                    self.set_orphan_rear(j);
                }
            }
            a0 = self.arcs[a0 as usize].next;
        }
        self.nodes[i as usize].parent = NONE;
    }
}
