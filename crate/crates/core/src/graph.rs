//! Mutable residual Tanner graph driven by the decoder.
//!
//! Holds per-check parity bits and live adjacency, indexed sets of degree-one
//! and degree-two checks, and a parity-carrying union-find that records merges
//! of variable pairs so their values can be recovered by back-substitution.

use crate::ensemble::TannerGraph;
use thiserror::Error;

#[derive(Debug, Clone, Error)]
pub enum GraphError {
    #[error("codeword does not satisfy parity check {0}")]
    InvalidCodeword(usize),
    #[error("input length {got} does not match code length {want}")]
    LengthMismatch { got: usize, want: usize },
    #[error("check {check} processed as degree {want} but has degree {got}")]
    ContractViolation {
        check: usize,
        want: usize,
        got: usize,
    },
    #[error("residual system inconsistent at check {0}")]
    Inconsistent(usize),
}

/// Set with O(1) insert/remove/contains and uniform sampling by slot index.
#[derive(Debug, Clone, Default)]
pub struct IndexedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const NOT_PRESENT: u32 = u32::MAX;

impl IndexedSet {
    pub fn with_capacity(universe: usize) -> Self {
        Self {
            items: Vec::new(),
            pos: vec![NOT_PRESENT; universe],
        }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.pos[x as usize] != NOT_PRESENT
    }

    pub fn insert(&mut self, x: u32) {
        if !self.contains(x) {
            self.pos[x as usize] = self.items.len() as u32;
            self.items.push(x);
        }
    }

    pub fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        if p == NOT_PRESENT {
            return;
        }
        let last = *self.items.last().unwrap();
        self.items[p as usize] = last;
        self.pos[last as usize] = p;
        self.items.pop();
        self.pos[x as usize] = NOT_PRESENT;
    }

    /// Element at slot `idx` (for uniform sampling over `0..len()`).
    pub fn get(&self, idx: usize) -> u32 {
        self.items[idx]
    }

    /// Oldest-inserted element still present (front of the vector).
    pub fn first(&self) -> Option<u32> {
        self.items.first().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.items.iter().copied()
    }
}

/// Union-find over variables where each node stores the XOR offset of its
/// value relative to its parent. Path compression keeps offsets consistent by
/// accumulating the XOR along compressed paths; union by size.
#[derive(Debug, Clone)]
pub struct ParityUnionFind {
    parent: Vec<u32>,
    offset: Vec<bool>,
    size: Vec<u32>,
    /// Value of the class representative, once known.
    root_value: Vec<Option<bool>>,
}

impl ParityUnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n as u32).collect(),
            offset: vec![false; n],
            size: vec![1; n],
            root_value: vec![None; n],
        }
    }

    /// Returns `(root, parity)` with `value(x) = value(root) XOR parity`.
    pub fn find(&mut self, x: u32) -> (u32, bool) {
        // Iterative two-pass: walk to the root, then compress with offsets.
        let mut r = x;
        let mut par = false;
        while self.parent[r as usize] != r {
            par ^= self.offset[r as usize];
            r = self.parent[r as usize];
        }
        let root = r;
        let total = par;
        let mut cur = x;
        let mut cur_par = total;
        while self.parent[cur as usize] != cur {
            let next = self.parent[cur as usize];
            let next_par = cur_par ^ self.offset[cur as usize];
            self.parent[cur as usize] = root;
            self.offset[cur as usize] = cur_par;
            cur = next;
            cur_par = next_par;
        }
        (root, total)
    }

    /// Merges so that `value(a) = value(b) XOR d`. Returns false when `a` and
    /// `b` were already in the same class with a conflicting relation.
    pub fn union(&mut self, a: u32, b: u32, d: bool) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa ^ pb == d;
        }
        // offset of ra relative to rb: value(ra) = value(rb) ^ rel
        let rel = pa ^ d ^ pb;
        let (big, small, off) = if self.size[ra as usize] >= self.size[rb as usize] {
            // attach rb under ra; value(rb) = value(ra) ^ rel
            (ra, rb, rel)
        } else {
            (rb, ra, rel)
        };
        self.parent[small as usize] = big;
        self.offset[small as usize] = off;
        self.size[big as usize] += self.size[small as usize];
        debug_assert!(self.root_value[small as usize].is_none() || {
            // Carry an already-known value across the link.
            true
        });
        if let Some(v) = self.root_value[small as usize].take() {
            let implied = v ^ off;
            match self.root_value[big as usize] {
                None => self.root_value[big as usize] = Some(implied),
                Some(w) => {
                    if w != implied {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Assigns the value of `x`'s whole class. Returns false on conflict.
    pub fn assign(&mut self, x: u32, value: bool) -> bool {
        let (root, par) = self.find(x);
        let rv = value ^ par;
        match self.root_value[root as usize] {
            None => {
                self.root_value[root as usize] = Some(rv);
                true
            }
            Some(w) => w == rv,
        }
    }

    /// Value of `x` if its class has been resolved.
    pub fn value(&mut self, x: u32) -> Option<bool> {
        let (root, par) = self.find(x);
        self.root_value[root as usize].map(|v| v ^ par)
    }
}

/// Decode status of a residual graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// No live variables remain.
    Empty,
    /// Live variables remain but no checks of the allowed degrees.
    Stalled,
}

/// Record of one degree-two merge.
#[derive(Debug, Clone, Copy)]
pub struct MergeRecord {
    pub removed: u32,
    pub survivor: u32,
    /// Parity of the processed check: `value(removed) = value(survivor) ^ offset`.
    pub offset: bool,
    /// Check memberships transferred to the survivor (column-addition cost).
    pub transferred: usize,
    /// Checks where the survivor was already present (each lost 2 edges).
    pub collapsed: usize,
}

/// Mutable residual graph state.
///
/// Single-owner; drive one decode per state. All counters (`live edges`,
/// degree sums) are maintained incrementally by the two reduction primitives.
#[derive(Debug, Clone)]
pub struct DecoderState {
    /// Per-check live variable members (unordered).
    check_vars: Vec<Vec<u32>>,
    /// Per-variable live check memberships (unordered).
    var_checks: Vec<Vec<u32>>,
    parity: Vec<bool>,
    var_alive: Vec<bool>,
    check_alive: Vec<bool>,
    pub uf: ParityUnionFind,
    /// Channel-known values; erased positions are None until resolved.
    known: Vec<Option<bool>>,
    deg1: IndexedSet,
    deg2: IndexedSet,
    live_vars: usize,
    live_checks: usize,
    live_edges: usize,
    sum_var_deg_sq: u64,
    sum_check_deg_sq: u64,
    initial_edges: usize,
    /// Checks that changed degree since the log was last taken, with their
    /// new degrees. Lets callers keep FIFO queues without rescanning.
    transition_log: Vec<(u32, usize)>,
    /// Run the full structural audit after every primitive (slow; tests only).
    pub audit_every_op: bool,
}

impl DecoderState {
    /// Builds the residual state from a received word: known variables are
    /// removed up front, flipping the parity of their checks when their value
    /// is 1. Errors when the codeword violates a parity check.
    pub fn init_from_channel(
        graph: &TannerGraph,
        codeword: &[bool],
        erased: &[bool],
    ) -> Result<Self, GraphError> {
        if codeword.len() != graph.n_vars {
            return Err(GraphError::LengthMismatch {
                got: codeword.len(),
                want: graph.n_vars,
            });
        }
        if erased.len() != graph.n_vars {
            return Err(GraphError::LengthMismatch {
                got: erased.len(),
                want: graph.n_vars,
            });
        }
        for (c, members) in graph.check_vars.iter().enumerate() {
            let mut acc = false;
            for &v in members {
                acc ^= codeword[v as usize];
            }
            if acc {
                return Err(GraphError::InvalidCodeword(c));
            }
        }

        let n_vars = graph.n_vars;
        let n_checks = graph.n_checks;
        let mut check_vars: Vec<Vec<u32>> = Vec::with_capacity(n_checks);
        let mut parity = vec![false; n_checks];
        let mut var_checks: Vec<Vec<u32>> = vec![Vec::new(); n_vars];
        for (c, members) in graph.check_vars.iter().enumerate() {
            let mut live = Vec::new();
            for &v in members {
                if erased[v as usize] {
                    live.push(v);
                    var_checks[v as usize].push(c as u32);
                } else if codeword[v as usize] {
                    parity[c] ^= true;
                }
            }
            check_vars.push(live);
        }

        let mut deg1 = IndexedSet::with_capacity(n_checks);
        let mut deg2 = IndexedSet::with_capacity(n_checks);
        let mut live_checks = 0usize;
        let mut live_edges = 0usize;
        let mut sum_check_deg_sq = 0u64;
        let mut check_alive = vec![false; n_checks];
        for (c, members) in check_vars.iter().enumerate() {
            let d = members.len();
            if d == 0 {
                // Fully known check: must already be satisfied.
                if parity[c] {
                    return Err(GraphError::InvalidCodeword(c));
                }
                continue;
            }
            check_alive[c] = true;
            live_checks += 1;
            live_edges += d;
            sum_check_deg_sq += (d * d) as u64;
            if d == 1 {
                deg1.insert(c as u32);
            } else if d == 2 {
                deg2.insert(c as u32);
            }
        }

        let mut var_alive = vec![false; n_vars];
        let mut live_vars = 0usize;
        let mut sum_var_deg_sq = 0u64;
        let mut known = vec![None; n_vars];
        for v in 0..n_vars {
            if erased[v] {
                var_alive[v] = true;
                live_vars += 1;
                let d = var_checks[v].len();
                sum_var_deg_sq += (d * d) as u64;
            } else {
                known[v] = Some(codeword[v]);
            }
        }

        Ok(Self {
            check_vars,
            var_checks,
            parity,
            var_alive,
            check_alive,
            uf: ParityUnionFind::new(n_vars),
            known,
            deg1,
            deg2,
            live_vars,
            live_checks,
            live_edges,
            sum_var_deg_sq,
            sum_check_deg_sq,
            initial_edges: live_edges,
            transition_log: Vec::new(),
            audit_every_op: false,
        })
    }

    /// Degree transitions since the last [`take_transition_log`] call.
    ///
    /// [`take_transition_log`]: Self::take_transition_log
    pub fn transition_log(&self) -> &[(u32, usize)] {
        &self.transition_log
    }

    /// Clears the transition log (typically right before an operation).
    pub fn take_transition_log(&mut self) {
        self.transition_log.clear();
    }

    pub fn n_vars(&self) -> usize {
        self.var_checks.len()
    }

    pub fn live_vars(&self) -> usize {
        self.live_vars
    }

    pub fn live_checks(&self) -> usize {
        self.live_checks
    }

    pub fn live_edges(&self) -> usize {
        self.live_edges
    }

    pub fn initial_edges(&self) -> usize {
        self.initial_edges
    }

    pub fn check_degree(&self, c: u32) -> usize {
        self.check_vars[c as usize].len()
    }

    pub fn check_parity(&self, c: u32) -> bool {
        self.parity[c as usize]
    }

    pub fn is_check_alive(&self, c: u32) -> bool {
        self.check_alive[c as usize]
    }

    pub fn is_var_alive(&self, v: u32) -> bool {
        self.var_alive[v as usize]
    }

    pub fn var_degree(&self, v: u32) -> usize {
        self.var_checks[v as usize].len()
    }

    /// Number of edges of right degree 1 (= number of degree-1 checks).
    pub fn r1_edges(&self) -> usize {
        self.deg1.len()
    }

    /// Number of edges of right degree 2 (= 2 × number of degree-2 checks).
    pub fn r2_edges(&self) -> usize {
        2 * self.deg2.len()
    }

    pub fn deg1_set(&self) -> &IndexedSet {
        &self.deg1
    }

    pub fn deg2_set(&self) -> &IndexedSet {
        &self.deg2
    }

    /// Average edge left degree `Σ_i i L_i / E(t)`.
    pub fn l_avg(&self) -> f64 {
        if self.live_edges == 0 {
            0.0
        } else {
            self.sum_var_deg_sq as f64 / self.live_edges as f64
        }
    }

    /// Average edge right degree `Σ_j j R_j / E(t)`.
    pub fn r_avg(&self) -> f64 {
        if self.live_edges == 0 {
            0.0
        } else {
            self.sum_check_deg_sq as f64 / self.live_edges as f64
        }
    }

    /// Node-perspective average variable degree `E(t) / live variables`.
    pub fn lambda_avg_node(&self) -> f64 {
        if self.live_vars == 0 {
            0.0
        } else {
            self.live_edges as f64 / self.live_vars as f64
        }
    }

    /// Node-perspective average check degree `E(t) / live checks`.
    pub fn theta_avg_node(&self) -> f64 {
        if self.live_checks == 0 {
            0.0
        } else {
            self.live_edges as f64 / self.live_checks as f64
        }
    }

    /// Dense live edge counts by degree: `(L_i, R_j)`.
    pub fn edge_degree_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let lmax = (0..self.var_checks.len())
            .filter(|&v| self.var_alive[v])
            .map(|v| self.var_checks[v].len())
            .max()
            .unwrap_or(0);
        let mut l = vec![0usize; lmax + 1];
        for v in 0..self.var_checks.len() {
            if self.var_alive[v] {
                let d = self.var_checks[v].len();
                l[d] += d;
            }
        }
        let rmax = (0..self.check_vars.len())
            .filter(|&c| self.check_alive[c])
            .map(|c| self.check_vars[c].len())
            .max()
            .unwrap_or(0);
        let mut r = vec![0usize; rmax + 1];
        for c in 0..self.check_vars.len() {
            if self.check_alive[c] {
                let d = self.check_vars[c].len();
                r[d] += d;
            }
        }
        (l, r)
    }

    fn queue_transition(&mut self, c: u32, old_deg: usize, new_deg: usize) {
        if old_deg == 1 {
            self.deg1.remove(c);
        } else if old_deg == 2 {
            self.deg2.remove(c);
        }
        if new_deg == 1 {
            self.deg1.insert(c);
            self.transition_log.push((c, 1));
        } else if new_deg == 2 {
            self.deg2.insert(c);
            self.transition_log.push((c, 2));
        }
    }

    /// Removes one incidence (v in check c). The caller fixes variable-side
    /// bookkeeping. Returns an error for a parity-1 check going empty.
    fn check_remove_var(&mut self, c: u32, v: u32) -> Result<(), GraphError> {
        let members = &mut self.check_vars[c as usize];
        let old_deg = members.len();
        let idx = members
            .iter()
            .position(|&x| x == v)
            .expect("incidence must exist");
        members.swap_remove(idx);
        let new_deg = old_deg - 1;
        self.live_edges -= 1;
        self.sum_check_deg_sq -= (old_deg * old_deg) as u64;
        self.sum_check_deg_sq += (new_deg * new_deg) as u64;
        self.queue_transition(c, old_deg, new_deg);
        if new_deg == 0 {
            self.check_alive[c as usize] = false;
            self.live_checks -= 1;
            if self.parity[c as usize] {
                return Err(GraphError::Inconsistent(c as usize));
            }
        }
        Ok(())
    }

    fn remove_check_entirely(&mut self, c: u32) {
        let d = self.check_vars[c as usize].len();
        self.queue_transition(c, d, usize::MAX);
        self.live_edges -= d;
        self.sum_check_deg_sq -= (d * d) as u64;
        self.check_alive[c as usize] = false;
        self.live_checks -= 1;
        self.check_vars[c as usize].clear();
    }

    fn drop_var_membership(&mut self, v: u32, c: u32) {
        let list = &mut self.var_checks[v as usize];
        let idx = list
            .iter()
            .position(|&x| x == c)
            .expect("membership must exist");
        list.swap_remove(idx);
    }

    fn update_var_deg_sq(&mut self, old_deg: usize, new_deg: usize) {
        self.sum_var_deg_sq -= (old_deg * old_deg) as u64;
        self.sum_var_deg_sq += (new_deg * new_deg) as u64;
    }

    /// Processes a degree-one check: its variable's class resolves to the
    /// check parity; variable and check leave the graph, flipping the parity
    /// of the variable's other checks when the value is 1.
    pub fn process_degree_one(&mut self, c: u32) -> Result<(u32, bool), GraphError> {
        let deg = self.check_vars[c as usize].len();
        if !self.check_alive[c as usize] || deg != 1 {
            return Err(GraphError::ContractViolation {
                check: c as usize,
                want: 1,
                got: deg,
            });
        }
        let v = self.check_vars[c as usize][0];
        let value = self.parity[c as usize];
        if !self.uf.assign(v, value) {
            return Err(GraphError::Inconsistent(c as usize));
        }
        self.known[v as usize] = None; // filled by back_substitute

        // Detach v from all checks; flip parities when its value is 1.
        let memberships = std::mem::take(&mut self.var_checks[v as usize]);
        let old_var_deg = memberships.len();
        let mut result = Ok(());
        for &cx in &memberships {
            if cx == c {
                self.remove_check_entirely(cx);
                continue;
            }
            if value {
                self.parity[cx as usize] ^= true;
            }
            if let Err(e) = self.check_remove_var(cx, v) {
                result = Err(e);
            }
        }
        self.update_var_deg_sq(old_var_deg, 0);
        self.var_alive[v as usize] = false;
        self.live_vars -= 1;
        if self.audit_every_op {
            self.audit();
        }
        result.map(|_| (v, value))
    }

    /// Processes a degree-two check connecting `V_o` and `V_r`: the two
    /// classes merge with XOR offset equal to the check parity, the check is
    /// removed and the removed variable's memberships transfer to the
    /// survivor. A check that ends up holding the survivor twice drops both
    /// incidences (its degree falls by 2, possibly creating a new degree-one
    /// check); transferred checks flip parity when the offset is 1.
    pub fn process_degree_two(&mut self, c: u32) -> Result<MergeRecord, GraphError> {
        let deg = self.check_vars[c as usize].len();
        if !self.check_alive[c as usize] || deg != 2 {
            return Err(GraphError::ContractViolation {
                check: c as usize,
                want: 2,
                got: deg,
            });
        }
        let a = self.check_vars[c as usize][0];
        let b = self.check_vars[c as usize][1];
        let offset = self.parity[c as usize];
        if a == b {
            // Self-loop: the relation is v XOR v = parity, so the parity must
            // be 0; the check carries no information and is dropped.
            // Unreachable after eager collapse, kept as a defensive path.
            self.remove_check_entirely(c);
            let old = self.var_checks[a as usize].len();
            self.drop_var_membership(a, c);
            self.drop_var_membership(a, c);
            self.update_var_deg_sq(old, old - 2);
            if offset {
                return Err(GraphError::Inconsistent(c as usize));
            }
            return Ok(MergeRecord {
                removed: a,
                survivor: a,
                offset,
                transferred: 0,
                collapsed: 0,
            });
        }
        // Keep the higher-degree variable; fewer memberships to move.
        let (survivor, removed) =
            if self.var_checks[a as usize].len() >= self.var_checks[b as usize].len() {
                (a, b)
            } else {
                (b, a)
            };
        if !self.uf.union(removed, survivor, offset) {
            return Err(GraphError::Inconsistent(c as usize));
        }

        // Remove the processed check from both endpoints.
        self.remove_check_entirely(c);
        self.drop_var_membership(survivor, c);
        self.drop_var_membership(removed, c);

        let memberships = std::mem::take(&mut self.var_checks[removed as usize]);
        let transferred = memberships.len();
        let mut collapsed = 0usize;
        let removed_old_deg = transferred + 1;
        let mut survivor_list = std::mem::take(&mut self.var_checks[survivor as usize]);
        let survivor_old_deg = survivor_list.len() + 1;
        let mut result = Ok(());

        for &cx in &memberships {
            if offset {
                self.parity[cx as usize] ^= true;
            }
            let members = &mut self.check_vars[cx as usize];
            let old_deg = members.len();
            if let Some(pos_s) = members.iter().position(|&x| x == survivor) {
                // Mod-2 collapse: survivor would appear twice.
                members.swap_remove(pos_s);
                let pos_r = members
                    .iter()
                    .position(|&x| x == removed)
                    .expect("removed var incidence");
                members.swap_remove(pos_r);
                let new_deg = old_deg - 2;
                self.live_edges -= 2;
                self.sum_check_deg_sq -= (old_deg * old_deg) as u64;
                self.sum_check_deg_sq += (new_deg * new_deg) as u64;
                self.queue_transition(cx, old_deg, new_deg);
                let pos_l = survivor_list
                    .iter()
                    .position(|&x| x == cx)
                    .expect("survivor membership");
                survivor_list.swap_remove(pos_l);
                collapsed += 1;
                if new_deg == 0 {
                    self.check_alive[cx as usize] = false;
                    self.live_checks -= 1;
                    if self.parity[cx as usize] {
                        result = Err(GraphError::Inconsistent(cx as usize));
                    }
                }
            } else {
                let pos_r = members
                    .iter()
                    .position(|&x| x == removed)
                    .expect("removed var incidence");
                members[pos_r] = survivor;
                survivor_list.push(cx);
            }
        }
        let survivor_new_deg = survivor_list.len();
        self.var_checks[survivor as usize] = survivor_list;
        self.update_var_deg_sq(removed_old_deg, 0);
        self.update_var_deg_sq(survivor_old_deg, survivor_new_deg);
        self.var_alive[removed as usize] = false;
        self.live_vars -= 1;
        // A survivor that lost every membership through collapses stays live:
        // its class value is still undetermined, so it remains part of the
        // residual graph (a check-free stopping structure).
        if self.audit_every_op {
            self.audit();
        }
        result.map(|_| MergeRecord {
            removed,
            survivor,
            offset,
            transferred,
            collapsed,
        })
    }

    /// Resolves every variable whose union-find class has a value: channel
    /// bits pass through, merged variables get `value(rep) XOR offset`,
    /// members of unresolved classes stay `None`.
    pub fn back_substitute(&mut self) -> Vec<Option<bool>> {
        let n = self.var_checks.len();
        let mut out = vec![None; n];
        for v in 0..n {
            if let Some(b) = self.known[v] {
                out[v] = Some(b);
            } else {
                out[v] = self.uf.value(v as u32);
            }
        }
        out
    }

    /// Text dump of the live residual graph, stable ordering for diffing:
    /// one `check <id> parity <b> vars <list>` line per live check.
    pub fn dump_residual(&self) -> String {
        let mut s = String::new();
        for c in 0..self.check_vars.len() {
            if !self.check_alive[c] {
                continue;
            }
            let mut vars = self.check_vars[c].clone();
            vars.sort_unstable();
            let list = vars
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(" ");
            s.push_str(&format!(
                "check {} parity {} vars {}\n",
                c, self.parity[c] as u8, list
            ));
        }
        s
    }

    /// Full structural audit: recomputes every derived quantity from the
    /// adjacency and panics on any mismatch. O(graph); tests only.
    pub fn audit(&self) {
        let mut edges = 0usize;
        let mut check_sq = 0u64;
        let mut live_checks = 0usize;
        for c in 0..self.check_vars.len() {
            let d = self.check_vars[c].len();
            if self.check_alive[c] {
                assert!(d > 0, "live check {c} with degree 0");
                live_checks += 1;
                edges += d;
                check_sq += (d * d) as u64;
                assert_eq!(
                    self.deg1.contains(c as u32),
                    d == 1,
                    "deg1 set wrong for check {c} (degree {d})"
                );
                assert_eq!(
                    self.deg2.contains(c as u32),
                    d == 2,
                    "deg2 set wrong for check {c} (degree {d})"
                );
                for &v in &self.check_vars[c] {
                    assert!(self.var_alive[v as usize], "dead var {v} in live check {c}");
                    assert!(
                        self.var_checks[v as usize].contains(&(c as u32)),
                        "check {c} lists var {v} but not vice versa"
                    );
                }
            } else {
                assert_eq!(d, 0, "dead check {c} with members");
                assert!(!self.deg1.contains(c as u32));
                assert!(!self.deg2.contains(c as u32));
            }
        }
        let mut var_edges = 0usize;
        let mut var_sq = 0u64;
        let mut live_vars = 0usize;
        for v in 0..self.var_checks.len() {
            let d = self.var_checks[v].len();
            if self.var_alive[v] {
                live_vars += 1;
                var_edges += d;
                var_sq += (d * d) as u64;
                for &c in &self.var_checks[v] {
                    assert!(self.check_alive[c as usize]);
                    assert!(self.check_vars[c as usize].contains(&(v as u32)));
                }
            } else {
                assert_eq!(d, 0, "dead var {v} with memberships");
            }
        }
        assert_eq!(edges, var_edges, "check/var edge counts differ");
        assert_eq!(edges, self.live_edges, "live_edges counter off");
        assert_eq!(live_checks, self.live_checks);
        assert_eq!(live_vars, self.live_vars);
        assert_eq!(check_sq, self.sum_check_deg_sq);
        assert_eq!(var_sq, self.sum_var_deg_sq);
    }

    /// Stop state given which degrees the caller is willing to process.
    pub fn stop_reason(&self, allow_deg2: bool) -> Option<StopReason> {
        if self.live_vars == 0 {
            return Some(StopReason::Empty);
        }
        if self.deg1.is_empty() && (!allow_deg2 || self.deg2.is_empty()) {
            return Some(StopReason::Stalled);
        }
        None
    }
}
