//! Diagonal exposure: reveal `Γ_π ∩ [t]²` one diagonal step at a time
//! and track the `[t]`-maximal arcs.
//!
//! An arc is stored tail first, so `π(a_i) = a_{i+1}` and the head is
//! the last element. At step `t → t+1` with `e = t+1`, the two new graph
//! points that can land inside `[t+1]²` are `(e, π(e))` and `(π⁻¹(e), e)`.
//! `π(e) ≤ t` means `π(e)` is the tail of an open arc, and `π⁻¹(e) ≤ t`
//! means `π⁻¹(e)` is the head of an open arc.

use std::collections::VecDeque;
use std::fmt;
use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Result};
use crate::fenwick::Fenwick;
use crate::mallows::MallowsParams;
use crate::perm::Permutation;
use crate::qmath::{pow, ratio};

pub type ArcId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    NewOpenSingleton,
    FixedPoint,
    ExtendHead,
    ExtendTail,
    Merge,
    Close,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::NewOpenSingleton => "new-open-singleton",
            EventKind::FixedPoint => "fixed-point",
            EventKind::ExtendHead => "extend-head",
            EventKind::ExtendTail => "extend-tail",
            EventKind::Merge => "merge",
            EventKind::Close => "close",
        }
    }

    /// Change in `κ` caused by this kind of step.
    pub fn kappa_delta(&self) -> i32 {
        match self {
            EventKind::NewOpenSingleton => 1,
            EventKind::FixedPoint | EventKind::ExtendHead | EventKind::ExtendTail => 0,
            EventKind::Merge | EventKind::Close => -1,
        }
    }

    /// Whether `t` is the maximum of its cycle.
    pub fn closes_cycle(&self) -> bool {
        matches!(self, EventKind::FixedPoint | EventKind::Close)
    }
}

impl fmt::Display for EventKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureEvent {
    /// The element revealed at this step (the new time).
    pub t: usize,
    pub kind: EventKind,
    /// Open arcs at time `t − 1` that took part: the arc whose head was
    /// hit first, then the arc whose tail was hit. For a merge, the
    /// surviving arc keeps one of these ids.
    pub participants: Vec<ArcId>,
    /// Id of the arc containing `t` afterwards.
    pub arc: ArcId,
    pub kappa_after: usize,
}

/// Snapshot of the `[t]`-maximal arcs. Each arc is listed tail first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArcSets {
    pub t: usize,
    /// `(id, elements)` in order of creation.
    pub open_arcs: Vec<(ArcId, Vec<usize>)>,
    pub closed_arcs: Vec<Vec<usize>>,
}

impl ArcSets {
    pub fn kappa(&self) -> usize {
        self.open_arcs.len()
    }

    fn open_arc(&self, id: ArcId) -> Result<&[usize]> {
        self.open_arcs
            .iter()
            .find(|(i, _)| *i == id)
            .map(|(_, a)| a.as_slice())
            .ok_or_else(|| invalid("arc", format!("{id} is not an open arc at time {}", self.t)))
    }

    /// `h_a = |{c open : head(c) < head(a)}|`.
    pub fn head_rank(&self, id: ArcId) -> Result<usize> {
        let head = *self.open_arc(id)?.last().expect("arcs are non-empty");
        Ok(self
            .open_arcs
            .iter()
            .filter(|(_, c)| *c.last().expect("arcs are non-empty") < head)
            .count())
    }

    /// `t_b = |{c open : tail(c) < tail(b)}|`.
    pub fn tail_rank(&self, id: ArcId) -> Result<usize> {
        let tail = self.open_arc(id)?[0];
        Ok(self.open_arcs.iter().filter(|(_, c)| c[0] < tail).count())
    }

    /// Checks the arc invariants against `p`: disjoint arcs covering
    /// `{1..t}`, `π(a_i) = a_{i+1}` along each arc, closed arcs wrap
    /// around, open arcs leave `[t]` at both ends.
    pub fn validate(&self, p: &Permutation) -> Result<()> {
        let t = self.t;
        let mut seen = vec![false; t + 1];
        let image = p.as_zero_based();
        let inverse = p.inverse();
        let fail = |reason: String| Err(invalid("arcs", reason));
        let all = self
            .open_arcs
            .iter()
            .map(|(_, a)| (a, false))
            .chain(self.closed_arcs.iter().map(|a| (a, true)));
        for (arc, closed) in all {
            if arc.is_empty() {
                return fail("empty arc".into());
            }
            for &v in arc {
                if v == 0 || v > t || seen[v] {
                    return fail(format!("element {v} repeated or outside [{t}]"));
                }
                seen[v] = true;
            }
            let follows = |a: usize, b: usize| image[a - 1] as usize + 1 == b;
            if !arc.windows(2).all(|w| follows(w[0], w[1])) {
                return fail(format!("{arc:?} is not an arc"));
            }
            let (tail, head) = (arc[0], *arc.last().unwrap());
            if closed && !follows(head, tail) {
                return fail(format!("closed arc {arc:?} does not wrap"));
            }
            let leaves = image[head - 1] as usize >= t && inverse.as_zero_based()[tail - 1] as usize >= t;
            if !closed && !leaves {
                return fail(format!("open arc {arc:?} is not maximal"));
            }
        }
        if seen[1..].iter().any(|s| !s) {
            return fail(format!("arcs do not cover [{t}]"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Open,
    Closed,
    Absorbed,
}

/// Step-by-step exposure of one permutation.
#[derive(Clone, Debug)]
pub struct DiagonalExposure<'a> {
    perm: &'a Permutation,
    inverse: Vec<u32>,
    t: usize,
    arcs: Vec<VecDeque<usize>>,
    status: Vec<Status>,
    /// Arc whose head (tail) is this element, valid only while it is one.
    head_owner: Vec<ArcId>,
    tail_owner: Vec<ArcId>,
    heads: Fenwick,
    tails: Fenwick,
    kappa: usize,
    closed_order: Vec<ArcId>,
}

impl<'a> DiagonalExposure<'a> {
    pub fn new(perm: &'a Permutation) -> Self {
        let n = perm.len();
        DiagonalExposure {
            perm,
            inverse: perm.inverse().as_zero_based().to_vec(),
            t: 0,
            arcs: Vec::new(),
            status: Vec::new(),
            head_owner: vec![usize::MAX; n + 1],
            tail_owner: vec![usize::MAX; n + 1],
            heads: Fenwick::new(n + 1),
            tails: Fenwick::new(n + 1),
            kappa: 0,
            closed_order: Vec::new(),
        }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn is_done(&self) -> bool {
        self.t == self.perm.len()
    }

    /// Elements of arc `id`, tail first.
    pub fn arc(&self, id: ArcId) -> Option<&VecDeque<usize>> {
        self.arcs.get(id).filter(|_| self.status[id] != Status::Absorbed)
    }

    pub fn is_open(&self, id: ArcId) -> bool {
        self.status.get(id) == Some(&Status::Open)
    }

    pub fn open_arc_ids(&self) -> impl Iterator<Item = ArcId> + '_ {
        (0..self.arcs.len()).filter(|&i| self.status[i] == Status::Open)
    }

    pub fn head_rank(&self, id: ArcId) -> Result<usize> {
        let head = *self.open(id)?.back().expect("arcs are non-empty");
        Ok(self.heads.prefix(head) as usize)
    }

    pub fn tail_rank(&self, id: ArcId) -> Result<usize> {
        let tail = *self.open(id)?.front().expect("arcs are non-empty");
        Ok(self.tails.prefix(tail) as usize)
    }

    fn open(&self, id: ArcId) -> Result<&VecDeque<usize>> {
        if self.is_open(id) {
            Ok(&self.arcs[id])
        } else {
            Err(invalid("arc", format!("{id} is not an open arc at time {}", self.t)))
        }
    }

    /// `P_t[π⁻¹(t+1) = head(a), π(t+1) = tail(b)]` for open arcs `a`, `b`.
    pub fn head_tail_hit_probability(&self, a: ArcId, b: ArcId, q: f64) -> Result<f64> {
        let n = self.perm.len();
        if self.t >= n {
            return Err(out_of_range("time", self.t as i64, format!("0..{n}")));
        }
        hit_probability(self.head_rank(a)?, self.tail_rank(b)?, n - self.t, q)
    }

    fn new_arc(&mut self, elements: VecDeque<usize>, status: Status) -> ArcId {
        self.arcs.push(elements);
        self.status.push(status);
        self.arcs.len() - 1
    }

    fn set_head(&mut self, id: ArcId, old: Option<usize>, new: usize) {
        if let Some(v) = old {
            self.heads.add(v, -1);
        }
        self.heads.add(new, 1);
        self.head_owner[new] = id;
    }

    fn set_tail(&mut self, id: ArcId, old: Option<usize>, new: usize) {
        if let Some(v) = old {
            self.tails.add(v, -1);
        }
        self.tails.add(new, 1);
        self.tail_owner[new] = id;
    }

    /// Reveals element `t + 1`; `None` once `t = n`.
    pub fn step(&mut self) -> Option<ExposureEvent> {
        if self.is_done() {
            return None;
        }
        let t = self.t;
        let e = t + 1;
        let x = self.perm.as_zero_based()[t] as usize + 1;
        let y = self.inverse[t] as usize + 1;
        let head_hit = (y <= t).then(|| self.head_owner[y]);
        let tail_hit = (x <= t).then(|| self.tail_owner[x]);
        let (kind, participants, arc) = match (head_hit, tail_hit) {
            _ if x == e => {
                let id = self.new_arc(VecDeque::from([e]), Status::Closed);
                self.closed_order.push(id);
                (EventKind::FixedPoint, vec![], id)
            }
            (None, None) => {
                let id = self.new_arc(VecDeque::from([e]), Status::Open);
                self.set_head(id, None, e);
                self.set_tail(id, None, e);
                self.kappa += 1;
                (EventKind::NewOpenSingleton, vec![], id)
            }
            (Some(a), None) => {
                self.arcs[a].push_back(e);
                self.set_head(a, Some(y), e);
                (EventKind::ExtendHead, vec![a], a)
            }
            (None, Some(b)) => {
                self.arcs[b].push_front(e);
                self.set_tail(b, Some(x), e);
                (EventKind::ExtendTail, vec![b], b)
            }
            (Some(a), Some(b)) if a == b => {
                self.arcs[a].push_back(e);
                self.heads.add(y, -1);
                self.tails.add(x, -1);
                self.status[a] = Status::Closed;
                self.closed_order.push(a);
                self.kappa -= 1;
                (EventKind::Close, vec![a], a)
            }
            (Some(a), Some(b)) => {
                // a ++ [e] ++ b, moving the shorter arc into the longer one
                self.heads.add(y, -1);
                self.tails.add(x, -1);
                let survivor = if self.arcs[a].len() >= self.arcs[b].len() {
                    let moved = std::mem::take(&mut self.arcs[b]);
                    self.arcs[a].push_back(e);
                    self.arcs[a].extend(moved);
                    self.status[b] = Status::Absorbed;
                    a
                } else {
                    let moved = std::mem::take(&mut self.arcs[a]);
                    self.arcs[b].push_front(e);
                    for &v in moved.iter().rev() {
                        self.arcs[b].push_front(v);
                    }
                    self.status[a] = Status::Absorbed;
                    b
                };
                let tail = *self.arcs[survivor].front().unwrap();
                let head = *self.arcs[survivor].back().unwrap();
                self.tail_owner[tail] = survivor;
                self.head_owner[head] = survivor;
                self.kappa -= 1;
                (EventKind::Merge, vec![a, b], survivor)
            }
        };
        self.t = e;
        Some(ExposureEvent {
            t: e,
            kind,
            participants,
            arc,
            kappa_after: self.kappa,
        })
    }

    pub fn snapshot(&self) -> ArcSets {
        ArcSets {
            t: self.t,
            open_arcs: self
                .open_arc_ids()
                .map(|id| (id, self.arcs[id].iter().copied().collect()))
                .collect(),
            closed_arcs: self
                .closed_order
                .iter()
                .map(|&id| self.arcs[id].iter().copied().collect())
                .collect(),
        }
    }
}

impl Iterator for DiagonalExposure<'_> {
    type Item = ExposureEvent;

    fn next(&mut self) -> Option<ExposureEvent> {
        self.step()
    }
}

/// Replays `t = 1..=n`, pairing each event with the arc sets after it.
pub fn expose(p: &Permutation) -> Vec<(ArcSets, ExposureEvent)> {
    let mut d = DiagonalExposure::new(p);
    let mut out = Vec::with_capacity(p.len());
    while let Some(ev) = d.step() {
        out.push((d.snapshot(), ev));
    }
    out
}

/// Just the events, without snapshots.
pub fn exposure_events(p: &Permutation) -> Vec<ExposureEvent> {
    DiagonalExposure::new(p).collect()
}

/// Event-log CSV with columns `t,kind,kappa_after`.
pub fn write_event_log<W: Write>(events: &[ExposureEvent], mut out: W) -> io::Result<()> {
    writeln!(out, "t,kind,kappa_after")?;
    for ev in events {
        writeln!(out, "{},{},{}", ev.t, ev.kind, ev.kappa_after)?;
    }
    Ok(())
}

fn hit_probability(h: usize, tl: usize, m: usize, q: f64) -> Result<f64> {
    crate::mallows::check_q(q)?;
    let base = ratio(q, 1, m as u64);
    Ok(pow(q, (h + tl) as u64) * base * base)
}

/// `q^{h_a + t_b} · ((1−q)/(1−q^{n−t}))²` for open arcs `a`, `b` at time `t < n`.
pub fn head_tail_hit_probability(arcs: &ArcSets, a: ArcId, b: ArcId, params: &MallowsParams) -> Result<f64> {
    let n = params.n();
    if arcs.t >= n {
        return Err(out_of_range("time", arcs.t as i64, format!("0..{n}")));
    }
    hit_probability(arcs.head_rank(a)?, arcs.tail_rank(b)?, n - arcs.t, params.q())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Bracket on `P_{s−1}[s = max C_s]` given the arcs at time `s − 1`:
/// `[q^{κ_{s−1}} r, r]` with `r = (1−q)/(1−q^{n−s+1})`.
pub fn close_now_probability(arcs: &ArcSets, s: usize, params: &MallowsParams) -> Result<Bracket> {
    let n = params.n();
    if s == 0 || s > n {
        return Err(out_of_range("s", s as i64, format!("1..={n}")));
    }
    if arcs.t + 1 != s {
        return Err(invalid("arcs", format!("expected time {}, got {}", s - 1, arcs.t)));
    }
    let q = params.q();
    let r = ratio(q, 1, (n - s + 1) as u64);
    Ok(Bracket {
        lower: pow(q, arcs.kappa() as u64) * r,
        upper: r,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycleStats {
    pub length: usize,
    pub max: usize,
    pub min: usize,
    pub diameter: usize,
}

/// Length, extremes and diameter of the cycle through `s`.
pub fn cycle_stats(p: &Permutation, s: usize) -> Result<CycleStats> {
    p.check_index(s)?;
    let image = p.as_zero_based();
    let (mut length, mut max, mut min) = (0, s, s);
    let mut v = s;
    loop {
        length += 1;
        max = max.max(v);
        min = min.min(v);
        v = image[v - 1] as usize + 1;
        if v == s {
            break;
        }
    }
    Ok(CycleStats {
        length,
        max,
        min,
        diameter: max - min,
    })
}

/// Number of cycles, counted as `|{s : s = max C_s}|` along the exposure.
pub fn num_cycles(p: &Permutation) -> usize {
    DiagonalExposure::new(p).filter(|ev| ev.kind.closes_cycle()).count()
}
