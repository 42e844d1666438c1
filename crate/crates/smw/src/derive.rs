//! Explicit histories for insertion, derivation and conjugated insertion,
//! and a bounded breadth-first acceptance search.

use std::collections::{HashSet, VecDeque};

use thiserror::Error;

use crate::hardware::{gen_word, sigma_four, AdmissibleWord, Hardware};
use crate::smachine::{Machine, Trace};
use crate::symbol::{Coord, Family, RuleId, RuleKey, Symbol};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeriveError {
    #[error("the empty relator cannot be inserted")]
    EmptyRelator,
    #[error("relator r{0} does not exist")]
    UnknownRelator(u16),
    #[error("position {pos} is out of range for a word of length {len}")]
    PositionOutOfRange { pos: usize, len: usize },
    #[error("the word does not contain the relator at position {0}")]
    DeletionMismatch(usize),
    #[error("the word is not positive")]
    NotPositive,
    #[error("expected a word over the plain generators")]
    NotGeneratorWord,
    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<DeriveError>,
    },
}

/// Constants `L`, `C` of the length bound `|h| ≤ L·(|w| + |w′|) + C`
/// satisfied by [`insertion_history`].
pub const INSERTION_SLOPE: usize = 2;
pub const INSERTION_OFFSET: usize = 5;

fn letters_of(w: &Word) -> Result<Vec<(u16, bool)>, DeriveError> {
    w.letters()
        .iter()
        .map(|l| match l.sym {
            Symbol::Gen(i) => Ok((i, l.inv)),
            _ => Err(DeriveError::NotGeneratorWord),
        })
        .collect()
}

fn step(family: Family, rel: u16, i: u16, bar: bool, inverse: bool) -> RuleId {
    let id = RuleId::positive(RuleKey::new(family, rel, i), bar);
    if inverse {
        id.inv()
    } else {
        id
    }
}

fn transition(family: Family, rel: u16, bar: bool) -> RuleId {
    step(family, rel, 0, bar, false)
}

/// The ten-phase cycle. `lead` is what `P` moves over before the cycle,
/// `left` the resulting `L_j`-sector and `right` the `P_j`-sector.
fn cycle(lead: &Word, left: &Word, right: &Word, rel: u16, r: &Word, bar: bool) -> Result<Vec<RuleId>, DeriveError> {
    let mut h = Vec::new();
    let mv = |h: &mut Vec<RuleId>, family, seq: Vec<(u16, bool)>, flip: bool| {
        let r0 = if family == Family::F1 { 0 } else { rel };
        for (i, inv) in seq {
            h.push(step(family, r0, i, bar, inv != flip));
        }
    };
    let rev = |w: &Word| -> Result<Vec<(u16, bool)>, DeriveError> {
        let mut v = letters_of(w)?;
        v.reverse();
        Ok(v)
    };
    // P steps right over the lead.
    mv(&mut h, Family::F1, letters_of(lead)?, false);
    h.push(transition(Family::F12, rel, bar));
    // L walks right to P.
    mv(&mut h, Family::F2, letters_of(left)?, false);
    h.push(transition(Family::F23, rel, bar));
    // R walks left to P.
    mv(&mut h, Family::F3, rev(right)?, false);
    h.push(transition(Family::F34, rel, bar));
    // L walks back over the K-sector, now ending in r.
    let k_sector = left.concat(r).reduced();
    mv(&mut h, Family::F4, rev(&k_sector)?, true);
    h.push(transition(Family::F45, rel, bar));
    // R walks back to its home.
    mv(&mut h, Family::F5, letters_of(right)?, true);
    h.push(transition(Family::F51, rel, bar));
    // P walks left over the L-sector.
    mv(&mut h, Family::F1, rev(&k_sector)?, true);
    Ok(h)
}

fn relator(hw: &Hardware, rel: u16) -> Result<Word, DeriveError> {
    if rel == 0 {
        return Err(DeriveError::EmptyRelator);
    }
    if rel as usize >= hw.ee().relator_count() {
        return Err(DeriveError::UnknownRelator(rel));
    }
    Ok(gen_word(hw.ee().relator(rel)))
}

fn split_at(w: &Word, pos: usize) -> (Word, Word) {
    let l = w.letters();
    (
        l[..pos].iter().copied().collect(),
        l[pos..].iter().copied().collect(),
    )
}

/// History of the strict machine taking `Σ(w)K₁(∅,1)` to `Σ(w′)K₁(∅,1)`,
/// where `w′` is `w` with relator `rel` inserted (or deleted) at `pos`.
pub fn insertion_history(
    hw: &Hardware,
    w: &Word,
    pos: usize,
    rel: u16,
    delete: bool,
) -> Result<Vec<RuleId>, DeriveError> {
    let r = relator(hw, rel)?;
    if !w.is_positive() {
        return Err(DeriveError::NotPositive);
    }
    letters_of(w)?;
    if pos > w.len() {
        return Err(DeriveError::PositionOutOfRange { pos, len: w.len() });
    }
    if delete {
        let end = pos + r.len();
        if end > w.len() || w.letters()[pos..end] != *r.letters() {
            return Err(DeriveError::DeletionMismatch(pos));
        }
        let mut shorter: Vec<Letter<Symbol>> = w.letters()[..pos].to_vec();
        shorter.extend_from_slice(&w.letters()[end..]);
        let h = insertion_history(hw, &Word::from_letters(shorter), pos, rel, false)?;
        return Ok(crate::smachine::inverse_history(&h));
    }
    let (before, after) = split_at(w, pos);
    cycle(&before, &before, &after, rel, &r, false)
}

/// The word obtained by one derivation step.
pub fn apply_step(hw: &Hardware, w: &Word, s: &DerivationStep) -> Result<Word, DeriveError> {
    let r = relator(hw, s.rel)?;
    if s.pos > w.len() {
        return Err(DeriveError::PositionOutOfRange { pos: s.pos, len: w.len() });
    }
    let mut letters = w.letters().to_vec();
    if s.delete {
        let end = s.pos + r.len();
        if end > letters.len() || letters[s.pos..end] != *r.letters() {
            return Err(DeriveError::DeletionMismatch(s.pos));
        }
        letters.drain(s.pos..end);
    } else {
        letters.splice(s.pos..s.pos, r.letters().iter().copied());
    }
    Ok(Word::from_letters(letters))
}

/// One step of a monoid derivation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DerivationStep {
    pub delete: bool,
    pub pos: usize,
    pub rel: u16,
}

impl DerivationStep {
    /// The step undoing this one.
    pub fn reversed(self) -> DerivationStep {
        DerivationStep {
            delete: !self.delete,
            ..self
        }
    }
}

/// Concatenated insertion histories for a derivation starting at `w0`.
/// Returns the history and the final word.
pub fn derivation_history(
    hw: &Hardware,
    w0: &Word,
    steps: &[DerivationStep],
) -> Result<(Vec<RuleId>, Word), DeriveError> {
    let mut w = w0.clone();
    let mut h = Vec::new();
    for (k, s) in steps.iter().enumerate() {
        let wrap = |e| DeriveError::Step {
            step: k,
            source: Box::new(e),
        };
        h.extend(insertion_history(hw, &w, s.pos, s.rel, s.delete).map_err(wrap)?);
        w = apply_step(hw, &w, s).map_err(wrap)?;
    }
    Ok((h, w))
}

/// Steps that undo `steps` when applied to their final word.
pub fn reverse_steps(steps: &[DerivationStep]) -> Vec<DerivationStep> {
    steps.iter().rev().map(|s| s.reversed()).collect()
}

fn free_reduce(h: Vec<RuleId>) -> Vec<RuleId> {
    let mut out: Vec<RuleId> = Vec::with_capacity(h.len());
    for id in h {
        if out.last() == Some(&id.inv()) {
            out.pop();
        } else {
            out.push(id);
        }
    }
    out
}

/// History of the bar machine taking `Σ̄(w)K₁(∅,1)` to `Σ̄(w′)K₁(∅,1)` with
/// `w′ = w u r u⁻¹` freely reduced. The history is freely reduced.
pub fn bar_conjugated_insertion(
    hw: &Hardware,
    w: &Word,
    u: &Word,
    rel: u16,
) -> Result<Vec<RuleId>, DeriveError> {
    letters_of(w)?;
    letters_of(u)?;
    if rel == 0 {
        return Ok(Vec::new());
    }
    let r = relator(hw, rel)?;
    let w = w.reduced();
    let u = u.reduced();
    // P moves right over w, then is conjugated by u: L-sector wu, P-sector u⁻¹.
    let lead = w.concat(&u);
    let left = lead.reduced();
    let right = u.inverse();
    Ok(free_reduce(cycle(&lead, &left, &right, rel, &r, true)?))
}

/// Whether `w` equals `Σ(v)^s K₁(∅,1)` (or its bar form) for some `v` and
/// `s ≥ 1`; returns `v`.
pub fn sigma_form(hw: &Hardware, w: &AdmissibleWord) -> Option<Word> {
    if w.coord != Coord::START {
        return None;
    }
    let per = hw.period();
    let t = w.states.len();
    if t < per + 1 || (t - 1) % per != 0 {
        return None;
    }
    let s = (t - 1) / per;
    // Block 3 carries a copy of v in both flavors.
    let p3 = hw.position(crate::symbol::Zone::new(crate::symbol::Kind::P, 3)).0;
    let inner = w.inners.get(p3)?;
    let v: Word = inner
        .letters()
        .iter()
        .map(|l| match l.sym {
            Symbol::Tape { i, .. } => Some(Letter {
                sym: Symbol::Gen(i),
                inv: l.inv,
            }),
            _ => None,
        })
        .collect::<Option<Word>>()?;
    let e = Word::new();
    let word = hw.canonical_word(&w.to_word(hw));
    // Identified letters hide the flavor, so both spellings are tried.
    [false, true]
        .into_iter()
        .any(|bar| {
            let Ok(one) = sigma_four(hw, [&e, &e, &v, &e], Coord::START, bar) else {
                return false;
            };
            let mut expect = Word::new();
            for _ in 0..s {
                expect.extend(&one);
            }
            expect.push(hw.state(
                crate::hardware::BaseLetter::pos(crate::symbol::Kind::K, 1),
                false,
                Coord::START,
            ));
            hw.canonical_word(&expect) == word
        })
        .then_some(v)
}

/// Breadth-first search for a computation reaching a word `Σ(v)^s K₁(∅,1)`
/// within `max_steps` rules. Rules are tried in the machine's table order.
pub fn accept_bfs(m: &Machine, w: &AdmissibleWord, max_steps: usize) -> Option<Trace> {
    let hw = m.hardware();
    let rules = m.rule_ids();
    let mut seen: HashSet<String> = HashSet::new();
    let mut nodes: Vec<(AdmissibleWord, Option<(usize, RuleId)>)> = vec![(w.clone(), None)];
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    seen.insert(w.display(hw));
    queue.push_back((0, 0));
    while let Some((k, depth)) = queue.pop_front() {
        if sigma_form(hw, &nodes[k].0).is_some() {
            let mut path = Vec::new();
            let mut cur = k;
            while let Some((parent, _)) = nodes[cur].1 {
                path.push(cur);
                cur = parent;
            }
            path.reverse();
            let mut words = vec![nodes[0].0.clone()];
            words.extend(path.iter().map(|&i| nodes[i].0.clone()));
            return Some(Trace {
                words,
                failure: None,
            });
        }
        if depth == max_steps {
            continue;
        }
        for &id in &rules {
            if let Ok(next) = m.apply(id, &nodes[k].0) {
                if seen.insert(next.display(hw)) {
                    nodes.push((next, Some((k, id))));
                    queue.push_back((nodes.len() - 1, depth + 1));
                }
            }
        }
    }
    None
}

/// The rules along a trace found by [`accept_bfs`], recovered by matching
/// consecutive words.
pub fn trace_history(m: &Machine, trace: &Trace) -> Vec<RuleId> {
    trace
        .words
        .windows(2)
        .filter_map(|p| {
            m.rule_ids()
                .into_iter()
                .find(|&id| m.apply(id, &p[0]).map(|x| x == p[1]).unwrap_or(false))
        })
        .collect()
}
