//! Rules of the three machines, rule application with locking, runs, brief
//! histories and the length measures used by the combinatorial laws.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::hardware::{parse_admissible, AdmissibleError, AdmissibleWord, BaseLetter, Flavor, Hardware, StateLetter};
use crate::symbol::{Coord, Family, Kind, RuleId, RuleKey, Symbol};
use crate::words::{Letter, Word};

/// Why a rule cannot be applied to a word.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Diagnosis {
    #[error("rule {0} is not in the machine")]
    UnknownRule(RuleId),
    #[error("word has coordinates ({found}), rule expects ({expected})")]
    CoordMismatch { expected: Coord, found: Coord },
    #[error("rule and word use different alphabets")]
    AlphabetMismatch,
    #[error("locked sector {sector} (zone {zone}) is not empty")]
    LockedSectorNonEmpty { sector: usize, zone: crate::symbol::Zone },
    #[error("locked sector {sector} (zone {zone}) is a turnaround")]
    ForbiddenSectorShape { sector: usize, zone: crate::symbol::Zone },
    #[error("result is not admissible: {0}")]
    ResultNotAdmissible(AdmissibleError),
}

/// A positive rule `[z → v z u, …; r → r′, ω → ω′]`.
///
/// `actions` gives, per state-letter kind, the words `v` and `u` over the
/// plain generators; `locks` lists the zone kinds whose sectors must be
/// empty. A locked `K` zone is the `←L_j L_j` sector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub key: RuleKey,
    pub bar: bool,
    locks: Vec<Kind>,
    actions: Vec<(Kind, Word, Word)>,
}

fn gen(i: u16) -> Word {
    Word::letter(Symbol::Gen(i))
}

impl Rule {
    /// The positive rule named by `key`, unbarred or barred.
    pub fn new(hw: &Hardware, key: RuleKey, bar: bool) -> Rule {
        use Kind::*;
        let a = gen(key.letter);
        let (locks, actions) = match key.family {
            Family::F1 => (vec![K, R], vec![(P, a.clone(), a.inverse())]),
            Family::F12 | Family::F51 => (vec![K, R], vec![]),
            Family::F2 => (vec![R], vec![(L, a.clone(), a.inverse())]),
            Family::F23 => (vec![L, R], vec![]),
            Family::F3 => (vec![L], vec![(R, a.inverse(), a.clone())]),
            Family::F34 => {
                let r = crate::hardware::gen_word(hw.ee().relator(key.rel));
                (vec![L, P], vec![(L, r, Word::new())])
            }
            Family::F4 => (vec![P], vec![(L, a.clone(), a.inverse())]),
            Family::F45 => (vec![K, P], vec![]),
            Family::F5 => (vec![K], vec![(R, a.inverse(), a.clone())]),
        };
        Rule {
            key,
            bar,
            locks,
            actions,
        }
    }

    pub fn id(&self) -> RuleId {
        RuleId::positive(self.key, self.bar)
    }

    pub fn locks(&self, kind: Kind) -> bool {
        self.locks.contains(&kind)
    }

    pub fn locked_kinds(&self) -> &[Kind] {
        &self.locks
    }

    /// `(v, u)` over the plain generators for letters of the given kind.
    pub fn action(&self, kind: Kind) -> Option<(&Word, &Word)> {
        self.actions
            .iter()
            .find(|(k, _, _)| *k == kind)
            .map(|(_, v, u)| (v, u))
    }
}

/// One of the machines built over a fixed hardware.
#[derive(Debug, Clone)]
pub struct Machine {
    hw: Hardware,
    flavor: Flavor,
    rules: BTreeMap<(RuleKey, bool), Rule>,
}

/// Positive rule keys of the unbarred machine, in family order.
pub fn rule_keys(hw: &Hardware) -> Vec<RuleKey> {
    let ee = hw.ee();
    let mut keys = Vec::new();
    for family in Family::ALL {
        for rel in ee.relator_refs() {
            let allowed = match family {
                Family::F1 => rel == 0,
                Family::F12 | Family::F34 => rel != 0,
                _ => true,
            };
            if !allowed {
                continue;
            }
            if family.has_letter() {
                for i in 1..=ee.mbar() as u16 {
                    keys.push(RuleKey::new(family, rel, i));
                }
            } else {
                keys.push(RuleKey::new(family, rel, 0));
            }
        }
    }
    keys
}

/// Builds the machine of the given flavor.
pub fn build_machine(hw: &Hardware, flavor: Flavor) -> Machine {
    let bars: &[bool] = match flavor {
        Flavor::Strict => &[false],
        Flavor::Bar => &[true],
        Flavor::Mixed => &[false, true],
    };
    let mut rules = BTreeMap::new();
    for &bar in bars {
        for key in rule_keys(hw) {
            rules.insert((key, bar), Rule::new(hw, key, bar));
        }
    }
    Machine {
        hw: hw.clone(),
        flavor,
        rules,
    }
}

/// A run: the words visited and, if a step failed, its index and reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub words: Vec<AdmissibleWord>,
    pub failure: Option<(usize, Diagnosis)>,
}

impl Trace {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none()
    }

    pub fn last(&self) -> &AdmissibleWord {
        self.words.last().expect("a trace starts with a word")
    }
}

impl Machine {
    pub fn hardware(&self) -> &Hardware {
        &self.hw
    }

    pub fn flavor(&self) -> Flavor {
        self.flavor
    }

    pub fn positive_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.values()
    }

    /// Every rule of the machine, positive ones first.
    pub fn rule_ids(&self) -> Vec<RuleId> {
        let pos: Vec<RuleId> = self.rules.values().map(Rule::id).collect();
        pos.iter().copied().chain(pos.iter().map(|r| r.inv())).collect()
    }

    pub fn rule(&self, id: RuleId) -> Option<&Rule> {
        self.rules.get(&(id.key, id.bar))
    }

    pub fn contains(&self, id: RuleId) -> bool {
        self.rule(id).is_some()
    }

    pub fn parse(&self, w: &Word) -> Result<AdmissibleWord, AdmissibleError> {
        parse_admissible(&self.hw, w, self.flavor)
    }

    /// Tape words `(v, u)` attached to the positive letter `z` by the rule,
    /// placed in their zones; bar rules lose letters of block 1.
    pub fn positive_flanks(&self, id: RuleId, zone: crate::symbol::Zone) -> (Word, Word) {
        let Some(rule) = self.rule(id) else {
            return (Word::new(), Word::new());
        };
        let Some((v, u)) = rule.action(zone.kind) else {
            return (Word::new(), Word::new());
        };
        let place = |w: &Word, z: crate::symbol::Zone| {
            if id.bar && z.j == 1 {
                Word::new()
            } else {
                self.hw.in_zone(w, z, id.bar)
            }
        };
        let v = place(v, self.hw.left_zone(zone));
        let u = place(u, self.hw.right_zone(zone));
        if id.inverse {
            (v.inverse(), u.inverse())
        } else {
            (v, u)
        }
    }

    /// Words written to the left and right of the signed letter `y`.
    pub fn flanks(&self, id: RuleId, y: BaseLetter) -> (Word, Word) {
        let (v, u) = self.positive_flanks(id, y.zone);
        if y.inv {
            (u.inverse(), v.inverse())
        } else {
            (v, u)
        }
    }

    fn check_alphabet(&self, id: RuleId, w: &AdmissibleWord) -> Result<(), Diagnosis> {
        let word = w.to_word(&self.hw);
        let ok = word.letters().iter().all(|l| {
            if id.bar {
                l.sym.is_bar() || self.hw.identified(&l.sym)
            } else {
                !l.sym.is_bar()
            }
        });
        if ok {
            Ok(())
        } else {
            Err(Diagnosis::AlphabetMismatch)
        }
    }

    fn check_locks(&self, rule: &Rule, w: &AdmissibleWord) -> Result<(), Diagnosis> {
        for (k, inner) in w.inners.iter().enumerate() {
            let zone = self.hw.zone_after(w.states[k].base);
            if !rule.locks(zone.kind) {
                continue;
            }
            if w.states[k + 1].base == w.states[k].base.inverse() {
                return Err(Diagnosis::ForbiddenSectorShape { sector: k, zone });
            }
            if !inner.is_empty() {
                return Err(Diagnosis::LockedSectorNonEmpty { sector: k, zone });
            }
        }
        Ok(())
    }

    fn rewrite(&self, id: RuleId, w: &AdmissibleWord) -> AdmissibleWord {
        let (_, target) = id.transition();
        let flanks: Vec<(Word, Word)> = w.states.iter().map(|s| self.flanks(id, s.base)).collect();
        let inners = w
            .inners
            .iter()
            .enumerate()
            .map(|(k, inner)| {
                let mut x = flanks[k].1.clone();
                x.extend(inner);
                x.extend(&flanks[k + 1].0);
                x.reduced()
            })
            .collect();
        AdmissibleWord {
            flavor: self.flavor,
            coord: target,
            states: w
                .states
                .iter()
                .map(|s| StateLetter {
                    base: s.base,
                    bar: id.bar && !target.is_start(),
                })
                .collect(),
            inners,
        }
    }

    /// Checks applicability; on success returns the result.
    pub fn apply(&self, id: RuleId, w: &AdmissibleWord) -> Result<AdmissibleWord, Diagnosis> {
        let rule = self.rule(id).ok_or(Diagnosis::UnknownRule(id))?;
        let (source, _) = id.transition();
        if w.coord != source {
            return Err(Diagnosis::CoordMismatch {
                expected: source,
                found: w.coord,
            });
        }
        self.check_alphabet(id, w)?;
        self.check_locks(rule, w)?;
        let out = self.rewrite(id, w);
        self.parse(&out.to_word(&self.hw))
            .map_err(Diagnosis::ResultNotAdmissible)
    }

    pub fn applicable(&self, id: RuleId, w: &AdmissibleWord) -> Result<(), Diagnosis> {
        self.apply(id, w).map(|_| ())
    }

    /// Rules applicable to `w`, in table order.
    pub fn applicable_rules(&self, w: &AdmissibleWord) -> Vec<RuleId> {
        self.rule_ids()
            .into_iter()
            .filter(|&id| self.applicable(id, w).is_ok())
            .collect()
    }

    pub fn run(&self, w: &AdmissibleWord, h: &[RuleId]) -> Trace {
        let mut words = vec![w.clone()];
        for (t, &id) in h.iter().enumerate() {
            match self.apply(id, words.last().expect("non-empty")) {
                Ok(next) => words.push(next),
                Err(d) => {
                    return Trace {
                        words,
                        failure: Some((t, d)),
                    }
                }
            }
        }
        Trace {
            words,
            failure: None,
        }
    }

    /// The words `u`, `v` with `y W′ y′ ∘ h = y u W′ v y′` for every inner
    /// part `W′` of a sector with letters `y`, `y′` at coordinates `coord`.
    pub fn sector_growth(
        &self,
        left: BaseLetter,
        right: BaseLetter,
        coord: Coord,
        h: &[RuleId],
    ) -> Result<(Word, Word), Diagnosis> {
        let mut coord = coord;
        let mut u = Word::new();
        let mut v = Word::new();
        for &id in h {
            if !self.contains(id) {
                return Err(Diagnosis::UnknownRule(id));
            }
            let (source, target) = id.transition();
            if coord != source {
                return Err(Diagnosis::CoordMismatch {
                    expected: source,
                    found: coord,
                });
            }
            u = self.flanks(id, left).1.concat(&u).reduced();
            v = v.concat(&self.flanks(id, right).0).reduced();
            coord = target;
        }
        Ok((u, v))
    }
}

/// Whether `h` is freely reduced as a word over the rule alphabet.
pub fn is_reduced_history(h: &[RuleId]) -> bool {
    h.windows(2).all(|p| p[1] != p[0].inv())
}

pub fn history_to_string(h: &[RuleId]) -> String {
    h.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// The inverse computation history.
pub fn inverse_history(h: &[RuleId]) -> Vec<RuleId> {
    h.iter().rev().map(|r| r.inv()).collect()
}

/// `br(h)`: one symbol per transition rule and per age.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BriefHistory(pub Vec<Family>);

impl fmt::Display for BriefHistory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.0 {
            write!(f, "({s})")?;
        }
        Ok(())
    }
}

/// Between two transition rules the age is emitted even when it is empty;
/// its family is read from the phase the first transition leads to.
pub fn brief_history(h: &[RuleId]) -> BriefHistory {
    let mut out: Vec<Family> = Vec::new();
    let mut in_age: Option<Family> = None;
    let mut after_transition: Option<RuleId> = None;
    for r in h {
        let f = r.family();
        if f.is_transition() {
            if let Some(g) = after_transition {
                out.push(age_family(g.transition().1.omega));
            }
            out.push(f);
            in_age = None;
            after_transition = Some(*r);
            continue;
        }
        after_transition = None;
        if in_age != Some(f) {
            out.push(f);
            in_age = Some(f);
        }
    }
    BriefHistory(out)
}

fn age_family(phase: u8) -> Family {
    match phase {
        1 => Family::F1,
        2 => Family::F2,
        3 => Family::F3,
        4 => Family::F4,
        _ => Family::F5,
    }
}

/// The historical period `(12)(2)(23)(3)(34)(4)(45)(5)(51)`.
pub const HISTORICAL_PERIOD: [Family; 9] = [
    Family::F12,
    Family::F2,
    Family::F23,
    Family::F3,
    Family::F34,
    Family::F4,
    Family::F45,
    Family::F5,
    Family::F51,
];

/// Whether `b` is a subword of `f₀ h₁ f₁ … h_s f_s` with historical periods
/// `h_i` and (possibly empty) ages `f_i` of `(1)`.
pub fn is_historical_form(b: &BriefHistory) -> bool {
    // Nodes 0..9 walk the period forward, 9..18 backward, 18 is an age of (1).
    const AGE: usize = 18;
    let label = |n: usize| match n {
        AGE => Family::F1,
        n if n < 9 => HISTORICAL_PERIOD[n],
        n => HISTORICAL_PERIOD[17 - n],
    };
    let next = |n: usize| -> Vec<usize> {
        match n {
            AGE => vec![0, 9],
            8 | 17 => vec![AGE, 0, 9],
            n => vec![n + 1],
        }
    };
    let mut live: Vec<usize> = (0..=AGE).collect();
    for (k, &sym) in b.0.iter().enumerate() {
        if k > 0 {
            let mut succ: Vec<usize> = live.iter().flat_map(|&n| next(n)).collect();
            succ.sort_unstable();
            succ.dedup();
            live = succ;
        }
        live.retain(|&n| label(n) == sym);
        if live.is_empty() {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HistoryError {
    #[error("prefix length {t} exceeds history length {len}")]
    OutOfRange { t: usize, len: usize },
    #[error("phase {0} has no rule letters")]
    BadPhase(u8),
    #[error("phase 1 rules use the empty relator")]
    PhaseOneRelator,
    #[error("expected a word over the plain generators")]
    NotGeneratorWord,
}

/// `h[t]`, the prefix of length `t`.
pub fn prefix(h: &[RuleId], t: usize) -> Result<&[RuleId], HistoryError> {
    h.get(..t).ok_or(HistoryError::OutOfRange { t, len: h.len() })
}

/// Number of `(34)` rules in `h[t]`.
pub fn s34_count(h: &[RuleId], t: usize) -> Result<usize, HistoryError> {
    Ok(prefix(h, t)?
        .iter()
        .filter(|r| r.family() == Family::F34)
        .count())
}

/// Positive minus negative occurrences of tape letters.
pub fn diff(w: &Word) -> i64 {
    w.letters()
        .iter()
        .filter(|l| l.sym.is_tape())
        .map(|l| if l.inv { -1 } else { 1 })
        .sum()
}

/// A word of bar rules of phase `g` copying `w` letter for letter. Applied
/// to a word at coordinates `(r, g)` it multiplies every active state letter
/// `z` to `w z w⁻¹` in the corresponding alphabets.
pub fn bar_copy(w: &Word, g: u8, rel: u16) -> Result<Vec<RuleId>, HistoryError> {
    let family = match g {
        1 => Family::F1,
        2 => Family::F2,
        3 => Family::F3,
        4 => Family::F4,
        5 => Family::F5,
        _ => return Err(HistoryError::BadPhase(g)),
    };
    if g == 1 && rel != 0 {
        return Err(HistoryError::PhaseOneRelator);
    }
    // R-moving phases conjugate by a⁻¹, so letters map to inverse rules.
    let flip = matches!(family, Family::F3 | Family::F5);
    w.letters()
        .iter()
        .map(|l| match l.sym {
            Symbol::Gen(i) => {
                let id = RuleId::positive(RuleKey::new(family, rel, i), true);
                Ok(if l.inv != flip { id.inv() } else { id })
            }
            _ => Err(HistoryError::NotGeneratorWord),
        })
        .collect()
}

/// Convenience: a letter of the plain generators.
pub fn gen_letter(i: u16, inv: bool) -> Letter<Symbol> {
    Letter {
        sym: Symbol::Gen(i),
        inv,
    }
}
