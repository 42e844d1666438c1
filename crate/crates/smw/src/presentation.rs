//! Compilation of the machines into a group presentation, the projection
//! homomorphisms onto the plain generators, index shifts, and the
//! presentation file format.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::hardware::{hub, BaseLetter, Hardware};
use crate::smachine::{rule_keys, Rule};
use crate::symbol::{parse_rule, parse_word, Coord, Kind, RuleId, RuleKey, Symbol, TokenError, Zone};
use crate::words::{least_rotation, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    MainThetaK,
    AuxThetaA,
    AuxAX,
    AuxKX,
    BarMainThetaK,
    BarAuxThetaA,
    Hub,
}

impl RelationKind {
    pub const ALL: [RelationKind; 7] = [
        RelationKind::MainThetaK,
        RelationKind::AuxThetaA,
        RelationKind::AuxAX,
        RelationKind::AuxKX,
        RelationKind::BarMainThetaK,
        RelationKind::BarAuxThetaA,
        RelationKind::Hub,
    ];

    pub fn name(self) -> &'static str {
        match self {
            RelationKind::MainThetaK => "MainThetaK",
            RelationKind::AuxThetaA => "AuxThetaA",
            RelationKind::AuxAX => "AuxAX",
            RelationKind::AuxKX => "AuxKX",
            RelationKind::BarMainThetaK => "BarMainThetaK",
            RelationKind::BarAuxThetaA => "BarAuxThetaA",
            RelationKind::Hub => "Hub",
        }
    }

    pub fn from_name(s: &str) -> Option<RelationKind> {
        RelationKind::ALL.into_iter().find(|k| k.name() == s)
    }

    fn barred(self) -> Option<RelationKind> {
        match self {
            RelationKind::MainThetaK => Some(RelationKind::BarMainThetaK),
            RelationKind::AuxThetaA => Some(RelationKind::BarAuxThetaA),
            _ => None,
        }
    }
}

impl fmt::Display for RelationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A defining relator, stored in normal form: the least rotation of the
/// relator or of its inverse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    pub kind: RelationKind,
    pub relator: Word,
    pub rule: Option<RuleId>,
    pub zone: Option<Zone>,
}

/// Cyclic reduction followed by the least rotation of the word or its
/// inverse.
pub fn normalize(w: &Word) -> Word {
    let mut l: Vec<Letter<Symbol>> = w.reduced().into_letters();
    while l.len() > 1 && l[0].cancels(&l[l.len() - 1]) {
        l.pop();
        l.remove(0);
    }
    let rot = |v: &[Letter<Symbol>]| -> Vec<Letter<Symbol>> {
        if v.is_empty() {
            return Vec::new();
        }
        let k = least_rotation(v);
        v[k..].iter().chain(v[..k].iter()).copied().collect()
    };
    let a = rot(&l);
    let inv: Vec<Letter<Symbol>> = l.iter().rev().map(Letter::inverse).collect();
    let b = rot(&inv);
    Word::from_letters(a.min(b))
}

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("letter {0} is outside the domain of the map")]
    Domain(String),
    #[error("letters carry different indices")]
    NonUniformIndex,
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("line {line}: {source}")]
    Token {
        line: usize,
        #[source]
        source: TokenError,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// A compiled presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub n: u16,
    pub ee_file: Option<String>,
    pub relations: Vec<Relation>,
}

impl Presentation {
    /// All generators occurring in the relators.
    pub fn inventory(&self) -> BTreeSet<Symbol> {
        self.relations
            .iter()
            .flat_map(|r| r.relator.letters().iter().map(|l| l.sym))
            .collect()
    }

    pub fn count(&self, kind: RelationKind) -> usize {
        self.relations.iter().filter(|r| r.kind == kind).count()
    }

    /// Per-kind counts in the fixed kind order.
    pub fn stats(&self) -> Vec<(RelationKind, usize)> {
        RelationKind::ALL.iter().map(|&k| (k, self.count(k))).collect()
    }

    /// One `KIND count` line per kind, then the total.
    pub fn stats_report(&self) -> String {
        let mut s = String::new();
        for (kind, count) in self.stats() {
            s.push_str(&format!("{kind} {count}\n"));
        }
        s.push_str(&format!("Total {}\n", self.relations.len()));
        s
    }

    pub fn write_to(&self, out: &mut impl Write) -> io::Result<()> {
        writeln!(out, "n: {}", self.n)?;
        if let Some(f) = &self.ee_file {
            writeln!(out, "ee-file: {f}")?;
        }
        for r in &self.relations {
            write!(out, "relator {}", r.kind)?;
            if let Some(rule) = r.rule {
                write!(out, " {rule}")?;
            }
            if let Some(z) = r.zone {
                write!(out, " {z}")?;
            }
            writeln!(out, ": {}", r.relator)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn read_from(input: impl BufRead) -> Result<Presentation, PresentationError> {
        let mut n = None;
        let mut ee_file = None;
        let mut relations = Vec::new();
        for (k, line) in input.lines().enumerate() {
            let line_no = k + 1;
            let line = line?;
            let text = line.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let syntax = |reason: &str| PresentationError::Syntax {
                line: line_no,
                reason: reason.to_string(),
            };
            let (head, body) = text.split_once(':').ok_or_else(|| syntax("missing `:`"))?;
            let head = head.trim();
            let body = body.trim();
            if head == "n" {
                n = Some(body.parse::<u16>().map_err(|_| syntax("bad n"))?);
                continue;
            }
            if head == "ee-file" {
                ee_file = Some(body.to_string());
                continue;
            }
            // Rule tokens contain `:`-free text, so the first `:` ends the head.
            let mut parts = head.split_whitespace();
            if parts.next() != Some("relator") {
                return Err(syntax("expected `relator`"));
            }
            let kind = parts
                .next()
                .and_then(RelationKind::from_name)
                .ok_or_else(|| syntax("unknown relation kind"))?;
            let token = |source| PresentationError::Token {
                line: line_no,
                source,
            };
            let rule = parts.next().map(parse_rule).transpose().map_err(token)?;
            let zone = parts
                .next()
                .map(|z| parse_zone(z).ok_or_else(|| syntax("bad zone")))
                .transpose()?;
            let relator = parse_word(body).map_err(token)?;
            relations.push(Relation {
                kind,
                relator,
                rule,
                zone,
            });
        }
        Ok(Presentation {
            n: n.ok_or(PresentationError::Syntax {
                line: 0,
                reason: "missing `n:` header".into(),
            })?,
            ee_file,
            relations,
        })
    }
}

/// Normal-form lookup of the relators of a presentation.
#[derive(Clone, Debug)]
pub struct RelatorIndex {
    presentation: Presentation,
    map: HashMap<Word, usize>,
    max_len: usize,
}

impl RelatorIndex {
    pub fn new(presentation: Presentation) -> Self {
        let mut map = HashMap::new();
        let mut max_len = 0;
        for (k, r) in presentation.relations.iter().enumerate() {
            map.entry(normalize(&r.relator)).or_insert(k);
            max_len = max_len.max(r.relator.len());
        }
        RelatorIndex {
            presentation,
            map,
            max_len,
        }
    }

    pub fn presentation(&self) -> &Presentation {
        &self.presentation
    }

    /// Index of the relation whose relator is a cyclic shift of `w` or of
    /// its inverse.
    pub fn lookup(&self, w: &Word) -> Option<usize> {
        self.map.get(&normalize(w)).copied()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.lookup(w).is_some()
    }

    pub fn relation(&self, k: usize) -> Option<&Relation> {
        self.presentation.relations.get(k)
    }

    pub fn max_relator_len(&self) -> usize {
        self.max_len
    }
}

fn parse_zone(s: &str) -> Option<Zone> {
    let mut c = s.chars();
    let kind = match c.next()? {
        'K' => Kind::K,
        'L' => Kind::L,
        'P' => Kind::P,
        'R' => Kind::R,
        _ => return None,
    };
    let j: u16 = c.as_str().parse().ok().filter(|&j| j > 0)?;
    Some(Zone::new(kind, j))
}

fn letter(sym: Symbol, inv: bool) -> Letter<Symbol> {
    Letter { sym, inv }
}

pub fn x_of(i: u16, zone: Zone, rule: RuleKey) -> Symbol {
    Symbol::X { i, zone, rule }
}

/// `α_τ` on words over tape and state letters; `τ⁻¹` inverts `x`-letters.
pub fn alpha(rule: RuleId, w: &Word) -> Result<Word, PresentationError> {
    if rule.bar {
        return Err(PresentationError::Domain(rule.to_string()));
    }
    let xinv = rule.inverse;
    let mut out = Word::new();
    for l in w.letters() {
        match l.sym {
            Symbol::Tape { i, zone, bar: false } => {
                let a = letter(l.sym, false);
                let x = letter(x_of(i, zone, rule.key), xinv);
                let image: Vec<Letter<Symbol>> = match zone.kind {
                    Kind::K | Kind::L => vec![x, a],
                    Kind::P => vec![a],
                    Kind::R => vec![a, x],
                };
                if l.inv {
                    for y in image.iter().rev() {
                        out.push(y.inverse());
                    }
                } else {
                    for y in image {
                        out.push(y);
                    }
                }
            }
            Symbol::State { bar: false, .. } => out.push(*l),
            _ => return Err(PresentationError::Domain(l.to_string())),
        }
    }
    Ok(out)
}

/// `δ`: tape letters of either alphabet go to their plain generator, all
/// other letters to the identity; the result is freely reduced.
pub fn delta(w: &Word) -> Word {
    w.letters()
        .iter()
        .filter_map(|l| match l.sym {
            Symbol::Tape { i, .. } | Symbol::Gen(i) => Some(letter(Symbol::Gen(i), l.inv)),
            _ => None,
        })
        .collect::<Word>()
        .reduced()
}

/// `β`, defined on tape letters; it agrees with [`delta`].
pub fn beta(w: &Word) -> Word {
    delta(w)
}

/// `γ`, defined on tape and state letters; it agrees with [`delta`].
pub fn gamma(w: &Word) -> Word {
    delta(w)
}

/// Replaces the index `j` of every letter by `to`. In bar mode with
/// `to = 1` tape letters are removed as well.
pub fn shift_index(w: &Word, to: u16, bar_mode: bool) -> Result<Word, PresentationError> {
    let mut index = None;
    for l in w.letters() {
        if let Some(j) = l.sym.index() {
            match index {
                None => index = Some(j),
                Some(j0) if j0 != j => return Err(PresentationError::NonUniformIndex),
                _ => {}
            }
        }
    }
    Ok(w.letters()
        .iter()
        .filter(|l| !(bar_mode && to == 1 && l.sym.is_tape()))
        .map(|l| letter(l.sym.with_index(to), l.inv))
        .collect())
}

/// The (a,x)-relator `a x a⁻¹ x⁻⁴` (K and L zones) or `a⁻¹ x a x⁻⁴`
/// (R zones) for `a = a_i(zone)` and `x = x(a_b(zone), rule)`.
pub fn ax_relator(hw: &Hardware, rule: RuleKey, zone: Zone, i: u16, b: u16) -> Word {
    let a = hw.tape(i, zone, false);
    let x = x_of(b, zone, rule);
    let inner = zone.kind == Kind::R;
    let mut rel = Word::new();
    rel.push(letter(a, inner));
    rel.push(letter(x, false));
    rel.push(letter(a, !inner));
    for _ in 0..4 {
        rel.push(letter(x, true));
    }
    rel
}

/// The (k,x)-relator `z x(b) z⁻¹ x(b')⁻ᵉ` for a positive K or L letter `z`,
/// where `b` lies in the zone right of `z`, `b'` is its copy on the left,
/// and `e` is 1 for K and 4 for L.
pub fn kx_relator(hw: &Hardware, rule: RuleKey, z: Zone, coord: Coord, b: u16) -> Word {
    let power = if z.kind == Kind::K { 1 } else { 4 };
    let k = hw.state(BaseLetter::new(z, false), false, coord);
    let mut rel = Word::new();
    rel.push(k);
    rel.push(letter(x_of(b, hw.right_zone(z), rule), false));
    rel.push(k.inverse());
    for _ in 0..power {
        rel.push(letter(x_of(b, hw.left_zone(z), rule), true));
    }
    rel
}

fn theta(rule: RuleKey, zone: Zone) -> Symbol {
    Symbol::Theta {
        rule,
        zone,
        bar: false,
    }
}

/// Bar image of an unbarred relator: bar every letter, drop `x`-letters and
/// tape letters of block 1, and respect identified letters.
fn barred(hw: &Hardware, w: &Word) -> Word {
    w.letters()
        .iter()
        .filter_map(|l| {
            let sym = match l.sym {
                Symbol::X { .. } => return None,
                Symbol::Tape { zone, .. } if zone.j == 1 => return None,
                Symbol::Tape { i, zone, .. } => hw.tape(i, zone, true),
                Symbol::State { zone, coord, .. } => hw.canonical(Symbol::State {
                    zone,
                    bar: true,
                    coord,
                }),
                Symbol::Theta { rule, zone, .. } => Symbol::Theta {
                    rule,
                    zone,
                    bar: true,
                },
                other => other,
            };
            Some(letter(sym, l.inv))
        })
        .collect()
}

fn all_coords(hw: &Hardware) -> Vec<Coord> {
    hw.ee()
        .relator_refs()
        .flat_map(|r| (1..=5u8).map(move |w| Coord::new(r, w)))
        .collect()
}

/// Emits the relations of both machines and the hub.
pub fn emit(hw: &Hardware) -> Presentation {
    let mut raw: Vec<Relation> = Vec::new();
    let mbar = hw.ee().mbar() as u16;
    let letters: Vec<Zone> = (0..hw.period()).map(|p| hw.base_at(p).zone).collect();
    let zones = hw.tape_zones();
    let coords = all_coords(hw);
    for key in rule_keys(hw) {
        let rule = Rule::new(hw, key, false);
        let id = rule.id();
        let (from, to) = id.transition();
        // Main relations, one per basic letter.
        for &z in &letters {
            let left = hw.left_zone(z);
            let right = hw.right_zone(z);
            let (v, u) = match rule.action(z.kind) {
                Some((v, u)) => (hw.in_zone(v, left, false), hw.in_zone(u, right, false)),
                None => (Word::new(), Word::new()),
            };
            let back = id.inv();
            let av = alpha(back, &v).expect("unbarred tape word");
            let au = alpha(back, &u).expect("unbarred tape word");
            let mut rel = Word::new();
            rel.push(letter(theta(key, left), true));
            rel.push(hw.state(BaseLetter::new(z, false), false, from));
            rel.push(letter(theta(key, right), false));
            rel.extend(&au.inverse());
            rel.push(hw.state(BaseLetter::new(z, false), false, to).inverse());
            rel.extend(&av.inverse());
            raw.push(Relation {
                kind: RelationKind::MainThetaK,
                relator: rel,
                rule: Some(id),
                zone: Some(z),
            });
        }
        // Auxiliary θ-relations on unlocked zones.
        for &zone in &zones {
            if rule.locks(zone.kind) {
                continue;
            }
            for i in 1..=mbar {
                let a = Word::letter(hw.tape(i, zone, false));
                let mut rel = Word::new();
                rel.push(letter(theta(key, zone), true));
                rel.extend(&alpha(id, &a).expect("tape letter"));
                rel.push(letter(theta(key, zone), false));
                rel.extend(&alpha(id.inv(), &a).expect("tape letter").inverse());
                raw.push(Relation {
                    kind: RelationKind::AuxThetaA,
                    relator: rel,
                    rule: Some(id),
                    zone: Some(zone),
                });
            }
        }
        // (a,x)-relations.
        for &zone in zones.iter().filter(|z| z.kind != Kind::P) {
            for i in 1..=mbar {
                for b in 1..=mbar {
                    raw.push(Relation {
                        kind: RelationKind::AuxAX,
                        relator: ax_relator(hw, key, zone, i, b),
                        rule: Some(id),
                        zone: Some(zone),
                    });
                }
            }
        }
        // (k,x)-relations for K and L letters.
        for &z in letters.iter().filter(|z| matches!(z.kind, Kind::K | Kind::L)) {
            for &c in &coords {
                for b in 1..=mbar {
                    raw.push(Relation {
                        kind: RelationKind::AuxKX,
                        relator: kx_relator(hw, key, z, c, b),
                        rule: Some(id),
                        zone: Some(z),
                    });
                }
            }
        }
    }
    let mut bar_raw = Vec::new();
    for r in &raw {
        if let Some(kind) = r.kind.barred() {
            let relator = barred(hw, &r.relator);
            bar_raw.push(Relation {
                kind,
                relator,
                rule: r.rule.map(|id| RuleId { bar: true, ..id }),
                zone: r.zone,
            });
        }
    }
    raw.extend(bar_raw);
    raw.push(Relation {
        kind: RelationKind::Hub,
        relator: hub(hw),
        rule: None,
        zone: None,
    });
    let mut seen: HashSet<Word> = HashSet::new();
    let mut relations = Vec::new();
    for mut r in raw {
        r.relator = normalize(&r.relator);
        if r.relator.is_empty() || !seen.insert(r.relator.clone()) {
            continue;
        }
        relations.push(r);
    }
    Presentation {
        n: hw.n(),
        ee_file: None,
        relations,
    }
}
