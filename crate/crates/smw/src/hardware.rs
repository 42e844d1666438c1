//! Static hardware: the base word, the hub, tape zones, the auxiliary
//! presentation, and admissible words for the three machine flavors.
//!
//! Positions `p` of the base word are taken modulo `4N`. Block `b` (with
//! `j = 2b + 1`) occupies positions `8b..8b+8` and reads
//! `K_j L_j P_j R_j K_{j+1}⁻¹ R_{j+1}⁻¹ P_{j+1}⁻¹ L_{j+1}⁻¹`. Gap `g` lies
//! between positions `g` and `g + 1`; every gap carries one tape zone.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::symbol::{Coord, Kind, Symbol, Zone};
use crate::words::{Letter, Word};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EeError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("generators must be listed as a1 .. aM in order")]
    BadGenerators,
    #[error("generator a{0} has no involution partner")]
    MissingPartner(u16),
    #[error("m = {m} exceeds the generator count {mbar}")]
    BadM { m: usize, mbar: usize },
    #[error("the empty relator is missing")]
    MissingEmptyRelator,
    #[error("relator {0} is missing")]
    MissingRelator(String),
    #[error("relator uses unknown generator a{0}")]
    UnknownGenerator(u16),
    #[error("duplicate relator {0}")]
    DuplicateRelator(String),
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// The auxiliary presentation: generators `a_1..a_m̄` with an involution
/// `a ↦ a′` and a finite list of positive relators including the empty one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EEPresentation {
    m: usize,
    mbar: usize,
    partner: Vec<u16>,
    relators: Vec<Vec<u16>>,
}

fn show_positive(r: &[u16]) -> String {
    if r.is_empty() {
        return "e".to_string();
    }
    r.iter().map(|i| format!("a{i}")).collect::<Vec<_>>().join(" ")
}

impl EEPresentation {
    /// Builds and validates a presentation. `relators` lists the non-empty
    /// relators; `partner[i - 1]` is the involution image of `a_i`.
    pub fn new(
        m: usize,
        partner: Vec<u16>,
        relators: Vec<Vec<u16>>,
    ) -> Result<Self, EeError> {
        let mbar = partner.len();
        if m > mbar {
            return Err(EeError::BadM { m, mbar });
        }
        for (k, &p) in partner.iter().enumerate() {
            let i = k as u16 + 1;
            if p == 0 || p as usize > mbar || partner[p as usize - 1] != i {
                return Err(EeError::MissingPartner(i));
            }
        }
        for r in &relators {
            if let Some(&bad) = r.iter().find(|&&i| i == 0 || i as usize > mbar) {
                return Err(EeError::UnknownGenerator(bad));
            }
        }
        let ee = EEPresentation {
            m,
            mbar,
            partner,
            relators,
        };
        for (k, r) in ee.relators.iter().enumerate() {
            if r.is_empty() {
                return Err(EeError::Syntax {
                    line: 0,
                    reason: "empty relator listed twice".into(),
                });
            }
            if ee.relators[..k].contains(r) {
                return Err(EeError::DuplicateRelator(show_positive(r)));
            }
        }
        for i in 1..=mbar as u16 {
            let p = ee.partner(i);
            for r in [vec![i, p], vec![p, i]] {
                if ee.relator_index(&r).is_none() {
                    return Err(EeError::MissingRelator(show_positive(&r)));
                }
            }
        }
        for r in &ee.relators {
            let rp = ee.prime(r);
            if ee.relator_index(&rp).is_none() {
                return Err(EeError::MissingRelator(show_positive(&rp)));
            }
        }
        Ok(ee)
    }

    /// Parses the line-oriented text format.
    pub fn parse(text: &str) -> Result<Self, EeError> {
        let mut gens: Option<usize> = None;
        let mut pairs: Vec<(u16, u16)> = Vec::new();
        let mut m: Option<usize> = None;
        let mut relators = Vec::new();
        let mut saw_empty = false;
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let syntax = |reason: &str| EeError::Syntax {
                line,
                reason: reason.to_string(),
            };
            let (key, rest) = body.split_once(':').ok_or_else(|| syntax("expected `key: value`"))?;
            let items: Vec<&str> = rest.split_whitespace().collect();
            let gen = |t: &str| -> Result<u16, EeError> {
                t.strip_prefix('a')
                    .and_then(|d| d.parse::<u16>().ok())
                    .filter(|&i| i > 0)
                    .ok_or_else(|| syntax("expected a generator `aK`"))
            };
            match key.trim() {
                "generators" => {
                    let ids = items.iter().map(|t| gen(t)).collect::<Result<Vec<_>, _>>()?;
                    if ids.iter().enumerate().any(|(k, &i)| i as usize != k + 1) {
                        return Err(EeError::BadGenerators);
                    }
                    gens = Some(ids.len());
                }
                "involution" => {
                    if items.len() != 2 {
                        return Err(syntax("involution takes two generators"));
                    }
                    pairs.push((gen(items[0])?, gen(items[1])?));
                }
                "m" => {
                    let v = items
                        .first()
                        .and_then(|t| t.parse().ok())
                        .filter(|_| items.len() == 1)
                        .ok_or_else(|| syntax("m takes one number"))?;
                    m = Some(v);
                }
                "relator" => {
                    let r = items.iter().map(|t| gen(t)).collect::<Result<Vec<_>, _>>()?;
                    if r.is_empty() {
                        if saw_empty {
                            return Err(EeError::DuplicateRelator("e".into()));
                        }
                        saw_empty = true;
                    } else {
                        relators.push(r);
                    }
                }
                _ => return Err(syntax("unknown key")),
            }
        }
        let mbar = gens.ok_or(EeError::BadGenerators)?;
        let mut partner = vec![0u16; mbar];
        for (a, b) in pairs {
            for x in [a, b] {
                if x as usize > mbar {
                    return Err(EeError::UnknownGenerator(x));
                }
            }
            partner[a as usize - 1] = b;
            partner[b as usize - 1] = a;
        }
        if !saw_empty {
            return Err(EeError::MissingEmptyRelator);
        }
        let m = m.unwrap_or(mbar);
        EEPresentation::new(m, partner, relators)
    }

    pub fn load(path: &Path) -> Result<Self, EeError> {
        let text = std::fs::read_to_string(path).map_err(|e| EeError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        EEPresentation::parse(&text)
    }

    /// Number of generators of the embedded group.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Total number of generators.
    pub fn mbar(&self) -> usize {
        self.mbar
    }

    pub fn partner(&self, i: u16) -> u16 {
        self.partner[i as usize - 1]
    }

    /// Number of relators, the empty one included.
    pub fn relator_count(&self) -> usize {
        self.relators.len() + 1
    }

    /// Relator by reference: 0 is the empty relator, `k ≥ 1` the k-th
    /// non-empty one.
    pub fn relator(&self, k: u16) -> &[u16] {
        if k == 0 {
            &[]
        } else {
            &self.relators[k as usize - 1]
        }
    }

    pub fn relator_index(&self, r: &[u16]) -> Option<u16> {
        if r.is_empty() {
            return Some(0);
        }
        self.relators
            .iter()
            .position(|x| x == r)
            .map(|k| k as u16 + 1)
    }

    /// Maximal relator length.
    pub fn c(&self) -> usize {
        self.relators.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// `r′`: reverse `r` and replace every letter by its partner.
    pub fn prime(&self, r: &[u16]) -> Vec<u16> {
        r.iter().rev().map(|&i| self.partner(i)).collect()
    }

    /// Relator references `0..|Ē|`.
    pub fn relator_refs(&self) -> impl Iterator<Item = u16> {
        0..self.relator_count() as u16
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let gens: Vec<String> = (1..=self.mbar).map(|i| format!("a{i}")).collect();
        s.push_str(&format!("generators: {}\n", gens.join(" ")));
        for i in 1..=self.mbar as u16 {
            let p = self.partner(i);
            if i <= p {
                s.push_str(&format!("involution: a{i} a{p}\n"));
            }
        }
        s.push_str(&format!("m: {}\n", self.m));
        s.push_str("relator:\n");
        for r in &self.relators {
            s.push_str(&format!("relator: {}\n", show_positive(r)));
        }
        s
    }
}

/// A signed basic letter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseLetter {
    pub zone: Zone,
    pub inv: bool,
}

impl BaseLetter {
    pub fn new(zone: Zone, inv: bool) -> Self {
        BaseLetter { zone, inv }
    }

    pub fn pos(kind: Kind, j: u16) -> Self {
        BaseLetter::new(Zone::new(kind, j), false)
    }

    pub fn inverse(self) -> Self {
        BaseLetter {
            inv: !self.inv,
            ..self
        }
    }
}

impl fmt::Display for BaseLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.zone)?;
        if self.inv {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardwareError {
    #[error("N must be even and at least 8, got {0}")]
    BadN(usize),
    #[error("word is not positive")]
    NotPositive,
    #[error("expected a word over a1..a{mbar}: {reason}")]
    NotGeneratorWord { mbar: usize, reason: String },
}

/// Parameters shared by every construction: the presentation and `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hardware {
    n: u16,
    ee: EEPresentation,
}

impl Hardware {
    pub fn new(ee: EEPresentation, n: usize) -> Result<Self, HardwareError> {
        if n < 8 || n % 2 != 0 || n > u16::MAX as usize / 8 {
            return Err(HardwareError::BadN(n));
        }
        Ok(Hardware { n: n as u16, ee })
    }

    pub fn n(&self) -> u16 {
        self.n
    }

    pub fn ee(&self) -> &EEPresentation {
        &self.ee
    }

    /// Length of the base word, `4N`.
    pub fn period(&self) -> usize {
        4 * self.n as usize
    }

    /// Position of `z` in the base word and the sign it carries there.
    pub fn position(&self, z: Zone) -> (usize, bool) {
        let j = z.j as usize;
        if j % 2 == 1 {
            let b = (j - 1) / 2;
            let off = match z.kind {
                Kind::K => 0,
                Kind::L => 1,
                Kind::P => 2,
                Kind::R => 3,
            };
            (8 * b + off, false)
        } else {
            let b = (j - 2) / 2;
            let off = match z.kind {
                Kind::K => 4,
                Kind::R => 5,
                Kind::P => 6,
                Kind::L => 7,
            };
            (8 * b + off, true)
        }
    }

    /// The signed letter of the base word at position `p`.
    pub fn base_at(&self, p: usize) -> BaseLetter {
        let p = p % self.period();
        let b = p / 8;
        let j = 2 * b as u16 + 1;
        let (kind, j, inv) = match p % 8 {
            0 => (Kind::K, j, false),
            1 => (Kind::L, j, false),
            2 => (Kind::P, j, false),
            3 => (Kind::R, j, false),
            4 => (Kind::K, j + 1, true),
            5 => (Kind::R, j + 1, true),
            6 => (Kind::P, j + 1, true),
            _ => (Kind::L, j + 1, true),
        };
        BaseLetter::new(Zone::new(kind, j), inv)
    }

    /// Position and reading direction: `+1` when `y` is read along the base
    /// word, `-1` when read along its inverse.
    pub fn locate(&self, y: BaseLetter) -> (usize, isize) {
        let (p, neg) = self.position(y.zone);
        (p, if neg == y.inv { 1 } else { -1 })
    }

    fn letter_at(&self, p: isize, d: isize) -> BaseLetter {
        let per = self.period() as isize;
        let p = p.rem_euclid(per) as usize;
        let b = self.base_at(p);
        if d > 0 {
            b
        } else {
            b.inverse()
        }
    }

    /// `y₊`: the letter following `y` in the base word or its inverse.
    pub fn succ(&self, y: BaseLetter) -> BaseLetter {
        let (p, d) = self.locate(y);
        self.letter_at(p as isize + d, d)
    }

    /// `y₋`: the letter preceding `y`.
    pub fn pred(&self, y: BaseLetter) -> BaseLetter {
        let (p, d) = self.locate(y);
        self.letter_at(p as isize - d, d)
    }

    /// Gap immediately to the right of `y` as written.
    pub fn right_gap(&self, y: BaseLetter) -> usize {
        let (p, d) = self.locate(y);
        if d > 0 {
            p
        } else {
            (p + self.period() - 1) % self.period()
        }
    }

    /// Gap immediately to the left of `y` as written.
    pub fn left_gap(&self, y: BaseLetter) -> usize {
        let (p, d) = self.locate(y);
        if d > 0 {
            (p + self.period() - 1) % self.period()
        } else {
            p
        }
    }

    /// The tape zone carried by gap `g`.
    pub fn zone_of_gap(&self, g: usize) -> Zone {
        let g = g % self.period();
        let j = 2 * (g / 8) as u16 + 1;
        match g % 8 {
            0 => Zone::new(Kind::K, j),
            1 => Zone::new(Kind::L, j),
            2 => Zone::new(Kind::P, j),
            3 => Zone::new(Kind::R, j),
            4 => Zone::new(Kind::R, j + 1),
            5 => Zone::new(Kind::P, j + 1),
            6 => Zone::new(Kind::L, j + 1),
            _ => Zone::new(Kind::K, j + 1),
        }
    }

    pub fn gap_of_zone(&self, z: Zone) -> usize {
        let j = z.j as usize;
        if j % 2 == 1 {
            let b = (j - 1) / 2;
            8 * b
                + match z.kind {
                    Kind::K => 0,
                    Kind::L => 1,
                    Kind::P => 2,
                    Kind::R => 3,
                }
        } else {
            let b = (j - 2) / 2;
            8 * b
                + match z.kind {
                    Kind::R => 4,
                    Kind::P => 5,
                    Kind::L => 6,
                    Kind::K => 7,
                }
        }
    }

    /// Zone of the sector following `y`.
    pub fn zone_after(&self, y: BaseLetter) -> Zone {
        self.zone_of_gap(self.right_gap(y))
    }

    /// Zone of the sector preceding `y`.
    pub fn zone_before(&self, y: BaseLetter) -> Zone {
        self.zone_of_gap(self.left_gap(y))
    }

    /// Zone whose words a rule puts to the left of the positive letter `z`.
    pub fn left_zone(&self, z: Zone) -> Zone {
        self.zone_before(BaseLetter::new(z, false))
    }

    /// Zone whose words a rule puts to the right of the positive letter `z`.
    pub fn right_zone(&self, z: Zone) -> Zone {
        self.zone_after(BaseLetter::new(z, false))
    }

    /// All `4N` unsigned basic letters, in base-word order.
    pub fn zones(&self) -> Vec<Zone> {
        (0..self.period()).map(|p| self.base_at(p).zone).collect()
    }

    /// All `4N` tape zones, in gap order.
    pub fn tape_zones(&self) -> Vec<Zone> {
        (0..self.period()).map(|g| self.zone_of_gap(g)).collect()
    }

    /// Whether the symbol is one of the letters shared by both alphabets.
    pub fn identified(&self, s: &Symbol) -> bool {
        match *s {
            Symbol::State { coord, .. } => coord.is_start(),
            Symbol::Tape { i, zone, .. } => zone.kind == Kind::P && (i as usize) <= self.ee.m(),
            _ => false,
        }
    }

    /// Canonical spelling: identified letters are stored unbarred.
    pub fn canonical(&self, s: Symbol) -> Symbol {
        match s {
            Symbol::State { zone, coord, .. } if self.identified(&s) => Symbol::State {
                zone,
                bar: false,
                coord,
            },
            Symbol::Tape { i, zone, .. } if self.identified(&s) => Symbol::Tape {
                i,
                zone,
                bar: false,
            },
            other => other,
        }
    }

    pub fn canonical_word(&self, w: &Word) -> Word {
        w.letters()
            .iter()
            .map(|l| Letter {
                sym: self.canonical(l.sym),
                inv: l.inv,
            })
            .collect()
    }

    pub fn tape(&self, i: u16, zone: Zone, bar: bool) -> Symbol {
        self.canonical(Symbol::Tape { i, zone, bar })
    }

    pub fn state(&self, y: BaseLetter, bar: bool, coord: Coord) -> Letter<Symbol> {
        Letter {
            sym: self.canonical(Symbol::State {
                zone: y.zone,
                bar,
                coord,
            }),
            inv: y.inv,
        }
    }

    /// Copy of a word over `a_1..a_m̄` in the tape alphabet of `zone`.
    pub fn in_zone(&self, w: &Word, zone: Zone, bar: bool) -> Word {
        w.letters()
            .iter()
            .map(|l| match l.sym {
                Symbol::Gen(i) | Symbol::Tape { i, .. } | Symbol::X { i, .. } => Letter {
                    sym: self.tape(i, zone, bar),
                    inv: l.inv,
                },
                other => Letter { sym: other, inv: l.inv },
            })
            .collect()
    }

    /// Checks that `w` is a word over `a_1..a_m̄`.
    pub fn check_generator_word(&self, w: &Word) -> Result<(), HardwareError> {
        for l in w.letters() {
            match l.sym {
                Symbol::Gen(i) if (i as usize) <= self.ee.mbar() => {}
                Symbol::Gen(i) => {
                    return Err(HardwareError::NotGeneratorWord {
                        mbar: self.ee.mbar(),
                        reason: format!("a{i} is out of range"),
                    })
                }
                _ => {
                    return Err(HardwareError::NotGeneratorWord {
                        mbar: self.ee.mbar(),
                        reason: format!("unexpected letter {l}"),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Word over the plain generators.
pub fn gen_word(ids: &[u16]) -> Word {
    ids.iter().map(|&i| Letter::pos(Symbol::Gen(i))).collect()
}

/// The cyclic base word as a sequence of `4N` signed letters.
pub fn sigma_tilde(n: usize) -> Result<Vec<BaseLetter>, HardwareError> {
    let ee = EEPresentation::new(0, vec![], vec![]).expect("trivial presentation");
    let hw = Hardware::new(ee, n)?;
    Ok((0..hw.period()).map(|p| hw.base_at(p)).collect())
}

/// The hub: the base word with every letter at coordinates `(∅, 1)`.
pub fn hub(hw: &Hardware) -> Word {
    (0..hw.period())
        .map(|p| hw.state(hw.base_at(p), false, Coord::START))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Flavor {
    Strict,
    Bar,
    Mixed,
}

impl fmt::Display for Flavor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Flavor::Strict => "strict",
            Flavor::Bar => "bar",
            Flavor::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibleError {
    #[error("word is not freely reduced")]
    NotReduced,
    #[error("bad base pattern at letter {at}: {reason}")]
    BadBasePattern { at: usize, reason: &'static str },
    #[error("state letters carry different coordinates")]
    MixedCoordinates,
    #[error("sector {0} violates the positivity condition")]
    PositivityViolation(usize),
    #[error("sector {0} must be empty in a bar word")]
    BarSectorNotEmpty(usize),
    #[error("letter {at} is not in the alphabet of the {flavor} machine")]
    WrongAlphabet { at: usize, flavor: Flavor },
}

/// A state letter of an admissible word; coordinates live on the word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StateLetter {
    pub base: BaseLetter,
    pub bar: bool,
}

/// An admissible word `y₁ u₁ y₂ … u_t y_{t+1}` split into state letters and
/// inner parts.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AdmissibleWord {
    pub flavor: Flavor,
    pub coord: Coord,
    pub states: Vec<StateLetter>,
    pub inners: Vec<Word>,
}

impl AdmissibleWord {
    pub fn to_word(&self, hw: &Hardware) -> Word {
        let mut w = Word::new();
        for (k, s) in self.states.iter().enumerate() {
            w.push(hw.state(s.base, s.bar, self.coord));
            if let Some(inner) = self.inners.get(k) {
                w.extend(inner);
            }
        }
        w
    }

    pub fn base(&self) -> Vec<BaseLetter> {
        self.states.iter().map(|s| s.base).collect()
    }

    pub fn sector_count(&self) -> usize {
        self.inners.len()
    }

    pub fn len(&self) -> usize {
        self.states.len() + self.inners.iter().map(Word::len).sum::<usize>()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn inverse(&self) -> AdmissibleWord {
        AdmissibleWord {
            flavor: self.flavor,
            coord: self.coord,
            states: self
                .states
                .iter()
                .rev()
                .map(|s| StateLetter {
                    base: s.base.inverse(),
                    bar: s.bar,
                })
                .collect(),
            inners: self.inners.iter().rev().map(Word::inverse).collect(),
        }
    }

    /// Whether both end letters are of kind K.
    pub fn k_endpoints(&self) -> bool {
        matches!(
            (self.states.first(), self.states.last()),
            (Some(a), Some(b)) if a.base.zone.kind == Kind::K && b.base.zone.kind == Kind::K
        )
    }

    pub fn display(&self, hw: &Hardware) -> String {
        self.to_word(hw).to_string()
    }
}

/// Positivity demanded of the inner part between `a` and `b`:
/// `Some(true)` positive, `Some(false)` negative, `None` unconstrained,
/// and an error marker when both apply.
fn sign_demand(a: BaseLetter, b: BaseLetter) -> (bool, bool) {
    let pos = (!b.inv && matches!(b.zone.kind, Kind::L | Kind::P))
        || (!a.inv && a.zone.kind == Kind::R);
    let neg = (a.inv && matches!(a.zone.kind, Kind::L | Kind::P))
        || (b.inv && b.zone.kind == Kind::R);
    (pos, neg)
}

fn split(hw: &Hardware, w: &Word) -> Result<(Coord, Vec<StateLetter>, Vec<Word>), AdmissibleError> {
    if !w.is_reduced() {
        return Err(AdmissibleError::NotReduced);
    }
    let letters = w.letters();
    let mut states: Vec<StateLetter> = Vec::new();
    let mut inners: Vec<Word> = Vec::new();
    let mut coord: Option<Coord> = None;
    let mut cur = Word::new();
    for (at, l) in letters.iter().enumerate() {
        match l.sym {
            Symbol::State { zone, bar, coord: c } => {
                if zone.j == 0 || zone.j > hw.n() {
                    return Err(AdmissibleError::BadBasePattern {
                        at,
                        reason: "state index out of range",
                    });
                }
                if c.rel as usize >= hw.ee().relator_count() || !(1..=5).contains(&c.omega) {
                    return Err(AdmissibleError::BadBasePattern {
                        at,
                        reason: "coordinate out of range",
                    });
                }
                match coord {
                    None => coord = Some(c),
                    Some(c0) if c0 != c => return Err(AdmissibleError::MixedCoordinates),
                    _ => {}
                }
                let y = BaseLetter::new(zone, l.inv);
                if let Some(prev) = states.last() {
                    if y != hw.succ(prev.base) && y != prev.base.inverse() {
                        return Err(AdmissibleError::BadBasePattern {
                            at,
                            reason: "consecutive state letters do not follow the base word",
                        });
                    }
                    inners.push(std::mem::take(&mut cur));
                }
                states.push(StateLetter { base: y, bar });
            }
            Symbol::Tape { i, zone, .. } => {
                let Some(prev) = states.last() else {
                    return Err(AdmissibleError::BadBasePattern {
                        at,
                        reason: "word must start with a state letter",
                    });
                };
                if i == 0 || i as usize > hw.ee().mbar() {
                    return Err(AdmissibleError::BadBasePattern {
                        at,
                        reason: "tape letter index out of range",
                    });
                }
                if zone != hw.zone_after(prev.base) {
                    return Err(AdmissibleError::BadBasePattern {
                        at,
                        reason: "tape letter from the wrong zone",
                    });
                }
                cur.push(*l);
            }
            _ => {
                return Err(AdmissibleError::BadBasePattern {
                    at,
                    reason: "only state and tape letters may occur",
                })
            }
        }
    }
    if states.is_empty() {
        return Err(AdmissibleError::BadBasePattern {
            at: 0,
            reason: "no state letters",
        });
    }
    if !cur.is_empty() {
        return Err(AdmissibleError::BadBasePattern {
            at: letters.len() - 1,
            reason: "word must end with a state letter",
        });
    }
    Ok((coord.expect("non-empty"), states, inners))
}

fn check_alphabet(w: &Word, bar: bool, flavor: Flavor, hw: &Hardware) -> Result<(), AdmissibleError> {
    for (at, l) in w.letters().iter().enumerate() {
        let ok = if bar {
            l.sym.is_bar() || hw.identified(&l.sym)
        } else {
            !l.sym.is_bar()
        };
        if !ok {
            return Err(AdmissibleError::WrongAlphabet { at, flavor });
        }
    }
    Ok(())
}

fn check_positivity(states: &[StateLetter], inners: &[Word]) -> Result<(), AdmissibleError> {
    for (k, u) in inners.iter().enumerate() {
        let (pos, neg) = sign_demand(states[k].base, states[k + 1].base);
        if (pos && !u.is_positive()) || (neg && !u.is_negative()) {
            return Err(AdmissibleError::PositivityViolation(k));
        }
    }
    Ok(())
}

fn check_bar_sectors(hw: &Hardware, states: &[StateLetter], inners: &[Word]) -> Result<(), AdmissibleError> {
    for (k, u) in inners.iter().enumerate() {
        if hw.right_gap(states[k].base) < 4 && !u.is_empty() {
            return Err(AdmissibleError::BarSectorNotEmpty(k));
        }
    }
    Ok(())
}

/// Validates `w` as an admissible word of the given flavor.
pub fn parse_admissible(hw: &Hardware, w: &Word, flavor: Flavor) -> Result<AdmissibleWord, AdmissibleError> {
    let w = hw.canonical_word(w);
    let (coord, states, inners) = split(hw, &w)?;
    let strict_shape = |positivity: bool| -> Result<(), AdmissibleError> {
        check_alphabet(&w, false, flavor, hw)?;
        if positivity {
            check_positivity(&states, &inners)?;
        }
        Ok(())
    };
    let bar_shape = || -> Result<(), AdmissibleError> {
        check_alphabet(&w, true, flavor, hw)?;
        check_bar_sectors(hw, &states, &inners)
    };
    match flavor {
        Flavor::Strict => strict_shape(true)?,
        Flavor::Bar => bar_shape()?,
        Flavor::Mixed => {
            if strict_shape(false).is_err() {
                bar_shape()?;
            }
        }
    }
    let states = states
        .into_iter()
        .map(|s| StateLetter {
            base: s.base,
            bar: s.bar && !coord.is_start(),
        })
        .collect();
    Ok(AdmissibleWord {
        flavor,
        coord,
        states,
        inners,
    })
}

/// `W_j(w₁,w₂,w₃,w₄) = w₁ L_j w₂ P_j w₃ R_j w₄`, tape words in the zones
/// `K_j, L_j, P_j, R_j`; state letters at `coord`.
pub fn block_word(hw: &Hardware, j: u16, ws: [&Word; 4], coord: Coord, bar: bool) -> Word {
    let mut out = hw.in_zone(ws[0], Zone::new(Kind::K, j), bar);
    for (kind, w) in [(Kind::L, ws[1]), (Kind::P, ws[2]), (Kind::R, ws[3])] {
        out.push(hw.state(BaseLetter::pos(kind, j), bar, coord));
        out.extend(&hw.in_zone(w, Zone::new(kind, j), bar));
    }
    out
}

/// `Σ_{r,i}(w₁,w₂,w₃,w₄)`, or its bar variant in which block 1 is bare.
pub fn sigma_four(
    hw: &Hardware,
    ws: [&Word; 4],
    coord: Coord,
    bar: bool,
) -> Result<Word, HardwareError> {
    for w in ws {
        hw.check_generator_word(w)?;
    }
    let empty = Word::new();
    let mut out = Word::new();
    for j in 1..=hw.n() {
        let k = hw.state(BaseLetter::new(Zone::new(Kind::K, j), j % 2 == 0), bar, coord);
        let block = if bar && j == 1 {
            block_word(hw, j, [&empty; 4], coord, bar)
        } else {
            block_word(hw, j, ws, coord, bar)
        };
        out.push(k);
        out.extend(&block.signed(j % 2 == 1));
    }
    Ok(out)
}

/// `Σ(w) K₁(∅,1)`, a strict admissible word.
pub fn sigma_w(hw: &Hardware, w: &Word) -> Result<AdmissibleWord, HardwareError> {
    if !w.is_positive() {
        return Err(HardwareError::NotPositive);
    }
    sigma_w_flavored(hw, w, false)
}

/// `Σ̄(w) K₁(∅,1)`, a bar admissible word, for any reduced `w`.
pub fn sigma_w_bar(hw: &Hardware, w: &Word) -> Result<AdmissibleWord, HardwareError> {
    sigma_w_flavored(hw, &w.reduced(), true)
}

fn sigma_w_flavored(hw: &Hardware, w: &Word, bar: bool) -> Result<AdmissibleWord, HardwareError> {
    let empty = Word::new();
    let mut word = sigma_four(hw, [&empty, &empty, w, &empty], Coord::START, bar)?;
    word.push(hw.state(BaseLetter::pos(Kind::K, 1), bar, Coord::START));
    let flavor = if bar { Flavor::Bar } else { Flavor::Strict };
    Ok(parse_admissible(hw, &word, flavor).expect("constructor output is admissible"))
}
