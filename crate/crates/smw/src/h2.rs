//! The x-letter fragment of the auxiliary group: flank words with rewrite
//! certificates, uniform and related words, and conjugacy of x-words.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::hardware::Hardware;
use crate::presentation::{alpha, ax_relator, kx_relator, normalize};
use crate::symbol::{Coord, Kind, RuleId, Symbol, Zone};
use crate::words::{CyclicWord, Letter, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum H2Error {
    #[error("not a block word: {0}")]
    NotBlockWord(String),
    #[error("inner word in zone {0} is not positive")]
    NotPositive(Zone),
    #[error("rule {0} has no x-letters")]
    BarRule(RuleId),
    #[error("letter {0} is not an x-letter")]
    NotXLetter(String),
    #[error("word is empty or not cyclically reduced")]
    NotCyclicallyReduced,
}

/// A product of powers of x-letters with exact exponents.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct XPowerWord {
    entries: Vec<(Symbol, BigInt)>,
}

impl XPowerWord {
    pub fn new() -> Self {
        Self::default()
    }

    /// Multiplies on the right by `sym^exp`, merging with the last entry.
    pub fn push(&mut self, sym: Symbol, exp: BigInt) {
        if exp.is_zero() {
            return;
        }
        if let Some(last) = self.entries.last_mut() {
            if last.0 == sym {
                last.1 += exp;
                if last.1.is_zero() {
                    self.entries.pop();
                }
                return;
            }
        }
        self.entries.push((sym, exp));
    }

    pub fn from_word(w: &Word) -> Result<Self, H2Error> {
        let mut out = XPowerWord::new();
        for l in w.letters() {
            if !l.sym.is_x() {
                return Err(H2Error::NotXLetter(l.to_string()));
            }
            out.push(l.sym, if l.inv { -BigInt::one() } else { BigInt::one() });
        }
        Ok(out)
    }

    pub fn entries(&self) -> &[(Symbol, BigInt)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Sum of the absolute values of the exponents.
    pub fn weight(&self) -> BigInt {
        self.entries.iter().map(|(_, e)| e.abs()).sum()
    }

    /// Expands the powers; `None` if the word is too long to materialize.
    pub fn to_word(&self) -> Option<Word> {
        let mut out = Word::new();
        for (sym, e) in &self.entries {
            let k = e.abs().to_usize()?;
            for _ in 0..k {
                out.push(Letter {
                    sym: *sym,
                    inv: e.is_negative(),
                });
            }
        }
        Some(out)
    }
}

impl fmt::Display for XPowerWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, (sym, e)) in self.entries.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{sym}")?;
            if !e.is_one() {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// One relator application: the segment `s` of length `len` at `pos` is
/// replaced by `t`, where the chosen rotation of the relator (or of its
/// inverse) reads `s t⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteStep {
    pub pos: usize,
    pub relator: Word,
    pub inverse: bool,
    pub rotation: usize,
    pub len: usize,
}

impl RewriteStep {
    fn oriented(&self) -> Vec<Letter<Symbol>> {
        let base = if self.inverse {
            self.relator.inverse()
        } else {
            self.relator.clone()
        };
        let l = base.letters();
        l[self.rotation..].iter().chain(&l[..self.rotation]).copied().collect()
    }

    /// The segment removed and the segment inserted.
    pub fn sides(&self) -> (Vec<Letter<Symbol>>, Vec<Letter<Symbol>>) {
        let r = self.oriented();
        let s = r[..self.len].to_vec();
        let t = r[self.len..].iter().rev().map(Letter::inverse).collect();
        (s, t)
    }

    /// The step undoing this one.
    pub fn reversed(&self) -> RewriteStep {
        let n = self.relator.len();
        let (_, t) = self.sides();
        // The inverse of rot(Q, k) is rot(Q⁻¹, n - k) and reads t s⁻¹.
        RewriteStep {
            pos: self.pos,
            relator: self.relator.clone(),
            inverse: !self.inverse,
            rotation: (n - self.rotation) % n,
            len: t.len(),
        }
    }

    /// Finds the orientation of `relator` that rewrites `s` into something.
    fn find(pos: usize, relator: &Word, s: &[Letter<Symbol>]) -> Option<RewriteStep> {
        let n = relator.len();
        for inverse in [false, true] {
            for rotation in 0..n {
                let step = RewriteStep {
                    pos,
                    relator: relator.clone(),
                    inverse,
                    rotation,
                    len: s.len(),
                };
                if step.oriented()[..s.len()] == *s {
                    return Some(step);
                }
            }
        }
        None
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CertificateError {
    #[error("step {0}: relator is not a defining relator")]
    UnknownRelator(usize),
    #[error("step {0}: segment does not match")]
    Mismatch(usize),
    #[error("final word differs from the declared target")]
    WrongTarget,
}

/// A sequence of single relator applications from `source` to `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteCertificate {
    pub source: Word,
    pub target: Word,
    pub steps: Vec<RewriteStep>,
}

impl RewriteCertificate {
    /// Replays every step; `is_relator` decides membership of a normalized
    /// relator in the presentation.
    pub fn replay(&self, is_relator: impl Fn(&Word) -> bool) -> Result<(), CertificateError> {
        let mut runs = Runs::from_word(&self.source);
        for (k, step) in self.steps.iter().enumerate() {
            if normalize(&step.relator) != step.relator || !is_relator(&step.relator) {
                return Err(CertificateError::UnknownRelator(k));
            }
            let (s, t) = step.sides();
            if !runs.splice(step.pos, &s, &t) {
                return Err(CertificateError::Mismatch(k));
            }
        }
        if runs.to_word() != self.target {
            return Err(CertificateError::WrongTarget);
        }
        Ok(())
    }

    /// The certificate read backwards.
    pub fn reversed(&self) -> RewriteCertificate {
        RewriteCertificate {
            source: self.target.clone(),
            target: self.source.clone(),
            steps: self.steps.iter().rev().map(RewriteStep::reversed).collect(),
        }
    }
}

/// Run-length form of a word, so that long powers are cheap to rewrite.
#[derive(Clone, Debug)]
struct Runs(Vec<(Letter<Symbol>, usize)>);

impl Runs {
    fn from_word(w: &Word) -> Runs {
        let mut r = Runs(Vec::new());
        for l in w.letters() {
            r.push(*l, 1);
        }
        r
    }

    fn push(&mut self, l: Letter<Symbol>, count: usize) {
        match self.0.last_mut() {
            Some(last) if last.0 == l => last.1 += count,
            _ => self.0.push((l, count)),
        }
    }

    fn to_word(&self) -> Word {
        self.0
            .iter()
            .flat_map(|&(l, c)| std::iter::repeat(l).take(c))
            .collect()
    }

    /// Ensures a run boundary at letter offset `pos`; returns the index of
    /// the run starting there.
    fn split(&mut self, pos: usize) -> Option<usize> {
        let mut at = 0;
        for k in 0..self.0.len() {
            if at == pos {
                return Some(k);
            }
            let (l, c) = self.0[k];
            if pos < at + c {
                self.0[k].1 = pos - at;
                self.0.insert(k + 1, (l, at + c - pos));
                return Some(k + 1);
            }
            at += c;
        }
        (at == pos).then_some(self.0.len())
    }

    fn splice(&mut self, pos: usize, s: &[Letter<Symbol>], t: &[Letter<Symbol>]) -> bool {
        let (Some(a), Some(_)) = (self.split(pos), self.split(pos + s.len())) else {
            return false;
        };
        let b = self.split(pos + s.len()).expect("boundary exists");
        let found: Vec<Letter<Symbol>> = self.0[a..b]
            .iter()
            .flat_map(|&(l, c)| std::iter::repeat(l).take(c))
            .collect();
        if found != s {
            return false;
        }
        let tail = self.0.split_off(b);
        self.0.truncate(a);
        for &l in t {
            self.push(l, 1);
        }
        for (l, c) in tail {
            self.push(l, c);
        }
        self.0.retain(|r| r.1 > 0);
        true
    }
}

/// Flank words `X₁`, `X₁'` with `X₁·W·X₁' = α_τ(W)`, and a certificate for
/// that equality.
#[derive(Clone, Debug)]
pub struct XFlank {
    pub left: XPowerWord,
    pub right: XPowerWord,
    pub certificate: RewriteCertificate,
}

struct BlockParts {
    j: u16,
    coord: Coord,
    /// Tape words of the K, L, P and R zones.
    inner: [Word; 4],
}

fn split_block(hw: &Hardware, w: &Word) -> Result<BlockParts, H2Error> {
    let bad = |why: &str| H2Error::NotBlockWord(why.to_string());
    let mut inner: [Word; 4] = Default::default();
    let mut slot = 0;
    let mut j = None;
    let mut coord = None;
    const KINDS: [Kind; 4] = [Kind::K, Kind::L, Kind::P, Kind::R];
    for l in w.letters() {
        match l.sym {
            Symbol::State { zone, bar: false, coord: c } => {
                slot += 1;
                if slot > 3 || l.inv || zone.kind != KINDS[slot] {
                    return Err(bad("state letters must read L P R"));
                }
                if *j.get_or_insert(zone.j) != zone.j || *coord.get_or_insert(c) != c {
                    return Err(bad("state letters disagree"));
                }
            }
            Symbol::Tape { zone, bar: false, .. } => {
                if zone.kind != KINDS[slot] || j.is_some_and(|j| j != zone.j) {
                    return Err(bad("tape letter in the wrong zone"));
                }
                j.get_or_insert(zone.j);
                inner[slot].push(*l);
            }
            _ => return Err(bad("unexpected letter")),
        }
    }
    if slot != 3 {
        return Err(bad("missing state letters"));
    }
    let (j, coord) = (j.expect("set"), coord.expect("set"));
    if hw.left_zone(Zone::new(Kind::L, j)) != Zone::new(Kind::K, j) {
        return Err(bad("index out of range"));
    }
    Ok(BlockParts { j, coord, inner })
}

/// Computes the flanks for a block word
/// `w₁(K_j) L_j w₂(L_j) P_j w₃(P_j) R_j w₄(R_j)` and a rule `τ` of the
/// strict machine. An inverse rule yields the flanks for `α_{τ⁻¹}`.
pub fn x_flank(hw: &Hardware, w: &Word, tau: RuleId) -> Result<XFlank, H2Error> {
    if tau.bar {
        return Err(H2Error::BarRule(tau));
    }
    let parts = split_block(hw, w)?;
    for (k, kind) in [(0, Kind::K), (1, Kind::L), (3, Kind::R)] {
        if !parts.inner[k].is_positive() {
            return Err(H2Error::NotPositive(Zone::new(kind, parts.j)));
        }
    }
    let image = alpha(tau, w).expect("block words are in the domain");
    let mut runs = Runs::from_word(&image);
    let mut steps = Vec::new();
    // Push K/L x-letters leftwards and R x-letters rightwards, one letter
    // across one letter per step.
    loop {
        let Some((pos, s, relator)) = next_push(hw, &runs, tau, parts.coord) else {
            break;
        };
        let step = RewriteStep::find(pos, &relator, &s).expect("relator contains the segment");
        let (_, t) = step.sides();
        assert!(runs.splice(pos, &s, &t));
        steps.push(step);
    }
    let end = runs.to_word();
    let letters = end.letters();
    let lead = letters.iter().take_while(|l| l.sym.is_x()).count();
    let trail = letters[lead..].iter().rev().take_while(|l| l.sym.is_x()).count();
    let middle = Word::from_letters(letters[lead..letters.len() - trail].to_vec());
    debug_assert_eq!(&middle, w);
    let left = XPowerWord::from_word(&Word::from_letters(letters[..lead].to_vec()))?;
    let right = XPowerWord::from_word(&Word::from_letters(letters[letters.len() - trail..].to_vec()))?;
    let forward = RewriteCertificate {
        source: image,
        target: end,
        steps,
    };
    Ok(XFlank {
        left,
        right,
        certificate: forward.reversed(),
    })
}

/// Leftmost adjacent pair that can be rewritten: a K/L tape letter or an
/// `L` state letter followed by an x-letter of its right zone, or an R-zone
/// x-letter followed by a tape letter. Returns the offset, the segment and
/// the normalized relator.
fn next_push(
    hw: &Hardware,
    runs: &Runs,
    tau: RuleId,
    coord: Coord,
) -> Option<(usize, Vec<Letter<Symbol>>, Word)> {
    let mut at = 0;
    for pair in runs.0.windows(2) {
        let ((y, cy), (x, _)) = (pair[0], pair[1]);
        at += cy;
        let relator = match (y.sym, x.sym) {
            (Symbol::Tape { i, zone, .. }, Symbol::X { i: b, zone: xz, .. })
                if !y.inv && zone == xz && matches!(zone.kind, Kind::K | Kind::L) =>
            {
                ax_relator(hw, tau.key, zone, i, b)
            }
            (Symbol::State { zone, .. }, Symbol::X { i: b, zone: xz, .. })
                if !y.inv && zone.kind == Kind::L && hw.right_zone(zone) == xz =>
            {
                kx_relator(hw, tau.key, zone, coord, b)
            }
            (Symbol::X { i: b, zone: xz, .. }, Symbol::Tape { i, zone, .. })
                if !x.inv && zone == xz && zone.kind == Kind::R =>
            {
                ax_relator(hw, tau.key, zone, i, b)
            }
            _ => continue,
        };
        return Some((at - 1, vec![y, x], normalize(&relator)));
    }
    None
}

/// Zone of an x-letter.
pub fn x_zone(sym: &Symbol) -> Option<Zone> {
    match *sym {
        Symbol::X { zone, .. } => Some(zone),
        _ => None,
    }
}

/// The common zone of a uniform word: non-empty, cyclically reduced and
/// written in the x-letters of one zone other than a P zone.
pub fn is_uniform(w: &CyclicWord) -> Option<Zone> {
    if w.is_empty() || !w.is_cyclically_reduced() {
        return None;
    }
    let zone = x_zone(&w.letters()[0].sym)?;
    if zone.kind == Kind::P {
        return None;
    }
    w.letters()
        .iter()
        .all(|l| x_zone(&l.sym) == Some(zone))
        .then_some(zone)
}

/// One substitution relating uniform words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Substitution {
    /// `x → x⁴` on every letter.
    Scale,
    /// The inverse of [`Substitution::Scale`].
    Unscale,
    /// Every letter moved to the same letter of a neighbouring zone.
    Shift { from: Zone, to: Zone },
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Substitution::Scale => f.write_str("scale"),
            Substitution::Unscale => f.write_str("unscale"),
            Substitution::Shift { from, to } => write!(f, "shift {from}->{to}"),
        }
    }
}

/// Zones joined by a K or L state letter, as `(left, right)` pairs.
pub fn zone_links(hw: &Hardware) -> Vec<(Zone, Zone)> {
    hw.zones()
        .into_iter()
        .filter(|z| matches!(z.kind, Kind::K | Kind::L))
        .map(|z| (hw.left_zone(z), hw.right_zone(z)))
        .collect()
}

/// Shortest chain of neighbouring zones from `from` to `to`.
pub fn zone_path(hw: &Hardware, from: Zone, to: Zone) -> Option<Vec<Zone>> {
    let mut adj: HashMap<Zone, Vec<Zone>> = HashMap::new();
    for (a, b) in zone_links(hw) {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    let mut prev: BTreeMap<Zone, Zone> = BTreeMap::new();
    let mut queue = VecDeque::from([from]);
    prev.insert(from, from);
    while let Some(z) = queue.pop_front() {
        if z == to {
            let mut path = vec![z];
            let mut c = z;
            while c != from {
                c = prev[&c];
                path.push(c);
            }
            path.reverse();
            return Some(path);
        }
        for &n in adj.get(&z).map(Vec::as_slice).unwrap_or(&[]) {
            if !prev.contains_key(&n) {
                prev.insert(n, z);
                queue.push_back(n);
            }
        }
    }
    None
}

/// Applies a substitution to a word.
pub fn substitute(w: &Word, s: Substitution) -> Option<Word> {
    match s {
        Substitution::Scale => Some(
            w.letters()
                .iter()
                .flat_map(|&l| std::iter::repeat(l).take(4))
                .collect(),
        ),
        Substitution::Unscale => unscale(&CyclicWord::new(w)).map(|c| c.to_word()),
        Substitution::Shift { from, to } => w
            .letters()
            .iter()
            .map(|l| match l.sym {
                Symbol::X { i, zone, rule } if zone == from => Some(Letter {
                    sym: Symbol::X { i, zone: to, rule },
                    inv: l.inv,
                }),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Word::from_letters),
    }
}

/// Maximal runs of a cyclic word, started at a run boundary.
fn cyclic_runs(w: &CyclicWord) -> Vec<(Letter<Symbol>, usize)> {
    let l = w.letters();
    let n = l.len();
    let start = (0..n).find(|&k| l[k] != l[(k + n - 1) % n]);
    let Some(start) = start else {
        return if n == 0 { vec![] } else { vec![(l[0], n)] };
    };
    let mut runs: Vec<(Letter<Symbol>, usize)> = Vec::new();
    for k in 0..n {
        let c = l[(start + k) % n];
        match runs.last_mut() {
            Some(r) if r.0 == c => r.1 += 1,
            _ => runs.push((c, 1)),
        }
    }
    runs
}

/// The preimage of `w` under the fourth-power substitution, if any.
pub fn unscale(w: &CyclicWord) -> Option<CyclicWord> {
    let runs = cyclic_runs(w);
    if runs.is_empty() || runs.iter().any(|r| r.1 % 4 != 0) {
        return None;
    }
    let word: Word = runs
        .iter()
        .flat_map(|&(l, c)| std::iter::repeat(l).take(c / 4))
        .collect();
    Some(CyclicWord::new(&word))
}

fn unscale_fully(w: &CyclicWord) -> (CyclicWord, usize) {
    let mut w = w.clone();
    let mut k = 0;
    while let Some(u) = unscale(&w) {
        w = u;
        k += 1;
    }
    (w, k)
}

/// Substitution chain taking `w1` to a cyclic shift of `w2`, if the two
/// words are related.
pub fn related_chain(hw: &Hardware, w1: &CyclicWord, w2: &CyclicWord) -> Option<Vec<Substitution>> {
    let (z1, z2) = (is_uniform(w1)?, is_uniform(w2)?);
    let (u1, k1) = unscale_fully(w1);
    let (u2, k2) = unscale_fully(w2);
    let path = zone_path(hw, z1, z2)?;
    let mut chain = vec![Substitution::Unscale; k1];
    let mut cur = u1.to_word();
    for hop in path.windows(2) {
        let s = Substitution::Shift {
            from: hop[0],
            to: hop[1],
        };
        cur = substitute(&cur, s)?;
        chain.push(s);
    }
    if CyclicWord::new(&cur) != u2 {
        return None;
    }
    chain.extend(std::iter::repeat(Substitution::Scale).take(k2));
    Some(chain)
}

pub fn are_related(hw: &Hardware, w1: &CyclicWord, w2: &CyclicWord) -> bool {
    related_chain(hw, w1, w2).is_some()
}

/// Why two x-words are conjugate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjugacyWitness {
    /// `w2` is `w1` rotated left by this many letters.
    Rotation(usize),
    /// The chain takes `w1` to a word whose rotation by `rotation` is `w2`.
    Related {
        chain: Vec<Substitution>,
        rotation: usize,
    },
}

impl fmt::Display for ConjugacyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConjugacyWitness::Rotation(k) => write!(f, "rotation {k}"),
            ConjugacyWitness::Related { chain, rotation } => {
                let steps: Vec<String> = chain.iter().map(ToString::to_string).collect();
                write!(f, "related [{}] rotation {rotation}", steps.join(", "))
            }
        }
    }
}

fn rotation_to(w: &Word, target: &Word) -> Option<usize> {
    let n = w.len();
    if n != target.len() {
        return None;
    }
    let l = w.letters();
    (0..n.max(1)).find(|&k| {
        l[k % n.max(1)..].iter().chain(&l[..k % n.max(1)]).eq(target.letters().iter())
    })
}

fn check_x_word(w: &Word) -> Result<(), H2Error> {
    for l in w.letters() {
        match x_zone(&l.sym) {
            Some(z) if z.kind != Kind::P => {}
            _ => return Err(H2Error::NotXLetter(l.to_string())),
        }
    }
    if w.is_empty() || !CyclicWord::new(w).is_cyclically_reduced() {
        return Err(H2Error::NotCyclicallyReduced);
    }
    Ok(())
}

/// Decides conjugacy of two non-empty cyclically reduced x-words: they are
/// conjugate exactly when one is a cyclic shift of the other or cyclic
/// shifts of them are related uniform words.
pub fn x_words_conjugate(
    hw: &Hardware,
    w1: &Word,
    w2: &Word,
) -> Result<Option<ConjugacyWitness>, H2Error> {
    check_x_word(w1)?;
    check_x_word(w2)?;
    if let Some(k) = rotation_to(w1, w2) {
        return Ok(Some(ConjugacyWitness::Rotation(k)));
    }
    let (c1, c2) = (CyclicWord::new(w1), CyclicWord::new(w2));
    let Some(chain) = related_chain(hw, &c1, &c2) else {
        return Ok(None);
    };
    let mut cur = w1.clone();
    for &s in &chain {
        cur = substitute(&cur, s).expect("chain applies");
    }
    let rotation = rotation_to(&cur, w2).expect("chain ends at a rotation of w2");
    Ok(Some(ConjugacyWitness::Related { chain, rotation }))
}

/// True if the freely reduced form of `w` is a product of fourth powers of
/// letters.
pub fn is_fourth_power_product(w: &Word) -> bool {
    let r = w.reduced();
    let mut runs = Runs(Vec::new());
    for l in r.letters() {
        runs.push(*l, 1);
    }
    runs.0.iter().all(|r| r.1 % 4 == 0)
}

/// `Some((x, e))` if the freely reduced form of `w` is `x^e` for one
/// letter `x` (with `e` possibly zero for the empty word).
pub fn letter_power(w: &Word) -> Option<(Option<Symbol>, i64)> {
    let r = w.reduced();
    let Some(first) = r.letters().first() else {
        return Some((None, 0));
    };
    r.letters()
        .iter()
        .all(|l| l == first)
        .then(|| (Some(first.sym), if first.inv { -(r.len() as i64) } else { r.len() as i64 }))
}

/// The exponent bound `4^(n+1)` for flanks of inner words of total length
/// `n`.
pub fn flank_bound(n: usize) -> BigInt {
    BigInt::from(4).pow(n as u32 + 1)
}

/// Total length `|w₁| + |w₂| + |w₄|` of the inner words that drive the
/// flanks.
pub fn flank_size(hw: &Hardware, w: &Word) -> Result<usize, H2Error> {
    let p = split_block(hw, w)?;
    Ok(p.inner[0].len() + p.inner[1].len() + p.inner[3].len())
}
