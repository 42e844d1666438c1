//! Generator symbols of the group alphabets and their text token grammar.
//!
//! Grammar, one token per letter, optional `^-1` suffix:
//!
//! ```text
//! gen    := "a" INT
//! tape   := ["~"] "a" INT "(" ZONE ")"
//! state  := ["~"] ZONE "(" COORD "," INT ")"
//! theta  := ["~"] "th(" RULE "," ZONE ")"
//! xlet   := "x(" tape "," RULE ")"
//! ZONE   := ("K"|"L"|"P"|"R") INT
//! COORD  := "e" | "r" INT
//! RULE   := ["~"] "t" FAMILY "(" args ")"
//! ```

use std::fmt;

use thiserror::Error;

use crate::words::{Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    K,
    L,
    P,
    R,
}

impl Kind {
    pub const ALL: [Kind; 4] = [Kind::K, Kind::L, Kind::P, Kind::R];

    pub fn letter(self) -> char {
        match self {
            Kind::K => 'K',
            Kind::L => 'L',
            Kind::P => 'P',
            Kind::R => 'R',
        }
    }

    fn from_char(c: char) -> Option<Kind> {
        match c {
            'K' => Some(Kind::K),
            'L' => Some(Kind::L),
            'P' => Some(Kind::P),
            'R' => Some(Kind::R),
            _ => None,
        }
    }
}

/// An unsigned basic letter `z_j`. Also names the tape alphabet `A(z)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Zone {
    pub kind: Kind,
    pub j: u16,
}

impl Zone {
    pub fn new(kind: Kind, j: u16) -> Self {
        Zone { kind, j }
    }

    pub fn with_index(self, j: u16) -> Self {
        Zone { kind: self.kind, j }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.j)
    }
}

/// The pair of (relator, phase) coordinates carried by state letters.
/// `rel == 0` is the empty relator; `rel == k` is the k-th non-empty one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub rel: u16,
    pub omega: u8,
}

impl Coord {
    pub const START: Coord = Coord { rel: 0, omega: 1 };

    pub fn new(rel: u16, omega: u8) -> Self {
        Coord { rel, omega }
    }

    pub fn is_start(self) -> bool {
        self == Coord::START
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", RelName(self.rel), self.omega)
    }
}

pub(crate) struct RelName(pub u16);

impl fmt::Display for RelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0 {
            write!(f, "e")
        } else {
            write!(f, "r{}", self.0)
        }
    }
}

/// The ten rule families, in cycle order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    F1,
    F12,
    F2,
    F23,
    F3,
    F34,
    F4,
    F45,
    F5,
    F51,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::F1,
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

    pub fn number(self) -> u8 {
        match self {
            Family::F1 => 1,
            Family::F12 => 12,
            Family::F2 => 2,
            Family::F23 => 23,
            Family::F3 => 3,
            Family::F34 => 34,
            Family::F4 => 4,
            Family::F45 => 45,
            Family::F5 => 5,
            Family::F51 => 51,
        }
    }

    pub fn from_number(n: u32) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.number() as u32 == n)
    }

    /// Families whose rules are indexed by a generator `a_i`.
    pub fn has_letter(self) -> bool {
        matches!(
            self,
            Family::F1 | Family::F2 | Family::F3 | Family::F4 | Family::F5
        )
    }

    pub fn is_transition(self) -> bool {
        !self.has_letter()
    }

    /// Phase coordinate before and after a positive rule of this family.
    pub fn phases(self) -> (u8, u8) {
        match self {
            Family::F1 => (1, 1),
            Family::F12 => (1, 2),
            Family::F2 => (2, 2),
            Family::F23 => (2, 3),
            Family::F3 => (3, 3),
            Family::F34 => (3, 4),
            Family::F4 => (4, 4),
            Family::F45 => (4, 5),
            Family::F5 => (5, 5),
            Family::F51 => (5, 1),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// A positive, unbarred rule name `τ(family, r, i)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleKey {
    pub family: Family,
    pub rel: u16,
    /// Generator index for letter families, 0 otherwise.
    pub letter: u16,
}

impl RuleKey {
    pub fn new(family: Family, rel: u16, letter: u16) -> Self {
        RuleKey {
            family,
            rel,
            letter,
        }
    }
}

impl fmt::Display for RuleKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}({}", self.family, RelName(self.rel))?;
        if self.family.has_letter() {
            write!(f, ",{}", self.letter)?;
        }
        write!(f, ")")
    }
}

/// A rule of one of the machines: a positive key plus bar and sign flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RuleId {
    pub key: RuleKey,
    pub bar: bool,
    pub inverse: bool,
}

impl RuleId {
    pub fn positive(key: RuleKey, bar: bool) -> Self {
        RuleId {
            key,
            bar,
            inverse: false,
        }
    }

    pub fn inv(self) -> Self {
        RuleId {
            inverse: !self.inverse,
            ..self
        }
    }

    pub fn family(self) -> Family {
        self.key.family
    }

    /// Source and target coordinates, taking the sign into account.
    pub fn transition(self) -> (Coord, Coord) {
        let (w0, w1) = self.key.family.phases();
        let (r0, r1) = match self.key.family {
            Family::F1 => (0, 0),
            Family::F12 => (0, self.key.rel),
            Family::F51 => (self.key.rel, 0),
            _ => (self.key.rel, self.key.rel),
        };
        let a = Coord::new(r0, w0);
        let b = Coord::new(r1, w1);
        if self.inverse {
            (b, a)
        } else {
            (a, b)
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bar {
            write!(f, "~")?;
        }
        write!(f, "{}", self.key)?;
        if self.inverse {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

/// A generator of the free group underlying the presentation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    /// Plain generator `a_i` of the auxiliary presentation.
    Gen(u16),
    Tape { i: u16, zone: Zone, bar: bool },
    State { zone: Zone, bar: bool, coord: Coord },
    Theta { rule: RuleKey, zone: Zone, bar: bool },
    X { i: u16, zone: Zone, rule: RuleKey },
}

impl Symbol {
    pub fn tape(i: u16, zone: Zone, bar: bool) -> Self {
        Symbol::Tape { i, zone, bar }
    }

    pub fn state(zone: Zone, bar: bool, coord: Coord) -> Self {
        Symbol::State { zone, bar, coord }
    }

    pub fn is_tape(&self) -> bool {
        matches!(self, Symbol::Tape { .. })
    }

    pub fn is_state(&self) -> bool {
        matches!(self, Symbol::State { .. })
    }

    pub fn is_theta(&self) -> bool {
        matches!(self, Symbol::Theta { .. })
    }

    pub fn is_x(&self) -> bool {
        matches!(self, Symbol::X { .. })
    }

    pub fn is_bar(&self) -> bool {
        match *self {
            Symbol::Tape { bar, .. } | Symbol::State { bar, .. } | Symbol::Theta { bar, .. } => bar,
            _ => false,
        }
    }

    /// Zone index `j` of every symbol that has one.
    pub fn index(&self) -> Option<u16> {
        match *self {
            Symbol::Gen(_) => None,
            Symbol::Tape { zone, .. }
            | Symbol::State { zone, .. }
            | Symbol::Theta { zone, .. }
            | Symbol::X { zone, .. } => Some(zone.j),
        }
    }

    pub fn with_index(self, j: u16) -> Self {
        match self {
            Symbol::Gen(i) => Symbol::Gen(i),
            Symbol::Tape { i, zone, bar } => Symbol::Tape {
                i,
                zone: zone.with_index(j),
                bar,
            },
            Symbol::State { zone, bar, coord } => Symbol::State {
                zone: zone.with_index(j),
                bar,
                coord,
            },
            Symbol::Theta { rule, zone, bar } => Symbol::Theta {
                rule,
                zone: zone.with_index(j),
                bar,
            },
            Symbol::X { i, zone, rule } => Symbol::X {
                i,
                zone: zone.with_index(j),
                rule,
            },
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tilde = |b: bool| if b { "~" } else { "" };
        match *self {
            Symbol::Gen(i) => write!(f, "a{i}"),
            Symbol::Tape { i, zone, bar } => write!(f, "{}a{i}({zone})", tilde(bar)),
            Symbol::State { zone, bar, coord } => write!(f, "{}{zone}({coord})", tilde(bar)),
            Symbol::Theta { rule, zone, bar } => write!(f, "{}th({rule},{zone})", tilde(bar)),
            Symbol::X { i, zone, rule } => write!(f, "x(a{i}({zone}),{rule})"),
        }
    }
}

impl fmt::Display for Letter<Symbol> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.sym)?;
        if self.inv {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

impl fmt::Display for Word<Symbol> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, l) in self.letters().iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("malformed token `{token}`: {reason}")]
    Malformed { token: String, reason: &'static str },
}

struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(s: &'a str) -> Self {
        Cursor {
            s: s.as_bytes(),
            pos: 0,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), &'static str> {
        if self.eat(c) {
            Ok(())
        } else {
            Err("unexpected character")
        }
    }

    fn eat_str(&mut self, t: &str) -> bool {
        if self.s[self.pos..].starts_with(t.as_bytes()) {
            self.pos += t.len();
            true
        } else {
            false
        }
    }

    fn int(&mut self) -> Result<u32, &'static str> {
        let start = self.pos;
        while matches!(self.peek(), Some(b'0'..=b'9')) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err("expected a number");
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| "number out of range")
    }

    fn small(&mut self) -> Result<u16, &'static str> {
        u16::try_from(self.int()?).map_err(|_| "number out of range")
    }

    fn done(&self) -> bool {
        self.pos == self.s.len()
    }

    fn zone(&mut self) -> Result<Zone, &'static str> {
        let kind = self
            .peek()
            .and_then(|c| Kind::from_char(c as char))
            .ok_or("expected a zone")?;
        self.pos += 1;
        let j = self.small()?;
        if j == 0 {
            return Err("zone index must be positive");
        }
        Ok(Zone::new(kind, j))
    }

    fn rel(&mut self) -> Result<u16, &'static str> {
        if self.eat(b'e') {
            Ok(0)
        } else if self.eat(b'r') {
            let k = self.small()?;
            if k == 0 {
                return Err("relator references are 1-based");
            }
            Ok(k)
        } else {
            Err("expected `e` or `rK`")
        }
    }

    fn rule_key(&mut self) -> Result<RuleKey, &'static str> {
        if !self.eat(b't') {
            return Err("expected a rule");
        }
        let family = Family::from_number(self.int()?).ok_or("unknown rule family")?;
        self.expect(b'(')?;
        let rel = self.rel()?;
        let letter = if family.has_letter() {
            self.expect(b',')?;
            let i = self.small()?;
            if i == 0 {
                return Err("letter index must be positive");
            }
            i
        } else {
            0
        };
        self.expect(b')')?;
        match family {
            Family::F1 if rel != 0 => Err("family 1 takes the empty relator"),
            Family::F12 | Family::F34 if rel == 0 => Err("family needs a non-empty relator"),
            _ => Ok(RuleKey::new(family, rel, letter)),
        }
    }

    fn tape_body(&mut self) -> Result<(u16, Zone), &'static str> {
        if !self.eat(b'a') {
            return Err("expected a tape letter");
        }
        let i = self.small()?;
        if i == 0 {
            return Err("letter index must be positive");
        }
        self.expect(b'(')?;
        let zone = self.zone()?;
        self.expect(b')')?;
        Ok((i, zone))
    }

    fn inverse_suffix(&mut self) -> Result<bool, &'static str> {
        if self.eat_str("^-1") {
            Ok(true)
        } else if self.done() {
            Ok(false)
        } else {
            Err("trailing characters")
        }
    }
}

fn malformed(token: &str, reason: &'static str) -> TokenError {
    TokenError::Malformed {
        token: token.to_string(),
        reason,
    }
}

/// Parses a single letter token.
pub fn parse_letter(token: &str) -> Result<Letter<Symbol>, TokenError> {
    let mut c = Cursor::new(token);
    let sym = parse_symbol(&mut c).map_err(|r| malformed(token, r))?;
    let inv = c.inverse_suffix().map_err(|r| malformed(token, r))?;
    Ok(Letter { sym, inv })
}

fn parse_symbol(c: &mut Cursor<'_>) -> Result<Symbol, &'static str> {
    let bar = c.eat(b'~');
    if c.eat_str("th(") {
        let rule = c.rule_key()?;
        c.expect(b',')?;
        let zone = c.zone()?;
        c.expect(b')')?;
        return Ok(Symbol::Theta { rule, zone, bar });
    }
    if c.eat_str("x(") {
        if bar {
            return Err("x-letters carry no bar");
        }
        let (i, zone) = c.tape_body()?;
        c.expect(b',')?;
        let rule = c.rule_key()?;
        c.expect(b')')?;
        if zone.kind == Kind::P {
            return Err("no x-letters over P zones");
        }
        return Ok(Symbol::X { i, zone, rule });
    }
    match c.peek() {
        Some(b'a') => {
            let save = c.pos;
            c.pos += 1;
            let i = c.small()?;
            if i == 0 {
                return Err("letter index must be positive");
            }
            if c.peek() == Some(b'(') {
                c.pos = save;
                let (i, zone) = c.tape_body()?;
                Ok(Symbol::Tape { i, zone, bar })
            } else if bar {
                Err("plain generators carry no bar")
            } else {
                Ok(Symbol::Gen(i))
            }
        }
        Some(b'K' | b'L' | b'P' | b'R') => {
            let zone = c.zone()?;
            c.expect(b'(')?;
            let rel = c.rel()?;
            c.expect(b',')?;
            let omega = c.small()?;
            if !(1..=5).contains(&omega) {
                return Err("phase coordinate must be 1..5");
            }
            c.expect(b')')?;
            Ok(Symbol::State {
                zone,
                bar,
                coord: Coord::new(rel, omega as u8),
            })
        }
        _ => Err("unknown symbol"),
    }
}

/// Parses a whitespace-separated word.
pub fn parse_word(text: &str) -> Result<Word<Symbol>, TokenError> {
    text.split_whitespace()
        .map(parse_letter)
        .collect::<Result<Vec<_>, _>>()
        .map(Word::from_letters)
}

/// Parses a rule token such as `t2(r1,4)`, `~t34(r2)` or `t1(e,3)^-1`.
pub fn parse_rule(token: &str) -> Result<RuleId, TokenError> {
    let mut c = Cursor::new(token.trim());
    let bar = c.eat(b'~');
    let key = c.rule_key().map_err(|r| malformed(token, r))?;
    let inverse = c.inverse_suffix().map_err(|r| malformed(token, r))?;
    Ok(RuleId { key, bar, inverse })
}

/// Parses a history: rule tokens separated by whitespace or newlines.
pub fn parse_history(text: &str) -> Result<Vec<RuleId>, TokenError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .flat_map(|l| l.split_whitespace())
        .map(parse_rule)
        .collect()
}
