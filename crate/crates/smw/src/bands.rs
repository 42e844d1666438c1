//! θ-bands and trapezia: van Kampen cells glued along θ-edges that simulate
//! rule applications, with a cell-level verifier.

use std::fmt;

use thiserror::Error;

use crate::hardware::{AdmissibleWord, BaseLetter, Flavor, Hardware};
use crate::presentation::{alpha, RelatorIndex};
use crate::smachine::{is_reduced_history, Diagnosis, Machine};
use crate::symbol::{Kind, RuleId, Symbol, Zone};
use crate::words::{Letter, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BandError {
    #[error("rule {rule} is not applicable: {diagnosis}")]
    NotApplicable { rule: RuleId, diagnosis: Diagnosis },
    #[error("step {step}: rule {rule} is not applicable: {diagnosis}")]
    StepNotApplicable {
        step: usize,
        rule: RuleId,
        diagnosis: Diagnosis,
    },
    #[error("cell {cell}: boundary {boundary} is not a defining relator")]
    RelatorMismatch { cell: usize, boundary: String },
    #[error("history is not freely reduced")]
    NotReduced,
    #[error("trapezia are built for the bar machine only")]
    NotBar,
    #[error("step {0}: the end letters receive tape words, so bands do not stack")]
    OpenFlank(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellKind {
    /// A main relation around a state letter.
    State,
    /// An auxiliary relation around a tape letter.
    Tape,
}

/// One cell of a band. Its boundary, read from the bottom-left corner, is
/// `left⁻¹ · bottom · right · top⁻¹`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub kind: CellKind,
    pub relation: usize,
    /// Set when the cell reads the stored relator backwards.
    pub inverted: bool,
    pub left: Letter<Symbol>,
    pub right: Letter<Symbol>,
    pub bottom: Word,
    pub top: Word,
}

impl Cell {
    pub fn boundary(&self) -> Word {
        let mut w = Word::from_letters(vec![self.left.inverse()]);
        w.extend(&self.bottom);
        w.push(self.right);
        w.extend(&self.top.inverse());
        w
    }

    fn flipped(&self) -> Cell {
        Cell {
            kind: self.kind,
            relation: self.relation,
            inverted: !self.inverted,
            left: self.left.inverse(),
            right: self.right.inverse(),
            bottom: self.top.clone(),
            top: self.bottom.clone(),
        }
    }
}

/// A row of cells glued along θ-edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub rule: RuleId,
    pub cells: Vec<Cell>,
    /// Reduced bottom label.
    pub bottom: Word,
    /// Reduced top label.
    pub top: Word,
}

impl Band {
    pub fn left_edge(&self) -> Option<Letter<Symbol>> {
        self.cells.first().map(|c| c.left)
    }

    pub fn right_edge(&self) -> Option<Letter<Symbol>> {
        self.cells.last().map(|c| c.right)
    }

    pub fn state_cells(&self) -> usize {
        self.cells.iter().filter(|c| c.kind == CellKind::State).count()
    }
}

fn theta(rule: RuleId, zone: Zone) -> Letter<Symbol> {
    Letter {
        sym: Symbol::Theta {
            rule: rule.key,
            zone,
            bar: rule.bar,
        },
        inv: rule.inverse,
    }
}

fn decorate(rule: RuleId, w: &Word) -> Word {
    if rule.bar {
        w.clone()
    } else {
        alpha(rule, w).expect("tape and state letters")
    }
}

fn locate_cell(p: &RelatorIndex, cell: &mut Cell, k: usize) -> Result<(), BandError> {
    let boundary = cell.boundary();
    let idx = p.lookup(&boundary).ok_or_else(|| BandError::RelatorMismatch {
        cell: k,
        boundary: boundary.to_string(),
    })?;
    cell.relation = idx;
    let stored = &p.relation(idx).expect("index in range").relator;
    cell.inverted = !is_rotation(boundary.reduced().letters(), stored.letters());
    Ok(())
}

fn is_rotation<T: PartialEq>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && (0..a.len().max(1)).any(|k| a[k..].iter().chain(&a[..k]).eq(b.iter()))
}

/// Band of a positive rule whose bottom reads `w` (decorated for the strict
/// machine).
fn positive_band(p: &RelatorIndex, m: &Machine, w: &AdmissibleWord, rule: RuleId) -> Result<Band, BandError> {
    debug_assert!(!rule.inverse);
    let hw = m.hardware();
    let next = m.apply(rule, w).map_err(|diagnosis| BandError::NotApplicable { rule, diagnosis })?;
    let back = rule.inv();
    let mut cells = Vec::new();
    for (k, s) in w.states.iter().enumerate() {
        let (v, u) = m.flanks(rule, s.base);
        let mut top = decorate(back, &v);
        top.push(hw.state(next.states[k].base, next.states[k].bar, next.coord));
        top.extend(&decorate(back, &u));
        cells.push(Cell {
            kind: CellKind::State,
            relation: 0,
            inverted: false,
            left: theta(rule, hw.zone_before(s.base)),
            right: theta(rule, hw.zone_after(s.base)),
            bottom: Word::from_letters(vec![hw.state(s.base, s.bar, w.coord)]),
            top,
        });
        let Some(inner) = w.inners.get(k) else { continue };
        let zone = hw.zone_after(s.base);
        for l in inner.letters() {
            let a = Word::from_letters(vec![*l]);
            cells.push(Cell {
                kind: CellKind::Tape,
                relation: 0,
                inverted: false,
                left: theta(rule, zone),
                right: theta(rule, zone),
                bottom: decorate(rule, &a),
                top: decorate(back, &a),
            });
        }
    }
    for (k, c) in cells.iter_mut().enumerate() {
        locate_cell(p, c, k)?;
    }
    Ok(band_from_cells(rule, cells))
}

fn band_from_cells(rule: RuleId, cells: Vec<Cell>) -> Band {
    let mut bottom = Word::new();
    let mut top = Word::new();
    for c in &cells {
        bottom.extend(&c.bottom);
        top.extend(&c.top);
    }
    Band {
        rule,
        cells,
        bottom: bottom.reduced(),
        top: top.reduced(),
    }
}

/// The θ-band of `rule` whose bottom is `w`, decorated by `α_rule` in the
/// strict machine. Bands of inverse rules are bands of the positive rule,
/// built on `w ∘ rule` and flipped.
pub fn theta_band(p: &RelatorIndex, m: &Machine, w: &AdmissibleWord, rule: RuleId) -> Result<Band, BandError> {
    if !rule.inverse {
        return positive_band(p, m, w, rule);
    }
    let next = m.apply(rule, w).map_err(|diagnosis| BandError::NotApplicable { rule, diagnosis })?;
    let up = positive_band(p, m, &next, rule.inv())?;
    let cells = up.cells.iter().map(Cell::flipped).collect();
    Ok(band_from_cells(rule, cells))
}

/// Bands stacked along a computation of the bar machine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapezium {
    pub history: Vec<RuleId>,
    pub words: Vec<AdmissibleWord>,
    pub bands: Vec<Band>,
}

impl Trapezium {
    pub fn height(&self) -> usize {
        self.bands.len()
    }

    pub fn bottom(&self) -> &AdmissibleWord {
        &self.words[0]
    }

    pub fn top(&self) -> &AdmissibleWord {
        self.words.last().expect("at least one word")
    }

    pub fn cell_count(&self) -> usize {
        self.bands.iter().map(|b| b.cells.len()).sum()
    }

    /// θ-letters of the left side, bottom to top.
    pub fn left_side(&self) -> Word {
        self.bands.iter().filter_map(Band::left_edge).collect()
    }

    /// θ-letters of the right side, bottom to top.
    pub fn right_side(&self) -> Word {
        self.bands.iter().filter_map(Band::right_edge).collect()
    }
}

/// Stacks one band per rule of `h`, starting from the bar word `w`.
pub fn trapezium(p: &RelatorIndex, m: &Machine, w: &AdmissibleWord, h: &[RuleId]) -> Result<Trapezium, BandError> {
    if m.flavor() != Flavor::Bar || h.iter().any(|r| !r.bar) {
        return Err(BandError::NotBar);
    }
    if !is_reduced_history(h) {
        return Err(BandError::NotReduced);
    }
    let hw = m.hardware();
    let mut words = vec![w.clone()];
    let mut bands = Vec::new();
    for (step, &rule) in h.iter().enumerate() {
        let cur = words.last().expect("non-empty");
        let band = theta_band(p, m, cur, rule).map_err(|e| match e {
            BandError::NotApplicable { rule, diagnosis } => BandError::StepNotApplicable { step, rule, diagnosis },
            other => other,
        })?;
        let next = m.apply(rule, cur).expect("band construction checked applicability");
        if band.bottom != cur.to_word(hw) || band.top != next.to_word(hw) {
            return Err(BandError::OpenFlank(step));
        }
        bands.push(band);
        words.push(next);
    }
    Ok(Trapezium {
        history: h.to_vec(),
        words,
        bands,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Issue {
    NotARelator,
    WrongRelation,
    Gluing,
    RuleMismatch,
    BottomLabel,
    TopLabel,
    BaseMismatch,
    BadBasePair(usize),
    LengthBound,
    MirrorPair,
    ChainBreak,
    Computation(String),
    SideHistory,
    NotReduced,
}

/// A violation located by band and, where it applies, cell.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub band: usize,
    pub cell: Option<usize>,
    pub issue: Issue,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "band {}", self.band)?;
        if let Some(c) = self.cell {
            write!(f, " cell {c}")?;
        }
        write!(f, ": {:?}", self.issue)
    }
}

fn base_of(w: &Word) -> Vec<BaseLetter> {
    w.letters()
        .iter()
        .filter_map(|l| match l.sym {
            Symbol::State { zone, .. } => Some(BaseLetter::new(zone, l.inv)),
            _ => None,
        })
        .collect()
}

/// Whether `yz` is a 2-letter base allowed in a band of a rule of the
/// given alphabet.
pub fn base_pair_allowed(hw: &Hardware, y: BaseLetter, z: BaseLetter, bar: bool) -> bool {
    if hw.succ(y) == z {
        return true;
    }
    if z != y.inverse() {
        return false;
    }
    if !bar {
        return true;
    }
    let zone = y.zone;
    let forbidden = match zone.kind {
        Kind::L | Kind::P | Kind::R => zone.j == 1,
        Kind::K => (zone.j == 1 && !y.inv) || (zone.j == 2 && y.inv),
    };
    !forbidden
}

/// Checks a band against the presentation; an empty list means verified.
pub fn verify_band(p: &RelatorIndex, hw: &Hardware, band: &Band, index: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |cell: Option<usize>, issue: Issue| out.push(Violation { band: index, cell, issue });
    for (k, c) in band.cells.iter().enumerate() {
        match p.lookup(&c.boundary()) {
            None => push(Some(k), Issue::NotARelator),
            Some(r) if r != c.relation => push(Some(k), Issue::WrongRelation),
            _ => {}
        }
        for side in [c.left, c.right] {
            let ok = matches!(side.sym, Symbol::Theta { rule, bar, .. }
                if rule == band.rule.key && bar == band.rule.bar && side.inv == band.rule.inverse);
            if !ok {
                push(Some(k), Issue::RuleMismatch);
            }
        }
        if let Some(next) = band.cells.get(k + 1) {
            if c.right != next.left {
                push(Some(k), Issue::Gluing);
            }
            if c.relation == next.relation && c.bottom == next.bottom.inverse() && c.top == next.top.inverse() {
                push(Some(k), Issue::MirrorPair);
            }
        }
    }
    let bottom: Word = band.cells.iter().flat_map(|c| c.bottom.letters().to_vec()).collect();
    let top: Word = band.cells.iter().flat_map(|c| c.top.letters().to_vec()).collect();
    if bottom.reduced() != band.bottom {
        push(None, Issue::BottomLabel);
    }
    if top.reduced() != band.top {
        push(None, Issue::TopLabel);
    }
    let base = base_of(&band.bottom);
    if base != base_of(&band.top) {
        push(None, Issue::BaseMismatch);
    }
    for (k, pair) in base.windows(2).enumerate() {
        if !base_pair_allowed(hw, pair[0], pair[1], band.rule.bar) {
            push(None, Issue::BadBasePair(k));
        }
    }
    let bound = base.len() * p.max_relator_len();
    if band.bottom.len().abs_diff(band.top.len()) > bound {
        push(None, Issue::LengthBound);
    }
    out
}

/// Checks every band, the stacking, the side histories, and that the band
/// labels form the computation of the history.
pub fn verify_trapezium(p: &RelatorIndex, m: &Machine, t: &Trapezium) -> Vec<Violation> {
    let hw = m.hardware();
    let mut out = Vec::new();
    if !is_reduced_history(&t.history) {
        out.push(Violation {
            band: 0,
            cell: None,
            issue: Issue::NotReduced,
        });
    }
    for (i, band) in t.bands.iter().enumerate() {
        out.extend(verify_band(p, hw, band, i));
        if t.history.get(i) != Some(&band.rule) {
            out.push(Violation {
                band: i,
                cell: None,
                issue: Issue::RuleMismatch,
            });
        }
        let below = t.words.get(i).map(|w| w.to_word(hw));
        let above = t.words.get(i + 1).map(|w| w.to_word(hw));
        if below.as_ref() != Some(&band.bottom) || above.as_ref() != Some(&band.top) {
            out.push(Violation {
                band: i,
                cell: None,
                issue: Issue::ChainBreak,
            });
            continue;
        }
        // The labels must be admissible and related by the rule.
        let issue = match m.parse(&band.bottom) {
            Err(e) => Some(e.to_string()),
            Ok(u) => match m.apply(band.rule, &u) {
                Err(d) => Some(d.to_string()),
                Ok(v) if v.to_word(hw) != band.top => Some("top differs from the rule image".into()),
                Ok(_) => None,
            },
        };
        if let Some(msg) = issue {
            out.push(Violation {
                band: i,
                cell: None,
                issue: Issue::Computation(msg),
            });
        }
    }
    let side_rules = |w: &Word| -> Vec<RuleId> {
        w.letters()
            .iter()
            .filter_map(|l| match l.sym {
                Symbol::Theta { rule, bar, .. } => Some(RuleId {
                    key: rule,
                    bar,
                    inverse: l.inv,
                }),
                _ => None,
            })
            .collect()
    };
    if side_rules(&t.left_side()) != t.history || side_rules(&t.right_side()) != t.history {
        out.push(Violation {
            band: 0,
            cell: None,
            issue: Issue::SideHistory,
        });
    }
    out
}

/// Line-per-cell text form: band header lines and one line per cell with
/// its relation index and the cells it is glued to.
pub fn band_to_text(band: &Band, index: usize) -> String {
    let mut s = format!("band {index} {}\n", band.rule);
    let n = band.cells.len();
    for (k, c) in band.cells.iter().enumerate() {
        let glue = |o: Option<usize>| o.map_or("side".to_string(), |x| x.to_string());
        s.push_str(&format!(
            "cell {k} {} relation {}{} glue {} {}\n",
            match c.kind {
                CellKind::State => "state",
                CellKind::Tape => "tape",
            },
            c.relation,
            if c.inverted { " inverted" } else { "" },
            glue(k.checked_sub(1)),
            glue((k + 1 < n).then_some(k + 1)),
        ));
    }
    s
}

pub fn trapezium_to_text(t: &Trapezium) -> String {
    t.bands
        .iter()
        .enumerate()
        .map(|(i, b)| band_to_text(b, i))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::derive::bar_conjugated_insertion;
    use crate::hardware::{gen_word, sigma_w, sigma_w_bar, EEPresentation};
    use crate::presentation::{emit, RelationKind};
    use crate::smachine::build_machine;
    use crate::symbol::{parse_history, parse_rule};

    fn setup() -> (Hardware, RelatorIndex) {
        let ee = EEPresentation::parse(
            "generators: a1 a2\ninvolution: a1 a2\nm: 1\nrelator:\nrelator: a1 a2\nrelator: a2 a1\n",
        )
        .unwrap();
        let hw = Hardware::new(ee, 8).unwrap();
        let p = RelatorIndex::new(emit(&hw));
        (hw, p)
    }

    #[test]
    fn bar_band_over_the_empty_sigma_word() {
        let (hw, p) = setup();
        let m = build_machine(&hw, Flavor::Bar);
        let w = sigma_w_bar(&hw, &Word::new()).unwrap();
        let rule = parse_rule("~t12(r1)").unwrap();
        let band = theta_band(&p, &m, &w, rule).unwrap();
        assert_eq!(band.top, m.apply(rule, &w).unwrap().to_word(&hw));
        assert_eq!(band.cells.len(), w.states.len());
        assert!(band
            .cells
            .iter()
            .all(|c| p.relation(c.relation).unwrap().kind == RelationKind::BarMainThetaK));
        assert!(verify_band(&p, &hw, &band, 0).is_empty());
    }

    #[test]
    fn strict_p_cell_is_the_main_relation() {
        let (hw, p) = setup();
        let m = build_machine(&hw, Flavor::Strict);
        let w = sigma_w(&hw, &gen_word(&[1])).unwrap();
        let rule = parse_rule("t1(e,1)").unwrap();
        let band = theta_band(&p, &m, &w, rule).unwrap();
        let p1 = band
            .cells
            .iter()
            .find(|c| matches!(c.bottom.letters()[0].sym, Symbol::State { zone, .. } if zone == Zone::new(Kind::P, 1)))
            .unwrap();
        let rel = p.relation(p1.relation).unwrap();
        assert_eq!(rel.kind, RelationKind::MainThetaK);
        assert_eq!(rel.rule, Some(rule));
        assert_eq!(rel.zone, Some(Zone::new(Kind::P, 1)));
        assert!(verify_band(&p, &hw, &band, 0).is_empty());
        let inv = theta_band(&p, &m, &m.apply(rule, &w).unwrap(), rule.inv()).unwrap();
        assert!(verify_band(&p, &hw, &inv, 0).is_empty());
    }

    #[test]
    fn conjugated_insertion_trapezium() {
        let (hw, p) = setup();
        let m = build_machine(&hw, Flavor::Bar);
        let (w, u) = (gen_word(&[2]), gen_word(&[1]).inverse());
        let h = bar_conjugated_insertion(&hw, &w, &u, 1).unwrap();
        let start = sigma_w_bar(&hw, &w).unwrap();
        let t = trapezium(&p, &m, &start, &h).unwrap();
        assert_eq!(t.height(), h.len());
        let target = w.concat(&u).concat(&gen_word(&[1, 2])).concat(&u.inverse()).reduced();
        let expected = sigma_w_bar(&hw, &target).unwrap();
        assert_eq!(t.top().to_word(&hw), expected.to_word(&hw));
        assert!(verify_trapezium(&p, &m, &t).is_empty());
        let trace = m.run(&start, &h);
        assert_eq!(trace.words, t.words);
    }

    #[test]
    fn tampering_is_located() {
        let (hw, p) = setup();
        let m = build_machine(&hw, Flavor::Bar);
        let start = sigma_w_bar(&hw, &gen_word(&[1, 2])).unwrap();
        let h = parse_history("~t12(r2) ~t2(r2,1)").unwrap();
        let mut t = trapezium(&p, &m, &start, &h).unwrap();
        assert!(verify_trapezium(&p, &m, &t).is_empty());
        t.bands[1].cells[3].relation += 1;
        let report = verify_trapezium(&p, &m, &t);
        assert_eq!(report.len(), 1);
        assert_eq!((report[0].band, report[0].cell), (1, Some(3)));
    }

    #[test]
    fn text_form() {
        let (hw, p) = setup();
        let m = build_machine(&hw, Flavor::Bar);
        let w = sigma_w_bar(&hw, &Word::new()).unwrap();
        let band = theta_band(&p, &m, &w, parse_rule("~t12(r1)").unwrap()).unwrap();
        let text = band_to_text(&band, 0);
        assert!(text.starts_with("band 0 ~t12(r1)\ncell 0 state relation "));
        assert_eq!(text.lines().count(), 1 + band.cells.len());
    }
}
