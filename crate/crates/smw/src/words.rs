//! Free-group words, cyclic words and cancellation pairings of Dyck words.

use thiserror::Error;

use crate::symbol::Symbol;

/// A generator together with an exponent sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter<S> {
    pub sym: S,
    pub inv: bool,
}

impl<S: Clone + PartialEq> Letter<S> {
    pub fn pos(sym: S) -> Self {
        Letter { sym, inv: false }
    }

    pub fn neg(sym: S) -> Self {
        Letter { sym, inv: true }
    }

    pub fn inverse(&self) -> Self {
        Letter {
            sym: self.sym.clone(),
            inv: !self.inv,
        }
    }

    pub fn cancels(&self, other: &Self) -> bool {
        self.inv != other.inv && self.sym == other.sym
    }
}

/// A word in the free group, stored letter by letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word<S = Symbol> {
    letters: Vec<Letter<S>>,
}

impl<S> Default for Word<S> {
    fn default() -> Self {
        Word {
            letters: Vec::new(),
        }
    }
}

impl<S: Clone + PartialEq> Word<S> {
    pub fn new() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Letter<S>>) -> Self {
        Word { letters }
    }

    pub fn letter(sym: S) -> Self {
        Word {
            letters: vec![Letter::pos(sym)],
        }
    }

    pub fn letters(&self) -> &[Letter<S>] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter<S>> {
        self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn push(&mut self, l: Letter<S>) {
        self.letters.push(l);
    }

    pub fn extend(&mut self, other: &Word<S>) {
        self.letters.extend_from_slice(&other.letters);
    }

    pub fn concat(&self, other: &Word<S>) -> Word<S> {
        let mut w = self.clone();
        w.extend(other);
        w
    }

    pub fn inverse(&self) -> Word<S> {
        Word {
            letters: self.letters.iter().rev().map(Letter::inverse).collect(),
        }
    }

    /// `self` if `positive`, else its inverse.
    pub fn signed(&self, positive: bool) -> Word<S> {
        if positive {
            self.clone()
        } else {
            self.inverse()
        }
    }

    /// Appends a letter, cancelling against the last one when possible.
    pub fn push_reducing(&mut self, l: Letter<S>) {
        if self.letters.last().is_some_and(|last| last.cancels(&l)) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    pub fn is_reduced(&self) -> bool {
        self.letters.windows(2).all(|p| !p[0].cancels(&p[1]))
    }

    pub fn is_positive(&self) -> bool {
        self.letters.iter().all(|l| !l.inv)
    }

    pub fn is_negative(&self) -> bool {
        self.letters.iter().all(|l| l.inv)
    }

    /// Projection onto the letters satisfying `keep`.
    pub fn project(&self, keep: impl Fn(&S) -> bool) -> Word<S> {
        Word {
            letters: self
                .letters
                .iter()
                .filter(|l| keep(&l.sym))
                .cloned()
                .collect(),
        }
    }

    /// Letterwise substitution followed by free reduction.
    pub fn map_reduce(&self, mut image: impl FnMut(&S) -> Word<S>) -> Word<S> {
        let mut out = Word::new();
        for l in &self.letters {
            let w = image(&l.sym);
            for x in w.signed(!l.inv).letters {
                out.push_reducing(x);
            }
        }
        out
    }

    pub fn reduced(&self) -> Word<S> {
        reduce(self)
    }
}

impl<S> FromIterator<Letter<S>> for Word<S> {
    fn from_iter<I: IntoIterator<Item = Letter<S>>>(iter: I) -> Self {
        Word {
            letters: iter.into_iter().collect(),
        }
    }
}

/// Free reduction.
pub fn reduce<S: Clone + PartialEq>(w: &Word<S>) -> Word<S> {
    let mut out = Word::new();
    for l in w.letters() {
        out.push_reducing(l.clone());
    }
    out
}

pub fn is_positive<S: Clone + PartialEq>(w: &Word<S>) -> bool {
    w.is_positive()
}

/// Index of the lexicographically least rotation.
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    if n == 0 {
        return 0;
    }
    // Two-candidate scan (Booth-style), linear time.
    let (mut i, mut j, mut k) = (0usize, 1usize, 0usize);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        match a.cmp(b) {
            std::cmp::Ordering::Equal => k += 1,
            std::cmp::Ordering::Greater => {
                i += k + 1;
                if i == j {
                    i += 1;
                }
                k = 0;
            }
            std::cmp::Ordering::Less => {
                j += k + 1;
                if i == j {
                    j += 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// A word read around a circle, stored in its least rotation.
///
/// Words built by [`cyclic_reduce`] are also cyclically reduced; words built
/// by [`CyclicWord::new`] keep every letter, which is what pairing
/// enumeration over Dyck words needs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord<S = Symbol> {
    letters: Vec<Letter<S>>,
}

impl<S: Clone + Ord> CyclicWord<S> {
    pub fn new(w: &Word<S>) -> Self {
        let k = least_rotation(w.letters());
        let mut letters = w.letters()[k..].to_vec();
        letters.extend_from_slice(&w.letters()[..k]);
        CyclicWord { letters }
    }

    /// Offset `k` such that the canonical rotation starts at `w[k]`.
    pub fn canonical_offset(w: &Word<S>) -> usize {
        least_rotation(w.letters())
    }

    pub fn letters(&self) -> &[Letter<S>] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn to_word(&self) -> Word<S> {
        Word::from_letters(self.letters.clone())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        let n = self.letters.len();
        n < 2 || (Word::from_letters(self.letters.clone()).is_reduced()
            && !self.letters[0].cancels(&self.letters[n - 1]))
    }

    /// Canonical form of the cyclic word up to inversion.
    pub fn symmetric_normal(&self) -> CyclicWord<S> {
        let inv = CyclicWord::new(&self.to_word().inverse());
        if inv.letters < self.letters {
            inv
        } else {
            self.clone()
        }
    }

    pub fn is_dyck(&self) -> bool {
        reduce(&self.to_word()).is_empty()
    }
}

/// Splits `w` as `conjugator · core · conjugator⁻¹` with `core` cyclically
/// reduced. The conjugator absorbs the rotation to canonical form.
pub fn cyclic_reduce<S: Clone + Ord>(w: &Word<S>) -> (Word<S>, CyclicWord<S>) {
    let r = reduce(w);
    let l = r.letters();
    let mut a = 0;
    let mut b = l.len();
    while b - a >= 2 && l[a].cancels(&l[b - 1]) {
        a += 1;
        b -= 1;
    }
    let mut conj = Word::from_letters(l[..a].to_vec());
    let core = Word::from_letters(l[a..b].to_vec());
    let k = least_rotation(core.letters());
    // core = p q with canonical q p; core = p (q p) p^-1.
    conj.extend(&Word::from_letters(core.letters()[..k].to_vec()));
    (reduce(&conj), CyclicWord::new(&core))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DyckError {
    #[error("positions ({0}, {1}) are not a pair of the pairing")]
    PairNotInPairing(usize, usize),
}

/// A cancellation pairing of a Dyck word, with parenthesization.
///
/// Positions refer to the canonical rotation. The circle is cut in front of
/// position `root`; reading clockwise from the cut, the first letter of each
/// pair opens it and the second closes it. A pair contains every pair lying
/// on its clockwise arc from opening to closing letter.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyckPairing {
    pairs: Vec<(usize, usize)>,
    root: usize,
    parent: Vec<Option<usize>>,
}

impl DyckPairing {
    /// Pairing with the given matching, cut in front of position `root`.
    pub fn from_matching(n: usize, matching: &[(usize, usize)], root: usize) -> Self {
        let rel = |p: usize| (p + n - root) % n;
        let mut pairs: Vec<(usize, usize)> = matching
            .iter()
            .map(|&(p, q)| if rel(p) < rel(q) { (p, q) } else { (q, p) })
            .collect();
        pairs.sort_by_key(|&(o, _)| rel(o));
        let mut parent = vec![None; pairs.len()];
        let mut stack: Vec<usize> = Vec::new();
        for (k, &(o, _)) in pairs.iter().enumerate() {
            while let Some(&top) = stack.last() {
                if rel(pairs[top].1) < rel(o) {
                    stack.pop();
                } else {
                    break;
                }
            }
            parent[k] = stack.last().copied();
            stack.push(k);
        }
        DyckPairing {
            pairs,
            root,
            parent,
        }
    }

    /// Pairs as (opening, closing) positions, ordered by opening position
    /// measured from the cut.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Innermost pair containing pair `k`.
    pub fn parent(&self, k: usize) -> Option<usize> {
        self.parent[k]
    }

    pub fn partner(&self, p: usize) -> Option<usize> {
        self.pairs.iter().find_map(|&(a, b)| {
            if a == p {
                Some(b)
            } else if b == p {
                Some(a)
            } else {
                None
            }
        })
    }

    fn find(&self, p: usize, q: usize) -> Option<usize> {
        self.pairs
            .iter()
            .position(|&(a, b)| (a, b) == (p, q) || (a, b) == (q, p))
    }

    /// Unordered matching, sorted, independent of the parenthesization.
    pub fn matching(&self) -> Vec<(usize, usize)> {
        let mut m: Vec<_> = self
            .pairs
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        m.sort_unstable();
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    Minus,
    Plus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Normality {
    Normal,
    Abnormal,
}

/// Visits every non-crossing matching of mutually inverse letters of the
/// linear word `w`, leftmost-innermost first. The visitor returns `false` to
/// stop.
fn visit_matchings<S: PartialEq + Clone>(
    w: &[Letter<S>],
    visit: &mut dyn FnMut(&[(usize, usize)]) -> bool,
) {
    fn go<S: PartialEq + Clone>(
        w: &[Letter<S>],
        todo: &mut Vec<(usize, usize)>,
        cur: &mut Vec<(usize, usize)>,
        visit: &mut dyn FnMut(&[(usize, usize)]) -> bool,
    ) -> bool {
        let Some((l, r)) = todo.pop() else {
            return visit(cur);
        };
        if l == r {
            let cont = go(w, todo, cur, visit);
            todo.push((l, r));
            return cont;
        }
        let mut q = l + 1;
        while q < r {
            if w[q].cancels(&w[l]) {
                todo.push((q + 1, r));
                todo.push((l + 1, q));
                cur.push((l, q));
                let cont = go(w, todo, cur, visit);
                cur.pop();
                todo.pop();
                todo.pop();
                if !cont {
                    todo.push((l, r));
                    return false;
                }
            }
            q += 2;
        }
        todo.push((l, r));
        true
    }
    if w.len() % 2 != 0 {
        return;
    }
    let mut todo = vec![(0, w.len())];
    go(w, &mut todo, &mut Vec::new(), visit);
}

/// Cancellation pairings of a Dyck word in enumeration order, at most
/// `limit` of them, each cut in front of position 0. Non-Dyck input yields
/// an empty list.
pub fn enumerate_pairings<S: Clone + Ord>(w: &CyclicWord<S>, limit: usize) -> Vec<DyckPairing> {
    let mut out = Vec::new();
    if limit == 0 || !w.is_dyck() {
        return out;
    }
    let n = w.len();
    visit_matchings(w.letters(), &mut |m| {
        out.push(DyckPairing::from_matching(n, m, 0));
        out.len() < limit
    });
    out
}

fn is_minus<S: Clone + PartialEq>(w: &[Letter<S>], p: &DyckPairing) -> bool {
    p.pairs.iter().all(|&(o, c)| w[o].inv && !w[c].inv)
}

/// First pairing, in enumeration order and then by cut position, all of
/// whose pairs read `(z⁻¹, z)` clockwise.
pub fn find_minus_pairing<S: Clone + Ord>(w: &CyclicWord<S>) -> Option<DyckPairing> {
    if !w.is_dyck() {
        return None;
    }
    let n = w.len();
    if n == 0 {
        return Some(DyckPairing::from_matching(0, &[], 0));
    }
    let mut found = None;
    visit_matchings(w.letters(), &mut |m| {
        for root in 0..n {
            let p = DyckPairing::from_matching(n, m, root);
            if is_minus(w.letters(), &p) {
                found = Some(p);
                return false;
            }
        }
        true
    });
    found
}

/// Symmetric dual of [`find_minus_pairing`].
pub fn find_plus_pairing<S: Clone + Ord>(w: &CyclicWord<S>) -> Option<DyckPairing> {
    if !w.is_dyck() {
        return None;
    }
    let n = w.len();
    if n == 0 {
        return Some(DyckPairing::from_matching(0, &[], 0));
    }
    let mut found = None;
    visit_matchings(w.letters(), &mut |m| {
        for root in 0..n {
            let p = DyckPairing::from_matching(n, m, root);
            if p.pairs.iter().all(|&(o, c)| !w.letters()[o].inv && w.letters()[c].inv) {
                found = Some(p);
                return false;
            }
        }
        true
    });
    found
}

/// Orientation and normality of the pair at positions `pair`.
///
/// A pair is normal when every pair containing it joins occurrences of the
/// same generator as the pair itself.
pub fn classify_pair<S: Clone + Ord>(
    w: &CyclicWord<S>,
    pairing: &DyckPairing,
    pair: (usize, usize),
) -> Result<(Orientation, Normality), DyckError> {
    let k = pairing
        .find(pair.0, pair.1)
        .ok_or(DyckError::PairNotInPairing(pair.0, pair.1))?;
    let l = w.letters();
    let (o, _) = pairing.pairs[k];
    let orientation = if l[o].inv {
        Orientation::Minus
    } else {
        Orientation::Plus
    };
    let mut normality = Normality::Normal;
    let mut up = pairing.parent[k];
    while let Some(a) = up {
        if l[pairing.pairs[a].0].sym != l[o].sym {
            normality = Normality::Abnormal;
            break;
        }
        up = pairing.parent[a];
    }
    Ok((orientation, normality))
}
