//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a non-zero status if any criterion fails. `SMW_SEED` overrides the seed.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smw::bands::{trapezium, verify_trapezium};
use smw::derive::{bar_conjugated_insertion, derivation_history, insertion_history, DerivationStep};
use smw::derive::{INSERTION_OFFSET, INSERTION_SLOPE};
use smw::h2::{flank_bound, flank_size, x_flank, x_words_conjugate};
use smw::hardware::{block_word, gen_word, sigma_w, sigma_w_bar, AdmissibleWord, EEPresentation, Flavor, Hardware};
use smw::presentation::{delta, emit, normalize, Presentation, RelationKind, RelatorIndex};
use smw::smachine::{brief_history, build_machine, is_historical_form, Machine};
use smw::symbol::{parse_rule, Coord, Family, Kind, RuleId, RuleKey, Symbol, Zone};
use smw::words::{enumerate_pairings, find_minus_pairing, CyclicWord, Letter, Word};

const DEFAULT_SEED: u64 = 0x5eed_2024;
const N: usize = 8;

type Outcome = Result<String, String>;

struct Ctx {
    hw: Hardware,
    strict: Machine,
    bar: Machine,
    mixed: Machine,
    rng: ChaCha8Rng,
}

fn data_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(name)
}

fn random_gen_word(rng: &mut ChaCha8Rng, max_len: usize, positive: bool) -> Word {
    let len = rng.gen_range(0..=max_len);
    let mut w = Word::new();
    while w.len() < len {
        let l = Letter {
            sym: Symbol::Gen(rng.gen_range(1..=2)),
            inv: !positive && rng.gen_bool(0.5),
        };
        w.push_reducing(l);
    }
    w
}

fn random_walk(m: &Machine, start: &AdmissibleWord, steps: usize, rng: &mut ChaCha8Rng) -> (Vec<AdmissibleWord>, Vec<RuleId>) {
    let mut words = vec![start.clone()];
    let mut h: Vec<RuleId> = Vec::new();
    for _ in 0..steps {
        let cur = words.last().expect("non-empty");
        let last = h.last().copied();
        let options: Vec<RuleId> = m
            .applicable_rules(cur)
            .into_iter()
            .filter(|&id| Some(id.inv()) != last)
            .collect();
        let Some(&id) = options.choose(rng) else {
            break;
        };
        let next = m.apply(id, cur).expect("applicable");
        words.push(next);
        h.push(id);
    }
    (words, h)
}

/// A contiguous piece `y_a u_a … y_b` of an admissible word, re-parsed.
fn segment(m: &Machine, w: &AdmissibleWord, a: usize, b: usize) -> Option<AdmissibleWord> {
    let piece = AdmissibleWord {
        flavor: w.flavor,
        coord: w.coord,
        states: w.states[a..=b].to_vec(),
        inners: w.inners[a..b].to_vec(),
    };
    m.parse(&piece.to_word(m.hardware())).ok()
}

fn random_segment(m: &Machine, w: &AdmissibleWord, rng: &mut ChaCha8Rng) -> Option<AdmissibleWord> {
    let t = w.states.len();
    let a = rng.gen_range(0..t);
    let b = rng.gen_range(a..t);
    segment(m, w, a, b)
}

fn sigma_start(hw: &Hardware, bar: bool, rng: &mut ChaCha8Rng) -> AdmissibleWord {
    if bar {
        sigma_w_bar(hw, &random_gen_word(rng, 3, false)).expect("generator word")
    } else {
        sigma_w(hw, &random_gen_word(rng, 3, true)).expect("positive word")
    }
}

/// Random admissible words of a machine: walks from Σ words, an insertion
/// prefix to reach later phases, and segments of both.
fn random_admissible(ctx: &mut Ctx, flavor: Flavor) -> AdmissibleWord {
    let m = match flavor {
        Flavor::Strict => &ctx.strict,
        Flavor::Bar => &ctx.bar,
        Flavor::Mixed => &ctx.mixed,
    };
    let rng = &mut ctx.rng;
    let bar = match flavor {
        Flavor::Strict => false,
        Flavor::Bar => true,
        Flavor::Mixed => rng.gen_bool(0.5),
    };
    let mut w = sigma_start(&ctx.hw, bar, rng);
    w = m.parse(&w.to_word(&ctx.hw)).expect("Σ words are admissible");
    // Follow a prefix of an insertion history to reach a random phase.
    let rel = rng.gen_range(1..=2);
    let h = if bar {
        let v = random_gen_word(rng, 2, false);
        let base = sigma_form_word(&ctx.hw, &w);
        bar_conjugated_insertion(&ctx.hw, &base, &v, rel).expect("history")
    } else {
        let base = sigma_form_word(&ctx.hw, &w);
        let pos = rng.gen_range(0..=base.len());
        insertion_history(&ctx.hw, &base, pos, rel, false).expect("history")
    };
    let cut = rng.gen_range(0..=h.len());
    let trace = m.run(&w, &h[..cut]);
    w = trace.last().clone();
    let steps = rng.gen_range(0..6);
    let (words, _) = random_walk(m, &w, steps, rng);
    w = words.last().expect("non-empty").clone();
    if rng.gen_bool(0.5) {
        if let Some(s) = random_segment(m, &w, rng) {
            let steps = rng.gen_range(0..6);
            let (words, _) = random_walk(m, &s, steps, rng);
            return words.last().expect("non-empty").clone();
        }
    }
    w
}

/// The word `w` of a Σ(w) or Σ̄(w) word, read from block 3.
fn sigma_form_word(hw: &Hardware, w: &AdmissibleWord) -> Word {
    smw::derive::sigma_form(hw, w).expect("a Σ word")
}

fn positive_words(max_len: usize) -> Vec<Word> {
    let mut out = vec![Vec::<u16>::new()];
    let mut layer = vec![Vec::<u16>::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for i in 1..=2 {
                let mut v = w.clone();
                v.push(i);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out.iter().map(|w| gen_word(w)).collect()
}

fn insertion_simulation(ctx: &mut Ctx) -> Outcome {
    let hw = &ctx.hw;
    let mut cases = 0;
    let mut slowest = Duration::ZERO;
    for w in positive_words(4) {
        for pos in 0..=w.len() {
            for rel in 1..=2u16 {
                let clock = Instant::now();
                let h = insertion_history(hw, &w, pos, rel, false).map_err(|e| e.to_string())?;
                let mut target: Vec<Letter<Symbol>> = w.letters()[..pos].to_vec();
                target.extend_from_slice(gen_word(hw.ee().relator(rel)).letters());
                target.extend_from_slice(&w.letters()[pos..]);
                let target = Word::from_letters(target);
                let trace = ctx.strict.run(&sigma_w(hw, &w).expect("positive"), &h);
                if let Some((t, d)) = &trace.failure {
                    return Err(format!("w={w} pos={pos} r{rel}: step {t} failed: {d}"));
                }
                if *trace.last() != sigma_w(hw, &target).expect("positive") {
                    return Err(format!("w={w} pos={pos} r{rel}: wrong final word"));
                }
                let bound = INSERTION_SLOPE * (w.len() + target.len()) + INSERTION_OFFSET;
                if h.len() > bound {
                    return Err(format!("w={w} pos={pos} r{rel}: |h|={} > {bound}", h.len()));
                }
                slowest = slowest.max(clock.elapsed());
                cases += 1;
            }
        }
    }
    if slowest > Duration::from_secs(1) {
        return Err(format!("slowest case took {slowest:?}"));
    }
    Ok(format!("{cases} cases, slowest {slowest:?}"))
}

fn bar_conjugated(ctx: &mut Ctx) -> Outcome {
    let hw = ctx.hw.clone();
    for case in 0..200 {
        let w = random_gen_word(&mut ctx.rng, 3, false);
        let u = random_gen_word(&mut ctx.rng, 3, false);
        let rel = ctx.rng.gen_range(1..=2u16);
        let h = bar_conjugated_insertion(&hw, &w, &u, rel).map_err(|e| e.to_string())?;
        let r = gen_word(hw.ee().relator(rel));
        let target = w.concat(&u).concat(&r).concat(&u.inverse()).reduced();
        let trace = ctx.bar.run(&sigma_w_bar(&hw, &w).expect("word"), &h);
        if let Some((t, d)) = &trace.failure {
            return Err(format!("case {case} w={w} u={u} r{rel}: step {t} failed: {d}"));
        }
        if *trace.last() != sigma_w_bar(&hw, &target).expect("word") {
            return Err(format!("case {case} w={w} u={u} r{rel}: wrong final word"));
        }
    }
    Ok("200 cases".into())
}

fn rule_calculus(ctx: &mut Ctx) -> Outcome {
    let flavors = [Flavor::Strict, Flavor::Bar, Flavor::Mixed];
    let mut checked = 0;
    let mut per_flavor = [0usize; 3];
    while checked < 10_000 {
        let k = checked % 3;
        let w = random_admissible(ctx, flavors[k]);
        let m = match flavors[k] {
            Flavor::Strict => &ctx.strict,
            Flavor::Bar => &ctx.bar,
            Flavor::Mixed => &ctx.mixed,
        };
        let rules = m.applicable_rules(&w);
        for id in rules {
            let next = m.apply(id, &w).expect("applicable");
            let back = m.apply(id.inv(), &next).map_err(|d| format!("{id} on {}: inverse fails: {d}", w.display(&ctx.hw)))?;
            if back != w {
                return Err(format!("{id} on {}: inverse does not restore", w.display(&ctx.hw)));
            }
            if next.base() != w.base() {
                return Err(format!("{id} on {}: base changed", w.display(&ctx.hw)));
            }
            checked += 1;
            per_flavor[k] += 1;
        }
    }
    Ok(format!(
        "{checked} pairs (strict {}, bar {}, mixed {})",
        per_flavor[0], per_flavor[1], per_flavor[2]
    ))
}

/// Per-kind counts from the shape of the rule table.
fn expected_counts(hw: &Hardware) -> Vec<(RelationKind, usize)> {
    let ee = hw.ee();
    let mbar = ee.mbar();
    let refs = ee.relator_count();
    let nonempty = refs - 1;
    let n = hw.n() as usize;
    // (family, number of rules, number of unlocked zone kinds)
    let table = [
        (Family::F1, mbar, 2),
        (Family::F12, nonempty, 2),
        (Family::F2, refs * mbar, 3),
        (Family::F23, refs, 2),
        (Family::F3, refs * mbar, 3),
        (Family::F34, nonempty, 2),
        (Family::F4, refs * mbar, 3),
        (Family::F45, refs, 2),
        (Family::F5, refs * mbar, 3),
        (Family::F51, refs, 2),
    ];
    let rules: usize = table.iter().map(|t| t.1).sum();
    let unlocked: usize = table.iter().map(|t| t.1 * t.2).sum();
    vec![
        (RelationKind::MainThetaK, rules * 4 * n),
        (RelationKind::AuxThetaA, unlocked * n * mbar),
        (RelationKind::AuxAX, rules * 3 * n * mbar * mbar),
        (RelationKind::AuxKX, rules * 2 * n * mbar * refs * 5),
        (RelationKind::BarMainThetaK, rules * 4 * n),
        (RelationKind::BarAuxThetaA, unlocked * (n - 1) * mbar),
        (RelationKind::Hub, 1),
    ]
}

fn compiler_soundness(ctx: &mut Ctx) -> Outcome {
    let hw = &ctx.hw;
    let clock = Instant::now();
    let p = emit(hw);
    let took = clock.elapsed();
    if took > Duration::from_secs(5) {
        return Err(format!("emission took {took:?}"));
    }
    let expected = expected_counts(hw);
    if p.stats() != expected {
        return Err(format!("counts {:?} differ from {:?}", p.stats(), expected));
    }
    let golden = std::fs::read_to_string(data_path("tests/golden/present_stats.txt"))
        .map_err(|e| format!("golden file: {e}"))?;
    if golden != p.stats_report() {
        return Err("counts differ from the golden file".into());
    }
    let mut nontrivial = 0;
    for rel in &p.relations {
        let d = delta(&rel.relator);
        let carries_r = matches!(rel.kind, RelationKind::MainThetaK | RelationKind::BarMainThetaK)
            && rel.rule.is_some_and(|r| r.family() == Family::F34)
            && rel.zone.is_some_and(|z| {
                z.kind == Kind::L && !(rel.kind == RelationKind::BarMainThetaK && z.j == 1)
            });
        if carries_r {
            let r = gen_word(hw.ee().relator(rel.rule.expect("rule").key.rel));
            if normalize(&d) != normalize(&r) {
                return Err(format!("δ({}) = {d}, expected {r}", rel.relator));
            }
            nontrivial += 1;
        } else if !d.is_empty() {
            return Err(format!("δ({}) = {d} is not trivial", rel.relator));
        }
    }
    Ok(format!(
        "{} relators in {took:?}, {nontrivial} with δ = r",
        p.relations.len()
    ))
}

fn k_endpoint_start(ctx: &mut Ctx) -> AdmissibleWord {
    loop {
        let w = random_admissible(ctx, Flavor::Bar);
        let ks: Vec<usize> = (0..w.states.len())
            .filter(|&k| w.states[k].base.zone.kind == Kind::K)
            .collect();
        if ks.len() < 2 {
            continue;
        }
        let a = *ks.choose(&mut ctx.rng).expect("non-empty");
        let b = *ks.choose(&mut ctx.rng).expect("non-empty");
        if a >= b {
            continue;
        }
        if let Some(s) = segment(&ctx.bar, &w, a, b) {
            return s;
        }
    }
}

fn trapezia(ctx: &mut Ctx) -> Outcome {
    let p = RelatorIndex::new(emit(&ctx.hw));
    let mut built = 0;
    let mut cells = 0;
    while built < 500 {
        let start = k_endpoint_start(ctx);
        let height = ctx.rng.gen_range(1..=6);
        let (words, h) = random_walk(&ctx.bar, &start, height, &mut ctx.rng);
        if h.is_empty() {
            continue;
        }
        let t = trapezium(&p, &ctx.bar, &start, &h)
            .map_err(|e| format!("{} with {h:?}: {e}", start.display(&ctx.hw)))?;
        let report = verify_trapezium(&p, &ctx.bar, &t);
        if let Some(v) = report.first() {
            return Err(format!("{} issues, first: {v}", report.len()));
        }
        if t.words != words || ctx.bar.run(&start, &h).words != t.words {
            return Err(format!("trapezium words differ from the run on {}", start.display(&ctx.hw)));
        }
        cells += t.cell_count();
        built += 1;
    }
    Ok(format!("{built} trapezia, {cells} cells"))
}

/// Conjugation moves on uniform words read off the emitted relators of one
/// rule: zones with a tape letter scaling every x-letter by 4, and links
/// `x(right) ~ x(left)^e` through a state letter.
struct Moves {
    scalable: HashSet<Zone>,
    links: Vec<(Zone, Zone, usize)>,
}

fn moves_from_relators(p: &Presentation, mbar: u16, tau: RuleKey, coord: Coord) -> Moves {
    let mut ax: HashMap<Zone, BTreeSet<u16>> = HashMap::new();
    let mut links = BTreeSet::new();
    for rel in &p.relations {
        let letters = rel.relator.letters();
        let x_of = |l: &Letter<Symbol>| match l.sym {
            Symbol::X { i, zone, rule } if rule == tau => Some((i, zone)),
            _ => None,
        };
        match rel.kind {
            RelationKind::AuxAX => {
                let xs: Vec<(u16, Zone)> = letters.iter().filter_map(x_of).collect();
                if xs.len() == 5 && letters.iter().filter(|l| l.sym.is_tape()).count() == 2 {
                    ax.entry(xs[0].1).or_default().insert(xs[0].0);
                }
            }
            RelationKind::AuxKX => {
                let has_coord = letters
                    .iter()
                    .any(|l| matches!(l.sym, Symbol::State { coord: c, .. } if c == coord));
                if !has_coord {
                    continue;
                }
                let xs: Vec<(u16, Zone, bool)> = letters
                    .iter()
                    .filter_map(|l| x_of(l).map(|(i, z)| (i, z, l.inv)))
                    .collect();
                let zones: BTreeSet<Zone> = xs.iter().map(|x| x.1).collect();
                if zones.len() != 2 || xs.is_empty() {
                    continue;
                }
                // The zone whose x-letter occurs once is conjugated to the
                // power of the other.
                let count = |z: Zone| xs.iter().filter(|x| x.1 == z).count();
                let mut zs = zones.iter().copied();
                let (a, b) = (zs.next().expect("two"), zs.next().expect("two"));
                let (single, power) = if count(a) <= count(b) { (a, b) } else { (b, a) };
                links.insert((single, power, count(power)));
            }
            _ => {}
        }
    }
    let scalable = ax
        .into_iter()
        .filter(|(_, bs)| bs.len() == mbar as usize)
        .map(|(z, _)| z)
        .collect();
    Moves {
        scalable,
        links: links.into_iter().collect(),
    }
}

fn zone_of(w: &Word) -> Option<Zone> {
    match w.letters().first()?.sym {
        Symbol::X { zone, .. } => Some(zone),
        _ => None,
    }
}

fn substitute_letters(w: &Word, image: impl Fn(u16) -> Word) -> Word {
    let mut out = Word::new();
    for l in w.letters() {
        let Symbol::X { i, .. } = l.sym else {
            unreachable!("uniform words hold x-letters only")
        };
        out.extend(&image(i).signed(!l.inv));
    }
    out
}

fn xl(i: u16, zone: Zone, rule: RuleKey) -> Word {
    Word::letter(Symbol::X { i, zone, rule })
}

/// Words reachable by scaling and by shifting across links, both in the
/// direction that never divides exponents.
fn reach(start: &Word, moves: &Moves, tau: RuleKey, depth: usize, cap: usize) -> HashSet<CyclicWord> {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(CyclicWord::new(start));
    queue.push_back((start.clone(), 0));
    while let Some((w, d)) = queue.pop_front() {
        if d == depth {
            continue;
        }
        let z = zone_of(&w).expect("uniform");
        let mut next = Vec::new();
        if moves.scalable.contains(&z) {
            next.push(substitute_letters(&w, |i| {
                let x = xl(i, z, tau);
                x.concat(&x).concat(&x).concat(&x)
            }));
        }
        for &(single, power, e) in &moves.links {
            if z == single {
                next.push(substitute_letters(&w, |i| {
                    let x = xl(i, power, tau);
                    (0..e).fold(Word::new(), |acc, _| acc.concat(&x))
                }));
            }
            if z == power && e == 1 {
                next.push(substitute_letters(&w, |i| xl(i, single, tau)));
            }
        }
        for v in next {
            if v.len() <= cap && seen.insert(CyclicWord::new(&v)) {
                queue.push_back((v, d + 1));
            }
        }
    }
    seen
}

fn find(parent: &mut [usize], k: usize) -> usize {
    let mut r = k;
    while parent[r] != r {
        r = parent[r];
    }
    parent[k] = r;
    r
}

fn uniform_words(zone: Zone, tau: RuleKey, max_len: usize) -> Vec<Word> {
    let letters: Vec<Letter<Symbol>> = (1..=2)
        .flat_map(|i| {
            let x = Symbol::X { i, zone, rule: tau };
            [Letter { sym: x, inv: false }, Letter { sym: x, inv: true }]
        })
        .collect();
    let mut out = Vec::new();
    let mut layer = vec![Word::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for l in &letters {
                if w.letters().last().is_some_and(|p| p.cancels(l)) {
                    continue;
                }
                let mut v = w.clone();
                v.push(*l);
                next.push(v);
            }
        }
        out.extend(next.iter().filter(|w| CyclicWord::new(w).is_cyclically_reduced()).cloned());
        layer = next;
    }
    out
}

fn x_flank_and_conjugacy(ctx: &mut Ctx) -> Outcome {
    let hw = ctx.hw.clone();
    let p = emit(&hw);
    let index = RelatorIndex::new(p.clone());
    let rules = ctx.strict.rule_ids();
    let mut flanks = 0;
    let mut steps = 0;
    while flanks < 500 {
        let tau = *rules.choose(&mut ctx.rng).expect("rules");
        let j = ctx.rng.gen_range(1..=N as u16);
        let ws: Vec<Word> = (0..4).map(|_| random_gen_word(&mut ctx.rng, 3, true)).collect();
        if ws.iter().map(Word::len).sum::<usize>() > 8 {
            continue;
        }
        let (coord, _) = tau.transition();
        let w = block_word(&hw, j, [&ws[0], &ws[1], &ws[2], &ws[3]], coord, false);
        let f = x_flank(&hw, &w, tau).map_err(|e| format!("{w} under {tau}: {e}"))?;
        f.certificate
            .replay(|r| index.contains(r))
            .map_err(|e| format!("{w} under {tau}: {e}"))?;
        let bound = flank_bound(flank_size(&hw, &w).map_err(|e| e.to_string())?);
        for side in [&f.left, &f.right] {
            if side.weight() > bound {
                return Err(format!("{w} under {tau}: flank weight {} > {bound}", side.weight()));
            }
        }
        steps += f.certificate.steps.len();
        flanks += 1;
    }

    let tau = parse_rule("t2(r1,1)").expect("rule").key;
    let coord = Coord::new(1, 2);
    let moves = moves_from_relators(&p, hw.ee().mbar() as u16, tau, coord);
    let zones = ["L1", "K1", "K8", "L8", "R1", "R2"].map(|z| {
        let kind = match &z[..1] {
            "L" => Kind::L,
            "K" => Kind::K,
            _ => Kind::R,
        };
        Zone::new(kind, z[1..].parse().expect("index"))
    });
    let mut reps: Vec<Word> = Vec::new();
    let mut seen = HashSet::new();
    let mut words = Vec::new();
    for z in zones {
        for w in uniform_words(z, tau, 4) {
            if seen.insert(CyclicWord::new(&w)) {
                reps.push(w.clone());
            }
            words.push(w);
        }
    }
    // Oracle classes: words sharing a reachable word are conjugate.
    let mut parent: Vec<usize> = (0..reps.len()).collect();
    let mut owner: HashMap<CyclicWord, usize> = HashMap::new();
    for (k, w) in reps.iter().enumerate() {
        for c in reach(w, &moves, tau, 6, 64) {
            match owner.get(&c) {
                Some(&o) => {
                    let (a, b) = (find(&mut parent, o), find(&mut parent, k));
                    parent[a] = b;
                }
                None => {
                    owner.insert(c, k);
                }
            }
        }
    }
    let class_of: HashMap<CyclicWord, usize> = (0..reps.len())
        .map(|k| (CyclicWord::new(&reps[k]), find(&mut parent, k)))
        .collect();
    let mut pairs = 0;
    let mut positive = 0;
    for w1 in &words {
        for w2 in &reps {
            let decided = x_words_conjugate(&hw, w1, w2)
                .map_err(|e| format!("{w1} vs {w2}: {e}"))?
                .is_some();
            let oracle = class_of[&CyclicWord::new(w1)] == class_of[&CyclicWord::new(w2)];
            if decided != oracle {
                return Err(format!("{w1} vs {w2}: decision {decided}, search {oracle}"));
            }
            pairs += 1;
            positive += usize::from(decided);
        }
    }
    Ok(format!(
        "{flanks} flanks ({steps} rewrite steps), {pairs} conjugacy pairs ({positive} conjugate)"
    ))
}

fn tape_len(w: &AdmissibleWord, sector: usize) -> usize {
    w.inners[sector].len()
}

fn letter_rules(m: &Machine, family: Family) -> Vec<RuleId> {
    m.rule_ids().into_iter().filter(|id| id.family() == family).collect()
}

/// Reduced random computation using only `rules`.
fn restricted_walk(m: &Machine, start: &AdmissibleWord, rules: &[RuleId], steps: usize, rng: &mut ChaCha8Rng) -> (Vec<AdmissibleWord>, Vec<RuleId>) {
    let mut words = vec![start.clone()];
    let mut h: Vec<RuleId> = Vec::new();
    for _ in 0..steps {
        let cur = words.last().expect("non-empty");
        let last = h.last().copied();
        let options: Vec<(RuleId, AdmissibleWord)> = rules
            .iter()
            .filter(|&&id| Some(id.inv()) != last)
            .filter_map(|&id| m.apply(id, cur).ok().map(|w| (id, w)))
            .collect();
        let Some((id, next)) = options.choose(rng).cloned() else {
            break;
        };
        words.push(next);
        h.push(id);
    }
    (words, h)
}

fn conservation_law(ctx: &mut Ctx) -> Result<usize, String> {
    let hw = ctx.hw.clone();
    let mut done = 0;
    while done < 1000 {
        let g = ctx.rng.gen_range(2..=5u8);
        let family = [Family::F2, Family::F3, Family::F4, Family::F5][(g - 2) as usize];
        let rel = ctx.rng.gen_range(1..=2u16);
        let j = ctx.rng.gen_range(1..=N as u16);
        let coord = Coord::new(rel, g);
        let (u, v) = (random_gen_word(&mut ctx.rng, 4, true), random_gen_word(&mut ctx.rng, 4, true));
        let mut w = hw.in_zone(&Word::new(), Zone::new(Kind::K, j), false);
        w.push(hw.state(smw::hardware::BaseLetter::pos(Kind::K, j), false, coord));
        w.extend(&hw.in_zone(&u, Zone::new(Kind::K, j), false));
        w.push(hw.state(smw::hardware::BaseLetter::pos(Kind::L, j), false, coord));
        w.extend(&hw.in_zone(&v, Zone::new(Kind::L, j), false));
        w.push(hw.state(smw::hardware::BaseLetter::pos(Kind::P, j), false, coord));
        let Ok(start) = ctx.strict.parse(&w) else {
            continue;
        };
        let rules = letter_rules(&ctx.strict, family);
        let steps = ctx.rng.gen_range(1..=10);
        let (words, _) = restricted_walk(&ctx.strict, &start, &rules, steps, &mut ctx.rng);
        let total = tape_len(&start, 0) + tape_len(&start, 1);
        let left: Vec<usize> = words.iter().map(|w| tape_len(w, 0)).collect();
        let right: Vec<usize> = words.iter().map(|w| tape_len(w, 1)).collect();
        let monotone = |s: &[usize]| s.windows(2).all(|p| p[0] <= p[1]) || s.windows(2).all(|p| p[0] >= p[1]);
        if left.iter().zip(&right).any(|(a, b)| a + b != total) {
            return Err(format!("conservation fails from {}", start.display(&hw)));
        }
        if !monotone(&left) || !monotone(&right) {
            return Err(format!("sector lengths not monotone from {}", start.display(&hw)));
        }
        done += 1;
    }
    Ok(done)
}

/// Kind of the letter whose rules act on the sector to its right.
fn active_kind(family: Family) -> Option<Kind> {
    match family {
        Family::F1 => Some(Kind::P),
        Family::F2 | Family::F4 => Some(Kind::L),
        Family::F3 | Family::F5 => Some(Kind::R),
        _ => None,
    }
}

fn height_law(ctx: &mut Ctx) -> Result<usize, String> {
    let hw = ctx.hw.clone();
    let mut done = 0;
    while done < 1000 {
        let bar = ctx.rng.gen_bool(0.5);
        let m = if bar { &ctx.bar } else { &ctx.strict };
        let g = ctx.rng.gen_range(1..=5u8);
        let family = [Family::F1, Family::F2, Family::F3, Family::F4, Family::F5][(g - 1) as usize];
        let rel = if g == 1 { 0 } else { ctx.rng.gen_range(1..=2u16) };
        let coord = Coord::new(rel, g);
        let j = ctx.rng.gen_range(2..=N as u16);
        let kind = active_kind(family).expect("letter family");
        let y = smw::hardware::BaseLetter::pos(kind, j);
        let next = hw.succ(y);
        let inner = random_gen_word(&mut ctx.rng, 5, !bar);
        let mut w = Word::new();
        w.push(hw.state(y, bar, coord));
        w.extend(&hw.in_zone(&inner, hw.zone_after(y), bar));
        w.push(hw.state(next, bar, coord));
        let Ok(start) = m.parse(&w) else {
            continue;
        };
        let rules: Vec<RuleId> = letter_rules(m, family);
        let steps = ctx.rng.gen_range(1..=12);
        let (words, h) = restricted_walk(m, &start, &rules, steps, &mut ctx.rng);
        let end = words.last().expect("non-empty");
        if h.len() > start.inners[0].len() + end.inners[0].len() {
            return Err(format!(
                "|h| = {} exceeds |U| + |V| from {}",
                h.len(),
                start.display(&hw)
            ));
        }
        done += 1;
    }
    Ok(done)
}

fn families_locking(m: &Machine, kind: Kind) -> HashSet<Family> {
    m.positive_rules()
        .filter(|r| r.key.family.is_transition() && r.locks(kind))
        .map(|r| r.key.family)
        .collect()
}

fn families_acting(m: &Machine, left: Kind, right: Kind) -> HashSet<Family> {
    m.positive_rules()
        .filter(|r| r.key.family.has_letter())
        .filter(|r| r.action(left).is_some_and(|(_, u)| !u.is_empty()) || r.action(right).is_some_and(|(v, _)| !v.is_empty()))
        .map(|r| r.key.family)
        .collect()
}

fn walk_computation(ctx: &mut Ctx, bar: bool) -> (Vec<AdmissibleWord>, Vec<RuleId>) {
    let hw = ctx.hw.clone();
    let m = if bar { ctx.bar.clone() } else { ctx.strict.clone() };
    let start = sigma_start(&hw, bar, &mut ctx.rng);
    let base = sigma_form_word(&hw, &start);
    let rel = ctx.rng.gen_range(1..=2);
    let h = if bar {
        let u = random_gen_word(&mut ctx.rng, 2, false);
        bar_conjugated_insertion(&hw, &base, &u, rel).expect("history")
    } else {
        let pos = ctx.rng.gen_range(0..=base.len());
        insertion_history(&hw, &base, pos, rel, false).expect("history")
    };
    let cut = ctx.rng.gen_range(0..=h.len());
    let trace = m.run(&start, &h[..cut]);
    let mut words = trace.words.clone();
    let mut hist = h[..cut].to_vec();
    let steps = ctx.rng.gen_range(0..8);
    let (more, extra) = random_walk(&m, trace.last(), steps, &mut ctx.rng);
    if extra.first().is_some_and(|&id| hist.last() == Some(&id.inv())) {
        return (words, hist);
    }
    words.extend(more.into_iter().skip(1));
    hist.extend(extra);
    (words, hist)
}

fn locked_pattern_law(ctx: &mut Ctx) -> Result<usize, String> {
    let mut done = 0;
    while done < 1000 {
        let bar = ctx.rng.gen_bool(0.5);
        let (words, h) = walk_computation(ctx, bar);
        let m = if bar { &ctx.bar } else { &ctx.strict };
        let br = brief_history(&h).0;
        let start = &words[0];
        for k in 0..start.inners.len() {
            let (y, z) = (start.states[k].base, start.states[k + 1].base);
            let sector = ctx.hw.zone_after(y).kind;
            let locking = families_locking(m, sector);
            let acting = families_acting(m, y.zone.kind, z.zone.kind);
            for t in br.windows(3) {
                if t[0] == t[2] && locking.contains(&t[0]) && acting.contains(&t[1]) {
                    return Err(format!(
                        "br contains ({})({})({}) on a {sector:?} sector",
                        t[0], t[1], t[2]
                    ));
                }
            }
        }
        done += 1;
    }
    Ok(done)
}

fn brief_form_law(ctx: &mut Ctx) -> Result<usize, String> {
    let hw = ctx.hw.clone();
    for case in 0..1000 {
        let w0 = random_gen_word(&mut ctx.rng, 4, true);
        let mut w = w0.clone();
        let mut steps = Vec::new();
        for _ in 0..ctx.rng.gen_range(1..=3) {
            let rel = ctx.rng.gen_range(1..=2u16);
            let r = hw.ee().relator(rel).len();
            let positions: Vec<usize> = (0..w.len().saturating_sub(r - 1))
                .filter(|&p| w.letters()[p..p + r] == *gen_word(hw.ee().relator(rel)).letters())
                .collect();
            let s = match positions.choose(&mut ctx.rng) {
                Some(&pos) if ctx.rng.gen_bool(0.3) => DerivationStep { delete: true, pos, rel },
                _ => DerivationStep {
                    delete: false,
                    pos: ctx.rng.gen_range(0..=w.len()),
                    rel,
                },
            };
            w = smw::derive::apply_step(&hw, &w, &s).map_err(|e| e.to_string())?;
            steps.push(s);
        }
        let (h, _) = derivation_history(&hw, &w0, &steps).map_err(|e| e.to_string())?;
        let b = brief_history(&h);
        if !is_historical_form(&b) {
            return Err(format!("case {case}: br = {b} is not of historical form"));
        }
    }
    Ok(1000)
}

/// δ of `w ∘ τ` predicted from `w` for a (34) rule: `r` before every
/// positive L letter and `r⁻¹` after every inverse one, block 1 excepted
/// for bar rules.
fn predicted_delta(hw: &Hardware, w: &AdmissibleWord, id: RuleId) -> Word {
    let r = gen_word(hw.ee().relator(id.key.rel)).signed(!id.inverse);
    let mut out = Word::new();
    for l in w.to_word(hw).letters() {
        if let Symbol::State { zone, .. } = l.sym {
            if zone.kind == Kind::L && !(id.bar && zone.j == 1) {
                if l.inv {
                    out.extend(&Word::from_letters(vec![*l]));
                    out.extend(&r.inverse());
                } else {
                    out.extend(&r);
                    out.push(*l);
                }
                continue;
            }
        }
        out.push(*l);
    }
    delta(&out)
}

fn delta_law(ctx: &mut Ctx) -> Result<(usize, usize), String> {
    let hw = ctx.hw.clone();
    let mut s34 = 0;
    for _ in 0..1000 {
        let bar = ctx.rng.gen_bool(0.5);
        let (words, h) = walk_computation(ctx, bar);
        for (t, &id) in h.iter().enumerate() {
            let (a, b) = (&words[t], &words[t + 1]);
            let expected = if id.family() == Family::F34 {
                s34 += 1;
                predicted_delta(&hw, a, id)
            } else {
                delta(&a.to_word(&hw))
            };
            if delta(&b.to_word(&hw)) != expected {
                return Err(format!("δ changes wrongly under {id} at {}", a.display(&hw)));
            }
        }
    }
    Ok((1000, s34))
}

fn combinatorial_laws(ctx: &mut Ctx) -> Outcome {
    let conservation = conservation_law(ctx)?;
    let height = height_law(ctx)?;
    let locked = locked_pattern_law(ctx)?;
    let brief = brief_form_law(ctx)?;
    let (delta_runs, s34) = delta_law(ctx)?;
    Ok(format!(
        "conservation {conservation}, height {height}, locked patterns {locked}, brief form {brief}, δ {delta_runs} ({s34} (34) steps)"
    ))
}

fn cyclic_dyck_words(max_len: usize) -> Vec<CyclicWord<u8>> {
    let letters = [(0u8, false), (0, true), (1, false), (1, true)];
    let mut out = BTreeSet::new();
    let mut layer: Vec<Vec<(u8, bool)>> = vec![Vec::new()];
    for len in 1..=max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &l in &letters {
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        if len % 2 == 0 {
            for v in &next {
                let w: Word<u8> = v.iter().map(|&(s, inv)| Letter { sym: s, inv }).collect();
                if w.reduced().is_empty() {
                    out.insert(CyclicWord::new(&w));
                }
            }
        }
        layer = next;
    }
    out.into_iter().collect()
}

/// All non-crossing perfect matchings of `0..n` joining inverse letters.
fn brute_matchings(w: &[Letter<u8>]) -> Vec<Vec<(usize, usize)>> {
    fn go(w: &[Letter<u8>], free: &mut Vec<bool>, cur: &mut Vec<(usize, usize)>, out: &mut Vec<Vec<(usize, usize)>>) {
        let Some(p) = free.iter().position(|&f| f) else {
            let mut m = cur.clone();
            m.sort_unstable();
            out.push(m);
            return;
        };
        free[p] = false;
        for q in p + 1..w.len() {
            if !free[q] || w[q].sym != w[p].sym || w[q].inv == w[p].inv {
                continue;
            }
            let crosses = cur
                .iter()
                .any(|&(a, b)| (a < p && p < b) != (a < q && q < b));
            if crosses {
                continue;
            }
            free[q] = false;
            cur.push((p, q));
            go(w, free, cur, out);
            cur.pop();
            free[q] = true;
        }
        free[p] = true;
    }
    let mut out = Vec::new();
    if w.len() % 2 == 0 {
        go(w, &mut vec![true; w.len()], &mut Vec::new(), &mut out);
    }
    out
}

/// Whether some cut makes every pair read `(z⁻¹, z)` from the cut onwards.
fn brute_minus(w: &[Letter<u8>], m: &[(usize, usize)]) -> bool {
    let n = w.len();
    (0..n.max(1)).any(|root| {
        m.iter().all(|&(p, q)| {
            let (rp, rq) = ((p + n - root) % n, (q + n - root) % n);
            let (o, c) = if rp < rq { (p, q) } else { (q, p) };
            w[o].inv && !w[c].inv
        })
    })
}

fn dyck(_ctx: &mut Ctx) -> Outcome {
    let clock = Instant::now();
    let words = cyclic_dyck_words(10);
    let mut with_minus = 0;
    for w in &words {
        let l = w.letters();
        let brute: BTreeSet<Vec<(usize, usize)>> = brute_matchings(l).into_iter().collect();
        let listed: Vec<Vec<(usize, usize)>> = enumerate_pairings(w, usize::MAX).iter().map(|p| p.matching()).collect();
        let listed_set: BTreeSet<Vec<(usize, usize)>> = listed.iter().cloned().collect();
        if listed_set.len() != listed.len() || listed_set != brute {
            return Err(format!("pairings of a length-{} word differ from brute force", l.len()));
        }
        let brute_has_minus = brute.iter().any(|m| brute_minus(l, m));
        let found = find_minus_pairing(w);
        if found.is_some() != brute_has_minus {
            return Err(format!("minus pairing presence wrong for a length-{} word", l.len()));
        }
        if let Some(p) = found {
            with_minus += 1;
            let n = l.len();
            for k in 0..n {
                let (a, b) = (l[k], l[(k + 1) % n]);
                if a.inv && !b.inv {
                    if a.sym != b.sym || p.partner(k) != Some((k + 1) % n) {
                        return Err(format!("adjacent z⁻¹z at {k} not connected in a length-{n} word"));
                    }
                }
            }
        }
    }
    let took = clock.elapsed();
    if took > Duration::from_secs(60) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{} cyclic Dyck words, {with_minus} with a minus pairing, {took:?}", words.len()))
}

fn main() -> ExitCode {
    let seed = std::env::var("SMW_SEED")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or(DEFAULT_SEED);
    let ee = EEPresentation::load(&data_path("../../data/sample.ee")).expect("sample presentation");
    let hw = Hardware::new(ee, N).expect("hardware");
    let mut ctx = Ctx {
        strict: build_machine(&hw, Flavor::Strict),
        bar: build_machine(&hw, Flavor::Bar),
        mixed: build_machine(&hw, Flavor::Mixed),
        hw,
        rng: ChaCha8Rng::seed_from_u64(seed),
    };
    let criteria: [(&str, fn(&mut Ctx) -> Outcome); 8] = [
        ("insertion simulation", insertion_simulation),
        ("bar conjugated insertion", bar_conjugated),
        ("rule calculus", rule_calculus),
        ("compiler soundness", compiler_soundness),
        ("trapezia", trapezia),
        ("x-flank and conjugacy", x_flank_and_conjugacy),
        ("combinatorial laws", combinatorial_laws),
        ("dyck pairings", dyck),
    ];
    println!("acceptance seed {seed}");
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let outcome = check(&mut ctx);
        let took = clock.elapsed();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({took:.2?})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{}] {name}: {detail} ({took:.2?})", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
