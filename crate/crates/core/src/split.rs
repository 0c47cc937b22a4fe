//! Participant-to-article assignment and cross-validation folds with
//! balanced evaluation regimes.
//!
//! Each participant rereads two articles, one consecutively and one after
//! intervening articles. Every article gets six assigned participants (three
//! of each rereading kind) whose other reread articles are all distinct. A
//! fold holds out one article together with its assigned participants for
//! testing, and a neighbouring article for validation.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::ingest::{RepeatKind, Trial};
use crate::seed;
use crate::{Error, Result};

/// Participants assigned to each article.
pub const GROUP_SIZE: usize = 6;
const HALF: usize = GROUP_SIZE / 2;

/// `p[i][j]` is true when participant `j` reread article `i` consecutively,
/// `q[i][j]` when the reread was nonconsecutive.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentProblem {
    m: usize,
    n: usize,
    p: Vec<Vec<bool>>,
    q: Vec<Vec<bool>>,
}

impl AssignmentProblem {
    pub fn new(p: Vec<Vec<bool>>, q: Vec<Vec<bool>>) -> Result<Self> {
        let m = p.len();
        if m == 0 || q.len() != m {
            return Err(Error::domain("P and Q must have the same positive number of rows"));
        }
        let n = p[0].len();
        if p.iter().chain(&q).any(|row| row.len() != n) {
            return Err(Error::domain("P and Q rows must all have the same length"));
        }
        for j in 0..n {
            let cons = (0..m).filter(|&i| p[i][j]).count();
            let non = (0..m).filter(|&i| q[i][j]).count();
            if cons != 1 || non != 1 {
                return Err(Error::domain(format!(
                    "participant {j} must have exactly one consecutive and one nonconsecutive reread (found {cons} and {non})"
                )));
            }
            if (0..m).any(|i| p[i][j] && q[i][j]) {
                return Err(Error::domain(format!("participant {j} rereads the same article both ways")));
            }
        }
        Ok(AssignmentProblem { m, n, p, q })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn consecutive(&self, article: usize, participant: usize) -> bool {
        self.p[article][participant]
    }

    pub fn nonconsecutive(&self, article: usize, participant: usize) -> bool {
        self.q[article][participant]
    }

    pub fn rereads(&self, article: usize, participant: usize) -> bool {
        self.p[article][participant] || self.q[article][participant]
    }

    pub fn repeat_kind(&self, article: usize, participant: usize) -> Option<RepeatKind> {
        if self.p[article][participant] {
            Some(RepeatKind::Consecutive)
        } else if self.q[article][participant] {
            Some(RepeatKind::Nonconsecutive)
        } else {
            None
        }
    }

    /// The other article participant `j` reread, besides `article`.
    fn other_articles(&self, j: usize, article: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.m).filter(move |&a| a != article && self.rereads(a, j))
    }
}

/// An assignment problem with the article and participant labels it was
/// built from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Design {
    pub articles: Vec<u32>,
    pub participants: Vec<String>,
    pub problem: AssignmentProblem,
}

impl Design {
    /// Reads the rereading schedule off the repeated-reading trials.
    pub fn from_trials(trials: &[Trial]) -> Result<Self> {
        let mut articles = BTreeSet::new();
        let mut rereads: BTreeMap<&str, BTreeMap<u32, RepeatKind>> = BTreeMap::new();
        for t in trials {
            articles.insert(t.article_id);
            let entry = rereads.entry(t.participant_id.as_str()).or_default();
            if t.is_repeated() {
                if let Some(prev) = entry.insert(t.article_id, t.repeat_kind) {
                    if prev != t.repeat_kind {
                        return Err(Error::Integrity(format!(
                            "participant {} rereads article {} with conflicting kinds",
                            t.participant_id, t.article_id
                        )));
                    }
                }
            }
        }
        let articles: Vec<u32> = articles.into_iter().collect();
        let index: BTreeMap<u32, usize> = articles.iter().enumerate().map(|(i, &a)| (a, i)).collect();
        let participants: Vec<String> = rereads.keys().map(|s| s.to_string()).collect();
        let m = articles.len();
        let n = participants.len();
        let mut p = vec![vec![false; n]; m];
        let mut q = vec![vec![false; n]; m];
        for (j, kinds) in rereads.values().enumerate() {
            for (article, kind) in kinds {
                match kind {
                    RepeatKind::Consecutive => p[index[article]][j] = true,
                    RepeatKind::Nonconsecutive => q[index[article]][j] = true,
                    RepeatKind::None => {}
                }
            }
        }
        let problem = AssignmentProblem::new(p, q)?;
        Ok(Design {
            articles,
            participants,
            problem,
        })
    }
}

/// `article_of[j]` is the article participant `j` is assigned to.
/// `fold_order` is a cyclic order of the articles in which every pair of
/// neighbours shares exactly one assigned rereader in each direction; folds
/// are built along it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub article_of: Vec<usize>,
    pub fold_order: Vec<usize>,
}

impl Assignment {
    /// The `n × m` binary matrix `B`.
    pub fn matrix(&self, m: usize) -> Vec<Vec<u8>> {
        self.article_of
            .iter()
            .map(|&a| (0..m).map(|i| u8::from(i == a)).collect())
            .collect()
    }

    pub fn group(&self, article: usize) -> Vec<usize> {
        (0..self.article_of.len()).filter(|&j| self.article_of[j] == article).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentReport {
    /// Each participant is assigned to exactly one article.
    pub one_article_each: bool,
    /// Three consecutive rereaders per article.
    pub consecutive_balance: bool,
    /// Three nonconsecutive rereaders per article.
    pub nonconsecutive_balance: bool,
    /// No two participants of one article share another reread article.
    pub distinct_other_articles: bool,
}

impl AssignmentReport {
    pub fn all(&self) -> bool {
        self.one_article_each && self.consecutive_balance && self.nonconsecutive_balance && self.distinct_other_articles
    }
}

/// Recomputes all four constraints from the matrices.
pub fn verify_assignment(problem: &AssignmentProblem, b: &[Vec<u8>]) -> AssignmentReport {
    let (m, n) = (problem.m, problem.n);
    let shape_ok = b.len() == n && b.iter().all(|row| row.len() == m);
    if !shape_ok {
        return AssignmentReport {
            one_article_each: false,
            consecutive_balance: false,
            nonconsecutive_balance: false,
            distinct_other_articles: false,
        };
    }
    let one_article_each = b.iter().all(|row| row.iter().map(|&x| x as usize).sum::<usize>() == 1);
    let dot = |mat: &Vec<Vec<bool>>, a: usize, i: usize| -> i64 { (0..n).map(|j| i64::from(mat[a][j]) * i64::from(b[j][i])).sum() };
    let consecutive_balance = (0..m).all(|i| dot(&problem.p, i, i) == HALF as i64);
    let nonconsecutive_balance = (0..m).all(|i| dot(&problem.q, i, i) == HALF as i64);
    let distinct_other_articles = (0..m).all(|a| {
        (0..m).all(|i| {
            let entry = dot(&problem.p, a, i) + dot(&problem.q, a, i) - if a == i { GROUP_SIZE as i64 } else { 0 };
            entry <= 1
        })
    });
    AssignmentReport {
        one_article_each,
        consecutive_balance,
        nonconsecutive_balance,
        distinct_other_articles,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveOptions {
    pub seed: u64,
    pub timeout: Option<Duration>,
    /// Keep searching until the assignment admits a fold order whose
    /// neighbours overlap by exactly one rereader each way.
    pub require_fold_cycle: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            seed: 0,
            timeout: Some(Duration::from_secs(10)),
            require_fold_cycle: true,
        }
    }
}

pub fn solve_assignment(problem: &AssignmentProblem, options: &SolveOptions) -> Result<Assignment> {
    let (m, n) = (problem.m, problem.n);
    if m * GROUP_SIZE != n {
        return Err(Error::domain(format!(
            "{n} participants cannot be split into groups of {GROUP_SIZE} over {m} articles"
        )));
    }
    for i in 0..m {
        let cons = (0..n).filter(|&j| problem.p[i][j]).count();
        let non = (0..n).filter(|&j| problem.q[i][j]).count();
        if cons < HALF || non < HALF {
            return Err(Error::Infeasible(format!(
                "article {i} has {cons} consecutive and {non} nonconsecutive rereaders; {HALF} of each are needed"
            )));
        }
    }

    let mut rng = seed::stage_rng(options.seed, "split/assignment");
    let candidates: Vec<[Vec<usize>; 2]> = (0..m)
        .map(|i| {
            let mut cons: Vec<usize> = (0..n).filter(|&j| problem.p[i][j]).collect();
            let mut non: Vec<usize> = (0..n).filter(|&j| problem.q[i][j]).collect();
            cons.shuffle(&mut rng);
            non.shuffle(&mut rng);
            [cons, non]
        })
        .collect();

    let deadline = options.timeout.map(|t| (Instant::now() + t, t));
    let mut nodes = 0u64;
    let attempt = |neighbours: Option<Vec<[usize; 2]>>, nodes: &mut u64| -> Result<Option<Vec<usize>>> {
        let mut search = Search {
            problem,
            candidates: &candidates,
            neighbours,
            article_of: vec![None; n],
            assigned: vec![false; m],
            deadline,
            nodes,
        };
        Ok(search.dfs()?.then(|| search.article_of.iter().map(|a| a.expect("complete assignment")).collect()))
    };

    if !options.require_fold_cycle || m < 3 {
        return match attempt(None, &mut nodes)? {
            Some(article_of) => Ok(Assignment {
                article_of,
                fold_order: (0..m).collect(),
            }),
            None => Err(Error::Infeasible("constraints cannot be satisfied".into())),
        };
    }

    // Two articles can neighbour each other in the fold order only if at
    // least two participants reread both.
    let linked: Vec<Vec<bool>> = (0..m)
        .map(|u| {
            (0..m)
                .map(|w| u != w && (0..n).filter(|&j| problem.rereads(u, j) && problem.rereads(w, j)).count() >= 2)
                .collect()
        })
        .collect();
    let mut found = None;
    let mut path = vec![0];
    let mut used = vec![false; m];
    used[0] = true;
    each_cycle(&linked, &mut path, &mut used, &mut |cycle| {
        let neighbours = (0..m)
            .map(|k| {
                let here = cycle.iter().position(|&a| a == k).expect("cycle covers all articles");
                [cycle[(here + m - 1) % m], cycle[(here + 1) % m]]
            })
            .collect();
        if let Some(article_of) = attempt(Some(neighbours), &mut nodes)? {
            found = Some(Assignment {
                article_of,
                fold_order: cycle.to_vec(),
            });
            return Ok(true);
        }
        Ok(false)
    })?;
    found.ok_or_else(|| Error::Infeasible("no assignment admits a balanced fold order".into()))
}

/// Calls `visit` on every Hamiltonian cycle through article 0, each
/// undirected cycle once, in lexicographic order. Stops when `visit`
/// returns true.
fn each_cycle(
    linked: &[Vec<bool>],
    path: &mut Vec<usize>,
    used: &mut [bool],
    visit: &mut dyn FnMut(&[usize]) -> Result<bool>,
) -> Result<bool> {
    let m = linked.len();
    let last = *path.last().expect("nonempty path");
    if path.len() == m {
        if linked[last][path[0]] && path[1] < last {
            return visit(path);
        }
        return Ok(false);
    }
    for next in 0..m {
        if !used[next] && linked[last][next] {
            used[next] = true;
            path.push(next);
            let done = each_cycle(linked, path, used, visit)?;
            path.pop();
            used[next] = false;
            if done {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

struct Search<'a> {
    problem: &'a AssignmentProblem,
    candidates: &'a [[Vec<usize>; 2]],
    /// Fold-order neighbours each group must hold a rereader of.
    neighbours: Option<Vec<[usize; 2]>>,
    article_of: Vec<Option<usize>>,
    assigned: Vec<bool>,
    deadline: Option<(Instant, Duration)>,
    nodes: &'a mut u64,
}

impl Search<'_> {
    fn free(&self, article: usize, kind: usize) -> impl Iterator<Item = usize> + '_ {
        self.candidates[article][kind].iter().copied().filter(|&j| self.article_of[j].is_none())
    }

    /// Whether participant `j` can still go anywhere but `article`: every
    /// participant has to join the group of one of the articles they reread.
    fn forced_into(&self, article: usize, j: usize) -> bool {
        self.problem.other_articles(j, article).all(|a| self.assigned[a])
    }

    /// Groups of three free consecutive and three free nonconsecutive
    /// rereaders whose other articles are distinct and cover the required
    /// neighbours. Rereaders with nowhere else to go must be included.
    fn groups_for(&self, article: usize) -> Vec<Vec<usize>> {
        let cons: Vec<usize> = self.free(article, 0).collect();
        let non: Vec<usize> = self.free(article, 1).collect();
        let forced = |pool: &[usize], pick: &[usize]| {
            pool.iter()
                .enumerate()
                .all(|(k, &j)| pick.contains(&k) || !self.forced_into(article, j))
        };
        let mut out = Vec::new();
        for c in combinations(cons.len(), HALF) {
            if !forced(&cons, &c) {
                continue;
            }
            let chosen_c: Vec<usize> = c.iter().map(|&k| cons[k]).collect();
            let Some(others_c) = self.distinct_others(article, &chosen_c, &BTreeSet::new()) else {
                continue;
            };
            for q in combinations(non.len(), HALF) {
                if !forced(&non, &q) {
                    continue;
                }
                let chosen_q: Vec<usize> = q.iter().map(|&k| non[k]).collect();
                let Some(others) = self.distinct_others(article, &chosen_q, &others_c) else {
                    continue;
                };
                if let Some(nb) = &self.neighbours {
                    if !nb[article].iter().all(|a| others.contains(a)) {
                        continue;
                    }
                }
                out.push(chosen_c.iter().chain(&chosen_q).copied().collect());
            }
        }
        out
    }

    fn dfs(&mut self) -> Result<bool> {
        *self.nodes += 1;
        if let Some((deadline, limit)) = self.deadline {
            if *self.nodes % 64 == 0 && Instant::now() > deadline {
                return Err(Error::Timeout(limit));
            }
        }
        // Fill the article with the fewest admissible groups next; any
        // article left with none is a dead end.
        let mut best: Option<(usize, Vec<Vec<usize>>)> = None;
        for article in (0..self.problem.m).filter(|&i| !self.assigned[i]) {
            let options = self.groups_for(article);
            if options.is_empty() {
                return Ok(false);
            }
            if best.as_ref().is_none_or(|(_, b)| options.len() < b.len()) {
                best = Some((article, options));
            }
        }
        let Some((article, options)) = best else {
            return Ok(true);
        };
        for group in options {
            for &j in &group {
                self.article_of[j] = Some(article);
            }
            self.assigned[article] = true;
            if self.dfs()? {
                return Ok(true);
            }
            for &j in &group {
                self.article_of[j] = None;
            }
            self.assigned[article] = false;
        }
        Ok(false)
    }

    /// Extends `seen` with the other reread articles of `members`, or `None`
    /// if any article would repeat.
    fn distinct_others(&self, article: usize, members: &[usize], seen: &BTreeSet<usize>) -> Option<BTreeSet<usize>> {
        let mut out = seen.clone();
        for &j in members {
            for a in self.problem.other_articles(j, article) {
                if !out.insert(a) {
                    return None;
                }
            }
        }
        Some(out)
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for t in i + 1..k {
            idx[t] = idx[t - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Partition {
    Train,
    Validation,
    Test,
    /// Neither trained on nor evaluated, because it would leak a held-out
    /// article or participant.
    Excluded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NewItem,
    NewParticipant,
    NewItemParticipant,
}

impl Regime {
    pub const ALL: [Regime; 3] = [Regime::NewItem, Regime::NewParticipant, Regime::NewItemParticipant];

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::NewItem => "new_item",
            Regime::NewParticipant => "new_participant",
            Regime::NewItemParticipant => "new_item_participant",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Partition {
    pub fn as_str(self) -> &'static str {
        match self {
            Partition::Train => "train",
            Partition::Validation => "validation",
            Partition::Test => "test",
            Partition::Excluded => "excluded",
        }
    }
}

/// A participant-article pair: both readings of every paragraph of the
/// article by the participant.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanPair {
    pub article: u32,
    pub participant: String,
    pub partition: Partition,
    pub regime: Option<Regime>,
    pub repeat_kind: RepeatKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    /// 1-based.
    pub index: usize,
    pub test_article: u32,
    pub validation_article: u32,
    pub pairs: Vec<PlanPair>,
}

impl Fold {
    pub fn partition_of(&self, article: u32, participant: &str) -> Option<Partition> {
        self.pairs
            .iter()
            .find(|p| p.article == article && p.participant == participant)
            .map(|p| p.partition)
    }

    pub fn pairs_in(&self, partition: Partition) -> impl Iterator<Item = &PlanPair> {
        self.pairs.iter().filter(move |p| p.partition == partition)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub folds: Vec<Fold>,
}

/// Builds `fold_count` folds. Fold `i` tests on the article at position
/// `(m − i) mod m` of the fold order and validates on the one before it.
pub fn build_folds(design: &Design, assignment: &Assignment, fold_count: usize) -> Result<SplitPlan> {
    let problem = &design.problem;
    let (m, n) = (problem.m, problem.n);
    if fold_count == 0 || fold_count > m {
        return Err(Error::domain(format!("fold count must lie in 1..={m}")));
    }
    if assignment.article_of.len() != n || assignment.fold_order.len() != m {
        return Err(Error::domain("assignment does not match the design"));
    }
    let all_pairs: Vec<(usize, usize)> = (0..m)
        .flat_map(|a| (0..n).filter(move |&j| problem.rereads(a, j)).map(move |j| (a, j)))
        .collect();

    let mut folds = Vec::with_capacity(fold_count);
    for i in 1..=fold_count {
        let t = assignment.fold_order[(m + m - i) % m];
        let v = assignment.fold_order[(m + m - i - 1) % m];
        let mut slot: BTreeMap<(usize, usize), (Partition, Option<Regime>)> = BTreeMap::new();
        let test_group = assignment.group(t);
        let val_group = assignment.group(v);
        hold_out(problem, t, &test_group, Partition::Test, &mut slot);
        hold_out(problem, v, &val_group, Partition::Validation, &mut slot);

        let pairs = all_pairs
            .iter()
            .map(|&(a, j)| {
                let (partition, regime) = slot.get(&(a, j)).copied().unwrap_or_else(|| {
                    let leaks = a == t || a == v || test_group.contains(&j) || val_group.contains(&j);
                    (if leaks { Partition::Excluded } else { Partition::Train }, None)
                });
                PlanPair {
                    article: design.articles[a],
                    participant: design.participants[j].clone(),
                    partition,
                    regime,
                    repeat_kind: problem.repeat_kind(a, j).expect("pair is a reread"),
                }
            })
            .collect();
        folds.push(Fold {
            index: i,
            test_article: design.articles[t],
            validation_article: design.articles[v],
            pairs,
        });
    }
    Ok(SplitPlan { folds })
}

/// Claims the held-out pairs around `article`, skipping pairs already
/// claimed (test has priority over validation).
fn hold_out(
    problem: &AssignmentProblem,
    article: usize,
    group: &[usize],
    partition: Partition,
    slot: &mut BTreeMap<(usize, usize), (Partition, Option<Regime>)>,
) {
    for &j in group {
        slot.entry((article, j)).or_insert((partition, Some(Regime::NewItemParticipant)));
    }
    for &j in group {
        for a in problem.other_articles(j, article) {
            slot.entry((a, j)).or_insert((partition, Some(Regime::NewParticipant)));
        }
    }
    let mut taken = [0usize; 2];
    for j in 0..problem.n {
        if group.contains(&j) || !problem.rereads(article, j) || slot.contains_key(&(article, j)) {
            continue;
        }
        let kind = usize::from(problem.nonconsecutive(article, j));
        if taken[kind] < HALF {
            taken[kind] += 1;
            slot.insert((article, j), (partition, Some(Regime::NewItem)));
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitReport {
    /// Every pair appears exactly once per fold.
    pub partition_complete: bool,
    /// Test regimes hold 6 pairs each, 3 of each rereading kind.
    pub test_regimes_balanced: bool,
    /// Validation regimes hold 5 (new item), 5 (new participant) and 6 (both).
    pub validation_regimes_balanced: bool,
    /// No training or validation pair touches the test article or a
    /// held-out test participant.
    pub no_test_leakage: bool,
    /// No training pair touches the validation article or a held-out
    /// validation participant.
    pub no_validation_leakage: bool,
}

impl SplitReport {
    pub fn all(&self) -> bool {
        self.partition_complete && self.test_regimes_balanced && self.validation_regimes_balanced && self.no_test_leakage && self.no_validation_leakage
    }
}

pub fn verify_split(plan: &SplitPlan) -> SplitReport {
    let mut report = SplitReport {
        partition_complete: true,
        test_regimes_balanced: true,
        validation_regimes_balanced: true,
        no_test_leakage: true,
        no_validation_leakage: true,
    };
    let reference: Option<BTreeSet<(u32, &str)>> = plan.folds.first().map(|f| f.pairs.iter().map(|p| (p.article, p.participant.as_str())).collect());
    for fold in &plan.folds {
        let keys: Vec<(u32, &str)> = fold.pairs.iter().map(|p| (p.article, p.participant.as_str())).collect();
        let unique: BTreeSet<_> = keys.iter().copied().collect();
        if unique.len() != keys.len() || Some(&unique) != reference.as_ref() {
            report.partition_complete = false;
        }

        let count = |partition: Partition, regime: Regime, kind: Option<RepeatKind>| {
            fold.pairs
                .iter()
                .filter(|p| p.partition == partition && p.regime == Some(regime) && kind.is_none_or(|k| p.repeat_kind == k))
                .count()
        };
        for regime in Regime::ALL {
            if count(Partition::Test, regime, None) != GROUP_SIZE
                || count(Partition::Test, regime, Some(RepeatKind::Consecutive)) != HALF
                || count(Partition::Test, regime, Some(RepeatKind::Nonconsecutive)) != HALF
            {
                report.test_regimes_balanced = false;
            }
        }
        let expected_validation = [(Regime::NewItem, 5), (Regime::NewParticipant, 5), (Regime::NewItemParticipant, 6)];
        if expected_validation.iter().any(|&(r, c)| count(Partition::Validation, r, None) != c) {
            report.validation_regimes_balanced = false;
        }

        let unseen = |partition: Partition| -> BTreeSet<&str> {
            fold.pairs
                .iter()
                .filter(|p| p.partition == partition && p.regime == Some(Regime::NewItemParticipant))
                .map(|p| p.participant.as_str())
                .collect()
        };
        let test_people = unseen(Partition::Test);
        let val_people = unseen(Partition::Validation);
        for p in &fold.pairs {
            let trains = p.partition == Partition::Train;
            let touches_test = p.article == fold.test_article || test_people.contains(p.participant.as_str());
            if touches_test && (trains || p.partition == Partition::Validation) {
                report.no_test_leakage = false;
            }
            let touches_val = p.article == fold.validation_article || val_people.contains(p.participant.as_str());
            if touches_val && trains {
                report.no_validation_leakage = false;
            }
        }
    }
    report
}

/// CSV with columns `fold, article, participant, partition, regime,
/// repeat_kind`; training pairs have an empty regime.
pub fn write_plan_csv<W: std::io::Write>(plan: &SplitPlan, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["fold", "article", "participant", "partition", "regime", "repeat_kind"])?;
    for fold in &plan.folds {
        for p in &fold.pairs {
            w.write_record([
                fold.index.to_string(),
                p.article.to_string(),
                p.participant.clone(),
                p.partition.as_str().to_string(),
                p.regime.map(|r| r.as_str().to_string()).unwrap_or_default(),
                p.repeat_kind.as_str().to_string(),
            ])?;
        }
    }
    w.flush().map_err(|e| Error::io("split plan", e))?;
    Ok(())
}
