//! Transitive permutation actions [G:M] and their suborbit structure.

use std::collections::{HashMap, VecDeque};
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use thiserror::Error;

use crate::exec;
use crate::projgroup::{self, Group, GroupError, Point, SemilinearElement, SubgroupSpec};

pub const DEFAULT_POINT_CEILING: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ActionError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error("stabilizer is not a subgroup of the acting group")]
    NotSubgroup,
    #[error("the stabilizer contains the socle, so the action is unfaithful")]
    UnfaithfulAction,
    #[error("{points} points exceeds the ceiling {ceiling}")]
    TooManyPoints { points: u64, ceiling: u64 },
    #[error("the 2-subset model needs odd q")]
    EvenCharacteristic,
    #[error("actions are not defined on the same point set")]
    MisalignedActions,
}

pub type Result<T> = std::result::Result<T, ActionError>;

/// The interface the Saxl layer needs from a transitive action. Points are
/// `0..degree()`.
pub trait PermutationAction: Sync {
    fn degree(&self) -> usize;

    fn base_point(&self) -> u32 {
        0
    }

    /// Images of the points under each generator of the full group.
    fn generator_perms(&self) -> &[Vec<u32>];

    fn stabilizer_order(&self) -> u64;

    /// Images of the points under each generator of the base point stabilizer.
    fn stabilizer_generator_perms(&self) -> &[Vec<u32>];

    /// Every element of the base point stabilizer as a permutation.
    fn stabilizer_element_perms(&self) -> &[Vec<u32>];

    /// Sort key used to pick reproducible witnesses.
    fn point_key(&self, pt: u32) -> u64 {
        pt as u64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PointModel {
    Cosets,
    ProjectiveLine,
    TwoSubsets,
}

enum Points {
    Cosets {
        reps: Vec<SemilinearElement>,
        index: HashMap<SemilinearElement, u32>,
    },
    Line,
    Pairs {
        pairs: Vec<(Point, Point)>,
        index: HashMap<(Point, Point), u32>,
    },
}

pub struct CosetAction {
    group: Arc<Group>,
    stabilizer: SubgroupSpec,
    points: Points,
    n_points: usize,
    perms: Vec<Vec<u32>>,
    stab_perms: Vec<Vec<u32>>,
    stab_elem_perms: OnceLock<Vec<Vec<u32>>>,
    /// Schreier tree from the base point: (parent, generator index).
    tree: Vec<(u32, u32)>,
}

impl std::fmt::Debug for CosetAction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "CosetAction({:?} on {} points, |M| = {})",
            self.group,
            self.n_points,
            self.stabilizer.order()
        )
    }
}

fn check_stabilizer(group: &Group, m: &SubgroupSpec, ceiling: u64) -> Result<()> {
    if !m.elements().iter().all(|x| group.contains(x)) {
        return Err(ActionError::NotSubgroup);
    }
    let socle = m.elements().iter().filter(|x| group.in_socle(x)).count() as u64;
    if socle == group.ambient().psl_order() {
        return Err(ActionError::UnfaithfulAction);
    }
    let points = group.order() / m.order();
    if points > ceiling {
        return Err(ActionError::TooManyPoints { points, ceiling });
    }
    Ok(())
}

/// Right-multiplication action of G on the right cosets of M.
pub fn coset_action(group: &Arc<Group>, m: &SubgroupSpec) -> Result<CosetAction> {
    coset_action_with_ceiling(group, m, DEFAULT_POINT_CEILING)
}

pub fn coset_action_with_ceiling(group: &Arc<Group>, m: &SubgroupSpec, ceiling: u64) -> Result<CosetAction> {
    check_stabilizer(group, m, ceiling)?;
    let amb = group.ambient().clone();
    let canon = |h: &SemilinearElement| -> SemilinearElement {
        m.elements()
            .iter()
            .map(|x| amb.compose(x, h))
            .min()
            .expect("nonempty subgroup")
    };
    let start = canon(&amb.identity());
    let gens = group.generators();
    let mut reps = vec![start];
    let mut index = HashMap::from([(start, 0u32)]);
    let mut tree = vec![(0u32, u32::MAX)];
    let mut frontier = vec![0u32];
    while !frontier.is_empty() {
        let images = exec::map(frontier.len() * gens.len(), |k| {
            let (i, j) = (k / gens.len(), k % gens.len());
            canon(&amb.compose(&reps[frontier[i] as usize], &gens[j]))
        });
        let mut next = Vec::new();
        for (k, img) in images.into_iter().enumerate() {
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(img) {
                let id = reps.len() as u32;
                e.insert(id);
                reps.push(img);
                tree.push((frontier[k / gens.len()], (k % gens.len()) as u32));
                next.push(id);
            }
        }
        frontier = next;
    }
    let expected = group.order() / m.order();
    assert_eq!(reps.len() as u64, expected, "coset enumeration lost points");
    let points = Points::Cosets { reps, index };
    Ok(CosetAction::assemble(group.clone(), m.clone(), points, expected as usize, tree))
}

/// G acting on PG(1,q); the base point is ∞ and its stabilizer the Borel subgroup.
pub fn projective_line_action(group: &Arc<Group>) -> Result<CosetAction> {
    let m = projgroup::borel(group)?;
    check_stabilizer(group, &m, DEFAULT_POINT_CEILING)?;
    // ∞ is point 0 so that it is the base point; field element z is point z + 1.
    let n_points = (group.ambient().q() + 1) as usize;
    let mut a = CosetAction::assemble(group.clone(), m, Points::Line, n_points, Vec::new());
    a.tree = a.bfs_tree();
    Ok(a)
}

/// G acting on 2-subsets of PG(1,q) with base point {0, ∞}.
pub fn two_subset_action(group: &Arc<Group>) -> Result<CosetAction> {
    if !group.field().is_odd() {
        return Err(ActionError::EvenCharacteristic);
    }
    let m = projgroup::dihedral_minus(group)?;
    check_stabilizer(group, &m, DEFAULT_POINT_CEILING)?;
    let q = group.ambient().q();
    let mut pairs = vec![(0, q)];
    for u in 0..=q {
        for w in u + 1..=q {
            if (u, w) != (0, q) {
                pairs.push((u, w));
            }
        }
    }
    let index = pairs.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect();
    let n_points = pairs.len();
    let mut a = CosetAction::assemble(group.clone(), m, Points::Pairs { pairs, index }, n_points, Vec::new());
    a.tree = a.bfs_tree();
    Ok(a)
}

impl CosetAction {
    fn assemble(
        group: Arc<Group>,
        stabilizer: SubgroupSpec,
        points: Points,
        n_points: usize,
        tree: Vec<(u32, u32)>,
    ) -> CosetAction {
        let mut a = CosetAction {
            group,
            stabilizer,
            points,
            n_points,
            perms: Vec::new(),
            stab_perms: Vec::new(),
            stab_elem_perms: OnceLock::new(),
            tree,
        };
        a.perms = a.group.generators().iter().map(|g| a.perm_of(g)).collect();
        a.stab_perms = a.stabilizer.generators.iter().map(|g| a.perm_of(g)).collect();
        a
    }

    fn bfs_tree(&self) -> Vec<(u32, u32)> {
        let mut tree = vec![(u32::MAX, u32::MAX); self.n_points];
        let base = self.base_point();
        tree[base as usize] = (base, u32::MAX);
        let mut queue = VecDeque::from([base]);
        while let Some(x) = queue.pop_front() {
            for (j, p) in self.perms.iter().enumerate() {
                let y = p[x as usize];
                if tree[y as usize].0 == u32::MAX {
                    tree[y as usize] = (x, j as u32);
                    queue.push_back(y);
                }
            }
        }
        assert!(tree.iter().all(|t| t.0 != u32::MAX), "action is not transitive");
        tree
    }

    /// The permutation induced by an arbitrary element of G.
    pub fn perm_of(&self, g: &SemilinearElement) -> Vec<u32> {
        exec::map(self.n_points, |pt| self.image(pt as u32, g))
    }

    pub fn model(&self) -> PointModel {
        match self.points {
            Points::Cosets { .. } => PointModel::Cosets,
            Points::Line => PointModel::ProjectiveLine,
            Points::Pairs { .. } => PointModel::TwoSubsets,
        }
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn stabilizer(&self) -> &SubgroupSpec {
        &self.stabilizer
    }

    pub fn group_order(&self) -> u64 {
        self.group.order()
    }

    fn line_point(&self, pt: u32) -> Point {
        // Point 0 is ∞, point z + 1 is the field element z.
        if pt == 0 {
            self.group.ambient().q()
        } else {
            pt - 1
        }
    }

    fn line_id(&self, x: Point) -> u32 {
        if x == self.group.ambient().q() {
            0
        } else {
            x + 1
        }
    }

    /// The image of point `pt` under `g`.
    pub fn image(&self, pt: u32, g: &SemilinearElement) -> u32 {
        let amb = self.group.ambient();
        match &self.points {
            Points::Cosets { reps, index } => {
                let h = amb.compose(&reps[pt as usize], g);
                let c = self
                    .stabilizer
                    .elements()
                    .iter()
                    .map(|m| amb.compose(m, &h))
                    .min()
                    .expect("nonempty subgroup");
                index[&c]
            }
            Points::Line => self.line_id(amb.act(self.line_point(pt), g)),
            Points::Pairs { pairs, index } => {
                let (u, w) = pairs[pt as usize];
                let (x, y) = (amb.act(u, g), amb.act(w, g));
                index[&(x.min(y), x.max(y))]
            }
        }
    }

    /// The point α^g.
    pub fn point_of(&self, g: &SemilinearElement) -> u32 {
        self.image(self.base_point(), g)
    }

    /// Human-readable label: a coset representative, a projective point or a pair.
    pub fn label(&self, pt: u32) -> String {
        let q = self.group.ambient().q();
        let show = |x: Point| if x == q { "inf".to_string() } else { x.to_string() };
        match &self.points {
            Points::Cosets { reps, .. } => reps[pt as usize].to_string(),
            Points::Line => show(self.line_point(pt)),
            Points::Pairs { pairs, .. } => {
                let (u, w) = pairs[pt as usize];
                format!("{{{},{}}}", show(u), show(w))
            }
        }
    }

    /// The 2-subset behind a point of the 2-subset model, smaller point first.
    pub fn pair(&self, pt: u32) -> Option<(Point, Point)> {
        match &self.points {
            Points::Pairs { pairs, .. } => Some(pairs[pt as usize]),
            _ => None,
        }
    }

    /// Some g in G with α^g = pt, read off the Schreier tree.
    pub fn transversal(&self, mut pt: u32) -> SemilinearElement {
        let amb = self.group.ambient();
        let gens = self.group.generators();
        let mut word = Vec::new();
        while pt != self.base_point() {
            let (parent, j) = self.tree[pt as usize];
            word.push(j);
            pt = parent;
        }
        word.iter().rev().fold(amb.identity(), |acc, &j| amb.compose(&acc, &gens[j as usize]))
    }

    /// G_β = g⁻¹ M g for α^g = β, sorted.
    pub fn point_stabilizer(&self, pt: u32) -> Vec<SemilinearElement> {
        let amb = self.group.ambient();
        let g = self.transversal(pt);
        let mut out: Vec<_> = self.stabilizer.elements().iter().map(|m| amb.conjugate(m, &g)).collect();
        out.sort_unstable();
        out
    }

    /// Points fixed by every element of `k` (generators suffice).
    pub fn fixed_points(&self, k: &[SemilinearElement]) -> Vec<u32> {
        let perms: Vec<Vec<u32>> = k.iter().map(|g| self.perm_of(g)).collect();
        (0..self.n_points as u32)
            .filter(|&pt| perms.iter().all(|p| p[pt as usize] == pt))
            .collect()
    }

    /// Orbit of a point under a set of group elements.
    pub fn orbit_under(&self, pt: u32, gens: &[SemilinearElement]) -> Vec<u32> {
        let perms: Vec<Vec<u32>> = gens.iter().map(|g| self.perm_of(g)).collect();
        orbit(pt, &perms)
    }
}

impl PermutationAction for CosetAction {
    fn degree(&self) -> usize {
        self.n_points
    }

    fn generator_perms(&self) -> &[Vec<u32>] {
        &self.perms
    }

    fn stabilizer_order(&self) -> u64 {
        self.stabilizer.order()
    }

    fn stabilizer_generator_perms(&self) -> &[Vec<u32>] {
        &self.stab_perms
    }

    fn stabilizer_element_perms(&self) -> &[Vec<u32>] {
        self.stab_elem_perms.get_or_init(|| {
            // Multiply generator permutations along a BFS over M instead of
            // recomputing every image from scratch.
            let amb = self.group.ambient();
            let elems = self.stabilizer.elements();
            let gens = &self.stabilizer.generators;
            let id_pos = elems.binary_search(&amb.identity()).expect("identity");
            let mut perms: Vec<Option<Vec<u32>>> = vec![None; elems.len()];
            perms[id_pos] = Some((0..self.n_points as u32).collect());
            let mut queue = VecDeque::from([id_pos]);
            while let Some(i) = queue.pop_front() {
                for (j, g) in gens.iter().enumerate() {
                    let y = amb.compose(&elems[i], g);
                    let k = elems.binary_search(&y).expect("closed subgroup");
                    if perms[k].is_none() {
                        let p = perms[i].as_ref().expect("visited");
                        let gp = &self.stab_perms[j];
                        perms[k] = Some(p.iter().map(|&x| gp[x as usize]).collect());
                        queue.push_back(k);
                    }
                }
            }
            perms.into_iter().map(|p| p.expect("generators span M")).collect()
        })
    }

    fn point_key(&self, pt: u32) -> u64 {
        match &self.points {
            Points::Cosets { reps, .. } => self.group.ambient().key(&reps[pt as usize]),
            Points::Line => pt as u64,
            Points::Pairs { pairs, .. } => {
                let (u, w) = pairs[pt as usize];
                u as u64 * (self.group.ambient().q() as u64 + 1) + w as u64
            }
        }
    }
}

/// Orbit of `pt` under permutations, in BFS order.
pub fn orbit(pt: u32, perms: &[Vec<u32>]) -> Vec<u32> {
    let n = perms.first().map_or(pt as usize + 1, |p| p.len());
    let mut seen = vec![false; n];
    seen[pt as usize] = true;
    let mut out = vec![pt];
    let mut i = 0;
    while i < out.len() {
        let x = out[i];
        for p in perms {
            let y = p[x as usize];
            if !seen[y as usize] {
                seen[y as usize] = true;
                out.push(y);
            }
        }
        i += 1;
    }
    out
}

pub fn is_transitive<A: PermutationAction + ?Sized>(a: &A) -> bool {
    orbit(a.base_point(), a.generator_perms()).len() == a.degree()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Suborbit {
    pub points: Vec<u32>,
    pub length: u64,
    pub stabilizer_order: u64,
    pub regular: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuborbitDecomposition {
    /// Ordered by smallest point id, so the trivial suborbit comes first.
    pub suborbits: Vec<Suborbit>,
    /// Γ, sorted.
    pub regular_union: Vec<u32>,
    #[serde(skip)]
    pub suborbit_of: Vec<u32>,
}

impl SuborbitDecomposition {
    pub fn lengths(&self) -> Vec<u64> {
        let mut v: Vec<_> = self.suborbits.iter().map(|s| s.length).collect();
        v.sort_unstable();
        v
    }

    pub fn regular_count(&self) -> usize {
        self.suborbits.iter().filter(|s| s.regular).count()
    }

    pub fn gamma_size(&self) -> usize {
        self.regular_union.len()
    }
}

/// Orbits of the base point stabilizer.
pub fn suborbits<A: PermutationAction + ?Sized>(a: &A) -> SuborbitDecomposition {
    let m = a.stabilizer_order();
    let gens = a.stabilizer_generator_perms();
    let mut suborbit_of = vec![u32::MAX; a.degree()];
    let mut suborbits = Vec::new();
    // The base point is its own suborbit; list it first.
    let starts = std::iter::once(a.base_point()).chain(0..a.degree() as u32);
    for pt in starts {
        if suborbit_of[pt as usize] != u32::MAX {
            continue;
        }
        let mut pts = orbit(pt, gens);
        let id = suborbits.len() as u32;
        for &x in &pts {
            suborbit_of[x as usize] = id;
        }
        pts.sort_unstable();
        let length = pts.len() as u64;
        suborbits.push(Suborbit {
            points: pts,
            length,
            stabilizer_order: m / length,
            regular: length == m,
        });
    }
    let mut regular_union: Vec<u32> = suborbits
        .iter()
        .filter(|s| s.regular && m > 1)
        .flat_map(|s| s.points.iter().copied())
        .collect();
    if m == 1 {
        // Every point other than α forms a regular suborbit of length 1.
        regular_union = (0..a.degree() as u32).filter(|&x| x != a.base_point()).collect();
    }
    regular_union.sort_unstable();
    SuborbitDecomposition {
        suborbits,
        regular_union,
        suborbit_of,
    }
}

/// Order of the permutation group generated by `perms`, by closure. Test helper
/// for small groups.
pub fn permutation_group_order(perms: &[Vec<u32>], cap: usize) -> Option<usize> {
    let n = perms.first()?.len();
    let id: Vec<u32> = (0..n as u32).collect();
    let mut seen = std::collections::HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for p in perms {
            let y: Vec<u32> = x.iter().map(|&i| p[i as usize]).collect();
            if seen.insert(y.clone()) {
                if seen.len() > cap {
                    return None;
                }
                queue.push_back(y);
            }
        }
    }
    Some(seen.len())
}
