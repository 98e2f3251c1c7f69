#![allow(dead_code)]

use std::sync::Arc;

use psl_saxl::action::{self, CosetAction};
use psl_saxl::projgroup::{self, Family, Group, LevelTag, SubgroupSpec};

pub fn group(p: u32, n: u32, tag: LevelTag) -> Arc<Group> {
    Group::build(p, n, tag).expect("group builds")
}

pub fn first_subgroup(g: &Group, family: &Family) -> SubgroupSpec {
    projgroup::family_subgroups(g, family).expect("family builds").swap_remove(0)
}

pub fn coset(p: u32, n: u32, tag: LevelTag, family: Family) -> CosetAction {
    let g = group(p, n, tag);
    let m = first_subgroup(&g, &family);
    action::coset_action(&g, &m).expect("action builds")
}

/// Factor (p, n) of a prime power.
pub fn pn(q: u64) -> (u32, u32) {
    psl_saxl::gf::prime_power(q).expect("prime power")
}

/// A permutation group given by generators, closed by brute force. Only for
/// small synthetic fixtures.
pub struct PermAction {
    degree: usize,
    gens: Vec<Vec<u32>>,
    stab: Vec<Vec<u32>>,
}

impl PermAction {
    pub fn new(gens: Vec<Vec<u32>>) -> PermAction {
        let degree = gens[0].len();
        let id: Vec<u32> = (0..degree as u32).collect();
        let mut seen = std::collections::HashSet::from([id.clone()]);
        let mut queue = vec![id];
        while let Some(x) = queue.pop() {
            for g in &gens {
                let y: Vec<u32> = x.iter().map(|&i| g[i as usize]).collect();
                if seen.insert(y.clone()) {
                    queue.push(y);
                }
            }
        }
        let mut stab: Vec<Vec<u32>> = seen.into_iter().filter(|p| p[0] == 0).collect();
        stab.sort();
        PermAction { degree, gens, stab }
    }

    /// Product action of two groups on the grid of their point sets.
    pub fn product(a: &[Vec<u32>], b: &[Vec<u32>]) -> PermAction {
        let (na, nb) = (a[0].len(), b[0].len());
        let id_a: Vec<u32> = (0..na as u32).collect();
        let id_b: Vec<u32> = (0..nb as u32).collect();
        let lift = |pa: &[u32], pb: &[u32]| -> Vec<u32> {
            (0..na * nb).map(|x| pa[x / nb] * nb as u32 + pb[x % nb]).collect()
        };
        let mut gens: Vec<Vec<u32>> = a.iter().map(|p| lift(p, &id_b)).collect();
        gens.extend(b.iter().map(|p| lift(&id_a, p)));
        PermAction::new(gens)
    }
}

impl psl_saxl::action::PermutationAction for PermAction {
    fn degree(&self) -> usize {
        self.degree
    }

    fn generator_perms(&self) -> &[Vec<u32>] {
        &self.gens
    }

    fn stabilizer_order(&self) -> u64 {
        self.stab.len() as u64
    }

    fn stabilizer_generator_perms(&self) -> &[Vec<u32>] {
        &self.stab
    }

    fn stabilizer_element_perms(&self) -> &[Vec<u32>] {
        &self.stab
    }
}

/// D8 on the corners of a square, labelled cyclically.
pub fn square_group() -> Vec<Vec<u32>> {
    vec![vec![1, 2, 3, 0], vec![0, 3, 2, 1]]
}

/// S3 on three points.
pub fn s3() -> Vec<Vec<u32>> {
    vec![vec![1, 2, 0], vec![1, 0, 2]]
}
