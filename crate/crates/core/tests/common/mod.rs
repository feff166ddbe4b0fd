#![allow(dead_code)]

pub mod l1;

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ripscover::geometry::{ConvexPolygon, Point};
use ripscover::metric::{Correspondence, FiniteMetric};
use ripscover::rips::{build_filtered_rips, FilteredComplex};
use ripscover::scenario::{generate_scenario, Radii, Scenario, SensorLayout};

/// Cutoff large enough to contain every simplex of a small planar set.
pub const FULL: f64 = 100.0;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Vec<Point> {
    (0..n).map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side)]).collect()
}

pub fn random_subset(rng: &mut ChaCha8Rng, n: usize) -> BTreeSet<usize> {
    (0..n).filter(|_| rng.gen_bool(0.3)).collect()
}

pub fn complex(points: &[Point], fence: &BTreeSet<usize>) -> FilteredComplex {
    build_filtered_rips(&FiniteMetric::from_points(points), fence, 3, FULL).unwrap()
}

/// Every point of either side related at least once, plus a few random extra pairs.
pub fn random_correspondence(rng: &mut ChaCha8Rng, ns: usize, nt: usize, extra: usize) -> Correspondence {
    let mut pairs: Vec<(usize, usize)> = (0..ns).map(|x| (x, rng.gen_range(0..nt))).collect();
    pairs.extend((0..nt).map(|y| (rng.gen_range(0..ns), y)));
    pairs.extend((0..extra).map(|_| (rng.gen_range(0..ns), rng.gen_range(0..nt))));
    Correspondence::new(ns, nt, pairs, None).unwrap()
}

/// Two distinct subordinate maps of `c`, if it has more than one.
pub fn two_maps(rng: &mut ChaCha8Rng, c: &Correspondence) -> Option<(Vec<usize>, Vec<usize>)> {
    let partners = c.partners();
    let f: Vec<usize> = partners.iter().map(|p| p[0]).collect();
    let mut g: Vec<usize> = partners.iter().map(|p| *p.choose(rng).unwrap()).collect();
    if f == g {
        let (x, p) = partners.iter().enumerate().find(|(_, p)| p.len() > 1)?;
        g[x] = p[1];
    }
    Some((f, g))
}

pub fn hex_scenario(seed: u64) -> Scenario {
    generate_scenario(ConvexPolygon::square(8.0), SensorLayout::Hex { spacing: 0.8 }, Radii::tight(1.0, 0.15), 0.1, seed)
        .unwrap()
}
