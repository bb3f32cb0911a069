//! Bagged forests of weighted CART trees with binary majority vote.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ClassId, Label};
use crate::nonlinear::tree::{dt_train_weighted, DecisionTree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ForestJson", into = "ForestJson")]
pub struct RandomForest {
    trees: Vec<DecisionTree>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ForestJson {
    trees: Vec<DecisionTree>,
}

impl TryFrom<ForestJson> for RandomForest {
    type Error = Error;

    fn try_from(j: ForestJson) -> Result<Self> {
        RandomForest::new(j.trees)
    }
}

impl From<RandomForest> for ForestJson {
    fn from(f: RandomForest) -> Self {
        ForestJson { trees: f.trees }
    }
}

impl RandomForest {
    /// Needs an odd number of binary (±1) trees over one dimension.
    pub fn new(trees: Vec<DecisionTree>) -> Result<Self> {
        if trees.len() % 2 == 0 {
            return Err(Error::invalid(format!("forest needs an odd tree count, got {}", trees.len())));
        }
        let d = trees[0].dim();
        if trees.iter().any(|t| t.dim() != d) {
            return Err(Error::invalid("forest trees disagree on dimension"));
        }
        if trees.iter().any(|t| t.classes().iter().any(|c| *c != 1 && *c != -1)) {
            return Err(Error::invalid("forest trees must predict -1 or +1"));
        }
        Ok(RandomForest { trees })
    }

    pub fn dim(&self) -> usize {
        self.trees[0].dim()
    }

    pub fn trees(&self) -> &[DecisionTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Sum of tree votes; positive means a `+1` majority.
    pub fn vote_margin(&self, x: &[f64]) -> i64 {
        self.trees.iter().map(|t| t.predict(x) as i64).sum()
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        Label::from_score(self.vote_margin(x) as f64)
    }

    /// Copy with the listed trees' leaves at `x` flipped to the other label.
    pub fn with_flipped_trees(&self, x: &[f64], which: &[usize]) -> Self {
        let mut trees = self.trees.clone();
        for &i in which {
            let t = &trees[i];
            let leaf = t.leaf_index(x);
            trees[i] = t.with_leaf_label(leaf, -t.predict(x));
        }
        RandomForest { trees }
    }
}

/// Trains `o` trees, each on a bootstrap resample of the weighted set.
/// With `o = 1` the single tree sees the full sample.
pub fn rf_train_weighted<R: Rng + ?Sized>(
    xs: &[Vec<f64>],
    ys: &[ClassId],
    weights: &[f64],
    o: usize,
    params: &TreeParams,
    rng: &mut R,
) -> Result<RandomForest> {
    if o % 2 == 0 {
        return Err(Error::invalid(format!("forest size must be odd, got {o}")));
    }
    if ys.iter().any(|y| *y != 1 && *y != -1) {
        return Err(Error::invalid("forests support binary -1/+1 labels only"));
    }
    if o == 1 {
        return RandomForest::new(vec![dt_train_weighted(xs, ys, weights, params)?]);
    }
    if xs.is_empty() {
        return Err(Error::invalid("training set must be nonempty"));
    }
    let n = xs.len();
    let mut trees = Vec::with_capacity(o);
    for _ in 0..o {
        let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
        let bx: Vec<Vec<f64>> = idx.iter().map(|&i| xs[i].clone()).collect();
        let by: Vec<ClassId> = idx.iter().map(|&i| ys[i]).collect();
        let bw: Vec<f64> = idx.iter().map(|&i| weights[i]).collect();
        trees.push(dt_train_weighted(&bx, &by, &bw, params)?);
    }
    RandomForest::new(trees)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn synthetic(n: usize, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<ClassId>) {
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random::<f64>()).collect()).collect();
        let ys = xs
            .iter()
            .map(|x| {
                let clean = if x[0] + 0.5 * x[1] > 0.7 { 1 } else { -1 };
                if rng.random::<f64>() < 0.1 { -clean } else { clean }
            })
            .collect();
        (xs, ys)
    }

    fn accuracy(f: impl Fn(&[f64]) -> ClassId, xs: &[Vec<f64>], ys: &[ClassId]) -> f64 {
        xs.iter().zip(ys).filter(|(x, y)| f(x) == **y).count() as f64 / xs.len() as f64
    }

    #[test]
    fn even_size_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = rf_train_weighted(&[vec![0.0]], &[1], &[1.0], 2, &TreeParams::default(), &mut rng);
        assert!(r.is_err());
    }

    #[test]
    fn single_tree_forest_matches_the_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (xs, ys) = synthetic(200, &mut rng);
        let w = vec![1.0; xs.len()];
        let params = TreeParams::default();
        let f = rf_train_weighted(&xs, &ys, &w, 1, &params, &mut rng).unwrap();
        let t = dt_train_weighted(&xs, &ys, &w, &params).unwrap();
        assert_eq!(f.trees()[0], t);
    }

    #[test]
    fn unanimous_data_gives_constant_forest() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, (i * 7 % 5) as f64]).collect();
        let f = rf_train_weighted(&xs, &[1; 30], &[1.0; 30], 5, &TreeParams::default(), &mut rng).unwrap();
        assert!(f.trees().iter().all(|t| t.n_leaves() == 1));
        assert_eq!(f.predict(&[100.0, -3.0]), Label::Pos);
    }

    #[test]
    fn forest_is_not_much_worse_than_a_tree() {
        let params = TreeParams { max_depth: 6, min_leaf: 1 };
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let (xs, ys) = synthetic(300, &mut rng);
            let w = vec![1.0; xs.len()];
            let t = dt_train_weighted(&xs, &ys, &w, &params).unwrap();
            let f = rf_train_weighted(&xs, &ys, &w, 7, &params, &mut rng).unwrap();
            let at = accuracy(|x| t.predict(x), &xs, &ys);
            let af = accuracy(|x| f.predict(x).class(), &xs, &ys);
            assert!(af >= at - 0.05, "seed {seed}: forest {af} vs tree {at}");
        }
    }

    #[test]
    fn flipping_trees_changes_their_vote_at_x() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (xs, ys) = synthetic(100, &mut rng);
        let f = rf_train_weighted(&xs, &ys, &vec![1.0; 100], 3, &TreeParams::default(), &mut rng).unwrap();
        let x = &xs[0];
        let g = f.with_flipped_trees(x, &[0, 1, 2]);
        assert_eq!(g.vote_margin(x), -f.vote_margin(x));
    }

    #[test]
    fn json_round_trip_checks_parity() {
        let t = DecisionTree::leaf(2, 1);
        let f = RandomForest::new(vec![t.clone()]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<RandomForest>(&s).unwrap(), f);
        let two = r#"{"trees":[{"dim":2,"root":{"label":1}},{"dim":2,"root":{"label":1}}]}"#;
        assert!(serde_json::from_str::<RandomForest>(two).is_err());
    }
}
