//! Labelled datasets: CSV input and output, binning, synthetic generators,
//! splitting and accuracy.

use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dot, sample_box, sample_unit_sphere, sign_label, ClassId, Halfspace, Label, UnitVector};
use crate::nonlinear::tree::{DecisionTree, Node};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<ClassId>,
    pub feature_names: Vec<String>,
    pub domain_box: Vec<(f64, f64)>,
}

fn observed_box(features: &[Vec<f64>], d: usize) -> Vec<(f64, f64)> {
    (0..d)
        .map(|j| {
            features.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x[j]), hi.max(x[j])))
        })
        .collect()
}

impl Dataset {
    /// Builds a dataset whose domain box is the observed per-feature range.
    pub fn new(features: Vec<Vec<f64>>, labels: Vec<ClassId>, feature_names: Vec<String>) -> Result<Self> {
        if features.is_empty() || features.len() != labels.len() {
            return Err(Error::invalid("dataset needs n >= 1 rows and one label per row"));
        }
        let d = feature_names.len();
        if features.iter().any(|x| x.len() != d) {
            return Err(Error::invalid("every row must have one value per feature name"));
        }
        let domain_box = observed_box(&features, d);
        Ok(Dataset { features, labels, feature_names, domain_box })
    }

    pub fn with_box(mut self, domain_box: Vec<(f64, f64)>) -> Result<Self> {
        if domain_box.len() != self.dim() || domain_box.iter().any(|(lo, hi)| lo > hi) {
            return Err(Error::invalid("domain box must give lo <= hi for every feature"));
        }
        self.domain_box = domain_box;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    /// Sorted distinct labels.
    pub fn classes(&self) -> Vec<ClassId> {
        let mut c = self.labels.clone();
        c.sort_unstable();
        c.dedup();
        c
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            feature_names: self.feature_names.clone(),
            domain_box: self.domain_box.clone(),
        }
    }
}

fn default_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse { line, msg: e.to_string() }
}

/// Reads a headed numeric CSV. Returns the header and the rows with the
/// line number each came from.
fn read_numeric<R: Read>(input: R) -> Result<(Vec<String>, Vec<(usize, Vec<f64>)>)> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_string).collect();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(Error::Parse { line: 1, msg: "empty file: a header row is required".into() });
    }
    if header.iter().all(|h| h.parse::<f64>().is_ok()) {
        return Err(Error::Parse { line: 1, msg: "missing header row: first line is numeric".into() });
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(csv_error)?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("column {} ('{}'): '{cell}' is not a number", j + 1, header[j]),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, row));
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 2, msg: "no data rows after the header".into() });
    }
    Ok((header, rows))
}

/// Parses a labelled CSV: header row required, label in the last column.
/// Labels drawn from {0, 1} are remapped to {-1, +1}; other integer class
/// ids are kept.
pub fn parse_csv<R: Read>(input: R) -> Result<Dataset> {
    let (header, rows) = read_numeric(input)?;
    if header.len() < 2 {
        return Err(Error::Parse { line: 1, msg: "need at least one feature column and a label column".into() });
    }
    let d = header.len() - 1;
    let mut features = Vec::with_capacity(rows.len());
    let mut labels = Vec::with_capacity(rows.len());
    for (line, mut row) in rows {
        let y = row.pop().expect("rows have the header's width");
        if y.fract() != 0.0 || y.abs() > i32::MAX as f64 {
            return Err(Error::Parse { line, msg: format!("label '{y}' is not an integer class id") });
        }
        labels.push(y as ClassId);
        features.push(row);
    }
    if labels.iter().all(|&y| y == 0 || y == 1) {
        labels.iter_mut().for_each(|y| *y = Label::from_class(if *y == 1 { 1 } else { -1 }).class());
    }
    Dataset::new(features, labels, header[..d].to_vec())
}

pub fn load_csv(path: impl AsRef<Path>) -> Result<Dataset> {
    parse_csv(std::fs::File::open(path)?)
}

/// Reads a headed numeric CSV with no label column (rows = observations).
pub fn load_matrix_csv(path: impl AsRef<Path>) -> Result<Vec<Vec<f64>>> {
    let (_, rows) = read_numeric(std::fs::File::open(path)?)?;
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

fn write_rows<W: Write>(out: W, header: &[String], rows: impl Iterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header).map_err(csv_error)?;
    for r in rows {
        w.write_record(&r).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes values with 17 significant digits so that reading back is exact.
pub fn write_csv_to<W: Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut header = ds.feature_names.clone();
    header.push("label".into());
    let rows = ds.features.iter().zip(&ds.labels).map(|(x, y)| {
        let mut r: Vec<String> = x.iter().map(|v| format!("{v:.16e}")).collect();
        r.push(y.to_string());
        r
    });
    write_rows(out, &header, rows)
}

pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    write_csv_to(ds, std::fs::File::create(path)?)
}

pub fn write_matrix_csv(rows: &[Vec<f64>], path: impl AsRef<Path>) -> Result<()> {
    let d = rows.first().map_or(0, Vec::len);
    let lines = rows.iter().map(|r| r.iter().map(|v| format!("{v:.16e}")).collect());
    write_rows(std::fs::File::create(path)?, &default_names(d), lines)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSpec {
    pub bins_per_feature: usize,
    pub one_hot: bool,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        PreprocessSpec { bins_per_feature: 5, one_hot: true }
    }
}

/// Equal-width bin of `v` over `[lo, hi]`; edges go to the upper bin and
/// `hi` to the top bin.
fn bin_of(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let t = ((v - lo) / (hi - lo) * bins as f64).floor();
    (t.max(0.0) as usize).min(bins - 1)
}

/// Bins every feature over its domain box and, if requested, expands each
/// bin index into indicator columns. Constant features map to bin 0 and
/// produce a warning.
pub fn bin_and_onehot(ds: &Dataset, spec: &PreprocessSpec) -> Result<(Dataset, Vec<String>)> {
    let bins = spec.bins_per_feature;
    if bins < 2 {
        return Err(Error::invalid("binning needs at least 2 bins"));
    }
    let mut warnings = Vec::new();
    for (j, &(lo, hi)) in ds.domain_box.iter().enumerate() {
        if lo == hi {
            warnings.push(format!("feature '{}' is constant; mapped to its first bin", ds.feature_names[j]));
        }
    }
    let index = |j: usize, v: f64| {
        let (lo, hi) = ds.domain_box[j];
        if lo == hi { 0 } else { bin_of(v.clamp(lo, hi), lo, hi, bins) }
    };
    let (features, names, bx): (Vec<Vec<f64>>, Vec<String>, Vec<(f64, f64)>) = if spec.one_hot {
        let features = ds
            .features
            .iter()
            .map(|x| {
                let mut row = vec![0.0; ds.dim() * bins];
                for (j, &v) in x.iter().enumerate() {
                    row[j * bins + index(j, v)] = 1.0;
                }
                row
            })
            .collect();
        let names = ds.feature_names.iter().flat_map(|n| (0..bins).map(move |b| format!("{n}_bin{b}"))).collect();
        (features, names, vec![(0.0, 1.0); ds.dim() * bins])
    } else {
        let features =
            ds.features.iter().map(|x| x.iter().enumerate().map(|(j, &v)| index(j, v) as f64).collect()).collect();
        (features, ds.feature_names.clone(), vec![(0.0, (bins - 1) as f64); ds.dim()])
    };
    let out = Dataset { features, labels: ds.labels.clone(), feature_names: names, domain_box: bx };
    Ok((out, warnings))
}

/// Uniform-sphere instances labelled by a uniform-sphere halfspace.
pub fn synth_halfspace<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<(Dataset, Halfspace)> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("synth_halfspace needs d, n >= 1"));
    }
    let h = Halfspace::new(sample_unit_sphere(d, rng));
    let features: Vec<Vec<f64>> = (0..n).map(|_| sample_unit_sphere(d, rng).into_inner()).collect();
    let labels = features.iter().map(|x| sign_label(&h, x).map(Label::class)).collect::<Result<_>>()?;
    let ds = Dataset::new(features, labels, default_names(d))?.with_box(vec![(-1.0, 1.0); d])?;
    Ok((ds, h))
}

/// Random full tree of the given depth over `[0, 1]^d`. Each threshold is
/// drawn from the middle of its cell, so every leaf has positive volume, and
/// sibling leaves always disagree. Binary trees use labels ±1; otherwise
/// labels are `0..n_classes`.
pub fn random_tree<R: Rng + ?Sized>(d: usize, depth: usize, n_classes: usize, rng: &mut R) -> Result<DecisionTree> {
    if d == 0 || depth == 0 || n_classes < 2 {
        return Err(Error::invalid("random tree needs d >= 1, depth >= 1 and at least 2 classes"));
    }
    let class = |k: usize| if n_classes == 2 { [-1, 1][k] } else { k as ClassId };
    fn grow<R: Rng + ?Sized>(
        nodes: &mut Vec<Node>,
        cell: &mut Vec<(f64, f64)>,
        depth: usize,
        n_classes: usize,
        class: &dyn Fn(usize) -> ClassId,
        rng: &mut R,
    ) -> usize {
        let at = nodes.len();
        nodes.push(Node::Leaf { label: 0 });
        let feature = rng.random_range(0..cell.len());
        let (lo, hi) = cell[feature];
        let threshold = lo + (hi - lo) * rng.random_range(0.3..0.7);
        let (left, right) = if depth == 1 {
            let a = rng.random_range(0..n_classes);
            let b = (a + rng.random_range(1..n_classes)) % n_classes;
            let l = nodes.len();
            nodes.push(Node::Leaf { label: class(a) });
            nodes.push(Node::Leaf { label: class(b) });
            (l, l + 1)
        } else {
            cell[feature] = (lo, threshold);
            let l = grow(nodes, cell, depth - 1, n_classes, class, rng);
            cell[feature] = (threshold, hi);
            let r = grow(nodes, cell, depth - 1, n_classes, class, rng);
            cell[feature] = (lo, hi);
            (l, r)
        };
        nodes[at] = Node::Split { feature, threshold, left, right };
        at
    }
    let mut nodes = Vec::new();
    grow(&mut nodes, &mut vec![(0.0, 1.0); d], depth, n_classes, &class, rng);
    DecisionTree::from_nodes(d, nodes)
}

/// Uniform `[0, 1]^d` instances labelled by a [`random_tree`].
pub fn synth_tree_labeled<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    depth: usize,
    n_classes: usize,
    rng: &mut R,
) -> Result<(Dataset, DecisionTree)> {
    if n == 0 {
        return Err(Error::invalid("synth_tree_labeled needs n >= 1"));
    }
    let tree = random_tree(d, depth, n_classes, rng)?;
    let bx = vec![(0.0, 1.0); d];
    let features: Vec<Vec<f64>> = (0..n).map(|_| sample_box(&bx, rng)).collect();
    let labels = features.iter().map(|x| tree.predict(x)).collect();
    Ok((Dataset::new(features, labels, default_names(d))?.with_box(bx)?, tree))
}

/// Uniform `[-1, 1]^d` instances labelled `+1` outside the sphere of squared
/// radius `d / 3` (the mean squared norm), `-1` inside. Separable by an RBF SVM.
pub fn synth_rbf_labeled<R: Rng + ?Sized>(d: usize, n: usize, rng: &mut R) -> Result<Dataset> {
    if d == 0 || n == 0 {
        return Err(Error::invalid("synth_rbf_labeled needs d, n >= 1"));
    }
    let bx = vec![(-1.0, 1.0); d];
    let features: Vec<Vec<f64>> = (0..n).map(|_| sample_box(&bx, rng)).collect();
    let r2 = d as f64 / 3.0;
    let labels = features.iter().map(|x| Label::from_score(dot(x, x) - r2).class()).collect();
    Dataset::new(features, labels, default_names(d))?.with_box(bx)
}

/// Fraction of rows where `predict` returns the stored label.
pub fn test_accuracy(predict: impl Fn(&[f64]) -> ClassId, test: &Dataset) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::invalid("accuracy needs a nonempty test set"));
    }
    let hits = test.features.iter().zip(&test.labels).filter(|(x, y)| predict(x) == **y).count();
    Ok(hits as f64 / test.len() as f64)
}

/// Seeded shuffle, then the first `floor(n * fraction)` rows form the first part.
pub fn train_test_split<R: Rng + ?Sized>(ds: &Dataset, fraction: f64, rng: &mut R) -> Result<(Dataset, Dataset)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::invalid("split fraction must lie in (0, 1)"));
    }
    let k = (ds.len() as f64 * fraction).floor() as usize;
    if k == 0 || k == ds.len() {
        return Err(Error::invalid(format!("split of {} rows at {fraction} leaves an empty side", ds.len())));
    }
    let mut idx: Vec<usize> = (0..ds.len()).collect();
    idx.shuffle(rng);
    Ok((ds.subset(&idx[..k]), ds.subset(&idx[k..])))
}

/// Averaged perceptron through the origin on ±1 labels; returns the unit normal.
pub fn train_averaged_perceptron<R: Rng + ?Sized>(ds: &Dataset, epochs: usize, rng: &mut R) -> Result<Halfspace> {
    if ds.labels.iter().any(|&y| y != 1 && y != -1) {
        return Err(Error::invalid("perceptron needs -1/+1 labels"));
    }
    let d = ds.dim();
    let mut w = vec![0.0; d];
    let mut avg = vec![0.0; d];
    let mut order: Vec<usize> = (0..ds.len()).collect();
    for _ in 0..epochs.max(1) {
        order.shuffle(rng);
        for &i in &order {
            let (x, y) = (&ds.features[i], ds.labels[i] as f64);
            if y * dot(&w, x) <= 0.0 {
                w.iter_mut().zip(x).for_each(|(wi, xi)| *wi += y * xi);
            }
            avg.iter_mut().zip(&w).for_each(|(a, wi)| *a += wi);
        }
    }
    Ok(Halfspace::new(UnitVector::from_direction(avg)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn csv_examples() {
        let ds = parse_csv("a,b,y\n0,1,0\n1,0,1".as_bytes()).unwrap();
        assert_eq!((ds.len(), ds.dim()), (2, 2));
        assert_eq!(ds.labels, vec![-1, 1]);
        assert_eq!(ds.domain_box, vec![(0.0, 1.0), (0.0, 1.0)]);
        assert!(parse_csv("0,1,0\n1,0,1".as_bytes()).is_err());
        let three = parse_csv("a,y\n0.5,0\n1,1\n2,2\n".as_bytes()).unwrap();
        assert_eq!(three.classes(), vec![0, 1, 2]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match parse_csv("a,b,y\n0,1,0\n1,0\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match parse_csv("a,b,y\n0,1,0\n1,zz,1\n".as_bytes()) {
            Err(Error::Parse { line, msg }) => {
                assert_eq!(line, 3);
                assert!(msg.contains("zz"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_csv("".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(parse_csv("a,y\n".as_bytes()), Err(Error::Parse { .. })));
        assert!(matches!(parse_csv("a,y\n1,0.5\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut ds, _) = synth_halfspace(4, 50, &mut rng).unwrap();
        ds.features[0][0] = 1e-300;
        ds.features[1][1] = -123456.789e100;
        ds.features[2][2] = f64::MIN_POSITIVE / 8.0;
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = parse_csv(buf.as_slice()).unwrap();
        for (a, b) in ds.features.iter().flatten().zip(back.features.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back.labels, ds.labels);
    }

    #[test]
    fn binning_examples() {
        let ds = Dataset::new(vec![vec![0.1], vec![0.9]], vec![1, -1], vec!["f".into()])
            .unwrap()
            .with_box(vec![(0.0, 1.0)])
            .unwrap();
        let (b, warn) = bin_and_onehot(&ds, &PreprocessSpec { bins_per_feature: 2, one_hot: true }).unwrap();
        assert!(warn.is_empty());
        assert_eq!(b.features, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);

        let edges = Dataset::new(vec![vec![0.0], vec![0.5], vec![1.0]], vec![1; 3], vec!["f".into()]).unwrap();
        let (b, _) = bin_and_onehot(&edges, &PreprocessSpec { bins_per_feature: 2, one_hot: false }).unwrap();
        assert_eq!(b.features, vec![vec![0.0], vec![1.0], vec![1.0]]);
        assert!(bin_and_onehot(&edges, &PreprocessSpec { bins_per_feature: 1, one_hot: true }).is_err());
    }

    #[test]
    fn binning_shape_and_row_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (ds, _) = synth_tree_labeled(4, 200, 2, 2, &mut rng).unwrap();
        let (b, _) = bin_and_onehot(&ds, &PreprocessSpec::default()).unwrap();
        assert_eq!(b.dim(), 20);
        assert!(b.features.iter().all(|r| r.iter().sum::<f64>() == 4.0));
        // Re-binning with two bins: shape doubles and row sums stay at 20.
        let (bb, _) = bin_and_onehot(&b, &PreprocessSpec { bins_per_feature: 2, one_hot: true }).unwrap();
        assert_eq!(bb.dim(), 40);
        assert!(bb.features.iter().all(|r| r.iter().sum::<f64>() == 20.0));
    }

    #[test]
    fn constant_feature_warns() {
        let ds = Dataset::new(vec![vec![3.0, 0.0], vec![3.0, 1.0]], vec![1, -1], vec!["c".into(), "v".into()]).unwrap();
        let (b, warn) = bin_and_onehot(&ds, &PreprocessSpec { bins_per_feature: 3, one_hot: true }).unwrap();
        assert_eq!(warn.len(), 1);
        assert_eq!(b.features[0][..3], [1.0, 0.0, 0.0]);
        assert_eq!(b.features[1][..3], [1.0, 0.0, 0.0]);
    }

    #[test]
    fn halfspace_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (ds, h) = synth_halfspace(6, 10_000, &mut rng).unwrap();
        assert!(ds.features.iter().zip(&ds.labels).all(|(x, y)| h.label(x).unwrap().class() == *y));
        let pos = ds.labels.iter().filter(|&&y| y == 1).count() as f64 / 10_000.0;
        assert!((pos - 0.5).abs() <= 0.02);
    }

    #[test]
    fn generators_are_reproducible() {
        let gen = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (ds, t) = synth_tree_labeled(5, 100, 3, 3, &mut rng).unwrap();
            let mut buf = Vec::new();
            write_csv_to(&ds, &mut buf).unwrap();
            (buf, serde_json::to_string(&t).unwrap())
        };
        assert_eq!(gen(9), gen(9));
        assert_ne!(gen(9), gen(10));
    }

    #[test]
    fn tree_generator() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (ds, t) = synth_tree_labeled(3, 500, 1, 2, &mut rng).unwrap();
        assert_eq!(t.depth(), 1);
        assert_eq!(test_accuracy(|x| t.predict(x), &ds).unwrap(), 1.0);
        assert_eq!(ds.classes(), vec![-1, 1]);
        let (_, t3) = synth_tree_labeled(10, 10, 3, 2, &mut rng).unwrap();
        assert_eq!((t3.depth(), t3.n_leaves()), (3, 8));
    }

    #[test]
    fn rbf_generator_is_roughly_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ds = synth_rbf_labeled(10, 4000, &mut rng).unwrap();
        let pos = ds.labels.iter().filter(|&&y| y == 1).count() as f64 / 4000.0;
        assert!((0.35..0.65).contains(&pos), "{pos}");
        assert!(ds.features.iter().zip(&ds.labels).all(|(x, &y)| (dot(x, x) > 10.0 / 3.0) == (y == 1)));
    }

    #[test]
    fn accuracy_and_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let ds = Dataset::new((0..10).map(|i| vec![i as f64]).collect(), vec![1, -1, 1, -1, 1, -1, 1, -1, 1, -1], vec!["a".into()]).unwrap();
        assert_eq!(test_accuracy(|_| 1, &ds).unwrap(), 0.5);
        let (a, b) = train_test_split(&ds, 0.5, &mut rng).unwrap();
        assert_eq!((a.len(), b.len()), (5, 5));
        let mut all: Vec<f64> = a.features.iter().chain(&b.features).map(|r| r[0]).collect();
        all.sort_by(f64::total_cmp);
        assert_eq!(all, (0..10).map(|i| i as f64).collect::<Vec<_>>());
        let (a2, _) = train_test_split(&ds, 0.5, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
        assert_eq!(a, a2);
        assert!(train_test_split(&ds, 0.05, &mut rng).is_err());
    }

    #[test]
    fn perceptron_learns_a_separable_halfspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (ds, h) = synth_halfspace(5, 2000, &mut rng).unwrap();
        let w = train_averaged_perceptron(&ds, 10, &mut rng).unwrap();
        let acc = test_accuracy(|x| w.label(x).unwrap().class(), &ds).unwrap();
        assert!(acc > 0.97, "{acc}");
        assert!(crate::geometry::geometric_error(&h.w, &w.w).unwrap() < 0.3);
    }
}
