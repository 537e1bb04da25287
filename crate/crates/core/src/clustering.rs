//! Agglomerative hierarchical clustering of entities and dendrogram cuts.

use serde::{Deserialize, Serialize};

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::model::EntityId;
use crate::scalar::Real;
use crate::similarity::SimilarityMatrix;

/// How a (possibly asymmetric) similarity matrix becomes a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Euclidean distance between similarity rows.
    #[default]
    RowEuclidean,
    /// `1 - (s(i,j) + s(j,i)) / 2`.
    OneMinusSym,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Linkage {
    #[default]
    Average,
    Single,
    Complete,
}

macro_rules! kebab_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl ::std::fmt::Display for $ty {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str(match self { $(Self::$variant => $name),+ })
            }
        }

        impl ::std::str::FromStr for $ty {
            type Err = $crate::error::Error;

            fn from_str(s: &str) -> $crate::error::Result<Self> {
                match s {
                    $($name => Ok(Self::$variant),)+
                    other => Err($crate::error::Error::InvalidParams(format!(
                        "unknown {} `{other}`", stringify!($ty)
                    ))),
                }
            }
        }
    };
}
pub(crate) use kebab_enum;

kebab_enum!(DistanceMode { RowEuclidean => "row-euclidean", OneMinusSym => "one-minus-sym" });
kebab_enum!(Linkage { Average => "average", Single => "single", Complete => "complete" });

/// Symmetric, non-negative, zero-diagonal distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix<T> {
    entities: Vec<EntityId>,
    values: Vec<T>,
}

impl<T: Real> DistanceMatrix<T> {
    /// Builds from row-major values, checking the matrix invariants.
    pub fn from_rows(entities: Vec<EntityId>, values: Vec<T>) -> Result<Self> {
        let n = entities.len();
        if values.len() != n * n {
            return Err(Error::DimensionMismatch(format!("{} values for {n} entities", values.len())));
        }
        for i in 0..n {
            if values[i * n + i] != T::zero() {
                return Err(Error::InvalidParams("distance diagonal must be zero".into()));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= T::zero()) || v != values[j * n + i] {
                    return Err(Error::InvalidParams(
                        "distances must be symmetric and non-negative".into(),
                    ));
                }
            }
        }
        Ok(DistanceMatrix { entities, values })
    }

    pub fn entities(&self) -> &[EntityId] {
        &self.entities
    }

    pub fn size(&self) -> usize {
        self.entities.len()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.size() + j]
    }
}

pub fn similarity_to_distance<T: Real>(s: &SimilarityMatrix<T>, mode: DistanceMode) -> DistanceMatrix<T> {
    let n = s.size();
    let mut values = vec![T::zero(); n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = match mode {
                DistanceMode::RowEuclidean => s
                    .row(i)
                    .iter()
                    .zip(s.row(j))
                    .map(|(&a, &b)| (a - b) * (a - b))
                    .fold(T::zero(), |acc, x| acc + x)
                    .sqrt(),
                DistanceMode::OneMinusSym => {
                    let two = T::one() + T::one();
                    (T::one() - (s.get(i, j) + s.get(j, i)) / two).max(T::zero())
                }
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix { entities: s.entities().to_vec(), values }
}

/// One agglomeration step. Nodes `0..n` are leaves; merge `k` creates node `n + k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Merge<T> {
    pub left: usize,
    pub right: usize,
    pub height: T,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram<T> {
    leaves: Vec<EntityId>,
    merges: Vec<Merge<T>>,
}

/// Naive `O(n³)` agglomeration with Lance–Williams updates. Among equal
/// distances the smallest `(row, column)` pair of the current ordering wins;
/// a merged cluster takes the row of its first member.
pub fn agglomerate<T: Real>(d: &DistanceMatrix<T>, linkage: Linkage) -> Dendrogram<T> {
    let n = d.size();
    let mut node: Vec<usize> = (0..n).collect();
    let mut size: Vec<usize> = vec![1; n];
    let mut dist: Vec<Vec<T>> = (0..n).map(|i| (0..n).map(|j| d.get(i, j)).collect()).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while node.len() > 1 {
        let m = node.len();
        let (mut bi, mut bj) = (0, 1);
        let mut best = dist[0][1];
        for i in 0..m {
            for j in (i + 1)..m {
                if dist[i][j] < best {
                    best = dist[i][j];
                    bi = i;
                    bj = j;
                }
            }
        }

        let (si, sj) = (T::from_count(size[bi]), T::from_count(size[bj]));
        for k in 0..m {
            if k == bi || k == bj {
                continue;
            }
            let (dik, djk) = (dist[bi][k], dist[bj][k]);
            let updated = match linkage {
                Linkage::Average => (si * dik + sj * djk) / (si + sj),
                Linkage::Single => dik.min(djk),
                Linkage::Complete => dik.max(djk),
            };
            dist[bi][k] = updated;
            dist[k][bi] = updated;
        }

        merges.push(Merge {
            left: node[bi],
            right: node[bj],
            height: best,
            size: size[bi] + size[bj],
        });
        node[bi] = n + merges.len() - 1;
        size[bi] += size[bj];
        node.remove(bj);
        size.remove(bj);
        dist.remove(bj);
        for row in &mut dist {
            row.remove(bj);
        }
    }
    Dendrogram { leaves: d.entities.clone(), merges }
}

impl<T: Real> Dendrogram<T> {
    pub fn leaves(&self) -> &[EntityId] {
        &self.leaves
    }

    pub fn merges(&self) -> &[Merge<T>] {
        &self.merges
    }

    /// Undoes the last `n - 1` merges. Clusters are named `c0..` in order of
    /// their smallest leaf index.
    pub fn cut(&self, n: usize) -> Result<Decomposition> {
        let leaves = self.leaves.len();
        if n == 0 || n > leaves {
            return Err(Error::ClusterCount { requested: n, entities: leaves });
        }
        // representative leaf of every node, then union-find over leaves
        let mut parent: Vec<usize> = (0..leaves).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut rep: Vec<usize> = (0..leaves).collect();
        for m in &self.merges[..leaves - n] {
            let (a, b) = (root(&mut parent, rep[m.left]), root(&mut parent, rep[m.right]));
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            parent[hi] = lo;
            rep.push(lo);
        }
        let mut groups: Vec<Vec<EntityId>> = Vec::with_capacity(n);
        let mut slot = vec![usize::MAX; leaves];
        for leaf in 0..leaves {
            let r = root(&mut parent, leaf);
            if slot[r] == usize::MAX {
                slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[slot[r]].push(self.leaves[leaf]);
        }
        Decomposition::from_groups(groups)
    }

    /// JSON dump: leaf order and `[left, right, height]` triples, heights
    /// rounded to 9 significant digits.
    pub fn to_json(&self) -> String {
        let merges: Vec<serde_json::Value> = self
            .merges
            .iter()
            .map(|m| serde_json::json!([m.left, m.right, round_significant(m.height.as_f64(), 9)]))
            .collect();
        let v = serde_json::json!({ "leaves": self.leaves, "merges": merges });
        let mut s = serde_json::to_string(&v).expect("dendrogram serializes");
        s.push('\n');
        s
    }
}

pub(crate) fn round_significant(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}
