use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Classification, Isometry, Ray};
use crate::error::{Error, Result};
use crate::npc::{Geometry, MetricTree, TreePoint};

/// A length-preserving permutation of the vertices of a finite tree.
///
/// Every such map fixes the metric center of the tree, so all tree
/// automorphisms handled here are elliptic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeAutomorphism {
    pub vertex_map: Vec<usize>,
}

impl TreeAutomorphism {
    pub fn identity(tree: &MetricTree) -> Self {
        Self {
            vertex_map: (0..tree.vertex_count()).collect(),
        }
    }

    /// Image edge of `k` and whether its orientation flips.
    fn edge_image(&self, tree: &MetricTree, k: usize) -> Option<(usize, bool)> {
        let e = tree.edges()[k];
        let (a, b) = (self.vertex_map[e.from], self.vertex_map[e.to]);
        tree.edges().iter().enumerate().find_map(|(j, f)| {
            if (f.from, f.to) == (a, b) {
                Some((j, false))
            } else if (f.from, f.to) == (b, a) {
                Some((j, true))
            } else {
                None
            }
        })
    }

    fn inverse_map(&self) -> Self {
        let mut inv = vec![0; self.vertex_map.len()];
        for (v, &w) in self.vertex_map.iter().enumerate() {
            inv[w] = v;
        }
        Self { vertex_map: inv }
    }

    fn map_point(&self, tree: &MetricTree, p: &TreePoint) -> TreePoint {
        let (k, flip) = self.edge_image(tree, p.edge).expect("checked automorphism");
        let len = tree.edges()[k].length;
        tree.canonical(TreePoint {
            edge: k,
            offset: if flip { len - p.offset } else { p.offset },
        })
    }

    /// Midpoint of a longest path: fixed by every automorphism.
    fn center(tree: &MetricTree) -> TreePoint {
        let n = tree.vertex_count();
        let far = |from: usize| {
            (0..n)
                .max_by(|&a, &b| {
                    tree.vertex_distance(from, a)
                        .total_cmp(&tree.vertex_distance(from, b))
                })
                .unwrap()
        };
        let a = far(0);
        let b = far(a);
        let pa = tree.vertex_point(a).expect("tree with edges");
        let pb = tree.vertex_point(b).expect("tree with edges");
        tree.geodesic(&pa, &pb, 0.5)
    }
}

impl Isometry<MetricTree> for TreeAutomorphism {
    fn check(&self, tree: &MetricTree) -> Result<()> {
        let n = tree.vertex_count();
        if self.vertex_map.len() != n {
            return Err(Error::domain(format!(
                "vertex map has {} entries for {n} vertices",
                self.vertex_map.len()
            )));
        }
        let mut seen = vec![false; n];
        for &w in &self.vertex_map {
            if w >= n || seen[w] {
                return Err(Error::domain("vertex map is not a permutation"));
            }
            seen[w] = true;
        }
        for (k, e) in tree.edges().iter().enumerate() {
            match self.edge_image(tree, k) {
                Some((j, _)) if (tree.edges()[j].length - e.length).abs() <= 1e-12 * e.length => {}
                _ => {
                    return Err(Error::domain(format!(
                        "edge {k} is not mapped to an edge of equal length"
                    )))
                }
            }
        }
        Ok(())
    }

    fn apply(&self, tree: &MetricTree, p: &TreePoint) -> TreePoint {
        self.map_point(tree, p)
    }

    fn apply_inverse(&self, tree: &MetricTree, p: &TreePoint) -> TreePoint {
        self.inverse_map().map_point(tree, p)
    }

    fn classify(&self, _tree: &MetricTree) -> Classification {
        Classification::Elliptic
    }

    fn translation_length(&self, _tree: &MetricTree) -> f64 {
        0.0
    }

    fn min_point(&self, tree: &MetricTree, _hint: &TreePoint) -> Result<TreePoint> {
        if tree.is_singleton() {
            return Err(Error::domain("tree has no edges"));
        }
        Ok(Self::center(tree))
    }

    fn decay_ray(&self, tree: &MetricTree) -> Result<Ray<TreePoint>> {
        let c = self.min_point(tree, &tree.base_point())?;
        Ok(Arc::new(move |_| c))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rotating_a_star_fixes_the_center() {
        let t = MetricTree::star(3, 1.0).unwrap();
        let rot = TreeAutomorphism {
            vertex_map: vec![0, 2, 3, 1],
        };
        rot.check(&t).unwrap();
        let c = rot.min_point(&t, &t.base_point()).unwrap();
        assert_eq!(t.as_vertex(&c), Some(0));
        let p = TreePoint {
            edge: 0,
            offset: 0.4,
        };
        let q = rot.apply(&t, &p);
        assert_eq!(q.edge, 1);
        let back = rot.apply_inverse(&t, &q);
        assert!(t.distance(&back, &p) < 1e-15);
    }

    #[test]
    fn rejects_non_automorphisms() {
        let t = MetricTree::from_json(r#"{"vertices":[0,1,2],"edges":[{"from":0,"to":1,"length":1},{"from":0,"to":2,"length":2}]}"#).unwrap();
        assert!(TreeAutomorphism {
            vertex_map: vec![0, 2, 1]
        }
        .check(&t)
        .is_err());
        assert!(TreeAutomorphism {
            vertex_map: vec![0, 0, 1]
        }
        .check(&t)
        .is_err());
    }
}
