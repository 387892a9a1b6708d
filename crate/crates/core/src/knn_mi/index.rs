//! Exact max-norm neighbour queries.

use crate::types::Matrix;

#[inline]
pub(crate) fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(u, v)| (u - v).abs())
        .fold(0.0, f64::max)
}

#[inline]
fn within(d: f64, radius: f64, strict: bool) -> bool {
    if strict {
        d < radius
    } else {
        d <= radius
    }
}

/// Number of points other than `center` within `radius` of it under the max-norm.
///
/// `strict` selects the open ball (`< radius`) instead of the closed one.
/// A plain linear scan; [`SweepIndex`] answers the same query faster.
pub fn count_within_maxnorm(points: &Matrix, center: usize, radius: f64, strict: bool) -> usize {
    let c = points.row(center);
    (0..points.rows())
        .filter(|&j| j != center && within(max_norm(points.row(j), c), radius, strict))
        .count()
}

/// Points sorted along one coordinate. Queries walk outward from the centre
/// and stop once the coordinate gap alone exceeds the search radius, so they
/// return exactly what a full scan would.
pub(crate) struct SweepIndex<'a> {
    points: &'a Matrix,
    axis: usize,
    order: Vec<usize>,
    keys: Vec<f64>,
    pos: Vec<usize>,
}

/// The `k` nearest neighbours of a point, closest first.
pub(crate) struct Neighbors {
    pub dist: Vec<f64>,
    pub idx: Vec<usize>,
}

impl Neighbors {
    pub fn kth(&self) -> f64 {
        *self.dist.last().expect("k >= 1")
    }
}

impl<'a> SweepIndex<'a> {
    /// Sorts along the coordinate with the most distinct values.
    pub fn new(points: &'a Matrix) -> Self {
        let axis = (0..points.cols())
            .map(|c| {
                let mut col = points.column(c);
                col.sort_by(f64::total_cmp);
                col.dedup();
                (col.len(), c)
            })
            .max_by(|a, b| a.0.cmp(&b.0).then(b.1.cmp(&a.1)))
            .map_or(0, |(_, c)| c);
        let mut order: Vec<usize> = (0..points.rows()).collect();
        order.sort_by(|&a, &b| {
            points.row(a)[axis]
                .total_cmp(&points.row(b)[axis])
                .then(a.cmp(&b))
        });
        let keys = order.iter().map(|&i| points.row(i)[axis]).collect();
        let mut pos = vec![0; order.len()];
        for (p, &i) in order.iter().enumerate() {
            pos[i] = p;
        }
        Self {
            points,
            axis,
            order,
            keys,
            pos,
        }
    }

    pub fn knn(&self, i: usize, k: usize) -> Neighbors {
        let c = self.points.row(i);
        let ck = c[self.axis];
        let p = self.pos[i];
        let n = self.keys.len();
        let mut dist: Vec<f64> = Vec::with_capacity(k + 1);
        let mut idx: Vec<usize> = Vec::with_capacity(k + 1);
        let push = |d: f64, j: usize, dist: &mut Vec<f64>, idx: &mut Vec<usize>| {
            if dist.len() == k && d >= dist[k - 1] {
                return;
            }
            let at = dist.partition_point(|&x| x <= d);
            dist.insert(at, d);
            idx.insert(at, j);
            if dist.len() > k {
                dist.pop();
                idx.pop();
            }
        };
        let (mut l, mut r) = (p, p + 1);
        loop {
            let gap_l = (l > 0).then(|| ck - self.keys[l - 1]);
            let gap_r = (r < n).then(|| self.keys[r] - ck);
            let take_left = match (gap_l, gap_r) {
                (None, None) => break,
                (Some(_), None) => true,
                (None, Some(_)) => false,
                (Some(a), Some(b)) => a <= b,
            };
            let gap = if take_left { gap_l } else { gap_r }.unwrap();
            if dist.len() == k && gap >= dist[k - 1] {
                break;
            }
            let j = if take_left {
                l -= 1;
                self.order[l]
            } else {
                r += 1;
                self.order[r - 1]
            };
            push(max_norm(self.points.row(j), c), j, &mut dist, &mut idx);
        }
        Neighbors { dist, idx }
    }

    pub fn count_within(&self, i: usize, radius: f64, strict: bool) -> usize {
        let c = self.points.row(i);
        let ck = c[self.axis];
        let p = self.pos[i];
        if self.points.cols() == 1 {
            // Coordinate differences are monotone along the sorted keys.
            let right = &self.keys[p + 1..];
            let nr = right.partition_point(|&v| within((v - ck).abs(), radius, strict));
            let left = &self.keys[..p];
            let nl = left.len() - left.partition_point(|&v| !within((v - ck).abs(), radius, strict));
            return nl + nr;
        }
        let mut count = 0;
        for q in (0..p).rev() {
            if (ck - self.keys[q]).abs() > radius {
                break;
            }
            let j = self.order[q];
            if within(max_norm(self.points.row(j), c), radius, strict) {
                count += 1;
            }
        }
        for q in p + 1..self.keys.len() {
            if (self.keys[q] - ck).abs() > radius {
                break;
            }
            let j = self.order[q];
            if within(max_norm(self.points.row(j), c), radius, strict) {
                count += 1;
            }
        }
        count
    }
}
