//! Bucketed lookup of covered boxes, for overlap and proximity queries.

use crate::domain::box_distance;

/// Closed boxes bucketed on a uniform grid over a bounding box.
#[derive(Clone, Debug)]
pub(crate) struct BoxIndex {
    lower: Vec<f64>,
    side: Vec<f64>,
    res: usize,
    boxes: Vec<(Vec<f64>, Vec<f64>)>,
    buckets: Vec<Vec<u32>>,
}

impl BoxIndex {
    pub fn new(lower: &[f64], upper: &[f64], boxes: Vec<(Vec<f64>, Vec<f64>)>) -> Self {
        let n = lower.len();
        let res = ((boxes.len().max(1) as f64).powf(1.0 / n as f64).ceil() as usize).clamp(1, 512);
        let side: Vec<f64> = (0..n).map(|a| (upper[a] - lower[a]) / res as f64).collect();
        let mut idx = BoxIndex {
            lower: lower.to_vec(),
            side,
            res,
            boxes: Vec::new(),
            buckets: vec![Vec::new(); res.pow(n as u32)],
        };
        for (k, b) in boxes.iter().enumerate() {
            let (lo, hi) = idx.span(&b.0, &b.1);
            idx.visit(&lo, &hi, &mut |bucket| {
                idx_push(bucket, k);
                false
            });
        }
        idx.boxes = boxes;
        idx
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    fn bucket_of(&self, a: usize, x: f64) -> usize {
        let r = ((x - self.lower[a]) / self.side[a]).floor();
        (r.max(0.0) as usize).min(self.res - 1)
    }

    fn span(&self, lo: &[f64], hi: &[f64]) -> (Vec<usize>, Vec<usize>) {
        let n = lo.len();
        (
            (0..n).map(|a| self.bucket_of(a, lo[a])).collect(),
            (0..n).map(|a| self.bucket_of(a, hi[a])).collect(),
        )
    }

    /// Visit bucket lists in the index range `[lo, hi]`; stop early when `f` returns true.
    fn visit(&mut self, lo: &[usize], hi: &[usize], f: &mut impl FnMut(&mut Vec<u32>) -> bool) -> bool {
        let n = lo.len();
        let mut cur = lo.to_vec();
        loop {
            let flat = cur.iter().fold(0, |acc, &i| acc * self.res + i);
            if f(&mut self.buckets[flat]) {
                return true;
            }
            let mut a = n;
            loop {
                if a == 0 {
                    return false;
                }
                a -= 1;
                if cur[a] < hi[a] {
                    cur[a] += 1;
                    break;
                }
                cur[a] = lo[a];
            }
        }
    }

    fn any_in(&self, lo: &[usize], hi: &[usize], pred: &impl Fn(&(Vec<f64>, Vec<f64>)) -> bool) -> bool {
        let n = lo.len();
        let mut cur = lo.to_vec();
        loop {
            let flat = cur.iter().fold(0, |acc, &i| acc * self.res + i);
            if self.buckets[flat].iter().any(|&k| pred(&self.boxes[k as usize])) {
                return true;
            }
            let mut a = n;
            loop {
                if a == 0 {
                    return false;
                }
                a -= 1;
                if cur[a] < hi[a] {
                    cur[a] += 1;
                    break;
                }
                cur[a] = lo[a];
            }
        }
    }

    /// Whether some stored box meets the interior of `[lo, hi]` in a set of
    /// positive measure (overlaps thinner than `tol` per axis are ignored).
    pub fn overlaps(&self, lo: &[f64], hi: &[f64], tol: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let (blo, bhi) = self.span(lo, hi);
        self.any_in(&blo, &bhi, &|b| {
            (0..lo.len()).all(|a| b.1[a].min(hi[a]) - b.0[a].max(lo[a]) > tol)
        })
    }

    /// Whether some stored box lies within Euclidean distance `< r` of `[lo, hi]`.
    ///
    /// Buckets are scanned in rings of growing Chebyshev radius so dense covers
    /// answer after the first ring.
    pub fn within(&self, lo: &[f64], hi: &[f64], r: f64) -> bool {
        if self.is_empty() {
            return false;
        }
        let n = lo.len();
        let (blo, bhi) = self.span(lo, hi);
        let near = |b: &(Vec<f64>, Vec<f64>)| box_distance(lo, hi, &b.0, &b.1) < r;
        if self.any_in(&blo, &bhi, &near) {
            return true;
        }
        let min_side = self.side.iter().copied().fold(f64::INFINITY, f64::min);
        let mut ring = 1usize;
        // buckets at ring ρ are at least (ρ−1)·side away
        while ((ring - 1) as f64) * min_side < r && ring <= self.res {
            // each face slab of the ring: axis a pinned to blo−ρ or bhi+ρ
            for a in 0..n {
                for pinned in [blo[a] as isize - ring as isize, (bhi[a] + ring) as isize] {
                    if pinned < 0 || pinned >= self.res as isize {
                        continue;
                    }
                    let mut lo_i = Vec::with_capacity(n);
                    let mut hi_i = Vec::with_capacity(n);
                    for b in 0..n {
                        if b == a {
                            lo_i.push(pinned as usize);
                            hi_i.push(pinned as usize);
                        } else if b < a {
                            // earlier axes already handled their pinned faces
                            lo_i.push(blo[b].saturating_sub(ring - 1));
                            hi_i.push((bhi[b] + ring - 1).min(self.res - 1));
                        } else {
                            lo_i.push(blo[b].saturating_sub(ring));
                            hi_i.push((bhi[b] + ring).min(self.res - 1));
                        }
                    }
                    if self.any_in(&lo_i, &hi_i, &near) {
                        return true;
                    }
                }
            }
            ring += 1;
        }
        false
    }
}

fn idx_push(bucket: &mut Vec<u32>, k: usize) {
    bucket.push(k as u32);
}
