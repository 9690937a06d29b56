//! Grouping of nearby contours into garment regions, and removal of regions
//! covered by person boxes.

use crate::frame::BoundingBox;
use crate::frameio::Detection;
use crate::regions::Contour;

#[derive(Clone, Debug, PartialEq)]
pub struct RegionCluster {
    pub members: Vec<Contour>,
    pub bbox: BoundingBox,
    pub color_label: String,
    pub total_area: u64,
}

/// Externally detected person rectangles for one frame.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PersonBoxes {
    pub frame_index: u64,
    pub boxes: Vec<BoundingBox>,
}

/// Euclidean gap between two rectangles; 0 when they overlap or touch.
pub fn box_gap(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let dx = (b.x as i64 - a.right() as i64)
        .max(a.x as i64 - b.right() as i64)
        .max(0);
    let dy = (b.y as i64 - a.bottom() as i64)
        .max(a.y as i64 - b.bottom() as i64)
        .max(0);
    ((dx * dx + dy * dy) as f64).sqrt()
}

struct DisjointSet {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        match self.rank[a].cmp(&self.rank[b]) {
            std::cmp::Ordering::Less => self.parent[a] = b,
            std::cmp::Ordering::Greater => self.parent[b] = a,
            std::cmp::Ordering::Equal => {
                self.parent[b] = a;
                self.rank[a] = self.rank[a].saturating_add(1);
            }
        }
    }
}

/// Single-linkage clustering: contours whose boxes lie within
/// `gap_threshold` of each other end up in the same cluster. Members keep
/// their input order; clusters are ordered by `(bbox.y, bbox.x)`.
pub fn cluster_contours(
    contours: &[Contour],
    color_label: &str,
    gap_threshold: f64,
) -> Vec<RegionCluster> {
    let n = contours.len();
    let mut sets = DisjointSet::new(n);
    for i in 0..n {
        for j in i + 1..n {
            if box_gap(&contours[i].bbox, &contours[j].bbox) <= gap_threshold {
                sets.union(i, j);
            }
        }
    }
    let mut slot_of_root = vec![usize::MAX; n];
    let mut clusters: Vec<RegionCluster> = Vec::new();
    for (i, contour) in contours.iter().enumerate() {
        let root = sets.find(i);
        if slot_of_root[root] == usize::MAX {
            slot_of_root[root] = clusters.len();
            clusters.push(RegionCluster {
                members: Vec::new(),
                bbox: contour.bbox,
                color_label: color_label.to_string(),
                total_area: 0,
            });
        }
        let cluster = &mut clusters[slot_of_root[root]];
        cluster.bbox = cluster.bbox.union(&contour.bbox);
        cluster.total_area += contour.area;
        cluster.members.push(contour.clone());
    }
    clusters.sort_by_key(|c| (c.bbox.y, c.bbox.x));
    clusters
}

/// Cells of `region` covered by at least one of `boxes`.
pub fn covered_area(region: &BoundingBox, boxes: &[BoundingBox]) -> u64 {
    let clipped: Vec<BoundingBox> = boxes.iter().filter_map(|b| b.intersect(region)).collect();
    if clipped.is_empty() {
        return 0;
    }
    let mut xs: Vec<u64> = clipped
        .iter()
        .flat_map(|b| [b.x as u64, b.right()])
        .collect();
    let mut ys: Vec<u64> = clipped
        .iter()
        .flat_map(|b| [b.y as u64, b.bottom()])
        .collect();
    xs.sort_unstable();
    xs.dedup();
    ys.sort_unstable();
    ys.dedup();
    let mut area = 0;
    for xw in xs.windows(2) {
        for yw in ys.windows(2) {
            let inside = clipped.iter().any(|b| {
                b.x as u64 <= xw[0] && xw[1] <= b.right() && b.y as u64 <= yw[0] && yw[1] <= b.bottom()
            });
            if inside {
                area += (xw[1] - xw[0]) * (yw[1] - yw[0]);
            }
        }
    }
    area
}

/// Drops clusters whose box is covered by person boxes for at least
/// `containment_min` of its area. A cluster with no overlap at all is always
/// kept.
pub fn exclude_persons(
    clusters: Vec<RegionCluster>,
    persons: &PersonBoxes,
    containment_min: f64,
) -> Vec<RegionCluster> {
    if persons.boxes.is_empty() {
        return clusters;
    }
    clusters
        .into_iter()
        .filter(|c| {
            let covered = covered_area(&c.bbox, &persons.boxes);
            covered == 0 || (covered as f64) < containment_min * c.bbox.area() as f64
        })
        .collect()
}

pub fn to_detections(clusters: &[RegionCluster], frame_index: u64, frame_area: u64) -> Vec<Detection> {
    clusters
        .iter()
        .map(|c| Detection {
            frame_index,
            bbox: c.bbox,
            color_label: c.color_label.clone(),
            score: (c.total_area as f64 / frame_area as f64).clamp(0.0, 1.0),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::Point;

    fn contour(x: u32, y: u32, w: u32, h: u32, area: u64) -> Contour {
        Contour {
            points: vec![Point { x, y }],
            bbox: BoundingBox::new(x, y, w, h),
            area,
        }
    }

    #[test]
    fn gaps() {
        let a = BoundingBox::new(0, 0, 10, 10);
        assert_eq!(box_gap(&a, &BoundingBox::new(5, 5, 10, 10)), 0.0);
        assert_eq!(box_gap(&a, &BoundingBox::new(10, 0, 10, 10)), 0.0);
        assert_eq!(box_gap(&a, &BoundingBox::new(20, 0, 10, 10)), 10.0);
        assert_eq!(box_gap(&a, &BoundingBox::new(13, 14, 1, 1)), 5.0);
        assert_eq!(box_gap(&BoundingBox::new(13, 14, 1, 1), &a), 5.0);
    }

    #[test]
    fn single_contour_cluster() {
        let c = contour(3, 4, 5, 6, 20);
        let clusters = cluster_contours(std::slice::from_ref(&c), "Red", 20.0);
        assert_eq!(clusters.len(), 1);
        assert_eq!(clusters[0].bbox, c.bbox);
        assert_eq!(clusters[0].total_area, 20);
        assert_eq!(clusters[0].members, vec![c]);
    }

    #[test]
    fn far_contours_stay_apart() {
        let cs = [contour(0, 0, 10, 10, 100), contour(40, 0, 10, 10, 100)];
        assert_eq!(cluster_contours(&cs, "Red", 20.0).len(), 2);
        let merged = cluster_contours(&cs, "Red", 30.0);
        assert_eq!(merged.len(), 1);
        assert_eq!(merged[0].bbox, BoundingBox::new(0, 0, 50, 10));
        assert_eq!(merged[0].total_area, 200);
    }

    #[test]
    fn chains_link_transitively() {
        let cs = [
            contour(0, 0, 5, 5, 25),
            contour(100, 0, 5, 5, 25),
            contour(10, 0, 5, 5, 25),
            contour(20, 0, 5, 5, 25),
        ];
        let clusters = cluster_contours(&cs, "Blue", 5.0);
        assert_eq!(clusters.len(), 2);
        assert_eq!(clusters[0].members.len(), 3);
        assert_eq!(clusters[1].bbox.x, 100);
    }

    #[test]
    fn coverage_of_overlapping_persons() {
        let region = BoundingBox::new(0, 0, 10, 10);
        let persons = [BoundingBox::new(0, 0, 6, 10), BoundingBox::new(4, 0, 6, 5)];
        assert_eq!(covered_area(&region, &persons), 60 + 4 * 5);
        assert_eq!(covered_area(&region, &[]), 0);
    }

    #[test]
    fn person_exclusion() {
        let cs = [contour(10, 10, 10, 10, 100), contour(60, 10, 10, 10, 100)];
        let clusters = cluster_contours(&cs, "Red", 5.0);
        let none = PersonBoxes {
            frame_index: 0,
            boxes: vec![],
        };
        assert_eq!(exclude_persons(clusters.clone(), &none, 0.5), clusters);
        let p = PersonBoxes {
            frame_index: 0,
            boxes: vec![BoundingBox::new(5, 5, 20, 20)],
        };
        let kept = exclude_persons(clusters.clone(), &p, 0.5);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].bbox.x, 60);
        assert_eq!(exclude_persons(kept.clone(), &p, 0.5), kept);
        // no overlap survives even a zero threshold
        assert_eq!(exclude_persons(clusters.clone(), &p, 0.0).len(), 1);
    }

    #[test]
    fn detection_scores() {
        assert!(to_detections(&[], 0, 100).is_empty());
        let clusters = cluster_contours(&[contour(0, 0, 10, 10, 100)], "Green", 0.0);
        let dets = to_detections(&clusters, 7, 100);
        assert_eq!(dets[0].score, 1.0);
        assert_eq!(dets[0].frame_index, 7);
        assert_eq!(dets[0].color_label, "Green");
        assert_eq!(to_detections(&clusters, 7, 400)[0].score, 0.25);
    }
}
