//! Detection scoring: IoU, greedy matching, precision/recall, and the
//! precision/recall-vs-threshold sweep.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::frame::BoundingBox;
use crate::frameio::Annotation;

pub const DEFAULT_TAU: f64 = 0.55;

/// Upper bound on the number of points in a threshold sweep.
pub const MAX_TAUS: usize = 10_000;

/// Intersection over union with areas counted in grid cells.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let inter = a.intersection_area(b);
    if inter == 0 {
        return 0.0;
    }
    let union = a.area() + b.area() - inter;
    inter as f64 / union as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EvalCounts {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl EvalCounts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp, self.fn_)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_, self.fp)
    }
}

impl std::ops::AddAssign for EvalCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

/// `num / den`; an empty denominator scores 1.0 only when the opposite error
/// count is also zero (nothing to find and nothing claimed).
fn ratio(num: u64, den: u64, other: u64) -> f64 {
    if den > 0 {
        num as f64 / den as f64
    } else if other == 0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FrameMatch {
    pub counts: EvalCounts,
    /// `(detection index, ground-truth index, iou)` for every true positive,
    /// in the order the pairs were accepted.
    pub pairs: Vec<(usize, usize, f64)>,
}

impl FrameMatch {
    pub fn ious(&self) -> impl Iterator<Item = f64> + '_ {
        self.pairs.iter().map(|p| p.2)
    }
}

/// Greedy one-to-one matching: repeatedly accept the highest-IoU unmatched
/// pair with IoU >= `tau`; ties go to the lower detection index, then the
/// lower ground-truth index.
pub fn match_frame(dets: &[BoundingBox], gts: &[BoundingBox], tau: f64) -> FrameMatch {
    let mut candidates: Vec<(usize, usize, f64)> = Vec::new();
    for (i, d) in dets.iter().enumerate() {
        for (j, g) in gts.iter().enumerate() {
            let v = iou(d, g);
            if v > 0.0 && v >= tau {
                candidates.push((i, j, v));
            }
        }
    }
    candidates.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
    let mut det_used = vec![false; dets.len()];
    let mut gt_used = vec![false; gts.len()];
    let mut pairs = Vec::new();
    for (i, j, v) in candidates {
        if !det_used[i] && !gt_used[j] {
            det_used[i] = true;
            gt_used[j] = true;
            pairs.push((i, j, v));
        }
    }
    let tp = pairs.len() as u64;
    FrameMatch {
        counts: EvalCounts {
            tp,
            fp: dets.len() as u64 - tp,
            fn_: gts.len() as u64 - tp,
        },
        pairs,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub counts: EvalCounts,
    pub precision: f64,
    pub recall: f64,
    /// Mean IoU over matched pairs only; 0 when nothing matched.
    pub mean_iou: f64,
    pub threshold: f64,
    pub curve: Vec<CurvePoint>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub tau: f64,
    pub precision: f64,
    pub recall: f64,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("IoU threshold must lie in (0, 1), got {tau}")))
    }
}

fn index_frames<'a>(records: &'a [Annotation], side: &str) -> Result<BTreeMap<u64, &'a [BoundingBox]>> {
    let mut map = BTreeMap::new();
    for r in records {
        if map.insert(r.frame_index, r.boxes.as_slice()).is_some() {
            return Err(Error::Input(format!(
                "{side} lists frame {} more than once",
                r.frame_index
            )));
        }
    }
    Ok(map)
}

/// Scores per-frame detections against ground truth. Frames present on only
/// one side are compared against an empty list.
pub fn evaluate(detections: &[Annotation], annotations: &[Annotation], tau: f64) -> Result<EvalReport> {
    check_tau(tau)?;
    let dets = index_frames(detections, "detections")?;
    let gts = index_frames(annotations, "annotations")?;
    let mut frames: Vec<u64> = dets.keys().chain(gts.keys()).copied().collect();
    frames.sort_unstable();
    frames.dedup();

    let mut counts = EvalCounts::default();
    let mut iou_sum = 0.0;
    let mut matched = 0usize;
    for frame in frames {
        let d = dets.get(&frame).copied().unwrap_or(&[]);
        let g = gts.get(&frame).copied().unwrap_or(&[]);
        let m = match_frame(d, g, tau);
        counts += m.counts;
        iou_sum += m.ious().sum::<f64>();
        matched += m.pairs.len();
    }
    let precision = counts.precision();
    let recall = counts.recall();
    Ok(EvalReport {
        counts,
        precision,
        recall,
        mean_iou: if matched > 0 { iou_sum / matched as f64 } else { 0.0 },
        threshold: tau,
        curve: vec![CurvePoint {
            tau,
            precision,
            recall,
        }],
    })
}

pub fn pr_curve(detections: &[Annotation], annotations: &[Annotation], taus: &[f64]) -> Result<Vec<CurvePoint>> {
    if let Some(w) = taus.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!(
            "thresholds must be strictly ascending: {} then {}",
            w[0], w[1]
        )));
    }
    taus.iter()
        .map(|&tau| {
            let r = evaluate(detections, annotations, tau)?;
            Ok(CurvePoint {
                tau,
                precision: r.precision,
                recall: r.recall,
            })
        })
        .collect()
}

/// Parses `start:stop:step` into an inclusive threshold list.
pub fn parse_tau_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Error::Input(format!("threshold range must be start:stop:step, got {spec:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(bad());
    }
    check_tau(start)?;
    check_tau(stop)?;
    let n = ((stop - start) / step + 1e-9).floor() + 1.0;
    if n > MAX_TAUS as f64 {
        return Err(Error::Input(format!("threshold range {spec:?} has more than {MAX_TAUS} points")));
    }
    let taus: Vec<f64> = (0..n as usize)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect();
    for &t in &taus {
        check_tau(t)?;
    }
    if taus.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Input(format!("threshold step in {spec:?} is below the 1e-9 resolution")));
    }
    Ok(taus)
}

pub fn default_taus() -> Vec<f64> {
    parse_tau_range("0.05:0.95:0.05").expect("valid literal")
}

pub fn curve_csv(points: &[CurvePoint]) -> String {
    let mut out = String::from("tau,precision,recall\n");
    for p in points {
        let _ = writeln!(out, "{:?},{:?},{:?}", p.tau, p.precision, p.recall);
    }
    out
}

pub fn summary_csv(report: &EvalReport) -> String {
    let c = report.counts;
    format!(
        "tp,fp,fn,precision,recall,mean_iou\n{},{},{},{:?},{:?},{:?}\n",
        c.tp, c.fp, c.fn_, report.precision, report.recall, report.mean_iou
    )
}
