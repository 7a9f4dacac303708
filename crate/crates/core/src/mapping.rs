//! LIDAR scans to a line-segment wall map.
//!
//! [`extract_segments`] clusters one scan and fits lines by split-and-merge,
//! [`merge_into_map`] folds new segments into the running map without
//! creating near-duplicates, and [`tidy`] straightens and joins segments so
//! the map stays readable for the operator.

use alloc::vec::Vec;

use crate::geometry::{Point, Pose2D, Segment2D};
use crate::math;
use crate::world::{check, ConfigError, LidarScan};

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    /// Consecutive hits further apart than this start a new cluster.
    pub d_break: f64,
    /// Maximum point deviation before a run is split.
    pub eps_split: f64,
    /// Clusters with fewer points are dropped.
    pub n_min: usize,
    pub theta_merge: f64,
    pub d_merge: f64,
    pub g_merge: f64,
    pub theta_snap: f64,
    pub g_close: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig {
            d_break: 0.3,
            eps_split: 0.03,
            n_min: 4,
            theta_merge: math::to_radians(10.0),
            d_merge: 0.08,
            g_merge: 0.2,
            theta_snap: math::to_radians(3.0),
            g_close: 0.1,
        }
    }
}

impl MapConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        check("d_break", self.d_break, self.d_break > 0.0)?;
        check("eps_split", self.eps_split, self.eps_split > 0.0)?;
        check("n_min", self.n_min as f64, self.n_min >= 2)?;
        check(
            "theta_merge",
            self.theta_merge,
            self.theta_merge > 0.0 && self.theta_merge < math::PI / 4.0,
        )?;
        check("d_merge", self.d_merge, self.d_merge > 0.0)?;
        check("g_merge", self.g_merge, self.g_merge >= 0.0)?;
        check(
            "theta_snap",
            self.theta_snap,
            self.theta_snap >= 0.0 && self.theta_snap < math::PI / 4.0,
        )?;
        check("g_close", self.g_close, self.g_close >= 0.0)?;
        Ok(())
    }
}

/// The published wall map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PerceivedMap {
    pub segments: Vec<Segment2D>,
    /// Bumped on every change to `segments`.
    pub version: u64,
}

/// Splits the scan's hit points into runs of neighbouring returns.
fn cluster(scan: &LidarScan, pose: &Pose2D, d_break: f64) -> Vec<Vec<Point>> {
    let pts = scan.points(pose);
    let beams = scan.ranges.len();
    let mut clusters: Vec<Vec<Point>> = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    let mut prev: Option<(usize, Point)> = None;
    for &(i, p) in &pts {
        if let Some((j, q)) = prev {
            if i != j + 1 || p.distance(q) > d_break {
                clusters.push(core::mem::take(&mut current));
            }
        }
        current.push(p);
        prev = Some((i, p));
    }
    if !current.is_empty() {
        clusters.push(current);
    }

    // A full sweep wraps around: join the last run onto the first when the
    // last and first beams are neighbours.
    let full_circle = (scan.angle_increment * beams as f64 - math::TAU).abs() < 1e-9;
    if full_circle && clusters.len() > 1 {
        let first_idx = pts.first().map(|p| p.0);
        let last = pts.last().copied();
        if let (Some(0), Some((li, lp))) = (first_idx, last) {
            if li == beams - 1 && lp.distance(pts[0].1) <= d_break {
                let tail = clusters.pop().unwrap_or_default();
                let mut head = tail;
                head.extend_from_slice(&clusters[0]);
                clusters[0] = head;
            }
        }
    }
    clusters
}

fn max_deviation(points: &[Point]) -> (usize, f64) {
    let a = points[0];
    let b = points[points.len() - 1];
    let mut best = (0, 0.0);
    for (k, p) in points.iter().enumerate().skip(1).take(points.len().saturating_sub(2)) {
        let d = crate::geometry::segment_distance(*p, *p, a, b);
        if d > best.1 {
            best = (k, d);
        }
    }
    best
}

/// Recursive split: index ranges (inclusive) whose points all lie within
/// `eps` of the chord joining the range ends.
fn split(points: &[Point], lo: usize, hi: usize, eps: f64, out: &mut Vec<(usize, usize)>) {
    let (k, dev) = max_deviation(&points[lo..=hi]);
    if dev > eps && hi - lo >= 2 {
        let mid = lo + k;
        split(points, lo, mid, eps, out);
        split(points, mid, hi, eps, out);
    } else {
        out.push((lo, hi));
    }
}

/// Total-least-squares line through `points`, clipped to their projected
/// extent. Falls back to the chord when the fit would leave a point further
/// than `eps` away.
fn fit(points: &[Point], eps: f64) -> Option<Segment2D> {
    let n = points.len() as f64;
    let c = points.iter().fold(Point::ORIGIN, |acc, p| acc + *p) * (1.0 / n);
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for p in points {
        let d = *p - c;
        sxx += d.x * d.x;
        syy += d.y * d.y;
        sxy += d.x * d.y;
    }
    let chord = Segment2D::new(points[0], points[points.len() - 1]).ok();
    let mut dir = Point::from_angle(0.5 * math::atan2(2.0 * sxy, sxx - syy));
    if let Some(ch) = &chord {
        if dir.dot(ch.direction()) < 0.0 {
            dir = -dir;
        }
    }
    let (mut tmin, mut tmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut worst: f64 = 0.0;
    for p in points {
        let d = *p - c;
        let t = d.dot(dir);
        tmin = tmin.min(t);
        tmax = tmax.max(t);
        worst = worst.max(dir.cross(d).abs());
    }
    if worst <= eps {
        if let Ok(s) = Segment2D::new(c + dir * tmin, c + dir * tmax) {
            return Some(s);
        }
    }
    chord
}

/// Fits line segments to one scan taken at `pose`.
pub fn extract_segments(scan: &LidarScan, pose: &Pose2D, config: &MapConfig) -> Vec<Segment2D> {
    let mut out = Vec::new();
    for pts in cluster(scan, pose, config.d_break) {
        if pts.len() < config.n_min || pts.len() < 2 {
            continue;
        }
        let mut ranges = Vec::new();
        split(&pts, 0, pts.len() - 1, config.eps_split, &mut ranges);

        // merge pass: fuse neighbours whose union still fits the chord
        let mut merged: Vec<(usize, usize)> = Vec::new();
        for r in ranges {
            if let Some(last) = merged.last_mut() {
                if last.1 == r.0 && max_deviation(&pts[last.0..=r.1]).1 <= config.eps_split {
                    last.1 = r.1;
                    continue;
                }
            }
            merged.push(r);
        }
        out.extend(merged.into_iter().filter_map(|(lo, hi)| fit(&pts[lo..=hi], config.eps_split)));
    }
    out
}

/// Undirected angle between two segments, in `[0, π/2]`.
fn angle_between(a: &Segment2D, b: &Segment2D) -> f64 {
    let d = (a.orientation() - b.orientation()).abs();
    d.min(math::PI - d)
}

enum MergeOutcome {
    Covered,
    Merged(Segment2D),
}

fn try_merge(existing: &Segment2D, new: &Segment2D, config: &MapConfig) -> Option<MergeOutcome> {
    if angle_between(existing, new) >= config.theta_merge {
        return None;
    }
    let (long, short) = if existing.length() >= new.length() { (existing, new) } else { (new, existing) };
    let gap = long.line_distance(short.p1()).max(long.line_distance(short.p2()));
    if gap >= config.d_merge {
        return None;
    }
    let (s0, s1) = {
        let (a, b) = (long.project(short.p1()), long.project(short.p2()));
        (a.min(b), a.max(b))
    };
    let along_gap = (s0 - long.length()).max(-s1).max(0.0);
    if along_gap >= config.g_merge {
        return None;
    }

    // New observation already inside the existing segment.
    let (n0, n1) = (existing.project(new.p1()), existing.project(new.p2()));
    let tol = 1e-9;
    let inside = |t: f64| t >= -tol && t <= existing.length() + tol;
    if inside(n0)
        && inside(n1)
        && existing.line_distance(new.p1()) < config.d_merge
        && existing.line_distance(new.p2()) < config.d_merge
    {
        return Some(MergeOutcome::Covered);
    }

    let (la, lb) = (existing.length(), new.length());
    let da = existing.direction();
    let mut db = new.direction();
    if da.dot(db) < 0.0 {
        db = -db;
    }
    let dir_sum = da * la + db * lb;
    let dir = dir_sum * (1.0 / dir_sum.norm());
    let pivot = (existing.midpoint() * la + new.midpoint() * lb) * (1.0 / (la + lb));
    let ts = [existing.p1(), existing.p2(), new.p1(), new.p2()].map(|p| (p - pivot).dot(dir));
    let tmin = ts.iter().copied().fold(f64::INFINITY, f64::min);
    let tmax = ts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Segment2D::new(pivot + dir * tmin, pivot + dir * tmax).ok().map(MergeOutcome::Merged)
}

/// Best merge partner: smallest perpendicular offset, then lowest index.
fn find_partner(segments: &[Segment2D], s: &Segment2D, config: &MapConfig) -> Option<(usize, MergeOutcome)> {
    let mut best: Option<(usize, f64, MergeOutcome)> = None;
    for (i, e) in segments.iter().enumerate() {
        if let Some(outcome) = try_merge(e, s, config) {
            let offset = e.line_distance(s.midpoint());
            if best.as_ref().is_none_or(|b| offset < b.1) {
                best = Some((i, offset, outcome));
            }
        }
    }
    best.map(|(i, _, o)| (i, o))
}

/// Folds `new_segments` into `map`. Each one either merges with its closest
/// compatible segment (repeatedly, while the merged result keeps finding
/// partners) or is appended. The version increases only if the segment list
/// actually changed.
pub fn merge_into_map(map: &PerceivedMap, new_segments: &[Segment2D], config: &MapConfig) -> PerceivedMap {
    let mut segments = map.segments.clone();
    for s in new_segments {
        let mut pending = *s;
        loop {
            match find_partner(&segments, &pending, config) {
                None => {
                    segments.push(pending);
                    break;
                }
                Some((_, MergeOutcome::Covered)) => break,
                Some((i, MergeOutcome::Merged(m))) => {
                    segments.remove(i);
                    pending = m;
                }
            }
        }
    }
    let version = if segments != map.segments { map.version + 1 } else { map.version };
    PerceivedMap { segments, version }
}

/// Dominant wall orientation: the modal segment orientation modulo 90°,
/// quantized to whole degrees. Ties go to the bin with more total length,
/// then to the smaller angle.
pub fn dominant_orientation(segments: &[Segment2D]) -> Option<u32> {
    if segments.is_empty() {
        return None;
    }
    let mut count = [0usize; 90];
    let mut length = [0.0f64; 90];
    for s in segments {
        let deg = math::to_degrees(s.orientation());
        let bin = (math::round(deg) as i64).rem_euclid(90) as usize;
        count[bin] += 1;
        length[bin] += s.length();
    }
    let mut best = 0usize;
    for b in 1..90 {
        if count[b] > count[best] || (count[b] == count[best] && length[b] > length[best]) {
            best = b;
        }
    }
    Some(best as u32)
}

fn align(s: &Segment2D, dominant_deg: u32, theta_snap: f64) -> Segment2D {
    let orient = math::to_degrees(s.orientation());
    let quarter = math::round((orient - dominant_deg as f64) / 90.0);
    let axis = dominant_deg as f64 + 90.0 * quarter;
    if math::to_radians((orient - axis).abs()) > theta_snap {
        return *s;
    }
    let base = math::to_radians(axis);
    let mut dir = Point::from_angle(base);
    if dir.dot(s.direction()) < 0.0 {
        dir = -dir;
    }
    let mid = s.midpoint();
    let half = s.length() / 2.0;
    Segment2D::new(mid - dir * half, mid + dir * half).unwrap_or(*s)
}

fn endpoint(s: &Segment2D, end: usize) -> Point {
    if end == 0 {
        s.p1()
    } else {
        s.p2()
    }
}

fn project_onto_line(s: &Segment2D, p: Point) -> Point {
    s.p1() + s.direction() * s.project(p)
}

fn with_endpoint(s: &Segment2D, end: usize, p: Point) -> Option<Segment2D> {
    let moved = if end == 0 { Segment2D::new(p, s.p2()) } else { Segment2D::new(s.p1(), p) };
    // moving an endpoint must not flip the segment
    moved.ok().filter(|m| m.direction().dot(s.direction()) > 0.0)
}

/// Where two nearby endpoints should meet: the crossing of the two carrier
/// lines when they cross close by, otherwise (parallel lines) the midpoint
/// projected back onto each line. Endpoints only ever slide along their own
/// line, so orientations are untouched.
fn closing_targets(sa: &Segment2D, a: Point, sb: &Segment2D, b: Point, g_close: f64) -> Option<(Point, Point)> {
    let (da, db) = (sa.direction(), sb.direction());
    let denom = da.cross(db);
    if denom.abs() > 1e-9 {
        let t = (sb.p1() - sa.p1()).cross(db) / denom;
        let x = sa.p1() + da * t;
        if x.distance(a) <= g_close && x.distance(b) <= g_close {
            Some((x, x))
        } else {
            None
        }
    } else {
        let m = a.midpoint(b);
        Some((project_onto_line(sa, m), project_onto_line(sb, m)))
    }
}

/// Straightens near-axis segments and closes small gaps between endpoints.
///
/// 1. Segments within `theta_snap` of the dominant orientation (or its
///    perpendicular) are rotated about their midpoint onto it.
/// 2. Endpoint pairs from different segments within `g_close` of each other
///    are joined, closest pairs first, each endpoint at most once.
///
/// Deterministic, and a fixed point after one application.
pub fn tidy(map: &PerceivedMap, config: &MapConfig) -> PerceivedMap {
    let Some(dominant) = dominant_orientation(&map.segments) else {
        return map.clone();
    };
    let mut segs: Vec<Segment2D> =
        map.segments.iter().map(|s| align(s, dominant, config.theta_snap)).collect();

    let mut pairs: Vec<(f64, usize, usize, usize, usize)> = Vec::new();
    for i in 0..segs.len() {
        for j in (i + 1)..segs.len() {
            for ei in 0..2 {
                for ej in 0..2 {
                    let d = endpoint(&segs[i], ei).distance(endpoint(&segs[j], ej));
                    if d <= config.g_close {
                        pairs.push((d, i, ei, j, ej));
                    }
                }
            }
        }
    }
    pairs.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then((a.1, a.2, a.3, a.4).cmp(&(b.1, b.2, b.3, b.4)))
    });

    let mut used = alloc::vec![[false; 2]; segs.len()];
    for (_, i, ei, j, ej) in pairs {
        if used[i][ei] || used[j][ej] {
            continue;
        }
        let (a, b) = (endpoint(&segs[i], ei), endpoint(&segs[j], ej));
        let Some((ta, tb)) = closing_targets(&segs[i], a, &segs[j], b, config.g_close) else {
            continue;
        };
        let (Some(na), Some(nb)) = (with_endpoint(&segs[i], ei, ta), with_endpoint(&segs[j], ej, tb)) else {
            continue;
        };
        segs[i] = na;
        segs[j] = nb;
        used[i][ei] = true;
        used[j][ej] = true;
    }
    PerceivedMap { segments: segs, version: map.version }
}
