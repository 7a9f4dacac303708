//! Plain-text world description, one directive per line:
//!
//! ```text
//! # comment
//! bounds -1 -2 6 2        # xmin ymin xmax ymax, optional
//! wall 0 -1 5 -1          # x1 y1 x2 y2
//! fiducial 3 2.0 -0.5 1.57
//! start 0 0 0             # x y theta, required once
//! ```
//!
//! Without `bounds`, the walls, fiducials and start are enclosed with a 1 m margin.

use std::fmt::Write as _;
use std::path::Path;

use pointnav_core::world::{Bounds, Fiducial};
use pointnav_core::{Point, Pose2D, Segment2D, WorldSpec};

const MARGIN: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct WorldFileError {
    /// 1-based; 0 when the problem is with the file as a whole.
    pub line: usize,
    pub message: String,
}

fn err(line: usize, message: impl Into<String>) -> WorldFileError {
    WorldFileError { line, message: message.into() }
}

pub(crate) fn numbers<const N: usize>(line: usize, what: &str, args: &[&str]) -> Result<[f64; N], WorldFileError> {
    if args.len() != N {
        return Err(err(line, format!("{what} takes {N} numbers, found {}", args.len())));
    }
    let mut out = [0.0; N];
    for (slot, a) in out.iter_mut().zip(args) {
        *slot = a
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(line, format!("{a:?} is not a finite number")))?;
    }
    Ok(out)
}

/// Tokens of a line with any trailing comment removed.
pub(crate) fn tokens(raw: &str) -> Vec<&str> {
    raw.split('#').next().unwrap_or("").split_whitespace().collect()
}

pub fn parse(text: &str) -> Result<WorldSpec, WorldFileError> {
    let mut walls = Vec::new();
    let mut fiducials: Vec<Fiducial> = Vec::new();
    let mut start = None;
    let mut bounds = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let toks = tokens(raw);
        let Some((&word, args)) = toks.split_first() else { continue };
        match word {
            "wall" => {
                let [a1, b1, a2, b2] = numbers(line, "wall", args)?;
                let wall = Segment2D::from_coords(a1, b1, a2, b2).map_err(|e| err(line, format!("bad wall: {e}")))?;
                walls.push(wall);
            }
            "fiducial" => {
                let [id, x, y, theta] = numbers(line, "fiducial", args)?;
                if id < 0.0 || id.fract() != 0.0 || id > u32::MAX as f64 {
                    return Err(err(line, format!("fiducial id {} is not a non-negative integer", args[0])));
                }
                let id = id as u32;
                if fiducials.iter().any(|f| f.id == id) {
                    return Err(err(line, format!("fiducial id {id} appears twice")));
                }
                fiducials.push(Fiducial { id, pose: Pose2D::new(x, y, theta) });
            }
            "start" => {
                if start.is_some() {
                    return Err(err(line, "start given twice"));
                }
                let [x, y, theta] = numbers(line, "start", args)?;
                start = Some(Pose2D::new(x, y, theta));
            }
            "bounds" => {
                if bounds.is_some() {
                    return Err(err(line, "bounds given twice"));
                }
                let [x0, y0, x1, y1] = numbers(line, "bounds", args)?;
                if !(x1 > x0 && y1 > y0) {
                    return Err(err(line, "bounds need xmin < xmax and ymin < ymax"));
                }
                bounds = Some(Bounds::new(x0, y0, x1, y1));
            }
            other => return Err(err(line, format!("unknown directive {other:?}"))),
        }
    }
    let start = start.ok_or_else(|| err(0, "no start pose"))?;
    let bounds = bounds.unwrap_or_else(|| {
        let pts = walls
            .iter()
            .flat_map(|w: &Segment2D| [w.p1(), w.p2()])
            .chain(fiducials.iter().map(|f| f.pose.position()))
            .chain([start.position()]);
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for p in pts {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Bounds::new(lo.x - MARGIN, lo.y - MARGIN, hi.x + MARGIN, hi.y + MARGIN)
    });
    Ok(WorldSpec { walls, fiducials, robot_start: start, bounds })
}

pub fn load(path: &Path) -> Result<WorldSpec, anyhow::Error> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}

/// Writes `world` back in the same format.
pub fn render(world: &WorldSpec) -> String {
    let mut out = String::new();
    let b = &world.bounds;
    let _ = writeln!(out, "bounds {} {} {} {}", b.min.x, b.min.y, b.max.x, b.max.y);
    for w in &world.walls {
        let _ = writeln!(out, "wall {} {} {} {}", w.p1().x, w.p1().y, w.p2().x, w.p2().y);
    }
    for f in &world.fiducials {
        let _ = writeln!(out, "fiducial {} {} {} {}", f.id, f.pose.x, f.pose.y, f.pose.theta);
    }
    let s = world.robot_start;
    let _ = writeln!(out, "start {} {} {}", s.x, s.y, s.theta);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_bounds_enclose_everything() {
        let w = parse("wall 0 0 4 0\nfiducial 1 2 1 0\nstart 1 0.5 0\n").unwrap();
        assert_eq!(w.bounds, Bounds::new(-1.0, -1.0, 5.0, 2.0));
        assert_eq!(w.fiducials[0].id, 1);
    }

    #[test]
    fn errors_name_the_line() {
        let cases = [
            ("start 0 0 0\nwall 0 0 1\n", 2, "4 numbers"),
            ("start 0 0 0\n\nfloor 1\n", 3, "unknown directive"),
            ("start 0 0 x\n", 1, "not a finite"),
            ("start 0 0 0\nfiducial 1 0 1 0\nfiducial 1 2 1 0\n", 3, "twice"),
            ("start 0 0 0\nfiducial -2 0 1 0\n", 2, "non-negative"),
            ("start 0 0 0\nbounds 1 0 0 1\n", 2, "xmin < xmax"),
            ("wall 0 0 1 0\n", 0, "no start"),
            ("start 0 0 0\nwall 1 1 1 1\n", 2, "bad wall"),
        ];
        for (text, line, needle) in cases {
            let e = parse(text).unwrap_err();
            assert_eq!(e.line, line, "{text:?}: {e}");
            assert!(e.message.contains(needle), "{text:?}: {e}");
        }
    }

    #[test]
    fn comments_and_blank_lines() {
        let w = parse("# room\n\nstart 0 0 0 # here\n").unwrap();
        assert!(w.walls.is_empty());
    }

    #[test]
    fn render_parses_back() {
        let w = parse("bounds -2 -2 2 2\nwall -1 1 1 1\nfiducial 7 0 1.5 -1.5\nstart 0 0 0.25\n").unwrap();
        assert_eq!(parse(&render(&w)).unwrap(), w);
    }
}
