use std::f64::consts::PI;

use pointnav_core::command::{emit_feedback, Command, FeedbackEvent, QueueState, TurnDirection};
use pointnav_core::geometry::{display_to_ros, ros_to_display, segment_to_box, Point, Pose2D, Segment2D};
use pointnav_core::language::{self, AbstractCommand, Grounded, GroundingContext, LanguageConfig, Side};
use pointnav_core::mapping::{extract_segments, merge_into_map, tidy, MapConfig, PerceivedMap};
use pointnav_core::navigation::{patrol_waypoints, plan_cells, CellState, OccupancyGrid};
use pointnav_core::world::{self, Bounds, Fiducial, FiducialObservation, RobotState, SimConfig, WorldSpec};
use proptest::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;

fn coord() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn point() -> impl Strategy<Value = Point> {
    (coord(), coord()).prop_map(|(x, y)| Point::new(x, y))
}

fn segment() -> impl Strategy<Value = Segment2D> {
    (point(), point())
        .prop_filter("non-degenerate", |(a, b)| a.distance(*b) > 1e-3)
        .prop_map(|(a, b)| Segment2D::new(a, b).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn display_round_trip(p in point()) {
        let back = display_to_ros(ros_to_display(p));
        prop_assert!((back.x - p.x).abs() < 1e-12 && (back.y - p.y).abs() < 1e-12);
    }

    #[test]
    fn display_is_an_isometry(p in point(), q in point()) {
        let (dp, dq) = (ros_to_display(p), ros_to_display(q));
        let d = ((dp.x - dq.x).powi(2) + (dp.z - dq.z).powi(2)).sqrt();
        prop_assert!((d - p.distance(q)).abs() < 1e-9);
    }

    #[test]
    fn box_reconstructs_segment(s in segment()) {
        let b = segment_to_box(&s);
        prop_assert!((b.length - s.length()).abs() < 1e-9);
        prop_assert!(b.yaw >= -PI / 2.0 - 1e-12 && b.yaw <= PI / 2.0 + 1e-12);
        // the long axis of a box with yaw ψ about the up axis runs along (cos ψ, −sin ψ) in XZ
        let (ux, uz) = (b.yaw.cos(), -b.yaw.sin());
        let half = b.length / 2.0;
        let e1 = display_to_ros(pointnav_core::DisplayPoint::new(b.center.x + ux * half, b.center.z + uz * half));
        let e2 = display_to_ros(pointnav_core::DisplayPoint::new(b.center.x - ux * half, b.center.z - uz * half));
        let straight = e1.distance(s.p1()).max(e2.distance(s.p2()));
        let swapped = e1.distance(s.p2()).max(e2.distance(s.p1()));
        prop_assert!(straight.min(swapped) < 1e-6, "{straight} {swapped}");
    }

    #[test]
    fn box_ignores_endpoint_order_except_yaw_sign(s in segment()) {
        let (a, b) = (segment_to_box(&s), segment_to_box(&s.reversed()));
        prop_assert!((a.length - b.length).abs() < 1e-12);
        prop_assert!((a.center.x - b.center.x).abs() < 1e-12 && (a.center.z - b.center.z).abs() < 1e-12);
        prop_assert!((a.yaw.abs() - b.yaw.abs()).abs() < 1e-9);
    }
}

fn square_world(half: f64) -> WorldSpec {
    let h = half;
    let s = |a, b, c, d| Segment2D::from_coords(a, b, c, d).unwrap();
    WorldSpec {
        walls: vec![s(-h, -h, h, -h), s(h, -h, h, h), s(h, h, -h, h), s(-h, h, -h, -h)],
        fiducials: vec![],
        robot_start: Pose2D::default(),
        bounds: Bounds::new(-h - 1.0, -h - 1.0, h + 1.0, h + 1.0),
    }
}

fn clearance_to_walls(world: &WorldSpec, p: Point) -> f64 {
    world.walls.iter().map(|w| w.distance_to_point(p)).fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zero_command_is_identity(x in -1.0..1.0f64, y in -1.0..1.0f64, th in -3.0..3.0f64) {
        let world = square_world(2.0);
        let state = RobotState::at(Pose2D::new(x, y, th));
        let next = world::step(&world, &state, (0.0, 0.0), 0.05, &SimConfig::default());
        prop_assert_eq!(next.pose, state.pose);
    }

    #[test]
    fn robot_never_enters_walls(
        cmds in prop::collection::vec((-0.5..0.5f64, -3.0..3.0f64), 1..400),
        inner in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64, -1.5..1.5f64), 0..4),
    ) {
        let cfg = SimConfig::default();
        let mut world = square_world(2.0);
        for (a, b, c, d) in inner {
            if let Ok(s) = Segment2D::from_coords(a, b, c, d) {
                if s.distance_to_point(Point::ORIGIN) > 0.3 {
                    world.walls.push(s);
                }
            }
        }
        let mut state = RobotState::at(Pose2D::default());
        for c in cmds {
            state = world::step(&world, &state, c, cfg.dt, &cfg);
            prop_assert!(clearance_to_walls(&world, state.pose.position()) >= cfg.robot_radius - 1e-9);
        }
    }

    #[test]
    fn fiducials_are_reported_once(path in prop::collection::vec((0.0..0.22f64, -2.84..2.84f64), 1..200)) {
        let cfg = SimConfig::default();
        let mut world = square_world(2.0);
        for (id, (x, y)) in [(1.2, 0.3), (-1.0, 1.0), (0.5, -1.5), (-1.5, -1.5)].into_iter().enumerate() {
            world.fiducials.push(Fiducial { id: id as u32, pose: Pose2D::new(x, y, 0.0) });
        }
        let mut state = RobotState::at(Pose2D::default());
        let mut reported = std::collections::BTreeSet::new();
        for c in path {
            state = world::step(&world, &state, c, cfg.dt, &cfg);
            let before = state.seen_fiducials.clone();
            for f in world::detect_fiducials(&world, &mut state, &cfg) {
                prop_assert!(!before.contains(&f.id));
                prop_assert!(reported.insert(f.id));
            }
            prop_assert!(before.is_subset(&state.seen_fiducials));
        }
    }
}

/// Independent clustering: runs of consecutive returns closer than `d_break`.
fn clusters(points: &[(usize, Point)], beams: usize, d_break: f64) -> Vec<Vec<Point>> {
    let mut runs: Vec<Vec<(usize, Point)>> = Vec::new();
    for &(i, p) in points {
        match runs.last_mut() {
            Some(run) if run.last().is_some_and(|&(j, q)| j + 1 == i && q.distance(p) <= d_break) => run.push((i, p)),
            _ => runs.push(vec![(i, p)]),
        }
    }
    if runs.len() > 1 {
        let (first, last) = (runs[0][0], *runs.last().unwrap().last().unwrap());
        if first.0 == 0 && last.0 == beams - 1 && first.1.distance(last.1) <= d_break {
            let head = runs.remove(0);
            runs.last_mut().unwrap().extend(head);
        }
    }
    runs.into_iter().map(|r| r.into_iter().map(|(_, p)| p).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn extracted_segments_cover_their_points(
        w in 1.0..3.0f64, h in 1.0..3.0f64, fx in 0.2..0.8f64, fy in 0.2..0.8f64, th in -3.1..3.1f64,
        boxes in prop::collection::vec((0.1..0.9f64, 0.1..0.9f64, 0.1..0.4f64), 0..3),
    ) {
        let s = |a, b, c, d| Segment2D::from_coords(a, b, c, d).unwrap();
        let mut walls = vec![s(0.0, 0.0, w, 0.0), s(w, 0.0, w, h), s(w, h, 0.0, h), s(0.0, h, 0.0, 0.0)];
        let pose = Pose2D::new(fx * w, fy * h, th);
        for (bx, by, r) in boxes {
            let c = Point::new(bx * w, by * h);
            if c.distance(pose.position()) > r * 1.5 + 0.2 {
                walls.push(s(c.x - r, c.y, c.x + r, c.y));
            }
        }
        let world = WorldSpec { walls, fiducials: vec![], robot_start: pose, bounds: Bounds::new(-1.0, -1.0, w + 1.0, h + 1.0) };
        let cfg = MapConfig::default();
        let sim = SimConfig::default();
        let scan = world::scan(&world, &pose, &sim, 0, &mut ChaCha8Rng::seed_from_u64(0));
        let segs = extract_segments(&scan, &pose, &cfg);
        let pts = scan.points(&pose);
        for run in clusters(&pts, scan.ranges.len(), cfg.d_break) {
            if run.len() < cfg.n_min {
                continue;
            }
            for p in run {
                let d = segs.iter().map(|s| s.distance_to_point(p)).fold(f64::INFINITY, f64::min);
                prop_assert!(d <= cfg.eps_split + 1e-9, "point {p:?} is {d} from every segment");
            }
        }
    }

    #[test]
    fn merge_is_order_insensitive_for_separated_segments(
        cells in prop::collection::btree_set((0i32..6, 0i32..6), 1..12),
        angles in prop::collection::vec(0.0..PI, 12),
        order in prop::collection::vec(any::<u32>(), 12),
    ) {
        // one short segment per 2 m cell keeps every pair far out of merge range
        let segs: Vec<Segment2D> = cells.iter().zip(&angles).map(|(&(i, j), &a)| {
            let c = Point::new(2.0 * i as f64, 2.0 * j as f64);
            let d = Point::from_angle(a) * 0.4;
            Segment2D::new(c - d, c + d).unwrap()
        }).collect();
        let mut shuffled: Vec<(u32, Segment2D)> = order.iter().copied().zip(segs.iter().copied()).collect();
        shuffled.sort_by_key(|(k, _)| *k);
        let shuffled: Vec<Segment2D> = shuffled.into_iter().map(|(_, s)| s).collect();
        let cfg = MapConfig::default();
        let a = merge_into_map(&PerceivedMap::default(), &segs, &cfg);
        let b = merge_into_map(&PerceivedMap::default(), &shuffled, &cfg);
        let key = |m: &PerceivedMap| {
            let mut v: Vec<[u64; 4]> = m.segments.iter().map(|s| {
                [s.p1().x.to_bits(), s.p1().y.to_bits(), s.p2().x.to_bits(), s.p2().y.to_bits()]
            }).collect();
            v.sort();
            v
        };
        prop_assert_eq!(key(&a), key(&b));
        prop_assert_eq!(a.segments.len(), segs.len());
    }

    #[test]
    fn tidy_is_idempotent_and_bounded(segs in prop::collection::vec(
        (-3.0..3.0f64, -3.0..3.0f64, 0.2..2.0f64, prop_oneof![
            -0.06..0.06f64,
            (PI / 2.0 - 0.06)..(PI / 2.0 + 0.06),
            0.0..PI,
        ]),
        1..15,
    )) {
        let segments: Vec<Segment2D> = segs.iter().map(|&(x, y, len, a)| {
            let p = Point::new(x, y);
            Segment2D::new(p, p + Point::from_angle(a) * len).unwrap()
        }).collect();
        let cfg = MapConfig::default();
        let map = PerceivedMap { segments, version: 3 };
        let once = tidy(&map, &cfg);
        let twice = tidy(&once, &cfg);
        prop_assert_eq!(once.version, map.version);
        prop_assert_eq!(once.segments.len(), twice.segments.len());
        for (a, b) in once.segments.iter().zip(&twice.segments) {
            prop_assert!(a.p1().distance(b.p1()) < 1e-9 && a.p2().distance(b.p2()) < 1e-9, "{a:?} -> {b:?}");
        }
        for (orig, t) in map.segments.iter().zip(&once.segments) {
            // rotating about the midpoint by θ_snap moves an end by at most 2·(L/2)·sin(θ_snap/2)
            let bound = orig.length() * (cfg.theta_snap / 2.0).sin() + cfg.g_close + 1e-9;
            prop_assert!(orig.p1().distance(t.p1()) <= bound);
            prop_assert!(orig.p2().distance(t.p2()) <= bound);
        }
    }
}

fn rotate_grid(g: &OccupancyGrid) -> OccupancyGrid {
    // (i, j) -> (H-1-j, i): a quarter turn counter-clockwise
    let (w, h) = (g.width(), g.height());
    let mut cells = vec![CellState::Free; w * h];
    for j in 0..h {
        for i in 0..w {
            let (ni, nj) = (h - 1 - j, i);
            cells[nj * h + ni] = g.get((i, j));
        }
    }
    OccupancyGrid::from_cells(Point::ORIGIN, g.resolution(), h, w, cells)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn plan_cost_survives_quarter_turn(
        w in 5usize..30, h in 5usize..30,
        blocked in prop::collection::vec(any::<bool>(), 900),
        density in 0u32..4,
        s in (0usize..30, 0usize..30), t in (0usize..30, 0usize..30),
    ) {
        let mut cells = vec![CellState::Free; w * h];
        for (k, c) in cells.iter_mut().enumerate() {
            // roughly density/8 of the cells
            if blocked[k] && blocked[(k * 7 + 3) % 900] && (k as u32 % 4) < density {
                *c = CellState::Occupied;
            }
        }
        let (s, t) = ((s.0 % w, s.1 % h), (t.0 % w, t.1 % h));
        cells[s.1 * w + s.0] = CellState::Free;
        cells[t.1 * w + t.0] = CellState::Free;
        let g = OccupancyGrid::from_cells(Point::ORIGIN, 0.05, w, h, cells);
        let r = rotate_grid(&g);
        let rot = |c: (usize, usize)| (h - 1 - c.1, c.0);
        match (plan_cells(&g, s, t), plan_cells(&r, rot(s), rot(t))) {
            (Ok(a), Ok(b)) => {
                prop_assert!((a.length() - b.length()).abs() < 1e-9);
                for p in a.cells.iter() {
                    prop_assert!(g.is_free(*p));
                }
                for win in a.cells.windows(2) {
                    let (dx, dy) = (win[0].0.abs_diff(win[1].0), win[0].1.abs_diff(win[1].1));
                    prop_assert!(dx <= 1 && dy <= 1 && dx + dy > 0);
                }
                prop_assert_eq!(a.cells[0], s);
                prop_assert_eq!(*a.cells.last().unwrap(), t);
            }
            (Err(_), Err(_)) => {}
            (a, b) => prop_assert!(false, "one side found a path: {:?} vs {:?}", a.is_ok(), b.is_ok()),
        }
    }

    #[test]
    fn patrol_rings_are_regular(s in 3u32..24, r in 0.1..5.0f64, i in 0.1..3.0f64, rings in 1usize..5,
                                x in -5.0..5.0f64, y in -5.0..5.0f64, th in -3.0..3.0f64) {
        let origin = Pose2D::new(x, y, th);
        let pts = patrol_waypoints(s, r, i, &origin, rings);
        prop_assert_eq!(pts.len(), s as usize * rings);
        for (k, ring) in pts.chunks(s as usize).enumerate() {
            let radius = r + k as f64 * i;
            for (j, p) in ring.iter().enumerate() {
                prop_assert!((p.distance(origin.position()) - radius).abs() < 1e-9);
                let next = ring[(j + 1) % ring.len()];
                let (a, b) = (*p - origin.position(), next - origin.position());
                let subtended = a.cross(b).atan2(a.dot(b)).rem_euclid(2.0 * PI);
                prop_assert!((subtended - 2.0 * PI / s as f64).abs() < 1e-9);
            }
        }
    }
}

fn command() -> impl Strategy<Value = Command> {
    prop_oneof![
        (1e-3..100.0f64).prop_map(|distance| Command::Forward { distance }),
        (-100.0..100.0f64, -100.0..100.0f64).prop_map(|(x, y)| Command::GoTo { x, y }),
        (any::<bool>(), 1e-3..=360.0f64).prop_map(|(l, degrees)| Command::Turn {
            direction: if l { TurnDirection::Left } else { TurnDirection::Right },
            degrees,
        }),
        (3u32..64, 1e-3..20.0f64, 1e-3..20.0f64).prop_map(|(sides, radius, increment)| Command::Patrol {
            sides,
            radius,
            increment,
        }),
        Just(Command::Stop),
        Just(Command::Continue),
        Just(Command::Cancel),
        Just(Command::CancelAll),
        Just(Command::GoBack),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn parse_inverts_render(c in command()) {
        prop_assert_eq!(language::parse(&language::render(&c)), Ok(AbstractCommand::Command(c)));
    }

    #[test]
    fn parse_ignores_case(c in command()) {
        let upper = language::render(&c).to_uppercase();
        prop_assert_eq!(language::parse(&upper), Ok(AbstractCommand::Command(c)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn ordinal_grounding_is_rigid_motion_covariant(
        fids in prop::collection::vec((-4.0..4.0f64, -4.0..4.0f64), 1..8),
        rank in 1usize..4, left in any::<bool>(),
        tx in -10.0..10.0f64, ty in -10.0..10.0f64, rot in -PI..PI,
    ) {
        let side = if left { Side::Left } else { Side::Right };
        let obs: Vec<FiducialObservation> = fids.iter().enumerate()
            .map(|(k, &(x, y))| FiducialObservation { id: k as u32, pose: Pose2D::new(x, y, 0.0) })
            .collect();
        // keep clear of the lateral deadband and of ties, where rounding could flip the answer
        let cfg = LanguageConfig::default();
        prop_assume!(obs.iter().all(|f| (f.pose.y.abs() - cfg.lateral_deadband).abs() > 1e-6 && f.pose.x.abs() > 1e-6));
        let moved = Pose2D::new(tx, ty, rot);
        let moved_obs: Vec<FiducialObservation> = obs.iter().map(|f| {
            let p = moved.to_world(f.pose.position());
            FiducialObservation { id: f.id, pose: Pose2D::new(p.x, p.y, rot) }
        }).collect();
        let abs = AbstractCommand::GoToOrdinal { rank, side };
        let pick = |ctx: &GroundingContext, all: &[FiducialObservation]| {
            language::ground(&abs, ctx, &cfg).ok().map(|g| match g {
                Grounded::Command(Command::GoTo { x, y }) => all.iter()
                    .find(|f| (f.pose.x - x).abs() < 1e-12 && (f.pose.y - y).abs() < 1e-12)
                    .map(|f| f.id),
                _ => None,
            })
        };
        let base = GroundingContext { robot_pose: Pose2D::default(), fiducials: obs.clone(), recent_pointer: None };
        let shifted = GroundingContext { robot_pose: moved, fiducials: moved_obs.clone(), recent_pointer: None };
        prop_assert_eq!(pick(&base, &obs), pick(&shifted, &moved_obs));
    }

    #[test]
    fn looking_for_path_follows_enqueue_order(targets in prop::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 1..30),
                                              cancels in prop::collection::vec(any::<bool>(), 30)) {
        let mut q = QueueState::new();
        let pose = Pose2D::default();
        let mut announced = Vec::new();
        let collect = |evs: Vec<FeedbackEvent>, out: &mut Vec<Point>| {
            for e in evs {
                if let FeedbackEvent::LookingForPath(p) = e {
                    out.push(p);
                }
                let _ = emit_feedback(&e, 0);
            }
        };
        for &(x, y) in &targets {
            collect(q.enqueue(Command::GoTo { x, y }, pose).unwrap(), &mut announced);
        }
        for &c in cancels.iter().take(targets.len()) {
            let evs = if c { q.apply_flow(Command::Cancel, pose).unwrap() } else { q.complete_current(pose) };
            collect(evs, &mut announced);
        }
        let expected: Vec<Point> = targets.iter().map(|&(x, y)| Point::new(x, y)).collect();
        prop_assert_eq!(announced, expected);
        prop_assert!(q.is_idle());
    }
}
