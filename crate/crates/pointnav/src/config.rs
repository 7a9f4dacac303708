//! Command-line overrides for every controller setting. Angles are taken in
//! degrees and stored in radians; anything not given keeps its default.

use clap::Args;
use pointnav_core::ControllerConfig;

#[derive(Debug, Clone, Default, PartialEq, Args)]
pub struct Tuning {
    /// Seed for sensor noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, help_heading = "Simulation")]
    pub lidar_beams: Option<usize>,
    #[arg(long, help_heading = "Simulation")]
    pub lidar_max_range: Option<f64>,
    /// Range noise standard deviation, meters.
    #[arg(long, help_heading = "Simulation")]
    pub noise_sigma: Option<f64>,
    /// Degrees.
    #[arg(long, help_heading = "Simulation")]
    pub camera_half_angle: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub camera_range: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub robot_radius: Option<f64>,
    #[arg(long, help_heading = "Simulation")]
    pub v_max: Option<f64>,
    /// Radians per second.
    #[arg(long, help_heading = "Simulation")]
    pub omega_max: Option<f64>,
    /// Seconds per tick.
    #[arg(long, help_heading = "Simulation")]
    pub dt: Option<f64>,
    /// Ticks between sensor sweeps.
    #[arg(long, help_heading = "Simulation")]
    pub sensor_period: Option<u64>,

    #[arg(long, help_heading = "Mapping")]
    pub d_break: Option<f64>,
    #[arg(long, help_heading = "Mapping")]
    pub eps_split: Option<f64>,
    #[arg(long, help_heading = "Mapping")]
    pub n_min: Option<usize>,
    /// Degrees.
    #[arg(long, help_heading = "Mapping")]
    pub theta_merge: Option<f64>,
    #[arg(long, help_heading = "Mapping")]
    pub d_merge: Option<f64>,
    #[arg(long, help_heading = "Mapping")]
    pub g_merge: Option<f64>,
    /// Degrees.
    #[arg(long, help_heading = "Mapping")]
    pub theta_snap: Option<f64>,
    #[arg(long, help_heading = "Mapping")]
    pub g_close: Option<f64>,

    #[arg(long, help_heading = "Navigation")]
    pub resolution: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub goal_tol: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub lookahead: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub inflation_margin: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub goal_snap_radius: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub settle_tol: Option<f64>,
    /// Degrees.
    #[arg(long, help_heading = "Navigation")]
    pub turn_in_place: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub heading_gain: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub approach_gain: Option<f64>,
    #[arg(long, help_heading = "Navigation")]
    pub stall_ticks: Option<u64>,

    /// Seconds a pointer stays usable.
    #[arg(long, help_heading = "Language")]
    pub deixis_window: Option<f64>,
    #[arg(long, help_heading = "Language")]
    pub further_distance: Option<f64>,
    #[arg(long, help_heading = "Language")]
    pub that_one_radius: Option<f64>,
    #[arg(long, help_heading = "Language")]
    pub lateral_deadband: Option<f64>,
}

fn set<T: Copy>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn set_deg(slot: &mut f64, value: Option<f64>) {
    set(slot, value.map(f64::to_radians));
}

impl Tuning {
    /// Defaults with these overrides applied, checked against each module's limits.
    pub fn resolve(&self) -> anyhow::Result<ControllerConfig> {
        let mut c = ControllerConfig { seed: self.seed, ..ControllerConfig::default() };
        let s = &mut c.sim;
        set(&mut s.lidar_beams, self.lidar_beams);
        set(&mut s.lidar_max_range, self.lidar_max_range);
        set(&mut s.lidar_noise_sigma, self.noise_sigma);
        set_deg(&mut s.camera_half_angle, self.camera_half_angle);
        set(&mut s.camera_range, self.camera_range);
        set(&mut s.robot_radius, self.robot_radius);
        set(&mut s.v_max, self.v_max);
        set(&mut s.omega_max, self.omega_max);
        set(&mut s.dt, self.dt);
        set(&mut s.sensor_period, self.sensor_period);
        let m = &mut c.map;
        set(&mut m.d_break, self.d_break);
        set(&mut m.eps_split, self.eps_split);
        set(&mut m.n_min, self.n_min);
        set_deg(&mut m.theta_merge, self.theta_merge);
        set(&mut m.d_merge, self.d_merge);
        set(&mut m.g_merge, self.g_merge);
        set_deg(&mut m.theta_snap, self.theta_snap);
        set(&mut m.g_close, self.g_close);
        let n = &mut c.nav;
        set(&mut n.resolution, self.resolution);
        set(&mut n.goal_tol, self.goal_tol);
        set(&mut n.lookahead, self.lookahead);
        set(&mut n.inflation_margin, self.inflation_margin);
        set(&mut n.goal_snap_radius, self.goal_snap_radius);
        set(&mut n.settle_tol, self.settle_tol);
        set_deg(&mut n.turn_in_place, self.turn_in_place);
        set(&mut n.heading_gain, self.heading_gain);
        set(&mut n.approach_gain, self.approach_gain);
        set(&mut n.stall_ticks, self.stall_ticks);
        let l = &mut c.language;
        set(&mut l.deixis_window, self.deixis_window);
        set(&mut l.further_distance, self.further_distance);
        set(&mut l.that_one_radius, self.that_one_radius);
        set(&mut l.lateral_deadband, self.lateral_deadband);
        c.validate().map_err(|e| anyhow::anyhow!("invalid settings: {e}"))?;
        Ok(c)
    }
}
