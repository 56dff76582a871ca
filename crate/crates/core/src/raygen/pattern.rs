use serde::{Deserialize, Serialize};

use crate::error::RayError;
use crate::Vec3;

/// Simulated LiDAR layout.
///
/// Downward channels are placed so that their ground-plane intersections are
/// `ground_spacing` apart between `r_min` and `r_max`; the listed upper elevations
/// are added on top.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarPatternConfig {
    /// Meters above the ground plane.
    pub sensor_height: f64,
    pub azimuth_count: usize,
    pub ground_spacing: f64,
    pub r_min: f64,
    pub r_max: f64,
    /// Radians.
    pub upper_elevations: Vec<f64>,
}

impl Default for LidarPatternConfig {
    fn default() -> Self {
        Self {
            sensor_height: 2.0,
            azimuth_count: 360,
            ground_spacing: 1.0,
            r_min: 1.0,
            r_max: 40.0,
            upper_elevations: (0..=10).map(|deg| (deg as f64).to_radians()).collect(),
        }
    }
}

impl LidarPatternConfig {
    pub fn validate(&self) -> Result<(), RayError> {
        let bad = |msg: &str| Err(RayError::Config(msg.to_string()));
        if !(self.sensor_height > 0.0 && self.sensor_height.is_finite()) {
            return bad("sensor_height must be positive");
        }
        if !(self.r_min > 0.0 && self.r_min < self.r_max && self.r_max.is_finite()) {
            return bad("need 0 < r_min < r_max");
        }
        if !(self.ground_spacing > 0.0 && self.ground_spacing.is_finite()) {
            return bad("ground_spacing must be positive");
        }
        if self.azimuth_count == 0 {
            return bad("azimuth_count must be at least 1");
        }
        if !self.upper_elevations.iter().all(|e| e.is_finite()) {
            return bad("upper elevations must be finite");
        }
        Ok(())
    }

    /// Ground ranges `r_min, r_min + dr, ...` not exceeding `r_max`.
    pub fn ground_ranges(&self) -> Vec<f64> {
        let slack = 1e-9 * self.r_max;
        (0..)
            .map(|i| self.r_min + i as f64 * self.ground_spacing)
            .take_while(|&r| r <= self.r_max + slack)
            .collect()
    }
}

/// Elevation angles (radians, ascending, deduplicated) of all channels.
pub fn elevation_channels(config: &LidarPatternConfig) -> Result<Vec<f64>, RayError> {
    config.validate()?;
    let mut channels: Vec<f64> = config
        .ground_ranges()
        .into_iter()
        .map(|r| -(config.sensor_height / r).atan())
        .chain(config.upper_elevations.iter().copied())
        .collect();
    channels.sort_by(f64::total_cmp);
    channels.dedup();
    Ok(channels)
}

/// Unit directions, elevation-major; azimuth 0 is +x, increasing counterclockwise.
pub fn lidar_pattern(config: &LidarPatternConfig) -> Result<Vec<Vec3>, RayError> {
    let channels = elevation_channels(config)?;
    let n = config.azimuth_count;
    let mut dirs = Vec::with_capacity(channels.len() * n);
    for &theta in &channels {
        let (sin_t, cos_t) = theta.sin_cos();
        for j in 0..n {
            let phi = std::f64::consts::TAU * j as f64 / n as f64;
            let (sin_p, cos_p) = phi.sin_cos();
            dirs.push(Vec3::new(cos_t * cos_p, cos_t * sin_p, sin_t));
        }
    }
    Ok(dirs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn config(h: f64, dr: f64, r_min: f64, r_max: f64) -> LidarPatternConfig {
        LidarPatternConfig {
            sensor_height: h,
            azimuth_count: 4,
            ground_spacing: dr,
            r_min,
            r_max,
            upper_elevations: vec![],
        }
    }

    #[test]
    fn channel_examples() {
        let ch = elevation_channels(&config(2.0, 1.0, 1.0, 4.0)).unwrap();
        let expect = [
            -(2.0f64).atan(),
            -(1.0f64).atan(),
            -(2.0f64 / 3.0).atan(),
            -(0.5f64).atan(),
        ];
        assert_eq!(ch, expect);
        let single = elevation_channels(&config(2.0, 1.0, 1.0, 1.5)).unwrap();
        assert_eq!(single, vec![-(2.0f64).atan()]);
    }

    #[test]
    fn default_pattern_size() {
        let cfg = LidarPatternConfig::default();
        let channels = elevation_channels(&cfg).unwrap();
        assert_eq!(channels.len(), 40 + 11);
        assert_eq!(lidar_pattern(&cfg).unwrap().len(), 360 * 51);
    }

    #[test]
    fn four_azimuths_on_the_horizon() {
        let mut cfg = config(2.0, 1.0, 1.0, 1.5);
        cfg.r_min = 1.0;
        let ch = elevation_channels(&cfg).unwrap();
        assert_eq!(ch.len(), 1);
        let horizon = LidarPatternConfig {
            upper_elevations: vec![0.0],
            ..cfg
        };
        // -atan(2) channel + horizon channel
        let dirs = lidar_pattern(&horizon).unwrap();
        let flat: Vec<_> = dirs.iter().filter(|d| d.z == 0.0).collect();
        let expect = [Vec3::x(), Vec3::y(), -Vec3::x(), -Vec3::y()];
        assert_eq!(flat.len(), 4);
        for (d, e) in flat.iter().zip(expect) {
            assert!((*d - e).norm() < 1e-15);
        }
    }

    #[test]
    fn invalid_configs() {
        assert!(elevation_channels(&config(0.0, 1.0, 1.0, 4.0)).is_err());
        assert!(elevation_channels(&config(2.0, 0.0, 1.0, 4.0)).is_err());
        assert!(elevation_channels(&config(2.0, 1.0, 4.0, 4.0)).is_err());
        assert!(elevation_channels(&config(2.0, 1.0, 0.0, 4.0)).is_err());
        let mut c = config(2.0, 1.0, 1.0, 4.0);
        c.azimuth_count = 0;
        assert!(lidar_pattern(&c).is_err());
    }

    proptest! {
        #[test]
        fn ground_hits_are_evenly_spaced(
            h in 0.5f64..4.0, dr in 0.25f64..3.0, r_min in 0.5f64..5.0, span in 1.0f64..60.0
        ) {
            let cfg = config(h, dr, r_min, r_min + span);
            let ch = elevation_channels(&cfg).unwrap();
            // steepest channel first, i.e. nearest ground hit first
            let ranges: Vec<f64> = ch.iter().map(|&t| h / (-t).tan()).collect();
            prop_assert!((ranges[0] - r_min).abs() < 1e-9 * r_min.max(1.0));
            for w in ranges.windows(2) {
                prop_assert!((w[1] - w[0] - dr).abs() < 1e-9 * (r_min + span));
            }
        }

        #[test]
        fn directions_are_unit(az in 1usize..50, ups in prop::collection::vec(-1.5f64..1.5, 0..5)) {
            let mut cfg = config(2.0, 1.0, 1.0, 10.0);
            cfg.azimuth_count = az;
            cfg.upper_elevations = ups;
            let n_channels = elevation_channels(&cfg).unwrap().len();
            let dirs = lidar_pattern(&cfg).unwrap();
            prop_assert_eq!(dirs.len(), az * n_channels);
            for d in dirs {
                prop_assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
