use std::f64::consts::PI;

use super::*;
use crate::sim::{Segment, SegmentKind};

const DEG: f64 = PI / 180.0;

fn short_config(budget: ErrorBudget) -> HarnessConfig {
    use SegmentKind::*;
    let trajectory = TrajectorySpec {
        segments: vec![
            Segment::new(Stationary, 20.0, 0.0),
            Segment::new(Accelerate, 20.0, 0.5),
            Segment::new(Turn, 30.0, 3.0 * DEG),
            Segment::new(Climb, 10.0, 3.5),
            Segment::new(Turn, 30.0, -3.0 * DEG),
            Segment::new(Cruise, 20.0, 0.0),
        ],
        ..crate::sim::default_trajectory()
    };
    HarnessConfig {
        trajectory,
        budget,
        rmse_from: 40.0,
        ..HarnessConfig::default()
    }
}

#[test]
fn rate_ordering_is_validated() {
    let bad = Rates {
        predict_hz: 400.0,
        ..Rates::default()
    };
    match bad.validate() {
        Err(Error::Config { field, .. }) => assert_eq!(field, "rates.predict_hz"),
        other => panic!("{other:?}"),
    }
    let uneven = Rates {
        predict_hz: 70.0,
        ..Rates::default()
    };
    assert!(uneven.validate().is_err());
    assert_eq!(Rates::default().fold(), 2);
}

#[test]
fn initial_covariance_moments() {
    let cfg = HarnessConfig::default();
    let p = cfg.initial_covariance();
    assert!((p[(idx::ATT + 2, idx::ATT + 2)] - (30.0 * DEG).powi(2) / 3.0).abs() < 1e-15);
    assert!((p[(idx::VEL, idx::VEL)] - 0.01).abs() < 1e-15);
    assert_eq!(p[(idx::POS, idx::POS)], 1.0);
    assert_eq!(p[(0, 1)], 0.0);
}

#[test]
fn noiseless_runs_track_truth() {
    let cfg = short_config(ErrorBudget::zero());
    let scn = Scenario::new(&cfg).unwrap();
    for tag in Tag::ALL {
        let tr = run_trial(tag, &scn, &cfg, TrialSeed::new(1, 0)).unwrap();
        assert_eq!(tr.t.len(), 130);
        let worst = tr.hpos.iter().cloned().fold(0.0, f64::max);
        assert!(worst < 1e-3, "{tag}: {worst}");
    }
}

#[test]
fn trials_are_deterministic() {
    let cfg = short_config(ErrorBudget::default());
    let scn = Scenario::new(&cfg).unwrap();
    let a = run_trial(Tag::ALgR, &scn, &cfg, TrialSeed::new(7, 1)).unwrap();
    let b = run_trial(Tag::ALgR, &scn, &cfg, TrialSeed::new(7, 1)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_trial_campaign_equals_the_trial() {
    let cfg = short_config(ErrorBudget::default());
    let res = run_campaign(&[Tag::LgR], 1, 3, &cfg).unwrap();
    let tr = &res.trials[0][0];
    let s = &res.series[0];
    assert_eq!(s.e_att, tr.att);
    assert_eq!(s.e_vel, tr.vel);
    for (a, b) in s.e_hpos.iter().zip(&tr.hpos) {
        assert!((a - b).abs() <= 1e-15 * b.max(1.0));
    }
    assert_eq!(res.epochs, tr.t);
}

#[test]
fn campaign_statistics_match_direct_recomputation() {
    let cfg = short_config(ErrorBudget::default());
    let tags = [Tag::Ekf, Tag::ALgL];
    let res = run_campaign(&tags, 3, 11, &cfg).unwrap();
    let bigger = run_campaign(&tags, 4, 11, &cfg).unwrap();
    assert_eq!(&bigger.trials[..3], &res.trials[..]);

    for (j, s) in res.series.iter().enumerate() {
        assert_eq!(s.tag, tags[j]);
        for k in [0, 50, 129] {
            let mean_yaw: f64 = res.trials.iter().map(|ts| ts[j].att[k].z).sum::<f64>() / 3.0;
            assert!((s.e_att[k].z - mean_yaw).abs() < 1e-15);
            let ms: f64 = res.trials.iter().map(|ts| ts[j].hpos[k].powi(2)).sum::<f64>() / 3.0;
            assert!((s.e_hpos[k] - ms.sqrt()).abs() < 1e-12);
        }
        let (mut sum, mut n) = (0.0, 0);
        for ts in &res.trials {
            for (t, h) in ts[j].t.iter().zip(&ts[j].hpos) {
                if *t >= 40.0 {
                    sum += h * h;
                    n += 1;
                }
            }
        }
        assert!((s.rmse - (sum / n as f64).sqrt()).abs() < 1e-12);
        let from_series = {
            let sel: Vec<f64> = res
                .epochs
                .iter()
                .zip(&s.e_hpos)
                .filter(|(t, _)| **t >= 40.0)
                .map(|(_, h)| h * h)
                .collect();
            (sel.iter().sum::<f64>() / sel.len() as f64).sqrt()
        };
        assert!((s.rmse - from_series).abs() < 1e-9);
    }
}

#[test]
fn paired_trials_share_sensor_data() {
    let cfg = short_config(ErrorBudget::default());
    let scn = Scenario::new(&cfg).unwrap();
    let (a, _) = scn.simulate(&cfg, TrialSeed::new(5, 2));
    let (b, _) = scn.simulate(&cfg, TrialSeed::new(5, 2));
    assert_eq!(a, b);
    let (c, _) = scn.simulate(&cfg, TrialSeed::new(5, 3));
    assert_ne!(a.imu, c.imu);
}

#[test]
fn empty_tag_list_gives_empty_table() {
    let cfg = short_config(ErrorBudget::zero());
    let res = run_campaign(&[], 1, 0, &cfg).unwrap();
    assert!(summarize(&res).is_empty());
    assert!(run_campaign(&[Tag::Ekf], 0, 0, &cfg).is_err());
}

#[test]
fn angle_wrapping() {
    assert!((wrap(2.0 * PI - 0.1) + 0.1).abs() < 1e-12);
    assert_eq!(wrap(PI), PI);
    assert_eq!(wrap(-PI), PI);
}
