mod common;

use agripath::env::Outcome;
use agripath::harness::{read_rows, write_rows, ExperimentConfig};
use agripath::metrics::EpisodeRecord;
use agripath::nn::checkpoint;
use agripath::reward3d::{reward3d, NavOutcome, NavState, OBSTACLE_THRESHOLD};
use common::random_mlp;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nav_state() -> impl Strategy<Value = NavState> {
    (
        -3.2f64..3.2,
        0.0f64..100.0,
        1e-3f64..100.0,
        0.0f64..2.0,
        -1.0f64..1.0,
        -3.0f64..3.0,
        prop_oneof![Just(NavOutcome::Ongoing), Just(NavOutcome::Success), Just(NavOutcome::Failure)],
    )
        .prop_map(|(goal_angle, goal_dist, goal_dist_initial, min_obstacle_dist, action_linear, action_angular, outcome)| NavState {
            goal_angle,
            goal_dist,
            goal_dist_initial,
            min_obstacle_dist,
            action_linear,
            action_angular,
            outcome,
        })
}

proptest! {
    #[test]
    fn reward3d_terms_follow_their_formulas(s in nav_state()) {
        let (total, b) = reward3d(&s).unwrap();
        prop_assert_eq!(b.yaw.to_bits(), (-s.goal_angle.abs()).to_bits());
        prop_assert_eq!(b.vangular.to_bits(), (-(s.action_angular * s.action_angular)).to_bits());
        let distance = 2.0 * s.goal_dist_initial / (s.goal_dist_initial + s.goal_dist) - 1.0;
        prop_assert_eq!(b.distance.to_bits(), distance.to_bits());
        prop_assert!(b.distance > -1.0 && b.distance <= 1.0);
        prop_assert_eq!(b.obstacle, if s.min_obstacle_dist < OBSTACLE_THRESHOLD { -20.0 } else { 0.0 });
        let dev = (0.22 - s.action_linear) * 10.0;
        prop_assert_eq!(b.vlinear.to_bits(), (-(dev * dev)).to_bits());
        prop_assert_eq!(b.step, -1.0);
        prop_assert_eq!(b.success, if s.outcome == NavOutcome::Success { 2500.0 } else { 0.0 });
        prop_assert_eq!(b.failure, if s.outcome == NavOutcome::Failure { -2000.0 } else { 0.0 });
        prop_assert_eq!(total.to_bits(), b.components().iter().sum::<f64>().to_bits());
    }

    #[test]
    fn reward3d_closer_is_better(s in nav_state(), shrink in 0.0f64..1.0) {
        let nearer = NavState { goal_dist: s.goal_dist * shrink, ..s };
        prop_assert!(reward3d(&nearer).unwrap().1.distance >= reward3d(&s).unwrap().1.distance);
    }

    #[test]
    fn checkpoints_round_trip_bit_exactly(seed in any::<u64>()) {
        let net = random_mlp(&mut ChaCha8Rng::seed_from_u64(seed));
        let back = checkpoint::from_str(&checkpoint::to_string(&net).unwrap()).unwrap();
        for (a, b) in net.params().iter().zip(back.params()) {
            prop_assert!(a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits()));
        }
        prop_assert_eq!(back, net);
    }

    #[test]
    fn csv_round_trips(rows in prop::collection::vec(
        (-1e6f64..1e6, 0usize..1000, 0u8..3, 0.0f64..1.0, prop::option::of(0.0f64..1e3)), 1..50)
    ) {
        let rows: Vec<EpisodeRecord> = rows
            .into_iter()
            .enumerate()
            .map(|(i, (reward, steps, o, eps, loss))| EpisodeRecord {
                episode: i + 1,
                reward,
                steps,
                outcome: [Outcome::Goal, Outcome::Collision, Outcome::Timeout][o as usize],
                epsilon_or_noise: eps,
                mean_loss: loss,
            })
            .collect();
        let mut bytes = Vec::new();
        write_rows(&rows, &mut bytes).unwrap();
        prop_assert!(bytes.starts_with(b"episode,reward,steps,outcome,epsilon_or_noise,mean_loss\n"));
        prop_assert_eq!(read_rows(bytes.as_slice()).unwrap(), rows);
    }
}

#[test]
fn reward3d_rejects_invalid_states() {
    let ok = NavState {
        goal_angle: 0.1,
        goal_dist: 1.0,
        goal_dist_initial: 2.0,
        min_obstacle_dist: 1.0,
        action_linear: 0.1,
        action_angular: 0.0,
        outcome: NavOutcome::Ongoing,
    };
    assert!(reward3d(&ok).is_ok());
    assert!(reward3d(&NavState { goal_dist_initial: 0.0, ..ok }).is_err());
    assert!(reward3d(&NavState { goal_dist: -1.0, ..ok }).is_err());
    assert!(reward3d(&NavState { goal_angle: f64::NAN, ..ok }).is_err());
}

#[test]
fn csv_reader_rejects_wrong_schema() {
    let good = "episode,reward,steps,outcome,epsilon_or_noise,mean_loss\n1,0.5,10,goal,0.9,\n";
    assert_eq!(read_rows(good.as_bytes()).unwrap().len(), 1);
    for bad in [
        "episode,steps,reward,outcome,epsilon_or_noise,mean_loss\n1,10,0.5,goal,0.9,\n",
        "episode,reward,steps,outcome,epsilon_or_noise\n1,0.5,10,goal,0.9\n",
        "episode,reward,steps,outcome,epsilon_or_noise,mean_loss\n1,NaN,10,goal,0.9,\n",
        "episode,reward,steps,outcome,epsilon_or_noise,mean_loss\n1,0.5,10,fell,0.9,\n",
    ] {
        assert!(read_rows(bad.as_bytes()).is_err(), "{bad}");
    }
}

#[test]
fn config_rejects_unknown_keys_everywhere() {
    assert!(ExperimentConfig::parse("algos = [\"td3\"]\nenvs = [\"scenario2\"]\n[td3]\nhidden = [32, 32]\n").is_ok());
    for bad in [
        "algos = [\"dqn\"]\nlearning_rate = 0.1\n",
        "[dqn]\nlearnin_rate = 0.1\n",
        "[td3]\nnoise = 0.1\n",
        "[farm]\nstep = 1.0\n",
        "[ddpg]\nexploration = { kind = \"ou\", theta = 0.15, sigma = 0.2, mu = 0.0, rho = 1 }\n",
        "algos = [\"a2c\"]\n",
        "envs = [\"12x12\"]\n",
    ] {
        assert!(ExperimentConfig::parse(bad).is_err(), "{bad}");
    }
}
