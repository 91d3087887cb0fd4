//! Production code paths against the brute-force reference implementations.

use crossrec_core::corpus::NetworkId;
use crossrec_core::model::{self, ModelState};
use crossrec_core::prefmatrix::build_decayed;
use crossrec_core::synth::oracle::{self, RawParams};
use crossrec_core::synth::random::{self, Dims};
use crossrec_core::topics::TopicalProfiles;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn raw(state: &ModelState, profiles: &TopicalProfiles, user: usize, item: usize, time_vector: Vec<f64>) -> RawParams {
    RawParams {
        time_vector,
        source_relative: profiles.source.relative[user].to_rows(),
        target_relative: profiles.target.relative[user].to_rows(),
        target_weights: state.target_weights.row(user).to_vec(),
        source_transfer: state.source_transfer.to_rows(),
        target_transfer: state.target_transfer.to_rows(),
        item_factors: state.item_factors.row(item).to_vec(),
    }
}

fn random_dims(rng: &mut ChaCha8Rng) -> Dims {
    Dims {
        users: rng.gen_range(2..7),
        items: rng.gen_range(1..9),
        intervals: rng.gen_range(1..6),
        topics: rng.gen_range(1..7),
        max_per_interval: 3,
    }
}

#[test]
fn predictions_match_naive_chain() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let dims = random_dims(&mut rng);
        let k = rng.gen_range(1..5);
        let (_, profiles, state) = random::instance(dims, k, 2.0, &mut rng).unwrap();
        let existing: Vec<Vec<f64>> = (0..state.num_users())
            .filter(|&u| state.existing[u])
            .map(|u| state.time_vectors.row(u).to_vec())
            .collect();
        let t_new = oracle::mean_vector(&existing);
        for u in 0..state.num_users() {
            let scores = model::predict_user(&state, &profiles, u).unwrap();
            for (j, &score) in scores.iter().enumerate() {
                let one = model::predict_one(&state, &profiles, u, j).unwrap();
                let expected_one = oracle::predict_existing(&raw(&state, &profiles, u, j, state.time_vectors.row(u).to_vec()));
                worst = worst.max((one - expected_one).abs());
                let expected = if state.existing[u] {
                    expected_one
                } else {
                    oracle::predict_new(&raw(&state, &profiles, u, j, t_new.clone()))
                };
                worst = worst.max((score - expected).abs());
            }
        }
    }
    assert!(worst <= 1e-10, "max deviation {worst}");
}

#[test]
fn decayed_matrix_matches_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..200 {
        let dims = Dims {
            users: rng.gen_range(1..50),
            ..random_dims(&mut rng)
        };
        let ds = random::dataset(dims, &mut rng).unwrap();
        let beta = rng.gen_range(0.0..1.5);
        let as_of = rng.gen_range(1..=ds.num_intervals());
        let m = build_decayed(&ds, beta, as_of).unwrap();
        assert_eq!(m.records_visited(), ds.len());
        for (i, user) in ds.users().iter().enumerate() {
            for (j, item) in ds.items().iter().enumerate() {
                let expected = oracle::decayed_entry(&ds, user, item, beta, as_of);
                assert!((m.get(i, j) - expected).abs() <= 1e-12 * expected.max(1.0));
            }
        }
    }
}

#[test]
fn absolute_profiles_match_full_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..100 {
        let ds = random::dataset(random_dims(&mut rng), &mut rng).unwrap();
        let profiles = TopicalProfiles::build(&ds).unwrap();
        for (side, network) in [(&profiles.source, NetworkId::Source), (&profiles.target, NetworkId::Target)] {
            for (i, user) in ds.users().iter().enumerate() {
                for t in 0..ds.num_intervals() as usize {
                    for k in 0..ds.num_topics() {
                        let expected = oracle::absolute_count(&ds, user, network, t as u32 + 1, k as u32);
                        assert_eq!(side.absolute[i][(t, k)], expected);
                    }
                }
            }
        }
    }
}
