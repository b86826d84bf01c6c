use std::sync::Arc;

use recon::harness::channel::gen_key_pair;
use recon::protocol::{run_local, run_session, Alice, Bob, Role};
use recon::seed;
use recon::{MatrixSet, Scheme, SessionConfig};

fn config(scheme: Scheme, count: usize) -> SessionConfig {
    let rates = [0.5, 0.6, 0.7]
        .iter()
        .map(|&r| {
            let set = MatrixSet::construct(1500, r, count, 21).unwrap();
            Arc::new(if count > 1 && !scheme.is_multi_matrix() { set.single(0) } else { set })
        })
        .collect();
    SessionConfig {
        scheme,
        n_matrices: count,
        f_d: 1.1,
        delta: 0.02,
        max_iters: 100,
        rates,
        shared_seed: 5,
        local_seed: 6,
    }
}

#[test]
fn threaded_and_local_drivers_agree() {
    for (scheme, count) in [(Scheme::SR, 1), (Scheme::SRCR, 1), (Scheme::MR, 3), (Scheme::MRCR, 3)] {
        let cfg = config(scheme, count);
        let e = 0.02;
        let keys = gen_key_pair(1500, e, &mut seed::rng(9, &[seed::label("keys")]));
        let (ta, tb) = run_session(&keys.alice, &keys.bob, e, &cfg).unwrap();
        let mut alice = Alice::new(&keys.alice, e, cfg.for_role(Role::Alice)).unwrap();
        let mut bob = Bob::new(&keys.bob, e, cfg.for_role(Role::Bob)).unwrap();
        let (la, lb, transcript) = run_local(&mut alice, &mut bob).unwrap();
        assert_eq!(ta, la, "{scheme:?}");
        assert_eq!(tb, lb, "{scheme:?}");
        assert!(tb.success, "{scheme:?}: {:?}", tb.failure);
        assert_eq!(ta.key, tb.key);
        assert_eq!(tb.rounds, transcript.0.iter().filter(|t| t.kind == recon::protocol::message::MessageKind::Verdict).count());
    }
}
