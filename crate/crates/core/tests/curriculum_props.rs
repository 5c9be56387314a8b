mod common;

use proptest::prelude::*;

use rcl::baselines::train_vanilla;
use rcl::curriculum::{
    init_from_pretrained, init_structure, lambda_conv, schedule_lambda, smooth_weights, train_rcl, train_rcl_from,
    update_mask, MaskState, SelectionFractions,
};
use rcl::synth::{generate, EdgeDifficulty, SynthParams};
use rcl::{Graph, RclConfig};

fn small_synth(homo: f64, seed: u64) -> (Graph, EdgeDifficulty) {
    generate(&SynthParams {
        num_nodes: 200,
        num_classes: 5,
        homo,
        avg_degree: 6.0,
        seed,
        ..Default::default()
    })
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_matches_grid_minimizer(
        r in 0.0f64..=1.0,
        prev in 0.0f64..=1.0,
        log_lambda in -3.0f64..1.0,
        log_beta in -2.0f64..1.0,
        gamma in prop_oneof![Just(0.0), 0.0f64..5.0],
    ) {
        let (lambda, beta) = (10f64.powf(log_lambda), 10f64.powf(log_beta));
        let closed = update_mask(&[r], &[prev], lambda, beta, gamma).unwrap()[0];
        prop_assert!((closed - common::grid_mask(r, prev, lambda, beta, gamma)).abs() <= 1e-3);
    }

    #[test]
    fn mask_monotone_in_lambda_and_residual(
        r1 in 0.0f64..=1.0,
        r2 in 0.0f64..=1.0,
        l1 in 1e-4f64..10.0,
        l2 in 1e-4f64..10.0,
        beta in 0.01f64..10.0,
    ) {
        let (r_lo, r_hi) = (r1.min(r2), r1.max(r2));
        let (l_lo, l_hi) = (l1.min(l2), l1.max(l2));
        let s = |r: f64, l: f64| update_mask(&[r], &[0.0], l, beta, 0.0).unwrap()[0];
        prop_assert!(s(r_lo, l_hi) >= s(r_lo, l_lo));
        prop_assert!(s(r_lo, l_lo) >= s(r_hi, l_lo));
        // The selected set only grows with λ.
        if s(r_lo, l_lo) > 0.0 {
            prop_assert!(s(r_lo, l_hi) > 0.0);
        }
    }

    #[test]
    fn saturates_at_lambda_conv(rs in proptest::collection::vec(0.0f64..=1.0, 1..50), beta in 0.01f64..10.0, eps in 1e-4f64..0.1) {
        let s = update_mask(&rs, &vec![0.0; rs.len()], lambda_conv(beta, eps), beta, 0.0).unwrap();
        prop_assert!(s.iter().all(|&x| x >= 1.0 - eps - 1e-12));
    }

    #[test]
    fn schedule_is_monotone_and_hits_conv(lambda0 in 1e-6f64..0.4, pace in 1u32..=5, epochs in 1u32..400) {
        let conv = lambda_conv(1.0, 1e-3);
        let mut last = lambda0;
        for t in 0..=epochs {
            let l = schedule_lambda(lambda0, 1.0, 1e-3, pace, epochs, t).unwrap();
            prop_assert!(l >= last * (1.0 - 1e-12));
            prop_assert!(l <= conv * (1.0 + 1e-12));
            last = l;
        }
        prop_assert_eq!(schedule_lambda(lambda0, 1.0, 1e-3, pace, epochs, epochs).unwrap(), conv);
    }

    #[test]
    fn smoothed_weights_never_exceed_mask(seed in 0u64..1000, iters in 1u32..6) {
        let (g, _) = small_synth(0.5, seed % 7);
        let e = g.num_edges();
        let mut state = MaskState::new(vec![0.0; e], 0.1, g.num_nodes());
        for it in 1..=iters {
            state.s = (0..e).map(|k| ((k as u64 * 2654435761 + seed + it as u64) % 5) as f64 / 4.0).collect();
            state.iter = it;
            state.node_losses = (0..g.num_nodes()).map(|i| (i % 3) as f64 * 0.7).collect();
            let w = smooth_weights(&mut state, &g, true).unwrap();
            for (x, s) in w.values().iter().zip(&state.s) {
                prop_assert!(*x >= 0.0 && *x <= *s);
            }
        }
    }
}

#[test]
fn full_history_and_confident_nodes_keep_the_mask() {
    let (g, _) = small_synth(0.5, 1);
    let e = g.num_edges();
    let mut state = MaskState::new(vec![0.5; e], 0.1, g.num_nodes());
    for it in 1..=3 {
        state.iter = it;
        let w = smooth_weights(&mut state, &g, true).unwrap();
        assert_eq!(w.values(), &state.s[..]);
    }
    let w = smooth_weights(&mut state, &g, false).unwrap();
    assert_eq!(w.values(), &state.s[..]);
}

#[test]
fn trace_fractions_partition_selection() {
    let (g, d) = small_synth(0.3, 2);
    let cfg = RclConfig {
        epochs: 40,
        ..Default::default()
    };
    let out = train_rcl(&g, &cfg, Some(&d)).unwrap();
    assert_eq!(out.trace.records.len(), 40);
    let totals = |k| d.0.iter().filter(|&&x| x == k).count() as f64;
    use rcl::synth::Difficulty::*;
    for r in &out.trace.records {
        let f: SelectionFractions = r.fractions.unwrap();
        let selected = f.easy * totals(Easy) + f.medium * totals(Medium) + f.hard * totals(Hard);
        assert!((selected - r.num_selected as f64).abs() < 1e-6);
    }
}

#[test]
fn initial_mask_selects_about_init_frac() {
    let (g, _) = small_synth(0.5, 3);
    let cfg = RclConfig {
        epochs: 60,
        ..Default::default()
    };
    let init = init_structure(&g, &cfg).unwrap();
    let frac = init.state.num_selected() as f64 / g.num_edges() as f64;
    assert!((0.05..=0.15).contains(&frac), "{frac}");
    let again = init_structure(&g, &cfg).unwrap();
    assert_eq!(again.state.s, init.state.s);
}

#[test]
fn pace_one_reaches_the_input_structure() {
    let (g, d) = small_synth(0.5, 4);
    let cfg = RclConfig {
        pace: 1,
        epochs: 80,
        ..Default::default()
    };
    let out = train_rcl(&g, &cfg, Some(&d)).unwrap();
    assert!(out.final_state.saturated(cfg.epsilon_conv));
    assert!(out.final_state.s.iter().all(|&s| s >= 1.0 - cfg.epsilon_conv));
}

#[test]
fn disabled_curriculum_reduces_to_vanilla() {
    let (g, _) = small_synth(0.4, 5);
    let cfg = RclConfig {
        epochs: 50,
        learn_mask: false,
        smoothing: false,
        recon_in_wstep: false,
        seed: 9,
        ..Default::default()
    };
    let (pretrained, vanilla) = train_vanilla(&g, &cfg).unwrap();
    let init = init_from_pretrained(&g, &cfg, &pretrained).unwrap();
    let out = train_rcl_from(&g, &cfg, None, init).unwrap();
    assert_eq!(out.metrics, vanilla);
    assert_eq!(out.params.w0, pretrained.w0);
    assert_eq!(out.params.w1, pretrained.w1);
}

#[test]
fn runs_are_deterministic() {
    let (g, d) = small_synth(0.3, 6);
    let cfg = RclConfig {
        epochs: 30,
        ..Default::default()
    };
    let a = train_rcl(&g, &cfg, Some(&d)).unwrap();
    let b = train_rcl(&g, &cfg, Some(&d)).unwrap();
    assert_eq!(a.trace, b.trace);
    assert_eq!(a.metrics, b.metrics);
}
