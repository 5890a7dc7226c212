//! Cross-module invariants: the score/likelihood duality, the benchmark
//! reduction of the LSTM-AL filter, and scalar-genericity smoke checks.

use esvar::data::ReturnSeries;
use esvar::models::{
    al_log_likelihood, es_exp, filter_sav, InitState, LstmAlParams, ModelParams, RiskPath,
    SavExpParams, LSTM_AL_DIM,
};
use esvar::scalar::Scalar;
use esvar::scoring::al_score;
use esvar::sim::{simulate_nonlinear_sv, SimConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[test]
fn al_likelihood_is_negative_sum_of_scores() {
    let mut rng = ChaCha12Rng::seed_from_u64(2024);
    for _ in 0..50 {
        let n = rng.gen_range(1..40);
        let mut r = Vec::with_capacity(n);
        let mut var = Vec::with_capacity(n);
        let mut es = Vec::with_capacity(n);
        for _ in 0..n {
            let v: f64 = rng.gen_range(-4.0..-0.2);
            var.push(v);
            es.push(v - rng.gen_range(0.05..2.0));
            r.push(rng.gen_range(-6.0..6.0));
        }
        let alpha = rng.gen_range(0.005..0.49);
        let path = RiskPath {
            var: var.clone(),
            es: es.clone(),
            eta: None,
            h: None,
            c: None,
            x: None,
            admissible: true,
            fail_t: None,
        };
        let ll = al_log_likelihood(&r, &path, alpha).unwrap();
        let sum_scores: f64 = (0..n)
            .map(|t| al_score(r[t], var[t], es[t], alpha).unwrap())
            .sum();
        assert!(
            (ll + sum_scores).abs() < 1e-12 * (1.0 + ll.abs()),
            "ll {ll} vs −Σscore {}",
            -sum_scores
        );
    }
}

#[test]
fn lstm_al_reduces_to_sav_exp_when_alpha1_gamma1_zero() {
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    for case in 0..100 {
        let b0 = rng.gen_range(-5.0..5.0);
        let b1 = rng.gen_range(-5.0..5.0);
        let b2 = rng.gen_range(-5.0..5.0);
        let g0 = rng.gen_range(-5.0..5.0);
        let mut w = [0.0f64; LSTM_AL_DIM];
        w[0] = b2; // beta_abs multiplies |r|, SAV's b2
        w[1] = b1; // beta_lag multiplies lagged VaR, SAV's b1
        w[2] = g0; // gamma0
        w[3] = 0.0; // gamma1
        w[4] = b0; // alpha0 becomes the constant drift, SAV's b0
        w[5] = 0.0; // alpha1
        for v in w[6..].iter_mut() {
            *v = rng.gen_range(-1.0..1.0); // cell weights are irrelevant at alpha1 = 0
        }
        let r: Vec<f64> = (0..500).map(|_| rng.gen_range(-3.0..3.0)).collect();
        let var1 = -2.0;
        let factor = 1.0 + g0.exp();
        let es1 = factor * var1;
        let init = InitState::new(var1, es1).unwrap();

        let lstm_path = ModelParams::LstmAl(LstmAlParams::from_slice(&w))
            .risk_path(&r, &init)
            .unwrap();
        let sav_path = ModelParams::SavExp(SavExpParams { b0, b1, b2, g0 })
            .risk_path(&r, &init)
            .unwrap();

        assert_eq!(
            lstm_path.admissible, sav_path.admissible,
            "case {case}: admissibility flags disagree"
        );
        assert_eq!(
            lstm_path.fail_t, sav_path.fail_t,
            "case {case}: first failing step disagrees"
        );
        if lstm_path.admissible {
            assert_eq!(lstm_path.var.len(), r.len());
            assert_eq!(sav_path.var.len(), r.len());
        }
        let len = lstm_path.var.len().min(sav_path.var.len());
        for t in 0..len {
            let (a, b) = (lstm_path.var[t], sav_path.var[t]);
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0),
                "case {case} var[{t}]: {a} vs {b}"
            );
        }
        let len_es = lstm_path.es.len().min(sav_path.es.len());
        for t in 0..len_es {
            let (a, b) = (lstm_path.es[t], sav_path.es[t]);
            assert!(
                (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0),
                "case {case} es[{t}]: {a} vs {b}"
            );
        }
    }
}

#[test]
fn sav_exp_composition_matches_model_assembly() {
    // filter_sav ∘ es_exp is exactly what the SAV-EXP assembly produces.
    let p = SavExpParams {
        b0: -0.08,
        b1: 0.88,
        b2: -0.12,
        g0: -0.7,
    };
    let out = simulate_nonlinear_sv::<f64>(&SimConfig {
        t_total: 800,
        t_keep: 400,
        seed: 5,
    })
    .unwrap();
    let r = &out.returns.values;
    let init = esvar::models::default_init(r, 0.025).unwrap();
    let direct_var = filter_sav(&p, r, init.var1).unwrap();
    let direct_es = es_exp(&direct_var, p.g0).unwrap();
    let path = ModelParams::SavExp(p).risk_path(r, &init).unwrap();
    assert!(path.admissible);
    assert_eq!(path.var, direct_var);
    assert_eq!(path.es, direct_es);
}

#[test]
fn filters_work_in_f32_too() {
    let p = SavExpParams {
        b0: -0.05f32,
        b1: 0.9,
        b2: -0.15,
        g0: -0.5,
    };
    let r: Vec<f32> = (0..300).map(|i| ((i * 31 % 17) as f32 - 8.0) * 0.2).collect();
    let var = filter_sav(&p, &r, -2.0f32).unwrap();
    let es = es_exp(&var, p.g0).unwrap();
    assert_eq!(var.len(), r.len());
    assert!(es.iter().zip(&var).all(|(e, v)| e < v));

    let out = simulate_nonlinear_sv::<f32>(&SimConfig {
        t_total: 200,
        t_keep: 100,
        seed: 9,
    })
    .unwrap();
    assert_eq!(out.returns.len(), 100);
    let report = esvar::scoring::evaluate(
        &[esvar::scoring::ForecastTriple {
            r: -1.0f32,
            var: -2.0,
            es: -3.0,
        }],
        0.01f32,
    )
    .unwrap();
    assert!((report.avg_al_score - 1.441_996).abs() < 1e-4);
}

#[test]
fn quantile_loss_zero_iff_exact_quantile() {
    let mut rng = ChaCha12Rng::seed_from_u64(3);
    for _ in 0..2000 {
        let r: f64 = rng.gen_range(-5.0..5.0);
        let var = rng.gen_range(-5.0..5.0);
        let alpha = rng.gen_range(0.01..0.99);
        let loss = esvar::scoring::quantile_loss(r, var, alpha);
        if (r - var).abs() > 1e-12 {
            assert!(loss > 0.0);
        }
    }
    assert_eq!(esvar::scoring::quantile_loss(1.25f64, 1.25, 0.3), 0.0);
}

#[test]
fn simulated_series_feeds_the_pipeline() {
    // simulate → returns CSV → reload → split → pinned backtest → evaluate
    let out = simulate_nonlinear_sv::<f64>(&SimConfig {
        t_total: 900,
        t_keep: 320,
        seed: 17,
    })
    .unwrap();
    let mut buf = Vec::new();
    out.write_csv(&mut buf, false).unwrap();
    let reloaded: ReturnSeries<f64> =
        esvar::data::parse_return_csv(&String::from_utf8(buf).unwrap(), None).unwrap();
    assert_eq!(reloaded.values, out.returns.values);

    let cfg = esvar::backtest::BacktestConfig {
        fixed_params: Some(vec![-0.05, 0.9, -0.15, -0.5]),
        ..esvar::backtest::BacktestConfig::new(esvar::models::ModelKind::SavExp, 0.025, 300)
    };
    let records = esvar::backtest::rolling_forecast(&reloaded, &cfg).unwrap();
    assert_eq!(records.len(), 20);
    let triples: Vec<_> = records
        .iter()
        .map(|rec| esvar::scoring::ForecastTriple {
            r: rec.r_observed,
            var: rec.var_forecast,
            es: rec.es_forecast,
        })
        .collect();
    let report = esvar::scoring::evaluate(&triples, 0.025f64).unwrap();
    assert!(report.avg_quantile_loss >= 0.0);
    assert!(report.n == 20);
}

#[test]
fn scalar_trait_object_safety_not_required_but_send_sync_are() {
    fn assert_send_sync<T: Send + Sync>() {}
    assert_send_sync::<esvar::models::ModelParams<f64>>();
    assert_send_sync::<esvar::mcmc::Chain<f64>>();
    assert_send_sync::<esvar::backtest::BacktestConfig>();
}

#[test]
fn f32_and_f64_agree_loosely_on_short_filters() {
    let r64: Vec<f64> = (0..50).map(|i| ((i * 7 % 13) as f64 - 6.0) * 0.25).collect();
    let r32: Vec<f32> = r64.iter().map(|v| *v as f32).collect();
    let p64 = SavExpParams {
        b0: -0.05f64,
        b1: 0.9,
        b2: -0.15,
        g0: -0.5,
    };
    let p32 = SavExpParams {
        b0: -0.05f32,
        b1: 0.9,
        b2: -0.15,
        g0: -0.5,
    };
    let v64 = filter_sav(&p64, &r64, -2.0).unwrap();
    let v32 = filter_sav(&p32, &r32, -2.0f32).unwrap();
    for (a, b) in v64.iter().zip(&v32) {
        assert!((a - *b as f64).abs() < 1e-4);
    }
}

#[test]
fn proptest_style_return_series_round_trip() {
    // Proptest invariant: any finite return vector survives CSV write/parse
    // bit-exactly (shortest round-trip float formatting).
    use proptest::prelude::*;
    let mut runner = proptest::test_runner::TestRunner::default();
    runner
        .run(
            &proptest::collection::vec(-50.0f64..50.0, 1..60),
            |values| {
                let series = ReturnSeries::new(None, values.clone()).unwrap();
                let mut buf = String::from("date,return\n");
                for (i, v) in series.values.iter().enumerate() {
                    buf.push_str(&format!("{},{}\n", i + 1, v));
                }
                let parsed: ReturnSeries<f64> =
                    esvar::data::parse_return_csv(&buf, None).unwrap();
                prop_assert_eq!(parsed.values, values);
                Ok(())
            },
        )
        .unwrap();
}
