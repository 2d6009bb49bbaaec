use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numerics::{grad_check_many, Tape, Tensor, Var, DEFAULT_STEP};

fn cfg(attention: Attention) -> ModelConfig {
    ModelConfig {
        src_vocab_size: 7,
        tgt_vocab_size: 6,
        d_emb: 3,
        d_h: 4,
        enc_layers: 2,
        dec_layers: 2,
        attention,
        max_decode_len: 5,
    }
}

fn random_params(config: &ModelConfig, seed: u64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ModelParams::initialize(config, &mut rng).unwrap();
    // non-zero biases so every term is exercised
    for t in p.tensors_mut() {
        for x in t.data_mut() {
            *x += rng.gen_range(-0.3..0.3);
        }
    }
    p
}

fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

// --- plain-f64 oracle helpers ---------------------------------------------

fn matvec(m: &Tensor, x: &[f64]) -> Vec<f64> {
    let cols = m.cols();
    (0..m.rows())
        .map(|r| (0..cols).map(|c| m.data()[r * cols + c] * x[c]).sum())
        .collect()
}

fn sig(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn softmax(v: &[f64]) -> Vec<f64> {
    let max = v.iter().cloned().fold(f64::MIN, f64::max);
    let e: Vec<f64> = v.iter().map(|x| (x - max).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

// --- lstm_step -------------------------------------------------------------

fn lstm_on_tape(
    tape: &mut Tape,
    weights: &[Tensor; 12],
    e: &[f64],
    h: &[f64],
    c: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let v: Vec<Var> = weights.iter().map(|t| tape.constant(t.clone())).collect();
    let layer = LstmVars {
        w_e: [v[0], v[1], v[2], v[3]],
        w_h: [v[4], v[5], v[6], v[7]],
        b: [v[8], v[9], v[10], v[11]],
    };
    let e = tape.constant(Tensor::vector(e.to_vec()));
    let h = tape.constant(Tensor::vector(h.to_vec()));
    let c = tape.constant(Tensor::vector(c.to_vec()));
    let (h2, c2) = lstm_step(tape, &layer, e, h, c).unwrap();
    (tape.value(h2).data().to_vec(), tape.value(c2).data().to_vec())
}

fn zero_lstm(input: usize, hidden: usize) -> [Tensor; 12] {
    std::array::from_fn(|i| match i {
        0..=3 => Tensor::zeros(&[hidden, input]),
        4..=7 => Tensor::zeros(&[hidden, hidden]),
        _ => Tensor::zeros(&[hidden, 1]),
    })
}

#[test]
fn lstm_zero_params_zero_state() {
    let mut tape = Tape::new();
    let (h, c) = lstm_on_tape(&mut tape, &zero_lstm(3, 2), &[1.0, -2.0, 0.5], &[0.0; 2], &[0.0; 2]);
    assert_eq!(h, vec![0.0, 0.0]);
    assert_eq!(c, vec![0.0, 0.0]);
}

#[test]
fn lstm_zero_params_halves_cell() {
    let c0 = [0.8, -1.4];
    let mut tape = Tape::new();
    let (h, c) = lstm_on_tape(&mut tape, &zero_lstm(3, 2), &[1.0, 2.0, 3.0], &[0.3, 0.1], &c0);
    for j in 0..2 {
        assert!((c[j] - 0.5 * c0[j]).abs() < 1e-15);
        assert!((h[j] - 0.5 * (0.5 * c0[j]).tanh()).abs() < 1e-15);
    }
}

#[test]
fn lstm_matches_scalar_loop_reference() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (input, hidden) = (3, 4);
    let weights: [Tensor; 12] = std::array::from_fn(|i| {
        let shape = match i {
            0..=3 => [hidden, input],
            4..=7 => [hidden, hidden],
            _ => [hidden, 1],
        };
        Tensor::new(shape.to_vec(), rand_vec(&mut rng, shape[0] * shape[1])).unwrap()
    });
    let e = rand_vec(&mut rng, input);
    let h = rand_vec(&mut rng, hidden);
    let c = rand_vec(&mut rng, hidden);

    let mut tape = Tape::new();
    let (h_tape, c_tape) = lstm_on_tape(&mut tape, &weights, &e, &h, &c);

    for j in 0..hidden {
        let gate = |g: usize| {
            let mut acc = weights[8 + g].data()[j];
            for k in 0..input {
                acc += weights[g].get(j, k) * e[k];
            }
            for k in 0..hidden {
                acc += weights[4 + g].get(j, k) * h[k];
            }
            acc
        };
        let i = sig(gate(0));
        let f = sig(gate(1));
        let cc = f * c[j] + i * gate(2).tanh();
        let o = sig(gate(3));
        let hh = o * cc.tanh();
        assert!((c_tape[j] - cc).abs() < 1e-13);
        assert!((h_tape[j] - hh).abs() < 1e-13);
    }
}

#[test]
fn lstm_dimension_mismatch_is_an_error() {
    let mut tape = Tape::new();
    let w = zero_lstm(3, 2).map(|t| tape.constant(t));
    let layer = LstmVars {
        w_e: [w[0], w[1], w[2], w[3]],
        w_h: [w[4], w[5], w[6], w[7]],
        b: [w[8], w[9], w[10], w[11]],
    };
    let e = tape.constant(Tensor::vector(vec![1.0; 4]));
    let h = tape.constant(Tensor::vector(vec![0.0; 2]));
    assert!(lstm_step(&mut tape, &layer, e, h, h).is_err());
}

// --- encoder ---------------------------------------------------------------

#[test]
fn zero_params_encode_to_zero() {
    let c = cfg(Attention::Dot);
    let p = ModelParams::zeros(&c).unwrap();
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, &p);
    let enc = m.encode(&mut tape, &[3, 4, 5]).unwrap();
    assert_eq!(enc.top_hidden.len(), 3);
    for &s in &enc.top_hidden {
        assert_eq!(tape.value(s).shape(), &[c.d_h, 1]);
        assert!(tape.value(s).data().iter().all(|&x| x == 0.0));
    }
}

#[test]
fn encode_errors() {
    let c = cfg(Attention::Dot);
    let p = ModelParams::zeros(&c).unwrap();
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, &p);
    assert_eq!(m.encode(&mut tape, &[]).unwrap_err(), Seq2SeqError::EmptySource);
    assert_eq!(
        m.encode(&mut tape, &[1, 7]).unwrap_err(),
        Seq2SeqError::TokenOutOfRange { id: 7, vocab: 7 }
    );
}

/// Copy each forward-direction tensor into its backward twin.
fn tie_directions(p: &mut ModelParams) {
    let names: Vec<String> = p.names().iter().filter(|n| n.contains(".fwd.")).cloned().collect();
    for n in names {
        let t = p.get(&n).unwrap().clone();
        p.set(&n.replace(".fwd.", ".bwd."), t).unwrap();
    }
}

#[test]
fn single_token_one_layer_sees_token_from_both_sides() {
    let c = ModelConfig {
        enc_layers: 1,
        ..cfg(Attention::Dot)
    };
    let mut p = random_params(&c, 3);
    tie_directions(&mut p);
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, &p);
    let enc = m.encode(&mut tape, &[4]).unwrap();
    let s = tape.value(enc.top_hidden[0]).data().to_vec();
    let half = c.d_h / 2;
    assert_eq!(&s[..half], &s[half..]);
    assert_eq!(tape.value(enc.final_hidden).data(), s.as_slice());
}

#[test]
fn reversed_input_swaps_directions() {
    let c = ModelConfig {
        enc_layers: 1,
        ..cfg(Attention::Dot)
    };
    let mut p = random_params(&c, 5);
    tie_directions(&mut p);
    let half = c.d_h / 2;
    let run = |src: &[usize]| {
        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, &p);
        let enc = m.encode(&mut tape, src).unwrap();
        enc.top_hidden
            .iter()
            .map(|&s| tape.value(s).data().to_vec())
            .collect::<Vec<_>>()
    };
    let a = run(&[3, 5, 6]);
    let b = run(&[6, 5, 3]);
    for j in 0..3 {
        let fwd_orig = &a[j][..half];
        let bwd_rev = &b[2 - j][half..];
        for (x, y) in fwd_orig.iter().zip(bwd_rev) {
            assert!((x - y).abs() < 1e-14);
        }
    }
}

// --- attention -------------------------------------------------------------

/// Build an encoder output whose top states are the given constants.
fn fake_encoder(tape: &mut Tape, states: &[Vec<f64>]) -> EncoderOutput {
    let top: Vec<Var> = states
        .iter()
        .map(|s| tape.constant(Tensor::vector(s.clone())))
        .collect();
    let memory = tape.concat_cols(&top).unwrap();
    EncoderOutput {
        final_hidden: top[0],
        final_cell: top[0],
        memory,
        top_hidden: top,
    }
}

fn weights_for(p: &ModelParams, states: &[Vec<f64>], h: &[f64]) -> Vec<f64> {
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, p);
    let enc = fake_encoder(&mut tape, states);
    let hv = tape.constant(Tensor::vector(h.to_vec()));
    let a = m.attention_weights(&mut tape, &enc, hv).unwrap();
    tape.value(a).data().to_vec()
}

fn attention_variants() -> Vec<Attention> {
    vec![
        Attention::Dot,
        Attention::General,
        Attention::Concat,
        Attention::Tensor { k: 3 },
    ]
}

#[test]
fn identical_states_give_uniform_weights() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let s = rand_vec(&mut rng, 4);
    let h = rand_vec(&mut rng, 4);
    for att in attention_variants() {
        let p = random_params(&cfg(att), 21);
        let a = weights_for(&p, &[s.clone(), s.clone(), s.clone()], &h);
        for w in a {
            assert!((w - 1.0 / 3.0).abs() < 1e-14, "{att}");
        }
    }
}

#[test]
fn none_variant_rejects_attention() {
    let p = ModelParams::zeros(&cfg(Attention::None)).unwrap();
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, &p);
    let enc = fake_encoder(&mut tape, &[vec![0.0; 4]]);
    let h = tape.constant(Tensor::vector(vec![0.0; 4]));
    assert_eq!(
        m.attention_weights(&mut tape, &enc, h).unwrap_err(),
        Seq2SeqError::NoAttention
    );
}

#[test]
fn general_with_identity_equals_dot() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let states: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(&mut rng, 4)).collect();
    let h = rand_vec(&mut rng, 4);
    let dot = random_params(&cfg(Attention::Dot), 1);
    let mut general = random_params(&cfg(Attention::General), 1);
    general.set("attn.W_g", Tensor::identity(4)).unwrap();
    assert_eq!(weights_for(&dot, &states, &h), weights_for(&general, &states, &h));

    // and the full step output agrees once every shared tensor matches
    for name in dot.names() {
        general.set(name, dot.get(name).unwrap().clone()).unwrap();
    }
    let step = |p: &ModelParams| {
        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, p);
        let d = m.teacher_forced(&mut tape, &[3, 4, 5], &[3, 1]).unwrap();
        d.iter().map(|&v| tape.value(v).data().to_vec()).collect::<Vec<_>>()
    };
    assert_eq!(step(&dot), step(&general));
}

#[test]
fn tensor_with_zero_u_is_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let states: Vec<Vec<f64>> = (0..5).map(|_| rand_vec(&mut rng, 4)).collect();
    let mut p = random_params(&cfg(Attention::Tensor { k: 3 }), 2);
    p.set("attn.U", Tensor::zeros(&[1, 3])).unwrap();
    for w in weights_for(&p, &states, &rand_vec(&mut rng, 4)) {
        assert!((w - 0.2).abs() < 1e-15);
    }
}

/// Direct score formulas on plain vectors.
fn oracle_scores(p: &ModelParams, att: Attention, states: &[Vec<f64>], h: &[f64]) -> Vec<f64> {
    let d = h.len();
    states
        .iter()
        .map(|s| match att {
            Attention::Dot => s.iter().zip(h).map(|(a, b)| a * b).sum(),
            Attention::General => {
                let wh = matvec(p.get("attn.W_g").unwrap(), h);
                s.iter().zip(&wh).map(|(a, b)| a * b).sum()
            }
            Attention::Concat => {
                let w = p.get("attn.W_cc").unwrap().data();
                (0..d).map(|i| w[i] * s[i] + w[d + i] * h[i]).sum()
            }
            Attention::Tensor { k } => {
                let w = p.get("attn.W").unwrap().data();
                let v = p.get("attn.V").unwrap();
                let b = p.get("attn.b").unwrap().data();
                let u = p.get("attn.U").unwrap().data();
                let sh: Vec<f64> = s.iter().chain(h).copied().collect();
                let lin = matvec(v, &sh);
                (0..k)
                    .map(|r| {
                        let mut bil = 0.0;
                        for a in 0..d {
                            for c in 0..d {
                                bil += s[a] * w[a * k * d + r * d + c] * h[c];
                            }
                        }
                        u[r] * (bil + lin[r] + b[r])
                    })
                    .sum()
            }
            Attention::None => unreachable!(),
        })
        .collect()
}

#[test]
fn attention_matches_direct_formulas_and_is_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for att in attention_variants() {
        let p = random_params(&cfg(att), 30);
        let states: Vec<Vec<f64>> = (0..4).map(|_| rand_vec(&mut rng, 4)).collect();
        let h = rand_vec(&mut rng, 4);
        let got = weights_for(&p, &states, &h);
        let want = softmax(&oracle_scores(&p, att, &states, &h));
        assert!((got.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() < 1e-13, "{att}: {got:?} vs {want:?}");
        }

        let perm = [2, 0, 3, 1];
        let permuted: Vec<Vec<f64>> = perm.iter().map(|&i| states[i].clone()).collect();
        let got_perm = weights_for(&p, &permuted, &h);
        for (slot, &i) in perm.iter().enumerate() {
            assert!((got_perm[slot] - got[i]).abs() < 1e-14);
        }
    }
}

fn combine_on_tape(p: &ModelParams, states: &[Vec<f64>], h: &[f64]) -> Vec<f64> {
    let mut tape = Tape::new();
    let m = BoundModel::new(&mut tape, p);
    let enc = fake_encoder(&mut tape, states);
    let hv = tape.constant(Tensor::vector(h.to_vec()));
    let out = m.attend_and_combine(&mut tape, &enc, hv).unwrap();
    tape.value(out).data().to_vec()
}

#[test]
fn combine_of_equal_states_uses_that_state() {
    let mut p = random_params(&cfg(Attention::Dot), 6);
    // W_c = [I 0]: output is relu(g)
    let mut wc = Tensor::zeros(&[4, 8]);
    for i in 0..4 {
        wc.data_mut()[i * 8 + i] = 1.0;
    }
    p.set("combine.W_c", wc).unwrap();
    p.set("combine.b_c", Tensor::zeros(&[4, 1])).unwrap();
    let s = vec![0.2, 0.9, 1.5, 0.4];
    let out = combine_on_tape(&p, &[s.clone(), s.clone()], &[0.3, -0.1, 0.7, 0.0]);
    for (o, x) in out.iter().zip(&s) {
        assert!((o - x).abs() < 1e-15);
    }
}

#[test]
fn combine_with_zero_weights_is_zero() {
    let mut p = random_params(&cfg(Attention::General), 6);
    p.set("combine.W_c", Tensor::zeros(&[4, 8])).unwrap();
    p.set("combine.b_c", Tensor::zeros(&[4, 1])).unwrap();
    let out = combine_on_tape(&p, &[vec![1.0; 4], vec![-2.0; 4]], &[0.5; 4]);
    assert_eq!(out, vec![0.0; 4]);
}

#[test]
fn combine_matches_direct_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for att in attention_variants() {
        let p = random_params(&cfg(att), 44);
        let states: Vec<Vec<f64>> = (0..3).map(|_| rand_vec(&mut rng, 4)).collect();
        let h = rand_vec(&mut rng, 4);
        let a = softmax(&oracle_scores(&p, att, &states, &h));
        let g: Vec<f64> = (0..4).map(|i| (0..3).map(|j| a[j] * states[j][i]).sum()).collect();
        let gh: Vec<f64> = g.iter().chain(&h).copied().collect();
        let lin = matvec(p.get("combine.W_c").unwrap(), &gh);
        let b = p.get("combine.b_c").unwrap().data();
        let want: Vec<f64> = lin.iter().zip(b).map(|(x, y)| (x + y).max(0.0)).collect();
        let got = combine_on_tape(&p, &states, &h);
        for (x, y) in got.iter().zip(&want) {
            assert!((x - y).abs() < 1e-13, "{att}");
        }
    }
}

// --- decoding and loss ---------------------------------------------------------

#[test]
fn zero_model_decodes_uniformly() {
    for att in Attention::all(2) {
        let c = cfg(att);
        let p = ModelParams::zeros(&c).unwrap();
        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, &p);
        let enc = m.encode(&mut tape, &[3, 4]).unwrap();
        let state = DecoderState::from_encoder(&enc, c.dec_layers);
        let (dist, _) = m.decode_step(&mut tape, BOS_ID, &state, &enc).unwrap();
        for &x in tape.value(dist).data() {
            assert!((x - 1.0 / 6.0).abs() < 1e-15);
        }
        assert_eq!(
            m.decode_step(&mut tape, 6, &state, &enc).unwrap_err(),
            Seq2SeqError::TokenOutOfRange { id: 6, vocab: 6 }
        );
    }
}

#[test]
fn stepwise_decoding_matches_teacher_forcing() {
    let src = [3, 6, 4, 5];
    let tgt = [4, 3, 5, EOS_ID];
    for att in Attention::all(3) {
        let c = cfg(att);
        let p = random_params(&c, 71);

        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, &p);
        let forced: Vec<Vec<f64>> = m
            .teacher_forced(&mut tape, &src, &tgt)
            .unwrap()
            .iter()
            .map(|&d| tape.value(d).data().to_vec())
            .collect();

        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, &p);
        let enc = m.encode(&mut tape, &src).unwrap();
        let mut state = DecoderState::from_encoder(&enc, c.dec_layers);
        let mut prev = BOS_ID;
        for (i, &w) in tgt.iter().enumerate() {
            let (dist, next) = m.decode_step(&mut tape, prev, &state, &enc).unwrap();
            let v = tape.value(dist).data();
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(v.iter().all(|&x| x > 0.0));
            for (a, b) in v.iter().zip(&forced[i]) {
                assert!((a - b).abs() <= 1e-12);
            }
            state = next;
            prev = w;
        }
    }
}

#[test]
fn zero_model_loss_is_n_log_v() {
    for att in Attention::all(2) {
        let c = cfg(att);
        let p = ModelParams::zeros(&c).unwrap();
        let mut tape = Tape::new();
        let m = BoundModel::new(&mut tape, &p);
        let loss = m.forward_loss(&mut tape, &[3, 4], &[3, 4, 5, EOS_ID]).unwrap();
        assert!((tape.value(loss).item().unwrap() - 4.0 * 6f64.ln()).abs() < 1e-12);
        let loss = m.forward_loss(&mut tape, &[3], &[EOS_ID]).unwrap();
        assert!((tape.value(loss).item().unwrap() - 6f64.ln()).abs() < 1e-12);
        assert_eq!(
            m.forward_loss(&mut tape, &[3], &[]).unwrap_err(),
            Seq2SeqError::EmptyTarget
        );
    }
}

#[test]
fn gradients_match_finite_differences_for_every_variant() {
    for att in Attention::all(2) {
        let c = cfg(att);
        let p = random_params(&c, 17);
        let report = grad_check_many(
            |tape, vars| {
                let m = BoundModel::from_vars(&p, vars);
                m.forward_loss(tape, &[3, 5, 4], &[4, 5, EOS_ID])
                    .map_err(|e| match e {
                        Seq2SeqError::Numerics(n) => n,
                        other => panic!("{other}"),
                    })
            },
            p.tensors(),
            DEFAULT_STEP,
        )
        .unwrap();
        assert!(report.max_rel_error < 1e-4, "{att}: {report:?}");
        assert!(report.checked > p.param_count() * 9 / 10, "{att}: {report:?}");
    }
}

// --- parameter layout ------------------------------------------------------

#[test]
fn parameter_shapes_follow_config() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for _ in 0..50 {
        let d_h = 2 * rng.gen_range(1..6);
        let k = rng.gen_range(1..5);
        let att = Attention::all(k)[rng.gen_range(0..5)];
        let c = ModelConfig {
            src_vocab_size: rng.gen_range(3..30),
            tgt_vocab_size: rng.gen_range(3..30),
            d_emb: rng.gen_range(1..8),
            d_h,
            enc_layers: rng.gen_range(1..4),
            dec_layers: rng.gen_range(1..4),
            attention: att,
            max_decode_len: 4,
        };
        let p = ModelParams::zeros(&c).unwrap();
        assert_eq!(p.param_count(), parameter_count(&c));
        let shape = |n: &str| p.get(n).unwrap().shape().to_vec();
        assert_eq!(shape("enc.embedding"), vec![c.d_emb, c.src_vocab_size]);
        assert_eq!(shape("dec.embedding"), vec![c.d_emb, c.tgt_vocab_size]);
        assert_eq!(shape("enc.l0.fwd.W_ei"), vec![d_h / 2, c.d_emb]);
        assert_eq!(shape("enc.l0.bwd.W_ho"), vec![d_h / 2, d_h / 2]);
        if c.enc_layers > 1 {
            assert_eq!(shape("enc.l1.bwd.W_ec"), vec![d_h / 2, d_h]);
        }
        assert_eq!(shape("dec.l0.W_ef"), vec![d_h, c.d_emb]);
        if c.dec_layers > 1 {
            assert_eq!(shape("dec.l1.W_ei"), vec![d_h, d_h]);
        }
        assert_eq!(shape("dec.l0.b_f"), vec![d_h, 1]);
        assert_eq!(shape("proj.W_p"), vec![c.tgt_vocab_size, d_h]);
        assert_eq!(shape("proj.b_p"), vec![c.tgt_vocab_size, 1]);
        match att {
            Attention::None => assert!(p.get("combine.W_c").is_none()),
            Attention::Dot => assert_eq!(shape("combine.W_c"), vec![d_h, 2 * d_h]),
            Attention::General => assert_eq!(shape("attn.W_g"), vec![d_h, d_h]),
            Attention::Concat => assert_eq!(shape("attn.W_cc"), vec![1, 2 * d_h]),
            Attention::Tensor { k } => {
                assert_eq!(shape("attn.W"), vec![d_h, k, d_h]);
                assert_eq!(shape("attn.V"), vec![k, 2 * d_h]);
                assert_eq!(shape("attn.b"), vec![k, 1]);
                assert_eq!(shape("attn.U"), vec![1, k]);
            }
        }
    }
}

#[test]
fn initialization_is_seeded_and_sets_forget_bias() {
    let c = cfg(Attention::General);
    let a = ModelParams::initialize(&c, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = ModelParams::initialize(&c, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a.tensors(), b.tensors());
    assert!(a.get("dec.l1.b_f").unwrap().data().iter().all(|&x| x == 1.0));
    assert!(a.get("enc.l0.bwd.b_i").unwrap().data().iter().all(|&x| x == 0.0));
    assert!(a.get("proj.b_p").unwrap().data().iter().all(|&x| x == 0.0));
    let r = (6.0f64 / (8 + 4) as f64).sqrt();
    let wc = a.get("combine.W_c").unwrap();
    assert!(wc.data().iter().all(|x| x.abs() < r));
    assert!(wc.data().iter().any(|&x| x != 0.0));
}

#[test]
fn named_tensors_validate_shapes() {
    let c = cfg(Attention::Concat);
    let p = random_params(&c, 2);
    let back = ModelParams::from_named(&c, p.to_named()).unwrap();
    assert_eq!(back.tensors(), p.tensors());

    let mut bad = p.to_named();
    bad[3].shape = vec![1, bad[3].data.len()];
    assert!(matches!(
        ModelParams::from_named(&c, bad),
        Err(Seq2SeqError::Checkpoint(_))
    ));
    let mut short = p.to_named();
    short.pop();
    assert!(ModelParams::from_named(&c, short).is_err());
    let other = cfg(Attention::General);
    assert!(ModelParams::from_named(&other, p.to_named()).is_err());
}
