use super::params::{AttentionIds, LstmIds};
use super::{Attention, ModelConfig, ModelParams, Seq2SeqError, BOS_ID};
use crate::numerics::{Tape, Var};

/// Tape handles for one LSTM block.
#[derive(Clone, Copy, Debug)]
pub struct LstmVars {
    pub w_e: [Var; 4],
    pub w_h: [Var; 4],
    pub b: [Var; 4],
}

impl LstmVars {
    fn bind(ids: &LstmIds, vars: &[Var]) -> Self {
        LstmVars {
            w_e: ids.w_e.map(|i| vars[i]),
            w_h: ids.w_h.map(|i| vars[i]),
            b: ids.b.map(|i| vars[i]),
        }
    }
}

/// One LSTM step:
///
/// ```text
/// i = σ(W_ei e + W_hi h + b_i)      f = σ(W_ef e + W_hf h + b_f)
/// c' = f·c + i·tanh(W_ec e + W_hc h + b_c)
/// o = σ(W_eo e + W_ho h + b_o)      h' = o·tanh(c')
/// ```
pub fn lstm_step(
    tape: &mut Tape,
    layer: &LstmVars,
    e: Var,
    h_prev: Var,
    c_prev: Var,
) -> Result<(Var, Var), Seq2SeqError> {
    let mut pre = [e; 4];
    for g in 0..4 {
        let we = tape.matmul(layer.w_e[g], e)?;
        let wh = tape.matmul(layer.w_h[g], h_prev)?;
        pre[g] = tape.add_all(&[we, wh, layer.b[g]])?;
    }
    let i = tape.sigmoid(pre[0])?;
    let f = tape.sigmoid(pre[1])?;
    let cand = tape.tanh(pre[2])?;
    let o = tape.sigmoid(pre[3])?;
    let keep = tape.mul(f, c_prev)?;
    let write = tape.mul(i, cand)?;
    let c = tape.add(keep, write)?;
    let tc = tape.tanh(c)?;
    let h = tape.mul(o, tc)?;
    Ok((h, c))
}

#[derive(Clone, Copy, Debug)]
enum AttnVars {
    None,
    Dot,
    General { w_g: Var },
    Concat { w_cc: Var },
    Tensor { w: Var, v: Var, b: Var, u: Var, k: usize },
}

/// Model parameters bound to a tape.
pub struct BoundModel<'a> {
    config: &'a ModelConfig,
    enc_embedding: Var,
    dec_embedding: Var,
    encoder: Vec<[LstmVars; 2]>,
    decoder: Vec<LstmVars>,
    attention: AttnVars,
    combine: Option<(Var, Var)>,
    projection: (Var, Var),
}

/// Top-layer encoder states and the vector handed to the decoder.
#[derive(Clone, Debug)]
pub struct EncoderOutput {
    /// `s_1..s_m`, each `d_h x 1`.
    pub top_hidden: Vec<Var>,
    /// `[s_1 .. s_m]` as a `d_h x m` matrix.
    pub memory: Var,
    /// `[→h_m; ←h_1]` of the top layer.
    pub final_hidden: Var,
    /// Matching cell states.
    pub final_cell: Var,
}

/// Per decoder layer `(h, c)`.
#[derive(Clone, Debug)]
pub struct DecoderState {
    pub layers: Vec<(Var, Var)>,
}

impl DecoderState {
    /// Every decoder layer starts from the encoder's final state.
    pub fn from_encoder(enc: &EncoderOutput, layers: usize) -> Self {
        DecoderState {
            layers: vec![(enc.final_hidden, enc.final_cell); layers],
        }
    }

    pub fn top(&self) -> Var {
        self.layers.last().expect("decoder has layers").0
    }
}

impl<'a> BoundModel<'a> {
    /// Put every parameter on `tape`.
    pub fn new(tape: &mut Tape, params: &'a ModelParams) -> Self {
        let vars = params.bind(tape);
        Self::from_vars(params, &vars)
    }

    /// Bind to parameters already on a tape, in `params.names()` order.
    pub fn from_vars(params: &'a ModelParams, vars: &[Var]) -> Self {
        let layout = params.layout();
        let config = params.config();
        let attention = match layout.attention {
            AttentionIds::None => AttnVars::None,
            AttentionIds::Dot => AttnVars::Dot,
            AttentionIds::General { w_g } => AttnVars::General { w_g: vars[w_g] },
            AttentionIds::Concat { w_cc } => AttnVars::Concat { w_cc: vars[w_cc] },
            AttentionIds::Tensor { w, v, b, u } => AttnVars::Tensor {
                w: vars[w],
                v: vars[v],
                b: vars[b],
                u: vars[u],
                k: match config.attention {
                    Attention::Tensor { k } => k,
                    _ => unreachable!("layout follows config"),
                },
            },
        };
        BoundModel {
            config,
            enc_embedding: vars[layout.enc_embedding],
            dec_embedding: vars[layout.dec_embedding],
            encoder: layout
                .encoder
                .iter()
                .map(|[f, b]| [LstmVars::bind(f, vars), LstmVars::bind(b, vars)])
                .collect(),
            decoder: layout.decoder.iter().map(|l| LstmVars::bind(l, vars)).collect(),
            attention,
            combine: layout.combine.map(|(w, b)| (vars[w], vars[b])),
            projection: (vars[layout.projection.0], vars[layout.projection.1]),
        }
    }

    pub fn config(&self) -> &ModelConfig {
        self.config
    }

    fn zeros(&self, tape: &mut Tape, n: usize) -> Var {
        tape.constant(crate::numerics::Tensor::zeros(&[n, 1]))
    }

    /// Stacked bidirectional encoder.
    pub fn encode(&self, tape: &mut Tape, src: &[usize]) -> Result<EncoderOutput, Seq2SeqError> {
        if src.is_empty() {
            return Err(Seq2SeqError::EmptySource);
        }
        let vocab = self.config.src_vocab_size;
        let mut inputs = Vec::with_capacity(src.len());
        for &id in src {
            if id >= vocab {
                return Err(Seq2SeqError::TokenOutOfRange { id, vocab });
            }
            inputs.push(tape.column(self.enc_embedding, id)?);
        }

        let half = self.config.enc_hidden();
        let m = src.len();
        let mut finals = None;
        for [fwd, bwd] in &self.encoder {
            let zero = self.zeros(tape, half);
            let mut fwd_out = Vec::with_capacity(m);
            let (mut h, mut c) = (zero, zero);
            for &x in &inputs {
                (h, c) = lstm_step(tape, fwd, x, h, c)?;
                fwd_out.push(h);
            }
            let (fh, fc) = (h, c);

            let mut bwd_out = vec![zero; m];
            let (mut h, mut c) = (zero, zero);
            for j in (0..m).rev() {
                (h, c) = lstm_step(tape, bwd, inputs[j], h, c)?;
                bwd_out[j] = h;
            }
            let (bh, bc) = (h, c);

            inputs = fwd_out
                .iter()
                .zip(&bwd_out)
                .map(|(&f, &b)| tape.concat_rows(&[f, b]))
                .collect::<Result<_, _>>()?;
            finals = Some((fh, fc, bh, bc));
        }
        let (fh, fc, bh, bc) = finals.expect("at least one encoder layer");
        Ok(EncoderOutput {
            memory: tape.concat_cols(&inputs)?,
            final_hidden: tape.concat_rows(&[fh, bh])?,
            final_cell: tape.concat_rows(&[fc, bc])?,
            top_hidden: inputs,
        })
    }

    /// Attention weights `a = softmax(ã)` over the encoder states, `m x 1`.
    pub fn attention_weights(
        &self,
        tape: &mut Tape,
        enc: &EncoderOutput,
        h: Var,
    ) -> Result<Var, Seq2SeqError> {
        let scores = match self.attention {
            AttnVars::None => return Err(Seq2SeqError::NoAttention),
            AttnVars::Dot => {
                let mt = tape.transpose(enc.memory)?;
                tape.matmul(mt, h)?
            }
            AttnVars::General { w_g } => {
                let mt = tape.transpose(enc.memory)?;
                let wh = tape.matmul(w_g, h)?;
                tape.matmul(mt, wh)?
            }
            AttnVars::Concat { w_cc } => {
                let mut per = Vec::with_capacity(enc.top_hidden.len());
                for &s in &enc.top_hidden {
                    let sh = tape.concat_rows(&[s, h])?;
                    per.push(tape.matmul(w_cc, sh)?);
                }
                tape.concat_rows(&per)?
            }
            AttnVars::Tensor { w, v, b, u, k } => {
                let d_h = self.config.d_h;
                // Row (a*k + r) of the reshaped W is W[a, r, :]; after
                // multiplying by h and reshaping, column r of `m` is W_r h.
                let wmat = tape.reshape(w, &[d_h * k, d_h])?;
                let wh = tape.matmul(wmat, h)?;
                let m = tape.reshape(wh, &[d_h, k])?;
                let mt = tape.transpose(m)?;
                let mut per = Vec::with_capacity(enc.top_hidden.len());
                for &s in &enc.top_hidden {
                    let bilinear = tape.matmul(mt, s)?;
                    let sh = tape.concat_rows(&[s, h])?;
                    let linear = tape.matmul(v, sh)?;
                    let t = tape.add_all(&[bilinear, linear, b])?;
                    per.push(tape.matmul(u, t)?);
                }
                tape.concat_rows(&per)?
            }
        };
        Ok(tape.softmax(scores)?)
    }

    /// `ĥ = relu(W_c [g; h] + b_c)` with `g` the attention-weighted encoder state.
    pub fn attend_and_combine(
        &self,
        tape: &mut Tape,
        enc: &EncoderOutput,
        h: Var,
    ) -> Result<Var, Seq2SeqError> {
        let a = self.attention_weights(tape, enc, h)?;
        let g = tape.matmul(enc.memory, a)?;
        let (w_c, b_c) = self.combine.ok_or(Seq2SeqError::NoAttention)?;
        let gh = tape.concat_rows(&[g, h])?;
        let lin = tape.matmul(w_c, gh)?;
        let pre = tape.add(lin, b_c)?;
        Ok(tape.relu(pre)?)
    }

    /// One decoder step: distribution over the target vocabulary for the next token.
    pub fn decode_step(
        &self,
        tape: &mut Tape,
        prev_token: usize,
        state: &DecoderState,
        enc: &EncoderOutput,
    ) -> Result<(Var, DecoderState), Seq2SeqError> {
        let vocab = self.config.tgt_vocab_size;
        if prev_token >= vocab {
            return Err(Seq2SeqError::TokenOutOfRange {
                id: prev_token,
                vocab,
            });
        }
        let mut x = tape.column(self.dec_embedding, prev_token)?;
        let mut layers = Vec::with_capacity(self.decoder.len());
        for (block, &(h, c)) in self.decoder.iter().zip(&state.layers) {
            let (h2, c2) = lstm_step(tape, block, x, h, c)?;
            layers.push((h2, c2));
            x = h2;
        }
        let top = if self.combine.is_some() {
            self.attend_and_combine(tape, enc, x)?
        } else {
            x
        };
        let (w_p, b_p) = self.projection;
        let lin = tape.matmul(w_p, top)?;
        let logits = tape.add(lin, b_p)?;
        let dist = tape.softmax(logits)?;
        Ok((dist, DecoderState { layers }))
    }

    /// Teacher-forced distributions `v_1..v_n` for target `tgt` (step 0 reads BOS).
    pub fn teacher_forced(
        &self,
        tape: &mut Tape,
        src: &[usize],
        tgt: &[usize],
    ) -> Result<Vec<Var>, Seq2SeqError> {
        if tgt.is_empty() {
            return Err(Seq2SeqError::EmptyTarget);
        }
        let vocab = self.config.tgt_vocab_size;
        if let Some(&id) = tgt.iter().find(|&&id| id >= vocab) {
            return Err(Seq2SeqError::TokenOutOfRange { id, vocab });
        }
        let enc = self.encode(tape, src)?;
        let mut state = DecoderState::from_encoder(&enc, self.decoder.len());
        let mut prev = BOS_ID;
        let mut dists = Vec::with_capacity(tgt.len());
        for &w in tgt {
            let (dist, next) = self.decode_step(tape, prev, &state, &enc)?;
            dists.push(dist);
            state = next;
            prev = w;
        }
        Ok(dists)
    }

    /// Sum of per-word cross-entropy under teacher forcing.
    pub fn forward_loss(
        &self,
        tape: &mut Tape,
        src: &[usize],
        tgt: &[usize],
    ) -> Result<Var, Seq2SeqError> {
        let dists = self.teacher_forced(tape, src, tgt)?;
        let terms = dists
            .iter()
            .zip(tgt)
            .map(|(&d, &w)| tape.cross_entropy(d, w))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(tape.add_all(&terms)?)
    }

    /// `Σ ln v_i(w_i)`, the log of the sequence likelihood.
    pub fn log_likelihood(
        &self,
        tape: &mut Tape,
        src: &[usize],
        tgt: &[usize],
    ) -> Result<Var, Seq2SeqError> {
        let dists = self.teacher_forced(tape, src, tgt)?;
        let terms = dists
            .iter()
            .zip(tgt)
            .map(|(&d, &w)| tape.log_prob(d, w))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(tape.add_all(&terms)?)
    }
}
